#![allow(dead_code)]

use duality_core::network::{EdgeDoc, ElementDoc, ElementKind, ExperimentDoc};
use proptest::prelude::*;

/// One layer of a mode ladder.
#[derive(Debug, Clone)]
pub enum Layer {
    /// Beamsplitter (`true`) or crossing on modes `(i, i + 1)`.
    Pair(usize, bool),
    Phase(usize, f64),
    Mirror(usize),
}

fn el(id: String, kind: ElementKind, ports: &[&str], phase: Option<f64>) -> ElementDoc {
    ElementDoc { id, kind, phase_param: phase, ports: ports.iter().map(|s| s.to_string()).collect(), groups: None }
}

/// `modes` parallel arms from sources `S0..` to detectors `D0..`, with the
/// layers applied in order.
pub fn ladder(modes: usize, layers: &[Layer]) -> ExperimentDoc {
    let mut doc = ExperimentDoc::default();
    let mut cur: Vec<String> = Vec::new();
    for m in 0..modes {
        doc.elements.push(el(format!("S{m}"), ElementKind::Source, &["o"], None));
        doc.inputs.push(format!("S{m}"));
        cur.push(format!("S{m}.o"));
    }
    let link = |doc: &mut ExperimentDoc, from: &str, to: String| doc.edges.push(EdgeDoc { from: from.to_string(), to });
    for (k, layer) in layers.iter().enumerate() {
        match *layer {
            Layer::Pair(i, bs) => {
                let j = i + 1;
                let id = format!("X{k}");
                let kind = if bs { ElementKind::BeamSplitter } else { ElementKind::Crossing };
                doc.elements.push(el(id.clone(), kind, &["ia", "ib", "oa", "ob"], None));
                link(&mut doc, &cur[i].clone(), format!("{id}.ia"));
                link(&mut doc, &cur[j].clone(), format!("{id}.ib"));
                cur[i] = format!("{id}.oa");
                cur[j] = format!("{id}.ob");
            }
            Layer::Phase(m, phase) => {
                let id = format!("P{k}");
                doc.elements.push(el(id.clone(), ElementKind::PhaseDelay, &["in", "out"], Some(phase)));
                link(&mut doc, &cur[m].clone(), format!("{id}.in"));
                cur[m] = format!("{id}.out");
            }
            Layer::Mirror(m) => {
                let id = format!("M{k}");
                doc.elements.push(el(id.clone(), ElementKind::Mirror, &["in", "out"], None));
                link(&mut doc, &cur[m].clone(), format!("{id}.in"));
                cur[m] = format!("{id}.out");
            }
        }
    }
    for (m, end) in cur.iter().enumerate() {
        doc.elements.push(el(format!("D{m}"), ElementKind::Detector, &["i"], None));
        doc.outputs.push(format!("D{m}"));
        link(&mut doc, end, format!("D{m}.i"));
    }
    doc
}

pub fn layer(modes: usize) -> impl Strategy<Value = Layer> {
    prop_oneof![
        3 => (0..modes - 1, any::<bool>()).prop_map(|(i, bs)| Layer::Pair(i, bs)),
        2 => (0..modes, -7.0..7.0f64).prop_map(|(m, p)| Layer::Phase(m, p)),
        1 => (0..modes).prop_map(Layer::Mirror),
    ]
}

/// Random ladders with 2 to 4 modes and up to `max_layers` layers.
pub fn network(max_layers: usize) -> impl Strategy<Value = (usize, Vec<Layer>)> {
    (2usize..=4).prop_flat_map(move |modes| (Just(modes), prop::collection::vec(layer(modes), 0..=max_layers)))
}

/// Ladders on which every path crosses the same number of beamsplitters:
/// each block splits every adjacent pair `(0,1), (2,3)` or none.
pub fn balanced_network(max_blocks: usize) -> impl Strategy<Value = (usize, Vec<Layer>)> {
    let block = prop_oneof![
        Just(vec![Layer::Pair(0, true), Layer::Pair(2, true)]),
        Just(vec![Layer::Pair(1, false)]),
        (0..4usize, -7.0..7.0f64).prop_map(|(m, p)| vec![Layer::Phase(m, p)]),
    ];
    prop::collection::vec(block, 0..=max_blocks).prop_map(|blocks| (4, blocks.concat()))
}
