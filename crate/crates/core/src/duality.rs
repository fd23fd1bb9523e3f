//! Action-dual experiments: full time reversal and pivot reversal about a
//! pair source, with term-by-term comparison of the dual path sums.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::network::{build_network, EdgeDoc, ElementDoc, ElementKind, NetworkError, OpticalNetwork, PhaseMode};
use crate::path_sum::{history_amplitude, joint_histories, reachable_outcomes, PathSumError};
use crate::phase::{circular_distance, wrap};

pub const TERM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    PathSum(#[from] PathSumError),
    #[error("boundary map is not bijective: {0}")]
    NotBijective(String),
    #[error("outcome {input:?} -> {output:?} is not covered by the boundary map")]
    Uncovered { input: Vec<String>, output: Vec<String> },
    #[error("{0} is not a source")]
    PivotNotSource(String),
    #[error("{0} must have two emission groups of two ports each")]
    PivotShape(String),
    #[error("removing {0} does not split the network into two halves")]
    NotSeparating(String),
}

/// One (input tuple, output tuple) boundary condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BoundaryPair {
    pub input: Vec<String>,
    pub output: Vec<String>,
}

impl BoundaryPair {
    pub fn new<S: AsRef<str>>(input: &[S], output: &[S]) -> Self {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect();
        BoundaryPair { input: own(input), output: own(output) }
    }

    fn refs(&self) -> (Vec<&str>, Vec<&str>) {
        (self.input.iter().map(String::as_str).collect(), self.output.iter().map(String::as_str).collect())
    }
}

impl std::fmt::Display for BoundaryPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} -> {})", self.input.join(","), self.output.join(","))
    }
}

/// Correspondence between the boundary conditions of two experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMap {
    pairs: Vec<(BoundaryPair, BoundaryPair)>,
}

impl BoundaryMap {
    pub fn new(pairs: Vec<(BoundaryPair, BoundaryPair)>) -> Result<Self, DualityError> {
        let mut from = HashSet::new();
        let mut to = HashSet::new();
        for (a, b) in &pairs {
            if !from.insert(a.clone()) {
                return Err(DualityError::NotBijective(format!("{a} appears twice")));
            }
            if !to.insert(b.clone()) {
                return Err(DualityError::NotBijective(format!("{b} is hit twice")));
            }
        }
        Ok(BoundaryMap { pairs })
    }

    pub fn pairs(&self) -> &[(BoundaryPair, BoundaryPair)] {
        &self.pairs
    }

    pub fn image(&self, pair: &BoundaryPair) -> Option<&BoundaryPair> {
        self.pairs.iter().find(|(a, _)| a == pair).map(|(_, b)| b)
    }

    pub fn preimage(&self, pair: &BoundaryPair) -> Option<&BoundaryPair> {
        self.pairs.iter().find(|(_, b)| b == pair).map(|(a, _)| a)
    }
}

/// Every single-source preparation with each outcome it can reach.
pub fn declared_outcomes(net: &OpticalNetwork) -> Result<Vec<BoundaryPair>, DualityError> {
    let mut out = Vec::new();
    for input in net.inputs() {
        for output in reachable_outcomes(net, &[input.as_str()])? {
            out.push(BoundaryPair { input: vec![input.clone()], output });
        }
    }
    Ok(out)
}

/// Port list of an element after reversing its direction; in and out
/// ports swap roles.
fn reversed_ports(kind: ElementKind, ports: &[String]) -> Vec<String> {
    match kind {
        ElementKind::BeamSplitter | ElementKind::Crossing => {
            vec![ports[2].clone(), ports[3].clone(), ports[0].clone(), ports[1].clone()]
        }
        ElementKind::Mirror | ElementKind::PhaseDelay => vec![ports[1].clone(), ports[0].clone()],
        ElementKind::Source | ElementKind::Detector => ports.to_vec(),
    }
}

fn reverse_element(e: &ElementDoc) -> ElementDoc {
    ElementDoc {
        id: e.id.clone(),
        kind: e.kind.reversed(),
        phase_param: e.phase_param,
        ports: reversed_ports(e.kind, &e.ports),
        groups: e.groups.clone(),
    }
}

fn reverse_edge(e: &EdgeDoc) -> EdgeDoc {
    EdgeDoc { from: e.to.clone(), to: e.from.clone() }
}

/// Sort a boundary tuple by its position in `order`.
fn ordered(mut labels: Vec<String>, order: &[String]) -> Vec<String> {
    labels.sort_by_key(|l| order.iter().position(|o| o == l));
    labels
}

/// Reverse every edge and swap sources with detectors. Each outcome
/// `(X -> Y)` maps to `(Y -> X)`.
pub fn time_reverse(net: &OpticalNetwork) -> Result<(OpticalNetwork, BoundaryMap), DualityError> {
    let mut doc = net.to_doc();
    doc.elements = doc.elements.iter().map(reverse_element).collect();
    doc.edges = doc.edges.iter().map(reverse_edge).collect();
    std::mem::swap(&mut doc.inputs, &mut doc.outputs);
    let reversed = build_network(&doc)?;
    let pairs = declared_outcomes(net)?
        .into_iter()
        .map(|p| {
            let image = BoundaryPair {
                input: ordered(p.output.clone(), reversed.inputs()),
                output: ordered(p.input.clone(), reversed.outputs()),
            };
            (p, image)
        })
        .collect();
    Ok((reversed, BoundaryMap::new(pairs)?))
}

/// Elements reachable from `start` without passing through `pivot`,
/// ignoring edge direction.
fn component(doc: &crate::network::ExperimentDoc, pivot: &str, start: &[String]) -> BTreeSet<String> {
    let owner = |endpoint: &str| endpoint.split_once('.').map_or(endpoint, |(e, _)| e).to_string();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut stack: Vec<String> = start.to_vec();
    while let Some(id) = stack.pop() {
        if id == pivot || !seen.insert(id.clone()) {
            continue;
        }
        for e in &doc.edges {
            let (a, b) = (owner(&e.from), owner(&e.to));
            if a == id {
                stack.push(b);
            } else if b == id {
                stack.push(a);
            }
        }
    }
    seen
}

/// Time-reverse the half of the network attached to the second port of each
/// emission group of `pivot`, turning the pivot into a crossing.
///
/// The B1 outcome `(pivot -> X_left, Y_right)` maps to `(Y -> X)`: inputs of
/// the new network are the left inputs and the right outputs, outputs are
/// the left outputs and the right inputs.
pub fn pivot_reverse(net: &OpticalNetwork, pivot: &str) -> Result<(OpticalNetwork, BoundaryMap), DualityError> {
    let p = net.element_by_id(pivot).ok_or_else(|| NetworkError::UnknownElement(pivot.to_string()))?;
    if p.kind() != ElementKind::Source {
        return Err(DualityError::PivotNotSource(pivot.to_string()));
    }
    let groups = p.groups();
    if groups.len() != 2 || groups.iter().any(|g| g.len() != 2) {
        return Err(DualityError::PivotShape(pivot.to_string()));
    }
    let port = |g: usize, side: usize| p.ports()[groups[g][side]].clone();
    let mut doc = net.to_doc();
    let neighbours = |side: usize| -> Vec<String> {
        (0..2)
            .filter_map(|g| {
                let endpoint = format!("{pivot}.{}", port(g, side));
                doc.edges.iter().find(|e| e.from == endpoint).map(|e| e.to.split('.').next().unwrap_or("").to_string())
            })
            .collect()
    };
    let left = component(&doc, pivot, &neighbours(0));
    let right = component(&doc, pivot, &neighbours(1));
    let covered = left.len() + right.len() + 1 == doc.elements.len();
    if left.is_empty() || right.is_empty() || !left.is_disjoint(&right) || !covered {
        return Err(DualityError::NotSeparating(pivot.to_string()));
    }

    let owner = |endpoint: &str| endpoint.split('.').next().unwrap_or("").to_string();
    let right_port =
        |endpoint: &str| owner(endpoint) == pivot && (0..2).any(|g| endpoint.ends_with(&format!(".{}", port(g, 1))));
    doc.edges = doc
        .edges
        .iter()
        .map(|e| if right.contains(&owner(&e.to)) || right_port(&e.from) { reverse_edge(e) } else { e.clone() })
        .collect();
    for e in &mut doc.elements {
        if e.id == pivot {
            e.kind = ElementKind::Crossing;
            e.ports = vec![port(0, 1), port(1, 1), port(0, 0), port(1, 0)];
            e.groups = None;
        } else if right.contains(&e.id) {
            *e = reverse_element(e);
        }
    }
    let old_in: Vec<String> = net.inputs().to_vec();
    let old_out: Vec<String> = net.outputs().to_vec();
    doc.inputs = old_in
        .iter()
        .filter(|l| left.contains(*l))
        .chain(old_out.iter().filter(|l| right.contains(*l)))
        .cloned()
        .collect();
    doc.outputs = old_out
        .iter()
        .filter(|l| left.contains(*l))
        .chain(old_in.iter().filter(|l| right.contains(*l)))
        .cloned()
        .collect();
    let pivoted = build_network(&doc)?;

    let mut pairs = Vec::new();
    for p in declared_outcomes(net)? {
        let all: Vec<&String> = p.input.iter().chain(&p.output).filter(|l| *l != pivot).collect();
        let input = all.iter().filter(|l| pivoted.inputs().contains(l)).map(|l| l.to_string()).collect();
        let output = all.iter().filter(|l| pivoted.outputs().contains(l)).map(|l| l.to_string()).collect();
        let image =
            BoundaryPair { input: ordered(input, pivoted.inputs()), output: ordered(output, pivoted.outputs()) };
        pairs.push((p, image));
    }
    Ok((pivoted, BoundaryMap::new(pairs)?))
}

/// Term lists of one mapped outcome in both experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeComparison {
    pub first: BoundaryPair,
    pub second: BoundaryPair,
    /// Path phases wrapped to `[0, 2π)` and sorted.
    pub terms_first: Vec<f64>,
    pub terms_second: Vec<f64>,
    pub probability_first: f64,
    pub probability_second: f64,
    /// `None` when the term counts differ.
    pub discrepancy: Option<f64>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub matched: bool,
    pub tolerance: f64,
    /// `None` when some outcome has different term counts.
    pub max_discrepancy: Option<f64>,
    pub outcomes: Vec<OutcomeComparison>,
}

fn sorted_terms(net: &OpticalNetwork, pair: &BoundaryPair, mode: PhaseMode) -> Result<(Vec<f64>, f64), DualityError> {
    let (i, o) = pair.refs();
    let histories = joint_histories(net, &i, &o, mode)?;
    let mut phases: Vec<f64> = histories.iter().map(|h| wrap(h.phase)).collect();
    phases.sort_by(f64::total_cmp);
    Ok((phases, history_amplitude(&histories).norm_sqr()))
}

/// Smallest, over cyclic alignments of the sorted lists, of the largest
/// circular distance between aligned phases.
fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (0..b.len())
        .map(|shift| {
            a.iter().enumerate().map(|(k, &x)| circular_distance(x, b[(k + shift) % b.len()])).fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Compare the sorted phase multisets of every mapped outcome pair.
pub fn verify_term_identity(
    net1: &OpticalNetwork,
    net2: &OpticalNetwork,
    bmap: &BoundaryMap,
    mode: PhaseMode,
) -> Result<DualityReport, DualityError> {
    for p in declared_outcomes(net1)? {
        if bmap.image(&p).is_none() {
            return Err(DualityError::Uncovered { input: p.input, output: p.output });
        }
    }
    let mut outcomes = Vec::with_capacity(bmap.pairs().len());
    for (first, second) in bmap.pairs() {
        let (ta, pa) = sorted_terms(net1, first, mode)?;
        let (tb, pb) = sorted_terms(net2, second, mode)?;
        let discrepancy = (ta.len() == tb.len()).then(|| multiset_distance(&ta, &tb));
        outcomes.push(OutcomeComparison {
            first: first.clone(),
            second: second.clone(),
            terms_first: ta,
            terms_second: tb,
            probability_first: pa,
            probability_second: pb,
            discrepancy,
            matched: discrepancy.is_some_and(|d| d < TERM_TOLERANCE),
        });
    }
    let max_discrepancy = outcomes.iter().try_fold(0.0, |acc: f64, o| o.discrepancy.map(|d| acc.max(d)));
    Ok(DualityReport {
        matched: outcomes.iter().all(|o| o.matched),
        tolerance: TERM_TOLERANCE,
        max_discrepancy,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{is_isomorphic, presets};

    fn pair(i: &[&str], o: &[&str]) -> BoundaryPair {
        BoundaryPair::new(i, o)
    }

    #[test]
    fn a1_reverses_to_a2() {
        let a1 = presets::a1(0.8).unwrap();
        let (rev, map) = time_reverse(&a1).unwrap();
        assert!(is_isomorphic(&rev, &presets::a2(0.8).unwrap()));
        assert_eq!(map.image(&pair(&["C"], &["A"])), Some(&pair(&["A"], &["C"])));
        let cb = map.image(&pair(&["C"], &["B"])).unwrap();
        assert_eq!(cb, &pair(&["B"], &["C"]));
        assert_ne!(cb, &pair(&["A"], &["D"]));
        assert_eq!(map.preimage(&pair(&["A"], &["D"])), Some(&pair(&["D"], &["A"])));
    }

    #[test]
    fn time_reverse_is_an_involution() {
        for name in presets::NAMES {
            let net = presets::preset(name, 0.3, 1.2).unwrap();
            let (once, _) = time_reverse(&net).unwrap();
            let (twice, _) = time_reverse(&once).unwrap();
            assert!(is_isomorphic(&net, &twice), "{name}");
        }
    }

    #[test]
    fn b1_pivots_to_b2() {
        let b1 = presets::b1(0.3, 2.0).unwrap();
        let (piv, map) = pivot_reverse(&b1, "Z").unwrap();
        assert!(is_isomorphic(&piv, &presets::b2(0.3, 2.0).unwrap()));
        assert_eq!(map.image(&pair(&["Z"], &["A", "C"])), Some(&pair(&["C"], &["A"])));
        assert_eq!(map.image(&pair(&["Z"], &["B", "D"])), Some(&pair(&["D"], &["B"])));
        assert_eq!(map.pairs().len(), 4);
    }

    #[test]
    fn pivot_errors() {
        let b1 = presets::b1(0.0, 0.0).unwrap();
        assert!(matches!(pivot_reverse(&b1, "BSL"), Err(DualityError::PivotNotSource(_))));
        assert!(pivot_reverse(&b1, "nope").is_err());
        let a1 = presets::a1(0.0).unwrap();
        assert!(matches!(pivot_reverse(&a1, "C"), Err(DualityError::PivotShape(_))));
        // groups pairing two ports of the same half
        let mut doc = presets::doc("b1").unwrap();
        let z = doc.elements.iter_mut().find(|e| e.id == "Z").unwrap();
        z.groups = Some(vec![vec!["l_up".into(), "l_down".into()], vec!["r_up".into(), "r_down".into()]]);
        let same_side = build_network(&doc).unwrap();
        assert!(matches!(pivot_reverse(&same_side, "Z"), Err(DualityError::NotSeparating(_))));
    }

    #[test]
    fn dual_presets_match_term_by_term() {
        let a1 = presets::a1(1.1).unwrap();
        let (_, map) = time_reverse(&a1).unwrap();
        let report = verify_term_identity(&a1, &presets::a2(1.1).unwrap(), &map, PhaseMode::Relative).unwrap();
        assert!(report.matched);
        assert!(report.outcomes.iter().all(|o| o.terms_first.len() == 4));

        let b1 = presets::b1(0.3, 2.0).unwrap();
        let (_, map) = pivot_reverse(&b1, "Z").unwrap();
        let report = verify_term_identity(&b1, &presets::b2(0.3, 2.0).unwrap(), &map, PhaseMode::Relative).unwrap();
        assert!(report.matched, "{report:?}");
        assert!(report.outcomes.iter().all(|o| o.terms_first.len() == 2));
        assert!(report.outcomes.iter().all(|o| (o.probability_first - o.probability_second).abs() < 1e-12));
    }

    #[test]
    fn extra_phase_breaks_duality_by_its_value() {
        let delta = 0.3;
        let mut doc = presets::doc("a1").unwrap();
        let edge = doc.edges.iter().position(|e| e.from == "M4.out").unwrap();
        let target = doc.edges[edge].to.clone();
        doc.edges[edge].to = "X.in".into();
        doc.edges.push(EdgeDoc { from: "X.out".into(), to: target });
        doc.elements.push(ElementDoc {
            id: "X".into(),
            kind: ElementKind::PhaseDelay,
            phase_param: Some(delta),
            ports: vec!["in".into(), "out".into()],
            groups: None,
        });
        let broken = build_network(&doc).unwrap();
        let a1 = presets::a1(0.0).unwrap();
        let map =
            BoundaryMap::new(declared_outcomes(&a1).unwrap().into_iter().map(|p| (p.clone(), p)).collect()).unwrap();
        let report = verify_term_identity(&a1, &broken, &map, PhaseMode::Relative).unwrap();
        assert!(!report.matched);
        let max = report.max_discrepancy.unwrap();
        assert!((max - delta).abs() < 1e-12, "{max}");
    }

    #[test]
    fn map_must_be_bijective_and_cover() {
        let p = pair(&["C"], &["A"]);
        let q = pair(&["C"], &["B"]);
        assert!(BoundaryMap::new(vec![(p.clone(), q.clone()), (q.clone(), q.clone())]).is_err());
        assert!(BoundaryMap::new(vec![(p.clone(), q.clone()), (p.clone(), p.clone())]).is_err());
        let a1 = presets::a1(0.0).unwrap();
        let partial = BoundaryMap::new(vec![(p.clone(), p)]).unwrap();
        assert!(matches!(
            verify_term_identity(&a1, &a1, &partial, PhaseMode::Relative),
            Err(DualityError::Uncovered { .. })
        ));
    }

    #[test]
    fn multiset_distance_wraps() {
        use std::f64::consts::TAU;
        assert!(multiset_distance(&[1e-13, 1.0], &[1.0, TAU - 1e-13]) < 1e-12);
        assert!((multiset_distance(&[0.5], &[0.7]) - 0.2).abs() < 1e-12);
    }
}
