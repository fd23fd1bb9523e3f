//! Amplitudes, joint tables and conditional probabilities from coarse path
//! sets.
//!
//! Multi-photon histories are the products of single-photon paths: a source
//! in the input tuple picks one of its port groups and emits one photon per
//! port, each detector in the output tuple picks one of its groups, and the
//! photons are assigned one-to-one to the target ports. Phases add and
//! magnitudes multiply, and all such histories are summed coherently.

use std::collections::HashMap;

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::network::{photon_paths, CoarsePath, NetworkError, OpticalNetwork, PhaseMode, PortRef};

#[derive(Debug, Error)]
pub enum PathSumError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("boundary {0} appears twice in one tuple")]
    RepeatedBoundary(String),
    #[error("impossible preparation: every outcome for {0:?} has zero weight")]
    ImpossiblePreparation(Vec<String>),
    #[error("table has no entries for input {0:?}")]
    MissingInput(Vec<String>),
    #[error("outcome {0:?} is not in the table")]
    MissingOutcome(Vec<String>),
}

/// A dimensionless complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

impl Amplitude {
    pub fn value(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.value().norm_sqr()
    }
}

impl From<Complex64> for Amplitude {
    fn from(z: Complex64) -> Self {
        debug_assert!(z.re.is_finite() && z.im.is_finite());
        Amplitude { re: z.re, im: z.im }
    }
}

/// `Σ magnitude·e^{i·phase}` over a path list.
pub fn amplitude(paths: &[CoarsePath]) -> Amplitude {
    paths.iter().map(|p| Complex64::from_polar(p.magnitude, p.phase)).sum::<Complex64>().into()
}

/// One joint multi-photon history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointHistory {
    pub paths: Vec<CoarsePath>,
    pub phase: f64,
    pub magnitude: f64,
}

impl JointHistory {
    pub fn traverses(&self, element: &str) -> bool {
        self.paths.iter().any(|p| p.traverses(element))
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Sum of history amplitudes.
pub fn history_amplitude(histories: &[JointHistory]) -> Amplitude {
    histories.iter().map(JointHistory::amplitude).sum::<Complex64>().into()
}

fn check_unique(labels: &[&str]) -> Result<(), PathSumError> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(PathSumError::RepeatedBoundary(l.to_string()));
        }
    }
    Ok(())
}

/// Each combination of one group per boundary element, flattened to ports.
fn group_choices(net: &OpticalNetwork, elements: &[usize]) -> Vec<Vec<PortRef>> {
    elements
        .iter()
        .map(|&e| net.element(e).groups().iter().map(move |g| (e, g)))
        .multi_cartesian_product()
        .map(|choice| {
            choice.into_iter().flat_map(|(e, g)| g.iter().map(move |&port| PortRef { element: e, port })).collect()
        })
        .collect()
}

fn group_weight(net: &OpticalNetwork, elements: &[usize]) -> f64 {
    elements.iter().map(|&e| (net.element(e).groups().len() as f64).sqrt().recip()).product()
}

/// Every joint history consistent with the boundary tuples, in
/// deterministic order.
pub fn joint_histories(
    net: &OpticalNetwork,
    inputs: &[&str],
    outputs: &[&str],
    mode: PhaseMode,
) -> Result<Vec<JointHistory>, PathSumError> {
    check_unique(inputs)?;
    check_unique(outputs)?;
    let sources = inputs.iter().map(|l| net.input_index(l)).collect::<Result<Vec<_>, _>>()?;
    let detectors = outputs.iter().map(|l| net.output_index(l)).collect::<Result<Vec<_>, _>>()?;
    let weight = match mode {
        PhaseMode::Relative => 1.0,
        PhaseMode::Physical => group_weight(net, &sources) * group_weight(net, &detectors),
    };

    let mut cache: HashMap<PortRef, Vec<CoarsePath>> = HashMap::new();
    let mut out = Vec::new();
    for photons in group_choices(net, &sources) {
        for port in &photons {
            cache.entry(*port).or_insert_with(|| photon_paths(net, *port, mode));
        }
        for targets in group_choices(net, &detectors) {
            if targets.len() != photons.len() {
                continue;
            }
            for assignment in (0..targets.len()).permutations(targets.len()) {
                let per_photon: Vec<Vec<&CoarsePath>> = photons
                    .iter()
                    .zip(&assignment)
                    .map(|(src, &t)| {
                        let target = targets[t];
                        let det = net.element(target.element);
                        cache[src]
                            .iter()
                            .filter(|p| p.detector == det.id() && p.detector_port == det.ports()[target.port])
                            .collect()
                    })
                    .collect();
                if per_photon.iter().any(Vec::is_empty) {
                    continue;
                }
                for combo in per_photon.into_iter().multi_cartesian_product() {
                    let phase = combo.iter().map(|p| p.phase).sum();
                    let magnitude = weight * combo.iter().map(|p| p.magnitude).product::<f64>();
                    out.push(JointHistory { paths: combo.into_iter().cloned().collect(), phase, magnitude });
                }
            }
        }
    }
    Ok(out)
}

/// Unnormalised joint probability `|Σ amplitudes|²` for a boundary pair.
pub fn joint_probability(
    net: &OpticalNetwork,
    inputs: &[&str],
    outputs: &[&str],
    mode: PhaseMode,
) -> Result<f64, PathSumError> {
    Ok(history_amplitude(&joint_histories(net, inputs, outputs, mode)?).norm_sqr())
}

/// Output tuples with at least one joint history, ordered by the network's
/// output list.
pub fn reachable_outcomes(net: &OpticalNetwork, inputs: &[&str]) -> Result<Vec<Vec<String>>, PathSumError> {
    check_unique(inputs)?;
    let sources = inputs.iter().map(|l| net.input_index(l)).collect::<Result<Vec<_>, _>>()?;
    let photons: usize = sources.iter().map(|&s| net.element(s).groups()[0].len()).sum();
    let mut out = Vec::new();
    for size in 1..=photons.min(net.outputs().len()) {
        for subset in net.outputs().iter().combinations(size) {
            let labels: Vec<&str> = subset.iter().map(|s| s.as_str()).collect();
            if !joint_histories(net, inputs, &labels, PhaseMode::Relative)?.is_empty() {
                out.push(labels.iter().map(|s| s.to_string()).collect());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointEntry {
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub value: f64,
}

/// Unnormalised joint probabilities keyed by (input tuple, output tuple).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointTable {
    pub mode: PhaseMode,
    pub entries: Vec<JointEntry>,
}

impl JointTable {
    pub fn get(&self, input: &[&str], output: &[&str]) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.input.iter().eq(input.iter()) && e.output.iter().eq(output.iter()))
            .map(|e| e.value)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.value).sum()
    }

    /// Entries for one input tuple.
    pub fn rows<'a>(&'a self, input: &'a [&'a str]) -> impl Iterator<Item = &'a JointEntry> + 'a {
        self.entries.iter().filter(move |e| e.input.iter().eq(input.iter()))
    }
}

/// Joint table over the listed output tuples for one input tuple.
pub fn joint_table(
    net: &OpticalNetwork,
    inputs: &[&str],
    outs: &[Vec<String>],
    mode: PhaseMode,
) -> Result<JointTable, PathSumError> {
    let mut entries = Vec::with_capacity(outs.len());
    for out in outs {
        let labels: Vec<&str> = out.iter().map(String::as_str).collect();
        entries.push(JointEntry {
            input: inputs.iter().map(|s| s.to_string()).collect(),
            output: out.clone(),
            value: joint_probability(net, inputs, &labels, mode)?,
        });
    }
    Ok(JointTable { mode, entries })
}

/// Joint table over every single-source input and its reachable outcomes.
pub fn full_table(net: &OpticalNetwork, mode: PhaseMode) -> Result<JointTable, PathSumError> {
    let mut entries = Vec::new();
    for input in net.inputs() {
        let inputs = [input.as_str()];
        let outs = reachable_outcomes(net, &inputs)?;
        entries.extend(joint_table(net, &inputs, &outs, mode)?.entries);
    }
    Ok(JointTable { mode, entries })
}

/// `P(outcome | given)`: the entry divided by the sum over all outcomes
/// recorded for `given`.
pub fn conditional(table: &JointTable, given: &[&str], outcome: &[&str]) -> Result<f64, PathSumError> {
    let key = || given.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let rows: Vec<&JointEntry> = table.rows(given).collect();
    if rows.is_empty() {
        return Err(PathSumError::MissingInput(key()));
    }
    let entry = rows
        .iter()
        .find(|e| e.output.iter().eq(outcome.iter()))
        .ok_or_else(|| PathSumError::MissingOutcome(outcome.iter().map(|s| s.to_string()).collect()))?;
    let total: f64 = rows.iter().map(|e| e.value).sum();
    if total <= 0.0 {
        return Err(PathSumError::ImpossiblePreparation(key()));
    }
    Ok(entry.value / total)
}

/// Path restriction for partial amplitudes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Through(String),
    Avoid(String),
}

/// Amplitude over the histories satisfying `constraint`.
pub fn partial_amplitude(
    net: &OpticalNetwork,
    inputs: &[&str],
    outputs: &[&str],
    constraint: &Constraint,
    mode: PhaseMode,
) -> Result<Amplitude, PathSumError> {
    let (id, keep) = match constraint {
        Constraint::Through(id) => (id, true),
        Constraint::Avoid(id) => (id, false),
    };
    if net.element_index(id).is_none() {
        return Err(NetworkError::UnknownElement(id.clone()).into());
    }
    let histories: Vec<JointHistory> =
        joint_histories(net, inputs, outputs, mode)?.into_iter().filter(|h| h.traverses(id) == keep).collect();
    Ok(history_amplitude(&histories))
}
