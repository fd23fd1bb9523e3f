//! State-vector backend: stage unitaries over spatial modes and the Born
//! rule.
//!
//! Every edge of the network is one spatial mode. Elements are assigned to
//! sequential stages by counting two-mode elements (beamsplitters and
//! crossings): a two-mode element sits in stage `b`, where `b` is the
//! largest number of two-mode elements on any path up to and including it,
//! and single-mode elements sit in stage `b + 1`. The basis after stage `k`
//! is the set of edges leaving elements of stage `≤ k` (or a source) and
//! entering elements of stage `> k` (or a detector), listed in edge order.
//!
//! Several photons are carried as distinguishable tensor factors; detection
//! amplitudes sum over the assignments of photons to detector ports.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{kron_power, unitarity_deviation, CMatrix, CVector, I};
use crate::network::{ElementKind, NetworkError, OpticalNetwork, PhaseMode, PortRef};
use crate::path_sum::{reachable_outcomes, JointEntry, JointTable, PathSumError};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    PathSum(#[from] PathSumError),
    #[error("network is not layerable: {0}")]
    NotLayerable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state basis does not match the stage basis")]
    BasisMismatch,
    #[error("unknown mode {0}")]
    UnknownMode(String),
    #[error("state is not normalised (norm {0})")]
    NotNormalized(f64),
    #[error("cut {cut} is outside 0..={stages}")]
    BadCut { cut: usize, stages: usize },
    #[error("no mode of cut {cut} carries element {element}")]
    NoArm { cut: usize, element: String },
    #[error("boundary {0} appears twice in one tuple")]
    RepeatedBoundary(String),
}

/// Amplitudes over an ordered list of mode labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    basis: Vec<String>,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(basis: Vec<String>, amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        if basis.len() != amplitudes.len() {
            return Err(StateError::DimensionMismatch { expected: basis.len(), got: amplitudes.len() });
        }
        Ok(PureState { basis, amplitudes: CVector::from_vec(amplitudes) })
    }

    /// The basis vector for `mode`.
    pub fn basis_state(basis: Vec<String>, mode: &str) -> Result<Self, StateError> {
        let k = basis.iter().position(|b| b == mode).ok_or_else(|| StateError::UnknownMode(mode.to_string()))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.len()];
        amps[k] = Complex64::new(1.0, 0.0);
        PureState::new(basis, amps)
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, mode: &str) -> Result<Complex64, StateError> {
        self.basis
            .iter()
            .position(|b| b == mode)
            .map(|k| self.amplitudes[k])
            .ok_or_else(|| StateError::UnknownMode(mode.to_string()))
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.amplitudes)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, StateError> {
        if self.basis != other.basis {
            return Err(StateError::BasisMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    fn photons(&self) -> usize {
        self.basis.first().map_or(0, |b| b.split('⊗').count())
    }
}

/// A unitary over a mode basis, tagged with what it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    pub matrix: CMatrix,
    pub provenance: String,
}

impl ModeUnitary {
    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }
}

/// One sequential stage: the elements it contains and the map from the
/// basis before it to the basis after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub elements: Vec<String>,
    pub input_basis: Vec<String>,
    pub output_basis: Vec<String>,
    pub unitary: ModeUnitary,
}

/// Human-readable label of an edge's mode.
fn mode_label(net: &OpticalNetwork, edge: usize) -> String {
    let e = net.edges()[edge];
    let (head, tail) = (net.element(e.to.element), net.element(e.from.element));
    if head.kind() == ElementKind::Detector && head.ports().len() == 1 {
        head.id().to_string()
    } else if tail.kind() == ElementKind::Source && tail.ports().len() == 1 {
        tail.id().to_string()
    } else {
        format!("{}->{}", net.port_name(e.from), net.port_name(e.to))
    }
}

/// Stage index of every element; boundary elements get `None`.
fn stage_of(net: &OpticalNetwork) -> Vec<Option<usize>> {
    let mut depth = vec![0usize; net.elements().len()];
    for &i in net.topological_order() {
        let elem = net.element(i);
        let before = elem
            .inputs()
            .filter_map(|p| net.edge_to(PortRef { element: i, port: p }))
            .map(|e| depth[net.edges()[e].from.element])
            .max()
            .unwrap_or(0);
        depth[i] = before + usize::from(elem.kind().is_two_mode());
    }
    net.elements()
        .iter()
        .zip(depth)
        .map(|(e, b)| match e.kind() {
            k if k.is_boundary() => None,
            k if k.is_two_mode() => Some(b),
            _ => Some(b + 1),
        })
        .collect()
}

/// Linear action of one element on the amplitudes of its input ports.
fn element_outputs(kind: ElementKind, phase: Option<f64>, input: &[Complex64]) -> Vec<Complex64> {
    let r = Complex64::from(FRAC_1_SQRT_2);
    match kind {
        ElementKind::BeamSplitter => vec![r * (input[0] + I * input[1]), r * (I * input[0] + input[1])],
        ElementKind::Crossing => vec![input[0], input[1]],
        ElementKind::Mirror => vec![input[0]],
        ElementKind::PhaseDelay => vec![Complex64::from_polar(1.0, phase.unwrap_or(0.0)) * input[0]],
        ElementKind::Source | ElementKind::Detector => Vec::new(),
    }
}

struct Layering {
    stages: Vec<Stage>,
    cuts: Vec<Vec<usize>>,
}

fn layer(net: &OpticalNetwork) -> Result<Layering, StateError> {
    let stage = stage_of(net);
    let count = stage.iter().flatten().copied().max().unwrap_or(0);
    // boundary order: sources before every stage, detectors after
    let rank = |i: usize| match net.element(i).kind() {
        ElementKind::Source => 0,
        ElementKind::Detector => count + 1,
        _ => stage[i].expect("internal elements have a stage"),
    };
    let cuts: Vec<Vec<usize>> = (0..=count)
        .map(|k| {
            (0..net.edges().len())
                .filter(|&e| {
                    let edge = net.edges()[e];
                    rank(edge.from.element) <= k && rank(edge.to.element) > k
                })
                .collect()
        })
        .collect();

    let mut stages = Vec::with_capacity(count);
    for k in 1..=count {
        let members: Vec<usize> = net.topological_order().iter().copied().filter(|&i| stage[i] == Some(k)).collect();
        let (before, after) = (&cuts[k - 1], &cuts[k]);
        let mut matrix = CMatrix::zeros(after.len(), before.len());
        for (col, &start) in before.iter().enumerate() {
            let mut amps: BTreeMap<usize, Complex64> = BTreeMap::from([(start, Complex64::new(1.0, 0.0))]);
            for &m in &members {
                let elem = net.element(m);
                let input: Vec<Complex64> = elem
                    .inputs()
                    .map(|p| {
                        net.edge_to(PortRef { element: m, port: p }).and_then(|e| amps.remove(&e)).unwrap_or_default()
                    })
                    .collect();
                for (p, a) in elem.outputs().zip(element_outputs(elem.kind(), elem.phase(), &input)) {
                    if let Some(e) = net.edge_from(PortRef { element: m, port: p }) {
                        *amps.entry(e).or_default() += a;
                    }
                }
            }
            for (e, a) in amps {
                let row = after.iter().position(|&x| x == e).ok_or_else(|| {
                    StateError::NotLayerable(format!("mode {} leaves stage {k} outside its cut", mode_label(net, e)))
                })?;
                matrix[(row, col)] = a;
            }
        }
        let ids: Vec<String> = members.iter().map(|&m| net.element(m).id().to_string()).collect();
        stages.push(Stage {
            unitary: ModeUnitary { matrix, provenance: ids.join("+") },
            elements: ids,
            input_basis: before.iter().map(|&e| mode_label(net, e)).collect(),
            output_basis: after.iter().map(|&e| mode_label(net, e)).collect(),
        });
    }
    Ok(Layering { stages, cuts })
}

/// One unitary per sequential stage, in propagation order.
pub fn layer_unitaries(net: &OpticalNetwork) -> Result<Vec<Stage>, StateError> {
    Ok(layer(net)?.stages)
}

fn tensor_basis(modes: &[String], photons: usize) -> Vec<String> {
    if photons == 0 {
        return vec![String::new()];
    }
    (0..photons).map(|_| modes.iter()).multi_cartesian_product().map(|v| v.iter().join("⊗")).collect()
}

fn apply(state: &PureState, from: &[String], to: &[String], u: &CMatrix) -> Result<PureState, StateError> {
    let n = state.photons();
    if state.basis != tensor_basis(from, n) {
        return Err(if state.basis.len() != from.len().pow(n as u32) {
            StateError::DimensionMismatch { expected: from.len().pow(n as u32), got: state.basis.len() }
        } else {
            StateError::BasisMismatch
        });
    }
    let amplitudes = if n == 1 { u * &state.amplitudes } else { kron_power(u, n) * &state.amplitudes };
    Ok(PureState { basis: tensor_basis(to, n), amplitudes })
}

/// Apply every stage in order.
pub fn evolve(state: &PureState, stages: &[Stage]) -> Result<PureState, StateError> {
    stages.iter().try_fold(state.clone(), |s, st| apply(&s, &st.input_basis, &st.output_basis, &st.unitary.matrix))
}

/// `|⟨mode|state⟩|²` for a normalised state.
pub fn born(state: &PureState, mode: &str) -> Result<f64, StateError> {
    if !state.is_normalized() {
        return Err(StateError::NotNormalized(state.norm()));
    }
    Ok(state.amplitude(mode)?.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The prepared state evolved through the stages before the cut.
    Forward,
    /// The outcome state evolved back through the adjoints of the stages
    /// after the cut.
    Backward,
}

/// The state at `cut` (0 = before the first stage).
pub fn intermediate(
    state: &PureState,
    stages: &[Stage],
    cut: usize,
    direction: Direction,
) -> Result<PureState, StateError> {
    if cut > stages.len() {
        return Err(StateError::BadCut { cut, stages: stages.len() });
    }
    match direction {
        Direction::Forward => evolve(state, &stages[..cut]),
        Direction::Backward => stages[cut..].iter().rev().try_fold(state.clone(), |s, st| {
            apply(&s, &st.output_basis, &st.input_basis, &st.unitary.matrix.adjoint())
        }),
    }
}

/// A network together with its stage decomposition.
#[derive(Debug, Clone)]
pub struct StateBackend<'a> {
    net: &'a OpticalNetwork,
    stages: Vec<Stage>,
    cuts: Vec<Vec<usize>>,
}

impl<'a> StateBackend<'a> {
    pub fn new(net: &'a OpticalNetwork) -> Result<Self, StateError> {
        let Layering { stages, cuts } = layer(net)?;
        Ok(StateBackend { net, stages, cuts })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Mode labels of cut `k`.
    pub fn basis(&self, cut: usize) -> Result<Vec<String>, StateError> {
        let edges = self.cuts.get(cut).ok_or(StateError::BadCut { cut, stages: self.stages.len() })?;
        Ok(edges.iter().map(|&e| mode_label(self.net, e)).collect())
    }

    fn check_unique(labels: &[&str]) -> Result<(), StateError> {
        match labels.iter().enumerate().find(|(i, l)| labels[..*i].contains(l)) {
            Some((_, l)) => Err(StateError::RepeatedBoundary(l.to_string())),
            None => Ok(()),
        }
    }

    /// Normalised superposition over port groups for boundary elements,
    /// as `(amplitude, edge tuple)` terms in cut indices.
    fn boundary_terms(
        &self,
        elements: &[usize],
        cut: usize,
        edge_of: impl Fn(PortRef) -> Option<usize>,
    ) -> Vec<(f64, Vec<usize>)> {
        let weight: f64 =
            elements.iter().map(|&e| (self.net.element(e).groups().len() as f64).sqrt().recip()).product();
        elements
            .iter()
            .map(|&e| self.net.element(e).groups().iter().map(move |g| (e, g)))
            .multi_cartesian_product()
            .filter_map(|choice| {
                choice
                    .into_iter()
                    .flat_map(|(e, g)| g.iter().map(move |&port| PortRef { element: e, port }))
                    .map(|p| edge_of(p).and_then(|edge| self.cuts[cut].iter().position(|&x| x == edge)))
                    .collect::<Option<Vec<usize>>>()
            })
            .map(|modes| (weight, modes))
            .collect()
    }

    fn flat_index(dim: usize, modes: &[usize]) -> usize {
        modes.iter().fold(0, |acc, &m| acc * dim + m)
    }

    /// The prepared state of the given sources on the initial basis.
    pub fn prepare(&self, inputs: &[&str]) -> Result<PureState, StateError> {
        Self::check_unique(inputs)?;
        let sources = inputs.iter().map(|l| self.net.input_index(l)).collect::<Result<Vec<_>, _>>()?;
        let terms = self.boundary_terms(&sources, 0, |p| self.net.edge_from(p));
        let photons = terms.first().map_or(0, |(_, m)| m.len());
        let dim = self.cuts[0].len();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim.pow(photons as u32)];
        for (w, modes) in terms {
            amps[Self::flat_index(dim, &modes)] += w;
        }
        PureState::new(tensor_basis(&self.basis(0)?, photons), amps)
    }

    /// The (unnormalised) detection state whose overlap with a final state
    /// is the amplitude of firing exactly the given detectors.
    pub fn detection_state(&self, outputs: &[&str], photons: usize) -> Result<PureState, StateError> {
        Self::check_unique(outputs)?;
        let detectors = outputs.iter().map(|l| self.net.output_index(l)).collect::<Result<Vec<_>, _>>()?;
        let last = self.stages.len();
        let dim = self.cuts[last].len();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim.pow(photons as u32)];
        for (w, modes) in self.boundary_terms(&detectors, last, |p| self.net.edge_to(p)) {
            if modes.len() != photons {
                continue;
            }
            for perm in (0..photons).permutations(photons) {
                let assigned: Vec<usize> = perm.iter().map(|&k| modes[k]).collect();
                amps[Self::flat_index(dim, &assigned)] += w;
            }
        }
        PureState::new(tensor_basis(&self.basis(last)?, photons), amps)
    }

    /// Amplitude of the given outcome for a final state.
    pub fn outcome_amplitude(&self, state: &PureState, outputs: &[&str]) -> Result<Complex64, StateError> {
        self.detection_state(outputs, state.photons())?.inner(state)
    }

    pub fn final_state(&self, inputs: &[&str]) -> Result<PureState, StateError> {
        evolve(&self.prepare(inputs)?, &self.stages)
    }

    pub fn joint_probability(&self, inputs: &[&str], outputs: &[&str]) -> Result<f64, StateError> {
        Ok(self.outcome_amplitude(&self.final_state(inputs)?, outputs)?.norm_sqr())
    }

    /// Born probabilities over the listed outcomes.
    pub fn joint_table(&self, inputs: &[&str], outs: &[Vec<String>]) -> Result<JointTable, StateError> {
        let fin = self.final_state(inputs)?;
        let mut entries = Vec::with_capacity(outs.len());
        for out in outs {
            let labels: Vec<&str> = out.iter().map(String::as_str).collect();
            entries.push(JointEntry {
                input: inputs.iter().map(|s| s.to_string()).collect(),
                output: out.clone(),
                value: self.outcome_amplitude(&fin, &labels)?.norm_sqr(),
            });
        }
        Ok(JointTable { mode: PhaseMode::Physical, entries })
    }

    /// Born probabilities for every single-source input and its reachable
    /// outcomes.
    pub fn full_table(&self) -> Result<JointTable, StateError> {
        let mut entries = Vec::new();
        for input in self.net.inputs() {
            let inputs = [input.as_str()];
            let outs = reachable_outcomes(self.net, &inputs)?;
            entries.extend(self.joint_table(&inputs, &outs)?.entries);
        }
        Ok(JointTable { mode: PhaseMode::Physical, entries })
    }

    /// Index, within cut `cut`, of the mode on the same single-mode arm as
    /// `element`.
    pub fn arm_mode(&self, cut: usize, element: &str) -> Result<usize, StateError> {
        let target =
            self.net.element_index(element).ok_or_else(|| NetworkError::UnknownElement(element.to_string()))?;
        let edges = self.cuts.get(cut).ok_or(StateError::BadCut { cut, stages: self.stages.len() })?;
        let single = |i: usize| matches!(self.net.element(i).kind(), ElementKind::Mirror | ElementKind::PhaseDelay);
        let on_arm = |edge: usize| {
            let e = self.net.edges()[edge];
            let mut at = e.to.element;
            loop {
                if at == target {
                    return true;
                }
                if !single(at) {
                    break;
                }
                match self.net.edge_from(PortRef { element: at, port: 1 }) {
                    Some(n) => at = self.net.edges()[n].to.element,
                    None => break,
                }
            }
            let mut at = e.from.element;
            loop {
                if at == target {
                    return true;
                }
                if !single(at) {
                    return false;
                }
                match self.net.edge_to(PortRef { element: at, port: 0 }) {
                    Some(n) => at = self.net.edges()[n].from.element,
                    None => return false,
                }
            }
        };
        edges.iter().position(|&e| on_arm(e)).ok_or(StateError::NoArm { cut, element: element.to_string() })
    }
}
