//! Optical networks: elements, port-to-port edges and boundary labels.

mod doc;
mod iso;
mod paths;
pub mod presets;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use doc::{EdgeDoc, ElementDoc, ElementKind, ExperimentDoc, PortRole};
pub use iso::{is_isomorphic, relabel};
pub use paths::{enumerate_paths, photon_paths, CoarsePath, Step};
pub use validate::{validate, ValidationReport, Violation};

use doc::split_endpoint;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid network:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown boundary {0}")]
    UnknownBoundary(String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("element {0} has no phase parameter")]
    NotPhaseElement(String),
    #[error("phase for {0} is not finite")]
    NonFinitePhase(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

/// How coarse-path magnitudes are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Magnitude 1 per path; only relative phases matter.
    #[default]
    Relative,
    /// `1/√2` per beamsplitter and boundary-group normalisation, so joint values
    /// equal Born probabilities.
    Physical,
}

impl PhaseMode {
    pub fn name(self) -> &'static str {
        match self {
            PhaseMode::Relative => "relative",
            PhaseMode::Physical => "physical",
        }
    }
}

/// A port of an element, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub element: usize,
    pub port: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: PortRef,
    pub to: PortRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    id: String,
    kind: ElementKind,
    phase: Option<f64>,
    ports: Vec<String>,
    groups: Vec<Vec<usize>>,
}

impl Element {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn phase(&self) -> Option<f64> {
        self.phase
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    /// Port groups of a boundary element, as port indices. Empty for
    /// internal elements.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn inputs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ports.len()).filter(|&p| self.kind.role(p) == PortRole::In)
    }

    pub fn outputs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ports.len()).filter(|&p| self.kind.role(p) == PortRole::Out)
    }
}

/// A validated, immutable optical network.
#[derive(Debug, Clone)]
pub struct OpticalNetwork {
    elements: Vec<Element>,
    edges: Vec<Edge>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    index: HashMap<String, usize>,
    edge_from: HashMap<PortRef, usize>,
    edge_to: HashMap<PortRef, usize>,
    topo: Vec<usize>,
}

/// Parse and validate an experiment description.
pub fn parse_network(json: &str) -> Result<OpticalNetwork, NetworkError> {
    build_network(&ExperimentDoc::from_json(json)?)
}

/// Validate a document and build the network it describes.
pub fn build_network(doc: &ExperimentDoc) -> Result<OpticalNetwork, NetworkError> {
    let report = validate(doc);
    if !report.is_valid() {
        return Err(NetworkError::Invalid(report));
    }
    let index: HashMap<String, usize> = doc.elements.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
    let elements: Vec<Element> = doc
        .elements
        .iter()
        .map(|e| {
            let port_index = |p: &String| e.ports.iter().position(|q| q == p).unwrap();
            let groups = if e.kind.is_boundary() {
                match &e.groups {
                    Some(gs) => gs.iter().map(|g| g.iter().map(port_index).collect()).collect(),
                    None => vec![(0..e.ports.len()).collect()],
                }
            } else {
                Vec::new()
            };
            Element { id: e.id.clone(), kind: e.kind, phase: e.phase_param, ports: e.ports.clone(), groups }
        })
        .collect();
    let port_ref = |endpoint: &str| {
        let (elem, port) = split_endpoint(endpoint).unwrap();
        let element = index[elem];
        let port = elements[element].ports.iter().position(|q| q == port).unwrap();
        PortRef { element, port }
    };
    let edges: Vec<Edge> = doc.edges.iter().map(|e| Edge { from: port_ref(&e.from), to: port_ref(&e.to) }).collect();
    let edge_from = edges.iter().enumerate().map(|(i, e)| (e.from, i)).collect();
    let edge_to = edges.iter().enumerate().map(|(i, e)| (e.to, i)).collect();
    let mut net = OpticalNetwork {
        elements,
        edges,
        inputs: doc.inputs.clone(),
        outputs: doc.outputs.clone(),
        index,
        edge_from,
        edge_to,
        topo: Vec::new(),
    };
    net.topo = net.topological_sort();
    Ok(net)
}

impl OpticalNetwork {
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn element(&self, index: usize) -> &Element {
        &self.elements[index]
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn element_by_id(&self, id: &str) -> Option<&Element> {
        self.element_index(id).map(|i| &self.elements[i])
    }

    /// Edge leaving an output port.
    pub fn edge_from(&self, port: PortRef) -> Option<usize> {
        self.edge_from.get(&port).copied()
    }

    /// Edge entering an input port.
    pub fn edge_to(&self, port: PortRef) -> Option<usize> {
        self.edge_to.get(&port).copied()
    }

    /// Element indices in propagation order. Ties keep document order.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn port_name(&self, port: PortRef) -> String {
        let e = &self.elements[port.element];
        format!("{}.{}", e.id, e.ports[port.port])
    }

    pub(crate) fn input_index(&self, label: &str) -> Result<usize, NetworkError> {
        if !self.inputs.iter().any(|l| l == label) {
            return Err(NetworkError::UnknownBoundary(label.to_string()));
        }
        Ok(self.index[label])
    }

    pub(crate) fn output_index(&self, label: &str) -> Result<usize, NetworkError> {
        if !self.outputs.iter().any(|l| l == label) {
            return Err(NetworkError::UnknownBoundary(label.to_string()));
        }
        Ok(self.index[label])
    }

    /// A copy with the phase of a phase-delay element replaced.
    pub fn with_phase(&self, id: &str, phase: f64) -> Result<Self, NetworkError> {
        let i = self.element_index(id).ok_or_else(|| NetworkError::UnknownElement(id.into()))?;
        if self.elements[i].kind != ElementKind::PhaseDelay {
            return Err(NetworkError::NotPhaseElement(id.into()));
        }
        if !phase.is_finite() {
            return Err(NetworkError::NonFinitePhase(id.into()));
        }
        let mut net = self.clone();
        net.elements[i].phase = Some(phase);
        Ok(net)
    }

    /// The description document this network was built from (up to group
    /// defaults being written out explicitly).
    pub fn to_doc(&self) -> ExperimentDoc {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let default_groups = e.groups.len() == 1 && e.groups[0].iter().copied().eq(0..e.ports.len());
                let groups = (e.kind.is_boundary() && !default_groups)
                    .then(|| e.groups.iter().map(|g| g.iter().map(|&p| e.ports[p].clone()).collect()).collect());
                ElementDoc { id: e.id.clone(), kind: e.kind, phase_param: e.phase, ports: e.ports.clone(), groups }
            })
            .collect();
        let edges =
            self.edges.iter().map(|e| EdgeDoc { from: self.port_name(e.from), to: self.port_name(e.to) }).collect();
        ExperimentDoc { elements, edges, inputs: self.inputs.clone(), outputs: self.outputs.clone() }
    }

    fn topological_sort(&self) -> Vec<usize> {
        let n = self.elements.len();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            indegree[e.to.element] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for e in self.edges.iter().filter(|e| e.from.element == i) {
                indegree[e.to.element] -= 1;
                if indegree[e.to.element] == 0 {
                    ready.insert(e.to.element);
                }
            }
        }
        order
    }
}
