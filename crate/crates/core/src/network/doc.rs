//! The experiment description document.
//!
//! ```json
//! {
//!   "elements": [{"id": "E", "kind": "phase_delay", "phase_param": 0.5, "ports": ["in", "out"]}],
//!   "edges": [{"from": "BS1.l1", "to": "E.in"}],
//!   "inputs": ["C"],
//!   "outputs": ["A"]
//! }
//! ```
//!
//! Port roles are positional. Beamsplitters and crossings list
//! `[in_a, in_b, out_a, out_b]`; `in_a` transmits (or passes straight) to
//! `out_a`. Mirrors and phase delays list `[in, out]`. Sources list only
//! outputs and detectors only inputs. Boundary elements may carry `groups`,
//! the sets of ports that emit (or absorb) together; by default all ports
//! form a single group.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Source,
    #[serde(rename = "beamsplitter_5050")]
    BeamSplitter,
    Mirror,
    PhaseDelay,
    Crossing,
    Detector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortRole {
    In,
    Out,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Source => "source",
            ElementKind::BeamSplitter => "beamsplitter_5050",
            ElementKind::Mirror => "mirror",
            ElementKind::PhaseDelay => "phase_delay",
            ElementKind::Crossing => "crossing",
            ElementKind::Detector => "detector",
        }
    }

    /// Role of the port at `index`.
    pub fn role(self, index: usize) -> PortRole {
        match self {
            ElementKind::Source => PortRole::Out,
            ElementKind::Detector => PortRole::In,
            ElementKind::BeamSplitter | ElementKind::Crossing => {
                if index < 2 {
                    PortRole::In
                } else {
                    PortRole::Out
                }
            }
            ElementKind::Mirror | ElementKind::PhaseDelay => {
                if index == 0 {
                    PortRole::In
                } else {
                    PortRole::Out
                }
            }
        }
    }

    /// Whether a port count is allowed, with a description of the rule.
    pub(crate) fn arity_ok(self, ports: usize) -> (bool, &'static str) {
        match self {
            ElementKind::BeamSplitter | ElementKind::Crossing => (ports == 4, "2 in / 2 out"),
            ElementKind::Mirror | ElementKind::PhaseDelay => (ports == 2, "1 in / 1 out"),
            ElementKind::Source => (ports >= 1, "0 in / k out"),
            ElementKind::Detector => (ports >= 1, "k in / 0 out"),
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, ElementKind::Source | ElementKind::Detector)
    }

    /// Elements acting on two modes at once.
    pub fn is_two_mode(self) -> bool {
        matches!(self, ElementKind::BeamSplitter | ElementKind::Crossing)
    }

    /// Kind after reversing the propagation direction.
    pub fn reversed(self) -> Self {
        match self {
            ElementKind::Source => ElementKind::Detector,
            ElementKind::Detector => ElementKind::Source,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub id: String,
    pub kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_param: Option<f64>,
    pub ports: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDoc {
    #[serde(default)]
    pub elements: Vec<ElementDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl ExperimentDoc {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("experiment documents always serialize")
    }

    /// Set the phase parameter of element `id`. Returns `false` when no such
    /// element exists.
    pub fn set_phase(&mut self, id: &str, phase: f64) -> bool {
        match self.elements.iter_mut().find(|e| e.id == id) {
            Some(e) => {
                e.phase_param = Some(phase);
                true
            }
            None => false,
        }
    }
}

/// Split an `"element.port"` endpoint at the first dot.
pub(crate) fn split_endpoint(endpoint: &str) -> Option<(&str, &str)> {
    let (elem, port) = endpoint.split_once('.')?;
    if elem.is_empty() || port.is_empty() {
        None
    } else {
        Some((elem, port))
    }
}
