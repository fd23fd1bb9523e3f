use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::doc::{split_endpoint, ElementKind, ExperimentDoc, PortRole};

/// A single invariant violation. Every variant that concerns an element
/// names it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NoBoundary,
    InvalidId { element: String },
    DuplicateElement { element: String },
    Arity { element: String, kind: &'static str, ports: usize, expected: &'static str },
    DuplicatePort { element: String, port: String },
    PhaseMissing { element: String },
    PhaseUnexpected { element: String },
    PhaseNotFinite { element: String },
    MalformedEndpoint { endpoint: String },
    UnknownElement { element: String, endpoint: String },
    UnknownPort { element: String, port: String },
    WrongDirection { element: String, port: String },
    MultiplyConnected { element: String, port: String },
    DanglingPort { element: String, port: String },
    Cycle { elements: Vec<String> },
    UnknownBoundary { label: String },
    BoundaryKind { label: String, expected: &'static str },
    DuplicateBoundary { label: String },
    UndeclaredBoundary { element: String },
    Groups { element: String, reason: String },
}

impl Violation {
    /// The element this violation concerns, if any.
    pub fn element(&self) -> Option<&str> {
        use Violation::*;
        match self {
            InvalidId { element }
            | DuplicateElement { element }
            | Arity { element, .. }
            | DuplicatePort { element, .. }
            | PhaseMissing { element }
            | PhaseUnexpected { element }
            | PhaseNotFinite { element }
            | UnknownElement { element, .. }
            | UnknownPort { element, .. }
            | WrongDirection { element, .. }
            | MultiplyConnected { element, .. }
            | DanglingPort { element, .. }
            | UndeclaredBoundary { element }
            | Groups { element, .. } => Some(element),
            Cycle { elements } => elements.first().map(String::as_str),
            UnknownBoundary { label } | BoundaryKind { label, .. } | DuplicateBoundary { label } => Some(label),
            NoBoundary | MalformedEndpoint { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoBoundary => write!(f, "network declares no boundary inputs or outputs"),
            InvalidId { element } => write!(f, "element id {element:?} is empty or contains '.'"),
            DuplicateElement { element } => write!(f, "element {element} is declared more than once"),
            Arity { element, kind, ports, expected } => {
                write!(f, "arity: {kind} {element} has {ports} ports, expected {expected}")
            }
            DuplicatePort { element, port } => write!(f, "element {element} repeats port {port}"),
            PhaseMissing { element } => write!(f, "phase_delay {element} has no phase_param"),
            PhaseUnexpected { element } => {
                write!(f, "element {element} carries a phase_param but is not a phase_delay")
            }
            PhaseNotFinite { element } => write!(f, "phase_param of {element} is not finite"),
            MalformedEndpoint { endpoint } => {
                write!(f, "edge endpoint {endpoint:?} is not of the form element.port")
            }
            UnknownElement { element, endpoint } => {
                write!(f, "edge endpoint {endpoint} names unknown element {element}")
            }
            UnknownPort { element, port } => write!(f, "element {element} has no port {port}"),
            WrongDirection { element, port } => {
                write!(f, "edge uses port {element}.{port} against its in/out role")
            }
            MultiplyConnected { element, port } => {
                write!(f, "port {element}.{port} is connected more than once")
            }
            DanglingPort { element, port } => write!(f, "port {element}.{port} is not connected"),
            Cycle { elements } => write!(f, "acyclicity: cycle through {}", elements.join(", ")),
            UnknownBoundary { label } => write!(f, "boundary {label} names no element"),
            BoundaryKind { label, expected } => write!(f, "boundary {label} is not a {expected}"),
            DuplicateBoundary { label } => write!(f, "boundary label {label} is repeated"),
            UndeclaredBoundary { element } => {
                write!(f, "{element} is a source or detector but is not listed as a boundary")
            }
            Groups { element, reason } => write!(f, "groups of {element}: {reason}"),
        }
    }
}

/// All invariant violations found in a document. Empty iff the document
/// describes a valid network.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn names(&self, element: &str) -> bool {
        self.violations.iter().any(|v| v.element() == Some(element))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every network invariant and report all failures.
pub fn validate(doc: &ExperimentDoc) -> ValidationReport {
    let mut out = Vec::new();

    if doc.inputs.is_empty() && doc.outputs.is_empty() {
        out.push(Violation::NoBoundary);
    }

    // element id -> index of first declaration
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, e) in doc.elements.iter().enumerate() {
        if e.id.is_empty() || e.id.contains('.') {
            out.push(Violation::InvalidId { element: e.id.clone() });
        }
        if index.insert(e.id.as_str(), i).is_some() {
            out.push(Violation::DuplicateElement { element: e.id.clone() });
        }
        let (ok, expected) = e.kind.arity_ok(e.ports.len());
        if !ok {
            out.push(Violation::Arity { element: e.id.clone(), kind: e.kind.name(), ports: e.ports.len(), expected });
        }
        let mut seen = HashSet::new();
        for p in &e.ports {
            if !seen.insert(p.as_str()) {
                out.push(Violation::DuplicatePort { element: e.id.clone(), port: p.clone() });
            }
        }
        match (e.kind, e.phase_param) {
            (ElementKind::PhaseDelay, None) => out.push(Violation::PhaseMissing { element: e.id.clone() }),
            (ElementKind::PhaseDelay, Some(p)) if !p.is_finite() => {
                out.push(Violation::PhaseNotFinite { element: e.id.clone() })
            }
            (ElementKind::PhaseDelay, Some(_)) | (_, None) => {}
            (_, Some(_)) => out.push(Violation::PhaseUnexpected { element: e.id.clone() }),
        }
        check_groups(e, &mut out);
    }

    // connection counts per (element index, port index)
    let mut connections: HashMap<(usize, usize), usize> = HashMap::new();
    let mut successors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); doc.elements.len()];
    for edge in &doc.edges {
        let from = resolve(doc, &index, &edge.from, PortRole::Out, &mut out);
        let to = resolve(doc, &index, &edge.to, PortRole::In, &mut out);
        for end in [from, to].into_iter().flatten() {
            *connections.entry(end).or_insert(0) += 1;
        }
        if let (Some((a, _)), Some((b, _))) = (from, to) {
            successors[a].insert(b);
        }
    }
    for (i, e) in doc.elements.iter().enumerate() {
        if index.get(e.id.as_str()) != Some(&i) {
            continue;
        }
        for (p, port) in e.ports.iter().enumerate() {
            match connections.get(&(i, p)).copied().unwrap_or(0) {
                0 => out.push(Violation::DanglingPort { element: e.id.clone(), port: port.clone() }),
                1 => {}
                _ => out.push(Violation::MultiplyConnected { element: e.id.clone(), port: port.clone() }),
            }
        }
    }

    if let Some(cycle) = cyclic_elements(&successors) {
        out.push(Violation::Cycle { elements: cycle.into_iter().map(|i| doc.elements[i].id.clone()).collect() });
    }

    check_boundaries(doc, &index, &mut out);
    ValidationReport { violations: out }
}

fn resolve(
    doc: &ExperimentDoc,
    index: &HashMap<&str, usize>,
    endpoint: &str,
    role: PortRole,
    out: &mut Vec<Violation>,
) -> Option<(usize, usize)> {
    let Some((elem, port)) = split_endpoint(endpoint) else {
        out.push(Violation::MalformedEndpoint { endpoint: endpoint.to_string() });
        return None;
    };
    let Some(&i) = index.get(elem) else {
        out.push(Violation::UnknownElement { element: elem.to_string(), endpoint: endpoint.to_string() });
        return None;
    };
    let e = &doc.elements[i];
    let Some(p) = e.ports.iter().position(|q| q == port) else {
        out.push(Violation::UnknownPort { element: elem.to_string(), port: port.to_string() });
        return None;
    };
    if e.kind.role(p) != role {
        out.push(Violation::WrongDirection { element: elem.to_string(), port: port.to_string() });
        return None;
    }
    Some((i, p))
}

fn check_groups(e: &super::doc::ElementDoc, out: &mut Vec<Violation>) {
    let Some(groups) = &e.groups else { return };
    if !e.kind.is_boundary() {
        out.push(Violation::Groups { element: e.id.clone(), reason: "only sources and detectors carry groups".into() });
        return;
    }
    let mut fail = |reason: String| out.push(Violation::Groups { element: e.id.clone(), reason });
    if groups.is_empty() {
        fail("at least one group is required".into());
        return;
    }
    let size = groups[0].len();
    let mut covered = HashSet::new();
    for g in groups {
        if g.is_empty() {
            fail("empty group".into());
        }
        if g.len() != size {
            fail("all groups must have the same size".into());
        }
        let mut within = HashSet::new();
        for p in g {
            if !e.ports.contains(p) {
                fail(format!("unknown port {p}"));
            }
            if !within.insert(p) {
                fail(format!("port {p} repeated in one group"));
            }
            covered.insert(p);
        }
    }
    for p in &e.ports {
        if !covered.contains(p) {
            fail(format!("port {p} belongs to no group"));
        }
    }
}

fn check_boundaries(doc: &ExperimentDoc, index: &HashMap<&str, usize>, out: &mut Vec<Violation>) {
    let mut labels = HashSet::new();
    for (list, kind, expected) in
        [(&doc.inputs, ElementKind::Source, "source"), (&doc.outputs, ElementKind::Detector, "detector")]
    {
        for label in list {
            if !labels.insert(label.as_str()) {
                out.push(Violation::DuplicateBoundary { label: label.clone() });
            }
            match index.get(label.as_str()) {
                None => out.push(Violation::UnknownBoundary { label: label.clone() }),
                Some(&i) if doc.elements[i].kind != kind => {
                    out.push(Violation::BoundaryKind { label: label.clone(), expected })
                }
                Some(_) => {}
            }
        }
    }
    for e in &doc.elements {
        if e.kind.is_boundary() && !labels.contains(e.id.as_str()) {
            out.push(Violation::UndeclaredBoundary { element: e.id.clone() });
        }
    }
}

/// Kahn's algorithm; returns the elements left over when a cycle exists.
fn cyclic_elements(successors: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    let n = successors.len();
    let mut indegree = vec![0usize; n];
    for s in successors {
        for &t in s {
            indegree[t] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(i) = queue.pop_front() {
        removed[i] = true;
        for &t in &successors[i] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                queue.push_back(t);
            }
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
    (!rest.is_empty()).then_some(rest)
}
