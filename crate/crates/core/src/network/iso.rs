use std::collections::{BTreeSet, VecDeque};

use super::{build_network, ElementKind, NetworkError, OpticalNetwork, PortRef, PortRole};

/// Port permutations under which an element kind is physically unchanged.
fn symmetries(kind: ElementKind, ports: usize) -> Vec<Vec<usize>> {
    match kind {
        // swapping the a and b sides of a beamsplitter or crossing
        ElementKind::BeamSplitter | ElementKind::Crossing => {
            vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]]
        }
        _ => vec![(0..ports).collect()],
    }
}

fn neighbour(net: &OpticalNetwork, element: usize, port: usize) -> Option<PortRef> {
    let here = PortRef { element, port };
    match net.element(element).kind().role(port) {
        PortRole::Out => net.edge_from(here).map(|e| net.edges()[e].to),
        PortRole::In => net.edge_to(here).map(|e| net.edges()[e].from),
    }
}

fn same_element(a: &OpticalNetwork, ia: usize, b: &OpticalNetwork, ib: usize) -> bool {
    let (ea, eb) = (a.element(ia), b.element(ib));
    let phases_match = match (ea.phase(), eb.phase()) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
        _ => false,
    };
    ea.kind() == eb.kind() && ea.ports().len() == eb.ports().len() && phases_match
}

fn group_sets(net: &OpticalNetwork, i: usize) -> BTreeSet<BTreeSet<usize>> {
    net.element(i).groups().iter().map(|g| g.iter().copied().collect()).collect()
}

/// Structural isomorphism with boundary elements matched by label and
/// internal element ids free.
pub fn is_isomorphic(a: &OpticalNetwork, b: &OpticalNetwork) -> bool {
    if a.elements().len() != b.elements().len() || a.edges().len() != b.edges().len() {
        return false;
    }
    let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    if set(a.inputs()) != set(b.inputs()) || set(a.outputs()) != set(b.outputs()) {
        return false;
    }
    let mut mapped: Vec<Option<(usize, Vec<usize>)>> = vec![None; a.elements().len()];
    let mut used = vec![false; b.elements().len()];
    let mut queue = VecDeque::new();
    for label in a.inputs().iter().chain(a.outputs()) {
        let (Some(ia), Some(ib)) = (a.element_index(label), b.element_index(label)) else {
            return false;
        };
        if !same_element(a, ia, b, ib) || group_sets(a, ia) != group_sets(b, ib) {
            return false;
        }
        let perm: Vec<usize> = (0..a.element(ia).ports().len()).collect();
        mapped[ia] = Some((ib, perm));
        used[ib] = true;
        queue.push_back(ia);
    }
    while let Some(ia) = queue.pop_front() {
        let (ib, perm) = mapped[ia].clone().expect("queued elements are mapped");
        for (p, &q) in perm.iter().enumerate() {
            let (na, nb) = match (neighbour(a, ia, p), neighbour(b, ib, q)) {
                (None, None) => continue,
                (Some(x), Some(y)) => (x, y),
                _ => return false,
            };
            if !same_element(a, na.element, b, nb.element) {
                return false;
            }
            match &mapped[na.element] {
                Some((mb, mperm)) => {
                    if *mb != nb.element || mperm[na.port] != nb.port {
                        return false;
                    }
                }
                None => {
                    if used[nb.element] {
                        return false;
                    }
                    let kind = a.element(na.element).kind();
                    let Some(sym) = symmetries(kind, a.element(na.element).ports().len())
                        .into_iter()
                        .find(|s| s[na.port] == nb.port)
                    else {
                        return false;
                    };
                    mapped[na.element] = Some((nb.element, sym));
                    used[nb.element] = true;
                    queue.push_back(na.element);
                }
            }
        }
    }
    mapped.iter().all(Option::is_some)
}

/// Rename every element id through `rename` (boundary labels included).
pub fn relabel(net: &OpticalNetwork, rename: impl Fn(&str) -> String) -> Result<OpticalNetwork, NetworkError> {
    let mut doc = net.to_doc();
    for e in &mut doc.elements {
        e.id = rename(&e.id);
    }
    let fix = |endpoint: &mut String| {
        let (elem, port) = endpoint.split_once('.').expect("validated endpoint");
        *endpoint = format!("{}.{}", rename(elem), port);
    };
    for e in &mut doc.edges {
        fix(&mut e.from);
        fix(&mut e.to);
    }
    for label in doc.inputs.iter_mut().chain(doc.outputs.iter_mut()) {
        *label = rename(label);
    }
    build_network(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::presets;

    #[test]
    fn preset_is_isomorphic_to_itself_and_relabelled_copy() {
        let a1 = presets::a1(0.5).unwrap();
        assert!(is_isomorphic(&a1, &a1));
        let renamed = relabel(&a1, |id| {
            if a1.inputs().iter().chain(a1.outputs()).any(|b| b == id) {
                id.to_string()
            } else {
                format!("x_{id}")
            }
        })
        .unwrap();
        assert!(is_isomorphic(&a1, &renamed));
    }

    #[test]
    fn different_phase_or_shape_is_not_isomorphic() {
        let a1 = presets::a1(0.5).unwrap();
        assert!(!is_isomorphic(&a1, &presets::a1(0.6).unwrap()));
        assert!(!is_isomorphic(&a1, &presets::a2(0.5).unwrap()));
        assert!(!is_isomorphic(&presets::b1(0.0, 0.0).unwrap(), &presets::b2(0.0, 0.0).unwrap()));
    }

    #[test]
    fn swapped_beamsplitter_sides_are_isomorphic() {
        let mut doc = presets::doc("a1").unwrap();
        let bs = doc.elements.iter_mut().find(|e| e.id == "BS2").unwrap();
        bs.ports = ["r1", "l1", "l2", "r2"].map(String::from).to_vec();
        let swapped = build_network(&doc).unwrap();
        assert!(is_isomorphic(&presets::a1(0.0).unwrap(), &swapped));

        // swapping only the outputs changes which input transmits where
        let mut doc = presets::doc("a1").unwrap();
        let bs = doc.elements.iter_mut().find(|e| e.id == "BS2").unwrap();
        bs.ports = ["l1", "r1", "l2", "r2"].map(String::from).to_vec();
        let crossed = build_network(&doc).unwrap();
        assert!(!is_isomorphic(&presets::a1(0.0).unwrap(), &crossed));
    }
}
