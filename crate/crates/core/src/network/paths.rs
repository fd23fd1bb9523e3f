//! Coarse-grained path enumeration.
//!
//! Phase convention: reflection at a 50/50 beamsplitter adds `π/2`,
//! transmission adds nothing, mirrors and crossings add nothing, and a phase
//! delay adds its parameter. Common phases of free propagation are dropped.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use serde::Serialize;

use super::{ElementKind, NetworkError, OpticalNetwork, PhaseMode, PortRef};

/// One step of a traversal: the element visited and the output port taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub element: String,
    pub port: String,
}

/// One coarse-grained single-photon history from a source port to a
/// detector port.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoarsePath {
    pub source: String,
    pub source_port: String,
    pub traversal: Vec<Step>,
    pub detector: String,
    pub detector_port: String,
    /// Accumulated phase `S/ħ`, not reduced modulo `2π`.
    pub phase: f64,
    pub magnitude: f64,
}

impl CoarsePath {
    pub fn traverses(&self, element: &str) -> bool {
        self.traversal.iter().any(|s| s.element == element)
    }

    /// Key used for the deterministic ordering: the chosen port labels.
    fn order_key(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.source_port.as_str())
            .chain(self.traversal.iter().map(|s| s.port.as_str()))
            .chain(std::iter::once(self.detector_port.as_str()))
    }
}

/// Output ports reachable from input port `port` of an element, with the
/// phase and physical magnitude of each transition.
fn transitions(kind: ElementKind, phase: Option<f64>, port: usize) -> Vec<(usize, f64, f64)> {
    match kind {
        ElementKind::BeamSplitter => {
            // in_a -> out_a and in_b -> out_b transmit
            let (through, across) = if port == 0 { (2, 3) } else { (3, 2) };
            vec![(through, 0.0, FRAC_1_SQRT_2), (across, FRAC_PI_2, FRAC_1_SQRT_2)]
        }
        ElementKind::Crossing => vec![(port + 2, 0.0, 1.0)],
        ElementKind::Mirror => vec![(1, 0.0, 1.0)],
        ElementKind::PhaseDelay => vec![(1, phase.unwrap_or(0.0), 1.0)],
        ElementKind::Source | ElementKind::Detector => Vec::new(),
    }
}

/// Every path of a photon leaving `start` (an output port of a source),
/// ending at any detector port, in the deterministic order.
pub fn photon_paths(net: &OpticalNetwork, start: PortRef, mode: PhaseMode) -> Vec<CoarsePath> {
    let source = net.element(start.element);
    let mut out = Vec::new();
    let mut trail = Vec::new();
    walk(net, start, 0.0, 1.0, &mut trail, mode, &mut |trail, end, phase, magnitude| {
        let det = net.element(end.element);
        out.push(CoarsePath {
            source: source.id().to_string(),
            source_port: source.ports()[start.port].clone(),
            traversal: trail
                .iter()
                .map(|&(e, p): &(usize, usize)| Step {
                    element: net.element(e).id().to_string(),
                    port: net.element(e).ports()[p].clone(),
                })
                .collect(),
            detector: det.id().to_string(),
            detector_port: det.ports()[end.port].clone(),
            phase,
            magnitude,
        });
    });
    out.sort_by(|a, b| a.order_key().cmp(b.order_key()));
    out
}

/// Receives each finished trail, its end port, phase and magnitude.
type Emit<'a> = dyn FnMut(&[(usize, usize)], PortRef, f64, f64) + 'a;

fn walk(
    net: &OpticalNetwork,
    from: PortRef,
    phase: f64,
    magnitude: f64,
    trail: &mut Vec<(usize, usize)>,
    mode: PhaseMode,
    emit: &mut Emit,
) {
    let Some(edge) = net.edge_from(from) else { return };
    let at = net.edges()[edge].to;
    let elem = net.element(at.element);
    if elem.kind() == ElementKind::Detector {
        emit(trail, at, phase, magnitude);
        return;
    }
    for (out_port, dphase, dmag) in transitions(elem.kind(), elem.phase(), at.port) {
        let mag = match mode {
            PhaseMode::Relative => magnitude,
            PhaseMode::Physical => magnitude * dmag,
        };
        trail.push((at.element, out_port));
        walk(net, PortRef { element: at.element, port: out_port }, phase + dphase, mag, trail, mode, emit);
        trail.pop();
    }
}

/// All coarse paths from boundary input `from` to boundary output `to`,
/// ordered by source port and then lexicographically by chosen port labels.
/// An unreachable pair yields an empty list.
pub fn enumerate_paths(
    net: &OpticalNetwork,
    from: &str,
    to: &str,
    mode: PhaseMode,
) -> Result<Vec<CoarsePath>, NetworkError> {
    let source = net.input_index(from)?;
    net.output_index(to)?;
    let mut paths = Vec::new();
    for port in net.element(source).outputs() {
        paths.extend(
            photon_paths(net, PortRef { element: source, port }, mode).into_iter().filter(|p| p.detector == to),
        );
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::presets;
    use std::f64::consts::PI;

    fn phases(paths: &[CoarsePath]) -> Vec<f64> {
        paths.iter().map(|p| p.phase).collect()
    }

    fn assert_phases(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn a1_c_to_a_has_four_paths_in_branch_order() {
        let alpha = 0.83;
        let net = presets::a1(alpha).unwrap();
        let paths = enumerate_paths(&net, "C", "A", PhaseMode::Relative).unwrap();
        // L1L2, L1R2, R1L2, R1R2
        assert_phases(&phases(&paths), &[alpha + 3.0 * PI / 2.0, alpha + PI / 2.0, PI / 2.0, PI / 2.0]);
        let first: Vec<&str> = paths[0].traversal.iter().map(|s| s.port.as_str()).collect();
        assert_eq!(first, ["l1", "out", "out", "l2", "out", "a"]);
        assert!(paths.iter().all(|p| p.magnitude == 1.0));
    }

    #[test]
    fn a1_c_to_b_phases() {
        let alpha = -1.2;
        let net = presets::a1(alpha).unwrap();
        let paths = enumerate_paths(&net, "C", "B", PhaseMode::Relative).unwrap();
        assert_phases(&phases(&paths), &[alpha + PI, alpha + PI, 0.0, PI]);
    }

    #[test]
    fn physical_magnitudes() {
        let net = presets::a1(0.0).unwrap();
        let paths = enumerate_paths(&net, "C", "A", PhaseMode::Physical).unwrap();
        let m = FRAC_1_SQRT_2.powi(3);
        assert!(paths.iter().all(|p| (p.magnitude - m).abs() < 1e-15));
    }

    #[test]
    fn unreachable_pair_is_empty() {
        let b2 = presets::b2(0.0, 0.0).unwrap();
        assert_eq!(enumerate_paths(&b2, "C", "A", PhaseMode::Relative).unwrap().len(), 2);
        let sep = crate::network::parse_network(
            r#"{
              "elements": [
                {"id": "S", "kind": "source", "ports": ["o"]},
                {"id": "T", "kind": "source", "ports": ["o"]},
                {"id": "X", "kind": "detector", "ports": ["i"]},
                {"id": "Y", "kind": "detector", "ports": ["i"]}
              ],
              "edges": [{"from": "S.o", "to": "X.i"}, {"from": "T.o", "to": "Y.i"}],
              "inputs": ["S", "T"], "outputs": ["X", "Y"]
            }"#,
        )
        .unwrap();
        assert!(enumerate_paths(&sep, "S", "Y", PhaseMode::Relative).unwrap().is_empty());
        assert_eq!(enumerate_paths(&sep, "S", "X", PhaseMode::Relative).unwrap().len(), 1);
    }

    #[test]
    fn unknown_boundary_is_an_error() {
        let net = presets::a1(0.0).unwrap();
        assert!(matches!(enumerate_paths(&net, "A", "C", PhaseMode::Relative), Err(NetworkError::UnknownBoundary(_))));
    }
}
