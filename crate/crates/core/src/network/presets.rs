//! Compiled-in experiment documents.
//!
//! * `a1`: double Mach-Zehnder interferometer, photon in at `C`, detectors
//!   `A`/`B`, phase delay `E` on the left arm of the first stage. `D` is the
//!   otherwise empty input channel of the first beamsplitter.
//! * `a2`: the time reverse of `a1`, photon in at `A`, detectors `C`/`D`.
//! * `b1`: back-to-back pair source `Z` feeding a left analyser (`E`, `A`/`B`)
//!   and a right analyser (`F`, `C`/`D`).
//! * `b2`: `b1` with the right analyser reversed and `Z` a crossing; photon
//!   in at `C` or `D`.

use super::{build_network, ExperimentDoc, NetworkError, OpticalNetwork};

pub const NAMES: [&str; 4] = ["a1", "a2", "b1", "b2"];

fn text(name: &str) -> Option<&'static str> {
    Some(match name {
        "a1" => include_str!("../../presets/a1.json"),
        "a2" => include_str!("../../presets/a2.json"),
        "b1" => include_str!("../../presets/b1.json"),
        "b2" => include_str!("../../presets/b2.json"),
        _ => return None,
    })
}

/// The document of a preset, with all phases at zero.
pub fn doc(name: &str) -> Result<ExperimentDoc, NetworkError> {
    let key = name.to_ascii_lowercase();
    let text = text(&key).ok_or_else(|| NetworkError::UnknownPreset(name.to_string()))?;
    Ok(ExperimentDoc::from_json(text)?)
}

/// Build a preset with `E = alpha` and, when present, `F = beta`.
pub fn preset(name: &str, alpha: f64, beta: f64) -> Result<OpticalNetwork, NetworkError> {
    let mut d = doc(name)?;
    for (id, value) in [("E", alpha), ("F", beta)] {
        if d.set_phase(id, value) && !value.is_finite() {
            return Err(NetworkError::NonFinitePhase(id.to_string()));
        }
    }
    build_network(&d)
}

pub fn a1(alpha: f64) -> Result<OpticalNetwork, NetworkError> {
    preset("a1", alpha, 0.0)
}

pub fn a2(alpha: f64) -> Result<OpticalNetwork, NetworkError> {
    preset("a2", alpha, 0.0)
}

pub fn b1(alpha: f64, beta: f64) -> Result<OpticalNetwork, NetworkError> {
    preset("b1", alpha, beta)
}

pub fn b2(alpha: f64, beta: f64) -> Result<OpticalNetwork, NetworkError> {
    preset("b2", alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ElementKind;

    fn count(net: &OpticalNetwork, kind: ElementKind) -> usize {
        net.elements().iter().filter(|e| e.kind() == kind).count()
    }

    #[test]
    fn a1_shape() {
        let net = a1(0.3).unwrap();
        assert_eq!(count(&net, ElementKind::BeamSplitter), 3);
        assert_eq!(count(&net, ElementKind::PhaseDelay), 1);
        assert_eq!(net.element_by_id("E").unwrap().phase(), Some(0.3));
        assert!(net.inputs().iter().any(|i| i == "C"));
        assert_eq!(net.outputs(), ["A", "B"]);
    }

    #[test]
    fn b2_shape() {
        let net = b2(0.1, 0.2).unwrap();
        assert_eq!(count(&net, ElementKind::Crossing), 1);
        assert_eq!(count(&net, ElementKind::PhaseDelay), 2);
        assert_eq!(net.element_by_id("F").unwrap().phase(), Some(0.2));
    }

    #[test]
    fn unknown_and_non_finite() {
        assert!(matches!(preset("c7", 0.0, 0.0), Err(NetworkError::UnknownPreset(_))));
        assert!(matches!(a1(f64::NAN), Err(NetworkError::NonFinitePhase(_))));
        // a1 has no F, so beta is ignored
        assert!(preset("A1", 0.0, f64::NAN).is_ok());
    }
}
