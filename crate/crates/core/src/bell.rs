//! Two-outcome correlators, CHSH values and grid scans over analyser
//! settings.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::duality::{pivot_reverse, BoundaryPair, DualityError};
use crate::network::{build_network, presets, ExperimentDoc, NetworkError, PhaseMode};
use crate::path_sum::{full_table, JointTable, PathSumError};

pub const MIN_RESOLUTION: usize = 8;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BellError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    PathSum(#[from] PathSumError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("table has no entry for {0}")]
    NotCovered(BoundaryPair),
    #[error("all correlated outcomes have zero weight")]
    ZeroWeight,
    #[error("resolution {0} is below the minimum of {MIN_RESOLUTION}")]
    Resolution(usize),
}

/// `E = (P_same − P_diff) / (P_same + P_diff)` over the listed outcomes.
pub fn correlator(table: &JointTable, same: &[BoundaryPair], diff: &[BoundaryPair]) -> Result<f64, BellError> {
    let total = |pairs: &[BoundaryPair]| -> Result<f64, BellError> {
        pairs.iter().try_fold(0.0, |acc, p| {
            let i: Vec<&str> = p.input.iter().map(String::as_str).collect();
            let o: Vec<&str> = p.output.iter().map(String::as_str).collect();
            table.get(&i, &o).map(|v| acc + v).ok_or_else(|| BellError::NotCovered(p.clone()))
        })
    };
    let (s, d) = (total(same)?, total(diff)?);
    // rounding leaves ~1e-32 on cancelled outcomes
    if s + d <= 1e-15 * table.total() || s + d <= 0.0 {
        return Err(BellError::ZeroWeight);
    }
    Ok((s - d) / (s + d))
}

/// Anything that yields a correlation for a pair of analyser settings.
pub trait CorrelationModel: Sync {
    fn correlation(&self, alpha: f64, beta: f64) -> Result<f64, BellError>;
}

/// An experiment document whose phase elements are the analyser settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub doc: ExperimentDoc,
    pub left_setting: String,
    pub right_setting: String,
    pub same: Vec<BoundaryPair>,
    pub diff: Vec<BoundaryPair>,
}

fn pair(input: &str, outputs: &[&str]) -> BoundaryPair {
    BoundaryPair::new(&[input], outputs)
}

impl NetworkModel {
    /// The pair source: `(A,C)` and `(B,D)` count as equal outcomes.
    pub fn b1() -> Result<Self, BellError> {
        Ok(NetworkModel {
            doc: presets::doc("b1")?,
            left_setting: "E".into(),
            right_setting: "F".into(),
            same: vec![pair("Z", &["A", "C"]), pair("Z", &["B", "D"])],
            diff: vec![pair("Z", &["A", "D"]), pair("Z", &["B", "C"])],
        })
    }

    /// The pivot-reversed pair source, with outcome classes carried over by
    /// the boundary map.
    pub fn b2() -> Result<Self, BellError> {
        let b1 = Self::b1()?;
        let (_, map) = pivot_reverse(&build_network(&b1.doc)?, "Z")?;
        let image = |pairs: &[BoundaryPair]| -> Result<Vec<BoundaryPair>, BellError> {
            pairs.iter().map(|p| map.image(p).cloned().ok_or_else(|| BellError::NotCovered(p.clone()))).collect()
        };
        Ok(NetworkModel {
            doc: presets::doc("b2")?,
            same: image(&b1.same)?,
            diff: image(&b1.diff)?,
            left_setting: b1.left_setting,
            right_setting: b1.right_setting,
        })
    }

    pub fn preset(name: &str) -> Result<Self, BellError> {
        match name.to_ascii_lowercase().as_str() {
            "b1" => Self::b1(),
            "b2" => Self::b2(),
            _ => Err(NetworkError::UnknownPreset(name.to_string()).into()),
        }
    }

    pub fn table(&self, alpha: f64, beta: f64) -> Result<JointTable, BellError> {
        let mut doc = self.doc.clone();
        doc.set_phase(&self.left_setting, alpha);
        doc.set_phase(&self.right_setting, beta);
        Ok(full_table(&build_network(&doc)?, PhaseMode::Relative)?)
    }
}

impl CorrelationModel for NetworkModel {
    fn correlation(&self, alpha: f64, beta: f64) -> Result<f64, BellError> {
        correlator(&self.table(alpha, beta)?, &self.same, &self.diff)
    }
}

/// Local deterministic outcomes `sign(cos α)` and `sign(cos β)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeterministicModel;

impl CorrelationModel for DeterministicModel {
    fn correlation(&self, alpha: f64, beta: f64) -> Result<f64, BellError> {
        let s = |x: f64| if x.cos() >= 0.0 { 1.0 } else { -1.0 };
        Ok(s(alpha) * s(beta))
    }
}

/// `S = E(a,b) − E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh(model: &dyn CorrelationModel, a: f64, a2: f64, b: f64, b2: f64) -> Result<f64, BellError> {
    Ok(model.correlation(a, b)? - model.correlation(a, b2)? + model.correlation(a2, b)? + model.correlation(a2, b2)?)
}

/// Correlations on the square grid of angles `2πk/resolution`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorGrid {
    pub resolution: usize,
    /// `(α, β)` for each entry, `α` major.
    pub settings: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl CorrelatorGrid {
    pub fn compute(model: &dyn CorrelationModel, resolution: usize) -> Result<Self, BellError> {
        if resolution < MIN_RESOLUTION {
            return Err(BellError::Resolution(resolution));
        }
        let angle = |k: usize| TAU * k as f64 / resolution as f64;
        let rows = (0..resolution)
            .into_par_iter()
            .map(|i| (0..resolution).map(|j| model.correlation(angle(i), angle(j))).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let settings = (0..resolution).flat_map(|i| (0..resolution).map(move |j| (angle(i), angle(j)))).collect();
        Ok(CorrelatorGrid { resolution, settings, values: rows.concat() })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.resolution + j]
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.resolution as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    /// `(a, a', b, b')`.
    pub settings: [f64; 4],
    pub s: f64,
    pub s_max: f64,
    pub grid: CorrelatorGrid,
}

/// Exhaustive grid search for the largest `|S|`. Ties keep the
/// lexicographically first `(a, a', b, b')`.
pub fn scan_max(model: &dyn CorrelationModel, resolution: usize) -> Result<ScanResult, BellError> {
    let grid = CorrelatorGrid::compute(model, resolution)?;
    let n = resolution;
    let best_for = |a: usize| {
        let mut best = (f64::NEG_INFINITY, 0.0, [a, 0, 0, 0]);
        for a2 in 0..n {
            for b in 0..n {
                for b2 in 0..n {
                    let s = grid.get(a, b) - grid.get(a, b2) + grid.get(a2, b) + grid.get(a2, b2);
                    if s.abs() > best.0 + TIE_TOL {
                        best = (s.abs(), s, [a, a2, b, b2]);
                    }
                }
            }
        }
        best
    };
    let per_a: Vec<_> = (0..n).into_par_iter().map(best_for).collect();
    let mut best = per_a[0];
    for cand in &per_a[1..] {
        if cand.0 > best.0 + TIE_TOL {
            best = *cand;
        }
    }
    let (s_max, s, idx) = best;
    Ok(ScanResult { settings: idx.map(|k| grid.angle(k)), s, s_max, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    #[test]
    fn b1_correlator_examples() {
        let m = NetworkModel::b1().unwrap();
        assert!((m.correlation(0.7, 0.7).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.correlation(0.2 + PI, 0.2).unwrap() + 1.0).abs() < 1e-12);
        assert!(m.correlation(1.0 + FRAC_PI_2, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn correlation_is_cos_of_difference() {
        let m = NetworkModel::b1().unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let (a, b) = (0.53 * i as f64, -0.31 * j as f64);
                assert!((m.correlation(a, b).unwrap() - (a - b).cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn b2_outcome_classes() {
        let m = NetworkModel::b2().unwrap();
        let c = |i: &str, o: &str| BoundaryPair::new(&[i], &[o]);
        assert_eq!(m.same, [c("C", "A"), c("D", "B")]);
        assert_eq!(m.diff, [c("D", "A"), c("C", "B")]);
    }

    #[test]
    fn chsh_values() {
        let b1 = NetworkModel::b1().unwrap();
        let b2 = NetworkModel::b2().unwrap();
        let s1 = chsh(&b1, 0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        let s2 = chsh(&b2, 0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4).unwrap();
        assert!((s1 - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((s1 - s2).abs() < 1e-12);
        assert!((chsh(&b1, 0.4, 0.4, 0.4, 0.4).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn correlator_errors() {
        let m = NetworkModel::b1().unwrap();
        let t = m.table(0.0, 0.0).unwrap();
        assert!(matches!(correlator(&t, &[pair("Z", &["A", "B"])], &[]), Err(BellError::NotCovered(_))));
        assert!(matches!(
            correlator(&t, &[pair("Z", &["A", "D"])], &[pair("Z", &["B", "C"])]),
            Err(BellError::ZeroWeight)
        ));
    }

    #[test]
    fn deterministic_model_respects_the_classical_bound() {
        let scan = scan_max(&DeterministicModel, 16).unwrap();
        assert!(scan.s_max <= 2.0 + 1e-12);
        assert!((scan.s_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn resolution_minimum() {
        assert!(matches!(scan_max(&DeterministicModel, 4), Err(BellError::Resolution(4))));
        assert!(NetworkModel::preset("a1").is_err());
    }

    #[test]
    fn coarse_scan_b1_equals_b2() {
        let s1 = scan_max(&NetworkModel::b1().unwrap(), 8).unwrap();
        let s2 = scan_max(&NetworkModel::b2().unwrap(), 8).unwrap();
        assert!((s1.s_max - 2.0 * SQRT_2).abs() < 1e-9);
        assert_eq!(s1.settings, s2.settings);
        assert!(s1.grid.values.iter().zip(&s2.grid.values).all(|(x, y)| (x - y).abs() < 1e-12));
        assert!(s1.grid.values.iter().all(|e| e.abs() <= 1.0 + 1e-12));
    }
}
