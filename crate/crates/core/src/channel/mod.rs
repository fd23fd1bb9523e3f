//! Entangled pair versus single system: time reversal `Θ = RK`, reversed
//! evolution sequences, Schmidt form and the bridge operator
//! `W = Σ c_n |u_n⟩⟨Θv_n|`.

mod reversal;
mod schmidt;
mod trials;

pub use reversal::{
    check_reversal_identity, dual_sequence, reversal_op, reverse_sequence, EvolutionSequence, EvolutionStep,
    TimeReversal, UNITARY_TOL,
};
pub use schmidt::{
    build_w, check_w, equivalence, prob_entangled, prob_single, schmidt, BipartiteExperiment, Equivalence, SchmidtForm,
    WCheck, MAX_ENTANGLED_TOL,
};
pub use trials::{
    random_experiment, random_hermitian, random_maximally_entangled, random_sequence, random_unit_vector,
    random_unitary, reversal_trials, run_trials, trial_seed, ChannelSummary, DimensionSummary, ReversalSummary,
    EQUIVALENCE_TOL,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::network::{ElementKind, OpticalNetwork};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("generator is not hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("step duration {0} is not positive")]
    BadDuration(f64),
    #[error("not normalised (norm {0})")]
    NotNormalized(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("{0} is not a source with two-port emission groups")]
    NotPairSource(String),
}

/// Two-photon which-way state of a pair source: the first port of every
/// emission group is a left mode, the second a right mode, each side listed
/// in port order.
#[derive(Debug, Clone, PartialEq)]
pub struct WhichWay {
    pub left_modes: Vec<String>,
    pub right_modes: Vec<String>,
    pub psi: CMatrix,
}

pub fn which_way_state(net: &OpticalNetwork, source: &str) -> Result<WhichWay, ChannelError> {
    let bad = || ChannelError::NotPairSource(source.to_string());
    let z = net.element_by_id(source).ok_or_else(bad)?;
    let groups = z.groups();
    if z.kind() != ElementKind::Source || groups.iter().any(|g| g.len() != 2) {
        return Err(bad());
    }
    let side = |k: usize| {
        let mut ports: Vec<usize> = groups.iter().map(|g| g[k]).collect();
        ports.sort_unstable();
        ports
    };
    let (left, right) = (side(0), side(1));
    let weight = Complex64::from((groups.len() as f64).sqrt().recip());
    let mut psi = CMatrix::zeros(left.len(), right.len());
    for g in groups {
        let i = left.iter().position(|&p| p == g[0]).expect("left port");
        let j = right.iter().position(|&p| p == g[1]).expect("right port");
        psi[(i, j)] += weight;
    }
    let names = |ports: &[usize]| ports.iter().map(|&p| z.ports()[p].clone()).collect();
    Ok(WhichWay { left_modes: names(&left), right_modes: names(&right), psi })
}

/// Whether every entry is 0 or 1 within `tol` with exactly one 1 per row
/// and column.
pub fn is_permutation(m: &CMatrix, tol: f64) -> bool {
    let binary = m.iter().all(|z| z.im.abs() < tol && (z.re.abs() < tol || (z.re - 1.0).abs() < tol));
    let ones = |v: Vec<Complex64>| v.iter().filter(|z| (z.re - 1.0).abs() < tol).count() == 1;
    binary
        && m.is_square()
        && m.row_iter().all(|r| ones(r.iter().copied().collect()))
        && m.column_iter().all(|c| ones(c.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::network::presets;

    #[test]
    fn b1_which_way_w_is_a_swap() {
        let b1 = presets::b1(0.0, 0.0).unwrap();
        let ww = which_way_state(&b1, "Z").unwrap();
        assert_eq!(ww.left_modes, ["l_up", "l_down"]);
        assert_eq!(ww.right_modes, ["r_up", "r_down"]);
        let sf = schmidt(&ww.psi).unwrap();
        let check = check_w(&sf, &build_w(&sf, &reversal_op(2, None).unwrap()).unwrap());
        assert!(check.unitary);
        assert!(is_permutation(&check.scaled, 1e-12));
        let swap = CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(Complex64::from));
        assert!(max_abs_diff(&check.scaled, &swap) < 1e-12);
        // with the right modes listed in group order the same operator is the identity
        let mut relabelled = ww.psi.clone();
        relabelled.swap_columns(0, 1);
        let sf = schmidt(&relabelled).unwrap();
        let check = check_w(&sf, &build_w(&sf, &reversal_op(2, None).unwrap()).unwrap());
        assert!(max_abs_diff(&check.scaled, &CMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn which_way_needs_a_pair_source() {
        let a1 = presets::a1(0.0).unwrap();
        assert!(which_way_state(&a1, "C").is_err());
        assert!(which_way_state(&a1, "BS1").is_err());
        assert!(which_way_state(&a1, "nope").is_err());
    }

    #[test]
    fn permutation_check() {
        assert!(is_permutation(&CMatrix::identity(3, 3), 1e-12));
        assert!(!is_permutation(&(CMatrix::identity(2, 2) * Complex64::from(0.5)), 1e-12));
        let twice = CMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0].map(Complex64::from));
        assert!(!is_permutation(&twice, 1e-12));
    }
}
