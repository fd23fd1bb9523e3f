use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::reversal::{check_reversal_identity, reversal_op, EvolutionSequence, EvolutionStep, UNITARY_TOL};
use super::schmidt::{equivalence, BipartiteExperiment};
use super::ChannelError;
use crate::linalg::{CMatrix, CVector};

pub const EQUIVALENCE_TOL: f64 = 1e-10;

/// Seed of one trial, mixed from the root seed, the dimension and the trial
/// number.
pub fn trial_seed(root: u64, d: usize, trial: usize) -> u64 {
    let mut z =
        root ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian matrix with Gaussian entries; real symmetric when `real`.
pub fn random_hermitian(rng: &mut impl Rng, d: usize, real: bool) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| {
        let z = gaussian(rng);
        if real {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    });
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Haar-distributed unitary from the QR factorisation of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> CVector {
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    let n = crate::linalg::norm(&v);
    v / Complex64::from(n)
}

/// A sequence of `steps` random generators with durations in `[0.1, 1.5)`.
pub fn random_sequence(rng: &mut impl Rng, d: usize, steps: usize, real: bool) -> EvolutionSequence {
    let steps = (0..steps)
        .map(|_| EvolutionStep { generator: random_hermitian(rng, d, real), duration: rng.random_range(0.1..1.5) })
        .collect();
    EvolutionSequence::new(d, steps).expect("random generators are hermitian")
}

/// `V/√d` for a random unitary `V`.
pub fn random_maximally_entangled(rng: &mut impl Rng, d: usize) -> CMatrix {
    random_unitary(rng, d) / Complex64::from((d as f64).sqrt())
}

/// A random maximally entangled instance with 1 to 4 evolution steps per
/// side and random outcome vectors.
pub fn random_experiment(rng: &mut impl Rng, d: usize) -> BipartiteExperiment {
    let psi = random_maximally_entangled(rng, d);
    let nl = rng.random_range(1..=4);
    let nr = rng.random_range(1..=4);
    let left = random_sequence(rng, d, nl, false);
    let right = random_sequence(rng, d, nr, false);
    let alpha = random_unit_vector(rng, d);
    let beta = random_unit_vector(rng, d);
    BipartiteExperiment::new(psi, left, right, alpha, beta).expect("random instances are normalised")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionSummary {
    pub d: usize,
    pub trials: usize,
    /// Largest `|P_Ψ − P_W/d|`.
    pub max_delta: f64,
    /// Largest unitarity deviation of `√d·W`.
    pub max_w_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub seed: u64,
    pub tolerance: f64,
    pub dimensions: Vec<DimensionSummary>,
    pub pass: bool,
}

/// Randomized check of the entangled/single-system equivalence.
pub fn run_trials(dims: &[usize], trials: usize, seed: u64) -> Result<ChannelSummary, ChannelError> {
    if trials == 0 {
        return Err(ChannelError::NoTrials);
    }
    let mut dimensions = Vec::with_capacity(dims.len());
    for &d in dims {
        if d == 0 {
            return Err(ChannelError::Dimension { expected: 1, got: 0 });
        }
        let theta = reversal_op(d, None)?;
        let results = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, d, t));
                equivalence(&random_experiment(&mut rng, d), &theta)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let max_delta = results.iter().map(|r| r.delta).fold(0.0, f64::max);
        let max_w_deviation = results.iter().map(|r| r.w.deviation).fold(0.0, f64::max);
        let all_unitary = results.iter().all(|r| r.w.unitary);
        dimensions.push(DimensionSummary {
            d,
            trials,
            max_delta,
            max_w_deviation,
            pass: max_delta < EQUIVALENCE_TOL && all_unitary,
        });
    }
    Ok(ChannelSummary { seed, tolerance: EQUIVALENCE_TOL, pass: dimensions.iter().all(|s| s.pass), dimensions })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalSummary {
    pub sequences: usize,
    pub max_dim: usize,
    pub max_steps: usize,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Reversal identity over random real-generator sequences with dimension in
/// `2..=max_dim` and `1..=max_steps` steps.
pub fn reversal_trials(
    count: usize,
    max_dim: usize,
    max_steps: usize,
    seed: u64,
) -> Result<ReversalSummary, ChannelError> {
    let devs = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 0, k));
            let d = rng.random_range(2..=max_dim.max(2));
            let steps = rng.random_range(1..=max_steps.max(1));
            let seq = random_sequence(&mut rng, d, steps, true);
            check_reversal_identity(&seq, &reversal_op(d, None)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_deviation = devs.into_iter().fold(0.0, f64::max);
    Ok(ReversalSummary { sequences: count, max_dim, max_steps, max_deviation, pass: max_deviation < UNITARY_TOL })
}
