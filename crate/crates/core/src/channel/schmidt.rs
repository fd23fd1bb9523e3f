use num_complex::Complex64;
use serde::Serialize;

use super::reversal::{dual_sequence, EvolutionSequence, TimeReversal};
use super::ChannelError;
use crate::linalg::{norm, unitarity_deviation, CMatrix, CVector};

const NORM_TOL: f64 = 1e-12;
pub const MAX_ENTANGLED_TOL: f64 = 1e-9;

/// `Ψ = Σ c_n u_n ⊗ v_n` with `Ψ[(i, j)]` the amplitude of `|i⟩|j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    /// `u_n` is column `n`.
    pub u: CMatrix,
    /// `v_n` is column `n`.
    pub v: CMatrix,
}

impl SchmidtForm {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut psi = CMatrix::zeros(self.u.nrows(), self.v.nrows());
        for (n, &c) in self.coefficients.iter().enumerate() {
            psi += self.u.column(n) * self.v.column(n).transpose() * Complex64::from(c);
        }
        psi
    }

    pub fn is_maximally_entangled(&self) -> bool {
        let target = (self.dim() as f64).sqrt().recip();
        self.coefficients.iter().all(|c| (c - target).abs() < MAX_ENTANGLED_TOL)
    }
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn argmax_component(col: nalgebra::DVectorView<'_, Complex64>) -> usize {
    let mut best = 0;
    for (i, z) in col.iter().enumerate() {
        if z.norm() > col[best].norm() + 1e-12 {
            best = i;
        }
    }
    best
}

/// Schmidt form from the singular value decomposition `Ψ = U Σ V†`:
/// `u_n = U e_n`, `v_n = conj(V e_n)`. Coefficients descend, equal ones are
/// ordered by the index of `u_n`'s largest component, and that component is
/// made real and positive (the phase moves onto `v_n`).
pub fn schmidt(psi: &CMatrix) -> Result<SchmidtForm, ChannelError> {
    if !psi.is_square() {
        return Err(ChannelError::Dimension { expected: psi.nrows(), got: psi.ncols() });
    }
    let n = frobenius(psi);
    if (n - 1.0).abs() >= NORM_TOL {
        return Err(ChannelError::NotNormalized(n));
    }
    let svd = psi.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let v = svd.v_t.expect("requested").adjoint().conjugate();
    let d = psi.nrows();

    let mut order: Vec<usize> = (0..d).collect();
    let key = |k: usize| argmax_component(u.column(k));
    order.sort_by(|&a, &b| {
        let (sa, sb) = (svd.singular_values[a], svd.singular_values[b]);
        if (sa - sb).abs() < 1e-12 {
            key(a).cmp(&key(b))
        } else {
            sb.total_cmp(&sa)
        }
    });
    let mut su = CMatrix::zeros(d, d);
    let mut sv = CMatrix::zeros(d, d);
    let mut coefficients = Vec::with_capacity(d);
    for (n, &k) in order.iter().enumerate() {
        let top = u[(key(k), k)];
        let phase = if top.norm() > 0.0 { top / top.norm() } else { Complex64::new(1.0, 0.0) };
        su.set_column(n, &(u.column(k) * phase.conj()));
        sv.set_column(n, &(v.column(k) * phase));
        coefficients.push(svd.singular_values[k]);
    }
    Ok(SchmidtForm { coefficients, u: su, v: sv })
}

/// `W = Σ c_n u_n (Θ v_n)†`.
pub fn build_w(sf: &SchmidtForm, theta: &TimeReversal) -> Result<CMatrix, ChannelError> {
    let d = sf.dim();
    if theta.dim() != d {
        return Err(ChannelError::Dimension { expected: d, got: theta.dim() });
    }
    let mut w = CMatrix::zeros(d, d);
    for (n, &c) in sf.coefficients.iter().enumerate() {
        let tv = theta.apply(&sf.v.column(n).into_owned())?;
        w += sf.u.column(n) * tv.adjoint() * Complex64::from(c);
    }
    Ok(w)
}

/// `√d·W` and its unitarity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WCheck {
    #[serde(skip)]
    pub scaled: CMatrix,
    pub deviation: f64,
    pub maximally_entangled: bool,
    /// Maximally entangled and `‖(√dW)†(√dW) − I‖_max < 1e-10`.
    pub unitary: bool,
}

pub fn check_w(sf: &SchmidtForm, w: &CMatrix) -> WCheck {
    let scaled = w * Complex64::from((sf.dim() as f64).sqrt());
    let deviation = unitarity_deviation(&scaled);
    let maximally_entangled = sf.is_maximally_entangled();
    WCheck {
        unitary: maximally_entangled && deviation < super::reversal::UNITARY_TOL,
        scaled,
        deviation,
        maximally_entangled,
    }
}

/// An entangled preparation measured after separate left and right
/// evolutions. Time labels are not modelled.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteExperiment {
    pub psi: CMatrix,
    pub left: EvolutionSequence,
    pub right: EvolutionSequence,
    pub alpha: CVector,
    pub beta: CVector,
}

impl BipartiteExperiment {
    pub fn new(
        psi: CMatrix,
        left: EvolutionSequence,
        right: EvolutionSequence,
        alpha: CVector,
        beta: CVector,
    ) -> Result<Self, ChannelError> {
        let d = psi.nrows();
        for got in [psi.ncols(), left.dim(), right.dim(), alpha.len(), beta.len()] {
            if got != d {
                return Err(ChannelError::Dimension { expected: d, got });
            }
        }
        for n in [frobenius(&psi), norm(&alpha), norm(&beta)] {
            if (n - 1.0).abs() >= NORM_TOL {
                return Err(ChannelError::NotNormalized(n));
            }
        }
        Ok(BipartiteExperiment { psi, left, right, alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }
}

/// `|Σ_n c_n ⟨α|U_L|u_n⟩⟨β|U_R|v_n⟩|²`.
pub fn prob_entangled(exp: &BipartiteExperiment) -> Result<f64, ChannelError> {
    let sf = schmidt(&exp.psi)?;
    let la = exp.left.unitary().adjoint() * &exp.alpha;
    let rb = exp.right.unitary().adjoint() * &exp.beta;
    let amp: Complex64 = (0..sf.dim())
        .map(|n| Complex64::from(sf.coefficients[n]) * la.dotc(&sf.u.column(n)) * rb.dotc(&sf.v.column(n)))
        .sum();
    Ok(amp.norm_sqr())
}

/// `|⟨ψ_f| U_L · √dW · U'_R |ψ_i⟩|²`.
pub fn prob_single(
    psi_i: &CVector,
    right_dual: &EvolutionSequence,
    w_scaled: &CMatrix,
    left: &EvolutionSequence,
    psi_f: &CVector,
) -> Result<f64, ChannelError> {
    let d = psi_i.len();
    for got in [right_dual.dim(), w_scaled.nrows(), w_scaled.ncols(), left.dim(), psi_f.len()] {
        if got != d {
            return Err(ChannelError::Dimension { expected: d, got });
        }
    }
    let out = left.unitary() * w_scaled * right_dual.unitary() * psi_i;
    Ok(psi_f.dotc(&out).norm_sqr())
}

/// Both sides of the entangled/single-system equivalence for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equivalence {
    pub prob_entangled: f64,
    pub prob_single: f64,
    /// `|P_Ψ − P_W/d|`.
    pub delta: f64,
    pub w: WCheck,
}

/// Build the single-system dual of `exp` (`ψ_i = Θβ`, `ψ_f = α`, right
/// evolution reversed through `Θ`) and compare it with the entangled
/// probability.
pub fn equivalence(exp: &BipartiteExperiment, theta: &TimeReversal) -> Result<Equivalence, ChannelError> {
    let sf = schmidt(&exp.psi)?;
    let w = build_w(&sf, theta)?;
    let check = check_w(&sf, &w);
    let right_dual = dual_sequence(&exp.right, theta)?;
    let psi_i = theta.apply(&exp.beta)?;
    let single = prob_single(&psi_i, &right_dual, &check.scaled, &exp.left, &exp.alpha)?;
    let entangled = prob_entangled(exp)?;
    Ok(Equivalence {
        delta: (entangled - single / exp.dim() as f64).abs(),
        prob_entangled: entangled,
        prob_single: single,
        w: check,
    })
}
