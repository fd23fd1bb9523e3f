use super::ChannelError;
use crate::linalg::{expm_hermitian, hermiticity_deviation, max_abs_diff, unitarity_deviation, CMatrix, CVector};

pub const UNITARY_TOL: f64 = 1e-10;

/// The antiunitary `Θ = R·K`, with `K` complex conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeReversal {
    r: CMatrix,
}

/// `Θ` on dimension `d`; `R` defaults to the identity.
pub fn reversal_op(d: usize, r: Option<CMatrix>) -> Result<TimeReversal, ChannelError> {
    let r = r.unwrap_or_else(|| CMatrix::identity(d, d));
    if r.shape() != (d, d) {
        return Err(ChannelError::Dimension { expected: d, got: r.nrows() });
    }
    let dev = unitarity_deviation(&r);
    if dev >= UNITARY_TOL {
        return Err(ChannelError::NotUnitary(dev));
    }
    Ok(TimeReversal { r })
}

impl TimeReversal {
    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    fn check(&self, n: usize) -> Result<(), ChannelError> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(ChannelError::Dimension { expected: self.dim(), got: n })
        }
    }

    /// `Θv = R·v̄`.
    pub fn apply(&self, v: &CVector) -> Result<CVector, ChannelError> {
        self.check(v.len())?;
        Ok(&self.r * v.conjugate())
    }

    /// `Θ⁻¹v = conj(R†v)`.
    pub fn apply_inverse(&self, v: &CVector) -> Result<CVector, ChannelError> {
        self.check(v.len())?;
        Ok((self.r.adjoint() * v).conjugate())
    }

    /// `ΘAΘ⁻¹ = R·Ā·R†`.
    pub fn conjugate_operator(&self, a: &CMatrix) -> Result<CMatrix, ChannelError> {
        self.check(a.nrows())?;
        self.check(a.ncols())?;
        Ok(&self.r * a.conjugate() * self.r.adjoint())
    }

    /// The linear map `Θ² = R·R̄`.
    pub fn squared(&self) -> CMatrix {
        &self.r * self.r.conjugate()
    }
}

/// One piecewise-constant evolution step `e^{−iHδt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionStep {
    pub generator: CMatrix,
    pub duration: f64,
}

/// Ordered evolution steps; `steps[0]` acts first, so the total unitary is
/// `U_N ⋯ U_2 U_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSequence {
    dim: usize,
    steps: Vec<EvolutionStep>,
}

impl EvolutionSequence {
    pub fn new(dim: usize, steps: Vec<EvolutionStep>) -> Result<Self, ChannelError> {
        for s in &steps {
            if s.generator.shape() != (dim, dim) {
                return Err(ChannelError::Dimension { expected: dim, got: s.generator.nrows() });
            }
            let dev = hermiticity_deviation(&s.generator);
            if dev >= UNITARY_TOL {
                return Err(ChannelError::NotHermitian(dev));
            }
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(ChannelError::BadDuration(s.duration));
            }
        }
        Ok(EvolutionSequence { dim, steps })
    }

    pub fn identity(dim: usize) -> Self {
        EvolutionSequence { dim, steps: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[EvolutionStep] {
        &self.steps
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    pub fn unitary(&self) -> CMatrix {
        self.steps
            .iter()
            .fold(CMatrix::identity(self.dim, self.dim), |acc, s| expm_hermitian(&s.generator, s.duration) * acc)
    }
}

/// The same steps in reverse time order.
pub fn reverse_sequence(seq: &EvolutionSequence) -> EvolutionSequence {
    EvolutionSequence { dim: seq.dim, steps: seq.steps.iter().rev().cloned().collect() }
}

/// The sequence whose unitary is `Θ U† Θ⁻¹`: reverse order with every
/// generator replaced by `ΘHΘ⁻¹`. Equal to [`reverse_sequence`] when the
/// generators are real and `R` is the identity.
pub fn dual_sequence(seq: &EvolutionSequence, theta: &TimeReversal) -> Result<EvolutionSequence, ChannelError> {
    let steps = seq
        .steps
        .iter()
        .rev()
        .map(|s| Ok(EvolutionStep { generator: theta.conjugate_operator(&s.generator)?, duration: s.duration }))
        .collect::<Result<Vec<_>, ChannelError>>()?;
    EvolutionSequence::new(seq.dim, steps)
}

/// `‖Θ U†(seq) Θ⁻¹ − U(reverse_sequence(seq))‖_max`.
pub fn check_reversal_identity(seq: &EvolutionSequence, theta: &TimeReversal) -> Result<f64, ChannelError> {
    let lhs = theta.conjugate_operator(&seq.unitary().adjoint())?;
    Ok(max_abs_diff(&lhs, &reverse_sequence(seq).unitary()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn real_sym(a: f64, b: f64, d: f64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(b, 0.0), c(d, 0.0)])
    }

    #[test]
    fn conjugation_examples() {
        let theta = reversal_op(2, None).unwrap();
        let v = CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]);
        let tv = theta.apply(&v).unwrap();
        assert_eq!(tv, CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)]));
        let real = CVector::from_vec(vec![c(0.6, 0.0), c(-0.8, 0.0)]);
        assert_eq!(theta.apply(&real).unwrap(), real);
        assert_eq!(theta.apply(&tv).unwrap(), v);
        assert_eq!(theta.squared(), CMatrix::identity(2, 2));
        assert_eq!(theta.apply_inverse(&tv).unwrap(), v);
    }

    #[test]
    fn non_unitary_r_is_rejected() {
        let r = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(reversal_op(2, Some(r)), Err(ChannelError::NotUnitary(_))));
        assert!(reversal_op(3, Some(CMatrix::identity(2, 2))).is_err());
    }

    #[test]
    fn theta_inverse_round_trip_with_complex_r() {
        let s = FRAC_1_SQRT_2;
        let r = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]);
        let theta = reversal_op(2, Some(r)).unwrap();
        let v = CVector::from_vec(vec![c(0.3, -0.1), c(0.2, 0.9)]);
        let back = theta.apply_inverse(&theta.apply(&v).unwrap()).unwrap();
        assert!((back - v).norm() < 1e-14);
    }

    #[test]
    fn reverse_sequence_examples() {
        let h1 = real_sym(1.0, 0.5, -1.0);
        let h2 = real_sym(0.0, 2.0, 0.3);
        let seq = EvolutionSequence::new(
            2,
            vec![
                EvolutionStep { generator: h1.clone(), duration: 0.4 },
                EvolutionStep { generator: h2.clone(), duration: 1.1 },
            ],
        )
        .unwrap();
        let rev = reverse_sequence(&seq);
        assert_eq!(rev.steps()[0].generator, h2);
        assert_eq!(rev.steps()[1].duration, 0.4);
        assert!((rev.total_duration() - 1.5).abs() < 1e-15);
        let theta = reversal_op(2, None).unwrap();
        assert!(check_reversal_identity(&seq, &theta).unwrap() < 1e-10);
        assert_eq!(reverse_sequence(&EvolutionSequence::identity(2)), EvolutionSequence::identity(2));
    }

    #[test]
    fn complex_generators_break_the_plain_reversal() {
        let h1 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let h2 = real_sym(1.0, 0.0, -1.0);
        let seq = EvolutionSequence::new(
            2,
            vec![EvolutionStep { generator: h1, duration: 0.7 }, EvolutionStep { generator: h2, duration: 0.5 }],
        )
        .unwrap();
        let theta = reversal_op(2, None).unwrap();
        assert!(check_reversal_identity(&seq, &theta).unwrap() > 1e-3);
        let dual = dual_sequence(&seq, &theta).unwrap();
        let want = theta.conjugate_operator(&seq.unitary().adjoint()).unwrap();
        assert!(max_abs_diff(&dual.unitary(), &want) < 1e-12);
    }

    #[test]
    fn sequence_validation() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            EvolutionSequence::new(2, vec![EvolutionStep { generator: bad, duration: 1.0 }]),
            Err(ChannelError::NotHermitian(_))
        ));
        let h = real_sym(1.0, 0.0, 1.0);
        assert!(matches!(
            EvolutionSequence::new(2, vec![EvolutionStep { generator: h.clone(), duration: 0.0 }]),
            Err(ChannelError::BadDuration(_))
        ));
        assert!(EvolutionSequence::new(3, vec![EvolutionStep { generator: h, duration: 1.0 }]).is_err());
    }
}
