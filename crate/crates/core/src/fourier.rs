//! The conjugate basis `|p> = N^{-1/2} Σ_q exp(2πi qp/N) |q>` with `N = 2b+1`.
//!
//! Phases are evaluated from the doubled integers: `qp/N` equals
//! `q2x·p2x / 4N`, so the integer product is reduced modulo `4N` before a
//! single conversion to an angle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::PureState;
use crate::spectrum::{HalfInt, Ladder, Spectrum};

/// `exp(2πi q p / period)` with `q` and `p` given exactly.
pub fn phase(q: HalfInt, p: HalfInt, period: usize) -> Complex64 {
    let modulus = 4 * period as i128;
    let k = (q.doubled() as i128 * p.doubled() as i128).rem_euclid(modulus);
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / modulus as f64)
}

/// The Fourier-conjugate basis living on a `b`-ladder.
///
/// The `p` labels always run over the `b`-ladder. The `q` side may be any
/// ladder of the same dimension `2b+1`: a shifted host ladder is used when
/// an input with the other half-integer parity has to be measured against
/// the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConjugateBasis {
    spectrum: Spectrum,
}

impl ConjugateBasis {
    pub fn new(spectrum: Spectrum) -> Self {
        ConjugateBasis { spectrum }
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    pub fn period(&self) -> usize {
        self.spectrum.dimension()
    }

    /// The `p` labels.
    pub fn p_ladder(&self) -> Ladder {
        self.spectrum.ladder()
    }

    /// A ladder of dimension `2b+1` covering `inner` with `inner`'s parity:
    /// the `b`-ladder itself when the parities agree, otherwise the `b`-ladder
    /// shifted up by one half.
    pub fn host_for(&self, inner: Ladder) -> Result<Ladder> {
        let b = self.spectrum.half_width();
        let host = if inner.low().same_parity(-b) {
            self.spectrum.ladder()
        } else {
            Ladder::new(-b + HalfInt::HALF, self.period())?
        };
        if host.covers(&inner) {
            Ok(host)
        } else {
            Err(Error::ModeMismatch(format!(
                "{inner:?} does not fit in a {}-level host",
                self.period()
            )))
        }
    }

    /// `|p>` expanded on the `b`-ladder.
    pub fn p_vector(&self, p: HalfInt) -> Result<PureState> {
        self.p_vector_on(p, self.spectrum.ladder())
    }

    pub fn p_vector_on(&self, p: HalfInt, q_ladder: Ladder) -> Result<PureState> {
        self.check_q_ladder(q_ladder)?;
        if !self.p_ladder().contains(p) {
            return Err(Error::OffLadder { what: "p", value: p });
        }
        let n = self.period();
        let scale = (n as f64).sqrt().recip();
        let amps = q_ladder.values().map(|q| phase(q, p, n) * scale).collect();
        PureState::new(vec![q_ladder], amps)
    }

    /// Row-major `U[p][q] = <p|q> = N^{-1/2} exp(-2πi qp/N)`.
    pub fn forward_matrix(&self, q_ladder: Ladder) -> Result<Vec<Complex64>> {
        self.check_q_ladder(q_ladder)?;
        let n = self.period();
        let scale = (n as f64).sqrt().recip();
        let ps = self.p_ladder();
        Ok(ps
            .values()
            .flat_map(|p| q_ladder.values().map(move |q| phase(q, p, n).conj() * scale))
            .collect())
    }

    /// Row-major `V[q][p] = <q|p>`, the adjoint of [`forward_matrix`](Self::forward_matrix).
    pub fn inverse_matrix(&self, q_ladder: Ladder) -> Result<Vec<Complex64>> {
        let forward = self.forward_matrix(q_ladder)?;
        let n = self.period();
        let mut inverse = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in 0..n {
                inverse[q * n + p] = forward[p * n + q].conj();
            }
        }
        Ok(inverse)
    }

    /// `<p|ψ>` for every `p`, for a single-mode state on a `(2b+1)`-level ladder.
    pub fn q_to_p(&self, state: &PureState) -> Result<Vec<Complex64>> {
        let [mode] = state.modes() else {
            return Err(Error::ModeMismatch(format!(
                "q_to_p expects one mode, got {}",
                state.modes().len()
            )));
        };
        let matrix = self.forward_matrix(*mode)?;
        let n = self.period();
        Ok((0..n)
            .map(|p| {
                matrix[p * n..(p + 1) * n]
                    .iter()
                    .zip(state.amplitudes())
                    .map(|(u, x)| u * x)
                    .sum()
            })
            .collect())
    }

    /// Inverse of [`q_to_p`](Self::q_to_p): rebuild `Σ_p c_p |p>` on `q_ladder`.
    pub fn p_to_q(&self, coefficients: &[Complex64], q_ladder: Ladder) -> Result<PureState> {
        let n = self.period();
        if coefficients.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: coefficients.len(),
            });
        }
        let matrix = self.inverse_matrix(q_ladder)?;
        let amps = (0..n)
            .map(|q| {
                matrix[q * n..(q + 1) * n]
                    .iter()
                    .zip(coefficients)
                    .map(|(v, c)| v * c)
                    .sum()
            })
            .collect();
        PureState::new(vec![q_ladder], amps)
    }

    /// Change one mode of a multi-mode state to the `p` representation.
    pub(crate) fn mode_to_p(&self, state: &PureState, mode: usize) -> Result<PureState> {
        let q_ladder = state.modes()[mode];
        let matrix = self.forward_matrix(q_ladder)?;
        Ok(state.transform_mode(mode, &matrix, self.p_ladder()))
    }

    /// Undo [`mode_to_p`](Self::mode_to_p), labelling the mode with `q_ladder`.
    pub(crate) fn mode_to_q(&self, state: &PureState, mode: usize, q_ladder: Ladder) -> Result<PureState> {
        let matrix = self.inverse_matrix(q_ladder)?;
        Ok(state.transform_mode(mode, &matrix, q_ladder))
    }

    fn check_q_ladder(&self, q_ladder: Ladder) -> Result<()> {
        if q_ladder.dimension() != self.period() {
            return Err(Error::ModeMismatch(format!(
                "q ladder has {} levels, basis has {}",
                q_ladder.dimension(),
                self.period()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::random_state;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn basis(doubled: i64) -> ConjugateBasis {
        ConjugateBasis::new(Spectrum::from_doubled(doubled).unwrap())
    }

    fn h(doubled: i64) -> HalfInt {
        HalfInt::from_doubled(doubled)
    }

    fn max_unitarity_error(u: &[Complex64], n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: Complex64 = (0..n).map(|k| u[k * n + i].conj() * u[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    #[test]
    fn phase_is_exact_on_quarter_turns() {
        // q = p = 1/2, N = 2: exp(2πi/8)
        assert!((phase(h(1), h(1), 2) - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert_eq!(phase(h(0), h(7), 5), Complex64::new(1.0, 0.0));
        // huge products reduce before conversion
        let z = phase(h(2_000_001), h(2_000_001), 3);
        assert!((z.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn p_vector_examples() {
        let v = basis(0).p_vector(h(0)).unwrap();
        assert_eq!(v.amplitudes(), &[Complex64::new(1.0, 0.0)]);

        let v = basis(1).p_vector(h(-1)).unwrap();
        let s = 0.5f64.sqrt();
        assert!((v.amplitudes()[0] - Complex64::from_polar(s, FRAC_PI_4)).norm() < 1e-15);
        assert!((v.amplitudes()[1] - Complex64::from_polar(s, -FRAC_PI_4)).norm() < 1e-15);

        let b = basis(2);
        let overlap = b.p_vector(h(2)).unwrap().inner(&b.p_vector(h(0)).unwrap()).unwrap();
        assert!(overlap.norm() < 1e-15);

        assert!(matches!(b.p_vector(h(1)), Err(Error::OffLadder { .. })));
        assert!(matches!(b.p_vector(h(4)), Err(Error::OffLadder { .. })));
    }

    #[test]
    fn q_to_p_examples() {
        let b = basis(2);
        let ladder = b.spectrum().ladder();
        let zero = PureState::basis(vec![ladder], &[h(0)]).unwrap();
        for c in b.q_to_p(&zero).unwrap() {
            assert!((c.norm() - 3f64.sqrt().recip()).abs() < 1e-15);
        }

        for p in b.p_ladder().values() {
            let coeffs = b.q_to_p(&b.p_vector(p).unwrap()).unwrap();
            for (k, c) in coeffs.iter().enumerate() {
                let target = if b.p_ladder().value_at(k) == p { 1.0 } else { 0.0 };
                assert!((c - Complex64::new(target, 0.0)).norm() < 1e-12);
            }
        }

        let two = zero.tensor(&zero);
        assert!(matches!(b.q_to_p(&two), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn parseval_on_random_state() {
        let b = basis(4);
        let state = random_state(b.spectrum(), &mut ChaCha8Rng::seed_from_u64(11));
        let coeffs = b.q_to_p(&state).unwrap();
        let total: f64 = coeffs.iter().map(Complex64::norm_sqr).sum();
        assert!((total - state.norm_sqr()).abs() < 1e-12);
        let back = b.p_to_q(&coeffs, b.spectrum().ladder()).unwrap();
        assert!(back.max_abs_diff(&state).unwrap() < 1e-12);
    }

    #[test]
    fn unitary_and_unbiased_up_to_fifteen_halves() {
        for d in 0..=15 {
            let b = basis(d);
            let n = b.period();
            let u = b.forward_matrix(b.spectrum().ladder()).unwrap();
            assert!(max_unitarity_error(&u, n) <= 1e-12, "b2x = {d}");
            for z in &u {
                assert!((z.norm() - (n as f64).sqrt().recip()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn shifted_host_is_also_unitary() {
        for d in [2, 4, 6, 8] {
            let b = basis(d);
            let inner = Spectrum::from_doubled(d - 1).unwrap().ladder();
            let host = b.host_for(inner).unwrap();
            assert_eq!(host.low(), h(-d + 1));
            assert!(host.covers(&inner));
            let u = b.forward_matrix(host).unwrap();
            assert!(max_unitarity_error(&u, b.period()) <= 1e-12);
        }
        // same parity: the b-ladder itself
        let b = basis(5);
        assert_eq!(
            b.host_for(Spectrum::from_doubled(3).unwrap().ladder()).unwrap(),
            b.spectrum().ladder()
        );
        // too wide
        assert!(b.host_for(Spectrum::from_doubled(7).unwrap().ladder()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_through_p(d in 0i64..=15, seed in any::<u64>()) {
            let b = basis(d);
            let state = random_state(b.spectrum(), &mut ChaCha8Rng::seed_from_u64(seed));
            let coeffs = b.q_to_p(&state).unwrap();
            let total: f64 = coeffs.iter().map(Complex64::norm_sqr).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            let back = b.p_to_q(&coeffs, b.spectrum().ladder()).unwrap();
            prop_assert!(back.max_abs_diff(&state).unwrap() <= 1e-12);
        }
    }
}
