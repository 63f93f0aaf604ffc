//! Closed-form results and reports built on top of the engine.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{HalfInt, Spectrum};
use crate::teleport::{ProtocolConfig, Teleporter};

fn check_widths(a: Spectrum, b: Spectrum) -> Result<()> {
    if b.half_width() < a.half_width() {
        return Err(Error::AncillaTooSmall {
            a: a.half_width(),
            b: b.half_width(),
        });
    }
    Ok(())
}

/// `p(Q) = (2b+1)^{-1} Σ_{q₁,q₂} |α_{q₁}|² δ(q₁+q₂, Q)` for every `Q` in
/// `−(a+b)…a+b`. The amplitudes are normalized first.
pub fn p_of_q(a: Spectrum, b: Spectrum, alphas: &[Complex64]) -> Result<BTreeMap<HalfInt, f64>> {
    if alphas.len() != a.dimension() {
        return Err(Error::LengthMismatch {
            expected: a.dimension(),
            actual: alphas.len(),
        });
    }
    let norm: f64 = alphas.iter().map(Complex64::norm_sqr).sum();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let scale = 1.0 / (norm * b.dimension() as f64);
    let q_sums = Spectrum::new(a.half_width() + b.half_width())?;
    let mut table: BTreeMap<HalfInt, f64> = q_sums.values().map(|q| (q, 0.0)).collect();
    for (q1, alpha) in a.values().zip(alphas) {
        for q2 in b.values() {
            *table.get_mut(&(q1 + q2)).expect("Q in range") += alpha.norm_sqr() * scale;
        }
    }
    Ok(table)
}

/// `Σ_{|Q| ≤ b−a} p(Q)`.
pub fn success_probability_exact(a: Spectrum, b: Spectrum, alphas: &[Complex64]) -> Result<f64> {
    check_widths(a, b)?;
    let margin = b.half_width() - a.half_width();
    Ok(p_of_q(a, b, alphas)?
        .into_iter()
        .filter(|(q, _)| q.abs() <= margin)
        .map(|(_, p)| p)
        .sum())
}

/// `1 − 2a/(2b+1)`.
pub fn success_probability_formula(a: Spectrum, b: Spectrum) -> f64 {
    1.0 - a.half_width().doubled() as f64 / b.dimension() as f64
}

/// `1 − (dim_in − 1)/dim_anc`.
pub fn success_probability_dim(dim_in: u64, dim_anc: u64) -> Result<f64> {
    if dim_in == 0 || dim_in > dim_anc {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= dim_in <= dim_anc, got dim_in = {dim_in}, dim_anc = {dim_anc}"
        )));
    }
    Ok(1.0 - (dim_in - 1) as f64 / dim_anc as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QProbability {
    #[serde(rename = "Q2x")]
    pub q_sum: HalfInt,
    pub p: f64,
}

/// Success statistics for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    #[serde(rename = "a2x")]
    pub a: HalfInt,
    #[serde(rename = "b2x")]
    pub b: HalfInt,
    /// Closed-form `p(Q)`.
    pub p_of_q: Vec<QProbability>,
    /// `Σ_{|Q| ≤ b−a} p(Q)` from the closed form.
    #[serde(rename = "P_success")]
    pub p_success: f64,
    /// The same probability summed over the engine's enumerated outcomes.
    #[serde(rename = "P_engine")]
    pub p_engine: f64,
    /// `1 − 2a/(2b+1)`.
    #[serde(rename = "P_formula")]
    pub p_formula: f64,
}

pub fn success_report(teleporter: &Teleporter) -> SuccessReport {
    let cfg = teleporter.config();
    let (a, b) = (cfg.a(), cfg.b());
    let table = p_of_q(a, b, cfg.input().amplitudes()).expect("config is valid");
    let margin = b.half_width() - a.half_width();
    let p_success = table.iter().filter(|(q, _)| q.abs() <= margin).map(|(_, p)| p).sum();
    SuccessReport {
        a: a.half_width(),
        b: b.half_width(),
        p_of_q: table.into_iter().map(|(q_sum, p)| QProbability { q_sum, p }).collect(),
        p_success,
        p_engine: teleporter.success_probability(),
        p_formula: success_probability_formula(a, b),
    }
}

/// Per-`Q` contribution to the mean squared fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QOverlap {
    #[serde(rename = "Q2x")]
    pub q_sum: HalfInt,
    pub p: f64,
    pub success: bool,
    /// `|<Γ₂^Q|Ψ>|` with Bob's unnormalized post-measurement state after
    /// correction, whose surviving amplitudes keep the input's magnitudes.
    pub overlap: f64,
    /// Squared fidelity of the renormalized corrected state.
    pub fidelity_sq: f64,
}

/// Mean squared fidelity when failed runs are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    #[serde(rename = "a2x")]
    pub a: HalfInt,
    #[serde(rename = "b2x")]
    pub b: HalfInt,
    /// Success probability; each success is an exact replica.
    pub exact_success_part: f64,
    /// `Σ_{|Q| > b−a} p(Q) |<Γ₂^Q|Ψ>|²`.
    pub failure_overlap_part: f64,
    #[serde(rename = "mean_F")]
    pub mean_f: f64,
    /// `Σ_{Q,P} prob · F` using renormalized corrected states.
    #[serde(rename = "mean_F_normalized")]
    pub mean_f_normalized: f64,
    pub per_q: Vec<QOverlap>,
}

/// Mean squared fidelity for an arbitrary configuration, by exhaustive
/// enumeration and correction of every outcome.
///
/// `Γ₂^Q` is Bob's state before renormalization, scaled so that a surviving
/// level carries amplitude `α_q`. Its squared norm is `(2b+1)·p(Q)`, so
/// `|<Γ₂^Q|Ψ>|² = (2b+1)·p(Q)·F(Q)` with `F(Q)` the renormalized fidelity.
pub fn fidelity_report(teleporter: &Teleporter) -> FidelityReport {
    let cfg = teleporter.config();
    let dim_b = cfg.b().dimension() as f64;
    let mut per_q = Vec::new();
    let mut mean_f_normalized = 0.0;
    for q_sum in cfg.q_sum_spectrum().values() {
        let mut p = 0.0;
        let mut weighted_fidelity = 0.0;
        for outcome in teleporter.outcomes().iter().filter(|o| o.q_sum == q_sum) {
            let record = teleporter.record(outcome);
            p += outcome.probability;
            weighted_fidelity += outcome.probability * record.fidelity_sq;
        }
        mean_f_normalized += weighted_fidelity;
        let fidelity_sq = if p > 0.0 { weighted_fidelity / p } else { 0.0 };
        let overlap = (dim_b * p * fidelity_sq).sqrt();
        per_q.push(QOverlap {
            q_sum,
            p,
            success: cfg.is_success(q_sum),
            overlap,
            fidelity_sq,
        });
    }
    let exact_success_part = teleporter.success_probability();
    let failure_overlap_part = per_q
        .iter()
        .filter(|r| !r.success)
        .map(|r| r.p * r.overlap * r.overlap)
        .sum::<f64>();
    FidelityReport {
        a: cfg.a().half_width(),
        b: cfg.b().half_width(),
        exact_success_part,
        failure_overlap_part,
        mean_f: exact_success_part + failure_overlap_part,
        mean_f_normalized,
        per_q,
    }
}

/// [`fidelity_report`] for the flat input `α_q = (2a+1)^{-1/2}`.
pub fn mean_squared_fidelity(a: Spectrum, b: Spectrum) -> Result<FidelityReport> {
    let cfg = ProtocolConfig::flat(a, b)?;
    Ok(fidelity_report(&Teleporter::new(cfg)))
}

/// `1 − 1/(2b+1) + 1/(4(2b+1))`, the qubit (`a = 1/2`) mean squared fidelity.
pub fn qubit_mean_fidelity_formula(b: Spectrum) -> f64 {
    let n = b.dimension() as f64;
    1.0 - 1.0 / n + 1.0 / (4.0 * n)
}

/// `(a+1+b−Q)/(2a+1)` for `Q > b−a`; mirrored for `Q < −(b−a)`.
pub fn failure_overlap_formula(a: Spectrum, b: Spectrum, q_sum: HalfInt) -> f64 {
    let q = q_sum.abs();
    let surviving = (a.half_width() + b.half_width() - q).doubled() / 2 + 1;
    surviving as f64 / a.dimension() as f64
}

/// One row of the continuous-limit sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub step: f64,
    pub a2x: i64,
    pub b2x: i64,
    #[serde(rename = "P_disc")]
    pub p_disc: f64,
    #[serde(rename = "P_cont")]
    pub p_cont: f64,
    pub gap: f64,
    /// `ε·A/(2B²)`.
    pub bound: f64,
}

fn half_widths_for(extent: f64, step: f64) -> Result<i64> {
    let doubled = 2.0 * extent / step;
    let rounded = doubled.round();
    if (doubled - rounded).abs() > 1e-9 * rounded.max(1.0) || rounded < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step {step} does not divide {extent} into half-integer units"
        )));
    }
    Ok(rounded as i64)
}

/// Discretize `[-A, A]` and `[-B, B]` with each step `ε` and compare the
/// discrete success probability against `1 − A/B`.
pub fn continuous_limit_sweep(input_extent: f64, ancilla_extent: f64, steps: &[f64]) -> Result<Vec<LimitPoint>> {
    if !(input_extent > 0.0 && ancilla_extent >= input_extent) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < A <= B, got A = {input_extent}, B = {ancilla_extent}"
        )));
    }
    let p_cont = 1.0 - input_extent / ancilla_extent;
    steps
        .iter()
        .map(|&step| {
            if !step.is_finite() || step <= 0.0 {
                return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
            }
            let a2x = half_widths_for(input_extent, step)?;
            let b2x = half_widths_for(ancilla_extent, step)?;
            let p_disc = 1.0 - a2x as f64 / (b2x + 1) as f64;
            Ok(LimitPoint {
                step,
                a2x,
                b2x,
                p_disc,
                p_cont,
                gap: p_disc - p_cont,
                bound: step * input_extent / (2.0 * ancilla_extent * ancilla_extent),
            })
        })
        .collect()
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `C(n, k)` by the exact multiplicative recurrence.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Distinguishable outcomes of the KLM `n`-photon teleporter,
/// `(2n+2)! / ((n+1)!)²`.
pub fn klm_outcome_count(n: u64) -> BigUint {
    factorial(2 * n + 2) / (factorial(n + 1) * factorial(n + 1))
}

/// The same count as `Σ_{k=0}^{n+1} C(n+k, k)`.
pub fn klm_outcome_count_by_sum(n: u64) -> BigUint {
    (0..=n + 1).map(|k| binomial(n + k, k)).sum()
}

/// Distinguishable `(Q, P)` outcomes, `(2(a+b)+1)(4b+1)`.
pub fn linear_outcome_count(a: Spectrum, b: Spectrum) -> Result<u64> {
    check_widths(a, b)?;
    let (a2x, b2x) = (a.half_width().doubled() as u64, b.half_width().doubled() as u64);
    Ok((a2x + b2x + 1) * (2 * b2x + 1))
}

/// KLM count next to the linear count for a qubit with ancilla dimension `n+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlmComparison {
    pub n: u64,
    /// Decimal string; exceeds 64 bits from `n = 32`.
    #[serde(rename = "N_KLM")]
    pub klm: String,
    /// `(2(a+b)+1)(4b+1)` at `a = 1/2`, `b = n/2`. Absent for `n = 0`, where
    /// the one-level ancilla cannot host a qubit.
    #[serde(rename = "N_linear")]
    pub linear: Option<u64>,
    pub klm_exceeds_linear: Option<bool>,
}

pub fn klm_comparison(n: u64) -> KlmComparison {
    let klm = klm_outcome_count(n);
    let linear = Spectrum::from_doubled(n as i64)
        .and_then(|b| linear_outcome_count(Spectrum::from_doubled(1)?, b))
        .ok();
    KlmComparison {
        n,
        klm_exceeds_linear: linear.map(|l| klm > BigUint::from(l)),
        klm: klm.to_string(),
        linear,
    }
}

/// One CSV row: `a2x,b2x,P_exact,P_formula,F_mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub a2x: i64,
    pub b2x: i64,
    #[serde(rename = "P_exact")]
    pub p_exact: f64,
    #[serde(rename = "P_formula")]
    pub p_formula: f64,
    #[serde(rename = "F_mean")]
    pub f_mean: f64,
}

impl ReportRow {
    pub fn new(success: &SuccessReport, fidelity: &FidelityReport) -> Self {
        ReportRow {
            a2x: success.a.doubled(),
            b2x: success.b.doubled(),
            p_exact: success.p_engine,
            p_formula: success.p_formula,
            f_mean: fidelity.mean_f,
        }
    }
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(doubled: i64) -> Spectrum {
        Spectrum::from_doubled(doubled).unwrap()
    }

    fn h(doubled: i64) -> HalfInt {
        HalfInt::from_doubled(doubled)
    }

    fn flat(a: Spectrum) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); a.dimension()]
    }

    #[test]
    fn p_of_q_qubit_flat() {
        let table = p_of_q(s(1), s(1), &flat(s(1))).unwrap();
        assert_eq!(table.len(), 3);
        assert!((table[&h(-2)] - 0.25).abs() < 1e-15);
        assert!((table[&h(0)] - 0.5).abs() < 1e-15);
        assert!((table[&h(2)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn p_of_q_trivial_input_is_uniform() {
        for b2x in 0..8 {
            let table = p_of_q(s(0), s(b2x), &flat(s(0))).unwrap();
            for p in table.values() {
                assert!((p - 1.0 / s(b2x).dimension() as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn p_of_q_errors() {
        assert!(matches!(
            p_of_q(s(2), s(2), &flat(s(1))),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            p_of_q(s(1), s(1), &[Complex64::new(0.0, 0.0); 2]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn success_probability_examples() {
        assert!((success_probability_exact(s(1), s(1), &flat(s(1))).unwrap() - 0.5).abs() < 1e-12);
        assert!((success_probability_exact(s(1), s(9), &flat(s(1))).unwrap() - 0.9).abs() < 1e-12);
        for b2x in 0..6 {
            assert!((success_probability_exact(s(0), s(b2x), &flat(s(0))).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(success_probability_exact(s(3), s(1), &flat(s(3))).is_err());
    }

    #[test]
    fn success_probability_is_input_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for a2x in 0..=6 {
            for b2x in a2x..=9 {
                let target = success_probability_formula(s(a2x), s(b2x));
                for _ in 0..5 {
                    let alphas = random_state(s(a2x), &mut rng).into_amplitudes();
                    let p = success_probability_exact(s(a2x), s(b2x), &alphas).unwrap();
                    assert!((p - target).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dimensional_form() {
        assert_eq!(success_probability_dim(2, 2).unwrap(), 0.5);
        for n in 1..=20u64 {
            let p = success_probability_dim(2, n + 1).unwrap();
            assert!((p - (1.0 - 1.0 / (n + 1) as f64)).abs() <= 1e-15);
        }
        for k in 1..10 {
            assert_eq!(success_probability_dim(1, k).unwrap(), 1.0);
        }
        assert!(success_probability_dim(3, 2).is_err());
        assert!(success_probability_dim(0, 2).is_err());
        for a2x in 0..6i64 {
            for b2x in a2x..10 {
                let dim = success_probability_dim(a2x as u64 + 1, b2x as u64 + 1).unwrap();
                assert!((dim - success_probability_formula(s(a2x), s(b2x))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn limit_sweep_examples() {
        let points = continuous_limit_sweep(1.0, 2.0, &[1.0]).unwrap();
        let p = points[0];
        assert_eq!((p.a2x, p.b2x), (2, 4));
        assert!((p.p_disc - 0.6).abs() < 1e-15);
        assert!((p.p_cont - 0.5).abs() < 1e-15);
        assert!((p.gap - 0.1).abs() < 1e-15);

        let points = continuous_limit_sweep(1.0, 1.0, &[1.0, 0.5, 0.25, 0.125]).unwrap();
        for w in points.windows(2) {
            assert!(w[1].p_disc < w[0].p_disc);
        }
        assert_eq!(points[0].p_cont, 0.0);
        assert!((points[3].p_disc - 1.0 / 17.0).abs() < 1e-15);

        assert!(continuous_limit_sweep(1.0, 2.0, &[0.3]).is_err());
        assert!(continuous_limit_sweep(2.0, 1.0, &[1.0]).is_err());
        assert!(continuous_limit_sweep(1.0, 2.0, &[0.0]).is_err());
    }

    #[test]
    fn klm_small_values() {
        assert_eq!(klm_outcome_count(0), BigUint::from(2u32));
        assert_eq!(klm_outcome_count(1), BigUint::from(6u32));
        assert_eq!(klm_outcome_count_by_sum(1), BigUint::from(6u32));
        assert_eq!(klm_outcome_count(9).to_string(), "184756");
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 0), BigUint::one());
        assert_eq!(binomial(5, 6), BigUint::ZERO);
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
    }

    #[test]
    fn linear_count_examples() {
        assert_eq!(linear_outcome_count(s(1), s(1)).unwrap(), 9);
        assert_eq!(linear_outcome_count(s(0), s(0)).unwrap(), 1);
        assert_eq!(linear_outcome_count(s(2), s(4)).unwrap(), 63);
        assert!(linear_outcome_count(s(3), s(1)).is_err());
    }

    #[test]
    fn klm_comparison_table() {
        assert_eq!(klm_comparison(1).klm, "6");
        assert_eq!(klm_comparison(1).linear, Some(9));
        assert_eq!(klm_comparison(2).klm_exceeds_linear, Some(false));
        assert_eq!(klm_comparison(0).linear, None);
        for n in 7..=40 {
            assert_eq!(klm_comparison(n).klm_exceeds_linear, Some(true), "n = {n}");
        }
    }

    #[test]
    fn failure_overlap_formula_qubit() {
        for b2x in (1..20).step_by(2) {
            let b = s(b2x);
            let q = b.half_width() + HalfInt::HALF;
            assert_eq!(failure_overlap_formula(s(1), b, q), 0.5);
            assert_eq!(failure_overlap_formula(s(1), b, -q), 0.5);
        }
    }

    #[test]
    fn qubit_mean_fidelity_matches_closed_form() {
        for b2x in (1..=19).step_by(2) {
            let report = mean_squared_fidelity(s(1), s(b2x)).unwrap();
            let expected = qubit_mean_fidelity_formula(s(b2x));
            assert!(
                (report.mean_f - expected).abs() < 1e-12,
                "b2x={b2x}: {} vs {expected}",
                report.mean_f
            );
            assert!((report.mean_f - report.exact_success_part - report.failure_overlap_part).abs() < 1e-12);
            assert!(report.mean_f >= report.exact_success_part);
        }
        let report = mean_squared_fidelity(s(1), s(1)).unwrap();
        assert!((report.mean_f - 0.625).abs() < 1e-12);
    }

    #[test]
    fn qubit_failure_outcomes() {
        for b2x in (1..=9).step_by(2) {
            let report = mean_squared_fidelity(s(1), s(b2x)).unwrap();
            let edge = h(b2x + 1);
            for row in report.per_q.iter().filter(|r| r.q_sum.abs() == edge) {
                assert!(!row.success);
                assert!((row.p - 1.0 / (2.0 * s(b2x).dimension() as f64)).abs() < 1e-12);
                assert!((row.overlap * row.overlap - 0.25).abs() < 1e-12);
                // renormalized replica keeps one of two equal amplitudes
                assert!((row.fidelity_sq - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn failure_overlap_formula_matches_engine() {
        // includes half-integer a and b of either parity
        for a2x in 0..=4 {
            for b2x in a2x..=7 {
                let report = mean_squared_fidelity(s(a2x), s(b2x)).unwrap();
                for row in &report.per_q {
                    if row.success {
                        assert!((row.overlap - 1.0).abs() < 1e-12);
                    } else {
                        let expected = failure_overlap_formula(s(a2x), s(b2x), row.q_sum);
                        assert!(
                            (row.overlap - expected).abs() < 1e-12,
                            "a2x={a2x} b2x={b2x} Q={}: {} vs {expected}",
                            row.q_sum,
                            row.overlap
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn full_width_input_mean_fidelity_bounds_success() {
        for d in 0..=6 {
            let report = mean_squared_fidelity(s(d), s(d)).unwrap();
            assert!((report.exact_success_part - 1.0 / s(d).dimension() as f64).abs() < 1e-12);
            assert!(report.mean_f >= report.exact_success_part);
        }
    }

    #[test]
    fn success_report_agrees_with_engine() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for (a2x, b2x) in [(1, 1), (1, 2), (2, 5), (3, 7)] {
            let cfg = ProtocolConfig::random(s(a2x), s(b2x), &mut rng).unwrap();
            let t = Teleporter::new(cfg);
            let report = success_report(&t);
            let total: f64 = report.p_of_q.iter().map(|q| q.p).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((report.p_success - report.p_engine).abs() < 1e-12);
            assert!((report.p_success - report.p_formula).abs() < 1e-12);
            for (closed, (q, engine)) in report.p_of_q.iter().zip(t.q_marginal()) {
                assert_eq!(closed.q_sum, q);
                assert!((closed.p - engine).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_header_and_row() {
        let row = ReportRow {
            a2x: 1,
            b2x: 9,
            p_exact: 0.9,
            p_formula: 0.9,
            f_mean: 0.925,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a2x,b2x,P_exact,P_formula,F_mean\n1,9,0.9,0.9,0.925\n"
        );
    }
}
