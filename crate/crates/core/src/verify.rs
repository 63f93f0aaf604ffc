//! Desk-scale self-check: every headline result recomputed from the engine,
//! one pass/fail line each.

use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    continuous_limit_sweep, klm_outcome_count, klm_outcome_count_by_sum, linear_outcome_count,
    qubit_mean_fidelity_formula, success_probability_dim, success_probability_formula,
};
use crate::fourier::ConjugateBasis;
use crate::qstate::PureState;
use crate::spectrum::{HalfInt, Spectrum};
use crate::teleport::{
    apply_pi_p, apply_pi_q, conditional_state, joint_state, CorrectionRule, ProtocolConfig, Teleporter, ALICE_ANCILLA,
    ALICE_INPUT,
};

/// Deliberate defects for checking that the harness notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Bob rotates by the conjugate phase.
    FlipCorrectionPhase,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Fewer random instances; same tolerances.
    pub quick: bool,
    pub fault: Option<Fault>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

struct Harness {
    options: VerifyOptions,
    rule: CorrectionRule,
}

fn spec(doubled: i64) -> Spectrum {
    Spectrum::from_doubled(doubled).expect("nonnegative")
}

impl Harness {
    fn teleporter(&self, cfg: ProtocolConfig) -> Teleporter {
        Teleporter::new(cfg).with_rule(self.rule)
    }

    fn random_inputs(&self) -> usize {
        if self.options.quick {
            5
        } else {
            20
        }
    }

    fn qubit_success(&self) -> (bool, String) {
        let cfg = ProtocolConfig::flat(spec(1), spec(1)).expect("valid");
        let t = self.teleporter(cfg);
        let exact = t.success_probability();
        let trials = 100_000u64;
        let successes = (0..trials)
            .filter(|&i| t.run_trial(self.options.seed, i).success)
            .count();
        let rate = successes as f64 / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        let passed = (exact - 0.5).abs() <= 1e-12 && (rate - 0.5).abs() <= 4.0 * sigma;
        (
            passed,
            format!(
                "exhaustive P = {exact:.15}, sampled {rate:.5} over {trials} trials (4σ = {:.5})",
                4.0 * sigma
            ),
        )
    }

    fn general_formula(&self) -> (bool, String) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed ^ 0x2);
        let mut worst_error: f64 = 0.0;
        let mut worst_spread: f64 = 0.0;
        let mut configs = 0;
        for a2x in 1..=4 {
            for b2x in a2x..=9 {
                let target = success_probability_formula(spec(a2x), spec(b2x));
                let values: Vec<f64> = (0..self.random_inputs())
                    .map(|_| {
                        let cfg = ProtocolConfig::random(spec(a2x), spec(b2x), &mut rng).expect("valid");
                        self.teleporter(cfg).success_probability()
                    })
                    .collect();
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                worst_spread = worst_spread.max(hi - lo);
                worst_error = values.iter().fold(worst_error, |w, v| w.max((v - target).abs()));
                configs += 1;
            }
        }
        let passed = worst_error <= 1e-12 && worst_spread <= 1e-12;
        (
            passed,
            format!("{configs} configs, max |P − formula| = {worst_error:.2e}, max input spread = {worst_spread:.2e}"),
        )
    }

    fn dimensional_form(&self) -> (bool, String) {
        let worst = (1..=20u64)
            .map(|n| (success_probability_dim(2, n + 1).expect("valid") - (1.0 - 1.0 / (n + 1) as f64)).abs())
            .fold(0.0, f64::max);
        (worst <= 1e-15, format!("n = 1…20, max deviation {worst:.2e}"))
    }

    fn perfect_replica(&self) -> (bool, String) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed ^ 0x4);
        let triples = if self.options.quick { 50 } else { 200 };
        let mut worst = 1.0f64;
        for _ in 0..triples {
            let a2x = rng.random_range(0..=8i64);
            let b2x = rng.random_range(a2x..=9i64);
            let cfg = ProtocolConfig::random(spec(a2x), spec(b2x), &mut rng).expect("valid");
            let t = self.teleporter(cfg);
            let successes: Vec<_> = t.outcomes().iter().filter(|o| t.config().is_success(o.q_sum)).collect();
            let outcome = successes[rng.random_range(0..successes.len())];
            worst = worst.min(t.record(outcome).fidelity_sq);
        }
        (
            worst >= 1.0 - 1e-10,
            format!("{triples} triples, min fidelity² = {worst:.15}"),
        )
    }

    fn mean_fidelity(&self) -> (bool, String) {
        let mut worst: f64 = 0.0;
        let mut at_half = 0.0;
        for b2x in (1..=19).step_by(2) {
            let cfg = ProtocolConfig::flat(spec(1), spec(b2x)).expect("valid");
            let report = crate::analysis::fidelity_report(&self.teleporter(cfg));
            if b2x == 1 {
                at_half = report.mean_f;
            }
            worst = worst.max((report.mean_f - qubit_mean_fidelity_formula(spec(b2x))).abs());
        }
        (
            worst <= 1e-12,
            format!("b = 1/2…19/2, max deviation {worst:.2e}, F̄(b=1/2) = {at_half:.15}"),
        )
    }

    fn failure_overlap(&self) -> (bool, String) {
        let mut worst_p: f64 = 0.0;
        let mut worst_overlap: f64 = 0.0;
        for b2x in (1..=19).step_by(2) {
            let cfg = ProtocolConfig::flat(spec(1), spec(b2x)).expect("valid");
            let report = crate::analysis::fidelity_report(&self.teleporter(cfg));
            let edge = HalfInt::from_doubled(b2x + 1);
            for row in report.per_q.iter().filter(|r| r.q_sum.abs() == edge) {
                worst_p = worst_p.max((row.p - 1.0 / (2.0 * (b2x + 1) as f64)).abs());
                worst_overlap = worst_overlap.max((row.overlap * row.overlap - 0.25).abs());
            }
        }
        let passed = worst_p <= 1e-12 && worst_overlap <= 1e-12;
        (
            passed,
            format!("max |p − 1/(2(2b+1))| = {worst_p:.2e}, max |overlap² − 1/4| = {worst_overlap:.2e}"),
        )
    }

    fn resource_counting(&self) -> (bool, String) {
        let identities = (0..=30).all(|n| klm_outcome_count(n) == klm_outcome_count_by_sum(n));
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed ^ 0x7);
        let mut within = true;
        let mut most = 0;
        for a2x in 0..=9 {
            for b2x in a2x..=9 {
                let cfg = ProtocolConfig::random(spec(a2x), spec(b2x), &mut rng).expect("valid");
                let count = self.teleporter(cfg).outcomes().len() as u64;
                let bound = linear_outcome_count(spec(a2x), spec(b2x)).expect("b >= a");
                within &= count <= bound;
                most = most.max(count);
            }
        }
        let klm30: BigUint = klm_outcome_count(30);
        let passed = identities && within;
        (passed, format!("factorial = binomial sum for n ≤ 30: {identities}; engine counts within bound: {within} (max {most}); N_KLM(30) = {klm30}"))
    }

    fn continuous_limit(&self) -> (bool, String) {
        let steps = [1.0, 0.5, 0.25, 0.125, 0.0625];
        let points = continuous_limit_sweep(1.0, 2.0, &steps).expect("steps divide");
        let decreasing = points.windows(2).all(|w| w[1].gap < w[0].gap);
        let bounded = points.iter().all(|p| p.gap <= p.bound + 1e-12);
        let targeted = points.iter().all(|p| p.p_cont == 0.5);
        let last = points.last().expect("nonempty").gap;
        (
            decreasing && bounded && targeted,
            format!("gaps strictly decreasing: {decreasing}, within ε·A/(2B²): {bounded}, final gap {last:.3e}"),
        )
    }

    fn projector_algebra(&self) -> (bool, String) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.seed ^ 0x9);
        let instances = if self.options.quick { 6 } else { 20 };
        let mut completeness: f64 = 0.0;
        let mut idempotence: f64 = 0.0;
        let mut schmidt_tail: f64 = 0.0;
        for _ in 0..instances {
            let a2x = rng.random_range(0..=7i64);
            let b2x = rng.random_range(a2x..=7i64);
            let cfg = ProtocolConfig::random(spec(a2x), spec(b2x), &mut rng).expect("valid");
            let t = self.teleporter(cfg.clone());
            completeness = completeness.max((t.total_probability() - 1.0).abs());

            let joint = joint_state(&cfg)
                .embed_mode(ALICE_INPUT, cfg.input_host())
                .expect("host covers");
            let q = cfg
                .q_sum_spectrum()
                .values()
                .nth(rng.random_range(0..cfg.q_sum_spectrum().dimension()))
                .expect("in range");
            let p = cfg
                .p_diff_spectrum()
                .values()
                .nth(rng.random_range(0..cfg.p_diff_spectrum().dimension()))
                .expect("in range");
            let once_q = apply_pi_q(&joint, q).expect("on ladder");
            let once_p = apply_pi_p(&joint, p).expect("on ladder");
            idempotence = idempotence
                .max(
                    apply_pi_q(&once_q, q)
                        .expect("on ladder")
                        .max_abs_diff(&once_q)
                        .expect("same modes"),
                )
                .max(
                    apply_pi_p(&once_p, p)
                        .expect("on ladder")
                        .max_abs_diff(&once_p)
                        .expect("same modes"),
                );

            for outcome in t.outcomes().iter().filter(|o| o.probability > 1e-12) {
                let state = conditional_state(&cfg, outcome.q_sum, outcome.p_diff)
                    .expect("valid")
                    .expect("nonzero");
                schmidt_tail = schmidt_tail.max(second_schmidt_value(&state));
            }
        }
        let fourier = (0..=7)
            .map(|d| fourier_error(ConjugateBasis::new(spec(d))))
            .fold(0.0, f64::max);
        let passed = completeness <= 1e-12 && idempotence <= 1e-12 && fourier <= 1e-12 && schmidt_tail <= 1e-10;
        (
            passed,
            format!(
                "{instances} instances: completeness {completeness:.1e}, idempotence {idempotence:.1e}, Fourier {fourier:.1e}, 2nd Schmidt value {schmidt_tail:.1e}"
            ),
        )
    }
}

/// Second singular value across `(Alice modes | Bob)`; zero for a product.
pub fn second_schmidt_value(state: &PureState) -> f64 {
    state
        .schmidt_values(&[ALICE_ANCILLA, ALICE_INPUT])
        .expect("three modes")
        .get(1)
        .copied()
        .unwrap_or(0.0)
}

/// Worst deviation from unitarity or from `|U_pq| = (2b+1)^{-1/2}`.
pub fn fourier_error(basis: ConjugateBasis) -> f64 {
    let n = basis.period();
    let u = basis.forward_matrix(basis.spectrum().ladder()).expect("square");
    let modulus = (n as f64).sqrt().recip();
    let mut worst = u.iter().map(|z| (z.norm() - modulus).abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            let dot: num_complex::Complex64 = (0..n).map(|k| u[k * n + i].conj() * u[k * n + j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

/// Run every criterion in order.
pub fn run(options: VerifyOptions) -> Vec<CriterionResult> {
    let rule = CorrectionRule {
        flip_phase: options.fault == Some(Fault::FlipCorrectionPhase),
    };
    let h = Harness { options, rule };
    type Check = fn(&Harness) -> (bool, String);
    let checks: [(&'static str, Check); 9] = [
        ("qubit success probability", Harness::qubit_success),
        ("general success formula, input independent", Harness::general_formula),
        ("dimensional form", Harness::dimensional_form),
        ("perfect replica on success", Harness::perfect_replica),
        ("qubit mean squared fidelity", Harness::mean_fidelity),
        ("qubit failure overlap", Harness::failure_overlap),
        ("outcome counting", Harness::resource_counting),
        ("continuous limit", Harness::continuous_limit),
        ("projector algebra", Harness::projector_algebra),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let (passed, detail) = check(&h);
            CriterionResult {
                id: i as u8 + 1,
                name,
                passed,
                detail,
            }
        })
        .collect()
}
