//! The teleportation engine.
//!
//! Mode layout of the joint state is fixed as
//! `(Alice ancilla q₂, Bob ancilla q₃, Alice input q₁)`. Alice measures
//! `Q = q₁ + q₂` first and then `P = p₁ − p₂`, where `p` labels the conjugate
//! basis of period `2b+1` on each of her two modes.
//!
//! The input mode has only `2a+1` levels. Before the `P` projection it is
//! embedded into a `(2b+1)`-level host ladder (see
//! [`ConjugateBasis::host_for`]); states returned by [`apply_pi_p`] carry that
//! host as their third mode.
//!
//! After outcome `(Q, P)` Bob holds, in his own labels,
//! `Σ_{q₃} α_{q₃+Q} exp(−2πi q₃P/(2b+1)) |q₃>` up to a global phase.
//! [`bob_correction`] multiplies by `exp(+2πi q₃P/(2b+1))` and then moves
//! level `q₃` to `q₃ + Q`. Input levels with `q₃ = q₁ − Q` outside Bob's
//! ladder are lost, which is why only `|Q| ≤ b − a` succeeds.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{phase, ConjugateBasis};
use crate::qstate::{flat_state, make_ancilla, random_state, PureState};
use crate::spectrum::{HalfInt, Ladder, Spectrum};

/// Outcomes whose Born probability is below this are treated as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

/// Mode positions in the joint state.
pub const ALICE_ANCILLA: usize = 0;
pub const BOB: usize = 1;
pub const ALICE_INPUT: usize = 2;

/// Input half-width `a`, ancilla half-width `b` and the input state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    a: Spectrum,
    b: Spectrum,
    input: PureState,
}

impl ProtocolConfig {
    /// `input` must be a single mode on the `a`-ladder; it is normalized here.
    pub fn new(a: Spectrum, b: Spectrum, input: PureState) -> Result<Self> {
        if b.half_width() < a.half_width() {
            return Err(Error::AncillaTooSmall {
                a: a.half_width(),
                b: b.half_width(),
            });
        }
        if input.modes() != [a.ladder()] {
            return Err(Error::ModeMismatch(format!(
                "input must be one mode on the a = {} ladder",
                a.half_width()
            )));
        }
        let input = input.normalized()?;
        Ok(ProtocolConfig { a, b, input })
    }

    /// Flat input `α_q = (2a+1)^{-1/2}`.
    pub fn flat(a: Spectrum, b: Spectrum) -> Result<Self> {
        ProtocolConfig::new(a, b, flat_state(a))
    }

    /// Input drawn uniformly from the unit sphere.
    pub fn random<R: Rng + ?Sized>(a: Spectrum, b: Spectrum, rng: &mut R) -> Result<Self> {
        ProtocolConfig::new(a, b, random_state(a, rng))
    }

    /// Convenience constructor from doubled half-widths and raw amplitudes.
    pub fn from_doubled(a2x: i64, b2x: i64, alphas: &[Complex64]) -> Result<Self> {
        let a = Spectrum::from_doubled(a2x)?;
        let b = Spectrum::from_doubled(b2x)?;
        ProtocolConfig::new(a, b, PureState::new(vec![a.ladder()], alphas.to_vec())?)
    }

    pub fn a(&self) -> Spectrum {
        self.a
    }

    pub fn b(&self) -> Spectrum {
        self.b
    }

    pub fn input(&self) -> &PureState {
        &self.input
    }

    pub fn basis(&self) -> ConjugateBasis {
        ConjugateBasis::new(self.b)
    }

    /// Ladder hosting the input mode during the `P` measurement.
    pub fn input_host(&self) -> Ladder {
        self.basis().host_for(self.a.ladder()).expect("b >= a")
    }

    /// Possible `Q` values: `−(a+b), …, a+b`.
    pub fn q_sum_spectrum(&self) -> Spectrum {
        Spectrum::new(self.a.half_width() + self.b.half_width()).expect("nonnegative")
    }

    /// Possible `P` values: `−2b, …, 2b`.
    pub fn p_diff_spectrum(&self) -> Spectrum {
        Spectrum::new(self.b.half_width() + self.b.half_width()).expect("nonnegative")
    }

    /// `|Q| ≤ b − a`.
    pub fn is_success(&self, q_sum: HalfInt) -> bool {
        q_sum.abs() <= self.b.half_width() - self.a.half_width()
    }
}

/// One `(Q, P)` measurement result.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// Eigenvalue of `q̂₁ + q̂₂`.
    pub q_sum: HalfInt,
    /// Eigenvalue of `p̂₁ − p̂₂`.
    pub p_diff: HalfInt,
    pub probability: f64,
    /// Bob's normalized conditional state on the `b`-ladder.
    pub bob_state: PureState,
}

/// One complete run: outcome, Bob's corrected state and its squared fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRecord {
    pub outcome: MeasurementOutcome,
    pub corrected: PureState,
    pub success: bool,
    pub fidelity_sq: f64,
}

/// A line of the JSON-lines protocol trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub trial: u64,
    #[serde(rename = "Q2x")]
    pub q2x: i64,
    #[serde(rename = "P2x")]
    pub p2x: i64,
    pub probability: f64,
    pub success: bool,
    pub fidelity_sq: f64,
}

impl ProtocolRecord {
    pub fn trace_line(&self, trial: u64) -> TraceLine {
        TraceLine {
            trial,
            q2x: self.outcome.q_sum.doubled(),
            p2x: self.outcome.p_diff.doubled(),
            probability: self.outcome.probability,
            success: self.success,
            fidelity_sq: self.fidelity_sq,
        }
    }
}

/// Write records as JSON lines, numbering trials from zero.
pub fn write_trace<'a, W: Write>(records: impl IntoIterator<Item = &'a ProtocolRecord>, mut out: W) -> Result<()> {
    for (trial, record) in records.into_iter().enumerate() {
        serde_json::to_writer(&mut out, &record.trace_line(trial as u64))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// `|Φ> ⊗ |Ψ>` in the layout `(q₂, q₃, q₁)`.
pub fn joint_state(cfg: &ProtocolConfig) -> PureState {
    make_ancilla(cfg.b).tensor(&cfg.input)
}

fn check_layout(state: &PureState) -> Result<ConjugateBasis> {
    let modes = state.modes();
    if modes.len() != 3 {
        return Err(Error::ModeMismatch(format!("expected 3 modes, got {}", modes.len())));
    }
    let b = modes[ALICE_ANCILLA]
        .symmetric_half_width()
        .ok_or_else(|| Error::ModeMismatch("ancilla mode must be symmetric".into()))?;
    if modes[BOB] != modes[ALICE_ANCILLA] {
        return Err(Error::ModeMismatch("ancilla modes differ".into()));
    }
    Ok(ConjugateBasis::new(Spectrum::new(b)?))
}

/// Keep amplitudes with `q₁ + q₂ = Q`.
///
/// `Q` off the half-integer step of `q₁ + q₂` is an error; `Q` on the step but
/// out of range gives the zero vector.
pub fn apply_pi_q(state: &PureState, q_sum: HalfInt) -> Result<PureState> {
    check_layout(state)?;
    let modes = state.modes();
    let step = modes[ALICE_ANCILLA].low() + modes[ALICE_INPUT].low();
    if !q_sum.same_parity(step) {
        return Err(Error::OffLadder {
            what: "Q",
            value: q_sum,
        });
    }
    let mut out = state.clone();
    let ancilla = modes[ALICE_ANCILLA];
    let input = modes[ALICE_INPUT];
    let (n2, n3, n1) = (ancilla.dimension(), modes[BOB].dimension(), input.dimension());
    let amps = out.amplitudes_mut();
    for i2 in 0..n2 {
        let q2 = ancilla.value_at(i2);
        for i1 in 0..n1 {
            if q2 + input.value_at(i1) == q_sum {
                continue;
            }
            for i3 in 0..n3 {
                amps[(i2 * n3 + i3) * n1 + i1] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

/// Project Alice's two modes onto `p₁ − p₂ = P`.
///
/// Both of Alice's modes are taken to the conjugate basis, entries with
/// `p₁ − p₂ ≠ P` are cleared and the modes are transformed back. The input
/// mode comes back on its `(2b+1)`-level host ladder.
pub fn apply_pi_p(state: &PureState, p_diff: HalfInt) -> Result<PureState> {
    let basis = check_layout(state)?;
    if !p_diff.is_integer() {
        return Err(Error::OffLadder {
            what: "P",
            value: p_diff,
        });
    }
    let host = basis.host_for(state.modes()[ALICE_INPUT])?;
    let embedded = state.embed_mode(ALICE_INPUT, host)?;
    let mut in_p = basis.mode_to_p(&embedded, ALICE_ANCILLA)?;
    in_p = basis.mode_to_p(&in_p, ALICE_INPUT)?;
    let ps = basis.p_ladder();
    let n = ps.dimension();
    let amps = in_p.amplitudes_mut();
    for i2 in 0..n {
        for i1 in 0..n {
            if ps.value_at(i1) - ps.value_at(i2) == p_diff {
                continue;
            }
            for i3 in 0..n {
                amps[(i2 * n + i3) * n + i1] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let back = basis.mode_to_q(&in_p, ALICE_ANCILLA, basis.spectrum().ladder())?;
    basis.mode_to_q(&back, ALICE_INPUT, host)
}

/// `Π_P Π_Q |Γ₀>` normalized, or `None` when the outcome has zero weight.
pub fn conditional_state(cfg: &ProtocolConfig, q_sum: HalfInt, p_diff: HalfInt) -> Result<Option<PureState>> {
    let projected = apply_pi_p(&apply_pi_q(&joint_state(cfg), q_sum)?, p_diff)?;
    if projected.norm_sqr() < PROBABILITY_FLOOR {
        return Ok(None);
    }
    projected.normalized().map(Some)
}

/// Every `(Q, P)` outcome with probability at least [`PROBABILITY_FLOOR`],
/// ordered by `Q` then `P`.
///
/// Each `Π_Q |Γ₀>` is taken to the `p` representation once; every `P` is then
/// a slice `p₁ = P + p₂` of that array. The conditional state factorizes, so
/// Bob's state is read off the heaviest `p₂` row of the slice.
pub fn enumerate_outcomes(cfg: &ProtocolConfig) -> Vec<MeasurementOutcome> {
    let basis = cfg.basis();
    let host = cfg.input_host();
    let joint = joint_state(cfg);
    let ps = basis.p_ladder();
    let n = ps.dimension();
    let mut outcomes = Vec::new();
    for q_sum in cfg.q_sum_spectrum().values() {
        let projected = apply_pi_q(&joint, q_sum).expect("Q on its ladder");
        if projected.norm_sqr() < PROBABILITY_FLOOR {
            continue;
        }
        let embedded = projected.embed_mode(ALICE_INPUT, host).expect("host covers input");
        let in_p = basis
            .mode_to_p(&embedded, ALICE_ANCILLA)
            .and_then(|s| basis.mode_to_p(&s, ALICE_INPUT))
            .expect("dimensions match");
        let amps = in_p.amplitudes();
        for p_diff in cfg.p_diff_spectrum().values() {
            let mut probability = 0.0;
            let mut best: Option<(f64, usize, usize)> = None;
            for i2 in 0..n {
                let Some(i1) = ps.index_of(ps.value_at(i2) + p_diff) else {
                    continue;
                };
                let row_weight: f64 = (0..n).map(|i3| amps[(i2 * n + i3) * n + i1].norm_sqr()).sum();
                probability += row_weight;
                if best.is_none_or(|(w, _, _)| row_weight > w) {
                    best = Some((row_weight, i2, i1));
                }
            }
            if probability < PROBABILITY_FLOOR {
                continue;
            }
            let (_, i2, i1) = best.expect("nonzero weight");
            let bob_amps = (0..n).map(|i3| amps[(i2 * n + i3) * n + i1]).collect();
            let bob_state = PureState::new(vec![cfg.b.ladder()], bob_amps)
                .and_then(|s| s.normalized())
                .expect("row has weight");
            outcomes.push(MeasurementOutcome {
                q_sum,
                p_diff,
                probability,
                bob_state,
            });
        }
    }
    outcomes
}

/// Bob's local recovery operation.
///
/// The default rule cancels the `P`-dependent phase and shifts by `Q`.
/// `flip_phase` applies the phase with the wrong sign; it exists so that
/// self-checks can confirm that a broken correction is detected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorrectionRule {
    pub flip_phase: bool,
}

impl CorrectionRule {
    pub fn apply(&self, outcome: &MeasurementOutcome, cfg: &ProtocolConfig) -> Result<PureState> {
        let bob = outcome.bob_state.modes()[0];
        let a = cfg.a.ladder();
        let period = cfg.b.dimension();
        let mut out = PureState::zeros(vec![a]);
        let amps = out.amplitudes_mut();
        for (i3, amp) in outcome.bob_state.amplitudes().iter().enumerate() {
            let q3 = bob.value_at(i3);
            let Some(target) = a.index_of(q3 + outcome.q_sum) else {
                continue;
            };
            let mut rotation = phase(q3, outcome.p_diff, period);
            if self.flip_phase {
                rotation = rotation.conj();
            }
            amps[target] = amp * rotation;
        }
        out.normalized()
    }
}

/// Correct Bob's conditional state with the standard [`CorrectionRule`].
///
/// The result lives on the input's `a`-ladder. On success it equals the input
/// up to a global phase; on failure it is the renormalized part of the input
/// that survived.
pub fn bob_correction(outcome: &MeasurementOutcome, cfg: &ProtocolConfig) -> Result<PureState> {
    CorrectionRule::default().apply(outcome, cfg)
}

/// RNG for trial `trial` of a seeded experiment: ChaCha8 keyed by `seed`,
/// one stream per trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// RNG reserved for drawing random input states from `seed`.
pub fn input_rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, u64::MAX)
}

/// A configuration with its outcome distribution precomputed, for repeated
/// sampling.
#[derive(Debug, Clone)]
pub struct Teleporter {
    cfg: ProtocolConfig,
    outcomes: Vec<MeasurementOutcome>,
    cumulative: Vec<f64>,
    rule: CorrectionRule,
}

impl Teleporter {
    pub fn new(cfg: ProtocolConfig) -> Self {
        let outcomes = enumerate_outcomes(&cfg);
        let cumulative = outcomes
            .iter()
            .scan(0.0, |acc, o| {
                *acc += o.probability;
                Some(*acc)
            })
            .collect();
        Teleporter {
            cfg,
            outcomes,
            cumulative,
            rule: CorrectionRule::default(),
        }
    }

    pub fn with_rule(mut self, rule: CorrectionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn outcomes(&self) -> &[MeasurementOutcome] {
        &self.outcomes
    }

    pub fn total_probability(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Σ of outcome probabilities with `|Q| ≤ b − a`.
    pub fn success_probability(&self) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| self.cfg.is_success(o.q_sum))
            .map(|o| o.probability)
            .sum()
    }

    /// Marginal `p(Q) = Σ_P prob(Q, P)` for every `Q` on the ladder.
    pub fn q_marginal(&self) -> Vec<(HalfInt, f64)> {
        self.cfg
            .q_sum_spectrum()
            .values()
            .map(|q| {
                let p = self
                    .outcomes
                    .iter()
                    .filter(|o| o.q_sum == q)
                    .map(|o| o.probability)
                    .sum();
                (q, p)
            })
            .collect()
    }

    /// Born-rule draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &MeasurementOutcome {
        let u = rng.random::<f64>() * self.total_probability();
        let index = self.cumulative.partition_point(|&c| c <= u);
        &self.outcomes[index.min(self.outcomes.len() - 1)]
    }

    /// Correct and score a given outcome.
    pub fn record(&self, outcome: &MeasurementOutcome) -> ProtocolRecord {
        let corrected = self
            .rule
            .apply(outcome, &self.cfg)
            .expect("outcome has support on the input");
        let fidelity_sq = self.cfg.input.inner(&corrected).expect("same ladder").norm_sqr();
        ProtocolRecord {
            outcome: outcome.clone(),
            corrected,
            success: self.cfg.is_success(outcome.q_sum),
            fidelity_sq,
        }
    }

    pub fn run_with_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> ProtocolRecord {
        self.record(self.sample(rng))
    }

    /// Trial `trial` of the experiment keyed by `seed`.
    pub fn run_trial(&self, seed: u64, trial: u64) -> ProtocolRecord {
        self.run_with_rng(&mut trial_rng(seed, trial))
    }
}

/// One Born-rule draw, deterministic in `seed`.
pub fn sample_outcome(cfg: &ProtocolConfig, seed: u64) -> MeasurementOutcome {
    Teleporter::new(cfg.clone()).sample(&mut trial_rng(seed, 0)).clone()
}

/// Sample, correct and score one run.
pub fn run_protocol(cfg: &ProtocolConfig, seed: u64) -> ProtocolRecord {
    Teleporter::new(cfg.clone()).run_trial(seed, 0)
}
