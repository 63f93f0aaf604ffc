//! Dense pure states over tensor products of eigenvalue ladders.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{HalfInt, Ladder, Spectrum};

/// Squared-norm tolerance for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A complex amplitude vector over one or more modes.
///
/// Amplitudes are stored row-major over the mode value tuples: the last mode
/// varies fastest. States are not required to be normalized; projections
/// return unnormalized states and the caller decides when to renormalize.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    modes: Vec<Ladder>,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(modes: Vec<Ladder>, amps: Vec<Complex64>) -> Result<Self> {
        let expected = modes.iter().map(Ladder::dimension).product();
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: amps.len(),
            });
        }
        Ok(PureState { modes, amps })
    }

    pub fn zeros(modes: Vec<Ladder>) -> Self {
        let len = modes.iter().map(Ladder::dimension).product();
        PureState {
            modes,
            amps: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// The product basis state with the given mode values.
    pub fn basis(modes: Vec<Ladder>, values: &[HalfInt]) -> Result<Self> {
        let mut state = PureState::zeros(modes);
        let index = state
            .index_of_values(values)
            .ok_or_else(|| Error::InvalidArgument(format!("basis values {values:?} are not on the mode ladders")))?;
        state.amps[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn modes(&self) -> &[Ladder] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        PureState {
            modes: self.modes.clone(),
            amps: self.amps.iter().map(|z| z * factor).collect(),
        }
    }

    /// Row-major strides, one per mode.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.modes)
    }

    pub fn index_of_values(&self, values: &[HalfInt]) -> Option<usize> {
        if values.len() != self.modes.len() {
            return None;
        }
        let mut index = 0;
        for (mode, &v) in self.modes.iter().zip(values) {
            index = index * mode.dimension() + mode.index_of(v)?;
        }
        Some(index)
    }

    pub fn values_of_index(&self, mut index: usize) -> Vec<HalfInt> {
        let mut values = vec![HalfInt::ZERO; self.modes.len()];
        for (slot, mode) in values.iter_mut().zip(&self.modes).rev() {
            *slot = mode.value_at(index % mode.dimension());
            index /= mode.dimension();
        }
        values
    }

    pub fn amplitude_at(&self, values: &[HalfInt]) -> Option<Complex64> {
        self.index_of_values(values).map(|i| self.amps[i])
    }

    /// Mode list `self.modes ++ other.modes`, amplitude `x[u] * y[v]`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        let amps = self
            .amps
            .iter()
            .flat_map(|x| other.amps.iter().map(move |y| x * y))
            .collect();
        PureState { modes, amps }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.check_same_modes(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(x, y)| x.conj() * y).sum())
    }

    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        self.check_same_modes(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub fn add(&self, other: &PureState) -> Result<PureState> {
        self.check_same_modes(other)?;
        let amps = self.amps.iter().zip(&other.amps).map(|(x, y)| x + y).collect();
        Ok(PureState {
            modes: self.modes.clone(),
            amps,
        })
    }

    fn check_same_modes(&self, other: &PureState) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch(format!("{:?} vs {:?}", self.modes, other.modes)));
        }
        Ok(())
    }

    /// Relabel `mode` onto a ladder that covers it, zero-filling the new levels.
    pub fn embed_mode(&self, mode: usize, target: Ladder) -> Result<PureState> {
        let source = *self
            .modes
            .get(mode)
            .ok_or_else(|| Error::InvalidArgument(format!("no mode {mode}")))?;
        if source == target {
            return Ok(self.clone());
        }
        if !target.covers(&source) {
            return Err(Error::ModeMismatch(format!("{target:?} does not cover {source:?}")));
        }
        let offset = target.index_of(source.low()).expect("covered");
        let mut modes = self.modes.clone();
        modes[mode] = target;
        let mut out = PureState::zeros(modes);
        let (outer, inner) = split_extent(&self.modes, mode);
        let (n_src, n_dst) = (source.dimension(), target.dimension());
        for o in 0..outer {
            for k in 0..n_src {
                let src = (o * n_src + k) * inner;
                let dst = (o * n_dst + k + offset) * inner;
                out.amps[dst..dst + inner].copy_from_slice(&self.amps[src..src + inner]);
            }
        }
        Ok(out)
    }

    /// Apply a square matrix (row-major, `out_i = Σ_j m[i][j] in_j`) along one
    /// mode, relabelling that mode with `relabel`. All-zero fibres are skipped.
    pub(crate) fn transform_mode(&self, mode: usize, matrix: &[Complex64], relabel: Ladder) -> PureState {
        let n = self.modes[mode].dimension();
        debug_assert_eq!(matrix.len(), n * n);
        debug_assert_eq!(relabel.dimension(), n);
        let mut modes = self.modes.clone();
        modes[mode] = relabel;
        let mut out = PureState::zeros(modes);
        let (outer, inner) = split_extent(&self.modes, mode);
        let zero = Complex64::new(0.0, 0.0);
        let mut fibre = vec![zero; n];
        for o in 0..outer {
            for r in 0..inner {
                let base = o * n * inner + r;
                let mut any = false;
                for (j, slot) in fibre.iter_mut().enumerate() {
                    *slot = self.amps[base + j * inner];
                    any |= *slot != zero;
                }
                if !any {
                    continue;
                }
                for i in 0..n {
                    let row = &matrix[i * n..(i + 1) * n];
                    out.amps[base + i * inner] = row.iter().zip(&fibre).map(|(m, x)| m * x).sum();
                }
            }
        }
        out
    }

    /// The amplitude matrix across the cut `left | rest`, rows indexed by the
    /// `left` modes (in the given order) and columns by the remaining modes.
    pub fn bipartite_matrix(&self, left: &[usize]) -> Result<DMatrix<Complex64>> {
        let k = self.modes.len();
        if left.iter().any(|&m| m >= k) || (1..left.len()).any(|i| left[..i].contains(&left[i])) {
            return Err(Error::InvalidArgument(format!("bad cut {left:?} for {k} modes")));
        }
        let right: Vec<usize> = (0..k).filter(|m| !left.contains(m)).collect();
        let dims: Vec<usize> = self.modes.iter().map(Ladder::dimension).collect();
        let rows: usize = left.iter().map(|&m| dims[m]).product();
        let cols: usize = right.iter().map(|&m| dims[m]).product();
        let mut matrix = DMatrix::zeros(rows, cols);
        let mut digits = vec![0usize; k];
        for (flat, amp) in self.amps.iter().enumerate() {
            let mut rem = flat;
            for m in (0..k).rev() {
                digits[m] = rem % dims[m];
                rem /= dims[m];
            }
            let r = left.iter().fold(0, |acc, &m| acc * dims[m] + digits[m]);
            let c = right.iter().fold(0, |acc, &m| acc * dims[m] + digits[m]);
            matrix[(r, c)] = *amp;
        }
        Ok(matrix)
    }

    /// Singular values across the cut `left | rest`, largest first.
    ///
    /// For a normalized state their squares are the Schmidt coefficients.
    pub fn schmidt_values(&self, left: &[usize]) -> Result<Vec<f64>> {
        let matrix = self.bipartite_matrix(left)?;
        let mut values: Vec<f64> = matrix.singular_values().iter().copied().collect();
        values.sort_by(|x, y| y.total_cmp(x));
        Ok(values)
    }

    /// Number of singular values above `tol` times the largest one.
    pub fn schmidt_rank(&self, left: &[usize], tol: f64) -> Result<usize> {
        let values = self.schmidt_values(left)?;
        let top = values.first().copied().unwrap_or(0.0);
        Ok(values.iter().filter(|&&s| s > tol * top).count())
    }
}

fn strides_of(modes: &[Ladder]) -> Vec<usize> {
    let mut strides = vec![1; modes.len()];
    for k in (0..modes.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * modes[k + 1].dimension();
    }
    strides
}

/// (product of dims before `mode`, product of dims after `mode`)
fn split_extent(modes: &[Ladder], mode: usize) -> (usize, usize) {
    let outer = modes[..mode].iter().map(Ladder::dimension).product();
    let inner = modes[mode + 1..].iter().map(Ladder::dimension).product();
    (outer, inner)
}

/// The normalized single-mode input `Σ α_q |q>`.
pub fn make_input_state(a: Spectrum, alphas: &[Complex64]) -> Result<PureState> {
    PureState::new(vec![a.ladder()], alphas.to_vec())?.normalized()
}

/// The maximally entangled ancilla `(2b+1)^{-1/2} Σ_q |q>_A |-q>_B`.
pub fn make_ancilla(b: Spectrum) -> PureState {
    let ladder = b.ladder();
    let mut state = PureState::zeros(vec![ladder, ladder]);
    let weight = Complex64::new((b.dimension() as f64).sqrt().recip(), 0.0);
    for q in b.values() {
        let index = state.index_of_values(&[q, -q]).expect("symmetric ladder");
        state.amps[index] = weight;
    }
    state
}

/// The flat input `(2a+1)^{-1/2} Σ_q |q>`.
pub fn flat_state(a: Spectrum) -> PureState {
    let weight = Complex64::new((a.dimension() as f64).sqrt().recip(), 0.0);
    PureState {
        modes: vec![a.ladder()],
        amps: vec![weight; a.dimension()],
    }
}

/// A state drawn uniformly from the complex unit sphere.
pub fn random_state<R: Rng + ?Sized>(a: Spectrum, rng: &mut R) -> PureState {
    loop {
        let amps: Vec<Complex64> = (0..a.dimension())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(state) = make_input_state(a, &amps) {
            return state;
        }
    }
}

/// On-disk form: `{ "modes": [q2x, …], "amps": [[re, im], …] }`.
///
/// Symmetric modes are written as their doubled half-width. Asymmetric ladders
/// (engine-internal measurement hosts) use `{ "low2x": …, "dim": … }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub modes: Vec<ModeRepr>,
    pub amps: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeRepr {
    HalfWidth(i64),
    Ladder { low2x: i64, dim: usize },
}

impl From<&PureState> for StateFile {
    fn from(state: &PureState) -> StateFile {
        let modes = state
            .modes
            .iter()
            .map(|m| match m.symmetric_half_width() {
                Some(hw) => ModeRepr::HalfWidth(hw.doubled()),
                None => ModeRepr::Ladder {
                    low2x: m.low().doubled(),
                    dim: m.dimension(),
                },
            })
            .collect();
        let amps = state.amps.iter().map(|z| [z.re, z.im]).collect();
        StateFile { modes, amps }
    }
}

impl TryFrom<StateFile> for PureState {
    type Error = Error;
    fn try_from(file: StateFile) -> Result<PureState> {
        let modes = file
            .modes
            .iter()
            .map(|m| match *m {
                ModeRepr::HalfWidth(q2x) => Spectrum::from_doubled(q2x).map(|s| s.ladder()),
                ModeRepr::Ladder { low2x, dim } => Ladder::new(HalfInt::from_doubled(low2x), dim),
            })
            .collect::<Result<Vec<_>>>()?;
        let amps = file.amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        PureState::new(modes, amps)
    }
}

impl PureState {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<PureState> {
        let file: StateFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PureState> {
        PureState::from_json(&fs::read_to_string(path)?)
    }
}
