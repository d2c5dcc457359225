//! Logical-basis containers, distributions and truncation.
//!
//! The logical index `n` counts emitted pairs: the single-pair basis state
//! `|n⟩_L` has pump, signal and idler occupations `(n_p0 − n, n_s0 + n, n)`.
//! Physical occupations are derived on demand, never stored.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::ln_choose_plus;

/// Tolerance used for normalization checks on distributions and states.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSetup {
    pub n_p0: u64,
    pub n_s0: u64,
    /// Anti-signal seed; `Some` only for two-pair runs.
    pub n_sbar0: Option<u64>,
    /// Coupling constant, inverse time units.
    pub r: f64,
}

impl ModeSetup {
    pub fn new(n_p0: u64, n_s0: u64) -> Result<Self> {
        Self::build(n_p0, n_s0, None, 1.0)
    }

    pub fn two_pair(n_p0: u64, n_s0: u64, n_sbar0: u64) -> Result<Self> {
        Self::build(n_p0, n_s0, Some(n_sbar0), 1.0)
    }

    pub fn with_coupling(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidSetup(format!(
                "coupling r = {r} must be positive"
            )));
        }
        self.r = r;
        Ok(self)
    }

    fn build(n_p0: u64, n_s0: u64, n_sbar0: Option<u64>, r: f64) -> Result<Self> {
        if n_p0 < 1 {
            return Err(Error::InvalidSetup("n_p0 must be at least 1".into()));
        }
        Ok(Self {
            n_p0,
            n_s0,
            n_sbar0,
            r,
        })
    }

    /// `κ = (1 + n_s0)/2`.
    pub fn kappa(&self) -> f64 {
        0.5 * (1.0 + self.n_s0 as f64)
    }

    /// `κ̄ = (1 + n_sbar0)/2`, zero-seed default for single-pair setups.
    pub fn kappa_bar(&self) -> f64 {
        0.5 * (1.0 + self.n_sbar0.unwrap_or(0) as f64)
    }

    pub fn is_two_pair(&self) -> bool {
        self.n_sbar0.is_some()
    }

    /// `n_s0 + 1`, or `n_s0 + n_sbar0 + 2` for two pairs.
    pub fn seed_occupation(&self) -> f64 {
        match self.n_sbar0 {
            None => self.n_s0 as f64 + 1.0,
            Some(b) => (self.n_s0 + b) as f64 + 2.0,
        }
    }

    /// `N = n_p0 + seed_occupation()`.
    pub fn total_scale(&self) -> f64 {
        self.n_p0 as f64 + self.seed_occupation()
    }
}

/// Relation between the reported time variable `τ` and `t′ = r t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeConvention {
    /// `τ = r t`.
    #[default]
    Unscaled,
    /// `τ = √(n_p0 + n_s0 + 1) · r t`.
    SinglePairScaled,
    /// `τ = √(n_p0 + n_s0 + n_sbar0 + 2) · r t`.
    TwoPairScaled,
}

impl TimeConvention {
    /// Factor `s` with `τ = s · t′`.
    pub fn scale(&self, setup: &ModeSetup) -> f64 {
        let np = setup.n_p0 as f64;
        match self {
            TimeConvention::Unscaled => 1.0,
            TimeConvention::SinglePairScaled => (np + setup.n_s0 as f64 + 1.0).sqrt(),
            TimeConvention::TwoPairScaled => {
                (np + (setup.n_s0 + setup.n_sbar0.unwrap_or(0)) as f64 + 2.0).sqrt()
            }
        }
    }

    /// Dimensionless `t′ = r t` for a given `τ`.
    pub fn t_prime(&self, tau: f64, setup: &ModeSetup) -> f64 {
        tau / self.scale(setup)
    }
}

/// Where a distribution or state came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Numeric,
    ShortTime,
    LongTime,
    Thermal,
}

/// Storage order for two-pair grids: rows `n = 0..=n_max`, and within each
/// row `m = 0..=min(cap, n_p0 − n)`. Row-major, n then m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangularIndex {
    pub n_p0: usize,
    pub cap: usize,
    offsets: Vec<usize>,
}

impl TriangularIndex {
    pub fn new(n_p0: usize, cap: usize) -> Self {
        let rows = cap.min(n_p0) + 1;
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut acc = 0;
        offsets.push(0);
        for n in 0..rows {
            acc += cap.min(n_p0 - n) + 1;
            offsets.push(acc);
        }
        Self { n_p0, cap, offsets }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest stored `m` in row `n`.
    pub fn row_max(&self, n: usize) -> usize {
        self.offsets[n + 1] - self.offsets[n] - 1
    }

    pub fn index(&self, n: usize, m: usize) -> Option<usize> {
        if n < self.rows() && m <= self.row_max(n) {
            Some(self.offsets[n] + m)
        } else {
            None
        }
    }

    /// Iterate `(n, m, flat)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.rows())
            .flat_map(move |n| (0..=self.row_max(n)).map(move |m| (n, m, self.offsets[n] + m)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// `c_n` for `n = 0..len`, `len ≤ n_p0 + 1`.
    Single,
    /// `c_{n,m}` on the triangle `n + m ≤ n_p0`, possibly capped per index.
    Pair(TriangularIndex),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub setup: ModeSetup,
    pub tau: f64,
    pub convention: TimeConvention,
    pub layout: Layout,
    pub values: Vec<Complex64>,
    pub origin: Origin,
}

impl AmplitudeState {
    /// Initial condition `c_n = δ_{n,0}` (or `δ_{n,0}δ_{m,0}`).
    pub fn vacuum_pairs(setup: ModeSetup, layout: Layout, len: usize) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        values[0] = Complex64::new(1.0, 0.0);
        Self {
            setup,
            tau: 0.0,
            convention: TimeConvention::Unscaled,
            layout,
            values,
            origin: Origin::Numeric,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_drift(&self) -> f64 {
        (self.norm_sqr() - 1.0).abs()
    }

    /// Checks `Σ|c|² = 1` within [`NORM_TOL`] and the index bounds.
    pub fn validate(&self) -> Result<()> {
        let sum = self.norm_sqr();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let bound = self.setup.n_p0 as usize + 1;
        match &self.layout {
            Layout::Single if self.values.len() > bound => Err(Error::DimensionGuard {
                dim: self.values.len(),
                max: bound,
            }),
            Layout::Pair(ix)
                if ix.n_p0 != self.setup.n_p0 as usize || ix.len() != self.values.len() =>
            {
                Err(Error::InvalidSetup(
                    "triangular layout does not match state".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Magnitudes `|c|` in storage order.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbDist {
    weights: Vec<f64>,
    pub origin: Origin,
}

impl ProbDist {
    /// Validates non-negativity and normalization within [`NORM_TOL`].
    pub fn new(weights: Vec<f64>, origin: Origin) -> Result<Self> {
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::NegativeWeight { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { weights, origin })
    }

    /// Rescales to unit mass after a sign check; for truncated series and
    /// reporting of integrator output whose drift is monitored separately.
    pub fn renormalized(mut weights: Vec<f64>, origin: Origin) -> Result<Self> {
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::NegativeWeight { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::NotNormalized { sum });
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Ok(Self { weights, origin })
    }

    pub fn delta(at: usize, origin: Origin) -> Self {
        let mut weights = vec![0.0; at + 1];
        weights[at] = 1.0;
        Self { weights, origin }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Zero-pads to `len` entries.
    pub fn padded(&self, len: usize) -> Self {
        let mut weights = self.weights.clone();
        if weights.len() < len {
            weights.resize(len, 0.0);
        }
        Self {
            weights,
            origin: self.origin,
        }
    }

    /// Index reflection `n ↦ top − n`; the pump view of a signal distribution.
    pub fn reflected(&self, top: usize) -> Self {
        let mut weights = vec![0.0; top + 1];
        for (n, &w) in self.weights.iter().enumerate().take(top + 1) {
            weights[top - n] = w;
        }
        Self {
            weights,
            origin: self.origin,
        }
    }

    pub fn mean_and_variance(&self) -> (f64, f64) {
        mean_and_variance(self)
    }
}

/// `(Σ n pₙ, Σ (n − mean)² pₙ)`.
pub fn mean_and_variance(p: &ProbDist) -> (f64, f64) {
    let mean: f64 = p
        .weights
        .iter()
        .enumerate()
        .map(|(n, w)| n as f64 * w)
        .sum();
    let var: f64 = p
        .weights
        .iter()
        .enumerate()
        .map(|(n, w)| (n as f64 - mean).powi(2) * w)
        .sum();
    (mean, var.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Probability-mass bound on the discarded tail.
    pub tail_epsilon: f64,
    pub hard_cap: usize,
    pub z_max: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tail_epsilon: 1e-12,
            hard_cap: 1_000_000,
            z_max: 1.0 - 1e-6,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_epsilon > 0.0 && self.tail_epsilon < 1.0) {
            return Err(Error::Config {
                field: "tail_epsilon",
                reason: format!("{} not in (0,1)", self.tail_epsilon),
            });
        }
        if self.hard_cap < 1 {
            return Err(Error::Config {
                field: "hard_cap",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::OutOfRange {
                name: "z",
                value: z,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if z >= self.z_max {
            return Err(Error::ZTooClose {
                z,
                z_max: self.z_max,
            });
        }
        Ok(())
    }
}

/// Which limit ended a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    TailBound,
    HardCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Number of retained terms, indices `0..len`.
    pub len: usize,
    pub binding: Binding,
}

/// `ln p_<(n, z)` for the negative-binomial law with seed `n_s0`.
pub fn ln_negative_binomial(n: u64, z: f64, n_s0: u64) -> f64 {
    if z == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    (n_s0 as f64 + 1.0) * (-z).ln_1p() + n as f64 * z.ln() + ln_choose_plus(n_s0, n)
}

fn truncate_with(z: f64, n_s0: u64, policy: &TruncationPolicy, power: f64) -> Result<Truncation> {
    policy.validate()?;
    policy.check_z(z)?;
    if z == 0.0 {
        return Ok(Truncation {
            len: 1,
            binding: Binding::TailBound,
        });
    }
    let s = n_s0 as f64;
    let ln_eps = policy.tail_epsilon.ln();
    let mut ln_p = power * (s + 1.0) * (-z).ln_1p();
    for len in 0..policy.hard_cap {
        // ratio of consecutive terms beyond index `len`, decreasing in `len`
        let ratio = (z * (s + len as f64 + 1.0) / (len as f64 + 1.0)).powf(power);
        if ratio < 1.0 && ln_p - (-ratio).ln_1p() < ln_eps {
            return Ok(Truncation {
                len: len.max(1),
                binding: Binding::TailBound,
            });
        }
        ln_p += ratio.ln();
    }
    Ok(Truncation {
        len: policy.hard_cap,
        binding: Binding::HardCap,
    })
}

/// Smallest `N` whose negative-binomial tail mass `Σ_{n≥N} p_<(n)` is below
/// `tail_epsilon`, by the ratio bound `p_N / (1 − r_N)`; capped at `hard_cap`.
pub fn truncation_length(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<usize> {
    Ok(truncation(z, n_s0, policy)?.len)
}

pub fn truncation(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<Truncation> {
    truncate_with(z, n_s0, policy, 1.0)
}

/// Same bound applied to `Σ √pₙ`, for sums over amplitude magnitudes.
pub fn amplitude_truncation(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<Truncation> {
    truncate_with(z, n_s0, policy, 0.5)
}

/// `p_n = |c_n|²` over the logical index. Single-pair states; for two-pair
/// states this is the `s`-mode marginal. Renormalized for reporting.
pub fn reduced_signal_dist(state: &AmplitudeState) -> Result<ProbDist> {
    let w = match &state.layout {
        Layout::Single => state.values.iter().map(|c| c.norm_sqr()).collect(),
        Layout::Pair(ix) => {
            let mut w = vec![0.0; ix.rows()];
            for (n, _, k) in ix.cells() {
                w[n] += state.values[k].norm_sqr();
            }
            w
        }
    };
    ProbDist::renormalized(w, state.origin)
}

/// The `s̄`-mode marginal of a two-pair state.
pub fn reduced_antisignal_dist(state: &AmplitudeState) -> Result<ProbDist> {
    match &state.layout {
        Layout::Single => Err(Error::InvalidSetup(
            "single-pair state has no anti-signal mode".into(),
        )),
        Layout::Pair(ix) => {
            let mut w = vec![0.0; ix.cap.min(ix.n_p0) + 1];
            for (_, m, k) in ix.cells() {
                w[m] += state.values[k].norm_sqr();
            }
            ProbDist::renormalized(w, state.origin)
        }
    }
}

/// Weighted sum of per-sector signal distributions. Sectors are orthogonal
/// so cross terms vanish; summation runs in the given order.
pub fn ensemble_signal_dist(sectors: &[(f64, &AmplitudeState)]) -> Result<ProbDist> {
    let len = sectors
        .iter()
        .map(|(_, s)| s.values.len())
        .max()
        .unwrap_or(1);
    let mut w = vec![0.0; len];
    for (weight, state) in sectors {
        for (n, c) in state.values.iter().enumerate() {
            w[n] += weight * c.norm_sqr();
        }
    }
    ProbDist::renormalized(w, Origin::Numeric)
}
