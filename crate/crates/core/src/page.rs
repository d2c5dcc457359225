//! Page subsystem entropy and the dynamical information measure.
//!
//! Combinatorial quantities are in nats; the dynamical information is in bits.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::analytic::{longtime_probabilities, shorttime_probabilities, z_star_limit};
use crate::error::{Error, Result};
use crate::fock::{truncation_length, Origin, ProbDist, TruncationPolicy};
use crate::specfun::shannon_entropy_bits;

/// Above this `mn` the harmonic difference uses digamma.
const DIRECT_HARMONIC_MAX: u64 = 1_000_000;

/// The factor pair behind the 105-divisor scan.
pub const PAGE_TOTAL_DIM: u64 = 291_600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagePair {
    pub m: u64,
    pub n: u64,
}

impl PagePair {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSetup(format!(
                "page dimensions must be positive, got ({m}, {n})"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn total(&self) -> Result<u64> {
        self.m.checked_mul(self.n).ok_or(Error::DimensionGuard {
            dim: usize::MAX,
            max: usize::MAX,
        })
    }

    pub fn min_dim(&self) -> u64 {
        self.m.min(self.n)
    }
}

/// `Σ_{k=a+1}^{b} 1/k`.
fn harmonic_diff(a: u64, b: u64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if b <= DIRECT_HARMONIC_MAX {
        // smallest terms first
        return (a + 1..=b).rev().map(|k| 1.0 / k as f64).sum();
    }
    digamma(b as f64 + 1.0) - digamma(a as f64 + 1.0)
}

/// `(S_{m,n}, I_{m,n})` in nats: `S = Σ_{k=n+1}^{mn} 1/k − (m−1)/(2n)` for
/// `m ≤ n`, the swapped form otherwise, and `I = ln min(m, n) − S`.
pub fn page_entropy_information(pair: PagePair) -> Result<(f64, f64)> {
    let total = pair.total()?;
    let (m, n) = if pair.m <= pair.n {
        (pair.m, pair.n)
    } else {
        (pair.n, pair.m)
    };
    let s = harmonic_diff(n, total) - (m as f64 - 1.0) / (2.0 * n as f64);
    Ok((s, (m as f64).ln() - s))
}

/// Ascending divisors of `n`.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            lo.push(d);
            if d * d != n {
                hi.push(n / d);
            }
        }
        d += 1;
    }
    lo.extend(hi.into_iter().rev());
    lo
}

/// `(ln m, S, I)` for each divisor `m` of `total`, paired with `total/m`.
pub fn page_curve(total: u64) -> Result<Vec<(f64, f64, f64)>> {
    divisors(total)
        .into_iter()
        .map(|m| {
            let (s, i) = page_entropy_information(PagePair::new(m, total / m)?)?;
            Ok(((m as f64).ln(), s, i))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// thermal reference

/// Geometric distribution with `z = n̄/(n̄+1)`.
pub fn thermal_reference(nbar: f64, policy: &TruncationPolicy) -> Result<ProbDist> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::OutOfRange {
            name: "nbar",
            value: nbar,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if nbar == 0.0 {
        return Ok(ProbDist::delta(0, Origin::Thermal));
    }
    let z = nbar / (nbar + 1.0);
    let len = truncation_length(z, 0, policy)?;
    let mut w = Vec::with_capacity(len);
    let mut zn = 1.0 - z;
    for _ in 0..len {
        w.push(zn);
        zn *= z;
    }
    ProbDist::renormalized(w, Origin::Thermal)
}

/// `(n̄+1) log₂(n̄+1) − n̄ log₂ n̄`, the entropy of [`thermal_reference`].
pub fn thermal_entropy_bits(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * (nbar + 1.0).log2() - nbar * nbar.log2()
}

/// `I(τ) = S_thermal(n̄_s(τ)) − S(ρ_s(τ))` in bits, one value per distribution.
pub fn page_information_dynamic(series: &[ProbDist]) -> Vec<f64> {
    series
        .iter()
        .map(|p| thermal_entropy_bits(p.mean_and_variance().0) - shannon_entropy_bits(p))
        .collect()
}

/// Analytic-branch information: `S(ρ_<) − S(ρ_>)` past the crossover, zero before.
pub fn page_information_analytic(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<f64> {
    let short = shorttime_probabilities(z, n_s0, policy)?;
    if z <= z_star_limit() {
        return Ok(0.0);
    }
    let long = longtime_probabilities(z, n_s0, policy)?;
    Ok(shannon_entropy_bits(&short) - shannon_entropy_bits(&long))
}

/// `(2n̄ + 1, 1 + Δn)`: the thermal-reference and variance-based dimensions.
pub fn effective_dimensions(dist: &ProbDist) -> (f64, f64) {
    let (mean, var) = dist.mean_and_variance();
    (2.0 * mean + 1.0, 1.0 + var.sqrt())
}
