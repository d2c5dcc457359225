//! Holevo capacity of the particle/antiparticle signalling channel, with and
//! without a gray-body beam splitter in front of the outgoing mode.
//!
//! Codeword `'0'` sends an antiparticle (stimulating the `s̄` mode), codeword
//! `'1'` sends a particle. Distributions are over total occupation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::Branch;
use crate::entanglement::check_theta;
use crate::error::{Error, Result};
use crate::fock::{ln_negative_binomial, truncation_length, Origin, ProbDist, TruncationPolicy};
use crate::specfun::{entropy_bits, integrate, ln_binomial, neg_xlog2x, shannon_entropy_bits};

/// Largest `n + n′` accepted by [`bs_coefficients`].
pub const BS_CAP: usize = 1000;

/// Terms summed directly before the Euler–Maclaurin tail takes over.
const DIRECT_TERMS: usize = 4096;

fn check_z(z: f64, z_max: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::OutOfRange {
            name: "z",
            value: z,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if z > z_max {
        return Err(Error::ZTooClose { z, z_max });
    }
    Ok(())
}

fn dist(weights: Vec<f64>, origin: Origin) -> Result<(ProbDist, f64)> {
    let kept: f64 = weights.iter().sum();
    Ok((
        ProbDist::renormalized(weights, origin)?,
        (1.0 - kept).max(0.0),
    ))
}

/// `pₙ = (1−z)^{m+1} zⁿ C(m+n, n)`: `n` emitted quanta on top of `m` present.
pub fn stimulated_dist(z: f64, m_init: u64, policy: &TruncationPolicy) -> Result<ProbDist> {
    let len = truncation_length(z, m_init, policy)?;
    let w = (0..len as u64)
        .map(|n| ln_negative_binomial(n, z, m_init).exp())
        .collect();
    Ok(dist(w, Origin::Thermal)?.0)
}

/// `(1−z)zⁿ` over `n = 0..len`.
fn spontaneous_weights(z: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    let mut zn = 1.0;
    for _ in 0..len {
        w.push((1.0 - z) * zn);
        zn *= z;
    }
    w
}

/// `n(1−z)²zⁿ⁻¹` over total occupation `n = 0..len`, one quantum sent in.
fn stimulated_total_weights(z: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    let mut zn = 1.0; // z^{n-1}
    for n in 0..len {
        if n == 0 {
            w.push(0.0);
        } else {
            w.push(n as f64 * (1.0 - z).powi(2) * zn);
            zn *= z;
        }
    }
    w
}

// ---------------------------------------------------------------------------
// log series

/// `(Σ zⁿ(n+1)(n+2) ln(n+1), Σ zⁿ(n+1) ln(n+1))` in nats. Direct to
/// [`DIRECT_TERMS`], then an Euler–Maclaurin tail through the third derivative.
fn log_series(z: f64) -> (f64, f64) {
    if z == 0.0 {
        return (0.0, 0.0);
    }
    let (mut a, mut b) = (0.0, 0.0);
    let mut zn = 1.0;
    for n in 0..DIRECT_TERMS {
        let y = n as f64 + 1.0;
        let l = y.ln();
        a += zn * y * (y + 1.0) * l;
        b += zn * y * l;
        zn *= z;
    }
    let lam = -z.ln();
    if lam * DIRECT_TERMS as f64 > 60.0 {
        return (a, b);
    }
    let k = DIRECT_TERMS as f64;
    let y = k + 1.0;
    let ly = y.ln();
    let wa = [
        (y * y + y) * ly,
        (2.0 * y + 1.0) * ly + y + 1.0,
        2.0 * ly + 3.0 + 1.0 / y,
        2.0 / y - 1.0 / (y * y),
    ];
    let wb = [y * ly, ly + 1.0, 1.0 / y, -1.0 / (y * y)];
    let fa = |y: f64| (y * y + y) * y.ln();
    let fb = |y: f64| y * y.ln();
    (a + em_tail(&wa, fa, k, lam), b + em_tail(&wb, fb, k, lam))
}

/// `Σ_{n≥K} e^{−λn} w(n)` from `w` and its first three derivatives at `K`.
fn em_tail(wd: &[f64; 4], w: impl Fn(f64) -> f64, k: f64, lam: f64) -> f64 {
    let e = (-lam * k).exp();
    let f0 = e * wd[0];
    let f1 = e * (wd[1] - lam * wd[0]);
    let f3 = e * (wd[3] - 3.0 * lam * wd[2] + 3.0 * lam * lam * wd[1] - lam.powi(3) * wd[0]);
    // x = K + t/λ
    let g = |t: f64| (-t).exp() * w(k + 1.0 + t / lam);
    let scale = w(k + 1.0 + 1.0 / lam);
    let tol = 1e-15 * scale;
    let integral = (integrate(g, 0.0, 1.0, tol)
        + integrate(g, 1.0, 10.0, tol)
        + integrate(g, 10.0, 80.0, tol))
        * e
        / lam;
    integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0
}

/// `(S(ρ_{k|0}), S(ρ_{k|1}))` in bits: spontaneous and singly stimulated.
pub fn component_entropies(z: f64) -> Result<(f64, f64)> {
    check_z(z, TruncationPolicy::default().z_max)?;
    if z == 0.0 {
        return Ok((0.0, 0.0));
    }
    let s0 = -(-z).ln_1p() / std::f64::consts::LN_2 - z / (1.0 - z) * z.log2();
    let (_, b) = log_series(z);
    let s1 = 2.0 * s0 - (1.0 - z).powi(2) * b / std::f64::consts::LN_2;
    Ok((s0, s1))
}

/// `1 − ½(1−z)³Σzⁿ(n+1)(n+2)log₂(n+1) + (1−z)²Σzⁿ(n+1)log₂(n+1)` at the
/// given `z`, no branch substitution. `z = 1` returns the limit.
pub fn chi_series(z: f64) -> f64 {
    if z >= 1.0 {
        return holevo_chi_terminal();
    }
    if z == 0.0 {
        // only n = 0 survives and log₂ 1 = 0
        return 1.0;
    }
    let (a, b) = log_series(z);
    let u = 1.0 - z;
    1.0 + (-0.5 * u.powi(3) * a + u * u * b) / std::f64::consts::LN_2
}

/// `χ(z → 1) = 1 − 1/(2 ln 2)`.
pub fn holevo_chi_terminal() -> f64 {
    1.0 - 0.5 / std::f64::consts::LN_2
}

/// Holevo capacity in bits at `p = ½`; the long branch evaluates the same
/// series at `z′ = f/(1+f)`.
pub fn holevo_chi(z: f64, branch: Branch) -> Result<f64> {
    let policy = TruncationPolicy::default();
    check_z(z, policy.z_max)?;
    Ok(chi_series(branch.effective_z(z)?))
}

/// Two-mode ensemble: `'0'` gives `(spontaneous, stimulated)` on `(s, s̄)`,
/// `'1'` the swap.
pub fn particle_ensemble(z: f64, policy: &TruncationPolicy) -> Result<ChannelEnsemble> {
    let len = truncation_length(z, 1, policy)? + 1;
    let (g, dg) = dist(spontaneous_weights(z, len), Origin::Thermal)?;
    let (s, ds) = dist(stimulated_total_weights(z, len), Origin::Thermal)?;
    Ok(ChannelEnsemble {
        p_mix: 0.5,
        dist_s_0: g.clone(),
        dist_sbar_0: s.clone(),
        dist_s_1: s,
        dist_sbar_1: g,
        discarded_mass: 2.0 * (dg + ds),
    })
}

/// Same capacity assembled as joint-mixture entropy minus the mean component
/// entropy on the truncated `(k, m)` grid.
pub fn holevo_chi_first_principles(
    z: f64,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<f64> {
    check_z(z, policy.z_max)?;
    Ok(particle_ensemble(branch.effective_z(z)?, policy)?.chi())
}

// ---------------------------------------------------------------------------
// ensembles

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEnsemble {
    /// Probability of sending `'0'`.
    pub p_mix: f64,
    pub dist_s_0: ProbDist,
    pub dist_sbar_0: ProbDist,
    pub dist_s_1: ProbDist,
    pub dist_sbar_1: ProbDist,
    /// Mass dropped by truncation, summed over the four distributions.
    pub discarded_mass: f64,
}

impl ChannelEnsemble {
    pub fn with_prior(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                name: "p_mix",
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
        self.p_mix = p;
        Ok(self)
    }

    pub fn chi(&self) -> f64 {
        self.chi_at(self.p_mix)
    }

    /// `H(p P₀ + (1−p) P₁) − p H(P₀) − (1−p) H(P₁)`, `P_c = s_c ⊗ s̄_c`.
    pub fn chi_at(&self, p: f64) -> f64 {
        let ls = self.dist_s_0.len().max(self.dist_s_1.len());
        let lb = self.dist_sbar_0.len().max(self.dist_sbar_1.len());
        let (s0, s1) = (self.dist_s_0.padded(ls), self.dist_s_1.padded(ls));
        let (b0, b1) = (self.dist_sbar_0.padded(lb), self.dist_sbar_1.padded(lb));
        let (b0, b1) = (b0.weights(), b1.weights());
        let rows: Vec<f64> = s0
            .weights()
            .par_iter()
            .zip(s1.weights().par_iter())
            .map(|(&x0, &x1)| {
                let (a0, a1) = (p * x0, (1.0 - p) * x1);
                b0.iter()
                    .zip(b1)
                    .map(|(y0, y1)| neg_xlog2x(a0 * y0 + a1 * y1))
                    .sum()
            })
            .collect();
        let joint: f64 = rows.iter().sum();
        let h0 = shannon_entropy_bits(&s0) + entropy_bits(b0);
        let h1 = shannon_entropy_bits(&s1) + entropy_bits(b1);
        joint - p * h0 - (1.0 - p) * h1
    }

    /// `χ` at `p = i/steps`, `i = 0..=steps`.
    pub fn prior_scan(&self, steps: usize) -> Vec<(f64, f64)> {
        (0..=steps)
            .map(|i| {
                let p = i as f64 / steps as f64;
                (p, self.chi_at(p))
            })
            .collect()
    }

    /// Best grid point of [`prior_scan`](Self::prior_scan).
    pub fn best_prior(&self, steps: usize) -> (f64, f64) {
        self.prior_scan(steps)
            .into_iter()
            .fold((0.5, f64::NEG_INFINITY), |best, x| {
                if x.1 > best.1 {
                    x
                } else {
                    best
                }
            })
    }
}

// ---------------------------------------------------------------------------
// beam splitter

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayBodyParams {
    pub theta: f64,
    /// Squeezing parameter, `z = tanh² r`.
    pub r: f64,
}

impl GrayBodyParams {
    pub fn new(theta: f64, r: f64) -> Result<Self> {
        check_theta(theta)?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { theta, r })
    }

    pub fn transmittance(&self) -> f64 {
        self.theta.cos().powi(2)
    }

    /// `α² = cos²θ cosh² r`.
    pub fn absorptivity(&self) -> f64 {
        self.transmittance() * self.r.cosh().powi(2)
    }

    pub fn beta(&self) -> f64 {
        self.r.sinh()
    }

    pub fn gamma(&self) -> f64 {
        self.r.cosh() * self.theta.sin()
    }

    /// `α² − β² + γ² − 1`.
    pub fn identity_residual(&self) -> f64 {
        let (c, s) = (self.r.cosh(), self.r.sinh());
        // cosh² − sinh² = 1 absorbed before forming the difference
        let a2 = self.absorptivity();
        let g2 = self.gamma().powi(2);
        (a2 + g2 - c * c) + (c - s) * (c + s) - 1.0
    }
}

/// `f_p(n, n′)` for `p = 0..=n+n′`: the amplitude of `|p, n+n′−p⟩` in the
/// image of `|n, n′⟩` under `a → cos θ a − i sin θ c`.
pub fn bs_coefficients(n: usize, n_prime: usize, theta: f64) -> Result<Vec<Complex64>> {
    let total = n + n_prime;
    if total > BS_CAP {
        return Err(Error::DimensionGuard {
            dim: total,
            max: BS_CAP,
        });
    }
    let (s, c) = theta.sin_cos();
    let phase = |e: usize| match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    let (nf, nt) = (n as f64, total as f64);
    let mut out = vec![Complex64::new(0.0, 0.0); total + 1];
    for q in 0..=n {
        for q2 in 0..=n_prime {
            let p = q + q2;
            let ln_mag = ln_binomial(nf, q as f64)
                + ln_binomial(n_prime as f64, q2 as f64)
                + 0.5 * (ln_binomial(nt, nf) - ln_binomial(nt, p as f64));
            let ec = n_prime + q - q2;
            let es = n - q + q2;
            let mag = ln_mag.exp() * c.powi(ec as i32) * s.powi(es as i32);
            out[p] += phase(es) * mag;
        }
    }
    Ok(out)
}

/// Send-`'0'`/send-`'1'` ensemble with the outgoing mode scattered off a
/// vacuum infaller at angle `θ`. With `w = 1 − z sin²θ`, `q = z cos²θ/w`:
/// `p⁽ˢ⁾_k(1) = (1−z)qᵏ/w`, `p⁽ˢ⁾_k(0) = (1−z)/w² [cos²θ qᵏ + k(1−z)² sin²θ qᵏ⁻¹/w]`,
/// `p⁽ˢ̄⁾_m(1) = m(1−z)²zᵐ⁻¹`, `p⁽ˢ̄⁾_m(0) = (1−z)zᵐ`.
pub fn graybody_ensemble(z: f64, theta: f64, policy: &TruncationPolicy) -> Result<ChannelEnsemble> {
    check_theta(theta)?;
    check_z(z, policy.z_max)?;
    let (st, ct) = theta.sin_cos();
    let (s2, c2) = (st * st, ct * ct);
    let u = 1.0 - z;
    let w = 1.0 - z * s2;
    let q = z * c2 / w;
    let ls = truncation_length(q, 1, policy)? + 1;
    let lb = truncation_length(z, 1, policy)? + 1;
    let mut s1 = Vec::with_capacity(ls);
    let mut s0 = Vec::with_capacity(ls);
    let mut qk = 1.0; // q^k
    let mut qk1 = 0.0; // q^{k-1}
    for k in 0..ls {
        s1.push(u / w * qk);
        s0.push(u / (w * w) * (c2 * qk + k as f64 * u * u * s2 / w * qk1));
        qk1 = qk;
        qk *= q;
    }
    let (dist_s_0, d0) = dist(s0, Origin::Thermal)?;
    let (dist_s_1, d1) = dist(s1, Origin::Thermal)?;
    let (dist_sbar_0, d2) = dist(spontaneous_weights(z, lb), Origin::Thermal)?;
    let (dist_sbar_1, d3) = dist(stimulated_total_weights(z, lb), Origin::Thermal)?;
    Ok(ChannelEnsemble {
        p_mix: 0.5,
        dist_s_0,
        dist_sbar_0,
        dist_s_1,
        dist_sbar_1,
        discarded_mass: d0 + d1 + d2 + d3,
    })
}

pub fn holevo_chi_graybody(z: f64, theta: f64, branch: Branch) -> Result<f64> {
    holevo_chi_graybody_with(z, theta, branch, &TruncationPolicy::default())
}

/// `χ(z, θ)` at `p = ½`; the long branch substitutes `z′` everywhere.
pub fn holevo_chi_graybody_with(
    z: f64,
    theta: f64,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<f64> {
    check_z(z, policy.z_max)?;
    Ok(graybody_ensemble(branch.effective_z(z)?, theta, policy)?.chi())
}

/// `χ(z, θ)` table, rows over `thetas`, columns over `zs`.
pub fn chi_theta_grid(
    zs: &[f64],
    thetas: &[f64],
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<Vec<Vec<f64>>> {
    thetas
        .iter()
        .map(|&th| {
            zs.par_iter()
                .map(|&z| holevo_chi_graybody_with(z, th, branch, policy))
                .collect()
        })
        .collect()
}
