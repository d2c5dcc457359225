//! Closed-form short- and long-time solutions.
//!
//! Time is the scaled `τ = √N · r t` with `N = n_p0 + seed_occupation`, and
//! the short-time squeezing parameter is `z = tanh²τ`. The long-time laws
//! reuse the short-time distributions at `z′ = f(z)/(1 + f(z))`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::minus_i_pow;
use crate::error::{Error, Result};
use crate::fock::{
    amplitude_truncation, ln_negative_binomial, truncation, AmplitudeState, Layout, ModeSetup,
    Origin, ProbDist, TimeConvention, TruncationPolicy,
};
use crate::specfun::{bhattacharyya_fidelity, elliptic_k, jacobi, EllipticModulus};

/// `1/(e^{π/2}/2 − 1)²`, the crossover in the large-pump limit.
pub fn z_star_limit() -> f64 {
    (0.5 * FRAC_PI_2.exp() - 1.0).powi(-2)
}

/// Above this `k_e` the quarter period uses `a(k_e) = π/2`.
pub const KE_ASYMPTOTIC: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeTime {
    pub z: f64,
    pub tau: f64,
}

impl SqueezeTime {
    pub fn from_z(z: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::OutOfRange {
                name: "z",
                value: z,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self {
            z,
            tau: z.sqrt().atanh(),
        })
    }

    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::OutOfRange {
                name: "tau",
                value: tau,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self {
            z: tau.tanh().powi(2),
            tau,
        })
    }
}

/// Which closed form a z-parameterized quantity uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Short,
    Long,
    /// Short up to the large-pump crossover [`z_star_limit`], long after.
    #[default]
    Combined,
}

impl Branch {
    /// Effective squeezing parameter fed into the short-time law.
    pub fn effective_z(&self, z: f64) -> Result<f64> {
        match self {
            Branch::Short => {
                SqueezeTime::from_z(z)?;
                Ok(z)
            }
            Branch::Long => long_z(z),
            Branch::Combined if z <= z_star_limit() => Ok(z),
            Branch::Combined => long_z(z),
        }
    }

    pub fn origin(&self, z: f64) -> Origin {
        match self {
            Branch::Short => Origin::ShortTime,
            Branch::Long => Origin::LongTime,
            Branch::Combined if z <= z_star_limit() => Origin::ShortTime,
            Branch::Combined => Origin::LongTime,
        }
    }
}

// ---------------------------------------------------------------------------
// elliptic schedule

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticSchedule {
    pub k_e: EllipticModulus,
    /// Quarter period used by the long-time laws, in `τ` units.
    pub t_q: f64,
    /// `K(k_e)`: the exact quarter period of the elliptic flow, in `τ` units.
    pub exact_quarter_period: f64,
    /// `√N`, with `τ = tau_scale · r t`.
    pub tau_scale: f64,
    /// `ln(1 − k_e) = ln(seed/N)`, kept exact for large pumps.
    pub ln_one_minus_ke: f64,
}

impl EllipticSchedule {
    /// Works for single- and two-pair setups; the seed occupation decides.
    pub fn new(setup: &ModeSetup) -> Self {
        let k_e = EllipticModulus::from_setup(setup);
        let n = setup.total_scale();
        let ln1m = (setup.seed_occupation() / n).ln();
        let exact = elliptic_k(k_e.m());
        let t_q = if k_e.m() > KE_ASYMPTOTIC {
            FRAC_PI_2 - 0.5 * ln1m
        } else {
            exact
        };
        Self {
            k_e,
            t_q,
            exact_quarter_period: exact,
            tau_scale: n.sqrt(),
            ln_one_minus_ke: ln1m,
        }
    }

    /// `a(k_e) = T_q + ½ ln(1 − k_e)`.
    pub fn a(&self) -> f64 {
        self.t_q + 0.5 * self.ln_one_minus_ke
    }

    /// `T_q` as a dimensionless `r t`.
    pub fn t_q_prime(&self) -> f64 {
        self.t_q / self.tau_scale
    }

    pub fn convention(setup: &ModeSetup) -> TimeConvention {
        if setup.is_two_pair() {
            TimeConvention::TwoPairScaled
        } else {
            TimeConvention::SinglePairScaled
        }
    }
}

// ---------------------------------------------------------------------------
// short time

/// `n̄_< = (n_s0 + 1) z/(1 − z)`.
pub fn shorttime_mean(z: f64, n_s0: u64) -> f64 {
    (n_s0 as f64 + 1.0) * z / (1.0 - z)
}

/// `c_n = (−i tanh τ)ⁿ (cosh τ)^{−(n_s0+1)} √C(n_s0+n, n)`, truncated so that
/// both `Σ|c_n|²` and `Σ|c_n|` have tails below the policy bound.
pub fn short_time_amplitudes(
    z: SqueezeTime,
    n_s0: u64,
    policy: &TruncationPolicy,
) -> Result<AmplitudeState> {
    amplitudes_at(z, n_s0, policy, Origin::ShortTime)
}

fn amplitudes_at(
    z: SqueezeTime,
    n_s0: u64,
    policy: &TruncationPolicy,
    origin: Origin,
) -> Result<AmplitudeState> {
    let len = amplitude_truncation(z.z, n_s0, policy)?.len;
    let values = (0..len)
        .map(|n| minus_i_pow(n) * (0.5 * ln_negative_binomial(n as u64, z.z, n_s0)).exp())
        .collect();
    Ok(AmplitudeState {
        setup: ModeSetup::new(len.max(2) as u64 - 1, n_s0)?,
        tau: z.tau,
        convention: TimeConvention::SinglePairScaled,
        layout: Layout::Single,
        values,
        origin,
    })
}

fn negative_binomial(
    z: f64,
    n_s0: u64,
    policy: &TruncationPolicy,
    origin: Origin,
) -> Result<ProbDist> {
    let len = truncation(z, n_s0, policy)?.len;
    let w = (0..len)
        .map(|n| ln_negative_binomial(n as u64, z, n_s0).exp())
        .collect();
    ProbDist::renormalized(w, origin)
}

/// `p_<(n, z) = (1 − z)^{n_s0+1} zⁿ C(n_s0+n, n)`.
pub fn shorttime_probabilities(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<ProbDist> {
    negative_binomial(z, n_s0, policy, Origin::ShortTime)
}

// ---------------------------------------------------------------------------
// crossover

/// Exact crossover for a finite pump: the root `ζ = tanh τ*` of
/// `A ζ²/(1 − ζ²) = n_p0 [1 − ((ζ − ζ_T)/(1 − ζ ζ_T))²]`, `ζ_T = tanh T_q`,
/// `A` the seed occupation. Returns `z* = ζ*²`.
pub fn crossover_z_star(setup: &ModeSetup) -> Result<f64> {
    let a = setup.seed_occupation();
    let np = setup.n_p0 as f64;
    let zt = EllipticSchedule::new(setup).t_q.tanh();
    let g = |x: f64| {
        let r = (x - zt) / (1.0 - x * zt);
        a * x * x / (1.0 - x * x) - np * (1.0 - r * r)
    };
    // g(0) < 0; g rises past zero before ζ_T, where the long-time mean peaks
    let (mut lo, mut hi) = (0.0, zt);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::NoRoot(format!(
            "crossover equation has no sign change for n_p0 = {}, seed = {a}",
            setup.n_p0
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).powi(2))
}

/// First-order solution in `ε_T = 2e^{−2T_q}` and `ε = A/n_p0`:
/// `ζ* = (2ε_T + √(2 ε_T ε))/(ε − 2ε_T)`.
pub fn crossover_z_star_first_order(setup: &ModeSetup) -> Result<f64> {
    let sched = EllipticSchedule::new(setup);
    let eps_t = 2.0 * (-2.0 * sched.t_q).exp();
    let eps = setup.seed_occupation() / setup.n_p0 as f64;
    let den = eps - 2.0 * eps_t;
    if !(den > 0.0) {
        return Err(Error::NoRoot(format!(
            "first-order crossover undefined: ε = {eps}, ε_T = {eps_t}"
        )));
    }
    let zeta = (2.0 * eps_t + (2.0 * eps_t * eps).sqrt()) / den;
    if !(zeta < 1.0) {
        return Err(Error::NoRoot(format!("first-order ζ* = {zeta} ≥ 1")));
    }
    Ok(zeta * zeta)
}

// ---------------------------------------------------------------------------
// long time

fn check_window(tau: f64, limit: f64) -> Result<()> {
    if !(tau >= 0.0 && tau <= limit * (1.0 + 1e-12)) {
        return Err(Error::OutsideValidity { tau, limit });
    }
    Ok(())
}

/// Single-pulse envelope `n_p0 cn²(τ − T_q | k_e)` on `[0, 2T_q]`.
pub fn longtime_envelope(tau: f64, setup: &ModeSetup, sched: &EllipticSchedule) -> Result<f64> {
    check_window(tau, 2.0 * sched.t_q)?;
    Ok(setup.n_p0 as f64 * jacobi(tau - sched.t_q, sched.k_e.m()).cn.powi(2))
}

/// `n̄_>(τ) = n_p0 cn²(τ − T_q | k_e)` up to the pump minimum at `τ = T_q`,
/// beyond which the model no longer applies.
pub fn longtime_mean(tau: f64, setup: &ModeSetup, sched: &EllipticSchedule) -> Result<f64> {
    check_window(tau, sched.t_q)?;
    longtime_envelope(tau, setup, sched)
}

/// `n_p0 sech²(τ − T_q)`, the `k_e → 1` form of the envelope.
pub fn longtime_mean_sech(tau: f64, setup: &ModeSetup, sched: &EllipticSchedule) -> Result<f64> {
    check_window(tau, 2.0 * sched.t_q)?;
    Ok(setup.n_p0 as f64 / (tau - sched.t_q).cosh().powi(2))
}

/// `n_p0 (A/N) sd²(τ | k_e)`, the form that starts from zero at `τ = 0`;
/// equal to the cn form when `T_q = K(k_e)`.
pub fn longtime_mean_sd(tau: f64, setup: &ModeSetup, sched: &EllipticSchedule) -> Result<f64> {
    check_window(tau, sched.exact_quarter_period)?;
    let frac = setup.seed_occupation() / setup.total_scale();
    Ok(setup.n_p0 as f64 * frac * jacobi(tau, sched.k_e.m()).sd().powi(2))
}

/// Two-pair split of the envelope: `(n̄_s, m̄_s̄)` emitted means in the
/// proportions `(n_s0+1) : (n_s̄0+1)`.
pub fn longtime_mean_two_pair(
    tau: f64,
    setup: &ModeSetup,
    sched: &EllipticSchedule,
) -> Result<(f64, f64)> {
    let Some(nb) = setup.n_sbar0 else {
        return Err(Error::InvalidSetup("two-pair mean needs n_sbar0".into()));
    };
    let total = longtime_mean(tau, setup, sched)?;
    let a = setup.seed_occupation();
    Ok((
        total * (setup.n_s0 as f64 + 1.0) / a,
        total * (nb as f64 + 1.0) / a,
    ))
}

/// `f(z) = 4e^{−π}(1 + √z)/(1 − √z)`.
pub fn f_of_z(z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::OutOfRange {
            name: "z",
            value: z,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let s = z.sqrt();
    Ok(4.0 * (-PI).exp() * (1.0 + s) / (1.0 - s))
}

/// `f = 4e^{−π}e^{2τ}`, the same map in terms of `τ`.
pub fn f_of_tau(tau: f64) -> f64 {
    4.0 * (2.0 * tau - PI).exp()
}

/// `z′ = f/(1 + f)`, written as `1/(1 + 1/f)` so it stays accurate near 1.
pub fn long_z(z: f64) -> Result<f64> {
    let f = f_of_z(z)?;
    Ok(1.0 / (1.0 + f.recip()))
}

/// `(n_s0 + 1) f(z)`, the mean of [`longtime_probabilities`].
pub fn longtime_mean_of_z(z: f64, n_s0: u64) -> Result<f64> {
    Ok((n_s0 as f64 + 1.0) * f_of_z(z)?)
}

/// `p_>(n, z) = p_<(n, f/(1+f))`. Defined for every `z < 1`; only meaningful
/// past the crossover, but kept total for continuity checks.
pub fn longtime_probabilities(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<ProbDist> {
    negative_binomial(long_z(z)?, n_s0, policy, Origin::LongTime)
}

/// Amplitudes `√p_>(n)` with the `(−i)ⁿ` phases of the short-time solution.
pub fn longtime_amplitudes(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<AmplitudeState> {
    let zl = long_z(z)?;
    let mut st = amplitudes_at(SqueezeTime::from_z(zl)?, n_s0, policy, Origin::LongTime)?;
    st.tau = SqueezeTime::from_z(z)?.tau;
    Ok(st)
}

/// Amplitudes for a branch at squeezing `z`.
pub fn branch_amplitudes(
    z: f64,
    n_s0: u64,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<AmplitudeState> {
    let zb = branch.effective_z(z)?;
    let mut st = amplitudes_at(SqueezeTime::from_z(zb)?, n_s0, policy, branch.origin(z))?;
    st.tau = SqueezeTime::from_z(z)?.tau;
    Ok(st)
}

/// `p_<` up to the large-pump crossover, `p_>` after.
pub fn combined_solution(z: f64, n_s0: u64) -> Result<ProbDist> {
    combined_solution_with(z, n_s0, &TruncationPolicy::default())
}

pub fn combined_solution_with(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<ProbDist> {
    negative_binomial(
        Branch::Combined.effective_z(z)?,
        n_s0,
        policy,
        Branch::Combined.origin(z),
    )
}

/// Piecewise analytic mean matching [`combined_solution`].
pub fn combined_mean(z: f64, n_s0: u64) -> Result<f64> {
    if z <= z_star_limit() {
        Ok(shorttime_mean(z, n_s0))
    } else {
        longtime_mean_of_z(z, n_s0)
    }
}

/// Bhattacharyya fidelity between the thermal short-time law and the
/// combined solution at the same `z`: 1 up to the crossover.
pub fn fidelity(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<f64> {
    if z <= z_star_limit() {
        SqueezeTime::from_z(z)?;
        return Ok(1.0);
    }
    let p = shorttime_probabilities(z, n_s0, policy)?;
    let q = longtime_probabilities(z, n_s0, policy)?;
    let len = p.len().max(q.len());
    bhattacharyya_fidelity(&p.padded(len), &q.padded(len))
}

/// `n_s0 = 0` closed form `√((1−z)(1−z′)) / (1 − √(z z′))`, any `z`.
pub fn fidelity_geometric(z: f64, z_prime: f64) -> f64 {
    ((1.0 - z) * (1.0 - z_prime)).sqrt() / (1.0 - (z * z_prime).sqrt())
}

/// `(z, F(z))` over a grid.
pub fn fidelity_curve(zs: &[f64], n_s0: u64, policy: &TruncationPolicy) -> Result<Vec<(f64, f64)>> {
    zs.iter()
        .map(|&z| Ok((z, fidelity(z, n_s0, policy)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::integrate;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn squeeze_time_round_trip() {
        for z in [0.0, 0.1, 0.5, 0.9, 0.999] {
            let s = SqueezeTime::from_z(z).unwrap();
            assert!((SqueezeTime::from_tau(s.tau).unwrap().z - z).abs() < 1e-12);
        }
        assert!(SqueezeTime::from_z(1.0).is_err());
    }

    #[test]
    fn short_amplitudes_at_zero_are_delta() {
        let st = short_time_amplitudes(SqueezeTime::from_z(0.0).unwrap(), 3, &pol()).unwrap();
        assert_eq!(st.values.len(), 1);
        assert_eq!(st.values[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn short_amplitudes_geometric_for_vacuum_seed() {
        let z = 0.37;
        let st = short_time_amplitudes(SqueezeTime::from_z(z).unwrap(), 0, &pol()).unwrap();
        for (n, c) in st.values.iter().enumerate().take(30) {
            assert_relative_eq!(
                c.norm_sqr(),
                (1.0 - z) * z.powi(n as i32),
                max_relative = 1e-12
            );
            assert_eq!(*c / c.norm(), minus_i_pow(n));
        }
        assert!(st.norm_drift() < 1e-12);
    }

    #[test]
    fn short_mean_for_seeded_signal() {
        let p = shorttime_probabilities(0.4, 3, &pol()).unwrap();
        assert!((p.mean_and_variance().0 - 8.0 / 3.0).abs() < 1e-10);
        assert!((shorttime_mean(0.4, 3) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn schedule_branches() {
        let small = EllipticSchedule::new(&ModeSetup::new(20, 0).unwrap());
        assert!(small.k_e.m() < KE_ASYMPTOTIC);
        assert_eq!(small.t_q, small.exact_quarter_period);
        let big = EllipticSchedule::new(&ModeSetup::new(255, 0).unwrap());
        assert!((big.a() - FRAC_PI_2).abs() < 1e-12);
        // a(k_e) stays within [ln 4, π/2] on both branches
        for np in [1u64, 3, 10, 50, 98, 99, 100, 1000, 1_000_000] {
            for ns in [0u64, 2, 7] {
                let s = EllipticSchedule::new(&ModeSetup::new(np, ns).unwrap());
                assert!(
                    s.a() >= 4f64.ln() - 1e-12 && s.a() <= FRAC_PI_2 + 1e-12,
                    "np={np}: {}",
                    s.a()
                );
            }
        }
    }

    #[test]
    fn quarter_period_grows_logarithmically() {
        let t4 = EllipticSchedule::new(&ModeSetup::new(10_000, 0).unwrap()).t_q;
        let t6 = EllipticSchedule::new(&ModeSetup::new(1_000_000, 0).unwrap()).t_q;
        let expect = 0.5 * 100f64.ln();
        assert!(((t6 - t4) / expect - 1.0).abs() < 0.02);
    }

    #[test]
    fn exact_quarter_period_is_time_to_full_transfer() {
        // K(k_e) in τ equals √N ∫₀^{π/2} dθ / √(n_p0 sin²θ + A)
        let s = ModeSetup::new(40, 2).unwrap();
        let sched = EllipticSchedule::new(&s);
        let q = integrate(
            |th: f64| 1.0 / (40.0 * th.sin().powi(2) + 3.0).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-13,
        );
        assert_relative_eq!(
            sched.exact_quarter_period,
            sched.tau_scale * q,
            max_relative = 1e-10
        );
    }

    #[test]
    fn z_star_large_pump_limit() {
        assert!((z_star_limit() - 0.506407).abs() < 1e-6);
        let s = ModeSetup::new(1_000_000_000, 0).unwrap();
        assert!((crossover_z_star_first_order(&s).unwrap() - z_star_limit()).abs() < 1e-6);
        assert!((crossover_z_star(&s).unwrap() - z_star_limit()).abs() < 1e-3);
    }

    #[test]
    fn z_star_finite_pump_regression() {
        let s = ModeSetup::new(255, 0).unwrap();
        let z = crossover_z_star(&s).unwrap();
        assert!((z - Z_STAR_255).abs() < 1e-12, "{z}");
        let z1 = crossover_z_star_first_order(&s).unwrap();
        assert!((z1 - z).abs() < 0.05);
    }

    // bisection of the crossover equation at n_p0 = 255, n_s0 = 0
    const Z_STAR_255: f64 = 0.501_334_357_224_229_2;

    #[test]
    fn z_star_two_pair_same_limit() {
        let s = ModeSetup::two_pair(1_000_000_000, 0, 0).unwrap();
        assert!((crossover_z_star_first_order(&s).unwrap() - z_star_limit()).abs() < 1e-6);
        let s = ModeSetup::two_pair(1_000_000_000, 2, 5).unwrap();
        assert!((crossover_z_star_first_order(&s).unwrap() - z_star_limit()).abs() < 1e-6);
    }

    #[test]
    fn z_star_independent_of_coupling() {
        let s = ModeSetup::new(500, 1).unwrap();
        let a = crossover_z_star(&s).unwrap();
        let b = crossover_z_star(&s.with_coupling(3.7).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn longtime_mean_peaks_at_quarter_period() {
        let s = ModeSetup::new(255, 0).unwrap();
        let sched = EllipticSchedule::new(&s);
        assert_eq!(longtime_mean(sched.t_q, &s, &sched).unwrap(), 255.0);
        assert!(matches!(
            longtime_mean(sched.t_q + 0.1, &s, &sched),
            Err(Error::OutsideValidity { .. })
        ));
        assert!(longtime_envelope(sched.t_q + 0.1, &s, &sched).is_ok());
        assert!(longtime_envelope(2.0 * sched.t_q + 0.1, &s, &sched).is_err());
    }

    #[test]
    fn sd_form_matches_short_time_to_second_order() {
        let s = ModeSetup::new(10_000, 2).unwrap();
        let sched = EllipticSchedule::new(&s);
        for tau in [1e-3, 3e-3, 1e-2] {
            let t_prime = tau / sched.tau_scale;
            let quad = 10_000.0 * 3.0 * t_prime * t_prime;
            let sd = longtime_mean_sd(tau, &s, &sched).unwrap();
            // relative O(τ²) agreement
            assert!((sd / quad - 1.0).abs() < tau * tau, "tau={tau}");
            let short = shorttime_mean((10_000f64.sqrt() * t_prime).tanh().powi(2), 2);
            assert!((short / quad - 1.0).abs() < tau * tau);
        }
    }

    #[test]
    fn sd_and_cn_forms_agree_with_exact_period() {
        let s = ModeSetup::new(30, 1).unwrap();
        let sched = EllipticSchedule::new(&s);
        assert_eq!(sched.t_q, sched.exact_quarter_period);
        for tau in [0.1, 0.7, 1.5] {
            assert_relative_eq!(
                longtime_mean_sd(tau, &s, &sched).unwrap(),
                longtime_mean(tau, &s, &sched).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn means_match_at_crossover_for_large_pump() {
        let s = ModeSetup::new(1_000_000, 0).unwrap();
        let sched = EllipticSchedule::new(&s);
        let z = crossover_z_star(&s).unwrap();
        let tau = z.sqrt().atanh();
        let short = shorttime_mean(z, 0);
        // the crossover equation is written with the sech envelope
        let sech = longtime_mean_sech(tau, &s, &sched).unwrap();
        assert!((sech / short - 1.0).abs() < 1e-3, "{short} vs {sech}");
    }

    #[test]
    fn two_pair_fractions() {
        let s = ModeSetup::two_pair(1000, 1, 3).unwrap();
        let sched = EllipticSchedule::new(&s);
        let tau = 0.5 * sched.t_q;
        let (a, b) = longtime_mean_two_pair(tau, &s, &sched).unwrap();
        let total = longtime_mean(tau, &s, &sched).unwrap();
        assert_relative_eq!(a + b, total, max_relative = 1e-14);
        assert_relative_eq!(a / b, 2.0 / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn f_examples() {
        let zs = z_star_limit();
        assert!((f_of_z(zs).unwrap() - zs / (1.0 - zs)).abs() < 1e-3);
        assert!((f_of_z(0.81).unwrap() - 76.0 * (-PI).exp()).abs() < 1e-12);
        assert!(f_of_z(1.0).is_err());
        let tau = SqueezeTime::from_z(0.3).unwrap().tau;
        assert_relative_eq!(f_of_tau(tau), f_of_z(0.3).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn longtime_is_short_time_at_mapped_z() {
        for (z, ns) in [(0.6, 0u64), (0.8, 3), (0.95, 1)] {
            let p = longtime_probabilities(z, ns, &pol()).unwrap();
            let q = shorttime_probabilities(long_z(z).unwrap(), ns, &pol()).unwrap();
            assert_eq!(p.weights(), q.weights());
            assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn continuity_at_crossover() {
        let zs = z_star_limit();
        let p = shorttime_probabilities(zs, 0, &pol()).unwrap();
        let q = longtime_probabilities(zs, 0, &pol()).unwrap();
        let len = p.len().max(q.len());
        let (p, q) = (p.padded(len), q.padded(len));
        let tv: f64 = 0.5
            * p.weights()
                .iter()
                .zip(q.weights())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        assert!(tv < 1e-2, "{tv}");
        let a = combined_solution(zs - 1e-6, 0).unwrap();
        let b = combined_solution(zs + 1e-6, 0).unwrap();
        assert!((a.mean_and_variance().0 - b.mean_and_variance().0).abs() < 1e-3);
    }

    #[test]
    fn longtime_near_one_diverges_under_guard() {
        let p = longtime_probabilities(0.9999, 0, &pol()).unwrap();
        assert!(p.mean_and_variance().0 > 5000.0);
        assert!(longtime_probabilities(1.0 - 1e-7, 0, &pol()).is_err());
    }

    #[test]
    fn combined_solution_at_zero_is_delta() {
        assert_eq!(combined_solution(0.0, 4).unwrap().weights(), &[1.0]);
    }

    #[test]
    fn fidelity_shape() {
        assert_eq!(fidelity(0.3, 0, &pol()).unwrap(), 1.0);
        assert_eq!(fidelity(z_star_limit(), 0, &pol()).unwrap(), 1.0);
        let f = fidelity(0.9, 0, &pol()).unwrap();
        assert!(f < 1.0);
        let closed = fidelity_geometric(0.9, long_z(0.9).unwrap());
        assert!((f - closed).abs() < 1e-10);
    }

    #[test]
    fn fidelity_against_long_sum() {
        // brute-force sum to 10⁴ terms
        let z: f64 = 0.9;
        let zl = long_z(z).unwrap();
        let brute: f64 = (0..10_000)
            .map(|n| ((1.0 - z) * z.powi(n) * (1.0 - zl) * zl.powi(n)).sqrt())
            .sum();
        assert!((fidelity(z, 0, &pol()).unwrap() - brute).abs() < 1e-10);
        assert!((brute - 0.989_085_429_808_601_5).abs() < 1e-9, "{brute}");
    }

    proptest! {
        #[test]
        fn combined_mean_matches_piecewise(z in 0.0f64..0.99, ns in 0u64..6) {
            let p = combined_solution(z, ns).unwrap();
            let m = p.mean_and_variance().0;
            let want = combined_mean(z, ns).unwrap();
            prop_assert!((m - want).abs() < 1e-9 * (1.0 + want), "{} vs {}", m, want);
        }

        #[test]
        fn long_is_short_composed_pointwise(z in 0.0f64..0.98, ns in 0u64..5, n in 0u64..60) {
            let zl = long_z(z).unwrap();
            let a = ln_negative_binomial(n, zl, ns);
            let p = longtime_probabilities(z, ns, &pol()).unwrap();
            if (n as usize) < p.len() {
                let b = p.weights()[n as usize].ln();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
