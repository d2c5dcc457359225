//! Log-negativities, mutual and tripartite information.
//!
//! Every density matrix here is diagonal or correlated along a single
//! index, so log-negativities reduce to sums of amplitude magnitudes. The
//! closed forms take magnitude slices so they can be fed the exact vectors
//! used by the dense partial-transpose oracle in [`oracle`].

use serde::{Deserialize, Serialize};

use crate::analytic::{branch_amplitudes, long_z, z_star_limit, Branch, SqueezeTime};
use crate::error::{Error, Result};
use crate::fock::{AmplitudeState, Layout, TruncationPolicy};
use crate::specfun::{entropy_bits, ln_binomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BipartitionLabel {
    /// `(p, ī)` vs `s`, single pair.
    PumpIdlerVsSignal,
    /// `(s, ī)` vs `(s̄, i)` with the pump traced out.
    PairVsPair,
    /// `s` vs `ī` with the pump traced out.
    SignalVsIdler,
    /// `s` vs a spectator mode `c` that starts maximally entangled with `s`.
    SignalVsSpectator,
    /// `(p, ī)` vs `s` with the entangled `(s, c)` initial state.
    PumpIdlerVsSignalEntangledIc,
    /// `s` vs an infalling mode after beam-splitter scattering.
    SignalVsInfallerBs,
}

impl BipartitionLabel {
    pub const ALL: [BipartitionLabel; 6] = [
        BipartitionLabel::PumpIdlerVsSignal,
        BipartitionLabel::PairVsPair,
        BipartitionLabel::SignalVsIdler,
        BipartitionLabel::SignalVsSpectator,
        BipartitionLabel::PumpIdlerVsSignalEntangledIc,
        BipartitionLabel::SignalVsInfallerBs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BipartitionLabel::PumpIdlerVsSignal => "pump_idler_vs_signal",
            BipartitionLabel::PairVsPair => "pair_vs_pair",
            BipartitionLabel::SignalVsIdler => "signal_vs_idler",
            BipartitionLabel::SignalVsSpectator => "signal_vs_spectator",
            BipartitionLabel::PumpIdlerVsSignalEntangledIc => "pump_idler_vs_signal_entangled_ic",
            BipartitionLabel::SignalVsInfallerBs => "signal_vs_infaller_bs",
        }
    }
}

fn sum_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

// ---------------------------------------------------------------------------
// (p, ī) vs s

/// `2 log₂ Σ|c_n|` for magnitudes.
pub fn pump_idler_vs_signal_from(mags: &[f64]) -> f64 {
    2.0 * sum_abs(mags).log2()
}

/// `E_N = 2 log₂ Σ_n |c_n|` for a single-pair state, numeric or analytic.
pub fn logneg_pump_idler_vs_signal(amps: &AmplitudeState) -> f64 {
    pump_idler_vs_signal_from(&amps.magnitudes())
}

/// Same, from the closed-form amplitudes of a branch at squeezing `z`.
pub fn logneg_pump_idler_vs_signal_z(
    z: f64,
    n_s0: u64,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<f64> {
    Ok(logneg_pump_idler_vs_signal(&branch_amplitudes(
        z, n_s0, branch, policy,
    )?))
}

/// The defining form `log₂(1 + 2𝒩)` with `𝒩 = Σ_{n≠m} |c_n c_m| / 2`, the sum
/// of the negative partial-transpose eigenvalues of a pure single-pair state.
pub fn logneg_definition_form(amps: &AmplitudeState) -> f64 {
    let m = amps.magnitudes();
    let s = sum_abs(&m);
    let sq: f64 = m.iter().map(|x| x * x).sum();
    (1.0 + (s * s - sq)).log2()
}

// ---------------------------------------------------------------------------
// s vs ī

/// Zero: `ρ_{s,ī}` is diagonal after the pump trace.
pub fn logneg_signal_vs_idler(_amps: &AmplitudeState) -> f64 {
    0.0
}

// ---------------------------------------------------------------------------
// (s, ī) vs (s̄, i)

/// `log₂ Σ_M λ_M²` with `λ_M = Σ_n |a_n| |b_{M−n}|`, the factorized form.
pub fn pair_vs_pair_from(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let top = a.len() + b.len() - 1;
    let mut total = 0.0;
    for m in 0..top {
        let lo = m.saturating_sub(b.len() - 1);
        let hi = m.min(a.len() - 1);
        let lam: f64 = (lo..=hi).map(|n| a[n].abs() * b[m - n].abs()).sum();
        total += lam * lam;
    }
    total.log2()
}

/// `log₂[Σ_m λ_m² (1−z′)^{n_s0+n_s̄0+2} z′^m]` with the branch's `z′`.
pub fn logneg_pair_vs_pair(
    z: f64,
    n_s0: u64,
    n_sbar0: u64,
    branch: Branch,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let a = branch_amplitudes(z, n_s0, branch, policy)?.magnitudes();
    let b = branch_amplitudes(z, n_sbar0, branch, policy)?.magnitudes();
    Ok(pair_vs_pair_from(&a, &b))
}

/// Vacuum seeds: `log₂((1+z′)/(1−z′))`, i.e. `log₂ cosh 2τ` short and
/// `log₂(1 + 2f)` long.
pub fn logneg_pair_vs_pair_vacuum(z: f64, branch: Branch) -> Result<f64> {
    let zp = branch.effective_z(z)?;
    Ok(((1.0 + zp) / (1.0 - zp)).log2())
}

/// Where the short and long vacuum-seed pair-vs-pair curves cross:
/// `(1+z)/(1−z) = 1 + 2f(z)`, solved by bisection on `(0.05, 0.95)`.
pub fn pair_vs_pair_branch_crossing() -> Result<f64> {
    let g = |z: f64| -> Result<f64> {
        Ok(logneg_pair_vs_pair_vacuum(z, Branch::Short)?
            - logneg_pair_vs_pair_vacuum(z, Branch::Long)?)
    };
    let (mut lo, mut hi) = (0.05, 0.95);
    if !(g(lo)? < 0.0 && g(hi)? > 0.0) {
        return Err(Error::NoRoot(
            "short and long pair-vs-pair curves do not cross".into(),
        ));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// entangled initial condition (s, c)

fn short_mags(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<Vec<f64>> {
    Ok(branch_amplitudes(z, n_s0, Branch::Short, policy)?.magnitudes())
}

/// `log₂[1 + (1 − δ_{k,0}) Σ_n |c⁽⁰⁾_n c⁽ᵏ⁾_n|]`.
pub fn entangled_ic_signal_vs_spectator_from(c0: &[f64], ck: &[f64], seeded: bool) -> f64 {
    if !seeded {
        return 0.0;
    }
    let overlap: f64 = c0.iter().zip(ck).map(|(a, b)| (a * b).abs()).sum();
    (1.0 + overlap).log2()
}

/// `s` vs `c` log-negativity for the initial state `(|k⟩_s|0⟩_c + |0⟩_s|k⟩_c)/√2`,
/// `k = n_s0`, using the short-time amplitudes at every `z`.
pub fn logneg_entangled_ic(z: f64, n_s0: u64, policy: &TruncationPolicy) -> Result<f64> {
    let c0 = short_mags(z, 0, policy)?;
    let ck = short_mags(z, n_s0, policy)?;
    Ok(entangled_ic_signal_vs_spectator_from(&c0, &ck, n_s0 != 0))
}

/// `log₂[½(Σ|c⁽⁰⁾|)² + ½(Σ|c⁽ᵏ⁾|)²]`.
pub fn entangled_ic_pump_idler_vs_signal_from(c0: &[f64], ck: &[f64]) -> f64 {
    let (a, b) = (sum_abs(c0), sum_abs(ck));
    (0.5 * a * a + 0.5 * b * b).log2()
}

pub fn logneg_pump_idler_vs_signal_entangled_ic(
    z: f64,
    n_s0: u64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let c0 = short_mags(z, 0, policy)?;
    let ck = short_mags(z, n_s0, policy)?;
    Ok(entangled_ic_pump_idler_vs_signal_from(&c0, &ck))
}

/// Separable companion: `log₂(Σ|c⁽ᵏ⁾|)²`, the plain single-pair value.
pub fn logneg_pump_idler_vs_signal_separable_ic(
    z: f64,
    n_s0: u64,
    policy: &TruncationPolicy,
) -> Result<f64> {
    Ok(pump_idler_vs_signal_from(&short_mags(z, n_s0, policy)?))
}

// ---------------------------------------------------------------------------
// beam-splitter scattering

/// `|f⁰_k(n)| = √(C(n+1,k)/(n+1)) |(n+1−k) cos^{k+1}θ sin^{n−k}θ − k cos^{k−1}θ sin^{n−k+2}θ|`,
/// the output amplitude of `|n⟩_s|1⟩_c` into `|k⟩_s|n+1−k⟩_c`, `0 ≤ k ≤ n+1`.
pub fn bs_f0_abs(k: usize, n: usize, theta: f64) -> f64 {
    if k > n + 1 {
        return 0.0;
    }
    let (s, c) = theta.sin_cos();
    let pw = |x: f64, e: usize| x.powi(e as i32);
    let t1 = if k <= n {
        (n + 1 - k) as f64 * pw(c, k + 1) * pw(s, n - k)
    } else {
        0.0
    };
    let t2 = if k >= 1 {
        k as f64 * pw(c, k - 1) * pw(s, n + 2 - k)
    } else {
        0.0
    };
    let pref = (0.5 * (ln_binomial((n + 1) as f64, k as f64) - ((n + 1) as f64).ln())).exp();
    pref * (t1 - t2).abs()
}

/// `log₂ Σ_n |c_n|² (Σ_k |f⁰_k(n)|)²` for magnitudes `|c_n|`.
pub fn bs_scattering_from(c: &[f64], theta: f64) -> f64 {
    let total: f64 = c
        .iter()
        .enumerate()
        .map(|(n, cn)| {
            let inner: f64 = (0..=n + 1).map(|k| bs_f0_abs(k, n, theta)).sum();
            cn * cn * inner * inner
        })
        .sum();
    total.log2()
}

/// `s` vs `c` after the late-time beam splitter acting on `|0⟩_s|1⟩_c`,
/// short-time amplitudes at every `z`.
pub fn logneg_bs_scattering(z: f64, theta: f64, policy: &TruncationPolicy) -> Result<f64> {
    check_theta(theta)?;
    Ok(bs_scattering_from(&short_mags(z, 0, policy)?, theta))
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_2,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// information

/// `(I(A:B), I₃)` in bits for a pure single-pair state, with the cut
/// entropies assembled from the reduced distributions of each cut.
pub fn mutual_and_tripartite_info(amps: &AmplitudeState) -> Result<(f64, f64)> {
    if !matches!(amps.layout, Layout::Single) {
        return Err(Error::InvalidSetup(
            "mutual information needs a single-pair state".into(),
        ));
    }
    let p: Vec<f64> = amps.values.iter().map(|c| c.norm_sqr()).collect();
    let norm: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|w| w / norm).collect();
    let np = amps.setup.n_p0 as usize;
    // pump over n_p0 − n, signal over n_s0 + n, idler over n
    let mut pump = vec![0.0; np + 1];
    for (n, w) in p.iter().enumerate() {
        pump[np - n] = *w;
    }
    let mut sig = vec![0.0; amps.setup.n_s0 as usize];
    sig.extend_from_slice(&p);
    let s_p = entropy_bits(&pump);
    let s_s = entropy_bits(&sig);
    let s_i = entropy_bits(&p);
    // each two-mode cut is diagonal along the same index
    let s_ps = entropy_bits(&sig.iter().rev().copied().collect::<Vec<_>>());
    let s_pi = entropy_bits(&pump);
    let s_si = entropy_bits(&p);
    let s_psi = 0.0;
    let mutual = s_s + s_i - s_si;
    let i3 = s_p + s_s + s_i - s_ps - s_pi - s_si + s_psi;
    Ok((mutual, i3))
}

/// Long-time `(p, ī)` vs `s` offset relative to the short-time law for
/// vacuum seeds: `4 − π/ln 2`.
pub fn longtime_offset_limit() -> f64 {
    4.0 - std::f64::consts::PI / std::f64::consts::LN_2
}

/// Short-time vacuum-seed law `2τ/ln 2` at squeezing `z`.
pub fn shorttime_vacuum_law(z: f64) -> Result<f64> {
    Ok(2.0 * SqueezeTime::from_z(z)?.tau / std::f64::consts::LN_2)
}

/// Combined-branch helper used by sweeps: the branch switch sits at the
/// large-pump crossover.
pub fn branch_at(z: f64) -> Branch {
    if z <= z_star_limit() {
        Branch::Short
    } else {
        Branch::Long
    }
}

/// `z′` for the long branch, re-exported for sweeps that tabulate it.
pub fn long_branch_z(z: f64) -> Result<f64> {
    long_z(z)
}

// ---------------------------------------------------------------------------

/// Dense partial-transpose oracle: assemble the two-mode density matrix
/// explicitly, transpose one factor, and sum the negative eigenvalues.
pub mod oracle {
    use nalgebra::{DMatrix, SymmetricEigen};
    use num_complex::Complex64;

    use crate::channel::bs_coefficients;
    use crate::dynamics::minus_i_pow;

    /// Largest two-mode dimension the oracle accepts.
    pub const MAX_DIM: usize = 900;

    /// `ρ^{T_B}` for `ρ` on `A ⊗ B`, row index `a·d_b + b`.
    pub fn partial_transpose(rho: &DMatrix<Complex64>, da: usize, db: usize) -> DMatrix<Complex64> {
        let d = da * db;
        assert_eq!(rho.nrows(), d);
        DMatrix::from_fn(d, d, |r, c| {
            let (a, b) = (r / db, r % db);
            let (a2, b2) = (c / db, c % db);
            rho[(a * db + b2, a2 * db + b)]
        })
    }

    /// Eigenvalues of `ρ^{T_B}` (Hermitian).
    pub fn pt_spectrum(rho: &DMatrix<Complex64>, da: usize, db: usize) -> Vec<f64> {
        let pt = partial_transpose(rho, da, db);
        // symmetrize away rounding before the Hermitian solver
        let h = (&pt + pt.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    /// `log₂(1 + 2𝒩)` with `𝒩` the summed magnitude of negative eigenvalues.
    pub fn logneg(rho: &DMatrix<Complex64>, da: usize, db: usize) -> f64 {
        assert!(da * db <= MAX_DIM, "oracle dimension {} too large", da * db);
        let neg: f64 = pt_spectrum(rho, da, db)
            .iter()
            .filter(|&&x| x < 0.0)
            .map(|x| -x)
            .sum();
        (1.0 + 2.0 * neg).log2()
    }

    /// `ρ_AB = Σ_t ψ_{a,b,t} ψ*_{a′,b′,t}` for `ψ` stored as `[(a·d_b + b)·d_t + t]`.
    pub fn reduce(psi: &[Complex64], da: usize, db: usize, dt: usize) -> DMatrix<Complex64> {
        assert_eq!(psi.len(), da * db * dt);
        let d = da * db;
        let mut rho = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..dt {
                    acc += psi[r * dt + t] * psi[c * dt + t].conj();
                }
                rho[(r, c)] = acc;
            }
        }
        rho
    }

    fn normalized(v: &[f64]) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }

    fn phased(v: &[f64]) -> Vec<Complex64> {
        normalized(v)
            .iter()
            .enumerate()
            .map(|(n, x)| minus_i_pow(n) * x)
            .collect()
    }

    /// `(p, ī)` vs `s`: `ψ = Σ c_n |n⟩_{pī}|n⟩_s`.
    pub fn pump_idler_vs_signal(c: &[f64]) -> (DMatrix<Complex64>, usize, usize) {
        let c = phased(c);
        let l = c.len();
        let mut psi = vec![Complex64::new(0.0, 0.0); l * l];
        for (n, cn) in c.iter().enumerate() {
            psi[n * l + n] = *cn;
        }
        (reduce(&psi, l, l, 1), l, l)
    }

    /// `s` vs `ī` with the pump (index `n`) traced out.
    pub fn signal_vs_idler(c: &[f64]) -> (DMatrix<Complex64>, usize, usize) {
        let c = phased(c);
        let l = c.len();
        let mut psi = vec![Complex64::new(0.0, 0.0); l * l * l];
        for (n, cn) in c.iter().enumerate() {
            psi[(n * l + n) * l + n] = *cn;
        }
        (reduce(&psi, l, l, l), l, l)
    }

    /// `(s, ī)` (index `n`) vs `(s̄, i)` (index `m`) for `c_{n,m} = a_n b_m`,
    /// pump index `n + m` traced out.
    pub fn pair_vs_pair(a: &[f64], b: &[f64]) -> (DMatrix<Complex64>, usize, usize) {
        let (a, b) = (phased(a), phased(b));
        let (la, lb) = (a.len(), b.len());
        let dt = la + lb - 1;
        let mut psi = vec![Complex64::new(0.0, 0.0); la * lb * dt];
        for n in 0..la {
            for m in 0..lb {
                psi[(n * lb + m) * dt + n + m] = a[n] * b[m];
            }
        }
        (reduce(&psi, la, lb, dt), la, lb)
    }

    /// Entangled `(s, c)` start with seed `k ≥ 1`. Returns the `s`–`c` matrix
    /// (`c` restricted to its two occupied levels `{0, k}`) and the
    /// `(p, ī)`–`s` matrix.
    #[allow(clippy::type_complexity)]
    pub fn entangled_ic(
        c0: &[f64],
        ck: &[f64],
        k: usize,
    ) -> (
        (DMatrix<Complex64>, usize, usize),
        (DMatrix<Complex64>, usize, usize),
    ) {
        let (c0, ck) = (phased(c0), phased(ck));
        let l = c0.len().min(ck.len());
        let ds = l + k;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // ψ[n][s][c]
        let at = |n: usize, s: usize, c: usize| (n * ds + s) * 2 + c;
        let mut psi = vec![Complex64::new(0.0, 0.0); l * ds * 2];
        for n in 0..l {
            psi[at(n, k + n, 0)] += ck[n] * h;
            psi[at(n, n, 1)] += c0[n] * h;
        }
        // (s, c) with n traced: reorder to [(s·2 + c)·l + n]
        let mut sc = vec![Complex64::new(0.0, 0.0); l * ds * 2];
        // ((p ī), s) with c traced: [(n·ds + s)·2 + c] is already that order
        for n in 0..l {
            for s in 0..ds {
                for c in 0..2 {
                    sc[(s * 2 + c) * l + n] = psi[at(n, s, c)];
                }
            }
        }
        (
            (reduce(&sc, ds, 2, l), ds, 2),
            (reduce(&psi, l, ds, 2), l, ds),
        )
    }

    /// `s` vs `c` after the beam splitter acts on `|n⟩_s|1⟩_c`, with the
    /// full complex coefficients `f_k(n, 1)`; `(p, ī)` traced out.
    pub fn bs_scattering(c: &[f64], theta: f64) -> (DMatrix<Complex64>, usize, usize) {
        let c = phased(c);
        let l = c.len();
        let d = l + 1;
        let mut psi = vec![Complex64::new(0.0, 0.0); d * d * l];
        for (n, cn) in c.iter().enumerate() {
            let f = bs_coefficients(n, 1, theta).expect("small beam-splitter table");
            for (k, fk) in f.iter().enumerate() {
                psi[(k * d + (n + 1 - k)) * l + n] = cn * fk;
            }
        }
        (reduce(&psi, d, d, l), d, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_single_pair, EvolutionConfig};
    use crate::fock::{ModeSetup, TimeConvention};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, LN_2};

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn z_of(tau: f64) -> f64 {
        tau.tanh().powi(2)
    }

    #[test]
    fn vacuum_seed_short_time_is_linear_in_tau() {
        for tau in [0.5, 1.0, 2.0] {
            let e = logneg_pump_idler_vs_signal_z(z_of(tau), 0, Branch::Short, &pol()).unwrap();
            assert!((e - 2.0 * tau / LN_2).abs() < 1e-9, "tau={tau}: {e}");
        }
        assert_eq!(
            logneg_pump_idler_vs_signal_z(0.0, 0, Branch::Short, &pol()).unwrap(),
            0.0
        );
    }

    #[test]
    fn vacuum_seed_long_time_offset() {
        assert!((longtime_offset_limit() + 0.53236).abs() < 1e-5);
        let tau = 5.0;
        let e = logneg_pump_idler_vs_signal_z(z_of(tau), 0, Branch::Long, &pol()).unwrap();
        assert!((e - 2.0 * tau / LN_2 + 0.53236).abs() < 1e-3, "{e}");
    }

    #[test]
    fn definition_form_matches_amplitude_sum() {
        let s = ModeSetup::new(20, 1).unwrap();
        let cfg =
            EvolutionConfig::new(vec![0.0, 0.4, 1.0], TimeConvention::SinglePairScaled).unwrap();
        for st in evolve_single_pair(s, &cfg).unwrap() {
            let a = logneg_pump_idler_vs_signal(&st);
            let b = logneg_definition_form(&st);
            assert!((a - b).abs() < 1e-9 * (1.0 + a));
            let (rho, da, db) = oracle::pump_idler_vs_signal(&st.magnitudes());
            assert!((oracle::logneg(&rho, da, db) - a).abs() < 1e-8);
        }
    }

    #[test]
    fn signal_vs_idler_vanishes_and_oracle_agrees() {
        let s = ModeSetup::new(10, 0).unwrap();
        let cfg = EvolutionConfig::new(vec![0.0, 1.0], TimeConvention::Unscaled).unwrap();
        let st = evolve_single_pair(s, &cfg).unwrap().pop().unwrap();
        assert_eq!(logneg_signal_vs_idler(&st), 0.0);
        let (rho, da, db) = oracle::signal_vs_idler(&st.magnitudes());
        assert!(oracle::logneg(&rho, da, db).abs() < 1e-10);
    }

    #[test]
    fn pair_vs_pair_vacuum_closed_forms() {
        for z in [0.1, 0.5, 0.8] {
            let short = logneg_pair_vs_pair(z, 0, 0, Branch::Short, &pol()).unwrap();
            assert!((short - ((1.0 + z) / (1.0 - z)).log2()).abs() < 1e-9);
            let long = logneg_pair_vs_pair(z, 0, 0, Branch::Long, &pol()).unwrap();
            let f = crate::analytic::f_of_z(z).unwrap();
            assert!((long - (1.0 + 2.0 * f).log2()).abs() < 1e-9);
        }
        let z: f64 = 0.5;
        assert!(
            (logneg_pair_vs_pair_vacuum(z, Branch::Short).unwrap()
                - (2.0 * z.sqrt().atanh()).cosh().log2())
            .abs()
                < 1e-12
        );
        assert_eq!(
            logneg_pair_vs_pair(0.0, 2, 3, Branch::Short, &pol()).unwrap(),
            0.0
        );
    }

    #[test]
    fn pair_vs_pair_long_asymptote() {
        let tau = 5.0;
        let long = logneg_pair_vs_pair_vacuum(z_of(tau), Branch::Long).unwrap();
        let want = 2.0 * tau / LN_2 + 3.0 - std::f64::consts::PI / LN_2;
        assert!((long - want).abs() < 1e-3);
    }

    #[test]
    fn pair_vs_pair_seed_swap_symmetry() {
        for (a, b) in [(0u64, 3u64), (1, 4), (2, 7)] {
            for z in [0.2, 0.6, 0.9] {
                let x = logneg_pair_vs_pair(z, a, b, Branch::Combined, &pol()).unwrap();
                let y = logneg_pair_vs_pair(z, b, a, Branch::Combined, &pol()).unwrap();
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pair_vs_pair_branch_crossing_regression() {
        let z = pair_vs_pair_branch_crossing().unwrap();
        // (1+z)/(1−z) = 1 + 2f(z) solved independently
        assert!((z - PAIR_CROSSING).abs() < 1e-12, "{z}");
        assert!((z - z_star_limit()).abs() < 0.02);
    }

    // bisection of (1+z)/(1-z) = 1 + 2f(z)
    const PAIR_CROSSING: f64 = 0.506_407_119_279_415_5;

    #[test]
    fn entangled_ic_examples() {
        for z in [0.0, 0.3, 0.9] {
            assert_eq!(logneg_entangled_ic(z, 0, &pol()).unwrap(), 0.0);
        }
        for k in [1, 2, 5] {
            assert!((logneg_entangled_ic(0.0, k, &pol()).unwrap() - 1.0).abs() < 1e-15);
        }
        // direct series at n_s0 = 5, z = 0.5
        let z: f64 = 0.5;
        let sum: f64 = (0..400)
            .map(|n| {
                let p0 = (1.0 - z) * z.powi(n);
                let pk = crate::fock::ln_negative_binomial(n as u64, z, 5).exp();
                (p0 * pk).sqrt()
            })
            .sum();
        let want = (1.0 + sum).log2();
        assert!((logneg_entangled_ic(0.5, 5, &pol()).unwrap() - want).abs() < 1e-10);
        assert!((want - ENT_IC_5_HALF).abs() < 1e-10, "{want}");
    }

    const ENT_IC_5_HALF: f64 = 0.648_288_144_146_648_2;

    #[test]
    fn entangled_ic_below_separable() {
        for k in [1u64, 2, 5, 10] {
            for z in [0.05, 0.3, 0.6, 0.9] {
                let e = logneg_pump_idler_vs_signal_entangled_ic(z, k, &pol()).unwrap();
                let s = logneg_pump_idler_vs_signal_separable_ic(z, k, &pol()).unwrap();
                assert!(e <= s + 1e-12, "k={k} z={z}");
            }
        }
        for z in [0.0, 0.4, 0.8] {
            let e = logneg_pump_idler_vs_signal_entangled_ic(z, 0, &pol()).unwrap();
            let s = logneg_pump_idler_vs_signal_separable_ic(z, 0, &pol()).unwrap();
            assert!((e - s).abs() < 1e-12);
        }
        assert_eq!(
            logneg_pump_idler_vs_signal_entangled_ic(0.0, 3, &pol()).unwrap(),
            0.0
        );
    }

    #[test]
    fn bs_zero_squeezing() {
        for th in [0.1, FRAC_PI_8, FRAC_PI_4, 1.2] {
            let e = logneg_bs_scattering(0.0, th, &pol()).unwrap();
            assert!((e - 2.0 * (th.cos() + th.sin()).log2()).abs() < 1e-12);
        }
        assert!((logneg_bs_scattering(0.0, FRAC_PI_4, &pol()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bs_transparent_and_reflective_are_separable() {
        for z in [0.0, 0.3, 0.8] {
            assert!(logneg_bs_scattering(z, 0.0, &pol()).unwrap().abs() < 1e-12);
            assert!(logneg_bs_scattering(z, FRAC_PI_2, &pol()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn bs_symmetric_about_quarter_pi() {
        let a = logneg_bs_scattering(0.5, FRAC_PI_8, &pol()).unwrap();
        let b = logneg_bs_scattering(0.5, 3.0 * FRAC_PI_8, &pol()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn bs_f0_matches_general_coefficients() {
        for n in 0..12 {
            for th in [0.0, 0.3, FRAC_PI_4, 1.1, FRAC_PI_2] {
                let f = crate::channel::bs_coefficients(n, 1, th).unwrap();
                for (k, fk) in f.iter().enumerate() {
                    assert!(
                        (fk.norm() - bs_f0_abs(k, n, th)).abs() < 1e-12,
                        "n={n} k={k} th={th}"
                    );
                }
            }
        }
    }

    #[test]
    fn information_identities() {
        let s = ModeSetup::new(20, 2).unwrap();
        let cfg = EvolutionConfig::new(vec![0.0, 1.0], TimeConvention::Unscaled).unwrap();
        let states = evolve_single_pair(s, &cfg).unwrap();
        let (i0, i3_0) = mutual_and_tripartite_info(&states[0]).unwrap();
        assert_eq!(i0, 0.0);
        assert_eq!(i3_0, 0.0);
        let (i, i3) = mutual_and_tripartite_info(&states[1]).unwrap();
        assert!(i3.abs() < 1e-10);
        let p = crate::fock::reduced_signal_dist(&states[1]).unwrap();
        assert!((i - crate::specfun::shannon_entropy_bits(&p)).abs() < 1e-10);
    }

    #[test]
    fn oracle_partial_transpose_of_bell_state() {
        use nalgebra::DMatrix;
        use num_complex::Complex64;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [h, 0.0, 0.0, h].map(|x| Complex64::new(x, 0.0));
        let rho = DMatrix::from_fn(4, 4, |r, c| psi[r] * psi[c].conj());
        assert!((oracle::logneg(&rho, 2, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_closed_forms_meet_oracle_at_zero_squeezing() {
        let c = [1.0];
        let (r, a, b) = oracle::pair_vs_pair(&c, &c);
        assert!((oracle::logneg(&r, a, b) - pair_vs_pair_from(&c, &c)).abs() < 1e-12);
        let ((sc, a1, b1), (pis, a2, b2)) = oracle::entangled_ic(&c, &c, 3);
        assert!(
            (oracle::logneg(&sc, a1, b1) - entangled_ic_signal_vs_spectator_from(&c, &c, true))
                .abs()
                < 1e-12
        );
        assert!(
            (oracle::logneg(&pis, a2, b2) - entangled_ic_pump_idler_vs_signal_from(&c, &c)).abs()
                < 1e-12
        );
        let (bs, a3, b3) = oracle::bs_scattering(&c, 0.7);
        assert!((oracle::logneg(&bs, a3, b3) - bs_scattering_from(&c, 0.7)).abs() < 1e-12);
    }
}
