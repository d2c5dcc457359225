//! Special functions and numeric primitives.
//!
//! Elliptic convention: everything here takes the *parameter* `m` (so that
//! `dn² + m·sn² = 1`), never the modulus `k = √m`. The model's `k_e` is a
//! parameter in this sense and is built in exactly one place,
//! [`EllipticModulus::from_setup`].

use std::f64::consts::{FRAC_PI_2, LN_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fock::{ModeSetup, ProbDist};

/// Elliptic parameter `m = k_e ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticModulus {
    m: f64,
}

impl EllipticModulus {
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::OutOfRange {
                name: "k_e",
                value: m,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self { m })
    }

    /// `k_e = n_p0 / (n_p0 + n_s0 + 1)` for a single pair, or
    /// `n_p0 / (n_p0 + n_s0 + n_sbar0 + 2)` when the anti-signal mode is present.
    /// Always strictly below 1.
    pub fn from_setup(setup: &ModeSetup) -> Self {
        let seed = setup.seed_occupation();
        let np = setup.n_p0 as f64;
        Self {
            m: np / (np + seed),
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Complementary parameter `1 − m`, computed without cancellation when
    /// built from a setup.
    pub fn complement(&self) -> f64 {
        1.0 - self.m
    }
}

// ---------------------------------------------------------------------------
// g(n)

/// `ln[Γ(x+½)/Γ(x)]` for `x ≥ 10` by its asymptotic series.
fn ln_half_ratio_asymptotic(x: f64) -> f64 {
    let y = 1.0 / x;
    let y2 = y * y;
    // odd-order coefficients (2^-k - 2) B_{k+1} (-1)^{k+1} / (k (k+1))
    let series = y
        * (-1.0 / 8.0
            + y2 * (1.0 / 192.0
                + y2 * (-1.0 / 640.0
                    + y2 * (17.0 / 14336.0 + y2 * (-31.0 / 18432.0 + y2 * (691.0 / 180224.0))))));
    0.5 * x.ln() + series
}

/// `Γ(x+½)/Γ(x)` for `x > 0`.
pub fn half_gamma_ratio(x: f64) -> f64 {
    let mut x = x;
    let mut scale = 1.0;
    // R(x) = R(x+1) x / (x+½)
    while x < 10.0 {
        scale *= x / (x + 0.5);
        x += 1.0;
    }
    scale * ln_half_ratio_asymptotic(x).exp()
}

/// `g(n) = √2 Γ(1+n/2) / Γ(½+n/2)`.
///
/// Evaluated as a single log-gamma difference (asymptotic series plus upward
/// recurrence) so that `g(n−1) g(n) = n` holds to ~1e−15 well past n = 10⁴.
pub fn gamma_ratio_g(n: f64) -> f64 {
    debug_assert!(n >= 0.0);
    std::f64::consts::SQRT_2 * half_gamma_ratio(0.5 + 0.5 * n)
}

// ---------------------------------------------------------------------------
// binomials

/// `ln C(n, k)` for real arguments.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// `ln C(k + n, n)`, exact product for small `min(k, n)`.
pub fn ln_choose_plus(k: u64, n: u64) -> f64 {
    let (lo, hi) = if k < n { (k, n) } else { (n, k) };
    if lo <= 64 {
        let hi = hi as f64;
        (1..=lo).map(|j| (hi / j as f64).ln_1p()).sum()
    } else {
        ln_binomial((k + n) as f64, n as f64)
    }
}

// ---------------------------------------------------------------------------
// Jacobi elliptic functions

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl Jacobi {
    pub fn sd(&self) -> f64 {
        self.sn / self.dn
    }
}

/// sn, cn, dn at parameter `m` by the descending Landen / AGM scheme.
pub fn jacobi(u: f64, m: f64) -> Jacobi {
    if m <= 0.0 {
        return Jacobi {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        };
    }
    if m >= 1.0 {
        let sech = 1.0 / u.cosh();
        return Jacobi {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    let mut a = [0.0f64; 32];
    let mut c = [0.0f64; 32];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = (1.0 - m).sqrt();
    let mut n = 0;
    while c[n].abs() > f64::EPSILON * a[n] && n < 31 {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    let mut phi_prev = phi;
    for j in (1..=n).rev() {
        phi_prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if n == 0 {
        1.0
    } else {
        cn / (phi_prev - phi).cos()
    };
    Jacobi { sn, cn, dn }
}

pub fn jacobi_cn(u: f64, k: EllipticModulus) -> f64 {
    jacobi(u, k.m).cn
}

pub fn jacobi_sn(u: f64, k: EllipticModulus) -> f64 {
    jacobi(u, k.m).sn
}

pub fn jacobi_dn(u: f64, k: EllipticModulus) -> f64 {
    jacobi(u, k.m).dn
}

pub fn jacobi_sd(u: f64, k: EllipticModulus) -> f64 {
    jacobi(u, k.m).sd()
}

// ---------------------------------------------------------------------------
// elliptic integrals

/// Carlson's symmetric integral `R_F(x, y, z)`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        let a = (x + y + z) / 3.0;
        let dx = 1.0 - x / a;
        let dy = 1.0 - y / a;
        let dz = 1.0 - z / a;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0)
                / a.sqrt();
        }
    }
}

/// Complete integral `K(m)`.
pub fn elliptic_k(m: f64) -> f64 {
    if m >= 1.0 {
        return f64::INFINITY;
    }
    carlson_rf(0.0, 1.0 - m, 1.0)
}

/// Incomplete integral `F(φ | m)` for `φ ∈ [0, π/2]`.
pub fn elliptic_f(phi: f64, m: f64) -> f64 {
    if phi >= FRAC_PI_2 {
        return elliptic_k(m);
    }
    let (s, c) = phi.sin_cos();
    s * carlson_rf(c * c, 1.0 - m * s * s, 1.0)
}

/// `u(θ) = ∫₀^θ dθ′ / √(n_p0 sin²θ′ + n_s0 + 1)`.
///
/// Uses `sin θ = √(A/N) sd(√N u | k_e)` with `A = n_s0 + 1`, `N = n_p0 + A`,
/// inverted through `sd = s ⇔ sn² = s²/(1 + m s²)` and `F(φ | m)`.
pub fn elliptic_u_of_theta(theta: f64, setup: &ModeSetup) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            lo: 0.0,
            hi: FRAC_PI_2,
        });
    }
    let a = setup.seed_occupation();
    let b = setup.n_p0 as f64;
    let n = a + b;
    let s2 = theta.sin().powi(2);
    let sn2 = (s2 * n / (a + b * s2)).min(1.0);
    let phi = sn2.sqrt().asin();
    let m = EllipticModulus::from_setup(setup).m;
    Ok(elliptic_f(phi, m) / n.sqrt())
}

/// Inverse of [`elliptic_u_of_theta`] on `[0, K(k_e)/√N]`.
pub fn theta_of_u(u: f64, setup: &ModeSetup) -> f64 {
    let a = setup.seed_occupation();
    let n = a + setup.n_p0 as f64;
    let k = EllipticModulus::from_setup(setup);
    let s = (a / n).sqrt() * jacobi_sd(n.sqrt() * u, k);
    s.clamp(-1.0, 1.0).asin()
}

// ---------------------------------------------------------------------------
// quadrature

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

fn gk_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return k;
    }
    let c = 0.5 * (a + b);
    gk_adaptive(f, a, c, 0.5 * tol, depth - 1) + gk_adaptive(f, c, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    gk_adaptive(&f, a, b, abs_tol, 40)
}

// ---------------------------------------------------------------------------
// entropy and fidelity

#[inline]
pub fn neg_xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits of raw weights, without validation.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    weights.iter().map(|&p| neg_xlog2x(p)).sum()
}

/// `−Σ pₙ log₂ pₙ`.
pub fn shannon_entropy_bits(p: &ProbDist) -> f64 {
    entropy_bits(p.weights())
}

/// Entropy of raw weights after checking sign and normalization.
pub fn shannon_entropy_bits_checked(weights: &[f64]) -> Result<f64> {
    let p = ProbDist::new(weights.to_vec(), crate::fock::Origin::Numeric)?;
    Ok(shannon_entropy_bits(&p))
}

/// `Σ √(pₙ qₙ)`; both distributions are diagonal in the same basis.
pub fn bhattacharyya_fidelity(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    let (a, b) = (p.weights(), q.weights());
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x * y).sqrt())
        .sum::<f64>()
        .min(1.0))
}

pub const BITS_PER_NAT: f64 = 1.0 / LN_2;
