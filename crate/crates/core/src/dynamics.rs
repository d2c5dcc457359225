//! Exact amplitude dynamics of the trilinear Hamiltonian.
//!
//! In the logical basis the Hamiltonian is real symmetric with nearest
//! neighbour couplings. Writing `c = (−i)^{n(+m)} a` turns `i ċ = H c` into
//! the real system `ȧ_i = Σ_j K_ij a_j` with `K` antisymmetric, which is what
//! the integrator advances. The coupling graph is stored as an edge list so
//! the single- and two-pair problems share one right-hand side.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    truncation_length, AmplitudeState, Layout, ModeSetup, Origin, ProbDist, TimeConvention,
    TriangularIndex, TruncationPolicy,
};
use crate::specfun::entropy_bits;

/// Largest basis handled by the dense oracle.
pub const ORACLE_MAX_DIM: usize = 501;

/// Single-pair runs above this size get an automatic index cap.
const AUTO_CAP_SINGLE: usize = 4096;
/// Two-pair triangles above this many cells get an automatic index cap.
const AUTO_CAP_PAIR: usize = 1_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub atol: f64,
    pub rtol: f64,
    pub tau_grid: Vec<f64>,
    pub convention: TimeConvention,
    pub policy: TruncationPolicy,
    /// Largest logical index kept per pair; `None` keeps the full domain
    /// unless it is very large.
    pub index_cap: Option<usize>,
    pub max_steps: usize,
}

impl EvolutionConfig {
    pub fn new(tau_grid: Vec<f64>, convention: TimeConvention) -> Result<Self> {
        let cfg = Self {
            atol: 1e-10,
            rtol: 1e-10,
            tau_grid,
            convention,
            policy: TruncationPolicy::default(),
            index_cap: None,
            max_steps: 50_000_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grid `0, dτ, 2dτ, …` up to and including `tau_max` (within rounding).
    pub fn uniform(tau_max: f64, dtau: f64, convention: TimeConvention) -> Result<Self> {
        if !(dtau > 0.0 && tau_max >= 0.0) {
            return Err(Error::Config {
                field: "dtau",
                reason: format!("need dtau > 0 and tau_max >= 0, got {dtau}, {tau_max}"),
            });
        }
        let steps = (tau_max / dtau + 1e-9).floor() as usize;
        Self::new((0..=steps).map(|k| k as f64 * dtau).collect(), convention)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return Err(Error::Config {
                field: "tolerance",
                reason: "atol and rtol must be positive".into(),
            });
        }
        if self.tau_grid.first() != Some(&0.0) {
            return Err(Error::Config {
                field: "tau_grid",
                reason: "must start at 0".into(),
            });
        }
        if self.tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config {
                field: "tau_grid",
                reason: "must be strictly increasing".into(),
            });
        }
        self.policy.validate()
    }
}

// ---------------------------------------------------------------------------
// coupling graph

/// Upper-triangle entries `H_ij = w` (i < j) of a real symmetric Hamiltonian.
#[derive(Debug, Clone)]
pub struct Couplings {
    pub dim: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Couplings {
    /// `A_n = √(n_p0 − n) · √((n+1)(2κ + n))`, `n = 0..len−1`.
    pub fn single_pair(setup: &ModeSetup, len: usize) -> Self {
        let np = setup.n_p0 as f64;
        let two_kappa = 2.0 * setup.kappa();
        let edges = (0..len.saturating_sub(1))
            .map(|n| {
                let nf = n as f64;
                (
                    n,
                    n + 1,
                    (np - nf).sqrt() * ((nf + 1.0) * (two_kappa + nf)).sqrt(),
                )
            })
            .collect();
        Self { dim: len, edges }
    }

    /// Couplings on the triangular grid; both hops carry `√(n_p0 − n − m)`.
    pub fn two_pair(setup: &ModeSetup, ix: &TriangularIndex) -> Self {
        let np = setup.n_p0 as f64;
        let (tk, tkb) = (2.0 * setup.kappa(), 2.0 * setup.kappa_bar());
        let mut edges = Vec::new();
        for (n, m, k) in ix.cells() {
            let pump = (np - (n + m) as f64).sqrt();
            let (nf, mf) = (n as f64, m as f64);
            if let Some(j) = ix.index(n + 1, m) {
                edges.push((k, j, pump * ((nf + 1.0) * (tk + nf)).sqrt()));
            }
            if let Some(j) = ix.index(n, m + 1) {
                edges.push((k, j, pump * ((mf + 1.0) * (tkb + mf)).sqrt()));
            }
        }
        Self {
            dim: ix.len(),
            edges,
        }
    }

    pub fn max_row_sum(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for &(i, j, w) in &self.edges {
            rows[i] += w.abs();
            rows[j] += w.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `ȧ = K a` in the gauged real variables.
    fn apply(&self, a: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for &(i, j, w) in &self.edges {
            out[i] -= w * a[j];
            out[j] += w * a[i];
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, w) in &self.edges {
            h[(i, j)] = w;
            h[(j, i)] = w;
        }
        h
    }
}

/// `(−i)^k`.
pub fn minus_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn gauge_orders(layout: &Layout, dim: usize) -> Vec<usize> {
    match layout {
        Layout::Single => (0..dim).collect(),
        Layout::Pair(ix) => {
            let mut o = vec![0; dim];
            for (n, m, k) in ix.cells() {
                o[k] = n + m;
            }
            o
        }
    }
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Dopri5<'a> {
    sys: &'a Couplings,
    atol: f64,
    rtol: f64,
    h: f64,
    steps: usize,
    max_steps: usize,
    k: [Vec<f64>; 7],
    y1: Vec<f64>,
    tmp: Vec<f64>,
    fsal_ready: bool,
}

impl<'a> Dopri5<'a> {
    fn new(sys: &'a Couplings, atol: f64, rtol: f64, max_steps: usize) -> Self {
        let d = sys.dim;
        let scale = sys.max_row_sum().max(1e-300);
        Self {
            sys,
            atol,
            rtol,
            h: 0.1 / scale,
            steps: 0,
            max_steps,
            k: std::array::from_fn(|_| vec![0.0; d]),
            y1: vec![0.0; d],
            tmp: vec![0.0; d],
            fsal_ready: false,
        }
    }

    /// Advance `y` from `t0` to `t1`; on failure returns the time reached.
    fn advance(&mut self, y: &mut [f64], t0: f64, t1: f64) -> std::result::Result<(), f64> {
        let d = y.len();
        let mut t = t0;
        if !self.fsal_ready {
            self.sys.apply(y, &mut self.k[0]);
            self.fsal_ready = true;
        }
        while t < t1 {
            if self.steps >= self.max_steps {
                return Err(t);
            }
            let last = t + self.h >= t1;
            let h = if last { t1 - t } else { self.h };
            if h <= 1e-15 * t.abs().max(1e-300) {
                return Err(t);
            }
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let tmp = &mut self.tmp;
            for i in 0..d {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            self.sys.apply(tmp, k2);
            for i in 0..d {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            self.sys.apply(tmp, k3);
            for i in 0..d {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            self.sys.apply(tmp, k4);
            for i in 0..d {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            self.sys.apply(tmp, k5);
            for i in 0..d {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            self.sys.apply(tmp, k6);
            for i in 0..d {
                self.y1[i] = y[i]
                    + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            self.sys.apply(&self.y1, k7);
            let mut err = 0.0;
            for i in 0..d {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(self.y1[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / d as f64).sqrt();
            self.steps += 1;
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                y.copy_from_slice(&self.y1);
                t = if last { t1 } else { t + h };
                std::mem::swap(k1, k7);
                // keep the natural step size when the last step was clipped
                if !last || h >= self.h {
                    self.h = h * fac;
                }
            } else {
                self.h = h * fac.min(1.0);
            }
        }
        Ok(())
    }
}

fn integrate_on_grid(
    setup: ModeSetup,
    cfg: &EvolutionConfig,
    sys: &Couplings,
    layout: Layout,
) -> Result<Vec<AmplitudeState>> {
    cfg.validate()?;
    let mut y = vec![0.0; sys.dim];
    y[0] = 1.0;
    let orders = gauge_orders(&layout, sys.dim);
    let mut solver = Dopri5::new(sys, cfg.atol, cfg.rtol, cfg.max_steps);
    let mut out = Vec::with_capacity(cfg.tau_grid.len());
    let mut t_prev = 0.0;
    for &tau in &cfg.tau_grid {
        let t = cfg.convention.t_prime(tau, &setup);
        if t > t_prev {
            solver
                .advance(&mut y, t_prev, t)
                .map_err(|t_reached| Error::StepUnderflow {
                    tau: t_reached * cfg.convention.scale(&setup),
                })?;
            t_prev = t;
        }
        out.push(AmplitudeState {
            setup,
            tau,
            convention: cfg.convention,
            layout: layout.clone(),
            values: y
                .iter()
                .zip(&orders)
                .map(|(&a, &o)| minus_i_pow(o) * a)
                .collect(),
            origin: Origin::Numeric,
        });
    }
    Ok(out)
}

fn final_scaled_z(setup: &ModeSetup, cfg: &EvolutionConfig) -> f64 {
    let tau_end = *cfg.tau_grid.last().unwrap_or(&0.0);
    let t = cfg.convention.t_prime(tau_end, setup);
    (t * setup.total_scale().sqrt()).tanh().powi(2)
}

/// Index cap: explicit, or derived from the short-time tail at the final
/// time when the full domain is very large.
fn resolve_cap(
    setup: &ModeSetup,
    cfg: &EvolutionConfig,
    full_size: usize,
    threshold: usize,
) -> usize {
    let np = setup.n_p0 as usize;
    if let Some(c) = cfg.index_cap {
        return c.min(np);
    }
    if full_size <= threshold {
        return np;
    }
    let z = final_scaled_z(setup, cfg);
    match truncation_length(z, setup.n_s0.max(setup.n_sbar0.unwrap_or(0)), &cfg.policy) {
        Ok(len) => (2 * len + 16).min(np),
        Err(_) => np,
    }
}

/// Integrates `i dc_n/dt′ = A_n c_{n+1} + A_{n−1} c_{n−1}` from `c_n(0) = δ_{n,0}`.
pub fn evolve_single_pair(setup: ModeSetup, cfg: &EvolutionConfig) -> Result<Vec<AmplitudeState>> {
    let np = setup.n_p0 as usize;
    let cap = resolve_cap(&setup, cfg, np + 1, AUTO_CAP_SINGLE);
    let sys = Couplings::single_pair(&setup, cap + 1);
    integrate_on_grid(setup, cfg, &sys, Layout::Single)
}

/// Integrates the two-index recursion on the triangle `n + m ≤ n_p0`.
pub fn evolve_two_pair(setup: ModeSetup, cfg: &EvolutionConfig) -> Result<Vec<AmplitudeState>> {
    if !setup.is_two_pair() {
        return Err(Error::InvalidSetup(
            "two-pair evolution needs n_sbar0".into(),
        ));
    }
    let np = setup.n_p0 as usize;
    let full = (np + 1) * (np + 2) / 2;
    let cap = resolve_cap(&setup, cfg, full, AUTO_CAP_PAIR);
    let ix = TriangularIndex::new(np, cap);
    let sys = Couplings::two_pair(&setup, &ix);
    integrate_on_grid(setup, cfg, &sys, Layout::Pair(ix))
}

/// `c(τ) = V e^{−iΛt′} Vᵀ e₀` from the dense eigendecomposition of `H`.
pub fn propagator_oracle(
    setup: ModeSetup,
    tau: f64,
    convention: TimeConvention,
) -> Result<AmplitudeState> {
    let (sys, layout) = if setup.is_two_pair() {
        let np = setup.n_p0 as usize;
        let ix = TriangularIndex::new(np, np);
        (Couplings::two_pair(&setup, &ix), Layout::Pair(ix))
    } else {
        (
            Couplings::single_pair(&setup, setup.n_p0 as usize + 1),
            Layout::Single,
        )
    };
    if sys.dim > ORACLE_MAX_DIM {
        return Err(Error::DimensionGuard {
            dim: sys.dim,
            max: ORACLE_MAX_DIM,
        });
    }
    let t = convention.t_prime(tau, &setup);
    let eig = SymmetricEigen::new(sys.dense());
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phase = DVector::from_iterator(
        sys.dim,
        eig.eigenvalues
            .iter()
            .zip(eig.eigenvectors.row(0).iter())
            .map(|(&lam, &v0)| Complex64::from_polar(v0, -lam * t)),
    );
    let c = v * phase;
    Ok(AmplitudeState {
        setup,
        tau,
        convention,
        layout,
        values: c.iter().copied().collect(),
        origin: Origin::Numeric,
    })
}

// ---------------------------------------------------------------------------
// observables

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub tau: Vec<f64>,
    pub nbar_s: Vec<f64>,
    pub nbar_p: Vec<f64>,
    pub nbar_ibar: Vec<f64>,
    /// Two-pair anti-signal mean (equals the `i` mean).
    pub mbar_sbar: Option<Vec<f64>>,
    pub var_s: Vec<f64>,
    pub var_p: Vec<f64>,
    pub entropy_s: Vec<f64>,
    pub norm_drift: Vec<f64>,
    /// Signal distributions over the logical index (reporting-normalized).
    #[serde(skip)]
    pub signal: Vec<ProbDist>,
    /// Initial pump mean.
    pub pump0: f64,
}

impl ObservableSeries {
    /// Variance-based effective dimensions `1 + Δn`.
    pub fn d_eff_s(&self) -> Vec<f64> {
        self.var_s.iter().map(|v| 1.0 + v.sqrt()).collect()
    }

    pub fn d_eff_p(&self) -> Vec<f64> {
        self.var_p.iter().map(|v| 1.0 + v.sqrt()).collect()
    }

    fn push(&mut self, tau: f64, n_s0: f64, sig: ProbDist, pump: &ProbDist, drift: f64) {
        let (ms, vs) = sig.mean_and_variance();
        let (mp, vp) = pump.mean_and_variance();
        self.tau.push(tau);
        self.nbar_s.push(n_s0 + ms);
        self.nbar_ibar.push(ms);
        self.nbar_p.push(mp);
        self.var_s.push(vs);
        self.var_p.push(vp);
        self.entropy_s.push(entropy_bits(sig.weights()));
        self.norm_drift.push(drift);
        self.signal.push(sig);
    }
}

fn raw_probs(state: &AmplitudeState) -> Vec<f64> {
    state.values.iter().map(|c| c.norm_sqr()).collect()
}

/// Series for single-pair states. The pump distribution is the reflection
/// `p_p(n_p0 − n) = |c_n|²`, assembled independently of the signal one.
pub fn single_pair_series(states: &[AmplitudeState]) -> Result<ObservableSeries> {
    let mut s = ObservableSeries::default();
    for st in states {
        let np = st.setup.n_p0 as usize;
        let raw = raw_probs(st);
        let sig = ProbDist::renormalized(raw.clone(), Origin::Numeric)?;
        let pump = sig.reflected(np);
        s.pump0 = np as f64;
        s.push(st.tau, st.setup.n_s0 as f64, sig, &pump, st.norm_drift());
    }
    Ok(s)
}

/// Series for two-pair states: `s` and `s̄` marginals plus the pump
/// distribution over `n_p0 − n − m`.
pub fn two_pair_series(states: &[AmplitudeState]) -> Result<ObservableSeries> {
    let mut s = ObservableSeries::default();
    let mut mbar = Vec::new();
    for st in states {
        let Layout::Pair(ix) = &st.layout else {
            return Err(Error::InvalidSetup("expected a two-pair state".into()));
        };
        let np = st.setup.n_p0 as usize;
        let mut ps = vec![0.0; ix.rows()];
        let mut pm = vec![0.0; ix.cap.min(np) + 1];
        let mut pp = vec![0.0; np + 1];
        for (n, m, k) in ix.cells() {
            let w = st.values[k].norm_sqr();
            ps[n] += w;
            pm[m] += w;
            pp[np - n - m] += w;
        }
        let sig = ProbDist::renormalized(ps, Origin::Numeric)?;
        let anti = ProbDist::renormalized(pm, Origin::Numeric)?;
        let pump = ProbDist::renormalized(pp, Origin::Numeric)?;
        mbar.push(st.setup.n_sbar0.unwrap_or(0) as f64 + anti.mean_and_variance().0);
        s.pump0 = np as f64;
        s.push(st.tau, st.setup.n_s0 as f64, sig, &pump, st.norm_drift());
    }
    s.mbar_sbar = Some(mbar);
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sector {
    pub n_p0: u64,
    pub weight: f64,
    #[serde(skip)]
    pub states: Vec<AmplitudeState>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherentRun {
    pub alpha_sq: f64,
    pub sectors: Vec<Sector>,
    /// Poisson mass of the retained sectors before renormalization.
    pub retained_mass: f64,
    pub series: ObservableSeries,
}

fn ln_poisson(k: u64, alpha_sq: f64) -> f64 {
    -alpha_sq + k as f64 * alpha_sq.ln() - statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

/// Sectors `n_p0` grown symmetrically around the Poisson mode until the
/// retained mass reaches `1 − tail_epsilon`.
pub fn poisson_sectors(alpha_sq: f64, tail_epsilon: f64) -> (Vec<(u64, f64)>, f64) {
    let mode = alpha_sq.floor() as u64;
    let w = |k: u64| ln_poisson(k, alpha_sq).exp();
    let mut lo = mode;
    let mut hi = mode;
    let mut mass = w(mode);
    while mass < 1.0 - tail_epsilon {
        let below = if lo > 0 { w(lo - 1) } else { 0.0 };
        let above = w(hi + 1);
        if lo > 0 && below >= above {
            lo -= 1;
            mass += below;
        } else {
            hi += 1;
            mass += above;
        }
        if below == 0.0 && above == 0.0 {
            break;
        }
    }
    ((lo..=hi).map(|k| (k, w(k))).collect(), mass)
}

/// Pump in a coherent state: independent Fock sectors with Poisson weights,
/// aggregated as diagonal mixtures. The time variable is taken as given by
/// `cfg.convention` for every sector.
pub fn evolve_coherent_pump(
    alpha_sq: f64,
    n_s0: u64,
    cfg: &EvolutionConfig,
) -> Result<CoherentRun> {
    if !(alpha_sq > 0.0 && alpha_sq.is_finite()) {
        return Err(Error::InvalidSetup(format!(
            "alpha_sq = {alpha_sq} must be positive"
        )));
    }
    cfg.validate()?;
    let (sectors, mass) = poisson_sectors(alpha_sq, cfg.policy.tail_epsilon);
    let evolved: Vec<Result<Sector>> = sectors
        .par_iter()
        .map(|&(k, weight)| {
            let states = if k == 0 {
                Vec::new()
            } else {
                evolve_single_pair(ModeSetup::new(k, n_s0)?, cfg)?
            };
            Ok(Sector {
                n_p0: k,
                weight: weight / mass,
                states,
            })
        })
        .collect();
    let sectors: Vec<Sector> = evolved.into_iter().collect::<Result<_>>()?;

    let top = sectors.iter().map(|s| s.n_p0 as usize).max().unwrap_or(0);
    let mut series = ObservableSeries {
        pump0: alpha_sq,
        ..Default::default()
    };
    for (i, &tau) in cfg.tau_grid.iter().enumerate() {
        let mut sig = vec![0.0; top + 1];
        let mut pump = vec![0.0; top + 1];
        let mut drift: f64 = 0.0;
        for sec in &sectors {
            if sec.n_p0 == 0 {
                sig[0] += sec.weight;
                pump[0] += sec.weight;
                continue;
            }
            let st = &sec.states[i];
            let k = sec.n_p0 as usize;
            let norm = st.norm_sqr();
            drift = drift.max((norm - 1.0).abs());
            for (n, c) in st.values.iter().enumerate() {
                let w = sec.weight * c.norm_sqr() / norm;
                sig[n] += w;
                pump[k - n] += w;
            }
        }
        let sig = ProbDist::renormalized(sig, Origin::Numeric)?;
        let pump = ProbDist::renormalized(pump, Origin::Numeric)?;
        series.push(tau, n_s0 as f64, sig, &pump, drift);
    }
    Ok(CoherentRun {
        alpha_sq,
        sectors,
        retained_mass: mass,
        series,
    })
}

// ---------------------------------------------------------------------------
// events

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub tau: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    /// `n̄_p = n̄_s`.
    pub mean_crossing: Option<f64>,
    /// `Δn_p = Δn_s` (equal variance-based effective dimensions).
    pub spread_crossing: Option<f64>,
    /// First minimum of `n̄_p` (`dn̄_p/dτ = 0`).
    pub pump_minimum: Option<Extremum>,
    /// Fraction of the initial pump mean transferred at the pump minimum.
    pub depletion_at_minimum: Option<f64>,
    /// Model valid only while `dn̄_p/dτ ≤ 0`: up to the first pump minimum.
    pub validity_horizon: Option<f64>,
}

/// Fritsch–Carlson monotone slopes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    d
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// First sign change of `f`, ignoring values within `zero_band` of zero,
/// located on the monotone cubic interpolant.
pub fn first_crossing(x: &[f64], f: &[f64], zero_band: f64) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let sign = |v: f64| {
        if v > zero_band {
            1
        } else if v < -zero_band {
            -1
        } else {
            0
        }
    };
    let d = pchip_slopes(x, f);
    let mut last: Option<(usize, i32)> = None;
    for i in 0..x.len() {
        let s = sign(f[i]);
        if s == 0 {
            continue;
        }
        if let Some((j, sj)) = last {
            if sj != s {
                // bracket [j, i]; refine inside the interval where the sign flips
                let mut k = j;
                while k + 1 < i && sign(f[k + 1]) != s {
                    k += 1;
                }
                let (mut a, mut b) = (x[k], x[k + 1]);
                let fa = f[k];
                let eval = |t: f64| hermite(x[k], x[k + 1], f[k], f[k + 1], d[k], d[k + 1], t);
                for _ in 0..80 {
                    let c = 0.5 * (a + b);
                    if (eval(c) > 0.0) == (fa > 0.0) {
                        a = c;
                    } else {
                        b = c;
                    }
                }
                return Some(0.5 * (a + b));
            }
        }
        last = Some((i, s));
    }
    None
}

/// First interior local minimum, refined by the vertex of the parabola
/// through the three bracketing samples.
pub fn first_minimum(x: &[f64], y: &[f64]) -> Option<Extremum> {
    for i in 1..y.len().saturating_sub(1) {
        if y[i] <= y[i - 1] && y[i] < y[i + 1] {
            let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            let d01 = (y1 - y0) / (x1 - x0);
            let d12 = (y2 - y1) / (x2 - x1);
            let a = (d12 - d01) / (x2 - x0);
            let b = d01 - a * (x0 + x1);
            let xv = (-b / (2.0 * a)).clamp(x0, x2);
            let yv = y0 + (xv - x0) * (d01 + a * (xv - x1));
            return Some(Extremum { tau: xv, value: yv });
        }
    }
    None
}

/// Crossing and extremum times of a series.
pub fn detect_events(series: &ObservableSeries) -> EventReport {
    let x = &series.tau;
    let scale = 1.0 + series.pump0.abs();
    let mean_diff: Vec<f64> = series
        .nbar_p
        .iter()
        .zip(&series.nbar_s)
        .map(|(p, s)| p - s)
        .collect();
    let spread_diff: Vec<f64> = series
        .var_p
        .iter()
        .zip(&series.var_s)
        .map(|(p, s)| p.sqrt() - s.sqrt())
        .collect();
    let pump_minimum = first_minimum(x, &series.nbar_p);
    let depletion_at_minimum = pump_minimum.map(|e| 1.0 - e.value / series.pump0);
    EventReport {
        mean_crossing: first_crossing(x, &mean_diff, 1e-9 * scale),
        spread_crossing: first_crossing(x, &spread_diff, 1e-7 * scale.sqrt()),
        pump_minimum,
        depletion_at_minimum,
        validity_horizon: pump_minimum.map(|e| e.tau),
    }
}
