//! Command-line front end. Every command produces one table written as CSV
//! (with `#` metadata lines) or JSON, plus a config echo on stderr.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analytic::{
    combined_mean, crossover_z_star, fidelity, longtime_mean_of_z, shorttime_mean, z_star_limit,
    Branch, EllipticSchedule, SqueezeTime,
};
use crate::channel::{
    bs_coefficients, component_entropies, holevo_chi, holevo_chi_first_principles,
};
use crate::dynamics::{
    detect_events, evolve_coherent_pump, evolve_single_pair, evolve_two_pair, propagator_oracle,
    single_pair_series, two_pair_series, EvolutionConfig, ObservableSeries,
};
use crate::entanglement::{self as ent, oracle};
use crate::error::{Error, Result};
use crate::fock::{ModeSetup, TimeConvention, TruncationPolicy};
use crate::page::{
    divisors, effective_dimensions, page_entropy_information, page_information_dynamic,
    thermal_entropy_bits, PagePair, PAGE_TOTAL_DIM,
};
use crate::specfun::shannon_entropy_bits;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Short,
    Long,
    #[default]
    Combined,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Short => Branch::Short,
            BranchArg::Long => Branch::Long,
            BranchArg::Combined => Branch::Combined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Integrate the amplitude equations and report observables and events.
    Evolve,
    /// Short/long/combined means, crossover and fidelity over a z grid.
    Analytic,
    /// Log-negativity curves over a z grid.
    Logneg,
    /// Holevo capacity and component entropies over a z grid.
    Holevo,
    /// Gray-body capacity χ(z, θ).
    Graybody,
    /// Page entropy over the divisors of 291600, or I(τ) with --dynamic.
    Page,
    /// Run the oracle-equivalence suite and print a pass/fail table.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Analytic => "analytic",
            Command::Logneg => "logneg",
            Command::Holevo => "holevo",
            Command::Graybody => "graybody",
            Command::Page => "page",
            Command::Selftest => "selftest",
        }
    }
}

/// Flags and config-file entries share this shape; unset fields fall through.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Initial pump occupation (Fock pump).
    #[arg(long, global = true)]
    pub np0: Option<u64>,
    /// Signal seed occupation.
    #[arg(long, global = true)]
    pub ns0: Option<u64>,
    /// Anti-signal seed; switches evolve to the two-pair model.
    #[arg(long, global = true)]
    pub nsbar0: Option<u64>,
    /// Mean of the coherent pump.
    #[arg(long, global = true)]
    pub alpha_sq: Option<f64>,
    /// Coherent pump with mean `alpha_sq`.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub coherent: Option<bool>,
    /// `a:b:step`, inclusive.
    #[arg(long, global = true)]
    pub z_grid: Option<String>,
    /// Comma-separated angles; `pi/8`, `3pi/8` and plain numbers accepted.
    #[arg(long, global = true)]
    pub theta: Option<String>,
    /// Last sample time.
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    /// Sample spacing.
    #[arg(long, global = true)]
    pub dtau: Option<f64>,
    /// Probability mass allowed outside every truncation.
    #[arg(long, global = true)]
    pub tail_eps: Option<f64>,
    /// Which closed-form branch to tabulate.
    #[arg(long, global = true, value_enum)]
    pub branch: Option<BranchArg>,
    /// Page: tabulate I(τ) from an evolution instead of the divisor curve.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub dynamic: Option<bool>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Reserved; every computation here is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(
    name = "bhpdc",
    version,
    about = "Pair production with a depletable quantized pump"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file with any of the flag fields; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

/// Effective configuration after precedence resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub np0: u64,
    pub ns0: u64,
    pub nsbar0: Option<u64>,
    pub alpha_sq: f64,
    pub coherent: bool,
    pub z_grid: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau_max: f64,
    pub dtau: f64,
    pub tail_eps: f64,
    pub branch: BranchArg,
    pub dynamic: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn resolve(command: Command, flags: &Overrides, file: &Overrides) -> Result<Self> {
        macro_rules! pick {
            ($f:ident, $d:expr) => {
                flags.$f.clone().or(file.$f.clone()).unwrap_or($d)
            };
        }
        let z_grid = parse_grid(&pick!(z_grid, "0:0.95:0.05".to_string()))?;
        let theta = parse_angles(&pick!(theta, "0,pi/8,pi/4,3pi/8,pi/2".to_string()))?;
        let cfg = Self {
            command,
            np0: pick!(np0, 255),
            ns0: pick!(ns0, 0),
            nsbar0: flags.nsbar0.or(file.nsbar0),
            alpha_sq: pick!(alpha_sq, 35.0),
            coherent: pick!(coherent, false),
            z_grid,
            theta,
            tau_max: pick!(tau_max, 5.0),
            dtau: pick!(dtau, 0.01),
            tail_eps: pick!(tail_eps, 1e-12),
            branch: pick!(branch, BranchArg::Combined),
            dynamic: pick!(dynamic, false),
            out: flags.out.clone().or(file.out.clone()),
            format: pick!(format, Format::Csv),
            seed: flags.seed.or(file.seed),
        };
        cfg.policy()?;
        if cfg.np0 == 0 && !cfg.coherent {
            return Err(Error::Config {
                field: "np0",
                reason: "must be at least 1".into(),
            });
        }
        Ok(cfg)
    }

    pub fn policy(&self) -> Result<TruncationPolicy> {
        let p = TruncationPolicy {
            tail_epsilon: self.tail_eps,
            ..TruncationPolicy::default()
        };
        p.validate()?;
        Ok(p)
    }

    /// Canonical JSON (sorted keys).
    pub fn canonical(&self) -> String {
        let v: Value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// `a:b:step`, both ends included within rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::Config {
        field: "z_grid",
        reason,
    };
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("{p:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else {
        return Err(bad(format!("expected a:b:step, got {s:?}")));
    };
    if !(step > 0.0 && b >= a) {
        return Err(bad(format!("need step > 0 and b >= a in {s:?}")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let k = match num.trim().strip_suffix("pi")? {
        "" => 1.0,
        k => k.trim_end_matches('*').parse::<f64>().ok()?,
    };
    Some(k * PI / den)
}

pub fn parse_angles(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            parse_angle(t).ok_or_else(|| Error::Config {
                field: "theta",
                reason: format!("cannot read angle {t:?}"),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// output

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: BTreeMap<String, Value>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn write(&self, cfg: &RunConfig, w: impl Write) -> Result<()> {
        match cfg.format {
            Format::Csv => self.write_csv(cfg, w),
            Format::Json => self.write_json(cfg, w),
        }
    }

    fn write_csv(&self, cfg: &RunConfig, mut w: impl Write) -> Result<()> {
        let io_err = |source| Error::Io {
            path: cfg.out.clone().unwrap_or_else(|| "<stdout>".into()),
            source,
        };
        writeln!(w, "# bhpdc {VERSION} {}", cfg.command.name()).map_err(io_err)?;
        writeln!(w, "# config_sha256 {}", cfg.hash()).map_err(io_err)?;
        for (k, v) in &self.meta {
            writeln!(w, "# {k} {v}").map_err(io_err)?;
        }
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| io_err(io::Error::other(e));
        out.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|x| format!("{x:.12e}")))
                .map_err(csv_err)?;
        }
        out.flush().map_err(io_err)
    }

    fn write_json(&self, cfg: &RunConfig, mut w: impl Write) -> Result<()> {
        let v = json!({
            "version": VERSION,
            "command": cfg.command.name(),
            "config_sha256": cfg.hash(),
            "meta": self.meta,
            "columns": self.columns,
            "rows": self.rows,
        });
        // Value maps are BTreeMaps, so keys come out sorted
        let s = serde_json::to_string_pretty(&v).expect("table serializes");
        writeln!(w, "{s}").map_err(|source| Error::Io {
            path: cfg.out.clone().unwrap_or_else(|| "<stdout>".into()),
            source,
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------------------
// commands

fn evolution_series(cfg: &RunConfig) -> Result<ObservableSeries> {
    let policy = cfg.policy()?;
    if cfg.coherent {
        let mut ec = EvolutionConfig::uniform(cfg.tau_max, cfg.dtau, TimeConvention::Unscaled)?;
        ec.policy = policy;
        return Ok(evolve_coherent_pump(cfg.alpha_sq, cfg.ns0, &ec)?.series);
    }
    if let Some(nb) = cfg.nsbar0 {
        let setup = ModeSetup::two_pair(cfg.np0, cfg.ns0, nb)?;
        let mut ec =
            EvolutionConfig::uniform(cfg.tau_max, cfg.dtau, TimeConvention::TwoPairScaled)?;
        ec.policy = policy;
        return two_pair_series(&evolve_two_pair(setup, &ec)?);
    }
    let setup = ModeSetup::new(cfg.np0, cfg.ns0)?;
    let mut ec = EvolutionConfig::uniform(cfg.tau_max, cfg.dtau, TimeConvention::SinglePairScaled)?;
    ec.policy = policy;
    single_pair_series(&evolve_single_pair(setup, &ec)?)
}

fn cmd_evolve(cfg: &RunConfig) -> Result<(Table, Option<Value>)> {
    let s = evolution_series(cfg)?;
    let mut t = Table::new(&[
        "tau",
        "nbar_s",
        "nbar_p",
        "var_s",
        "var_p",
        "entropy_s_bits",
        "norm_drift",
    ]);
    for i in 0..s.tau.len() {
        t.rows.push(vec![
            s.tau[i],
            s.nbar_s[i],
            s.nbar_p[i],
            s.var_s[i],
            s.var_p[i],
            s.entropy_s[i],
            s.norm_drift[i],
        ]);
    }
    let events = serde_json::to_value(detect_events(&s)).expect("events serialize");
    Ok((t, Some(events)))
}

fn cmd_analytic(cfg: &RunConfig) -> Result<Table> {
    let policy = cfg.policy()?;
    let setup = ModeSetup::new(cfg.np0, cfg.ns0)?;
    let sched = EllipticSchedule::new(&setup);
    let mut t = Table::new(&[
        "z",
        "tau",
        "mean_short",
        "mean_long",
        "mean_combined",
        "fidelity",
    ]);
    t.meta.insert("z_star_limit".into(), json!(z_star_limit()));
    t.meta
        .insert("z_star".into(), json!(crossover_z_star(&setup)?));
    t.meta.insert("t_q".into(), json!(sched.t_q));
    t.meta.insert("k_e".into(), json!(sched.k_e));
    for &z in &cfg.z_grid {
        t.rows.push(vec![
            z,
            SqueezeTime::from_z(z)?.tau,
            shorttime_mean(z, cfg.ns0),
            longtime_mean_of_z(z, cfg.ns0)?,
            combined_mean(z, cfg.ns0)?,
            fidelity(z, cfg.ns0, &policy)?,
        ]);
    }
    Ok(t)
}

fn cmd_logneg(cfg: &RunConfig) -> Result<Table> {
    let policy = cfg.policy()?;
    let nb = cfg.nsbar0.unwrap_or(0);
    let mut cols: Vec<String> = [
        "z",
        "pump_idler_vs_signal_short",
        "pump_idler_vs_signal_long",
        "pair_vs_pair_short",
        "pair_vs_pair_long",
        "signal_vs_idler",
        "signal_vs_spectator",
        "pump_idler_vs_signal_entangled_ic",
        "pump_idler_vs_signal_separable_ic",
    ]
    .map(String::from)
    .to_vec();
    cols.extend(cfg.theta.iter().map(|th| format!("bs_theta_{th:.6}")));
    let mut t = Table {
        columns: cols,
        ..Default::default()
    };
    for &z in &cfg.z_grid {
        let mut row = vec![
            z,
            ent::logneg_pump_idler_vs_signal_z(z, cfg.ns0, Branch::Short, &policy)?,
            ent::logneg_pump_idler_vs_signal_z(z, cfg.ns0, Branch::Long, &policy)?,
            ent::logneg_pair_vs_pair(z, cfg.ns0, nb, Branch::Short, &policy)?,
            ent::logneg_pair_vs_pair(z, cfg.ns0, nb, Branch::Long, &policy)?,
            0.0,
            ent::logneg_entangled_ic(z, cfg.ns0, &policy)?,
            ent::logneg_pump_idler_vs_signal_entangled_ic(z, cfg.ns0, &policy)?,
            ent::logneg_pump_idler_vs_signal_separable_ic(z, cfg.ns0, &policy)?,
        ];
        for &th in &cfg.theta {
            row.push(ent::logneg_bs_scattering(z, th, &policy)?);
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn cmd_holevo(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&[
        "z",
        "chi_short",
        "chi_long",
        "chi_combined",
        "entropy_k0_bits",
        "entropy_k1_bits",
    ]);
    t.meta.insert(
        "chi_terminal".into(),
        json!(crate::channel::holevo_chi_terminal()),
    );
    for &z in &cfg.z_grid {
        let (s0, s1) = component_entropies(z)?;
        t.rows.push(vec![
            z,
            holevo_chi(z, Branch::Short)?,
            holevo_chi(z, Branch::Long)?,
            holevo_chi(z, Branch::Combined)?,
            s0,
            s1,
        ]);
    }
    Ok(t)
}

fn cmd_graybody(cfg: &RunConfig) -> Result<Table> {
    let policy = cfg.policy()?;
    let branch: Branch = cfg.branch.into();
    let mut cols = vec!["z".to_string()];
    cols.extend(cfg.theta.iter().map(|th| format!("chi_theta_{th:.6}")));
    let mut t = Table {
        columns: cols,
        ..Default::default()
    };
    let grid = crate::channel::chi_theta_grid(&cfg.z_grid, &cfg.theta, branch, &policy)?;
    for (j, &z) in cfg.z_grid.iter().enumerate() {
        let mut row = vec![z];
        row.extend(grid.iter().map(|r| r[j]));
        t.rows.push(row);
    }
    Ok(t)
}

fn cmd_page(cfg: &RunConfig) -> Result<Table> {
    if cfg.dynamic {
        let s = evolution_series(cfg)?;
        let info = page_information_dynamic(&s.signal);
        let mut t = Table::new(&[
            "tau",
            "info_bits",
            "entropy_thermal_bits",
            "entropy_s_bits",
            "d_popescu_s",
            "d_variance_s",
            "d_variance_p",
        ]);
        for (i, p) in s.signal.iter().enumerate() {
            let (dp, dv) = effective_dimensions(p);
            t.rows.push(vec![
                s.tau[i],
                info[i],
                thermal_entropy_bits(p.mean_and_variance().0),
                shannon_entropy_bits(p),
                dp,
                dv,
                1.0 + s.var_p[i].sqrt(),
            ]);
        }
        return Ok(t);
    }
    let mut t = Table::new(&["ln_m", "m", "n", "entropy_nats", "information_nats"]);
    for m in divisors(PAGE_TOTAL_DIM) {
        let n = PAGE_TOTAL_DIM / m;
        let (s, i) = page_entropy_information(PagePair::new(m, n)?)?;
        t.rows.push(vec![(m as f64).ln(), m as f64, n as f64, s, i]);
    }
    Ok(t)
}

/// One oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

/// The oracle-equivalence suite behind `selftest`.
pub fn oracle_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |name: String, deviation: f64, tolerance: f64| {
        out.push(Check {
            name,
            deviation,
            tolerance,
        })
    };
    let policy = TruncationPolicy::default();

    for np in [1u64, 5, 12, 30] {
        let setup = ModeSetup::new(np, 1)?;
        let mut ec = EvolutionConfig::uniform(5.0, 0.5, TimeConvention::Unscaled)?;
        // the comparison is at 1e-8, so the stepper runs well below it
        ec.atol = 1e-12;
        ec.rtol = 1e-12;
        let states = evolve_single_pair(setup, &ec)?;
        let mut dev: f64 = 0.0;
        let mut drift: f64 = 0.0;
        for st in &states {
            let o = propagator_oracle(setup, st.tau, TimeConvention::Unscaled)?;
            for (a, b) in st.values.iter().zip(&o.values) {
                dev = dev.max((a - b).norm());
            }
            drift = drift.max(st.norm_drift());
        }
        push(format!("ode_vs_propagator_np0_{np}"), dev, 1e-8);
        push(format!("unitarity_np0_{np}"), drift, 1e-8);
    }

    for (z, k) in [(0.2, 1u64), (0.45, 3), (0.6, 2)] {
        let trunc = |seed| -> Result<Vec<f64>> {
            let mut v =
                crate::analytic::branch_amplitudes(z, seed, Branch::Short, &policy)?.magnitudes();
            v.truncate(10);
            Ok(v)
        };
        let (c0, ck) = (trunc(0)?, trunc(k)?);
        let l = c0.len().min(ck.len());
        let norm = |v: &[f64]| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let (c0, ck) = (norm(&c0[..l]), norm(&ck[..l]));
        let tag = format!("z{z}_k{k}");

        let (r, a, b) = oracle::pump_idler_vs_signal(&ck);
        push(
            format!("pump_idler_vs_signal_{tag}"),
            (oracle::logneg(&r, a, b) - ent::pump_idler_vs_signal_from(&ck)).abs(),
            1e-8,
        );
        let (r, a, b) = oracle::signal_vs_idler(&ck);
        push(
            format!("signal_vs_idler_{tag}"),
            oracle::logneg(&r, a, b).abs(),
            1e-8,
        );
        let (r, a, b) = oracle::pair_vs_pair(&c0, &ck);
        push(
            format!("pair_vs_pair_{tag}"),
            (oracle::logneg(&r, a, b) - ent::pair_vs_pair_from(&c0, &ck)).abs(),
            1e-8,
        );
        let ((sc, a1, b1), (pis, a2, b2)) = oracle::entangled_ic(&c0, &ck, k as usize);
        push(
            format!("signal_vs_spectator_{tag}"),
            (oracle::logneg(&sc, a1, b1)
                - ent::entangled_ic_signal_vs_spectator_from(&c0, &ck, true))
            .abs(),
            1e-8,
        );
        push(
            format!("pump_idler_vs_signal_entangled_ic_{tag}"),
            (oracle::logneg(&pis, a2, b2) - ent::entangled_ic_pump_idler_vs_signal_from(&c0, &ck))
                .abs(),
            1e-8,
        );
        let (r, a, b) = oracle::bs_scattering(&c0, PI / 4.0);
        push(
            format!("bs_scattering_{tag}"),
            (oracle::logneg(&r, a, b) - ent::bs_scattering_from(&c0, PI / 4.0)).abs(),
            1e-8,
        );
    }

    for z in [0.2, 0.5, 0.9] {
        let a = holevo_chi(z, Branch::Short)?;
        let b = holevo_chi_first_principles(z, Branch::Short, &policy)?;
        push(format!("holevo_dual_path_z{z}"), (a - b).abs(), 1e-9);
    }

    let mut worst: f64 = 0.0;
    for n in 0..=8 {
        for n2 in 0..=8 {
            let s: f64 = bs_coefficients(n, n2, 0.37)?
                .iter()
                .map(|c| c.norm_sqr())
                .sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    push("bs_unitarity".into(), worst, 1e-12);
    push(
        "z_star_limit".into(),
        (z_star_limit() - 0.506407).abs(),
        1e-5,
    );
    Ok(out)
}

fn cmd_selftest() -> Result<(Table, bool)> {
    let checks = oracle_suite()?;
    let mut all = true;
    let mut stdout = io::stdout().lock();
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        all &= c.passed();
        let _ = writeln!(
            stdout,
            "{status}  {:<48} dev={:.3e} tol={:.0e}",
            c.name, c.deviation, c.tolerance
        );
    }
    let mut t = Table::new(&["deviation", "tolerance", "passed"]);
    for c in &checks {
        t.rows.push(vec![
            c.deviation,
            c.tolerance,
            if c.passed() { 1.0 } else { 0.0 },
        ]);
    }
    t.meta.insert(
        "checks".into(),
        json!(checks.iter().map(|c| c.name.clone()).collect::<Vec<_>>()),
    );
    Ok((t, all))
}

/// Run one resolved configuration, writing to `cfg.out` or stdout.
pub fn execute(cfg: &RunConfig) -> Result<bool> {
    let mut ok = true;
    let (table, events) = match cfg.command {
        Command::Evolve => cmd_evolve(cfg)?,
        Command::Analytic => (cmd_analytic(cfg)?, None),
        Command::Logneg => (cmd_logneg(cfg)?, None),
        Command::Holevo => (cmd_holevo(cfg)?, None),
        Command::Graybody => (cmd_graybody(cfg)?, None),
        Command::Page => (cmd_page(cfg)?, None),
        Command::Selftest => {
            let (t, all) = cmd_selftest()?;
            ok = all;
            if cfg.out.is_none() {
                return Ok(ok);
            }
            (t, None)
        }
    };
    match &cfg.out {
        Some(path) => {
            let mut buf = Vec::new();
            table.write(cfg, &mut buf)?;
            write_file(path, &buf)?;
            if let Some(ev) = events {
                let ev_path = path.with_extension("events.json");
                let s = serde_json::to_string_pretty(&ev).expect("events serialize");
                write_file(&ev_path, format!("{s}\n").as_bytes())?;
            }
        }
        None => {
            table.write(cfg, io::stdout().lock())?;
            if let Some(ev) = events {
                eprintln!(
                    "events {}",
                    serde_json::to_string(&ev).expect("events serialize")
                );
            }
        }
    }
    Ok(ok)
}

fn load_config(path: &Path) -> Result<Overrides> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        field: "config",
        reason: format!("{}: {e}", path.display()),
    })
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = (|| -> Result<bool> {
        let file = match &cli.config {
            Some(p) => load_config(p)?,
            None => Overrides::default(),
        };
        let cfg = RunConfig::resolve(cli.command, &cli.overrides, &file)?;
        eprintln!("config {}", cfg.canonical());
        execute(&cfg)
    })();
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
