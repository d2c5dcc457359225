//! Acceptance criteria 1 to 10. Each prints one PASS/FAIL line; the test
//! fails if any criterion fails.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture`.

use std::cell::{Cell, RefCell};
use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

use bhpdc::analytic::{
    crossover_z_star, crossover_z_star_first_order, f_of_z, fidelity_curve, z_star_limit, Branch,
    SqueezeTime,
};
use bhpdc::channel::{
    bs_coefficients, chi_theta_grid, graybody_ensemble, holevo_chi, holevo_chi_graybody,
    stimulated_dist, GrayBodyParams,
};
use bhpdc::dynamics::{
    detect_events, evolve_coherent_pump, evolve_single_pair, propagator_oracle, single_pair_series,
    EvolutionConfig,
};
use bhpdc::entanglement::{self as ent, oracle};
use bhpdc::fock::{ModeSetup, TimeConvention, TruncationPolicy};
use bhpdc::specfun::gamma_ratio_g;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let t0 = Instant::now();
    let mut v = f();
    let dt = t0.elapsed();
    v.pass &= dt < limit;
    v.detail = format!("{} runtime={:.2?} (limit {:?})", v.detail, dt, limit);
    v
}

fn c1_crossover() -> Verdict {
    timed(Duration::from_secs(1), || {
        let z = z_star_limit();
        let big = ModeSetup::new(1 << 40, 0).unwrap();
        let first = crossover_z_star_first_order(&big).unwrap();
        // the exact root is reported, not judged: its large-pump limit is not the closed constant
        let exact = crossover_z_star(&big).unwrap();
        verdict(
            within(z, 0.506407, 1e-5) && within(first, 0.506407, 1e-5),
            format!("z*_limit={z:.7} first_order(n_p0=2^40)={first:.7} exact_root(n_p0=2^40)={exact:.7}"),
        )
    })
}

fn c2_logneg() -> Verdict {
    timed(Duration::from_secs(10), || {
        let pol = TruncationPolicy::default();
        let mut worst_short: f64 = 0.0;
        for tau in [0.5, 1.0, 2.0] {
            let z = SqueezeTime::from_tau(tau).unwrap().z;
            let e = ent::logneg_pump_idler_vs_signal_z(z, 0, Branch::Short, &pol).unwrap();
            worst_short = worst_short.max((e - 2.0 * tau / LN_2).abs());
        }
        let z5 = SqueezeTime::from_tau(5.0).unwrap().z;
        let offset =
            ent::logneg_pump_idler_vs_signal_z(z5, 0, Branch::Long, &pol).unwrap() - 10.0 / LN_2;
        let mut worst_pair: f64 = 0.0;
        for k in 0..=18 {
            let z = 0.05 * k as f64;
            let s = ent::logneg_pair_vs_pair_vacuum(z, Branch::Short).unwrap();
            let l = ent::logneg_pair_vs_pair_vacuum(z, Branch::Long).unwrap();
            worst_pair = worst_pair
                .max((s - ((1.0 + z) / (1.0 - z)).log2()).abs())
                .max((l - (1.0 + 2.0 * f_of_z(z).unwrap()).log2()).abs());
        }
        verdict(
            worst_short < 1e-9 && within(offset, -0.53236, 1e-3) && worst_pair < 1e-9,
            format!(
                "short_dev={worst_short:.1e} offset(tau=5)={offset:.5} pair_dev={worst_pair:.1e}"
            ),
        )
    })
}

fn c3_holevo() -> Verdict {
    // the long branch only applies past the crossover; at z = 0 the capacity is the short one
    let exact0 = holevo_chi(0.0, Branch::Short).unwrap() == 1.0
        && holevo_chi(0.0, Branch::Combined).unwrap() == 1.0;
    let zs = z_star_limit();
    let at_star =
        (holevo_chi(zs, Branch::Short).unwrap() - holevo_chi(zs, Branch::Long).unwrap()).abs();
    let zt = 1.0 - 1e-6;
    let terminal =
        (holevo_chi(zt, Branch::Short).unwrap() - holevo_chi(zt, Branch::Long).unwrap()).abs();
    let mut worst_half_pi: f64 = 0.0;
    for k in 0..=99 {
        let z = 0.01 * k as f64;
        for b in [Branch::Short, Branch::Long] {
            worst_half_pi =
                worst_half_pi.max((holevo_chi_graybody(z, PI / 2.0, b).unwrap() - 1.0).abs());
        }
    }
    let pol = TruncationPolicy::default();
    let grid_zs: Vec<f64> = (0..=99).map(|k| 0.01 * k as f64).collect();
    let thetas: Vec<f64> = (0..=4).map(|k| k as f64 * PI / 8.0).collect();
    let grid = timed(Duration::from_secs(60), || {
        let mut ok = true;
        for b in [Branch::Short, Branch::Long] {
            let g = chi_theta_grid(&grid_zs, &thetas, b, &pol).unwrap();
            ok &= g.iter().flatten().all(|c| c.is_finite());
        }
        verdict(ok, format!("grid={}x{}x2", grid_zs.len(), thetas.len()))
    });
    verdict(
        exact0 && at_star < 1e-2 && terminal < 1e-3 && worst_half_pi < 1e-9 && grid.pass,
        format!(
            "chi(0)==1:{exact0} |dchi(z*)|={at_star:.2e} |dchi(1-1e-6)|={terminal:.2e} half_pi_dev={worst_half_pi:.1e} {}",
            grid.detail
        ),
    )
}

fn c4_fock_events() -> Verdict {
    timed(Duration::from_secs(300), || {
        let setup = ModeSetup::new(255, 0).unwrap();
        let cfg = EvolutionConfig::uniform(5.0, 0.01, TimeConvention::SinglePairScaled).unwrap();
        let series = single_pair_series(&evolve_single_pair(setup, &cfg).unwrap()).unwrap();
        let ev = detect_events(&series);
        let cross = ev.mean_crossing.unwrap_or(f64::NAN);
        let min = ev.pump_minimum.map_or(f64::NAN, |m| m.tau);
        let dep = ev.depletion_at_minimum.unwrap_or(f64::NAN);
        verdict(
            within(cross, 3.49, 0.05) && within(min, 4.39, 0.05) && within(dep, 0.80, 0.03),
            format!("mean_crossing={cross:.3} pump_minimum={min:.3} depletion={dep:.3}"),
        )
    })
}

fn c5_coherent_events() -> Verdict {
    timed(Duration::from_secs(600), || {
        let cfg = EvolutionConfig::uniform(1.0, 0.005, TimeConvention::Unscaled).unwrap();
        let run = evolve_coherent_pump(35.0, 0, &cfg).unwrap();
        let ev = detect_events(&run.series);
        let spread = ev.spread_crossing.unwrap_or(f64::NAN);
        let cross = ev.mean_crossing.unwrap_or(f64::NAN);
        let min = ev.pump_minimum.map_or(f64::NAN, |m| m.tau);
        verdict(
            within(spread, 0.34, 0.02) && within(cross, 0.41, 0.02) && within(min, 0.55, 0.02),
            format!("spread_crossing={spread:.3} mean_crossing={cross:.3} pump_minimum={min:.3}"),
        )
    })
}

fn c6_oracle() -> Verdict {
    timed(Duration::from_secs(120), || {
        let worst_dev = Cell::new(0.0f64);
        let worst_drift = Cell::new(0.0f64);
        let check = |np: u64, ns: u64, conv: TimeConvention| {
            let setup = ModeSetup::new(np, ns).unwrap();
            let mut cfg = EvolutionConfig::uniform(5.0, 0.5, conv).unwrap();
            cfg.atol = 1e-12;
            cfg.rtol = 1e-12;
            for st in evolve_single_pair(setup, &cfg).unwrap() {
                let o = propagator_oracle(setup, st.tau, conv).unwrap();
                for (a, b) in st.values.iter().zip(&o.values) {
                    worst_dev.set(worst_dev.get().max((a - b).norm()));
                }
                worst_drift.set(worst_drift.get().max(st.norm_drift()));
            }
        };
        // every pump occupation, then random seeds and conventions
        for np in 1..=30 {
            check(np, 0, TimeConvention::Unscaled);
        }
        let conv = prop_oneof![
            Just(TimeConvention::Unscaled),
            Just(TimeConvention::SinglePairScaled)
        ];
        let mut r = runner(48);
        let prop = r.run(&(1u64..=30, 0u64..=5, conv), |(np, ns, c)| {
            check(np, ns, c);
            Ok(())
        });
        let (worst_dev, worst_drift) = (worst_dev.get(), worst_drift.get());
        verdict(
            prop.is_ok() && worst_dev < 1e-8 && worst_drift < 1e-8,
            format!("max_amp_dev={worst_dev:.2e} max_drift={worst_drift:.2e}"),
        )
    })
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Short-branch amplitude magnitudes for seed `k`, cut at ten quanta.
fn small_amps(z: f64, k: u64) -> Vec<f64> {
    let pol = TruncationPolicy::default();
    let mut v = bhpdc::analytic::branch_amplitudes(z, k, Branch::Short, &pol)
        .unwrap()
        .magnitudes();
    v.truncate(11);
    unit(&v)
}

fn c7_entanglement_oracle() -> Verdict {
    let names = [
        "pump_idler_vs_signal",
        "signal_vs_idler",
        "pair_vs_pair",
        "signal_vs_spectator",
        "pump_idler_vs_signal_entangled_ic",
        "bs_scattering",
    ];
    let worst = RefCell::new([0.0f64; 6]);
    let mut r = runner(24);
    let _ = r.run(
        &(0.0f64..=0.6, 1u64..=3, 0.0f64..=PI / 2.0),
        |(z, k, theta)| {
            let c0 = small_amps(z, 0);
            let ck = small_amps(z, k);
            let l = c0.len().min(ck.len());
            let (c0, ck) = (unit(&c0[..l]), unit(&ck[..l]));
            let (rho, a, b) = oracle::pump_idler_vs_signal(&ck);
            let d0 = (oracle::logneg(&rho, a, b) - ent::pump_idler_vs_signal_from(&ck)).abs();
            let (rho, a, b) = oracle::signal_vs_idler(&ck);
            let d1 = oracle::logneg(&rho, a, b).abs();
            let (rho, a, b) = oracle::pair_vs_pair(&c0, &ck);
            let d2 = (oracle::logneg(&rho, a, b) - ent::pair_vs_pair_from(&c0, &ck)).abs();
            let ((sc, a1, b1), (pis, a2, b2)) = oracle::entangled_ic(&c0, &ck, k as usize);
            let d3 = (oracle::logneg(&sc, a1, b1)
                - ent::entangled_ic_signal_vs_spectator_from(&c0, &ck, true))
            .abs();
            let d4 = (oracle::logneg(&pis, a2, b2)
                - ent::entangled_ic_pump_idler_vs_signal_from(&c0, &ck))
            .abs();
            let (rho, a, b) = oracle::bs_scattering(&c0, theta);
            let d5 = (oracle::logneg(&rho, a, b) - ent::bs_scattering_from(&c0, theta)).abs();
            for (w, d) in worst.borrow_mut().iter_mut().zip([d0, d1, d2, d3, d4, d5]) {
                *w = w.max(d);
            }
            // keep sampling so every evaluator sees the whole range
            Ok(())
        },
    );
    let failing: Vec<String> = names
        .iter()
        .zip(worst.into_inner())
        .filter(|(_, w)| w.is_nan() || *w >= 1e-8)
        .map(|(n, w)| format!("{n}:{w:.2e}"))
        .collect();
    let passing = names.len() - failing.len();
    verdict(
        failing.is_empty(),
        format!(
            "{passing}/{} evaluators within 1e-8; failing [{}]",
            names.len(),
            failing.join(" ")
        ),
    )
}

fn c8_identities() -> Verdict {
    let worst_i3 = Cell::new(0.0f64);
    let mut r = runner(32);
    let prop = r.run(&(1u64..=60, 0u64..=4, 0.0f64..4.0), |(np, ns, tau)| {
        let setup = ModeSetup::new(np, ns).unwrap();
        let cfg = EvolutionConfig::new(vec![0.0, tau], TimeConvention::SinglePairScaled).unwrap();
        let st = evolve_single_pair(setup, &cfg).unwrap().pop().unwrap();
        let (_, i3) = ent::mutual_and_tripartite_info(&st).unwrap();
        worst_i3.set(worst_i3.get().max(i3.abs()));
        prop_assert!(i3.abs() < 1e-10);
        Ok(())
    });
    let worst_i3 = worst_i3.get();
    let mut worst_gb: f64 = 0.0;
    for i in 0..=20 {
        for j in 0..=20 {
            let p = GrayBodyParams::new(i as f64 * PI / 40.0, 0.15 * j as f64).unwrap();
            worst_gb = worst_gb.max(p.identity_residual().abs());
        }
    }
    let mut worst_bs: f64 = 0.0;
    for theta in [0.0, 0.1, PI / 8.0, 0.37, PI / 4.0, 1.2, PI / 2.0] {
        for n in 0..=16 {
            for n2 in 0..=16 - n {
                let s: f64 = bs_coefficients(n, n2, theta)
                    .unwrap()
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum();
                worst_bs = worst_bs.max((s - 1.0).abs());
            }
        }
    }
    let worst_g = (1..=10_000)
        .map(|n| {
            let n = n as f64;
            ((gamma_ratio_g(n - 1.0) * gamma_ratio_g(n) - n) / n).abs()
        })
        .fold(0.0f64, f64::max);
    verdict(
        prop.is_ok() && worst_i3 < 1e-10 && worst_gb < 1e-12 && worst_bs < 1e-12 && worst_g < 1e-12,
        format!("i3={worst_i3:.1e} graybody={worst_gb:.1e} bs_unitarity={worst_bs:.1e} g_rel={worst_g:.1e}"),
    )
}

fn c9_fidelity() -> Verdict {
    let zs: Vec<f64> = (0..100).map(|k| 0.99 * k as f64 / 99.0).collect();
    let curve = fidelity_curve(&zs, 0, &TruncationPolicy::default()).unwrap();
    let zstar = z_star_limit();
    let flat = curve
        .iter()
        .filter(|(z, _)| *z <= zstar)
        .all(|(_, f)| *f == 1.0);
    let after: Vec<f64> = curve
        .iter()
        .filter(|(z, _)| *z > zstar)
        .map(|(_, f)| *f)
        .collect();
    let decreasing =
        after.first().is_some_and(|f| *f < 1.0) && after.windows(2).all(|w| w[1] < w[0]);
    verdict(
        flat && decreasing,
        format!(
            "points={} flat_to_z*={flat} strictly_decreasing_after={decreasing} F(0.99)={:.4}",
            curve.len(),
            after.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn c10_graybody() -> Verdict {
    let pol = TruncationPolicy::default();
    let mut worst: f64 = 0.0;
    for z in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9] {
        let e = graybody_ensemble(z, 0.0, &pol).unwrap();
        let geo = |n: usize| (1.0 - z) * z.powi(n as i32);
        for d in [&e.dist_s_0, &e.dist_s_1, &e.dist_sbar_0] {
            for (n, p) in d.weights().iter().enumerate() {
                worst = worst.max((p - geo(n)).abs());
            }
        }
        // one stimulating quantum: total occupation m = n + 1
        let stim = stimulated_dist(z, 1, &pol).unwrap();
        for (m, p) in e.dist_sbar_1.weights().iter().enumerate() {
            let direct = if m == 0 {
                0.0
            } else {
                m as f64 * (1.0 - z).powi(2) * z.powi(m as i32 - 1)
            };
            let via = if m == 0 {
                0.0
            } else {
                stim.weights().get(m - 1).copied().unwrap_or(0.0)
            };
            worst = worst.max((p - direct).abs()).max((p - via).abs());
        }
    }
    let e_bs = ent::logneg_bs_scattering(0.0, PI / 4.0, &pol).unwrap();
    verdict(
        worst < 1e-10 && within(e_bs, 1.0, 1e-10),
        format!("theta0_dev={worst:.1e} E_BS(0,pi/4)={e_bs:.12}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("crossover constant", c1_crossover),
        ("log-negativity closed forms", c2_logneg),
        ("holevo capacity", c3_holevo),
        ("fock pump events", c4_fock_events),
        ("coherent pump events", c5_coherent_events),
        ("ode vs propagator oracle", c6_oracle),
        ("entanglement oracle", c7_entanglement_oracle),
        ("structural identities", c8_identities),
        ("fidelity curve", c9_fidelity),
        ("gray-body reductions", c10_graybody),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        println!(
            "{} criterion {:>2} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
