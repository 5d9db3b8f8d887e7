//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//! Runs as a plain binary (no libtest harness) so the lines always reach stdout.

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twohop_core::deterministic::{iid_large_l, k1_matrix, k2_matrix, outage_probability, trace_identities};
use twohop_core::fixed_point::{iid_m_f, iid_m_g, residuals_system1, solution_bounds, Kernel};
use twohop_core::linalg::CMat;
use twohop_core::model::build_correlation;
use twohop_core::model::power::PowerModel;
use twohop_core::montecarlo::{averaged_esd, convergence_study, ks_chi2_2, mahalanobis_sq, run_mc};
use twohop_core::spectrum::{default_grid, default_offset, lsd_density};
use twohop_core::{analyze, Analysis, CorrelationSet, HermitianPsd, IidParams, SolverOptions, SystemParams};

type Outcome = Result<(bool, String), String>;

const SEED: u64 = 20240611;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// ρ^|i−j| e^{iθ(i−j)}: positive definite for |ρ| < 1.
fn exp_correlation(n: usize, rho: f64, theta: f64) -> HermitianPsd {
    let m = CMat::from_fn(n, n, |i, j| {
        let d = i as f64 - j as f64;
        Complex64::from_polar(rho.powf(d.abs()), theta * d)
    });
    HermitianPsd::new(m).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> HermitianPsd {
    match rng.random_range(0..4) {
        0 => HermitianPsd::identity(n),
        1 => exp_correlation(n, rng.random_range(0.0..0.9), rng.random_range(-1.0..1.0)),
        2 => {
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
            HermitianPsd::diagonal(&d).unwrap()
        }
        _ => build_correlation(rng.random_range(0.0..45.0), rng.random_range(2.0..20.0), rng.random_range(0.3..1.0), n)
            .unwrap(),
    }
}

fn random_config(rng: &mut ChaCha8Rng) -> (CorrelationSet, SystemParams) {
    let mut dim = || rng.random_range(2..=64usize);
    let (n, l, m) = (dim(), dim(), dim());
    let corr = CorrelationSet::new(
        random_matrix(rng, n),
        random_matrix(rng, l),
        random_matrix(rng, l),
        random_matrix(rng, m),
    )
    .unwrap();
    let z = 10f64.powf(rng.random_range(-1.0..1.0));
    let p = SystemParams::new(n, l, m, rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), z).unwrap();
    (corr, p)
}

fn random_analyses(count: usize, seed: u64) -> Vec<(CorrelationSet, SystemParams, Result<Analysis, String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (corr, p) = random_config(&mut rng);
            let a = analyze(&corr, &p, &SolverOptions::default()).map_err(|e| e.to_string());
            (corr, p, a)
        })
        .collect()
}

fn c1_residuals(configs: &[(CorrelationSet, SystemParams, Result<Analysis, String>)], secs: f64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    let mut failed = 0;
    for (corr, p, a) in configs {
        let Ok(a) = a else {
            failed += 1;
            continue;
        };
        let x = a.system1.as_array();
        let r = residuals_system1(corr, p, &a.system1).map_err(|e| e.to_string())?;
        for k in 0..4 {
            worst = worst.max(r[k] / x[k].abs().max(1.0));
        }
        let k = Kernel::new(corr);
        let (t, tb) = (a.system2.tau, a.system2.tau_bar);
        worst = worst.max((t - k.tau(p.z, p.s_under, tb)).abs() / t.max(1.0));
        worst = worst.max((tb - k.tau_bar(p.s_under, t)).abs() / tb.max(1.0));
        if !solution_bounds(corr, p).contains(x) {
            outside += 1;
        }
    }
    let pass = failed == 0 && outside == 0 && worst <= 1e-10 && secs < 30.0;
    Ok((pass, format!("{} configs, {failed} unconverged, max residual {worst:.2e}, {outside} outside brackets, {secs:.1} s", configs.len())))
}

fn c2_iid() -> Outcome {
    let mut worst_d: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for (n, l, m) in [(16, 16, 16), (16, 32, 24)] {
        let corr = CorrelationSet::identity(n, l, m);
        let iid = IidParams::from_dims(n, l, m).unwrap();
        let k = Kernel::new(&corr);
        for s1 in [0.0, 0.25, 1.0, 2.0, 4.0] {
            for s2 in [0.1, 0.5, 1.0, 2.0, 10.0] {
                let sol = k.solve_system1(s1, s2, &SolverOptions::default()).map_err(|e| e.to_string())?;
                let tau = k.solve_system2(s1, s2, 1e-14, 100_000).map_err(|e| e.to_string())?.tau;
                let mf = iid_m_f(&iid, s1, s2, 1e-15).map_err(|e| e.to_string())?;
                let mg = iid_m_g(iid.c1, s1, s2).map_err(|e| e.to_string())?;
                worst_d = worst_d.max((sol.delta - iid.c1 * mf).abs());
                worst_t = worst_t.max((tau - iid.c1 * mg).abs());
            }
        }
    }
    Ok((worst_d <= 1e-8 && worst_t <= 1e-10, format!("max |δ − c₁m_F| = {worst_d:.2e}, max |τ − c₁m_G| = {worst_t:.2e}")))
}

fn c3_identities(configs: &[(CorrelationSet, SystemParams, Result<Analysis, String>)]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (_, p, a) in configs {
        let Ok(a) = a else { continue };
        let f = &a.functionals;
        let s1 = &a.system1;
        let (d, wu) = trace_identities(f, s1, p);
        worst = worst
            .max(rel(k1_matrix(f, s1, p).determinant(), f.delta_v1))
            .max(rel(k2_matrix(f, p).determinant(), f.delta_v2))
            .max(rel(d, s1.delta))
            .max(rel(wu, s1.omega_under));
        checked += 1;
    }
    Ok((worst <= 1e-9 && checked > 0, format!("{checked} configs, worst relative mismatch {worst:.2e}")))
}

fn unit_params(n: usize) -> SystemParams {
    SystemParams::new(n, n, n, 1.0, 1.0, 1.0).unwrap()
}

fn c4_mean() -> Outcome {
    let t = Instant::now();
    let (corr, p) = (CorrelationSet::identity(32, 32, 32), unit_params(32));
    let gm = analyze(&corr, &p, &SolverOptions::default()).map_err(|e| e.to_string())?.model;
    let mc = run_mc(&corr, &p, 20_000, SEED, 0).map_err(|e| e.to_string())?;
    let z1 = (mc.mean[0] - gm.mean_i1).abs() / mc.stderr[0];
    let z2 = (mc.mean[1] - gm.mean_i2).abs() / mc.stderr[1];
    let secs = t.elapsed().as_secs_f64();
    Ok((z1 <= 3.0 && z2 <= 3.0 && secs < 120.0, format!("I₁ gap {z1:.2} SE, I₂ gap {z2:.2} SE, {secs:.1} s")))
}

fn c5_rate() -> Outcome {
    let t = Instant::now();
    let p = SystemParams::new(8, 8, 8, 4.0, 4.0, 0.01).unwrap();
    let study = convergence_study(&|n| Ok(CorrelationSet::identity(n, n, n)), &p, &[8, 16, 32, 64], 100_000, SEED, 0)
        .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let pts: Vec<String> = study
        .points
        .iter()
        .map(|pt| format!("N={} gap {:.2e}±{:.1e}{}", pt.n, pt.mean_error, pt.mean_se, if pt.mean_reliable { "" } else { " (excluded)" }))
        .collect();
    let Some(fit) = study.mean_fit else {
        return Ok((false, format!("fewer than two reliable points: {}", pts.join(", "))));
    };
    let pass = (-1.4..=-0.6).contains(&fit.slope) && secs < 900.0;
    Ok((pass, format!("slope {:.3} over {} points [{}], {secs:.0} s", fit.slope, fit.points, pts.join(", "))))
}

fn c6_covariance() -> Outcome {
    let (corr, p) = (CorrelationSet::identity(32, 32, 32), unit_params(32));
    let v = analyze(&corr, &p, &SolverOptions::default()).map_err(|e| e.to_string())?.model.v;
    let mc = run_mc(&corr, &p, 100_000, SEED + 1, 0).map_err(|e| e.to_string())?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            num += (mc.cov[i][j] - v[i][j]).powi(2);
            den += v[i][j].powi(2);
        }
    }
    let ratio = (num / den).sqrt();
    let configs = random_analyses(100, SEED + 2);
    let mut not_pd = 0;
    let mut min_eig = f64::INFINITY;
    for (_, _, a) in &configs {
        match a {
            Ok(a) => {
                let e = a.model.min_eigenvalue();
                min_eig = min_eig.min(e);
                if !(e > 0.0) {
                    not_pd += 1;
                }
            }
            Err(_) => not_pd += 1,
        }
    }
    Ok((
        ratio <= 0.10 && not_pd == 0,
        format!("‖Cov − V‖/‖V‖ = {ratio:.4}; V positive definite on {}/100 (min eigenvalue {min_eig:.2e})", 100 - not_pd),
    ))
}

fn c7_gaussianity() -> Outcome {
    let (corr, p) = (CorrelationSet::identity(64, 64, 64), unit_params(64));
    let gm = analyze(&corr, &p, &SolverOptions::default()).map_err(|e| e.to_string())?.model;
    let mc = run_mc(&corr, &p, 10_000, SEED + 3, 0).map_err(|e| e.to_string())?;
    let ks = ks_chi2_2(&mahalanobis_sq(&mc, &gm).map_err(|e| e.to_string())?);
    Ok((ks <= 0.02, format!("KS distance {ks:.4}")))
}

fn c8_outage() -> Outcome {
    let corr = CorrelationSet::identity(32, 32, 32);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for snr_db in [0.0, 10.0, 20.0] {
        let sigma = 10f64.powf(-snr_db / 10.0);
        let p = SystemParams::new(32, 32, 32, sigma, sigma, sigma).unwrap();
        let gm = analyze(&corr, &p, &SolverOptions::default()).map_err(|e| e.to_string())?.model;
        let mc = run_mc(&corr, &p, 50_000, SEED + 4, 0).map_err(|e| e.to_string())?;
        let mut mi: Vec<f64> = mc.samples.as_ref().unwrap().iter().map(|s| s[0] - s[1]).collect();
        mi.sort_by(f64::total_cmp);
        let n = mi.len() as f64;
        let mut gap: f64 = 0.0;
        for (i, &x) in mi.iter().enumerate() {
            let f = outage_probability(&gm, x).map_err(|e| e.to_string())?;
            gap = gap.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
        }
        parts.push(format!("{snr_db} dB: {gap:.4}"));
        worst = worst.max(gap);
    }
    Ok((worst <= 0.03, format!("max CDF gap {worst:.4} ({})", parts.join(", "))))
}

fn c9_spectrum() -> Outcome {
    let t = Instant::now();
    let corr = CorrelationSet::identity(150, 600, 450);
    let mut pass = true;
    let mut parts = Vec::new();
    for s_bar in [0.0, 2.0] {
        let grid = default_grid(&corr, s_bar, 400);
        let lsd = lsd_density(&corr, s_bar, &grid, default_offset(&corr, s_bar)).map_err(|e| e.to_string())?;
        let range = (grid[0], grid[grid.len() - 1]);
        let esd = averaged_esd(&corr, s_bar, 50, SEED + 5, 100, Some(range), 0).map_err(|e| e.to_string())?;
        let l1 = lsd.l1_distance(&esd);
        pass &= (0.97..=1.01).contains(&lsd.mass) && l1 <= 0.08;
        parts.push(format!("s̄={s_bar}: mass {:.4}, L1 {l1:.4}", lsd.mass));
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((pass && secs < 180.0, format!("{}, {secs:.1} s", parts.join("; "))))
}

fn c10_degenerate() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut i1_far: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    for _ in 0..5 {
        let (corr, p) = random_config(&mut rng);
        let a = analyze(&corr, &p.with_s(p.s_bar, 0.0), &SolverOptions::default()).map_err(|e| e.to_string())?;
        worst = worst
            .max(a.model.mean_i2.abs())
            .max((a.functionals.delta_c - 1.0).abs())
            .max((a.functionals.delta_v2 - 1.0).abs());
        let far = analyze(&corr, &p.with_z(1e8), &SolverOptions::default()).map_err(|e| e.to_string())?;
        i1_far = i1_far.max(far.model.mean_i1.abs());
    }
    Ok((
        worst <= f64::EPSILON && i1_far <= 1e-5,
        format!("s̲=0: max deviation {worst:.1e}; z=1e8: max |Ī₁| {i1_far:.2e}"),
    ))
}

fn c11_large_l() -> Outcome {
    let (s1, s2) = (1.0, 1.0);
    let p = SystemParams::new(16, 4096, 16, s1, s1, s2).unwrap();
    let full = analyze(&CorrelationSet::identity(16, 4096, 16), &p, &SolverOptions::default())
        .map_err(|e| e.to_string())?
        .model
        .mean_mi();
    let lim = iid_large_l(1.0, 16.0, s1, s2).map_err(|e| e.to_string())?.mean;
    let gap = rel(full, lim);

    let pm = PowerModel::default();
    let snr_db = 50.0;
    let ls = [4usize, 16, 64, 256, 1024, 4096];
    let mut curve = Vec::new();
    for &l in &ls {
        let p = pm.params(16, l, 16, snr_db).map_err(|e| e.to_string())?;
        curve.push(analyze(&pm.identity_set(16, l, 16), &p, &SolverOptions::default()).map_err(|e| e.to_string())?.model.mean_mi());
    }
    let peak = (0..curve.len()).max_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap();
    let rises = curve[..=peak].windows(2).all(|w| w[1] > w[0]);
    let falls = curve[peak..].windows(2).all(|w| w[1] < w[0]);
    let interior = peak > 0 && peak + 1 < curve.len();
    let shape = interior && rises && falls;
    Ok((
        gap <= 0.02 && shape,
        format!(
            "L=4096 relative gap {gap:.2e}; power-model sweep peaks at L={} ({:.2} vs {:.2} at L={} and {:.2} at L={})",
            ls[peak], curve[peak], curve[0], ls[0], curve[curve.len() - 1], ls[ls.len() - 1]
        ),
    ))
}

fn c12_reproducible() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"dims":{"n":12,"l":16,"m":10},
            "noise":{"sigma1_sq_bar":0.5,"sigma1_sq_under":0.5,"sigma2_sq":0.5},
            "correlation":{"r1":{"model":{"eta_deg":15,"delta_c_deg":8,"d_s":0.5}}},
            "mc":{"samples":3000,"seed":99}}"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |workers: usize, tag: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let raw = dir.path().join(format!("raw_{tag}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_twohop"))
            .args(["--config", cfg.to_str().unwrap(), "--workers", &workers.to_string(), "mc", "--raw", raw.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
        Ok((o.stdout, std::fs::read(raw).map_err(|e| e.to_string())?))
    };
    let reference = run(1, "ref")?;
    let mut identical = run(1, "again")? == reference;
    for w in [4, 8] {
        identical &= run(w, &w.to_string())? == reference;
    }
    Ok((identical, format!("report and raw CSV byte-identical across repeated runs and workers {{1, 4, 8}}: {identical}")))
}

fn main() {
    let t = Instant::now();
    let configs = random_analyses(50, SEED);
    let c1_secs = t.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("fixed-point residuals and brackets", Box::new(|| c1_residuals(&configs, c1_secs))),
        ("i.i.d. equivalence", Box::new(c2_iid)),
        ("structural identities", Box::new(|| c3_identities(&configs))),
        ("mean accuracy", Box::new(c4_mean)),
        ("O(1/N) mean rate", Box::new(c5_rate)),
        ("covariance accuracy", Box::new(c6_covariance)),
        ("Gaussianity", Box::new(c7_gaussianity)),
        ("outage", Box::new(c8_outage)),
        ("spectrum", Box::new(c9_spectrum)),
        ("degenerate exactness", Box::new(c10_degenerate)),
        ("large-L limit", Box::new(c11_large_l)),
        ("reproducibility", Box::new(c12_reproducible)),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!pass);
        println!("criterion {:>2} {}: {name} — {detail}", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
