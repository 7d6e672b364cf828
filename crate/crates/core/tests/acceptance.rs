//! Acceptance criteria 1–9, one PASS/FAIL line each.
//!
//! Run with `cargo test -p ssgmix --test acceptance`. Every criterion is
//! evaluated even if an earlier one fails; a summary line closes the report.

mod common;

use std::time::Instant;

use common::{gaussian_em, hierarchy_oracle, ks_critical_1pct, ks_statistic, levy_pdf, random_component, simpson};
use ndarray::array;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssgmix::em::{e_step, m_step};
use ssgmix::io::ModelRecord;
use ssgmix::{
    adjusted_rand_index, component_geometry, fit, positive_stable_pdf, positive_stable_upper_tail, sample_hierarchy_v,
    sample_mixture, sample_ssg, series_threshold, sim_study_design, stopping_check, truncated_t_second_moment,
    ComponentEvaluator, ComponentParams, FitConfig, McPool, MixtureModel, PositiveStableDist, SeriesConfig,
    SeriesFamily, StopDecision,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const TABLE_ALPHA: [f64; 7] = [0.5, 0.8, 1.2, 1.5, 1.8, 1.9, 1.95];
const TABLE_P: [f64; 5] = [2.0, 5.0, 10.0, 20.0, 100.0];
const TABLE: [[f64; 7]; 5] = [
    [0.5134, 0.4375, 0.3236, 0.2219, 0.0973, 0.0497, 0.0250],
    [0.4331, 0.3193, 0.1821, 0.0962, 0.0305, 0.0138, 0.0065],
    [0.3777, 0.2485, 0.1181, 0.0537, 0.0147, 0.0064, 0.0029],
    [0.3276, 0.1919, 0.0769, 0.0307, 0.0075, 0.0031, 0.0014],
    [0.2312, 0.1035, 0.0287, 0.0088, 0.0016, 0.0006, 0.0002],
];

fn tail_table() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0, 0.0);
    for (j, &alpha) in TABLE_ALPHA.iter().enumerate() {
        let dist = PositiveStableDist::new(alpha).unwrap();
        for (i, &p) in TABLE_P.iter().enumerate() {
            let got: f64 = positive_stable_upper_tail(p, &dist, 1_000_000, 1000 + j as u64).unwrap();
            let err = (got - TABLE[i][j]).abs();
            if err > worst.0 {
                worst = (err, alpha, p);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst.0 <= 0.01 && secs < 60.0,
        format!("35 cells, max |error| {:.4} at alpha={} p={}, {secs:.1}s", worst.0, worst.1, worst.2),
    )
}

fn levy_exactness() -> Outcome {
    let cfg = SeriesConfig::default();
    let dist = PositiveStableDist::new(1.0).unwrap();
    let thr: f64 = series_threshold(SeriesFamily::I0, 1, &dist, &cfg);
    let mut worst = 0.0f64;
    let n = 400;
    for i in 0..=n {
        // Log-spaced grid over [threshold, 100].
        let p = thr * (100.0 / thr).powf(i as f64 / n as f64);
        match positive_stable_pdf(p, &dist, &cfg) {
            Ok(v) => worst = worst.max((v - levy_pdf(p)).abs() / levy_pdf(p)),
            Err(e) => return outcome(false, format!("series refused p={p}: {e}")),
        }
    }
    outcome(worst <= 1e-3, format!("p in [{thr:.4}, 100], max relative error {worst:.2e}"))
}

fn conditional_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = SeriesConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = (0.0f64, 0usize, "");
    for case in 0..20 {
        let d = 1 + case % 3;
        let alpha = rng.random_range(0.6..1.95);
        let theta = random_component(&mut rng, d, alpha);
        let y = sample_ssg(1, &theta, 300 + case as u64).unwrap().row(0).to_owned();
        let geom = component_geometry(&theta).unwrap();
        let pool = McPool::from_seed(alpha, 100_000, 700 + case as u64).unwrap();
        let got = ComponentEvaluator::new(&theta, &geom, &pool, &cfg).unwrap().moments(y.view()).unwrap();
        let want = hierarchy_oracle(y.view(), &theta, 1_000_000, 900 + case as u64);
        for (name, g, w) in [("E(1/P)", got.e_inv_p, want.e1), ("E(T/P)", got.e_inv_p_t, want.e2), ("E(T^2/P)", got.e_inv_p_t2, want.e3)] {
            let r = (g - w).abs() / w.abs();
            if r > worst.0 {
                worst = (r, case, name);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst.0 <= 0.02 && secs < 600.0,
        format!("20 instances, max relative error {:.4} ({} case {}), {secs:.1}s", worst.0, worst.2, worst.1),
    )
}

fn weibull_hierarchy() -> Outcome {
    let n = 100_000;
    let crit = ks_critical_1pct(n, n);
    let mut worst = 0.0f64;
    for (i, &alpha) in [0.8, 1.5, 1.9].iter().enumerate() {
        let theta = ComponentParams::new(alpha, array![0.5, -1.0], array![[1.0, 0.5], [0.5, 1.0]], array![2.0, -1.0]).unwrap();
        let (a, b) = sample_hierarchy_v(n, &theta, 40 + i as u64).unwrap();
        for j in 0..2 {
            worst = worst.max(ks_statistic(&a.column(j).to_vec(), &b.column(j).to_vec()));
        }
    }
    outcome(worst < crit, format!("max KS {worst:.5} vs 1% critical {crit:.5}"))
}

fn simulation_study() -> Outcome {
    let start = Instant::now();
    let mut aris = Vec::new();
    for seed in 1..=5u64 {
        let s = sample_mixture(400, &sim_study_design::<f64>(), seed).unwrap();
        let cfg = FitConfig { max_iter: 150, seed, ..FitConfig::default() };
        match fit(s.data.view(), 2, &cfg) {
            Ok(r) => aris.push(adjusted_rand_index(&r.labels, &s.labels).unwrap()),
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        }
    }
    let mean = aris.iter().sum::<f64>() / aris.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    let list: Vec<String> = aris.iter().map(|a| format!("{a:.3}")).collect();
    outcome(mean >= 0.75 && secs <= 1200.0, format!("mean ARI {mean:.4} [{}], {secs:.1}s", list.join(", ")))
}

fn gaussian_limit() -> Outcome {
    let c1 = ComponentParams::new(2.0, array![3.0, 2.0], array![[1.0, 0.3], [0.3, 1.0]], array![0.0, 0.0]).unwrap();
    let c2 = ComponentParams::new(2.0, array![-2.0, -4.0], array![[1.5, -0.4], [-0.4, 1.0]], array![0.0, 0.0]).unwrap();
    let truth = MixtureModel::new(vec![0.4, 0.6], vec![c1, c2]).unwrap();
    let s = sample_mixture(500, &truth, 0).unwrap();
    let cfg = FitConfig { alpha_bounds: (1.99, 1.99), max_iter: 150, seed: 0, ..FitConfig::default() };
    let r = match fit(s.data.view(), 2, &cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("fit failed: {e}")),
    };
    let start: Vec<usize> = r.labels.iter().map(|l| l - 1).collect();
    let (_, means, _, g_labels) = gaussian_em(&s.data, &start, 2, 200);
    let ari = adjusted_rand_index(&g_labels, &r.labels).unwrap();
    let norm = |v: ndarray::Array1<f64>| v.mapv(|x| x * x).sum().sqrt();
    // E√P = Γ(1 − 1/α)/Γ(1/2); the component mean is μ + λ √(2/π) E√P.
    let alpha = 1.99f64;
    let e_t = (2.0 / std::f64::consts::PI).sqrt() * libm::tgamma(1.0 - 1.0 / alpha) / std::f64::consts::PI.sqrt();
    let mut mu_err = 0.0f64;
    let mut mean_err = 0.0f64;
    for k in 0..2 {
        let c = &r.model.components[k];
        mu_err = mu_err.max(norm(&c.mu - &means[k]) / norm(means[k].clone()));
        let m = &c.mu + &(&c.lambda * e_t);
        mean_err = mean_err.max(norm(&m - &means[k]) / norm(means[k].clone()));
    }
    outcome(
        mu_err <= 0.10 && ari >= 0.95,
        format!("max relative |mu - mu_gauss| {mu_err:.3}, ARI {ari:.3} (component means: {mean_err:.3})"),
    )
}

fn tail_recovery() -> Outcome {
    let start = Instant::now();
    let theta = ComponentParams::new(1.5, array![0.0, 0.0], array![[1.0, 0.3], [0.3, 1.0]], array![1.0, -1.0]).unwrap();
    let mut alphas = Vec::new();
    for seed in 0..5u64 {
        let y = sample_ssg(2000, &theta, 100 + seed).unwrap();
        let cfg = FitConfig { seed, max_iter: 150, ..FitConfig::default() };
        match fit(y.view(), 1, &cfg) {
            Ok(r) => alphas.push(r.model.components[0].alpha),
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        }
    }
    let mean = alphas.iter().sum::<f64>() / alphas.len() as f64;
    let list: Vec<String> = alphas.iter().map(|a| format!("{a:.3}")).collect();
    outcome((mean - 1.5).abs() <= 0.15, format!("mean alpha {mean:.4} [{}], {:.1}s", list.join(", "), start.elapsed().as_secs_f64()))
}

fn stopping_suite() -> Outcome {
    let flat = vec![-250.0; 20];
    let ramp: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let mut kinked: Vec<f64> = (0..10).map(|i| 0.5 * i as f64).collect();
    kinked.extend((0..10).map(|i| 4.5 + 0.2 * (i + 1) as f64));
    let a = matches!(stopping_check(&flat, 0.10), StopDecision::Stop { .. });
    let b = matches!(stopping_check(&ramp, 0.10), StopDecision::Stop { .. });
    let c = stopping_check(&kinked, 0.10) == StopDecision::Continue;
    outcome(a && b && c, format!("constant stop={a}, unit ramp stop={b}, slopes 0.5/0.2 continue={c}"))
}

fn property_suite() -> Outcome {
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };

    // τ rows, Σ positive definiteness and the weight simplex over EM iterations.
    let s = sample_mixture(300, &sim_study_design::<f64>(), 77).unwrap();
    let cfg = FitConfig { n_mc: 2000, seed: 77, ..FitConfig::default() };
    let mut model = ssgmix::initialize(s.data.view(), 2, 77).unwrap();
    let (mut tau_ok, mut spd_ok, mut simplex_ok) = (true, true, true);
    for iter in 0..10 {
        let cache = e_step(s.data.view(), &model, &cfg, iter).unwrap();
        tau_ok &= cache.tau.rows().into_iter().all(|r| (r.sum() - 1.0).abs() < 1e-8);
        model = m_step(s.data.view(), &cache, &model).unwrap();
        spd_ok &= model.components.iter().all(|c| ssgmix::linalg::cholesky(&c.sigma).is_ok());
        simplex_ok &= model.weights.iter().all(|&w| w >= 0.0) && (model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12;
    }
    check("tau rows sum to 1", tau_ok);
    check("Sigma stays SPD", spd_ok);
    check("weights on simplex", simplex_ok);

    // Truncated-t second moment against quadrature of z² t_ν(z) on (−∞, b].
    let mut tt_err = 0.0f64;
    for &(nu, b) in &[(5.0, 1.0), (3.5, -0.5), (10.0, 2.0), (2.5, 0.0), (7.0, -2.0)] {
        let lc = libm::lgamma((nu + 1.0) / 2.0) - libm::lgamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln();
        let t = |z: f64| (lc - (nu + 1.0) / 2.0 * (1.0 + z * z / nu).ln()).exp();
        // z = b − eˢ maps s ∈ ℝ onto (−∞, b); tails decay exponentially in s.
        let g = |s: f64| t(b - s.exp()) * s.exp();
        let h = |s: f64| {
            let z = b - s.exp();
            z * z * t(z) * s.exp()
        };
        // Piecewise so that no stage samples only near-zero values.
        let cuts = [-40.0, -10.0, -3.0, -1.0, 0.5, 2.0, 5.0, 12.0, 30.0, 120.0];
        let piecewise = |f: &dyn Fn(f64) -> f64| cuts.windows(2).map(|w| simpson(&f, w[0], w[1], 1e-14)).sum::<f64>();
        let want = piecewise(&h) / piecewise(&g);
        let got: f64 = truncated_t_second_moment(nu, b).unwrap();
        tt_err = tt_err.max((got - want).abs());
    }
    check("truncated-t second moment", tt_err < 1e-6);

    check("ARI hand case", (adjusted_rand_index(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap() + 0.5).abs() < 1e-12);

    let rec = ModelRecord::from_model(&sim_study_design(), None);
    let once = rec.to_json();
    let twice = ModelRecord::from_model(&ModelRecord::from_json(&once).unwrap().to_model().unwrap(), None).to_json();
    check("JSON round trip", once == twice);

    let small = sample_mixture(120, &sim_study_design::<f64>(), 5).unwrap();
    let dcfg = FitConfig { n_mc: 800, m_repeats: 2, max_iter: 21, seed: 5, ..FitConfig::default() };
    let a = fit(small.data.view(), 2, &dcfg).unwrap();
    let b = fit(small.data.view(), 2, &dcfg).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    check(
        "seed determinism",
        a.model == b.model && a.labels == b.labels && bits(&a.loglik_trace) == bits(&b.loglik_trace),
    );

    let detail = if failed.is_empty() {
        format!("7 properties hold (truncated-t max error {tt_err:.1e})")
    } else {
        format!("failing: {}", failed.join(", "))
    };
    outcome(failed.is_empty(), detail)
}

fn main() {
    // `cargo test -- --list` style probes pass extra arguments; nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("positive stable upper-tail table", tail_table),
        ("Levy closed form on the series region", levy_exactness),
        ("conditional expectations vs hierarchy oracle", conditional_oracle),
        ("Weibull hierarchy two-sample KS", weibull_hierarchy),
        ("simulation-study clustering ARI", simulation_study),
        ("Gaussian-limit fit vs Gaussian EM", gaussian_limit),
        ("tail-index recovery", tail_recovery),
        ("stopping-rule examples", stopping_suite),
        ("property suite", property_suite),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        passed += o.pass as usize;
        println!("{} {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {passed}/{} criteria met", criteria.len());
}
