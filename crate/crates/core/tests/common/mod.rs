//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use ssgmix::linalg::{cholesky, cholesky_log_det, cholesky_solve};
use ssgmix::rng::seeded;
use ssgmix::{ComponentParams, PositiveStableDist};

/// Brute-force moments from the (P, T) hierarchy: draw P and T = √P|Z₀|,
/// weight each pair by the conditional normal density of y.
#[derive(Debug, Clone, Copy)]
pub struct OracleMoments {
    pub pdf: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

pub fn hierarchy_oracle(y: ArrayView1<f64>, theta: &ComponentParams<f64>, n: usize, seed: u64) -> OracleMoments {
    let d = theta.dim();
    let l = cholesky(&theta.sigma).unwrap();
    let ln_det = cholesky_log_det(&l);
    let dist = PositiveStableDist::new(theta.alpha).unwrap();
    let mut rng = seeded(seed);
    let centred = &y - &theta.mu;
    // Solve once for Σ⁻¹(y−μ) and Σ⁻¹λ; the quadratic form in T is then closed form.
    let a = cholesky_solve(&l, centred.view());
    let b = cholesky_solve(&l, theta.lambda.view());
    let q_yy = centred.dot(&a);
    let q_yl = theta.lambda.dot(&a);
    let q_ll = theta.lambda.dot(&b);
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut ln_w = Vec::with_capacity(n);
    let mut ps = Vec::with_capacity(n);
    let mut ts = Vec::with_capacity(n);
    for _ in 0..n {
        let p: f64 = dist.sample(&mut rng);
        let z0: f64 = StandardNormal.sample(&mut rng);
        let t = p.sqrt() * z0.abs();
        let quad = (q_yy - 2.0 * t * q_yl + t * t * q_ll) / p;
        ln_w.push(-(d as f64) * half_ln_2pi - 0.5 * (d as f64) * p.ln() - 0.5 * ln_det - 0.5 * quad);
        ps.push(p);
        ts.push(t);
    }
    let top = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let w = (ln_w[i] - top).exp();
        s0 += w;
        s1 += w / ps[i];
        s2 += w * ts[i] / ps[i];
        s3 += w * ts[i] * ts[i] / ps[i];
    }
    OracleMoments { pdf: (top + (s0 / n as f64).ln()).exp(), e1: s1 / s0, e2: s2 / s0, e3: s3 / s0 }
}

/// A random well-conditioned component of dimension `d`.
pub fn random_component<G: Rng>(rng: &mut G, d: usize, alpha: f64) -> ComponentParams<f64> {
    let mu = Array1::from_shape_fn(d, |_| rng.random_range(-2.0..2.0));
    let a = Array2::from_shape_fn((d, d), |_| rng.random_range(-1.0..1.0));
    let sigma = a.dot(&a.t()) + Array2::<f64>::eye(d) * 0.5;
    let lambda = Array1::from_shape_fn(d, |_| rng.random_range(-2.0..2.0));
    ComponentParams::new(alpha, mu, sigma, lambda).unwrap()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut best) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    best
}

/// Asymptotic two-sample KS critical value at level 1%.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Exact Lévy(0, 1/2) density, the α = 1 positive stable law with Laplace
/// transform exp(−√s).
pub fn levy_pdf(p: f64) -> f64 {
    (4.0 * std::f64::consts::PI).sqrt().recip() * p.powf(-1.5) * (-1.0 / (4.0 * p)).exp()
}

/// Adaptive Simpson on [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

/// Plain two-component-or-more Gaussian EM with full covariances, started
/// from the supplied hard labels. Returns (weights, means, covariances, labels).
pub fn gaussian_em(data: &Array2<f64>, init_labels: &[usize], k: usize, iters: usize) -> (Vec<f64>, Vec<Array1<f64>>, Vec<Array2<f64>>, Vec<usize>) {
    let (n, d) = data.dim();
    let mut resp = Array2::<f64>::zeros((n, k));
    for (i, &l) in init_labels.iter().enumerate() {
        resp[[i, l]] = 1.0;
    }
    let mut weights = vec![0.0; k];
    let mut means = vec![Array1::zeros(d); k];
    let mut covs = vec![Array2::eye(d); k];
    for _ in 0..iters {
        for c in 0..k {
            let col = resp.column(c);
            let nk: f64 = col.sum();
            weights[c] = nk / n as f64;
            let mean = data.t().dot(&col) / nk;
            let mut cov = Array2::<f64>::zeros((d, d));
            for i in 0..n {
                let r = &data.row(i) - &mean;
                for a in 0..d {
                    for b in 0..d {
                        cov[[a, b]] += col[i] * r[a] * r[b];
                    }
                }
            }
            means[c] = mean;
            covs[c] = cov / nk;
        }
        for i in 0..n {
            let lw: Vec<f64> = (0..k)
                .map(|c| {
                    let l = cholesky(&covs[c]).unwrap();
                    let r = &data.row(i) - &means[c];
                    let s = cholesky_solve(&l, r.view());
                    weights[c].ln() - 0.5 * cholesky_log_det(&l) - 0.5 * r.dot(&s)
                })
                .collect();
            let top = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = lw.iter().map(|v| (v - top).exp()).sum();
            for c in 0..k {
                resp[[i, c]] = (lw[c] - top).exp() / z;
            }
        }
    }
    let labels = (0..n)
        .map(|i| {
            let row = resp.row(i);
            (0..k).fold(0, |best, c| if row[c] > row[best] { c } else { best })
        })
        .collect();
    (weights, means, covs, labels)
}
