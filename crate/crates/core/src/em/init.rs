use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index::sample;

use super::MixtureModel;
use crate::density::ComponentParams;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::real::Real;
use crate::rng::{substream, Stream};

/// Initial tail index for every component.
pub const INITIAL_ALPHA: f64 = 1.7;
/// PAM runs on at most this many points; the rest are assigned afterwards.
const PAM_MAX_POINTS: usize = 2000;
const SHRINK: f64 = 0.1;
/// Each coordinate is clamped to its [q, 1 − q] empirical quantiles before
/// the medoid search and the starting moments. Heavy tails otherwise let a
/// handful of extreme points claim a medoid of their own and dominate the
/// sample covariance.
const WINSOR_FRACTION: f64 = 0.025;

fn l1<R: Real>(data: &ArrayView2<R>, i: usize, j: usize) -> R {
    data.row(i).iter().zip(data.row(j).iter()).map(|(a, b)| (*a - *b).abs()).sum()
}

/// k-medoids (PAM: greedy BUILD then best-improvement SWAP) under the L1
/// distance. Returns the medoid row indices and the 0-based assignment of
/// every row to its nearest medoid. Ties go to the lowest index.
pub fn k_medoids_l1<R: Real>(data: ArrayView2<R>, k: usize) -> (Vec<usize>, Vec<usize>) {
    let n = data.nrows();
    let mut dist = vec![R::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = l1(&data, i, j);
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    let dm = |i: usize, j: usize| dist[i * n + j];

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![R::infinity(); n];
    for _ in 0..k {
        let mut best = (R::infinity(), usize::MAX);
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            let cost: R = (0..n).map(|o| nearest[o].min(dm(o, c))).sum();
            if cost < best.0 {
                best = (cost, c);
            }
        }
        medoids.push(best.1);
        for o in 0..n {
            nearest[o] = nearest[o].min(dm(o, best.1));
        }
    }

    // SWAP
    let total_cost = |meds: &[usize]| -> R {
        (0..n).map(|o| meds.iter().map(|&m| dm(o, m)).fold(R::infinity(), R::min)).sum()
    };
    let mut cost = total_cost(&medoids);
    for _ in 0..100 {
        let mut best = (cost, usize::MAX, usize::MAX);
        for slot in 0..k {
            for cand in 0..n {
                if medoids.contains(&cand) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = cand;
                let c = total_cost(&trial);
                if c < best.0 {
                    best = (c, slot, cand);
                }
            }
        }
        if best.1 == usize::MAX || !(best.0 < cost * (R::one() - R::epsilon() * R::lit(16.0))) {
            break;
        }
        medoids[best.1] = best.2;
        cost = best.0;
    }
    let assign = (0..n).map(|o| nearest_medoid(&data, o, &data, &medoids)).collect();
    (medoids, assign)
}

fn nearest_medoid<R: Real>(data: &ArrayView2<R>, row: usize, med_src: &ArrayView2<R>, medoids: &[usize]) -> usize {
    let y = data.row(row);
    let mut best = (R::infinity(), 0);
    for (slot, &m) in medoids.iter().enumerate() {
        let v: R = y.iter().zip(med_src.row(m).iter()).map(|(a, b)| (*a - *b).abs()).sum();
        if v < best.0 {
            best = (v, slot);
        }
    }
    best.1
}

fn median<R: Real>(v: &mut [R]) -> R {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * R::lit(0.5)
    }
}

/// Copy of `data` with every column clamped to its `WINSOR_FRACTION`
/// quantile band.
fn winsorize<R: Real>(data: ArrayView2<R>) -> Array2<R> {
    let n = data.nrows();
    let mut out = data.to_owned();
    let lo_i = (WINSOR_FRACTION * (n - 1) as f64).round() as usize;
    let hi_i = n - 1 - lo_i;
    for mut col in out.columns_mut() {
        let mut sorted = col.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let (lo, hi) = (sorted[lo_i], sorted[hi_i]);
        col.mapv_inplace(|v| v.max(lo).min(hi));
    }
    out
}

/// 0-based starting partition: PAM (L1) on the winsorized data (a seeded
/// subsample of it when there are many rows), then every row joins its
/// nearest medoid.
pub fn initial_partition<R: Real>(data: ArrayView2<R>, k: usize, seed: u64) -> Vec<usize> {
    let n = data.nrows();
    if k <= 1 {
        return vec![0; n];
    }
    let w = winsorize(data);
    if n <= PAM_MAX_POINTS {
        return k_medoids_l1(w.view(), k).1;
    }
    let mut rng = substream(seed, Stream::Init);
    let mut idx = sample(&mut rng, n, PAM_MAX_POINTS).into_vec();
    idx.sort_unstable();
    let sub = w.select(Axis(0), &idx);
    let (meds, _) = k_medoids_l1(sub.view(), k);
    (0..n).map(|i| nearest_medoid(&w.view(), i, &sub.view(), &meds)).collect()
}

/// Starting values: k-medoids (L1) partition; per cluster the componentwise
/// median as μ, the sample covariance shrunk 10% toward its diagonal as Σ,
/// λ_j = sign(skewness about the median) × MAD_j, α = 1.7, and cluster
/// proportions as weights. Partition and moments use winsorized columns.
pub fn initialize<R: Real>(data: ArrayView2<R>, k: usize, seed: u64) -> Result<MixtureModel<R>> {
    let (n, d) = data.dim();
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("data must have at least one column".into()));
    }
    let required = k * (d + 2);
    if n <= required {
        return Err(Error::InsufficientData { n, required });
    }
    if let Some(row) = data.rows().into_iter().position(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteData { row });
    }

    let labels = initial_partition(data, k, seed);
    let clamped = winsorize(data);

    let mut weights = Vec::with_capacity(k);
    let mut comps = Vec::with_capacity(k);
    for c in 0..k {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let nc = rows.len();
        if nc < d + 2 {
            return Err(Error::DegenerateCluster {
                cluster: c + 1,
                reason: format!("{nc} points, at least {} needed", d + 2),
            });
        }
        let x = clamped.select(Axis(0), &rows);
        let ncr = R::of_usize(nc);
        let mean = x.mean_axis(Axis(0)).expect("non-empty cluster");
        let mut mu = Array1::zeros(d);
        let mut lambda = Array1::zeros(d);
        for j in 0..d {
            let mut col = x.column(j).to_vec();
            let med = median(&mut col);
            mu[j] = med;
            let mut dev: Vec<R> = col.iter().map(|v| (*v - med).abs()).collect();
            let mad = median(&mut dev);
            let m2 = x.column(j).iter().map(|v| (*v - med).powi(2)).sum::<R>() / ncr;
            let m3 = x.column(j).iter().map(|v| (*v - med).powi(3)).sum::<R>() / ncr;
            let skew = if m2 > R::zero() { m3 / m2.powf(R::lit(1.5)) } else { R::zero() };
            let sign = if skew < R::zero() { -R::one() } else { R::one() };
            lambda[j] = sign * mad;
        }
        let centered = &x - &mean;
        let s: Array2<R> = centered.t().dot(&centered) / R::of_usize(nc - 1);
        let mut sigma = s.mapv(|v| v * R::lit(1.0 - SHRINK));
        for j in 0..d {
            sigma[[j, j]] = s[[j, j]];
        }
        if cholesky(&sigma).is_err() {
            return Err(Error::DegenerateCluster {
                cluster: c + 1,
                reason: "sample covariance is singular".into(),
            });
        }
        weights.push(ncr / R::of_usize(n));
        comps.push(ComponentParams { alpha: R::lit(INITIAL_ALPHA), mu, sigma, lambda });
    }
    MixtureModel::new(weights, comps)
}
