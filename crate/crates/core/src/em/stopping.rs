use crate::real::Real;

/// Width of each regression block and of the averaging window.
pub const BLOCK: usize = 10;
pub const WINDOW: usize = 2 * BLOCK;

/// Outcome of the slope-comparison stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// Stop; parameters are averaged over iterations `start..end` (0-based,
    /// end exclusive).
    Stop { start: usize, end: usize },
}

/// Quantile of sorted data, linear interpolation between order statistics
/// (the usual "type 7" definition).
fn quantile_sorted<R: Real>(sorted: &[R], q: R) -> R {
    let n = sorted.len();
    let h = q * R::of_usize(n - 1);
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    let j = (i + 1).min(n - 1);
    sorted[i] + (h - lo) * (sorted[j] - sorted[i])
}

/// Least-squares slope of the values of `block` lying inside its own
/// [q₀.₁, q₀.₉] band, regressed on 1..l in their original order.
fn trimmed_slope<R: Real>(block: &[R]) -> R {
    let mut sorted = block.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let lo = quantile_sorted(&sorted, R::lit(0.1));
    let hi = quantile_sorted(&sorted, R::lit(0.9));
    let kept: Vec<R> = block.iter().copied().filter(|&v| v >= lo && v <= hi).collect();
    let l = kept.len();
    if l < 2 {
        return R::zero();
    }
    let lr = R::of_usize(l);
    let xbar = (lr + R::one()) * R::lit(0.5);
    let ybar = kept.iter().copied().sum::<R>() / lr;
    let (mut sxy, mut sxx) = (R::zero(), R::zero());
    for (t, &y) in kept.iter().enumerate() {
        let dx = R::of_usize(t + 1) - xbar;
        sxy = sxy + dx * (y - ybar);
        sxx = sxx + dx * dx;
    }
    sxy / sxx
}

/// Compares the trimmed regression slopes of the two most recent 10-wide
/// blocks of the log-likelihood trace. Checked only when the trace length r
/// is at least 20 and a multiple of 10; stops when |β₁ − β₂| ≤ ε.
///
/// Equal slopes, not flatness, are detected: a steadily rising trace also
/// stops, which is why the driver additionally enforces a minimum number of
/// iterations.
pub fn stopping_check<R: Real>(trace: &[R], eps: R) -> StopDecision {
    let r = trace.len();
    if r < WINDOW || r % BLOCK != 0 {
        return StopDecision::Continue;
    }
    let b1 = trimmed_slope(&trace[r - WINDOW..r - BLOCK]);
    let b2 = trimmed_slope(&trace[r - BLOCK..r]);
    if (b1 - b2).abs() <= eps {
        StopDecision::Stop { start: r - WINDOW, end: r }
    } else {
        StopDecision::Continue
    }
}
