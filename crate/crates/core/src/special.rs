//! Special functions evaluated in (or convertible to) log space: normal and
//! Student-t distribution functions, incomplete beta/gamma, and summation
//! helpers for alternating series.

use crate::real::Real;

const MAX_CF_ITER: usize = 500;

/// Standard normal CDF Φ(z).
pub fn norm_cdf<R: Real>(z: R) -> R {
    let h = R::lit(0.5);
    let x = z / R::SQRT_2();
    if z < R::zero() {
        h * (-x).erfc()
    } else {
        R::one() - h * x.erfc()
    }
}

/// ln Φ(z), accurate far into the lower tail.
pub fn ln_norm_cdf<R: Real>(z: R) -> R {
    if z >= R::zero() {
        return (-R::lit(0.5) * (z / R::SQRT_2()).erfc()).ln_1p();
    }
    if z > R::lit(-20.0) {
        let e = (-z / R::SQRT_2()).erfc();
        if e.is_normal() && e > R::min_positive_value() * R::lit(1e10) {
            return (R::lit(0.5) * e).ln();
        }
    }
    // Asymptotic expansion of the Mills ratio.
    let z2 = (z * z).recip();
    let series = R::one()
        - z2 * (R::one() - R::lit(3.0) * z2 * (R::one() - R::lit(5.0) * z2 * (R::one() - R::lit(7.0) * z2)));
    ln_norm_pdf(z) - (-z).ln() + series.ln()
}

/// Standard normal density φ(z).
#[inline]
pub fn norm_pdf<R: Real>(z: R) -> R {
    ln_norm_pdf(z).exp()
}

/// ln φ(z).
#[inline]
pub fn ln_norm_pdf<R: Real>(z: R) -> R {
    -R::lit(0.5) * z * z - R::lit(0.918_938_533_204_672_8)
}

/// ln(Φ(z) − zφ(z)); the bracket is positive for every z and is the
/// half-normal truncated second-moment kernel.
pub fn ln_norm_second_kernel<R: Real>(z: R) -> R {
    if z >= -R::one() {
        (norm_cdf(z) - z * norm_pdf(z)).ln()
    } else {
        let mills = (ln_norm_cdf(z) - ln_norm_pdf(z)).exp();
        ln_norm_pdf(z) + (-z + mills).ln()
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<R: Real>(a: R, b: R, x: R) -> R {
    let tiny = R::min_positive_value() * R::lit(1e3);
    let eps = R::epsilon();
    let one = R::one();
    let two = R::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = d.recip();
    let mut h = d;
    for m in 1..=MAX_CF_ITER {
        let m = R::of_usize(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

fn ln_beta<R: Real>(a: R, b: R) -> R {
    a.ln_gamma() + b.ln_gamma() - (a + b).ln_gamma()
}

/// ln I_x(a, b) for the regularized incomplete beta function, given both
/// `x` and its complement `y = 1 − x` (passed separately to avoid
/// cancellation when x is close to 1).
pub fn ln_beta_inc<R: Real>(a: R, b: R, x: R, y: R) -> R {
    if x <= R::zero() {
        return R::neg_infinity();
    }
    if y <= R::zero() {
        return R::zero();
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + R::one()) / (a + b + R::lit(2.0)) {
        ln_front + beta_cf(a, b, x).ln() - a.ln()
    } else {
        let tail = (ln_front + beta_cf(b, a, y).ln() - b.ln()).exp();
        (-tail).ln_1p()
    }
}

/// ln T_ν(t), the log CDF of Student's t with ν degrees of freedom.
pub fn ln_student_t_cdf<R: Real>(t: R, nu: R) -> R {
    let h = R::lit(0.5);
    let t2 = t * t;
    let denom = nu + t2;
    // P(|T| > |t|) = I_{ν/(ν+t²)}(ν/2, 1/2)
    let ln_two_sided = ln_beta_inc(nu * h, h, nu / denom, t2 / denom);
    if t < R::zero() {
        ln_two_sided - R::LN_2()
    } else {
        (-h * ln_two_sided.exp()).ln_1p()
    }
}

/// Student-t CDF T_ν(t).
#[inline]
pub fn student_t_cdf<R: Real>(t: R, nu: R) -> R {
    ln_student_t_cdf(t, nu).exp()
}

/// ln ∫_{−∞}^{b} z² t_ν(z) dz for ν > 2 (the unnormalized second moment of a
/// Student-t truncated above at `b`).
pub fn ln_t_partial_second_moment<R: Real>(nu: R, b: R) -> R {
    let h = R::lit(0.5);
    let one = R::one();
    let two = R::lit(2.0);
    let ln_a = (nu / (nu - two)).ln() + ln_student_t_cdf(b * ((nu - two) / nu).sqrt(), nu - two);
    if b == R::zero() {
        return ln_a;
    }
    let ln_k = h * nu * nu.ln() + ((nu - one) * h).ln_gamma()
        - R::LN_2()
        - (nu * h).ln_gamma()
        - h * R::PI().ln();
    let ln_b = b.abs().ln() + ln_k - (nu - one) * h * (nu + b * b).ln();
    if b < R::zero() {
        log_add_exp(ln_a, ln_b)
    } else {
        ln_a + (-(ln_b - ln_a).exp()).ln_1p()
    }
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn gamma_p<R: Real>(a: R, x: R) -> R {
    if x <= R::zero() {
        return R::zero();
    }
    let eps = R::epsilon();
    let ln_front = a * x.ln() - x - a.ln_gamma();
    if x < a + R::one() {
        let mut ap = a;
        let mut del = a.recip();
        let mut sum = del;
        for _ in 0..MAX_CF_ITER {
            ap = ap + R::one();
            del = del * x / ap;
            sum = sum + del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        sum * ln_front.exp()
    } else {
        let tiny = R::min_positive_value() * R::lit(1e3);
        let mut b = x + R::one() - a;
        let mut c = tiny.recip();
        let mut d = b.recip();
        let mut h = d;
        for i in 1..=MAX_CF_ITER {
            let i = R::of_usize(i);
            let an = -i * (i - a);
            b = b + R::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let del = d * c;
            h = h * del;
            if (del - R::one()).abs() <= eps {
                break;
            }
        }
        R::one() - ln_front.exp() * h
    }
}

/// sin(πx), exactly zero at integers.
pub fn sin_pi<R: Real>(x: R) -> R {
    let two = R::lit(2.0);
    let r = x - two * (x / two).floor();
    if r == R::zero() || r == R::one() {
        return R::zero();
    }
    (R::PI() * r).sin()
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp<R: Real>(a: R, b: R) -> R {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == R::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ e^{x_i}; `-inf` for an empty slice.
pub fn log_sum_exp<R: Real>(xs: &[R]) -> R {
    let max = xs.iter().copied().fold(R::neg_infinity(), R::max);
    if !max.is_finite() {
        return max;
    }
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add((x - max).exp());
    }
    max + acc.value().ln()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<R> {
    sum: R,
    comp: R,
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        Self { sum: R::zero(), comp: R::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> R {
        self.sum + self.comp
    }
}
