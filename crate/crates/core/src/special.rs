//! Numerical kernel: lower incomplete gamma, bracketed root finding and
//! central differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration limits shared by the kernels in this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { abs_tol: 1e-10, rel_tol: 1e-10, max_iter: 200 }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol", "must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Lower incomplete gamma `gamma(s, x) = int_0^x e^{-y} y^{s-1} dy`.
///
/// Power series below `x = s + 1`, continued fraction for the upper tail
/// above it. Both iterate to machine precision so the result is smooth
/// enough to difference numerically; `tol.rel_tol` is the accuracy that must
/// be reached within `tol.max_iter` terms.
pub fn lower_incomplete_gamma(s: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        gamma_series(s, x, tol)
    } else {
        let upper = upper_gamma_continued_fraction(s, x, tol)?;
        Ok(ln_gamma(s).exp() - upper)
    }
}

/// `ln gamma(s, x)`, for arguments where `gamma(s, x)` itself leaves the
/// range of `f64`.
pub fn ln_lower_incomplete_gamma(s: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x < s + 1.0 {
        Ok(s * x.ln() - x + series_sum(s, x, tol)?.ln())
    } else {
        let lg = ln_gamma(s);
        let ln_upper = s * x.ln() - x + continued_fraction(s, x, tol)?.ln();
        Ok(lg + (-(ln_upper - lg).exp()).ln_1p())
    }
}

fn check_gamma_args(s: f64, x: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", format!("{s} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid("x", format!("{x} must be non-negative")));
    }
    Ok(())
}

/// Series branch of [`lower_incomplete_gamma`], usable for any `x >= 0`.
pub fn gamma_series(s: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(series_sum(s, x, tol)? * (s * x.ln() - x).exp())
}

/// `sum_n x^n / (s (s+1) ... (s+n))`, so that `gamma = x^s e^{-x} * sum`.
fn series_sum(s: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut denom = s;
    for _ in 0..tol.max_iter {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() <= sum.abs() * f64::EPSILON {
            return Ok(sum);
        }
    }
    if term.abs() <= sum.abs() * tol.rel_tol {
        return Ok(sum);
    }
    Err(Error::GammaNonConvergence { s, x, iterations: tol.max_iter })
}

/// Upper incomplete gamma `Gamma(s, x)` by the modified Lentz continued
/// fraction. Converges quickly for `x > s + 1`.
pub fn upper_gamma_continued_fraction(s: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    Ok((s * x.ln() - x).exp() * continued_fraction(s, x, tol)?)
}

/// Continued fraction `h` with `Gamma(s, x) = x^s e^{-x} h`.
fn continued_fraction(s: f64, x: f64, tol: &ToleranceConfig) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut last_delta = f64::INFINITY;
    for i in 1..=tol.max_iter {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        last_delta = (delta - 1.0).abs();
        if last_delta <= f64::EPSILON {
            break;
        }
    }
    if last_delta > tol.rel_tol {
        return Err(Error::GammaNonConvergence { s, x, iterations: tol.max_iter });
    }
    Ok(h)
}

/// Root of `f` inside `[lo, hi]`, requiring `f(lo) f(hi) <= 0`.
///
/// Bisection, with a secant step taken whenever it lands well inside the
/// current bracket. Stops once `|f(r)| <= abs_tol` or the bracket is
/// narrower than `abs_tol`. The order of `lo` and `hi` does not matter.
pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: &ToleranceConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::InvalidBracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    let mut use_secant = true;
    for _ in 0..tol.max_iter {
        let width = b - a;
        let mut m = 0.5 * (a + b);
        if use_secant {
            let sec = b - fb * (b - a) / (fb - fa);
            // only accept points away from the ends so the bracket shrinks
            if sec > a + 0.05 * width && sec < b - 0.05 * width {
                m = sec;
            }
        }
        // alternate so that at least every other step halves the bracket
        use_secant = !use_secant;
        let fm = f(m);
        if fm == 0.0 || fm.abs() <= tol.abs_tol {
            return Ok(m);
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        if b - a <= tol.abs_tol {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Err(Error::RootNonConvergence { lo: a, hi: b, iterations: tol.max_iter })
}

/// `[f(x0 + step) - f(x0 - step)] / (2 step)`.
pub fn central_difference<F>(f: F, x0: f64, step: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(x0 + step) - f(x0 - step)) / (2.0 * step)
}

/// One Richardson refinement of [`central_difference`]:
/// `(4 D(step/2) - D(step)) / 3`, fourth order in the step.
pub fn richardson_derivative<F>(f: F, x0: f64, step: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let coarse = central_difference(&f, x0, step);
    let fine = central_difference(&f, x0, 0.5 * step);
    (4.0 * fine - coarse) / 3.0
}

/// Fallible variant of [`richardson_derivative`] for functions that can fail.
pub fn try_richardson_derivative<F>(f: F, x0: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let d = |h: f64| -> Result<f64> { Ok((f(x0 + h)? - f(x0 - h)?) / (2.0 * h)) };
    let coarse = d(step)?;
    let fine = d(0.5 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
