//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `eps`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, eps, 40)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // stop once the requested accuracy is below what the panel can resolve
    if depth == 0 || delta.abs() <= 15.0 * eps || delta.abs() <= 1e-15 * (left.abs() + right.abs()) {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + refine(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// `int_0^x t^(s-1) e^-t dt` by quadrature after `t = v^2`, which removes
/// the square-root singularity for `s >= 1/2`.
pub fn lower_gamma_quadrature(s: f64, x: f64) -> f64 {
    let f = |v: f64| {
        if v == 0.0 {
            if s == 0.5 {
                2.0
            } else {
                0.0
            }
        } else {
            2.0 * v.powf(2.0 * s - 1.0) * (-v * v).exp()
        }
    };
    adaptive_simpson(&f, 0.0, x.sqrt(), 1e-13)
}

/// Average price of a shelf whose ages are exponential with replacement
/// rate `p R / tau1`. With `u = exp(-rate * tau)` the average becomes
/// `int_0^1 (1 - exp(-u^(1/(pR)) / h_c)) du`; `u = v^4` smooths the
/// endpoint.
pub fn avg_price_quadrature(p: f64, r: f64, h_c: f64) -> f64 {
    let k = 1.0 / (p * r);
    let f = |v: f64| {
        let u = v.powi(4);
        4.0 * v.powi(3) * (1.0 - (-u.powf(k) / h_c).exp())
    };
    adaptive_simpson(&f, 0.0, 1.0, 1e-13)
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!((actual - expected).abs() <= tol, "{what}: {actual} vs {expected} (tol {tol})");
}
