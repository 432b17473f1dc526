//! Oracles shared by the integration tests. Nothing here calls into the
//! quadrature or root-finding code of the crate under test.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh quadrature on `[a, b]`, refined until successive levels agree.
/// Endpoint singularities of algebraic type are handled without special
/// treatment; the integrand is never evaluated at `a` or `b`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 5.0;
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        // distance from the nearer endpoint, computed without cancellation
        let d = 2.0 * half / ((2.0 * u.abs()).exp() + 1.0);
        if d == 0.0 {
            return 0.0;
        }
        let x = if t < 0.0 { a + d } else { b - d };
        half * w * f(x)
    };
    let mut h = 0.5;
    let mut sum = eval(0.0) + {
        let n = (t_max / h) as i64;
        (1..=n).map(|k| eval(k as f64 * h) + eval(-(k as f64) * h)).sum::<f64>()
    };
    let mut prev = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let n = (t_max / h) as i64;
        let odd: f64 = (1..=n)
            .step_by(2)
            .map(|k| eval(k as f64 * h) + eval(-(k as f64) * h))
            .sum();
        sum += odd;
        let cur = sum * h;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Real root of `r³ - r = w` for `w > 2/(3√3)`, by Cardano.
pub fn real_cubic_root(w: f64) -> f64 {
    let disc = (w * w / 4.0 - 1.0 / 27.0).sqrt();
    // the two cube roots multiply to 1/3; avoid the cancelling difference
    let c = (w / 2.0 + disc).cbrt();
    c + 1.0 / (3.0 * c)
}

/// Symmetrized `m = 2` density for `0 < λ < 3√3/2`, from the complex root pair
/// of `s³ - s - 1/λ`: `Im s = √(3r² - 4) / 2` with `r` the real root.
pub fn p2_sym_from_cubic(lambda: f64) -> f64 {
    let r = real_cubic_root(1.0 / lambda.abs());
    (3.0 * r * r - 4.0).max(0.0).sqrt() / (2.0 * PI)
}

/// Unsymmetrized `m = 2` density from the cubic oracle.
pub fn p2_from_cubic(x: f64) -> f64 {
    let l = x.sqrt();
    p2_sym_from_cubic(l) / l
}

/// Marchenko-Pastur density with ratio one.
pub fn p1_oracle(x: f64) -> f64 {
    (x * (4.0 - x)).sqrt() / (2.0 * PI * x)
}

/// Fourth-order Richardson central difference.
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Exact `C(n, k)` for small arguments.
pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}
