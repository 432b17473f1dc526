//! Stieltjes transform of the symmetrized `m = 2` Fuss-Catalan law and the
//! spectral kernel built from it.
//!
//! `s(z) = ∫ p(λ) / (λ - z) dλ` is the root of `1 + z s - z s³ = 0` that
//! satisfies `Im s · Im z > 0` and behaves like `-1/z` at infinity. The
//! kernel `K(z) = (1/z - 2s) / (1 - 3s²)` has boundary values on the
//! support whose imaginary part is the weight of the CLT variance integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fcdist::FussCatalanFamily;
use crate::quad::QuadConfig;

/// Residual accepted for a returned root.
pub const RESIDUAL_TOL: f64 = 1e-12;
/// `|1 - 3 s²|` below which the kernel is considered to sit on a pole.
pub const POLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesPoint {
    pub z: Complex64,
    pub s: Complex64,
    /// `|1 + z s - z s³|`
    pub residual: f64,
}

/// Boundary values of `s` and `K` on the real axis, approached from above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelBoundary {
    pub mu: f64,
    /// `Im s(μ + i0) = π p(μ)`
    pub f: f64,
    /// `Re s(μ + i0)`
    pub g: f64,
    pub im_k: f64,
    pub re_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub z: Complex64,
    pub s: Complex64,
    /// `(1/z - 2s) / (1 - 3s²)`
    pub k: Complex64,
    /// `s (s² - 3) / (1 - 3s²)`, equal to `k` on the cubic.
    pub k_alt: Complex64,
}

/// Residual of the symmetrized cubic `1 + z s - z s³`.
pub fn cubic_residual(z: Complex64, s: Complex64) -> f64 {
    (1.0 + z * s - z * s * s * s).norm()
}

/// All three roots of `s³ - s - w = 0` by Cardano's formula.
pub fn depressed_cubic_roots(w: Complex64) -> [Complex64; 3] {
    // s = C + 1/(3C),  C³ = w/2 ± sqrt(w²/4 - 1/27)
    let disc = (w * w / 4.0 - 1.0 / 27.0).sqrt();
    let c1 = w / 2.0 + disc;
    let c2 = w / 2.0 - disc;
    let c3 = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let c = c3.cbrt();
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut rot = Complex64::new(1.0, 0.0);
    for root in roots.iter_mut() {
        let ck = c * rot;
        *root = if ck.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            ck + 1.0 / (3.0 * ck)
        };
        rot *= omega;
    }
    roots
}

fn newton_polish(w: Complex64, mut s: Complex64) -> Complex64 {
    for _ in 0..3 {
        let d = 3.0 * s * s - 1.0;
        if d.norm() < 1e-300 {
            break;
        }
        let step = (s * s * s - s - w) / d;
        s -= step;
        if step.norm() <= 1e-16 * s.norm().max(1.0) {
            break;
        }
    }
    s
}

/// Roots of `1 + z s - z s³ = 0`, each refined by Newton's method.
pub fn cubic_roots(z: Complex64) -> [Complex64; 3] {
    let w = 1.0 / z;
    depressed_cubic_roots(w).map(|r| newton_polish(w, r))
}

/// Tracks the Stieltjes branch along the vertical path from far above `z`
/// down to `z`, matching the nearest root at every step.
fn continue_from_infinity(z: Complex64) -> Option<Complex64> {
    let y_top = (4.0 + z.norm()).max(2.0 * z.im);
    let mut s = select_unambiguous(Complex64::new(z.re, y_top))?;
    let ratio_total = z.im / y_top;
    let mut t = 0.0f64; // log-fraction traversed
    let mut step = 1.0 / 64.0;
    while t < 1.0 {
        let t_next = (t + step).min(1.0);
        let zn = Complex64::new(z.re, y_top * ratio_total.powf(t_next));
        let roots = cubic_roots(zn);
        let mut d: Vec<(f64, Complex64)> = roots.iter().map(|r| ((r - s).norm(), *r)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        if d[0].0 < 0.25 * d[1].0 {
            s = d[0].1;
            t = t_next;
            step = (step * 1.5).min(1.0 / 16.0);
        } else {
            step *= 0.5;
            if step < 1e-9 {
                return None;
            }
        }
    }
    Some(s)
}

/// Returns the root with positive imaginary part if it is the only one,
/// with the other two roots clearly in the lower half-plane.
fn select_unambiguous(z: Complex64) -> Option<Complex64> {
    let roots = cubic_roots(z);
    let margin = 1e-8;
    let upper: Vec<_> = roots.iter().filter(|r| r.im > margin).collect();
    let lower = roots.iter().filter(|r| r.im < -margin).count();
    (upper.len() == 1 && lower == 2).then(|| *upper[0])
}

/// Solves `1 + z s - z s³ = 0` for the Stieltjes branch.
pub fn solve_s(z: Complex64) -> Result<StieltjesPoint> {
    if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::domain(
            "solve_s",
            format!("z = {z} is not strictly off the real axis; use boundary_kernel"),
        ));
    }
    if z.im < 0.0 {
        let p = solve_s(z.conj())?;
        return Ok(StieltjesPoint {
            z,
            s: p.s.conj(),
            residual: p.residual,
        });
    }
    let roots = cubic_roots(z);
    let chosen = select_unambiguous(z).or_else(|| continue_from_infinity(z));
    match chosen {
        Some(s) if s.im > 0.0 => {
            let residual = cubic_residual(z, s);
            if residual > RESIDUAL_TOL {
                return Err(Error::BranchSelection {
                    z,
                    candidates: roots,
                });
            }
            Ok(StieltjesPoint { z, s, residual })
        }
        _ => Err(Error::BranchSelection {
            z,
            candidates: roots,
        }),
    }
}

/// `∫ p(λ) / (λ - z) dλ` by quadrature against the symmetrized density.
pub fn stieltjes_from_density(z: Complex64, family: &FussCatalanFamily) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::domain(
            "stieltjes_from_density",
            format!("z = {z} lies on the real axis"),
        ));
    }
    let cfg = QuadConfig {
        abs_tol: 1e-11,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    };
    let re = family.integrate_symmetric(
        |l| family.sym_density_at(l) * (l - z.re) / ((l - z.re).powi(2) + z.im * z.im),
        &cfg,
    )?;
    let im = family.integrate_symmetric(
        |l| family.sym_density_at(l) * z.im / ((l - z.re).powi(2) + z.im * z.im),
        &cfg,
    )?;
    Ok(Complex64::new(re.value, im.value))
}

/// `K(z) = (1/z - 2s(z)) / (1 - 3s(z)²)` in both algebraic forms.
pub fn kernel_k(z: Complex64) -> Result<KernelValue> {
    let point = solve_s(z)?;
    let s = point.s;
    let denom = 1.0 - 3.0 * s * s;
    if denom.norm() < POLE_TOL {
        return Err(Error::NearPole {
            z,
            denominator: denom.norm(),
        });
    }
    Ok(KernelValue {
        z,
        s,
        k: (1.0 / z - 2.0 * s) / denom,
        k_alt: s * (s * s - 3.0) / denom,
    })
}

/// `s(μ + i0)` for `0 < |μ| < a`: the root of the real cubic with positive
/// imaginary part.
pub fn boundary_s(mu: f64) -> Result<Complex64> {
    let a = 27f64.sqrt() / 2.0;
    if !(mu != 0.0 && mu.abs() < a) {
        return Err(Error::domain(
            "boundary_s",
            format!("μ = {mu} is not in (-a, a) \\ {{0}}"),
        ));
    }
    let w = Complex64::new(1.0 / mu, 0.0);
    depressed_cubic_roots(w)
        .map(|r| newton_polish(w, r))
        .into_iter()
        .filter(|r| r.im > 0.0)
        .max_by(|a, b| a.im.total_cmp(&b.im))
        .ok_or_else(|| Error::domain("boundary_s", format!("no complex root at μ = {mu}")))
}

/// Imaginary part of the kernel boundary value, `-(1/(3f)) (4f⁴ + 11f² + 4) / (4f² + 3)`.
pub fn boundary_im_k(f: f64) -> f64 {
    let f2 = f * f;
    -(4.0 * f2 * f2 + 11.0 * f2 + 4.0) / (3.0 * f * (4.0 * f2 + 3.0))
}

/// Real part of the kernel boundary value, `(1/3) g (5 - 4f²) / (4f² + 3)`.
///
/// This is the limit of `Re K(μ + iε)` as `ε ↓ 0`; it uses `3g² = 1 + f²`,
/// which holds on the support.
pub fn boundary_re_k(f: f64, g: f64) -> f64 {
    let f2 = f * f;
    g * (5.0 - 4.0 * f2) / (3.0 * (4.0 * f2 + 3.0))
}

pub fn boundary_kernel(mu: f64, family: &FussCatalanFamily) -> Result<KernelBoundary> {
    if family.m() != 2 {
        return Err(Error::domain(
            "boundary_kernel",
            format!("kernel is only defined for m = 2, got m = {}", family.m()),
        ));
    }
    if !(mu != 0.0 && mu.abs() < family.a()) {
        return Err(Error::domain(
            "boundary_kernel",
            format!("μ = {mu} is not in (-{a}, {a}) \\ {{0}}", a = family.a()),
        ));
    }
    let f = PI * family.sym_density_at(mu);
    let g = boundary_s(mu)?.re;
    Ok(KernelBoundary {
        mu,
        f,
        g,
        im_k: boundary_im_k(f),
        re_k: boundary_re_k(f, g),
    })
}

/// Residual of the unsymmetrized equation
/// `1 + w S + (-1)^(m+1) w^m S^(m+1) = 0` for the Stieltjes transform `S`
/// of `P_m` itself.
pub fn unsymmetrized_residual(m: u32, w: Complex64, s: Complex64) -> f64 {
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    (1.0 + w * s + sign * w.powu(m) * s.powu(m + 1)).norm()
}

/// Stieltjes transform of `P_m` (not symmetrized) by Newton continuation
/// of the unsymmetrized equation from `w + iT`, `T` large, down to `w`.
///
/// Only used as a consistency check against the symmetrized transform via
/// `s(z) = z S(z²)`.
pub fn solve_unsymmetrized(m: u32, w: Complex64) -> Result<Complex64> {
    if m == 0 || w.im <= 0.0 {
        return Err(Error::domain(
            "solve_unsymmetrized",
            format!("need m >= 1 and Im w > 0, got m = {m}, w = {w}"),
        ));
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let mf = f64::from(m);
    let poly = |s: Complex64, w: Complex64| {
        let wm = w.powu(m);
        (
            1.0 + w * s + sign * wm * s.powu(m + 1),
            w + sign * (mf + 1.0) * wm * s.powu(m),
        )
    };
    let newton = |mut s: Complex64, w: Complex64| -> Option<Complex64> {
        for _ in 0..50 {
            let (v, d) = poly(s, w);
            let step = v / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            s -= step;
            if step.norm() <= 1e-15 * s.norm().max(1e-300) {
                return Some(s);
            }
        }
        None
    };
    let y_top = 100.0 * (1.0 + w.norm()) * (mf + 1.0);
    let top = Complex64::new(w.re, y_top);
    let mut s = newton(-1.0 / top, top).ok_or_else(|| {
        Error::domain("solve_unsymmetrized", "Newton failed at the start of the path")
    })?;
    let ratio_total = w.im / y_top;
    let mut t = 0.0f64;
    let mut step = 1.0 / 128.0;
    while t < 1.0 {
        let t_next = (t + step).min(1.0);
        let wn = Complex64::new(w.re, y_top * ratio_total.powf(t_next));
        match newton(s, wn) {
            Some(next) if (next - s).norm() <= 0.1 * s.norm().max(1e-3) && next.im > 0.0 => {
                s = next;
                t = t_next;
                step = (step * 1.5).min(1.0 / 32.0);
            }
            _ => {
                step *= 0.5;
                if step < 1e-10 {
                    return Err(Error::domain(
                        "solve_unsymmetrized",
                        format!("continuation stalled at w = {wn}"),
                    ));
                }
            }
        }
    }
    Ok(s)
}
