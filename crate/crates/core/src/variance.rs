//! Limiting variance of the centered linear statistic `Σ f(s_k²)` for the
//! product of two square random matrices with i.i.d. entries.
//!
//! Write `g(λ) = f(λ²)` and let `p` be the symmetrized density on `[-a, a]`.
//! The variance splits into a Gaussian part and a fourth-cumulant correction:
//!
//! ```text
//! V(f) = (1/π²) ∬ D(λ, μ) g'(λ) p(λ) ρ(μ) dλ dμ  +  (κ₄ / 2) Ψ(f)²
//! D(λ, μ) = (g(λ) - g(μ)) / (λ - μ)
//! ρ(μ)    = -π Im K(μ + i0) = (π / 3φ) (4φ⁴ + 11φ² + 4) / (4φ² + 3),  φ = π p(μ)
//! Ψ(f)    = -∫ λ g'(λ) p(λ) dλ
//! ```
//!
//! Both integrals are done by nested adaptive quadrature on the substituted
//! coordinates of [`FussCatalanFamily::integrate_symmetric`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fcdist::FussCatalanFamily;
use crate::quad::{combine, integrate, integrate_singular, Endpoint, QuadConfig, QuadResult};
use crate::testfn::TestFunction;

/// Below this separation the divided difference is replaced by `g'` at the
/// midpoint.
pub const DIAGONAL_EPS: f64 = 1e-7;

/// Smallest admissible fourth cumulant (`μ₄ ≥ 1` for unit-variance entries).
pub const KAPPA4_MIN: f64 = -2.0;

const INNER_CFG: QuadConfig = QuadConfig {
    abs_tol: 1e-11,
    rel_tol: 1e-12,
    max_subdivisions: 4000,
};

const OUTER_CFG: QuadConfig = QuadConfig {
    abs_tol: 1e-9,
    rel_tol: 1e-11,
    max_subdivisions: 4000,
};

const PSI_CFG: QuadConfig = QuadConfig {
    abs_tol: 1e-13,
    rel_tol: 1e-13,
    max_subdivisions: 4000,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceBreakdown {
    pub test_function: String,
    pub kappa4: f64,
    pub gaussian_term: f64,
    pub psi: f64,
    pub kappa4_term: f64,
    pub total: f64,
    pub quadrature_error_estimate: f64,
}

fn require_m2(family: &FussCatalanFamily, op: &'static str) -> Result<()> {
    if family.m() != 2 {
        return Err(Error::domain(
            op,
            format!("the variance kernel is only available for m = 2, got m = {}", family.m()),
        ));
    }
    Ok(())
}

/// `ρ(μ)` as a function of the density value `p(μ) > 0`.
pub fn kernel_weight(p: f64) -> f64 {
    let phi = PI * p;
    if phi > 1.0 {
        // divide through by φ³ so large densities near the origin cannot overflow
        let inv = 1.0 / phi;
        let inv2 = inv * inv;
        PI * (4.0 * phi + 11.0 * inv + 4.0 * inv * inv2) / (3.0 * (4.0 + 3.0 * inv2))
    } else {
        let phi2 = phi * phi;
        PI * (4.0 * phi2 * phi2 + 11.0 * phi2 + 4.0) / (3.0 * phi * (4.0 * phi2 + 3.0))
    }
}

/// `D(λ, μ)` with a midpoint-derivative fallback on the diagonal.
pub fn divided_difference(f: &TestFunction, lambda: f64, mu: f64) -> f64 {
    let d = lambda - mu;
    if d.abs() < DIAGONAL_EPS {
        f.g_prime(0.5 * (lambda + mu))
    } else {
        (f.g(lambda) - f.g(mu)) / d
    }
}

/// `Ψ(f) = -∫ λ g'(λ) p(λ) dλ`.
pub fn psi(f: &TestFunction, family: &FussCatalanFamily) -> Result<QuadResult> {
    let r = family.integrate_symmetric(|l| -l * f.g_prime(l) * family.sym_density_at(l), &PSI_CFG)?;
    Ok(r)
}

/// `Ψ(f)` in its integrated-by-parts form `∫ g (p + λ p') dλ`, with the
/// windows `|λ| < δ` and `|λ| > a - δ` replaced by their leading-order
/// boundary terms. Converges to [`psi`] as `δ → 0`; used as a cross-check.
pub fn psi_direct(f: &TestFunction, family: &FussCatalanFamily, delta: f64) -> Result<f64> {
    let a = family.a();
    if !(delta > 0.0 && 2.0 * delta < a) {
        return Err(Error::domain("psi_direct", format!("δ = {delta} must lie in (0, a/2)")));
    }
    let body = integrate(
        |l| {
            f.g(l) * (family.sym_density_at(l) + l * edge_safe_derivative(family, l))
        },
        delta,
        a - delta,
        &PSI_CFG,
    )?;
    let origin = 2.0 * f.g(0.0) * delta * family.sym_density_at(delta);
    let edge = 2.0 * f.g(a) * (a - delta) * family.sym_density_at(a - delta);
    Ok(2.0 * body.value + origin - edge)
}

/// `p'(λ)` for `0 < |λ| < a`. Nodes that round onto `±a` inside the edge
/// substitution carry zero quadrature weight, so they get 0.
fn edge_safe_derivative(family: &FussCatalanFamily, l: f64) -> f64 {
    if l.abs() >= family.a() {
        0.0
    } else {
        family.symmetrized_density_derivative(l).unwrap_or(f64::NAN)
    }
}

/// Gaussian part of the limiting variance (the value for `κ₄ = 0`).
pub fn gaussian_variance(f: &TestFunction, family: &FussCatalanFamily) -> Result<QuadResult> {
    require_m2(family, "gaussian_variance")?;
    let mut inner_error = 0.0f64;
    let mut inner_failure: Option<Error> = None;
    let outer = family.integrate_symmetric(
        |mu| {
            if inner_failure.is_some() {
                return 0.0;
            }
            let inner = family.integrate_symmetric(
                |l| divided_difference(f, l, mu) * f.g_prime(l) * family.sym_density_at(l),
                &INNER_CFG,
            );
            match inner {
                Ok(r) => {
                    inner_error = inner_error.max(r.error);
                    r.value * kernel_weight(family.sym_density_at(mu))
                }
                Err(e) => {
                    inner_failure = Some(e);
                    0.0
                }
            }
        },
        &OUTER_CFG,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    let outer = outer?;
    // ∫ ρ = 3π², so the inner errors contribute at most 3 · max inner error.
    Ok(QuadResult {
        value: outer.value / (PI * PI),
        error: outer.error / (PI * PI) + 3.0 * inner_error,
        evaluations: outer.evaluations,
    })
}

/// Gaussian part in the symmetric form
/// `(1/2π²) ∬ D(λ, μ)² [p(λ) - p'(λ)(λ - μ)] ρ(μ) dλ dμ`, with the inner
/// integral restricted to `δ ≤ |λ| ≤ a`. The excision error is `O(δ^(2/3))`.
pub fn symmetric_form_variance(
    f: &TestFunction,
    family: &FussCatalanFamily,
    delta: f64,
) -> Result<QuadResult> {
    require_m2(family, "symmetric_form_variance")?;
    let a = family.a();
    if !(delta > 0.0 && delta < 0.5 * a) {
        return Err(Error::domain(
            "symmetric_form_variance",
            format!("δ = {delta} must lie in (0, a/2)"),
        ));
    }
    let half = QuadConfig {
        abs_tol: 0.5 * INNER_CFG.abs_tol,
        ..INNER_CFG
    };
    let mut inner_error = 0.0f64;
    let mut inner_failure: Option<Error> = None;
    let outer = family.integrate_symmetric(
        |mu| {
            if inner_failure.is_some() {
                return 0.0;
            }
            let mut h = |l: f64| {
                let d = divided_difference(f, l, mu);
                d * d * (family.sym_density_at(l) - edge_safe_derivative(family, l) * (l - mu))
            };
            let right = integrate_singular(&mut h, delta, a, Endpoint::Regular, Endpoint::Algebraic(2.0), &half);
            let left = integrate_singular(&mut h, -a, -delta, Endpoint::Algebraic(2.0), Endpoint::Regular, &half);
            match combine(left, right) {
                Ok(r) => {
                    inner_error = inner_error.max(r.error);
                    r.value * kernel_weight(family.sym_density_at(mu))
                }
                Err(e) => {
                    inner_failure = Some(e);
                    0.0
                }
            }
        },
        &OUTER_CFG,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(QuadResult {
        value: outer.value / (2.0 * PI * PI),
        error: outer.error / (2.0 * PI * PI) + 1.5 * inner_error,
        evaluations: outer.evaluations,
    })
}

/// Fourth-cumulant correction `(κ₄ / 2) Ψ(f)²`.
pub fn universality_shift(f: &TestFunction, kappa4: f64, family: &FussCatalanFamily) -> Result<f64> {
    check_kappa4(kappa4)?;
    let p = psi(f, family)?;
    Ok(0.5 * kappa4 * p.value * p.value)
}

fn check_kappa4(kappa4: f64) -> Result<()> {
    if !kappa4.is_finite() || kappa4 < KAPPA4_MIN {
        return Err(Error::Precondition(format!(
            "fourth cumulant {kappa4} is below the admissible minimum {KAPPA4_MIN}"
        )));
    }
    Ok(())
}

/// Full limiting variance for entries with fourth cumulant `kappa4`.
pub fn total_variance(
    f: &TestFunction,
    kappa4: f64,
    family: &FussCatalanFamily,
) -> Result<VarianceBreakdown> {
    check_kappa4(kappa4)?;
    let gauss = gaussian_variance(f, family)?;
    let p = psi(f, family)?;
    let kappa4_term = 0.5 * kappa4 * p.value * p.value;
    Ok(VarianceBreakdown {
        test_function: f.name(),
        kappa4,
        gaussian_term: gauss.value,
        psi: p.value,
        kappa4_term,
        total: gauss.value + kappa4_term,
        quadrature_error_estimate: gauss.error + (kappa4 * p.value).abs() * p.error,
    })
}
