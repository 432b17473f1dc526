//! Fuss-Catalan numbers and the Fuss-Catalan family of densities.
//!
//! `P_m` is the limiting density of squared singular values of a product of
//! `m` independent square matrices with i.i.d. standardized entries. Its
//! `k`-th moment is the Fuss-Catalan number `C((m+1)k, k) / (mk + 1)` and its
//! support is `[0, K_m]` with `K_m = (m+1)^(m+1) / m^m`.
//!
//! The symmetrized density `p(λ) = |λ| P_m(λ²)` lives on `[-a, a]`,
//! `a = sqrt(K_m)`, and is the density of `±s_k`.
//!
//! Closed forms are used for `m = 1` (Marchenko-Pastur) and `m = 2`; for
//! `m >= 3` the density is a finite sum of generalized hypergeometric series.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{combine, integrate, integrate_singular, Endpoint, QuadConfig, QuadResult};

/// Largest `(m+1)·k` accepted by [`fc_number`].
pub const FC_CAPACITY: u64 = 1 << 20;

/// Relative size of the next series term at which summation stops.
pub const SERIES_REL_TOL: f64 = 1e-14;
/// Hard cap on the number of hypergeometric terms per series.
pub const SERIES_MAX_TERMS: usize = 10_000;

const CDF_PANELS: usize = 64;

/// A Fuss-Catalan number together with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcNumber {
    pub m: u32,
    pub k: u32,
    pub value: BigUint,
}

impl FcNumber {
    pub fn new(m: u32, k: u32) -> Result<Self> {
        Ok(Self {
            m,
            k,
            value: fc_number(m, k)?,
        })
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // exact at every step: acc = C(n, i+1) after the division
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `M_k = C((m+1)k, k) / (mk + 1)` in exact integer arithmetic.
pub fn fc_number(m: u32, k: u32) -> Result<BigUint> {
    if m == 0 {
        return Err(Error::domain("fc_number", "m must be at least 1"));
    }
    let total = (u64::from(m) + 1)
        .checked_mul(u64::from(k))
        .filter(|&t| t <= FC_CAPACITY)
        .ok_or_else(|| {
            Error::ArithmeticCapacity(format!(
                "(m+1)·k for m = {m}, k = {k} exceeds capacity {FC_CAPACITY}"
            ))
        })?;
    let c = binomial(total, u64::from(k));
    let denom = u64::from(m) * u64::from(k) + 1;
    debug_assert!((&c % denom).is_zero());
    Ok(c / denom)
}

/// [`fc_number`] narrowed to `u64`, failing when the value does not fit.
pub fn fc_number_u64(m: u32, k: u32) -> Result<u64> {
    fc_number(m, k)?.to_u64().ok_or_else(|| {
        Error::ArithmeticCapacity(format!("M_{k} for m = {m} does not fit in 64 bits"))
    })
}

/// Fuss-Catalan numbers `M_0..=M_kmax` generated purely from the
/// convolution recurrence `M_k = Σ_{k_0+...+k_m = k-1} Π M_{k_ν}`.
pub fn fc_numbers_by_recurrence(m: u32, kmax: u32) -> Vec<BigUint> {
    let kmax = kmax as usize;
    let mut seq = vec![BigUint::one()];
    for k in 1..=kmax {
        // coefficient of t^(k-1) in (Σ_j M_j t^j)^(m+1), truncated to degree k-1
        let mut power = vec![BigUint::zero(); k];
        power[0] = BigUint::one();
        for _ in 0..=m {
            let mut next = vec![BigUint::zero(); k];
            for (i, pi) in power.iter().enumerate() {
                if pi.is_zero() {
                    continue;
                }
                for (j, mj) in seq.iter().enumerate().take(k - i) {
                    next[i + j] += pi * mj;
                }
            }
            power = next;
        }
        seq.push(power[k - 1].clone());
    }
    seq
}

/// Point value of a density that may diverge at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityValue {
    Finite(f64),
    /// The density has an integrable singularity at the requested point.
    Divergent,
}

impl DensityValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            DensityValue::Finite(v) => Some(v),
            DensityValue::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, DensityValue::Divergent)
    }
}

#[derive(Debug, Clone)]
struct SeriesTerm {
    coefficient: f64,
    exponent: f64,
    upper: Vec<f64>,
    lower: Vec<f64>,
}

#[derive(Debug)]
struct CdfTable {
    /// Nodes `t_i = x_i^(1/(m+1))` on the lower half `[0, K/2]`.
    lower_step: f64,
    lower_cum: Vec<f64>,
    /// Nodes `v_j = sqrt(K - x_j)` on the upper half, measured from the edge.
    upper_step: f64,
    /// `upper_tail[j] = ∫_{K - v_j²}^{K} P`.
    upper_tail: Vec<f64>,
    lower_mass: f64,
    upper_mass: f64,
}

/// Parameters and evaluators of the Fuss-Catalan law `P_m`.
#[derive(Debug, Clone)]
pub struct FussCatalanFamily {
    m: u32,
    k_m: f64,
    a: f64,
    series: Arc<Vec<SeriesTerm>>,
    cdf_table: OnceLock<Arc<CdfTable>>,
}

fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

impl FussCatalanFamily {
    pub const MAX_M: u32 = 32;

    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > Self::MAX_M {
            return Err(Error::domain(
                "FussCatalanFamily::new",
                format!("m = {m} outside 1..={}", Self::MAX_M),
            ));
        }
        let mf = f64::from(m);
        let k_m = (mf + 1.0).powf(mf + 1.0) / mf.powf(mf);
        Ok(Self {
            m,
            k_m,
            a: k_m.sqrt(),
            series: Arc::new(Self::series_terms(m)),
            cdf_table: OnceLock::new(),
        })
    }

    /// The `m = 2` law, the only order for which the CLT variance is known.
    pub fn two() -> Self {
        Self::new(2).expect("m = 2 is valid")
    }

    fn series_terms(m: u32) -> Vec<SeriesTerm> {
        let mf = f64::from(m);
        let m1 = mf + 1.0;
        (1..=m)
            .map(|k| {
                let kf = f64::from(k);
                let mut coefficient = mf.powf(-1.5)
                    * (m1 / (2.0 * PI)).sqrt()
                    * (mf.powf(mf / m1) / m1).powf(kf);
                for j in (1..=m).filter(|&j| j != k) {
                    coefficient *= gamma((f64::from(j) - kf) / m1);
                }
                for j in 1..=m {
                    coefficient *= recip_gamma((f64::from(j) + 1.0) / mf - kf / m1);
                }
                let upper = (1..=m)
                    .map(|j| 1.0 - (1.0 + f64::from(j)) / mf + kf / m1)
                    .collect();
                let lower = (1..=m)
                    .filter(|&j| j != k)
                    .map(|j| 1.0 + (kf - f64::from(j)) / m1)
                    .collect();
                SeriesTerm {
                    coefficient,
                    exponent: kf / m1 - 1.0,
                    upper,
                    lower,
                }
            })
            .collect()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Upper edge `K_m` of the support of `P_m`.
    pub fn k_m(&self) -> f64 {
        self.k_m
    }

    /// Upper edge `a = sqrt(K_m)` of the symmetrized support.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Substitution power that regularizes `P_m` at the origin.
    pub fn origin_power(&self) -> f64 {
        f64::from(self.m) + 1.0
    }

    /// `P_m(x)`, with the divergence at the origin reported explicitly.
    pub fn density(&self, x: f64) -> DensityValue {
        if x == 0.0 {
            DensityValue::Divergent
        } else {
            DensityValue::Finite(self.density_at(x))
        }
    }

    /// `P_m(x)` as a plain float; `+∞` at the origin, 0 outside `(0, K_m)`.
    pub fn density_at(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.k_m {
            return 0.0;
        }
        if x == 0.0 {
            return f64::INFINITY;
        }
        match self.m {
            1 => p1(x),
            2 => p2(x),
            _ => self.general_eval(x).0,
        }
    }

    /// `P_m(x)` from the hypergeometric representation, for any `m`.
    /// `None` where some series has not converged within the term cap,
    /// which happens only close to the upper edge.
    pub fn series_density(&self, x: f64) -> Option<f64> {
        self.series_eval(x).map(|(v, _)| v)
    }

    /// `P_m(x)` from the parametric form of the support.
    pub fn parametric_density(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.k_m {
            return 0.0;
        }
        parametric_eval(self.m, x).0
    }

    /// `(P_m(x), P_m'(x))` for `m ≥ 3`: the series where it converges, the
    /// parametric form elsewhere.
    fn general_eval(&self, x: f64) -> (f64, f64) {
        self.series_eval(x).unwrap_or_else(|| parametric_eval(self.m, x))
    }

    fn series_eval(&self, x: f64) -> Option<(f64, f64)> {
        if x <= 0.0 || x >= self.k_m {
            return Some((0.0, 0.0));
        }
        let z = x / self.k_m;
        let mut value = 0.0;
        let mut deriv = 0.0;
        for term in self.series.iter() {
            let (f, df, converged) = hypergeometric(&term.upper, &term.lower, z);
            if !converged {
                return None;
            }
            let xa = x.powf(term.exponent);
            value += term.coefficient * xa * f;
            deriv += term.coefficient
                * (term.exponent * xa / x * f + xa * df / self.k_m);
        }
        Some((value, deriv))
    }

    /// `P_m'(x)` on the open support.
    pub fn density_derivative(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < self.k_m) {
            return Err(Error::domain(
                "density_derivative",
                format!("x = {x} not in (0, {})", self.k_m),
            ));
        }
        Ok(match self.m {
            1 => p1_prime(x),
            2 => p2_prime(x),
            _ => self.general_eval(x).1,
        })
    }

    /// `p(λ) = |λ| P_m(λ²)`.
    pub fn symmetrized_density(&self, lambda: f64) -> DensityValue {
        if lambda == 0.0 {
            match self.m {
                1 => DensityValue::Finite(1.0 / PI),
                _ => DensityValue::Divergent,
            }
        } else {
            DensityValue::Finite(self.sym_density_at(lambda))
        }
    }

    /// `p(λ)` as a plain float; `+∞` at the origin for `m >= 2`.
    pub fn sym_density_at(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        if l == 0.0 {
            return if self.m == 1 { 1.0 / PI } else { f64::INFINITY };
        }
        if l >= self.a {
            return 0.0;
        }
        l * self.density_at(l * l)
    }

    /// `p'(λ) = sgn(λ) [P_m(λ²) + 2λ² P_m'(λ²)]` for `0 < |λ| < a`.
    pub fn symmetrized_density_derivative(&self, lambda: f64) -> Result<f64> {
        let l = lambda.abs();
        if !(l > 0.0 && l < self.a) {
            return Err(Error::domain(
                "symmetrized_density_derivative",
                format!("λ = {lambda} is at or beyond a singular point (0, ±{})", self.a),
            ));
        }
        let x = l * l;
        let d = self.density_at(x) + 2.0 * x * self.density_derivative(x)?;
        Ok(if lambda < 0.0 { -d } else { d })
    }

    /// `∫_0^{K_m} h(x) P_m(x) dx` with both endpoint singularities absorbed.
    pub fn integrate_against_density<F: FnMut(f64) -> f64>(
        &self,
        mut h: F,
        cfg: &QuadConfig,
    ) -> Result<QuadResult> {
        integrate_singular(
            |x| h(x) * self.density_at(x),
            0.0,
            self.k_m,
            Endpoint::Algebraic(self.origin_power()),
            Endpoint::Algebraic(2.0),
            cfg,
        )
    }

    /// `∫_{-a}^{a} h(λ) dλ` for integrands whose singular behaviour is that of
    /// `p` (or `1/p`): algebraic at `0` and square-root at `±a`.
    ///
    /// The support is tiled at `{-a, -a/2, 0, a/2, a}`; each tile gets the
    /// substitution matching its singular end.
    pub fn integrate_symmetric<F: FnMut(f64) -> f64>(
        &self,
        mut h: F,
        cfg: &QuadConfig,
    ) -> Result<QuadResult> {
        let half = QuadConfig {
            abs_tol: 0.5 * cfg.abs_tol,
            ..*cfg
        };
        let q = Endpoint::Algebraic(self.origin_power());
        let left = integrate_singular(&mut h, -self.a, 0.0, Endpoint::Algebraic(2.0), q, &half);
        let right = integrate_singular(&mut h, 0.0, self.a, q, Endpoint::Algebraic(2.0), &half);
        combine(left, right)
    }

    /// `∫ x^k P_m(x) dx` by quadrature.
    pub fn moment(&self, k: u32) -> Result<QuadResult> {
        let cfg = QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-13,
            max_subdivisions: 4000,
        };
        let k = k as i32;
        self.integrate_against_density(|x| x.powi(k), &cfg)
    }

    fn lower_integrand(&self, t: f64) -> f64 {
        let q = self.origin_power();
        if t <= 0.0 {
            return 0.0;
        }
        self.density_at(t.powf(q)) * q * t.powf(q - 1.0)
    }

    fn upper_integrand(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        self.density_at(self.k_m - v * v) * 2.0 * v
    }

    fn panel_integral<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        let cfg = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 1e-14,
            max_subdivisions: 200,
        };
        match integrate(f, a, b, &cfg) {
            Ok(r) => r.value,
            Err(Error::Quadrature { estimate, .. }) => estimate,
            Err(e) => panic!("density quadrature failed on a smooth panel: {e}"),
        }
    }

    fn cdf_table(&self) -> &CdfTable {
        self.cdf_table.get_or_init(|| {
            let half = 0.5 * self.k_m;
            let lower_step = half.powf(1.0 / self.origin_power()) / CDF_PANELS as f64;
            let upper_step = half.sqrt() / CDF_PANELS as f64;
            let mut lower_cum = vec![0.0; CDF_PANELS + 1];
            let mut upper_tail = vec![0.0; CDF_PANELS + 1];
            for i in 0..CDF_PANELS {
                let (t0, t1) = (i as f64 * lower_step, (i + 1) as f64 * lower_step);
                lower_cum[i + 1] =
                    lower_cum[i] + Self::panel_integral(|t| self.lower_integrand(t), t0, t1);
                let (v0, v1) = (i as f64 * upper_step, (i + 1) as f64 * upper_step);
                upper_tail[i + 1] =
                    upper_tail[i] + Self::panel_integral(|v| self.upper_integrand(v), v0, v1);
            }
            Arc::new(CdfTable {
                lower_step,
                lower_mass: lower_cum[CDF_PANELS],
                lower_cum,
                upper_step,
                upper_mass: upper_tail[CDF_PANELS],
                upper_tail,
            })
        })
    }

    /// Distribution function `G_m(x) = ∫_0^x P_m`.
    ///
    /// Built on a table of panel integrals computed once per family, then
    /// completed by one smooth partial-panel integral per query.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.k_m {
            return 1.0;
        }
        let table = self.cdf_table();
        let value = if x <= 0.5 * self.k_m {
            let t = x.powf(1.0 / self.origin_power());
            let i = ((t / table.lower_step) as usize).min(CDF_PANELS - 1);
            let t0 = i as f64 * table.lower_step;
            table.lower_cum[i] + Self::panel_integral(|s| self.lower_integrand(s), t0, t)
        } else {
            let v = (self.k_m - x).sqrt();
            let j = ((v / table.upper_step) as usize).min(CDF_PANELS - 1);
            let v0 = j as f64 * table.upper_step;
            let tail = table.upper_tail[j] + Self::panel_integral(|s| self.upper_integrand(s), v0, v);
            table.lower_mass + (table.upper_mass - tail)
        };
        value.clamp(0.0, 1.0)
    }

    /// Total mass of the cached CDF table (should be 1).
    pub fn total_mass(&self) -> f64 {
        let t = self.cdf_table();
        t.lower_mass + t.upper_mass
    }

    /// Inverse of [`cdf`](Self::cdf) by bisection.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain("quantile", format!("q = {q} not in [0, 1]")));
        }
        let (mut lo, mut hi) = (0.0, self.k_m);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Distribution function of the symmetrized law,
    /// `(1 + sgn(x) G_m(x²)) / 2`.
    pub fn symmetrized_cdf(&self, x: f64) -> f64 {
        0.5 * (1.0 + x.signum() * self.cdf(x * x))
    }
}

fn p1(x: f64) -> f64 {
    (1.0 - 0.25 * x).sqrt() / (PI * x.sqrt())
}

fn p1_prime(x: f64) -> f64 {
    let s = (1.0 - 0.25 * x).sqrt();
    (-0.125 / (s * x.sqrt()) - 0.5 * s / (x * x.sqrt())) / PI
}

const CBRT2: f64 = 1.259_921_049_894_873_2;

fn p2_prefactor() -> f64 {
    CBRT2 * 3f64.sqrt() / (12.0 * PI)
}

fn p2(x: f64) -> f64 {
    let r = 27.0 + 3.0 * (81.0 - 12.0 * x).sqrt();
    let num = CBRT2 * r.powf(2.0 / 3.0) - 6.0 * x.cbrt();
    p2_prefactor() * num / (x.powf(2.0 / 3.0) * r.cbrt())
}

fn p2_prime(x: f64) -> f64 {
    let s = (81.0 - 12.0 * x).sqrt();
    let r = 27.0 + 3.0 * s;
    let dr = -18.0 / s;
    let num = CBRT2 * r.powf(2.0 / 3.0) - 6.0 * x.cbrt();
    let dnum = CBRT2 * (2.0 / 3.0) * r.powf(-1.0 / 3.0) * dr - 2.0 * x.powf(-2.0 / 3.0);
    let den = x.powf(2.0 / 3.0) * r.cbrt();
    let dden = (2.0 / 3.0) * x.powf(-1.0 / 3.0) * r.cbrt()
        + (1.0 / 3.0) * x.powf(2.0 / 3.0) * r.powf(-2.0 / 3.0) * dr;
    p2_prefactor() * (dnum * den - num * dden) / (den * den)
}

/// `(pFq(upper; lower; z), d/dz pFq, converged)` with `p = q + 1`, summed
/// until the next term is negligible relative to the partial sum.
fn hypergeometric(upper: &[f64], lower: &[f64], z: f64) -> (f64, f64, bool) {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut dsum = 0.0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let mut ratio = z / (nf + 1.0);
        for &a in upper {
            ratio *= a + nf;
        }
        for &b in lower {
            ratio /= b + nf;
        }
        term *= ratio;
        if term == 0.0 {
            return (sum, dsum, true);
        }
        sum += term;
        dsum += (nf + 1.0) * term / z;
        if term.abs() < SERIES_REL_TOL * sum.abs()
            && (nf + 1.0) * term.abs() < SERIES_REL_TOL * z * dsum.abs().max(1.0)
        {
            return (sum, dsum, true);
        }
    }
    (sum, dsum, false)
}

/// Parametrization of the support by `φ ∈ (0, π/(m+1))`:
/// `x(φ) = sin^(m+1)((m+1)φ) / (sin φ · sin^m(mφ))`, decreasing from `K_m`
/// to 0, with `P_m(x(φ)) = sin²φ · sin^(m-1)(mφ) / (π sin^m((m+1)φ))`.
fn parametric_log_x(m: f64, phi: f64) -> f64 {
    (m + 1.0) * ((m + 1.0) * phi).sin().ln() - phi.sin().ln() - m * (m * phi).sin().ln()
}

/// `(P_m(x), P_m'(x))` from the parametric form, by inverting `x(φ)`.
fn parametric_eval(m: u32, x: f64) -> (f64, f64) {
    let mf = f64::from(m);
    let target = x.ln();
    let (mut lo, mut hi) = (0.0, PI / (mf + 1.0));
    let mut phi = 0.5 * hi;
    for _ in 0..200 {
        let r = parametric_log_x(mf, phi) - target;
        if r.abs() < 1e-15 {
            break;
        }
        if r > 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let dlogx = dlog_x(mf, phi);
        let newton = phi - r / dlogx;
        phi = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-16 * phi {
            break;
        }
    }
    let (s1, sm, sm1) = (phi.sin(), (mf * phi).sin(), ((mf + 1.0) * phi).sin());
    let p = s1 * s1 * sm.powf(mf - 1.0) / (PI * sm1.powf(mf));
    let cot = |t: f64| t.cos() / t.sin();
    let dlogp = 2.0 * cot(phi) + (mf - 1.0) * mf * cot(mf * phi) - mf * (mf + 1.0) * cot((mf + 1.0) * phi);
    (p, p / x * dlogp / dlog_x(mf, phi))
}

fn dlog_x(m: f64, phi: f64) -> f64 {
    let cot = |t: f64| t.cos() / t.sin();
    (m + 1.0) * (m + 1.0) * cot((m + 1.0) * phi) - cot(phi) - m * m * cot(m * phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fuss_catalan_values() {
        assert_eq!(fc_number_u64(2, 0).unwrap(), 1);
        assert_eq!(fc_number_u64(2, 2).unwrap(), 3);
        assert_eq!(fc_number_u64(2, 5).unwrap(), 273);
        assert_eq!(fc_number_u64(1, 3).unwrap(), 5);
    }

    #[test]
    fn catalan_numbers_for_m1() {
        let catalan = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (k, &c) in catalan.iter().enumerate() {
            assert_eq!(fc_number_u64(1, k as u32).unwrap(), c);
        }
    }

    #[test]
    fn capacity_errors_are_explicit() {
        assert!(matches!(
            fc_number(3, u32::MAX),
            Err(Error::ArithmeticCapacity(_))
        ));
        // fits in BigUint, not in u64
        assert!(matches!(
            fc_number_u64(2, 60),
            Err(Error::ArithmeticCapacity(_))
        ));
        assert!(fc_number(2, 60).is_ok());
        assert!(matches!(fc_number(0, 1), Err(Error::Domain { .. })));
    }

    #[test]
    fn support_bound_is_exact() {
        assert_eq!(FussCatalanFamily::new(1).unwrap().k_m(), 4.0);
        assert_eq!(FussCatalanFamily::two().k_m(), 6.75);
        assert!((FussCatalanFamily::two().a() - 27f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(FussCatalanFamily::new(0).is_err());
    }

    #[test]
    fn closed_form_p1_at_one() {
        let fam = FussCatalanFamily::new(1).unwrap();
        let expected = 3f64.sqrt() / (2.0 * PI);
        assert!((fam.density_at(1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn density_outside_support_is_zero() {
        let fam = FussCatalanFamily::two();
        assert_eq!(fam.density(8.0), DensityValue::Finite(0.0));
        assert_eq!(fam.density(-1.0), DensityValue::Finite(0.0));
        assert_eq!(fam.density(6.75), DensityValue::Finite(0.0));
        assert!(fam.density(0.0).is_divergent());
        assert_eq!(fam.sym_density_at(3.0), 0.0);
        assert!(fam.symmetrized_density(0.0).is_divergent());
        let mp = FussCatalanFamily::new(1).unwrap();
        assert_eq!(mp.symmetrized_density(0.0), DensityValue::Finite(1.0 / PI));
    }

    #[test]
    fn derivative_domain_errors() {
        let fam = FussCatalanFamily::two();
        for l in [0.0, fam.a(), -fam.a(), 3.0] {
            assert!(fam.symmetrized_density_derivative(l).is_err());
        }
        assert!(fam.density_derivative(0.0).is_err());
    }

    #[test]
    fn cdf_endpoints() {
        let fam = FussCatalanFamily::two();
        assert_eq!(fam.cdf(0.0), 0.0);
        assert_eq!(fam.cdf(-2.0), 0.0);
        assert!((fam.cdf(6.75) - 1.0).abs() < 1e-8);
        assert!((fam.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let fam = FussCatalanFamily::two();
        for q in [0.01, 0.25, 0.5, 0.9, 0.999] {
            let x = fam.quantile(q).unwrap();
            assert!((fam.cdf(x) - q).abs() < 1e-12, "q = {q}");
        }
        assert!(fam.quantile(1.5).is_err());
    }
}
