//! Globally adaptive Gauss-Kronrod quadrature with algebraic endpoint
//! substitutions.
//!
//! The densities in this crate have integrable algebraic singularities at
//! the ends of their support (`x^(1/(m+1) - 1)` at the origin, a square-root
//! zero at the upper edge). [`integrate_singular`] removes them with the
//! substitution `x = lo + t^q` (or `x = hi - t^q`), after which the 21-point
//! Kronrod rule converges geometrically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], ...`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;

    fn add(self, rhs: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

/// Behaviour of the integrand at one end of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Regular,
    /// Integrable algebraic singularity absorbed by `x - end = ±t^power`.
    Algebraic(f64),
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// estimate of `∫ |f|` over the panel
    abs: f64,
}

/// Error level that refinement cannot get below: each panel's estimate
/// already carries `50 ε ∫|f|`, so a cancelling integrand whose requested
/// tolerance is under this floor is accepted at the floor.
fn roundoff_floor(abs_integral: f64) -> f64 {
    100.0 * f64::EPSILON * abs_integral
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is reproducible
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One application of the 10/21-point Gauss-Kronrod pair on `[a, b]`.
///
/// Returns `(kronrod estimate, error estimate)`.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    gk21_abs(f, a, b).map(|(v, e, _)| (v, e))
}

/// As [`gk21`], also returning the Kronrod estimate of `∫ |f|`.
fn gk21_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = checked(f, center)?;
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = checked(f, center - x)?;
        let f2 = checked(f, center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale);
    Ok((res_k * half, err, res_abs * scale))
}

fn checked<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(
            "quadrature",
            format!("integrand is not finite ({v}) at x = {x:e}"),
        ))
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error, abs) = gk21_abs(&mut f, a, b)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    heap.push(Panel { a, b, value, error, abs });
    let mut total_value = value;
    let mut total_error = error;
    let mut total_abs = abs;

    let mut subdivisions = 1;
    while total_error > cfg.target(total_value).max(roundoff_floor(total_abs)) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval at machine resolution; keep its estimate as final
            done.push(worst);
            continue;
        }
        if subdivisions >= cfg.max_subdivisions {
            heap.push(worst);
            break;
        }
        let (v1, e1, a1) = gk21_abs(&mut f, worst.a, mid)?;
        let (v2, e2, a2) = gk21_abs(&mut f, mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs: a1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs: a2,
        });
    }

    // re-sum from scratch in position order; the running totals drift
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut vsum = NeumaierSum::new();
    let mut esum = NeumaierSum::new();
    let mut asum = NeumaierSum::new();
    for p in &panels {
        vsum.add(p.value);
        esum.add(p.error);
        asum.add(p.abs);
    }
    let value = vsum.total();
    let error = esum.total();
    if error > cfg.target(value).max(roundoff_floor(asum.total())) {
        return Err(Error::Quadrature {
            estimate: value,
            error_bound: error,
            tolerance: cfg.target(value),
        });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `[lo, hi]`, absorbing algebraic endpoint
/// singularities by power substitutions.
///
/// When both ends are singular the interval is split at its midpoint and
/// each half gets its own substitution.
pub fn integrate_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    lo_end: Endpoint,
    hi_end: Endpoint,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    singular_dyn(&mut f, lo, hi, lo_end, hi_end, cfg)
}

fn singular_dyn(
    f: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    lo_end: Endpoint,
    hi_end: Endpoint,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if hi < lo {
        let r = singular_dyn(f, hi, lo, hi_end, lo_end, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    match (lo_end, hi_end) {
        (Endpoint::Regular, Endpoint::Regular) => integrate(f, lo, hi, cfg),
        (Endpoint::Algebraic(q), Endpoint::Regular) => {
            let t_max = (hi - lo).powf(1.0 / q);
            integrate(
                |t: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let x = lo + t.powf(q);
                    f(x) * q * t.powf(q - 1.0)
                },
                0.0,
                t_max,
                cfg,
            )
        }
        (Endpoint::Regular, Endpoint::Algebraic(q)) => {
            let t_max = (hi - lo).powf(1.0 / q);
            integrate(
                |t: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let x = hi - t.powf(q);
                    f(x) * q * t.powf(q - 1.0)
                },
                0.0,
                t_max,
                cfg,
            )
        }
        (Endpoint::Algebraic(_), Endpoint::Algebraic(_)) => {
            let mid = 0.5 * (lo + hi);
            let half_cfg = QuadConfig {
                abs_tol: 0.5 * cfg.abs_tol,
                ..*cfg
            };
            let left = singular_dyn(f, lo, mid, lo_end, Endpoint::Regular, &half_cfg);
            let right = singular_dyn(f, mid, hi, Endpoint::Regular, hi_end, &half_cfg);
            combine(left, right)
        }
    }
}

/// Sums two partial integrals; a tolerance failure in either part is
/// reported with the estimate and error bound of the whole.
pub fn combine(left: Result<QuadResult>, right: Result<QuadResult>) -> Result<QuadResult> {
    fn parts(r: &Result<QuadResult>) -> Option<(f64, f64, f64)> {
        match r {
            Ok(q) => Some((q.value, q.error, 0.0)),
            Err(Error::Quadrature {
                estimate,
                error_bound,
                tolerance,
            }) => Some((*estimate, *error_bound, *tolerance)),
            Err(_) => None,
        }
    }
    match (left, right) {
        (Ok(l), Ok(r)) => Ok(l + r),
        (l, r) => {
            let (Some(lp), Some(rp)) = (parts(&l), parts(&r)) else {
                // a non-quadrature error takes precedence
                return Err(l.err().filter(|e| !matches!(e, Error::Quadrature { .. }))
                    .or(r.err())
                    .expect("at least one side failed"));
            };
            Err(Error::Quadrature {
                estimate: lp.0 + rp.0,
                error_bound: lp.1 + rp.1,
                tolerance: lp.2 + rp.2,
            })
        }
    }
}

/// Runs a fallible integrand through a quadrature routine, surfacing the
/// first integrand error instead of a corrupted estimate.
pub fn try_integrate_with<G, Q>(mut g: G, quadrature: Q) -> Result<QuadResult>
where
    G: FnMut(f64) -> Result<f64>,
    Q: FnOnce(&mut dyn FnMut(f64) -> f64) -> Result<QuadResult>,
{
    let mut failure: Option<Error> = None;
    let mut wrapped = |x: f64| {
        if failure.is_some() {
            return 0.0;
        }
        match g(x) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let result = quadrature(&mut wrapped);
    if let Some(e) = failure {
        return Err(e);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        for deg in [0, 5, 17, 31] {
            let (v, _) = gk21(&mut |x: f64| x.powi(deg), 0.0, 1.0).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "degree {deg}: {v} vs {exact}");
        }
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((g - 2.0).abs() < 1e-14);
        assert!((k - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let r = integrate(|x: f64| (50.0 * x).cos(), 0.0, 3.0, &QuadConfig::default()).unwrap();
        let exact = (150.0f64).sin() / 50.0;
        assert!((r.value - exact).abs() < 1e-10);
    }

    #[test]
    fn inverse_cube_root_singularity_absorbed() {
        // ∫_0^1 x^(-2/3) dx = 3
        let r = integrate_singular(
            |x: f64| x.powf(-2.0 / 3.0),
            0.0,
            1.0,
            Endpoint::Algebraic(3.0),
            Endpoint::Regular,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn both_endpoints_singular() {
        // ∫_0^1 x^(-1/2) (1-x)^(-1/2) dx = π
        let r = integrate_singular(
            |x: f64| 1.0 / (x * (1.0 - x)).sqrt(),
            0.0,
            1.0,
            Endpoint::Algebraic(2.0),
            Endpoint::Algebraic(2.0),
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_singular(
            |x: f64| x,
            1.0,
            0.0,
            Endpoint::Regular,
            Endpoint::Regular,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &QuadConfig::default());
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn unreachable_tolerance_reports_best_estimate() {
        let cfg = QuadConfig {
            abs_tol: 1e-30,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        let r = integrate(|x: f64| (x * 40.0).sin().abs(), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn fallible_integrand_propagates_error() {
        let r = try_integrate_with(
            |x| {
                if x > 0.5 {
                    Err(Error::Precondition("boom".into()))
                } else {
                    Ok(x)
                }
            },
            |g| integrate(g, 0.0, 1.0, &QuadConfig::default()),
        );
        assert_eq!(r, Err(Error::Precondition("boom".into())));
    }
}
