use fc_clt_core::rmt_sim::{run_batch, EnsembleSpec, EntryDistribution};
use fc_clt_core::stats::sample_variance;
use fc_clt_core::variance::*;
use fc_clt_core::{Error, FussCatalanFamily, TestFunction};
use proptest::prelude::*;

fn fam() -> FussCatalanFamily {
    FussCatalanFamily::two()
}

fn gv(f: &TestFunction) -> f64 {
    gaussian_variance(f, &fam()).unwrap().value
}

#[test]
fn reported_error_estimates_are_small() {
    for f in TestFunction::registry() {
        let r = gaussian_variance(&f, &fam()).unwrap();
        assert!(r.error < 1e-8 * r.value.max(1.0), "{f}: {r:?}");
        assert!(r.value > 0.0);
    }
}

#[test]
fn psi_of_monomials_follows_the_moments() {
    // Ψ(x^k) = -2k M_k
    let moments = [1.0, 1.0, 3.0, 12.0];
    for k in 1..=3u32 {
        let p = psi(&TestFunction::Monomial(k), &fam()).unwrap().value;
        let expected = -2.0 * f64::from(k) * moments[k as usize];
        assert!((p - expected).abs() < 1e-9 * expected.abs(), "k={k}: {p}");
    }
    assert_eq!(psi(&TestFunction::Constant(3.0), &fam()).unwrap().value, 0.0);
}

#[test]
fn direct_psi_converges() {
    for f in TestFunction::registry() {
        let target = psi(&f, &fam()).unwrap().value;
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d| (psi_direct(&f, &fam(), d).unwrap() - target).abs())
            .collect();
        assert!(errs[2] < 1e-3 * target.abs().max(1.0), "{f}: {errs:?}");
        assert!(errs[2] <= errs[0] + 1e-12, "{f}: {errs:?}");
    }
}

#[test]
fn symmetric_form_extrapolates_to_production_value() {
    // excision error behaves like C δ^(2/3)
    let r = 10f64.powf(2.0 / 3.0);
    for f in TestFunction::registry() {
        let v = gv(&f);
        let s: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d| symmetric_form_variance(&f, &fam(), d).unwrap().value)
            .collect();
        let errs: Vec<f64> = s.iter().map(|x| (x - v).abs()).collect();
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{f}: {errs:?}");
        let extrapolated = (r * s[2] - s[1]) / (r - 1.0);
        assert!((extrapolated - v).abs() < 2e-5 * v, "{f}: {extrapolated} vs {v}");
    }
}

#[test]
fn rejects_unsupported_inputs() {
    let f = TestFunction::identity();
    assert!(matches!(
        universality_shift(&f, -3.0, &fam()),
        Err(Error::Precondition(_))
    ));
    assert!(symmetric_form_variance(&f, &fam(), 0.0).is_err());
    assert!(psi_direct(&f, &fam(), 2.0).is_err());
    assert!(total_variance(&f, 0.0, &FussCatalanFamily::new(1).unwrap()).is_err());
}

#[test]
fn square_statistic_matches_simulation() {
    let f = TestFunction::Monomial(2);
    let predicted = gv(&f);
    let spec = EnsembleSpec {
        n: 100,
        entry: EntryDistribution::Gaussian,
        master_seed: 3,
        replicates: 600,
    };
    let batch = run_batch(&spec, &f).unwrap();
    let v = sample_variance(&batch.statistics());
    // sampling error of a variance of a heavy-ish tailed statistic, plus finite n
    assert!((v - predicted).abs() < 0.25 * predicted, "{v} vs {predicted}");
}

fn arb_function() -> impl Strategy<Value = TestFunction> {
    prop_oneof![
        (1u32..=3).prop_map(TestFunction::Monomial),
        (0.3f64..3.0, 0.2f64..1.0).prop_map(|(center, width)| TestFunction::GaussianBump { center, width }),
        (0.2f64..2.0).prop_map(|freq| TestFunction::Cosine { freq }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shift_invariance(f in arb_function(), c in -5.0f64..5.0) {
        let v = gv(&f);
        let shifted = gv(&f.shifted(c));
        prop_assert!((v - shifted).abs() <= 1e-8 * v.max(1.0));
        let p = psi(&f, &fam()).unwrap().value;
        prop_assert!((psi(&f.shifted(c), &fam()).unwrap().value - p).abs() <= 1e-10 * p.abs().max(1.0));
    }

    #[test]
    fn quadratic_scaling(f in arb_function(), c in -4.0f64..4.0) {
        let v = gv(&f);
        prop_assert!((gv(&f.scaled(c)) - c * c * v).abs() <= 1e-8 * (c * c * v).max(1.0));
    }

    #[test]
    fn parallelogram_law_and_nonnegativity(f in arb_function(), h in arb_function(), k4 in -2.0f64..10.0) {
        let plus = gv(&TestFunction::combine(1.0, &f, 1.0, &h));
        let minus = gv(&TestFunction::combine(1.0, &f, -1.0, &h));
        let (vf, vh) = (gv(&f), gv(&h));
        prop_assert!((plus + minus - 2.0 * vf - 2.0 * vh).abs() <= 1e-7 * (vf + vh).max(1.0));
        prop_assert!(minus >= -1e-9);
        let b = total_variance(&f, k4, &fam()).unwrap();
        prop_assert!(b.total >= -1e-9, "{:?}", b);
        prop_assert!((b.total - b.gaussian_term - b.kappa4_term).abs() < 1e-12 * b.total.abs().max(1.0));
    }

    #[test]
    fn psi_is_linear(f in arb_function(), h in arb_function(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let pf = psi(&f, &fam()).unwrap().value;
        let ph = psi(&h, &fam()).unwrap().value;
        let pc = psi(&TestFunction::combine(a, &f, b, &h), &fam()).unwrap().value;
        prop_assert!((pc - a * pf - b * ph).abs() <= 1e-9 * (a * pf).abs().max((b * ph).abs()).max(1.0));
    }
}
