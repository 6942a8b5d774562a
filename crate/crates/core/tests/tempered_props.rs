use ktorus_core::fgab::IntMatrix;
use ktorus_core::tempered::{
    classify_growth, geometric_samples, profile_exact_affine, rho1_exact_affine, rho1_numeric, GrowthClass,
    GrowthMethod, GrowthProfile,
};
use ktorus_core::torus::{golden_theta, Translation};
use ktorus_core::{CircleDiffeo, IrrationalBasis, TorusMap};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn basis() -> IrrationalBasis {
    IrrationalBasis::new([("theta", golden_theta())]).unwrap()
}

fn lower_unipotent(e: &[i64]) -> TorusMap {
    let m = IntMatrix::from_rows(&[[1, 0, 0], [e[0], 1, 0], [e[1], e[2], 1]]);
    TorusMap::new(None, Translation::Float(vec![golden_theta(), 0.0, 0.0]), m, Vec::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rho1_submultiplicative(e in proptest::collection::vec(-4i64..=4, 3), a in 0i64..20, b in 0i64..20) {
        let h = lower_unipotent(&e);
        let ab = rho1_exact_affine(&h, a + b).unwrap();
        let pa = rho1_exact_affine(&h, a).unwrap();
        let pb = rho1_exact_affine(&h, b).unwrap();
        prop_assert!(ab <= pa * pb);
    }

    #[test]
    fn classifier_recovers_polynomial_degree(r in 0u32..=4, c in 0.5f64..20.0) {
        let ns = geometric_samples(1, 1000, 16);
        let samples = ns.iter().map(|&n| (n, c * (1.0 + n as f64).powi(r as i32))).collect();
        let p = GrowthProfile::new(3, samples, GrowthMethod::Exact).unwrap();
        let v = classify_growth(&p).unwrap();
        prop_assert_eq!(v.class, GrowthClass::Polynomial { degree: r });
        prop_assert!((v.fitted_degree - r as f64).abs() < 0.2);
    }

    #[test]
    fn classifier_recovers_exponential_rate(rate in 1.1f64..3.0) {
        let ns = geometric_samples(2, 60, 12);
        let samples = ns.iter().map(|&n| (n, rate.powi(n as i32))).collect();
        let p = GrowthProfile::new(1, samples, GrowthMethod::JacobianNumeric).unwrap();
        let GrowthClass::Exponential { rate: fitted } = classify_growth(&p).unwrap().class else {
            return Err(TestCaseError::fail("not classified exponential"));
        };
        prop_assert!((fitted / rate - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tempered_condition_smoke() {
    // ρ_1(h^n) <= C (1 + n)^{d-1} with C = 1 for maps whose skews are all 1
    let maps = [
        TorusMap::ji_furstenberg(basis(), "theta", 1, 1).unwrap(),
        TorusMap::affine_furstenberg(basis(), "theta", &[1]).unwrap(),
        TorusMap::rotation(basis(), &["theta"]).unwrap(),
    ];
    for h in &maps {
        let d = h.dim() as i32;
        for n in 0..=200i64 {
            let rho = rho1_exact_affine(h, n).unwrap().to_f64().unwrap();
            assert!(rho <= (1.0 + n as f64).powi((d - 1).max(0)), "d={d} n={n}");
        }
    }
}

#[test]
fn numeric_agrees_with_exact() {
    let h = TorusMap::ji_furstenberg(basis(), "theta", 2, 3).unwrap();
    for n in [1u64, 5, 17, 40] {
        let exact = rho1_exact_affine(&h, n as i64).unwrap().to_f64().unwrap();
        let num = rho1_numeric(&h, n, 8).unwrap();
        assert!((num / exact - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exact_profile_polynomial_matches_samples() {
    let h = TorusMap::ji_furstenberg(basis(), "theta", 2, 3).unwrap();
    let ns = geometric_samples(1, 500, 12);
    let p = profile_exact_affine(&h, &ns).unwrap();
    let poly = p.exact_polynomial.clone().unwrap().polynomial;
    assert_eq!(poly.degree(), 2);
    for &(n, v) in &p.samples {
        let at = poly.eval(&num_rational::BigRational::from_integer(BigInt::from(n)));
        assert_eq!(at.to_f64().unwrap(), v);
    }
    let verdict = classify_growth(&p).unwrap();
    assert_eq!(verdict.class, GrowthClass::Polynomial { degree: 2 });
    assert_eq!(verdict.within_cap, Some(true));
}

#[test]
fn expanding_fixed_point_grows_exponentially() {
    let a = 0.1;
    let h = CircleDiffeo::sine_perturbation(a).unwrap();
    let lambda = 1.0 + 2.0 * std::f64::consts::PI * a;
    for n in [1u64, 3, 10] {
        let v = rho1_numeric(&h, n, 1024).unwrap();
        assert!((v / lambda.powi(n as i32) - 1.0).abs() < 1e-9);
    }
}
