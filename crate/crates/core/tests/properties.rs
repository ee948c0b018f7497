use cyclic_lv::darboux::{
    build_exponent_system, exponents_even, exponents_odd, integral_basis, nullspace,
};
use cyclic_lv::rational::{format_rational, parse_rational, ratio, Rational};
use cyclic_lv::verify::{check_jacobi_multiplier, check_linear_integral, check_xh_zero};
use cyclic_lv::{CyclicLVSystem, LinearForm};
use num_traits::Zero;
use proptest::prelude::*;

fn nonzero_k() -> impl Strategy<Value = i64> {
    prop_oneof![-9i64..=-1, 1i64..=9]
}

fn system(min: usize, max: usize) -> impl Strategy<Value = CyclicLVSystem> {
    prop::collection::vec(nonzero_k(), min..=max)
        .prop_map(|k| CyclicLVSystem::from_integers(&k).unwrap())
}

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=40).prop_map(|(p, q)| ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn field_components_sum_to_zero(sys in system(2, 12), seed in prop::collection::vec(rational(), 12)) {
        let x = &seed[..sys.n()];
        let v = sys.vector_field_exact(x).unwrap();
        prop_assert!(v.iter().sum::<Rational>().is_zero());
        let xf: Vec<f64> = x.iter().map(cyclic_lv::rational::rational_to_f64).collect();
        let vf = sys.vector_field(&xf).unwrap();
        let scale: f64 = vf.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        prop_assert!(vf.iter().sum::<f64>().abs() <= 1e-13 * scale);
    }

    #[test]
    fn zero_coordinate_is_stationary(sys in system(2, 12), i in 0usize..12, x in prop::collection::vec(-5.0f64..5.0, 12)) {
        let n = sys.n();
        let i = i % n;
        let mut x = x[..n].to_vec();
        x[i] = 0.0;
        prop_assert_eq!(sys.vector_field(&x).unwrap()[i], 0.0);
    }

    #[test]
    fn cofactors_have_expected_support(sys in system(2, 12)) {
        for i in 1..=sys.n() {
            let k = sys.cofactor(i).unwrap();
            let nz = k.coeffs().iter().filter(|c| !c.is_zero()).count();
            if sys.n() >= 3 {
                prop_assert_eq!(nz, 2);
            } else {
                prop_assert!(nz <= 1);
            }
            prop_assert!(sys.verify_hyperplane_invariance(i).unwrap());
        }
    }

    #[test]
    fn odd_formula_equals_nullspace(sys in prop::sample::select(vec![3usize, 5, 7, 9, 11])
        .prop_flat_map(|n| system(n, n)))
    {
        let ns = nullspace(&build_exponent_system(&sys).unwrap());
        prop_assert_eq!(ns.len(), 1);
        let h = exponents_odd(&sys).unwrap();
        prop_assert_eq!(ns[0].as_slice(), h.exponents());
    }

    #[test]
    fn even_dichotomy(sys in prop::sample::select(vec![4usize, 6, 8, 10]).prop_flat_map(|n| system(n, n))) {
        let ns = nullspace(&build_exponent_system(&sys).unwrap());
        match exponents_even(&sys) {
            Ok((a, b)) => {
                prop_assert_eq!(ns.len(), 2);
                prop_assert_eq!(ns[0].as_slice(), a.exponents());
                prop_assert_eq!(ns[1].as_slice(), b.exponents());
            }
            Err(_) => prop_assert!(ns.is_empty()),
        }
    }

    #[test]
    fn basis_integrals_cancel_cofactors(sys in system(2, 11)) {
        let basis = integral_basis(&sys);
        prop_assert_eq!(basis.monomials.len(), basis.classification.monomial_count());
        prop_assert!(check_linear_integral(&sys).passed);
        for h in &basis.monomials {
            let form = LinearForm::combination(h.exponents(), &sys.cofactors());
            prop_assert!(form.is_zero());
            prop_assert!(check_xh_zero(&sys, h).unwrap().passed);
        }
    }

    #[test]
    fn exponents_invariant_under_common_scaling(sys in system(3, 10), c in rational()) {
        prop_assume!(!c.is_zero());
        let scaled = CyclicLVSystem::new(sys.params().iter().map(|k| k * &c).collect()).unwrap();
        let a = integral_basis(&sys);
        let b = integral_basis(&scaled);
        prop_assert_eq!(a.classification, b.classification);
        prop_assert_eq!(a.monomials, b.monomials);
    }

    #[test]
    fn jacobi_residual_vanishes(sys in system(3, 7), pts in prop::collection::vec(rational(), 7)) {
        prop_assume!(pts.iter().all(|p| !p.is_zero()));
        let x = pts[..sys.n()].to_vec();
        prop_assert!(check_jacobi_multiplier(&sys, &[x]).unwrap().passed);
    }

    #[test]
    fn rational_text_round_trip(r in rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }
}
