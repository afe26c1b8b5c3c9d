//! Randomized invariants of the algebra, the operators and the multipliers.

use num_complex::Complex64;
use proptest::prelude::*;

use twisted_fourier::algebra::{involution, twisted_convolve, AlgebraElement, NormKind};
use twisted_fourier::cocycles::Cocycle;
use twisted_fourier::groups::{GroupDescriptor, GroupElement, LengthKind};
use twisted_fourier::multipliers::{apply, Multiplier};
use twisted_fourier::operators::{norm_lower, norm_upper, SolverOptions, UpperMethod};

fn torus() -> GroupDescriptor {
    GroupDescriptor::lattice(2, LengthKind::L1).unwrap()
}

fn element(terms: Vec<((i64, i64), (f64, f64))>) -> AlgebraElement {
    let z2 = torus();
    let mut seen = std::collections::BTreeMap::new();
    for ((a, b), (re, im)) in terms {
        seen.insert((a, b), Complex64::new(re, im));
    }
    AlgebraElement::from_terms(&z2, seen.into_iter().map(|((a, b), c)| (GroupElement::lattice(&[a, b]), c))).unwrap()
}

fn terms() -> impl Strategy<Value = Vec<((i64, i64), (f64, f64))>> {
    prop::collection::vec(((-3i64..=3, -3i64..=3), (-1.0f64..1.0, -1.0f64..1.0)), 1..6)
}

fn close(a: &AlgebraElement, b: &AlgebraElement, tol: f64) -> bool {
    a.sub(b).unwrap().norm(&NormKind::L1) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_associative(x in terms(), y in terms(), w in terms(), theta in -3.0f64..3.0) {
        let sigma = Cocycle::sigma_theta(&torus(), &[0.0, theta, 0.0, 0.0]).unwrap();
        let (x, y, w) = (element(x), element(y), element(w));
        let left = twisted_convolve(&twisted_convolve(&x, &y, &sigma).unwrap(), &w, &sigma).unwrap();
        let right = twisted_convolve(&x, &twisted_convolve(&y, &w, &sigma).unwrap(), &sigma).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn involution_reverses_products(x in terms(), y in terms(), theta in -3.0f64..3.0) {
        let sigma = Cocycle::sigma_theta(&torus(), &[0.0, theta, 0.0, 0.0]).unwrap();
        let (x, y) = (element(x), element(y));
        let left = involution(&twisted_convolve(&x, &y, &sigma).unwrap(), &sigma).unwrap();
        let right = twisted_convolve(&involution(&y, &sigma).unwrap(), &involution(&x, &sigma).unwrap(), &sigma).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
        let back = involution(&involution(&x, &sigma).unwrap(), &sigma).unwrap();
        prop_assert!(close(&back, &x, 1e-12));
    }

    #[test]
    fn trace_of_star_product_is_l2(x in terms(), theta in -3.0f64..3.0) {
        let sigma = Cocycle::sigma_theta(&torus(), &[0.0, theta, 0.0, 0.0]).unwrap();
        let x = element(x);
        let t = twisted_convolve(&involution(&x, &sigma).unwrap(), &x, &sigma).unwrap().tau();
        let l2 = x.norm(&NormKind::L2);
        prop_assert!((t.re - l2 * l2).abs() <= 1e-12 && t.im.abs() <= 1e-12);
    }

    #[test]
    fn bracket_is_ordered(x in terms(), theta in -3.0f64..3.0) {
        let sigma = Cocycle::sigma_theta(&torus(), &[0.0, theta, 0.0, 0.0]).unwrap();
        let x = element(x);
        let lower = norm_lower(&x, &sigma, 6.0, &SolverOptions::default()).unwrap().value;
        let (l1, _) = norm_upper(&x, &UpperMethod::L1Bound).unwrap();
        let (part, _) = norm_upper(&x, &UpperMethod::PartitionBound { constants: None }).unwrap();
        let l2 = x.norm(&NormKind::L2);
        prop_assert!(l2 <= lower * (1.0 + 1e-9) + 1e-12);
        prop_assert!(lower <= l1.min(part) * (1.0 + 1e-12));
    }

    #[test]
    fn positive_definite_multipliers_contract(x in terms(), r in 0.05f64..0.95) {
        let z2 = torus();
        let x = element(x);
        let sigma = Cocycle::trivial(&z2);
        let phi = Multiplier::abel_poisson(&z2, r).unwrap();
        let y = apply(&phi, &x).unwrap();
        let opts = SolverOptions::default().with_tol(1e-10);
        let before = norm_lower(&x, &sigma, 8.0, &opts).unwrap().value;
        let after = norm_lower(&y, &sigma, 8.0, &opts).unwrap().value;
        // ‖M_φ‖ = φ(e) = 1; compare with a slack for the lower bound on x
        let (upper, _) = norm_upper(&x, &UpperMethod::L1Bound).unwrap();
        prop_assert!(after <= upper * (1.0 + 1e-12));
        prop_assert!(after <= before * 1.05 + 1e-9, "{after} vs {before}");
    }
}
