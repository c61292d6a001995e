//! Structural invariants on random dyadic chains and polynomial forms.

use chaincalc::chains::DiracChain;
use chaincalc::norms::{norm_bound, standard_dictionary, Strategy};
use chaincalc::operators::{anticommutator, boundary, extrude_const, perp_chain, prederiv_const, retract_const};
use chaincalc::product::{cartesian_wedge, leibniz_boundary};
use chaincalc::sample;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_squares_to_zero(seed in any::<u64>(), n in 1usize..=4, k in 0usize..=4, order in 0usize..=3) {
        let k = k.min(n);
        let j = sample::chain(&mut rng(seed), n, k, order, 6);
        prop_assert!(boundary(&boundary(&j)).max_abs() <= 1e-12);
    }

    #[test]
    fn boundary_is_dual_to_d(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=3, order in 0usize..=2) {
        let k = k.min(n);
        let mut r = rng(seed);
        let j = sample::chain(&mut r, n, k, order, 5);
        let w = sample::form(&mut r, n, k - 1, 3);
        let lhs = w.integrate(&boundary(&j)).unwrap();
        let rhs = w.d().unwrap().integrate(&j).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn perp_is_an_involution_up_to_sign(seed in any::<u64>(), n in 1usize..=4, k in 0usize..=4) {
        let k = k.min(n);
        let j = sample::chain(&mut rng(seed), n, k, 2, 6);
        let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(perp_chain(&perp_chain(&j)).sub(&j.scale(sign)).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn boundary_extrusion_anticommutator_is_prederivative(seed in any::<u64>(), n in 1usize..=4, k in 0usize..4) {
        prop_assume!(k < n);
        let mut r = rng(seed);
        let v = sample::vector(&mut r, n);
        let j = sample::chain(&mut r, n, k, 2, 5);
        // On 0-chains the boundary vanishes and only ∂E_v remains.
        let lhs = if k == 0 {
            boundary(&extrude_const(&v, &j).unwrap())
        } else {
            anticommutator(|c| Ok(boundary(c)), |c| extrude_const(&v, c), &j).unwrap()
        };
        prop_assert!(lhs.sub(&prederiv_const(&v, &j).unwrap()).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn extrusion_retraction_anticommute_to_inner_product(seed in any::<u64>(), n in 1usize..=4, k in 1usize..4) {
        prop_assume!(k < n);
        let mut r = rng(seed);
        let (v, w) = (sample::vector(&mut r, n), sample::vector(&mut r, n));
        let j = sample::chain(&mut r, n, k, 1, 5);
        let lhs = anticommutator(|c| extrude_const(&v, c), |c| retract_const(&w, c), &j).unwrap();
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        prop_assert!(lhs.sub(&j.scale(dot)).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn integration_is_linear(seed in any::<u64>(), n in 1usize..=3, k in 0usize..=3, a in -4i32..=4, b in -4i32..=4) {
        let k = k.min(n);
        let mut r = rng(seed);
        let (j1, j2) = (sample::chain(&mut r, n, k, 2, 4), sample::chain(&mut r, n, k, 2, 4));
        let w = sample::form(&mut r, n, k, 3);
        let (a, b) = (f64::from(a) / 2.0, f64::from(b) / 2.0);
        let lhs = w.integrate(&DiracChain::combine(&j1, &j2, a, b).unwrap()).unwrap();
        let rhs = a * w.integrate(&j1).unwrap() + b * w.integrate(&j2).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn cartesian_boundary_leibniz(seed in any::<u64>(), n1 in 1usize..=2, n2 in 1usize..=2) {
        let mut r = rng(seed);
        let (k1, k2) = (n1.min(1 + (seed as usize % 2)), n2.min(1));
        let j = sample::chain(&mut r, n1, k1, 1, 3);
        let k = sample::chain(&mut r, n2, k2, 1, 3);
        let lhs = boundary(&cartesian_wedge(&j, &k));
        prop_assert!(lhs.sub(&leibniz_boundary(&j, &k).unwrap()).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn norm_bounds_are_ordered(seed in any::<u64>(), n in 1usize..=2, r_ord in 0usize..=1) {
        let mut g = rng(seed);
        let a = sample::chain(&mut g, n, n, 0, 4);
        let dict = standard_dictionary(n, n);
        for strategy in [Strategy::Trivial, Strategy::Pairing] {
            let nb = norm_bound(&a, r_ord, strategy, &dict).unwrap();
            prop_assert!(nb.lower <= nb.upper * (1.0 + 1e-12) + 1e-15, "{strategy:?}: {} > {}", nb.lower, nb.upper);
        }
    }
}
