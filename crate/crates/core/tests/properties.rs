//! Cross-module randomized properties. The named suites cover the advertised
//! volumes; these run smaller but shrink on failure.

use proptest::prelude::*;
use rand_core::{RngCore, SeedableRng};

use cartanlie::cartan::{build_h, build_s, poisson_bracket, Subalgebra};
use cartanlie::derivations::{Deriv, WAlgebra};
use cartanlie::dpalgebra::{DPoly, Shape};
use cartanlie::field::{Field, Scalar};
use cartanlie::generation::{sample_in_omega, subalgebra_closure, witness_h, witness_s};
use cartanlie::grammar::{format_deriv, format_poly, parse_deriv, parse_poly};
use cartanlie::structure::{centraliser, constants_ring};

fn f5() -> Field {
    Field::new(5, 1).unwrap()
}

fn rng_from(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn random_poly(shape: &Shape, field: &Field, rng: &mut impl RngCore) -> DPoly {
    let v: Vec<Scalar> = (0..shape.dim()).map(|_| field.sample(rng)).collect();
    DPoly::from_vec(shape, field, &v)
}

fn random_deriv(w: &WAlgebra, rng: &mut impl RngCore) -> Deriv {
    let f = w.field();
    let v: Vec<Scalar> = (0..w.dim()).map(|_| f.sample(rng)).collect();
    Deriv::from_flat(w.shape(), f, &v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let mut rng = rng_from(seed);
        let x = random_deriv(&w, &mut rng);
        let y = random_deriv(&w, &mut rng);
        let z = random_deriv(&w, &mut rng);
        let c = f.sample(&mut rng);
        let lhs = x.add(&y.scale(&c)).bracket(&z);
        let rhs = x.bracket(&z).add(&y.bracket(&z).scale(&c));
        prop_assert!(lhs.sub(&rhs).is_zero());
        prop_assert!(x.bracket(&y).add(&y.bracket(&x)).is_zero());
    }

    #[test]
    fn jacobi_holds_on_random_elements(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let mut rng = rng_from(seed);
        let x = random_deriv(&w, &mut rng);
        let y = random_deriv(&w, &mut rng);
        let z = random_deriv(&w, &mut rng);
        let total = x.bracket(&y.bracket(&z))
            .add(&y.bracket(&z.bracket(&x)))
            .add(&z.bracket(&x.bracket(&y)));
        prop_assert!(total.is_zero());
    }

    #[test]
    fn divergence_follows_the_product_rule(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let mut rng = rng_from(seed);
        let g = random_poly(&shape, &f, &mut rng);
        let d = random_deriv(&w, &mut rng);
        let lhs = d.left_mul(&g).divergence();
        let rhs = g.mul(&d.divergence()).add(&d.apply(&g));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn poisson_bracket_satisfies_leibniz(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rng_from(seed);
        let a = random_poly(&shape, &f, &mut rng);
        let b = random_poly(&shape, &f, &mut rng);
        let c = random_poly(&shape, &f, &mut rng);
        let lhs = poisson_bracket(1, &a, &b.mul(&c));
        let rhs = poisson_bracket(1, &a, &b).mul(&c).add(&b.mul(&poisson_bracket(1, &a, &c)));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn closure_is_idempotent_and_monotone(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let (_s, s1, _cs) = build_s(&w);
        let mut rng = rng_from(seed);
        let a = s1.sample(&mut rng);
        let b = s1.sample(&mut rng);
        let small = subalgebra_closure(&s1, &[a.clone()]);
        let big = subalgebra_closure(&s1, &[a.clone(), b.clone()]);
        prop_assert!(small.space().is_subspace_of(big.space()).unwrap());
        let again = subalgebra_closure(&s1, &small.basis_rows().to_vec());
        prop_assert_eq!(again.space(), small.space());
        prop_assert!(closed_under_bracket(&big));
    }

    #[test]
    fn s_witnesses_satisfy_their_postconditions(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let (s, s1, _cs) = build_s(&w);
        let mut rng = rng_from(seed);
        let v = sample_in_omega(&s1, -1, &mut rng).expect("omega is dense in the derived algebra");
        let d = Deriv::from_flat(&shape, &f, &v);
        let wit = witness_s(&d).expect("witness exists on omega");
        prop_assert!(!wit.delta.is_zero());
        prop_assert!(wit.delta.min_degree().unwrap() >= 1);
        prop_assert!(wit.delta.bracket(&d).is_zero());
        prop_assert!(wit.delta.divergence().is_zero());
        prop_assert!(s.contains(&wit.delta.to_flat()));
    }

    #[test]
    fn h_witnesses_commute_with_their_source(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let (h, _h2) = build_h(&w);
        let mut rng = rng_from(seed);
        // Potentials with a nonzero linear term stay inside the admissible set.
        let mut pot = random_poly(&shape, &f, &mut rng).without_constant();
        if pot.degree_component(1).is_zero() {
            pot.set_coeff(&[1, 0], f.one());
        }
        let wit = witness_h(&pot).expect("witness exists for linear-part potentials");
        let d = cartanlie::cartan::hamiltonian_deriv(&pot);
        prop_assert!(wit.delta.bracket(&d).is_zero());
        prop_assert!(wit.delta.min_degree().unwrap() >= 1);
        prop_assert!(h.contains(&wit.delta.to_flat()));
    }

    #[test]
    fn trivial_constants_pin_the_centraliser_dimension(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[2]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let full = cartanlie::cartan::build_w(&w);
        let mut rng = rng_from(seed);
        let d = random_deriv(&w, &mut rng);
        prop_assume!(!d.is_zero());
        let cz = centraliser(full.ambient(), &d.to_flat(), full.space());
        if constants_ring(&d).dim() == 1 {
            prop_assert_eq!(cz.dim(), 1);
        } else {
            prop_assert!(cz.dim() >= 1);
        }
    }

    #[test]
    fn grammar_round_trips_derivations(seed in any::<u64>()) {
        let f = f5();
        let shape = Shape::new(5, &[1, 2]).unwrap();
        let w = WAlgebra::new(&shape, &f).unwrap();
        let mut rng = rng_from(seed);
        let d = random_deriv(&w, &mut rng);
        let parsed = parse_deriv(&shape, &f, &format_deriv(&d)).unwrap();
        prop_assert!(parsed.sub(&d).is_zero());
        let g = random_poly(&shape, &f, &mut rng);
        let parsed = parse_poly(&shape, &f, &format_poly(&g)).unwrap();
        prop_assert!(parsed.sub(&g).is_zero());
    }
}

fn closed_under_bracket(algebra: &Subalgebra) -> bool {
    algebra.verify_closed()
}
