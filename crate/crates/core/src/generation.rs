//! Subalgebra closure, generation probes, and the commuting-witness
//! constructions for the S, H, and K families.
//!
//! The closure engine is the hot kernel behind the non-generation probes: a
//! probe runs hundreds of closures, each of which brackets every pair of
//! basis vectors it has accumulated. Over a prime field the engine works on
//! raw residues with delayed reduction; over extension fields it falls back
//! to generic span arithmetic.

use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::cartan::{hamiltonian_deriv, poisson_bracket, AlgebraLabel, Ambient, ContactAlgebra, Subalgebra};
use crate::derivations::{Deriv, WAlgebra};
use crate::dpalgebra::DPoly;
use crate::field::Scalar;
use crate::linalg::{FpSpan, LinalgError, Matrix, SpanBuilder, Subspace};
use crate::report::{Report, Status};
use crate::structure::{centraliser, constants_ring};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("element lies outside the admissible open set: {0}")]
    NotInOmega(&'static str),
    #[error("the constants ring is trivial, contradicting the centraliser bound")]
    NoConstantFound,
    #[error("constructed witness vanished")]
    ZeroWitness,
    #[error("centraliser dimensions (full {full}, filtered {filtered}) fall below the guaranteed bounds")]
    LemmaViolation { full: usize, filtered: usize },
    #[error("the subalgebra is not an ideal of the enclosing algebra")]
    NotAnIdeal,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Least bracket-closed subspace of `within` containing the generators.
/// `within` must be closed under the ambient bracket and contain every
/// generator; the search stops early once the span fills `within`.
pub fn subalgebra_closure(within: &Subalgebra, generators: &[Vec<Scalar>]) -> Subalgebra {
    closure_impl(within, generators, false)
}

pub(crate) fn closure_impl(
    within: &Subalgebra,
    generators: &[Vec<Scalar>],
    force_generic: bool,
) -> Subalgebra {
    let ambient = within.ambient();
    let field = within.field();
    debug_assert!(generators.iter().all(|g| within.contains(g)));
    let space = if field.is_prime_field() && !force_generic {
        closure_prime(within, generators)
    } else {
        closure_generic(within, generators)
    };
    match space {
        Some(space) => Subalgebra::from_space(ambient.clone(), AlgebraLabel::Generated, space),
        None => {
            Subalgebra::from_space(ambient.clone(), AlgebraLabel::Generated, within.space().clone())
        }
    }
}

/// Worklist closure on prime-field residues. Returns None on early exit at
/// dim(within), meaning the closure is all of `within`.
fn closure_prime(within: &Subalgebra, generators: &[Vec<Scalar>]) -> Option<Subspace> {
    let ambient = within.ambient();
    let field = within.field();
    let n = ambient.dim();
    let p = field.characteristic();
    let target = within.dim();
    let mut span = FpSpan::new(p, n);
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for g in generators {
        let gv: Vec<u64> = g.iter().map(Scalar::residue).collect();
        if span.insert(gv.clone()) {
            rows.push(gv);
        }
    }
    let mut out = vec![0u64; n];
    let mut i = 0;
    while i < rows.len() {
        if span.dim() == target {
            return None;
        }
        for j in 0..i {
            ambient.bracket_u64(&rows[i], &rows[j], &mut out);
            if out.iter().any(|&c| c != 0) && span.insert(out.clone()) {
                rows.push(out.clone());
                if span.dim() == target {
                    return None;
                }
            }
        }
        i += 1;
    }
    Some(span.into_subspace(field))
}

fn closure_generic(within: &Subalgebra, generators: &[Vec<Scalar>]) -> Option<Subspace> {
    let ambient = within.ambient();
    let field = within.field();
    let n = ambient.dim();
    let target = within.dim();
    let mut span = SpanBuilder::new(field, n);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for g in generators {
        if span.insert(g.clone()) {
            rows.push(g.clone());
        }
    }
    let mut i = 0;
    while i < rows.len() {
        if span.dim() == target {
            return None;
        }
        for j in 0..i {
            let out = ambient.bracket(&rows[i], &rows[j]);
            if out.iter().any(|c| !c.is_zero()) && span.insert(out.clone()) {
                rows.push(out);
                if span.dim() == target {
                    return None;
                }
            }
        }
        i += 1;
    }
    Some(span.into_subspace())
}

/// Whether `v` has a nonzero homogeneous component in the given degree of the
/// ambient grading.
pub fn has_degree_component(ambient: &Ambient, v: &[Scalar], degree: i64) -> bool {
    v.iter()
        .enumerate()
        .any(|(i, c)| !c.is_zero() && ambient.grade_of_flat(i) == degree)
}

/// Draw an element of `h` whose homogeneous part in `degree` is nonzero.
/// Rejection sampling; returns None if 256 draws all miss, which has
/// negligible probability for the admissible sets in use.
pub fn sample_in_omega(
    h: &Subalgebra,
    degree: i64,
    rng: &mut impl RngCore,
) -> Option<Vec<Scalar>> {
    for _ in 0..256 {
        let v = h.sample(rng);
        if has_degree_component(h.ambient(), &v, degree) {
            return Some(v);
        }
    }
    None
}

/// Probe whether `x` together with sampled partners generates `h`. Draws
/// `samples` uniform elements y of `h`, computes closure({x, y}), and records
/// the outcome. A closure that reaches `h` counts as a hit; hits with `x`
/// taken from the top graded component contradict the non-generation
/// theorems and escalate the status.
pub fn nongeneration_probe(x: &[Scalar], h: &Subalgebra, samples: usize, seed: u64) -> Report {
    let mut report = Report::new("nongeneration_probe")
        .param("algebra", h.label())
        .param("samples", samples)
        .param("seed", seed)
        .evidence("algebra_dim", h.dim() as i64);
    if x.iter().all(Scalar::is_zero) || !h.contains(x) {
        return report.evidence("precondition_ok", 0).status(Status::Fail);
    }
    let is_top = h.top_component().contains(x);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0i64;
    let mut max_dim = 0usize;
    for _ in 0..samples {
        let y = h.sample(&mut rng);
        let closure = subalgebra_closure(h, &[x.to_vec(), y]);
        max_dim = max_dim.max(closure.dim());
        if closure.dim() == h.dim() {
            hits += 1;
        }
    }
    report.note("precondition_ok", 1);
    report.note("top_component", is_top as i64);
    report.note("hits", hits);
    report.note("max_closure_dim", max_dim as i64);
    if hits > 0 && is_top {
        report.escalate(Status::TheoremViolation);
    }
    report
}

/// Commuting witness for the divergence-free family. `d` must be
/// divergence-free with a nonzero degree -1 part. Returns the chosen
/// constant f (no terms of degree < 2) and Delta = f d, which is nonzero,
/// lies in the filtration part of degree >= 1, commutes with d, and is
/// divergence-free.
pub struct SWitness {
    pub constant: DPoly,
    pub delta: Deriv,
}

pub fn witness_s(d: &Deriv) -> Result<SWitness, WitnessError> {
    if d.degree_component(-1).is_zero() {
        return Err(WitnessError::NotInOmega("degree -1 part vanishes"));
    }
    if !d.divergence().is_zero() {
        return Err(WitnessError::NotInOmega("divergence is nonzero"));
    }
    let shape = d.shape();
    let field = d.field();
    let constants = constants_ring(d);
    if constants.dim() < 2 {
        return Err(WitnessError::NoConstantFound);
    }
    // Row 0 of the kernel basis is the constant monomial itself, so every
    // later row has zero constant term.
    let f0 = DPoly::from_vec(shape, field, &constants.basis_rows()[1]);
    debug_assert!(f0.constant_term().is_zero());
    let f = if f0.degree_component(1).is_zero() {
        f0
    } else {
        f0.mul(&f0)
    };
    if f.is_zero() {
        return Err(WitnessError::ZeroWitness);
    }
    assert!(f.min_degree().unwrap() >= 2, "constant must avoid degrees 0 and 1");
    let delta = d.left_mul(&f);
    if delta.is_zero() {
        return Err(WitnessError::ZeroWitness);
    }
    assert!(delta.min_degree().unwrap() >= 1);
    assert!(d.bracket(&delta).is_zero());
    assert!(delta.divergence().is_zero());
    Ok(SWitness { constant: f, delta })
}

/// Commuting witness for the Hamiltonian family. `f` is the generating
/// function of an admissible derivation: its constant term is discarded and
/// its linear part must be nonzero. Returns the cube f^3 and
/// Delta = D_H(f^3), which is nonzero, lies in filtration degree >= 1, and
/// commutes with D_H(f).
pub struct HWitness {
    pub cube: DPoly,
    pub delta: Deriv,
}

pub fn witness_h(f: &DPoly) -> Result<HWitness, WitnessError> {
    assert!(f.shape().vars() % 2 == 0, "Hamiltonian shapes have 2r variables");
    let f = f.without_constant();
    if f.degree_component(1).is_zero() {
        return Err(WitnessError::NotInOmega("linear part vanishes"));
    }
    let cube = f.mul(&f).mul(&f);
    if cube.is_zero() {
        return Err(WitnessError::ZeroWitness);
    }
    assert_eq!(cube.min_degree(), Some(3));
    let r = f.shape().vars() / 2;
    assert!(poisson_bracket(r, &f, &cube).is_zero());
    let delta = hamiltonian_deriv(&cube);
    if delta.is_zero() {
        return Err(WitnessError::ZeroWitness);
    }
    assert!(delta.min_degree().unwrap() >= 1);
    assert!(hamiltonian_deriv(&f).bracket(&delta).is_zero());
    Ok(HWitness { cube, delta })
}

/// Matrix of the map f -> D_H(f) from O(2r,n) into flat W coordinates.
/// Kernel is the line of constants; solving against it recovers the
/// constant-free generating function of an image element.
pub fn hamiltonian_matrix(w: &WAlgebra) -> Matrix {
    let shape = w.shape();
    let field = w.field();
    let q = shape.dim();
    let mut m = Matrix::zero(field, w.dim(), q);
    for j in 0..q {
        let mono = DPoly::monomial(shape, field, &shape.mono_unrank(j));
        let col = hamiltonian_deriv(&mono).to_flat();
        for (i, c) in col.into_iter().enumerate() {
            if !c.is_zero() {
                m.set(i, j, c);
            }
        }
    }
    m
}

/// Solve D_H(f) = d for the constant-free f, or None when d is not in the
/// image. The constant coordinate is a free variable of the system and is
/// pinned to zero by the solver.
pub fn hamiltonian_potential(w: &WAlgebra, d: &Deriv) -> Option<DPoly> {
    let f = hamiltonian_matrix(w).solve(&d.to_flat())?;
    Some(DPoly::from_vec(w.shape(), w.field(), &f))
}

/// Centraliser data for the contact family. `full` is the centraliser of the
/// generating function f under the contact bracket; `filtered` is its
/// intersection with the part of K-degree >= 1. Both live in contact flat
/// coordinates.
pub struct KWitness {
    pub full: Subspace,
    pub filtered: Subspace,
}

pub fn witness_k(k: &ContactAlgebra, f: &DPoly) -> Result<KWitness, WitnessError> {
    if f.constant_term().is_zero() {
        return Err(WitnessError::NotInOmega("degree -2 part vanishes"));
    }
    let field = k.field();
    let full = k.ad_matrix(&f.to_vec()).kernel();
    let rows: Vec<Vec<Scalar>> = (0..k.dim())
        .filter(|&i| k.grade_of_flat(i) >= 1)
        .map(|i| {
            let mut e = vec![field.zero(); k.dim()];
            e[i] = field.one();
            e
        })
        .collect();
    let at_least_one = Subspace::from_rows(field, k.dim(), rows);
    let filtered = full.intersect(&at_least_one)?;
    let bound = usize::min(2 * k.r() + 1, field.characteristic() as usize);
    if full.dim() < bound || filtered.dim() < 2 {
        return Err(WitnessError::LemmaViolation {
            full: full.dim(),
            filtered: filtered.dim(),
        });
    }
    Ok(KWitness { full, filtered })
}

/// Audit of the two hypotheses behind the non-generation criterion for an
/// ideal h of l: the centraliser of h in l is zero, and every sampled element
/// of the admissible set (nonzero component in `omega_degree`) has a
/// centraliser in l that meets the filtration part of degree >= 1. Also
/// accumulates the intersection of the commutant subalgebras H_X and checks
/// it contains the top graded component of h.
pub fn criterion_audit(
    l: &Subalgebra,
    h: &Subalgebra,
    omega_degree: i64,
    samples: usize,
    seed: u64,
) -> Result<Report, WitnessError> {
    let ambient = l.ambient();
    if !h.space().is_subspace_of(l.space())? {
        return Err(WitnessError::NotAnIdeal);
    }
    for a in l.basis_rows() {
        for b in h.basis_rows() {
            if !h.contains(&ambient.bracket(a, b)) {
                return Err(WitnessError::NotAnIdeal);
            }
        }
    }
    let mut report = Report::new("criterion_audit")
        .param("l", l.label())
        .param("h", h.label())
        .param("omega_degree", omega_degree)
        .param("samples", samples)
        .param("seed", seed);

    let mut comm = l.space().clone();
    for b in h.basis_rows() {
        comm = centraliser(ambient, b, &comm);
        if comm.dim() == 0 {
            break;
        }
    }
    report.note("centraliser_of_ideal_dim", comm.dim() as i64);
    if comm.dim() != 0 {
        report.escalate(Status::TheoremViolation);
    }

    let l_pos = l.filtration_at_least(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut min_witness = usize::MAX;
    let mut inter = h.space().clone();
    for _ in 0..samples {
        let x = match sample_in_omega(h, omega_degree, &mut rng) {
            Some(x) => x,
            None => {
                report.escalate(Status::Fail);
                report.note("sampling_exhausted", 1);
                break;
            }
        };
        let cz = centraliser(ambient, &x, l.space());
        let meet = cz.intersect(&l_pos)?;
        min_witness = min_witness.min(meet.dim());
        if meet.dim() == 0 {
            report.escalate(Status::TheoremViolation);
            continue;
        }
        let y = &meet.basis_rows()[0];
        let h_x = centraliser(ambient, y, h.space());
        inter = inter.intersect(&h_x)?;
    }
    if samples > 0 && min_witness != usize::MAX {
        report.note("min_witness_dim", min_witness as i64);
    }
    let top = h.top_component();
    report.note("top_dim", top.dim() as i64);
    report.note("intersection_dim", inter.dim() as i64);
    if !top.is_subspace_of(&inter)? {
        report.escalate(Status::TheoremViolation);
        report.note("contains_top", 0);
    } else {
        report.note("contains_top", 1);
    }
    Ok(report)
}

/// Search outcome for an element whose adjoint action is injective on the
/// filtration part of degree >= 0 of W(m,1). Such an element obstructs the
/// commuting-witness hypothesis, so the W family is excluded from the
/// non-generation theorems.
pub struct WProbeOutcome {
    pub element: Option<Deriv>,
    /// Nilpotency index of the element acting on O, when nilpotent.
    pub nilpotency_index: Option<u32>,
    pub attempts: u32,
}

pub fn remark_w_probe(w: &WAlgebra, seed: u64, max_attempts: u32) -> WProbeOutcome {
    let shape = w.shape();
    let field = w.field();
    assert!(shape.heights().iter().all(|&h| h == 1));
    let m = shape.vars();

    // Candidate: d_1 plus, for each later variable, the full monomial in all
    // earlier variables times the next partial.
    let mut cand = Deriv::partial(shape, field, 0);
    for k in 1..m {
        let mut alpha = vec![0u32; m];
        for (i, a) in alpha.iter_mut().enumerate().take(k) {
            *a = shape.tau()[i];
        }
        let mut coeff = DPoly::zero(shape, field);
        coeff.set_coeff(&alpha, field.one());
        let mut term = Deriv::zero(shape, field);
        term.set_coeff(k, coeff);
        cand = cand.add(&term);
    }

    let positive: Vec<usize> = (0..w.dim()).filter(|&i| w.grade_of_flat(i) >= 0).collect();
    let injective = |x: &Deriv| -> bool {
        let ad = w.ad_matrix(&x.to_flat());
        let mut rect = Matrix::zero(field, w.dim(), positive.len());
        for (jj, &j) in positive.iter().enumerate() {
            for i in 0..w.dim() {
                let c = ad.get(i, j).clone();
                if !c.is_zero() {
                    rect.set(i, jj, c);
                }
            }
        }
        rect.kernel().dim() == 0
    };

    let mut attempts = 1;
    let mut found = if injective(&cand) { Some(cand) } else { None };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    while found.is_none() && attempts < max_attempts {
        attempts += 1;
        let v: Vec<Scalar> = (0..w.dim()).map(|_| field.sample(&mut rng)).collect();
        let x = Deriv::from_flat(shape, field, &v);
        if !x.is_zero() && injective(&x) {
            found = Some(x);
        }
    }

    // Smallest power of the action matrix that vanishes; a nilpotent action
    // on O has index at most dim O.
    let nilpotency_index = found.as_ref().and_then(|x| {
        let a = x.action_matrix();
        let mut power = a.clone();
        for t in 1..=shape.dim() {
            if power.is_zero() {
                return Some(t as u32);
            }
            power = power.mul(&a);
        }
        None
    });

    WProbeOutcome {
        element: found,
        nilpotency_index,
        attempts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{build_h, build_k, build_s, build_w, contact_deriv};
    use crate::dpalgebra::Shape;
    use crate::field::Field;

    fn witt(p: u64, heights: &[u32]) -> WAlgebra {
        let shape = Shape::new(p, heights).unwrap();
        let field = Field::new(p, 1).unwrap();
        WAlgebra::new(&shape, &field).unwrap()
    }

    #[test]
    fn closure_of_a_single_torus_element_is_a_line() {
        let w = witt(5, &[1]);
        let full = build_w(&w);
        let x = Deriv::basis(w.shape(), w.field(), &[1], 0).to_flat();
        let c = subalgebra_closure(&full, &[x]);
        assert_eq!(c.dim(), 1);
    }

    #[test]
    fn closure_of_the_extreme_pair_fills_the_witt_algebra() {
        let w = witt(5, &[1]);
        let full = build_w(&w);
        let lo = Deriv::partial(w.shape(), w.field(), 0).to_flat();
        let hi = Deriv::basis(w.shape(), w.field(), &[4], 0).to_flat();
        let c = subalgebra_closure(&full, &[lo, hi]);
        assert_eq!(c.dim(), 5);
        assert!(c.space().equals(full.space()));
    }

    #[test]
    fn closure_of_no_generators_is_zero() {
        let w = witt(5, &[1]);
        let full = build_w(&w);
        let c = subalgebra_closure(&full, &[]);
        assert_eq!(c.dim(), 0);
    }

    #[test]
    fn closure_is_idempotent_and_monotone() {
        let w = witt(5, &[1, 1]);
        let full = build_w(&w);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = full.sample(&mut rng);
        let y = full.sample(&mut rng);
        let z = full.sample(&mut rng);
        let small = subalgebra_closure(&full, &[x.clone(), y.clone()]);
        let again = subalgebra_closure(&full, &[x.clone(), y.clone()]);
        assert!(small.space().equals(again.space()));
        let rows: Vec<Vec<Scalar>> = small.basis_rows().to_vec();
        let re = subalgebra_closure(&full, &rows);
        assert!(re.space().equals(small.space()));
        let bigger = subalgebra_closure(&full, &[x, y, z]);
        assert!(small.space().is_subspace_of(bigger.space()).unwrap());
    }

    #[test]
    fn prime_and_generic_closure_paths_agree() {
        let w = witt(5, &[1, 1]);
        let (s, s1, _) = build_s(&w);
        let _ = s;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let x = s1.sample(&mut rng);
            let y = s1.sample(&mut rng);
            let fast = closure_impl(&s1, &[x.clone(), y.clone()], false);
            let slow = closure_impl(&s1, &[x, y], true);
            assert!(fast.space().equals(slow.space()));
        }
    }

    #[test]
    fn closures_stay_inside_the_enclosing_subalgebra() {
        let w = witt(5, &[1, 1]);
        let (_, s1, _) = build_s(&w);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = s1.sample(&mut rng);
        let y = s1.sample(&mut rng);
        let c = subalgebra_closure(&s1, &[x, y]);
        assert!(c.space().is_subspace_of(s1.space()).unwrap());
        assert!(c.verify_closed());
    }

    #[test]
    fn witness_s_on_a_split_constant_direction() {
        let w = witt(5, &[1, 1]);
        let shape = w.shape();
        let field = w.field();
        // d = d1 - d2 annihilates x1 + x2; the witness squares it.
        let d = Deriv::partial(shape, field, 0).sub(&Deriv::partial(shape, field, 1));
        let out = witness_s(&d).unwrap();
        assert_eq!(out.constant.min_degree(), Some(2));
        let sq = out.constant.clone();
        let two = field.from_u64(2);
        let mut expected = DPoly::zero(shape, field);
        expected.set_coeff(&[2, 0], two.clone());
        expected.set_coeff(&[1, 1], two.clone());
        expected.set_coeff(&[0, 2], two);
        assert_eq!(sq, expected);
        assert!(d.bracket(&out.delta).is_zero());
        assert!(out.delta.divergence().is_zero());
        assert!(out.delta.min_degree().unwrap() >= 1);
    }

    #[test]
    fn witness_s_uses_the_constant_directly_when_already_deep() {
        let w = witt(5, &[1, 1]);
        let shape = w.shape();
        let field = w.field();
        let d = Deriv::partial(shape, field, 0);
        let out = witness_s(&d).unwrap();
        // Constants of d1 are the polynomials in x2 alone; the first
        // non-constant one is x2, which is linear, so it gets squared.
        let mut expected = DPoly::zero(shape, field);
        expected.set_coeff(&[0, 2], field.from_u64(2));
        assert_eq!(out.constant, expected);
        assert!(d.bracket(&out.delta).is_zero());
    }

    #[test]
    fn witness_s_rejects_elements_outside_omega() {
        let w = witt(5, &[1, 1]);
        let shape = w.shape();
        let field = w.field();
        let euler_like = Deriv::basis(shape, field, &[1, 0], 0)
            .sub(&Deriv::basis(shape, field, &[0, 1], 1));
        assert!(matches!(
            witness_s(&euler_like),
            Err(WitnessError::NotInOmega(_))
        ));
        let not_div_free = Deriv::basis(shape, field, &[1, 0], 0).add(&Deriv::partial(shape, field, 1));
        assert!(matches!(
            witness_s(&not_div_free),
            Err(WitnessError::NotInOmega(_))
        ));
    }

    #[test]
    fn witness_h_matches_the_hand_expansion() {
        let w = witt(5, &[1, 1]);
        let shape = w.shape();
        let field = w.field();
        let f = DPoly::variable(shape, field, 0);
        let out = witness_h(&f).unwrap();
        // x1^3 = 6 x1^{(3)} = x1^{(3)} mod 5.
        let mut cube = DPoly::zero(shape, field);
        cube.set_coeff(&[3, 0], field.one());
        assert_eq!(out.cube, cube);
        let mut delta_coeff = DPoly::zero(shape, field);
        delta_coeff.set_coeff(&[2, 0], field.one());
        let mut delta = Deriv::zero(shape, field);
        delta.set_coeff(1, delta_coeff);
        assert_eq!(out.delta.to_flat(), delta.to_flat());
        assert!(hamiltonian_deriv(&f).bracket(&out.delta).is_zero());
    }

    #[test]
    fn witness_h_rejects_functions_without_linear_part() {
        let w = witt(5, &[1, 1]);
        let f = DPoly::monomial(w.shape(), w.field(), &[2, 0]);
        assert!(matches!(witness_h(&f), Err(WitnessError::NotInOmega(_))));
    }

    #[test]
    fn hamiltonian_potential_inverts_the_map_on_its_image() {
        let w = witt(5, &[1, 1]);
        let (h, h2) = build_h(&w);
        let _ = h;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let v = h2.sample(&mut rng);
            let d = Deriv::from_flat(w.shape(), w.field(), &v);
            let f = hamiltonian_potential(&w, &d).unwrap();
            assert!(f.constant_term().is_zero());
            assert_eq!(hamiltonian_deriv(&f).to_flat(), d.to_flat());
        }
    }

    #[test]
    fn witness_k_on_the_unit_matches_the_partial_kernel() {
        let shape = Shape::new(5, &[1, 1, 1]).unwrap();
        let field = Field::new(5, 1).unwrap();
        let k = ContactAlgebra::new(&shape, &field).unwrap();
        let one = DPoly::one(&shape, &field);
        let out = witness_k(&k, &one).unwrap();
        // <1, g> = 2 d3(g), so the centraliser is spanned by the monomials
        // free of x3: 25 of them, 19 with K-degree >= 1.
        assert_eq!(out.full.dim(), 25);
        assert_eq!(out.filtered.dim(), 19);
        for row in out.full.basis_rows() {
            let g = DPoly::from_vec(&shape, &field, row);
            assert!(g.partial(2).is_zero());
        }
    }

    #[test]
    fn witness_k_rejects_functions_without_constant_term() {
        let shape = Shape::new(5, &[1, 1, 1]).unwrap();
        let field = Field::new(5, 1).unwrap();
        let k = ContactAlgebra::new(&shape, &field).unwrap();
        let f = DPoly::variable(&shape, &field, 0);
        assert!(matches!(
            witness_k(&k, &f),
            Err(WitnessError::NotInOmega(_))
        ));
    }

    #[test]
    fn witness_k_centralisers_commute_with_the_source() {
        let shape = Shape::new(5, &[1, 1, 1]).unwrap();
        let field = Field::new(5, 1).unwrap();
        let k = ContactAlgebra::new(&shape, &field).unwrap();
        let mut f = DPoly::one(&shape, &field);
        f.set_coeff(&[1, 0, 0], field.from_u64(3));
        f.set_coeff(&[0, 0, 1], field.from_u64(2));
        let out = witness_k(&k, &f).unwrap();
        let fv = f.to_vec();
        for row in out.filtered.basis_rows() {
            let br = k.bracket(&fv, row);
            assert!(br.iter().all(Scalar::is_zero));
            let g = DPoly::from_vec(&shape, &field, row);
            // Filtration bound in contact degrees: ||alpha|| >= 3.
            for (alpha, _) in g.terms() {
                assert!(alpha[0] + alpha[1] + 2 * alpha[2] >= 3);
            }
        }
        // Conjugation transports the centraliser of the derivation action
        // onto the contact centraliser: dimensions agree.
        let dk = contact_deriv(&f);
        assert_eq!(constants_ring(&dk).dim(), out.full.dim());
    }

    #[test]
    fn probe_rejects_zero_and_foreign_elements() {
        let w = witt(5, &[1]);
        let full = build_w(&w);
        let zero = vec![w.field().zero(); w.dim()];
        let r = nongeneration_probe(&zero, &full, 3, 1);
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.evidence["precondition_ok"], 0);
    }

    #[test]
    fn probe_detects_saturation_for_the_witt_algebra() {
        // W(1,(1)) is generated by the extreme pair, so a top-degree x must
        // produce hits; the probe reports them as violations since no
        // non-generation statement admits them.
        let w = witt(5, &[1]);
        let full = build_w(&w);
        let x = Deriv::basis(w.shape(), w.field(), &[4], 0).to_flat();
        let r = nongeneration_probe(&x, &full, 20, 5);
        assert_eq!(r.evidence["top_component"], 1);
        assert!(r.evidence["hits"] > 0);
        assert_eq!(r.status, Status::TheoremViolation);
    }

    #[test]
    fn probe_passes_on_the_divergence_free_derived_subalgebra() {
        let w = witt(5, &[1, 1]);
        let (_, s1, _) = build_s(&w);
        let top = s1.top_component();
        for row in top.basis_rows() {
            let r = nongeneration_probe(row, &s1, 10, 42);
            assert_eq!(r.status, Status::Pass, "{:?}", r.evidence);
            assert_eq!(r.evidence["hits"], 0);
        }
    }

    #[test]
    fn sanity_nontop_elements_do_generate() {
        let w = witt(5, &[1, 1]);
        let (_, h2) = build_h(&w);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut x = h2.sample(&mut rng);
        while h2.top_component().contains(&x) || x.iter().all(Scalar::is_zero) {
            x = h2.sample(&mut rng);
        }
        let r = nongeneration_probe(&x, &h2, 10, 99);
        assert_eq!(r.status, Status::Pass);
        assert!(r.evidence["hits"] >= 1);
    }

    #[test]
    fn criterion_audit_on_the_divergence_free_pair() {
        let w = witt(5, &[1, 1]);
        let (s, s1, _) = build_s(&w);
        let r = criterion_audit(&s, &s1, -1, 5, 17).unwrap();
        assert_eq!(r.status, Status::Pass, "{:?}", r.evidence);
        assert_eq!(r.evidence["centraliser_of_ideal_dim"], 0);
        assert_eq!(r.evidence["contains_top"], 1);
        assert!(r.evidence["min_witness_dim"] >= 1);
    }

    #[test]
    fn criterion_audit_on_the_contact_pair() {
        let shape = Shape::new(5, &[1, 1, 1]).unwrap();
        let field = Field::new(5, 1).unwrap();
        let k = ContactAlgebra::new(&shape, &field).unwrap();
        let (kfull, k1) = build_k(&k);
        let r = criterion_audit(&kfull, &k1, -2, 3, 29).unwrap();
        assert_eq!(r.status, Status::Pass, "{:?}", r.evidence);
        assert_eq!(r.evidence["centraliser_of_ideal_dim"], 0);
        assert_eq!(r.evidence["contains_top"], 1);
    }

    #[test]
    fn criterion_audit_rejects_non_ideals() {
        let w = witt(5, &[1]);
        let full = build_w(&w);
        // The line through the lowest partial is not an ideal of W.
        let line = Subspace::from_rows(
            w.field(),
            w.dim(),
            vec![Deriv::partial(w.shape(), w.field(), 0).to_flat()],
        );
        let sub = Subalgebra::from_space(full.ambient().clone(), AlgebraLabel::Generated, line);
        assert!(matches!(
            criterion_audit(&full, &sub, -1, 1, 1),
            Err(WitnessError::NotAnIdeal)
        ));
    }

    #[test]
    fn w_probe_finds_the_lowest_partial_in_one_variable() {
        let w = witt(5, &[1]);
        let out = remark_w_probe(&w, 1, 8);
        let x = out.element.expect("search must succeed");
        assert_eq!(x.to_flat(), Deriv::partial(w.shape(), w.field(), 0).to_flat());
        assert_eq!(out.nilpotency_index, Some(5));
        assert_eq!(out.attempts, 1);
    }

    #[test]
    fn w_probe_candidate_works_in_two_variables() {
        let w = witt(5, &[1, 1]);
        let out = remark_w_probe(&w, 1, 8);
        let x = out.element.expect("search must succeed");
        let mut expected = Deriv::partial(w.shape(), w.field(), 0);
        let mut coeff = DPoly::zero(w.shape(), w.field());
        coeff.set_coeff(&[4, 0], w.field().one());
        let mut term = Deriv::zero(w.shape(), w.field());
        term.set_coeff(1, coeff);
        expected = expected.add(&term);
        assert_eq!(x.to_flat(), expected.to_flat());
        assert_eq!(out.nilpotency_index, Some(25));
        // Injectivity on the non-negative filtration part: no commuting
        // element there.
        let ad = w.ad_matrix(&x.to_flat());
        let full_kernel = ad.kernel();
        for row in full_kernel.basis_rows() {
            let d = Deriv::from_flat(w.shape(), w.field(), row);
            assert_eq!(d.min_degree(), Some(-1));
        }
    }
}
