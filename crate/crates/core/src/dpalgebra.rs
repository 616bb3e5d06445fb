//! Divided power algebras with componentwise truncation.
//!
//! A shape fixes a characteristic p, a variable count m, and per-variable
//! heights n_1, ..., n_m. The algebra has basis x^(alpha) for multi-indices
//! 0 <= alpha <= tau with tau_i = p^{n_i} - 1, so its dimension is p^{|n|}.
//! Products follow the divided power rule
//!
//!   x^(alpha) x^(beta) = binom(alpha + beta, alpha) x^(alpha + beta)
//!
//! with the binomial coefficient taken mod p componentwise via Lucas. When
//! alpha + beta escapes the truncation box the coefficient always vanishes
//! mod p, because adding two base-p numbers below p^n past p^n forces a
//! carry; the multiplication routine asserts this instead of clamping.
//!
//! Monomials are ranked in lexicographic order with the first variable most
//! significant, which gives every polynomial a canonical dense coordinate
//! vector.

use crate::field::{Field, Scalar};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Exponent tuple of a divided power monomial.
pub type MultiIndex = Vec<u32>;

/// Monomial count ceiling for a single shape.
pub const SHAPE_DIM_CAP: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DpError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic must be at least 5, got {0}")]
    CharTooSmall(u64),
    #[error("a shape needs between 1 and 16 variables, got {0}")]
    BadVariableCount(usize),
    #[error("every height must be at least 1")]
    ZeroHeight,
    #[error("shape has {dim} monomials, above the cap {cap}")]
    DimExceeded { dim: u128, cap: u64 },
    #[error("scalars live over characteristic {got}, shape needs {expected}")]
    CharMismatch { expected: u64, got: u64 },
}

struct ShapeData {
    p: u64,
    heights: Vec<u32>,
    tau: Vec<u32>,
    /// Place value of each variable in the monomial rank.
    places: Vec<u64>,
    dim: usize,
}

/// Characteristic, variable count, and truncation heights of a divided power
/// algebra. Cheap to clone.
#[derive(Clone)]
pub struct Shape(Arc<ShapeData>);

impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.heights == other.0.heights
    }
}

impl Eq for Shape {}

impl std::fmt::Debug for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Shape(p={}, n={:?})", self.0.p, self.0.heights)
    }
}

impl Shape {
    pub fn new(p: u64, heights: &[u32]) -> Result<Shape, DpError> {
        if p < 5 {
            return Err(DpError::CharTooSmall(p));
        }
        if !crate::field::is_prime_u64(p) {
            return Err(DpError::NotPrime(p));
        }
        if heights.is_empty() || heights.len() > 16 {
            return Err(DpError::BadVariableCount(heights.len()));
        }
        if heights.iter().any(|&h| h == 0) {
            return Err(DpError::ZeroHeight);
        }
        let mut dim: u128 = 1;
        for &h in heights {
            for _ in 0..h {
                dim *= p as u128;
                if dim > SHAPE_DIM_CAP as u128 {
                    return Err(DpError::DimExceeded {
                        dim,
                        cap: SHAPE_DIM_CAP,
                    });
                }
            }
        }
        let tau: Vec<u32> = heights
            .iter()
            .map(|&h| (p.pow(h) - 1) as u32)
            .collect();
        let mut places = vec![1u64; heights.len()];
        for i in (0..heights.len().saturating_sub(1)).rev() {
            places[i] = places[i + 1] * p.pow(heights[i + 1]);
        }
        Ok(Shape(Arc::new(ShapeData {
            p,
            heights: heights.to_vec(),
            tau,
            places,
            dim: dim as usize,
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn vars(&self) -> usize {
        self.0.heights.len()
    }

    pub fn heights(&self) -> &[u32] {
        &self.0.heights
    }

    pub fn tau(&self) -> &[u32] {
        &self.0.tau
    }

    /// Number of monomials, p^{n_1 + ... + n_m}.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Sum of the heights.
    pub fn total_height(&self) -> u32 {
        self.0.heights.iter().sum()
    }

    pub fn in_box(&self, alpha: &[u32]) -> bool {
        alpha.len() == self.vars() && alpha.iter().zip(&self.0.tau).all(|(a, t)| a <= t)
    }

    /// Rank of a monomial, compatible with lexicographic order on exponent
    /// tuples read first variable first.
    pub fn mono_rank(&self, alpha: &[u32]) -> usize {
        debug_assert!(self.in_box(alpha), "exponent {alpha:?} outside {self:?}");
        alpha
            .iter()
            .zip(&self.0.places)
            .map(|(&a, &pl)| a as u64 * pl)
            .sum::<u64>() as usize
    }

    pub fn mono_unrank(&self, mut rank: usize) -> MultiIndex {
        assert!(rank < self.0.dim);
        let mut alpha = vec![0u32; self.vars()];
        for (i, &pl) in self.0.places.iter().enumerate() {
            alpha[i] = (rank as u64 / pl) as u32;
            rank = (rank as u64 % pl) as usize;
        }
        alpha
    }

    /// Exponent sum |alpha|.
    pub fn grade(&self, alpha: &[u32]) -> i64 {
        alpha.iter().map(|&a| a as i64).sum()
    }

    /// All exponent tuples in rank order.
    pub fn monomials(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.0.dim).map(move |r| self.mono_unrank(r))
    }

    /// Checks that a coefficient field has the matching characteristic.
    pub fn admits(&self, field: &Field) -> Result<(), DpError> {
        if field.characteristic() != self.0.p {
            return Err(DpError::CharMismatch {
                expected: self.0.p,
                got: field.characteristic(),
            });
        }
        Ok(())
    }
}

/// Binomial coefficient mod p by the Lucas digit rule.
pub fn lucas_binom(p: u64, mut n: u64, mut k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        // Digit binomial by a short product, all operands below p.
        let mut num = 1u64;
        let mut den = 1u64;
        for t in 0..kd.min(nd - kd) {
            num = num * ((nd - t) % p) % p;
            den = den * (t + 1) % p;
        }
        acc = acc * num % p * crate::field::u64_pow_mod(den, p - 2, p) % p;
        n /= p;
        k /= p;
    }
    acc
}

/// Coefficient of x^(a+b) in the product x^(a) x^(b). Vanishes exactly when
/// some variable carries in base p.
pub fn dp_coeff(p: u64, a: &[u32], b: &[u32]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 1u64;
    for (&ai, &bi) in a.iter().zip(b) {
        acc = acc * lucas_binom(p, ai as u64 + bi as u64, ai as u64) % p;
        if acc == 0 {
            return 0;
        }
    }
    acc
}

/// Element of a divided power algebra with coefficients in a chosen field of
/// the right characteristic. Only nonzero terms are stored.
#[derive(Clone, PartialEq, Eq)]
pub struct DPoly {
    shape: Shape,
    field: Field,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl std::fmt::Debug for DPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("{}*x^{:?}", self.field.format_scalar(c), a))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl DPoly {
    pub fn zero(shape: &Shape, field: &Field) -> DPoly {
        shape.admits(field).expect("field characteristic mismatch");
        DPoly {
            shape: shape.clone(),
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(shape: &Shape, field: &Field, c: Scalar) -> DPoly {
        let mut out = DPoly::zero(shape, field);
        if !c.is_zero() {
            out.terms.insert(vec![0; shape.vars()], c);
        }
        out
    }

    pub fn one(shape: &Shape, field: &Field) -> DPoly {
        DPoly::constant(shape, field, field.one())
    }

    /// The monomial x^(alpha).
    pub fn monomial(shape: &Shape, field: &Field, alpha: &[u32]) -> DPoly {
        assert!(shape.in_box(alpha), "exponent outside the truncation box");
        let mut out = DPoly::zero(shape, field);
        out.terms.insert(alpha.to_vec(), field.one());
        out
    }

    /// The degree one monomial of variable i (zero based).
    pub fn variable(shape: &Shape, field: &Field, i: usize) -> DPoly {
        let mut alpha = vec![0u32; shape.vars()];
        alpha[i] = 1;
        DPoly::monomial(shape, field, &alpha)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &[u32]) -> Scalar {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn set_coeff(&mut self, alpha: &[u32], c: Scalar) {
        assert!(self.shape.in_box(alpha));
        if c.is_zero() {
            self.terms.remove(alpha);
        } else {
            self.terms.insert(alpha.to_vec(), c);
        }
    }

    pub fn add(&self, other: &DPoly) -> DPoly {
        assert_eq!(self.shape, other.shape);
        let f = &self.field;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            let s = f.add(&out.coeff(a), c);
            out.set_coeff(a, s);
        }
        out
    }

    pub fn sub(&self, other: &DPoly) -> DPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DPoly {
        let f = &self.field;
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = f.neg(c);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> DPoly {
        let f = &self.field;
        if c.is_zero() {
            return DPoly::zero(&self.shape, f);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = f.mul(v, c);
        }
        out
    }

    /// Divided power product.
    pub fn mul(&self, other: &DPoly) -> DPoly {
        assert_eq!(self.shape, other.shape);
        let f = &self.field;
        let p = self.shape.p();
        let tau = self.shape.tau();
        let mut out = DPoly::zero(&self.shape, f);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let cf = dp_coeff(p, a, b);
                let overflow = a.iter().zip(b).zip(tau).any(|((&x, &y), &t)| x + y > t);
                if overflow {
                    // A carry is forced, so the term is annihilated rather
                    // than truncated.
                    assert_eq!(cf, 0, "truncation would drop a nonzero term");
                    continue;
                }
                if cf == 0 {
                    continue;
                }
                let gamma: MultiIndex = a.iter().zip(b).map(|(&x, &y)| x + y).collect();
                let add = f.mul(&f.mul(ca, cb), &f.from_u64(cf));
                let s = f.add(&out.coeff(&gamma), &add);
                out.set_coeff(&gamma, s);
            }
        }
        out
    }

    pub fn power(&self, e: u32) -> DPoly {
        let mut acc = DPoly::one(&self.shape, &self.field);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Divided power partial derivative in variable i: maps x^(k) to
    /// x^(k-1) without a factor of k.
    pub fn partial(&self, i: usize) -> DPoly {
        assert!(i < self.shape.vars());
        let mut out = DPoly::zero(&self.shape, &self.field);
        for (a, c) in &self.terms {
            if a[i] == 0 {
                continue;
            }
            let mut b = a.clone();
            b[i] -= 1;
            out.terms.insert(b, c.clone());
        }
        out
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&vec![0; self.shape.vars()])
    }

    /// Strips the degree zero term.
    pub fn without_constant(&self) -> DPoly {
        let mut out = self.clone();
        out.terms.remove(&vec![0u32; self.shape.vars()]);
        out
    }

    /// Splits into exponent-sum homogeneous parts, keyed by degree.
    pub fn grade_split(&self) -> BTreeMap<i64, DPoly> {
        let mut out: BTreeMap<i64, DPoly> = BTreeMap::new();
        for (a, c) in &self.terms {
            let d = self.shape.grade(a);
            out.entry(d)
                .or_insert_with(|| DPoly::zero(&self.shape, &self.field))
                .terms
                .insert(a.clone(), c.clone());
        }
        out
    }

    pub fn degree_component(&self, d: i64) -> DPoly {
        let mut out = DPoly::zero(&self.shape, &self.field);
        for (a, c) in &self.terms {
            if self.shape.grade(a) == d {
                out.terms.insert(a.clone(), c.clone());
            }
        }
        out
    }

    /// Largest exponent sum among the terms, None for zero.
    pub fn top_degree(&self) -> Option<i64> {
        self.terms.keys().map(|a| self.shape.grade(a)).max()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms.keys().map(|a| self.shape.grade(a)).min()
    }

    /// Multiplicative inverse, defined exactly when the constant term is a
    /// unit. Computed by the geometric series of the augmentation part,
    /// which is nilpotent.
    pub fn invert(&self) -> Option<DPoly> {
        let f = &self.field;
        let c = self.constant_term();
        if c.is_zero() {
            return None;
        }
        let cinv = f.inv(&c).unwrap();
        // self = c (1 + w) with w supported in positive degrees.
        let w = self.without_constant().scale(&cinv);
        let mut acc = DPoly::one(&self.shape, f);
        let mut pw = DPoly::one(&self.shape, f);
        let max_steps = self.shape.tau().iter().map(|&t| t as usize).sum::<usize>() + 1;
        for _ in 0..max_steps {
            pw = pw.mul(&w).neg();
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        debug_assert!(pw.is_zero(), "augmentation part failed to nilpotate");
        Some(acc.scale(&cinv))
    }

    /// Dense coefficient vector in monomial rank order.
    pub fn to_vec(&self) -> Vec<Scalar> {
        let mut out = vec![self.field.zero(); self.shape.dim()];
        for (a, c) in &self.terms {
            out[self.shape.mono_rank(a)] = c.clone();
        }
        out
    }

    pub fn from_vec(shape: &Shape, field: &Field, v: &[Scalar]) -> DPoly {
        assert_eq!(v.len(), shape.dim());
        let mut out = DPoly::zero(shape, field);
        for (r, c) in v.iter().enumerate() {
            if !c.is_zero() {
                out.terms.insert(shape.mono_unrank(r), c.clone());
            }
        }
        out
    }

    /// Matrix of g -> self * g on the monomial coordinate vectors.
    pub fn multiplication_matrix(&self) -> crate::linalg::Matrix {
        let n = self.shape.dim();
        let f = &self.field;
        let p = self.shape.p();
        let tau = self.shape.tau();
        let mut m = crate::linalg::Matrix::zero(f, n, n);
        for col in 0..n {
            let b = self.shape.mono_unrank(col);
            for (a, ca) in &self.terms {
                let cf = dp_coeff(p, a, &b);
                if cf == 0 {
                    continue;
                }
                let fits = a.iter().zip(&b).zip(tau).all(|((&x, &y), &t)| x + y <= t);
                assert!(fits, "truncation would drop a nonzero term");
                let gamma: MultiIndex = a.iter().zip(&b).map(|(&x, &y)| x + y).collect();
                let row = self.shape.mono_rank(&gamma);
                let cur = f.add(m.get(row, col), &f.mul(ca, &f.from_u64(cf)));
                m.set(row, col, cur);
            }
        }
        m
    }

    /// Embeds the coefficients into an extension field of the same
    /// characteristic.
    pub fn extended(&self, target: &Field) -> DPoly {
        if *target == self.field {
            return self.clone();
        }
        let mut out = DPoly::zero(&self.shape, target);
        for (a, c) in &self.terms {
            out.terms.insert(a.clone(), target.embed_prime(c).unwrap());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    fn f5() -> Field {
        Field::new(5, 1).unwrap()
    }

    fn random_dpoly(shape: &Shape, field: &Field, rng: &mut impl RngCore) -> DPoly {
        let mut out = DPoly::zero(shape, field);
        for _ in 0..4 {
            let r = (rng.next_u64() as usize) % shape.dim();
            out.set_coeff(&shape.mono_unrank(r), field.sample(rng));
        }
        out
    }

    #[test]
    fn shape_validation() {
        assert_eq!(Shape::new(4, &[1]).unwrap_err(), DpError::CharTooSmall(4));
        assert_eq!(Shape::new(9, &[1]).unwrap_err(), DpError::NotPrime(9));
        assert_eq!(Shape::new(5, &[]).unwrap_err(), DpError::BadVariableCount(0));
        assert_eq!(Shape::new(5, &[1, 0]).unwrap_err(), DpError::ZeroHeight);
        assert!(matches!(
            Shape::new(5, &[9]).unwrap_err(),
            DpError::DimExceeded { .. }
        ));
        let s = Shape::new(5, &[1, 2]).unwrap();
        assert_eq!(s.dim(), 125);
        assert_eq!(s.tau(), &[4, 24]);
        assert_eq!(s.total_height(), 3);
    }

    #[test]
    fn ranks_are_lexicographic_and_invertible() {
        let s = Shape::new(5, &[1, 2]).unwrap();
        assert_eq!(s.mono_rank(&[0, 0]), 0);
        assert_eq!(s.mono_rank(&[4, 24]), 124);
        assert_eq!(s.mono_rank(&[1, 0]), 25);
        let mut prev: Option<MultiIndex> = None;
        for r in 0..s.dim() {
            let a = s.mono_unrank(r);
            assert_eq!(s.mono_rank(&a), r);
            if let Some(p) = prev {
                assert!(p < a, "rank order must be lexicographic");
            }
            prev = Some(a);
        }
    }

    #[test]
    fn lucas_binomials() {
        assert_eq!(lucas_binom(5, 2, 1), 2);
        assert_eq!(lucas_binom(5, 4, 2), 1); // 6 mod 5
        assert_eq!(lucas_binom(5, 5, 2), 0); // carry
        assert_eq!(lucas_binom(5, 6, 5), 1); // digits (1,1) over (1,0)
        assert_eq!(lucas_binom(5, 1, 3), 0);
        assert_eq!(lucas_binom(7, 10, 3), lucas_binom(7, 10, 7));
        // Exhaustive cross-check against Pascal's rule mod 5 for n < 32.
        let mut row = vec![1u64];
        for n in 1..32u64 {
            let mut next = vec![1u64];
            for k in 1..n {
                next.push((row[k as usize - 1] + row[k as usize]) % 5);
            }
            next.push(1);
            row = next;
            for (k, &v) in row.iter().enumerate() {
                assert_eq!(lucas_binom(5, n, k as u64), v, "C({n},{k})");
            }
        }
    }

    #[test]
    fn products_match_factorial_normalisation() {
        let f = f5();
        let s = Shape::new(5, &[1]).unwrap();
        let x = DPoly::variable(&s, &f, 0);
        // x^k = k! x^(k).
        let mut expect = [1u64; 5];
        for k in 2..5 {
            expect[k] = expect[k - 1] * k as u64 % 5;
        }
        let mut pw = DPoly::one(&s, &f);
        for k in 1..5u32 {
            pw = pw.mul(&x);
            let mono = DPoly::monomial(&s, &f, &[k]);
            assert_eq!(pw, mono.scale(&f.from_u64(expect[k as usize])));
        }
        // One more power drops off the truncation box.
        assert!(pw.mul(&x).is_zero());
    }

    #[test]
    fn divided_power_products_vanish_on_carries() {
        let f = f5();
        // tau = 24, so x^(2) x^(3) stays inside the box yet vanishes: the
        // coefficient C(5,2) = 10 is divisible by 5.
        let s = Shape::new(5, &[2]).unwrap();
        let a = DPoly::monomial(&s, &f, &[2]);
        let b = DPoly::monomial(&s, &f, &[3]);
        assert!(a.mul(&b).is_zero());
        let c = DPoly::monomial(&s, &f, &[20]);
        let d = DPoly::monomial(&s, &f, &[4]);
        // C(24,4) = 10626 = 1 mod 5.
        assert_eq!(c.mul(&d), DPoly::monomial(&s, &f, &[24]));
    }

    #[test]
    fn multiplication_is_commutative_and_associative() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let a = random_dpoly(&s, &f, &mut rng);
            let b = random_dpoly(&s, &f, &mut rng);
            let c = random_dpoly(&s, &f, &mut rng);
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }

    #[test]
    fn partials_satisfy_leibniz_and_commute() {
        let f = f5();
        let s = Shape::new(5, &[2, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let a = random_dpoly(&s, &f, &mut rng);
            let b = random_dpoly(&s, &f, &mut rng);
            for i in 0..2 {
                let lhs = a.mul(&b).partial(i);
                let rhs = a.partial(i).mul(&b).add(&a.mul(&b.partial(i)));
                assert_eq!(lhs, rhs);
            }
            assert_eq!(a.partial(0).partial(1), a.partial(1).partial(0));
        }
    }

    #[test]
    fn partial_exhausts_a_variable() {
        let f = f5();
        let s = Shape::new(5, &[2]).unwrap();
        let mut cur = DPoly::monomial(&s, &f, &[24]);
        for k in (0..24u32).rev() {
            cur = cur.partial(0);
            assert_eq!(cur, DPoly::monomial(&s, &f, &[k]));
        }
        assert!(cur.partial(0).is_zero());
    }

    #[test]
    fn inverse_of_one_plus_x() {
        let f = f5();
        let s = Shape::new(5, &[1]).unwrap();
        let g = DPoly::one(&s, &f).add(&DPoly::variable(&s, &f, 0));
        let inv = g.invert().unwrap();
        // 1 - x + 2 x^(2) - 6 x^(3) + 24 x^(4) with the signs reduced mod 5.
        let mut expect = DPoly::zero(&s, &f);
        for (k, c) in [(0i64, 1i64), (1, 4), (2, 2), (3, 4), (4, 4)] {
            expect.set_coeff(&[k as u32], f.from_i64(c));
        }
        assert_eq!(inv, expect);
        assert_eq!(g.mul(&inv), DPoly::one(&s, &f));
    }

    #[test]
    fn units_are_exactly_the_nonzero_constant_terms() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let g = random_dpoly(&s, &f, &mut rng);
            match g.invert() {
                Some(inv) => {
                    assert!(!g.constant_term().is_zero());
                    assert_eq!(g.mul(&inv), DPoly::one(&s, &f));
                }
                None => assert!(g.constant_term().is_zero()),
            }
        }
    }

    #[test]
    fn grade_split_partitions_the_support() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let g = random_dpoly(&s, &f, &mut rng);
        let parts = g.grade_split();
        let mut sum = DPoly::zero(&s, &f);
        for (d, part) in &parts {
            assert!(!part.is_zero());
            for (a, _) in part.terms() {
                assert_eq!(s.grade(a), *d);
            }
            sum = sum.add(part);
        }
        assert_eq!(sum, g);
        assert_eq!(g.degree_component(2), parts.get(&2).cloned().unwrap_or_else(|| DPoly::zero(&s, &f)));
    }

    #[test]
    fn multiplication_matrix_agrees_with_products() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let a = random_dpoly(&s, &f, &mut rng);
        let m = a.multiplication_matrix();
        for _ in 0..10 {
            let g = random_dpoly(&s, &f, &mut rng);
            let prod = a.mul(&g);
            assert_eq!(m.matvec(&g.to_vec()), prod.to_vec());
        }
        let id = DPoly::one(&s, &f).multiplication_matrix();
        assert_eq!(id, crate::linalg::Matrix::identity(&f, s.dim()));
    }

    #[test]
    fn vector_roundtrip() {
        let f = Field::new(5, 2).unwrap();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let g = random_dpoly(&s, &f, &mut rng);
        assert_eq!(DPoly::from_vec(&s, &f, &g.to_vec()), g);
    }

    #[test]
    fn extension_embedding_is_multiplicative() {
        let f = f5();
        let f25 = Field::new(5, 2).unwrap();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(34);
        let a = random_dpoly(&s, &f, &mut rng);
        let b = random_dpoly(&s, &f, &mut rng);
        assert_eq!(a.extended(&f25).mul(&b.extended(&f25)), a.mul(&b).extended(&f25));
    }

    #[test]
    fn field_of_wrong_characteristic_is_rejected() {
        let s = Shape::new(5, &[1]).unwrap();
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(
            s.admits(&f7).unwrap_err(),
            DpError::CharMismatch { expected: 5, got: 7 }
        );
    }
}
