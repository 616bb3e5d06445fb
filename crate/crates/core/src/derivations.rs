//! Special derivations of a divided power algebra.
//!
//! A derivation is stored by its coefficient tuple, D = f_1 d_1 + ... +
//! f_m d_m, where d_i is the divided power partial derivative. The flat
//! coordinate layout places the coefficient of d_i at block i, so a
//! derivation over a shape with monomial count q lives in F^{m q} with
//! component i*q + rank(alpha) holding the coefficient of x^(alpha) d_i.
//!
//! The full derivation algebra of this kind is graded by exponent sum minus
//! one. Structure constants on basis pairs have at most two terms:
//!
//!   [x^(a) d_i, x^(b) d_j] = binom(a+b-e_i, a) x^(a+b-e_i) d_j
//!                          - binom(a+b-e_j, b) x^(a+b-e_j) d_i
//!
//! and both collapse onto one slot when i = j.

use crate::dpalgebra::{dp_coeff, DPoly, DpError, MultiIndex, Shape};
use crate::field::{Field, Scalar};
use crate::linalg::Matrix;
use smallvec::SmallVec;
use std::sync::Arc;

/// Default ceiling on the flat dimension of a constructed algebra.
pub const DEFAULT_FLAT_CAP: usize = 4096;

/// Derivation with divided power polynomial coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Deriv {
    shape: Shape,
    field: Field,
    coeffs: Vec<DPoly>,
}

impl std::fmt::Debug for Deriv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c:?})d_{}", i + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Deriv {
    pub fn zero(shape: &Shape, field: &Field) -> Deriv {
        Deriv {
            shape: shape.clone(),
            field: field.clone(),
            coeffs: vec![DPoly::zero(shape, field); shape.vars()],
        }
    }

    pub fn from_coeffs(coeffs: Vec<DPoly>) -> Deriv {
        let first = coeffs.first().expect("a derivation needs coefficients");
        let shape = first.shape().clone();
        let field = first.field().clone();
        assert_eq!(coeffs.len(), shape.vars());
        for c in &coeffs {
            assert_eq!(*c.shape(), shape);
            assert_eq!(*c.field(), field);
        }
        Deriv { shape, field, coeffs }
    }

    /// The basis derivation x^(alpha) d_i, with i zero based.
    pub fn basis(shape: &Shape, field: &Field, alpha: &[u32], i: usize) -> Deriv {
        let mut d = Deriv::zero(shape, field);
        d.coeffs[i] = DPoly::monomial(shape, field, alpha);
        d
    }

    /// The coordinate derivation d_i.
    pub fn partial(shape: &Shape, field: &Field, i: usize) -> Deriv {
        Deriv::basis(shape, field, &vec![0; shape.vars()], i)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[DPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &DPoly {
        &self.coeffs[i]
    }

    pub fn set_coeff(&mut self, i: usize, f: DPoly) {
        assert_eq!(*f.shape(), self.shape);
        assert_eq!(*f.field(), self.field);
        self.coeffs[i] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(DPoly::is_zero)
    }

    pub fn add(&self, other: &Deriv) -> Deriv {
        assert_eq!(self.shape, other.shape);
        Deriv {
            shape: self.shape.clone(),
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Deriv) -> Deriv {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Deriv {
        Deriv {
            shape: self.shape.clone(),
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(DPoly::neg).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Deriv {
        Deriv {
            shape: self.shape.clone(),
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|f| f.scale(c)).collect(),
        }
    }

    /// Multiplies every coefficient by a polynomial, giving f D.
    pub fn left_mul(&self, f: &DPoly) -> Deriv {
        Deriv {
            shape: self.shape.clone(),
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| f.mul(c)).collect(),
        }
    }

    /// Applies the derivation to a polynomial.
    pub fn apply(&self, f: &DPoly) -> DPoly {
        let mut out = DPoly::zero(&self.shape, &self.field);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&c.mul(&f.partial(i)));
            }
        }
        out
    }

    /// Commutator computed coefficient by coefficient.
    pub fn bracket(&self, other: &Deriv) -> Deriv {
        assert_eq!(self.shape, other.shape);
        let coeffs: Vec<DPoly> = (0..self.shape.vars())
            .map(|j| self.apply(&other.coeffs[j]).sub(&other.apply(&self.coeffs[j])))
            .collect();
        Deriv {
            shape: self.shape.clone(),
            field: self.field.clone(),
            coeffs,
        }
    }

    /// Sum of d_i applied to the i-th coefficient.
    pub fn divergence(&self) -> DPoly {
        let mut out = DPoly::zero(&self.shape, &self.field);
        for (i, c) in self.coeffs.iter().enumerate() {
            out = out.add(&c.partial(i));
        }
        out
    }

    /// Splits into homogeneous layers; the layer of degree d collects the
    /// monomial coefficients of exponent sum d + 1.
    pub fn grade_split(&self) -> std::collections::BTreeMap<i64, Deriv> {
        let mut out: std::collections::BTreeMap<i64, Deriv> = std::collections::BTreeMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            for (d, part) in c.grade_split() {
                out.entry(d - 1)
                    .or_insert_with(|| Deriv::zero(&self.shape, &self.field))
                    .coeffs[i]
                    .set_coeff_from(&part);
            }
        }
        out.retain(|_, d| !d.is_zero());
        out
    }

    /// Lowest degree layer, None for zero.
    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .filter_map(DPoly::min_degree)
            .min()
            .map(|d| d - 1)
    }

    pub fn degree_component(&self, d: i64) -> Deriv {
        Deriv {
            shape: self.shape.clone(),
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.degree_component(d + 1))
                .collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<Scalar> {
        let q = self.shape.dim();
        let mut out = vec![self.field.zero(); self.shape.vars() * q];
        for (i, c) in self.coeffs.iter().enumerate() {
            for (a, v) in c.terms() {
                out[i * q + self.shape.mono_rank(a)] = v.clone();
            }
        }
        out
    }

    pub fn from_flat(shape: &Shape, field: &Field, v: &[Scalar]) -> Deriv {
        let q = shape.dim();
        assert_eq!(v.len(), shape.vars() * q);
        let coeffs: Vec<DPoly> = (0..shape.vars())
            .map(|i| DPoly::from_vec(shape, field, &v[i * q..(i + 1) * q]))
            .collect();
        Deriv {
            shape: shape.clone(),
            field: field.clone(),
            coeffs,
        }
    }

    /// Matrix of the action on the polynomial algebra in monomial
    /// coordinates.
    pub fn action_matrix(&self) -> Matrix {
        let q = self.shape.dim();
        let f = &self.field;
        let mut m = Matrix::zero(f, q, q);
        for col in 0..q {
            let mono = DPoly::monomial(&self.shape, f, &self.shape.mono_unrank(col));
            let img = self.apply(&mono);
            for (a, c) in img.terms() {
                let row = self.shape.mono_rank(a);
                let cur = f.add(m.get(row, col), c);
                m.set(row, col, cur);
            }
        }
        m
    }

    pub fn extended(&self, target: &Field) -> Deriv {
        Deriv {
            shape: self.shape.clone(),
            field: target.clone(),
            coeffs: self.coeffs.iter().map(|c| c.extended(target)).collect(),
        }
    }
}

impl DPoly {
    /// Copies every term of a part into self; the supports must be disjoint.
    fn set_coeff_from(&mut self, part: &DPoly) {
        for (a, c) in part.terms() {
            debug_assert!(self.coeff(a).is_zero());
            self.set_coeff(a, c.clone());
        }
    }
}

struct WData {
    shape: Shape,
    field: Field,
    dim: usize,
    /// Structure constants on the strict upper triangle of basis pairs.
    /// Entry (target flat index, residue mod p).
    sc: Vec<SmallVec<[(u32, u32); 2]>>,
    grades: Vec<i64>,
}

/// The derivation algebra of a divided power algebra, with precomputed
/// structure constants on the flat basis. Cheap to clone.
#[derive(Clone)]
pub struct WAlgebra(Arc<WData>);

impl std::fmt::Debug for WAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WAlgebra({:?}, dim {})", self.0.shape, self.0.dim)
    }
}

impl WAlgebra {
    pub fn new(shape: &Shape, field: &Field) -> Result<WAlgebra, DpError> {
        WAlgebra::with_cap(shape, field, DEFAULT_FLAT_CAP)
    }

    pub fn with_cap(shape: &Shape, field: &Field, cap: usize) -> Result<WAlgebra, DpError> {
        shape.admits(field)?;
        let q = shape.dim();
        let m = shape.vars();
        let dim = m * q;
        if dim > cap {
            return Err(DpError::DimExceeded {
                dim: dim as u128,
                cap: cap as u64,
            });
        }
        let p = shape.p();
        let tau = shape.tau();
        let mut sc = vec![SmallVec::new(); dim * (dim - 1) / 2];
        let monos: Vec<MultiIndex> = shape.monomials().collect();
        // One directed term of the bracket: coefficient of the transported
        // monomial x^(a+b-e_i) d_j, zero whenever b_i = 0 or a carry occurs.
        let term = |a: &[u32], i: usize, b: &[u32], j: usize| -> Option<(u32, u32)> {
            if b[i] == 0 {
                return None;
            }
            let mut bm = b.to_vec();
            bm[i] -= 1;
            let c = dp_coeff(p, a, &bm);
            let overflow = a.iter().zip(&bm).zip(tau).any(|((&x, &y), &t)| x + y > t);
            if overflow {
                assert_eq!(c, 0, "truncation would drop a nonzero term");
                return None;
            }
            if c == 0 {
                return None;
            }
            let gamma: MultiIndex = a.iter().zip(&bm).map(|(&x, &y)| x + y).collect();
            Some(((j * q + shape.mono_rank(&gamma)) as u32, c as u32))
        };
        for u in 0..dim {
            let (iu, au) = (u / q, &monos[u % q]);
            for v in (u + 1)..dim {
                let (iv, av) = (v / q, &monos[v % q]);
                let idx = u * dim - u * (u + 1) / 2 + (v - u - 1);
                let mut entry: SmallVec<[(u32, u32); 2]> = SmallVec::new();
                let mut push = |t: Option<(u32, u32)>, negate: bool| {
                    let Some((flat, c)) = t else { return };
                    let c = if negate { (p as u32 - c) % p as u32 } else { c };
                    if c == 0 {
                        return;
                    }
                    if let Some(slot) = entry.iter_mut().find(|(f, _)| *f == flat) {
                        slot.1 = (slot.1 + c) % p as u32;
                    } else {
                        entry.push((flat, c));
                    }
                };
                push(term(au, iu, av, iv), false);
                push(term(av, iv, au, iu), true);
                entry.retain(|&mut (_, c)| c != 0);
                sc[idx] = entry;
            }
        }
        let grades: Vec<i64> = (0..dim).map(|u| shape.grade(&monos[u % q]) - 1).collect();
        Ok(WAlgebra(Arc::new(WData {
            shape: shape.clone(),
            field: field.clone(),
            dim,
            sc,
            grades,
        })))
    }

    pub fn shape(&self) -> &Shape {
        &self.0.shape
    }

    pub fn field(&self) -> &Field {
        &self.0.field
    }

    /// Flat dimension m p^{|n|}.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn flat_index(&self, var: usize, alpha: &[u32]) -> usize {
        var * self.0.shape.dim() + self.0.shape.mono_rank(alpha)
    }

    pub fn flat_decode(&self, flat: usize) -> (usize, MultiIndex) {
        let q = self.0.shape.dim();
        (flat / q, self.0.shape.mono_unrank(flat % q))
    }

    pub fn basis_deriv(&self, flat: usize) -> Deriv {
        let (i, a) = self.flat_decode(flat);
        Deriv::basis(&self.0.shape, &self.0.field, &a, i)
    }

    /// Degree of a flat basis index, exponent sum minus one.
    pub fn grade_of_flat(&self, flat: usize) -> i64 {
        self.0.grades[flat]
    }

    pub fn grades(&self) -> &[i64] {
        &self.0.grades
    }

    /// Structure constants of a basis pair, bilinear sign handled.
    pub fn bracket_flat(&self, u: usize, v: usize) -> SmallVec<[(u32, u32); 2]> {
        if u == v {
            return SmallVec::new();
        }
        let p = self.0.shape.p() as u32;
        if u < v {
            self.0.sc[u * self.0.dim - u * (u + 1) / 2 + (v - u - 1)].clone()
        } else {
            let mut e = self.0.sc[v * self.0.dim - v * (v + 1) / 2 + (u - v - 1)].clone();
            for t in e.iter_mut() {
                t.1 = (p - t.1) % p;
            }
            e.retain(|&mut (_, c)| c != 0);
            e
        }
    }

    /// Bracket of flat coordinate vectors.
    pub fn bracket(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let f = &self.0.field;
        assert_eq!(a.len(), self.0.dim);
        assert_eq!(b.len(), self.0.dim);
        let mut out = vec![f.zero(); self.0.dim];
        for (u, au) in a.iter().enumerate() {
            if au.is_zero() {
                continue;
            }
            for (v, bv) in b.iter().enumerate() {
                if bv.is_zero() || u == v {
                    continue;
                }
                let prod = f.mul(au, bv);
                for (flat, c) in self.bracket_flat(u, v) {
                    let add = f.mul(&prod, &f.from_u64(c as u64));
                    out[flat as usize] = f.add(&out[flat as usize], &add);
                }
            }
        }
        out
    }

    /// Prime field bracket on raw residues. Accumulates with delayed
    /// reduction; all summands stay far below 2^63.
    pub fn bracket_u64(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let p = self.0.shape.p();
        debug_assert!(self.0.field.is_prime_field());
        out.fill(0);
        let dim = self.0.dim;
        for (u, &au) in a.iter().enumerate() {
            if au == 0 {
                continue;
            }
            for (v, &bv) in b.iter().enumerate() {
                if bv == 0 || u == v {
                    continue;
                }
                let (lo, hi, flip) = if u < v { (u, v, false) } else { (v, u, true) };
                let idx = lo * dim - lo * (lo + 1) / 2 + (hi - lo - 1);
                let prod = au * bv % p;
                for &(flat, c) in &self.0.sc[idx] {
                    let c = if flip { (p - c as u64) % p } else { c as u64 };
                    let slot = &mut out[flat as usize];
                    *slot = (*slot + prod * c) % p;
                }
            }
        }
    }

    /// Divergence of every basis element, as a map to monomial coordinates.
    pub fn divergence_matrix(&self) -> Matrix {
        let q = self.0.shape.dim();
        let f = &self.0.field;
        let mut m = Matrix::zero(f, q, self.0.dim);
        for flat in 0..self.0.dim {
            let (i, a) = self.flat_decode(flat);
            if a[i] == 0 {
                continue;
            }
            let mut b = a.clone();
            b[i] -= 1;
            m.set(self.0.shape.mono_rank(&b), flat, f.one());
        }
        m
    }

    /// Adjoint action of a flat vector on the whole algebra.
    pub fn ad_matrix(&self, x: &[Scalar]) -> Matrix {
        let f = &self.0.field;
        let mut m = Matrix::zero(f, self.0.dim, self.0.dim);
        let mut e = vec![f.zero(); self.0.dim];
        for j in 0..self.0.dim {
            e[j] = f.one();
            let col = self.bracket(x, &e);
            e[j] = f.zero();
            for (i, c) in col.into_iter().enumerate() {
                if !c.is_zero() {
                    m.set(i, j, c);
                }
            }
        }
        m
    }

    /// The grading element x_1 d_1 + ... + x_m d_m.
    pub fn euler_element(&self) -> Deriv {
        let shape = &self.0.shape;
        let f = &self.0.field;
        let coeffs: Vec<DPoly> = (0..shape.vars())
            .map(|i| DPoly::variable(shape, f, i))
            .collect();
        Deriv::from_coeffs(coeffs)
    }
}

struct IsoData {
    source: Shape,
    target: Shape,
    /// Source monomial rank to (target rank, unit residue).
    fwd: Vec<(u32, u32)>,
    /// Target monomial rank to (source rank, unit residue of the inverse).
    bwd: Vec<(u32, u32)>,
    /// Target variable index to (source variable, digit position).
    var_origin: Vec<(usize, u32)>,
}

/// Monomial-to-monomial algebra isomorphism onto the height one shape with
/// the same characteristic and total height. The target variable (i, j)
/// corresponds to the source divided power x_i^(p^j); a source monomial maps
/// to the monomial of its base-p digit tuple, times a unit.
#[derive(Clone)]
pub struct FlatteningIso(Arc<IsoData>);

impl FlatteningIso {
    pub fn new(source: &Shape) -> Result<FlatteningIso, DpError> {
        let p = source.p();
        let total = source.total_height() as usize;
        let target = Shape::new(p, &vec![1u32; total])?;
        let fp = Field::new(p, 1).expect("the shape characteristic is a valid prime");
        let mut var_origin = Vec::with_capacity(total);
        for (i, &h) in source.heights().iter().enumerate() {
            for j in 0..h {
                var_origin.push((i, j));
            }
        }
        let digits = |a: &[u32]| -> MultiIndex {
            let mut d = Vec::with_capacity(total);
            for (i, &h) in source.heights().iter().enumerate() {
                let mut rest = a[i] as u64;
                for _ in 0..h {
                    d.push((rest % p) as u32);
                    rest /= p;
                }
            }
            d
        };
        let mut fwd = vec![(0u32, 0u32); source.dim()];
        let mut bwd = vec![(0u32, 0u32); source.dim()];
        for r in 0..source.dim() {
            let a = source.mono_unrank(r);
            let d = digits(&a);
            // Rebuild the monomial as a product of p-th power pieces in both
            // algebras; the accumulated scalars give the unit.
            let mut src_acc = DPoly::one(source, &fp);
            let mut tgt_acc = DPoly::one(&target, &fp);
            for (l, &(i, j)) in var_origin.iter().enumerate() {
                let mut piece_exp = vec![0u32; source.vars()];
                piece_exp[i] = p.pow(j) as u32;
                let src_piece = DPoly::monomial(source, &fp, &piece_exp);
                let tgt_piece = DPoly::variable(&target, &fp, l);
                for _ in 0..d[l] {
                    src_acc = src_acc.mul(&src_piece);
                    tgt_acc = tgt_acc.mul(&tgt_piece);
                }
            }
            // src_acc = c x^(a) and tgt_acc = u xi^(d) with both units
            // nonzero, since digit accumulation never carries.
            let c = src_acc.coeff(&a);
            let u = tgt_acc.coeff(&d);
            assert_eq!(src_acc.num_terms(), 1);
            assert_eq!(tgt_acc.num_terms(), 1);
            assert!(!c.is_zero() && !u.is_zero());
            let unit = fp.div(&u, &c).unwrap();
            let tr = target.mono_rank(&d);
            fwd[r] = (tr as u32, unit.residue() as u32);
            bwd[tr] = (r as u32, fp.inv(&unit).unwrap().residue() as u32);
        }
        Ok(FlatteningIso(Arc::new(IsoData {
            source: source.clone(),
            target,
            fwd,
            bwd,
            var_origin,
        })))
    }

    pub fn source(&self) -> &Shape {
        &self.0.source
    }

    pub fn target(&self) -> &Shape {
        &self.0.target
    }

    /// Source variable and digit position of a target variable.
    pub fn variable_origin(&self, l: usize) -> (usize, u32) {
        self.0.var_origin[l]
    }

    pub fn apply_poly(&self, f: &DPoly) -> DPoly {
        assert_eq!(*f.shape(), self.0.source);
        let fld = f.field().clone();
        let mut out = DPoly::zero(&self.0.target, &fld);
        for (a, c) in f.terms() {
            let (tr, unit) = self.0.fwd[self.0.source.mono_rank(a)];
            let coef = fld.mul(c, &fld.from_u64(unit as u64));
            out.set_coeff(&self.0.target.mono_unrank(tr as usize), coef);
        }
        out
    }

    pub fn inverse_poly(&self, g: &DPoly) -> DPoly {
        assert_eq!(*g.shape(), self.0.target);
        let fld = g.field().clone();
        let mut out = DPoly::zero(&self.0.source, &fld);
        for (d, c) in g.terms() {
            let (sr, unit) = self.0.bwd[self.0.target.mono_rank(d)];
            let coef = fld.mul(c, &fld.from_u64(unit as u64));
            out.set_coeff(&self.0.source.mono_unrank(sr as usize), coef);
        }
        out
    }

    /// Conjugated derivation, extracted from the images of the degree one
    /// target monomials.
    pub fn apply_deriv(&self, d: &Deriv) -> Deriv {
        assert_eq!(*d.shape(), self.0.source);
        let fld = d.field().clone();
        let total = self.0.target.vars();
        let mut coeffs = Vec::with_capacity(total);
        for l in 0..total {
            let xi = DPoly::variable(&self.0.target, &fld, l);
            coeffs.push(self.apply_poly(&d.apply(&self.inverse_poly(&xi))));
        }
        Deriv::from_coeffs(coeffs)
    }

    /// Checks sigma(D(sigma^{-1}(g))) = image(g) on every target monomial.
    /// This is exactly the statement that the conjugate acts as a special
    /// derivation with the extracted coefficients.
    pub fn conjugation_agrees_everywhere(&self, d: &Deriv, image: &Deriv) -> bool {
        let fld = d.field().clone();
        for dd in self.0.target.monomials() {
            let g = DPoly::monomial(&self.0.target, &fld, &dd);
            let via_conj = self.apply_poly(&d.apply(&self.inverse_poly(&g)));
            if via_conj != image.apply(&g) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    fn f5() -> Field {
        Field::new(5, 1).unwrap()
    }

    fn random_deriv(shape: &Shape, field: &Field, rng: &mut impl RngCore) -> Deriv {
        let dim = shape.vars() * shape.dim();
        let mut v = vec![field.zero(); dim];
        for _ in 0..5 {
            v[(rng.next_u64() as usize) % dim] = field.sample(rng);
        }
        Deriv::from_flat(shape, field, &v)
    }

    #[test]
    fn flat_layout_roundtrip() {
        let f = f5();
        let s = Shape::new(5, &[1, 2]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        assert_eq!(w.dim(), 250);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let d = random_deriv(&s, &f, &mut rng);
        assert_eq!(Deriv::from_flat(&s, &f, &d.to_flat()), d);
        for flat in [0usize, 7, 24, 25, 125, 249] {
            let (i, a) = w.flat_decode(flat);
            assert_eq!(w.flat_index(i, &a), flat);
        }
    }

    #[test]
    fn structure_constants_match_the_coefficient_bracket() {
        let f = f5();
        for heights in [vec![2u32], vec![1, 1]] {
            let s = Shape::new(5, &heights).unwrap();
            let w = WAlgebra::new(&s, &f).unwrap();
            for u in 0..w.dim() {
                for v in 0..w.dim() {
                    let du = w.basis_deriv(u);
                    let dv = w.basis_deriv(v);
                    let expect = du.bracket(&dv).to_flat();
                    let mut got = vec![f.zero(); w.dim()];
                    for (flat, c) in w.bracket_flat(u, v) {
                        got[flat as usize] = f.add(&got[flat as usize], &f.from_u64(c as u64));
                    }
                    assert_eq!(got, expect, "basis pair ({u}, {v})");
                }
            }
        }
    }

    #[test]
    fn vector_bracket_is_bilinear_and_matches_derivations() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let a = random_deriv(&s, &f, &mut rng);
            let b = random_deriv(&s, &f, &mut rng);
            let via_table = w.bracket(&a.to_flat(), &b.to_flat());
            assert_eq!(via_table, a.bracket(&b).to_flat());
        }
    }

    #[test]
    fn residue_bracket_agrees_with_the_scalar_bracket() {
        let f = f5();
        let s = Shape::new(5, &[2]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut out = vec![0u64; w.dim()];
        for _ in 0..30 {
            let a = random_deriv(&s, &f, &mut rng).to_flat();
            let b = random_deriv(&s, &f, &mut rng).to_flat();
            let au: Vec<u64> = a.iter().map(Scalar::residue).collect();
            let bu: Vec<u64> = b.iter().map(Scalar::residue).collect();
            w.bracket_u64(&au, &bu, &mut out);
            let expect: Vec<u64> = w.bracket(&a, &b).iter().map(Scalar::residue).collect();
            assert_eq!(out, expect);
        }
    }

    #[test]
    fn jacobi_identity_on_random_derivations() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let a = random_deriv(&s, &f, &mut rng);
            let b = random_deriv(&s, &f, &mut rng);
            let c = random_deriv(&s, &f, &mut rng);
            let j = a
                .bracket(&b.bracket(&c))
                .add(&b.bracket(&c.bracket(&a)))
                .add(&c.bracket(&a.bracket(&b)));
            assert!(j.is_zero());
        }
    }

    #[test]
    fn euler_element_grades_the_basis() {
        let f = f5();
        let s = Shape::new(5, &[1, 2]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        let e = w.euler_element().to_flat();
        let fld = &f;
        for flat in 0..w.dim() {
            let mut b = vec![fld.zero(); w.dim()];
            b[flat] = fld.one();
            let img = w.bracket(&e, &b);
            let expect: Vec<Scalar> = b
                .iter()
                .map(|c| fld.mul(c, &fld.from_i64(w.grade_of_flat(flat))))
                .collect();
            assert_eq!(img, expect);
        }
    }

    #[test]
    fn grading_is_respected_by_brackets() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        for u in 0..w.dim() {
            for v in 0..w.dim() {
                let d = w.grade_of_flat(u) + w.grade_of_flat(v);
                for (flat, _) in w.bracket_flat(u, v) {
                    assert_eq!(w.grade_of_flat(flat as usize), d);
                }
            }
        }
    }

    #[test]
    fn known_brackets() {
        let f = f5();
        let s = Shape::new(5, &[2]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        // [d, x^(k) d] = x^(k-1) d.
        for k in 1..25u32 {
            let u = w.flat_index(0, &[0]);
            let v = w.flat_index(0, &[k]);
            let e = w.bracket_flat(u, v);
            assert_eq!(e.len(), 1);
            assert_eq!(e[0], (w.flat_index(0, &[k - 1]) as u32, 1));
        }
        // [x d, x^(k) d] = (k - 1 on binomials) x^(k) d: the coefficient is
        // C(k,1) - C(k, k-1)... both equal k, so the bracket is (k-1) x^(k) d
        // only when the two binomials differ; here it is C(k,k-1) - C(k,1).
        let s2 = Shape::new(5, &[1, 1]).unwrap();
        let w2 = WAlgebra::new(&s2, &f).unwrap();
        // [x1 d1, x1 d2] = x1 d2.
        let u = w2.flat_index(0, &[1, 0]);
        let v = w2.flat_index(1, &[1, 0]);
        assert_eq!(
            w2.bracket_flat(u, v).to_vec(),
            vec![(w2.flat_index(1, &[1, 0]) as u32, 1)]
        );
        // [d1, d2] = 0.
        assert!(w2
            .bracket_flat(w2.flat_index(0, &[0, 0]), w2.flat_index(1, &[0, 0]))
            .is_empty());
    }

    #[test]
    fn divergence_identities_hold() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        for _ in 0..25 {
            let d = random_deriv(&s, &f, &mut rng);
            let e = random_deriv(&s, &f, &mut rng);
            let g = {
                let mut out = DPoly::zero(&s, &f);
                for _ in 0..4 {
                    let r = (rng.next_u64() as usize) % s.dim();
                    out.set_coeff(&s.mono_unrank(r), f.sample(&mut rng));
                }
                out
            };
            // div(g D) = g div(D) + D(g).
            let lhs = d.left_mul(&g).divergence();
            let rhs = g.mul(&d.divergence()).add(&d.apply(&g));
            assert_eq!(lhs, rhs);
            // div([D, E]) = D(div E) - E(div D).
            let lhs = d.bracket(&e).divergence();
            let rhs = d.apply(&e.divergence()).sub(&e.apply(&d.divergence()));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn divergence_matrix_matches_the_coefficient_rule() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        let dm = w.divergence_matrix();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let d = random_deriv(&s, &f, &mut rng);
            assert_eq!(dm.matvec(&d.to_flat()), d.divergence().to_vec());
        }
    }

    #[test]
    fn ad_matrix_columns_are_brackets() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let w = WAlgebra::new(&s, &f).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let x = random_deriv(&s, &f, &mut rng).to_flat();
        let m = w.ad_matrix(&x);
        let y = random_deriv(&s, &f, &mut rng).to_flat();
        assert_eq!(m.matvec(&y), w.bracket(&x, &y));
    }

    #[test]
    fn action_matrix_matches_apply() {
        let f = f5();
        let s = Shape::new(5, &[2]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let d = random_deriv(&s, &f, &mut rng);
        let m = d.action_matrix();
        for _ in 0..10 {
            let mut g = DPoly::zero(&s, &f);
            for _ in 0..4 {
                let r = (rng.next_u64() as usize) % s.dim();
                g.set_coeff(&s.mono_unrank(r), f.sample(&mut rng));
            }
            assert_eq!(m.matvec(&g.to_vec()), d.apply(&g).to_vec());
        }
    }

    #[test]
    fn grade_split_layers_bracket_consistently() {
        let f = f5();
        let s = Shape::new(5, &[1, 1]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(52);
        let d = random_deriv(&s, &f, &mut rng);
        let parts = d.grade_split();
        let mut sum = Deriv::zero(&s, &f);
        for (deg, part) in &parts {
            for (i, c) in part.coeffs().iter().enumerate() {
                for (a, _) in c.terms() {
                    assert_eq!(s.grade(a) - 1, *deg, "coefficient {i}");
                }
            }
            sum = sum.add(part);
        }
        assert_eq!(sum, d);
    }

    #[test]
    fn flattening_units_on_a_tall_variable() {
        let s = Shape::new(5, &[2]).unwrap();
        let iso = FlatteningIso::new(&s).unwrap();
        assert_eq!(iso.target().heights(), &[1, 1]);
        let f = f5();
        // x^(6) has digits (1, 1) and unit 1.
        let m6 = DPoly::monomial(&s, &f, &[6]);
        assert_eq!(
            iso.apply_poly(&m6),
            DPoly::monomial(iso.target(), &f, &[1, 1])
        );
        // x^(4) has digits (4, 0); the factorial units cancel exactly.
        let m4 = DPoly::monomial(&s, &f, &[4]);
        assert_eq!(
            iso.apply_poly(&m4),
            DPoly::monomial(iso.target(), &f, &[4, 0])
        );
    }

    #[test]
    fn flattening_is_an_algebra_isomorphism() {
        let f = f5();
        for heights in [vec![2u32], vec![1, 2]] {
            let s = Shape::new(5, &heights).unwrap();
            let iso = FlatteningIso::new(&s).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
            for _ in 0..25 {
                let mut a = DPoly::zero(&s, &f);
                let mut b = DPoly::zero(&s, &f);
                for _ in 0..4 {
                    a.set_coeff(&s.mono_unrank((rng.next_u64() as usize) % s.dim()), f.sample(&mut rng));
                    b.set_coeff(&s.mono_unrank((rng.next_u64() as usize) % s.dim()), f.sample(&mut rng));
                }
                let lhs = iso.apply_poly(&a.mul(&b));
                let rhs = iso.apply_poly(&a).mul(&iso.apply_poly(&b));
                assert_eq!(lhs, rhs);
                assert_eq!(iso.inverse_poly(&iso.apply_poly(&a)), a);
            }
        }
    }

    #[test]
    fn conjugated_partial_picks_up_a_tail() {
        let f = f5();
        let s = Shape::new(5, &[2]).unwrap();
        let iso = FlatteningIso::new(&s).unwrap();
        let d = Deriv::partial(&s, &f, 0);
        let img = iso.apply_deriv(&d);
        // The image is d_1 + x_1^(4) d_2.
        let mut expect = Deriv::partial(iso.target(), &f, 0);
        expect.set_coeff(1, DPoly::monomial(iso.target(), &f, &[4, 0]));
        assert_eq!(img, expect);
        assert!(iso.conjugation_agrees_everywhere(&d, &img));
    }

    #[test]
    fn conjugation_preserves_brackets() {
        let f = f5();
        let s = Shape::new(5, &[1, 2]).unwrap();
        let iso = FlatteningIso::new(&s).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
        for _ in 0..10 {
            let a = random_deriv(&s, &f, &mut rng);
            let b = random_deriv(&s, &f, &mut rng);
            let ia = iso.apply_deriv(&a);
            let ib = iso.apply_deriv(&b);
            assert!(iso.conjugation_agrees_everywhere(&a, &ia));
            assert_eq!(iso.apply_deriv(&a.bracket(&b)), ia.bracket(&ib));
        }
    }
}
