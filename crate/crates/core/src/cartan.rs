//! The graded subalgebras of Cartan type.
//!
//! Four families live here, all inside the derivation algebra of a divided
//! power algebra O:
//!
//! * W, the full derivation algebra;
//! * S, the divergence free part, with its derived algebra and the
//!   divergence-constant enlargement CS;
//! * H, the image of the Hamiltonian operator for an even variable count
//!   2r, where variable j pairs with j + r up to sign;
//! * K, the contact algebra for an odd variable count 2r + 1, carried by
//!   generating functions rather than coefficient tuples.
//!
//! W, S, and H elements use the flat Witt coordinates from the derivations
//! module. K elements use monomial coordinates of O directly: the contact
//! operator is injective, and its bracket pulls back to a bilinear product
//! on O. That product gets its own structure constant table, graded by
//! exponent sum plus the last exponent minus two.

use crate::dpalgebra::{DPoly, DpError, MultiIndex, Shape};
use crate::derivations::{Deriv, WAlgebra, DEFAULT_FLAT_CAP};
use crate::field::{Field, Scalar};
use crate::linalg::{FpSpan, Matrix, SpanBuilder, Subspace};
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Index of the paired variable in the symplectic ordering: the first r
/// variables pair with the second r, in order.
pub fn partner(r: usize, j: usize) -> usize {
    assert!(j < 2 * r);
    if j < r {
        j + r
    } else {
        j - r
    }
}

/// Sign attached to variable j in the pairing, +1 below r and -1 above.
pub fn symplectic_sign(r: usize, j: usize) -> i64 {
    assert!(j < 2 * r);
    if j < r {
        1
    } else {
        -1
    }
}

/// Poisson bracket for a shape with at least 2r variables; only the first
/// 2r take part.
pub fn poisson_bracket(r: usize, f: &DPoly, g: &DPoly) -> DPoly {
    let shape = f.shape().clone();
    let fld = f.field().clone();
    let mut out = DPoly::zero(&shape, &fld);
    for j in 0..2 * r {
        let term = f.partial(j).mul(&g.partial(partner(r, j)));
        out = if symplectic_sign(r, j) > 0 {
            out.add(&term)
        } else {
            out.sub(&term)
        };
    }
    out
}

/// Hamiltonian vector field of a generating function, for an even variable
/// count 2r.
pub fn hamiltonian_deriv(f: &DPoly) -> Deriv {
    let shape = f.shape().clone();
    let m = shape.vars();
    assert!(m % 2 == 0 && m >= 2, "Hamiltonian fields need 2r variables");
    let r = m / 2;
    let fld = f.field().clone();
    let mut d = Deriv::zero(&shape, &fld);
    for j in 0..2 * r {
        let mut c = f.partial(j);
        if symplectic_sign(r, j) < 0 {
            c = c.neg();
        }
        d.set_coeff(partner(r, j), d.coeff(partner(r, j)).add(&c));
    }
    d
}

/// Contact vector field of a generating function, for an odd variable count
/// 2r + 1. The last variable plays the distinguished role.
pub fn contact_deriv(f: &DPoly) -> Deriv {
    let shape = f.shape().clone();
    let m = shape.vars();
    assert!(m % 2 == 1 && m >= 3, "contact fields need 2r + 1 variables");
    let r = (m - 1) / 2;
    let fld = f.field().clone();
    let last = m - 1;
    let df_last = f.partial(last);
    let mut d = Deriv::zero(&shape, &fld);
    for j in 0..2 * r {
        let jp = partner(r, j);
        let mut c = f.partial(j);
        if symplectic_sign(r, j) < 0 {
            c = c.neg();
        }
        let shift = DPoly::variable(&shape, &fld, jp).mul(&df_last);
        d.set_coeff(jp, d.coeff(jp).add(&c).add(&shift));
    }
    let two = fld.from_u64(2);
    let mut tail = f.scale(&two);
    for j in 0..2 * r {
        tail = tail.sub(&DPoly::variable(&shape, &fld, j).mul(&f.partial(j)));
    }
    d.set_coeff(last, tail);
    d
}

/// Contact bracket of generating functions. Satisfies
/// [contact_deriv(f), contact_deriv(g)] = contact_deriv of this bracket.
pub fn contact_bracket(f: &DPoly, g: &DPoly) -> DPoly {
    let shape = f.shape().clone();
    let last = shape.vars() - 1;
    let two = f.field().from_u64(2);
    contact_deriv(f)
        .apply(g)
        .sub(&g.mul(&f.partial(last)).scale(&two))
}

/// Degree of a monomial in the contact grading: plain exponents count once,
/// the distinguished last exponent twice, shifted down by two.
pub fn contact_grade(shape: &Shape, alpha: &[u32]) -> i64 {
    let m = shape.vars();
    let mut s = 0i64;
    for &a in &alpha[..m - 1] {
        s += a as i64;
    }
    s + 2 * alpha[m - 1] as i64 - 2
}

struct KData {
    shape: Shape,
    field: Field,
    r: usize,
    dim: usize,
    sc: Vec<SmallVec<[(u32, u32); 8]>>,
    grades: Vec<i64>,
}

/// Contact algebra on generating function coordinates, with precomputed
/// structure constants on monomial pairs. Cheap to clone.
#[derive(Clone)]
pub struct ContactAlgebra(Arc<KData>);

impl std::fmt::Debug for ContactAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ContactAlgebra({:?}, dim {})", self.0.shape, self.0.dim)
    }
}

impl ContactAlgebra {
    pub fn new(shape: &Shape, field: &Field) -> Result<ContactAlgebra, DpError> {
        ContactAlgebra::with_cap(shape, field, DEFAULT_FLAT_CAP)
    }

    pub fn with_cap(shape: &Shape, field: &Field, cap: usize) -> Result<ContactAlgebra, DpError> {
        shape.admits(field)?;
        let m = shape.vars();
        assert!(m % 2 == 1 && m >= 3, "contact algebras need 2r + 1 variables");
        let dim = shape.dim();
        if dim > cap {
            return Err(DpError::DimExceeded {
                dim: dim as u128,
                cap: cap as u64,
            });
        }
        let fp = Field::new(shape.p(), 1).expect("shape characteristic is prime");
        // Structure constants over the prime field transfer to any
        // coefficient extension.
        let mut sc = vec![SmallVec::new(); dim * (dim - 1) / 2];
        let monos: Vec<MultiIndex> = shape.monomials().collect();
        for u in 0..dim {
            let fu = DPoly::monomial(shape, &fp, &monos[u]);
            for v in (u + 1)..dim {
                let gv = DPoly::monomial(shape, &fp, &monos[v]);
                let prod = contact_bracket(&fu, &gv);
                let idx = u * dim - u * (u + 1) / 2 + (v - u - 1);
                let mut entry: SmallVec<[(u32, u32); 8]> = SmallVec::new();
                for (a, c) in prod.terms() {
                    entry.push((shape.mono_rank(a) as u32, c.residue() as u32));
                }
                sc[idx] = entry;
            }
        }
        let grades: Vec<i64> = monos.iter().map(|a| contact_grade(shape, a)).collect();
        Ok(ContactAlgebra(Arc::new(KData {
            shape: shape.clone(),
            field: field.clone(),
            r: (m - 1) / 2,
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

    pub fn r(&self) -> usize {
        self.0.r
    }

    /// Dimension p^{|n|}, one coordinate per generating monomial.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn grade_of_flat(&self, flat: usize) -> i64 {
        self.0.grades[flat]
    }

    pub fn grades(&self) -> &[i64] {
        &self.0.grades
    }

    pub fn bracket_flat(&self, u: usize, v: usize) -> SmallVec<[(u32, u32); 8]> {
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

    /// The vector field carried by a coordinate vector.
    pub fn deriv_of(&self, v: &[Scalar]) -> Deriv {
        contact_deriv(&DPoly::from_vec(&self.0.shape, &self.0.field, v))
    }

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
}

/// The ambient coordinate algebra a subalgebra handle lives in.
#[derive(Clone)]
pub enum Ambient {
    Witt(WAlgebra),
    Contact(ContactAlgebra),
}

impl std::fmt::Debug for Ambient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ambient::Witt(w) => write!(f, "{w:?}"),
            Ambient::Contact(k) => write!(f, "{k:?}"),
        }
    }
}

impl Ambient {
    pub fn shape(&self) -> &Shape {
        match self {
            Ambient::Witt(w) => w.shape(),
            Ambient::Contact(k) => k.shape(),
        }
    }

    pub fn field(&self) -> &Field {
        match self {
            Ambient::Witt(w) => w.field(),
            Ambient::Contact(k) => k.field(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Ambient::Witt(w) => w.dim(),
            Ambient::Contact(k) => k.dim(),
        }
    }

    pub fn bracket(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        match self {
            Ambient::Witt(w) => w.bracket(a, b),
            Ambient::Contact(k) => k.bracket(a, b),
        }
    }

    pub fn bracket_u64(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        match self {
            Ambient::Witt(w) => w.bracket_u64(a, b, out),
            Ambient::Contact(k) => k.bracket_u64(a, b, out),
        }
    }

    pub fn grade_of_flat(&self, flat: usize) -> i64 {
        match self {
            Ambient::Witt(w) => w.grade_of_flat(flat),
            Ambient::Contact(k) => k.grade_of_flat(flat),
        }
    }

    pub fn grades(&self) -> &[i64] {
        match self {
            Ambient::Witt(w) => w.grades(),
            Ambient::Contact(k) => k.grades(),
        }
    }

    /// The derivation a flat vector stands for.
    pub fn deriv_of(&self, v: &[Scalar]) -> Deriv {
        match self {
            Ambient::Witt(w) => Deriv::from_flat(w.shape(), w.field(), v),
            Ambient::Contact(k) => k.deriv_of(v),
        }
    }

    pub fn ad_matrix(&self, x: &[Scalar]) -> Matrix {
        match self {
            Ambient::Witt(w) => w.ad_matrix(x),
            Ambient::Contact(k) => k.ad_matrix(x),
        }
    }
}

/// Names of the constructed subalgebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraLabel {
    W,
    S,
    S1,
    Cs,
    H,
    H2,
    K,
    K1,
    Generated,
}

impl std::fmt::Display for AlgebraLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AlgebraLabel::W => "W",
            AlgebraLabel::S => "S",
            AlgebraLabel::S1 => "S^(1)",
            AlgebraLabel::Cs => "CS",
            AlgebraLabel::H => "H",
            AlgebraLabel::H2 => "H^(2)",
            AlgebraLabel::K => "K",
            AlgebraLabel::K1 => "K^(1)",
            AlgebraLabel::Generated => "generated",
        };
        write!(f, "{s}")
    }
}

/// A subalgebra handle: an ambient bracket structure, a canonical basis,
/// and, when the space is graded, its homogeneous components.
#[derive(Clone)]
pub struct Subalgebra {
    ambient: Ambient,
    label: AlgebraLabel,
    space: Subspace,
    components: Option<BTreeMap<i64, Subspace>>,
}

impl std::fmt::Debug for Subalgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (dim {} in {:?})", self.label, self.dim(), self.ambient)
    }
}

/// Partition of the RREF rows of a space by degree. Returns None when some
/// row mixes degrees, which for a canonical basis means the space is not
/// graded.
pub fn graded_components(ambient: &Ambient, space: &Subspace) -> Option<BTreeMap<i64, Subspace>> {
    let grades = ambient.grades();
    let field = ambient.field();
    let mut byd: BTreeMap<i64, Vec<Vec<Scalar>>> = BTreeMap::new();
    for row in space.basis_rows() {
        let mut deg: Option<i64> = None;
        for (i, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match deg {
                None => deg = Some(grades[i]),
                Some(d) if d == grades[i] => {}
                Some(_) => return None,
            }
        }
        if let Some(d) = deg {
            byd.entry(d).or_default().push(row.clone());
        }
    }
    Some(
        byd.into_iter()
            .map(|(d, rows)| (d, Subspace::from_rows(field, space.ambient(), rows)))
            .collect(),
    )
}

impl Subalgebra {
    pub fn from_space(ambient: Ambient, label: AlgebraLabel, space: Subspace) -> Subalgebra {
        let components = graded_components(&ambient, &space);
        Subalgebra {
            ambient,
            label,
            space,
            components,
        }
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn label(&self) -> AlgebraLabel {
        self.label
    }

    pub fn with_label(mut self, label: AlgebraLabel) -> Subalgebra {
        self.label = label;
        self
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn field(&self) -> &Field {
        self.ambient.field()
    }

    pub fn basis_rows(&self) -> &[Vec<Scalar>] {
        self.space.basis_rows()
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.space.contains(v)
    }

    pub fn is_graded(&self) -> bool {
        self.components.is_some()
    }

    pub fn components(&self) -> Option<&BTreeMap<i64, Subspace>> {
        self.components.as_ref()
    }

    pub fn component(&self, d: i64) -> Option<&Subspace> {
        self.components.as_ref().and_then(|c| c.get(&d))
    }

    pub fn bottom_degree(&self) -> Option<i64> {
        self.components
            .as_ref()
            .and_then(|c| c.keys().next().copied())
    }

    pub fn top_degree(&self) -> Option<i64> {
        self.components
            .as_ref()
            .and_then(|c| c.keys().next_back().copied())
    }

    /// Sum of the components of degree at least d; needs a graded space.
    pub fn filtration_at_least(&self, d: i64) -> Subspace {
        let comps = self
            .components
            .as_ref()
            .expect("filtration needs a graded space");
        let mut rows = Vec::new();
        for (&deg, part) in comps {
            if deg >= d {
                rows.extend(part.basis_rows().iter().cloned());
            }
        }
        Subspace::from_rows(self.field(), self.space.ambient(), rows)
    }

    /// Top graded component, zero space for the zero algebra.
    pub fn top_component(&self) -> Subspace {
        match self.top_degree() {
            Some(d) => self.component(d).unwrap().clone(),
            None => Subspace::zero(self.field(), self.space.ambient()),
        }
    }

    /// Span of all brackets of basis pairs. For a subalgebra this is its
    /// derived algebra; no closure pass is needed since the span of
    /// brackets of a subalgebra is already closed.
    pub fn derived(&self) -> Subalgebra {
        let space = if self.field().is_prime_field() {
            self.derived_space_prime()
        } else {
            self.derived_space_generic()
        };
        Subalgebra::from_space(self.ambient.clone(), AlgebraLabel::Generated, space)
    }

    fn derived_space_generic(&self) -> Subspace {
        let mut b = SpanBuilder::new(self.field(), self.space.ambient());
        let rows = self.space.basis_rows();
        for (i, x) in rows.iter().enumerate() {
            for y in rows.iter().skip(i + 1) {
                b.insert(self.ambient.bracket(x, y));
            }
        }
        b.into_subspace()
    }

    fn derived_space_prime(&self) -> Subspace {
        let f = self.field();
        let p = f.characteristic();
        let n = self.space.ambient();
        let rows: Vec<Vec<u64>> = self
            .space
            .basis_rows()
            .iter()
            .map(|r| r.iter().map(Scalar::residue).collect())
            .collect();
        let mut span = FpSpan::new(p, n);
        let mut out = vec![0u64; n];
        for (i, x) in rows.iter().enumerate() {
            for y in rows.iter().skip(i + 1) {
                self.ambient.bracket_u64(x, y, &mut out);
                if out.iter().any(|&c| c != 0) {
                    span.insert(out.clone());
                }
            }
        }
        span.into_subspace(f)
    }

    /// Exhaustively checks that basis pair brackets stay inside.
    pub fn verify_closed(&self) -> bool {
        let rows = self.space.basis_rows();
        for (i, x) in rows.iter().enumerate() {
            for y in rows.iter().skip(i + 1) {
                if !self.space.contains(&self.ambient.bracket(x, y)) {
                    return false;
                }
            }
        }
        true
    }

    /// Random element as a combination of basis vectors.
    pub fn sample(&self, rng: &mut impl rand_core::RngCore) -> Vec<Scalar> {
        let f = self.field();
        let mut out = vec![f.zero(); self.space.ambient()];
        for row in self.space.basis_rows() {
            let c = f.sample(rng);
            if c.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o = f.add(o, &f.mul(&c, v));
                }
            }
        }
        out
    }
}

/// The full derivation algebra as a subalgebra handle.
pub fn build_w(w: &WAlgebra) -> Subalgebra {
    let space = Subspace::full(w.field(), w.dim());
    Subalgebra::from_space(Ambient::Witt(w.clone()), AlgebraLabel::W, space)
}

/// Divergence free derivations, their derived algebra, and the enlargement
/// by divergence constants, in that order.
pub fn build_s(w: &WAlgebra) -> (Subalgebra, Subalgebra, Subalgebra) {
    let div = w.divergence_matrix();
    let s_space = div.kernel();
    // CS drops only the requirement that the constant coefficient of the
    // divergence vanish: kernel of the divergence followed by killing the
    // constant line.
    let q = w.shape().dim();
    let f = w.field();
    let mut reduced = Matrix::zero(f, q - 1, w.dim());
    for row in 1..q {
        for col in 0..w.dim() {
            reduced.set(row - 1, col, div.get(row, col).clone());
        }
    }
    let cs_space = reduced.kernel();
    let ambient = Ambient::Witt(w.clone());
    let s = Subalgebra::from_space(ambient.clone(), AlgebraLabel::S, s_space);
    let s1 = s.derived().with_label(AlgebraLabel::S1);
    let cs = Subalgebra::from_space(ambient, AlgebraLabel::Cs, cs_space);
    (s, s1, cs)
}

/// Image of the Hamiltonian operator and its second derived algebra.
pub fn build_h(w: &WAlgebra) -> (Subalgebra, Subalgebra) {
    let shape = w.shape().clone();
    let f = w.field().clone();
    assert!(shape.vars() % 2 == 0, "H needs an even variable count");
    let mut b = SpanBuilder::new(&f, w.dim());
    for alpha in shape.monomials() {
        let g = DPoly::monomial(&shape, &f, &alpha);
        b.insert(hamiltonian_deriv(&g).to_flat());
    }
    let ambient = Ambient::Witt(w.clone());
    let h = Subalgebra::from_space(ambient, AlgebraLabel::H, b.into_subspace());
    let h2 = h
        .derived()
        .derived()
        .with_label(AlgebraLabel::H2);
    (h, h2)
}

/// The contact algebra, which is everything in generating function
/// coordinates, and its derived algebra.
pub fn build_k(k: &ContactAlgebra) -> (Subalgebra, Subalgebra) {
    let space = Subspace::full(k.field(), k.dim());
    let kk = Subalgebra::from_space(Ambient::Contact(k.clone()), AlgebraLabel::K, space);
    let k1 = kk.derived().with_label(AlgebraLabel::K1);
    (kk, k1)
}
