//! Exact dense linear algebra over a [`Field`].
//!
//! Everything is deterministic: row reduction always picks the first nonzero
//! entry, so the reduced row echelon form, kernels, and subspace bases are
//! canonical for given input. Subspaces are kept as RREF bases, which makes
//! equality a row-by-row comparison.
//!
//! Characteristic polynomials use the Berkowitz vector recurrence, which is
//! division free and so never depends on pivot choices.

use crate::field::{Field, FieldError, Scalar};
use crate::poly::Poly;
use std::collections::BTreeMap;
use thiserror::Error;

/// Sanity ceiling on rows * cols of a single matrix.
pub const MATRIX_ENTRY_CAP: usize = 1 << 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("ambient dimensions differ ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("matrix of {rows} x {cols} entries exceeds the size cap")]
    BoundExceeded { rows: usize, cols: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.field.format_scalar(self.get(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(field: &Field, rows: usize, cols: usize) -> Matrix {
        assert!(
            rows.saturating_mul(cols) <= MATRIX_ENTRY_CAP,
            "matrix of {rows} x {cols} entries exceeds the size cap"
        );
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &Field, cols: usize, rows: &[Vec<Scalar>]) -> Matrix {
        let mut m = Matrix::zero(field, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row {i} has the wrong length");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = &self.field;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = f.add(a, b);
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = &self.field;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = f.sub(a, b);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let f = &self.field;
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = f.mul(a, c);
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let f = &self.field;
        let mut out = Matrix::zero(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = f.add(out.get(i, j), &f.mul(a, b));
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        let mut out = vec![f.zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = f.zero();
            for (j, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc = f.add(&acc, &f.mul(self.get(i, j), x));
                }
            }
            out[i] = acc;
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = Matrix::identity(&self.field, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Entry-wise embedding into an extension of the same characteristic.
    pub fn extended(&self, target: &Field) -> Result<Matrix, FieldError> {
        if *target == self.field {
            return Ok(self.clone());
        }
        let mut out = Matrix::zero(target, self.rows, self.cols);
        for (dst, src) in out.data.iter_mut().zip(&self.data) {
            *dst = target.embed_prime(src)?;
        }
        Ok(out)
    }

    /// Canonical reduced row echelon form with its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = f.inv(m.get(r, c)).unwrap();
            m.scale_row(r, &inv);
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let factor = m.get(i, c).clone();
                    m.axpy_rows(i, r, &factor);
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Kernel as a canonical subspace of F^cols.
    pub fn kernel(&self) -> Subspace {
        let f = &self.field;
        let (r, pivots) = self.rref();
        let pivot_set: BTreeMap<usize, usize> =
            pivots.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut rows = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains_key(&free) {
                continue;
            }
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (&pc, &pr) in &pivot_set {
                v[pc] = f.neg(r.get(pr, free));
            }
            rows.push(v);
        }
        Subspace::from_rows(f, self.cols, rows)
    }

    /// One solution of self * x = b with all free variables set to zero, or
    /// None when the system is inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let f = &self.field;
        let mut aug = Matrix::zero(f, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![f.zero(); self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols).clone();
        }
        Some(x)
    }

    /// Characteristic polynomial det(tI - A) by the Berkowitz recurrence.
    pub fn char_poly(&self) -> Poly {
        assert_eq!(self.rows, self.cols, "characteristic polynomial needs a square matrix");
        if self.field.is_prime_field() {
            self.char_poly_prime()
        } else {
            self.char_poly_generic()
        }
    }

    fn char_poly_generic(&self) -> Poly {
        let f = &self.field;
        let n = self.rows;
        if n == 0 {
            return Poly::one(f);
        }
        // c holds the coefficients of the char poly of the leading principal
        // block, highest power first.
        let mut c = vec![f.one(), f.neg(self.get(0, 0))];
        for i in 1..n {
            // Toeplitz column t_j: 1, -a_ii, then -(R M^{j-2} S) where R and S
            // are the border row and column of the (i+1) x (i+1) block.
            let mut t = vec![f.zero(); i + 2];
            t[0] = f.one();
            t[1] = f.neg(self.get(i, i));
            let mut w: Vec<Scalar> = (0..i).map(|l| self.get(l, i).clone()).collect();
            for j in 2..=i + 1 {
                let mut dot = f.zero();
                for l in 0..i {
                    dot = f.add(&dot, &f.mul(self.get(i, l), &w[l]));
                }
                t[j] = f.neg(&dot);
                if j <= i {
                    let mut nw = vec![f.zero(); i];
                    for r in 0..i {
                        let mut acc = f.zero();
                        for l in 0..i {
                            acc = f.add(&acc, &f.mul(self.get(r, l), &w[l]));
                        }
                        nw[r] = acc;
                    }
                    w = nw;
                }
            }
            let mut nc = vec![f.zero(); c.len() + 1];
            for (s, entry) in nc.iter_mut().enumerate() {
                let lo = s.saturating_sub(i + 1);
                for l in lo..=s.min(c.len() - 1) {
                    *entry = f.add(entry, &f.mul(&t[s - l], &c[l]));
                }
            }
            c = nc;
        }
        let coeffs: Vec<Scalar> = c.into_iter().rev().collect();
        Poly::from_coeffs(f, coeffs)
    }

    /// Same recurrence on raw residues for prime fields. Products stay below
    /// 2^40 and row sums below 2^60, so accumulation in u64 is exact.
    fn char_poly_prime(&self) -> Poly {
        let f = &self.field;
        let p = f.characteristic();
        let n = self.rows;
        if n == 0 {
            return Poly::one(f);
        }
        let a: Vec<u64> = self.data.iter().map(Scalar::residue).collect();
        let at = |i: usize, j: usize| a[i * n + j];
        let neg = |x: u64| (p - x % p) % p;
        let mut c = vec![1u64, neg(at(0, 0))];
        for i in 1..n {
            let mut t = vec![0u64; i + 2];
            t[0] = 1;
            t[1] = neg(at(i, i));
            let mut w: Vec<u64> = (0..i).map(|l| at(l, i)).collect();
            for j in 2..=i + 1 {
                let mut dot = 0u64;
                for l in 0..i {
                    dot += at(i, l) * w[l];
                }
                t[j] = neg(dot % p);
                if j <= i {
                    let mut nw = vec![0u64; i];
                    for (r, entry) in nw.iter_mut().enumerate() {
                        let mut acc = 0u64;
                        for l in 0..i {
                            acc += at(r, l) * w[l];
                        }
                        *entry = acc % p;
                    }
                    w = nw;
                }
            }
            let mut nc = vec![0u64; c.len() + 1];
            for (s, entry) in nc.iter_mut().enumerate() {
                let lo = s.saturating_sub(i + 1);
                let mut acc = 0u64;
                for l in lo..=s.min(c.len() - 1) {
                    acc += t[s - l] * c[l];
                }
                *entry = acc % p;
            }
            c = nc;
        }
        let coeffs: Vec<Scalar> = c.into_iter().rev().map(|x| f.from_u64(x)).collect();
        Poly::from_coeffs(f, coeffs)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn scale_row(&mut self, i: usize, c: &Scalar) {
        let f = self.field.clone();
        for j in 0..self.cols {
            let v = f.mul(self.get(i, j), c);
            self.set(i, j, v);
        }
    }

    /// row_i -= factor * row_j.
    fn axpy_rows(&mut self, i: usize, j: usize, factor: &Scalar) {
        let f = self.field.clone();
        for c in 0..self.cols {
            let v = f.sub(self.get(i, c), &f.mul(factor, self.get(j, c)));
            self.set(i, c, v);
        }
    }
}

/// True when the polynomial is nonzero and every nonzero coefficient sits at
/// a degree that is a power of the field characteristic.
pub fn is_p_polynomial(f: &Poly) -> bool {
    if f.is_zero() {
        return false;
    }
    let p = f.field().characteristic() as usize;
    let mut powers = Vec::new();
    let mut q = 1usize;
    let deg = f.degree().unwrap();
    while q <= deg {
        powers.push(q);
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    f.coeffs()
        .iter()
        .enumerate()
        .all(|(i, c)| c.is_zero() || powers.contains(&i))
}

/// Subspace of F^ambient held as a canonical RREF basis.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    field: Field,
    ambient: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace(dim {} in F^{})", self.dim(), self.ambient)
    }
}

impl Subspace {
    pub fn zero(field: &Field, ambient: usize) -> Subspace {
        Subspace {
            field: field.clone(),
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: &Field, ambient: usize) -> Subspace {
        let mut rows = Vec::with_capacity(ambient);
        for i in 0..ambient {
            let mut v = vec![field.zero(); ambient];
            v[i] = field.one();
            rows.push(v);
        }
        Subspace {
            field: field.clone(),
            ambient,
            rows,
            pivots: (0..ambient).collect(),
        }
    }

    pub fn from_rows(field: &Field, ambient: usize, rows: Vec<Vec<Scalar>>) -> Subspace {
        let mut b = SpanBuilder::new(field, ambient);
        for row in rows {
            b.insert(row);
        }
        b.into_subspace()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis_rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residual of v after reduction by the basis; zero iff v is a member.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.ambient);
        let f = &self.field;
        let mut out = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if out[pc].is_zero() {
                continue;
            }
            let factor = out[pc].clone();
            for (o, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o = f.sub(o, &f.mul(&factor, r));
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch(self.ambient, other.ambient));
        }
        Ok(self.rows.iter().all(|r| other.contains(r)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch(self.ambient, other.ambient));
        }
        let mut b = SpanBuilder::new(&self.field, self.ambient);
        for r in self.rows.iter().chain(&other.rows) {
            b.insert(r.clone());
        }
        Ok(b.into_subspace())
    }

    /// Intersection via the kernel of the stacked relation system: a vector
    /// of coefficients (alpha, beta) with alpha * A = beta * B.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch(self.ambient, other.ambient));
        }
        let f = &self.field;
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return Ok(Subspace::zero(f, self.ambient));
        }
        let mut m = Matrix::zero(f, self.ambient, a + b);
        for (j, row) in self.rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        for (j, row) in other.rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                m.set(i, a + j, f.neg(v));
            }
        }
        let ker = m.kernel();
        let mut rows = Vec::new();
        for coeffs in ker.basis_rows() {
            let mut v = vec![f.zero(); self.ambient];
            for (alpha, row) in coeffs[..a].iter().zip(&self.rows) {
                if alpha.is_zero() {
                    continue;
                }
                for (o, r) in v.iter_mut().zip(row) {
                    *o = f.add(o, &f.mul(alpha, r));
                }
            }
            rows.push(v);
        }
        Ok(Subspace::from_rows(f, self.ambient, rows))
    }

    /// Canonical bases make equality structural.
    pub fn equals(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.rows == other.rows
    }

    /// Embeds every basis vector into an extension field.
    pub fn extended(&self, target: &Field) -> Result<Subspace, FieldError> {
        if *target == self.field {
            return Ok(self.clone());
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            rows.push(
                row.iter()
                    .map(|c| target.embed_prime(c))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        Ok(Subspace {
            field: target.clone(),
            ambient: self.ambient,
            rows,
            pivots: self.pivots.clone(),
        })
    }
}

/// Incremental RREF basis. Insertions keep the rows mutually reduced, so the
/// finished object is the canonical basis of the span.
pub struct SpanBuilder {
    field: Field,
    ambient: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl SpanBuilder {
    pub fn new(field: &Field, ambient: usize) -> SpanBuilder {
        SpanBuilder {
            field: field.clone(),
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce_in_place(&self, v: &mut [Scalar]) {
        let f = &self.field;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if v[pc].is_zero() {
                continue;
            }
            let factor = v[pc].clone();
            for (o, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o = f.sub(o, &f.mul(&factor, r));
                }
            }
        }
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let mut w = v.to_vec();
        self.reduce_in_place(&mut w);
        w.iter().all(Scalar::is_zero)
    }

    /// Adds a vector to the span. Returns true when the dimension grew.
    pub fn insert(&mut self, mut v: Vec<Scalar>) -> bool {
        assert_eq!(v.len(), self.ambient);
        let f = self.field.clone();
        self.reduce_in_place(&mut v);
        let Some(pc) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = f.inv(&v[pc]).unwrap();
        for c in v.iter_mut() {
            if !c.is_zero() {
                *c = f.mul(c, &inv);
            }
        }
        // Back-reduce the existing rows so the invariant is maintained.
        for row in self.rows.iter_mut() {
            if row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for (o, r) in row.iter_mut().zip(&v) {
                if !r.is_zero() {
                    *o = f.sub(o, &f.mul(&factor, r));
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(pc);
        true
    }

    pub fn into_subspace(self) -> Subspace {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivots[i]);
        let rows: Vec<Vec<Scalar>> = order.iter().map(|&i| self.rows[i].clone()).collect();
        let pivots: Vec<usize> = order.iter().map(|&i| self.pivots[i]).collect();
        Subspace {
            field: self.field,
            ambient: self.ambient,
            rows,
            pivots,
        }
    }
}

/// Row space over the prime field F_p, kept in echelon form on raw residues.
/// Mirrors SpanBuilder but avoids Scalar boxing in bracket-heavy inner loops.
pub(crate) struct FpSpan {
    p: u64,
    ambient: usize,
    /// pivot column -> row normalized to a unit pivot, zero left of the pivot
    rows: BTreeMap<usize, Vec<u64>>,
}

impl FpSpan {
    pub(crate) fn new(p: u64, ambient: usize) -> FpSpan {
        FpSpan {
            p,
            ambient,
            rows: BTreeMap::new(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the span; if independent, insert the normalized
    /// remainder and return true.
    pub(crate) fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let p = self.p;
        let mut col = 0;
        loop {
            while col < self.ambient && v[col] == 0 {
                col += 1;
            }
            if col == self.ambient {
                return false;
            }
            match self.rows.get(&col) {
                Some(row) => {
                    let mul = p - v[col];
                    for t in col..self.ambient {
                        v[t] = (v[t] + mul * row[t]) % p;
                    }
                }
                None => {
                    let inv = crate::field::u64_pow_mod(v[col], p - 2, p);
                    for t in col..self.ambient {
                        v[t] = v[t] * inv % p;
                    }
                    self.rows.insert(col, v);
                    return true;
                }
            }
        }
    }

    /// Canonical basis: back-reduce to reduced row echelon form and convert
    /// to scalar rows in pivot order.
    pub(crate) fn into_subspace(self, field: &Field) -> Subspace {
        let pivots: Vec<usize> = self.rows.keys().copied().collect();
        let mut rows = self.rows;
        for i in (0..pivots.len()).rev() {
            let lower = rows.get(&pivots[i]).unwrap().clone();
            for (&pj, row) in rows.iter_mut() {
                if pj >= pivots[i] {
                    break;
                }
                let c = row[pivots[i]];
                if c != 0 {
                    let mul = self.p - c;
                    for t in pivots[i]..self.ambient {
                        row[t] = (row[t] + mul * lower[t]) % self.p;
                    }
                }
            }
        }
        let scalar_rows: Vec<Vec<Scalar>> = rows
            .values()
            .map(|r| r.iter().map(|&c| field.from_u64(c)).collect())
            .collect();
        Subspace::from_rows(field, self.ambient, scalar_rows)
    }
}
