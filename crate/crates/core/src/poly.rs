//! Univariate polynomials over a [`Field`], exact throughout.
//!
//! Root finding is by exhaustive evaluation over the search field followed by
//! repeated division, so it is meant for enumerable fields. For additive
//! polynomials (every term of degree a power of p) the roots inside a large
//! extension are instead the kernel of an F_p-linear map, see
//! [`p_polynomial_roots`]; that route needs no enumeration at all.

use crate::field::{Field, FieldError, Scalar};
use crate::linalg::Matrix;

/// Little-endian coefficient vector without trailing zeros; the zero
/// polynomial has an empty vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    coeffs: Vec<Scalar>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.format())
    }
}

impl Poly {
    pub fn zero(field: &Field) -> Poly {
        Poly {
            field: field.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: &Field) -> Poly {
        Poly::constant(field, field.one())
    }

    pub fn constant(field: &Field, c: Scalar) -> Poly {
        let mut p = Poly::zero(field);
        if !c.is_zero() {
            p.coeffs.push(c);
        }
        p
    }

    /// The monomial c t^deg.
    pub fn monomial(field: &Field, deg: usize, c: Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(field);
        }
        let mut coeffs = vec![field.zero(); deg + 1];
        coeffs[deg] = c;
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_coeffs(field: &Field, mut coeffs: Vec<Scalar>) -> Poly {
        while coeffs.last().map_or(false, Scalar::is_zero) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().map_or(false, |c| *c == self.field.one())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.add(&self.coeff(i), &other.coeff(i)))
            .collect();
        Poly::from_coeffs(f, coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.sub(&self.coeff(i), &other.coeff(i)))
            .collect();
        Poly::from_coeffs(f, coeffs)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        let f = &self.field;
        Poly::from_coeffs(f, self.coeffs.iter().map(|x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Poly::zero(f);
        }
        let mut coeffs = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = f.add(&coeffs[i + j], &f.mul(a, b));
            }
        }
        Poly::from_coeffs(f, coeffs)
    }

    /// Quotient and remainder; the divisor must be nonzero.
    pub fn divrem(&self, divisor: &Poly) -> Result<(Poly, Poly), FieldError> {
        let f = &self.field;
        let d = divisor.degree().ok_or(FieldError::DivisionByZero)?;
        let lead_inv = f.inv(divisor.leading().unwrap())?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![f.zero(); self.coeffs.len().saturating_sub(d)];
        while rem.len() > d {
            let lead = rem.last().unwrap().clone();
            let pos = rem.len() - 1 - d;
            if !lead.is_zero() {
                let q = f.mul(&lead, &lead_inv);
                for i in 0..d {
                    let s = f.mul(&q, &divisor.coeffs[i]);
                    rem[pos + i] = f.sub(&rem[pos + i], &s);
                }
                quot[pos] = q;
            }
            rem.pop();
        }
        Ok((Poly::from_coeffs(f, quot), Poly::from_coeffs(f, rem)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let f = &self.field;
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).unwrap();
            a = b;
            b = r;
        }
        match a.leading() {
            None => a,
            Some(lead) => {
                let inv = f.inv(lead).unwrap();
                a.scale(&inv)
            }
        }
    }

    pub fn derivative(&self) -> Poly {
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| f.mul(&f.from_u64(i as u64), c))
            .collect();
        Poly::from_coeffs(f, coeffs)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let f = &self.field;
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    /// self^e reduced mod a monic modulus.
    pub fn pow_mod(&self, mut e: u64, modulus: &Poly) -> Poly {
        let f = &self.field;
        let mut base = self.divrem(modulus).unwrap().1;
        let mut acc = Poly::one(f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).divrem(modulus).unwrap().1;
            }
            base = base.mul(&base).divrem(modulus).unwrap().1;
            e >>= 1;
        }
        acc
    }

    /// Re-coefficients the polynomial into `target`, which must either be the
    /// same field or an extension of a prime field of the same characteristic.
    pub fn embed_into(&self, target: &Field) -> Result<Poly, FieldError> {
        if *target == self.field {
            return Ok(self.clone());
        }
        if !self.field.is_prime_field()
            || self.field.characteristic() != target.characteristic()
        {
            return Err(FieldError::FieldMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| target.embed_prime(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Poly::from_coeffs(target, coeffs))
    }

    /// Smallest k <= max_k such that every root lies in F_{p^k}, decided by
    /// the divisibility f | (t^{p^k} - t)^{deg f} without any factoring.
    pub fn splitting_degree(&self, max_k: u32) -> Option<u32> {
        let f = &self.field;
        let p = f.characteristic();
        let deg = self.degree()?;
        if deg == 0 {
            return Some(1);
        }
        let t = Poly::monomial(f, 1, f.one());
        let mut frob = t.clone();
        for k in 1..=max_k {
            frob = frob.pow_mod(p, self);
            let diff = frob.sub(&t);
            if diff
                .pow_mod(deg as u64, self)
                .is_zero()
            {
                return Some(k);
            }
        }
        None
    }

    /// All roots in `search`, with multiplicities, by exhaustive evaluation
    /// followed by repeated division. Also reports whether the polynomial
    /// splits completely over `search`.
    pub fn roots(&self, search: &Field) -> Result<(Vec<(Scalar, u32)>, bool), FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroPolynomial);
        }
        let f = self.embed_into(search)?;
        let deg = f.degree().unwrap();
        let mut out = Vec::new();
        let mut total = 0u32;
        for c in search.enumerate() {
            if !f.eval(&c).is_zero() {
                continue;
            }
            // Multiplicity by repeated division by (t - c).
            let linear = Poly::from_coeffs(search, vec![search.neg(&c), search.one()]);
            let mut mult = 0u32;
            let mut rest = f.clone();
            loop {
                let (q, r) = rest.divrem(&linear).unwrap();
                if !r.is_zero() {
                    break;
                }
                mult += 1;
                rest = q;
            }
            total += mult;
            out.push((c, mult));
        }
        Ok((out, total as usize == deg))
    }

    /// Descending-power display, for diagnostics.
    pub fn format(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let f = &self.field;
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = f.format_scalar(c);
            let part = match i {
                0 => cs,
                1 if cs == "1" => "t".to_string(),
                1 => format!("{cs}*t"),
                _ if cs == "1" => format!("t^{i}"),
                _ => format!("{cs}*t^{i}"),
            };
            parts.push(part);
        }
        parts.join(" + ")
    }
}

/// Distinct roots of an additive polynomial inside `ext`.
///
/// The polynomial must be over the prime field with every term of degree a
/// power of p. Evaluation x -> sum c_i x^(p^i) is then F_p-linear on `ext`,
/// so its kernel is computed from the Frobenius matrix in the power basis and
/// every claimed root is re-verified by direct evaluation. The root set of
/// such a polynomial is closed under addition, and the kernel construction
/// returns it in full without enumerating the field.
pub fn p_polynomial_roots(f: &Poly, ext: &Field) -> Result<Vec<Scalar>, FieldError> {
    if f.is_zero() {
        return Err(FieldError::ZeroPolynomial);
    }
    let base = f.field();
    if !base.is_prime_field() || base.characteristic() != ext.characteristic() {
        return Err(FieldError::FieldMismatch);
    }
    let p = ext.characteristic();
    let k = ext.degree() as usize;
    let fp = Field::new(p, 1)?;

    // Frobenius matrix over F_p in the basis 1, t, ..., t^(k-1).
    let mut frob = Matrix::zero(&fp, k, k);
    for j in 0..k {
        let mut basis = vec![0u64; k];
        basis[j] = 1;
        let bj = ext.from_limbs(&basis)?;
        let image = ext.frobenius(&bj);
        for (i, &limb) in image.limbs().iter().enumerate() {
            frob.set(i, j, fp.from_u64(limb));
        }
    }

    // M = sum over terms c_i Frob^i, indices read off the p-power ladder.
    let deg = f.degree().unwrap();
    let mut m = Matrix::zero(&fp, k, k);
    let mut power = Matrix::identity(&fp, k);
    let mut ladder = 1usize;
    let mut exp = 0u32;
    loop {
        let c = f.coeff(ladder);
        if !c.is_zero() {
            m = m.add(&power.scale(&c));
        }
        if ladder >= deg {
            break;
        }
        ladder = ladder
            .checked_mul(p as usize)
            .ok_or(FieldError::ZeroPolynomial)?;
        exp += 1;
        if exp > 64 {
            break;
        }
        power = power.mul(&frob);
    }

    let kernel = m.kernel();
    let nullity = kernel.dim();
    // Kernel dimensions stay tiny for the polynomials this is used on.
    assert!(
        nullity <= 24,
        "additive kernel of dimension {nullity} is too large to expand"
    );
    let mut roots = Vec::new();
    let mut counter = vec![0u64; nullity];
    loop {
        let mut limbs = vec![0u64; k];
        for (c, row) in counter.iter().zip(kernel.basis_rows()) {
            for (limb, entry) in limbs.iter_mut().zip(row) {
                *limb = (*limb + c * entry.residue()) % p;
            }
        }
        let root = ext.from_limbs(&limbs)?;
        assert!(
            f.embed_into(ext)?.eval(&root).is_zero(),
            "kernel vector failed direct evaluation"
        );
        roots.push(root);
        // Odometer over F_p^nullity.
        let mut i = 0;
        loop {
            if i == nullity {
                roots.sort_by(|a, b| a.limbs().cmp(b.limbs()));
                return Ok(roots);
            }
            counter[i] += 1;
            if counter[i] < p {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}
