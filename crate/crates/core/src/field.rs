//! Prime and prime-power finite fields with exact arithmetic.
//!
//! A [`Field`] is F_p for a prime p > 3, or its degree-k extension
//! F_p[t]/(f). The modulus f is chosen deterministically: monic candidates
//! t^k + c_{k-1} t^{k-1} + ... + c_0 are ordered by the integer value
//! sum c_i p^i (leading coefficients most significant) and the first
//! irreducible one is taken. Irreducibility is decided by the standard
//! Frobenius power test: t^(p^k) = t mod f together with
//! gcd(t^(p^(k/q)) - t, f) = 1 for every prime divisor q of k.
//!
//! Scalars are little-endian coefficient vectors of fixed length k with
//! entries below p, so structural equality is field equality. All operations
//! go through the owning [`Field`], which holds the modulus.

use smallvec::{smallvec, SmallVec};
use std::sync::Arc;
use thiserror::Error;

/// Default ceiling for p^k accepted by [`Field::new`].
///
/// Fields above this size still work arithmetically through
/// [`Field::with_bound`], but exhaustive enumeration of their elements is no
/// longer reasonable and root finding must use structure instead of scans.
pub const DEFAULT_FIELD_BOUND: u64 = 1 << 20;

/// Hard ceiling on the extension degree regardless of the configured bound.
pub const MAX_EXTENSION_DEGREE: u32 = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is too small, this construction needs p > 3")]
    CharTooSmall(u64),
    #[error("field size {p}^{k} exceeds the bound {bound}")]
    BoundExceeded { p: u64, k: u32, bound: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("scalar does not belong to this field")]
    FieldMismatch,
    #[error("the zero polynomial does not have a root multiset")]
    ZeroPolynomial,
}

/// Element of a [`Field`]: exactly `k` residues below `p`, little-endian in
/// the generator `t`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    limbs: SmallVec<[u64; 2]>,
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&c| c == 0)
    }

    /// Coefficient vector, little-endian, length equal to the field degree.
    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// The residue of a prime-field scalar.
    ///
    /// Panics when the scalar has extension limbs.
    pub fn residue(&self) -> u64 {
        assert_eq!(self.limbs.len(), 1, "residue() is for prime-field scalars");
        self.limbs[0]
    }
}

impl std::fmt::Debug for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.limbs.len() == 1 {
            write!(f, "{}", self.limbs[0])
        } else {
            write!(f, "{:?}", self.limbs)
        }
    }
}

#[derive(Debug)]
struct FieldData {
    p: u64,
    k: u32,
    /// Monic modulus, little-endian, length k+1. Empty for k = 1.
    modulus: Vec<u64>,
}

/// A finite field F_{p^k}, cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus
    }
}

impl Eq for Field {}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.k == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{}", self.0.p, self.0.k)
        }
    }
}

/// Binary operations accepted by [`Field::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Field {
    /// Builds F_{p^k} with the default size bound.
    pub fn new(p: u64, k: u32) -> Result<Field, FieldError> {
        Field::with_bound(p, k, DEFAULT_FIELD_BOUND)
    }

    /// Builds F_{p^k} subject to an explicit ceiling on p^k.
    ///
    /// The characteristic itself must stay below the default bound; only the
    /// degree is allowed to grow past it.
    pub fn with_bound(p: u64, k: u32, bound: u64) -> Result<Field, FieldError> {
        if p <= 3 {
            return Err(FieldError::CharTooSmall(p));
        }
        if p > DEFAULT_FIELD_BOUND || !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 || k > MAX_EXTENSION_DEGREE {
            return Err(FieldError::BoundExceeded { p, k, bound });
        }
        match p.checked_pow(k) {
            Some(size) if size <= bound => {}
            _ => return Err(FieldError::BoundExceeded { p, k, bound }),
        }
        let modulus = if k == 1 {
            Vec::new()
        } else {
            smallest_irreducible(p, k)
        };
        Ok(Field(Arc::new(FieldData { p, k, modulus })))
    }

    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.k
    }

    /// Number of elements; degrees are capped so this never overflows.
    pub fn size(&self) -> u64 {
        self.0.p.pow(self.0.k)
    }

    /// Modulus coefficients, little-endian, monic of degree k. Empty when k = 1.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.k == 1
    }

    pub fn zero(&self) -> Scalar {
        Scalar {
            limbs: smallvec![0; self.0.k as usize],
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_u64(1)
    }

    /// The generator t of the extension. For k = 1 this is just 1.
    pub fn generator(&self) -> Scalar {
        if self.0.k == 1 {
            return self.one();
        }
        let mut s = self.zero();
        s.limbs[1] = 1;
        s
    }

    pub fn from_u64(&self, n: u64) -> Scalar {
        let mut s = self.zero();
        s.limbs[0] = n % self.0.p;
        s
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        let p = self.0.p as i64;
        self.from_u64(n.rem_euclid(p) as u64)
    }

    /// Scalar from explicit limbs; entries are reduced mod p, length must be k.
    pub fn from_limbs(&self, limbs: &[u64]) -> Result<Scalar, FieldError> {
        if limbs.len() != self.0.k as usize {
            return Err(FieldError::FieldMismatch);
        }
        Ok(Scalar {
            limbs: limbs.iter().map(|&c| c % self.0.p).collect(),
        })
    }

    /// Embeds a prime-field scalar into this field (same characteristic).
    pub fn embed_prime(&self, a: &Scalar) -> Result<Scalar, FieldError> {
        if a.limbs.len() != 1 || a.limbs[0] >= self.0.p {
            return Err(FieldError::FieldMismatch);
        }
        let mut s = self.zero();
        s.limbs[0] = a.limbs[0];
        Ok(s)
    }

    fn check(&self, a: &Scalar) -> Result<(), FieldError> {
        if a.limbs.len() != self.0.k as usize || a.limbs.iter().any(|&c| c >= self.0.p) {
            return Err(FieldError::FieldMismatch);
        }
        Ok(())
    }

    /// Checked entry point for the four binary operations.
    pub fn arith(&self, a: &Scalar, b: &Scalar, op: FieldOp) -> Result<Scalar, FieldError> {
        self.check(a)?;
        self.check(b)?;
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Div => self.div(a, b),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let p = self.0.p;
        Scalar {
            limbs: a
                .limbs
                .iter()
                .zip(&b.limbs)
                .map(|(&x, &y)| (x + y) % p)
                .collect(),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let p = self.0.p;
        Scalar {
            limbs: a
                .limbs
                .iter()
                .zip(&b.limbs)
                .map(|(&x, &y)| (x + p - y) % p)
                .collect(),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        let p = self.0.p;
        Scalar {
            limbs: a.limbs.iter().map(|&x| (p - x) % p).collect(),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let p = self.0.p;
        if self.0.k == 1 {
            return Scalar {
                limbs: smallvec![(a.limbs[0] * b.limbs[0]) % p],
            };
        }
        // Schoolbook product then reduction by the monic modulus. Entries stay
        // below p < 2^20 and k <= 64, so accumulators fit in u64.
        let k = self.0.k as usize;
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in a.limbs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.limbs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        self.reduce_in_place(&mut prod);
        Scalar {
            limbs: prod.into_iter().take(k).collect(),
        }
    }

    /// Reduces a little-endian coefficient vector by the monic modulus.
    fn reduce_in_place(&self, v: &mut Vec<u64>) {
        let p = self.0.p;
        let k = self.0.k as usize;
        let m = &self.0.modulus;
        while v.len() > k {
            let lead = v.pop().unwrap();
            if lead == 0 {
                continue;
            }
            let shift = v.len() - k;
            for i in 0..k {
                let sub = (lead * m[i]) % p;
                v[shift + i] = (v[shift + i] + p - sub) % p;
            }
        }
        while v.len() < k {
            v.push(0);
        }
    }

    pub fn inv(&self, a: &Scalar) -> Result<Scalar, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.0.k == 1 {
            return Ok(Scalar {
                limbs: smallvec![u64_pow_mod(a.limbs[0], self.0.p - 2, self.0.p)],
            });
        }
        Ok(self.pow(a, self.size() - 2))
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// The p-power map, a field automorphism fixing the prime subfield.
    pub fn frobenius(&self, a: &Scalar) -> Scalar {
        self.pow(a, self.0.p)
    }

    /// All field elements in counting order of their limb words.
    pub fn enumerate(&self) -> impl Iterator<Item = Scalar> + '_ {
        let size = self.size();
        let p = self.0.p;
        let k = self.0.k as usize;
        (0..size).map(move |mut n| {
            let mut limbs = smallvec![0u64; k];
            for limb in limbs.iter_mut() {
                *limb = n % p;
                n /= p;
            }
            Scalar { limbs }
        })
    }

    /// Uniform scalar from the given generator. The tiny modulo bias of
    /// reducing a 64-bit word is irrelevant at the field sizes in use.
    pub fn sample<R: rand_core::RngCore>(&self, rng: &mut R) -> Scalar {
        let p = self.0.p;
        Scalar {
            limbs: (0..self.0.k).map(|_| rng.next_u64() % p).collect(),
        }
    }

    /// Canonical text form: a residue for k = 1, a t-polynomial otherwise.
    pub fn format_scalar(&self, a: &Scalar) -> String {
        if self.0.k == 1 {
            return a.limbs[0].to_string();
        }
        let mut parts = Vec::new();
        for (i, &c) in a.limbs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let part = match i {
                0 => c.to_string(),
                1 if c == 1 => "t".to_string(),
                1 => format!("{c}t"),
                _ if c == 1 => format!("t^{i}"),
                _ => format!("{c}t^{i}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }
}

pub(crate) fn u64_pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    a %= m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    acc
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

// Internal F_p[t] helpers on little-endian u64 coefficient vectors. These
// back modulus selection and stay independent of the public Poly type.

fn fpp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fpp_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    // m is monic.
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = a.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = a.len() - dm;
        for i in 0..dm {
            let sub = (lead * m[i]) % p;
            a[shift + i] = (a[shift + i] + p - sub) % p;
        }
    }
    fpp_trim(&mut a);
    a
}

fn fpp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    fpp_rem(prod, m, p)
}

fn fpp_powmod(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut base = fpp_rem(a.to_vec(), m, p);
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = fpp_mulmod(&acc, &base, m, p);
        }
        base = fpp_mulmod(&base, &base, m, p);
        e >>= 1;
    }
    acc
}

fn fpp_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    fpp_trim(&mut a);
    fpp_trim(&mut b);
    while !b.is_empty() {
        // Scale b monic before taking the remainder.
        let lead_inv = u64_pow_mod(*b.last().unwrap(), p - 2, p);
        let monic: Vec<u64> = b.iter().map(|&c| c * lead_inv % p).collect();
        let r = fpp_rem(a, &monic, p);
        a = b;
        b = r;
    }
    a
}

fn prime_divisors(mut k: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= k {
        if k % d == 0 {
            out.push(d);
            while k % d == 0 {
                k /= d;
            }
        }
        d += 1;
    }
    if k > 1 {
        out.push(k);
    }
    out
}

/// Frobenius power irreducibility test for a monic degree-k polynomial.
fn is_irreducible_monic(f: &[u64], p: u64) -> bool {
    let k = (f.len() - 1) as u32;
    if k == 1 {
        return true;
    }
    // powers[j] = t^(p^(j+1)) mod f, for j+1 = 1..=k.
    let t = vec![0u64, 1];
    let mut powers = Vec::with_capacity(k as usize);
    let mut cur = t.clone();
    for _ in 0..k {
        cur = fpp_powmod(&cur, p, f, p);
        powers.push(cur.clone());
    }
    if powers[k as usize - 1] != t {
        return false;
    }
    for q in prime_divisors(k) {
        let j = k / q;
        let mut diff = powers[j as usize - 1].clone();
        while diff.len() < 2 {
            diff.push(0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        fpp_trim(&mut diff);
        let g = fpp_gcd(f.to_vec(), diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// First irreducible monic polynomial of degree k in coefficient-word order.
fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    let mut counter = 0u64;
    loop {
        counter += 1;
        // Candidates with zero constant term are divisible by t.
        if counter % p == 0 {
            continue;
        }
        let mut f = vec![0u64; k + 1];
        f[k] = 1;
        let mut n = counter;
        for coeff in f.iter_mut().take(k) {
            *coeff = n % p;
            n /= p;
        }
        if is_irreducible_monic(&f, p) {
            return f;
        }
    }
}
