//! Structural invariants of a single derivation: constants, centralisers,
//! regularity, and the eigenbasis normal form.
//!
//! The normal form applies to a derivation D over a prime field whose
//! constants ring is the scalar line. Its characteristic polynomial on the
//! underlying divided power algebra is then additive, say with lowest
//! nonzero coefficient at t^{p^r}, and over the splitting field its root
//! set Lambda is an additive group of order q / p^r, where q is the
//! dimension of the polynomial algebra. The decomposition produces
//!
//! * a chain z_1 = 1, D(z_k) = z_{k-1}, spanning ker D^{p^r} over the base;
//! * one eigenvector g_lambda per root, each eigenspace one dimensional,
//!   with g_0 = 1;
//! * the product basis z_k g_lambda, which is all of the algebra over the
//!   extension and on which D acts by D(z_k g) = z_{k-1} g + lambda z_k g.

use crate::cartan::Ambient;
use crate::dpalgebra::DPoly;
use crate::derivations::Deriv;
use crate::field::{Field, FieldError, Scalar};
use crate::linalg::{is_p_polynomial, Matrix, SpanBuilder, Subspace};
use crate::poly::{p_polynomial_roots, Poly};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("the analysis runs over a prime base field")]
    NonPrimeBase,
    #[error("constants ring has dimension {dim}, expected the scalar line")]
    NontrivialConstants { dim: usize },
    #[error("characteristic polynomial does not split within degree {tried_up_to}")]
    SplittingFieldTooSmall { tried_up_to: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Kernel of the derivation on the polynomial algebra, in monomial
/// coordinates. Always contains the scalar line.
pub fn constants_ring(d: &Deriv) -> Subspace {
    d.action_matrix().kernel()
}

/// Elements of a subspace commuting with a fixed vector.
pub fn centraliser(ambient: &Ambient, x: &[Scalar], within: &Subspace) -> Subspace {
    let f = ambient.field();
    let rows = within.basis_rows();
    if rows.is_empty() {
        return Subspace::zero(f, within.ambient());
    }
    let mut m = Matrix::zero(f, ambient.dim(), rows.len());
    for (j, y) in rows.iter().enumerate() {
        for (i, c) in ambient.bracket(x, y).into_iter().enumerate() {
            if !c.is_zero() {
                m.set(i, j, c);
            }
        }
    }
    let ker = m.kernel();
    let mut out = Vec::new();
    for coeffs in ker.basis_rows() {
        let mut v = vec![f.zero(); within.ambient()];
        for (c, row) in coeffs.iter().zip(rows) {
            if c.is_zero() {
                continue;
            }
            for (o, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o = f.add(o, &f.mul(c, r));
                }
            }
        }
        out.push(v);
    }
    Subspace::from_rows(f, within.ambient(), out)
}

/// Spectral type of the action on the polynomial algebra.
#[derive(Debug)]
pub enum Regularity {
    /// Characteristic polynomial t^q with a single Jordan block; the
    /// witness monomial generates the whole algebra under the action.
    RegularNilpotent { index: u32, cyclic_witness: DPoly },
    /// Squarefree characteristic polynomial, split over the reported
    /// extension.
    RegularSemisimple {
        eigenvalues: Vec<Scalar>,
        splitting_degree: u32,
    },
    Neither,
}

/// Classifies the action of a derivation over a prime field, searching
/// splitting fields up to the given extension degree.
pub fn regularity_classify(d: &Deriv, max_ext: u32) -> Result<Regularity, StructureError> {
    let f = d.field().clone();
    if !f.is_prime_field() {
        return Err(StructureError::NonPrimeBase);
    }
    let m = d.action_matrix();
    let q = m.rows();
    let chi = m.char_poly();
    let tq = Poly::monomial(&f, q, f.one());
    if chi == tq {
        // Nilpotent; regular means one Jordan block, so some coordinate
        // vector survives q - 1 applications.
        let pw = m.pow(q as u64 - 1);
        let shape = d.shape();
        for col in 0..q {
            if !pw.col(col).iter().all(Scalar::is_zero) {
                return Ok(Regularity::RegularNilpotent {
                    index: q as u32,
                    cyclic_witness: DPoly::monomial(shape, &f, &shape.mono_unrank(col)),
                });
            }
        }
        return Ok(Regularity::Neither);
    }
    let sep = chi.gcd(&chi.derivative()).degree() == Some(0);
    if !sep {
        return Ok(Regularity::Neither);
    }
    let Some(k) = chi.splitting_degree(max_ext) else {
        return Err(StructureError::SplittingFieldTooSmall {
            tried_up_to: max_ext,
        });
    };
    let ext = Field::with_bound(f.characteristic(), k, u64::MAX)?;
    let eigenvalues = if is_p_polynomial(&chi) {
        p_polynomial_roots(&chi, &ext)?
    } else {
        let (pairs, splits) = chi.roots(&ext)?;
        assert!(splits, "splitting degree certified a full factorisation");
        pairs.into_iter().map(|(root, _)| root).collect()
    };
    assert_eq!(eigenvalues.len(), q, "squarefree split polynomial has q roots");
    Ok(Regularity::RegularSemisimple {
        eigenvalues,
        splitting_degree: k,
    })
}

/// Eigenbasis normal form of a derivation with scalar constants.
#[derive(Debug)]
pub struct Decomposition {
    /// Characteristic polynomial on the polynomial algebra, over the base.
    pub chi: Poly,
    /// Every root of chi has multiplicity p^r.
    pub r: u32,
    /// Degree of the splitting field over the base.
    pub splitting_degree: u32,
    /// The splitting field.
    pub ext: Field,
    /// Root set of chi, an additive group of order q / p^r, sorted.
    pub lambda: Vec<Scalar>,
    /// Base field chain: chain[0] = 1 and D(chain[k]) = chain[k-1].
    pub chain: Vec<DPoly>,
    /// Eigenvector of each root, aligned with lambda, over ext.
    pub eigvecs: Vec<DPoly>,
    /// Whether D(z_k g) = z_{k-1} g + lambda z_k g held for every product.
    pub reconstruction_ok: bool,
}

/// Computes the eigenbasis normal form. Fails when the base field is not
/// prime, the constants ring is bigger than the scalars, or the splitting
/// field sits above the degree bound.
pub fn decompose_derivation(d: &Deriv, max_ext: u32) -> Result<Decomposition, StructureError> {
    let f = d.field().clone();
    if !f.is_prime_field() {
        return Err(StructureError::NonPrimeBase);
    }
    let shape = d.shape().clone();
    let p = f.characteristic();
    let constants = constants_ring(d);
    if constants.dim() != 1 {
        return Err(StructureError::NontrivialConstants {
            dim: constants.dim(),
        });
    }
    let m = d.action_matrix();
    let q = m.rows();
    let chi = m.char_poly();
    assert!(
        is_p_polynomial(&chi),
        "scalar constants force an additive characteristic polynomial"
    );
    // Lowest nonzero coefficient sits at t^{p^r}.
    let mut r = 0u32;
    let mut step = 1usize;
    while chi.coeff(step).is_zero() {
        step *= p as usize;
        r += 1;
    }
    let pr = (p as usize).pow(r);
    // Root group.
    let Some(k) = chi.splitting_degree(max_ext) else {
        return Err(StructureError::SplittingFieldTooSmall {
            tried_up_to: max_ext,
        });
    };
    let ext = if k == 1 {
        f.clone()
    } else {
        Field::with_bound(p, k, u64::MAX)?
    };
    let lambda = p_polynomial_roots(&chi, &ext)?;
    assert_eq!(lambda.len() * pr, q, "root group order times p^r is q");
    // Chain: iterated preimages of the constant 1 inside ker D^{p^r}.
    let kernel_big = m.pow(pr as u64).kernel();
    assert_eq!(kernel_big.dim(), pr, "ker D^{{p^r}} has dimension p^r");
    let one = DPoly::one(&shape, &f);
    let mut chain = vec![one.clone()];
    for _ in 1..pr {
        let prev = chain.last().unwrap().to_vec();
        let z = m
            .solve(&prev)
            .expect("the chain continues inside one Jordan block");
        chain.push(DPoly::from_vec(&shape, &f, &z));
    }
    for z in &chain {
        assert!(kernel_big.contains(&z.to_vec()));
    }
    // Eigenvectors over the extension, one line per root.
    let m_ext = m.extended(&ext)?;
    let d_ext = d.extended(&ext);
    let mut eigvecs = Vec::with_capacity(lambda.len());
    for lam in &lambda {
        let mut shifted = m_ext.clone();
        for i in 0..q {
            let v = ext.sub(shifted.get(i, i), lam);
            shifted.set(i, i, v);
        }
        let eig = shifted.kernel();
        assert_eq!(eig.dim(), 1, "eigenspaces of a regular action are lines");
        eigvecs.push(DPoly::from_vec(&shape, &ext, &eig.basis_rows()[0]));
    }
    if let Some(at_zero) = lambda.iter().position(Scalar::is_zero) {
        assert_eq!(eigvecs[at_zero], DPoly::one(&shape, &ext));
    }
    // Product basis and reconstruction.
    let mut span = SpanBuilder::new(&ext, q);
    let mut reconstruction_ok = true;
    for (lam, g) in lambda.iter().zip(&eigvecs) {
        for (ki, z) in chain.iter().enumerate() {
            let prod = z.extended(&ext).mul(g);
            span.insert(prod.to_vec());
            let image = d_ext.apply(&prod);
            let mut expect = prod.scale(lam);
            if ki > 0 {
                expect = expect.add(&chain[ki - 1].extended(&ext).mul(g));
            }
            if image != expect {
                reconstruction_ok = false;
            }
        }
    }
    assert_eq!(span.dim(), q, "products of chain and eigenvectors span");
    Ok(Decomposition {
        chi,
        r,
        splitting_degree: k,
        ext,
        lambda,
        chain,
        eigvecs,
        reconstruction_ok,
    })
}
