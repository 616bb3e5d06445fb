//! Text grammar for elements, used by the command-line driver and fixtures.
//!
//! ```text
//! poly     := term ('+' term)*
//! term     := scalar '*'? monomial | scalar | monomial
//! monomial := 'x[' int (',' int)* ']'
//! deriv    := dterm ('+' dterm)*
//! dterm    := term '*' 'd' int | 'd' int
//! scalar   := int | '[' tpoly ']'
//! ```
//!
//! `x[2,0]` denotes the divided power monomial with exponent vector (2,0);
//! the exponent list length must equal the number of variables. Integer
//! scalars are reduced mod p and may be negative. Extension field scalars are
//! written as t-polynomials in brackets, eg `[2+3t^2]`. Variables of a
//! derivation are 1-based: `d1` is the first partial. Each dterm carries a
//! single coefficient term, so `x[4]*d1 + d2` parses but parenthesised sums
//! do not exist in the grammar.

use thiserror::Error;

use crate::derivations::Deriv;
use crate::dpalgebra::{DPoly, Shape};
use crate::field::{Field, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent vector {found:?} does not fit the shape: expected {expected} entries within bounds")]
    BadExponent { found: Vec<u32>, expected: usize },
    #[error("variable index {0} is out of range 1..={1}")]
    BadVariable (usize, usize),
}

fn syntax(pos: usize, msg: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        pos,
        msg: msg.into(),
    }
}

/// Render a scalar: a bare integer over the prime field, a bracketed
/// t-polynomial over an extension.
pub fn format_scalar(field: &Field, a: &Scalar) -> String {
    if field.is_prime_field() {
        field.format_scalar(a)
    } else {
        format!("[{}]", field.format_scalar(a))
    }
}

/// Render a polynomial with terms in lexicographic monomial order. The zero
/// polynomial renders as `0`, constants as bare scalars, and unit
/// coefficients are dropped.
pub fn format_poly(f: &DPoly) -> String {
    let field = f.field();
    if f.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (alpha, c) in f.terms() {
        parts.push(format_term(field, c, alpha));
    }
    parts.join(" + ")
}

fn format_term(field: &Field, c: &Scalar, alpha: &[u32]) -> String {
    let mono = if alpha.iter().all(|&e| e == 0) {
        None
    } else {
        let digits: Vec<String> = alpha.iter().map(|e| e.to_string()).collect();
        Some(format!("x[{}]", digits.join(",")))
    };
    let one = field.one();
    match mono {
        None => format_scalar(field, c),
        Some(m) if *c == one => m,
        Some(m) => format!("{}*{}", format_scalar(field, c), m),
    }
}

/// Render a derivation as `+`-joined dterms, one per nonzero coefficient
/// term, in variable-major order. The zero derivation renders as `0`.
pub fn format_deriv(d: &Deriv) -> String {
    let field = d.field();
    let mut parts = Vec::new();
    for i in 0..d.shape().vars() {
        let f = d.coeff(i);
        for (alpha, c) in f.terms() {
            if alpha.iter().all(|&e| e == 0) && *c == field.one() {
                parts.push(format!("d{}", i + 1));
            } else {
                parts.push(format!("{}*d{}", format_term(field, c, alpha), i + 1));
            }
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Scanner<'a> {
        Scanner {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), GrammarError> {
        if self.eat(byte) {
            Ok(())
        } else {
            Err(syntax(self.pos, format!("expected '{}'", byte as char)))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    /// Unsigned decimal integer.
    fn uint(&mut self) -> Result<u64, GrammarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(syntax(start, "expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .map_err(|_| syntax(start, "integer out of range"))
    }

    /// Signed decimal integer.
    fn int(&mut self) -> Result<i64, GrammarError> {
        self.skip_ws();
        let neg = self.eat(b'-');
        let n = self.uint()?;
        if n > i64::MAX as u64 {
            return Err(syntax(self.pos, "integer out of range"));
        }
        Ok(if neg { -(n as i64) } else { n as i64 })
    }

    /// Bracketed t-polynomial: '[' tterm ('+' tterm)* ']' with
    /// tterm := int | int? 't' ('^' uint)?.
    fn bracket_scalar(&mut self, field: &Field) -> Result<Scalar, GrammarError> {
        self.expect(b'[')?;
        let mut acc = field.zero();
        loop {
            let c = match self.peek() {
                Some(b't') => 1,
                _ => self.int()?,
            };
            let e = if self.eat(b't') {
                if self.eat(b'^') {
                    self.uint()? as u32
                } else {
                    1
                }
            } else {
                0
            };
            if e >= field.degree() {
                return Err(syntax(self.pos, "t-power exceeds the field degree"));
            }
            let mut limbs = vec![0u64; field.degree() as usize];
            limbs[e as usize] = 1;
            let basis = field
                .from_limbs(&limbs)
                .map_err(|_| syntax(self.pos, "bad extension scalar"))?;
            acc = field.add(&acc, &field.mul(&field.from_i64(c), &basis));
            if !self.eat(b'+') {
                break;
            }
        }
        self.expect(b']')?;
        Ok(acc)
    }

    fn scalar(&mut self, field: &Field) -> Result<Scalar, GrammarError> {
        if self.peek() == Some(b'[') {
            self.bracket_scalar(field)
        } else {
            Ok(field.from_i64(self.int()?))
        }
    }

    fn monomial(&mut self, shape: &Shape) -> Result<Vec<u32>, GrammarError> {
        self.expect(b'x')?;
        self.expect(b'[')?;
        let mut alpha = Vec::new();
        loop {
            alpha.push(self.uint()? as u32);
            if !self.eat(b',') {
                break;
            }
        }
        self.expect(b']')?;
        if alpha.len() != shape.vars() || !shape.in_box(&alpha) {
            return Err(GrammarError::BadExponent {
                found: alpha,
                expected: shape.vars(),
            });
        }
        Ok(alpha)
    }

    /// One poly term: coefficient and exponent vector.
    fn term(&mut self, shape: &Shape, field: &Field) -> Result<(Scalar, Vec<u32>), GrammarError> {
        let next = self
            .peek()
            .ok_or_else(|| syntax(self.pos, "expected a term"))?;
        if next == b'x' {
            return Ok((field.one(), self.monomial(shape)?));
        }
        let c = self.scalar(field)?;
        // '*' binds the scalar to a following monomial; bare scalars are
        // constant terms.
        let save = self.pos;
        if self.eat(b'*') {
            if self.peek() == Some(b'x') {
                return Ok((c, self.monomial(shape)?));
            }
            self.pos = save;
            return Ok((c, vec![0; shape.vars()]));
        }
        if self.peek() == Some(b'x') {
            return Ok((c, self.monomial(shape)?));
        }
        Ok((c, vec![0; shape.vars()]))
    }
}

/// Parse a polynomial in the element grammar.
pub fn parse_poly(shape: &Shape, field: &Field, src: &str) -> Result<DPoly, GrammarError> {
    let mut sc = Scanner::new(src);
    let mut acc = DPoly::zero(shape, field);
    loop {
        let (c, alpha) = sc.term(shape, field)?;
        let mut t = DPoly::zero(shape, field);
        t.set_coeff(&alpha, c);
        acc = acc.add(&t);
        if !sc.eat(b'+') {
            break;
        }
    }
    if !sc.at_end() {
        return Err(syntax(sc.pos, "trailing input"));
    }
    Ok(acc)
}

/// Parse a derivation in the element grammar.
pub fn parse_deriv(shape: &Shape, field: &Field, src: &str) -> Result<Deriv, GrammarError> {
    let mut sc = Scanner::new(src);
    let mut acc = Deriv::zero(shape, field);
    // "0" stands for the zero derivation; it has no dterm form.
    {
        let save = sc.pos;
        if sc.eat(b'0') && sc.at_end() {
            return Ok(acc);
        }
        sc.pos = save;
    }
    loop {
        let (c, alpha, var) = dterm(&mut sc, shape, field)?;
        let mut f = DPoly::zero(shape, field);
        f.set_coeff(&alpha, c);
        let mut d = Deriv::zero(shape, field);
        d.set_coeff(var, f);
        acc = acc.add(&d);
        if !sc.eat(b'+') {
            break;
        }
    }
    if !sc.at_end() {
        return Err(syntax(sc.pos, "trailing input"));
    }
    Ok(acc)
}

fn dterm(
    sc: &mut Scanner<'_>,
    shape: &Shape,
    field: &Field,
) -> Result<(Scalar, Vec<u32>, usize), GrammarError> {
    let (c, alpha) = if sc.peek() == Some(b'd') {
        (field.one(), vec![0; shape.vars()])
    } else {
        let t = sc.term(shape, field)?;
        sc.expect(b'*')?;
        t
    };
    sc.expect(b'd')?;
    let var = sc.uint()? as usize;
    if var == 0 || var > shape.vars() {
        return Err(GrammarError::BadVariable(var, shape.vars()));
    }
    Ok((c, alpha, var - 1))
}
