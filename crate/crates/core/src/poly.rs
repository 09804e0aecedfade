//! Sparse multivariate polynomials over the base field.
//!
//! Terms are stored in a `BTreeMap` keyed by exponent tuples under graded
//! lexicographic order, so every polynomial has exactly one representation
//! and printing is canonical: largest term first, variables in ascending
//! index order inside a monomial. The text grammar accepted by
//! [`Poly::parse`] is
//!
//! ```text
//! expr   := [-] term (('+'|'-') term)*
//! term   := coeff ('*' power)* | power ('*' power)*
//! power  := x<k> ['^' <e>]
//! coeff  := int | int '/' int
//! ```
//!
//! with insignificant whitespace and variables `x1 ..= xn` fixed by the
//! caller.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;


use crate::error::Error;
use crate::field::{FieldSpec, Scalar};
use crate::linmat::ConstMatrix;

/// Exponent tuple under graded lexicographic order (total degree first,
/// then lexicographic with `x1` heaviest).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.checked_add(*b).expect("exponent overflow"))
                .collect(),
        )
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse multivariate polynomial. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    field: FieldSpec,
    nvars: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(field: FieldSpec, nvars: usize) -> Self {
        Poly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: FieldSpec, nvars: usize, c: Scalar) -> Self {
        let mut p = Poly::zero(field, nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(field: FieldSpec, nvars: usize) -> Self {
        Poly::constant(field, nvars, field.one())
    }

    pub fn var(field: FieldSpec, nvars: usize, i: usize) -> Self {
        let mut p = Poly::zero(field, nvars);
        p.add_term(Monomial::var(nvars, i), field.one());
        p
    }

    pub fn from_terms(
        field: FieldSpec,
        nvars: usize,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Self {
        let mut p = Poly::zero(field, nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(|m| m.total_degree())
    }

    pub fn degree_at_most(&self, d: usize) -> bool {
        self.total_degree().is_none_or(|deg| deg <= d)
    }

    /// Homogeneous of degree 1 (the zero polynomial does not qualify).
    pub fn is_linear_form(&self) -> bool {
        !self.is_zero() && self.terms.keys().all(|m| m.total_degree() == 1)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.total_degree() {
            None => true,
            Some(d) => self.terms.keys().all(|m| m.total_degree() == d),
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn constant_coeff(&self) -> Scalar {
        self.coefficient(&Monomial::one(self.nvars))
    }

    pub fn linear_coeff(&self, i: usize) -> Scalar {
        self.coefficient(&Monomial::var(self.nvars, i))
    }

    /// The terms of maximal total degree, as a polynomial.
    pub fn leading_homogeneous_part(&self) -> Poly {
        match self.total_degree() {
            None => self.clone(),
            Some(d) => Poly::from_terms(
                self.field,
                self.nvars,
                self.terms
                    .iter()
                    .filter(|(m, _)| m.total_degree() == d)
                    .map(|(m, c)| (m.clone(), c.clone())),
            ),
        }
    }

    /// The terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: usize) -> Poly {
        Poly::from_terms(
            self.field,
            self.nvars,
            self.terms
                .iter()
                .filter(|(m, _)| m.total_degree() == d)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        assert_eq!(m.0.len(), self.nvars, "exponent arity mismatch");
        assert_eq!(c.field(), self.field, "coefficient field mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Poly) {
        assert_eq!(self.field, other.field, "polynomial field mismatch");
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_compatible(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            field: self.field,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_compatible(other);
        let mut out = Poly::zero(self.field, self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        assert_eq!(c.field(), self.field);
        if c.is_zero() {
            return Poly::zero(self.field, self.nvars);
        }
        Poly {
            field: self.field,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.mul(c)))
                .collect(),
        }
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut out = Poly::one(self.field, self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative with respect to `x_{i+1}` (0-based index).
    /// The exponent is folded into the field, so e.g. d/dx1 of x1^2 vanishes
    /// in characteristic 2.
    pub fn partial_derivative(&self, i: usize) -> Poly {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = Poly::zero(self.field, self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let factor = Scalar::from_int(self.field, e as i64);
            let mut exp = m.0.clone();
            exp[i] -= 1;
            out.add_term(Monomial(exp), c.mul(&factor));
        }
        out
    }

    /// Substitute `vals[i]` for `x_{i+1}`. All values must live in one ring,
    /// which becomes the ring of the result.
    pub fn substitute(&self, vals: &[Poly]) -> Poly {
        assert_eq!(vals.len(), self.nvars, "substitution arity mismatch");
        let (tf, tn) = vals
            .first()
            .map(|v| (v.field, v.nvars))
            .unwrap_or((self.field, 0));
        let mut out = Poly::zero(tf, tn);
        // memoized powers per variable
        let mut powers: Vec<Vec<Poly>> = vals.iter().map(|v| vec![Poly::one(tf, tn), v.clone()]) .collect();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(tf, tn, convert_scalar(c, tf));
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&vals[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitute `x := Ax + c` for an invertible constant matrix `A`.
    pub fn substitute_affine(&self, a: &ConstMatrix, c: &[Scalar]) -> Result<Poly, Error> {
        assert_eq!(a.rows(), self.nvars);
        assert_eq!(a.cols(), self.nvars);
        assert_eq!(c.len(), self.nvars);
        if a.invert().is_err() {
            return Err(Error::SingularSubstitution);
        }
        let vals: Vec<Poly> = (0..self.nvars)
            .map(|i| {
                let mut v = Poly::constant(self.field, self.nvars, c[i].clone());
                for j in 0..self.nvars {
                    let coeff = a.get(i, j);
                    if !coeff.is_zero() {
                        v = v.add(&Poly::var(self.field, self.nvars, j).scale(coeff));
                    }
                }
                v
            })
            .collect();
        Ok(self.substitute(&vals))
    }

    /// Reinterpret in a ring with more variables (exponents padded with 0).
    pub fn extend_vars(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        Poly {
            field: self.field,
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e.resize(nvars, 0);
                    (Monomial(e), c.clone())
                })
                .collect(),
        }
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        self.check_compatible(divisor);
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.field, self.nvars);
        let (dm, dc) = divisor.terms.iter().next_back().unwrap();
        let dc_inv = dc.inv().expect("nonzero leading coefficient");
        while !rem.is_zero() {
            let (rm, rc) = rem.terms.iter().next_back().unwrap();
            let mut e = Vec::with_capacity(self.nvars);
            for (a, b) in rm.0.iter().zip(&dm.0) {
                if a < b {
                    return None;
                }
                e.push(a - b);
            }
            let qm = Monomial(e);
            let qc = rc.mul(&dc_inv);
            let mut t = Poly::zero(self.field, self.nvars);
            t.add_term(qm.clone(), qc.clone());
            rem = rem.sub(&t.mul(divisor));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// `Some(lambda)` with `self == lambda * other` for a constant `lambda`;
    /// requires `other` nonzero.
    pub fn const_ratio_to(&self, other: &Poly) -> Option<Scalar> {
        assert!(!other.is_zero());
        if self.is_zero() {
            return Some(self.field.zero());
        }
        let (m, c) = other.terms.iter().next_back().unwrap();
        let lambda = self.coefficient(m).div(c).ok()?;
        if self == &other.scale(&lambda) {
            Some(lambda)
        } else {
            None
        }
    }

    pub fn parse(text: &str, field: FieldSpec, nvars: usize) -> Result<Poly, Error> {
        Parser::new(text, field, nvars).parse()
    }
}

fn convert_scalar(c: &Scalar, target: FieldSpec) -> Scalar {
    assert_eq!(c.field(), target, "scalar belongs to a different field");
    c.clone()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let (neg, mag) = if c.is_negative() {
                (true, c.neg())
            } else {
                (false, c.clone())
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = format_monomial(m);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

fn format_monomial(m: &Monomial) -> String {
    let mut parts = vec![];
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    field: FieldSpec,
    nvars: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, field: FieldSpec, nvars: usize) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            field,
            nvars,
        }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::SyntaxError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Poly, Error> {
        let mut out = Poly::zero(self.field, self.nvars);
        let mut sign_negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            Some(_) => false,
            None => return Err(self.error("empty polynomial")),
        };
        loop {
            let (m, c) = self.term()?;
            let c = if sign_negative { c.neg() } else { c };
            out.add_term(m, c);
            match self.peek() {
                None => return Ok(out),
                Some(b'+') => {
                    self.pos += 1;
                    sign_negative = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign_negative = true;
                }
                Some(ch) => return Err(self.error(format!("unexpected `{}`", ch as char))),
            }
        }
    }

    fn term(&mut self) -> Result<(Monomial, Scalar), Error> {
        let mut coeff = self.field.one();
        let mut exps = vec![0u16; self.nvars];
        let mut saw_factor = false;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                coeff = self.coefficient()?;
                saw_factor = true;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    self.powers(&mut exps)?;
                }
            }
            Some(b'x') => {
                self.powers(&mut exps)?;
                saw_factor = true;
            }
            _ => {}
        }
        if !saw_factor {
            return Err(self.error("expected a term"));
        }
        Ok((Monomial(exps), coeff))
    }

    fn powers(&mut self, exps: &mut [u16]) -> Result<(), Error> {
        loop {
            self.power(exps)?;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                return Ok(());
            }
        }
    }

    fn power(&mut self, exps: &mut [u16]) -> Result<(), Error> {
        if self.peek() != Some(b'x') {
            return Err(self.error("expected a variable"));
        }
        self.pos += 1;
        let idx: usize = self
            .integer_literal()?
            .parse()
            .map_err(|_| self.error("bad variable index"))?;
        if idx == 0 || idx > self.nvars {
            return Err(Error::UnknownVariable(idx));
        }
        let mut e: u16 = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            e = self
                .integer_literal()?
                .parse()
                .map_err(|_| self.error("exponent too large"))?;
        }
        exps[idx - 1] = exps[idx - 1]
            .checked_add(e)
            .ok_or_else(|| self.error("exponent too large"))?;
        Ok(())
    }

    fn coefficient(&mut self) -> Result<Scalar, Error> {
        let num: BigInt = self
            .integer_literal()?
            .parse()
            .map_err(|_| self.error("bad integer"))?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den: BigInt = self
                .integer_literal()?
                .parse()
                .map_err(|_| self.error("bad integer"))?;
            Scalar::from_fraction(self.field, &num, &den)
        } else {
            Ok(Scalar::from_bigint(self.field, &num))
        }
    }

    fn integer_literal(&mut self) -> Result<String, Error> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    fn parse(s: &str, field: FieldSpec, nvars: usize) -> Poly {
        Poly::parse(s, field, nvars).unwrap()
    }

    #[test]
    fn product_of_conjugates() {
        let q = FieldSpec::Rationals;
        let p = parse("x1 + 1", q, 1).mul(&parse("x1 - 1", q, 1));
        assert_eq!(p, parse("x1^2 - 1", q, 1));
    }

    #[test]
    fn square_in_characteristic_two_kills_cross_term() {
        let f = gf(2);
        let p = parse("x1 + x2", f, 2);
        assert_eq!(p.mul(&p), parse("x1^2 + x2^2", f, 2));
    }

    #[test]
    fn scaling_over_gf5() {
        let f = gf(5);
        let p = parse("x2*x3", f, 3).scale(&Scalar::from_int(f, 2));
        assert_eq!(p, parse("2*x2*x3", f, 3));
    }

    #[test]
    fn derivative_of_square_vanishes_in_characteristic_two() {
        let f = gf(2);
        assert!(parse("x1^2", f, 1).partial_derivative(0).is_zero());
    }

    #[test]
    fn derivative_of_product() {
        let q = FieldSpec::Rationals;
        assert_eq!(
            parse("x1*x2", q, 2).partial_derivative(0),
            parse("x2", q, 2)
        );
        assert_eq!(
            parse("x1*x2*x3", q, 3).partial_derivative(2),
            parse("x1*x2", q, 3)
        );
    }

    #[test]
    fn shift_substitution() {
        let q = FieldSpec::Rationals;
        let a = ConstMatrix::identity(q, 1);
        let c = vec![q.one()];
        let shifted = parse("x1^2", q, 1).substitute_affine(&a, &c).unwrap();
        assert_eq!(shifted, parse("x1^2 + 2*x1 + 1", q, 1));
    }

    #[test]
    fn identity_substitution_is_identity() {
        let q = FieldSpec::Rationals;
        let p = parse("x1^2 - 1/3*x1*x2 + 7", q, 2);
        let a = ConstMatrix::identity(q, 2);
        let c = vec![q.zero(), q.zero()];
        assert_eq!(p.substitute_affine(&a, &c).unwrap(), p);
    }

    // Hand oracle: (x1+1)^2 = x1^2 + 1 over GF(2).
    #[test]
    fn shift_substitution_characteristic_two() {
        let f = gf(2);
        let a = ConstMatrix::identity(f, 1);
        let shifted = parse("x1^2", f, 1)
            .substitute_affine(&a, &[f.one()])
            .unwrap();
        assert_eq!(shifted, parse("x1^2 + 1", f, 1));
    }

    #[test]
    fn singular_substitution_is_rejected() {
        let q = FieldSpec::Rationals;
        let a = ConstMatrix::zeros(q, 2, 2);
        let r = parse("x1", q, 2).substitute_affine(&a, &[q.zero(), q.zero()]);
        assert!(matches!(r, Err(Error::SingularSubstitution)));
    }

    #[test]
    fn parse_examples() {
        let q = FieldSpec::Rationals;
        let p = parse("x1*x2 - 1/2*x3", q, 3);
        assert_eq!(p.num_terms(), 2);
        assert_eq!(
            p.coefficient(&Monomial(vec![1, 1, 0])),
            Scalar::from_int(q, 1)
        );
        assert_eq!(
            p.coefficient(&Monomial(vec![0, 0, 1])),
            Scalar::from_fraction(q, &BigInt::from(-1), &BigInt::from(2)).unwrap()
        );
        assert!(parse("0", q, 3).is_zero());
        assert!(parse("x2*x3 + x2*x3", gf(2), 3).is_zero());
    }

    #[test]
    fn parse_rejects_garbage() {
        let q = FieldSpec::Rationals;
        assert!(matches!(
            Poly::parse("x1 + + x2", q, 2),
            Err(Error::SyntaxError { .. })
        ));
        assert!(matches!(
            Poly::parse("x9", q, 2),
            Err(Error::UnknownVariable(9))
        ));
        assert!(matches!(
            Poly::parse("1/2", gf(2), 1),
            Err(Error::NonCanonicalCoefficient(_))
        ));
        assert!(matches!(
            Poly::parse("", q, 1),
            Err(Error::SyntaxError { .. })
        ));
    }

    #[test]
    fn display_is_canonical() {
        let q = FieldSpec::Rationals;
        let p = parse("-1/2*x3 + x1*x2", q, 3);
        assert_eq!(p.to_string(), "x1*x2 - 1/2*x3");
        let f = gf(5);
        let p = parse("4*x1 + 2", f, 1);
        assert_eq!(p.to_string(), "4*x1 + 2");
        assert_eq!(Poly::zero(q, 2).to_string(), "0");
    }

    #[test]
    fn exact_division() {
        let q = FieldSpec::Rationals;
        let a = parse("x1^2 - x2^2", q, 2);
        let b = parse("x1 - x2", q, 2);
        assert_eq!(a.div_exact(&b).unwrap(), parse("x1 + x2", q, 2));
        assert!(a.div_exact(&parse("x2 + 1", q, 2)).is_none());
    }

    #[test]
    fn const_ratio() {
        let q = FieldSpec::Rationals;
        let a = parse("2*x1 + 4*x2", q, 2);
        let b = parse("x1 + 2*x2", q, 2);
        assert_eq!(a.const_ratio_to(&b), Some(Scalar::from_int(q, 2)));
        assert_eq!(parse("x1", q, 2).const_ratio_to(&b), None);
        assert_eq!(
            Poly::zero(q, 2).const_ratio_to(&b),
            Some(Scalar::from_int(q, 0))
        );
    }
}
