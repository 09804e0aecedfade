//! The base field: arbitrary-precision rationals or a prime field GF(p).
//!
//! Every scalar is kept in canonical form (reduced fraction, or residue in
//! `[0, p)`), so equality of values is equality of representations. The
//! characteristic of the field drives the case splits elsewhere in the
//! crate, most importantly whether 2 is invertible.
//!
//! Rationals carry a machine-word fast path: values stay in reduced
//! `i64/i64` form and only promote to arbitrary precision on overflow.
//! A promoted value that fits back into words is demoted eagerly, so the
//! representation stays canonical and derived equality is exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Which field scalars live in. `PrimeField(p)` requires `p` prime and
/// `2 <= p < 2^31` so that products of residues fit in a `u64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u32),
}

impl FieldSpec {
    pub fn prime(p: u32) -> Result<Self, Error> {
        if (2..1 << 31).contains(&(p as u64)) && is_prime(p) {
            Ok(FieldSpec::PrimeField(p))
        } else {
            Err(Error::InvalidField(p))
        }
    }

    pub fn characteristic(self) -> u32 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::PrimeField(p) => p,
        }
    }

    /// Whether 2 is invertible, i.e. the characteristic is not 2.
    pub fn has_half(self) -> bool {
        self.characteristic() != 2
    }

    /// The scalar 1/2 when it exists.
    pub fn half(self) -> Option<Scalar> {
        if self.has_half() {
            Some(Scalar::from_int(self, 2).inv().expect("2 is a unit"))
        } else {
            None
        }
    }

    pub fn zero(self) -> Scalar {
        Scalar::from_int(self, 0)
    }

    pub fn one(self) -> Scalar {
        Scalar::from_int(self, 1)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "GF({p})"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "Q" {
            return Ok(FieldSpec::Rationals);
        }
        if let Some(body) = s.strip_prefix("GF(").and_then(|t| t.strip_suffix(')')) {
            let p = body.trim().parse::<u32>().map_err(|_| Error::SyntaxError {
                pos: 0,
                msg: format!("bad prime modulus `{body}`"),
            })?;
            return FieldSpec::prime(p);
        }
        Err(Error::SyntaxError {
            pos: 0,
            msg: format!("unknown field `{s}` (expected `Q` or `GF(p)`)"),
        })
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    let n = n as u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of the base field in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar(Repr);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Repr {
    /// Reduced fraction with positive denominator; `Big` is used only for
    /// values that do not fit here, so derived equality stays sound.
    Small { num: i64, den: i64 },
    Big(BigRational),
    Mod { p: u32, r: u64 },
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Reduced fraction from signed 128-bit parts, demoting to words when it
/// fits.
fn make_rat(num: i128, den: i128) -> Repr {
    debug_assert!(den != 0);
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    if num == 0 {
        return Repr::Small { num: 0, den: 1 };
    }
    let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
    let (num, den) = (num / g, den / g);
    if let (Ok(n), Ok(d)) = (i64::try_from(num), i64::try_from(den)) {
        Repr::Small { num: n, den: d }
    } else {
        Repr::Big(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

fn demote(r: BigRational) -> Repr {
    if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
        Repr::Small { num: n, den: d }
    } else {
        Repr::Big(r)
    }
}

fn promote(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match &self.0 {
            Repr::Small { .. } | Repr::Big(_) => FieldSpec::Rationals,
            Repr::Mod { p, .. } => FieldSpec::PrimeField(*p),
        }
    }

    pub fn from_int(field: FieldSpec, v: i64) -> Scalar {
        match field {
            FieldSpec::Rationals => Scalar(Repr::Small { num: v, den: 1 }),
            FieldSpec::PrimeField(p) => Scalar(Repr::Mod {
                p,
                r: v.rem_euclid(p as i64) as u64,
            }),
        }
    }

    pub fn from_bigint(field: FieldSpec, v: &BigInt) -> Scalar {
        match field {
            FieldSpec::Rationals => Scalar(demote(BigRational::from(v.clone()))),
            FieldSpec::PrimeField(p) => {
                let m = v.modpow(&BigInt::one(), &BigInt::from(p));
                let m = if m.is_negative() { m + p } else { m };
                let digits = m.to_u64_digits().1;
                Scalar(Repr::Mod {
                    p,
                    r: digits.first().copied().unwrap_or(0),
                })
            }
        }
    }

    /// Build `num/den`, reducing in the field. Fails when `den` is not a
    /// unit (zero over the rationals, divisible by `p` over GF(p)).
    pub fn from_fraction(field: FieldSpec, num: &BigInt, den: &BigInt) -> Result<Scalar, Error> {
        let d = Scalar::from_bigint(field, den);
        if d.is_zero() {
            return Err(Error::NonCanonicalCoefficient(format!("{num}/{den}")));
        }
        Scalar::from_bigint(field, num).div(&d)
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num == 0,
            Repr::Big(r) => r.is_zero(),
            Repr::Mod { r, .. } => *r == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.0 {
            Repr::Small { num, den } => *num == 1 && *den == 1,
            Repr::Big(r) => r.is_one(),
            Repr::Mod { r, .. } => *r == 1,
        }
    }

    /// Negative as a rational number; false for prime-field residues.
    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(r) => r.is_negative(),
            Repr::Mod { .. } => false,
        }
    }

    fn check_same_field(&self, other: &Scalar) {
        assert_eq!(
            self.field(),
            other.field(),
            "scalar arithmetic across distinct fields"
        );
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.check_same_field(other);
        Scalar(match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => make_rat(
                *a as i128 * *d as i128 + *c as i128 * *b as i128,
                *b as i128 * *d as i128,
            ),
            (Repr::Mod { p, r: a }, Repr::Mod { r: b, .. }) => Repr::Mod {
                p: *p,
                r: (a + b) % *p as u64,
            },
            (x, y) => demote(to_big(x) + to_big(y)),
        })
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.check_same_field(other);
        Scalar(match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                make_rat(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            (Repr::Mod { p, r: a }, Repr::Mod { r: b, .. }) => Repr::Mod {
                p: *p,
                r: (a * b) % *p as u64,
            },
            (x, y) => demote(to_big(x) * to_big(y)),
        })
    }

    pub fn neg(&self) -> Scalar {
        Scalar(match &self.0 {
            Repr::Small { num, den } => match num.checked_neg() {
                Some(n) => Repr::Small { num: n, den: *den },
                None => demote(-promote(*num, *den)),
            },
            Repr::Big(r) => demote(-r.clone()),
            Repr::Mod { p, r } => Repr::Mod {
                p: *p,
                r: if *r == 0 { 0 } else { *p as u64 - r },
            },
        })
    }

    pub fn inv(&self) -> Result<Scalar, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Scalar(match &self.0 {
            Repr::Small { num, den } => make_rat(*den as i128, *num as i128),
            Repr::Big(r) => demote(r.recip()),
            Repr::Mod { p, r } => Repr::Mod {
                p: *p,
                r: mod_inverse(*r, *p as u64),
            },
        }))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, Error> {
        Ok(self.mul(&other.inv()?))
    }
}

fn to_big(r: &Repr) -> BigRational {
    match r {
        Repr::Small { num, den } => promote(*num, *den),
        Repr::Big(b) => b.clone(),
        Repr::Mod { .. } => unreachable!("rational arithmetic on a residue"),
    }
}

/// Inverse of `a` modulo prime `m` by the extended Euclidean algorithm.
fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "modulus must be prime and a nonzero");
    old_s.rem_euclid(m as i128) as u64
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den } => {
                if *den == 1 {
                    write!(f, "{num}")
                } else {
                    write!(f, "{num}/{den}")
                }
            }
            Repr::Big(r) => write!(f, "{r}"),
            Repr::Mod { r, .. } => write!(f, "{r}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_fraction(FieldSpec::Rationals, &BigInt::from(n), &BigInt::from(d)).unwrap()
    }

    #[test]
    fn rational_arithmetic_is_exact() {
        assert_eq!(q(1, 2).add(&q(1, 3)), q(5, 6));
        assert_eq!(q(-1, 2).neg(), q(1, 2));
        assert_eq!(q(2, 4), q(1, 2), "fractions are reduced");
        assert_eq!(q(1, -2), q(-1, 2), "denominators are positive");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Scalar::from_int(FieldSpec::Rationals, i64::MAX);
        let sum = big.mul(&big).add(&big.mul(&big)); // 2 * (2^63-1)^2
        assert!(!sum.is_zero());
        let back = sum.div(&big).unwrap().div(&big).unwrap();
        assert_eq!(back, Scalar::from_int(FieldSpec::Rationals, 2));
    }

    #[test]
    fn prime_field_inverse() {
        let gf5 = FieldSpec::prime(5).unwrap();
        let two = Scalar::from_int(gf5, 2);
        assert_eq!(two.inv().unwrap(), Scalar::from_int(gf5, 3));
    }

    #[test]
    fn characteristic_two_addition() {
        let gf2 = FieldSpec::prime(2).unwrap();
        let one = gf2.one();
        assert!(one.add(&one).is_zero());
    }

    #[test]
    fn half_exists_away_from_characteristic_two() {
        assert!(FieldSpec::Rationals.has_half());
        assert!(!FieldSpec::prime(2).unwrap().has_half());
        assert!(FieldSpec::prime(3).unwrap().has_half());
        let half = FieldSpec::prime(3).unwrap().half().unwrap();
        assert_eq!(half, Scalar::from_int(FieldSpec::prime(3).unwrap(), 2));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(FieldSpec::prime(6).is_err());
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(2147483647).is_ok(), "Mersenne prime 2^31-1");
    }

    #[test]
    fn field_parsing_round_trip() {
        for f in [FieldSpec::Rationals, FieldSpec::prime(7).unwrap()] {
            assert_eq!(f.to_string().parse::<FieldSpec>().unwrap(), f);
        }
    }

    #[test]
    #[should_panic(expected = "distinct fields")]
    fn mixing_fields_panics() {
        let a = FieldSpec::Rationals.one();
        let b = FieldSpec::prime(5).unwrap().one();
        let _ = a.add(&b);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let z = FieldSpec::Rationals.zero();
        assert!(matches!(z.inv(), Err(Error::DivisionByZero)));
    }

    // Field axioms on pseudo-random triples, for Q and a few GF(p).
    #[test]
    fn field_axioms_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let fields = [
            FieldSpec::Rationals,
            FieldSpec::prime(2).unwrap(),
            FieldSpec::prime(3).unwrap(),
            FieldSpec::prime(5).unwrap(),
        ];
        for field in fields {
            for _ in 0..200 {
                let a = Scalar::from_int(field, rng.random_range(-12..12));
                let b = Scalar::from_int(field, rng.random_range(-12..12));
                let c = Scalar::from_int(field, rng.random_range(-12..12));
                assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
                assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                assert_eq!(a.add(&b), b.add(&a));
                assert_eq!(a.mul(&b), b.mul(&a));
                assert!(a.sub(&a).is_zero());
                if !a.is_zero() {
                    assert!(a.mul(&a.inv().unwrap()).is_one());
                }
            }
        }
    }
}
