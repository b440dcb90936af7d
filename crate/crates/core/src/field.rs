//! Exact scalar arithmetic over the supported ground fields.
//!
//! Three fields are available: the rationals, prime fields F_p with
//! p < 2^31, and quadratic extensions Q(sqrt(D)) for a square-free
//! non-square D. Every scalar is kept in canonical form (fractions
//! reduced, residues in [0, p)), so equality is plain representation
//! comparison. All values are immutable; operations are pure.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Ground field descriptor. Carried by every composite object (tensor,
/// matrix, certificate) so cross-field mixing is caught at the API boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    /// The rational numbers Q.
    Rationals,
    /// Prime field F_p, p prime and below 2^31.
    Prime { p: u64 },
    /// Q(sqrt(D)) with D square-free and not a perfect square.
    Quadratic { d: i64 },
}

/// Cardinality of a field: finite fields report p, the rest are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Finite(u64),
    Infinite,
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn is_square_free(n: i64) -> bool {
    let mut m = n.unsigned_abs();
    if m < 2 {
        // 0 and 1 are excluded; |D| = 1 is only acceptable for D = -1.
        return n == -1;
    }
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return false;
            }
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec::Rationals
    }

    /// Prime field constructor; verifies primality by trial division.
    pub fn prime(p: u64) -> Result<Self> {
        if p >= (1 << 31) {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec::Prime { p })
    }

    /// Q(sqrt(D)) constructor; D must be square-free and not a square.
    pub fn quadratic(d: i64) -> Result<Self> {
        if d == 0 || d == 1 || !is_square_free(d) {
            return Err(Error::NotSquareFree(d));
        }
        Ok(FieldSpec::Quadratic { d })
    }

    pub fn cardinality(&self) -> Cardinality {
        match self {
            FieldSpec::Prime { p } => Cardinality::Finite(*p),
            _ => Cardinality::Infinite,
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Prime { p } => *p,
            _ => 0,
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(Box::new(BigRational::zero())),
            FieldSpec::Prime { p } => Scalar::Fp { val: 0, p: *p },
            FieldSpec::Quadratic { d } => Scalar::quad(BigRational::zero(), BigRational::zero(), *d),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Rat(Box::new(BigRational::from(BigInt::from(n)))),
            FieldSpec::Prime { p } => {
                let r = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp { val: r, p: *p }
            }
            FieldSpec::Quadratic { d } => {
                Scalar::quad(BigRational::from(BigInt::from(n)), BigRational::zero(), *d)
            }
        }
    }

    /// sqrt(D) itself, for quadratic fields.
    pub fn sqrt_d(&self) -> Option<Scalar> {
        match self {
            FieldSpec::Quadratic { d } => {
                Some(Scalar::quad(BigRational::zero(), BigRational::one(), *d))
            }
            _ => None,
        }
    }

    /// A square root of `x` in this field, if one exists.
    pub fn sqrt(&self, x: &Scalar) -> Option<Scalar> {
        match (self, x) {
            (FieldSpec::Rationals, Scalar::Rat(r)) => rational_sqrt(r).map(|s| Scalar::Rat(Box::new(s))),
            (FieldSpec::Prime { p }, Scalar::Fp { val, .. }) => {
                prime_sqrt(*val, *p).map(|v| Scalar::Fp { val: v, p: *p })
            }
            (FieldSpec::Quadratic { d }, Scalar::Quad(q)) => {
                if !q.b.is_zero() {
                    // General sqrt in Q(sqrt(D)) is out of scope; only
                    // rational arguments are handled.
                    return None;
                }
                if let Some(r) = rational_sqrt(&q.a) {
                    return Some(Scalar::quad(r, BigRational::zero(), *d));
                }
                // a = (b * sqrt(D))^2 iff a / D is a rational square.
                let d_rat = BigRational::from(BigInt::from(*d));
                let quotient = &q.a / &d_rat;
                rational_sqrt(&quotient).map(|b| Scalar::quad(BigRational::zero(), b, *d))
            }
            _ => None,
        }
    }

    /// The i-th element in the canonical enumeration 0, 1, 2, ... of field
    /// elements (residues for F_p, integers for the infinite fields).
    pub fn element(&self, i: u64) -> Scalar {
        match self {
            FieldSpec::Prime { p } => Scalar::Fp { val: i % p, p: *p },
            _ => self.from_i64(i as i64),
        }
    }

    pub fn random_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        match self {
            FieldSpec::Rationals => {
                let n = rng.gen_range(-9i64..=9);
                let d = rng.gen_range(1i64..=4);
                Scalar::Rat(Box::new(BigRational::new(BigInt::from(n), BigInt::from(d))))
            }
            FieldSpec::Prime { p } => Scalar::Fp { val: rng.gen_range(0..*p), p: *p },
            FieldSpec::Quadratic { d } => {
                let a = rng.gen_range(-4i64..=4);
                let b = rng.gen_range(-2i64..=2);
                Scalar::quad(
                    BigRational::from(BigInt::from(a)),
                    BigRational::from(BigInt::from(b)),
                    *d,
                )
            }
        }
    }

    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        Scalar::parse(text, self)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::Prime { p } => write!(f, "F_{p}"),
            FieldSpec::Quadratic { d } => write!(f, "Q(sqrt({d}))"),
        }
    }
}

/// Element of Q(sqrt(D)): a + b*sqrt(D) with reduced rational a, b.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    pub a: BigRational,
    pub b: BigRational,
    pub d: i64,
}

/// An exact field element. The representation carries enough field data
/// (modulus, extension discriminant) to be self-contained; canonical form
/// makes `==` decide field equality.
///
/// Arithmetic on scalars from different fields is a programming error and
/// panics; public operations on composite objects check `FieldSpec`
/// equality up front and report `Error::FieldMismatch` instead.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(Box<BigRational>),
    Fp { val: u64, p: u64 },
    Quad(Box<QuadElem>),
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn prime_sqrt(a: u64, p: u64) -> Option<u64> {
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    // Euler criterion, then Tonelli-Shanks.
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    // Tonelli-Shanks for p = 1 mod 4.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        return None;
    }
    Some(pow_mod(a, p - 2, p))
}

impl Scalar {
    fn quad(a: BigRational, b: BigRational, d: i64) -> Scalar {
        Scalar::Quad(Box::new(QuadElem { a, b, d }))
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rat(_) => FieldSpec::Rationals,
            Scalar::Fp { p, .. } => FieldSpec::Prime { p: *p },
            Scalar::Quad(q) => FieldSpec::Quadratic { d: q.d },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { val, .. } => *val == 0,
            Scalar::Quad(q) => q.a.is_zero() && q.b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { val, .. } => *val == 1,
            Scalar::Quad(q) => q.a.is_one() && q.b.is_zero(),
        }
    }

    fn panic_mismatch(&self, other: &Scalar) -> ! {
        panic!(
            "scalar arithmetic across fields: {} vs {}",
            self.field(),
            other.field()
        );
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(Box::new(&**a + &**b)),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) if p == q => {
                Scalar::Fp { val: (a + b) % p, p: *p }
            }
            (Scalar::Quad(x), Scalar::Quad(y)) if x.d == y.d => {
                Scalar::quad(&x.a + &y.a, &x.b + &y.b, x.d)
            }
            _ => self.panic_mismatch(other),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(Box::new(&**a - &**b)),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) if p == q => {
                Scalar::Fp { val: (a + p - b) % p, p: *p }
            }
            (Scalar::Quad(x), Scalar::Quad(y)) if x.d == y.d => {
                Scalar::quad(&x.a - &y.a, &x.b - &y.b, x.d)
            }
            _ => self.panic_mismatch(other),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(Box::new(&**a * &**b)),
            (Scalar::Fp { val: a, p }, Scalar::Fp { val: b, p: q }) if p == q => {
                Scalar::Fp { val: mul_mod(*a, *b, *p), p: *p }
            }
            (Scalar::Quad(x), Scalar::Quad(y)) if x.d == y.d => {
                // (a + b s)(a' + b' s) = aa' + bb' D + (ab' + a'b) s
                let d_rat = BigRational::from(BigInt::from(x.d));
                Scalar::quad(
                    &x.a * &y.a + &x.b * &y.b * d_rat,
                    &x.a * &y.b + &x.b * &y.a,
                    x.d,
                )
            }
            _ => self.panic_mismatch(other),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(Box::new(-&**a)),
            Scalar::Fp { val, p } => Scalar::Fp { val: (p - val) % p, p: *p },
            Scalar::Quad(q) => Scalar::quad(-&q.a, -&q.b, q.d),
        }
    }

    /// Multiplicative inverse; zero is an error value, not a panic.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rat(a) => Scalar::Rat(Box::new(a.recip())),
            Scalar::Fp { val, p } => Scalar::Fp { val: inv_mod(*val, *p).unwrap(), p: *p },
            Scalar::Quad(q) => {
                // 1/(a + b s) = (a - b s)/(a^2 - D b^2); the norm is nonzero
                // because D is not a rational square.
                let d_rat = BigRational::from(BigInt::from(q.d));
                let norm = &q.a * &q.a - &q.b * &q.b * d_rat;
                Scalar::quad(&q.a / &norm, -(&q.b / &norm), q.d)
            }
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    /// Conjugate a + b*sqrt(D) -> a - b*sqrt(D); identity on the other fields.
    pub fn conjugate(&self) -> Scalar {
        match self {
            Scalar::Quad(q) => Scalar::quad(q.a.clone(), -&q.b, q.d),
            other => other.clone(),
        }
    }

    /// Residue value for prime-field scalars.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Fp { val, .. } => Some(*val),
            _ => None,
        }
    }

    pub fn parse(text: &str, field: &FieldSpec) -> Result<Scalar> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let err = |reason: &str| Error::ParseScalar { text: text.to_string(), reason: reason.to_string() };
        if s.is_empty() {
            return Err(err("empty"));
        }
        match field {
            FieldSpec::Rationals => {
                let r = BigRational::from_str(&s).map_err(|e| err(&e.to_string()))?;
                Ok(Scalar::Rat(Box::new(r)))
            }
            FieldSpec::Prime { p } => {
                let n = BigInt::from_str(&s).map_err(|e| err(&e.to_string()))?;
                let p_big = BigInt::from(*p);
                let r = ((n % &p_big) + &p_big) % &p_big;
                let val: u64 = r.try_into().map_err(|_| err("residue out of range"))?;
                Ok(Scalar::Fp { val, p: *p })
            }
            FieldSpec::Quadratic { d } => {
                if let Some(idx) = s.find("*sqrt(") {
                    let close = s[idx..].find(')').ok_or_else(|| err("missing ')'"))? + idx;
                    let d_txt = &s[idx + 6..close];
                    let d_parsed: i64 = d_txt.parse().map_err(|_| err("bad discriminant"))?;
                    if d_parsed != *d {
                        return Err(err("discriminant does not match the field"));
                    }
                    if close + 1 != s.len() {
                        return Err(err("trailing characters after sqrt term"));
                    }
                    let head = &s[..idx];
                    // Split "A+B" / "A-B" at the last sign that follows a digit;
                    // rational literals only contain digits, '/' and a leading '-'.
                    let mut split_at = None;
                    for (i, c) in head.char_indices().skip(1) {
                        if (c == '+' || c == '-')
                            && head[..i].chars().last().is_some_and(|prev| prev.is_ascii_digit())
                        {
                            split_at = Some(i);
                        }
                    }
                    let (a_txt, b_txt) = match split_at {
                        Some(i) => {
                            let sign = &head[i..i + 1];
                            let b_body = &head[i + 1..];
                            (
                                head[..i].to_string(),
                                if sign == "-" { format!("-{b_body}") } else { b_body.to_string() },
                            )
                        }
                        None => ("0".to_string(), head.to_string()),
                    };
                    let a = BigRational::from_str(&a_txt).map_err(|e| err(&e.to_string()))?;
                    let b = BigRational::from_str(&b_txt).map_err(|e| err(&e.to_string()))?;
                    Ok(Scalar::quad(a, b, *d))
                } else {
                    let a = BigRational::from_str(&s).map_err(|e| err(&e.to_string()))?;
                    Ok(Scalar::quad(a, BigRational::zero(), *d))
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Fp { val, .. } => write!(f, "{val}"),
            Scalar::Quad(q) => {
                if q.b.is_zero() {
                    write!(f, "{}", q.a)
                } else if q.a.is_zero() {
                    write!(f, "{}*sqrt({})", q.b, q.d)
                } else if q.b.is_negative() {
                    write!(f, "{}-{}*sqrt({})", q.a, -&q.b, q.d)
                } else {
                    write!(f, "{}+{}*sqrt({})", q.a, q.b, q.d)
                }
            }
        }
    }
}
