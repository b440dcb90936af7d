//! Univariate polynomials over an exact field.
//!
//! The same type serves two roles: polynomials in the degeneration
//! parameter eps (certificate entries, displayed as `c0 + c1*eps + ...`)
//! and invariant factors of pencil regular parts (displayed in `x`).
//! Coefficients are normalized: no trailing zeros, so the zero polynomial
//! has an empty coefficient list.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

/// Valuation of a polynomial: index of the first nonzero coefficient,
/// or infinite for the zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    field: FieldSpec,
    coeffs: Vec<Scalar>,
}

/// Polynomials in the degeneration parameter.
pub type EpsPoly = Poly;

impl Poly {
    pub fn new(field: FieldSpec, mut coeffs: Vec<Scalar>) -> Poly {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn zero(field: &FieldSpec) -> Poly {
        Poly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn one(field: &FieldSpec) -> Poly {
        Poly::constant(field.one())
    }

    pub fn constant(c: Scalar) -> Poly {
        let field = c.field();
        Poly::new(field, vec![c])
    }

    /// c * eps^k (or c * x^k).
    pub fn monomial(c: Scalar, k: usize) -> Poly {
        let field = c.field();
        let mut coeffs = vec![field.zero(); k];
        coeffs.push(c);
        Poly::new(field, coeffs)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of degree k (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn valuation(&self) -> Valuation {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(i) => Valuation::Finite(i),
            None => Valuation::Infinite,
        }
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    fn check_field(&self, other: &Poly) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                expected: self.field.clone(),
                found: other.field.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.field, other.field);
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect();
        Poly::new(self.field.clone(), coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.field, other.field);
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub(&other.coeff(i))).collect();
        Poly::new(self.field.clone(), coeffs)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.field.clone(), self.coeffs.iter().map(Scalar::neg).collect())
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        Poly::new(self.field.clone(), self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    /// Convolution product. Errors on field mismatch.
    pub fn mul_checked(&self, other: &Poly) -> Result<Poly> {
        self.check_field(other)?;
        Ok(self.mul(other))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.field, other.field);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut coeffs = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Poly::new(self.field.clone(), coeffs)
    }

    /// Discard all coefficients of degree above `dmax`.
    pub fn truncate(&self, dmax: usize) -> Poly {
        let keep = self.coeffs.iter().take(dmax + 1).cloned().collect();
        Poly::new(self.field.clone(), keep)
    }

    /// Multiply by eps^k.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.field.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly::new(self.field.clone(), coeffs)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(&self.field);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&self.field.from_i64(i as i64)))
            .collect();
        Poly::new(self.field.clone(), coeffs)
    }

    /// Scale so the leading coefficient is 1. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            Some(lc) if !lc.is_one() => {
                let inv = lc.inv().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
            _ => self.clone(),
        }
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, div: &Poly) -> Result<(Poly, Poly)> {
        self.check_field(div)?;
        if div.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dd = div.degree().unwrap();
        let lc_inv = div.leading_coeff().unwrap().inv()?;
        let mut rem = self.coeffs.clone();
        let mut quo = vec![self.field.zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let factor = rem.last().unwrap().mul(&lc_inv);
            if !factor.is_zero() {
                quo[k] = factor.clone();
                for (i, c) in div.coeffs.iter().enumerate() {
                    rem[k + i] = rem[k + i].sub(&factor.mul(c));
                }
            }
            rem.pop();
        }
        Ok((Poly::new(self.field.clone(), quo), Poly::new(self.field.clone(), rem)))
    }

    pub fn divides(&self, other: &Poly) -> bool {
        match other.div_rem(self) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => false,
        }
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// x^e mod self, by repeated squaring. Used for the split test
    /// p | x^q - x over finite fields.
    pub fn pow_x_mod(&self, e: u64) -> Result<Poly> {
        if self.is_constant() {
            return Err(Error::InvalidParameter("modulus must be nonconstant".into()));
        }
        let x = Poly::monomial(self.field.one(), 1);
        let mut result = Poly::one(&self.field);
        let mut base = x.div_rem(self)?.1;
        let mut exp = e;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base).div_rem(self)?.1;
            }
            base = base.mul(&base).div_rem(self)?.1;
            exp >>= 1;
        }
        Ok(result)
    }

    /// True when the polynomial has no repeated irreducible factor.
    /// gcd(p, p') = 1 characterizes square-freeness over perfect fields,
    /// which covers Q, F_p and Q(sqrt(D)).
    pub fn is_squarefree(&self) -> bool {
        if self.is_constant() {
            return true;
        }
        self.gcd(&self.derivative()).is_constant()
    }

    pub fn to_string_with_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let wrapped = if cs.contains('+') || cs.contains('-') || cs.contains('*') {
                format!("({cs})")
            } else {
                cs
            };
            parts.push(match k {
                0 => wrapped,
                1 => format!("{wrapped}*{var}"),
                _ => format!("{wrapped}*{var}^{k}"),
            });
        }
        parts.join(" + ")
    }

    /// Parse `c0 + c1*<var> + c2*<var>^2 + ...`; coefficients may be
    /// parenthesized, terms with zero coefficient omitted, bare `<var>^k`
    /// means coefficient one.
    pub fn parse(text: &str, field: &FieldSpec, var: &str) -> Result<Poly> {
        let err = |reason: &str| Error::ParsePoly { text: text.to_string(), reason: reason.to_string() };
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty"));
        }
        if s == "0" {
            return Ok(Poly::zero(field));
        }
        // Split into terms at top-level '+' (parenthesis depth 0). A '-' at
        // depth 0 also starts a new negated term, except inside a literal.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        let mut depth = 0i32;
        for ch in s.chars() {
            match ch {
                '(' => {
                    depth += 1;
                    cur.push(ch);
                }
                ')' => {
                    depth -= 1;
                    cur.push(ch);
                }
                '+' if depth == 0 && !cur.is_empty() && !cur.ends_with('e') => {
                    terms.push(cur.clone());
                    cur.clear();
                }
                _ => cur.push(ch),
            }
        }
        if !cur.is_empty() {
            terms.push(cur);
        }
        let mut coeffs: Vec<Scalar> = Vec::new();
        for term in terms {
            let (coeff_txt, k) = if let Some(idx) = term.find(&format!("*{var}")) {
                let rest = &term[idx + 1 + var.len()..];
                let k = if rest.is_empty() {
                    1
                } else if let Some(pow) = rest.strip_prefix('^') {
                    pow.parse::<usize>().map_err(|_| err("bad exponent"))?
                } else {
                    return Err(err("bad term"));
                };
                (term[..idx].to_string(), k)
            } else if let Some(rest) = term.strip_prefix(var) {
                let k = if rest.is_empty() {
                    1
                } else if let Some(pow) = rest.strip_prefix('^') {
                    pow.parse::<usize>().map_err(|_| err("bad exponent"))?
                } else {
                    return Err(err("bad term"));
                };
                ("1".to_string(), k)
            } else {
                (term.clone(), 0)
            };
            let trimmed = coeff_txt
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .unwrap_or(&coeff_txt);
            let c = field.parse_scalar(trimmed).map_err(|e| err(&e.to_string()))?;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, field.zero());
            }
            coeffs[k] = coeffs[k].add(&c);
        }
        Ok(Poly::new(field.clone(), coeffs))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with_var("eps"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(field: &FieldSpec, coeffs: &[i64]) -> Poly {
        Poly::new(field.clone(), coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    #[test]
    fn mul_difference_of_squares() {
        let f = FieldSpec::Rationals;
        let a = poly(&f, &[1, 1]);
        let b = poly(&f, &[1, -1]);
        assert_eq!(a.mul_checked(&b).unwrap(), poly(&f, &[1, 0, -1]));
    }

    #[test]
    fn mul_absorbing_zero() {
        let f = FieldSpec::Rationals;
        let a = Poly::zero(&f);
        let b = poly(&f, &[3, 0, 0, 0, 0, 1]);
        assert!(a.mul_checked(&b).unwrap().is_zero());
    }

    #[test]
    fn mul_modular_convolution() {
        // over p=5: (2+3eps)(4+eps) = 3 + 4eps + 3eps^2
        let f = FieldSpec::prime(5).unwrap();
        let a = poly(&f, &[2, 3]);
        let b = poly(&f, &[4, 1]);
        assert_eq!(a.mul_checked(&b).unwrap(), poly(&f, &[3, 4, 3]));
    }

    #[test]
    fn mul_rejects_field_mismatch() {
        let a = poly(&FieldSpec::Rationals, &[1]);
        let b = poly(&FieldSpec::prime(5).unwrap(), &[1]);
        assert!(matches!(a.mul_checked(&b), Err(Error::FieldMismatch { .. })));
    }

    #[test]
    fn truncate_examples() {
        let f = FieldSpec::Rationals;
        let a = poly(&f, &[1, 1, 0, 1]);
        assert_eq!(a.truncate(1), poly(&f, &[1, 1]));
        assert!(poly(&f, &[0, 0, 1]).truncate(1).is_zero());
        assert_eq!(a.truncate(a.degree().unwrap()), a);
    }

    #[test]
    fn valuation_examples() {
        let f = FieldSpec::Rationals;
        assert_eq!(poly(&f, &[0, 0, 1, 0, 1]).valuation(), Valuation::Finite(2));
        assert_eq!(Poly::zero(&f).valuation(), Valuation::Infinite);
        assert_eq!(poly(&f, &[7]).valuation(), Valuation::Finite(0));
    }

    #[test]
    fn division_and_gcd() {
        let f = FieldSpec::prime(7).unwrap();
        let a = poly(&f, &[2, 0, 1]).mul(&poly(&f, &[3, 1])); // (x^2+2)(x+3)
        let (q, r) = a.div_rem(&poly(&f, &[3, 1])).unwrap();
        assert_eq!(q, poly(&f, &[2, 0, 1]));
        assert!(r.is_zero());
        let g = a.gcd(&poly(&f, &[3, 1]));
        assert_eq!(g, poly(&f, &[3, 1]));
        assert!(a.div_rem(&Poly::zero(&f)).is_err());
    }

    #[test]
    fn pow_x_mod_split_test() {
        // x^2+x+1 is irreducible over F_2, so it does not divide x^2-x.
        let f2 = FieldSpec::prime(2).unwrap();
        let m = poly(&f2, &[1, 1, 1]);
        let xp = m.pow_x_mod(2).unwrap();
        let x = Poly::monomial(f2.one(), 1);
        assert_ne!(xp, x);
        // x^2+x = x(x+1) splits over F_2: x^2 = x mod it.
        let m2 = poly(&f2, &[0, 1, 1]);
        assert_eq!(m2.pow_x_mod(2).unwrap(), x);
    }

    #[test]
    fn squarefree_detection() {
        let f = FieldSpec::Rationals;
        assert!(poly(&f, &[0, 1]).is_squarefree());
        assert!(!poly(&f, &[0, 0, 1]).is_squarefree());
        assert!(poly(&f, &[-2, 0, 1]).is_squarefree());
        let f2 = FieldSpec::prime(2).unwrap();
        assert!(!poly(&f2, &[1, 0, 1]).is_squarefree()); // x^2+1 = (x+1)^2
        assert!(poly(&f2, &[1, 1, 1]).is_squarefree());
    }

    #[test]
    fn display_and_parse() {
        let f = FieldSpec::Rationals;
        let a = poly(&f, &[1, 0, -3]);
        assert_eq!(a.to_string(), "1 + (-3)*eps^2");
        assert_eq!(Poly::parse(&a.to_string(), &f, "eps").unwrap(), a);
        assert_eq!(Poly::parse("0", &f, "eps").unwrap(), Poly::zero(&f));
        assert_eq!(Poly::parse("eps^3 + 2", &f, "eps").unwrap(), poly(&f, &[2, 0, 0, 1]));
        let fq = FieldSpec::quadratic(2).unwrap();
        let c = fq.parse_scalar("1+1/2*sqrt(2)").unwrap();
        let b = Poly::new(fq.clone(), vec![fq.one(), c]);
        assert_eq!(Poly::parse(&b.to_string(), &fq, "eps").unwrap(), b);
    }

    proptest! {
        #[test]
        fn degree_and_valuation_are_additive(seed in 0u64..300) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for field in [FieldSpec::Rationals, FieldSpec::prime(5).unwrap()] {
                let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let len = rand::Rng::gen_range(rng, 1usize..6);
                    Poly::new(field.clone(), (0..len).map(|_| field.random_scalar(rng)).collect())
                };
                let a = mk(&mut rng);
                let b = mk(&mut rng);
                if !a.is_zero() && !b.is_zero() {
                    let prod = a.mul(&b);
                    prop_assert_eq!(prod.degree(), Some(a.degree().unwrap() + b.degree().unwrap()));
                    let (Valuation::Finite(va), Valuation::Finite(vb)) = (a.valuation(), b.valuation()) else {
                        unreachable!()
                    };
                    prop_assert_eq!(prod.valuation(), Valuation::Finite(va + vb));
                }
            }
        }

        #[test]
        fn truncation_is_idempotent(seed in 0u64..200, d in 0usize..5) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let field = FieldSpec::prime(5).unwrap();
            let len = rand::Rng::gen_range(&mut rng, 0usize..8);
            let a = Poly::new(field.clone(), (0..len).map(|_| field.random_scalar(&mut rng)).collect());
            prop_assert_eq!(a.truncate(d).truncate(d), a.truncate(d));
        }
    }
}
