//! Exact rational arithmetic: polynomials and truncated power series
//! over `BigRational`. Perturbative recursions are carried out here so
//! that coefficient growth never silently loses precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact conversion of a finite double to a rational.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // fall back to a quotient of rounded parts for huge operands
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Render as "num/den" ("num" when the denominator is one).
pub fn rat_to_string(x: &Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse "num/den" or a bare integer.
pub fn rat_from_string(s: &str) -> Result<Rat> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::ConfigParse(format!("bad rational '{s}': {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::ConfigParse(format!("bad rational '{s}': zero denominator")));
            }
            Ok(Rat::new(parse_int(n)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Total bits in numerator plus denominator; the overflow budget for
/// series recursions is expressed in these units.
pub fn rat_bits(x: &Rat) -> u64 {
    x.numer().abs().bits() + x.denom().bits()
}

/// Dense polynomial with exact rational coefficients, index = power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly { coeffs: vec![] }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = RatPoly { coeffs };
        p.trim();
        p
    }

    /// Monomial c * v^k.
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        RatPoly { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        RatPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] -= c;
        }
        RatPoly::from_coeffs(coeffs)
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        RatPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, s: &Rat) -> RatPoly {
        RatPoly::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() <= 1 {
            return RatPoly::zero();
        }
        RatPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * Rat::from_integer(BigInt::from(i + 1)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }

    /// True when only odd powers carry nonzero coefficients.
    pub fn is_odd(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| i % 2 == 1 || c.is_zero())
    }

    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(rat_bits).max().unwrap_or(0)
    }
}

impl std::fmt::Display for RatPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", rat_to_string(c))?,
                1 => write!(f, "{}*v", rat_to_string(c))?,
                _ => write!(f, "{}*v^{}", rat_to_string(c), i)?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Truncated power series helpers (exact coefficients, index = power).
// ---------------------------------------------------------------------------

/// Cauchy product truncated at `len` coefficients.
pub fn series_mul(a: &[Rat], b: &[Rat], len: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); len];
    for i in 0..a.len().min(len) {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..b.len().min(len - i) {
            if !b[j].is_zero() {
                out[i + j] += &a[i] * &b[j];
            }
        }
    }
    out
}

/// Square root of a series with unit constant term.
pub fn series_sqrt(f: &[Rat], len: usize) -> Vec<Rat> {
    assert!(!f.is_empty() && f[0].is_one(), "series_sqrt needs f(0) = 1");
    let mut s = vec![Rat::zero(); len];
    s[0] = Rat::one();
    for k in 1..len {
        let mut acc = Rat::zero();
        for j in 1..k {
            acc += &s[j] * &s[k - j];
        }
        let fk = f.get(k).cloned().unwrap_or_else(Rat::zero);
        s[k] = (fk - acc) / rat_int(2);
    }
    s
}

/// Reciprocal of a series with unit constant term.
pub fn series_recip(f: &[Rat], len: usize) -> Vec<Rat> {
    assert!(!f.is_empty() && f[0].is_one(), "series_recip needs f(0) = 1");
    let mut r = vec![Rat::zero(); len];
    r[0] = Rat::one();
    for k in 1..len {
        let mut acc = Rat::zero();
        for j in 0..k {
            let fk = f.get(k - j).cloned().unwrap_or_else(Rat::zero);
            acc += &r[j] * fk;
        }
        r[k] = -acc;
    }
    r
}

/// Coefficients of (1 + t)^alpha for rational alpha.
pub fn binomial_series(alpha: &Rat, len: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); len];
    out[0] = Rat::one();
    for m in 0..len.saturating_sub(1) {
        let factor = (alpha - rat_int(m as i64)) / rat_int(m as i64 + 1);
        out[m + 1] = &out[m] * factor;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_arith_and_eval() {
        // (1 + v)(1 - v) = 1 - v^2
        let p = RatPoly::from_coeffs(vec![rat_int(1), rat_int(1)]);
        let q = RatPoly::from_coeffs(vec![rat_int(1), rat_int(-1)]);
        let r = p.mul(&q);
        assert_eq!(r.coeff(0), rat_int(1));
        assert_eq!(r.coeff(1), rat_int(0));
        assert_eq!(r.coeff(2), rat_int(-1));
        assert_eq!(r.eval(&rat(1, 2)), rat(3, 4));
    }

    #[test]
    fn derivative_drops_degree() {
        let p = RatPoly::from_coeffs(vec![rat_int(3), rat_int(0), rat(5, 2)]);
        let d = p.derivative();
        assert_eq!(d.coeff(0), rat_int(0));
        assert_eq!(d.coeff(1), rat_int(5));
        assert_eq!(d.degree(), Some(1));
    }

    #[test]
    fn rational_string_round_trip() {
        for s in ["3/4", "-21/16", "7", "-1"] {
            let r = rat_from_string(s).unwrap();
            assert_eq!(rat_to_string(&r), s);
        }
        assert!(rat_from_string("1/0").is_err());
        assert!(rat_from_string("x").is_err());
    }

    #[test]
    fn sqrt_series_squares_back() {
        // f = 1 + t + 2t^2
        let f = vec![rat_int(1), rat_int(1), rat_int(2)];
        let s = series_sqrt(&f, 10);
        let sq = series_mul(&s, &s, 10);
        for k in 0..10 {
            let expect = f.get(k).cloned().unwrap_or_else(Rat::zero);
            assert_eq!(sq[k], expect, "coefficient {k}");
        }
    }

    #[test]
    fn binomial_series_matches_sqrt() {
        // (1+t)^(1/2) via binomial vs series_sqrt of 1 + t
        let b = binomial_series(&rat(1, 2), 12);
        let s = series_sqrt(&[rat_int(1), rat_int(1)], 12);
        assert_eq!(b, s);
    }
}
