//! Exact arithmetic in Q(δ) where δ = (1/2)^(1/m): polynomials in δ
//! with rational coefficients reduced modulo δ^m = 1/2. The modulus
//! polynomial 2x^m − 1 is irreducible over Q, so this is a field;
//! inverses exist for every nonzero value. Ordering is decided by
//! symbolic equality first, then by interval bisection around the unique
//! real root of x^m − 1/2 in (1/2, 1).

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DiscountedValue {
    /// Coefficients of 1, δ, δ², …, δ^(m−1).
    coeffs: Vec<Rational>,
}

impl DiscountedValue {
    pub fn zero(m: usize) -> Self {
        assert!(m >= 1);
        DiscountedValue {
            coeffs: vec![Rational::zero(); m],
        }
    }

    pub fn constant(m: usize, value: Rational) -> Self {
        let mut v = Self::zero(m);
        v.coeffs[0] = value;
        v
    }

    pub fn from_int(m: usize, value: i64) -> Self {
        Self::constant(m, Rational::from_int(value))
    }

    /// δ itself. Requires m >= 2 (with m = 1 the relation forces δ = 1/2,
    /// a plain rational; constants cover that case).
    pub fn delta(m: usize) -> Self {
        assert!(m >= 2);
        let mut v = Self::zero(m);
        v.coeffs[1] = Rational::one();
        v
    }

    /// δ^k, reduced: δ^k = (1/2)^(k div m) · δ^(k mod m).
    pub fn delta_pow(m: usize, k: usize) -> Self {
        let mut v = Self::zero(m);
        v.coeffs[k % m] = Rational::new(1, 2).pow((k / m) as u32);
        v
    }

    pub fn modulus(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// Some(constant) iff the value involves no δ term.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coeffs[1..].iter().all(Rational::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            self.modulus(),
            other.modulus(),
            "mixed δ-ring moduli in arithmetic"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        DiscountedValue {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other);
        DiscountedValue {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        DiscountedValue {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, by: &Rational) -> Self {
        DiscountedValue {
            coeffs: self.coeffs.iter().map(|a| a * by).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        let m = self.modulus();
        let half = Rational::new(1, 2);
        let mut out = vec![Rational::zero(); m];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = i + j;
                let mut term = a * b;
                if k >= m {
                    term = &term * &half;
                }
                out[k % m] = &out[k % m] + &term;
            }
        }
        DiscountedValue { coeffs: out }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(self.modulus(), Rational::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via extended Euclid against 2x^m − 1.
    /// Panics on zero.
    pub fn inverse(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        let m = self.modulus();
        // modulus poly x^m - 1/2 (monic form of 2x^m - 1)
        let mut modulus = vec![Rational::zero(); m + 1];
        modulus[0] = Rational::new(-1, 2);
        modulus[m] = Rational::one();

        // extended euclid on (self, modulus): track s with r = s * self (mod modulus)
        let mut r0 = modulus;
        let mut r1 = self.coeffs.clone();
        trim(&mut r1);
        let mut s0: Vec<Rational> = vec![];
        let mut s1 = vec![Rational::one()];
        while !r1.is_empty() {
            let (q, rem) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a nonzero constant gcd; s0 * self ≡ r0 (mod modulus)
        debug_assert_eq!(r0.len(), 1, "2x^m - 1 is irreducible, gcd is constant");
        let inv_gcd = r0[0].recip();
        let mut coeffs = vec![Rational::zero(); m];
        for (i, c) in s0.iter().enumerate() {
            // s0 has degree < m because deg(self) < m
            coeffs[i] = c * &inv_gcd;
        }
        let out = DiscountedValue { coeffs };
        debug_assert!(out
            .mul(self)
            .sub(&Self::constant(m, Rational::one()))
            .is_zero());
        out
    }

    /// Sign of the value at the real point δ = (1/2)^(1/m): 0 if the
    /// polynomial is symbolically zero, else ±1 by interval refinement.
    pub fn sign(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        // δ lies in [1/2, 1]; x^m − 1/2 is increasing there.
        let mut lo = Rational::new(1, 2);
        let mut hi = Rational::one();
        let half = Rational::new(1, 2);
        for _ in 0..10_000 {
            // interval evaluation: δ^k ∈ [lo^k, hi^k] since δ > 0
            let mut sum_lo = Rational::zero();
            let mut sum_hi = Rational::zero();
            let mut lo_pow = Rational::one();
            let mut hi_pow = Rational::one();
            for c in &self.coeffs {
                if c.is_positive() {
                    sum_lo += c * &lo_pow;
                    sum_hi += c * &hi_pow;
                } else if c.is_negative() {
                    sum_lo += c * &hi_pow;
                    sum_hi += c * &lo_pow;
                }
                lo_pow = &lo_pow * &lo;
                hi_pow = &hi_pow * &hi;
            }
            if sum_lo.is_positive() {
                return 1;
            }
            if sum_hi.is_negative() {
                return -1;
            }
            let mid = (&lo + &hi) * half.clone();
            if (mid.pow(self.modulus() as u32) - half.clone()).is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        unreachable!("interval refinement failed to separate a nonzero value from 0")
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl PartialOrd for DiscountedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DiscountedValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sub(other).sign() {
            0 => Ordering::Equal,
            s if s > 0 => Ordering::Greater,
            _ => Ordering::Less,
        }
    }
}

impl fmt::Display for DiscountedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})d")?,
                _ => write!(f, "({c})d^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// --- dense polynomial helpers (coefficients low to high, trimmed) ---

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(Rational::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] = out[i].clone() + x.clone();
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = &out[i] - y;
    }
    trim(&mut out);
    out
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    assert!(!b.is_empty());
    let mut rem = a.to_vec();
    if a.len() < b.len() {
        return (vec![], rem);
    }
    let mut quot = vec![Rational::zero(); a.len() - b.len() + 1];
    let lead = b.last().unwrap().recip();
    for k in (0..quot.len()).rev() {
        let coef = &rem[k + b.len() - 1] * &lead;
        if coef.is_zero() {
            continue;
        }
        quot[k] = coef.clone();
        for (j, y) in b.iter().enumerate() {
            rem[k + j] = &rem[k + j] - &(&coef * y);
        }
    }
    trim(&mut rem);
    let mut quot = quot;
    trim(&mut quot);
    (quot, rem)
}
