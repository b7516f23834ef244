//! Exact arithmetic in the cyclotomic field `Q(zeta_N)`.
//!
//! Elements are stored in the power basis `1, z, ..., z^(phi(N)-1)` of
//! `Q[x]/Phi_N(x)` as an integer numerator vector over one positive common
//! denominator. The representation is canonical, so two elements of the same
//! level are equal exactly when their stored fields are equal.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Euler's totient.
pub fn euler_phi(n: u32) -> usize {
    assert!(n >= 1, "euler_phi(0)");
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

/// Per-level data: the modulus `Phi_N` and the reductions of `x^t` for small `t`.
#[derive(Debug)]
pub(crate) struct FieldData {
    pub(crate) phi: usize,
    /// `Phi_N`, lowest degree first, monic.
    pub(crate) modulus: Vec<i64>,
    /// `powers[t]` is `x^t mod Phi_N` for `t < max(N, 2 phi - 1)`.
    pub(crate) powers: Vec<Vec<i64>>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // den is monic
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

fn field_cache() -> &'static RwLock<HashMap<u32, Arc<FieldData>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<FieldData>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn field_data(level: u32) -> Arc<FieldData> {
    assert!(level >= 1, "cyclotomic level must be positive");
    if let Some(fd) = field_cache().read().unwrap().get(&level) {
        return fd.clone();
    }
    let modulus = compute_cyclotomic(level);
    let phi = modulus.len() - 1;
    let count = (level as usize).max(2 * phi - 1).max(1);
    let mut powers = Vec::with_capacity(count);
    let mut cur = vec![0i64; phi];
    cur[0] = 1;
    for _ in 0..count {
        powers.push(cur.clone());
        // multiply by x and reduce
        let top = cur[phi - 1];
        for i in (1..phi).rev() {
            cur[i] = cur[i - 1] - top * modulus[i];
        }
        cur[0] = -top * modulus[0];
    }
    let fd = Arc::new(FieldData {
        phi,
        modulus,
        powers,
    });
    field_cache()
        .write()
        .unwrap()
        .entry(level)
        .or_insert(fd)
        .clone()
}

fn compute_cyclotomic(n: u32) -> Vec<i64> {
    let mut p = vec![0i64; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let fd = field_data(d);
            p = poly_div_exact(&p, &fd.modulus);
        }
    }
    p
}

/// The `n`-th cyclotomic polynomial, coefficients lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    field_data(n).modulus.clone()
}

/// An element of `Q(zeta_N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicNumber {
    level: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CyclotomicNumber {
    pub fn zero(level: u32) -> Self {
        let phi = field_data(level).phi;
        CyclotomicNumber {
            level,
            num: vec![BigInt::zero(); phi],
            den: BigInt::one(),
        }
    }

    pub fn one(level: u32) -> Self {
        Self::from_integer(level, 1)
    }

    pub fn from_integer(level: u32, n: i64) -> Self {
        let mut x = Self::zero(level);
        x.num[0] = BigInt::from(n);
        x
    }

    pub fn from_rational(level: u32, r: &Rational) -> Self {
        let mut x = Self::zero(level);
        x.num[0] = r.numer().clone();
        x.den = r.denom().clone();
        x.normalize();
        x
    }

    /// `zeta_N^k` for any integer `k`.
    pub fn zeta_power(level: u32, k: i64) -> Self {
        let fd = field_data(level);
        let e = k.rem_euclid(level as i64) as usize;
        CyclotomicNumber {
            level,
            num: fd.powers[e].iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }

    /// Builds `sum coeffs[i] * zeta^i`, reducing modulo `Phi_N`; `coeffs` may be
    /// of any length.
    pub fn from_coeffs(level: u32, coeffs: &[Rational]) -> Self {
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let scaled: Vec<BigInt> = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Self::from_int_poly(level, &scaled, den)
    }

    /// Builds `(sum num[i] * zeta^i) / den`, reducing modulo `Phi_N`.
    pub fn from_int_poly(level: u32, num: &[BigInt], den: BigInt) -> Self {
        if den.is_zero() {
            panic!("zero denominator");
        }
        let fd = field_data(level);
        let reduced = reduce_bigint(&fd, num);
        let mut x = CyclotomicNumber {
            level,
            num: reduced,
            den,
        };
        x.normalize();
        x
    }

    /// Builds from an already reduced integer vector of length `phi(N)`.
    pub(crate) fn from_reduced_parts(level: u32, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut x = CyclotomicNumber { level, num, den };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
            return;
        }
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        if !g.is_one() {
            self.den = &self.den / &g;
            for c in self.num.iter_mut() {
                if !c.is_zero() {
                    *c = &*c / &g;
                }
            }
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Coordinate `i` in the power basis.
    pub fn coeff(&self, i: usize) -> Rational {
        Rational::new(self.num[i].clone(), self.den.clone())
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        (0..self.num.len()).map(|i| self.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeff(0))
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self.add_unchecked(other, false))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self.add_unchecked(other, true))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        Ok(self.mul_unchecked(&other.inverse()?))
    }

    fn add_unchecked(&self, other: &Self, negate: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { -other } else { other.clone() };
        }
        let (num, den) = if self.den == other.den {
            let num = self
                .num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| if negate { a - b } else { a + b })
                .collect();
            (num, self.den.clone())
        } else {
            let num = self
                .num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| {
                    let l = a * &other.den;
                    let r = b * &self.den;
                    if negate {
                        l - r
                    } else {
                        l + r
                    }
                })
                .collect();
            (num, &self.den * &other.den)
        };
        Self::from_reduced_parts(self.level, num, den)
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.level);
        }
        let phi = self.num.len();
        let mut prod = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let fd = field_data(self.level);
        let num = reduce_bigint(&fd, &prod);
        Self::from_reduced_parts(self.level, num, &self.den * &other.den)
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() || self.is_zero() {
            return Self::zero(self.level);
        }
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        Self::from_reduced_parts(self.level, num, &self.den * r.denom())
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&Rational::from_integer(BigInt::from(k)))
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let fd = field_data(self.level);
        let phi = fd.phi;
        if self.is_rational() {
            let r = self.coeff(0).recip();
            return Ok(Self::from_rational(self.level, &r));
        }
        // Columns of the multiplication-by-num matrix: num * x^j mod Phi.
        let base = CyclotomicNumber {
            level: self.level,
            num: self.num.clone(),
            den: BigInt::one(),
        };
        let mut mat: Vec<Vec<Rational>> = vec![vec![Rational::zero(); phi + 1]; phi];
        for j in 0..phi {
            let col = base.mul_unchecked(&Self::zeta_power(self.level, j as i64));
            for i in 0..phi {
                mat[i][j] = col.coeff(i);
            }
        }
        mat[0][phi] = Rational::one();
        let sol = solve_dense(mat).ok_or(Error::DivisionByZero)?;
        let inv_num = Self::from_coeffs(self.level, &sol);
        Ok(inv_num.scale(&Rational::from_integer(self.den.clone())))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one(self.level);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        Ok(acc)
    }

    /// Complex conjugation, `zeta_N -> zeta_N^(N-1)`.
    pub fn conjugate(&self) -> Self {
        let fd = field_data(self.level);
        let n = self.level as usize;
        let mut out = vec![BigInt::zero(); fd.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (n - i % n) % n;
            for (k, &t) in fd.powers[e].iter().enumerate() {
                if t != 0 {
                    out[k] += c * t;
                }
            }
        }
        Self::from_reduced_parts(self.level, out, self.den.clone())
    }

    /// Re-expresses the element at a level divisible by the current one.
    pub fn coerce_up(&self, target_level: u32) -> Result<Self> {
        if !target_level.is_multiple_of(self.level) {
            return Err(Error::NotDivisible {
                from: self.level,
                to: target_level,
            });
        }
        if target_level == self.level {
            return Ok(self.clone());
        }
        let r = (target_level / self.level) as usize;
        let fd = field_data(target_level);
        let mut out = vec![BigInt::zero(); fd.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, &t) in fd.powers[r * i].iter().enumerate() {
                if t != 0 {
                    out[k] += c * t;
                }
            }
        }
        Ok(Self::from_reduced_parts(target_level, out, self.den.clone()))
    }

    /// Value under `zeta_N -> exp(2 pi i / N)`.
    pub fn complex_embed(&self) -> Complex64 {
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let step = std::f64::consts::TAU / self.level as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = ratio_to_f64(c, &self.den).unwrap_or_else(|| c.to_f64().unwrap() / den);
            acc += Complex64::from_polar(v, step * i as f64);
        }
        acc
    }

    /// Parses the textual form produced by `Display` at the given level.
    pub fn parse(s: &str, level: u32) -> Result<Self> {
        let s = s.trim();
        let s = match s.find("(z =") {
            Some(idx) => s[..idx].trim(),
            None => s,
        };
        if s.is_empty() {
            return Err(Error::Parse("empty cyclotomic number".into()));
        }
        let mut coeffs: Vec<Rational> = Vec::new();
        for term in s.split(" + ") {
            let term = term.trim();
            let (coef, power) = parse_term(term)?;
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Rational::zero());
            }
            coeffs[power] += coef;
        }
        Ok(Self::from_coeffs(level, &coeffs))
    }
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> Option<f64> {
    let nf = n.to_f64()?;
    let df = d.to_f64()?;
    if nf.is_finite() && df.is_finite() && df != 0.0 {
        Some(nf / df)
    } else {
        None
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

fn parse_term(term: &str) -> Result<(Rational, usize)> {
    let (coef_str, var) = match term.split_once('*') {
        Some((c, v)) => (c, Some(v)),
        None if term.ends_with('z') || term.contains("z^") => {
            let idx = term.find('z').unwrap();
            (&term[..idx], Some(&term[idx..]))
        }
        None => (term, None),
    };
    let coef = match coef_str.trim() {
        "" => Rational::one(),
        "-" => -Rational::one(),
        c => parse_rational(c)?,
    };
    let power = match var.map(str::trim) {
        None => 0,
        Some("z") => 1,
        Some(v) => {
            let e = v
                .strip_prefix("z^")
                .ok_or_else(|| Error::Parse(format!("bad monomial '{v}'")))?;
            e.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad exponent '{e}'")))?
        }
    };
    Ok((coef, power))
}

/// Reduces an integer polynomial of any length modulo `Phi_N`.
pub(crate) fn reduce_bigint(fd: &FieldData, poly: &[BigInt]) -> Vec<BigInt> {
    let phi = fd.phi;
    let mut work: Vec<BigInt> = poly.to_vec();
    if work.len() < phi {
        work.resize(phi, BigInt::zero());
        return work;
    }
    for i in (phi..work.len()).rev() {
        if work[i].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut work[i]);
        for j in 0..phi {
            let m = fd.modulus[j];
            if m != 0 {
                work[i - phi + j] -= &c * m;
            }
        }
    }
    work.truncate(phi);
    work
}

/// Gaussian elimination on an augmented `n x (n+1)` rational system.
pub(crate) fn solve_dense(mut mat: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = mat.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot);
        let inv = mat[col][col].recip();
        for v in mat[col].iter_mut().skip(col) {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..=n {
                    let t = &mat[col][c] * &f;
                    mat[r][c] -= t;
                }
            }
        }
    }
    Some(mat.into_iter().map(|row| row[n].clone()).collect())
}

fn fmt_rational(n: &BigInt, d: &BigInt) -> String {
    let g = n.gcd(d);
    let (n, d) = (n / &g, d / &g);
    if d.is_one() {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let r = fmt_rational(c, &self.den);
            match i {
                0 => write!(f, "{r}")?,
                1 => write!(f, "{r}*z")?,
                _ => write!(f, "{r}*z^{i}")?,
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&CyclotomicNumber> for &CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
                self.$checked(rhs).expect("cyclotomic level mismatch")
            }
        }
        impl $tr<CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: CyclotomicNumber) -> CyclotomicNumber {
                (&self).$checked(&rhs).expect("cyclotomic level mismatch")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber {
            level: self.level,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn brute_poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn product_of_cyclotomic_polynomials_is_x_n_minus_one() {
        for n in 1..=40u32 {
            let mut acc = vec![1i64];
            for d in (1..=n).filter(|d| n % d == 0) {
                acc = brute_poly_mul(&acc, &cyclotomic_polynomial(d));
            }
            let mut expected = vec![0i64; n as usize + 1];
            expected[0] = -1;
            expected[n as usize] = 1;
            assert_eq!(acc, expected, "n = {n}");
            assert_eq!(cyclotomic_polynomial(n).len() - 1, euler_phi(n));
        }
    }

    #[test]
    fn zeta4_squared_is_minus_one() {
        let z = CyclotomicNumber::zeta_power(4, 1);
        assert_eq!(&z * &z, CyclotomicNumber::from_integer(4, -1));
    }

    #[test]
    fn inverse_of_zeta3_minus_one() {
        let one = CyclotomicNumber::one(3);
        let z = CyclotomicNumber::zeta_power(3, 1);
        let z2 = CyclotomicNumber::zeta_power(3, 2);
        // (z - 1)(z^2 - 1) = 3 by expansion mod Phi_3
        assert_eq!(
            (&z - &one) * (&z2 - &one),
            CyclotomicNumber::from_integer(3, 3)
        );
        let expected = (&z2 - &one).scale(&q(1, 3));
        assert_eq!((&z - &one).inverse().unwrap(), expected);
    }

    #[test]
    fn division_by_zero_and_level_mismatch_are_errors() {
        let zero = CyclotomicNumber::zero(5);
        assert_eq!(zero.inverse(), Err(Error::DivisionByZero));
        let a = CyclotomicNumber::one(5);
        assert_eq!(a.try_div(&zero), Err(Error::DivisionByZero));
        let b = CyclotomicNumber::one(7);
        assert!(matches!(a.try_add(&b), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(
            CyclotomicNumber::zeta_power(5, 1).conjugate(),
            CyclotomicNumber::zeta_power(5, 4)
        );
        let r = CyclotomicNumber::from_rational(9, &q(2, 3));
        assert_eq!(r.conjugate(), r);
    }

    #[test]
    fn coercion_examples() {
        let z3 = CyclotomicNumber::zeta_power(3, 1);
        assert_eq!(z3.coerce_up(6).unwrap(), CyclotomicNumber::zeta_power(6, 2));
        let five = CyclotomicNumber::from_integer(2, 5);
        assert_eq!(five.coerce_up(8).unwrap(), CyclotomicNumber::from_integer(8, 5));
        assert!(matches!(z3.coerce_up(8), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn embedding_examples() {
        let i = CyclotomicNumber::zeta_power(4, 1).complex_embed();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let s = (CyclotomicNumber::zeta_power(3, 1) + CyclotomicNumber::zeta_power(3, 2))
            .complex_embed();
        assert!((s - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn display_and_parse() {
        let x = CyclotomicNumber::from_coeffs(5, &[q(1, 2), q(-3, 1), q(0, 1), q(5, 7)]);
        let s = x.to_string();
        assert_eq!(s, "1/2 + -3*z + 5/7*z^3");
        assert_eq!(CyclotomicNumber::parse(&s, 5).unwrap(), x);
        assert_eq!(CyclotomicNumber::parse("0", 5).unwrap(), CyclotomicNumber::zero(5));
        assert_eq!(
            CyclotomicNumber::parse("z^4 (z = zeta_5)", 5).unwrap(),
            CyclotomicNumber::zeta_power(5, 4)
        );
    }

    fn arb_cyc(level: u32) -> impl Strategy<Value = CyclotomicNumber> {
        let phi = euler_phi(level);
        prop::collection::vec((-20i64..20, 1i64..6), phi).prop_map(move |v| {
            let coeffs: Vec<Rational> = v.into_iter().map(|(n, d)| q(n, d)).collect();
            CyclotomicNumber::from_coeffs(level, &coeffs)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn additive_identity(x in arb_cyc(12)) {
            prop_assert_eq!(&x + &CyclotomicNumber::zero(12), x);
        }

        #[test]
        fn field_axioms(x in arb_cyc(12), y in arb_cyc(12), z in arb_cyc(12)) {
            prop_assert_eq!((&x * &y) * z.clone(), &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            if !x.is_zero() {
                prop_assert!((&x * &x.inverse().unwrap()).is_one());
            }
        }

        #[test]
        fn conjugation_is_an_involutive_homomorphism(x in arb_cyc(15), y in arb_cyc(15)) {
            prop_assert_eq!(x.conjugate().conjugate(), x.clone());
            prop_assert_eq!((&x * &y).conjugate(), &x.conjugate() * &y.conjugate());
            prop_assert_eq!((&x + &y).conjugate(), &x.conjugate() + &y.conjugate());
        }

        #[test]
        fn coercion_is_an_injective_homomorphism(x in arb_cyc(6), y in arb_cyc(6)) {
            let up = |a: &CyclotomicNumber| a.coerce_up(24).unwrap();
            prop_assert_eq!(up(&(&x * &y)), &up(&x) * &up(&y));
            prop_assert_eq!(up(&(&x + &y)), &up(&x) + &up(&y));
            prop_assert_eq!(up(&x) == up(&y), x == y);
            let d = x.complex_embed() - up(&x).complex_embed();
            prop_assert!(d.norm() < 1e-12 * (1.0 + x.complex_embed().norm()));
        }

        #[test]
        fn embedding_is_a_homomorphism(x in arb_cyc(7), y in arb_cyc(7)) {
            let lhs = (&x * &y).complex_embed();
            let rhs = x.complex_embed() * y.complex_embed();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn text_round_trip(x in arb_cyc(9)) {
            prop_assert_eq!(CyclotomicNumber::parse(&x.to_string(), 9).unwrap(), x);
        }
    }
}
