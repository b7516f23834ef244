//! Truncated power series in `q_L = exp(2 pi i z / L)` over `Q(zeta_L)`,
//! expressions carrying a formal polar unit, and polynomials in formal `a, b`
//! with expression coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::cyclotomic::{field_data, CyclotomicNumber, Rational};
use crate::error::{Error, Result};

/// Index of `Gamma(M)` in `SL(2, Z)`.
pub fn gamma_index(m: u32) -> u64 {
    match m {
        0 => panic!("level 0"),
        1 => 1,
        2 => 6,
        _ => {
            let m64 = m as u64;
            let mut num = m64 * m64 * m64;
            let mut n = m;
            let mut p = 2;
            while p * p <= n {
                if n.is_multiple_of(p) {
                    while n.is_multiple_of(p) {
                        n /= p;
                    }
                    let p2 = (p as u64) * (p as u64);
                    num = num / p2 * (p2 - 1);
                }
                p += 1;
            }
            if n > 1 {
                let p2 = (n as u64) * (n as u64);
                num = num / p2 * (p2 - 1);
            }
            num
        }
    }
}

/// `ceil(k * [SL2(Z) : Gamma(M)] / 12)`.
pub fn sturm_bound(k: i64, m: u32) -> usize {
    let k = k.max(0) as u64;
    (k * gamma_index(m)).div_ceil(12) as usize
}

/// Default working precision `2 * sturm + 10` in `q_M`.
pub fn default_prec(k: i64, m: u32) -> usize {
    2 * sturm_bound(k, m) + 10
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    level: u32,
    prec: usize,
    coeffs: Vec<CyclotomicNumber>,
}

impl QSeries {
    pub fn zero(level: u32, prec: usize) -> Self {
        QSeries {
            level,
            prec,
            coeffs: vec![CyclotomicNumber::zero(level); prec],
        }
    }

    pub fn constant(c: CyclotomicNumber, prec: usize) -> Self {
        let level = c.level();
        let mut s = Self::zero(level, prec);
        if prec > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn one(level: u32, prec: usize) -> Self {
        Self::constant(CyclotomicNumber::one(level), prec)
    }

    pub fn from_coeffs(level: u32, coeffs: Vec<CyclotomicNumber>) -> Result<Self> {
        for c in &coeffs {
            if c.level() != level {
                return Err(Error::LevelMismatch {
                    left: level,
                    right: c.level(),
                });
            }
        }
        Ok(QSeries {
            level,
            prec: coeffs.len(),
            coeffs,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn coeffs(&self) -> &[CyclotomicNumber] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &CyclotomicNumber {
        &self.coeffs[n]
    }

    pub fn set_coeff(&mut self, n: usize, c: CyclotomicNumber) {
        assert_eq!(c.level(), self.level, "coefficient level");
        self.coeffs[n] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, prec: usize) -> Self {
        let prec = prec.min(self.prec);
        QSeries {
            level: self.level,
            prec,
            coeffs: self.coeffs[..prec].to_vec(),
        }
    }

    /// Index of the first coefficient where the two series differ, compared up
    /// to their shared precision.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        let p = self.prec.min(other.prec);
        (0..p).find(|&n| self.coeffs[n] != other.coeffs[n])
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.level == other.level && self.first_difference(other).is_none()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        let coeffs = (0..prec)
            .map(|n| &self.coeffs[n] + &other.coeffs[n])
            .collect();
        Ok(QSeries {
            level: self.level,
            prec,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        let coeffs = (0..prec)
            .map(|n| &self.coeffs[n] - &other.coeffs[n])
            .collect();
        Ok(QSeries {
            level: self.level,
            prec,
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        QSeries {
            level: self.level,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &CyclotomicNumber) -> Result<Self> {
        if c.level() != self.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: c.level(),
            });
        }
        if c.is_one() {
            return Ok(self.clone());
        }
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Ok(QSeries {
            level: self.level,
            prec: self.prec,
            coeffs,
        })
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        QSeries {
            level: self.level,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|x| x.scale(r)).collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale_rational(&Rational::from_integer(BigInt::from(k)))
    }

    /// Cauchy product truncated at the smaller precision.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.level, prec));
        }
        Ok(mul_series(self, other, prec))
    }

    /// Re-expands in `q_target` where `q_level = q_target^(target/level)`.
    pub fn level_lift(&self, target_level: u32) -> Result<Self> {
        if !target_level.is_multiple_of(self.level) {
            return Err(Error::NotDivisible {
                from: self.level,
                to: target_level,
            });
        }
        let r = (target_level / self.level) as usize;
        let mut out = Self::zero(target_level, self.prec * r);
        for (n, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[n * r] = c.coerce_up(target_level)?;
            }
        }
        Ok(out)
    }

    /// Numerical value of the truncated series at `z` in the upper half plane.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let q = (Complex64::new(0.0, std::f64::consts::TAU) * z / self.level as f64).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * q + c.complex_embed();
        }
        acc
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("series: {m}"));
        let (head, body) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let mut level = None;
        let mut prec = None;
        for kv in head.split_whitespace() {
            match kv.split_once('=') {
                Some(("level", v)) => level = v.parse::<u32>().ok(),
                Some(("prec", v)) => prec = v.parse::<usize>().ok(),
                _ => return Err(bad("bad header")),
            }
        }
        let level = level.ok_or_else(|| bad("missing level"))?;
        let prec = prec.ok_or_else(|| bad("missing prec"))?;
        if level == 0 {
            return Err(bad("level 0"));
        }
        let mut out = Self::zero(level, prec);
        let body = body.trim();
        if body == "0" || body.is_empty() {
            return Ok(out);
        }
        for term in split_top_level(body) {
            let term = term.trim();
            let (coef, exp) = if let Some(idx) = term.rfind("*q") {
                let rest = &term[idx + 2..];
                let e = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .and_then(|e| e.parse::<usize>().ok())
                        .ok_or_else(|| bad("bad exponent"))?
                };
                (&term[..idx], e)
            } else if term == "q" {
                ("1", 1)
            } else if let Some(e) = term.strip_prefix("q^") {
                ("1", e.parse::<usize>().map_err(|_| bad("bad exponent"))?)
            } else {
                (term, 0)
            };
            let coef = coef.trim();
            let coef = coef
                .strip_prefix('(')
                .and_then(|c| c.strip_suffix(')'))
                .unwrap_or(coef);
            if exp >= prec {
                return Err(bad("exponent beyond precision"));
            }
            let c = CyclotomicNumber::parse(coef, level)?;
            out.coeffs[exp] = &out.coeffs[exp] + &c;
        }
        Ok(out)
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b' ' if depth == 0 && s[i..].starts_with(" + ") => {
                parts.push(&s[start..i]);
                start = i + 3;
                i += 3;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    parts.push(&s[start..]);
    parts
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level={} prec={} : ", self.level, self.prec)?;
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = c.to_string();
            let cs = if cs.contains(' ') { format!("({cs})") } else { cs };
            match n {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "{cs}*q")?,
                _ => write!(f, "{cs}*q^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Writes the series with one common denominator: returns `(den, flat)` where
/// `flat[n * phi + i]` is the scaled numerator of coordinate `i` of `q^n`.
fn to_int_form(s: &QSeries, prec: usize) -> (BigInt, Vec<BigInt>) {
    let mut den = BigInt::one();
    for c in &s.coeffs[..prec] {
        if !c.is_zero() && !c.denominator().is_one() {
            den = den.lcm(c.denominator());
        }
    }
    let phi = field_data(s.level).phi;
    let mut flat = Vec::with_capacity(prec * phi);
    for c in &s.coeffs[..prec] {
        if c.is_zero() {
            flat.extend(std::iter::repeat_n(BigInt::zero(), phi));
        } else if c.denominator() == &den {
            flat.extend(c.numerators().iter().cloned());
        } else {
            let f = &den / c.denominator();
            flat.extend(c.numerators().iter().map(|x| x * &f));
        }
    }
    (den, flat)
}

fn max_bits(v: &[BigInt]) -> u64 {
    v.iter().map(|x| x.bits()).max().unwrap_or(0)
}

fn bits_of(x: u64) -> u64 {
    64 - x.leading_zeros() as u64
}

fn mul_series(x: &QSeries, y: &QSeries, prec: usize) -> QSeries {
    let level = x.level;
    let fd = field_data(level);
    let phi = fd.phi;
    let (dx, fx) = to_int_form(x, prec);
    let (dy, fy) = to_int_form(y, prec);
    let den = &dx * &dy;
    let table_max = fd.powers[..2 * phi - 1]
        .iter()
        .flat_map(|r| r.iter())
        .map(|c| c.unsigned_abs())
        .max()
        .unwrap_or(1)
        .max(1);
    let growth = bits_of(prec as u64 * phi as u64 * (2 * phi as u64) * table_max);
    let nz_x: Vec<bool> = (0..prec).map(|n| !x.coeffs[n].is_zero()).collect();
    let nz_y: Vec<bool> = (0..prec).map(|n| !y.coeffs[n].is_zero()).collect();
    let mut coeffs = Vec::with_capacity(prec);
    if max_bits(&fx) + max_bits(&fy) + growth + 2 < 127 {
        let ix: Vec<i128> = fx.iter().map(|v| v.to_i128().unwrap()).collect();
        let iy: Vec<i128> = fy.iter().map(|v| v.to_i128().unwrap()).collect();
        let mut acc = vec![0i128; 2 * phi - 1];
        let mut out = vec![0i128; phi];
        for n in 0..prec {
            acc.iter_mut().for_each(|v| *v = 0);
            let mut any = false;
            for i in 0..=n {
                if !nz_x[i] || !nz_y[n - i] {
                    continue;
                }
                any = true;
                let xs = &ix[i * phi..(i + 1) * phi];
                let ys = &iy[(n - i) * phi..(n - i + 1) * phi];
                for (a, &xa) in xs.iter().enumerate() {
                    if xa == 0 {
                        continue;
                    }
                    for (b, &yb) in ys.iter().enumerate() {
                        acc[a + b] += xa * yb;
                    }
                }
            }
            if !any {
                coeffs.push(CyclotomicNumber::zero(level));
                continue;
            }
            out.copy_from_slice(&acc[..phi]);
            for t in phi..2 * phi - 1 {
                let v = acc[t];
                if v != 0 {
                    for (k, &r) in fd.powers[t].iter().enumerate() {
                        out[k] += v * r as i128;
                    }
                }
            }
            let num = out.iter().map(|&v| BigInt::from(v)).collect();
            coeffs.push(CyclotomicNumber::from_reduced_parts(level, num, den.clone()));
        }
    } else {
        let mut acc = vec![BigInt::zero(); 2 * phi - 1];
        for n in 0..prec {
            acc.iter_mut().for_each(|v| v.set_zero());
            let mut any = false;
            for i in 0..=n {
                if !nz_x[i] || !nz_y[n - i] {
                    continue;
                }
                any = true;
                for a in 0..phi {
                    let xa = &fx[i * phi + a];
                    if xa.is_zero() {
                        continue;
                    }
                    for b in 0..phi {
                        let yb = &fy[(n - i) * phi + b];
                        if !yb.is_zero() {
                            acc[a + b] += xa * yb;
                        }
                    }
                }
            }
            if !any {
                coeffs.push(CyclotomicNumber::zero(level));
                continue;
            }
            let mut out: Vec<BigInt> = acc[..phi].to_vec();
            for t in phi..2 * phi - 1 {
                if acc[t].is_zero() {
                    continue;
                }
                for (k, &r) in fd.powers[t].iter().enumerate() {
                    if r != 0 {
                        out[k] += &acc[t] * r;
                    }
                }
            }
            coeffs.push(CyclotomicNumber::from_reduced_parts(level, out, den.clone()));
        }
    }
    QSeries {
        level,
        prec,
        coeffs,
    }
}

/// A weighted function `hol + u * polar + u^2 * polar2`, where `u` is the
/// formal polar unit shared by all weight-2 Eisenstein series.
///
/// `polar2` only becomes nonzero through [`ModularExpression::mul_tracking`];
/// the strict product rejects it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularExpression {
    pub hol: QSeries,
    pub polar: QSeries,
    pub polar2: QSeries,
    pub weight: i64,
    pub meta: String,
}

impl ModularExpression {
    pub fn zero(level: u32, prec: usize, weight: i64) -> Self {
        let z = QSeries::zero(level, prec);
        ModularExpression {
            hol: z.clone(),
            polar: z.clone(),
            polar2: z,
            weight,
            meta: String::new(),
        }
    }

    pub fn holomorphic(hol: QSeries, weight: i64) -> Self {
        let z = QSeries::zero(hol.level(), hol.prec());
        ModularExpression {
            hol,
            polar: z.clone(),
            polar2: z,
            weight,
            meta: String::new(),
        }
    }

    pub fn with_polar(hol: QSeries, polar: QSeries, weight: i64) -> Result<Self> {
        if hol.level() != polar.level() {
            return Err(Error::LevelMismatch {
                left: hol.level(),
                right: polar.level(),
            });
        }
        let prec = hol.prec().min(polar.prec());
        let hol = hol.truncate(prec);
        let polar = polar.truncate(prec);
        Ok(ModularExpression {
            polar2: QSeries::zero(hol.level(), prec),
            hol,
            polar,
            weight,
            meta: String::new(),
        })
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }

    pub fn level(&self) -> u32 {
        self.hol.level()
    }

    pub fn prec(&self) -> usize {
        self.hol.prec()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.polar.is_zero() && self.polar2.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.hol.is_zero() && self.is_holomorphic()
    }

    pub fn truncate(&self, prec: usize) -> Self {
        ModularExpression {
            hol: self.hol.truncate(prec),
            polar: self.polar.truncate(prec),
            polar2: self.polar2.truncate(prec),
            weight: self.weight,
            meta: self.meta.clone(),
        }
    }

    fn check_weight(&self, other: &Self) -> Result<()> {
        if self.weight != other.weight {
            return Err(Error::WeightMismatch {
                left: self.weight,
                right: other.weight,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_weight(other)?;
        Ok(ModularExpression {
            hol: self.hol.add(&other.hol)?,
            polar: self.polar.add(&other.polar)?,
            polar2: self.polar2.add(&other.polar2)?,
            weight: self.weight,
            meta: String::new(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_weight(other)?;
        Ok(ModularExpression {
            hol: self.hol.sub(&other.hol)?,
            polar: self.polar.sub(&other.polar)?,
            polar2: self.polar2.sub(&other.polar2)?,
            weight: self.weight,
            meta: String::new(),
        })
    }

    pub fn neg(&self) -> Self {
        ModularExpression {
            hol: self.hol.neg(),
            polar: self.polar.neg(),
            polar2: self.polar2.neg(),
            weight: self.weight,
            meta: String::new(),
        }
    }

    pub fn scale(&self, c: &CyclotomicNumber) -> Result<Self> {
        Ok(ModularExpression {
            hol: self.hol.scale(c)?,
            polar: self.polar.scale(c)?,
            polar2: self.polar2.scale(c)?,
            weight: self.weight,
            meta: String::new(),
        })
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        ModularExpression {
            hol: self.hol.scale_rational(r),
            polar: self.polar.scale_rational(r),
            polar2: self.polar2.scale_rational(r),
            weight: self.weight,
            meta: String::new(),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale_rational(&Rational::from_integer(BigInt::from(k)))
    }

    /// Product keeping `u` linear; a surviving `u^2` term is an error.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let out = self.mul_tracking(other)?;
        if !out.polar2.is_zero() {
            return Err(Error::NonholomorphicSquare);
        }
        Ok(out)
    }

    /// Product that records a `u^2` term instead of rejecting it. Terms of
    /// order `u^3` and higher are still rejected.
    pub fn mul_tracking(&self, other: &Self) -> Result<Self> {
        let level = self.level();
        if level != other.level() {
            return Err(Error::LevelMismatch {
                left: level,
                right: other.level(),
            });
        }
        let prec = self.prec().min(other.prec());
        let zero = QSeries::zero(level, prec);
        let prod = |x: &QSeries, y: &QSeries| -> Result<QSeries> {
            if x.is_zero() || y.is_zero() {
                Ok(zero.clone())
            } else {
                x.mul(y)
            }
        };
        let hol = prod(&self.hol, &other.hol)?;
        let polar = prod(&self.hol, &other.polar)?.add(&prod(&self.polar, &other.hol)?)?;
        let polar2 = prod(&self.hol, &other.polar2)?
            .add(&prod(&self.polar, &other.polar)?)?
            .add(&prod(&self.polar2, &other.hol)?)?;
        let higher = !(self.polar2.is_zero() || other.polar.is_zero() && other.polar2.is_zero())
            || !(other.polar2.is_zero() || self.polar.is_zero());
        if higher {
            let u3 = prod(&self.polar, &other.polar2)?
                .add(&prod(&self.polar2, &other.polar)?)?;
            if !u3.is_zero() || !prod(&self.polar2, &other.polar2)?.is_zero() {
                return Err(Error::NonholomorphicSquare);
            }
        }
        Ok(ModularExpression {
            hol,
            polar,
            polar2,
            weight: self.weight + other.weight,
            meta: String::new(),
        })
    }

    pub fn level_lift(&self, target_level: u32) -> Result<Self> {
        Ok(ModularExpression {
            hol: self.hol.level_lift(target_level)?,
            polar: self.polar.level_lift(target_level)?,
            polar2: self.polar2.level_lift(target_level)?,
            weight: self.weight,
            meta: self.meta.clone(),
        })
    }

    /// Exact equality up to the shared precision, polar parts included.
    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.weight == other.weight
            && self.hol.eq_to_prec(&other.hol)
            && self.polar.eq_to_prec(&other.polar)
            && self.polar2.eq_to_prec(&other.polar2)
    }
}

impl fmt::Display for ModularExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hol)?;
        if !self.polar.is_zero() {
            write!(f, "\npolar: {}", self.polar)?;
        }
        if !self.polar2.is_zero() {
            write!(f, "\npolar^2: {}", self.polar2)?;
        }
        Ok(())
    }
}

/// Binomial coefficient as a `BigInt`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Polynomial in formal `a, b` of total degree at most `w` with
/// [`ModularExpression`] coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivarPoly {
    w: usize,
    terms: Vec<((usize, usize), ModularExpression)>,
}

impl BivarPoly {
    pub fn zero(w: usize, level: u32, prec: usize, weight: i64) -> Self {
        let mut terms = Vec::new();
        for i in 0..=w {
            for j in 0..=(w - i) {
                terms.push(((i, j), ModularExpression::zero(level, prec, weight)));
            }
        }
        BivarPoly { w, terms }
    }

    fn pos(&self, i: usize, j: usize) -> usize {
        // row i starts after sum_{i' < i} (w - i' + 1) entries
        i * (2 * self.w + 3 - i) / 2 + j
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn level(&self) -> u32 {
        self.terms[0].1.level()
    }

    pub fn prec(&self) -> usize {
        self.terms[0].1.prec()
    }

    pub fn weight(&self) -> i64 {
        self.terms[0].1.weight
    }

    /// Coefficient of `a^i b^j`.
    pub fn get(&self, i: usize, j: usize) -> &ModularExpression {
        assert!(i + j <= self.w, "monomial degree exceeds w");
        &self.terms[self.pos(i, j)].1
    }

    pub fn set(&mut self, i: usize, j: usize, e: ModularExpression) {
        assert!(i + j <= self.w, "monomial degree exceeds w");
        let p = self.pos(i, j);
        self.terms[p].1 = e;
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &ModularExpression)> {
        self.terms.iter().map(|((i, j), e)| (*i, *j, e))
    }

    /// `coef * a^alpha b^beta c^gamma * e` with `c = -a - b` expanded.
    pub fn from_abc_monomial(
        w: usize,
        alpha: usize,
        beta: usize,
        gamma: usize,
        coef: &Rational,
        e: &ModularExpression,
    ) -> Result<Self> {
        let mut out = Self::zero(w, e.level(), e.prec(), e.weight);
        for (i, j, c) in abc_expand(alpha, beta, gamma) {
            if i + j > w {
                continue;
            }
            let term = e.scale_rational(&(coef * Rational::from_integer(c)));
            let cur = out.get(i, j).add(&term)?;
            out.set(i, j, cur);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.w != other.w {
            return Err(Error::InvalidArgument("bivariate degree mismatch".into()));
        }
        let mut out = self.clone();
        for (k, (_, e)) in other.terms.iter().enumerate() {
            out.terms[k].1 = out.terms[k].1.add(e)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        BivarPoly {
            w: self.w,
            terms: self
                .terms
                .iter()
                .map(|(ij, e)| (*ij, e.neg()))
                .collect(),
        }
    }

    fn product(&self, other: &Self, w: usize, tracking: bool) -> Result<Self> {
        let level = self.level();
        let prec = self.prec().min(other.prec());
        let mut out = Self::zero(w, level, prec, self.weight() + other.weight());
        for (i1, j1, x) in self.terms() {
            if x.is_zero() {
                continue;
            }
            for (i2, j2, y) in other.terms() {
                if y.is_zero() || i1 + i2 + j1 + j2 > w {
                    continue;
                }
                let p = if tracking {
                    x.mul_tracking(y)?
                } else {
                    x.mul(y)?
                };
                let (i, j) = (i1 + i2, j1 + j2);
                let cur = out.get(i, j).add(&p)?;
                out.set(i, j, cur);
            }
        }
        Ok(out)
    }

    /// Product truncated to total degree `w`; `u^2` terms are rejected.
    pub fn mul(&self, other: &Self, w: usize) -> Result<Self> {
        self.product(other, w, false)
    }

    /// Product truncated to total degree `w`, recording `u^2` terms.
    pub fn mul_tracking(&self, other: &Self, w: usize) -> Result<Self> {
        self.product(other, w, true)
    }

    /// Substitutes `a -> p a + q b`, `b -> r a + s b`.
    pub fn linear_substitute(&self, p: i64, q: i64, r: i64, s: i64) -> Result<Self> {
        let mut out = Self::zero(self.w, self.level(), self.prec(), self.weight());
        for (i, j, e) in self.terms() {
            if e.is_zero() {
                continue;
            }
            let left = linear_power(p, q, i);
            let right = linear_power(r, s, j);
            for (x, cx) in left.iter().enumerate() {
                if cx.is_zero() {
                    continue;
                }
                for (y, cy) in right.iter().enumerate() {
                    if cy.is_zero() {
                        continue;
                    }
                    // (p a + q b)^i: index x counts powers of a
                    let ai = x + y;
                    let bj = (i - x) + (j - y);
                    let term = e.scale_rational(&Rational::from_integer(cx * cy));
                    let cur = out.get(ai, bj).add(&term)?;
                    out.set(ai, bj, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn level_lift(&self, target_level: u32) -> Result<Self> {
        Ok(BivarPoly {
            w: self.w,
            terms: self
                .terms
                .iter()
                .map(|(ij, e)| Ok((*ij, e.level_lift(target_level)?)))
                .collect::<Result<_>>()?,
        })
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.iter().all(|(_, e)| e.is_holomorphic())
    }

    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.w == other.w
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((_, x), (_, y))| x.eq_to_prec(y))
    }
}

/// Coefficients of `(p a + q b)^n`, indexed by the power of `a`.
fn linear_power(p: i64, q: i64, n: usize) -> Vec<BigInt> {
    let p = BigInt::from(p);
    let q = BigInt::from(q);
    (0..=n)
        .map(|x| binomial(n as u64, x as u64) * p.pow(x as u32) * q.pow((n - x) as u32))
        .collect()
}

/// Expands `a^alpha b^beta (-a-b)^gamma` into `(i, j, coefficient)` triples.
pub fn abc_expand(alpha: usize, beta: usize, gamma: usize) -> Vec<(usize, usize, BigInt)> {
    let sign = if gamma.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    (0..=gamma)
        .map(|t| {
            (
                alpha + t,
                beta + gamma - t,
                &sign * binomial(gamma as u64, t as u64),
            )
        })
        .collect()
}
