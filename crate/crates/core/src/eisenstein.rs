//! q-expansions of the normalized Eisenstein series `(-2 pi i)^(-l) E_{l,lambda}`
//! on `Gamma(N)` and independent numerical oracles (direct lattice sums and
//! Weierstrass functions).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::cyclotomic::{field_data, CyclotomicNumber, Rational};
use crate::error::{Error, Result};
use crate::qseries::{binomial, ModularExpression, QSeries};

/// `lambda = (c1/N, c2/N)` modulo `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionPoint {
    level: u32,
    c1: u32,
    c2: u32,
}

impl TorsionPoint {
    pub fn new(level: u32, c1: i64, c2: i64) -> Self {
        assert!(level >= 1, "torsion level must be positive");
        let n = level as i64;
        TorsionPoint {
            level,
            c1: c1.rem_euclid(n) as u32,
            c2: c2.rem_euclid(n) as u32,
        }
    }

    pub fn zero(level: u32) -> Self {
        Self::new(level, 0, 0)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn c1(&self) -> u32 {
        self.c1
    }

    pub fn c2(&self) -> u32 {
        self.c2
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == 0 && self.c2 == 0
    }

    pub fn neg(&self) -> Self {
        Self::new(self.level, -(self.c1 as i64), -(self.c2 as i64))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(Self::new(
            self.level,
            self.c1 as i64 + other.c1 as i64,
            self.c2 as i64 + other.c2 as i64,
        ))
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::new(self.level, self.c1 as i64 * k, self.c2 as i64 * k)
    }

    /// The same rational point written at a multiple of its level.
    pub fn at_level(&self, level: u32) -> Result<Self> {
        if !level.is_multiple_of(self.level) {
            return Err(Error::NotDivisible {
                from: self.level,
                to: level,
            });
        }
        let r = (level / self.level) as i64;
        Ok(Self::new(level, self.c1 as i64 * r, self.c2 as i64 * r))
    }

    /// All `N^2` points of level `N`, lexicographic in `(c1, c2)`.
    pub fn all(level: u32) -> Vec<Self> {
        let n = level as i64;
        (0..n)
            .flat_map(|a| (0..n).map(move |b| Self::new(level, a, b)))
            .collect()
    }

    /// `lambda_1 z + lambda_2` for the representative with coordinates in `[0, 1)`.
    pub fn z_lambda(&self, z: Complex64) -> Complex64 {
        let n = self.level as f64;
        z * (self.c1 as f64 / n) + self.c2 as f64 / n
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad torsion point '{s}' (expected c1/N,c2/N)"));
        let (x, y) = s.split_once(',').ok_or_else(bad)?;
        let parse_frac = |t: &str| -> Result<(i64, u32)> {
            let (p, q) = t.trim().split_once('/').ok_or_else(bad)?;
            let p = p.trim().parse::<i64>().map_err(|_| bad())?;
            let q = q.trim().parse::<u32>().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok((p, q))
        };
        let (p1, q1) = parse_frac(x)?;
        let (p2, q2) = parse_frac(y)?;
        let l = num_integer::lcm(q1, q2);
        Ok(Self::new(
            l,
            p1 * (l / q1) as i64,
            p2 * (l / q2) as i64,
        ))
    }
}

impl fmt::Display for TorsionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{},{}/{}", self.c1, self.level, self.c2, self.level)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EisensteinDescriptor {
    pub weight: i64,
    pub point: TorsionPoint,
}

impl EisensteinDescriptor {
    pub fn new(weight: i64, point: TorsionPoint) -> Result<Self> {
        if weight < 1 {
            return Err(Error::InvalidWeight(weight));
        }
        Ok(EisensteinDescriptor { weight, point })
    }
}

impl fmt::Display for EisensteinDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}[{}]", self.weight, self.point)
    }
}

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Rational {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let mut s = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            s += Rational::from_integer(binomial(m as u64 + 1, k as u64)) * bk;
        }
        b.push(-s / Rational::from_integer(BigInt::from(m + 1)));
    }
    b.pop().unwrap()
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Constant term of the normalized series.
fn constant_term(weight: i64, p: &TorsionPoint) -> CyclotomicNumber {
    let level = p.level();
    let l = weight as u64;
    if p.c1() == 0 && p.c2() == 0 {
        if l % 2 == 1 {
            return CyclotomicNumber::zero(level);
        }
        let r = -bernoulli(l as usize) / Rational::from_integer(factorial(l));
        return CyclotomicNumber::from_rational(level, &r);
    }
    if p.c1() == 0 {
        // -(1/2)/(l-1)! (w d/dw)^(l-1) [(w+1)/(w-1)] in t = 1/(w-1),
        // where (w d/dw) t^k = -k (t^k + t^(k+1)).
        let mut poly: Vec<BigInt> = vec![BigInt::one(), BigInt::from(2)];
        for _ in 1..l {
            let mut next = vec![BigInt::zero(); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                if k == 0 || c.is_zero() {
                    continue;
                }
                let kc = c * BigInt::from(k);
                next[k] -= &kc;
                next[k + 1] -= &kc;
            }
            poly = next;
        }
        let w = CyclotomicNumber::zeta_power(level, p.c2() as i64);
        let t = (&w - &CyclotomicNumber::one(level))
            .inverse()
            .expect("w != 1 for c2 != 0");
        let mut acc = CyclotomicNumber::zero(level);
        for c in poly.iter().rev() {
            acc = &(&acc * &t) + &CyclotomicNumber::from_int_poly(level, std::slice::from_ref(c), BigInt::one());
        }
        let scale = Rational::new(BigInt::from(-1), BigInt::from(2) * factorial(l - 1));
        return acc.scale(&scale);
    }
    if l == 1 {
        let r = Rational::new(BigInt::from(1), BigInt::from(2))
            - Rational::new(BigInt::from(p.c1()), BigInt::from(level));
        return CyclotomicNumber::from_rational(level, &r);
    }
    CyclotomicNumber::zero(level)
}

fn compute_expansion(weight: i64, p: &TorsionPoint, prec: usize) -> ModularExpression {
    let level = p.level();
    let n = level as usize;
    let fd = field_data(level);
    let phi = fd.phi;
    let l = weight as u32;
    let mut acc: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); phi]; prec];
    let sign: i64 = if weight % 2 == 0 { 1 } else { -1 };
    let mut add_row = |start: usize, zeta_sign: i64, s: i64| {
        let mut a = if start == 0 { n } else { start };
        while a < prec {
            let mut m = 1usize;
            while m * a < prec {
                let e = (zeta_sign * (m as i64) * p.c2() as i64).rem_euclid(n as i64) as usize;
                let mag = BigInt::from(m).pow(l - 1) * s;
                let slot = &mut acc[m * a];
                for (k, &t) in fd.powers[e].iter().enumerate() {
                    if t != 0 {
                        slot[k] += &mag * t;
                    }
                }
                m += 1;
            }
            a += n;
        }
    };
    add_row(p.c1() as usize, 1, 1);
    add_row((n - p.c1() as usize) % n, -1, sign);
    let den = factorial(l as u64 - 1);
    let mut coeffs: Vec<CyclotomicNumber> = acc
        .into_iter()
        .map(|v| CyclotomicNumber::from_int_poly(level, &v, den.clone()))
        .collect();
    if prec > 0 {
        coeffs[0] = constant_term(weight, p);
    }
    let hol = QSeries::from_coeffs(level, coeffs).expect("levels agree");
    let polar = if weight == 2 {
        QSeries::one(level, prec)
    } else {
        QSeries::zero(level, prec)
    };
    ModularExpression::with_polar(hol, polar, weight)
        .expect("levels agree")
        .with_meta(format!("E{weight}[{p}]"))
}

type CacheKey = (i64, u32, u32, u32);

fn expansion_cache() -> &'static RwLock<HashMap<CacheKey, ModularExpression>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, ModularExpression>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `(-2 pi i)^(-l) E_{l,lambda}` as a `q_N`-series; weight 2 carries the polar
/// unit with coefficient series `1`.
pub fn eisenstein_expansion(d: &EisensteinDescriptor, prec: usize) -> Result<ModularExpression> {
    if d.weight < 1 {
        return Err(Error::InvalidWeight(d.weight));
    }
    let p = d.point;
    let key = (d.weight, p.level(), p.c1(), p.c2());
    if let Some(e) = expansion_cache().read().unwrap().get(&key) {
        if e.prec() >= prec {
            return Ok(e.truncate(prec));
        }
    }
    let e = compute_expansion(d.weight, &p, prec);
    let mut cache = expansion_cache().write().unwrap();
    let slot = cache.entry(key).or_insert_with(|| e.clone());
    if slot.prec() < prec {
        *slot = e.clone();
    }
    Ok(e)
}

/// Shorthand for [`eisenstein_expansion`].
pub fn eis(weight: i64, p: TorsionPoint, prec: usize) -> Result<ModularExpression> {
    eisenstein_expansion(&EisensteinDescriptor::new(weight, p)?, prec)
}

/// `E~_{2,lambda} - E~_{2,0}`, which is polar-free.
pub fn e2_difference(p: TorsionPoint, prec: usize) -> Result<ModularExpression> {
    let d = eis(2, p, prec)?.sub(&eis(2, TorsionPoint::zero(p.level()), prec)?)?;
    Ok(d.with_meta(format!("E2[{p}]-E2[0]")))
}

fn minus_two_pi_i_pow(l: i64) -> Complex64 {
    Complex64::new(0.0, -2.0 * PI).powi(l as i32)
}

/// Square-truncated `(-2 pi i)^(-l) sum (a z + b)^(-l)` over `(a, b) = lambda`
/// mod `Z^2`, `max(|a|, |b|) <= radius`.
pub fn lattice_sum_eval(l: i64, p: &TorsionPoint, z: Complex64, radius: u32) -> Result<Complex64> {
    if l < 3 {
        return Err(Error::NotAbsolutelyConvergent(l));
    }
    if z.im <= 0.0 {
        return Err(Error::InvalidArgument("Im z must be positive".into()));
    }
    let n = p.level() as f64;
    let r = radius as f64;
    let (x1, x2) = (p.c1() as f64 / n, p.c2() as f64 / n);
    // representatives x + k with |x + k| <= r
    let range = |x: f64| -> (i64, i64) { ((-r - x).ceil() as i64, (r - x).floor() as i64) };
    let (lo1, hi1) = range(x1);
    let (lo2, hi2) = range(x2);
    let mut total = Complex64::new(0.0, 0.0);
    for i in lo1..=hi1 {
        let a = x1 + i as f64;
        let az = z * a;
        let mut row = Complex64::new(0.0, 0.0);
        for j in lo2..=hi2 {
            let b = x2 + j as f64;
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let w = az + b;
            row += (w.powi(l as i32)).inv();
        }
        total += row;
    }
    Ok(total / minus_two_pi_i_pow(l))
}

/// Lattice sum with Richardson extrapolation in the truncation radius.
/// Returns `(value, error estimate)`.
pub fn lattice_sum_extrapolated(
    l: i64,
    p: &TorsionPoint,
    z: Complex64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let mut radius = 16u32;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut best = (Complex64::new(0.0, 0.0), f64::INFINITY);
    for _ in 0..8 {
        let s = lattice_sum_eval(l, p, z, radius)?;
        let mut row = vec![s];
        if let Some(prev) = rows.last() {
            for j in 0..prev.len() {
                // error terms in R^-(j+1); radius doubles per row
                let f = 2f64.powi(j as i32 + 1);
                let v = (row[j] * f - prev[j]) / (f - 1.0);
                row.push(v);
            }
            let k = row.len() - 1;
            let est = (row[k] - row[k - 1]).norm().min((row[k] - prev[k - 1]).norm());
            if est < best.1 {
                best = (row[k], est);
            }
            if est < tol / 10.0 {
                return Ok(best);
            }
        }
        rows.push(row);
        radius *= 2;
    }
    if best.1 < tol {
        Ok(best)
    } else {
        Err(Error::NonConvergence { estimate: best.1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeierstrassKind {
    P,
    PPrime,
    Zeta,
}

fn csc2(w: Complex64) -> Complex64 {
    let s = w.sin();
    (s * s).inv()
}

/// `G_2` of the lattice `Z z + Z` with the `n`-first summation order.
fn g2(z: Complex64, radius: u32) -> Complex64 {
    let mut acc = Complex64::new(PI * PI / 3.0, 0.0);
    for m in 1..=radius as i64 {
        let w = z * (PI * m as f64);
        acc += csc2(w) * (2.0 * PI * PI);
    }
    acc
}

/// Weierstrass functions of `Z z + Z` at `z_lambda = lambda_1 z + lambda_2`.
/// Rows `u + m z` are summed in closed form, for `|m| <= radius`.
pub fn weierstrass_eval(
    kind: WeierstrassKind,
    p: &TorsionPoint,
    z: Complex64,
    radius: u32,
) -> Result<Complex64> {
    if p.is_zero() {
        return Err(Error::PoleOfWp);
    }
    if z.im <= 0.0 {
        return Err(Error::InvalidArgument("Im z must be positive".into()));
    }
    let n = p.level() as f64;
    let u = z * (p.c1() as f64 / n) + p.c2() as f64 / n;
    Ok(weierstrass_at(kind, u, z, radius))
}

/// Weierstrass functions at an arbitrary non-lattice point `u`.
pub fn weierstrass_at(kind: WeierstrassKind, u: Complex64, z: Complex64, radius: u32) -> Complex64 {
    let r = radius as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in -r..=r {
        let w = (u + z * m as f64) * PI;
        acc += match kind {
            WeierstrassKind::P => csc2(w) * (PI * PI),
            WeierstrassKind::PPrime => w.cos() / w.sin() * csc2(w) * (-2.0 * PI * PI * PI),
            WeierstrassKind::Zeta => w.cos() / w.sin() * PI,
        };
    }
    match kind {
        WeierstrassKind::P => acc - g2(z, radius),
        WeierstrassKind::PPrime => acc,
        WeierstrassKind::Zeta => acc + u * g2(z, radius),
    }
}

/// Numerical value of an expansion's holomorphic part at `z`.
pub fn eval_holomorphic(e: &ModularExpression, z: Complex64) -> Complex64 {
    e.hol.eval(z)
}
