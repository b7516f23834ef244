//! Weight-`k` slash action on functions of the upper half plane and the
//! weight `-w` action on polynomials of degree at most `w`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::cyclotomic::Rational;
use crate::error::{Error, Result};

/// `(a, b, c, d)` for the matrix `(a b; c d)`.
pub type Mat2<T> = [T; 4];

pub const SIGMA: Mat2<i64> = [0, -1, 1, 0];
pub const TAU: Mat2<i64> = [0, 1, -1, -1];

pub fn mat_mul<T>(x: &Mat2<T>, y: &Mat2<T>) -> Mat2<T>
where
    T: Clone + Add<Output = T> + Mul<Output = T>,
{
    let m = |i: usize, j: usize, k: usize, l: usize| {
        x[i].clone() * y[j].clone() + x[k].clone() * y[l].clone()
    };
    [m(0, 0, 1, 2), m(0, 1, 1, 3), m(2, 0, 3, 2), m(2, 1, 3, 3)]
}

pub fn mat_det<T>(x: &Mat2<T>) -> T
where
    T: Clone + Sub<Output = T> + Mul<Output = T>,
{
    x[0].clone() * x[3].clone() - x[1].clone() * x[2].clone()
}

pub fn to_f64(g: &Mat2<i64>) -> Mat2<f64> {
    [g[0] as f64, g[1] as f64, g[2] as f64, g[3] as f64]
}

/// Coefficient ring for polynomials acted on by matrices over the same ring.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn is_positive(&self) -> bool;
    /// `self^(-w/2)` when it exists in the ring.
    fn inv_half_power(&self, w: u32) -> Option<Self>;
}

impl Scalar for Rational {
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn inv_half_power(&self, w: u32) -> Option<Self> {
        let root = if w.is_multiple_of(2) {
            self.clone()
        } else {
            let (n, d) = (self.numer(), self.denom());
            let (rn, rd) = (n.sqrt(), d.sqrt());
            if &(&rn * &rn) != n || &(&rd * &rd) != d {
                return None;
            }
            Rational::new(rn, rd)
        };
        let e = if w.is_multiple_of(2) { w / 2 } else { w };
        Some(num_traits::pow(root, e as usize).recip())
    }
}

impl Scalar for f64 {
    fn is_positive(&self) -> bool {
        *self > 0.0
    }

    fn inv_half_power(&self, w: u32) -> Option<Self> {
        Some(self.powf(-(w as f64) / 2.0))
    }
}

impl Scalar for Complex64 {
    fn is_positive(&self) -> bool {
        self.im == 0.0 && self.re > 0.0
    }

    fn inv_half_power(&self, w: u32) -> Option<Self> {
        Some(Complex64::new(self.re.powf(-(w as f64) / 2.0), 0.0))
    }
}

/// Polynomial in `z`, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn monomial(j: usize) -> Self {
        let mut c = vec![T::zero(); j + 1];
        c[j] = T::one();
        Polynomial { coeffs: c }
    }

    /// `(alpha z + beta)^w`.
    pub fn linear_power(alpha: T, beta: T, w: u32) -> Self {
        let lin = Polynomial::new(vec![beta, alpha]);
        let mut out = Polynomial::new(vec![T::one()]);
        for _ in 0..w {
            out = out.mul(&lin);
        }
        out
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|j| self.coeff(j) + other.coeff(j)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|j| self.coeff(j) - other.coeff(j)).collect())
    }

    pub fn scale(&self, s: &T) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// `(P |_{-w} g)(z) = P(gz) (cz+d)^w (det g)^(-w/2)`.
    pub fn slash(&self, g: &Mat2<T>, w: u32) -> Result<Self> {
        let det = mat_det(g);
        if !det.is_positive() {
            return Err(Error::NonPositiveDeterminant);
        }
        if self.degree().is_some_and(|d| d > w as usize) {
            return Err(Error::InvalidArgument(format!(
                "degree {} exceeds {w}",
                self.degree().unwrap()
            )));
        }
        let factor = det.inv_half_power(w).ok_or_else(|| {
            Error::InvalidArgument("determinant has no square root in the coefficient ring".into())
        })?;
        let num = Polynomial::new(vec![g[1].clone(), g[0].clone()]);
        let den = Polynomial::new(vec![g[3].clone(), g[2].clone()]);
        let w = w as usize;
        let mut num_pow = vec![Polynomial::new(vec![T::one()])];
        let mut den_pow = vec![Polynomial::new(vec![T::one()])];
        for i in 0..w {
            num_pow.push(num_pow[i].mul(&num));
            den_pow.push(den_pow[i].mul(&den));
        }
        let mut acc = Self::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            acc = acc.add(&num_pow[j].mul(&den_pow[w - j]).scale(c));
        }
        Ok(acc.scale(&factor))
    }
}

pub fn complex_matrix(g: &Mat2<i64>) -> Mat2<Complex64> {
    [0, 1, 2, 3].map(|i| Complex64::new(g[i] as f64, 0.0))
}

pub fn rational_matrix(g: &Mat2<i64>) -> Mat2<Rational> {
    [0, 1, 2, 3].map(|i| Rational::from_integer(g[i].into()))
}

/// A function of the upper half plane with a weight.
pub trait HalfPlaneFn {
    fn weight(&self) -> i64;
    fn eval(&self, z: Complex64) -> Complex64;
}

pub fn mobius(g: &Mat2<f64>, z: Complex64) -> Complex64 {
    (z * g[0] + g[1]) / (z * g[2] + g[3])
}

/// `f |_k g` for a real matrix of positive determinant.
pub struct Slashed<'a> {
    f: &'a dyn HalfPlaneFn,
    g: Mat2<f64>,
}

impl<'a> Slashed<'a> {
    pub fn new(f: &'a dyn HalfPlaneFn, g: Mat2<f64>) -> Result<Self> {
        if mat_det(&g) <= 0.0 {
            return Err(Error::NonPositiveDeterminant);
        }
        Ok(Slashed { f, g })
    }
}

impl HalfPlaneFn for Slashed<'_> {
    fn weight(&self) -> i64 {
        self.f.weight()
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let k = self.f.weight() as i32;
        let det: f64 = mat_det(&self.g);
        let j = z * self.g[2] + self.g[3];
        self.f.eval(mobius(&self.g, z)) * j.powi(-k) * det.powf(k as f64 / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn identity_acts_trivially() {
        let p = Polynomial::new(vec![q(1, 2), q(-3, 1), q(0, 1), q(5, 7)]);
        assert_eq!(p.slash(&rational_matrix(&[1, 0, 0, 1]), 4).unwrap(), p);
    }

    #[test]
    fn nonpositive_determinant_rejected() {
        let p = Polynomial::<Rational>::monomial(1);
        assert_eq!(
            p.slash(&rational_matrix(&[0, 1, 1, 0]), 2),
            Err(Error::NonPositiveDeterminant)
        );
    }

    #[test]
    fn slash_is_an_action() {
        let g = rational_matrix(&[2, 1, 1, 1]);
        let h = rational_matrix(&[1, -3, 0, 1]);
        let p = Polynomial::new(vec![q(1, 1), q(2, 1), q(-1, 3)]);
        let lhs = p.slash(&g, 5).unwrap().slash(&h, 5).unwrap();
        let rhs = p.slash(&mat_mul(&g, &h), 5).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn odd_weight_with_square_determinant() {
        let p = Polynomial::<Rational>::monomial(0);
        // (cz+d)^3 / 4^(3/2) with g = (2 0; 0 2)
        let out = p.slash(&rational_matrix(&[2, 0, 0, 2]), 3).unwrap();
        assert_eq!(out, Polynomial::new(vec![q(1, 1)]));
        assert!(p.slash(&rational_matrix(&[2, 0, 0, 1]), 3).is_err());
    }

    #[test]
    fn tau_on_linear_powers() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let tau = rational_matrix(&TAU);
        let tau2 = mat_mul(&tau, &tau);
        for _ in 0..50 {
            let a = q(rng.gen_range(-20..=20), rng.gen_range(1..=9));
            let b = q(rng.gen_range(-20..=20), rng.gen_range(1..=9));
            let c = -(&a + &b);
            let w = rng.gen_range(0..=8);
            let p = Polynomial::linear_power(-a.clone(), b.clone(), w);
            assert_eq!(
                p.slash(&tau, w).unwrap(),
                Polynomial::linear_power(-b.clone(), c.clone(), w)
            );
            assert_eq!(p.slash(&tau2, w).unwrap(), Polynomial::linear_power(-c, a, w));
        }
    }

    struct Toy;
    impl HalfPlaneFn for Toy {
        fn weight(&self) -> i64 {
            4
        }
        fn eval(&self, z: Complex64) -> Complex64 {
            (z * Complex64::new(0.0, 1.3)).exp() + z.powi(-2)
        }
    }

    #[test]
    fn function_slash_round_trip() {
        let g = [2.0, 1.0, 3.0, 2.5];
        let det = mat_det(&g);
        let inv = [g[3] / det, -g[1] / det, -g[2] / det, g[0] / det];
        let f = Toy;
        let fg = Slashed::new(&f, g).unwrap();
        let back = Slashed::new(&fg, inv).unwrap();
        for t in 0..10 {
            let z = Complex64::new(-1.0 + 0.23 * t as f64, 0.3 + 0.1 * t as f64);
            assert!((back.eval(z) - f.eval(z)).norm() < 1e-10 * f.eval(z).norm().max(1.0));
        }
        assert!(Slashed::new(&f, [0.0, 1.0, 1.0, 0.0]).is_err());
    }
}
