//! Period pairings `<f, P> = int_0^{i oo} f(z) P(z) dz` and the integrals
//! `I_{M,H,f}` at `p = q = 0`, for cusp forms given by q-expansions.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use super::slash::{complex_matrix, HalfPlaneFn, Polynomial, SIGMA};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A cusp form `sum_{n>=1} a_n q_N^n` with floating coefficients.
#[derive(Clone, Debug)]
pub struct CuspFormNumeric {
    weight: i64,
    level: u32,
    coeffs: Vec<f64>,
    /// `max |a_n| / n^(k/2)`, used for tail bounds.
    growth: f64,
}

/// `prod (1 - q^n)^3 = sum (-1)^j (2j+1) q^(j(j+1)/2)`, squared three times.
fn delta_integer_coefficients(terms: usize) -> Vec<i128> {
    let mut eta3 = vec![0i128; terms];
    let mut j = 0usize;
    while j * (j + 1) / 2 < terms {
        let sign = if j.is_multiple_of(2) { 1 } else { -1 };
        eta3[j * (j + 1) / 2] = sign * (2 * j as i128 + 1);
        j += 1;
    }
    let square = |a: &[i128]| {
        let mut out = vec![0i128; terms];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
            for (j, y) in a[..terms - i].iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let e8 = square(&square(&square(&eta3)));
    let mut out = vec![0i128; terms];
    out[1..].copy_from_slice(&e8[..terms - 1]);
    out
}

impl CuspFormNumeric {
    /// `coeffs[n]` is the coefficient of `q_N^n`; `coeffs[0]` must vanish.
    pub fn new(weight: i64, level: u32, coeffs: Vec<f64>) -> Result<Self> {
        if level == 0 || weight < 1 {
            return Err(Error::InvalidArgument("weight and level must be positive".into()));
        }
        if coeffs.first().is_some_and(|c| *c != 0.0) {
            return Err(Error::InvalidArgument("nonzero constant term".into()));
        }
        let half = weight as f64 / 2.0;
        let growth = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, a)| a.abs() / (n as f64).powf(half))
            .fold(0.0, f64::max);
        Ok(CuspFormNumeric { weight, level, coeffs, growth })
    }

    /// The discriminant form of weight 12 and level 1.
    pub fn delta(terms: usize) -> Self {
        let c = delta_integer_coefficients(terms.max(2));
        Self::new(12, 1, c.iter().map(|x| *x as f64).collect()).unwrap()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn series(&self, z: Complex64) -> (Complex64, f64) {
        let qn = (2.0 * PI * I * z / self.level as f64).exp();
        let r = qn.norm();
        let mut s = Complex64::new(0.0, 0.0);
        for a in self.coeffs.iter().rev() {
            s = s * qn + a;
        }
        let m = self.coeffs.len() as f64;
        let half = self.weight as f64 / 2.0;
        let ratio = ((m + 1.0) / m).powf(half) * r;
        let tail = if ratio < 1.0 {
            self.growth * m.powf(half) * r.powf(m) / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        (s, tail)
    }

    /// Value and a bound on the series truncation error. At level 1 the
    /// point is first moved into the standard fundamental domain.
    pub fn eval_with_bound(&self, z: Complex64) -> (Complex64, f64) {
        if self.level != 1 {
            return self.series(z);
        }
        // w = g z with g = (a b; c d) in SL(2,Z), so f(z) = f(w) (cz+d)^-k
        let (mut w, mut c, mut d) = (z, 0.0f64, 1.0f64);
        let (mut a, mut b) = (1.0f64, 0.0f64);
        for _ in 0..200 {
            let n = w.re.round();
            w -= n;
            a -= n * c;
            b -= n * d;
            if w.norm_sqr() >= 1.0 - 1e-14 {
                break;
            }
            w = -1.0 / w;
            (a, b, c, d) = (-c, -d, a, b);
        }
        let (v, tail) = self.series(w);
        let j = (z * c + d).powi(-(self.weight as i32));
        (v * j, tail * j.norm())
    }
}

impl HalfPlaneFn for CuspFormNumeric {
    fn weight(&self) -> i64 {
        self.weight
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_with_bound(z).0
    }
}

fn gl(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).unwrap()).as_node_weight_pairs().to_vec()
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `int_{t0}^oo e^(-alpha t) t^j dt`.
fn upper_gamma_moment(alpha: f64, t0: f64, j: usize) -> f64 {
    let x = alpha * t0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for r in 1..=j {
        term *= x / r as f64;
        sum += term;
    }
    factorial(j as i64) * (-x).exp() * sum / alpha.powi(j as i32 + 1)
}

/// `int_{i t0}^{i oo} f(z) P(z) dz` term by term, with a truncation estimate.
fn upper_period(f: &CuspFormNumeric, p: &Polynomial<Complex64>, t0: f64) -> (Complex64, f64) {
    let n_level = f.level as f64;
    let half = f.weight as f64 / 2.0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    let m = f.coeffs.len();
    for (j, pj) in p.coeffs().iter().enumerate() {
        let ij = I.powi(j as i32 + 1);
        let mut s = 0.0;
        for (n, a) in f.coeffs.iter().enumerate().skip(1).rev() {
            s += a * upper_gamma_moment(2.0 * PI * n as f64 / n_level, t0, j);
        }
        total += pj * ij * s;
        let est: f64 = (m..m + 200)
            .map(|n| {
                let n = n as f64;
                f.growth * n.powf(half) * upper_gamma_moment(2.0 * PI * n / n_level, t0, j)
            })
            .sum();
        tail += pj.norm() * est;
    }
    (total, tail)
}

fn check_degree(f: &CuspFormNumeric, p: &Polynomial<Complex64>) -> Result<u32> {
    let w = f.weight - 2;
    if w < 0 || p.degree().is_some_and(|d| d as i64 > w) {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree exceeds weight minus two ({w})"
        )));
    }
    Ok(w as u32)
}

/// The pairing split at `z = i t0`, with the lower segment moved to
/// `[i/t0, i oo)` by `sigma`. Needs `f | sigma = f`, i.e. level 1.
pub fn period_pairing_at(
    f: &CuspFormNumeric,
    p: &Polynomial<Complex64>,
    t0: f64,
    tol: f64,
) -> Result<Complex64> {
    let w = check_degree(f, p)?;
    if f.level != 1 {
        return Err(Error::InvalidArgument(
            "termwise pairing needs the expansion of f|sigma; only level 1 is supported".into(),
        ));
    }
    if t0.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || tol <= 0.0 {
        return Err(Error::InvalidArgument("split point and tolerance must be positive".into()));
    }
    let ps = p.slash(&complex_matrix(&SIGMA), w)?;
    let (hi, e1) = upper_period(f, p, t0);
    let (lo, e2) = upper_period(f, &ps, 1.0 / t0);
    let err = e1 + e2;
    if err > tol {
        return Err(Error::NonConvergence { estimate: err });
    }
    Ok(hi - lo)
}

pub fn period_pairing(f: &CuspFormNumeric, p: &Polynomial<Complex64>, tol: f64) -> Result<Complex64> {
    period_pairing_at(f, p, 1.0, tol)
}

/// Geometric panels on `[lo, hi]`.
fn geometric_panels(lo: f64, hi: f64, ratio: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a * ratio).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}

/// `int_0^oo g(t) dt` for `g` decaying at both ends; panels on
/// `[0.01, 50]`, two Gauss orders for the estimate, and the integrand size
/// at the cut points times the panel width as the tail estimate.
fn half_line<G: Fn(f64) -> Complex64>(g: G) -> (Complex64, f64) {
    let (lo, hi) = (0.01, 50.0);
    let panels = geometric_panels(lo, hi, 1.25);
    let integrate = |rule: &[(f64, f64)]| {
        let mut s = Complex64::new(0.0, 0.0);
        for (a, b) in &panels {
            let (h, m) = ((b - a) / 2.0, (b + a) / 2.0);
            for (x, wt) in rule {
                s += g(m + h * x) * (wt * h);
            }
        }
        s
    };
    let coarse = integrate(&gl(20));
    let fine = integrate(&gl(30));
    let tail = g(lo).norm() * lo + g(hi).norm();
    (fine, (fine - coarse).norm() + tail)
}

/// The pairing by quadrature along the imaginary axis, evaluating `f`
/// directly at every node.
pub fn period_pairing_quadrature(
    f: &CuspFormNumeric,
    p: &Polynomial<Complex64>,
    tol: f64,
) -> Result<Complex64> {
    check_degree(f, p)?;
    let (v, err) = half_line(|t| {
        let z = I * t;
        f.eval(z) * p.eval(&z) * I
    });
    if err > tol {
        return Err(Error::NonConvergence { estimate: err });
    }
    Ok(v)
}

/// `int_0^oo f(iy) y^(s-1) dy`.
pub fn mellin(f: &CuspFormNumeric, s: i64, tol: f64) -> Result<Complex64> {
    let (v, err) = half_line(|y| f.eval(I * y) * y.powi(s as i32 - 1));
    if err > tol * v.norm() {
        return Err(Error::NonConvergence { estimate: err });
    }
    Ok(v)
}

/// The two matrices for which closed forms are known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IMatrix {
    Identity,
    NegDet,
}

impl IMatrix {
    pub fn entries(&self) -> [f64; 4] {
        match self {
            IMatrix::Identity => [1.0, 0.0, 0.0, 1.0],
            IMatrix::NegDet => [0.0, 1.0, 1.0, 0.0],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "I" | "identity" => Ok(IMatrix::Identity),
            "N" | "negdet" => Ok(IMatrix::NegDet),
            _ => Err(Error::Parse(format!("matrix {s:?}"))),
        }
    }
}

fn check_split(f: &CuspFormNumeric, l: i64, m: i64) -> Result<()> {
    if l < 3 || m < 3 || l + m != f.weight {
        return Err(Error::InvalidArgument(format!(
            "split ({l},{m}) must have both parts at least 3 and sum to {}",
            f.weight
        )));
    }
    Ok(())
}

/// `y0 <= y <= y1` and `x_in <= |x| <= x_out`.
struct Grid {
    y0: f64,
    y1: f64,
    x_in: f64,
    x_out: f64,
}

fn integrate_grid<G>(g: &G, grid: &Grid, order: usize) -> Complex64
where
    G: Fn(f64, f64) -> Complex64 + Sync,
{
    let rule = gl(order);
    geometric_panels(grid.y0, grid.y1, 1.3)
        .par_iter()
        .map(|&(ya, yb)| {
            let width = (2.0 * ya).min(0.5);
            let span = grid.x_out - grid.x_in;
            let nx = (span / width).ceil() as usize;
            let hx = span / (2 * nx) as f64;
            let (hy, my) = ((yb - ya) / 2.0, (yb + ya) / 2.0);
            let mut s = Complex64::new(0.0, 0.0);
            for ix in 0..nx {
                let mx = grid.x_in + (2 * ix + 1) as f64 * hx;
                for (u, wu) in &rule {
                    let x = mx + hx * u;
                    for (v, wv) in &rule {
                        let y = my + hy * v;
                        s += (g(x, y) + g(-x, y)) * (wu * wv);
                    }
                }
            }
            s * (hx * hy)
        })
        .sum()
}

/// `I_{M,H,f}` at `p = q = 0`:
/// `int_H f(z) (a zbar + b)^-l (c zbar + d)^-m y^(k-2) dx dy`, on the box
/// `|x| <= 30`, `0.04 <= y <= 7`. Returns the value and an error estimate
/// (Gauss order difference plus the bordering strips `30 <= |x| <= 120`
/// and `0.01 <= y <= 0.04` as tail estimates).
pub fn integral_i_with_estimate(
    which: IMatrix,
    f: &CuspFormNumeric,
    l: i64,
    m: i64,
) -> Result<(Complex64, f64)> {
    check_split(f, l, m)?;
    let [a, b, c, d] = which.entries();
    let k = f.weight as i32;
    let g = |x: f64, y: f64| {
        let zb = Complex64::new(x, -y);
        f.eval(Complex64::new(x, y)) * (zb * a + b).powi(-l as i32) * (zb * c + d).powi(-m as i32)
            * y.powi(k - 2)
    };
    let main = Grid { y0: 0.04, y1: 7.0, x_in: 0.0, x_out: 30.0 };
    let coarse = integrate_grid(&g, &main, 8);
    let fine = integrate_grid(&g, &main, 12);
    let wide = Grid { y0: 0.04, y1: 7.0, x_in: 30.0, x_out: 120.0 };
    let x_tail = integrate_grid(&g, &wide, 6).norm();
    let low = Grid { y0: 0.01, y1: 0.04, x_in: 0.0, x_out: 30.0 };
    let y_tail = integrate_grid(&g, &low, 6).norm();
    let top = (f.eval(Complex64::new(0.0, 7.0)) * 7f64.powi(k - 2)).norm() * 60.0;
    Ok((fine, (fine - coarse).norm() + x_tail + y_tail + top))
}

/// `I_{M,H,f}` to relative tolerance `tol`.
pub fn integral_i(which: IMatrix, f: &CuspFormNumeric, l: i64, m: i64, tol: f64) -> Result<Complex64> {
    let (v, err) = integral_i_with_estimate(which, f, l, m)?;
    if err > tol * v.norm() {
        return Err(Error::NonConvergence { estimate: err / v.norm() });
    }
    Ok(v)
}

fn prefactor(f: &CuspFormNumeric, l: i64, m: i64) -> f64 {
    let k = f.weight;
    PI * 2f64.powi(2 - k as i32) * factorial(k - 2) / (factorial(l - 1) * factorial(m - 1))
}

/// `i^l pi 2^(2-k) Gamma(k-1) / (Gamma(l) Gamma(m)) int_0^oo f(iy) y^(m-1) dy`
/// for the identity, and `l`, `m` exchanged in the exponents for `NegDet`.
pub fn closed_form_i(which: IMatrix, f: &CuspFormNumeric, l: i64, m: i64, tol: f64) -> Result<Complex64> {
    check_split(f, l, m)?;
    let (e, s) = match which {
        IMatrix::Identity => (l, m),
        IMatrix::NegDet => (m, l),
    };
    Ok(I.powi(e as i32) * prefactor(f, l, m) * mellin(f, s, tol)?)
}

/// `i^(k-2) pi 2^(2-k) Gamma(k-1) / (Gamma(l) Gamma(m)) <f, (-z)^(m-1)>`,
/// with `l - 1` in place of `m - 1` for `NegDet`.
pub fn period_form_i(which: IMatrix, f: &CuspFormNumeric, l: i64, m: i64, tol: f64) -> Result<Complex64> {
    check_split(f, l, m)?;
    let e = match which {
        IMatrix::Identity => m - 1,
        IMatrix::NegDet => l - 1,
    } as u32;
    let p = Polynomial::linear_power(Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0), e);
    let pairing = period_pairing(f, &p, tol)?;
    Ok(I.powi(f.weight as i32 - 2) * prefactor(f, l, m) * pairing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits_periods::slash::{Slashed, TAU};

    fn delta() -> CuspFormNumeric {
        CuspFormNumeric::delta(120)
    }

    // q prod (1 - q^n)^24, multiplied out one factor at a time
    fn delta_oracle(prec: usize) -> Vec<i128> {
        let mut c = vec![0i128; prec];
        c[1] = 1;
        for n in 1..prec {
            for _ in 0..24 {
                for i in (n..prec).rev() {
                    c[i] -= c[i - n];
                }
            }
        }
        c
    }

    fn monomial(j: usize) -> Polynomial<Complex64> {
        Polynomial::monomial(j)
    }

    #[test]
    fn delta_coefficients_match_product() {
        assert_eq!(delta_integer_coefficients(60), delta_oracle(60));
        assert_eq!(delta_integer_coefficients(4), vec![0, 1, -24, 252]);
    }

    #[test]
    fn delta_is_modular() {
        let f = delta();
        for t in 0..10 {
            let z = Complex64::new(-0.4 + 0.09 * t as f64, 0.05 + 0.13 * t as f64);
            let v = f.eval(z);
            let direct = f.series(z).0;
            // the raw series is only trustworthy away from the real axis
            if z.im > 0.5 {
                assert!((v - direct).norm() < 1e-12 * direct.norm().max(1e-300) + 1e-18);
            }
            let s = Slashed::new(&f, [0.0, -1.0, 1.0, 0.0]).unwrap().eval(z);
            assert!((s - v).norm() <= 1e-9 * v.norm() + 1e-300);
        }
    }

    #[test]
    fn two_methods_agree() {
        let f = delta();
        for j in [0usize, 3, 10] {
            let a = period_pairing(&f, &monomial(j), 1e-12).unwrap();
            let b = period_pairing_quadrature(&f, &monomial(j), 1e-12).unwrap();
            assert!((a - b).norm() < 1e-10, "j={j}: {a} vs {b}");
        }
    }

    #[test]
    fn split_point_does_not_matter() {
        let f = delta();
        let p = monomial(4);
        let a = period_pairing_at(&f, &p, 1.0, 1e-12).unwrap();
        let b = period_pairing_at(&f, &p, 0.7, 1e-12).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn manin_relations() {
        let f = delta();
        let w = 10;
        let sigma = complex_matrix(&SIGMA);
        let tau = complex_matrix(&TAU);
        let tau2 = super::super::slash::mat_mul(&tau, &tau);
        for j in 0..=10 {
            let p = monomial(j);
            let a = period_pairing_at(&f, &p, 1.3, 1e-13).unwrap();
            let b = period_pairing_at(&f, &p.slash(&sigma, w).unwrap(), 0.8, 1e-13).unwrap();
            assert!((a + b).norm() < 1e-8, "sigma j={j}");
            let c = period_pairing_at(&f, &p.slash(&tau, w).unwrap(), 1.1, 1e-13).unwrap();
            let d = period_pairing_at(&f, &p.slash(&tau2, w).unwrap(), 0.9, 1e-13).unwrap();
            assert!((a + c + d).norm() < 1e-6, "tau j={j}");
        }
    }

    #[test]
    fn bad_inputs() {
        let f = delta();
        assert!(period_pairing(&f, &monomial(11), 1e-8).is_err());
        let g = CuspFormNumeric::new(2, 11, vec![0.0, 1.0, -2.0]).unwrap();
        assert!(period_pairing(&g, &monomial(0), 1e-8).is_err());
        assert!(CuspFormNumeric::new(12, 1, vec![1.0]).is_err());
        assert!(integral_i(IMatrix::Identity, &f, 2, 10, 1e-3).is_err());
        assert!(matches!(
            period_pairing(&f, &monomial(10), 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn closed_and_period_forms_agree() {
        let f = delta();
        for (l, m) in [(5, 7), (7, 5)] {
            for which in [IMatrix::Identity, IMatrix::NegDet] {
                let a = closed_form_i(which, &f, l, m, 1e-10).unwrap();
                let b = period_form_i(which, &f, l, m, 1e-12).unwrap();
                assert!((a - b).norm() < 1e-8 * a.norm(), "{which:?} {l} {m}");
            }
        }
    }
}
