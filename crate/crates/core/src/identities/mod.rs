//! Composite expressions built from products of Eisenstein series and the
//! exact checks run on them.

pub mod membership;
pub mod suites;

use num_bigint::BigInt;

use crate::cyclotomic::Rational;
use crate::eisenstein::{eis, TorsionPoint};
use crate::error::{Error, Result};
use crate::qseries::{BivarPoly, ModularExpression};

pub use membership::{
    certificate_series, eisenstein_membership, EisensteinSpace, Membership, MembershipCertificate,
};

/// Three points with `lam + mu + nu = 0` in `N^-1 Z^2 / Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionTriple {
    pub lam: TorsionPoint,
    pub mu: TorsionPoint,
    pub nu: TorsionPoint,
}

impl TorsionTriple {
    pub fn new(lam: TorsionPoint, mu: TorsionPoint, nu: TorsionPoint) -> Result<Self> {
        if !lam.add(&mu)?.add(&nu)?.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "torsion points {lam}, {mu}, {nu} do not sum to zero"
            )));
        }
        Ok(TorsionTriple { lam, mu, nu })
    }

    /// Completes `(lam, mu)` with `nu = -lam - mu`.
    pub fn complete(lam: TorsionPoint, mu: TorsionPoint) -> Result<Self> {
        let nu = lam.add(&mu)?.neg();
        Ok(TorsionTriple { lam, mu, nu })
    }

    pub fn level(&self) -> u32 {
        self.lam.level()
    }

    pub fn all_nonzero(&self) -> bool {
        !(self.lam.is_zero() || self.mu.is_zero() || self.nu.is_zero())
    }

    pub fn rotate(&self) -> Self {
        TorsionTriple {
            lam: self.mu,
            mu: self.nu,
            nu: self.lam,
        }
    }

    /// All triples at level `N`, ordered by `(lam, mu)`.
    pub fn all(level: u32) -> Vec<Self> {
        let pts = TorsionPoint::all(level);
        let mut out = Vec::with_capacity(pts.len() * pts.len());
        for &lam in &pts {
            for &mu in &pts {
                out.push(Self::complete(lam, mu).expect("same level"));
            }
        }
        out
    }

    /// Triples whose three points are all nonzero.
    pub fn all_nonzero_at(level: u32) -> Vec<Self> {
        Self::all(level).into_iter().filter(|t| t.all_nonzero()).collect()
    }

    /// Short case label, e.g. `(1,0;0,1;2,2)`.
    pub fn label(&self) -> String {
        format!(
            "({},{};{},{};{},{})",
            self.lam.c1(),
            self.lam.c2(),
            self.mu.c1(),
            self.mu.c2(),
            self.nu.c1(),
            self.nu.c2()
        )
    }
}

fn one() -> Rational {
    Rational::from_integer(BigInt::from(1))
}

/// `sum_{l + m = w + 2} a^(l-1) b^(m-1) E~_{l,lam} E~_{m,mu}`.
///
/// Products of two weight-2 series keep their `u^2` term in `polar2`.
pub fn build_l(lam: TorsionPoint, mu: TorsionPoint, w: usize, prec: usize) -> Result<BivarPoly> {
    let level = lam.level();
    let k = w as i64 + 2;
    let mut out = BivarPoly::zero(w, level, prec, k);
    for l in 1..=w + 1 {
        let m = w + 2 - l;
        let x = eis(l as i64, lam, prec)?;
        let y = eis(m as i64, mu, prec)?;
        out.set(l - 1, m - 1, x.mul_tracking(&y)?);
    }
    Ok(out)
}

/// `L(lam,mu)(a,b) + L(mu,nu)(b,c) + L(nu,lam)(c,a)` with `c = -a - b`.
pub fn three_term_sum(t: &TorsionTriple, w: usize, prec: usize) -> Result<BivarPoly> {
    let first = build_l(t.lam, t.mu, w, prec)?;
    let second = build_l(t.mu, t.nu, w, prec)?.linear_substitute(0, 1, -1, -1)?;
    let third = build_l(t.nu, t.lam, w, prec)?.linear_substitute(-1, -1, 1, 0)?;
    first.add(&second)?.add(&third)
}

/// `a^j E~_{j+1,lam} + b^j E~_{j+1,mu} + c^j E~_{j+1,nu}`.
pub fn f_row(t: &TorsionTriple, j: usize, prec: usize) -> Result<BivarPoly> {
    let wt = j as i64 + 1;
    let x = BivarPoly::from_abc_monomial(j, j, 0, 0, &one(), &eis(wt, t.lam, prec)?)?;
    let y = BivarPoly::from_abc_monomial(j, 0, j, 0, &one(), &eis(wt, t.mu, prec)?)?;
    let z = BivarPoly::from_abc_monomial(j, 0, 0, j, &one(), &eis(wt, t.nu, prec)?)?;
    x.add(&y)?.add(&z)
}

/// The `(w+1)`-row generating expression `sum_j F_j F_(w-j)`.
pub fn theorem31_expression(t: &TorsionTriple, w: usize, prec: usize) -> Result<BivarPoly> {
    let rows: Vec<BivarPoly> = (0..=w).map(|j| f_row(t, j, prec)).collect::<Result<_>>()?;
    let mut acc: Option<BivarPoly> = None;
    for j in 0..=w {
        let p = rows[j].mul(&rows[w - j], w)?;
        acc = Some(match acc {
            None => p,
            Some(a) => a.add(&p)?,
        });
    }
    Ok(acc.expect("w + 1 >= 1 rows"))
}

/// The closed form: `(w+1)(a^w E~_{w+2,lam} + b^w E~_{w+2,mu} + c^w E~_{w+2,nu})`
/// for `w >= 1`, and `E~_{2,lam} + E~_{2,mu} + E~_{2,nu} - 3 E~_{2,0}` for `w = 0`.
pub fn theorem31_closed_form(t: &TorsionTriple, w: usize, prec: usize) -> Result<BivarPoly> {
    let k = w as i64 + 2;
    if w == 0 {
        let z = eis(2, TorsionPoint::zero(t.level()), prec)?;
        let s = eis(2, t.lam, prec)?
            .add(&eis(2, t.mu, prec)?)?
            .add(&eis(2, t.nu, prec)?)?
            .sub(&z.scale_int(3))?;
        let mut out = BivarPoly::zero(0, t.level(), prec, 2);
        out.set(0, 0, s);
        return Ok(out);
    }
    let c = Rational::from_integer(BigInt::from(w as i64 + 1));
    let x = BivarPoly::from_abc_monomial(w, w, 0, 0, &c, &eis(k, t.lam, prec)?)?;
    let y = BivarPoly::from_abc_monomial(w, 0, w, 0, &c, &eis(k, t.mu, prec)?)?;
    let z = BivarPoly::from_abc_monomial(w, 0, 0, w, &c, &eis(k, t.nu, prec)?)?;
    x.add(&y)?.add(&z)
}

/// `E_{l'+1,lam} E_{m'+1,mu} + (-1)^l' E_{m'+1,mu} E_{l'+1,-lam} = 0`, exactly.
pub fn check_sigma_relation(
    lam: TorsionPoint,
    mu: TorsionPoint,
    lp: usize,
    mp: usize,
    prec: usize,
) -> Result<bool> {
    let l = lp as i64 + 1;
    let m = mp as i64 + 1;
    let first = eis(l, lam, prec)?.mul_tracking(&eis(m, mu, prec)?)?;
    let second = eis(m, mu, prec)?.mul_tracking(&eis(l, lam.neg(), prec)?)?;
    let second = if lp.is_multiple_of(2) { second } else { second.neg() };
    Ok(first.add(&second)?.is_zero())
}

/// `(E~_{1,lam} + E~_{1,mu} + E~_{1,nu})`.
pub fn a_sum(t: &TorsionTriple, prec: usize) -> Result<ModularExpression> {
    eis(1, t.lam, prec)?
        .add(&eis(1, t.mu, prec)?)?
        .add(&eis(1, t.nu, prec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::default_prec;

    fn p(n: u32, a: i64, b: i64) -> TorsionPoint {
        TorsionPoint::new(n, a, b)
    }

    #[test]
    fn triple_counts() {
        assert_eq!(TorsionTriple::all_nonzero_at(3).len(), 56);
        assert_eq!(TorsionTriple::all_nonzero_at(4).len(), 210);
        assert_eq!(TorsionTriple::all_nonzero_at(5).len(), 552);
        assert!(TorsionTriple::new(p(3, 1, 0), p(3, 1, 0), p(3, 0, 0)).is_err());
    }

    #[test]
    fn l_at_w_zero_is_a_single_product() {
        let (lam, mu) = (p(3, 1, 2), p(3, 0, 1));
        let l = build_l(lam, mu, 0, 20).unwrap();
        let direct = eis(1, lam, 20).unwrap().mul(&eis(1, mu, 20).unwrap()).unwrap();
        assert!(l.get(0, 0).eq_to_prec(&direct));
    }

    #[test]
    fn l_symmetry_and_sign() {
        let prec = 30;
        for (lam, mu) in [(p(3, 1, 2), p(3, 0, 1)), (p(4, 1, 3), p(4, 2, 1))] {
            for w in 0..=3 {
                let l = build_l(lam, mu, w, prec).unwrap();
                let swapped = build_l(mu, lam, w, prec).unwrap().linear_substitute(0, 1, 1, 0).unwrap();
                assert!(l.eq_to_prec(&swapped), "w={w}");
                let signed = build_l(lam.neg(), mu, w, prec)
                    .unwrap()
                    .linear_substitute(-1, 0, 0, 1)
                    .unwrap();
                assert!(l.eq_to_prec(&signed.neg()), "w={w}");
            }
        }
    }

    #[test]
    fn l_coefficients_match_direct_products() {
        let (lam, mu) = (p(4, 1, 0), p(4, 3, 2));
        let l = build_l(lam, mu, 3, 25).unwrap();
        for a in 1..=4usize {
            let b = 5 - a;
            let direct = eis(a as i64, lam, 25)
                .unwrap()
                .mul_tracking(&eis(b as i64, mu, 25).unwrap())
                .unwrap();
            assert!(l.get(a - 1, b - 1).eq_to_prec(&direct));
        }
        // only the product of two weight-2 factors carries u^2
        let l = build_l(lam, mu, 2, 25).unwrap();
        assert!(!l.get(1, 1).polar2.is_zero());
        assert!(l.get(0, 2).polar2.is_zero());
        assert!(l.get(2, 0).polar2.is_zero());
    }

    #[test]
    fn sigma_relation() {
        for lam in TorsionPoint::all(3) {
            for mu in TorsionPoint::all(3) {
                assert!(check_sigma_relation(lam, mu, 0, 0, 20).unwrap());
            }
        }
        assert!(check_sigma_relation(p(4, 1, 2), p(4, 3, 3), 2, 1, 20).unwrap());
        assert!(check_sigma_relation(p(4, 0, 1), p(4, 2, 3), 1, 1, 20).unwrap());
    }

    #[test]
    fn three_term_sum_special_case() {
        let lam = p(3, 1, 1);
        let t = TorsionTriple::complete(lam, TorsionPoint::zero(3)).unwrap();
        let s = three_term_sum(&t, 0, 20).unwrap();
        let a = eis(1, lam, 20).unwrap();
        assert!(s.get(0, 0).eq_to_prec(&a.mul(&a).unwrap().neg()));
    }

    #[test]
    fn three_term_sum_is_rotation_invariant() {
        let t = TorsionTriple::complete(p(3, 1, 0), p(3, 2, 2)).unwrap();
        for w in 0..=2 {
            let s = three_term_sum(&t, w, 20).unwrap();
            // rotating (lam,mu,nu) and (a,b,c) together: a -> b, b -> c
            let r = three_term_sum(&t.rotate(), w, 20).unwrap().linear_substitute(0, 1, -1, -1).unwrap();
            assert!(s.eq_to_prec(&r), "w={w}");
        }
    }

    #[test]
    fn three_term_sum_weight_three_display() {
        let prec = 20;
        let t = TorsionTriple::complete(p(3, 1, 2), p(3, 2, 0)).unwrap();
        let s = three_term_sum(&t, 1, prec).unwrap();
        let e = |l: i64, x: TorsionPoint| eis(l, x, prec).unwrap();
        let prod = |x: ModularExpression, y: ModularExpression| x.mul(&y).unwrap();
        // a B_l A_m + b A_l B_m + b B_m A_n + c A_m B_n + c B_n A_l + a A_n B_l
        let (lam, mu, nu) = (t.lam, t.mu, t.nu);
        let a_coef = prod(e(2, lam), e(1, mu))
            .add(&prod(e(1, nu), e(2, lam)))
            .unwrap()
            .sub(&prod(e(1, mu), e(2, nu)))
            .unwrap()
            .sub(&prod(e(2, nu), e(1, lam)))
            .unwrap();
        let b_coef = prod(e(1, lam), e(2, mu))
            .add(&prod(e(2, mu), e(1, nu)))
            .unwrap()
            .sub(&prod(e(1, mu), e(2, nu)))
            .unwrap()
            .sub(&prod(e(2, nu), e(1, lam)))
            .unwrap();
        assert!(s.get(1, 0).eq_to_prec(&a_coef));
        assert!(s.get(0, 1).eq_to_prec(&b_coef));
    }

    #[test]
    fn theorem31_small_level() {
        for t in TorsionTriple::all_nonzero_at(3).into_iter().take(6) {
            for w in 0..=2 {
                let prec = default_prec(w as i64 + 2, 3);
                let e = theorem31_expression(&t, w, prec).unwrap();
                assert!(e.is_holomorphic());
                assert!(e.eq_to_prec(&theorem31_closed_form(&t, w, prec).unwrap()), "{t:?} w={w}");
            }
        }
    }
}
