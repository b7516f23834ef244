//! Membership in the span of the Eisenstein series of a given weight on
//! `Gamma(M)`, decided by exact linear algebra over `Q(zeta)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::cyclotomic::CyclotomicNumber;
use crate::eisenstein::{e2_difference, eis, EisensteinDescriptor, TorsionPoint};
use crate::error::{Error, Result};
use crate::qseries::{sturm_bound, ModularExpression, QSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    /// Spanning elements; at weight 2 each entry stands for `E2[nu] - E2[0]`.
    pub basis: Vec<EisensteinDescriptor>,
    pub coeffs: Vec<CyclotomicNumber>,
    /// Number of `q_level` coefficients on which the combination was checked.
    pub residual_checked_to: usize,
    /// The spanning set is linearly dependent, so the solution is not unique.
    pub underdetermined: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member(MembershipCertificate),
    /// The first `q_level` exponent at which no combination matches.
    NotMember { first_mismatch: usize },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

struct EchelonRow {
    pivot: usize,
    vec: Vec<CyclotomicNumber>,
    combo: Vec<CyclotomicNumber>,
}

/// Spanning set of the weight-`k` Eisenstein space of `Gamma(M)` expanded in
/// `q_level` (with `M | level`) to a fixed precision, with an echelon form of
/// its first `solve_len` coefficients.
pub struct EisensteinSpace {
    pub k: i64,
    pub m: u32,
    pub level: u32,
    pub prec: usize,
    pub basis: Vec<EisensteinDescriptor>,
    series: Vec<QSeries>,
    solve_len: usize,
    rows: Vec<EchelonRow>,
}

fn subtract_scaled(target: &mut [CyclotomicNumber], row: &[CyclotomicNumber], c: &CyclotomicNumber) {
    for (t, r) in target.iter_mut().zip(row) {
        if !r.is_zero() {
            *t = &*t - &(c * r);
        }
    }
}

impl EisensteinSpace {
    pub fn new(k: i64, m: u32, level: u32, prec: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidWeight(k));
        }
        if !level.is_multiple_of(m) {
            return Err(Error::NotDivisible { from: m, to: level });
        }
        let d = (level / m) as usize;
        let solve_len = ((sturm_bound(k, m) + 1) * d).min(prec);
        let m_prec = prec.div_ceil(d);
        let mut basis = Vec::new();
        let mut series = Vec::new();
        for nu in TorsionPoint::all(m) {
            if k == 2 && nu.is_zero() {
                continue;
            }
            let e = if k == 2 {
                e2_difference(nu, m_prec)?
            } else {
                eis(k, nu, m_prec)?
            };
            if e.hol.is_zero() {
                continue;
            }
            basis.push(EisensteinDescriptor::new(k, nu)?);
            series.push(e.hol.level_lift(level)?.truncate(prec));
        }
        let nb = basis.len();
        let mut rows: Vec<EchelonRow> = Vec::new();
        for (i, s) in series.iter().enumerate() {
            let mut vec: Vec<CyclotomicNumber> = s.coeffs()[..solve_len].to_vec();
            let mut combo = vec![CyclotomicNumber::zero(level); nb];
            combo[i] = CyclotomicNumber::one(level);
            for r in &rows {
                let c = vec[r.pivot].clone();
                if !c.is_zero() {
                    subtract_scaled(&mut vec, &r.vec, &c);
                    subtract_scaled(&mut combo, &r.combo, &c);
                }
            }
            if let Some(p) = vec.iter().position(|c| !c.is_zero()) {
                let inv = vec[p].inverse()?;
                let vec = vec.iter().map(|c| c * &inv).collect();
                let combo = combo.iter().map(|c| c * &inv).collect();
                rows.push(EchelonRow {
                    pivot: p,
                    vec,
                    combo,
                });
            }
        }
        Ok(EisensteinSpace {
            k,
            m,
            level,
            prec,
            basis,
            series,
            solve_len,
            rows,
        })
    }

    /// Shared instance for `(k, M, level, prec)`.
    pub fn cached(k: i64, m: u32, level: u32, prec: usize) -> Result<Arc<Self>> {
        type Key = (i64, u32, u32, usize);
        static CACHE: OnceLock<RwLock<HashMap<Key, Arc<EisensteinSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        let key = (k, m, level, prec);
        if let Some(s) = cache.read().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(Self::new(k, m, level, prec)?);
        Ok(cache.write().unwrap().entry(key).or_insert(s).clone())
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn spanning_series(&self) -> &[QSeries] {
        &self.series
    }

    /// Solves on the first Sturm-many coefficients, then re-verifies the
    /// combination on every coefficient of the target.
    pub fn solve(&self, target: &QSeries) -> Result<Membership> {
        if target.level() != self.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: target.level(),
            });
        }
        if target.prec() < self.solve_len {
            return Err(Error::InsufficientPrecision {
                have: target.prec(),
                need: self.solve_len,
            });
        }
        let nb = self.basis.len();
        let mut t: Vec<CyclotomicNumber> = target.coeffs()[..self.solve_len].to_vec();
        let mut x = vec![CyclotomicNumber::zero(self.level); nb];
        for r in &self.rows {
            let c = t[r.pivot].clone();
            if !c.is_zero() {
                subtract_scaled(&mut t, &r.vec, &c);
                for (xi, ci) in x.iter_mut().zip(&r.combo) {
                    if !ci.is_zero() {
                        *xi = &*xi + &(&c * ci);
                    }
                }
            }
        }
        if let Some(n) = t.iter().position(|c| !c.is_zero()) {
            return Ok(Membership::NotMember { first_mismatch: n });
        }
        let check_to = target.prec().min(self.prec);
        let mut sum = QSeries::zero(self.level, check_to);
        for (xi, s) in x.iter().zip(&self.series) {
            if !xi.is_zero() {
                sum = sum.add(&s.truncate(check_to).scale(xi)?)?;
            }
        }
        if let Some(n) = sum.first_difference(&target.truncate(check_to)) {
            return Ok(Membership::NotMember { first_mismatch: n });
        }
        Ok(Membership::Member(MembershipCertificate {
            basis: self.basis.clone(),
            coeffs: x,
            residual_checked_to: check_to,
            underdetermined: self.rank() < nb,
        }))
    }
}

/// Decides whether a polar-free target lies in the weight-`k` Eisenstein
/// space of `Gamma(M)`. The target may be expanded at any multiple of `M`.
pub fn eisenstein_membership(target: &ModularExpression, k: i64, m: u32, prec: usize) -> Result<Membership> {
    if !target.is_holomorphic() {
        return Err(Error::PolarInput);
    }
    let prec = prec.min(target.prec());
    let space = EisensteinSpace::cached(k, m, target.level(), prec)?;
    space.solve(&target.hol.truncate(prec))
}

/// Rebuilds the combination described by a certificate at the given level.
pub fn certificate_series(cert: &MembershipCertificate, level: u32, prec: usize) -> Result<QSeries> {
    let mut acc = QSeries::zero(level, prec);
    for (d, c) in cert.basis.iter().zip(&cert.coeffs) {
        if c.is_zero() {
            continue;
        }
        let m = d.point.level();
        let mp = prec.div_ceil((level / m) as usize);
        let e = if d.weight == 2 {
            e2_difference(d.point, mp)?
        } else {
            eis(d.weight, d.point, mp)?
        };
        acc = acc.add(&e.hol.level_lift(level)?.truncate(prec).scale(c)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::default_prec;
    use num_bigint::BigInt;

    /// `q prod (1 - q^n)^24` by direct truncated multiplication.
    fn delta_coefficients(prec: usize) -> Vec<i64> {
        let mut c = vec![0i64; prec];
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

    #[test]
    fn delta_oracle() {
        assert_eq!(delta_coefficients(7), vec![0, 1, -24, 252, -1472, 4830, -6048]);
    }

    #[test]
    fn spanning_elements_are_members() {
        let prec = default_prec(3, 3);
        for nu in TorsionPoint::all(3) {
            let e = eis(3, nu, prec).unwrap();
            match eisenstein_membership(&e, 3, 3, prec).unwrap() {
                Membership::Member(c) => {
                    assert_eq!(certificate_series(&c, 3, prec).unwrap(), e.hol);
                    assert!(c.underdetermined);
                }
                Membership::NotMember { .. } => panic!("{nu}"),
            }
        }
    }

    #[test]
    fn weight_one_square_is_member() {
        let lam = TorsionPoint::new(3, 0, 1);
        let prec = default_prec(2, 3);
        let a = eis(1, lam, prec).unwrap();
        let sq = a.mul(&a).unwrap();
        assert!(eisenstein_membership(&sq, 2, 3, prec).unwrap().is_member());
    }

    #[test]
    fn delta_is_not_a_member() {
        let prec = default_prec(12, 1);
        let coeffs = delta_coefficients(prec)
            .into_iter()
            .map(|c| CyclotomicNumber::from_int_poly(1, &[BigInt::from(c)], BigInt::from(1)))
            .collect();
        let delta = ModularExpression::holomorphic(QSeries::from_coeffs(1, coeffs).unwrap(), 12);
        assert_eq!(
            eisenstein_membership(&delta, 12, 1, prec).unwrap(),
            Membership::NotMember { first_mismatch: 1 }
        );
    }

    #[test]
    fn polar_input_is_rejected() {
        let b = eis(2, TorsionPoint::new(3, 1, 0), 20).unwrap();
        assert_eq!(eisenstein_membership(&b, 2, 3, 20), Err(Error::PolarInput));
    }

    #[test]
    fn lifted_targets() {
        // a level-3 series viewed at level 6
        let prec = default_prec(4, 3);
        let e = eis(4, TorsionPoint::new(3, 1, 2), prec).unwrap();
        let lifted = e.level_lift(6).unwrap();
        assert!(eisenstein_membership(&lifted, 4, 3, lifted.prec()).unwrap().is_member());
    }
}
