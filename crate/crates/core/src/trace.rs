//! Averaged products `sum_tau E_{l,lam+tau} E_{m,mu-S tau}` over the
//! `N`-torsion and their expression at lower level through signed integer
//! matrices of determinant `N`.

use std::fmt;

use rayon::prelude::*;

use crate::cyclotomic::Rational;
use crate::eisenstein::{e2_difference, eis, TorsionPoint};
use crate::error::{Error, Result};
use crate::identities::{build_l, eisenstein_membership, Membership};
use crate::qseries::{default_prec, sturm_bound, ModularExpression};
use crate::report::{run_case, VerificationReport};

/// A constant `c` and a matrix `(p q; r s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TraceTerm {
    pub c: i64,
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl TraceTerm {
    pub fn det(&self) -> i64 {
        self.p * self.s - self.q * self.r
    }

    /// `det = N` and `p - S q = r - S s = 0 (mod N)`.
    pub fn satisfies(&self, n: i64, shift: i64) -> bool {
        self.det() == n
            && (self.p - shift * self.q).rem_euclid(n) == 0
            && (self.r - shift * self.s).rem_euclid(n) == 0
    }
}

impl fmt::Display for TraceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}; {} {} {} {}", self.c, self.p, self.q, self.r, self.s)
    }
}

fn exact_div(a: i64, b: i64) -> Result<i64> {
    if a % b != 0 {
        return Err(Error::InexactDivision(format!("trace recursion: {a}/{b}")));
    }
    Ok(a / b)
}

/// The signed matrices for modulus `N` and shift `S`, `0 <= S < N`.
pub fn trace_matrices(n: i64, shift: i64) -> Result<Vec<TraceTerm>> {
    if n < 1 || shift < 0 || shift >= n.max(1) {
        return Err(Error::InvalidArgument(format!(
            "shift {shift} out of range for modulus {n}"
        )));
    }
    let t = |c, p, q, r, s| TraceTerm { c, p, q, r, s };
    match shift {
        0 => Ok(vec![t(1, n, 0, 0, 1)]),
        1 => Ok(vec![t(-1, 0, n, -1, -1), t(-1, -1, -1, n, 0)]),
        _ => {
            let mut out = vec![t(-1, -shift, -1, n, 0)];
            for h in trace_matrices(shift, n % shift)? {
                out.push(t(
                    -h.c,
                    -h.r,
                    exact_div(h.s * n - h.r, shift)?,
                    -h.p,
                    exact_div(h.q * n - h.p, shift)?,
                ));
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceProblem {
    pub n: u32,
    pub shift: i64,
    pub m: u32,
    pub lam: TorsionPoint,
    pub mu: TorsionPoint,
}

impl TraceProblem {
    pub fn new(n: u32, shift: i64, lam: TorsionPoint, mu: TorsionPoint) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        if lam.level() != mu.level() {
            return Err(Error::LevelMismatch {
                left: lam.level(),
                right: mu.level(),
            });
        }
        Ok(TraceProblem {
            n,
            shift: shift.rem_euclid(n as i64),
            m: lam.level(),
            lam,
            mu,
        })
    }

    pub fn big_level(&self) -> u32 {
        self.n * self.m
    }
}

fn holomorphized(weight: i64, p: TorsionPoint, prec: usize) -> Result<ModularExpression> {
    if weight == 2 {
        e2_difference(p, prec)
    } else {
        eis(weight, p, prec)
    }
}

/// `sum_tau E~_{l,lam+tau} E~_{m,mu-S tau}` at level `N M`, weight-2 factors
/// replaced by `E~_2 - E~_{2,0}`.
pub fn trace_lhs(prob: &TraceProblem, l: i64, m: i64, prec: usize) -> Result<ModularExpression> {
    let big = prob.big_level();
    let lam = prob.lam.at_level(big)?;
    let mu = prob.mu.at_level(big)?;
    let mut acc = ModularExpression::zero(big, prec, l + m);
    let step = prob.m as i64;
    for t1 in 0..prob.n as i64 {
        for t2 in 0..prob.n as i64 {
            let tau = TorsionPoint::new(big, t1 * step, t2 * step);
            let x = holomorphized(l, lam.add(&tau)?, prec)?;
            let y = holomorphized(m, mu.add(&tau.scale(-prob.shift))?, prec)?;
            acc = acc.add(&x.mul(&y)?)?;
        }
    }
    if !acc.is_holomorphic() {
        return Err(Error::PolarInput);
    }
    Ok(acc)
}

/// `N sum_i c_i [a^(l-1) b^(m-1)] L_{p lam + q mu, r lam + s mu}(p a + q b, r a + s b)`
/// at level `M`, with its `u`-part still present.
pub fn trace_rhs(prob: &TraceProblem, l: i64, m: i64, prec: usize) -> Result<ModularExpression> {
    let w = (l + m - 2) as usize;
    let mut acc = ModularExpression::zero(prob.m, prec, l + m);
    for term in trace_matrices(prob.n as i64, prob.shift)? {
        let p1 = prob.lam.scale(term.p).add(&prob.mu.scale(term.q))?;
        let p2 = prob.lam.scale(term.r).add(&prob.mu.scale(term.s))?;
        let lpoly = build_l(p1, p2, w, prec)?.linear_substitute(term.p, term.q, term.r, term.s)?;
        let coef = lpoly.get((l - 1) as usize, (m - 1) as usize);
        acc = acc.add(&coef.scale_int(term.c * prob.n as i64))?;
    }
    Ok(acc)
}

/// Removes the `u`-part of a level-`M` expression of weight `k >= 5` by
/// subtracting multiples of `sum_j E~_{j,nu} E~_{k-j,nu}`, each of which is
/// orthogonal to cusp forms and has `u`-part `2 E~_{k-2,nu}`.
pub fn holomorphize(e: &ModularExpression, m: u32) -> Result<Option<ModularExpression>> {
    if !e.polar2.is_zero() {
        return Err(Error::NonholomorphicSquare);
    }
    if e.polar.is_zero() {
        return Ok(Some(e.clone()));
    }
    let k = e.weight;
    if k < 5 {
        return Err(Error::InvalidArgument(format!(
            "holomorphization needs weight >= 5, got {k}"
        )));
    }
    let prec = e.prec();
    let polar = ModularExpression::holomorphic(e.polar.clone(), k - 2);
    let cert = match eisenstein_membership(&polar, k - 2, m, prec)? {
        Membership::Member(c) => c,
        Membership::NotMember { .. } => return Ok(None),
    };
    let half = Rational::new(1.into(), 2.into());
    let mut out = e.clone();
    for (d, x) in cert.basis.iter().zip(&cert.coeffs) {
        if x.is_zero() {
            continue;
        }
        let mut r = ModularExpression::zero(m, prec, k);
        for j in 1..k {
            r = r.add(&eis(j, d.point, prec)?.mul(&eis(k - j, d.point, prec)?)?)?;
        }
        out = out.sub(&r.scale(x)?.scale_rational(&half))?;
    }
    if !out.is_holomorphic() {
        return Err(Error::PolarInput);
    }
    Ok(Some(out))
}

/// Outcome of a trace verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceOutcome {
    pub passed: bool,
    /// `q_{NM}` coefficients used.
    pub prec: usize,
    pub detail: String,
}

/// Checks that the averaged product minus `N sum_i c_i (...)` is an
/// Eisenstein series of weight `l + m` on `Gamma(M)`. `prec_m` counts
/// `q_M` coefficients; the check itself runs in `q_{NM}`.
pub fn verify_trace(prob: &TraceProblem, l: i64, m: i64, prec_m: Option<usize>) -> Result<TraceOutcome> {
    let k = l + m;
    let prec_m = prec_m.unwrap_or_else(|| default_prec(k, prob.m));
    let need = sturm_bound(k, prob.m) + 1;
    if prec_m < need {
        return Err(Error::InsufficientPrecision { have: prec_m, need });
    }
    let big = prob.big_level();
    let prec = prec_m * prob.n as usize;
    let lhs = trace_lhs(prob, l, m, prec)?;
    let rhs = trace_rhs(prob, l, m, prec_m)?;
    let rhs = match holomorphize(&rhs, prob.m)? {
        Some(r) => r,
        None => {
            return Ok(TraceOutcome {
                passed: false,
                prec,
                detail: "u-part of the right side is not Eisenstein".into(),
            })
        }
    };
    let diff = lhs.sub(&rhs.level_lift(big)?)?;
    if diff.is_zero() {
        return Ok(TraceOutcome {
            passed: true,
            prec,
            detail: "difference vanishes".into(),
        });
    }
    Ok(match eisenstein_membership(&diff, k, prob.m, prec)? {
        Membership::Member(c) => TraceOutcome {
            passed: true,
            prec: c.residual_checked_to,
            detail: "difference is Eisenstein".into(),
        },
        Membership::NotMember { first_mismatch } => TraceOutcome {
            passed: false,
            prec,
            detail: format!("difference not Eisenstein (first mismatch q_{big}^{first_mismatch})"),
        },
    })
}

/// Runs `verify_trace` for every pair `(lam, mu)` at level `M`.
pub fn trace_suite(
    n: u32,
    shift: i64,
    m: u32,
    l: i64,
    mm: i64,
    prec_m: Option<usize>,
    pairs: Option<Vec<(TorsionPoint, TorsionPoint)>>,
) -> Vec<VerificationReport> {
    let pairs = pairs.unwrap_or_else(|| {
        let pts = TorsionPoint::all(m);
        pts.iter()
            .flat_map(|&a| pts.iter().map(move |&b| (a, b)))
            .collect()
    });
    let pm = prec_m.unwrap_or_else(|| default_prec(l + mm, m));
    pairs
        .into_par_iter()
        .map(|(lam, mu)| {
            run_case(
                "trace",
                format!(
                    "N{n}S{shift}M{m}k{l},{mm}p({},{};{},{})",
                    lam.c1(),
                    lam.c2(),
                    mu.c1(),
                    mu.c2()
                ),
                format!(
                    "eisenperiod verify trace --N {n} --S {shift} --M {m} --weights {l},{mm} --prec {pm} --pair '{},{};{},{}'",
                    lam.c1(),
                    lam.c2(),
                    mu.c1(),
                    mu.c2()
                ),
                || {
                    let prob = TraceProblem::new(n, shift, lam, mu)?;
                    let o = verify_trace(&prob, l, mm, Some(pm))?;
                    Ok((o.passed, Some(o.prec), o.detail))
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_cases() {
        let t = |c, p, q, r, s| TraceTerm { c, p, q, r, s };
        for n in 1..=12 {
            assert_eq!(trace_matrices(n, 0).unwrap(), vec![t(1, n, 0, 0, 1)]);
        }
        for n in 2..=12 {
            assert_eq!(
                trace_matrices(n, 1).unwrap(),
                vec![t(-1, 0, n, -1, -1), t(-1, -1, -1, n, 0)]
            );
        }
    }

    #[test]
    fn invariants_and_term_counts() {
        for n in 1..=12i64 {
            for s in 0..n {
                let terms = trace_matrices(n, s).unwrap();
                for term in &terms {
                    assert!(term.satisfies(n, s), "N={n} S={s} {term}");
                }
                if s >= 2 {
                    assert_eq!(terms.len(), 1 + trace_matrices(s, n % s).unwrap().len());
                }
            }
        }
    }

    #[test]
    fn five_two() {
        let terms = trace_matrices(5, 2).unwrap();
        for term in &terms {
            assert_eq!(term.det(), 5);
            assert_eq!((term.p - 2 * term.q).rem_euclid(5), 0);
            assert_eq!((term.r - 2 * term.s).rem_euclid(5), 0);
        }
    }

    #[test]
    fn out_of_range_shift() {
        assert!(trace_matrices(3, 3).is_err());
        assert!(trace_matrices(3, -1).is_err());
    }

    #[test]
    fn distribution_relation() {
        // S = 0: sum_tau E_{l,lam+tau} E_{m,mu} = N^l E_{l,N lam} E_{m,mu}
        let lam = TorsionPoint::new(3, 1, 2);
        let mu = TorsionPoint::new(3, 2, 0);
        let prob = TraceProblem::new(2, 0, lam, mu).unwrap();
        let lhs = trace_lhs(&prob, 3, 4, 40).unwrap();
        let rhs = eis(3, lam.scale(2), 20)
            .unwrap()
            .mul(&eis(4, mu, 20).unwrap())
            .unwrap()
            .scale_int(8)
            .level_lift(6)
            .unwrap();
        assert!(lhs.eq_to_prec(&rhs));
    }

    #[test]
    fn modulus_one_is_trivial() {
        let lam = TorsionPoint::new(3, 1, 1);
        let mu = TorsionPoint::new(3, 0, 2);
        let prob = TraceProblem::new(1, 0, lam, mu).unwrap();
        let lhs = trace_lhs(&prob, 3, 3, 20).unwrap();
        let rhs = trace_rhs(&prob, 3, 3, 20).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn lhs_is_invariant_under_representative_choice() {
        let lam = TorsionPoint::new(3, 1, 1);
        let mu = TorsionPoint::new(3, 0, 2);
        let a = trace_lhs(&TraceProblem::new(2, 1, lam, mu).unwrap(), 3, 3, 30).unwrap();
        let b = trace_lhs(&TraceProblem::new(2, 3, lam, mu).unwrap(), 3, 3, 30).unwrap();
        assert!(a.eq_to_prec(&b));
    }

    #[test]
    fn small_trace_identity() {
        let lam = TorsionPoint::new(3, 1, 2);
        let mu = TorsionPoint::new(3, 2, 2);
        let prob = TraceProblem::new(2, 1, lam, mu).unwrap();
        let o = verify_trace(&prob, 3, 3, None).unwrap();
        assert!(o.passed, "{}", o.detail);
        assert!(o.prec >= 2 * 12 * 2);
    }

    #[test]
    fn wrong_sign_is_detected() {
        let lam = TorsionPoint::new(3, 1, 2);
        let mu = TorsionPoint::new(3, 2, 2);
        let prob = TraceProblem::new(3, 1, lam, mu).unwrap();
        let pm = default_prec(6, 3);
        let lhs = trace_lhs(&prob, 3, 3, 3 * pm).unwrap();
        let rhs = holomorphize(&trace_rhs(&prob, 3, 3, pm).unwrap().neg(), 3)
            .unwrap()
            .unwrap();
        let diff = lhs.sub(&rhs.level_lift(9).unwrap()).unwrap();
        let m = eisenstein_membership(&diff, 6, 3, 3 * pm).unwrap();
        assert!(!m.is_member());
    }
}
