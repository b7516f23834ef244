//! Verification suites over all triples of a level. Each case yields one
//! [`VerificationReport`].

use rayon::prelude::*;

use crate::eisenstein::{e2_difference, eis, TorsionPoint};
use crate::error::{Error, Result};
use crate::qseries::{default_prec, BivarPoly, ModularExpression};
use crate::report::{run_case, VerificationReport};

use super::{
    a_sum, eisenstein_membership, theorem31_closed_form, theorem31_expression, Membership,
    TorsionTriple,
};

type CaseResult = Result<(bool, Option<usize>, String)>;

fn triple_flag(t: &TorsionTriple) -> String {
    format!(
        "'{},{};{},{}'",
        t.lam.c1(),
        t.lam.c2(),
        t.mu.c1(),
        t.mu.c2()
    )
}

fn first_bivar_mismatch(x: &BivarPoly, y: &BivarPoly) -> Option<String> {
    for (i, j, e) in x.terms() {
        let f = y.get(i, j);
        if let Some(n) = e.hol.first_difference(&f.hol) {
            return Some(format!("a^{i}b^{j} coefficient differs at q^{n}"));
        }
        if !e.polar.eq_to_prec(&f.polar) || !e.polar2.eq_to_prec(&f.polar2) {
            return Some(format!("a^{i}b^{j} polar parts differ"));
        }
    }
    None
}

fn exact_eq(x: &ModularExpression, y: &ModularExpression, what: &str) -> Option<String> {
    if let Some(n) = x.hol.first_difference(&y.hol) {
        return Some(format!("{what}: differs at q^{n}"));
    }
    if !x.polar.eq_to_prec(&y.polar) || !x.polar2.eq_to_prec(&y.polar2) {
        return Some(format!("{what}: polar parts differ"));
    }
    None
}

fn membership_detail(m: &Membership, what: &str) -> Option<String> {
    match m {
        Membership::Member(_) => None,
        Membership::NotMember { first_mismatch } => {
            Some(format!("{what}: not in the Eisenstein span (first mismatch q^{first_mismatch})"))
        }
    }
}

/// Checks the generating expression for one triple: polar cancellation, then
/// the closed form when all three points are nonzero, otherwise membership of
/// every `a^i b^j` coefficient.
pub fn thm31_case(t: &TorsionTriple, w: usize, prec: usize) -> CaseResult {
    let n = t.level();
    let k = w as i64 + 2;
    let expr = theorem31_expression(t, w, prec)?;
    if !expr.is_holomorphic() {
        return Ok((false, Some(prec), "polar part does not cancel".into()));
    }
    if t.all_nonzero() {
        let closed = theorem31_closed_form(t, w, prec)?;
        return Ok(match first_bivar_mismatch(&expr, &closed) {
            None => (true, Some(prec), "closed form holds".into()),
            Some(d) => (false, Some(prec), d),
        });
    }
    for (i, j, e) in expr.terms() {
        let m = eisenstein_membership(e, k, n, prec)?;
        if let Some(d) = membership_detail(&m, &format!("a^{i}b^{j}")) {
            return Ok((false, Some(prec), d));
        }
    }
    Ok((true, Some(prec), "every coefficient is Eisenstein".into()))
}

pub fn thm31_suite(
    level: u32,
    w: usize,
    prec: Option<usize>,
    triples: Option<Vec<TorsionTriple>>,
) -> Vec<VerificationReport> {
    let prec = prec.unwrap_or_else(|| default_prec(w as i64 + 2, level));
    let triples = triples.unwrap_or_else(|| TorsionTriple::all(level));
    triples
        .par_iter()
        .map(|t| {
            run_case(
                "thm31",
                format!("N{level}w{w}t{}", t.label()),
                format!(
                    "eisenperiod verify thm31 --level {level} --w {w} --triple {} --prec {prec}",
                    triple_flag(t)
                ),
                || thm31_case(t, w, prec),
            )
        })
        .collect()
}

/// Weight 2: `A_l A_m + A_m A_n + A_n A_l` is Eisenstein, and for nonzero
/// triples `(A_l + A_m + A_n)^2 = B_l + B_m + B_n - 3 B_0`.
pub fn weight2_case(t: &TorsionTriple, prec: usize) -> CaseResult {
    let n = t.level();
    let a = |p: TorsionPoint| eis(1, p, prec);
    let cyc = a(t.lam)?
        .mul(&a(t.mu)?)?
        .add(&a(t.mu)?.mul(&a(t.nu)?)?)?
        .add(&a(t.nu)?.mul(&a(t.lam)?)?)?;
    let m = eisenstein_membership(&cyc, 2, n, prec)?;
    if let Some(d) = membership_detail(&m, "cyclic A-product sum") {
        return Ok((false, Some(prec), d));
    }
    if t.all_nonzero() {
        let s = a_sum(t, prec)?;
        let lhs = s.mul(&s)?;
        let rhs = e2_difference(t.lam, prec)?
            .add(&e2_difference(t.mu, prec)?)?
            .add(&e2_difference(t.nu, prec)?)?;
        if let Some(d) = exact_eq(&lhs, &rhs, "square of A-sum") {
            return Ok((false, Some(prec), d));
        }
        return Ok((true, Some(prec), "certificate found; square identity holds".into()));
    }
    Ok((true, Some(prec), "certificate found".into()))
}

pub fn weight2_suite(
    level: u32,
    prec: Option<usize>,
    triples: Option<Vec<TorsionTriple>>,
) -> Vec<VerificationReport> {
    let prec = prec.unwrap_or_else(|| default_prec(2, level));
    triples
        .unwrap_or_else(|| TorsionTriple::all(level))
        .par_iter()
        .map(|t| {
            run_case(
                "weight2",
                format!("N{level}t{}", t.label()),
                format!(
                    "eisenperiod verify weight2 --level {level} --triple {} --prec {prec}",
                    triple_flag(t)
                ),
                || weight2_case(t, prec),
            )
        })
        .collect()
}

/// Weight 3: `(A_l + A_m + A_n)(B_l - B_n) = C_l - C_n` for nonzero triples.
pub fn weight3_case(t: &TorsionTriple, prec: usize) -> CaseResult {
    if !t.all_nonzero() {
        return Err(Error::InvalidArgument("weight-3 identity needs nonzero points".into()));
    }
    let lhs = a_sum(t, prec)?.mul(&eis(2, t.lam, prec)?.sub(&eis(2, t.nu, prec)?)?)?;
    let rhs = eis(3, t.lam, prec)?.sub(&eis(3, t.nu, prec)?)?;
    Ok(match exact_eq(&lhs, &rhs, "(A-sum)(B_l - B_n)") {
        None => (true, Some(prec), "equals C_l - C_n".into()),
        Some(d) => (false, Some(prec), d),
    })
}

pub fn weight3_suite(
    level: u32,
    prec: Option<usize>,
    triples: Option<Vec<TorsionTriple>>,
) -> Vec<VerificationReport> {
    let prec = prec.unwrap_or_else(|| default_prec(3, level));
    triples
        .unwrap_or_else(|| TorsionTriple::all_nonzero_at(level))
        .par_iter()
        .map(|t| {
            run_case(
                "weight3",
                format!("N{level}t{}", t.label()),
                format!(
                    "eisenperiod verify weight3 --level {level} --triple {} --prec {prec}",
                    triple_flag(t)
                ),
                || weight3_case(t, prec),
            )
        })
        .collect()
}

/// `E~_{4,l} = (E~_{2,l} - E~_{2,0})^2 - 5 E~_{4,0}`.
pub fn weight4_classical(lam: TorsionPoint, prec: usize) -> Result<bool> {
    if lam.is_zero() {
        return Err(Error::InvalidArgument("needs a nonzero torsion point".into()));
    }
    let d = e2_difference(lam, prec)?;
    let rhs = d.mul(&d)?.sub(&eis(4, TorsionPoint::zero(lam.level()), prec)?.scale_int(5))?;
    Ok(eis(4, lam, prec)?.eq_to_prec(&rhs))
}

/// Weight-4 checks for one nonzero triple: the classical identity for `lam`,
/// membership of `(B_l - B_0)^2`, and membership of the two holomorphic
/// combinations `(A-sum)(C_l + C_n) - (B_l - B_0)(B_n - B_0)` and
/// `(B_l-B_0)(B_m-B_0) - (B_l-B_0)(B_n-B_0) - (B_m-B_0)(B_n-B_0) + 2 (A-sum) C_n`.
pub fn weight4_suite(
    lam: TorsionPoint,
    mu: TorsionPoint,
    nu: TorsionPoint,
    prec: usize,
) -> Result<Vec<(String, bool, String)>> {
    let t = TorsionTriple::new(lam, mu, nu)?;
    if !t.all_nonzero() {
        return Err(Error::InvalidArgument("weight-4 suite needs nonzero points".into()));
    }
    let n = t.level();
    let mut out = Vec::new();
    let classical = weight4_classical(lam, prec)?;
    out.push(("classical".to_string(), classical, String::new()));
    let dl = e2_difference(lam, prec)?;
    let dm = e2_difference(mu, prec)?;
    let dn = e2_difference(nu, prec)?;
    let sq = eisenstein_membership(&dl.mul(&dl)?, 4, n, prec)?;
    out.push((
        "square".to_string(),
        sq.is_member(),
        membership_detail(&sq, "(B_l - B_0)^2").unwrap_or_default(),
    ));
    let s = a_sum(&t, prec)?;
    let first = s
        .mul(&eis(3, lam, prec)?.add(&eis(3, nu, prec)?)?)?
        .sub(&dl.mul(&dn)?)?;
    let m1 = eisenstein_membership(&first, 4, n, prec)?;
    out.push((
        "a2".to_string(),
        m1.is_member(),
        membership_detail(&m1, "a^2 combination").unwrap_or_default(),
    ));
    let second = dl
        .mul(&dm)?
        .sub(&dl.mul(&dn)?)?
        .sub(&dm.mul(&dn)?)?
        .add(&s.mul(&eis(3, nu, prec)?)?.scale_int(2))?;
    let m2 = eisenstein_membership(&second, 4, n, prec)?;
    out.push((
        "ab".to_string(),
        m2.is_member(),
        membership_detail(&m2, "ab combination").unwrap_or_default(),
    ));
    Ok(out)
}

pub fn weight4_level_suite(
    level: u32,
    prec: Option<usize>,
    triples: Option<Vec<TorsionTriple>>,
) -> Vec<VerificationReport> {
    let prec = prec.unwrap_or_else(|| default_prec(4, level));
    triples
        .unwrap_or_else(|| TorsionTriple::all_nonzero_at(level))
        .par_iter()
        .map(|t| {
            run_case(
                "weight4",
                format!("N{level}t{}", t.label()),
                format!(
                    "eisenperiod verify weight4 --level {level} --triple {} --prec {prec}",
                    triple_flag(t)
                ),
                || {
                    let checks = weight4_suite(t.lam, t.mu, t.nu, prec)?;
                    match checks.iter().find(|c| !c.1) {
                        None => Ok((true, Some(prec), "classical, square, a2, ab".into())),
                        Some((name, _, d)) => Ok((false, Some(prec), format!("{name}: {d}"))),
                    }
                },
            )
        })
        .collect()
}
