//! Report-producing runs of the orbit and period checks.

use num_complex::Complex64;
use rayon::prelude::*;

use super::orbits::{check_tau_bijections_with, enumerate_all_orbits, Sign};
use super::periods::{
    closed_form_i, integral_i_with_estimate, period_form_i, period_pairing_at, CuspFormNumeric,
    IMatrix,
};
use super::slash::{complex_matrix, mat_mul, HalfPlaneFn, Polynomial, SIGMA, TAU};
use crate::cyclotomic::Rational;
use crate::eisenstein::TorsionPoint;
use crate::error::Result;
use crate::identities::TorsionTriple;
use crate::report::{run_case, VerificationReport};

pub const MANIN_SIGMA_TOL: f64 = 1e-8;
pub const MANIN_TAU_TOL: f64 = 1e-6;
pub const PROP22_TOL: f64 = 1e-3;

/// Residuals of both relations for `P = z^j`, each pairing split at a
/// different point so that no two terms share their quadrature.
pub fn manin_residuals(f: &CuspFormNumeric, j: usize) -> Result<(f64, f64)> {
    let w = (f.weight() - 2) as u32;
    let p: Polynomial<Complex64> = Polynomial::monomial(j);
    let tau = complex_matrix(&TAU);
    let tau2 = mat_mul(&tau, &tau);
    let a = period_pairing_at(f, &p, 1.3, 1e-13)?;
    let b = period_pairing_at(f, &p.slash(&complex_matrix(&SIGMA), w)?, 0.8, 1e-13)?;
    let c = period_pairing_at(f, &p.slash(&tau, w)?, 1.1, 1e-13)?;
    let d = period_pairing_at(f, &p.slash(&tau2, w)?, 0.9, 1e-13)?;
    Ok(((a + b).norm(), (a + c + d).norm()))
}

pub fn manin_suite(
    f: &CuspFormNumeric,
    form: &str,
    tol_sigma: f64,
    tol_tau: f64,
) -> Vec<VerificationReport> {
    let w = (f.weight() - 2).max(0) as usize;
    let repro = format!("eisenperiod verify manin --form {form} --tol-sigma {tol_sigma:e} --tol-tau {tol_tau:e}");
    (0..=w)
        .into_par_iter()
        .flat_map_iter(|j| {
            let res = manin_residuals(f, j);
            let mk = |name: &str, idx: usize, tol: f64| {
                let res = res.clone();
                run_case("manin", format!("{form}-{name}-z^{j}"), repro.clone(), move || {
                    let (s, t) = res?;
                    let r = if idx == 0 { s } else { t };
                    Ok((r <= tol, None, format!("residual={r:.3e} tol={tol:e}")))
                })
            };
            [mk("sigma", 0, tol_sigma), mk("tau", 1, tol_tau)]
        })
        .collect()
}

/// Quadrature of `I` against the closed forms, and the closed form against
/// its period expression.
pub fn prop22_suite(f: &CuspFormNumeric, l: i64, m: i64, tol: f64) -> Vec<VerificationReport> {
    let repro = format!("eisenperiod verify prop22 --split {l},{m} --tol {tol:e}");
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
    let mut out: Vec<VerificationReport> = [IMatrix::Identity, IMatrix::NegDet]
        .par_iter()
        .map(|&which| {
            let name = match which {
                IMatrix::Identity => "I",
                IMatrix::NegDet => "N",
            };
            run_case("prop22", format!("{name}-closed-l{l}m{m}"), repro.clone(), || {
                let (v, est) = integral_i_with_estimate(which, f, l, m)?;
                let c = closed_form_i(which, f, l, m, 1e-10)?;
                let e = rel(v, c);
                let est = est / v.norm();
                Ok((
                    e <= tol && est <= tol,
                    None,
                    format!("rel_diff={e:.3e} quad_est={est:.3e} tol={tol:e} value={v:.10e}"),
                ))
            })
        })
        .collect();
    out.push(run_case("prop22", format!("I-period-l{l}m{m}"), repro.clone(), || {
        let c = closed_form_i(IMatrix::Identity, f, l, m, 1e-10)?;
        let p = period_form_i(IMatrix::Identity, f, l, m, 1e-12)?;
        let e = rel(p, c);
        Ok((e <= tol, None, format!("rel_diff={e:.3e} tol={tol:e}")))
    }));
    out
}

/// Bijection checks for every triple at the level, keyed by `(lam, mu)`.
pub fn bijection_suite(level: u32, det_bound: &Rational) -> Vec<VerificationReport> {
    let repro = format!("eisenperiod verify bijections --level {level} --detmax {det_bound}");
    let tables = enumerate_all_orbits(level, det_bound, Sign::Pos)
        .and_then(|p| Ok((p, enumerate_all_orbits(level, det_bound, Sign::Neg)?)));
    let triples = TorsionTriple::all(level);
    triples
        .par_iter()
        .map(|t| {
            run_case("bijections", format!("N{level}D{det_bound}t{}", t.label()), repro.clone(), || {
                let (pos, neg) = tables.as_ref().map_err(Clone::clone)?;
                let rep = check_tau_bijections_with(pos, neg, t.lam, t.mu, t.nu)?;
                let sizes: usize = pos.get(&(t.lam, t.mu)).map_or(0, Vec::len);
                Ok(match rep.checks.iter().find(|c| !c.1) {
                    None => (
                        true,
                        None,
                        format!("{} maps checked, |Y+|={sizes} detmax={det_bound}", rep.checks.len()),
                    ),
                    Some((name, _, bad)) => {
                        (false, None, format!("{name} fails at {}", bad.clone().unwrap_or_default()))
                    }
                })
            })
        })
        .collect()
}

/// Orbits of `X^sign_{lam,mu}`, one `a b c d (det)` line each.
pub fn orbit_lines(
    lam: TorsionPoint,
    mu: TorsionPoint,
    det_bound: &Rational,
    sign: Sign,
) -> Result<Vec<String>> {
    Ok(super::orbits::enumerate_orbits(lam, mu, det_bound, sign)?
        .iter()
        .map(|o| o.rep.to_string())
        .collect())
}
