//! One line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use eisenperiod::eisenstein::{
    e2_difference, eis, lattice_sum_extrapolated, weierstrass_at, weierstrass_eval,
    WeierstrassKind,
};
use eisenperiod::identities::suites::{thm31_case, weight2_suite, weight3_suite, weight4_classical};
use eisenperiod::identities::TorsionTriple;
use eisenperiod::orbits_periods::suites::{
    bijection_suite, manin_suite, prop22_suite, MANIN_SIGMA_TOL, MANIN_TAU_TOL, PROP22_TOL,
};
use eisenperiod::orbits_periods::CuspFormNumeric;
use eisenperiod::qseries::{default_prec, sturm_bound};
use eisenperiod::trace::{trace_matrices, trace_suite, TraceTerm};
use eisenperiod::{Rational, TorsionPoint, VerificationReport};

type Outcome = (bool, String);

fn summarize(reports: &[VerificationReport]) -> Outcome {
    match reports.iter().find(|r| !r.passed()) {
        None => (true, format!("{} cases", reports.len())),
        Some(r) => (false, r.serialize()),
    }
}

fn closed_form(ws: std::ops::RangeInclusive<usize>) -> Outcome {
    let mut cases = 0;
    for n in [3u32, 4, 5] {
        for w in ws.clone() {
            let prec = default_prec(w as i64 + 2, n);
            assert!(prec >= 2 * sturm_bound(w as i64 + 2, n));
            for t in TorsionTriple::all_nonzero_at(n) {
                cases += 1;
                match thm31_case(&t, w, prec) {
                    Ok((true, _, _)) => {}
                    Ok((false, _, d)) => return (false, format!("N={n} w={w} {}: {d}", t.label())),
                    Err(e) => return (false, format!("N={n} w={w} {}: {e}", t.label())),
                }
            }
        }
    }
    (true, format!("{cases} triples"))
}

fn low_weight() -> Outcome {
    let mut all = Vec::new();
    for n in [3u32, 4, 5] {
        all.extend(weight2_suite(n, None, None));
        all.extend(weight3_suite(n, None, None));
    }
    summarize(&all)
}

fn weight_four() -> Outcome {
    let mut cases = 0;
    for n in [3u32, 4, 5] {
        let prec = default_prec(4, n);
        for p in TorsionPoint::all(n).into_iter().filter(|p| !p.is_zero()) {
            cases += 1;
            match weight4_classical(p, prec) {
                Ok(true) => {}
                Ok(false) => return (false, format!("fails at {p}")),
                Err(e) => return (false, format!("{p}: {e}")),
            }
        }
    }
    (true, format!("{cases} points"))
}

fn trace_base_cases() -> Outcome {
    let t = |c, p, q, r, s| TraceTerm { c, p, q, r, s };
    for n in 1..=12i64 {
        if trace_matrices(n, 0).unwrap() != vec![t(1, n, 0, 0, 1)] {
            return (false, format!("S=0 at N={n}"));
        }
        if n > 1 && trace_matrices(n, 1).unwrap() != vec![t(-1, 0, n, -1, -1), t(-1, -1, -1, n, 0)] {
            return (false, format!("S=1 at N={n}"));
        }
        for s in 0..n {
            for term in trace_matrices(n, s).unwrap() {
                if !term.satisfies(n, s) {
                    return (false, format!("N={n} S={s}: {term}"));
                }
            }
        }
    }
    (true, "N <= 12, all S".into())
}

fn trace_grid() -> Outcome {
    let mut all = Vec::new();
    for n in [2u32, 3] {
        for s in 0..n as i64 {
            for m in [3u32, 4] {
                for (l, mm) in [(3, 3), (3, 4)] {
                    all.extend(trace_suite(n, s, m, l, mm, None, None));
                }
            }
        }
    }
    summarize(&all)
}

fn orbits() -> Outcome {
    let mut all = Vec::new();
    for n in [3u32, 4] {
        all.extend(bijection_suite(n, &Rational::from_integer(2.into())));
    }
    summarize(&all)
}

fn oracles() -> Outcome {
    let z = Complex64::new(0.1, 0.8);
    let mut worst = 0.0f64;
    for (l, n) in [(3, 3), (4, 4), (5, 5), (3, 5)] {
        for p in TorsionPoint::all(n) {
            let series = eis(l, p, 80).unwrap().hol.eval(z);
            let (direct, _) = lattice_sum_extrapolated(l, &p, z, 1e-9).unwrap();
            worst = worst.max((series - direct).norm());
        }
    }
    let z = Complex64::new(0.05, 0.9);
    let scale = Complex64::new(0.0, -2.0 * PI).powi(2);
    for n in [3, 4, 5] {
        let pts = TorsionPoint::all(n);
        for p in pts.iter().filter(|p| !p.is_zero()) {
            let series = e2_difference(*p, 80).unwrap().hol.eval(z);
            let wp = weierstrass_eval(WeierstrassKind::P, p, z, 40).unwrap() / scale;
            worst = worst.max((series - wp).norm());
        }
        for lam in pts.iter().filter(|p| !p.is_zero()) {
            for mu in pts.iter().filter(|p| !p.is_zero()) {
                let nu = lam.add(mu).unwrap().neg();
                if nu.is_zero() {
                    continue;
                }
                let u_nu = -(lam.z_lambda(z) + mu.z_lambda(z));
                let zeta = weierstrass_eval(WeierstrassKind::Zeta, lam, z, 40).unwrap()
                    + weierstrass_eval(WeierstrassKind::Zeta, mu, z, 40).unwrap()
                    + weierstrass_at(WeierstrassKind::Zeta, u_nu, z, 40);
                let a: Complex64 =
                    [*lam, *mu, nu].iter().map(|p| eis(1, *p, 80).unwrap().hol.eval(z)).sum();
                worst = worst.max((zeta - a * Complex64::new(0.0, -2.0 * PI)).norm());
            }
        }
    }
    (worst < 1e-8, format!("max deviation {worst:.2e}"))
}

fn main() {
    let delta = CuspFormNumeric::delta(160);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("closed form of the generating expression, w = 1..4", Box::new(|| closed_form(1..=4))),
        ("generating expression at w = 0", Box::new(|| closed_form(0..=0))),
        ("weight-2 and weight-3 product identities", Box::new(low_weight)),
        ("weight-4 classical identity", Box::new(weight_four)),
        ("trace matrices: base cases and invariants", Box::new(trace_base_cases)),
        ("trace identity grid", Box::new(trace_grid)),
        ("orbit bijections, N = 3, 4, det <= 2", Box::new(orbits)),
        (
            "Manin relations for Delta",
            Box::new(|| summarize(&manin_suite(&delta, "delta", MANIN_SIGMA_TOL, MANIN_TAU_TOL))),
        ),
        (
            "half-plane integrals against closed forms",
            Box::new(|| {
                let mut r = prop22_suite(&delta, 5, 7, PROP22_TOL);
                r.extend(prop22_suite(&delta, 7, 5, PROP22_TOL));
                summarize(&r)
            }),
        ),
        ("numeric oracle consistency", Box::new(oracles)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        let status = if ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {name} ({detail}; {:.1}s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        if !ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
