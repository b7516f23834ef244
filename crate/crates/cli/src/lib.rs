//! Argument handling and dispatch for the `eisenperiod` binary.
//!
//! [`run`] takes the full argument vector and writes reports to `out` and
//! diagnostics to `err`, returning the process exit code: 0 when every
//! launched case passes, 1 when some case fails, 2 on usage errors.

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use eisenperiod::eisenstein;
use eisenperiod::identities::suites::{
    thm31_suite, weight2_suite, weight3_suite, weight4_level_suite,
};
use eisenperiod::orbits_periods::suites::{
    bijection_suite, manin_suite, orbit_lines, prop22_suite, MANIN_SIGMA_TOL, MANIN_TAU_TOL,
    PROP22_TOL,
};
use eisenperiod::orbits_periods::{
    period_pairing_at, period_pairing_quadrature, CuspFormNumeric, Polynomial, Sign,
};
use eisenperiod::qseries::default_prec;
use eisenperiod::report::run_case;
use eisenperiod::trace::trace_suite;
use eisenperiod::{
    eisenstein_expansion, eisenstein_membership, trace_matrices, EisensteinDescriptor, Error,
    Membership, Rational, TorsionPoint, TorsionTriple, VerificationReport,
};

/// Overrides the default q-expansion precision when `--prec` is absent.
pub const PREC_ENV: &str = "EISENPERIOD_PREC";

#[derive(Parser, Debug)]
#[command(name = "eisenperiod", version, about = "Eisenstein series q-expansions and product identities")]
pub struct Cli {
    /// Worker threads for independent cases.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the q-expansion of one normalized Eisenstein series.
    Expand {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        weight: i64,
        /// Torsion point `c1/N,c2/N`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        prec: Option<usize>,
    },
    /// Run a verification suite, one report line per case.
    #[command(subcommand)]
    Verify(Suite),
    /// Print the signed matrices of the trace identity, or verify it.
    Trace {
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long = "S", allow_hyphen_values = true)]
        s: i64,
        #[arg(long)]
        matrices_only: bool,
        #[command(flatten)]
        rest: TraceArgs,
    },
    /// List orbit representatives, one `a b c d (det)` line each.
    Orbits {
        #[arg(long, value_parser = level_parser())]
        level: u32,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        #[arg(long, default_value = "2")]
        detmax: String,
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: String,
    },
    /// Period pairing of a cusp form with a polynomial.
    Periods {
        #[arg(long, default_value = "delta")]
        form: String,
        /// Coefficients `c0,c1,...` of the polynomial in ascending degree.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "monomial")]
        poly: Option<String>,
        /// Use `z^j`.
        #[arg(long)]
        monomial: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value = "termwise", value_parser = ["termwise", "quadrature"])]
        method: String,
    },
    /// Decide whether a product of Eisenstein series is Eisenstein.
    Membership {
        /// Weight of the product.
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        weight: i64,
        /// Level `M` of the target space.
        #[arg(long, value_parser = level_parser())]
        level: u32,
        /// Factor `l:c1/N,c2/N`; repeat for a product.
        #[arg(long = "factor", required = true, allow_hyphen_values = true)]
        factors: Vec<String>,
        #[arg(long)]
        prec: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long = "M", value_parser = level_parser())]
    pub m: Option<u32>,
    /// `l,m`.
    #[arg(long, default_value = "3,3")]
    pub weights: String,
    /// Restrict to one pair `c1,c2;d1,d2` at level `M`.
    #[arg(long, allow_hyphen_values = true)]
    pub pair: Option<String>,
    /// Precision at level `M`.
    #[arg(long)]
    pub prec: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Suite {
    /// Generating expression against its closed form.
    Thm31 {
        #[arg(long, value_parser = level_parser())]
        level: u32,
        #[arg(long)]
        w: usize,
        /// Restrict to the triple completing `c1,c2;d1,d2`.
        #[arg(long, allow_hyphen_values = true)]
        triple: Option<String>,
        #[arg(long)]
        prec: Option<usize>,
    },
    /// Weight-2 cyclic products.
    Weight2(LevelArgs),
    /// Weight-3 product identity.
    Weight3(LevelArgs),
    /// Weight-4 identities.
    Weight4(LevelArgs),
    /// Trace identity at level `M`.
    Trace {
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long = "S", allow_hyphen_values = true)]
        s: i64,
        #[command(flatten)]
        rest: TraceArgs,
    },
    /// Both Manin relations for every monomial of degree at most `k - 2`.
    Manin {
        #[arg(long, default_value = "delta")]
        form: String,
        /// Tolerance for both relations; overrides the two below.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = MANIN_SIGMA_TOL)]
        tol_sigma: f64,
        #[arg(long, default_value_t = MANIN_TAU_TOL)]
        tol_tau: f64,
    },
    /// Quadrature of the half-plane integrals against their closed forms.
    Prop22 {
        #[arg(long, default_value = "5,7")]
        split: String,
        #[arg(long, default_value = "delta")]
        form: String,
        #[arg(long, default_value_t = PROP22_TOL)]
        tol: f64,
    },
    /// Orbit bijections for every triple at the level.
    Bijections {
        #[arg(long, value_parser = level_parser())]
        level: u32,
        #[arg(long, default_value = "2")]
        detmax: String,
    },
}

#[derive(Args, Debug)]
pub struct LevelArgs {
    #[arg(long, value_parser = level_parser())]
    pub level: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub triple: Option<String>,
    #[arg(long)]
    pub prec: Option<usize>,
}

fn level_parser() -> clap::builder::RangedI64ValueParser<u32> {
    clap::value_parser!(u32).range(1..)
}

/// A malformed value that clap could not catch; reported as a usage error.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Usage>;

fn env_prec() -> Option<usize> {
    std::env::var(PREC_ENV).ok().and_then(|v| v.trim().parse().ok())
}

fn prec_or_env(p: Option<usize>) -> Option<usize> {
    p.or_else(env_prec)
}

fn point_at(s: &str, level: u32) -> Result<TorsionPoint, Usage> {
    let p = TorsionPoint::parse(s)?;
    if !level.is_multiple_of(p.level()) {
        return Err(Usage(format!("point {s} does not have level dividing {level}")));
    }
    Ok(p.at_level(level)?)
}

/// `c1,c2;d1,d2` as two points at `level`.
fn parse_pair(s: &str, level: u32) -> Result<(TorsionPoint, TorsionPoint), Usage> {
    let bad = || Usage(format!("bad pair {s:?} (expected c1,c2;d1,d2)"));
    let (x, y) = s.split_once(';').ok_or_else(bad)?;
    let pt = |t: &str| -> Result<TorsionPoint, Usage> {
        let (a, b) = t.split_once(',').ok_or_else(bad)?;
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        Ok(TorsionPoint::new(level, a, b))
    };
    Ok((pt(x)?, pt(y)?))
}

fn parse_split(s: &str) -> Result<(i64, i64), Usage> {
    let bad = || Usage(format!("bad weight pair {s:?} (expected l,m)"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_rational(s: &str) -> Result<Rational, Usage> {
    let bad = || Usage(format!("bad rational {s:?}"));
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (i64, i64) =
                (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0 {
                return Err(bad());
            }
            Rational::new(a.into(), b.into())
        }
        None => Rational::from_integer(s.trim().parse::<i64>().map_err(|_| bad())?.into()),
    };
    Ok(r)
}

fn cusp_form(name: &str) -> Result<CuspFormNumeric, Usage> {
    match name {
        "delta" => Ok(CuspFormNumeric::delta(160)),
        _ => Err(Usage(format!("unknown form {name:?} (available: delta)"))),
    }
}

fn triples_for(level: u32, triple: &Option<String>) -> Result<Option<Vec<TorsionTriple>>, Usage> {
    match triple {
        None => Ok(None),
        Some(s) => {
            let (lam, mu) = parse_pair(s, level)?;
            Ok(Some(vec![TorsionTriple::complete(lam, mu)?]))
        }
    }
}

fn emit(out: &mut dyn Write, reports: &[VerificationReport]) -> i32 {
    for r in reports {
        let _ = writeln!(out, "{}", r.serialize());
    }
    if reports.iter().all(|r| r.passed()) {
        0
    } else {
        1
    }
}

fn run_trace(
    out: &mut dyn Write,
    n: u32,
    s: i64,
    rest: &TraceArgs,
) -> CmdResult {
    let m = rest.m.ok_or_else(|| Usage("--M is required to verify the trace identity".into()))?;
    let (l, mm) = parse_split(&rest.weights)?;
    let pairs = match &rest.pair {
        Some(p) => Some(vec![parse_pair(p, m)?]),
        None => None,
    };
    let reports = trace_suite(n, s, m, l, mm, prec_or_env(rest.prec), pairs);
    Ok(emit(out, &reports))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Expand { weight, point, prec } => {
            let p = TorsionPoint::parse(point)?;
            let d = EisensteinDescriptor::new(*weight, p)?;
            let prec = prec_or_env(*prec).unwrap_or_else(|| default_prec(*weight, p.level()));
            let e = eisenstein_expansion(&d, prec)?;
            let _ = writeln!(out, "{d}");
            let _ = writeln!(out, "{e}");
            Ok(0)
        }
        Command::Verify(suite) => verify(suite, out),
        Command::Trace { n, s, matrices_only, rest } => {
            if *matrices_only || rest.m.is_none() {
                let shift = s.rem_euclid(*n as i64);
                for t in trace_matrices(*n as i64, shift)? {
                    let _ = writeln!(out, "{t}");
                }
                return Ok(0);
            }
            run_trace(out, *n, *s, rest)
        }
        Command::Orbits { level, lambda, mu, detmax, sign } => {
            let lam = point_at(lambda, *level)?;
            let mu = point_at(mu, *level)?;
            let bound = parse_rational(detmax)?;
            for line in orbit_lines(lam, mu, &bound, Sign::parse(sign)?)? {
                let _ = writeln!(out, "{line}");
            }
            Ok(0)
        }
        Command::Periods { form, poly, monomial, tol, method } => {
            let f = cusp_form(form)?;
            let p: Polynomial<Complex64> = match (poly, monomial) {
                (_, Some(j)) => Polynomial::monomial(*j),
                (Some(s), None) => {
                    let mut c = Vec::new();
                    for t in s.split(',') {
                        let v: f64 = t
                            .trim()
                            .parse()
                            .map_err(|_| Usage(format!("bad coefficient {t:?}")))?;
                        c.push(Complex64::new(v, 0.0));
                    }
                    Polynomial::new(c)
                }
                (None, None) => Polynomial::monomial(0),
            };
            let v = if method == "quadrature" {
                period_pairing_quadrature(&f, &p, *tol)
            } else {
                period_pairing_at(&f, &p, 1.0, *tol)
            };
            match v {
                Ok(v) => {
                    let _ = writeln!(out, "{:.15e} {:.15e}", v.re, v.im);
                    Ok(0)
                }
                Err(e @ Error::NonConvergence { .. }) => {
                    let _ = writeln!(out, "error: {e}");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Membership { weight, level, factors, prec } => {
            let mut parsed = Vec::new();
            for f in factors {
                let (l, pt) = f
                    .split_once(':')
                    .ok_or_else(|| Usage(format!("bad factor {f:?} (expected l:c1/N,c2/N)")))?;
                let l: i64 = l.trim().parse().map_err(|_| Usage(format!("bad weight in {f:?}")))?;
                parsed.push((l, point_at(pt, *level)?));
            }
            if parsed.iter().map(|p| p.0).sum::<i64>() != *weight {
                return Err(Usage("factor weights do not sum to --weight".into()));
            }
            let prec = prec_or_env(*prec).unwrap_or_else(|| default_prec(*weight, *level));
            let desc = factors.join(" * ");
            let mut lines = Vec::new();
            let r = run_case(
                "membership",
                format!("M{level}k{weight}"),
                format!(
                    "eisenperiod membership --weight {weight} --level {level} {} --prec {prec}",
                    factors.iter().map(|f| format!("--factor {f}")).collect::<Vec<_>>().join(" ")
                ),
                || {
                    let mut e = eisenstein::eis(parsed[0].0, parsed[0].1, prec)?;
                    for (l, p) in &parsed[1..] {
                        e = e.mul(&eisenstein::eis(*l, *p, prec)?)?;
                    }
                    Ok(match eisenstein_membership(&e, *weight, *level, prec)? {
                        Membership::Member(c) => {
                            for (b, x) in c.basis.iter().zip(&c.coeffs) {
                                if x.is_zero() {
                                    continue;
                                }
                                if *weight == 2 {
                                    let zero = TorsionPoint::zero(b.point.level());
                                    lines.push(format!("({x}) * ({b} - E2[{zero}])"));
                                } else {
                                    lines.push(format!("({x}) * {b}"));
                                }
                            }
                            let note = if c.underdetermined { " (not unique)" } else { "" };
                            (
                                true,
                                Some(c.residual_checked_to),
                                format!("{desc} is Eisenstein{note}"),
                            )
                        }
                        Membership::NotMember { first_mismatch } => (
                            false,
                            Some(prec),
                            format!("{desc} is not Eisenstein (first mismatch q^{first_mismatch})"),
                        ),
                    })
                },
            );
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
            Ok(emit(out, &[r]))
        }
    }
}

fn verify(suite: &Suite, out: &mut dyn Write) -> CmdResult {
    let reports = match suite {
        Suite::Thm31 { level, w, triple, prec } => {
            thm31_suite(*level, *w, prec_or_env(*prec), triples_for(*level, triple)?)
        }
        Suite::Weight2(a) => {
            weight2_suite(a.level, prec_or_env(a.prec), triples_for(a.level, &a.triple)?)
        }
        Suite::Weight3(a) => {
            weight3_suite(a.level, prec_or_env(a.prec), triples_for(a.level, &a.triple)?)
        }
        Suite::Weight4(a) => {
            weight4_level_suite(a.level, prec_or_env(a.prec), triples_for(a.level, &a.triple)?)
        }
        Suite::Trace { n, s, rest } => return run_trace(out, *n, *s, rest),
        Suite::Manin { form, tol, tol_sigma, tol_tau } => {
            let f = cusp_form(form)?;
            manin_suite(&f, form, tol.unwrap_or(*tol_sigma), tol.unwrap_or(*tol_tau))
        }
        Suite::Prop22 { split, form, tol } => {
            let (l, m) = parse_split(split)?;
            prop22_suite(&cusp_form(form)?, l, m, *tol)
        }
        Suite::Bijections { level, detmax } => bijection_suite(*level, &parse_rational(detmax)?),
    };
    Ok(emit(out, &reports))
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j as usize).build() {
            Ok(pool) => {
                let mut buf: Vec<u8> = Vec::new();
                let r = pool.install(|| dispatch(&cli, &mut buf));
                let _ = out.write_all(&buf);
                r
            }
            Err(e) => Err(Usage(format!("cannot start {j} workers: {e}"))),
        },
        None => dispatch(&cli, out),
    };
    match result {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
    }
}
