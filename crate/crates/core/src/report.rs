//! One-line `key=value` verification records.

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

impl std::str::FromStr for Status {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            "error" => Ok(Status::Error),
            _ => Err(Error::Parse(format!("unknown status '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub case_id: String,
    pub status: Status,
    pub residual_prec: Option<usize>,
    /// Seconds.
    pub wall_time: f64,
    /// Command line reproducing the case; set for fail and error records.
    pub repro: Option<String>,
    pub detail: String,
}

impl VerificationReport {
    pub fn new(suite: &str, case_id: impl Into<String>) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            case_id: case_id.into(),
            status: Status::Pass,
            residual_prec: None,
            wall_time: 0.0,
            repro: None,
            detail: "ok".to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn serialize(&self) -> String {
        let mut s = format!(
            "suite={} case={} status={} residual_prec={} wall_time={}s",
            self.suite,
            self.case_id,
            self.status.as_str(),
            self.residual_prec
                .map(|p| p.to_string())
                .unwrap_or_else(|| "-".into()),
            self.wall_time
        );
        if let Some(r) = &self.repro {
            s.push_str(&format!(" repro=\"{}\"", r.replace('"', "'")));
        }
        s.push_str(" detail=");
        s.push_str(&self.detail.replace('\n', " "));
        s
    }

    pub fn parse(line: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("report: {m}"));
        let (head, detail) = line
            .split_once(" detail=")
            .ok_or_else(|| bad("missing detail"))?;
        let (head, repro) = match head.split_once(" repro=\"") {
            Some((h, r)) => (
                h,
                Some(
                    r.strip_suffix('"')
                        .ok_or_else(|| bad("unterminated repro"))?
                        .to_string(),
                ),
            ),
            None => (head, None),
        };
        let mut fields = head.split(' ');
        let mut next = |key: &str| -> Result<String> {
            let kv = fields.next().ok_or_else(|| bad("missing field"))?;
            kv.strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("expected {key}")))
        };
        let suite = next("suite")?;
        let case_id = next("case")?;
        let status = next("status")?.parse()?;
        let rp = next("residual_prec")?;
        let residual_prec = if rp == "-" {
            None
        } else {
            Some(rp.parse().map_err(|_| bad("residual_prec"))?)
        };
        let wt = next("wall_time")?;
        let wall_time = wt
            .strip_suffix('s')
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| bad("wall_time"))?;
        Ok(VerificationReport {
            suite,
            case_id,
            status,
            residual_prec,
            wall_time,
            repro,
            detail: detail.to_string(),
        })
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Runs `check`, timing it and turning its outcome into a record.
///
/// `check` returns `Ok((passed, residual_prec, detail))`; an `Err` becomes an
/// error record.
pub fn run_case<F>(suite: &str, case_id: String, repro: String, check: F) -> VerificationReport
where
    F: FnOnce() -> Result<(bool, Option<usize>, String)>,
{
    let start = Instant::now();
    let outcome = check();
    let mut r = VerificationReport::new(suite, case_id);
    r.wall_time = (start.elapsed().as_secs_f64() * 1000.0).round() / 1000.0;
    match outcome {
        Ok((ok, prec, detail)) => {
            r.status = if ok { Status::Pass } else { Status::Fail };
            r.residual_prec = prec;
            r.detail = detail;
        }
        Err(e) => {
            r.status = Status::Error;
            r.detail = e.to_string();
        }
    }
    if !r.passed() {
        r.repro = Some(repro);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pass_record_format() {
        let mut r = VerificationReport::new("thm31", "N3w2t(0,1,2)");
        r.residual_prec = Some(58);
        r.wall_time = 0.8;
        assert_eq!(
            r.serialize(),
            "suite=thm31 case=N3w2t(0,1,2) status=pass residual_prec=58 wall_time=0.8s detail=ok"
        );
    }

    #[test]
    fn fail_record_has_repro() {
        let r = run_case("x", "c1".into(), "eisenperiod verify x".into(), || {
            Ok((false, Some(3), "mismatch at 2".into()))
        });
        let s = r.serialize();
        assert!(s.contains("status=fail"));
        assert!(s.contains("repro=\"eisenperiod verify x\""));
        assert_eq!(VerificationReport::parse(&s).unwrap(), r);
    }

    fn arb_report() -> impl Strategy<Value = VerificationReport> {
        (
            "[a-z0-9]{1,8}",
            "[A-Za-z0-9(),;]{1,12}",
            0..3u8,
            prop::option::of(0usize..10_000),
            0u32..100_000,
            prop::option::of("[a-z \\-0-9]{1,20}"),
            "[ -~]{0,40}",
        )
            .prop_map(|(suite, case_id, st, rp, ms, repro, detail)| VerificationReport {
                suite,
                case_id,
                status: [Status::Pass, Status::Fail, Status::Error][st as usize],
                residual_prec: rp,
                wall_time: ms as f64 / 1000.0,
                repro,
                detail,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn round_trip(r in arb_report()) {
            let parsed = VerificationReport::parse(&r.serialize()).unwrap();
            prop_assert_eq!(parsed, r);
        }
    }
}
