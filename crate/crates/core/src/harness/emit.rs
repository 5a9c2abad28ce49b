//! CSV and gnuplot-style output. Floats use Rust's shortest round-trip
//! formatting, so identical results give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::{AvailabilityReport, SolveSummary, SweepRow};
use crate::error::{Error, Result};

pub const SWEEP_HEADER: &str =
    "scheme,sweep_param,sweep_value,feasible,m1,m2,p1,p2,ps,pr,eps_target,ln_eps_target,eps_robot";

pub const AVAILABILITY_HEADER: &str = "scheme,n_draws,n_available,fraction,seed,target";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV line (without newline) for a solve, optionally tagged with the
/// swept parameter.
pub fn csv_line(param: Option<&str>, value: Option<f64>, s: &SolveSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{:e},{},{}",
        s.scheme,
        param.unwrap_or(""),
        opt(value),
        s.feasible,
        opt(s.m1),
        opt(s.m2),
        opt(s.p1),
        opt(s.p2),
        opt(s.ps),
        opt(s.pr),
        s.eps_target.value(),
        s.eps_target.ln(),
        s.eps_robot
            .map(|e| format!("{:e}", e.value()))
            .unwrap_or_default(),
    )
}

pub fn emit_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_line(Some(r.param.name()), Some(r.value), &r.summary));
        out.push('\n');
    }
    out.into_bytes()
}

/// One whitespace-separated block per scheme, blocks separated by two blank
/// lines (gnuplot `index`).
pub fn emit_plotdata(rows: &[SweepRow]) -> Vec<u8> {
    let mut out = String::new();
    let mut current = None;
    for r in rows {
        if current != Some(r.summary.scheme) {
            if current.is_some() {
                out.push_str("\n\n");
            }
            current = Some(r.summary.scheme);
            let _ = writeln!(out, "# {}", r.summary.scheme);
            let _ = writeln!(
                out,
                "# {} eps_target ln_eps_target feasible",
                r.param.name()
            );
        }
        let _ = writeln!(
            out,
            "{} {:e} {} {}",
            r.value,
            r.summary.eps_target.value(),
            r.summary.eps_target.ln(),
            u8::from(r.summary.feasible)
        );
    }
    out.into_bytes()
}

pub fn emit_availability_csv(reports: &[AvailabilityReport]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(AVAILABILITY_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:e}",
            r.scheme, r.n_draws, r.n_available, r.fraction, r.seed, r.target
        );
    }
    out.into_bytes()
}

pub fn emit_availability_plotdata(reports: &[AvailabilityReport]) -> Vec<u8> {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {}", r.scheme);
        let _ = writeln!(out, "# target fraction");
        let _ = writeln!(out, "{:e} {}", r.target, r.fraction);
    }
    out.into_bytes()
}

pub fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}
