//! Plain-text trajectory format.
//!
//! ```text
//! # alpha=0.5, u0=2
//! t,u
//! 0.0000000000000000e0,2.0000000000000000e0
//! ...
//! # blowup_at=0.1007
//! ```
//!
//! Metadata and status live in `#` comment lines; rows carry 17 significant
//! digits so values re-parse exactly.

use std::io::{self, BufRead, Write};

use crate::solver::{Status, Trajectory};
use crate::{Error, Result};

pub const HEADER: &str = "t,u";
const BLOWUP_KEY: &str = "blowup_at";
const FAILURE_KEY: &str = "accuracy_failure_index";

/// Write `traj`, preceded by a `# k=v, k=v` metadata line when `meta` is non-empty.
pub fn write_trajectory<W: Write + ?Sized>(out: &mut W, traj: &Trajectory, meta: &[(&str, String)]) -> io::Result<()> {
    if !meta.is_empty() {
        let line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", line.join(", "))?;
    }
    writeln!(out, "{HEADER}")?;
    for (t, u) in traj.times.iter().zip(&traj.values) {
        writeln!(out, "{t:.16e},{u:.16e}")?;
    }
    match traj.status {
        Status::Completed => {}
        Status::BlewUp(k) => writeln!(out, "# {BLOWUP_KEY}={}", traj.times[k])?,
        Status::AccuracyFailure(k) => writeln!(out, "# {FAILURE_KEY}={k}")?,
    }
    Ok(())
}

pub fn trajectory_to_string(traj: &Trajectory, meta: &[(&str, String)]) -> String {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, traj, meta).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("output is ASCII")
}

/// A parsed trajectory and the metadata pairs found before the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub trajectory: Trajectory,
    pub meta: Vec<(String, String)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_trajectory<R: BufRead>(input: R) -> Result<Parsed> {
    let mut meta = Vec::new();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut status = Status::Completed;
    let mut seen_header = false;

    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for pair in comment.split(',') {
                let Some((k, v)) = pair.split_once('=') else { continue };
                let (k, v) = (k.trim(), v.trim());
                match k {
                    BLOWUP_KEY => {
                        if values.is_empty() {
                            return Err(parse_err(lineno, "blow-up footer before any row"));
                        }
                        status = Status::BlewUp(values.len() - 1);
                    }
                    FAILURE_KEY => {
                        let k = v.parse().map_err(|_| parse_err(lineno, format!("bad index {v:?}")))?;
                        status = Status::AccuracyFailure(k);
                    }
                    _ if !seen_header => meta.push((k.to_string(), v.to_string())),
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(parse_err(lineno, format!("expected header {HEADER:?}, got {line:?}")));
            }
            seen_header = true;
            continue;
        }
        let (t, u) = line
            .split_once(',')
            .ok_or_else(|| parse_err(lineno, "expected two columns"))?;
        let t: f64 = t.parse().map_err(|_| parse_err(lineno, format!("bad time {t:?}")))?;
        let u: f64 = u.parse().map_err(|_| parse_err(lineno, format!("bad value {u:?}")))?;
        times.push(t);
        values.push(u);
    }
    if !seen_header {
        return Err(parse_err(0, "missing header"));
    }
    Ok(Parsed { trajectory: Trajectory { times, values, status }, meta })
}
