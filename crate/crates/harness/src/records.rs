use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ua_wkb::SchemeKind;

use crate::error::HarnessError;

pub const CSV_HEADER: &str =
    "scheme,eps,nx,nt,h,dx,t_final,err_rho,err_psi,err_sa,mass_drift_rel,wallclock_seconds,status,reference_id";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The foot-point solve broke down (typically past a caustic).
    Diverged,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Diverged => "diverged",
        })
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Status::Ok),
            "diverged" => Ok(Status::Diverged),
            other => Err(format!("unknown status '{other}'")),
        }
    }
}

/// One cell of a convergence sweep. Error fields are NaN unless `status` is ok.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub scheme: SchemeKind,
    pub eps: f64,
    pub nx: usize,
    pub nt: usize,
    pub h: f64,
    pub dx: f64,
    pub t_final: f64,
    pub err_rho: f64,
    pub err_psi: f64,
    pub err_sa: f64,
    pub mass_drift_rel: f64,
    pub wallclock_seconds: f64,
    pub status: Status,
    pub reference_id: String,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl ErrorRecord {
    pub fn to_csv_row(&self) -> String {
        [
            self.scheme.name().to_string(),
            num(self.eps),
            self.nx.to_string(),
            self.nt.to_string(),
            num(self.h),
            num(self.dx),
            num(self.t_final),
            num(self.err_rho),
            num(self.err_psi),
            num(self.err_sa),
            num(self.mass_drift_rel),
            num(self.wallclock_seconds),
            self.status.to_string(),
            self.reference_id.clone(),
        ]
        .join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self, String> {
        let f: Vec<&str> = row.split(',').collect();
        if f.len() != 14 {
            return Err(format!("expected 14 fields, got {}", f.len()));
        }
        fn p<T: FromStr>(s: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            s.parse().map_err(|e| format!("bad field '{s}': {e}"))
        }
        Ok(Self {
            scheme: p(f[0])?,
            eps: p(f[1])?,
            nx: p(f[2])?,
            nt: p(f[3])?,
            h: p(f[4])?,
            dx: p(f[5])?,
            t_final: p(f[6])?,
            err_rho: p(f[7])?,
            err_psi: p(f[8])?,
            err_sa: p(f[9])?,
            mass_drift_rel: p(f[10])?,
            wallclock_seconds: p(f[11])?,
            status: p(f[12])?,
            reference_id: f[13].to_string(),
        })
    }
}

/// Writes the records as CSV with LF line endings.
pub fn write_records(records: &[ErrorRecord], path: &Path) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row()).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a file produced by [`write_records`].
pub fn read_records(path: &Path) -> Result<Vec<ErrorRecord>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, msg: String| HarnessError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {line}: {msg}")),
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => return Err(bad(1, format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, row)| ErrorRecord::from_csv_row(row).map_err(|m| bad(i + 2, m)))
        .collect()
}
