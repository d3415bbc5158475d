//! Per-iteration measurement records and their CSV serialization.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopStatus {
    /// Relative residual reached the tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIters,
    /// Non-finite iterate or relative residual above the divergence cap.
    Diverged,
}

impl StopStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopStatus::Converged => "converged",
            StopStatus::MaxIters => "max_iters",
            StopStatus::Diverged => "diverged",
        }
    }
}

/// Which residual a trace reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualMetric {
    /// `||F x||` for equations.
    OperatorNorm,
    /// The forward-backward residual at the recorded stepsize.
    ForwardBackward { eta: f64 },
}

/// One recorded step.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub k: u64,
    pub fevals: u64,
    pub revals: u64,
    pub residual: f64,
    pub rel_residual: f64,
    pub elapsed_ns: u128,
    pub lyapunov_p: Option<f64>,
    pub lyapunov_v: Option<f64>,
}

/// A full run trace: one record per `record_every` steps plus the final step.
#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub status: StopStatus,
    pub metric: ResidualMetric,
    pub eta: f64,
}

impl Trace {
    pub fn final_record(&self) -> &TraceRecord {
        self.records.last().expect("trace always has the k=0 record")
    }

    pub fn has_lyapunov_p(&self) -> bool {
        self.records.iter().any(|r| r.lyapunov_p.is_some())
    }

    pub fn has_lyapunov_v(&self) -> bool {
        self.records.iter().any(|r| r.lyapunov_v.is_some())
    }

    /// Writes the trace as CSV with header
    /// `k,fevals,revals,residual,rel_residual,elapsed_ns[,P_k][,V_k]`,
    /// floats at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let with_p = self.has_lyapunov_p();
        let with_v = self.has_lyapunov_v();
        let mut header = String::from("k,fevals,revals,residual,rel_residual,elapsed_ns");
        if with_p {
            header.push_str(",P_k");
        }
        if with_v {
            header.push_str(",V_k");
        }
        writeln!(w, "{header}")?;
        for r in &self.records {
            let mut line = format!(
                "{},{},{},{},{},{}",
                r.k,
                r.fevals,
                r.revals,
                fmt17(r.residual),
                fmt17(r.rel_residual),
                r.elapsed_ns
            );
            if with_p {
                line.push(',');
                if let Some(p) = r.lyapunov_p {
                    line.push_str(&fmt17(p));
                }
            }
            if with_v {
                line.push(',');
                if let Some(v) = r.lyapunov_v {
                    line.push_str(&fmt17(v));
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Decimal floating point with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_to_full_precision() {
        let v = std::f64::consts::PI / 17.0;
        let parsed: f64 = fmt17(v).parse().unwrap();
        assert_eq!(parsed, v);
    }

    #[test]
    fn csv_header_grows_with_lyapunov_columns() {
        let rec = TraceRecord {
            k: 0,
            fevals: 0,
            revals: 0,
            residual: 1.0,
            rel_residual: 1.0,
            elapsed_ns: 5,
            lyapunov_p: Some(2.0),
            lyapunov_v: None,
        };
        let trace = Trace {
            records: vec![rec],
            status: StopStatus::MaxIters,
            metric: ResidualMetric::OperatorNorm,
            eta: 0.1,
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,fevals,revals,residual,rel_residual,elapsed_ns,P_k\n"));
    }
}
