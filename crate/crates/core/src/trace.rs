//! Loss traces and run summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{HertaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub wall_ns: u64,
    pub loss: f64,
}

/// Per-iteration losses with strictly increasing iteration numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossTrace {
    points: Vec<TracePoint>,
}

impl LossTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, iter: usize, wall_ns: u64, loss: f64) {
        if let Some(last) = self.points.last() {
            assert!(iter > last.iter, "trace iterations must increase ({} after {})", iter, last.iter);
        }
        self.points.push(TracePoint { iter, wall_ns, loss });
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.loss).collect()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.points.last().map(|p| p.loss)
    }

    /// Loss recorded at iteration `iter`, if any.
    pub fn loss_at(&self, iter: usize) -> Option<f64> {
        self.points.iter().find(|p| p.iter == iter).map(|p| p.loss)
    }

    pub fn zero_timing(&mut self) {
        self.points.iter_mut().for_each(|p| p.wall_ns = 0);
    }

    /// CSV with header `iter,wall_ns,loss`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for p in &self.points {
            wr.serialize(p).map_err(csv_err)?;
        }
        if self.points.is_empty() {
            wr.write_record(["iter", "wall_ns", "loss"]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl std::io::Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut trace = Self::new();
        for rec in rd.deserialize() {
            let p: TracePoint = rec.map_err(csv_err)?;
            trace.push(p.iter, p.wall_ns, p.loss);
        }
        Ok(trace)
    }
}

fn csv_err(e: csv::Error) -> HertaError {
    HertaError::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        msg: e.to_string(),
    }
}

/// Output of either trainer.
#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Weights in the original coordinates.
    pub w: DenseMatrix,
    pub trace: LossTrace,
    /// Outer steps taken.
    pub iterations: usize,
    /// Whether the stopping rule fired (always false without a reference loss).
    pub converged: bool,
    pub step_size: f64,
    pub lipschitz: f64,
    pub precond_build_ns: u64,
    pub train_ns: u64,
}

impl TrainResult {
    pub fn final_loss(&self) -> f64 {
        self.trace.final_loss().unwrap_or(f64::NAN)
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(HertaError::NoConvergence { iterations: self.iterations })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algo: String,
    pub dataset: String,
    pub lambda: f64,
    pub eps: f64,
    pub seed: u64,
    pub iterations: usize,
    pub final_loss: f64,
    pub precond_build_ns: u64,
    pub train_ns: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = LossTrace::new();
        t.push(0, 10, 1.5);
        t.push(1, 20, 0.25);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,wall_ns,loss\n0,10,1.5\n"));
        assert_eq!(LossTrace::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn empty_trace_keeps_header() {
        let mut buf = Vec::new();
        LossTrace::new().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iter,wall_ns,loss\n");
    }

    #[test]
    #[should_panic]
    fn non_increasing_rejected() {
        let mut t = LossTrace::new();
        t.push(3, 0, 1.0);
        t.push(3, 0, 1.0);
    }
}
