//! Per-iteration objective traces shared by every iterative fit.

use std::io::{self, Write};

use serde::Serialize;

/// One outer iteration of a fit. Equality is bitwise on the floats, so two
/// first rows (NaN delta) compare equal.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    /// 1-based iteration number.
    pub iteration: usize,
    pub objective: f64,
    /// `J_t − J_{t−1}`; NaN on the first row.
    pub delta: f64,
    /// View weights after the iteration; empty for algorithms without them.
    pub weights: Vec<f64>,
}

impl PartialEq for TraceRow {
    fn eq(&self, other: &Self) -> bool {
        self.iteration == other.iteration
            && self.objective.to_bits() == other.objective.to_bits()
            && self.delta.to_bits() == other.delta.to_bits()
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A center re-seeded because its cluster lost all membership weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Reseed {
    pub iteration: usize,
    pub cluster: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub reseeds: Vec<Reseed>,
    /// True when the tolerance criterion stopped the fit before the iteration cap.
    pub converged: bool,
}

/// `|ΔJ| ≤ tol · max(1, |J|)`.
pub fn has_converged(previous: f64, current: f64, tol: f64) -> bool {
    (current - previous).abs() <= tol * current.abs().max(1.0)
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row and reports whether the stop criterion is met.
    pub fn record(&mut self, objective: f64, weights: Vec<f64>, tol: f64) -> bool {
        let previous = self.rows.last().map(|r| r.objective);
        let iteration = self.rows.len() + 1;
        let delta = previous.map_or(f64::NAN, |p| objective - p);
        self.rows.push(TraceRow {
            iteration,
            objective,
            delta,
            weights,
        });
        previous.is_some_and(|p| has_converged(p, objective, tol))
    }

    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective).collect()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }

    /// Index of the first row whose objective rose by more than
    /// `rel_slack · max(|J_{t−1}|, |J_t|)`, if any.
    pub fn first_increase(&self, rel_slack: f64) -> Option<usize> {
        self.rows
            .windows(2)
            .position(|w| {
                let (a, b) = (w[0].objective, w[1].objective);
                b - a > rel_slack * a.abs().max(b.abs())
            })
            .map(|i| i + 1)
    }

    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.first_increase(rel_slack).is_none()
    }

    /// Writes `iteration,objective,delta,w_1..w_K` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n_weights = self.rows.first().map_or(0, |r| r.weights.len());
        write!(out, "iteration,objective,delta")?;
        for k in 1..=n_weights {
            write!(out, ",w_{k}")?;
        }
        writeln!(out)?;
        for row in &self.rows {
            write!(out, "{},{},{}", row.iteration, row.objective, row.delta)?;
            for w in &row.weights {
                write!(out, ",{w}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
