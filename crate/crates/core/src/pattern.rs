//! Detector-position grids and sampled correlation patterns.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;

/// One pair of detector positions `(x_C, x_T)` in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x_c: f64,
    pub x_t: f64,
}

impl GridPoint {
    pub const fn new(x_c: f64, x_t: f64) -> Self {
        Self { x_c, x_t }
    }
}

/// Closed-form evaluation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// All four path pairs with their coherence envelopes.
    Exact,
    /// Only the two coherent pairs, envelopes set to one.
    Asymptotic,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "asymptotic" => Ok(Mode::Asymptotic),
            other => Err(Error::argument(format!(
                "unknown mode `{other}` (expected `exact` or `asymptotic`)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Asymptotic => "asymptotic",
        })
    }
}

/// Provenance of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternMode {
    Exact,
    Asymptotic,
    MonteCarlo,
}

impl From<Mode> for PatternMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => PatternMode::Exact,
            Mode::Asymptotic => PatternMode::Asymptotic,
        }
    }
}

impl fmt::Display for PatternMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternMode::Exact => "exact",
            PatternMode::Asymptotic => "asymptotic",
            PatternMode::MonteCarlo => "mc",
        })
    }
}

/// Normalized `⟨Δn_C Δn_T⟩` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPattern {
    pub grid: Vec<GridPoint>,
    pub values: Vec<f64>,
    pub mode: PatternMode,
    pub stderr: Option<Vec<f64>>,
}

impl CorrelationPattern {
    /// Evaluates `f` at every grid point.
    pub fn evaluate<F>(grid: &[GridPoint], mode: PatternMode, exec: Execution, f: F) -> Self
    where
        F: Fn(GridPoint) -> f64 + Sync + Send,
    {
        let values = exec.map(grid, |p| f(*p));
        Self {
            grid: grid.to_vec(),
            values,
            mode,
            stderr: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fringe visibility `(max − min)/(max + min)`.
    pub fn visibility(&self) -> f64 {
        visibility(&self.values)
    }
}

pub fn visibility(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / (max + min)
}

/// Which detector coordinate a one-dimensional scan moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Move `x_C`, hold `x_T` fixed.
    Control,
    /// Move `x_T`, hold `x_C` fixed.
    Target,
    /// Move both together, `x_C = x_T`.
    Diagonal,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x_C" | "x_c" => Ok(Axis::Control),
            "x_T" | "x_t" => Ok(Axis::Target),
            "diagonal" => Ok(Axis::Diagonal),
            other => Err(Error::argument(format!(
                "unknown scan axis `{other}` (expected x_C, x_T or diagonal)"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Control => "x_C",
            Axis::Target => "x_T",
            Axis::Diagonal => "diagonal",
        })
    }
}

/// Evenly spaced one-dimensional scan `start, start+step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scan {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Position of the detector that does not move (ignored for diagonal scans).
    pub fixed: f64,
}

impl Scan {
    pub fn new(axis: Axis, start: f64, stop: f64, step: f64, fixed: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::argument(format!(
                "scan step must be positive, got {step}"
            )));
        }
        if !(start.is_finite() && stop.is_finite() && fixed.is_finite()) || stop < start {
            return Err(Error::argument(format!(
                "scan range [{start}, {stop}] must be finite and ordered"
            )));
        }
        Ok(Self {
            axis,
            start,
            stop,
            step,
            fixed,
        })
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }

    pub fn points(&self) -> Vec<GridPoint> {
        self.coordinates()
            .into_iter()
            .map(|x| match self.axis {
                Axis::Control => GridPoint::new(x, self.fixed),
                Axis::Target => GridPoint::new(self.fixed, x),
                Axis::Diagonal => GridPoint::new(x, x),
            })
            .collect()
    }
}

/// Full two-dimensional grid, `x_C` outer and `x_T` inner.
pub fn grid_2d(xs_c: &[f64], xs_t: &[f64]) -> Vec<GridPoint> {
    xs_c.iter()
        .flat_map(|&c| xs_t.iter().map(move |&t| GridPoint::new(c, t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_counts_include_both_ends() {
        let s = Scan::new(Axis::Diagonal, -1e-4, 1e-4, 5e-6, 0.0).unwrap();
        let pts = s.points();
        assert_eq!(pts.len(), 41);
        assert_eq!(pts[0], GridPoint::new(-1e-4, -1e-4));
        assert!((pts[40].x_c - 1e-4).abs() < 1e-18);
        let c = Scan::new(Axis::Control, 0.0, 1.0, 0.5, 0.25)
            .unwrap()
            .points();
        assert_eq!(
            c,
            vec![
                GridPoint::new(0.0, 0.25),
                GridPoint::new(0.5, 0.25),
                GridPoint::new(1.0, 0.25)
            ]
        );
    }

    #[test]
    fn scan_validation() {
        assert!(Scan::new(Axis::Control, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Scan::new(Axis::Control, 1.0, 0.0, 0.1, 0.0).is_err());
        assert!("sideways".parse::<Axis>().is_err());
        assert!("fuzzy".parse::<Mode>().is_err());
        assert_eq!("exact".parse::<Mode>().unwrap(), Mode::Exact);
    }

    #[test]
    fn grid_2d_order() {
        let g = grid_2d(&[0.0, 1.0], &[2.0, 3.0]);
        assert_eq!(g[1], GridPoint::new(0.0, 3.0));
        assert_eq!(g[2], GridPoint::new(1.0, 2.0));
    }
}
