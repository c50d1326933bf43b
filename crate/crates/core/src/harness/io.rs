//! File formats for shift sets and solution bundles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Parse a JSON array of `[re, im]` pairs.
pub fn parse_shifts(text: &str) -> Result<Vec<C64>> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
    let shifts: Vec<C64> = pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect();
    if let Some(z) = shifts.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid(format!("non-finite shift {z}")));
    }
    Ok(shifts)
}

pub fn read_shifts(path: impl AsRef<Path>) -> Result<Vec<C64>> {
    parse_shifts(&std::fs::read_to_string(path)?)
}

pub fn format_shifts(shifts: &[C64]) -> Result<String> {
    let pairs: Vec<[f64; 2]> = shifts.iter().map(|z| [z.re, z.im]).collect();
    Ok(serde_json::to_string(&pairs)?)
}

pub fn write_shifts(shifts: &[C64], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_shifts(shifts)?)?;
    Ok(())
}

/// Solutions of a shifted family, as written by the `solve` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub method: String,
    pub shifts: Vec<[f64; 2]>,
    /// Relative residual `‖b − (H − z S) u‖₂ / ‖b‖₂` per shift.
    pub residuals: Vec<f64>,
    pub solutions: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub poles: Option<usize>,
    #[serde(default)]
    pub iterations: Option<usize>,
}

impl SolutionBundle {
    pub fn new(method: &str, shifts: &[C64], residuals: Vec<f64>, solutions: &[Vec<C64>]) -> Self {
        Self {
            method: method.to_string(),
            shifts: shifts.iter().map(|z| [z.re, z.im]).collect(),
            residuals,
            solutions: solutions.iter().map(|u| u.iter().map(|v| [v.re, v.im]).collect()).collect(),
            poles: None,
            iterations: None,
        }
    }

    pub fn solution(&self, l: usize) -> Vec<C64> {
        self.solutions[l].iter().map(|p| C64::new(p[0], p[1])).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
