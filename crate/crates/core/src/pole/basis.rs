use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contour::{ContourDocument, PoleContour};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// How the `P` pole solutions are held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisStorage {
    /// Upper-half solutions only; `h̃_{k̄} = conj(h̃_k)` (real pencil, real `b`).
    Conjugate,
    /// All `P` solutions.
    Full,
}

/// The solutions `h̃_k` of `(H − ξ_k S) h̃_k = b` for every pole of a contour.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleBasis {
    pub(crate) contour: PoleContour,
    pub(crate) rhs_tag: String,
    pub(crate) storage: BasisStorage,
    pub(crate) vectors: Vec<Vec<C64>>,
    pub(crate) residual_norms: Vec<f64>,
    pub(crate) converged: Vec<bool>,
    pub(crate) iterations: Vec<usize>,
    pub(crate) solver_used: String,
}

impl PoleBasis {
    pub fn contour(&self) -> &PoleContour {
        &self.contour
    }

    pub fn rhs_tag(&self) -> &str {
        &self.rhs_tag
    }

    pub fn storage(&self) -> BasisStorage {
        self.storage
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// Stored vectors, one per stored pole (contour order).
    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// Relative residual `‖b − (H − ξ_k S) h̃_k‖₂ / ‖b‖₂` per stored pole.
    pub fn residual_norms(&self) -> &[f64] {
        &self.residual_norms
    }

    pub fn converged(&self) -> &[bool] {
        &self.converged
    }

    /// Sub-solve iteration counts per stored pole (0 for direct solves).
    pub fn iterations(&self) -> &[usize] {
        &self.iterations
    }

    pub fn solver_used(&self) -> &str {
        &self.solver_used
    }

    /// Indices of stored poles whose sub-solve missed its tolerance.
    pub fn flagged(&self) -> Vec<usize> {
        self.converged
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| i)
            .collect()
    }

    /// Solution for contour node `k` (any of the `P`).
    pub fn pole_solution(&self, k: usize) -> Vec<C64> {
        match self.storage {
            BasisStorage::Full => self.vectors[k].clone(),
            BasisStorage::Conjugate => {
                let half = self.contour.poles() / 2;
                if k < half {
                    self.vectors[k].clone()
                } else {
                    self.vectors[k - half].iter().map(|v| v.conj()).collect()
                }
            }
        }
    }

    /// `ũ^P(z) = Σ_k ω_k/(ξ_k − z) · h̃_k`. In conjugate storage the lower
    /// half enters as `conj(ω_k)/(conj(ξ_k) − z) · conj(h̃_k)`, which is
    /// valid for complex `z`.
    pub fn combine(&self, z: C64) -> Result<Vec<C64>> {
        if z.re > 0.0 {
            return Err(Error::InvalidShift(z, "Re z > 0 lies outside the approximation region".into()));
        }
        let n = self.dim();
        let mut out = vec![ZERO; n];
        match self.storage {
            BasisStorage::Full => {
                let coeffs = self.contour.shift_coefficients(z);
                for (c, h) in coeffs.iter().zip(&self.vectors) {
                    for (o, hi) in out.iter_mut().zip(h) {
                        *o += c * hi;
                    }
                }
            }
            BasisStorage::Conjugate => {
                for ((xi, w), h) in self.contour.upper_half().zip(&self.vectors) {
                    let a = w / (xi - z);
                    let b = w.conj() / (xi.conj() - z);
                    for (o, hi) in out.iter_mut().zip(h) {
                        *o += a * hi + b * hi.conj();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Vector element operations of one [`combine`](Self::combine) call.
    pub fn combine_cost(&self) -> u64 {
        (self.contour.poles() * self.dim()) as u64
    }

    pub fn to_document(&self) -> BasisDocument {
        BasisDocument {
            contour: self.contour.to_document(),
            rhs_tag: self.rhs_tag.clone(),
            storage: self.storage,
            vectors: self.vectors.iter().map(|v| v.iter().map(|c| [c.re, c.im]).collect()).collect(),
            residual_norms: self.residual_norms.clone(),
            converged: self.converged.clone(),
            iterations: self.iterations.clone(),
            solver_used: self.solver_used.clone(),
        }
    }

    pub fn from_document(doc: BasisDocument) -> Result<Self> {
        let contour = PoleContour::from_document(&doc.contour)?;
        let expected = match doc.storage {
            BasisStorage::Full => contour.poles(),
            BasisStorage::Conjugate => contour.poles() / 2,
        };
        let k = doc.vectors.len();
        if k != expected || doc.residual_norms.len() != k || doc.converged.len() != k || doc.iterations.len() != k {
            return Err(Error::Invalid(format!("basis document has {k} vectors, expected {expected}")));
        }
        let n = doc.vectors.first().map_or(0, Vec::len);
        if doc.vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Invalid("basis vectors differ in length".into()));
        }
        Ok(Self {
            contour,
            rhs_tag: doc.rhs_tag,
            storage: doc.storage,
            vectors: doc.vectors.into_iter().map(|v| v.into_iter().map(|p| C64::new(p[0], p[1])).collect()).collect(),
            residual_norms: doc.residual_norms,
            converged: doc.converged,
            iterations: doc.iterations,
            solver_used: doc.solver_used,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form of a [`PoleBasis`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisDocument {
    pub contour: ContourDocument,
    pub rhs_tag: String,
    pub storage: BasisStorage,
    pub vectors: Vec<Vec<[f64; 2]>>,
    pub residual_norms: Vec<f64>,
    pub converged: Vec<bool>,
    pub iterations: Vec<usize>,
    pub solver_used: String,
}

/// Stable fingerprint of a vector (FNV-1a over the bit patterns).
pub fn rhs_fingerprint(b: &[C64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in b {
        for word in [v.re.to_bits(), v.im.to_bits()] {
            for byte in word.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    format!("{h:016x}")
}
