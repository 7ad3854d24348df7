//! DFT grid-of-beams codebooks and GoB precoder/combiner assembly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bs,
    Ue,
}

/// Ordered set of unit-norm beams, stored as the columns of an `n x b` matrix.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub side: Side,
    beams: CMat,
}

impl Codebook {
    /// DFT grid: beam `m` has entries `exp(j 2 pi p m / b) / sqrt(n)`.
    pub fn dft(n: usize, b: usize, side: Side) -> Result<Self> {
        if n == 0 || b == 0 {
            return Err(Error::invalid(format!(
                "codebook needs n >= 1 and b >= 1, got n = {n}, b = {b}"
            )));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let beams = CMat::from_fn(n, b, |p, m| {
            // Reduce the phase index first so large grids stay exact.
            let k = (p * m) % b;
            Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * k as f64 / b as f64)
        });
        Ok(Codebook { side, beams })
    }

    /// Antenna count.
    pub fn n(&self) -> usize {
        self.beams.nrows()
    }

    /// Beam count.
    pub fn len(&self) -> usize {
        self.beams.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.ncols() == 0
    }

    pub fn beam(&self, m: usize) -> CMat {
        self.beams.columns(m, 1).into_owned()
    }

    /// All beams as columns.
    pub fn matrix(&self) -> &CMat {
        &self.beams
    }

    /// Matrix whose columns are the selected beams, in the given order.
    pub fn assemble(&self, idx: &[usize]) -> Result<CMat> {
        check_indices(idx, self.len())?;
        Ok(crate::linalg::select_columns(&self.beams, idx))
    }
}

/// Convenience form of [`Codebook::dft`].
pub fn dft_codebook(n: usize, b: usize, side: Side) -> Result<Codebook> {
    Codebook::dft(n, b, side)
}

/// GoB precoder `V` from BS beam indices.
pub fn assemble_precoder(cb: &Codebook, idx: &[usize]) -> Result<CMat> {
    cb.assemble(idx)
}

/// Block-diagonal combiner `W = diag(W_1, ..., W_K)`.
pub fn assemble_block_combiner(cb: &Codebook, per_ue: &[Vec<usize>]) -> Result<CMat> {
    let blocks = per_ue
        .iter()
        .map(|idx| cb.assemble(idx))
        .collect::<Result<Vec<_>>>()?;
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut w = CMat::from_element(rows, cols, ZERO);
    let (mut r0, mut c0) = (0, 0);
    for b in &blocks {
        w.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    Ok(w)
}

pub(crate) fn check_indices(idx: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    for &i in idx {
        if i >= len {
            return Err(Error::invalid(format!(
                "beam index {i} out of range for codebook of {len} beams"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!("duplicate beam index {i}")));
        }
    }
    Ok(())
}

/// Outcome of a beam-selection policy for one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamAssignment {
    /// Combiner beam indices per UE (each of length `M_UE`).
    pub ue_beams: Vec<Vec<usize>>,
    /// Activated BS beams: PMI union followed by any beams added by the BS.
    pub bs_beams: Vec<usize>,
    /// Reported beam pairs `(v, w)` per UE.
    pub pmi: Vec<Vec<(usize, usize)>>,
    /// BS beams activated on top of the PMI union to make BD feasible.
    pub filled: Vec<usize>,
    /// BS beams from the PMI union removed by an activation cap.
    pub dropped: Vec<usize>,
}

impl BeamAssignment {
    pub fn k(&self) -> usize {
        self.ue_beams.len()
    }

    pub fn m_bs(&self) -> usize {
        self.bs_beams.len()
    }

    /// Whether `(K - 1) M_UE < M_BS` holds.
    pub fn feasible(&self) -> bool {
        let m_ue = self.ue_beams.first().map_or(0, |w| w.len());
        (self.k().saturating_sub(1)) * m_ue < self.m_bs()
    }
}

/// Distinct BS beams of the PMI union, in first-appearance order.
pub fn pmi_union(pmis: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let mut out = Vec::new();
    for p in pmis {
        for &(v, _) in p {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}
