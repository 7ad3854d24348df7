//! Block-diagonalization precoding over effective channels, spectral
//! efficiency, effective throughput, and the TDD benchmark.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::training::quantize_feedback;

/// Default relative rank tolerance.
pub const RANK_TOL: f64 = 1e-9;

/// Per-UE BD data precoders and combiners.
#[derive(Debug, Clone)]
pub struct BdSolution {
    /// `M_BS x L_k`, orthonormal columns.
    pub v_bar: Vec<CMat>,
    /// `M_UE x L_k`, orthonormal columns.
    pub w_bar: Vec<CMat>,
    /// Nonzero singular values of `Hbar_k M0_k`, descending.
    pub s_bar: Vec<Vec<f64>>,
    pub streams: Vec<usize>,
}

fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    linalg::svd_sorted(m).1.first().copied().unwrap_or(0.0)
}

/// Block diagonalization of `K` effective channels (`M_UE x M_BS` each).
///
/// UE `k` transmits inside the null space of the stacked other channels;
/// within it the SVD of the projected channel gives precoder and combiner.
pub fn block_diagonalize(h_bars: &[CMat], rank_tol: f64) -> Result<BdSolution> {
    let k_ues = h_bars.len();
    if k_ues == 0 {
        return Err(Error::invalid("block_diagonalize needs at least one UE"));
    }
    let m_bs = h_bars[0].ncols();
    if h_bars.iter().any(|h| h.ncols() != m_bs) {
        return Err(Error::invalid("effective channels disagree on M_BS"));
    }
    let mut sol = BdSolution {
        v_bar: Vec::with_capacity(k_ues),
        w_bar: Vec::with_capacity(k_ues),
        s_bar: Vec::with_capacity(k_ues),
        streams: Vec::with_capacity(k_ues),
    };
    for k in 0..k_ues {
        let others: Vec<&CMat> = (0..k_ues).filter(|&j| j != k).map(|j| &h_bars[j]).collect();
        let m0 = if others.is_empty() {
            linalg::identity(m_bs)
        } else {
            let stacked = linalg::vstack(&others);
            let (s, basis) = linalg::right_singular_basis(&stacked);
            let r = linalg::rank_of(&s, rank_tol);
            if r >= m_bs {
                return Err(Error::InfeasibleAssignment {
                    ue: k,
                    reason: format!(
                        "other UEs' effective channels span all {m_bs} trained beams, no null space left"
                    ),
                });
            }
            basis.columns(r, m_bs - r).into_owned()
        };
        let projected = &h_bars[k] * &m0;
        let (u, s, v1) = linalg::svd_sorted(&projected);
        let scale = spectral_norm(&h_bars[k]);
        let l = s.iter().filter(|&&x| scale > 0.0 && x > rank_tol * scale).count();
        sol.v_bar.push(&m0 * v1.columns(0, l));
        sol.w_bar.push(u.columns(0, l).into_owned());
        sol.s_bar.push(s[..l].to_vec());
        sol.streams.push(l);
    }
    Ok(sol)
}

/// `sum_m log2(1 + kappa s_m^2)` per UE.
pub fn se_bd(bd: &BdSolution, kappa: f64) -> Vec<f64> {
    bd.s_bar
        .iter()
        .map(|s| s.iter().map(|x| (1.0 + kappa * x * x).log2()).sum())
        .collect()
}

/// Per-UE SE for arbitrary data beamformers applied to effective channels
/// `Hbar_k`, with interference from the other UEs' streams and the noise
/// filtered by both the GoB combiner `W_k` and the data combiner `Wbar_k`.
pub fn se_general(
    h_bars: &[CMat],
    w_gob: &[CMat],
    v_bar: &[CMat],
    w_bar: &[CMat],
    kappa: f64,
    noise_var: f64,
) -> Result<Vec<f64>> {
    let k_ues = h_bars.len();
    if w_gob.len() != k_ues || v_bar.len() != k_ues || w_bar.len() != k_ues {
        return Err(Error::invalid("se_general: per-UE inputs have different lengths"));
    }
    let rho2 = kappa * noise_var;
    let mut out = Vec::with_capacity(k_ues);
    for k in 0..k_ues {
        let wb = &w_bar[k];
        if wb.ncols() == 0 || v_bar[k].ncols() == 0 {
            out.push(0.0);
            continue;
        }
        let g = wb.adjoint() * &h_bars[k];
        let filtered = wb.adjoint() * w_gob[k].adjoint() * &w_gob[k] * wb;
        let mut cov = filtered.scale(noise_var);
        for (j, vj) in v_bar.iter().enumerate() {
            if j != k && vj.ncols() > 0 {
                let t = &g * vj;
                cov += (&t * t.adjoint()).scale(rho2);
            }
        }
        let t = &g * &v_bar[k];
        let total = &cov + (&t * t.adjoint()).scale(rho2);
        let se = linalg::hpd_log2_det(&total)
            .and_then(|a| linalg::hpd_log2_det(&cov).map(|b| a - b))
            .map_err(|_| Error::numerical(format!("interference-plus-noise covariance of UE {k} is singular")))?;
        out.push(se.max(0.0));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub se_per_ue: Vec<f64>,
    pub omega: f64,
    /// `(1 - omega) sum_k SE_k`.
    pub throughput: f64,
}

pub fn effective_throughput(se_per_ue: Vec<f64>, omega: f64) -> Result<ThroughputReport> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::invalid(format!("overhead {omega} outside [0, 1]")));
    }
    let throughput = (1.0 - omega) * se_per_ue.iter().sum::<f64>();
    Ok(ThroughputReport { se_per_ue, omega, throughput })
}

/// CSI available for the TDD benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Csi {
    Perfect,
    /// Effective channels returned to the UEs for detection are quantized.
    Quantized(u32),
}

/// Reciprocity-based benchmark: BD over the full `N_UE x N_BS` channels with
/// no downlink training overhead. With quantized CSI the BS still precodes on
/// the true channels, but each UE derives its data combiner from the
/// quantized effective channel `Q(H_k Vbar_k)`.
pub fn tdd_benchmark(h_full: &[CMat], kappa: f64, noise_var: f64, csi: Csi) -> Result<ThroughputReport> {
    let k_ues = h_full.len();
    if k_ues == 0 {
        return Err(Error::invalid("tdd_benchmark needs at least one UE"));
    }
    let (n_ue, n_bs) = h_full[0].shape();
    if k_ues * n_ue > n_bs {
        return Err(Error::InfeasibleAssignment {
            ue: k_ues - 1,
            reason: format!("K N_UE = {} exceeds N_BS = {n_bs}", k_ues * n_ue),
        });
    }
    let bd = block_diagonalize(h_full, RANK_TOL)?;
    let se = match csi {
        Csi::Perfect => se_bd(&bd, kappa),
        Csi::Quantized(q) => {
            let mut w_bar = Vec::with_capacity(k_ues);
            for k in 0..k_ues {
                let g = quantize_feedback(&(&h_full[k] * &bd.v_bar[k]), q)?;
                let (u, _, _) = linalg::svd_sorted(&g);
                w_bar.push(u.columns(0, bd.streams[k]).into_owned());
            }
            let eye = vec![linalg::identity(n_ue); k_ues];
            se_general(h_full, &eye, &bd.v_bar, &w_bar, kappa, noise_var)?
        }
    };
    effective_throughput(se, 0.0)
}

/// Largest relative leakage `||Hbar_j Vbar_k|| / (||Hbar_j|| ||Vbar_k||)` over `j != k`.
pub fn bd_leakage(h_bars: &[CMat], bd: &BdSolution) -> f64 {
    let mut worst = 0.0f64;
    for (k, vk) in bd.v_bar.iter().enumerate() {
        for (j, hj) in h_bars.iter().enumerate() {
            let den = linalg::frobenius(hj) * linalg::frobenius(vk);
            if j != k && den > 0.0 {
                worst = worst.max(linalg::frobenius(&(hj * vk)) / den);
            }
        }
    }
    worst
}

/// Complex scalar as a `1 x 1` matrix.
pub fn scalar(z: Complex64) -> CMat {
    CMat::from_element(1, 1, z)
}
