//! Downlink beam training: Zadoff-Chu pilots, the received training signal,
//! LMMSE estimation of effective channels, its error covariance, and uniform
//! feedback quantization.
//!
//! Notation: `A = S^T kron I_{M_UE}`, `Gamma = I_tau kron W_k^H`, so that
//! `vec(Y_k) = rho A vec(Hbar_k) + vec(W_k^H N_k)`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Resource elements per ms of coherence time: 14 symbols x 12 subcarriers x 25 RBs.
pub const RE_PER_MS: f64 = 14.0 * 12.0 * 25.0;

/// Number of resource elements in a coherence frame of `t_coh_ms`.
pub fn frame_resource_elements(t_coh_ms: f64) -> usize {
    (RE_PER_MS * t_coh_ms).round() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Pilot resource elements per trained BS beam.
    pub tau: usize,
    /// Resource elements in the coherence frame.
    pub t_total: usize,
    /// Total transmit power over the frame.
    pub power: f64,
    pub noise_var: f64,
}

impl TrainingConfig {
    /// Configuration hitting SNR `kappa = rho^2 / noise_var`.
    pub fn from_snr(tau: usize, t_total: usize, kappa: f64, noise_var: f64) -> Result<Self> {
        if tau == 0 || t_total == 0 {
            return Err(Error::invalid("tau and t_total must be positive"));
        }
        if !(kappa >= 0.0) || !(noise_var >= 0.0) {
            return Err(Error::invalid("kappa and noise_var must be >= 0"));
        }
        Ok(TrainingConfig { tau, t_total, power: kappa * noise_var * t_total as f64, noise_var })
    }

    pub fn rho(&self) -> f64 {
        (self.power / self.t_total as f64).sqrt()
    }

    pub fn kappa(&self) -> f64 {
        self.rho().powi(2) / self.noise_var
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Length-`n` Zadoff-Chu sequence with root `u`.
pub fn zadoff_chu(n: usize, u: usize) -> Vec<Complex64> {
    let cf = (n % 2) as u128;
    let two_n = 2 * n as u128;
    (0..n as u128)
        .map(|k| {
            // exp(-j pi u k (k + cf) / n), reduced modulo 2n to keep the phase exact.
            let r = (u as u128 * k % two_n) * ((k + cf) % two_n) % two_n;
            Complex64::from_polar(1.0, -std::f64::consts::PI * r as f64 / n as f64)
        })
        .collect()
}

/// Pilot matrix `S` (`m_bs x tau`): row `i` is the Zadoff-Chu sequence
/// cyclically shifted by `i`, scaled so that `S S^H = I`.
pub fn pilot_matrix(m_bs: usize, tau: usize, root: usize) -> Result<CMat> {
    if tau < m_bs {
        return Err(Error::invalid(format!(
            "{m_bs} orthogonal pilots need tau >= {m_bs}, got {tau}"
        )));
    }
    if root == 0 || gcd(root, tau) != 1 {
        return Err(Error::invalid(format!("root {root} is not coprime with tau = {tau}")));
    }
    let x = zadoff_chu(tau, root);
    let scale = 1.0 / (tau as f64).sqrt();
    Ok(CMat::from_fn(m_bs, tau, |i, n| x[(n + i) % tau] * scale))
}

/// `Y_k = rho W_k^H H_k V S + sigma W_k^H N_k`, where `noise` holds the
/// unit-variance draw `N_k / sigma` (`N_UE x tau`).
pub fn received_training_with_noise(
    h: &CMat,
    v: &CMat,
    w_k: &CMat,
    s: &CMat,
    cfg: &TrainingConfig,
    noise: &CMat,
) -> Result<CMat> {
    if h.nrows() != w_k.nrows() || h.ncols() != v.nrows() || v.ncols() != s.nrows() {
        return Err(Error::invalid("received_training: dimension mismatch"));
    }
    if noise.shape() != (h.nrows(), s.ncols()) {
        return Err(Error::invalid("received_training: noise must be N_UE x tau"));
    }
    let wh = w_k.adjoint();
    let signal = (&wh * h * v * s).scale(cfg.rho());
    Ok(signal + (wh * noise).scale(cfg.noise_var.sqrt()))
}

/// [`received_training_with_noise`] with `N_k` drawn i.i.d. CN(0, noise_var).
pub fn received_training<R: Rng + ?Sized>(
    h: &CMat,
    v: &CMat,
    w_k: &CMat,
    s: &CMat,
    cfg: &TrainingConfig,
    rng: &mut R,
) -> Result<CMat> {
    let noise = linalg::complex_gaussian_matrix(h.nrows(), s.ncols(), rng);
    received_training_with_noise(h, v, w_k, s, cfg, &noise)
}

/// `A = S^T kron I_{M_UE}`.
pub fn pilot_operator(s: &CMat, m_ue: usize) -> CMat {
    linalg::kron(&s.transpose(), &linalg::identity(m_ue))
}

/// `Gamma = I_tau kron W_k^H`.
pub fn noise_operator(tau: usize, w_k: &CMat) -> CMat {
    linalg::kron(&linalg::identity(tau), &w_k.adjoint())
}

fn check_dims(y: &CMat, sigma_bar: &CMat, s: &CMat, w_k: &CMat) -> Result<()> {
    let (m_bs, tau) = s.shape();
    let m_ue = w_k.ncols();
    if y.shape() != (m_ue, tau) || sigma_bar.shape() != (m_bs * m_ue, m_bs * m_ue) {
        return Err(Error::invalid("lmmse: dimension mismatch"));
    }
    Ok(())
}

/// LMMSE estimate of `vec(Hbar_k)` in the direct form
/// `rho Sigma A^H (rho^2 A Sigma A^H + sigma^2 Gamma Gamma^H)^{-1} vec(Y)`.
///
/// Works for any pilot matrix; the inner matrix has side `tau M_UE`.
pub fn lmmse_estimate(
    y: &CMat,
    sigma_bar: &CMat,
    s: &CMat,
    w_k: &CMat,
    cfg: &TrainingConfig,
) -> Result<CVec> {
    check_dims(y, sigma_bar, s, w_k)?;
    let rho = cfg.rho();
    let a = pilot_operator(s, w_k.ncols());
    let gamma = noise_operator(s.ncols(), w_k);
    let inner = (&a * sigma_bar * a.adjoint()).scale(rho * rho)
        + (&gamma * gamma.adjoint()).scale(cfg.noise_var);
    let yv = CMat::from_column_slice(y.len(), 1, y.as_slice());
    let x = linalg::hpd_solve(&inner, &yv)
        .map_err(|_| Error::numerical("LMMSE inner matrix is singular"))?;
    let est = (sigma_bar * a.adjoint() * x).scale(rho);
    Ok(CVec::from_column_slice(est.as_slice()))
}

/// LMMSE estimate for pilots with `S S^H = I`, using the sufficient statistic
/// `C^{-1} Y S^H` (`C = W_k^H W_k`). Equal to [`lmmse_estimate`] under that
/// condition but costs `O((M_BS M_UE)^3)` independent of `tau`.
pub fn lmmse_estimate_orthogonal(
    y: &CMat,
    sigma_bar: &CMat,
    s: &CMat,
    w_k: &CMat,
    cfg: &TrainingConfig,
) -> Result<CVec> {
    check_dims(y, sigma_bar, s, w_k)?;
    let rho = cfg.rho();
    let m_bs = s.nrows();
    let c_inv = linalg::hpd_inverse(&(w_k.adjoint() * w_k))
        .map_err(|_| Error::numerical("combiner has linearly dependent beams"))?;
    let stat = &c_inv * y * s.adjoint();
    let d = linalg::kron(&linalg::identity(m_bs), &c_inv);
    let n = sigma_bar.nrows();
    let lhs = (sigma_bar * d).scale(rho * rho) + linalg::identity(n).scale(cfg.noise_var);
    let rhs = sigma_bar * CMat::from_column_slice(n, 1, stat.as_slice());
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("LMMSE system is singular"))?;
    Ok(CVec::from_column_slice(x.scale(rho).as_slice()))
}

/// Estimation error covariance
/// `(Sigma^{-1} + kappa A^H (Gamma Gamma^H)^{-1} A)^{-1}`.
///
/// A singular `Sigma` is regularized by `1e-10 tr(Sigma)/dim` on the diagonal.
pub fn lmmse_error_covariance(sigma_bar: &CMat, s: &CMat, w_k: &CMat, kappa: f64) -> Result<CMat> {
    let m_ue = w_k.ncols();
    let n = sigma_bar.nrows();
    if n != s.nrows() * m_ue {
        return Err(Error::invalid("lmmse_error_covariance: dimension mismatch"));
    }
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let sigma_inv = match linalg::hpd_inverse(sigma_bar) {
        Ok(inv) => inv,
        Err(_) => {
            let eps = 1e-10 * linalg::trace_re(sigma_bar).max(f64::MIN_POSITIVE) / n as f64;
            linalg::hpd_inverse(&(sigma_bar + linalg::identity(n).scale(eps)))?
        }
    };
    let c_inv = linalg::hpd_inverse(&(w_k.adjoint() * w_k))
        .map_err(|_| Error::numerical("combiner has linearly dependent beams"))?;
    // A^H (Gamma Gamma^H)^{-1} A = conj(S) S^T kron C^{-1}.
    let info = linalg::kron(&(s.conjugate() * s.transpose()), &c_inv);
    linalg::hpd_inverse(&(sigma_inv + info.scale(kappa)))
}

/// Effective channel of one UE with its estimate.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub h_bar: CMat,
    pub h_hat: CMat,
    pub err_cov: CMat,
}

/// Train, estimate, and compute the error covariance for one UE.
#[allow(clippy::too_many_arguments)]
pub fn estimate_effective_channel(
    h: &CMat,
    v: &CMat,
    w_k: &CMat,
    s: &CMat,
    sigma_bar: &CMat,
    cfg: &TrainingConfig,
    noise: &CMat,
) -> Result<EffectiveChannel> {
    let y = received_training_with_noise(h, v, w_k, s, cfg, noise)?;
    let est = lmmse_estimate_orthogonal(&y, sigma_bar, s, w_k, cfg)?;
    let h_hat = linalg::unvec(&est, w_k.ncols(), v.ncols());
    Ok(EffectiveChannel {
        h_bar: w_k.adjoint() * h * v,
        h_hat,
        err_cov: lmmse_error_covariance(sigma_bar, s, w_k, cfg.kappa())?,
    })
}

/// Element-wise mid-rise uniform quantizer on `[-a, a]` with `2^q_bits`
/// levels per real and imaginary part; `a` is the largest absolute real or
/// imaginary entry and is assumed to reach the receiver unquantized.
pub fn quantize_feedback(m: &CMat, q_bits: u32) -> Result<CMat> {
    if q_bits == 0 || q_bits > 52 {
        return Err(Error::invalid(format!("q_bits must be in 1..=52, got {q_bits}")));
    }
    let a = m.iter().fold(0.0f64, |acc, z| acc.max(z.re.abs()).max(z.im.abs()));
    if a == 0.0 {
        return Ok(m.clone());
    }
    let levels = (1u64 << q_bits) as f64;
    let step = 2.0 * a / levels;
    let q = |x: f64| {
        let i = ((x + a) / step).floor().clamp(0.0, levels - 1.0);
        -a + step * (i + 0.5)
    };
    Ok(m.map(|z| Complex64::new(q(z.re), q(z.im))))
}
