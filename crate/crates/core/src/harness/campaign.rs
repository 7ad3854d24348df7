//! Monte-Carlo campaign driver.
//!
//! One drop is one beam-coherence block: users, clusters, covariances and the
//! UE hierarchy order are drawn once, every policy selects its beams, and then
//! each channel-coherence frame realizes channels, trains, estimates, feeds
//! back and precodes. All random inputs of a drop come from streams keyed by
//! `(seed, drop index)` and are shared by every result cell, so policies are
//! compared on common random numbers and results do not depend on the number
//! of workers.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamsel::{self, BeamDomain, SelectionConfig};
use crate::channel::{self, ArrayGeometry, ChannelStats, ScattererPool};
use crate::codebook::{BeamAssignment, Codebook, Side};
use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::linalg::{self, CMat};
use crate::precoding::{self, Csi, RANK_TOL};
use crate::training::{self, TrainingConfig};

/// Label under which the TDD benchmark is reported.
pub const TDD_LABEL: &str = "TDD";

/// Identifies one result cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub policy: String,
    pub snr_db: f64,
    pub t_coh_ms: f64,
    pub q_bits: u32,
}

/// Metrics of one drop in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropMetrics {
    /// `(1 - omega) sum_k SE_k`, averaged over the drop's frames.
    pub throughput: f64,
    /// `sum_k SE_k`, averaged over frames.
    pub sum_se: f64,
    pub m_bs: f64,
    pub omega: f64,
    pub gcmd: f64,
    /// BS beams activated on top of the PMI union.
    pub filled: f64,
}

/// Aggregated metrics of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub policy: String,
    pub snr_db: f64,
    pub t_coh_ms: f64,
    pub q_bits: u32,
    #[serde(rename = "K")]
    pub k: usize,
    pub mean_throughput: f64,
    pub stderr_throughput: f64,
    pub mean_m_bs: f64,
    pub mean_omega: f64,
    pub mean_gcmd: f64,
    pub n: u64,
    /// Mean number of BS beams activated beyond the PMI union.
    pub mean_filled: f64,
    /// Mean SE per UE (sum SE over UEs and drops divided by `K n`).
    pub mean_se_per_ue: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config: ScenarioConfig,
    pub cells: Vec<CellResult>,
    /// Per-cell, per-drop metrics in drop order.
    #[serde(skip)]
    pub samples: Vec<Vec<DropMetrics>>,
}

impl CampaignResult {
    pub fn cell(&self, policy: &str, snr_db: f64, t_coh_ms: f64, q_bits: u32) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.policy == policy && c.snr_db == snr_db && c.t_coh_ms == t_coh_ms && c.q_bits == q_bits
        })
    }

    /// Index-aligned per-drop samples of a cell.
    pub fn samples_of(&self, policy: &str, snr_db: f64, t_coh_ms: f64, q_bits: u32) -> Option<&[DropMetrics]> {
        let i = self.cells.iter().position(|c| {
            c.policy == policy && c.snr_db == snr_db && c.t_coh_ms == t_coh_ms && c.q_bits == q_bits
        })?;
        self.samples.get(i).map(|v| v.as_slice())
    }
}

/// Cell keys in output order: policies (then TDD) x SNR x T_coh x q_bits.
pub fn cell_keys(cfg: &ScenarioConfig) -> Vec<CellKey> {
    let mut labels: Vec<String> = cfg.policies.iter().map(|p| p.to_string()).collect();
    if cfg.tdd {
        labels.push(TDD_LABEL.to_string());
    }
    let mut keys = Vec::with_capacity(cfg.n_cells());
    for policy in &labels {
        for &snr_db in &cfg.snr_db {
            for &t_coh_ms in &cfg.t_coh_ms {
                for &q_bits in &cfg.q_bits {
                    keys.push(CellKey { policy: policy.clone(), snr_db, t_coh_ms, q_bits });
                }
            }
        }
    }
    keys
}

/// Random stream for one purpose within one drop.
fn stream(seed: u64, drop: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(drop);
    rng
}

const GEOMETRY: u64 = 1;
const ORDER: u64 = 2;
const FADING: u64 = 3;
const NOISE: u64 = 4;

/// Policy-independent random inputs of one drop.
struct DropDraw {
    stats: Vec<ChannelStats>,
    domains: Vec<BeamDomain>,
    order: Vec<usize>,
    /// Per frame, per UE: channel `H_k`.
    channels: Vec<Vec<CMat>>,
    /// Per frame, per UE: unit-variance training noise (`N_UE x tau`).
    noise: Vec<Vec<CMat>>,
}

struct Shared {
    cb_bs: Codebook,
    cb_ue: Codebook,
    bs: ArrayGeometry,
    ue: ArrayGeometry,
}

impl Shared {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Shared {
            cb_bs: Codebook::dft(cfg.n_bs, cfg.b_bs, Side::Bs)?,
            cb_ue: Codebook::dft(cfg.n_ue, cfg.b_ue, Side::Ue)?,
            bs: ArrayGeometry::ula(cfg.n_bs),
            ue: ArrayGeometry::ula(cfg.n_ue),
        })
    }
}

fn draw_drop(cfg: &ScenarioConfig, sh: &Shared, drop: u64) -> Result<DropDraw> {
    let mut rng = stream(cfg.seed, drop, GEOMETRY);
    let geo = channel::place_users(cfg.scenario, cfg.k, cfg.cell_radius, cfg.cluster_radius, cfg.sector_deg, &mut rng)?;
    let mut pool = ScattererPool::default();
    let mut stats = Vec::with_capacity(cfg.k);
    for ue in 0..cfg.k {
        let cs = channel::draw_clusters(&geo, ue, &cfg.cluster, &mut pool, &mut rng)?;
        stats.push(channel::covariance_from_clusters(&cs, &sh.bs, &sh.ue)?);
    }
    let domains = stats
        .iter()
        .map(|s| BeamDomain::new(s, &sh.cb_bs, &sh.cb_ue))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..cfg.k).collect();
    order.shuffle(&mut stream(cfg.seed, drop, ORDER));

    let mut fading = stream(cfg.seed, drop, FADING);
    let mut noise_rng = stream(cfg.seed, drop, NOISE);
    let mut channels = Vec::with_capacity(cfg.frames_per_drop);
    let mut noise = Vec::with_capacity(cfg.frames_per_drop);
    for _ in 0..cfg.frames_per_drop {
        channels.push(stats.iter().map(|s| channel::realize_channel(s, &mut fading)).collect());
        noise.push(
            (0..cfg.k)
                .map(|_| linalg::complex_gaussian_matrix(cfg.n_ue, cfg.tau, &mut noise_rng))
                .collect(),
        );
    }
    Ok(DropDraw { stats, domains, order, channels, noise })
}

fn kappa_of(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// FDD frame: train the selected beams, estimate, feed back, BD on the
/// (quantized) estimates, score on the true effective channels.
#[allow(clippy::too_many_arguments)]
fn fdd_frame(
    cfg: &ScenarioConfig,
    sh: &Shared,
    a: &BeamAssignment,
    draw: &DropDraw,
    frame: usize,
    tcfg: &TrainingConfig,
    q_bits: u32,
    pilots: &mut HashMap<usize, CMat>,
) -> Result<f64> {
    let m_bs = a.m_bs();
    let s = match pilots.get(&m_bs) {
        Some(s) => s.clone(),
        None => {
            let s = training::pilot_matrix(m_bs, cfg.tau, cfg.zc_root)?;
            pilots.insert(m_bs, s.clone());
            s
        }
    };
    let v = sh.cb_bs.assemble(&a.bs_beams)?;
    let mut w_gob = Vec::with_capacity(cfg.k);
    let mut h_true = Vec::with_capacity(cfg.k);
    let mut h_fb = Vec::with_capacity(cfg.k);
    for k in 0..cfg.k {
        let w = sh.cb_ue.assemble(&a.ue_beams[k])?;
        let h = &draw.channels[frame][k];
        let y = training::received_training_with_noise(h, &v, &w, &s, tcfg, &draw.noise[frame][k])?;
        let sigma_bar = draw.domains[k].effective(&a.bs_beams, &a.ue_beams[k]);
        let est = training::lmmse_estimate_orthogonal(&y, &sigma_bar, &s, &w, tcfg)?;
        let h_hat = linalg::unvec(&est, cfg.m_ue, m_bs);
        h_fb.push(if q_bits > 0 { training::quantize_feedback(&h_hat, q_bits)? } else { h_hat });
        h_true.push(w.adjoint() * h * &v);
        w_gob.push(w);
    }
    let bd = precoding::block_diagonalize(&h_fb, RANK_TOL)?;
    let se = precoding::se_general(&h_true, &w_gob, &bd.v_bar, &bd.w_bar, tcfg.kappa(), cfg.noise_var)?;
    Ok(se.iter().sum())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Simulate one drop; returns metrics for every cell in [`cell_keys`] order.
pub fn run_drop(cfg: &ScenarioConfig, drop: u64) -> Result<Vec<DropMetrics>> {
    let sh = Shared::new(cfg)?;
    run_drop_with(cfg, &sh, drop).map_err(|e| Error::Drop { drop, source: Box::new(e) })
}

fn run_drop_with(cfg: &ScenarioConfig, sh: &Shared, drop: u64) -> Result<Vec<DropMetrics>> {
    let draw = draw_drop(cfg, sh, drop)?;
    let mut pilots: HashMap<usize, CMat> = HashMap::new();
    let mut out = Vec::with_capacity(cfg.n_cells());
    for &policy in &cfg.policies {
        for &snr_db in &cfg.snr_db {
            let kappa = kappa_of(snr_db);
            for &t_coh_ms in &cfg.t_coh_ms {
                let t_total = training::frame_resource_elements(t_coh_ms);
                let sel = SelectionConfig {
                    counting: cfg.overhead_counting,
                    max_bs_beams: cfg.max_bs_beams,
                    ..SelectionConfig::new(cfg.m_ue, cfg.pmi_cap, kappa, cfg.tau, t_total)
                };
                let a = beamsel::select(policy, &draw.order, &draw.domains, &sel)?;
                beamsel::overhead_v(a.m_bs(), cfg.tau, t_total)?;
                let omega = beamsel::assignment_overhead(&a, &sel);
                let gcmd = mean(&beamsel::assignment_gcmd(&a, &draw.domains));
                let tcfg = TrainingConfig::from_snr(cfg.tau, t_total, kappa, cfg.noise_var)?;
                for &q in &cfg.q_bits {
                    let mut se = Vec::with_capacity(cfg.frames_per_drop);
                    let mut thr = Vec::with_capacity(cfg.frames_per_drop);
                    for f in 0..cfg.frames_per_drop {
                        let s = fdd_frame(cfg, sh, &a, &draw, f, &tcfg, q, &mut pilots)?;
                        thr.push(precoding::effective_throughput(vec![s], omega)?.throughput);
                        se.push(s);
                    }
                    out.push(DropMetrics {
                        throughput: mean(&thr),
                        sum_se: mean(&se),
                        m_bs: a.m_bs() as f64,
                        omega,
                        gcmd,
                        filled: a.filled.len() as f64,
                    });
                }
            }
        }
    }
    if cfg.tdd {
        let sigmas: Vec<CMat> = draw.stats.iter().map(|s| s.sigma.clone()).collect();
        let gcmd = if cfg.k > 1 {
            mean(&(0..cfg.k).map(|k| beamsel::gcmd(&sigmas, k)).collect::<Result<Vec<_>>>()?)
        } else {
            1.0
        };
        for &snr_db in &cfg.snr_db {
            let kappa = kappa_of(snr_db);
            let mut per_q = Vec::with_capacity(cfg.q_bits.len());
            for &q in &cfg.q_bits {
                let csi = if q == 0 { Csi::Perfect } else { Csi::Quantized(q) };
                let mut se = Vec::with_capacity(cfg.frames_per_drop);
                for f in 0..cfg.frames_per_drop {
                    let r = precoding::tdd_benchmark(&draw.channels[f], kappa, cfg.noise_var, csi)?;
                    se.push(r.throughput);
                }
                let s = mean(&se);
                per_q.push(DropMetrics { throughput: s, sum_se: s, m_bs: cfg.n_bs as f64, omega: 0.0, gcmd, filled: 0.0 });
            }
            // Overhead-free, so identical across coherence times.
            for _ in &cfg.t_coh_ms {
                out.extend_from_slice(&per_q);
            }
        }
    }
    Ok(out)
}

fn aggregate(key: &CellKey, k: usize, samples: &[DropMetrics]) -> CellResult {
    let n = samples.len();
    let thr: Vec<f64> = samples.iter().map(|d| d.throughput).collect();
    let m = mean(&thr);
    let stderr = if n > 1 {
        let var = thr.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let avg = |f: fn(&DropMetrics) -> f64| samples.iter().map(f).sum::<f64>() / n as f64;
    CellResult {
        policy: key.policy.clone(),
        snr_db: key.snr_db,
        t_coh_ms: key.t_coh_ms,
        q_bits: key.q_bits,
        k,
        mean_throughput: m,
        stderr_throughput: stderr,
        mean_m_bs: avg(|d| d.m_bs),
        mean_omega: avg(|d| d.omega),
        mean_gcmd: avg(|d| d.gcmd),
        n: n as u64,
        mean_filled: avg(|d| d.filled),
        mean_se_per_ue: avg(|d| d.sum_se) / k as f64,
    }
}

/// Sweep the configured grid over `cfg.iterations` drops on `workers` threads
/// (all available cores when `None`).
pub fn run_campaign(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<CampaignResult> {
    cfg.validate()?;
    let sh = Shared::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_drop: Vec<Vec<DropMetrics>> = pool.install(|| {
        (0..cfg.iterations)
            .into_par_iter()
            .map(|d| run_drop_with(cfg, &sh, d).map_err(|e| Error::Drop { drop: d, source: Box::new(e) }))
            .collect::<Result<Vec<_>>>()
    })?;
    let keys = cell_keys(cfg);
    let mut samples = vec![Vec::with_capacity(per_drop.len()); keys.len()];
    for drop in &per_drop {
        for (c, m) in drop.iter().enumerate() {
            samples[c].push(*m);
        }
    }
    let cells = keys.iter().zip(&samples).map(|(key, s)| aggregate(key, cfg.k, s)).collect();
    Ok(CampaignResult { config: cfg.clone(), cells, samples })
}
