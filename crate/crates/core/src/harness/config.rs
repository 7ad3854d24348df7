//! Scenario configuration, loaded from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beamsel::{OverheadCounting, Policy};
use crate::channel::{ClusterConfig, Scenario};
use crate::error::{Error, Result};

/// Default pilot resource elements per trained BS beam.
pub const DEFAULT_TAU: usize = 1259;
pub const DEFAULT_ITERATIONS: u64 = 500;
pub const FULL_SCALE_ITERATIONS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub iterations: u64,
    pub scenario: Scenario,
    pub n_bs: usize,
    pub n_ue: usize,
    pub b_bs: usize,
    pub b_ue: usize,
    pub m_ue: usize,
    pub k: usize,
    pub snr_db: Vec<f64>,
    pub t_coh_ms: Vec<f64>,
    /// Feedback quantization bits; 0 means unquantized.
    pub q_bits: Vec<u32>,
    pub pmi_cap: usize,
    /// Pilot resource elements per trained BS beam.
    pub tau: usize,
    pub zc_root: usize,
    pub policies: Vec<Policy>,
    /// Also score the reciprocity-based TDD benchmark.
    pub tdd: bool,
    pub cell_radius: f64,
    pub cluster_radius: f64,
    /// Angular width of the served sector in degrees, centered on array broadside.
    pub sector_deg: f64,
    pub overhead_counting: OverheadCounting,
    pub max_bs_beams: Option<usize>,
    pub frames_per_drop: usize,
    pub noise_var: f64,
    pub cluster: ClusterConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            iterations: DEFAULT_ITERATIONS,
            scenario: Scenario::Random,
            n_bs: 64,
            n_ue: 4,
            b_bs: 64,
            b_ue: 4,
            m_ue: 3,
            k: 7,
            snr_db: vec![11.0],
            t_coh_ms: vec![15.0],
            q_bits: vec![0],
            pmi_cap: 4,
            tau: DEFAULT_TAU,
            zc_root: 1,
            policies: Policy::ALL.to_vec(),
            tdd: true,
            cell_radius: 200.0,
            cluster_radius: 10.0,
            sector_deg: 120.0,
            overhead_counting: OverheadCounting::BsBeams,
            max_bs_beams: None,
            frames_per_drop: 1,
            noise_var: 1.0,
            cluster: ClusterConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("n_bs", self.n_bs),
            ("n_ue", self.n_ue),
            ("b_bs", self.b_bs),
            ("b_ue", self.b_ue),
            ("m_ue", self.m_ue),
            ("k", self.k),
            ("pmi_cap", self.pmi_cap),
            ("tau", self.tau),
            ("frames_per_drop", self.frames_per_drop),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.iterations == 0 {
            return bad("iterations must be >= 1".into());
        }
        if self.m_ue > self.b_ue {
            return bad(format!("m_ue = {} exceeds b_ue = {}", self.m_ue, self.b_ue));
        }
        if (self.k - 1) * self.m_ue >= self.b_bs {
            return bad(format!(
                "(K - 1) M_UE = {} must be below b_bs = {}",
                (self.k - 1) * self.m_ue,
                self.b_bs
            ));
        }
        if self.snr_db.is_empty() || self.t_coh_ms.is_empty() || self.q_bits.is_empty() {
            return bad("snr_db, t_coh_ms and q_bits must be nonempty".into());
        }
        if self.t_coh_ms.iter().any(|&t| !(t > 0.0)) || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("t_coh_ms must be positive and snr_db finite".into());
        }
        if self.q_bits.iter().any(|&q| q > 52) {
            return bad("q_bits must be at most 52".into());
        }
        if self.policies.is_empty() && !self.tdd {
            return bad("nothing to run: no policies and tdd disabled".into());
        }
        if !(self.sector_deg > 0.0 && self.sector_deg <= 360.0) {
            return bad("sector_deg must be in (0, 360]".into());
        }
        if !(self.noise_var > 0.0) {
            return bad("noise_var must be positive".into());
        }
        if self.tdd && self.k * self.n_ue > self.n_bs {
            return bad("TDD benchmark needs K * n_ue <= n_bs".into());
        }
        self.cluster.validate()
    }

    /// Number of distinct result cells.
    pub fn n_cells(&self) -> usize {
        let per = self.snr_db.len() * self.t_coh_ms.len() * self.q_bits.len();
        (self.policies.len() + usize::from(self.tdd)) * per
    }
}
