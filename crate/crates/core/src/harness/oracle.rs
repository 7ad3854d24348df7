//! Hierarchical selection versus the centralized brute-force optimum on small
//! random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beamsel::{self, BeamDomain, Policy, SelectionConfig, BRUTE_FORCE_CAP};
use crate::channel::{self, ArrayGeometry, ClusterConfig, ScattererPool, Scenario};
use crate::codebook::{Codebook, Side};
use crate::error::Result;

/// A small selection problem: `K = 2`, `M_UE = 1`, `B_BS` in 4..=6, `B_UE` in 2..=3,
/// square DFT codebooks, one pilot element per beam in a 10-element frame.
pub fn small_instance(seed: u64) -> Result<(Vec<BeamDomain>, SelectionConfig)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b_bs = rng.random_range(4..=6);
    let b_ue = rng.random_range(2..=3);
    let cb_bs = Codebook::dft(b_bs, b_bs, Side::Bs)?;
    let cb_ue = Codebook::dft(b_ue, b_ue, Side::Ue)?;
    let geo = channel::place_users(Scenario::Random, 2, 200.0, 10.0, 360.0, &mut rng)?;
    let cfg = ClusterConfig {
        n_clusters: 3,
        paths_per_cluster: 4,
        aod_spread_deg: 5.0,
        aoa_spread_deg: 10.0,
        shared_cluster_probability: 0.5,
        ..Default::default()
    };
    let mut pool = ScattererPool::default();
    let mut domains = Vec::with_capacity(2);
    for ue in 0..2 {
        let cs = channel::draw_clusters(&geo, ue, &cfg, &mut pool, &mut rng)?;
        let st = channel::covariance_from_clusters(&cs, &ArrayGeometry::ula(b_bs), &ArrayGeometry::ula(b_ue))?;
        domains.push(BeamDomain::new(&st, &cb_bs, &cb_ue)?);
    }
    let sel = SelectionConfig::new(1, 4, 10.0, 1, 10);
    Ok((domains, sel))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapSummary {
    pub policy: Policy,
    pub instances: usize,
    /// Mean of hierarchical / optimum objective.
    pub mean_ratio: f64,
    pub min_ratio: f64,
    /// Largest amount by which hierarchical exceeded the optimum (should be <= 0).
    pub max_excess: f64,
}

/// Run the comparison for P2-P4 on `n` instances derived from `seed`.
pub fn gap_suite(n: usize, seed: u64) -> Result<Vec<GapSummary>> {
    let mut out = Vec::new();
    for policy in [Policy::P2, Policy::P3, Policy::P4] {
        let mut ratios = Vec::with_capacity(n);
        let mut max_excess = f64::NEG_INFINITY;
        for i in 0..n as u64 {
            let (domains, sel) = small_instance(seed.wrapping_add(i))?;
            let h = beamsel::select_hierarchical(policy, &[0, 1], &domains, &sel)?;
            let b = beamsel::brute_force_central(policy, &domains, &sel, BRUTE_FORCE_CAP)?;
            let vh = beamsel::full_objective(policy, &h, &domains, &sel);
            let vb = beamsel::full_objective(policy, &b, &domains, &sel);
            max_excess = max_excess.max(vh - vb);
            ratios.push(if vb > 0.0 { vh / vb } else { 1.0 });
        }
        out.push(GapSummary {
            policy,
            instances: n,
            mean_ratio: ratios.iter().sum::<f64>() / n as f64,
            min_ratio: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
            max_excess,
        });
    }
    Ok(out)
}
