//! User drops, a geometric cluster channel, exact covariances, and Gaussian
//! channel realizations.
//!
//! Normalization: steering vectors have unit norm and every path of a UE's
//! cluster set is weighted by `sqrt(N_BS * N_UE * p)`, so with path powers
//! summing to one the covariance trace is `N_BS * N_UE` (unit average gain per
//! antenna pair). The SNR `kappa` is then the only link-budget knob.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_elements: usize,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
}

impl ArrayGeometry {
    pub fn ula(n_elements: usize) -> Self {
        ArrayGeometry { n_elements, element_spacing: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 || !(self.element_spacing > 0.0) {
            return Err(Error::invalid(format!(
                "array needs n_elements >= 1 and spacing > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Unit-norm steering vector for angle `theta` from broadside.
    pub fn steering(&self, theta: f64) -> CVec {
        let n = self.n_elements;
        let scale = 1.0 / (n as f64).sqrt();
        let phase = 2.0 * PI * self.element_spacing * theta.sin();
        CVec::from_fn(n, |p, _| Complex64::from_polar(scale, phase * p as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Random,
    CloselyLocated,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Scenario::Random),
            "closely_located" => Ok(Scenario::CloselyLocated),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// UE placement for one drop. The BS sits at `bs_position` with its array
/// broadside along +x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropGeometry {
    pub ue_positions: Vec<[f64; 2]>,
    pub bs_position: [f64; 2],
    pub scenario: Scenario,
    /// Broadside direction of each UE array, radians.
    pub ue_orientations: Vec<f64>,
    pub cell_radius: f64,
}

impl DropGeometry {
    pub fn k(&self) -> usize {
        self.ue_positions.len()
    }
}

fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, r_min: f64, r_max: f64) -> [f64; 2] {
    uniform_in_sector(rng, r_min, r_max, 2.0 * PI)
}

/// Uniform point in the annular sector of angular width `width` centered on +x.
fn uniform_in_sector<R: Rng + ?Sized>(rng: &mut R, r_min: f64, r_max: f64, width: f64) -> [f64; 2] {
    let u: f64 = rng.random();
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let phi = (rng.random::<f64>() - 0.5) * width;
    [r * phi.cos(), r * phi.sin()]
}

/// Minimum BS-UE distance in meters; keeps UEs out of the array near field.
pub const MIN_UE_DISTANCE: f64 = 10.0;

/// Drop `k` UEs in the sector of radius `cell_radius` and angular width
/// `sector_deg` facing the BS array (360 gives the full disc).
///
/// For `CloselyLocated` all UEs fall within `cluster_radius / 2` of a common
/// random anchor, so no two UEs are more than `cluster_radius` apart.
pub fn place_users<R: Rng + ?Sized>(
    scenario: Scenario,
    k: usize,
    cell_radius: f64,
    cluster_radius: f64,
    sector_deg: f64,
    rng: &mut R,
) -> Result<DropGeometry> {
    if k == 0 {
        return Err(Error::invalid("at least one UE is required"));
    }
    if !(cell_radius > MIN_UE_DISTANCE) || !(cluster_radius > 0.0) {
        return Err(Error::invalid(format!(
            "need cell_radius > {MIN_UE_DISTANCE} m and cluster_radius > 0, got {cell_radius}, {cluster_radius}"
        )));
    }
    if !(sector_deg > 0.0 && sector_deg <= 360.0) {
        return Err(Error::invalid(format!("sector width must be in (0, 360] degrees, got {sector_deg}")));
    }
    let width = sector_deg.to_radians();
    let ue_positions = match scenario {
        Scenario::Random => (0..k)
            .map(|_| uniform_in_sector(rng, MIN_UE_DISTANCE, cell_radius, width))
            .collect(),
        Scenario::CloselyLocated => {
            let half = 0.5 * cluster_radius;
            let outer = (cell_radius - half).max(MIN_UE_DISTANCE + half);
            let anchor = uniform_in_sector(rng, MIN_UE_DISTANCE + half, outer, width);
            (0..k)
                .map(|_| {
                    let d = uniform_in_disc(rng, 0.0, half);
                    [anchor[0] + d[0], anchor[1] + d[1]]
                })
                .collect()
        }
    };
    let ue_orientations = (0..k).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    Ok(DropGeometry {
        ue_positions,
        bs_position: [0.0, 0.0],
        scenario,
        ue_orientations,
        cell_radius,
    })
}

/// Parameters of the cluster channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub n_clusters: usize,
    pub paths_per_cluster: usize,
    /// Intra-cluster RMS angle spread at the BS, degrees.
    pub aod_spread_deg: f64,
    /// Intra-cluster RMS angle spread at the UE, degrees.
    pub aoa_spread_deg: f64,
    /// Probability that a cluster reuses a scatterer already present in the drop.
    pub shared_cluster_probability: f64,
    /// New scatterers fall uniformly within this distance of their UE, meters.
    pub scatterer_radius: f64,
    pub pathloss_exponent: f64,
    /// Log-normal per-cluster power spread, dB.
    pub cluster_shadowing_db: f64,
    pub los_probability: f64,
    pub k_factor_db: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            n_clusters: 8,
            paths_per_cluster: 20,
            aod_spread_deg: 1.0,
            aoa_spread_deg: 2.0,
            shared_cluster_probability: 0.2,
            scatterer_radius: 200.0,
            pathloss_exponent: 1.0,
            cluster_shadowing_db: 2.0,
            los_probability: 0.0,
            k_factor_db: 6.0,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("cluster config: {m}")));
        if self.n_clusters == 0 || self.paths_per_cluster == 0 {
            return bad("n_clusters and paths_per_cluster must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.shared_cluster_probability)
            || !(0.0..=1.0).contains(&self.los_probability)
        {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.aod_spread_deg < 0.0 || self.aoa_spread_deg < 0.0 || self.cluster_shadowing_db < 0.0 {
            return bad("spreads must be >= 0");
        }
        if !(self.scatterer_radius > 0.0) || !self.pathloss_exponent.is_finite() {
            return bad("scatterer_radius must be > 0 and pathloss_exponent finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Departure angle at the BS array, radians from broadside.
    pub aod: f64,
    /// Arrival angle at the UE array, radians from broadside.
    pub aoa: f64,
    pub mean_power: f64,
}

/// Multipath description of one UE's channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub paths: Vec<Path>,
    pub los_flag: bool,
    pub k_factor: f64,
    /// Scatterer index (into the drop's pool) of each cluster.
    pub scatterers: Vec<usize>,
}

impl ClusterSet {
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.mean_power).sum()
    }
}

/// Scatterers created so far in a drop; later UEs may reuse them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScattererPool {
    pub positions: Vec<[f64; 2]>,
}

fn angle_to(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn laplacian<R: Rng + ?Sized>(rng: &mut R, rms: f64) -> f64 {
    if rms == 0.0 {
        return 0.0;
    }
    // Laplace(0, b) has standard deviation b * sqrt(2).
    let b = rms / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Draw the cluster set of UE `ue` in `geometry`, sharing scatterers through `pool`.
pub fn draw_clusters<R: Rng + ?Sized>(
    geometry: &DropGeometry,
    ue: usize,
    cfg: &ClusterConfig,
    pool: &mut ScattererPool,
    rng: &mut R,
) -> Result<ClusterSet> {
    cfg.validate()?;
    if ue >= geometry.k() {
        return Err(Error::invalid(format!("UE index {ue} out of range")));
    }
    let pos = geometry.ue_positions[ue];
    let orient = geometry.ue_orientations[ue];
    let bs = geometry.bs_position;
    let shadow = Normal::new(0.0, cfg.cluster_shadowing_db).expect("finite shadowing");

    let mut scatterers: Vec<usize> = Vec::with_capacity(cfg.n_clusters);
    for _ in 0..cfg.n_clusters {
        let reusable: Vec<usize> = (0..pool.positions.len())
            .filter(|s| !scatterers.contains(s))
            .collect();
        let share = !reusable.is_empty() && rng.random::<f64>() < cfg.shared_cluster_probability;
        if share {
            scatterers.push(reusable[rng.random_range(0..reusable.len())]);
        } else {
            let d = uniform_in_disc(rng, 0.0, cfg.scatterer_radius);
            pool.positions.push([pos[0] + d[0], pos[1] + d[1]]);
            scatterers.push(pool.positions.len() - 1);
        }
    }

    let mut paths = Vec::with_capacity(cfg.n_clusters * cfg.paths_per_cluster + 1);
    let aod_rms = cfg.aod_spread_deg.to_radians();
    let aoa_rms = cfg.aoa_spread_deg.to_radians();
    for &s in &scatterers {
        let sp = pool.positions[s];
        let length = (dist(bs, sp) + dist(sp, pos)).max(1.0);
        let db: f64 = shadow.sample(rng);
        let power = length.powf(-cfg.pathloss_exponent) * 10f64.powf(db / 10.0);
        let aod0 = angle_to(bs, sp);
        let aoa0 = angle_to(pos, sp) - orient;
        let per_path = power / cfg.paths_per_cluster as f64;
        for _ in 0..cfg.paths_per_cluster {
            paths.push(Path {
                aod: aod0 + laplacian(rng, aod_rms),
                aoa: aoa0 + laplacian(rng, aoa_rms),
                mean_power: per_path,
            });
        }
    }
    let nlos_total: f64 = paths.iter().map(|p| p.mean_power).sum();
    for p in &mut paths {
        p.mean_power /= nlos_total;
    }

    let los_flag = rng.random::<f64>() < cfg.los_probability;
    let k_factor = if los_flag { 10f64.powf(cfg.k_factor_db / 10.0) } else { 0.0 };
    if los_flag {
        for p in &mut paths {
            p.mean_power /= 1.0 + k_factor;
        }
        paths.push(Path {
            aod: angle_to(bs, pos),
            aoa: angle_to(pos, bs) - orient,
            mean_power: k_factor / (1.0 + k_factor),
        });
    }
    Ok(ClusterSet { paths, los_flag, k_factor, scatterers })
}

/// Second-order statistics of one UE's channel: `Sigma = G G^H` with
/// `vec(H) = G z`, `z ~ CN(0, I)`.
#[derive(Debug, Clone)]
pub struct ChannelStats {
    pub sigma: CMat,
    factor: CMat,
    pub n_bs: usize,
    pub n_ue: usize,
    pub clusters: Option<ClusterSet>,
}

impl ChannelStats {
    /// Build from an explicit covariance of side `n_bs * n_ue`.
    ///
    /// The square-root factor comes from an eigendecomposition with negative
    /// eigenvalues clipped to zero; clipping beyond `1e-10` of the largest
    /// eigenvalue is rejected.
    pub fn from_covariance(sigma: CMat, n_bs: usize, n_ue: usize) -> Result<Self> {
        let dim = n_bs * n_ue;
        if sigma.shape() != (dim, dim) {
            return Err(Error::invalid(format!(
                "covariance must be {dim}x{dim}, got {:?}",
                sigma.shape()
            )));
        }
        if linalg::hermitian_defect(&sigma) > 1e-10 {
            return Err(Error::numerical("covariance is not Hermitian"));
        }
        let (vals, vecs) = linalg::hermitian_eigen(&sigma);
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        if vals.iter().any(|&l| l < -1e-10 * top.max(f64::MIN_POSITIVE)) {
            return Err(Error::numerical("covariance has negative eigenvalues"));
        }
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.0).collect();
        let factor = CMat::from_fn(dim, keep.len(), |r, c| {
            vecs[(r, keep[c])] * vals[keep[c]].sqrt()
        });
        Ok(ChannelStats { sigma, factor, n_bs, n_ue, clusters: None })
    }

    /// Factor `G` with `Sigma = G G^H`; one column per path (or eigenmode).
    pub fn factor(&self) -> &CMat {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.n_bs * self.n_ue
    }
}

/// Closed-form covariance of the cluster channel:
/// `Sigma = N_BS N_UE sum_p p (conj(a_BS) kron a_UE)(.)^H`.
pub fn covariance_from_clusters(
    cs: &ClusterSet,
    bs: &ArrayGeometry,
    ue: &ArrayGeometry,
) -> Result<ChannelStats> {
    bs.validate()?;
    ue.validate()?;
    if cs.paths.is_empty() {
        return Err(Error::invalid("cluster set has no paths"));
    }
    let (n_bs, n_ue) = (bs.n_elements, ue.n_elements);
    let dim = n_bs * n_ue;
    let gain = (n_bs * n_ue) as f64;
    let mut factor = CMat::zeros(dim, cs.paths.len());
    for (c, p) in cs.paths.iter().enumerate() {
        let a_bs = bs.steering(p.aod);
        let a_ue = ue.steering(p.aoa);
        let amp = (gain * p.mean_power.max(0.0)).sqrt();
        for i in 0..n_bs {
            let ci = a_bs[i].conj() * amp;
            for j in 0..n_ue {
                factor[(i * n_ue + j, c)] = ci * a_ue[j];
            }
        }
    }
    let sigma = &factor * factor.adjoint();
    Ok(ChannelStats { sigma, factor, n_bs, n_ue, clusters: Some(cs.clone()) })
}

/// Draw `H` (`N_UE x N_BS`) with `vec(H) ~ CN(0, Sigma)`.
pub fn realize_channel<R: Rng + ?Sized>(stats: &ChannelStats, rng: &mut R) -> CMat {
    let z = linalg::complex_gaussian_matrix(stats.factor.ncols(), 1, rng);
    let v = &stats.factor * z;
    CMat::from_column_slice(stats.n_ue, stats.n_bs, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn random_drop_stays_in_cell() {
        let g = place_users(Scenario::Random, 7, 200.0, 10.0, 360.0, &mut rng(1)).unwrap();
        assert_eq!(g.k(), 7);
        for p in &g.ue_positions {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!(r <= 200.0 + 1e-9 && r >= MIN_UE_DISTANCE - 1e-9);
        }
    }

    #[test]
    fn closely_located_ues_are_close() {
        for seed in 0..50 {
            let g = place_users(Scenario::CloselyLocated, 5, 200.0, 5.0, 360.0, &mut rng(seed)).unwrap();
            for a in &g.ue_positions {
                assert!((a[0] * a[0] + a[1] * a[1]).sqrt() <= 200.0);
                for b in &g.ue_positions {
                    assert!(dist(*a, *b) <= 5.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_users_rejected() {
        assert!(matches!(
            place_users(Scenario::Random, 0, 200.0, 5.0, 360.0, &mut rng(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn placement_is_deterministic() {
        let a = place_users(Scenario::Random, 3, 200.0, 5.0, 360.0, &mut rng(9)).unwrap();
        let b = place_users(Scenario::Random, 3, 200.0, 5.0, 360.0, &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_cluster_is_one_unit_path() {
        let g = place_users(Scenario::Random, 1, 200.0, 5.0, 360.0, &mut rng(2)).unwrap();
        let cfg = ClusterConfig {
            n_clusters: 1,
            paths_per_cluster: 1,
            aod_spread_deg: 0.0,
            aoa_spread_deg: 0.0,
            ..Default::default()
        };
        let cs = draw_clusters(&g, 0, &cfg, &mut ScattererPool::default(), &mut rng(3)).unwrap();
        assert_eq!(cs.paths.len(), 1);
        assert!((cs.paths[0].mean_power - 1.0).abs() < 1e-15);
    }

    #[test]
    fn forced_sharing_aligns_departure_angles() {
        let g = place_users(Scenario::Random, 2, 200.0, 5.0, 360.0, &mut rng(4)).unwrap();
        let cfg = ClusterConfig {
            n_clusters: 1,
            paths_per_cluster: 1,
            aod_spread_deg: 0.0,
            aoa_spread_deg: 0.0,
            shared_cluster_probability: 1.0,
            ..Default::default()
        };
        let mut pool = ScattererPool::default();
        let mut r = rng(5);
        let c0 = draw_clusters(&g, 0, &cfg, &mut pool, &mut r).unwrap();
        let c1 = draw_clusters(&g, 1, &cfg, &mut pool, &mut r).unwrap();
        assert_eq!(c0.paths[0].aod, c1.paths[0].aod);
    }

    #[test]
    fn eighty_paths_sum_to_one() {
        let g = place_users(Scenario::Random, 1, 200.0, 5.0, 360.0, &mut rng(6)).unwrap();
        let cfg = ClusterConfig { n_clusters: 4, aod_spread_deg: 5.0, los_probability: 0.0, ..Default::default() };
        let cs = draw_clusters(&g, 0, &cfg, &mut ScattererPool::default(), &mut rng(7)).unwrap();
        assert_eq!(cs.paths.len(), 80);
        assert!((cs.total_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn los_path_keeps_unit_power() {
        let g = place_users(Scenario::Random, 1, 200.0, 5.0, 360.0, &mut rng(6)).unwrap();
        let cfg = ClusterConfig { n_clusters: 4, los_probability: 1.0, ..Default::default() };
        let cs = draw_clusters(&g, 0, &cfg, &mut ScattererPool::default(), &mut rng(8)).unwrap();
        assert!(cs.los_flag);
        assert_eq!(cs.paths.len(), 81);
        assert!((cs.total_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_path_covariance_is_rank_one() {
        let cs = ClusterSet {
            paths: vec![Path { aod: 0.3, aoa: -0.2, mean_power: 1.0 }],
            los_flag: false,
            k_factor: 0.0,
            scatterers: vec![0],
        };
        let st = covariance_from_clusters(&cs, &ArrayGeometry::ula(8), &ArrayGeometry::ula(4)).unwrap();
        let (vals, _) = linalg::hermitian_eigen(&st.sigma);
        assert!((vals[0] - 32.0).abs() < 1e-9);
        assert!(vals[1].abs() < 1e-9);
        assert!((linalg::trace_re(&st.sigma) - 32.0).abs() < 1e-9);
    }

    #[test]
    fn zero_covariance_gives_zero_channel() {
        let st = ChannelStats::from_covariance(CMat::zeros(8, 8), 4, 2).unwrap();
        let h = realize_channel(&st, &mut rng(1));
        assert_eq!(h, CMat::zeros(2, 4));
    }

    #[test]
    fn non_psd_covariance_rejected() {
        let mut s = linalg::identity(4);
        s[(3, 3)] = Complex64::new(-1.0, 0.0);
        assert!(matches!(
            ChannelStats::from_covariance(s, 2, 2),
            Err(Error::NumericalDomain(_))
        ));
    }
}
