//! Statistical beam selection.
//!
//! Everything here works on second-order statistics only. A UE's channel
//! covariance is first mapped to the beam domain of the two codebooks,
//! `Sigma_b = (conj(C_BS) kron C_UE)^H Sigma (conj(C_BS) kron C_UE)`, whose
//! diagonal is the beam-pair gain table and whose principal submatrices are the
//! effective covariances `Bbar^H Sigma Bbar` for any GoB precoder/combiner
//! drawn from the codebooks. Beam pair `(v, w)` sits at index `v * B_UE + w`,
//! matching `vec(W^H H V)` in column-major order.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelStats;
use crate::codebook::{check_indices, pmi_union, BeamAssignment, Codebook};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Default brute-force search-space cap.
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    P1,
    P2,
    P3,
    P4,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::P1, Policy::P2, Policy::P3, Policy::P4];

    /// Whether the objective carries the GCMD factor.
    pub fn uses_gcmd(self) -> bool {
        matches!(self, Policy::P2 | Policy::P4)
    }

    /// Whether the objective carries the `(1 - omega)` pre-log factor.
    pub fn uses_overhead(self) -> bool {
        matches!(self, Policy::P3 | Policy::P4)
    }

    pub fn name(self) -> &'static str {
        match self {
            Policy::P1 => "P1",
            Policy::P2 => "P2",
            Policy::P3 => "P3",
            Policy::P4 => "P4",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" => Ok(Policy::P1),
            "P2" => Ok(Policy::P2),
            "P3" => Ok(Policy::P3),
            "P4" => Ok(Policy::P4),
            other => Err(Error::Config(format!("unknown policy '{other}'"))),
        }
    }
}

/// How relevant beam pairs are picked from the gain table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelevanceRule {
    /// Pairs whose gain is at least the threshold.
    Threshold(f64),
    /// The `n` strongest pairs.
    TopN(usize),
}

/// What the training overhead counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverheadCounting {
    /// Distinct BS beams (one pilot per trained beam).
    #[default]
    BsBeams,
    /// Distinct reported `(v, w)` pairs.
    Pairs,
}

/// Knobs shared by all selection routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub m_ue: usize,
    /// Maximum pairs per PMI report.
    pub pmi_cap: usize,
    pub rule: RelevanceRule,
    pub kappa: f64,
    pub tau: usize,
    pub t_total: usize,
    pub counting: OverheadCounting,
    /// Optional upper limit on activated BS beams.
    pub max_bs_beams: Option<usize>,
}

impl SelectionConfig {
    pub fn new(m_ue: usize, pmi_cap: usize, kappa: f64, tau: usize, t_total: usize) -> Self {
        SelectionConfig {
            m_ue,
            pmi_cap,
            rule: RelevanceRule::TopN(pmi_cap),
            kappa,
            tau,
            t_total,
            counting: OverheadCounting::BsBeams,
            max_bs_beams: None,
        }
    }

    fn omega_of_count(&self, count: usize) -> f64 {
        self.tau as f64 * count as f64 / self.t_total as f64
    }
}

/// Beam-domain statistics of one UE.
#[derive(Debug, Clone)]
pub struct BeamDomain {
    pub b_bs: usize,
    pub b_ue: usize,
    /// `Sigma_b`, side `B_BS * B_UE`.
    pub sigma_b: CMat,
    /// Beam-pair gain table, `gains[v * B_UE + w]`.
    pub gains: Vec<f64>,
}

impl BeamDomain {
    pub fn new(stats: &ChannelStats, cb_bs: &Codebook, cb_ue: &Codebook) -> Result<Self> {
        if cb_bs.n() != stats.n_bs || cb_ue.n() != stats.n_ue {
            return Err(Error::invalid("codebook sizes do not match the channel dimensions"));
        }
        let (b_bs, b_ue) = (cb_bs.len(), cb_ue.len());
        let g = stats.factor();
        let ue_h = cb_ue.matrix().adjoint();
        let mut gb = CMat::zeros(b_bs * b_ue, g.ncols());
        for c in 0..g.ncols() {
            // vec(C_UE^H H C_BS) for the channel component H = unvec(g_c).
            let h = CMat::from_column_slice(stats.n_ue, stats.n_bs, g.column(c).as_slice());
            let m = &ue_h * h * cb_bs.matrix();
            gb.column_mut(c).copy_from_slice(m.as_slice());
        }
        let sigma_b = &gb * gb.adjoint();
        Ok(Self::from_beam_covariance(sigma_b, b_bs, b_ue))
    }

    pub fn from_beam_covariance(sigma_b: CMat, b_bs: usize, b_ue: usize) -> Self {
        let gains = sigma_b.diagonal().iter().map(|z| z.re.max(0.0)).collect();
        BeamDomain { b_bs, b_ue, sigma_b, gains }
    }

    pub fn gain(&self, v: usize, w: usize) -> f64 {
        self.gains[v * self.b_ue + w]
    }

    pub fn table(&self) -> BeamPairGainTable {
        BeamPairGainTable { b_bs: self.b_bs, b_ue: self.b_ue, gains: self.gains.clone() }
    }

    fn indices(&self, v: &[usize], w: &[usize]) -> Vec<usize> {
        v.iter().flat_map(|&i| w.iter().map(move |&j| i * self.b_ue + j)).collect()
    }

    /// Effective covariance for precoder beams `v` and combiner beams `w`.
    pub fn effective(&self, v: &[usize], w: &[usize]) -> CMat {
        let idx = self.indices(v, w);
        linalg::select(&self.sigma_b, &idx, &idx)
    }

    /// `Tr(Sigma_bar)` for precoder beams `v` and combiner beams `w`.
    pub fn trace(&self, v: &[usize], w: &[usize]) -> f64 {
        v.iter().flat_map(|&i| w.iter().map(move |&j| (i, j))).map(|(i, j)| self.gain(i, j)).sum()
    }

    /// Score of BS beam `v` for a UE using combiner beams `w`.
    fn beam_score(&self, v: usize, w: &[usize]) -> f64 {
        w.iter().map(|&j| self.gain(v, j)).sum()
    }
}

/// Gains `E|w^H H v|^2` for all beam pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPairGainTable {
    pub b_bs: usize,
    pub b_ue: usize,
    pub gains: Vec<f64>,
}

impl BeamPairGainTable {
    pub fn gain(&self, v: usize, w: usize) -> f64 {
        self.gains[v * self.b_ue + w]
    }
}

/// `Re(b^H Sigma b)` with `b = conj(v) kron w`.
pub fn beam_pair_gain(sigma: &CMat, v_beam: &CMat, w_beam: &CMat) -> f64 {
    let b = linalg::kron(&v_beam.conjugate(), w_beam);
    (b.adjoint() * sigma * &b)[(0, 0)].re
}

/// Pairs selected by `rule`, strongest first; ties go to the smaller `(v, w)`.
pub fn relevant_components(table: &BeamPairGainTable, rule: RelevanceRule) -> Vec<(usize, usize)> {
    let all: Vec<usize> = (0..table.b_ue).collect();
    restricted_components(table, &all, rule, usize::MAX)
}

fn restricted_components(
    table: &BeamPairGainTable,
    w_set: &[usize],
    rule: RelevanceRule,
    cap: usize,
) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..table.b_bs)
        .flat_map(|v| w_set.iter().map(move |&w| (v, w)))
        .collect();
    pairs.sort_by(|a, b| {
        table
            .gain(b.0, b.1)
            .total_cmp(&table.gain(a.0, a.1))
            .then(a.cmp(b))
    });
    let limit = match rule {
        RelevanceRule::Threshold(xi) => {
            pairs.retain(|&(v, w)| table.gain(v, w) >= xi);
            cap
        }
        RelevanceRule::TopN(n) => n.min(cap),
    };
    pairs.truncate(limit);
    pairs
}

/// PMI of a UE using combiner beams `w_set`: the relevant pairs whose UE beam
/// lies in `w_set`, truncated to the `pmi_cap` strongest.
pub fn pmi_report(table: &BeamPairGainTable, w_set: &[usize], cfg: &SelectionConfig) -> Vec<(usize, usize)> {
    let mut w_sorted = w_set.to_vec();
    w_sorted.sort_unstable();
    restricted_components(table, &w_sorted, cfg.rule, cfg.pmi_cap)
}

/// `Bbar^H Sigma Bbar` with `Bbar = conj(V) kron W`.
pub fn effective_covariance(sigma: &CMat, v: &CMat, w_k: &CMat) -> CMat {
    let b = linalg::kron(&v.conjugate(), w_k);
    b.adjoint() * sigma * &b
}

/// `M_UE log2(1 + kappa tr / M_UE)` from a trace value.
pub fn se_bound_from_trace(trace: f64, kappa: f64, m_ue: usize) -> f64 {
    let m = m_ue as f64;
    m * (1.0 + kappa * trace.max(0.0) / m).log2()
}

/// Jensen upper bound on the average single-user SE.
pub fn se_upper_bound(sigma_bar: &CMat, kappa: f64, m_ue: usize) -> f64 {
    se_bound_from_trace(linalg::trace_re(sigma_bar), kappa, m_ue)
}

/// Normalized trace correlation `Tr(A B) / (||A|| ||B||)`; zero if either is zero.
fn correlation(a: &CMat, b: &CMat) -> f64 {
    let den = linalg::frobenius(a) * linalg::frobenius(b);
    if den == 0.0 {
        return 0.0;
    }
    linalg::trace_product_re(a, b) / den
}

/// Generalized correlation matrix distance of UE `k` against all others.
pub fn gcmd(sigma_bars: &[CMat], k: usize) -> Result<f64> {
    let n = sigma_bars.len();
    if n < 2 || k >= n {
        return Err(Error::invalid(format!("gcmd needs K >= 2 and k < K, got K = {n}, k = {k}")));
    }
    if sigma_bars.iter().any(|s| linalg::frobenius(s) == 0.0) {
        return Err(Error::invalid("gcmd is undefined for a zero covariance"));
    }
    let side = sigma_bars[k].shape();
    if sigma_bars.iter().any(|s| s.shape() != side) {
        return Err(Error::invalid("gcmd: covariances differ in size"));
    }
    let sum: f64 = (0..n)
        .filter(|&j| j != k)
        .map(|j| correlation(&sigma_bars[k], &sigma_bars[j]))
        .sum();
    Ok(1.0 - sum / (n - 1) as f64)
}

/// GCMD with the conventions used inside objectives: 1 without other UEs,
/// and zero-valued covariances contribute no correlation.
fn gcmd_tolerant(own: &CMat, others: &[CMat]) -> f64 {
    if others.is_empty() {
        return 1.0;
    }
    let sum: f64 = others.iter().map(|o| correlation(own, o)).sum();
    1.0 - sum / others.len() as f64
}

/// `omega(V) = tau card(col V) / T`.
pub fn overhead_v(m_bs: usize, tau: usize, t_total: usize) -> Result<f64> {
    if t_total == 0 || tau.saturating_mul(m_bs) > t_total {
        return Err(Error::invalid(format!(
            "{m_bs} beams x tau {tau} pilot elements exceed the {t_total}-element frame"
        )));
    }
    Ok(tau as f64 * m_bs as f64 / t_total as f64)
}

/// Overhead of a set of PMI reports.
pub fn overhead_w(
    pmis: &[Vec<(usize, usize)>],
    tau: usize,
    t_total: usize,
    counting: OverheadCounting,
) -> Result<f64> {
    overhead_v(count_pmi(pmis, counting), tau, t_total)
}

fn count_pmi(pmis: &[Vec<(usize, usize)>], counting: OverheadCounting) -> usize {
    match counting {
        OverheadCounting::BsBeams => pmi_union(pmis).len(),
        OverheadCounting::Pairs => {
            let mut pairs: Vec<(usize, usize)> = pmis.iter().flatten().copied().collect();
            pairs.sort_unstable();
            pairs.dedup();
            pairs.len()
        }
    }
}

/// Beams the BS will end up training for these PMIs: the union, raised to the
/// BD minimum for `k` UEs since the BS fills up to it anyway.
fn charged_count(pmis: &[Vec<(usize, usize)>], k: usize, cfg: &SelectionConfig) -> usize {
    let count = count_pmi(pmis, cfg.counting);
    match cfg.counting {
        OverheadCounting::BsBeams => count.max(required_bs_beams(k, cfg.m_ue)),
        OverheadCounting::Pairs => count,
    }
}

/// Decisions already fixed by UEs earlier in the hierarchy.
#[derive(Debug, Clone, Default)]
pub struct SelectionState {
    /// `(UE index, combiner beams)` in decision order.
    pub fixed: Vec<(usize, Vec<usize>)>,
    /// PMI of each fixed UE, aligned with `fixed`.
    pub pmis: Vec<Vec<(usize, usize)>>,
}

impl SelectionState {
    /// `B_fix`: the union of the fixed PMIs.
    pub fn b_fix(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for p in self.pmis.iter().flatten() {
            if !out.contains(p) {
                out.push(*p);
            }
        }
        out
    }

    /// Partial overhead of the fixed PMIs.
    pub fn omega(&self, cfg: &SelectionConfig) -> f64 {
        cfg.omega_of_count(count_pmi(&self.pmis, cfg.counting))
    }

    fn push(&mut self, ue: usize, w: Vec<usize>, pmi: Vec<(usize, usize)>) {
        self.fixed.push((ue, w));
        self.pmis.push(pmi);
    }
}

/// Decentralized objective of UE `k` for combiner `candidate`, given the
/// decisions in `state`. The effective covariances are taken over the partial
/// precoder `[V_k V_{k-1}]` (candidate PMI beams plus fixed beams).
pub fn objective_fk(
    policy: Policy,
    state: &SelectionState,
    candidate: &[usize],
    k: usize,
    domains: &[BeamDomain],
    cfg: &SelectionConfig,
) -> Result<f64> {
    let own = &domains[k];
    check_indices(candidate, own.b_ue)?;
    let pmi = pmi_report(&own.table(), candidate, cfg);
    let mut all_pmis = state.pmis.clone();
    all_pmis.push(pmi);
    let v_union = pmi_union(&all_pmis);
    let trace = own.trace(&v_union, candidate);
    let delta = if policy.uses_gcmd() && !state.fixed.is_empty() && trace > 0.0 {
        let sk = own.effective(&v_union, candidate);
        let others: Vec<CMat> = state
            .fixed
            .iter()
            .map(|(j, wj)| domains[*j].effective(&v_union, wj))
            .collect();
        gcmd_tolerant(&sk, &others)
    } else {
        1.0
    };
    let bound = se_bound_from_trace(trace * delta, cfg.kappa, cfg.m_ue);
    Ok(if policy.uses_overhead() {
        (1.0 - cfg.omega_of_count(charged_count(&all_pmis, domains.len(), cfg))) * bound
    } else {
        bound
    })
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut c: Vec<usize> = (0..m).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..m).rev().find(|&i| c[i] != i + n - m) else {
            return out;
        };
        c[i] += 1;
        for j in i + 1..m {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn check_setup(domains: &[BeamDomain], cfg: &SelectionConfig) -> Result<()> {
    let Some(first) = domains.first() else {
        return Err(Error::invalid("beam selection needs at least one UE"));
    };
    if domains.iter().any(|d| d.b_bs != first.b_bs || d.b_ue != first.b_ue) {
        return Err(Error::invalid("UEs disagree on codebook sizes"));
    }
    if cfg.m_ue == 0 || cfg.m_ue > first.b_ue {
        return Err(Error::invalid(format!(
            "M_UE = {} must lie in 1..={}",
            cfg.m_ue, first.b_ue
        )));
    }
    if cfg.pmi_cap == 0 || cfg.t_total == 0 {
        return Err(Error::invalid("pmi_cap and t_total must be positive"));
    }
    Ok(())
}

/// Minimum number of BS beams for BD to leave every UE a null space.
pub fn required_bs_beams(k: usize, m_ue: usize) -> usize {
    k.saturating_sub(1) * m_ue + 1
}

/// Turn per-UE combiners and PMIs into a full assignment. The BS trains the
/// PMI union; if that is below `(K - 1) M_UE + 1` beams it activates the
/// strongest remaining beams (by best per-UE gain under the chosen combiners),
/// and if a cap is configured it drops the weakest union beams above it.
pub fn finalize_assignment(
    ue_beams: Vec<Vec<usize>>,
    pmi: Vec<Vec<(usize, usize)>>,
    domains: &[BeamDomain],
    cfg: &SelectionConfig,
) -> Result<BeamAssignment> {
    let k = ue_beams.len();
    let b_bs = domains[0].b_bs;
    let need = required_bs_beams(k, cfg.m_ue);
    let cap = cfg.max_bs_beams.unwrap_or(b_bs).min(b_bs);
    if need > cap {
        return Err(Error::InfeasibleAssignment {
            ue: k - 1,
            reason: format!("BD needs {need} BS beams but at most {cap} can be activated"),
        });
    }
    let score = |v: usize| -> f64 {
        domains
            .iter()
            .zip(&ue_beams)
            .map(|(d, w)| d.beam_score(v, w))
            .fold(0.0, f64::max)
    };
    let by_strength = |a: &usize, b: &usize| score(*b).total_cmp(&score(*a)).then(a.cmp(b));

    let mut bs = pmi_union(&pmi);
    let mut dropped = Vec::new();
    if bs.len() > cap {
        bs.sort_by(by_strength);
        dropped = bs.split_off(cap);
        dropped.sort_unstable();
    }
    let mut filled = Vec::new();
    if bs.len() < need {
        let mut spare: Vec<usize> = (0..b_bs).filter(|v| !bs.contains(v)).collect();
        spare.sort_by(by_strength);
        filled = spare[..need - bs.len()].to_vec();
        filled.sort_unstable();
        bs.extend_from_slice(&filled);
    }
    bs.sort_unstable();
    Ok(BeamAssignment { ue_beams, bs_beams: bs, pmi, filled, dropped })
}

/// Independent per-UE maximization of the SE bound over the UE's own PMI beams.
pub fn select_uncoordinated(domains: &[BeamDomain], cfg: &SelectionConfig) -> Result<BeamAssignment> {
    check_setup(domains, cfg)?;
    let cands = combinations(domains[0].b_ue, cfg.m_ue);
    let mut ue_beams = Vec::with_capacity(domains.len());
    let mut pmis = Vec::with_capacity(domains.len());
    for d in domains {
        let table = d.table();
        let mut best: Option<(f64, &Vec<usize>, Vec<(usize, usize)>)> = None;
        for w in &cands {
            let pmi = pmi_report(&table, w, cfg);
            let v = pmi_union(std::slice::from_ref(&pmi));
            let val = se_bound_from_trace(d.trace(&v, w), cfg.kappa, cfg.m_ue);
            if best.as_ref().is_none_or(|b| val > b.0) {
                best = Some((val, w, pmi));
            }
        }
        let (_, w, pmi) = best.expect("at least one candidate");
        ue_beams.push(w.clone());
        pmis.push(pmi);
    }
    finalize_assignment(ue_beams, pmis, domains, cfg)
}

/// Hierarchical (decentralized) selection: UEs decide in `order`, each
/// maximizing its term of the policy objective given earlier decisions.
pub fn select_hierarchical(
    policy: Policy,
    order: &[usize],
    domains: &[BeamDomain],
    cfg: &SelectionConfig,
) -> Result<BeamAssignment> {
    check_setup(domains, cfg)?;
    let k_ues = domains.len();
    let mut seen = vec![false; k_ues];
    if order.len() != k_ues || order.iter().any(|&k| k >= k_ues || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::invalid("order must be a permutation of the UE indices"));
    }
    let cands = combinations(domains[0].b_ue, cfg.m_ue);
    let mut state = SelectionState::default();
    let mut ue_beams = vec![Vec::new(); k_ues];
    let mut pmis = vec![Vec::new(); k_ues];
    for &k in order {
        let mut best: Option<(f64, &Vec<usize>)> = None;
        for w in &cands {
            let val = objective_fk(policy, &state, w, k, domains, cfg)?;
            if best.is_none_or(|b| val > b.0) {
                best = Some((val, w));
            }
        }
        let w = best.expect("at least one candidate").1.clone();
        let pmi = pmi_report(&domains[k].table(), &w, cfg);
        state.push(k, w.clone(), pmi.clone());
        ue_beams[k] = w;
        pmis[k] = pmi;
    }
    finalize_assignment(ue_beams, pmis, domains, cfg)
}

/// Effective covariances of all UEs under an assignment's BS beams.
pub fn assignment_covariances(a: &BeamAssignment, domains: &[BeamDomain]) -> Vec<CMat> {
    domains
        .iter()
        .zip(&a.ue_beams)
        .map(|(d, w)| d.effective(&a.bs_beams, w))
        .collect()
}

/// Per-UE GCMD under an assignment (1 for a single UE, tolerant of zero covariances).
pub fn assignment_gcmd(a: &BeamAssignment, domains: &[BeamDomain]) -> Vec<f64> {
    let covs = assignment_covariances(a, domains);
    (0..covs.len())
        .map(|k| {
            let others: Vec<CMat> = (0..covs.len()).filter(|&j| j != k).map(|j| covs[j].clone()).collect();
            gcmd_tolerant(&covs[k], &others)
        })
        .collect()
}

/// Training overhead of an assignment.
pub fn assignment_overhead(a: &BeamAssignment, cfg: &SelectionConfig) -> f64 {
    let count = match cfg.counting {
        OverheadCounting::BsBeams => a.bs_beams.len(),
        OverheadCounting::Pairs => {
            let kept: Vec<Vec<(usize, usize)>> = a
                .pmi
                .iter()
                .map(|p| p.iter().copied().filter(|(v, _)| a.bs_beams.contains(v)).collect())
                .collect();
            count_pmi(&kept, OverheadCounting::Pairs) + a.filled.len()
        }
    };
    cfg.omega_of_count(count)
}

/// Centralized objective of a policy evaluated on a complete assignment.
pub fn full_objective(
    policy: Policy,
    a: &BeamAssignment,
    domains: &[BeamDomain],
    cfg: &SelectionConfig,
) -> f64 {
    if policy == Policy::P1 {
        return domains
            .iter()
            .zip(a.ue_beams.iter().zip(&a.pmi))
            .map(|(d, (w, p))| {
                let v = pmi_union(std::slice::from_ref(p));
                se_bound_from_trace(d.trace(&v, w), cfg.kappa, cfg.m_ue)
            })
            .sum();
    }
    let delta = if policy.uses_gcmd() {
        assignment_gcmd(a, domains)
    } else {
        vec![1.0; domains.len()]
    };
    let sum: f64 = domains
        .iter()
        .zip(&a.ue_beams)
        .zip(&delta)
        .map(|((d, w), dk)| se_bound_from_trace(d.trace(&a.bs_beams, w) * dk, cfg.kappa, cfg.m_ue))
        .sum();
    if policy.uses_overhead() {
        (1.0 - assignment_overhead(a, cfg)) * sum
    } else {
        sum
    }
}

fn binomial(n: usize, m: usize) -> u128 {
    if m > n {
        return 0;
    }
    let m = m.min(n - m);
    (0..m).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exhaustive maximization of [`full_objective`] over all combiner choices.
/// Ties keep the first combination in lexicographic order.
pub fn brute_force_central(
    policy: Policy,
    domains: &[BeamDomain],
    cfg: &SelectionConfig,
    cap: u128,
) -> Result<BeamAssignment> {
    check_setup(domains, cfg)?;
    let k_ues = domains.len();
    let per_ue = binomial(domains[0].b_ue, cfg.m_ue);
    let size = (0..k_ues).try_fold(1u128, |acc, _| acc.checked_mul(per_ue)).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::Capacity { size, cap });
    }
    let cands = combinations(domains[0].b_ue, cfg.m_ue);
    let tables: Vec<BeamPairGainTable> = domains.iter().map(|d| d.table()).collect();
    let reports: Vec<Vec<Vec<(usize, usize)>>> = tables
        .iter()
        .map(|t| cands.iter().map(|w| pmi_report(t, w, cfg)).collect())
        .collect();
    let mut pick = vec![0usize; k_ues];
    let mut best: Option<(f64, BeamAssignment)> = None;
    loop {
        let ue_beams = pick.iter().map(|&i| cands[i].clone()).collect();
        let pmi = pick.iter().enumerate().map(|(k, &i)| reports[k][i].clone()).collect();
        let a = finalize_assignment(ue_beams, pmi, domains, cfg)?;
        let val = full_objective(policy, &a, domains, cfg);
        if best.as_ref().is_none_or(|b| val > b.0) {
            best = Some((val, a));
        }
        // Odometer with UE 0 as the most significant digit.
        let Some(pos) = (0..k_ues).rev().find(|&k| pick[k] + 1 < cands.len()) else {
            break;
        };
        pick[pos] += 1;
        for p in pick.iter_mut().skip(pos + 1) {
            *p = 0;
        }
    }
    Ok(best.expect("search space is nonempty").1)
}

/// Run one policy. P1 is the uncoordinated selection; P2-P4 are hierarchical.
pub fn select(
    policy: Policy,
    order: &[usize],
    domains: &[BeamDomain],
    cfg: &SelectionConfig,
) -> Result<BeamAssignment> {
    match policy {
        Policy::P1 => select_uncoordinated(domains, cfg),
        _ => select_hierarchical(policy, order, domains, cfg),
    }
}
