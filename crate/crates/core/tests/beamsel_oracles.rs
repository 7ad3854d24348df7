mod common;

use common::{rel_fro, rng, sample_covariance, vec_cols};
use gobsim::beamsel::{self, BeamDomain, Policy, SelectionConfig};
use gobsim::channel::{self, ArrayGeometry, ClusterConfig, ScattererPool, Scenario};
use gobsim::codebook::{self, Codebook, Side};
use gobsim::linalg::CMat;
use gobsim::precoding::{self, RANK_TOL};
use gobsim::Error;
use num_complex::Complex64;

fn diag(v: &[f64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| if i == j { Complex64::new(v[i], 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// Beam domain with a diagonal beam covariance given as a `B_BS x B_UE` gain grid.
fn diag_domain(grid: &[&[f64]]) -> BeamDomain {
    let b_bs = grid.len();
    let b_ue = grid[0].len();
    let flat: Vec<f64> = grid.iter().flat_map(|row| row.iter().copied()).collect();
    BeamDomain::from_beam_covariance(diag(&flat), b_bs, b_ue)
}

fn cluster_stats(n_bs: usize, n_ue: usize, seed: u64) -> channel::ChannelStats {
    let mut r = rng(seed);
    let geo = channel::place_users(Scenario::Random, 1, 200.0, 10.0, 120.0, &mut r).unwrap();
    let cfg = ClusterConfig { aod_spread_deg: 4.0, ..Default::default() };
    let cs = channel::draw_clusters(&geo, 0, &cfg, &mut ScattererPool::default(), &mut r).unwrap();
    channel::covariance_from_clusters(&cs, &ArrayGeometry::ula(n_bs), &ArrayGeometry::ula(n_ue)).unwrap()
}

#[test]
fn effective_covariance_matches_sample_covariance() {
    // 2% relative Frobenius error at 1e5 realizations.
    let st = cluster_stats(16, 4, 3);
    let cb_bs = Codebook::dft(16, 16, Side::Bs).unwrap();
    let cb_ue = Codebook::dft(4, 4, Side::Ue).unwrap();
    let dom = BeamDomain::new(&st, &cb_bs, &cb_ue).unwrap();
    let table = dom.table();
    let best = beamsel::relevant_components(&table, beamsel::RelevanceRule::TopN(1))[0];
    let v_idx = vec![best.0, (best.0 + 1) % 16, (best.0 + 15) % 16];
    let w_idx = vec![best.1, (best.1 + 1) % 4];
    let v = codebook::assemble_precoder(&cb_bs, &v_idx).unwrap();
    let w = cb_ue.assemble(&w_idx).unwrap();
    let closed = beamsel::effective_covariance(&st.sigma, &v, &w);
    assert!(rel_fro(&dom.effective(&v_idx, &w_idx), &closed) < 1e-10);

    let mut r = rng(4);
    let samples: Vec<_> = (0..100_000)
        .map(|_| vec_cols(&(w.adjoint() * channel::realize_channel(&st, &mut r) * &v)))
        .collect();
    let err = rel_fro(&sample_covariance(&samples), &closed);
    assert!(err < 0.02, "relative error {err}");
}

#[test]
fn jensen_bound_dominates_svd_se() {
    let st = cluster_stats(64, 4, 7);
    let cb_bs = Codebook::dft(64, 64, Side::Bs).unwrap();
    let cb_ue = Codebook::dft(4, 4, Side::Ue).unwrap();
    let dom = BeamDomain::new(&st, &cb_bs, &cb_ue).unwrap();
    let top = beamsel::relevant_components(&dom.table(), beamsel::RelevanceRule::TopN(64 * 4));
    let mut v_idx: Vec<usize> = Vec::new();
    for (v, _) in &top {
        if !v_idx.contains(v) && v_idx.len() < 5 {
            v_idx.push(*v);
        }
    }
    let w_idx = vec![0, 1, 2];
    let v = codebook::assemble_precoder(&cb_bs, &v_idx).unwrap();
    let w = cb_ue.assemble(&w_idx).unwrap();
    let sigma_bar = dom.effective(&v_idx, &w_idx);
    let mut r = rng(8);
    let draws: Vec<CMat> = (0..1000)
        .map(|_| w.adjoint() * channel::realize_channel(&st, &mut r) * &v)
        .collect();
    for kappa in [0.1, 1.0, 10.0, 100.0] {
        let mc: f64 = draws
            .iter()
            .map(|h| {
                let bd = precoding::block_diagonalize(std::slice::from_ref(h), RANK_TOL).unwrap();
                precoding::se_bd(&bd, kappa)[0]
            })
            .sum::<f64>()
            / draws.len() as f64;
        let bound = beamsel::se_upper_bound(&sigma_bar, kappa, 3);
        assert!(bound >= mc, "kappa {kappa}: bound {bound} < {mc}");
    }
}

#[test]
fn gcmd_of_diagonal_covariances() {
    let s = vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0]), diag(&[1.0, 1.0])];
    let d3 = beamsel::gcmd(&s, 2).unwrap();
    assert!((d3 - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
    assert!(matches!(beamsel::gcmd(&s[..1], 0), Err(Error::InvalidArgument(_))));
}

#[test]
fn shared_beams_cut_the_bs_beam_count() {
    // UE 0 sees BS beams 0-2 through its UE beam 0. UE 1 sees beams 0, 3, 4
    // strongly through UE beam 0 and beams 0-2 more weakly through UE beam 1.
    let ue0 = diag_domain(&[&[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
    let ue1 = diag_domain(&[&[1.0, 0.6], &[0.0, 0.6], &[0.0, 0.6], &[1.0, 0.0], &[1.0, 0.0]]);
    let domains = vec![ue0, ue1];
    let cfg = SelectionConfig::new(1, 3, 10.0, 1, 10);

    let p1 = beamsel::select(Policy::P1, &[0, 1], &domains, &cfg).unwrap();
    assert_eq!(p1.ue_beams, vec![vec![0], vec![0]]);
    assert_eq!(p1.m_bs(), 5);
    assert!(p1.filled.is_empty());

    let p3 = beamsel::select(Policy::P3, &[0, 1], &domains, &cfg).unwrap();
    assert_eq!(p3.ue_beams, vec![vec![0], vec![1]]);
    assert_eq!(p3.bs_beams, vec![0, 1, 2]);
    let w1 = beamsel::assignment_overhead(&p1, &cfg);
    let w3 = beamsel::assignment_overhead(&p3, &cfg);
    assert!((w3 / w1 - 3.0 / 5.0).abs() < 1e-12);
}

#[test]
fn identical_pmis_cost_the_same_as_one() {
    let p = vec![(3, 0), (4, 1)];
    let one = beamsel::overhead_w(&[p.clone()], 2, 100, beamsel::OverheadCounting::BsBeams).unwrap();
    let two = beamsel::overhead_w(&[p.clone(), p], 2, 100, beamsel::OverheadCounting::BsBeams).unwrap();
    assert_eq!(one, two);
    let disjoint = beamsel::overhead_w(
        &[vec![(0, 0), (1, 0)], vec![(2, 1), (3, 1), (4, 0)]],
        1,
        100,
        beamsel::OverheadCounting::BsBeams,
    )
    .unwrap();
    assert!((disjoint - 0.05).abs() < 1e-15);
}

/// Straightforward recomputation of the P4 objective for an assignment.
fn p4_by_hand(a: &codebook::BeamAssignment, domains: &[BeamDomain], cfg: &SelectionConfig) -> f64 {
    let covs: Vec<CMat> = domains
        .iter()
        .zip(&a.ue_beams)
        .map(|(d, w)| {
            let idx: Vec<usize> = a.bs_beams.iter().flat_map(|&v| w.iter().map(move |&j| v * d.b_ue + j)).collect();
            CMat::from_fn(idx.len(), idx.len(), |r, c| d.sigma_b[(idx[r], idx[c])])
        })
        .collect();
    let fro = |m: &CMat| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let k = covs.len();
    let mut total = 0.0;
    for i in 0..k {
        let mut corr = 0.0;
        for j in 0..k {
            if j != i {
                let tr: f64 = (0..covs[i].nrows())
                    .flat_map(|r| (0..covs[i].ncols()).map(move |c| (r, c)))
                    .map(|(r, c)| (covs[i][(r, c)] * covs[j][(c, r)]).re)
                    .sum();
                corr += tr / (fro(&covs[i]) * fro(&covs[j]));
            }
        }
        let delta = 1.0 - corr / (k - 1) as f64;
        let tr: f64 = (0..covs[i].nrows()).map(|r| covs[i][(r, r)].re).sum();
        let m = cfg.m_ue as f64;
        total += m * (1.0 + cfg.kappa * tr * delta / m).log2();
    }
    let omega = cfg.tau as f64 * a.m_bs() as f64 / cfg.t_total as f64;
    (1.0 - omega) * total
}

#[test]
fn p4_objective_matches_formula() {
    for seed in 0..20 {
        let (domains, cfg) = gobsim::harness::oracle::small_instance(seed).unwrap();
        let a = beamsel::select(Policy::P4, &[0, 1], &domains, &cfg).unwrap();
        let lib = beamsel::full_objective(Policy::P4, &a, &domains, &cfg);
        let hand = p4_by_hand(&a, &domains, &cfg);
        assert!((lib - hand).abs() <= 1e-12 * hand.abs().max(1.0), "seed {seed}: {lib} vs {hand}");
    }
}

#[test]
fn uncoordinated_selection_matches_exhaustive_search() {
    for seed in 0..20 {
        let st = cluster_stats(8, 4, 100 + seed);
        let dom = BeamDomain::new(&st, &Codebook::dft(8, 8, Side::Bs).unwrap(), &Codebook::dft(4, 4, Side::Ue).unwrap())
            .unwrap();
        let cfg = SelectionConfig::new(2, 4, 10.0, 1, 100);
        let a = beamsel::select_uncoordinated(std::slice::from_ref(&dom), &cfg).unwrap();
        let mut best = (f64::NEG_INFINITY, vec![]);
        for w0 in 0..4 {
            for w1 in w0 + 1..4 {
                let mut pairs: Vec<(f64, usize, usize)> = (0..8)
                    .flat_map(|v| [w0, w1].map(|w| (dom.gain(v, w), v, w)))
                    .collect();
                pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
                let mut vs: Vec<usize> = pairs[..4].iter().map(|p| p.1).collect();
                vs.sort_unstable();
                vs.dedup();
                let tr: f64 = vs.iter().map(|&v| dom.gain(v, w0) + dom.gain(v, w1)).sum();
                let val = 2.0 * (1.0 + 10.0 * tr / 2.0).log2();
                if val > best.0 {
                    best = (val, vec![w0, w1]);
                }
            }
        }
        assert_eq!(a.ue_beams[0], best.1, "seed {seed}");
    }
}

#[test]
fn orthogonal_rank_one_users_pick_their_aligned_beams() {
    let ue0 = diag_domain(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
    let ue1 = diag_domain(&[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]);
    let domains = vec![ue0, ue1];
    let cfg = SelectionConfig::new(1, 1, 10.0, 1, 100);
    let a = beamsel::brute_force_central(Policy::P2, &domains, &cfg, beamsel::BRUTE_FORCE_CAP).unwrap();
    assert_eq!(a.ue_beams, vec![vec![0], vec![1]]);
    assert_eq!(a.bs_beams, vec![0, 2]);
    for d in beamsel::assignment_gcmd(&a, &domains) {
        assert!((d - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hierarchical_never_beats_the_centralized_optimum() {
    for seed in 0..50 {
        let (domains, cfg) = gobsim::harness::oracle::small_instance(1000 + seed).unwrap();
        for policy in [Policy::P2, Policy::P3, Policy::P4] {
            let h = beamsel::select_hierarchical(policy, &[0, 1], &domains, &cfg).unwrap();
            let b = beamsel::brute_force_central(policy, &domains, &cfg, beamsel::BRUTE_FORCE_CAP).unwrap();
            let (vh, vb) = (
                beamsel::full_objective(policy, &h, &domains, &cfg),
                beamsel::full_objective(policy, &b, &domains, &cfg),
            );
            assert!(vh <= vb + 1e-12 * vb.abs(), "seed {seed} {policy}: {vh} > {vb}");
        }
    }
}

#[test]
fn brute_force_respects_its_cap() {
    let (domains, cfg) = gobsim::harness::oracle::small_instance(3).unwrap();
    let err = beamsel::brute_force_central(Policy::P4, &domains, &cfg, 1).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }));
}

#[test]
fn single_user_coordination_degenerates_to_uncoordinated() {
    for seed in 0..20 {
        let st = cluster_stats(16, 4, 200 + seed);
        let dom = BeamDomain::new(&st, &Codebook::dft(16, 16, Side::Bs).unwrap(), &Codebook::dft(4, 4, Side::Ue).unwrap())
            .unwrap();
        let cfg = SelectionConfig::new(3, 4, 10.0, 10, 1000);
        let domains = std::slice::from_ref(&dom);
        let u = beamsel::select_uncoordinated(domains, &cfg).unwrap();
        let cards: Vec<usize> = beamsel::combinations(4, 3)
            .iter()
            .map(|w| codebook::pmi_union(&[beamsel::pmi_report(&dom.table(), w, &cfg)]).len())
            .collect();
        if cards.iter().all(|&c| c == cards[0]) {
            let h = beamsel::select_hierarchical(Policy::P3, &[0], domains, &cfg).unwrap();
            assert_eq!(h.ue_beams, u.ue_beams, "seed {seed}");
        }
    }
}

#[test]
fn fill_makes_every_assignment_bd_feasible() {
    let mut r = rng(9);
    let cb_bs = Codebook::dft(64, 64, Side::Bs).unwrap();
    let cb_ue = Codebook::dft(4, 4, Side::Ue).unwrap();
    let geo = channel::place_users(Scenario::CloselyLocated, 7, 200.0, 10.0, 120.0, &mut r).unwrap();
    let cfg_ch = ClusterConfig { shared_cluster_probability: 0.9, ..Default::default() };
    let mut pool = ScattererPool::default();
    let domains: Vec<BeamDomain> = (0..7)
        .map(|k| {
            let cs = channel::draw_clusters(&geo, k, &cfg_ch, &mut pool, &mut r).unwrap();
            let st = channel::covariance_from_clusters(&cs, &ArrayGeometry::ula(64), &ArrayGeometry::ula(4)).unwrap();
            BeamDomain::new(&st, &cb_bs, &cb_ue).unwrap()
        })
        .collect();
    let cfg = SelectionConfig::new(3, 4, 12.6, 1259, 63_000);
    for policy in Policy::ALL {
        let a = beamsel::select(policy, &[3, 1, 4, 0, 6, 5, 2], &domains, &cfg).unwrap();
        assert!(a.feasible());
        assert_eq!(a.m_bs(), a.bs_beams.len());
        assert!(a.bs_beams.windows(2).all(|p| p[0] < p[1]));
        for (k, pmi) in a.pmi.iter().enumerate() {
            assert!(pmi.len() <= 4);
            assert!(pmi.iter().all(|(v, w)| a.ue_beams[k].contains(w) && a.bs_beams.contains(v)));
        }
    }
}
