mod common;

use common::{random_psd_rank, rng};
use gobsim::beamsel::{self, BeamDomain, OverheadCounting, Policy, SelectionConfig};
use gobsim::codebook;
use gobsim::linalg::{self, CMat};
use gobsim::precoding::{self, RANK_TOL};
use gobsim::training;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_of_product_is_kronecker(seed in any::<u64>(), m in 1usize..5, n in 1usize..5, p in 1usize..4, q in 1usize..4) {
        let mut r = rng(seed);
        let h = linalg::complex_gaussian_matrix(m, n, &mut r);
        let v = linalg::complex_gaussian_matrix(n, p, &mut r);
        let w = linalg::complex_gaussian_matrix(m, q, &mut r);
        let lhs = linalg::vec_of(&(w.adjoint() * &h * &v));
        let rhs = linalg::kron(&v.transpose(), &w.adjoint()) * linalg::vec_of(&h);
        prop_assert!((lhs - &rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn quantizer_error_is_within_half_a_step(seed in any::<u64>(), q in 1u32..20, rows in 1usize..5, cols in 1usize..5) {
        let m = linalg::complex_gaussian_matrix(rows, cols, &mut rng(seed));
        let a = m.iter().fold(0.0f64, |acc, z| acc.max(z.re.abs()).max(z.im.abs()));
        let qm = training::quantize_feedback(&m, q).unwrap();
        let half_step = a / 2f64.powi(q as i32);
        for (x, y) in m.iter().zip(qm.iter()) {
            prop_assert!((x.re - y.re).abs() <= half_step + 1e-14 * a);
            prop_assert!((x.im - y.im).abs() <= half_step + 1e-14 * a);
        }
    }

    #[test]
    fn gcmd_lies_in_unit_interval(seed in any::<u64>(), k in 2usize..5, n in 1usize..6, rank in 1usize..6) {
        let mut r = rng(seed);
        let covs: Vec<CMat> = (0..k).map(|_| random_psd_rank(n, rank.min(n), &mut r)).collect();
        for i in 0..k {
            let d = beamsel::gcmd(&covs, i).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        }
    }

    #[test]
    fn bd_nulls_interference_when_dimensions_allow(seed in any::<u64>(), k in 1usize..5, m_ue in 1usize..4, extra in 1usize..4) {
        let m_bs = (k - 1) * m_ue + extra;
        let mut r = rng(seed);
        let h: Vec<CMat> = (0..k).map(|_| linalg::complex_gaussian_matrix(m_ue, m_bs, &mut r)).collect();
        let bd = precoding::block_diagonalize(&h, RANK_TOL).unwrap();
        prop_assert!(precoding::bd_leakage(&h, &bd) < 1e-8);
        for (s, v) in bd.streams.iter().zip(&bd.v_bar) {
            prop_assert!(*s >= 1 && *s <= m_ue.min(extra));
            prop_assert!((v.adjoint() * v - linalg::identity(*s)).norm() < 1e-9);
        }
    }

    #[test]
    fn zadoff_chu_rows_are_orthonormal(m in 1usize..12, pad in 0usize..8, root_pick in 0usize..100) {
        let tau = m + pad;
        let roots: Vec<usize> = (1..tau.max(2)).filter(|u| gcd(*u, tau) == 1).collect();
        let s = training::pilot_matrix(m, tau, roots[root_pick % roots.len()]).unwrap();
        prop_assert!((&s * s.adjoint() - linalg::identity(m)).norm() < 1e-10);
    }

    #[test]
    fn overhead_is_monotone_and_idempotent(
        pmis in prop::collection::vec(prop::collection::vec((0usize..16, 0usize..4), 0..5), 1..6),
        extra in prop::collection::vec((0usize..16, 0usize..4), 0..5),
    ) {
        for counting in [OverheadCounting::BsBeams, OverheadCounting::Pairs] {
            let base = beamsel::overhead_w(&pmis, 1, 100, counting).unwrap();
            let mut more = pmis.clone();
            more.push(extra.clone());
            prop_assert!(beamsel::overhead_w(&more, 1, 100, counting).unwrap() >= base);
            let mut twice = pmis.clone();
            twice.extend(pmis.iter().cloned());
            prop_assert_eq!(beamsel::overhead_w(&twice, 1, 100, counting).unwrap(), base);
        }
        let union = codebook::pmi_union(&pmis).len();
        prop_assert_eq!(
            beamsel::overhead_w(&pmis, 3, 1000, OverheadCounting::BsBeams).unwrap(),
            beamsel::overhead_v(union, 3, 1000).unwrap()
        );
    }

    #[test]
    fn effective_covariances_are_hermitian_psd(seed in any::<u64>(), nv in 1usize..4, nw in 1usize..3) {
        let mut r = rng(seed);
        let sigma = random_psd_rank(16, 5, &mut r);
        let v = linalg::complex_gaussian_matrix(4, nv, &mut r);
        let w = linalg::complex_gaussian_matrix(4, nw, &mut r);
        let e = beamsel::effective_covariance(&sigma, &v, &w);
        prop_assert!(linalg::hermitian_defect(&e) < 1e-10);
        let (vals, _) = linalg::hermitian_eigen(&e);
        prop_assert!(vals.iter().all(|&l| l > -1e-9 * vals[0].abs().max(1.0)));
    }

    #[test]
    fn every_policy_yields_a_feasible_sorted_assignment(seed in any::<u64>(), k in 1usize..5, policy_pick in 0usize..4) {
        let mut r = rng(seed);
        let (b_bs, b_ue, m_ue) = (12, 3, 2);
        let domains: Vec<BeamDomain> = (0..k)
            .map(|_| BeamDomain::from_beam_covariance(random_psd_rank(b_bs * b_ue, 3, &mut r), b_bs, b_ue))
            .collect();
        let cfg = SelectionConfig::new(m_ue, 4, 10.0, 2, 200);
        let order: Vec<usize> = (0..k).rev().collect();
        let policy = Policy::ALL[policy_pick];
        let a = beamsel::select(policy, &order, &domains, &cfg).unwrap();
        prop_assert!(a.feasible());
        prop_assert!(a.bs_beams.windows(2).all(|p| p[0] < p[1]));
        prop_assert_eq!(a.m_bs(), (beamsel::required_bs_beams(k, m_ue)).max(codebook::pmi_union(&a.pmi).len()));
        for (w, pmi) in a.ue_beams.iter().zip(&a.pmi) {
            prop_assert_eq!(w.len(), m_ue);
            prop_assert!(pmi.len() <= 4);
            prop_assert!(pmi.iter().all(|(_, wi)| w.contains(wi)));
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}
