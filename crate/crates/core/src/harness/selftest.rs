//! Quick invariant checks runnable from the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beamsel::{self, OverheadCounting};
use crate::linalg::{self, CMat};
use crate::precoding::{self, RANK_TOL};
use crate::training;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check { name, passed: worst < tol, detail: format!("worst {worst:.3e} (tolerance {tol:.0e})") }
}

fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = linalg::complex_gaussian_matrix(n, n, rng);
    &g * g.adjoint()
}

/// Run all checks with `instances` random trials each.
pub fn run(instances: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..instances {
        let h = linalg::complex_gaussian_matrix(4, 6, &mut rng);
        let v = linalg::complex_gaussian_matrix(6, 3, &mut rng);
        let w = linalg::complex_gaussian_matrix(4, 2, &mut rng);
        let lhs = linalg::vec_of(&(w.adjoint() * &h * &v));
        let rhs = linalg::kron(&v.transpose(), &w.adjoint()) * linalg::vec_of(&h);
        worst = worst.max((lhs - &rhs).norm() / rhs.norm());
    }
    out.push(check("kronecker vec identity", worst, 1e-12));

    let mut worst = 0.0f64;
    for _ in 0..instances {
        let (m_bs, m_ue) = (3, 2);
        let tau = 5;
        let s = training::pilot_matrix(m_bs, tau, 1).expect("valid pilot");
        let w = linalg::complex_gaussian_matrix(4, m_ue, &mut rng);
        let sigma = random_psd(m_bs * m_ue, &mut rng);
        let kappa = 10f64.powf(rng.random_range(-1.0..2.0));
        let e = training::lmmse_error_covariance(&sigma, &s, &w, kappa).expect("error covariance");
        let a = training::pilot_operator(&s, m_ue);
        let g = training::noise_operator(tau, &w);
        let inner = (&a * &sigma * a.adjoint()).scale(kappa) + &g * g.adjoint();
        let direct = &sigma - (&sigma * a.adjoint() * linalg::hpd_inverse(&inner).expect("pd") * &a * &sigma).scale(kappa);
        worst = worst.max(linalg::rel_diff(&e, &direct));
    }
    out.push(check("error covariance two forms", worst, 1e-8));

    let mut worst_leak = 0.0f64;
    let mut worst_se = 0.0f64;
    for _ in 0..instances {
        let h: Vec<CMat> = (0..3).map(|_| linalg::complex_gaussian_matrix(2, 8, &mut rng)).collect();
        let bd = precoding::block_diagonalize(&h, RANK_TOL).expect("feasible");
        worst_leak = worst_leak.max(precoding::bd_leakage(&h, &bd));
        let eye = vec![linalg::identity(2); 3];
        let a = precoding::se_bd(&bd, 5.0);
        let b = precoding::se_general(&h, &eye, &bd.v_bar, &bd.w_bar, 5.0, 1.0).expect("se");
        for (x, y) in a.iter().zip(&b) {
            worst_se = worst_se.max((x - y).abs() / x.abs().max(1e-300));
        }
    }
    out.push(check("BD interference nulling", worst_leak, 1e-8));
    out.push(check("BD SE equals general SE", worst_se, 1e-8));

    let mut worst = 0.0f64;
    for _ in 0..instances {
        let covs: Vec<CMat> = (0..3).map(|_| random_psd(4, &mut rng)).collect();
        for k in 0..3 {
            let d = beamsel::gcmd(&covs, k).expect("gcmd");
            worst = worst.max((-d).max(d - 1.0));
        }
    }
    out.push(Check { name: "GCMD in [0, 1]", passed: worst <= 1e-12, detail: format!("worst excursion {worst:.3e}") });

    let mut mismatch = 0usize;
    for _ in 0..instances {
        let pmis: Vec<Vec<(usize, usize)>> = (0..3)
            .map(|_| (0..4).map(|_| (rng.random_range(0..8), rng.random_range(0..4))).collect())
            .collect();
        let union = crate::codebook::pmi_union(&pmis).len();
        let a = beamsel::overhead_w(&pmis, 3, 1000, OverheadCounting::BsBeams).expect("omega");
        let b = beamsel::overhead_v(union, 3, 1000).expect("omega");
        mismatch += usize::from(a != b);
    }
    out.push(Check {
        name: "overhead definitions agree",
        passed: mismatch == 0,
        detail: format!("{mismatch} mismatches"),
    });
    out
}
