//! Cross-module checks at sizes beyond the in-module unit tests, holding the
//! structured fast paths against the independent dense baselines.

use gpfast::tolerances::{CHOL_RECONSTRUCT_REL, DENSITY_PATH_AGREEMENT_ABS, TOEPLITZ_LOG_DET_REL};
use gpfast::{
    baseline_invert, baseline_log_det, log_dmvnorm, se_covariance, se_covariance_toeplitz,
    Covariance, MvnParams, RngState, SeKernelParams, TimeGrid,
};

fn se_setup(n: usize) -> (gpfast::SymPdMatrix, gpfast::SymToeplitz) {
    let grid = TimeGrid::unit(n).unwrap();
    let params = SeKernelParams::new(1.0, 1.0).unwrap();
    let dense = se_covariance(&grid, &params);
    let toep = se_covariance_toeplitz(&grid, &params).unwrap();
    (dense, toep)
}

#[test]
fn trench_matches_gauss_jordan_inverse_at_n200() {
    let (dense, toep) = se_setup(200);
    let fast = toep.trench_invert().unwrap();
    let slow = baseline_invert(&dense).unwrap();
    let diff = fast.to_matrix().max_abs_diff(&slow.to_matrix());
    assert!(diff < 1e-8, "max inverse disagreement {diff}");
}

#[test]
fn toeplitz_log_det_matches_lu_at_larger_sizes() {
    for n in [30, 200] {
        let (dense, toep) = se_setup(n);
        let fast = toep.log_det().unwrap();
        let slow = baseline_log_det(&dense).unwrap();
        assert!(
            (fast - slow).abs() <= TOEPLITZ_LOG_DET_REL * slow.abs(),
            "n={n}: {fast} vs {slow}"
        );
    }
}

#[test]
fn density_paths_agree_at_n200() {
    let (dense, toep) = se_setup(200);
    let mu = vec![0.0; 200];
    let dense_params = MvnParams::new(mu.clone(), Covariance::Dense(dense)).unwrap();
    let toep_params = MvnParams::new(mu, Covariance::Toeplitz(toep)).unwrap();
    let mut rng = RngState::from_seed(31);
    for _ in 0..5 {
        let x = rng.standard_normal_vec(200);
        let a = log_dmvnorm(&x, &dense_params).unwrap();
        let b = log_dmvnorm(&x, &toep_params).unwrap();
        assert!((a - b).abs() < DENSITY_PATH_AGREEMENT_ABS, "{a} vs {b}");
    }
}

#[test]
fn cholesky_reconstructs_se_matrix_at_n50() {
    let (dense, _) = se_setup(50);
    let factor = dense.cholesky().unwrap();
    let rebuilt = factor.reconstruct();
    let diff = rebuilt.to_matrix().max_abs_diff(&dense.to_matrix());
    let scale = (0..50).map(|i| dense.get(i, i)).fold(0.0f64, f64::max);
    assert!(
        diff <= CHOL_RECONSTRUCT_REL * scale,
        "round-trip error {diff}"
    );
}
