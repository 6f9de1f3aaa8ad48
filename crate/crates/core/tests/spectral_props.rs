//! Spectral behaviour of kernel matrices on grid designs, up to n = 4900.

use std::sync::OnceLock;

use lowrank_kriging::design::{default_raster_resolution, voronoi_summary};
use lowrank_kriging::spectral::{
    assemble_covariance, continuous_spectrum, dense_eigen, dense_eigenvalues, quadrature_nodes,
    tail_sums, truncated_eigen, KernelOperator, TailBoundConstants, TruncatedParams,
};
use lowrank_kriging::{grid_design, random_design, Domain, KernelSpec};
use proptest::prelude::*;

fn grid_spectrum(spec: &KernelSpec, m: usize) -> Vec<f64> {
    let g = grid_design(m, &Domain::unit_square()).unwrap();
    let v = assemble_covariance(spec, &g).unwrap();
    dense_eigenvalues(v.as_ref())
        .unwrap()
        .eigenvalues()
        .to_vec()
}

fn exponential_4900() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| grid_spectrum(&KernelSpec::exponential(0.25).unwrap(), 70))
}

#[test]
fn discrete_spectrum_scaled_by_n_tracks_the_continuous_one() {
    let k1 = KernelSpec::exponential(0.25).unwrap();
    let discrete = exponential_4900();
    let cont = continuous_spectrum(&k1, &Domain::unit_square(), 2500).unwrap();
    for (i, (l, c)) in discrete.iter().zip(&cont.eigenvalues).take(20).enumerate() {
        let ratio = l / 4900.0 / c;
        assert!((ratio - 1.0).abs() <= 0.05, "i = {}: ratio {ratio}", i + 1);
    }
}

#[test]
fn exponential_tail_decays_at_least_like_the_smoothness_rate() {
    // -(2 nu / d + 1) + 0.25 with nu = 1/2, d = 2
    let threshold = -(2.0 * 0.5 / 2.0 + 1.0) + 0.25;
    let lam = exponential_4900();
    let pts: Vec<(f64, f64)> = (20..=200)
        .map(|k| ((k as f64).ln(), lam[k - 1].ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!(slope <= threshold, "slope {slope} > {threshold}");
}

#[test]
fn tail_bound_holds_after_one_calibration() {
    let k3 = KernelSpec::squared_exponential(0.1).unwrap();
    let dom = Domain::unit_square();
    let cont = continuous_spectrum(&k3, &dom, 2500).unwrap();
    let cont_tail = tail_sums(&cont.eigenvalues);
    let geometry = |m: usize| {
        let g = grid_design(m, &dom).unwrap();
        let s = voronoi_summary(&g, default_raster_resolution(g.len(), 2)).unwrap();
        let c = k3.c_delta(&dom, s.delta_max, 51).unwrap();
        (s.mesh_ratio, c)
    };
    let (gamma, c_min) = geometry(20);
    let constants = TailBoundConstants::calibrate(gamma, c_min, dom.volume(), k3.variance());
    for m in [20, 40, 70] {
        let n = (m * m) as f64;
        let (_, c) = geometry(m);
        let lam = if m == 70 {
            se_4900().to_vec()
        } else {
            grid_spectrum(&k3, m)
        };
        let tails = tail_sums(&lam);
        for k in [5, 10, 20, 40] {
            let lhs = tails.tail_after(k) / n;
            let rhs = constants.rhs(cont_tail.tail_after(k), c);
            assert!(lhs <= rhs, "n = {n}, k = {k}: {lhs:e} > {rhs:e}");
        }
    }
}

fn se_4900() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| grid_spectrum(&KernelSpec::squared_exponential(0.1).unwrap(), 70))
}

#[test]
fn condition_ratio_grows_with_n_for_matern_kernels() {
    let kernels = [
        KernelSpec::exponential(0.25).unwrap(),
        KernelSpec::matern_two_point_five(0.25).unwrap(),
    ];
    for k in &kernels {
        let mut last = 0.0;
        for m in [10, 20, 30, 40] {
            let lam = grid_spectrum(k, m);
            let n = m * m;
            let ratio = lam[0] / lam[n.div_ceil(2) - 1];
            assert!(
                ratio > last,
                "{k}: ratio {ratio} at n = {n} not above {last}"
            );
            last = ratio;
        }
    }
}

#[test]
fn quadrature_spectrum_converges_under_refinement() {
    let k = KernelSpec::exponential(0.25).unwrap();
    let dom = Domain::unit_square();
    let coarse = continuous_spectrum(&k, &dom, 400).unwrap();
    let fine = continuous_spectrum(&k, &dom, 1600).unwrap();
    for i in 0..10 {
        let rel = (coarse.eigenvalues[i] - fine.eigenvalues[i]).abs() / fine.eigenvalues[i];
        assert!(rel < 0.05, "i = {}: {rel}", i + 1);
    }
    // the trace is exact for a unit-variance kernel at any resolution
    assert!((fine.total() - 1.0).abs() < 1e-10);
    let (nodes, w) = quadrature_nodes(&dom, 1600).unwrap();
    assert_eq!(nodes.len(), 1600);
    assert_eq!(w, 1.0 / 1600.0);
}

#[test]
fn doubling_the_quadrature_barely_moves_smooth_kernel_eigenvalues() {
    let k3 = KernelSpec::squared_exponential(0.1).unwrap();
    let dom = Domain::unit_square();
    let base = continuous_spectrum(&k3, &dom, 1600).unwrap();
    // 3200 rounds to the 57 x 57 lattice
    let doubled = continuous_spectrum(&k3, &dom, 3200).unwrap();
    assert_eq!(doubled.quadrature_m, 3249);
    for i in 0..10 {
        let rel = (base.eigenvalues[i] - doubled.eigenvalues[i]).abs() / doubled.eigenvalues[i];
        assert!(rel <= 1e-3, "i = {}: {rel:e}", i + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigenpairs_reconstruct_the_matrix(n in 2usize..40, seed in any::<u64>(), range in 0.05f64..1.0) {
        let d = random_design(n, &Domain::unit_square(), seed).unwrap();
        let v = assemble_covariance(&KernelSpec::matern_two_point_five(range).unwrap(), &d).unwrap();
        let es = dense_eigen(v.as_ref()).unwrap();
        let u = es.eigenvectors().unwrap();
        let lam = es.eigenvalues();
        for w in lam.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|c| u[(i, c)] * lam[c] * u[(j, c)]).sum();
                prop_assert!((r - v[(i, j)]).abs() < 1e-11 * n as f64);
            }
        }
    }

    #[test]
    fn randomized_solver_agrees_on_leading_values(n in 30usize..120, seed in any::<u64>()) {
        let d = random_design(n, &Domain::unit_square(), seed).unwrap();
        let k = KernelSpec::squared_exponential(0.1).unwrap();
        let v = assemble_covariance(&k, &d).unwrap();
        let dense = dense_eigenvalues(v.as_ref()).unwrap();
        let params = TruncatedParams { seed, ..TruncatedParams::new(5) };
        let op = KernelOperator::new(&k, &d);
        let fast = truncated_eigen(&op, params).unwrap();
        for i in 0..5 {
            let rel = (fast.eigenvalues()[i] - dense.eigenvalues()[i]).abs() / dense.eigenvalues()[0];
            prop_assert!(rel < 1e-8, "i = {i}: {rel:e}");
        }
    }
}
