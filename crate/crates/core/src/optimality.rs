//! Optimality of low-rank representations, checked numerically.
//!
//! * Optimality C: among all `k`-dimensional subspaces `span(B'Y)` of the
//!   observed variables, the leading eigenvectors of `V_n` minimize the summed
//!   in-sample projection error, and the minimum is `sum_{i>k} lambda_{n,i}`.
//! * Optimality B: the integrated error over the domain is minimized through
//!   the predictive process `Y_n*(s) = k(s)'V_n^{-1} Y` with kernel
//!   `K*(s,x) = k(s)'V_n^{-1}k(x)`; the minimum splits into
//!   `sum_{i>k} lambda*_{n,i} + int (K(s,s) - K*(s,s)) ds`.
//! * Eckart–Young: `V_{n,k}` is the closest rank-`k` matrix in Frobenius norm.
//!
//! Minimizers are checked by exact identities; minimality by seeded random
//! competitors, half drawn from scratch and half as perturbations of the optimum.

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::design::Design;
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{frobenius, trace, Cholesky};
use crate::spectral::{
    assemble_covariance, continuous_spectrum, cross_covariance, dense_eigen, dense_eigenvalues,
    quadrature_nodes, ContinuousSpectrum,
};

/// Absolute slack granted to random competitors before they count as beating the optimum.
pub const DOMINANCE_SLACK: f64 = 1e-8;

/// An `n x k` coefficient matrix `B` of full column rank; the subspace is `span(B'Y)`.
#[derive(Debug, Clone)]
pub struct SubspaceSpec {
    coefficients: Mat<f64>,
}

impl SubspaceSpec {
    /// Rejects `B` whose smallest singular value is below `1e-10` times the largest.
    /// `k = 0` (the trivial subspace) is allowed.
    pub fn new(coefficients: Mat<f64>) -> Result<Self> {
        let (n, k) = (coefficients.nrows(), coefficients.ncols());
        if k > n {
            return Err(invalid(format!("subspace dimension {k} exceeds n = {n}")));
        }
        if coefficients
            .col_iter()
            .flat_map(|c| c.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if k > 0 {
            let sv = coefficients
                .singular_values()
                .map_err(|_| Error::NoConvergence)?;
            let hi = sv.iter().cloned().fold(0.0, f64::max);
            let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            if hi <= 0.0 || lo <= 1e-10 * hi {
                return Err(Error::RankDeficient);
            }
        }
        Ok(Self { coefficients })
    }

    pub fn n(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn k(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn coefficients(&self) -> MatRef<'_, f64> {
        self.coefficients.as_ref()
    }

    fn orthonormal_basis(&self) -> Mat<f64> {
        self.coefficients.qr().compute_thin_Q()
    }
}

/// `L^{-1} Q'X` where `Q'VQ = LL'`; its squared Frobenius norm is `tr((Q'VQ)^{-1} Q'XX'Q)`.
fn whitened(v: MatRef<'_, f64>, q: MatRef<'_, f64>, x: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let vq = v * q;
    let mut g = q.transpose() * &vq;
    symmetrize(&mut g);
    let chol = Cholesky::factor(g.as_ref()).map_err(|_| Error::RankDeficient)?;
    let qx = q.transpose() * x;
    Ok(chol.solve_lower_mat(qx.as_ref()))
}

/// `sum_i E(Y(s_i) - proj[Y(s_i) | span(B'Y)])^2 = tr V - tr((B'VB)^{-1} B'V^2 B)`.
pub fn projection_residual(v: MatRef<'_, f64>, b: &SubspaceSpec) -> Result<f64> {
    let n = v.nrows();
    if v.ncols() != n || b.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.n(),
        });
    }
    if b.k() == 0 {
        return Ok(trace(v));
    }
    let q = b.orthonormal_basis();
    // tr(G^{-1} Q'V^2 Q) = |L^{-1} Q'V|_F^2
    let z = whitened(v, q.as_ref(), v)?;
    let f = frobenius(z.as_ref());
    Ok(trace(v) - f * f)
}

/// Outcome of an "optimum beats every random competitor" experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    /// Objective at the claimed minimizer, computed from the matrices.
    pub optimum: f64,
    /// The closed-form value the minimum should equal (an eigenvalue tail).
    pub closed_form: f64,
    /// Smallest objective among the random competitors (`+inf` with no trials).
    pub best_competitor: f64,
    pub trials: usize,
}

impl DominanceReport {
    /// `|optimum - closed_form| <= 1e-8 * closed_form` (plus rounding on the scale of `scale`).
    pub fn exact(&self, scale: f64) -> bool {
        (self.optimum - self.closed_form).abs() <= 1e-8 * self.closed_form.abs() + 1e-13 * scale
    }

    pub fn dominated(&self) -> bool {
        self.best_competitor >= self.closed_form - DOMINANCE_SLACK
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `10^U(-3, 0)`.
fn perturbation_scale(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.random_range(-3.0..0.0))
}

/// Even trials are Gaussian from scratch; odd trials are `base + eps * G`.
fn competitor(rng: &mut ChaCha8Rng, trial: usize, base: MatRef<'_, f64>) -> Mat<f64> {
    let g = gaussian(rng, base.nrows(), base.ncols());
    if trial.is_multiple_of(2) {
        g
    } else {
        let eps = perturbation_scale(rng);
        Mat::from_fn(base.nrows(), base.ncols(), |i, j| {
            base[(i, j)] + eps * g[(i, j)]
        })
    }
}

/// Checks that the top-`k` eigenvector subspace attains `sum_{i>k} lambda_{n,i}`
/// and that `trials` random subspaces never do better.
pub fn optimality_c_check(
    v: MatRef<'_, f64>,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<DominanceReport> {
    let n = v.nrows();
    if n > 500 {
        return Err(invalid("dense optimality checks are limited to n <= 500"));
    }
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    let es = dense_eigen(v)?;
    let uk = es.eigenvectors().unwrap().subcols(0, k);
    let closed_form: f64 = es.eigenvalues()[k..].iter().rev().sum();
    let optimum = projection_residual(v, &SubspaceSpec::new(uk.to_owned())?)?;
    let mut best = f64::INFINITY;
    if k > 0 {
        for t in 0..trials {
            let mut rng = trial_rng(seed, t);
            let b = competitor(&mut rng, t, uk);
            let r = projection_residual(v, &SubspaceSpec::new(b)?)?;
            best = best.min(r);
        }
    } else if trials > 0 {
        // only one zero-dimensional subspace exists
        best = optimum;
    }
    Ok(DominanceReport {
        optimum,
        closed_form,
        best_competitor: best,
        trials,
    })
}

/// Checks `|V - V_{n,k}|_F^2 = sum_{i>k} lambda_{n,i}^2` and that `trials`
/// random rank-`k` matrices are farther from `V`.
pub fn eckart_young_check(
    v: MatRef<'_, f64>,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<DominanceReport> {
    let n = v.nrows();
    if n > 300 {
        return Err(invalid("eckart_young_check is limited to n <= 300"));
    }
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    let es = dense_eigen(v)?;
    let lam = es.eigenvalues();
    let uk = es.eigenvectors().unwrap().subcols(0, k);
    let closed_form: f64 = lam[k..].iter().rev().map(|l| l * l).sum();
    let scaled = |u: MatRef<'_, f64>| Mat::from_fn(n, k, |i, j| u[(i, j)] * lam[j]);
    let dist2 = |m: &Mat<f64>| {
        let f = frobenius((v - m).as_ref());
        f * f
    };
    let optimum = dist2(&(scaled(uk) * uk.transpose()));
    let mut best = f64::INFINITY;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let m = if k == 0 {
            Mat::zeros(n, n)
        } else if t % 2 == 0 {
            // best rank-k fit within a random column space: P V P
            let q = gaussian(&mut rng, n, k).qr().compute_thin_Q();
            let qvq = q.transpose() * v * &q;
            &q * qvq * q.transpose()
        } else {
            let u = competitor(&mut rng, t, uk);
            scaled(u.as_ref()) * u.transpose()
        };
        best = best.min(dist2(&m));
    }
    Ok(DominanceReport {
        optimum,
        closed_form,
        best_competitor: best,
        trials,
    })
}

struct PredictiveProcess {
    /// `L^{-1} K_nq` with `V_n = LL'`, `n x m`.
    whitened: Mat<f64>,
    /// `K(q,q)` at each quadrature node.
    diagonal: Vec<f64>,
    nodes: Design,
    weight: f64,
}

fn predictive_process(
    spec: &KernelSpec,
    design: &Design,
    quadrature_m: usize,
) -> Result<PredictiveProcess> {
    if design.len() > 500 {
        return Err(invalid("predictive-process checks are limited to n <= 500"));
    }
    if quadrature_m < 100 {
        return Err(invalid(format!(
            "quadrature_m must be >= 100, got {quadrature_m}"
        )));
    }
    let (nodes, weight) = quadrature_nodes(design.domain(), quadrature_m)?;
    let v = assemble_covariance(spec, design)?;
    let chol = Cholesky::factor(v.as_ref())?;
    let knq = cross_covariance(spec, design, &nodes)?;
    let whitened = chol.solve_lower_mat(knq.as_ref());
    let diagonal = nodes.points().map(|q| spec.eval(q, q)).collect();
    Ok(PredictiveProcess {
        whitened,
        diagonal,
        nodes,
        weight,
    })
}

/// Nystrom eigenvalues of `K*(s,x) = k(s)'V_n^{-1}k(x)` on the same midpoint
/// quadrature as [`continuous_spectrum`]. `K*` has rank at most `n`, so at most
/// `n` values are returned.
pub fn predictive_process_spectrum(
    spec: &KernelSpec,
    design: &Design,
    quadrature_m: usize,
) -> Result<ContinuousSpectrum> {
    let pp = predictive_process(spec, design, quadrature_m)?;
    Ok(ContinuousSpectrum {
        eigenvalues: star_eigenvalues(&pp)?,
        quadrature_m: pp.nodes.len(),
        domain_volume: design.domain().volume(),
    })
}

/// Nonzero eigenvalues of `w W'W` via the `n x n` Gram matrix `w W W'`.
fn star_eigenvalues(pp: &PredictiveProcess) -> Result<Vec<f64>> {
    let w = pp.whitened.as_ref();
    let mut gram = w * w.transpose();
    symmetrize(&mut gram);
    let es = dense_eigenvalues(gram.as_ref())?;
    Ok(es.eigenvalues().iter().map(|l| l * pp.weight).collect())
}

/// The two parts of the Optimality-B minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityB {
    /// `sum_{i>k} lambda*_{n,i}`.
    pub tail_star: f64,
    /// `int_D K(s,s) - K*(s,s) ds` by quadrature.
    pub residual_integral: f64,
}

impl OptimalityB {
    pub fn minimum(&self) -> f64 {
        self.tail_star + self.residual_integral
    }
}

pub fn optimality_b_decomposition(
    spec: &KernelSpec,
    design: &Design,
    k: usize,
    quadrature_m: usize,
) -> Result<OptimalityB> {
    let pp = predictive_process(spec, design, quadrature_m)?;
    let star = star_eigenvalues(&pp)?;
    if k > star.len() {
        return Err(invalid(format!("k = {k} exceeds n = {}", star.len())));
    }
    let w = pp.whitened.as_ref();
    let residual: f64 = (0..w.ncols())
        .map(|j| {
            let c = w.col(j);
            let kstar: f64 = c.iter().map(|x| x * x).sum();
            pp.diagonal[j] - kstar
        })
        .sum();
    Ok(OptimalityB {
        tail_star: star[k..].iter().rev().sum(),
        residual_integral: pp.weight * residual,
    })
}

/// `int_D E(Y(s) - proj[Y(s) | span(B'Y)])^2 ds` on the shared quadrature,
/// i.e. `int K(s,s) - k(s)'B(B'VB)^{-1}B'k(s) ds`.
pub fn subspace_integrated_residual(
    spec: &KernelSpec,
    design: &Design,
    b: &SubspaceSpec,
    quadrature_m: usize,
) -> Result<f64> {
    if b.n() != design.len() {
        return Err(Error::DimensionMismatch {
            expected: design.len(),
            found: b.n(),
        });
    }
    if quadrature_m < 100 {
        return Err(invalid(format!(
            "quadrature_m must be >= 100, got {quadrature_m}"
        )));
    }
    let (nodes, weight) = quadrature_nodes(design.domain(), quadrature_m)?;
    let diag: f64 = nodes.points().map(|q| spec.eval(q, q)).sum();
    if b.k() == 0 {
        return Ok(weight * diag);
    }
    let v = assemble_covariance(spec, design)?;
    let knq = cross_covariance(spec, design, &nodes)?;
    let q = b.orthonormal_basis();
    let z = whitened(v.as_ref(), q.as_ref(), knq.as_ref())?;
    let f = frobenius(z.as_ref());
    Ok(weight * (diag - f * f))
}

/// Leading predictive-process eigenvalues against the kernel's own, on one quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceSpectrum {
    pub star: Vec<f64>,
    pub continuous: Vec<f64>,
    /// `1e-3 * lambda_1`.
    pub tolerance: f64,
}

impl DominanceSpectrum {
    /// Largest `lambda*_i - lambda_i` over the compared indices.
    pub fn max_excess(&self) -> f64 {
        self.star
            .iter()
            .zip(&self.continuous)
            .map(|(s, c)| s - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_excess() <= self.tolerance
    }
}

/// Compares the first `count` eigenvalues of `K*` and `K`.
pub fn predictive_dominance_check(
    spec: &KernelSpec,
    design: &Design,
    quadrature_m: usize,
    count: usize,
) -> Result<DominanceSpectrum> {
    let star = predictive_process_spectrum(spec, design, quadrature_m)?;
    let cont = continuous_spectrum(spec, design.domain(), quadrature_m)?;
    let count = count
        .min(star.eigenvalues.len())
        .min(cont.eigenvalues.len());
    Ok(DominanceSpectrum {
        star: star.eigenvalues[..count].to_vec(),
        continuous: cont.eigenvalues[..count].to_vec(),
        tolerance: 1e-3 * cont.eigenvalues[0],
    })
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
