//! Simple (mean-zero) kriging with exact, pseudo-inverse and perturbed solves.
//!
//! All three modes produce a weight vector `w(s)` with predictor `w(s)'Y`:
//!
//! * `Exact`: `V_n w = k(s)` through a Cholesky factor.
//! * `PseudoRank(k)`: `w = (sum_{i<=k} u_i u_i' / lambda_i) k(s)`.
//! * `Perturbed(k, tau)`: `w = (V_{n,k} + tau I)^{-1} k(s)` in spectral form.
//!
//! The prediction variance is always the explicit quadratic form
//! `K(s,s) - 2 w'k(s) + w'V_n w`.

use faer::{Mat, MatRef};

use crate::design::Design;
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{dot, Cholesky};
use crate::spectral::{
    assemble_covariance, covariance_vector, dense_eigen, truncated_eigen, EigenSystem,
    TruncatedParams,
};

/// Which predictor to fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitMode {
    Exact,
    PseudoRank { k: usize },
    Perturbed { k: usize, tau: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Eigenvalues at or below `clip_threshold * lambda_1` never enter a pseudo-inverse.
    pub clip_threshold: f64,
    /// Largest `n` solved with the dense eigensolver; above it the randomized one is used.
    pub dense_limit: usize,
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            clip_threshold: 1e-12,
            dense_limit: 2000,
            oversampling: 10,
            power_iterations: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Exact(Cholesky),
    PseudoRank {
        /// Rank that was asked for; the retained rank may be smaller after clipping.
        requested: usize,
        eigen: EigenSystem,
        /// `lambda_{n,r+1}` for the retained rank `r` (zero when `r = n`).
        next_eigenvalue: f64,
    },
    Perturbed {
        k: usize,
        tau: f64,
        eigen: EigenSystem,
    },
}

/// A fitted predictor. Immutable; `predict` takes `&self`.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    spec: KernelSpec,
    design: Design,
    covariance: Mat<f64>,
    kind: ModelKind,
    clip_threshold: f64,
}

/// Weights at one prediction site and their error variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub weights: Vec<f64>,
    /// `E(Y(s) - w'Y)^2`.
    pub variance: f64,
    pub weight_norm: f64,
}

impl Prediction {
    /// The predicted value `w'Y` for observations `y`.
    pub fn value(&self, observations: &[f64]) -> Result<f64> {
        if observations.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: observations.len(),
            });
        }
        Ok(dot(&self.weights, observations))
    }
}

pub fn fit(spec: &KernelSpec, design: &Design, mode: FitMode) -> Result<KrigingModel> {
    fit_with(spec, design, mode, &FitOptions::default())
}

pub fn fit_with(
    spec: &KernelSpec,
    design: &Design,
    mode: FitMode,
    options: &FitOptions,
) -> Result<KrigingModel> {
    let n = design.len();
    let covariance = assemble_covariance(spec, design)?;
    let kind = match mode {
        FitMode::Exact => ModelKind::Exact(Cholesky::factor(covariance.as_ref())?),
        FitMode::PseudoRank { k } => {
            check_rank(k, n)?;
            let (eigen, next) = leading_pairs(covariance.as_ref(), k, options)?;
            let floor = options.clip_threshold * eigen.eigenvalues()[0].max(0.0);
            let retained = eigen
                .eigenvalues()
                .iter()
                .take_while(|l| **l > floor)
                .count();
            if retained == 0 {
                return Err(invalid("no eigenvalue survives the clip threshold"));
            }
            let next_eigenvalue = if retained < eigen.k() {
                eigen.eigenvalues()[retained]
            } else {
                next
            };
            ModelKind::PseudoRank {
                requested: k,
                eigen: eigen.truncate(retained),
                next_eigenvalue,
            }
        }
        FitMode::Perturbed { k, tau } => {
            check_rank(k, n)?;
            if !(tau.is_finite() && tau > 0.0) {
                return Err(invalid(format!("tau must be positive, got {tau}")));
            }
            let (eigen, _) = leading_pairs(covariance.as_ref(), k, options)?;
            ModelKind::Perturbed { k, tau, eigen }
        }
    };
    Ok(KrigingModel {
        spec: *spec,
        design: design.clone(),
        covariance,
        kind,
        clip_threshold: options.clip_threshold,
    })
}

fn check_rank(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid(format!("rank k must lie in 1..={n}, got {k}")));
    }
    Ok(())
}

/// Top-`k` pairs and `lambda_{k+1}` (zero when `k = n`).
fn leading_pairs(v: MatRef<'_, f64>, k: usize, options: &FitOptions) -> Result<(EigenSystem, f64)> {
    let n = v.nrows();
    let width = k + 1 + options.oversampling;
    if n <= options.dense_limit || width > n {
        let full = dense_eigen(v)?;
        let next = full.eigenvalues().get(k).copied().unwrap_or(0.0);
        return Ok((full.truncate(k), next));
    }
    let params = TruncatedParams {
        k: k + 1,
        oversampling: options.oversampling,
        power_iterations: options.power_iterations,
        seed: options.seed,
    };
    let es = truncated_eigen(&v, params)?;
    let next = es.eigenvalues()[k];
    Ok((es.truncate(k), next))
}

impl KrigingModel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn covariance(&self) -> MatRef<'_, f64> {
        self.covariance.as_ref()
    }

    pub fn clip_threshold(&self) -> f64 {
        self.clip_threshold
    }

    /// Number of eigenpairs the predictor actually uses (`n` for exact kriging).
    pub fn rank(&self) -> usize {
        match &self.kind {
            ModelKind::Exact(_) => self.design.len(),
            ModelKind::PseudoRank { eigen, .. } | ModelKind::Perturbed { eigen, .. } => eigen.k(),
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Perturbed { tau, .. } => Some(tau),
            _ => None,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Exact(_) => "exact",
            ModelKind::PseudoRank { .. } => "pseudo",
            ModelKind::Perturbed { .. } => "perturbed",
        }
    }

    pub fn predict(&self, s: &[f64]) -> Result<Prediction> {
        if s.len() != self.design.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.design.dim(),
                found: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !self.design.domain().contains(s) {
            return Err(invalid("prediction site lies outside the domain"));
        }
        let ks = covariance_vector(&self.spec, &self.design, s);
        let weights = match &self.kind {
            ModelKind::Exact(chol) => chol.solve(&ks),
            ModelKind::PseudoRank { eigen, .. } => spectral_apply(eigen, &ks, |l| 1.0 / l, 0.0),
            ModelKind::Perturbed { tau, eigen, .. } => {
                let tau = *tau;
                spectral_apply(eigen, &ks, |l| 1.0 / (l + tau), 1.0 / tau)
            }
        };
        let variance = self.error_variance(s, &ks, &weights);
        let weight_norm = dot(&weights, &weights).sqrt();
        Ok(Prediction {
            weights,
            variance,
            weight_norm,
        })
    }

    /// `K(s,s) - 2 w'k(s) + w'V_n w` for arbitrary weights.
    pub fn error_variance(&self, s: &[f64], ks: &[f64], weights: &[f64]) -> f64 {
        let n = weights.len();
        let mut quad = 0.0;
        for j in 0..n {
            let col = self.covariance.col(j);
            let mut vw = 0.0;
            for i in 0..n {
                vw += col[i] * weights[i];
            }
            quad += weights[j] * vw;
        }
        self.spec.eval(s, s) - 2.0 * dot(weights, ks) + quad
    }
}

/// `(sum_i f(lambda_i) u_i u_i' + rest * (I - sum_i u_i u_i')) x`.
fn spectral_apply(eigen: &EigenSystem, x: &[f64], f: impl Fn(f64) -> f64, rest: f64) -> Vec<f64> {
    let u = eigen
        .eigenvectors()
        .expect("kriging eigensystems keep vectors");
    let mut out: Vec<f64> = x.iter().map(|v| rest * v).collect();
    for (i, &l) in eigen.eigenvalues().iter().enumerate() {
        let ui = u.col(i);
        let mut proj = 0.0;
        for r in 0..x.len() {
            proj += ui[r] * x[r];
        }
        let scale = (f(l) - rest) * proj;
        for (r, o) in out.iter_mut().enumerate() {
            *o += scale * ui[r];
        }
    }
    out
}

/// Extra prediction error of the pseudo-inverse predictor over exact kriging,
/// with the eigenvalue bound `|alpha(s)|^2 lambda_{n,k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessRisk {
    pub excess: f64,
    pub bound: f64,
}

impl ExcessRisk {
    /// `-1e-10 <= excess <= bound + 1e-10`.
    pub fn holds(&self) -> bool {
        self.excess >= -1e-10 && self.excess <= self.bound + 1e-10
    }
}

/// `exact_weights` are the exact kriging weights `alpha(s)`, solved elsewhere.
pub fn excess_risk(pseudo: &KrigingModel, exact_weights: &[f64], s: &[f64]) -> Result<ExcessRisk> {
    let next = match pseudo.kind {
        ModelKind::PseudoRank {
            next_eigenvalue, ..
        } => next_eigenvalue,
        _ => return Err(invalid("excess risk needs a pseudo-rank model")),
    };
    let n = pseudo.design.len();
    if exact_weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: exact_weights.len(),
        });
    }
    let pred = pseudo.predict(s)?;
    let ks = covariance_vector(&pseudo.spec, &pseudo.design, s);
    let exact_variance = pseudo.error_variance(s, &ks, exact_weights);
    Ok(ExcessRisk {
        excess: pred.variance - exact_variance,
        bound: dot(exact_weights, exact_weights) * next.max(0.0),
    })
}

/// The two sums of the in-sample perturbation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationMse {
    /// `sum_{i<=k} lambda_i / (1 + lambda_i/tau)^2`.
    pub leading: f64,
    /// `sum_{i>k} lambda_i (1 - lambda_i/tau)^2`.
    pub tail: f64,
}

impl PerturbationMse {
    pub fn total(&self) -> f64 {
        self.leading + self.tail
    }
}

pub fn perturbation_mse_terms(eigenvalues: &[f64], k: usize, tau: f64) -> Result<PerturbationMse> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    if k > eigenvalues.len() {
        return Err(invalid(format!(
            "k = {k} exceeds the spectrum length {}",
            eigenvalues.len()
        )));
    }
    let (head, tail) = eigenvalues.split_at(k);
    let leading = head.iter().map(|l| l / (1.0 + l / tau).powi(2)).sum();
    let tail = tail.iter().rev().map(|l| l * (1.0 - l / tau).powi(2)).sum();
    Ok(PerturbationMse { leading, tail })
}

/// `E|Y - V_n (V_{n,k} + tau I)^{-1} Y|^2` from a complete spectrum.
pub fn perturbation_mse(eigenvalues: &[f64], k: usize, tau: f64) -> Result<f64> {
    perturbation_mse_terms(eigenvalues, k, tau).map(|t| t.total())
}

/// Brute-force counterpart of [`perturbation_mse`]: forms `V_{n,k} + tau I`
/// explicitly, solves with Cholesky, builds `A = V (V_{n,k} + tau I)^{-1}`
/// and returns `trace((I - A) V (I - A)')`.
pub fn perturbation_mse_oracle(v: MatRef<'_, f64>, k: usize, tau: f64) -> Result<f64> {
    let n = v.nrows();
    if n > 2000 {
        return Err(invalid("dense oracle is limited to n <= 2000"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    let es = dense_eigen(v)?;
    let u = es.eigenvectors().unwrap().subcols(0, k);
    let lam = Mat::from_fn(k, k, |i, j| if i == j { es.eigenvalues()[i] } else { 0.0 });
    let mut perturbed = u * &lam * u.transpose();
    for i in 0..n {
        perturbed[(i, i)] += tau;
    }
    symmetrize(&mut perturbed);
    let chol = Cholesky::factor(perturbed.as_ref())?;
    // (V_{n,k} + tau I)^{-1} V = A', so A = (solve)'
    let a_t = chol.solve_mat(v);
    let mut resid = Mat::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            resid[(i, j)] -= a_t[(j, i)];
        }
    }
    let left = &resid * v;
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            tr += left[(i, j)] * resid[(i, j)];
        }
    }
    Ok(tr)
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

/// `sum_{i>k} lambda^3 / sum_{i>k} lambda^2`; below it the tail term decreases in `tau`.
pub fn optimal_tau_threshold(eigenvalues: &[f64], k: usize) -> Result<f64> {
    if k >= eigenvalues.len() {
        return Err(invalid(format!(
            "k = {k} must be below the spectrum length {}",
            eigenvalues.len()
        )));
    }
    let tail = &eigenvalues[k..];
    let cubes: f64 = tail.iter().map(|l| l.powi(3)).sum();
    let squares: f64 = tail.iter().map(|l| l * l).sum();
    if squares == 0.0 {
        return Ok(0.0);
    }
    Ok(cubes / squares)
}

/// In-sample error sum of the rank-`k` pseudo-inverse predictor, `sum_{i>k} lambda_i`.
pub fn pseudo_insample_mse(eigenvalues: &[f64], k: usize) -> f64 {
    eigenvalues.iter().skip(k).rev().sum()
}
