//! Covariance assembly and eigendecompositions.
//!
//! [`dense_eigen`] is the exact reference (faer's symmetric tridiagonal QR);
//! [`truncated_eigen`] is a randomized block subspace iteration for the top
//! `k` eigenpairs that only needs products `V * Y`. [`continuous_spectrum`]
//! approximates the eigenvalues of the integral operator of a kernel by
//! equal-weight Nystrom quadrature on a uniform midpoint grid.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use faer::{Mat, MatRef, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::design::{Design, Domain};
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{max_asymmetry, trace, SymmetricOperator};

/// 2 GiB.
pub const DEFAULT_MAX_MATRIX_BYTES: u64 = 2 << 30;

static MAX_MATRIX_BYTES: AtomicU64 = AtomicU64::new(DEFAULT_MAX_MATRIX_BYTES);

/// Sets the process-wide ceiling on a single dense matrix allocation.
pub fn set_max_matrix_bytes(bytes: u64) {
    MAX_MATRIX_BYTES.store(bytes, Ordering::Relaxed);
}

pub fn max_matrix_bytes() -> u64 {
    MAX_MATRIX_BYTES.load(Ordering::Relaxed)
}

pub(crate) fn check_budget(rows: usize, cols: usize) -> Result<()> {
    let bytes = (rows as u64)
        .saturating_mul(cols as u64)
        .saturating_mul(std::mem::size_of::<f64>() as u64);
    let budget = max_matrix_bytes();
    if bytes > budget {
        return Err(Error::MemoryBudget {
            rows,
            cols,
            bytes,
            budget,
        });
    }
    Ok(())
}

/// `V_n = (K(s_i, s_j))`, each unordered pair evaluated once.
pub fn assemble_covariance(spec: &KernelSpec, design: &Design) -> Result<Mat<f64>> {
    let n = design.len();
    check_budget(n, n)?;
    let mut v = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        let sj = design.point(j);
        for i in j..n {
            let k = spec.eval(design.point(i), sj);
            v[(i, j)] = k;
            v[(j, i)] = k;
        }
    }
    Ok(v)
}

/// `(K(a_i, b_j))`, rows indexed by `a`.
pub fn cross_covariance(spec: &KernelSpec, a: &Design, b: &Design) -> Result<Mat<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    check_budget(a.len(), b.len())?;
    Ok(Mat::from_fn(a.len(), b.len(), |i, j| {
        spec.eval(a.point(i), b.point(j))
    }))
}

/// `k(s) = (K(s, s_i))_i`.
pub fn covariance_vector(spec: &KernelSpec, design: &Design, s: &[f64]) -> Vec<f64> {
    design.points().map(|p| spec.eval(s, p)).collect()
}

/// Matrix-free covariance operator; never stores `V_n`.
pub struct KernelOperator<'a> {
    spec: &'a KernelSpec,
    design: &'a Design,
}

impl<'a> KernelOperator<'a> {
    pub fn new(spec: &'a KernelSpec, design: &'a Design) -> Self {
        Self { spec, design }
    }
}

impl SymmetricOperator for KernelOperator<'_> {
    fn dim(&self) -> usize {
        self.design.len()
    }

    fn apply(&self, block: MatRef<'_, f64>) -> Mat<f64> {
        let n = self.design.len();
        let mut out = Mat::<f64>::zeros(n, block.ncols());
        let mut row = vec![0.0; n];
        for i in 0..n {
            let si = self.design.point(i);
            for (j, r) in row.iter_mut().enumerate() {
                *r = self.spec.eval(si, self.design.point(j));
            }
            for c in 0..block.ncols() {
                let mut s = 0.0;
                for (j, r) in row.iter().enumerate() {
                    s += r * block[(j, c)];
                }
                out[(i, c)] = s;
            }
        }
        out
    }
}

/// Eigenvalues in non-increasing order with (optionally) orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<Mat<f64>>,
    n: usize,
}

impl EigenSystem {
    /// Sorts the pairs into non-increasing eigenvalue order.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Option<Mat<f64>>, n: usize) -> Result<Self> {
        if eigenvalues.len() > n {
            return Err(invalid("more eigenvalues than the ambient dimension"));
        }
        if let Some(u) = &eigenvectors {
            if u.nrows() != n || u.ncols() != eigenvalues.len() {
                return Err(invalid("eigenvector block has the wrong shape"));
            }
        }
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
        let values = order.iter().map(|&i| eigenvalues[i]).collect();
        let vectors = eigenvectors.map(|u| Mat::from_fn(n, order.len(), |i, j| u[(i, order[j])]));
        Ok(Self {
            eigenvalues: values,
            eigenvectors: vectors,
            n,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<MatRef<'_, f64>> {
        self.eigenvectors.as_ref().map(|u| u.as_ref())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_complete(&self) -> bool {
        self.k() == self.n
    }

    /// Count of numerically negative eigenvalues (kept, never clipped).
    pub fn negative_count(&self) -> usize {
        self.eigenvalues.iter().filter(|l| **l < 0.0).count()
    }

    /// Keeps the leading `k` pairs.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.k());
        Self {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self
                .eigenvectors
                .as_ref()
                .map(|u| u.as_ref().subcols(0, k).to_owned()),
            n: self.n,
        }
    }
}

fn checked_square(v: MatRef<'_, f64>) -> Result<()> {
    if v.nrows() != v.ncols() {
        return Err(Error::DimensionMismatch {
            expected: v.nrows(),
            found: v.ncols(),
        });
    }
    if v.nrows() == 0 {
        return Err(invalid("empty matrix"));
    }
    let scale = (0..v.nrows()).map(|i| v[(i, i)].abs()).fold(1.0, f64::max);
    if max_asymmetry(v) > 1e-12 * scale {
        return Err(invalid("matrix is not symmetric"));
    }
    Ok(())
}

/// Full symmetric eigendecomposition, descending.
pub fn dense_eigen(v: MatRef<'_, f64>) -> Result<EigenSystem> {
    checked_square(v)?;
    let evd = v
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let n = v.nrows();
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    EigenSystem::new(values, Some(evd.U().to_owned()), n)
}

/// Eigenvalues only (about a third of the work of [`dense_eigen`]).
pub fn dense_eigenvalues(v: MatRef<'_, f64>) -> Result<EigenSystem> {
    checked_square(v)?;
    let values = v
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    EigenSystem::new(values, None, v.nrows())
}

/// Parameters of the randomized subspace iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedParams {
    pub k: usize,
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl TruncatedParams {
    /// Oversampling 10 and four power iterations; both are tunable.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            oversampling: 10,
            power_iterations: 4,
            seed: 0,
        }
    }
}

/// Top-`k` eigenpairs by randomized block subspace iteration:
/// a standard-normal `n x (k + p)` start block (ChaCha8, seeded), `q` rounds of
/// `Q <- orth(V Q)`, then Rayleigh-Ritz on `Q' V Q`.
pub fn truncated_eigen<O: SymmetricOperator + ?Sized>(
    op: &O,
    params: TruncatedParams,
) -> Result<EigenSystem> {
    let n = op.dim();
    let TruncatedParams {
        k,
        oversampling,
        power_iterations,
        seed,
    } = params;
    if k == 0 || k > n {
        return Err(invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    let width = k + oversampling;
    if width > n {
        return Err(invalid(format!(
            "k + oversampling = {width} exceeds the dimension {n}"
        )));
    }
    check_budget(n, width)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = Mat::<f64>::zeros(n, width);
    for j in 0..width {
        for i in 0..n {
            start[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let mut q = op.apply(start.as_ref()).qr().compute_thin_Q();
    for _ in 0..power_iterations {
        q = op.apply(q.as_ref()).qr().compute_thin_Q();
    }
    let vq = op.apply(q.as_ref());
    let mut small = q.transpose() * &vq;
    for j in 0..width {
        for i in 0..j {
            let avg = 0.5 * (small[(i, j)] + small[(j, i)]);
            small[(i, j)] = avg;
            small[(j, i)] = avg;
        }
    }
    let ritz = dense_eigen(small.as_ref())?;
    let w = ritz
        .eigenvectors()
        .expect("dense_eigen keeps vectors")
        .subcols(0, k);
    let u = &q * w;
    EigenSystem::new(ritz.eigenvalues()[..k].to_vec(), Some(u), n)
}

/// Approximate eigenvalues of the kernel integral operator on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Number of quadrature nodes actually used (a perfect `d`-th power).
    pub quadrature_m: usize,
    pub domain_volume: f64,
}

impl ContinuousSpectrum {
    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Midpoint lattice with `round(m^(1/d))` nodes per axis, and its equal weight `|D|/m`.
pub fn quadrature_nodes(domain: &Domain, quadrature_m: usize) -> Result<(Design, f64)> {
    let d = domain.dim();
    let per_axis = ((quadrature_m as f64).powf(1.0 / d as f64).round() as usize).max(1);
    let total = per_axis.pow(d as u32);
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for (a, &i) in idx.iter().enumerate() {
            coords.push(domain.lower()[a] + domain.side(a) * (i as f64 + 0.5) / per_axis as f64);
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
        }
    }
    let nodes = Design::from_flat(domain.clone(), coords)?;
    Ok((nodes, domain.volume() / total as f64))
}

/// Nystrom eigenvalues `(|D|/m) * eig(K_quad)`, descending.
pub fn continuous_spectrum(
    spec: &KernelSpec,
    domain: &Domain,
    quadrature_m: usize,
) -> Result<ContinuousSpectrum> {
    if quadrature_m < 100 {
        return Err(invalid(format!(
            "quadrature_m must be >= 100, got {quadrature_m}"
        )));
    }
    let (nodes, weight) = quadrature_nodes(domain, quadrature_m)?;
    let kq = assemble_covariance(spec, &nodes)?;
    let es = dense_eigenvalues(kq.as_ref())?;
    Ok(ContinuousSpectrum {
        eigenvalues: es.eigenvalues().iter().map(|l| l * weight).collect(),
        quadrature_m: nodes.len(),
        domain_volume: domain.volume(),
    })
}

/// Cumulative sums `sum_{i<=k}` for `k = 1..n` and tail sums `sum_{i>k}` for `k = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSums {
    pub cumulative: Vec<f64>,
    pub tail: Vec<f64>,
}

impl TailSums {
    /// `sum_{i>k}`, zero once `k` reaches the length.
    pub fn tail_after(&self, k: usize) -> f64 {
        self.tail.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.tail.first().copied().unwrap_or(0.0)
    }
}

/// Tails are accumulated from the smallest eigenvalue upward so that tiny
/// tails are not lost to cancellation against the trace.
pub fn tail_sums(eigenvalues: &[f64]) -> TailSums {
    let mut cumulative = Vec::with_capacity(eigenvalues.len());
    let mut acc = 0.0;
    for l in eigenvalues {
        acc += l;
        cumulative.push(acc);
    }
    let mut tail = vec![0.0; eigenvalues.len()];
    let mut acc = 0.0;
    for k in (0..eigenvalues.len()).rev() {
        acc += eigenvalues[k];
        tail[k] = acc;
    }
    TailSums { cumulative, tail }
}

/// Both condition-number conventions for `V + ridge * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionNumber {
    /// `(lambda_1 + ridge) / (lambda_min + ridge)`.
    pub strict: f64,
    /// `lambda_1 / ridge`, present when `ridge > 0`.
    pub paper_convention: Option<f64>,
}

/// For an incomplete system the unretained eigenvalues are taken as zero,
/// i.e. the numbers describe the rank-`k` matrix `V_{n,k} + ridge * I`.
pub fn condition_number(es: &EigenSystem, ridge: f64) -> Result<ConditionNumber> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(invalid(format!("ridge must be >= 0, got {ridge}")));
    }
    let values = es.eigenvalues();
    let top = *values.first().ok_or_else(|| invalid("empty eigensystem"))?;
    let bottom = if es.is_complete() {
        *values.last().unwrap()
    } else if ridge > 0.0 {
        0.0
    } else {
        return Err(invalid(
            "condition number of an incomplete spectrum needs ridge > 0",
        ));
    };
    if bottom + ridge <= 0.0 {
        return Err(invalid(format!(
            "smallest eigenvalue {bottom:e} is not positive; matrix is singular"
        )));
    }
    Ok(ConditionNumber {
        strict: (top + ridge) / (bottom + ridge),
        paper_convention: (ridge > 0.0).then(|| top / ridge),
    })
}

/// Writes `k,lambda,cumsum,tailsum` with `tailsum = sum_{i>k}`.
pub fn write_spectrum_csv<W: Write>(eigenvalues: &[f64], mut out: W) -> std::io::Result<()> {
    let sums = tail_sums(eigenvalues);
    writeln!(out, "k,lambda,cumsum,tailsum")?;
    for (i, l) in eigenvalues.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            l,
            sums.cumulative[i],
            sums.tail_after(i + 1)
        )?;
    }
    Ok(())
}

/// Constants of the eigenvalue-tail bound
/// `(1/n) sum_{i>k} lambda_{n,i} <= c1 * sum_{i>k} lambda_i + c2 * (1/c(delta_max) - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundConstants {
    pub c1: f64,
    pub c2: f64,
}

impl TailBoundConstants {
    /// `c1 = 2 gamma / (c_min |D|)` and `c2 = gamma (1 + |D|) max K(s,s) / |D|`,
    /// evaluated once on a calibration design and then held fixed.
    pub fn calibrate(gamma: f64, c_min: f64, domain_volume: f64, max_variance: f64) -> Self {
        Self {
            c1: 2.0 * gamma / (c_min * domain_volume),
            c2: gamma * (1.0 + domain_volume) * max_variance / domain_volume,
        }
    }

    pub fn rhs(&self, continuous_tail: f64, c_delta_max: f64) -> f64 {
        self.c1 * continuous_tail + self.c2 * (1.0 / c_delta_max - 1.0)
    }
}

/// `sum(eigenvalues) - trace(V)` relative to the trace; a completeness check.
pub fn trace_defect(es: &EigenSystem, v: MatRef<'_, f64>) -> f64 {
    let t = trace(v);
    (es.eigenvalues().iter().sum::<f64>() - t).abs() / t.abs().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{grid_design, random_design};
    use crate::linalg::frobenius;
    use approx::assert_relative_eq;

    fn two_point() -> (KernelSpec, Design) {
        let d = Design::new(Domain::unit_square(), vec![vec![0.0, 0.0], vec![0.25, 0.0]]).unwrap();
        (KernelSpec::exponential(0.25).unwrap(), d)
    }

    #[test]
    fn two_by_two_closed_form() {
        let (k, d) = two_point();
        let v = assemble_covariance(&k, &d).unwrap();
        assert_eq!(v[(0, 0)], 1.0);
        assert_relative_eq!(v[(0, 1)], (-1f64).exp(), max_relative = 1e-15);
        let es = dense_eigen(v.as_ref()).unwrap();
        assert_relative_eq!(
            es.eigenvalues()[0],
            1.0 + (-1f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            es.eigenvalues()[1],
            1.0 - (-1f64).exp(),
            max_relative = 1e-14
        );
        assert!(es.is_complete());
    }

    #[test]
    fn identity_spectrum() {
        let v = Mat::<f64>::identity(5, 5);
        let es = dense_eigen(v.as_ref()).unwrap();
        assert!(es.eigenvalues().iter().all(|l| (l - 1.0).abs() < 1e-15));
        let c = condition_number(&es, 0.0).unwrap();
        assert_relative_eq!(c.strict, 1.0, max_relative = 1e-14);
        assert_eq!(c.paper_convention, None);
        let sums = tail_sums(&[1.0, 1.0, 1.0]);
        assert_eq!(sums.cumulative, vec![1.0, 2.0, 3.0]);
        assert_eq!(sums.tail, vec![3.0, 2.0, 1.0]);
        assert_eq!(sums.tail_after(3), 0.0);
    }

    #[test]
    fn dense_eigen_reconstructs() {
        let d = random_design(60, &Domain::unit_square(), 9).unwrap();
        let k = KernelSpec::matern_two_point_five(0.3).unwrap();
        let v = assemble_covariance(&k, &d).unwrap();
        let es = dense_eigen(v.as_ref()).unwrap();
        let u = es.eigenvectors().unwrap();
        let lam = Mat::from_fn(
            60,
            60,
            |i, j| if i == j { es.eigenvalues()[i] } else { 0.0 },
        );
        let rec = u * &lam * u.transpose();
        let diff = &rec - &v;
        assert!(frobenius(diff.as_ref()) <= 1e-8 * frobenius(v.as_ref()));
        let gram = u.transpose() * u;
        for i in 0..60 {
            for j in 0..60 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-10);
            }
        }
        assert!(trace_defect(&es, v.as_ref()) < 1e-10);
        assert!(es.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let mut v = Mat::<f64>::identity(3, 3);
        v[(0, 1)] = 0.5;
        assert!(dense_eigen(v.as_ref()).is_err());
        let rect = Mat::<f64>::zeros(2, 3);
        assert!(matches!(
            dense_eigen(rect.as_ref()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn truncated_full_rank_is_exact() {
        let d = random_design(40, &Domain::unit_square(), 4).unwrap();
        let k = KernelSpec::exponential(0.25).unwrap();
        let v = assemble_covariance(&k, &d).unwrap();
        let dense = dense_eigen(v.as_ref()).unwrap();
        let params = TruncatedParams {
            oversampling: 0,
            ..TruncatedParams::new(40)
        };
        let approx = truncated_eigen(&v, params).unwrap();
        for (a, e) in approx.eigenvalues().iter().zip(dense.eigenvalues()) {
            assert_relative_eq!(a, e, max_relative = 1e-10);
        }
    }

    #[test]
    fn truncated_rank_one() {
        let u: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 / 10.0).collect();
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        let v = Mat::from_fn(30, 30, |i, j| u[i] * u[j]);
        let es = truncated_eigen(&v, TruncatedParams::new(3)).unwrap();
        assert_relative_eq!(es.eigenvalues()[0], norm2, max_relative = 1e-12);
        assert!(es.eigenvalues()[1].abs() < 1e-10 * norm2);
    }

    #[test]
    fn truncated_is_deterministic_and_validates() {
        let d = grid_design(8, &Domain::unit_square()).unwrap();
        let k = KernelSpec::squared_exponential(0.1).unwrap();
        let v = assemble_covariance(&k, &d).unwrap();
        let a = truncated_eigen(&v, TruncatedParams::new(5)).unwrap();
        let b = truncated_eigen(&v, TruncatedParams::new(5)).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert!(truncated_eigen(&v, TruncatedParams::new(60)).is_err());
        assert!(truncated_eigen(&v, TruncatedParams::new(0)).is_err());
        // matrix-free operator gives the same subspace
        let op = KernelOperator::new(&k, &d);
        let c = truncated_eigen(&op, TruncatedParams::new(5)).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(c.eigenvalues()) {
            assert_relative_eq!(x, y, max_relative = 1e-10);
        }
    }

    #[test]
    fn continuous_spectrum_sums_to_integrated_variance() {
        let k = KernelSpec::squared_exponential(0.1).unwrap();
        let cs = continuous_spectrum(&k, &Domain::unit_square(), 900).unwrap();
        assert_eq!(cs.quadrature_m, 900);
        assert_relative_eq!(cs.total(), 1.0, max_relative = 1e-10);
        assert!(continuous_spectrum(&k, &Domain::unit_square(), 99).is_err());
    }

    #[test]
    fn polynomial_kernel_has_rank_six() {
        let k = KernelSpec::polynomial(2, 1.0).unwrap();
        let cs = continuous_spectrum(&k, &Domain::unit_square(), 400).unwrap();
        let top = cs.eigenvalues[0];
        assert!(cs.eigenvalues[5] > 1e-6 * top);
        assert!(cs.eigenvalues[6].abs() <= 1e-10 * top);
    }

    #[test]
    fn condition_number_conventions() {
        let es = EigenSystem::new(vec![4.0, 2.0, 1.0], None, 3).unwrap();
        let c = condition_number(&es, 0.5).unwrap();
        assert_relative_eq!(c.strict, 4.5 / 1.5);
        assert_relative_eq!(c.paper_convention.unwrap(), 8.0);
        let partial = EigenSystem::new(vec![4.0, 2.0], None, 3).unwrap();
        assert!(condition_number(&partial, 0.0).is_err());
        assert_relative_eq!(condition_number(&partial, 1.0).unwrap().strict, 5.0);
        let singular = EigenSystem::new(vec![1.0, -1e-14], None, 2).unwrap();
        assert!(condition_number(&singular, 0.0).is_err());
        assert_eq!(singular.negative_count(), 1);
    }

    #[test]
    fn memory_budget_is_enforced() {
        assert!(check_budget(1000, 1000).is_ok());
        assert!(matches!(
            check_budget(1 << 20, 1 << 20),
            Err(Error::MemoryBudget { .. })
        ));
    }

    #[test]
    fn spectrum_csv_layout() {
        let mut buf = Vec::new();
        write_spectrum_csv(&[3.0, 2.0, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "k,lambda,cumsum,tailsum\n1,3,3,3\n2,2,5,1\n3,1,6,0\n");
    }
}
