//! Covariance functions and the local-continuity functional `c(delta)`.
//!
//! Stationary families are isotropic functions of the lag `h = x - y`:
//!
//! | family                | `K(h)`                                                      |
//! |-----------------------|-------------------------------------------------------------|
//! | `Exponential`         | `s2 * exp(-|h|/phi)`                                        |
//! | `MaternTwoPointFive`  | `s2 * (1 + r + r^2/3) * exp(-r)`, `r = sqrt(5)|h|/phi`      |
//! | `SquaredExponential`  | `s2 * exp(-|h|^2/phi)`                                      |
//! | `Matern(nu)`          | `s2 * 2^(1-nu)/Gamma(nu) * r^nu * K_nu(r)`, `r = sqrt(2 nu)|h|/phi` |
//!
//! The squared-exponential form carries a negative exponent. A positive exponent,
//! `exp(+|h|^2/phi)`, grows without bound and is not positive semidefinite.
//!
//! `Polynomial(degree, offset)` is the non-stationary `s2 * (offset + x'y)^degree`.

use std::fmt;
use std::str::FromStr;

use crate::design::Domain;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Exponential,
    MaternTwoPointFive,
    SquaredExponential,
    Matern { smoothness: f64 },
    Polynomial { degree: u32, offset: f64 },
}

/// A covariance function: family plus range `phi` and marginal variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: Family,
    range: f64,
    variance: f64,
}

impl KernelSpec {
    pub fn new(family: Family, range: f64, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(invalid(format!(
                "variance must be positive, got {variance}"
            )));
        }
        match family {
            Family::Polynomial { degree, offset } => {
                if degree == 0 {
                    return Err(invalid("polynomial degree must be positive"));
                }
                if !(offset.is_finite() && offset >= 0.0) {
                    return Err(invalid(format!(
                        "polynomial offset must be >= 0, got {offset}"
                    )));
                }
            }
            Family::Matern { smoothness } if !(smoothness.is_finite() && smoothness > 0.0) => {
                return Err(invalid(format!(
                    "matern smoothness must be positive, got {smoothness}"
                )));
            }
            _ => {}
        }
        if !family.is_polynomial() && !(range.is_finite() && range > 0.0) {
            return Err(invalid(format!("range must be positive, got {range}")));
        }
        Ok(Self {
            family,
            // polynomial kernels have no range; normalize so equal kernels compare equal
            range: if family.is_polynomial() { 1.0 } else { range },
            variance,
        })
    }

    pub fn exponential(range: f64) -> Result<Self> {
        Self::new(Family::Exponential, range, 1.0)
    }

    pub fn matern_two_point_five(range: f64) -> Result<Self> {
        Self::new(Family::MaternTwoPointFive, range, 1.0)
    }

    pub fn squared_exponential(range: f64) -> Result<Self> {
        Self::new(Family::SquaredExponential, range, 1.0)
    }

    pub fn matern(smoothness: f64, range: f64) -> Result<Self> {
        Self::new(Family::Matern { smoothness }, range, 1.0)
    }

    pub fn polynomial(degree: u32, offset: f64) -> Result<Self> {
        Self::new(Family::Polynomial { degree, offset }, 1.0, 1.0)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn is_stationary(&self) -> bool {
        !self.family.is_polynomial()
    }

    /// `K(x, y)` with dimension and finiteness checks.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.is_empty() {
            return Err(invalid("points must have dimension >= 1"));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(self.eval(x, y))
    }

    /// Unchecked evaluation for callers that already validated their inputs.
    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            Family::Polynomial { degree, offset } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                self.variance * (offset + dot).powi(degree as i32)
            }
            _ => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                self.stationary(d2)
            }
        }
    }

    /// Stationary covariance as a function of squared lag.
    fn stationary(&self, dist2: f64) -> f64 {
        let s2 = self.variance;
        let phi = self.range;
        match self.family {
            Family::Exponential => s2 * (-dist2.sqrt() / phi).exp(),
            Family::MaternTwoPointFive => {
                let r = 5f64.sqrt() * dist2.sqrt() / phi;
                s2 * (1.0 + r + r * r / 3.0) * (-r).exp()
            }
            Family::SquaredExponential => s2 * (-dist2 / phi).exp(),
            Family::Matern { smoothness } => {
                let r = (2.0 * smoothness).sqrt() * dist2.sqrt() / phi;
                s2 * matern_correlation(smoothness, r)
            }
            Family::Polynomial { .. } => unreachable!("polynomial kernel is not stationary"),
        }
    }

    /// Estimate of `c(delta) = inf { (K(x1,x2)/K(x2,x2))^2 : |x1 - x2| <= delta }`.
    ///
    /// `x2` ranges over a `resolution^d` lattice spanning the domain (boundaries
    /// included) and `x1 = x2 + delta * e` for every axis direction and every
    /// diagonal direction `e`, clamped back into the domain.
    pub fn c_delta(&self, domain: &Domain, delta: f64, resolution: usize) -> Result<f64> {
        if resolution < 2 {
            return Err(invalid("c(delta) resolution must be at least 2"));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(invalid(format!("delta must be >= 0, got {delta}")));
        }
        let dim = domain.dim();
        if dim > 6 {
            return Err(invalid("c(delta) direction set is limited to d <= 6"));
        }
        if delta == 0.0 {
            return Ok(1.0);
        }
        let directions = probe_directions(dim);
        let total = resolution.pow(dim as u32);
        let mut best = 1.0f64;
        let mut idx = vec![0usize; dim];
        let mut x2 = vec![0.0; dim];
        let mut x1 = vec![0.0; dim];
        for _ in 0..total {
            for a in 0..dim {
                let t = idx[a] as f64 / (resolution - 1) as f64;
                x2[a] = domain.lower()[a] + t * domain.side(a);
            }
            let k22 = self.eval(&x2, &x2);
            if k22 > 0.0 {
                for e in &directions {
                    for a in 0..dim {
                        x1[a] = x2[a] + delta * e[a];
                    }
                    domain.clamp(&mut x1);
                    let ratio = self.eval(&x1, &x2) / k22;
                    best = best.min(ratio * ratio);
                }
            }
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < resolution {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(best.clamp(0.0, 1.0))
    }
}

/// `+-e_j` for every axis plus all `2^d` sign patterns of `(1,...,1)/sqrt(d)`.
fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for a in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[a] = s;
            dirs.push(e);
        }
    }
    if dim > 1 {
        let scale = 1.0 / (dim as f64).sqrt();
        for mask in 0..(1usize << dim) {
            dirs.push(
                (0..dim)
                    .map(|a| if mask >> a & 1 == 1 { -scale } else { scale })
                    .collect(),
            );
        }
    }
    dirs
}

/// `2^(1-nu)/Gamma(nu) * r^nu * K_nu(r)`, equal to 1 at `r = 0`.
pub(crate) fn matern_correlation(nu: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let log_prefactor = (1.0 - nu) * std::f64::consts::LN_2 - libm::lgamma(nu) + nu * r.ln() - r;
    let value = log_prefactor.exp() * bessel_k_scaled(nu, r);
    value.min(1.0)
}

/// `exp(r) * K_nu(r)` for `r > 0` from `K_nu(r) = int_0^inf exp(-r cosh t) cosh(nu t) dt`.
///
/// The trapezoid rule is spectrally accurate here: the integrand is analytic
/// in a strip and decays double-exponentially. The step shrinks with the
/// Gaussian width `1/sqrt(r)` of the peak at `t = 0` for large `r`.
pub(crate) fn bessel_k_scaled(nu: f64, r: f64) -> f64 {
    debug_assert!(r > 0.0);
    let h = 0.1f64.min(0.5 / r.sqrt());
    let f = |t: f64| (-r * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    let mut sum = 0.5 * f(0.0);
    for step in 1..2_000_000usize {
        let t = step as f64 * h;
        let term = f(t);
        sum += term;
        let past_peak = r * (t.cosh() - 1.0) > nu * t;
        if past_peak && term <= 1e-18 * sum {
            break;
        }
    }
    sum * h
}

impl Family {
    fn is_polynomial(&self) -> bool {
        matches!(self, Family::Polynomial { .. })
    }
}

impl fmt::Display for KernelSpec {
    /// Flat `key=value` form, e.g. `family=exponential range=0.25 variance=1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Exponential => write!(f, "family=exponential")?,
            Family::MaternTwoPointFive => write!(f, "family=matern25")?,
            Family::SquaredExponential => write!(f, "family=squared-exponential")?,
            Family::Matern { smoothness } => write!(f, "family=matern nu={smoothness}")?,
            Family::Polynomial { degree, offset } => {
                return write!(
                    f,
                    "family=polynomial degree={degree} offset={offset} variance={}",
                    self.variance
                )
            }
        }
        write!(f, " range={} variance={}", self.range, self.variance)
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut family = None;
        let mut range = None;
        let mut variance = 1.0;
        let mut nu = None;
        let mut degree = None;
        let mut offset = 0.0;
        let num = |key: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("kernel {key}={v:?}: {e}")))
        };
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("kernel token {token:?} is not key=value")))?;
            match key {
                "family" => family = Some(value.to_ascii_lowercase()),
                "range" | "phi" => range = Some(num(key, value)?),
                "variance" | "sigma2" => variance = num(key, value)?,
                "nu" | "smoothness" => nu = Some(num(key, value)?),
                "degree" => {
                    degree = Some(
                        value
                            .parse::<u32>()
                            .map_err(|e| Error::Parse(format!("kernel degree={value:?}: {e}")))?,
                    )
                }
                "offset" => offset = num(key, value)?,
                _ => return Err(Error::Parse(format!("unknown kernel key {key:?}"))),
            }
        }
        let family = family.ok_or_else(|| Error::Parse("kernel is missing family=".into()))?;
        let need_range =
            || range.ok_or_else(|| Error::Parse(format!("kernel family {family} needs range=")));
        let spec = match family.as_str() {
            "exponential" | "exp" => KernelSpec::new(Family::Exponential, need_range()?, variance),
            "matern25" | "matern2.5" | "matern-2.5" => {
                KernelSpec::new(Family::MaternTwoPointFive, need_range()?, variance)
            }
            "squared-exponential" | "squared_exponential" | "gaussian" | "se" => {
                KernelSpec::new(Family::SquaredExponential, need_range()?, variance)
            }
            "matern" => {
                let smoothness =
                    nu.ok_or_else(|| Error::Parse("matern kernel needs nu=".into()))?;
                KernelSpec::new(Family::Matern { smoothness }, need_range()?, variance)
            }
            "polynomial" | "poly" => {
                let degree =
                    degree.ok_or_else(|| Error::Parse("polynomial kernel needs degree=".into()))?;
                KernelSpec::new(
                    Family::Polynomial { degree, offset },
                    range.unwrap_or(1.0),
                    variance,
                )
            }
            other => return Err(Error::Parse(format!("unknown kernel family {other:?}"))),
        };
        spec.map_err(|e| Error::Parse(e.to_string()))
    }
}
