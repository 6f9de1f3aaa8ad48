//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Keys:
//!
//! ```text
//! kernel.<name>     = <kernel text form>     (any number; replaces the defaults)
//! design            = grid | random
//! grid_m            = 70
//! random_n          = 100
//! seed              = 7
//! domain            = 0,1,0,1                 (lower,upper per axis; d <= 3)
//! k_list            = 100
//! tau_list          = 0.001,0.01,0.1,1
//! quadrature_m      = 1600
//! output_dir        = lrk-output
//! max_matrix_bytes  = 2147483648
//! gamma_bound       = 4
//! raster_resolution = 1400                    (default: derived from n)
//! c_delta_resolution= 51
//! table2_kernel     = K3
//! verify.<setting>  = ...                     (see VerifySettings)
//! golden.cumsum.<kernel>.<k>  = value,abs_tol
//! golden.mse.<k>.<tau>        = value         (relative tolerance golden.rel_tol)
//! golden.cond.<k>.<tau>       = value
//! golden.pseudo_tail.<k>      = value,rel_tol
//! golden.rel_tol              = 0.01
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use lowrank_kriging::spectral::DEFAULT_MAX_MATRIX_BYTES;
use lowrank_kriging::{Domain, KernelSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum DesignChoice {
    Grid { m: usize },
    Random { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Golden {
    CumSum {
        kernel: String,
        k: usize,
        value: f64,
        tol: f64,
    },
    Mse {
        k: usize,
        tau: f64,
        value: f64,
    },
    Cond {
        k: usize,
        tau: f64,
        value: f64,
    },
    PseudoTail {
        k: usize,
        value: f64,
        rel_tol: f64,
    },
}

/// Sizes for the `verify` suite.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    /// Kernel used by the single-kernel checks.
    pub kernel: String,
    pub oracle_instances: usize,
    pub oracle_max_n: usize,
    pub excess_sizes: Vec<usize>,
    pub excess_points: usize,
    /// Side of the grid used by the optimality and predictive-dominance checks.
    pub grid_m: usize,
    pub subspace_k: usize,
    pub subspace_trials: usize,
    pub eckart_young_trials: usize,
    pub dominance_count: usize,
    pub growth_sides: Vec<usize>,
    /// Smooth kernel used by the tail-bound and randomized-solver checks.
    pub smooth_kernel: String,
    /// First side is the calibration design.
    pub tail_sides: Vec<usize>,
    pub tail_k: Vec<usize>,
    pub randomized_m: usize,
    pub randomized_k: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            kernel: "K1".into(),
            oracle_instances: 50,
            oracle_max_n: 200,
            excess_sizes: vec![50, 100, 200],
            excess_points: 20,
            grid_m: 10,
            subspace_k: 10,
            subspace_trials: 500,
            eckart_young_trials: 200,
            dominance_count: 50,
            growth_sides: vec![10, 20, 30, 40],
            smooth_kernel: "K3".into(),
            tail_sides: vec![20, 40],
            tail_k: vec![5, 10, 20, 40],
            randomized_m: 40,
            randomized_k: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernels: BTreeMap<String, KernelSpec>,
    pub design: DesignChoice,
    pub domain: Domain,
    pub seed: u64,
    pub k_list: Vec<usize>,
    pub tau_list: Vec<f64>,
    pub quadrature_m: usize,
    pub output_dir: PathBuf,
    pub max_matrix_bytes: u64,
    pub gamma_bound: f64,
    pub raster_resolution: Option<usize>,
    pub c_delta_resolution: usize,
    pub table2_kernel: String,
    pub verify: VerifySettings,
    pub golden: Vec<Golden>,
    pub golden_rel_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        let kernels = [
            ("K1", KernelSpec::exponential(0.25)),
            ("K2", KernelSpec::matern_two_point_five(0.25)),
            ("K3", KernelSpec::squared_exponential(0.1)),
            ("K4", KernelSpec::polynomial(2, 1.0)),
        ]
        .into_iter()
        .map(|(n, k)| (n.to_string(), k.expect("default kernels are valid")))
        .collect();
        Self {
            kernels,
            design: DesignChoice::Grid { m: 70 },
            domain: Domain::unit_square(),
            seed: 7,
            k_list: vec![100],
            tau_list: vec![0.001, 0.01, 0.1, 1.0],
            quadrature_m: 1600,
            output_dir: PathBuf::from("lrk-output"),
            max_matrix_bytes: DEFAULT_MAX_MATRIX_BYTES,
            gamma_bound: 4.0,
            raster_resolution: None,
            c_delta_resolution: 51,
            table2_kernel: "K3".into(),
            verify: VerifySettings::default(),
            golden: Vec::new(),
            golden_rel_tol: 0.01,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("duplicate key `{0}`")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Value { key: String, reason: String },
    #[error("{0}")]
    Inconsistent(String),
}

fn value_err(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e: T::Err| value_err(key, e))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(value_err(key, "empty list"));
    }
    Ok(items)
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64), ConfigError> {
    match parse_list::<f64>(key, v)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(value_err(key, "expected `value,tolerance`")),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if !seen.insert(k.to_string()) {
                return Err(ConfigError::Duplicate(k.to_string()));
            }
            pairs.push((k.to_string(), v.to_string()));
        }
        let mut cfg = Config::default();
        let mut kernels = BTreeMap::new();
        let mut grid_m = None;
        let mut random_n = None;
        let mut design = None;
        for (k, v) in &pairs {
            let (k, v) = (k.as_str(), v.as_str());
            if let Some(name) = k.strip_prefix("kernel.") {
                if name.is_empty()
                    || !name
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                {
                    return Err(value_err(k, "kernel names use [A-Za-z0-9_-]"));
                }
                kernels.insert(name.to_string(), v.parse().map_err(|e| value_err(k, e))?);
                continue;
            }
            if let Some(rest) = k.strip_prefix("golden.") {
                cfg.apply_golden(k, rest, v)?;
                continue;
            }
            if let Some(rest) = k.strip_prefix("verify.") {
                cfg.apply_verify(k, rest, v)?;
                continue;
            }
            match k {
                "design" => design = Some(v.to_string()),
                "grid_m" => grid_m = Some(parse_num(k, v)?),
                "random_n" => random_n = Some(parse_num(k, v)?),
                "seed" => cfg.seed = parse_num(k, v)?,
                "domain" => cfg.domain = Domain::parse_bounds(v).map_err(|e| value_err(k, e))?,
                "k_list" => cfg.k_list = parse_list(k, v)?,
                "tau_list" => cfg.tau_list = parse_list(k, v)?,
                "quadrature_m" => cfg.quadrature_m = parse_num(k, v)?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                "max_matrix_bytes" => cfg.max_matrix_bytes = parse_num(k, v)?,
                "gamma_bound" => cfg.gamma_bound = parse_num(k, v)?,
                "raster_resolution" => cfg.raster_resolution = Some(parse_num(k, v)?),
                "c_delta_resolution" => cfg.c_delta_resolution = parse_num(k, v)?,
                "table2_kernel" => cfg.table2_kernel = v.to_string(),
                _ => return Err(ConfigError::UnknownKey(k.to_string())),
            }
        }
        if !kernels.is_empty() {
            cfg.kernels = kernels;
        }
        cfg.design = match design.as_deref() {
            None | Some("grid") => DesignChoice::Grid {
                m: grid_m.unwrap_or(70),
            },
            Some("random") => DesignChoice::Random {
                n: random_n.unwrap_or(100),
            },
            Some(other) => {
                return Err(value_err("design", format!("`{other}` is not grid|random")))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_golden(&mut self, key: &str, rest: &str, v: &str) -> Result<(), ConfigError> {
        let bad = || value_err(key, "malformed golden key");
        if rest == "rel_tol" {
            self.golden_rel_tol = parse_num(key, v)?;
        } else if let Some(r) = rest.strip_prefix("cumsum.") {
            let (kernel, k) = r.rsplit_once('.').ok_or_else(bad)?;
            let (value, tol) = parse_pair(key, v)?;
            self.golden.push(Golden::CumSum {
                kernel: kernel.to_string(),
                k: parse_num(key, k)?,
                value,
                tol,
            });
        } else if let Some(r) = rest
            .strip_prefix("mse.")
            .or_else(|| rest.strip_prefix("cond."))
        {
            let (k, tau) = r.split_once('.').ok_or_else(bad)?;
            let (k, tau) = (parse_num(key, k)?, parse_num(key, tau)?);
            let value = parse_num(key, v)?;
            self.golden.push(if rest.starts_with("mse.") {
                Golden::Mse { k, tau, value }
            } else {
                Golden::Cond { k, tau, value }
            });
        } else if let Some(k) = rest.strip_prefix("pseudo_tail.") {
            let (value, rel_tol) = parse_pair(key, v)?;
            self.golden.push(Golden::PseudoTail {
                k: parse_num(key, k)?,
                value,
                rel_tol,
            });
        } else {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        Ok(())
    }

    fn apply_verify(&mut self, key: &str, rest: &str, v: &str) -> Result<(), ConfigError> {
        let s = &mut self.verify;
        match rest {
            "kernel" => s.kernel = v.to_string(),
            "oracle_instances" => s.oracle_instances = parse_num(key, v)?,
            "oracle_max_n" => s.oracle_max_n = parse_num(key, v)?,
            "excess_sizes" => s.excess_sizes = parse_list(key, v)?,
            "excess_points" => s.excess_points = parse_num(key, v)?,
            "grid_m" => s.grid_m = parse_num(key, v)?,
            "subspace_k" => s.subspace_k = parse_num(key, v)?,
            "subspace_trials" => s.subspace_trials = parse_num(key, v)?,
            "eckart_young_trials" => s.eckart_young_trials = parse_num(key, v)?,
            "dominance_count" => s.dominance_count = parse_num(key, v)?,
            "growth_sides" => s.growth_sides = parse_list(key, v)?,
            "smooth_kernel" => s.smooth_kernel = v.to_string(),
            "tail_sides" => s.tail_sides = parse_list(key, v)?,
            "tail_k" => s.tail_k = parse_list(key, v)?,
            "randomized_m" => s.randomized_m = parse_num(key, v)?,
            "randomized_k" => s.randomized_k = parse_num(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Checks the cross-field invariants; called after parsing and after CLI overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Inconsistent(m));
        if !(1..=3).contains(&self.domain.dim()) {
            return bad(format!(
                "domain dimension {} is outside 1..=3",
                self.domain.dim()
            ));
        }
        match self.design {
            DesignChoice::Grid { m: 0 } => return bad("grid_m must be positive".into()),
            DesignChoice::Random { n: 0 } => return bad("random_n must be positive".into()),
            _ => {}
        }
        if self.kernels.is_empty() {
            return bad("no kernels configured".into());
        }
        for name in [
            &self.table2_kernel,
            &self.verify.kernel,
            &self.verify.smooth_kernel,
        ] {
            if !self.kernels.contains_key(name) {
                return bad(format!("kernel `{name}` is referenced but not configured"));
            }
        }
        for g in &self.golden {
            if let Golden::CumSum { kernel, .. } = g {
                if !self.kernels.contains_key(kernel) {
                    return bad(format!("golden value for unknown kernel `{kernel}`"));
                }
            }
        }
        if self.k_list.contains(&0) {
            return bad("k_list entries must be positive".into());
        }
        if self.tau_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("tau_list entries must be positive".into());
        }
        if self.quadrature_m < 100 {
            return bad("quadrature_m must be at least 100".into());
        }
        if !(self.gamma_bound.is_finite() && self.gamma_bound >= 1.0) {
            return bad("gamma_bound must be >= 1".into());
        }
        if self.c_delta_resolution < 2 {
            return bad("c_delta_resolution must be at least 2".into());
        }
        if self.verify.tail_sides.is_empty() || self.verify.growth_sides.len() < 2 {
            return bad("verify.tail_sides needs one side and verify.growth_sides two".into());
        }
        Ok(())
    }
}
