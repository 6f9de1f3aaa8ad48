//! The `verify` suite: named checks, each producing report rows.

use std::io::Write;
use std::path::PathBuf;

use lowrank_kriging::design::{default_raster_resolution, voronoi_summary};
use lowrank_kriging::kriging::{excess_risk, perturbation_mse, perturbation_mse_oracle};
use lowrank_kriging::optimality::{
    eckart_young_check, optimality_b_decomposition, optimality_c_check, predictive_dominance_check,
    projection_residual, subspace_integrated_residual, SubspaceSpec,
};
use lowrank_kriging::report::{write_check_csv, CheckRow};
use lowrank_kriging::spectral::{
    assemble_covariance, condition_number, continuous_spectrum, dense_eigen, dense_eigenvalues,
    tail_sums, truncated_eigen, TailBoundConstants, TruncatedParams,
};
use lowrank_kriging::{fit, grid_design, random_design, FitMode, KernelSpec, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::commands::{build_design, create, SpectrumCache};
use crate::config::{Config, Golden};
use crate::Failure;

type Check = fn(&Config, &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure>;

pub const CHECKS: [(&str, Check); 13] = [
    ("oracle", oracle),
    ("excess-risk", excess),
    ("optimality-c", optimality_c),
    ("subspace-invariance", invariance),
    ("optimality-b", optimality_b),
    ("eckart-young", eckart_young),
    ("lemma2", lemma2),
    ("condition-growth", condition_growth),
    ("tail-bound", tail_bound),
    ("randomized", randomized),
    ("polynomial-rank", polynomial_rank),
    ("interpolation", interpolation),
    ("golden", golden),
];

pub struct Outcome {
    pub rows: Vec<CheckRow>,
    pub report: PathBuf,
    /// `(name, rows, passed)` for every check that ran.
    pub summary: Vec<(String, usize, bool)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.summary.iter().all(|s| s.2)
    }
}

pub fn run(cfg: &Config, only: &[String]) -> Result<Outcome, Failure> {
    for name in only {
        if !CHECKS.iter().any(|(n, _)| n == name) {
            let known: Vec<&str> = CHECKS.iter().map(|c| c.0).collect();
            return Err(Failure::Config(format!(
                "unknown check `{name}`; known checks: {}",
                known.join(", ")
            )));
        }
    }
    let mut cache = SpectrumCache::default();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (name, check) in CHECKS {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let r = check(cfg, &mut cache)?;
        summary.push((name.to_string(), r.len(), r.iter().all(|row| row.pass)));
        rows.extend(r);
    }
    let (mut out, report) = create(&cfg.output_dir, "verify_report.csv")?;
    write_check_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(Outcome {
        rows,
        report,
        summary,
    })
}

fn kernel(cfg: &Config, name: &str) -> KernelSpec {
    cfg.kernels[name]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn oracle(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let v = &cfg.verify;
    let spec = kernel(cfg, &v.kernel);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for i in 0..v.oracle_instances {
        let n = rng.random_range(3..=v.oracle_max_n.max(3));
        let k = rng.random_range(0..=n);
        let tau = 10f64.powf(rng.random_range(-2.0..1.0));
        let d = random_design(n, &cfg.domain, rng.random())?;
        let vm = assemble_covariance(&spec, &d)?;
        let formula = perturbation_mse(dense_eigenvalues(vm.as_ref())?.eigenvalues(), k, tau)?;
        let oracle = perturbation_mse_oracle(vm.as_ref(), k, tau)?;
        rows.push(CheckRow::new(
            "oracle",
            format!("n={n} tau={tau:.4e} #{i}"),
            Some(k),
            formula,
            oracle,
            rel(formula, oracle) <= 1e-8,
        ));
    }
    Ok(rows)
}

fn excess(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let v = &cfg.verify;
    let spec = kernel(cfg, &v.kernel);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5);
    let mut rows = Vec::new();
    for &n in &v.excess_sizes {
        let d = random_design(n, &cfg.domain, rng.random())?;
        let exact = fit(&spec, &d, FitMode::Exact)?;
        let sites: Vec<Vec<f64>> = (0..v.excess_points)
            .map(|_| {
                (0..cfg.domain.dim())
                    .map(|a| cfg.domain.lower()[a] + rng.random::<f64>() * cfg.domain.side(a))
                    .collect()
            })
            .collect();
        for k in [n / 4, n / 2].into_iter().filter(|&k| k > 0) {
            let pseudo = fit(&spec, &d, FitMode::PseudoRank { k })?;
            for (j, s) in sites.iter().enumerate() {
                let alpha = exact.predict(s)?.weights;
                let r = excess_risk(&pseudo, &alpha, s)?;
                rows.push(CheckRow::new(
                    "excess-risk",
                    format!("n={n} site={j}"),
                    Some(k),
                    r.excess,
                    r.bound,
                    r.excess >= 0.0 && r.excess <= r.bound + 1e-10,
                ));
            }
        }
    }
    Ok(rows)
}

fn verify_grid_covariance(
    cfg: &Config,
) -> Result<(KernelSpec, lowrank_kriging::Design, Mat<f64>), Failure> {
    let spec = kernel(cfg, &cfg.verify.kernel);
    let g = grid_design(cfg.verify.grid_m, &cfg.domain)?;
    let v = assemble_covariance(&spec, &g)?;
    Ok((spec, g, v))
}

fn optimality_c(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let (_, g, v) = verify_grid_covariance(cfg)?;
    let k = cfg.verify.subspace_k.min(g.len());
    let r = optimality_c_check(v.as_ref(), k, cfg.verify.subspace_trials, cfg.seed)?;
    let inst = format!("grid n={}", g.len());
    Ok(vec![
        CheckRow::new(
            "optimality-c-exact",
            inst.clone(),
            Some(k),
            r.optimum,
            r.closed_form,
            r.exact(g.len() as f64),
        ),
        CheckRow::new(
            "optimality-c-random",
            format!("{inst} trials={}", r.trials),
            Some(k),
            r.best_competitor,
            r.closed_form,
            r.dominated(),
        ),
    ])
}

fn invariance(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let (_, g, v) = verify_grid_covariance(cfg)?;
    let n = g.len();
    let k = cfg.verify.subspace_k.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x17);
    let mut rows = Vec::new();
    for t in 0..5 {
        let b = Mat::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = Mat::from_fn(k, k, |i, j| {
            let x: f64 = rng.sample(StandardNormal);
            if i == j {
                1.0 + x.abs()
            } else if i > j {
                x
            } else {
                0.0
            }
        });
        let bm = &b * &m;
        let r1 = projection_residual(v.as_ref(), &SubspaceSpec::new(b)?)?;
        let r2 = projection_residual(v.as_ref(), &SubspaceSpec::new(bm)?)?;
        rows.push(CheckRow::new(
            "subspace-invariance",
            format!("grid n={n} #{t}"),
            Some(k),
            r1,
            r2,
            (r1 - r2).abs() <= 1e-8 * r1.abs() + 1e-13 * n as f64,
        ));
    }
    Ok(rows)
}

fn optimality_b(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let (spec, g, v) = verify_grid_covariance(cfg)?;
    let k = cfg.verify.subspace_k.min(g.len());
    let opt = optimality_b_decomposition(&spec, &g, k, cfg.quadrature_m)?;
    let es = dense_eigen(v.as_ref())?;
    let eig = SubspaceSpec::new(es.eigenvectors().expect("vectors").subcols(0, k).to_owned())?;
    let c_value = subspace_integrated_residual(&spec, &g, &eig, cfg.quadrature_m)?;
    let total = optimality_b_decomposition(&spec, &g, 0, cfg.quadrature_m)?;
    let variance_integral: f64 = spec.variance() * cfg.domain.volume();
    let stationary = spec.is_stationary();
    Ok(vec![
        CheckRow::new(
            "optimality-b-vs-c",
            format!("grid n={} m={}", g.len(), cfg.quadrature_m),
            Some(k),
            opt.minimum(),
            c_value,
            opt.minimum() <= c_value + 1e-12,
        ),
        CheckRow::new(
            "optimality-b-total-variance",
            format!("grid n={} m={}", g.len(), cfg.quadrature_m),
            Some(0),
            total.minimum(),
            variance_integral,
            !stationary || rel(total.minimum(), variance_integral) <= 1e-8,
        ),
    ])
}

fn eckart_young(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let (_, g, v) = verify_grid_covariance(cfg)?;
    let k = cfg.verify.subspace_k.min(g.len());
    let r = eckart_young_check(v.as_ref(), k, cfg.verify.eckart_young_trials, cfg.seed)?;
    let scale: f64 = (0..g.len()).map(|i| v[(i, i)]).sum();
    Ok(vec![
        CheckRow::new(
            "eckart-young-exact",
            format!("grid n={}", g.len()),
            Some(k),
            r.optimum,
            r.closed_form,
            r.exact(scale * scale),
        ),
        CheckRow::new(
            "eckart-young-random",
            format!("grid n={} trials={}", g.len(), r.trials),
            Some(k),
            r.best_competitor,
            r.closed_form,
            r.dominated(),
        ),
    ])
}

fn lemma2(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let spec = kernel(cfg, &cfg.verify.kernel);
    let g = grid_design(cfg.verify.grid_m, &cfg.domain)?;
    let r = predictive_dominance_check(&spec, &g, cfg.quadrature_m, cfg.verify.dominance_count)?;
    Ok(r.star
        .iter()
        .zip(&r.continuous)
        .enumerate()
        .map(|(i, (s, c))| {
            CheckRow::new(
                "lemma2",
                format!("grid n={} m={} i={}", g.len(), cfg.quadrature_m, i + 1),
                None,
                *s,
                c + r.tolerance,
                *s <= c + r.tolerance,
            )
        })
        .collect())
}

fn condition_growth(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let mut rows = Vec::new();
    for (name, spec) in cfg.kernels.iter().filter(|(_, s)| s.is_stationary()) {
        let mut prev: Option<(usize, f64)> = None;
        for &m in &cfg.verify.growth_sides {
            let g = grid_design(m, &cfg.domain)?;
            let v = assemble_covariance(spec, &g)?;
            let es = dense_eigenvalues(v.as_ref())?;
            let n = g.len();
            let ratio = es.eigenvalues()[0] / es.eigenvalues()[n.div_ceil(2) - 1];
            if let Some((pn, pr)) = prev {
                rows.push(CheckRow::new(
                    "condition-growth",
                    format!("{name} n={pn}->{n}"),
                    None,
                    pr,
                    ratio,
                    pr > 0.0 && ratio > pr,
                ));
            }
            prev = Some((n, ratio));
        }
    }
    Ok(rows)
}

fn tail_bound(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let name = &cfg.verify.smooth_kernel;
    let spec = kernel(cfg, name);
    let cont = continuous_spectrum(&spec, &cfg.domain, cfg.quadrature_m)?;
    let cont_tail = tail_sums(&cont.eigenvalues);
    let geometry = |m: usize| -> Result<_, Failure> {
        let g = grid_design(m, &cfg.domain)?;
        let res = cfg
            .raster_resolution
            .unwrap_or_else(|| default_raster_resolution(g.len(), g.dim()));
        let s = voronoi_summary(&g, res)?;
        let c = spec.c_delta(&cfg.domain, s.delta_max, cfg.c_delta_resolution)?;
        Ok((g, s.mesh_ratio, c))
    };
    let (_, gamma, c_min) = geometry(cfg.verify.tail_sides[0])?;
    let max_var = spec.variance();
    let constants = TailBoundConstants::calibrate(gamma, c_min, cfg.domain.volume(), max_var);
    let mut rows = Vec::new();
    for &m in &cfg.verify.tail_sides {
        let (g, _, c) = geometry(m)?;
        let v = assemble_covariance(&spec, &g)?;
        let tails = tail_sums(dense_eigenvalues(v.as_ref())?.eigenvalues());
        let n = g.len() as f64;
        for &k in &cfg.verify.tail_k {
            let lhs = tails.tail_after(k) / n;
            let rhs = constants.rhs(cont_tail.tail_after(k), c);
            rows.push(CheckRow::new(
                "tail-bound",
                format!("{name} n={}", g.len()),
                Some(k),
                lhs,
                rhs,
                lhs <= rhs,
            ));
        }
    }
    Ok(rows)
}

fn randomized(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let spec = kernel(cfg, &cfg.verify.smooth_kernel);
    let g = grid_design(cfg.verify.randomized_m, &cfg.domain)?;
    let v = assemble_covariance(&spec, &g)?;
    let k = cfg.verify.randomized_k;
    let params = TruncatedParams {
        seed: cfg.seed,
        ..TruncatedParams::new(k)
    };
    let fast = truncated_eigen(&v, params)?;
    let dense = dense_eigenvalues(v.as_ref())?;
    Ok((0..k)
        .map(|i| {
            let (a, b) = (fast.eigenvalues()[i], dense.eigenvalues()[i]);
            CheckRow::new(
                "randomized",
                format!("grid n={} i={}", g.len(), i + 1),
                Some(k),
                a,
                b,
                rel(a, b) <= 1e-6,
            )
        })
        .collect())
}

fn polynomial_rank(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let spec = KernelSpec::polynomial(2, 1.0)?;
    let d = cfg.domain.dim();
    // monomials of degree <= 2 in d variables
    let rank = (d + 1) * (d + 2) / 2;
    let mut rows = Vec::new();
    for (inst, design) in [
        ("random n=50", random_design(50, &cfg.domain, cfg.seed)?),
        ("grid", grid_design(cfg.verify.grid_m, &cfg.domain)?),
    ] {
        if design.len() <= rank {
            continue;
        }
        let v = assemble_covariance(&spec, &design)?;
        let es = dense_eigenvalues(v.as_ref())?;
        let ratio = es.eigenvalues()[rank].abs() / es.eigenvalues()[0];
        rows.push(CheckRow::new(
            "polynomial-rank",
            format!("{inst} n={}", design.len()),
            Some(rank),
            ratio,
            1e-10,
            ratio <= 1e-10,
        ));
    }
    Ok(rows)
}

fn interpolation(cfg: &Config, _: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    let spec = kernel(cfg, &cfg.verify.kernel);
    let n = 30;
    let d = random_design(n, &cfg.domain, cfg.seed ^ 0x29)?;
    let y: Vec<f64> = (0..n).map(|i| (0.7 * i as f64).sin()).collect();
    let mut rows = Vec::new();
    for mode in [FitMode::Exact, FitMode::PseudoRank { k: n }] {
        let model = fit(&spec, &d, mode)?;
        let mut worst = 0.0f64;
        for (j, yj) in y.iter().enumerate() {
            let p = model.predict(d.point(j))?;
            worst = worst.max((p.value(&y)? - yj).abs()).max(p.variance.abs());
        }
        rows.push(CheckRow::new(
            "interpolation",
            format!("{} n={n}", model.mode_name()),
            Some(model.rank()),
            worst,
            1e-8,
            worst <= 1e-8,
        ));
    }
    Ok(rows)
}

fn golden(cfg: &Config, cache: &mut SpectrumCache) -> Result<Vec<CheckRow>, Failure> {
    if cfg.golden.is_empty() {
        return Ok(Vec::new());
    }
    let design = build_design(cfg)?;
    let n = design.len();
    let mut rows = Vec::new();
    let check_k = |k: usize| -> Result<(), Failure> {
        if k > n {
            return Err(Failure::Config(format!("golden k = {k} exceeds n = {n}")));
        }
        Ok(())
    };
    for g in &cfg.golden {
        match g {
            Golden::CumSum {
                kernel,
                k,
                value,
                tol,
            } => {
                check_k(*k)?;
                let es = cache.get(cfg, &design, kernel)?;
                let got = tail_sums(es.eigenvalues()).cumulative[k - 1];
                rows.push(CheckRow::new(
                    "golden-cumsum",
                    format!("{kernel} n={n}"),
                    Some(*k),
                    got,
                    *value,
                    (got - value).abs() <= *tol,
                ));
            }
            Golden::Mse { k, tau, value } | Golden::Cond { k, tau, value } => {
                check_k(*k)?;
                let es = cache.get(cfg, &design, &cfg.table2_kernel)?;
                let (label, got) = if matches!(g, Golden::Mse { .. }) {
                    ("golden-mse", perturbation_mse(es.eigenvalues(), *k, *tau)?)
                } else {
                    let c = condition_number(es, *tau)?;
                    ("golden-cond", c.paper_convention.unwrap_or(f64::NAN))
                };
                rows.push(CheckRow::new(
                    label,
                    format!("{} n={n} tau={tau}", cfg.table2_kernel),
                    Some(*k),
                    got,
                    *value,
                    rel(got, *value) <= cfg.golden_rel_tol,
                ));
            }
            Golden::PseudoTail { k, value, rel_tol } => {
                check_k(*k)?;
                let es = cache.get(cfg, &design, &cfg.table2_kernel)?;
                let got = tail_sums(es.eigenvalues()).tail_after(*k);
                rows.push(CheckRow::new(
                    "golden-pseudo-tail",
                    format!("{} n={n}", cfg.table2_kernel),
                    Some(*k),
                    got,
                    *value,
                    rel(got, *value) <= *rel_tol,
                ));
            }
        }
    }
    Ok(rows)
}
