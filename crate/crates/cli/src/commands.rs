use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lowrank_kriging::design::{default_raster_resolution, voronoi_summary};
use lowrank_kriging::kriging::{perturbation_mse, pseudo_insample_mse};
use lowrank_kriging::spectral::{
    assemble_covariance, condition_number, dense_eigenvalues, write_spectrum_csv,
};
use lowrank_kriging::{grid_design, random_design, Design, EigenSystem};

use crate::config::{Config, DesignChoice};
use crate::Failure;

pub fn build_design(cfg: &Config) -> Result<Design, Failure> {
    Ok(match cfg.design {
        DesignChoice::Grid { m } => grid_design(m, &cfg.domain)?,
        DesignChoice::Random { n } => random_design(n, &cfg.domain, cfg.seed)?,
    })
}

/// Full spectra of the configured kernels on the configured design, computed on demand.
#[derive(Default)]
pub struct SpectrumCache {
    spectra: BTreeMap<String, EigenSystem>,
}

impl SpectrumCache {
    pub fn get(
        &mut self,
        cfg: &Config,
        design: &Design,
        name: &str,
    ) -> Result<&EigenSystem, Failure> {
        if !self.spectra.contains_key(name) {
            let spec = cfg.kernels[name];
            let v = assemble_covariance(&spec, design)?;
            let es = dense_eigenvalues(v.as_ref())?;
            self.spectra.insert(name.to_string(), es);
        }
        Ok(&self.spectra[name])
    }
}

pub(crate) fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf), Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    Ok((BufWriter::new(File::create(&path)?), path))
}

pub fn eigen_decay(cfg: &Config) -> Result<Vec<PathBuf>, Failure> {
    let design = build_design(cfg)?;
    let mut cache = SpectrumCache::default();
    let mut written = Vec::new();
    for name in cfg.kernels.keys() {
        let es = cache.get(cfg, &design, name)?;
        let (mut out, path) = create(&cfg.output_dir, &format!("spectrum_{name}.csv"))?;
        write_spectrum_csv(es.eigenvalues(), &mut out)?;
        out.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn table2(cfg: &Config) -> Result<Vec<PathBuf>, Failure> {
    let design = build_design(cfg)?;
    let mut cache = SpectrumCache::default();
    let es = cache.get(cfg, &design, &cfg.table2_kernel)?;
    let n = es.n();
    if let Some(&k) = cfg.k_list.iter().find(|&&k| k > n) {
        return Err(Failure::Config(format!("k = {k} exceeds n = {n}")));
    }
    let (mut out, path) = create(&cfg.output_dir, "table2.csv")?;
    writeln!(out, "k,tau,cond_paper,cond_strict,mse_spectral")?;
    for &k in &cfg.k_list {
        for &tau in &cfg.tau_list {
            let cond = condition_number(es, tau)?;
            let mse = perturbation_mse(es.eigenvalues(), k, tau)?;
            writeln!(
                out,
                "{k},{tau},{},{},{mse}",
                cond.paper_convention.unwrap_or(f64::NAN),
                cond.strict
            )?;
        }
    }
    out.flush()?;
    let (mut summary, spath) = create(&cfg.output_dir, "table2_summary.csv")?;
    writeln!(summary, "kernel,n,k,lambda_1,lambda_min,pseudo_tail")?;
    let lam = es.eigenvalues();
    for &k in &cfg.k_list {
        writeln!(
            summary,
            "{},{n},{k},{},{},{}",
            cfg.table2_kernel,
            lam[0],
            lam[n - 1],
            pseudo_insample_mse(lam, k)
        )?;
    }
    summary.flush()?;
    Ok(vec![path, spath])
}

pub fn voronoi(cfg: &Config) -> Result<Vec<PathBuf>, Failure> {
    let design = build_design(cfg)?;
    let res = cfg
        .raster_resolution
        .unwrap_or_else(|| default_raster_resolution(design.len(), design.dim()));
    let s = voronoi_summary(&design, res)?;
    let (mut cells, cpath) = create(&cfg.output_dir, "voronoi_cells.csv")?;
    writeln!(cells, "i,area,diameter")?;
    for (i, (a, d)) in s.areas.iter().zip(&s.diameters).enumerate() {
        writeln!(cells, "{i},{a},{d}")?;
    }
    cells.flush()?;
    let (mut summary, spath) = create(&cfg.output_dir, "voronoi_summary.csv")?;
    writeln!(summary, "kernel,delta_max,mesh_ratio,c_delta_max")?;
    for (name, spec) in &cfg.kernels {
        let c = spec.c_delta(&cfg.domain, s.delta_max, cfg.c_delta_resolution)?;
        writeln!(summary, "{name},{},{},{c}", s.delta_max, s.mesh_ratio)?;
    }
    summary.flush()?;
    Ok(vec![cpath, spath])
}
