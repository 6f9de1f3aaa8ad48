//! Raster approximation of the Voronoi tessellation of a design.
//!
//! The domain is cut into `resolution^d` equal raster cells. Each raster cell
//! centre is assigned to its nearest site (ties to the lowest index), which
//! yields per-site cell areas, cell diameters, the largest diameter and the
//! max/min area ratio that the eigenvalue-tail bound requires.

use super::kdtree::KdTree;
use super::Design;
use crate::error::{invalid, Error, Result};

/// Per-cell areas and diameters of the rasterized Voronoi diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiSummary {
    pub areas: Vec<f64>,
    pub diameters: Vec<f64>,
    pub delta_max: f64,
    pub mesh_ratio: f64,
    pub raster_resolution: usize,
}

impl VoronoiSummary {
    /// Bound on `|sum(areas) - |D||` implied by rasterization.
    pub fn raster_tolerance(&self, dim: usize, volume: f64) -> f64 {
        2.0 * dim as f64 * volume / self.raster_resolution as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub passes: bool,
    pub delta_max: f64,
    pub mesh_ratio: f64,
}

/// `max(1000, 20 * ceil(n^(1/d)))` per axis for `d <= 2`; coarser for `d >= 3`
/// where the raster grows cubically.
pub fn default_raster_resolution(n: usize, dim: usize) -> usize {
    let per_axis = sites_per_axis(n, dim);
    if dim <= 2 {
        (20 * per_axis).max(1000)
    } else {
        (4 * per_axis).max(64)
    }
}

fn sites_per_axis(n: usize, dim: usize) -> usize {
    let mut r = (n as f64).powf(1.0 / dim as f64).round() as usize;
    while r.pow(dim as u32) < n {
        r += 1;
    }
    while r > 1 && (r - 1).pow(dim as u32) >= n {
        r -= 1;
    }
    r.max(1)
}

pub fn voronoi_summary(design: &Design, raster_resolution: usize) -> Result<VoronoiSummary> {
    let n = design.len();
    let dim = design.dim();
    let res = raster_resolution;
    if res < 2 * sites_per_axis(n, dim) {
        return Err(invalid(format!(
            "raster resolution {res} is below 2*ceil(n^(1/d)) = {}",
            2 * sites_per_axis(n, dim)
        )));
    }
    let total = res
        .checked_pow(dim as u32)
        .filter(|t| *t <= u32::MAX as usize)
        .ok_or_else(|| invalid("raster too large"))?;

    let domain = design.domain();
    let widths: Vec<f64> = (0..dim).map(|a| domain.side(a) / res as f64).collect();
    let cell_volume: f64 = widths.iter().product();
    let center = |idx: &[usize], out: &mut [f64]| {
        for a in 0..dim {
            out[a] = domain.lower()[a] + (idx[a] as f64 + 0.5) * widths[a];
        }
    };

    let tree = KdTree::build(&design.coords, dim);
    let mut owner = vec![0u32; total];
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    for slot in owner.iter_mut() {
        center(&idx, &mut x);
        *slot = tree.nearest(&x) as u32;
        advance(&mut idx, res);
    }

    let mut counts = vec![0usize; n];
    for &o in &owner {
        counts[o as usize] += 1;
    }
    if let Some(index) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyVoronoiCell {
            index,
            resolution: res,
        });
    }

    // Farthest pairs are convex-hull vertices, and a hull vertex always lacks an
    // axis neighbour inside its own cell, so only raster-boundary points matter.
    let strides: Vec<usize> = (0..dim).map(|a| res.pow((dim - 1 - a) as u32)).collect();
    let mut boundary: Vec<Vec<f64>> = vec![Vec::new(); n];
    idx.iter_mut().for_each(|v| *v = 0);
    for (flat, &o) in owner.iter().enumerate() {
        let on_edge = (0..dim).any(|a| {
            let i = idx[a];
            i == 0 || i + 1 == res || owner[flat - strides[a]] != o || owner[flat + strides[a]] != o
        });
        if on_edge {
            center(&idx, &mut x);
            boundary[o as usize].extend_from_slice(&x);
        }
        advance(&mut idx, res);
    }
    let diameters: Vec<f64> = boundary.iter().map(|pts| diameter(pts, dim)).collect();

    let areas: Vec<f64> = counts.iter().map(|&c| c as f64 * cell_volume).collect();
    let max_area = areas.iter().cloned().fold(f64::MIN, f64::max);
    let min_area = areas.iter().cloned().fold(f64::MAX, f64::min);
    let delta_max = diameters.iter().cloned().fold(0.0, f64::max);
    Ok(VoronoiSummary {
        areas,
        diameters,
        delta_max,
        mesh_ratio: max_area / min_area,
        raster_resolution: res,
    })
}

fn advance(idx: &mut [usize], res: usize) {
    for v in idx.iter_mut().rev() {
        *v += 1;
        if *v < res {
            return;
        }
        *v = 0;
    }
}

fn diameter(points: &[f64], dim: usize) -> f64 {
    let mut best = 0.0f64;
    let pts: Vec<&[f64]> = points.chunks_exact(dim).collect();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            let d2: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

/// Passes iff the mesh ratio is strictly below `gamma_bound`.
pub fn check_regularity(summary: &VoronoiSummary, gamma_bound: f64) -> RegularityReport {
    RegularityReport {
        passes: summary.mesh_ratio < gamma_bound,
        delta_max: summary.delta_max,
        mesh_ratio: summary.mesh_ratio,
    }
}
