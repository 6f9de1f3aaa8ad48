//! Sampling designs on axis-aligned box domains.
//!
//! A [`Design`] is an ordered list of distinct sites inside a [`Domain`].
//! Grid designs reproduce the shifted regular lattice used for the eigenvalue
//! studies; random designs provide irregular configurations for property tests.
//! Voronoi regularity diagnostics live in [`voronoi`].

mod kdtree;
pub mod voronoi;

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

pub use voronoi::{
    check_regularity, default_raster_resolution, voronoi_summary, RegularityReport, VoronoiSummary,
};

/// Axis-aligned box `[a_1, b_1] x ... x [a_d, b_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(invalid("domain must have dimension >= 1"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite);
            }
            if a >= b {
                return Err(invalid(format!("empty domain axis [{a}, {b}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit_square() -> Self {
        Self::unit_cube(2)
    }

    pub fn unit_cube(dim: usize) -> Self {
        assert!(dim >= 1, "domain dimension must be >= 1");
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// `|D|`, the area or volume.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    /// Length of the main diagonal, the largest distance between two points of the box.
    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.side(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (a, b)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*a, *b);
        }
    }

    /// Parses `a1,b1,a2,b2,...`.
    pub fn parse_bounds(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("domain bound {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() || values.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "domain needs lower,upper pairs, got {} values",
                values.len()
            )));
        }
        let (lower, upper) = values.chunks(2).map(|p| (p[0], p[1])).unzip();
        Self::new(lower, upper)
    }
}

/// Ordered set of distinct sampling sites `s_1, ..., s_n` inside a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    domain: Domain,
    // row-major, n x dim
    coords: Vec<f64>,
}

impl Design {
    pub fn new(domain: Domain, locations: Vec<Vec<f64>>) -> Result<Self> {
        let dim = domain.dim();
        let mut coords = Vec::with_capacity(locations.len() * dim);
        for p in &locations {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(domain, coords)
    }

    pub(crate) fn from_flat(domain: Domain, coords: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        if coords.is_empty() {
            return Err(invalid("design must contain at least one location"));
        }
        debug_assert_eq!(coords.len() % dim, 0);
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let design = Self { domain, coords };
        for i in 0..design.len() {
            if !design.domain.contains(design.point(i)) {
                return Err(invalid(format!("location {i} lies outside the domain")));
            }
        }
        if let Some((i, j)) = design.find_duplicate() {
            return Err(invalid(format!("locations {i} and {j} coincide")));
        }
        Ok(design)
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order
            .windows(2)
            .find(|w| self.point(w[0]) == self.point(w[1]))
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    /// Writes `x1,...,xd` header and one location per row in index order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|a| format!("x{a}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(domain: Domain, input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty design file".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let cols = header.split(',').count();
        if cols != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: cols,
            });
        }
        let mut coords = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let before = coords.len();
            for field in line.split(',') {
                let v = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)))?;
                coords.push(v);
            }
            if coords.len() - before != cols {
                return Err(Error::Parse(format!("row {} has wrong arity", row + 1)));
            }
        }
        Self::from_flat(domain, coords)
    }
}

/// The `m^d` shifted lattice `{(i/(m+0.5), j/(m+0.5), ...) : i, j = 1..m}`
/// mapped affinely into `domain`. The first coordinate varies slowest.
pub fn grid_design(m: usize, domain: &Domain) -> Result<Design> {
    if m == 0 {
        return Err(invalid("grid size m must be positive"));
    }
    let d = domain.dim();
    let total = m
        .checked_pow(d as u32)
        .ok_or_else(|| invalid("grid too large"))?;
    let denom = m as f64 + 0.5;
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        for (axis, &i) in idx.iter().enumerate() {
            let unit = (i + 1) as f64 / denom;
            coords.push(domain.lower()[axis] + domain.side(axis) * unit);
        }
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < m {
                break;
            }
            idx[axis] = 0;
        }
    }
    Design::from_flat(domain.clone(), coords)
}

/// `n` i.i.d. uniform sites drawn with ChaCha8 seeded by `seed`
/// (`ChaCha8Rng::seed_from_u64`), one coordinate at a time in index order.
pub fn random_design(n: usize, domain: &Domain, seed: u64) -> Result<Design> {
    if n == 0 {
        return Err(invalid("design size n must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = domain.dim();
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        let axis = coords.len() % d;
        let u: f64 = rng.random();
        coords.push(domain.lower()[axis] + domain.side(axis) * u);
    }
    Design::from_flat(domain.clone(), coords)
}
