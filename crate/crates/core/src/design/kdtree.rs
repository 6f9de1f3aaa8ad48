//! Static k-d tree for nearest-site queries with lowest-index tie breaking.

pub(crate) struct KdTree<'a> {
    coords: &'a [f64],
    dim: usize,
    nodes: Vec<Node>,
    root: Option<usize>,
}

struct Node {
    site: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

impl<'a> KdTree<'a> {
    /// `coords` is row-major `n x dim`.
    pub(crate) fn build(coords: &'a [f64], dim: usize) -> Self {
        let n = coords.len() / dim;
        let mut tree = Self {
            coords,
            dim,
            nodes: Vec::with_capacity(n),
            root: None,
        };
        let mut ids: Vec<usize> = (0..n).collect();
        tree.root = tree.build_rec(&mut ids, 0);
        tree
    }

    fn coord(&self, site: usize, axis: usize) -> f64 {
        self.coords[site * self.dim + axis]
    }

    fn build_rec(&mut self, ids: &mut [usize], depth: usize) -> Option<usize> {
        if ids.is_empty() {
            return None;
        }
        let axis = depth % self.dim;
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            self.coord(a, axis)
                .total_cmp(&self.coord(b, axis))
                .then(a.cmp(&b))
        });
        let site = ids[mid];
        let (lo, rest) = ids.split_at_mut(mid);
        let hi = &mut rest[1..];
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(hi, depth + 1);
        self.nodes.push(Node {
            site,
            axis,
            left,
            right,
        });
        Some(self.nodes.len() - 1)
    }

    /// Index of the site nearest to `query`; equidistant sites resolve to the lowest index.
    pub(crate) fn nearest(&self, query: &[f64]) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        if let Some(root) = self.root {
            self.search(root, query, &mut best);
        }
        best.1
    }

    fn search(&self, node: usize, query: &[f64], best: &mut (f64, usize)) {
        let nd = &self.nodes[node];
        let base = nd.site * self.dim;
        let d2: f64 = query
            .iter()
            .zip(&self.coords[base..base + self.dim])
            .map(|(q, c)| (q - c) * (q - c))
            .sum();
        if d2 < best.0 || (d2 == best.0 && nd.site < best.1) {
            *best = (d2, nd.site);
        }
        let diff = query[nd.axis] - self.coord(nd.site, nd.axis);
        let (near, far) = if diff < 0.0 {
            (nd.left, nd.right)
        } else {
            (nd.right, nd.left)
        };
        if let Some(c) = near {
            self.search(c, query, best);
        }
        // equality must still be explored so that ties reach the lowest index
        if diff * diff <= best.0 {
            if let Some(c) = far {
                self.search(c, query, best);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(coords: &[f64], dim: usize, q: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.0 {
                best = (d2, i);
            }
        }
        best.1
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in 1..=3 {
            let coords: Vec<f64> = (0..200 * dim).map(|_| rng.random()).collect();
            let tree = KdTree::build(&coords, dim);
            for _ in 0..500 {
                let q: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
                assert_eq!(tree.nearest(&q), brute(&coords, dim, &q));
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // four sites symmetric about the query, inserted in scrambled order
        let coords = [1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        let tree = KdTree::build(&coords, 2);
        assert_eq!(tree.nearest(&[0.0, 0.0]), 0);
        let coords = [0.0, -1.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0];
        let tree = KdTree::build(&coords, 2);
        assert_eq!(tree.nearest(&[0.0, 0.0]), 0);
    }
}
