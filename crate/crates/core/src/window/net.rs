use rayon::prelude::*;

use super::coloring::SparseColoring;
use super::extract::CosetWindow;
use crate::error::{Error, Result};
use crate::lattice::{linf, CellSet, Rect};

/// Uniform bucket grid over a rectangle for "any point within L∞ distance r" queries.
pub(crate) struct BucketGrid {
    rect: Rect,
    side: i64,
    dims: Vec<i64>,
    buckets: Vec<Vec<Vec<i64>>>,
}

impl BucketGrid {
    pub fn new(rect: &Rect, side: i64) -> Self {
        let side = side.max(1);
        let dims: Vec<i64> = rect.sides.iter().map(|&s| (s + side - 1) / side).collect();
        let n: usize = dims.iter().map(|&x| x as usize).product();
        BucketGrid { rect: rect.clone(), side, dims, buckets: vec![Vec::new(); n] }
    }

    fn bucket_coords(&self, c: &[i64]) -> Vec<i64> {
        c.iter()
            .zip(&self.rect.low)
            .zip(&self.dims)
            .map(|((x, l), &dm)| ((x - l).div_euclid(self.side)).clamp(0, dm - 1))
            .collect()
    }

    fn bucket_index(&self, b: &[i64]) -> usize {
        b.iter().zip(&self.dims).fold(0usize, |acc, (&x, &dm)| acc * dm as usize + x as usize)
    }

    pub fn insert(&mut self, c: Vec<i64>) {
        let b = self.bucket_coords(&c);
        let i = self.bucket_index(&b);
        self.buckets[i].push(c);
    }

    /// Visits every stored point in buckets within Chebyshev bucket distance `reach`.
    pub fn for_each_near(&self, c: &[i64], reach: i64, mut f: impl FnMut(&[i64])) {
        let d = c.len();
        let center = self.bucket_coords(c);
        let mut off = vec![-reach; d];
        loop {
            let mut b = vec![0i64; d];
            let mut ok = true;
            for a in 0..d {
                b[a] = center[a] + off[a];
                if b[a] < 0 || b[a] >= self.dims[a] {
                    ok = false;
                }
            }
            if ok {
                for p in &self.buckets[self.bucket_index(&b)] {
                    f(p);
                }
            }
            let mut a = d;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                off[a] += 1;
                if off[a] <= reach {
                    break;
                }
                off[a] = -reach;
            }
        }
    }

    pub fn any_within(&self, c: &[i64], r: i64) -> bool {
        let reach = (r + self.side - 1) / self.side;
        let mut found = false;
        self.for_each_near(c, reach, |p| found |= linf(p, c) <= r);
        found
    }
}

/// Greedy maximal r-sparse net: cells are scanned by (color, row-major) and kept when farther than r from all kept cells.
pub fn greedy_sparse_net(win: &CosetWindow, coloring: &SparseColoring, r: u64) -> Result<CellSet> {
    if coloring.radius < r {
        return Err(Error::arg(format!(
            "coloring built for radius {} cannot certify sparsity {r}",
            coloring.radius
        )));
    }
    let w = &win.window;
    let mut order: Vec<(u128, usize)> = (0..w.volume())
        .into_par_iter()
        .map(|i| {
            let mut p = vec![0.0; win.sys.k];
            win.point_of_index(i, &mut p);
            (coloring.color_of(&p), i)
        })
        .collect();
    order.par_sort_unstable();
    let r = r as i64;
    let mut grid = BucketGrid::new(w, r);
    let mut net = CellSet::new(w.clone());
    let mut c = vec![0; w.dim()];
    for &(_, i) in &order {
        w.coords_into(i, &mut c);
        if !grid.any_within(&c, r) {
            grid.insert(c.clone());
            net.insert_index(i);
        }
    }
    Ok(net)
}
