use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::torus::torus_dist_inf;
use crate::geometry::FreeVectorSystem;
use crate::lattice::offsets_row_major;

/// Coloring of the torus by (1/n)-grid boxes; each color class is r-sparse along any coset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseColoring {
    pub n_grid: u64,
    pub k: usize,
    /// Number of colors n^k.
    pub t: u128,
    pub radius: u64,
    pub min_distance: f64,
}

/// Distances below this cannot be separated reliably in binary64.
pub const PRECISION_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;

impl SparseColoring {
    #[inline]
    pub fn color_of(&self, p: &[f64]) -> u128 {
        let n = self.n_grid;
        p.iter().fold(0u128, |acc, &c| {
            let b = ((c * n as f64) as u64).min(n - 1);
            acc * n as u128 + b as u128
        })
    }
}

pub fn build_sparse_coloring(sys: &FreeVectorSystem, r: u64) -> Result<SparseColoring> {
    if r < 1 {
        return Err(Error::arg("coloring radius must be at least 1"));
    }
    let zero = vec![0.0; sys.k];
    let min_distance = offsets_row_major(sys.d, r as i64)
        .par_iter()
        .filter(|n| n.iter().any(|&v| v != 0))
        .map(|n| {
            let mut p = vec![0.0; sys.k];
            sys.coset_coords_into(&zero, n, &mut p);
            torus_dist_inf(&p, &zero)
        })
        .reduce(|| f64::INFINITY, f64::min);
    if min_distance < PRECISION_FLOOR {
        return Err(Error::Precision(format!(
            "translation vectors within radius {r} come as close as {min_distance:e} to zero"
        )));
    }
    let n_grid = (1.0 / min_distance).floor() as u64 + 1;
    let t = (n_grid as u128)
        .checked_pow(sys.k as u32)
        .ok_or_else(|| Error::Precision(format!("{n_grid}^{} colors overflow", sys.k)))?;
    Ok(SparseColoring { n_grid, k: sys.k, t, radius: r, min_distance })
}
