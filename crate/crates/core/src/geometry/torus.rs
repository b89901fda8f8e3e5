use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::offsets_row_major;
use crate::rng::{substream, STREAM_VECTORS};
use rand::Rng;

/// Reduce modulo 1 into `[0, 1)`.
///
/// `x - floor(x)` can round up to exactly 1.0 for tiny negative inputs; that case maps to 0.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Signed representative of `x` modulo 1 in `[-1/2, 1/2)`.
#[inline]
pub fn centered(x: f64) -> f64 {
    let y = wrap(x + 0.5) - 0.5;
    if y < -0.5 {
        -0.5
    } else {
        y
    }
}

/// L∞ distance on the torus.
pub fn torus_dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| centered(x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TorusPoint(coords.into_iter().map(wrap).collect())
    }

    pub fn zero(k: usize) -> Self {
        TorusPoint(vec![0.0; k])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// The generators x_1..x_d together with the translation radius M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeVectorSystem {
    pub k: usize,
    pub d: usize,
    pub vectors: Vec<TorusPoint>,
    pub m_cap: u32,
    pub rng_seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreenessReport {
    pub coefficient_bound: i64,
    pub min_residual: f64,
    pub witness: Vec<i64>,
    pub warn: bool,
}

impl FreeVectorSystem {
    pub fn new(vectors: Vec<TorusPoint>, m_cap: u32, rng_seed: u64) -> Result<Self> {
        let d = vectors.len();
        if d < 2 {
            return Err(Error::arg(format!("need at least 2 generators, got {d}")));
        }
        if m_cap < 1 {
            return Err(Error::arg("translation radius must be at least 1"));
        }
        let k = vectors[0].dim();
        if k < 1 {
            return Err(Error::arg("torus dimension must be at least 1"));
        }
        for v in &vectors {
            if v.dim() != k {
                return Err(Error::DimensionMismatch { expected: k, got: v.dim() });
            }
        }
        Ok(FreeVectorSystem { k, d, vectors, m_cap, rng_seed })
    }

    /// Writes u + Σ n_j x_j (mod 1) into `out` without allocating.
    #[inline]
    pub fn coset_coords_into(&self, u: &[f64], n: &[i64], out: &mut [f64]) {
        for c in 0..self.k {
            let mut s = u[c];
            for j in 0..self.d {
                s += n[j] as f64 * self.vectors[j].0[c];
            }
            out[c] = wrap(s);
        }
    }

    pub fn translation_vector(&self, n: &[i64]) -> Result<TorusPoint> {
        coset_point(&TorusPoint::zero(self.k), n, self)
    }

    /// Offsets with ‖n‖∞ ≤ radius in row-major order, paired with their torus vectors.
    pub fn translation_set_with_radius(&self, radius: u32) -> Vec<(Vec<i64>, TorusPoint)> {
        let zero = vec![0.0; self.k];
        offsets_row_major(self.d, radius as i64)
            .into_iter()
            .map(|n| {
                let mut out = vec![0.0; self.k];
                self.coset_coords_into(&zero, &n, &mut out);
                (n, TorusPoint(out))
            })
            .collect()
    }

    /// Searches integer relations with coefficients in [-bound, bound] for near-zero combinations.
    pub fn freeness_diagnostic(&self, bound: i64) -> FreenessReport {
        let zero = vec![0.0; self.k];
        let mut out = vec![0.0; self.k];
        let mut best = f64::INFINITY;
        let mut witness = Vec::new();
        for n in offsets_row_major(self.d, bound) {
            if n.iter().all(|&c| c == 0) {
                continue;
            }
            self.coset_coords_into(&zero, &n, &mut out);
            let r = torus_dist_inf(&out, &zero);
            if r < best {
                best = r;
                witness = n;
            }
        }
        FreenessReport { coefficient_bound: bound, min_residual: best, witness, warn: best < 1e-9 }
    }
}

pub fn coset_point(u: &TorusPoint, n: &[i64], sys: &FreeVectorSystem) -> Result<TorusPoint> {
    if n.len() != sys.d {
        return Err(Error::DimensionMismatch { expected: sys.d, got: n.len() });
    }
    if u.dim() != sys.k {
        return Err(Error::DimensionMismatch { expected: sys.k, got: u.dim() });
    }
    let mut out = vec![0.0; sys.k];
    sys.coset_coords_into(&u.0, n, &mut out);
    Ok(TorusPoint(out))
}

pub fn sample_free_system(seed: u64, k: usize, d: usize, m_cap: u32) -> Result<FreeVectorSystem> {
    if k < 1 || d < 2 || m_cap < 1 {
        return Err(Error::arg(format!("need k >= 1, d >= 2, M >= 1 (got k={k}, d={d}, M={m_cap})")));
    }
    let mut rng = substream(seed, STREAM_VECTORS);
    let vectors = (0..d)
        .map(|_| TorusPoint::new((0..k).map(|_| rng.random::<f64>()).collect()))
        .collect();
    FreeVectorSystem::new(vectors, m_cap, seed)
}

pub fn translation_set(sys: &FreeVectorSystem) -> Vec<(Vec<i64>, TorusPoint)> {
    sys.translation_set_with_radius(sys.m_cap)
}
