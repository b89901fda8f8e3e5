use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{linf, CellSet, Rect};
use crate::window::net::BucketGrid;

pub const NO_OWNER: u32 = u32::MAX;

/// Strict L∞ Voronoi ownership of window cells; seeds indexed in row-major order.
#[derive(Clone, Debug)]
pub struct Ownership {
    pub window: Rect,
    pub seeds: Vec<Vec<i64>>,
    pub owner: Vec<u32>,
}

impl Ownership {
    pub fn owner_of(&self, c: &[i64]) -> Option<u32> {
        self.window.index_of(c).map(|i| self.owner[i]).filter(|&o| o != NO_OWNER)
    }
}

/// Owner of each window cell: the seed strictly closer than every other seed, if any.
pub fn integer_voronoi(s: &CellSet, window: &Rect) -> Result<Ownership> {
    if s.is_empty() {
        return Err(Error::arg("seed set must not be empty"));
    }
    if !s.rect().contains_rect(window) {
        return Err(Error::arg("seed grid must cover the window"));
    }
    let seeds: Vec<Vec<i64>> = s.iter_cells().collect();
    let d = window.dim();
    let side = ((s.rect().volume() as f64 / seeds.len() as f64).powf(1.0 / d as f64).ceil() as i64).max(1);
    let mut grid = BucketGrid::new(s.rect(), side);
    let mut id_of = std::collections::HashMap::with_capacity(seeds.len());
    for (k, c) in seeds.iter().enumerate() {
        grid.insert(c.clone());
        id_of.insert(c.clone(), k as u32);
    }
    let max_reach = s.rect().max_side() / side + 2;
    let owner = (0..window.volume())
        .into_par_iter()
        .map_init(
            || vec![0i64; d],
            |c, i| {
                window.coords_into(i, c);
                for reach in 1..=max_reach {
                    let mut best = i64::MAX;
                    let mut who = NO_OWNER;
                    let mut tie = false;
                    grid.for_each_near(c, reach, |p| {
                        let dist = linf(p, c);
                        if dist < best {
                            best = dist;
                            who = id_of[p];
                            tie = false;
                        } else if dist == best {
                            tie = true;
                        }
                    });
                    if best <= reach * side || reach == max_reach {
                        return if tie { NO_OWNER } else { who };
                    }
                }
                NO_OWNER
            },
        )
        .collect();
    Ok(Ownership { window: window.clone(), seeds, owner })
}

/// One N_i-cube of a grid domain and the index of its seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainCube {
    pub rect: Rect,
    pub seed: u32,
}

pub const NO_CUBE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct GridDomain {
    pub level: usize,
    pub n_cube: i64,
    pub window: Rect,
    /// Cubes in row-major order of their low corners.
    pub cubes: Vec<DomainCube>,
    /// Cube index per window cell, or `NO_CUBE`.
    pub cube_of: Vec<u32>,
    pub uncovered: CellSet,
}

impl GridDomain {
    pub fn cube_index(&self, c: &[i64]) -> Option<usize> {
        self.window.index_of(c).map(|i| self.cube_of[i]).filter(|&k| k != NO_CUBE).map(|k| k as usize)
    }

    pub fn same_cube(&self, i: usize, j: usize) -> bool {
        self.cube_of[i] != NO_CUBE && self.cube_of[i] == self.cube_of[j]
    }
}

/// Every N-cube aligned to its seed's N-grid and lying entirely inside that seed's Voronoi cell.
pub fn grid_domain(level: usize, n_cube: i64, vor: &Ownership) -> Result<GridDomain> {
    if n_cube < 1 || n_cube & (n_cube - 1) != 0 {
        return Err(Error::arg(format!("cube side {n_cube} is not a power of two")));
    }
    let w = &vor.window;
    let d = w.dim();
    let corners: Vec<(usize, u32)> = (0..w.volume())
        .into_par_iter()
        .filter_map(|i| {
            let k = vor.owner[i];
            if k == NO_OWNER {
                return None;
            }
            let c = w.coords(i);
            let s = &vor.seeds[k as usize];
            if (0..d).any(|a| (c[a] - s[a]).rem_euclid(n_cube) != 0) {
                return None;
            }
            let q = Rect::cube(c, n_cube);
            if !w.contains_rect(&q) {
                return None;
            }
            let mut x = vec![0; d];
            for j in 0..q.volume() {
                q.coords_into(j, &mut x);
                if vor.owner[w.index_unchecked(&x)] != k {
                    return None;
                }
            }
            Some((i, k))
        })
        .collect();
    let mut cube_of = vec![NO_CUBE; w.volume()];
    let mut cubes = Vec::with_capacity(corners.len());
    let mut x = vec![0; d];
    for (i, k) in corners {
        let rect = Rect::cube(w.coords(i), n_cube);
        for j in 0..rect.volume() {
            rect.coords_into(j, &mut x);
            cube_of[w.index_unchecked(&x)] = cubes.len() as u32;
        }
        cubes.push(DomainCube { rect, seed: k });
    }
    let uncovered = CellSet::from_index_fn(w.clone(), |i| cube_of[i] == NO_CUBE);
    Ok(GridDomain { level, n_cube, window: w.clone(), cubes, cube_of, uncovered })
}
