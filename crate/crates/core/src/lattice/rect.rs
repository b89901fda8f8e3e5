use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Product of half-open integer intervals `[low_j, low_j + sides_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub low: Vec<i64>,
    pub sides: Vec<i64>,
}

impl Rect {
    pub fn new(low: Vec<i64>, sides: Vec<i64>) -> Result<Self> {
        if low.len() != sides.len() {
            return Err(Error::DimensionMismatch { expected: low.len(), got: sides.len() });
        }
        if low.is_empty() {
            return Err(Error::arg("rectangles need at least one axis"));
        }
        if sides.iter().any(|&s| s < 1) {
            return Err(Error::arg(format!("rectangle sides must be positive, got {sides:?}")));
        }
        Ok(Rect { low, sides })
    }

    pub fn cube(low: Vec<i64>, side: i64) -> Self {
        assert!(side >= 1, "cube side must be positive");
        let d = low.len();
        Rect { low, sides: vec![side; d] }
    }

    /// `[-side/2, side - side/2)^d`.
    pub fn centered_cube(d: usize, side: i64) -> Self {
        Rect::cube(vec![-(side / 2); d], side)
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn volume(&self) -> usize {
        self.sides.iter().map(|&s| s as usize).product()
    }

    pub fn high(&self, axis: usize) -> i64 {
        self.low[axis] + self.sides[axis]
    }

    pub fn max_side(&self) -> i64 {
        *self.sides.iter().max().unwrap()
    }

    pub fn min_side(&self) -> i64 {
        *self.sides.iter().min().unwrap()
    }

    /// ρ-balance: longest over shortest side.
    pub fn balance(&self) -> f64 {
        self.max_side() as f64 / self.min_side() as f64
    }

    #[inline]
    pub fn contains(&self, c: &[i64]) -> bool {
        c.iter()
            .zip(self.low.iter().zip(&self.sides))
            .all(|(&x, (&l, &s))| x >= l && x < l + s)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        (0..self.dim()).all(|a| other.low[a] >= self.low[a] && other.high(a) <= self.high(a))
    }

    /// Row-major index (last axis fastest).
    #[inline]
    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        if !self.contains(c) {
            return None;
        }
        Some(self.index_unchecked(c))
    }

    #[inline]
    pub fn index_unchecked(&self, c: &[i64]) -> usize {
        let mut idx = 0usize;
        for a in 0..self.low.len() {
            idx = idx * self.sides[a] as usize + (c[a] - self.low[a]) as usize;
        }
        idx
    }

    #[inline]
    pub fn coords_into(&self, mut idx: usize, out: &mut [i64]) {
        for a in (0..self.low.len()).rev() {
            let s = self.sides[a] as usize;
            out[a] = self.low[a] + (idx % s) as i64;
            idx /= s;
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.coords_into(idx, &mut out);
        out
    }

    /// Row-major strides for linear indexing.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut st = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            st[a] = st[a + 1] * self.sides[a + 1] as usize;
        }
        st
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let mut low = Vec::with_capacity(self.dim());
        let mut sides = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let l = self.low[a].max(other.low[a]);
            let h = self.high(a).min(other.high(a));
            if h <= l {
                return None;
            }
            low.push(l);
            sides.push(h - l);
        }
        Some(Rect { low, sides })
    }

    pub fn grow(&self, m: i64) -> Rect {
        Rect {
            low: self.low.iter().map(|l| l - m).collect(),
            sides: self.sides.iter().map(|s| s + 2 * m).collect(),
        }
    }

    /// Shrinks by `m` per side; `None` when nothing is left.
    pub fn shrink(&self, m: i64) -> Option<Rect> {
        if self.sides.iter().any(|&s| s <= 2 * m) {
            return None;
        }
        Some(self.grow(-m))
    }

    pub fn translate(&self, shift: &[i64]) -> Rect {
        Rect { low: self.low.iter().zip(shift).map(|(l, s)| l + s).collect(), sides: self.sides.clone() }
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.volume()).map(move |i| self.coords(i))
    }

    /// Cell nearest to the geometric center. Ties go to the higher coordinate, so power-of-two
    /// cubes aligned to the center cell tile a power-of-two window exactly.
    pub fn center_cell(&self) -> Vec<i64> {
        self.low.iter().zip(&self.sides).map(|(l, s)| l + s / 2).collect()
    }
}

/// All integer offsets in `[-m, m]^d`, row-major.
pub fn offsets_row_major(d: usize, m: i64) -> Vec<Vec<i64>> {
    let side = (2 * m + 1) as usize;
    let n = side.pow(d as u32);
    (0..n)
        .map(|mut i| {
            let mut o = vec![0i64; d];
            for a in (0..d).rev() {
                o[a] = (i % side) as i64 - m;
                i /= side;
            }
            o
        })
        .collect()
}

#[inline]
pub fn linf(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)
}

/// Row-major index of `offset` in `[-m, m]^d`.
#[inline]
pub fn piece_index(offset: &[i64], m: i64) -> u32 {
    let side = 2 * m + 1;
    offset.iter().fold(0i64, |acc, &o| acc * side + (o + m)) as u32
}

pub fn piece_offset(piece: u32, d: usize, m: i64) -> Vec<i64> {
    let side = (2 * m + 1) as u32;
    let mut o = vec![0i64; d];
    let mut p = piece;
    for a in (0..d).rev() {
        o[a] = (p % side) as i64 - m;
        p /= side;
    }
    o
}
