use crate::lattice::{CellSet, Rect};

/// d-dimensional summed-area table over a rectangle.
#[derive(Clone, Debug)]
pub struct SummedArea {
    rect: Rect,
    /// Strides of the (side+1)-padded table.
    strides: Vec<usize>,
    data: Vec<u32>,
}

impl SummedArea {
    pub fn from_fn(rect: &Rect, f: impl Fn(usize) -> bool) -> Self {
        let d = rect.dim();
        let dims: Vec<usize> = rect.sides.iter().map(|&s| s as usize + 1).collect();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let total: usize = dims.iter().product();
        let mut data = vec![0u32; total];
        let mut c = vec![0i64; d];
        for i in 0..rect.volume() {
            if f(i) {
                rect.coords_into(i, &mut c);
                let idx: usize = (0..d).map(|a| (c[a] - rect.low[a] + 1) as usize * strides[a]).sum();
                data[idx] = 1;
            }
        }
        for a in 0..d {
            let st = strides[a];
            for idx in 0..total {
                if (idx / st) % dims[a] != 0 {
                    data[idx] += data[idx - st];
                }
            }
        }
        SummedArea { rect: rect.clone(), strides, data }
    }

    /// Table of `x` restricted to `window` (cells of `x` outside its own rectangle count as absent).
    pub fn from_cellset(x: &CellSet, window: &Rect) -> Self {
        if x.rect() == window {
            return SummedArea::from_fn(window, |i| x.get(i));
        }
        SummedArea::from_fn(window, |i| x.contains(&window.coords(i)))
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    /// Count of set cells in the box `[low, low+sides)` (absolute coordinates, must lie in the rect).
    pub fn box_count(&self, low: &[i64], sides: &[i64]) -> u64 {
        let d = self.rect.dim();
        let mut total: i64 = 0;
        for mask in 0..(1usize << d) {
            let mut idx = 0usize;
            let mut lows = 0;
            for a in 0..d {
                let base = (low[a] - self.rect.low[a]) as usize;
                let pos = if mask >> a & 1 == 1 {
                    base + sides[a] as usize
                } else {
                    lows += 1;
                    base
                };
                idx += pos * self.strides[a];
            }
            let v = self.data[idx] as i64;
            total += if lows % 2 == 0 { v } else { -v };
        }
        total as u64
    }

    /// Linear SAT offsets and signs of the 2^d corners of a cube of side `s`.
    pub(crate) fn cube_corners(&self, s: usize) -> Vec<(usize, i64)> {
        let d = self.rect.dim();
        (0..(1usize << d))
            .map(|mask| {
                let mut off = 0;
                let mut highs = 0;
                for a in 0..d {
                    if mask >> a & 1 == 1 {
                        off += s * self.strides[a];
                        highs += 1;
                    }
                }
                (off, if (d - highs) % 2 == 0 { 1 } else { -1 })
            })
            .collect()
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    #[inline]
    pub(crate) fn at(&self, idx: usize) -> i64 {
        self.data[idx] as i64
    }
}
