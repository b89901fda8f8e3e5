use serde::{Deserialize, Serialize};

use super::rect::Rect;
use crate::error::{Error, Result};

/// A level-ℓ rectangle of the tree; `block[j]` is its position along axis j in `[0, 2^ℓ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub level: u32,
    pub block: Vec<u32>,
    pub rect: Rect,
    pub special: bool,
}

impl TreeNode {
    /// Binary digit vectors b_1..b_ℓ of the node index (most significant first).
    pub fn digits(&self) -> Vec<Vec<u8>> {
        (0..self.level)
            .map(|t| self.block.iter().map(|&s| (s >> (self.level - 1 - t) & 1) as u8).collect())
            .collect()
    }
}

/// Hierarchy of rectangles inside an N_i-cube, built from the inherited N_{i−1}-grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RectTree {
    pub root: Rect,
    pub h: u32,
    pub n_prev: i64,
    /// Per axis, the 2^h intervals `(start, length)` after merging.
    pub intervals: Vec<Vec<(i64, i64)>>,
    /// Per axis, whether the leading interval (rather than the trailing one) was merged.
    pub merged_leading: Vec<bool>,
    /// `levels[ℓ]` holds the level-ℓ nodes in row-major block order.
    pub levels: Vec<Vec<TreeNode>>,
}

impl RectTree {
    pub fn basic(&self) -> &[TreeNode] {
        &self.levels[self.h as usize]
    }

    pub fn level(&self, l: u32) -> &[TreeNode] {
        &self.levels[l as usize]
    }
}

fn is_pow2(x: i64) -> bool {
    x > 0 && x & (x - 1) == 0
}

/// Axis partition of `[lo, lo+side)` by the grid `origin + n_prev·Z`, with the end merge applied.
fn axis_intervals(lo: i64, side: i64, origin: i64, n_prev: i64, h: u32) -> (Vec<(i64, i64)>, bool) {
    let target = 1usize << h;
    let mut cuts = vec![lo];
    let first = lo + (origin - lo).rem_euclid(n_prev);
    let mut c = if first == lo { lo + n_prev } else { first };
    while c < lo + side {
        cuts.push(c);
        c += n_prev;
    }
    cuts.push(lo + side);
    let mut iv: Vec<(i64, i64)> = cuts.windows(2).map(|w| (w[0], w[1] - w[0])).collect();
    let mut merged_leading = false;
    if iv.len() == target + 1 {
        let lead = iv[0].1;
        let trail = iv[target].1;
        if lead < trail {
            // Merge the shorter leading interval into its successor.
            let (s, l) = iv.remove(0);
            iv[0] = (s, l + iv[0].1);
            merged_leading = true;
        } else {
            let (_, l) = iv.pop().unwrap();
            iv[target - 1].1 += l;
        }
    }
    debug_assert_eq!(iv.len(), target);
    (iv, merged_leading)
}

pub fn build_rect_tree(root: &Rect, fine_grid_origin: &[i64], n_prev: i64) -> Result<RectTree> {
    let d = root.dim();
    let n = root.sides[0];
    if root.sides.iter().any(|&s| s != n) {
        return Err(Error::arg("rectangle tree root must be a cube"));
    }
    if !is_pow2(n) || !is_pow2(n_prev) || n_prev >= n {
        return Err(Error::arg(format!(
            "cube side {n} and inherited grid {n_prev} must be powers of two with {n_prev} < {n}"
        )));
    }
    if fine_grid_origin.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: fine_grid_origin.len() });
    }
    let h = (n / n_prev).trailing_zeros();
    let mut intervals = Vec::with_capacity(d);
    let mut merged_leading = Vec::with_capacity(d);
    for a in 0..d {
        let (iv, ml) = axis_intervals(root.low[a], n, fine_grid_origin[a], n_prev, h);
        intervals.push(iv);
        merged_leading.push(ml);
    }
    let mut levels = Vec::with_capacity(h as usize + 1);
    for l in 0..=h {
        let per_axis = 1u32 << l;
        let group = 1usize << (h - l);
        let count = (per_axis as usize).pow(d as u32);
        let nominal = n >> l;
        let mut nodes = Vec::with_capacity(count);
        for idx in 0..count {
            let mut block = vec![0u32; d];
            let mut rem = idx;
            for a in (0..d).rev() {
                block[a] = (rem % per_axis as usize) as u32;
                rem /= per_axis as usize;
            }
            let mut low = Vec::with_capacity(d);
            let mut sides = Vec::with_capacity(d);
            for a in 0..d {
                let first = block[a] as usize * group;
                let span = &intervals[a][first..first + group];
                low.push(span[0].0);
                sides.push(span.iter().map(|x| x.1).sum());
            }
            let off_nominal = sides.iter().filter(|&&s| s != nominal).count();
            nodes.push(TreeNode { level: l, block, rect: Rect { low, sides }, special: off_nominal >= 2 });
        }
        levels.push(nodes);
    }
    Ok(RectTree { root: root.clone(), h, n_prev, intervals, merged_leading, levels })
}
