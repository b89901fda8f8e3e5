use serde::{Deserialize, Serialize};

use super::cellset::CellSet;
use super::rect::Rect;
use crate::error::{Error, Result};

/// Calls `f(m, n)` for every boundary pair m ∈ X, n ∉ X with n − m = ±e_j.
fn for_each_boundary_pair(x: &CellSet, mut f: impl FnMut(&[i64], &[i64])) {
    let d = x.dim();
    let mut m = vec![0; d];
    let mut n = vec![0; d];
    for i in x.iter_indices() {
        x.rect().coords_into(i, &mut m);
        for a in 0..d {
            for s in [-1i64, 1] {
                n.copy_from_slice(&m);
                n[a] += s;
                if !x.contains(&n) {
                    f(&m, &n);
                }
            }
        }
    }
}

pub fn boundary(x: &CellSet) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut out = Vec::new();
    for_each_boundary_pair(x, |m, n| out.push((m.to_vec(), n.to_vec())));
    out
}

pub fn perimeter(x: &CellSet) -> u64 {
    let mut p = 0;
    for_each_boundary_pair(x, |_, _| p += 1);
    p
}

/// p^R(X): boundary pairs with both cells in R.
pub fn internal_boundary(x: &CellSet, r: &Rect) -> Result<u64> {
    let mut c = vec![0; x.dim()];
    for i in x.iter_indices() {
        x.rect().coords_into(i, &mut c);
        if !r.contains(&c) {
            return Err(Error::arg(format!("cell {c:?} lies outside the reference rectangle")));
        }
    }
    let mut p = 0;
    for_each_boundary_pair(x, |_, n| {
        if r.contains(n) {
            p += 1;
        }
    });
    Ok(p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoperimetryCheck {
    pub perimeter: u64,
    pub bound: f64,
    pub ok: bool,
}

/// Loomis–Whitney: p(X) ≥ 2d·|X|^{(d−1)/d}.
pub fn isoperimetry_check(x: &CellSet) -> Result<IsoperimetryCheck> {
    let n = x.count();
    if n == 0 {
        return Err(Error::arg("isoperimetry check needs a non-empty set"));
    }
    let d = x.dim() as f64;
    let bound = 2.0 * d * (n as f64).powf((d - 1.0) / d);
    let p = perimeter(x);
    // Tolerance only absorbs pow() rounding in the equality cases (cubes).
    Ok(IsoperimetryCheck { perimeter: p, bound, ok: p as f64 >= bound * (1.0 - 1e-12) })
}

/// {n : dist∞(n, X) ≤ m} over the bounding rectangle grown by m.
pub fn dist_ball(x: &CellSet, m: i64) -> CellSet {
    assert!(m >= 0, "ball radius must be non-negative");
    let rect = x.rect().grow(m);
    if m == 0 {
        return x.clone();
    }
    let d = rect.dim();
    let mut cur: Vec<bool> = vec![false; rect.volume()];
    let mut c = vec![0; d];
    for i in x.iter_indices() {
        x.rect().coords_into(i, &mut c);
        cur[rect.index_unchecked(&c)] = true;
    }
    // The L∞ ball is a product of intervals, so dilate one axis at a time.
    let strides = rect.strides();
    for a in 0..d {
        let len = rect.sides[a] as usize;
        let st = strides[a];
        let mut next = vec![false; cur.len()];
        let mut prefix = vec![0u32; len + 1];
        for start in 0..cur.len() {
            if (start / st) % len != 0 {
                continue;
            }
            for t in 0..len {
                prefix[t + 1] = prefix[t] + cur[start + t * st] as u32;
            }
            for t in 0..len {
                let lo = t.saturating_sub(m as usize);
                let hi = (t + m as usize + 1).min(len);
                next[start + t * st] = prefix[hi] > prefix[lo];
            }
        }
        cur = next;
    }
    CellSet::from_index_fn(rect, |i| cur[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(cells: &[[i64; 2]], rect: Rect) -> CellSet {
        CellSet::from_cells(rect, cells.iter().map(|c| &c[..]))
    }

    #[test]
    fn perimeter_examples() {
        let r = Rect::cube(vec![-5, -5], 10);
        assert_eq!(perimeter(&set(&[[0, 0]], r.clone())), 4);
        let block = CellSet::from_fn(r.clone(), |c| (0..2).contains(&c[0]) && (0..3).contains(&c[1]));
        assert_eq!(perimeter(&block), 10);
        let l = set(&[[0, 0], [1, 0], [1, 1]], r.clone());
        assert_eq!(perimeter(&l), 8);
        assert_eq!(boundary(&l).len(), 8);
        // The bounding rectangle does not clip the complement.
        let edge = set(&[[-5, -5]], r);
        assert_eq!(perimeter(&edge), 4);
    }

    #[test]
    fn internal_boundary_examples() {
        let r = Rect::cube(vec![0, 0], 5);
        let full = CellSet::full(r.clone());
        assert_eq!(internal_boundary(&full, &r).unwrap(), 0);
        assert_eq!(internal_boundary(&set(&[[2, 2]], r.clone()), &r).unwrap(), 4);
        assert_eq!(internal_boundary(&set(&[[0, 0]], r.clone()), &r).unwrap(), 2);
        let small = Rect::cube(vec![0, 0], 2);
        assert!(internal_boundary(&set(&[[3, 3]], r), &small).is_err());
    }

    #[test]
    fn isoperimetry_equality_cases() {
        let r = Rect::cube(vec![0, 0], 4);
        let one = isoperimetry_check(&set(&[[0, 0]], r.clone())).unwrap();
        assert_eq!((one.perimeter, one.bound, one.ok), (4, 4.0, true));
        let sq = isoperimetry_check(&set(&[[0, 0], [0, 1], [1, 0], [1, 1]], r.clone())).unwrap();
        assert_eq!((sq.perimeter, sq.bound, sq.ok), (8, 8.0, true));
        assert!(isoperimetry_check(&CellSet::new(r)).is_err());
    }

    #[test]
    fn dist_ball_examples() {
        let r = Rect::cube(vec![0, 0], 10);
        let one = set(&[[4, 4]], r.clone());
        assert_eq!(dist_ball(&one, 0), one);
        let b = dist_ball(&one, 1);
        assert_eq!(b.count(), 9);
        assert!(b.contains(&[3, 5]) && !b.contains(&[2, 4]));
        let two = set(&[[0, 0], [0, 3]], r);
        assert_eq!(dist_ball(&two, 1).count(), 18);
        assert_eq!(dist_ball(&two, 1).rect(), &Rect::cube(vec![-1, -1], 12));
    }

    proptest! {
        // Perimeter counted face by face: each member cell contributes its non-member neighbours.
        #[test]
        fn perimeter_counts_faces(bits in proptest::collection::vec(any::<bool>(), 64)) {
            let r = Rect::cube(vec![0, 0], 8);
            let x = CellSet::from_index_fn(r.clone(), |i| bits[i]);
            let mut faces = 0u64;
            for c in x.iter_cells() {
                for axis in 0..2 {
                    for s in [-1, 1] {
                        let mut n = c.clone();
                        n[axis] += s;
                        if !(r.contains(&n) && x.contains(&n)) {
                            faces += 1;
                        }
                    }
                }
            }
            prop_assert_eq!(perimeter(&x), faces);
            prop_assert_eq!(boundary(&x).len() as u64, faces);
        }
    }
}
