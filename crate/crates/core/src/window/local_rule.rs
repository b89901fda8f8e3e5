use rayon::prelude::*;

use crate::lattice::{CellSet, Rect};

/// Integer-valued grid over a window, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntGrid {
    pub rect: Rect,
    pub data: Vec<i64>,
}

impl IntGrid {
    pub fn from_fn(rect: Rect, f: impl Fn(&[i64]) -> i64 + Sync) -> Self {
        let data = (0..rect.volume()).into_par_iter().map(|i| f(&rect.coords(i))).collect();
        IntGrid { rect, data }
    }

    pub fn get(&self, c: &[i64]) -> Option<i64> {
        self.rect.index_of(c).map(|i| self.data[i])
    }
}

/// Radius-r view of a grid around one cell; reads outside the window return 0.
pub struct Patch<'a> {
    grid: &'a IntGrid,
    center: Vec<i64>,
    r: i64,
}

impl Patch<'_> {
    pub fn radius(&self) -> i64 {
        self.r
    }

    pub fn get(&self, offset: &[i64]) -> i64 {
        assert!(offset.iter().all(|o| o.abs() <= self.r), "offset {offset:?} outside the patch");
        let c: Vec<i64> = self.center.iter().zip(offset).map(|(a, b)| a + b).collect();
        self.grid.get(&c).unwrap_or(0)
    }
}

/// Applies `rule` at every cell; the second result marks cells within r of the window edge.
pub fn apply_local_rule(grid: &IntGrid, rule: impl Fn(&Patch) -> i64 + Sync, r: i64) -> (IntGrid, CellSet) {
    let rect = grid.rect.clone();
    let data = (0..rect.volume())
        .into_par_iter()
        .map(|i| rule(&Patch { grid, center: rect.coords(i), r }))
        .collect();
    let core = rect.shrink(r);
    let tainted = CellSet::from_fn(rect.clone(), |c| !core.as_ref().is_some_and(|k| k.contains(c)));
    (IntGrid { rect, data }, tainted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::offsets_row_major;
    use rand::Rng;

    fn random_grid(seed: u64, rect: Rect) -> IntGrid {
        let mut rng = crate::rng::substream(seed, "local-rule");
        let data = (0..rect.volume()).map(|_| rng.random_range(0..2)).collect();
        IntGrid { rect, data }
    }

    #[test]
    fn identity_and_constant_rules() {
        let g = random_grid(1, Rect::cube(vec![0, 0], 16));
        let (out, tainted) = apply_local_rule(&g, |p| p.get(&[0, 0]), 2);
        assert_eq!(out, g);
        assert_eq!(tainted.count(), 256 - 144);
        let (c, _) = apply_local_rule(&g, |_| 7, 1);
        assert!(c.data.iter().all(|&v| v == 7));
    }

    #[test]
    fn majority_rule_matches_naive() {
        let g = random_grid(2, Rect::cube(vec![-8, 3], 20));
        let (out, tainted) = apply_local_rule(
            &g,
            |p| {
                let s: i64 = offsets_row_major(2, 1).iter().map(|o| p.get(o)).sum();
                (s >= 5) as i64
            },
            1,
        );
        for c in g.rect.cells() {
            if tainted.contains(&c) {
                continue;
            }
            let mut s = 0;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    s += g.get(&[c[0] + dx, c[1] + dy]).unwrap();
                }
            }
            assert_eq!(out.get(&c).unwrap(), (s >= 5) as i64);
        }
    }

    #[test]
    fn commutes_with_translation_on_core() {
        let big = random_grid(3, Rect::cube(vec![0, 0], 30));
        let sub = |low: [i64; 2]| {
            let r = Rect::cube(low.to_vec(), 20);
            IntGrid::from_fn(r, |c| big.get(c).unwrap())
        };
        let rule = |p: &Patch| p.get(&[1, -1]) * 3 + p.get(&[0, 1]);
        let (a, ta) = apply_local_rule(&sub([0, 0]), rule, 1);
        let (b, tb) = apply_local_rule(&sub([5, 4]), rule, 1);
        for c in a.rect.cells() {
            if !ta.contains(&c) && b.rect.contains(&c) && !tb.contains(&c) {
                assert_eq!(a.get(&c), b.get(&c));
            }
        }
    }
}
