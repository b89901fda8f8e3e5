use std::collections::VecDeque;

use super::cellset::CellSet;
use super::rect::{offsets_row_major, Rect};

pub const NO_LABEL: u32 = u32::MAX;

/// Partition of a cell set into ℓ-components, labelled in order of their row-major first cell.
#[derive(Clone, Debug)]
pub struct Partition {
    pub rect: Rect,
    pub labels: Vec<u32>,
    pub representatives: Vec<Vec<i64>>,
    pub sizes: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn label_of(&self, c: &[i64]) -> Option<u32> {
        self.rect.index_of(c).map(|i| self.labels[i]).filter(|&l| l != NO_LABEL)
    }

    pub fn component(&self, k: u32) -> CellSet {
        CellSet::from_index_fn(self.rect.clone(), |i| self.labels[i] == k)
    }
}

/// Classes of X under jumps of L∞ length ≤ ℓ inside X.
pub fn ell_components(x: &CellSet, ell: i64) -> Partition {
    assert!(ell >= 1, "component radius must be at least 1");
    let rect = x.rect().clone();
    let d = rect.dim();
    let mut labels = vec![NO_LABEL; rect.volume()];
    let mut representatives = Vec::new();
    let mut sizes = Vec::new();
    let offsets: Vec<Vec<i64>> =
        offsets_row_major(d, ell).into_iter().filter(|o| o.iter().any(|&v| v != 0)).collect();
    let mut queue = VecDeque::new();
    let mut c = vec![0; d];
    let mut n = vec![0; d];
    for start in x.iter_indices() {
        if labels[start] != NO_LABEL {
            continue;
        }
        let label = representatives.len() as u32;
        representatives.push(rect.coords(start));
        labels[start] = label;
        let mut size = 0;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            size += 1;
            rect.coords_into(i, &mut c);
            for o in &offsets {
                for a in 0..d {
                    n[a] = c[a] + o[a];
                }
                if let Some(j) = rect.index_of(&n) {
                    if labels[j] == NO_LABEL && x.get(j) {
                        labels[j] = label;
                        queue.push_back(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    Partition { rect, labels, representatives, sizes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = Rect::cube(vec![-2, -2], 10);
        let x = CellSet::from_cells(r.clone(), [&[0i64, 0][..], &[5, 5][..]]);
        assert_eq!(ell_components(&x, 4).len(), 2);
        assert_eq!(ell_components(&x, 5).len(), 1);
        let ring = CellSet::from_fn(Rect::cube(vec![0, 0], 9), |c| {
            c[0] == 0 || c[0] == 8 || c[1] == 0 || c[1] == 8
        });
        let p = ell_components(&ring, 1);
        assert_eq!(p.len(), 1);
        assert_eq!(p.representatives[0], vec![0, 0]);
        assert_eq!(p.sizes[0], 32);
        assert!(ell_components(&CellSet::new(r), 1).is_empty());
    }

    #[test]
    fn agrees_with_union_find() {
        use rand::Rng;
        let mut rng = crate::rng::substream(5, "components");
        for _ in 0..50 {
            let r = Rect::cube(vec![0, 0], 12);
            let x = CellSet::from_index_fn(r.clone(), |_| false);
            let mut x = x;
            for i in 0..r.volume() {
                if rng.random::<f64>() < 0.2 {
                    x.insert_index(i);
                }
            }
            let ell = rng.random_range(1..3);
            let cells: Vec<Vec<i64>> = x.iter_cells().collect();
            let mut parent: Vec<usize> = (0..cells.len()).collect();
            fn find(p: &mut Vec<usize>, i: usize) -> usize {
                if p[i] != i {
                    let r = find(p, p[i]);
                    p[i] = r;
                }
                p[i]
            }
            for i in 0..cells.len() {
                for j in 0..i {
                    if crate::lattice::linf(&cells[i], &cells[j]) <= ell {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a] = b;
                    }
                }
            }
            let roots: std::collections::HashSet<usize> =
                (0..cells.len()).map(|i| find(&mut parent, i)).collect();
            let p = ell_components(&x, ell);
            assert_eq!(p.len(), roots.len());
            for i in 0..cells.len() {
                for j in 0..i {
                    let same_uf = find(&mut parent, i) == find(&mut parent, j);
                    assert_eq!(same_uf, p.label_of(&cells[i]) == p.label_of(&cells[j]));
                }
            }
        }
    }
}
