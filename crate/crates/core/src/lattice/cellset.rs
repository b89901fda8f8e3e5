use rayon::prelude::*;

use super::rect::Rect;

/// Dense bit set over a bounding rectangle, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    rect: Rect,
    words: Vec<u64>,
}

impl CellSet {
    pub fn new(rect: Rect) -> Self {
        let n = rect.volume();
        CellSet { rect, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(rect: Rect) -> Self {
        let n = rect.volume();
        let mut s = CellSet::new(rect);
        for i in 0..n {
            s.insert_index(i);
        }
        s
    }

    /// Builds the set in parallel from a predicate on row-major indices.
    pub fn from_index_fn(rect: Rect, f: impl Fn(usize) -> bool + Sync) -> Self {
        let n = rect.volume();
        let words = (0..n.div_ceil(64))
            .into_par_iter()
            .map(|w| {
                let mut word = 0u64;
                for b in 0..64 {
                    let i = w * 64 + b;
                    if i < n && f(i) {
                        word |= 1 << b;
                    }
                }
                word
            })
            .collect();
        CellSet { rect, words }
    }

    pub fn from_fn(rect: Rect, f: impl Fn(&[i64]) -> bool + Sync) -> Self {
        let r = rect.clone();
        CellSet::from_index_fn(rect, move |i| f(&r.coords(i)))
    }

    pub fn from_cells<'a>(rect: Rect, cells: impl IntoIterator<Item = &'a [i64]>) -> Self {
        let mut s = CellSet::new(rect);
        for c in cells {
            s.insert(c);
        }
        s
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn dim(&self) -> usize {
        self.rect.dim()
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        self.words[idx >> 6] >> (idx & 63) & 1 == 1
    }

    #[inline]
    pub fn insert_index(&mut self, idx: usize) {
        self.words[idx >> 6] |= 1 << (idx & 63);
    }

    #[inline]
    pub fn remove_index(&mut self, idx: usize) {
        self.words[idx >> 6] &= !(1 << (idx & 63));
    }

    /// Membership; false outside the bounding rectangle.
    #[inline]
    pub fn contains(&self, c: &[i64]) -> bool {
        self.rect.index_of(c).is_some_and(|i| self.get(i))
    }

    /// Inserts a cell; panics if it lies outside the bounding rectangle.
    pub fn insert(&mut self, c: &[i64]) {
        let i = self.rect.index_of(c).expect("cell outside bounding rectangle");
        self.insert_index(i);
    }

    pub fn remove(&mut self, c: &[i64]) {
        if let Some(i) = self.rect.index_of(c) {
            self.remove_index(i);
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Set indices in increasing (row-major) order.
    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.iter_indices().map(|i| self.rect.coords(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn zip_words(&self, other: &CellSet, op: impl Fn(u64, u64) -> u64) -> CellSet {
        assert_eq!(self.rect, other.rect, "cell sets over different rectangles");
        CellSet {
            rect: self.rect.clone(),
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        self.zip_words(other, |a, b| a & !b)
    }

    /// Complement inside the bounding rectangle.
    pub fn complement(&self) -> CellSet {
        let n = self.rect.volume();
        let mut out = CellSet { rect: self.rect.clone(), words: self.words.iter().map(|w| !w).collect() };
        let tail = n % 64;
        if tail != 0 {
            *out.words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        out
    }

    /// Same cells re-expressed over another bounding rectangle (cells outside it are dropped).
    pub fn reframe(&self, rect: Rect) -> CellSet {
        let mut out = CellSet::new(rect);
        let mut c = vec![0; self.dim()];
        for i in self.iter_indices() {
            self.rect.coords_into(i, &mut c);
            if let Some(j) = out.rect.index_of(&c) {
                out.insert_index(j);
            }
        }
        out
    }

    /// Count of cells inside `r`.
    pub fn count_in(&self, r: &Rect) -> usize {
        let Some(r) = self.rect.intersect(r) else { return 0 };
        let mut c = vec![0; self.dim()];
        (0..r.volume())
            .filter(|&i| {
                r.coords_into(i, &mut c);
                self.get(self.rect.index_unchecked(&c))
            })
            .count()
    }

    /// Smallest rectangle containing all cells, if any.
    pub fn bounding_box(&self) -> Option<Rect> {
        let d = self.dim();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        let mut c = vec![0; d];
        let mut any = false;
        for i in self.iter_indices() {
            any = true;
            self.rect.coords_into(i, &mut c);
            for a in 0..d {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        any.then(|| Rect { sides: hi.iter().zip(&lo).map(|(h, l)| h - l + 1).collect(), low: lo })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_membership() {
        let r = Rect::new(vec![-3, -3], vec![7, 9]).unwrap();
        let mut s = CellSet::new(r.clone());
        assert!(s.is_empty());
        s.insert(&[0, 0]);
        s.insert(&[3, 5]);
        assert!(s.contains(&[0, 0]));
        assert!(!s.contains(&[100, 0]));
        assert_eq!(s.count(), 2);
        let cells: Vec<_> = s.iter_cells().collect();
        assert_eq!(cells, vec![vec![0, 0], vec![3, 5]]);
        assert_eq!(s.complement().count(), 61);
        assert_eq!(s.bounding_box(), Some(Rect::new(vec![0, 0], vec![4, 6]).unwrap()));
        assert_eq!(CellSet::full(r.clone()).count(), 63);
        let f = CellSet::from_fn(r, |c| (c[0] + c[1]) % 2 == 0);
        assert_eq!(f.count(), 32);
    }

    #[test]
    fn reframe_and_count_in() {
        let s = CellSet::from_fn(Rect::cube(vec![0, 0], 8), |c| c[0] == c[1]);
        let t = s.reframe(Rect::cube(vec![2, 2], 4));
        assert_eq!(t.count(), 4);
        assert_eq!(s.count_in(&Rect::cube(vec![2, 2], 10)), 6);
    }
}
