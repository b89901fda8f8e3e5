use crate::error::{Error, Result};
use crate::lattice::{linf, piece_index, piece_offset, CellSet, Rect};

pub const NONE: u32 = u32::MAX;

/// Partial injection from A-cells to B-cells, stored as per-cell piece indices.
///
/// `a_piece[i]` is the row-major index in [−M,M]^d of the offset b − a for the A-cell at window
/// index i; `b_piece[j]` holds the same index for the B-cell at j, keyed by its preimage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    window: Rect,
    m_cap: i64,
    a_piece: Vec<u32>,
    b_piece: Vec<u32>,
    size: usize,
}

impl Matching {
    pub fn new(window: Rect, m_cap: u32) -> Self {
        let n = window.volume();
        Matching { window, m_cap: m_cap as i64, a_piece: vec![NONE; n], b_piece: vec![NONE; n], size: 0 }
    }

    pub fn window(&self) -> &Rect {
        &self.window
    }

    pub fn m_cap(&self) -> u32 {
        self.m_cap as u32
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn a_pieces(&self) -> &[u32] {
        &self.a_piece
    }

    pub fn b_pieces(&self) -> &[u32] {
        &self.b_piece
    }

    fn shifted(&self, idx: usize, piece: u32, sign: i64) -> usize {
        let c = self.window.coords(idx);
        let o = piece_offset(piece, self.window.dim(), self.m_cap);
        let t: Vec<i64> = c.iter().zip(&o).map(|(x, y)| x + sign * y).collect();
        self.window.index_unchecked(&t)
    }

    pub fn partner_of_a(&self, idx: usize) -> Option<usize> {
        let p = self.a_piece[idx];
        (p != NONE).then(|| self.shifted(idx, p, 1))
    }

    pub fn partner_of_b(&self, idx: usize) -> Option<usize> {
        let p = self.b_piece[idx];
        (p != NONE).then(|| self.shifted(idx, p, -1))
    }

    pub fn offset_of_a(&self, idx: usize) -> Option<Vec<i64>> {
        let p = self.a_piece[idx];
        (p != NONE).then(|| piece_offset(p, self.window.dim(), self.m_cap))
    }

    /// Adds the pair (a, b) given by window coordinates.
    pub fn insert(&mut self, a: &[i64], b: &[i64]) -> Result<()> {
        let ai = self.window.index_of(a).ok_or_else(|| Error::arg(format!("{a:?} outside window")))?;
        let bi = self.window.index_of(b).ok_or_else(|| Error::arg(format!("{b:?} outside window")))?;
        if linf(a, b) > self.m_cap {
            return Err(Error::arg(format!("offset from {a:?} to {b:?} exceeds M = {}", self.m_cap)));
        }
        if self.a_piece[ai] != NONE || self.b_piece[bi] != NONE {
            return Err(Error::arg(format!("{a:?} or {b:?} already matched")));
        }
        let o: Vec<i64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        let p = piece_index(&o, self.m_cap);
        self.a_piece[ai] = p;
        self.b_piece[bi] = p;
        self.size += 1;
        Ok(())
    }

    /// Removes the edge at A-cell `idx`, returning the former partner.
    pub fn remove_a(&mut self, idx: usize) -> Option<usize> {
        let b = self.partner_of_a(idx)?;
        self.a_piece[idx] = NONE;
        self.b_piece[b] = NONE;
        self.size -= 1;
        Some(b)
    }

    pub fn remove_b(&mut self, idx: usize) -> Option<usize> {
        let a = self.partner_of_b(idx)?;
        self.a_piece[a] = NONE;
        self.b_piece[idx] = NONE;
        self.size -= 1;
        Some(a)
    }

    pub(crate) fn insert_indices(&mut self, ai: usize, bi: usize) {
        let a = self.window.coords(ai);
        let b = self.window.coords(bi);
        self.insert(&a, &b).expect("pipeline produced an invalid edge");
    }

    /// Edges as (A index, B index), ordered by A index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.a_piece.len()).filter_map(move |i| self.partner_of_a(i).map(|b| (i, b)))
    }

    /// Rebuilds the inverse map from an A-side piece grid, checking injectivity and bounds.
    pub fn from_a_pieces(window: Rect, m_cap: u32, pieces: Vec<u32>) -> Result<Self> {
        let n = window.volume();
        if pieces.len() != n {
            return Err(Error::arg(format!("piece grid has {} cells, window has {n}", pieces.len())));
        }
        let side = 2 * m_cap as u64 + 1;
        let limit = side.pow(window.dim() as u32);
        let mut m = Matching::new(window, m_cap);
        for (i, &p) in pieces.iter().enumerate() {
            if p == NONE {
                continue;
            }
            if p as u64 >= limit {
                return Err(Error::invariant(format!("piece index {p} out of range at cell {i}")));
            }
            let c = m.window.coords(i);
            let o = piece_offset(p, m.window.dim(), m.m_cap);
            let t: Vec<i64> = c.iter().zip(&o).map(|(x, y)| x + y).collect();
            let Some(j) = m.window.index_of(&t) else {
                return Err(Error::invariant(format!("cell {c:?} is matched outside the window")));
            };
            if m.b_piece[j] != NONE {
                return Err(Error::invariant(format!("injectivity: B-cell {t:?} has two preimages")));
            }
            m.a_piece[i] = p;
            m.b_piece[j] = p;
            m.size += 1;
        }
        Ok(m)
    }

    /// Full invariant check against the A/B grids.
    pub fn validate(&self, a: &CellSet, b: &CellSet) -> Result<()> {
        let mut seen = 0;
        for (i, &p) in self.a_piece.iter().enumerate() {
            if p == NONE {
                continue;
            }
            let j = self.partner_of_a(i).unwrap();
            if !a.get(i) {
                return Err(Error::invariant(format!("source {:?} is not an A-cell", self.window.coords(i))));
            }
            if !b.get(j) {
                return Err(Error::invariant(format!("target {:?} is not a B-cell", self.window.coords(j))));
            }
            if self.b_piece[j] != p {
                return Err(Error::invariant(format!(
                    "injectivity: inverse map disagrees at B-cell {:?}",
                    self.window.coords(j)
                )));
            }
            if linf(&self.window.coords(i), &self.window.coords(j)) > self.m_cap {
                return Err(Error::invariant("offset bound exceeded"));
            }
            seen += 1;
        }
        let b_count = self.b_piece.iter().filter(|&&p| p != NONE).count();
        if b_count != seen || seen != self.size {
            return Err(Error::invariant("injectivity: A and B sides disagree in size"));
        }
        Ok(())
    }

    /// Cells whose A-role or B-role partner differs between the two matchings.
    pub fn changed_cells(&self, other: &Matching) -> CellSet {
        assert_eq!(self.window, other.window);
        CellSet::from_index_fn(self.window.clone(), |i| {
            self.a_piece[i] != other.a_piece[i] || self.b_piece[i] != other.b_piece[i]
        })
    }

    /// Drops every edge with an endpoint in a cell for which `keep` is false.
    pub(crate) fn retain(&mut self, keep: impl Fn(usize, usize) -> bool) -> usize {
        let mut removed = 0;
        for i in 0..self.a_piece.len() {
            if let Some(j) = self.partner_of_a(i) {
                if !keep(i, j) {
                    self.remove_a(i);
                    removed += 1;
                }
            }
        }
        removed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_and_pieces() {
        let w = Rect::cube(vec![0, 0], 6);
        let mut m = Matching::new(w.clone(), 2);
        m.insert(&[1, 1], &[2, 3]).unwrap();
        assert!(m.insert(&[1, 1], &[1, 1]).is_err());
        assert!(m.insert(&[0, 0], &[2, 3]).is_err());
        assert!(m.insert(&[0, 0], &[3, 0]).is_err());
        assert_eq!(m.size(), 1);
        let ai = w.index_of(&[1, 1]).unwrap();
        let bi = w.index_of(&[2, 3]).unwrap();
        assert_eq!(m.partner_of_a(ai), Some(bi));
        assert_eq!(m.partner_of_b(bi), Some(ai));
        assert_eq!(m.offset_of_a(ai), Some(vec![1, 2]));
        let copy = Matching::from_a_pieces(w.clone(), 2, m.a_pieces().to_vec()).unwrap();
        assert_eq!(copy, m);
        assert_eq!(m.remove_a(ai), Some(bi));
        assert_eq!(m.size(), 0);
    }

    #[test]
    fn double_preimage_is_rejected() {
        let w = Rect::cube(vec![0, 0], 4);
        let mut pieces = vec![NONE; 16];
        pieces[w.index_of(&[0, 0]).unwrap()] = piece_index(&[1, 1], 1);
        pieces[w.index_of(&[1, 2]).unwrap()] = piece_index(&[0, -1], 1);
        let err = Matching::from_a_pieces(w, 1, pieces).unwrap_err();
        assert!(err.to_string().contains("injectivity"));
    }
}
