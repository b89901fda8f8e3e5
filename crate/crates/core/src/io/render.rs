use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{piece_offset, CellSet, Rect};
use crate::matching::{Matching, Side, NONE};

const GRAY: [u8; 3] = [64, 64, 64];
const WHITE: [u8; 3] = [255, 255, 255];

/// Piece index of every matched A-cell, NONE elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceMap {
    pub window: Rect,
    pub m_cap: u32,
    pub pieces: Vec<u32>,
}

impl PieceMap {
    pub fn from_matching(m: &Matching) -> Self {
        PieceMap { window: m.window().clone(), m_cap: m.m_cap(), pieces: m.a_pieces().to_vec() }
    }

    /// B-side map: each B-cell carries the piece of its preimage. Errors if two A-cells of one
    /// piece land on the same B-cell or a translate leaves the window.
    pub fn b_side(&self) -> Result<Vec<u32>> {
        let w = &self.window;
        let mut out = vec![NONE; self.pieces.len()];
        for (i, &p) in self.pieces.iter().enumerate() {
            if p == NONE {
                continue;
            }
            let o = piece_offset(p, w.dim(), self.m_cap as i64);
            let t: Vec<i64> = w.coords(i).iter().zip(&o).map(|(x, y)| x + y).collect();
            let j = w.index_of(&t).ok_or_else(|| Error::invariant(format!("piece {p} moves {t:?} out of the window")))?;
            if out[j] != NONE {
                return Err(Error::invariant(format!("injectivity: B-cell {t:?} covered twice")));
            }
            out[j] = p;
        }
        Ok(out)
    }

    /// For every piece v, the B-cells coloured v are the A-cells coloured v shifted by offset(v).
    pub fn check_translation_identity(&self, b_pieces: &[u32]) -> Result<()> {
        let w = &self.window;
        let d = w.dim();
        let a_count = self.pieces.iter().filter(|&&p| p != NONE).count();
        let b_count = b_pieces.iter().filter(|&&p| p != NONE).count();
        if a_count != b_count {
            return Err(Error::invariant(format!("{a_count} A-cells but {b_count} B-cells carry pieces")));
        }
        for (j, &p) in b_pieces.iter().enumerate() {
            if p == NONE {
                continue;
            }
            let o = piece_offset(p, d, self.m_cap as i64);
            let s: Vec<i64> = w.coords(j).iter().zip(&o).map(|(x, y)| x - y).collect();
            if w.index_of(&s).map(|i| self.pieces[i]) != Some(p) {
                return Err(Error::invariant(format!("piece {p} at B-cell {:?} has no matching A-cell", w.coords(j))));
            }
        }
        Ok(())
    }
}

/// Fixed colour for a piece index, kept away from the white and gray of the background.
pub fn palette(piece: u32) -> [u8; 3] {
    let h = Sha256::digest(piece.to_le_bytes());
    [h[0], h[1], h[2]].map(|c| 40 + (c as u16 * 170 / 255) as u8)
}

/// PPM (P6) of one side of a 2-dimensional piece map; axis 0 runs down the image.
pub fn render_pieces(pm: &PieceMap, a: &CellSet, b: &CellSet, side: Side, scale: usize) -> Result<Vec<u8>> {
    let w = &pm.window;
    if w.dim() != 2 {
        return Err(Error::arg("rendering needs a 2-dimensional window"));
    }
    if scale < 1 {
        return Err(Error::arg("scale must be at least 1"));
    }
    if a.rect() != w || b.rect() != w {
        return Err(Error::arg("shape grids must share the piece map's window"));
    }
    let b_pieces = pm.b_side()?;
    pm.check_translation_identity(&b_pieces)?;
    let (pieces, cells) = match side {
        Side::A => (&pm.pieces, a),
        Side::B => (&b_pieces, b),
    };
    let (rows, cols) = (w.sides[0] as usize, w.sides[1] as usize);
    let (h, wd) = (rows * scale, cols * scale);
    let mut head = format!("P6\n{wd} {h}\n255\n").into_bytes();
    let mut px = vec![0u8; h * wd * 3];
    px.par_chunks_mut(wd * 3 * scale).enumerate().for_each(|(r, band)| {
        let mut line = vec![0u8; wd * 3];
        for c in 0..cols {
            let i = r * cols + c;
            let rgb = if pieces[i] != NONE {
                palette(pieces[i])
            } else if cells.get(i) {
                GRAY
            } else {
                WHITE
            };
            for s in 0..scale {
                line[(c * scale + s) * 3..(c * scale + s) * 3 + 3].copy_from_slice(&rgb);
            }
        }
        for s in 0..scale {
            band[s * wd * 3..(s + 1) * wd * 3].copy_from_slice(&line);
        }
    });
    head.extend_from_slice(&px);
    Ok(head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::piece_index;

    fn pixel(img: &[u8], wd: usize, r: usize, c: usize) -> [u8; 3] {
        let start = header_len(img) + (r * wd + c) * 3;
        [img[start], img[start + 1], img[start + 2]]
    }

    fn header_len(img: &[u8]) -> usize {
        let mut nl = 0;
        for (i, &b) in img.iter().enumerate() {
            if b == b'\n' {
                nl += 1;
                if nl == 3 {
                    return i + 1;
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn empty_matching_is_a_gray_silhouette() {
        let w = Rect::cube(vec![0, 0], 4);
        let a = CellSet::from_cells(w.clone(), [&[1i64, 2][..]]);
        let pm = PieceMap::from_matching(&Matching::new(w.clone(), 1));
        let img = render_pieces(&pm, &a, &a, Side::A, 2).unwrap();
        assert!(img.starts_with(b"P6\n8 8\n255\n"));
        assert_eq!(pixel(&img, 8, 2, 4), GRAY);
        assert_eq!(pixel(&img, 8, 3, 5), GRAY);
        assert_eq!(pixel(&img, 8, 0, 0), WHITE);
    }

    #[test]
    fn identity_instance_renders_identically() {
        let w = Rect::cube(vec![0, 0], 5);
        let a = CellSet::from_fn(w.clone(), |c| (c[0] + c[1]) % 3 == 0);
        let mut m = Matching::new(w.clone(), 2);
        for c in a.iter_cells() {
            m.insert(&c, &c).unwrap();
        }
        let pm = PieceMap::from_matching(&m);
        let ia = render_pieces(&pm, &a, &a, Side::A, 1).unwrap();
        let ib = render_pieces(&pm, &a, &a, Side::B, 1).unwrap();
        assert_eq!(ia, ib);
        let zero = palette(piece_index(&[0, 0], 2));
        assert_eq!(pixel(&ia, 5, 0, 0), zero);
    }

    #[test]
    fn b_side_is_the_translate() {
        let w = Rect::cube(vec![0, 0], 6);
        let a = CellSet::from_cells(w.clone(), [&[1i64, 1][..], &[2, 2][..]]);
        let b = CellSet::from_cells(w.clone(), [&[1i64, 2][..], &[4, 2][..]]);
        let mut m = Matching::new(w.clone(), 2);
        m.insert(&[1, 1], &[1, 2]).unwrap();
        m.insert(&[2, 2], &[4, 2]).unwrap();
        let pm = PieceMap::from_matching(&m);
        assert_eq!(pm.b_side().unwrap(), m.b_pieces());
        let ib = render_pieces(&pm, &a, &b, Side::B, 1).unwrap();
        assert_eq!(pixel(&ib, 6, 4, 2), palette(piece_index(&[2, 0], 2)));
        let mut wrong = m.b_pieces().to_vec();
        wrong.swap(w.index_of(&[1, 2]).unwrap(), w.index_of(&[4, 2]).unwrap());
        assert!(pm.check_translation_identity(&wrong).is_err());
        assert!(palette(7).iter().all(|&c| (40..=210).contains(&c)));
    }
}
