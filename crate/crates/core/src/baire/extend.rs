use crate::error::{Error, Result};
use crate::lattice::{linf, Rect};
use crate::matching::{one_side_cover, HallCertificate, Matching, Side, NONE};
use crate::window::CosetWindow;

/// Cube of L∞ radius `r` around `c`.
pub(crate) fn ball(c: &[i64], r: i64) -> Rect {
    Rect::cube(c.iter().map(|x| x - r).collect(), 2 * r + 1)
}

/// Orders a net cell and its candidate as (A-cell, B-cell).
pub(crate) fn as_edge<'a>(side: Side, x: &'a [i64], y: &'a [i64]) -> (&'a [i64], &'a [i64]) {
    match side {
        Side::A => (x, y),
        Side::B => (y, x),
    }
}

/// Hall certificate blocking the extension of m ∪ {(x, y)} to a matching covering every A- and
/// B-cell within distance j of x, or `None` when the extension exists. `side` is the part of x.
pub fn extension_certificate(
    win: &CosetWindow,
    m: &Matching,
    side: Side,
    x: &[i64],
    y: &[i64],
    j: i64,
) -> Result<Option<HallCertificate>> {
    let w = &win.window;
    let mc = win.m_cap() as i64;
    let (a, b) = as_edge(side, x, y);
    let (Some(ai), Some(bi)) = (w.index_of(a), w.index_of(b)) else {
        return Err(Error::arg("edge endpoints must lie in the window"));
    };
    if !win.a_bits.get(ai) || !win.b_bits.get(bi) || linf(a, b) > mc {
        return Err(Error::arg(format!("{a:?} -> {b:?} is not an edge of the translation graph")));
    }
    if j < 0 {
        return Err(Error::arg("horizon must be non-negative"));
    }
    let region = ball(x, j + mc);
    if !w.contains_rect(&region) {
        return Err(Error::arg(format!("horizon {j} around {x:?} leaves the window")));
    }
    if m.partner_of_a(ai).is_some() || m.partner_of_b(bi).is_some() {
        let set = vec![if m.partner_of_a(ai).is_some() { a.to_vec() } else { b.to_vec() }];
        let side = if m.partner_of_a(ai).is_some() { Side::A } else { Side::B };
        return Ok(Some(HallCertificate { side, set, neighbourhood: vec![] }));
    }
    let core = ball(x, j);
    let a_free = |c: &[i64]| {
        let i = w.index_unchecked(c);
        win.a_bits.get(i) && m.a_pieces()[i] == NONE && c != a
    };
    let b_free = |c: &[i64]| {
        let i = w.index_unchecked(c);
        win.b_bits.get(i) && m.b_pieces()[i] == NONE && c != b
    };
    if let Err((set, neighbourhood)) = one_side_cover(&region, mc, |c| core.contains(c) && a_free(c), b_free) {
        return Ok(Some(HallCertificate { side: Side::A, set, neighbourhood }));
    }
    if let Err((set, neighbourhood)) = one_side_cover(&region, mc, |c| core.contains(c) && b_free(c), a_free) {
        return Ok(Some(HallCertificate { side: Side::B, set, neighbourhood }));
    }
    Ok(None)
}

/// Whether m ∪ {(x, y)} extends to cover all cells within distance j of x.
pub fn extendable_oracle(win: &CosetWindow, m: &Matching, side: Side, x: &[i64], y: &[i64], j: i64) -> Result<bool> {
    Ok(extension_certificate(win, m, side, x, y, j)?.is_none())
}
