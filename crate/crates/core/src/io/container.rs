use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, LoadError, Result};
use crate::geometry::{FreeVectorSystem, TorusPoint};
use crate::lattice::{CellSet, Rect};
use crate::matching::{Matching, NONE};
use crate::window::CosetWindow;

pub const MAGIC: &[u8; 8] = b"EQDC0001";
pub const FORMAT_VERSION: &str = "0001";
const PIECE_NONE: u16 = 0xFFFF;
const FLAG_MATCHING: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hashes {
    pub header: String,
    pub a: String,
    pub b: String,
    pub pieces: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: String,
    /// Echo of the run configuration.
    pub config: serde_json::Value,
    pub base: TorusPoint,
    pub sys: FreeVectorSystem,
    pub buffer: i64,
    pub hashes: Hashes,
    pub reports: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoredRun {
    pub window: CosetWindow,
    pub matching: Option<Matching>,
    pub config: serde_json::Value,
    pub reports: serde_json::Value,
}

/// Largest M whose (2M+1)^d piece indices stay below the NONE sentinel.
pub fn max_m_for(d: usize) -> u32 {
    let mut m = 0u32;
    while (2 * (m as u64 + 1) + 1).checked_pow(d as u32).is_some_and(|v| v <= PIECE_NONE as u64 - 1) {
        m += 1;
    }
    m
}

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Bits of a grid, LSB-first, each row along the last axis padded to whole bytes.
fn pack_bits(s: &CellSet) -> Vec<u8> {
    let r = s.rect();
    let row = *r.sides.last().unwrap() as usize;
    let row_bytes = row.div_ceil(8);
    let rows = r.volume() / row.max(1);
    let mut out = vec![0u8; rows * row_bytes];
    for i in s.iter_indices() {
        let (q, c) = (i / row, i % row);
        out[q * row_bytes + c / 8] |= 1 << (c % 8);
    }
    out
}

fn unpack_bits(r: &Rect, bytes: &[u8]) -> Result<CellSet> {
    let row = *r.sides.last().unwrap() as usize;
    let row_bytes = row.div_ceil(8);
    let mut s = CellSet::new(r.clone());
    for i in 0..r.volume() {
        let (q, c) = (i / row, i % row);
        if bytes[q * row_bytes + c / 8] >> (c % 8) & 1 == 1 {
            s.insert_index(i);
        }
    }
    for q in 0..r.volume() / row.max(1) {
        let tail = row % 8;
        if tail != 0 && bytes[q * row_bytes + row_bytes - 1] >> tail != 0 {
            return Err(LoadError::Malformed("non-zero row padding".into()).into());
        }
    }
    Ok(s)
}

fn bit_bytes(r: &Rect) -> usize {
    let row = *r.sides.last().unwrap() as usize;
    (r.volume() / row.max(1)) * row.div_ceil(8)
}

pub fn encode_run(
    win: &CosetWindow,
    matching: Option<&Matching>,
    config: &serde_json::Value,
    reports: &serde_json::Value,
) -> Result<Vec<u8>> {
    if let Some(mm) = matching {
        if mm.window() != &win.window || mm.m_cap() != win.m_cap() {
            return Err(Error::arg("matching does not belong to this window"));
        }
    }
    encode_pieces(win, matching.map(|mm| mm.a_pieces()), config, reports)
}

/// Encodes a raw A-side piece grid without checking that it is a matching; `verify` is the
/// place where such grids get rejected.
pub fn encode_pieces(
    win: &CosetWindow,
    pieces: Option<&[u32]>,
    config: &serde_json::Value,
    reports: &serde_json::Value,
) -> Result<Vec<u8>> {
    let d = win.d();
    let m = win.m_cap();
    if m > max_m_for(d) {
        return Err(Error::Resource(format!(
            "(2M+1)^d = {}^{d} piece indices do not fit below the 16-bit NONE sentinel",
            2 * m as u64 + 1
        )));
    }
    if pieces.is_some_and(|p| p.len() != win.window.volume()) {
        return Err(Error::arg("piece grid does not cover the window"));
    }
    let limit = (2 * m as u64 + 1).pow(d as u32);
    if pieces.is_some_and(|p| p.iter().any(|&v| v != NONE && v as u64 >= limit)) {
        return Err(Error::arg("piece index out of range"));
    }
    let mut header = Vec::new();
    header.extend_from_slice(&(d as u32).to_le_bytes());
    header.extend_from_slice(&(win.sys.k as u32).to_le_bytes());
    header.extend_from_slice(&m.to_le_bytes());
    for &v in win.window.low.iter().chain(&win.window.sides) {
        header.extend_from_slice(&v.to_le_bytes());
    }
    let flags = if pieces.is_some() { FLAG_MATCHING } else { 0 };
    header.extend_from_slice(&flags.to_le_bytes());
    let a = pack_bits(&win.a_bits);
    let b = pack_bits(&win.b_bits);
    let pieces: Option<Vec<u8>> = pieces.map(|ps| {
        ps.iter().flat_map(|&p| if p == NONE { PIECE_NONE } else { p as u16 }.to_le_bytes()).collect()
    });
    let manifest = Manifest {
        format_version: FORMAT_VERSION.into(),
        config: config.clone(),
        base: win.base.clone(),
        sys: win.sys.clone(),
        buffer: win.buffer,
        hashes: Hashes { header: sha(&header), a: sha(&a), b: sha(&b), pieces: pieces.as_deref().map(sha) },
        reports: reports.clone(),
    };
    let json = serde_json::to_vec(&manifest)?;
    let mut out = Vec::with_capacity(8 + header.len() + a.len() + b.len() + json.len() + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&header);
    out.extend_from_slice(&a);
    out.extend_from_slice(&b);
    if let Some(p) = &pieces {
        out.extend_from_slice(p);
    }
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], LoadError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(LoadError::Truncated { needed: self.pos.saturating_add(n), have: self.buf.len() });
        };
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, LoadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, LoadError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn check(name: &str, expected: Option<&String>, bytes: &[u8]) -> std::result::Result<(), LoadError> {
    match expected {
        Some(h) if *h == sha(bytes) => Ok(()),
        _ => Err(LoadError::HashMismatch(name.into())),
    }
}

pub fn decode_run(buf: &[u8]) -> Result<StoredRun> {
    let mut r = Reader { buf, pos: 0 };
    let magic = r.take(8)?;
    if &magic[..4] != b"EQDC" {
        return Err(LoadError::BadMagic.into());
    }
    if magic != MAGIC {
        return Err(LoadError::UnsupportedVersion(String::from_utf8_lossy(&magic[4..]).into_owned()).into());
    }
    let h0 = r.pos;
    let d = r.u32()? as usize;
    let k = r.u32()? as usize;
    let m = r.u32()?;
    if !(1..=8).contains(&d) || k == 0 {
        return Err(LoadError::Malformed(format!("implausible dimensions d = {d}, k = {k}")).into());
    }
    let mut vals = Vec::with_capacity(2 * d);
    for _ in 0..2 * d {
        vals.push(r.u64()? as i64);
    }
    let flags = r.u32()?;
    let header = &buf[h0..r.pos];
    let window = Rect::new(vals[..d].to_vec(), vals[d..].to_vec())
        .map_err(|e| LoadError::Malformed(format!("window: {e}")))?;
    let n = window.volume();
    let nb = bit_bytes(&window);
    let a = r.take(nb)?;
    let b = r.take(nb)?;
    let pieces = if flags & FLAG_MATCHING != 0 { Some(r.take(2 * n)?) } else { None };
    let len = r.u64()? as usize;
    let json = r.take(len)?;
    if r.pos != buf.len() {
        return Err(LoadError::Malformed(format!("{} trailing bytes", buf.len() - r.pos)).into());
    }
    let manifest: Manifest =
        serde_json::from_slice(json).map_err(|e| LoadError::Malformed(format!("manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(LoadError::UnsupportedVersion(manifest.format_version).into());
    }
    check("header", Some(&manifest.hashes.header), header)?;
    check("a", Some(&manifest.hashes.a), a)?;
    check("b", Some(&manifest.hashes.b), b)?;
    if let Some(p) = pieces {
        check("pieces", manifest.hashes.pieces.as_ref(), p)?;
    }
    if manifest.sys.d != d || manifest.sys.k != k || manifest.sys.m_cap != m {
        return Err(LoadError::Malformed("manifest disagrees with header".into()).into());
    }
    if m > max_m_for(d) {
        return Err(LoadError::Malformed(format!("M = {m} exceeds the 16-bit piece range")).into());
    }
    let a_bits = unpack_bits(&window, a)?;
    let b_bits = unpack_bits(&window, b)?;
    let mut win = CosetWindow::from_bits(manifest.base, manifest.sys, a_bits, b_bits)?;
    win.buffer = manifest.buffer;
    let matching = match pieces {
        Some(p) => {
            let idx: Vec<u32> = p
                .chunks_exact(2)
                .map(|c| match u16::from_le_bytes([c[0], c[1]]) {
                    PIECE_NONE => NONE,
                    v => v as u32,
                })
                .collect();
            Some(Matching::from_a_pieces(window, m, idx)?)
        }
        None => None,
    };
    Ok(StoredRun { window: win, matching, config: manifest.config, reports: manifest.reports })
}

/// Writes through a temporary sibling so a failed save never leaves a partial container.
pub fn save_run(
    path: &Path,
    win: &CosetWindow,
    matching: Option<&Matching>,
    config: &serde_json::Value,
    reports: &serde_json::Value,
) -> Result<()> {
    let bytes = encode_run(win, matching, config, reports)?;
    let tmp = path.with_extension("eqdc.tmp");
    std::fs::write(&tmp, &bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_run(path: &Path) -> Result<StoredRun> {
    decode_run(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_free_system, Shape};
    use crate::matching::{canonical_max_matching, TranslationGraph};
    use crate::window::extract_window;
    use serde_json::json;

    fn sample(m: u32) -> (CosetWindow, Matching) {
        let sys = sample_free_system(3, 2, 2, m).unwrap();
        let a = Shape::disk(vec![0.5, 0.5], 0.2);
        let b = Shape::square(vec![0.1, 0.2], 0.35);
        let win = extract_window(&a, &b, &sys, &TorusPoint::new(vec![0.3, 0.7]), &Rect::new(vec![-5, 3], vec![21, 13]).unwrap()).unwrap();
        let g = TranslationGraph::from_window(&win);
        let mm = canonical_max_matching(&g, &win.window).unwrap();
        (win, mm)
    }

    #[test]
    fn round_trip_is_exact() {
        let (win, m) = sample(3);
        let cfg = json!({"seed": 3, "note": "x"});
        let rep = json!([{"level": 0}]);
        let bytes = encode_run(&win, Some(&m), &cfg, &rep).unwrap();
        let back = decode_run(&bytes).unwrap();
        assert_eq!(back.window, win);
        assert_eq!(back.matching.as_ref(), Some(&m));
        assert_eq!(back.config, cfg);
        assert_eq!(back.reports, rep);
        assert_eq!(encode_run(&back.window, back.matching.as_ref(), &cfg, &rep).unwrap(), bytes);
        let none = decode_run(&encode_run(&win, None, &cfg, &rep).unwrap()).unwrap();
        assert!(none.matching.is_none());
    }

    #[test]
    fn corruption_is_detected() {
        let (win, m) = sample(2);
        let bytes = encode_run(&win, Some(&m), &json!({}), &json!(null)).unwrap();
        let nb = bit_bytes(&win.window);
        let header_len = 12 + 32 + 4;
        let pieces_at = 8 + header_len + 2 * nb;
        let mut bad = bytes.clone();
        bad[pieces_at + 5] ^= 0x01;
        assert!(matches!(decode_run(&bad), Err(Error::Load(LoadError::HashMismatch(s))) if s == "pieces"));
        let mut bad = bytes.clone();
        bad[8 + header_len + 1] ^= 0x80;
        assert!(matches!(decode_run(&bad), Err(Error::Load(LoadError::HashMismatch(s))) if s == "a"));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_run(&bad), Err(Error::Load(LoadError::BadMagic))));
        let mut bad = bytes.clone();
        bad[7] = b'9';
        assert!(matches!(decode_run(&bad), Err(Error::Load(LoadError::UnsupportedVersion(_)))));
        assert!(matches!(decode_run(&bytes[..bytes.len() - 3]), Err(Error::Load(LoadError::Truncated { .. }))));
        assert!(matches!(decode_run(&bytes[..20]), Err(Error::Load(LoadError::Truncated { .. }))));
    }

    #[test]
    fn piece_range_boundary() {
        assert_eq!(max_m_for(2), 127);
        assert_eq!(max_m_for(3), 19);
        let w = Rect::cube(vec![0, 0], 3);
        let mk = |m| {
            let sys = sample_free_system(1, 2, 2, m).unwrap();
            CosetWindow::from_bits(TorusPoint::zero(2), sys, CellSet::new(w.clone()), CellSet::new(w.clone())).unwrap()
        };
        assert!(encode_run(&mk(127), None, &json!({}), &json!(null)).is_ok());
        assert!(matches!(encode_run(&mk(128), None, &json!({}), &json!(null)), Err(Error::Resource(_))));
    }

    #[test]
    fn save_and_load_files() {
        let (win, m) = sample(2);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.eqdc");
        save_run(&p, &win, Some(&m), &json!({}), &json!([])).unwrap();
        let back = load_run(&p).unwrap();
        assert_eq!(back.matching.unwrap(), m);
    }
}
