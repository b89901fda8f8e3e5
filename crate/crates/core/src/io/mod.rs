//! EQDC containers and piece-map rendering.

pub mod container;
pub mod render;

pub use container::{decode_run, encode_pieces, encode_run, load_run, max_m_for, save_run, Hashes, Manifest, StoredRun, FORMAT_VERSION, MAGIC};
pub use render::{palette, render_pieces, PieceMap};
