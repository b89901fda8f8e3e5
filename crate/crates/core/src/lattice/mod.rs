pub mod boundary;
pub mod cellset;
pub mod components;
pub mod rect;
pub mod rect_tree;

pub use boundary::{boundary, dist_ball, internal_boundary, isoperimetry_check, perimeter, IsoperimetryCheck};
pub use cellset::CellSet;
pub use components::{ell_components, Partition, NO_LABEL};
pub use rect::{linf, offsets_row_major, piece_index, piece_offset, Rect};
pub use rect_tree::{build_rect_tree, RectTree, TreeNode};
