pub mod coloring;
pub mod extract;
pub mod local_rule;
pub mod net;

pub use coloring::{build_sparse_coloring, SparseColoring};
pub use extract::{extract_window, extract_window_with_cap, CosetWindow, DEFAULT_MEMORY_CAP};
pub use local_rule::{apply_local_rule, IntGrid, Patch};
pub use net::greedy_sparse_net;
