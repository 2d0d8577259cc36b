//! File formats, example reproductions and the command-line front end for
//! `lipfree-core`.

pub use lipfree_core as core;

pub mod cli;
pub mod gallery;
pub mod io;
pub mod report;
