//! File formats, experiment sweeps and the `dude-cli` front end for
//! `dude-core`.

pub mod channel_file;
pub mod checkpoint;
pub mod cli;
mod error;
pub mod pbm;
pub mod select;
pub mod seqfile;
pub mod source;
pub mod sweep;

pub use cli::{cli_main, cli_main_with};
pub use error::{HarnessError, Result};
