//! Test-support code. Not used by any production path.

pub mod oracles;
