// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] ndshift::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// Process exit status: 2 for output paths that cannot be written, 1
    /// for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unwritable { .. } => 2,
            _ => 1,
        }
    }
}
