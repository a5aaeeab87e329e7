// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Library side of the `ndshift` command-line tool: config schemas, the
//! subcommands as pure functions, and the acceptance suite behind
//! `ndshift verify`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use error::CliError;
pub use output::Outputs;
