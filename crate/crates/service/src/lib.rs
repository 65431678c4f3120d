//! REST service and command-line front end of the evaluation engine.
//!
//! [`ops::Service`] implements every operation once; [`http`] exposes it
//! over HTTP/JSON and [`cli`] from the command line.

pub mod cli;
pub mod error;
pub mod http;
pub mod openapi;
pub mod ops;

pub use error::{ApiError, ErrorBody};
pub use ops::Service;
