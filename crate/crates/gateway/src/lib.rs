//! HTTP service and command-line tools over `fedfeed_core`.

pub mod cli;
pub mod http;
pub mod service;

pub use service::{ApiError, Service, ServiceEvent};
