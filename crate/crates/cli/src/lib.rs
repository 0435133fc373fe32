//! Batch experiments and the HTTP session service.

pub mod config;
pub mod service;
pub mod tasks;
