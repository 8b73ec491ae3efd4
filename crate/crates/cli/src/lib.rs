//! Command-line front end and HTTP service for the explanation engine.

pub mod commands;
pub mod server;
