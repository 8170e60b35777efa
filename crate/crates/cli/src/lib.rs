//! IO, rendering and pipeline orchestration around the core DAS library.

pub mod commands;
pub mod config;
pub mod io;
pub mod render;
pub mod stage;
