//! CLI front door and HTTP screening service over the core pipeline.

pub mod commands;
pub mod pipeline;
pub mod service;

pub use commands::{run_cli, Cli, CliError};
pub use pipeline::{
    classify_embedding, screen_description, screen_image, ScreenLabel, ScreenResponse,
    Stage, StageError,
};
pub use service::{build_router, AppState};
