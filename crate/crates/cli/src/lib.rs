//! Terminal play, report-writing commands and the JSON play service.

pub mod commands;
pub mod play;
pub mod server;
