//! Sessions of the specify engine behind a line-based JSON protocol, with
//! script replay and an interactive loop for the command line.

pub mod protocol;
pub mod repl;
pub mod replay;
pub mod server;

pub use protocol::{Request, Response, Status};
pub use replay::{parse_settings, replay_script, ReplayReport};
pub use server::{serve, serve_on, Service, SettingsPatch};
