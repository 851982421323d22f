//! Scenario files and the command front end of the solver.

pub mod expr;
pub mod run;
pub mod scenario;

pub use run::{run, Command, Exit, Failure, Flags};
pub use scenario::Scenario;
