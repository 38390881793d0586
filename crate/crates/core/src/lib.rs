pub mod analytic;
pub mod chief;
pub mod coords;
pub mod dynamics;
pub mod io;
pub mod error;
pub mod modal;
pub mod numeric;
pub mod ode;
pub mod twobody;
pub mod validation;

pub use error::{Error, Result};
