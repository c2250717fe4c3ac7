//! Non-local games, their ideal quantum strategies, and the embezzlement
//! construction of a game whose optimal value is only reached in the limit
//! of growing dimension.

pub mod cli;
pub mod embezzlement;
pub mod error;
pub mod exchange;
pub mod games;
pub mod numerics;
pub mod report;
pub mod seesaw;
pub mod strategies;

pub use error::{Error, Result};
pub use games::{Correlation, NonlocalGame};
pub use numerics::{Operator, StateVector};
pub use strategies::QuantumStrategy;
