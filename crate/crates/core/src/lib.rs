pub mod cli;
pub mod error;
pub mod hankel;
pub mod moments;
pub mod oracle;
pub mod painleve;
pub mod polynomials;
pub mod scalar;
pub mod verify;
pub mod zeros;

pub use error::{FreudError, Result};
pub use moments::{moment, moment_ode_residual, mu0, weight_eval, MomentTable, WeightParams};
pub use scalar::BigReal;
