//! Blocklength and power allocation for short-packet downlink transmission
//! to a robot and an actuator under finite-blocklength error models.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cnoma;
pub mod error;
pub mod fbl;
pub mod harness;
pub mod multi;
pub mod noma;
pub mod oma;
pub mod outcome;
pub mod relay;
pub mod scenario;
pub mod search;

pub use error::{Error, Result};
pub use fbl::{ChannelModel, ErrorProb, RateModel, Snr};
pub use outcome::Outcome;
pub use scenario::{Gains, Scenario};
