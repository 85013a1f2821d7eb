//! Uncapacitated facility location: LP relaxation and filtered randomized
//! rounding, the JMS greedy baseline, characteristic-function bounds, and a
//! discretized two-coordinate game whose approachability frontier bounds the
//! approximation ratio reachable by mixing those algorithms.

pub mod charfn;
pub mod cli;
pub mod error;
pub mod game;
pub mod instance;
pub mod jms;
pub mod linprog;
pub mod relaxation;
pub mod rounding;

pub use error::{Error, Result};
