//! Multi-dimensional statistical dialogue management: per-dimension dialogue
//! act agents with linear value functions, a rule-based act combiner, an
//! agenda-based simulated user behind a noisy channel, training and
//! evaluation harnesses, and a text interface.

pub mod acts;
pub mod belief;
pub mod channel;
pub mod combiner;
pub mod domain;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod manager;
pub mod nlg;
pub mod nlu;
pub mod policy;
pub mod service;
pub mod simulator;
pub mod training;

pub use error::{Error, Result};
