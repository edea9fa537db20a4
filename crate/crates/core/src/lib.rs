pub mod contact_network;
pub mod degree_model;
pub mod friendship;
pub mod epidemic;
pub mod ergm;
pub mod error;
pub mod fenwick;
pub mod harness;
pub mod population;
pub mod stub_matcher;
pub mod rng;
pub mod season;

pub use error::{Error, Result};
