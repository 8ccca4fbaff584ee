pub mod config;
pub mod error;
pub mod kb;
pub mod links;
pub mod ntriples;
pub mod matcher;
pub mod preorder;
pub mod rules;
pub mod testkit;
pub mod tuples;

pub use error::{Error, Result};
