//! Civil-unrest forecasting from GDELT protest events.
//!
//! The pipeline runs ingest → features → labeling → models → evaluation, with
//! [`synthdata`] providing seeded corpora and an independent labeling oracle.

pub mod country;
pub mod evaluation;
pub mod fsutil;
pub mod features;
pub mod ingest;
pub mod labeling;
pub mod models;
pub mod pipeline;
pub mod synthdata;

pub use country::CountryCode;
