//! Measurement pipeline for comparing poetry corpora: line and stanza
//! structure, end rhyme, approximate scansion, pronoun rates and distinctive
//! vocabulary.
//!
//! The statistics kernels are generic over the scalar type (see [`scalar`]);
//! the aliases below fix them to `f64`, which is what the CLI reports.

pub mod corpus;
pub mod lexical;
pub mod meter;
pub mod phonetics;
pub mod rhyme;
pub mod scalar;
pub mod stats;
pub mod structure;
pub mod taxonomy;

pub use corpus::{load_corpus, Corpus, InputFormat, LoadOptions, PoemRecord, Source, Template};
pub use phonetics::Dictionary;
pub use scalar::{Real, Scalar};
pub use structure::PoemStructure;

pub type LengthSummary = structure::LengthSummary<f64>;
pub type OccupancyGrid = structure::OccupancyGrid<f64>;
pub type LogOddsResult = lexical::LogOddsResult<f64>;
pub type LogOddsConfig = lexical::LogOddsConfig<f64>;
