//! Bibliometric indicator computation and institution ranking.
//!
//! The pipeline: ingest publication records and affiliation alias maps,
//! filter to a publication window and document types, compute per-institution
//! indicators (publication count, total citations, mean citedness, fractional
//! top-10% count, H-index), rank institutions with standard competition
//! ranking, and compare rankings produced by different key indicators.

pub mod compare;
pub mod corpus;
pub mod corpusgen;
pub mod indicators;
pub mod ingest;
pub mod percentile;
pub mod ranking;
pub mod rat;
pub mod report;

pub mod cli;

pub use corpus::{Corpus, DocType, PublicationRecord, Window};
pub use indicators::IndicatorSet;
pub use ingest::{InstitutionProfile, ResolvedCorpus};
pub use percentile::{FieldYearThreshold, TopShareParams};
pub use ranking::{KeyIndicator, RankingTable};
pub use rat::Rat;
