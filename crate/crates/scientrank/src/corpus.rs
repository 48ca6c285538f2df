//! Domain types for publication corpora and pure sub-corpus filters.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const YEAR_MIN: i32 = 1900;
pub const YEAR_MAX: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 3] = [DocType::Article, DocType::Review, DocType::Other];

    pub fn parse(s: &str) -> Option<DocType> {
        match s {
            "article" => Some(DocType::Article),
            "review" => Some(DocType::Review),
            "other" => Some(DocType::Other),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Default counting basis for the ranking tables: articles and reviews only.
pub fn articles_and_reviews() -> BTreeSet<DocType> {
    [DocType::Article, DocType::Review].into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub fields: BTreeSet<String>,
    pub citations: u64,
    pub affiliations: Vec<String>,
}

/// Inclusive publication-year window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start_year: i32,
    pub end_year: i32,
}

impl Window {
    pub fn new(start_year: i32, end_year: i32) -> Result<Window, CorpusError> {
        if start_year > end_year {
            return Err(CorpusError::InvalidWindow {
                start_year,
                end_year,
            });
        }
        Ok(Window {
            start_year,
            end_year,
        })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start_year <= year && year <= self.end_year
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start_year..=self.end_year
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let start = self.start_year.max(other.start_year);
        let end = self.end_year.min(other.end_year);
        (start <= end).then_some(Window {
            start_year: start,
            end_year: end,
        })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start_year, self.end_year)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub records: Vec<PublicationRecord>,
    pub provenance: String,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate record ids.
    pub fn new(
        records: Vec<PublicationRecord>,
        provenance: impl Into<String>,
    ) -> Result<Corpus, CorpusError> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId { id: r.id.clone() });
            }
        }
        Ok(Corpus {
            records,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("invalid window: start {start_year} > end {end_year}")]
    InvalidWindow { start_year: i32, end_year: i32 },
    #[error("duplicate record id: {id}")]
    DuplicateId { id: String },
}

/// One named invariant violation found while validating a candidate record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Candidate record before invariant checks; numeric fields are wide enough to
/// hold out-of-range input so violations can be reported rather than lost in
/// deserialization.
#[derive(Debug, Clone, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub year: i64,
    pub doc_type: DocType,
    pub fields: Vec<String>,
    pub citations: i64,
    pub affiliations: Vec<String>,
}

/// Checks every type invariant; never repairs. Duplicate ids are a corpus-level
/// concern (`Corpus::new`).
pub fn validate_record(raw: &RawRecord) -> Result<PublicationRecord, Vec<Violation>> {
    let mut violations = Vec::new();
    if raw.id.is_empty() {
        violations.push(Violation {
            field: "id",
            message: "empty id".into(),
        });
    }
    if raw.year < YEAR_MIN as i64 || raw.year > YEAR_MAX as i64 {
        violations.push(Violation {
            field: "year",
            message: format!("year {} outside [{YEAR_MIN}, {YEAR_MAX}]", raw.year),
        });
    }
    if raw.citations < 0 {
        violations.push(Violation {
            field: "citations",
            message: format!("citations negative: {}", raw.citations),
        });
    }
    if raw.fields.is_empty() {
        violations.push(Violation {
            field: "fields",
            message: "fields empty".into(),
        });
    }
    if raw.affiliations.is_empty() {
        violations.push(Violation {
            field: "affiliations",
            message: "affiliations empty".into(),
        });
    }
    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(PublicationRecord {
        id: raw.id.clone(),
        year: raw.year as i32,
        doc_type: raw.doc_type,
        fields: raw.fields.iter().cloned().collect(),
        citations: raw.citations as u64,
        affiliations: raw.affiliations.clone(),
    })
}

/// Keeps exactly the records whose publication year lies in the window.
/// Order preserved, records untouched.
pub fn filter_window(corpus: &Corpus, window: Window) -> Corpus {
    Corpus {
        records: corpus
            .records
            .iter()
            .filter(|r| window.contains(r.year))
            .cloned()
            .collect(),
        provenance: corpus.provenance.clone(),
    }
}

/// Keeps exactly the records whose document type is in `allowed`.
pub fn filter_doc_types(corpus: &Corpus, allowed: &BTreeSet<DocType>) -> Corpus {
    Corpus {
        records: corpus
            .records
            .iter()
            .filter(|r| allowed.contains(&r.doc_type))
            .cloned()
            .collect(),
        provenance: corpus.provenance.clone(),
    }
}
