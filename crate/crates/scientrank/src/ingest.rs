//! Record/alias parsing and affiliation resolution.
//!
//! Affiliation strings are free text; a record whose affiliation variant is
//! not in the alias map lands in the `unresolved` report instead of anyone's
//! profile. Matching is exact after normalization, never fuzzy, so counts
//! stay auditable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{validate_record, Corpus, DocType, PublicationRecord, RawRecord};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstitutionProfile {
    pub inst_id: String,
    pub name: String,
    pub aliases: BTreeSet<String>,
}

/// A corpus plus the record → institution assignment derived from alias
/// matching. `unresolved` counts occurrences of affiliation strings that
/// matched no profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCorpus {
    pub corpus: Corpus,
    pub assignment: BTreeMap<String, BTreeSet<String>>,
    pub unresolved: BTreeMap<String, u64>,
    pub institutions: BTreeMap<String, String>,
}

impl ResolvedCorpus {
    pub fn knows(&self, inst_id: &str) -> bool {
        self.institutions.contains_key(inst_id)
    }

    /// Records assigned to one institution, in corpus order.
    pub fn records_of<'a>(
        &'a self,
        inst_id: &'a str,
    ) -> impl Iterator<Item = &'a PublicationRecord> {
        self.corpus.records.iter().filter(move |r| {
            self.assignment
                .get(&r.id)
                .is_some_and(|insts| insts.contains(inst_id))
        })
    }
}

/// Precomputed per-institution indicator values, as published in ranking
/// tables (value/rank layout). Used to reproduce published tables when the
/// underlying reference corpus is unavailable.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorRow {
    pub inst_id: String,
    pub top10: Rat,
    pub citations: u64,
    pub pubs: u64,
    pub mean_override: Option<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

impl RecordFormat {
    pub fn parse(s: &str) -> Option<RecordFormat> {
        match s {
            "jsonl" => Some(RecordFormat::Jsonl),
            "csv" => Some(RecordFormat::Csv),
            _ => None,
        }
    }
}

/// Per-line parse problem; line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable stream: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed alias map: {0}")]
    AliasFormat(String),
    #[error("alias collision: {alias:?} listed under {first} and {second}")]
    AliasCollision {
        alias: String,
        first: String,
        second: String,
    },
    #[error("empty alias set for institution {inst_id}")]
    EmptyAliasSet { inst_id: String },
    #[error("duplicate institution id: {inst_id}")]
    DuplicateInstitution { inst_id: String },
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
}

/// Parses records from JSONL or CSV. Per-line invariant violations become
/// diagnostics, not fatal errors; only an unreadable stream is fatal.
pub fn parse_records(
    reader: impl Read,
    format: RecordFormat,
) -> Result<(Vec<PublicationRecord>, Vec<Diagnostic>), IngestError> {
    match format {
        RecordFormat::Jsonl => parse_jsonl(reader),
        RecordFormat::Csv => parse_csv(reader),
    }
}

fn parse_jsonl(reader: impl Read) -> Result<(Vec<PublicationRecord>, Vec<Diagnostic>), IngestError> {
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawRecord>(&line) {
            Ok(raw) => match validate_record(&raw) {
                Ok(rec) => records.push(rec),
                Err(violations) => {
                    for v in violations {
                        diagnostics.push(Diagnostic {
                            line: lineno,
                            message: v.to_string(),
                        });
                    }
                }
            },
            Err(e) => diagnostics.push(Diagnostic {
                line: lineno,
                message: format!("invalid record: {e}"),
            }),
        }
    }
    Ok((records, diagnostics))
}

fn parse_csv(reader: impl Read) -> Result<(Vec<PublicationRecord>, Vec<Diagnostic>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();

    #[derive(Deserialize)]
    struct CsvRow {
        id: String,
        year: String,
        doc_type: String,
        fields: String,
        citations: String,
        affiliations: String,
    }

    for (idx, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let lineno = idx + 2; // header is line 1
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                diagnostics.push(Diagnostic {
                    line: lineno,
                    message: format!("invalid row: {e}"),
                });
                continue;
            }
        };
        let year = match row.year.trim().parse::<i64>() {
            Ok(y) => y,
            Err(_) => {
                diagnostics.push(Diagnostic {
                    line: lineno,
                    message: format!("year: not an integer: {:?}", row.year),
                });
                continue;
            }
        };
        let citations = match row.citations.trim().parse::<i64>() {
            Ok(c) => c,
            Err(_) => {
                diagnostics.push(Diagnostic {
                    line: lineno,
                    message: format!("citations: not an integer: {:?}", row.citations),
                });
                continue;
            }
        };
        let doc_type = match DocType::parse(row.doc_type.trim()) {
            Some(d) => d,
            None => {
                diagnostics.push(Diagnostic {
                    line: lineno,
                    message: format!("doc_type: unknown value: {:?}", row.doc_type),
                });
                continue;
            }
        };
        let split = |s: &str| -> Vec<String> {
            s.split('|')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(String::from)
                .collect()
        };
        let raw = RawRecord {
            id: row.id,
            year,
            doc_type,
            fields: split(&row.fields),
            citations,
            affiliations: split(&row.affiliations),
        };
        match validate_record(&raw) {
            Ok(rec) => records.push(rec),
            Err(violations) => {
                for v in violations {
                    diagnostics.push(Diagnostic {
                        line: lineno,
                        message: v.to_string(),
                    });
                }
            }
        }
    }
    Ok((records, diagnostics))
}

#[derive(Deserialize)]
struct ProfileJson {
    inst_id: String,
    name: String,
    aliases: Vec<String>,
}

/// Loads the alias map, enforcing alias disjointness across institutions
/// (after normalization) and non-empty alias sets. The display name always
/// counts as an alias.
pub fn load_alias_map(reader: impl Read) -> Result<Vec<InstitutionProfile>, IngestError> {
    let raw: Vec<ProfileJson> =
        serde_json::from_reader(reader).map_err(|e| IngestError::AliasFormat(e.to_string()))?;
    let mut profiles = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut owner: HashMap<String, String> = HashMap::new();
    for p in raw {
        if !seen_ids.insert(p.inst_id.clone()) {
            return Err(IngestError::DuplicateInstitution { inst_id: p.inst_id });
        }
        if p.aliases.is_empty() && p.name.trim().is_empty() {
            return Err(IngestError::EmptyAliasSet { inst_id: p.inst_id });
        }
        let mut aliases: BTreeSet<String> = p.aliases.into_iter().collect();
        aliases.insert(p.name.clone());
        for alias in &aliases {
            let norm = normalize_affiliation(alias);
            if norm.is_empty() {
                continue;
            }
            if let Some(prev) = owner.insert(norm, p.inst_id.clone()) {
                if prev != p.inst_id {
                    return Err(IngestError::AliasCollision {
                        alias: alias.clone(),
                        first: prev,
                        second: p.inst_id,
                    });
                }
            }
        }
        profiles.push(InstitutionProfile {
            inst_id: p.inst_id,
            name: p.name,
            aliases,
        });
    }
    Ok(profiles)
}

/// Normalization applied before exact alias matching: case-fold, collapse
/// internal whitespace, strip leading/trailing punctuation and whitespace.
pub fn normalize_affiliation(s: &str) -> String {
    let stripped = s.trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation());
    stripped
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Matches each raw affiliation string against the normalized alias index.
/// Unmatched strings accumulate in `unresolved` with occurrence counts.
pub fn resolve_affiliations(
    records: Vec<PublicationRecord>,
    profiles: &[InstitutionProfile],
) -> Result<ResolvedCorpus, crate::corpus::CorpusError> {
    let corpus = Corpus::new(records, "resolved")?;
    let mut index: HashMap<String, String> = HashMap::new();
    let mut institutions = BTreeMap::new();
    for p in profiles {
        institutions.insert(p.inst_id.clone(), p.name.clone());
        // the display name always counts as an alias
        for alias in p.aliases.iter().chain(std::iter::once(&p.name)) {
            let norm = normalize_affiliation(alias);
            if !norm.is_empty() {
                index.insert(norm, p.inst_id.clone());
            }
        }
    }
    let mut assignment: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut unresolved: BTreeMap<String, u64> = BTreeMap::new();
    for rec in &corpus.records {
        let entry = assignment.entry(rec.id.clone()).or_default();
        for aff in &rec.affiliations {
            match index.get(&normalize_affiliation(aff)) {
                Some(inst_id) => {
                    entry.insert(inst_id.clone());
                }
                None => {
                    *unresolved.entry(aff.clone()).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(ResolvedCorpus {
        corpus,
        assignment,
        unresolved,
        institutions,
    })
}

/// Loads the precomputed-indicator CSV: header `inst_id,top10,citations,pubs`
/// with an optional trailing `mean` override column.
pub fn load_indicator_rows(reader: impl Read) -> Result<Vec<IndicatorRow>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::AliasFormat(e.to_string()))?
        .clone();
    let expected = ["inst_id", "top10", "citations", "pubs"];
    for (i, name) in expected.iter().enumerate() {
        if headers.get(i).map(str::trim) != Some(*name) {
            return Err(IngestError::BadRow {
                row: 1,
                message: format!(
                    "expected header starting with {}, got {:?}",
                    expected.join(","),
                    headers
                ),
            });
        }
    }
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rowno = idx + 2;
        let rec = rec.map_err(|e| IngestError::BadRow {
            row: rowno,
            message: e.to_string(),
        })?;
        let cell = |i: usize| rec.get(i).unwrap_or("").trim();
        let inst_id = cell(0).to_string();
        if inst_id.is_empty() {
            return Err(IngestError::BadRow {
                row: rowno,
                message: "empty inst_id".into(),
            });
        }
        let top10 = rat::parse(cell(1)).ok_or_else(|| IngestError::BadRow {
            row: rowno,
            message: format!("top10: malformed numeric cell {:?}", cell(1)),
        })?;
        if top10 < rat::from_int(0) {
            return Err(IngestError::BadRow {
                row: rowno,
                message: format!("top10: negative value {:?}", cell(1)),
            });
        }
        let parse_count = |i: usize, name: &str| -> Result<u64, IngestError> {
            cell(i).parse::<u64>().map_err(|_| IngestError::BadRow {
                row: rowno,
                message: format!("{name}: malformed numeric cell {:?}", cell(i)),
            })
        };
        let citations = parse_count(2, "citations")?;
        let pubs = parse_count(3, "pubs")?;
        let mean_override = match rec.get(4).map(str::trim) {
            Some(s) if !s.is_empty() => Some(rat::parse(s).ok_or_else(|| IngestError::BadRow {
                row: rowno,
                message: format!("mean: malformed numeric cell {s:?}"),
            })?),
            _ => None,
        };
        rows.push(IndicatorRow {
            inst_id,
            top10,
            citations,
            pubs,
            mean_override,
        });
    }
    Ok(rows)
}
