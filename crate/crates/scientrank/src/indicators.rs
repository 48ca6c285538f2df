//! Per-institution scalar indicators over a windowed, type-filtered record set.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::corpus::{DocType, PublicationRecord, Window};
use crate::ingest::ResolvedCorpus;
use crate::percentile::{self, PercentileError, ThresholdMap, TopShareParams};
use crate::rat::{self, Rat};

/// The five-tuple the ranking tables are built from. `mean_citedness` is
/// absent (not zero) when the institution has no windowed publications, so
/// empty institutions can never rank on citedness.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    pub inst_id: String,
    pub window: Window,
    pub pub_count: u64,
    pub citation_total: u64,
    pub mean_citedness: Option<Rat>,
    pub top10_count: Rat,
    pub h_index: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum IndicatorError {
    #[error("unknown institution: {inst_id}")]
    UnknownInstitution { inst_id: String },
    #[error("mean citedness undefined: no publications")]
    UndefinedMean,
    #[error(transparent)]
    Percentile(#[from] PercentileError),
}

/// Scope of the H-index computation. The windowed scope matches the other
/// indicators; the all-time scope mirrors rankings built on an institution's
/// whole history and is what makes the staleness contrast visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HScope {
    #[default]
    Windowed,
    AllTime,
}

fn windowed<'a>(
    resolved: &'a ResolvedCorpus,
    inst_id: &'a str,
    window: Window,
    allowed: &'a BTreeSet<DocType>,
) -> Result<impl Iterator<Item = &'a PublicationRecord>, IndicatorError> {
    if !resolved.knows(inst_id) {
        return Err(IndicatorError::UnknownInstitution {
            inst_id: inst_id.to_string(),
        });
    }
    Ok(resolved
        .records_of(inst_id)
        .filter(move |r| window.contains(r.year) && allowed.contains(&r.doc_type)))
}

pub fn publication_count(
    resolved: &ResolvedCorpus,
    inst_id: &str,
    window: Window,
    allowed: &BTreeSet<DocType>,
) -> Result<u64, IndicatorError> {
    Ok(windowed(resolved, inst_id, window, allowed)?.count() as u64)
}

pub fn citation_total(
    resolved: &ResolvedCorpus,
    inst_id: &str,
    window: Window,
    allowed: &BTreeSet<DocType>,
) -> Result<u64, IndicatorError> {
    Ok(windowed(resolved, inst_id, window, allowed)?
        .map(|r| r.citations)
        .sum())
}

/// Exact rational C/P. P = 0 is an error, never 0 or infinity.
pub fn mean_citedness(citation_total: u64, pub_count: u64) -> Result<Rat, IndicatorError> {
    if pub_count == 0 {
        return Err(IndicatorError::UndefinedMean);
    }
    Ok(rat::from_int(citation_total) / rat::from_int(pub_count))
}

/// Largest h such that at least h citation counts are ≥ h; 0 for empty input.
pub fn h_index(citations: &[u64]) -> u64 {
    let mut sorted: Vec<u64> = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c >= (i as u64) + 1)
        .count() as u64
}

/// Assembles the full indicator set for one institution: P, C, MC, H over
/// `allowed` doc types within the window; T from the percentile thresholds
/// over the same record set.
pub fn indicator_set(
    resolved: &ResolvedCorpus,
    inst_id: &str,
    window: Window,
    thresholds: &ThresholdMap,
    params: &TopShareParams,
    allowed: &BTreeSet<DocType>,
    h_scope: HScope,
) -> Result<(IndicatorSet, Vec<String>), IndicatorError> {
    let records: Vec<&PublicationRecord> =
        windowed(resolved, inst_id, window, allowed)?.collect();
    let pub_count = records.len() as u64;
    let citation_total: u64 = records.iter().map(|r| r.citations).sum();
    let mean = if pub_count == 0 {
        None
    } else {
        Some(mean_citedness(citation_total, pub_count)?)
    };
    let (top10, diagnostics) =
        percentile::top10_count(records.iter().copied(), thresholds, params)?;
    let h_citations: Vec<u64> = match h_scope {
        HScope::Windowed => records.iter().map(|r| r.citations).collect(),
        HScope::AllTime => resolved.records_of(inst_id).map(|r| r.citations).collect(),
    };
    Ok((
        IndicatorSet {
            inst_id: inst_id.to_string(),
            window,
            pub_count,
            citation_total,
            mean_citedness: mean,
            top10_count: top10,
            h_index: h_index(&h_citations),
        },
        diagnostics,
    ))
}

impl IndicatorSet {
    /// Builds a set from precomputed table values; H is unavailable on this
    /// path and reported as 0 alongside `has_h = false` at the ranking layer.
    pub fn from_precomputed(
        inst_id: &str,
        window: Window,
        pubs: u64,
        citations: u64,
        top10: Rat,
        mean_override: Option<Rat>,
    ) -> IndicatorSet {
        let mean = match mean_override {
            Some(m) => Some(m),
            None if pubs > 0 => Some(rat::from_int(citations) / rat::from_int(pubs)),
            None => None,
        };
        IndicatorSet {
            inst_id: inst_id.to_string(),
            window,
            pub_count: pubs,
            citation_total: citations,
            mean_citedness: mean,
            top10_count: top10,
            h_index: 0,
        }
    }
}

/// Test-support oracle: scan h upward from 0. Kept independent of `h_index`.
pub fn h_index_bruteforce(citations: &[u64]) -> u64 {
    let n = citations.len() as u64;
    let mut best = 0;
    for h in 0..=n {
        let at_least = citations.iter().filter(|&&c| c >= h).count() as u64;
        if at_least >= h {
            best = h;
        }
    }
    best
}
