//! Field-year top-share machinery.
//!
//! Each (field, year) cell of the reference corpus gets a citation threshold
//! `c_star` and a fractional boundary weight chosen so that the cell's
//! weights sum to exactly p·N. All threshold arithmetic is exact rational;
//! no floating point enters the membership decision.

use std::collections::BTreeMap;
use std::io::Write;

use num::traits::{One, Zero};
use thiserror::Error;

use crate::corpus::{Corpus, PublicationRecord};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldYearThreshold {
    pub field: String,
    pub year: i32,
    /// Reference-corpus size of this cell.
    pub n: u64,
    /// Boundary citation count: the unique value with
    /// n_above < p·N ≤ n_above + n_at.
    pub c_star: u64,
    pub n_above: u64,
    pub n_at: u64,
    /// (p·N − n_above) / n_at, in [0, 1].
    pub boundary_weight: Rat,
}

pub type ThresholdMap = BTreeMap<(String, i32), FieldYearThreshold>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiFieldPolicy {
    AverageOverFields,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingThresholdPolicy {
    Fatal,
    SkipWithDiagnostic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopShareParams {
    pub p: Rat,
    pub multi_field_policy: MultiFieldPolicy,
    pub missing_threshold_policy: MissingThresholdPolicy,
}

impl Default for TopShareParams {
    fn default() -> Self {
        TopShareParams {
            p: rat::ratio(1, 10),
            multi_field_policy: MultiFieldPolicy::AverageOverFields,
            missing_threshold_policy: MissingThresholdPolicy::Fatal,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PercentileError {
    #[error("percentile share p must lie in (0, 1), got {p}")]
    InvalidShare { p: String },
    #[error("no threshold for field {field:?}, year {year} (record {record_id})")]
    MissingThreshold {
        field: String,
        year: i32,
        record_id: String,
    },
}

/// Builds per-(field, year) thresholds from the reference corpus. A record
/// with k field codes contributes one observation to each of its k cells.
pub fn build_thresholds(reference: &Corpus, p: &Rat) -> Result<ThresholdMap, PercentileError> {
    check_share(p)?;
    let mut cells: BTreeMap<(String, i32), Vec<u64>> = BTreeMap::new();
    for rec in &reference.records {
        for field in &rec.fields {
            cells
                .entry((field.clone(), rec.year))
                .or_default()
                .push(rec.citations);
        }
    }
    let mut out = ThresholdMap::new();
    for ((field, year), mut citations) in cells {
        citations.sort_unstable_by(|a, b| b.cmp(a));
        let threshold = cell_threshold(&field, year, &citations, p);
        out.insert((field, year), threshold);
    }
    Ok(out)
}

fn check_share(p: &Rat) -> Result<(), PercentileError> {
    if p <= &Rat::zero() || p >= &Rat::one() {
        return Err(PercentileError::InvalidShare { p: p.to_string() });
    }
    Ok(())
}

/// `citations` must be sorted descending and non-empty.
fn cell_threshold(field: &str, year: i32, citations: &[u64], p: &Rat) -> FieldYearThreshold {
    let n = citations.len() as u64;
    let quota = p * rat::from_int(n);
    // Walk distinct values from the top until the cumulative count reaches
    // the quota; that value is c_star.
    let mut cumulative = 0u64;
    let mut idx = 0usize;
    loop {
        let value = citations[idx];
        let at = citations[idx..].iter().take_while(|&&c| c == value).count() as u64;
        let below_quota = rat::from_int(cumulative) < quota;
        let reaches_quota = quota <= rat::from_int(cumulative + at);
        if below_quota && reaches_quota {
            let n_above = cumulative;
            let boundary_weight = (quota.clone() - rat::from_int(n_above)) / rat::from_int(at);
            return FieldYearThreshold {
                field: field.to_string(),
                year,
                n,
                c_star: value,
                n_above,
                n_at: at,
                boundary_weight,
            };
        }
        cumulative += at;
        idx += at as usize;
    }
}

/// Outcome of weighting one record: either an exact weight in [0, 1], or the
/// list of missing (field, year) cells when the skip policy applies.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightOutcome {
    Weight(Rat),
    Skipped(Vec<(String, i32)>),
}

/// Top-share membership weight of one record: per field, 1 above the
/// threshold, the boundary weight at it, 0 below; averaged over the record's
/// fields.
pub fn top_share_weight(
    record: &PublicationRecord,
    thresholds: &ThresholdMap,
    params: &TopShareParams,
) -> Result<WeightOutcome, PercentileError> {
    check_share(&params.p)?;
    let mut sum = Rat::zero();
    let mut missing = Vec::new();
    for field in &record.fields {
        match thresholds.get(&(field.clone(), record.year)) {
            Some(t) => {
                let w = if record.citations > t.c_star {
                    Rat::one()
                } else if record.citations == t.c_star {
                    t.boundary_weight.clone()
                } else {
                    Rat::zero()
                };
                sum += w;
            }
            None => match params.missing_threshold_policy {
                MissingThresholdPolicy::Fatal => {
                    return Err(PercentileError::MissingThreshold {
                        field: field.clone(),
                        year: record.year,
                        record_id: record.id.clone(),
                    })
                }
                MissingThresholdPolicy::SkipWithDiagnostic => {
                    missing.push((field.clone(), record.year));
                }
            },
        }
    }
    if !missing.is_empty() {
        return Ok(WeightOutcome::Skipped(missing));
    }
    let MultiFieldPolicy::AverageOverFields = params.multi_field_policy;
    Ok(WeightOutcome::Weight(
        sum / rat::from_int(record.fields.len() as u64),
    ))
}

/// Sum of top-share weights over a set of records (one institution's windowed
/// articles and reviews). Returns the exact count plus diagnostics for any
/// records skipped under the skip policy.
pub fn top10_count<'a>(
    records: impl IntoIterator<Item = &'a PublicationRecord>,
    thresholds: &ThresholdMap,
    params: &TopShareParams,
) -> Result<(Rat, Vec<String>), PercentileError> {
    let mut total = Rat::zero();
    let mut diagnostics = Vec::new();
    for rec in records {
        match top_share_weight(rec, thresholds, params)? {
            WeightOutcome::Weight(w) => total += w,
            WeightOutcome::Skipped(cells) => {
                for (field, year) in cells {
                    diagnostics.push(format!(
                        "record {}: no threshold for field {field:?}, year {year}; skipped",
                        rec.id
                    ));
                }
            }
        }
    }
    Ok((total, diagnostics))
}

/// Audit CSV: `field,year,N,c_star,n_above,n_at,boundary_weight`.
pub fn write_thresholds_csv(
    thresholds: &ThresholdMap,
    mut out: impl Write,
    weight_as_float: bool,
) -> std::io::Result<()> {
    writeln!(out, "field,year,N,c_star,n_above,n_at,boundary_weight")?;
    for t in thresholds.values() {
        let bw = if weight_as_float {
            format!("{:.6}", rat::to_f64(&t.boundary_weight))
        } else {
            rat::format_exact(&t.boundary_weight)
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.field, t.year, t.n, t.c_star, t.n_above, t.n_at, bw
        )?;
    }
    Ok(())
}
