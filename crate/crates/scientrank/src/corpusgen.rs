//! Deterministic synthetic corpora for property tests and demos.
//!
//! PRNG: ChaCha8 seeded with the run's 64-bit seed, consumed in a fixed
//! order (field specs in declaration order, years ascending, paper index
//! ascending), so a given (spec, seed) pair reproduces byte-identical
//! corpora on any platform.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocType, PublicationRecord, Window};
use crate::ingest::InstitutionProfile;

pub const REST_OF_WORLD: &str = "rest-of-world";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CitationDistribution {
    /// exp(N(mu, sigma)) rounded to the nearest non-negative integer.
    DiscreteLognormal { mu: f64, sigma: f64 },
    /// Zipf rank in 1..=cutoff with exponent s; citation count = rank − 1.
    Zipf { s: f64, cutoff: u64 },
    Constant { c: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub field: String,
    pub papers_per_year: u64,
    pub distribution: CitationDistribution,
    pub years: Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ramp {
    Flat,
    /// Share scales linearly from 1/k in the first year to 1 in the last.
    Rising,
    /// Mirror image of `Rising`.
    Declining,
    /// Full share through `year`, zero afterwards — an institution that
    /// stopped publishing.
    CeasedAfter { year: i32 },
}

impl Ramp {
    fn factor(&self, year: i32, window: &Window) -> f64 {
        let span = (window.end_year - window.start_year + 1) as f64;
        match self {
            Ramp::Flat => 1.0,
            Ramp::Rising => (year - window.start_year + 1) as f64 / span,
            Ramp::Declining => (window.end_year - year + 1) as f64 / span,
            Ramp::CeasedAfter { year: last } => {
                if year <= *last {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityProfile {
    pub inst_id: String,
    #[serde(default)]
    pub name: Option<String>,
    /// Base share of each field's yearly output, scaled by the ramp.
    pub shares: BTreeMap<String, f64>,
    #[serde(default = "default_ramp")]
    pub ramp: Ramp,
}

fn default_ramp() -> Ramp {
    Ramp::Flat
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub fields: Vec<FieldSpec>,
    pub profiles: Vec<ActivityProfile>,
}

#[derive(Debug, Error)]
pub enum CorpusGenError {
    #[error("field {field}, year {year}: institution shares sum to {sum}, exceeding 1")]
    InfeasibleShares { field: String, year: i32, sum: f64 },
    #[error("field {field}: invalid distribution parameters: {message}")]
    BadDistribution { field: String, message: String },
    #[error("profile {inst_id}: share {share} for field {field} outside [0, 1]")]
    BadShare {
        inst_id: String,
        field: String,
        share: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub corpus: Corpus,
    pub profiles: Vec<InstitutionProfile>,
}

enum Sampler {
    LogNormal(LogNormal<f64>),
    Zipf(Zipf<f64>),
    Constant(u64),
}

impl Sampler {
    fn build(field: &str, dist: &CitationDistribution) -> Result<Sampler, CorpusGenError> {
        let bad = |message: String| CorpusGenError::BadDistribution {
            field: field.to_string(),
            message,
        };
        match dist {
            CitationDistribution::DiscreteLognormal { mu, sigma } => Ok(Sampler::LogNormal(
                LogNormal::new(*mu, *sigma).map_err(|e| bad(e.to_string()))?,
            )),
            CitationDistribution::Zipf { s, cutoff } => Ok(Sampler::Zipf(
                Zipf::new(*cutoff, *s).map_err(|e| bad(e.to_string()))?,
            )),
            CitationDistribution::Constant { c } => Ok(Sampler::Constant(*c)),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Sampler::LogNormal(d) => d.sample(rng).round().max(0.0) as u64,
            Sampler::Zipf(d) => (d.sample(rng) as u64).saturating_sub(1),
            Sampler::Constant(c) => *c,
        }
    }
}

/// Generates the corpus and its alias map. Papers of each (field, year) cell
/// are dealt to institutions by cumulative share boundaries; the unassigned
/// remainder becomes rest-of-world reference papers.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Generated, CorpusGenError> {
    for p in &spec.profiles {
        for (field, &share) in &p.shares {
            if !(0.0..=1.0).contains(&share) {
                return Err(CorpusGenError::BadShare {
                    inst_id: p.inst_id.clone(),
                    field: field.clone(),
                    share,
                });
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();

    for fs in &spec.fields {
        let sampler = Sampler::build(&fs.field, &fs.distribution)?;
        for year in fs.years.years() {
            let n = fs.papers_per_year;
            // Cumulative share boundaries, scaled to paper counts.
            let mut boundaries: Vec<(usize, u64, u64)> = Vec::new(); // (profile idx, lo, hi)
            let mut cum = 0.0_f64;
            for (pi, p) in spec.profiles.iter().enumerate() {
                let share = p.shares.get(&fs.field).copied().unwrap_or(0.0)
                    * p.ramp.factor(year, &fs.years);
                let lo = (cum * n as f64).round() as u64;
                cum += share;
                let hi = (cum * n as f64).round() as u64;
                boundaries.push((pi, lo.min(n), hi.min(n)));
            }
            if cum > 1.0 + 1e-9 {
                return Err(CorpusGenError::InfeasibleShares {
                    field: fs.field.clone(),
                    year,
                    sum: cum,
                });
            }
            for i in 0..n {
                let citations = sampler.sample(&mut rng);
                let affiliation = boundaries
                    .iter()
                    .find(|&&(_, lo, hi)| lo <= i && i < hi)
                    .map(|&(pi, _, _)| display_name(&spec.profiles[pi]))
                    .unwrap_or_else(|| REST_OF_WORLD.to_string());
                records.push(PublicationRecord {
                    id: format!("{}-{}-{:05}", fs.field, year, i),
                    year,
                    doc_type: DocType::Article,
                    fields: [fs.field.clone()].into_iter().collect(),
                    citations,
                    affiliations: vec![affiliation],
                });
            }
        }
    }

    let mut profiles: Vec<InstitutionProfile> = spec
        .profiles
        .iter()
        .map(|p| InstitutionProfile {
            inst_id: p.inst_id.clone(),
            name: display_name(p),
            aliases: [display_name(p)].into_iter().collect(),
        })
        .collect();
    profiles.push(InstitutionProfile {
        inst_id: REST_OF_WORLD.to_string(),
        name: REST_OF_WORLD.to_string(),
        aliases: [REST_OF_WORLD.to_string()].into_iter().collect(),
    });

    let corpus = Corpus::new(records, format!("corpusgen seed={seed}"))
        .expect("generated ids are unique by construction");
    Ok(Generated { corpus, profiles })
}

fn display_name(p: &ActivityProfile) -> String {
    p.name.clone().unwrap_or_else(|| p.inst_id.clone())
}

/// Serializes records as the ingest JSONL format.
pub fn records_to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for r in &corpus.records {
        out.push_str(&serde_json::to_string(r).expect("serialization cannot fail"));
        out.push('\n');
    }
    out
}

pub fn profiles_to_json(profiles: &[InstitutionProfile]) -> String {
    #[derive(Serialize)]
    struct P<'a> {
        inst_id: &'a str,
        name: &'a str,
        aliases: Vec<&'a str>,
    }
    let view: Vec<P> = profiles
        .iter()
        .map(|p| P {
            inst_id: &p.inst_id,
            name: &p.name,
            aliases: p.aliases.iter().map(String::as_str).collect(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&view).expect("serialization cannot fail");
    s.push('\n');
    s
}
