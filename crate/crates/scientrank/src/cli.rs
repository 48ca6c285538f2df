//! Command-line surface: validate, thresholds, rank, compare, gen.
//!
//! Exit codes: 0 success, 1 data/analysis error, 2 usage/config error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::compare;
use crate::corpus::{self, DocType, Window};
use crate::corpusgen::{self, GenSpec};
use crate::indicators::{self, HScope};
use crate::ingest::{self, RecordFormat};
use crate::percentile::{self, MissingThresholdPolicy, TopShareParams};
use crate::ranking::{self, Candidate, KeyIndicator, TieBreak};
use crate::rat::{self, Rat};
use crate::report::{self, DisplayPolicy, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "scientrank",
    version,
    about = "Windowed, field-normalized bibliometric indicators and institution rankings"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check record and alias files; print diagnostics and the
    /// unresolved-affiliation report
    Validate(ValidateArgs),
    /// Emit the per-(field, year) top-share threshold audit CSV
    Thresholds(ThresholdsArgs),
    /// Compute or reproduce a ranking table
    Rank(RankArgs),
    /// Correlate two rendered tables and report entered/exited/moved
    Compare(CompareArgs),
    /// Generate a deterministic synthetic corpus
    Gen(GenArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Records file (JSONL or CSV)
    #[arg(long)]
    records: PathBuf,
    /// Records format
    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    format: RecordFormat,
    /// Alias map JSON; when given, resolution is checked too
    #[arg(long)]
    aliases: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdsArgs {
    /// Reference corpus (JSONL or CSV records)
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    format: RecordFormat,
    /// Percentile share
    #[arg(long, default_value = "0.10", value_parser = parse_share)]
    p: Rat,
    /// Render boundary weights as decimals instead of exact rationals
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct RankArgs {
    /// Records file for the computed pipeline
    #[arg(long)]
    records: Option<PathBuf>,
    /// Alias map JSON
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Reference corpus for percentile thresholds
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Precomputed indicator CSV (bypasses the computed pipeline)
    #[arg(long)]
    indicators: Option<PathBuf>,
    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    format_records: RecordFormat,
    /// Publication window, e.g. 2011:2015
    #[arg(long, default_value = "2011:2015", value_parser = parse_window)]
    window: Window,
    /// Eligibility threshold on windowed document count
    #[arg(long, default_value_t = 20)]
    min_docs: u64,
    /// Percentile share
    #[arg(long, default_value = "0.10", value_parser = parse_share)]
    p: Rat,
    /// Document types counted, comma separated
    #[arg(long, default_value = "article,review", value_parser = parse_doc_types)]
    doc_types: BTreeSet<DocType>,
    /// Key indicator ordering the table
    #[arg(long, default_value = "top10", value_parser = parse_key)]
    key: KeyIndicator,
    /// Keep all rows ranked ≤ N on the key
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Also keep rows ranked ≤ N on these indicators (repeatable)
    #[arg(long = "union", value_parser = parse_key)]
    union_keys: Vec<KeyIndicator>,
    /// Output format
    #[arg(long, default_value = "text", value_parser = parse_output_format)]
    format: Format,
    /// Print decimals with a comma separator
    #[arg(long)]
    decimal_comma: bool,
    /// Test eligibility against the all-document count instead of the
    /// filtered one
    #[arg(long)]
    eligibility_all_docs: bool,
    /// Compute H over each institution's all-time record set
    #[arg(long)]
    h_all_time: bool,
    /// Skip records with no (field, year) threshold instead of failing
    #[arg(long)]
    skip_missing_thresholds: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// First rendered-CSV table
    table_a: PathBuf,
    /// Second rendered-CSV table
    table_b: PathBuf,
    /// Top-N membership boundary for entered/exited
    #[arg(long, default_value_t = 10)]
    top: u64,
    /// Rank by row position even when the top-10% rank column is complete;
    /// use this for tables ordered by another key
    #[arg(long)]
    positional: bool,
    /// Emit the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec JSON
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for records.jsonl, aliases.json, manifest.json
    #[arg(long)]
    out: PathBuf,
}

fn parse_format(s: &str) -> Result<RecordFormat, String> {
    RecordFormat::parse(s).ok_or_else(|| format!("unknown format {s:?} (jsonl|csv)"))
}

fn parse_output_format(s: &str) -> Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("unknown format {s:?} (csv|json|markdown|text)"))
}

fn parse_key(s: &str) -> Result<KeyIndicator, String> {
    KeyIndicator::parse(s).ok_or_else(|| {
        format!("unknown indicator {s:?} (top10|mean_citedness|citations|pubs|h_index)")
    })
}

fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s.split_once(':').ok_or("window must look like 2011:2015")?;
    let start: i32 = a.parse().map_err(|_| format!("bad year {a:?}"))?;
    let end: i32 = b.parse().map_err(|_| format!("bad year {b:?}"))?;
    Window::new(start, end).map_err(|e| e.to_string())
}

fn parse_share(s: &str) -> Result<Rat, String> {
    let p = rat::parse(s).ok_or_else(|| format!("bad share {s:?}"))?;
    if p <= rat::from_int(0) || p >= rat::from_int(1) {
        return Err(format!("share must lie in (0, 1), got {s}"));
    }
    Ok(p)
}

fn parse_doc_types(s: &str) -> Result<BTreeSet<DocType>, String> {
    let set: BTreeSet<DocType> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| DocType::parse(t).ok_or_else(|| format!("unknown doc type {t:?}")))
        .collect::<Result<_, _>>()?;
    if set.is_empty() {
        return Err("doc type set must be non-empty".into());
    }
    Ok(set)
}

struct CliFailure {
    code: i32,
    message: String,
}

impl CliFailure {
    fn usage(message: impl Into<String>) -> CliFailure {
        CliFailure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> CliFailure {
        CliFailure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

fn open(path: &Path) -> Result<File, CliFailure> {
    File::open(path).map_err(|e| CliFailure::usage(format!("{}: {e}", path.display())))
}

/// Parses argv and runs the selected command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Thresholds(args) => cmd_thresholds(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliFailure> {
    let file = open(&args.records)?;
    let (records, diagnostics) = ingest::parse_records(file, args.format)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    for d in &diagnostics {
        println!("{d}");
    }
    println!(
        "{} record(s), {} diagnostic(s)",
        records.len(),
        diagnostics.len()
    );

    let mut fatal = false;
    if let Some(alias_path) = &args.aliases {
        let file = open(alias_path)?;
        match ingest::load_alias_map(file) {
            Ok(profiles) => match ingest::resolve_affiliations(records, &profiles) {
                Ok(resolved) => {
                    let unresolved_total: u64 = resolved.unresolved.values().sum();
                    println!(
                        "unresolved affiliation variants: {} distinct, {} occurrence(s)",
                        resolved.unresolved.len(),
                        unresolved_total
                    );
                    for (variant, count) in &resolved.unresolved {
                        println!("  {count}x {variant}");
                    }
                }
                Err(e) => {
                    println!("fatal: {e}");
                    fatal = true;
                }
            },
            Err(e) => {
                println!("fatal: {e}");
                fatal = true;
            }
        }
    }
    if fatal {
        Err(CliFailure::data("validation found fatal issues"))
    } else {
        Ok(())
    }
}

fn cmd_thresholds(args: ThresholdsArgs) -> Result<(), CliFailure> {
    let file = open(&args.reference)?;
    let (records, _diags) = ingest::parse_records(file, args.format)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    if records.is_empty() {
        return Err(CliFailure::data("empty reference corpus"));
    }
    let corpus = corpus::Corpus::new(records, args.reference.display().to_string())
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let thresholds = percentile::build_thresholds(&corpus, &args.p)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let stdout = io::stdout();
    percentile::write_thresholds_csv(&thresholds, stdout.lock(), args.float)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<(), CliFailure> {
    // --aliases is shared: the computed pipeline requires it, and the
    // indicator path accepts it as an optional source of display names.
    let computed_mode = args.records.is_some() || args.reference.is_some();
    let indicator_mode = args.indicators.is_some();
    if indicator_mode && computed_mode {
        return Err(CliFailure::usage(
            "pass either --indicators or --records/--aliases/--reference, not both",
        ));
    }
    if !indicator_mode && !computed_mode {
        return Err(CliFailure::usage(
            "no input: pass --indicators, or --records with --aliases and --reference",
        ));
    }

    let (candidates, tie_break) = if let Some(path) = &args.indicators {
        (indicator_candidates(&args, path)?, TieBreak::SourceOrder)
    } else {
        (computed_candidates(&args)?, TieBreak::McThenName)
    };

    let (table, diagnostics) = ranking::build_ranking(
        &candidates,
        args.key,
        args.min_docs,
        Some(args.top),
        &args.union_keys,
        tie_break,
    );
    for d in &diagnostics {
        eprintln!("note: {d}");
    }
    let policy = DisplayPolicy {
        decimal_comma: args.decimal_comma,
        ..DisplayPolicy::default()
    };
    let rendered = if args.format == Format::Text && text_styling_enabled() {
        report::render_text_styled(&table, &policy)
    } else {
        report::render_table(&table, args.format, &policy)
    };
    print!("{rendered}");
    Ok(())
}

fn text_styling_enabled() -> bool {
    std::env::var_os("SCIENTRANK_NO_COLOR").is_none() && io::stdout().is_terminal()
}

fn indicator_candidates(args: &RankArgs, path: &Path) -> Result<Vec<Candidate>, CliFailure> {
    if args.key == KeyIndicator::HIndex || args.union_keys.contains(&KeyIndicator::HIndex) {
        return Err(CliFailure::usage(
            "h_index is not available on the precomputed-indicator path",
        ));
    }
    let rows = ingest::load_indicator_rows(open(path)?)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let names: BTreeMap<String, String> = match &args.aliases {
        Some(p) => ingest::load_alias_map(open(p)?)
            .map_err(|e| CliFailure::data(e.to_string()))?
            .into_iter()
            .map(|pr| (pr.inst_id, pr.name))
            .collect(),
        None => BTreeMap::new(),
    };
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(seq, row)| {
            let name = names
                .get(&row.inst_id)
                .cloned()
                .unwrap_or_else(|| row.inst_id.clone());
            Candidate {
                set: indicators::IndicatorSet::from_precomputed(
                    &row.inst_id,
                    args.window,
                    row.pubs,
                    row.citations,
                    row.top10,
                    row.mean_override,
                ),
                name,
                eligibility_doc_count: row.pubs,
                has_h: false,
                seq,
            }
        })
        .collect())
}

fn computed_candidates(args: &RankArgs) -> Result<Vec<Candidate>, CliFailure> {
    let (records_path, aliases_path, reference_path) =
        match (&args.records, &args.aliases, &args.reference) {
            (Some(r), Some(a), Some(f)) => (r, a, f),
            _ => {
                return Err(CliFailure::usage(
                    "the computed pipeline needs --records, --aliases and --reference together",
                ))
            }
        };
    let (records, diags) = ingest::parse_records(open(records_path)?, args.format_records)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    for d in &diags {
        eprintln!("note: {records_path:?}: {d}", records_path = records_path.display());
    }
    let profiles = ingest::load_alias_map(open(aliases_path)?)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let (reference_records, _) = ingest::parse_records(open(reference_path)?, args.format_records)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    if reference_records.is_empty() {
        return Err(CliFailure::data("empty reference corpus"));
    }
    let reference = corpus::Corpus::new(reference_records, reference_path.display().to_string())
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let thresholds = percentile::build_thresholds(&reference, &args.p)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let params = TopShareParams {
        p: args.p.clone(),
        missing_threshold_policy: if args.skip_missing_thresholds {
            MissingThresholdPolicy::SkipWithDiagnostic
        } else {
            MissingThresholdPolicy::Fatal
        },
        ..TopShareParams::default()
    };
    let resolved = ingest::resolve_affiliations(records, &profiles)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let h_scope = if args.h_all_time {
        HScope::AllTime
    } else {
        HScope::Windowed
    };
    let all_types: BTreeSet<DocType> = DocType::ALL.into_iter().collect();

    let mut candidates = Vec::new();
    for (seq, profile) in profiles.iter().enumerate() {
        let (set, diags) = indicators::indicator_set(
            &resolved,
            &profile.inst_id,
            args.window,
            &thresholds,
            &params,
            &args.doc_types,
            h_scope,
        )
        .map_err(|e| CliFailure::data(format!("{}: {e}", profile.inst_id)))?;
        for d in diags {
            eprintln!("note: {d}");
        }
        let eligibility_doc_count = if args.eligibility_all_docs {
            indicators::publication_count(&resolved, &profile.inst_id, args.window, &all_types)
                .map_err(|e| CliFailure::data(e.to_string()))?
        } else {
            set.pub_count
        };
        candidates.push(Candidate {
            set,
            name: profile.name.clone(),
            eligibility_doc_count,
            has_h: true,
            seq,
        });
    }
    Ok(candidates)
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliFailure> {
    let rows_a = report::parse_table_csv(open(&args.table_a)?)
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let rows_b = report::parse_table_csv(open(&args.table_b)?)
        .map_err(|e| CliFailure::data(e.to_string()))?;

    // Ranks come from the key rank column when every row carries one,
    // otherwise from row position.
    let ranks_of = |rows: &[report::ParsedRow]| -> BTreeMap<String, u64> {
        let all_ranked =
            !args.positional && !rows.is_empty() && rows.iter().all(|r| r.top10_rank.is_some());
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                let rank = if all_ranked {
                    r.top10_rank.unwrap()
                } else {
                    (i + 1) as u64
                };
                (r.name.clone(), rank)
            })
            .collect()
    };
    let ranks_a = ranks_of(&rows_a);
    let ranks_b = ranks_of(&rows_b);

    let common: BTreeSet<&String> = ranks_a
        .keys()
        .filter(|k| ranks_b.contains_key(*k))
        .collect();
    if common.is_empty() {
        let only_a: Vec<&String> = ranks_a.keys().collect();
        let only_b: Vec<&String> = ranks_b.keys().collect();
        return Err(CliFailure::data(format!(
            "no common institutions; only in A: {only_a:?}, only in B: {only_b:?}"
        )));
    }
    let restrict = |ranks: &BTreeMap<String, u64>| -> BTreeMap<String, Rat> {
        ranks
            .iter()
            .filter(|(k, _)| common.contains(k))
            .map(|(k, &v)| (k.clone(), rat::from_int(v)))
            .collect()
    };
    let tau = compare::kendall_tau(&restrict(&ranks_a), &restrict(&ranks_b))
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let rho = compare::spearman_rho(&restrict(&ranks_a), &restrict(&ranks_b))
        .map_err(|e| CliFailure::data(e.to_string()))?;
    let shift = compare::rank_shift(&ranks_a, &ranks_b, args.top);

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.json {
        let payload = serde_json::json!({
            "kendall_tau_b": tau,
            "spearman_rho": rho,
            "common_institutions": common.len(),
            "shift": shift,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&payload).unwrap())
            .map_err(|e| CliFailure::data(e.to_string()))?;
        return Ok(());
    }
    writeln!(out, "kendall_tau_b: {tau:.6}").ok();
    writeln!(out, "spearman_rho: {rho:.6}").ok();
    writeln!(out, "common institutions: {}", common.len()).ok();
    let list = |set: &BTreeSet<String>| -> String {
        if set.is_empty() {
            "(none)".to_string()
        } else {
            set.iter().cloned().collect::<Vec<_>>().join(", ")
        }
    };
    writeln!(out, "entered top-{}: {}", args.top, list(&shift.entered)).ok();
    writeln!(out, "exited top-{}: {}", args.top, list(&shift.exited)).ok();
    if shift.moved.is_empty() {
        writeln!(out, "moved: (none)").ok();
    } else {
        writeln!(out, "moved:").ok();
        for m in &shift.moved {
            writeln!(
                out,
                "  {}: {} -> {} ({:+})",
                m.inst_id, m.rank_a, m.rank_b, m.delta
            )
            .ok();
        }
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), CliFailure> {
    let file = open(&args.spec)?;
    let spec: GenSpec = serde_json::from_reader(file)
        .map_err(|e| CliFailure::usage(format!("invalid spec: {e}")))?;
    let generated =
        corpusgen::generate(&spec, args.seed).map_err(|e| CliFailure::usage(e.to_string()))?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliFailure::usage(format!("{}: {e}", args.out.display())))?;
    let write = |name: &str, content: &str| -> Result<(), CliFailure> {
        std::fs::write(args.out.join(name), content)
            .map_err(|e| CliFailure::data(format!("{name}: {e}")))
    };
    write("records.jsonl", &corpusgen::records_to_jsonl(&generated.corpus))?;
    write("aliases.json", &corpusgen::profiles_to_json(&generated.profiles))?;
    let manifest = serde_json::json!({
        "seed": args.seed,
        "records": generated.corpus.len(),
        "institutions": generated.profiles.len(),
        "prng": "chacha8",
    });
    write(
        "manifest.json",
        &format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap()),
    )?;
    println!(
        "seed {}: {} record(s), {} institution profile(s) -> {}",
        args.seed,
        generated.corpus.len(),
        generated.profiles.len(),
        args.out.display()
    );
    Ok(())
}
