//! Table rendering: CSV, JSON, Markdown, and aligned text with the
//! value/rank cell convention.

use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::ranking::{RankedRow, RankingTable};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    HalfUp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplayPolicy {
    pub decimals: u32,
    pub rounding: Rounding,
    /// "," reproduces the published tables' look; "." is the default for
    /// machine readability. CSV output always uses ".".
    pub decimal_comma: bool,
    pub trim_trailing_zeros: bool,
}

impl Default for DisplayPolicy {
    fn default() -> Self {
        DisplayPolicy {
            decimals: 2,
            rounding: Rounding::HalfUp,
            decimal_comma: false,
            trim_trailing_zeros: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "markdown" => Some(Format::Markdown),
            "text" => Some(Format::Text),
            _ => None,
        }
    }
}

/// Half-up rounding to the policy's decimal count, fixed width unless
/// trailing-zero trimming is enabled.
pub fn round_display(x: &Rat, policy: &DisplayPolicy) -> String {
    let Rounding::HalfUp = policy.rounding;
    let mut s = rat::round_half_up(x, policy.decimals);
    if policy.trim_trailing_zeros && s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if policy.decimal_comma {
        s = s.replace('.', ",");
    }
    s
}

fn value_rank_cell(value: &str, rank: Option<u64>) -> String {
    match rank {
        Some(r) => format!("{value}/{r}"),
        None => value.to_string(),
    }
}

fn top10_display(row: &RankedRow, policy: &DisplayPolicy) -> String {
    if row.top10.is_integer() {
        row.top10.numer().to_string()
    } else {
        round_display(&row.top10, policy)
    }
}

fn mc_display(row: &RankedRow, policy: &DisplayPolicy) -> Option<String> {
    row.mean_citedness.as_ref().map(|m| round_display(m, policy))
}

pub const CSV_HEADER: &str = "name,top10,top10_rank,mc_exact,mc_display,mc_rank,citations,pubs";

/// Renders the table. Column order: name, top-10% value/rank, mean-citedness
/// value/rank, citations, publications. Byte-identical for identical inputs.
pub fn render_table(table: &RankingTable, format: Format, policy: &DisplayPolicy) -> String {
    match format {
        Format::Csv => render_csv(table, policy),
        Format::Json => render_json(table, policy),
        Format::Markdown => render_markdown(table, policy),
        Format::Text => render_text(table, policy, false),
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(table: &RankingTable, policy: &DisplayPolicy) -> String {
    let plain = DisplayPolicy {
        decimal_comma: false,
        ..policy.clone()
    };
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        let mc_exact = row
            .mean_citedness
            .as_ref()
            .map(rat::format_exact)
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_quote(&row.name),
            rat::format_exact(&row.top10),
            row.top10_rank.map(|r| r.to_string()).unwrap_or_default(),
            mc_exact,
            mc_display(row, &plain).unwrap_or_default(),
            row.mc_rank.map(|r| r.to_string()).unwrap_or_default(),
            row.citations,
            row.pubs,
        ));
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    name: &'a str,
    top10: String,
    top10_rank: Option<u64>,
    mc_exact: Option<String>,
    mc_display: Option<String>,
    mc_rank: Option<u64>,
    citations: u64,
    pubs: u64,
}

fn render_json(table: &RankingTable, policy: &DisplayPolicy) -> String {
    let plain = DisplayPolicy {
        decimal_comma: false,
        ..policy.clone()
    };
    let rows: Vec<JsonRow> = table
        .rows
        .iter()
        .map(|row| JsonRow {
            name: &row.name,
            top10: rat::format_exact(&row.top10),
            top10_rank: row.top10_rank,
            mc_exact: row.mean_citedness.as_ref().map(rat::format_exact),
            mc_display: mc_display(row, &plain),
            mc_rank: row.mc_rank,
            citations: row.citations,
            pubs: row.pubs,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("serialization cannot fail");
    s.push('\n');
    s
}

const DISPLAY_HEADERS: [&str; 5] = [
    "University",
    "Top 10% (value/rank)",
    "Mean citedness (value/rank)",
    "Citations",
    "Publications",
];

fn display_cells(row: &RankedRow, policy: &DisplayPolicy) -> [String; 5] {
    [
        row.name.clone(),
        value_rank_cell(&top10_display(row, policy), row.top10_rank),
        match mc_display(row, policy) {
            Some(v) => value_rank_cell(&v, row.mc_rank),
            None => String::from("-"),
        },
        row.citations.to_string(),
        row.pubs.to_string(),
    ]
}

fn render_markdown(table: &RankingTable, policy: &DisplayPolicy) -> String {
    let mut out = format!("| {} |\n", DISPLAY_HEADERS.join(" | "));
    out.push_str(&format!(
        "|{}\n",
        DISPLAY_HEADERS.map(|_| " --- |").join("")
    ));
    for row in &table.rows {
        out.push_str(&format!("| {} |\n", display_cells(row, policy).join(" | ")));
    }
    out
}

fn render_text(table: &RankingTable, policy: &DisplayPolicy, styled: bool) -> String {
    let rows: Vec<[String; 5]> = table
        .rows
        .iter()
        .map(|r| display_cells(r, policy))
        .collect();
    let mut widths: [usize; 5] = DISPLAY_HEADERS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String; 5]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let header_cells = DISPLAY_HEADERS.map(String::from);
    let header = line(&header_cells);
    let mut out = String::new();
    if styled {
        out.push_str(&format!("\x1b[1m{header}\x1b[0m\n"));
    } else {
        out.push_str(&header);
        out.push('\n');
    }
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Styled variant for terminals; identical to `Text` except the header line.
pub fn render_text_styled(table: &RankingTable, policy: &DisplayPolicy) -> String {
    render_text(table, policy, true)
}

/// A row read back from the rendered CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRow {
    pub name: String,
    pub top10: Rat,
    pub top10_rank: Option<u64>,
    pub mc_exact: Option<Rat>,
    pub mc_display: String,
    pub mc_rank: Option<u64>,
    pub citations: u64,
    pub pubs: u64,
}

#[derive(Debug, Error)]
pub enum TableParseError {
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("unexpected header {found:?}, expected {expected:?}")]
    BadHeader { found: String, expected: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Parses a table previously rendered as CSV; exact values round-trip via the
/// `top10` and `mc_exact` columns.
pub fn parse_table_csv(reader: impl Read) -> Result<Vec<ParsedRow>, TableParseError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let found = headers.iter().collect::<Vec<_>>().join(",");
    if found != CSV_HEADER {
        return Err(TableParseError::BadHeader {
            found,
            expected: CSV_HEADER.to_string(),
        });
    }
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rowno = idx + 2;
        let rec = rec?;
        let cell = |i: usize| rec.get(i).unwrap_or("").trim();
        let bad = |message: String| TableParseError::BadRow {
            row: rowno,
            message,
        };
        let opt_rank = |i: usize| -> Result<Option<u64>, TableParseError> {
            let s = cell(i);
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<u64>()
                    .map(Some)
                    .map_err(|_| bad(format!("bad rank cell {s:?}")))
            }
        };
        rows.push(ParsedRow {
            name: cell(0).to_string(),
            top10: rat::parse(cell(1)).ok_or_else(|| bad(format!("bad top10 {:?}", cell(1))))?,
            top10_rank: opt_rank(2)?,
            mc_exact: if cell(3).is_empty() {
                None
            } else {
                Some(rat::parse(cell(3)).ok_or_else(|| bad(format!("bad mc_exact {:?}", cell(3))))?)
            },
            mc_display: cell(4).to_string(),
            mc_rank: opt_rank(5)?,
            citations: cell(6)
                .parse()
                .map_err(|_| bad(format!("bad citations {:?}", cell(6))))?,
            pubs: cell(7)
                .parse()
                .map_err(|_| bad(format!("bad pubs {:?}", cell(7))))?,
        });
    }
    Ok(rows)
}
