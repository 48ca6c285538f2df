//! End-to-end acceptance suite. Each test prints one pass line so the whole
//! gate can be read off `cargo test --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num::traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scientrank::corpus::{filter_window, Corpus, Window};
use scientrank::corpusgen::{
    generate, ActivityProfile, CitationDistribution, FieldSpec, GenSpec, Ramp,
};
use scientrank::indicators::{self, HScope, IndicatorSet};
use scientrank::ingest;
use scientrank::percentile::{build_thresholds, top10_count, top_share_weight, TopShareParams, WeightOutcome};
use scientrank::ranking::{self, Candidate, KeyIndicator, TieBreak};
use scientrank::rat::{self, Rat};
use scientrank::report;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_scientrank"))
        .args(args)
        .env("SCIENTRANK_NO_COLOR", "1")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn pass(criterion: u32, message: &str) {
    println!("ACCEPTANCE {criterion}: PASS — {message}");
}

fn mc_f64(row: &report::ParsedRow) -> f64 {
    rat::to_f64(row.mc_exact.as_ref().expect("mean defined"))
}

#[test]
fn criterion_1_table1_reproduction() {
    let start = Instant::now();
    let table1 = fixture("table1.csv");
    let (code, stdout, stderr) = run_cli(&[
        "rank",
        "--indicators",
        table1.to_str().unwrap(),
        "--key",
        "top10",
        "--top",
        "10",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let rows = report::parse_table_csv(stdout.as_bytes()).unwrap();

    let expected_order = [
        "kyiv",
        "karazin",
        "lviv-franko",
        "odessa",
        "lviv-poly",
        "sumy",
        "kpi",
        "khpi",
        "chernivtsi",
        "tavrida",
    ];
    let order: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(order, expected_order, "row order");

    let top10_ranks: Vec<Option<u64>> = rows.iter().map(|r| r.top10_rank).collect();
    assert_eq!(
        top10_ranks,
        [1, 2, 3, 4, 5, 6, 7, 7, 9, 10].map(Some).to_vec(),
        "top10 rank column"
    );

    let printed_means = [2.56, 2.29, 2.24, 3.18, 1.46, 2.28, 1.65, 1.80, 2.64, 1.93];
    for (row, cell) in rows.iter().zip(printed_means) {
        let mc = mc_f64(row);
        assert!(
            (mc - cell).abs() <= 0.01,
            "{}: recomputed mean {mc} vs printed {cell}",
            row.name
        );
    }

    let mc_ranks: Vec<Option<u64>> = rows.iter().map(|r| r.mc_rank).collect();
    assert_eq!(
        mc_ranks,
        [3, 4, 6, 1, 10, 5, 9, 8, 2, 7].map(Some).to_vec(),
        "mean-citedness rank column"
    );

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(1, "table 1 rows, ranks, and means reproduced");
}

fn table2_candidates() -> Vec<Candidate> {
    let rows =
        ingest::load_indicator_rows(std::fs::File::open(fixture("table2.csv")).unwrap()).unwrap();
    let window = Window::new(2011, 2015).unwrap();
    rows.into_iter()
        .enumerate()
        .map(|(seq, row)| Candidate {
            set: IndicatorSet::from_precomputed(
                &row.inst_id,
                window,
                row.pubs,
                row.citations,
                row.top10,
                row.mean_override,
            ),
            name: row.inst_id.clone(),
            eligibility_doc_count: row.pubs,
            has_h: false,
            seq,
        })
        .collect()
}

#[test]
fn criterion_2_table2_reproduction() {
    let start = Instant::now();
    let table2 = fixture("table2.csv");
    let (code, stdout, stderr) = run_cli(&[
        "rank",
        "--indicators",
        table2.to_str().unwrap(),
        "--key",
        "top10",
        "--top",
        "10",
        "--union",
        "mean_citedness",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let rows = report::parse_table_csv(stdout.as_bytes()).unwrap();
    assert_eq!(rows.len(), 11, "eleven-row union table");

    let top10_ranks: Vec<Option<u64>> = rows.iter().map(|r| r.top10_rank).collect();
    let expected_top10 = vec![
        Some(1),
        Some(2),
        Some(3),
        Some(4),
        Some(4),
        Some(4),
        Some(7),
        Some(7),
        Some(9),
        Some(10),
        None, // Yanka Kupala unranked on top10
    ];
    assert_eq!(top10_ranks, expected_top10, "top10 rank column");
    assert_eq!(rows[10].name, "yanka-kupala");

    let mc_ranks: Vec<Option<u64>> = rows.iter().map(|r| r.mc_rank).collect();
    let expected_mc = vec![
        Some(6),
        Some(3),
        Some(9),
        Some(1),
        Some(8),
        None, // BSTU unranked on mean citedness
        Some(4),
        Some(10),
        Some(2),
        Some(7),
        Some(5),
    ];
    assert_eq!(mc_ranks, expected_mc, "mean-citedness rank column");
    assert_eq!(rows[5].name, "bstu");

    let printed_means = [2.42, 2.69, 1.81, 4.47, 1.91, 1.15, 2.57, 1.70, 3.89, 2.08, 2.45];
    for (row, cell) in rows.iter().zip(printed_means) {
        let mc = mc_f64(row);
        assert!(
            (mc - cell).abs() <= 0.01,
            "{}: recomputed mean {mc} vs printed {cell}",
            row.name
        );
    }

    let union = ranking::top_n_union(
        &table2_candidates(),
        &[KeyIndicator::Top10, KeyIndicator::MeanCitedness],
        10,
    );
    assert_eq!(union.len(), 11, "top-n union over the two key indicators");
    assert!(union.contains("yanka-kupala"));

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(2, "table 2 union, ranks, and means reproduced");
}

fn single_cell_spec(family: usize, papers: u64, seed_field: &str) -> GenSpec {
    let distribution = match family {
        0 => CitationDistribution::DiscreteLognormal { mu: 1.0, sigma: 1.3 },
        1 => CitationDistribution::Zipf { s: 1.2, cutoff: 2000 },
        _ => CitationDistribution::Constant { c: 5 },
    };
    GenSpec {
        fields: vec![FieldSpec {
            field: seed_field.to_string(),
            papers_per_year: papers,
            distribution,
            years: Window::new(2013, 2013).unwrap(),
        }],
        profiles: vec![],
    }
}

#[test]
fn criterion_3_top_share_conservation() {
    let start = Instant::now();
    let shares = [rat::ratio(1, 10), rat::ratio(1, 100), rat::ratio(1, 4)];
    let mut size_rng = ChaCha8Rng::seed_from_u64(7);
    for cell in 0..1000u64 {
        let papers = size_rng.gen_range(1..=500);
        let spec = single_cell_spec((cell % 3) as usize, papers, "f");
        let corpus = generate(&spec, cell).unwrap().corpus;
        for p in &shares {
            let thresholds = build_thresholds(&corpus, p).unwrap();
            let params = TopShareParams {
                p: p.clone(),
                ..TopShareParams::default()
            };
            let mut sum = Rat::zero();
            for record in &corpus.records {
                match top_share_weight(record, &thresholds, &params).unwrap() {
                    WeightOutcome::Weight(w) => sum += w,
                    WeightOutcome::Skipped(_) => panic!("no cell may be missing"),
                }
            }
            assert_eq!(
                sum,
                p * rat::from_int(papers),
                "cell {cell}, p = {p}, N = {papers}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    pass(3, "weights sum to exactly p·N on 1000 cells × 3 shares");
}

#[test]
fn criterion_4_field_normalization_invariance() {
    let start = Instant::now();
    let spec = GenSpec {
        fields: vec![FieldSpec {
            field: "base".into(),
            papers_per_year: 300,
            distribution: CitationDistribution::DiscreteLognormal { mu: 1.0, sigma: 1.2 },
            years: Window::new(2013, 2013).unwrap(),
        }],
        profiles: vec![
            ActivityProfile {
                inst_id: "alpha".into(),
                name: None,
                shares: [("base".to_string(), 0.3)].into_iter().collect(),
                ramp: Ramp::Flat,
            },
            ActivityProfile {
                inst_id: "beta".into(),
                name: None,
                shares: [("base".to_string(), 0.3)].into_iter().collect(),
                ramp: Ramp::Flat,
            },
        ],
    };
    let generated = generate(&spec, 11).unwrap();

    // Second field: the same papers with every citation count scaled 10×,
    // so each institution holds identical rank positions in both fields.
    let mut records = generated.corpus.records.clone();
    for base in &generated.corpus.records {
        let mut scaled = base.clone();
        scaled.id = format!("scaled-{}", base.id);
        scaled.fields = ["scaled".to_string()].into_iter().collect();
        scaled.citations = base.citations * 10;
        records.push(scaled);
    }
    let corpus = Corpus::new(records, "both-fields").unwrap();
    let thresholds = build_thresholds(&corpus, &rat::ratio(1, 10)).unwrap();
    let params = TopShareParams::default();

    for inst in ["alpha", "beta"] {
        let of_field = |field: &str| -> Rat {
            let records: Vec<_> = corpus
                .records
                .iter()
                .filter(|r| r.fields.contains(field) && r.affiliations[0] == inst)
                .collect();
            assert!(!records.is_empty());
            top10_count(records.into_iter(), &thresholds, &params)
                .unwrap()
                .0
        };
        assert_eq!(of_field("base"), of_field("scaled"), "institution {inst}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    pass(4, "10× citation scale leaves top-10% counts exactly equal");
}

#[test]
fn criterion_5_h_index_oracle_and_staleness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let size = rng.gen_range(0..=200);
        let citations: Vec<u64> = (0..size).map(|_| rng.gen_range(0..=10_000)).collect();
        assert_eq!(
            indicators::h_index(&citations),
            indicators::h_index_bruteforce(&citations),
            "multiset {citations:?}"
        );
    }

    // Staleness contrast: institution ceased publishing after 2012.
    let spec = GenSpec {
        fields: vec![FieldSpec {
            field: "f".into(),
            papers_per_year: 100,
            distribution: CitationDistribution::DiscreteLognormal { mu: 1.5, sigma: 1.0 },
            years: Window::new(2011, 2015).unwrap(),
        }],
        profiles: vec![ActivityProfile {
            inst_id: "ceased".into(),
            name: None,
            shares: [("f".to_string(), 0.3)].into_iter().collect(),
            ramp: Ramp::CeasedAfter { year: 2012 },
        }],
    };
    let generated = generate(&spec, 21).unwrap();
    let thresholds = build_thresholds(&generated.corpus, &rat::ratio(1, 10)).unwrap();
    let resolved =
        ingest::resolve_affiliations(generated.corpus.records.clone(), &generated.profiles)
            .unwrap();

    let late = Window::new(2013, 2015).unwrap();
    let (set, _) = indicators::indicator_set(
        &resolved,
        "ceased",
        late,
        &thresholds,
        &TopShareParams::default(),
        &scientrank::corpus::articles_and_reviews(),
        HScope::AllTime,
    )
    .unwrap();
    assert_eq!(set.pub_count, 0, "windowed P");
    assert_eq!(set.citation_total, 0, "windowed C");
    assert_eq!(set.top10_count, Rat::zero(), "windowed T");

    let all_time: Vec<u64> = resolved.records_of("ceased").map(|r| r.citations).collect();
    assert!(!all_time.is_empty());
    assert_eq!(set.h_index, indicators::h_index(&all_time), "all-time H unchanged");
    assert!(set.h_index > 0);

    // Sliding the window does not change the all-time corpus, hence not H.
    let early = Window::new(2011, 2012).unwrap();
    let early_corpus = filter_window(&resolved.corpus, early);
    let early_h = indicators::h_index(
        &early_corpus
            .records
            .iter()
            .filter(|r| r.affiliations[0] == "ceased")
            .map(|r| r.citations)
            .collect::<Vec<_>>(),
    );
    assert_eq!(set.h_index, early_h);

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    pass(5, "h-index matches oracle on 10k multisets; staleness contrast holds");
}

#[test]
fn criterion_6_eligibility_boundary() {
    assert!(!ranking::eligible(19, 20));
    assert!(ranking::eligible(20, 20));

    let window = Window::new(2011, 2015).unwrap();
    let candidate = |id: &str, pubs: u64| Candidate {
        set: IndicatorSet::from_precomputed(id, window, pubs, 100, rat::from_int(5), None),
        name: id.to_string(),
        eligibility_doc_count: pubs,
        has_h: false,
        seq: 0,
    };
    let (table, _) = ranking::build_ranking(
        &[candidate("in", 20), candidate("out", 19)],
        KeyIndicator::Top10,
        20,
        Some(10),
        &[],
        TieBreak::McThenName,
    );
    let ids: Vec<&str> = table.rows.iter().map(|r| r.inst_id.as_str()).collect();
    assert_eq!(ids, vec!["in"]);
    pass(6, "doc count 19 excluded, 20 included under default config");
}

#[test]
fn criterion_7_rank_correlation_sanity() {
    let ranks = |vals: &[(&str, u64)]| -> BTreeMap<String, Rat> {
        vals.iter()
            .map(|(k, v)| (k.to_string(), rat::from_int(*v)))
            .collect()
    };
    let a = ranks(&[("a", 1), ("b", 2), ("c", 3), ("d", 4), ("e", 5)]);
    assert_eq!(scientrank::compare::kendall_tau(&a, &a).unwrap(), 1.0);
    assert_eq!(scientrank::compare::spearman_rho(&a, &a).unwrap(), 1.0);

    let fwd = ranks(&[("a", 1), ("b", 2), ("c", 3), ("d", 4)]);
    let rev = ranks(&[("a", 4), ("b", 3), ("c", 2), ("d", 1)]);
    assert_eq!(scientrank::compare::kendall_tau(&fwd, &rev).unwrap(), -1.0);
    assert_eq!(scientrank::compare::spearman_rho(&fwd, &rev).unwrap(), -1.0);

    let b = ranks(&[("a", 1), ("b", 3), ("c", 2), ("d", 4)]);
    let tau = scientrank::compare::kendall_tau(&fwd, &b).unwrap();
    // brute force over the 6 pairs: 5 concordant, 1 discordant
    assert!((tau - 2.0 / 3.0).abs() < 1e-12, "tau = {tau}");
    pass(7, "tau-b and Spearman sanity values hold");
}

#[test]
fn criterion_8_determinism() {
    let table1 = fixture("table1.csv");
    let args = [
        "rank",
        "--indicators",
        table1.to_str().unwrap(),
        "--key",
        "top10",
        "--top",
        "10",
        "--format",
        "csv",
    ];
    let first = run_cli(&args);
    let second = run_cli(&args);
    assert_eq!(first, second, "rank output byte-identical");

    let spec = fixture("genspec_demo.json");
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let (code, _, stderr) = run_cli(&[
            "gen",
            "--spec",
            spec.to_str().unwrap(),
            "--seed",
            "99",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {stderr}");
    }
    for name in ["records.jsonl", "aliases.json", "manifest.json"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} byte-identical across runs");
    }
    pass(8, "commands and generation are byte-identical across runs");
}
