//! Eligibility, ordering, standard competition ranks, and top-N unions.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::corpus::Window;
use crate::indicators::IndicatorSet;
use crate::rat::{self, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyIndicator {
    Top10,
    MeanCitedness,
    Citations,
    Pubs,
    HIndex,
}

impl KeyIndicator {
    pub fn parse(s: &str) -> Option<KeyIndicator> {
        match s {
            "top10" => Some(KeyIndicator::Top10),
            "mean_citedness" => Some(KeyIndicator::MeanCitedness),
            "citations" => Some(KeyIndicator::Citations),
            "pubs" => Some(KeyIndicator::Pubs),
            "h_index" => Some(KeyIndicator::HIndex),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            KeyIndicator::Top10 => "top10",
            KeyIndicator::MeanCitedness => "mean_citedness",
            KeyIndicator::Citations => "citations",
            KeyIndicator::Pubs => "pubs",
            KeyIndicator::HIndex => "h_index",
        }
    }
}

/// One institution entering a ranking: its indicator set plus display name,
/// the document count the eligibility rule tests, and the input position
/// (`seq`) for source-order tie-breaking.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub set: IndicatorSet,
    pub name: String,
    pub eligibility_doc_count: u64,
    /// False on the precomputed-indicator path, where no H is available.
    pub has_h: bool,
    pub seq: usize,
}

impl Candidate {
    pub fn key_value(&self, key: KeyIndicator) -> Option<Rat> {
        match key {
            KeyIndicator::Top10 => Some(self.set.top10_count.clone()),
            KeyIndicator::MeanCitedness => self.set.mean_citedness.clone(),
            KeyIndicator::Citations => Some(rat::from_int(self.set.citation_total)),
            KeyIndicator::Pubs => Some(rat::from_int(self.set.pub_count)),
            KeyIndicator::HIndex => self.has_h.then(|| rat::from_int(self.set.h_index)),
        }
    }
}

/// Tie-break for display order among equal key values; ranks stay tied
/// either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Secondary key mean citedness descending, then name ascending.
    #[default]
    McThenName,
    /// Preserve input order (published tables encode their own display
    /// order within ties).
    SourceOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub inst_id: String,
    pub name: String,
    pub top10: Rat,
    pub top10_rank: Option<u64>,
    pub mean_citedness: Option<Rat>,
    pub mc_rank: Option<u64>,
    pub citations: u64,
    pub pubs: u64,
    pub h_index: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable {
    pub window: Option<Window>,
    pub key: KeyIndicator,
    pub rows: Vec<RankedRow>,
    pub eligibility_min_docs: u64,
    pub top_n: Option<usize>,
}

/// True iff the institution's document count meets the minimum.
pub fn eligible(doc_count: u64, min_docs: u64) -> bool {
    doc_count >= min_docs
}

/// Standard competition ("1224") ranks, higher value = better rank, aligned
/// with input positions: rank_i = 1 + |{j : v_j > v_i}|.
pub fn competition_ranks(values: &[Rat]) -> Vec<u64> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|w| *w > v).count() as u64)
        .collect()
}

/// Builds the ranking table. Ineligible institutions are dropped first; rows
/// are ordered by the key indicator descending with the given tie-break;
/// `top_n` keeps every row whose key rank is ≤ n (ties may push the row count
/// past n); `union_keys` instead keeps the union of per-key top-n sets.
/// Displayed rank cells are computed over the final row set and omitted where
/// the rank exceeds `top_n`.
pub fn build_ranking(
    candidates: &[Candidate],
    key: KeyIndicator,
    min_docs: u64,
    top_n: Option<usize>,
    union_keys: &[KeyIndicator],
    tie_break: TieBreak,
) -> (RankingTable, Vec<String>) {
    let mut diagnostics = Vec::new();
    let mut pool: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| eligible(c.eligibility_doc_count, min_docs))
        .collect();

    pool.retain(|c| {
        if c.key_value(key).is_some() {
            true
        } else {
            diagnostics.push(format!(
                "{}: {} undefined; dropped from ranking by that key",
                c.set.inst_id,
                key.as_str()
            ));
            false
        }
    });

    sort_candidates(&mut pool, key, tie_break);

    // Membership selection.
    let selected: Vec<&Candidate> = match (top_n, union_keys.is_empty()) {
        (Some(n), true) => {
            let key_vals: Vec<Rat> = pool.iter().map(|c| c.key_value(key).unwrap()).collect();
            let ranks = competition_ranks(&key_vals);
            pool.iter()
                .zip(&ranks)
                .filter(|(_, &r)| r as usize <= n)
                .map(|(c, _)| *c)
                .collect()
        }
        (Some(n), false) => {
            let mut all_keys = vec![key];
            all_keys.extend_from_slice(union_keys);
            let owned: Vec<Candidate> = pool.iter().map(|c| (*c).clone()).collect();
            let members = top_n_union(&owned, &all_keys, n);
            pool.iter()
                .filter(|c| members.contains(&c.set.inst_id))
                .copied()
                .collect()
        }
        (None, _) => pool.clone(),
    };

    // Displayed ranks over the final row set.
    let top10_vals: Vec<Rat> = selected.iter().map(|c| c.set.top10_count.clone()).collect();
    let top10_ranks = competition_ranks(&top10_vals);
    let mc_defined: Vec<usize> = selected
        .iter()
        .enumerate()
        .filter(|(_, c)| c.set.mean_citedness.is_some())
        .map(|(i, _)| i)
        .collect();
    let mc_vals: Vec<Rat> = mc_defined
        .iter()
        .map(|&i| selected[i].set.mean_citedness.clone().unwrap())
        .collect();
    let mc_rank_list = competition_ranks(&mc_vals);
    let mut mc_ranks: Vec<Option<u64>> = vec![None; selected.len()];
    for (slot, rank) in mc_defined.iter().zip(&mc_rank_list) {
        mc_ranks[*slot] = Some(*rank);
    }
    for c in &selected {
        if c.set.mean_citedness.is_none() {
            diagnostics.push(format!(
                "{}: mean citedness undefined (no publications); rank cell omitted",
                c.set.inst_id
            ));
        }
    }

    let omit = |rank: u64| -> Option<u64> {
        match top_n {
            Some(n) if rank as usize > n => None,
            _ => Some(rank),
        }
    };

    let rows = selected
        .iter()
        .enumerate()
        .map(|(i, c)| RankedRow {
            inst_id: c.set.inst_id.clone(),
            name: c.name.clone(),
            top10: c.set.top10_count.clone(),
            top10_rank: omit(top10_ranks[i]),
            mean_citedness: c.set.mean_citedness.clone(),
            mc_rank: mc_ranks[i].and_then(omit),
            citations: c.set.citation_total,
            pubs: c.set.pub_count,
            h_index: c.has_h.then_some(c.set.h_index),
        })
        .collect();

    (
        RankingTable {
            window: selected.first().map(|c| c.set.window),
            key,
            rows,
            eligibility_min_docs: min_docs,
            top_n,
        },
        diagnostics,
    )
}

fn sort_candidates(pool: &mut [&Candidate], key: KeyIndicator, tie_break: TieBreak) {
    pool.sort_by(|a, b| {
        let ka = a.key_value(key).unwrap();
        let kb = b.key_value(key).unwrap();
        match kb.cmp(&ka) {
            Ordering::Equal => match tie_break {
                TieBreak::SourceOrder => a.seq.cmp(&b.seq),
                TieBreak::McThenName => {
                    let ma = &a.set.mean_citedness;
                    let mb = &b.set.mean_citedness;
                    let by_mc = match (ma, mb) {
                        (Some(x), Some(y)) => y.cmp(x),
                        (Some(_), None) => Ordering::Less,
                        (None, Some(_)) => Ordering::Greater,
                        (None, None) => Ordering::Equal,
                    };
                    by_mc.then_with(|| a.name.cmp(&b.name))
                }
            },
            other => other,
        }
    });
}

/// Union of the per-key top-n institution sets, each taken independently with
/// competition ranking (rank ≤ n, so a tie block can expand a set past n).
/// Candidates without a value for a key simply do not enter that key's set.
pub fn top_n_union(
    candidates: &[Candidate],
    keys: &[KeyIndicator],
    n: usize,
) -> BTreeSet<String> {
    let mut members = BTreeSet::new();
    for &key in keys {
        let with_value: Vec<&Candidate> = candidates
            .iter()
            .filter(|c| c.key_value(key).is_some())
            .collect();
        let vals: Vec<Rat> = with_value.iter().map(|c| c.key_value(key).unwrap()).collect();
        for (c, rank) in with_value.iter().zip(competition_ranks(&vals)) {
            if rank as usize <= n {
                members.insert(c.set.inst_id.clone());
            }
        }
    }
    members
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Window;

    fn window() -> Window {
        Window::new(2011, 2015).unwrap()
    }

    fn candidate(inst_id: &str, top10: i64, citations: u64, pubs: u64, seq: usize) -> Candidate {
        Candidate {
            set: IndicatorSet::from_precomputed(
                inst_id,
                window(),
                pubs,
                citations,
                rat::from_int(top10 as u64),
                None,
            ),
            name: inst_id.to_string(),
            eligibility_doc_count: pubs,
            has_h: false,
            seq,
        }
    }

    #[test]
    fn eligibility_boundary() {
        assert!(eligible(20, 20));
        assert!(!eligible(19, 20));
        assert!(eligible(0, 0));
    }

    fn ranks_of(values: &[i64]) -> Vec<u64> {
        let rats: Vec<Rat> = values.iter().map(|&v| rat::from_int(v as u64)).collect();
        competition_ranks(&rats)
    }

    #[test]
    fn competition_ranks_published_columns() {
        assert_eq!(
            ranks_of(&[297, 99, 85, 54, 44, 40, 35, 35, 32, 19]),
            vec![1, 2, 3, 4, 5, 6, 7, 7, 9, 10]
        );
        assert_eq!(
            ranks_of(&[128, 26, 11, 7, 7, 7, 6, 6, 4, 3]),
            vec![1, 2, 3, 4, 4, 4, 7, 7, 9, 10]
        );
        assert_eq!(ranks_of(&[5, 5, 5]), vec![1, 1, 1]);
        assert_eq!(ranks_of(&[]), Vec::<u64>::new());
    }

    #[test]
    fn single_eligible_institution() {
        let c = vec![candidate("solo", 5, 100, 50, 0)];
        let (table, diags) =
            build_ranking(&c, KeyIndicator::Top10, 20, Some(10), &[], TieBreak::McThenName);
        assert!(diags.is_empty());
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].top10_rank, Some(1));
        assert_eq!(table.rows[0].mc_rank, Some(1));
    }

    #[test]
    fn ineligible_dropped() {
        let c = vec![candidate("big", 5, 100, 50, 0), candidate("tiny", 9, 100, 19, 1)];
        let (table, _) =
            build_ranking(&c, KeyIndicator::Top10, 20, None, &[], TieBreak::McThenName);
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].inst_id, "big");
    }

    #[test]
    fn tie_break_mc_then_name() {
        // equal top10; mc 2.0 vs 3.0 — higher mc first
        let c = vec![
            candidate("alpha", 7, 100, 50, 0), // mc 2.0
            candidate("beta", 7, 150, 50, 1),  // mc 3.0
        ];
        let (table, _) =
            build_ranking(&c, KeyIndicator::Top10, 0, None, &[], TieBreak::McThenName);
        assert_eq!(table.rows[0].inst_id, "beta");
        assert_eq!(table.rows[0].top10_rank, Some(1));
        assert_eq!(table.rows[1].top10_rank, Some(1));
    }

    #[test]
    fn tie_break_source_order() {
        let c = vec![
            candidate("alpha", 7, 100, 50, 0),
            candidate("beta", 7, 150, 50, 1),
        ];
        let (table, _) =
            build_ranking(&c, KeyIndicator::Top10, 0, None, &[], TieBreak::SourceOrder);
        assert_eq!(table.rows[0].inst_id, "alpha");
    }

    #[test]
    fn top_n_keeps_whole_tie_block() {
        let c = vec![
            candidate("a", 9, 10, 30, 0),
            candidate("b", 7, 10, 30, 1),
            candidate("c", 7, 11, 30, 2),
            candidate("d", 1, 10, 30, 3),
        ];
        let (table, _) =
            build_ranking(&c, KeyIndicator::Top10, 0, Some(2), &[], TieBreak::SourceOrder);
        let ids: Vec<&str> = table.rows.iter().map(|r| r.inst_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn union_expands_past_n_on_disagreement() {
        // anti-correlated columns: top10 favors a..e, citations favors f..j
        let mut c = Vec::new();
        for (i, id) in ["a", "b", "c", "d", "e"].iter().enumerate() {
            c.push(candidate(id, 100 - i as i64, i as u64 + 1, 30, i));
        }
        for (i, id) in ["f", "g", "h", "i", "j"].iter().enumerate() {
            c.push(candidate(id, i as i64 + 1, 1000 + i as u64, 30, 5 + i));
        }
        let union = top_n_union(&c, &[KeyIndicator::Top10, KeyIndicator::Citations], 3);
        assert_eq!(union.len(), 6);

        let same = top_n_union(&c, &[KeyIndicator::Top10, KeyIndicator::Top10], 3);
        assert_eq!(same.len(), 3);
    }

    #[test]
    fn permutation_invariance() {
        let mut c = vec![
            candidate("a", 9, 10, 30, 0),
            candidate("b", 7, 20, 30, 1),
            candidate("c", 5, 30, 30, 2),
        ];
        let (t1, _) = build_ranking(&c, KeyIndicator::Top10, 0, None, &[], TieBreak::McThenName);
        c.reverse();
        let (t2, _) = build_ranking(&c, KeyIndicator::Top10, 0, None, &[], TieBreak::McThenName);
        assert_eq!(t1.rows, t2.rows);
    }
}
