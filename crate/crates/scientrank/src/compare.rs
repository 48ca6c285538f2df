//! Agreement between two rankings of the same institutions: rank
//! correlations plus an entered/exited/moved shift report.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::rat::Rat;

#[cfg(test)]
use crate::rat;

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("rankings cover different institutions; only in A: {only_a:?}, only in B: {only_b:?}")]
    MismatchedSets {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },
    #[error("empty ranking")]
    Empty,
}

fn check_same_sets(
    a: &BTreeMap<String, Rat>,
    b: &BTreeMap<String, Rat>,
) -> Result<(), CompareError> {
    if a.is_empty() && b.is_empty() {
        return Err(CompareError::Empty);
    }
    let keys_a: BTreeSet<&String> = a.keys().collect();
    let keys_b: BTreeSet<&String> = b.keys().collect();
    if keys_a != keys_b {
        return Err(CompareError::MismatchedSets {
            only_a: keys_a.difference(&keys_b).map(|s| s.to_string()).collect(),
            only_b: keys_b.difference(&keys_a).map(|s| s.to_string()).collect(),
        });
    }
    if a.is_empty() {
        return Err(CompareError::Empty);
    }
    Ok(())
}

fn paired(a: &BTreeMap<String, Rat>, b: &BTreeMap<String, Rat>) -> Vec<(Rat, Rat)> {
    a.iter()
        .map(|(k, va)| (va.clone(), b[k].clone()))
        .collect()
}

/// Kendall tau-b over two rank assignments (smaller rank = better; any
/// consistent scale works since only pair orderings enter). Ties allowed.
pub fn kendall_tau(
    a: &BTreeMap<String, Rat>,
    b: &BTreeMap<String, Rat>,
) -> Result<f64, CompareError> {
    check_same_sets(a, b)?;
    let pairs = paired(a, b);
    let n = pairs.len();
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let da = pairs[i].0.cmp(&pairs[j].0);
            let db = pairs[i].1.cmp(&pairs[j].1);
            match (da.is_eq(), db.is_eq()) {
                (true, true) => {} // tied in both: enters neither term
                (true, false) => ties_a += 1,
                (false, true) => ties_b += 1,
                (false, false) => {
                    if da == db {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
        }
    }
    let denom = (((concordant + discordant + ties_a) as f64)
        * ((concordant + discordant + ties_b) as f64))
        .sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((concordant - discordant) as f64 / denom)
}

/// Spearman's rho: Pearson correlation of the two rank vectors after
/// converting to mid-ranks (tied values share the average position).
pub fn spearman_rho(
    a: &BTreeMap<String, Rat>,
    b: &BTreeMap<String, Rat>,
) -> Result<f64, CompareError> {
    check_same_sets(a, b)?;
    let pairs = paired(a, b);
    let xs = midranks(&pairs.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>());
    let ys = midranks(&pairs.iter().map(|(_, y)| y.clone()).collect::<Vec<_>>());
    Ok(pearson(&xs, &ys))
}

fn midranks(values: &[Rat]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j are tied; 1-based mid-rank
        let mid = ((i + 1 + j) as f64) / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = mid;
        }
        i = j;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x).powi(2);
        var_y += (y - mean_y).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    cov / (var_x * var_y).sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankMove {
    pub inst_id: String,
    pub rank_a: u64,
    pub rank_b: u64,
    /// rank_b − rank_a: positive means the institution fell in B.
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct RankShiftReport {
    pub entered: BTreeSet<String>,
    pub exited: BTreeSet<String>,
    pub moved: Vec<RankMove>,
}

/// Entered/exited computed on top-n membership; `moved` lists common members
/// whose rank changed, sorted by |delta| descending then institution id.
pub fn rank_shift(
    a: &BTreeMap<String, u64>,
    b: &BTreeMap<String, u64>,
    n: u64,
) -> RankShiftReport {
    let top = |ranks: &BTreeMap<String, u64>| -> BTreeSet<String> {
        ranks
            .iter()
            .filter(|(_, &r)| r <= n)
            .map(|(k, _)| k.clone())
            .collect()
    };
    let top_a = top(a);
    let top_b = top(b);
    let entered = top_b.difference(&top_a).cloned().collect();
    let exited = top_a.difference(&top_b).cloned().collect();
    let mut moved: Vec<RankMove> = a
        .iter()
        .filter_map(|(k, &rank_a)| {
            b.get(k).and_then(|&rank_b| {
                let delta = rank_b as i64 - rank_a as i64;
                (delta != 0).then_some(RankMove {
                    inst_id: k.clone(),
                    rank_a,
                    rank_b,
                    delta,
                })
            })
        })
        .collect();
    moved.sort_by(|x, y| {
        y.delta
            .abs()
            .cmp(&x.delta.abs())
            .then_with(|| x.inst_id.cmp(&y.inst_id))
    });
    RankShiftReport {
        entered,
        exited,
        moved,
    }
}
