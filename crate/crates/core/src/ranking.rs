//! Quantile comparison of low-key leader strength against season-over-season
//! ranking changes.
//!
//! Rank change is `rank_prev - rank_curr`, so a positive value is an improvement
//! (rank 1 is best).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::RankingRecord;
use crate::report::fmt_sig;

pub const DEFAULT_QUANTILES: usize = 20;
pub const DEFAULT_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeDirection {
    /// Rank change from the previous season into the season the strengths come from.
    PrevToCurrent,
    /// Rank change from the strengths' season into the next one.
    CurrentToNext,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankChanges {
    /// team -> rank_prev - rank_curr
    pub changes: BTreeMap<String, f64>,
    pub only_prev: usize,
    pub only_curr: usize,
}

/// Rankings of one season as a team -> rank map.
pub fn season_ranks(records: &[RankingRecord], season: i32) -> BTreeMap<String, u32> {
    records
        .iter()
        .filter(|r| r.season == season)
        .map(|r| (r.team.clone(), r.rank))
        .collect()
}

pub fn rank_changes(prev: &BTreeMap<String, u32>, curr: &BTreeMap<String, u32>) -> RankChanges {
    let mut changes = BTreeMap::new();
    let mut only_prev = 0;
    for (team, &p) in prev {
        match curr.get(team) {
            Some(&c) => {
                changes.insert(team.clone(), p as f64 - c as f64);
            }
            None => only_prev += 1,
        }
    }
    let only_curr = curr.keys().filter(|t| !prev.contains_key(*t)).count();
    RankChanges {
        changes,
        only_prev,
        only_curr,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileRow {
    pub index: usize,
    pub lkl_low: f64,
    pub lkl_high: f64,
    pub team_count: usize,
    pub mean_lkl: f64,
    pub mean_rank_change: f64,
    pub teams: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileReport {
    pub num_quantiles: usize,
    pub direction: ChangeDirection,
    /// Teams with a strength but no rank change.
    pub unmatched_teams: usize,
    pub quantiles: Vec<QuantileRow>,
}

/// Sorts teams by strength (ties by label), splits them into `k` contiguous groups whose
/// sizes differ by at most one (the first `n % k` groups take the extra team) and
/// averages each group.
pub fn quantile_report(
    lkl: &BTreeMap<String, f64>,
    changes: &BTreeMap<String, f64>,
    k: usize,
    direction: ChangeDirection,
) -> Result<QuantileReport> {
    if k < 2 {
        return Err(Error::invalid("need at least 2 quantiles"));
    }
    let mut teams: Vec<(&String, f64, f64)> = lkl
        .iter()
        .filter_map(|(t, &s)| changes.get(t).map(|&c| (t, s, c)))
        .collect();
    let unmatched_teams = lkl.len() - teams.len();
    let n = teams.len();
    if n < k {
        return Err(Error::invalid(format!(
            "{n} teams with both strength and rank change, fewer than {k} quantiles"
        )));
    }
    teams.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));

    let (base, extra) = (n / k, n % k);
    let mut quantiles = Vec::with_capacity(k);
    let mut start = 0;
    for index in 0..k {
        let size = base + usize::from(index < extra);
        let group = &teams[start..start + size];
        start += size;
        let m = size as f64;
        quantiles.push(QuantileRow {
            index,
            lkl_low: group[0].1,
            lkl_high: group[size - 1].1,
            team_count: size,
            mean_lkl: group.iter().map(|t| t.1).sum::<f64>() / m,
            mean_rank_change: group.iter().map(|t| t.2).sum::<f64>() / m,
            teams: group.iter().map(|t| t.0.clone()).collect(),
        });
    }
    Ok(QuantileReport {
        num_quantiles: k,
        direction,
        unmatched_teams,
        quantiles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub threshold: f64,
    pub direction: ChangeDirection,
    pub passes: Vec<bool>,
    pub passed: usize,
    pub total: usize,
    pub predicate: String,
}

/// Quantiles with mean strength at or above `threshold` are predicted to improve when
/// looking back (`PrevToCurrent`) and to decline when looking ahead (`CurrentToNext`);
/// quantiles below it the opposite. A mean change of exactly zero never passes.
pub fn hypothesis_check(report: &QuantileReport, threshold: f64) -> HypothesisCheck {
    let passes: Vec<bool> = report
        .quantiles
        .iter()
        .map(|q| {
            let leader = q.mean_lkl >= threshold;
            let expect_improve = match report.direction {
                ChangeDirection::PrevToCurrent => leader,
                ChangeDirection::CurrentToNext => !leader,
            };
            if expect_improve {
                q.mean_rank_change > 0.0
            } else {
                q.mean_rank_change < 0.0
            }
        })
        .collect();
    let passed = passes.iter().filter(|&&p| p).count();
    let predicate = match report.direction {
        ChangeDirection::PrevToCurrent => format!(
            "mean_lkl >= {t} requires mean_rank_change > 0; mean_lkl < {t} requires mean_rank_change < 0",
            t = fmt_sig(threshold, 6)
        ),
        ChangeDirection::CurrentToNext => format!(
            "mean_lkl >= {t} requires mean_rank_change < 0; mean_lkl < {t} requires mean_rank_change > 0",
            t = fmt_sig(threshold, 6)
        ),
    };
    HypothesisCheck {
        threshold,
        direction: report.direction,
        total: passes.len(),
        passed,
        passes,
        predicate,
    }
}

pub const QUANTILE_CSV_HEADER: [&str; 7] = [
    "quantile",
    "lkl_low",
    "lkl_high",
    "mean_lkl",
    "team_count",
    "mean_rank_change",
    "passes_hypothesis",
];

pub fn quantile_csv_rows(report: &QuantileReport, check: &HypothesisCheck) -> Vec<Vec<String>> {
    report
        .quantiles
        .iter()
        .zip(&check.passes)
        .map(|(q, pass)| {
            vec![
                q.index.to_string(),
                fmt_sig(q.lkl_low, 10),
                fmt_sig(q.lkl_high, 10),
                fmt_sig(q.mean_lkl, 10),
                q.team_count.to_string(),
                fmt_sig(q.mean_rank_change, 10),
                pass.to_string(),
            ]
        })
        .collect()
}
