//! Evaluation protocols: document-level win/tie/loss tallies, system-level
//! Pearson correlation, segment-level Kendall's tau variants, and linear
//! metric combination.
//!
//! Kendall decision table (per human-judged pair; human ties are always
//! excluded; "t" counts metric ties among the remaining pairs):
//!
//! | variant | metric tie handling        | tau                     |
//! |---------|----------------------------|-------------------------|
//! | wmt12   | counted as discordant      | (c - d - t) / (c+d+t)   |
//! | wmt13   | excluded                   | (c - d) / (c + d)       |
//! | xties   | in the denominator only    | (c - d) / (c + d + t)   |

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::{score_document, Resources, ScoreConfig};
use crate::textmodel::ParallelDoc;

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinTally {
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
    pub total: usize,
    pub epsilon: f64,
}

impl WinTally {
    pub fn percent_a(&self) -> f64 {
        100.0 * self.wins_a as f64 / self.total as f64
    }

    pub fn percent_b(&self) -> f64 {
        100.0 * self.wins_b as f64 / self.total as f64
    }

    /// Fraction of items where a scored greater than or equal to b.
    pub fn a_geq_fraction(&self) -> f64 {
        (self.wins_a + self.ties) as f64 / self.total as f64
    }
}

/// Tallies paired scores with an epsilon tie band.
pub fn win_tally_scores(scores: &[(f64, f64)], epsilon: f64) -> WinTally {
    let mut tally = WinTally {
        wins_a: 0,
        wins_b: 0,
        ties: 0,
        total: scores.len(),
        epsilon,
    };
    for &(a, b) in scores {
        if (a - b).abs() <= epsilon {
            tally.ties += 1;
        } else if a > b {
            tally.wins_a += 1;
        } else {
            tally.wins_b += 1;
        }
    }
    tally
}

/// Scores every document under both labels and tallies wins.
pub fn win_tally(
    docs: &[ParallelDoc],
    label_a: &str,
    label_b: &str,
    resources: &Resources,
    config: &ScoreConfig,
    epsilon: f64,
) -> Result<WinTally> {
    let mut scores = Vec::with_capacity(docs.len());
    for doc in docs {
        let a = score_document(doc, label_a, resources, config)?.value;
        let b = score_document(doc, label_b, resources, config)?.value;
        scores.push((a, b));
    }
    Ok(win_tally_scores(&scores, epsilon))
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Input(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Input("need at least 2 points".to_string()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Undefined(
            "correlation undefined for zero variance".to_string(),
        ));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    A,
    B,
    Tie,
}

impl FromStr for Preference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Preference::A),
            "b" => Ok(Preference::B),
            "tie" => Ok(Preference::Tie),
            other => Err(Error::Input(format!("unknown preference: {other}"))),
        }
    }
}

/// One pairwise human judgement at segment level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentJudgment {
    pub segment_id: String,
    pub system_a: String,
    pub system_b: String,
    pub preference: Preference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KendallVariant {
    Wmt12,
    Wmt13,
    Xties,
}

impl FromStr for KendallVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wmt12" => Ok(KendallVariant::Wmt12),
            "wmt13" => Ok(KendallVariant::Wmt13),
            "xties" => Ok(KendallVariant::Xties),
            other => Err(Error::Input(format!("unknown kendall variant: {other}"))),
        }
    }
}

/// Per-system segment metric values, keyed by (segment_id, system).
pub type SegmentScores = HashMap<(String, String), f64>;

/// Kendall's tau against pairwise human preferences, per the decision table
/// in the module docs.
pub fn kendall_wmt(
    judgments: &[SegmentJudgment],
    scores: &SegmentScores,
    variant: KendallVariant,
    epsilon: f64,
) -> Result<f64> {
    let mut concordant = 0usize;
    let mut discordant = 0usize;
    let mut metric_ties = 0usize;
    for j in judgments {
        if j.preference == Preference::Tie {
            continue;
        }
        let key_a = (j.segment_id.clone(), j.system_a.clone());
        let key_b = (j.segment_id.clone(), j.system_b.clone());
        let (Some(&sa), Some(&sb)) = (scores.get(&key_a), scores.get(&key_b)) else {
            return Err(Error::Input(format!(
                "missing metric score for segment {} systems {}/{}",
                j.segment_id, j.system_a, j.system_b
            )));
        };
        if (sa - sb).abs() <= epsilon {
            metric_ties += 1;
        } else {
            let metric_prefers_a = sa > sb;
            let human_prefers_a = j.preference == Preference::A;
            if metric_prefers_a == human_prefers_a {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let (c, d, t) = (concordant as f64, discordant as f64, metric_ties as f64);
    match variant {
        KendallVariant::Wmt12 => {
            if c + d + t == 0.0 {
                return Err(Error::Undefined("no comparable pairs".to_string()));
            }
            Ok((c - d - t) / (c + d + t))
        }
        KendallVariant::Wmt13 => {
            if c + d == 0.0 {
                return Err(Error::Undefined("no comparable pairs".to_string()));
            }
            Ok((c - d) / (c + d))
        }
        KendallVariant::Xties => {
            if c + d + t == 0.0 {
                return Err(Error::Undefined("no comparable pairs".to_string()));
            }
            Ok((c - d) / (c + d + t))
        }
    }
}

/// Weighted sum of per-system metric scores. Every file must cover the same
/// system set.
pub fn combine_linear(
    metrics: &[BTreeMap<String, f64>],
    weights: &[f64],
) -> Result<BTreeMap<String, f64>> {
    if metrics.is_empty() {
        return Err(Error::Input("no metrics to combine".to_string()));
    }
    if metrics.len() != weights.len() {
        return Err(Error::Input(format!(
            "{} metrics but {} weights",
            metrics.len(),
            weights.len()
        )));
    }
    let systems: Vec<&String> = metrics[0].keys().collect();
    for (i, m) in metrics.iter().enumerate().skip(1) {
        if m.keys().collect::<Vec<_>>() != systems {
            return Err(Error::Input(format!(
                "metric file {i} covers a different system set"
            )));
        }
    }
    let mut out = BTreeMap::new();
    for system in systems {
        let value = metrics
            .iter()
            .zip(weights)
            .map(|(m, w)| m[system] * w)
            .sum();
        out.insert(system.clone(), value);
    }
    Ok(out)
}

/// Count, per system, of segments with a nonzero metric score.
pub fn nonzero_segments(scores: &SegmentScores) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    for ((_, system), &v) in scores {
        let entry = out.entry(system.clone()).or_default();
        if v != 0.0 {
            *entry += 1;
        }
    }
    out
}
