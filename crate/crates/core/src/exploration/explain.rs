//! Error analysis: find the correctly classified pair that best explains a
//! misclassified one.

use serde::{Deserialize, Serialize};

use super::entropy::ColumnEntropy;
use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::pair::{Pair, RecordId};

/// Default number of candidates examined per explanation.
pub const DEFAULT_CANDIDATE_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Explanation {
    pub candidate: Pair,
    pub score: f64,
    /// `(sim(a, c), sim(b, d))` for misclassified `(a, b)` and candidate `(c, d)`.
    pub direct: [f64; 2],
    /// `(sim(a, d), sim(b, c))`.
    pub cross: [f64; 2],
}

/// Minkowski norm of a two-component vector.
pub fn minkowski(v: [f64; 2], q: f64) -> f64 {
    (v[0].abs().powf(q) + v[1].abs().powf(q)).powf(1.0 / q)
}

/// Scores every candidate by `max(‖v_direct‖_q, ‖v_cross‖_q)` and returns
/// the highest. Scores within a relative `1e-12` of the best count as
/// equal; among those the smallest pair wins.
pub fn explain_error(
    misclassified: Pair,
    candidates: &[Pair],
    sim: impl Fn(RecordId, RecordId) -> f64,
    q: f64,
) -> Result<Explanation> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("q must lie in [1, 2], got {q}")));
    }
    let (a, b) = misclassified.records();
    let scored: Vec<Explanation> = candidates
        .iter()
        .map(|&candidate| {
            let (c, d) = candidate.records();
            let direct = [sim(a, c), sim(b, d)];
            let cross = [sim(a, d), sim(b, c)];
            Explanation {
                candidate,
                score: minkowski(direct, q).max(minkowski(cross, q)),
                direct,
                cross,
            }
        })
        .collect();
    let best = scored
        .iter()
        .map(|e| e.score)
        .max_by(f64::total_cmp)
        .ok_or(Error::NoCandidates)?;
    let tolerance = 1e-12 * best.abs().max(1.0);
    Ok(*scored
        .iter()
        .filter(|e| e.score >= best - tolerance)
        .min_by_key(|e| e.candidate)
        .expect("the best candidate passes the filter"))
}

/// Mean normalized Levenshtein similarity over attributes. An attribute
/// null in exactly one record contributes 0; one null in both is skipped.
pub fn levenshtein_similarity(dataset: &Dataset, x: RecordId, y: RecordId) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (u, v) in dataset.values(x).iter().zip(dataset.values(y)) {
        match (u, v) {
            (None, None) => continue,
            (Some(u), Some(v)) => sum += strsim::normalized_levenshtein(u, v),
            _ => {}
        }
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// At most `cap` candidates, the highest pair entropy first (ties by pair).
pub fn cap_candidates(mut candidates: Vec<Pair>, entropy: &ColumnEntropy, cap: usize) -> Vec<Pair> {
    if candidates.len() > cap {
        candidates.sort_by(|a, b| entropy.pair(*b).total_cmp(&entropy.pair(*a)).then_with(|| a.cmp(b)));
        candidates.truncate(cap);
    }
    candidates
}
