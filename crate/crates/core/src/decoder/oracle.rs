use std::collections::HashMap;

use crate::alphabet::Alphabet;
use crate::emissions::{log_sum_exp, EmissionMatrix, Sample};

use super::{check_dims, DecodeError};

pub const ORACLE_MAX_FRAMES: usize = 10;
pub const ORACLE_MAX_VOCAB: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub labels: Vec<usize>,
    pub text: String,
    pub posterior: f64,
}

/// Exact label-sequence posteriors by enumerating all `V^T` alignments.
///
/// Each frame is renormalized to sum to one first. Every alignment uses one
/// value per frame, so this rescales all sequences alike and leaves the
/// ranking unchanged. Entries are sorted by posterior descending, ties by
/// label sequence ascending.
pub fn oracle_decode<S: Sample>(
    e: &EmissionMatrix<S>,
    a: &Alphabet,
) -> Result<Vec<OracleEntry>, DecodeError> {
    check_dims(e, a)?;
    if e.frames() > ORACLE_MAX_FRAMES || e.vocab() > ORACLE_MAX_VOCAB {
        return Err(DecodeError::InstanceTooLarge {
            frames: e.frames(),
            vocab: e.vocab(),
        });
    }
    let probs: Vec<Vec<f64>> = e
        .rows()
        .map(|row| {
            let z = log_sum_exp(row);
            row.iter().map(|v| (v.to_f64() - z).exp()).collect()
        })
        .collect();

    let mut totals: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut labels = Vec::with_capacity(e.frames());
    enumerate(&probs, a.blank(), 0, None, 1.0, &mut labels, &mut totals);

    let mut out: Vec<OracleEntry> = totals
        .into_iter()
        .map(|(labels, posterior)| OracleEntry {
            text: a.render(&labels),
            labels,
            posterior,
        })
        .collect();
    out.sort_by(|x, y| {
        y.posterior
            .total_cmp(&x.posterior)
            .then_with(|| x.labels.cmp(&y.labels))
    });
    Ok(out)
}

fn enumerate(
    probs: &[Vec<f64>],
    blank: usize,
    frame: usize,
    last: Option<usize>,
    mass: f64,
    labels: &mut Vec<usize>,
    totals: &mut HashMap<Vec<usize>, f64>,
) {
    if frame == probs.len() {
        *totals.entry(labels.clone()).or_insert(0.0) += mass;
        return;
    }
    for (k, &p) in probs[frame].iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let emits = k != blank && Some(k) != last;
        if emits {
            labels.push(k);
        }
        enumerate(probs, blank, frame + 1, Some(k), mass * p, labels, totals);
        if emits {
            labels.pop();
        }
    }
}
