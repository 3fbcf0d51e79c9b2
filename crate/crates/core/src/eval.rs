//! Word error rate with a deterministic S/I/D split, plus corpus aggregation
//! that sums errors and reference words rather than averaging rates.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textnorm::NormalizedTranscript;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty reference with a non-empty hypothesis; WER is undefined")]
    EmptyReference,
    #[error("nothing to aggregate")]
    EmptyList,
    #[error("utterance id mismatch: {0}")]
    IdMismatch(String),
    #[error("duplicate utterance id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WerReport {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub hits: usize,
    pub ref_words: usize,
}

impl WerReport {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// Error ratio; `0` for an empty reference with no errors.
    pub fn wer(&self) -> f64 {
        if self.ref_words == 0 {
            0.0
        } else {
            self.errors() as f64 / self.ref_words as f64
        }
    }

    /// `"12.34%"`.
    pub fn percent(&self) -> String {
        format!("{:.2}%", 100.0 * self.wer())
    }
}

impl Add for WerReport {
    type Output = WerReport;

    fn add(self, o: WerReport) -> WerReport {
        WerReport {
            substitutions: self.substitutions + o.substitutions,
            insertions: self.insertions + o.insertions,
            deletions: self.deletions + o.deletions,
            hits: self.hits + o.hits,
            ref_words: self.ref_words + o.ref_words,
        }
    }
}

/// Serializes a report together with its derived `wer` field.
pub struct WerReportWithRate(pub WerReport);

impl Serialize for WerReportWithRate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let r = &self.0;
        let mut st = s.serialize_struct("WerReport", 6)?;
        st.serialize_field("substitutions", &r.substitutions)?;
        st.serialize_field("insertions", &r.insertions)?;
        st.serialize_field("deletions", &r.deletions)?;
        st.serialize_field("hits", &r.hits)?;
        st.serialize_field("ref_words", &r.ref_words)?;
        st.serialize_field("wer", &r.wer())?;
        st.end()
    }
}

/// Cost of an alignment prefix. Ordered lexicographically: total edits, then
/// substitutions, then insertions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Cost {
    edits: usize,
    subs: usize,
    ins: usize,
}

impl Cost {
    fn step(self, sub: usize, ins: usize, del: usize) -> Self {
        Cost {
            edits: self.edits + sub + ins + del,
            subs: self.subs + sub,
            ins: self.ins + ins,
        }
    }
}

/// Minimum-edit word alignment with unit costs. Among minimal alignments the
/// one with the fewest substitutions, then fewest insertions, is reported.
pub fn wer(
    reference: &NormalizedTranscript,
    hypothesis: &NormalizedTranscript,
) -> Result<WerReport, EvalError> {
    let r = reference.words();
    let h = hypothesis.words();
    if r.is_empty() && !h.is_empty() {
        return Err(EvalError::EmptyReference);
    }
    let cols = h.len() + 1;
    let mut prev: Vec<Cost> = (0..cols)
        .map(|j| Cost {
            edits: j,
            subs: 0,
            ins: j,
        })
        .collect();
    let mut cur = vec![prev[0]; cols];
    for (i, rw) in r.iter().enumerate() {
        cur[0] = Cost {
            edits: i + 1,
            subs: 0,
            ins: 0,
        };
        for j in 1..cols {
            let diag = if *rw == h[j - 1] {
                prev[j - 1]
            } else {
                prev[j - 1].step(1, 0, 0)
            };
            let del = prev[j].step(0, 0, 1);
            let ins = cur[j - 1].step(0, 1, 0);
            cur[j] = diag.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let best = prev[cols - 1];
    let deletions = best.edits - best.subs - best.ins;
    Ok(WerReport {
        substitutions: best.subs,
        insertions: best.ins,
        deletions,
        hits: r.len() - best.subs - deletions,
        ref_words: r.len(),
    })
}

/// Sums counts; the rate of the result is total errors over total words.
pub fn aggregate(reports: &[WerReport]) -> Result<WerReport, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyList);
    }
    Ok(reports.iter().copied().fold(WerReport::default(), Add::add))
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
}

pub fn read_records(reader: impl BufRead) -> Result<Vec<TextRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| EvalError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEvaluation {
    pub per_pair: Vec<(String, WerReport)>,
    pub aggregate: WerReport,
}

impl CorpusEvaluation {
    pub fn to_json(&self) -> serde_json::Value {
        let per_pair: Vec<_> = self
            .per_pair
            .iter()
            .map(|(id, r)| {
                let mut v = serde_json::to_value(WerReportWithRate(*r)).unwrap();
                v["id"] = serde_json::Value::String(id.clone());
                v
            })
            .collect();
        serde_json::json!({
            "per_pair": per_pair,
            "aggregate": WerReportWithRate(self.aggregate),
        })
    }
}

/// Scores id-keyed reference/hypothesis pairs, in reference order.
///
/// Both sides must carry the same id set. An empty reference paired with an
/// empty hypothesis scores zero; with a non-empty hypothesis it fails.
pub fn evaluate_corpus(
    references: &[(String, NormalizedTranscript)],
    hypotheses: &[(String, NormalizedTranscript)],
) -> Result<CorpusEvaluation, EvalError> {
    let mut hyp_by_id = BTreeMap::new();
    for (id, t) in hypotheses {
        if hyp_by_id.insert(id.as_str(), t).is_some() {
            return Err(EvalError::DuplicateId(id.clone()));
        }
    }
    let mut seen = HashSet::with_capacity(references.len());
    let mut per_pair = Vec::with_capacity(references.len());
    for (id, r) in references {
        if !seen.insert(id.as_str()) {
            return Err(EvalError::DuplicateId(id.clone()));
        }
        let h = hyp_by_id
            .get(id.as_str())
            .ok_or_else(|| EvalError::IdMismatch(format!("no hypothesis for {id:?}")))?;
        per_pair.push((id.clone(), wer(r, h)?));
    }
    if let Some(extra) = hyp_by_id.keys().find(|id| !seen.contains(*id)) {
        return Err(EvalError::IdMismatch(format!("no reference for {extra:?}")));
    }
    let reports: Vec<_> = per_pair.iter().map(|(_, r)| *r).collect();
    let aggregate = aggregate(&reports)?;
    Ok(CorpusEvaluation {
        per_pair,
        aggregate,
    })
}
