use std::collections::HashMap;

use rayon::prelude::*;

use super::vocab::{Vocab, WordId};
use super::{LmError, MAX_ORDER};
use crate::textnorm::NormalizedTranscript;

const SHARD_SENTENCES: usize = 4096;

/// Raw occurrence count plus the Kneser-Ney adjusted count.
///
/// The adjusted count of a highest-order n-gram, or of one starting with
/// `<s>`, is its raw count. Any other n-gram gets the number of distinct words
/// seen immediately to its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count {
    pub raw: u64,
    pub adjusted: u64,
}

pub(crate) type Table = HashMap<Vec<WordId>, Count>;

#[derive(Debug, Clone, PartialEq)]
pub struct NGramCounts {
    order: usize,
    vocab: Vocab,
    /// `tables[n - 1]` holds the n-grams.
    tables: Vec<Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneThresholds {
    pub unigram_min: u64,
    pub higher_order_min: u64,
}

impl Default for PruneThresholds {
    /// Unigrams seen fewer than 10 times and longer n-grams seen fewer than
    /// 100 times are dropped.
    fn default() -> Self {
        Self {
            unigram_min: 10,
            higher_order_min: 100,
        }
    }
}

impl PruneThresholds {
    pub const NONE: PruneThresholds = PruneThresholds {
        unigram_min: 1,
        higher_order_min: 1,
    };

    pub fn new(unigram_min: u64, higher_order_min: u64) -> Self {
        Self {
            unigram_min: unigram_min.max(1),
            higher_order_min: higher_order_min.max(1),
        }
    }
}

impl NGramCounts {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub(crate) fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn is_empty(&self) -> bool {
        self.tables.iter().all(HashMap::is_empty)
    }

    /// Number of distinct n-grams of order `n`.
    pub fn len(&self, n: usize) -> usize {
        self.tables.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    pub fn get(&self, ngram: &[&str]) -> Option<Count> {
        let ids: Option<Vec<WordId>> = ngram.iter().map(|w| self.vocab.get(w)).collect();
        self.tables
            .get(ngram.len().checked_sub(1)?)?
            .get(&ids?)
            .copied()
    }

    /// Raw count, zero when absent.
    pub fn raw(&self, ngram: &[&str]) -> u64 {
        self.get(ngram).map_or(0, |c| c.raw)
    }

    /// All n-grams of order `n` as word tuples with raw counts, sorted.
    pub fn raw_entries(&self, n: usize) -> Vec<(Vec<String>, u64)> {
        let mut out: Vec<_> = self
            .tables
            .get(n.wrapping_sub(1))
            .into_iter()
            .flatten()
            .map(|(k, c)| {
                (
                    k.iter()
                        .map(|&id| self.vocab.word(id).to_string())
                        .collect(),
                    c.raw,
                )
            })
            .collect();
        out.sort();
        out
    }

    fn compute_adjusted(&mut self) {
        let order = self.order;
        for n in 1..order {
            let mut left_ext: HashMap<&[WordId], u64> = HashMap::new();
            for key in self.tables[n].keys() {
                *left_ext.entry(&key[1..]).or_default() += 1;
            }
            let adjusted: Vec<(Vec<WordId>, u64)> = self.tables[n - 1]
                .keys()
                .map(|k| {
                    let a = if k[0] == Vocab::BOS_ID {
                        self.tables[n - 1][k].raw
                    } else {
                        left_ext.get(k.as_slice()).copied().unwrap_or(0)
                    };
                    (k.clone(), a)
                })
                .collect();
            for (k, a) in adjusted {
                self.tables[n - 1].get_mut(&k).unwrap().adjusted = a;
            }
        }
        if let Some(top) = self.tables.last_mut() {
            for c in top.values_mut() {
                c.adjusted = c.raw;
            }
        }
    }
}

/// Counts all n-grams up to `order` over `<s> w1 .. wk </s>` padded
/// sentences. Orders above 4 are rejected.
pub fn count_ngrams<'a>(
    corpus: impl IntoIterator<Item = &'a NormalizedTranscript>,
    order: usize,
) -> Result<NGramCounts, LmError> {
    count_ngrams_with_limit(corpus, order, MAX_ORDER)
}

/// Like [`count_ngrams`] with a caller-chosen order cap.
pub fn count_ngrams_with_limit<'a>(
    corpus: impl IntoIterator<Item = &'a NormalizedTranscript>,
    order: usize,
    max_order: usize,
) -> Result<NGramCounts, LmError> {
    if order == 0 || order > max_order {
        return Err(LmError::OrderOutOfRange {
            order,
            max: max_order,
        });
    }
    let mut vocab = Vocab::default();
    let sentences: Vec<Vec<WordId>> = corpus
        .into_iter()
        .map(|t| {
            let mut s = Vec::with_capacity(t.len() + 2);
            s.push(Vocab::BOS_ID);
            s.extend(t.words().iter().map(|w| vocab.intern(w)));
            s.push(Vocab::EOS_ID);
            s
        })
        .collect();

    let tables = sentences
        .par_chunks(SHARD_SENTENCES)
        .map(|shard| count_shard(shard, order))
        .reduce(|| vec![Table::new(); order], merge_tables);

    let mut counts = NGramCounts {
        order,
        vocab,
        tables,
    };
    counts.compute_adjusted();
    Ok(counts)
}

fn count_shard(sentences: &[Vec<WordId>], order: usize) -> Vec<Table> {
    let mut tables = vec![Table::new(); order];
    for s in sentences {
        for n in 1..=order.min(s.len()) {
            for w in s.windows(n) {
                tables[n - 1]
                    .entry(w.to_vec())
                    .or_insert(Count {
                        raw: 0,
                        adjusted: 0,
                    })
                    .raw += 1;
            }
        }
    }
    tables
}

fn merge_tables(mut a: Vec<Table>, b: Vec<Table>) -> Vec<Table> {
    for (ta, tb) in a.iter_mut().zip(b) {
        if ta.len() < tb.len() {
            // merge the smaller map into the larger one
            let small = std::mem::replace(ta, tb);
            for (k, c) in small {
                ta.entry(k)
                    .or_insert(Count {
                        raw: 0,
                        adjusted: 0,
                    })
                    .raw += c.raw;
            }
        } else {
            for (k, c) in tb {
                ta.entry(k)
                    .or_insert(Count {
                        raw: 0,
                        adjusted: 0,
                    })
                    .raw += c.raw;
            }
        }
    }
    a
}

/// Drops rare n-grams by raw count.
///
/// Sentence markers are never pruned as unigrams. A dropped unigram removes
/// every longer n-gram containing it, a dropped n-gram removes its
/// extensions, and the counts of dropped unigrams are pooled into `<unk>`.
pub fn prune(counts: &NGramCounts, t: PruneThresholds) -> NGramCounts {
    let mut tables: Vec<Table> = Vec::with_capacity(counts.order);
    let mut unk = Count {
        raw: 0,
        adjusted: 0,
    };
    let mut unigrams = Table::new();
    for (k, c) in &counts.tables[0] {
        let marker = k[0] == Vocab::BOS_ID || k[0] == Vocab::EOS_ID;
        if marker || c.raw >= t.unigram_min {
            unigrams.insert(k.clone(), *c);
        } else {
            unk.raw += c.raw;
            unk.adjusted += c.adjusted;
        }
    }
    if unk.raw > 0 {
        let e = unigrams.entry(vec![Vocab::UNK_ID]).or_insert(Count {
            raw: 0,
            adjusted: 0,
        });
        e.raw += unk.raw;
        e.adjusted += unk.adjusted;
    }
    tables.push(unigrams);
    for n in 2..=counts.order {
        let lower = &tables[n - 2];
        let kept: Table = counts.tables[n - 1]
            .iter()
            .filter(|(k, c)| {
                c.raw >= t.higher_order_min
                    && lower.contains_key(&k[..n - 1])
                    && k.iter()
                        .all(|id| tables[0].contains_key(std::slice::from_ref(id)))
            })
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        tables.push(kept);
    }
    NGramCounts {
        order: counts.order,
        vocab: counts.vocab.clone(),
        tables,
    }
}
