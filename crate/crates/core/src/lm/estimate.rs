//! Interpolated modified Kneser-Ney estimation.
//!
//! For a context `h` with adjusted counts `a(h·)` and discounts `D(a)`:
//!
//! ```text
//! p(w | h) = (a(hw) - D(a(hw))) / Σ_x a(hx)  +  γ(h) · p(w | h')
//! γ(h)     = Σ_x D(a(hx)) / Σ_x a(hx)
//! ```
//!
//! where `h'` drops the oldest word of `h`. Unigrams interpolate with the
//! uniform distribution over predictable words. `γ(h)` is stored as the
//! backoff weight of `h`, so the ARPA backoff recursion reproduces the
//! interpolated distribution exactly.

use std::collections::HashMap;

use log::{debug, warn};

use super::counts::{Count, NGramCounts};
use super::model::{LmEntry, NGramModel};
use super::vocab::{Vocab, WordId};
use super::LmError;

/// log10 probability written for `<s>`, which is never predicted.
pub(crate) const BOS_LOG10_PROB: f64 = -99.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    /// Probability given to `<unk>` when pruning removed nothing.
    pub unk_floor: f64,
    /// Absolute discount used when count-of-counts do not support modified
    /// Kneser-Ney discounts.
    pub fallback_discount: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            unk_floor: 1e-7,
            fallback_discount: 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3_plus: f64,
    pub fallback: bool,
}

impl Discounts {
    /// Modified Kneser-Ney discounts from the number of n-grams with adjusted
    /// count exactly 1, 2, 3 and 4. Falls back to a single absolute discount
    /// when any of them is zero or a discount leaves its valid range.
    pub fn from_count_of_counts(n: [u64; 4], fallback_discount: f64) -> Self {
        let fallback = Self {
            d1: fallback_discount,
            d2: fallback_discount,
            d3_plus: fallback_discount,
            fallback: true,
        };
        if n.contains(&0) {
            return fallback;
        }
        let [n1, n2, n3, n4] = n.map(|c| c as f64);
        let y = n1 / (n1 + 2.0 * n2);
        let d1 = 1.0 - 2.0 * y * n2 / n1;
        let d2 = 2.0 - 3.0 * y * n3 / n2;
        let d3_plus = 3.0 - 4.0 * y * n4 / n3;
        let ok = d1 > 0.0 && d1 < 1.0 && d2 > 0.0 && d2 < 2.0 && d3_plus > 0.0 && d3_plus < 3.0;
        if !ok {
            return fallback;
        }
        Self {
            d1,
            d2,
            d3_plus,
            fallback: false,
        }
    }

    /// Σ D(a) over a context whose continuations have adjusted counts
    /// bucketed as `[#1, #2, #3+]`.
    fn mass(&self, buckets: [u64; 3]) -> f64 {
        self.d1 * buckets[0] as f64 + self.d2 * buckets[1] as f64 + self.d3_plus * buckets[2] as f64
    }

    pub fn for_count(&self, a: u64) -> f64 {
        match a {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3_plus,
        }
    }
}

fn count_of_counts<'a>(counts: impl Iterator<Item = &'a Count>) -> [u64; 4] {
    let mut n = [0u64; 4];
    for c in counts {
        if (1..=4).contains(&c.adjusted) {
            n[c.adjusted as usize - 1] += 1;
        }
    }
    n
}

fn bucket(adjusted: u64) -> usize {
    (adjusted.clamp(1, 3) - 1) as usize
}

pub fn estimate(counts: &NGramCounts) -> Result<NGramModel, LmError> {
    estimate_with(counts, &EstimateOptions::default())
}

pub fn estimate_with(counts: &NGramCounts, opts: &EstimateOptions) -> Result<NGramModel, LmError> {
    let src = counts.tables();
    let has_words = src
        .first()
        .is_some_and(|t| t.keys().any(|k| k[0] != Vocab::BOS_ID));
    if !has_words {
        return Err(LmError::DegenerateCounts);
    }
    let order = src.iter().take_while(|t| !t.is_empty()).count();
    if order < counts.order() {
        warn!(
            "no n-grams of order {} survived; reducing model order from {} to {}",
            order + 1,
            counts.order(),
            order
        );
    }

    // Re-intern so the model vocabulary holds exactly the surviving unigrams.
    let old = counts.vocab();
    let mut surviving: Vec<WordId> = src[0].keys().map(|k| k[0]).collect();
    surviving.sort_unstable();
    let mut vocab = Vocab::default();
    let mut remap: HashMap<WordId, WordId> = HashMap::with_capacity(surviving.len() + 3);
    for id in [Vocab::UNK_ID, Vocab::BOS_ID, Vocab::EOS_ID] {
        remap.insert(id, id);
    }
    for id in surviving {
        remap.insert(id, vocab.intern(old.word(id)));
    }
    let tables: Vec<HashMap<Vec<WordId>, Count>> = src[..order]
        .iter()
        .map(|t| {
            t.iter()
                .map(|(k, c)| (k.iter().map(|id| remap[id]).collect(), *c))
                .collect()
        })
        .collect();

    let mut out: Vec<HashMap<Vec<WordId>, LmEntry>> = Vec::with_capacity(order);
    out.push(estimate_unigrams(&tables[0], opts));
    for n in 2..=order {
        let discounts = Discounts::from_count_of_counts(
            count_of_counts(tables[n - 1].values()),
            opts.fallback_discount,
        );
        debug!("order {n} discounts {discounts:?}");

        let mut per_context: HashMap<&[WordId], (u64, [u64; 3])> = HashMap::new();
        for (k, c) in &tables[n - 1] {
            let e = per_context.entry(&k[..n - 1]).or_insert((0, [0; 3]));
            e.0 += c.adjusted;
            if c.adjusted > 0 {
                e.1[bucket(c.adjusted)] += 1;
            }
        }

        let mut entries = HashMap::with_capacity(tables[n - 1].len());
        for (k, c) in &tables[n - 1] {
            let (total, buckets) = per_context[&k[..n - 1]];
            let total = total as f64;
            let gamma = discounts.mass(buckets) / total;
            let lower = 10f64.powf(backoff_score(&out, &k[1..n - 1], k[n - 1]));
            let p = (c.adjusted as f64 - discounts.for_count(c.adjusted)) / total + gamma * lower;
            entries.insert(
                k.clone(),
                LmEntry {
                    log10_prob: p.log10(),
                    log10_backoff: 0.0,
                },
            );
        }
        for (ctx, (total, buckets)) in per_context {
            if let Some(e) = out[n - 2].get_mut(ctx) {
                e.log10_backoff = (discounts.mass(buckets) / total as f64).log10();
            }
        }
        out.push(entries);
    }
    Ok(NGramModel::from_parts(order, vocab, out))
}

fn estimate_unigrams(
    table: &HashMap<Vec<WordId>, Count>,
    opts: &EstimateOptions,
) -> HashMap<Vec<WordId>, LmEntry> {
    let predicted: Vec<(&Vec<WordId>, &Count)> = table
        .iter()
        .filter(|(k, _)| k[0] != Vocab::BOS_ID)
        .collect();
    let has_unk = table.contains_key([Vocab::UNK_ID].as_slice());
    let discounts = Discounts::from_count_of_counts(
        count_of_counts(predicted.iter().map(|(_, c)| *c)),
        opts.fallback_discount,
    );
    debug!("order 1 discounts {discounts:?}");
    let total: u64 = predicted.iter().map(|(_, c)| c.adjusted).sum();
    let total = total as f64;
    let mut buckets = [0u64; 3];
    for (_, c) in &predicted {
        if c.adjusted > 0 {
            buckets[bucket(c.adjusted)] += 1;
        }
    }
    let gamma = discounts.mass(buckets) / total;
    // <unk> takes part in the uniform share only when it was counted
    let support = predicted.len() as f64;
    let scale = if has_unk { 1.0 } else { 1.0 - opts.unk_floor };

    let mut out: HashMap<Vec<WordId>, LmEntry> = predicted
        .iter()
        .map(|(k, c)| {
            let a = c.adjusted as f64;
            let p = (a - discounts.for_count(c.adjusted)) / total + gamma / support;
            (
                (*k).clone(),
                LmEntry {
                    log10_prob: (scale * p).log10(),
                    log10_backoff: 0.0,
                },
            )
        })
        .collect();
    if !has_unk {
        out.insert(
            vec![Vocab::UNK_ID],
            LmEntry {
                log10_prob: opts.unk_floor.log10(),
                log10_backoff: 0.0,
            },
        );
    }
    out.insert(
        vec![Vocab::BOS_ID],
        LmEntry {
            log10_prob: BOS_LOG10_PROB,
            log10_backoff: 0.0,
        },
    );
    out
}

/// Backoff recursion over partially built tables.
fn backoff_score(
    tables: &[HashMap<Vec<WordId>, LmEntry>],
    context: &[WordId],
    word: WordId,
) -> f64 {
    let mut ctx = context;
    let mut key = Vec::with_capacity(ctx.len() + 1);
    let mut backoff = 0.0;
    loop {
        key.clear();
        key.extend_from_slice(ctx);
        key.push(word);
        if let Some(e) = tables[ctx.len()].get(&key) {
            return backoff + e.log10_prob;
        }
        if ctx.is_empty() {
            return backoff + tables[0][[Vocab::UNK_ID].as_slice()].log10_prob;
        }
        if let Some(e) = tables[ctx.len() - 1].get(ctx) {
            backoff += e.log10_backoff;
        }
        ctx = &ctx[1..];
    }
}
