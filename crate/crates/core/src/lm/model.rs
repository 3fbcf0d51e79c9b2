use std::collections::HashMap;

use super::vocab::{Vocab, WordId};
use crate::textnorm::NormalizedTranscript;

/// log10 probability and log10 backoff weight of one n-gram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmEntry {
    pub log10_prob: f64,
    pub log10_backoff: f64,
}

/// Immutable backoff model. Queries follow the ARPA recursion:
/// a stored n-gram returns its probability, otherwise the context's backoff
/// weight is added and the context is shortened by its oldest word.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    vocab: Vocab,
    tables: Vec<HashMap<Vec<WordId>, LmEntry>>,
}

impl NGramModel {
    pub(crate) fn from_parts(
        order: usize,
        vocab: Vocab,
        tables: Vec<HashMap<Vec<WordId>, LmEntry>>,
    ) -> Self {
        debug_assert_eq!(order, tables.len());
        Self {
            order,
            vocab,
            tables,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Words the model can predict: every unigram except `<s>`.
    pub fn predictable_words(&self) -> impl Iterator<Item = WordId> + '_ {
        self.tables[0]
            .keys()
            .map(|k| k[0])
            .filter(|&id| id != Vocab::BOS_ID)
    }

    /// Vocabulary size as reported for trained models, markers included.
    pub fn vocab_size(&self) -> usize {
        self.tables[0].len()
    }

    pub fn num_entries(&self, n: usize) -> usize {
        self.tables.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    pub fn entry(&self, ngram: &[WordId]) -> Option<&LmEntry> {
        self.tables.get(ngram.len().checked_sub(1)?)?.get(ngram)
    }

    pub fn entry_str(&self, ngram: &[&str]) -> Option<&LmEntry> {
        let ids: Option<Vec<WordId>> = ngram.iter().map(|w| self.vocab.get(w)).collect();
        self.entry(&ids?)
    }

    /// Stored n-grams of order `n`, in no particular order.
    pub fn ngrams(&self, n: usize) -> impl Iterator<Item = (&[WordId], &LmEntry)> + '_ {
        self.tables
            .get(n.wrapping_sub(1))
            .into_iter()
            .flat_map(|t| t.iter().map(|(k, v)| (k.as_slice(), v)))
    }

    pub(crate) fn tables(&self) -> &[HashMap<Vec<WordId>, LmEntry>] {
        &self.tables
    }

    pub fn word_id(&self, word: &str) -> WordId {
        self.vocab.id_or_unk(word)
    }

    /// log10 P(word | context). Only the last `order - 1` context words are
    /// used.
    pub fn score_ids(&self, context: &[WordId], word: WordId) -> f64 {
        let keep = context.len().min(self.order - 1);
        let mut ctx = &context[context.len() - keep..];
        let mut key = Vec::with_capacity(keep + 1);
        let mut backoff = 0.0;
        loop {
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            if let Some(e) = self.tables[ctx.len()].get(&key) {
                return backoff + e.log10_prob;
            }
            if ctx.is_empty() {
                // not even a unigram: score as <unk>
                return backoff
                    + self.tables[0]
                        .get([Vocab::UNK_ID].as_slice())
                        .map_or(f64::NEG_INFINITY, |e| e.log10_prob);
            }
            if let Some(e) = self.tables[ctx.len() - 1].get(ctx) {
                backoff += e.log10_backoff;
            }
            ctx = &ctx[1..];
        }
    }

    /// String form of [`score_ids`](Self::score_ids); OOV words map to `<unk>`.
    pub fn score_word(&self, word: &str, context: &[&str]) -> f64 {
        let ctx: Vec<WordId> = context.iter().map(|w| self.word_id(w)).collect();
        self.score_ids(&ctx, self.word_id(word))
    }

    /// log10 probability of `<s> words </s>`.
    pub fn sentence_logprob(&self, t: &NormalizedTranscript) -> f64 {
        let mut ctx = vec![Vocab::BOS_ID];
        let mut total = 0.0;
        for w in t.words() {
            let id = self.word_id(w);
            total += self.score_ids(&ctx, id);
            ctx.push(id);
        }
        total + self.score_ids(&ctx, Vocab::EOS_ID)
    }

    /// Σ_w P(w | context) over all predictable words, in linear space.
    pub fn conditional_mass(&self, context: &[WordId]) -> f64 {
        let mut ids: Vec<WordId> = self.predictable_words().collect();
        ids.sort_unstable();
        ids.iter()
            .map(|&w| 10f64.powf(self.score_ids(context, w)))
            .sum()
    }

    /// Initial decoder context: `<s>`.
    pub fn begin_context(&self) -> Vec<WordId> {
        vec![Vocab::BOS_ID]
    }

    /// Appends `word` to `context`, keeping at most `order - 1` words.
    pub fn advance_context(&self, context: &[WordId], word: WordId) -> Vec<WordId> {
        let keep = self.order - 1;
        let mut next: Vec<WordId> = context.iter().copied().chain([word]).collect();
        if next.len() > keep {
            next.drain(..next.len() - keep);
        }
        next
    }
}
