//! Synthetic data shared by the integration tests.
#![allow(dead_code)]

use ctcfuse::{Alphabet, EmissionMatrix, NormalizedTranscript};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` words over `letters`, distinct, lengths 2..=5.
pub fn make_words(rng: &mut impl Rng, letters: &[char], n: usize) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(n);
    while words.len() < n {
        let len = rng.gen_range(2..=5);
        let w: String = (0..len).map(|_| *letters.choose(rng).unwrap()).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

/// Markov text: with probability `stickiness` the next word is the fixed
/// successor of the previous one, otherwise a Zipf-weighted draw.
pub fn markov_corpus(
    rng: &mut impl Rng,
    words: &[String],
    sentences: usize,
    len: std::ops::RangeInclusive<usize>,
    stickiness: f64,
) -> Vec<NormalizedTranscript> {
    let zipf = WeightedIndex::new((1..=words.len()).map(|r| 1.0 / r as f64)).unwrap();
    (0..sentences)
        .map(|_| {
            let n = rng.gen_range(len.clone());
            let mut prev = zipf.sample(rng);
            let mut out = vec![words[prev].clone()];
            for _ in 1..n {
                prev = if rng.gen_bool(stickiness) {
                    (prev * 7 + 3) % words.len()
                } else {
                    zipf.sample(rng)
                };
                out.push(words[prev].clone());
            }
            NormalizedTranscript::from_words(out)
        })
        .collect()
}

/// Random strictly positive per-frame distributions.
pub fn random_probs(rng: &mut impl Rng, frames: usize, vocab: usize) -> Vec<Vec<f64>> {
    (0..frames)
        .map(|_| {
            let raw: Vec<f64> = (0..vocab).map(|_| rng.gen_range(0.01..1.0)).collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / z).collect()
        })
        .collect()
}

/// `<blank>`, `|`, then the given letters.
pub fn alphabet_of(letters: &[char]) -> Alphabet {
    Alphabet::from_chars(&letters.iter().collect::<String>()).unwrap()
}

/// Acoustic-model stand-in: every label of `text` is held for two frames and
/// followed by a blank frame. Each frame gets Gaussian logits with `margin`
/// added to the true token, then a log-softmax.
pub fn noisy_emissions(
    rng: &mut impl Rng,
    alphabet: &Alphabet,
    text: &str,
    sigma: f64,
    margin: f64,
) -> EmissionMatrix {
    let labels = alphabet.encode(text).expect("text fits alphabet");
    let mut targets = vec![alphabet.blank()];
    for &l in &labels {
        targets.extend([l, l, alphabet.blank()]);
    }
    let noise = Normal::new(0.0, sigma).unwrap();
    let v = alphabet.len();
    let mut values = Vec::with_capacity(targets.len() * v);
    for &t in &targets {
        let mut logits: Vec<f64> = (0..v).map(|_| noise.sample(rng)).collect();
        logits[t] += margin;
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z = m + logits.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        values.extend(logits.iter().map(|x| (x - z) as f32));
    }
    EmissionMatrix::new(targets.len(), v, values, 0.02).unwrap()
}
