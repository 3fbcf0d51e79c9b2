//! Beam search with and without a word n-gram LM on an acoustically
//! ambiguous utterance. The acoustics slightly prefer "bes" over "pes"; the
//! LM knows that "velký pes" is what people say.
//!
//! cargo run --example beam_search_lm

use ctcfuse::lm::{self, PruneThresholds};
use ctcfuse::{
    beam_search_decode, greedy_decode, Alphabet, DecoderConfig, EmissionMatrix,
    NormalizedTranscript,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alphabet = Alphabet::from_chars("bepsvlkýá")?;
    let v = alphabet.len();
    let id = |c: char| alphabet.index_of(&c.to_string()).unwrap();

    // one row per frame: (token, probability); the rest is shared evenly
    let mut frames: Vec<Vec<(usize, f64)>> = Vec::new();
    for c in "velký".chars() {
        frames.push(vec![(id(c), 0.9)]);
        frames.push(vec![(alphabet.blank(), 0.9)]);
    }
    frames.push(vec![(alphabet.delimiter(), 0.9)]);
    frames.push(vec![(id('b'), 0.5), (id('p'), 0.4)]);
    for c in "es".chars() {
        frames.push(vec![(id(c), 0.9)]);
        frames.push(vec![(alphabet.blank(), 0.9)]);
    }
    let rows: Vec<Vec<f64>> = frames
        .iter()
        .map(|peaks| {
            let taken: f64 = peaks.iter().map(|p| p.1).sum();
            let rest = (1.0 - taken) / (v - peaks.len()) as f64;
            (0..v)
                .map(|k| peaks.iter().find(|p| p.0 == k).map_or(rest, |p| p.1))
                .collect()
        })
        .collect();
    let e: EmissionMatrix = EmissionMatrix::from_probs(&rows, 0.02)?;

    let corpus: Vec<NormalizedTranscript> = [
        "velký pes",
        "malý pes",
        "velký pes štěká",
        "pes spí",
        "velký dům",
    ]
    .iter()
    .cycle()
    .take(50)
    .map(|s| NormalizedTranscript::from_normalized_text(s))
    .collect();
    let model = lm::estimate(&lm::prune(
        &lm::count_ngrams(&corpus, 3)?,
        PruneThresholds::NONE,
    ))?;

    println!("greedy:       {}", greedy_decode(&e, &alphabet));
    let plain = DecoderConfig {
        beam_width: 16,
        nbest: 3,
        ..Default::default()
    };
    let r = beam_search_decode(&e, &alphabet, &plain)?;
    println!("beam, no LM:  {}", r.transcript);
    let fused = beam_search_decode(&e, &alphabet, &plain.with_lm(&model))?;
    println!("beam + LM:    {}", fused.transcript);
    for h in &fused.nbest {
        println!(
            "  {:<14} fused {:>8.3}  acoustic {:>8.3}  lm log10 {:>7.3}  words {}",
            format!("{:?}", h.text),
            h.fused_score,
            h.acoustic_logp(),
            h.lm_log10,
            h.completed_words
        );
    }
    Ok(())
}
