//! Exact label-sequence posteriors by enumeration, compared with an unpruned
//! prefix beam search on the same input.
//!
//! cargo run --example oracle_check

use ctcfuse::decoder::{beam_search_decode, oracle_decode, DecoderConfig};
use ctcfuse::{Alphabet, EmissionMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alphabet = Alphabet::new(vec!["<blank>".into(), "|".into(), "a".into()], 0, 1)?;
    // two frames, P(blank) = 0.6 and P(a) = 0.4 in each; the delimiter never fires
    let e = EmissionMatrix::<f64>::from_probs(&[vec![0.6, 0.0, 0.4], vec![0.6, 0.0, 0.4]], 0.02)?;

    for entry in oracle_decode(&e, &alphabet)? {
        println!("oracle  {:>4?}  P = {:.6}", entry.text, entry.posterior);
    }
    let cfg = DecoderConfig {
        nbest: 4,
        ..DecoderConfig::exhaustive(8)
    };
    for h in beam_search_decode(&e, &alphabet, &cfg)?.nbest {
        println!("beam    {:>4?}  P = {:.6}", h.text, h.acoustic_logp().exp());
    }
    Ok(())
}
