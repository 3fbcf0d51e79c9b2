//! Count, prune, estimate and serialize a 3-gram model, then score a few
//! sentences with it.
//!
//! cargo run --example train_lm

use ctcfuse::lm::{self, PruneThresholds};
use ctcfuse::textnorm::{normalize, NormalizationConfig};

const TEXT: &str = "\
Dobrý den, jak se máte?
Dobrý den, mám se dobře.
Jak se máte vy?
Mám se dobře, děkuji.
Dobrý večer.
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = NormalizationConfig::default();
    let corpus: Vec<_> = TEXT.lines().map(|l| normalize(l, &cfg)).collect();

    let counts = lm::count_ngrams(&corpus, 3)?;
    println!(
        "raw counts: {} / {} / {}",
        counts.len(1),
        counts.len(2),
        counts.len(3)
    );

    // the defaults (10 and 100) would wipe out a corpus this small
    let pruned = lm::prune(&counts, PruneThresholds::new(2, 2));
    println!(
        "after pruning at 2: {} / {} / {}",
        pruned.len(1),
        pruned.len(2),
        pruned.len(3)
    );

    let model = lm::estimate(&pruned)?;
    print!("{}", lm::write_arpa_string(&model));

    for s in ["dobrý den", "den dobrý", "jak se máte", "máte se jak"] {
        let t = normalize(s, &cfg);
        println!("log10 P(<s> {s} </s>) = {:.4}", model.sentence_logprob(&t));
    }
    let ctx = [model.word_id("jak"), model.word_id("se")];
    println!(
        "sum over words of P(w | jak se) = {:.12}",
        model.conditional_mass(&ctx)
    );
    Ok(())
}
