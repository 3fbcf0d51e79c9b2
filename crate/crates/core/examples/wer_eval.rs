//! Word error rate per utterance, per dataset, and across datasets.
//!
//! cargo run --example wer_eval

use ctcfuse::eval::{aggregate, wer, WerReport};
use ctcfuse::textnorm::{normalize, NormalizationConfig};

fn dataset(pairs: &[(&str, &str)]) -> WerReport {
    let cfg = NormalizationConfig::default();
    let reports: Vec<WerReport> = pairs
        .iter()
        .map(|(r, h)| {
            let rep = wer(&normalize(r, &cfg), &normalize(h, &cfg)).unwrap();
            println!(
                "  {r:?} / {h:?}: S={} I={} D={}",
                rep.substitutions, rep.insertions, rep.deletions
            );
            rep
        })
        .collect();
    aggregate(&reports).unwrap()
}

fn main() {
    println!("small set:");
    let small = dataset(&[("Dobrý den.", "dobrý den"), ("Jak se máte?", "jak se mate")]);
    println!("large set:");
    let large = dataset(&[
        (
            "to je velmi dlouhá věta o ničem",
            "to je velmi dlouhá věta o ničem",
        ),
        ("a tady je další", "a tady další je"),
        ("konec", "konec konců"),
    ]);
    let total = aggregate(&[small, large]).unwrap();
    println!("small {}  large {}", small.percent(), large.percent());
    // summed errors over summed reference words, not a mean of rates
    println!(
        "total {} ({} errors / {} words); mean of rates would give {:.2}%",
        total.percent(),
        total.errors(),
        total.ref_words,
        50.0 * (small.wer() + large.wer())
    );
}
