//! Transcript normalization with the default and a customized configuration.
//!
//! cargo run --example normalize

use ctcfuse::textnorm::{normalize, render, NormalizationConfig, ReplacementTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lines = [
        "Dobrý den, [smích] jak se MÁTE?",
        "\"Ne-e,\" řekl… a odešel [hluk].",
        "Sejdeme se v 7:30 na Václaváku!",
    ];

    let default = NormalizationConfig::default();
    println!("default:");
    for l in lines {
        println!("  {l:<40} -> {}", render(&normalize(l, &default)));
    }

    let custom = NormalizationConfig {
        keep_hyphens: true,
        replacements: ReplacementTable::parse("Václaváku\tVáclavském náměstí\n")?,
        ..Default::default()
    };
    println!("hyphens kept, one replacement:");
    for l in lines {
        println!("  {l:<40} -> {}", render(&normalize(l, &custom)));
    }

    // normalizing is idempotent
    let once = normalize(lines[1], &default);
    assert_eq!(normalize(&render(&once), &default), once);
    Ok(())
}
