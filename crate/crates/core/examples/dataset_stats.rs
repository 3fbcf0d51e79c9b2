//! Dataset summary (hours, words, average length) and fine-tuning schedule
//! labels.
//!
//! cargo run --example dataset_stats

use ctcfuse::manifest::{effective_epochs, stats, ScheduleSpec};
use ctcfuse::segmenter::Segment;
use ctcfuse::NormalizedTranscript;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let durations = [4.2, 11.0, 7.5, 29.9, 3.1];
    let texts = [
        "ano",
        "to je pravda co říkáte",
        "no tak dobře",
        "a pak jsme šli domů a bylo po všem",
        "děkuji",
    ];
    let segments: Vec<Segment> = durations
        .iter()
        .enumerate()
        .map(|(i, &d)| Segment {
            id: format!("seg{i}"),
            utterance_id: format!("seg{i}"),
            start: 0.0,
            end: d,
        })
        .collect();
    let transcripts: Vec<NormalizedTranscript> = texts
        .iter()
        .map(|t| NormalizedTranscript::from_normalized_text(t))
        .collect();
    let s = stats(&segments, &transcripts)?;
    println!("{}", s.table_row("toy"));

    println!();
    for (b, u) in [(1, 1), (1, 2), (2, 1), (2, 2), (4, 1), (4, 2)] {
        let spec = ScheduleSpec::new(5, b, u)?;
        println!(
            "{:<24} = {} passes over the data",
            spec.label(),
            effective_epochs(&spec)
        );
    }
    Ok(())
}
