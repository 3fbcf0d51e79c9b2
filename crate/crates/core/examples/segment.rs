//! Slicing long recordings at pauses under a 30 second cap.
//!
//! cargo run --example segment

use ctcfuse::segmenter::{slice_corpus, write_segments, Utterance, DEFAULT_MAX_LEN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let utterances = vec![
        Utterance::from_silences(
            "interview",
            95.0,
            &[(18.0, 19.0), (27.5, 28.5), (52.0, 54.0), (80.0, 81.0)],
        ),
        Utterance::from_silences("short", 12.0, &[]),
        // 40 seconds without a usable pause
        Utterance::from_silences("monologue", 70.0, &[(5.0, 6.0), (50.0, 51.0)]),
    ];
    let sliced = slice_corpus(&utterances, DEFAULT_MAX_LEN)?;
    for s in &sliced.segments {
        println!(
            "{:<14} {:>6.2} .. {:>6.2}  ({:.2} s)",
            s.id,
            s.start,
            s.end,
            s.duration()
        );
    }
    println!("discarded: {:?}", sliced.discarded_ids);

    println!("as JSON Lines:");
    write_segments(std::io::stdout().lock(), &sliced.segments)?;
    Ok(())
}
