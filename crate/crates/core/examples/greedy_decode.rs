//! Best-path CTC decoding of a hand-built emission matrix, plus a round trip
//! through the binary emission format.
//!
//! cargo run --example greedy_decode

use ctcfuse::decoder::{collapse, greedy_labels};
use ctcfuse::{greedy_decode, load_emissions, save_emissions, Alphabet, EmissionMatrix};

/// Each frame puts 0.9 on one token and spreads the rest evenly.
fn peaky(path: &[usize], vocab: usize) -> EmissionMatrix {
    let rest = 0.1 / (vocab - 1) as f64;
    let rows: Vec<Vec<f64>> = path
        .iter()
        .map(|&k| {
            (0..vocab)
                .map(|j| if j == k { 0.9 } else { rest })
                .collect()
        })
        .collect();
    EmissionMatrix::from_probs(&rows, 0.02).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alphabet = Alphabet::from_chars("ahojsvěte")?;
    let id = |c: &str| alphabet.index_of(c).unwrap();
    let (b, d) = (alphabet.blank(), alphabet.delimiter());

    // "ahoj světe" with doubled frames, blanks and a repeated delimiter
    let mut path = vec![b];
    for (i, word) in ["ahoj", "světe"].iter().enumerate() {
        if i > 0 {
            path.extend([d, d, b]);
        }
        for c in word.chars() {
            let k = id(&c.to_string());
            path.extend([k, k, b]);
        }
    }
    let e = peaky(&path, alphabet.len());

    let labels = greedy_labels(&e);
    println!("frames:     {}", labels.len());
    println!("collapsed:  {:?}", alphabet.render(&collapse(&labels, b)));
    println!("transcript: {}", greedy_decode(&e, &alphabet));

    let file = std::env::temp_dir().join("ctcfuse_greedy_example.emit");
    save_emissions(&e, &file)?;
    let back = load_emissions(&file, &alphabet)?;
    assert_eq!(back, e);
    println!(
        "round trip: {} bytes, identical",
        std::fs::metadata(&file)?.len()
    );
    std::fs::remove_file(file)?;
    Ok(())
}
