//! ARPA backoff model text format.
//!
//! Numbers are written in Rust's shortest round-trip form, so a model read
//! back from its own output scores identically.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::{LmEntry, NGramModel};
use super::vocab::{Vocab, WordId, UNK};
use super::{malformed, LmError, MAX_ORDER};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArpaOptions {
    /// Accept models above the 4-gram cap.
    pub allow_high_order: bool,
}

pub fn write_arpa_string(model: &NGramModel) -> String {
    let vocab = model.vocab();
    let mut out = String::new();
    out.push_str("\\data\\\n");
    for n in 1..=model.order() {
        let _ = writeln!(out, "ngram {n}={}", model.num_entries(n));
    }
    for (i, table) in model.tables().iter().enumerate() {
        let n = i + 1;
        let _ = write!(out, "\n\\{n}-grams:\n");
        let mut rows: Vec<(Vec<&str>, &LmEntry)> = table
            .iter()
            .map(|(k, e)| (k.iter().map(|&id| vocab.word(id)).collect(), e))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        for (words, e) in rows {
            let _ = write!(out, "{}\t{}", e.log10_prob, words.join(" "));
            if n < model.order() {
                let _ = write!(out, "\t{}", e.log10_backoff);
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

pub fn write_arpa(model: &NGramModel, path: impl AsRef<Path>) -> Result<(), LmError> {
    fs::write(path, write_arpa_string(model))?;
    Ok(())
}

pub fn read_arpa(path: impl AsRef<Path>, opts: ArpaOptions) -> Result<NGramModel, LmError> {
    read_arpa_str(&fs::read_to_string(path)?, opts)
}

pub fn read_arpa_str(text: &str, opts: ArpaOptions) -> Result<NGramModel, LmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    // anything before \data\ is free-form
    let mut last_line = 0;
    loop {
        match lines.next() {
            Some((_, "\\data\\")) => break,
            Some((n, _)) => last_line = n,
            None => return Err(malformed(last_line, "missing \\data\\ header")),
        }
    }

    let mut declared: Vec<usize> = Vec::new();
    let mut pending = None;
    for (n, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("ngram ") {
            let (order, count) = rest
                .split_once('=')
                .ok_or_else(|| malformed(n, "expected `ngram N=count`"))?;
            let order: usize = order
                .trim()
                .parse()
                .map_err(|_| malformed(n, "bad order"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| malformed(n, "bad count"))?;
            if order != declared.len() + 1 {
                return Err(malformed(n, "ngram orders must be listed as 1, 2, ..."));
            }
            declared.push(count);
        } else {
            pending = Some((n, line));
            break;
        }
    }
    let order = declared.len();
    if order == 0 {
        return Err(malformed(0, "no ngram counts in header"));
    }
    if order > MAX_ORDER && !opts.allow_high_order {
        return Err(LmError::OrderTooHigh(order));
    }

    let mut vocab = Vocab::default();
    let mut tables: Vec<HashMap<Vec<WordId>, LmEntry>> = vec![HashMap::new(); order];
    let mut section: Option<usize> = None;
    let mut seen_end = false;
    let mut seen_sections = vec![false; order];
    let rest = pending.into_iter().chain(lines);
    for (n, line) in rest {
        if line.is_empty() {
            continue;
        }
        if line == "\\end\\" {
            seen_end = true;
            break;
        }
        if let Some(k) = line
            .strip_prefix('\\')
            .and_then(|l| l.strip_suffix("-grams:"))
        {
            let k: usize = k.parse().map_err(|_| malformed(n, "bad section header"))?;
            if k == 0 || k > order {
                return Err(malformed(
                    n,
                    format!("section {k} outside declared order {order}"),
                ));
            }
            if seen_sections[k - 1] {
                return Err(malformed(n, format!("duplicate {k}-grams section")));
            }
            seen_sections[k - 1] = true;
            section = Some(k);
            continue;
        }
        let k = section.ok_or_else(|| malformed(n, "entry outside any section"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let has_backoff = match fields.len() {
            x if x == k + 1 => false,
            x if x == k + 2 => true,
            _ => return Err(malformed(n, format!("expected {k} words"))),
        };
        let prob = parse_float(fields[0], n)?;
        let backoff = if has_backoff {
            parse_float(fields[k + 1], n)?
        } else {
            0.0
        };
        let key: Vec<WordId> = if k == 1 {
            vec![vocab.intern(fields[1])]
        } else {
            fields[1..=k]
                .iter()
                .map(|w| {
                    vocab
                        .get(w)
                        .ok_or_else(|| malformed(n, format!("word {w:?} missing from unigrams")))
                })
                .collect::<Result<_, _>>()?
        };
        if k >= 2 && !tables[k - 2].contains_key(&key[..k - 1]) {
            return Err(malformed(n, "context of n-gram is not itself listed"));
        }
        let entry = LmEntry {
            log10_prob: prob,
            log10_backoff: backoff,
        };
        if tables[k - 1].insert(key, entry).is_some() {
            return Err(malformed(n, "duplicate n-gram"));
        }
    }
    if !seen_end {
        return Err(malformed(text.lines().count(), "missing \\end\\"));
    }
    for (i, (&want, table)) in declared.iter().zip(&tables).enumerate() {
        if want != table.len() {
            return Err(malformed(
                0,
                format!(
                    "header declares {want} {}-grams, found {}",
                    i + 1,
                    table.len()
                ),
            ));
        }
    }
    // markers are interned up front; make sure the model can score OOV words
    tables[0].entry(vec![Vocab::UNK_ID]).or_insert_with(|| {
        log::warn!("ARPA model has no {UNK} entry; scoring OOV words at -99");
        LmEntry {
            log10_prob: -99.0,
            log10_backoff: 0.0,
        }
    });
    Ok(NGramModel::from_parts(order, vocab, tables))
}

fn parse_float(s: &str, line: usize) -> Result<f64, LmError> {
    let v: f64 = s
        .parse()
        .map_err(|_| malformed(line, format!("bad number {s:?}")))?;
    if v.is_nan() || v == f64::INFINITY {
        return Err(malformed(line, format!("bad number {s:?}")));
    }
    Ok(v)
}
