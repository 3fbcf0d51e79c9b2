//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ctcfuse::decoder::{
    beam_search_decode, decode_batch, greedy_decode, oracle_decode, DecoderConfig,
};
use ctcfuse::eval::{aggregate, wer};
use ctcfuse::lm::{self, ArpaOptions, LmError, NGramModel, PruneThresholds, Vocab, WordId};
use ctcfuse::manifest::ScheduleSpec;
use ctcfuse::segmenter::{slice, SliceOutcome, Utterance};
use ctcfuse::{Alphabet, EmissionMatrix, NormalizedTranscript};
use rand::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle decode equivalence", c1_oracle_equivalence),
        ("two-frame hand-checkable case", c2_two_frame),
        ("LM normalization and ARPA round trip", c3_lm_normalization),
        ("count pruning thresholds and order cap", c4_pruning),
        ("WER oracle and aggregation", c5_wer),
        ("segmentation", c6_segmentation),
        ("directional LM benefit", c7_lm_benefit),
        ("schedule labels", c8_schedule),
        ("throughput", c9_throughput),
        ("CLI determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn c1_oracle_equivalence() -> Outcome {
    let mut rng = common::rng(1);
    let letters = ['a', 'b'];
    let start = Instant::now();
    let trials = 1000;
    let mut worst_sum = 0.0f64;
    for trial in 0..trials {
        let frames = rng.gen_range(1..=6);
        let vocab = rng.gen_range(2..=4);
        let alphabet = common::alphabet_of(&letters[..vocab - 2]);
        let e =
            EmissionMatrix::<f64>::from_probs(&common::random_probs(&mut rng, frames, vocab), 0.02)
                .map_err(|e| e.to_string())?;
        let oracle = oracle_decode(&e, &alphabet).map_err(|e| e.to_string())?;
        let sum: f64 = oracle.iter().map(|o| o.posterior).sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        ensure((sum - 1.0).abs() <= 1e-9, || {
            format!("trial {trial}: posteriors sum to {sum}")
        })?;
        // every label sequence is a distinct prefix, so vocab^frames bounds the count
        let beam = vocab.pow(frames as u32);
        let r = beam_search_decode(&e, &alphabet, &DecoderConfig::exhaustive(beam))
            .map_err(|e| e.to_string())?;
        ensure(r.best().prefix == oracle[0].labels, || {
            format!(
                "trial {trial}: beam {:?} vs oracle {:?}",
                r.best().prefix,
                oracle[0].labels
            )
        })?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{trials}/{trials} argmax matches, max |sum-1| = {worst_sum:.1e}"
    ))
}

fn c2_two_frame() -> Outcome {
    // delimiter present in the inventory but never emitted
    let alphabet = Alphabet::new(vec!["<blank>".into(), "|".into(), "a".into()], 0, 1).unwrap();
    let e = EmissionMatrix::<f64>::from_probs(&[vec![0.6, 0.0, 0.4], vec![0.6, 0.0, 0.4]], 0.02)
        .unwrap();
    let cfg = DecoderConfig {
        nbest: 2,
        ..DecoderConfig::exhaustive(8)
    };
    let r = beam_search_decode(&e, &alphabet, &cfg).map_err(|e| e.to_string())?;
    let p_a = r.nbest[0].acoustic_logp().exp();
    let p_empty = r.nbest[1].acoustic_logp().exp();
    ensure(r.nbest[0].text == "a" && r.nbest[1].text.is_empty(), || {
        format!("ranking {:?}, {:?}", r.nbest[0].text, r.nbest[1].text)
    })?;
    ensure(
        (p_a - 0.64).abs() <= 1e-12 && (p_empty - 0.36).abs() <= 1e-12,
        || format!("P(a) = {p_a}, P() = {p_empty}"),
    )?;
    let oracle = oracle_decode(&e, &alphabet).map_err(|e| e.to_string())?;
    ensure(
        oracle.len() == 2
            && (oracle[0].posterior - 0.64).abs() <= 1e-12
            && (oracle[1].posterior - 0.36).abs() <= 1e-12,
        || format!("oracle {oracle:?}"),
    )?;
    Ok(format!("P(\"a\") = {p_a:.15}, P(\"\") = {p_empty:.15}"))
}

fn sample_contexts(
    rng: &mut impl Rng,
    corpus: &[NormalizedTranscript],
    m: &NGramModel,
    n: usize,
) -> Vec<Vec<WordId>> {
    let words: Vec<WordId> = m.predictable_words().collect();
    (0..n)
        .map(|i| {
            if i % 5 == 4 {
                // unseen histories exercise deep backoff
                let len = rng.gen_range(0..m.order());
                (0..len).map(|_| *words.choose(rng).unwrap()).collect()
            } else {
                let s = corpus.choose(rng).unwrap();
                let mut ids = vec![Vocab::BOS_ID];
                ids.extend(s.words().iter().map(|w| m.word_id(w)));
                let end = rng.gen_range(1..=ids.len());
                let len = rng.gen_range(0..m.order()).min(end);
                ids[end - len..end].to_vec()
            }
        })
        .collect()
}

fn c3_lm_normalization() -> Outcome {
    let mut rng = common::rng(3);
    let letters: Vec<char> = "abcdefghij".chars().collect();
    let words = common::make_words(&mut rng, &letters, 150);
    let corpus = common::markov_corpus(&mut rng, &words, 1000, 3..=12, 0.6);
    let counts = lm::count_ngrams(&corpus, 4).map_err(|e| e.to_string())?;
    let model =
        lm::estimate(&lm::prune(&counts, PruneThresholds::NONE)).map_err(|e| e.to_string())?;
    ensure(model.order() == 4, || format!("order {}", model.order()))?;

    let contexts = sample_contexts(&mut rng, &corpus, &model, 1000);
    let mut worst = 0.0f64;
    for ctx in &contexts {
        let mass = model.conditional_mass(ctx);
        worst = worst.max((mass - 1.0).abs());
    }
    ensure(worst <= 1e-6, || format!("max |sum-1| = {worst:.3e}"))?;

    let text = lm::write_arpa_string(&model);
    let back = lm::read_arpa_str(&text, ArpaOptions::default()).map_err(|e| e.to_string())?;
    let name = |m: &NGramModel, ids: &[WordId]| -> Vec<String> {
        ids.iter().map(|&i| m.vocab().word(i).to_string()).collect()
    };
    let mut entries = 0;
    let mut max_diff = 0.0f64;
    for n in 1..=4 {
        ensure(model.num_entries(n) == back.num_entries(n), || {
            format!("{n}-gram count changed")
        })?;
        for (ids, e) in model.ngrams(n) {
            let words = name(&model, ids);
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let b = back
                .entry_str(&refs)
                .ok_or_else(|| format!("{refs:?} lost in round trip"))?;
            max_diff = max_diff
                .max((e.log10_prob - b.log10_prob).abs())
                .max((e.log10_backoff - b.log10_backoff).abs());
            entries += 1;
        }
    }
    for ctx in contexts.iter().take(100) {
        let words = name(&model, ctx);
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        for w in model.predictable_words() {
            let word = model.vocab().word(w);
            max_diff = max_diff.max((model.score_ids(ctx, w) - back.score_word(word, &refs)).abs());
        }
    }
    ensure(max_diff <= 1e-10, || {
        format!("round trip drift {max_diff:.3e}")
    })?;
    Ok(format!(
        "1000 contexts, max |sum-1| = {worst:.2e}; {entries} entries round-trip, max drift {max_diff:.1e}"
    ))
}

fn c4_pruning() -> Outcome {
    let mut rng = common::rng(4);
    let letters: Vec<char> = "abcdefgh".chars().collect();
    let words = common::make_words(&mut rng, &letters, 3000);
    let corpus = common::markov_corpus(&mut rng, &words, 20_000, 3..=10, 0.7);
    let counts = lm::count_ngrams(&corpus, 4).map_err(|e| e.to_string())?;
    let model =
        lm::estimate(&lm::prune(&counts, PruneThresholds::default())).map_err(|e| e.to_string())?;

    let markers = [lm::BOS, lm::EOS, lm::UNK];
    let mut kept = [0usize; 4];
    for n in 1..=model.order() {
        for (ids, _) in model.ngrams(n) {
            let words: Vec<&str> = ids.iter().map(|&i| model.vocab().word(i)).collect();
            if n == 1 && markers.contains(&words[0]) {
                continue;
            }
            let raw = counts.raw(&words);
            let min = if n == 1 { 10 } else { 100 };
            ensure(raw >= min, || {
                format!("{words:?} survived with count {raw}")
            })?;
            kept[n - 1] += 1;
        }
    }
    let dropped_uni = counts
        .raw_entries(1)
        .iter()
        .filter(|(w, _)| model.entry_str(&[w[0].as_str()]).is_none())
        .count();
    ensure(kept.iter().all(|&k| k > 0) && dropped_uni > 0, || {
        format!("degenerate check: kept {kept:?}, dropped {dropped_uni} unigrams")
    })?;

    // order cap
    ensure(
        matches!(
            lm::count_ngrams(&corpus, 5),
            Err(LmError::OrderOutOfRange { .. })
        ),
        || "5-gram counting accepted without override".into(),
    )?;
    let five = lm::count_ngrams_with_limit(&corpus[..200], 5, 5).map_err(|e| e.to_string())?;
    let five_model =
        lm::estimate(&lm::prune(&five, PruneThresholds::NONE)).map_err(|e| e.to_string())?;
    let arpa = lm::write_arpa_string(&five_model);
    ensure(
        matches!(
            lm::read_arpa_str(&arpa, ArpaOptions::default()),
            Err(LmError::OrderTooHigh(5))
        ),
        || "5-gram ARPA loaded without override".into(),
    )?;
    ensure(
        lm::read_arpa_str(
            &arpa,
            ArpaOptions {
                allow_high_order: true,
            },
        )
        .is_ok(),
        || "5-gram ARPA rejected with override".into(),
    )?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus_path = dir.path().join("corpus.txt");
    fs::write(&corpus_path, "a b c\n").map_err(|e| e.to_string())?;
    let code = |extra: &[&str]| {
        let mut args = vec![
            "lm-train",
            "--corpus",
            corpus_path.to_str().unwrap(),
            "--order",
            "5",
        ];
        args.extend_from_slice(&["--prune-unigram", "1", "--prune-higher", "1", "--arpa-out"]);
        let out = dir.path().join("o.arpa");
        args.push(out.to_str().unwrap());
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_ctcfuse"))
            .args(&args)
            .output()
            .unwrap()
            .status
            .code()
    };
    ensure(code(&[]) == Some(1), || {
        "lm-train --order 5 did not exit 1".into()
    })?;
    ensure(code(&["--allow-high-order"]) == Some(0), || {
        "lm-train --order 5 --allow-high-order failed".into()
    })?;
    Ok(format!(
        "kept {kept:?} n-grams by order, dropped {dropped_uni} unigrams; 5-grams need the override"
    ))
}

/// Unit-cost edit distance by plain memoized recursion.
fn edit_distance(r: &[u8], h: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if r.is_empty() {
        return h.len();
    }
    if h.is_empty() {
        return r.len();
    }
    if let Some(&d) = memo.get(&(r.len(), h.len())) {
        return d;
    }
    let sub = edit_distance(&r[1..], &h[1..], memo) + usize::from(r[0] != h[0]);
    let del = edit_distance(&r[1..], h, memo) + 1;
    let ins = edit_distance(r, &h[1..], memo) + 1;
    let d = sub.min(del).min(ins);
    memo.insert((r.len(), h.len()), d);
    d
}

fn c5_wer() -> Outcome {
    let mut rng = common::rng(5);
    let vocab = ["a", "b", "c", "d", "e"];
    let pairs = 10_000;
    for i in 0..pairs {
        let r: Vec<u8> = (0..rng.gen_range(1..=8))
            .map(|_| rng.gen_range(0..5))
            .collect();
        let h: Vec<u8> = (0..rng.gen_range(0..=8))
            .map(|_| rng.gen_range(0..5))
            .collect();
        let t = |s: &[u8]| NormalizedTranscript::from_words(s.iter().map(|&k| vocab[k as usize]));
        let rep = wer(&t(&r), &t(&h)).map_err(|e| e.to_string())?;
        let expected = edit_distance(&r, &h, &mut HashMap::new());
        ensure(rep.errors() == expected, || {
            format!("pair {i}: {r:?} vs {h:?}: {} != {expected}", rep.errors())
        })?;
        ensure(
            rep.hits + rep.substitutions + rep.deletions == r.len()
                && rep.hits + rep.substitutions + rep.insertions == h.len(),
            || format!("pair {i}: inconsistent counts {rep:?}"),
        )?;
    }

    let words = |n: usize| NormalizedTranscript::from_words(std::iter::repeat_n("w", n));
    let clean = wer(&words(10), &words(10)).unwrap();
    let noisy = {
        let reference = words(90);
        let mut hyp: Vec<&str> = vec!["w"; 90];
        for slot in hyp.iter_mut().take(10) {
            *slot = "x";
        }
        wer(&reference, &NormalizedTranscript::from_words(hyp)).unwrap()
    };
    let total = aggregate(&[clean, noisy]).map_err(|e| e.to_string())?;
    ensure((total.wer() - 0.10).abs() < 1e-15, || {
        format!("aggregate {}", total.wer())
    })?;
    let mean_of_rates = (clean.wer() + noisy.wer()) / 2.0;
    ensure((mean_of_rates - total.wer()).abs() > 0.04, || {
        "example does not discriminate".into()
    })?;
    Ok(format!(
        "{pairs} pairs match; (0/10, 10/90) aggregates to {} (mean of rates would be {:.2}%)",
        total.percent(),
        100.0 * mean_of_rates
    ))
}

/// Fewest cuts over all pause subsets; None when no subset works.
fn brute_force_min_cuts(u: &Utterance, max_len: f64) -> Option<usize> {
    let n = u.pauses.len();
    (0u32..1 << n)
        .filter(|mask| {
            let mut prev = 0.0;
            for (i, &p) in u.pauses.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    if p - prev > max_len {
                        return false;
                    }
                    prev = p;
                }
            }
            u.duration - prev <= max_len
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

fn c6_segmentation() -> Outcome {
    let mut rng = common::rng(6);
    let trials = 5000;
    let (mut sliced, mut discarded) = (0, 0);
    for trial in 0..trials {
        let duration = rng.gen_range(1.0..150.0);
        let max_len = if trial % 2 == 0 {
            30.0
        } else {
            rng.gen_range(5.0..40.0)
        };
        let k = rng.gen_range(0..=12);
        let mut pauses: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..duration)).collect();
        pauses.sort_by(f64::total_cmp);
        pauses.dedup();
        pauses.retain(|&p| p > 0.0);
        let u = Utterance {
            id: format!("u{trial}"),
            duration,
            pauses,
        };
        let best = brute_force_min_cuts(&u, max_len);
        match slice(&u, max_len).map_err(|e| e.to_string())? {
            SliceOutcome::Discarded => {
                ensure(best.is_none(), || {
                    format!("{u:?}: discarded but {best:?} cuts suffice")
                })?;
                discarded += 1;
            }
            SliceOutcome::Segments(segs) => {
                sliced += 1;
                ensure(
                    segs[0].start == 0.0 && segs.last().unwrap().end == u.duration,
                    || format!("{u:?}: tiling does not cover the utterance"),
                )?;
                for w in segs.windows(2) {
                    ensure(w[0].end == w[1].start, || format!("{u:?}: gap or overlap"))?;
                    ensure(u.pauses.contains(&w[0].end), || {
                        format!("{u:?}: cut off a pause")
                    })?;
                }
                ensure(segs.iter().all(|s| s.duration() <= max_len), || {
                    format!("{u:?}: segment too long")
                })?;
                ensure(best == Some(segs.len() - 1), || {
                    format!("{u:?}: {} cuts, minimum {best:?}", segs.len() - 1)
                })?;
            }
        }
    }
    let long = Utterance {
        id: "long".into(),
        duration: 35.0,
        pauses: vec![],
    };
    ensure(
        slice(&long, 30.0).unwrap() == SliceOutcome::Discarded,
        || "35 s pause-free utterance kept".into(),
    )?;
    Ok(format!(
        "{trials} utterances ({sliced} sliced, {discarded} discarded), 35 s pause-free discarded"
    ))
}

fn c7_lm_benefit() -> Outcome {
    let mut rng = common::rng(7);
    let letters = ['a', 'b', 'd', 'e', 'o', 't'];
    let alphabet = common::alphabet_of(&letters);
    let words = common::make_words(&mut rng, &letters, 10);
    let train = common::markov_corpus(&mut rng, &words, 2000, 3..=8, 0.85);
    let test = common::markov_corpus(&mut rng, &words, 200, 3..=8, 0.85);
    let counts = lm::count_ngrams(&train, 3).map_err(|e| e.to_string())?;
    let model =
        lm::estimate(&lm::prune(&counts, PruneThresholds::NONE)).map_err(|e| e.to_string())?;

    let emissions: Vec<EmissionMatrix> = test
        .iter()
        .map(|t| common::noisy_emissions(&mut rng, &alphabet, &t.to_string(), 1.0, 4.0))
        .collect();
    let cfg = DecoderConfig {
        beam_width: 32,
        ..DecoderConfig::default()
    }
    .with_lm(&model);
    let fused = decode_batch(&emissions, &alphabet, &cfg).map_err(|e| e.to_string())?;
    let mut greedy_reports = Vec::new();
    let mut fused_reports = Vec::new();
    for ((t, e), f) in test.iter().zip(&emissions).zip(&fused) {
        greedy_reports.push(wer(t, &greedy_decode(e, &alphabet)).unwrap());
        fused_reports.push(wer(t, &f.transcript).unwrap());
    }
    let g = aggregate(&greedy_reports).unwrap();
    let f = aggregate(&fused_reports).unwrap();
    ensure(f.wer() <= g.wer(), || {
        format!("LM {} > greedy {}", f.percent(), g.percent())
    })?;
    Ok(format!(
        "{} utterances: greedy {} -> beam+LM {}",
        test.len(),
        g.percent(),
        f.percent()
    ))
}

fn c8_schedule() -> Outcome {
    let expected = [
        ((5, 1, 1), 5, "5 epochs (default)"),
        ((5, 1, 2), 10, "10 epochs (2xUP)"),
        ((5, 2, 1), 10, "10 epochs (2xBS)"),
        ((5, 2, 2), 20, "20 epochs (2xBS, 2xUP)"),
        ((5, 4, 1), 20, "20 epochs (4xBS)"),
        ((5, 4, 2), 40, "40 epochs (4xBS, 2xUP)"),
    ];
    for ((e, b, u), epochs, label) in expected {
        let s = ScheduleSpec::new(e, b, u).map_err(|e| e.to_string())?;
        ensure(ctcfuse::manifest::effective_epochs(&s) == epochs, || {
            format!("({e},{b},{u})")
        })?;
        ensure(s.label() == label, || {
            format!("({e},{b},{u}) -> {:?}", s.label())
        })?;
    }
    Ok("6/6 labels exact".into())
}

/// 1000-frame utterance over a 40-token alphabet: 333 labels, 3 frames each.
fn throughput_fixture(rng: &mut impl Rng, words: &[String], alphabet: &Alphabet) -> EmissionMatrix {
    let mut text = String::new();
    while text.chars().count() < 333 {
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(words.choose(rng).unwrap());
    }
    let text: String = text.chars().take(333).collect();
    let text = text.trim_end().to_string() + if text.ends_with(' ') { "a" } else { "" };
    common::noisy_emissions(rng, alphabet, &text, 1.0, 5.0)
}

fn c9_throughput() -> Outcome {
    let mut rng = common::rng(9);
    let letters: Vec<char> = "abcdefghijklmnopqrstuvwxyz0123456789'-".chars().collect();
    let alphabet = common::alphabet_of(&letters);
    ensure(alphabet.len() == 40, || format!("V = {}", alphabet.len()))?;
    let words = common::make_words(&mut rng, &letters[..26], 2000);
    let corpus = common::markov_corpus(&mut rng, &words, 20_000, 4..=15, 0.5);
    let counts = lm::count_ngrams(&corpus, 4).map_err(|e| e.to_string())?;
    let model =
        lm::estimate(&lm::prune(&counts, PruneThresholds::new(2, 2))).map_err(|e| e.to_string())?;
    let cfg = DecoderConfig {
        beam_width: 100,
        ..DecoderConfig::default()
    }
    .with_lm(&model);

    let batch: Vec<EmissionMatrix> = (0..16)
        .map(|_| throughput_fixture(&mut rng, &words, &alphabet))
        .collect();
    ensure(batch[0].frames() == 1000, || {
        format!("T = {}", batch[0].frames())
    })?;
    // warm-up, then the slowest of three single-utterance runs
    beam_search_decode(&batch[0], &alphabet, &cfg).map_err(|e| e.to_string())?;
    let mut single = Duration::ZERO;
    for e in &batch[..3] {
        let t = Instant::now();
        beam_search_decode(e, &alphabet, &cfg).map_err(|e| e.to_string())?;
        single = single.max(t.elapsed());
    }
    ensure(single < Duration::from_secs(1), || {
        format!("one utterance took {single:?}")
    })?;

    let timed = |jobs: usize| -> Result<Duration, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| e.to_string())?;
        let t = Instant::now();
        pool.install(|| decode_batch(&batch, &alphabet, &cfg))
            .map_err(|e| e.to_string())?;
        Ok(t.elapsed())
    };
    let one = timed(1)?;
    let eight = timed(8)?;
    let speedup = one.as_secs_f64() / eight.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    ensure(speedup >= 4.0, || {
        format!(
            "single utterance {:.0} ms ok; 8-job speedup {speedup:.2}x < 4x with {cores} core(s) available",
            single.as_secs_f64() * 1e3
        )
    })?;
    Ok(format!(
        "single utterance {:.0} ms; 8 jobs {speedup:.2}x on {cores} cores",
        single.as_secs_f64() * 1e3
    ))
}

struct CliRun {
    stdout: Vec<u8>,
    files: Vec<Vec<u8>>,
}

fn run_cli(args: &[&str], outputs: &[&Path]) -> Result<CliRun, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ctcfuse"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let files = outputs
        .iter()
        .map(|p| fs::read(p).map_err(|e| format!("{}: {e}", p.display())))
        .collect::<Result<_, _>>()?;
    Ok(CliRun {
        stdout: out.stdout,
        files,
    })
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let p = |name: &str| d.join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let mut rng = common::rng(10);

    fs::write(
        p("raw.txt"),
        "Hello, World! [noise] it's A test.\nSecond   line -- with \"quotes\" [laughter]\n\nÚŽASNÝ den; 3 psi\n",
    )
    .unwrap();
    let mut manifest = String::new();
    for i in 0..40 {
        let duration: f64 = rng.gen_range(5.0..90.0);
        let mut pauses: Vec<f64> = (0..rng.gen_range(0..6))
            .map(|_| rng.gen_range(0.5..duration))
            .collect();
        pauses.sort_by(f64::total_cmp);
        pauses.dedup();
        manifest += &serde_json::json!({"id": format!("utt{i:02}"), "duration": duration, "pauses": pauses}).to_string();
        manifest.push('\n');
    }
    fs::write(p("utts.jsonl"), manifest).unwrap();

    let letters = ['a', 'b', 'd', 'e', 'o', 't'];
    let alphabet = common::alphabet_of(&letters);
    alphabet.save(p("alphabet.json")).unwrap();
    let words = common::make_words(&mut rng, &letters, 12);
    let corpus = common::markov_corpus(&mut rng, &words, 400, 2..=8, 0.8);
    fs::write(
        p("corpus.txt"),
        corpus
            .iter()
            .map(|t| t.to_string() + "\n")
            .collect::<String>(),
    )
    .unwrap();
    fs::create_dir(p("emissions")).unwrap();
    let mut refs = String::new();
    for (i, t) in corpus.iter().take(12).enumerate() {
        let e = common::noisy_emissions(&mut rng, &alphabet, &t.to_string(), 1.5, 3.0);
        ctcfuse::save_emissions(&e, p("emissions").join(format!("u{i:02}.emit"))).unwrap();
        refs += &serde_json::json!({"id": format!("u{i:02}"), "text": t.to_string()}).to_string();
        refs.push('\n');
    }
    fs::write(p("refs.jsonl"), refs).unwrap();

    let mut checked = Vec::new();
    let mut twice = |label: &str,
                     args: Vec<String>,
                     outputs: Vec<std::path::PathBuf>|
     -> Result<CliRun, String> {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let outs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
        let a = run_cli(&args, &outs)?;
        let b = run_cli(&args, &outs)?;
        ensure(a.stdout == b.stdout && a.files == b.files, || {
            format!("{label} output differs between runs")
        })?;
        checked.push(label.to_string());
        Ok(a)
    };

    twice(
        "normalize",
        vec![
            "normalize".into(),
            "--input".into(),
            s(&p("raw.txt")),
            "--output".into(),
            s(&p("norm.txt")),
        ],
        vec![p("norm.txt")],
    )?;
    twice(
        "segment",
        vec![
            "segment".into(),
            "--manifest".into(),
            s(&p("utts.jsonl")),
            "--output".into(),
            s(&p("segs.jsonl")),
            "--discards".into(),
            s(&p("discards.json")),
        ],
        vec![p("segs.jsonl"), p("discards.json")],
    )?;
    twice(
        "lm-train",
        vec![
            "lm-train".into(),
            "--corpus".into(),
            s(&p("corpus.txt")),
            "--order".into(),
            "3".into(),
            "--prune-unigram".into(),
            "2".into(),
            "--prune-higher".into(),
            "2".into(),
            "--arpa-out".into(),
            s(&p("lm.arpa")),
        ],
        vec![p("lm.arpa")],
    )?;
    let decode_args = |jobs: &str, out: &str| -> Vec<String> {
        vec![
            "decode".into(),
            "--emissions-dir".into(),
            s(&p("emissions")),
            "--alphabet".into(),
            s(&p("alphabet.json")),
            "--arpa".into(),
            s(&p("lm.arpa")),
            "--beam-width".into(),
            "16".into(),
            "--nbest".into(),
            "3".into(),
            "--jobs".into(),
            jobs.into(),
            "--output".into(),
            s(&p(out)),
        ]
    };
    let serial = twice(
        "decode --jobs 1",
        decode_args("1", "hyp1.jsonl"),
        vec![p("hyp1.jsonl")],
    )?;
    let parallel = twice(
        "decode --jobs 4",
        decode_args("4", "hyp4.jsonl"),
        vec![p("hyp4.jsonl")],
    )?;
    ensure(serial.files == parallel.files, || {
        "decode output depends on --jobs".into()
    })?;
    let mut greedy = decode_args("2", "greedy.jsonl");
    greedy.push("--greedy".into());
    twice("decode --greedy", greedy, vec![p("greedy.jsonl")])?;
    twice(
        "eval",
        vec![
            "eval".into(),
            "--ref".into(),
            format!("{},{}", s(&p("refs.jsonl")), s(&p("refs.jsonl"))),
            "--hyp".into(),
            format!("{},{}", s(&p("hyp1.jsonl")), s(&p("greedy.jsonl"))),
            "--report".into(),
            s(&p("report.json")),
        ],
        vec![p("report.json")],
    )?;

    let segs = fs::read_to_string(p("segs.jsonl")).unwrap();
    let mut transcripts = String::new();
    for line in segs.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let words: Vec<&str> = (0..rng.gen_range(1..20))
            .map(|_| words.choose(&mut rng).unwrap().as_str())
            .collect();
        transcripts += &serde_json::json!({"id": v["id"], "text": words.join(" ")}).to_string();
        transcripts.push('\n');
    }
    fs::write(p("transcripts.jsonl"), transcripts).unwrap();
    let stats = vec![
        "stats".into(),
        "--manifest".into(),
        s(&p("segs.jsonl")),
        "--transcripts".into(),
        s(&p("transcripts.jsonl")),
    ];
    twice("stats", stats.clone(), vec![])?;
    let mut stats_json = stats;
    stats_json.push("--json".into());
    twice("stats --json", stats_json, vec![])?;
    Ok(format!(
        "{} invocations byte-identical across runs: {}",
        checked.len(),
        checked.join(", ")
    ))
}
