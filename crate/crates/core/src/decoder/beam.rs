//! CTC prefix beam search.
//!
//! Prefixes live in an append-only trie whose nodes are unique per
//! `(parent, token)`, so a node id identifies a label sequence and merging
//! hypotheses is a key lookup. Each hypothesis keeps separate log masses for
//! alignments ending in blank and in a non-blank token. The LM is consulted
//! only when a word is closed by a delimiter, or at the end of the input.

use std::cell::OnceCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;

use crate::alphabet::Alphabet;
use crate::emissions::{EmissionMatrix, Sample};
use crate::lm::{NGramModel, WordId};

use super::{
    check_dims, logaddexp, to_transcript, BeamHypothesis, DecodeError, DecodeResult, DecoderConfig,
};

const NONE: u32 = u32::MAX;
const ROOT: u32 = 0;

type Key = (u32, u32);

/// Effect of ending the current partial word.
#[derive(Debug, Clone)]
struct Closing {
    completes: bool,
    lm_delta: f64,
    context: Rc<[WordId]>,
}

#[derive(Debug)]
struct Node {
    parent: u32,
    token: u32,
    /// Tokens since the last delimiter.
    partial_len: u32,
    lm_context: Rc<[WordId]>,
    lm_log10: f64,
    words: u32,
    closing: OnceCell<Closing>,
}

#[derive(Debug, Clone, Copy)]
struct Beam {
    node: u32,
    pb: f64,
    pnb: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    key: Key,
    node: u32,
    pb: f64,
    pnb: f64,
    lm_log10: f64,
    words: u32,
    score: f64,
}

struct Search<'a> {
    alphabet: &'a Alphabet,
    lm: Option<&'a NGramModel>,
    alpha: f64,
    beta: f64,
    nodes: Vec<Node>,
    children: HashMap<Key, u32>,
}

impl<'a> Search<'a> {
    fn new(alphabet: &'a Alphabet, cfg: &DecoderConfig<'a>) -> Self {
        let context: Rc<[WordId]> = match cfg.lm {
            Some(lm) => lm.begin_context().into(),
            None => Rc::from(Vec::new()),
        };
        let root = Node {
            parent: NONE,
            token: NONE,
            partial_len: 0,
            lm_context: context,
            lm_log10: 0.0,
            words: 0,
            closing: OnceCell::new(),
        };
        Self {
            alphabet,
            lm: cfg.lm,
            alpha: cfg.alpha,
            beta: cfg.beta,
            nodes: vec![root],
            children: HashMap::new(),
        }
    }

    fn bonus(&self, lm_log10: f64, words: u32) -> f64 {
        match self.lm {
            Some(_) => self.alpha * std::f64::consts::LN_10 * lm_log10 + self.beta * words as f64,
            None => 0.0,
        }
    }

    fn key_of(&self, node: u32) -> Key {
        let n = &self.nodes[node as usize];
        (n.parent, n.token)
    }

    fn labels(&self, mut node: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while node != ROOT {
            let n = &self.nodes[node as usize];
            out.push(n.token as usize);
            node = n.parent;
        }
        out.reverse();
        out
    }

    fn candidate_labels(&self, c: &Candidate) -> Vec<usize> {
        if c.node != NONE {
            self.labels(c.node)
        } else {
            let mut l = self.labels(c.key.0);
            l.push(c.key.1 as usize);
            l
        }
    }

    fn closing(&self, node: u32) -> &Closing {
        let n = &self.nodes[node as usize];
        n.closing.get_or_init(|| {
            if n.partial_len == 0 {
                return Closing {
                    completes: false,
                    lm_delta: 0.0,
                    context: n.lm_context.clone(),
                };
            }
            let Some(lm) = self.lm else {
                return Closing {
                    completes: true,
                    lm_delta: 0.0,
                    context: n.lm_context.clone(),
                };
            };
            let mut tokens = Vec::with_capacity(n.partial_len as usize);
            let mut cur = node;
            for _ in 0..n.partial_len {
                let c = &self.nodes[cur as usize];
                tokens.push(c.token as usize);
                cur = c.parent;
            }
            tokens.reverse();
            let word = self.alphabet.render(&tokens);
            let id = lm.word_id(&word);
            Closing {
                completes: true,
                lm_delta: lm.score_ids(&n.lm_context, id),
                context: lm.advance_context(&n.lm_context, id).into(),
            }
        })
    }

    /// LM totals of the prefix `parent + token`.
    fn extended_lm(&self, parent: u32, token: u32) -> (f64, u32) {
        let p = &self.nodes[parent as usize];
        if token as usize == self.alphabet.delimiter() {
            let c = self.closing(parent);
            if c.completes {
                return (p.lm_log10 + c.lm_delta, p.words + 1);
            }
        }
        (p.lm_log10, p.words)
    }

    fn materialize(&mut self, parent: u32, token: u32) -> u32 {
        if let Some(&id) = self.children.get(&(parent, token)) {
            return id;
        }
        let p = &self.nodes[parent as usize];
        let node = if token as usize == self.alphabet.delimiter() {
            let c = self.closing(parent).clone();
            let p = &self.nodes[parent as usize];
            let (lm_log10, words) = if c.completes {
                (p.lm_log10 + c.lm_delta, p.words + 1)
            } else {
                (p.lm_log10, p.words)
            };
            Node {
                parent,
                token,
                partial_len: 0,
                lm_context: c.context,
                lm_log10,
                words,
                closing: OnceCell::new(),
            }
        } else {
            Node {
                parent,
                token,
                partial_len: p.partial_len + 1,
                lm_context: p.lm_context.clone(),
                lm_log10: p.lm_log10,
                words: p.words,
                closing: OnceCell::new(),
            }
        };
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.children.insert((parent, token), id);
        id
    }

    /// Score descending, then label sequence ascending.
    fn rank(&self, a: &Candidate, b: &Candidate) -> Ordering {
        b.score.total_cmp(&a.score).then_with(|| {
            if a.key == b.key {
                Ordering::Equal
            } else {
                self.candidate_labels(a).cmp(&self.candidate_labels(b))
            }
        })
    }
}

struct Frontier {
    index: HashMap<Key, usize>,
    cands: Vec<Candidate>,
}

impl Frontier {
    fn with_capacity(n: usize) -> Self {
        Self {
            index: HashMap::with_capacity(n),
            cands: Vec::with_capacity(n),
        }
    }

    fn clear(&mut self) {
        self.index.clear();
        self.cands.clear();
    }

    /// Adds `mass` to the blank or non-blank side of the candidate `key`.
    fn add(&mut self, search: &Search<'_>, key: Key, known_node: u32, blank: bool, mass: f64) {
        let idx = match self.index.get(&key) {
            Some(&i) => i,
            None => {
                let node = if known_node != NONE {
                    known_node
                } else {
                    search.children.get(&key).copied().unwrap_or(NONE)
                };
                let (lm_log10, words) = if node != NONE {
                    let n = &search.nodes[node as usize];
                    (n.lm_log10, n.words)
                } else {
                    search.extended_lm(key.0, key.1)
                };
                self.cands.push(Candidate {
                    key,
                    node,
                    pb: f64::NEG_INFINITY,
                    pnb: f64::NEG_INFINITY,
                    lm_log10,
                    words,
                    score: 0.0,
                });
                self.index.insert(key, self.cands.len() - 1);
                self.cands.len() - 1
            }
        };
        let c = &mut self.cands[idx];
        if blank {
            c.pb = logaddexp(c.pb, mass);
        } else {
            c.pnb = logaddexp(c.pnb, mass);
        }
    }
}

/// LM-fused CTC prefix beam search.
///
/// Keeps the `beam_width` best prefixes per frame by fused score, breaking
/// exact ties by label sequence. Without an LM the fused score is the
/// acoustic log probability alone and `alpha`/`beta` have no effect.
pub fn beam_search_decode<S: Sample>(
    e: &EmissionMatrix<S>,
    alphabet: &Alphabet,
    cfg: &DecoderConfig<'_>,
) -> Result<DecodeResult, DecodeError> {
    check_dims(e, alphabet)?;
    cfg.validate()?;
    let blank = alphabet.blank() as u32;
    let mut search = Search::new(alphabet, cfg);
    let mut beams = vec![Beam {
        node: ROOT,
        pb: 0.0,
        pnb: f64::NEG_INFINITY,
    }];
    let mut frontier = Frontier::with_capacity(cfg.beam_width.saturating_mul(4).min(1 << 16));
    let mut allowed: Vec<(u32, f64)> = Vec::with_capacity(e.vocab());

    for t in 0..e.frames() {
        allowed.clear();
        allowed.extend(
            (0..e.vocab())
                .map(|k| (k as u32, e.logp(t, k)))
                .filter(|&(_, lp)| lp >= cfg.token_min_logp && lp > f64::NEG_INFINITY),
        );
        if allowed.is_empty() {
            return Err(DecodeError::EmptyBeam { frame: t });
        }
        frontier.clear();
        for b in &beams {
            let total = logaddexp(b.pb, b.pnb);
            let own_key = search.key_of(b.node);
            let last = search.nodes[b.node as usize].token;
            for &(k, lp) in &allowed {
                if k == blank {
                    frontier.add(&search, own_key, b.node, true, total + lp);
                } else if k == last {
                    frontier.add(&search, own_key, b.node, false, b.pnb + lp);
                    frontier.add(&search, (b.node, k), NONE, false, b.pb + lp);
                } else {
                    frontier.add(&search, (b.node, k), NONE, false, total + lp);
                }
            }
        }

        for c in frontier.cands.iter_mut() {
            c.score = logaddexp(c.pb, c.pnb) + search.bonus(c.lm_log10, c.words);
        }
        let cands = &mut frontier.cands;
        // zero-probability prefixes can only arise from -inf masses; drop them
        cands.retain(|c| c.pb > f64::NEG_INFINITY || c.pnb > f64::NEG_INFINITY);
        if cands.is_empty() {
            return Err(DecodeError::EmptyBeam { frame: t });
        }
        if cands.len() > cfg.beam_width {
            cands.select_nth_unstable_by(cfg.beam_width - 1, |a, b| search.rank(a, b));
            cands.truncate(cfg.beam_width);
        }
        cands.sort_by(|a, b| search.rank(a, b));

        beams.clear();
        for c in frontier.cands.iter() {
            let node = if c.node != NONE {
                c.node
            } else {
                search.materialize(c.key.0, c.key.1)
            };
            beams.push(Beam {
                node,
                pb: c.pb,
                pnb: c.pnb,
            });
        }
    }

    finish(&search, &beams, cfg)
}

fn finish(
    search: &Search<'_>,
    beams: &[Beam],
    cfg: &DecoderConfig<'_>,
) -> Result<DecodeResult, DecodeError> {
    let mut ranked: Vec<(BeamHypothesis, u32)> = beams
        .iter()
        .map(|b| {
            let n = &search.nodes[b.node as usize];
            let c = search.closing(b.node);
            let (lm_log10, words, state) = if c.completes {
                (n.lm_log10 + c.lm_delta, n.words + 1, c.context.clone())
            } else {
                (n.lm_log10, n.words, n.lm_context.clone())
            };
            let prefix = search.labels(b.node);
            let hyp = BeamHypothesis {
                text: search.alphabet.render(&prefix),
                prefix,
                logp_blank: b.pb,
                logp_nonblank: b.pnb,
                lm_state: state.to_vec(),
                lm_log10,
                completed_words: words as usize,
                fused_score: logaddexp(b.pb, b.pnb) + search.bonus(lm_log10, words),
            };
            (hyp, b.node)
        })
        .collect();
    ranked.sort_by(|(a, _), (b, _)| {
        b.fused_score
            .total_cmp(&a.fused_score)
            .then_with(|| a.prefix.cmp(&b.prefix))
    });
    ranked.truncate(cfg.nbest.max(1));
    let nbest: Vec<BeamHypothesis> = ranked.into_iter().map(|(h, _)| h).collect();
    let best = &nbest[0];
    Ok(DecodeResult {
        transcript: to_transcript(&best.text),
        score: best.fused_score,
        nbest,
    })
}
