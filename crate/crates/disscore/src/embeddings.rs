//! Connective-aware bilingual embeddings: corpus hyphenation, joint
//! skip-gram training with negative sampling over monolingual and
//! crosslingual windows, plain-text model serialization, translation
//! likelihood queries, and the ordered back-off chain.
//!
//! Crosslingual context uses the diagonal alignment assumption: source
//! position i aligns to target position round(i * |T| / |S|), with the
//! context window applied around the aligned position.

use std::cell::UnsafeCell;
use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::scan;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::textmodel::{Language, Sentence, Token};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dimension: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub subsample: f64,
    pub lr_start: f64,
    pub lr_end: f64,
    pub min_count: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dimension: 100,
            window: 5,
            negative: 5,
            epochs: 5,
            subsample: 1e-4,
            lr_start: 0.025,
            lr_end: 0.0001,
            min_count: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub hyphenated: bool,
    pub corpus_id: String,
    pub hyperparams: Hyperparams,
}

impl Default for ModelMetadata {
    fn default() -> Self {
        ModelMetadata {
            hyphenated: false,
            corpus_id: String::new(),
            hyperparams: Hyperparams::default(),
        }
    }
}

/// A joint vector space over "fr:"/"en:"-prefixed tokens.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    pub dimension: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    /// Row-major, tokens.len() x dimension.
    vectors: Vec<f32>,
    pub metadata: ModelMetadata,
}

impl EmbeddingModel {
    pub fn from_vectors(
        dimension: usize,
        entries: Vec<(String, Vec<f32>)>,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let mut tokens = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut vectors = Vec::with_capacity(entries.len() * dimension);
        for (token, vector) in entries {
            if vector.len() != dimension {
                return Err(Error::Format(format!(
                    "token {token}: vector length {} != dimension {dimension}",
                    vector.len()
                )));
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("token {token}: non-finite component")));
            }
            if index.insert(token.clone(), tokens.len()).is_some() {
                return Err(Error::Format(format!("duplicate token: {token}")));
            }
            tokens.push(token);
            vectors.extend_from_slice(&vector);
        }
        Ok(EmbeddingModel {
            dimension,
            tokens,
            index,
            vectors,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Plain-text vector format: header "<vocab_size> <dimension>", then one
    /// line per token with 6-decimal components. Metadata goes to a sidecar
    /// "<path>.meta.json".
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.tokens.len(), self.dimension));
        for (i, token) in self.tokens.iter().enumerate() {
            out.push_str(token);
            for v in &self.vectors[i * self.dimension..(i + 1) * self.dimension] {
                out.push_str(&format!(" {v:.6}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))?;
        let meta = serde_json::to_string_pretty(&self.metadata)
            .map_err(|e| Error::Format(e.to_string()))?;
        let meta_path = sidecar_path(path);
        fs::write(&meta_path, meta).map_err(|e| Error::io(meta_path, e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty model file".to_string()))?;
        let mut parts = header.split_whitespace();
        let vocab_size: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header: {header}")))?;
        let dimension: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("bad header: {header}")))?;
        let mut entries = Vec::with_capacity(vocab_size);
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields
                .next()
                .ok_or_else(|| Error::Format("empty vector line".to_string()))?;
            let vector: Vec<f32> = fields
                .map(|f| {
                    f.parse::<f32>()
                        .map_err(|_| Error::Format(format!("bad component {f} for {token}")))
                })
                .collect::<Result<_>>()?;
            if vector.len() != dimension {
                return Err(Error::Format(format!(
                    "token {token}: {} components, header says {dimension}",
                    vector.len()
                )));
            }
            entries.push((token.to_string(), vector));
        }
        if entries.len() != vocab_size {
            return Err(Error::Format(format!(
                "header says {vocab_size} tokens, file has {}",
                entries.len()
            )));
        }
        let metadata = {
            let meta_path = sidecar_path(path);
            match fs::read_to_string(&meta_path) {
                Ok(s) => serde_json::from_str(&s).map_err(|e| Error::Format(e.to_string()))?,
                Err(_) => ModelMetadata::default(),
            }
        };
        EmbeddingModel::from_vectors(dimension, entries, metadata)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    std::path::PathBuf::from(s)
}

pub fn prefixed(language: Language, token: &str) -> String {
    format!("{language}:{token}")
}

/// Replaces every detected connective occurrence with a single
/// underscore-joined token; single-word connectives are unchanged (their
/// joined form equals the token). POS is dropped on joined tokens.
/// Idempotent: joined tokens no longer match multiword surfaces.
pub fn hyphenate_sentence(sentence: &Sentence, lexicon: &Lexicon) -> Sentence {
    let spans = scan(sentence, lexicon);
    let mut tokens: Vec<Token> = Vec::with_capacity(sentence.len());
    let mut span_iter = spans.iter().peekable();
    let mut i = 0;
    while i < sentence.len() {
        match span_iter.peek() {
            Some(span) if span.start == i => {
                let joined = lexicon.get(span.entry).joined();
                let pos = if span.end - span.start == 1 {
                    sentence.tokens[i].pos.clone()
                } else {
                    None
                };
                tokens.push(Token::new(joined, pos, tokens.len()));
                i = span.end;
                span_iter.next();
            }
            _ => {
                let t = &sentence.tokens[i];
                tokens.push(Token::new(t.surface.clone(), t.pos.clone(), tokens.len()));
                i += 1;
            }
        }
    }
    Sentence::new(tokens, sentence.language)
}

/// Hyphenates both sides of a parallel corpus.
pub fn hyphenate_corpus(
    pairs: &[(Sentence, Sentence)],
    fr_lexicon: &Lexicon,
    en_lexicon: &Lexicon,
) -> Vec<(Sentence, Sentence)> {
    pairs
        .iter()
        .map(|(fr, en)| {
            (
                hyphenate_sentence(fr, fr_lexicon),
                hyphenate_sentence(en, en_lexicon),
            )
        })
        .collect()
}

struct Vocab {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    counts: Vec<u64>,
    total: u64,
}

fn build_vocab(pairs: &[(Sentence, Sentence)], min_count: usize) -> Vocab {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for (fr, en) in pairs {
        for t in &fr.tokens {
            *counts.entry(prefixed(Language::Fr, &t.lower)).or_default() += 1;
        }
        for t in &en.tokens {
            *counts.entry(prefixed(Language::En, &t.lower)).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count as u64)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut index = HashMap::with_capacity(kept.len());
    let mut tokens = Vec::with_capacity(kept.len());
    let mut count_vec = Vec::with_capacity(kept.len());
    let mut total = 0;
    for (token, count) in kept {
        index.insert(token.clone(), tokens.len());
        tokens.push(token);
        count_vec.push(count);
        total += count;
    }
    Vocab {
        index,
        tokens,
        counts: count_vec,
        total,
    }
}

/// Cumulative unigram^0.75 distribution for negative sampling.
fn negative_table(counts: &[u64]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(counts.len());
    let mut acc = 0.0;
    for &c in counts {
        acc += (c as f64).powf(0.75);
        cum.push(acc);
    }
    cum
}

fn sample_negative(cum: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cum.last().unwrap();
    let x = rng.gen_range(0.0..total);
    cum.partition_point(|&c| c <= x).min(cum.len() - 1)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Shared parameter matrix for lock-free concurrent updates (last-write-wins
/// under multi-threaded training; single-threaded training is deterministic).
struct SharedMatrix {
    data: UnsafeCell<Vec<f32>>,
}

unsafe impl Sync for SharedMatrix {}

impl SharedMatrix {
    fn new(data: Vec<f32>) -> Self {
        SharedMatrix {
            data: UnsafeCell::new(data),
        }
    }

    #[allow(clippy::mut_from_ref)]
    unsafe fn slice_mut(&self, start: usize, len: usize) -> &mut [f32] {
        let vec = &mut *self.data.get();
        &mut vec[start..start + len]
    }

    fn into_inner(self) -> Vec<f32> {
        self.data.into_inner()
    }
}

pub struct TrainingRun {
    pub model: EmbeddingModel,
    /// Average negative-sampling objective per epoch.
    pub epoch_losses: Vec<f64>,
}

struct TrainContext<'a> {
    vocab: &'a Vocab,
    cum: &'a [f64],
    input: &'a SharedMatrix,
    output: &'a SharedMatrix,
    hp: &'a Hyperparams,
    dim: usize,
}

/// One SGNS update for a (center, context) pair. Returns the pair loss.
fn sgns_update(ctx: &TrainContext, center: usize, context: usize, lr: f64, rng: &mut impl Rng) -> f64 {
    let dim = ctx.dim;
    let mut loss = 0.0;
    // Safety: rows may be concurrently updated by other threads; torn reads
    // are tolerated by the training contract.
    let center_row = unsafe { ctx.input.slice_mut(center * dim, dim) };
    let mut center_grad = vec![0.0f32; dim];
    for k in 0..=ctx.hp.negative {
        let (target, label) = if k == 0 {
            (context, 1.0)
        } else {
            let neg = sample_negative(ctx.cum, rng);
            if neg == context {
                continue;
            }
            (neg, 0.0)
        };
        let out_row = unsafe { ctx.output.slice_mut(target * dim, dim) };
        let dot: f64 = center_row
            .iter()
            .zip(out_row.iter())
            .map(|(a, b)| (*a as f64) * (*b as f64))
            .sum();
        let pred = sigmoid(dot);
        loss -= if label > 0.5 {
            pred.max(1e-10).ln()
        } else {
            (1.0 - pred).max(1e-10).ln()
        };
        let g = ((label - pred) * lr) as f32;
        for d in 0..dim {
            center_grad[d] += g * out_row[d];
            out_row[d] += g * center_row[d];
        }
    }
    for d in 0..dim {
        center_row[d] += center_grad[d];
    }
    loss
}

fn keep_token(count: u64, total: u64, subsample: f64, rng: &mut impl Rng) -> bool {
    if subsample <= 0.0 {
        return true;
    }
    let freq = count as f64 / total as f64;
    let keep = (subsample / freq).sqrt() + subsample / freq;
    keep >= 1.0 || rng.gen::<f64>() < keep
}

fn sentence_ids(
    sentence: &Sentence,
    language: Language,
    ctx: &TrainContext,
    rng: &mut impl Rng,
) -> Vec<usize> {
    sentence
        .tokens
        .iter()
        .filter_map(|t| ctx.vocab.index.get(&prefixed(language, &t.lower)).copied())
        .filter(|&id| keep_token(ctx.vocab.counts[id], ctx.vocab.total, ctx.hp.subsample, rng))
        .collect()
}

/// Processes one sentence pair: monolingual skip-gram windows on each side
/// plus crosslingual windows under the diagonal alignment. Returns
/// (loss, pair count).
fn train_pair(
    ctx: &TrainContext,
    fr: &Sentence,
    en: &Sentence,
    lr: f64,
    rng: &mut impl Rng,
) -> (f64, u64) {
    let fr_ids = sentence_ids(fr, Language::Fr, ctx, rng);
    let en_ids = sentence_ids(en, Language::En, ctx, rng);
    let mut loss = 0.0;
    let mut pairs = 0;

    for ids in [&fr_ids, &en_ids] {
        for (i, &center) in ids.iter().enumerate() {
            let b = rng.gen_range(1..=ctx.hp.window);
            let lo = i.saturating_sub(b);
            let hi = (i + b + 1).min(ids.len());
            for (j, &context) in ids.iter().enumerate().take(hi).skip(lo) {
                if i == j {
                    continue;
                }
                loss += sgns_update(ctx, center, context, lr, rng);
                pairs += 1;
            }
        }
    }

    if !fr_ids.is_empty() && !en_ids.is_empty() {
        for (pos, src, tgt) in [(true, &fr_ids, &en_ids), (false, &en_ids, &fr_ids)] {
            let _ = pos;
            for (i, &center) in src.iter().enumerate() {
                let aligned = ((i as f64) * (tgt.len() as f64) / (src.len() as f64)).round() as usize;
                let aligned = aligned.min(tgt.len() - 1);
                let b = rng.gen_range(1..=ctx.hp.window);
                let lo = aligned.saturating_sub(b);
                let hi = (aligned + b + 1).min(tgt.len());
                for &context in &tgt[lo..hi] {
                    loss += sgns_update(ctx, center, context, lr, rng);
                    pairs += 1;
                }
            }
        }
    }
    (loss, pairs)
}

/// Trains a joint bilingual model. Deterministic given a seed when
/// `threads == 1`; multi-threaded runs use unsynchronized concurrent updates.
pub fn train(
    pairs: &[(Sentence, Sentence)],
    hp: &Hyperparams,
    metadata: ModelMetadata,
    seed: u64,
    threads: usize,
) -> Result<TrainingRun> {
    if pairs.is_empty() {
        return Err(Error::Training("empty corpus".to_string()));
    }
    if hp.dimension == 0 {
        return Err(Error::Training("dimension must be positive".to_string()));
    }
    let vocab = build_vocab(pairs, hp.min_count);
    if vocab.tokens.is_empty() {
        return Err(Error::Training(
            "no token meets min_count; corpus too small".to_string(),
        ));
    }
    let dim = hp.dimension;
    let cum = negative_table(&vocab.counts);

    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 0.5 / dim as f32;
    let input: Vec<f32> = (0..vocab.tokens.len() * dim)
        .map(|_| init_rng.gen_range(-bound..bound))
        .collect();
    let output = vec![0.0f32; vocab.tokens.len() * dim];
    let input = Arc::new(SharedMatrix::new(input));
    let output = Arc::new(SharedMatrix::new(output));

    let threads = threads.max(1);
    let total_epochs = hp.epochs.max(1);
    let mut epoch_losses = Vec::with_capacity(total_epochs);

    for epoch in 0..total_epochs {
        let progress_base = epoch as f64 / total_epochs as f64;
        let (loss_sum, pair_count) = if threads == 1 {
            let ctx = TrainContext {
                vocab: &vocab,
                cum: &cum,
                input: &input,
                output: &output,
                hp,
                dim,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e3779b9 + epoch as u64));
            let mut loss = 0.0;
            let mut count = 0;
            for (i, (fr, en)) in pairs.iter().enumerate() {
                let progress = progress_base + (i as f64 / pairs.len() as f64) / total_epochs as f64;
                let lr = hp.lr_start + (hp.lr_end - hp.lr_start) * progress;
                let (l, c) = train_pair(&ctx, fr, en, lr, &mut rng);
                loss += l;
                count += c;
            }
            (loss, count)
        } else {
            let chunk = pairs.len().div_ceil(threads);
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for (tid, shard) in pairs.chunks(chunk).enumerate() {
                    let input = Arc::clone(&input);
                    let output = Arc::clone(&output);
                    let vocab = &vocab;
                    let cum = &cum;
                    handles.push(scope.spawn(move || {
                        let ctx = TrainContext {
                            vocab,
                            cum,
                            input: &input,
                            output: &output,
                            hp,
                            dim,
                        };
                        let mut rng = ChaCha8Rng::seed_from_u64(
                            seed ^ (0x9e3779b9 + epoch as u64) ^ ((tid as u64) << 32),
                        );
                        let mut loss = 0.0;
                        let mut count = 0;
                        for (i, (fr, en)) in shard.iter().enumerate() {
                            let progress =
                                progress_base + (i as f64 / shard.len() as f64) / total_epochs as f64;
                            let lr = hp.lr_start + (hp.lr_end - hp.lr_start) * progress;
                            let (l, c) = train_pair(&ctx, fr, en, lr, &mut rng);
                            loss += l;
                            count += c;
                        }
                        (loss, count)
                    }));
                }
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training thread panicked"))
                    .fold((0.0, 0u64), |(ls, cs), (l, c)| (ls + l, cs + c))
            })
        };
        epoch_losses.push(if pair_count > 0 {
            loss_sum / pair_count as f64
        } else {
            0.0
        });
    }

    let input = Arc::try_unwrap(input)
        .map_err(|_| Error::Training("training threads still hold the matrix".to_string()))?
        .into_inner();
    let entries: Vec<(String, Vec<f32>)> = vocab
        .tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), input[i * dim..(i + 1) * dim].to_vec()))
        .collect();
    let model = EmbeddingModel::from_vectors(dim, entries, metadata)?;
    Ok(TrainingRun {
        model,
        epoch_losses,
    })
}

/// Ordered fallback across models; intended order is hyphenated,
/// non-hyphenated, full-corpus.
#[derive(Debug, Clone)]
pub struct BackoffChain {
    models: Vec<EmbeddingModel>,
}

impl BackoffChain {
    pub fn new(models: Vec<EmbeddingModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Input("back-off chain must be non-empty".to_string()));
        }
        Ok(BackoffChain { models })
    }

    pub fn single(model: EmbeddingModel) -> Self {
        BackoffChain {
            models: vec![model],
        }
    }

    pub fn models(&self) -> &[EmbeddingModel] {
        &self.models
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DcMode {
    Softmax,
    RawCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationLikelihood {
    /// French connective (unprefixed, underscore-joined).
    pub source: String,
    /// (English connective, probability), non-increasing, summing to 1.
    pub ranked: Vec<(String, f64)>,
    /// Which chain element answered (0-based).
    pub model_index: usize,
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += (*x as f64) * (*y as f64);
        na += (*x as f64) * (*x as f64);
        nb += (*y as f64) * (*y as f64);
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

fn normalize_scores(mut scored: Vec<(String, f64)>, mode: DcMode) -> Vec<(String, f64)> {
    match mode {
        DcMode::Softmax => {
            let max = scored
                .iter()
                .map(|(_, s)| *s)
                .fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for (_, s) in scored.iter_mut() {
                *s = (*s - max).exp();
                sum += *s;
            }
            for (_, s) in scored.iter_mut() {
                *s /= sum;
            }
        }
        DcMode::RawCosine => {
            // Clamped cosines renormalised so the probability invariant holds.
            let mut sum = 0.0;
            for (_, s) in scored.iter_mut() {
                *s = s.max(1e-12);
                sum += *s;
            }
            for (_, s) in scored.iter_mut() {
                *s /= sum;
            }
        }
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored
}

/// Ranks English connective candidates for a French connective. The first
/// chain element whose vocabulary contains the French token answers; later
/// elements are never consulted. Returns None when no element contains it
/// or no candidate is in the answering model's vocabulary.
pub fn translation_likelihood(
    chain: &BackoffChain,
    fr_connective: &str,
    candidate_set: &[String],
    mode: DcMode,
) -> Option<TranslationLikelihood> {
    let fr_token = prefixed(Language::Fr, fr_connective);
    for (model_index, model) in chain.models().iter().enumerate() {
        let Some(fr_vec) = model.get(&fr_token) else {
            continue;
        };
        let scored: Vec<(String, f64)> = candidate_set
            .iter()
            .filter_map(|cand| {
                model
                    .get(&prefixed(Language::En, cand))
                    .map(|en_vec| (cand.clone(), cosine(fr_vec, en_vec)))
            })
            .collect();
        if scored.is_empty() {
            return None;
        }
        return Some(TranslationLikelihood {
            source: fr_connective.to_string(),
            ranked: normalize_scores(scored, mode),
            model_index,
        });
    }
    None
}
