//! Command-line pipeline: train embeddings, detect/tag connectives, query
//! translation likelihoods, score documents, calibrate gamma, run the
//! evaluation protocols, and combine metrics.
//!
//! Exit codes: 0 success, 1 input/format error, 2 internal invariant
//! violation (panic).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use disscore::embeddings::{
    hyphenate_corpus, translation_likelihood, BackoffChain, DcMode, EmbeddingModel, Hyperparams,
    ModelMetadata,
};
use disscore::evalharness::{
    combine_linear, kendall_wmt, pearson, win_tally, KendallVariant, Preference, SegmentJudgment,
    SegmentScores, DEFAULT_TIE_EPSILON,
};
use disscore::lexicon::{Lexicon, RelationMapping, RuleSet};
use disscore::scorer::{
    calibrate_gamma, score_document, CombinationMode, Resources, ScoreConfig,
};
use disscore::tagger::Tagger;
use disscore::textmodel::{
    load_parallel, read_conllu, read_doc_index, tokenize, CorpusFormat, Language, ParallelDoc,
    Sentence,
};

#[derive(Parser, Debug, serde::Serialize)]
#[command(name = "disscore", version, about = "Discourse-relation transfer scoring for MT output")]
struct Cli {
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true, env = "DISSCORE_PRINT_CONFIG")]
    print_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, serde::Serialize)]
enum Command {
    /// Train bilingual connective embeddings on a parallel corpus.
    Train(TrainArgs),
    /// Detect French discourse connectives and their relation classes.
    Detect(DetectArgs),
    /// Tag English connectives with PDTB top-level classes.
    Tag(DetectArgs),
    /// Query ranked English translations for a French connective.
    Query(QueryArgs),
    /// Score candidate translations against the source documents.
    Score(ScoreArgs),
    /// Grid-search cross-validation for gamma on an MT/PE corpus.
    Calibrate(CalibrateArgs),
    /// Evaluation protocols: win/tie/loss, Pearson, Kendall tau variants.
    Evaluate(EvaluateArgs),
    /// Linearly combine per-system metric files.
    Combine(CombineArgs),
}

#[derive(Args, Debug, serde::Serialize)]
struct ResourceArgs {
    /// French lexicon TSV (bundled default when omitted).
    #[arg(long, env = "DISSCORE_FR_LEXICON")]
    fr_lexicon: Option<PathBuf>,
    /// English lexicon TSV (bundled default when omitted).
    #[arg(long, env = "DISSCORE_EN_LEXICON")]
    en_lexicon: Option<PathBuf>,
    /// French relation mapping TSV (bundled default when omitted).
    #[arg(long, env = "DISSCORE_FR_MAPPING")]
    fr_mapping: Option<PathBuf>,
    /// English relation mapping TSV (bundled default when omitted).
    #[arg(long, env = "DISSCORE_EN_MAPPING")]
    en_mapping: Option<PathBuf>,
    /// French ambiguity rules TSV (bundled default when omitted).
    #[arg(long, env = "DISSCORE_FR_RULES")]
    fr_rules: Option<PathBuf>,
    /// English ambiguity rules TSV (bundled default when omitted).
    #[arg(long, env = "DISSCORE_EN_RULES")]
    en_rules: Option<PathBuf>,
}

impl ResourceArgs {
    fn fr_lexicon(&self) -> anyhow::Result<Lexicon> {
        Ok(match &self.fr_lexicon {
            Some(p) => Lexicon::load(p, Language::Fr)?,
            None => Lexicon::bundled_fr(),
        })
    }

    fn en_lexicon(&self) -> anyhow::Result<Lexicon> {
        Ok(match &self.en_lexicon {
            Some(p) => Lexicon::load(p, Language::En)?,
            None => Lexicon::bundled_en(),
        })
    }

    fn fr_mapping(&self) -> anyhow::Result<RelationMapping> {
        Ok(match &self.fr_mapping {
            Some(p) => RelationMapping::load(p)?,
            None => RelationMapping::bundled_fr(),
        })
    }

    fn en_mapping(&self) -> anyhow::Result<RelationMapping> {
        Ok(match &self.en_mapping {
            Some(p) => RelationMapping::load(p)?,
            None => RelationMapping::bundled_en(),
        })
    }

    fn fr_rules(&self) -> anyhow::Result<RuleSet> {
        Ok(match &self.fr_rules {
            Some(p) => RuleSet::load(p)?,
            None => RuleSet::bundled_fr(),
        })
    }

    fn en_rules(&self) -> anyhow::Result<RuleSet> {
        Ok(match &self.en_rules {
            Some(p) => RuleSet::load(p)?,
            None => RuleSet::bundled_en(),
        })
    }

    fn resources(&self, models: &[PathBuf]) -> anyhow::Result<Resources> {
        if models.is_empty() {
            bail!("at least one --model is required");
        }
        let loaded: Vec<EmbeddingModel> = models
            .iter()
            .map(|p| EmbeddingModel::load(p).map_err(anyhow::Error::from))
            .collect::<anyhow::Result<_>>()?;
        let chain = BackoffChain::new(loaded)?;
        let tagger = Tagger::new(self.en_lexicon()?, self.en_mapping()?, self.en_rules()?)?;
        Ok(Resources::new(
            self.fr_lexicon()?,
            self.fr_mapping()?,
            self.fr_rules()?,
            tagger,
            chain,
        )?)
    }
}

#[derive(Args, Debug, serde::Serialize)]
struct TrainArgs {
    /// Source-side (French) corpus, one sentence per line.
    #[arg(long, env = "DISSCORE_SRC")]
    src: PathBuf,
    /// Target-side (English) corpus, one sentence per line.
    #[arg(long, env = "DISSCORE_TGT")]
    tgt: PathBuf,
    /// Output model path (plain-text vectors + sidecar metadata JSON).
    #[arg(long, env = "DISSCORE_OUT")]
    out: PathBuf,
    /// Join detected connectives into single tokens before training.
    #[arg(long, env = "DISSCORE_HYPHENATE")]
    hyphenate: bool,
    #[arg(long, default_value_t = 100, env = "DISSCORE_DIMENSION")]
    dimension: usize,
    #[arg(long, default_value_t = 5, env = "DISSCORE_WINDOW")]
    window: usize,
    #[arg(long, default_value_t = 5, env = "DISSCORE_NEGATIVE")]
    negative: usize,
    #[arg(long, default_value_t = 5, env = "DISSCORE_EPOCHS")]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4, env = "DISSCORE_SUBSAMPLE")]
    subsample: f64,
    #[arg(long, default_value_t = 0.025, env = "DISSCORE_LR_START")]
    lr_start: f64,
    #[arg(long, default_value_t = 0.0001, env = "DISSCORE_LR_END")]
    lr_end: f64,
    #[arg(long, default_value_t = 2, env = "DISSCORE_MIN_COUNT")]
    min_count: usize,
    #[arg(long, default_value_t = 42, env = "DISSCORE_SEED")]
    seed: u64,
    /// Training threads; 1 is bit-deterministic for a given seed.
    #[arg(long, default_value_t = 1, env = "DISSCORE_THREADS")]
    threads: usize,
    #[arg(long, default_value = "", env = "DISSCORE_CORPUS_ID")]
    corpus_id: String,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct DetectArgs {
    /// Input file: plain text (one sentence per line) or CoNLL-U.
    #[arg(long, env = "DISSCORE_INPUT")]
    input: PathBuf,
    #[arg(long, default_value = "plain", env = "DISSCORE_FORMAT")]
    format: String,
    /// Document id recorded in the output records.
    #[arg(long, default_value = "doc", env = "DISSCORE_DOC_ID")]
    doc_id: String,
    /// Output JSON-lines path; stdout when omitted.
    #[arg(long, env = "DISSCORE_OUTPUT")]
    output: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct QueryArgs {
    /// Model paths, back-off order (hyphenated, non-hyphenated, full).
    #[arg(long = "model", required = true, env = "DISSCORE_MODEL")]
    models: Vec<PathBuf>,
    /// French connective, underscore-joined (e.g. parce_que).
    #[arg(long, env = "DISSCORE_CONNECTIVE")]
    connective: String,
    /// Candidate file (one English connective per line); defaults to the
    /// English lexicon inventory.
    #[arg(long, env = "DISSCORE_CANDIDATES")]
    candidates: Option<PathBuf>,
    #[arg(long, default_value_t = 20, env = "DISSCORE_TOP_K")]
    top_k: usize,
    #[arg(long, default_value = "softmax", env = "DISSCORE_DC_MODE")]
    dc_mode: String,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct CorpusArgs {
    /// Source (French) corpus path.
    #[arg(long, env = "DISSCORE_SRC")]
    src: PathBuf,
    /// Candidate corpora as LABEL=path (repeatable).
    #[arg(long = "cand", required = true)]
    cands: Vec<String>,
    /// Sidecar document index (doc_id<TAB>start<TAB>length); whole file is
    /// one document when omitted.
    #[arg(long, env = "DISSCORE_DOC_INDEX")]
    doc_index: Option<PathBuf>,
    #[arg(long, default_value = "plain", env = "DISSCORE_FORMAT")]
    format: String,
}

impl CorpusArgs {
    fn load(&self) -> anyhow::Result<Vec<ParallelDoc>> {
        let format = CorpusFormat::from_str(&self.format)?;
        let mut cands = BTreeMap::new();
        for spec in &self.cands {
            let (label, path) = spec
                .split_once('=')
                .with_context(|| format!("--cand expects LABEL=path, got {spec}"))?;
            cands.insert(label.to_string(), PathBuf::from(path));
        }
        let index = self.doc_index.as_ref().map(read_doc_index).transpose()?;
        Ok(load_parallel(&self.src, &cands, format, index.as_deref())?)
    }
}

#[derive(Args, Debug, serde::Serialize)]
struct ScoreConfigArgs {
    #[arg(long, default_value_t = 0.045, env = "DISSCORE_GAMMA")]
    gamma: f64,
    /// additive or multiplicative.
    #[arg(long, default_value = "additive", env = "DISSCORE_MODE")]
    mode: String,
    /// softmax or raw_cosine.
    #[arg(long, default_value = "softmax", env = "DISSCORE_DC_MODE")]
    dc_mode: String,
    #[arg(long, default_value_t = 20, env = "DISSCORE_TOP_K")]
    top_k: usize,
}

impl ScoreConfigArgs {
    fn config(&self) -> anyhow::Result<ScoreConfig> {
        let config = ScoreConfig {
            gamma: self.gamma,
            mode: CombinationMode::from_str(&self.mode)?,
            dc_mode: parse_dc_mode(&self.dc_mode)?,
            top_k: self.top_k,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Debug, serde::Serialize)]
struct ScoreArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long = "model", required = true)]
    models: Vec<PathBuf>,
    #[command(flatten)]
    config: ScoreConfigArgs,
    /// Per-document JSON report with per-sentence breakdown.
    #[arg(long, env = "DISSCORE_OUT_JSON")]
    out_json: Option<PathBuf>,
    /// CSV summary (doc_id,label,sentences,value).
    #[arg(long, env = "DISSCORE_OUT_CSV")]
    out_csv: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct CalibrateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long = "model", required = true)]
    models: Vec<PathBuf>,
    /// Comma-separated gamma grid.
    #[arg(long, default_value = "0.01,0.045,0.1,0.5,1.0", env = "DISSCORE_GRID")]
    grid: String,
    #[arg(long, default_value_t = 5, env = "DISSCORE_FOLDS")]
    folds: usize,
    #[arg(long, default_value_t = 42, env = "DISSCORE_SEED")]
    seed: u64,
    #[command(flatten)]
    config: ScoreConfigArgs,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct EvaluateArgs {
    /// wintally, pearson, or kendall.
    #[arg(long, default_value = "wintally", env = "DISSCORE_EVAL_MODE")]
    eval_mode: String,

    // wintally inputs
    #[command(flatten)]
    corpus: WinTallyArgs,

    /// Metric scores CSV "system,score" (pearson mode).
    #[arg(long, env = "DISSCORE_METRIC_CSV")]
    metric_csv: Option<PathBuf>,
    /// Human scores CSV "system,score" (pearson mode).
    #[arg(long, env = "DISSCORE_HUMAN_CSV")]
    human_csv: Option<PathBuf>,

    /// Pairwise judgements CSV "segment_id,system_a,system_b,preference"
    /// (kendall mode).
    #[arg(long, env = "DISSCORE_JUDGMENTS_CSV")]
    judgments_csv: Option<PathBuf>,
    /// Segment scores CSV "segment_id,system,score" (kendall mode).
    #[arg(long, env = "DISSCORE_SEGMENT_SCORES_CSV")]
    segment_scores_csv: Option<PathBuf>,
    /// wmt12, wmt13, or xties.
    #[arg(long, default_value = "wmt13", env = "DISSCORE_VARIANT")]
    variant: String,

    /// JSON report path; stdout when omitted.
    #[arg(long, env = "DISSCORE_OUTPUT")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
struct WinTallyArgs {
    #[arg(long, env = "DISSCORE_SRC")]
    src: Option<PathBuf>,
    #[arg(long = "cand")]
    cands: Vec<String>,
    #[arg(long, env = "DISSCORE_DOC_INDEX")]
    doc_index: Option<PathBuf>,
    #[arg(long, default_value = "plain", env = "DISSCORE_FORMAT")]
    format: String,
    /// First label of the comparison (e.g. PE).
    #[arg(long, env = "DISSCORE_LABEL_A")]
    a: Option<String>,
    /// Second label of the comparison (e.g. MT).
    #[arg(long, env = "DISSCORE_LABEL_B")]
    b: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TIE_EPSILON, env = "DISSCORE_EPSILON")]
    epsilon: f64,
    #[arg(long = "model")]
    models: Vec<PathBuf>,
    #[command(flatten)]
    config: ScoreConfigArgs,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args, Debug, serde::Serialize)]
struct CombineArgs {
    /// Metric files CSV "system,score" (repeatable, order matches weights).
    #[arg(long = "metric-csv", required = true)]
    metric_csvs: Vec<PathBuf>,
    /// Comma-separated weights.
    #[arg(long, env = "DISSCORE_WEIGHTS")]
    weights: String,
    /// Optional human scores CSV to report Pearson of the combination.
    #[arg(long, env = "DISSCORE_HUMAN_CSV")]
    human_csv: Option<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(long, env = "DISSCORE_OUTPUT")]
    output: Option<PathBuf>,
}

fn parse_dc_mode(s: &str) -> anyhow::Result<DcMode> {
    match s {
        "softmax" => Ok(DcMode::Softmax),
        "raw_cosine" => Ok(DcMode::RawCosine),
        other => bail!("unknown dc mode: {other}"),
    }
}

/// Writes via a temp file and atomic rename; no partial output on error.
fn write_atomic(path: &Path, content: &str) -> anyhow::Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match parent {
        Some(dir) => dir.join(format!(
            ".{}.tmp-{}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            std::process::id()
        )),
        None => PathBuf::from(format!(".disscore.tmp-{}", std::process::id())),
    };
    fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn emit(output: Option<&PathBuf>, content: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn read_system_scores(path: &Path) -> anyhow::Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in read_lines(path)?.into_iter().enumerate() {
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("system")) {
            continue;
        }
        let (system, score) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected system,score", path.display(), lineno + 1))?;
        let score: f64 = score.trim().parse().with_context(|| {
            format!("{}:{}: invalid score {score}", path.display(), lineno + 1)
        })?;
        out.insert(system.trim().to_string(), score);
    }
    Ok(out)
}

fn read_judgments(path: &Path) -> anyhow::Result<Vec<SegmentJudgment>> {
    let mut out = Vec::new();
    for (lineno, line) in read_lines(path)?.into_iter().enumerate() {
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("segment")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            bail!(
                "{}:{}: expected segment_id,system_a,system_b,preference",
                path.display(),
                lineno + 1
            );
        }
        out.push(SegmentJudgment {
            segment_id: cols[0].to_string(),
            system_a: cols[1].to_string(),
            system_b: cols[2].to_string(),
            preference: Preference::from_str(cols[3])?,
        });
    }
    Ok(out)
}

fn read_segment_scores(path: &Path) -> anyhow::Result<SegmentScores> {
    let mut out = SegmentScores::new();
    for (lineno, line) in read_lines(path)?.into_iter().enumerate() {
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("segment")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            bail!(
                "{}:{}: expected segment_id,system,score",
                path.display(),
                lineno + 1
            );
        }
        let score: f64 = cols[2]
            .parse()
            .with_context(|| format!("{}:{}: invalid score", path.display(), lineno + 1))?;
        out.insert((cols[0].to_string(), cols[1].to_string()), score);
    }
    Ok(out)
}

fn run_train(args: &TrainArgs) -> anyhow::Result<()> {
    let src = read_lines(&args.src)?;
    let tgt = read_lines(&args.tgt)?;
    if src.len() != tgt.len() {
        bail!(
            "alignment error: {} has {} lines, {} has {}",
            args.src.display(),
            src.len(),
            args.tgt.display(),
            tgt.len()
        );
    }
    let mut pairs: Vec<(Sentence, Sentence)> = src
        .iter()
        .zip(&tgt)
        .map(|(f, e)| (tokenize(f, Language::Fr), tokenize(e, Language::En)))
        .collect();
    if args.hyphenate {
        let fr_lex = args.resources.fr_lexicon()?;
        let en_lex = args.resources.en_lexicon()?;
        pairs = hyphenate_corpus(&pairs, &fr_lex, &en_lex);
    }
    let hp = Hyperparams {
        dimension: args.dimension,
        window: args.window,
        negative: args.negative,
        epochs: args.epochs,
        subsample: args.subsample,
        lr_start: args.lr_start,
        lr_end: args.lr_end,
        min_count: args.min_count,
    };
    let metadata = ModelMetadata {
        hyphenated: args.hyphenate,
        corpus_id: args.corpus_id.clone(),
        hyperparams: hp.clone(),
    };
    let run = disscore::embeddings::train(&pairs, &hp, metadata, args.seed, args.threads)?;
    // save to a temp name in the same directory, then rename both files
    let tmp = args.out.with_extension("tmp");
    run.model.save(&tmp)?;
    fs::rename(&tmp, &args.out)
        .with_context(|| format!("renaming to {}", args.out.display()))?;
    let meta_from = PathBuf::from(format!("{}.meta.json", tmp.display()));
    let meta_to = PathBuf::from(format!("{}.meta.json", args.out.display()));
    fs::rename(&meta_from, &meta_to)
        .with_context(|| format!("renaming to {}", meta_to.display()))?;
    eprintln!(
        "trained {} tokens, dim {}; per-epoch loss: {}",
        run.model.len(),
        run.model.dimension,
        run.epoch_losses
            .iter()
            .map(|l| format!("{l:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(())
}

fn run_detect(args: &DetectArgs, language: Language) -> anyhow::Result<()> {
    let format = CorpusFormat::from_str(&args.format)?;
    let sentences = match format {
        CorpusFormat::Plain => read_lines(&args.input)?
            .iter()
            .map(|l| tokenize(l, language))
            .collect(),
        CorpusFormat::Conllu => read_conllu(&args.input, language)?,
    };
    let (lexicon, mapping, rules) = match language {
        Language::Fr => (
            args.resources.fr_lexicon()?,
            args.resources.fr_mapping()?,
            args.resources.fr_rules()?,
        ),
        Language::En => (
            args.resources.en_lexicon()?,
            args.resources.en_mapping()?,
            args.resources.en_rules()?,
        ),
    };
    let mut out = String::new();
    for (sent_index, sentence) in sentences.iter().enumerate() {
        let detections = disscore::detector::detect(sentence, &lexicon, &mapping, &rules)?;
        for warning in &detections.warnings {
            eprintln!("warning: sentence {sent_index}: {warning}");
        }
        for d in detections.items {
            let record = serde_json::json!({
                "doc_id": args.doc_id,
                "sent_index": sent_index,
                "start": d.start,
                "end": d.end,
                "surface": d.surface_joined,
                "sense": d.sense,
                "class": d.relation_class.to_string(),
            });
            out.push_str(&record.to_string());
            out.push('\n');
        }
    }
    emit(args.output.as_ref(), &out)
}

fn run_query(args: &QueryArgs) -> anyhow::Result<()> {
    let models: Vec<EmbeddingModel> = args
        .models
        .iter()
        .map(|p| EmbeddingModel::load(p).map_err(anyhow::Error::from))
        .collect::<anyhow::Result<_>>()?;
    let chain = BackoffChain::new(models)?;
    let candidates: Vec<String> = match &args.candidates {
        Some(path) => read_lines(path)?
            .into_iter()
            .filter(|l| !l.is_empty())
            .collect(),
        None => args.resources.en_lexicon()?.joined_surfaces(),
    };
    let mode = parse_dc_mode(&args.dc_mode)?;
    match translation_likelihood(&chain, &args.connective, &candidates, mode) {
        Some(tl) => {
            for (rank, (candidate, prob)) in tl.ranked.iter().take(args.top_k).enumerate() {
                println!("{}\t{candidate}\t{prob:.6}\t{}", rank + 1, tl.model_index);
            }
            Ok(())
        }
        None => bail!(
            "no model in the chain has an equivalent for {}",
            args.connective
        ),
    }
}

fn score_csv(scores: &[disscore::scorer::DocumentScore]) -> String {
    let mut csv = String::from("doc_id,label,sentences,value\n");
    for s in scores {
        csv.push_str(&format!(
            "{},{},{},{:.6}\n",
            s.doc_id, s.label, s.sentence_count, s.value
        ));
    }
    csv
}

fn run_score(args: &ScoreArgs) -> anyhow::Result<()> {
    let docs = args.corpus.load()?;
    let resources = args.resources.resources(&args.models)?;
    let config = args.config.config()?;
    let mut scores = Vec::new();
    for doc in &docs {
        for label in doc.candidates.keys() {
            scores.push(score_document(doc, label, &resources, &config)?);
        }
    }
    let json = serde_json::to_string_pretty(&scores)?;
    let csv = score_csv(&scores);
    match (&args.out_json, &args.out_csv) {
        (None, None) => print!("{csv}"),
        (json_path, csv_path) => {
            if let Some(p) = json_path {
                write_atomic(p, &json)?;
            }
            if let Some(p) = csv_path {
                write_atomic(p, &csv)?;
            }
        }
    }
    Ok(())
}

fn run_calibrate(args: &CalibrateArgs) -> anyhow::Result<()> {
    let docs = args.corpus.load()?;
    let resources = args.resources.resources(&args.models)?;
    let config = args.config.config()?;
    let grid: Vec<f64> = args
        .grid
        .split(',')
        .map(|g| g.trim().parse::<f64>().context("invalid gamma in grid"))
        .collect::<anyhow::Result<_>>()?;
    let gamma = calibrate_gamma(&docs, &grid, args.folds, args.seed, &resources, &config)?;
    println!("{gamma}");
    Ok(())
}

fn run_evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    match args.eval_mode.as_str() {
        "wintally" => {
            let wt = &args.corpus;
            let src = wt.src.as_ref().context("--src is required")?;
            let label_a = wt.a.as_ref().context("--a is required")?;
            let label_b = wt.b.as_ref().context("--b is required")?;
            let corpus = CorpusArgs {
                src: src.clone(),
                cands: wt.cands.clone(),
                doc_index: wt.doc_index.clone(),
                format: wt.format.clone(),
            };
            let docs = corpus.load()?;
            let resources = wt.resources.resources(&wt.models)?;
            let config = wt.config.config()?;
            let tally = win_tally(&docs, label_a, label_b, &resources, &config, wt.epsilon)?;
            let report = serde_json::json!({
                "label_a": label_a,
                "label_b": label_b,
                "wins_a": tally.wins_a,
                "wins_b": tally.wins_b,
                "ties": tally.ties,
                "total": tally.total,
                "percent_a": format!("{:.1}", tally.percent_a()),
                "percent_b": format!("{:.1}", tally.percent_b()),
                "a_geq_b_fraction": tally.a_geq_fraction(),
            });
            emit(args.output.as_ref(), &format!("{report:#}\n"))
        }
        "pearson" => {
            let metric = read_system_scores(
                args.metric_csv.as_ref().context("--metric-csv required")?,
            )?;
            let human =
                read_system_scores(args.human_csv.as_ref().context("--human-csv required")?)?;
            if metric.keys().ne(human.keys()) {
                bail!("metric and human files cover different system sets");
            }
            let xs: Vec<f64> = metric.values().copied().collect();
            let ys: Vec<f64> = human.values().copied().collect();
            let r = pearson(&xs, &ys)?;
            emit(args.output.as_ref(), &format!("{r:.6}\n"))
        }
        "kendall" => {
            let judgments = read_judgments(
                args.judgments_csv
                    .as_ref()
                    .context("--judgments-csv required")?,
            )?;
            let scores = read_segment_scores(
                args.segment_scores_csv
                    .as_ref()
                    .context("--segment-scores-csv required")?,
            )?;
            let variant = KendallVariant::from_str(&args.variant)?;
            let tau = kendall_wmt(&judgments, &scores, variant, DEFAULT_TIE_EPSILON)?;
            let nonzero = disscore::evalharness::nonzero_segments(&scores);
            let report = serde_json::json!({
                "variant": args.variant,
                "tau": tau,
                "nonzero_segments_per_system": nonzero,
            });
            emit(args.output.as_ref(), &format!("{report:#}\n"))
        }
        other => bail!("unknown evaluate mode: {other}"),
    }
}

fn run_combine(args: &CombineArgs) -> anyhow::Result<()> {
    let metrics: Vec<BTreeMap<String, f64>> = args
        .metric_csvs
        .iter()
        .map(|p| read_system_scores(p))
        .collect::<anyhow::Result<_>>()?;
    let weights: Vec<f64> = args
        .weights
        .split(',')
        .map(|w| w.trim().parse::<f64>().context("invalid weight"))
        .collect::<anyhow::Result<_>>()?;
    let combined = combine_linear(&metrics, &weights)?;
    let mut csv = String::from("system,score\n");
    for (system, score) in &combined {
        csv.push_str(&format!("{system},{score:.6}\n"));
    }
    if let Some(human_path) = &args.human_csv {
        let human = read_system_scores(human_path)?;
        if human.keys().eq(combined.keys()) {
            let xs: Vec<f64> = combined.values().copied().collect();
            let ys: Vec<f64> = human.values().copied().collect();
            csv.push_str(&format!("# pearson_vs_human,{:.6}\n", pearson(&xs, &ys)?));
        } else {
            bail!("human file covers a different system set");
        }
    }
    emit(args.output.as_ref(), &csv)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cli.command)?);
        return Ok(());
    }
    match &cli.command {
        Command::Train(args) => run_train(args),
        Command::Detect(args) => run_detect(args, Language::Fr),
        Command::Tag(args) => run_detect(args, Language::En),
        Command::Query(args) => run_query(args),
        Command::Score(args) => run_score(args),
        Command::Calibrate(args) => run_calibrate(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Combine(args) => run_combine(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            ExitCode::from(2)
        }
    }
}
