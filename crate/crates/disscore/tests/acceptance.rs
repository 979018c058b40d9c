//! Acceptance suite. One test per criterion; each prints a single
//! `PASS criterion-N` / `FAIL criterion-N` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use disscore::detector::detect;
use disscore::embeddings::{
    hyphenate_corpus, train, translation_likelihood, BackoffChain, DcMode, EmbeddingModel,
    Hyperparams, ModelMetadata,
};
use disscore::evalharness::{
    kendall_wmt, pearson, KendallVariant, Preference, SegmentJudgment, SegmentScores,
    DEFAULT_TIE_EPSILON,
};
use disscore::lexicon::{Lexicon, RelationMapping, RuleSet};
use disscore::scorer::{
    calibrate_gamma, score_document, CombinationMode, Resources, ScoreConfig,
};
use disscore::tagger::Tagger;
use disscore::textmodel::{tokenize, Language, ParallelDoc, Sentence, Token};

fn report(name: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => {
            println!("FAIL {name}: {detail}");
            panic!("{name} failed: {detail}");
        }
    }
}

// ---------------------------------------------------------------------------
// shared fixture helpers

#[derive(Debug, PartialEq, Clone)]
struct Expected {
    start: usize,
    end: usize,
    joined: String,
    sense: String,
    class: String,
}

fn parse_suite(path: &Path, language: Language) -> Vec<(Sentence, Vec<Expected>)> {
    let text = std::fs::read_to_string(path).expect("suite fixture readable");
    let mut out = Vec::new();
    for line in text.lines() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (sentence_part, expected_part) = match line.split_once('\t') {
            Some((s, e)) => (s, e),
            None => (line, ""),
        };
        let tokens: Vec<Token> = sentence_part
            .split_whitespace()
            .enumerate()
            .map(|(i, word)| match word.split_once('|') {
                Some((surface, pos)) => Token::new(surface, Some(pos.to_string()), i),
                None => Token::new(word, None, i),
            })
            .collect();
        let sentence = Sentence::new(tokens, language);
        let expected: Vec<Expected> = expected_part
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|item| {
                let fields: Vec<&str> = item.split(':').collect();
                assert_eq!(fields.len(), 4, "bad expected item: {item}");
                let (span, rest) = (fields[0], &fields[1..]);
                let (start, end) = span.split_once('-').expect("span start-end");
                Expected {
                    start: start.parse().unwrap(),
                    end: end.parse().unwrap(),
                    joined: rest[0].to_string(),
                    sense: rest[1].to_string(),
                    class: rest[2].to_string(),
                }
            })
            .collect();
        out.push((sentence, expected));
    }
    out
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm: f32 = v.iter().map(|x| x * x).sum::<f32>().sqrt().max(1e-6);
    v.into_iter().map(|x| x / norm).collect()
}

fn model_from(dim: usize, entries: &[(&str, Vec<f32>)]) -> EmbeddingModel {
    EmbeddingModel::from_vectors(
        dim,
        entries
            .iter()
            .map(|(t, v)| (t.to_string(), v.clone()))
            .collect(),
        ModelMetadata::default(),
    )
    .expect("valid hand model")
}

// ---------------------------------------------------------------------------
// criterion 1: document scores equal an independently computed aggregate

#[test]
fn criterion_1_score_equation_oracle() {
    report("criterion-1", c1());
}

fn c1() -> Result<String, String> {
    let started = Instant::now();

    // French sentence pool with known connective counts.
    let fr_pool: &[(&str, usize)] = &[
        ("le chat dort sur le tapis .", 0),
        ("il part parce que tu restes .", 1),
        ("il pleut mais je sors .", 1),
        ("donc nous partons .", 1),
        ("il ment car il a peur donc je pars .", 2),
        ("il pleut mais je sors car il le faut .", 2),
        ("il dort car il est tard mais je pars donc tu restes .", 3),
    ];
    let en_pool: &[&str] = &[
        "he sleeps all day .",
        "he leaves because you stay .",
        "it rains but i go out .",
        "therefore we leave .",
        "he lies since he fears so we leave .",
        "if it snows , we stay .",
    ];
    let vocab = [
        "fr:parce_que",
        "fr:mais",
        "fr:donc",
        "fr:car",
        "en:because",
        "en:but",
        "en:therefore",
        "en:when",
        "en:if",
        "en:since",
    ];

    for fixture_idx in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + fixture_idx);
        let dim = 8;
        let entries: Vec<(&str, Vec<f32>)> = vocab
            .iter()
            .map(|t| (*t, random_unit_vector(&mut rng, dim)))
            .collect();
        let model = model_from(dim, &entries);
        let resources = Resources::bundled_with_chain(BackoffChain::single(model))
            .map_err(|e| e.to_string())?;
        let gamma = rng.gen_range(0.0..1.0);
        let mode = if rng.gen_bool(0.5) {
            CombinationMode::Additive
        } else {
            CombinationMode::Multiplicative
        };
        let config = ScoreConfig {
            gamma,
            mode,
            ..ScoreConfig::default()
        };

        let n_sentences = rng.gen_range(1..=5);
        let mut source = Vec::new();
        let mut target = Vec::new();
        let mut expected_counts = Vec::new();
        for _ in 0..n_sentences {
            let (fr, count) = fr_pool[rng.gen_range(0..fr_pool.len())];
            let en = en_pool[rng.gen_range(0..en_pool.len())];
            source.push(tokenize(fr, Language::Fr));
            target.push(tokenize(en, Language::En));
            expected_counts.push(count);
        }
        let doc = ParallelDoc::new(
            format!("doc{fixture_idx}"),
            source,
            BTreeMap::from([("MT".to_string(), target)]),
        )
        .map_err(|e| e.to_string())?;

        let scored = score_document(&doc, "MT", &resources, &config).map_err(|e| e.to_string())?;

        // Independent aggregate from the per-connective observations.
        let mut total = 0.0;
        for (i, sent) in scored.sentences.iter().enumerate() {
            if sent.connective_count != expected_counts[i] {
                return Err(format!(
                    "fixture {fixture_idx}: sentence {i} detected {} connectives, pool says {}",
                    sent.connective_count, expected_counts[i]
                ));
            }
            let m = sent.connective_count as f64;
            let mut sent_value = 0.0;
            for c in &sent.connectives {
                if !(0.0..=1.0).contains(&c.dc) {
                    return Err(format!("fixture {fixture_idx}: dc {} out of range", c.dc));
                }
                sent_value += match mode {
                    CombinationMode::Additive => (c.dc + gamma * c.dr as f64) / m,
                    CombinationMode::Multiplicative => c.dc * gamma * c.dr as f64 / (m * m),
                };
            }
            if (sent_value - sent.value).abs() > 1e-12 {
                return Err(format!(
                    "fixture {fixture_idx}: sentence {i} value {} != oracle {sent_value}",
                    sent.value
                ));
            }
            total += sent_value;
        }
        let oracle_doc = total / scored.sentence_count as f64;
        if (oracle_doc - scored.value).abs() > 1e-12 {
            return Err(format!(
                "fixture {fixture_idx}: document value {} != oracle {oracle_doc}",
                scored.value
            ));
        }
    }

    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 10.0 {
        return Err(format!("took {elapsed:?}, budget 10s"));
    }
    Ok(format!(
        "200 random documents match the independent aggregate in both modes within 1e-12 ({elapsed:?})"
    ))
}

// ---------------------------------------------------------------------------
// criterion 2: French detection golden suite, 100%

#[test]
fn criterion_2_french_detection_suite() {
    report("criterion-2", c2());
}

fn c2() -> Result<String, String> {
    let started = Instant::now();
    let suite = parse_suite(&fixture("fr_detection_suite.tsv"), Language::Fr);
    if suite.len() < 60 {
        return Err(format!("suite has only {} sentences", suite.len()));
    }
    let lexicon = Lexicon::bundled_fr();
    let mapping = RelationMapping::bundled_fr();
    let rules = RuleSet::bundled_fr();
    let mut correct = 0;
    let mut failures = Vec::new();
    for (i, (sentence, expected)) in suite.iter().enumerate() {
        let got = detect(sentence, &lexicon, &mapping, &rules).map_err(|e| e.to_string())?;
        let actual: Vec<Expected> = got
            .items
            .iter()
            .map(|d| Expected {
                start: d.start,
                end: d.end,
                joined: d.surface_joined.clone(),
                sense: d.sense.clone(),
                class: d.relation_class.to_string(),
            })
            .collect();
        if &actual == expected {
            correct += 1;
        } else {
            failures.push(format!("sentence {i}: expected {expected:?}, got {actual:?}"));
        }
    }
    let elapsed = started.elapsed();
    if !failures.is_empty() {
        return Err(format!(
            "{}/{} correct; first mismatch: {}",
            correct,
            suite.len(),
            failures[0]
        ));
    }
    if elapsed.as_secs_f64() > 1.0 {
        return Err(format!("took {elapsed:?}, budget 1s"));
    }
    Ok(format!(
        "{}/{} sentences detected exactly (100%, {elapsed:?})",
        correct,
        suite.len()
    ))
}

// ---------------------------------------------------------------------------
// criterion 3: English tagging golden suite, >= 90%

#[test]
fn criterion_3_english_tagger_suite() {
    report("criterion-3", c3());
}

fn c3() -> Result<String, String> {
    let started = Instant::now();
    let suite = parse_suite(&fixture("en_tagger_suite.tsv"), Language::En);
    if suite.len() < 50 {
        return Err(format!("suite has only {} sentences", suite.len()));
    }
    let tagger = Tagger::bundled();
    let mut correct = 0;
    let mut first_failure = None;
    for (i, (sentence, expected)) in suite.iter().enumerate() {
        let got = tagger.tag(sentence).map_err(|e| e.to_string())?;
        let actual: Vec<Expected> = got
            .items
            .iter()
            .map(|d| Expected {
                start: d.start,
                end: d.end,
                joined: d.surface_joined.clone(),
                sense: d.sense.clone(),
                class: d.relation_class.to_string(),
            })
            .collect();
        if &actual == expected {
            correct += 1;
        } else if first_failure.is_none() {
            first_failure = Some(format!(
                "sentence {i}: expected {expected:?}, got {actual:?}"
            ));
        }
    }
    let accuracy = correct as f64 / suite.len() as f64;
    let elapsed = started.elapsed();
    if accuracy < 0.9 {
        return Err(format!(
            "accuracy {:.1}% below 90%; {}",
            accuracy * 100.0,
            first_failure.unwrap_or_default()
        ));
    }
    if elapsed.as_secs_f64() > 1.0 {
        return Err(format!("took {elapsed:?}, budget 1s"));
    }
    Ok(format!(
        "{}/{} sentences tagged exactly ({:.1}%, {elapsed:?})",
        correct,
        suite.len(),
        accuracy * 100.0
    ))
}

// ---------------------------------------------------------------------------
// criterion 4: embedding training recovers planted translations; back-off
// answers from the first model containing the query

#[test]
fn criterion_4_embedding_recovery_and_backoff() {
    report("criterion-4", c4());
}

fn c4() -> Result<String, String> {
    let started = Instant::now();

    let planted: &[(&str, &str)] = &[
        ("parce que", "because"),
        ("mais", "but"),
        ("donc", "therefore"),
        ("si", "if"),
        ("quand", "when"),
        ("ensuite", "then"),
        ("cependant", "however"),
        ("et", "and"),
        ("ou", "or"),
        ("car", "since"),
    ];
    let fillers: &[(&str, &str)] = &[
        ("chat", "cat"),
        ("chien", "dog"),
        ("maison", "house"),
        ("arbre", "tree"),
        ("voiture", "car"),
        ("livre", "book"),
        ("pomme", "apple"),
        ("route", "road"),
        ("ville", "city"),
        ("mer", "sea"),
        ("pain", "bread"),
        ("lune", "moon"),
        ("soleil", "sun"),
        ("porte", "door"),
        ("table", "table"),
        ("verre", "glass"),
        ("pluie", "rain"),
        ("neige", "snow"),
        ("vent", "wind"),
        ("fleur", "flower"),
        ("oiseau", "bird"),
        ("poisson", "fish"),
        ("montagne", "mountain"),
        ("rivière", "river"),
        ("jardin", "garden"),
        ("école", "school"),
        ("musique", "music"),
        ("papier", "paper"),
        ("pierre", "stone"),
        ("étoile", "star"),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(20_240_817);
    let mut pairs = Vec::with_capacity(5000);
    for i in 0..5000 {
        let (fr_conn, en_conn) = planted[i % planted.len()];
        let mut pick = || fillers[rng.gen_range(0..fillers.len())];
        let (f1, e1) = pick();
        let (f2, e2) = pick();
        let (f3, e3) = pick();
        let (f4, e4) = pick();
        let fr = format!("{f1} {f2} {fr_conn} {f3} {f4}");
        let en = format!("{e1} {e2} {en_conn} {e3} {e4}");
        pairs.push((tokenize(&fr, Language::Fr), tokenize(&en, Language::En)));
    }
    let pairs = hyphenate_corpus(&pairs, &Lexicon::bundled_fr(), &Lexicon::bundled_en());

    let hp = Hyperparams {
        dimension: 32,
        window: 3,
        epochs: 5,
        subsample: 0.0,
        min_count: 2,
        ..Hyperparams::default()
    };
    let run = train(&pairs, &hp, ModelMetadata::default(), 11, 1).map_err(|e| e.to_string())?;
    let chain = BackoffChain::single(run.model);

    let candidates: Vec<String> = planted.iter().map(|(_, e)| e.to_string()).collect();
    let mut hits = 0;
    let mut misses = Vec::new();
    for (fr_conn, en_conn) in planted {
        let joined = fr_conn.replace(' ', "_");
        let tl = translation_likelihood(&chain, &joined, &candidates, DcMode::Softmax)
            .ok_or_else(|| format!("{joined} missing from trained vocabulary"))?;
        if tl.ranked[0].0 == *en_conn {
            hits += 1;
        } else {
            misses.push(format!("{joined} -> {}", tl.ranked[0].0));
        }
    }
    if hits < 9 {
        return Err(format!("only {hits}/10 top-1 recovered; misses: {misses:?}"));
    }

    // Staged back-off: the first model containing the query answers.
    let dim = 4;
    let a = model_from(
        dim,
        &[
            ("fr:parce_que", vec![1.0, 0.0, 0.0, 0.0]),
            ("en:because", vec![1.0, 0.0, 0.0, 0.0]),
            ("en:but", vec![0.0, 1.0, 0.0, 0.0]),
        ],
    );
    let b = model_from(
        dim,
        &[
            ("fr:parce_que", vec![0.0, 1.0, 0.0, 0.0]),
            ("fr:mais", vec![0.0, 1.0, 0.0, 0.0]),
            ("en:because", vec![1.0, 0.0, 0.0, 0.0]),
            ("en:but", vec![0.0, 1.0, 0.0, 0.0]),
        ],
    );
    let staged = BackoffChain::new(vec![a, b]).map_err(|e| e.to_string())?;
    let cands = vec!["because".to_string(), "but".to_string()];
    let first = translation_likelihood(&staged, "parce_que", &cands, DcMode::Softmax)
        .ok_or("parce_que unanswered")?;
    if first.model_index != 0 || first.ranked[0].0 != "because" {
        return Err(format!(
            "parce_que answered by model {} with {}",
            first.model_index, first.ranked[0].0
        ));
    }
    let second = translation_likelihood(&staged, "mais", &cands, DcMode::Softmax)
        .ok_or("mais unanswered")?;
    if second.model_index != 1 || second.ranked[0].0 != "but" {
        return Err(format!(
            "mais answered by model {} with {}",
            second.model_index, second.ranked[0].0
        ));
    }
    if translation_likelihood(&staged, "jamais", &cands, DcMode::Softmax).is_some() {
        return Err("unknown connective should back off to None".to_string());
    }

    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 300.0 {
        return Err(format!("took {elapsed:?}, budget 5min"));
    }
    Ok(format!(
        "{hits}/10 planted pairs top-1; staged back-off indices 0/1/None as expected ({elapsed:?})"
    ))
}

// ---------------------------------------------------------------------------
// criterion 5: correlation statistics vs brute force; tau variant ordering

#[test]
fn criterion_5_correlation_oracles() {
    report("criterion-5", c5());
}

fn brute_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

fn brute_kendall(
    judgments: &[SegmentJudgment],
    scores: &SegmentScores,
    variant: KendallVariant,
    epsilon: f64,
) -> f64 {
    let (mut c, mut d, mut t) = (0u64, 0u64, 0u64);
    for j in judgments {
        let a = scores[&(j.segment_id.clone(), j.system_a.clone())];
        let b = scores[&(j.segment_id.clone(), j.system_b.clone())];
        let metric = if (a - b).abs() <= epsilon {
            0
        } else if a > b {
            1
        } else {
            -1
        };
        let human = match j.preference {
            Preference::A => 1,
            Preference::B => -1,
            Preference::Tie => continue,
        };
        if metric == 0 {
            t += 1;
        } else if metric == human {
            c += 1;
        } else {
            d += 1;
        }
    }
    let (c, d, t) = (c as f64, d as f64, t as f64);
    match variant {
        KendallVariant::Wmt12 => (c - d - t) / (c + d + t),
        KendallVariant::Wmt13 => (c - d) / (c + d),
        KendallVariant::Xties => (c - d) / (c + d + t),
    }
}

fn c5() -> Result<String, String> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    for case in 0..100 {
        let n = rng.gen_range(2..=50);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let got = pearson(&xs, &ys).map_err(|e| format!("case {case}: {e}"))?;
        let want = brute_pearson(&xs, &ys);
        if (got - want).abs() > 1e-12 {
            return Err(format!("case {case}: pearson {got} != brute {want}"));
        }
    }

    let variants = [
        KendallVariant::Wmt12,
        KendallVariant::Wmt13,
        KendallVariant::Xties,
    ];
    for case in 0..100 {
        let n_segments = rng.gen_range(5..=50);
        let mut judgments = Vec::new();
        let mut scores = SegmentScores::new();
        for s in 0..n_segments {
            let seg = format!("seg{s}");
            // Quantized scores force genuine metric ties.
            let a = (rng.gen_range(0..5) as f64) * 0.5;
            let b = (rng.gen_range(0..5) as f64) * 0.5;
            scores.insert((seg.clone(), "sysA".to_string()), a);
            scores.insert((seg.clone(), "sysB".to_string()), b);
            let preference = match rng.gen_range(0..3) {
                0 => Preference::A,
                1 => Preference::B,
                _ => Preference::Tie,
            };
            judgments.push(SegmentJudgment {
                segment_id: seg,
                system_a: "sysA".to_string(),
                system_b: "sysB".to_string(),
                preference,
            });
        }
        for variant in variants {
            let got = kendall_wmt(&judgments, &scores, variant, DEFAULT_TIE_EPSILON);
            let want = brute_kendall(&judgments, &scores, variant, DEFAULT_TIE_EPSILON);
            match got {
                Ok(got) => {
                    if (got - want).abs() > 1e-12 {
                        return Err(format!(
                            "case {case} {variant:?}: tau {got} != brute {want}"
                        ));
                    }
                }
                Err(_) => {
                    // Denominator can be empty when every judgment is a human tie
                    // or (wmt13) every remaining comparison is a metric tie.
                    if want.is_finite() {
                        return Err(format!(
                            "case {case} {variant:?}: errored but brute force got {want}"
                        ));
                    }
                }
            }
        }
    }

    // Fixed fixture: 3 concordant, 1 discordant, 1 metric tie.
    let mut scores = SegmentScores::new();
    let mut judgments = Vec::new();
    let data = [
        ("s1", 2.0, 1.0, Preference::A), // concordant
        ("s2", 2.0, 1.0, Preference::A), // concordant
        ("s3", 1.0, 2.0, Preference::B), // concordant
        ("s4", 1.0, 2.0, Preference::A), // discordant
        ("s5", 1.0, 1.0, Preference::A), // metric tie
    ];
    for (seg, a, b, preference) in data {
        scores.insert((seg.to_string(), "sysA".to_string()), a);
        scores.insert((seg.to_string(), "sysB".to_string()), b);
        judgments.push(SegmentJudgment {
            segment_id: seg.to_string(),
            system_a: "sysA".to_string(),
            system_b: "sysB".to_string(),
            preference,
        });
    }
    let tau12 = kendall_wmt(&judgments, &scores, KendallVariant::Wmt12, DEFAULT_TIE_EPSILON)
        .map_err(|e| e.to_string())?;
    let tau13 = kendall_wmt(&judgments, &scores, KendallVariant::Wmt13, DEFAULT_TIE_EPSILON)
        .map_err(|e| e.to_string())?;
    let tau_x = kendall_wmt(&judgments, &scores, KendallVariant::Xties, DEFAULT_TIE_EPSILON)
        .map_err(|e| e.to_string())?;
    if (tau12 - 0.2).abs() > 1e-12 || (tau13 - 0.5).abs() > 1e-12 || (tau_x - 0.4).abs() > 1e-12 {
        return Err(format!(
            "tie fixture gave wmt12={tau12} wmt13={tau13} xties={tau_x}, want 0.2/0.5/0.4"
        ));
    }
    if tau12 >= tau13 {
        return Err(format!(
            "wmt12 ({tau12}) must penalise metric ties below wmt13 ({tau13})"
        ));
    }

    let elapsed = started.elapsed();
    if elapsed.as_secs_f64() > 5.0 {
        return Err(format!("took {elapsed:?}, budget 5s"));
    }
    Ok(format!(
        "pearson and all tau variants match brute force on 100 random inputs; tie fixture orders wmt12 < wmt13 ({elapsed:?})"
    ))
}

// ---------------------------------------------------------------------------
// criterion 6: gamma calibration returns the known-optimal grid point

#[test]
fn criterion_6_gamma_calibration() {
    report("criterion-6", c6());
}

fn c6() -> Result<String, String> {
    // One-hot model: "before" (wrong class) gets the high likelihood,
    // "because" (right class) the low one. PE matches the right class only,
    // so score(PE) >= score(MT) exactly when gamma >= p_hi - p_lo ~= 0.462.
    let model = model_from(
        2,
        &[
            ("fr:parce_que", vec![1.0, 0.0]),
            ("en:before", vec![1.0, 0.0]),
            ("en:because", vec![0.0, 1.0]),
        ],
    );
    let resources = Resources::bundled_with_chain(BackoffChain::single(model))
        .map_err(|e| e.to_string())?;

    let mut docs = Vec::new();
    for i in 0..4 {
        let source = vec![tokenize("il part parce que tu restes .", Language::Fr)];
        let mt = vec![tokenize("he left before noon .", Language::En)];
        let pe = vec![tokenize("he left because you stayed .", Language::En)];
        docs.push(
            ParallelDoc::new(
                format!("d{i}"),
                source,
                BTreeMap::from([("MT".to_string(), mt), ("PE".to_string(), pe)]),
            )
            .map_err(|e| e.to_string())?,
        );
    }

    let grid = [0.045, 0.5, 2.0];
    let base = ScoreConfig::default();
    for seed in [1u64, 2, 42] {
        let gamma = calibrate_gamma(&docs, &grid, 2, seed, &resources, &base)
            .map_err(|e| e.to_string())?;
        if (gamma - 0.5).abs() > 1e-12 {
            return Err(format!(
                "seed {seed}: calibrated gamma {gamma}, want the known optimum 0.5 \
                 (smallest grid point achieving the maximal PE>=MT fraction)"
            ));
        }
    }
    Ok("gamma grid search returns 0.5 deterministically for seeds 1, 2, 42".to_string())
}

// ---------------------------------------------------------------------------
// criterion 7 (informational): published-corpus reproduction recipe

#[test]
fn criterion_7_reported_numbers_recipe() {
    report("criterion-7", c7());
}

fn c7() -> Result<String, String> {
    // The original WMT12-derived French-English corpus with post-edits and
    // human judgments is not distributed with this repository, so this
    // criterion is informational: it checks the documented reference tallies
    // for internal consistency and describes the recipe.
    let pe_wins = 113u32;
    let mt_wins = 80u32;
    let ties = 168u32;
    let total = 361u32;
    if pe_wins + mt_wins + ties != total {
        return Err("reference tally rows do not sum to the segment total".to_string());
    }
    let pe_geq = f64::from(pe_wins + ties) / f64::from(total);
    if (pe_geq - 0.78).abs() > 0.01 {
        return Err(format!("PE>=MT fraction {pe_geq:.3} not ~0.78"));
    }
    let note = match std::env::var("DISSCORE_LIG_DIR") {
        Ok(dir) => format!(
            "corpus directory {dir} supplied; run `disscore score` on source/MT/PE with the \
             sidecar document index, then `disscore evaluate --eval-mode wintally --a PE --b MT` \
             and expect roughly 78% (+-10pp) of segments with score(PE) >= score(MT)"
        ),
        Err(_) => "reference tallies consistent (113 + 80 + 168 = 361, PE>=MT ~= 78%); \
                   set DISSCORE_LIG_DIR to attempt the full reproduction"
            .to_string(),
    };
    Ok(format!("informational: {note}"))
}

// ---------------------------------------------------------------------------
// criterion 8: byte-identical determinism for a fixed seed, single thread

#[test]
fn criterion_8_determinism() {
    report("criterion-8", c8());
}

fn c8() -> Result<String, String> {
    let mut pairs = Vec::new();
    let fr_conns = ["parce que", "mais", "donc", "car"];
    let en_conns = ["because", "but", "therefore", "since"];
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for i in 0..200 {
        let c = i % fr_conns.len();
        let a = rng.gen_range(0..4);
        let fr = format!("mot{a} alpha {} mot{} fin", fr_conns[c], (a + 1) % 4);
        let en = format!("word{a} alpha {} word{} end", en_conns[c], (a + 1) % 4);
        pairs.push((tokenize(&fr, Language::Fr), tokenize(&en, Language::En)));
    }
    let pairs = hyphenate_corpus(&pairs, &Lexicon::bundled_fr(), &Lexicon::bundled_en());
    let hp = Hyperparams {
        dimension: 16,
        window: 2,
        epochs: 3,
        subsample: 0.0,
        min_count: 1,
        ..Hyperparams::default()
    };

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut saved = Vec::new();
    for run_idx in 0..2 {
        let run =
            train(&pairs, &hp, ModelMetadata::default(), 7, 1).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("model{run_idx}.vec"));
        run.model.save(&path).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let meta =
            std::fs::read(format!("{}.meta.json", path.display())).map_err(|e| e.to_string())?;
        saved.push((bytes, meta, run.model));
    }
    if saved[0].0 != saved[1].0 {
        return Err("model files differ between identically seeded runs".to_string());
    }
    if saved[0].1 != saved[1].1 {
        return Err("metadata sidecars differ between identically seeded runs".to_string());
    }

    // Detection, tagging and scoring are deterministic end to end.
    let fr_sentence = tokenize("il pleut parce que le ciel est gris mais je sors .", Language::Fr);
    let en_sentence = tokenize("it rains because the sky is grey but i go out .", Language::En);
    let mut serialized = Vec::new();
    for (_, _, model) in &saved {
        let resources = Resources::bundled_with_chain(BackoffChain::single(model.clone()))
            .map_err(|e| e.to_string())?;
        let detections = detect(
            &fr_sentence,
            &resources.fr_lexicon,
            &resources.fr_mapping,
            &resources.fr_rules,
        )
        .map_err(|e| e.to_string())?;
        let tags = resources
            .tagger
            .tag(&en_sentence)
            .map_err(|e| e.to_string())?;
        let doc = ParallelDoc::new(
            "d".to_string(),
            vec![fr_sentence.clone()],
            BTreeMap::from([("MT".to_string(), vec![en_sentence.clone()])]),
        )
        .map_err(|e| e.to_string())?;
        let score =
            score_document(&doc, "MT", &resources, &ScoreConfig::default()).map_err(|e| e.to_string())?;
        serialized.push(
            serde_json::to_string(&(detections.items, tags.items, score))
                .map_err(|e| e.to_string())?,
        );
    }
    if serialized[0] != serialized[1] {
        return Err("serialized detect/tag/score outputs differ between runs".to_string());
    }
    Ok("identically seeded single-threaded runs are byte-identical (model files, metadata, \
        serialized detect/tag/score outputs)"
        .to_string())
}
