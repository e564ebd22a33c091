use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wellspeech_core::assessment::{assess_raw, ground_keywords, ValidationMode};
use wellspeech_core::metrics::spearman_coefficient;
use wellspeech_core::synth::{
    corrupt_output, generate_corpus, generate_pairs, CorruptionClass, SynthConfig, TruthDistribution,
    DEFAULT_VOCAB, MAX_WORDS, MIN_WORDS,
};
use wellspeech_core::text::tokenize;

fn cfg(n: usize, sigma: f64, seed: u64) -> SynthConfig {
    SynthConfig {
        n_records: n,
        noise_sigma: sigma,
        seed,
        ..SynthConfig::default()
    }
}

fn scc(t: &[i64], p: &[i64]) -> f64 {
    let t: Vec<f64> = t.iter().map(|&v| v as f64).collect();
    let p: Vec<f64> = p.iter().map(|&v| v as f64).collect();
    spearman_coefficient(&p, &t).unwrap()
}

/// Same model as the library generator, drawn through a different seed
/// schedule and a Box-Muller normal sampler.
fn reference_pairs(n: usize, sigma: f64, seed: u64) -> (Vec<i64>, Vec<i64>) {
    let mut truth_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7157);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut gauss = || {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let t: Vec<i64> = (0..n).map(|_| truth_rng.random_range(51..=123)).collect();
    let p = t
        .iter()
        .map(|&v| ((v as f64 + sigma * gauss()).round() as i64).clamp(18, 126))
        .collect();
    (t, p)
}

#[test]
fn pairs_are_deterministic_and_bounded() {
    let a = generate_pairs(&cfg(500, 30.0, 1)).unwrap();
    assert_eq!(a, generate_pairs(&cfg(500, 30.0, 1)).unwrap());
    assert_ne!(a, generate_pairs(&cfg(500, 30.0, 2)).unwrap());
    assert!(a.0.iter().all(|t| (51..=123).contains(t)));
    assert!(a.1.iter().all(|p| (18..=126).contains(p)));
    let (t, p) = generate_pairs(&cfg(50, 0.0, 3)).unwrap();
    assert_eq!(t, p);
}

#[test]
fn mean_scc_agrees_with_reference_generator() {
    for sigma in [8.0, 25.0, 60.0] {
        let reps = 300;
        let lib: f64 = (0..reps)
            .map(|s| {
                let (t, p) = generate_pairs(&cfg(111, sigma, s)).unwrap();
                scc(&t, &p)
            })
            .sum::<f64>()
            / reps as f64;
        let reference: f64 = (0..reps)
            .map(|s| {
                let (t, p) = reference_pairs(111, sigma, s);
                scc(&t, &p)
            })
            .sum::<f64>()
            / reps as f64;
        // Per-replication sd of SCC at n = 111 is below 0.1, so the mean of
        // 300 is within about 0.006; allow two such errors plus slack.
        assert!((lib - reference).abs() < 0.02, "sigma {sigma}: {lib} vs {reference}");
    }
}

#[test]
fn more_noise_means_lower_scc() {
    let sigmas = [5.0, 20.0, 60.0];
    let mut wins = 0;
    let reps = 60;
    for seed in 0..reps {
        let s: Vec<f64> = sigmas
            .iter()
            .map(|&sg| {
                let (t, p) = generate_pairs(&cfg(111, sg, seed)).unwrap();
                scc(&t, &p)
            })
            .collect();
        if s[0] > s[1] && s[1] > s[2] {
            wins += 1;
        }
    }
    // Sign test: far more ordered triples than chance (1 in 6) allows.
    assert!(wins >= 55, "{wins} of {reps}");
}

#[test]
fn skewed_preset_leans_high() {
    let mut c = cfg(4000, 0.0, 4);
    c.truth_distribution = TruthDistribution::Skewed;
    let (t, _) = generate_pairs(&c).unwrap();
    let mean = t.iter().sum::<i64>() as f64 / t.len() as f64;
    // Max of two uniforms on [51, 123] has mean 51 + 72 * 2/3 = 99.
    assert!((mean - 99.0).abs() < 1.5, "{mean}");
}

#[test]
fn corpus_shape() {
    let recs = generate_corpus(&cfg(111, 8.0, 42), DEFAULT_VOCAB).unwrap();
    assert_eq!(recs.len(), 111);
    let (t, p) = generate_pairs(&cfg(111, 8.0, 42)).unwrap();
    for (i, r) in recs.iter().enumerate() {
        let n = r.record.text.split_whitespace().count();
        assert!((MIN_WORDS..=MAX_WORDS).contains(&n), "{n}");
        assert_eq!(r.record.ground_truth_ryff, Some(t[i]));
        assert_eq!(r.assessment.total, p[i]);
        let parsed = assess_raw(&r.mock_output, &r.record.id, ValidationMode::Strict).unwrap();
        assert_eq!(parsed, r.assessment);
        let g = ground_keywords(&parsed, &r.record.text);
        assert_eq!(g.dropped_count(), 0);
    }
    let ids: std::collections::BTreeSet<_> = recs.iter().map(|r| &r.record.id).collect();
    assert_eq!(ids.len(), 111);
}

#[test]
fn alien_keywords_are_all_dropped() {
    let mut c = cfg(40, 8.0, 7);
    c.alien_fraction = 1.0;
    for r in generate_corpus(&c, DEFAULT_VOCAB).unwrap() {
        let g = ground_keywords(&r.assessment, &r.record.text);
        assert_eq!(g.grounded_count(), 0);
        let tokens = tokenize(&r.record.text);
        assert!(r.alien_keywords.iter().all(|k| !tokens.contains(k)));
    }
}

#[test]
fn malformation_mix_is_applied() {
    let mut c = cfg(400, 8.0, 9);
    c.malformation_mix = BTreeMap::from([(CorruptionClass::NoJson, 0.25), (CorruptionClass::Fenced, 0.25)]);
    let recs = generate_corpus(&c, DEFAULT_VOCAB).unwrap();
    let no_json = recs.iter().filter(|r| r.corruption == Some(CorruptionClass::NoJson)).count();
    assert!((60..=140).contains(&no_json), "{no_json}");
    for r in &recs {
        let parsed = assess_raw(&r.mock_output, &r.record.id, ValidationMode::Strict);
        match r.corruption {
            Some(CorruptionClass::NoJson) => assert_eq!(parsed.unwrap_err().class(), "no_json"),
            _ => assert_eq!(parsed.unwrap().total, r.assessment.total),
        }
    }
}

#[test]
fn corruption_classes() {
    let clean = r#"{"a": {"score": 3}, "b": [1, 2]}"#;
    assert!(corrupt_output(clean, CorruptionClass::Fenced, 1).unwrap().starts_with("```"));
    assert!(!corrupt_output(clean, CorruptionClass::NoJson, 1).unwrap().contains(['{', '}']));
    assert!(corrupt_output("not json", CorruptionClass::Fenced, 1).is_err());
    assert!("bogus".parse::<CorruptionClass>().is_err());
    assert_eq!("think_block".parse::<CorruptionClass>().unwrap(), CorruptionClass::ThinkBlock);
}

#[test]
fn bad_configs() {
    let mut c = cfg(10, 8.0, 1);
    c.truth_range = (10, 50);
    assert!(generate_pairs(&c).is_err());
    assert!(generate_pairs(&cfg(10, -1.0, 1)).is_err());
    assert!(generate_pairs(&cfg(0, 1.0, 1)).is_err());
    assert!(generate_corpus(&cfg(3, 1.0, 1), &[]).is_err());
    assert!(generate_corpus(&cfg(3, 1.0, 1), &["two words"]).is_err());
}
