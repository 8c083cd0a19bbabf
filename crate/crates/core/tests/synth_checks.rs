use macroscope::corpus::{filter_post, stream_posts, FilterConfig};
use macroscope::lexicon::{tokenize, Lexicon, LexiconMatcher};
use macroscope::signals::{GenderFilter, StratifiedCounter, WeekWindow};
use macroscope::synth::{generate_corpus, generate_survey, write_corpus, SurveyNoise, SynthConfig};

fn lexicons(cfg: &SynthConfig) -> Vec<Lexicon> {
    cfg.emotions
        .iter()
        .map(|e| Lexicon::parse(&e.name, &e.lexicon.join("\n")).unwrap())
        .collect()
}

#[test]
fn zero_amplitude_days_sit_within_three_binomial_sd() {
    let mut cfg = SynthConfig {
        days: 30,
        posts_per_day: 2000,
        seed: 5,
        ..SynthConfig::default()
    };
    for e in &mut cfg.emotions {
        e.amplitude = 0.0;
    }
    let matcher = LexiconMatcher::new(&lexicons(&cfg)).unwrap();
    let mut counters = vec![StratifiedCounter::default(); cfg.emotions.len()];
    generate_corpus(&cfg, |g| {
        let mask = matcher.match_mask(&tokenize(&g.post.text));
        for (i, c) in counters.iter_mut().enumerate() {
            c.record(g.post.date(0), g.post.author_gender, mask >> i & 1 == 1);
        }
        Ok(())
    })
    .unwrap();
    for (e, c) in cfg.emotions.iter().zip(&counters) {
        // Gender is drawn per post, so the agnostic share is Bernoulli with the mixture rate.
        let p = cfg.male_share * e.male_prevalence + (1.0 - cfg.male_share) * e.female_prevalence;
        let sd = (p * (1.0 - p) / cfg.posts_per_day as f64).sqrt();
        let signal = c.stratum(GenderFilter::All).to_signal(&e.name);
        assert_eq!(signal.len(), 30);
        for (d, v) in &signal.values {
            assert!((v - p).abs() < 3.0 * sd, "{} {d}: {v} vs {p} ± {sd}", e.name);
        }
    }
}

#[test]
fn decoys_are_exactly_the_filtered_share() {
    let cfg = SynthConfig {
        days: 10,
        posts_per_day: 1000,
        decoy_fraction: 0.1,
        seed: 6,
        ..SynthConfig::default()
    };
    let filter = FilterConfig::default();
    let mut mislabelled = 0;
    generate_corpus(&cfg, |g| {
        mislabelled += (filter_post(g.post, &filter) == g.decoy) as usize;
        Ok(())
    })
    .unwrap();
    assert_eq!(mislabelled, 0);

    let mut buf = Vec::new();
    write_corpus(&cfg, &mut buf, None).unwrap();
    let mut kept = 0u64;
    let stats = stream_posts(buf.as_slice(), &filter, |_| kept += 1, |e| panic!("{e}")).unwrap();
    assert_eq!(stats.parsed, 10_000);
    assert_eq!(stats.kept, 9_000);
    assert_eq!(kept, 9_000);
}

#[test]
fn survey_noise_has_binomial_spread() {
    let cfg = SynthConfig {
        days: 7 * 400,
        posts_per_day: 1,
        seed: 8,
        ..SynthConfig::default()
    };
    let truth = generate_corpus(&cfg, |_| Ok(())).unwrap();
    let anchors = cfg.weekly_anchors();
    let window = WeekWindow::default();
    let survey = generate_survey(&truth, &anchors, window, SurveyNoise { respondents: Some(2000), seed: 9 }).unwrap();
    for s in &survey {
        let planted = truth.weekly_population(&s.emotion, &anchors, window).unwrap();
        let resid: Vec<f64> = s.percent.iter().zip(&planted).map(|(a, p)| a - 100.0 * p).collect();
        let n = resid.len() as f64;
        let mean = resid.iter().sum::<f64>() / n;
        let sd = (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let expected = 100.0 * (planted.iter().map(|p| p * (1.0 - p)).sum::<f64>() / n / 2000.0).sqrt();
        // 400 waves give the sample sd a relative standard error near 3.5%.
        assert!((sd / expected - 1.0).abs() < 0.15, "{}: {sd} vs {expected}", s.emotion);
        assert!(mean.abs() < 4.0 * expected / n.sqrt(), "{}: bias {mean}", s.emotion);
    }
}

#[test]
fn planted_prevalence_stays_in_open_unit_interval() {
    let mut cfg = SynthConfig {
        days: 365,
        posts_per_day: 1,
        innovation_sd: 3.0,
        ..SynthConfig::default()
    };
    cfg.emotions[0].amplitude = 0.029;
    let truth = generate_corpus(&cfg, |_| Ok(())).unwrap();
    for e in &truth.emotions {
        for v in e.male.iter().chain(&e.female).chain(&e.population) {
            assert!(*v > 0.0 && *v < 1.0);
        }
    }
}
