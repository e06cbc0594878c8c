//! Property tests over the generator and metric invariants.

use proptest::prelude::*;

use morsekit::generator::{
    apply_noise, decode_runs, generate_sample, normalize, GenerationConfig, RngSampler,
};
use morsekit::metrics::{
    class_statistics, distance_table, metric_l, metric_t, metric_u, q_function,
};
use morsekit::rng::{substream, StreamKind};

fn sampler(seed: u64, ordinal: u64) -> RngSampler<rand_chacha::ChaCha8Rng> {
    RngSampler::new(substream(seed, StreamKind::Sample, 0, ordinal))
}

proptest! {
    #[test]
    fn samples_are_quantized_and_bounded(seed in 0u64..1000, class in 0usize..64, sigma in 0u32..5) {
        let mut cfg = GenerationConfig::baseline();
        cfg.noise_sigma = f64::from(sigma);
        let codeword = &morsekit::codebook::all_codewords()[class];
        let sample = generate_sample(codeword, &cfg, &mut sampler(seed, 0));
        prop_assert_eq!(sample.values.len(), 64);
        prop_assert_eq!(sample.label_index, class);
        for &v in &sample.values {
            prop_assert!((0.0..=1.0).contains(&v));
            let t = v * 1000.0;
            prop_assert_eq!(t, t.round());
        }
    }

    #[test]
    fn noiseless_runs_respect_ranges(seed in 0u64..500, class in 0usize..64) {
        let cfg = GenerationConfig::baseline();
        let codeword = &morsekit::codebook::all_codewords()[class];
        let sample = generate_sample(codeword, &cfg, &mut sampler(seed, 1));
        let marks: Vec<usize> = decode_runs(&sample.values)
            .into_iter()
            .filter(|(m, _)| *m)
            .map(|(_, l)| l)
            .collect();
        prop_assert_eq!(marks.len(), codeword.symbols.len());
        for (len, symbol) in marks.iter().zip(&codeword.symbols) {
            match symbol {
                morsekit::codebook::SymbolKind::Dot => prop_assert!((1..=3).contains(len)),
                morsekit::codebook::SymbolKind::Dash => prop_assert!((4..=9).contains(len)),
            }
        }
    }

    #[test]
    fn noise_keeps_values_in_range(values in prop::collection::vec(0.0f64..=16.0, 1..64), sigma in 0.0f64..4.0, seed in 0u64..100) {
        let out = apply_noise(&values, sigma, 16.0, &mut sampler(seed, 2));
        for &v in &out {
            prop_assert!((0.0..=16.0).contains(&v));
        }
    }

    #[test]
    fn normalization_is_monotone(a in 0.0f64..=16.0, b in 0.0f64..=16.0) {
        let cfg = GenerationConfig::baseline();
        let out = normalize(&[a.min(b), a.max(b)], &cfg);
        prop_assert!(out[0] <= out[1]);
    }

    #[test]
    fn q_function_is_decreasing_and_bounded(x in -30.0f64..30.0, dx in 0.001f64..5.0) {
        let q = q_function(x);
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!(q_function(x + dx) <= q);
    }

    #[test]
    fn l_never_exceeds_u(
        centroids in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 2..8),
        sigma_seed in prop::collection::vec(0.0f64..0.5, 8),
    ) {
        let m = centroids.len();
        let stats = morsekit::metrics::ClassStats {
            centroids,
            sigmas: sigma_seed[..m].to_vec(),
            priors: vec![1.0 / m as f64; m],
        };
        let table = distance_table(&stats, 3).unwrap();
        prop_assert!(metric_l(&stats, &table) <= metric_u(&stats, &table) + 1e-12);
    }

    #[test]
    fn t_is_monotone_in_threshold(
        centroids in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 3..10),
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
    ) {
        let m = centroids.len();
        let stats = morsekit::metrics::ClassStats {
            centroids,
            sigmas: vec![0.1; m],
            priors: vec![1.0 / m as f64; m],
        };
        let table = distance_table(&stats, 2).unwrap();
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        prop_assert!(metric_t(&table, lo) <= metric_t(&table, hi));
    }
}

#[test]
fn metrics_track_noise_difficulty() {
    // More noise should not make the dataset look easier.
    let mut us = Vec::new();
    for sigma in [0u32, 2, 4] {
        let mut cfg = GenerationConfig::variant(1, sigma, 1.0).unwrap();
        cfg.per_class = 50;
        cfg.master_seed = 4;
        let ds = morsekit::generator::generate_dataset(&cfg).unwrap();
        let stats = class_statistics(&ds).unwrap();
        let table = distance_table(&stats, ds.n_features).unwrap();
        us.push(metric_u(&stats, &table));
    }
    assert!(us[0] <= us[1] && us[1] <= us[2], "U not monotone in noise: {:?}", us);
}
