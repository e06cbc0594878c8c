//! Dataset-difficulty metrics: per-class statistics, pairwise centroid
//! distances, the Gaussian error bounds L and U, the spread ratio D, and
//! the close-pair count T, plus the Pearson correlation used to relate
//! metrics to accuracy.
//!
//! All statistics are computed over the full dataset (train and test
//! combined) with population (divide-by-n) variance, so reports are
//! byte-stable for a given dataset.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::generator::Dataset;

pub const DEFAULT_T_THRESHOLD: f64 = 0.05;

/// Per-class centroid, pooled standard deviation, and prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub centroids: Vec<Vec<f64>>,
    pub sigmas: Vec<f64>,
    pub priors: Vec<f64>,
}

impl ClassStats {
    pub fn n_classes(&self) -> usize {
        self.centroids.len()
    }
}

/// Pairwise centroid distances: L2 (`d2`), dimension-averaged L1 (`d1`),
/// and the per-class nearest-neighbor distance `d_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub d2: Vec<Vec<f64>>,
    pub d1: Vec<Vec<f64>>,
    pub d_min: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub l: f64,
    pub u: f64,
    pub d: f64,
    pub t: usize,
    pub t_threshold: f64,
    pub n_classes: usize,
    pub n_features: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<ClassStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<DistanceTable>,
}

struct MomentAccumulator {
    counts: Vec<usize>,
    sums: Vec<Vec<f64>>,
    sq_sums: Vec<Vec<f64>>,
}

impl MomentAccumulator {
    fn new(m: usize, n: usize) -> Self {
        MomentAccumulator {
            counts: vec![0; m],
            sums: vec![vec![0.0; n]; m],
            sq_sums: vec![vec![0.0; n]; m],
        }
    }

    fn accumulate(mut self, samples: &[crate::generator::Sample]) -> Self {
        for sample in samples {
            let c = sample.label_index;
            self.counts[c] += 1;
            for (i, &v) in sample.values.iter().enumerate() {
                self.sums[c][i] += v;
                self.sq_sums[c][i] += v * v;
            }
        }
        self
    }

    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    fn merge(mut self, other: Self) -> Self {
        for c in 0..self.counts.len() {
            self.counts[c] += other.counts[c];
            for i in 0..self.sums[c].len() {
                self.sums[c][i] += other.sums[c][i];
                self.sq_sums[c][i] += other.sq_sums[c][i];
            }
        }
        self
    }
}

/// Chunk size for parallel moment accumulation. Chunk boundaries and the
/// merge order are fixed, so the result is identical across runs and
/// thread counts.
#[cfg(feature = "parallel")]
const STAT_CHUNK: usize = 4096;

fn gather_moments(dataset: &Dataset) -> MomentAccumulator {
    let m = dataset.n_classes;
    let n = dataset.n_features;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let partials: Vec<MomentAccumulator> = dataset
            .samples
            .par_chunks(STAT_CHUNK)
            .map(|chunk| MomentAccumulator::new(m, n).accumulate(chunk))
            .collect();
        return partials
            .into_iter()
            .fold(MomentAccumulator::new(m, n), MomentAccumulator::merge);
    }
    #[cfg(not(feature = "parallel"))]
    MomentAccumulator::new(m, n).accumulate(&dataset.samples)
}

/// Serial reference path for [`class_statistics`].
pub fn class_statistics_serial(dataset: &Dataset) -> Result<ClassStats> {
    let acc = MomentAccumulator::new(dataset.n_classes, dataset.n_features)
        .accumulate(&dataset.samples);
    finalize_statistics(dataset, acc)
}

/// Centroid, pooled sigma and prior per class over the whole dataset.
pub fn class_statistics(dataset: &Dataset) -> Result<ClassStats> {
    finalize_statistics(dataset, gather_moments(dataset))
}

fn finalize_statistics(dataset: &Dataset, acc: MomentAccumulator) -> Result<ClassStats> {
    let m = dataset.n_classes;
    let n = dataset.n_features;
    let MomentAccumulator { counts, sums, sq_sums } = acc;
    let total: usize = counts.iter().sum();
    let mut centroids = Vec::with_capacity(m);
    let mut sigmas = Vec::with_capacity(m);
    let mut priors = Vec::with_capacity(m);
    for c in 0..m {
        if counts[c] == 0 {
            return Err(Error::EmptyClass(c));
        }
        let k = counts[c] as f64;
        let centroid: Vec<f64> = sums[c].iter().map(|s| s / k).collect();
        // sigma_m^2 = mean over dimensions of per-dimension population variance
        let var_sum: f64 = (0..n)
            .map(|i| (sq_sums[c][i] / k - centroid[i] * centroid[i]).max(0.0))
            .sum();
        sigmas.push((var_sum / n as f64).sqrt());
        centroids.push(centroid);
        priors.push(k / total as f64);
    }
    Ok(ClassStats { centroids, sigmas, priors })
}

/// L2 and dimension-averaged L1 distances between all centroid pairs.
pub fn distance_table(stats: &ClassStats, n_features: usize) -> Result<DistanceTable> {
    let m = stats.n_classes();
    if m < 2 {
        return Err(Error::TooFewClasses(m));
    }
    let mut d2 = vec![vec![0.0; m]; m];
    let mut d1 = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            let (mut l2, mut l1) = (0.0, 0.0);
            for i in 0..n_features {
                let diff = stats.centroids[a][i] - stats.centroids[b][i];
                l2 += diff * diff;
                l1 += diff.abs();
            }
            let l2 = l2.sqrt();
            let l1 = l1 / n_features as f64;
            d2[a][b] = l2;
            d2[b][a] = l2;
            d1[a][b] = l1;
            d1[b][a] = l1;
        }
    }
    let d_min = (0..m)
        .map(|a| {
            (0..m)
                .filter(|&b| b != a)
                .map(|b| d2[a][b])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(DistanceTable { d2, d1, d_min })
}

/// Standard normal tail probability P(Z > x).
pub fn q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Q argument for a centroid gap under the pooled-sigma Gaussian model.
/// sigma = 0 with positive distance is treated as perfectly separable.
fn pair_q(distance: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        if distance > 0.0 {
            0.0
        } else {
            0.5
        }
    } else {
        q_function(distance / (2.0 * sigma))
    }
}

/// Lower bound on the error probability.
pub fn metric_l(stats: &ClassStats, distances: &DistanceTable) -> f64 {
    (0..stats.n_classes())
        .map(|m| stats.priors[m] * pair_q(distances.d_min[m], stats.sigmas[m]))
        .sum()
}

/// Upper bound on the error probability (union bound over all pairs).
pub fn metric_u(stats: &ClassStats, distances: &DistanceTable) -> f64 {
    let m = stats.n_classes();
    (0..m)
        .map(|a| {
            let inner: f64 = (0..m)
                .filter(|&b| b != a)
                .map(|b| pair_q(distances.d2[a][b], stats.sigmas[a]))
                .sum();
            stats.priors[a] * inner
        })
        .sum()
}

/// Mean over classes of sigma_m / d_min(m).
pub fn metric_d(stats: &ClassStats, distances: &DistanceTable) -> Result<f64> {
    let m = stats.n_classes();
    let mut acc = 0.0;
    for c in 0..m {
        let sigma = stats.sigmas[c];
        let dmin = distances.d_min[c];
        if sigma == 0.0 {
            continue;
        }
        if dmin == 0.0 {
            return Err(Error::CoincidentCentroids { class: c });
        }
        acc += sigma / dmin;
    }
    Ok(acc / m as f64)
}

/// Count of unordered class pairs whose d1 distance falls below the
/// threshold.
pub fn metric_t(distances: &DistanceTable, threshold: f64) -> usize {
    let m = distances.d1.len();
    let mut count = 0;
    for a in 0..m {
        for b in (a + 1)..m {
            if distances.d1[a][b] < threshold {
                count += 1;
            }
        }
    }
    count
}

/// Standard Pearson correlation coefficient.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::CorrelationLength(xs.len(), ys.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Full report for a dataset, optionally retaining the per-class tables.
pub fn metrics_report(
    dataset: &Dataset,
    threshold: f64,
    keep_tables: bool,
) -> Result<MetricsReport> {
    let stats = class_statistics(dataset)?;
    let distances = distance_table(&stats, dataset.n_features)?;
    let l = metric_l(&stats, &distances);
    let u = metric_u(&stats, &distances);
    let d = metric_d(&stats, &distances)?;
    let t = metric_t(&distances, threshold);
    Ok(MetricsReport {
        l,
        u,
        d,
        t,
        t_threshold: threshold,
        n_classes: dataset.n_classes,
        n_features: dataset.n_features,
        stats: keep_tables.then_some(stats),
        distances: keep_tables.then_some(distances),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{Dataset, GenerationConfig, Sample};

    fn toy_dataset(class_points: &[Vec<Vec<f64>>]) -> Dataset {
        let n = class_points[0][0].len();
        let mut samples = Vec::new();
        for (label, points) in class_points.iter().enumerate() {
            for p in points {
                samples.push(Sample { values: p.clone(), label_index: label });
            }
        }
        let total = samples.len();
        Dataset {
            n_features: n,
            n_classes: class_points.len(),
            samples,
            train_indices: (0..total).collect(),
            test_indices: vec![],
            config: GenerationConfig::baseline(),
        }
    }

    fn two_class(gap: f64, jitter: f64) -> Dataset {
        toy_dataset(&[
            vec![vec![-jitter, 0.0], vec![jitter, 0.0]],
            vec![vec![gap - jitter, 0.0], vec![gap + jitter, 0.0]],
        ])
    }

    #[test]
    fn class_statistics_hand_computed() {
        let ds = toy_dataset(&[vec![vec![0.0, 0.0], vec![2.0, 2.0]], vec![vec![5.0, 5.0]]]);
        let stats = class_statistics(&ds).unwrap();
        assert_eq!(stats.centroids[0], vec![1.0, 1.0]);
        assert!((stats.sigmas[0] - 1.0).abs() < 1e-12);
        // Singleton class: centroid is the sample, sigma 0.
        assert_eq!(stats.centroids[1], vec![5.0, 5.0]);
        assert_eq!(stats.sigmas[1], 0.0);
        assert!((stats.priors.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((stats.priors[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_class_is_an_error() {
        let mut ds = toy_dataset(&[vec![vec![0.0]], vec![vec![1.0]]]);
        ds.n_classes = 3;
        assert!(matches!(class_statistics(&ds), Err(Error::EmptyClass(2))));
    }

    #[test]
    fn distance_table_hand_computed() {
        let stats = ClassStats {
            centroids: vec![vec![0.0, 0.0], vec![3.0, 4.0]],
            sigmas: vec![1.0, 1.0],
            priors: vec![0.5, 0.5],
        };
        let table = distance_table(&stats, 2).unwrap();
        assert!((table.d2[0][1] - 5.0).abs() < 1e-12);
        assert!((table.d1[0][1] - 3.5).abs() < 1e-12);
        assert_eq!(table.d2[0][0], 0.0);
        assert_eq!(table.d_min, vec![5.0, 5.0]);
    }

    #[test]
    fn coincident_centroids_have_zero_distance() {
        let stats = ClassStats {
            centroids: vec![vec![1.0], vec![1.0]],
            sigmas: vec![0.5, 0.5],
            priors: vec![0.5, 0.5],
        };
        let table = distance_table(&stats, 1).unwrap();
        assert_eq!(table.d2[0][1], 0.0);
        assert_eq!(table.d1[0][1], 0.0);
    }

    #[test]
    fn too_few_classes_is_an_error() {
        let stats = ClassStats {
            centroids: vec![vec![0.0]],
            sigmas: vec![0.0],
            priors: vec![1.0],
        };
        assert!(matches!(distance_table(&stats, 1), Err(Error::TooFewClasses(1))));
    }

    #[test]
    fn q_function_reference_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(1.0) - 0.158655).abs() < 1e-6);
        assert_eq!(q_function(f64::INFINITY), 0.0);
        assert_eq!(q_function(f64::NEG_INFINITY), 1.0);
        // monotone decreasing spot check
        assert!(q_function(0.5) > q_function(0.6));
    }

    #[test]
    fn metric_l_closed_form_two_classes() {
        // gap 2, sigma 1 per class -> L = Q(1)
        let stats = ClassStats {
            centroids: vec![vec![0.0], vec![2.0]],
            sigmas: vec![1.0, 1.0],
            priors: vec![0.5, 0.5],
        };
        let table = distance_table(&stats, 1).unwrap();
        let l = metric_l(&stats, &table);
        assert!((l - q_function(1.0)).abs() < 1e-12);
        // M=2: U equals L exactly
        assert!((metric_u(&stats, &table) - l).abs() < 1e-15);
    }

    #[test]
    fn zero_sigma_means_zero_bounds() {
        let stats = ClassStats {
            centroids: vec![vec![0.0], vec![1.0]],
            sigmas: vec![0.0, 0.0],
            priors: vec![0.5, 0.5],
        };
        let table = distance_table(&stats, 1).unwrap();
        assert_eq!(metric_l(&stats, &table), 0.0);
        assert_eq!(metric_u(&stats, &table), 0.0);
        assert_eq!(metric_d(&stats, &table).unwrap(), 0.0);
    }

    #[test]
    fn coincident_centroids_l_is_half() {
        let stats = ClassStats {
            centroids: vec![vec![1.0], vec![1.0]],
            sigmas: vec![0.5, 0.5],
            priors: vec![0.5, 0.5],
        };
        let table = distance_table(&stats, 1).unwrap();
        assert!((metric_l(&stats, &table) - 0.5).abs() < 1e-12);
        assert!(matches!(
            metric_d(&stats, &table),
            Err(Error::CoincidentCentroids { .. })
        ));
    }

    #[test]
    fn metric_u_equidistant_three_classes_is_twice_l() {
        // Equilateral triangle, equal sigmas.
        let h = 3f64.sqrt() / 2.0;
        let stats = ClassStats {
            centroids: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]],
            sigmas: vec![0.3, 0.3, 0.3],
            priors: vec![1.0 / 3.0; 3],
        };
        let table = distance_table(&stats, 2).unwrap();
        let l = metric_l(&stats, &table);
        let u = metric_u(&stats, &table);
        assert!((u - 2.0 * l).abs() < 1e-12);
    }

    #[test]
    fn metric_d_hand_computed() {
        let stats = ClassStats {
            centroids: vec![vec![0.0], vec![2.0]],
            sigmas: vec![1.0, 1.0],
            priors: vec![0.5, 0.5],
        };
        let table = distance_table(&stats, 1).unwrap();
        assert!((metric_d(&stats, &table).unwrap() - 0.5).abs() < 1e-12);

        let stats2 = ClassStats {
            centroids: vec![vec![0.0], vec![2.0]],
            sigmas: vec![1.0, 3.0],
            priors: vec![0.5, 0.5],
        };
        assert!((metric_d(&stats2, &table).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_t_counts_unordered_pairs() {
        let stats = ClassStats {
            centroids: vec![vec![1.0], vec![1.0], vec![2.0]],
            sigmas: vec![0.1; 3],
            priors: vec![1.0 / 3.0; 3],
        };
        let table = distance_table(&stats, 1).unwrap();
        assert_eq!(metric_t(&table, 0.05), 1);
        assert_eq!(metric_t(&table, 2.0), 3);
        assert_eq!(metric_t(&table, 1e-12), 1);
    }

    #[test]
    fn metric_t_is_monotone_in_threshold() {
        let stats = ClassStats {
            centroids: vec![vec![0.0], vec![0.03], vec![0.2], vec![0.9]],
            sigmas: vec![0.1; 4],
            priors: vec![0.25; 4],
        };
        let table = distance_table(&stats, 1).unwrap();
        let mut prev = 0;
        for threshold in [0.0, 0.01, 0.05, 0.1, 0.5, 1.0] {
            let t = metric_t(&table, threshold);
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn pearson_reference_values() {
        assert!(
            (pearson_correlation(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs()
                < 1e-12
        );
        assert!(
            (pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs()
                < 1e-12
        );
        assert!(
            (pearson_correlation(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6)
                .abs()
                < 1e-12
        );
        assert!(pearson_correlation(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn closed_form_l_on_two_class_synthetic() {
        let ds = two_class(0.4, 0.1);
        let stats = class_statistics(&ds).unwrap();
        let table = distance_table(&stats, 2).unwrap();
        let l = metric_l(&stats, &table);
        // pooled sigma: per-dim variances (0.01, 0) -> sigma = sqrt(0.005)
        let sigma = (0.005f64).sqrt();
        let expected = q_function(0.4 / (2.0 * sigma));
        assert!((l - expected).abs() < 1e-9);
    }

    #[test]
    fn parallel_and_serial_statistics_agree() {
        let cfg = crate::generator::GenerationConfig::variant(3, 2, 0.01).unwrap();
        let ds = crate::generator::generate_dataset(&cfg).unwrap();
        let a = class_statistics(&ds).unwrap();
        let b = class_statistics_serial(&ds).unwrap();
        for c in 0..64 {
            assert!((a.sigmas[c] - b.sigmas[c]).abs() < 1e-9);
            assert!((a.priors[c] - b.priors[c]).abs() < 1e-12);
            for i in 0..ds.n_features {
                assert!((a.centroids[c][i] - b.centroids[c][i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn metrics_invariant_under_class_permutation_and_translation() {
        let base = toy_dataset(&[
            vec![vec![0.0, 0.1], vec![0.2, 0.0]],
            vec![vec![0.9, 1.0], vec![1.0, 0.8]],
            vec![vec![0.5, 0.5], vec![0.4, 0.6]],
        ]);
        let permuted = toy_dataset(&[
            vec![vec![0.5, 0.5], vec![0.4, 0.6]],
            vec![vec![0.0, 0.1], vec![0.2, 0.0]],
            vec![vec![0.9, 1.0], vec![1.0, 0.8]],
        ]);
        let shifted = toy_dataset(&[
            vec![vec![7.0, 7.1], vec![7.2, 7.0]],
            vec![vec![7.9, 8.0], vec![8.0, 7.8]],
            vec![vec![7.5, 7.5], vec![7.4, 7.6]],
        ]);
        for other in [&permuted, &shifted] {
            let a = metrics_report(&base, 0.05, false).unwrap();
            let b = metrics_report(other, 0.05, false).unwrap();
            assert!((a.l - b.l).abs() < 1e-12);
            assert!((a.u - b.u).abs() < 1e-12);
            assert!((a.d - b.d).abs() < 1e-12);
            assert_eq!(a.t, b.t);
        }
    }
}
