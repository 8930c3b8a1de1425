//! Monte Carlo validation of the mean-convergence rate: drawing `B`
//! diagrams uniformly with replacement from a flat family and averaging
//! them contracts toward the population mean like `sigma^2 / B`.
//!
//! Every random draw comes from its own counter-keyed stream, so results
//! are reproducible for a given seed and independent of the order in which
//! sample sizes or trials are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{DiagramEntry, PersistenceDiagram};
use crate::grouping::{mean_diagram, mean_point, variance_closed_form, Grouping};
use crate::wasserstein::w2;
use crate::{Error, Result};

/// Experiment parameters: which sample sizes to probe, how many trials per
/// size, and the master seed.
#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// One row of the experiment: Monte Carlo estimate of
/// `E[W2^2(sample mean, population mean)]` at sample size `b`, its
/// standard error, and the theoretical ceiling `sigma^2 / b`.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub b: usize,
    pub trials: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub seed: u64,
    pub per_trial: Vec<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the generator for one `(seed, b, trial)` cell.
fn trial_rng(seed: u64, b: usize, trial: usize) -> ChaCha8Rng {
    let mut state = seed;
    let mut h = splitmix64(&mut state);
    state ^= b as u64;
    h ^= splitmix64(&mut state);
    state ^= trial as u64;
    h ^= splitmix64(&mut state);
    ChaCha8Rng::seed_from_u64(h)
}

/// Sums with pairwise recursion; deterministic and resistant to the error
/// accumulation of a running sum.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Draws `b` column indices uniformly with replacement from `0..l`.
pub fn sample_columns(l: usize, b: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..b).map(|_| rng.gen_range(0..l)).collect()
}

/// Mean diagram of a with-replacement column sample: each population row is
/// restricted to the sampled columns (with multiplicity) and averaged with
/// diagonal counting over the sample size.
pub fn sample_induced_mean(
    grouping: &Grouping,
    columns: &[usize],
) -> Result<PersistenceDiagram> {
    if columns.is_empty() {
        return Err(Error::Arity {
            context: "sampled columns".into(),
            expected: 1,
            got: 0,
        });
    }
    let l = grouping.num_columns();
    for &j in columns {
        if j >= l {
            return Err(Error::IndexOutOfBounds {
                context: "sampled column".into(),
                index: j,
                len: l,
            });
        }
    }
    let mut points = Vec::new();
    for i in 0..grouping.num_rows() {
        let entries: Vec<DiagramEntry> = columns.iter().map(|&j| grouping.entry(i, j)).collect();
        if let DiagramEntry::Point(p) = mean_point(&entries, columns.len())? {
            points.push(p);
        }
    }
    Ok(PersistenceDiagram::new(points))
}

/// Runs the sampling experiment against a population grouping. For each
/// sample size, each trial draws columns from its own keyed stream,
/// averages them, and records the squared distance to the population mean.
pub fn convergence_experiment(
    grouping: &Grouping,
    config: &ConvergenceConfig,
) -> Result<Vec<ConvergenceReport>> {
    if config.trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    if config.sample_sizes.is_empty() || config.sample_sizes.contains(&0) {
        return Err(Error::Precondition(
            "sample sizes must be nonempty and positive".into(),
        ));
    }
    let l = grouping.num_columns();
    if l == 0 {
        return Err(Error::Arity {
            context: "population columns".into(),
            expected: 1,
            got: 0,
        });
    }
    let population_mean = mean_diagram(grouping)?;
    let sigma2 = variance_closed_form(grouping);
    let mut reports = Vec::with_capacity(config.sample_sizes.len());
    for &b in &config.sample_sizes {
        let per_trial: Vec<f64> = (0..config.trials)
            .map(|t| {
                let mut rng = trial_rng(config.seed, b, t);
                let columns = sample_columns(l, b, &mut rng);
                let sample_mean = sample_induced_mean(grouping, &columns)?;
                let d = w2(&sample_mean, &population_mean);
                Ok(d * d)
            })
            .collect::<Result<_>>()?;
        let n = per_trial.len() as f64;
        let estimate = pairwise_sum(&per_trial) / n;
        let std_error = if per_trial.len() > 1 {
            let sq_dev: Vec<f64> = per_trial.iter().map(|x| (x - estimate).powi(2)).collect();
            (pairwise_sum(&sq_dev) / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        reports.push(ConvergenceReport {
            b,
            trials: config.trials,
            estimate,
            std_error,
            bound: sigma2 / b as f64,
            seed: config.seed,
            per_trial,
        });
    }
    Ok(reports)
}

/// Least-squares line through `(ln B, ln estimate)`.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Slope of the log-log fit; `-1` is the `sigma^2 / B` rate.
    pub slope: f64,
    pub intercept: f64,
}

/// Fits the decay rate from at least three reports with positive estimates
/// at distinct sample sizes.
pub fn rate_fit(reports: &[ConvergenceReport]) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in reports {
        if r.estimate <= 0.0 {
            return Err(Error::Precondition(format!(
                "log-log fit needs positive estimates; sample size {} gave {}",
                r.b, r.estimate
            )));
        }
        xs.push((r.b as f64).ln());
        ys.push(r.estimate.ln());
    }
    let mut distinct = xs.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientRatePoints { got: distinct.len() });
    }
    let n = xs.len() as f64;
    let xbar = pairwise_sum(&xs) / n;
    let ybar = pairwise_sum(&ys) / n;
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        slope,
        intercept: ybar - slope * xbar,
    })
}

/// Serializes reports as CSV with a fixed header, one row per sample size.
/// Floats use shortest round-trip formatting, so equal seeds produce
/// byte-identical output.
pub fn reports_to_csv(reports: &[ConvergenceReport]) -> String {
    let mut out = String::from("B,trials,estimate,std_error,bound,seed\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.b, r.trials, r.estimate, r.std_error, r.bound, r.seed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frechet::certify_unique_mean;

    fn one_point_family() -> Vec<PersistenceDiagram> {
        vec![
            PersistenceDiagram::from_coords(&[[0.0, 10.0]]).unwrap(),
            PersistenceDiagram::from_coords(&[[1.0, 10.0]]).unwrap(),
            PersistenceDiagram::from_coords(&[[0.0, 11.0]]).unwrap(),
        ]
    }

    fn certified_grouping() -> Grouping {
        certify_unique_mean(&one_point_family())
            .unwrap()
            .expect("family is flat")
            .grouping
    }

    #[test]
    fn single_column_sample_reproduces_the_member() {
        let g = certified_grouping();
        for j in 0..3 {
            let m = sample_induced_mean(&g, &[j]).unwrap();
            assert_eq!(m, one_point_family()[j]);
        }
    }

    #[test]
    fn two_column_sample_averages_the_row() {
        let g = certified_grouping();
        let m = sample_induced_mean(&g, &[0, 1]).unwrap();
        assert_eq!(
            m,
            PersistenceDiagram::from_coords(&[[0.5, 10.0]]).unwrap()
        );
        // Repeats count with multiplicity.
        let m = sample_induced_mean(&g, &[1, 1]).unwrap();
        assert_eq!(m, one_point_family()[1]);
    }

    #[test]
    fn sample_validation() {
        let g = certified_grouping();
        assert!(sample_induced_mean(&g, &[]).is_err());
        assert!(sample_induced_mean(&g, &[3]).is_err());
    }

    #[test]
    fn estimates_respect_the_variance_over_b_ceiling() {
        let g = certified_grouping();
        let config = ConvergenceConfig {
            sample_sizes: vec![1, 2, 4, 8, 16],
            trials: 256,
            seed: 7,
        };
        let reports = convergence_experiment(&g, &config).unwrap();
        let sigma2 = variance_closed_form(&g);
        assert!((sigma2 - 4.0 / 9.0).abs() < 1e-12);
        for r in &reports {
            assert!((r.bound - sigma2 / r.b as f64).abs() < 1e-15);
            assert!(
                r.estimate <= r.bound + 3.0 * r.std_error,
                "B = {}: estimate {} exceeds bound {} + 3 * {}",
                r.b,
                r.estimate,
                r.bound,
                r.std_error
            );
            assert!(r.estimate >= 0.0);
        }
        // The B = 1 estimate is an average of exact member distances, so it
        // sits close to sigma^2 itself.
        assert!((reports[0].estimate - sigma2).abs() < 5.0 * reports[0].std_error + 0.1);
    }

    #[test]
    fn equal_seeds_reproduce_and_order_does_not_matter() {
        let g = certified_grouping();
        let forward = convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![1, 2, 4],
                trials: 32,
                seed: 99,
            },
        )
        .unwrap();
        let again = convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![1, 2, 4],
                trials: 32,
                seed: 99,
            },
        )
        .unwrap();
        let reversed = convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![4, 2, 1],
                trials: 32,
                seed: 99,
            },
        )
        .unwrap();
        assert_eq!(reports_to_csv(&forward), reports_to_csv(&again));
        for r in &forward {
            let mirror = reversed.iter().find(|m| m.b == r.b).unwrap();
            assert_eq!(r.per_trial, mirror.per_trial);
        }
        let other_seed = convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![1, 2, 4],
                trials: 32,
                seed: 100,
            },
        )
        .unwrap();
        assert_ne!(forward[0].per_trial, other_seed[0].per_trial);
    }

    #[test]
    fn rate_fit_recovers_a_pure_power_law() {
        let synthetic: Vec<ConvergenceReport> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&b| ConvergenceReport {
                b,
                trials: 1,
                estimate: 0.75 / b as f64,
                std_error: 0.0,
                bound: 0.75 / b as f64,
                seed: 0,
                per_trial: vec![],
            })
            .collect();
        let fit = rate_fit(&synthetic).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!((fit.intercept - 0.75_f64.ln()).abs() < 1e-9);
        assert!(matches!(
            rate_fit(&synthetic[..2]),
            Err(Error::InsufficientRatePoints { got: 2 })
        ));
    }

    #[test]
    fn csv_has_the_fixed_header_and_one_row_per_size() {
        let g = certified_grouping();
        let reports = convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![2, 8],
                trials: 16,
                seed: 5,
            },
        )
        .unwrap();
        let csv = reports_to_csv(&reports);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "B,trials,estimate,std_error,bound,seed");
        assert_eq!(lines.len(), 3);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "2");
        assert_eq!(fields[1], "16");
        assert_eq!(fields[5], "5");
        let est: f64 = fields[2].parse().unwrap();
        assert!((est - reports[0].estimate).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let g = certified_grouping();
        assert!(convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![1],
                trials: 0,
                seed: 0,
            },
        )
        .is_err());
        assert!(convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![],
                trials: 4,
                seed: 0,
            },
        )
        .is_err());
        assert!(convergence_experiment(
            &g,
            &ConvergenceConfig {
                sample_sizes: vec![1, 0],
                trials: 4,
                seed: 0,
            },
        )
        .is_err());
    }
}
