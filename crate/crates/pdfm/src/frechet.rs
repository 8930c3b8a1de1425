//! Fréchet means of diagram families: the Fréchet functional, an
//! alternating mean-finding algorithm, an exhaustive optimal-grouping
//! oracle, and unique-mean certification via flatness.
//!
//! The Fréchet functional `F(Y) = (1/L) * sum_j W2^2(Y, D_j)` is minimized
//! over diagrams; its minimum equals the minimum variance over groupings of
//! the family. The alternating algorithm repeatedly matches the current
//! candidate against every diagram, reads off the induced grouping, and
//! replaces the candidate by the grouping's mean; it stops when the
//! grouping repeats. Each step never increases the variance, but the
//! fixed point reached is only a *local* minimum in general — flatness is
//! what upgrades it to the unique global one.

use crate::diagram::PersistenceDiagram;
use crate::grouping::{
    check_flatness, find_flat_grouping, mean_diagram, variance_definitional, FlatnessReport,
    Grouping,
};
use crate::wasserstein::{brute_force_w2_with_cap, w2, w2_distance, MatchEnd, DEFAULT_W2_BRUTE_CAP};
use crate::{Error, Result};

/// Mean squared 2-Wasserstein distance from a candidate to the family.
pub fn frechet_function(
    candidate: &PersistenceDiagram,
    diagrams: &[PersistenceDiagram],
) -> Result<f64> {
    if diagrams.is_empty() {
        return Err(Error::Arity {
            context: "diagram family".into(),
            expected: 1,
            got: 0,
        });
    }
    let sum: f64 = diagrams
        .iter()
        .map(|d| {
            let dist = w2(candidate, d);
            dist * dist
        })
        .sum();
    Ok(sum / diagrams.len() as f64)
}

/// Starting point for the alternating algorithm.
#[derive(Debug, Clone)]
pub enum TurnerInit {
    /// Start from the family member with this index.
    Index(usize),
    /// Start from an arbitrary diagram.
    Diagram(PersistenceDiagram),
}

impl Default for TurnerInit {
    fn default() -> Self {
        TurnerInit::Index(0)
    }
}

/// Outcome of the alternating algorithm.
#[derive(Debug, Clone)]
pub struct FrechetResult {
    /// The candidate mean at termination.
    pub mean: PersistenceDiagram,
    /// The grouping induced by the final matchings.
    pub grouping: Grouping,
    /// Variance of the final grouping (the Fréchet functional value at the
    /// mean when converged).
    pub variance: f64,
    /// Variance of the grouping at each iteration; non-increasing.
    pub variance_trace: Vec<f64>,
    /// Number of match-and-average rounds performed.
    pub iterations: usize,
    /// Whether the grouping repeated before `max_iters` ran out.
    pub converged: bool,
    /// Whether the final grouping is flat, certifying the unique Fréchet
    /// mean.
    pub unique_certified: bool,
    /// Flatness data for the final grouping.
    pub certificate: FlatnessReport,
    /// Human-readable description of the starting point.
    pub init_description: String,
    /// Whether any matching step had tied optima: `Some(true)` when a tie
    /// was observed, `Some(false)` when every step was checked and unique,
    /// `None` when some steps were too large to check exhaustively.
    pub tie_flag: Option<bool>,
}

/// Runs the alternating match-and-average algorithm.
///
/// Each round matches the current candidate optimally against every family
/// member, assembles the induced grouping (candidate points become rows;
/// family points matched to the candidate's diagonal get rows of their
/// own), and replaces the candidate with the grouping's mean diagram. The
/// run stops as soon as the induced grouping repeats, or after `max_iters`
/// rounds with `converged = false`.
pub fn turner_mean(
    diagrams: &[PersistenceDiagram],
    init: TurnerInit,
    max_iters: usize,
) -> Result<FrechetResult> {
    if diagrams.is_empty() {
        return Err(Error::Arity {
            context: "diagram family".into(),
            expected: 1,
            got: 0,
        });
    }
    if max_iters == 0 {
        return Err(Error::Precondition("max_iters must be at least 1".into()));
    }
    let (mut current, init_description) = match init {
        TurnerInit::Index(i) => {
            let d = diagrams.get(i).ok_or_else(|| Error::IndexOutOfBounds {
                context: "initial diagram".into(),
                index: i,
                len: diagrams.len(),
            })?;
            (d.clone(), format!("diagram[{i}]"))
        }
        TurnerInit::Diagram(d) => (d, "custom diagram".to_string()),
    };

    let l = diagrams.len();
    let mut prev_canonical: Option<Vec<Vec<Option<usize>>>> = None;
    let mut last: Option<Grouping> = None;
    let mut variance_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut saw_tie = false;
    let mut all_checked = true;

    while iterations < max_iters {
        iterations += 1;

        // One row per candidate point, plus rows for family points matched
        // to the candidate's diagonal.
        let mut rows: Vec<Vec<Option<usize>>> = vec![vec![None; l]; current.len()];
        for (j, d) in diagrams.iter().enumerate() {
            let matching = w2_distance(&current, d);
            for (left, right) in matching.pairs() {
                match (left, right) {
                    (MatchEnd::Point { index: r, .. }, MatchEnd::Point { index: p, .. }) => {
                        rows[*r][j] = Some(*p);
                    }
                    (MatchEnd::Diagonal, MatchEnd::Point { index: p, .. }) => {
                        let mut row = vec![None; l];
                        row[j] = Some(*p);
                        rows.push(row);
                    }
                    _ => {}
                }
            }
            if current.len() + d.len() <= DEFAULT_W2_BRUTE_CAP {
                match brute_force_w2_with_cap(&current, d, DEFAULT_W2_BRUTE_CAP) {
                    Ok(bf) if bf.optima_count > 1 => saw_tie = true,
                    Ok(_) => {}
                    Err(_) => all_checked = false,
                }
            } else {
                all_checked = false;
            }
        }

        let grouping = Grouping::new(diagrams.to_vec(), rows)?;
        variance_trace.push(variance_definitional(&grouping));
        let canonical = grouping.canonical_rows();
        let repeated = prev_canonical.as_ref() == Some(&canonical);
        current = mean_diagram(&grouping)?;
        prev_canonical = Some(canonical);
        last = Some(grouping);
        if repeated {
            converged = true;
            break;
        }
    }

    let grouping = last.expect("at least one iteration ran");
    let variance = variance_definitional(&grouping);
    let certificate = check_flatness(&grouping);
    let tie_flag = if saw_tie {
        Some(true)
    } else if all_checked {
        Some(false)
    } else {
        None
    };
    Ok(FrechetResult {
        mean: current,
        unique_certified: certificate.flat,
        certificate,
        grouping,
        variance,
        variance_trace,
        iterations,
        converged,
        init_description,
        tie_flag,
    })
}

/// Default cap on the pooled point count for
/// [`brute_force_optimal_grouping`].
pub const DEFAULT_GROUPING_BRUTE_CAP: usize = 9;

/// Largest family size the grouping oracle will enumerate.
pub const GROUPING_BRUTE_MAX_FAMILY: usize = 3;

/// Result of exhaustively enumerating every grouping of a family.
#[derive(Debug, Clone)]
pub struct OptimalGroupingSearch {
    /// A minimum-variance grouping (first found in enumeration order).
    pub grouping: Grouping,
    pub variance: f64,
    /// Number of distinct groupings (up to row permutation) within 1e-12 of
    /// the minimum variance.
    pub optima_count: usize,
    /// Total number of distinct groupings enumerated.
    pub enumerated: usize,
}

/// Enumerates every grouping of the family and minimizes variance
/// exhaustively. Groupings are generated as set partitions of the pooled
/// points (at most one point per diagram per row), so each grouping is
/// visited exactly once up to row permutation. Independent of the
/// alternating algorithm; used as a test oracle.
pub fn brute_force_optimal_grouping(
    diagrams: &[PersistenceDiagram],
) -> Result<OptimalGroupingSearch> {
    brute_force_optimal_grouping_with_cap(diagrams, DEFAULT_GROUPING_BRUTE_CAP)
}

/// [`brute_force_optimal_grouping`] with an explicit pooled-point cap.
pub fn brute_force_optimal_grouping_with_cap(
    diagrams: &[PersistenceDiagram],
    cap: usize,
) -> Result<OptimalGroupingSearch> {
    if diagrams.is_empty() {
        return Err(Error::Arity {
            context: "diagram family".into(),
            expected: 1,
            got: 0,
        });
    }
    if diagrams.len() > GROUPING_BRUTE_MAX_FAMILY {
        return Err(Error::CapExceeded {
            what: format!("family size {}", diagrams.len()),
            cap: GROUPING_BRUTE_MAX_FAMILY,
        });
    }
    let pooled: Vec<(usize, usize)> = diagrams
        .iter()
        .enumerate()
        .flat_map(|(j, d)| (0..d.len()).map(move |p| (j, p)))
        .collect();
    if pooled.len() > cap {
        return Err(Error::CapExceeded {
            what: format!("pooled point count {}", pooled.len()),
            cap,
        });
    }

    let l = diagrams.len();
    let lf = l as f64;
    // Block cost under the closed-form variance: depends only on the points
    // in the block (which columns they occupy does not matter).
    let block_cost = |block: &[(usize, usize)]| -> f64 {
        let s = block.len();
        let pts: Vec<_> = block
            .iter()
            .map(|&(j, p)| diagrams[j].points()[p])
            .collect();
        let mut pair = 0.0;
        let mut proj_pair = 0.0;
        let mut diag2 = 0.0;
        for a in 0..s {
            diag2 += pts[a].diagonal_distance2();
            for b in a + 1..s {
                pair += pts[a].dist2(&pts[b]);
                let pa = pts[a].diagonal_projection();
                let pb = pts[b].diagonal_projection();
                let db = pa[0] - pb[0];
                let dd = pa[1] - pb[1];
                proj_pair += db * db + dd * dd;
            }
        }
        // Column pairs split into point-point, point-diagonal (L - s per
        // point), and diagonal-diagonal (zero) contributions.
        (pair + (lf - s as f64) * diag2) / (lf * lf)
            + (lf - s as f64) / (lf * lf * s as f64) * proj_pair
    };

    struct Search<'a> {
        pooled: &'a [(usize, usize)],
        costs: Vec<f64>,
        best_cost: f64,
        best_blocks: Option<Vec<Vec<(usize, usize)>>>,
    }

    impl Search<'_> {
        #[allow(clippy::type_complexity)]
        fn rec(
            &mut self,
            next: usize,
            blocks: &mut Vec<Vec<(usize, usize)>>,
            acc_costs: &mut Vec<f64>,
            block_cost: &dyn Fn(&[(usize, usize)]) -> f64,
        ) {
            if next == self.pooled.len() {
                let total: f64 = acc_costs.iter().sum();
                self.costs.push(total);
                if total < self.best_cost {
                    self.best_cost = total;
                    self.best_blocks = Some(blocks.clone());
                }
                return;
            }
            let (j, p) = self.pooled[next];
            // Restricted-growth enumeration: place into each existing
            // compatible block, or open a new one. Each set partition is
            // produced exactly once.
            for b in 0..blocks.len() {
                if blocks[b].iter().all(|&(jj, _)| jj != j) {
                    blocks[b].push((j, p));
                    let saved = acc_costs[b];
                    acc_costs[b] = block_cost(&blocks[b]);
                    self.rec(next + 1, blocks, acc_costs, block_cost);
                    acc_costs[b] = saved;
                    blocks[b].pop();
                }
            }
            blocks.push(vec![(j, p)]);
            acc_costs.push(block_cost(blocks.last().unwrap()));
            self.rec(next + 1, blocks, acc_costs, block_cost);
            acc_costs.pop();
            blocks.pop();
        }
    }

    let mut search = Search {
        pooled: &pooled,
        costs: Vec::new(),
        best_cost: f64::INFINITY,
        best_blocks: None,
    };
    if pooled.is_empty() {
        // All-empty family: the unique grouping is empty with variance 0.
        let grouping = Grouping::new(diagrams.to_vec(), Vec::new())?;
        return Ok(OptimalGroupingSearch {
            grouping,
            variance: 0.0,
            optima_count: 1,
            enumerated: 1,
        });
    }
    search.rec(0, &mut Vec::new(), &mut Vec::new(), &block_cost);

    let best_blocks = search.best_blocks.expect("enumeration is nonempty");
    let rows: Vec<Vec<Option<usize>>> = best_blocks
        .iter()
        .map(|block| {
            let mut row = vec![None; l];
            for &(j, p) in block {
                row[j] = Some(p);
            }
            row
        })
        .collect();
    let grouping = Grouping::new(diagrams.to_vec(), rows)?;
    let variance = variance_definitional(&grouping);
    let optima_count = search
        .costs
        .iter()
        .filter(|&&c| c <= search.best_cost + 1e-12)
        .count();
    Ok(OptimalGroupingSearch {
        grouping,
        variance,
        optima_count,
        enumerated: search.costs.len(),
    })
}

/// A unique Fréchet mean together with the flat grouping that certifies it.
#[derive(Debug, Clone)]
pub struct CertifiedMean {
    pub mean: PersistenceDiagram,
    pub grouping: Grouping,
    pub certificate: FlatnessReport,
}

/// Searches for a flat grouping; when found, its mean is the unique Fréchet
/// mean of the family and is returned with the certificate.
pub fn certify_unique_mean(diagrams: &[PersistenceDiagram]) -> Result<Option<CertifiedMean>> {
    let grouping = match find_flat_grouping(diagrams) {
        Some(g) => g,
        None => return Ok(None),
    };
    let certificate = check_flatness(&grouping);
    debug_assert!(certificate.flat);
    let mean = mean_diagram(&grouping)?;
    Ok(Some(CertifiedMean {
        mean,
        grouping,
        certificate,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(coords: &[[f64; 2]]) -> PersistenceDiagram {
        PersistenceDiagram::from_coords(coords).unwrap()
    }

    fn square() -> Vec<PersistenceDiagram> {
        vec![
            diag(&[[1.0, 4.0], [3.0, 6.0]]),
            diag(&[[1.0, 6.0], [3.0, 4.0]]),
        ]
    }

    fn one_point_family() -> Vec<PersistenceDiagram> {
        vec![
            diag(&[[0.0, 10.0]]),
            diag(&[[1.0, 10.0]]),
            diag(&[[0.0, 11.0]]),
        ]
    }

    #[test]
    fn frechet_function_at_the_square_candidate() {
        let candidate = diag(&[[2.0, 4.0], [2.0, 6.0]]);
        let f = frechet_function(&candidate, &square()).unwrap();
        assert!((f - 2.0).abs() < 1e-12);
        assert!(frechet_function(&candidate, &[]).is_err());
    }

    #[test]
    fn square_has_exactly_two_optimal_groupings() {
        let search = brute_force_optimal_grouping(&square()).unwrap();
        assert!((search.variance - 2.0).abs() < 1e-12);
        assert_eq!(search.optima_count, 2);
    }

    #[test]
    fn near_diagonal_family_sends_everything_to_the_diagonal() {
        // All four points have persistence 1; the optimal grouping keeps
        // every point alone in its row, paired with the diagonal.
        let ds = vec![
            diag(&[[1.0, 2.0], [4.0, 5.0]]),
            diag(&[[2.0, 3.0], [5.0, 6.0]]),
        ];
        let search = brute_force_optimal_grouping(&ds).unwrap();
        assert!((search.variance - 0.5).abs() < 1e-12);
        for i in 0..search.grouping.num_rows() {
            assert!(search.grouping.row_points(i).len() <= 1);
        }
        // Each singleton row averages its point with the diagonal, so the
        // mean keeps four points pulled halfway to their projections.
        let mean = mean_diagram(&search.grouping).unwrap();
        assert_eq!(
            mean,
            diag(&[[1.25, 1.75], [4.25, 4.75], [2.25, 2.75], [5.25, 5.75]])
        );
    }

    #[test]
    fn grouping_oracle_enforces_its_caps() {
        let big = vec![diag(&[[0.0, 1.0]; 10]), PersistenceDiagram::empty()];
        assert!(matches!(
            brute_force_optimal_grouping(&big),
            Err(Error::CapExceeded { .. })
        ));
        let wide = vec![diag(&[[0.0, 1.0]]); 4];
        assert!(matches!(
            brute_force_optimal_grouping(&wide),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn alternating_algorithm_converges_on_the_one_point_family() {
        let ds = one_point_family();
        for init in 0..3 {
            let r = turner_mean(&ds, TurnerInit::Index(init), 50).unwrap();
            assert!(r.converged, "init {init} did not converge");
            assert!(r.unique_certified);
            assert_eq!(r.mean, diag(&[[1.0 / 3.0, 31.0 / 3.0]]));
            assert!((r.variance - 4.0 / 9.0).abs() < 1e-12);
            assert_eq!(r.tie_flag, Some(false));
        }
    }

    #[test]
    fn alternating_algorithm_detects_ties_on_the_square() {
        let r = turner_mean(&square(), TurnerInit::default(), 50).unwrap();
        assert!(r.converged);
        assert!((r.variance - 2.0).abs() < 1e-12);
        assert!(!r.unique_certified);
        assert_eq!(r.tie_flag, Some(true));
        // The fixed point is one of the two optimal groupings.
        let search = brute_force_optimal_grouping(&square()).unwrap();
        assert!((r.variance - search.variance).abs() < 1e-12);
    }

    #[test]
    fn variance_trace_is_non_increasing() {
        let ds = vec![
            diag(&[[0.0, 10.0], [20.0, 30.0]]),
            diag(&[[1.0, 10.0], [21.0, 30.0]]),
            diag(&[[0.0, 11.0], [20.0, 31.0]]),
        ];
        for init in 0..3 {
            let r = turner_mean(&ds, TurnerInit::Index(init), 50).unwrap();
            for w in r.variance_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "trace increased: {:?}", r.variance_trace);
            }
            assert!(r.converged);
        }
    }

    #[test]
    fn converged_mean_rematches_at_the_grouping_cost() {
        let ds = one_point_family();
        let r = turner_mean(&ds, TurnerInit::Index(1), 50).unwrap();
        assert!(r.converged);
        let l = r.grouping.num_columns();
        for (j, d) in ds.iter().enumerate() {
            // Cost induced by the grouping: row means against column j.
            let mut induced = 0.0;
            for i in 0..r.grouping.num_rows() {
                let mean =
                    crate::grouping::mean_point(&r.grouping.row_entries(i), l).unwrap();
                induced += r.grouping.entry(i, j).dist2(&mean);
            }
            let direct = w2(&r.mean, d).powi(2);
            assert!(
                (induced - direct).abs() < 1e-9,
                "column {j}: induced {induced} vs direct {direct}"
            );
        }
    }

    #[test]
    fn single_diagram_family_returns_itself() {
        let ds = vec![diag(&[[0.0, 3.0], [5.0, 9.0]])];
        let r = turner_mean(&ds, TurnerInit::default(), 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.mean, ds[0]);
        assert!(r.variance.abs() < 1e-15);
        let certified = certify_unique_mean(&ds).unwrap().unwrap();
        assert_eq!(certified.mean, ds[0]);
    }

    #[test]
    fn certification_succeeds_exactly_when_a_flat_grouping_exists() {
        assert!(certify_unique_mean(&square()).unwrap().is_none());
        let certified = certify_unique_mean(&one_point_family()).unwrap().unwrap();
        assert_eq!(certified.mean, diag(&[[1.0 / 3.0, 31.0 / 3.0]]));
        assert!(certified.certificate.flat);
        // The certified mean agrees with the exhaustive oracle, which also
        // confirms the optimum is unique.
        let search = brute_force_optimal_grouping(&one_point_family()).unwrap();
        assert_eq!(search.optima_count, 1);
        assert!((search.variance - 4.0 / 9.0).abs() < 1e-12);
        assert!(certified.grouping.same_up_to_row_order(&search.grouping));
    }

    #[test]
    fn init_validation() {
        let ds = one_point_family();
        assert!(matches!(
            turner_mean(&ds, TurnerInit::Index(7), 10),
            Err(Error::IndexOutOfBounds { .. })
        ));
        assert!(turner_mean(&ds, TurnerInit::default(), 0).is_err());
        assert!(turner_mean(&[], TurnerInit::default(), 10).is_err());
        // A custom init works and is described as such.
        let r = turner_mean(
            &ds,
            TurnerInit::Diagram(diag(&[[0.5, 10.5]])),
            50,
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.init_description, "custom diagram");
        assert_eq!(r.mean, diag(&[[1.0 / 3.0, 31.0 / 3.0]]));
    }
}
