//! The 2-Wasserstein distance between persistence diagrams, optimal
//! matchings, geodesic interpolation, and a brute-force oracle.
//!
//! Distances are computed over *augmented* bijections: each diagram is
//! padded with copies of the diagonal so that unmatched points may be
//! transported to their orthogonal projections. The squared cost of a pair
//! is squared Euclidean distance for two points, the squared perpendicular
//! distance for a point matched to the diagonal, and zero for diagonal to
//! diagonal. The optimum is found exactly by an `O((m+n)^3)` assignment
//! solve; ties are broken deterministically by scanning order.

use serde_json::{json, Value};

use crate::assignment;
use crate::diagram::{PersistenceDiagram, PlanePoint};
use crate::{Error, Result};

/// One side of a matched pair: a concrete diagram point (with its index in
/// the source diagram) or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchEnd {
    Point { index: usize, point: PlanePoint },
    Diagonal,
}

impl MatchEnd {
    fn json(&self) -> Value {
        match self {
            MatchEnd::Point { point, .. } => json!(["p", point.birth(), point.death()]),
            MatchEnd::Diagonal => json!("diag"),
        }
    }
}

impl std::fmt::Display for MatchEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatchEnd::Point { point, .. } => write!(f, "{point}"),
            MatchEnd::Diagonal => write!(f, "diag"),
        }
    }
}

/// An optimal (or candidate) augmented matching between two diagrams.
///
/// Every off-diagonal point of each diagram appears in exactly one pair;
/// diagonal-to-diagonal pairs are omitted. `cost` is the sum of squared
/// pair distances, so the induced distance is `cost.sqrt()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pairs: Vec<(MatchEnd, MatchEnd)>,
    cost: f64,
}

impl Matching {
    pub fn pairs(&self) -> &[(MatchEnd, MatchEnd)] {
        &self.pairs
    }

    /// Total squared transport cost.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// The 2-Wasserstein distance realized by this matching.
    pub fn distance(&self) -> f64 {
        self.cost.sqrt()
    }

    /// Recomputes the cost from the pairs; used to validate the stored sum.
    pub fn recompute_cost(&self) -> f64 {
        self.pairs
            .iter()
            .map(|(a, b)| match (a, b) {
                (MatchEnd::Point { point: x, .. }, MatchEnd::Point { point: y, .. }) => x.dist2(y),
                (MatchEnd::Point { point: x, .. }, MatchEnd::Diagonal)
                | (MatchEnd::Diagonal, MatchEnd::Point { point: x, .. }) => x.diagonal_distance2(),
                (MatchEnd::Diagonal, MatchEnd::Diagonal) => 0.0,
            })
            .sum()
    }

    /// JSON in the on-disk format
    /// `{"cost": c, "distance": d, "pairs": [[["p",b,d]|"diag", ...], ...]}`.
    pub fn to_json_value(&self) -> Value {
        json!({
            "cost": self.cost,
            "distance": self.distance(),
            "pairs": self
                .pairs
                .iter()
                .map(|(a, b)| json!([a.json(), b.json()]))
                .collect::<Vec<_>>(),
        })
    }
}

/// Computes an optimal matching between two diagrams.
///
/// The result is deterministic for fixed inputs: when several matchings
/// realize the optimum the assignment solver's scanning order picks one.
pub fn w2_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Matching {
    let m = d1.len();
    let n = d2.len();
    let size = m + n;
    if size == 0 {
        return Matching {
            pairs: Vec::new(),
            cost: 0.0,
        };
    }

    let mut cost = vec![vec![0.0_f64; size]; size];
    for (row, x) in cost.iter_mut().zip(d1.points()) {
        for (slot, y) in row.iter_mut().zip(d2.points()) {
            *slot = x.dist2(y);
        }
        let to_diag = x.diagonal_distance2();
        for slot in &mut row[n..] {
            *slot = to_diag;
        }
    }
    for row in cost.iter_mut().take(size).skip(m) {
        for (j, y) in d2.points().iter().enumerate() {
            row[j] = y.diagonal_distance2();
        }
        // Diagonal-to-diagonal entries stay 0.
    }

    let assign = assignment::solve(&cost);
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for (i, &j) in assign.iter().enumerate() {
        total += cost[i][j];
        match (i < m, j < n) {
            (true, true) => pairs.push((
                MatchEnd::Point {
                    index: i,
                    point: d1.points()[i],
                },
                MatchEnd::Point {
                    index: j,
                    point: d2.points()[j],
                },
            )),
            (true, false) => pairs.push((
                MatchEnd::Point {
                    index: i,
                    point: d1.points()[i],
                },
                MatchEnd::Diagonal,
            )),
            (false, true) => pairs.push((
                MatchEnd::Diagonal,
                MatchEnd::Point {
                    index: j,
                    point: d2.points()[j],
                },
            )),
            (false, false) => {} // diagonal-to-diagonal pairs carry no information
        }
    }
    Matching { pairs, cost: total }
}

/// The 2-Wasserstein distance alone.
pub fn w2(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    w2_distance(d1, d2).distance()
}

/// Euclidean norm of the vector of diagonal distances; equals the distance
/// to the empty diagram.
pub fn total_persistence(d: &PersistenceDiagram) -> f64 {
    d.points()
        .iter()
        .map(|p| p.diagonal_distance2())
        .sum::<f64>()
        .sqrt()
}

/// A point on a geodesic between two diagrams.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPoint {
    pub t: f64,
    pub diagram: PersistenceDiagram,
}

/// Interpolates along the geodesic induced by `matching` at parameter
/// `t in [0, 1]`. Matched point pairs interpolate linearly; points matched
/// to the diagonal travel to or from their orthogonal projections. Any
/// interpolated point that lands *on* the diagonal is dropped.
///
/// When `matching` is optimal the curve is a metric geodesic:
/// `W2(g(s), g(t)) = |t - s| * W2(d1, d2)`.
pub fn geodesic(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    matching: &Matching,
    t: f64,
) -> Result<GeodesicPoint> {
    if t.is_nan() || !(0.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfRange { t });
    }
    validate_matching(d1, d2, matching)?;

    let lerp = |a: [f64; 2], b: [f64; 2]| [(1.0 - t) * a[0] + t * b[0], (1.0 - t) * a[1] + t * b[1]];
    let mut points = Vec::new();
    for (left, right) in matching.pairs() {
        let c = match (left, right) {
            (MatchEnd::Point { point: x, .. }, MatchEnd::Point { point: y, .. }) => {
                lerp(x.coords(), y.coords())
            }
            (MatchEnd::Point { point: x, .. }, MatchEnd::Diagonal) => {
                lerp(x.coords(), x.diagonal_projection())
            }
            (MatchEnd::Diagonal, MatchEnd::Point { point: y, .. }) => {
                lerp(y.diagonal_projection(), y.coords())
            }
            (MatchEnd::Diagonal, MatchEnd::Diagonal) => continue,
        };
        if c[1] > c[0] {
            points.push(PlanePoint::new(c[0], c[1])?);
        }
        // Points that land on the diagonal rejoin it and disappear.
    }
    Ok(GeodesicPoint {
        t,
        diagram: PersistenceDiagram::new(points),
    })
}

/// Checks that a matching covers each diagram's points exactly once and
/// refers only to valid indices.
fn validate_matching(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    matching: &Matching,
) -> Result<()> {
    let mut seen_left = vec![false; d1.len()];
    let mut seen_right = vec![false; d2.len()];
    for (left, right) in matching.pairs() {
        if let MatchEnd::Point { index, .. } = left {
            let slot = seen_left
                .get_mut(*index)
                .ok_or_else(|| Error::IndexOutOfBounds {
                    context: "matching left end".into(),
                    index: *index,
                    len: d1.len(),
                })?;
            if *slot {
                return Err(Error::Precondition(format!(
                    "matching repeats left point {index}"
                )));
            }
            *slot = true;
        }
        if let MatchEnd::Point { index, .. } = right {
            let slot = seen_right
                .get_mut(*index)
                .ok_or_else(|| Error::IndexOutOfBounds {
                    context: "matching right end".into(),
                    index: *index,
                    len: d2.len(),
                })?;
            if *slot {
                return Err(Error::Precondition(format!(
                    "matching repeats right point {index}"
                )));
            }
            *slot = true;
        }
    }
    if seen_left.iter().any(|s| !s) || seen_right.iter().any(|s| !s) {
        return Err(Error::Precondition(
            "matching does not cover every off-diagonal point".into(),
        ));
    }
    Ok(())
}

/// Result of exhaustively enumerating augmented matchings.
#[derive(Debug, Clone)]
pub struct BruteForceMatching {
    pub matching: Matching,
    /// Number of distinct matchings whose cost ties the optimum within 1e-12.
    pub optima_count: usize,
}

impl BruteForceMatching {
    pub fn distance(&self) -> f64 {
        self.matching.distance()
    }
}

/// Default cap on the combined point count for [`brute_force_w2`].
pub const DEFAULT_W2_BRUTE_CAP: usize = 8;

/// Tolerance for counting tied optima in brute-force enumerations.
pub const OPTIMA_TIE_TOL: f64 = 1e-12;

/// Exhaustively enumerates every augmented matching and returns an optimum
/// together with the number of tied optima. Independent of the assignment
/// solver; used as a test oracle. Errors if `d1.len() + d2.len()` exceeds
/// the cap.
pub fn brute_force_w2(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<BruteForceMatching> {
    brute_force_w2_with_cap(d1, d2, DEFAULT_W2_BRUTE_CAP)
}

/// [`brute_force_w2`] with an explicit cap.
pub fn brute_force_w2_with_cap(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    cap: usize,
) -> Result<BruteForceMatching> {
    let m = d1.len();
    let n = d2.len();
    if m + n > cap {
        return Err(Error::CapExceeded {
            what: format!("combined point count {}", m + n),
            cap,
        });
    }

    // Every augmented matching is a partial injection from d1's points into
    // d2's points, with all unmatched points sent to the diagonal.
    // assign[i] = Some(j) or None (diagonal).
    let mut assign: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; n];
    let mut best_cost = f64::INFINITY;
    let mut best_assign: Option<Vec<Option<usize>>> = None;
    let mut costs: Vec<f64> = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        d1: &PersistenceDiagram,
        d2: &PersistenceDiagram,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        acc: f64,
        best_cost: &mut f64,
        best_assign: &mut Option<Vec<Option<usize>>>,
        costs: &mut Vec<f64>,
    ) {
        if i == d1.len() {
            // Unmatched points of d2 go to the diagonal.
            let rest: f64 = d2
                .points()
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(_, y)| y.diagonal_distance2())
                .sum();
            let total = acc + rest;
            costs.push(total);
            if total < *best_cost {
                *best_cost = total;
                *best_assign = Some(assign.clone());
            }
            return;
        }
        let x = d1.points()[i];
        assign[i] = None;
        rec(
            i + 1,
            d1,
            d2,
            assign,
            used,
            acc + x.diagonal_distance2(),
            best_cost,
            best_assign,
            costs,
        );
        for j in 0..d2.len() {
            if !used[j] {
                used[j] = true;
                assign[i] = Some(j);
                rec(
                    i + 1,
                    d1,
                    d2,
                    assign,
                    used,
                    acc + x.dist2(&d2.points()[j]),
                    best_cost,
                    best_assign,
                    costs,
                );
                assign[i] = None;
                used[j] = false;
            }
        }
    }

    rec(
        0,
        d1,
        d2,
        &mut assign,
        &mut used,
        0.0,
        &mut best_cost,
        &mut best_assign,
        &mut costs,
    );

    let best_assign = best_assign.expect("enumeration always visits at least one matching");
    let optima_count = costs
        .iter()
        .filter(|&&c| c <= best_cost + OPTIMA_TIE_TOL)
        .count();

    let mut pairs = Vec::new();
    let mut matched_right = vec![false; n];
    for (i, a) in best_assign.iter().enumerate() {
        let left = MatchEnd::Point {
            index: i,
            point: d1.points()[i],
        };
        match a {
            Some(j) => {
                matched_right[*j] = true;
                pairs.push((
                    left,
                    MatchEnd::Point {
                        index: *j,
                        point: d2.points()[*j],
                    },
                ));
            }
            None => pairs.push((left, MatchEnd::Diagonal)),
        }
    }
    for (j, taken) in matched_right.iter().enumerate() {
        if !taken {
            pairs.push((
                MatchEnd::Diagonal,
                MatchEnd::Point {
                    index: j,
                    point: d2.points()[j],
                },
            ));
        }
    }

    Ok(BruteForceMatching {
        matching: Matching {
            pairs,
            cost: best_cost,
        },
        optima_count,
    })
}
