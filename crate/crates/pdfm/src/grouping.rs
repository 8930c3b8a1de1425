//! Groupings of diagram families, their means and variance, and flatness
//! certificates.
//!
//! A grouping of diagrams `D_1, ..., D_L` (with `k_j` points each) is a
//! `K x L` matrix, `K = k_1 + ... + k_L`, whose column `j` contains every
//! point of `D_j` exactly once plus `K - k_j` diagonal entries. Each row —
//! a *selection* — picks at most one point from each diagram; the points of
//! a row are averaged together (with the diagonal absorbing its share) to
//! produce one candidate mean point. Groupings are exactly the discrete
//! search space for Fréchet means: the variance of an optimal grouping is
//! the minimum of the Fréchet functional.
//!
//! A grouping is *flat* when some threshold separates within-row spread
//! from between-row and diagonal distances; flatness certifies that the
//! induced mean is the unique Fréchet mean of the family.

use serde_json::{json, Value};

use crate::diagram::{DiagramEntry, PersistenceDiagram, PlanePoint};
use crate::{Error, Result};

/// A `K x L` grouping matrix over an owned family of diagrams.
///
/// Cells store indices into the owning diagram (`Some(p)`) or the diagonal
/// (`None`). Column `j` contains each index of `D_j` exactly once; the
/// number of rows is always `K = sum_j k_j`, padding with all-diagonal
/// (trivial) rows as needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    diagrams: Vec<PersistenceDiagram>,
    rows: Vec<Vec<Option<usize>>>,
}

impl Grouping {
    /// Validates and normalizes a grouping. Rows must each have one cell per
    /// diagram; every point index of every diagram must appear exactly once
    /// in its column. Trivial (all-diagonal) rows are normalized so the
    /// matrix has exactly `K` rows.
    pub fn new(diagrams: Vec<PersistenceDiagram>, rows: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let l = diagrams.len();
        if l == 0 {
            return Err(Error::InvalidGrouping("no diagrams".into()));
        }
        let k_total: usize = diagrams.iter().map(|d| d.len()).sum();
        let mut seen: Vec<Vec<bool>> = diagrams.iter().map(|d| vec![false; d.len()]).collect();
        let mut nontrivial = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != l {
                return Err(Error::InvalidGrouping(format!(
                    "row {i} has {} cells, expected {l}",
                    row.len()
                )));
            }
            let mut any_point = false;
            for (j, cell) in row.iter().enumerate() {
                if let Some(p) = cell {
                    let slot =
                        seen[j]
                            .get_mut(*p)
                            .copied()
                            .ok_or_else(|| Error::InvalidGrouping(format!(
                                "row {i}, column {j}: point index {p} out of bounds (diagram has {} points)",
                                diagrams[j].len()
                            )))?;
                    if slot {
                        return Err(Error::InvalidGrouping(format!(
                            "column {j}: point index {p} appears more than once"
                        )));
                    }
                    seen[j][*p] = true;
                    any_point = true;
                }
            }
            if any_point {
                nontrivial.push(row.clone());
            }
        }
        for (j, flags) in seen.iter().enumerate() {
            if let Some(p) = flags.iter().position(|&s| !s) {
                return Err(Error::InvalidGrouping(format!(
                    "column {j}: point index {p} missing from the grouping"
                )));
            }
        }
        // Pad with trivial rows up to K. Nontrivial rows can never exceed K
        // because each contains at least one of the K points.
        let mut rows = nontrivial;
        while rows.len() < k_total {
            rows.push(vec![None; l]);
        }
        Ok(Grouping { diagrams, rows })
    }

    /// Number of rows `K` (total point count across the family).
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns `L` (diagrams in the family).
    pub fn num_columns(&self) -> usize {
        self.diagrams.len()
    }

    pub fn diagrams(&self) -> &[PersistenceDiagram] {
        &self.diagrams
    }

    pub fn rows(&self) -> &[Vec<Option<usize>>] {
        &self.rows
    }

    /// The entry at row `i`, column `j`.
    pub fn entry(&self, i: usize, j: usize) -> DiagramEntry {
        match self.rows[i][j] {
            Some(p) => DiagramEntry::Point(self.diagrams[j].points()[p]),
            None => DiagramEntry::Diagonal,
        }
    }

    /// All entries of row `i` in column order.
    pub fn row_entries(&self, i: usize) -> Vec<DiagramEntry> {
        (0..self.num_columns()).map(|j| self.entry(i, j)).collect()
    }

    /// The off-diagonal points of row `i`.
    pub fn row_points(&self, i: usize) -> Vec<PlanePoint> {
        self.row_entries(i)
            .into_iter()
            .filter_map(|e| e.as_point())
            .collect()
    }

    /// Whether row `i` has no off-diagonal entries.
    pub fn row_is_trivial(&self, i: usize) -> bool {
        self.rows[i].iter().all(|c| c.is_none())
    }

    /// Rows in a canonical order (sorted cell lists), for comparing
    /// groupings up to row permutation.
    pub fn canonical_rows(&self) -> Vec<Vec<Option<usize>>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    /// Equality up to row permutation over the same diagram family.
    pub fn same_up_to_row_order(&self, other: &Grouping) -> bool {
        self.canonical_rows() == other.canonical_rows()
    }

    /// JSON value in the on-disk format
    /// `{"L": L, "rows": [[idx | "diag", ...], ...]}` (0-based indices).
    pub fn to_json_value(&self) -> Value {
        json!({
            "L": self.num_columns(),
            "rows": self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| match c {
                            Some(p) => json!(p),
                            None => json!("diag"),
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        })
    }

    /// Parses the on-disk format against a concrete diagram family (which
    /// supplies the point data the indices refer to).
    pub fn from_json_value(value: &Value, diagrams: Vec<PersistenceDiagram>) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            context: "grouping".into(),
            message: "expected an object with \"L\" and \"rows\"".into(),
        })?;
        let l = obj.get("L").and_then(|v| v.as_u64()).ok_or_else(|| Error::Parse {
            context: "grouping".into(),
            message: "missing or non-integer \"L\"".into(),
        })? as usize;
        if l != diagrams.len() {
            return Err(Error::Arity {
                context: "grouping columns".into(),
                expected: diagrams.len(),
                got: l,
            });
        }
        let rows_val = obj.get("rows").and_then(|v| v.as_array()).ok_or_else(|| {
            Error::Parse {
                context: "grouping".into(),
                message: "missing \"rows\" array".into(),
            }
        })?;
        let mut rows = Vec::with_capacity(rows_val.len());
        for (i, row_val) in rows_val.iter().enumerate() {
            let cells = row_val.as_array().ok_or_else(|| Error::Parse {
                context: format!("rows[{i}]"),
                message: "expected an array of cells".into(),
            })?;
            let mut row = Vec::with_capacity(cells.len());
            for (j, cell) in cells.iter().enumerate() {
                if cell.as_str() == Some("diag") {
                    row.push(None);
                } else if let Some(p) = cell.as_u64() {
                    row.push(Some(p as usize));
                } else {
                    return Err(Error::Parse {
                        context: format!("rows[{i}][{j}]"),
                        message: "expected a point index or \"diag\"".into(),
                    });
                }
            }
            rows.push(row);
        }
        Grouping::new(diagrams, rows)
    }

    pub fn load(path: &std::path::Path, diagrams: Vec<PersistenceDiagram>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_value(&value, diagrams)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json_value())?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// Mean of one selection: `L` entries, `s` of them off-diagonal points.
///
/// With `q_bar` the Euclidean mean of the off-diagonal points, the selection
/// mean is `(s * q_bar + (L - s) * proj(q_bar)) / L` — the diagonal pulls
/// the mean toward the projection of the off-diagonal average. An
/// all-diagonal selection has mean `Diagonal`.
pub fn mean_point(entries: &[DiagramEntry], l: usize) -> Result<DiagramEntry> {
    if entries.len() != l {
        return Err(Error::Arity {
            context: "selection".into(),
            expected: l,
            got: entries.len(),
        });
    }
    if l == 0 {
        return Err(Error::Arity {
            context: "selection".into(),
            expected: 1,
            got: 0,
        });
    }
    let points: Vec<PlanePoint> = entries.iter().filter_map(|e| e.as_point()).collect();
    let s = points.len();
    if s == 0 {
        return Ok(DiagramEntry::Diagonal);
    }
    let sf = s as f64;
    let lf = l as f64;
    let qb = points.iter().fold([0.0, 0.0], |acc, p| {
        [acc[0] + p.birth(), acc[1] + p.death()]
    });
    let q_bar = [qb[0] / sf, qb[1] / sf];
    let m = 0.5 * (q_bar[0] + q_bar[1]);
    let birth = (sf * q_bar[0] + (lf - sf) * m) / lf;
    let death = (sf * q_bar[1] + (lf - sf) * m) / lf;
    if death > birth {
        Ok(DiagramEntry::Point(PlanePoint::new(birth, death)?))
    } else {
        // Unreachable for valid inputs (a convex combination of points
        // strictly above the diagonal stays strictly above), but guarded.
        Ok(DiagramEntry::Diagonal)
    }
}

/// The candidate mean diagram of a grouping: one point per nontrivial row,
/// in row order. Returns the diagram together with the number of rows whose
/// mean degenerated onto the diagonal (always 0 for valid inputs).
pub fn mean_diagram_counting(g: &Grouping) -> Result<(PersistenceDiagram, usize)> {
    let l = g.num_columns();
    let mut points = Vec::new();
    let mut degenerate = 0;
    for i in 0..g.num_rows() {
        if g.row_is_trivial(i) {
            continue;
        }
        match mean_point(&g.row_entries(i), l)? {
            DiagramEntry::Point(p) => points.push(p),
            DiagramEntry::Diagonal => degenerate += 1,
        }
    }
    Ok((PersistenceDiagram::new(points), degenerate))
}

/// The candidate mean diagram of a grouping.
pub fn mean_diagram(g: &Grouping) -> Result<PersistenceDiagram> {
    Ok(mean_diagram_counting(g)?.0)
}

/// Variance of a grouping, straight from the definition: the average over
/// columns of the squared row-wise distances to the selection means.
pub fn variance_definitional(g: &Grouping) -> f64 {
    let l = g.num_columns();
    let mut total = 0.0;
    for i in 0..g.num_rows() {
        let entries = g.row_entries(i);
        let mean = mean_point(&entries, l).expect("row arity is enforced by construction");
        for e in &entries {
            total += e.dist2(&mean);
        }
    }
    total / l as f64
}

/// Variance of a grouping in closed form, written purely in terms of
/// pairwise distances within each row:
///
/// `V = (1/L^2) * sum_i sum_{w<l} ||G_i^w - G_i^l||^2
///    + sum_i ((L-s_i)/(L^2 s_i)) * sum_{w<l<=s_i} ||proj(G_i^w) - proj(G_i^l)||^2`
///
/// where the second sum runs over the off-diagonal points of row `i` and is
/// taken as zero when `s_i = 0`. Must agree with
/// [`variance_definitional`] to floating-point accuracy.
pub fn variance_closed_form(g: &Grouping) -> f64 {
    let l = g.num_columns();
    let lf = l as f64;
    let mut total = 0.0;
    for i in 0..g.num_rows() {
        let entries = g.row_entries(i);
        let mut pair_term = 0.0;
        for w in 0..l {
            for e in w + 1..l {
                pair_term += entries[w].dist2(&entries[e]);
            }
        }
        total += pair_term / (lf * lf);

        let points = g.row_points(i);
        let s = points.len();
        if s > 0 {
            let mut proj_term = 0.0;
            for (w, first) in points.iter().enumerate() {
                let pw = first.diagonal_projection();
                for second in &points[w + 1..] {
                    let pe = second.diagonal_projection();
                    let db = pw[0] - pe[0];
                    let dd = pw[1] - pe[1];
                    proj_term += db * db + dd * dd;
                }
            }
            total += (lf - s as f64) / (lf * lf * s as f64) * proj_term;
        }
    }
    total
}

/// The outcome of testing a grouping for flatness.
///
/// Flatness asks for a threshold `lambda` with: every nontrivial row's
/// off-diagonal diameter strictly below `lambda`; every distance between
/// off-diagonal points of *different* nontrivial rows strictly above
/// `lambda`; and every off-diagonal point strictly further than `lambda`
/// from the diagonal. A nontrivial row mixing points with diagonal entries
/// rules flatness out regardless of distances.
#[derive(Debug, Clone)]
pub struct FlatnessReport {
    /// Off-diagonal diameter of each nontrivial row, in row order.
    pub row_diameters: Vec<f64>,
    /// Minimum distance between off-diagonal entries of distinct nontrivial
    /// rows; infinite when fewer than two nontrivial rows exist.
    pub min_inter_distance: f64,
    /// Minimum distance from any off-diagonal entry to the diagonal;
    /// infinite when the grouping has no off-diagonal entries.
    pub min_diagonal_clearance: f64,
    /// The open interval of feasible thresholds, when nonempty.
    pub feasible_interval: Option<(f64, f64)>,
    /// Midpoint of the feasible interval (or a fixed positive value when the
    /// interval is unbounded above).
    pub witness_lambda: Option<f64>,
    /// Whether some nontrivial row mixes points and diagonal entries.
    pub mixed_selection: bool,
    pub flat: bool,
}

impl FlatnessReport {
    /// Largest row diameter (0 when there are no nontrivial rows).
    pub fn max_row_diameter(&self) -> f64 {
        self.row_diameters.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Human-readable reason when not flat.
    pub fn reason(&self) -> Option<String> {
        if self.flat {
            return None;
        }
        if self.mixed_selection {
            Some("mixed selection: a nontrivial row pairs points with the diagonal".into())
        } else {
            Some(format!(
                "no feasible threshold: max row diameter {} is not strictly below min(inter-row distance {}, diagonal clearance {})",
                self.max_row_diameter(),
                self.min_inter_distance,
                self.min_diagonal_clearance
            ))
        }
    }

    /// JSON with infinities rendered as null.
    pub fn to_json_value(&self) -> Value {
        let fin = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
        json!({
            "flat": self.flat,
            "max_row_diameter": self.max_row_diameter(),
            "row_diameters": self.row_diameters,
            "min_inter_distance": fin(self.min_inter_distance),
            "min_diagonal_clearance": fin(self.min_diagonal_clearance),
            "feasible_interval": self.feasible_interval.map(|(lo, hi)| json!([lo, fin(hi)])),
            "witness_lambda": self.witness_lambda,
            "mixed_selection": self.mixed_selection,
            "reason": self.reason(),
        })
    }
}

/// Tests a grouping for flatness and reports the separating threshold data.
pub fn check_flatness(g: &Grouping) -> FlatnessReport {
    let mut row_diameters = Vec::new();
    let mut mixed_selection = false;
    let mut nontrivial_rows: Vec<(usize, Vec<PlanePoint>)> = Vec::new();

    for i in 0..g.num_rows() {
        if g.row_is_trivial(i) {
            continue;
        }
        let points = g.row_points(i);
        if points.len() < g.num_columns() {
            mixed_selection = true;
        }
        let mut diameter = 0.0_f64;
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                diameter = diameter.max(points[a].dist2(&points[b]).sqrt());
            }
        }
        row_diameters.push(diameter);
        nontrivial_rows.push((i, points));
    }

    let mut min_inter = f64::INFINITY;
    for a in 0..nontrivial_rows.len() {
        for b in a + 1..nontrivial_rows.len() {
            for p in &nontrivial_rows[a].1 {
                for q in &nontrivial_rows[b].1 {
                    min_inter = min_inter.min(p.dist2(q).sqrt());
                }
            }
        }
    }

    let mut min_clearance = f64::INFINITY;
    for (_, points) in &nontrivial_rows {
        for p in points {
            min_clearance = min_clearance.min(p.diagonal_distance());
        }
    }

    let max_diameter = row_diameters.iter().fold(0.0_f64, |a, &b| a.max(b));
    let upper = min_inter.min(min_clearance);
    let separated = max_diameter < upper;
    let flat = separated && !mixed_selection;
    let feasible_interval = if flat { Some((max_diameter, upper)) } else { None };
    let witness_lambda = feasible_interval.map(|(lo, hi)| {
        if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            // No off-diagonal points at all: any positive threshold works.
            lo + 1.0
        }
    });

    FlatnessReport {
        row_diameters,
        min_inter_distance: min_inter,
        min_diagonal_clearance: min_clearance,
        feasible_interval,
        witness_lambda,
        mixed_selection,
        flat,
    }
}

/// Minimal union-find for the single-linkage sweep.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.components -= 1;
        true
    }
}

/// Searches for a flat grouping of the family by single-linkage clustering
/// of the pooled points, checking every merge threshold.
///
/// Returns `None` when no flat grouping exists — in particular whenever the
/// diagrams do not all have the same cardinality, since a flat grouping
/// forces one point per diagram in every nontrivial row. When all diagrams
/// are empty the (trivial) empty grouping is flat and returned.
pub fn find_flat_grouping(diagrams: &[PersistenceDiagram]) -> Option<Grouping> {
    if diagrams.is_empty() {
        return None;
    }
    let l = diagrams.len();
    let k = diagrams[0].len();
    if diagrams.iter().any(|d| d.len() != k) {
        return None;
    }
    if k == 0 {
        return Grouping::new(diagrams.to_vec(), Vec::new()).ok();
    }

    // Pooled points labeled by (diagram, index).
    let pooled: Vec<(usize, usize, PlanePoint)> = diagrams
        .iter()
        .enumerate()
        .flat_map(|(j, d)| {
            d.points()
                .iter()
                .enumerate()
                .map(move |(p, pt)| (j, p, *pt))
        })
        .collect();
    let n = pooled.len();

    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            edges.push((pooled[a].2.dist2(&pooled[b].2), a, b));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut uf = UnionFind::new(n);

    let try_candidate = |uf: &mut UnionFind| -> Option<Grouping> {
        if uf.components != k {
            return None;
        }
        // Gather components; each must contain exactly one point per diagram.
        let mut comp_rows: std::collections::HashMap<usize, Vec<Option<usize>>> =
            std::collections::HashMap::new();
        let mut first_member: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        for (idx, (j, p, _)) in pooled.iter().enumerate() {
            let root = uf.find(idx);
            let row = comp_rows.entry(root).or_insert_with(|| vec![None; l]);
            if row[*j].is_some() {
                return None; // two points of the same diagram in one cluster
            }
            row[*j] = Some(*p);
            first_member.entry(root).or_insert(idx);
        }
        if comp_rows.values().any(|row| row.iter().any(|c| c.is_none())) {
            return None; // a cluster misses some diagram
        }
        // Deterministic row order: by smallest pooled index in the cluster.
        let mut keyed: Vec<(usize, Vec<Option<usize>>)> = comp_rows
            .into_iter()
            .map(|(root, row)| (first_member[&root], row))
            .collect();
        keyed.sort_by_key(|(first, _)| *first);
        let rows: Vec<Vec<Option<usize>>> = keyed.into_iter().map(|(_, row)| row).collect();
        let g = Grouping::new(diagrams.to_vec(), rows).ok()?;
        if check_flatness(&g).flat {
            Some(g)
        } else {
            None
        }
    };

    // The all-singletons clustering is the threshold-zero candidate.
    if let Some(g) = try_candidate(&mut uf) {
        return Some(g);
    }

    let mut e = 0;
    while e < edges.len() && uf.components >= k {
        // Merge the whole batch of equal-length edges before re-checking:
        // single linkage is defined by thresholds, not individual edges.
        let d = edges[e].0;
        let mut changed = false;
        while e < edges.len() && edges[e].0 == d {
            changed |= uf.union(edges[e].1, edges[e].2);
            e += 1;
        }
        if changed && uf.components == k {
            if let Some(g) = try_candidate(&mut uf) {
                return Some(g);
            }
        }
    }
    None
}
