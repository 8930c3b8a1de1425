//! Persistence diagrams: validated points above the diagonal, multiset
//! equality, diagonal projections, and the on-disk JSON format.
//!
//! Every point keeps `death > birth` strictly and both coordinates finite;
//! these invariants are enforced at construction so the rest of the crate
//! can rely on them. The diagonal `y = x` is not stored — operations that
//! need it (matchings, groupings) represent it explicitly via
//! [`DiagramEntry::Diagonal`].

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::{Error, Result};

/// A single off-diagonal point of a persistence diagram.
///
/// Invariants: both coordinates are finite and `death > birth` strictly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    birth: f64,
    death: f64,
}

impl PlanePoint {
    /// Validates and constructs a point. The `index` in error values is 0;
    /// use [`PlanePoint::new_at`] when a position in a containing list is
    /// known.
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        Self::new_at(0, birth, death)
    }

    /// Like [`PlanePoint::new`], but reports `index` in validation errors so
    /// callers loading lists of points can name the offending record.
    pub fn new_at(index: usize, birth: f64, death: f64) -> Result<Self> {
        if !birth.is_finite() || !death.is_finite() {
            return Err(Error::NonFinite {
                index,
                birth,
                death,
            });
        }
        if death <= birth {
            return Err(Error::NotAboveDiagonal {
                index,
                birth,
                death,
            });
        }
        Ok(PlanePoint { birth, death })
    }

    pub fn birth(&self) -> f64 {
        self.birth
    }

    pub fn death(&self) -> f64 {
        self.death
    }

    /// Lifetime of the feature: `death - birth`. Always positive.
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Orthogonal projection onto the diagonal:
    /// `((birth+death)/2, (birth+death)/2)`. Returned as a raw coordinate
    /// pair because on-diagonal positions are not valid diagram points.
    pub fn diagonal_projection(&self) -> [f64; 2] {
        let m = 0.5 * (self.birth + self.death);
        [m, m]
    }

    /// Perpendicular part `x - x^T`: the displacement from the diagonal
    /// projection to the point.
    pub fn perpendicular(&self) -> [f64; 2] {
        let h = 0.5 * (self.death - self.birth);
        [-h, h]
    }

    /// Euclidean distance to the diagonal, `(death - birth) / sqrt(2)`.
    pub fn diagonal_distance(&self) -> f64 {
        self.diagonal_distance2().sqrt()
    }

    /// Squared distance to the diagonal, `(death - birth)^2 / 2`.
    pub fn diagonal_distance2(&self) -> f64 {
        let p = self.persistence();
        0.5 * p * p
    }

    /// Squared Euclidean distance to another point.
    pub fn dist2(&self, other: &PlanePoint) -> f64 {
        let db = self.birth - other.birth;
        let dd = self.death - other.death;
        db * db + dd * dd
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.birth, self.death]
    }
}

impl fmt::Display for PlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.birth, self.death)
    }
}

/// Either an off-diagonal point or the diagonal itself.
///
/// Distances between entries follow the transport conventions: point to
/// point is Euclidean, point to diagonal is the perpendicular distance, and
/// diagonal to diagonal is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagramEntry {
    Point(PlanePoint),
    Diagonal,
}

impl DiagramEntry {
    /// Squared distance between two entries under the transport conventions.
    pub fn dist2(&self, other: &DiagramEntry) -> f64 {
        match (self, other) {
            (DiagramEntry::Point(a), DiagramEntry::Point(b)) => a.dist2(b),
            (DiagramEntry::Point(a), DiagramEntry::Diagonal)
            | (DiagramEntry::Diagonal, DiagramEntry::Point(a)) => a.diagonal_distance2(),
            (DiagramEntry::Diagonal, DiagramEntry::Diagonal) => 0.0,
        }
    }

    pub fn dist(&self, other: &DiagramEntry) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, DiagramEntry::Diagonal)
    }

    pub fn as_point(&self) -> Option<PlanePoint> {
        match self {
            DiagramEntry::Point(p) => Some(*p),
            DiagramEntry::Diagonal => None,
        }
    }
}

/// A persistence diagram: a finite multiset of points strictly above the
/// diagonal. Point order is preserved for indexing, but equality is multiset
/// equality.
#[derive(Debug, Clone, Default)]
pub struct PersistenceDiagram {
    points: Vec<PlanePoint>,
}

impl PersistenceDiagram {
    /// The empty diagram (only the diagonal).
    pub fn empty() -> Self {
        PersistenceDiagram { points: Vec::new() }
    }

    pub fn new(points: Vec<PlanePoint>) -> Self {
        PersistenceDiagram { points }
    }

    /// Builds a diagram from raw `[birth, death]` pairs, validating each.
    pub fn from_coords(coords: &[[f64; 2]]) -> Result<Self> {
        let points = coords
            .iter()
            .enumerate()
            .map(|(i, c)| PlanePoint::new_at(i, c[0], c[1]))
            .collect::<Result<Vec<_>>>()?;
        Ok(PersistenceDiagram { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Result<PlanePoint> {
        self.points
            .get(index)
            .copied()
            .ok_or_else(|| Error::IndexOutOfBounds {
                context: "diagram point".into(),
                index,
                len: self.points.len(),
            })
    }

    /// Points sorted lexicographically by (birth, death); the canonical form
    /// used for multiset comparison.
    fn sorted_coords(&self) -> Vec<[f64; 2]> {
        let mut v: Vec<[f64; 2]> = self.points.iter().map(|p| p.coords()).collect();
        v.sort_by(|a, b| {
            a[0].total_cmp(&b[0])
                .then_with(|| a[1].total_cmp(&b[1]))
        });
        v
    }

    /// JSON value in the on-disk format `{"points": [[birth, death], ...]}`.
    pub fn to_json_value(&self) -> Value {
        json!({
            "points": self
                .points
                .iter()
                .map(|p| json!([p.birth(), p.death()]))
                .collect::<Vec<_>>()
        })
    }

    /// Parses the on-disk format, naming the offending record on failure.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            context: "diagram".into(),
            message: "expected an object with a \"points\" field".into(),
        })?;
        let points_val = obj.get("points").ok_or_else(|| Error::Parse {
            context: "diagram".into(),
            message: "missing \"points\" field".into(),
        })?;
        let arr = points_val.as_array().ok_or_else(|| Error::Parse {
            context: "diagram".into(),
            message: "\"points\" must be an array".into(),
        })?;
        let mut points = Vec::with_capacity(arr.len());
        for (i, item) in arr.iter().enumerate() {
            let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                Error::Parse {
                    context: format!("points[{i}]"),
                    message: "expected a [birth, death] pair".into(),
                }
            })?;
            let birth = pair[0].as_f64().ok_or_else(|| Error::Parse {
                context: format!("points[{i}]"),
                message: "birth must be a number".into(),
            })?;
            let death = pair[1].as_f64().ok_or_else(|| Error::Parse {
                context: format!("points[{i}]"),
                message: "death must be a number".into(),
            })?;
            points.push(PlanePoint::new_at(i, birth, death)?);
        }
        Ok(PersistenceDiagram { points })
    }

    /// Reads a diagram from a JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_value(&value).map_err(|e| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{}: {}", path.display(), context),
                message,
            },
            other => other,
        })
    }

    /// Writes the diagram as JSON with full (round-trip) precision.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json_value())?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

impl PartialEq for PersistenceDiagram {
    /// Multiset equality: storage order is irrelevant.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.sorted_coords() == other.sorted_coords()
    }
}

impl FromIterator<PlanePoint> for PersistenceDiagram {
    fn from_iter<T: IntoIterator<Item = PlanePoint>>(iter: T) -> Self {
        PersistenceDiagram {
            points: iter.into_iter().collect(),
        }
    }
}

/// Loads every `*.json` file in a directory as a diagram, sorted by file
/// name. This fixes the column order used by groupings over the family.
pub fn load_diagram_dir(dir: &Path) -> Result<Vec<(PathBuf, PersistenceDiagram)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.is_file() && p.extension().map(|e| e == "json").unwrap_or(false)
        })
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let d = PersistenceDiagram::load(&p)?;
        out.push((p, d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_points_on_or_below_diagonal() {
        assert!(PlanePoint::new(2.0, 1.0).is_err());
        assert!(PlanePoint::new(1.0, 1.0).is_err());
        assert!(PlanePoint::new(1.0, 1.0 + 1e-12).is_ok());
    }

    #[test]
    fn rejects_non_finite_coordinates() {
        assert!(PlanePoint::new(f64::NAN, 1.0).is_err());
        assert!(PlanePoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn projection_splits_point_into_parallel_and_perpendicular_parts() {
        let x = PlanePoint::new(1.5, 4.5).unwrap();
        let proj = x.diagonal_projection();
        assert_eq!(proj, [3.0, 3.0]);
        let perp = x.perpendicular();
        // x = x^T + x^perp, exactly.
        assert_eq!(proj[0] + perp[0], x.birth());
        assert_eq!(proj[1] + perp[1], x.death());
        // |x^perp| = persistence / sqrt(2) = 1.5 * sqrt(2)
        assert!((x.diagonal_distance() - 1.5 * 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projection_matches_grid_search() {
        // Independent check: minimize the distance to (p, p) over a fine grid.
        let x = PlanePoint::new(0.3, 2.9).unwrap();
        let mut best = f64::INFINITY;
        let mut best_p = 0.0;
        let mut p = -1.0;
        while p <= 4.0 {
            let d2 = (x.birth() - p).powi(2) + (x.death() - p).powi(2);
            if d2 < best {
                best = d2;
                best_p = p;
            }
            p += 1e-5;
        }
        let proj = x.diagonal_projection();
        assert!((proj[0] - best_p).abs() < 1e-4);
        assert!((best.sqrt() - x.diagonal_distance()).abs() < 1e-9);
    }

    #[test]
    fn entry_distances_follow_transport_conventions() {
        let a = DiagramEntry::Point(PlanePoint::new(0.0, 2.0).unwrap());
        let b = DiagramEntry::Point(PlanePoint::new(1.0, 3.0).unwrap());
        assert_eq!(a.dist2(&b), 2.0);
        assert_eq!(a.dist2(&DiagramEntry::Diagonal), 2.0);
        assert_eq!(DiagramEntry::Diagonal.dist2(&DiagramEntry::Diagonal), 0.0);
    }

    #[test]
    fn diagram_equality_is_multiset_equality() {
        let a = PersistenceDiagram::from_coords(&[[0.0, 1.0], [2.0, 5.0]]).unwrap();
        let b = PersistenceDiagram::from_coords(&[[2.0, 5.0], [0.0, 1.0]]).unwrap();
        let c = PersistenceDiagram::from_coords(&[[0.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(PersistenceDiagram::empty(), PersistenceDiagram::default());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let d = PersistenceDiagram::from_coords(&[
            [0.1, 0.30000000000000004],
            [1.0 / 3.0, 2.0 / 3.0],
            [-5.5, 1e-9],
        ])
        .unwrap();
        let v = d.to_json_value();
        let back = PersistenceDiagram::from_json_value(&v).unwrap();
        // Bit-for-bit: serde_json prints shortest round-trip decimals.
        assert_eq!(d.points(), back.points());
    }

    #[test]
    fn parse_errors_name_the_offending_record() {
        let v: Value = serde_json::from_str(r#"{"points": [[0, 1], [2, 1]]}"#).unwrap();
        let err = PersistenceDiagram::from_json_value(&v).unwrap_err();
        match err {
            Error::NotAboveDiagonal { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error: {other}"),
        }

        let v: Value = serde_json::from_str(r#"{"points": [[0, 1], "x"]}"#).unwrap();
        let err = PersistenceDiagram::from_json_value(&v).unwrap_err();
        assert!(err.to_string().contains("points[1]"));
    }

    #[test]
    fn empty_diagram_parses_and_serializes() {
        let v: Value = serde_json::from_str(r#"{"points": []}"#).unwrap();
        let d = PersistenceDiagram::from_json_value(&v).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.to_json_value().to_string(), r#"{"points":[]}"#);
    }
}
