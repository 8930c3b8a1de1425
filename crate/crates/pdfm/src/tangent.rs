//! Tangent-cone numerics at a base diagram: log maps, angle cosines, the
//! cone metric, the hugging function, and barycenter identities.
//!
//! A tangent vector at a base diagram records one 2-vector per base point
//! (where the matched partner moved) plus a collection of vectors attached
//! to the diagonal (partners that emerge from it). Inner products align
//! component-wise: point vectors pair by base point, diagonal vectors pair
//! within a shared attachment point — geodesics leaving the diagonal at
//! *different* places are orthogonal directions, so components with no
//! counterpart pair with the zero vector. For flat, cluster-respecting
//! configurations this alignment reproduces the Alexandrov angle exactly;
//! in general it follows the deterministic optimal matching, which may
//! differ from the true angle when geodesics are non-unique, so downstream
//! reports carry a caveat to that effect.

use crate::assignment;
use crate::diagram::{PersistenceDiagram, PlanePoint};
use crate::grouping::Grouping;
use crate::wasserstein::{geodesic, w2, w2_distance, MatchEnd, Matching};
use crate::{Error, Result};

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: [f64; 2]) -> f64 {
    dot(a, a)
}

/// A tangent-vector component that leaves the diagonal: the attachment
/// point it emanates from and the (diagonal-perpendicular) direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalComponent {
    /// Point on the diagonal, `attachment[0] == attachment[1]`.
    pub attachment: [f64; 2],
    /// Displacement from the attachment; perpendicular to the diagonal.
    pub vector: [f64; 2],
}

/// A tangent vector at a base diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: PersistenceDiagram,
    /// One displacement per base point, indexed like the base diagram.
    point_vectors: Vec<[f64; 2]>,
    diagonal_components: Vec<DiagonalComponent>,
}

impl TangentVector {
    /// Validates and constructs a tangent vector. `point_vectors` must have
    /// one entry per base point; each diagonal component must sit on the
    /// diagonal and point perpendicular to it.
    pub fn new(
        base: PersistenceDiagram,
        point_vectors: Vec<[f64; 2]>,
        diagonal_components: Vec<DiagonalComponent>,
    ) -> Result<Self> {
        if point_vectors.len() != base.len() {
            return Err(Error::Arity {
                context: "point vectors".into(),
                expected: base.len(),
                got: point_vectors.len(),
            });
        }
        for v in &point_vectors {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::InvalidTangent("non-finite point vector".into()));
            }
        }
        for c in &diagonal_components {
            if !c.vector[0].is_finite()
                || !c.vector[1].is_finite()
                || !c.attachment[0].is_finite()
                || !c.attachment[1].is_finite()
            {
                return Err(Error::InvalidTangent("non-finite diagonal component".into()));
            }
            if c.attachment[0] != c.attachment[1] {
                return Err(Error::InvalidTangent(format!(
                    "attachment ({}, {}) is not on the diagonal",
                    c.attachment[0], c.attachment[1]
                )));
            }
            let scale = 1.0 + norm2(c.vector).sqrt();
            if (c.vector[0] + c.vector[1]).abs() > 1e-12 * scale {
                return Err(Error::InvalidTangent(format!(
                    "diagonal component ({}, {}) is not perpendicular to the diagonal",
                    c.vector[0], c.vector[1]
                )));
            }
        }
        Ok(TangentVector {
            base,
            point_vectors,
            diagonal_components,
        })
    }

    /// The zero vector at a base.
    pub fn zero(base: PersistenceDiagram) -> Self {
        let n = base.len();
        TangentVector {
            base,
            point_vectors: vec![[0.0, 0.0]; n],
            diagonal_components: Vec::new(),
        }
    }

    pub fn base(&self) -> &PersistenceDiagram {
        &self.base
    }

    pub fn point_vectors(&self) -> &[[f64; 2]] {
        &self.point_vectors
    }

    pub fn diagonal_components(&self) -> &[DiagonalComponent] {
        &self.diagonal_components
    }

    /// Squared norm: the sum of squared component norms.
    pub fn norm2(&self) -> f64 {
        self.point_vectors.iter().map(|v| norm2(*v)).sum::<f64>()
            + self
                .diagonal_components
                .iter()
                .map(|c| norm2(c.vector))
                .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// The opposite vector, when one exists as a valid tangent direction.
    ///
    /// Point vectors negate freely, but a negated diagonal component would
    /// point *below* the diagonal, which no geodesic can do — so a vector
    /// admits an opposite exactly when its diagonal part vanishes. This is
    /// the membership test for the Hilbert subcone (directions in which the
    /// cone is two-sided); at the empty diagram only the zero vector
    /// qualifies.
    pub fn opposite(&self) -> Option<TangentVector> {
        if self
            .diagonal_components
            .iter()
            .any(|c| c.vector != [0.0, 0.0])
        {
            return None;
        }
        Some(TangentVector {
            base: self.base.clone(),
            point_vectors: self.point_vectors.iter().map(|v| [-v[0], -v[1]]).collect(),
            diagonal_components: Vec::new(),
        })
    }

    /// Component-wise mean of tangent vectors sharing a base. Restricted to
    /// vectors without diagonal components (where averaging is unambiguous).
    pub fn mean_of(vectors: &[&TangentVector]) -> Result<TangentVector> {
        let first = vectors.first().ok_or_else(|| Error::Arity {
            context: "tangent vectors".into(),
            expected: 1,
            got: 0,
        })?;
        let n = first.base.len();
        let mut acc = vec![[0.0_f64; 2]; n];
        for v in vectors {
            if v.base != first.base {
                return Err(Error::BaseMismatch);
            }
            if !v.diagonal_components.is_empty() {
                return Err(Error::InvalidTangent(
                    "averaging requires vectors without diagonal components".into(),
                ));
            }
            for (a, pv) in acc.iter_mut().zip(&v.point_vectors) {
                a[0] += pv[0];
                a[1] += pv[1];
            }
        }
        let lf = vectors.len() as f64;
        for a in &mut acc {
            a[0] /= lf;
            a[1] /= lf;
        }
        TangentVector::new(first.base.clone(), acc, Vec::new())
    }
}

/// A log map: the tangent vector pointing from a base diagram to a target,
/// together with the optimal matching that produced it.
#[derive(Debug, Clone)]
pub struct LogVector {
    pub tangent: TangentVector,
    pub matching: Matching,
}

impl LogVector {
    pub fn norm2(&self) -> f64 {
        self.tangent.norm2()
    }
}

/// Computes the log map from `base` to `target` along the deterministic
/// optimal matching. Base points matched to the diagonal get vectors toward
/// their own projections; target points matched to the base's diagonal
/// become diagonal components attached at their projections. The squared
/// norm of the result equals the matching cost, i.e. `W2^2(base, target)`.
pub fn log_map(base: &PersistenceDiagram, target: &PersistenceDiagram) -> LogVector {
    let matching = w2_distance(base, target);
    let mut point_vectors = vec![[0.0_f64; 2]; base.len()];
    let mut diagonal_components = Vec::new();
    for (left, right) in matching.pairs() {
        match (left, right) {
            (MatchEnd::Point { index, point: x }, MatchEnd::Point { point: y, .. }) => {
                point_vectors[*index] = sub(y.coords(), x.coords());
            }
            (MatchEnd::Point { index, point: x }, MatchEnd::Diagonal) => {
                point_vectors[*index] = sub(x.diagonal_projection(), x.coords());
            }
            (MatchEnd::Diagonal, MatchEnd::Point { point: y, .. }) => {
                diagonal_components.push(DiagonalComponent {
                    attachment: y.diagonal_projection(),
                    vector: y.perpendicular(),
                });
            }
            (MatchEnd::Diagonal, MatchEnd::Diagonal) => {}
        }
    }
    LogVector {
        tangent: TangentVector {
            base: base.clone(),
            point_vectors,
            diagonal_components,
        },
        matching,
    }
}

/// Relative tolerance for deciding that two diagonal attachments coincide.
const ATTACHMENT_TOL: f64 = 1e-9;

/// Best total inner product over partial pairings of two vector sets,
/// allowing any component to stay unpaired (contributing zero). Solved as a
/// small assignment problem.
fn max_partial_pairing(us: &[[f64; 2]], vs: &[[f64; 2]]) -> f64 {
    if us.is_empty() || vs.is_empty() {
        return 0.0;
    }
    let p = us.len();
    let q = vs.len();
    let size = p + q;
    // Real pairs cost the negated inner product; pairing with a phantom
    // (staying unpaired) costs zero. Minimizing picks the best positive set.
    let mut cost = vec![vec![0.0_f64; size]; size];
    for (i, u) in us.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            cost[i][j] = -dot(*u, *v);
        }
    }
    let assign = assignment::solve(&cost);
    let mut total = 0.0;
    for (i, &j) in assign.iter().enumerate().take(p) {
        if j < q {
            total += dot(us[i], vs[j]);
        }
    }
    total
}

/// Aligned inner product of two tangent vectors at the same base.
///
/// Point vectors pair by shared base point. Diagonal components pair only
/// within a shared attachment point (within a small relative tolerance);
/// components attached elsewhere describe orthogonal directions and
/// contribute nothing. Within one attachment the pairing maximizing the
/// total inner product is used, so `inner_product(u, u) == u.norm2()`.
pub fn inner_product(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if u.base != v.base {
        return Err(Error::BaseMismatch);
    }
    let mut total = 0.0;
    for (a, b) in u.point_vectors.iter().zip(&v.point_vectors) {
        total += dot(*a, *b);
    }

    if !u.diagonal_components.is_empty() && !v.diagonal_components.is_empty() {
        // Cluster the union of attachments along the diagonal.
        #[derive(Clone, Copy)]
        struct Tagged {
            m: f64,
            from_u: bool,
            vector: [f64; 2],
        }
        let mut all: Vec<Tagged> = u
            .diagonal_components
            .iter()
            .map(|c| Tagged {
                m: c.attachment[0],
                from_u: true,
                vector: c.vector,
            })
            .chain(v.diagonal_components.iter().map(|c| Tagged {
                m: c.attachment[0],
                from_u: false,
                vector: c.vector,
            }))
            .collect();
        all.sort_by(|a, b| a.m.total_cmp(&b.m));
        let mut start = 0;
        while start < all.len() {
            let mut end = start + 1;
            while end < all.len()
                && all[end].m - all[end - 1].m
                    <= ATTACHMENT_TOL * (1.0 + all[end].m.abs())
            {
                end += 1;
            }
            let us: Vec<[f64; 2]> = all[start..end]
                .iter()
                .filter(|t| t.from_u)
                .map(|t| t.vector)
                .collect();
            let vs: Vec<[f64; 2]> = all[start..end]
                .iter()
                .filter(|t| !t.from_u)
                .map(|t| t.vector)
                .collect();
            total += max_partial_pairing(&us, &vs);
            start = end;
        }
    }
    Ok(total)
}

/// Cosine of the angle between two tangent vectors, clamped to `[-1, 1]`.
/// Zero vectors are treated as orthogonal to everything.
pub fn angle_cosine(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    let inner = inner_product(u, v)?;
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((inner / (nu * nv)).clamp(-1.0, 1.0))
}

/// Squared cone metric: `||u||^2 + ||v||^2 - 2 <u, v>`, floored at zero.
pub fn cone_metric2(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    let inner = inner_product(u, v)?;
    Ok((u.norm2() + v.norm2() - 2.0 * inner).max(0.0))
}

/// The cone metric between two tangent vectors at the same base.
pub fn cone_metric(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    Ok(cone_metric2(u, v)?.sqrt())
}

/// The hugging function `kappa_z^y(x)`:
///
/// `1 - (C_z^2(log_z x, log_z y) - W2^2(x, y)) / W2^2(y, z)`.
///
/// Values at most 1; equality means the cone metric between the two logs
/// exactly realizes the distance between their targets (the geodesics "hug"
/// the space). Undefined when `y` coincides with `z`.
pub fn hugging(
    z: &PersistenceDiagram,
    y: &PersistenceDiagram,
    x: &PersistenceDiagram,
) -> Result<f64> {
    let dyz2 = {
        let d = w2(y, z);
        d * d
    };
    if dyz2 == 0.0 {
        return Err(Error::HuggingUndefined);
    }
    let lx = log_map(z, x);
    let ly = log_map(z, y);
    let c2 = cone_metric2(&lx.tangent, &ly.tangent)?;
    let dxy = w2(x, y);
    Ok(1.0 - (c2 - dxy * dxy) / dyz2)
}

/// The barycenter double sum `(1/L^2) * sum_i sum_j <log D_i, log D_j>` of
/// the logs at a candidate mean. Vanishes at a flat Fréchet mean; strictly
/// positive at nearby non-mean diagrams.
pub fn barycenter_equality_check(
    diagrams: &[PersistenceDiagram],
    candidate: &PersistenceDiagram,
) -> Result<f64> {
    if diagrams.is_empty() {
        return Err(Error::Arity {
            context: "diagram family".into(),
            expected: 1,
            got: 0,
        });
    }
    let logs: Vec<LogVector> = diagrams.iter().map(|d| log_map(candidate, d)).collect();
    let l = diagrams.len() as f64;
    let mut total = 0.0;
    for a in &logs {
        for b in &logs {
            total += inner_product(&a.tangent, &b.tangent)?;
        }
    }
    Ok(total / (l * l))
}

/// One-sided barycenter test `(1/L) * sum_i <log D_i, log y>` at a
/// candidate mean; nonpositive for every direction `y` at a true mean.
pub fn barycenter_directional_check(
    diagrams: &[PersistenceDiagram],
    candidate: &PersistenceDiagram,
    y: &PersistenceDiagram,
) -> Result<f64> {
    if diagrams.is_empty() {
        return Err(Error::Arity {
            context: "diagram family".into(),
            expected: 1,
            got: 0,
        });
    }
    let ly = log_map(candidate, y);
    let mut total = 0.0;
    for d in diagrams {
        let ld = log_map(candidate, d);
        total += inner_product(&ld.tangent, &ly.tangent)?;
    }
    Ok(total / diagrams.len() as f64)
}

/// Both sides of the hugging equality at a candidate mean `z_star`:
///
/// `W2^2(y, z*) * (1/L) sum_i kappa_{z*}^y(D_i)
///    = (1/L) sum_i [W2^2(D_i, y) - W2^2(D_i, z*)]`.
///
/// The equality holds exactly when `z_star` is the Fréchet mean.
#[derive(Debug, Clone, Copy)]
pub struct HuggingEquality {
    pub lhs: f64,
    pub rhs: f64,
}

impl HuggingEquality {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Evaluates both sides of the hugging equality. Errors when `y` coincides
/// with `z_star` (each hugging value would be undefined).
pub fn hugging_equality_check(
    diagrams: &[PersistenceDiagram],
    z_star: &PersistenceDiagram,
    y: &PersistenceDiagram,
) -> Result<HuggingEquality> {
    if diagrams.is_empty() {
        return Err(Error::Arity {
            context: "diagram family".into(),
            expected: 1,
            got: 0,
        });
    }
    let dyz = w2(y, z_star);
    let dyz2 = dyz * dyz;
    let l = diagrams.len() as f64;
    let mut kappa_sum = 0.0;
    let mut rhs = 0.0;
    for d in diagrams {
        kappa_sum += hugging(z_star, y, d)?;
        let dy = w2(d, y);
        let dz = w2(d, z_star);
        rhs += dy * dy - dz * dz;
    }
    Ok(HuggingEquality {
        lhs: dyz2 * kappa_sum / l,
        rhs: rhs / l,
    })
}

/// Builds the mixture diagram of a grouping under weights `lambda`: one
/// point per nontrivial row at `sum_j lambda_j * G_i^j`. Requires every
/// nontrivial row to be fully off-diagonal (as in a flat grouping) and the
/// weights to be a probability vector.
pub fn lambda_mixture(grouping: &Grouping, lambda: &[f64]) -> Result<PersistenceDiagram> {
    let l = grouping.num_columns();
    if lambda.len() != l {
        return Err(Error::Arity {
            context: "mixture weights".into(),
            expected: l,
            got: lambda.len(),
        });
    }
    let sum: f64 = lambda.iter().sum();
    if lambda.iter().any(|&w| !w.is_finite() || w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights { sum });
    }
    let mut points = Vec::new();
    for i in 0..grouping.num_rows() {
        if grouping.row_is_trivial(i) {
            continue;
        }
        let row = grouping.row_points(i);
        if row.len() != l {
            return Err(Error::Precondition(
                "lambda mixtures need a grouping whose nontrivial rows are fully off-diagonal"
                    .into(),
            ));
        }
        let mut c = [0.0_f64; 2];
        for (w, p) in lambda.iter().zip(&row) {
            c[0] += w * p.birth();
            c[1] += w * p.death();
        }
        // A convex combination of points strictly above the diagonal stays
        // strictly above it.
        points.push(PlanePoint::new(c[0], c[1])?);
    }
    Ok(PersistenceDiagram::new(points))
}

/// Outcome of the Cauchy-family computation: the squared cone distance
/// between two truncations and its closed-form value.
#[derive(Debug, Clone, Copy)]
pub struct CauchyCheck {
    pub cone_distance2: f64,
    /// `2 * sum_{i=n+1}^{m} 1/i^2`; tends to 0 as both indices grow.
    pub bound: f64,
}

/// The classical Cauchy-but-divergent family on the tangent cone at
/// `{(0, 1/i^2) : i <= n_max}`: the vector `V_N` moves the first `N` points
/// by `(1/i, -1/i)` and leaves the rest fixed. The squared cone distance
/// between `V_n` and `V_m` is exactly `2 * sum_{i=n+1}^{m} 1/i^2`, which
/// shrinks as the truncations deepen even though the limits would escape
/// the cone. Requires `1 <= n <= m <= n_max`.
pub fn cauchy_family_check(n_max: usize, n: usize, m: usize) -> Result<CauchyCheck> {
    if n < 1 || n > m || m > n_max {
        return Err(Error::Precondition(format!(
            "need 1 <= n <= m <= n_max, got n = {n}, m = {m}, n_max = {n_max}"
        )));
    }
    let base: PersistenceDiagram = (1..=n_max)
        .map(|i| {
            let i2 = (i * i) as f64;
            PlanePoint::new(0.0, 1.0 / i2).expect("1/i^2 > 0")
        })
        .collect();
    let truncation = |upto: usize| -> TangentVector {
        let pvs: Vec<[f64; 2]> = (1..=n_max)
            .map(|i| {
                if i <= upto {
                    let inv = 1.0 / i as f64;
                    [inv, -inv]
                } else {
                    [0.0, 0.0]
                }
            })
            .collect();
        TangentVector::new(base.clone(), pvs, Vec::new()).expect("finite components")
    };
    let vn = truncation(n);
    let vm = truncation(m);
    let cone_distance2 = cone_metric2(&vn, &vm)?;
    let bound = 2.0 * (n + 1..=m).map(|i| 1.0 / (i * i) as f64).sum::<f64>();
    Ok(CauchyCheck {
        cone_distance2,
        bound,
    })
}

/// Finite-difference estimate of the angle cosine at `base` between the
/// directions of `x` and `y`: walks a short way along both geodesics and
/// applies the law of cosines. Cross-checks [`angle_cosine`] on flat
/// configurations. Requires `t, s` in `(0, 1]` and both targets distinct
/// from the base.
pub fn angle_cosine_finite_difference(
    base: &PersistenceDiagram,
    x: &PersistenceDiagram,
    y: &PersistenceDiagram,
    t: f64,
    s: f64,
) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0 && s > 0.0 && s <= 1.0) {
        return Err(Error::ParameterOutOfRange { t: t.min(s) });
    }
    let mx = w2_distance(base, x);
    let my = w2_distance(base, y);
    if mx.cost() == 0.0 || my.cost() == 0.0 {
        return Err(Error::Precondition(
            "finite-difference angle needs targets distinct from the base".into(),
        ));
    }
    let gx = geodesic(base, x, &mx, t)?.diagram;
    let gy = geodesic(base, y, &my, s)?.diagram;
    let a = w2(base, &gx);
    let b = w2(base, &gy);
    let c = w2(&gx, &gy);
    Ok(((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0))
}
