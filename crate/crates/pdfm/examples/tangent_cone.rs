//! The tangent cone at a diagram: log maps, aligned inner products, the
//! cone metric, and a family that is Cauchy without converging.

use pdfm::diagram::PersistenceDiagram;
use pdfm::frechet::certify_unique_mean;
use pdfm::tangent::{
    angle_cosine, angle_cosine_finite_difference, cauchy_family_check, cone_metric,
    inner_product, log_map,
};
use pdfm::wasserstein::w2;

fn main() -> pdfm::Result<()> {
    let family = vec![
        PersistenceDiagram::from_coords(&[[0.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[1.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[0.0, 11.0]])?,
    ];
    let mean = certify_unique_mean(&family)?.expect("family is flat").mean;
    println!("base (the mean): {}", mean.points()[0]);

    let logs: Vec<_> = family.iter().map(|d| log_map(&mean, d)).collect();
    for (i, lv) in logs.iter().enumerate() {
        let v = lv.tangent.point_vectors()[0];
        println!(
            "log to diagram {i}: ({}, {})  norm {}",
            v[0],
            v[1],
            lv.tangent.norm()
        );
        // The log's length is the distance it came from.
        assert!((lv.norm2() - lv.matching.cost()).abs() < 1e-12);
    }

    // Inner products and angles between the first two logs.
    let u = &logs[0].tangent;
    let v = &logs[1].tangent;
    println!("\n<u, v> = {}", inner_product(u, v)?);
    println!("cos angle(u, v) = {}", angle_cosine(u, v)?);

    // The cone metric between two logs recovers the distance between their
    // targets whenever the geodesics hug the space, as they do here.
    let cm = cone_metric(u, v)?;
    let direct = w2(&family[0], &family[1]);
    println!("cone metric {cm} vs direct distance {direct}");
    assert!((cm - direct).abs() < 1e-12);

    // A finite-difference walk along both geodesics reproduces the cosine.
    let fd = angle_cosine_finite_difference(&mean, &family[0], &family[1], 1e-3, 1e-3)?;
    println!("finite-difference cosine: {fd}");
    assert!((fd - angle_cosine(u, v)?).abs() < 1e-4);

    // At the empty diagram, logs attach along the diagonal; directions with
    // different attachments are orthogonal, so no two directions can
    // oppose: the cone has no two-sided lines through its apex.
    let empty = PersistenceDiagram::empty();
    let a = log_map(&empty, &PersistenceDiagram::from_coords(&[[0.0, 2.0]])?);
    let b = log_map(&empty, &PersistenceDiagram::from_coords(&[[4.0, 8.0]])?);
    println!(
        "\nat the empty diagram: cos = {}",
        angle_cosine(&a.tangent, &b.tangent)?
    );
    assert!(a.tangent.opposite().is_none());

    // A Cauchy family that never converges: moving the first N points of
    // x_n = (0, 1/n^2) by (1/n, -1/n) gives vectors V_N whose pairwise cone
    // distances are tails of a convergent series.
    println!("\nCauchy family (squared cone distances):");
    for (n, m) in [(1, 2), (2, 4), (4, 8), (8, 16), (16, 32), (32, 64)] {
        let check = cauchy_family_check(64, n, m)?;
        println!(
            "  d^2(V_{n:2}, V_{m:2}) = {:+.6e} (tail sum {:+.6e})",
            check.cone_distance2, check.bound
        );
        assert!((check.cone_distance2 - check.bound).abs() < 1e-12);
    }
    Ok(())
}
