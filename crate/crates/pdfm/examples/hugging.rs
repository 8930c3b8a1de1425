//! The hugging function and the equalities that characterize Fréchet
//! means: kappa is identically 1 at a flat mean, the barycenter double sum
//! vanishes there, and both grow when the candidate moves off the mean.

use pdfm::diagram::PersistenceDiagram;
use pdfm::frechet::certify_unique_mean;
use pdfm::tangent::{
    barycenter_equality_check, hugging, hugging_equality_check, lambda_mixture,
};

fn main() -> pdfm::Result<()> {
    let family = vec![
        PersistenceDiagram::from_coords(&[[0.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[1.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[0.0, 11.0]])?,
    ];
    let certified = certify_unique_mean(&family)?.expect("family is flat");
    let mean = &certified.mean;

    // A cluster-respecting comparison diagram: a weighted mixture of the
    // rows of the flat grouping.
    let y = lambda_mixture(&certified.grouping, &[0.5, 0.25, 0.25])?;
    println!("mean: {}", mean.points()[0]);
    println!("mixture y: {}", y.points()[0]);

    println!("\nhugging values at the mean (all should be 1):");
    for (i, d) in family.iter().enumerate() {
        let k = hugging(mean, &y, d)?;
        println!("  kappa_mean^y(D{i}) = {k}");
        assert!((k - 1.0).abs() < 1e-9);
        // The roles of base and reference can swap; flatness keeps kappa 1.
        let k = hugging(&y, mean, d)?;
        assert!((k - 1.0).abs() < 1e-9);
    }

    // The averaged hugging equality ties the mean's defining property to
    // distances alone.
    let eq = hugging_equality_check(&family, mean, &y)?;
    println!("\nhugging equality: lhs {} rhs {}", eq.lhs, eq.rhs);
    println!("residual: {}", eq.residual());
    assert!(eq.residual().abs() < 1e-9);

    // The barycenter double sum vanishes exactly at the mean...
    let at_mean = barycenter_equality_check(&family, mean)?;
    println!("\nbarycenter sum at the mean: {at_mean}");
    assert!(at_mean.abs() < 1e-9);

    // ...and is strictly positive anywhere else.
    for (i, d) in family.iter().enumerate() {
        let off = barycenter_equality_check(&family, d)?;
        println!("barycenter sum at D{i}: {off}");
        assert!(off > 1e-6);
    }
    Ok(())
}
