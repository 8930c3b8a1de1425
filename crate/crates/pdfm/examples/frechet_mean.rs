//! Fréchet means: the alternating match-and-average algorithm against the
//! exhaustive grouping oracle, on a unique instance and on a tied one.

use pdfm::diagram::PersistenceDiagram;
use pdfm::frechet::{
    brute_force_optimal_grouping, certify_unique_mean, turner_mean, TurnerInit,
};
use pdfm::wasserstein::w2;

fn main() -> pdfm::Result<()> {
    let family = vec![
        PersistenceDiagram::from_coords(&[[0.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[1.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[0.0, 11.0]])?,
    ];

    // The alternating algorithm from every starting diagram.
    for start in 0..family.len() {
        let result = turner_mean(&family, TurnerInit::Index(start), 100)?;
        println!(
            "start {start}: mean {} variance {} after {} iterations (converged: {})",
            result.mean.points()[0],
            result.variance,
            result.iterations,
            result.converged,
        );
    }

    // The exhaustive oracle agrees and confirms a unique optimum.
    let oracle = brute_force_optimal_grouping(&family)?;
    println!(
        "oracle: variance {} with {} optimum(s) over {} groupings",
        oracle.variance, oracle.optima_count, oracle.enumerated
    );

    // And the flatness certificate proves uniqueness independently.
    let certified = certify_unique_mean(&family)?.expect("family is flat");
    let turner = turner_mean(&family, TurnerInit::Index(0), 100)?;
    assert!(w2(&certified.mean, &turner.mean) < 1e-9);
    assert_eq!(oracle.optima_count, 1);
    println!("certified unique mean: {}", certified.mean.points()[0]);

    // The square family has two optimal groupings; convergence depends on
    // the start, and the tie is flagged.
    let red = PersistenceDiagram::from_coords(&[[1.0, 4.0], [3.0, 6.0]])?;
    let black = PersistenceDiagram::from_coords(&[[1.0, 6.0], [3.0, 4.0]])?;
    let square = vec![red, black];
    println!("\nsquare family:");
    let oracle = brute_force_optimal_grouping(&square)?;
    println!(
        "oracle: variance {} with {} tied optima",
        oracle.variance, oracle.optima_count
    );
    for start in 0..2 {
        let result = turner_mean(&square, TurnerInit::Index(start), 100)?;
        let coords: Vec<String> =
            result.mean.points().iter().map(|p| p.to_string()).collect();
        println!(
            "start {start}: mean {} (tie observed: {:?}, certified: {})",
            coords.join(" "),
            result.tie_flag,
            result.unique_certified,
        );
    }
    Ok(())
}
