//! Flatness certificates: when clusters are tight, far from each other,
//! and far from the diagonal, the family behaves like a product of
//! Euclidean factors and its Fréchet mean is unique.

use pdfm::diagram::PersistenceDiagram;
use pdfm::grouping::{check_flatness, find_flat_grouping, mean_diagram};

fn main() -> pdfm::Result<()> {
    // Three diagrams, each with one point near (0, 10) and one near
    // (60, 90): two tight clusters, both far from the diagonal.
    let family = vec![
        PersistenceDiagram::from_coords(&[[0.0, 10.0], [60.0, 90.0]])?,
        PersistenceDiagram::from_coords(&[[1.0, 10.0], [61.0, 90.0]])?,
        PersistenceDiagram::from_coords(&[[0.0, 11.0], [60.0, 91.0]])?,
    ];
    let grouping = find_flat_grouping(&family).expect("clusters are separated");
    let report = check_flatness(&grouping);
    println!("flat: {}", report.flat);
    println!("row diameters:       {:?}", report.row_diameters);
    println!("inter-row distance:  {}", report.min_inter_distance);
    println!("diagonal clearance:  {}", report.min_diagonal_clearance);
    if let Some((lo, hi)) = report.feasible_interval {
        println!("feasible thresholds: ({lo}, {hi})");
    }
    if let Some(witness) = report.witness_lambda {
        println!("witness threshold:   {witness}");
    }
    let mean = mean_diagram(&grouping)?;
    let coords: Vec<String> = mean.points().iter().map(|p| p.to_string()).collect();
    println!("unique mean: {}", coords.join(" "));

    // The square family is the classic failure: every grouping either
    // mixes rows or has row diameters as large as the separation, so no
    // threshold certifies flatness and the mean genuinely ties.
    let red = PersistenceDiagram::from_coords(&[[1.0, 4.0], [3.0, 6.0]])?;
    let black = PersistenceDiagram::from_coords(&[[1.0, 6.0], [3.0, 4.0]])?;
    println!("\nsquare family:");
    match find_flat_grouping(&[red, black]) {
        Some(_) => unreachable!("the square is not flat"),
        None => println!("flat: false"),
    }
    Ok(())
}
