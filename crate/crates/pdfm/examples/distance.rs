//! Optimal matchings between two diagrams, cross-checked against the
//! exhaustive matcher.

use pdfm::diagram::PersistenceDiagram;
use pdfm::wasserstein::{brute_force_w2, total_persistence, w2_distance};

fn main() -> pdfm::Result<()> {
    // Two diagrams whose points sit on the corners of a square: each point
    // of one is equidistant from both points of the other, so two optimal
    // matchings tie.
    let red = PersistenceDiagram::from_coords(&[[1.0, 4.0], [3.0, 6.0]])?;
    let black = PersistenceDiagram::from_coords(&[[1.0, 6.0], [3.0, 4.0]])?;

    let matching = w2_distance(&red, &black);
    println!("distance:     {}", matching.distance());
    println!("squared cost: {}", matching.cost());
    for (a, b) in matching.pairs() {
        println!("  {a} -> {b}");
    }

    let oracle = brute_force_w2(&red, &black)?;
    assert!((oracle.matching.cost() - matching.cost()).abs() < 1e-12);
    println!("exhaustive matcher agrees; {} optima tie", oracle.optima_count);

    // Distance to the empty diagram: every point pays its way to the
    // diagonal, so the distance is the total persistence.
    let empty = PersistenceDiagram::empty();
    let to_empty = w2_distance(&red, &empty);
    println!(
        "\nto the empty diagram: {} (total persistence {})",
        to_empty.distance(),
        total_persistence(&red)
    );
    assert!((to_empty.distance() - total_persistence(&red)).abs() < 1e-12);

    // Points near the diagonal would rather vanish than travel: here the
    // optimal matching sends everything to the diagonal even though a
    // point-to-point matching exists.
    let a = PersistenceDiagram::from_coords(&[[0.0, 1.0]])?;
    let b = PersistenceDiagram::from_coords(&[[10.0, 11.0]])?;
    let m = w2_distance(&a, &b);
    println!("\nfar-apart short-lived points:");
    for (x, y) in m.pairs() {
        println!("  {x} -> {y}");
    }
    assert!((m.cost() - 1.0).abs() < 1e-12);
    Ok(())
}
