//! Groupings of a diagram family and the two equivalent variance formulas.

use pdfm::diagram::PersistenceDiagram;
use pdfm::grouping::{
    mean_diagram, variance_closed_form, variance_definitional, Grouping,
};

fn main() -> pdfm::Result<()> {
    // The square family again: two diagrams, two points each.
    let red = PersistenceDiagram::from_coords(&[[1.0, 4.0], [3.0, 6.0]])?;
    let black = PersistenceDiagram::from_coords(&[[1.0, 6.0], [3.0, 4.0]])?;

    // A grouping assigns each column's points to rows (one point per
    // diagram per row); None selects the diagonal for that column.
    let vertical = Grouping::new(
        vec![red.clone(), black.clone()],
        vec![vec![Some(0), Some(0)], vec![Some(1), Some(1)]],
    )?;
    let crossed = Grouping::new(
        vec![red.clone(), black.clone()],
        vec![vec![Some(0), Some(1)], vec![Some(1), Some(0)]],
    )?;

    for (name, g) in [("vertical", &vertical), ("crossed", &crossed)] {
        let def = variance_definitional(g);
        let closed = variance_closed_form(g);
        let mean = mean_diagram(g)?;
        println!("{name} grouping:");
        println!("  variance (definition):  {def}");
        println!("  variance (closed form): {closed}");
        let coords: Vec<String> = mean.points().iter().map(|p| p.to_string()).collect();
        println!("  mean diagram: {}", coords.join(" "));
        assert!((def - closed).abs() < 1e-9);
    }
    // Both pairings of the square cost the same: the variance ties at 2.
    assert_eq!(variance_definitional(&vertical), 2.0);
    assert_eq!(variance_definitional(&crossed), 2.0);

    // Rows may also send columns to the diagonal. Pairing one point with
    // the diagonal splits the difference: the mean point sits halfway to
    // the projection and the row contributes half its squared clearance.
    let solo = PersistenceDiagram::from_coords(&[[0.0, 2.0]])?;
    let nothing = PersistenceDiagram::empty();
    let half = Grouping::new(
        vec![solo, nothing],
        vec![vec![Some(0), None]],
    )?;
    let def = variance_definitional(&half);
    println!("\npoint-vs-diagonal row:");
    println!("  variance: {def}");
    let mean = mean_diagram(&half)?;
    println!("  mean point: {}", mean.points()[0]);
    assert_eq!(def, 0.5);
    Ok(())
}
