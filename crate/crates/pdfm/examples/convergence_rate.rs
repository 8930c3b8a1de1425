//! Monte Carlo check of the finite-sample rate: the expected squared
//! distance between the mean of B uniform draws and the population mean
//! stays below sigma^2 / B.

use pdfm::convergence::{
    convergence_experiment, rate_fit, reports_to_csv, ConvergenceConfig,
};
use pdfm::diagram::PersistenceDiagram;
use pdfm::frechet::certify_unique_mean;
use pdfm::grouping::variance_closed_form;

fn main() -> pdfm::Result<()> {
    let family = vec![
        PersistenceDiagram::from_coords(&[[0.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[1.0, 10.0]])?,
        PersistenceDiagram::from_coords(&[[0.0, 11.0]])?,
    ];
    let grouping = certify_unique_mean(&family)?
        .expect("family is flat")
        .grouping;
    let sigma2 = variance_closed_form(&grouping);
    println!("population variance sigma^2 = {sigma2}\n");

    let config = ConvergenceConfig {
        sample_sizes: vec![1, 2, 4, 8, 16, 32, 64],
        trials: 2000,
        seed: 42,
    };
    let reports = convergence_experiment(&grouping, &config)?;
    print!("{}", reports_to_csv(&reports));

    println!();
    for r in &reports {
        let ok = r.estimate <= r.bound + 3.0 * r.std_error;
        println!(
            "B = {:3}: estimate {:.6} <= bound {:.6} + 3se ({})",
            r.b,
            r.estimate,
            r.bound,
            if ok { "ok" } else { "VIOLATED" }
        );
        assert!(ok);
    }

    let fit = rate_fit(&reports)?;
    println!(
        "\nlog-log slope {:.4} (a pure 1/B law gives -1)",
        fit.slope
    );
    assert!(fit.slope < -0.85 && fit.slope > -1.15);
    Ok(())
}
