//! Command-line front end: distances, means, variance, flatness
//! certificates, convergence experiments, and tangent-space checks over
//! persistence diagrams stored as JSON files.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad data, cap
//! exceeded, missing files), 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use pdfm::convergence::{
    convergence_experiment, rate_fit, reports_to_csv, ConvergenceConfig, ConvergenceReport,
};
use pdfm::diagram::{load_diagram_dir, PersistenceDiagram};
use pdfm::frechet::{
    brute_force_optimal_grouping_with_cap, certify_unique_mean, turner_mean, TurnerInit,
    DEFAULT_GROUPING_BRUTE_CAP,
};
use pdfm::grouping::{
    check_flatness, find_flat_grouping, mean_diagram, variance_closed_form,
    variance_definitional, Grouping,
};
use pdfm::manifest::RunManifest;
use pdfm::tangent::{barycenter_equality_check, hugging, hugging_equality_check, lambda_mixture};
use pdfm::wasserstein::{brute_force_w2_with_cap, w2_distance, Matching, DEFAULT_W2_BRUTE_CAP};
use pdfm::{Error, Result};

#[derive(Parser)]
#[command(
    name = "pdfm",
    version,
    about = "Metric geometry of persistence diagrams: distances, means, and convergence checks"
)]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    /// Alternating match-and-average iteration.
    Turner,
    /// Exhaustive grouping search (small inputs only).
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// 2-Wasserstein distance between two diagram files.
    Dist {
        a: PathBuf,
        b: PathBuf,
        /// Use the exhaustive matcher and report how many optima tie.
        #[arg(long)]
        oracle: bool,
        /// Write the optimal matching as JSON to this path.
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Fréchet mean of every diagram in a directory.
    Mean {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Turner)]
        algorithm: Algorithm,
        /// Starting diagram index, or "random".
        #[arg(long, default_value = "0")]
        init: String,
        /// Seed for --init random; generated and printed when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Write the full result as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance of a grouping over a diagram directory.
    Variance {
        grouping: PathBuf,
        #[arg(long)]
        diagrams: PathBuf,
    },
    /// Search for a flat grouping of a diagram directory.
    Flatness {
        dir: PathBuf,
        /// Write the flat grouping as JSON when one is found.
        #[arg(long)]
        emit_grouping: Option<PathBuf>,
    },
    /// Monte Carlo validation of the sample-mean convergence rate.
    Converge {
        dir: PathBuf,
        /// Grouping file; defaults to searching the directory for a flat one.
        #[arg(long)]
        grouping: Option<PathBuf>,
        /// Comma-separated sample sizes.
        #[arg(long = "B", value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        sample_sizes: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Master seed; generated and printed when absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Write CSV here (with a manifest sidecar) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hugging equality at the certified mean of a directory.
    Hugging {
        dir: PathBuf,
        /// JSON array of mixture weights defining the comparison diagram.
        #[arg(long)]
        y: PathBuf,
    },
    /// Barycenter equality at a candidate mean.
    Barycheck {
        dir: PathBuf,
        /// Candidate mean diagram file.
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Brute-force oracles: one directory (grouping search) or two diagram
    /// files (matching enumeration).
    Oracle {
        #[arg(num_args = 1..=2)]
        paths: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dist {
            a,
            b,
            oracle,
            matching,
        } => cmd_dist(&a, &b, oracle, matching.as_deref(), cli.json),
        Command::Mean {
            dir,
            algorithm,
            init,
            seed,
            max_iters,
            out,
        } => cmd_mean(&dir, algorithm, &init, seed, max_iters, out.as_deref(), cli.json),
        Command::Variance { grouping, diagrams } => cmd_variance(&grouping, &diagrams, cli.json),
        Command::Flatness { dir, emit_grouping } => {
            cmd_flatness(&dir, emit_grouping.as_deref(), cli.json)
        }
        Command::Converge {
            dir,
            grouping,
            sample_sizes,
            trials,
            seed,
            out,
        } => cmd_converge(
            &dir,
            grouping.as_deref(),
            sample_sizes,
            trials,
            seed,
            out.as_deref(),
            cli.json,
        ),
        Command::Hugging { dir, y } => cmd_hugging(&dir, &y, cli.json),
        Command::Barycheck { dir, candidate } => cmd_barycheck(&dir, &candidate, cli.json),
        Command::Oracle { paths } => cmd_oracle(&paths, cli.json),
    }
}

/// Enumeration-cap override from the environment.
fn cap_override() -> Result<Option<usize>> {
    match std::env::var("PDFM_BRUTE_CAP") {
        Ok(s) => s.trim().parse::<usize>().map(Some).map_err(|e| Error::Parse {
            context: "PDFM_BRUTE_CAP".into(),
            message: e.to_string(),
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Parse {
            context: "PDFM_BRUTE_CAP".into(),
            message: e.to_string(),
        }),
    }
}

fn load_family(dir: &Path) -> Result<(Vec<PathBuf>, Vec<PersistenceDiagram>)> {
    let pairs = load_diagram_dir(dir)?;
    if pairs.is_empty() {
        return Err(Error::Precondition(format!(
            "no *.json diagram files in {}",
            dir.display()
        )));
    }
    Ok(pairs.into_iter().unzip())
}

fn manifest<P: AsRef<Path>>(seed: Option<u64>, inputs: &[P]) -> Result<RunManifest> {
    RunManifest::collect(std::env::args().collect(), seed, inputs)
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("valid JSON"));
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    fs::write(path, format!("{:#}\n", value))?;
    Ok(())
}

fn points_line(d: &PersistenceDiagram) -> String {
    d.to_json_value()["points"].to_string()
}

fn generated_seed() -> u64 {
    let seed: u64 = rand::random();
    eprintln!("seed: {seed}");
    seed
}

fn cmd_dist(
    a: &Path,
    b: &Path,
    oracle: bool,
    matching_out: Option<&Path>,
    json_mode: bool,
) -> Result<()> {
    let da = PersistenceDiagram::load(a)?;
    let db = PersistenceDiagram::load(b)?;
    let (matching, optima): (Matching, Option<usize>) = if oracle {
        let cap = cap_override()?.unwrap_or(DEFAULT_W2_BRUTE_CAP);
        let bf = brute_force_w2_with_cap(&da, &db, cap)?;
        let count = bf.optima_count;
        (bf.matching, Some(count))
    } else {
        (w2_distance(&da, &db), None)
    };
    let man = manifest(None, &[a, b])?;
    if let Some(path) = matching_out {
        let mut value = matching.to_json_value();
        value["manifest"] = man.to_json_value();
        write_json(path, &value)?;
    }
    if json_mode {
        let mut value = json!({
            "distance": matching.distance(),
            "cost": matching.cost(),
            "matching": matching.to_json_value(),
            "manifest": man.to_json_value(),
        });
        if let Some(n) = optima {
            value["optima_count"] = json!(n);
        }
        print_json(&value);
    } else {
        println!("{}", matching.distance());
        if let Some(n) = optima {
            println!("optima: {n}");
        }
    }
    Ok(())
}

fn cmd_mean(
    dir: &Path,
    algorithm: Algorithm,
    init_arg: &str,
    seed: Option<u64>,
    max_iters: usize,
    out: Option<&Path>,
    json_mode: bool,
) -> Result<()> {
    let (files, ds) = load_family(dir)?;
    let value = match algorithm {
        Algorithm::Turner => {
            let (init, used_seed) = if init_arg == "random" {
                let s = seed.unwrap_or_else(generated_seed);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                (TurnerInit::Index(rng.gen_range(0..ds.len())), Some(s))
            } else {
                let k: usize = init_arg.parse().map_err(|_| Error::Parse {
                    context: "--init".into(),
                    message: format!("expected a diagram index or \"random\", got {init_arg:?}"),
                })?;
                (TurnerInit::Index(k), seed)
            };
            let result = turner_mean(&ds, init, max_iters)?;
            let man = manifest(used_seed, &files)?;
            if !json_mode {
                println!("mean: {}", points_line(&result.mean));
                println!("variance: {}", result.variance);
                println!("iterations: {}", result.iterations);
                println!("converged: {}", result.converged);
                println!("certified unique: {}", result.unique_certified);
            }
            json!({
                "algorithm": "turner",
                "init": result.init_description,
                "mean": result.mean.to_json_value(),
                "grouping": result.grouping.to_json_value(),
                "variance": result.variance,
                "variance_trace": result.variance_trace,
                "iterations": result.iterations,
                "converged": result.converged,
                "unique_certified": result.unique_certified,
                "certificate": result.certificate.to_json_value(),
                "tie_flag": result.tie_flag,
                "manifest": man.to_json_value(),
            })
        }
        Algorithm::Brute => {
            let cap = cap_override()?.unwrap_or(DEFAULT_GROUPING_BRUTE_CAP);
            let search = brute_force_optimal_grouping_with_cap(&ds, cap)?;
            let mean = mean_diagram(&search.grouping)?;
            let certificate = check_flatness(&search.grouping);
            let man = manifest(seed, &files)?;
            if !json_mode {
                println!("mean: {}", points_line(&mean));
                println!("variance: {}", search.variance);
                println!("optima: {}", search.optima_count);
                println!("enumerated: {}", search.enumerated);
            }
            json!({
                "algorithm": "brute",
                "mean": mean.to_json_value(),
                "grouping": search.grouping.to_json_value(),
                "variance": search.variance,
                "optima_count": search.optima_count,
                "enumerated": search.enumerated,
                "certificate": certificate.to_json_value(),
                "manifest": man.to_json_value(),
            })
        }
    };
    if let Some(path) = out {
        write_json(path, &value)?;
    }
    if json_mode {
        print_json(&value);
    }
    Ok(())
}

fn cmd_variance(grouping_path: &Path, diagrams_dir: &Path, json_mode: bool) -> Result<()> {
    let (files, ds) = load_family(diagrams_dir)?;
    let g = Grouping::load(grouping_path, ds)?;
    let definitional = variance_definitional(&g);
    let closed_form = variance_closed_form(&g);
    let mean = mean_diagram(&g)?;
    let mut inputs = vec![grouping_path.to_path_buf()];
    inputs.extend(files);
    let man = manifest(None, &inputs)?;
    if json_mode {
        print_json(&json!({
            "variance": definitional,
            "definitional": definitional,
            "closed_form": closed_form,
            "mean": mean.to_json_value(),
            "manifest": man.to_json_value(),
        }));
    } else {
        println!("variance: {definitional}");
        println!("mean: {}", points_line(&mean));
    }
    Ok(())
}

fn cmd_flatness(dir: &Path, emit: Option<&Path>, json_mode: bool) -> Result<()> {
    let (files, ds) = load_family(dir)?;
    let man = manifest(None, &files)?;
    match find_flat_grouping(&ds) {
        Some(g) => {
            let report = check_flatness(&g);
            let mean = mean_diagram(&g)?;
            if let Some(path) = emit {
                g.save(path)?;
                write_json(
                    &path.with_extension("manifest.json"),
                    &man.to_json_value(),
                )?;
            }
            if json_mode {
                print_json(&json!({
                    "flat": true,
                    "report": report.to_json_value(),
                    "grouping": g.to_json_value(),
                    "mean": mean.to_json_value(),
                    "manifest": man.to_json_value(),
                }));
            } else {
                println!("flat: true");
                if let Some(witness) = report.witness_lambda {
                    println!("witness lambda: {witness}");
                }
                println!("mean: {}", points_line(&mean));
            }
        }
        None => {
            if emit.is_some() {
                eprintln!("no flat grouping found; nothing written");
            }
            if json_mode {
                print_json(&json!({
                    "flat": false,
                    "manifest": man.to_json_value(),
                }));
            } else {
                println!("flat: false");
            }
        }
    }
    Ok(())
}

fn report_json(r: &ConvergenceReport) -> Value {
    json!({
        "b": r.b,
        "trials": r.trials,
        "estimate": r.estimate,
        "std_error": r.std_error,
        "bound": r.bound,
        "seed": r.seed,
    })
}

fn cmd_converge(
    dir: &Path,
    grouping_path: Option<&Path>,
    sample_sizes: Vec<usize>,
    trials: usize,
    seed: Option<u64>,
    out: Option<&Path>,
    json_mode: bool,
) -> Result<()> {
    let (files, ds) = load_family(dir)?;
    let g = match grouping_path {
        Some(p) => Grouping::load(p, ds)?,
        None => find_flat_grouping(&ds).ok_or_else(|| {
            Error::Precondition(
                "family has no flat grouping; pass one explicitly with --grouping".into(),
            )
        })?,
    };
    let seed = seed.unwrap_or_else(generated_seed);
    let config = ConvergenceConfig {
        sample_sizes,
        trials,
        seed,
    };
    let reports = convergence_experiment(&g, &config)?;
    let csv = reports_to_csv(&reports);
    let fit = rate_fit(&reports);
    let mut inputs: Vec<PathBuf> = files;
    if let Some(p) = grouping_path {
        inputs.push(p.to_path_buf());
    }
    let man = manifest(Some(seed), &inputs)?;
    if let Some(path) = out {
        fs::write(path, &csv)?;
        write_json(&path.with_extension("manifest.json"), &man.to_json_value())?;
    }
    if json_mode {
        let mut value = json!({
            "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
            "manifest": man.to_json_value(),
        });
        if let Ok(f) = &fit {
            value["rate"] = json!({"slope": f.slope, "intercept": f.intercept});
        }
        print_json(&value);
    } else if out.is_none() {
        print!("{csv}");
    } else if let Ok(f) = &fit {
        println!("rate slope: {}", f.slope);
    }
    Ok(())
}

fn cmd_hugging(dir: &Path, weights_path: &Path, json_mode: bool) -> Result<()> {
    let (files, ds) = load_family(dir)?;
    let certified = certify_unique_mean(&ds)?.ok_or_else(|| {
        Error::Precondition(
            "family has no flat grouping, so no certified mean to check against".into(),
        )
    })?;
    let raw = fs::read_to_string(weights_path)?;
    let weights: Vec<f64> = serde_json::from_str(&raw).map_err(|e| Error::Parse {
        context: weights_path.display().to_string(),
        message: format!("expected a JSON array of weights: {e}"),
    })?;
    let y = lambda_mixture(&certified.grouping, &weights)?;
    let eq = hugging_equality_check(&ds, &certified.mean, &y)?;
    let kappas: Vec<f64> = ds
        .iter()
        .map(|d| hugging(&certified.mean, &y, d))
        .collect::<Result<_>>()?;
    let mut inputs = files;
    inputs.push(weights_path.to_path_buf());
    let man = manifest(None, &inputs)?;
    if json_mode {
        print_json(&json!({
            "lhs": eq.lhs,
            "rhs": eq.rhs,
            "residual": eq.residual(),
            "kappa": kappas,
            "mean": certified.mean.to_json_value(),
            "y": y.to_json_value(),
            "manifest": man.to_json_value(),
        }));
    } else {
        println!("lhs: {}", eq.lhs);
        println!("rhs: {}", eq.rhs);
        println!("residual: {}", eq.residual());
        for (i, k) in kappas.iter().enumerate() {
            println!("kappa[{i}]: {k}");
        }
    }
    Ok(())
}

fn cmd_barycheck(dir: &Path, candidate_path: &Path, json_mode: bool) -> Result<()> {
    let (files, ds) = load_family(dir)?;
    let candidate = PersistenceDiagram::load(candidate_path)?;
    let value = barycenter_equality_check(&ds, &candidate)?;
    let mut inputs = files;
    inputs.push(candidate_path.to_path_buf());
    let man = manifest(None, &inputs)?;
    if json_mode {
        print_json(&json!({
            "lhs": value,
            "rhs": 0.0,
            "residual": value,
            "manifest": man.to_json_value(),
        }));
    } else {
        println!("lhs: {value}");
        println!("rhs: 0");
        println!("residual: {value}");
    }
    Ok(())
}

fn cmd_oracle(paths: &[PathBuf], json_mode: bool) -> Result<()> {
    match paths {
        [dir] if dir.is_dir() => {
            let (files, ds) = load_family(dir)?;
            let cap = cap_override()?.unwrap_or(DEFAULT_GROUPING_BRUTE_CAP);
            let search = brute_force_optimal_grouping_with_cap(&ds, cap)?;
            let mean = mean_diagram(&search.grouping)?;
            let man = manifest(None, &files)?;
            if json_mode {
                print_json(&json!({
                    "variance": search.variance,
                    "optima_count": search.optima_count,
                    "enumerated": search.enumerated,
                    "grouping": search.grouping.to_json_value(),
                    "mean": mean.to_json_value(),
                    "manifest": man.to_json_value(),
                }));
            } else {
                println!("variance: {}", search.variance);
                println!("optima: {}", search.optima_count);
                println!("enumerated: {}", search.enumerated);
                println!("mean: {}", points_line(&mean));
            }
            Ok(())
        }
        [a, b] => {
            let da = PersistenceDiagram::load(a)?;
            let db = PersistenceDiagram::load(b)?;
            let cap = cap_override()?.unwrap_or(DEFAULT_W2_BRUTE_CAP);
            let bf = brute_force_w2_with_cap(&da, &db, cap)?;
            let man = manifest(None, &[a, b])?;
            if json_mode {
                print_json(&json!({
                    "distance": bf.matching.distance(),
                    "cost": bf.matching.cost(),
                    "optima_count": bf.optima_count,
                    "matching": bf.matching.to_json_value(),
                    "manifest": man.to_json_value(),
                }));
            } else {
                println!("{}", bf.matching.distance());
                println!("optima: {}", bf.optima_count);
            }
            Ok(())
        }
        [single] => Err(Error::Precondition(format!(
            "{} is not a directory; the matching oracle needs two diagram files",
            single.display()
        ))),
        _ => unreachable!("clap enforces 1..=2 paths"),
    }
}
