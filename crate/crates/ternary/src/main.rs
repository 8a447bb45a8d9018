//! Command-line front end: counting, predictions, series values, sum
//! evaluation, arc classification, batch experiments, and the built-in
//! verification suite.
//!
//! Everything informational (timings, progress, file notices) goes to
//! stderr; stdout carries only the deterministic payload, so piping any
//! subcommand to a file yields output that diffs clean across runs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ternary::cli::{emit_csv, emit_json, parse_alpha, ExperimentConfig};
use ternary::dissect::{self, ArcClass, ProblemInstance};
use ternary::expsum::{self, SumWindow};
use ternary::repcount::{self, exact_count_with};
use ternary::sseries::{self, SeriesVariant};
use ternary::verify;
use ternary::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ternary",
    version,
    about = "Counts N = p1 + p2 + m^n with proportional summands and checks the analytic machinery behind the count"
)]
struct Cli {
    /// Use a single worker thread everywhere.
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count representations of one target exactly.
    Count {
        target: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        /// Proportions "mu1,mu2,mu3"; defaults to thirds.
        #[arg(long)]
        mu: Option<String>,
        /// Absolute window half-width; overrides --h-exponent.
        #[arg(long)]
        half_width: Option<f64>,
        /// Half-width as a power of the target.
        #[arg(long, default_value_t = 0.9)]
        h_exponent: f64,
        /// Euler-product truncation for the attached prediction.
        #[arg(long, default_value_t = repcount::DEFAULT_SERIES_CUTOFF)]
        cutoff: u64,
        /// Local-factor variant: rho-minus-one or rho.
        #[arg(long, default_value = "rho-minus-one")]
        variant: String,
        /// Also list per-m counts.
        #[arg(long)]
        by_m: bool,
    },
    /// Print the analytic prediction without counting.
    Predict {
        target: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 0.9)]
        h_exponent: f64,
        #[arg(long, default_value_t = repcount::DEFAULT_SERIES_CUTOFF)]
        cutoff: u64,
        #[arg(long, default_value = "rho-minus-one")]
        variant: String,
    },
    /// Evaluate the singular series.
    Sseries {
        target: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = repcount::DEFAULT_SERIES_CUTOFF)]
        cutoff: u64,
        #[arg(long, default_value = "rho-minus-one")]
        variant: String,
    },
    /// Evaluate the short power-phase sum at a split frequency "a/q+lambda".
    Weyl {
        /// Frequency in split form: "a/q", "a/q+1e-9", or a bare float.
        alpha: String,
        #[arg(long)]
        upper: f64,
        #[arg(long)]
        width: f64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        /// Also evaluate the major-arc factorization and the residual.
        #[arg(long)]
        factored: bool,
        /// Evaluate the factorization even outside its hypothesis.
        #[arg(long)]
        force: bool,
    },
    /// Classify frequencies into arc classes for one instance.
    Arcs {
        target: u64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 0.9)]
        h_exponent: f64,
        /// Sample this many uniform frequencies.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Override the ln^eta denominator threshold exponent.
        #[arg(long)]
        eta: Option<f64>,
        /// Classify these specific frequencies (split form) as well.
        #[arg(long = "alpha")]
        alphas: Vec<String>,
    },
    /// Run correctness checks; exits nonzero if any fail.
    Verify {
        /// Comma-separated check indices, e.g. "1,4,5". Default: all.
        #[arg(long)]
        only: Option<String>,
    },
    /// Count every target in a TOML config and emit CSV/JSON.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_mu(text: Option<&str>) -> Result<[f64; 3]> {
    let Some(text) = text else {
        return Ok([1.0 / 3.0; 3]);
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "proportions {text:?}: expected three comma-separated values"
        )));
    }
    let mut mu = [0.0; 3];
    for (slot, part) in mu.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::Config(format!("proportions {text:?}: {part:?} is not a float")))?;
    }
    Ok(mu)
}

fn parse_variant(text: &str) -> Result<SeriesVariant> {
    match text {
        "rho-minus-one" => Ok(SeriesVariant::RhoMinusOne),
        "rho" => Ok(SeriesVariant::Rho),
        other => Err(Error::Config(format!(
            "variant {other:?}: expected rho-minus-one or rho"
        ))),
    }
}

fn build_instance(
    target: u64,
    degree: u32,
    mu: Option<&str>,
    half_width: Option<f64>,
    h_exponent: f64,
) -> Result<ProblemInstance> {
    let mu = parse_mu(mu)?;
    let h = half_width.unwrap_or_else(|| (target as f64).powf(h_exponent));
    ProblemInstance::new(target, degree, mu, h)
}

fn print_instance_header(inst: &ProblemInstance) {
    println!("target {}", inst.target);
    println!("degree {}", inst.degree);
    println!(
        "mu {:.11e} {:.11e} {:.11e}",
        inst.mu[0], inst.mu[1], inst.mu[2]
    );
    println!("half_width {:.11e}", inst.half_width);
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Count {
            target,
            degree,
            mu,
            half_width,
            h_exponent,
            cutoff,
            variant,
            by_m,
        } => {
            let inst = build_instance(target, degree, mu.as_deref(), half_width, h_exponent)?;
            let variant = parse_variant(&variant)?;
            let started = Instant::now();
            let report = exact_count_with(&inst, cutoff, variant)?;
            eprintln!("counted in {:.3}s", started.elapsed().as_secs_f64());
            print_instance_header(&inst);
            println!("exact {}", report.exact);
            println!("m_values {}", report.m_values_used);
            println!("sseries {:.11e}", report.series_value);
            println!("main_term {:.11e}", report.main_term);
            match report.ratio {
                Some(r) => println!("ratio {r:.11e}"),
                None => println!("ratio undefined"),
            }
            if by_m {
                for (m, count) in repcount::count_by_m(&inst)? {
                    println!("m {m} count {count}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict {
            target,
            degree,
            mu,
            half_width,
            h_exponent,
            cutoff,
            variant,
        } => {
            let inst = build_instance(target, degree, mu.as_deref(), half_width, h_exponent)?;
            let variant = parse_variant(&variant)?;
            let series = sseries::singular_series(target, degree, cutoff, variant)?;
            print_instance_header(&inst);
            println!("sseries {:.11e}", series.value);
            println!("sseries_tail_bound {:.11e}", series.tail_bound);
            println!("main_term {:.11e}", repcount::main_term(&inst, series.value));
            println!(
                "h_threshold {:.11e}",
                repcount::h_threshold(target as f64, degree)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sseries {
            target,
            degree,
            cutoff,
            variant,
        } => {
            let variant = parse_variant(&variant)?;
            let series = sseries::singular_series(target, degree, cutoff, variant)?;
            println!("value {:.11e}", series.value);
            println!("prime_cutoff {}", series.prime_cutoff);
            println!("tail_bound {:.11e}", series.tail_bound);
            Ok(ExitCode::SUCCESS)
        }
        Command::Weyl {
            alpha,
            upper,
            width,
            degree,
            factored,
            force,
        } => {
            let approx = parse_alpha(&alpha)?;
            let window = SumWindow::new(upper, width, degree)?;
            println!(
                "alpha {}/{} + {:.11e}",
                approx.a, approx.q, approx.lambda
            );
            println!("terms {}", window.term_count());
            let t = expsum::weyl_sum(&approx, &window)?;
            println!("sum {:.11e} {:.11e}", t.re, t.im);
            println!("abs {:.11e}", t.norm());
            if factored || force {
                let f = expsum::major_arc_weyl_approx(&approx, &window, force)?;
                println!("factored {:.11e} {:.11e}", f.re, f.im);
                println!("residual {:.11e}", (t - f).norm());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Arcs {
            target,
            degree,
            mu,
            half_width,
            h_exponent,
            samples,
            seed,
            eta,
            alphas,
        } => {
            let inst = build_instance(target, degree, mu.as_deref(), half_width, h_exponent)?;
            let params = dissect::dissection_params(&inst)?;
            let eta = eta.unwrap_or(params.eta);
            print_instance_header(&inst);
            println!("tau {:.11e}", params.tau);
            println!("major_radius {:.11e}", params.major_radius);
            println!("eta {:.11e}", eta);
            println!("q_limit {:.11e}", params.log_n.powf(eta));

            for text in &alphas {
                let parsed = parse_alpha(text)?;
                let (class, approx) =
                    dissect::classify_with_eta(parsed.value(), &params, eta)?;
                println!(
                    "alpha {} class {} q {} lambda {:.11e}",
                    text, class, approx.q, approx.lambda
                );
            }

            if samples > 0 {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let window = SumWindow::new(params.root_upper, params.root_width, degree)?;
                let mut tally = [(0u64, 0.0f64); 3];
                for _ in 0..samples {
                    let alpha: f64 = rng.random_range(0.0..1.0);
                    let (class, approx) = dissect::classify_with_eta(alpha, &params, eta)?;
                    let t = expsum::weyl_sum(&approx, &window)?;
                    let slot = match class {
                        ArcClass::Major1 => 0,
                        ArcClass::Major2 => 1,
                        ArcClass::Minor => 2,
                    };
                    tally[slot].0 += 1;
                    tally[slot].1 = tally[slot].1.max(t.norm());
                }
                for (slot, label) in ["major1", "major2", "minor"].iter().enumerate() {
                    let (count, peak) = tally[slot];
                    if count == 0 {
                        println!("class {label} samples 0");
                    } else {
                        println!("class {label} samples {count} max_abs_sum {peak:.11e}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { only } => {
            let indices: Vec<usize> = match only {
                Some(list) => {
                    let mut out = Vec::new();
                    for token in list.split(',') {
                        let token = token.trim();
                        let idx: usize = token.parse().map_err(|_| {
                            Error::Config(format!("check index {token:?} is not a number"))
                        })?;
                        if !(1..=verify::CHECK_COUNT).contains(&idx) {
                            return Err(Error::Config(format!(
                                "check index {idx} outside 1..={}",
                                verify::CHECK_COUNT
                            )));
                        }
                        out.push(idx);
                    }
                    out
                }
                None => (1..=verify::CHECK_COUNT).collect(),
            };
            let own_binary = std::env::current_exe()?;
            let mut failures = 0usize;
            for &idx in &indices {
                let started = Instant::now();
                let outcome = verify::run_criterion(
                    idx,
                    (idx == 8).then_some(own_binary.as_path()),
                );
                eprintln!(
                    "check {idx} finished in {:.2}s",
                    started.elapsed().as_secs_f64()
                );
                println!("{}", outcome.render());
                if !outcome.passed {
                    failures += 1;
                }
            }
            println!("{} checks run, {} failed", indices.len(), failures);
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Experiment { config } => {
            let config = ExperimentConfig::from_path(&config)?;
            let started = Instant::now();
            let outcomes = ternary::cli::run_experiment(&config)?;
            eprintln!(
                "{} targets in {:.3}s",
                outcomes.len(),
                started.elapsed().as_secs_f64()
            );
            match &config.output_csv {
                Some(path) => {
                    let mut file = std::fs::File::create(path)?;
                    emit_csv(&config, &outcomes, &mut file)?;
                    eprintln!("csv written to {path}");
                }
                None => {
                    let stdout = std::io::stdout();
                    emit_csv(&config, &outcomes, &mut stdout.lock())?;
                }
            }
            if let Some(path) = &config.output_json {
                let mut file = std::fs::File::create(path)?;
                emit_json(&outcomes, &mut file)?;
                eprintln!("json written to {path}");
            }
            let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} targets failed; see json error fields");
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.serial {
        // Ignore failure: the pool can already be initialized in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
