//! Command-line interface: estimate, simulate, generate, design, validate.
//!
//! Exit codes: 0 success, 2 malformed input files, 3 model or configuration
//! errors. All commands honor --seed and write byte-identical outputs for
//! identical invocations; every output directory receives exactly one
//! manifest.json recording inputs, settings and content hashes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use iclv::error::Error;
use iclv::estimation::{estimate, EstimationSettings};
use iclv::formats::{
    read_dataset, read_design, read_json, read_params_file, read_priors, stamp,
    write_curves, write_dataset, write_design, write_json, RunManifest,
};
use iclv::model::spec::ModelSpec;
use iclv::policy::{scenario_sweep, BaseVehicle, CohortSpec, PolicyConfig, ScenarioSweep};
use iclv::synthetic::{
    d_error, improve_design, random_design, simulate_dataset, CovariateSampler, DesignSpec,
};

#[derive(Parser)]
#[command(name = "iclv", version, about = "ICLV estimation, simulation and policy analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed override applied to draw settings and generators.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of simulation draws, overriding settings files.
    #[arg(long, global = true)]
    draws: Option<usize>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory (created if absent).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Treat warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum simulated likelihood estimation on a dataset.
    Estimate {
        /// Per-(individual, task, alternative) CSV.
        #[arg(long)]
        tasks: PathBuf,
        /// Per-individual covariate/indicator CSV.
        #[arg(long)]
        persons: PathBuf,
        /// Model spec JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Estimation settings JSON (defaults when omitted).
        #[arg(long)]
        settings: Option<PathBuf>,
    },
    /// Policy scenario curves for a cohort list.
    Simulate {
        /// Parameter file JSON.
        #[arg(long)]
        params: PathBuf,
        /// Cohort list JSON.
        #[arg(long)]
        cohorts: PathBuf,
        /// Scenario id.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        scenario: u8,
        /// Average over this many latent disturbance draws instead of using
        /// the latent means.
        #[arg(long)]
        monte_carlo: Option<usize>,
    },
    /// Generate a synthetic dataset from true parameters.
    Generate {
        /// Design grid JSON.
        #[arg(long)]
        design_spec: PathBuf,
        /// True parameter file JSON.
        #[arg(long)]
        params: PathBuf,
        /// Number of individuals.
        #[arg(long)]
        n: usize,
    },
    /// Search a D-efficient design by coordinate exchange.
    Design {
        /// Design grid JSON.
        #[arg(long)]
        design_spec: PathBuf,
        /// Prior MNL coefficients JSON.
        #[arg(long)]
        priors: PathBuf,
        /// Accepted-or-rejected swap proposals to try.
        #[arg(long, default_value_t = 5000)]
        swaps: usize,
    },
    /// Validate input files and report schema findings (read-only).
    Validate {
        #[arg(long)]
        kind: FileKind,
        /// Main file (params/spec/settings/cohorts/designspec/priors/design).
        #[arg(long)]
        file: Option<PathBuf>,
        /// Dataset validation: per-individual CSV.
        #[arg(long)]
        persons: Option<PathBuf>,
        /// Dataset validation: task CSV.
        #[arg(long)]
        tasks: Option<PathBuf>,
        /// Dataset validation: model spec JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FileKind {
    Params,
    Spec,
    Settings,
    Cohorts,
    Designspec,
    Priors,
    Design,
    Dataset,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} threads: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn ensure_out_dir(dir: &Path) -> iclv::Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cli: &Cli) -> iclv::Result<ExitCode> {
    let started = Instant::now();
    match &cli.command {
        Command::Estimate {
            tasks,
            persons,
            spec,
            settings,
        } => {
            ensure_out_dir(&cli.out_dir)?;
            let model_spec: ModelSpec = read_json(spec)?;
            model_spec.validate()?;
            let mut est_settings: EstimationSettings = match settings {
                Some(path) => read_json(path)?,
                None => EstimationSettings::default(),
            };
            if let Some(seed) = cli.seed {
                est_settings.draw_settings.seed = seed;
            }
            if let Some(draws) = cli.draws {
                est_settings.draw_settings.n_draws = draws;
            }
            let dataset = read_dataset(persons, tasks, &model_spec)?;
            let result = estimate(&dataset, &model_spec, &est_settings)?;
            let result_path = cli.out_dir.join("result.json");
            write_json(&result_path, &result)?;
            if !result.converged {
                eprintln!(
                    "warning: not converged after {} iterations (gradient max-norm above {})",
                    result.iterations, est_settings.convergence_tol
                );
            }

            let mut manifest = RunManifest::new("estimate");
            manifest.seed = Some(est_settings.draw_settings.seed);
            manifest.inputs = vec![stamp(tasks)?, stamp(persons)?, stamp(spec)?];
            if let Some(path) = settings {
                manifest.inputs.push(stamp(path)?);
            }
            manifest.settings = serde_json::to_value(&est_settings)?;
            manifest.outputs = vec![stamp(&result_path)?];
            manifest.metadata = serde_json::json!({
                "converged": result.converged,
                "final_ll": result.final_ll,
                "null_ll": result.null_ll,
                "rho_square": result.rho_square,
                "n_individuals": dataset.individuals.len(),
            });
            manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
            manifest.write(&cli.out_dir)?;
            println!(
                "estimate: ll {:.6}, rho^2 {:.4}, converged {}",
                result.final_ll, result.rho_square, result.converged
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            params,
            cohorts,
            scenario,
            monte_carlo,
        } => {
            ensure_out_dir(&cli.out_dir)?;
            let loaded = read_params_file(params)?;
            let cohort_list: Vec<CohortSpec> = read_json(cohorts)?;
            let mut base = BaseVehicle::default();
            base.market_uptake = loaded.policy.baseline_market_uptake;
            let mut config = PolicyConfig::from(&loaded.policy);
            config.monte_carlo_draws = *monte_carlo;
            config.seed = cli.seed.unwrap_or(0);
            let sweep = ScenarioSweep::standard(*scenario, cohort_list.clone())?;
            let result = scenario_sweep(&loaded.params, &loaded.spec, &sweep, &base, &config)?;
            if cli.strict && !result.warnings.is_empty() {
                return Err(Error::Config(format!(
                    "warnings with --strict: {}",
                    result.warnings.join("; ")
                )));
            }
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let curves_path = cli.out_dir.join("curves.csv");
            write_curves(&curves_path, &result)?;

            let latents: serde_json::Value = cohort_list
                .iter()
                .map(|c| {
                    let att = iclv::policy::cohort_latents(&loaded.params, &loaded.spec, c)?;
                    Ok((
                        c.name.clone(),
                        serde_json::to_value(
                            loaded
                                .spec
                                .latents
                                .iter()
                                .zip(att.iter())
                                .map(|(l, v)| (l.clone(), *v))
                                .collect::<std::collections::BTreeMap<_, _>>(),
                        )?,
                    ))
                })
                .collect::<iclv::Result<serde_json::Map<String, serde_json::Value>>>()
                .map(serde_json::Value::Object)?;

            let mut manifest = RunManifest::new("simulate");
            manifest.seed = cli.seed;
            manifest.inputs = vec![stamp(params)?, stamp(cohorts)?];
            manifest.settings = serde_json::json!({
                "scenario": scenario,
                "x_unit": sweep.swept_field.x_unit(),
                "monte_carlo_draws": monte_carlo,
                "opt_out_utility": config.opt_out_utility,
                "baseline_market_uptake": loaded.policy.baseline_market_uptake,
            });
            manifest.outputs = vec![stamp(&curves_path)?];
            manifest.warnings = result.warnings.clone();
            manifest.metadata = serde_json::json!({ "cohort_latents": latents });
            manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
            manifest.write(&cli.out_dir)?;
            println!(
                "simulate: scenario {} -> {} curve points",
                scenario,
                result.points.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate {
            design_spec,
            params,
            n,
        } => {
            ensure_out_dir(&cli.out_dir)?;
            let dspec: DesignSpec = read_json(design_spec)?;
            dspec.validate()?;
            let loaded = read_params_file(params)?;
            let seed = cli.seed.unwrap_or(0);
            let design = random_design(&dspec, seed)?;
            let dataset = simulate_dataset(
                &design,
                &loaded.spec,
                &loaded.params,
                *n,
                &CovariateSampler::survey_marginals(),
                seed,
            )?;
            let persons_path = cli.out_dir.join("persons.csv");
            let tasks_path = cli.out_dir.join("tasks.csv");
            write_dataset(&persons_path, &tasks_path, &loaded.spec, &dataset)?;
            let spec_path = cli.out_dir.join("spec.json");
            write_json(&spec_path, &loaded.spec)?;

            let mut manifest = RunManifest::new("generate");
            manifest.seed = Some(seed);
            manifest.inputs = vec![stamp(design_spec)?, stamp(params)?];
            manifest.settings = serde_json::json!({ "n_individuals": n });
            manifest.outputs = vec![
                stamp(&persons_path)?,
                stamp(&tasks_path)?,
                stamp(&spec_path)?,
            ];
            manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
            manifest.write(&cli.out_dir)?;
            println!("generate: {} individuals x {} tasks", n, design.tasks_per_respondent);
            Ok(ExitCode::SUCCESS)
        }
        Command::Design {
            design_spec,
            priors,
            swaps,
        } => {
            ensure_out_dir(&cli.out_dir)?;
            let dspec: DesignSpec = read_json(design_spec)?;
            dspec.validate()?;
            let prior_beta = read_priors(priors)?;
            let seed = cli.seed.unwrap_or(0);
            let start = random_design(&dspec, seed)?;
            let initial = d_error(&start, &prior_beta)?;
            let (improved, fin) = improve_design(&start, &prior_beta, &dspec, *swaps, seed)?;
            let design_path = cli.out_dir.join("design.csv");
            write_design(&design_path, &improved)?;
            let report_path = cli.out_dir.join("d_error_report.json");
            write_json(
                &report_path,
                &serde_json::json!({
                    "initial_d_error": initial.value,
                    "final_d_error": fin.value,
                    "swaps": swaps,
                    "coefficients": iclv::synthetic::DESIGN_COLUMNS
                        .iter()
                        .map(|a| a.as_str())
                        .collect::<Vec<_>>(),
                }),
            )?;

            let mut manifest = RunManifest::new("design");
            manifest.seed = Some(seed);
            manifest.inputs = vec![stamp(design_spec)?, stamp(priors)?];
            manifest.settings = serde_json::json!({ "swaps": swaps });
            manifest.outputs = vec![stamp(&design_path)?, stamp(&report_path)?];
            manifest.metadata = serde_json::json!({
                "initial_d_error": initial.value,
                "final_d_error": fin.value,
            });
            manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
            manifest.write(&cli.out_dir)?;
            println!(
                "design: D-error {:.6} -> {:.6} over {} proposals",
                initial.value, fin.value, swaps
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            kind,
            file,
            persons,
            tasks,
            spec,
        } => {
            let findings = validate_files(*kind, file, persons, tasks, spec);
            match findings {
                Ok(()) => {
                    println!("validate: zero findings");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    println!("validate: 1 finding");
                    println!("  {e}");
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}

fn require<'a>(opt: &'a Option<PathBuf>, name: &str) -> iclv::Result<&'a PathBuf> {
    opt.as_ref()
        .ok_or_else(|| Error::Config(format!("--{name} is required for this kind")))
}

fn validate_files(
    kind: FileKind,
    file: &Option<PathBuf>,
    persons: &Option<PathBuf>,
    tasks: &Option<PathBuf>,
    spec: &Option<PathBuf>,
) -> iclv::Result<()> {
    match kind {
        FileKind::Params => {
            read_params_file(require(file, "file")?)?;
        }
        FileKind::Spec => {
            let s: ModelSpec = read_json(require(file, "file")?)?;
            s.validate()?;
        }
        FileKind::Settings => {
            let _: EstimationSettings = read_json(require(file, "file")?)?;
        }
        FileKind::Cohorts => {
            let cohorts: Vec<CohortSpec> = read_json(require(file, "file")?)?;
            for c in &cohorts {
                c.to_covariates().validate()?;
            }
        }
        FileKind::Designspec => {
            let d: DesignSpec = read_json(require(file, "file")?)?;
            d.validate()?;
        }
        FileKind::Priors => {
            let priors = read_priors(require(file, "file")?)?;
            // priors must cover the full design column set
            let probe = random_design(&DesignSpec::survey_default(), 0)?;
            d_error(&probe, &priors)?;
        }
        FileKind::Design => {
            read_design(require(file, "file")?)?;
        }
        FileKind::Dataset => {
            let model_spec: ModelSpec = read_json(require(spec, "spec")?)?;
            model_spec.validate()?;
            read_dataset(require(persons, "persons")?, require(tasks, "tasks")?, &model_spec)?;
        }
    }
    Ok(())
}
