use std::path::PathBuf;
use std::process::ExitCode;

use causal_shap::attribution::{Estimator, KernelBudget};
use causal_shap::lever::{export_background, run_episodes, save_episodes, LeverConfig};
use causal_shap::model::scripted_lever_policy;
use causal_shap::report::{
    compare, default_groups, explain, parse_methods, write_atomic, FeatureGroup, InstanceSelector, ModelSource, Report,
    ReportConfig,
};
use causal_shap::sampler::LEVER_ORDERING_JSON;
use causal_shap::{Error, Execution, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "causal-shap",
    version,
    about = "Causal and marginal Shapley explanations for lever-policy actions"
)]
struct Cli {
    /// Evaluate on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Exact,
    Kernel,
}

#[derive(Subcommand)]
enum Command {
    /// Explain one state with every requested method.
    Explain {
        #[arg(long)]
        dataset: PathBuf,
        /// MLP weights JSON or `builtin:scripted`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        ordering: Option<PathBuf>,
        /// `EP:STEP`, `grasp:EP`, `move:EP` or `inline:v1,...,v8`.
        #[arg(long)]
        instance: String,
        /// Episode log for episode selectors [default: episodes.json next to the dataset].
        #[arg(long)]
        episodes: Option<PathBuf>,
        #[arg(long, default_value = "causal,marginal")]
        methods: String,
        #[arg(long, value_enum, default_value = "exact")]
        estimator: EstimatorArg,
        /// Coalitions for the kernel estimator, including the empty and full ones.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Difference two reports computed on the same instance.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write the comparison as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Feature group `name=f1,f2,...`; repeatable. Defaults to joints vs distances.
        #[arg(long = "group")]
        groups: Vec<String>,
    },
    /// Roll out the scripted policy and export a background dataset.
    GenData {
        #[arg(long, default_value_t = 15)]
        episodes: usize,
        /// Comma-separated episode ids left out of the background.
        #[arg(long, default_value = "1,3")]
        holdout: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command, exec: Execution) -> Result<()> {
    match command {
        Command::Explain {
            dataset,
            model,
            ordering,
            instance,
            episodes,
            methods,
            estimator,
            budget,
            samples,
            seed,
            out,
        } => {
            let estimator = match (estimator, budget) {
                (EstimatorArg::Exact, None) => Estimator::Exact,
                (EstimatorArg::Exact, Some(_)) => {
                    return Err(Error::Config("--budget only applies to the kernel estimator".into()))
                }
                (EstimatorArg::Kernel, None) => Estimator::Kernel(KernelBudget::All),
                (EstimatorArg::Kernel, Some(b)) => Estimator::Kernel(KernelBudget::Sampled(b)),
            };
            let config = ReportConfig {
                dataset,
                ordering,
                model: model.parse::<ModelSource>()?,
                instance: instance.parse::<InstanceSelector>()?,
                episodes,
                methods: parse_methods(&methods)?,
                estimator,
                mc_samples: samples,
                seed,
                out_dir: out,
                exec,
            };
            for artifact in explain(&config)? {
                let e = &artifact.report.explanation;
                let worst = (0..e.output_dim())
                    .map(|k| e.additivity_residual(k).abs())
                    .fold(0.0, f64::max);
                println!(
                    "{:<12} {} coalitions, max additivity residual {worst:.3e}  -> {}, {}",
                    e.method.as_str(),
                    e.coalitions_evaluated,
                    artifact.json_path.display(),
                    artifact.svg_path.display()
                );
            }
            Ok(())
        }
        Command::Compare { a, b, json, groups } => {
            let ra = Report::load(&a)?;
            let rb = Report::load(&b)?;
            let groups = if groups.is_empty() {
                default_groups(&ra.explanation.feature_names)
            } else {
                groups.iter().map(|g| FeatureGroup::parse(g)).collect::<Result<_>>()?
            };
            let cmp = compare(&ra, &rb, &groups)?;
            print!("{}", cmp.to_text());
            if let Some(path) = json {
                write_atomic(&path, cmp.to_json()?.as_bytes())?;
            }
            Ok(())
        }
        Command::GenData {
            episodes,
            holdout,
            seed,
            out,
        } => {
            let holdout = parse_ids(&holdout)?;
            let config = LeverConfig::default();
            let eps = run_episodes(&scripted_lever_policy(), &config, episodes, seed, exec)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let dataset = export_background(&eps, &holdout, Some(&out.join("background.csv")))?;
            save_episodes(out.join("episodes.json"), &eps)?;
            write_atomic(&out.join("ordering.json"), LEVER_ORDERING_JSON.as_bytes())?;
            let solved = eps.iter().filter(|e| e.terminal_reward_reached).count();
            println!(
                "{} episodes ({solved} solved), {} background rows from {} episodes -> {}",
                eps.len(),
                dataset.n_rows(),
                dataset.source_episodes().len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn parse_ids(s: &str) -> Result<Vec<u32>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|id| {
            id.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad episode id `{id}`")))
        })
        .collect()
}
