use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use dfep::combine::{combine_uniform, combine_with, ReplacementRule};
use dfep::greedy::{mass_greedy, DividePairs, EmptyBranches, GreedyConfig};
use dfep::harness::experiment::ExperimentConfig;
use dfep::harness::io::{instance_to_json, trace_to_json, tree_to_json};
use dfep::harness::{
    export_dot, generate, read_instance, read_tree, run_experiment, CostMode, GeneratorSpec, PriorMode,
};
use dfep::model::{evaluate, validate_instance, validate_tree};
use dfep::oracle::{ExactSolver, OracleConfig, DEFAULT_CAP};
use dfep::{rational, DecisionTree, Instance};

#[derive(Parser)]
#[command(
    name = "dfep",
    version,
    about = "Build, evaluate and check decision trees for discrete function evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and report every violated invariant.
    Validate { instance: PathBuf },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        tests: usize,
        #[arg(long, default_value_t = 2)]
        outcomes: u32,
        #[arg(long, value_enum, default_value_t = CostArg::ValueDependentRandom)]
        cost_mode: CostArg,
        #[arg(long, default_value_t = 1)]
        cost_min: u32,
        #[arg(long, default_value_t = 5)]
        cost_max: u32,
        #[arg(long, value_enum, default_value_t = PriorArg::Random)]
        prior: PriorArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a tree with the greedy algorithm or the exact oracle.
    Solve {
        #[arg(long, value_enum)]
        algo: Algo,
        instance: PathBuf,
        /// Tree output file; the tree is printed when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the greedy selection trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Leave empty outcomes out of the greedy criterion.
        #[arg(long)]
        skip_empty_branches: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        oracle_cap: usize,
    },
    /// Splice an expected-cost tree with a worst-cost tree.
    Combine {
        #[arg(long)]
        rho: String,
        #[arg(long)]
        de: PathBuf,
        #[arg(long)]
        dw: PathBuf,
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = RuleArg::Crossing)]
        rule: RuleArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Unit-cost combination: best of the thresholds L..=M.
    CombineUniform {
        #[arg(long)]
        rho_num: u64,
        #[arg(long)]
        de: PathBuf,
        #[arg(long)]
        dw: PathBuf,
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Worst, expected and per-object cost of a tree.
    Eval { tree: PathBuf, instance: PathBuf },
    /// Minimum expected cost for every achievable worst-cost budget.
    Frontier {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        oracle_cap: usize,
    },
    /// Render a tree in Graphviz DOT.
    ExportDot {
        tree: PathBuf,
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate instances and check every bound on them.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Write the per-bound table (TSV).
        #[arg(long)]
        table: Option<PathBuf>,
        /// Where to write the first violation; overrides the config.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    Unit,
    FixedRandom,
    ValueDependentRandom,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Uniform,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Greedy,
    OptWorst,
    OptExpected,
    /// Expected-cost heuristic, for instances beyond the oracle cap.
    GreedyExpected,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Crossing,
    FirstReached,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    read_instance(path).with_context(|| format!("reading instance {}", path.display()))
}

fn load_tree(path: &Path, inst: &Instance) -> anyhow::Result<DecisionTree> {
    let tree = read_tree(path).with_context(|| format!("reading tree {}", path.display()))?;
    let problems = validate_tree(&tree, &inst.objects(), inst);
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(ToString::to_string).collect();
        bail!("tree {} is invalid: {}", path.display(), list.join("; "));
    }
    Ok(tree)
}

fn summary(tree: &DecisionTree, inst: &Instance) -> anyhow::Result<String> {
    let report = evaluate(tree, inst)?;
    Ok(format!("worst={} expected={}", report.worst, report.expected))
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Validate { instance } => {
            let text = fs::read_to_string(&instance).with_context(|| format!("reading {}", instance.display()))?;
            match dfep::harness::io::instance_from_json(&text) {
                Ok(inst) => {
                    debug_assert!(validate_instance(&inst).is_empty());
                    println!(
                        "valid: {} objects, {} classes, {} tests, {} outcomes",
                        inst.num_objects(),
                        inst.num_classes(),
                        inst.num_tests(),
                        inst.num_outcomes()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(dfep::Error::InvalidInstance(violations)) => {
                    for v in violations {
                        println!("invalid: {v}");
                    }
                    Ok(ExitCode::from(1))
                }
                Err(err) => Err(err.into()),
            }
        }
        Command::Gen {
            n,
            m,
            tests,
            outcomes,
            cost_mode,
            cost_min,
            cost_max,
            prior,
            seed,
            output,
        } => {
            let spec = GeneratorSpec {
                n,
                m,
                num_tests: tests,
                num_outcomes: outcomes,
                cost_mode: match cost_mode {
                    CostArg::Unit => CostMode::Unit,
                    CostArg::FixedRandom => CostMode::FixedRandom,
                    CostArg::ValueDependentRandom => CostMode::ValueDependentRandom,
                },
                cost_range: (cost_min, cost_max),
                prior_mode: match prior {
                    PriorArg::Uniform => PriorMode::Uniform,
                    PriorArg::Random => PriorMode::Random,
                },
                seed,
            };
            emit(&instance_to_json(&generate(&spec)?), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            algo,
            instance,
            output,
            trace,
            skip_empty_branches,
            oracle_cap,
        } => {
            let inst = load_instance(&instance)?;
            let objects = inst.objects();
            let oracle = || {
                ExactSolver::new(
                    &inst,
                    &objects,
                    OracleConfig {
                        max_objects: oracle_cap,
                    },
                )
            };
            let tree = match algo {
                Algo::Greedy => {
                    let greedy = DividePairs::new(GreedyConfig {
                        empty_branches: if skip_empty_branches {
                            EmptyBranches::Skip
                        } else {
                            EmptyBranches::Include
                        },
                    });
                    let (tree, steps) = greedy.build(&objects, &inst)?;
                    if let Some(path) = &trace {
                        emit(&trace_to_json(&steps), Some(path))?;
                    }
                    tree
                }
                Algo::OptWorst => oracle()?.opt_worst()?.tree,
                Algo::OptExpected => oracle()?.opt_expected()?.tree,
                Algo::GreedyExpected => mass_greedy(&inst)?,
            };
            if output.is_some() {
                println!("{}", summary(&tree, &inst)?);
            }
            emit(&tree_to_json(&tree), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Combine {
            rho,
            de,
            dw,
            instance,
            rule,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let rho = rational::parse(&rho)?;
            let d_e = load_tree(&de, &inst)?;
            let d_w = load_tree(&dw, &inst)?;
            let rule = match rule {
                RuleArg::Crossing => ReplacementRule::Crossing,
                RuleArg::FirstReached => ReplacementRule::FirstReached,
            };
            let combined = combine_with(rule, &d_e, &d_w, &rho, &inst)?;
            if output.is_some() {
                println!(
                    "threshold={} replaced={} {}",
                    combined.params.threshold,
                    combined.replaced.len(),
                    summary(&combined.tree, &inst)?
                );
            }
            emit(&tree_to_json(&combined.tree), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CombineUniform {
            rho_num,
            de,
            dw,
            instance,
            output,
        } => {
            let inst = load_instance(&instance)?;
            let d_e = load_tree(&de, &inst)?;
            let d_w = load_tree(&dw, &inst)?;
            let combined = combine_uniform(&d_e, &d_w, rho_num, &inst)?;
            if output.is_some() {
                println!(
                    "L={} M={} chosen={} {}",
                    combined.params.lower,
                    combined.params.upper,
                    combined.chosen,
                    summary(&combined.tree, &inst)?
                );
            }
            emit(&tree_to_json(&combined.tree), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { tree, instance } => {
            let inst = load_instance(&instance)?;
            let tree = load_tree(&tree, &inst)?;
            let report = evaluate(&tree, &inst)?;
            println!("worst\t{}", report.worst);
            println!("expected\t{}", report.expected);
            for (object, cost) in &report.per_object {
                println!("object {object}\t{cost}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Frontier { instance, oracle_cap } => {
            let inst = load_instance(&instance)?;
            let frontier = ExactSolver::new(
                &inst,
                &inst.objects(),
                OracleConfig {
                    max_objects: oracle_cap,
                },
            )?
            .pareto_frontier()?;
            println!("budget\texpected");
            for point in frontier {
                println!("{}\t{}", point.budget, point.expected);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportDot { tree, instance, output } => {
            let inst = load_instance(&instance)?;
            let tree = load_tree(&tree, &inst)?;
            export_dot(&tree, &inst, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { config, table, replay } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut config: ExperimentConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
            if replay.is_some() {
                config.replay = replay;
            }
            let report = run_experiment(&config)?;
            if let Some(path) = &table {
                emit(&report.table(), Some(path))?;
            }
            let checks: usize = report
                .rows
                .iter()
                .map(|r| 2 + 2 * r.tradeoffs.len() + 2 * r.uniform.len() + r.subsets.len())
                .sum();
            println!(
                "instances={} checks={} violations={}",
                report.rows.len(),
                checks,
                report.violation_count()
            );
            match &report.replay {
                None => Ok(ExitCode::SUCCESS),
                Some(artifact) => {
                    eprintln!("bound violated on instance {}:", artifact.index);
                    for v in &artifact.violations {
                        eprintln!("  {v}");
                    }
                    match &config.replay {
                        Some(path) => eprintln!("replay written to {}", path.display()),
                        None => eprintln!("{}", serde_json::to_string_pretty(artifact)?),
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}
