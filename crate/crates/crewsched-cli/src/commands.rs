//! Subcommand implementations.

use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, ValueEnum};

use crewsched::benchmark::{solve_benchmark, BenchmarkConfig};
use crewsched::benders::{run_two_phase, BendersConfig};
use crewsched::enumerate::solve_extensive;
use crewsched::evaluate::{evaluate_period, write_metrics_csv, EvaluateConfig};
use crewsched::io::{
    generate_instance, load_instance, read_report, save_instance, write_bounds_csv,
    write_excess_csv, write_plot_data, write_portfolio_csv, write_report, GeneratorConfig,
    ReportFormat,
};
use crewsched::model::Instance;
use crewsched::report::{
    BoundsRecord, CutStats, Phase, Portfolio, PortfolioEntry, ScenarioOutcome, SolveReport,
    Timings,
};

use crate::manifest::{resolve_out_dir, write_manifest};
use crate::overrides::{apply_profile, apply_reserve_cap, apply_share_caps, DayProfile};

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Target tasks per scenario.
    #[arg(long, default_value_t = 20)]
    pub tasks: usize,
    #[arg(long, default_value_t = 3)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 3)]
    pub stations: usize,
    #[arg(long, default_value_t = 0.0)]
    pub add: f64,
    #[arg(long, default_value_t = 0.0)]
    pub remove: f64,
    #[arg(long, default_value_t = 0.0)]
    pub retime: f64,
    /// Regular template window length in minutes.
    #[arg(long, default_value_t = 570)]
    pub template_length: i64,
    /// Template start grid in minutes.
    #[arg(long, default_value_t = 30)]
    pub grid: i64,
    #[arg(long)]
    pub no_reserve: bool,
    #[arg(long, default_value_t = 10_000.0)]
    pub template_cost: f64,
    #[arg(long, default_value_t = 40_000.0)]
    pub excess_cost: f64,
    #[arg(long, default_value_t = 15)]
    pub gamma: u32,
    /// Attach day-of-week early/late rostering caps.
    #[arg(long, value_enum)]
    pub profile: Option<DayProfile>,
    /// Attach a reserve-share cap (fraction).
    #[arg(long)]
    pub reserve_cap: Option<f64>,
    /// Optional key = value file overriding the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Instance file name inside the output directory.
    #[arg(long, default_value = "instance.inst")]
    pub name: String,
}

fn generator_config(args: &GenerateArgs) -> anyhow::Result<GeneratorConfig> {
    let mut config = GeneratorConfig {
        seed: args.seed,
        n_stations: args.stations,
        n_tasks: args.tasks,
        n_scenarios: args.scenarios,
        add_rate: args.add,
        remove_rate: args.remove,
        retime_rate: args.retime,
        template_length: args.template_length,
        template_grid: args.grid,
        include_reserve: !args.no_reserve,
        template_cost: args.template_cost,
        excess_cost: args.excess_cost,
        gamma: args.gamma,
        ..GeneratorConfig::default()
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        apply_config_overrides(&mut config, &text)?;
    }
    Ok(config)
}

/// Same `key = value` syntax as the instance [params] block.
fn apply_config_overrides(config: &mut GeneratorConfig, text: &str) -> anyhow::Result<()> {
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() || line.starts_with('[') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("config line {}: expected key = value", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let parse = |name: &str| -> anyhow::Result<f64> {
            value
                .parse::<f64>()
                .with_context(|| format!("config line {}: bad value for {name}", idx + 1))
        };
        match key {
            "seed" => config.seed = parse(key)? as u64,
            "n_stations" => config.n_stations = parse(key)? as usize,
            "n_tasks" => config.n_tasks = parse(key)? as usize,
            "n_scenarios" => config.n_scenarios = parse(key)? as usize,
            "add_rate" => config.add_rate = parse(key)?,
            "remove_rate" => config.remove_rate = parse(key)?,
            "retime_rate" => config.retime_rate = parse(key)?,
            "template_length" => config.template_length = parse(key)? as i64,
            "template_grid" => config.template_grid = parse(key)? as i64,
            "template_cost" => config.template_cost = parse(key)?,
            "excess_cost" => config.excess_cost = parse(key)?,
            "gamma" => config.gamma = parse(key)? as u32,
            "horizon_start" => config.horizon_start = parse(key)? as i64,
            "horizon_end" => config.horizon_end = parse(key)? as i64,
            "include_reserve" => config.include_reserve = value == "true",
            other => anyhow::bail!("config line {}: unknown key {other}", idx + 1),
        }
    }
    Ok(())
}

pub fn generate(args: GenerateArgs, threads: usize) -> anyhow::Result<()> {
    let out = resolve_out_dir(&args.out)?;
    let config = generator_config(&args)?;
    let mut instance = generate_instance(&config)?;
    if let Some(profile) = args.profile {
        apply_profile(&mut instance, profile);
    }
    if let Some(cap) = args.reserve_cap {
        apply_reserve_cap(&mut instance, cap);
    }
    instance.validate()?;
    let path = out.join(&args.name);
    save_instance(&instance, &path)?;
    write_manifest(
        &out,
        "generate",
        &format!("{config:?}|profile={:?}|reserve={:?}", args.profile, args.reserve_cap),
        Some(args.seed),
        threads,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Benders,
    Benchmark,
    /// Full duty enumeration plus one mixed-integer solve; the oracle route.
    Extensive,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub method: SolveMethod,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the maximum number of template types.
    #[arg(long)]
    pub gamma: Option<u32>,
    #[arg(long, value_enum)]
    pub profile: Option<DayProfile>,
    #[arg(long)]
    pub reserve_cap: Option<f64>,
    #[arg(long)]
    pub early_cap: Option<f64>,
    #[arg(long)]
    pub late_cap: Option<f64>,
    /// Disable Pareto-efficient cut selection.
    #[arg(long)]
    pub no_pareto: bool,
    /// Disable flow-bound valid inequalities.
    #[arg(long)]
    pub no_vi: bool,
    /// Master MILP time limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub master_limit_s: f64,
    /// Phase-one wall-clock limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub phase1_limit_s: f64,
    /// Overall limit for the benchmark or extensive solve, seconds.
    #[arg(long, default_value_t = 600.0)]
    pub time_limit_s: f64,
    #[arg(long, default_value_t = 5)]
    pub resolve_rounds: usize,
}

fn apply_solve_overrides(instance: &mut Instance, args: &SolveArgs) -> anyhow::Result<()> {
    if let Some(gamma) = args.gamma {
        instance.gamma = gamma;
    }
    if let Some(profile) = args.profile {
        apply_profile(instance, profile);
    }
    if let Some(cap) = args.reserve_cap {
        apply_reserve_cap(instance, cap);
    }
    apply_share_caps(instance, args.early_cap, args.late_cap);
    instance.validate()?;
    instance.validate_reserve_windows()?;
    Ok(())
}

pub fn solve(args: SolveArgs, threads: usize) -> anyhow::Result<()> {
    let out = resolve_out_dir(&args.out)?;
    let mut instance = load_instance(&args.instance)?;
    apply_solve_overrides(&mut instance, &args)?;

    let report = match args.method {
        SolveMethod::Benders => {
            let config = BendersConfig {
                use_pareto: !args.no_pareto,
                use_valid_inequalities: !args.no_vi,
                master_time_limit: Duration::from_secs_f64(args.master_limit_s),
                phase1_time_limit: Duration::from_secs_f64(args.phase1_limit_s),
                resolve_rounds: args.resolve_rounds,
                ..BendersConfig::default()
            };
            let outcome = run_two_phase(&instance, config)?;
            outcome.report
        }
        SolveMethod::Benchmark => {
            let config = BenchmarkConfig {
                time_limit: Duration::from_secs_f64(args.time_limit_s),
                ..BenchmarkConfig::default()
            };
            solve_benchmark(&instance, &config)?.report
        }
        SolveMethod::Extensive => {
            let solution =
                solve_extensive(&instance, Some(Duration::from_secs_f64(args.time_limit_s)))?;
            extensive_report(&instance, &solution)
        }
    };

    write_report(&report, &out.join("report.json"), ReportFormat::Json)?;
    write_bounds_csv(&report, &out.join("bounds.csv"))?;
    write_portfolio_csv(&report, &out.join("portfolio.csv"))?;
    write_excess_csv(&report, &out.join("excess.csv"))?;
    write_trace(&report, &out.join("trace.jsonl"))?;
    write_manifest(
        &out,
        &format!("solve-{:?}", args.method).to_lowercase(),
        &format!(
            "{:?}|{}|gamma={:?}|profile={:?}|pareto={}|vi={}|master={}|phase1={}",
            args.method,
            args.instance.display(),
            args.gamma,
            args.profile,
            !args.no_pareto,
            !args.no_vi,
            args.master_limit_s,
            args.phase1_limit_s
        ),
        None,
        threads,
    )?;
    println!(
        "method={} lb={} ub={} gap={:.4}% templates={} report={}",
        report.method,
        report.lb,
        report.ub,
        report.gap * 100.0,
        report.portfolio.total_templates(),
        out.join("report.json").display()
    );
    Ok(())
}

/// Per-iteration trace with wall-clock times; excluded from determinism
/// comparisons, unlike report.json.
fn write_trace(report: &SolveReport, path: &std::path::Path) -> anyhow::Result<()> {
    use std::io::Write;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (i, rec) in report.bounds.iter().enumerate() {
        let time_ms = report.timings.per_iteration_ms.get(i).copied().unwrap_or(0);
        let line = serde_json::json!({
            "iteration": rec.iteration,
            "phase": match rec.phase { Phase::One => 1, Phase::Two => 2 },
            "lb": rec.lb,
            "ub": rec.ub,
            "cuts_added": rec.cuts_added,
            "time_ms": time_ms,
        });
        writeln!(file, "{line}")?;
    }
    Ok(())
}

fn extensive_report(
    instance: &Instance,
    solution: &crewsched::enumerate::ExtensiveSolution,
) -> SolveReport {
    let portfolio = Portfolio {
        entries: instance
            .templates
            .iter()
            .enumerate()
            .map(|(p, t)| PortfolioEntry {
                template: t.id.clone(),
                count: solution.y[p].round() as u32,
                active: solution.y[p].round() as u32 > 0,
            })
            .collect(),
        template_cost: instance
            .templates
            .iter()
            .enumerate()
            .map(|(p, t)| t.cost * solution.y[p].round())
            .sum(),
    };
    let scenarios = instance
        .scenarios
        .iter()
        .enumerate()
        .map(|(s, scenario)| {
            let chosen: Vec<_> = solution
                .chosen_duties
                .iter()
                .filter(|(cs, _)| *cs == s)
                .map(|(_, d)| d.key())
                .collect();
            ScenarioOutcome {
                scenario: scenario.id.clone(),
                excess: solution.excess[s],
                duties: chosen.len(),
                chosen,
            }
        })
        .collect();
    let lb = if solution.gap > 0.0 {
        solution.objective * (1.0 - solution.gap)
    } else {
        solution.objective
    };
    SolveReport {
        method: "extensive".into(),
        lb,
        ub: solution.objective,
        gap: solution.gap,
        phase1_iterations: 0,
        phase2_iterations: 0,
        bounds: vec![BoundsRecord {
            iteration: 1,
            phase: Phase::One,
            lb,
            ub: Some(solution.objective),
            cuts_added: 0,
            master_objective: solution.objective,
            eta: solution.eta,
        }],
        portfolio,
        scenarios,
        cut_stats: CutStats::default(),
        timings: Timings::default(),
    }
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Training instance supplying templates and parameters.
    #[arg(long)]
    pub instance: PathBuf,
    /// Solution report whose portfolio is evaluated.
    #[arg(long)]
    pub solution: PathBuf,
    /// Instance file whose scenarios are the held-out days.
    #[arg(long)]
    pub days: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Time limit of the per-day integer re-solve, seconds.
    #[arg(long, default_value_t = 30.0)]
    pub milp_limit_s: f64,
}

pub fn evaluate(args: EvaluateArgs, threads: usize) -> anyhow::Result<()> {
    let out = resolve_out_dir(&args.out)?;
    let instance = load_instance(&args.instance)?;
    let report = read_report(&args.solution)?;
    let days_instance = load_instance(&args.days)?;
    let config = EvaluateConfig {
        milp_time_limit: Duration::from_secs_f64(args.milp_limit_s),
        ..EvaluateConfig::default()
    };
    let table = evaluate_period(&instance, &report.portfolio, &days_instance.scenarios, &config)?;
    std::fs::write(
        out.join("eval.json"),
        serde_json::to_string_pretty(&table)? + "\n",
    )?;
    write_metrics_csv(&table, &out.join("metrics.csv"))?;
    write_manifest(
        &out,
        "evaluate",
        &format!(
            "{}|{}|{}|milp={}",
            args.instance.display(),
            args.solution.display(),
            args.days.display(),
            args.milp_limit_s
        ),
        None,
        threads,
    )?;
    println!(
        "days={} mean_excess={:.3} mean_duties={:.2} metrics={}",
        table.rows.len(),
        table.mean_excess,
        table.mean_duties,
        out.join("metrics.csv").display()
    );
    Ok(())
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Grid spacing in minutes for the activity series.
    #[arg(long, default_value_t = 5)]
    pub grid: i64,
}

pub fn report(args: ReportArgs, threads: usize) -> anyhow::Result<()> {
    let out = resolve_out_dir(&args.out)?;
    let instance = load_instance(&args.instance)?;
    let report = read_report(&args.solution)?;
    write_bounds_csv(&report, &out.join("bounds.csv"))?;
    write_portfolio_csv(&report, &out.join("portfolio.csv"))?;
    write_excess_csv(&report, &out.join("excess.csv"))?;
    write_plot_data(&instance, &report, args.grid, &out.join("activity.csv"))?;
    write_manifest(
        &out,
        "report",
        &format!("{}|{}", args.instance.display(), args.solution.display()),
        None,
        threads,
    )?;
    println!("wrote tables under {}", out.display());
    Ok(())
}
