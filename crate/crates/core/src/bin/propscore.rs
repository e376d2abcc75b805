//! `propscore` command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use propscore::diagnostics::{
    estimate_sensitivity, forecast_grid, geometric_grid, local_invariance_check, propriety_sweep, DEFAULT_T_GRID,
};
use propscore::distributions::{GaussianDist, PredictiveDistribution};
use propscore::experiments::{
    check_entropy, check_nbreg, check_spatial, check_surfaces, check_volatility, entropy_decomposition_trace,
    expected_score_surfaces, load_config, run_nbreg, run_spatial_study, run_volatility, CheckOutcome, EntropyConfig,
    NbRegConfig, SpatialConfig, SurfaceConfig, Table, Validate, VolatilityConfig,
};
use propscore::io::{read_records, score_records, scores_table};
use propscore::kernels::MonteCarlo;
use propscore::scores::Rule;
use propscore::Error;

const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(name = "propscore", version = VERSION, about = "Proper scoring rules for probabilistic forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a prediction file (CSV header `id,kind,params,y`).
    Score(ScoreArgs),
    /// Scale, sensitivity and propriety diagnostics.
    Diagnose {
        #[command(subcommand)]
        which: Diagnose,
    },
    /// Run a simulation study.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RuleArgs {
    /// Comma-separated rules, e.g. `crps,scrps,rcrps:c=2`.
    #[arg(long, alias = "rule")]
    rules: String,
    /// Truncation level for `rcrps`/`rscrps` given without options.
    #[arg(long)]
    c: Option<f64>,
    /// Kernel exponent for `kernel` given without options.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct McArgs {
    /// Monte-Carlo draws where no closed form applies.
    #[arg(long, default_value_t = 100_000)]
    mc_budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ScoreArgs {
    input: PathBuf,
    #[command(flatten)]
    rules: RuleArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    mc: McArgs,
    /// Report negatively oriented values (smaller is better).
    #[arg(long)]
    negate: bool,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    rules: RuleArgs,
    /// Base distribution, `gaussian:mu,sigma` or `laplace:mu,b`.
    #[arg(long, default_value = "gaussian:0,1")]
    dist: String,
    #[command(flatten)]
    mc: McArgs,
    /// Also write the table to this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Diagnose {
    /// Scale function across predictive scales.
    Scale {
        #[command(flatten)]
        common: DiagArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        sigmas: Vec<f64>,
        /// Misspecification direction `r_mu,r_sigma`.
        #[arg(long, value_delimiter = ',', default_value = "1,0")]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Growth exponent of |S(P, y)| in y.
    Sensitivity {
        #[command(flatten)]
        common: DiagArgs,
        /// Observations, positive and increasing (default 10^1 .. 10^6).
        #[arg(long, value_delimiter = ',')]
        ys: Option<Vec<f64>>,
    },
    /// Expected score over a 41x41 forecast grid around a Gaussian truth.
    Propriety {
        #[command(flatten)]
        common: DiagArgs,
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Volatility,
    Spatial,
    Nbreg,
    Surface,
    Entropy,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Volatility => "volatility",
            Experiment::Spatial => "spatial",
            Experiment::Nbreg => "nbreg",
            Experiment::Surface => "surface",
            Experiment::Entropy => "entropy",
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: Experiment,
    /// TOML config; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rules: Option<String>,
    #[command(flatten)]
    out: OutArgs,
    /// Assert the expected qualitative outcome; exit 5 if it fails.
    #[arg(long)]
    check: bool,
}

/// Error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    /// Maps library errors; `fallback` covers everything that is not a
    /// parse, mismatch or noise error.
    fn from_error(e: Error, fallback: u8) -> Self {
        let code = match e.root() {
            Error::Parse { .. } | Error::Config(_) => 2,
            Error::Unsupported { .. } => 3,
            Error::NoiseDominated { .. } => 4,
            _ => fallback,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_rules(spec: &str, c: Option<f64>, alpha: Option<f64>) -> CliResult<Vec<Rule>> {
    let mut out = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let mut full = tok.to_string();
        if !tok.contains(':') {
            match tok.to_ascii_lowercase().as_str() {
                "rcrps" | "rscrps" => {
                    let c = c.ok_or_else(|| Failure::usage(format!("rule `{tok}` needs --c or `{tok}:c=...`")))?;
                    full = format!("{tok}:c={c}");
                }
                "kernel" => {
                    let a = alpha.ok_or_else(|| Failure::usage("rule `kernel` needs --alpha or `kernel:alpha=...`"))?;
                    full = format!("kernel:alpha={a}");
                    if let Some(c) = c {
                        full.push_str(&format!(":c={c}"));
                    }
                }
                _ => {}
            }
        }
        out.push(full.parse::<Rule>().map_err(|e| Failure::from_error(e, 2))?);
    }
    if out.is_empty() {
        return Err(Failure::usage("no rules given; pass e.g. --rules crps,scrps"));
    }
    Ok(out)
}

fn parse_dist(spec: &str) -> CliResult<PredictiveDistribution> {
    let bad = || Failure::usage(format!("cannot parse --dist `{spec}`; expected e.g. gaussian:0,1"));
    let (kind, params) = spec.split_once(':').ok_or_else(bad)?;
    let p: Vec<f64> =
        params.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    if p.len() != 2 {
        return Err(bad());
    }
    let d = match kind.trim().to_ascii_lowercase().as_str() {
        "gaussian" => PredictiveDistribution::gaussian(p[0], p[1]),
        "laplace" => PredictiveDistribution::laplace(p[0], p[1]),
        "negbin" => PredictiveDistribution::negbin(p[0], p[1]),
        _ => return Err(bad()),
    };
    d.map_err(|e| Failure::usage(e.to_string()))
}

fn io_fail(code: u8) -> impl Fn(std::io::Error) -> Failure {
    move |e| Failure { code, message: e.to_string() }
}

fn write_json(path: &Path, v: &Value, code: u8) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    fs::write(path, text).map_err(io_fail(code))
}

fn write_table(t: &Table, dir: &Path, format: Format, code: u8) -> CliResult<PathBuf> {
    match format {
        Format::Csv => t.save_csv(dir).map_err(|e| Failure::from_error(e, code)),
        Format::Json => {
            let path = dir.join(format!("{}.json", t.name));
            write_json(&path, &t.to_json(), code)?;
            Ok(path)
        }
    }
}

fn print_table(t: &Table) -> CliResult<()> {
    t.write_csv(std::io::stdout().lock()).map_err(|e| Failure::from_error(e, 2))
}

fn rule_names(rules: &[Rule]) -> Vec<String> {
    rules.iter().map(Rule::to_string).collect()
}

fn cmd_score(a: &ScoreArgs) -> CliResult<()> {
    let rules = parse_rules(&a.rules.rules, a.rules.c, a.rules.alpha)?;
    let records = read_records(&a.input).map_err(|e| match e {
        Error::Io(io) => Failure::usage(format!("{}: {io}", a.input.display())),
        other => Failure::from_error(other, 2),
    })?;
    let mc = MonteCarlo::new(a.mc.mc_budget, a.mc.seed);
    let (rows, summaries) = score_records(&records, &rules, &mc, a.negate).map_err(|e| Failure::from_error(e, 2))?;
    fs::create_dir_all(&a.out.out).map_err(io_fail(2))?;
    let path = write_table(&scores_table(&rows), &a.out.out, a.out.format, 2)?;
    let summary = json!({
        "version": VERSION,
        "command": "score",
        "config": {
            "input": a.input.display().to_string(),
            "rules": rule_names(&rules),
            "mc_budget": a.mc.mc_budget,
            "seed": a.mc.seed,
            "negate": a.negate,
            "format": a.out.format,
        },
        "n": records.len(),
        "averages": summaries,
    });
    write_json(&a.out.out.join("summary.json"), &summary, 2)?;
    for s in &summaries {
        println!("{}\t{:.6}\tn={}", s.rule, s.average_score, s.n);
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn emit(t: &Table, common: &DiagArgs) -> CliResult<()> {
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir).map_err(io_fail(2))?;
        write_table(t, dir, common.format, 2)?;
    }
    print_table(t)
}

fn cmd_diagnose(d: &Diagnose) -> CliResult<()> {
    let common = match d {
        Diagnose::Scale { common, .. } | Diagnose::Sensitivity { common, .. } | Diagnose::Propriety { common, .. } => {
            common
        }
    };
    let rules = parse_rules(&common.rules.rules, common.rules.c, common.rules.alpha)?;
    let dist = parse_dist(&common.dist)?;
    let mc = MonteCarlo::new(common.mc.mc_budget, common.mc.seed);
    let fail = |e: Error| Failure::from_error(e, 2);
    match d {
        Diagnose::Scale { sigmas, r, t_grid, .. } => {
            let [r_mu, r_sigma] = r[..] else {
                return Err(Failure::usage("--r takes two values: r_mu,r_sigma"));
            };
            let t_grid = t_grid.clone().unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
            let mut t = Table::new(
                "diagnose_scale",
                &["rule", "sigma", "s_hat", "p_hat", "method", "max_rel_spread", "sigma_exponent"],
            );
            for rule in &rules {
                let rep = local_invariance_check(rule, &dist, (r_mu, r_sigma), sigmas, &t_grid, &mc).map_err(fail)?;
                for (sigma, fit) in &rep.fits {
                    t.push(vec![
                        rule.to_string().into(),
                        (*sigma).into(),
                        fit.s_hat.into(),
                        fit.p_hat.into(),
                        fit.method.as_str().into(),
                        rep.max_rel_spread.into(),
                        rep.sigma_exponent.into(),
                    ]);
                }
            }
            emit(&t, common)
        }
        Diagnose::Sensitivity { ys, .. } => {
            let ys = ys.clone().unwrap_or_else(|| geometric_grid(1, 6, 4));
            let mut t = Table::new("diagnose_sensitivity", &["rule", "dist", "alpha_hat", "score_at_max_y"]);
            for rule in &rules {
                let fit = estimate_sensitivity(rule, &dist, &ys, &mc).map_err(fail)?;
                let last = fit.points.last().map_or(f64::NAN, |p| p.1);
                t.push(vec![rule.to_string().into(), common.dist.as_str().into(), fit.alpha_hat.into(), last.into()]);
            }
            emit(&t, common)
        }
        Diagnose::Propriety { grid, .. } => {
            let PredictiveDistribution::Gaussian(truth) = dist else {
                return Err(Failure::usage("propriety sweeps need a gaussian --dist"));
            };
            let truth: GaussianDist = truth;
            let (mus, sigmas) = forecast_grid(&truth, *grid);
            let mut t = Table::new(
                "diagnose_propriety",
                &["rule", "truth_mu", "truth_sigma", "argmax_mu", "argmax_sigma", "max_expected", "at_truth"],
            );
            for rule in &rules {
                let res = propriety_sweep(rule, &truth, &mus, &sigmas).map_err(fail)?;
                t.push(vec![
                    rule.to_string().into(),
                    truth.mu.into(),
                    truth.sigma.into(),
                    res.argmax_mu.into(),
                    res.argmax_sigma.into(),
                    res.max_expected.into(),
                    if res.at_truth { "true" } else { "false" }.into(),
                ]);
            }
            emit(&t, common)
        }
    }
}

fn load<T: Default + serde::de::DeserializeOwned + Validate>(path: &Option<PathBuf>) -> CliResult<T> {
    match path {
        Some(p) => load_config(p).map_err(|e| match e {
            Error::Io(io) => Failure::usage(format!("{}: {io}", p.display())),
            other => Failure::from_error(other, 2),
        }),
        None => Ok(T::default()),
    }
}

fn no_flag(flag: &str, present: bool, exp: &str) -> CliResult<()> {
    if present {
        Err(Failure::usage(format!("experiment {exp} does not take {flag}")))
    } else {
        Ok(())
    }
}

fn cmd_experiment(a: &ExperimentArgs) -> CliResult<()> {
    let exp = a.name.name();
    let rules = a.rules.as_deref().map(|r| parse_rules(r, None, None)).transpose()?;
    let run_fail = |e: Error| Failure::from_error(e, 5);
    let validate = |v: &dyn Validate| v.validate().map_err(|e| Failure::from_error(e, 2));
    let (config, tables, checks): (Value, Vec<Table>, Vec<CheckOutcome>) = match a.name {
        Experiment::Volatility => {
            let mut cfg: VolatilityConfig = load(&a.config)?;
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            cfg.rules = rules.unwrap_or(cfg.rules);
            validate(&cfg)?;
            let curve = run_volatility(&cfg).map_err(run_fail)?;
            (json!(cfg), vec![curve.table("volatility_selection")], check_volatility(&curve))
        }
        Experiment::Spatial => {
            let mut cfg: SpatialConfig = load(&a.config)?;
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            cfg.rules = rules.unwrap_or(cfg.rules);
            validate(&cfg)?;
            let curve = run_spatial_study(&cfg).map_err(run_fail)?;
            (json!(cfg), vec![curve.table("spatial_selection")], check_spatial(&curve))
        }
        Experiment::Nbreg => {
            no_flag("--rules", rules.is_some(), exp)?;
            let mut cfg: NbRegConfig = load(&a.config)?;
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            validate(&cfg)?;
            let res = run_nbreg(&cfg).map_err(run_fail)?;
            (json!(cfg), res.tables(), check_nbreg(&res, cfg.topk_fraction))
        }
        Experiment::Surface => {
            no_flag("--seed", a.seed.is_some(), exp)?;
            let mut cfg: SurfaceConfig = load(&a.config)?;
            cfg.rules = rules.unwrap_or(cfg.rules);
            validate(&cfg)?;
            let s = expected_score_surfaces(&cfg).map_err(run_fail)?;
            (json!(cfg), s.tables(), check_surfaces(&s, cfg.sigma1, cfg.sigma2))
        }
        Experiment::Entropy => {
            let mut cfg: EntropyConfig = load(&a.config)?;
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            cfg.rules = rules.unwrap_or(cfg.rules);
            validate(&cfg)?;
            let tr = entropy_decomposition_trace(&cfg).map_err(run_fail)?;
            (json!(cfg), vec![tr.table()], check_entropy(&tr))
        }
    };
    fs::create_dir_all(&a.out.out).map_err(io_fail(5))?;
    let mut files = Vec::new();
    for t in &tables {
        let p = write_table(t, &a.out.out, a.out.format, 5)?;
        files.push(p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
    }
    let mut summary = json!({
        "version": VERSION,
        "experiment": exp,
        "config": config,
        "files": files,
    });
    if a.check {
        summary["checks"] = json!(checks);
    }
    write_json(&a.out.out.join(format!("{exp}_summary.json")), &summary, 5)?;
    for f in &files {
        eprintln!("wrote {}", a.out.out.join(f).display());
    }
    if a.check {
        let mut failed = 0;
        for c in &checks {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            failed += usize::from(!c.passed);
        }
        if failed > 0 {
            return Err(Failure { code: 5, message: format!("{failed} of {} checks failed", checks.len()) });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Score(a) => cmd_score(a),
        Command::Diagnose { which } => cmd_diagnose(which),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
