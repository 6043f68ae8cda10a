//! `lipstd` subcommands. Each `cmd_*` writes its report to the given writer
//! and returns an error carrying the process exit code.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lipstd_core::dataio::{
    read_csv, read_metadata, recover_parameters, write_scaled, ColumnMetadata, DatasetFrame, Hints, RecoveredColumn,
};
use lipstd_core::harness::{balance_fixture, run_balance, trace_to_csv, BalanceReport};
use lipstd_core::pipeline::{scale_frame, ScaleConfig, TrickMode};
use lipstd_core::scaler::ScalingMethod;
use lipstd_core::tricks::DEFAULT_DELTA;
use lipstd_core::{CanonicalParams, Error, Family};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    /// Several columns failed; nothing was written.
    Columns(Vec<Error>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let code = |e: &Error| if e.is_numeric() { EXIT_NUMERIC } else { EXIT_DATA };
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => code(e),
            CliError::Columns(es) => es.iter().map(code).max().unwrap_or(EXIT_DATA),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => write!(f, "error: {e}"),
            CliError::Columns(es) => {
                write!(f, "error: {} column(s) failed, no output written", es.len())?;
                for e in es {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Core(Error::Io { path: "<stdout>".into(), source })
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "lipstd", version, about = "Lipschitz standardization for mixed tabular data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale a CSV and write the scaled data plus its metadata sidecar.
    Scale(ScaleArgs),
    /// Map parameters learned on scaled data back to the original columns.
    Recover(RecoverArgs),
    /// Show per-column smoothness under every scaling method.
    Analyze(AnalyzeArgs),
    /// Balance diagnostics on the built-in synthetic fixture.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    pub input: PathBuf,
    /// JSON object mapping column names to a kind and/or family.
    #[arg(long)]
    pub hints: Option<PathBuf>,
    /// Field delimiter: one ASCII character, or `tab`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[arg(long, default_value = "lip")]
    pub method: ScalingMethod,
    #[arg(long, default_value = "gamma")]
    pub trick: TrickMode,
    /// Learning rate; the target smoothness is 1/(D·alpha).
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Seed for the Gamma-trick noise.
    #[arg(long, env = "LIPSTD_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Pass discrete columns through unscaled under `--trick none`.
    #[arg(long)]
    pub allow_unscaled_discrete: bool,
}

impl ScalingArgs {
    fn config(&self) -> Result<ScaleConfig, CliError> {
        check_alpha(self.alpha)?;
        let mut c = ScaleConfig::new(self.method, self.trick);
        c.alpha = self.alpha;
        c.seed = self.seed;
        c.allow_unscaled_discrete = self.allow_unscaled_discrete;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scaling: ScalingArgs,
    /// Scaled CSV output.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Metadata sidecar; defaults to `<output>.meta.json`.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    /// Sidecar written by `scale`.
    #[arg(long)]
    pub metadata: PathBuf,
    /// JSON object mapping each scaled column to its natural parameters.
    #[arg(long)]
    pub params: PathBuf,
    /// Write recovered parameters as JSON here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Floor for recovered Poisson rates.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "gamma")]
    pub trick: TrickMode,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    #[arg(long, env = "LIPSTD_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,
    #[arg(long, env = "LIPSTD_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Gradient-ascent iterations per column.
    #[arg(long, default_value_t = 30_000)]
    pub iters: usize,
    /// Write one trace CSV per configuration into this directory.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Scale(a) => cmd_scale(a, out),
        Command::Recover(a) => cmd_recover(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Demo(a) => cmd_demo(a, out),
    }
}

pub fn parse_delimiter(s: &str) -> Result<u8, CliError> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(CliError::Usage(format!("delimiter must be one ASCII character or `tab`, got `{s}`"))),
    }
}

fn check_alpha(alpha: f64) -> CliResult {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must be positive and finite, got {alpha}")))
    }
}

fn load(input: &InputArgs) -> Result<(DatasetFrame, u8), CliError> {
    let delimiter = parse_delimiter(&input.delimiter)?;
    let hints = input.hints.as_deref().map(Hints::from_path).transpose()?;
    Ok((read_csv(&input.input, hints.as_ref(), delimiter)?, delimiter))
}

/// Fixed-width rendering for tables; exact values live in the JSON forms.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) {
        format!("{x:.6}")
    } else {
        format!("{x:.4e}")
    }
}

fn nums(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut s = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    s
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(Error::Invalid(e.to_string())))?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScaleRow<'a> {
    column: &'a str,
    family: Family,
    omega: f64,
    achieved: Option<f64>,
    target: Option<f64>,
    warnings: &'a [String],
}

impl<'a> From<&'a ColumnMetadata> for ScaleRow<'a> {
    fn from(c: &'a ColumnMetadata) -> Self {
        Self {
            column: &c.spec.name,
            family: c.spec.family,
            omega: c.spec.omega,
            achieved: c.achieved.as_ref().map(|a| a.total),
            target: c.l_target,
            warnings: &c.warnings,
        }
    }
}

pub fn metadata_path_for(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn cmd_scale(args: &ScaleArgs, out: &mut dyn Write) -> CliResult {
    let config = args.scaling.config()?;
    let (frame, delimiter) = load(&args.input)?;
    let run = scale_frame(&frame, &config)?;
    if !run.failures.is_empty() {
        return Err(CliError::Columns(run.failures));
    }
    let meta_path = args.metadata.clone().unwrap_or_else(|| metadata_path_for(&args.output));
    write_scaled(&run.frame, &run.metadata, &args.output, &meta_path, delimiter)?;

    let rows: Vec<ScaleRow> = run.metadata.columns.iter().map(ScaleRow::from).collect();
    match args.format {
        Format::Json => write_json(out, &rows),
        Format::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.column.to_string(),
                        r.family.to_string(),
                        num(r.omega),
                        r.achieved.map_or("-".into(), num),
                        r.target.map_or("-".into(), num),
                        r.warnings.join("; "),
                    ]
                })
                .collect();
            let header = ["column", "family", "omega", "achieved_L", "target_L", "warnings"];
            write!(out, "{}", render_table(&header, &cells))?;
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Core(Error::Io { path: path.to_path_buf(), source }))
}

pub fn cmd_recover(args: &RecoverArgs, out: &mut dyn Write) -> CliResult {
    if !(args.delta > 0.0 && args.delta.is_finite()) {
        return Err(CliError::Usage(format!("--delta must be positive and finite, got {}", args.delta)));
    }
    let meta = read_metadata(&args.metadata)?;
    let params = lipstd_core::dataio::parse_learned_params(&read_text(&args.params)?).map_err(|e| match e {
        Error::Invalid(msg) => Error::Invalid(format!("{}: {msg}", args.params.display())),
        other => other,
    })?;
    let recovered = recover_parameters(&meta, &params, args.delta)?;
    if let Some(path) = &args.output {
        let mut file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
        write_json(&mut file, &recovered)?;
    }
    match args.format {
        Format::Json if args.output.is_none() => write_json(out, &recovered),
        Format::Json => Ok(()),
        Format::Table => {
            write!(out, "{}", recovered_table(&recovered))?;
            Ok(())
        }
    }
}

fn recovered_table(recovered: &[RecoveredColumn]) -> String {
    let rows: Vec<Vec<String>> = recovered
        .iter()
        .map(|r| {
            let names = r.family.canonical_fields();
            let params = if names.len() == r.params.len() {
                names.iter().zip(r.params.as_slice()).map(|(n, v)| format!("{n}={}", num(*v))).collect::<Vec<_>>().join(" ")
            } else {
                nums(r.params.as_slice())
            };
            vec![r.column.clone(), r.family.to_string(), params, r.warning.clone().unwrap_or_default()]
        })
        .collect();
    render_table(&["column", "family", "parameters", "warning"], &rows)
}

#[derive(Debug, Serialize)]
struct AnalyzeRow {
    column: String,
    family: Family,
    fitted: CanonicalParams,
    method: ScalingMethod,
    omega: f64,
    /// Smoothness the scaling law assigns at `omega`.
    per_param: Vec<f64>,
    total: f64,
    /// Local estimate at the scaled parameters.
    local_total: f64,
    target: f64,
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    check_alpha(args.alpha)?;
    let (frame, _) = load(&args.input)?;
    let mut rows = Vec::new();
    let mut failures: Vec<(ScalingMethod, String)> = Vec::new();
    for method in ScalingMethod::ALL {
        let mut config = ScaleConfig::new(method, args.trick);
        config.alpha = args.alpha;
        config.seed = args.seed;
        config.allow_unscaled_discrete = true;
        let run = scale_frame(&frame, &config)?;
        failures.extend(run.failures.iter().map(|f| (method, f.to_string())));
        for c in &run.metadata.columns {
            let (Some(achieved), Some(local), Some(target)) = (&c.achieved, &c.local_at_scaled, c.l_target) else {
                continue;
            };
            rows.push(AnalyzeRow {
                column: c.spec.name.clone(),
                family: c.spec.family,
                fitted: c.fitted.clone(),
                method,
                omega: c.spec.omega,
                per_param: achieved.per_param.clone(),
                total: achieved.total,
                local_total: local.total,
                target,
            });
        }
    }
    // group by column, methods in their fixed order
    let order: Vec<String> = frame_order(&rows);
    rows.sort_by_key(|r| (order.iter().position(|n| *n == r.column), ScalingMethod::ALL.iter().position(|m| *m == r.method)));
    match args.format {
        Format::Json => {
            let failures: Vec<_> = failures.iter().map(|(m, e)| serde_json::json!({ "method": m, "error": e })).collect();
            write_json(out, &serde_json::json!({ "columns": rows, "failures": failures }))
        },
        Format::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.column.clone(),
                        r.family.to_string(),
                        nums(r.fitted.as_slice()),
                        r.method.to_string(),
                        num(r.omega),
                        nums(&r.per_param),
                        num(r.total),
                        num(r.local_total),
                        num(r.target),
                    ]
                })
                .collect();
            let header = ["column", "family", "fitted", "method", "omega", "L_i", "L", "L_local", "target_L"];
            write!(out, "{}", render_table(&header, &cells))?;
            for (method, f) in &failures {
                writeln!(out, "{method}: {f}")?;
            }
            Ok(())
        }
    }
}

fn frame_order(rows: &[AnalyzeRow]) -> Vec<String> {
    let mut order = Vec::new();
    for r in rows {
        if !order.contains(&r.column) {
            order.push(r.column.clone());
        }
    }
    order
}

/// The (method, trick) grid of the demo, in report order.
pub fn demo_grid() -> Vec<(ScalingMethod, TrickMode)> {
    let mut grid = Vec::new();
    for trick in TrickMode::ALL {
        for method in ScalingMethod::ALL {
            grid.push((method, trick));
        }
    }
    grid
}

#[derive(Debug, Serialize)]
pub struct DemoEntry {
    pub method: ScalingMethod,
    pub trick: TrickMode,
    pub columns: Vec<String>,
    pub report: BalanceReport,
}

/// Runs the balance fixture under every grid configuration.
pub fn demo_entries(args: &DemoArgs) -> Result<Vec<(DemoEntry, String)>, CliError> {
    check_alpha(args.alpha)?;
    let data = balance_fixture(args.rows, args.seed)?;
    let mut entries = Vec::new();
    for (method, trick) in demo_grid() {
        let mut config = ScaleConfig::new(method, trick);
        config.alpha = args.alpha;
        config.seed = args.seed;
        config.allow_unscaled_discrete = true;
        let (trace, report) = run_balance(&data.observed, &config, args.iters)?;
        let columns = trace.columns.iter().map(|c| c.name.clone()).collect();
        entries.push((DemoEntry { method, trick, columns, report }, trace_to_csv(&trace)));
    }
    Ok(entries)
}

pub fn cmd_demo(args: &DemoArgs, out: &mut dyn Write) -> CliResult {
    let entries = demo_entries(args)?;
    if let Some(dir) = &args.trace_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
        for (e, csv) in &entries {
            let path = dir.join(format!("trace-{}-{}.csv", e.method, e.trick));
            std::fs::write(&path, csv).map_err(|source| Error::Io { path, source })?;
        }
    }
    let text = match args.format {
        Format::Json => {
            let reports: Vec<&DemoEntry> = entries.iter().map(|(e, _)| e).collect();
            let mut s = serde_json::to_string_pretty(&reports).map_err(|e| Error::Invalid(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Table => demo_table(args, &entries),
    };
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source })?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn demo_table(args: &DemoArgs, entries: &[(DemoEntry, String)]) -> String {
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|(e, _)| {
            let r = &e.report;
            let converged = r.iterations_to_converge.iter().filter(|t| t.is_some()).count();
            let mean_disp = r.improvement_dispersion.iter().sum::<f64>() / r.improvement_dispersion.len().max(1) as f64;
            vec![
                format!("{}-{}", e.method, e.trick),
                e.columns.len().to_string(),
                num(r.gradient_norm_ratio),
                r.improvement_dispersion.first().map_or("-".into(), |d| num(*d)),
                num(mean_disp),
                format!("{converged}/{}", e.columns.len()),
                r.convergence_spread.map_or("-".into(), num),
            ]
        })
        .collect();
    let mut s = format!(
        "balance fixture: n = {}, seed = {}, alpha = {}, iterations = {}\n",
        args.rows, args.seed, args.alpha, args.iters
    );
    s.push_str(&render_table(
        &["config", "columns", "grad_ratio_t0", "dispersion_t0", "dispersion_mean", "converged", "conv_spread"],
        &rows,
    ));
    s
}
