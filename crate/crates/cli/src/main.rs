//! `vecgame`: races, grid studies, boundary exploration and cost surfaces.
//!
//! Exit status is 0 on success, 2 for configuration problems and 3 for
//! runtime failures.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use vecgame_client::{Client, ClientError};
use vecgame_core::api::{parse_json, CellReport, ExploreRequest, GridRequest, SelftestRequest};
use vecgame_core::explore::selftest::Shape;
use vecgame_core::explore::Metric;
use vecgame_core::report::{
    config_hash, render_volume_table, write_boundary_csv, write_solve_dump, write_surface_csv, SummaryTable, SurfaceSpec,
    VolumeCell,
};
use vecgame_core::sim::{CostStructure, Method, RaceConfig, RaceRecord, Scenario};
use vecgame_core::ConfigError;

use output::Output;

#[derive(Parser)]
#[command(name = "vecgame", version, about = "Vector-cost game racing studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch commands.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; defaults to `$VECGAME_OUT/<command>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    scenario: Option<String>,
    #[arg(long, global = true)]
    structure: Option<String>,
    #[arg(long, global = true)]
    metric: Option<String>,
    /// Service root URL; an in-process service is started when absent.
    #[arg(long, global = true, env = "VECGAME_SERVER")]
    server: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one race.
    Race,
    /// Grid search over attacker weights for both methods.
    Grid,
    /// Boundary exploration and success-volume estimates.
    Explore {
        /// Serve remote evaluation on this address instead of exploring.
        #[arg(long)]
        serve: Option<String>,
        /// Explore an analytic classifier (sphere, plane, half_space) and check the result.
        #[arg(long)]
        selftest: Option<String>,
    },
    /// Weighted point-cost surface over the track.
    Surface,
    /// Rebuild summary tables from an earlier output directory.
    Report {
        /// Directory holding `records.ndjson` and/or `explore.json`.
        input: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Race => "race",
            Command::Grid => "grid",
            Command::Explore { .. } => "explore",
            Command::Surface => "surface",
            Command::Report { .. } => "report",
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Config(c) => CliError::Config(c),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(code) => code,
        Err(CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn load<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| ConfigError::new("--config", format!("{}: {e}", p.display())))?;
            Ok(parse_json(&bytes)?)
        }
    }
}

fn parsed<T: std::str::FromStr<Err = ConfigError>>(value: &Option<String>) -> Result<Option<T>> {
    Ok(value.as_deref().map(str::parse).transpose()?)
}

struct Overrides {
    method: Option<Method>,
    scenario: Option<Scenario>,
    structure: Option<CostStructure>,
    metric: Option<Metric>,
    seed: Option<u64>,
}

impl Overrides {
    fn from_cli(cli: &Cli) -> Result<Self> {
        Ok(Self {
            method: parsed(&cli.method)?,
            scenario: parsed(&cli.scenario)?,
            structure: parsed(&cli.structure)?,
            metric: parsed(&cli.metric)?,
            seed: cli.seed,
        })
    }

    fn apply_race(&self, race: &mut RaceConfig) {
        if let Some(m) = self.method {
            race.method = m;
        }
        if let Some(s) = self.scenario {
            race.scenario = s;
        }
        if let Some(s) = self.structure {
            race.costs.structure = s;
        }
        if let Some(s) = self.seed {
            race.seed = s;
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        let root = std::env::var_os("VECGAME_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("vecgame-out"));
        root.join(cli.command.name())
    })
}

async fn connect(cli: &Cli) -> Result<Client> {
    if let Some(url) = &cli.server {
        return Ok(Client::new(url.clone()));
    }
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(vecgame_server::serve_http(listener, vecgame_server::AppState::default()));
    Ok(Client::new(format!("http://{addr}")))
}

async fn run(cli: Cli) -> Result<ExitCode> {
    let overrides = Overrides::from_cli(&cli)?;
    if cli.jobs == Some(0) {
        return Err(ConfigError::new("--jobs", "must be at least 1").into());
    }
    match &cli.command {
        Command::Race => cmd_race(&cli, &overrides).await,
        Command::Grid => cmd_grid(&cli, &overrides).await,
        Command::Explore { serve: Some(addr), .. } => cmd_serve(&cli, &overrides, addr).await,
        Command::Explore {
            selftest: Some(shape), ..
        } => cmd_selftest(&cli, shape).await,
        Command::Explore { .. } => cmd_explore(&cli, &overrides).await,
        Command::Surface => cmd_surface(&cli, &overrides).await,
        Command::Report { input } => cmd_report(&cli, input.clone()),
    }
}

async fn cmd_race(cli: &Cli, o: &Overrides) -> Result<ExitCode> {
    let mut config: RaceConfig = load(&cli.config)?;
    o.apply_race(&mut config);
    config.validate()?;
    let client = connect(cli).await?;
    let record = client.race(&config).await?;

    let mut out = Output::create(out_dir(cli), "race", &config, config.seed)?;
    out.json("race.json", &record)?;
    out.features("race.csv", std::slice::from_ref(&record))?;
    if config.log_solves {
        out.write_with("solves.ndjson", |w| write_solve_dump(std::slice::from_ref(&record), w))?;
    }
    out.finish()?;
    println!(
        "{} {}: passed={} out_of_bounds={} collided={} min_distance={:.2} adjusted_rounds={}",
        config.method.name(),
        config.scenario.name(),
        record.passed,
        record.out_of_bounds,
        record.collided,
        record.min_distance,
        record.adjusted_rounds
    );
    Ok(ExitCode::SUCCESS)
}

async fn cmd_grid(cli: &Cli, o: &Overrides) -> Result<ExitCode> {
    let mut request: GridRequest = load(&cli.config)?;
    o.apply_race(&mut request.race);
    if let Some(m) = o.method {
        request.methods = vec![m];
    }
    if let Some(s) = o.scenario {
        request.scenarios = vec![s];
    }
    if cli.jobs.is_some() {
        request.jobs = cli.jobs;
    }
    request.validate()?;
    let client = connect(cli).await?;
    let mut records: Vec<RaceRecord> = Vec::new();
    let mut failures = Vec::new();
    client
        .grid_each(&request, |line| match line.record {
            Some(r) => records.push(r),
            None => failures.push(line),
        })
        .await?;

    // Jobs only affect scheduling, so they stay out of the hash.
    let hashed = GridRequest {
        jobs: None,
        ..request.clone()
    };
    let mut out = Output::create(out_dir(cli), "grid", &hashed, request.race.seed)?;
    out.features("features.csv", &records)?;
    out.ndjson("records.ndjson", &records)?;
    if !failures.is_empty() {
        out.ndjson("failures.ndjson", &failures)?;
    }
    if request.race.log_solves {
        out.write_with("solves.ndjson", |w| write_solve_dump(&records, w))?;
    }
    let table = SummaryTable::from_records(&records);
    out.summary(&table)?;
    out.finish()?;
    print!("{}", table.render_text());
    for c in &table.columns {
        println!("{} adjusted round rate: {:.4}", c.method.name(), c.adjusted_round_rate);
    }
    if !failures.is_empty() {
        eprintln!("{} of {} races failed; see failures.ndjson", failures.len(), failures.len() + records.len());
    }
    Ok(ExitCode::SUCCESS)
}

async fn cmd_explore(cli: &Cli, o: &Overrides) -> Result<ExitCode> {
    let mut request: ExploreRequest = load(&cli.config)?;
    o.apply_race(&mut request.race);
    if let Some(s) = o.seed {
        request.explore.seed = s;
    }
    request.cells.retain(|c| {
        o.scenario.is_none_or(|s| s == c.scenario)
            && o.method.is_none_or(|m| m == c.method)
            && o.metric.is_none_or(|m| m == c.metric)
    });
    if cli.jobs.is_some() {
        request.jobs = cli.jobs;
    }
    request.validate()?;
    let client = connect(cli).await?;
    let reports = client.explore(&request).await?;

    let hashed = ExploreRequest {
        jobs: None,
        ..request.clone()
    };
    let mut out = Output::create(out_dir(cli), "explore", &hashed, request.explore.seed)?;
    out.json("explore.json", &reports)?;
    for r in &reports {
        let name = format!(
            "boundary_{}_{}_{}.csv",
            r.cell.scenario.name(),
            r.cell.metric.name(),
            r.cell.method.name()
        );
        out.write_with(&name, |w| write_boundary_csv(&r.report, w))?;
    }
    let cells = volume_cells(&reports);
    out.volume_table(&cells)?;
    out.finish()?;
    for c in &cells {
        println!("{}", c.line());
    }
    Ok(ExitCode::SUCCESS)
}

fn volume_cells(reports: &[CellReport]) -> Vec<VolumeCell> {
    reports
        .iter()
        .map(|r| VolumeCell::new(r.cell.scenario, r.cell.metric, r.cell.method, &r.report))
        .collect()
}

async fn cmd_selftest(cli: &Cli, shape: &str) -> Result<ExitCode> {
    let shape: Shape = shape.parse()?;
    let mut request = SelftestRequest {
        shape,
        ..SelftestRequest::default()
    };
    if let Some(path) = &cli.config {
        let bytes = std::fs::read(path).map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        request.explore = parse_json::<ExploreRequest>(&bytes)?.explore;
    }
    if let Some(s) = cli.seed {
        request.explore.seed = s;
    }
    request.explore.validate()?;
    let client = connect(cli).await?;
    let report = client.selftest(&request).await?;

    let mut out = Output::create(out_dir(cli), "explore", &request, request.explore.seed)?;
    out.json("selftest.json", &report)?;
    out.finish()?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

async fn cmd_serve(cli: &Cli, o: &Overrides, addr: &str) -> Result<ExitCode> {
    let mut request: ExploreRequest = load(&cli.config)?;
    o.apply_race(&mut request.race);
    request.race.validate()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("remote evaluation listening on {}", listener.local_addr()?);
    vecgame_server::serve_eval(listener, Arc::new(request.race)).await?;
    Ok(ExitCode::SUCCESS)
}

async fn cmd_surface(cli: &Cli, o: &Overrides) -> Result<ExitCode> {
    let mut spec: SurfaceSpec = load(&cli.config)?;
    if let Some(s) = o.structure {
        spec.costs.structure = s;
    }
    spec.validate()?;
    let client = connect(cli).await?;
    let points = client.surface(&spec).await?;
    let mut out = Output::create(out_dir(cli), "surface", &spec, cli.seed.unwrap_or(0))?;
    out.write_with("surface.csv", |w| write_surface_csv(&points, w))?;
    out.finish()?;
    println!("{} points", points.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(cli: &Cli, input: PathBuf) -> Result<ExitCode> {
    let records_path = input.join("records.ndjson");
    let explore_path = input.join("explore.json");
    if !records_path.exists() && !explore_path.exists() {
        return Err(ConfigError::new(
            "input",
            format!("{} has neither records.ndjson nor explore.json", input.display()),
        )
        .into());
    }
    let records_text = records_path.exists().then(|| std::fs::read_to_string(&records_path)).transpose()?;
    let explore_bytes = explore_path.exists().then(|| std::fs::read(&explore_path)).transpose()?;
    let inputs = serde_json::json!({
        "records": records_text.as_ref().map(config_hash),
        "explore": explore_bytes.as_ref().map(|b| config_hash(&String::from_utf8_lossy(b))),
    });
    let dest = cli.out.clone().unwrap_or_else(|| input.clone());
    let mut out = Output::create(dest, "report", &inputs, cli.seed.unwrap_or(0))?;
    if let Some(text) = &records_text {
        let records = parse_records(&records_path, text)?;
        let table = SummaryTable::from_records(&records);
        out.summary(&table)?;
        print!("{}", table.render_text());
    }
    if let Some(bytes) = &explore_bytes {
        let reports: Vec<CellReport> =
            serde_json::from_slice(bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", explore_path.display())))?;
        let cells = volume_cells(&reports);
        out.volume_table(&cells)?;
        print!("{}", render_volume_table(&cells));
    }
    out.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn parse_records(path: &Path, text: &str) -> Result<Vec<RaceRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| CliError::Runtime(format!("{}:{}: {e}", path.display(), k + 1))))
        .collect()
}
