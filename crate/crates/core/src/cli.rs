//! Command-line front end: subcommands, flat configuration files and CSV
//! output with a provenance header.
//!
//! Every setting can come from `--config <file>` (`key = value` lines, keys
//! spelled like the long options with `_` or `-`) or from the command line,
//! which wins. The resolved settings are hashed into the header line written
//! at the top of every output.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fmt::Display;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::cascade::{cascading_order, ccdf_curve, empirical_ccdf, CascadingOrder, IncidenceMatrix};
use crate::cces::{tfpg_cces, tfpg_translog, CcesTechnology, Factor, Nest, Prices, TwoPeriodSectorData};
use crate::dynge::{calibrate_capital, synergy, AltConfig, BaseAggregates, Target, WelfareModel};
use crate::elasticity::elasticity_tables;
use crate::equilibrium::{solve_equilibrium, verify_restoring, Economy, EconomyKind, SolverConfig};
use crate::error::{Error, Result};
use crate::fluctuations::{draw_shocks, parse_horizon, qq_r_squared, simulate_aggregate, summarize, Summary};
use crate::household::{estimate_lambda, HouseholdData, HouseholdModel, Weighting};
use crate::iotable::{
    fmt_f64, load_table, load_table_pair, save_table, LinkedIOTable, TableSchema, DEFAULT_BALANCE_TOL,
    REFERENCE_PERIOD,
};
use crate::reference::LAMBDA_HAT;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CASCADE_GE_THREADS";

pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "cascade-ge", version, about = "Cascaded-CES production economies from linked input-output tables")]
struct Cli {
    /// Flat `key = value` configuration file; command-line options override it.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed recorded in every output header and used by random experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate a linked table, writing the balance report.
    Load(LoadArgs),
    /// Cascading order of sectors from the incidence matrix.
    Order(OrderArgs),
    /// Two-point restoring CCES parameters of every sector.
    Estimate(EstimateArgs),
    /// Sectoral productivity growth.
    Tfp(TfpArgs),
    /// Equilibrium prices and production network for given productivities.
    Solve(SolveArgs),
    /// Monte Carlo aggregate fluctuations under sectoral shocks.
    Simulate(SimulateArgs),
    /// Weighted 2SLS estimate of the household exponent.
    Household(HouseholdArgs),
    /// Social return on productivity.
    Srop(SropArgs),
    /// Synergy of standardized sectoral productivity increments.
    Synergy(SynergyArgs),
    /// AUES and MES tables of one sector.
    Elasticity(ElasticityArgs),
    /// load, order, estimate and verify restoration in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct TableArgs {
    /// Long-format table CSV (or the period-0 file when `--input1` is given).
    #[arg(long)]
    input: Option<String>,
    /// Period-1 file of a one-file-per-period table.
    #[arg(long)]
    input1: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
struct SolverArgs {
    /// Convergence tolerance on log prices.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Initial damping in (0, 1].
    #[arg(long)]
    damping: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct EconomyArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Nesting order (order.csv); computed from the table when absent.
    #[arg(long)]
    order: Option<String>,
    /// Technologies (tech.csv); estimated from the table when absent.
    #[arg(long)]
    tech: Option<String>,
}

#[derive(Args, Debug)]
struct LoadArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long)]
    report: Option<String>,
    /// Relative balance tolerance.
    #[arg(long)]
    balance_tol: Option<f64>,
    /// Also write the normalized table in long format.
    #[arg(long)]
    normalized: Option<String>,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    ccdf: Option<String>,
    /// Period whose incidence matrix defines the order.
    #[arg(long)]
    period: Option<usize>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct TfpArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long)]
    order: Option<String>,
    /// `cces` (cascaded Sato-Vartia) or `translog` (Törnqvist).
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    economy: EconomyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Productivities (sector_id,tau); all ones when absent.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    /// `prices.csv,shares.csv`
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    economy: EconomyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated kinds among cces, cd, leontief, simple.
    #[arg(long)]
    kind: Option<String>,
    /// Annual volatility of productivity growth.
    #[arg(long)]
    sigma: Option<f64>,
    /// Horizon such as `1h`, `30d`, `0.5y` (bare numbers are years).
    #[arg(long)]
    ell: Option<String>,
    #[arg(long)]
    draws: Option<usize>,
    /// `series.csv,moments.csv,qq.csv`
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct HouseholdArgs {
    /// Expenditure shares (item_id,b0,b1).
    #[arg(long)]
    shares: Option<String>,
    /// Prices (item_id,p0,p1).
    #[arg(long)]
    prices: Option<String>,
    /// Instrument per item (id,tfpg); the output of `tfp` fits directly.
    #[arg(long)]
    instruments: Option<String>,
    /// inverse_variance, inverse_nu or unweighted.
    #[arg(long)]
    weighting: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
struct WelfareArgs {
    /// Household exponent; read from `--household` when that is given.
    #[arg(long)]
    lambda: Option<f64>,
    /// lambda.json written by `household`.
    #[arg(long)]
    household: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Debug)]
struct SropArgs {
    #[command(flatten)]
    economy: EconomyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    welfare: WelfareArgs,
    /// `all` (every sector plus the simultaneous imposition) or a sector id.
    #[arg(long)]
    sector: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct SynergyArgs {
    #[command(flatten)]
    economy: EconomyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct ElasticityArgs {
    #[command(flatten)]
    economy: EconomyArgs,
    #[arg(long)]
    sector: Option<String>,
    /// `reference` (unit prices) or `base` (period-0 prices, needs the table).
    #[arg(long)]
    at: Option<String>,
    /// `aues.csv,mes.csv`
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    table: TableArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    balance_tol: Option<f64>,
    /// Directory receiving every output file.
    #[arg(long)]
    out_dir: Option<String>,
}

/// Resolved run settings: configuration file values overridden by the
/// command line, plus a record of every value actually used.
#[derive(Debug, Clone)]
pub struct RunConfig {
    subcommand: String,
    file: HashMap<String, String>,
    used: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_").to_lowercase()
}

impl RunConfig {
    pub fn new(subcommand: &str, config: Option<&Path>) -> Result<Self> {
        let mut file = HashMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::Schema(format!("{}:{}: expected key = value", path.display(), n + 1))
                })?;
                file.insert(normalize_key(k), v.trim().to_string());
            }
        }
        let mut used = BTreeMap::new();
        used.insert("subcommand".to_string(), subcommand.to_string());
        Ok(RunConfig {
            subcommand: subcommand.to_string(),
            file,
            used,
        })
    }

    /// Value from the command line, else the configuration file.
    pub fn value<T>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match cli {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(s.parse::<T>().map_err(|e| {
                    Error::InvalidArgument(format!("config key `{key}`: {e}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.used.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn or<T>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.value(key, cli)? {
            Some(v) => Ok(v),
            None => {
                self.used.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T>(&mut self, key: &str, cli: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.value(key, cli)?.ok_or_else(|| {
            Error::InvalidArgument(format!("{}: missing --{}", self.subcommand, key.replace('_', "-")))
        })
    }

    /// First 16 hex digits of the SHA-256 of the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.used {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&mut self, cli: Option<u64>) -> Result<u64> {
        self.or("seed", cli, DEFAULT_SEED)
    }

    /// `# cascade-ge <version> config=<hash> seed=<seed>`
    pub fn header(&self) -> String {
        let seed = self.used.get("seed").map_or("none", String::as_str);
        format!("# cascade-ge {} config={} seed={seed}", env!("CARGO_PKG_VERSION"), self.hash())
    }
}

fn out_paths(cfg: &mut RunConfig, cli: Option<String>, default: &str, n: usize) -> Result<Vec<PathBuf>> {
    let spec = cfg.or("out", cli, default.to_string())?;
    let parts: Vec<PathBuf> = spec.split(',').map(|s| PathBuf::from(s.trim())).collect();
    if parts.len() != n || parts.iter().any(|p| p.as_os_str().is_empty()) {
        return Err(Error::InvalidArgument(format!("--out expects {n} comma-separated paths, got `{spec}`")));
    }
    Ok(parts)
}

fn solver_config(cfg: &mut RunConfig, args: &SolverArgs) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let s = SolverConfig {
        tol: cfg.or("tol", args.tol, d.tol)?,
        max_iter: cfg.or("max_iter", args.max_iter, d.max_iter)?,
        damping: cfg.or("damping", args.damping, d.damping)?,
        ..d
    };
    s.validate()?;
    Ok(s)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

struct CsvOut {
    path: PathBuf,
    wtr: csv::Writer<File>,
}

impl CsvOut {
    fn create(path: &Path, header: &str) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(file, "{header}").map_err(|e| Error::io(path, e))?;
        Ok(CsvOut {
            path: path.to_path_buf(),
            wtr: csv::Writer::from_writer(file),
        })
    }

    fn row<I, T>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.wtr.write_record(fields)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.wtr.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv_reader(path)?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

/// Reads `id -> value` pairs: the first column is the id, `column` (or the
/// second column when it is absent) the value.
fn read_keyed(path: &Path, column: &str) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let ix = headers.iter().position(|h| h == column).unwrap_or(1);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or("").to_string();
        let raw = rec.get(ix).unwrap_or("");
        let v = raw
            .parse::<f64>()
            .map_err(|_| Error::Schema(format!("{}: bad value `{raw}` for `{id}`", path.display())))?;
        out.push((id, v));
    }
    Ok(out)
}

/// Two columns per item, aligned with the given ids.
fn read_pairs(path: &Path, a: &str, b: &str) -> Result<Vec<(String, [f64; 2])>> {
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column `{name}`", path.display())))
    };
    let (ia, ib) = (find(a)?, find(b)?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or("").to_string();
        let parse = |ix: usize| {
            let raw = rec.get(ix).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| Error::Schema(format!("{}: bad value `{raw}` for `{id}`", path.display())))
        };
        out.push((id.clone(), [parse(ia)?, parse(ib)?]));
    }
    Ok(out)
}

fn load_input(cfg: &mut RunConfig, args: &TableArgs) -> Result<LinkedIOTable> {
    let input: String = cfg.require("input", args.input.clone())?;
    let schema = TableSchema::default();
    match cfg.value("input1", args.input1.clone())? {
        Some(second) => load_table_pair(&input, &second, &schema),
        None => load_table(&input, &schema),
    }
}

fn warn_unbalanced(table: &LinkedIOTable) {
    let rep = table.validate_balances(DEFAULT_BALANCE_TOL);
    if !rep.is_balanced() {
        warn!(
            "table has {} balance residuals above {DEFAULT_BALANCE_TOL:e}",
            rep.violations().count()
        );
    }
}

#[derive(Debug, Deserialize)]
struct OrderRow {
    rank: usize,
    sector_id: String,
    ratio: f64,
}

fn read_order(path: &Path, table: &LinkedIOTable) -> Result<CascadingOrder> {
    let mut rows: Vec<OrderRow> = read_rows(path)?;
    rows.sort_by_key(|r| r.rank);
    let n = table.len();
    let mut perm = Vec::with_capacity(n);
    let mut ratios = vec![f64::NAN; n];
    for r in &rows {
        let j = table
            .sector_index(&r.sector_id)
            .ok_or_else(|| Error::Schema(format!("{}: unknown sector `{}`", path.display(), r.sector_id)))?;
        perm.push(j);
        ratios[j] = r.ratio;
    }
    let mut seen = perm.clone();
    seen.sort_unstable();
    if seen != (0..n).collect::<Vec<_>>() {
        return Err(Error::Schema(format!("{}: not a permutation of the table's sectors", path.display())));
    }
    Ok(CascadingOrder::from_perm(perm, ratios))
}

fn order_for(cfg: &mut RunConfig, cli: Option<String>, table: &LinkedIOTable) -> Result<CascadingOrder> {
    match cfg.value("order", cli)? {
        Some(p) => read_order(Path::new(&p), table),
        None => Ok(cascading_order(&IncidenceMatrix::from_table(table, REFERENCE_PERIOD))),
    }
}

fn factor_id(f: Factor, sectors: &[String]) -> String {
    match f {
        Factor::Labor => "L".into(),
        Factor::Capital => "K".into(),
        Factor::Good(i) => sectors[i].clone(),
    }
}

#[derive(Debug, Deserialize)]
struct TechRow {
    sector_id: String,
    nest_index: usize,
    factor_id: String,
    alpha: f64,
    gamma: f64,
    active: bool,
}

fn write_tech(path: &Path, header: &str, sectors: &[String], techs: &[CcesTechnology]) -> Result<()> {
    let mut out = CsvOut::create(path, header)?;
    out.row(["sector_id", "nest_index", "factor_id", "alpha", "gamma", "active"])?;
    for (j, t) in techs.iter().enumerate() {
        for (k, nest) in t.nests().iter().enumerate() {
            out.row([
                sectors[j].clone(),
                k.to_string(),
                factor_id(nest.factor, sectors),
                fmt_f64(nest.alpha),
                fmt_f64(nest.gamma),
                nest.active.to_string(),
            ])?;
        }
    }
    out.finish()
}

/// Technologies and sector ids; goods are indexed by first appearance of
/// each `sector_id`.
fn read_tech(path: &Path) -> Result<(Vec<String>, Vec<CcesTechnology>)> {
    let rows: Vec<TechRow> = read_rows(path)?;
    let mut sectors: Vec<String> = Vec::new();
    for r in &rows {
        if !sectors.contains(&r.sector_id) {
            sectors.push(r.sector_id.clone());
        }
    }
    let mut nests: Vec<Vec<(usize, Nest)>> = vec![Vec::new(); sectors.len()];
    for r in &rows {
        let j = sectors.iter().position(|s| *s == r.sector_id).expect("collected");
        let factor = match r.factor_id.as_str() {
            "K" => Factor::Capital,
            "L" => Factor::Labor,
            id => Factor::Good(
                sectors
                    .iter()
                    .position(|s| s == id)
                    .ok_or_else(|| Error::Schema(format!("{}: unknown factor `{id}`", path.display())))?,
            ),
        };
        let nest = if r.active {
            Nest::new(factor, r.alpha, r.gamma)
        } else {
            Nest::inactive(factor)
        };
        nests[j].push((r.nest_index, nest));
    }
    let techs = nests
        .into_iter()
        .map(|mut v| {
            v.sort_by_key(|(k, _)| *k);
            CcesTechnology::new(v.into_iter().map(|(_, n)| n).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sectors, techs))
}

/// Economy from `--tech`, or estimated from the table. The table is loaded
/// whenever `--input` is resolvable.
fn economy_for(
    cfg: &mut RunConfig,
    args: &EconomyArgs,
    need_table: bool,
) -> Result<(Vec<String>, Economy, Option<LinkedIOTable>)> {
    let tech: Option<String> = cfg.value("tech", args.tech.clone())?;
    let has_input = args.table.input.is_some() || cfg.file.contains_key("input");
    let table = if need_table || tech.is_none() || has_input {
        let t = load_input(cfg, &args.table)?;
        warn_unbalanced(&t);
        Some(t)
    } else {
        None
    };
    match tech {
        Some(p) => {
            let (sectors, techs) = read_tech(Path::new(&p))?;
            if let Some(t) = &table {
                if t.sectors() != sectors.as_slice() {
                    return Err(Error::Schema("technology and table sectors differ".into()));
                }
            }
            Ok((sectors, Economy::cces(techs)?, table))
        }
        None => {
            let t = table.expect("table loaded");
            let order = order_for(cfg, args.order.clone(), &t)?;
            let econ = Economy::estimate(&t, order.as_slice())?;
            Ok((t.sectors().to_vec(), econ, Some(t)))
        }
    }
}

fn kind_of(cfg: &mut RunConfig, cli: Option<String>) -> Result<EconomyKind> {
    let s: String = cfg.or("kind", cli, "cces".to_string())?;
    s.parse()
}

fn sector_arg(sectors: &[String], id: &str) -> Result<usize> {
    sectors
        .iter()
        .position(|s| s == id)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown sector `{id}`")))
}

fn cmd_load(cfg: &mut RunConfig, seed: Option<u64>, a: LoadArgs) -> Result<()> {
    cfg.seed(seed)?;
    let table = load_input(cfg, &a.table)?;
    let report_path = PathBuf::from(cfg.or("report", a.report, "balances.csv".to_string())?);
    let tol = positive("balance tolerance", cfg.or("balance_tol", a.balance_tol, DEFAULT_BALANCE_TOL)?)?;
    let normalized: Option<String> = cfg.value("normalized", a.normalized)?;
    let header = cfg.header();
    let rep = table.validate_balances(tol);
    let mut out = CsvOut::create(&report_path, &header)?;
    out.row(["period", "kind", "id", "residual", "relative", "flagged"])?;
    for e in &rep.entries {
        out.row([
            table.period_labels()[e.period].clone(),
            e.kind.to_string(),
            e.id.clone(),
            fmt_f64(e.residual),
            fmt_f64(e.relative),
            e.flagged.to_string(),
        ])?;
    }
    out.finish()?;
    if let Some(p) = normalized {
        save_table(&table, &p, Some(&header))?;
    }
    info!("{} sectors, max relative residual {:e}", table.len(), rep.max_relative());
    if !rep.is_balanced() {
        return Err(Error::Unbalanced {
            violations: rep.violations().count(),
            max_relative: rep.max_relative(),
        });
    }
    Ok(())
}

fn write_order(path: &Path, header: &str, table: &LinkedIOTable, order: &CascadingOrder) -> Result<()> {
    let mut out = CsvOut::create(path, header)?;
    out.row(["rank", "sector_id", "ratio", "ranking_index"])?;
    for (k, &s) in order.perm.iter().enumerate() {
        out.row([
            (k + 1).to_string(),
            table.sectors()[s].clone(),
            fmt_f64(order.ratios[s]),
            fmt_f64(order.ranking[k]),
        ])?;
    }
    out.finish()
}

fn write_ccdf(path: &Path, header: &str, table: &LinkedIOTable, order: &CascadingOrder) -> Result<()> {
    let mut out = CsvOut::create(path, header)?;
    out.row(["series", "rank", "sector_id", "ratio", "ranking_index", "log_ratio", "log_ranking"])?;
    for p in empirical_ccdf(order) {
        let id = &table.sectors()[order.perm[p.rank - 1]];
        out.row([
            "observed".to_string(),
            p.rank.to_string(),
            id.clone(),
            fmt_f64(p.ratio),
            fmt_f64(p.ranking),
            fmt_f64(p.log_ratio()),
            fmt_f64(p.log_ranking()),
        ])?;
    }
    if order.len() >= 2 {
        for p in ccdf_curve(order.len()) {
            out.row([
                "triangular".to_string(),
                p.rank.to_string(),
                String::new(),
                fmt_f64(p.ratio),
                fmt_f64(p.ranking),
                fmt_f64(p.log_ratio()),
                fmt_f64(p.log_ranking()),
            ])?;
        }
    }
    out.finish()
}

fn cmd_order(cfg: &mut RunConfig, seed: Option<u64>, a: OrderArgs) -> Result<()> {
    cfg.seed(seed)?;
    let table = load_input(cfg, &a.table)?;
    let out = PathBuf::from(cfg.or("out", a.out, "order.csv".to_string())?);
    let ccdf: Option<String> = cfg.value("ccdf", a.ccdf)?;
    let t = cfg.or("period", a.period, REFERENCE_PERIOD)?;
    if t > 1 {
        return Err(Error::InvalidArgument(format!("period must be 0 or 1, got {t}")));
    }
    let header = cfg.header();
    let order = cascading_order(&IncidenceMatrix::from_table(&table, t));
    info!("{} triangularity violations", order.violations);
    write_order(&out, &header, &table, &order)?;
    if let Some(p) = ccdf {
        write_ccdf(Path::new(&p), &header, &table, &order)?;
    }
    Ok(())
}

fn cmd_estimate(cfg: &mut RunConfig, seed: Option<u64>, a: EstimateArgs) -> Result<()> {
    cfg.seed(seed)?;
    let table = load_input(cfg, &a.table)?;
    warn_unbalanced(&table);
    let order = order_for(cfg, a.order, &table)?;
    let out = PathBuf::from(cfg.or("out", a.out, "tech.csv".to_string())?);
    let header = cfg.header();
    let econ = Economy::estimate(&table, order.as_slice())?;
    write_tech(&out, &header, table.sectors(), econ.techs())
}

fn cmd_tfp(cfg: &mut RunConfig, seed: Option<u64>, a: TfpArgs) -> Result<()> {
    cfg.seed(seed)?;
    let table = load_input(cfg, &a.table)?;
    warn_unbalanced(&table);
    let method: String = cfg.or("method", a.method, "cces".to_string())?;
    let order = match method.as_str() {
        "cces" => Some(order_for(cfg, a.order, &table)?),
        "translog" => None,
        other => return Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
    };
    let out = PathBuf::from(cfg.or("out", a.out, "tfpg.csv".to_string())?);
    let header = cfg.header();
    let mut w = CsvOut::create(&out, &header)?;
    w.row(["sector_id", "tfpg"])?;
    for j in 0..table.len() {
        let data = TwoPeriodSectorData::from_table(&table, j);
        let v = match &order {
            Some(o) => tfpg_cces(&data, o.as_slice())?,
            None => tfpg_translog(&data)?,
        };
        w.row([table.sectors()[j].clone(), fmt_f64(v)])?;
    }
    w.finish()
}

fn cmd_solve(cfg: &mut RunConfig, seed: Option<u64>, a: SolveArgs) -> Result<()> {
    cfg.seed(seed)?;
    let (sectors, econ, _) = economy_for(cfg, &a.economy, false)?;
    let kind = kind_of(cfg, a.kind)?;
    let solver = solver_config(cfg, &a.solver)?;
    let r = positive("r", cfg.or("r", a.r, 1.0)?)?;
    let w = positive("w", cfg.or("w", a.w, 1.0)?)?;
    let tau_path: Option<String> = cfg.value("tau", a.tau)?;
    let outs = out_paths(cfg, a.out, "prices.csv,shares.csv", 2)?;
    let header = cfg.header();

    let mut tau = vec![1.0; sectors.len()];
    if let Some(p) = tau_path {
        let mut seen = vec![false; sectors.len()];
        for (id, v) in read_keyed(Path::new(&p), "tau")? {
            let j = sector_arg(&sectors, &id)?;
            tau[j] = v;
            seen[j] = true;
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::Schema(format!("{p}: no productivity for `{}`", sectors[j])));
        }
    }
    let econ = econ.with_kind(kind)?;
    let st = solve_equilibrium(&econ, &tau, r, w, &solver)?.into_converged()?;
    info!("converged in {} iterations, residual {:e}", st.iterations, st.residual);

    let mut out = CsvOut::create(&outs[0], &header)?;
    out.row(["sector_id", "price"])?;
    for (id, p) in sectors.iter().zip(&st.p) {
        out.row([id.clone(), fmt_f64(*p)])?;
    }
    out.finish()?;
    let mut out = CsvOut::create(&outs[1], &header)?;
    out.row(["row_id", "col_id", "share"])?;
    for j in 0..sectors.len() {
        for i in 0..sectors.len() {
            out.row([sectors[i].clone(), sectors[j].clone(), fmt_f64(st.shares.goods[(i, j)])])?;
        }
        out.row(["K".to_string(), sectors[j].clone(), fmt_f64(st.shares.capital[j])])?;
        out.row(["L".to_string(), sectors[j].clone(), fmt_f64(st.shares.labor[j])])?;
    }
    out.finish()
}

fn summary_row(name: &str, failed: usize, s: &Summary) -> Vec<String> {
    vec![
        name.to_string(),
        s.n.to_string(),
        failed.to_string(),
        fmt_f64(s.mean),
        fmt_f64(s.sd),
        fmt_f64(s.skewness),
        fmt_f64(s.excess_kurtosis),
        fmt_f64(qq_r_squared(&s.qq)),
    ]
}

fn cmd_simulate(cfg: &mut RunConfig, seed: Option<u64>, a: SimulateArgs) -> Result<()> {
    let seed = cfg.seed(seed)?;
    let (sectors, econ, _) = economy_for(cfg, &a.economy, false)?;
    let solver = solver_config(cfg, &a.solver)?;
    let kinds_s: String = cfg.or("kind", a.kind, "cces,cd,leontief,simple".to_string())?;
    let kinds = kinds_s
        .split(',')
        .map(|s| s.trim().parse::<EconomyKind>())
        .collect::<Result<Vec<_>>>()?;
    let sigma = positive("sigma", cfg.or("sigma", a.sigma, 0.10)?)?;
    let ell_s: String = cfg.or("ell", a.ell, "1h".to_string())?;
    let ell = parse_horizon(&ell_s)?;
    let draws = cfg.or("draws", a.draws, 300)?;
    let outs = out_paths(cfg, a.out, "series.csv,moments.csv,qq.csv", 3)?;
    let header = cfg.header();

    let shocks = draw_shocks(sectors.len(), draws, sigma, ell, seed)?;
    let mut series = Vec::with_capacity(kinds.len());
    for &k in &kinds {
        let s = simulate_aggregate(&econ.with_kind(k)?, &shocks, &solver)?;
        if !s.failed.is_empty() {
            warn!("{}: {} draws failed and are excluded", k.label(), s.failed.len());
        }
        series.push(s);
    }

    let mut out = CsvOut::create(&outs[0], &header)?;
    let mut head = vec!["draw".to_string()];
    head.extend(kinds.iter().map(|k| k.label().to_string()));
    out.row(&head)?;
    let lookups: Vec<Vec<Option<f64>>> = series
        .iter()
        .map(|s| {
            let mut v = vec![None; draws];
            for (&d, &x) in s.draws.iter().zip(&s.values) {
                v[d] = Some(x);
            }
            v
        })
        .collect();
    for d in 0..draws {
        let mut row = vec![d.to_string()];
        row.extend(lookups.iter().map(|l| l[d].map(fmt_f64).unwrap_or_default()));
        out.row(&row)?;
    }
    out.finish()?;

    let mut summaries: Vec<(String, usize, Summary)> = Vec::new();
    for s in &series {
        summaries.push((s.kind.clone(), s.failed.len(), summarize(s, None)?));
    }
    if let Some(cd) = series.iter().find(|s| s.kind == EconomyKind::CobbDouglas.label()) {
        for s in series.iter().filter(|s| s.kind != cd.kind) {
            let diff = s.difference(cd);
            summaries.push((diff.kind.clone(), diff.failed.len(), summarize(s, Some(cd))?));
        }
    }
    let mut out = CsvOut::create(&outs[1], &header)?;
    out.row(["series", "n", "failed", "mean", "sd", "skewness", "excess_kurtosis", "qq_r2"])?;
    for (name, failed, s) in &summaries {
        out.row(summary_row(name, *failed, s))?;
    }
    out.finish()?;
    let mut out = CsvOut::create(&outs[2], &header)?;
    out.row(["series", "theoretical", "sample"])?;
    for (name, _, s) in &summaries {
        for &(q, v) in &s.qq {
            out.row([name.clone(), fmt_f64(q), fmt_f64(v)])?;
        }
    }
    out.finish()
}

fn cmd_household(cfg: &mut RunConfig, seed: Option<u64>, a: HouseholdArgs) -> Result<()> {
    cfg.seed(seed)?;
    let shares: String = cfg.require("shares", a.shares)?;
    let prices: String = cfg.require("prices", a.prices)?;
    let instruments: String = cfg.require("instruments", a.instruments)?;
    let weighting: Weighting = cfg.or("weighting", a.weighting, "inverse_variance".to_string())?.parse()?;
    let out = PathBuf::from(cfg.or("out", a.out, "lambda.json".to_string())?);
    let header = cfg.header();

    let b = read_pairs(Path::new(&shares), "b0", "b1")?;
    let p: HashMap<String, [f64; 2]> = read_pairs(Path::new(&prices), "p0", "p1")?.into_iter().collect();
    let z: HashMap<String, f64> = read_keyed(Path::new(&instruments), "tfpg")?.into_iter().collect();
    let mut data = HouseholdData {
        b0: vec![],
        b1: vec![],
        p0: vec![],
        p1: vec![],
        instrument: vec![],
    };
    for (id, [b0, b1]) in &b {
        let [p0, p1] = *p
            .get(id)
            .ok_or_else(|| Error::Schema(format!("{prices}: no price for `{id}`")))?;
        let zi = *z
            .get(id)
            .ok_or_else(|| Error::Schema(format!("{instruments}: no instrument for `{id}`")))?;
        data.b0.push(*b0);
        data.b1.push(*b1);
        data.p0.push(p0);
        data.p1.push(p1);
        data.instrument.push(zi);
    }
    let est = estimate_lambda(&data, weighting)?;
    let dropped: Vec<&str> = est.dropped.iter().map(|&i| b[i].0.as_str()).collect();
    let value = serde_json::json!({
        "header": header,
        "items": b.len(),
        "dropped_items": dropped,
        "estimate": est,
    });
    write_json(&out, &value)
}

fn household_lambda(cfg: &mut RunConfig, a: &WelfareArgs) -> Result<f64> {
    if let Some(p) = cfg.value::<String>("household", a.household.clone())? {
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        return v["estimate"]["lambda"]
            .as_f64()
            .ok_or_else(|| Error::Schema(format!("{p}: no estimate.lambda")));
    }
    cfg.or("lambda", a.lambda, LAMBDA_HAT)
}

struct WelfareInputs {
    sectors: Vec<String>,
    econ: Economy,
    household: HouseholdModel,
    calibration: crate::dynge::CapitalCalibration,
    base: BaseAggregates,
    config: AltConfig,
}

fn welfare_inputs(
    cfg: &mut RunConfig,
    economy: &EconomyArgs,
    solver: &SolverArgs,
    welfare: &WelfareArgs,
    kind: Option<String>,
) -> Result<WelfareInputs> {
    let (sectors, econ, table) = economy_for(cfg, economy, true)?;
    let table = table.expect("table required");
    let econ = econ.with_kind(kind_of(cfg, kind)?)?;
    let solver = solver_config(cfg, solver)?;
    let lambda = household_lambda(cfg, welfare)?;
    let delta = cfg.or("delta", welfare.delta, crate::dynge::default_delta())?;
    let beta = cfg.or("beta", welfare.beta, crate::dynge::default_beta())?;
    let base = BaseAggregates::from_table(&table);
    let household = HouseholdModel::from_reference_shares(&base.h, lambda)?;
    let calibration = calibrate_capital(&table, &household, delta, beta)?;
    info!(
        "capital calibration: z0rho {:e}, z1rho {:e}, eta_K {:?}",
        calibration.z0rho, calibration.z1rho, calibration.eta_k
    );
    Ok(WelfareInputs {
        sectors,
        econ,
        household,
        calibration,
        base,
        config: AltConfig {
            solver,
            ..AltConfig::default()
        },
    })
}

fn cmd_srop(cfg: &mut RunConfig, seed: Option<u64>, a: SropArgs) -> Result<()> {
    cfg.seed(seed)?;
    let wi = welfare_inputs(cfg, &a.economy, &a.solver, &a.welfare, a.kind)?;
    let sector: String = cfg.or("sector", a.sector, "all".to_string())?;
    let theta = positive("theta", cfg.or("theta", a.theta, 1.0)?)?;
    let out = PathBuf::from(cfg.or("out", a.out, "srop.csv".to_string())?);
    let header = cfg.header();

    let targets: Vec<Target> = if sector.eq_ignore_ascii_case("all") {
        (0..wi.sectors.len()).map(Target::Sector).chain([Target::All]).collect()
    } else {
        vec![Target::Sector(sector_arg(&wi.sectors, &sector)?)]
    };
    let model = WelfareModel {
        economy: &wi.econ,
        household: &wi.household,
        calibration: &wi.calibration,
        base: &wi.base,
        config: wi.config,
    };
    let rows = model.srop_report(&targets, theta)?;
    let mut w = CsvOut::create(&out, &header)?;
    w.row(["sector_id", "theta", "benefit", "cost", "srop", "iterations"])?;
    for e in rows {
        let id = match e.target {
            Target::Sector(j) => wi.sectors[j].clone(),
            Target::All => "ALL".to_string(),
        };
        w.row([
            id,
            fmt_f64(e.theta),
            fmt_f64(e.benefit),
            fmt_f64(e.cost),
            fmt_f64(e.srop),
            e.iterations.to_string(),
        ])?;
    }
    w.finish()
}

fn cmd_synergy(cfg: &mut RunConfig, seed: Option<u64>, a: SynergyArgs) -> Result<()> {
    cfg.seed(seed)?;
    let (sectors, econ, table) = economy_for(cfg, &a.economy, true)?;
    let table = table.expect("table required");
    let econ = econ.with_kind(kind_of(cfg, a.kind)?)?;
    let solver = solver_config(cfg, &a.solver)?;
    let theta = positive("theta", cfg.or("theta", a.theta, 1.0)?)?;
    let out = PathBuf::from(cfg.or("out", a.out, "synergy.csv".to_string())?);
    let header = cfg.header();

    let y = &table.period(REFERENCE_PERIOD).y;
    let n = sectors.len();
    let triggers: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut t = vec![1.0; n];
            t[j] = 1.0 + theta / y[j];
            t
        })
        .collect();
    let s = synergy(&econ, &triggers, 1.0, 1.0, &solver)?;
    let mut w = CsvOut::create(&out, &header)?;
    w.row(["sector_id", "synergy"])?;
    for (id, v) in sectors.iter().zip(&s) {
        w.row([id.clone(), fmt_f64(*v)])?;
    }
    w.finish()
}

fn write_matrix(path: &Path, header: &str, labels: &[String], m: &nalgebra::DMatrix<f64>) -> Result<()> {
    let mut out = CsvOut::create(path, header)?;
    let mut head = vec!["factor_id".to_string()];
    head.extend(labels.iter().cloned());
    out.row(&head)?;
    for (a, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..labels.len()).map(|b| fmt_f64(m[(a, b)])));
        out.row(&row)?;
    }
    out.finish()
}

fn cmd_elasticity(cfg: &mut RunConfig, seed: Option<u64>, a: ElasticityArgs) -> Result<()> {
    cfg.seed(seed)?;
    let at: String = cfg.or("at", a.at, "reference".to_string())?;
    let need_table = match at.as_str() {
        "reference" => false,
        "base" => true,
        other => return Err(Error::InvalidArgument(format!("--at must be reference or base, got `{other}`"))),
    };
    let (sectors, econ, table) = economy_for(cfg, &a.economy, need_table)?;
    let sector: String = cfg.require("sector", a.sector)?;
    let j = sector_arg(&sectors, &sector)?;
    let outs = out_paths(cfg, a.out, "aues.csv,mes.csv", 2)?;
    let header = cfg.header();

    let (goods, r, w) = match &table {
        Some(t) if need_table => {
            let acc = t.period(0);
            (acc.p.clone(), acc.r, acc.w)
        }
        _ => (vec![1.0; sectors.len()], 1.0, 1.0),
    };
    let tabs = elasticity_tables(&econ.techs()[j], &Prices::new(&goods, r, w))?;
    let labels: Vec<String> = tabs.factors.iter().map(|&f| factor_id(f, &sectors)).collect();
    write_matrix(&outs[0], &header, &labels, &tabs.aues)?;
    write_matrix(&outs[1], &header, &labels, &tabs.mes)
}

fn cmd_pipeline(cfg: &mut RunConfig, seed: Option<u64>, a: PipelineArgs) -> Result<()> {
    let seed = cfg.seed(seed)?;
    let table = load_input(cfg, &a.table)?;
    let tol = positive("balance tolerance", cfg.or("balance_tol", a.balance_tol, DEFAULT_BALANCE_TOL)?)?;
    let solver = solver_config(cfg, &a.solver)?;
    let dir = PathBuf::from(cfg.or("out_dir", a.out_dir, ".".to_string())?);
    let header = cfg.header();

    let rep = table.validate_balances(tol);
    if !rep.is_balanced() {
        return Err(Error::Unbalanced {
            violations: rep.violations().count(),
            max_relative: rep.max_relative(),
        });
    }
    let order = cascading_order(&IncidenceMatrix::from_table(&table, REFERENCE_PERIOD));
    write_order(&dir.join("order.csv"), &header, &table, &order)?;
    write_ccdf(&dir.join("ccdf.csv"), &header, &table, &order)?;
    let econ = Economy::estimate(&table, order.as_slice())?;
    write_tech(&dir.join("tech.csv"), &header, table.sectors(), econ.techs())?;

    let mut tfp = CsvOut::create(&dir.join("tfpg.csv"), &header)?;
    tfp.row(["sector_id", "tfpg"])?;
    for j in 0..table.len() {
        let v = tfpg_cces(&TwoPeriodSectorData::from_table(&table, j), order.as_slice())?;
        tfp.row([table.sectors()[j].clone(), fmt_f64(v)])?;
    }
    tfp.finish()?;

    let tauhat = crate::equilibrium::restoring_productivity(&econ, &table)?;
    let restoration = verify_restoring(&econ, &table, &tauhat, &solver)?;
    let mut out = CsvOut::create(&dir.join("restoration.csv"), &header)?;
    out.row(["period", "price_gap", "share_gap", "converged", "iterations", "residual"])?;
    for (t, g) in restoration.periods.iter().enumerate() {
        out.row([
            table.period_labels()[t].clone(),
            fmt_f64(g.price_gap),
            fmt_f64(g.share_gap),
            g.converged.to_string(),
            g.iterations.to_string(),
            fmt_f64(g.residual),
        ])?;
    }
    out.finish()?;

    let summary = serde_json::json!({
        "header": header,
        "seed": seed,
        "sectors": table.len(),
        "max_balance_residual": rep.max_relative(),
        "triangularity_violations": order.violations,
        "max_price_gap": restoration.max_price_gap(),
        "max_share_gap": restoration.max_share_gap(),
        "converged": restoration.converged(),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    println!("{}", serde_json::to_string(&summary)?);
    if !restoration.converged() {
        let worst = restoration
            .periods
            .iter()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("two periods");
        return Err(Error::NonConvergence {
            iterations: worst.iterations,
            residual: worst.residual,
        });
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref().map(Path::new);
    let seed = cli.seed;
    macro_rules! go {
        ($name:literal, $f:ident, $a:expr) => {{
            let mut cfg = RunConfig::new($name, config)?;
            $f(&mut cfg, seed, $a)
        }};
    }
    match cli.command {
        Command::Load(a) => go!("load", cmd_load, a),
        Command::Order(a) => go!("order", cmd_order, a),
        Command::Estimate(a) => go!("estimate", cmd_estimate, a),
        Command::Tfp(a) => go!("tfp", cmd_tfp, a),
        Command::Solve(a) => go!("solve", cmd_solve, a),
        Command::Simulate(a) => go!("simulate", cmd_simulate, a),
        Command::Household(a) => go!("household", cmd_household, a),
        Command::Srop(a) => go!("srop", cmd_srop, a),
        Command::Synergy(a) => go!("synergy", cmd_synergy, a),
        Command::Elasticity(a) => go!("elasticity", cmd_elasticity, a),
        Command::Pipeline(a) => go!("pipeline", cmd_pipeline, a),
    }
}

fn error_json(kind: &str, message: &str, code: i32) -> String {
    serde_json::json!({ "error": kind, "message": message, "exit_code": code }).to_string()
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match thread_cap()? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| execute(cli))
        }
        None => execute(cli),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status: 0 on success, 1 on validation failure, 2 on non-convergence.
/// Errors are reported on stderr as one JSON object.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{}", e.render());
            eprintln!("{}", error_json("usage", &e.kind().to_string(), 1));
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", error_json(e.kind(), &e.to_string(), code));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_is_overridden_by_cli() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "# comment\nsigma = 0.2\nmax-iter=50\n\n").unwrap();
        let mut cfg = RunConfig::new("simulate", Some(&p)).unwrap();
        assert_eq!(cfg.or("sigma", None, 0.1).unwrap(), 0.2);
        assert_eq!(cfg.or("sigma", Some(0.3), 0.1).unwrap(), 0.3);
        assert_eq!(cfg.or("max_iter", None, 10usize).unwrap(), 50);
        assert_eq!(cfg.or("draws", None, 7usize).unwrap(), 7);
        assert!(cfg.require::<String>("input", None).is_err());
    }

    #[test]
    fn bad_config_line_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.cfg");
        std::fs::write(&p, "sigma 0.2\n").unwrap();
        assert!(matches!(RunConfig::new("x", Some(&p)), Err(Error::Schema(_))));
        std::fs::write(&p, "sigma = abc\n").unwrap();
        let mut cfg = RunConfig::new("x", Some(&p)).unwrap();
        assert!(cfg.or("sigma", None, 0.1).is_err());
    }

    #[test]
    fn hash_tracks_used_settings() {
        let mut a = RunConfig::new("simulate", None).unwrap();
        let mut b = RunConfig::new("simulate", None).unwrap();
        a.seed(Some(1)).unwrap();
        b.seed(Some(1)).unwrap();
        assert_eq!(a.hash(), b.hash());
        b.or("sigma", Some(0.2), 0.1).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert!(a.header().starts_with("# cascade-ge "));
        assert!(a.header().ends_with("seed=1"));
    }

    #[test]
    fn out_list_must_match_arity() {
        let mut cfg = RunConfig::new("solve", None).unwrap();
        assert!(out_paths(&mut cfg, Some("a.csv".into()), "x,y", 2).is_err());
        let v = out_paths(&mut cfg, Some("a.csv, b.csv".into()), "x,y", 2).unwrap();
        assert_eq!(v[1], PathBuf::from("b.csv"));
    }

    #[test]
    fn unknown_subcommand_exits_one() {
        assert_eq!(run(["cascade-ge", "frobnicate"]), 1);
        assert_eq!(run(["cascade-ge", "load"]), 1);
    }
}
