//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 2 input error, 3 gate rejection,
//! 4 evaluated but failed. Reports go to stdout and to files in the output
//! directory; nothing written embeds a timestamp.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::commissioning::{
    self, read_cycle_log, read_sat_thresholds, read_telemetry, SatThresholds,
};
use crate::connection::{
    compare_categories, fee_table_csv, fee_table_markdown, read_tariff, ConnectionCategory,
    VoltageMap, DEFAULT_OVERSIZE_FACTOR,
};
use crate::dispatch::{read_price_series, simulate_horizon, StrategyConfig};
use crate::model::{BatterySpec, ExchangeRate};
use crate::quality::{self, read_limits, read_measurements};
use crate::site::{read_scorecards, scoring_report};
use crate::workflow::{
    estimate_schedule, load_project, save_project, update_project, Deliverable, DeliverableKind,
    EpcProject, WorkflowError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GATE: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Gate(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Gate(_) => EXIT_GATE,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "bess-epc",
    version,
    about = "Planning toolkit for battery storage projects"
)]
struct Cli {
    /// Directory for report files; created if absent.
    #[arg(long, global = true, env = "BESS_EPC_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Exchange rate used wherever DKK and EUR meet.
    #[arg(long, global = true, env = "BESS_EPC_DKK_PER_EUR", default_value_t = ExchangeRate::DEFAULT_DKK_PER_EUR)]
    dkk_per_eur: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank candidate sites from a scorecard file.
    Score { scorecards: PathBuf },
    /// Compare connection fees across tariff categories.
    Fees {
        /// Rated battery power, MW.
        #[arg(long)]
        power: f64,
        #[arg(long)]
        tariff: PathBuf,
        #[arg(long, default_value_t = DEFAULT_OVERSIZE_FACTOR)]
        oversize: f64,
        /// Override a category's line voltage, e.g. `B-low=0.4`.
        #[arg(long = "voltage", value_name = "CATEGORY=KV")]
        voltages: Vec<String>,
    },
    /// Simulate revenue stacking over a price series.
    Simulate {
        #[arg(long)]
        prices: PathBuf,
        #[command(flatten)]
        battery: BatteryArgs,
        /// Interval length in hours.
        #[arg(long, default_value_t = 1.0)]
        interval_hours: f64,
        #[arg(long, default_value_t = StrategyConfig::default().step_mw)]
        step_mw: f64,
        #[arg(long, default_value_t = StrategyConfig::default().backing_hours)]
        backing_hours: f64,
        #[arg(long, default_value_t = StrategyConfig::default().activation_fraction)]
        activation_fraction: f64,
        #[arg(long, default_value_t = StrategyConfig::default().initial_soc_fraction)]
        initial_soc: f64,
    },
    /// Create and advance a project through its phase gates.
    #[command(subcommand)]
    Project(ProjectCommand),
    /// Evaluate site acceptance evidence.
    Sat {
        #[arg(long)]
        cycles: PathBuf,
        #[arg(long)]
        telemetry: PathBuf,
        #[command(flatten)]
        battery: BatteryArgs,
        /// TOML file overriding the default thresholds.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Build the power-quality compliance dossier.
    Pq {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        limits: PathBuf,
    },
}

#[derive(Debug, Args)]
struct BatteryArgs {
    #[arg(long, default_value_t = 1.0)]
    power_mw: f64,
    #[arg(long, default_value_t = 1.0)]
    capacity_mwh: f64,
    #[arg(long, default_value_t = 0.9)]
    rte: f64,
}

impl BatteryArgs {
    fn spec(&self) -> Result<BatterySpec, CliError> {
        BatterySpec::new(self.power_mw, self.capacity_mwh, self.rte).map_err(input)
    }
}

#[derive(Debug, Subcommand)]
enum ProjectCommand {
    /// Start a project file at Feasibility.
    Init {
        project: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Record evidence for a deliverable; a later record of the same kind replaces it.
    Record {
        project: PathBuf,
        #[arg(long)]
        kind: DeliverableKind,
        /// Evidence date, YYYY-MM-DD.
        #[arg(long)]
        date: NaiveDate,
        #[arg(long, default_value = "")]
        reference: String,
    },
    /// Move to the next phase if its gate is satisfied.
    Advance {
        project: PathBuf,
    },
    Status {
        project: PathBuf,
    },
    /// Estimate the phase timeline in months.
    Schedule {
        project: PathBuf,
    },
}

/// Paths and settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub fx: ExchangeRate,
}

impl RunConfig {
    pub fn new(out_dir: PathBuf, dkk_per_eur: f64) -> Result<Self, CliError> {
        let fx = ExchangeRate::new(dkk_per_eur).map_err(input)?;
        Ok(Self { out_dir, fx })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| input(format!("cannot create {}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(input(format!("input file not found: {}", path.display())))
    }
}

/// Runs the tool on full argv (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let cfg = RunConfig::new(cli.out_dir, cli.dkk_per_eur)?;
    match cli.command {
        Command::Score { scorecards } => cmd_score(&cfg, &scorecards),
        Command::Fees {
            power,
            tariff,
            oversize,
            voltages,
        } => cmd_fees(&cfg, power, &tariff, oversize, &voltages),
        Command::Simulate {
            prices,
            battery,
            interval_hours,
            step_mw,
            backing_hours,
            activation_fraction,
            initial_soc,
        } => {
            let strategy = StrategyConfig {
                step_mw,
                backing_hours,
                activation_fraction,
                initial_soc_fraction: initial_soc,
            };
            cmd_simulate(&cfg, &prices, &battery.spec()?, interval_hours, &strategy)
        }
        Command::Project(sub) => cmd_project(&cfg, sub),
        Command::Sat {
            cycles,
            telemetry,
            battery,
            thresholds,
        } => cmd_sat(
            &cfg,
            &cycles,
            &telemetry,
            &battery.spec()?,
            thresholds.as_deref(),
        ),
        Command::Pq {
            measurements,
            limits,
        } => cmd_pq(&cfg, &measurements, &limits),
    }
}

fn cmd_score(cfg: &RunConfig, path: &Path) -> Result<i32, CliError> {
    require_file(path)?;
    let cards = read_scorecards(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let report = scoring_report(cards).map_err(input)?;
    let md = report.to_markdown();
    cfg.write("site_ranking.md", &md)?;
    cfg.write("site_ranking.csv", &report.to_csv())?;
    print!("{md}");
    Ok(EXIT_OK)
}

fn parse_voltage(spec: &str) -> Result<(ConnectionCategory, f64), CliError> {
    let (cat, kv) = spec
        .split_once('=')
        .ok_or_else(|| input(format!("--voltage expects CATEGORY=KV, got `{spec}`")))?;
    let category: ConnectionCategory = cat.parse().map_err(input)?;
    let kv: f64 = kv
        .trim()
        .parse()
        .map_err(|_| input(format!("--voltage: `{kv}` is not a number")))?;
    Ok((category, kv))
}

fn cmd_fees(
    cfg: &RunConfig,
    power: f64,
    tariff: &Path,
    oversize: f64,
    voltages: &[String],
) -> Result<i32, CliError> {
    require_file(tariff)?;
    let schedule = read_tariff(tariff).map_err(input)?;
    let mut map = VoltageMap::default();
    for v in voltages {
        let (category, kv) = parse_voltage(v)?;
        map = map.with(category, kv);
    }
    let rows = compare_categories(power, oversize, &schedule, &map).map_err(input)?;
    let md = fee_table_markdown(power, &rows, &schedule, cfg.fx).map_err(input)?;
    cfg.write("connection_fees.md", &md)?;
    cfg.write(
        "connection_fees.csv",
        &fee_table_csv(&rows, cfg.fx).map_err(input)?,
    )?;
    print!("{md}");
    Ok(EXIT_OK)
}

fn cmd_simulate(
    cfg: &RunConfig,
    prices: &Path,
    battery: &BatterySpec,
    interval_hours: f64,
    strategy: &StrategyConfig,
) -> Result<i32, CliError> {
    require_file(prices)?;
    let series = read_price_series(prices, interval_hours)
        .map_err(|e| input(format!("{}: {e}", prices.display())))?;
    let sim = simulate_horizon(battery, &series, strategy).map_err(input)?;
    let md = sim.report.to_markdown(battery, cfg.fx).map_err(input)?;
    let mut breakdown = String::from("stream,eur\n");
    for (name, m) in sim.report.services() {
        breakdown.push_str(&format!("{name},{:.2}\n", m.as_major_f64()));
    }
    breakdown.push_str(&format!("Export,{:.2}\n", sim.report.export.as_major_f64()));
    breakdown.push_str(&format!(
        "Import,{:.2}\n",
        -sim.report.import_cost.as_major_f64()
    ));
    breakdown.push_str(&format!("Net,{:.2}\n", sim.report.net.as_major_f64()));
    cfg.write("revenue_report.md", &md)?;
    cfg.write("revenue_breakdown.csv", &breakdown)?;
    cfg.write("dispatch_log.csv", &sim.dispatch_log_csv())?;
    print!("{md}");
    Ok(EXIT_OK)
}

fn workflow_error(e: WorkflowError) -> CliError {
    match e {
        WorkflowError::GateRejected { .. } => CliError::Gate(e.to_string()),
        other => input(other),
    }
}

fn cmd_project(cfg: &RunConfig, sub: ProjectCommand) -> Result<i32, CliError> {
    match sub {
        ProjectCommand::Init { project, name } => {
            if project.exists() {
                return Err(input(format!("{} already exists", project.display())));
            }
            let p = EpcProject::new(&name).map_err(input)?;
            save_project(&project, &p).map_err(input)?;
            print!("{}", p.status_text());
        }
        ProjectCommand::Record {
            project,
            kind,
            date,
            reference,
        } => {
            require_file(&project)?;
            let changed = update_project(&project, |p| {
                Ok(p.record_deliverable(Deliverable {
                    kind,
                    date,
                    reference,
                }))
            })
            .map_err(workflow_error)?;
            println!("{kind}: {}", if changed { "recorded" } else { "unchanged" });
        }
        ProjectCommand::Advance { project } => {
            require_file(&project)?;
            let phase = update_project(&project, |p| p.advance_phase()).map_err(workflow_error)?;
            println!("advanced to {phase}");
        }
        ProjectCommand::Status { project } => {
            require_file(&project)?;
            print!("{}", load_project(&project).map_err(input)?.status_text());
        }
        ProjectCommand::Schedule { project } => {
            require_file(&project)?;
            let p = load_project(&project).map_err(input)?;
            let timeline = estimate_schedule(p.schedule()).map_err(input)?;
            let csv = timeline.to_csv();
            cfg.write("schedule.csv", &csv)?;
            for span in &timeline.spans {
                println!(
                    "{:<14} {:>6} -> {:>6}  ({} months)",
                    span.phase.to_string(),
                    span.start_offset,
                    span.end_offset,
                    span.months()
                );
            }
            println!("total: {} months", timeline.total_months);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sat(
    cfg: &RunConfig,
    cycles: &Path,
    telemetry: &Path,
    battery: &BatterySpec,
    thresholds: Option<&Path>,
) -> Result<i32, CliError> {
    require_file(cycles)?;
    require_file(telemetry)?;
    let thresholds = match thresholds {
        Some(path) => {
            require_file(path)?;
            read_sat_thresholds(path).map_err(|e| input(format!("{}: {e}", path.display())))?
        }
        None => SatThresholds::default(),
    };
    let log =
        read_cycle_log(cycles, battery).map_err(|e| input(format!("{}: {e}", cycles.display())))?;
    let snapshot =
        read_telemetry(telemetry).map_err(|e| input(format!("{}: {e}", telemetry.display())))?;
    let report =
        commissioning::evaluate_sat(&log, &snapshot, battery, &thresholds).map_err(input)?;
    let md = report.to_markdown();
    cfg.write("sat_report.md", &md)?;
    cfg.write("sat_report.json", &report.to_json())?;
    print!("{md}");
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_pq(cfg: &RunConfig, measurements: &Path, limits: &Path) -> Result<i32, CliError> {
    require_file(measurements)?;
    require_file(limits)?;
    let limits = read_limits(limits).map_err(input)?;
    let verdicts = read_measurements(measurements)
        .map_err(input)?
        .iter()
        .map(|m| quality::check(m, &limits))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?;
    let dossier = quality::dossier(verdicts).map_err(input)?;
    let md = dossier.to_markdown(&limits);
    cfg.write("pq_dossier.md", &md)?;
    print!("{md}");
    Ok(if dossier.pass { EXIT_OK } else { EXIT_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_voltage_override() {
        assert_eq!(
            parse_voltage("B-low=0.69").unwrap(),
            (ConnectionCategory::BLow, 0.69)
        );
        assert!(parse_voltage("B-low").is_err());
        assert!(parse_voltage("D=1").is_err());
    }

    #[test]
    fn bad_arguments_exit_2() {
        assert_eq!(run(["bess-epc", "fees"]), EXIT_INPUT);
        assert_eq!(run(["bess-epc", "nonsense"]), EXIT_INPUT);
        assert_eq!(run(["bess-epc", "--help"]), EXIT_OK);
    }

    #[test]
    fn rejects_bad_rate() {
        assert!(RunConfig::new(PathBuf::from("."), -1.0).is_err());
    }
}
