use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gaitplan::sim::scenarios::{planner_scenario, run_planner_scenario};
use gaitplan::sim::{builtin, parse_schedule, run, verify::verify, RunConfig};
use gaitplan::trajectory::DEFAULT_DT;
use gaitplan::{GaitConfig, Integration, PeakGain, RobotGeometry, SimError};

#[derive(Parser, Debug)]
#[command(name = "gaitplan", version, about = "Minimum-jerk walking pattern generator")]
struct Cli {
    /// Control period in seconds.
    #[arg(long, global = true, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Thigh length in meters.
    #[arg(long, global = true, default_value_t = 0.4)]
    lt: f64,
    /// Shin length in meters.
    #[arg(long, global = true, default_value_t = 0.4)]
    ls: f64,
    /// CSV output path; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write joint angles in degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// How y-channel gains are chosen from a commanded peak.
    #[arg(long, global = true, value_enum, default_value_t = GainArg::Exact)]
    peak_gain: GainArg,
    #[arg(long, global = true, value_enum, default_value_t = IntegrationArg::Exact)]
    integration: IntegrationArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a schedule file.
    Run { schedule: PathBuf },
    /// Built-in experiment: 60 cm steps, 10 cm clearance.
    Exp1,
    /// Built-in experiment with mid-walk parameter changes.
    Exp2,
    /// x-planner with fixed boundary.
    Fig10,
    /// x-planner with boundary and horizon changes.
    Fig11,
    /// y-planner with fixed peak.
    Fig12,
    /// y-planner with peak, endpoint and horizon changes.
    Fig13,
    /// Cross-check the planners against independent oracles.
    Verify,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GainArg {
    /// Closed-form gain from the commanded peak.
    Approximate,
    /// Gain solved so the planned trajectory peaks exactly.
    Exact,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum IntegrationArg {
    /// Follow the re-planned trajectory exactly over each step.
    Exact,
    /// Hold the jerk constant over each step.
    Zoh,
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, SimError> {
    if !(cli.dt > 0.0 && cli.dt.is_finite()) {
        return Err(SimError::Feasibility(format!("--dt must be positive, got {}", cli.dt)));
    }
    let geometry = RobotGeometry::new(cli.lt, cli.ls).map_err(|e| SimError::Feasibility(e.to_string()))?;
    let integration = match cli.integration {
        IntegrationArg::Exact => Integration::ExactFlow,
        IntegrationArg::Zoh => Integration::ZeroOrderHold,
    };
    let peak_gain = match cli.peak_gain {
        GainArg::Approximate => PeakGain::Approximate,
        GainArg::Exact => PeakGain::Exact,
    };

    let schedule = match &cli.command {
        Command::Run { schedule } => Some(parse_schedule(&std::fs::read_to_string(schedule)?)?),
        Command::Exp1 => builtin("exp1"),
        Command::Exp2 => builtin("exp2"),
        _ => None,
    };
    if let Some(schedule) = schedule {
        let config = RunConfig {
            gait: GaitConfig {
                geometry,
                dt: cli.dt,
                peak_gain,
                integration,
                ..GaitConfig::default()
            },
            degrees: cli.degrees,
        };
        let report = run(&schedule, &config, output(&cli.out)?)?;
        eprint!("{}", report.summary());
        return Ok(report.passed());
    }

    let name = match cli.command {
        Command::Fig10 => "fig10",
        Command::Fig11 => "fig11",
        Command::Fig12 => "fig12",
        Command::Fig13 => "fig13",
        Command::Verify => {
            let checks = verify(cli.dt, integration, &geometry)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            return Ok(ok);
        }
        _ => unreachable!("handled above"),
    };
    let sc = planner_scenario(name).ok_or_else(|| SimError::UnknownScenario(name.into()))?;
    let report = run_planner_scenario(&sc, cli.dt, integration, peak_gain, output(&cli.out)?)?;
    eprint!("{}", report.summary());
    Ok(report.passed())
}
