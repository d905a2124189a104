use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use symmheat::acceptance::{Acceptance, Fault, CRITERIA};
use symmheat::scenario::{
    parallel_map, run_scenario, run_sweep, write_config_echo, write_run, write_summary,
    write_sweep, CriterionSummary, Scenario, ScenarioSummary, Status, SuiteConfig, Summary,
};
use symmheat::source::preset_catalog;
use symmheat::Error;

/// Numerical verification of the parabolic concentration comparison under
/// Schwarz symmetrization.
#[derive(Debug, Parser)]
#[command(name = "symmheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory [default: $SYMMHEAT_OUT, else ./symmheat-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scenarios run concurrently; 1 is the determinism reference
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Print only the final verdict
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every scenario of a config file
    Run { config: PathBuf },
    /// Run the refinement study of every scenario flagged `refinement_sweep`
    Sweep { config: PathBuf },
    /// Run the built-in acceptance suite
    Selftest {
        /// Run only these criteria (1-8)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Inject a fault to check that the suite catches it
        #[arg(long, value_enum)]
        inject: Option<InjectedFault>,
    },
    /// Print the data presets and domain kinds with example JSON
    ListPresets,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InjectedFault {
    /// Corrupt a bundled config before parsing it
    CorruptedConfig,
    /// Perturb the direct symmetrized solve
    PerturbedRoute,
}

struct Printer {
    quiet: bool,
}

impl Printer {
    fn line(&self, s: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", s.as_ref());
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    resolve_out(cli.out.clone())
}

fn resolve_out(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SYMMHEAT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("symmheat-out"))
}

fn load(path: &Path) -> Result<SuiteConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        field: String::new(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    SuiteConfig::parse(&text)
}

/// Writes the summary, reports it and converts the status to an exit code.
fn finish(out: &Path, summary: &Summary, printer: &Printer) -> ExitCode {
    if let Err(e) = write_summary(out, summary) {
        eprintln!("error: cannot write summary to {}: {e}", out.display());
        return ExitCode::from(1);
    }
    if let Some(e) = &summary.error {
        eprintln!("error: {e}");
    }
    let verdict = match summary.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::ConfigError => "CONFIG ERROR",
    };
    println!("{}: {verdict}", summary.command);
    printer.line(format!("summary: {}", out.join("summary.json").display()));
    ExitCode::from(summary.status.exit_code() as u8)
}

fn describe(s: &ScenarioSummary) -> String {
    if let Some(e) = &s.error {
        return format!("FAIL {}: {e}", s.name);
    }
    let gap = s.max_gap.expect("runs record their gap");
    let max_v = s.max_v.unwrap_or(0.0);
    let mut line = format!(
        "{} {}: max(U-V) = {:+.3e} (relative {:+.3e}) at a = {:.6}, t = {}",
        if s.status == Status::Pass { "PASS" } else { "FAIL" },
        s.name,
        gap.gap,
        if max_v > 0.0 { gap.gap / max_v } else { 0.0 },
        gap.a,
        gap.t
    );
    for c in s.checks.iter().filter(|c| !c.passed) {
        line.push_str(&format!("\n    {} = {:e} exceeds {:e}", c.name, c.value, c.limit));
    }
    line
}

fn prepare_all(suite: &SuiteConfig) -> Result<Vec<Scenario>, Error> {
    suite
        .scenarios
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Scenario::prepare(c).map_err(|e| {
                if suite.scenarios.len() > 1 {
                    e.in_field(&format!("scenarios[{i}]"))
                } else {
                    e
                }
            })
        })
        .collect()
}

fn cmd_run(cli: &Cli, config: &Path, printer: &Printer) -> ExitCode {
    let out = out_dir(cli);
    let prepared = load(config).and_then(|suite| {
        write_config_echo(&out, &suite)?;
        prepare_all(&suite)
    });
    let scenarios = match prepared {
        Ok(s) => s,
        Err(e) => return finish(&out, &Summary::failed_with("run", &e), printer),
    };
    let runs = parallel_map(&scenarios, cli.threads, |s| {
        let run = run_scenario(s)?;
        write_run(&out, &run)?;
        Ok::<_, Error>(run)
    });
    let mut summary = Summary::new("run");
    for (s, run) in scenarios.iter().zip(runs) {
        let entry = match run {
            Ok(run) => ScenarioSummary::from_run(&run),
            Err(e) => ScenarioSummary::from_error(s.name(), &e),
        };
        printer.line(describe(&entry));
        summary.push_scenario(entry);
    }
    finish(&out, &summary, printer)
}

fn cmd_sweep(cli: &Cli, config: &Path, printer: &Printer) -> ExitCode {
    let out = out_dir(cli);
    let flagged = load(config).and_then(|suite| {
        write_config_echo(&out, &suite)?;
        let flagged: Vec<_> = suite.scenarios.into_iter().filter(|s| s.refinement_sweep).collect();
        if flagged.is_empty() {
            return Err(Error::Config {
                field: "refinement_sweep".into(),
                message: "no scenario is flagged for a refinement sweep".into(),
            });
        }
        Ok(flagged)
    });
    let flagged = match flagged {
        Ok(f) => f,
        Err(e) => return finish(&out, &Summary::failed_with("sweep", &e), printer),
    };
    let results = parallel_map(&flagged, cli.threads, |c| {
        let sweep = run_sweep(c)?;
        write_sweep(&out, &sweep)?;
        Ok::<_, Error>(sweep)
    });
    let mut summary = Summary::new("sweep");
    for (c, result) in flagged.iter().zip(results) {
        match result {
            Ok(sweep) => {
                printer.line(format!(
                    "{} {}",
                    if sweep.passed { "PASS" } else { "FAIL" },
                    sweep.name
                ));
                for l in &sweep.levels {
                    let eq = l.equality_gap.map(|g| format!(", equality gap {g:.3e}")).unwrap_or_default();
                    printer.line(format!(
                        "    level {}: h = {:.4e}, dt = {:.3e}, max(U-V)+ = {:.3e}{eq}",
                        l.level, l.h, l.dt, l.max_gap_pos
                    ));
                }
                if let Some(why) = &sweep.failure {
                    printer.line(format!("    {why}"));
                }
                summary.push_sweep(sweep);
            }
            Err(e) => {
                let entry = ScenarioSummary::from_error(&c.name, &e);
                printer.line(describe(&entry));
                summary.push_scenario(entry);
            }
        }
    }
    finish(&out, &summary, printer)
}

fn cmd_selftest(
    cli: &Cli,
    only: &[u8],
    inject: Option<InjectedFault>,
    printer: &Printer,
) -> ExitCode {
    let out = out_dir(cli);
    let fault = inject.map(|f| match f {
        InjectedFault::CorruptedConfig => Fault::CorruptedConfig,
        InjectedFault::PerturbedRoute => Fault::PerturbedRoute,
    });
    let ids: Vec<u8> = if only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        only.to_vec()
    };
    let mut summary = Summary::new("selftest");
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        let e = Error::Config {
            field: "only".into(),
            message: format!("no criterion {bad}; criteria are 1-8"),
        };
        return finish(&out, &Summary::failed_with("selftest", &e), printer);
    }
    let suite = Acceptance::new().with_threads(cli.threads).with_fault(fault);
    for id in ids {
        match suite.run(id) {
            Ok(outcome) => {
                println!("{}", outcome.line());
                summary.push_criterion(CriterionSummary {
                    id: outcome.id,
                    title: outcome.title.to_string(),
                    passed: outcome.passed,
                    details: outcome.details,
                    seconds: outcome.seconds,
                });
            }
            Err(e) => {
                summary.status = summary.status.combine(Status::of_error(&e));
                summary.error = Some(format!("criterion {id}: {e}"));
                break;
            }
        }
    }
    finish(&out, &summary, printer)
}

/// `--out` as written on a command line that clap rejected.
fn raw_out_flag() -> Option<PathBuf> {
    let args: Vec<String> = std::env::args().collect();
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--out" {
            args.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--out=").map(PathBuf::from)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let out = resolve_out(raw_out_flag());
            let error = Error::Config {
                field: "command line".into(),
                message: e.kind().to_string(),
            };
            return finish(&out, &Summary::failed_with("symmheat", &error), &Printer { quiet: true });
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let printer = Printer { quiet: cli.quiet };
    match &cli.command {
        Command::Run { config } => cmd_run(&cli, config, &printer),
        Command::Sweep { config } => cmd_sweep(&cli, config, &printer),
        Command::Selftest { only, inject } => cmd_selftest(&cli, only, *inject, &printer),
        Command::ListPresets => {
            println!("{}", preset_catalog());
            ExitCode::SUCCESS
        }
    }
}
