use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::comparison::{ComparisonReport, GapPoint, Verdict};
use crate::error::{Error, Result};
use crate::scenario::config::SuiteConfig;
use crate::scenario::run::{Check, ScenarioRun};
use crate::scenario::sweep::SweepResult;

/// Overall outcome, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    ConfigError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::ConfigError => 2,
        }
    }

    pub fn of_error(e: &Error) -> Self {
        if e.is_configuration() {
            Status::ConfigError
        } else {
            Status::Fail
        }
    }

    /// The worse of two outcomes.
    pub fn combine(self, other: Status) -> Status {
        self.max(other)
    }

    fn rank(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::ConfigError => 2,
        }
    }

    fn max(self, other: Status) -> Status {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// Location and value of `max (U - V)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_gap: Option<GapPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScenarioSummary {
    pub fn from_run(run: &ScenarioRun) -> Self {
        Self {
            name: run.name.clone(),
            status: if run.passed() { Status::Pass } else { Status::Fail },
            verdict: Some(run.report.verdict),
            max_gap: Some(run.report.global_max),
            max_v: Some(run.max_v()),
            equality_gap: run.report.equality_gap,
            checks: run.checks.clone(),
            error: None,
        }
    }

    pub fn from_error(name: &str, e: &Error) -> Self {
        Self {
            name: name.to_string(),
            status: Status::of_error(e),
            verdict: None,
            max_gap: None,
            max_v: None,
            equality_gap: None,
            checks: Vec::new(),
            error: Some(e.to_string()),
        }
    }
}

/// Result of one self-test criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub details: Vec<String>,
    pub seconds: f64,
}

/// Machine-readable record of one invocation, written before exiting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            status: Status::Pass,
            scenarios: Vec::new(),
            sweeps: Vec::new(),
            criteria: Vec::new(),
            error: None,
        }
    }

    pub fn failed_with(command: &str, e: &Error) -> Self {
        Self {
            status: Status::of_error(e),
            error: Some(e.to_string()),
            ..Self::new(command)
        }
    }

    pub fn push_scenario(&mut self, s: ScenarioSummary) {
        self.status = self.status.combine(s.status);
        self.scenarios.push(s);
    }

    pub fn push_criterion(&mut self, c: CriterionSummary) {
        if !c.passed {
            self.status = self.status.combine(Status::Fail);
        }
        self.criteria.push(c);
    }

    pub fn push_sweep(&mut self, s: SweepResult) {
        if !s.passed {
            self.status = self.status.combine(Status::Fail);
        }
        self.sweeps.push(s);
    }
}

/// Files written for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: PathBuf, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents)?;
    files.push(path);
    Ok(())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    name: &'a str,
    theta: f64,
    h: f64,
    dt: f64,
    report: &'a ComparisonReport,
    checks: &'a [Check],
}

/// Writes `comparison.csv`, `lp.csv` and `report.json` under `root/<name>/`.
pub fn write_run(root: &Path, run: &ScenarioRun) -> Result<RunArtifacts> {
    let directory = root.join(&run.name);
    fs::create_dir_all(&directory)?;
    let mut files = Vec::new();

    let mut csv = String::from("t,a,U,V,V_minus_U\n");
    for (j, &t) in run.u_scan.times.iter().enumerate() {
        for (i, &a) in run.u_scan.a_grid.iter().enumerate() {
            let (u, v) = (run.u_scan.values[j][i], run.v_surface.values[j][i]);
            writeln!(csv, "{},{},{},{},{}", num(t), num(a), num(u), num(v), num(v - u))
                .expect("writing to a string");
        }
    }
    write_file(directory.join("comparison.csv"), &csv, &mut files)?;

    let mut csv = String::from("t,p,lhs,rhs,gap\n");
    for g in &run.report.lp_gaps {
        writeln!(csv, "{},{},{},{},{}", num(g.t), num(g.p), num(g.lhs), num(g.rhs), num(g.gap()))
            .expect("writing to a string");
    }
    write_file(directory.join("lp.csv"), &csv, &mut files)?;

    let record = RunRecord {
        name: &run.name,
        theta: run.theta,
        h: run.spacing,
        dt: run.dt,
        report: &run.report,
        checks: &run.checks,
    };
    let json = serde_json::to_string_pretty(&record)?;
    write_file(directory.join("report.json"), &json, &mut files)?;
    Ok(RunArtifacts { directory, files })
}

/// Writes `root/<name>/sweep.csv`.
pub fn write_sweep(root: &Path, sweep: &SweepResult) -> Result<PathBuf> {
    let directory = root.join(&sweep.name);
    fs::create_dir_all(&directory)?;
    let mut csv = String::from("level,h,dt,max_gap_pos,equality_gap\n");
    for l in &sweep.levels {
        let eq = l.equality_gap.map(num).unwrap_or_default();
        writeln!(csv, "{},{},{},{},{}", l.level, num(l.h), num(l.dt), num(l.max_gap_pos), eq)
            .expect("writing to a string");
    }
    let path = directory.join("sweep.csv");
    fs::write(&path, csv)?;
    Ok(path)
}

/// Writes `root/summary.json`.
pub fn write_summary(root: &Path, summary: &Summary) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let path = root.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(summary)?)?;
    Ok(path)
}

/// Writes the normalized configuration to `root/config.json`.
pub fn write_config_echo(root: &Path, config: &SuiteConfig) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let path = root.join("config.json");
    fs::write(&path, config.to_json())?;
    Ok(path)
}
