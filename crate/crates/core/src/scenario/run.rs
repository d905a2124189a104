use serde::{Deserialize, Serialize};

use crate::comparison::{compare, compute_u, equality_case_check, lp_gap, ComparisonReport, LpGap, UScan};
use crate::domain::{build_domain, field_as_weighted, solve_heat, FieldSnapshot, MeshedDomain};
use crate::error::{Error, Result};
use crate::geometry::{ModelSpace, SymmetrizationTarget};
use crate::rearrangement::WeightedField;
use crate::scenario::config::ScenarioConfig;
use crate::symmetrized::{
    solve_v_direct, solve_v_radial, uniform_a_grid, RadialSolution, SymmetrizedProblem, VSurface,
};

/// Exponents of the `L^p` rows.
pub const LP_EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

/// Tolerance of the exact bookkeeping identities (mass, `p = 1`, initial data).
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// A validated scenario with its mesh and sampled data.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: ModelSpace,
    pub theta: f64,
    pub mesh: MeshedDomain,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl Scenario {
    /// Normalizes the config, builds the mesh and samples the data. Every
    /// error here is a configuration error.
    pub fn prepare(config: &ScenarioConfig) -> Result<Self> {
        let config = config.normalized()?;
        let model = config.model()?;
        let theta = config.theta.expect("normalized configs carry theta");
        let mesh = build_domain(&config.domain, &model, theta).map_err(|e| e.in_field("domain"))?;
        let f = config.f.sample(&mesh).map_err(|e| e.in_field("f"))?;
        let g = config.g.sample(&mesh).map_err(|e| e.in_field("g"))?;
        Ok(Self {
            config,
            model,
            theta,
            mesh,
            f,
            g,
        })
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }
}

/// One pass/fail check of a run, with the measured value and its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            passed: value <= limit,
        }
    }
}

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub name: String,
    pub theta: f64,
    pub spacing: f64,
    pub dt: f64,
    pub u_snapshots: Vec<FieldSnapshot>,
    pub radial: RadialSolution,
    pub u_scan: UScan,
    /// Route A, the reference `V`.
    pub v_surface: VSurface,
    /// Route B.
    pub v_direct: VSurface,
    pub report: ComparisonReport,
    pub checks: Vec<Check>,
}

impl ScenarioRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_v(&self) -> f64 {
        self.v_surface.max_value()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn relative(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

/// Largest increase of `v` along the radius, relative to its maximum.
fn radial_increase(radial: &RadialSolution) -> f64 {
    radial
        .snapshots
        .iter()
        .map(|s| {
            let rise = s.values.windows(2).fold(0.0, |m: f64, w| m.max(w[1] - w[0]));
            relative(rise, s.max())
        })
        .fold(0.0, f64::max)
}

/// Largest increase in time of a concentration surface, relative to its maximum.
fn time_increase(values: &[Vec<f64>], initial: &[f64], scale: f64) -> f64 {
    let mut previous = initial;
    let mut rise = 0.0f64;
    for row in values {
        for (now, before) in row.iter().zip(previous) {
            rise = rise.max(now - before);
        }
        previous = row;
    }
    relative(rise, scale)
}

/// Runs the forward problem, both symmetrized routes and the comparison.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    let c = &s.config;
    let schedule = &c.times;
    let u_snapshots = solve_heat(&s.mesh, &s.f, &s.g, schedule, c.dt, &c.solver)?;

    let volumes = s.mesh.volumes();
    let f_field = WeightedField::new(volumes.clone(), s.f.clone())?;
    let g_field = WeightedField::new(volumes, s.g.clone())?;
    let target = SymmetrizationTarget::new(s.model, s.theta)?;
    let problem = SymmetrizedProblem::new(target, &f_field, &g_field)?;
    let a_grid = uniform_a_grid(problem.volume(), c.resolution);

    let radial = solve_v_radial(&problem, schedule, c.resolution, c.dt)?;
    let v_surface = radial.surface(&a_grid)?;
    let v_direct = solve_v_direct(&problem, schedule, c.resolution, c.dt)?;
    let u_scan = compute_u(&u_snapshots, &s.mesh, s.theta, &a_grid)?;
    let max_v = v_surface.max_value();

    let mut lp = Vec::new();
    let mut mass_defect = 0.0f64;
    let mut lp1_defect = 0.0f64;
    let last = a_grid.len() - 1;
    for (j, snap) in u_snapshots.iter().enumerate() {
        let u_field = field_as_weighted(snap, &s.mesh)?;
        let v_field = radial.field(j)?;
        for p in LP_EXPONENTS {
            let (lhs, rhs) = lp_gap(&u_field, &v_field, s.theta, p)?;
            lp.push(LpGap { t: snap.time, p, lhs, rhs });
        }
        let mass = u_field.power_integral(1.0);
        let u_full = u_scan.values[j][last];
        let v_full = v_surface.values[j][last];
        mass_defect = mass_defect.max(relative((s.theta * u_full - mass).abs(), mass));
        let p1 = lp[lp.len() - LP_EXPONENTS.len()];
        lp1_defect = lp1_defect.max(relative(
            (p1.gap() - (u_full - v_full)).abs(),
            u_full.max(v_full),
        ));
    }

    let report = compare(&u_scan, &v_surface, c.tolerance * max_v)?.with_lp_gaps(lp, c.lp_tolerance);
    let lp_excess = report
        .lp_gaps
        .iter()
        .map(|g| relative(g.gap(), g.rhs))
        .fold(f64::NEG_INFINITY, f64::max);

    let u0 = g_field.decreasing_rearrangement();
    let initial_u = a_grid
        .iter()
        .map(|&a| u0.concentration(a, s.theta))
        .collect::<Result<Vec<_>>>()?;
    let initial_v = a_grid
        .iter()
        .map(|&a| problem.initial_v(a))
        .collect::<Result<Vec<_>>>()?;
    let initial_scale = initial_v.iter().copied().fold(0.0, f64::max);
    let initial_defect = initial_u
        .iter()
        .zip(&initial_v)
        .fold(0.0, |m: f64, (u, v)| m.max((u - v).abs()));

    let undershoot = u_snapshots
        .iter()
        .chain(&radial.snapshots)
        .map(FieldSnapshot::relative_undershoot)
        .fold(0.0, f64::min);
    let shape = |(dec, conv): (f64, f64)| dec.max(conv);

    let mut checks = vec![
        Check::at_most("comparison", relative(report.global_max.gap, max_v), c.tolerance),
        Check::at_most("lp_corollary", lp_excess, c.lp_tolerance),
        Check::at_most(
            "route_agreement",
            relative(v_surface.sup_distance(&v_direct)?, max_v),
            c.route_tolerance,
        ),
        Check::at_most("shape_u", shape(u_scan.shape_violation()), c.shape_tolerance),
        Check::at_most("shape_v_radial", shape(v_surface.shape_violation()), c.shape_tolerance),
        Check::at_most("shape_v_direct", shape(v_direct.shape_violation()), c.shape_tolerance),
        Check::at_most("radial_monotonicity", radial_increase(&radial), c.shape_tolerance),
        Check::at_most(
            "maximum_principle",
            -undershoot,
            crate::domain::NEGATIVE_TOLERANCE,
        ),
        Check::at_most("mass_identity", mass_defect, IDENTITY_TOLERANCE),
        Check::at_most("lp1_identity", lp1_defect, IDENTITY_TOLERANCE),
        Check::at_most(
            "initial_identity",
            relative(initial_defect, initial_scale),
            IDENTITY_TOLERANCE,
        ),
    ];
    if s.f.iter().all(|&v| v == 0.0) {
        checks.push(Check::at_most(
            "v_time_monotonicity",
            time_increase(&v_surface.values, &initial_v, max_v)
                .max(time_increase(&v_direct.values, &initial_v, max_v)),
            c.shape_tolerance,
        ));
    }
    let mut report = report;
    if c.equality_case {
        let gap = equality_case_check(&c.domain, s.theta, &u_scan, &v_surface)?;
        report.equality_gap = Some(gap);
        checks.push(Check::at_most("equality_gap", relative(gap, max_v), c.equality_tolerance));
    }

    Ok(ScenarioRun {
        name: c.name.clone(),
        theta: s.theta,
        spacing: s.mesh.spacing(),
        dt: c.dt,
        u_snapshots,
        radial,
        u_scan,
        v_surface,
        v_direct,
        report,
        checks,
    })
}

/// Prepares and runs a scenario, tagging preparation errors with the scenario name.
pub fn prepare_and_run(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let scenario = Scenario::prepare(config)?;
    run_scenario(&scenario).map_err(|e| match e {
        Error::Numerical(m) => Error::Numerical(format!("scenario {}: {m}", config.name)),
        other => other,
    })
}
