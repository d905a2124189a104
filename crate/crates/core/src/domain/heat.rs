use serde::{Deserialize, Serialize};

use crate::domain::cg::{conjugate_gradient, identity, jacobi, Preconditioner};
use crate::domain::precond::LineSolver;
use crate::domain::mesh::MeshedDomain;
use crate::error::{Error, Result};
use crate::rearrangement::WeightedField;

/// Values below `-NEGATIVE_TOLERANCE * max` count as maximum-principle violations.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Linear-solver settings for the implicit steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub cg_tolerance: f64,
    pub preconditioner: Preconditioner,
    /// Iteration cap as a multiple of the number of unknowns.
    pub max_iterations_per_unknown: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            cg_tolerance: 1e-10,
            preconditioner: Preconditioner::Lines,
            max_iterations_per_unknown: 10,
        }
    }
}

/// The solution at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

impl FieldSnapshot {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Most negative value relative to the maximum; zero when nonnegative.
    pub fn relative_undershoot(&self) -> f64 {
        let min = self.values.iter().copied().fold(0.0, f64::min);
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            0.0
        } else {
            min / scale
        }
    }

    pub fn satisfies_maximum_principle(&self) -> bool {
        self.relative_undershoot() >= -NEGATIVE_TOLERANCE
    }
}

/// Step sizes that reach every snapshot time exactly: each gap is split into
/// the fewest equal steps no longer than `dt`. The second element marks the
/// snapshot reached at the end of the step.
pub fn time_steps(schedule: &[f64], dt: f64) -> Result<Vec<(f64, Option<usize>)>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", format!("must be positive, got {dt}")));
    }
    let mut steps = Vec::new();
    let mut t = 0.0;
    for (k, &target) in schedule.iter().enumerate() {
        if !(target > t) || !target.is_finite() {
            return Err(Error::config(
                "times",
                format!("snapshot times must increase strictly from 0 (entry {k} = {target})"),
            ));
        }
        let gap = target - t;
        let n = ((gap / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let step = gap / n as f64;
        for i in 0..n {
            steps.push((step, (i + 1 == n).then_some(k)));
        }
        t = target;
    }
    Ok(steps)
}

/// Preconditioner data for one time step size.
enum Prepared {
    Identity,
    Jacobi(Vec<f64>),
    Lines(LineSolver),
}

/// Implicit Euler stepper for a fixed mesh and step size.
struct Stepper<'a> {
    mesh: &'a MeshedDomain,
    dt: f64,
    settings: SolverSettings,
    prepared: Prepared,
}

impl<'a> Stepper<'a> {
    fn new(mesh: &'a MeshedDomain, dt: f64, settings: &SolverSettings) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        let prepared = match settings.preconditioner {
            Preconditioner::None => Prepared::Identity,
            Preconditioner::Jacobi => Prepared::Jacobi(mesh.heat_matrix_diagonal(dt)),
            Preconditioner::Lines => Prepared::Lines(LineSolver::new(mesh, dt)),
        };
        Ok(Self {
            mesh,
            dt,
            settings: *settings,
            prepared,
        })
    }

    /// Solves for the next state from `u`, starting CG at `guess`.
    fn step(&self, u: &[f64], f: &[f64], guess: Vec<f64>) -> Result<Vec<f64>> {
        let (mesh, dt) = (self.mesh, self.dt);
        let rhs: Vec<f64> = mesh
            .cells()
            .iter()
            .zip(u.iter().zip(f))
            .map(|(c, (u, f))| c.volume * (u + dt * f))
            .collect();
        let mut x = guess;
        let apply = |p: &[f64], y: &mut [f64]| mesh.apply_heat_matrix(dt, p, y);
        let tol = self.settings.cg_tolerance;
        let cap = self.settings.max_iterations_per_unknown * mesh.len();
        let outcome = match &self.prepared {
            Prepared::Identity => conjugate_gradient(apply, identity, &rhs, &mut x, tol, cap),
            Prepared::Jacobi(d) => conjugate_gradient(apply, jacobi(d), &rhs, &mut x, tol, cap),
            Prepared::Lines(l) => {
                conjugate_gradient(apply, |r, z| l.apply(r, z), &rhs, &mut x, tol, cap)
            }
        }?;
        log::trace!("cg: {} iterations, residual {:e}", outcome.iterations, outcome.relative_residual);
        Ok(x)
    }
}

fn check_lengths(mesh: &MeshedDomain, fields: &[&[f64]]) -> Result<()> {
    if fields.iter().any(|f| f.len() != mesh.len()) {
        return Err(Error::domain("field length does not match the mesh"));
    }
    Ok(())
}

/// One implicit Euler step: solves `(I - dt Lap_h) u_new = u + dt f`.
pub fn heat_step(
    mesh: &MeshedDomain,
    u: &FieldSnapshot,
    f: &[f64],
    dt: f64,
    settings: &SolverSettings,
) -> Result<FieldSnapshot> {
    check_lengths(mesh, &[&u.values, f])?;
    let values = Stepper::new(mesh, dt, settings)?.step(&u.values, f, u.values.clone())?;
    Ok(FieldSnapshot {
        time: u.time + dt,
        values,
    })
}

/// Advances from `u(0) = g` and returns `u` at every time in `schedule`.
pub fn solve_heat(
    mesh: &MeshedDomain,
    f: &[f64],
    g: &[f64],
    schedule: &[f64],
    dt: f64,
    settings: &SolverSettings,
) -> Result<Vec<FieldSnapshot>> {
    check_lengths(mesh, &[f, g])?;
    let mut u = g.to_vec();
    let mut previous: Option<(Vec<f64>, f64)> = None;
    let mut out = Vec::with_capacity(schedule.len());
    let mut stepper: Option<Stepper> = None;
    for (step, hit) in time_steps(schedule, dt)? {
        if stepper.as_ref().is_none_or(|s| s.dt != step) {
            stepper = Some(Stepper::new(mesh, step, settings)?);
        }
        // linear extrapolation in time as the starting guess
        let guess = match &previous {
            Some((p, last)) => {
                let w = step / last;
                u.iter().zip(p).map(|(u, p)| u + w * (u - p)).collect()
            }
            None => u.clone(),
        };
        let next = stepper.as_ref().expect("stepper prepared").step(&u, f, guess)?;
        previous = Some((std::mem::replace(&mut u, next), step));
        if let Some(k) = hit {
            out.push(FieldSnapshot {
                time: schedule[k],
                values: u.clone(),
            });
        }
    }
    Ok(out)
}

/// Pairs cell volumes with the clamped snapshot values.
pub fn field_as_weighted(snapshot: &FieldSnapshot, mesh: &MeshedDomain) -> Result<WeightedField> {
    if snapshot.values.len() != mesh.len() {
        return Err(Error::domain("snapshot length does not match the mesh"));
    }
    let undershoot = snapshot.relative_undershoot();
    if undershoot < -NEGATIVE_TOLERANCE {
        log::warn!(
            "clamping negative values at t = {} (min/max = {undershoot:e})",
            snapshot.time
        );
    }
    WeightedField::new(
        mesh.volumes(),
        snapshot.values.iter().map(|v| v.max(0.0)).collect(),
    )
}
