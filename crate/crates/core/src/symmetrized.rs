//! The symmetrized problem on the model ball, solved two independent ways:
//!
//! * the radial heat equation for `v` in the geodesic radial coordinate
//!   ([`solve_v_radial`]), from which `V(a, t) = int_0^a v*(s, t) ds`;
//! * the degenerate equation `V_t = Phi(a)^2 V'' + F(a)` in the volume
//!   coordinate, with `V(0, t) = 0` and `V'(A, t) = 0` ([`solve_v_direct`]).

use serde::{Deserialize, Serialize};

use crate::domain::{time_steps, FieldSnapshot};
use crate::error::{Error, Result};
use crate::geometry::SymmetrizationTarget;
use crate::rearrangement::{StepFunction, WeightedField};

/// Data of the ball problem: its volume and the rearranged data `(f#)*`, `(g#)*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedProblem {
    pub target: SymmetrizationTarget,
    volume: f64,
    f_star: StepFunction,
    g_star: StepFunction,
}

impl SymmetrizedProblem {
    /// Symmetrizes data given on a domain of volume `sum vol`.
    pub fn new(target: SymmetrizationTarget, f: &WeightedField, g: &WeightedField) -> Result<Self> {
        if (f.total_volume() - g.total_volume()).abs() > 1e-12 * f.total_volume() {
            return Err(Error::domain("f and g live on domains of different volume"));
        }
        let volume = target.ball_volume_for(f.total_volume())?;
        let stretch = 1.0 / target.theta;
        Ok(Self {
            target,
            volume,
            f_star: f.decreasing_rearrangement().stretched(stretch)?,
            g_star: g.decreasing_rearrangement().stretched(stretch)?,
        })
    }

    /// Builds the problem directly from rearranged data on `[0, A]`.
    pub fn from_rearranged(
        target: SymmetrizationTarget,
        f_star: StepFunction,
        g_star: StepFunction,
    ) -> Result<Self> {
        let volume = f_star.total_volume();
        if (g_star.total_volume() - volume).abs() > 1e-12 * volume {
            return Err(Error::domain("(f#)* and (g#)* must share the interval [0, A]"));
        }
        target.ball_volume_for(volume * target.theta)?;
        Ok(Self {
            target,
            volume,
            f_star,
            g_star,
        })
    }

    /// `A = |Omega| / theta`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn ball_radius(&self) -> Result<f64> {
        self.target.model.ball_radius(self.volume)
    }

    pub fn f_star(&self) -> &StepFunction {
        &self.f_star
    }

    pub fn g_star(&self) -> &StepFunction {
        &self.g_star
    }

    /// `F(a) = int_0^a (f#)*(s) ds`.
    pub fn source_concentration(&self, a: f64) -> Result<f64> {
        self.f_star.integral_to(a)
    }

    /// `V(a, 0) = int_0^a (g#)*(s) ds`.
    pub fn initial_v(&self, a: f64) -> Result<f64> {
        self.g_star.integral_to(a)
    }
}

/// `K + 1` equally spaced volume coordinates from 0 to `volume`.
pub fn uniform_a_grid(volume: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|k| {
            if k == intervals {
                volume
            } else {
                volume * k as f64 / intervals as f64
            }
        })
        .collect()
}

/// `V(a_i, t_j)` on a grid of volume coordinates and times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VSurface {
    pub a_grid: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[j][i] = V(a_grid[i], times[j])`.
    pub values: Vec<Vec<f64>>,
}

impl VSurface {
    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Largest `|self - other|` over the shared grid.
    pub fn sup_distance(&self, other: &VSurface) -> Result<f64> {
        check_same_grid(&self.a_grid, &self.times, &other.a_grid, &other.times)?;
        Ok(self
            .values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
    }

    /// Worst violation of "nondecreasing and concave in `a`", relative to the
    /// largest value: returns `(max decrease, max positive second difference)`.
    pub fn shape_violation(&self) -> (f64, f64) {
        shape_violation(&self.a_grid, &self.values)
    }
}

pub(crate) fn check_same_grid(a1: &[f64], t1: &[f64], a2: &[f64], t2: &[f64]) -> Result<()> {
    if a1 != a2 {
        return Err(Error::GridMismatch(format!(
            "a-grids differ ({} vs {} points)",
            a1.len(),
            a2.len()
        )));
    }
    if t1 != t2 {
        return Err(Error::GridMismatch(format!(
            "snapshot times differ ({t1:?} vs {t2:?})"
        )));
    }
    Ok(())
}

/// Relative monotonicity and concavity defects of surfaces sampled on `a_grid`.
/// Second differences are divided differences, so nonuniform grids are fine.
pub(crate) fn shape_violation(a_grid: &[f64], values: &[Vec<f64>]) -> (f64, f64) {
    let scale = values.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    let mut decrease = 0.0f64;
    let mut convexity = 0.0f64;
    for row in values {
        for w in row.windows(2) {
            decrease = decrease.max(w[0] - w[1]);
        }
        for (k, w) in row.windows(3).enumerate() {
            let (h0, h1) = (a_grid[k + 1] - a_grid[k], a_grid[k + 2] - a_grid[k + 1]);
            let s0 = (w[1] - w[0]) / h0;
            let s1 = (w[2] - w[1]) / h1;
            // slope increase scaled back to value units on this stencil
            convexity = convexity.max((s1 - s0) * h0.min(h1));
        }
    }
    (decrease / scale, convexity / scale)
}

/// Radial solution of the ball problem: shells of the geodesic ball and `v` on them.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    /// Radial cell edges `0 = r_0 < ... < r_N = R`.
    pub edges: Vec<f64>,
    /// Shell volumes, summing to `A`.
    pub volumes: Vec<f64>,
    pub snapshots: Vec<FieldSnapshot>,
}

impl RadialSolution {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// The radial profile at snapshot `j` as a field on the shells.
    pub fn field(&self, j: usize) -> Result<WeightedField> {
        WeightedField::new(
            self.volumes.clone(),
            self.snapshots[j].values.iter().map(|v| v.max(0.0)).collect(),
        )
    }

    /// `V(a, t_j)` at every `a` of `a_grid`.
    pub fn concentration(&self, j: usize, a_grid: &[f64]) -> Result<Vec<f64>> {
        let star = self.field(j)?.decreasing_rearrangement();
        a_grid.iter().map(|&a| star.integral_to(a)).collect()
    }

    /// `V` over all snapshots.
    pub fn surface(&self, a_grid: &[f64]) -> Result<VSurface> {
        let values = (0..self.snapshots.len())
            .map(|j| self.concentration(j, a_grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(VSurface {
            a_grid: a_grid.to_vec(),
            times: self.snapshots.iter().map(|s| s.time).collect(),
            values,
        })
    }
}

/// Solves `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i` (Thomas algorithm).
/// `lower[0]` and `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::Numerical("singular tridiagonal system".into()));
    }
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Numerical("singular tridiagonal system".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Route A: `v_t = v_rr + (n-1) (w'/w) v_r + f#` on the geodesic ball with
/// `v(R) = 0`, by implicit Euler on `cells` radial finite volumes. Data are
/// shell averages of the rearranged functions, so source and initial mass are
/// exact.
pub fn solve_v_radial(
    problem: &SymmetrizedProblem,
    schedule: &[f64],
    cells: usize,
    dt: f64,
) -> Result<RadialSolution> {
    if cells < 4 {
        return Err(Error::domain("radial solve needs at least 4 cells"));
    }
    let model = problem.target.model;
    let big_a = problem.volume();
    let radius = problem.ball_radius()?;
    let dr = radius / cells as f64;
    let edges: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { radius } else { i as f64 * dr })
        .collect();
    let mut cumulative = edges
        .iter()
        .map(|&r| model.ball_volume(r))
        .collect::<Result<Vec<_>>>()?;
    cumulative[cells] = big_a;
    let volumes: Vec<f64> = cumulative.windows(2).map(|w| w[1] - w[0]).collect();
    if volumes.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Numerical("degenerate radial shell".into()));
    }
    // face conductances: sphere area over spacing; the outer face is a half cell from the center
    let mut faces = edges
        .iter()
        .map(|&r| model.sphere_area(r).map(|s| s / dr))
        .collect::<Result<Vec<_>>>()?;
    faces[0] = 0.0;
    faces[cells] *= 2.0;

    let f_avg = (0..cells)
        .map(|i| problem.f_star().average(cumulative[i], cumulative[i + 1]))
        .collect::<Result<Vec<_>>>()?;
    let mut v = (0..cells)
        .map(|i| problem.g_star().average(cumulative[i], cumulative[i + 1]))
        .collect::<Result<Vec<_>>>()?;

    let mut lower = vec![0.0; cells];
    let mut diag = vec![0.0; cells];
    let mut upper = vec![0.0; cells];
    let mut snapshots = Vec::with_capacity(schedule.len());
    let mut current_dt = f64::NAN;
    for (step, hit) in time_steps(schedule, dt)? {
        if step != current_dt {
            for i in 0..cells {
                lower[i] = -step * faces[i];
                upper[i] = -step * faces[i + 1];
                diag[i] = volumes[i] + step * (faces[i] + faces[i + 1]);
            }
            current_dt = step;
        }
        let mut rhs: Vec<f64> = (0..cells)
            .map(|i| volumes[i] * (v[i] + step * f_avg[i]))
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        v = rhs;
        if let Some(k) = hit {
            snapshots.push(FieldSnapshot {
                time: schedule[k],
                values: v.clone(),
            });
        }
    }
    Ok(RadialSolution {
        edges,
        volumes,
        snapshots,
    })
}

/// Route B: `V_t = Phi(a)^2 V'' + F(a)` on `(0, A)` with `V(0) = 0` and
/// `V'(A) = 0`, implicit Euler on `intervals` uniform cells in `a`. The node
/// `a = 0` is pinned, so `Phi(0)^2 V''(0)` is never formed; the Neumann end
/// uses a mirrored ghost node.
pub fn solve_v_direct(
    problem: &SymmetrizedProblem,
    schedule: &[f64],
    intervals: usize,
    dt: f64,
) -> Result<VSurface> {
    if intervals < 4 {
        return Err(Error::domain("direct solve needs at least 4 intervals"));
    }
    let model = problem.target.model;
    let a_grid = uniform_a_grid(problem.volume(), intervals);
    let da = problem.volume() / intervals as f64;
    let k = intervals;
    // unknowns are nodes 1..=K, stored at 0..K
    let phi2 = a_grid[1..]
        .iter()
        .map(|&a| model.isoperimetric_profile(a).map(|p| p * p / (da * da)))
        .collect::<Result<Vec<_>>>()?;
    let source = a_grid[1..]
        .iter()
        .map(|&a| problem.source_concentration(a))
        .collect::<Result<Vec<_>>>()?;
    let mut v = a_grid[1..]
        .iter()
        .map(|&a| problem.initial_v(a))
        .collect::<Result<Vec<_>>>()?;

    let mut lower = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut values = Vec::with_capacity(schedule.len());
    let mut current_dt = f64::NAN;
    for (step, hit) in time_steps(schedule, dt)? {
        if step != current_dt {
            for i in 0..k {
                let d = step * phi2[i];
                diag[i] = 1.0 + 2.0 * d;
                lower[i] = -d;
                upper[i] = -d;
            }
            // ghost V_{K+1} = V_{K-1}
            lower[k - 1] *= 2.0;
            current_dt = step;
        }
        let mut rhs: Vec<f64> = v.iter().zip(&source).map(|(v, f)| v + step * f).collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        v = rhs;
        if hit.is_some() {
            let mut row = Vec::with_capacity(k + 1);
            row.push(0.0);
            row.extend_from_slice(&v);
            values.push(row);
        }
    }
    Ok(VSurface {
        a_grid,
        times: schedule.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelSpace;
    use std::f64::consts::PI;

    fn disc_target() -> SymmetrizationTarget {
        SymmetrizationTarget::new(ModelSpace::flat(2), 1.0).unwrap()
    }

    fn constant_problem(target: SymmetrizationTarget, volume: f64, f: f64, g: f64) -> SymmetrizedProblem {
        let field = |c| WeightedField::from_cells(&[(volume, c)]).unwrap();
        SymmetrizedProblem::new(target, &field(f), &field(g)).unwrap()
    }

    #[test]
    fn tridiagonal_solver() {
        let lower = [0.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, 0.0];
        let mut rhs = [1.0, 0.0, 1.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn source_and_initial_concentrations() {
        let zero = constant_problem(disc_target(), PI, 0.0, 0.0);
        assert_eq!(zero.source_concentration(1.0).unwrap(), 0.0);
        assert_eq!(zero.initial_v(2.0).unwrap(), 0.0);

        let p = constant_problem(disc_target(), PI, 1.0, 2.5);
        assert!((p.source_concentration(1.3).unwrap() - 1.3).abs() < 1e-15);
        assert!((p.initial_v(1.3).unwrap() - 3.25).abs() < 1e-15);

        let half = SymmetrizationTarget::new(ModelSpace::flat(2), 0.5).unwrap();
        let p = constant_problem(half, PI, 1.0, 0.0);
        assert!((p.volume() - 2.0 * PI).abs() < 1e-15);
        assert!((p.source_concentration(2.0 * PI).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(p.source_concentration(2.0 * PI * 1.01).is_err());
    }

    #[test]
    fn initial_v_matches_scaled_domain_integral() {
        let g = WeightedField::from_cells(&[(0.3, 2.0), (0.5, 1.0), (0.2, 4.0), (1.0, 0.5)]).unwrap();
        let theta = 0.25;
        let target = SymmetrizationTarget::new(ModelSpace::flat(2), theta).unwrap();
        let f = WeightedField::from_cells(&[(0.3, 0.0), (0.5, 0.0), (0.2, 0.0), (1.0, 0.0)]).unwrap();
        let p = SymmetrizedProblem::new(target, &f, &g).unwrap();
        let g_star = g.decreasing_rearrangement();
        for i in 0..=40 {
            let a = p.volume() * f64::from(i) / 40.0;
            let direct = g_star.concentration(a, theta).unwrap();
            assert!((p.initial_v(a).unwrap() - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_data_gives_zero_surfaces() {
        let p = constant_problem(disc_target(), PI, 0.0, 0.0);
        let radial = solve_v_radial(&p, &[0.1, 0.2], 16, 0.01).unwrap();
        let grid = uniform_a_grid(p.volume(), 16);
        let s = radial.surface(&grid).unwrap();
        assert_eq!(s.max_value(), 0.0);
        let d = solve_v_direct(&p, &[0.1, 0.2], 16, 0.01).unwrap();
        assert_eq!(d.max_value(), 0.0);
    }

    #[test]
    fn disc_torsion_steady_state_both_routes() {
        let p = constant_problem(disc_target(), PI, 1.0, 0.0);
        let radial = solve_v_radial(&p, &[5.0], 256, 0.05).unwrap();
        for (r, v) in radial.centers().iter().zip(&radial.snapshots[0].values) {
            assert!((v - (1.0 - r * r) / 4.0).abs() < 1e-4, "r={r} v={v}");
        }
        let grid = uniform_a_grid(PI, 256);
        let va = radial.surface(&grid).unwrap();
        let vb = solve_v_direct(&p, &[5.0], 256, 0.05).unwrap();
        for (i, a) in grid.iter().enumerate() {
            let exact = a / 4.0 - a * a / (8.0 * PI);
            assert!((va.values[0][i] - exact).abs() < 1e-4);
            assert!((vb.values[0][i] - exact).abs() < 1e-4, "a={a}");
        }
        assert!((vb.values[0][256] - PI / 8.0).abs() < 1e-5);
    }

    #[test]
    fn sphere_cap_torsion_routes_agree() {
        let target = SymmetrizationTarget::new(ModelSpace::sphere(1.0, 2).unwrap(), 1.0).unwrap();
        let p = constant_problem(target, 2.5 * PI, 1.0, 0.0);
        let grid = uniform_a_grid(p.volume(), 512);
        let va = solve_v_radial(&p, &[0.1, 3.0], 512, 0.01).unwrap().surface(&grid).unwrap();
        let vb = solve_v_direct(&p, &[0.1, 3.0], 512, 0.01).unwrap();
        let gap = va.sup_distance(&vb).unwrap();
        assert!(gap < 1e-3 * va.max_value(), "gap {gap}");
        let (dec, conv) = vb.shape_violation();
        assert!(dec <= 0.0 && conv <= 1e-10);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let s1 = VSurface { a_grid: vec![0.0, 1.0], times: vec![0.1], values: vec![vec![0.0, 1.0]] };
        let s2 = VSurface { a_grid: vec![0.0, 2.0], times: vec![0.1], values: vec![vec![0.0, 1.0]] };
        assert!(matches!(s1.sup_distance(&s2), Err(Error::GridMismatch(_))));
    }
}
