//! Concentration comparison `U(a, t) <= V(a, t)`, its `L^p` corollary and the
//! equality case on model balls.

use serde::{Deserialize, Serialize};

use crate::domain::{field_as_weighted, DomainSpec, FieldSnapshot, MeshedDomain};
use crate::error::{Error, Result};
use crate::rearrangement::WeightedField;
use crate::symmetrized::{check_same_grid, shape_violation, VSurface};

/// `U(a_i, t_j) = (1/theta) int_0^{theta a_i} u*(s, t_j) ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UScan {
    pub a_grid: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl UScan {
    pub fn shape_violation(&self) -> (f64, f64) {
        shape_violation(&self.a_grid, &self.values)
    }
}

/// Rearranges every snapshot and integrates it on `a_grid`.
pub fn compute_u(
    snapshots: &[FieldSnapshot],
    mesh: &MeshedDomain,
    theta: f64,
    a_grid: &[f64],
) -> Result<UScan> {
    let values = snapshots
        .iter()
        .map(|s| {
            let star = field_as_weighted(s, mesh)?.decreasing_rearrangement();
            a_grid
                .iter()
                .map(|&a| star.concentration(a, theta))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UScan {
        a_grid: a_grid.to_vec(),
        times: snapshots.iter().map(|s| s.time).collect(),
        values,
    })
}

/// A grid point of `U - V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub t: f64,
    pub a: f64,
    /// `U - V` there.
    pub gap: f64,
}

/// One row of the `L^p` corollary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpGap {
    pub t: f64,
    /// `f64::INFINITY` for the sup norm.
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl LpGap {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// `max (U - V)` is positive but within tolerance.
    PassWithMargin,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Location of `max_a (U - V)` at each time.
    pub per_time_max: Vec<GapPoint>,
    pub global_max: GapPoint,
    /// Absolute tolerance on `max (U - V)`.
    pub tolerance: f64,
    /// `L^p` rows pass when `lhs <= rhs (1 + lp_relative_tolerance)`.
    pub lp_relative_tolerance: f64,
    pub lp_gaps: Vec<LpGap>,
    /// `max |U - V|`, for scenarios flagged as equality cases.
    pub equality_gap: Option<f64>,
    pub verdict: Verdict,
}

impl ComparisonReport {
    /// `L^p` rows that violate their bound.
    pub fn lp_failures(&self) -> impl Iterator<Item = &LpGap> {
        let rel = self.lp_relative_tolerance;
        self.lp_gaps.iter().filter(move |g| !(g.lhs <= g.rhs * (1.0 + rel)))
    }

    /// Adds `L^p` rows and re-renders the verdict.
    pub fn with_lp_gaps(mut self, gaps: Vec<LpGap>, relative_tolerance: f64) -> Self {
        self.lp_gaps = gaps;
        self.lp_relative_tolerance = relative_tolerance;
        self.verdict = self.render();
        self
    }

    fn render(&self) -> Verdict {
        let g = self.global_max.gap;
        if !(g <= self.tolerance) || self.lp_failures().next().is_some() {
            Verdict::Fail
        } else if g > 0.0 {
            Verdict::PassWithMargin
        } else {
            Verdict::Pass
        }
    }
}

/// Exact grid maxima of `U - V`; both must share `a_grid` and `times`.
pub fn compare(u: &UScan, v: &VSurface, tolerance: f64) -> Result<ComparisonReport> {
    check_same_grid(&u.a_grid, &u.times, &v.a_grid, &v.times)?;
    if u.times.is_empty() {
        return Err(Error::GridMismatch("no snapshot times to compare".into()));
    }
    let per_time_max: Vec<GapPoint> = u
        .times
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(&t, (us, vs))| {
            let mut best = GapPoint {
                t,
                a: u.a_grid[0],
                gap: f64::NEG_INFINITY,
            };
            for ((&a, uv), vv) in u.a_grid.iter().zip(us).zip(vs) {
                let gap = uv - vv;
                if gap > best.gap {
                    best = GapPoint { t, a, gap };
                }
            }
            best
        })
        .collect();
    let global_max = *per_time_max
        .iter()
        .max_by(|x, y| x.gap.total_cmp(&y.gap))
        .expect("at least one time");
    let mut report = ComparisonReport {
        per_time_max,
        global_max,
        tolerance,
        lp_relative_tolerance: 0.0,
        lp_gaps: Vec::new(),
        equality_gap: None,
        verdict: Verdict::Pass,
    };
    report.verdict = report.render();
    Ok(report)
}

/// `(lhs, rhs)` of the `L^p` corollary:
/// `((1/theta) sum vol u^p)^{1/p}` against `(sum vol v^p)^{1/p}` over the ball,
/// with the maxima for `p = inf`.
pub fn lp_gap(u: &WeightedField, v: &WeightedField, theta: f64, p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("p must be >= 1, got {p}")));
    }
    if p == f64::INFINITY {
        return Ok((u.max_value(), v.max_value()));
    }
    let lhs = (u.power_integral(p) / theta).powf(1.0 / p);
    let rhs = v.power_integral(p).powf(1.0 / p);
    Ok((lhs, rhs))
}

/// `max |U - V|` for a radial problem on a model ball.
pub fn equality_case_check(domain: &DomainSpec, theta: f64, u: &UScan, v: &VSurface) -> Result<f64> {
    if !domain.is_model_ball() || theta != 1.0 {
        return Err(Error::config(
            "equality_case",
            "the equality case needs a polar disc or spherical cap with theta = 1",
        ));
    }
    check_same_grid(&u.a_grid, &u.times, &v.a_grid, &v.times)?;
    Ok(u
        .values
        .iter()
        .flatten()
        .zip(v.values.iter().flatten())
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
}
