//! Distribution functions and rearrangements of nonnegative fields given as
//! finitely many cells with a volume and a value each.
//!
//! On such fields every rearrangement is a step function, so the identities
//! relating a field to its rearrangements hold up to floating-point rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SymmetrizationTarget;

/// Relative slack accepted on volume-coordinate range checks.
const RANGE_SLACK: f64 = 1e-12;

/// A nonnegative function sampled as `(volume, value)` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedField {
    volumes: Vec<f64>,
    values: Vec<f64>,
}

impl WeightedField {
    pub fn new(volumes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if volumes.len() != values.len() {
            return Err(Error::domain(format!(
                "{} volumes but {} values",
                volumes.len(),
                values.len()
            )));
        }
        if volumes.is_empty() {
            return Err(Error::domain("empty field"));
        }
        if let Some(i) = volumes.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain(format!(
                "cell {i} has non-positive volume {}",
                volumes[i]
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(format!(
                "cell {i} has negative or non-finite value {}",
                values[i]
            )));
        }
        Ok(Self { volumes, values })
    }

    pub fn from_cells(cells: &[(f64, f64)]) -> Result<Self> {
        let (volumes, values) = cells.iter().copied().unzip();
        Self::new(volumes, values)
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.volumes.iter().copied().zip(self.values.iter().copied())
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `sum vol * value^p`.
    pub fn power_integral(&self, p: f64) -> f64 {
        self.cells().map(|(v, x)| v * x.powf(p)).sum()
    }

    /// `mu_h(s)`: total volume of the cells whose value exceeds `s`.
    pub fn distribution(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("level must be >= 0, got {s}")));
        }
        Ok(self.cells().filter(|&(_, x)| x > s).map(|(v, _)| v).sum())
    }

    fn same_cells(&self, other: &WeightedField) -> Result<()> {
        if self.volumes != other.volumes {
            return Err(Error::domain(
                "fields must share an identical cell-volume sequence",
            ));
        }
        Ok(())
    }

    /// The decreasing rearrangement `h*`.
    pub fn decreasing_rearrangement(&self) -> StepFunction {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]));
        let mut breaks = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for i in order {
            acc += self.volumes[i];
            let x = self.values[i];
            if values.last() == Some(&x) {
                *breaks.last_mut().unwrap() = acc;
            } else {
                values.push(x);
                breaks.push(acc);
            }
        }
        StepFunction::from_sorted_unchecked(breaks, values)
    }
}

/// A nonincreasing step function on `[0, total]`: plateau `i` carries `values[i]`
/// on the interval `(breaks[i], breaks[i + 1]]`, and the value at `0` is `values[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
    /// `int_0^{breaks[i]} h*` for every break.
    #[serde(skip)]
    mass: Vec<f64>,
}

impl StepFunction {
    /// Builds a step function, checking that breaks increase strictly from zero and
    /// that values decrease strictly and are nonnegative.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::domain(
                "a step function needs m >= 1 values and m + 1 breaks",
            ));
        }
        if breaks[0] != 0.0 {
            return Err(Error::domain("breaks must start at 0"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::domain("breaks must increase strictly"));
        }
        if values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::domain("plateau values must decrease strictly"));
        }
        if !(values[values.len() - 1] >= 0.0) || !values[0].is_finite() {
            return Err(Error::domain("plateau values must be finite and nonnegative"));
        }
        Ok(Self::from_sorted_unchecked(breaks, values))
    }

    fn from_sorted_unchecked(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        let mut mass = Vec::with_capacity(breaks.len());
        mass.push(0.0);
        let mut acc = 0.0;
        for (w, x) in breaks.windows(2).zip(&values) {
            acc += (w[1] - w[0]) * x;
            mass.push(acc);
        }
        Self {
            breaks,
            values,
            mass,
        }
    }

    /// A single plateau of height `value` on `[0, total]`.
    pub fn constant(value: f64, total: f64) -> Result<Self> {
        Self::new(vec![0.0, total], vec![value])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn plateaus(&self) -> usize {
        self.values.len()
    }

    pub fn total_volume(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    fn check_coordinate(&self, s: f64) -> Result<f64> {
        let total = self.total_volume();
        if !(s >= 0.0) || s > total * (1.0 + RANGE_SLACK) {
            return Err(Error::domain(format!(
                "volume coordinate {s} outside [0, {total}]"
            )));
        }
        Ok(s.min(total))
    }

    /// Index of the plateau containing `s > 0` under the `(b_i, b_{i+1}]` convention.
    fn plateau_index(&self, s: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b < s);
        k.saturating_sub(1).min(self.values.len() - 1)
    }

    /// `h*(s) = inf { t >= 0 : mu_h(t) < s }`, with `h*(0)` the maximum.
    pub fn value_at(&self, s: f64) -> Result<f64> {
        let s = self.check_coordinate(s)?;
        if s == 0.0 {
            return Ok(self.values[0]);
        }
        Ok(self.values[self.plateau_index(s)])
    }

    /// `mu(t)`: volume on which the step function exceeds `t`.
    pub fn distribution(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("level must be >= 0, got {t}")));
        }
        let k = self.values.partition_point(|&x| x > t);
        Ok(self.breaks[k])
    }

    /// `int_0^x h*(s) ds`.
    pub fn integral_to(&self, x: f64) -> Result<f64> {
        let x = self.check_coordinate(x)?;
        Ok(self.integral_to_unchecked(x))
    }

    fn integral_to_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.plateau_index(x);
        self.mass[i] + self.values[i] * (x - self.breaks[i])
    }

    /// `(1/theta) int_0^{theta a} h*(s) ds`.
    pub fn concentration(&self, a: f64, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::domain(format!("theta must lie in (0, 1], got {theta}")));
        }
        if !(a >= 0.0) {
            return Err(Error::domain(format!("a must be >= 0, got {a}")));
        }
        Ok(self.integral_to(theta * a)? / theta)
    }

    /// Mean value over `[x0, x1]`.
    pub fn average(&self, x0: f64, x1: f64) -> Result<f64> {
        let (x0, x1) = (self.check_coordinate(x0)?, self.check_coordinate(x1)?);
        if !(x1 > x0) {
            return Err(Error::domain(format!("empty averaging interval [{x0}, {x1}]")));
        }
        Ok((self.integral_to_unchecked(x1) - self.integral_to_unchecked(x0)) / (x1 - x0))
    }

    /// `int_0^total (h*)^p ds`.
    pub fn power_integral(&self, p: f64) -> f64 {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, x)| (w[1] - w[0]) * x.powf(p))
            .sum()
    }

    /// `s -> h*(factor^{-1} s)` on `[0, factor * total]`.
    pub fn stretched(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::domain(format!("stretch factor must be > 0, got {factor}")));
        }
        let breaks = self.breaks.iter().map(|b| b * factor).collect();
        Ok(Self::from_sorted_unchecked(breaks, self.values.clone()))
    }

    /// Exact `int_0^total h*(s) k*(s) ds` of two step functions on the same interval.
    pub fn product_integral(&self, other: &StepFunction) -> Result<f64> {
        let (ta, tb) = (self.total_volume(), other.total_volume());
        if (ta - tb).abs() > RANGE_SLACK * ta.max(tb) {
            return Err(Error::domain(format!(
                "step functions live on different intervals ({ta} vs {tb})"
            )));
        }
        let (mut i, mut j) = (0, 0);
        let mut left = 0.0;
        let mut acc = 0.0;
        while i < self.plateaus() && j < other.plateaus() {
            let right = self.breaks[i + 1].min(other.breaks[j + 1]);
            acc += (right - left) * self.values[i] * other.values[j];
            left = right;
            if self.breaks[i + 1] <= right {
                i += 1;
            }
            if other.breaks[j + 1] <= right {
                j += 1;
            }
        }
        Ok(acc)
    }
}

/// The Schwarz rearrangement `h#(x) = h*(theta |B_{r(x)}|)` on the model ball
/// of volume `|Omega| / theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub target: SymmetrizationTarget,
    pub star: StepFunction,
    ball_volume: f64,
    /// Geodesic radius of the outer edge of every plateau.
    plateau_radii: Vec<f64>,
}

impl RadialProfile {
    pub fn ball_volume(&self) -> f64 {
        self.ball_volume
    }

    pub fn ball_radius(&self) -> f64 {
        self.plateau_radii[self.plateau_radii.len() - 1]
    }

    pub fn plateau_radii(&self) -> &[f64] {
        &self.plateau_radii
    }

    /// `h#` at geodesic distance `r` from the center.
    pub fn value_at_radius(&self, r: f64) -> Result<f64> {
        let rr = self.ball_radius();
        if !(r >= 0.0) || r > rr * (1.0 + RANGE_SLACK) {
            return Err(Error::domain(format!("radius {r} outside [0, {rr}]")));
        }
        let s = self.target.theta * self.target.model.ball_volume(r.min(rr))?;
        self.star.value_at(s)
    }

    /// `mu_{h#}(t)`, measured as the volume of the model ball `{h# > t}`.
    pub fn distribution(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("level must be >= 0, got {t}")));
        }
        let k = self.star.values().partition_point(|&x| x > t);
        if k == 0 {
            return Ok(0.0);
        }
        self.target.model.ball_volume(self.plateau_radii[k - 1])
    }

    /// `(h#)*`, which equals `s -> h*(theta s)`.
    pub fn rearranged(&self) -> StepFunction {
        self.star
            .stretched(1.0 / self.target.theta)
            .expect("theta is validated positive")
    }
}

/// Schwarz rearrangement of `h` onto the ball of `target`.
pub fn schwarz_profile(h: &WeightedField, target: &SymmetrizationTarget) -> Result<RadialProfile> {
    let star = h.decreasing_rearrangement();
    let ball_volume = target.ball_volume_for(star.total_volume())?;
    let plateau_radii = star.breaks()[1..]
        .iter()
        .map(|b| target.model.ball_radius((b / target.theta).min(ball_volume)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialProfile {
        target: *target,
        star,
        ball_volume,
        plateau_radii,
    })
}

/// Both sides of the Hardy-Littlewood inequality `int f g <= int f* g*`.
pub fn hardy_littlewood_pair(f: &WeightedField, g: &WeightedField) -> Result<(f64, f64)> {
    f.same_cells(g)?;
    let lhs = f
        .cells()
        .zip(g.values())
        .map(|((v, a), b)| v * a * b)
        .sum();
    let rhs = f
        .decreasing_rearrangement()
        .product_integral(&g.decreasing_rearrangement())?;
    Ok((lhs, rhs))
}

/// Both sides of `int_{h > s} f <= int_0^{mu_h(s)} f*`.
pub fn truncated_concentration_bound(
    f: &WeightedField,
    h: &WeightedField,
    s: f64,
) -> Result<(f64, f64)> {
    f.same_cells(h)?;
    let mu = h.distribution(s)?;
    let lhs = f
        .cells()
        .zip(h.values())
        .filter(|&(_, &hv)| hv > s)
        .map(|((v, fv), _)| v * fv)
        .sum();
    let rhs = f.decreasing_rearrangement().integral_to(mu)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelSpace;
    use std::f64::consts::PI;

    fn sample() -> WeightedField {
        WeightedField::from_cells(&[(1.0, 3.0), (2.0, 1.0)]).unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(WeightedField::from_cells(&[]).is_err());
        assert!(WeightedField::from_cells(&[(0.0, 1.0)]).is_err());
        assert!(WeightedField::from_cells(&[(1.0, -1.0)]).is_err());
        assert!(WeightedField::from_cells(&[(1.0, f64::NAN)]).is_err());
        assert!(WeightedField::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn distribution_examples() {
        let h = sample();
        assert_eq!(h.distribution(2.0).unwrap(), 1.0);
        assert_eq!(h.distribution(3.0).unwrap(), 0.0);
        assert_eq!(h.distribution(10.0).unwrap(), 0.0);
        assert_eq!(h.distribution(0.0).unwrap(), 3.0);
        assert!(h.distribution(-1.0).is_err());
    }

    #[test]
    fn rearrangement_examples() {
        let star = sample().decreasing_rearrangement();
        assert_eq!(star.breaks(), &[0.0, 1.0, 3.0]);
        assert_eq!(star.values(), &[3.0, 1.0]);
        assert_eq!(star.value_at(0.5).unwrap(), 3.0);
        assert_eq!(star.value_at(2.0).unwrap(), 1.0);
        assert_eq!(star.value_at(0.0).unwrap(), 3.0);
        assert_eq!(star.value_at(3.0).unwrap(), 1.0);
        assert!(star.value_at(3.5).is_err());
        assert!(star.value_at(-0.1).is_err());

        let c = WeightedField::from_cells(&[(0.5, 2.0), (1.5, 2.0), (1.0, 2.0)]).unwrap();
        let cs = c.decreasing_rearrangement();
        assert_eq!(cs.values(), &[2.0]);
        assert_eq!(cs.breaks(), &[0.0, 3.0]);
    }

    #[test]
    fn rearrangement_is_permutation_invariant() {
        let a = WeightedField::from_cells(&[(1.0, 2.0), (2.0, 5.0), (0.5, 2.0), (1.0, 0.0)]).unwrap();
        let b = WeightedField::from_cells(&[(1.0, 0.0), (0.5, 2.0), (1.0, 2.0), (2.0, 5.0)]).unwrap();
        assert_eq!(a.decreasing_rearrangement(), b.decreasing_rearrangement());
    }

    #[test]
    fn step_function_validation() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(StepFunction::new(vec![0.5, 1.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0, 1.0], vec![2.0, 1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0, 2.0], vec![2.0, 0.0]).is_ok());
    }

    #[test]
    fn concentration_examples() {
        let one = StepFunction::constant(1.0, 2.0).unwrap();
        assert_eq!(one.concentration(1.5, 1.0).unwrap(), 1.5);
        assert!((one.concentration(3.0, 0.5).unwrap() - 3.0).abs() < 1e-15);
        let star = sample().decreasing_rearrangement();
        assert_eq!(star.concentration(2.0, 1.0).unwrap(), 4.0);
        assert!(star.concentration(4.0, 1.0).is_err());
        assert!(star.concentration(1.0, 0.0).is_err());
    }

    #[test]
    fn average_uses_exact_integrals() {
        let star = sample().decreasing_rearrangement();
        assert!((star.average(0.5, 1.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(star.average(1.0, 1.0).is_err());
    }

    #[test]
    fn schwarz_examples() {
        let flat = SymmetrizationTarget::new(ModelSpace::flat(2), 1.0).unwrap();
        let c = WeightedField::from_cells(&[(1.0, 4.0), (2.0, 4.0)]).unwrap();
        let prof = schwarz_profile(&c, &flat).unwrap();
        assert!((prof.ball_volume() - 3.0).abs() < 1e-15);
        for r in [0.0, 0.3, prof.ball_radius()] {
            assert_eq!(prof.value_at_radius(r).unwrap(), 4.0);
        }

        let prof = schwarz_profile(&sample(), &flat).unwrap();
        assert_eq!(prof.value_at_radius(0.99 / PI.sqrt()).unwrap(), 3.0);
        assert_eq!(prof.value_at_radius(1.01 / PI.sqrt()).unwrap(), 1.0);
        assert!((prof.ball_radius() - (3.0 / PI).sqrt()).abs() < 1e-15);
        assert!(prof.value_at_radius(1.01 * (3.0 / PI).sqrt()).is_err());

        let half = SymmetrizationTarget::new(ModelSpace::flat(2), 0.5).unwrap();
        let prof = schwarz_profile(&sample(), &half).unwrap();
        assert!((prof.ball_volume() - 6.0).abs() < 1e-15);
        let rs = prof.rearranged();
        assert_eq!(rs.breaks(), &[0.0, 2.0, 6.0]);
        assert_eq!(rs.values(), &[3.0, 1.0]);
    }

    #[test]
    fn schwarz_rejects_overfull_sphere() {
        let s2 = SymmetrizationTarget::new(ModelSpace::sphere(1.0, 2).unwrap(), 0.5).unwrap();
        let big = WeightedField::from_cells(&[(7.0, 1.0)]).unwrap();
        assert!(schwarz_profile(&big, &s2).is_err());
    }

    #[test]
    fn hardy_littlewood_examples() {
        let f = WeightedField::from_cells(&[(1.0, 2.0), (1.0, 0.0)]).unwrap();
        let g = WeightedField::from_cells(&[(1.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_eq!(hardy_littlewood_pair(&f, &g).unwrap(), (0.0, 4.0));
        let (l, r) = hardy_littlewood_pair(&sample(), &sample()).unwrap();
        assert!((l - r).abs() < 1e-15);
        let other = WeightedField::from_cells(&[(2.0, 1.0), (1.0, 3.0)]).unwrap();
        assert!(hardy_littlewood_pair(&sample(), &other).is_err());
    }

    #[test]
    fn truncated_examples() {
        let f = sample();
        let (l, r) = truncated_concentration_bound(&f, &f, 2.0).unwrap();
        assert_eq!((l, r), (3.0, 3.0));
        assert_eq!(truncated_concentration_bound(&f, &f, 5.0).unwrap(), (0.0, 0.0));
    }
}
