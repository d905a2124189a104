//! Metric quantities of the model spaces: Euclidean space (`kappa == 0`) and
//! the round sphere of curvature `kappa > 0`.
//!
//! Everything here is closed form except the inverse of the spherical ball
//! volume, which is found by bisection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Bisection runs until the midpoint stops moving (well below 1e-13 in r).
const BISECTION_MAX_ITERATIONS: usize = 200;

/// Volume of the unit ball in `R^n`, via `omega_n = 2 pi / n * omega_{n-2}`.
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / f64::from(n) * unit_ball_volume(n - 2),
    }
}

/// `int_0^x sin^m(t) dt`, by the reduction formula.
fn sine_power_integral(m: u32, x: f64) -> f64 {
    match m {
        0 => x,
        1 => {
            let half = (0.5 * x).sin();
            2.0 * half * half
        }
        _ => {
            let mf = f64::from(m);
            -x.sin().powi(m as i32 - 1) * x.cos() / mf
                + (mf - 1.0) / mf * sine_power_integral(m - 2, x)
        }
    }
}

/// The space form `M_kappa` of dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub kappa: f64,
    pub n: u32,
}

impl ModelSpace {
    pub fn new(kappa: f64, n: u32) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::domain(format!(
                "curvature must be finite and >= 0, got {kappa}"
            )));
        }
        if n < 2 {
            return Err(Error::domain(format!("dimension must be >= 2, got {n}")));
        }
        Ok(Self { kappa, n })
    }

    pub fn flat(n: u32) -> Self {
        Self { kappa: 0.0, n }
    }

    pub fn sphere(kappa: f64, n: u32) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::domain("a sphere needs kappa > 0"));
        }
        Self::new(kappa, n)
    }

    pub fn is_flat(&self) -> bool {
        self.kappa == 0.0
    }

    /// `omega_n`.
    pub fn omega(&self) -> f64 {
        unit_ball_volume(self.n)
    }

    /// Area of the unit sphere `S^{n-1}`, i.e. `n omega_n`.
    pub fn unit_sphere_area(&self) -> f64 {
        f64::from(self.n) * self.omega()
    }

    /// Largest admissible geodesic radius (`pi / sqrt(kappa)`), infinite when flat.
    pub fn max_radius(&self) -> f64 {
        if self.is_flat() {
            f64::INFINITY
        } else {
            PI / self.kappa.sqrt()
        }
    }

    /// Total volume `|M_kappa|`; infinite when flat.
    pub fn capacity(&self) -> f64 {
        if self.is_flat() {
            f64::INFINITY
        } else {
            // |S^n| = (n + 1) omega_{n+1}, scaled by kappa^{-n/2}
            f64::from(self.n + 1) * unit_ball_volume(self.n + 1)
                / self.kappa.powf(0.5 * f64::from(self.n))
        }
    }

    /// The warping function of geodesic polar coordinates: `r` or `sin(sqrt(kappa) r)/sqrt(kappa)`.
    pub fn warp(&self, r: f64) -> f64 {
        if self.is_flat() {
            r
        } else {
            let k = self.kappa.sqrt();
            (k * r).sin() / k
        }
    }

    /// Derivative of [`warp`](Self::warp).
    pub fn warp_derivative(&self, r: f64) -> f64 {
        if self.is_flat() {
            1.0
        } else {
            (self.kappa.sqrt() * r).cos()
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r >= 0.0) || r > self.max_radius() * (1.0 + 1e-14) {
            return Err(Error::domain(format!(
                "geodesic radius {r} outside [0, {}]",
                self.max_radius()
            )));
        }
        Ok(())
    }

    /// `|B_r|` in `M_kappa`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.ball_volume_unchecked(r.min(self.max_radius())))
    }

    fn ball_volume_unchecked(&self, r: f64) -> f64 {
        if self.is_flat() {
            self.omega() * r.powi(self.n as i32)
        } else {
            let k = self.kappa.sqrt();
            self.unit_sphere_area() * sine_power_integral(self.n - 1, k * r)
                / k.powi(self.n as i32)
        }
    }

    /// Geodesic radius of the ball of volume `v`.
    pub fn ball_radius(&self, v: f64) -> Result<f64> {
        let cap = self.capacity();
        if !(v >= 0.0) || v > cap * (1.0 + 1e-12) {
            return Err(Error::domain(format!("volume {v} outside [0, {cap}]")));
        }
        if self.is_flat() {
            return Ok((v / self.omega()).powf(1.0 / f64::from(self.n)));
        }
        let v = v.min(cap);
        let (mut lo, mut hi) = (0.0, self.max_radius());
        for _ in 0..BISECTION_MAX_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.ball_volume_unchecked(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Area of the geodesic sphere of radius `r`.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.unit_sphere_area() * self.warp(r).max(0.0).powi(self.n as i32 - 1))
    }

    /// Isoperimetric profile `Phi(s)`: boundary area of the geodesic ball of volume `s`.
    pub fn isoperimetric_profile(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain(format!(
                "isoperimetric profile needs s > 0, got {s}"
            )));
        }
        let r = self.ball_radius(s)?;
        self.sphere_area(r)
    }
}

/// Asymptotic volume ratio of a flat cone with the given total angle.
pub fn theta_for_cone(total_angle: f64) -> Result<f64> {
    if !(total_angle > 0.0 && total_angle <= 2.0 * PI * (1.0 + 1e-15)) {
        return Err(Error::domain(format!(
            "cone angle must lie in (0, 2 pi], got {total_angle}"
        )));
    }
    Ok((total_angle / (2.0 * PI)).min(1.0))
}

/// The ball problem a domain is compared against: model space, volume ratio
/// `theta` and the admissible volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationTarget {
    pub model: ModelSpace,
    pub theta: f64,
}

impl SymmetrizationTarget {
    pub fn new(model: ModelSpace, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::domain(format!(
                "volume ratio theta must lie in (0, 1], got {theta}"
            )));
        }
        Ok(Self { model, theta })
    }

    pub fn capacity(&self) -> f64 {
        self.model.capacity()
    }

    /// Volume `|Omega|/theta` of the symmetrized ball for a domain of volume `domain_volume`.
    pub fn ball_volume_for(&self, domain_volume: f64) -> Result<f64> {
        let a = domain_volume / self.theta;
        if a > self.capacity() * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "symmetrized volume {a} exceeds model capacity {}",
                self.capacity()
            )));
        }
        Ok(a.min(self.capacity()))
    }
}
