//! Data functions `f` and `g`: constants, expressions or named presets,
//! sampled at cell centers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{Cell, DomainKind, MeshedDomain};
use crate::error::{Error, Result};
use crate::expr::{Expr, Vars};
use crate::special::{bessel_j0, J0_FIRST_ZERO};

fn one() -> f64 {
    1.0
}

/// Region for the indicator preset, in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    /// Intrinsic geodesic disc.
    Disc { center: [f64; 2], radius: f64 },
    Box { min: [f64; 2], max: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-d^2 / (2 width^2))` with `d` the intrinsic distance to `center`.
    Gaussian {
        center: [f64; 2],
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Nonnegative fundamental mode of the domain: the first Dirichlet
    /// eigenfunction on rectangles, discs, cone discs and annuli, the
    /// bounding-box mode on other flat shapes, and a radial Bessel or cosine
    /// bump on spherical regions.
    Eigenmode {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `sum_k coeffs[k] r^k`.
    RadialPoly { coeffs: Vec<f64> },
    Indicator {
        region: Region,
        #[serde(default = "one")]
        value: f64,
    },
}

/// A data function as written in a configuration file: a number, an
/// expression in `x`, `y`, `r`, or a preset object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Constant(f64),
    Expression(String),
    Preset(Preset),
}

impl From<f64> for SourceSpec {
    fn from(v: f64) -> Self {
        SourceSpec::Constant(v)
    }
}

impl SourceSpec {
    pub fn zero() -> Self {
        SourceSpec::Constant(0.0)
    }

    /// Checks everything that can be checked without a mesh.
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Constant(c) if !(c.is_finite() && *c >= 0.0) => {
                Err(Error::config("", format!("constant must be finite and >= 0, got {c}")))
            }
            SourceSpec::Expression(src) => Expr::parse(src).map(|_| ()),
            SourceSpec::Preset(Preset::Gaussian { width, .. }) if !(*width > 0.0) => {
                Err(Error::config("width", "must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Values at the cell centers of `mesh`; fails on any negative or non-finite value.
    pub fn sample(&self, mesh: &MeshedDomain) -> Result<Vec<f64>> {
        self.validate()?;
        let compiled = match self {
            SourceSpec::Expression(src) => Some(Expr::parse(src)?),
            _ => None,
        };
        let mut out = Vec::with_capacity(mesh.len());
        for cell in mesh.cells() {
            let v = match (self, &compiled) {
                (_, Some(e)) => e.eval(&Vars {
                    x: cell.x,
                    y: cell.y,
                    r: cell.r,
                }),
                (SourceSpec::Constant(c), _) => *c,
                (SourceSpec::Preset(p), _) => eval_preset(p, mesh, cell),
                (SourceSpec::Expression(_), None) => unreachable!(),
            };
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    "",
                    format!(
                        "data must be finite and nonnegative, got {v} at cell center ({:.6}, {:.6})",
                        cell.x, cell.y
                    ),
                ));
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceSpec::Constant(c) if *c == 0.0)
            || matches!(self, SourceSpec::Preset(Preset::Constant { value }) if *value == 0.0)
    }
}

fn eval_preset(p: &Preset, mesh: &MeshedDomain, cell: &Cell) -> f64 {
    match p {
        Preset::Constant { value } => *value,
        Preset::Gaussian {
            center,
            width,
            amplitude,
        } => {
            let d = mesh.chart().distance(cell, *center);
            amplitude * (-0.5 * (d / width).powi(2)).exp()
        }
        Preset::Eigenmode { amplitude } => amplitude * eigenmode(mesh, cell).max(0.0),
        Preset::RadialPoly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * cell.r + c),
        Preset::Indicator { region, value } => {
            let inside = match region {
                Region::Disc { center, radius } => mesh.chart().distance(cell, *center) < *radius,
                Region::Box { min, max } => {
                    cell.x >= min[0] && cell.x <= max[0] && cell.y >= min[1] && cell.y <= max[1]
                }
            };
            if inside {
                *value
            } else {
                0.0
            }
        }
    }
}

fn box_mode(x: f64, y: f64, b: [f64; 4]) -> f64 {
    (PI * (x - b[0]) / (b[2] - b[0])).sin() * (PI * (y - b[1]) / (b[3] - b[1])).sin()
}

fn eigenmode(mesh: &MeshedDomain, cell: &Cell) -> f64 {
    match &mesh.spec().kind {
        DomainKind::FlatRectangle {
            x0,
            y0,
            width,
            height,
            ..
        } => box_mode(cell.x, cell.y, [*x0, *y0, x0 + width, y0 + height]),
        DomainKind::FlatLshape { size, .. } => box_mode(cell.x, cell.y, [0.0, 0.0, *size, *size]),
        DomainKind::FlatMask { mask, .. } => box_mode(cell.x, cell.y, mask.bounding_box()),
        DomainKind::PolarDisc { radius, .. }
        | DomainKind::ConePolar { radius, .. }
        | DomainKind::SphereCap { radius, .. } => bessel_j0(J0_FIRST_ZERO * cell.r / radius),
        DomainKind::PolarAnnulus { inner, outer, .. }
        | DomainKind::SphereBand { inner, outer, .. } => {
            (PI * (cell.r - inner) / (outer - inner)).sin()
        }
        DomainKind::SphereMask { center, radius, .. } => {
            let point = [center[0] * center[1].cos(), center[0] * center[1].sin()];
            let d = mesh.chart().distance(cell, point);
            (0.5 * PI * d / radius).cos()
        }
    }
}


/// Human-readable list of the data presets and domain kinds, each with an
/// example that parses as written.
pub fn preset_catalog() -> String {
    use crate::domain::{BoundaryClosure, DomainSpec, MaskShape};

    let data: [(&str, SourceSpec); 7] = [
        ("number", SourceSpec::Constant(1.0)),
        ("expression in x, y, r", SourceSpec::Expression("exp(-4*r^2)".into())),
        ("constant", SourceSpec::Preset(Preset::Constant { value: 1.0 })),
        (
            "gaussian",
            SourceSpec::Preset(Preset::Gaussian { center: [0.3, 0.2], width: 0.15, amplitude: 1.0 }),
        ),
        ("eigenmode", SourceSpec::Preset(Preset::Eigenmode { amplitude: 1.0 })),
        ("radial_poly", SourceSpec::Preset(Preset::RadialPoly { coeffs: vec![1.0, 0.0, -1.0] })),
        (
            "indicator",
            SourceSpec::Preset(Preset::Indicator {
                region: Region::Disc { center: [0.0, 0.0], radius: 0.5 },
                value: 1.0,
            }),
        ),
    ];
    let domains: [(&str, DomainKind); 9] = [
        (
            "flat_rectangle",
            DomainKind::FlatRectangle { x0: 0.0, y0: 0.0, width: 1.0, height: 1.0, cells_per_unit: 128 },
        ),
        ("flat_lshape", DomainKind::FlatLshape { size: 1.0, cells_per_unit: 128 }),
        (
            "flat_mask",
            DomainKind::FlatMask {
                mask: MaskShape::Ellipse { center: [0.0, 0.0], semi_axes: [0.6, 0.35] },
                cells_per_unit: 128,
            },
        ),
        ("polar_disc", DomainKind::PolarDisc { radius: 1.0, radial_cells: 128, angular_cells: 256 }),
        (
            "polar_annulus",
            DomainKind::PolarAnnulus {
                inner: 0.3,
                outer: 1.0,
                radial_cells: 90,
                angular_cells: 256,
                inner_dirichlet: true,
            },
        ),
        (
            "cone_polar (theta = angle / 2 pi)",
            DomainKind::ConePolar { angle: PI, radius: 1.0, radial_cells: 128, angular_cells: 256 },
        ),
        (
            "sphere_cap (kappa > 0)",
            DomainKind::SphereCap { radius: 1.0, radial_cells: 128, angular_cells: 256 },
        ),
        (
            "sphere_band (kappa > 0)",
            DomainKind::SphereBand { inner: 0.3, outer: 1.0, radial_cells: 90, angular_cells: 256 },
        ),
        (
            "sphere_mask (kappa > 0)",
            DomainKind::SphereMask { center: [0.6, 0.0], radius: 0.5, radial_cells: 128, angular_cells: 256 },
        ),
    ];
    let mut out = String::from("data presets (fields \"f\" and \"g\"):\n");
    for (name, spec) in &data {
        let json = serde_json::to_string(spec).expect("presets serialize");
        out.push_str(&format!("  {name:<24} {json}\n"));
    }
    out.push_str("\ndomain kinds (field \"domain\"; optional \"boundary_closure\": \"face\" | \"exterior_center\"):\n");
    for (name, kind) in domains {
        let spec = DomainSpec { kind, boundary_closure: BoundaryClosure::Face };
        let json = serde_json::to_string(&spec).expect("domains serialize");
        out.push_str(&format!("  {name:<36} {json}\n"));
    }
    out
}
