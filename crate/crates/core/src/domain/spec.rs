use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{theta_for_cone, ModelSpace};

/// How a homogeneous Dirichlet condition closes the stencil at a boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClosure {
    /// Zero on the cell face, half a cell from the center (second order).
    #[default]
    Face,
    /// Zero at the eliminated exterior cell center, a full cell away.
    ExteriorCenter,
}

/// Smooth shapes cut out of a Cartesian grid by their indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskShape {
    Disc { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2] },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
}

impl MaskShape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            MaskShape::Disc { center, radius } => {
                (x - center[0]).hypot(y - center[1]) < *radius
            }
            MaskShape::Ellipse { center, semi_axes } => {
                let u = (x - center[0]) / semi_axes[0];
                let v = (y - center[1]) / semi_axes[1];
                u * u + v * v < 1.0
            }
            MaskShape::Annulus {
                center,
                inner,
                outer,
            } => {
                let d = (x - center[0]).hypot(y - center[1]);
                d > *inner && d < *outer
            }
        }
    }

    /// `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        let (c, hx, hy) = match self {
            MaskShape::Disc { center, radius } => (center, *radius, *radius),
            MaskShape::Ellipse { center, semi_axes } => (center, semi_axes[0], semi_axes[1]),
            MaskShape::Annulus { center, outer, .. } => (center, *outer, *outer),
        };
        [c[0] - hx, c[1] - hy, c[0] + hx, c[1] + hy]
    }

    pub fn area(&self) -> f64 {
        match self {
            MaskShape::Disc { radius, .. } => PI * radius * radius,
            MaskShape::Ellipse { semi_axes, .. } => PI * semi_axes[0] * semi_axes[1],
            MaskShape::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            MaskShape::Disc { radius, .. } => *radius > 0.0,
            MaskShape::Ellipse { semi_axes, .. } => semi_axes[0] > 0.0 && semi_axes[1] > 0.0,
            MaskShape::Annulus { inner, outer, .. } => *inner >= 0.0 && outer > inner,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config("shape", "shape dimensions must be positive"))
        }
    }
}

/// Geometry of the domain together with its resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainKind {
    /// `[x0, x0 + width] x [y0, y0 + height]`.
    FlatRectangle {
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        y0: f64,
        width: f64,
        height: f64,
        cells_per_unit: usize,
    },
    /// `[0, size]^2` with the upper-right quarter `[size/2, size]^2` removed.
    FlatLshape {
        #[serde(default = "one")]
        size: f64,
        cells_per_unit: usize,
    },
    FlatMask {
        mask: MaskShape,
        cells_per_unit: usize,
    },
    PolarDisc {
        radius: f64,
        radial_cells: usize,
        angular_cells: usize,
    },
    PolarAnnulus {
        inner: f64,
        outer: f64,
        radial_cells: usize,
        angular_cells: usize,
        #[serde(default = "yes")]
        inner_dirichlet: bool,
    },
    /// Geodesic disc about the apex of a flat cone with total angle `angle`.
    ConePolar {
        angle: f64,
        radius: f64,
        radial_cells: usize,
        angular_cells: usize,
    },
    /// Geodesic disc of geodesic radius `radius` about the north pole.
    SphereCap {
        radius: f64,
        radial_cells: usize,
        angular_cells: usize,
    },
    /// Band between two geodesic distances from the north pole.
    SphereBand {
        inner: f64,
        outer: f64,
        radial_cells: usize,
        angular_cells: usize,
    },
    /// Geodesic disc about an arbitrary point, cut from a latitude-longitude grid.
    SphereMask {
        /// Geodesic distance of the center from the north pole, and its longitude.
        center: [f64; 2],
        radius: f64,
        radial_cells: usize,
        angular_cells: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// A domain kind plus the discretization choices that are not geometric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default)]
    pub boundary_closure: BoundaryClosure,
}

impl From<DomainKind> for DomainSpec {
    fn from(kind: DomainKind) -> Self {
        Self {
            kind,
            boundary_closure: BoundaryClosure::Face,
        }
    }
}

const MIN_CELLS: usize = 4;

impl DomainSpec {
    pub fn is_spherical(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::SphereCap { .. } | DomainKind::SphereBand { .. } | DomainKind::SphereMask { .. }
        )
    }

    pub fn is_cone(&self) -> bool {
        matches!(self.kind, DomainKind::ConePolar { .. })
    }

    /// Volume ratio implied by the geometry: the cone's `angle / 2 pi`, else 1.
    pub fn natural_theta(&self) -> Result<f64> {
        match self.kind {
            DomainKind::ConePolar { angle, .. } => theta_for_cone(angle),
            _ => Ok(1.0),
        }
    }

    /// True for the geodesic balls whose Schwarz symmetrization is themselves.
    pub fn is_model_ball(&self) -> bool {
        matches!(
            self.kind,
            DomainKind::PolarDisc { .. } | DomainKind::SphereCap { .. }
        )
    }

    /// Checks the parameters against the model the domain lives in.
    pub fn validate(&self, model: &ModelSpace) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be positive, got {v}")))
            }
        };
        let cells = |name: &str, n: usize| {
            if n >= MIN_CELLS {
                Ok(())
            } else {
                Err(Error::config(name, format!("needs at least {MIN_CELLS} cells, got {n}")))
            }
        };
        if self.is_spherical() != !model.is_flat() {
            return Err(Error::config(
                "kind",
                "spherical domains need kappa > 0 and flat domains need kappa = 0",
            ));
        }
        match &self.kind {
            DomainKind::FlatRectangle {
                width,
                height,
                cells_per_unit,
                ..
            } => {
                positive("width", *width)?;
                positive("height", *height)?;
                cells("cells_per_unit", (width.min(*height) * *cells_per_unit as f64).round() as usize)?;
            }
            DomainKind::FlatLshape {
                size,
                cells_per_unit,
            } => {
                positive("size", *size)?;
                cells("cells_per_unit", (size * *cells_per_unit as f64).round() as usize)?;
            }
            DomainKind::FlatMask {
                mask,
                cells_per_unit,
            } => {
                mask.validate().map_err(|e| e.in_field("mask"))?;
                let b = mask.bounding_box();
                let extent = (b[2] - b[0]).min(b[3] - b[1]);
                cells("cells_per_unit", (extent * *cells_per_unit as f64).round() as usize)?;
            }
            DomainKind::PolarDisc {
                radius,
                radial_cells,
                angular_cells,
            }
            | DomainKind::ConePolar {
                radius,
                radial_cells,
                angular_cells,
                ..
            } => {
                positive("radius", *radius)?;
                cells("radial_cells", *radial_cells)?;
                cells("angular_cells", *angular_cells)?;
                if let DomainKind::ConePolar { angle, .. } = self.kind {
                    theta_for_cone(angle).map_err(|e| e.in_field("angle"))?;
                }
            }
            DomainKind::PolarAnnulus {
                inner,
                outer,
                radial_cells,
                angular_cells,
                ..
            } => {
                positive("inner", *inner)?;
                if !(outer > inner) {
                    return Err(Error::config("outer", "must exceed inner"));
                }
                cells("radial_cells", *radial_cells)?;
                cells("angular_cells", *angular_cells)?;
            }
            DomainKind::SphereCap {
                radius,
                radial_cells,
                angular_cells,
            } => {
                positive("radius", *radius)?;
                if *radius > model.max_radius() {
                    return Err(Error::config("radius", "exceeds the antipodal distance"));
                }
                cells("radial_cells", *radial_cells)?;
                cells("angular_cells", *angular_cells)?;
            }
            DomainKind::SphereBand {
                inner,
                outer,
                radial_cells,
                angular_cells,
            } => {
                positive("inner", *inner)?;
                if !(outer > inner) || *outer > model.max_radius() {
                    return Err(Error::config(
                        "outer",
                        "must exceed inner and not pass the antipode",
                    ));
                }
                cells("radial_cells", *radial_cells)?;
                cells("angular_cells", *angular_cells)?;
            }
            DomainKind::SphereMask {
                center,
                radius,
                radial_cells,
                angular_cells,
            } => {
                positive("radius", *radius)?;
                if !(0.0..=model.max_radius()).contains(&center[0]) {
                    return Err(Error::config("center", "colatitude outside [0, pi/sqrt(kappa)]"));
                }
                if *radius >= model.max_radius() {
                    return Err(Error::config("radius", "mask covers the whole sphere"));
                }
                cells("radial_cells", *radial_cells)?;
                cells("angular_cells", *angular_cells)?;
            }
        }
        Ok(())
    }

    /// Same geometry with every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        match &mut out.kind {
            DomainKind::FlatRectangle { cells_per_unit, .. }
            | DomainKind::FlatLshape { cells_per_unit, .. }
            | DomainKind::FlatMask { cells_per_unit, .. } => *cells_per_unit *= factor,
            DomainKind::PolarDisc {
                radial_cells,
                angular_cells,
                ..
            }
            | DomainKind::PolarAnnulus {
                radial_cells,
                angular_cells,
                ..
            }
            | DomainKind::ConePolar {
                radial_cells,
                angular_cells,
                ..
            }
            | DomainKind::SphereCap {
                radial_cells,
                angular_cells,
                ..
            }
            | DomainKind::SphereBand {
                radial_cells,
                angular_cells,
                ..
            }
            | DomainKind::SphereMask {
                radial_cells,
                angular_cells,
                ..
            } => {
                *radial_cells *= factor;
                *angular_cells *= factor;
            }
        }
        out
    }

    /// Characteristic mesh spacing: the Cartesian step or the radial step.
    pub fn spacing(&self, model: &ModelSpace) -> f64 {
        match &self.kind {
            DomainKind::FlatRectangle { cells_per_unit, .. }
            | DomainKind::FlatLshape { cells_per_unit, .. }
            | DomainKind::FlatMask { cells_per_unit, .. } => 1.0 / *cells_per_unit as f64,
            DomainKind::PolarDisc {
                radius,
                radial_cells,
                ..
            }
            | DomainKind::ConePolar {
                radius,
                radial_cells,
                ..
            }
            | DomainKind::SphereCap {
                radius,
                radial_cells,
                ..
            } => radius / *radial_cells as f64,
            DomainKind::PolarAnnulus {
                inner,
                outer,
                radial_cells,
                ..
            }
            | DomainKind::SphereBand {
                inner,
                outer,
                radial_cells,
                ..
            } => (outer - inner) / *radial_cells as f64,
            DomainKind::SphereMask { radial_cells, .. } => {
                model.max_radius() / *radial_cells as f64
            }
        }
    }

    /// Exact area of the continuous domain (for masks: of the smooth shape).
    pub fn analytic_volume(&self, model: &ModelSpace) -> Result<f64> {
        Ok(match &self.kind {
            DomainKind::FlatRectangle { width, height, .. } => width * height,
            DomainKind::FlatLshape { size, .. } => 0.75 * size * size,
            DomainKind::FlatMask { mask, .. } => mask.area(),
            DomainKind::PolarDisc { radius, .. } => PI * radius * radius,
            DomainKind::PolarAnnulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
            DomainKind::ConePolar { angle, radius, .. } => 0.5 * angle * radius * radius,
            DomainKind::SphereCap { radius, .. } | DomainKind::SphereMask { radius, .. } => {
                model.ball_volume(*radius)?
            }
            DomainKind::SphereBand { inner, outer, .. } => {
                model.ball_volume(*outer)? - model.ball_volume(*inner)?
            }
        })
    }
}
