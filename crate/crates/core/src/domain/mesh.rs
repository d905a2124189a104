//! Cell-centered finite-volume meshes.
//!
//! Flat domains use square Cartesian cells. Discs, annuli, cones and
//! spherical regions use geodesic polar cells `(rho, phi)` with the metric
//! `d rho^2 + w(rho)^2 d phi^2`, where `w` is the model's warping function and
//! `phi` is periodic with the cone angle (`2 pi` otherwise). Cell volumes are
//! exact integrals of the area element. The apex/pole is a zero-length face,
//! so it carries no flux.
//!
//! Fluxes are stored as symmetric face conductances `c_ij`, so that
//! `vol_i (Lap u)_i = sum_j c_ij (u_j - u_i) - b_i u_i` with `b_i` the
//! Dirichlet coupling of cell `i`.

use std::f64::consts::PI;

use crate::domain::spec::{BoundaryClosure, DomainKind, DomainSpec, MaskShape};
use crate::error::{Error, Result};
use crate::geometry::ModelSpace;

/// Coordinate chart the cells are laid out in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    Cartesian,
    /// Geodesic polar coordinates about the origin/apex/north pole.
    GeodesicPolar { model: ModelSpace, period: f64 },
}

impl Chart {
    /// Intrinsic distance between a cell center and a point given in chart
    /// coordinates (`x = rho cos phi`, `y = rho sin phi` for polar charts).
    pub fn distance(&self, cell: &Cell, point: [f64; 2]) -> f64 {
        match *self {
            Chart::Cartesian => (cell.x - point[0]).hypot(cell.y - point[1]),
            Chart::GeodesicPolar { model, period } => {
                let rho0 = point[0].hypot(point[1]);
                let phi0 = point[1].atan2(point[0]).rem_euclid(period);
                let mut delta = (cell.phi - phi0).rem_euclid(period);
                delta = delta.min(period - delta);
                polar_distance(&model, cell.r, rho0, delta)
            }
        }
    }
}

fn polar_distance(model: &ModelSpace, rho: f64, rho0: f64, delta: f64) -> f64 {
    if model.is_flat() {
        if delta >= PI {
            rho + rho0
        } else {
            (rho * rho + rho0 * rho0 - 2.0 * rho * rho0 * delta.cos())
                .max(0.0)
                .sqrt()
        }
    } else {
        let k = model.kappa.sqrt();
        let c = (k * rho).cos() * (k * rho0).cos()
            + (k * rho).sin() * (k * rho0).sin() * delta.cos();
        c.clamp(-1.0, 1.0).acos() / k
    }
}

/// One control volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    /// Distance from the origin (flat) or geodesic radius (polar charts).
    pub r: f64,
    /// Polar angle; zero for Cartesian cells.
    pub phi: f64,
    pub volume: f64,
}

/// The Laplacian at one cell: `(Lap u)_i = diagonal u_i + sum w_j u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilRow {
    pub diagonal: f64,
    pub neighbors: Vec<(usize, f64)>,
}

/// A discretized domain with its assembled Dirichlet Laplacian.
#[derive(Debug, Clone)]
pub struct MeshedDomain {
    spec: DomainSpec,
    model: ModelSpace,
    theta: f64,
    chart: Chart,
    spacing: f64,
    cells: Vec<Cell>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    conductance: Vec<f64>,
    boundary: Vec<f64>,
    /// `sum_j c_ij + b_i`.
    total_conductance: Vec<f64>,
    lines: Vec<Line>,
}

/// A chain of cells along a ring of a polar grid. Every cell lies on exactly
/// one line; Cartesian cells form single-cell lines.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Line {
    pub cells: Vec<usize>,
    /// `couplings[k]` links `cells[k]` and `cells[k + 1]`; a periodic line has
    /// one more, closing the loop.
    pub couplings: Vec<f64>,
}

impl Line {
    pub fn is_periodic(&self) -> bool {
        self.couplings.len() == self.cells.len() && self.cells.len() > 1
    }
}

/// Face where the candidate grid ends.
#[derive(Clone, Copy, PartialEq)]
enum EdgeFace {
    /// Zero-length face at the apex or a pole.
    Degenerate,
    /// Homogeneous Dirichlet face.
    Dirichlet,
    /// Zero-flux face.
    Insulated,
}

struct PolarGrid {
    model: ModelSpace,
    rho0: f64,
    drho: f64,
    nr: usize,
    nphi: usize,
    period: f64,
    inner: EdgeFace,
    outer: EdgeFace,
}

impl PolarGrid {
    fn edge(&self, i: usize) -> f64 {
        self.rho0 + i as f64 * self.drho
    }

    fn dphi(&self) -> f64 {
        self.period / self.nphi as f64
    }

    fn cell_volume(&self, i: usize) -> f64 {
        let (a, b) = (self.edge(i), self.edge(i + 1));
        let radial = if self.model.is_flat() {
            0.5 * (b - a) * (b + a)
        } else {
            let k = self.model.kappa.sqrt();
            // cos(ka) - cos(kb) = 2 sin(k(a+b)/2) sin(k(b-a)/2)
            2.0 * (0.5 * k * (a + b)).sin() * (0.5 * k * (b - a)).sin() / (k * k)
        };
        radial * self.dphi()
    }
}

/// Builds the mesh and assembles the Laplacian for `spec` in `model`.
pub fn build_domain(spec: &DomainSpec, model: &ModelSpace, theta: f64) -> Result<MeshedDomain> {
    spec.validate(model)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::config("theta", format!("must lie in (0, 1], got {theta}")));
    }
    let closure = match spec.boundary_closure {
        BoundaryClosure::Face => 2.0,
        BoundaryClosure::ExteriorCenter => 1.0,
    };
    let mut b = Builder::default();
    let chart = match &spec.kind {
        DomainKind::FlatRectangle {
            x0,
            y0,
            width,
            height,
            cells_per_unit,
        } => {
            let n = *cells_per_unit as f64;
            let nx = (width * n).round() as usize;
            let ny = (height * n).round() as usize;
            let (hx, hy) = (width / nx as f64, height / ny as f64);
            b.cartesian(*x0, *y0, nx, ny, hx, hy, closure, |_, _| true);
            Chart::Cartesian
        }
        DomainKind::FlatLshape {
            size,
            cells_per_unit,
        } => {
            let n = (size * *cells_per_unit as f64).round() as usize;
            let h = size / n as f64;
            let half = 0.5 * size;
            b.cartesian(0.0, 0.0, n, n, h, h, closure, |x, y| !(x > half && y > half));
            Chart::Cartesian
        }
        DomainKind::FlatMask {
            mask,
            cells_per_unit,
        } => {
            let [xa, ya, xb, yb] = mask.bounding_box();
            let h = 1.0 / *cells_per_unit as f64;
            let nx = ((xb - xa) / h).ceil() as usize;
            let ny = ((yb - ya) / h).ceil() as usize;
            // center the grid on the bounding box
            let x0 = 0.5 * (xa + xb) - 0.5 * nx as f64 * h;
            let y0 = 0.5 * (ya + yb) - 0.5 * ny as f64 * h;
            let m: &MaskShape = mask;
            b.cartesian(x0, y0, nx, ny, h, h, closure, |x, y| m.contains(x, y));
            Chart::Cartesian
        }
        DomainKind::PolarDisc {
            radius,
            radial_cells,
            angular_cells,
        } => polar(&mut b, model, 0.0, *radius, *radial_cells, *angular_cells, 2.0 * PI,
            EdgeFace::Degenerate, EdgeFace::Dirichlet, closure, |_, _| true),
        DomainKind::PolarAnnulus {
            inner,
            outer,
            radial_cells,
            angular_cells,
            inner_dirichlet,
        } => {
            let inner_face = if *inner_dirichlet {
                EdgeFace::Dirichlet
            } else {
                EdgeFace::Insulated
            };
            polar(&mut b, model, *inner, *outer, *radial_cells, *angular_cells, 2.0 * PI,
                inner_face, EdgeFace::Dirichlet, closure, |_, _| true)
        }
        DomainKind::ConePolar {
            angle,
            radius,
            radial_cells,
            angular_cells,
        } => polar(&mut b, model, 0.0, *radius, *radial_cells, *angular_cells, *angle,
            EdgeFace::Degenerate, EdgeFace::Dirichlet, closure, |_, _| true),
        DomainKind::SphereCap {
            radius,
            radial_cells,
            angular_cells,
        } => {
            let outer = if *radius >= model.max_radius() {
                EdgeFace::Degenerate
            } else {
                EdgeFace::Dirichlet
            };
            polar(&mut b, model, 0.0, *radius, *radial_cells, *angular_cells, 2.0 * PI,
                EdgeFace::Degenerate, outer, closure, |_, _| true)
        }
        DomainKind::SphereBand {
            inner,
            outer,
            radial_cells,
            angular_cells,
        } => {
            let outer_face = if *outer >= model.max_radius() {
                EdgeFace::Degenerate
            } else {
                EdgeFace::Dirichlet
            };
            polar(&mut b, model, *inner, *outer, *radial_cells, *angular_cells, 2.0 * PI,
                EdgeFace::Dirichlet, outer_face, closure, |_, _| true)
        }
        DomainKind::SphereMask {
            center,
            radius,
            radial_cells,
            angular_cells,
        } => {
            let m = *model;
            let (c0, l0) = (center[0], center[1]);
            let rad = *radius;
            polar(&mut b, model, 0.0, model.max_radius(), *radial_cells, *angular_cells, 2.0 * PI,
                EdgeFace::Degenerate, EdgeFace::Degenerate, closure, move |rho, phi| {
                    polar_distance(&m, rho, c0, (phi - l0).rem_euclid(2.0 * PI)) < rad
                })
        }
    };
    if b.cells.is_empty() {
        return Err(Error::config("domain", "mesh has no interior cells"));
    }
    Ok(b.finish(spec.clone(), *model, theta, chart, spec.spacing(model)))
}

#[allow(clippy::too_many_arguments)]
fn polar(
    b: &mut Builder,
    model: &ModelSpace,
    rho0: f64,
    rho1: f64,
    nr: usize,
    nphi: usize,
    period: f64,
    inner: EdgeFace,
    outer: EdgeFace,
    closure: f64,
    inside: impl Fn(f64, f64) -> bool,
) -> Chart {
    let grid = PolarGrid {
        model: *model,
        rho0,
        drho: (rho1 - rho0) / nr as f64,
        nr,
        nphi,
        period,
        inner,
        outer,
    };
    b.polar(&grid, closure, inside);
    Chart::GeodesicPolar {
        model: *model,
        period,
    }
}

#[derive(Default)]
struct Builder {
    cells: Vec<Cell>,
    adjacency: Vec<Vec<(usize, f64)>>,
    boundary: Vec<f64>,
    lines: Vec<Line>,
}

impl Builder {
    /// Registers the candidate cells that pass `inside`, returning the grid-to-cell map.
    fn register(&mut self, n: usize, mut make: impl FnMut(usize) -> Option<Cell>) -> Vec<Option<usize>> {
        (0..n)
            .map(|k| {
                make(k).map(|cell| {
                    self.cells.push(cell);
                    self.adjacency.push(Vec::new());
                    self.boundary.push(0.0);
                    self.cells.len() - 1
                })
            })
            .collect()
    }

    fn link(&mut self, a: usize, b: usize, c: f64) {
        self.adjacency[a].push((b, c));
        self.adjacency[b].push((a, c));
    }

    /// Splits one periodic ring into maximal runs of present cells, joining
    /// the runs that meet across the seam.
    fn add_lines(&mut self, row: &[Option<usize>], coupling: f64) {
        let mut runs: Vec<Vec<usize>> = Vec::new();
        let mut current = Vec::new();
        for slot in row {
            match slot {
                Some(c) => current.push(*c),
                None => {
                    if !current.is_empty() {
                        runs.push(std::mem::take(&mut current));
                    }
                }
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }
        let full = runs.len() == 1 && runs[0].len() == row.len();
        if !full && runs.len() > 1 && row[0].is_some() && row[row.len() - 1].is_some() {
            let first = runs.remove(0);
            runs.last_mut().expect("at least one run").extend(first);
        }
        for cells in runs {
            let links = if full && cells.len() > 2 {
                cells.len()
            } else {
                cells.len() - 1
            };
            self.lines.push(Line {
                cells,
                couplings: vec![coupling; links],
            });
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn cartesian(
        &mut self,
        x0: f64,
        y0: f64,
        nx: usize,
        ny: usize,
        hx: f64,
        hy: f64,
        closure: f64,
        inside: impl Fn(f64, f64) -> bool,
    ) {
        let index = self.register(nx * ny, |k| {
            let (i, j) = (k % nx, k / nx);
            let x = x0 + (i as f64 + 0.5) * hx;
            let y = y0 + (j as f64 + 0.5) * hy;
            inside(x, y).then(|| Cell {
                x,
                y,
                r: x.hypot(y),
                phi: 0.0,
                volume: hx * hy,
            })
        });
        let cx = hy / hx;
        let cy = hx / hy;
        for j in 0..ny {
            for i in 0..nx {
                let Some(a) = index[j * nx + i] else { continue };
                // east and north faces link; every missing neighbor is a Dirichlet face
                let east = (i + 1 < nx).then(|| index[j * nx + i + 1]).flatten();
                let north = (j + 1 < ny).then(|| index[(j + 1) * nx + i]).flatten();
                match east {
                    Some(e) => self.link(a, e, cx),
                    None => self.boundary[a] += closure * cx,
                }
                match north {
                    Some(n) => self.link(a, n, cy),
                    None => self.boundary[a] += closure * cy,
                }
                let west = (i > 0).then(|| index[j * nx + i - 1]).flatten();
                let south = (j > 0).then(|| index[(j - 1) * nx + i]).flatten();
                if west.is_none() {
                    self.boundary[a] += closure * cx;
                }
                if south.is_none() {
                    self.boundary[a] += closure * cy;
                }
            }
        }
    }

    fn polar(&mut self, g: &PolarGrid, closure: f64, inside: impl Fn(f64, f64) -> bool) {
        let (nr, nphi) = (g.nr, g.nphi);
        let dphi = g.dphi();
        let index = self.register(nr * nphi, |k| {
            let (i, j) = (k / nphi, k % nphi);
            let rho = g.rho0 + (i as f64 + 0.5) * g.drho;
            let phi = (j as f64 + 0.5) * dphi;
            inside(rho, phi).then(|| Cell {
                x: rho * phi.cos(),
                y: rho * phi.sin(),
                r: rho,
                phi,
                volume: g.cell_volume(i),
            })
        });
        let radial_face = |i_edge: usize| g.model.warp(g.edge(i_edge)).max(0.0) * dphi / g.drho;
        let edge_face = |face: EdgeFace, i_edge: usize| match face {
            EdgeFace::Dirichlet => closure * radial_face(i_edge),
            EdgeFace::Degenerate | EdgeFace::Insulated => 0.0,
        };
        for i in 0..nr {
            let rho = g.rho0 + (i as f64 + 0.5) * g.drho;
            let angular = g.drho / (g.model.warp(rho) * dphi);
            self.add_lines(&index[i * nphi..(i + 1) * nphi], angular);
            for j in 0..nphi {
                let Some(a) = index[i * nphi + j] else { continue };
                // outward radial face
                if i + 1 < nr {
                    match index[(i + 1) * nphi + j] {
                        Some(o) => self.link(a, o, radial_face(i + 1)),
                        None => self.boundary[a] += closure * radial_face(i + 1),
                    }
                } else {
                    self.boundary[a] += edge_face(g.outer, nr);
                }
                // inward radial face
                if i > 0 {
                    if index[(i - 1) * nphi + j].is_none() {
                        self.boundary[a] += closure * radial_face(i);
                    }
                } else {
                    self.boundary[a] += edge_face(g.inner, 0);
                }
                // angular faces, periodic
                let next = index[i * nphi + (j + 1) % nphi];
                let prev = index[i * nphi + (j + nphi - 1) % nphi];
                match next {
                    Some(o) if o != a => self.link(a, o, angular),
                    Some(_) => {}
                    None => self.boundary[a] += closure * angular,
                }
                if prev.is_none() {
                    self.boundary[a] += closure * angular;
                }
            }
        }
    }

    fn finish(
        self,
        spec: DomainSpec,
        model: ModelSpace,
        theta: f64,
        chart: Chart,
        spacing: f64,
    ) -> MeshedDomain {
        let n = self.cells.len();
        let mut lines = self.lines;
        let mut on_line = vec![false; n];
        for line in &lines {
            for &c in &line.cells {
                on_line[c] = true;
            }
        }
        lines.extend((0..n).filter(|&c| !on_line[c]).map(|c| Line {
            cells: vec![c],
            couplings: Vec::new(),
        }));
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut conductance = Vec::new();
        let mut total_conductance = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, mut row) in self.adjacency.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut sum = self.boundary[i];
            for (j, c) in row {
                cols.push(j);
                conductance.push(c);
                sum += c;
            }
            row_ptr.push(cols.len());
            total_conductance.push(sum);
        }
        MeshedDomain {
            spec,
            model,
            theta,
            chart,
            spacing,
            cells: self.cells,
            row_ptr,
            cols,
            conductance,
            boundary: self.boundary,
            total_conductance,
            lines,
        }
    }
}

impl MeshedDomain {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn model(&self) -> &ModelSpace {
        &self.model
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.volume).collect()
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Cells with at least one Dirichlet face.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        self.boundary.iter().map(|&b| b > 0.0).collect()
    }

    /// Symmetric face conductances of row `i` as `(neighbor, c_ij)`.
    pub fn conductances(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.conductance[a..b].iter().copied())
    }

    pub fn boundary_conductance(&self, i: usize) -> f64 {
        self.boundary[i]
    }

    /// Row `i` of the discrete Laplacian.
    pub fn stencil_row(&self, i: usize) -> StencilRow {
        let vol = self.cells[i].volume;
        StencilRow {
            diagonal: -self.total_conductance[i] / vol,
            neighbors: self.conductances(i).map(|(j, c)| (j, c / vol)).collect(),
        }
    }

    /// `Lap_h u`.
    pub fn apply_laplacian(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let flux: f64 = self.conductances(i).map(|(j, c)| c * u[j]).sum();
                (flux - self.total_conductance[i] * u[i]) / self.cells[i].volume
            })
            .collect()
    }

    /// `y = (V + dt K) x`, the symmetric positive definite implicit Euler matrix.
    pub(crate) fn apply_heat_matrix(&self, dt: f64, x: &[f64], y: &mut [f64]) {
        for i in 0..self.cells.len() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut off = 0.0;
            for k in a..b {
                off += self.conductance[k] * x[self.cols[k]];
            }
            y[i] = (self.cells[i].volume + dt * self.total_conductance[i]) * x[i] - dt * off;
        }
    }

    pub(crate) fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub(crate) fn heat_matrix_diagonal(&self, dt: f64) -> Vec<f64> {
        self.cells
            .iter()
            .zip(&self.total_conductance)
            .map(|(c, t)| c.volume + dt * t)
            .collect()
    }

    /// An `nx x ny` Cartesian block of cells of side `h`, bypassing validation.
    #[cfg(test)]
    pub(crate) fn raw_cartesian(nx: usize, ny: usize, h: f64, closure: BoundaryClosure) -> Self {
        let factor = match closure {
            BoundaryClosure::Face => 2.0,
            BoundaryClosure::ExteriorCenter => 1.0,
        };
        let mut b = Builder::default();
        b.cartesian(0.0, 0.0, nx, ny, h, h, factor, |_, _| true);
        let spec = DomainSpec {
            kind: DomainKind::FlatRectangle {
                x0: 0.0,
                y0: 0.0,
                width: nx as f64 * h,
                height: ny as f64 * h,
                cells_per_unit: (1.0 / h).round() as usize,
            },
            boundary_closure: closure,
        };
        b.finish(spec, ModelSpace::flat(2), 1.0, Chart::Cartesian, h)
    }

    /// Index of the cell whose center is nearest to a chart point.
    pub fn nearest_cell(&self, point: [f64; 2]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.cells.iter().enumerate() {
            let d = self.chart.distance(c, point);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> ModelSpace {
        ModelSpace::flat(2)
    }

    fn square(side: f64, cells_per_unit: usize, closure: BoundaryClosure) -> MeshedDomain {
        let spec = DomainSpec {
            kind: DomainKind::FlatRectangle {
                x0: 0.0,
                y0: 0.0,
                width: side,
                height: side,
                cells_per_unit,
            },
            boundary_closure: closure,
        };
        build_domain(&spec, &flat(), 1.0).unwrap()
    }

    #[test]
    fn unit_square_at_half_spacing() {
        // below the four-cell validation minimum, so build the grid directly
        let m = MeshedDomain::raw_cartesian(2, 2, 0.5, BoundaryClosure::Face);
        assert_eq!(m.len(), 4);
        assert_eq!(m.total_volume(), 1.0);
    }

    #[test]
    fn interior_and_boundary_stencils() {
        let m = square(1.0, 8, BoundaryClosure::ExteriorCenter);
        let h2 = 64.0;
        let interior = m.nearest_cell([0.4375, 0.4375]);
        let row = m.stencil_row(interior);
        assert!((row.diagonal + 4.0 * h2).abs() < 1e-9);
        assert_eq!(row.neighbors.len(), 4);
        assert!(row.neighbors.iter().all(|&(_, w)| (w - h2).abs() < 1e-9));

        let edge = m.nearest_cell([0.0625, 0.4375]);
        let row = m.stencil_row(edge);
        assert!((row.diagonal + 4.0 * h2).abs() < 1e-9);
        assert_eq!(row.neighbors.len(), 3);
        assert!(row.neighbors.iter().all(|&(_, w)| (w - h2).abs() < 1e-9));

        let m = square(1.0, 8, BoundaryClosure::Face);
        let row = m.stencil_row(m.nearest_cell([0.0625, 0.4375]));
        assert!((row.diagonal + 5.0 * h2).abs() < 1e-9);
    }

    #[test]
    fn laplacian_is_symmetric_after_volume_scaling() {
        let spec = DomainSpec::from(DomainKind::ConePolar {
            angle: PI,
            radius: 1.0,
            radial_cells: 6,
            angular_cells: 8,
        });
        let m = build_domain(&spec, &flat(), 0.5).unwrap();
        for i in 0..m.len() {
            let row = m.stencil_row(i);
            for &(j, w) in &row.neighbors {
                let back = m.stencil_row(j);
                let wj = back.neighbors.iter().find(|&&(k, _)| k == i).unwrap().1;
                let (vi, vj) = (m.cells()[i].volume, m.cells()[j].volume);
                assert!((vi * w - vj * wj).abs() < 1e-12 * (vi * w).abs());
                assert!(w > 0.0);
            }
            assert!(row.diagonal < 0.0);
        }
    }

    #[test]
    fn polar_rows_have_nonpositive_sums() {
        let spec = DomainSpec::from(DomainKind::PolarAnnulus {
            inner: 0.5,
            outer: 1.0,
            radial_cells: 8,
            angular_cells: 32,
            inner_dirichlet: true,
        });
        let m = build_domain(&spec, &flat(), 1.0).unwrap();
        let mut strictly_negative = 0;
        for i in 0..m.len() {
            let row = m.stencil_row(i);
            let sum = row.diagonal + row.neighbors.iter().map(|&(_, w)| w).sum::<f64>();
            assert!(sum <= 1e-9 * row.diagonal.abs());
            if sum < -1e-9 {
                strictly_negative += 1;
            }
        }
        assert_eq!(strictly_negative, 2 * 32);
    }

    #[test]
    fn exact_polar_volumes() {
        for n in [4, 7, 16] {
            let disc = build_domain(
                &DomainSpec::from(DomainKind::PolarDisc {
                    radius: 1.0,
                    radial_cells: n,
                    angular_cells: 2 * n,
                }),
                &flat(),
                1.0,
            )
            .unwrap();
            assert!((disc.total_volume() - PI).abs() < 1e-10 * PI);

            let cone = build_domain(
                &DomainSpec::from(DomainKind::ConePolar {
                    angle: PI,
                    radius: 1.0,
                    radial_cells: n,
                    angular_cells: n,
                }),
                &flat(),
                0.5,
            )
            .unwrap();
            assert!((cone.total_volume() - PI / 2.0).abs() < 1e-10);
        }
        let s2 = ModelSpace::sphere(1.0, 2).unwrap();
        let cap = build_domain(
            &DomainSpec::from(DomainKind::SphereCap {
                radius: PI / 3.0,
                radial_cells: 9,
                angular_cells: 12,
            }),
            &s2,
            1.0,
        )
        .unwrap();
        assert!((cap.total_volume() - PI).abs() < 1e-10 * PI);
        let band = build_domain(
            &DomainSpec::from(DomainKind::SphereBand {
                inner: 0.5,
                outer: 2.0,
                radial_cells: 9,
                angular_cells: 12,
            }),
            &s2,
            1.0,
        )
        .unwrap();
        let exact = 2.0 * PI * (0.5f64.cos() - 2.0f64.cos());
        assert!((band.total_volume() - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn cone_ball_volume_matches_theta_scaled_disc() {
        // |B_p(r)| on an alpha-cone is (alpha/2) r^2: sum cells with center radius below r edges
        let alpha = PI / 2.0;
        let spec = DomainSpec::from(DomainKind::ConePolar {
            angle: alpha,
            radius: 2.0,
            radial_cells: 20,
            angular_cells: 8,
        });
        let m = build_domain(&spec, &flat(), 0.25).unwrap();
        for k in [5, 10, 20] {
            let r = 0.1 * k as f64;
            let v: f64 = m.cells().iter().filter(|c| c.r < r).map(|c| c.volume).sum();
            let ratio = v / (PI * r * r);
            assert!((ratio - 0.25).abs() < 1e-12, "ratio {ratio}");
        }
    }

    #[test]
    fn masked_shapes_converge_in_area() {
        let mask = MaskShape::Ellipse {
            center: [0.0, 0.0],
            semi_axes: [1.0, 0.6],
        };
        let mut errors = Vec::new();
        for n in [16, 64, 256] {
            let spec = DomainSpec::from(DomainKind::FlatMask {
                mask: mask.clone(),
                cells_per_unit: n,
            });
            let m = build_domain(&spec, &flat(), 1.0).unwrap();
            let err = (m.total_volume() - mask.area()).abs() / mask.area();
            errors.push(err);
        }
        assert!(errors[1] < 0.02, "{errors:?}");
        assert!(errors[2] < errors[0]);
    }

    #[test]
    fn lshape_is_exact() {
        let spec = DomainSpec::from(DomainKind::FlatLshape {
            size: 1.0,
            cells_per_unit: 16,
        });
        let m = build_domain(&spec, &flat(), 1.0).unwrap();
        assert_eq!(m.len(), 192);
        assert!((m.total_volume() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sphere_mask_area() {
        let s2 = ModelSpace::sphere(1.0, 2).unwrap();
        let spec = DomainSpec::from(DomainKind::SphereMask {
            center: [PI / 2.0, 0.0],
            radius: 0.8,
            radial_cells: 128,
            angular_cells: 256,
        });
        let m = build_domain(&spec, &s2, 1.0).unwrap();
        let exact = s2.ball_volume(0.8).unwrap();
        assert!((m.total_volume() - exact).abs() < 0.02 * exact);
    }

    #[test]
    fn sphere_distances() {
        let s2 = ModelSpace::sphere(1.0, 2).unwrap();
        let chart = Chart::GeodesicPolar { model: s2, period: 2.0 * PI };
        let cell = Cell { x: 0.0, y: 0.0, r: PI / 2.0, phi: 0.0, volume: 1.0 };
        assert!((chart.distance(&cell, [0.0, 0.0]) - PI / 2.0).abs() < 1e-12);
        // a point on the equator a quarter turn away
        let p = [0.0, PI / 2.0];
        assert!((chart.distance(&cell, p) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cone_distance_wraps_the_seam() {
        let chart = Chart::GeodesicPolar { model: flat(), period: PI };
        let cell = Cell { x: 0.0, y: 0.0, r: 1.0, phi: 0.05, volume: 1.0 };
        // the point sits at angle pi - 0.05, i.e. 0.1 away across the seam
        let q = [(PI - 0.05f64).cos(), (PI - 0.05f64).sin()];
        let d = chart.distance(&cell, q);
        assert!((d - 2.0 * (0.05f64).sin()).abs() < 1e-12, "{d}");
    }

    #[test]
    fn empty_mask_is_rejected() {
        let spec = DomainSpec::from(DomainKind::FlatMask {
            mask: MaskShape::Annulus { center: [0.0, 0.0], inner: 0.999, outer: 1.0 },
            cells_per_unit: 4,
        });
        assert!(build_domain(&spec, &flat(), 1.0).is_err());
    }
}
