use std::f64::consts::PI;

use symmheat::comparison::compute_u;
use symmheat::domain::{build_domain, solve_heat, BoundaryClosure, DomainKind, DomainSpec, SolverSettings};
use symmheat::geometry::{ModelSpace, SymmetrizationTarget};
use symmheat::rearrangement::WeightedField;
use symmheat::symmetrized::{solve_v_direct, solve_v_radial, uniform_a_grid, SymmetrizedProblem};

fn square(n: usize) -> DomainSpec {
    DomainSpec {
        kind: DomainKind::FlatRectangle { x0: 0.0, y0: 0.0, width: 1.0, height: 1.0, cells_per_unit: n },
        boundary_closure: BoundaryClosure::Face,
    }
}

fn disc(radial: usize, angular: usize) -> DomainSpec {
    DomainSpec {
        kind: DomainKind::PolarDisc { radius: 1.0, radial_cells: radial, angular_cells: angular },
        boundary_closure: BoundaryClosure::Face,
    }
}

/// Sampled `sin(pi x) sin(pi y)` is an exact eigenvector of the face-closed
/// square, so implicit Euler multiplies it by `1 / (1 + lambda dt)` per step.
#[test]
fn discrete_eigenvector_decays_at_the_implicit_euler_rate() {
    let n = 16;
    let h = 1.0 / n as f64;
    let mesh = build_domain(&square(n), &ModelSpace::flat(2), 1.0).unwrap();
    let g: Vec<f64> = mesh.cells().iter().map(|c| (PI * c.x).sin() * (PI * c.y).sin()).collect();
    let f = vec![0.0; mesh.len()];
    let lambda = 2.0 * (4.0 / (h * h)) * (PI * h / 2.0).sin().powi(2);
    let (dt, steps) = (0.01, 5);
    let u = solve_heat(&mesh, &f, &g, &[dt * steps as f64], dt, &SolverSettings::default()).unwrap();
    let factor = (1.0 + lambda * dt).powi(-steps);
    let err = u[0].values.iter().zip(&g).map(|(u, g)| (u - factor * g).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn implicit_euler_is_first_order_in_time() {
    let n = 16;
    let h = 1.0 / n as f64;
    let mesh = build_domain(&square(n), &ModelSpace::flat(2), 1.0).unwrap();
    let g: Vec<f64> = mesh.cells().iter().map(|c| (PI * c.x).sin() * (PI * c.y).sin()).collect();
    let f = vec![0.0; mesh.len()];
    let lambda = 2.0 * (4.0 / (h * h)) * (PI * h / 2.0).sin().powi(2);
    let t = 0.05;
    let errors: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| {
            let u = solve_heat(&mesh, &f, &g, &[t], dt, &SolverSettings::default()).unwrap();
            let exact = (-lambda * t).exp();
            u[0].values.iter().zip(&g).map(|(u, g)| (u - exact * g).abs()).fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "order {order} from {errors:?}");
    }
}

/// Radial data on a polar disc keep the solution radial, and the finite
/// volume scheme then coincides with the radial route on the same shells.
#[test]
fn radial_data_on_a_polar_disc_reproduce_the_radial_route() {
    let (radial, angular) = (24, 32);
    let mesh = build_domain(&disc(radial, angular), &ModelSpace::flat(2), 1.0).unwrap();
    let f = vec![1.0; mesh.len()];
    let g = vec![0.0; mesh.len()];
    let times = [0.02, 0.1, 0.4];
    let dt = 0.01;
    let u = solve_heat(&mesh, &f, &g, &times, dt, &SolverSettings::default()).unwrap();

    let volumes = mesh.volumes();
    let target = SymmetrizationTarget::new(ModelSpace::flat(2), 1.0).unwrap();
    let problem = SymmetrizedProblem::new(
        target,
        &WeightedField::new(volumes.clone(), f).unwrap(),
        &WeightedField::new(volumes, g).unwrap(),
    )
    .unwrap();
    let grid = uniform_a_grid(problem.volume(), 200);
    let v = solve_v_radial(&problem, &times, radial, dt).unwrap().surface(&grid).unwrap();
    let scan = compute_u(&u, &mesh, 1.0, &grid).unwrap();
    let scale = v.max_value();
    for (ur, vr) in scan.values.iter().zip(&v.values) {
        for (a, b) in ur.iter().zip(vr) {
            assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn symmetrized_routes_converge_to_each_other() {
    let f = WeightedField::from_cells(&[(0.4, 2.0), (0.8, 0.5), (1.2, 0.0)]).unwrap();
    let g = WeightedField::from_cells(&[(0.3, 1.0), (1.0, 3.0), (1.1, 0.2)]).unwrap();
    let target = SymmetrizationTarget::new(ModelSpace::flat(2), 0.5).unwrap();
    let problem = SymmetrizedProblem::new(target, &f, &g).unwrap();
    let times = [0.01, 0.05, 0.2];
    let gap = |k: usize| {
        let grid = uniform_a_grid(problem.volume(), k);
        let a = solve_v_radial(&problem, &times, k, 1e-4).unwrap().surface(&grid).unwrap();
        let b = solve_v_direct(&problem, &times, k, 1e-4).unwrap();
        b.sup_distance(&a).unwrap() / a.max_value()
    };
    let gaps: Vec<f64> = [64, 128, 256].into_iter().map(gap).collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
    assert!(gaps[2] < 1e-2, "{gaps:?}");
}

#[test]
fn disc_eigenmode_decays_like_the_bessel_mode() {
    use symmheat::special::{bessel_j0, J0_FIRST_ZERO};
    let mesh = build_domain(&disc(64, 64), &ModelSpace::flat(2), 1.0).unwrap();
    let g: Vec<f64> = mesh.cells().iter().map(|c| bessel_j0(J0_FIRST_ZERO * c.r)).collect();
    let f = vec![0.0; mesh.len()];
    let t = 0.05;
    let u = solve_heat(&mesh, &f, &g, &[t], 1e-4, &SolverSettings::default()).unwrap();
    let decay = (-J0_FIRST_ZERO * J0_FIRST_ZERO * t).exp();
    let err = u[0].values.iter().zip(&g).map(|(u, g)| (u - decay * g).abs()).fold(0.0, f64::max);
    assert!(err < 2e-3, "{err}");
}
