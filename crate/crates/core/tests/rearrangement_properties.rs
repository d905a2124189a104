use proptest::prelude::*;
use symmheat::geometry::{ModelSpace, SymmetrizationTarget};
use symmheat::rearrangement::{hardy_littlewood_pair, schwarz_profile, WeightedField};

fn cells(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..2.0, prop_oneof![0.0f64..5.0, (0u8..4).prop_map(f64::from)]), 1..max_len)
}

fn field(cells: &[(f64, f64)]) -> WeightedField {
    WeightedField::from_cells(cells).unwrap()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rearrangement_is_equimeasurable(c in cells(60), t in 0.0f64..5.0, p in 1.0f64..4.0) {
        let h = field(&c);
        let star = h.decreasing_rearrangement();
        prop_assert!(close(star.total_volume(), h.total_volume(), h.total_volume()));
        prop_assert!(close(star.distribution(t).unwrap(), h.distribution(t).unwrap(), h.total_volume()));
        let (a, b) = (h.power_integral(p), star.power_integral(p));
        prop_assert!(close(a, b, a));
    }

    #[test]
    fn rearrangement_is_nonincreasing_and_idempotent(c in cells(60)) {
        let star = field(&c).decreasing_rearrangement();
        prop_assert!(star.values().windows(2).all(|w| w[0] > w[1]));
        let again = WeightedField::new(
            star.breaks().windows(2).map(|w| w[1] - w[0]).collect(),
            star.values().to_vec(),
        )
        .unwrap()
        .decreasing_rearrangement();
        prop_assert_eq!(again.values(), star.values());
        for (x, y) in again.breaks().iter().zip(star.breaks()) {
            prop_assert!(close(*x, *y, star.total_volume()));
        }
    }

    #[test]
    fn concentration_is_concave_and_nondecreasing(c in cells(40), theta in 0.05f64..=1.0) {
        let h = field(&c);
        let star = h.decreasing_rearrangement();
        let top = h.total_volume() / theta;
        let grid: Vec<f64> = (0..=64).map(|k| top * k as f64 / 64.0).collect();
        let u: Vec<f64> = grid.iter().map(|&a| star.concentration(a, theta).unwrap()).collect();
        let scale = h.max_value() * h.total_volume();
        for w in u.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * scale.max(1.0));
        }
        for w in u.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-12 * scale.max(1.0));
        }
        prop_assert!(close(u[64], h.power_integral(1.0) / theta, scale));
    }

    #[test]
    fn rearrangement_contracts_distances(pairs in prop::collection::vec((0.01f64..2.0, 0.0f64..5.0, 0.0f64..5.0), 1..50)) {
        let vols: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let f = WeightedField::new(vols.clone(), pairs.iter().map(|p| p.1).collect()).unwrap();
        let g = WeightedField::new(vols.clone(), pairs.iter().map(|p| p.2).collect()).unwrap();
        let direct: f64 = pairs.iter().map(|p| p.0 * (p.1 - p.2).abs()).sum();
        // |f* - g*| in L^1 as an integral of a step function difference
        let (fs, gs) = (f.decreasing_rearrangement(), g.decreasing_rearrangement());
        let mut cuts: Vec<f64> = fs.breaks().iter().chain(gs.breaks()).copied().collect();
        cuts.sort_by(f64::total_cmp);
        let total = fs.total_volume().min(gs.total_volume());
        let mut rearranged = 0.0;
        for w in cuts.windows(2) {
            let mid = (0.5 * (w[0] + w[1])).min(total);
            if w[1] > w[0] {
                let (a, b) = (fs.value_at(mid).unwrap(), gs.value_at(mid).unwrap());
                rearranged += (w[1] - w[0]) * (a - b).abs();
            }
        }
        prop_assert!(rearranged <= direct + 1e-12 * direct.max(1.0));
    }

    #[test]
    fn hardy_littlewood_holds(pairs in prop::collection::vec((0.01f64..2.0, 0.0f64..5.0, 0.0f64..5.0), 1..50)) {
        let vols: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let f = WeightedField::new(vols.clone(), pairs.iter().map(|p| p.1).collect()).unwrap();
        let g = WeightedField::new(vols, pairs.iter().map(|p| p.2).collect()).unwrap();
        let (lhs, rhs) = hardy_littlewood_pair(&f, &g).unwrap();
        let direct: f64 = pairs.iter().map(|p| p.0 * p.1 * p.2).sum();
        prop_assert!(close(lhs, direct, direct));
        prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn schwarz_profile_divides_measures_by_theta(c in cells(40), theta in 0.05f64..=1.0, t in 0.0f64..5.0, curved in any::<bool>()) {
        let h = field(&c);
        let model = if curved {
            // curvature chosen so the symmetrized ball covers two thirds of the sphere
            ModelSpace::sphere(4.0 * std::f64::consts::PI * theta / (1.5 * h.total_volume()), 2).unwrap()
        } else {
            ModelSpace::flat(2)
        };
        let target = SymmetrizationTarget::new(model, theta).unwrap();
        let profile = schwarz_profile(&h, &target).unwrap();
        let want = h.distribution(t).unwrap() / theta;
        prop_assert!(close(profile.distribution(t).unwrap(), want, want));
        prop_assert!(close(profile.ball_volume(), h.total_volume() / theta, h.total_volume() / theta));
        prop_assert!(profile.plateau_radii().windows(2).all(|w| w[0] <= w[1]));
    }
}
