mod common;

use approx::assert_relative_eq;
use common::{random_points, rng};
use detlattice::cellgeom::{aspect_ratios, axis_extents, convex_hull, convex_hull_indexed, mesh_volume};
use detlattice::stats::{kde_1d, percentile, summary, Bandwidth};
use detlattice::vec3::{cross, dot, sub};
use proptest::prelude::*;
use rand::Rng;

fn hull_points(seed: u64) -> Vec<[f64; 3]> {
    let mut r = rng(seed);
    let n = r.random_range(4..80);
    random_points(&mut r, n, 10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_is_closed_and_contains_inputs(seed in any::<u64>()) {
        let pts = hull_points(seed);
        let (m, used) = convex_hull_indexed(&pts).unwrap();
        m.check_closed_manifold().unwrap();
        prop_assert!(m.signed_volume() > 0.0);
        prop_assert_eq!(m.vertices.len(), used.len());
        for (v, &i) in m.vertices.iter().zip(&used) {
            prop_assert_eq!(*v, pts[i]);
        }
        // every input on the inner side of every outward face
        for f in &m.faces {
            let [a, b, c] = f.map(|i| m.vertices[i]);
            let n = cross(sub(b, a), sub(c, a));
            for p in &pts {
                prop_assert!(dot(n, sub(*p, a)) <= 1e-9 * dot(n, n).sqrt() * 10.0);
            }
        }
        let ext = axis_extents(&m).unwrap();
        prop_assert!(mesh_volume(&m).unwrap() <= ext[0] * ext[1] * ext[2] * (1.0 + 1e-12));
    }

    #[test]
    fn hull_volume_translates_and_scales(seed in any::<u64>(), t in prop::array::uniform3(-100.0f64..100.0), s in 0.1f64..10.0) {
        let pts = hull_points(seed);
        let v = mesh_volume(&convex_hull(&pts).unwrap()).unwrap();
        let moved: Vec<[f64; 3]> = pts.iter().map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]]).collect();
        assert_relative_eq!(mesh_volume(&convex_hull(&moved).unwrap()).unwrap(), v, max_relative = 1e-9);
        let scaled: Vec<[f64; 3]> = pts.iter().map(|p| p.map(|x| s * x)).collect();
        let hs = convex_hull(&scaled).unwrap();
        assert_relative_eq!(mesh_volume(&hs).unwrap(), s.powi(3) * v, max_relative = 1e-9);
        // aspect ratios are scale-free
        let a0 = aspect_ratios(axis_extents(&convex_hull(&pts).unwrap()).unwrap()).unwrap();
        let a1 = aspect_ratios(axis_extents(&hs).unwrap()).unwrap();
        for k in 0..3 {
            assert_relative_eq!(a0[k], a1[k], max_relative = 1e-9);
        }
    }

    #[test]
    fn summary_orders_percentiles(xs in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let s = summary(&xs).unwrap();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= s.p5 && s.p5 <= s.median && s.median <= s.p95 && s.p95 <= hi);
        prop_assert!(lo <= s.mu + 1e-9 * hi.abs().max(lo.abs()) && s.mu <= hi + 1e-9 * hi.abs().max(lo.abs()));
        prop_assert!(s.sigma >= 0.0);
        prop_assert_eq!(s.n, xs.len());
        prop_assert_eq!(percentile(&xs, 50.0).unwrap(), s.median);
    }

    #[test]
    fn summary_is_affine_equivariant(xs in prop::collection::vec(-1e3f64..1e3, 2..100), a in 0.01f64..100.0, b in -1e3f64..1e3) {
        let s = summary(&xs).unwrap();
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let t = summary(&ys).unwrap();
        let tol = 1e-9 * (a * 1e3 + b.abs());
        prop_assert!((t.mu - (a * s.mu + b)).abs() <= tol);
        prop_assert!((t.median - (a * s.median + b)).abs() <= tol);
        prop_assert!((t.p5 - (a * s.p5 + b)).abs() <= tol);
        prop_assert!((t.p95 - (a * s.p95 + b)).abs() <= tol);
        prop_assert!((t.sigma - a * s.sigma).abs() <= tol);
    }

    #[test]
    fn kde_peaks_at_one(xs in prop::collection::vec(-50.0f64..50.0, 1..150), grid in 2usize..300) {
        let c = kde_1d(&xs, grid, Bandwidth::Auto).unwrap();
        prop_assert_eq!(c.grid.len(), grid);
        prop_assert_eq!(c.density.len(), grid);
        let peak = c.density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(peak, 1.0);
        prop_assert!(c.density.iter().all(|&d| (0.0..=1.0).contains(&d)));
        prop_assert!(c.grid.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(c.bandwidth > 0.0);
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(summary(&[]).is_err());
    assert!(kde_1d(&[], 16, Bandwidth::Auto).is_err());
    assert!(kde_1d(&[1.0, 2.0], 1, Bandwidth::Auto).is_err());
    assert!(convex_hull(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]).is_err());
}
