use std::sync::Arc;

use proptest::prelude::*;

use cmcfol::fit::fit_power_law;
use cmcfol::harmonics::{HarmonicCoeffs, SphereGrid};
use cmcfol::linalg3::Vec3;
use cmcfol::metric::{evaluate_metric, HarmonicAsymptotics, MetricFamily, MetricField, PerturbedRT};
use cmcfol::solver::nesting_check;
use cmcfol::surface::{surface_distance, LeafSurface};

fn coeffs(lmax: usize) -> impl Strategy<Value = HarmonicCoeffs> {
    prop::collection::vec(-1.0f64..1.0, (lmax + 1) * (lmax + 1))
        .prop_map(move |v| HarmonicCoeffs::from_vec(lmax, v).unwrap())
}

fn exterior_point() -> impl Strategy<Value = Vec3> {
    (5.0f64..80.0, 0.05f64..3.09, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(r, t, p)| [r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos()])
}

fn families() -> Vec<MetricField> {
    let ha = HarmonicAsymptotics {
        quadrupole: [[0.2, 0.1, 0.0], [0.1, -0.3, 0.05], [0.0, 0.05, 0.1]],
        ..HarmonicAsymptotics::new(1.2, [0.3, -0.2, 0.1])
    };
    let base = MetricFamily::SchwarzschildIsotropic {
        mass: 1.0,
        center: [0.0; 3],
    };
    vec![
        MetricField::schwarzschild(0.8, [0.5, -0.25, 0.1]),
        MetricField::new(MetricFamily::HarmonicAsymptotics(ha)),
        MetricField::new(MetricFamily::PerturbedRT(
            PerturbedRT::new(base, 0.5, 0.75, 2, 1).unwrap(),
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectral_round_trip(c in coeffs(10)) {
        let grid = SphereGrid::new(10).unwrap();
        let back = grid.analysis(&grid.synthesis(&c).unwrap()).unwrap();
        prop_assert!(back.axpy(-1.0, &c).max_abs() < 1e-12);
    }

    #[test]
    fn l1_split_is_exact(c in coeffs(4)) {
        let (b, rest) = c.l1_projection();
        let back = rest.axpy(1.0, &HarmonicCoeffs::from_l1_vector(4, b));
        prop_assert!(back.axpy(-1.0, &c).max_abs() < 1e-14);
        for m in -1..=1 {
            prop_assert_eq!(rest.get(1, m), 0.0);
        }
    }

    #[test]
    fn christoffel_and_riemann_symmetries(x in exterior_point()) {
        for f in families() {
            let conn = f.connection(x).unwrap();
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        prop_assert!((conn.gamma[k][i][j] - conn.gamma[k][j][i]).abs() < 1e-14);
                    }
                }
            }
            let c = f.curvature(x).unwrap();
            prop_assert!(c.symmetry_defect() <= 1e-10);
        }
    }

    #[test]
    fn schwarzschild_translation_covariance(x in exterior_point(), c in prop::array::uniform3(-2.0f64..2.0)) {
        let shifted = MetricFamily::SchwarzschildIsotropic { mass: 1.0, center: c };
        let origin = MetricFamily::SchwarzschildIsotropic { mass: 1.0, center: [0.0; 3] };
        let a = evaluate_metric(&shifted, x).unwrap();
        let b = evaluate_metric(&origin, [x[0] - c[0], x[1] - c[1], x[2] - c[2]]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((a.g[i][j] - b.g[i][j]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn metric_positive_definite(x in exterior_point()) {
        for f in families() {
            let g = f.metric(x).unwrap();
            let m = nalgebra::Matrix3::from_fn(|i, j| g[i][j]);
            prop_assert!(m.symmetric_eigenvalues().min() > 0.0);
        }
    }

    #[test]
    fn surface_distance_is_a_semimetric(a in coeffs(4), s in 0.0f64..0.2) {
        let grid = Arc::new(SphereGrid::new(6).unwrap());
        let x = LeafSurface::new([0.1, 0.0, -0.2], 10.0, a.scaled(s), grid.clone()).unwrap();
        let y = LeafSurface::round([0.0; 3], 10.0, grid).unwrap();
        prop_assert!(surface_distance(&x, &x).unwrap() < 1e-12);
        let d1 = surface_distance(&x, &y).unwrap();
        let d2 = surface_distance(&y, &x).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn concentric_gap(ra in 2.0f64..20.0, dr in 0.1f64..5.0, c in prop::array::uniform3(-1.0f64..1.0)) {
        let grid = Arc::new(SphereGrid::new(4).unwrap());
        let a = LeafSurface::round(c, ra, grid.clone()).unwrap();
        let b = LeafSurface::round(c, ra + dr, grid).unwrap();
        prop_assert!((nesting_check(&a, &b).unwrap() - dr).abs() < 1e-10);
    }

    #[test]
    fn power_law_recovery(e in -3.0f64..1.0, a in 0.1f64..10.0) {
        let xs = [10.0f64, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|x| a * x.powf(e)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        prop_assert!((fit.exponent - e).abs() < 1e-10);
        prop_assert!((fit.prefactor - a).abs() < 1e-8 * a);
    }
}
