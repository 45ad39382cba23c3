use cornerpmt_core::collar::{build_collar, curvature_at, second_fundamental_form, MetricPath};
use cornerpmt_core::corner::{CornerMetric, Side, SphericalCorner, TorusCorner};
use cornerpmt_core::mollifier::{mollify_path, verify_lemmas, MollifierConfig};
use cornerpmt_core::slice::SliceKind;
use cornerpmt_core::spherical::{run_pipeline, PipelineOptions, RadialGeometry};
use proptest::prelude::*;

const SPHERE: SliceKind = SliceKind::Sphere { ambient_dim: 3 };

fn scalar_path(n_t: usize, f: impl Fn(f64) -> f64) -> MetricPath {
    let values = (0..=n_t).map(|k| f(-2.0 + 4.0 * k as f64 / n_t as f64)).collect();
    MetricPath::from_samples(SPHERE, 1.0, n_t, values).unwrap()
}

fn config(delta: f64) -> MollifierConfig {
    MollifierConfig { delta, ..MollifierConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn affine_paths_are_fixed_points(a in 2.0f64..5.0, b in -0.5f64..0.5, delta in 0.02f64..0.1) {
        let path = scalar_path(200, |t| a + b * t);
        let m = mollify_path(&path, &config(delta)).unwrap();
        for (k, &s) in m.s_grid.iter().enumerate() {
            prop_assert!((m.gamma_at_node(k)[0] - (a + b * s)).abs() < 1e-11 * a);
            prop_assert!((m.d1_at_node(k)[0] - b).abs() < 1e-9);
        }
    }

    #[test]
    fn kinked_paths_are_exact_outside_and_within_the_c0_bound(
        c in 2.0f64..4.0, a in -0.8f64..0.8, b in -0.3f64..0.3, delta in 0.02f64..0.1,
    ) {
        let path = scalar_path(400, |t| c + a * t.abs() + b * t * t);
        let r = verify_lemmas(&mollify_path(&path, &config(delta)).unwrap()).unwrap();
        prop_assert!(r.outside_ok(), "{r:?}");
        prop_assert!(r.c0_ok(), "{r:?}");
        prop_assert!(r.eigen_margin >= -1e-14, "{r:?}");
        prop_assert!(r.overlap_ok(), "{r:?}");
    }

    #[test]
    fn spherical_collar_reduces_to_closed_forms(radius in 4.0f64..10.0, mass in 0.05f64..0.5, pick in 0usize..8) {
        let corner = SphericalCorner::flat_in_schwarzschild(radius, mass).unwrap();
        let path = build_collar(&CornerMetric::Spherical(corner), 1.0, 2000, 0).unwrap();
        let k = [50, 300, 700, 999, 1001, 1400, 1700, 1950][pick];
        let side = if k < 1000 { Side::Minus } else { Side::Plus };
        let c = curvature_at(&path, k, side).unwrap();
        let j = corner.side_jet(side, path.t(k)).unwrap();
        let q = path.raw(k)[0];
        prop_assert!((q - j.r * j.r).abs() < 1e-12 * q);
        prop_assert!((c.gauss[0] - 1.0 / (j.r * j.r)).abs() < 1e-10);
        prop_assert!((c.mean[0] - 2.0 * j.dr / j.r).abs() < 1e-8, "{} vs {}", c.mean[0], 2.0 * j.dr / j.r);
        prop_assert!(c.scalar[0].abs() < 1e-6, "R = {}", c.scalar[0]);
        let a = second_fundamental_form(&path, k, side).unwrap();
        prop_assert!((c.mean[0] - 2.0 * a.data[0] / q).abs() <= 1e-12 * (1.0 + c.mean[0].abs()));
    }

    #[test]
    fn torus_mollification_stays_in_the_metric_cone(delta in 0.03f64..0.1) {
        let corner = CornerMetric::TorusCollar(TorusCorner::kinked(8));
        let path = build_collar(&corner, 1.0, 40, 8).unwrap();
        let r = verify_lemmas(&mollify_path(&path, &config(delta)).unwrap()).unwrap();
        prop_assert!(r.eigen_margin >= -1e-14 && r.outside_ok() && r.c0_ok(), "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn first_deformation_shifts_the_mass_by_twice_a(radius in 4.0f64..8.0, mass in 0.05f64..0.5) {
        let corner = SphericalCorner::flat_in_schwarzschild(radius, mass).unwrap();
        let path = build_collar(&CornerMetric::Spherical(corner), 1.0, 2000, 0).unwrap();
        let m = mollify_path(&path, &config(0.05)).unwrap();
        let geom = RadialGeometry::new(&corner, Some(&m)).unwrap();
        let p = run_pipeline(&geom, &PipelineOptions::default()).unwrap();
        let shifted = p.masses.m_base + 2.0 * p.first.a_decay;
        prop_assert!((p.masses.m_tilde - shifted).abs() < 1e-8, "{:?}", p.masses);
        prop_assert!((p.masses.m_base - mass).abs() < 1e-6);
        prop_assert!(p.masses.m_tilde >= -1e-6);
        prop_assert!((p.first.a_decay - p.first.a_integral).abs() < 1e-6);
    }
}
