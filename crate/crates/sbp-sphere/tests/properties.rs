//! Property-based invariants: identities that must hold for arbitrary valid
//! inputs, not just tabulated sizes and hand-picked fields.

use proptest::prelude::*;
use sbp_sphere::experiments::{error_norms, restrict_h};
use sbp_sphere::grid::{build_cubed_sphere, EARTH_RADIUS, PANEL_COUNT};
use sbp_sphere::ops2d::{
    apply_ah, build_operators, quadrature_dot, Basis, ScalarFieldH, VectorFieldV,
};
use sbp_sphere::sbp1d::{
    build_operator_set, interp_duality_residual, sbp_identity_residual, OperatorOrder,
};
use sbp_sphere::swe::{read_snapshot, write_snapshot, PointSet};

fn any_order() -> impl Strategy<Value = OperatorOrder> {
    (0..OperatorOrder::ALL.len()).prop_map(|i| OperatorOrder::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The SBP and interpolation-duality identities are exact at every
    /// admissible size, not only at the sizes the unit tests tabulate.
    #[test]
    fn operator_identities_hold_at_any_size(order in any_order(), n in 12usize..=64) {
        let set = build_operator_set(order, n, 1.0 / n as f64).unwrap();
        let sbp = sbp_identity_residual(&set);
        let duality = interp_duality_residual(&set);
        prop_assert!(sbp <= 1e-12, "sbp residual {sbp:e} at {order} N={n}");
        prop_assert!(duality <= 1e-12, "duality residual {duality:e} at {order} N={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Applying the interface projection twice changes nothing: the averaged
    /// field is already single-valued on every interface.
    #[test]
    fn interface_projection_is_idempotent(
        order in any_order(),
        values in prop::collection::vec(-1e6f64..1e6, PANEL_COUNT * 13 * 13),
    ) {
        let grid = build_cubed_sphere(12, EARTH_RADIUS).unwrap();
        let ops = build_operators(&grid, order).unwrap();
        let once = apply_ah(&ScalarFieldH::from_values(values), &grid, &ops);
        let twice = apply_ah(&once, &grid, &ops);
        let scale = once.values.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for (a, b) in once.values.iter().zip(&twice.values) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "reprojection moved {a} to {b}");
        }
    }

    /// Relative error norms are exactly invariant under a common power-of-two
    /// rescaling of both fields: scaling by 2^k is lossless in binary floating
    /// point, so numerator and denominator scale identically.
    #[test]
    fn error_norms_are_scale_invariant(
        k in -8i32..=8,
        num in prop::collection::vec(-1e3f64..1e3, PANEL_COUNT * 13 * 13),
        dref in prop::collection::vec(1.0f64..1e3, PANEL_COUNT * 13 * 13),
    ) {
        let grid = build_cubed_sphere(12, EARTH_RADIUS).unwrap();
        let ops = build_operators(&grid, OperatorOrder::Order42).unwrap();
        let c = (2.0f64).powi(k);
        let num_s: Vec<f64> = num.iter().map(|v| c * v).collect();
        let ref_s: Vec<f64> = dref.iter().map(|v| c * v).collect();
        let base = error_norms(&num, &dref, &grid, &ops).unwrap();
        let scaled = error_norms(&num_s, &ref_s, &grid, &ops).unwrap();
        prop_assert_eq!(base.l2, scaled.l2);
        prop_assert_eq!(base.linf, scaled.linf);
    }

    /// Restriction onto a nested coarse grid reads exactly the coincident
    /// fine-grid points: a field sampled from any function of the normalized
    /// panel coordinate restricts to that function's coarse samples, bitwise.
    #[test]
    fn restriction_samples_coincident_points(
        factor in 2usize..=4,
        nc_coarse in prop::sample::select(vec![4usize, 8, 12]),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let nc_fine = factor * nc_coarse;
        let sample = |nc: usize| -> Vec<f64> {
            let mut out = Vec::with_capacity(PANEL_COUNT * (nc + 1) * (nc + 1));
            for p in 0..PANEL_COUNT {
                for j in 0..=nc {
                    for i in 0..=nc {
                        let x = i as f64 / nc as f64;
                        let y = j as f64 / nc as f64;
                        out.push((a * x + p as f64).sin() + (b * y).cos());
                    }
                }
            }
            out
        };
        let restricted = restrict_h(&sample(nc_fine), nc_fine, nc_coarse).unwrap();
        prop_assert_eq!(restricted, sample(nc_coarse));
    }

    /// The velocity quadrature form is positive definite: any nonzero
    /// covariant field has strictly positive energy.
    #[test]
    fn velocity_quadrature_is_positive(
        order in any_order(),
        v1 in prop::collection::vec(-1e4f64..1e4, PANEL_COUNT * 12 * 13),
        v2 in prop::collection::vec(-1e4f64..1e4, PANEL_COUNT * 13 * 12),
    ) {
        prop_assume!(v1.iter().chain(&v2).any(|&x| x != 0.0));
        let grid = build_cubed_sphere(12, EARTH_RADIUS).unwrap();
        let ops = build_operators(&grid, order).unwrap();
        let v = VectorFieldV { v1, v2, basis: Basis::Covariant };
        let e = quadrature_dot(&v, &v, &grid, &ops).unwrap();
        prop_assert!(e > 0.0, "quadratic form returned {e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Snapshot files round-trip bitwise for every point set and size,
    /// including values near the extremes of the double range.
    #[test]
    fn snapshot_roundtrip_is_exact(
        (nc, set, values) in (1usize..=16, 0usize..4).prop_flat_map(|(nc, si)| {
            let set = [PointSet::H, PointSet::X1, PointSet::X2, PointSet::Zeta][si];
            let len = PANEL_COUNT * set.panel_len(nc);
            (Just(nc), Just(set), prop::collection::vec(-1e300f64..1e300, len))
        }),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        write_snapshot(&path, nc, set, &values).unwrap();
        let back = read_snapshot(&path).unwrap();
        prop_assert_eq!(back.nc, nc);
        prop_assert_eq!(back.set, set);
        prop_assert_eq!(back.panels as usize, PANEL_COUNT);
        prop_assert_eq!(back.values, values);
    }
}
