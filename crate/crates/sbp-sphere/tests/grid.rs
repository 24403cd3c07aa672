//! Cubed-sphere grid oracles: the closed-form metric against a
//! finite-difference derivative of the mapping, global quadrature against
//! the exact sphere area, and pointwise verification of the interface
//! tables.

use sbp_sphere::grid::{
    build_cubed_sphere, equiangular_mapping, metric_at, VPoint, EARTH_RADIUS, PANEL_COUNT,
};
use sbp_sphere::sbp1d::{build_operator_set, OperatorOrder};

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    dot3(d, d).sqrt()
}

/// Deterministic sample coordinates strictly inside a panel, chosen so the
/// central difference stencil below stays in range.
fn sample_coords() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0 * 0.78
    };
    for _ in 0..25 {
        out.push((next(), next()));
    }
    out
}

#[test]
fn closed_form_metric_matches_finite_difference_oracle() {
    let a = EARTH_RADIUS;
    let h = 1e-6;
    for panel in 0..PANEL_COUNT {
        for &(x1, x2) in &sample_coords() {
            let s = metric_at(panel, x1, x2, a);
            let rp = |d1: f64, d2: f64| equiangular_mapping(panel, x1 + d1, x2 + d2, a).unwrap();
            let mut e1 = [0.0; 3];
            let mut e2 = [0.0; 3];
            let (p1p, p1m) = (rp(h, 0.0), rp(-h, 0.0));
            let (p2p, p2m) = (rp(0.0, h), rp(0.0, -h));
            for c in 0..3 {
                e1[c] = (p1p[c] - p1m[c]) / (2.0 * h);
                e2[c] = (p2p[c] - p2m[c]) / (2.0 * h);
            }
            let g11 = dot3(e1, e1);
            let g12 = dot3(e1, e2);
            let g22 = dot3(e2, e2);
            let rel = 1e-6;
            assert!((s.g11() - g11).abs() <= rel * g11, "g11 at {panel} ({x1},{x2})");
            assert!((s.g22() - g22).abs() <= rel * g22, "g22 at {panel} ({x1},{x2})");
            assert!(
                (s.g12() - g12).abs() <= rel * (g11 * g22).sqrt(),
                "g12 at {panel} ({x1},{x2})"
            );
            let det = g11 * g22 - g12 * g12;
            assert!(det > 0.0);
            assert!((s.j - det.sqrt()).abs() <= rel * det.sqrt(), "J at {panel}");
            // Q = g^{-1} entrywise.
            assert!((s.q11 - g22 / det).abs() <= rel * s.q11.abs());
            assert!((s.q22 - g11 / det).abs() <= rel * s.q22.abs());
            assert!((s.q12 + g12 / det).abs() <= rel * (s.q11 * s.q22).sqrt());
            // Basis vectors from the closed form match the difference
            // quotients componentwise.
            for c in 0..3 {
                assert!((s.e1[c] - e1[c]).abs() <= rel * g11.sqrt());
                assert!((s.e2[c] - e2[c]).abs() <= rel * g22.sqrt());
            }
        }
    }
}

#[test]
fn quadrature_recovers_sphere_area_at_second_order_or_better() {
    let a = EARTH_RADIUS;
    let exact = 4.0 * std::f64::consts::PI * a * a;
    let mut prev_err = f64::INFINITY;
    for &nc in &[12usize, 24, 48, 96] {
        let grid = build_cubed_sphere(nc, a).unwrap();
        let set = build_operator_set(OperatorOrder::Order21, nc, grid.dx).unwrap();
        let mut area = 0.0;
        for p in 0..PANEL_COUNT {
            for j in 0..=nc {
                for i in 0..=nc {
                    area += set.hv[i] * set.hv[j] * grid.jh[grid.idx_h(p, i, j)];
                }
            }
        }
        let err = (area - exact).abs() / exact;
        if nc == 48 {
            assert!(err <= 1e-3, "area error {err} at Nc=48");
        }
        // Grid doubling must cut the error by at least ~4 (second order).
        assert!(err < prev_err / 3.5, "area error not converging: {prev_err} -> {err}");
        prev_err = err;
    }
}

#[test]
fn interface_points_coincide_and_jacobian_is_continuous() {
    let grid = build_cubed_sphere(16, EARTH_RADIUS).unwrap();
    let tol = 1e-12 * grid.a;
    for pair in &grid.pairing.edge_groups {
        assert!(dist3(grid.xh[pair[0]], grid.xh[pair[1]]) <= tol);
        let (ja, jb) = (grid.jh[pair[0]], grid.jh[pair[1]]);
        assert!((ja - jb).abs() <= 1e-12 * ja);
    }
    for tri in &grid.pairing.corner_groups {
        for t in 1..3 {
            assert!(dist3(grid.xh[tri[0]], grid.xh[tri[t]]) <= tol);
            assert!((grid.jh[tri[0]] - grid.jh[tri[t]]).abs() <= 1e-12 * grid.jh[tri[0]]);
        }
    }
}

#[test]
fn edge_groups_cover_every_boundary_point_exactly_once() {
    let nc = 12;
    let grid = build_cubed_sphere(nc, 1.0).unwrap();
    let mut seen = vec![0usize; grid.nh()];
    for pair in &grid.pairing.edge_groups {
        for &m in pair {
            seen[m] += 1;
        }
    }
    for tri in &grid.pairing.corner_groups {
        for &m in tri {
            seen[m] += 1;
        }
    }
    for p in 0..PANEL_COUNT {
        for j in 0..=nc {
            for i in 0..=nc {
                let m = grid.idx_h(p, i, j);
                let on_boundary = i == 0 || i == nc || j == 0 || j == nc;
                assert_eq!(seen[m], usize::from(on_boundary), "h-point {m}");
            }
        }
    }
}

#[test]
fn flux_slots_pair_across_the_shared_edge() {
    let grid = build_cubed_sphere(12, EARTH_RADIUS).unwrap();
    let tol = 1e-12 * grid.a;
    for (s, slot) in grid.pairing.slots.iter().enumerate() {
        let t = grid.pairing.slot_partner[s];
        let other = grid.pairing.slots[t];
        assert_ne!(slot.panel, other.panel);
        assert!(dist3(grid.xh[slot.h], grid.xh[other.h]) <= tol);
        // The partner lives on the edge the topology says is glued here.
        let link = grid.topology.links[slot.panel][slot.edge.index()];
        assert_eq!(other.panel, link.panel);
        assert_eq!(other.edge, link.edge);
    }
}

#[test]
fn tangential_pairs_reference_coincident_points() {
    let grid = build_cubed_sphere(12, EARTH_RADIUS).unwrap();
    let tol = 1e-12 * grid.a;
    let pos = |v: VPoint| match v {
        VPoint::V1(m) => grid.x1[m],
        VPoint::V2(m) => grid.x2[m],
    };
    for pair in &grid.pairing.tangential_pairs {
        assert!(dist3(pos(pair.a), pos(pair.b)) <= tol);
        assert!(pair.sign == 1.0 || pair.sign == -1.0);
    }
}

#[test]
fn cell_angles_never_drop_below_sixty_degrees() {
    let grid = build_cubed_sphere(24, 1.0).unwrap();
    let mut min_angle = f64::INFINITY;
    for p in 0..PANEL_COUNT {
        for j in 0..=grid.nc {
            for i in 0..=grid.nc {
                let s = metric_at(p, grid.xv(i), grid.xv(j), 1.0);
                let cos = s.g12() / (s.g11() * s.g22()).sqrt();
                // Acute angle between the coordinate lines.
                let angle = cos.abs().acos().to_degrees();
                min_angle = min_angle.min(angle);
            }
        }
    }
    assert!(min_angle >= 60.0 - 1e-9, "min cell angle {min_angle}");
    assert!(min_angle <= 60.0 + 1e-9, "corner should attain 60 degrees");
}
