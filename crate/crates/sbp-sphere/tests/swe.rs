//! Conservation identities and time-integrator order checks for the
//! shallow-water model. The spatial discretization conserves mass exactly
//! and energy to roundoff by construction; the RK4 scheme contributes an
//! O(dt⁴) energy slip that these tests size-check on short runs.

use sbp_sphere::ops2d::{self, Basis, CoriolisVariant, VectorFieldV};
use sbp_sphere::sbp1d::OperatorOrder;
use sbp_sphere::swe::{
    diagnostics, integrate, integrate_with_diagnostics, rhs, rk4_step, CoriolisParam, Model,
    ModelConfig, ModelState,
};

const ALL_ORDERS: [OperatorOrder; 4] = [
    OperatorOrder::Order21,
    OperatorOrder::Order42,
    OperatorOrder::Order63Poly,
    OperatorOrder::Order63Wave,
];

fn base_config(order: OperatorOrder, nc: usize) -> ModelConfig {
    ModelConfig {
        h_mean: 1.0e3,
        g: 9.80616,
        coriolis: CoriolisParam::Zero,
        rotation_axis: [0.0, 0.0, 1.0],
        order,
        coriolis_variant: CoriolisVariant::Main,
        dt: 600.0,
        nc,
        a: 6.371229e6,
    }
}

/// Deterministic pseudo-random stream in [-1, 1].
fn rand_stream(seed: u64) -> impl FnMut() -> f64 {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let bits = (state >> 11) as f64 / (1u64 << 53) as f64;
        2.0 * bits - 1.0
    }
}

fn random_state(model: &Model, seed: u64) -> ModelState {
    let mut rng = rand_stream(seed);
    let mut state = model.rest_state();
    for v in state.h.values.iter_mut() {
        *v = 50.0 * rng();
    }
    state.h.interface_continuous = false;
    for v in state.v.v1.iter_mut().chain(state.v.v2.iter_mut()) {
        // Covariant components carry a factor of the sphere radius.
        *v = 10.0 * model.grid.a * rng();
    }
    state
}

/// Gaussian depth bump centered on the equator, fluid at rest.
fn gaussian_state(model: &Model) -> ModelState {
    let mut state = model.rest_state();
    let a = model.grid.a;
    for (h, x) in state.h.values.iter_mut().zip(&model.grid.xh) {
        let cosd = (x[0] / a).clamp(-1.0, 1.0);
        let theta = cosd.acos();
        *h = 100.0 * (-16.0 * theta * theta).exp();
    }
    state.h.interface_continuous = false;
    state
}

/// dE/dt induced by the semi-discrete tendency, normalized by the size of
/// its two contributions.
fn energy_tendency_residual(model: &Model, state: &ModelState) -> f64 {
    let k = rhs(state, model).unwrap();
    let kinetic = model.config.h_mean
        * ops2d::quadrature_dot(&state.v, &k.dv, &model.grid, &model.ops).unwrap();
    let potential = model.config.g * ops2d::quadrature_h(&state.h, &k.dh, &model.grid, &model.ops);
    let scale = kinetic.abs().max(potential.abs()).max(f64::MIN_POSITIVE);
    (kinetic + potential).abs() / scale
}

/// d𝓜/dt induced by the tendency, relative to the mass scale of |dh|.
fn mass_tendency_residual(model: &Model, state: &ModelState) -> f64 {
    let k = rhs(state, model).unwrap();
    let mut acc = 0.0;
    let mut scale = 0.0;
    for i in 0..k.dh.values.len() {
        let w = model.ops.hh[i] * model.grid.jh[i];
        acc += w * k.dh.values[i];
        scale += w * k.dh.values[i].abs();
    }
    acc.abs() / scale.max(f64::MIN_POSITIVE)
}

#[test]
fn energy_tendency_vanishes_without_rotation() {
    for order in ALL_ORDERS {
        let model = Model::new(base_config(order, 12)).unwrap();
        let state = random_state(&model, 11);
        let res = energy_tendency_residual(&model, &state);
        assert!(res <= 1e-10, "{order:?}: energy tendency residual {res:.3e}");
    }
}

#[test]
fn energy_tendency_vanishes_for_every_rotating_variant() {
    let variants = [
        CoriolisVariant::Basic,
        CoriolisVariant::FullContinuous,
        CoriolisVariant::SimplifiedContinuous,
        CoriolisVariant::Main,
        CoriolisVariant::MainDiscontinuous,
    ];
    for variant in variants {
        let mut config = base_config(OperatorOrder::Order42, 12);
        config.coriolis = CoriolisParam::Constant(1e-4);
        config.coriolis_variant = variant;
        let model = Model::new(config).unwrap();
        let state = random_state(&model, 23);
        let res = energy_tendency_residual(&model, &state);
        assert!(res <= 1e-10, "{variant:?}: energy tendency residual {res:.3e}");
    }
}

#[test]
fn energy_tendency_vanishes_with_a_tilted_rotation_axis() {
    let mut config = base_config(OperatorOrder::Order63Poly, 12);
    config.coriolis = CoriolisParam::Spherical(7.292e-5);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    config.rotation_axis = [s, 0.0, s];
    let model = Model::new(config).unwrap();
    let state = random_state(&model, 37);
    let res = energy_tendency_residual(&model, &state);
    assert!(res <= 1e-10, "tilted axis: energy tendency residual {res:.3e}");
}

#[test]
fn mass_tendency_vanishes_for_random_states() {
    for order in ALL_ORDERS {
        let mut config = base_config(order, 12);
        config.coriolis = CoriolisParam::Constant(1e-4);
        let model = Model::new(config).unwrap();
        let state = random_state(&model, 51);
        let res = mass_tendency_residual(&model, &state);
        assert!(res <= 1e-12, "{order:?}: mass tendency residual {res:.3e}");
    }
}

#[test]
fn rk4_leaves_the_zero_state_bitwise_fixed() {
    let model = Model::new(base_config(OperatorOrder::Order42, 12)).unwrap();
    let state = model.rest_state();
    let next = rk4_step(&state, &model, 0).unwrap();
    assert_eq!(next.t, model.config.dt);
    assert!(next.h.values.iter().all(|&x| x == 0.0));
    assert!(next.v.v1.iter().all(|&x| x == 0.0));
    assert!(next.v.v2.iter().all(|&x| x == 0.0));
}

#[test]
fn rk4_converges_at_fourth_order_in_dt() {
    // One reference configuration, three nested time steps over a fixed
    // span. With errors C·dt⁴ the coarse/medium difference ratio against
    // the shared finest run is (4⁴−1)/(2⁴−1) = 17.
    let span = 7200.0;
    let mut states = Vec::new();
    for dt in [1800.0, 900.0, 450.0] {
        let mut config = base_config(OperatorOrder::Order42, 12);
        config.dt = dt;
        config.coriolis = CoriolisParam::Spherical(7.292e-5);
        let model = Model::new(config).unwrap();
        let ic = gaussian_state(&model);
        states.push(integrate(&model, ic, span, |_, _| Ok(())).unwrap());
    }
    let dist = |a: &ModelState, b: &ModelState| -> f64 {
        let mut m = 0.0f64;
        for (x, y) in a.h.values.iter().zip(&b.h.values) {
            m = m.max((x - y).abs());
        }
        m
    };
    let coarse = dist(&states[0], &states[2]);
    let medium = dist(&states[1], &states[2]);
    let ratio = coarse / medium;
    assert!(coarse > 1e-12, "coarse difference {coarse:.3e} too small to measure order");
    assert!(
        (10.0..30.0).contains(&ratio),
        "dt-refinement ratio {ratio:.2} outside the fourth-order window around 17"
    );
}

#[test]
fn one_day_run_conserves_mass_and_energy_and_stays_tangentially_continuous() {
    let mut config = base_config(OperatorOrder::Order63Wave, 16);
    config.coriolis = CoriolisParam::Constant(1e-4);
    config.dt = 450.0;
    let model = Model::new(config).unwrap();
    let ic = gaussian_state(&model);
    let span = 86400.0;
    let (final_state, series) = integrate_with_diagnostics(&model, ic, span, 8).unwrap();
    assert_eq!(final_state.t, span);
    let first = series.first().unwrap().diagnostics;
    let last = series.last().unwrap().diagnostics;
    let mass_drift = (last.mass - first.mass).abs() / first.mass.abs();
    assert!(mass_drift <= 1e-12, "relative mass drift {mass_drift:.3e}");
    let energy_drift = (last.energy - first.energy).abs() / first.energy;
    assert!(energy_drift <= 1e-6, "relative energy drift {energy_drift:.3e}");
    let vmax = final_state
        .v
        .v1
        .iter()
        .chain(final_state.v.v2.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    for s in &series {
        assert!(
            s.diagnostics.tangential_jump <= 1e-10 * vmax,
            "tangential jump {:.3e} at t = {}",
            s.diagnostics.tangential_jump,
            s.t
        );
    }
}

#[test]
fn kinetic_energy_is_positive_for_pure_velocity_states() {
    let model = Model::new(base_config(OperatorOrder::Order42, 12)).unwrap();
    let mut state = model.rest_state();
    let mut rng = rand_stream(77);
    for v in state.v.v1.iter_mut().chain(state.v.v2.iter_mut()) {
        *v = model.grid.a * rng();
    }
    let d = diagnostics(&state, &model).unwrap();
    assert!(d.energy > 0.0);
    assert!(d.mass.abs() <= f64::EPSILON);
}

#[test]
fn velocity_tendency_respects_basis_tags() {
    // rhs consumes covariant prognostic velocities and produces covariant
    // tendencies; a contravariant state must be rejected by the operators.
    let model = Model::new(base_config(OperatorOrder::Order42, 12)).unwrap();
    let mut state = model.rest_state();
    state.v = VectorFieldV::zeros(&model.grid, Basis::Contravariant);
    assert!(rhs(&state, &model).is_err());
}
