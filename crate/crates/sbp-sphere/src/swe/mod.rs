//! Linearized rotating shallow-water equations on the staggered cubed
//! sphere, integrated in time with the classical fourth-order Runge-Kutta
//! scheme.
//!
//! The prognostic variables are the covariant velocity components at the
//! staggered point sets and the depth perturbation at the x^h points. The
//! semi-discrete tendencies are
//!
//! dv/dt = F ṽ − g·D_hv A_h h,   dh/dt = −𝓗·div ṽ,   ṽ = Q v,
//!
//! where F is the chosen Coriolis discretization and div includes the
//! interface flux closure. Mass is conserved exactly and energy is
//! conserved by the spatial discretization, so drifts over a run measure
//! only the O(dt⁴) slip of the time integrator.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{build_cubed_sphere, CubedSphereGrid, PANEL_COUNT};
use crate::ops2d::{
    self, build_operators, Basis, CoriolisVariant, Discrete2DOperators, ScalarFieldH, VectorFieldV,
};
use crate::sbp1d::OperatorOrder;

const MODULE: &str = "swe";

/// Relative interface gap tolerated in the debug continuity assertion.
const H_CONTINUITY_REL_TOL: f64 = 1e-9;

/// Coriolis parameter profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoriolisParam {
    /// No rotation.
    Zero,
    /// The same f everywhere on the sphere.
    Constant(f64),
    /// f = 2Ω sin φ′ with φ′ the latitude measured from the rotation axis.
    Spherical(f64),
}

/// Physical and numerical parameters of a model run.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    /// Mean fluid depth 𝓗 (m).
    pub h_mean: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    pub coriolis: CoriolisParam,
    /// Rotation axis for `CoriolisParam::Spherical`; normalized on use.
    /// (0, 0, 1) puts the Coriolis poles at the geographic poles.
    pub rotation_axis: [f64; 3],
    pub order: OperatorOrder,
    pub coriolis_variant: CoriolisVariant,
    /// Time step (s).
    pub dt: f64,
    /// Cells per panel edge.
    pub nc: usize,
    /// Sphere radius (m).
    pub a: f64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let op = "validate";
        if !(self.dt > 0.0) {
            return Err(Error::invalid(MODULE, op, format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.h_mean > 0.0) {
            return Err(Error::invalid(MODULE, op, format!("mean depth must be positive, got {}", self.h_mean)));
        }
        if !(self.g > 0.0) {
            return Err(Error::invalid(MODULE, op, format!("gravity must be positive, got {}", self.g)));
        }
        let n = norm3(self.rotation_axis);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid(MODULE, op, "rotation axis must be a nonzero finite vector"));
        }
        Ok(())
    }
}

fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// A configured model: grid, discrete operators, and Coriolis samples.
pub struct Model {
    pub config: ModelConfig,
    pub grid: CubedSphereGrid,
    pub ops: Discrete2DOperators,
    /// Coriolis parameter at the x^h points.
    pub f_h: Vec<f64>,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Model> {
        config.validate()?;
        let grid = build_cubed_sphere(config.nc, config.a)?;
        let ops = build_operators(&grid, config.order)?;
        let f_h = coriolis_samples(&config, &grid);
        Ok(Model { config, grid, ops, f_h })
    }

    /// State of no motion with zero depth perturbation.
    pub fn rest_state(&self) -> ModelState {
        ModelState {
            t: 0.0,
            h: ScalarFieldH::zeros(&self.grid),
            v: VectorFieldV::zeros(&self.grid, Basis::Covariant),
        }
    }
}

/// Coriolis parameter evaluated at every x^h point.
fn coriolis_samples(config: &ModelConfig, grid: &CubedSphereGrid) -> Vec<f64> {
    match config.coriolis {
        CoriolisParam::Zero => vec![0.0; grid.nh()],
        CoriolisParam::Constant(f) => vec![f; grid.nh()],
        CoriolisParam::Spherical(omega) => {
            let n = norm3(config.rotation_axis);
            let axis = [
                config.rotation_axis[0] / n,
                config.rotation_axis[1] / n,
                config.rotation_axis[2] / n,
            ];
            grid.xh
                .iter()
                .map(|x| {
                    let sin_lat = (axis[0] * x[0] + axis[1] * x[1] + axis[2] * x[2]) / grid.a;
                    2.0 * omega * sin_lat
                })
                .collect()
        }
    }
}

/// Prognostic fields at one instant.
#[derive(Debug, Clone)]
pub struct ModelState {
    /// Simulation time (s).
    pub t: f64,
    /// Depth perturbation at the x^h points.
    pub h: ScalarFieldH,
    /// Covariant velocity components.
    pub v: VectorFieldV,
}

/// Time derivative of the prognostic fields.
#[derive(Debug, Clone)]
pub struct Tendency {
    pub dh: ScalarFieldH,
    pub dv: VectorFieldV,
}

/// Conserved quantities and the interface continuity measure.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    /// 1ᵀ H_h J_h h.
    pub mass: f64,
    /// (𝓗/2) vᵀ H_v J_v Q v + (g/2) hᵀ H_h J_h h.
    pub energy: f64,
    /// Largest tangential-velocity mismatch over paired interface points.
    pub tangential_jump: f64,
}

/// One diagnostics record of a time series.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticSample {
    pub t: f64,
    pub diagnostics: Diagnostics,
}

/// Semi-discrete tendencies of the linearized system.
pub fn rhs(state: &ModelState, model: &Model) -> Result<Tendency> {
    let grid = &model.grid;
    let ops = &model.ops;
    let vt = ops2d::co2contra(&state.v, grid, ops)?;

    let mut dv = match model.config.coriolis {
        CoriolisParam::Zero => VectorFieldV::zeros(grid, Basis::Covariant),
        _ => ops2d::coriolis(&vt, model.config.coriolis_variant, grid, ops, &model.f_h)?,
    };
    let gh = ops2d::grad(&state.h, grid, ops);
    let g = model.config.g;
    for (d, gv) in dv.v1.iter_mut().zip(&gh.v1) {
        *d -= g * gv;
    }
    for (d, gv) in dv.v2.iter_mut().zip(&gh.v2) {
        *d -= g * gv;
    }

    let mut dh = ops2d::div(&vt, grid, ops)?;
    for d in dh.values.iter_mut() {
        *d *= -model.config.h_mean;
    }
    Ok(Tendency { dh, dv })
}

/// state + w·k, advancing time by w.
fn advanced(state: &ModelState, k: &Tendency, w: f64) -> ModelState {
    let mut out = state.clone();
    out.t += w;
    for (o, d) in out.h.values.iter_mut().zip(&k.dh.values) {
        *o += w * d;
    }
    out.h.interface_continuous = state.h.interface_continuous && k.dh.interface_continuous;
    for (o, d) in out.v.v1.iter_mut().zip(&k.dv.v1) {
        *o += w * d;
    }
    for (o, d) in out.v.v2.iter_mut().zip(&k.dv.v2) {
        *o += w * d;
    }
    out
}

/// Largest paired-point depth mismatch relative to the field scale.
fn h_interface_gap(h: &ScalarFieldH, grid: &CubedSphereGrid) -> f64 {
    let scale = h.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut gap = 0.0f64;
    for group in &grid.pairing.edge_groups {
        gap = gap.max((h.values[group[0]] - h.values[group[1]]).abs());
    }
    for group in &grid.pairing.corner_groups {
        for w in group.windows(2) {
            gap = gap.max((h.values[w[0]] - h.values[w[1]]).abs());
        }
    }
    gap / scale
}

/// One classical RK4 update. `step` is the zero-based step number, used
/// only to attribute a non-finite result.
pub fn rk4_step(state: &ModelState, model: &Model, step: usize) -> Result<ModelState> {
    let dt = model.config.dt;
    let k1 = rhs(state, model)?;
    let k2 = rhs(&advanced(state, &k1, 0.5 * dt), model)?;
    let k3 = rhs(&advanced(state, &k2, 0.5 * dt), model)?;
    let k4 = rhs(&advanced(state, &k3, dt), model)?;

    let mut out = state.clone();
    out.t = state.t + dt;
    let w = dt / 6.0;
    for i in 0..out.h.values.len() {
        out.h.values[i] += w * (k1.dh.values[i] + 2.0 * (k2.dh.values[i] + k3.dh.values[i]) + k4.dh.values[i]);
    }
    for i in 0..out.v.v1.len() {
        out.v.v1[i] += w * (k1.dv.v1[i] + 2.0 * (k2.dv.v1[i] + k3.dv.v1[i]) + k4.dv.v1[i]);
    }
    for i in 0..out.v.v2.len() {
        out.v.v2[i] += w * (k1.dv.v2[i] + 2.0 * (k2.dv.v2[i] + k3.dv.v2[i]) + k4.dv.v2[i]);
    }

    if let Some(i) = out.h.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::numerical(MODULE, "rk4_step", step, format!("non-finite depth at point {i} after step")));
    }
    if let Some(i) = out.v.v1.iter().chain(out.v.v2.iter()).position(|x| !x.is_finite()) {
        return Err(Error::numerical(MODULE, "rk4_step", step, format!("non-finite velocity at entry {i} after step")));
    }
    debug_assert!(
        h_interface_gap(&out.h, &model.grid) <= H_CONTINUITY_REL_TOL,
        "depth field lost interface continuity at step {step}"
    );
    Ok(out)
}

/// Integrates from `ic` to time `ic.t + t_end`, calling `observer` with the
/// step number (0 for the initial state) after every accepted step.
/// `t_end` must be a whole number of time steps.
pub fn integrate<F>(model: &Model, ic: ModelState, t_end: f64, mut observer: F) -> Result<ModelState>
where
    F: FnMut(usize, &ModelState) -> Result<()>,
{
    let op = "integrate";
    let dt = model.config.dt;
    if t_end < 0.0 || !t_end.is_finite() {
        return Err(Error::invalid(MODULE, op, format!("integration span must be finite and nonnegative, got {t_end}")));
    }
    let steps_exact = t_end / dt;
    let steps = steps_exact.round();
    if (steps_exact - steps).abs() > 1e-9 * steps.max(1.0) {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("span {t_end} s is not a whole number of dt = {dt} s steps"),
        ));
    }
    let steps = steps as usize;
    let mut state = ic;
    observer(0, &state)?;
    for step in 0..steps {
        state = rk4_step(&state, model, step)?;
        observer(step + 1, &state)?;
    }
    Ok(state)
}

/// Integrates and records diagnostics every `every` steps (plus the initial
/// and final states). `every = 0` records only the endpoints.
pub fn integrate_with_diagnostics(
    model: &Model,
    ic: ModelState,
    t_end: f64,
    every: usize,
) -> Result<(ModelState, Vec<DiagnosticSample>)> {
    let total = (t_end / model.config.dt).round() as usize;
    let mut series = Vec::new();
    let final_state = integrate(model, ic, t_end, |step, state| {
        let due = step == 0 || step == total || (every > 0 && step % every == 0);
        if due {
            series.push(DiagnosticSample {
                t: state.t,
                diagnostics: diagnostics(state, model)?,
            });
        }
        Ok(())
    })?;
    Ok((final_state, series))
}

/// Mass, total energy, and the tangential interface jump of a state.
pub fn diagnostics(state: &ModelState, model: &Model) -> Result<Diagnostics> {
    let grid = &model.grid;
    let ops = &model.ops;
    let mut mass = 0.0;
    for i in 0..state.h.values.len() {
        mass += ops.hh[i] * grid.jh[i] * state.h.values[i];
    }
    let kinetic = 0.5 * model.config.h_mean * ops2d::quadrature_dot(&state.v, &state.v, grid, ops)?;
    let potential = 0.5 * model.config.g * ops2d::quadrature_h(&state.h, &state.h, grid, ops);
    Ok(Diagnostics {
        mass,
        energy: kinetic + potential,
        tangential_jump: ops2d::tangential_jump(&state.v, grid),
    })
}

/// Which staggered point set a snapshot stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSet {
    H,
    X1,
    X2,
    Zeta,
}

impl PointSet {
    pub fn tag(self) -> u8 {
        match self {
            PointSet::H => 0,
            PointSet::X1 => 1,
            PointSet::X2 => 2,
            PointSet::Zeta => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<PointSet> {
        match tag {
            0 => Ok(PointSet::H),
            1 => Ok(PointSet::X1),
            2 => Ok(PointSet::X2),
            3 => Ok(PointSet::Zeta),
            _ => Err(Error::invalid(MODULE, "read_snapshot", format!("unknown point-set tag {tag}"))),
        }
    }

    /// Number of points per panel on an Nc-cell grid.
    pub fn panel_len(self, nc: usize) -> usize {
        match self {
            PointSet::H => (nc + 1) * (nc + 1),
            PointSet::X1 | PointSet::X2 => nc * (nc + 1),
            PointSet::Zeta => nc * nc,
        }
    }
}

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"SBPF";
pub const SNAPSHOT_VERSION: u32 = 1;

/// A field snapshot read back from disk.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub nc: usize,
    pub set: PointSet,
    pub panels: u8,
    pub values: Vec<f64>,
}

/// Writes one field as a little-endian binary snapshot.
pub fn write_snapshot(path: &Path, nc: usize, set: PointSet, values: &[f64]) -> Result<()> {
    let op = "write_snapshot";
    let pstr = || path.display().to_string();
    let expected = PANEL_COUNT * set.panel_len(nc);
    if values.len() != expected {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("field has {} values, expected {expected} for this point set at Nc = {nc}", values.len()),
        ));
    }
    let mut buf = Vec::with_capacity(14 + 8 * values.len());
    buf.extend_from_slice(&SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(nc as u32).to_le_bytes());
    buf.push(set.tag());
    buf.push(PANEL_COUNT as u8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(MODULE, op, pstr(), e))?;
    file.write_all(&buf).map_err(|e| Error::io(MODULE, op, pstr(), e))
}

/// Reads a snapshot written by `write_snapshot`.
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let op = "read_snapshot";
    let pstr = || path.display().to_string();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(MODULE, op, pstr(), e))?;
    if bytes.len() < 14 {
        return Err(Error::invalid(MODULE, op, "file shorter than the snapshot header"));
    }
    if bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(Error::invalid(MODULE, op, "bad magic, not a snapshot file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(Error::invalid(MODULE, op, format!("unsupported snapshot version {version}")));
    }
    let nc = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let set = PointSet::from_tag(bytes[12])?;
    let panels = bytes[13];
    let expected = panels as usize * set.panel_len(nc);
    let payload = &bytes[14..];
    if payload.len() != 8 * expected {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("payload holds {} values, header promises {expected}", payload.len() / 8),
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot { nc, set, panels, values })
}

/// Writes a diagnostics time series as CSV with full float64 precision.
pub fn write_diagnostics_csv(path: &Path, series: &[DiagnosticSample]) -> Result<()> {
    let op = "write_diagnostics_csv";
    let pstr = || path.display().to_string();
    let mut out = String::from("t_seconds,mass,energy,tangential_jump\n");
    for s in series {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.t, s.diagnostics.mass, s.diagnostics.energy, s.diagnostics.tangential_jump
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(MODULE, op, pstr(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ModelConfig {
        ModelConfig {
            h_mean: 1.0e3,
            g: 9.80616,
            coriolis: CoriolisParam::Zero,
            rotation_axis: [0.0, 0.0, 1.0],
            order: OperatorOrder::Order42,
            coriolis_variant: CoriolisVariant::Main,
            dt: 600.0,
            nc: 12,
            a: 6.371229e6,
        }
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        let mut c = small_config();
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.h_mean = -1.0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.g = 0.0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.rotation_axis = [0.0; 3];
        assert!(c.validate().is_err());
    }

    #[test]
    fn spherical_coriolis_vanishes_on_the_axis_equator() {
        let mut c = small_config();
        c.coriolis = CoriolisParam::Spherical(7.292e-5);
        let model = Model::new(c).unwrap();
        for (f, x) in model.f_h.iter().zip(&model.grid.xh) {
            let sin_lat = x[2] / model.grid.a;
            assert!((f - 2.0 * 7.292e-5 * sin_lat).abs() <= 1e-18);
        }
    }

    #[test]
    fn rest_state_has_zero_tendencies() {
        let model = Model::new(small_config()).unwrap();
        let mut state = model.rest_state();
        for v in state.h.values.iter_mut() {
            *v = 1.0;
        }
        let k = rhs(&state, &model).unwrap();
        // Gradients of constants vanish to roundoff over dx, not bitwise.
        for d in k.dv.v1.iter().chain(k.dv.v2.iter()) {
            assert!(d.abs() <= 1e-9, "velocity tendency {d} at rest");
        }
        for d in k.dh.values.iter() {
            assert!(d.abs() <= 1e-12, "depth tendency {d} at rest");
        }
    }

    #[test]
    fn integrate_rejects_partial_steps() {
        let model = Model::new(small_config()).unwrap();
        let ic = model.rest_state();
        let err = integrate(&model, ic, 1234.0, |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::InvalidInput { .. }));
    }

    #[test]
    fn integrate_zero_span_returns_initial_state() {
        let model = Model::new(small_config()).unwrap();
        let mut ic = model.rest_state();
        ic.h.values[17] = 3.25;
        let out = integrate(&model, ic.clone(), 0.0, |_, _| Ok(())).unwrap();
        assert_eq!(out.t, ic.t);
        assert_eq!(out.h.values, ic.h.values);
    }

    #[test]
    fn snapshot_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        let nc = 12;
        let values: Vec<f64> = (0..PANEL_COUNT * (nc + 1) * (nc + 1))
            .map(|i| (i as f64).sin())
            .collect();
        write_snapshot(&path, nc, PointSet::H, &values).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.nc, nc);
        assert_eq!(snap.set, PointSet::H);
        assert_eq!(snap.panels, PANEL_COUNT as u8);
        assert_eq!(snap.values, values);
    }

    #[test]
    fn snapshot_rejects_wrong_length() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        let err = write_snapshot(&path, 12, PointSet::H, &[0.0; 10]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput { .. }));
    }

    #[test]
    fn diagnostics_of_uniform_depth_match_the_area_quadrature() {
        let model = Model::new(small_config()).unwrap();
        let mut state = model.rest_state();
        for v in state.h.values.iter_mut() {
            *v = 1.0;
        }
        let d = diagnostics(&state, &model).unwrap();
        let area = 4.0 * std::f64::consts::PI * model.grid.a * model.grid.a;
        assert!((d.mass - area).abs() <= 1e-4 * area);
        assert!((d.energy - 0.5 * model.config.g * area).abs() <= 1e-4 * area * model.config.g);
        assert_eq!(d.tangential_jump, 0.0);
    }
}
