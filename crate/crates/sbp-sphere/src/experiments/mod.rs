//! Shallow-water test cases on the cubed sphere: initial conditions,
//! reference solutions, error norms, convergence studies, and the
//! stationary-mode analysis for deliberately under-resolved waves.
//!
//! All cases share a fixed gravity-wave CFL number: the time step is
//! `DT_TIMES_NC / Nc`, so refining the grid refines the step in lockstep.
//! Wave cases measure the maximum error over the run, sampled every six
//! simulated hours against a nested fine-grid reference; the solid-rotation
//! case is stationary and is measured against its own initial state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{self, metric_at, CubedSphereGrid};
use crate::ops2d::{CoriolisVariant, Discrete2DOperators, ScalarFieldH};
use crate::sbp1d::OperatorOrder;
use crate::swe::{
    diagnostics, integrate, CoriolisParam, DiagnosticSample, Model, ModelConfig, ModelState,
};

const MODULE: &str = "experiments";

/// Seconds per day.
pub const DAY_SECONDS: f64 = 86400.0;
/// Gravitational acceleration used by every case (m/s²).
pub const GRAVITY: f64 = 9.80616;
/// Earth's rotation rate, used by the solid-rotation case (1/s).
pub const EARTH_OMEGA: f64 = 7.292e-5;
/// Constant Coriolis parameter of the rotating wave cases (1/s).
pub const CONSTANT_F: f64 = 1e-4;
/// dt·Nc in seconds; 600 s at Nc = 48, halved with each grid doubling so
/// the gravity-wave CFL number stays fixed.
pub const DT_TIMES_NC: f64 = 28800.0;
/// Interval between error-norm samples in the wave cases (6 h).
pub const SAMPLE_SECONDS: f64 = 21600.0;

/// Rotation axis of the solid-rotation case: the flow pole sits at
/// latitude π/4, longitude 0, halfway between a panel center and a panel
/// edge midpoint.
pub const SOLID_ROTATION_AXIS: [f64; 3] = [std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2];

/// Mean depth giving gravity waves a 5-day great-circle transit time.
pub fn wave_mean_depth(a: f64) -> f64 {
    let c = 2.0 * std::f64::consts::PI * a / (5.0 * DAY_SECONDS);
    c * c / GRAVITY
}

/// Peak zonal speed of the solid-rotation flow: one revolution in 12 days.
pub fn solid_rotation_speed(a: f64) -> f64 {
    2.0 * std::f64::consts::PI * a / (12.0 * DAY_SECONDS)
}

/// The configured test cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestCase {
    /// Gaussian depth bump at a panel center (latitude 0, longitude π),
    /// no rotation.
    GaussHill1,
    /// Gaussian bump at a cube vertex (latitude arcsin√(1/3), longitude
    /// π/4), no rotation.
    GaussHill2,
    /// The vertex bump of `GaussHill2` with constant f = 1e−4 1/s.
    GaussHill3,
    /// Geostrophically balanced zonal flow about a tilted axis; the exact
    /// solution is stationary.
    SolidRotation,
    /// The `GaussHill1` bump modulated by cos²(νλ)cos²(νφ) with constant
    /// f = 1e−4 1/s; ν = 32 and 64 give 4Δx and 2Δx waves at Nc = 64.
    PoorlyResolved(u32),
}

impl TestCase {
    /// Unit vector pointing at the bump center, for the Gaussian cases.
    fn center(self) -> Option<[f64; 3]> {
        match self {
            TestCase::GaussHill1 | TestCase::PoorlyResolved(_) => Some([-1.0, 0.0, 0.0]),
            TestCase::GaussHill2 | TestCase::GaussHill3 => {
                let s = (1.0f64 / 3.0).sqrt();
                Some([s, s, s])
            }
            TestCase::SolidRotation => None,
        }
    }

    /// Model parameters of the case at a given order and resolution.
    pub fn model_config(self, order: OperatorOrder, nc: usize) -> ModelConfig {
        let a = grid::EARTH_RADIUS;
        let (h_mean, coriolis, rotation_axis) = match self {
            TestCase::GaussHill1 | TestCase::GaussHill2 => {
                (wave_mean_depth(a), CoriolisParam::Zero, [0.0, 0.0, 1.0])
            }
            TestCase::GaussHill3 | TestCase::PoorlyResolved(_) => {
                (wave_mean_depth(a), CoriolisParam::Constant(CONSTANT_F), [0.0, 0.0, 1.0])
            }
            TestCase::SolidRotation => (
                29400.0 / GRAVITY,
                CoriolisParam::Spherical(EARTH_OMEGA),
                SOLID_ROTATION_AXIS,
            ),
        };
        ModelConfig {
            h_mean,
            g: GRAVITY,
            coriolis,
            rotation_axis,
            order,
            coriolis_variant: CoriolisVariant::Main,
            dt: DT_TIMES_NC / nc as f64,
            nc,
            a,
        }
    }

    /// Standard duration of the case.
    pub fn span_seconds(self) -> f64 {
        match self {
            TestCase::GaussHill1 | TestCase::GaussHill2 | TestCase::GaussHill3 => 25.0 * DAY_SECONDS,
            TestCase::SolidRotation => 10.0 * DAY_SECONDS,
            TestCase::PoorlyResolved(_) => 600.0 * 3600.0,
        }
    }

    /// True for the cases measured by max-over-run error sampling against
    /// a nested fine-grid reference.
    pub fn uses_nested_reference(self) -> bool {
        matches!(self, TestCase::GaussHill1 | TestCase::GaussHill2 | TestCase::GaussHill3)
    }
}

impl std::fmt::Display for TestCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestCase::GaussHill1 => write!(f, "gauss1"),
            TestCase::GaussHill2 => write!(f, "gauss2"),
            TestCase::GaussHill3 => write!(f, "gauss3"),
            TestCase::SolidRotation => write!(f, "solid"),
            TestCase::PoorlyResolved(nu) => write!(f, "poor:{nu}"),
        }
    }
}

impl std::str::FromStr for TestCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<TestCase> {
        let op = "parse_case";
        match s {
            "gauss1" => Ok(TestCase::GaussHill1),
            "gauss2" => Ok(TestCase::GaussHill2),
            "gauss3" => Ok(TestCase::GaussHill3),
            "solid" => Ok(TestCase::SolidRotation),
            _ => {
                if let Some(nu) = s.strip_prefix("poor:") {
                    let nu: u32 = nu.parse().map_err(|_| {
                        Error::invalid(MODULE, op, format!("bad wave number in {s:?}"))
                    })?;
                    if nu == 0 {
                        return Err(Error::invalid(MODULE, op, "wave number must be positive"));
                    }
                    return Ok(TestCase::PoorlyResolved(nu));
                }
                Err(Error::invalid(
                    MODULE,
                    op,
                    format!("unknown case {s:?}; expected gauss1|gauss2|gauss3|solid|poor:NU"),
                ))
            }
        }
    }
}

/// Depth perturbation and covariant velocity sampled from the analytic
/// initial state of a case.
pub fn initial_condition(case: TestCase, grid: &CubedSphereGrid) -> ModelState {
    let mut state = ModelState {
        t: 0.0,
        h: ScalarFieldH::zeros(grid),
        v: crate::ops2d::VectorFieldV::zeros(grid, crate::ops2d::Basis::Covariant),
    };
    // Sampled values at paired interface points agree only to coordinate
    // roundoff, not bitwise.
    state.h.interface_continuous = false;
    match case {
        TestCase::GaussHill1 | TestCase::GaussHill2 | TestCase::GaussHill3 => {
            let c = case.center().unwrap();
            for (h, x) in state.h.values.iter_mut().zip(&grid.xh) {
                *h = gaussian_bump(c, *x, grid.a);
            }
        }
        TestCase::PoorlyResolved(nu) => {
            let c = case.center().unwrap();
            for (h, x) in state.h.values.iter_mut().zip(&grid.xh) {
                *h = gaussian_bump(c, *x, grid.a) * modulation(nu, *x, grid.a);
            }
        }
        TestCase::SolidRotation => {
            let a = grid.a;
            let u0 = solid_rotation_speed(a);
            let n = SOLID_ROTATION_AXIS;
            for (h, x) in state.h.values.iter_mut().zip(&grid.xh) {
                let sin_lat = (n[0] * x[0] + n[1] * x[1] + n[2] * x[2]) / a;
                *h = -(a * EARTH_OMEGA / GRAVITY) * u0 * sin_lat * sin_lat;
            }
            // v = u0·(axis × r̂) in Cartesian form, projected on the
            // covariant basis vector of each staggered point.
            let nc = grid.nc;
            for p in 0..grid::PANEL_COUNT {
                for j in 0..=nc {
                    for i in 0..nc {
                        let m = metric_at(p, grid.xc(i), grid.xv(j), a);
                        let idx = grid.idx_1(p, i, j);
                        state.v.v1[idx] = dot3(cart_velocity(u0, n, grid.x1[idx], a), m.e1);
                    }
                }
                for j in 0..nc {
                    for i in 0..=nc {
                        let m = metric_at(p, grid.xv(i), grid.xc(j), a);
                        let idx = grid.idx_2(p, i, j);
                        state.v.v2[idx] = dot3(cart_velocity(u0, n, grid.x2[idx], a), m.e2);
                    }
                }
            }
        }
    }
    state
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// exp(−16 r²/a²) with r the great-circle distance from center·a.
fn gaussian_bump(center: [f64; 3], x: [f64; 3], a: f64) -> f64 {
    let cosd = (dot3(center, x) / a).clamp(-1.0, 1.0);
    let theta = cosd.acos();
    (-16.0 * theta * theta).exp()
}

/// cos²(νλ)·cos²(νφ) in geographic longitude and latitude.
fn modulation(nu: u32, x: [f64; 3], a: f64) -> f64 {
    let lon = x[1].atan2(x[0]);
    let lat = (x[2] / a).clamp(-1.0, 1.0).asin();
    let cl = (nu as f64 * lon).cos();
    let cp = (nu as f64 * lat).cos();
    cl * cl * cp * cp
}

/// Velocity of rigid rotation with peak speed u0 about the given axis.
fn cart_velocity(u0: f64, axis: [f64; 3], x: [f64; 3], a: f64) -> [f64; 3] {
    [
        u0 * (axis[1] * x[2] - axis[2] * x[1]) / a,
        u0 * (axis[2] * x[0] - axis[0] * x[2]) / a,
        u0 * (axis[0] * x[1] - axis[1] * x[0]) / a,
    ]
}

/// Closed-form reference depth field at time `t`, when one exists.
/// The solid-rotation solution is stationary, so its reference at any time
/// is the initial field. The wave cases have no closed form and are
/// measured against a nested fine-grid run instead (`restrict_h`).
pub fn reference_solution(case: TestCase, grid: &CubedSphereGrid, _t: f64) -> Option<ScalarFieldH> {
    match case {
        TestCase::SolidRotation => Some(initial_condition(case, grid).h),
        _ => None,
    }
}

/// Samples a fine-grid h field at the vertex points shared with a nested
/// coarse grid. Vertices coincide when the fine cell count is an integer
/// multiple of the coarse one: coarse (i, j) maps to fine (fi, fj).
pub fn restrict_h(fine: &[f64], nc_fine: usize, nc_coarse: usize) -> Result<Vec<f64>> {
    let op = "restrict_h";
    if nc_coarse == 0 || nc_fine % nc_coarse != 0 {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("grids Nc = {nc_fine} and Nc = {nc_coarse} do not nest"),
        ));
    }
    let expected = grid::PANEL_COUNT * (nc_fine + 1) * (nc_fine + 1);
    if fine.len() != expected {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("field has {} values, expected {expected} at Nc = {nc_fine}", fine.len()),
        ));
    }
    let f = nc_fine / nc_coarse;
    let idx = |nc: usize, p: usize, i: usize, j: usize| p * (nc + 1) * (nc + 1) + j * (nc + 1) + i;
    let mut out = vec![0.0; grid::PANEL_COUNT * (nc_coarse + 1) * (nc_coarse + 1)];
    for p in 0..grid::PANEL_COUNT {
        for j in 0..=nc_coarse {
            for i in 0..=nc_coarse {
                out[idx(nc_coarse, p, i, j)] = fine[idx(nc_fine, p, f * i, f * j)];
            }
        }
    }
    Ok(out)
}

/// Relative error norms of a depth field against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// sqrt(Σ H_h J_h (h−r)² / Σ H_h J_h r²).
    pub l2: f64,
    /// max|h−r| / max|r|.
    pub linf: f64,
}

pub fn error_norms(
    h_num: &[f64],
    h_ref: &[f64],
    grid: &CubedSphereGrid,
    ops: &Discrete2DOperators,
) -> Result<ErrorNorms> {
    let op = "error_norms";
    if h_num.len() != h_ref.len() || h_num.len() != grid.nh() {
        return Err(Error::invalid(MODULE, op, "field lengths do not match the grid"));
    }
    let mut num2 = 0.0;
    let mut den2 = 0.0;
    let mut numi = 0.0f64;
    let mut deni = 0.0f64;
    for i in 0..h_num.len() {
        let w = ops.hh[i] * grid.jh[i];
        let d = h_num[i] - h_ref[i];
        num2 += w * d * d;
        den2 += w * h_ref[i] * h_ref[i];
        numi = numi.max(d.abs());
        deni = deni.max(h_ref[i].abs());
    }
    if den2 <= 0.0 || deni <= 0.0 {
        return Err(Error::invalid(MODULE, op, "reference field has zero norm"));
    }
    Ok(ErrorNorms {
        l2: (num2 / den2).sqrt(),
        linf: numi / deni,
    })
}

/// Error norms of one grid in a convergence study.
#[derive(Debug, Clone, Copy)]
pub struct GridErrors {
    pub nc: usize,
    pub errors: ErrorNorms,
}

/// Per-grid errors and pairwise convergence rates. `rates_*[i]` is fitted
/// between rows i−1 and i; `None` marks the first row or an exact match
/// on either grid, where the ratio is undefined.
#[derive(Debug, Clone)]
pub struct ConvergenceResult {
    pub case: TestCase,
    pub order: OperatorOrder,
    pub rows: Vec<GridErrors>,
    pub rates_l2: Vec<Option<f64>>,
    pub rates_linf: Vec<Option<f64>>,
}

impl ConvergenceResult {
    fn mean_rate(rates: &[Option<f64>]) -> Option<f64> {
        let defined: Vec<f64> = rates.iter().flatten().copied().collect();
        if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        }
    }

    /// Average of the defined pairwise l2 rates.
    pub fn mean_rate_l2(&self) -> Option<f64> {
        Self::mean_rate(&self.rates_l2)
    }

    /// Average of the defined pairwise l∞ rates.
    pub fn mean_rate_linf(&self) -> Option<f64> {
        Self::mean_rate(&self.rates_linf)
    }
}

fn pairwise_rates(rows: &[GridErrors], pick: impl Fn(&ErrorNorms) -> f64) -> Vec<Option<f64>> {
    let mut rates = vec![None; rows.len()];
    for i in 1..rows.len() {
        let e0 = pick(&rows[i - 1].errors);
        let e1 = pick(&rows[i].errors);
        if e0 > 0.0 && e1 > 0.0 {
            let refine = rows[i].nc as f64 / rows[i - 1].nc as f64;
            rates[i] = Some((e0 / e1).ln() / refine.ln());
        }
    }
    rates
}

/// Runs a case on every grid in `nc_list` and fits convergence rates.
///
/// Solid rotation integrates 10 days per grid and measures the final state
/// against the stationary initial field; `ref_nc` is unused. The Gaussian
/// cases integrate 25 days, sample errors every 6 h against a single
/// reference run at `ref_nc` restricted to each coarse grid, and record the
/// maximum over the run. The 6 h cadence requires every cell count,
/// including `ref_nc`, to be divisible by 4.
pub fn convergence_study(
    case: TestCase,
    order: OperatorOrder,
    nc_list: &[usize],
    ref_nc: usize,
) -> Result<ConvergenceResult> {
    let op = "convergence_study";
    if nc_list.len() < 2 {
        return Err(Error::invalid(MODULE, op, "need at least two grids for a rate"));
    }
    if !nc_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid(MODULE, op, "grid list must be strictly increasing"));
    }
    let rows = match case {
        TestCase::SolidRotation => {
            let results: Result<Vec<GridErrors>> = nc_list
                .par_iter()
                .map(|&nc| {
                    let model = Model::new(case.model_config(order, nc))?;
                    let ic = initial_condition(case, &model.grid);
                    let h_ref = ic.h.values.clone();
                    let final_state = integrate(&model, ic, case.span_seconds(), |_, _| Ok(()))?;
                    let errors = error_norms(&final_state.h.values, &h_ref, &model.grid, &model.ops)?;
                    Ok(GridErrors { nc, errors })
                })
                .collect();
            results?
        }
        TestCase::GaussHill1 | TestCase::GaussHill2 | TestCase::GaussHill3 => {
            let reference = nested_reference(case, order, ref_nc, nc_list)?;
            return convergence_study_with_reference(case, order, &reference);
        }
        TestCase::PoorlyResolved(_) => {
            return Err(Error::invalid(
                MODULE,
                op,
                "no reference solution for this case; use stationary_mode instead",
            ));
        }
    };
    let rates_l2 = pairwise_rates(&rows, |e| e.l2);
    let rates_linf = pairwise_rates(&rows, |e| e.linf);
    Ok(ConvergenceResult { case, order, rows, rates_l2, rates_linf })
}

/// Six-hourly fields of one fine-grid run restricted to each target grid;
/// `samples[target][sample]` is an h field on target grid `nc_list[target]`.
/// Computing this once and reusing it across operator families amortizes
/// the reference run, by far the most expensive part of a study.
pub struct NestedReference {
    nc_list: Vec<usize>,
    samples: Vec<Vec<Vec<f64>>>,
}

/// Integrates `case` at `ref_nc` over its standard span and restricts the
/// six-hourly depth fields to every grid in `nc_list`. The sampling cadence
/// requires all cell counts to be divisible by 4, and nested restriction
/// requires the reference grid to be finer than every target grid.
pub fn nested_reference(
    case: TestCase,
    order: OperatorOrder,
    ref_nc: usize,
    nc_list: &[usize],
) -> Result<NestedReference> {
    let op = "nested_reference";
    for &nc in nc_list.iter().chain([ref_nc].iter()) {
        if nc % 4 != 0 {
            return Err(Error::invalid(
                MODULE,
                op,
                format!("6-hour error sampling needs Nc divisible by 4, got {nc}"),
            ));
        }
    }
    if nc_list.iter().any(|&nc| nc >= ref_nc) {
        return Err(Error::invalid(MODULE, op, "reference grid must be finer than every test grid"));
    }
    let model = Model::new(case.model_config(order, ref_nc))?;
    let ic = initial_condition(case, &model.grid);
    let every = (ref_nc * 3) / 4;
    let mut samples: Vec<Vec<Vec<f64>>> = vec![Vec::new(); nc_list.len()];
    integrate(&model, ic, case.span_seconds(), |step, state| {
        if step % every == 0 {
            for (slot, &nc) in samples.iter_mut().zip(nc_list) {
                slot.push(restrict_h(&state.h.values, ref_nc, nc)?);
            }
        }
        Ok(())
    })?;
    Ok(NestedReference { nc_list: nc_list.to_vec(), samples })
}

/// Convergence study of a wave case against an existing reference. The
/// reference may come from a finer-order run than `order`; its own error is
/// then negligible next to the coarse-grid errors being measured.
pub fn convergence_study_with_reference(
    case: TestCase,
    order: OperatorOrder,
    reference: &NestedReference,
) -> Result<ConvergenceResult> {
    if !case.uses_nested_reference() {
        return Err(Error::invalid(
            MODULE,
            "convergence_study_with_reference",
            "case does not measure errors against a nested reference",
        ));
    }
    let results: Result<Vec<GridErrors>> = reference
        .nc_list
        .par_iter()
        .enumerate()
        .map(|(gi, &nc)| {
            let errors = max_error_vs_reference(case, order, nc, &reference.samples[gi])?;
            Ok(GridErrors { nc, errors })
        })
        .collect();
    let rows = results?;
    let rates_l2 = pairwise_rates(&rows, |e| e.l2);
    let rates_linf = pairwise_rates(&rows, |e| e.linf);
    Ok(ConvergenceResult { case, order, rows, rates_l2, rates_linf })
}

/// Runs one grid of a wave case and returns the maximum error norms over
/// the six-hourly samples.
fn max_error_vs_reference(
    case: TestCase,
    order: OperatorOrder,
    nc: usize,
    reference: &[Vec<f64>],
) -> Result<ErrorNorms> {
    let model = Model::new(case.model_config(order, nc))?;
    let ic = initial_condition(case, &model.grid);
    let every = (nc * 3) / 4;
    let mut max = ErrorNorms { l2: 0.0, linf: 0.0 };
    let mut sample = 0usize;
    integrate(&model, ic, case.span_seconds(), |step, state| {
        if step % every == 0 {
            if sample >= reference.len() {
                return Err(Error::numerical(MODULE, "max_error_vs_reference", sample, "reference run has too few samples".to_string()));
            }
            let e = error_norms(&state.h.values, &reference[sample], &model.grid, &model.ops)?;
            max.l2 = max.l2.max(e.l2);
            max.linf = max.linf.max(e.linf);
            sample += 1;
        }
        Ok(())
    })?;
    Ok(max)
}

/// Writes a convergence table as CSV: Nc, both error norms, and the
/// pairwise rates (blank where undefined).
pub fn write_convergence_csv(path: &std::path::Path, result: &ConvergenceResult) -> Result<()> {
    let op = "write_convergence_csv";
    let mut out = String::from("Nc,l2,linf,rate_l2,rate_linf\n");
    for (i, row) in result.rows.iter().enumerate() {
        let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:.16e}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{},{}\n",
            row.nc,
            row.errors.l2,
            row.errors.linf,
            fmt_rate(result.rates_l2[i]),
            fmt_rate(result.rates_linf[i]),
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(MODULE, op, path.display().to_string(), e))
}

/// Time-mean depth field of a long run and its grid-scale content.
#[derive(Debug, Clone)]
pub struct StationaryMode {
    /// Arithmetic mean of h over all step states, including the initial one.
    pub time_mean: Vec<f64>,
    /// Energy fraction of the checkerboard-pass filter response of the
    /// time mean; near zero for smooth fields, one for a pure checkerboard.
    pub checkerboard_fraction: f64,
    /// Diagnostics sampled every six hours.
    pub series: Vec<DiagnosticSample>,
}

/// Integrates a case over its standard span and accumulates the running
/// time-mean of the depth field. Intended for the under-resolved wave
/// cases, whose large-scale content settles into a stationary mode.
pub fn stationary_mode(case: TestCase, order: OperatorOrder, nc: usize) -> Result<StationaryMode> {
    let model = Model::new(case.model_config(order, nc))?;
    let ic = initial_condition(case, &model.grid);
    let mut mean = vec![0.0; model.grid.nh()];
    let mut count = 0usize;
    let mut series = Vec::new();
    let every = ((SAMPLE_SECONDS / model.config.dt).round() as usize).max(1);
    integrate(&model, ic, case.span_seconds(), |step, state| {
        for (m, h) in mean.iter_mut().zip(&state.h.values) {
            *m += h;
        }
        count += 1;
        if step % every == 0 {
            series.push(DiagnosticSample {
                t: state.t,
                diagnostics: diagnostics(state, &model)?,
            });
        }
        Ok(())
    })?;
    for m in mean.iter_mut() {
        *m /= count as f64;
    }
    let checkerboard_fraction = checkerboard_fraction(&mean, &model.grid, &model.ops);
    Ok(StationaryMode { time_mean: mean, checkerboard_fraction, series })
}

/// Quadrature-weighted energy fraction of the two-grid-interval component
/// of an h field, measured over panel-interior points.
///
/// The filter c = m − (m_W + m_E + m_S + m_N)/4, halved, reproduces a pure
/// (−1)^(i+j) checkerboard exactly and responds to smooth fields at
/// O(Δx²), so fraction ≈ 1 flags a checkerboard and fraction ≈ 0 certifies
/// smoothness at the grid scale.
pub fn checkerboard_fraction(values: &[f64], grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> f64 {
    let nc = grid.nc;
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..grid::PANEL_COUNT {
        for j in 1..nc {
            for i in 1..nc {
                let m = values[grid.idx_h(p, i, j)];
                let around = 0.25
                    * (values[grid.idx_h(p, i - 1, j)]
                        + values[grid.idx_h(p, i + 1, j)]
                        + values[grid.idx_h(p, i, j - 1)]
                        + values[grid.idx_h(p, i, j + 1)]);
                let c = 0.5 * (m - around);
                let w = ops.hh[grid.idx_h(p, i, j)] * grid.jh[grid.idx_h(p, i, j)];
                num += w * c * c;
                den += w * m * m;
            }
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}
