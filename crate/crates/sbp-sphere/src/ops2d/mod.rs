//! Multi-panel 2D operators assembled from the 1D staggered families.
//!
//! Every 2D operator is a tensor product of 1D operators applied by line
//! sweeps: along i (the fastest-varying index) or along j, panel by panel.
//! Derivatives and interpolations move fields between the staggered point
//! sets (h = vertex×vertex, 1 = center×vertex, 2 = vertex×center,
//! ζ = center×center); diagonal quadrature weights are products of the 1D
//! weights.
//!
//! Panels are glued by two interface operators built from the grid's
//! pairing tables:
//!
//! - `apply_ah` projects an h-field onto interface-continuous fields by a
//!   J·H-weighted average over each group of coincident boundary points
//!   (pairs on edges, triples at cube corners). It is idempotent and
//!   self-adjoint in the J_h H_h inner product.
//! - The flux closure S adds, at every boundary h-point, half the mismatch
//!   between the panel's own outward normal mass flux and its neighbor's,
//!   so the divergence telescopes exactly in the global mass sum.
//!
//! The metric operator maps covariant to contravariant components with the
//! diagonal Q11/Q22 terms pointwise and the Q12 coupling routed through the
//! h grid, which keeps the associated quadratic form symmetric. Coriolis
//! terms come in several variants, all sharing the pointwise rotation C and
//! differing in how values are averaged across interfaces.

use nalgebra::DMatrix;

use crate::banded::BandedOp;
use crate::error::{Error, Result};
use crate::grid::{CubedSphereGrid, Edge, VPoint, PANEL_COUNT};
use crate::sbp1d::{build_operator_set, Operator1DSet, OperatorOrder};

const MODULE: &str = "ops2d";

/// Which components a velocity field currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// v_i = v·e_i.
    Covariant,
    /// vⁱ with v = vⁱe_i.
    Contravariant,
    /// J_v vⁱ, the flux form consumed by the divergence closure.
    MassFlux,
}

/// Scalar samples at the x^h points of every panel.
#[derive(Debug, Clone)]
pub struct ScalarFieldH {
    pub values: Vec<f64>,
    /// True when paired interface entries are known to agree (an output of
    /// `apply_ah` or of operators ending in it).
    pub interface_continuous: bool,
}

impl ScalarFieldH {
    pub fn zeros(grid: &CubedSphereGrid) -> Self {
        ScalarFieldH {
            values: vec![0.0; grid.nh()],
            interface_continuous: true,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        ScalarFieldH {
            values,
            interface_continuous: false,
        }
    }
}

/// Velocity components: v1 at the x^1 points, v2 at the x^2 points.
#[derive(Debug, Clone)]
pub struct VectorFieldV {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub basis: Basis,
}

impl VectorFieldV {
    pub fn zeros(grid: &CubedSphereGrid, basis: Basis) -> Self {
        VectorFieldV {
            v1: vec![0.0; grid.nv()],
            v2: vec![0.0; grid.nv()],
            basis,
        }
    }

    fn expect_basis(&self, want: Basis, op: &'static str) -> Result<()> {
        if self.basis != want {
            return Err(Error::invalid(
                MODULE,
                op,
                format!("basis tag mismatch: field holds {:?}, operation needs {want:?}", self.basis),
            ));
        }
        Ok(())
    }
}

/// Applies a 1D operator along the i axis of every (j, panel) line.
fn sweep_i(b: &BandedOp, nj: usize, input: &[f64], output: &mut [f64]) {
    let ni_in = b.n_in();
    let ni_out = b.n_out();
    debug_assert_eq!(input.len() % (nj * ni_in), 0);
    let panels = input.len() / (nj * ni_in);
    debug_assert_eq!(output.len(), panels * nj * ni_out);
    for line in 0..panels * nj {
        let row_in = &input[line * ni_in..][..ni_in];
        let row_out = &mut output[line * ni_out..][..ni_out];
        b.apply(row_in, row_out);
    }
}

/// Applies a 1D operator along the j axis of every (i, panel) line.
fn sweep_j(b: &BandedOp, ni: usize, input: &[f64], output: &mut [f64]) {
    let nj_in = b.n_in();
    let nj_out = b.n_out();
    debug_assert_eq!(input.len() % (nj_in * ni), 0);
    let panels = input.len() / (nj_in * ni);
    debug_assert_eq!(output.len(), panels * nj_out * ni);
    for p in 0..panels {
        let base_in = p * nj_in * ni;
        let base_out = p * nj_out * ni;
        for jo in 0..nj_out {
            let (start, coeffs) = b.row(jo);
            let out_row = &mut output[base_out + jo * ni..][..ni];
            out_row.fill(0.0);
            for (k, &c) in coeffs.iter().enumerate() {
                let in_row = &input[base_in + (start + k) * ni..][..ni];
                for i in 0..ni {
                    out_row[i] += c * in_row[i];
                }
            }
        }
    }
}

/// All 2D operators for one grid and one operator family.
#[derive(Debug, Clone)]
pub struct Discrete2DOperators {
    pub order: OperatorOrder,
    pub nc: usize,
    /// The underlying 1D family at n = Nc, dx = (π/2)/Nc.
    pub set: Operator1DSet,
    /// Diagonal quadrature weights per point set (products of 1D weights).
    pub hh: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// J_h·Q12 at h points, the factor inside the metric coupling chain.
    jq12_h: Vec<f64>,
}

/// Builds the 2D operator tables for `order` on `grid`.
pub fn build_operators(grid: &CubedSphereGrid, order: OperatorOrder) -> Result<Discrete2DOperators> {
    let nc = grid.nc;
    let set = build_operator_set(order, nc, grid.dx)?;
    let mut hh = vec![0.0; grid.nh()];
    let mut h1 = vec![0.0; grid.nv()];
    let mut h2 = vec![0.0; grid.nv()];
    for p in 0..PANEL_COUNT {
        for j in 0..=nc {
            for i in 0..=nc {
                hh[grid.idx_h(p, i, j)] = set.hv[i] * set.hv[j];
            }
        }
        for j in 0..=nc {
            for i in 0..nc {
                h1[grid.idx_1(p, i, j)] = set.hc[i] * set.hv[j];
            }
        }
        for j in 0..nc {
            for i in 0..=nc {
                h2[grid.idx_2(p, i, j)] = set.hv[i] * set.hc[j];
            }
        }
    }
    let jq12_h = grid
        .jh
        .iter()
        .zip(&grid.q12_h)
        .map(|(j, q)| j * q)
        .collect();
    Ok(Discrete2DOperators {
        order,
        nc,
        set,
        hh,
        h1,
        h2,
        jq12_h,
    })
}

impl Discrete2DOperators {
    /// Derivative along x1, h → x^1.
    pub fn d_h1(&self, x: &[f64]) -> Vec<f64> {
        let nj = self.nc + 1;
        let mut out = vec![0.0; x.len() / (self.nc + 1) * self.nc];
        sweep_i(&self.set.dvc, nj, x, &mut out);
        out
    }

    /// Derivative along x2, h → x^2.
    pub fn d_h2(&self, x: &[f64]) -> Vec<f64> {
        let ni = self.nc + 1;
        let mut out = vec![0.0; x.len() / (self.nc + 1) * self.nc];
        sweep_j(&self.set.dvc, ni, x, &mut out);
        out
    }

    /// Derivative along x1, x^1 → h.
    pub fn d_1h(&self, x: &[f64]) -> Vec<f64> {
        let nj = self.nc + 1;
        let mut out = vec![0.0; x.len() / self.nc * (self.nc + 1)];
        sweep_i(&self.set.dcv, nj, x, &mut out);
        out
    }

    /// Derivative along x2, x^2 → h.
    pub fn d_2h(&self, x: &[f64]) -> Vec<f64> {
        let ni = self.nc + 1;
        let mut out = vec![0.0; x.len() / self.nc * (self.nc + 1)];
        sweep_j(&self.set.dcv, ni, x, &mut out);
        out
    }

    /// Interpolation along x1, h → x^1.
    pub fn p_h1(&self, x: &[f64]) -> Vec<f64> {
        let nj = self.nc + 1;
        let mut out = vec![0.0; x.len() / (self.nc + 1) * self.nc];
        sweep_i(&self.set.pvc, nj, x, &mut out);
        out
    }

    /// Interpolation along x1, x^1 → h.
    pub fn p_1h(&self, x: &[f64]) -> Vec<f64> {
        let nj = self.nc + 1;
        let mut out = vec![0.0; x.len() / self.nc * (self.nc + 1)];
        sweep_i(&self.set.pcv, nj, x, &mut out);
        out
    }

    /// Interpolation along x2, h → x^2.
    pub fn p_h2(&self, x: &[f64]) -> Vec<f64> {
        let ni = self.nc + 1;
        let mut out = vec![0.0; x.len() / (self.nc + 1) * self.nc];
        sweep_j(&self.set.pvc, ni, x, &mut out);
        out
    }

    /// Interpolation along x2, x^2 → h.
    pub fn p_2h(&self, x: &[f64]) -> Vec<f64> {
        let ni = self.nc + 1;
        let mut out = vec![0.0; x.len() / self.nc * (self.nc + 1)];
        sweep_j(&self.set.pcv, ni, x, &mut out);
        out
    }

    /// Derivative along x2, x^1 → x^ζ (used by the curl diagnostic).
    pub fn d_1z(&self, x: &[f64]) -> Vec<f64> {
        let ni = self.nc;
        let mut out = vec![0.0; x.len() / (self.nc + 1) * self.nc];
        sweep_j(&self.set.dvc, ni, x, &mut out);
        out
    }

    /// Derivative along x1, x^2 → x^ζ.
    pub fn d_2z(&self, x: &[f64]) -> Vec<f64> {
        let nj = self.nc;
        let mut out = vec![0.0; x.len() / (self.nc + 1) * self.nc];
        sweep_i(&self.set.dvc, nj, x, &mut out);
        out
    }

    /// Boundary term of the x1 integration-by-parts identity, x^1 → h:
    /// at i = Nc the H_v-weighted right extrapolation of the row, at i = 0
    /// minus the left extrapolation, zero elsewhere.
    pub fn r_1h(&self, grid: &CubedSphereGrid, u1: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; grid.nh()];
        for p in 0..PANEL_COUNT {
            for j in 0..=self.nc {
                out[grid.idx_h(p, self.nc, j)] =
                    self.set.hv[j] * self.extrapolate_row_1(grid, u1, p, j, true);
                out[grid.idx_h(p, 0, j)] =
                    -self.set.hv[j] * self.extrapolate_row_1(grid, u1, p, j, false);
            }
        }
        out
    }

    /// Boundary term of the x2 identity, x^2 → h.
    pub fn r_2h(&self, grid: &CubedSphereGrid, u2: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; grid.nh()];
        for p in 0..PANEL_COUNT {
            for i in 0..=self.nc {
                out[grid.idx_h(p, i, self.nc)] =
                    self.set.hv[i] * self.extrapolate_col_2(grid, u2, p, i, true);
                out[grid.idx_h(p, i, 0)] =
                    -self.set.hv[i] * self.extrapolate_col_2(grid, u2, p, i, false);
            }
        }
        out
    }

    /// Extrapolates the x^1 field along row j of panel p to the right
    /// (east) or left (west) panel boundary.
    fn extrapolate_row_1(
        &self,
        grid: &CubedSphereGrid,
        u1: &[f64],
        p: usize,
        j: usize,
        right: bool,
    ) -> f64 {
        let w = if right { &self.set.r } else { &self.set.l };
        let mut acc = 0.0;
        for i in 0..self.nc {
            acc += w[i] * u1[grid.idx_1(p, i, j)];
        }
        acc
    }

    /// Extrapolates the x^2 field along column i of panel p to the north or
    /// south panel boundary.
    fn extrapolate_col_2(
        &self,
        grid: &CubedSphereGrid,
        u2: &[f64],
        p: usize,
        i: usize,
        north: bool,
    ) -> f64 {
        let w = if north { &self.set.r } else { &self.set.l };
        let mut acc = 0.0;
        for j in 0..self.nc {
            acc += w[j] * u2[grid.idx_2(p, i, j)];
        }
        acc
    }

    /// One-sided outward normal mass flux, H_v-weighted, for every boundary
    /// slot; indexed by the pairing's slot ids.
    fn slot_values(&self, grid: &CubedSphereGrid, u1: &[f64], u2: &[f64]) -> Vec<f64> {
        grid.pairing
            .slots
            .iter()
            .map(|s| match s.edge {
                Edge::East => self.set.hv[s.k] * self.extrapolate_row_1(grid, u1, s.panel, s.k, true),
                Edge::West => -self.set.hv[s.k] * self.extrapolate_row_1(grid, u1, s.panel, s.k, false),
                Edge::North => self.set.hv[s.k] * self.extrapolate_col_2(grid, u2, s.panel, s.k, true),
                Edge::South => -self.set.hv[s.k] * self.extrapolate_col_2(grid, u2, s.panel, s.k, false),
            })
            .collect()
    }

    /// Adds the interface flux closure S·u to `out` (an h-field): each
    /// boundary slot contributes minus half the sum of its own and its
    /// partner's outward flux, divided by the local H_h weight.
    fn add_flux_closure(&self, grid: &CubedSphereGrid, u1: &[f64], u2: &[f64], out: &mut [f64]) {
        let vals = self.slot_values(grid, u1, u2);
        for (s, slot) in grid.pairing.slots.iter().enumerate() {
            let t = grid.pairing.slot_partner[s];
            out[slot.h] -= 0.5 * (vals[s] + vals[t]) / self.hh[slot.h];
        }
    }

    /// In-place J_h H_h-weighted averaging over every group of coincident
    /// interface points.
    fn average_interfaces(&self, grid: &CubedSphereGrid, x: &mut [f64]) {
        for pair in &grid.pairing.edge_groups {
            let w0 = grid.jh[pair[0]] * self.hh[pair[0]];
            let w1 = grid.jh[pair[1]] * self.hh[pair[1]];
            let avg = (w0 * x[pair[0]] + w1 * x[pair[1]]) / (w0 + w1);
            x[pair[0]] = avg;
            x[pair[1]] = avg;
        }
        for tri in &grid.pairing.corner_groups {
            let w: Vec<f64> = tri.iter().map(|&m| grid.jh[m] * self.hh[m]).collect();
            let total: f64 = w.iter().sum();
            let avg = tri
                .iter()
                .zip(&w)
                .map(|(&m, &wm)| wm * x[m])
                .sum::<f64>()
                / total;
            for &m in tri {
                x[m] = avg;
            }
        }
    }
}

/// Interface projection A_h: J·H-weighted average at every shared boundary
/// point, identity in panel interiors.
pub fn apply_ah(h: &ScalarFieldH, grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> ScalarFieldH {
    let mut values = h.values.clone();
    ops.average_interfaces(grid, &mut values);
    ScalarFieldH {
        values,
        interface_continuous: true,
    }
}

/// Covariant gradient D_hv A_h h: the projection makes the differentiated
/// field single-valued on interfaces first.
pub fn grad(h: &ScalarFieldH, grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> VectorFieldV {
    let ah = apply_ah(h, grid, ops);
    VectorFieldV {
        v1: ops.d_h1(&ah.values),
        v2: ops.d_h2(&ah.values),
        basis: Basis::Covariant,
    }
}

/// Divergence closure A_h J_h⁻¹ (D_vh + S) J_v ṽ of a contravariant field.
pub fn div(v: &VectorFieldV, grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> Result<ScalarFieldH> {
    v.expect_basis(Basis::Contravariant, "div")?;
    let u1: Vec<f64> = v.v1.iter().zip(&grid.j1).map(|(a, j)| a * j).collect();
    let u2: Vec<f64> = v.v2.iter().zip(&grid.j2).map(|(a, j)| a * j).collect();
    let mut out = ops.d_1h(&u1);
    for (o, d) in out.iter_mut().zip(ops.d_2h(&u2)) {
        *o += d;
    }
    ops.add_flux_closure(grid, &u1, &u2, &mut out);
    for (o, j) in out.iter_mut().zip(&grid.jh) {
        *o /= j;
    }
    ops.average_interfaces(grid, &mut out);
    Ok(ScalarFieldH {
        values: out,
        interface_continuous: true,
    })
}

/// Raises indices: covariant → contravariant components. Diagonal metric
/// terms act pointwise; the Q12 coupling is interpolated through the h grid
/// weighted by J_h Q12, then divided by the local Jacobian.
pub fn co2contra(v: &VectorFieldV, grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> Result<VectorFieldV> {
    v.expect_basis(Basis::Covariant, "co2contra")?;
    let cross = |x: &[f64]| -> Vec<f64> {
        x.iter().zip(&ops.jq12_h).map(|(a, w)| a * w).collect()
    };
    let h2 = ops.p_2h(&v.v2);
    let mut out1 = ops.p_h1(&cross(&h2));
    for (i, o) in out1.iter_mut().enumerate() {
        *o = grid.q11_1[i] * v.v1[i] + *o / grid.j1[i];
    }
    let h1 = ops.p_1h(&v.v1);
    let mut out2 = ops.p_h2(&cross(&h1));
    for (i, o) in out2.iter_mut().enumerate() {
        *o = grid.q22_2[i] * v.v2[i] + *o / grid.j2[i];
    }
    Ok(VectorFieldV {
        v1: out1,
        v2: out2,
        basis: Basis::Contravariant,
    })
}

/// Curl diagnostic at the x^ζ points: J_ζ⁻¹ (∂₁v2 − ∂₂v1).
pub fn curl(v: &VectorFieldV, grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> Result<Vec<f64>> {
    v.expect_basis(Basis::Covariant, "curl")?;
    let d2v1 = ops.d_1z(&v.v1);
    let mut out = ops.d_2z(&v.v2);
    for ((o, d), j) in out.iter_mut().zip(&d2v1).zip(&grid.jz) {
        *o = (*o - d) / j;
    }
    Ok(out)
}

/// Velocity inner product wᵀ H_v J_v Q v of two covariant fields.
pub fn quadrature_dot(
    w: &VectorFieldV,
    v: &VectorFieldV,
    grid: &CubedSphereGrid,
    ops: &Discrete2DOperators,
) -> Result<f64> {
    w.expect_basis(Basis::Covariant, "quadrature_dot")?;
    let qv = co2contra(v, grid, ops)?;
    let mut acc = 0.0;
    for i in 0..w.v1.len() {
        acc += ops.h1[i] * grid.j1[i] * w.v1[i] * qv.v1[i];
    }
    for i in 0..w.v2.len() {
        acc += ops.h2[i] * grid.j2[i] * w.v2[i] * qv.v2[i];
    }
    Ok(acc)
}

/// Scalar inner product aᵀ H_h J_h b.
pub fn quadrature_h(a: &ScalarFieldH, b: &ScalarFieldH, grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.values.len() {
        acc += ops.hh[i] * grid.jh[i] * a.values[i] * b.values[i];
    }
    acc
}

/// The available discretizations of the Coriolis term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoriolisVariant {
    /// Pointwise rotation of interpolated fluxes.
    Basic,
    /// Symmetrized interface-averaged form, general Jacobians.
    FullContinuous,
    /// One-sided interface-averaged form, general Jacobians.
    SimplifiedContinuous,
    /// Interface-continuous form; requires J continuous across edges.
    Main,
    /// `Main` with the interface averaging dropped; not interface-continuous
    /// but retains the antisymmetric energy structure.
    MainDiscontinuous,
}

impl std::fmt::Display for CoriolisVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CoriolisVariant::Basic => "basic",
            CoriolisVariant::FullContinuous => "full-continuous",
            CoriolisVariant::SimplifiedContinuous => "simplified-continuous",
            CoriolisVariant::Main => "main",
            CoriolisVariant::MainDiscontinuous => "main-discontinuous",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for CoriolisVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "basic" => Ok(CoriolisVariant::Basic),
            "full-continuous" => Ok(CoriolisVariant::FullContinuous),
            "simplified-continuous" => Ok(CoriolisVariant::SimplifiedContinuous),
            "main" => Ok(CoriolisVariant::Main),
            "main-discontinuous" => Ok(CoriolisVariant::MainDiscontinuous),
            other => Err(format!("unknown coriolis variant '{other}'")),
        }
    }
}

/// A pair of component fields collocated at the h points.
struct HPair {
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl Discrete2DOperators {
    /// Interpolates both components of a v-located pair to the h points.
    fn pvh(&self, v1: &[f64], v2: &[f64]) -> HPair {
        HPair {
            w1: self.p_1h(v1),
            w2: self.p_2h(v2),
        }
    }

    /// Interpolates an h-located pair back to the v points.
    fn phv(&self, w: &HPair) -> (Vec<f64>, Vec<f64>) {
        (self.p_h1(&w.w1), self.p_h2(&w.w2))
    }

    /// Pointwise rotation (w1, w2) → (f·w2, −f·w1).
    fn c_apply(&self, f: &[f64], w: &HPair) -> HPair {
        let w1 = f.iter().zip(&w.w2).map(|(f, b)| f * b).collect();
        let w2 = f.iter().zip(&w.w1).map(|(f, a)| -f * a).collect();
        HPair { w1, w2 }
    }

    /// V: covariant pair → Cartesian components → interface average →
    /// covariant pair. Produces interface-continuous output.
    fn v_apply(&self, grid: &CubedSphereGrid, w: &HPair) -> HPair {
        let n = w.w1.len();
        let mut cart = vec![[0.0; 3]; n];
        for m in 0..n {
            let [d1, d2] = grid.cov_to_cart[m];
            for c in 0..3 {
                cart[m][c] = d1[c] * w.w1[m] + d2[c] * w.w2[m];
            }
        }
        self.average_cart(grid, &mut cart);
        let mut out = HPair {
            w1: vec![0.0; n],
            w2: vec![0.0; n],
        };
        for m in 0..n {
            let [e1, e2] = grid.cart_to_cov[m];
            for c in 0..3 {
                out.w1[m] += e1[c] * cart[m][c];
                out.w2[m] += e2[c] * cart[m][c];
            }
        }
        out
    }

    /// Ṽ, the J·H-adjoint partner of V: transposed transforms around the
    /// same interface average.
    fn vt_apply(&self, grid: &CubedSphereGrid, w: &HPair) -> HPair {
        let n = w.w1.len();
        let mut cart = vec![[0.0; 3]; n];
        for m in 0..n {
            let [e1, e2] = grid.cart_to_cov[m];
            for c in 0..3 {
                cart[m][c] = e1[c] * w.w1[m] + e2[c] * w.w2[m];
            }
        }
        self.average_cart(grid, &mut cart);
        let mut out = HPair {
            w1: vec![0.0; n],
            w2: vec![0.0; n],
        };
        for m in 0..n {
            let [d1, d2] = grid.cov_to_cart[m];
            for c in 0..3 {
                out.w1[m] += d1[c] * cart[m][c];
                out.w2[m] += d2[c] * cart[m][c];
            }
        }
        out
    }

    fn average_cart(&self, grid: &CubedSphereGrid, cart: &mut [[f64; 3]]) {
        for c in 0..3 {
            let mut comp: Vec<f64> = cart.iter().map(|v| v[c]).collect();
            self.average_interfaces(grid, &mut comp);
            for (v, x) in cart.iter_mut().zip(comp) {
                v[c] = x;
            }
        }
    }
}

/// Coriolis tendency of a contravariant velocity field, using Coriolis
/// parameter samples `f` at the h points. Returns a covariant tendency.
pub fn coriolis(
    v: &VectorFieldV,
    variant: CoriolisVariant,
    grid: &CubedSphereGrid,
    ops: &Discrete2DOperators,
    f: &[f64],
) -> Result<VectorFieldV> {
    v.expect_basis(Basis::Contravariant, "coriolis")?;
    let scale = |x: &[f64], s: &[f64]| -> Vec<f64> { x.iter().zip(s).map(|(a, b)| a * b).collect() };
    let (out1, out2) = match variant {
        CoriolisVariant::Basic => {
            let u1 = scale(&v.v1, &grid.j1);
            let u2 = scale(&v.v2, &grid.j2);
            let w = ops.pvh(&u1, &u2);
            let w = ops.c_apply(f, &w);
            ops.phv(&w)
        }
        CoriolisVariant::SimplifiedContinuous => {
            let u1 = scale(&v.v1, &grid.j1);
            let u2 = scale(&v.v2, &grid.j2);
            let w = ops.pvh(&u1, &u2);
            let w = ops.c_apply(f, &w);
            let w = ops.v_apply(grid, &w);
            ops.phv(&w)
        }
        CoriolisVariant::FullContinuous => {
            let u1 = scale(&v.v1, &grid.j1);
            let u2 = scale(&v.v2, &grid.j2);
            let mut w = ops.pvh(&u1, &u2);
            for (x, j) in w.w1.iter_mut().zip(&grid.jh) {
                *x /= j;
            }
            for (x, j) in w.w2.iter_mut().zip(&grid.jh) {
                *x /= j;
            }
            let mut a = ops.c_apply(f, &w);
            for (x, j) in a.w1.iter_mut().zip(&grid.jh) {
                *x *= j;
            }
            for (x, j) in a.w2.iter_mut().zip(&grid.jh) {
                *x *= j;
            }
            let a = ops.v_apply(grid, &a);
            let b = ops.vt_apply(grid, &w);
            let mut b = ops.c_apply(f, &b);
            for (x, j) in b.w1.iter_mut().zip(&grid.jh) {
                *x *= j;
            }
            for (x, j) in b.w2.iter_mut().zip(&grid.jh) {
                *x *= j;
            }
            let half = HPair {
                w1: a.w1.iter().zip(&b.w1).map(|(p, q)| 0.5 * (p + q)).collect(),
                w2: a.w2.iter().zip(&b.w2).map(|(p, q)| 0.5 * (p + q)).collect(),
            };
            ops.phv(&half)
        }
        CoriolisVariant::Main | CoriolisVariant::MainDiscontinuous => {
            let w = ops.pvh(&v.v1, &v.v2);
            let mut w = ops.c_apply(f, &w);
            for (x, j) in w.w1.iter_mut().zip(&grid.jh) {
                *x *= j * j;
            }
            for (x, j) in w.w2.iter_mut().zip(&grid.jh) {
                *x *= j * j;
            }
            let w = if variant == CoriolisVariant::Main {
                ops.v_apply(grid, &w)
            } else {
                w
            };
            let (mut o1, mut o2) = ops.phv(&w);
            for (x, j) in o1.iter_mut().zip(&grid.j1) {
                *x /= j;
            }
            for (x, j) in o2.iter_mut().zip(&grid.j2) {
                *x /= j;
            }
            (o1, o2)
        }
    };
    Ok(VectorFieldV {
        v1: out1,
        v2: out2,
        basis: Basis::Covariant,
    })
}

/// Positive-definiteness criterion for the metric operator on one block:
/// the spectral radius of W22^{−1/2} W12ᵀ W11^{−1} W12 W22^{−1/2}, computed
/// by power iteration on matrix-free sweeps. The value must stay below 1
/// for the velocity quadratic form to be positive definite.
pub struct PdBlock<'a> {
    pub set: &'a Operator1DSet,
    pub nc: usize,
    /// Diagonal of W11 = H_1 J_1 Q11 (x^1 points of the block).
    pub w11: Vec<f64>,
    /// Diagonal of W22 = H_2 J_2 Q22.
    pub w22: Vec<f64>,
    /// J·Q12 at the block's h points.
    pub jq12: Vec<f64>,
    /// Diagonal of H_1 and H_2 on the block.
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

/// Largest eigenvalue of the criterion operator on one block.
pub fn pd_block(b: &PdBlock) -> Result<f64> {
    const OP: &str = "pd_criterion";
    let nc = b.nc;
    let n1 = nc * (nc + 1);
    let cross = |x: &[f64]| -> Vec<f64> { x.iter().zip(&b.jq12).map(|(a, w)| a * w).collect() };
    // W12 x = H_1 P_h1 (J Q12 (P_2h x)); its J·H adjoint is the mirrored
    // chain through the other component.
    let w12 = |x: &[f64]| -> Vec<f64> {
        let nj = nc + 1;
        let mut h = vec![0.0; (nc + 1) * (nc + 1)];
        sweep_j(&b.set.pcv, nc + 1, x, &mut h);
        let h = cross(&h);
        let mut out = vec![0.0; n1];
        sweep_i(&b.set.pvc, nj, &h, &mut out);
        for (o, w) in out.iter_mut().zip(&b.h1) {
            *o *= w;
        }
        out
    };
    let w12t = |x: &[f64]| -> Vec<f64> {
        let nj = nc + 1;
        let mut h = vec![0.0; (nc + 1) * (nc + 1)];
        sweep_i(&b.set.pcv, nj, x, &mut h);
        let h = cross(&h);
        let mut out = vec![0.0; n1];
        sweep_j(&b.set.pvc, nc + 1, &h, &mut out);
        for (o, w) in out.iter_mut().zip(&b.h2) {
            *o *= w;
        }
        out
    };
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y: Vec<f64> = x
            .iter()
            .zip(&b.w22)
            .map(|(v, w)| v / w.sqrt())
            .collect();
        y = w12(&y);
        for (v, w) in y.iter_mut().zip(&b.w11) {
            *v /= w;
        }
        y = w12t(&y);
        for (v, w) in y.iter_mut().zip(&b.w22) {
            *v /= w.sqrt();
        }
        y
    };

    let mut x: Vec<f64> = (0..n1)
        .map(|i| {
            let mut s = (i as u64).wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(0x2545f4914f6cdd1d);
            s ^= s >> 33;
            s = s.wrapping_mul(0xff51afd7ed558ccd);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n0 = norm(&x);
    for v in x.iter_mut() {
        *v /= n0;
    }
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let y = apply(&x);
        let next = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        let converged = (next - lambda).abs() <= 1e-8 * next.abs().max(1e-300);
        lambda = next;
        x = y.iter().map(|v| v / ny).collect();
        if converged {
            return Ok(lambda);
        }
    }
    Err(Error::numerical(
        MODULE,
        OP,
        0,
        "power iteration did not converge within 10000 iterations".to_string(),
    ))
}

/// Criterion value maximized over all panels of the grid.
pub fn pd_criterion(grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> Result<f64> {
    let nc = grid.nc;
    let ph = grid.panel_h();
    let pv = grid.panel_v();
    let mut rho: f64 = 0.0;
    for p in 0..PANEL_COUNT {
        let sl_1 = p * pv..(p + 1) * pv;
        let sl_2 = p * pv..(p + 1) * pv;
        let sl_h = p * ph..(p + 1) * ph;
        let h1 = ops.h1[sl_1.clone()].to_vec();
        let h2 = ops.h2[sl_2.clone()].to_vec();
        let w11: Vec<f64> = h1
            .iter()
            .zip(&grid.j1[sl_1.clone()])
            .zip(&grid.q11_1[sl_1.clone()])
            .map(|((h, j), q)| h * j * q)
            .collect();
        let w22: Vec<f64> = h2
            .iter()
            .zip(&grid.j2[sl_2.clone()])
            .zip(&grid.q22_2[sl_2.clone()])
            .map(|((h, j), q)| h * j * q)
            .collect();
        let jq12 = ops.jq12_h[sl_h].to_vec();
        let block = PdBlock {
            set: &ops.set,
            nc,
            w11,
            w22,
            jq12,
            h1,
            h2,
        };
        rho = rho.max(pd_block(&block)?);
    }
    Ok(rho)
}

/// Criterion value for a flat single block with constant skew angle α
/// (metric g11 = g22 = 1, g12 = cos α, J = sin α).
pub fn pd_criterion_flat(order: OperatorOrder, nc: usize, alpha: f64) -> Result<f64> {
    let set = build_operator_set(order, nc, 1.0 / nc as f64)?;
    let j = alpha.sin();
    let q11 = 1.0 / (j * j);
    let q12 = -alpha.cos() / (j * j);
    let n1 = nc * (nc + 1);
    let nh = (nc + 1) * (nc + 1);
    let mut h1 = vec![0.0; n1];
    let mut h2 = vec![0.0; n1];
    for jj in 0..=nc {
        for i in 0..nc {
            h1[jj * nc + i] = set.hc[i] * set.hv[jj];
        }
    }
    for jj in 0..nc {
        for i in 0..=nc {
            h2[jj * (nc + 1) + i] = set.hv[i] * set.hc[jj];
        }
    }
    let w11: Vec<f64> = h1.iter().map(|h| h * j * q11).collect();
    let w22: Vec<f64> = h2.iter().map(|h| h * j * q11).collect();
    let jq12 = vec![j * q12; nh];
    let block = PdBlock {
        set: &set,
        nc,
        w11,
        w22,
        jq12,
        h1,
        h2,
    };
    pd_block(&block)
}

/// Densely assembles a linear operator by probing with unit vectors; test
/// and diagnostics helper for small grids.
pub fn probe_matrix(n_in: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut e = vec![0.0; n_in];
    let first = f(&e);
    let n_out = first.len();
    let mut m = DMatrix::zeros(n_out, n_in);
    for c in 0..n_in {
        e[c] = 1.0;
        let col = f(&e);
        e[c] = 0.0;
        for r in 0..n_out {
            m[(r, c)] = col[r];
        }
    }
    m
}

/// Assembled interface projection A_h (h-points × h-points).
pub fn assemble_ah(grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> DMatrix<f64> {
    probe_matrix(grid.nh(), |x| {
        let h = ScalarFieldH::from_values(x.to_vec());
        apply_ah(&h, grid, ops).values
    })
}

/// Assembled velocity quadratic form H_v J_v Q on stacked (v1, v2).
pub fn assemble_hvjvq(grid: &CubedSphereGrid, ops: &Discrete2DOperators) -> DMatrix<f64> {
    let nv = grid.nv();
    probe_matrix(2 * nv, |x| {
        let v = VectorFieldV {
            v1: x[..nv].to_vec(),
            v2: x[nv..].to_vec(),
            basis: Basis::Covariant,
        };
        let q = co2contra(&v, grid, ops).expect("covariant input");
        let mut out = vec![0.0; 2 * nv];
        for i in 0..nv {
            out[i] = ops.h1[i] * grid.j1[i] * q.v1[i];
            out[nv + i] = ops.h2[i] * grid.j2[i] * q.v2[i];
        }
        out
    })
}

/// Maximum tangential-component mismatch of a covariant field over all
/// interface pairs, using the pairing's orientation signs.
pub fn tangential_jump(v: &VectorFieldV, grid: &CubedSphereGrid) -> f64 {
    let sample = |p: VPoint| match p {
        VPoint::V1(m) => v.v1[m],
        VPoint::V2(m) => v.v2[m],
    };
    grid.pairing
        .tangential_pairs
        .iter()
        .map(|pair| (sample(pair.a) - pair.sign * sample(pair.b)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_cubed_sphere;

    fn rng_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn sweeps_match_kronecker_layout() {
        // A 2-panel toy layout: differentiate a field linear in the vertex
        // coordinate; interior rows must return the slope exactly.
        let grid = build_cubed_sphere(12, 1.0).unwrap();
        let ops = build_operators(&grid, OperatorOrder::Order42).unwrap();
        let nc = grid.nc;
        let mut h = vec![0.0; grid.nh()];
        for p in 0..PANEL_COUNT {
            for j in 0..=nc {
                for i in 0..=nc {
                    h[grid.idx_h(p, i, j)] = 3.0 * grid.xv(i) - 2.0 * grid.xv(j);
                }
            }
        }
        let d1 = ops.d_h1(&h);
        let d2 = ops.d_h2(&h);
        for p in 0..PANEL_COUNT {
            for j in 0..=nc {
                for i in 0..nc {
                    assert!((d1[grid.idx_1(p, i, j)] - 3.0).abs() < 1e-11);
                }
            }
            for j in 0..nc {
                for i in 0..=nc {
                    assert!((d2[grid.idx_2(p, i, j)] + 2.0).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn ah_is_a_projection_onto_continuous_fields() {
        let grid = build_cubed_sphere(12, 2.0).unwrap();
        let ops = build_operators(&grid, OperatorOrder::Order21).unwrap();
        let h = ScalarFieldH::from_values(rng_vec(grid.nh(), 11));
        let once = apply_ah(&h, &grid, &ops);
        let twice = apply_ah(&once, &grid, &ops);
        for (a, b) in once.values.iter().zip(&twice.values) {
            assert!((a - b).abs() <= 1e-13);
        }
        assert!(once.interface_continuous);
        // Constants are fixed points.
        let ones = ScalarFieldH::from_values(vec![1.0; grid.nh()]);
        for v in apply_ah(&ones, &grid, &ops).values {
            assert!((v - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn grad_of_constant_vanishes_pointwise() {
        // Row sums of the tabulated derivatives are zero to roundoff, not
        // bitwise, so the bound is roundoff divided by dx.
        let grid = build_cubed_sphere(12, 1.0).unwrap();
        for order in OperatorOrder::ALL {
            let ops = build_operators(&grid, order).unwrap();
            let h = ScalarFieldH::from_values(vec![4.25; grid.nh()]);
            let g = grad(&h, &grid, &ops);
            assert!(g.v1.iter().chain(&g.v2).all(|&x| x.abs() <= 1e-12), "{order}");
        }
    }

    #[test]
    fn basis_tags_are_enforced() {
        let grid = build_cubed_sphere(12, 1.0).unwrap();
        let ops = build_operators(&grid, OperatorOrder::Order21).unwrap();
        let v = VectorFieldV::zeros(&grid, Basis::Covariant);
        assert!(div(&v, &grid, &ops).is_err());
        let w = VectorFieldV::zeros(&grid, Basis::Contravariant);
        assert!(co2contra(&w, &grid, &ops).is_err());
        assert!(curl(&w, &grid, &ops).is_err());
    }

    #[test]
    fn orthogonal_metric_makes_co2contra_pointwise() {
        let mut grid = build_cubed_sphere(12, 1.0).unwrap();
        grid.q12_h.iter_mut().for_each(|q| *q = 0.0);
        let ops = build_operators(&grid, OperatorOrder::Order42).unwrap();
        let v = VectorFieldV {
            v1: rng_vec(grid.nv(), 5),
            v2: rng_vec(grid.nv(), 6),
            basis: Basis::Covariant,
        };
        let q = co2contra(&v, &grid, &ops).unwrap();
        for i in 0..grid.nv() {
            assert!((q.v1[i] - grid.q11_1[i] * v.v1[i]).abs() <= 1e-15);
            assert!((q.v2[i] - grid.q22_2[i] * v.v2[i]).abs() <= 1e-15);
        }
    }

    #[test]
    fn flat_orthogonal_block_has_zero_criterion() {
        let rho = pd_criterion_flat(OperatorOrder::Order42, 16, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(rho.abs() <= 1e-12, "rho = {rho}");
    }

    #[test]
    fn mass_flux_tag_is_distinct() {
        let grid = build_cubed_sphere(12, 1.0).unwrap();
        let ops = build_operators(&grid, OperatorOrder::Order21).unwrap();
        let u = VectorFieldV::zeros(&grid, Basis::MassFlux);
        assert!(coriolis(&u, CoriolisVariant::Basic, &grid, &ops, &vec![0.0; grid.nh()]).is_err());
    }
}
