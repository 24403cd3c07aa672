//! Equiangular gnomonic cubed-sphere grid.
//!
//! The sphere of radius `a` is covered by six logically square panels, the
//! central projections of the faces of an inscribed cube. Each panel carries
//! local coordinates (x1, x2) ∈ [−π/4, π/4]², the angles subtended at the
//! sphere center along the two face directions. With X = tan x1, Y = tan x2
//! the face-local direction is (X, Y, 1)/δ, δ² = 1 + X² + Y², rotated into
//! place by one of six fixed rotations (four equatorial panels, then north,
//! then south).
//!
//! Each panel is discretized with Nc cells per edge: vertices at spacing
//! Δx = (π/2)/Nc and cell centers offset by Δx/2. Four staggered point sets
//! are used throughout:
//!
//! - x^h: vertex × vertex, (Nc+1)² per panel,
//! - x^1: center × vertex, Nc(Nc+1) per panel,
//! - x^2: vertex × center, Nc(Nc+1) per panel,
//! - x^ζ: center × center, Nc² per panel.
//!
//! Flattened storage runs fastest over i (the x1 index), then j, then the
//! panel index.
//!
//! Panel edges and corners overlap: an edge h-point is shared by two panels,
//! a corner h-point by three. The topology (which edge meets which, and with
//! which orientation) is discovered numerically from the mapping itself, and
//! the pairing tables derived from it are verified pointwise, so the panel
//! layout convention cannot silently disagree with the tables.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

const MODULE: &str = "grid";

/// Earth-like default sphere radius in meters.
pub const EARTH_RADIUS: f64 = 6.371229e6;

/// Number of panels covering the sphere.
pub const PANEL_COUNT: usize = 6;

/// Relative tolerance for "two grid points are the same physical point".
pub const COINCIDENCE_REL_TOL: f64 = 1e-12;

/// Relative tolerance for Jacobian agreement at shared interface points.
pub const JACOBIAN_CONTINUITY_REL_TOL: f64 = 1e-12;

/// Rotation taking the face-local frame of panel `p` into Cartesian space.
///
/// Columns are the Cartesian images of the local x1, x2 and normal axes.
/// Panels 0..3 are equatorial with centers at longitudes 0, π/2, π, 3π/2
/// (x1 increasing eastward, x2 northward), panel 4 is centered on the north
/// pole and panel 5 on the south pole. All six are proper rotations.
pub fn panel_rotation(panel: usize) -> Matrix3<f64> {
    assert!(panel < PANEL_COUNT, "panel index out of range");
    let r0 = Matrix3::new(
        0.0, 0.0, 1.0, //
        1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0,
    );
    match panel {
        0 => r0,
        1 | 2 | 3 => {
            let (s, c) = match panel {
                1 => (1.0, 0.0),
                2 => (0.0, -1.0),
                _ => (-1.0, 0.0),
            };
            let rz = Matrix3::new(
                c, -s, 0.0, //
                s, c, 0.0, //
                0.0, 0.0, 1.0,
            );
            rz * r0
        }
        4 => Matrix3::identity(),
        _ => Matrix3::new(
            0.0, 1.0, 0.0, //
            1.0, 0.0, 0.0, //
            0.0, 0.0, -1.0,
        ),
    }
}

/// Half the panel's angular extent; local coordinates live in [−LIM, LIM].
const LIM: f64 = std::f64::consts::FRAC_PI_4;

/// Slack for range checks, so points placed exactly on a panel edge by
/// arithmetic like `−π/4 + k·Δx` are never rejected.
const RANGE_SLACK: f64 = 1e-9;

/// Maps panel-local coordinates to the Cartesian point on the sphere of
/// radius `a`. The result has |output| = a to roundoff.
pub fn equiangular_mapping(panel: usize, x1: f64, x2: f64, a: f64) -> Result<[f64; 3]> {
    if panel >= PANEL_COUNT {
        return Err(Error::invalid(
            MODULE,
            "equiangular_mapping",
            format!("panel index {panel} out of range 0..{PANEL_COUNT}"),
        ));
    }
    if !(x1.abs() <= LIM + RANGE_SLACK && x2.abs() <= LIM + RANGE_SLACK) {
        return Err(Error::invalid(
            MODULE,
            "equiangular_mapping",
            format!("local coordinates ({x1}, {x2}) outside [-pi/4, pi/4]"),
        ));
    }
    let x = x1.tan();
    let y = x2.tan();
    let delta = (1.0 + x * x + y * y).sqrt();
    let local = Vector3::new(x, y, 1.0) / delta;
    let p = panel_rotation(panel) * local * a;
    Ok([p.x, p.y, p.z])
}

/// Pointwise metric data of the equiangular mapping.
#[derive(Debug, Clone, Copy)]
pub struct MetricSample {
    /// Area Jacobian √(det g) = a²(1+X²)(1+Y²)/δ³.
    pub j: f64,
    /// Contravariant metric components, inverse of g_ij = e_i·e_j.
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
    /// Covariant basis vectors ∂r/∂x1 and ∂r/∂x2.
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

impl MetricSample {
    /// Covariant metric component g11 = e1·e1.
    pub fn g11(&self) -> f64 {
        dot3(self.e1, self.e1)
    }

    /// Covariant metric component g12 = e1·e2.
    pub fn g12(&self) -> f64 {
        dot3(self.e1, self.e2)
    }

    /// Covariant metric component g22 = e2·e2.
    pub fn g22(&self) -> f64 {
        dot3(self.e2, self.e2)
    }

    /// Dual basis vectors e¹, e² with eⁱ·e_j = δ_ij, built from Q = g⁻¹.
    pub fn dual_basis(&self) -> ([f64; 3], [f64; 3]) {
        let mut d1 = [0.0; 3];
        let mut d2 = [0.0; 3];
        for c in 0..3 {
            d1[c] = self.q11 * self.e1[c] + self.q12 * self.e2[c];
            d2[c] = self.q12 * self.e1[c] + self.q22 * self.e2[c];
        }
        (d1, d2)
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Closed-form metric of the equiangular mapping at one point.
///
/// With X = tan x1, Y = tan x2, δ² = 1 + X² + Y²:
///   e1 = a(1+X²)/δ³ · R_p (1+Y², −XY, −X),
///   e2 = a(1+Y²)/δ³ · R_p (−XY, 1+X², −Y),
///   J = a²(1+X²)(1+Y²)/δ³,
///   Q11 = δ²/(a²(1+X²)), Q22 = δ²/(a²(1+Y²)),
///   Q12 = XYδ²/(a²(1+X²)(1+Y²)).
pub fn metric_at(panel: usize, x1: f64, x2: f64, a: f64) -> MetricSample {
    assert!(panel < PANEL_COUNT, "panel index out of range");
    let x = x1.tan();
    let y = x2.tan();
    let cx = 1.0 + x * x;
    let cy = 1.0 + y * y;
    let d2 = 1.0 + x * x + y * y;
    let d3 = d2 * d2.sqrt();
    let rot = panel_rotation(panel);
    let e1 = rot * Vector3::new(cy, -x * y, -x) * (a * cx / d3);
    let e2 = rot * Vector3::new(-x * y, cx, -y) * (a * cy / d3);
    MetricSample {
        j: a * a * cx * cy / d3,
        q11: d2 / (a * a * cx),
        q12: x * y * d2 / (a * a * cx * cy),
        q22: d2 / (a * a * cy),
        e1: [e1.x, e1.y, e1.z],
        e2: [e2.x, e2.y, e2.z],
    }
}

/// One of the four edges of a panel, named by the local coordinate extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// x1 = −π/4.
    West,
    /// x1 = +π/4.
    East,
    /// x2 = −π/4.
    South,
    /// x2 = +π/4.
    North,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::West, Edge::East, Edge::South, Edge::North];

    pub fn index(self) -> usize {
        match self {
            Edge::West => 0,
            Edge::East => 1,
            Edge::South => 2,
            Edge::North => 3,
        }
    }

    /// Local coordinates of the point at parameter `t` along this edge; the
    /// parameter is the free coordinate, increasing with its local axis.
    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            Edge::West => (-LIM, t),
            Edge::East => (LIM, t),
            Edge::South => (t, -LIM),
            Edge::North => (t, LIM),
        }
    }
}

/// The panel edge glued to a given panel edge, with relative orientation.
#[derive(Debug, Clone, Copy)]
pub struct EdgeLink {
    pub panel: usize,
    pub edge: Edge,
    /// True when the shared edge is traversed in opposite parameter
    /// directions by the two panels (t ↔ −t).
    pub reversed: bool,
}

/// One panel corner, identified by which end of each local axis it sits on.
#[derive(Debug, Clone, Copy)]
pub struct CornerSite {
    pub panel: usize,
    pub i_high: bool,
    pub j_high: bool,
}

/// Edge adjacency and corner incidence of the six panels.
#[derive(Debug, Clone)]
pub struct PanelTopology {
    /// links[p][e] is the edge glued to edge e of panel p.
    pub links: [[EdgeLink; 4]; 6],
    /// Eight cube corners, each shared by exactly three panel corners.
    pub corners: [[CornerSite; 3]; 8],
}

/// Identifies a velocity component sample point: an index into the x^1
/// array (component v1) or the x^2 array (component v2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VPoint {
    V1(usize),
    V2(usize),
}

/// Two velocity samples that measure the same physical edge-tangential
/// component; `sign` is +1 when the two local tangent directions agree and
/// −1 when they oppose.
#[derive(Debug, Clone, Copy)]
pub struct TangentialPair {
    pub a: VPoint,
    pub b: VPoint,
    pub sign: f64,
}

/// One boundary flux sample: the normal mass flux through edge `edge` of
/// panel `panel` at edge parameter index `k` (a vertex index), extrapolated
/// from the interior. `h` is the global index of the h-point it lives on.
#[derive(Debug, Clone, Copy)]
pub struct FluxSlot {
    pub h: usize,
    pub panel: usize,
    pub edge: Edge,
    pub k: usize,
}

/// Index tables gluing the six panels together.
#[derive(Debug, Clone)]
pub struct InterfacePairing {
    /// Non-corner edge h-points, one entry per physical point.
    pub edge_groups: Vec<[usize; 2]>,
    /// Corner h-points, one entry per cube corner.
    pub corner_groups: Vec<[usize; 3]>,
    /// All 24(Nc+1) boundary flux slots; corner h-points carry two.
    pub slots: Vec<FluxSlot>,
    /// Involution pairing each slot with the physically coincident slot of
    /// the neighboring panel (the component normal to the shared edge).
    pub slot_partner: Vec<usize>,
    /// Tangential component pairs across every physical edge.
    pub tangential_pairs: Vec<TangentialPair>,
}

/// The assembled multi-panel grid: point coordinates, metric samples and
/// interface tables. Immutable after construction.
#[derive(Debug, Clone)]
pub struct CubedSphereGrid {
    /// Cells per panel edge.
    pub nc: usize,
    /// Sphere radius.
    pub a: f64,
    /// Local grid spacing (π/2)/Nc.
    pub dx: f64,
    /// Cartesian coordinates of the four point sets.
    pub xh: Vec<[f64; 3]>,
    pub x1: Vec<[f64; 3]>,
    pub x2: Vec<[f64; 3]>,
    pub xz: Vec<[f64; 3]>,
    /// Jacobian at each point set.
    pub jh: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub jz: Vec<f64>,
    /// Contravariant metric samples where each is consumed: Q11 at x^1,
    /// Q22 at x^2, Q12 at x^h.
    pub q11_1: Vec<f64>,
    pub q22_2: Vec<f64>,
    pub q12_h: Vec<f64>,
    /// Per-h-point transform from covariant components to Cartesian vectors:
    /// columns are the dual basis vectors e¹, e².
    pub cov_to_cart: Vec<[[f64; 3]; 2]>,
    /// Per-h-point transform from Cartesian vectors to covariant components:
    /// rows are the covariant basis vectors e_1, e_2.
    pub cart_to_cov: Vec<[[f64; 3]; 2]>,
    pub topology: PanelTopology,
    pub pairing: InterfacePairing,
}

impl CubedSphereGrid {
    /// Local coordinate of vertex k.
    pub fn xv(&self, k: usize) -> f64 {
        -LIM + k as f64 * self.dx
    }

    /// Local coordinate of cell center k.
    pub fn xc(&self, k: usize) -> f64 {
        -LIM + (k as f64 + 0.5) * self.dx
    }

    /// Points per panel in the x^h set.
    pub fn panel_h(&self) -> usize {
        (self.nc + 1) * (self.nc + 1)
    }

    /// Points per panel in the x^1 / x^2 sets.
    pub fn panel_v(&self) -> usize {
        self.nc * (self.nc + 1)
    }

    /// Points per panel in the x^ζ set.
    pub fn panel_z(&self) -> usize {
        self.nc * self.nc
    }

    pub fn nh(&self) -> usize {
        PANEL_COUNT * self.panel_h()
    }

    pub fn nv(&self) -> usize {
        PANEL_COUNT * self.panel_v()
    }

    pub fn nz(&self) -> usize {
        PANEL_COUNT * self.panel_z()
    }

    /// Global index of h-point (i, j) on panel p; i, j ∈ 0..=Nc.
    pub fn idx_h(&self, p: usize, i: usize, j: usize) -> usize {
        p * self.panel_h() + j * (self.nc + 1) + i
    }

    /// Global index of x^1 point (i, j); i ∈ 0..Nc centers, j ∈ 0..=Nc.
    pub fn idx_1(&self, p: usize, i: usize, j: usize) -> usize {
        p * self.panel_v() + j * self.nc + i
    }

    /// Global index of x^2 point (i, j); i ∈ 0..=Nc, j ∈ 0..Nc centers.
    pub fn idx_2(&self, p: usize, i: usize, j: usize) -> usize {
        p * self.panel_v() + j * (self.nc + 1) + i
    }

    /// Global index of x^ζ point (i, j); i, j ∈ 0..Nc centers.
    pub fn idx_z(&self, p: usize, i: usize, j: usize) -> usize {
        p * self.panel_z() + j * self.nc + i
    }

    /// Global h index of the point at parameter index k on a panel edge.
    pub fn edge_h(&self, p: usize, e: Edge, k: usize) -> usize {
        let n = self.nc;
        match e {
            Edge::West => self.idx_h(p, 0, k),
            Edge::East => self.idx_h(p, n, k),
            Edge::South => self.idx_h(p, k, 0),
            Edge::North => self.idx_h(p, k, n),
        }
    }
}

/// Euclidean distance between stored points.
fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    dot3(d, d).sqrt()
}

/// Discovers panel adjacency by matching edge point sets of the mapping on
/// the unit sphere. Fails loudly if any edge has no unique partner.
fn build_topology() -> Result<PanelTopology> {
    let op = "build_topology";
    let samples = 9usize;
    let edge_points = |p: usize, e: Edge| -> Vec<[f64; 3]> {
        (0..samples)
            .map(|k| {
                let t = -LIM + (k as f64 / (samples - 1) as f64) * 2.0 * LIM;
                let (x1, x2) = e.point(t);
                equiangular_mapping(p, x1, x2, 1.0).expect("in-range edge point")
            })
            .collect()
    };
    let tol = 1e-12;
    let placeholder = EdgeLink {
        panel: usize::MAX,
        edge: Edge::West,
        reversed: false,
    };
    let mut links = [[placeholder; 4]; 6];
    for p in 0..PANEL_COUNT {
        for e in Edge::ALL {
            let pts = edge_points(p, e);
            let mut found = None;
            for q in 0..PANEL_COUNT {
                if q == p {
                    continue;
                }
                for f in Edge::ALL {
                    let qts = edge_points(q, f);
                    let same = pts.iter().zip(&qts).all(|(a, b)| dist3(*a, *b) <= tol);
                    let reversed = pts
                        .iter()
                        .zip(qts.iter().rev())
                        .all(|(a, b)| dist3(*a, *b) <= tol);
                    if same || reversed {
                        if found.is_some() {
                            return Err(Error::numerical(
                                MODULE,
                                op,
                                p,
                                format!("edge {e:?} of panel {p} matches more than one edge"),
                            ));
                        }
                        found = Some(EdgeLink {
                            panel: q,
                            edge: f,
                            reversed,
                        });
                    }
                }
            }
            links[p][e.index()] = found.ok_or_else(|| {
                Error::numerical(
                    MODULE,
                    op,
                    p,
                    format!("edge {e:?} of panel {p} has no matching edge"),
                )
            })?;
        }
    }
    for p in 0..PANEL_COUNT {
        for e in Edge::ALL {
            let l = links[p][e.index()];
            let back = links[l.panel][l.edge.index()];
            if back.panel != p || back.edge != e || back.reversed != l.reversed {
                return Err(Error::numerical(
                    MODULE,
                    op,
                    p,
                    format!("edge link {p}/{e:?} is not symmetric"),
                ));
            }
        }
    }

    // Group the 24 panel corners into 8 physical cube corners.
    let corner_pos = |s: &CornerSite| -> [f64; 3] {
        let x1 = if s.i_high { LIM } else { -LIM };
        let x2 = if s.j_high { LIM } else { -LIM };
        equiangular_mapping(s.panel, x1, x2, 1.0).expect("in-range corner")
    };
    let mut sites = Vec::with_capacity(24);
    for p in 0..PANEL_COUNT {
        for (i_high, j_high) in [(false, false), (true, false), (false, true), (true, true)] {
            sites.push(CornerSite {
                panel: p,
                i_high,
                j_high,
            });
        }
    }
    let mut used = vec![false; sites.len()];
    let mut corners = Vec::with_capacity(8);
    for s in 0..sites.len() {
        if used[s] {
            continue;
        }
        used[s] = true;
        let mut group = vec![sites[s]];
        let pos = corner_pos(&sites[s]);
        for t in (s + 1)..sites.len() {
            if !used[t] && dist3(pos, corner_pos(&sites[t])) <= tol {
                used[t] = true;
                group.push(sites[t]);
            }
        }
        if group.len() != 3 {
            return Err(Error::numerical(
                MODULE,
                op,
                s,
                format!("corner shared by {} panels, expected 3", group.len()),
            ));
        }
        corners.push([group[0], group[1], group[2]]);
    }
    if corners.len() != 8 {
        return Err(Error::numerical(
            MODULE,
            op,
            0,
            format!("found {} cube corners, expected 8", corners.len()),
        ));
    }
    Ok(PanelTopology {
        links,
        corners: corners.try_into().expect("exactly 8 corners"),
    })
}

/// Maps an edge parameter index through an edge link.
fn map_k(link: &EdgeLink, nc: usize, k: usize) -> usize {
    if link.reversed {
        nc - k
    } else {
        k
    }
}

/// Builds the h-point groups, flux-slot pairing and tangential component
/// pairs from the grid's topology, verifying every derived pair against
/// physical point coordinates.
pub fn build_interface_pairing(grid: &CubedSphereGrid) -> Result<InterfacePairing> {
    let op = "build_interface_pairing";
    let nc = grid.nc;
    let topo = &grid.topology;
    let tol = COINCIDENCE_REL_TOL * grid.a;

    let check = |a: [f64; 3], b: [f64; 3], what: &str, idx: usize| -> Result<()> {
        if dist3(a, b) > tol {
            return Err(Error::numerical(
                MODULE,
                op,
                idx,
                format!("{what}: paired points differ by {:.3e}", dist3(a, b)),
            ));
        }
        Ok(())
    };

    // Each physical edge is processed once, from the panel/edge with the
    // lexicographically smaller (panel, edge) key.
    let owns = |p: usize, e: Edge, l: &EdgeLink| -> bool {
        (p, e.index()) < (l.panel, l.edge.index())
    };

    let mut edge_groups = Vec::new();
    let mut tangential_pairs = Vec::new();
    for p in 0..PANEL_COUNT {
        for e in Edge::ALL {
            let link = topo.links[p][e.index()];
            if !owns(p, e, &link) {
                continue;
            }
            for k in 1..nc {
                let m = grid.edge_h(p, e, k);
                let ms = grid.edge_h(link.panel, link.edge, map_k(&link, nc, k));
                check(grid.xh[m], grid.xh[ms], "edge h-point", m)?;
                edge_groups.push([m, ms]);
            }
            // Tangential component points are cell centers along the edge.
            let sign = if link.reversed { -1.0 } else { 1.0 };
            for k in 0..nc {
                let ks = if link.reversed { nc - 1 - k } else { k };
                let a = tangential_point(grid, p, e, k);
                let b = tangential_point(grid, link.panel, link.edge, ks);
                let (pa, ta) = tangential_coords(grid, a);
                let (pb, tb) = tangential_coords(grid, b);
                check(pa, pb, "tangential point", k)?;
                let cos = dot3(ta, tb) / (dot3(ta, ta).sqrt() * dot3(tb, tb).sqrt());
                if (cos - sign).abs() > 1e-9 {
                    return Err(Error::numerical(
                        MODULE,
                        op,
                        k,
                        format!("tangent orientation mismatch: cos {cos}, expected {sign}"),
                    ));
                }
                tangential_pairs.push(TangentialPair { a, b, sign });
            }
        }
    }

    let mut corner_groups = Vec::with_capacity(8);
    for (c, sites) in topo.corners.iter().enumerate() {
        let idx_of = |s: &CornerSite| {
            let i = if s.i_high { nc } else { 0 };
            let j = if s.j_high { nc } else { 0 };
            grid.idx_h(s.panel, i, j)
        };
        let g = [idx_of(&sites[0]), idx_of(&sites[1]), idx_of(&sites[2])];
        check(grid.xh[g[0]], grid.xh[g[1]], "corner h-point", c)?;
        check(grid.xh[g[0]], grid.xh[g[2]], "corner h-point", c)?;
        corner_groups.push(g);
    }

    // Flux slots: one per boundary h-point per incident edge. A slot's
    // partner is the coincident slot across the shared edge, so the pairing
    // joins the two one-sided normal fluxes through the same physical edge,
    // including at corners where each panel contributes one slot per
    // incident edge.
    let mut slots = Vec::with_capacity(24 * (nc + 1));
    for p in 0..PANEL_COUNT {
        for e in Edge::ALL {
            for k in 0..=nc {
                slots.push(FluxSlot {
                    h: grid.edge_h(p, e, k),
                    panel: p,
                    edge: e,
                    k,
                });
            }
        }
    }
    let slot_id = |p: usize, e: Edge, k: usize| -> usize { (p * 4 + e.index()) * (nc + 1) + k };
    let mut slot_partner = vec![usize::MAX; slots.len()];
    for s in 0..slots.len() {
        let FluxSlot { panel, edge, k, h } = slots[s];
        let link = topo.links[panel][edge.index()];
        let t = slot_id(link.panel, link.edge, map_k(&link, nc, k));
        slot_partner[s] = t;
        check(grid.xh[h], grid.xh[slots[t].h], "flux slot", s)?;
    }
    for s in 0..slots.len() {
        if slot_partner[slot_partner[s]] != s {
            return Err(Error::numerical(
                MODULE,
                op,
                s,
                "flux slot pairing is not an involution".to_string(),
            ));
        }
    }

    Ok(InterfacePairing {
        edge_groups,
        corner_groups,
        slots,
        slot_partner,
        tangential_pairs,
    })
}

/// The velocity sample measuring the tangential component at center k along
/// a panel edge: v2 on x1-extreme edges, v1 on x2-extreme edges.
fn tangential_point(grid: &CubedSphereGrid, p: usize, e: Edge, k: usize) -> VPoint {
    let n = grid.nc;
    match e {
        Edge::West => VPoint::V2(grid.idx_2(p, 0, k)),
        Edge::East => VPoint::V2(grid.idx_2(p, n, k)),
        Edge::South => VPoint::V1(grid.idx_1(p, k, 0)),
        Edge::North => VPoint::V1(grid.idx_1(p, k, n)),
    }
}

/// Position and covariant tangent vector of a velocity sample point.
fn tangential_coords(grid: &CubedSphereGrid, v: VPoint) -> ([f64; 3], [f64; 3]) {
    let nc = grid.nc;
    match v {
        VPoint::V1(m) => {
            let local = m % grid.panel_v();
            let p = m / grid.panel_v();
            let i = local % nc;
            let j = local / nc;
            let s = metric_at(p, grid.xc(i), grid.xv(j), grid.a);
            (grid.x1[m], s.e1)
        }
        VPoint::V2(m) => {
            let local = m % grid.panel_v();
            let p = m / grid.panel_v();
            let i = local % (nc + 1);
            let j = local / (nc + 1);
            let s = metric_at(p, grid.xv(i), grid.xc(j), grid.a);
            (grid.x2[m], s.e2)
        }
    }
}

/// Builds the full grid: coordinates and metric for all four point sets,
/// topology and interface pairing, with every structural invariant checked.
pub fn build_cubed_sphere(nc: usize, a: f64) -> Result<CubedSphereGrid> {
    let op = "build_cubed_sphere";
    if nc < 12 {
        return Err(Error::invalid(
            MODULE,
            op,
            format!("Nc = {nc} is too small; the widest boundary closure needs Nc >= 12"),
        ));
    }
    if !(a > 0.0) {
        return Err(Error::invalid(MODULE, op, format!("radius {a} must be positive")));
    }
    let dx = 2.0 * LIM / nc as f64;
    let nh = PANEL_COUNT * (nc + 1) * (nc + 1);
    let nv = PANEL_COUNT * nc * (nc + 1);
    let nz = PANEL_COUNT * nc * nc;

    let mut grid = CubedSphereGrid {
        nc,
        a,
        dx,
        xh: vec![[0.0; 3]; nh],
        x1: vec![[0.0; 3]; nv],
        x2: vec![[0.0; 3]; nv],
        xz: vec![[0.0; 3]; nz],
        jh: vec![0.0; nh],
        j1: vec![0.0; nv],
        j2: vec![0.0; nv],
        jz: vec![0.0; nz],
        q11_1: vec![0.0; nv],
        q22_2: vec![0.0; nv],
        q12_h: vec![0.0; nh],
        cov_to_cart: vec![[[0.0; 3]; 2]; nh],
        cart_to_cov: vec![[[0.0; 3]; 2]; nh],
        topology: build_topology()?,
        pairing: InterfacePairing {
            edge_groups: Vec::new(),
            corner_groups: Vec::new(),
            slots: Vec::new(),
            slot_partner: Vec::new(),
            tangential_pairs: Vec::new(),
        },
    };

    let xv = |k: usize| -LIM + k as f64 * dx;
    let xc = |k: usize| -LIM + (k as f64 + 0.5) * dx;

    for p in 0..PANEL_COUNT {
        for j in 0..=nc {
            for i in 0..=nc {
                let m = grid.idx_h(p, i, j);
                let s = metric_at(p, xv(i), xv(j), a);
                grid.xh[m] = equiangular_mapping(p, xv(i), xv(j), a)?;
                grid.jh[m] = s.j;
                grid.q12_h[m] = s.q12;
                let (d1, d2) = s.dual_basis();
                grid.cov_to_cart[m] = [d1, d2];
                grid.cart_to_cov[m] = [s.e1, s.e2];
            }
        }
        for j in 0..=nc {
            for i in 0..nc {
                let m = grid.idx_1(p, i, j);
                let s = metric_at(p, xc(i), xv(j), a);
                grid.x1[m] = equiangular_mapping(p, xc(i), xv(j), a)?;
                grid.j1[m] = s.j;
                grid.q11_1[m] = s.q11;
            }
        }
        for j in 0..nc {
            for i in 0..=nc {
                let m = grid.idx_2(p, i, j);
                let s = metric_at(p, xv(i), xc(j), a);
                grid.x2[m] = equiangular_mapping(p, xv(i), xc(j), a)?;
                grid.j2[m] = s.j;
                grid.q22_2[m] = s.q22;
            }
        }
        for j in 0..nc {
            for i in 0..nc {
                let m = grid.idx_z(p, i, j);
                grid.xz[m] = equiangular_mapping(p, xc(i), xc(j), a)?;
                grid.jz[m] = metric_at(p, xc(i), xc(j), a).j;
            }
        }
    }

    for (m, &j) in grid.jh.iter().enumerate() {
        if !(j > 0.0) {
            return Err(Error::numerical(
                MODULE,
                op,
                m,
                format!("non-positive Jacobian {j} at h-point {m}"),
            ));
        }
    }

    grid.pairing = build_interface_pairing(&grid)?;

    // Interface continuity of J licenses treating J as single-valued on
    // panel boundaries.
    let jac_ok = |m: usize, ms: usize| {
        (grid.jh[m] - grid.jh[ms]).abs() <= JACOBIAN_CONTINUITY_REL_TOL * grid.jh[m]
    };
    for (g, pair) in grid.pairing.edge_groups.iter().enumerate() {
        if !jac_ok(pair[0], pair[1]) {
            return Err(Error::numerical(
                MODULE,
                op,
                g,
                "Jacobian discontinuous across a panel edge".to_string(),
            ));
        }
    }
    for (g, tri) in grid.pairing.corner_groups.iter().enumerate() {
        if !jac_ok(tri[0], tri[1]) || !jac_ok(tri[0], tri[2]) {
            return Err(Error::numerical(
                MODULE,
                op,
                g,
                "Jacobian discontinuous at a cube corner".to_string(),
            ));
        }
    }

    Ok(grid)
}
