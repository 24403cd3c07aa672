//! Coefficient tables for the staggered operator families.
//!
//! Tables are given at unit grid spacing: quadrature weights are the values
//! on the diagonal of H/Δx near the left edge (mirrored on the right),
//! differentiation rows are Δx·D_cv rows, and interpolation rows are P_vc
//! rows. Lower-right blocks follow from the corner rules
//! d(N+2−i, N+1−j) = −d(i, j) and p(N+1−i, N+2−j) = p(i, j), and the right
//! extrapolation vector is the reverse of the left one.
//!
//! The 6/3 differentiation family depends on two free parameters (c34, c55);
//! the two shipped parameter sets optimize either polynomial truncation error
//! or the second-derivative response of 4Δx and 8Δx waves. Interpolation free
//! parameters are baked in. Decimal parameters are embedded verbatim, so
//! identities involving them hold to roundoff rather than exactly.

#![allow(clippy::excessive_precision)]

/// Free parameters of the 6/3 differentiation rows chosen by polynomial
/// truncation-error minimization.
pub const C34_POLY: f64 = 0.6690374220138081;
pub const C55_POLY: f64 = -0.7930390145751754;

/// Free parameters of the 6/3 differentiation rows chosen by minimizing the
/// 4Δx/8Δx second-derivative wave response error.
pub const C34_WAVE: f64 = 0.467391226104632;
pub const C55_WAVE: f64 = -0.723617281756727;

// 4/2 interpolation free parameters (exact rationals).
const C13_42: f64 = 102207746025903.0 / 808013506696916.0;
const C14_42: f64 = -289843969221617.0 / 9696162080362992.0;

// 6/3 interpolation free parameters.
const C42_63: f64 = -0.3332211159670528;
const C43_63: f64 = 0.3310769312612241;
const C52_63: f64 = -0.07099703081266314;
const C53_63: f64 = -0.2916164053358880;
const C62_63: f64 = 0.05753938634775091;
const C64_63: f64 = -0.1230378129758785;

/// One operator family at unit grid spacing.
pub struct FamilyTables {
    /// Boundary order s (interior order is 2s).
    pub s: usize,
    /// Smallest admissible cell count N.
    pub min_n: usize,
    /// Leading diagonal of H_v/Δx (length ≤ min_n/2; remaining entries are 1).
    pub hv_edge: Vec<f64>,
    /// Leading diagonal of H_c/Δx.
    pub hc_edge: Vec<f64>,
    /// Leading nonzero coefficients of the left extrapolation vector l.
    pub l: Vec<f64>,
    /// Leading boundary rows of Δx·D_cv, each starting at column 0.
    pub dcv_rows: Vec<Vec<f64>>,
    /// Interior stencil of Δx·D_cv on columns i+dcv_offset.. (0-based row i).
    pub dcv_stencil: Vec<f64>,
    pub dcv_offset: isize,
    /// Leading boundary rows of P_vc, each starting at column 0.
    pub pvc_rows: Vec<Vec<f64>>,
    /// Interior stencil of P_vc on columns i+pvc_offset.. (0-based row i).
    pub pvc_stencil: Vec<f64>,
    pub pvc_offset: isize,
}

pub fn family_21() -> FamilyTables {
    FamilyTables {
        s: 1,
        min_n: 4,
        hv_edge: vec![0.5],
        hc_edge: vec![],
        l: vec![1.5, -0.5],
        dcv_rows: vec![vec![-1.0, 1.0]],
        dcv_stencil: vec![-1.0, 1.0],
        dcv_offset: -1,
        pvc_rows: vec![],
        pvc_stencil: vec![0.5, 0.5],
        pvc_offset: 0,
    }
}

pub fn family_42() -> FamilyTables {
    let (c13, c14) = (C13_42, C14_42);
    FamilyTables {
        s: 2,
        min_n: 8,
        hv_edge: vec![7.0 / 18.0, 9.0 / 8.0, 1.0, 71.0 / 72.0],
        hc_edge: vec![13.0 / 12.0, 7.0 / 8.0, 25.0 / 24.0],
        l: vec![15.0 / 8.0, -10.0 / 8.0, 3.0 / 8.0],
        dcv_rows: vec![
            vec![-2.0, 3.0, -1.0],
            vec![-1.0, 1.0],
            vec![1.0 / 24.0, -9.0 / 8.0, 9.0 / 8.0, -1.0 / 24.0],
            vec![-1.0 / 71.0, 6.0 / 71.0, -83.0 / 71.0, 81.0 / 71.0, -3.0 / 71.0],
        ],
        dcv_stencil: vec![1.0 / 24.0, -9.0 / 8.0, 9.0 / 8.0, -1.0 / 24.0],
        dcv_offset: -2,
        pvc_rows: vec![
            vec![
                0.5 + c13 + 2.0 * c14,
                0.5 - 2.0 * c13 - 3.0 * c14,
                c13,
                c14,
            ],
            vec![
                -8.0 / 63.0 - 52.0 * c13 / 21.0 - 104.0 * c14 / 21.0,
                29.0 / 42.0 + 104.0 * c13 / 21.0 + 52.0 * c14 / 7.0,
                0.5 - 52.0 * c13 / 21.0,
                -4.0 / 63.0 - 52.0 * c14 / 21.0,
            ],
            vec![
                26.0 * c13 / 25.0 + 52.0 * c14 / 25.0 - 1.0 / 25.0,
                -1.0 / 50.0 - 52.0 * c13 / 25.0 - 78.0 * c14 / 25.0,
                3.0 / 5.0 + 26.0 * c13 / 25.0,
                13.0 / 25.0 + 26.0 * c14 / 25.0,
                -3.0 / 50.0,
            ],
        ],
        pvc_stencil: vec![-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0],
        pvc_offset: -1,
    }
}

pub fn family_63(c34: f64, c55: f64) -> FamilyTables {
    let (c42, c43) = (C42_63, C43_63);
    let (c52, c53) = (C52_63, C53_63);
    let (c62, c64) = (C62_63, C64_63);
    FamilyTables {
        s: 3,
        min_n: 12,
        hv_edge: vec![
            95.0 / 288.0,
            317.0 / 240.0,
            23.0 / 30.0,
            793.0 / 720.0,
            157.0 / 160.0,
        ],
        hc_edge: vec![
            325363.0 / 276480.0,
            144001.0 / 276480.0,
            43195.0 / 27648.0,
            86857.0 / 138240.0,
            312623.0 / 276480.0,
            271229.0 / 276480.0,
        ],
        l: vec![35.0 / 16.0, -35.0 / 16.0, 21.0 / 16.0, -5.0 / 16.0],
        dcv_rows: vec![
            vec![
                (-60711983.0 + 15005904.0 * c55 + 5183400.0 * c34) / 21888000.0,
                (101173243.0 - 30011808.0 * c55 - 15550200.0 * c34) / 17510400.0,
                (-7780959.0 + 1727800.0 * c34) / 1459200.0,
                (-5183400.0 * c34 + 35609465.0 + 30011808.0 * c55) / 8755200.0,
                (-7502952.0 * c55 - 5209847.0) / 2188800.0,
                (18712829.0 + 30011808.0 * c55 + 1727800.0 * c34) / 29184000.0,
            ],
            vec![
                (-53376169.0 - 30011808.0 * c55 - 10366800.0 * c34) / 43822080.0,
                (7190801.0 + 10003936.0 * c55 + 5183400.0 * c34) / 5842944.0,
                -(2591700.0 * c34 - 2846555.0) / 2191104.0,
                (-27181195.0 - 30011808.0 * c55 + 5183400.0 * c34) / 8764416.0,
                (7223559.0 + 10003936.0 * c55) / 2921472.0,
                (-59866697.0 - 90035424.0 * c55 - 5183400.0 * c34) / 87644160.0,
            ],
            vec![
                (332488.0 + 625246.0 * c55 + 215975.0 * c34) / 353280.0,
                (-6326795.0 - 10003936.0 * c55 - 5183400.0 * c34) / 2260992.0,
                (1727800.0 * c34 - 665205.0) / 565248.0,
                (8940511.0 + 10003936.0 * c55 - 1727800.0 * c34) / 1130496.0,
                (-3843253.0 - 5001968.0 * c55) / 565248.0,
                (21758409.0 + 30011808.0 * c55 + 1727800.0 * c34) / 11304960.0,
            ],
            vec![
                (-17586239.0 - 30011808.0 * c55 - 10366800.0 * c34) / 36541440.0,
                (14084351.0 + 30011808.0 * c55 + 15550200.0 * c34) / 14616576.0,
                -215975.0 * c34 / 152256.0,
                (5183400.0 * c34 - 30011808.0 * c55 - 21697151.0) / 7308288.0,
                (25503551.0 + 30011808.0 * c55) / 7308288.0,
                (-24437759.0 - 30011808.0 * c55 - 1727800.0 * c34) / 24360960.0,
            ],
            vec![
                (9606527.0 + 15005904.0 * c55 + 5183400.0 * c34) / 65111040.0,
                (-4598783.0 - 10003936.0 * c55 - 5183400.0 * c34) / 17362944.0,
                (-4811905.0 + 5183400.0 * c34) / 13022208.0,
                (5665537.0 - 5183400.0 * c34 + 30011808.0 * c55) / 26044416.0,
                -312623.0 * c55 / 271296.0,
                (68894207.0 + 90035424.0 * c55 + 5183400.0 * c34) / 260444160.0,
                3.0 / 628.0,
            ],
        ],
        dcv_stencil: vec![
            -3.0 / 640.0,
            25.0 / 384.0,
            -75.0 / 64.0,
            75.0 / 64.0,
            -25.0 / 384.0,
            3.0 / 640.0,
        ],
        dcv_offset: -3,
        pvc_rows: vec![
            vec![
                4474753.0 / 7808712.0
                    + 312623.0 * c53 / 650726.0
                    + 937869.0 * c52 / 650726.0
                    - 813687.0 * c64 / 1301452.0
                    + 2441061.0 * c62 / 1301452.0
                    + 86857.0 * c42 / 325363.0
                    + 86857.0 * c43 / 976089.0,
                136944.0 / 325363.0
                    - 173714.0 * c42 / 325363.0
                    - 1627374.0 * c62 / 325363.0
                    - 937869.0 * c52 / 325363.0,
                -848457.0 / 2602904.0 - 173714.0 * c43 / 325363.0
                    + 2441061.0 * c64 / 650726.0
                    + 2441061.0 * c62 / 650726.0
                    - 937869.0 * c53 / 325363.0,
                2331127.0 / 3904356.0 + 173714.0 * c42 / 325363.0 + 694856.0 * c43 / 976089.0
                    - 1627374.0 * c64 / 325363.0
                    + 1250492.0 * c53 / 325363.0
                    + 937869.0 * c52 / 325363.0,
                -10145.0 / 38278.0 - 937869.0 * c53 / 650726.0 - 937869.0 * c52 / 650726.0
                    + 2441061.0 * c64 / 1301452.0
                    - 813687.0 * c62 / 1301452.0
                    - 86857.0 * c42 / 325363.0
                    - 86857.0 * c43 / 325363.0,
            ],
            vec![
                -373145.0 / 354464.0 - 86857.0 * c43 / 144001.0 + 4068435.0 * c64 / 1152008.0
                    - 12205305.0 * c62 / 1152008.0
                    - 1250492.0 * c53 / 432003.0
                    - 260571.0 * c42 / 144001.0
                    - 1250492.0 * c52 / 144001.0,
                273888.0 / 144001.0
                    + 521142.0 * c42 / 144001.0
                    + 4068435.0 * c62 / 144001.0
                    + 2500984.0 * c52 / 144001.0,
                520551.0 / 209456.0 + 521142.0 * c43 / 144001.0
                    - 12205305.0 * c64 / 576004.0
                    - 12205305.0 * c62 / 576004.0
                    + 2500984.0 * c53 / 144001.0,
                -1142117.0 / 288002.0 - 521142.0 * c42 / 144001.0 - 694856.0 * c43 / 144001.0
                    + 4068435.0 * c64 / 144001.0
                    - 10003936.0 * c53 / 432003.0
                    - 2500984.0 * c52 / 144001.0,
                7516251.0 / 4608032.0 + 260571.0 * c43 / 144001.0 - 12205305.0 * c64 / 1152008.0
                    + 4068435.0 * c62 / 1152008.0
                    + 1250492.0 * c53 / 144001.0
                    + 260571.0 * c42 / 144001.0
                    + 1250492.0 * c52 / 144001.0,
            ],
            vec![
                930131.0 / 6911200.0 + 312623.0 * c53 / 431950.0 - 271229.0 * c64 / 345560.0
                    + 86857.0 * c43 / 431950.0
                    + 813687.0 * c62 / 345560.0
                    + 937869.0 * c52 / 431950.0
                    + 260571.0 * c42 / 431950.0,
                -22824.0 / 215975.0
                    - 260571.0 * c42 / 215975.0
                    - 271229.0 * c62 / 43195.0
                    - 937869.0 * c52 / 215975.0,
                -424911.0 / 3455600.0 - 937869.0 * c53 / 215975.0 + 813687.0 * c64 / 172780.0
                    - 260571.0 * c43 / 215975.0
                    + 813687.0 * c62 / 172780.0,
                330902.0 / 215975.0 + 1250492.0 * c53 / 215975.0 + 937869.0 * c52 / 215975.0
                    - 271229.0 * c64 / 43195.0
                    + 260571.0 * c42 / 215975.0
                    + 347428.0 * c43 / 215975.0,
                -615889.0 / 1382240.0 - 937869.0 * c53 / 431950.0 + 813687.0 * c64 / 345560.0
                    - 260571.0 * c43 / 431950.0
                    - 271229.0 * c62 / 345560.0
                    - 937869.0 * c52 / 431950.0
                    - 260571.0 * c42 / 431950.0,
                324.0 / 43195.0,
            ],
            vec![
                -17737.0 / 4169136.0 - (3.0 * c42 + c43) / 6.0,
                c42,
                c43,
                415759.0 / 1042284.0 - (3.0 * c42 + 4.0 * c43) / 3.0,
                1031359.0 / 1389712.0 + c42 / 2.0 + c43 / 2.0,
                -13500.0 / 86857.0,
                1620.0 / 86857.0,
            ],
            vec![
                44783.0 / 5001968.0 - (c53 + 3.0 * c52) / 6.0,
                c52,
                c53,
                -199149.0 / 1250492.0 - (4.0 * c53 + 3.0 * c52) / 3.0,
                3541941.0 / 5001968.0 + c53 / 2.0 + c52 / 2.0,
                162000.0 / 312623.0,
                -27000.0 / 312623.0,
                3240.0 / 312623.0,
            ],
            vec![
                -123231.0 / 8679328.0 + c64 / 8.0 - 3.0 * c62 / 8.0,
                c62,
                30309.0 / 619952.0 - 3.0 * c64 / 4.0 - 3.0 * c62 / 4.0,
                c64,
                -1229447.0 / 8679328.0 - 3.0 * c64 / 8.0 + c62 / 8.0,
                162000.0 / 271229.0,
                162000.0 / 271229.0,
                -27000.0 / 271229.0,
                3240.0 / 271229.0,
            ],
        ],
        pvc_stencil: vec![
            3.0 / 256.0,
            -25.0 / 256.0,
            150.0 / 256.0,
            150.0 / 256.0,
            -25.0 / 256.0,
            3.0 / 256.0,
        ],
        pvc_offset: -2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_sum(values: &[f64], want: f64, what: &str) {
        let sum: f64 = values.iter().sum();
        assert!(
            (sum - want).abs() <= 1e-12,
            "{what}: row sum {sum} != {want}"
        );
    }

    #[test]
    fn derivative_rows_annihilate_constants() {
        for tables in [
            family_21(),
            family_42(),
            family_63(C34_POLY, C55_POLY),
            family_63(C34_WAVE, C55_WAVE),
        ] {
            for (i, row) in tables.dcv_rows.iter().enumerate() {
                assert_sum(row, 0.0, &format!("s={} dcv row {i}", tables.s));
            }
            assert_sum(&tables.dcv_stencil, 0.0, "dcv stencil");
        }
    }

    #[test]
    fn interpolation_rows_reproduce_constants() {
        for tables in [family_21(), family_42(), family_63(C34_WAVE, C55_WAVE)] {
            for (i, row) in tables.pvc_rows.iter().enumerate() {
                assert_sum(row, 1.0, &format!("s={} pvc row {i}", tables.s));
            }
            assert_sum(&tables.pvc_stencil, 1.0, "pvc stencil");
            assert_sum(&tables.l, 1.0, "extrapolation");
        }
    }

    #[test]
    fn interior_stencils_satisfy_taylor_conditions() {
        // First derivative at a vertex from surrounding cell centers: the
        // stencil must integrate odd moments to 1, 0, 0, … at unit spacing.
        for (tables, order) in [
            (family_21(), 2usize),
            (family_42(), 4),
            (family_63(C34_WAVE, C55_WAVE), 6),
        ] {
            let st = &tables.dcv_stencil;
            for k in 0..=order {
                let mut m = 0.0;
                for (j, &c) in st.iter().enumerate() {
                    let x = tables.dcv_offset as f64 + j as f64 + 0.5;
                    m += c * x.powi(k as i32);
                }
                let want = if k == 1 { 1.0 } else { 0.0 };
                assert!(
                    (m - want).abs() <= 1e-12,
                    "order {order}: moment {k} = {m}, want {want}"
                );
            }
        }
    }
}
