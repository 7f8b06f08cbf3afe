//! Quadrature-evaluated L2 errors of the reconstructed volume fields
//! against a reference solution.

use super::basis::BasisP;
use super::fields::VolumeState;
use super::local::RefTables;
use super::mesh::QuadMesh;
use super::params::MhdParams;

/// Reference fields. `grad_u` returns the row-major velocity gradient
/// (du1/dx, du1/dy, du2/dx, du2/dy); `curl_b` the scalar 2D curl of b.
pub struct ExactSolution {
    pub u: Box<dyn Fn(f64, f64) -> [f64; 2] + Sync>,
    pub grad_u: Box<dyn Fn(f64, f64) -> [f64; 4] + Sync>,
    pub b: Box<dyn Fn(f64, f64) -> [f64; 2] + Sync>,
    pub curl_b: Box<dyn Fn(f64, f64) -> f64 + Sync>,
    pub q: Box<dyn Fn(f64, f64) -> f64 + Sync>,
    pub r: Box<dyn Fn(f64, f64) -> f64 + Sync>,
}

/// L2 norms of the per-field differences.
#[derive(Debug, Clone, Copy)]
pub struct FieldErrors {
    pub u: f64,
    pub b: f64,
    pub l: f64,
    pub j: f64,
    pub q: f64,
    pub r: f64,
}

impl FieldErrors {
    pub fn csv_header() -> &'static str {
        "err_u,err_b,err_l,err_j,err_q,err_r"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            self.u, self.b, self.l, self.j, self.q, self.r
        )
    }
}

/// Computes per-field L2 errors. The exact velocity gradient field is
/// grad(u)/Re and the exact current is (kappa/Rm) curl(b), matching the
/// first-order form of the system.
pub fn compute_errors(
    mesh: &QuadMesh,
    basis: &BasisP,
    params: &MhdParams,
    state: &VolumeState,
    exact: &ExactSolution,
) -> FieldErrors {
    let tables = RefTables::new(basis);
    let nd = tables.nd;
    let nq2 = tables.nq2;
    let nq = tables.nq;
    let mut acc = [0.0f64; 6];
    let mut vals = vec![0.0; 11 * nq2];
    for el in 0..mesh.n_elems() {
        let (x0, y0, hx, hy) = mesh.elem_box(el);
        let jac = 0.25 * hx * hy;
        vals.fill(0.0);
        // Evaluate all 11 scalar fields at the volume quadrature points.
        for i in 0..nd {
            for q in 0..nq2 {
                let phi = tables.phi2[i * nq2 + q];
                if phi == 0.0 {
                    continue;
                }
                for c in 0..4 {
                    vals[c * nq2 + q] += state.l[(el * 4 + c) * nd + i] * phi;
                }
                for c in 0..2 {
                    vals[(4 + c) * nq2 + q] += state.u[(el * 2 + c) * nd + i] * phi;
                    vals[(8 + c) * nq2 + q] += state.b[(el * 2 + c) * nd + i] * phi;
                }
                vals[6 * nq2 + q] += state.q[el * nd + i] * phi;
                vals[7 * nq2 + q] += state.j[el * nd + i] * phi;
                vals[10 * nq2 + q] += state.r[el * nd + i] * phi;
            }
        }
        for qy in 0..nq {
            let y = y0 + 0.5 * (basis.quad_pts[qy] + 1.0) * hy;
            for qx in 0..nq {
                let x = x0 + 0.5 * (basis.quad_pts[qx] + 1.0) * hx;
                let q = qy * nq + qx;
                let wq = jac * tables.wq2[q];
                let ue = (exact.u)(x, y);
                let ge = (exact.grad_u)(x, y);
                let be = (exact.b)(x, y);
                let je = params.kappa / params.rm * (exact.curl_b)(x, y);
                let qe = (exact.q)(x, y);
                let re = (exact.r)(x, y);
                for c in 0..2 {
                    let du = vals[(4 + c) * nq2 + q] - ue[c];
                    acc[0] += wq * du * du;
                    let db = vals[(8 + c) * nq2 + q] - be[c];
                    acc[1] += wq * db * db;
                }
                for c in 0..4 {
                    let dl = vals[c * nq2 + q] - ge[c] / params.re;
                    acc[2] += wq * dl * dl;
                }
                let dj = vals[7 * nq2 + q] - je;
                acc[3] += wq * dj * dj;
                let dq = vals[6 * nq2 + q] - qe;
                acc[4] += wq * dq * dq;
                let dr = vals[10 * nq2 + q] - re;
                acc[5] += wq * dr * dr;
            }
        }
    }
    FieldErrors {
        u: acc[0].sqrt(),
        b: acc[1].sqrt(),
        l: acc[2].sqrt(),
        j: acc[3].sqrt(),
        q: acc[4].sqrt(),
        r: acc[5].sqrt(),
    }
}
