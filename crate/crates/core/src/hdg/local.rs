//! Per-element assembly of the six local equations and three conservation
//! equations plus the per-element pressure-average constraint, and the
//! static condensation producing each element's contribution to the global
//! trace system together with its affine volume-reconstruction map.
//!
//! Volume fields per element: the velocity gradient L (2x2), velocity u,
//! pressure q, scalar current J, magnetic field b, and the solenoidal
//! Lagrange multiplier r; 11 scalar fields of (p+1)^2 coefficients each.
//! Local trace unknowns per element: (uhat_x, uhat_y, bhat_t, rhat) on the
//! p+1 nodes of each of the four sides, then the pressure average rho.

use super::basis::BasisP;
use super::mesh::Side;
use super::params::{stabilization, MhdParams};
use super::HdgError;
use crate::sparse::{DenseLu, DenseMatrix};

pub const N_SIDES: usize = 4;

// Volume field offsets (per-element field blocks of nd coefficients).
pub const F_L11: usize = 0;
pub const F_L12: usize = 1;
pub const F_L21: usize = 2;
pub const F_L22: usize = 3;
pub const F_U1: usize = 4;
pub const F_U2: usize = 5;
pub const F_Q: usize = 6;
pub const F_J: usize = 7;
pub const F_B1: usize = 8;
pub const F_B2: usize = 9;
pub const F_R: usize = 10;
pub const N_VOL_FIELDS: usize = 11;

// Trace field offsets within an edge node.
pub const T_UX: usize = 0;
pub const T_UY: usize = 1;
pub const T_BT: usize = 2;
pub const T_RH: usize = 3;
pub const N_TRACE_FIELDS: usize = 4;

/// Axis-aligned element geometry.
#[derive(Debug, Clone, Copy)]
pub struct ElemGeom {
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

/// Constant geometry of one element side.
#[derive(Debug, Clone, Copy)]
pub struct SideGeom {
    pub normal: [f64; 2],
    /// Sign relating the local counterclockwise tangent to the global edge
    /// tangent.
    pub sigma: f64,
    pub length: f64,
}

pub fn side_geometry(side: Side, geom: &ElemGeom) -> SideGeom {
    let length = match side {
        Side::Bottom | Side::Top => geom.hx,
        Side::Left | Side::Right => geom.hy,
    };
    SideGeom {
        normal: side.normal(),
        sigma: side.orientation(),
        length,
    }
}

/// Reference-element tables shared by every element of one degree: 2D basis
/// values and derivatives at volume quadrature, side traces at edge
/// quadrature, and the quadrature weights.
pub struct RefTables {
    pub p: usize,
    pub nd: usize,
    pub nq: usize,
    pub nq2: usize,
    /// phi2[i*nq2 + q]
    pub phi2: Vec<f64>,
    /// d/dxi at volume quadrature
    pub dxi2: Vec<f64>,
    /// d/deta at volume quadrature
    pub deta2: Vec<f64>,
    /// product weights, length nq2
    pub wq2: Vec<f64>,
    /// svals[s][i*nq + qe]: volume basis trace on side s
    pub svals: [Vec<f64>; N_SIDES],
    /// trace basis at edge quadrature: tphi[k*nq + qe]
    pub tphi: Vec<f64>,
    /// 1D quadrature weights
    pub wqe: Vec<f64>,
    /// reference integral of each 1D trace basis function
    pub tint: Vec<f64>,
}

impl RefTables {
    pub fn new(basis: &BasisP) -> Self {
        let p = basis.p;
        let nn = p + 1;
        let nq = basis.n_quad();
        let nd = nn * nn;
        let nq2 = nq * nq;
        let mut phi2 = vec![0.0; nd * nq2];
        let mut dxi2 = vec![0.0; nd * nq2];
        let mut deta2 = vec![0.0; nd * nq2];
        let mut wq2 = vec![0.0; nq2];
        for qy in 0..nq {
            for qx in 0..nq {
                let q = qy * nq + qx;
                wq2[q] = basis.quad_wts[qx] * basis.quad_wts[qy];
                for iy in 0..nn {
                    for ix in 0..nn {
                        let i = iy * nn + ix;
                        phi2[i * nq2 + q] = basis.phi[ix * nq + qx] * basis.phi[iy * nq + qy];
                        dxi2[i * nq2 + q] = basis.dphi[ix * nq + qx] * basis.phi[iy * nq + qy];
                        deta2[i * nq2 + q] = basis.phi[ix * nq + qx] * basis.dphi[iy * nq + qy];
                    }
                }
            }
        }
        // Gauss-Lobatto nodes include the endpoints, so side traces keep
        // only the boundary layer of nodes.
        let mut svals: [Vec<f64>; N_SIDES] = [
            vec![0.0; nd * nq],
            vec![0.0; nd * nq],
            vec![0.0; nd * nq],
            vec![0.0; nd * nq],
        ];
        for qe in 0..nq {
            for iy in 0..nn {
                for ix in 0..nn {
                    let i = iy * nn + ix;
                    if iy == 0 {
                        svals[Side::Bottom as usize][i * nq + qe] = basis.phi[ix * nq + qe];
                    }
                    if iy == p {
                        svals[Side::Top as usize][i * nq + qe] = basis.phi[ix * nq + qe];
                    }
                    if ix == 0 {
                        svals[Side::Left as usize][i * nq + qe] = basis.phi[iy * nq + qe];
                    }
                    if ix == p {
                        svals[Side::Right as usize][i * nq + qe] = basis.phi[iy * nq + qe];
                    }
                }
            }
        }
        Self {
            p,
            nd,
            nq,
            nq2,
            phi2,
            dxi2,
            deta2,
            wq2,
            svals,
            tphi: basis.phi.clone(),
            wqe: basis.quad_wts.clone(),
            tint: basis.int_phi.clone(),
        }
    }

    pub fn n_vol(&self) -> usize {
        N_VOL_FIELDS * self.nd
    }

    pub fn n_trace(&self) -> usize {
        N_SIDES * (self.p + 1) * N_TRACE_FIELDS + 1
    }

    /// Local trace index of field `f` at node `k` of side `s`.
    pub fn lt(&self, s: usize, k: usize, f: usize) -> usize {
        (s * (self.p + 1) + k) * N_TRACE_FIELDS + f
    }

    /// Local index of the element pressure average.
    pub fn lt_rho(&self) -> usize {
        N_SIDES * (self.p + 1) * N_TRACE_FIELDS
    }
}

/// Picard fields, previous time level, and forcings evaluated at the
/// element's quadrature points (component-major: comp * n_q + q).
pub struct LocalInputs<'a> {
    pub w_vol: &'a [f64],
    pub d_vol: &'a [f64],
    /// (side*2 + comp) * nq + qe
    pub w_side: &'a [f64],
    pub d_side: &'a [f64],
    pub u_prev: &'a [f64],
    pub b_prev: &'a [f64],
    pub f_vol: &'a [f64],
    pub g_vol: &'a [f64],
    /// 1/dt; zero for a steady solve.
    pub dt_inv: f64,
}

/// The assembled local system: volume-volume, volume-trace, trace-volume
/// and trace-trace blocks plus both right-hand sides.
pub struct LocalSystem {
    pub a_vv: DenseMatrix,
    pub a_vt: DenseMatrix,
    pub a_tv: DenseMatrix,
    pub a_tt: DenseMatrix,
    pub rhs_v: Vec<f64>,
    pub rhs_t: Vec<f64>,
}

/// Element contribution to the trace system after eliminating the volume
/// unknowns, with the affine reconstruction volume = R * trace + s.
pub struct CondensedElement {
    pub s_tt: DenseMatrix,
    pub rhs_t: Vec<f64>,
    pub recon_r: DenseMatrix,
    pub recon_s: Vec<f64>,
}

pub fn assemble_local(
    t: &RefTables,
    geom: &ElemGeom,
    params: &MhdParams,
    inp: &LocalInputs,
) -> LocalSystem {
    let nd = t.nd;
    let nq2 = t.nq2;
    let nqe = t.nq;
    let npe = t.p + 1;
    let nv = t.n_vol();
    let nt = t.n_trace();
    let mut a_vv = DenseMatrix::zeros(nv, nv);
    let mut a_vt = DenseMatrix::zeros(nv, nt);
    let mut a_tv = DenseMatrix::zeros(nt, nv);
    let mut a_tt = DenseMatrix::zeros(nt, nt);
    let mut rhs_v = vec![0.0; nv];
    let rhs_t = vec![0.0; nt];

    let (re, rm, kap, xi) = (params.re, params.rm, params.kappa, params.xi);
    let (beta_n, beta_t) = (params.beta_n, params.beta_t);
    let jac = 0.25 * geom.hx * geom.hy;
    let sx = 2.0 / geom.hx;
    let sy = 2.0 / geom.hy;

    // ---- volume terms ----
    let mut nax = vec![0.0; nd];
    let mut nay = vec![0.0; nd];
    for q in 0..nq2 {
        let jw = jac * t.wq2[q];
        let w1 = inp.w_vol[q];
        let w2 = inp.w_vol[nq2 + q];
        let d1 = inp.d_vol[q];
        let d2 = inp.d_vol[nq2 + q];
        for i in 0..nd {
            nax[i] = t.dxi2[i * nq2 + q] * sx;
            nay[i] = t.deta2[i * nq2 + q] * sy;
        }
        for a in 0..nd {
            let na = t.phi2[a * nq2 + q];
            let naw = na * jw;
            let nax_a = nax[a];
            let nay_a = nay[a];
            // Forcing and time-history right-hand sides.
            rhs_v[F_U1 * nd + a] += (inp.f_vol[q] + inp.dt_inv * inp.u_prev[q]) * naw;
            rhs_v[F_U2 * nd + a] += (inp.f_vol[nq2 + q] + inp.dt_inv * inp.u_prev[nq2 + q]) * naw;
            rhs_v[F_B1 * nd + a] +=
                (inp.g_vol[q] + kap * inp.dt_inv * inp.b_prev[q]) * naw;
            rhs_v[F_B2 * nd + a] +=
                (inp.g_vol[nq2 + q] + kap * inp.dt_inv * inp.b_prev[nq2 + q]) * naw;
            for c in 0..nd {
                let nc = t.phi2[c * nq2 + q];
                let ncx = nax[c];
                let ncy = nay[c];
                let mass = nc * naw;
                // (a) Re (L, G) + (u, div G)
                for f in [F_L11, F_L12, F_L21, F_L22] {
                    a_vv.add(f * nd + a, f * nd + c, re * mass);
                }
                a_vv.add(F_L11 * nd + a, F_U1 * nd + c, nc * nax_a * jw);
                a_vv.add(F_L12 * nd + a, F_U1 * nd + c, nc * nay_a * jw);
                a_vv.add(F_L21 * nd + a, F_U2 * nd + c, nc * nax_a * jw);
                a_vv.add(F_L22 * nd + a, F_U2 * nd + c, nc * nay_a * jw);
                // (b) time, -(div L, v), (grad q, v)
                if inp.dt_inv != 0.0 {
                    a_vv.add(F_U1 * nd + a, F_U1 * nd + c, inp.dt_inv * mass);
                    a_vv.add(F_U2 * nd + a, F_U2 * nd + c, inp.dt_inv * mass);
                }
                a_vv.add(F_U1 * nd + a, F_L11 * nd + c, -ncx * naw);
                a_vv.add(F_U1 * nd + a, F_L12 * nd + c, -ncy * naw);
                a_vv.add(F_U2 * nd + a, F_L21 * nd + c, -ncx * naw);
                a_vv.add(F_U2 * nd + a, F_L22 * nd + c, -ncy * naw);
                a_vv.add(F_U1 * nd + a, F_Q * nd + c, ncx * naw);
                a_vv.add(F_U2 * nd + a, F_Q * nd + c, ncy * naw);
                // (b) split convection
                let conv = 0.5 * ((w1 * ncx + w2 * ncy) * na - nc * (w1 * nax_a + w2 * nay_a)) * jw;
                a_vv.add(F_U1 * nd + a, F_U1 * nd + c, conv);
                a_vv.add(F_U2 * nd + a, F_U2 * nd + c, conv);
                // (b) Lorentz (curl b, v x kappa d)
                a_vv.add(F_U1 * nd + a, F_B2 * nd + c, kap * d2 * ncx * naw);
                a_vv.add(F_U1 * nd + a, F_B1 * nd + c, -kap * d2 * ncy * naw);
                a_vv.add(F_U2 * nd + a, F_B2 * nd + c, -kap * d1 * ncx * naw);
                a_vv.add(F_U2 * nd + a, F_B1 * nd + c, kap * d1 * ncy * naw);
                // (c) -(u, grad w)
                a_vv.add(F_Q * nd + a, F_U1 * nd + c, -nc * nax_a * jw);
                a_vv.add(F_Q * nd + a, F_U2 * nd + c, -nc * nay_a * jw);
                // (d) (Rm/kappa)(J, H) - (b, curl H)
                a_vv.add(F_J * nd + a, F_J * nd + c, (rm / kap) * mass);
                a_vv.add(F_J * nd + a, F_B1 * nd + c, -nc * nay_a * jw);
                a_vv.add(F_J * nd + a, F_B2 * nd + c, nc * nax_a * jw);
                // (e) time, (curl J, c), -(r, div c), -(u x kappa d, curl c)
                if inp.dt_inv != 0.0 {
                    a_vv.add(F_B1 * nd + a, F_B1 * nd + c, kap * inp.dt_inv * mass);
                    a_vv.add(F_B2 * nd + a, F_B2 * nd + c, kap * inp.dt_inv * mass);
                }
                a_vv.add(F_B1 * nd + a, F_J * nd + c, ncy * naw);
                a_vv.add(F_B2 * nd + a, F_J * nd + c, -ncx * naw);
                a_vv.add(F_B1 * nd + a, F_R * nd + c, -nc * nax_a * jw);
                a_vv.add(F_B2 * nd + a, F_R * nd + c, -nc * nay_a * jw);
                a_vv.add(F_B1 * nd + a, F_U1 * nd + c, kap * d2 * nc * nay_a * jw);
                a_vv.add(F_B1 * nd + a, F_U2 * nd + c, -kap * d1 * nc * nay_a * jw);
                a_vv.add(F_B2 * nd + a, F_U1 * nd + c, -kap * d2 * nc * nax_a * jw);
                a_vv.add(F_B2 * nd + a, F_U2 * nd + c, kap * d1 * nc * nax_a * jw);
                // (f) (div b, s)
                a_vv.add(F_R * nd + a, F_B1 * nd + c, ncx * naw);
                a_vv.add(F_R * nd + a, F_B2 * nd + c, ncy * naw);
            }
        }
    }

    // ---- boundary-average bookkeeping for the continuity equation ----
    let perim = 2.0 * (geom.hx + geom.hy);
    let mut bd_int = vec![0.0; nd];
    for (s, sv) in t.svals.iter().enumerate() {
        let sg = side_geometry(Side::ALL[s], geom);
        let half = 0.5 * sg.length;
        for qe in 0..nqe {
            let jw = half * t.wqe[qe];
            for i in 0..nd {
                bd_int[i] += sv[i * nqe + qe] * jw;
            }
        }
    }
    let wbar: Vec<f64> = bd_int.iter().map(|v| v / perim).collect();
    // <qbar - rho, wbar>: q coupling and the rho column.
    for a in 0..nd {
        for c in 0..nd {
            a_vv.add(F_Q * nd + a, F_Q * nd + c, wbar[a] * bd_int[c]);
        }
        a_vt.add(F_Q * nd + a, t.lt_rho(), -bd_int[a]);
    }

    // ---- side terms ----
    for s in 0..N_SIDES {
        let side = Side::ALL[s];
        let sg = side_geometry(side, geom);
        let [nx, ny] = sg.normal;
        let sig = sg.sigma;
        let tl = [-ny, nx]; // local counterclockwise tangent
        let half = 0.5 * sg.length;
        let sv = &t.svals[s];
        for qe in 0..nqe {
            let jw = half * t.wqe[qe];
            let w1 = inp.w_side[(s * 2) * nqe + qe];
            let w2 = inp.w_side[(s * 2 + 1) * nqe + qe];
            let d1 = inp.d_side[(s * 2) * nqe + qe];
            let d2 = inp.d_side[(s * 2 + 1) * nqe + qe];
            let wn = w1 * nx + w2 * ny;
            let (tau_t, tau_n) = stabilization(wn);
            // S_u = tau_t I + (tau_n - tau_t) n nT
            let dtau = tau_n - tau_t;
            let s11 = tau_t + dtau * nx * nx;
            let s12 = dtau * nx * ny;
            let s22 = tau_t + dtau * ny * ny;

            for a in 0..nd {
                let na = sv[a * nqe + qe];
                if na == 0.0 {
                    continue;
                }
                let naw = na * jw;
                // volume x volume side couplings
                for c in 0..nd {
                    let nc = sv[c * nqe + qe];
                    if nc == 0.0 {
                        continue;
                    }
                    let m = nc * naw;
                    // (b): <S_u u, v>
                    a_vv.add(F_U1 * nd + a, F_U1 * nd + c, s11 * m);
                    a_vv.add(F_U1 * nd + a, F_U2 * nd + c, s12 * m);
                    a_vv.add(F_U2 * nd + a, F_U1 * nd + c, s12 * m);
                    a_vv.add(F_U2 * nd + a, F_U2 * nd + c, s22 * m);
                    // (b): -(1-xi)<(n x b), v x kappa d> volume part
                    a_vv.add(F_U1 * nd + a, F_B2 * nd + c, -(1.0 - xi) * kap * d2 * nx * m);
                    a_vv.add(F_U1 * nd + a, F_B1 * nd + c, (1.0 - xi) * kap * d2 * ny * m);
                    a_vv.add(F_U2 * nd + a, F_B2 * nd + c, (1.0 - xi) * kap * d1 * nx * m);
                    a_vv.add(F_U2 * nd + a, F_B1 * nd + c, -(1.0 - xi) * kap * d1 * ny * m);
                    // (e): <((1-xi)u) x kappa d, n x c> volume part
                    a_vv.add(F_B1 * nd + a, F_U1 * nd + c, -(1.0 - xi) * kap * d2 * ny * m);
                    a_vv.add(F_B1 * nd + a, F_U2 * nd + c, (1.0 - xi) * kap * d1 * ny * m);
                    a_vv.add(F_B2 * nd + a, F_U1 * nd + c, (1.0 - xi) * kap * d2 * nx * m);
                    a_vv.add(F_B2 * nd + a, F_U2 * nd + c, -(1.0 - xi) * kap * d1 * nx * m);
                    // (e): beta_t <(b . tl)(c . tl)>
                    a_vv.add(F_B1 * nd + a, F_B1 * nd + c, beta_t * tl[0] * tl[0] * m);
                    a_vv.add(F_B1 * nd + a, F_B2 * nd + c, beta_t * tl[0] * tl[1] * m);
                    a_vv.add(F_B2 * nd + a, F_B1 * nd + c, beta_t * tl[1] * tl[0] * m);
                    a_vv.add(F_B2 * nd + a, F_B2 * nd + c, beta_t * tl[1] * tl[1] * m);
                    // (f): beta_n^-1 <r, s>
                    a_vv.add(F_R * nd + a, F_R * nd + c, m / beta_n);
                }
                // volume x trace couplings
                for k in 0..npe {
                    let tk = t.tphi[k * nqe + qe];
                    let tkw = tk * jw;
                    let ux = t.lt(s, k, T_UX);
                    let uy = t.lt(s, k, T_UY);
                    let bt = t.lt(s, k, T_BT);
                    let rh = t.lt(s, k, T_RH);
                    // (a): -<uhat, G n>
                    a_vt.add(F_L11 * nd + a, ux, -tkw * na * nx);
                    a_vt.add(F_L12 * nd + a, ux, -tkw * na * ny);
                    a_vt.add(F_L21 * nd + a, uy, -tkw * na * nx);
                    a_vt.add(F_L22 * nd + a, uy, -tkw * na * ny);
                    // (b): <(w.n)/2 uhat - S_u uhat, v>
                    a_vt.add(F_U1 * nd + a, ux, (0.5 * wn - s11) * tkw * na);
                    a_vt.add(F_U1 * nd + a, uy, -s12 * tkw * na);
                    a_vt.add(F_U2 * nd + a, ux, -s12 * tkw * na);
                    a_vt.add(F_U2 * nd + a, uy, (0.5 * wn - s22) * tkw * na);
                    // (b): +(1-xi) kappa sigma <bhat_t, v x d>
                    a_vt.add(F_U1 * nd + a, bt, (1.0 - xi) * kap * sig * d2 * tkw * na);
                    a_vt.add(F_U2 * nd + a, bt, -(1.0 - xi) * kap * sig * d1 * tkw * na);
                    // (c): <uhat.n, w> part
                    a_vt.add(F_Q * nd + a, ux, tkw * na * nx);
                    a_vt.add(F_Q * nd + a, uy, tkw * na * ny);
                    // (d): -<sigma bhat_t, H>
                    a_vt.add(F_J * nd + a, bt, -sig * tkw * na);
                    // (e): <rhat, c.n>
                    a_vt.add(F_B1 * nd + a, rh, tkw * na * nx);
                    a_vt.add(F_B2 * nd + a, rh, tkw * na * ny);
                    // (e): xi uhat x kappa d against n x c
                    a_vt.add(F_B1 * nd + a, ux, -xi * kap * d2 * ny * tkw * na);
                    a_vt.add(F_B1 * nd + a, uy, xi * kap * d1 * ny * tkw * na);
                    a_vt.add(F_B2 * nd + a, ux, xi * kap * d2 * nx * tkw * na);
                    a_vt.add(F_B2 * nd + a, uy, -xi * kap * d1 * nx * tkw * na);
                    // (e): -beta_t sigma <bhat_t, c.tl>
                    a_vt.add(F_B1 * nd + a, bt, -beta_t * sig * tl[0] * tkw * na);
                    a_vt.add(F_B2 * nd + a, bt, -beta_t * sig * tl[1] * tkw * na);
                    // (f): -beta_n^-1 <rhat, s>
                    a_vt.add(F_R * nd + a, rh, -tkw * na / beta_n);

                    // conservation rows
                    // (g): -<flux_u, vhat>
                    a_tv.add(ux, F_L11 * nd + a, nx * tkw * na);
                    a_tv.add(ux, F_L12 * nd + a, ny * tkw * na);
                    a_tv.add(uy, F_L21 * nd + a, nx * tkw * na);
                    a_tv.add(uy, F_L22 * nd + a, ny * tkw * na);
                    a_tv.add(ux, F_Q * nd + a, -nx * tkw * na);
                    a_tv.add(uy, F_Q * nd + a, -ny * tkw * na);
                    a_tv.add(ux, F_U1 * nd + a, -(0.5 * wn + s11) * tkw * na);
                    a_tv.add(ux, F_U2 * nd + a, -s12 * tkw * na);
                    a_tv.add(uy, F_U1 * nd + a, -s12 * tkw * na);
                    a_tv.add(uy, F_U2 * nd + a, -(0.5 * wn + s22) * tkw * na);
                    a_tv.add(ux, F_B2 * nd + a, -kap * xi * d2 * nx * tkw * na);
                    a_tv.add(ux, F_B1 * nd + a, kap * xi * d2 * ny * tkw * na);
                    a_tv.add(uy, F_B2 * nd + a, kap * xi * d1 * nx * tkw * na);
                    a_tv.add(uy, F_B1 * nd + a, -kap * xi * d1 * ny * tkw * na);
                    // (h): -<sigma(-J + kappa(1-xi)(u x d)) + beta_t(sigma(n x b) - bhat_t), chat>
                    a_tv.add(bt, F_J * nd + a, sig * tkw * na);
                    a_tv.add(bt, F_U1 * nd + a, -sig * kap * (1.0 - xi) * d2 * tkw * na);
                    a_tv.add(bt, F_U2 * nd + a, sig * kap * (1.0 - xi) * d1 * tkw * na);
                    a_tv.add(bt, F_B1 * nd + a, beta_t * sig * ny * tkw * na);
                    a_tv.add(bt, F_B2 * nd + a, -beta_t * sig * nx * tkw * na);
                    // (i): -<b.n + beta_n^-1(r - rhat), shat>
                    a_tv.add(rh, F_B1 * nd + a, -nx * tkw * na);
                    a_tv.add(rh, F_B2 * nd + a, -ny * tkw * na);
                    a_tv.add(rh, F_R * nd + a, -tkw * na / beta_n);
                }
            }
            // trace x trace couplings
            for k in 0..npe {
                let tk = t.tphi[k * nqe + qe];
                let tkw = tk * jw;
                let ux = t.lt(s, k, T_UX);
                let uy = t.lt(s, k, T_UY);
                let bt = t.lt(s, k, T_BT);
                let rh = t.lt(s, k, T_RH);
                for k2 in 0..npe {
                    let tk2 = t.tphi[k2 * nqe + qe];
                    let m = tk2 * tkw;
                    let ux2 = t.lt(s, k2, T_UX);
                    let uy2 = t.lt(s, k2, T_UY);
                    let bt2 = t.lt(s, k2, T_BT);
                    let rh2 = t.lt(s, k2, T_RH);
                    // (g): +<S_u uhat, vhat>
                    a_tt.add(ux, ux2, s11 * m);
                    a_tt.add(ux, uy2, s12 * m);
                    a_tt.add(uy, ux2, s12 * m);
                    a_tt.add(uy, uy2, s22 * m);
                    // (h): +beta_t <bhat_t, chat>
                    a_tt.add(bt, bt2, beta_t * m);
                    // (i): +beta_n^-1 <rhat, shat>
                    a_tt.add(rh, rh2, m / beta_n);
                }
            }
        }
        // (c) -<uhat.n, wbar> and (j) <uhat.n, 1>: side integrals of the
        // trace basis against the constant normal.
        for k in 0..npe {
            let int_k = half * t.tint[k];
            let ux = t.lt(s, k, T_UX);
            let uy = t.lt(s, k, T_UY);
            for a in 0..nd {
                a_vt.add(F_Q * nd + a, ux, -wbar[a] * nx * int_k);
                a_vt.add(F_Q * nd + a, uy, -wbar[a] * ny * int_k);
            }
            a_tt.add(t.lt_rho(), ux, nx * int_k);
            a_tt.add(t.lt_rho(), uy, ny * int_k);
        }
    }

    LocalSystem {
        a_vv,
        a_vt,
        a_tv,
        a_tt,
        rhs_v,
        rhs_t,
    }
}

/// Eliminates the volume unknowns: the element's Schur complement onto its
/// trace unknowns plus the affine reconstruction map.
pub fn static_condense(local: &LocalSystem, element: usize) -> Result<CondensedElement, HdgError> {
    let nv = local.a_vv.nrows();
    let nt = local.a_tt.nrows();
    let lu = DenseLu::factor(&local.a_vv)
        .map_err(|source| HdgError::LocalSolve { element, source })?;
    // Solve A_vv [X | s] = [A_vt | rhs_v] in one pass.
    let mut aug = DenseMatrix::zeros(nv, nt + 1);
    for i in 0..nv {
        for j in 0..nt {
            aug.set(i, j, local.a_vt.get(i, j));
        }
        aug.set(i, nt, local.rhs_v[i]);
    }
    let sol = lu.solve_mat(&aug);
    let mut recon_r = DenseMatrix::zeros(nv, nt);
    let mut recon_s = vec![0.0; nv];
    for i in 0..nv {
        for j in 0..nt {
            recon_r.set(i, j, -sol.get(i, j));
        }
        recon_s[i] = sol.get(i, nt);
    }
    // S_tt = A_tt - A_tv X, rhs = rhs_t - A_tv s.
    let mut s_tt = local.a_tt.clone();
    let mut rhs_t = local.rhs_t.clone();
    for i in 0..nt {
        let arow = local.a_tv.row(i);
        for (kk, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let xrow = sol.row(kk);
            let srow = s_tt.row_mut(i);
            for j in 0..nt {
                srow[j] -= av * xrow[j];
            }
            rhs_t[i] -= av * xrow[nt];
        }
    }
    Ok(CondensedElement {
        s_tt,
        rhs_t,
        recon_r,
        recon_s,
    })
}
