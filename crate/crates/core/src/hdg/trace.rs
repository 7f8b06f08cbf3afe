//! Global trace system: sums the per-element condensed contributions into
//! flux-conservation rows for the velocity trace, tangential-field rows,
//! normal-magnetic rows, and the per-element pressure constraint row, then
//! applies boundary conditions by eliminating constrained trace dofs.
//!
//! Full unknown layout, matching the condensed block form: all velocity
//! trace dofs, then the element pressure averages, then the tangential
//! magnetic trace, then the multiplier trace.

use super::basis::BasisP;
use super::fields::{TraceState, VolumeState};
use super::local::{
    assemble_local, side_geometry, static_condense, ElemGeom, LocalInputs, RefTables, F_B1, F_J,
    F_L11, F_Q, F_R, F_U1, N_SIDES, N_TRACE_FIELDS, T_BT, T_RH, T_UX, T_UY,
};
use super::mesh::{BoundaryTag, QuadMesh, Side};
use super::params::MhdParams;
use super::HdgError;
use crate::amg::NodalBlockLayout;
use crate::sparse::{DenseMatrix, SparseMatrixCsr};
use rayon::prelude::*;

/// Full-system dof numbering.
#[derive(Debug, Clone, Copy)]
pub struct TraceLayout {
    pub p: usize,
    pub n_edges: usize,
    pub n_elems: usize,
}

impl TraceLayout {
    pub fn nodes_per_edge(&self) -> usize {
        self.p + 1
    }

    pub fn n_uhat(&self) -> usize {
        self.n_edges * self.nodes_per_edge() * 2
    }

    pub fn n_bt(&self) -> usize {
        self.n_edges * self.nodes_per_edge()
    }

    pub fn n_total(&self) -> usize {
        self.n_uhat() + self.n_elems + 2 * self.n_bt()
    }

    pub fn uhat_dof(&self, edge: usize, node: usize, comp: usize) -> usize {
        (edge * self.nodes_per_edge() + node) * 2 + comp
    }

    pub fn rho_dof(&self, elem: usize) -> usize {
        self.n_uhat() + elem
    }

    pub fn bt_dof(&self, edge: usize, node: usize) -> usize {
        self.n_uhat() + self.n_elems + edge * self.nodes_per_edge() + node
    }

    pub fn rh_dof(&self, edge: usize, node: usize) -> usize {
        self.n_uhat() + self.n_elems + self.n_bt() + edge * self.nodes_per_edge() + node
    }
}

/// Per-element affine reconstruction volume = R * local_trace + s.
pub struct ElementRecon {
    pub r: DenseMatrix,
    pub s: Vec<f64>,
}

/// Boundary condition kind per mesh side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Velocity trace, tangential magnetic trace and multiplier trace all
    /// prescribed.
    Dirichlet,
    /// Mirror + perfect conductor: u.n = 0 and r = 0 imposed strongly; the
    /// tangential velocity keeps its zero-shear conservation row and the
    /// tangential field keeps its zero-tangential-E row.
    MirrorConductor,
    /// Mirror with prescribed tangential magnetic data; u.n = 0, r = 0.
    MirrorFixedBt,
}

/// Boundary data evaluators (only consulted for prescribed fields).
pub struct BoundaryData<'a> {
    pub u: &'a (dyn Fn(f64, f64) -> [f64; 2] + Sync),
    pub b: &'a (dyn Fn(f64, f64) -> [f64; 2] + Sync),
    pub r: &'a (dyn Fn(f64, f64) -> f64 + Sync),
}

/// Bookkeeping of the boundary reduction.
pub struct BcReduction {
    pub free: Vec<usize>,
    pub full_to_free: Vec<Option<usize>>,
    /// Prescribed values on the full layout (zero at free dofs).
    pub values_full: Vec<f64>,
    pub n_u_free: usize,
    pub n_bt_free: usize,
    pub n_rh_free: usize,
}

impl BcReduction {
    /// Start of the pressure-average block in the reduced numbering.
    pub fn rho_offset(&self) -> usize {
        self.n_u_free
    }
}

/// The condensed global system. After `apply_boundary_conditions` the matrix
/// and right-hand side are reduced to the free dofs and `bc` records the
/// elimination.
pub struct TraceSystem {
    pub layout: TraceLayout,
    pub matrix: SparseMatrixCsr,
    pub rhs: Vec<f64>,
    pub recon: Vec<ElementRecon>,
    pub bc: Option<BcReduction>,
}

/// Global dof ids of one element's local trace vector.
fn elem_trace_ids(mesh: &QuadMesh, layout: &TraceLayout, el: usize) -> Vec<usize> {
    let npe = layout.nodes_per_edge();
    let mut ids = Vec::with_capacity(N_SIDES * npe * N_TRACE_FIELDS + 1);
    for s in 0..N_SIDES {
        let e = mesh.elem_edges[el][s];
        for k in 0..npe {
            ids.push(layout.uhat_dof(e, k, 0));
            ids.push(layout.uhat_dof(e, k, 1));
            ids.push(layout.bt_dof(e, k));
            ids.push(layout.rh_dof(e, k));
        }
    }
    ids.push(layout.rho_dof(el));
    ids
}

/// Evaluates a 2-component element field at the volume quadrature points.
fn eval_vec_volume(coef: &[f64], tables: &RefTables, out: &mut [f64]) {
    let (nd, nq2) = (tables.nd, tables.nq2);
    out.fill(0.0);
    for c in 0..2 {
        for i in 0..nd {
            let v = coef[c * nd + i];
            if v == 0.0 {
                continue;
            }
            let row = &tables.phi2[i * nq2..(i + 1) * nq2];
            let dst = &mut out[c * nq2..(c + 1) * nq2];
            for (o, p) in dst.iter_mut().zip(row) {
                *o += v * p;
            }
        }
    }
}

/// Evaluates a 2-component element field on all four side quadratures.
fn eval_vec_sides(coef: &[f64], tables: &RefTables, out: &mut [f64]) {
    let (nd, nqe) = (tables.nd, tables.nq);
    out.fill(0.0);
    for s in 0..N_SIDES {
        let sv = &tables.svals[s];
        for c in 0..2 {
            let dst_off = (s * 2 + c) * nqe;
            for i in 0..nd {
                let v = coef[c * nd + i];
                if v == 0.0 {
                    continue;
                }
                for qe in 0..nqe {
                    out[dst_off + qe] += v * sv[i * nqe + qe];
                }
            }
        }
    }
}

/// Assembles the full (pre-boundary-condition) trace system. `w` and `d`
/// are the frozen Picard velocity and magnetic fields, `prev` the previous
/// time level, and `dt_inv` the inverse time step (zero for steady).
/// Element contributions are computed independently (optionally in
/// parallel) and scattered in element order, so results are identical in
/// serial and parallel runs.
#[allow(clippy::too_many_arguments)]
pub fn assemble_trace_system(
    mesh: &QuadMesh,
    basis: &BasisP,
    params: &MhdParams,
    w: &VolumeState,
    d: &VolumeState,
    prev: &VolumeState,
    forcing_f: &(dyn Fn(f64, f64) -> [f64; 2] + Sync),
    forcing_g: &(dyn Fn(f64, f64) -> [f64; 2] + Sync),
    dt_inv: f64,
    parallel: bool,
) -> Result<TraceSystem, HdgError> {
    let tables = RefTables::new(basis);
    let layout = TraceLayout {
        p: basis.p,
        n_edges: mesh.n_edges(),
        n_elems: mesh.n_elems(),
    };
    let nt = tables.n_trace();

    let assemble_one = |el: usize| -> Result<super::local::CondensedElement, HdgError> {
        let (x0, y0, hx, hy) = mesh.elem_box(el);
        let geom = ElemGeom { x0, y0, hx, hy };
        let nq2 = tables.nq2;
        let nqe = tables.nq;
        let mut w_vol = vec![0.0; 2 * nq2];
        let mut d_vol = vec![0.0; 2 * nq2];
        let mut u_prev = vec![0.0; 2 * nq2];
        let mut b_prev = vec![0.0; 2 * nq2];
        let mut w_side = vec![0.0; N_SIDES * 2 * nqe];
        let mut d_side = vec![0.0; N_SIDES * 2 * nqe];
        eval_vec_volume(w.elem_u(el), &tables, &mut w_vol);
        eval_vec_volume(d.elem_b(el), &tables, &mut d_vol);
        eval_vec_volume(prev.elem_u(el), &tables, &mut u_prev);
        eval_vec_volume(prev.elem_b(el), &tables, &mut b_prev);
        eval_vec_sides(w.elem_u(el), &tables, &mut w_side);
        eval_vec_sides(d.elem_b(el), &tables, &mut d_side);
        let mut f_vol = vec![0.0; 2 * nq2];
        let mut g_vol = vec![0.0; 2 * nq2];
        let nq = tables.nq;
        for qy in 0..nq {
            let y = y0 + 0.5 * (basis.quad_pts[qy] + 1.0) * hy;
            for qx in 0..nq {
                let x = x0 + 0.5 * (basis.quad_pts[qx] + 1.0) * hx;
                let q = qy * nq + qx;
                let fv = forcing_f(x, y);
                let gv = forcing_g(x, y);
                f_vol[q] = fv[0];
                f_vol[nq2 + q] = fv[1];
                g_vol[q] = gv[0];
                g_vol[nq2 + q] = gv[1];
            }
        }
        let inputs = LocalInputs {
            w_vol: &w_vol,
            d_vol: &d_vol,
            w_side: &w_side,
            d_side: &d_side,
            u_prev: &u_prev,
            b_prev: &b_prev,
            f_vol: &f_vol,
            g_vol: &g_vol,
            dt_inv,
        };
        let local = assemble_local(&tables, &geom, params, &inputs);
        static_condense(&local, el)
    };

    let condensed: Result<Vec<_>, HdgError> = if parallel {
        (0..mesh.n_elems())
            .into_par_iter()
            .map(assemble_one)
            .collect()
    } else {
        (0..mesh.n_elems()).map(assemble_one).collect()
    };
    let condensed = condensed?;

    let n = layout.n_total();
    let mut rhs = vec![0.0; n];
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut recon = Vec::with_capacity(mesh.n_elems());
    for (el, ce) in condensed.into_iter().enumerate() {
        let ids = elem_trace_ids(mesh, &layout, el);
        for i in 0..nt {
            let gi = ids[i];
            rhs[gi] += ce.rhs_t[i];
            let row = ce.s_tt.row(i);
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((gi, ids[j], v));
                }
            }
        }
        recon.push(ElementRecon {
            r: ce.recon_r,
            s: ce.recon_s,
        });
    }
    let matrix = SparseMatrixCsr::from_triplets(n, n, &triplets)?;
    Ok(TraceSystem {
        layout,
        matrix,
        rhs,
        recon,
        bc: None,
    })
}

/// Eliminates constrained boundary trace dofs: prescribed values are lifted
/// into the right-hand side and their rows and columns removed. Periodic
/// edges already share dofs through the unique-edge identification.
pub fn apply_boundary_conditions(
    t: TraceSystem,
    mesh: &QuadMesh,
    basis: &BasisP,
    kind_of: &dyn Fn(BoundaryTag) -> BoundaryCondition,
    data: &BoundaryData,
) -> Result<TraceSystem, HdgError> {
    if t.bc.is_some() {
        return Err(HdgError::BoundaryCondition(
            "boundary conditions already applied".into(),
        ));
    }
    let layout = t.layout;
    let n = layout.n_total();
    let npe = layout.nodes_per_edge();
    let mut constrained = vec![false; n];
    let mut values_full = vec![0.0; n];

    for (eid, edge) in mesh.edges.iter().enumerate() {
        let Some(tag) = edge.boundary else { continue };
        let kind = kind_of(tag);
        let tangent = edge.tangent();
        for k in 0..npe {
            let pt = edge.point(basis.nodes[k]);
            let (x, y) = (pt[0], pt[1]);
            match kind {
                BoundaryCondition::Dirichlet => {
                    let uv = (data.u)(x, y);
                    let bv = (data.b)(x, y);
                    let rv = (data.r)(x, y);
                    for c in 0..2 {
                        let dof = layout.uhat_dof(eid, k, c);
                        constrained[dof] = true;
                        values_full[dof] = uv[c];
                    }
                    let dof = layout.bt_dof(eid, k);
                    constrained[dof] = true;
                    values_full[dof] = bv[0] * tangent[0] + bv[1] * tangent[1];
                    let dof = layout.rh_dof(eid, k);
                    constrained[dof] = true;
                    values_full[dof] = rv;
                }
                BoundaryCondition::MirrorConductor | BoundaryCondition::MirrorFixedBt => {
                    // Normal velocity component vanishes; boundary edges are
                    // axis-aligned so this is a single coordinate.
                    let comp = if edge.horizontal { 1 } else { 0 };
                    let dof = layout.uhat_dof(eid, k, comp);
                    constrained[dof] = true;
                    values_full[dof] = 0.0;
                    let dof = layout.rh_dof(eid, k);
                    constrained[dof] = true;
                    values_full[dof] = 0.0;
                    if kind == BoundaryCondition::MirrorFixedBt {
                        let bv = (data.b)(x, y);
                        let dof = layout.bt_dof(eid, k);
                        constrained[dof] = true;
                        values_full[dof] = bv[0] * tangent[0] + bv[1] * tangent[1];
                    }
                }
            }
        }
    }

    let free: Vec<usize> = (0..n).filter(|&i| !constrained[i]).collect();
    let mut full_to_free = vec![None; n];
    for (fi, &i) in free.iter().enumerate() {
        full_to_free[i] = Some(fi);
    }
    let lift = t.matrix.spmv(&values_full)?;
    let rhs: Vec<f64> = free.iter().map(|&i| t.rhs[i] - lift[i]).collect();
    let matrix = t.matrix.select(&free, &full_to_free, free.len());
    let count_free = |lo: usize, hi: usize| (lo..hi).filter(|&i| !constrained[i]).count();
    let n_u_free = count_free(0, layout.n_uhat());
    let bt0 = layout.n_uhat() + layout.n_elems;
    let n_bt_free = count_free(bt0, bt0 + layout.n_bt());
    let n_rh_free = count_free(bt0 + layout.n_bt(), n);
    Ok(TraceSystem {
        layout,
        matrix,
        rhs,
        recon: t.recon,
        bc: Some(BcReduction {
            free,
            full_to_free,
            values_full,
            n_u_free,
            n_bt_free,
            n_rh_free,
        }),
    })
}

impl TraceSystem {
    /// Expands a reduced solution to the full layout, inserting prescribed
    /// boundary values.
    pub fn expand_solution(&self, x_red: &[f64]) -> Vec<f64> {
        match &self.bc {
            None => x_red.to_vec(),
            Some(bc) => {
                assert_eq!(x_red.len(), bc.free.len());
                let mut full = bc.values_full.clone();
                for (fi, &i) in bc.free.iter().enumerate() {
                    full[i] = x_red[fi];
                }
                full
            }
        }
    }

    /// Saddle permutation: reduced indices ordered as interleaved nodal
    /// blocks (u_x, u_y, b_t, r per edge node, free dofs only) followed by
    /// the pressure averages, plus the nodal layout of the F block.
    pub fn saddle_permutation(&self) -> (Vec<usize>, NodalBlockLayout) {
        let bc = self
            .bc
            .as_ref()
            .expect("saddle permutation requires boundary reduction");
        let layout = &self.layout;
        let npe = layout.nodes_per_edge();
        let mut perm = Vec::with_capacity(bc.free.len());
        let mut offsets = vec![0usize];
        let mut comps: Vec<u8> = Vec::new();
        for e in 0..layout.n_edges {
            for k in 0..npe {
                let cands = [
                    (layout.uhat_dof(e, k, 0), 0u8),
                    (layout.uhat_dof(e, k, 1), 1u8),
                    (layout.bt_dof(e, k), 2u8),
                    (layout.rh_dof(e, k), 3u8),
                ];
                let mut any = false;
                for (dof, comp) in cands {
                    if let Some(fi) = bc.full_to_free[dof] {
                        perm.push(fi);
                        comps.push(comp);
                        any = true;
                    }
                }
                if any {
                    offsets.push(perm.len());
                }
            }
        }
        let rho0 = bc.rho_offset();
        for el in 0..layout.n_elems {
            perm.push(rho0 + el);
        }
        (perm, NodalBlockLayout::new(offsets, comps, N_TRACE_FIELDS))
    }

    /// Extracts nodal trace coefficients from a full-layout solution vector.
    pub fn trace_state(&self, x_full: &[f64]) -> TraceState {
        let layout = &self.layout;
        let npe = layout.nodes_per_edge();
        let mut ts = TraceState::zeros(layout.n_edges, layout.n_elems, layout.p);
        for e in 0..layout.n_edges {
            for k in 0..npe {
                for c in 0..2 {
                    ts.uhat[(e * npe + k) * 2 + c] = x_full[layout.uhat_dof(e, k, c)];
                }
                ts.bt[e * npe + k] = x_full[layout.bt_dof(e, k)];
                ts.rh[e * npe + k] = x_full[layout.rh_dof(e, k)];
            }
        }
        for el in 0..layout.n_elems {
            ts.rho[el] = x_full[layout.rho_dof(el)];
        }
        ts
    }

    /// Per-element reconstruction of the volume fields from a reduced trace
    /// solution, followed by the zero-mean pressure shift.
    pub fn reconstruct_volume(
        &self,
        mesh: &QuadMesh,
        basis: &BasisP,
        x_red: &[f64],
    ) -> VolumeState {
        let x_full = self.expand_solution(x_red);
        let tables = RefTables::new(basis);
        let nd = tables.nd;
        let nt = tables.n_trace();
        let mut state = VolumeState::zeros(mesh.n_elems(), basis.p);
        let mut lt = vec![0.0; nt];
        for el in 0..mesh.n_elems() {
            let ids = elem_trace_ids(mesh, &self.layout, el);
            for (i, &gi) in ids.iter().enumerate() {
                lt[i] = x_full[gi];
            }
            let rec = &self.recon[el];
            for i in 0..rec.r.nrows() {
                let mut acc = rec.s[i];
                let row = rec.r.row(i);
                for (j, &v) in row.iter().enumerate() {
                    acc += v * lt[j];
                }
                let field = i / nd;
                let loc = i % nd;
                match field {
                    f if f < 4 => state.l[(el * 4 + f) * nd + loc] = acc,
                    f if f < 6 => state.u[(el * 2 + (f - F_U1)) * nd + loc] = acc,
                    f if f == F_Q => state.q[el * nd + loc] = acc,
                    f if f == F_J => state.j[el * nd + loc] = acc,
                    f if f < 10 => state.b[(el * 2 + (f - F_B1)) * nd + loc] = acc,
                    _ => state.r[el * nd + loc] = acc,
                }
            }
        }
        let _ = (F_L11, F_R);
        // Zero-mean pressure: subtract the global average.
        let mut integral = 0.0;
        for el in 0..mesh.n_elems() {
            let (_, _, hx, hy) = mesh.elem_box(el);
            let jac = 0.25 * hx * hy;
            for i in 0..nd {
                // int of basis i over the element: product of 1D integrals.
                let ix = i % (basis.p + 1);
                let iy = i / (basis.p + 1);
                integral +=
                    state.q[el * nd + i] * jac * basis.int_phi[ix] * basis.int_phi[iy];
            }
        }
        let mean = integral / mesh.area();
        for v in state.q.iter_mut() {
            *v -= mean;
        }
        state
    }

    /// Net normal flux of the velocity trace around each element,
    /// integral_vhat of uhat . n over the element boundary.
    pub fn element_normal_flux(
        &self,
        mesh: &QuadMesh,
        basis: &BasisP,
        x_full: &[f64],
    ) -> Vec<f64> {
        element_normal_flux(mesh, basis, &self.layout, x_full)
    }
}

/// Per-element net normal flux of the velocity trace.
pub fn element_normal_flux(
    mesh: &QuadMesh,
    basis: &BasisP,
    layout: &TraceLayout,
    x_full: &[f64],
) -> Vec<f64> {
    let npe = layout.nodes_per_edge();
    let mut out = vec![0.0; mesh.n_elems()];
    for el in 0..mesh.n_elems() {
        let (x0, y0, hx, hy) = mesh.elem_box(el);
        let geom = ElemGeom { x0, y0, hx, hy };
        let mut acc = 0.0;
        for (s, side) in Side::ALL.iter().enumerate() {
            let sg = side_geometry(*side, &geom);
            let e = mesh.elem_edges[el][s];
            for k in 0..npe {
                let un = x_full[layout.uhat_dof(e, k, 0)] * sg.normal[0]
                    + x_full[layout.uhat_dof(e, k, 1)] * sg.normal[1];
                acc += 0.5 * sg.length * basis.int_phi[k] * un;
            }
        }
        out[el] = acc;
    }
    out
}
