//! Coefficient containers for the volume fields (L, u, q, J, b, r) and the
//! skeletal fields (uhat, bhat_t, rhat, rho).

use super::basis::BasisP;
use super::mesh::QuadMesh;

/// Per-element nodal coefficients of all volume fields. Scalar fields store
/// `n_elems * nd` values, vector fields `n_elems * comps * nd`, with the
/// element-and-component block layout `(el * comps + c) * nd + i`.
/// The 2D current J is scalar.
#[derive(Debug, Clone)]
pub struct VolumeState {
    pub p: usize,
    pub n_elems: usize,
    /// Velocity gradient tensor, components (L11, L12, L21, L22).
    pub l: Vec<f64>,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    pub j: Vec<f64>,
    pub b: Vec<f64>,
    pub r: Vec<f64>,
}

impl VolumeState {
    pub fn zeros(n_elems: usize, p: usize) -> Self {
        let nd = (p + 1) * (p + 1);
        Self {
            p,
            n_elems,
            l: vec![0.0; n_elems * 4 * nd],
            u: vec![0.0; n_elems * 2 * nd],
            q: vec![0.0; n_elems * nd],
            j: vec![0.0; n_elems * nd],
            b: vec![0.0; n_elems * 2 * nd],
            r: vec![0.0; n_elems * nd],
        }
    }

    pub fn nd(&self) -> usize {
        (self.p + 1) * (self.p + 1)
    }

    pub fn total_dofs(&self) -> usize {
        self.l.len() + self.u.len() + self.q.len() + self.j.len() + self.b.len() + self.r.len()
    }

    pub fn elem_u(&self, el: usize) -> &[f64] {
        let nd = self.nd();
        &self.u[el * 2 * nd..(el + 1) * 2 * nd]
    }

    pub fn elem_b(&self, el: usize) -> &[f64] {
        let nd = self.nd();
        &self.b[el * 2 * nd..(el + 1) * 2 * nd]
    }

    pub fn elem_q(&self, el: usize) -> &[f64] {
        let nd = self.nd();
        &self.q[el * nd..(el + 1) * nd]
    }

    pub fn elem_j(&self, el: usize) -> &[f64] {
        let nd = self.nd();
        &self.j[el * nd..(el + 1) * nd]
    }

    /// Applies `f` to every stored coefficient in a fixed order.
    pub fn for_each(&self, f: &mut impl FnMut(f64)) {
        for arr in [&self.l, &self.u, &self.q, &self.j, &self.b, &self.r] {
            for &v in arr.iter() {
                f(v);
            }
        }
    }

    /// L2 norm of the velocity field over the mesh.
    pub fn u_l2(&self, mesh: &QuadMesh, basis: &BasisP) -> f64 {
        let nd = self.nd();
        let nq = basis.n_quad();
        let mut acc = 0.0;
        for el in 0..self.n_elems {
            let (_, _, hx, hy) = mesh.elem_box(el);
            let jac = 0.25 * hx * hy;
            for qy in 0..nq {
                for qx in 0..nq {
                    let wq = basis.quad_wts[qx] * basis.quad_wts[qy] * jac;
                    for c in 0..2 {
                        let mut v = 0.0;
                        for iy in 0..=self.p {
                            for ix in 0..=self.p {
                                let i = iy * (self.p + 1) + ix;
                                v += self.u[(el * 2 + c) * nd + i]
                                    * basis.phi[ix * nq + qx]
                                    * basis.phi[iy * nq + qy];
                            }
                        }
                        acc += wq * v * v;
                    }
                }
            }
        }
        acc.sqrt()
    }
}

/// Skeletal coefficients: per-edge-node velocity trace and scalars, plus the
/// per-element pressure average.
#[derive(Debug, Clone)]
pub struct TraceState {
    pub p: usize,
    pub n_edges: usize,
    /// uhat[(e*(p+1)+k)*2 + c]
    pub uhat: Vec<f64>,
    /// bt[e*(p+1)+k]
    pub bt: Vec<f64>,
    /// rh[e*(p+1)+k]
    pub rh: Vec<f64>,
    /// rho[element]
    pub rho: Vec<f64>,
}

impl TraceState {
    pub fn zeros(n_edges: usize, n_elems: usize, p: usize) -> Self {
        let npe = p + 1;
        Self {
            p,
            n_edges,
            uhat: vec![0.0; n_edges * npe * 2],
            bt: vec![0.0; n_edges * npe],
            rh: vec![0.0; n_edges * npe],
            rho: vec![0.0; n_elems],
        }
    }

    pub fn total_dofs(&self) -> usize {
        self.uhat.len() + self.bt.len() + self.rh.len() + self.rho.len()
    }

    pub fn for_each(&self, f: &mut impl FnMut(f64)) {
        for arr in [&self.uhat, &self.bt, &self.rh, &self.rho] {
            for &v in arr.iter() {
                f(v);
            }
        }
    }
}

/// Elementwise L2 projection of a pair of closures onto the tensor basis,
/// writing into a `n_elems * 2 * nd` coefficient array (component-major per
/// element). Uses the tensor structure of the mass matrix: one 1D solve per
/// row and column.
pub fn project_vector_field(
    mesh: &QuadMesh,
    basis: &BasisP,
    f: &(dyn Fn(f64, f64) -> [f64; 2] + Sync),
    out: &mut [f64],
) {
    let p = basis.p;
    let nd = (p + 1) * (p + 1);
    let nq = basis.n_quad();
    assert_eq!(out.len(), mesh.n_elems() * 2 * nd);
    let mut rhs = vec![0.0; 2 * nd];
    for el in 0..mesh.n_elems() {
        let (x0, y0, hx, hy) = mesh.elem_box(el);
        rhs.fill(0.0);
        for qy in 0..nq {
            let y = y0 + 0.5 * (basis.quad_pts[qy] + 1.0) * hy;
            for qx in 0..nq {
                let x = x0 + 0.5 * (basis.quad_pts[qx] + 1.0) * hx;
                let wq = basis.quad_wts[qx] * basis.quad_wts[qy];
                let val = f(x, y);
                for iy in 0..=p {
                    for ix in 0..=p {
                        let phi = basis.phi[ix * nq + qx] * basis.phi[iy * nq + qy];
                        let i = iy * (p + 1) + ix;
                        rhs[i] += wq * phi * val[0];
                        rhs[nd + i] += wq * phi * val[1];
                    }
                }
            }
        }
        // Tensor mass solve: M2 = M1 (x) M1, and the physical jacobian
        // cancels against the rhs scaling, so reference solves suffice.
        for c in 0..2 {
            tensor_mass_solve(basis, &mut rhs[c * nd..(c + 1) * nd]);
            out[(el * 2 + c) * nd..(el * 2 + c + 1) * nd].copy_from_slice(&rhs[c * nd..(c + 1) * nd]);
        }
    }
}

/// Solves (M1 (x) M1) c = rhs in place on one element.
fn tensor_mass_solve(basis: &BasisP, rhs: &mut [f64]) {
    let n = basis.n_nodes();
    let mut col = vec![0.0; n];
    // Solve along x for each row iy.
    for iy in 0..n {
        basis.mass_solve(&mut rhs[iy * n..(iy + 1) * n]);
    }
    // Solve along y for each column ix.
    for ix in 0..n {
        for iy in 0..n {
            col[iy] = rhs[iy * n + ix];
        }
        basis.mass_solve(&mut col);
        for iy in 0..n {
            rhs[iy * n + ix] = col[iy];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdg::mesh::build_mesh;

    #[test]
    fn projection_reproduces_polynomials() {
        let mesh = build_mesh(2, 3, (0.0, 2.0, -1.0, 1.0), false, false, None).unwrap();
        let basis = BasisP::new(2).unwrap();
        let f = |x: f64, y: f64| [x * x - y, 2.0 * x * y + 1.0];
        let mut out = vec![0.0; mesh.n_elems() * 2 * 9];
        project_vector_field(&mesh, &basis, &f, &mut out);
        // Nodal coefficients must equal point values for in-space fields.
        for el in 0..mesh.n_elems() {
            let (x0, y0, hx, hy) = mesh.elem_box(el);
            for iy in 0..3 {
                for ix in 0..3 {
                    let x = x0 + 0.5 * (basis.nodes[ix] + 1.0) * hx;
                    let y = y0 + 0.5 * (basis.nodes[iy] + 1.0) * hy;
                    let i = iy * 3 + ix;
                    let v = f(x, y);
                    assert!((out[(el * 2) * 9 + i] - v[0]).abs() < 1e-12);
                    assert!((out[(el * 2 + 1) * 9 + i] - v[1]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn u_l2_of_constant_field() {
        let mesh = build_mesh(3, 3, (0.0, 1.0, 0.0, 1.0), false, false, None).unwrap();
        let basis = BasisP::new(1).unwrap();
        let mut s = VolumeState::zeros(9, 1);
        for v in s.u.iter_mut() {
            *v = 2.0;
        }
        // ||(2,2)||_L2 over the unit square = sqrt(8).
        assert!((s.u_l2(&mesh, &basis) - 8.0_f64.sqrt()).abs() < 1e-12);
    }
}
