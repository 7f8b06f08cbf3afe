//! Nodal Lagrange basis on Gauss-Lobatto points with Gauss-Legendre
//! quadrature, precomputed as 1D reference tables; 2D quantities come from
//! tensor products.

use super::HdgError;
use crate::sparse::{DenseLu, DenseMatrix};

/// Degree-p basis data on the reference interval [-1, 1]:
/// Gauss-Lobatto nodes (p+1), a (p+2)-point Gauss-Legendre rule, basis
/// values and derivatives at the quadrature points, and the 1D mass matrix
/// factorization used by L2 projection.
#[derive(Debug)]
pub struct BasisP {
    pub p: usize,
    pub nodes: Vec<f64>,
    pub quad_pts: Vec<f64>,
    pub quad_wts: Vec<f64>,
    /// phi[i * nq + q]: value of basis i at quadrature point q.
    pub phi: Vec<f64>,
    /// dphi[i * nq + q]: reference derivative of basis i at point q.
    pub dphi: Vec<f64>,
    /// Reference integral of each basis function.
    pub int_phi: Vec<f64>,
    bary: Vec<f64>,
    mass_lu: DenseLu,
}

impl BasisP {
    pub fn new(p: usize) -> Result<Self, HdgError> {
        if p == 0 {
            return Err(HdgError::InvalidParams("degree must be at least 1".into()));
        }
        let nodes = gauss_lobatto(p + 1);
        let (quad_pts, quad_wts) = gauss_legendre(p + 2);
        let bary = barycentric_weights(&nodes);
        let nn = p + 1;
        let nq = quad_pts.len();
        let mut phi = vec![0.0; nn * nq];
        let mut dphi = vec![0.0; nn * nq];
        for (q, &x) in quad_pts.iter().enumerate() {
            let (v, d) = lagrange_eval(&nodes, &bary, x);
            for i in 0..nn {
                phi[i * nq + q] = v[i];
                dphi[i * nq + q] = d[i];
            }
        }
        let mut int_phi = vec![0.0; nn];
        for i in 0..nn {
            for q in 0..nq {
                int_phi[i] += quad_wts[q] * phi[i * nq + q];
            }
        }
        let mut mass = DenseMatrix::zeros(nn, nn);
        for i in 0..nn {
            for j in 0..nn {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += quad_wts[q] * phi[i * nq + q] * phi[j * nq + q];
                }
                mass.set(i, j, acc);
            }
        }
        let mass_lu = DenseLu::factor(&mass)
            .map_err(|e| HdgError::InvalidParams(format!("singular 1D mass matrix: {e}")))?;
        Ok(Self {
            p,
            nodes,
            quad_pts,
            quad_wts,
            phi,
            dphi,
            int_phi,
            bary,
            mass_lu,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.p + 1
    }

    pub fn n_quad(&self) -> usize {
        self.quad_pts.len()
    }

    /// Values and derivatives of all basis functions at an arbitrary point.
    pub fn eval_at(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        lagrange_eval(&self.nodes, &self.bary, x)
    }

    /// Solves the 1D mass system M c = rhs (used by tensor L2 projection).
    pub fn mass_solve(&self, rhs: &mut [f64]) {
        self.mass_lu.solve_in_place(rhs);
    }
}

/// Gauss-Legendre points and weights on [-1, 1] by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre(n, x);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dpn) = legendre(n, x);
        pts[n - 1 - i] = x;
        wts[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    (pts, wts)
}

/// Gauss-Lobatto points on [-1, 1] (n points, n >= 2): the endpoints plus
/// the roots of P'_{n-1}.
pub fn gauss_lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let p = n - 1;
    let mut pts = vec![0.0; n];
    pts[0] = -1.0;
    pts[p] = 1.0;
    for i in 1..p {
        // Newton on P'_p with a Chebyshev-Lobatto initial guess.
        let mut x = (std::f64::consts::PI * (p - i) as f64 / p as f64).cos();
        for _ in 0..100 {
            let (pp, dpp) = legendre(p, x);
            // P''_p from the Legendre ODE.
            let d2 = (2.0 * x * dpp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
            let dx = dpp / d2;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        pts[i] = x;
    }
    pts
}

/// Legendre polynomial P_n and derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] /= nodes[i] - nodes[j];
            }
        }
    }
    w
}

/// Values and derivatives of all Lagrange basis functions at `x`, by the
/// barycentric formula with exact handling of node hits.
fn lagrange_eval(nodes: &[f64], bary: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut vals = vec![0.0; n];
    let mut ders = vec![0.0; n];
    if let Some(k) = nodes.iter().position(|&t| (x - t).abs() < 1e-13) {
        vals[k] = 1.0;
        let mut sum = 0.0;
        for i in 0..n {
            if i != k {
                let d = (bary[i] / bary[k]) / (nodes[k] - nodes[i]);
                ders[i] = d;
                sum += d;
            }
        }
        ders[k] = -sum;
        return (vals, ders);
    }
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut a = vec![0.0; n];
    for i in 0..n {
        let diff = x - nodes[i];
        a[i] = bary[i] / diff;
        s0 += a[i];
        s1 += bary[i] / (diff * diff);
    }
    for i in 0..n {
        let v = a[i] / s0;
        vals[i] = v;
        ders[i] = v * (s1 / s0 - 1.0 / (x - nodes[i]));
    }
    (vals, ders)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 2..=6 {
            let (pts, wts) = gauss_legendre(n);
            // Exact for degree <= 2n-1.
            for deg in 0..=(2 * n - 1) {
                let num: f64 = pts
                    .iter()
                    .zip(&wts)
                    .map(|(&x, &w)| w * x.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (num - exact).abs() < 1e-13,
                    "n={n} deg={deg}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn lobatto_nodes_include_endpoints_and_sorted() {
        for n in 2..=8 {
            let pts = gauss_lobatto(n);
            assert_eq!(pts.len(), n);
            assert_eq!(pts[0], -1.0);
            assert_eq!(pts[n - 1], 1.0);
            for w in pts.windows(2) {
                assert!(w[1] > w[0]);
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        for p in 1..=5 {
            let b = BasisP::new(p).unwrap();
            for q in 0..b.n_quad() {
                let sum: f64 = (0..b.n_nodes()).map(|i| b.phi[i * b.n_quad() + q]).sum();
                assert!((sum - 1.0).abs() < 1e-13);
                let dsum: f64 = (0..b.n_nodes()).map(|i| b.dphi[i * b.n_quad() + q]).sum();
                assert!(dsum.abs() < 1e-12);
            }
            let (v, _) = b.eval_at(0.3217);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn nodal_property() {
        let b = BasisP::new(3).unwrap();
        for (k, &xk) in b.nodes.iter().enumerate() {
            let (v, _) = b.eval_at(xk);
            for (i, &vi) in v.iter().enumerate() {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((vi - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_reproduces_polynomial_slope() {
        let b = BasisP::new(3).unwrap();
        // Interpolate f(x) = x^3 - 2x at the nodes; check derivative at quads.
        let coeffs: Vec<f64> = b.nodes.iter().map(|&x| x * x * x - 2.0 * x).collect();
        for (q, &xq) in b.quad_pts.iter().enumerate() {
            let d: f64 = (0..b.n_nodes())
                .map(|i| coeffs[i] * b.dphi[i * b.n_quad() + q])
                .sum();
            assert!((d - (3.0 * xq * xq - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_matrix_spd() {
        let b = BasisP::new(4).unwrap();
        let nn = b.n_nodes();
        let nq = b.n_quad();
        let mut m = vec![0.0; nn * nn];
        for i in 0..nn {
            for j in 0..nn {
                for q in 0..nq {
                    m[i * nn + j] += b.quad_wts[q] * b.phi[i * nq + q] * b.phi[j * nq + q];
                }
            }
        }
        for i in 0..nn {
            for j in 0..nn {
                assert!((m[i * nn + j] - m[j * nn + i]).abs() < 1e-14);
            }
        }
        // x^T M x = || interpolant ||^2 > 0 for a few nonzero x.
        for seed in 0..3u64 {
            let x: Vec<f64> = (0..nn).map(|i| ((i as u64 + seed * 7 + 1) as f64).sin()).collect();
            let mut acc = 0.0;
            for i in 0..nn {
                for j in 0..nn {
                    acc += x[i] * m[i * nn + j] * x[j];
                }
            }
            assert!(acc > 0.0);
        }
    }
}
