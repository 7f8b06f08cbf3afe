//! Benchmark problem definitions: manufactured solutions, island
//! coalescence, hydromagnetic Kelvin-Helmholtz, and the driven cavity.

use super::picard::LinearTolMode;
use super::DriverError;
use crate::hdg::{BoundaryCondition, BoundaryTag, ExactSolution, MhdParams};
use std::f64::consts::PI;

pub type VecField = Box<dyn Fn(f64, f64) -> [f64; 2] + Sync + Send>;
pub type ScalarField = Box<dyn Fn(f64, f64) -> f64 + Sync + Send>;

/// A complete problem description: domain, boundary conditions, initial
/// fields, forcings, parameters, and (for verification problems) the exact
/// solution.
pub struct ProblemSpec {
    pub name: String,
    pub domain: (f64, f64, f64, f64),
    pub periodic_x: bool,
    pub periodic_y: bool,
    pub bc_bottom: BoundaryCondition,
    pub bc_top: BoundaryCondition,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub params: MhdParams,
    pub u0: VecField,
    pub b0: VecField,
    pub forcing_f: VecField,
    pub forcing_g: VecField,
    /// Dirichlet velocity data (consulted on Dirichlet sides only).
    pub bc_u: VecField,
    /// Magnetic data; its tangential component is used on Dirichlet and
    /// fixed-tangential mirror sides.
    pub bc_b: VecField,
    /// Multiplier data on Dirichlet sides.
    pub bc_r: ScalarField,
    pub exact: Option<ExactSolution>,
    pub lin_tol: LinearTolMode,
}

impl ProblemSpec {
    pub fn bc_kind(&self, tag: BoundaryTag) -> BoundaryCondition {
        match tag {
            BoundaryTag::Bottom => self.bc_bottom,
            BoundaryTag::Top => self.bc_top,
            BoundaryTag::Left => self.bc_left,
            BoundaryTag::Right => self.bc_right,
        }
    }
}

/// Island coalescence on [-1,1]^2: two magnetic islands in a Harris sheet,
/// periodic in x, mirror walls and perfect conductors at top and bottom.
/// The equilibrium forcing g = curl(J0) balances the unperturbed sheet; a
/// perturbation of magnitude `sigma` sets the islands in motion.
pub fn island_problem(
    epsilon: f64,
    sigma: f64,
    s_lundquist: f64,
) -> Result<ProblemSpec, DriverError> {
    let params = MhdParams::from_lundquist(s_lundquist)?;
    let kappa = params.kappa;
    let rm = params.rm;
    let eps = epsilon;
    let b0 = move |x: f64, y: f64| -> [f64; 2] {
        let lam = (2.0 * PI * y).cosh() + eps * (2.0 * PI * x).cos();
        let base = [
            (2.0 * PI * y).sinh() / lam,
            eps * (2.0 * PI * x).sin() / lam,
        ];
        let pert = [
            sigma * 0.5 * PI * (PI * x).cos() * (0.5 * PI * y).sin(),
            -sigma * PI * (PI * x).sin() * (0.5 * PI * y).cos(),
        ];
        [base[0] + pert[0], base[1] + pert[1]]
    };
    // g = curl(J0) with J0 = -2 pi kappa (1 - eps^2) / (Rm Lambda^2).
    let c0 = 2.0 * PI * kappa * (1.0 - eps * eps) / rm;
    let g = move |x: f64, y: f64| -> [f64; 2] {
        let lam = (2.0 * PI * y).cosh() + eps * (2.0 * PI * x).cos();
        let lam3 = lam * lam * lam;
        [
            4.0 * PI * c0 * (2.0 * PI * y).sinh() / lam3,
            4.0 * PI * eps * c0 * (2.0 * PI * x).sin() / lam3,
        ]
    };
    Ok(ProblemSpec {
        name: format!("island(S={s_lundquist:.0e}, sigma={sigma:.1e})"),
        domain: (-1.0, 1.0, -1.0, 1.0),
        periodic_x: true,
        periodic_y: false,
        bc_bottom: BoundaryCondition::MirrorConductor,
        bc_top: BoundaryCondition::MirrorConductor,
        bc_left: BoundaryCondition::MirrorConductor,
        bc_right: BoundaryCondition::MirrorConductor,
        params,
        u0: Box::new(|_, _| [0.0, 0.0]),
        b0: Box::new(b0),
        forcing_f: Box::new(|_, _| [0.0, 0.0]),
        forcing_g: Box::new(g),
        bc_u: Box::new(|_, _| [0.0, 0.0]),
        bc_b: Box::new(|_, _| [0.0, 0.0]),
        bc_r: Box::new(|_, _| 0.0),
        exact: None,
        lin_tol: LinearTolMode::Relative(1e-6),
    })
}

/// Initial current of the island equilibrium (diagnostic).
pub fn island_current0(epsilon: f64, rm: f64, kappa: f64, x: f64, y: f64) -> f64 {
    let lam = (2.0 * PI * y).cosh() + epsilon * (2.0 * PI * x).cos();
    -2.0 * PI * kappa * (1.0 - epsilon * epsilon) / (rm * lam * lam)
}

/// Hydromagnetic Kelvin-Helmholtz on [0,4] x [-2,2]: counterflowing fluids
/// across a Harris-sheet field, periodic in x, mirror walls with the sheet's
/// tangential field held at top and bottom. The linear solver runs at a
/// strict absolute tolerance.
pub fn hmkh_problem() -> Result<ProblemSpec, DriverError> {
    let params = MhdParams::new(1e4, 1e4, 1.0)?;
    let b0_mag = 0.3333;
    let delta = 0.1;
    let harris = move |_x: f64, y: f64| -> [f64; 2] { [b0_mag * (y / delta).tanh(), 0.0] };
    Ok(ProblemSpec {
        name: "hmkh".into(),
        domain: (0.0, 4.0, -2.0, 2.0),
        periodic_x: true,
        periodic_y: false,
        bc_bottom: BoundaryCondition::MirrorFixedBt,
        bc_top: BoundaryCondition::MirrorFixedBt,
        bc_left: BoundaryCondition::MirrorFixedBt,
        bc_right: BoundaryCondition::MirrorFixedBt,
        params,
        u0: Box::new(|_, y| if y >= 0.0 { [1.0, 0.0] } else { [-1.0, 0.0] }),
        b0: Box::new(harris),
        forcing_f: Box::new(|_, _| [0.0, 0.0]),
        forcing_g: Box::new(|_, _| [0.0, 0.0]),
        bc_u: Box::new(|_, _| [0.0, 0.0]),
        bc_b: Box::new(harris),
        bc_r: Box::new(|_, _| 0.0),
        exact: None,
        lin_tol: LinearTolMode::Absolute(1e-9),
    })
}

/// Hydromagnetic lid-driven cavity on [-0.5,0.5]^2: no-slip walls with the
/// top lid moving at (1,0), tangential magnetic data from b = (-1,0) on all
/// walls. The lid value wins at the two top corners.
pub fn cavity_problem() -> Result<ProblemSpec, DriverError> {
    let params = MhdParams::new(1000.0, 1000.0, 1.0)?;
    Ok(ProblemSpec {
        name: "cavity".into(),
        domain: (-0.5, 0.5, -0.5, 0.5),
        periodic_x: false,
        periodic_y: false,
        bc_bottom: BoundaryCondition::Dirichlet,
        bc_top: BoundaryCondition::Dirichlet,
        bc_left: BoundaryCondition::Dirichlet,
        bc_right: BoundaryCondition::Dirichlet,
        params,
        u0: Box::new(|_, _| [0.0, 0.0]),
        b0: Box::new(|_, _| [0.0, 0.0]),
        forcing_f: Box::new(|_, _| [0.0, 0.0]),
        forcing_g: Box::new(|_, _| [0.0, 0.0]),
        bc_u: Box::new(|_, y| {
            if y >= 0.5 - 1e-12 {
                [1.0, 0.0]
            } else {
                [0.0, 0.0]
            }
        }),
        bc_b: Box::new(|_, _| [-1.0, 0.0]),
        bc_r: Box::new(|_, _| 0.0),
        exact: None,
        lin_tol: LinearTolMode::Relative(1e-6),
    })
}

/// Smooth manufactured fields with hand-coded derivatives, used to build
/// forcings from the strong nonlinear system.
pub struct MmsFields {
    pub u: VecField,
    pub grad_u: Box<dyn Fn(f64, f64) -> [f64; 4] + Sync + Send>,
    pub lap_u: VecField,
    pub b: VecField,
    pub curl_b: ScalarField,
    pub grad_curl_b: VecField,
    pub curl_u_cross_b: VecField,
    pub conv_u: VecField,
    pub q: ScalarField,
    pub grad_q: VecField,
}

/// The standard steady trigonometric manufactured solution on [0,1]^2:
/// divergence-free stream-function velocity and magnetic fields with a
/// zero-mean pressure and r = 0.
pub fn mms_trig_exact() -> MmsFields {
    let u = |x: f64, y: f64| -> [f64; 2] {
        [(PI * x).sin() * (PI * y).cos(), -(PI * x).cos() * (PI * y).sin()]
    };
    let grad_u = |x: f64, y: f64| -> [f64; 4] {
        let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
        let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
        [PI * cx * cy, -PI * sx * sy, PI * sx * sy, -PI * cx * cy]
    };
    let lap_u = |x: f64, y: f64| -> [f64; 2] {
        let uv = u(x, y);
        [-2.0 * PI * PI * uv[0], -2.0 * PI * PI * uv[1]]
    };
    let b = |x: f64, y: f64| -> [f64; 2] {
        [-(PI * x).cos() * (PI * y).sin(), (PI * x).sin() * (PI * y).cos()]
    };
    let curl_b =
        |x: f64, y: f64| -> f64 { 2.0 * PI * (PI * x).cos() * (PI * y).cos() };
    let grad_curl_b = |x: f64, y: f64| -> [f64; 2] {
        let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
        let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
        [-2.0 * PI * PI * sx * cy, -2.0 * PI * PI * cx * sy]
    };
    // curl(u x b) with u x b = sin^2(pi x)cos^2(pi y) - cos^2(pi x)sin^2(pi y)
    let curl_u_cross_b = |x: f64, y: f64| -> [f64; 2] {
        [-PI * (2.0 * PI * y).sin(), -PI * (2.0 * PI * x).sin()]
    };
    let conv_u = |x: f64, y: f64| -> [f64; 2] {
        [0.5 * PI * (2.0 * PI * x).sin(), 0.5 * PI * (2.0 * PI * y).sin()]
    };
    let q = |x: f64, y: f64| -> f64 { (PI * x).sin() * (PI * y).cos() };
    let grad_q = |x: f64, y: f64| -> [f64; 2] {
        [
            PI * (PI * x).cos() * (PI * y).cos(),
            -PI * (PI * x).sin() * (PI * y).sin(),
        ]
    };
    MmsFields {
        u: Box::new(u),
        grad_u: Box::new(grad_u),
        lap_u: Box::new(lap_u),
        b: Box::new(b),
        curl_b: Box::new(curl_b),
        grad_curl_b: Box::new(grad_curl_b),
        curl_u_cross_b: Box::new(curl_u_cross_b),
        conv_u: Box::new(conv_u),
        q: Box::new(q),
        grad_q: Box::new(grad_q),
    }
}

/// Builds the steady manufactured-solution problem: forcings are the strong
/// residuals of the nonlinear system, Dirichlet data come from the exact
/// traces, and the exact solution rides along for error measurement.
/// Fields failing the solenoidal check (via their supplied gradients, on a
/// sample grid) are rejected.
pub fn mms_problem(params: MhdParams, fields: MmsFields) -> Result<ProblemSpec, DriverError> {
    // Reject non-solenoidal manufactured fields.
    let mut worst_div_u = 0.0f64;
    for i in 0..7 {
        for j in 0..7 {
            let x = (i as f64 + 0.41) / 7.0;
            let y = (j as f64 + 0.59) / 7.0;
            let g = (fields.grad_u)(x, y);
            worst_div_u = worst_div_u.max((g[0] + g[3]).abs());
        }
    }
    if worst_div_u > 1e-10 {
        return Err(DriverError::Problem(format!(
            "manufactured velocity is not divergence-free (max div {worst_div_u:.3e})"
        )));
    }

    let MmsFields {
        u,
        grad_u,
        lap_u,
        b,
        curl_b,
        grad_curl_b,
        curl_u_cross_b,
        conv_u,
        q,
        grad_q,
    } = fields;

    let (re, rm, kappa) = (params.re, params.rm, params.kappa);
    let u_f: std::sync::Arc<dyn Fn(f64, f64) -> [f64; 2] + Sync + Send> = u.into();
    let b_f: std::sync::Arc<dyn Fn(f64, f64) -> [f64; 2] + Sync + Send> = b.into();
    let curl_b_f: std::sync::Arc<dyn Fn(f64, f64) -> f64 + Sync + Send> = curl_b.into();

    let b_for_f = b_f.clone();
    let curl_for_f = curl_b_f.clone();
    let forcing_f = move |x: f64, y: f64| -> [f64; 2] {
        let conv = conv_u(x, y);
        let gq = grad_q(x, y);
        let lap = lap_u(x, y);
        let bv = b_for_f(x, y);
        let c = curl_for_f(x, y);
        // kappa (curl b) x b = kappa c (-b2, b1)
        [
            conv[0] + gq[0] - lap[0] / re + kappa * c * bv[1],
            conv[1] + gq[1] - lap[1] / re - kappa * c * bv[0],
        ]
    };
    let forcing_g = move |x: f64, y: f64| -> [f64; 2] {
        let gc = grad_curl_b(x, y);
        let cu = curl_u_cross_b(x, y);
        // (kappa/Rm) curl(curl b) - kappa curl(u x b); r = 0 contributes nothing.
        [
            kappa / rm * gc[0] - kappa * cu[0],
            kappa / rm * gc[1] - kappa * cu[1],
        ]
    };

    let u_bc = u_f.clone();
    let b_bc = b_f.clone();
    let u_exact = u_f.clone();
    let b_exact = b_f.clone();
    let curl_exact = curl_b_f.clone();
    let u_ic = u_f.clone();
    let b_ic = b_f.clone();
    Ok(ProblemSpec {
        name: "mms".into(),
        domain: (0.0, 1.0, 0.0, 1.0),
        periodic_x: false,
        periodic_y: false,
        bc_bottom: BoundaryCondition::Dirichlet,
        bc_top: BoundaryCondition::Dirichlet,
        bc_left: BoundaryCondition::Dirichlet,
        bc_right: BoundaryCondition::Dirichlet,
        params,
        u0: Box::new(move |x, y| u_ic(x, y)),
        b0: Box::new(move |x, y| b_ic(x, y)),
        forcing_f: Box::new(forcing_f),
        forcing_g: Box::new(forcing_g),
        bc_u: Box::new(move |x, y| u_bc(x, y)),
        bc_b: Box::new(move |x, y| b_bc(x, y)),
        bc_r: Box::new(|_, _| 0.0),
        exact: Some(ExactSolution {
            u: Box::new(move |x, y| u_exact(x, y)),
            grad_u,
            b: Box::new(move |x, y| b_exact(x, y)),
            curl_b: Box::new(move |x, y| curl_exact(x, y)),
            q,
            r: Box::new(|_, _| 0.0),
        }),
        lin_tol: LinearTolMode::Relative(1e-6),
    })
}
