//! Smoothers for the multigrid cycle. The MHD trace block needs strong
//! smoothers (ILU(0) Richardson or inner GMRES preconditioned by ILU(0));
//! Jacobi, Gauss-Seidel and Chebyshev are provided for comparison and for
//! simpler operators.

use super::AmgError;
use crate::krylov::{self, IdentityPreconditioner, KrylovConfig, Preconditioner};
use crate::linalg::norm2;
use crate::sparse::{ilu0_factor, Ilu0Factors, SparseMatrixCsr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    Jacobi,
    GaussSeidel,
    Chebyshev,
    Ilu0,
    GmresIlu0,
}

impl SmootherKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "jacobi" => Some(Self::Jacobi),
            "gauss-seidel" => Some(Self::GaussSeidel),
            "chebyshev" => Some(Self::Chebyshev),
            "ilu0" => Some(Self::Ilu0),
            "gmres-ilu0" => Some(Self::GmresIlu0),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Jacobi => "jacobi",
            Self::GaussSeidel => "gauss-seidel",
            Self::Chebyshev => "chebyshev",
            Self::Ilu0 => "ilu0",
            Self::GmresIlu0 => "gmres-ilu0",
        }
    }

    /// True when one application is a fixed linear map of the residual.
    /// Inner-GMRES smoothing is nonlinear, which forces FGMRES outside.
    pub fn is_linear(&self) -> bool {
        !matches!(self, Self::GmresIlu0)
    }
}

/// Smoother selection. `steps` counts sweeps (Jacobi/Gauss-Seidel), the
/// polynomial degree (Chebyshev), Richardson iterations (ILU(0)), or the
/// inner iteration count (GMRES-ILU(0)).
#[derive(Debug, Clone, Copy)]
pub struct SmootherConfig {
    pub kind: SmootherKind,
    pub steps: usize,
}

impl SmootherConfig {
    pub fn new(kind: SmootherKind, steps: usize) -> Self {
        assert!(steps >= 1, "smoother needs at least one step");
        Self { kind, steps }
    }
}

/// Jacobi damping factor.
pub const JACOBI_DAMPING: f64 = 2.0 / 3.0;
/// Chebyshev interval is [lambda_max / CHEB_INTERVAL_RATIO, lambda_max].
pub const CHEB_INTERVAL_RATIO: f64 = 30.0;
/// Power-iteration count for the Chebyshev spectral estimate.
pub const CHEB_POWER_ITERS: usize = 10;

/// A smoother bound to one level's operator, with any factorization done
/// once at setup.
pub enum LevelSmoother {
    Jacobi { inv_diag: Vec<f64> },
    GaussSeidel,
    Chebyshev { lambda_max: f64 },
    Ilu0(Ilu0Factors),
    GmresIlu0(Ilu0Factors),
}

impl LevelSmoother {
    pub fn build(cfg: &SmootherConfig, a: &SparseMatrixCsr) -> Result<Self, AmgError> {
        match cfg.kind {
            SmootherKind::Jacobi => {
                let d = a.diagonal();
                if d.iter().any(|&x| x == 0.0) {
                    return Err(AmgError::Smoother("zero diagonal entry for Jacobi".into()));
                }
                Ok(Self::Jacobi {
                    inv_diag: d.iter().map(|&x| 1.0 / x).collect(),
                })
            }
            SmootherKind::GaussSeidel => {
                if a.diagonal().iter().any(|&x| x == 0.0) {
                    return Err(AmgError::Smoother(
                        "zero diagonal entry for Gauss-Seidel".into(),
                    ));
                }
                Ok(Self::GaussSeidel)
            }
            SmootherKind::Chebyshev => Ok(Self::Chebyshev {
                lambda_max: estimate_lambda_max(a, CHEB_POWER_ITERS),
            }),
            SmootherKind::Ilu0 => Ok(Self::Ilu0(
                ilu0_factor(a).map_err(|e| AmgError::Smoother(e.to_string()))?,
            )),
            SmootherKind::GmresIlu0 => Ok(Self::GmresIlu0(
                ilu0_factor(a).map_err(|e| AmgError::Smoother(e.to_string()))?,
            )),
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, Self::GmresIlu0(_))
    }

    /// Runs `steps` smoothing steps on A x = b starting from `x`.
    pub fn apply(&self, a: &SparseMatrixCsr, x: &mut [f64], b: &[f64], steps: usize) {
        let n = a.nrows();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(b.len(), n);
        match self {
            Self::Jacobi { inv_diag } => {
                let mut r = vec![0.0; n];
                for _ in 0..steps {
                    a.spmv_into(x, &mut r);
                    for i in 0..n {
                        x[i] += JACOBI_DAMPING * inv_diag[i] * (b[i] - r[i]);
                    }
                }
            }
            Self::GaussSeidel => {
                for _ in 0..steps {
                    for i in 0..n {
                        let mut acc = b[i];
                        let mut diag = 0.0;
                        for (&j, &v) in a.row_cols(i).iter().zip(a.row_values(i)) {
                            if j == i {
                                diag = v;
                            } else {
                                acc -= v * x[j];
                            }
                        }
                        x[i] = acc / diag;
                    }
                }
            }
            Self::Chebyshev { lambda_max } => {
                chebyshev_steps(a, x, b, *lambda_max, steps);
            }
            Self::Ilu0(fac) => {
                let mut r = vec![0.0; n];
                for _ in 0..steps {
                    a.spmv_into(x, &mut r);
                    for i in 0..n {
                        r[i] = b[i] - r[i];
                    }
                    fac.solve_in_place(&mut r);
                    for i in 0..n {
                        x[i] += r[i];
                    }
                }
            }
            Self::GmresIlu0(fac) => {
                struct P<'a>(&'a Ilu0Factors);
                impl Preconditioner for P<'_> {
                    fn apply(&self, r: &[f64], z: &mut [f64]) {
                        z.copy_from_slice(r);
                        self.0.solve_in_place(z);
                    }
                }
                let cfg = KrylovConfig {
                    tol: 0.0,
                    relative: false,
                    max_iter: steps,
                };
                if let Ok((sol, _)) = krylov::gmres(a, &P(fac), b, Some(x), &cfg) {
                    x.copy_from_slice(&sol);
                }
            }
        }
    }
}

/// Chebyshev iteration of the given degree on the interval
/// [lambda_max/CHEB_INTERVAL_RATIO, lambda_max].
fn chebyshev_steps(a: &SparseMatrixCsr, x: &mut [f64], b: &[f64], lambda_max: f64, degree: usize) {
    let n = a.nrows();
    let hi = lambda_max.max(f64::MIN_POSITIVE);
    let lo = hi / CHEB_INTERVAL_RATIO;
    let theta = 0.5 * (hi + lo);
    let delta = 0.5 * (hi - lo);
    let mut r = vec![0.0; n];
    a.spmv_into(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut p = vec![0.0; n];
    let mut alpha = 1.0 / theta;
    let mut beta;
    for k in 0..degree {
        if k == 0 {
            p.copy_from_slice(&r);
            for v in p.iter_mut() {
                *v *= alpha;
            }
        } else {
            beta = (delta * alpha / 2.0).powi(2);
            alpha = 1.0 / (theta - beta / alpha);
            for i in 0..n {
                p[i] = alpha * (r[i] + beta / alpha * p[i]);
            }
        }
        for i in 0..n {
            x[i] += p[i];
        }
        a.spmv_into(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
    }
}

/// Largest-eigenvalue estimate by a fixed number of power iterations on A,
/// seeded deterministically.
pub fn estimate_lambda_max(a: &SparseMatrixCsr, iters: usize) -> f64 {
    let n = a.nrows();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i * 2654435761_usize) % 1024) as f64 / 1024.0)
        .collect();
    let mut w = vec![0.0; n];
    let mut lambda = 1.0;
    for _ in 0..iters {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        a.spmv_into(&v, &mut w);
        lambda = norm2(&w);
        std::mem::swap(&mut v, &mut w);
    }
    lambda.max(f64::MIN_POSITIVE)
}

/// One-shot smoothing entry point: builds the kind-specific smoother for `a`
/// and runs `cfg.steps` steps starting from `x0`.
pub fn smooth(
    cfg: &SmootherConfig,
    a: &SparseMatrixCsr,
    x0: &[f64],
    b: &[f64],
) -> Result<Vec<f64>, AmgError> {
    if x0.len() != a.nrows() || b.len() != a.nrows() {
        return Err(AmgError::DimensionMismatch(format!(
            "smooth: x0 {} / b {} vs n {}",
            x0.len(),
            b.len(),
            a.nrows()
        )));
    }
    let s = LevelSmoother::build(cfg, a)?;
    let mut x = x0.to_vec();
    s.apply(a, &mut x, b, cfg.steps);
    Ok(x)
}
