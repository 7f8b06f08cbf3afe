//! Right-preconditioned Arnoldi iteration with Givens rotations, in a
//! non-restarted GMRES variant and the flexible variant that stores the
//! preconditioned basis.

use super::{IterationHistory, KrylovError, LinearOperator, Preconditioner};
use crate::linalg::{axpy, dot, norm2};

/// Stopping controls. With `relative` set, the target is
/// `tol * ||b||`; otherwise `tol` is an absolute residual bound.
#[derive(Debug, Clone, Copy)]
pub struct KrylovConfig {
    pub tol: f64,
    pub relative: bool,
    pub max_iter: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            relative: true,
            max_iter: 200,
        }
    }
}

/// Non-restarted right-preconditioned GMRES. The preconditioner must be a
/// fixed linear map; variable preconditioners are rejected.
pub fn gmres<A: LinearOperator + ?Sized, M: Preconditioner + ?Sized>(
    a: &A,
    m: &M,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, IterationHistory), KrylovError> {
    if m.is_variable() {
        return Err(KrylovError::VariablePreconditioner);
    }
    arnoldi(a, m, b, x0, cfg, false)
}

/// Flexible GMRES: stores the preconditioned directions so the
/// preconditioner may change between applications.
pub fn fgmres<A: LinearOperator + ?Sized, M: Preconditioner + ?Sized>(
    a: &A,
    m: &M,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, IterationHistory), KrylovError> {
    arnoldi(a, m, b, x0, cfg, true)
}

fn arnoldi<A: LinearOperator + ?Sized, M: Preconditioner + ?Sized>(
    a: &A,
    m: &M,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
    flexible: bool,
) -> Result<(Vec<f64>, IterationHistory), KrylovError> {
    let n = a.dim();
    if b.len() != n {
        return Err(KrylovError::DimensionMismatch(format!(
            "rhs length {} vs operator dimension {n}",
            b.len()
        )));
    }
    if let Some(x) = x0 {
        if x.len() != n {
            return Err(KrylovError::DimensionMismatch(format!(
                "initial guess length {} vs operator dimension {n}",
                x.len()
            )));
        }
    }
    let bnorm = norm2(b);
    let scale = if cfg.relative { bnorm } else { 1.0 };
    if bnorm == 0.0 && x0.is_none() {
        // Zero right-hand side: the solution is zero.
        return Ok((
            vec![0.0; n],
            IterationHistory {
                relres: vec![0.0],
                converged: true,
                iterations: 0,
            },
        ));
    }

    let mut r0 = vec![0.0; n];
    match x0 {
        Some(x) => {
            a.apply(x, &mut r0);
            for (ri, bi) in r0.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        }
        None => r0.copy_from_slice(b),
    }
    let beta = norm2(&r0);
    let target = cfg.tol * scale;
    let mut history = IterationHistory {
        relres: vec![if scale > 0.0 { beta / scale } else { beta }],
        converged: false,
        iterations: 0,
    };
    if beta <= target {
        history.converged = true;
        let x = x0.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0; n]);
        return Ok((x, history));
    }

    let max_iter = cfg.max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter + 1);
    let mut zdirs: Vec<Vec<f64>> = Vec::new();
    let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut cs: Vec<f64> = Vec::with_capacity(max_iter);
    let mut sn: Vec<f64> = Vec::with_capacity(max_iter);
    let mut g = vec![0.0; max_iter + 1];
    g[0] = beta;

    {
        let mut v0 = r0;
        let inv = 1.0 / beta;
        for v in v0.iter_mut() {
            *v *= inv;
        }
        basis.push(v0);
    }

    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut breakdown = false;
    let mut k = 0;
    while k < max_iter {
        m.apply(&basis[k], &mut z);
        if flexible {
            zdirs.push(z.clone());
        }
        a.apply(&z, &mut w);
        let wnorm_in = norm2(&w);

        let mut hcol = vec![0.0; k + 2];
        for (j, vj) in basis.iter().enumerate() {
            let hjk = dot(vj, &w);
            hcol[j] = hjk;
            axpy(-hjk, vj, &mut w);
        }
        let mut wnorm = norm2(&w);
        // One re-orthogonalization pass when cancellation has destroyed the
        // new direction relative to its pre-orthogonalization size.
        if wnorm < 1e-8 * wnorm_in {
            for (j, vj) in basis.iter().enumerate() {
                let c = dot(vj, &w);
                hcol[j] += c;
                axpy(-c, vj, &mut w);
            }
            wnorm = norm2(&w);
        }
        if !wnorm.is_finite() || hcol.iter().any(|h| !h.is_finite()) {
            return Err(KrylovError::NonFinite(k));
        }
        hcol[k + 1] = wnorm;

        if wnorm <= 1e-14 * wnorm_in.max(f64::MIN_POSITIVE) {
            // Happy breakdown: the Krylov space is invariant and the
            // projected solve is exact.
            breakdown = true;
        } else {
            let inv = 1.0 / wnorm;
            let mut vk1 = w.clone();
            for v in vk1.iter_mut() {
                *v *= inv;
            }
            basis.push(vk1);
        }

        for j in 0..k {
            let t = cs[j] * hcol[j] + sn[j] * hcol[j + 1];
            hcol[j + 1] = -sn[j] * hcol[j] + cs[j] * hcol[j + 1];
            hcol[j] = t;
        }
        let (c, s) = givens(hcol[k], hcol[k + 1]);
        cs.push(c);
        sn.push(s);
        hcol[k] = c * hcol[k] + s * hcol[k + 1];
        hcol[k + 1] = 0.0;
        g[k + 1] = -s * g[k];
        g[k] *= c;
        hcols.push(hcol);

        let est = g[k + 1].abs() / if scale > 0.0 { scale } else { 1.0 };
        history.relres.push(est);
        k += 1;
        history.iterations = k;
        if g[k].abs() <= target || breakdown {
            history.converged = true;
            break;
        }
    }

    // Back substitution on the rotated Hessenberg system.
    let kk = history.iterations;
    let mut y = vec![0.0; kk];
    for i in (0..kk).rev() {
        let mut acc = g[i];
        for j in (i + 1)..kk {
            acc -= hcols[j][i] * y[j];
        }
        let d = hcols[i][i];
        y[i] = if d != 0.0 { acc / d } else { 0.0 };
    }

    let mut x = x0.map(|x| x.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if flexible {
        for (zi, yi) in zdirs.iter().zip(&y) {
            axpy(*yi, zi, &mut x);
        }
    } else {
        let mut u = vec![0.0; n];
        for (vi, yi) in basis.iter().zip(&y) {
            axpy(*yi, vi, &mut u);
        }
        m.apply(&u, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
    Ok((x, history))
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a == 0.0 {
        (0.0, 1.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::IdentityPreconditioner;
    use crate::linalg::sub;
    use crate::sparse::SparseMatrixCsr;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn diag_csr(d: &[f64]) -> SparseMatrixCsr {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        SparseMatrixCsr::from_triplets(d.len(), d.len(), &t).unwrap()
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize) -> SparseMatrixCsr {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.gen::<f64>()));
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j != i {
                    t.push((i, j, 0.5 * (rng.gen::<f64>() - 0.5)));
                }
            }
        }
        SparseMatrixCsr::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_one_iteration() {
        let a = SparseMatrixCsr::identity(5);
        let b = vec![1.0, -2.0, 0.5, 3.0, 4.0];
        let (x, h) = gmres(&a, &IdentityPreconditioner, &b, None, &KrylovConfig::default())
            .unwrap();
        assert!(h.converged);
        assert_eq!(h.iterations, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn three_distinct_eigenvalues_three_iterations() {
        let a = diag_csr(&[1.0, 2.0, 3.0]);
        let cfg = KrylovConfig {
            tol: 1e-12,
            relative: true,
            max_iter: 10,
        };
        let (x, h) = gmres(&a, &IdentityPreconditioner, &[1.0, 1.0, 1.0], None, &cfg).unwrap();
        assert!(h.converged);
        assert!(h.iterations <= 3);
        let expect = [1.0, 0.5, 1.0 / 3.0];
        for (xi, ei) in x.iter().zip(&expect) {
            assert!((xi - ei).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_immediate() {
        let a = diag_csr(&[1.0, 2.0]);
        let (x, h) =
            gmres(&a, &IdentityPreconditioner, &[0.0, 0.0], None, &KrylovConfig::default())
                .unwrap();
        assert!(h.converged);
        assert_eq!(h.iterations, 0);
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn fgmres_matches_gmres_with_fixed_preconditioner() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 30;
        let a = random_system(&mut rng, n);
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        struct DiagPrec(Vec<f64>);
        impl Preconditioner for DiagPrec {
            fn apply(&self, r: &[f64], z: &mut [f64]) {
                for i in 0..r.len() {
                    z[i] = r[i] / self.0[i];
                }
            }
        }
        let m = DiagPrec(a.diagonal());
        let cfg = KrylovConfig {
            tol: 1e-12,
            relative: true,
            max_iter: 60,
        };
        let (x1, h1) = gmres(&a, &m, &b, None, &cfg).unwrap();
        let (x2, h2) = fgmres(&a, &m, &b, None, &cfg).unwrap();
        assert_eq!(h1.iterations, h2.iterations);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn variable_preconditioner_rejected_by_gmres() {
        struct Inner;
        impl Preconditioner for Inner {
            fn apply(&self, r: &[f64], z: &mut [f64]) {
                z.copy_from_slice(r);
            }
            fn is_variable(&self) -> bool {
                true
            }
        }
        let a = SparseMatrixCsr::identity(2);
        assert!(matches!(
            gmres(&a, &Inner, &[1.0, 1.0], None, &KrylovConfig::default()),
            Err(KrylovError::VariablePreconditioner)
        ));
        assert!(fgmres(&a, &Inner, &[1.0, 1.0], None, &KrylovConfig::default()).is_ok());
    }

    #[test]
    fn inner_gmres_preconditioner_on_laplacian() {
        // M = 3 GMRES iterations on A itself: variable, needs FGMRES, and
        // should not be slower than no preconditioning at all.
        let n = 64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = SparseMatrixCsr::from_triplets(n, n, &t).unwrap();
        struct InnerGmres<'a>(&'a SparseMatrixCsr);
        impl Preconditioner for InnerGmres<'_> {
            fn apply(&self, r: &[f64], z: &mut [f64]) {
                let cfg = KrylovConfig {
                    tol: 0.0,
                    relative: false,
                    max_iter: 3,
                };
                let (x, _) = gmres(self.0, &IdentityPreconditioner, r, None, &cfg).unwrap();
                z.copy_from_slice(&x);
            }
            fn is_variable(&self) -> bool {
                true
            }
        }
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64) - 6.0).collect();
        let cfg = KrylovConfig {
            tol: 1e-10,
            relative: true,
            max_iter: 200,
        };
        let (x, h) = fgmres(&a, &InnerGmres(&a), &b, None, &cfg).unwrap();
        assert!(h.converged);
        let (_, h0) = gmres(&a, &IdentityPreconditioner, &b, None, &cfg).unwrap();
        assert!(h.iterations <= h0.iterations);
        let r = sub(&a.spmv(&x).unwrap(), &b);
        assert!(norm2(&r) <= 1e-9 * norm2(&b));
    }

    #[test]
    fn finite_termination_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [5usize, 12, 30] {
            let a = random_system(&mut rng, n);
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let cfg = KrylovConfig {
                tol: 1e-12,
                relative: true,
                max_iter: n,
            };
            let (_, h) = gmres(&a, &IdentityPreconditioner, &b, None, &cfg).unwrap();
            assert!(h.converged, "n={n} failed to converge within n iterations");
            for w in h.relres.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "residual not monotone");
            }
        }
    }

    #[test]
    fn estimated_residual_matches_true_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 40;
        let a = random_system(&mut rng, n);
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let cfg = KrylovConfig {
            tol: 1e-6,
            relative: true,
            max_iter: 100,
        };
        let (x, h) = gmres(&a, &IdentityPreconditioner, &b, None, &cfg).unwrap();
        assert!(h.converged);
        let true_res = norm2(&sub(&a.spmv(&x).unwrap(), &b)) / norm2(&b);
        let est = *h.relres.last().unwrap();
        assert!(
            (true_res - est).abs() <= 1e-8,
            "estimate {est} vs true {true_res}"
        );
    }

    #[test]
    fn nan_operator_reports_error() {
        struct BadOp;
        impl LinearOperator for BadOp {
            fn dim(&self) -> usize {
                2
            }
            fn apply(&self, _x: &[f64], y: &mut [f64]) {
                y[0] = f64::NAN;
                y[1] = 0.0;
            }
        }
        assert!(matches!(
            gmres(&BadOp, &IdentityPreconditioner, &[1.0, 1.0], None, &KrylovConfig::default()),
            Err(KrylovError::NonFinite(_))
        ));
    }

    #[test]
    fn initial_guess_is_used() {
        let a = diag_csr(&[2.0, 5.0]);
        let b = vec![2.0, 5.0];
        let x0 = vec![1.0, 1.0];
        let (x, h) = gmres(
            &a,
            &IdentityPreconditioner,
            &b,
            Some(&x0),
            &KrylovConfig::default(),
        )
        .unwrap();
        assert!(h.converged);
        assert_eq!(h.iterations, 0);
        assert_eq!(x, x0);
    }
}
