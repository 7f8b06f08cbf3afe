//! Nondimensional parameters of the MHD system and the velocity-trace
//! stabilization tensor.

use super::HdgError;

/// Reynolds number, magnetic Reynolds number, coupling parameter, and the
/// scheme constants xi = 1/2, beta_n = beta_t = 1. With the Alfven speed as
/// the characteristic velocity (kappa = 1) the magnetic Reynolds number is
/// the Lundquist number.
#[derive(Debug, Clone, Copy)]
pub struct MhdParams {
    pub re: f64,
    pub rm: f64,
    pub kappa: f64,
    pub xi: f64,
    pub beta_n: f64,
    pub beta_t: f64,
}

impl MhdParams {
    pub fn new(re: f64, rm: f64, kappa: f64) -> Result<Self, HdgError> {
        if !(re > 0.0 && rm > 0.0 && kappa > 0.0) {
            return Err(HdgError::InvalidParams(format!(
                "Re={re}, Rm={rm}, kappa={kappa} must all be positive"
            )));
        }
        Ok(Self {
            re,
            rm,
            kappa,
            xi: 0.5,
            beta_n: 1.0,
            beta_t: 1.0,
        })
    }

    /// Re = Rm = S with kappa = 1 (Alfvenic scaling).
    pub fn from_lundquist(s: f64) -> Result<Self, HdgError> {
        Self::new(s, s, 1.0)
    }

    /// Hartmann number sqrt(kappa * Re * Rm).
    pub fn hartmann(&self) -> f64 {
        (self.kappa * self.re * self.rm).sqrt()
    }
}

/// Stabilization pair (tau_t, tau_n) of the velocity trace:
/// tau_t = sqrt(4 + (w.n)^2) / 2, tau_n = sqrt(8 + (w.n)^2) / 2. The tensor
/// S_u = tau_t (I - n nT) + tau_n n nT is assembled pointwise from these.
pub fn stabilization(w_dot_n: f64) -> (f64, f64) {
    let w2 = w_dot_n * w_dot_n;
    (0.5 * (4.0 + w2).sqrt(), 0.5 * (8.0 + w2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stabilization_closed_forms() {
        let (tt, tn) = stabilization(0.0);
        assert!((tt - 1.0).abs() < 1e-15);
        assert!((tn - std::f64::consts::SQRT_2).abs() < 1e-15);
        let (tt, tn) = stabilization(3.0);
        assert!((tt - 0.5 * 13.0_f64.sqrt()).abs() < 1e-15);
        assert!((tn - 0.5 * 17.0_f64.sqrt()).abs() < 1e-15);
        assert!((tt - 1.802776).abs() < 1e-6);
        assert!((tn - 2.061553).abs() < 1e-6);
    }

    #[test]
    fn stabilization_tensor_eigenstructure() {
        // S_u n = tau_n n and S_u t = tau_t t for unit n, t.
        let n = [3.0 / 5.0, 4.0 / 5.0];
        let t = [-n[1], n[0]];
        let (tt, tn) = stabilization(1.7);
        let s = |z: [f64; 2]| {
            let zn = z[0] * n[0] + z[1] * n[1];
            [
                tt * z[0] + (tn - tt) * n[0] * zn,
                tt * z[1] + (tn - tt) * n[1] * zn,
            ]
        };
        let sn = s(n);
        let st = s(t);
        assert!((sn[0] - tn * n[0]).abs() < 1e-15);
        assert!((sn[1] - tn * n[1]).abs() < 1e-15);
        assert!((st[0] - tt * t[0]).abs() < 1e-15);
        assert!((st[1] - tt * t[1]).abs() < 1e-15);
    }

    #[test]
    fn hartmann_consistency() {
        let p = MhdParams::new(1000.0, 1000.0, 1.0).unwrap();
        assert!((p.hartmann() - 1000.0).abs() < 1e-9);
        let p = MhdParams::new(250.0, 40.0, 0.9).unwrap();
        let ha = p.hartmann();
        assert!((ha * ha - p.kappa * p.re * p.rm).abs() < 1e-12 * ha * ha);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(MhdParams::new(0.0, 1.0, 1.0).is_err());
        assert!(MhdParams::new(1.0, -1.0, 1.0).is_err());
    }
}
