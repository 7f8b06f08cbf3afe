//! Picard fixed-point iteration for one (pseudo-)time step: freeze the
//! convecting velocity and magnetic field at the previous iterate, assemble
//! and solve the condensed trace system with the selected preconditioner,
//! reconstruct, and test the scaled update norm.

use super::problems::ProblemSpec;
use super::DriverError;
use crate::amg::{build_hierarchy, AmgConfig, SmootherConfig, SmootherKind};
use crate::hdg::{
    apply_boundary_conditions, assemble_trace_system, BasisP, BoundaryData, QuadMesh, TraceState,
    TraceSystem, VolumeState,
};
use crate::krylov::{fgmres, gmres, IterationHistory, KrylovConfig};
use crate::precond::{
    one_level_ilu0_baseline, split_saddle, BfbtSchur, BlockPreconditioner, NullspacePolicy,
};
use std::time::Instant;

/// Linear stopping rule: relative to the right-hand-side norm, or absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearTolMode {
    Relative(f64),
    Absolute(f64),
}

impl LinearTolMode {
    pub fn krylov(self, max_iter: usize) -> KrylovConfig {
        match self {
            LinearTolMode::Relative(tol) => KrylovConfig {
                tol,
                relative: true,
                max_iter,
            },
            LinearTolMode::Absolute(tol) => KrylovConfig {
                tol,
                relative: false,
                max_iter,
            },
        }
    }
}

/// Preconditioner selection for the trace solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondId {
    /// One-level baseline: GMRES preconditioned by global-ILU(0) Richardson
    /// steps on the full trace matrix.
    DdIlu0,
    /// Block preconditioner, BFBT Schur inverse, AMG v-cycle with ILU(0)
    /// smoothing for the nodal block.
    BfbtAmgIlu0,
    /// Same with inner-GMRES(ILU(0)) smoothing; needs FGMRES outside.
    BfbtAmgGmres,
    /// Exact sub-inverses (test and small-problem use).
    Ideal,
}

impl PrecondId {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dd-ilu0" => Some(Self::DdIlu0),
            "bfbt-amg-ilu0" => Some(Self::BfbtAmgIlu0),
            "bfbt-amg-gmres" => Some(Self::BfbtAmgGmres),
            "ideal" => Some(Self::Ideal),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::DdIlu0 => "dd-ilu0",
            Self::BfbtAmgIlu0 => "bfbt-amg-ilu0",
            Self::BfbtAmgGmres => "bfbt-amg-gmres",
            Self::Ideal => "ideal",
        }
    }

    /// Whether the preconditioner action changes between applications.
    pub fn is_variable(&self) -> bool {
        matches!(self, Self::BfbtAmgGmres)
    }

    /// Iteration caps from the comparison protocol: 1000 for the one-level
    /// baseline, 200 for the block preconditioners.
    pub fn default_max_iter(&self) -> usize {
        match self {
            Self::DdIlu0 => 1000,
            _ => 200,
        }
    }
}

/// Nonlinear stopping controls.
#[derive(Debug, Clone, Copy)]
pub struct PicardConfig {
    pub eps_a: f64,
    pub eps_r: f64,
    pub max_picard: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            eps_a: 1e-6,
            eps_r: 1e-4,
            max_picard: 20,
        }
    }
}

/// Linear-solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub precond: PrecondId,
    /// Pre/post smoothing steps, baseline Richardson steps, or inner GMRES
    /// iterations, depending on the preconditioner.
    pub smoother_steps: usize,
    pub max_iter: Option<usize>,
    /// Overrides the problem's linear tolerance when set.
    pub lin_tol: Option<LinearTolMode>,
    pub parallel_assembly: bool,
    pub coarse_threshold: usize,
    pub max_levels: usize,
}

impl SolverConfig {
    pub fn new(precond: PrecondId) -> Self {
        Self {
            precond,
            smoother_steps: 3,
            max_iter: None,
            lin_tol: None,
            parallel_assembly: false,
            coarse_threshold: 64,
            max_levels: 10,
        }
    }
}

/// Per-step nonlinear statistics.
#[derive(Debug, Clone)]
pub struct PicardStats {
    pub iterations: usize,
    pub linear_iters: Vec<usize>,
    pub linear_all_converged: bool,
    pub metrics: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
    pub wall_seconds: f64,
}

/// Scaled update norm: sqrt( (1/N) sum_i [ |du_i| / (eps_r |u_i| + eps_a) ]^2 ),
/// evaluated over the concatenated volume and free-trace unknowns.
/// Convergence is the strict inequality metric < 1.
pub fn picard_metric(delta: &[f64], current: &[f64], cfg: &PicardConfig) -> f64 {
    assert_eq!(delta.len(), current.len());
    let n = delta.len();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (d, c) in delta.iter().zip(current) {
        let w = d.abs() / (cfg.eps_r * c.abs() + cfg.eps_a);
        acc += w * w;
    }
    (acc / n as f64).sqrt()
}

/// Projects the problem's initial fields onto the discrete space.
pub fn project_initial_state(
    mesh: &QuadMesh,
    basis: &BasisP,
    problem: &ProblemSpec,
) -> VolumeState {
    let mut state = VolumeState::zeros(mesh.n_elems(), basis.p);
    crate::hdg::fields_project_vector(mesh, basis, problem.u0.as_ref(), &mut state.u);
    crate::hdg::fields_project_vector(mesh, basis, problem.b0.as_ref(), &mut state.b);
    state
}

/// Solves the reduced trace system with the configured preconditioner.
/// Returns the reduced solution and the iteration history.
pub fn solve_trace_system(
    t: &TraceSystem,
    scfg: &SolverConfig,
    tol: LinearTolMode,
) -> Result<(Vec<f64>, IterationHistory), DriverError> {
    let max_iter = scfg.max_iter.unwrap_or_else(|| scfg.precond.default_max_iter());
    let kcfg = tol.krylov(max_iter);
    match scfg.precond {
        PrecondId::DdIlu0 => {
            let p = one_level_ilu0_baseline(&t.matrix, scfg.smoother_steps)?;
            let (x, h) = gmres(&t.matrix, &p, &t.rhs, None, &kcfg)?;
            Ok((x, h))
        }
        PrecondId::Ideal => {
            let saddle = split_saddle(t)?;
            let p = BlockPreconditioner::ideal(&saddle)?;
            let rhs = saddle.rhs();
            let (x, h) = gmres(&saddle, &p, &rhs, None, &kcfg)?;
            Ok((saddle.to_trace_order(&x), h))
        }
        PrecondId::BfbtAmgIlu0 | PrecondId::BfbtAmgGmres => {
            let saddle = split_saddle(t)?;
            let kind = if scfg.precond == PrecondId::BfbtAmgGmres {
                SmootherKind::GmresIlu0
            } else {
                SmootherKind::Ilu0
            };
            let mut amg_cfg =
                AmgConfig::new(SmootherConfig::new(kind, scfg.smoother_steps));
            amg_cfg.pre_steps = scfg.smoother_steps;
            amg_cfg.post_steps = scfg.smoother_steps;
            amg_cfg.coarse_threshold = scfg.coarse_threshold;
            amg_cfg.max_levels = scfg.max_levels;
            let hierarchy = build_hierarchy(&saddle.f, &saddle.layout, &amg_cfg)?;
            let schur = BfbtSchur::new(&saddle.b, &saddle.f, NullspacePolicy::Auto)?;
            let p = BlockPreconditioner::new(
                Box::new(hierarchy),
                Box::new(schur),
                saddle.bt.clone(),
            );
            let rhs = saddle.rhs();
            let (x, h) = if scfg.precond.is_variable() {
                fgmres(&saddle, &p, &rhs, None, &kcfg)?
            } else {
                gmres(&saddle, &p, &rhs, None, &kcfg)?
            };
            Ok((saddle.to_trace_order(&x), h))
        }
    }
}

/// One nonlinear solve at the given time-step size (`f64::INFINITY` for a
/// steady solve). `prev_trace` seeds the trace part of the first update
/// check; `frozen` optionally fixes the Picard fields for all iterations
/// (which makes the iteration affine).
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    mesh: &QuadMesh,
    basis: &BasisP,
    problem: &ProblemSpec,
    prev: &VolumeState,
    prev_trace: Option<&TraceState>,
    dt: f64,
    pcfg: &PicardConfig,
    scfg: &SolverConfig,
    frozen: Option<&VolumeState>,
) -> Result<(VolumeState, TraceState, PicardStats), DriverError> {
    let start = Instant::now();
    let dt_inv = if dt.is_finite() { 1.0 / dt } else { 0.0 };
    let tol = scfg.lin_tol.unwrap_or(problem.lin_tol);
    let data = BoundaryData {
        u: problem.bc_u.as_ref(),
        b: problem.bc_b.as_ref(),
        r: problem.bc_r.as_ref(),
    };
    let mut state = prev.clone();
    let mut stats = PicardStats {
        iterations: 0,
        linear_iters: Vec::new(),
        linear_all_converged: true,
        metrics: Vec::new(),
        converged: false,
        diverged: false,
        wall_seconds: 0.0,
    };
    let mut x_prev: Option<Vec<f64>> = None;
    let mut trace_out: Option<TraceState> = None;

    for _iter in 0..pcfg.max_picard {
        let picard_fields = frozen.unwrap_or(&state);
        let full = assemble_trace_system(
            mesh,
            basis,
            &problem.params,
            picard_fields,
            picard_fields,
            prev,
            problem.forcing_f.as_ref(),
            problem.forcing_g.as_ref(),
            dt_inv,
            scfg.parallel_assembly,
        )?;
        let reduced =
            apply_boundary_conditions(full, mesh, basis, &|tag| problem.bc_kind(tag), &data)?;
        let (x, history) = solve_trace_system(&reduced, scfg, tol)?;
        if !history.converged {
            stats.linear_all_converged = false;
        }
        stats.linear_iters.push(history.iterations);
        stats.iterations += 1;

        let new_state = reduced.reconstruct_volume(mesh, basis, &x);
        let x_full = reduced.expand_solution(&x);
        let new_trace = reduced.trace_state(&x_full);

        // Scaled update over volume + free trace unknowns. The reference
        // trace for the first iterate comes from the previous step when
        // available, otherwise zero.
        let x_old = match (&x_prev, prev_trace) {
            (Some(v), _) => v.clone(),
            (None, Some(ts)) => {
                let bc = reduced.bc.as_ref().expect("reduced system");
                let mut full_prev = vec![0.0; reduced.layout.n_total()];
                let npe = reduced.layout.nodes_per_edge();
                for e in 0..reduced.layout.n_edges {
                    for k in 0..npe {
                        for c in 0..2 {
                            full_prev[reduced.layout.uhat_dof(e, k, c)] =
                                ts.uhat[(e * npe + k) * 2 + c];
                        }
                        full_prev[reduced.layout.bt_dof(e, k)] = ts.bt[e * npe + k];
                        full_prev[reduced.layout.rh_dof(e, k)] = ts.rh[e * npe + k];
                    }
                }
                for el in 0..reduced.layout.n_elems {
                    full_prev[reduced.layout.rho_dof(el)] = ts.rho[el];
                }
                bc.free.iter().map(|&i| full_prev[i]).collect()
            }
            (None, None) => vec![0.0; x.len()],
        };

        let mut delta = Vec::with_capacity(new_state.total_dofs() + x.len());
        let mut current = Vec::with_capacity(delta.capacity());
        {
            let mut push_pair = |new_v: f64, old_v: f64| {
                delta.push(new_v - old_v);
                current.push(new_v);
            };
            let mut idx = 0;
            new_state.for_each(&mut |v| {
                // paired against the previous iterate's volume coefficients
                let old = state_value_at(&state, idx);
                push_pair(v, old);
                idx += 1;
            });
            for (nv, ov) in x.iter().zip(&x_old) {
                push_pair(*nv, *ov);
            }
        }
        let metric = picard_metric(&delta, &current, pcfg);
        stats.metrics.push(metric);

        state = new_state;
        x_prev = Some(x);
        trace_out = Some(new_trace);

        if stats.metrics.len() >= 3 {
            let m = &stats.metrics;
            let k = m.len();
            if m[k - 1] > m[k - 2] && m[k - 2] > m[k - 3] {
                stats.diverged = true;
            }
        }
        if metric < 1.0 {
            stats.converged = true;
            break;
        }
    }
    stats.wall_seconds = start.elapsed().as_secs_f64();
    let trace = trace_out.expect("at least one Picard iteration");
    Ok((state, trace, stats))
}

/// Flat index into the concatenated volume coefficient arrays.
fn state_value_at(s: &VolumeState, idx: usize) -> f64 {
    let mut i = idx;
    for arr in [&s.l, &s.u, &s.q, &s.j, &s.b, &s.r] {
        if i < arr.len() {
            return arr[i];
        }
        i -= arr.len();
    }
    panic!("index out of range");
}
