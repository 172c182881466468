//! Critical points of Γ_ε by stabilized descent from the initializer
//! neighborhood X_ε = {φ_ε(·−y/ε)U(·−y/ε) : y ∈ 𝓜^β}.
//!
//! The target is a mountain-pass point: one unstable direction (dilation,
//! or amplitude when the mass term dominates), everything else stable.
//! Plain descent would slide off the ridge, so each iteration combines
//!
//! * a projected Armijo step with the H¹ preconditioner
//!   (−Δ_h + κV_ε)⁻¹ applied to the weak gradient, and
//! * a one-dimensional re-maximization along the unstable fiber,
//!
//! which is descent on the fiber-maximal reduced functional; its minimum is
//! the mountain-pass point, where the full gradient vanishes.  Negative
//! values are clipped after every step — truncation never increases any
//! term of Γ_ε, so monotonicity of the accepted line-search steps survives
//! the projection.

use serde::Serialize;
use thiserror::Error;

use crate::energy::{Assembled, EnergyError, EnergyReport};
use crate::grid::{Field, Grid, GridError};
use crate::interp::Pchip;
use crate::shooting::GroundState;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver config: {0}")]
    Config(String),
    #[error("penalization active at convergence (Q_ε = {q_eps:.3e}); ε not small enough or τ/β misconfigured")]
    PenalizationActive { q_eps: f64 },
    #[error("first sweep point failed: {0}")]
    FirstPointFailed(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Which one-dimensional fiber stabilizes the ridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FiberStrategy {
    /// t ↦ v(·/t); always has a unique max near the ground state (the
    /// t^{N−2}/t^N coefficient structure), but its application resamples
    /// the field, which costs interpolation noise.  The fallback for p < 4.
    Dilation,
    /// s ↦ s·v; exact to apply (no resampling).  The fiber map has a unique
    /// maximum when |G⁻¹(s)|^p grows superquadratically, i.e. p ≥ 4; also
    /// the only usable fiber on tensor grids, where dilation degenerates at
    /// N = 2.
    Amplitude,
    /// No stabilization (plain descent; finds minima such as v ≡ 0).
    None,
}

impl FiberStrategy {
    /// Amplitude when the fiber map is guaranteed unimodal, else dilation.
    pub fn auto(p: f64) -> Self {
        if p >= 4.0 {
            FiberStrategy::Amplitude
        } else {
            FiberStrategy::Dilation
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub max_iterations: usize,
    /// Convergence requires both the weighted-L² and the dual (preconditioned)
    /// norm of the weak gradient to drop below this.
    pub gradient_tolerance: f64,
    pub armijo_c1: f64,
    pub max_backtracks: u32,
    /// Initial dilation of the initializer W_{ε,t}.
    pub init_t: f64,
    /// Initializer center in original coordinates; must lie in 𝓜^β.
    pub init_center: [f64; 3],
    pub fiber: FiberStrategy,
    /// Re-maximize the fiber every this many iterations.
    pub fiber_every: usize,
    /// Trace recording stride (1 = every iteration).
    pub trace_every: usize,
    /// Finish with Newton–MINRES on the Euler–Lagrange residual once the
    /// dual norm falls below this multiple of the tolerance (0 disables).
    pub polish_threshold: f64,
    pub polish_max_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            gradient_tolerance: 1.0e-5,
            armijo_c1: 1.0e-4,
            max_backtracks: 50,
            init_t: 1.0,
            init_center: [0.0; 3],
            fiber: FiberStrategy::Amplitude,
            fiber_every: 1,
            trace_every: 1,
            polish_threshold: 1.0e3,
            polish_max_steps: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub gamma: f64,
    pub gradient_norm: f64,
    pub step: f64,
    pub fiber_t: f64,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub field: Field,
    pub report: EnergyReport,
    pub iterations: usize,
    pub converged: bool,
    /// Dual (preconditioned) norm of the final weak gradient.
    pub dual_norm: f64,
    /// D^{1,2} distance to the initializer manifold, sampled at its center.
    pub distance_to_x: f64,
    pub trace: Vec<TraceRow>,
}

/// Tridiagonal factorization of (−Δ_h + κV_ε) for radial grids; plain CG
/// for tensor grids.  Both act on the weighted-symmetric form
/// L d = w·g with boundary rows pinned to zero.
enum Precond {
    Radial { lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64> },
    Tensor { diag_mass: Vec<f64> },
}

fn build_precond(asm: &Assembled) -> Precond {
    let n = asm.grid.len();
    match &*asm.grid {
        Grid::Radial(rg) => {
            let c = rg.edge_coeffs();
            let mut lower = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 0..n {
                let mut d = asm.grid.weight(i) * asm.kappa * v_eps_at(asm, i);
                if i > 0 {
                    d += c[i - 1];
                    lower[i] = -c[i - 1];
                }
                if i + 1 < n {
                    d += c[i];
                    upper[i] = -c[i];
                }
                diag[i] = d;
            }
            // Dirichlet pin at the outer node.
            lower[n - 1] = 0.0;
            diag[n - 1] = 1.0;
            upper[n - 2] = upper[n - 2]; // left as is; row n−1 decoupled below
            Precond::Radial { lower, diag, upper }
        }
        Grid::Tensor(_) => {
            let diag_mass =
                (0..n).map(|i| asm.grid.weight(i) * asm.kappa * v_eps_at(asm, i)).collect();
            Precond::Tensor { diag_mass }
        }
    }
}

fn v_eps_at(asm: &Assembled, i: usize) -> f64 {
    let pos = asm.grid.position(i);
    (asm.pots.v)(&[asm.eps * pos[0], asm.eps * pos[1], asm.eps * pos[2]])
}

impl Precond {
    /// Solve (−Δ_h + κV) d = g in the weighted-symmetric form.
    fn apply(&self, asm: &Assembled, g: &[f64]) -> Vec<f64> {
        let n = g.len();
        let rhs: Vec<f64> = (0..n).map(|i| asm.grid.weight(i) * g[i]).collect();
        self.solve_weighted(asm, rhs)
    }

    /// Solve L d = rhs where L is the symmetric matrix W·(−Δ_h + κV).
    fn solve_weighted(&self, asm: &Assembled, mut rhs: Vec<f64>) -> Vec<f64> {
        let n = rhs.len();
        match self {
            Precond::Radial { lower, diag, upper } => {
                rhs[n - 1] = 0.0;
                // Thomas algorithm; the pinned last row is handled by the
                // zero rhs and unit diagonal.
                let mut cp = vec![0.0; n];
                let mut dp = vec![0.0; n];
                cp[0] = upper[0] / diag[0];
                dp[0] = rhs[0] / diag[0];
                for i in 1..n {
                    let m = diag[i] - lower[i] * cp[i - 1];
                    cp[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
                    dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m;
                }
                let mut d = vec![0.0; n];
                d[n - 1] = dp[n - 1];
                for i in (0..n - 1).rev() {
                    d[i] = dp[i] - cp[i] * d[i + 1];
                }
                d[n - 1] = 0.0;
                d
            }
            Precond::Tensor { diag_mass } => {
                let boundary: Vec<bool> = (0..n)
                    .map(|i| match &*asm.grid {
                        Grid::Tensor(t) => t.is_boundary(i),
                        _ => false,
                    })
                    .collect();
                let apply_op = |x: &[f64], out: &mut Vec<f64>| {
                    let lap = asm.grid.weak_neg_laplacian(x);
                    for i in 0..n {
                        out[i] = if boundary[i] {
                            x[i]
                        } else {
                            asm.grid.weight(i) * lap[i] + diag_mass[i] * x[i]
                        };
                    }
                };
                for (i, b) in boundary.iter().enumerate() {
                    if *b {
                        rhs[i] = 0.0;
                    }
                }
                // Conjugate gradient, fixed iteration order: deterministic.
                let mut x = vec![0.0; n];
                let mut r = rhs.clone();
                let mut p = r.clone();
                let mut ap = vec![0.0; n];
                let mut rs: f64 = r.iter().map(|v| v * v).sum();
                let rs0 = rs.max(1e-300);
                for _ in 0..400 {
                    if rs / rs0 < 1.0e-16 {
                        break;
                    }
                    apply_op(&p, &mut ap);
                    let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
                    if pap <= 0.0 {
                        break;
                    }
                    let alpha = rs / pap;
                    for i in 0..n {
                        x[i] += alpha * p[i];
                        r[i] -= alpha * ap[i];
                    }
                    let rs_new: f64 = r.iter().map(|v| v * v).sum();
                    let beta = rs_new / rs;
                    rs = rs_new;
                    for i in 0..n {
                        p[i] = r[i] + beta * p[i];
                    }
                }
                x
            }
        }
    }
}

/// Zero the gradient components a feasible step cannot act on: pinned
/// boundary nodes, and the inward component at clipped (v = 0) nodes.
fn project_gradient(asm: &Assembled, v: &[f64], g: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = g.to_vec();
    for i in 0..n {
        if v[i] <= 0.0 && out[i] > 0.0 {
            out[i] = 0.0;
        }
    }
    match &*asm.grid {
        Grid::Radial(_) => out[n - 1] = 0.0,
        Grid::Tensor(t) => {
            for (i, o) in out.iter_mut().enumerate() {
                if t.is_boundary(i) {
                    *o = 0.0;
                }
            }
        }
    }
    out
}

fn clip_and_pin(asm: &Assembled, v: &mut [f64]) {
    let n = v.len();
    for x in v.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    match &*asm.grid {
        Grid::Radial(_) => v[n - 1] = 0.0,
        Grid::Tensor(t) => {
            for i in 0..n {
                if t.is_boundary(i) {
                    v[i] = 0.0;
                }
            }
        }
    }
}

/// Apply the fiber maximizer in place; returns the fiber parameter used.
fn fiber_remax(asm: &Assembled, cfg: &SolveConfig, v: &mut Vec<f64>) -> f64 {
    match cfg.fiber {
        FiberStrategy::None => 1.0,
        FiberStrategy::Amplitude => {
            let phi = |s: f64| {
                let sv: Vec<f64> = v.iter().map(|x| s * x).collect();
                asm.gamma(&sv)
            };
            // Newton on φ′ via central differences; the fiber map is smooth
            // and concave near its max, so 2-3 steps land on s* and the
            // application s·v is exact (no resampling noise).
            let h = 1.0e-3;
            let mut c = 1.0f64;
            let mut ok = true;
            for _ in 0..4 {
                let (fm, f0, fp) = (phi(c - h), phi(c), phi(c + h));
                let d1 = (fp - fm) / (2.0 * h);
                let d2 = (fp - 2.0 * f0 + fm) / (h * h);
                if !(d2 < 0.0) {
                    ok = false;
                    break;
                }
                let step = (-d1 / d2).clamp(-0.2, 0.2);
                c += step;
                if step.abs() < 1.0e-7 {
                    break;
                }
            }
            if !ok || !(0.6..=1.6).contains(&c) {
                // Fall back to a bracketed search; skip boundary hits.
                let (lo, hi) = (0.5, 2.0);
                let (s, _) = crate::energy::golden_max(phi, lo, hi, 1.0e-9);
                if s > lo * 1.001 && s < hi * 0.999 {
                    c = s;
                } else {
                    return s;
                }
            }
            if c != 1.0 {
                v.iter_mut().for_each(|x| *x *= c);
            }
            c
        }
        FiberStrategy::Dilation => {
            let cache = asm.fiber_cache(v);
            let (lo, hi) = (0.75, 1.4);
            let (t, _) = asm.fiber_argmax(&cache, lo, hi);
            // Resampling costs interpolation noise, so tiny dilations are
            // not worth applying (deadband), and boundary hits are skipped.
            if (t - 1.0).abs() > 3.0e-3 && t > lo * 1.001 && t < hi * 0.999 {
                if let Grid::Radial(rg) = &*asm.grid {
                    let radii = rg.nodes().to_vec();
                    if let Ok(interp) = Pchip::new(radii.clone(), v.clone()) {
                        let r_max = *radii.last().unwrap();
                        for (i, r) in radii.iter().enumerate() {
                            let rr = r / t;
                            v[i] = if rr <= r_max { interp.eval(rr) } else { 0.0 };
                        }
                    }
                }
            }
            t
        }
    }
}

/// Hessian-vector product of Γ_ε by central differences of the gradient.
fn hessian_product(asm: &Assembled, v: &[f64], u: &[f64]) -> Vec<f64> {
    let u_scale = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let v_scale = v.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let h = 1.0e-7 * v_scale / u_scale.max(1e-300);
    let vp: Vec<f64> = (0..v.len()).map(|i| v[i] + h * u[i]).collect();
    let vm: Vec<f64> = (0..v.len()).map(|i| v[i] - h * u[i]).collect();
    let gp = asm.gradient(&vp);
    let gm = asm.gradient(&vm);
    (0..v.len()).map(|i| (gp[i] - gm[i]) / (2.0 * h)).collect()
}

/// Preconditioned MINRES for the symmetric (indefinite) Newton system
/// W·H δ = W·g with the SPD preconditioner L = W(−Δ_h + κV).  Aimed at the
/// mountain-pass endgame, where descent directions stall against the single
/// negative Hessian mode.
fn minres_newton(
    asm: &Assembled,
    precond: &Precond,
    v: &[f64],
    g: &[f64],
    max_iter: usize,
) -> Vec<f64> {
    let n = g.len();
    let w_of = |i: usize| asm.grid.weight(i);
    let a_op = |x: &[f64]| -> Vec<f64> {
        let hx = hessian_product(asm, v, x);
        (0..n).map(|i| w_of(i) * hx[i]).collect()
    };
    let b: Vec<f64> = (0..n).map(|i| w_of(i) * g[i]).collect();

    let mut x = vec![0.0; n];
    let mut r1 = b.clone();
    let mut y = precond.solve_weighted(asm, r1.clone());
    let mut beta: f64 = r1.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
    if beta == 0.0 {
        return x;
    }
    let beta0 = beta;
    let mut r2 = r1.clone();
    let (mut oldb, mut dbar, mut epsln, mut phibar) = (0.0f64, 0.0f64, 0.0f64, beta);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for _ in 0..max_iter {
        let s = 1.0 / beta;
        let vk: Vec<f64> = y.iter().map(|z| z * s).collect();
        let mut yk = a_op(&vk);
        if oldb > 0.0 {
            let c = beta / oldb;
            for i in 0..n {
                yk[i] -= c * r1[i];
            }
        }
        let alfa: f64 = vk.iter().zip(&yk).map(|(a, b)| a * b).sum();
        let c = alfa / beta;
        for i in 0..n {
            yk[i] -= c * r2[i];
        }
        r1 = std::mem::replace(&mut r2, yk);
        y = precond.solve_weighted(asm, r2.clone());
        oldb = beta;
        beta = r2.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (vk[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar <= 1.0e-10 * beta0 || beta == 0.0 {
            break;
        }
    }
    x
}

/// The H¹-preconditioned direction (−Δ_h + κV_ε)⁻¹ g; public for
/// diagnostics and benches.
pub fn preconditioned_direction(asm: &Assembled, g: &[f64]) -> Vec<f64> {
    build_precond(asm).apply(asm, g)
}

/// Descend Γ_ε from W_{ε,t}(· − y/ε) to a critical point.
pub fn solve(
    cfg: &SolveConfig,
    asm: &Assembled,
    ground: &GroundState,
) -> Result<SolveOutcome, SolveError> {
    let w0 = asm.build_w(cfg.init_t, &cfg.init_center, ground)?;
    solve_from(cfg, asm, ground, w0.values().to_vec())
}

/// Same, from an explicit initial field (warm starts).
pub fn solve_from(
    cfg: &SolveConfig,
    asm: &Assembled,
    ground: &GroundState,
    mut v: Vec<f64>,
) -> Result<SolveOutcome, SolveError> {
    if v.len() != asm.grid.len() {
        return Err(SolveError::Config(format!(
            "initial field has {} nodes, grid has {}",
            v.len(),
            asm.grid.len()
        )));
    }
    if !(cfg.gradient_tolerance > 0.0) {
        return Err(SolveError::Config("gradient tolerance must be positive".into()));
    }
    let beta_dist = asm.pen.region.dist_to_complement(&cfg.init_center);
    if asm.pots.mset.dist(&cfg.init_center) >= asm.pen.beta && beta_dist == 0.0 {
        return Err(SolveError::Config(format!(
            "initializer center {:?} lies outside M^beta",
            cfg.init_center
        )));
    }

    let precond = build_precond(asm);
    clip_and_pin(asm, &mut v);
    let mut fiber_t = fiber_remax(asm, cfg, &mut v);
    let mut gamma = asm.gamma(&v);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut dual_norm = f64::INFINITY;
    let mut grad_norm;
    let peak_scale = ground.peak();
    let mut alpha_prev = 0.1f64;
    let mut best_dual = f64::INFINITY;
    let mut stall = 0usize;

    for iter in 0..cfg.max_iterations {
        iterations = iter;
        let g = project_gradient(asm, &v, &asm.gradient(&v));
        grad_norm = asm.l2w_norm(&g);
        let d = precond.apply(asm, &g);
        let descent: f64 = asm.grid.integrate(|i| g[i] * d[i]);
        dual_norm = descent.max(0.0).sqrt();
        // Hand over to the Newton polish once progress stagnates.
        if dual_norm < 0.97 * best_dual {
            best_dual = dual_norm;
            stall = 0;
        } else {
            stall += 1;
            if stall >= 30 && dual_norm <= cfg.polish_threshold * cfg.gradient_tolerance {
                break;
            }
        }
        if grad_norm <= cfg.gradient_tolerance && dual_norm <= cfg.gradient_tolerance {
            converged = true;
            if iter % cfg.trace_every == 0 {
                trace.push(TraceRow {
                    iteration: iter,
                    gamma,
                    gradient_norm: grad_norm,
                    step: 0.0,
                    fiber_t,
                });
            }
            break;
        }
        if descent <= 0.0 {
            break; // preconditioner lost positivity; give up honestly
        }

        // Projected Armijo backtracking with a warm-started step: Newton-size
        // steps across the mountain ridge would drop into the valley and
        // still pass the sufficient-decrease test, so the step grows only
        // gradually and is capped in amplitude.
        let v_inf = v.iter().cloned().fold(0.0f64, f64::max);
        let d_inf = d.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let alpha_cap = 0.25 * (v_inf + 0.05 * peak_scale) / d_inf.max(1e-300);
        let mut alpha = (2.0 * alpha_prev).min(1.0).min(alpha_cap);
        let mut accepted = false;
        let mut candidate = Vec::new();
        let mut gamma_new = gamma;
        // Near convergence the sufficient-decrease margin drops below the
        // roundoff of Γ itself; comparisons get a noise allowance so the
        // line search does not reject steps on summation noise.
        let noise = 1.0e-13 * (gamma.abs() + 1.0);
        for _ in 0..cfg.max_backtracks {
            candidate = (0..v.len()).map(|i| v[i] - alpha * d[i]).collect();
            clip_and_pin(asm, &mut candidate);
            gamma_new = asm.gamma(&candidate);
            if gamma_new <= gamma - cfg.armijo_c1 * alpha * descent + noise {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break; // stalled below line-search resolution
        }
        // Parabolic extrapolation: along near-kernel modes of the Hessian
        // the quadratic model justifies a much longer step; take it only if
        // it actually improves.
        let curv = 2.0 * (gamma_new - gamma + alpha * descent) / (alpha * alpha);
        if curv > 0.0 {
            let a_star = (descent / curv).min(1.0e4 * alpha);
            if a_star > 2.0 * alpha {
                let mut far: Vec<f64> = (0..v.len()).map(|i| v[i] - a_star * d[i]).collect();
                clip_and_pin(asm, &mut far);
                let gamma_far = asm.gamma(&far);
                if gamma_far < gamma_new {
                    candidate = far;
                    gamma_new = gamma_far;
                    alpha = a_star;
                }
            }
        }
        alpha_prev = alpha.min(1.0);
        v = candidate;
        gamma = gamma_new;

        if cfg.fiber != FiberStrategy::None && (iter + 1) % cfg.fiber_every == 0 {
            fiber_t = fiber_remax(asm, cfg, &mut v);
            if (fiber_t - 1.0).abs() > 1.0e-7 {
                gamma = asm.gamma(&v);
            }
        }
        if iter % cfg.trace_every == 0 {
            trace.push(TraceRow {
                iteration: iter,
                gamma,
                gradient_norm: grad_norm,
                step: alpha,
                fiber_t,
            });
        }
    }

    // Newton–MINRES polish: descent plus a one-dimensional fiber cannot
    // always reach the tolerance (the fiber controls one combination of the
    // unstable mode, not the mode itself); Newton converges to the nearby
    // critical point regardless of its index.
    if cfg.polish_threshold > 0.0
        && !converged
        && dual_norm <= cfg.polish_threshold * cfg.gradient_tolerance
    {
        for _ in 0..cfg.polish_max_steps {
            let g = project_gradient(asm, &v, &asm.gradient(&v));
            let gn = asm.l2w_norm(&g);
            let d = precond.apply(asm, &g);
            let dn: f64 = asm.grid.integrate(|i| g[i] * d[i]).max(0.0).sqrt();
            dual_norm = dn;
            if gn <= cfg.gradient_tolerance && dn <= cfg.gradient_tolerance {
                converged = true;
                break;
            }
            let delta = minres_newton(asm, &precond, &v, &g, 40);
            // Damped residual line search on the dual norm.
            let mut improved = false;
            let mut step = 1.0;
            for _ in 0..12 {
                let mut cand: Vec<f64> = (0..v.len()).map(|i| v[i] - step * delta[i]).collect();
                clip_and_pin(asm, &mut cand);
                let gc = project_gradient(asm, &cand, &asm.gradient(&cand));
                let dc = precond.apply(asm, &gc);
                let dcn: f64 = asm.grid.integrate(|i| gc[i] * dc[i]).max(0.0).sqrt();
                if dcn < 0.9 * dn {
                    v = cand;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
            iterations += 1;
        }
        gamma = asm.gamma(&v);
        let _ = gamma;
    }

    let mut report = asm.report(&v);
    // The reported gradient norm is the projected one: residual components
    // pinned by the boundary or blocked by the positivity constraint are
    // structural, not convergence failures.
    report.gradient_norm = asm.l2w_norm(&project_gradient(asm, &v, &asm.gradient(&v)));
    if converged && report.q_eps > 0.0 {
        return Err(SolveError::PenalizationActive { q_eps: report.q_eps });
    }
    let field = Field::new(asm.grid.clone(), v)?;
    let w_ref = asm.build_w(1.0, &cfg.init_center, ground)?;
    let distance_to_x = field.d12_distance(&w_ref)?;
    Ok(SolveOutcome {
        field,
        report,
        iterations,
        converged,
        dual_norm,
        distance_to_x,
        trace,
    })
}

/// Solve a strictly-decreasing ε sequence, warm-starting each point from the
/// previous solution resampled onto the next grid.  The first point must
/// converge; later failures are isolated per point.
pub fn continuation_sweep(
    cfg: &SolveConfig,
    problems: &[Assembled],
    ground: &GroundState,
) -> Result<Vec<Result<SolveOutcome, SolveError>>, SolveError> {
    for w in problems.windows(2) {
        if w[1].eps >= w[0].eps {
            return Err(SolveError::Config("sweep eps values must be strictly decreasing".into()));
        }
    }
    let mut results: Vec<Result<SolveOutcome, SolveError>> = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (radii, values)
    for (k, asm) in problems.iter().enumerate() {
        let init = match (&prev, &*asm.grid) {
            (Some((radii, values)), Grid::Radial(rg)) => {
                let interp = Pchip::new(radii.clone(), values.clone());
                match interp {
                    Ok(p) => {
                        let top = *radii.last().unwrap();
                        Some(
                            rg.nodes()
                                .iter()
                                .map(|&r| if r <= top { p.eval(r) } else { 0.0 })
                                .collect::<Vec<f64>>(),
                        )
                    }
                    Err(_) => None,
                }
            }
            _ => None,
        };
        let res = match init {
            Some(v0) => solve_from(cfg, asm, ground, v0),
            None => solve(cfg, asm, ground),
        };
        match &res {
            Ok(out) if out.converged => {
                if let Grid::Radial(rg) = &*asm.grid {
                    prev = Some((rg.nodes().to_vec(), out.field.values().to_vec()));
                }
            }
            Ok(_) | Err(_) => {
                if k == 0 {
                    let msg = match &res {
                        Ok(out) => format!(
                            "did not converge in {} iterations (|grad| = {:.3e})",
                            out.iterations, out.report.gradient_norm
                        ),
                        Err(e) => e.to_string(),
                    };
                    return Err(SolveError::FirstPointFailed(msg));
                }
                prev = None;
            }
        }
        results.push(res);
    }
    Ok(results)
}
