//! Cross-cutting validation checks run after every solve: Pohozaev
//! identity, decay laws, energy-level gap, the uniform sup-norm lower
//! bound, and penalty inactivity.  Failures are recorded outcomes, never
//! exceptions — sweeps must surface partial information.

use serde::Serialize;

use crate::energy::Assembled;
use crate::grid::Grid;
use crate::semiclassical::critical_profile_fit;
use crate::shooting::GroundState;
use crate::solver::SolveOutcome;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// None = skipped (see note) or recorded-only.
    pub passed: Option<bool>,
    pub measured: f64,
    pub threshold: f64,
    pub note: String,
}

impl CheckResult {
    fn pass_if(name: &str, measured: f64, threshold: f64, ok: bool, note: &str) -> Self {
        Self {
            name: name.into(),
            passed: Some(ok),
            measured,
            threshold,
            note: note.into(),
        }
    }

    fn skip(name: &str, note: &str) -> Self {
        Self { name: name.into(), passed: None, measured: f64::NAN, threshold: f64::NAN, note: note.into() }
    }

    fn record(name: &str, measured: f64, note: &str) -> Self {
        Self { name: name.into(), passed: None, measured, threshold: f64::NAN, note: note.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub checks: Vec<CheckResult>,
    /// True when no executed check failed (skips and records don't count).
    pub all_passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SuiteKind {
    Subcritical,
    Critical,
}

pub struct SuiteContext<'a> {
    pub kind: SuiteKind,
    /// V and K constant; the Pohozaev identity applies in its κ-corrected
    /// autonomous form.
    pub autonomous: bool,
    pub asm: &'a Assembled,
    pub limit: &'a GroundState,
    pub c_m: f64,
    /// ‖U‖_∞ of the limit profile, calibrating the sup-norm lower bound.
    pub reference_peak: f64,
}

/// Pohozaev residual for the autonomous ε-problem
/// −Δv + κV₀·G⁻¹(v)/g = m·f_p(v):
/// (N−2)/(2N)∫|∇v|² − ∫[(m/p)|G⁻¹(v)|^p − (κV₀/2)|G⁻¹(v)|²], over ∫|∇v|².
pub fn pohozaev_residual_autonomous(asm: &Assembled, v: &[f64]) -> f64 {
    let tr = asm.transform;
    let nf = asm.grid.dim() as f64;
    let d = asm.grid.dirichlet_energy(v);
    if d == 0.0 {
        return 0.0;
    }
    let (m, p, kv0) = (asm.pots.m, asm.p, asm.kappa * asm.pots.v0);
    let b: f64 = asm.grid.integrate(|i| {
        let u = tr.invert(v[i].abs());
        let up = if v[i] > 0.0 { u.powf(p) } else { 0.0 };
        m / p * up - 0.5 * kv0 * u * u
    });
    ((nf - 2.0) / (2.0 * nf) * d - b) / d
}

pub fn run_suite(outcome: &SolveOutcome, ctx: &SuiteContext) -> SuiteResult {
    let mut checks = Vec::new();
    let v = outcome.field.values();

    // (a) Pohozaev, autonomous solves only.
    if ctx.autonomous {
        let res = pohozaev_residual_autonomous(ctx.asm, v);
        checks.push(CheckResult::pass_if(
            "pohozaev_autonomous",
            res.abs(),
            1.0e-5,
            res.abs() <= 1.0e-5,
            "normalized κ-corrected Pohozaev residual",
        ));
    } else {
        checks.push(CheckResult::skip(
            "pohozaev_autonomous",
            "potentials vary in space; the identity only holds for the autonomous problem",
        ));
    }

    // (b) Decay law: algebraic plateau in the subcritical dual variable,
    // Talenti fit in the critical case.
    match ctx.kind {
        SuiteKind::Subcritical => checks.push(plateau_check(ctx, outcome)),
        SuiteKind::Critical => {
            match critical_profile_fit(outcome, ctx.asm.grid.dim(), ctx.asm.pots.m) {
                Ok((mu, err)) => checks.push(CheckResult::pass_if(
                    "talenti_fit",
                    err,
                    0.5,
                    err <= 0.5,
                    &format!("critical profile vs bubble with mu = {mu:.4} (trend judged across the sweep)"),
                )),
                Err(e) => checks.push(CheckResult::skip("talenti_fit", &e.to_string())),
            }
        }
    }

    // (c) Energy gap, recorded; the trend is a sweep-level property.
    let gap = (outcome.report.gamma_eps - ctx.c_m).abs();
    checks.push(CheckResult::record(
        "energy_gap",
        gap,
        "|Γ_ε(v_ε) − C_m|; must trend to zero across an ε sweep",
    ));

    // (d) Uniform sup-norm lower bound, calibrated from the limit profile.
    let sup = outcome.field.max_value();
    checks.push(CheckResult::pass_if(
        "supnorm_lower_bound",
        sup,
        0.5 * ctx.reference_peak,
        sup >= 0.5 * ctx.reference_peak,
        "‖v_ε‖_∞ ≥ ½‖U‖_∞ uniformly over sweeps",
    ));

    // (e) Penalty inactivity, exact.
    checks.push(CheckResult::pass_if(
        "q_zero",
        outcome.report.q_eps,
        0.0,
        outcome.report.q_eps == 0.0,
        "Q_ε(v_ε) = 0 exactly",
    ));

    let all_passed = checks.iter().all(|c| c.passed != Some(false));
    SuiteResult { checks, all_passed }
}

/// Relative variation of q(r) = r^{N−2}v over the algebraic window between
/// the core and the κ-crossover radius (where the mass term overtakes the
/// nonlinearity).
fn plateau_check(ctx: &SuiteContext, outcome: &SolveOutcome) -> CheckResult {
    let grid = &ctx.asm.grid;
    let radial = matches!(&**grid, Grid::Radial(_));
    if !radial {
        return CheckResult::skip("tail_plateau", "algebraic plateau applies to radial solves");
    }
    let nf = grid.dim() as f64;
    let v = outcome.field.values();
    let v_cross = (ctx.asm.kappa * ctx.asm.pots.v0 / ctx.asm.pots.m)
        .powf(1.0 / (ctx.asm.p - 2.0))
        .max(1e-300);
    // q over radii where the field is in its algebraic regime.
    let mut q_max = f64::NEG_INFINITY;
    let mut r_qmax = 0.0;
    for i in 0..v.len() {
        let r = grid.node_radius(i);
        let q = r.powf(nf - 2.0) * v[i];
        if v[i] > 2.0 * v_cross && q > q_max {
            q_max = q;
            r_qmax = r;
        }
    }
    if !(q_max > 0.0) {
        return CheckResult::skip("tail_plateau", "no algebraic window before the mass cutoff");
    }
    let r_hi = 2.0 * r_qmax;
    let (mut lo, mut hi, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for i in 0..v.len() {
        let r = grid.node_radius(i);
        if r >= r_qmax && r <= r_hi && v[i] > 2.0 * v_cross {
            let q = r.powf(nf - 2.0) * v[i];
            lo = lo.min(q);
            hi = hi.max(q);
            n += 1;
        }
    }
    if n < 6 {
        return CheckResult::skip("tail_plateau", "algebraic window too thin at this κ");
    }
    let variation = (hi - lo) / hi;
    CheckResult::pass_if(
        "tail_plateau",
        variation,
        0.10,
        variation <= 0.10,
        "relative variation of r^{N−2}v over the algebraic window",
    )
}

/// Sweep-level trend assertion: non-increasing within a relative slack.
pub fn trend_non_increasing(name: &str, values: &[f64], slack: f64) -> CheckResult {
    let mut ok = true;
    for w in values.windows(2) {
        if w[1] > w[0] * (1.0 + slack) {
            ok = false;
        }
    }
    let measured = values
        .windows(2)
        .map(|w| w[1] / w[0].max(1e-300))
        .fold(0.0f64, f64::max);
    CheckResult::pass_if(
        name,
        measured,
        1.0 + slack,
        ok,
        "consecutive ratio must stay ≤ 1 (monotone trend)",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Penalization;
    use crate::potentials::{MSet, Potentials, RegionO};
    use crate::shooting::{find_ground_state, ShootConfig};
    use crate::solver::{solve, SolveConfig};
    use crate::transform::DualTransform;
    use std::sync::Arc;

    #[test]
    fn healthy_autonomous_solve_passes_suite() {
        let scfg = ShootConfig {
            profile_nodes: 5000,
            r_max: 500.0,
            rtol: 1.0e-10,
            tol_amplitude: 1.0e-12,
            ..ShootConfig::new(5, 4.0, 1.0)
        };
        let shoot = find_ground_state(&scfg).unwrap();
        let gs = shoot.ground_state();
        let pots = Potentials {
            v: Arc::new(|_: &[f64; 3]| 1.0e-12),
            k: Arc::new(|_: &[f64; 3]| 1.0),
            m: 1.0,
            k0: 1.01,
            v0: 1.0e-12,
            mset: MSet::Point { at: [0.0; 3] },
        };
        let pen = Penalization::new(
            1.0,
            RegionO::Ball { radius: 1000.0 },
            9.9,
            shoot.dirichlet,
            5,
            &[0.0; 3],
        )
        .unwrap();
        let eps = 0.1;
        let grid =
            crate::grid::Grid::radial_geometric(5, 1e-3, 0.95 * 1000.0 / eps, 3000).unwrap();
        let asm = Assembled::new(
            grid,
            pots,
            pen,
            eps.powf(1.6),
            eps,
            DualTransform::standard(),
            4.0,
        )
        .unwrap();
        let out = solve(
            &SolveConfig { gradient_tolerance: 1.0e-6, ..Default::default() },
            &asm,
            &gs,
        )
        .unwrap();
        assert!(out.converged);
        let ctx = SuiteContext {
            kind: SuiteKind::Subcritical,
            autonomous: true,
            asm: &asm,
            limit: &gs,
            c_m: shoot.c_m(),
            reference_peak: gs.peak(),
        };
        let suite = run_suite(&out, &ctx);
        assert!(suite.all_passed, "{:#?}", suite.checks);
        // Re-running changes nothing (pure function of the outcome).
        let again = run_suite(&out, &ctx);
        for (a, b) in suite.checks.iter().zip(&again.checks) {
            assert_eq!(a.passed, b.passed);
            assert!(a.measured == b.measured || (a.measured.is_nan() && b.measured.is_nan()));
        }
    }

    #[test]
    fn trend_check() {
        let good = trend_non_increasing("gap", &[1.0, 0.5, 0.2, 0.1], 0.0);
        assert_eq!(good.passed, Some(true));
        let bad = trend_non_increasing("gap", &[1.0, 0.5, 0.8], 0.0);
        assert_eq!(bad.passed, Some(false));
    }
}
