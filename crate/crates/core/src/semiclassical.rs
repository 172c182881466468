//! The ħ-level pipeline: exact rescaling maps, reconstruction of the
//! original-scale solution, and concentration diagnostics.
//!
//! Subcritical scaling: v(x) = ħ^{γ/2} u(ħ^{1+(p−2)γ/4} x) with
//! κ = ħ^{(p−2)γ/2} and ε = ħ^{1+(p−2)γ/4}; both are always derived from
//! (ħ, γ, p), never stored.  Critical scaling (p = 2N/(N−2)): exponents
//! built from α ∈ (0, γ), with λ = ħ^{(p−2)α/2}, ζ = ħ^{γ−α},
//! ϵ = ħ^{1+(p−2)α/4}; α = γ is rejected (no fast-decay limit profile
//! exists there).

use serde::Serialize;
use thiserror::Error;

use crate::closed_form::TalentiBubble;
use crate::energy::Assembled;
use crate::exec;
use crate::grid::{Field, Grid, GridError};
use crate::interp::Pchip;
use crate::potentials::{MSet, Potentials, ScalarFn};
use crate::shooting::GroundState;
use crate::solver::{solve, SolveConfig, SolveError, SolveOutcome};
use std::sync::Arc;

#[derive(Debug, Error)]
pub enum SemiclassicalError {
    #[error("invalid rescale parameters: {0}")]
    BadParam(String),
    #[error("critical exponent requires 0 < alpha < gamma strictly (alpha = gamma has no fast-decay limit profile); got alpha = {alpha}, gamma = {gamma}")]
    AlphaOutOfRange { alpha: f64, gamma: f64 },
    #[error("rescaling needs radial grids")]
    NotRadial,
    #[error("rescaled coordinates exceed the source grid (need {need:.3e}, have {have:.3e})")]
    OutOfSupport { need: f64, have: f64 },
    #[error("refusing to report on a non-converged outcome")]
    NotConverged,
    #[error("profile peak must be positive, got {0}")]
    NonPositivePeak(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Subcritical rescaling map; κ and ε are recomputed on demand.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RescaleMap {
    pub hbar: f64,
    pub gamma: f64,
    pub p: f64,
}

impl RescaleMap {
    pub fn new(hbar: f64, gamma: f64, p: f64) -> Result<Self, SemiclassicalError> {
        if !(hbar > 0.0 && gamma >= 0.0 && p > 2.0) {
            return Err(SemiclassicalError::BadParam(format!(
                "need hbar > 0, gamma ≥ 0, p > 2; got ({hbar}, {gamma}, {p})"
            )));
        }
        Ok(Self { hbar, gamma, p })
    }

    /// ħ from a target ε: ħ = ε^{1/(1+(p−2)γ/4)}.
    pub fn from_eps(eps: f64, gamma: f64, p: f64) -> Result<Self, SemiclassicalError> {
        if !(eps > 0.0) {
            return Err(SemiclassicalError::BadParam(format!("eps must be positive, got {eps}")));
        }
        let hbar = eps.powf(1.0 / (1.0 + (p - 2.0) * gamma / 4.0));
        Self::new(hbar, gamma, p)
    }

    pub fn kappa(&self) -> f64 {
        self.hbar.powf((self.p - 2.0) * self.gamma / 2.0)
    }

    pub fn eps(&self) -> f64 {
        self.hbar.powf(1.0 + (self.p - 2.0) * self.gamma / 4.0)
    }

    /// The alternative parameterization κ = ε^{2(p−2)γ/(4+(p−2)γ)} — a pure
    /// algebra cross-check of the two exponent conventions.
    pub fn kappa_from_eps(&self) -> f64 {
        let e = (self.p - 2.0) * self.gamma;
        self.eps().powf(2.0 * e / (4.0 + e))
    }
}

/// Critical-case rescaling (p = 2N/(N−2)) with the auxiliary exponent α.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalRescaleMap {
    pub hbar: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub dim: usize,
}

impl CriticalRescaleMap {
    pub fn new(hbar: f64, gamma: f64, alpha: f64, dim: usize) -> Result<Self, SemiclassicalError> {
        if !(hbar > 0.0 && gamma > 0.0 && dim >= 3) {
            return Err(SemiclassicalError::BadParam(format!(
                "need hbar > 0, gamma > 0, dim ≥ 3; got ({hbar}, {gamma}, {dim})"
            )));
        }
        if !(alpha > 0.0 && alpha < gamma) {
            return Err(SemiclassicalError::AlphaOutOfRange { alpha, gamma });
        }
        Ok(Self { hbar, gamma, alpha, dim })
    }

    pub fn p(&self) -> f64 {
        2.0 * self.dim as f64 / (self.dim as f64 - 2.0)
    }

    /// (λ, ζ, ϵ).
    pub fn params(&self) -> (f64, f64, f64) {
        let p = self.p();
        let lambda = self.hbar.powf((p - 2.0) * self.alpha / 2.0);
        let zeta = self.hbar.powf(self.gamma - self.alpha);
        let eps = self.hbar.powf(1.0 + (p - 2.0) * self.alpha / 4.0);
        (lambda, zeta, eps)
    }
}

/// v(x) = ħ^{γ/2} u(εx), resampled by monotone cubic interpolation onto the
/// target grid.  Radial grids only.
pub fn rescale_forward(
    map: &RescaleMap,
    u: &Field,
    target: std::sync::Arc<Grid>,
) -> Result<Field, SemiclassicalError> {
    rescale(u, target, map.eps(), map.hbar.powf(map.gamma / 2.0))
}

/// u(y) = ħ^{−γ/2} v(y/ε).
pub fn rescale_backward(
    map: &RescaleMap,
    v: &Field,
    target: std::sync::Arc<Grid>,
) -> Result<Field, SemiclassicalError> {
    rescale(v, target, 1.0 / map.eps(), map.hbar.powf(-map.gamma / 2.0))
}

fn rescale(
    src: &Field,
    target: std::sync::Arc<Grid>,
    coord_scale: f64,
    amp: f64,
) -> Result<Field, SemiclassicalError> {
    let src_radii = match &**src.grid() {
        Grid::Radial(rg) => rg.nodes().to_vec(),
        _ => return Err(SemiclassicalError::NotRadial),
    };
    if !matches!(&*target, Grid::Radial(_)) {
        return Err(SemiclassicalError::NotRadial);
    }
    let need = coord_scale * target.extent();
    let have = src.grid().extent();
    if need > have * (1.0 + 1e-12) {
        return Err(SemiclassicalError::OutOfSupport { need, have });
    }
    let interp = Pchip::new(src_radii, src.values().to_vec())
        .map_err(|e| SemiclassicalError::BadParam(e.to_string()))?;
    let values = exec::map_by(target.len(), |i| amp * interp.eval(coord_scale * target.node_radius(i)));
    Ok(Field::new(target, values)?)
}

/// Exponential tail fit of a field around its peak.
///
/// The rate ξ is the least-squares slope of ln v against |x − x_peak| over
/// the window where v drops from 10⁻³ to 10⁻⁸ of its maximum (inside the
/// comparison-principle regime, above the noise floor).  The comparison
/// bound is then C·exp(−ξ√κ|x − x_peak|) with C anchored on the first fifth
/// of the window, checked nodewise on everything beyond.
#[derive(Debug, Clone, Serialize)]
pub struct TailFit {
    pub xi: f64,
    pub anchor_c: f64,
    pub window: (f64, f64),
    /// 4ξ² < V₀ — the comparison-function admissibility condition.
    pub admissible: bool,
    /// v ≤ C exp(−ξ√κ|x−x_peak|) nodewise beyond the anchor region.
    pub dominated: bool,
    pub n_points: usize,
}

pub fn fit_tail(field: &Field, kappa: f64, v0: f64) -> Option<TailFit> {
    let grid = field.grid();
    let peak_idx = field.argmax();
    let peak_pos = grid.position(peak_idx);
    let vmax = field.values()[peak_idx];
    if !(vmax > 0.0) {
        return None;
    }
    let (lo, hi) = (1.0e-8 * vmax, 1.0e-3 * vmax);
    let dist = |i: usize| {
        let p = grid.position(i);
        let mut d2 = 0.0;
        for a in 0..3 {
            let d = p[a] - peak_pos[a];
            d2 += d * d;
        }
        d2.sqrt()
    };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 0..field.len() {
        let v = field.values()[i];
        if v >= lo && v <= hi {
            pts.push((dist(i), v.ln()));
        }
    }
    if pts.len() < 8 {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let xi = -slope;
    if !(xi > 0.0) {
        return None;
    }

    let s_start = pts[0].0;
    let s_anchor = s_start + 0.2 * (pts[pts.len() - 1].0 - s_start);
    let rate = xi * kappa.sqrt();
    let mut anchor_c = 0.0f64;
    for i in 0..field.len() {
        let v = field.values()[i];
        let s = dist(i);
        if v > 0.0 && s >= s_start && s <= s_anchor {
            anchor_c = anchor_c.max(v * (rate * s).exp());
        }
    }
    let mut dominated = anchor_c > 0.0;
    for i in 0..field.len() {
        let v = field.values()[i];
        let s = dist(i);
        if v > 0.0 && s > s_anchor {
            if v > anchor_c * (-rate * s).exp() * (1.0 + 1e-9) {
                dominated = false;
                break;
            }
        }
    }
    Some(TailFit {
        xi,
        anchor_c,
        window: (s_start, pts[pts.len() - 1].0),
        admissible: 4.0 * xi * xi < v0,
        dominated,
        n_points: pts.len(),
    })
}

/// Concentration diagnostics for one converged solve.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    /// Location of the maximum of u_ħ in original coordinates (= ε·argmax).
    pub x_hbar: [f64; 3],
    pub x_hbar_norm: f64,
    pub dist_to_m: f64,
    /// ‖v_ε(·+shift) − U‖_{D^{1,2}} after optimal discrete translation.
    pub profile_error_d12: f64,
    pub tail_rate_xi: f64,
    pub tail_admissible: bool,
    pub tail_dominated: bool,
    pub energy_gap: f64,
    /// ∫χ_ε v₊^{p/2} ≥ 1, i.e. the penalty is feeling the field.
    pub q_active: bool,
    pub hbar: f64,
    pub kappa: f64,
    pub eps: f64,
}

pub fn concentration_report(
    outcome: &SolveOutcome,
    asm: &Assembled,
    hbar: f64,
    limit: &GroundState,
    c_m: f64,
) -> Result<ConcentrationReport, SemiclassicalError> {
    if !outcome.converged {
        return Err(SemiclassicalError::NotConverged);
    }
    let grid = outcome.field.grid();
    let peak_idx = outcome.field.argmax();
    let peak_pos = grid.position(peak_idx);
    let eps = asm.eps;
    let x_hbar = [eps * peak_pos[0], eps * peak_pos[1], eps * peak_pos[2]];
    let x_norm = (x_hbar[0] * x_hbar[0] + x_hbar[1] * x_hbar[1] + x_hbar[2] * x_hbar[2]).sqrt();
    let dist_to_m = asm.pots.mset.dist(&x_hbar);

    let profile_error_d12 = profile_error(outcome, grid, limit, peak_idx)?;

    let tail = fit_tail(&outcome.field, asm.kappa, asm.pots.v0);
    let parts = asm.energy_parts(outcome.field.values());
    Ok(ConcentrationReport {
        x_hbar,
        x_hbar_norm: x_norm,
        dist_to_m,
        profile_error_d12,
        tail_rate_xi: tail.as_ref().map(|t| t.xi).unwrap_or(f64::NAN),
        tail_admissible: tail.as_ref().map(|t| t.admissible).unwrap_or(false),
        tail_dominated: tail.as_ref().map(|t| t.dominated).unwrap_or(false),
        energy_gap: (parts.gamma - c_m).abs(),
        q_active: parts.q_mass >= 1.0,
        hbar,
        kappa: asm.kappa,
        eps,
    })
}

/// D^{1,2} error against the limit profile, minimized over discrete shifts
/// of the center near the field's maximum node.
fn profile_error(
    outcome: &SolveOutcome,
    grid: &std::sync::Arc<Grid>,
    limit: &GroundState,
    peak_idx: usize,
) -> Result<f64, SemiclassicalError> {
    let candidates: Vec<[f64; 3]> = match &**grid {
        Grid::Radial(_) => vec![[0.0, 0.0, 0.0]],
        Grid::Tensor(tg) => {
            let h = tg.spacing();
            let c = grid.position(peak_idx);
            let mut cands = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    cands.push([c[0] + dx as f64 * h, c[1] + dy as f64 * h, c[2]]);
                }
            }
            cands
        }
    };
    let mut best = f64::INFINITY;
    for center in &candidates {
        let u_field = Field::from_fn(grid.clone(), |pos| {
            let mut d2 = 0.0;
            for a in 0..3 {
                let d = pos[a] - center[a];
                d2 += d * d;
            }
            limit.eval(d2.sqrt())
        })?;
        let d = outcome.field.d12_distance(&u_field)?;
        best = best.min(d);
    }
    Ok(best)
}

/// Fit μ of the Talenti family to a critical-case solution by peak height,
/// then report the worst pointwise relative error over r ≤ 10/μ.
pub fn critical_profile_fit(
    outcome: &SolveOutcome,
    dim: usize,
    m: f64,
) -> Result<(f64, f64), SemiclassicalError> {
    if !outcome.converged {
        return Err(SemiclassicalError::NotConverged);
    }
    let peak = outcome.field.max_value();
    if !(peak > 0.0) {
        return Err(SemiclassicalError::NonPositivePeak(peak));
    }
    let mu = TalentiBubble::mu_from_peak(dim, m, peak)
        .map_err(|e| SemiclassicalError::BadParam(e.to_string()))?;
    let bubble = TalentiBubble::new(dim, m, mu)
        .map_err(|e| SemiclassicalError::BadParam(e.to_string()))?;
    let grid = outcome.field.grid();
    let mut worst = 0.0f64;
    for i in 0..outcome.field.len() {
        let r = grid.node_radius(i);
        if r <= 10.0 / mu {
            let b = bubble.eval(r);
            worst = worst.max((outcome.field.values()[i] - b).abs() / b);
        }
    }
    Ok((mu, worst))
}

/// μ from the half-height radius of a radial profile (independent of the
/// peak-based fit).
pub fn mu_from_profile_half_width(field: &Field, dim: usize) -> Option<f64> {
    let grid = field.grid();
    let peak = field.max_value();
    if !(peak > 0.0) {
        return None;
    }
    let half = 0.5 * peak;
    for i in 1..field.len() {
        let (v0, v1) = (field.values()[i - 1], field.values()[i]);
        if v0 >= half && v1 < half {
            let (r0, r1) = (grid.node_radius(i - 1), grid.node_radius(i));
            let t = (v0 - half) / (v0 - v1);
            let r_half = r0 + t * (r1 - r0);
            return TalentiBubble::mu_from_half_width(dim, r_half).ok();
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantRow {
    pub label: String,
    pub x_hbar: [f64; 3],
    pub x_hbar_norm: f64,
    pub dist_to_m: f64,
    pub profile_error_d12: f64,
}

/// Result of the V-irrelevance experiment: the concentration point must not
/// move across admissible V variants, while shifting K's maximum must move
/// it accordingly.
#[derive(Debug, Clone, Serialize)]
pub struct VIrrelevanceTable {
    pub rows: Vec<VariantRow>,
    pub control: VariantRow,
    /// Worst pairwise distance between x_ħ over the V variants.
    pub max_pairwise_x_dist: f64,
    /// |x_ħ(control) − x_ħ(base)|.
    pub control_shift: f64,
    /// One grid cell in original coordinates (ε·spacing).
    pub cell_size: f64,
}

pub struct VariantSpec {
    pub label: String,
    pub v: ScalarFn,
    pub v0: f64,
}

pub struct ExperimentBase {
    pub grid: std::sync::Arc<Grid>,
    pub pen: crate::energy::Penalization,
    pub kappa: f64,
    pub eps: f64,
    pub transform: crate::transform::DualTransform,
    pub p: f64,
    pub k: ScalarFn,
    pub m: f64,
    pub k0: f64,
    pub mset: MSet,
    pub hbar: f64,
}

/// Solve the same problem under several V variants (fixed K), plus one
/// control with K's maximum shifted.  Variants run concurrently.
pub fn v_irrelevance_experiment(
    base: &ExperimentBase,
    variants: &[VariantSpec],
    control_k: (ScalarFn, MSet),
    ground: &GroundState,
    solve_cfg: &SolveConfig,
    limit_c_m: f64,
) -> Result<VIrrelevanceTable, SolveError> {
    struct Job {
        label: String,
        v: ScalarFn,
        v0: f64,
        k: ScalarFn,
        mset: MSet,
    }
    let mut jobs: Vec<Job> = variants
        .iter()
        .map(|s| Job {
            label: s.label.clone(),
            v: s.v.clone(),
            v0: s.v0,
            k: base.k.clone(),
            mset: base.mset.clone(),
        })
        .collect();
    jobs.push(Job {
        label: "control-k-shift".into(),
        v: variants[0].v.clone(),
        v0: variants[0].v0,
        k: control_k.0.clone(),
        mset: control_k.1.clone(),
    });

    let rows: Vec<Result<VariantRow, SolveError>> = exec::map_collect(&jobs, |job| {
        let pots = Potentials {
            v: job.v.clone(),
            k: job.k.clone(),
            m: base.m,
            k0: base.k0,
            v0: job.v0,
            mset: job.mset.clone(),
        };
        let asm = Assembled::new(
            base.grid.clone(),
            pots,
            base.pen.clone(),
            base.kappa,
            base.eps,
            base.transform,
            base.p,
        )?;
        let cfg = SolveConfig { init_center: job.mset.representative(), ..solve_cfg.clone() };
        let out = solve(&cfg, &asm, ground)?;
        if !out.converged {
            return Err(SolveError::Config(format!("variant {} did not converge", job.label)));
        }
        let rep = concentration_report(&out, &asm, base.hbar, ground, limit_c_m)
            .map_err(|e| SolveError::Config(e.to_string()))?;
        Ok(VariantRow {
            label: job.label.clone(),
            x_hbar: rep.x_hbar,
            x_hbar_norm: rep.x_hbar_norm,
            dist_to_m: rep.dist_to_m,
            profile_error_d12: rep.profile_error_d12,
        })
    });
    let mut ok_rows = Vec::new();
    for r in rows {
        ok_rows.push(r?);
    }
    let control = ok_rows.pop().expect("control job present");
    let mut max_pair = 0.0f64;
    for i in 0..ok_rows.len() {
        for j in i + 1..ok_rows.len() {
            let d: f64 = (0..3)
                .map(|a| (ok_rows[i].x_hbar[a] - ok_rows[j].x_hbar[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            max_pair = max_pair.max(d);
        }
    }
    let control_shift: f64 = (0..3)
        .map(|a| (control.x_hbar[a] - ok_rows[0].x_hbar[a]).powi(2))
        .sum::<f64>()
        .sqrt();
    let cell = match &*base.grid {
        Grid::Tensor(tg) => base.eps * tg.spacing(),
        Grid::Radial(_) => base.eps * base.grid.extent() / base.grid.len() as f64,
    };
    Ok(VIrrelevanceTable {
        rows: ok_rows,
        control,
        max_pairwise_x_dist: max_pair,
        control_shift,
        cell_size: cell,
    })
}

/// Helper for closures used as potentials in experiments.
pub fn scalar_fn(f: impl Fn(&[f64; 3]) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcritical_exponents() {
        let map = RescaleMap::new(0.1, 2.0, 4.0).unwrap();
        assert!((map.kappa() - 0.01).abs() < 1e-15);
        assert!((map.eps() - 0.01).abs() < 1e-15);
        let id = RescaleMap::new(1.0, 3.7, 4.0).unwrap();
        assert_eq!(id.kappa(), 1.0);
        assert_eq!(id.eps(), 1.0);
    }

    #[test]
    fn exponent_identities_across_matrix() {
        for &hbar in &[0.9, 0.5, 0.2, 0.05, 0.01] {
            for &gamma in &[0.5, 1.0, 2.0, 8.0] {
                for &p in &[10.0 / 3.0, 4.0, 5.5] {
                    let map = RescaleMap::new(hbar, gamma, p).unwrap();
                    let k1 = map.kappa();
                    let k2 = map.kappa_from_eps();
                    assert!((k1 - k2).abs() <= 1e-12 * k1.max(1e-300), "kappa mismatch");
                    // √κ/ε = 1/ħ identically.
                    let lhs = map.kappa().sqrt() / map.eps();
                    assert!((lhs - 1.0 / hbar).abs() <= 1e-12 / hbar);
                }
            }
        }
    }

    #[test]
    fn critical_exponents() {
        // N = 5 ⇒ p = 10/3; ħ = 0.1, γ = 2, α = 1.
        let map = CriticalRescaleMap::new(0.1, 2.0, 1.0, 5).unwrap();
        let (lambda, zeta, eps) = map.params();
        assert!((lambda - 0.1f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((lambda - 0.215_443_469_003_188_37).abs() < 1e-12);
        assert!((zeta - 0.1).abs() < 1e-15);
        assert!((eps - 0.046_415_888_336_127_795).abs() < 1e-12);
        let unit = CriticalRescaleMap::new(1.0, 2.0, 1.0, 5).unwrap();
        let (l, z, e) = unit.params();
        assert_eq!((l, z, e), (1.0, 1.0, 1.0));
    }

    #[test]
    fn alpha_equal_gamma_rejected() {
        assert!(matches!(
            CriticalRescaleMap::new(0.1, 2.0, 2.0, 5),
            Err(SemiclassicalError::AlphaOutOfRange { .. })
        ));
        assert!(CriticalRescaleMap::new(0.1, 2.0, 2.5, 5).is_err());
        assert!(CriticalRescaleMap::new(0.1, 2.0, 0.0, 5).is_err());
    }

    #[test]
    fn rescale_round_trip_on_bubble() {
        // ħ = 0.4, γ = 2, p = 4 ⇒ ε = 0.16; the v-grid must cover
        // extent(u)/ε for the round trip to stay inside support.
        let map = RescaleMap::new(0.4, 2.0, 4.0).unwrap();
        let bubble = crate::closed_form::TalentiBubble::new(5, 1.0, 1.0).unwrap();
        let u_grid = Grid::radial_geometric(5, 1e-4, 50.0, 5000).unwrap();
        let v_grid = Grid::radial_geometric(5, 1e-4, 50.0 / map.eps(), 8000).unwrap();
        let u = Field::from_fn(u_grid.clone(), |pos| bubble.eval(pos[0])).unwrap();
        let v = rescale_forward(&map, &u, v_grid.clone()).unwrap();
        let u2 = rescale_backward(&map, &v, u_grid.clone()).unwrap();
        let mut worst = 0.0f64;
        for i in 0..u_grid.len() {
            worst = worst.max((u2.values()[i] - u.values()[i]).abs());
        }
        assert!(worst < 1e-6 * bubble.peak(), "round trip error {worst}");
        // Degenerate map ħ = 1 is the identity.
        let id = RescaleMap::new(1.0, 2.0, 4.0).unwrap();
        let w = rescale_forward(&id, &u, u_grid.clone()).unwrap();
        let mut worst_id = 0.0f64;
        for i in 0..u_grid.len() {
            worst_id = worst_id.max((w.values()[i] - u.values()[i]).abs());
        }
        assert!(worst_id < 1e-9);
        // Pushing the field outside its support is a domain error.
        let too_big = Grid::radial_geometric(5, 1e-4, 60.0 / map.eps(), 100).unwrap();
        assert!(matches!(
            rescale_forward(&map, &u, too_big),
            Err(SemiclassicalError::OutOfSupport { .. })
        ));
    }

    #[test]
    fn tail_fit_on_synthetic_exponential() {
        let grid = Grid::radial_geometric(5, 1e-3, 400.0, 4000).unwrap();
        let kappa = 0.04f64;
        let v0 = 0.5;
        let rate = (kappa * v0).sqrt(); // 0.141…
        let f = Field::from_fn(grid.clone(), |pos| (-rate * pos[0]).exp()).unwrap();
        let fit = fit_tail(&f, kappa, v0).unwrap();
        // Fitted rate in grid coordinates ≈ √(κV₀).
        assert!((fit.xi - rate).abs() < 0.05 * rate, "xi = {}", fit.xi);
        assert!(fit.admissible); // 4κV₀ < V₀ for κ < 1/4
        assert!(fit.dominated);
    }

    #[test]
    fn tail_fit_rejects_algebraic_decay() {
        let grid = Grid::radial_geometric(5, 1e-3, 4.0e4, 6000).unwrap();
        let f = Field::from_fn(grid.clone(), |pos| (1.0 + pos[0] * pos[0]).powf(-1.5)).unwrap();
        let fit = fit_tail(&f, 0.04, 0.5).unwrap();
        // The slower-than-envelope decay must break dominance downstream.
        assert!(!fit.dominated);
    }

    #[test]
    fn half_width_mu_matches_peak_mu() {
        let b = crate::closed_form::TalentiBubble::new(5, 1.0, 0.7).unwrap();
        let grid = Grid::radial_geometric(5, 1e-4, 100.0, 4000).unwrap();
        let f = Field::from_fn(grid, |pos| b.eval(pos[0])).unwrap();
        let mu_hw = mu_from_profile_half_width(&f, 5).unwrap();
        assert!((mu_hw - 0.7).abs() < 1e-3, "mu from half width {mu_hw}");
    }
}
