//! The penalized dual energy on discrete fields.
//!
//! ```text
//! P_ε(v) = ½∫(|∇v|² + κV_ε|G⁻¹(v)|²) − (1/p)∫K_ε|G⁻¹(v₊)|^p
//! Q_ε(v) = (∫χ_ε v₊^{p/2} − 1)₊²,   χ_ε = 0 on 𝒪_ε, ε^{−τ} outside
//! Γ_ε    = P_ε + Q_ε
//! ```
//!
//! with V_ε(x) = V(εx), K_ε(x) = K(εx).  The source and penalty terms use
//! the positive part v₊; the V-term uses full v.  The weak gradient is the
//! exact variation of the discrete energy (the Laplacian part comes from
//! the same edge sum as the Dirichlet energy), so central differences of
//! Γ_ε reproduce it to roundoff.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::closed_form::dilation_endpoint;
use crate::exec;
use crate::grid::{Field, Grid, GridError};
use crate::potentials::{Potentials, RegionO};
use crate::shooting::GroundState;
use crate::transform::DualTransform;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("invalid energy setup: {0}")]
    BadParam(String),
    #[error("initializer center {center:?} scaled by 1/ε lies outside the grid (extent {extent})")]
    CenterOutsideGrid { center: [f64; 3], extent: f64 },
    #[error("radial grids only support the origin as initializer center")]
    CenterOffAxis,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Penalization geometry: the region 𝒪, the cut-off radius β, the penalty
/// exponent τ, and the dilation endpoint t₀.
#[derive(Debug, Clone)]
pub struct Penalization {
    pub tau: f64,
    pub region: RegionO,
    pub beta: f64,
    pub t0: f64,
}

impl Penalization {
    /// β must stay below dist(𝓜, 𝒪ᶜ)/100 and t₀ must put the dilation
    /// energy strictly below −2.
    pub fn new(
        tau: f64,
        region: RegionO,
        beta: f64,
        ground_dirichlet: f64,
        dim: usize,
        mset_rep: &[f64; 3],
    ) -> Result<Self, EnergyError> {
        region.validate().map_err(EnergyError::BadParam)?;
        if !(tau > 0.0) {
            return Err(EnergyError::BadParam(format!("tau must be positive, got {tau}")));
        }
        let dist = region.dist_to_complement(mset_rep);
        if !(beta > 0.0 && beta < dist / 100.0) {
            return Err(EnergyError::BadParam(format!(
                "beta = {beta} must lie in (0, dist(M, complement of O)/100 = {})",
                dist / 100.0
            )));
        }
        // Dilation paths are N ≥ 3 machinery (the t^{N−2} coefficient
        // degenerates at N = 2); low-dimensional labs get a nominal t₀.
        let t0 = if dim >= 3 {
            dilation_endpoint(ground_dirichlet, dim)
                .map_err(|e| EnergyError::BadParam(e.to_string()))?
        } else {
            2.0
        };
        Ok(Self { tau, region, beta, t0 })
    }
}

/// C² polynomial bump: 1 on [0, β], 0 beyond 2β, quintic smoothstep in
/// between.
pub fn cutoff(s: f64, beta: f64) -> f64 {
    if s <= beta {
        1.0
    } else if s >= 2.0 * beta {
        0.0
    } else {
        let q = (s - beta) / beta;
        1.0 - q * q * q * (10.0 - 15.0 * q + 6.0 * q * q)
    }
}

/// A problem instance assembled on a grid: transform, exponents, and the
/// per-node samples of V_ε, K_ε and χ_ε.
pub struct Assembled {
    pub grid: Arc<Grid>,
    pub transform: DualTransform,
    pub p: f64,
    pub kappa: f64,
    pub eps: f64,
    pub pots: Potentials,
    pub pen: Penalization,
    v_eps: Vec<f64>,
    k_eps: Vec<f64>,
    chi: Vec<f64>,
}

/// Γ_ε term by term.
#[derive(Debug, Clone, Copy)]
pub struct EnergyParts {
    pub dirichlet: f64,
    /// ∫V_ε|G⁻¹(v)|² (κ/2 not yet applied).
    pub mass: f64,
    /// ∫K_ε|G⁻¹(v₊)|^p (1/p not yet applied).
    pub source: f64,
    /// ∫χ_ε v₊^{p/2}.
    pub q_mass: f64,
    pub p_eps: f64,
    pub q_eps: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub l_m: f64,
    pub p_eps: f64,
    pub q_eps: f64,
    pub gamma_eps: f64,
    pub pohozaev_residual: f64,
    pub gradient_norm: f64,
}

impl Assembled {
    pub fn new(
        grid: Arc<Grid>,
        pots: Potentials,
        pen: Penalization,
        kappa: f64,
        eps: f64,
        transform: DualTransform,
        p: f64,
    ) -> Result<Self, EnergyError> {
        if !(kappa > 0.0 && eps > 0.0) {
            return Err(EnergyError::BadParam(format!(
                "kappa and eps must be positive, got {kappa}, {eps}"
            )));
        }
        if !(p > 2.0) {
            return Err(EnergyError::BadParam(format!("p must exceed 2, got {p}")));
        }
        let n = grid.len();
        let chi_out = eps.powf(-pen.tau);
        let mut v_eps = vec![0.0; n];
        let mut k_eps = vec![0.0; n];
        let mut chi = vec![0.0; n];
        for i in 0..n {
            let pos = grid.position(i);
            let xp = [eps * pos[0], eps * pos[1], eps * pos[2]];
            v_eps[i] = (pots.v)(&xp);
            k_eps[i] = (pots.k)(&xp);
            chi[i] = if pen.region.contains(&xp) { 0.0 } else { chi_out };
        }
        Ok(Self { grid, transform, p, kappa, eps, pots, pen, v_eps, k_eps, chi })
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn energy_parts(&self, v: &[f64]) -> EnergyParts {
        let tr = self.transform;
        let p = self.p;
        let dirichlet = self.grid.dirichlet_energy(v);
        let (mass, source, q_mass) = exec::sum_by(v.len(), |i| {
            let w = self.grid.weight(i);
            let u = tr.invert(v[i].abs());
            let mass = w * self.v_eps[i] * u * u;
            let (src, qm) = if v[i] > 0.0 {
                (w * self.k_eps[i] * u.powf(p), w * self.chi[i] * v[i].powf(0.5 * p))
            } else {
                (0.0, 0.0)
            };
            (mass, src, qm)
        });
        let p_eps = 0.5 * dirichlet + 0.5 * self.kappa * mass - source / p;
        let q_excess = (q_mass - 1.0).max(0.0);
        let q_eps = q_excess * q_excess;
        EnergyParts { dirichlet, mass, source, q_mass, p_eps, q_eps, gamma: p_eps + q_eps }
    }

    pub fn gamma(&self, v: &[f64]) -> f64 {
        self.energy_parts(v).gamma
    }

    /// Weak gradient of Γ_ε in the weighted L² inner product:
    /// −Δv + κV_ε G⁻¹(v)/g(G⁻¹(v)) − K_ε|G⁻¹(v₊)|^{p−2}G⁻¹(v₊)/g(G⁻¹(v₊))
    /// + p(∫χ_ε v₊^{p/2} − 1)₊ χ_ε v₊^{p/2−1}.
    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let tr = self.transform;
        let p = self.p;
        let q_mass: f64 = exec::sum_by(v.len(), |i| {
            if v[i] > 0.0 {
                self.grid.weight(i) * self.chi[i] * v[i].powf(0.5 * p)
            } else {
                0.0
            }
        });
        let q_fac = p * (q_mass - 1.0).max(0.0);
        let lap = self.grid.weak_neg_laplacian(v);
        exec::map_by(v.len(), |i| {
            let mut g = lap[i] + self.kappa * self.v_eps[i] * tr.mass_slope(v[i]);
            if v[i] > 0.0 {
                let u = tr.invert(v[i]);
                g -= self.k_eps[i] * u.powf(p - 1.0) / tr.slope(u);
                g += q_fac * self.chi[i] * v[i].powf(0.5 * p - 1.0);
            }
            g
        })
    }

    /// ‖f‖ in the weighted L² inner product.
    pub fn l2w_norm(&self, f: &[f64]) -> f64 {
        self.grid.integrate(|i| f[i] * f[i]).sqrt()
    }

    /// L_m(v) = ½∫|∇v|² − (m/p)∫|G⁻¹(v)|^p with the problem's transform.
    pub fn l_m(&self, v: &[f64]) -> f64 {
        let tr = self.transform;
        let p = self.p;
        let d = self.grid.dirichlet_energy(v);
        let lp: f64 =
            self.grid.integrate(|i| tr.invert(v[i].abs()).powf(p));
        0.5 * d - self.pots.m / p * lp
    }

    /// Normalized Pohozaev residual of the limit functional:
    /// ((N−2)/(2N)∫|∇v|² − (m/p)∫|G⁻¹(v)|^p)/∫|∇v|²; 0 for the zero field.
    pub fn pohozaev_residual(&self, v: &[f64]) -> f64 {
        let tr = self.transform;
        let p = self.p;
        let nf = self.grid.dim() as f64;
        let d = self.grid.dirichlet_energy(v);
        if d == 0.0 {
            return 0.0;
        }
        let lp: f64 = self.grid.integrate(|i| tr.invert(v[i].abs()).powf(p));
        ((nf - 2.0) / (2.0 * nf) * d - self.pots.m / p * lp) / d
    }

    pub fn report(&self, v: &[f64]) -> EnergyReport {
        let parts = self.energy_parts(v);
        let grad = self.gradient(v);
        EnergyReport {
            l_m: self.l_m(v),
            p_eps: parts.p_eps,
            q_eps: parts.q_eps,
            gamma_eps: parts.gamma,
            pohozaev_residual: self.pohozaev_residual(v),
            gradient_norm: self.l2w_norm(&grad),
        }
    }

    /// The cut-off dilated initializer W_{ε,t}(x) = φ(ε(x − y/ε))·U((x−y/ε)/t)
    /// centered at y ∈ 𝓜^β (original coordinates); W_{ε,0} = 0.
    pub fn build_w(
        &self,
        t: f64,
        center: &[f64; 3],
        ground: &GroundState,
    ) -> Result<Field, EnergyError> {
        build_w_on(&self.grid, self.eps, t, center, &self.pen, ground)
    }

    /// Γ_ε along the dilation fiber t ↦ v(·/t), evaluated by coordinate
    /// scaling instead of resampling: the Dirichlet part scales by t^{N−2}
    /// and every pointwise term by t^N with potentials read at εtx.
    pub fn fiber_cache(&self, v: &[f64]) -> FiberCache {
        let tr = self.transform;
        let p = self.p;
        let n = v.len();
        let mut u2 = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut vp2 = vec![0.0; n];
        for i in 0..n {
            let u = tr.invert(v[i].abs());
            u2[i] = u * u;
            if v[i] > 0.0 {
                up[i] = u.powf(p);
                vp2[i] = v[i].powf(0.5 * p);
            }
        }
        FiberCache { dirichlet: self.grid.dirichlet_energy(v), u2, up, vp2 }
    }

    pub fn fiber_gamma(&self, cache: &FiberCache, t: f64) -> f64 {
        let nf = self.grid.dim() as f64;
        let chi_out = self.eps.powf(-self.pen.tau);
        let (mass, source, q_mass) = exec::sum_by(cache.u2.len(), |i| {
            let w = self.grid.weight(i);
            let pos = self.grid.position(i);
            let xp = [self.eps * t * pos[0], self.eps * t * pos[1], self.eps * t * pos[2]];
            let chi = if self.pen.region.contains(&xp) { 0.0 } else { chi_out };
            (
                w * (self.pots.v)(&xp) * cache.u2[i],
                w * (self.pots.k)(&xp) * cache.up[i],
                w * chi * cache.vp2[i],
            )
        });
        let tm = t.powf(nf - 2.0);
        let tn = t.powf(nf);
        let p_eps = 0.5 * tm * cache.dirichlet + 0.5 * self.kappa * tn * mass
            - tn * source / self.p;
        let q_excess = (tn * q_mass - 1.0).max(0.0);
        p_eps + q_excess * q_excess
    }

    /// Maximize the dilation fiber on [t_lo, t_hi] by golden section.
    pub fn fiber_argmax(&self, cache: &FiberCache, t_lo: f64, t_hi: f64) -> (f64, f64) {
        let f = |t: f64| self.fiber_gamma(cache, t);
        golden_max(f, t_lo, t_hi, 1.0e-6)
    }

    /// D_ε = max_{s∈[0,1]} Γ_ε(W_{ε,st₀}) along the dilation path, by golden
    /// section; returns (D_ε, argmax t).  An upper bound for the minimax
    /// level C_ε.
    pub fn minimax_path_level(
        &self,
        center: &[f64; 3],
        ground: &GroundState,
    ) -> Result<(f64, f64), EnergyError> {
        let t0 = self.pen.t0;
        let f = |s: f64| {
            let w = self
                .build_w(s * t0, center, ground)
                .expect("path initializer on validated grid");
            self.gamma(w.values())
        };
        let (s_star, d_eps) = golden_max(f, 1.0e-6, 1.0, 1.0e-8);
        Ok((d_eps, s_star * t0))
    }
}

/// Per-node powers reused across fiber evaluations (all t-independent).
pub struct FiberCache {
    pub dirichlet: f64,
    u2: Vec<f64>,
    up: Vec<f64>,
    vp2: Vec<f64>,
}

pub fn build_w_on(
    grid: &Arc<Grid>,
    eps: f64,
    t: f64,
    center: &[f64; 3],
    pen: &Penalization,
    ground: &GroundState,
) -> Result<Field, EnergyError> {
    if t == 0.0 {
        return Ok(Field::zeros(grid.clone()));
    }
    if !(t > 0.0) {
        return Err(EnergyError::BadParam(format!("dilation t must be ≥ 0, got {t}")));
    }
    let c_norm = (center[0] * center[0] + center[1] * center[1] + center[2] * center[2]).sqrt();
    if matches!(**grid, Grid::Radial(_)) && c_norm != 0.0 {
        return Err(EnergyError::CenterOffAxis);
    }
    if c_norm / eps > grid.extent() {
        return Err(EnergyError::CenterOutsideGrid { center: *center, extent: grid.extent() });
    }
    let beta = pen.beta;
    let values = exec::map_by(grid.len(), |i| {
        let pos = grid.position(i);
        let mut d2 = 0.0;
        for a in 0..3 {
            let d = pos[a] - center[a] / eps;
            d2 += d * d;
        }
        let s = d2.sqrt();
        let cut = cutoff(eps * s, beta);
        if cut == 0.0 {
            0.0
        } else {
            cut * ground.eval(s / t)
        }
    });
    Ok(Field::new(grid.clone(), values)?)
}

/// Golden-section maximum of a unimodal function on [a, b].
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a) < tol * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::TalentiBubble;
    use crate::potentials::MSet;
    use std::sync::Arc as StdArc;

    fn test_problem(n_nodes: usize) -> Assembled {
        let grid = Grid::radial_geometric(5, 1e-4, 40.0, n_nodes).unwrap();
        let pots = Potentials {
            v: StdArc::new(|x: &[f64; 3]| 1.0 + 0.5 * (-(x[0] * x[0])).exp()),
            k: StdArc::new(|x: &[f64; 3]| {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                1.0 - 0.1 * r2.min(1.0)
            }),
            m: 1.0,
            k0: 1.05,
            v0: 1.0,
            mset: MSet::Point { at: [0.0; 3] },
        };
        let pen = Penalization {
            tau: 1.0,
            region: RegionO::Ball { radius: 2.0 },
            beta: 0.019,
            t0: 1.4,
        };
        Assembled::new(grid, pots, pen, 0.05, 0.1, DualTransform::standard(), 4.0).unwrap()
    }

    #[test]
    fn zero_field_gives_zero_energy() {
        let asm = test_problem(400);
        let v = vec![0.0; asm.grid.len()];
        let parts = asm.energy_parts(&v);
        assert_eq!(parts.gamma, 0.0);
        assert_eq!(parts.q_eps, 0.0);
        assert!(asm.gradient(&v).iter().all(|&g| g == 0.0));
        assert_eq!(asm.pohozaev_residual(&v), 0.0);
    }

    #[test]
    fn gamma_is_p_plus_q() {
        let asm = test_problem(400);
        let v: Vec<f64> = (0..asm.grid.len())
            .map(|i| {
                let r = asm.grid.node_radius(i);
                2.0 * (-(r * r) / 10.0).exp()
            })
            .collect();
        let parts = asm.energy_parts(&v);
        assert_eq!(parts.gamma, parts.p_eps + parts.q_eps);
        assert!(parts.q_eps >= 0.0);
    }

    #[test]
    fn q_vanishes_for_support_inside_region() {
        let asm = test_problem(600);
        // Support within |εx| < 2 means q_mass = 0 exactly.
        let v: Vec<f64> = (0..asm.grid.len())
            .map(|i| {
                let r = asm.grid.node_radius(i);
                if r < 15.0 {
                    (1.0 - r / 15.0).powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let parts = asm.energy_parts(&v);
        assert_eq!(parts.q_mass, 0.0);
        assert_eq!(parts.q_eps, 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let asm = test_problem(300);
        let n = asm.grid.len();
        // Deterministic "random" smooth fields: sums of bumps with LCG
        // coefficients.  One variant is scaled up so the penalty is active.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for case in 0..6 {
            let (c1, c2, c3) = (rnd(), rnd(), rnd());
            // Compact bumps well inside 𝒪_ε; in five dimensions the far
            // shells carry enormous weight, so wide tails would swamp every
            // term.
            let mut v: Vec<f64> = (0..n)
                .map(|i| {
                    let r = asm.grid.node_radius(i);
                    ((c1 - 0.3) * (-(r - 5.0 * c2).powi(2) / 5.0).exp()
                        + c3 * (-(r * r) / 8.0).exp())
                        * cutoff(r, 9.0)
                })
                .collect();
            if case % 2 == 1 {
                // Far-field mass scaled so the penalty is active but tame
                // (q_mass ≈ 3); the shell weights out there are large, so
                // the amplitude must be computed, not guessed.
                let far: Vec<f64> = (0..n)
                    .map(|i| {
                        let r = asm.grid.node_radius(i);
                        (-(r - 28.0).powi(2) / 4.0).exp()
                    })
                    .collect();
                let q_unit: f64 = asm
                    .grid
                    .integrate(|i| asm.chi()[i] * far[i].max(0.0).powf(0.5 * asm.p));
                let amp = (3.0 / q_unit).powf(2.0 / asm.p);
                for i in 0..n {
                    v[i] += amp * far[i];
                }
            }
            let phi: Vec<f64> = (0..n)
                .map(|i| {
                    let r = asm.grid.node_radius(i);
                    (-(r - 6.0 * c1).powi(2) / 9.0).exp() * cutoff(r, 9.0)
                        + 1.0e-3 * (-(r - 28.0).powi(2) / 4.0).exp()
                })
                .collect();
            let g = asm.gradient(&v);
            let gdir: f64 = asm.grid.integrate(|i| g[i] * phi[i]);
            let h = 1.0e-5;
            let vp: Vec<f64> = (0..n).map(|i| v[i] + h * phi[i]).collect();
            let vm: Vec<f64> = (0..n).map(|i| v[i] - h * phi[i]).collect();
            let fd = (asm.gamma(&vp) - asm.gamma(&vm)) / (2.0 * h);
            let denom = gdir.abs().max(1e-9);
            assert!(
                (fd - gdir).abs() / denom < 1e-6,
                "case {case}: fd {fd} vs grad {gdir}"
            );
        }
    }

    #[test]
    fn w_initializer_shape() {
        let asm = test_problem(800);
        let bubble = GroundState::from_bubble(TalentiBubble::new(5, 1.0, 1.0).unwrap());
        let w0 = asm.build_w(0.0, &[0.0; 3], &bubble).unwrap();
        assert!(w0.values().iter().all(|&x| x == 0.0));
        let w = asm.build_w(1.0, &[0.0; 3], &bubble).unwrap();
        // support: zero outside |εx| ≥ 2β
        for i in 0..w.len() {
            let r = asm.grid.node_radius(i);
            if asm.eps * r >= 2.0 * asm.pen.beta {
                assert_eq!(w.values()[i], 0.0);
            }
        }
        assert!(w.values()[0] > 0.0);
        // off-center on a radial grid is rejected
        assert!(matches!(
            asm.build_w(1.0, &[1.0, 0.0, 0.0], &bubble),
            Err(EnergyError::CenterOffAxis)
        ));
    }

    #[test]
    fn penalty_activates_outside_region() {
        let asm = test_problem(600);
        // Mass concentrated outside 𝒪_ε (r > 20) with big amplitude.
        let v: Vec<f64> = (0..asm.grid.len())
            .map(|i| {
                let r = asm.grid.node_radius(i);
                if (25.0..35.0).contains(&r) {
                    3.0
                } else {
                    0.0
                }
            })
            .collect();
        let parts = asm.energy_parts(&v);
        assert!(parts.q_mass > 1.0);
        assert!(parts.q_eps > 0.0);
        // The gradient carries the penalty term where chi > 0.
        let g = asm.gradient(&v);
        let i = (0..asm.grid.len())
            .find(|&i| asm.grid.node_radius(i) > 27.0 && asm.grid.node_radius(i) < 33.0)
            .unwrap();
        assert!(asm.chi()[i] > 0.0);
        assert!(g[i] > 0.0);
    }

    #[test]
    fn golden_section_finds_quadratic_max() {
        let (x, f) = golden_max(|t| 1.0 - (t - 0.7) * (t - 0.7), 0.0, 2.0, 1e-9);
        assert!((x - 0.7).abs() < 1e-6);
        assert!((f - 1.0).abs() < 1e-10);
    }
}
