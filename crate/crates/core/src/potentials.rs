//! Potential pairs (V, K), the penalization region 𝒪, and the assumption
//! checks they must satisfy:
//!
//! * (V): 0 < inf V ≤ V ≤ sup V < ∞;
//! * (K): 0 < sup K < K₀ and max_{∂𝒪} K < m := sup_𝒪 K, with the
//!   concentration set 𝓜 = {x ∈ 𝒪 : K(x) = m}.
//!
//! Both potentials are sampled densely; violations are reported with a
//! witness point rather than thrown.

use std::sync::Arc;

use serde::Serialize;

use crate::dsl::{CompiledExpr, Expr};

pub type ScalarFn = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

/// The set 𝒪 forcing concentration: a ball or annulus around the origin,
/// or an axis-aligned box.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum RegionO {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    BoxRegion { half_width: f64 },
}

impl RegionO {
    pub fn contains(&self, x: &[f64; 3]) -> bool {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        match self {
            RegionO::Ball { radius } => r < *radius,
            RegionO::Annulus { inner, outer } => r > *inner && r < *outer,
            RegionO::BoxRegion { half_width } => x.iter().all(|c| c.abs() < *half_width),
        }
    }

    /// Distance from a point inside 𝒪 to the complement.
    pub fn dist_to_complement(&self, x: &[f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        match self {
            RegionO::Ball { radius } => (radius - r).max(0.0),
            RegionO::Annulus { inner, outer } => (outer - r).min(r - inner).max(0.0),
            RegionO::BoxRegion { half_width } => x
                .iter()
                .map(|c| half_width - c.abs())
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self {
            RegionO::Ball { radius } => *radius,
            RegionO::Annulus { outer, .. } => *outer,
            RegionO::BoxRegion { half_width } => *half_width * 3.0f64.sqrt(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = match self {
            RegionO::Ball { radius } => *radius > 0.0,
            RegionO::Annulus { inner, outer } => *inner >= 0.0 && *outer > *inner,
            RegionO::BoxRegion { half_width } => *half_width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("degenerate region {self:?}"))
        }
    }
}

/// Declared concentration set 𝓜: a point or a centered sphere.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum MSet {
    Point { at: [f64; 3] },
    Sphere { radius: f64 },
}

impl MSet {
    pub fn dist(&self, x: &[f64; 3]) -> f64 {
        match self {
            MSet::Point { at } => {
                let d: f64 = (0..3).map(|i| (x[i] - at[i]) * (x[i] - at[i])).sum();
                d.sqrt()
            }
            MSet::Sphere { radius } => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                (r - radius).abs()
            }
        }
    }

    /// A representative point of 𝓜, used to center initializers.
    pub fn representative(&self) -> [f64; 3] {
        match self {
            MSet::Point { at } => *at,
            MSet::Sphere { radius } => [*radius, 0.0, 0.0],
        }
    }
}

/// The potential pair with its certified constants.
#[derive(Clone)]
pub struct Potentials {
    pub v: ScalarFn,
    pub k: ScalarFn,
    /// m = sup_𝒪 K.
    pub m: f64,
    /// Strict upper bound for sup K (config input, validated).
    pub k0: f64,
    /// Lower bound of V.
    pub v0: f64,
    pub mset: MSet,
}

impl Potentials {
    pub fn constant(v0: f64, m: f64) -> Self {
        Self {
            v: Arc::new(move |_| v0),
            k: Arc::new(move |_| m),
            m,
            k0: m * 1.01,
            v0,
            mset: MSet::Point { at: [0.0; 3] },
        }
    }
}

/// One assumption violation with a witness point.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub assumption: String,
    pub witness: [f64; 3],
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub passed: bool,
    pub v_inf: f64,
    pub v_sup: f64,
    /// Estimated m = sup_𝒪 K over the sample set.
    pub m_estimate: f64,
    pub boundary_max: f64,
    /// m − max_{∂𝒪} K; must be strictly positive.
    pub boundary_gap: f64,
    /// Worst distance of near-maximal K samples to the declared 𝓜.
    pub mset_mismatch: f64,
    pub violations: Vec<Violation>,
}

fn sample_directions(dim: usize) -> Vec<[f64; 3]> {
    let mut dirs = Vec::new();
    if dim <= 1 {
        dirs.push([1.0, 0.0, 0.0]);
        return dirs;
    }
    let n_az = 24;
    for i in 0..n_az {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n_az as f64;
        if dim == 2 {
            dirs.push([th.cos(), th.sin(), 0.0]);
        } else {
            for j in 1..6 {
                let ph = std::f64::consts::PI * j as f64 / 6.0;
                dirs.push([ph.sin() * th.cos(), ph.sin() * th.sin(), ph.cos()]);
            }
        }
    }
    if dim == 3 {
        dirs.push([0.0, 0.0, 1.0]);
        dirs.push([0.0, 0.0, -1.0]);
    }
    dirs
}

/// Sample V over an ambient box and K over 𝒪, ∂𝒪 and outside; certify (V)
/// and the strict boundary gap of (K); locate 𝓜 and compare it with the
/// declared descriptor.  Radial expressions (variables ⊆ {r}) are sampled
/// along one ray; Cartesian ones over direction fans.
pub fn validate_assumptions(
    v_expr: &CompiledExpr,
    k_expr: &CompiledExpr,
    v_src: &Expr,
    k_src: &Expr,
    region: &RegionO,
    mset: &MSet,
    dim: usize,
    samples: usize,
) -> AssumptionReport {
    let mut violations = Vec::new();
    let radial_only = |e: &Expr| e.variables().iter().all(|v| v == "r");
    let dirs = if radial_only(v_src) && radial_only(k_src) {
        vec![[1.0, 0.0, 0.0]]
    } else {
        sample_directions(dim)
    };
    let r_out = region.outer_radius();
    let n_r = samples.max(64);

    let eval_at = |e: &CompiledExpr, x: &[f64; 3]| -> Option<f64> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        e.eval(&[r, x[0], x[1], x[2]]).ok()
    };

    // (V) over the whole sampled range (inside and outside 𝒪).
    let mut v_inf = f64::INFINITY;
    let mut v_sup = f64::NEG_INFINITY;
    for d in &dirs {
        for i in 0..n_r {
            let r = 2.0 * r_out * i as f64 / (n_r - 1) as f64;
            let x = [d[0] * r, d[1] * r, d[2] * r];
            match eval_at(v_expr, &x) {
                Some(val) => {
                    if val <= 0.0 {
                        violations.push(Violation {
                            assumption: "(V) positivity".into(),
                            witness: x,
                            value: val,
                            detail: format!("V = {val} at |x| = {r:.4}"),
                        });
                    }
                    v_inf = v_inf.min(val);
                    v_sup = v_sup.max(val);
                }
                None => violations.push(Violation {
                    assumption: "(V) evaluation".into(),
                    witness: x,
                    value: f64::NAN,
                    detail: "V failed to evaluate".into(),
                }),
            }
        }
    }
    // Boundedness probe far outside the region.
    for d in &dirs {
        for &mult in &[5.0, 20.0, 100.0] {
            let r = r_out * mult;
            let x = [d[0] * r, d[1] * r, d[2] * r];
            if let Some(val) = eval_at(v_expr, &x) {
                if val > 1.0e3 * v_sup.max(1e-300) {
                    violations.push(Violation {
                        assumption: "(V) boundedness".into(),
                        witness: x,
                        value: val,
                        detail: format!("V keeps growing (V = {val:.3e} at |x| = {r:.3e})"),
                    });
                }
            }
        }
    }

    // (K): sup over 𝒪, max over the boundary, strict gap.
    let mut m_est = f64::NEG_INFINITY;
    let mut best: ([f64; 3], f64) = ([1.0, 0.0, 0.0], 0.0);
    for d in &dirs {
        for i in 0..n_r {
            let r = 2.0 * r_out * i as f64 / (n_r - 1) as f64;
            let x = [d[0] * r, d[1] * r, d[2] * r];
            if region.contains(&x) {
                if let Some(val) = eval_at(k_expr, &x) {
                    if val > m_est {
                        m_est = val;
                        best = (*d, r);
                    }
                }
            }
        }
    }
    // Polish the maximum along its ray (sampling alone is O(Δr²) low).
    {
        let dr = 2.0 * r_out / (n_r - 1) as f64;
        let (d, r0) = best;
        let f = |r: f64| {
            let x = [d[0] * r, d[1] * r, d[2] * r];
            if region.contains(&x) {
                eval_at(k_expr, &x).unwrap_or(f64::NEG_INFINITY)
            } else {
                f64::NEG_INFINITY
            }
        };
        let (_, val) = crate::energy::golden_max(f, (r0 - dr).max(0.0), r0 + dr, 1.0e-12);
        m_est = m_est.max(val);
    }
    let mut near_max: Vec<[f64; 3]> = Vec::new();
    for d in &dirs {
        for i in 0..n_r {
            let r = 2.0 * r_out * i as f64 / (n_r - 1) as f64;
            let x = [d[0] * r, d[1] * r, d[2] * r];
            if region.contains(&x) {
                if let Some(val) = eval_at(k_expr, &x) {
                    if val >= m_est - 1e-9 * m_est.abs().max(1.0) {
                        near_max.push(x);
                    }
                }
            }
        }
    }
    let mut boundary_max = f64::NEG_INFINITY;
    let boundary_radii: Vec<f64> = match region {
        RegionO::Ball { radius } => vec![*radius],
        RegionO::Annulus { inner, outer } => vec![*inner, *outer],
        RegionO::BoxRegion { half_width } => vec![*half_width],
    };
    for d in &dirs {
        for &rb in &boundary_radii {
            let x = [d[0] * rb, d[1] * rb, d[2] * rb];
            if let Some(val) = eval_at(k_expr, &x) {
                boundary_max = boundary_max.max(val);
            }
        }
    }
    let gap = m_est - boundary_max;
    if !(gap > 0.0) {
        violations.push(Violation {
            assumption: "(K) strict boundary gap".into(),
            witness: [boundary_radii[0], 0.0, 0.0],
            value: boundary_max,
            detail: format!("max_boundary K = {boundary_max} ≥ m = {m_est}"),
        });
    }
    let mut mset_mismatch = 0.0f64;
    for x in &near_max {
        mset_mismatch = mset_mismatch.max(mset.dist(x));
    }
    let mset_tol = 0.05 * r_out;
    if mset_mismatch > mset_tol {
        let worst = near_max
            .iter()
            .cloned()
            .max_by(|a, b| mset.dist(a).total_cmp(&mset.dist(b)))
            .unwrap_or([0.0; 3]);
        violations.push(Violation {
            assumption: "declared concentration set".into(),
            witness: worst,
            value: mset_mismatch,
            detail: format!(
                "near-maximal K found {mset_mismatch:.4} away from the declared set (tol {mset_tol:.4})"
            ),
        });
    }

    AssumptionReport {
        passed: violations.is_empty(),
        v_inf,
        v_sup,
        m_estimate: m_est,
        boundary_max,
        boundary_gap: gap,
        mset_mismatch,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use std::collections::HashMap;

    fn compile(src: &str, consts: &HashMap<String, f64>) -> (CompiledExpr, Expr) {
        let e = parse(src).unwrap();
        let c = e.bind(&["r", "x1", "x2", "x3"], consts).unwrap();
        (c, e)
    }

    #[test]
    fn passing_pair() {
        let consts = HashMap::from([("m".to_string(), 2.0)]);
        let (vc, vs) = compile("1", &consts);
        let (kc, ks) = compile("m - 0.5*min((r-1)^2, 1)", &consts);
        let region = RegionO::Ball { radius: 2.0 };
        let mset = MSet::Sphere { radius: 1.0 };
        let rep = validate_assumptions(&vc, &kc, &vs, &ks, &region, &mset, 3, 400);
        assert!(rep.passed, "{:?}", rep.violations);
        assert!((rep.m_estimate - 2.0).abs() < 1e-6);
        assert!(rep.boundary_gap > 0.4);
    }

    #[test]
    fn unbounded_v_fails() {
        let consts = HashMap::new();
        let (vc, vs) = compile("r", &consts);
        let (kc, ks) = compile("1 - min(r^2, 0.5)", &consts);
        let region = RegionO::Ball { radius: 2.0 };
        let mset = MSet::Point { at: [0.0; 3] };
        let rep = validate_assumptions(&vc, &kc, &vs, &ks, &region, &mset, 3, 200);
        assert!(!rep.passed);
        assert!(rep.violations.iter().any(|v| v.assumption.starts_with("(V)")));
    }

    #[test]
    fn boundary_max_fails_gap() {
        let consts = HashMap::new();
        let (vc, vs) = compile("1", &consts);
        let (kc, ks) = compile("1 + r^2", &consts); // max sits on ∂𝒪
        let region = RegionO::Ball { radius: 2.0 };
        let mset = MSet::Point { at: [0.0; 3] };
        let rep = validate_assumptions(&vc, &kc, &vs, &ks, &region, &mset, 3, 200);
        assert!(!rep.passed);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.assumption.contains("(K) strict boundary gap")));
    }

    #[test]
    fn region_geometry() {
        let ball = RegionO::Ball { radius: 2.0 };
        assert!(ball.contains(&[1.0, 0.5, 0.0]));
        assert!(!ball.contains(&[2.5, 0.0, 0.0]));
        assert!((ball.dist_to_complement(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
        let ann = RegionO::Annulus { inner: 1.0, outer: 3.0 };
        assert!(ann.contains(&[0.0, 2.0, 0.0]));
        assert!(!ann.contains(&[0.5, 0.0, 0.0]));
        let mset = MSet::Sphere { radius: 1.0 };
        assert!((mset.dist(&[2.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((mset.dist(&[0.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
    }
}
