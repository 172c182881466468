//! Dual change of variables removing the quasilinear term.
//!
//! With g(s) = √(1+2ζs²) and G(t) = ∫₀ᵗ g, the substitution u = G⁻¹(v)
//! turns −Δu − ζ uΔu² = h(u) into the semilinear −Δv = h(G⁻¹(v))/g(G⁻¹(v)).
//! ζ = 1 is the standard transform; ζ = 0 degenerates to the identity and is
//! handled by an exact branch (the generic closed form divides by √ζ).
//!
//! Key inequalities, used as brackets for the inverse: G is odd, strictly
//! increasing and convex on t ≥ 0, with |G⁻¹(v)| ≤ |v| and
//! |G⁻¹(v)| ≤ (2/ζ)^{1/4}·√|v| for ζ > 0.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("transform input must be finite, got {0}")]
    NonFiniteInput(f64),
    #[error("zeta must be a finite nonnegative scalar, got {0}")]
    InvalidZeta(f64),
}

/// The ζ-scaled dual transform.  Stateless and cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTransform {
    zeta: f64,
}

impl DualTransform {
    pub fn new(zeta: f64) -> Result<Self, TransformError> {
        if !zeta.is_finite() || zeta < 0.0 {
            return Err(TransformError::InvalidZeta(zeta));
        }
        Ok(Self { zeta })
    }

    /// The standard transform (ζ = 1).
    pub fn standard() -> Self {
        Self { zeta: 1.0 }
    }

    /// The degenerate identity transform (ζ = 0).
    pub fn identity() -> Self {
        Self { zeta: 0.0 }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn is_identity(&self) -> bool {
        self.zeta == 0.0
    }

    /// g(t) = √(1+2ζt²).
    #[inline]
    pub fn slope(&self, t: f64) -> f64 {
        if self.zeta == 0.0 {
            1.0
        } else {
            (1.0 + 2.0 * self.zeta * t * t).sqrt()
        }
    }

    /// G(t) = ∫₀ᵗ g(s) ds, evaluated in closed form:
    /// t·√(1+2ζt²)/2 + asinh(√(2ζ)t)/(2√(2ζ)).  Odd bit-for-bit.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if self.zeta == 0.0 {
            return t;
        }
        let a = (2.0 * self.zeta).sqrt();
        let x = t.abs();
        let v = x * (1.0 + 2.0 * self.zeta * x * x).sqrt() / 2.0 + asinh_pos(a * x) / (2.0 * a);
        v.copysign(t)
    }

    /// G⁻¹(v) by safeguarded Newton.  The seed min(|v|, (2/ζ)^{1/4}√|v|) is an
    /// upper bound for the root, and G is convex on t ≥ 0, so Newton descends
    /// monotonically onto it; a bisection bracket guards the first steps.
    pub fn invert(&self, v: f64) -> f64 {
        if self.zeta == 0.0 || v == 0.0 {
            return v;
        }
        let w = v.abs();
        let mut hi = w.min(self.sqrt_envelope() * w.sqrt());
        let mut lo = 0.0_f64;
        let mut t = hi;
        for _ in 0..80 {
            let f = self.value(t) - w;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - f / self.slope(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - t).abs() <= 4.0 * f64::EPSILON * t.abs();
            t = next;
            if done {
                break;
            }
        }
        t.copysign(v)
    }

    /// Coefficient of the large-argument envelope: G⁻¹(v) ~ (2/ζ)^{1/4}√v.
    pub fn sqrt_envelope(&self) -> f64 {
        (2.0 / self.zeta).powf(0.25)
    }

    /// G⁻¹(v)/g(G⁻¹(v)) — the factor multiplying linear (mass) terms in the
    /// dual Euler–Lagrange equation.
    #[inline]
    pub fn mass_slope(&self, v: f64) -> f64 {
        if self.zeta == 0.0 {
            return v;
        }
        let u = self.invert(v);
        u / self.slope(u)
    }

    /// |G⁻¹(v)|^{p−2}G⁻¹(v)/g(G⁻¹(v)) — the dual source nonlinearity.
    #[inline]
    pub fn nonlinearity(&self, v: f64, p: f64) -> f64 {
        let u = self.invert(v);
        if u == 0.0 {
            return 0.0;
        }
        (u.abs().powf(p - 1.0) / self.slope(u)).copysign(u)
    }

    /// |G⁻¹(v)|, |G⁻¹(v)|² and |G⁻¹(v)|^p in one inversion.
    #[inline]
    pub fn inverse_powers(&self, v: f64, p: f64) -> (f64, f64, f64) {
        let u = self.invert(v).abs();
        (u, u * u, if u == 0.0 { 0.0 } else { u.powf(p) })
    }

    pub fn checked_slope(&self, t: f64) -> Result<f64, TransformError> {
        if !t.is_finite() {
            return Err(TransformError::NonFiniteInput(t));
        }
        Ok(self.slope(t))
    }

    pub fn checked_value(&self, t: f64) -> Result<f64, TransformError> {
        if !t.is_finite() {
            return Err(TransformError::NonFiniteInput(t));
        }
        Ok(self.value(t))
    }

    pub fn checked_invert(&self, v: f64) -> Result<f64, TransformError> {
        if !v.is_finite() {
            return Err(TransformError::NonFiniteInput(v));
        }
        Ok(self.invert(v))
    }
}

/// asinh on x ≥ 0 through log1p, stable for small arguments; for huge x the
/// direct formula would overflow x², so switch to ln(2x).
#[inline]
fn asinh_pos(x: f64) -> f64 {
    if x > 1.0e8 {
        x.ln() + std::f64::consts::LN_2
    } else {
        (x + x * x / (1.0 + (1.0 + x * x).sqrt())).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature of g over [0, t] — an oracle for G that
    /// never touches the closed form.
    fn g_quadrature(zeta: f64, t: f64) -> f64 {
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        fn rec(
            f: &impl Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
            }
        }
        let f = |s: f64| (1.0 + 2.0 * zeta * s * s).sqrt();
        let (fa, fm, fb) = (f(0.0), f(0.5 * t), f(t));
        let whole = simpson(0.0, t, fa, fm, fb);
        rec(&f, 0.0, t, fa, fm, fb, whole, 1.0e-15 * t.abs().max(1.0), 48)
    }

    #[test]
    fn slope_basics() {
        let tr = DualTransform::standard();
        assert_eq!(tr.slope(0.0), 1.0);
        assert!((tr.slope(1.0) - 3.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(DualTransform::identity().slope(5.0), 1.0);
    }

    #[test]
    fn value_matches_quadrature_oracle() {
        let tr = DualTransform::standard();
        // Frozen from the quadrature oracle at ζ=1, t=1.
        let expected = 1.271_273_898_522_815_5;
        assert!((tr.value(1.0) - expected).abs() < 1e-12);
        for &t in &[0.1, 0.5, 1.0, 3.0, 17.0, 250.0] {
            for &zeta in &[1.0, 0.3, 4.0] {
                let tr = DualTransform::new(zeta).unwrap();
                let oracle = g_quadrature(zeta, t);
                assert!(
                    (tr.value(t) - oracle).abs() <= 1e-12 * oracle.abs(),
                    "G({t}) zeta={zeta}: closed {} vs quad {}",
                    tr.value(t),
                    oracle
                );
            }
        }
    }

    #[test]
    fn value_is_odd_bitwise() {
        let tr = DualTransform::standard();
        let mut t = 1.0e-9;
        while t < 1.0e6 {
            assert_eq!(tr.value(-t).to_bits(), (-tr.value(t)).to_bits());
            t *= 3.7;
        }
        assert_eq!(tr.value(0.0), 0.0);
    }

    #[test]
    fn invert_roundtrip_and_bounds() {
        for &zeta in &[1.0, 0.25, 9.0] {
            let tr = DualTransform::new(zeta).unwrap();
            let env = tr.sqrt_envelope();
            let mut t = 1.0e-8;
            while t < 1.0e6 {
                let v = tr.value(t);
                let back = tr.invert(v);
                assert!((back - t).abs() <= 1e-10 * t, "roundtrip at t={t}, zeta={zeta}");
                assert!(back.abs() <= v.abs() * (1.0 + 1e-14));
                assert!(back.abs() <= env * v.abs().sqrt() * (1.0 + 1e-14));
                t *= 2.9;
            }
        }
    }

    #[test]
    fn invert_roundtrip_from_oracle_value() {
        // G(1) from the quadrature oracle, inverted back.
        let tr = DualTransform::standard();
        let v = g_quadrature(1.0, 1.0);
        assert!((tr.invert(v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invert_large_argument_envelope() {
        let tr = DualTransform::standard();
        let t = tr.invert(1.0e6);
        let limit = 2.0f64.powf(0.25) * 1.0e3;
        assert!((t - limit).abs() / limit < 1e-3, "got {t}, limit {limit}");
    }

    #[test]
    fn small_and_large_limits() {
        let tr = DualTransform::standard();
        assert!((tr.invert(1.0e-8) / 1.0e-8 - 1.0).abs() < 1e-6);
        let big = tr.invert(1.0e8);
        assert!((big / 1.0e4 - 2.0f64.powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn inverse_square_is_convex() {
        let tr = DualTransform::standard();
        let samples = [-30.0, -4.0, -0.7, 0.0, 0.3, 2.0, 11.0, 400.0];
        for &v1 in &samples {
            for &v2 in &samples {
                for k in 0..=8 {
                    let th = k as f64 / 8.0;
                    let mid = tr.invert(th * v1 + (1.0 - th) * v2).powi(2);
                    let bound = th * tr.invert(v1).powi(2) + (1.0 - th) * tr.invert(v2).powi(2);
                    assert!(mid <= bound + 1e-12 * bound.max(1.0));
                }
            }
        }
    }

    #[test]
    fn derivative_of_value_is_slope() {
        let tr = DualTransform::standard();
        // Where truncation dominates roundoff the h² Richardson ratio shows;
        // away from there, just require the finite difference to match g.
        for &t in &[0.2, 0.5, 1.0] {
            let d = |h: f64| (tr.value(t + h) - tr.value(t - h)) / (2.0 * h) - tr.slope(t);
            let (e4, e5) = (d(1.0e-4).abs(), d(1.0e-5).abs());
            let ratio = e4 / e5.max(1e-18);
            assert!((30.0..300.0).contains(&ratio), "Richardson ratio {ratio} at t={t}");
        }
        for &t in &[0.1, 2.5, 10.0, 100.0] {
            let fd = (tr.value(t + 1e-4) - tr.value(t - 1e-4)) / 2e-4;
            assert!((fd - tr.slope(t)).abs() < 1e-7 * tr.slope(t));
        }
    }

    #[test]
    fn checked_ops_reject_non_finite() {
        let tr = DualTransform::standard();
        assert!(matches!(
            tr.checked_slope(f64::NAN),
            Err(TransformError::NonFiniteInput(_))
        ));
        assert!(tr.checked_value(f64::INFINITY).is_err());
        assert!(tr.checked_invert(f64::NEG_INFINITY).is_err());
        assert!(DualTransform::new(-1.0).is_err());
    }

    #[test]
    fn zeta_zero_is_exact_identity() {
        let tr = DualTransform::identity();
        assert_eq!(tr.value(5.0), 5.0);
        assert_eq!(tr.invert(-3.25), -3.25);
        assert_eq!(tr.nonlinearity(2.0, 4.0), 8.0);
    }
}
