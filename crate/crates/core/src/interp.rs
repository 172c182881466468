//! Monotone cubic (Fritsch–Carlson) interpolation.
//!
//! Radial profiles are strictly monotone with algebraic tails; shape
//! preservation matters more than formal order, so PCHIP is used for all
//! profile resampling (dilations, rescaling maps, warm starts).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InterpError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("abscissae must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("non-finite data at index {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>, // endpoint-adjusted harmonic-mean slopes
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, InterpError> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(InterpError::TooFewNodes(n.min(y.len())));
        }
        for i in 0..n {
            if !x[i].is_finite() || !y[i].is_finite() {
                return Err(InterpError::NonFinite(i));
            }
            if i > 0 && x[i] <= x[i - 1] {
                return Err(InterpError::NotIncreasing(i));
            }
        }
        let mut delta = vec![0.0; n - 1];
        let mut h = vec![0.0; n - 1];
        for i in 0..n - 1 {
            h[i] = x[i + 1] - x[i];
            delta[i] = (y[i + 1] - y[i]) / h[i];
        }
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                // Weighted harmonic mean keeps the interpolant monotone.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        d[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Ok(Self { x, y, d })
    }

    /// Evaluate; the argument is clamped to the data range.
    pub fn eval(&self, xx: f64) -> f64 {
        let n = self.x.len();
        if xx <= self.x[0] {
            return self.y[0];
        }
        if xx >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= xx) - 1;
        let i = i.min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let t = (xx - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // Non-centered three-point estimate, clipped for shape preservation.
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|&v| 3.0 * v - 1.0).collect();
        let p = Pchip::new(x, y).unwrap();
        for k in 0..50 {
            let xx = k as f64 * 0.19;
            assert!((p.eval(xx) - (3.0 * xx - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn preserves_monotonicity() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.2).exp() - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + v * v)).collect();
        let p = Pchip::new(x.clone(), y).unwrap();
        let mut prev = p.eval(0.0);
        let top = *x.last().unwrap();
        for k in 1..2000 {
            let xx = top * k as f64 / 2000.0;
            let val = p.eval(xx);
            assert!(val <= prev + 1e-12, "not monotone at {xx}");
            prev = val;
        }
    }

    #[test]
    fn accuracy_on_smooth_profile() {
        let x: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let f = |r: f64| (1.0 + r * r).powf(-1.5);
        let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        let p = Pchip::new(x, y).unwrap();
        let worst = |p: &Pchip| {
            (0..1000)
                .map(|k| {
                    let xx = 19.9 * k as f64 / 1000.0;
                    (p.eval(xx) - f(xx)).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let e1 = worst(&p);
        assert!(e1 < 5e-4, "coarse error {e1}");
        // Halving the spacing should cut the error by well over 2×.
        let x2: Vec<f64> = (0..800).map(|i| i as f64 * 0.025).collect();
        let y2: Vec<f64> = x2.iter().map(|&v| f(v)).collect();
        let e2 = worst(&Pchip::new(x2, y2).unwrap());
        assert!(e1 / e2 > 3.0, "refinement ratio {}", e1 / e2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Pchip::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }
}
