//! Dormand–Prince 5(4) with dense output.
//!
//! The embedded pair drives the step size; each accepted step hands the
//! caller a quartic interpolant, which is what event localization (zero
//! crossings, decay guards) and profile sampling bisect on.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IvpError {
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64, y: Vec<f64> },
    #[error("exceeded {max} steps at t = {t}")]
    MaxSteps { max: usize, t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1.0e-10, atol: 1.0e-12, h_init: 1.0e-6, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

/// One accepted step with its dense interpolant.
pub struct DenseStep<const D: usize> {
    pub t0: f64,
    pub t1: f64,
    rcont: [[f64; D]; 5],
}

impl<const D: usize> DenseStep<D> {
    /// Evaluate the interpolant at t ∈ [t0, t1].
    pub fn eval(&self, t: f64) -> [f64; D] {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = self.rcont[0][i]
                + th * (self.rcont[1][i]
                    + th1 * (self.rcont[2][i] + th * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        out
    }

    /// Locate a sign change of `g(t, y(t))` inside the step by bisection.
    pub fn locate_zero(&self, g: impl Fn(f64, &[f64; D]) -> f64) -> Option<f64> {
        let (mut a, mut b) = (self.t0, self.t1);
        let (ga, gb) = (g(a, &self.eval(a)), g(b, &self.eval(b)));
        if ga == 0.0 {
            return Some(a);
        }
        if ga * gb > 0.0 {
            return None;
        }
        let mut sa = ga.signum();
        for _ in 0..128 {
            let m = 0.5 * (a + b);
            let gm = g(m, &self.eval(m));
            if gm == 0.0 {
                return Some(m);
            }
            if gm.signum() == sa {
                a = m;
                sa = gm.signum();
            } else {
                b = m;
            }
            if (b - a) <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
                break;
            }
        }
        Some(0.5 * (a + b))
    }
}

pub enum StepOutcome {
    Continue,
    /// Stop and report the state interpolated at the given time.
    Halt(f64),
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D5: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate y' = f(t, y) from t0 to t_end; `on_step` sees every accepted
/// step and may halt mid-step (the returned state is then the dense-output
/// value at the halt time).
pub fn integrate<const D: usize>(
    f: impl Fn(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    ctl: &StepControl,
    mut on_step: impl FnMut(&DenseStep<D>) -> StepOutcome,
) -> Result<(f64, [f64; D], usize), IvpError> {
    let mut t = t0;
    let mut y = y0;
    let mut h = ctl.h_init.min(t_end - t0).min(ctl.h_max);
    let mut k = [[0.0_f64; D]; 7];
    k[0] = f(t, &y);
    let mut n_accepted = 0usize;
    let mut rejected = false;

    for _ in 0..ctl.max_steps {
        if t >= t_end {
            return Ok((t, y, n_accepted));
        }
        h = h.min(t_end - t);
        if h <= f64::EPSILON * t.abs().max(1.0) * 16.0 {
            return Err(IvpError::StepSizeUnderflow { t, y: y.to_vec() });
        }

        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..D {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        // Stage 7 used y + h·Σ a7j kj which is the 5th-order solution (FSAL).
        let mut ynew = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            if a != 0.0 {
                for i in 0..D {
                    ynew[i] += h * a * kj[i];
                }
            }
        }

        let mut err = 0.0;
        for i in 0..D {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / D as f64).sqrt();

        if err <= 1.0 {
            // Accept: build the dense interpolant.
            let mut rcont = [[0.0_f64; D]; 5];
            for i in 0..D {
                let dy = ynew[i] - y[i];
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = h * k[0][i] - dy;
                rcont[3][i] = dy - h * k[6][i] - rcont[2][i];
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += D5[j] * kj[i];
                }
                rcont[4][i] = h * acc;
            }
            let step = DenseStep { t0: t, t1: t + h, rcont };
            match on_step(&step) {
                StepOutcome::Halt(t_halt) => {
                    let yh = step.eval(t_halt);
                    return Ok((t_halt, yh, n_accepted + 1));
                }
                StepOutcome::Continue => {}
            }
            t += h;
            y = ynew;
            k[0] = k[6]; // FSAL
            n_accepted += 1;
            let facmax = if rejected { 1.0 } else { 5.0 };
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, facmax);
            h = h.min(ctl.h_max);
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            rejected = true;
        }
    }
    Err(IvpError::MaxSteps { max: ctl.max_steps, t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let ctl = StepControl { rtol: 1e-12, atol: 1e-14, h_init: 1e-4, ..Default::default() };
        let (t, y, _) =
            integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &ctl, |_| StepOutcome::Continue)
                .unwrap();
        assert_eq!(t, 5.0);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let ctl = StepControl { rtol: 1e-11, atol: 1e-13, h_init: 1e-3, ..Default::default() };
        let mut worst: f64 = 0.0;
        integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            &ctl,
            |step| {
                for k in 0..5 {
                    let tt = step.t0 + (step.t1 - step.t0) * k as f64 / 4.0;
                    let v = step.eval(tt);
                    worst = worst.max((v[0] - tt.cos()).abs());
                }
                StepOutcome::Continue
            },
        )
        .unwrap();
        assert!(worst < 1e-9, "dense output error {worst}");
    }

    #[test]
    fn event_localization() {
        // y = cos(t) crosses zero at π/2.
        let ctl = StepControl { rtol: 1e-12, atol: 1e-14, h_init: 1e-3, ..Default::default() };
        let (t, _, _) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            &ctl,
            |step| {
                if step.eval(step.t1)[0] <= 0.0 {
                    if let Some(tc) = step.locate_zero(|_, y| y[0]) {
                        return StepOutcome::Halt(tc);
                    }
                }
                StepOutcome::Continue
            },
        )
        .unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn quadrature_state() {
        // Augmented state integrates ∫ sin² over [0, 2π] = π.
        let ctl = StepControl { rtol: 1e-12, atol: 1e-14, h_init: 1e-3, ..Default::default() };
        let (_, y, _) = integrate(
            |t: f64, _: &[f64; 1]| [t.sin() * t.sin()],
            0.0,
            [0.0],
            2.0 * std::f64::consts::PI,
            &ctl,
            |_| StepOutcome::Continue,
        )
        .unwrap();
        assert!((y[0] - std::f64::consts::PI).abs() < 1e-10);
    }
}
