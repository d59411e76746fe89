//! Adaptive Dormand–Prince 5(4) integration of small first-order systems.
//!
//! The integrator lands exactly on every requested output point, so the
//! solution is never interpolated.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Tolerances for the local error test `|e| <= atol + rtol * |y|`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-12,
            atol: 1e-12,
        }
    }
}

/// Integrate `y' = rhs(t, y)` from `(t0, y0)` through `targets`, which must be
/// monotone in one direction away from `t0`. Returns the state at each target.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    targets: &[f64],
    tol: Tolerance,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let Some(&last) = targets.last() else {
        return Ok(Vec::new());
    };
    let dir = if last < t0 { -1.0 } else { 1.0 };
    let mut prev = t0;
    for &target in targets {
        if (target - prev) * dir < 0.0 {
            return Err(Error::Integrator {
                t: target,
                msg: "output points are not monotone".into(),
            });
        }
        prev = target;
    }

    let (mut t, mut y) = (t0, y0);
    let mut h = dir * (last - t0).abs().max(f64::MIN_POSITIVE) * 1e-3;
    let mut k1 = rhs(t, &y);
    let mut steps = 0;
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integrator {
                    t,
                    msg: "step budget exhausted".into(),
                });
            }
            let remaining = target - t;
            let clipped = remaining.abs() <= h.abs();
            let step = if clipped { remaining } else { h };
            if step.abs() < 1e-14 * t.abs().max(1e-300) && !clipped {
                return Err(Error::Integrator {
                    t,
                    msg: "step size underflow".into(),
                });
            }
            let (y_new, k7, err) = dp_step(&rhs, t, &y, &k1, step, tol);
            if !err.is_finite() {
                return Err(Error::Integrator {
                    t,
                    msg: "non-finite state".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if clipped { target } else { t + step };
                y = y_new;
                k1 = k7;
                if !clipped || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn dp_step<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: Tolerance,
) -> ([f64; N], [f64; N], f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(t + C[s] * h, &ys);
    }
    // The seventh stage is evaluated at the fifth-order solution.
    let mut y_new = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        for i in 0..N {
            y_new[i] += h * A[6][j] * kj[i];
        }
    }
    let mut sum = 0.0;
    for i in 0..N {
        let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    (y_new, k[6], (sum / N as f64).sqrt())
}
