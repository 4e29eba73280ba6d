//! Adaptive embedded Runge-Kutta stepper (Dormand-Prince 5(4)) for
//! complex-valued states.
//!
//! The driver only ever advances to explicitly requested times, clipping the
//! last step of each leg so sample times are hit exactly; there is no dense
//! interpolation. FSAL is exploited between accepted steps.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*: weights of the embedded error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_max: f64::INFINITY,
            max_steps: 100_000_000,
        }
    }
}

pub struct Integrator<F> {
    f: F,
    pub t: f64,
    pub y: Vec<C64>,
    h: f64,
    ctrl: StepControl,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    y5: Vec<C64>,
    fsal_valid: bool,
    steps_taken: u64,
}

impl<F> Integrator<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    pub fn new(mut f: F, t0: f64, y0: &[C64], ctrl: StepControl) -> Self {
        let n = y0.len();
        let mut k = [(); 7].map(|_| vec![C64::default(); n]);
        f(t0, y0, &mut k[0]);
        // Conservative first step from the initial slope; the controller
        // adapts within a few steps.
        let f0: f64 = k[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let h0 = (0.01 / (1.0 + f0)).min(ctrl.h_max);
        Self {
            f,
            t: t0,
            y: y0.to_vec(),
            h: h0,
            ctrl,
            k,
            ytmp: vec![C64::default(); n],
            y5: vec![C64::default(); n],
            fsal_valid: true,
            steps_taken: 0,
        }
    }

    /// Advance the state to exactly `t_target` (which must be >= current t).
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            let h = self.h.min(t_target - self.t).min(self.ctrl.h_max);
            self.try_step(h, t_target)?;
            if self.steps_taken > self.ctrl.max_steps {
                return Err(Error::NoConvergence {
                    residual: f64::NAN,
                    t_cap: self.t,
                });
            }
        }
        Ok(())
    }

    fn try_step(&mut self, h: f64, t_target: f64) -> Result<()> {
        if h < 1e-14 * (1.0 + self.t.abs()) {
            return Err(Error::StepUnderflow { t: self.t });
        }
        let n = self.y.len();
        if !self.fsal_valid {
            let (k0, rest) = self.k.split_at_mut(1);
            let _ = rest;
            (self.f)(self.t, &self.y, &mut k0[0]);
            self.fsal_valid = true;
        }
        // Stage 2..6
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h * (A21 * self.k[0][i]);
        }
        let (head, tail) = self.k.split_at_mut(1);
        (self.f)(self.t + C2 * h, &self.ytmp, &mut tail[0]);
        let k1 = &head[0];
        let k2 = &tail[0];
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let (t01, t2plus) = tail.split_at_mut(1);
        (self.f)(self.t + C3 * h, &self.ytmp, &mut t2plus[0]);
        let k3 = &t2plus[0];
        let k2 = &t01[0];
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let (t23, t3plus) = t2plus.split_at_mut(1);
        (self.f)(self.t + C4 * h, &self.ytmp, &mut t3plus[0]);
        let k4 = &t3plus[0];
        let k3 = &t23[0];
        for i in 0..n {
            self.ytmp[i] = self.y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let (t34, t4plus) = t3plus.split_at_mut(1);
        (self.f)(self.t + C5 * h, &self.ytmp, &mut t4plus[0]);
        let k5 = &t4plus[0];
        let k4 = &t34[0];
        for i in 0..n {
            self.ytmp[i] = self.y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let (t45, t5plus) = t4plus.split_at_mut(1);
        (self.f)(self.t + h, &self.ytmp, &mut t5plus[0]);
        let k6 = &t5plus[0];
        let k5 = &t45[0];
        // 5th-order solution (note B2 = 0).
        for i in 0..n {
            self.y5[i] = self.y[i]
                + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let (t56, t6plus) = t5plus.split_at_mut(1);
        (self.f)(self.t + h, &self.y5, &mut t6plus[0]);
        let k7 = &t6plus[0];
        let k6 = &t56[0];

        // Weighted RMS of the embedded error.
        let mut err_acc = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                + E7 * k7[i]);
            let scale =
                self.ctrl.atol + self.ctrl.rtol * self.y[i].norm().max(self.y5[i].norm());
            let w = e.norm() / scale;
            err_acc += w * w;
        }
        let err = (err_acc / n as f64).sqrt();
        self.steps_taken += 1;

        if err <= 1.0 {
            self.t += h;
            // Snap exactly onto the target to avoid 1-ulp overshoot loops.
            if (self.t - t_target).abs() < 1e-12 * (1.0 + t_target.abs()) {
                self.t = t_target;
            }
            std::mem::swap(&mut self.y, &mut self.y5);
            let (head, tail) = self.k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
            self.fsal_valid = true;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            self.h = h * grow;
        } else {
            self.fsal_valid = true; // k1 still holds f(t, y)
            self.h = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        Ok(())
    }
}

/// Convenience driver: sample the solution at `t0 + k*dt` for k = 0..,
/// invoking `on_sample` after each leg; stop when it returns false.
pub fn sample_uniform<F, G>(
    f: F,
    t0: f64,
    y0: &[C64],
    dt: f64,
    ctrl: StepControl,
    mut on_sample: G,
) -> Result<()>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    G: FnMut(f64, &[C64]) -> bool,
{
    let mut integ = Integrator::new(f, t0, y0, ctrl);
    if !on_sample(t0, &integ.y) {
        return Ok(());
    }
    let mut k: u64 = 1;
    loop {
        let t = t0 + dt * k as f64;
        integ.advance_to(t)?;
        if !on_sample(t, &integ.y) {
            return Ok(());
        }
        k += 1;
    }
}
