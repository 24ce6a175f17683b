//! Explicit Runge–Kutta steppers over flat complex state arrays.

use crate::hilbert::C64;

/// A first-order system `y' = f(t, y)`.
pub trait System {
    fn len(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, k: &[C64]) {
    for ((o, &a), &b) in out.iter_mut().zip(y).zip(k) {
        *o = a + b * h;
    }
}

/// Classical fourth-order Runge–Kutta.
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::default(); n];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    pub fn step<S: System + ?Sized>(&mut self, sys: &mut S, t: f64, h: f64, y: &mut [C64]) {
        let half = 0.5 * h;
        sys.rhs(t, y, &mut self.k1);
        axpy_into(&mut self.tmp, y, half, &self.k1);
        sys.rhs(t + half, &self.tmp, &mut self.k2);
        axpy_into(&mut self.tmp, y, half, &self.k2);
        sys.rhs(t + half, &self.tmp, &mut self.k3);
        axpy_into(&mut self.tmp, y, h, &self.k3);
        sys.rhs(t + h, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }

    /// Advances from `t0` to `t1` in `n` equal steps.
    pub fn advance<S: System + ?Sized>(&mut self, sys: &mut S, t0: f64, t1: f64, n: usize, y: &mut [C64]) {
        let h = (t1 - t0) / n as f64;
        for k in 0..n {
            self.step(sys, t0 + k as f64 * h, h, y);
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size statistics of an adaptive integration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AdaptiveStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive Dormand–Prince 5(4) with first-same-as-last reuse.
pub struct Dopri5 {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
    fsal_valid: bool,
    pub rtol: f64,
    pub atol: f64,
    /// Suggested size of the next step.
    pub h: f64,
    pub h_min: f64,
}

impl Dopri5 {
    pub fn new(n: usize, rtol: f64, atol: f64, h0: f64) -> Self {
        let z = vec![C64::default(); n];
        Dopri5 {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            y_new: z,
            fsal_valid: false,
            rtol,
            atol,
            h: h0,
            h_min: 1e-14,
        }
    }

    /// Forgets the cached derivative, required whenever the state is
    /// modified outside [`Dopri5::advance`].
    pub fn invalidate(&mut self) {
        self.fsal_valid = false;
    }

    fn stage<S: System + ?Sized>(&mut self, sys: &mut S, t: f64, y: &[C64], coeffs: &[f64], out: usize) {
        for i in 0..y.len() {
            let mut acc = C64::default();
            for (j, &a) in coeffs.iter().enumerate() {
                if a != 0.0 {
                    acc += self.k[j][i] * a;
                }
            }
            self.tmp[i] = y[i] + acc;
        }
        let (tmp, k) = (&self.tmp, &mut self.k[out]);
        sys.rhs(t, tmp, k);
    }

    /// Integrates from `t0` to exactly `t1`. Returns `Err(t)` if the step
    /// size underflows at time `t`.
    pub fn advance<S: System + ?Sized>(
        &mut self,
        sys: &mut S,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        stats: &mut AdaptiveStats,
    ) -> std::result::Result<(), f64> {
        let mut t = t0;
        if !self.fsal_valid {
            let (k0, _) = self.k.split_at_mut(1);
            sys.rhs(t, y, &mut k0[0]);
            self.fsal_valid = true;
        }
        while t < t1 {
            let last = t + self.h >= t1;
            let h = if last { t1 - t } else { self.h };
            self.stage(sys, t + C2 * h, y, &[A21 * h], 1);
            self.stage(sys, t + C3 * h, y, &[A31 * h, A32 * h], 2);
            self.stage(sys, t + C4 * h, y, &[A41 * h, A42 * h, A43 * h], 3);
            self.stage(sys, t + C5 * h, y, &[A51 * h, A52 * h, A53 * h, A54 * h], 4);
            self.stage(sys, t + h, y, &[A61 * h, A62 * h, A63 * h, A64 * h, A65 * h], 5);
            for i in 0..y.len() {
                self.y_new[i] = y[i]
                    + (self.k[0][i] * B1
                        + self.k[2][i] * B3
                        + self.k[3][i] * B4
                        + self.k[4][i] * B5
                        + self.k[5][i] * B6)
                        * h;
            }
            {
                let (yn, k6) = (&self.y_new, &mut self.k[6]);
                sys.rhs(t + h, yn, k6);
            }
            let mut err2 = 0.0;
            for i in 0..y.len() {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h;
                let sc = self.atol + self.rtol * y[i].norm().max(self.y_new[i].norm());
                err2 += e.norm_sqr() / (sc * sc);
            }
            let err = (err2 / y.len() as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                stats.accepted += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                stats.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < self.h_min {
                    return Err(t);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y' = i ω y + i ε cos(t) y`, exact solution `exp(i ω t + i ε sin t)`.
    struct Phase {
        omega: f64,
        eps: f64,
        calls: usize,
    }

    impl System for Phase {
        fn len(&self) -> usize {
            1
        }
        fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
            self.calls += 1;
            dy[0] = C64::new(0.0, self.omega + self.eps * t.cos()) * y[0];
        }
    }

    fn exact(t: f64) -> C64 {
        C64::from_polar(1.0, 3.0 * t + 0.7 * t.sin())
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let err = |n: usize| {
            let mut sys = Phase { omega: 3.0, eps: 0.7, calls: 0 };
            let mut y = [C64::new(1.0, 0.0)];
            Rk4::new(1).advance(&mut sys, 0.0, 4.0, n, &mut y);
            (y[0] - exact(4.0)).norm()
        };
        let (e1, e2) = (err(200), err(400));
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn dopri_meets_tolerance_and_hits_endpoint() {
        let mut sys = Phase { omega: 3.0, eps: 0.7, calls: 0 };
        let mut y = [C64::new(1.0, 0.0)];
        let mut ode = Dopri5::new(1, 1e-10, 1e-12, 0.1);
        let mut stats = AdaptiveStats::default();
        ode.advance(&mut sys, 0.0, 1.3, &mut y, &mut stats).unwrap();
        ode.advance(&mut sys, 1.3, 4.0, &mut y, &mut stats).unwrap();
        assert!((y[0] - exact(4.0)).norm() < 1e-8);
        assert!(stats.accepted > 10);
    }
}
