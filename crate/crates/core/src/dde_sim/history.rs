use super::SwarmState;
use crate::error::SimError;

/// Uniform-grid trajectory `t_k = k·dt` with stored positions, velocities and
/// accelerations, extended by the constant datum for `t ≤ 0`.
///
/// Between grid points, positions and velocities are cubic Hermite
/// interpolants built from the stored values and derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    n: usize,
    d: usize,
    dt: f64,
    x: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    /// Grid points whose acceleration is stored (`≤ len()`).
    with_accel: usize,
}

impl History {
    pub(crate) fn new(initial: &SwarmState, dt: f64, capacity: usize) -> Self {
        let width = initial.n * initial.d;
        let mut x = Vec::with_capacity(capacity * width);
        let mut v = Vec::with_capacity(capacity * width);
        x.extend_from_slice(&initial.x);
        v.extend_from_slice(&initial.v);
        Self { n: initial.n, d: initial.d, dt, x, v, a: Vec::with_capacity(capacity * width), with_accel: 0 }
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of stored grid points.
    pub fn len(&self) -> usize {
        self.x.len() / self.width()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn last_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn state(&self, k: usize) -> SwarmState {
        let w = self.width();
        SwarmState {
            t: self.time(k),
            n: self.n,
            d: self.d,
            x: self.x[k * w..(k + 1) * w].to_vec(),
            v: self.v[k * w..(k + 1) * w].to_vec(),
        }
    }

    pub fn last_state(&self) -> SwarmState {
        self.state(self.len() - 1)
    }

    /// The constant datum on `(-∞, 0]`.
    pub fn pre_history(&self) -> SwarmState {
        SwarmState { t: 0.0, ..self.state(0) }
    }

    pub fn positions(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.x[k * w..(k + 1) * w]
    }

    pub fn velocities(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.v[k * w..(k + 1) * w]
    }

    pub fn accelerations(&self, k: usize) -> Option<&[f64]> {
        let w = self.width();
        (k < self.with_accel).then(|| &self.a[k * w..(k + 1) * w])
    }

    /// Interpolated state at time `tau`; the constant datum for `tau ≤ 0`.
    pub fn eval(&self, tau: f64) -> Result<SwarmState, SimError> {
        let w = self.width();
        let mut x = vec![0.0; w];
        let mut v = vec![0.0; w];
        self.eval_into(tau, &mut x, &mut v)?;
        Ok(SwarmState { t: tau, n: self.n, d: self.d, x, v })
    }

    pub(crate) fn width(&self) -> usize {
        self.n * self.d
    }

    pub(crate) fn push_accel(&mut self, a: &[f64]) {
        debug_assert_eq!(self.with_accel + 1, self.len());
        self.a.extend_from_slice(a);
        self.with_accel += 1;
    }

    pub(crate) fn push_state(&mut self, x: &[f64], v: &[f64]) {
        self.x.extend_from_slice(x);
        self.v.extend_from_slice(v);
    }

    pub(crate) fn eval_into(&self, tau: f64, x: &mut [f64], v: &mut [f64]) -> Result<(), SimError> {
        let w = self.width();
        if tau <= 0.0 {
            x.copy_from_slice(&self.x[..w]);
            v.copy_from_slice(&self.v[..w]);
            return Ok(());
        }
        let last = self.len() - 1;
        let pos = tau / self.dt;
        if pos > last as f64 * (1.0 + 1e-12) {
            return Err(SimError::HistoryUnderflow { t: tau });
        }
        let k = (pos.floor() as usize).min(last);
        let theta = pos - k as f64;
        if theta == 0.0 || k == last {
            x.copy_from_slice(&self.x[k * w..(k + 1) * w]);
            v.copy_from_slice(&self.v[k * w..(k + 1) * w]);
            return Ok(());
        }
        let h = self.dt;
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = h * (t3 - 2.0 * t2 + theta);
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = h * (t3 - t2);
        let (x0, x1) = (&self.x[k * w..(k + 1) * w], &self.x[(k + 1) * w..(k + 2) * w]);
        let (v0, v1) = (&self.v[k * w..(k + 1) * w], &self.v[(k + 1) * w..(k + 2) * w]);
        for c in 0..w {
            x[c] = h00 * x0[c] + h10 * v0[c] + h01 * x1[c] + h11 * v1[c];
        }
        let a0 = &self.a[k * w..(k + 1) * w];
        if k + 1 < self.with_accel {
            let a1 = &self.a[(k + 1) * w..(k + 2) * w];
            for c in 0..w {
                v[c] = h00 * v0[c] + h10 * a0[c] + h01 * v1[c] + h11 * a1[c];
            }
        } else {
            // right-end derivative not known yet: quadratic through v₀, a₀, v₁
            let ht = h * theta;
            for c in 0..w {
                v[c] = v0[c] + ht * a0[c] + t2 * (v1[c] - v0[c] - h * a0[c]);
            }
        }
        Ok(())
    }
}
