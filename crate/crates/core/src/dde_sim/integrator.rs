use super::diagnostics::{DiagnosticsRow, DiagnosticsSeries, LyapunovWeights};
use super::{position_diameter, History, RunOutput, SimConfig, SwarmState};
use crate::comm_kernel::CommunicationRate;
use crate::delay_dist::Quadrature;
use crate::error::SimError;

/// Right-hand side of the velocity equation, evaluated against a history.
pub(crate) struct Kernel {
    n: usize,
    d: usize,
    scale: f64,
    rate: CommunicationRate,
    quad: Quadrature,
    xq: Vec<f64>,
    vq: Vec<f64>,
}

/// The step being built: its left grid point and first-stage derivative,
/// plus the current stage state.
pub(crate) struct Stage<'a> {
    pub t_n: f64,
    pub x_n: &'a [f64],
    pub v_n: &'a [f64],
    pub a_n: &'a [f64],
    pub x: &'a [f64],
    pub v: &'a [f64],
}

impl Kernel {
    pub(crate) fn new(config: &SimConfig, n: usize, d: usize) -> Result<Self, SimError> {
        Ok(Self {
            n,
            d,
            scale: config.lambda / n as f64,
            rate: config.rate,
            quad: config.quadrature()?,
            xq: vec![0.0; n * d],
            vq: vec![0.0; n * d],
        })
    }

    pub(crate) fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Writes `v̇` at time `t` into `acc` and returns `D(t)`.
    ///
    /// Delayed times inside the committed history are interpolated; times
    /// inside the step under construction use the stage state for a zero
    /// delay and the first-stage linear predictor otherwise.
    pub(crate) fn eval(
        &mut self,
        hist: &History,
        t: f64,
        stage: Option<&Stage<'_>>,
        acc: &mut [f64],
    ) -> Result<f64, SimError> {
        acc.iter_mut().for_each(|a| *a = 0.0);
        let mut dissipation = 0.0;
        let mut pre_weight = 0.0;
        for q in 0..self.quad.len() {
            let (s, w) = (self.quad.nodes[q], self.quad.weights[q]);
            let tau = t - s;
            if tau <= 0.0 {
                pre_weight += w;
                continue;
            }
            match stage {
                Some(st) if tau > st.t_n => {
                    if s == 0.0 {
                        self.xq.copy_from_slice(st.x);
                        self.vq.copy_from_slice(st.v);
                    } else {
                        let dtau = tau - st.t_n;
                        for c in 0..self.xq.len() {
                            self.xq[c] = st.x_n[c] + dtau * st.v_n[c];
                            self.vq[c] = st.v_n[c] + dtau * st.a_n[c];
                        }
                    }
                }
                _ => hist.eval_into(tau, &mut self.xq, &mut self.vq)?,
            }
            dissipation += self.pairwise(w, acc);
        }
        if pre_weight > 0.0 {
            let w = hist.width();
            self.xq.copy_from_slice(&hist.positions(0)[..w]);
            self.vq.copy_from_slice(&hist.velocities(0)[..w]);
            dissipation += self.pairwise(pre_weight, acc);
        }
        acc.iter_mut().for_each(|a| *a *= self.scale);
        Ok(dissipation)
    }

    /// Adds `w ψᵢⱼ (vⱼ - vᵢ)` for all pairs of the buffered delayed state and
    /// returns `w Σ_{i<j} ψᵢⱼ |vⱼ - vᵢ|²`.
    fn pairwise(&self, weight: f64, acc: &mut [f64]) -> f64 {
        let (n, d) = (self.n, self.d);
        let mut diss = 0.0;
        for i in 0..n {
            let (xi, vi) = (&self.xq[i * d..(i + 1) * d], &self.vq[i * d..(i + 1) * d]);
            for j in (i + 1)..n {
                let (xj, vj) = (&self.xq[j * d..(j + 1) * d], &self.vq[j * d..(j + 1) * d]);
                let r2 = super::dist_sq(xi, xj);
                let p = weight * self.rate.psi_sq(r2);
                let mut dv2 = 0.0;
                for k in 0..d {
                    let dv = vj[k] - vi[k];
                    acc[i * d + k] += p * dv;
                    acc[j * d + k] -= p * dv;
                    dv2 += dv * dv;
                }
                diss += p * dv2;
            }
        }
        diss
    }
}

/// `v̇` at a time covered by a completed history.
pub fn accelerations(history: &History, t: f64, config: &SimConfig) -> Result<Vec<f64>, SimError> {
    let mut kernel = Kernel::new(config, history.agents(), history.dim())?;
    let mut acc = vec![0.0; history.width()];
    kernel.eval(history, t, None, &mut acc)?;
    Ok(acc)
}

/// Integrates from the constant datum `initial` up to `config.t_end` with
/// classical RK4 on the grid `k·dt`.
///
/// Diagnostics are sampled every `diag_stride` steps and at the final step.
/// On blow-up (a non-finite entry or a speed above `10⁶(1 + max initial
/// speed)`) the run aborts with everything computed so far.
pub fn run(config: &SimConfig, initial: &SwarmState) -> Result<RunOutput, SimError> {
    config.validate()?;
    initial.check()?;
    if initial.t != 0.0 {
        return Err(SimError::ConfigInvalid(format!("runs start at t = 0, got {}", initial.t)));
    }
    let (n, d) = (initial.n, initial.d);
    let w = n * d;
    let h = config.dt;
    let steps = config.steps();
    let mut kernel = Kernel::new(config, n, d)?;
    let weights = LyapunovWeights::new(config, kernel.quadrature(), h);
    let mut hist = History::new(initial, h, steps + 1);

    let max_speed = (0..n)
        .map(|i| initial.velocity(i).iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let speed_cap = 1e6 * (1.0 + max_speed);

    let mut d_samples: Vec<f64> = Vec::with_capacity(steps + 1);
    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    let mut series = DiagnosticsSeries::empty(d);

    let mut a_n = vec![0.0; w];
    let (mut x_s, mut v_s) = (vec![0.0; w], vec![0.0; w]);
    let (mut kx, mut kv) = (vec![0.0; w], vec![0.0; w]);
    let mut a_s = vec![0.0; w];
    let (mut x_next, mut v_next) = (vec![0.0; w], vec![0.0; w]);

    for step in 0..=steps {
        let t_n = hist.time(step);
        let d_n = kernel.eval(&hist, t_n, None, &mut a_n)?;
        hist.push_accel(&a_n);
        d_samples.push(d_n);
        if step == 0 {
            let d_x0 = position_diameter(n, d, initial.x.as_slice());
            series = DiagnosticsSeries::start(d, config, initial, d_n, d_x0);
        }
        if step % config.diag_stride == 0 || step == steps {
            rows.push(series.row(config, &hist, step, &d_samples, &weights));
        }
        if step == steps {
            break;
        }

        let x_n = hist.positions(step).to_vec();
        let v_n = hist.velocities(step).to_vec();
        // x_next/v_next accumulate Σ bᵢ kᵢ
        for c in 0..w {
            x_next[c] = v_n[c];
            v_next[c] = a_n[c];
        }
        kx.copy_from_slice(&v_n);
        kv.copy_from_slice(&a_n);
        for (c_stage, b) in [(0.5, 2.0), (0.5, 2.0), (1.0, 1.0)] {
            for c in 0..w {
                x_s[c] = x_n[c] + c_stage * h * kx[c];
                v_s[c] = v_n[c] + c_stage * h * kv[c];
            }
            let stage = Stage { t_n, x_n: &x_n, v_n: &v_n, a_n: &a_n, x: &x_s, v: &v_s };
            kernel.eval(&hist, t_n + c_stage * h, Some(&stage), &mut a_s)?;
            kx.copy_from_slice(&v_s);
            kv.copy_from_slice(&a_s);
            for c in 0..w {
                x_next[c] += b * kx[c];
                v_next[c] += b * kv[c];
            }
        }
        let mut healthy = true;
        for c in 0..w {
            x_next[c] = x_n[c] + h / 6.0 * x_next[c];
            v_next[c] = v_n[c] + h / 6.0 * v_next[c];
            healthy &= x_next[c].is_finite() && v_next[c].is_finite();
        }
        healthy = healthy
            && (0..n).all(|i| v_next[i * d..(i + 1) * d].iter().map(|c| c * c).sum::<f64>().sqrt() <= speed_cap);
        if !healthy {
            series.rows = rows;
            return Err(SimError::NonFiniteState {
                t: hist.time(step + 1),
                partial: Box::new(RunOutput { history: hist, diagnostics: series }),
            });
        }
        hist.push_state(&x_next, &v_next);
    }
    series.rows = rows;
    Ok(RunOutput { history: hist, diagnostics: series })
}
