//! The coupled state/tracker dynamics
//!
//! ```text
//! dx_i/dt = -Σ_j w_ij (h(x_i) - h(x_j)) - η y_i
//! dy_i/dt = -Σ_j w_ij (h(y_i) - h(y_j)) + d/dt ∇f_i(x_i)
//! ```
//!
//! integrated with fixed-step explicit Euler or classical RK4 under a
//! switching topology schedule. `d/dt ∇f_i` is realized exactly inside one
//! evaluation as the Hessian-vector product `∇²f_i(x_i) · dx_i/dt`; the
//! coupling is triangular, so `dx` is computed first.

use crate::graph::{DirectedWeightedGraph, SwitchingSchedule};
use crate::nonlinearity::LinkNonlinearity;
use crate::objectives::{CentralizedOptimum, NodeCostSuite};
use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::{s, Array1, ArrayView1};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Hard abort threshold on the state infinity norm.
const DIVERGENCE_LIMIT: f64 = 1e9;

/// Minimum allowed distance of `x(0)` from the consensus subspace.
const SPAN_ONE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ExplicitEuler,
    ClassicalRk4,
}

/// Tracker initialization. `PaperZero` starts the tracker at the origin,
/// which pins the conserved sum `Σy - Σ∇f` to `-Σ∇f(x(0))` and biases the
/// resulting equilibrium unless that sum vanishes; `GradientAtStart` is the
/// standard continuous-time gradient-tracking choice and the default here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YInit {
    PaperZero,
    #[serde(rename = "gradient-at-x0")]
    GradientAtStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Integrator,
    pub dt: f64,
    pub horizon: f64,
    pub eta: f64,
    pub y_init: YInit,
    /// Stop early once the optimality gap falls below this floor.
    #[serde(default)]
    pub gap_floor: Option<f64>,
    /// Record every k-th step into the trajectory (the first and last steps
    /// are always recorded; running maxima cover every step).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    10
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, horizon: f64, eta: f64) -> Self {
        Self {
            method: Integrator::ClassicalRk4,
            dt,
            horizon,
            eta,
            y_init: YInit::GradientAtStart,
            gap_floor: None,
            record_every: 10,
        }
    }

    fn validate(&self, schedule_dwell: Option<f64>) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} and horizon = {} must be positive",
                self.dt, self.horizon
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be positive".into()));
        }
        if let Some(dwell) = schedule_dwell {
            if self.dt > dwell {
                return Err(Error::InvalidConfig(format!(
                    "dt = {} exceeds the schedule dwell {}",
                    self.dt, dwell
                )));
            }
            let steps = dwell / self.dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::InvalidConfig(format!(
                    "dwell {} is not an integer multiple of dt = {}; steps would straddle topology changes",
                    dwell, self.dt
                )));
            }
        }
        Ok(())
    }
}

/// Stacked simulation state at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T: Scalar> {
    pub t: f64,
    pub x: Array1<T>,
    pub y: Array1<T>,
}

/// One recorded diagnostic row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T: Scalar> {
    pub t: f64,
    pub gap: T,
    pub consensus_err: T,
    pub tracking_err: T,
    pub lyapunov: T,
    pub topology_id: usize,
}

/// Full simulation output: decimated samples plus running extremes that
/// cover every integration step.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub samples: Vec<Sample<T>>,
    pub final_state: SimState<T>,
    pub optimum: CentralizedOptimum<T>,
    pub initial_gap: T,
    pub max_tracking_err: T,
    pub max_lyapunov_step_increase: T,
    pub lyapunov_initial: T,
    pub topology_changes: Vec<(f64, usize)>,
    pub terminated_early: bool,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_sample(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory has samples")
    }
}

/// Evaluate the right-hand side. Consensus sums run over the explicit edge
/// list; the tracker derivative uses the freshly computed `dx`.
pub fn rhs<T: Scalar>(
    x: &ArrayView1<T>,
    y: &ArrayView1<T>,
    graph: &DirectedWeightedGraph<T>,
    h: &LinkNonlinearity<T>,
    suite: &NodeCostSuite<T>,
    eta: T,
) -> Result<(Array1<T>, Array1<T>)> {
    let n = suite.n();
    let p = suite.dim();
    if graph.n() != n || x.len() != n * p || y.len() != n * p {
        return Err(Error::Dimension(format!(
            "rhs: graph n = {}, suite n = {}, |x| = {}, |y| = {}",
            graph.n(),
            n,
            x.len(),
            y.len()
        )));
    }
    let hx = h.apply_vec(&x.to_owned());
    let hy = h.apply_vec(&y.to_owned());

    let mut dx = Array1::<T>::zeros(n * p);
    let mut dy = Array1::<T>::zeros(n * p);
    for &(i, j, w) in graph.edges() {
        for k in 0..p {
            let (ik, jk) = (i * p + k, j * p + k);
            dx[ik] = dx[ik] - w * (hx[ik] - hx[jk]);
            dy[ik] = dy[ik] - w * (hy[ik] - hy[jk]);
        }
    }
    for ik in 0..n * p {
        dx[ik] = dx[ik] - eta * y[ik];
    }
    for (i, obj) in suite.objectives().iter().enumerate() {
        let xi = x.slice(s![i * p..(i + 1) * p]);
        let hess = obj.hessian(&xi);
        for r in 0..p {
            let mut acc = T::zero();
            for c in 0..p {
                acc = acc + hess[[r, c]] * dx[i * p + c];
            }
            if !acc.is_finite() {
                return Err(Error::NonFiniteDerivative { node: i });
            }
            dy[i * p + r] = dy[i * p + r] + acc;
        }
    }
    Ok((dx, dy))
}

/// One fixed-dt update with the configured method; the topology is constant
/// within a step.
pub fn step<T: Scalar>(
    state: &SimState<T>,
    cfg: &IntegratorConfig,
    graph: &DirectedWeightedGraph<T>,
    h: &LinkNonlinearity<T>,
    suite: &NodeCostSuite<T>,
) -> Result<SimState<T>> {
    let dt = T::from_f64(cfg.dt);
    let eta = T::from_f64(cfg.eta);
    let (x, y) = (&state.x, &state.y);
    let (nx, ny) = match cfg.method {
        Integrator::ExplicitEuler => {
            let (dx, dy) = rhs(&x.view(), &y.view(), graph, h, suite, eta)?;
            (x + &(dx * dt), y + &(dy * dt))
        }
        Integrator::ClassicalRk4 => {
            let half = T::from_f64(0.5);
            let sixth = T::from_f64(1.0 / 6.0);
            let two = T::from_f64(2.0);
            let (k1x, k1y) = rhs(&x.view(), &y.view(), graph, h, suite, eta)?;
            let (k2x, k2y) = rhs(
                &(x + &(&k1x * (dt * half))).view(),
                &(y + &(&k1y * (dt * half))).view(),
                graph,
                h,
                suite,
                eta,
            )?;
            let (k3x, k3y) = rhs(
                &(x + &(&k2x * (dt * half))).view(),
                &(y + &(&k2y * (dt * half))).view(),
                graph,
                h,
                suite,
                eta,
            )?;
            let (k4x, k4y) = rhs(
                &(x + &(&k3x * dt)).view(),
                &(y + &(&k3y * dt)).view(),
                graph,
                h,
                suite,
                eta,
            )?;
            let sx = (k1x + &(k2x * two) + &(k3x * two) + &k4x) * (dt * sixth);
            let sy = (k1y + &(k2y * two) + &(k3y * two) + &k4y) * (dt * sixth);
            (x + &sx, y + &sy)
        }
    };
    Ok(SimState {
        t: state.t + cfg.dt,
        x: nx,
        y: ny,
    })
}

/// Per-node sums of the tracker and of the local gradients; their difference
/// is conserved by the continuous dynamics over weight-balanced graphs.
pub fn tracking_sums<T: Scalar>(state: &SimState<T>, suite: &NodeCostSuite<T>) -> Result<Array1<T>> {
    let (n, p) = (suite.n(), suite.dim());
    let grad = suite.stacked_gradient(&state.x.view())?;
    let mut out = Array1::zeros(p);
    for i in 0..n {
        for k in 0..p {
            out[k] = out[k] + state.y[i * p + k] - grad[i * p + k];
        }
    }
    Ok(out)
}

/// `‖ (Σ_i y_i - Σ_i ∇f_i(x_i)) - c0 ‖_∞` against the t = 0 reference `c0`.
pub fn tracking_conservation_error<T: Scalar>(
    state: &SimState<T>,
    suite: &NodeCostSuite<T>,
    c0: &Array1<T>,
) -> Result<T> {
    let sums = tracking_sums(state, suite)?;
    Ok(sums
        .iter()
        .zip(c0.iter())
        .map(|(&s, &c)| (s - c).abs())
        .fold(T::zero(), T::max))
}

/// Draw `x(0)` uniformly from `[-5, 5]^{np}`, rejecting draws that fall
/// within `1e-6` of the consensus subspace.
pub fn draw_initial_state<T: Scalar>(n: usize, p: usize, seed: u64) -> Array1<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let x: Array1<T> =
            Array1::from_iter((0..n * p).map(|_| T::from_f64(rng.random_range(-5.0..5.0))));
        if n == 1 {
            return x;
        }
        // distance to span{1} per coordinate block
        let mut dist = T::zero();
        for k in 0..p {
            let mean = (0..n).map(|i| x[i * p + k]).sum::<T>() / T::from_f64(n as f64);
            for i in 0..n {
                let d = (x[i * p + k] - mean).abs();
                dist = dist.max(d);
            }
        }
        if dist > T::from_f64(SPAN_ONE_MARGIN) {
            return x;
        }
    }
}

/// Integrate the coupled dynamics to the horizon, switching topologies at
/// window boundaries, recording diagnostics as it goes.
pub fn simulate<T: Scalar>(
    suite: &NodeCostSuite<T>,
    schedule: &SwitchingSchedule<T>,
    h: &LinkNonlinearity<T>,
    cfg: &IntegratorConfig,
    x0_seed: u64,
    x0_override: Option<&Array1<T>>,
) -> Result<Trajectory<T>> {
    schedule.check()?;
    cfg.validate(schedule.dwell())?;
    let (n, p) = (suite.n(), suite.dim());

    let x0 = match x0_override {
        Some(x) => {
            if x.len() != n * p {
                return Err(Error::Dimension(format!(
                    "x0 override has length {}, expected {}",
                    x.len(),
                    n * p
                )));
            }
            x.clone()
        }
        None => draw_initial_state(n, p, x0_seed),
    };
    let y0 = match cfg.y_init {
        YInit::PaperZero => Array1::zeros(n * p),
        YInit::GradientAtStart => suite.stacked_gradient(&x0.view())?,
    };

    let optimum = suite.centralized_optimum()?;
    let mut x_star = Array1::zeros(n * p);
    for i in 0..n {
        for k in 0..p {
            x_star[i * p + k] = optimum.x_star[k];
        }
    }

    let mut state = SimState {
        t: 0.0,
        x: x0,
        y: y0,
    };
    let c0 = tracking_sums(&state, suite)?;

    let lyapunov = |st: &SimState<T>| -> T {
        let mut v = T::zero();
        for i in 0..n * p {
            let dx = st.x[i] - x_star[i];
            v = v + dx * dx + st.y[i] * st.y[i];
        }
        v * T::from_f64(0.5)
    };

    let mut traj = Trajectory {
        samples: Vec::new(),
        final_state: state.clone(),
        optimum: optimum.clone(),
        initial_gap: T::zero(),
        max_tracking_err: T::zero(),
        max_lyapunov_step_increase: T::neg_infinity(),
        lyapunov_initial: lyapunov(&state),
        topology_changes: Vec::new(),
        terminated_early: false,
    };

    let record = |traj: &mut Trajectory<T>, st: &SimState<T>, topo: usize| -> Result<Sample<T>> {
        let gaps = suite.optimality_gap(&st.x.view(), &optimum)?;
        let sample = Sample {
            t: st.t,
            gap: gaps.gap,
            consensus_err: gaps.consensus_error,
            tracking_err: tracking_conservation_error(st, suite, &c0)?,
            lyapunov: lyapunov(st),
            topology_id: topo,
        };
        traj.max_tracking_err = traj.max_tracking_err.max(sample.tracking_err);
        Ok(sample)
    };

    let first = record(&mut traj, &state, schedule.window_index(0.0))?;
    traj.initial_gap = first.gap;
    traj.samples.push(first);

    let mut prev_v = traj.lyapunov_initial;
    let mut step_count: usize = 0;
    let mut window_start = 0.0f64;
    let eps_t = cfg.dt * 1e-6;

    while window_start < cfg.horizon - eps_t {
        let window_end = schedule.window_end(window_start, cfg.horizon);
        let topo = schedule.window_index(window_start);
        if window_start > 0.0 {
            traj.topology_changes.push((window_start, topo));
        }
        let graph = schedule.graph_at(window_start)?;
        let span = window_end - window_start;
        let steps = (span / cfg.dt).round() as usize;
        if ((steps as f64) * cfg.dt - span).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "window [{window_start}, {window_end}] is not an integer number of dt = {} steps",
                cfg.dt
            )));
        }

        for k in 0..steps {
            state = step(&state, cfg, &graph, h, suite)?;
            state.t = window_start + (k + 1) as f64 * cfg.dt;
            step_count += 1;

            let norm = state
                .x
                .iter()
                .chain(state.y.iter())
                .fold(T::zero(), |acc, v| acc.max(v.abs()));
            if !norm.is_finite() || norm > T::from_f64(DIVERGENCE_LIMIT) {
                return Err(Error::Divergence {
                    t: state.t,
                    norm: norm.as_f64(),
                });
            }

            let sample = record(&mut traj, &state, topo)?;
            let dv = sample.lyapunov - prev_v;
            traj.max_lyapunov_step_increase = traj.max_lyapunov_step_increase.max(dv);
            prev_v = sample.lyapunov;

            let due = step_count % cfg.record_every == 0;
            let done = state.t >= cfg.horizon - eps_t;
            if due || done {
                traj.samples.push(sample);
            }
            if let Some(floor) = cfg.gap_floor {
                if sample.gap < T::from_f64(floor) {
                    if !due && !done {
                        traj.samples.push(sample);
                    }
                    traj.terminated_early = true;
                    traj.final_state = state;
                    return Ok(traj);
                }
            }
        }
        window_start = window_end;
    }

    traj.final_state = state;
    Ok(traj)
}
