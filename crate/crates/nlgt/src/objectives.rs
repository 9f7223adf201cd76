//! Per-node cost functions `f_i = (1/m) Σ_j f_{i,j}` with closed-form
//! gradients and Hessians, suite-level aggregates, the positive-definite
//! aggregate-Hessian check, and centralized oracles for ground truth.

use crate::linalg::lu_solve;
use crate::scalar::Scalar;
use crate::{eigen, Error, Result};
use ndarray::{Array1, Array2, ArrayView1};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One node's local objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalObjective<T: Scalar> {
    dim: usize,
    form: Form<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum Form<T: Scalar> {
    /// `f(x) = x' H x / 2 + b' x + c` with constant symmetric `H`.
    Quadratic {
        hessian: Array2<T>,
        linear: Array1<T>,
        constant: T,
    },
    /// Mean squared residual of a 2D regression line over local points;
    /// state is `[beta1, beta2, nu]` and the fit is `beta' chi - nu`.
    /// Quadratic in the state, so the closed form is cached.
    Regression {
        points: Vec<([T; 2], T)>,
        hessian: Array2<T>,
        linear: Array1<T>,
        constant: T,
    },
    /// Scalar `2x^2 + 3 sin^2 x + a_mean cos x + b_mean x`, the mean of
    /// `m` locally non-convex samples.
    NonconvexScalar {
        a: Vec<T>,
        b: Vec<T>,
        a_mean: T,
        b_mean: T,
    },
}

impl<T: Scalar> LocalObjective<T> {
    pub fn quadratic(hessian: Array2<T>, linear: Array1<T>, constant: T) -> Result<Self> {
        let p = hessian.nrows();
        if hessian.ncols() != p || linear.len() != p {
            return Err(Error::Dimension("quadratic objective shapes".into()));
        }
        Ok(Self {
            dim: p,
            form: Form::Quadratic {
                hessian,
                linear,
                constant,
            },
        })
    }

    /// Least-squares cost `(1/m) Σ (beta' chi_j - nu - y_j)^2`, `p = 3`.
    pub fn regression(points: Vec<([T; 2], T)>) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(Error::InvalidObjective(
                "regression objective needs at least one point".into(),
            ));
        }
        let minv = T::one() / T::from_f64(m as f64);
        let two = T::from_f64(2.0);
        let mut hessian = Array2::zeros((3, 3));
        let mut linear = Array1::zeros(3);
        let mut constant = T::zero();
        for &([c1, c2], y) in &points {
            let z = [c1, c2, -T::one()];
            for r in 0..3 {
                for c in 0..3 {
                    hessian[[r, c]] = hessian[[r, c]] + two * minv * z[r] * z[c];
                }
                linear[r] = linear[r] - two * minv * z[r] * y;
            }
            constant = constant + minv * y * y;
        }
        Ok(Self {
            dim: 3,
            form: Form::Regression {
                points,
                hessian,
                linear,
                constant,
            },
        })
    }

    /// `(1/m) Σ_j [2x^2 + 3 sin^2 x + a_j cos x + b_j x]`, `p = 1`.
    pub fn nonconvex(a: Vec<T>, b: Vec<T>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidObjective(
                "nonconvex objective needs equal, nonempty coefficient lists".into(),
            ));
        }
        let m = T::from_f64(a.len() as f64);
        let a_mean = a.iter().copied().sum::<T>() / m;
        let b_mean = b.iter().copied().sum::<T>() / m;
        Ok(Self {
            dim: 1,
            form: Form::NonconvexScalar { a, b, a_mean, b_mean },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &ArrayView1<T>) -> T {
        match &self.form {
            Form::Quadratic {
                hessian,
                linear,
                constant,
            }
            | Form::Regression {
                hessian,
                linear,
                constant,
                ..
            } => {
                let hx = hessian.dot(x);
                T::from_f64(0.5) * x.dot(&hx) + linear.dot(x) + *constant
            }
            Form::NonconvexScalar { a_mean, b_mean, .. } => {
                let z = x[0];
                let two = T::from_f64(2.0);
                let three = T::from_f64(3.0);
                two * z * z + three * z.sin() * z.sin() + *a_mean * z.cos() + *b_mean * z
            }
        }
    }

    pub fn gradient(&self, x: &ArrayView1<T>) -> Array1<T> {
        match &self.form {
            Form::Quadratic {
                hessian, linear, ..
            }
            | Form::Regression {
                hessian, linear, ..
            } => hessian.dot(x) + linear,
            Form::NonconvexScalar { a_mean, b_mean, .. } => {
                let z = x[0];
                let four = T::from_f64(4.0);
                let three = T::from_f64(3.0);
                let g = four * z + three * (z + z).sin() - *a_mean * z.sin() + *b_mean;
                Array1::from_vec(vec![g])
            }
        }
    }

    pub fn hessian(&self, x: &ArrayView1<T>) -> Array2<T> {
        match &self.form {
            Form::Quadratic { hessian, .. } | Form::Regression { hessian, .. } => hessian.clone(),
            Form::NonconvexScalar { a_mean, .. } => {
                let z = x[0];
                let four = T::from_f64(4.0);
                let six = T::from_f64(6.0);
                let h = four + six * (z + z).cos() - *a_mean * z.cos();
                Array2::from_shape_vec((1, 1), vec![h]).expect("1x1")
            }
        }
    }

    /// True when the Hessian does not depend on the state.
    pub fn has_constant_hessian(&self) -> bool {
        matches!(
            self.form,
            Form::Quadratic { .. } | Form::Regression { .. }
        )
    }

    pub fn regression_points(&self) -> Option<&[([T; 2], T)]> {
        match &self.form {
            Form::Regression { points, .. } => Some(points),
            _ => None,
        }
    }

    pub fn nonconvex_coefficients(&self) -> Option<(&[T], &[T])> {
        match &self.form {
            Form::NonconvexScalar { a, b, .. } => Some((a, b)),
            _ => None,
        }
    }
}

/// Suite of `n` local objectives with a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCostSuite<T: Scalar> {
    objectives: Vec<LocalObjective<T>>,
    dim: usize,
}

/// `(x̄*, F*)` from a centralized solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedOptimum<T: Scalar> {
    pub x_star: Array1<T>,
    pub f_star: T,
}

/// Optimality gap at the node-average state plus the consensus spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport<T> {
    pub gap: T,
    pub consensus_error: T,
}

/// Outcome of the aggregate-Hessian positivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct Assumption1Report<T: Scalar> {
    pub ok: bool,
    pub violating_sample: Option<Array1<T>>,
    pub min_eigenvalue: T,
}

impl<T: Scalar> NodeCostSuite<T> {
    pub fn new(objectives: Vec<LocalObjective<T>>) -> Result<Self> {
        let n = objectives.len();
        if n == 0 {
            return Err(Error::InvalidObjective("empty suite".into()));
        }
        let dim = objectives[0].dim();
        if objectives.iter().any(|o| o.dim() != dim) {
            return Err(Error::Dimension(
                "suite objectives must share one dimension".into(),
            ));
        }
        Ok(Self { objectives, dim })
    }

    pub fn n(&self) -> usize {
        self.objectives.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self, i: usize) -> &LocalObjective<T> {
        &self.objectives[i]
    }

    pub fn objectives(&self) -> &[LocalObjective<T>] {
        &self.objectives
    }

    /// Global cost `F(x) = (1/n) Σ f_i(x)` at one consensus point.
    pub fn global_value(&self, point: &ArrayView1<T>) -> T {
        let n = T::from_f64(self.n() as f64);
        self.objectives.iter().map(|o| o.value(point)).sum::<T>() / n
    }

    pub fn global_gradient(&self, point: &ArrayView1<T>) -> Array1<T> {
        let n = T::from_f64(self.n() as f64);
        let mut g = Array1::zeros(self.dim);
        for o in &self.objectives {
            g = g + o.gradient(point);
        }
        g / n
    }

    pub fn global_hessian(&self, point: &ArrayView1<T>) -> Array2<T> {
        let n = T::from_f64(self.n() as f64);
        let mut h = Array2::zeros((self.dim, self.dim));
        for o in &self.objectives {
            h = h + o.hessian(point);
        }
        h / n
    }

    /// Node-average of a stacked state.
    pub fn average_state(&self, stacked: &ArrayView1<T>) -> Array1<T> {
        let (n, p) = (self.n(), self.dim);
        let mut avg = Array1::zeros(p);
        for i in 0..n {
            for k in 0..p {
                avg[k] = avg[k] + stacked[i * p + k];
            }
        }
        avg / T::from_f64(n as f64)
    }

    /// Per-node gradients of a stacked state, stacked.
    pub fn stacked_gradient(&self, stacked: &ArrayView1<T>) -> Result<Array1<T>> {
        let (n, p) = (self.n(), self.dim);
        if stacked.len() != n * p {
            return Err(Error::Dimension(format!(
                "stacked state has length {}, expected {}",
                stacked.len(),
                n * p
            )));
        }
        let mut out = Array1::zeros(n * p);
        for (i, o) in self.objectives.iter().enumerate() {
            let xi = stacked.slice(ndarray::s![i * p..(i + 1) * p]);
            let g = o.gradient(&xi);
            for k in 0..p {
                out[i * p + k] = g[k];
            }
        }
        Ok(out)
    }

    /// Per-node Hessians evaluated at the node slices of a stacked state.
    pub fn hessian_blocks(&self, stacked: &ArrayView1<T>) -> Result<Vec<Array2<T>>> {
        let (n, p) = (self.n(), self.dim);
        if stacked.len() != n * p {
            return Err(Error::Dimension(format!(
                "stacked state has length {}, expected {}",
                stacked.len(),
                n * p
            )));
        }
        Ok(self
            .objectives
            .iter()
            .enumerate()
            .map(|(i, o)| o.hessian(&stacked.slice(ndarray::s![i * p..(i + 1) * p])))
            .collect())
    }

    /// At each stacked sample, form `Σ_i ∇²f_i(x_i)` and require its minimum
    /// eigenvalue to exceed `tol`. Reports the first violating sample.
    pub fn check_assumption1(&self, samples: &[Array1<T>], tol: T) -> Result<Assumption1Report<T>> {
        let p = self.dim;
        let mut worst = T::infinity();
        for sample in samples {
            let blocks = self.hessian_blocks(&sample.view())?;
            let mut agg = Array2::<T>::zeros((p, p));
            for b in &blocks {
                agg = agg + b;
            }
            let eigs = eigen::eigenvalues(&agg.view())?;
            let min_re = eigs.iter().map(|l| l.re).fold(T::infinity(), T::min);
            if min_re < worst {
                worst = min_re;
            }
            if min_re <= tol {
                return Ok(Assumption1Report {
                    ok: false,
                    violating_sample: Some(sample.clone()),
                    min_eigenvalue: min_re,
                });
            }
        }
        Ok(Assumption1Report {
            ok: true,
            violating_sample: None,
            min_eigenvalue: worst,
        })
    }

    /// Centralized minimizer of `F`: a pooled closed-form solve when every
    /// Hessian is constant, otherwise (scalar problems) a dense grid over
    /// `[-10, 10]` refined by Newton steps.
    pub fn centralized_optimum(&self) -> Result<CentralizedOptimum<T>> {
        if self.objectives.iter().all(|o| o.has_constant_hessian()) {
            let origin = Array1::zeros(self.dim);
            let h = self.global_hessian(&origin.view());
            let eigs = eigen::eigenvalues(&h.view())?;
            let min_re = eigs.iter().map(|l| l.re).fold(T::infinity(), T::min);
            if min_re <= T::zero() {
                return Err(Error::InvalidObjective(format!(
                    "pooled quadratic is not positive definite (min eig {min_re})"
                )));
            }
            let g0 = self.global_gradient(&origin.view());
            let x_star = lu_solve(&h.view(), &(-g0).view())?;
            let f_star = self.global_value(&x_star.view());
            return Ok(CentralizedOptimum { x_star, f_star });
        }
        if self.dim != 1 {
            return Err(Error::Unsupported(
                "centralized optimum: non-quadratic suites are supported only for p = 1".into(),
            ));
        }
        self.scalar_grid_optimum()
    }

    fn scalar_grid_optimum(&self) -> Result<CentralizedOptimum<T>> {
        const GRID: usize = 100_000;
        let lo = T::from_f64(-10.0);
        let hi = T::from_f64(10.0);
        let step = (hi - lo) / T::from_f64(GRID as f64);
        let mut best_x = lo;
        let mut best_f = T::infinity();
        let mut best_idx = 0usize;
        for k in 0..=GRID {
            let x = lo + step * T::from_f64(k as f64);
            let f = self.global_value(&ndarray::aview1(&[x]));
            if f < best_f {
                best_f = f;
                best_x = x;
                best_idx = k;
            }
        }
        if best_idx == 0 || best_idx == GRID {
            return Err(Error::InvalidObjective(
                "grid boundary attains the minimum; enlarge the search domain".into(),
            ));
        }
        // Newton polish from the best grid point.
        let mut x = best_x;
        for _ in 0..60 {
            let xv = [x];
            let g = self.global_gradient(&ndarray::aview1(&xv))[0];
            let h = self.global_hessian(&ndarray::aview1(&xv))[[0, 0]];
            if h <= T::zero() {
                break;
            }
            let nx = x - g / h;
            if nx < lo || nx > hi {
                break;
            }
            let moved = (nx - x).abs();
            x = nx;
            if moved <= T::epsilon() * T::from_f64(4.0) * (T::one() + x.abs()) {
                break;
            }
        }
        let fx = self.global_value(&ndarray::aview1(&[x]));
        let (x_star, f_star) = if fx <= best_f { (x, fx) } else { (best_x, best_f) };
        Ok(CentralizedOptimum {
            x_star: Array1::from_vec(vec![x_star]),
            f_star,
        })
    }

    /// `F` at the node-average state minus `F*`, plus `max_i |x_i - x̄|_2`.
    pub fn optimality_gap(
        &self,
        stacked: &ArrayView1<T>,
        optimum: &CentralizedOptimum<T>,
    ) -> Result<GapReport<T>> {
        let (n, p) = (self.n(), self.dim);
        if stacked.len() != n * p {
            return Err(Error::Dimension(format!(
                "stacked state has length {}, expected {}",
                stacked.len(),
                n * p
            )));
        }
        let avg = self.average_state(stacked);
        let gap = self.global_value(&avg.view()) - optimum.f_star;
        let mut consensus_error = T::zero();
        for i in 0..n {
            let mut dist2 = T::zero();
            for k in 0..p {
                let d = stacked[i * p + k] - avg[k];
                dist2 = dist2 + d * d;
            }
            consensus_error = consensus_error.max(dist2.sqrt());
        }
        Ok(GapReport {
            gap,
            consensus_error,
        })
    }
}

/// Synthetic 2D regression instance: `m_total` pooled points on a noisy
/// line, each node holding `m_per_node` of them drawn without replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData<T: Scalar> {
    pub pooled: Vec<([T; 2], T)>,
    pub node_indices: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Data-generation defaults (the studied setup fixes only the node/batch
/// counts; the line itself is a configuration value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataConfig {
    pub n: usize,
    pub m_total: usize,
    pub m_per_node: usize,
    pub slope: [f64; 2],
    pub intercept: f64,
    pub noise_sigma: f64,
}

impl Default for RegressionDataConfig {
    fn default() -> Self {
        Self {
            n: 10,
            m_total: 100,
            m_per_node: 50,
            slope: [1.0, 0.0],
            intercept: 1.0,
            noise_sigma: 0.1,
        }
    }
}

pub fn generate_regression_data<T: Scalar>(
    cfg: &RegressionDataConfig,
    seed: u64,
) -> Result<RegressionData<T>> {
    if cfg.m_per_node == 0 || cfg.m_per_node > cfg.m_total || cfg.n == 0 {
        return Err(Error::InvalidConfig(format!(
            "regression data: n = {}, m_total = {}, m_per_node = {}",
            cfg.n, cfg.m_total, cfg.m_per_node
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pooled = Vec::with_capacity(cfg.m_total);
    for _ in 0..cfg.m_total {
        // standard normal coordinates via Box-Muller keeps the pooled
        // Hessian well conditioned
        let (c1, c2) = (gauss(&mut rng), gauss(&mut rng));
        let y = cfg.slope[0] * c1 + cfg.slope[1] * c2 + cfg.intercept
            + cfg.noise_sigma * gauss(&mut rng);
        pooled.push(([T::from_f64(c1), T::from_f64(c2)], T::from_f64(y)));
    }
    let mut node_indices = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut idx: Vec<usize> = (0..cfg.m_total).collect();
        idx.shuffle(&mut rng);
        idx.truncate(cfg.m_per_node);
        idx.sort_unstable();
        node_indices.push(idx);
    }
    Ok(RegressionData {
        pooled,
        node_indices,
        seed,
    })
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; the pair's second member is discarded for stream simplicity.
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn regression_suite<T: Scalar>(data: &RegressionData<T>) -> Result<NodeCostSuite<T>> {
    let objectives = data
        .node_indices
        .iter()
        .map(|idx| LocalObjective::regression(idx.iter().map(|&j| data.pooled[j]).collect()))
        .collect::<Result<Vec<_>>>()?;
    NodeCostSuite::new(objectives)
}

/// Zero-sum coefficient matrices for the synthetic non-convex cost.
#[derive(Debug, Clone, PartialEq)]
pub struct NonconvexCoefficients<T: Scalar> {
    pub a: Array2<T>,
    pub b: Array2<T>,
    pub seed: u64,
}

pub fn generate_nonconvex_coefficients<T: Scalar>(
    n: usize,
    m: usize,
    seed: u64,
) -> Result<NonconvexCoefficients<T>> {
    if n * m < 2 {
        return Err(Error::InvalidConfig("need n * m >= 2 coefficients".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<Array2<T>> {
        let total = (n * m) as f64;
        let mut vals: Vec<f64> = (0..n * m).map(|_| rng.random_range(-5.0..5.0)).collect();
        // mean subtraction moves entries slightly out of the open range now
        // and then; those entries are redrawn and the matrix re-centered
        for _pass in 0..1000 {
            let mean: f64 = vals.iter().sum::<f64>() / total;
            for v in &mut vals {
                *v -= mean;
            }
            let residual: f64 = vals.iter().sum::<f64>() / total;
            for v in &mut vals {
                *v -= residual;
            }
            let mut clean = true;
            for v in &mut vals {
                if v.abs() >= 5.0 || v.abs() < 1e-9 {
                    *v = rng.random_range(-5.0..5.0);
                    clean = false;
                }
            }
            if clean {
                return Ok(Array2::from_shape_vec(
                    (n, m),
                    vals.into_iter().map(T::from_f64).collect(),
                )
                .unwrap());
            }
        }
        Err(Error::GenerationFailed(
            "could not draw zero-sum coefficients within bounds".into(),
        ))
    };
    let a = draw(&mut rng)?;
    let b = draw(&mut rng)?;
    Ok(NonconvexCoefficients { a, b, seed })
}

/// Zero-sum coefficients in which one node's cosine terms all lean the same
/// way, hard enough that its local cost develops a genuine side valley.
/// A mean-coefficient draw almost never does this on its own (averaging
/// `m` uniform draws keeps node means near zero), so the paper-style
/// witness instance is constructed: node `valley_node` gets cosine
/// coefficients near the upper bound and the excess is spread across the
/// remaining nodes, preserving the global zero sum and the open range.
pub fn generate_nonconvex_with_valley<T: Scalar>(
    n: usize,
    m: usize,
    seed: u64,
    valley_node: usize,
) -> Result<NonconvexCoefficients<T>> {
    if n < 2 || valley_node >= n {
        return Err(Error::InvalidConfig(
            "valley instance needs n >= 2 and a valid node index".into(),
        ));
    }
    // A side valley needs the valley node's means to clear
    // a(pi/2) - b > 2 pi, e.g. a-mean near +4.7 with b-mean near -1.8,
    // which pins a stationary minimum around x = 2.2 separated from the
    // global basin.
    // Remove the biased row's excess from the other rows proportionally to
    // each entry's slack toward the boundary the shift approaches; the
    // affine map fixes that boundary, so no entry can leave the open range.
    let bias_row = |vals: &mut [f64], row: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng| {
        let mut excess = 0.0;
        for j in 0..m {
            let new = rng.random_range(lo..hi);
            excess += new - vals[row * m + j];
            vals[row * m + j] = new;
        }
        for _ in 0..4 {
            let slack: f64 = vals
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx / m != valley_node)
                .map(|(_, v)| if excess > 0.0 { v + 5.0 } else { 5.0 - v })
                .sum();
            let c = excess.abs() / slack;
            for (idx, v) in vals.iter_mut().enumerate() {
                if idx / m == valley_node {
                    continue;
                }
                if excess > 0.0 {
                    *v -= (*v + 5.0) * c;
                } else {
                    *v += (5.0 - *v) * c;
                }
            }
            excess = vals.iter().sum();
            if excess.abs() < 1e-13 {
                break;
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let base = generate_nonconvex_coefficients::<T>(n, m, rng.random())?;
        let mut a: Vec<f64> = base.a.iter().map(|v| v.as_f64()).collect();
        let mut b: Vec<f64> = base.b.iter().map(|v| v.as_f64()).collect();
        bias_row(&mut a, valley_node, 4.5, 4.95, &mut rng);
        bias_row(&mut b, valley_node, -2.2, -1.4, &mut rng);

        let clean = |vals: &[f64]| {
            vals.iter().all(|v| v.abs() < 5.0 && v.abs() > 1e-9)
                && vals.iter().sum::<f64>().abs() <= 1e-12
        };
        if !clean(&a) || !clean(&b) {
            continue;
        }
        let coeffs = NonconvexCoefficients {
            a: Array2::from_shape_vec((n, m), a.into_iter().map(T::from_f64).collect()).unwrap(),
            b: Array2::from_shape_vec((n, m), b.into_iter().map(T::from_f64).collect()).unwrap(),
            seed,
        };
        let suite = nonconvex_suite(&coeffs)?;
        let minima = local_minima(
            suite.objective(valley_node),
            T::from_f64(-6.0),
            T::from_f64(6.0),
            6000,
        );
        // a genuine side valley, not the tilted global basin
        if minima.iter().any(|z| z.abs() > T::from_f64(1.0)) {
            return Ok(coeffs);
        }
    }
    Err(Error::GenerationFailed(
        "no valley instance found within the attempt budget".into(),
    ))
}

pub fn nonconvex_suite<T: Scalar>(coeffs: &NonconvexCoefficients<T>) -> Result<NodeCostSuite<T>> {
    let objectives = (0..coeffs.a.nrows())
        .map(|i| {
            LocalObjective::nonconvex(
                coeffs.a.row(i).to_vec(),
                coeffs.b.row(i).to_vec(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    NodeCostSuite::new(objectives)
}

/// Stationary local minima of a scalar objective inside `[lo, hi]`, found by
/// a sign-change scan of the gradient plus Newton polish.
pub fn local_minima<T: Scalar>(obj: &LocalObjective<T>, lo: T, hi: T, grid: usize) -> Vec<T> {
    assert_eq!(obj.dim(), 1, "local_minima expects a scalar objective");
    let step = (hi - lo) / T::from_f64(grid as f64);
    let g_at = |x: T| obj.gradient(&ndarray::aview1(&[x]))[0];
    let h_at = |x: T| obj.hessian(&ndarray::aview1(&[x]))[[0, 0]];
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev_g = g_at(lo);
    for k in 1..=grid {
        let x = lo + step * T::from_f64(k as f64);
        let g = g_at(x);
        if prev_g < T::zero() && g >= T::zero() {
            // bracketed minimum; polish
            let mut z = (prev_x + x) / T::from_f64(2.0);
            for _ in 0..50 {
                let h = h_at(z);
                if h <= T::zero() {
                    break;
                }
                let nz = z - g_at(z) / h;
                if (nz - z).abs() <= T::epsilon() * T::from_f64(8.0) * (T::one() + z.abs()) {
                    z = nz;
                    break;
                }
                z = nz;
            }
            if z > lo && z < hi && h_at(z) > T::zero() {
                out.push(z);
            }
        }
        prev_x = x;
        prev_g = g;
    }
    out
}

/// Serialized suite: point lists per node for regression, dense coefficient
/// arrays for the non-convex family, with the generating seed recorded.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuiteJson {
    Regression {
        seed: u64,
        nodes: Vec<Vec<[f64; 3]>>,
    },
    Nonconvex {
        seed: u64,
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
    },
}

pub fn suite_to_json<T: Scalar>(suite: &NodeCostSuite<T>, seed: u64) -> Result<SuiteJson> {
    if suite.objective(0).regression_points().is_some() {
        let nodes = suite
            .objectives()
            .iter()
            .map(|o| {
                o.regression_points()
                    .ok_or_else(|| Error::Unsupported("mixed suite serialization".into()))
                    .map(|pts| {
                        pts.iter()
                            .map(|&([c1, c2], y)| [c1.as_f64(), c2.as_f64(), y.as_f64()])
                            .collect()
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(SuiteJson::Regression { seed, nodes });
    }
    if suite.objective(0).nonconvex_coefficients().is_some() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for o in suite.objectives() {
            let (ai, bi) = o
                .nonconvex_coefficients()
                .ok_or_else(|| Error::Unsupported("mixed suite serialization".into()))?;
            a.push(ai.iter().map(|v| v.as_f64()).collect());
            b.push(bi.iter().map(|v| v.as_f64()).collect());
        }
        return Ok(SuiteJson::Nonconvex { seed, a, b });
    }
    Err(Error::Unsupported(
        "only regression and nonconvex suites serialize".into(),
    ))
}

pub fn suite_from_json<T: Scalar>(json: &SuiteJson) -> Result<NodeCostSuite<T>> {
    match json {
        SuiteJson::Regression { nodes, .. } => {
            let objectives = nodes
                .iter()
                .map(|pts| {
                    LocalObjective::regression(
                        pts.iter()
                            .map(|&[c1, c2, y]| {
                                ([T::from_f64(c1), T::from_f64(c2)], T::from_f64(y))
                            })
                            .collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            NodeCostSuite::new(objectives)
        }
        SuiteJson::Nonconvex { a, b, .. } => {
            let objectives = a
                .iter()
                .zip(b)
                .map(|(ai, bi)| {
                    LocalObjective::nonconvex(
                        ai.iter().copied().map(T::from_f64).collect(),
                        bi.iter().copied().map(T::from_f64).collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            NodeCostSuite::new(objectives)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fd_gradient(obj: &LocalObjective<f64>, x: &Array1<f64>) -> Array1<f64> {
        let p = obj.dim();
        let mut g = Array1::zeros(p);
        for k in 0..p {
            let h = 1e-6 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            g[k] = (obj.value(&xp.view()) - obj.value(&xm.view())) / (2.0 * h);
        }
        g
    }

    fn fd_hessian(obj: &LocalObjective<f64>, x: &Array1<f64>) -> Array2<f64> {
        let p = obj.dim();
        let mut hmat = Array2::zeros((p, p));
        for k in 0..p {
            let h = 1e-5 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let gp = obj.gradient(&xp.view());
            let gm = obj.gradient(&xm.view());
            for r in 0..p {
                hmat[[r, k]] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        hmat
    }

    fn exact_fit_points() -> Vec<([f64; 2], f64)> {
        // y = chi1 + 1, so beta = (1, 0), nu = -1 fits exactly
        vec![
            ([0.0, 0.0], 1.0),
            ([1.0, 0.0], 2.0),
            ([2.0, 0.0], 3.0),
            ([1.0, 1.0], 2.0),
        ]
    }

    #[test]
    fn regression_exact_interpolation() {
        let obj = LocalObjective::regression(exact_fit_points()).unwrap();
        let xstar = array![1.0, 0.0, -1.0];
        assert!(obj.value(&xstar.view()).abs() < 1e-14);
        assert!(obj.gradient(&xstar.view()).iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn regression_single_point_zero_gradient_at_fit() {
        let obj = LocalObjective::regression(vec![([2.0f64, -1.0], 3.0)]).unwrap();
        // any state with beta' chi - nu = y has zero residual
        let x = array![1.0, 0.0, -1.0]; // 2 - (-1) = 3
        assert!(obj.value(&x.view()).abs() < 1e-14);
        assert!(obj.gradient(&x.view()).iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reg = LocalObjective::regression(exact_fit_points()).unwrap();
        let a: Vec<f64> = (0..7).map(|_| rng.random_range(-4.0..4.0)).collect();
        let b: Vec<f64> = (0..7).map(|_| rng.random_range(-4.0..4.0)).collect();
        let ncv = LocalObjective::nonconvex(a, b).unwrap();
        for obj in [&reg, &ncv] {
            for _ in 0..100 {
                let x = Array1::from_iter((0..obj.dim()).map(|_| rng.random_range(-5.0..5.0)));
                let g = obj.gradient(&x.view());
                let gfd = fd_gradient(obj, &x);
                for k in 0..obj.dim() {
                    let scale = 1.0 + g[k].abs();
                    assert!(
                        (g[k] - gfd[k]).abs() / scale < 1e-6,
                        "gradient mismatch at {x}: {} vs {}",
                        g[k],
                        gfd[k]
                    );
                }
                let h = obj.hessian(&x.view());
                let hfd = fd_hessian(obj, &x);
                for r in 0..obj.dim() {
                    for c in 0..obj.dim() {
                        let scale = 1.0 + h[[r, c]].abs();
                        assert!(
                            (h[[r, c]] - hfd[[r, c]]).abs() / scale < 1e-5,
                            "hessian mismatch at {x}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn nonconvex_hand_values() {
        let obj = LocalObjective::nonconvex(vec![0.0; 4], vec![0.0; 4]).unwrap();
        let zero = array![0.0];
        assert_eq!(obj.value(&zero.view()), 0.0);
        assert_eq!(obj.gradient(&zero.view())[0], 0.0);
        assert_eq!(obj.hessian(&zero.view())[[0, 0]], 10.0);

        // gradient at 0 is the b-mean
        let obj = LocalObjective::nonconvex(vec![1.0f64, 2.0], vec![3.0, -1.0]).unwrap();
        assert!((obj.gradient(&zero.view())[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_generator_invariants() {
        let c = generate_nonconvex_coefficients::<f64>(10, 40, 3).unwrap();
        assert_eq!(c.a.dim(), (10, 40));
        assert_eq!(c.b.dim(), (10, 40));
        assert!(c.a.iter().sum::<f64>().abs() <= 1e-12);
        assert!(c.b.iter().sum::<f64>().abs() <= 1e-12);
        assert!(c.a.iter().all(|v| v.abs() > 0.0 && v.abs() < 5.0));

        let c2 = generate_nonconvex_coefficients::<f64>(10, 40, 3).unwrap();
        assert_eq!(c.a, c2.a);
        assert_eq!(c.b, c2.b);
    }

    #[test]
    fn assumption1_examples() {
        // regression with non-collinear pooled points
        let suite = NodeCostSuite::new(vec![
            LocalObjective::regression(exact_fit_points()).unwrap(),
            LocalObjective::regression(vec![([0.5, 2.0], 1.0), ([-1.0, 0.5], 0.2)]).unwrap(),
        ])
        .unwrap();
        let samples: Vec<Array1<f64>> = vec![Array1::zeros(6)];
        assert!(suite.check_assumption1(&samples, 0.0).unwrap().ok);

        // identical concave costs fail
        let concave = LocalObjective::quadratic(array![[-2.0]], array![0.0], 0.0).unwrap();
        let suite = NodeCostSuite::new(vec![concave.clone(), concave]).unwrap();
        let samples = vec![Array1::zeros(2)];
        let rep = suite.check_assumption1(&samples, 0.0).unwrap();
        assert!(!rep.ok && rep.min_eigenvalue < 0.0);

        // the zero-sum non-convex suite passes away from the concave band of
        // 4 + 6 cos 2x and fails inside it
        let coeffs = generate_nonconvex_coefficients::<f64>(10, 40, 11).unwrap();
        let suite = nonconvex_suite(&coeffs).unwrap();
        let consensus = |v: f64| Array1::from_elem(10, v);
        assert!(suite
            .check_assumption1(&[consensus(0.0), consensus(0.5), consensus(3.0)], 0.0)
            .unwrap()
            .ok);
        assert!(!suite
            .check_assumption1(&[consensus(std::f64::consts::FRAC_PI_2)], 0.0)
            .unwrap()
            .ok);
    }

    #[test]
    fn centralized_optimum_zero_sum_is_origin() {
        let coeffs = generate_nonconvex_coefficients::<f64>(10, 40, 17).unwrap();
        let suite = nonconvex_suite(&coeffs).unwrap();
        let opt = suite.centralized_optimum().unwrap();
        assert!(opt.x_star[0].abs() <= 1e-8);
        assert!(opt.f_star.abs() <= 1e-12);
    }

    #[test]
    fn centralized_optimum_regression_exact_fit() {
        let suite =
            NodeCostSuite::new(vec![LocalObjective::regression(exact_fit_points()).unwrap()])
                .unwrap();
        let opt = suite.centralized_optimum().unwrap();
        assert!((opt.x_star[0] - 1.0).abs() < 1e-10);
        assert!(opt.x_star[1].abs() < 1e-10);
        assert!((opt.x_star[2] + 1.0).abs() < 1e-10);
        assert!(opt.f_star.abs() < 1e-12);
    }

    #[test]
    fn grid_and_newton_agree() {
        // two independent routes to the scalar optimum on random suites
        for seed in [1u64, 2, 3, 4, 5] {
            let coeffs = generate_nonconvex_coefficients::<f64>(6, 15, seed).unwrap();
            let suite = nonconvex_suite(&coeffs).unwrap();
            let opt = suite.centralized_optimum().unwrap();
            // brute-force oracle: fine grid only, no polish
            let mut best = (f64::INFINITY, 0.0);
            for k in 0..=400_000 {
                let x = -10.0 + 20.0 * (k as f64) / 400_000.0;
                let f = suite.global_value(&ndarray::aview1(&[x]));
                if f < best.0 {
                    best = (f, x);
                }
            }
            assert!(
                (opt.x_star[0] - best.1).abs() < 1e-4,
                "seed {seed}: {} vs grid {}",
                opt.x_star[0],
                best.1
            );
            assert!((opt.f_star - best.0).abs() < 1e-8);
        }
    }

    #[test]
    fn optimality_gap_examples() {
        let coeffs = generate_nonconvex_coefficients::<f64>(10, 40, 23).unwrap();
        let suite = nonconvex_suite(&coeffs).unwrap();
        let opt = suite.centralized_optimum().unwrap();

        // consensus at the optimum
        let mut stacked = Array1::zeros(10);
        for k in 0..10 {
            stacked[k] = opt.x_star[0];
        }
        let rep = suite.optimality_gap(&stacked.view(), &opt).unwrap();
        assert!(rep.gap.abs() < 1e-12);
        assert!(rep.consensus_error < 1e-15);

        // consensus at x = 1: gap = 2 + 3 sin^2(1)
        let ones = Array1::from_elem(10, 1.0);
        let rep = suite.optimality_gap(&ones.view(), &opt).unwrap();
        let want = 2.0 + 3.0 * 1.0f64.sin().powi(2);
        assert!((rep.gap - want).abs() < 1e-9, "gap {} vs {}", rep.gap, want);

        // gap nonnegative at sampled states (unique global minimum)
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let x = Array1::from_iter((0..10).map(|_| rng.random_range(-5.0..5.0)));
            let rep = suite.optimality_gap(&x.view(), &opt).unwrap();
            assert!(rep.gap >= -1e-12);
        }
    }

    #[test]
    fn generated_instances_are_locally_nonconvex() {
        // every shipped instance has some node with a negative Hessian
        // somewhere while the aggregate stays positive near the optimum
        for seed in 0..10u64 {
            let coeffs = generate_nonconvex_coefficients::<f64>(10, 40, seed).unwrap();
            let suite = nonconvex_suite(&coeffs).unwrap();
            let mut witness = None;
            'outer: for i in 0..suite.n() {
                for k in 0..=100 {
                    let x = -5.0 + 0.1 * k as f64;
                    if suite.objective(i).hessian(&ndarray::aview1(&[x]))[[0, 0]] < 0.0 {
                        witness = Some((i, x));
                        break 'outer;
                    }
                }
            }
            assert!(witness.is_some(), "seed {seed} produced no local non-convexity");
            let consensus = |v: f64| Array1::from_elem(10, v);
            assert!(suite
                .check_assumption1(&[consensus(0.0), consensus(-0.4), consensus(0.4)], 0.0)
                .unwrap()
                .ok);
        }
    }

    #[test]
    fn regression_data_determinism_and_batches() {
        let cfg = RegressionDataConfig::default();
        let d1 = generate_regression_data::<f64>(&cfg, 40).unwrap();
        let d2 = generate_regression_data::<f64>(&cfg, 40).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1.pooled.len(), 100);
        assert_eq!(d1.node_indices.len(), 10);
        for idx in &d1.node_indices {
            assert_eq!(idx.len(), 50);
            let mut sorted = idx.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), 50, "sampling must be without replacement");
        }
    }

    #[test]
    fn local_minima_finder() {
        // f = 2x^2 + 3 sin^2 x + a cos x + b x with a strong cosine term has
        // side valleys; the finder must locate stationary minima
        let obj = LocalObjective::nonconvex(vec![4.5f64; 3], vec![0.3; 3]).unwrap();
        let minima = local_minima(&obj, -6.0, 6.0, 4000);
        assert!(!minima.is_empty());
        for z in &minima {
            let g = obj.gradient(&ndarray::aview1(&[*z]))[0];
            assert!(g.abs() < 1e-8, "not stationary at {z}: grad {g}");
            assert!(obj.hessian(&ndarray::aview1(&[*z]))[[0, 0]] > 0.0);
        }
    }

    #[test]
    fn suite_json_round_trips() {
        let cfg = RegressionDataConfig {
            n: 3,
            m_total: 12,
            m_per_node: 6,
            ..Default::default()
        };
        let data = generate_regression_data::<f64>(&cfg, 8).unwrap();
        let suite = regression_suite(&data).unwrap();
        let json = suite_to_json(&suite, 8).unwrap();
        let back = suite_from_json::<f64>(&json).unwrap();
        assert_eq!(suite, back);

        let coeffs = generate_nonconvex_coefficients::<f64>(4, 6, 2).unwrap();
        let suite = nonconvex_suite(&coeffs).unwrap();
        let back = suite_from_json::<f64>(&suite_to_json(&suite, 2).unwrap()).unwrap();
        assert_eq!(suite, back);
    }

    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
}
