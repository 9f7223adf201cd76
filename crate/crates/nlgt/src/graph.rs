//! Communication topologies: weighted digraphs, their Laplacians, seeded
//! generators, link removal, and time-varying switching schedules.
//!
//! Edge convention: `w[i][j] > 0` means node `i` receives from node `j`
//! (`j` is an in-neighbor of `i`). Weight balance means every node's row
//! sum equals its column sum; all generators here produce weight-balanced
//! graphs by construction.

use crate::eigen;
use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::{Array2, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Absolute tolerance for weight-balance checks.
pub fn balance_tol<T: Scalar>() -> T {
    T::from_f64(1e-12).max(T::epsilon() * T::from_f64(100.0))
}

/// Tolerance used to decide whether the Laplacian zero eigenvalue is simple.
pub fn zero_eig_tol<T: Scalar>() -> T {
    T::from_f64(1e-8)
}

const MAX_GENERATION_RETRIES: usize = 1000;

/// Immutable weighted digraph over `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedWeightedGraph<T: Scalar> {
    n: usize,
    weights: Array2<T>,
    edges: Vec<(usize, usize, T)>,
}

/// Outcome of the three structural checks. A report, never an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub weight_balanced: bool,
    pub strongly_connected: bool,
    pub row_sums_below_one: bool,
}

impl ValidationReport {
    pub fn all(&self) -> bool {
        self.weight_balanced && self.strongly_connected && self.row_sums_below_one
    }
}

/// Symmetric link-pair removals applied to a graph, with the unmet quota.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkFailureEvent {
    pub time: f64,
    pub removed_edges: Vec<(usize, usize)>,
    pub shortfall: usize,
}

impl<T: Scalar> DirectedWeightedGraph<T> {
    /// Build from a weight matrix. Rejects negative weights and nonzero
    /// diagonal entries; everything else is reported by [`validate`].
    pub fn new(weights: Array2<T>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "weight matrix is {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        for i in 0..n {
            if weights[[i, i]] != T::zero() {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..n {
                let w = weights[[i, j]];
                if !w.is_finite() || w < T::zero() {
                    return Err(Error::InvalidGraph(format!(
                        "weight w[{i}][{j}] = {w} is negative or non-finite"
                    )));
                }
            }
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if weights[[i, j]] > T::zero() {
                    edges.push((i, j, weights[[i, j]]));
                }
            }
        }
        Ok(Self { n, weights, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> ArrayView2<'_, T> {
        self.weights.view()
    }

    /// Directed edges `(receiver, sender, weight)` in row-major order.
    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    /// Number of undirected pairs {i, j} with at least one direction present.
    pub fn undirected_edge_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.weights[[i, j]] > T::zero() || self.weights[[j, i]] > T::zero() {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn row_sum(&self, i: usize) -> T {
        (0..self.n).map(|j| self.weights[[i, j]]).sum()
    }

    pub fn col_sum(&self, j: usize) -> T {
        (0..self.n).map(|i| self.weights[[i, j]]).sum()
    }

    /// Weight balance, strong connectivity, row sums below one.
    pub fn validate(&self) -> ValidationReport {
        let tol = balance_tol::<T>();
        let weight_balanced = (0..self.n).all(|i| (self.row_sum(i) - self.col_sum(i)).abs() <= tol);
        let row_sums_below_one = (0..self.n).all(|i| self.row_sum(i) < T::one());
        ValidationReport {
            weight_balanced,
            strongly_connected: self.is_strongly_connected(),
            row_sums_below_one,
        }
    }

    /// Strong connectivity of the support digraph (reachability both ways).
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        if self.n == 1 {
            return true;
        }
        let reach = |transpose: bool| -> usize {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for v in 0..self.n {
                    let w = if transpose {
                        self.weights[[v, u]]
                    } else {
                        self.weights[[u, v]]
                    };
                    if w > T::zero() && !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
            count
        };
        reach(false) == self.n && reach(true) == self.n
    }

    /// Laplacian with diagonal `-sum_j w_ij` (row-sum convention, matching
    /// the consensus term `-sum_j w_ij (h(x_i) - h(x_j))`). For
    /// weight-balanced graphs the row and column conventions coincide.
    pub fn laplacian(&self) -> LaplacianMatrix<T> {
        let mut m = self.weights.clone();
        for i in 0..self.n {
            m[[i, i]] = -self.row_sum(i);
        }
        LaplacianMatrix { matrix: m }
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|&(i, j, w)| (i, j, w.as_f64()))
                .collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut weights = Array2::zeros((json.n, json.n));
        for &(i, j, w) in &json.edges {
            if i >= json.n || j >= json.n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for n = {}",
                    json.n
                )));
            }
            weights[[i, j]] = T::from_f64(w);
        }
        Self::new(weights)
    }
}

/// Serialized graph form: `{"n": ..., "edges": [[i, j, w], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

/// Graph Laplacian: off-diagonal `w_ij`, diagonal minus the row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix<T: Scalar> {
    matrix: Array2<T>,
}

impl<T: Scalar> LaplacianMatrix<T> {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> ArrayView2<'_, T> {
        self.matrix.view()
    }

    pub fn eigenvalues(&self) -> Result<Vec<num_complex::Complex<T>>> {
        eigen::eigenvalues(&self.matrix.view())
    }

    /// `|Re λ₂|` where `λ₂` is the nonzero eigenvalue with the largest real
    /// part. Rejects inputs whose zero eigenvalue is not simple.
    pub fn algebraic_connectivity(&self) -> Result<T> {
        let eigs = self.eigenvalues()?;
        let tol = zero_eig_tol::<T>();
        let zeros = eigs.iter().filter(|l| l.norm() <= tol).count();
        if zeros != 1 {
            return Err(Error::ZeroEigenvalueNotSimple {
                multiplicity: zeros,
            });
        }
        let max_re = eigs
            .iter()
            .filter(|l| l.norm() > tol)
            .map(|l| l.re)
            .fold(T::neg_infinity(), T::max);
        if max_re == T::neg_infinity() {
            // single node: no consensus directions
            return Ok(T::zero());
        }
        Ok(max_re.abs())
    }
}

/// Symmetric Erdős–Rényi sample, resampled until strongly connected.
/// Symmetry certifies weight balance; the uniform edge weight is rescaled
/// so the maximum row sum stays at or below 0.9. Deterministic per seed.
pub fn generate_er_wb<T: Scalar>(
    n: usize,
    link_prob: f64,
    weight: f64,
    seed: u64,
) -> Result<DirectedWeightedGraph<T>> {
    if n < 2 {
        return Err(Error::InvalidConfig("ER generator needs n >= 2".into()));
    }
    if !(0.0 < link_prob && link_prob <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "link probability {link_prob} outside (0, 1]"
        )));
    }
    if weight <= 0.0 {
        return Err(Error::InvalidConfig(format!("weight {weight} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_RETRIES {
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(link_prob) {
                    adj[i][j] = true;
                    adj[j][i] = true;
                }
            }
        }
        let max_degree = adj
            .iter()
            .map(|row| row.iter().filter(|&&b| b).count())
            .max()
            .unwrap_or(0);
        if max_degree == 0 {
            continue;
        }
        let w = weight.min(0.9 / max_degree as f64);
        let mut weights = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if adj[i][j] {
                    weights[[i, j]] = T::from_f64(w);
                }
            }
        }
        let g = DirectedWeightedGraph::new(weights)?;
        if g.is_strongly_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed(format!(
        "no strongly connected ER({n}, {link_prob}) sample in {MAX_GENERATION_RETRIES} tries"
    )))
}

/// Directed circulant in which node `i` sends to `(i + 2^k) mod n` for
/// `k = 0..floor(log2(n-1))`. Circulant structure gives weight balance and
/// strong connectivity for free.
pub fn generate_exponential<T: Scalar>(n: usize, weight: f64) -> Result<DirectedWeightedGraph<T>> {
    if n < 2 {
        return Err(Error::InvalidConfig(
            "exponential generator needs n >= 2".into(),
        ));
    }
    if weight <= 0.0 {
        return Err(Error::InvalidConfig(format!("weight {weight} must be positive")));
    }
    let kmax = ((n - 1) as f64).log2().floor() as u32;
    let hops: Vec<usize> = (0..=kmax).map(|k| 1usize << k).collect();
    let w = weight.min(0.9 / hops.len() as f64);
    let mut weights = Array2::zeros((n, n));
    for i in 0..n {
        for &h in &hops {
            let receiver = (i + h) % n;
            weights[[receiver, i]] = T::from_f64(w);
        }
    }
    DirectedWeightedGraph::new(weights)
}

/// Remove `floor(rate * |E|)` undirected link pairs chosen uniformly,
/// skipping any removal that would break strong connectivity. Symmetric
/// removal keeps the graph weight-balanced without reweighting. Requires a
/// symmetric input. If the quota cannot be met the shortfall is flagged.
pub fn remove_links<T: Scalar>(
    g: &DirectedWeightedGraph<T>,
    rate: f64,
    seed: u64,
) -> Result<(DirectedWeightedGraph<T>, LinkFailureEvent)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidConfig(format!(
            "removal rate {rate} outside [0, 1)"
        )));
    }
    let n = g.n();
    let tol = balance_tol::<T>();
    for i in 0..n {
        for j in 0..n {
            if (g.weights[[i, j]] - g.weights[[j, i]]).abs() > tol {
                return Err(Error::Unsupported(
                    "remove_links expects a symmetric weight matrix".into(),
                ));
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if g.weights[[i, j]] > T::zero() {
                pairs.push((i, j));
            }
        }
    }
    // Quota floor(rate * |E|), bumped to one attempt for any positive rate so
    // that e.g. rate 0.5 on a single-pair graph reports its shortfall.
    let quota = if rate > 0.0 {
        ((rate * pairs.len() as f64).floor() as usize).max(1)
    } else {
        0
    };
    let mut event = LinkFailureEvent {
        time: 0.0,
        removed_edges: Vec::new(),
        shortfall: 0,
    };
    if quota == 0 {
        return Ok((g.clone(), event));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);

    let mut weights = g.weights.clone();
    for &(i, j) in &pairs {
        if event.removed_edges.len() >= quota {
            break;
        }
        let (wij, wji) = (weights[[i, j]], weights[[j, i]]);
        weights[[i, j]] = T::zero();
        weights[[j, i]] = T::zero();
        let candidate = DirectedWeightedGraph::new(weights.clone())?;
        if candidate.is_strongly_connected() {
            event.removed_edges.push((i, j));
        } else {
            weights[[i, j]] = wij;
            weights[[j, i]] = wji;
        }
    }
    event.shortfall = quota - event.removed_edges.len();
    Ok((DirectedWeightedGraph::new(weights)?, event))
}

/// Time-varying topology: which graph is active at which time.
#[derive(Debug, Clone)]
pub enum SwitchingSchedule<T: Scalar> {
    /// One fixed topology.
    Static(DirectedWeightedGraph<T>),
    /// A fresh validated ER sample per dwell window, seeded by window index.
    PeriodicEr {
        n: usize,
        link_prob: f64,
        weight: f64,
        dwell: f64,
        seed: u64,
    },
    /// Explicit (activation time, graph) sequence; times strictly increasing,
    /// first activation at t = 0.
    Explicit(Vec<(f64, DirectedWeightedGraph<T>)>),
}

impl<T: Scalar> SwitchingSchedule<T> {
    /// Check schedule invariants plus full validation of every scheduled graph.
    pub fn check(&self) -> Result<()> {
        match self {
            SwitchingSchedule::Static(g) => {
                let report = g.validate();
                if !report.all() {
                    return Err(Error::InvalidGraph(format!(
                        "static schedule graph failed validation: {report:?}"
                    )));
                }
            }
            SwitchingSchedule::PeriodicEr { dwell, .. } => {
                if *dwell <= 0.0 {
                    return Err(Error::InvalidConfig("dwell must be positive".into()));
                }
            }
            SwitchingSchedule::Explicit(seq) => {
                if seq.is_empty() {
                    return Err(Error::InvalidConfig("empty explicit schedule".into()));
                }
                if seq[0].0 != 0.0 {
                    return Err(Error::InvalidConfig(
                        "explicit schedule must start at t = 0".into(),
                    ));
                }
                for w in seq.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::InvalidConfig(
                            "activation times must be strictly increasing".into(),
                        ));
                    }
                }
                for (t, g) in seq {
                    let report = g.validate();
                    if !report.all() {
                        return Err(Error::InvalidGraph(format!(
                            "scheduled graph at t = {t} failed validation: {report:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of the topology window containing time `t`.
    pub fn window_index(&self, t: f64) -> usize {
        match self {
            SwitchingSchedule::Static(_) => 0,
            SwitchingSchedule::PeriodicEr { dwell, .. } => (t / dwell).floor() as usize,
            SwitchingSchedule::Explicit(seq) => {
                let mut idx = 0;
                for (k, (start, _)) in seq.iter().enumerate() {
                    if t >= *start {
                        idx = k;
                    }
                }
                idx
            }
        }
    }

    /// Piecewise-constant topology lookup.
    pub fn graph_at(&self, t: f64) -> Result<DirectedWeightedGraph<T>> {
        match self {
            SwitchingSchedule::Static(g) => Ok(g.clone()),
            SwitchingSchedule::PeriodicEr {
                n,
                link_prob,
                weight,
                seed,
                ..
            } => {
                let w = self.window_index(t) as u64;
                generate_er_wb(*n, *link_prob, *weight, window_seed(*seed, w))
            }
            SwitchingSchedule::Explicit(seq) => Ok(seq[self.window_index(t)].1.clone()),
        }
    }

    /// End of the window containing `t`, clamped to `horizon`.
    pub fn window_end(&self, t: f64, horizon: f64) -> f64 {
        match self {
            SwitchingSchedule::Static(_) => horizon,
            SwitchingSchedule::PeriodicEr { dwell, .. } => {
                (((t / dwell).floor() + 1.0) * dwell).min(horizon)
            }
            SwitchingSchedule::Explicit(seq) => {
                let idx = self.window_index(t);
                if idx + 1 < seq.len() {
                    seq[idx + 1].0.min(horizon)
                } else {
                    horizon
                }
            }
        }
    }

    /// Dwell between topology changes, when the schedule switches.
    pub fn dwell(&self) -> Option<f64> {
        match self {
            SwitchingSchedule::Static(_) => None,
            SwitchingSchedule::PeriodicEr { dwell, .. } => Some(*dwell),
            SwitchingSchedule::Explicit(seq) => {
                seq.windows(2).map(|w| w[1].0 - w[0].0).reduce(f64::min)
            }
        }
    }
}

/// Per-window sub-seed for the periodic-regenerate mode (splitmix increment).
fn window_seed(seed: u64, window: u64) -> u64 {
    seed.wrapping_add(window.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn two_cycle() -> DirectedWeightedGraph<f64> {
        DirectedWeightedGraph::new(array![[0.0, 0.4], [0.4, 0.0]]).unwrap()
    }

    #[test]
    fn laplacian_of_symmetric_pair() {
        let lap = two_cycle().laplacian();
        let want = array![[-0.4, 0.4], [0.4, -0.4]];
        assert_eq!(lap.matrix().to_owned(), want);
    }

    #[test]
    fn laplacian_of_empty_graph_is_zero() {
        let g = DirectedWeightedGraph::<f64>::new(Array2::zeros((3, 3))).unwrap();
        assert_eq!(g.laplacian().matrix().to_owned(), Array2::<f64>::zeros((3, 3)));
    }

    #[test]
    fn laplacian_eigenvalues_of_pair() {
        let lap = two_cycle().laplacian();
        let mut eigs = lap.eigenvalues().unwrap();
        eigen::sort_complex(&mut eigs);
        assert!((eigs[0].re + 0.8).abs() < 1e-14 && eigs[0].im.abs() < 1e-14);
        assert!(eigs[1].norm() < 1e-14);
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(DirectedWeightedGraph::<f64>::new(array![[0.0, -0.1], [0.1, 0.0]]).is_err());
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        assert!(DirectedWeightedGraph::<f64>::new(array![[0.1, 0.2], [0.2, 0.0]]).is_err());
    }

    #[test]
    fn validate_examples() {
        let ok = two_cycle().validate();
        assert!(ok.weight_balanced && ok.strongly_connected && ok.row_sums_below_one);

        let one_way = DirectedWeightedGraph::new(array![[0.0, 0.4], [0.0, 0.0]]).unwrap();
        let rep = one_way.validate();
        assert!(!rep.weight_balanced && !rep.strongly_connected && rep.row_sums_below_one);

        let heavy = DirectedWeightedGraph::new(array![[0.0, 1.2], [1.2, 0.0]]).unwrap();
        let rep = heavy.validate();
        assert!(rep.weight_balanced && rep.strongly_connected && !rep.row_sums_below_one);
    }

    #[test]
    fn er_generator_validates_and_is_deterministic() {
        let a = generate_er_wb::<f64>(10, 0.25, 1.0, 42).unwrap();
        assert!(a.validate().all());
        let b = generate_er_wb::<f64>(10, 0.25, 1.0, 42).unwrap();
        assert_eq!(a.weights().to_owned(), b.weights().to_owned());
        let c = generate_er_wb::<f64>(10, 0.25, 1.0, 43).unwrap();
        assert_ne!(a.weights().to_owned(), c.weights().to_owned());
    }

    #[test]
    fn er_complete_on_two_nodes() {
        let g = generate_er_wb::<f64>(2, 1.0, 1.0, 1).unwrap();
        assert!(g.weights()[[0, 1]] > 0.0 && g.weights()[[1, 0]] > 0.0);
        assert_eq!(g.weights()[[0, 1]], g.weights()[[1, 0]]);
    }

    #[test]
    fn exponential_out_neighbors() {
        let g = generate_exponential::<f64>(5, 1.0).unwrap();
        // node 0 sends to 1, 2, 4 -> rows 1, 2, 4 have a positive entry in column 0
        for receiver in [1usize, 2, 4] {
            assert!(g.weights()[[receiver, 0]] > 0.0);
        }
        assert_eq!(g.weights()[[3, 0]], 0.0);
        assert!(g.validate().all());
    }

    #[test]
    fn exponential_two_nodes_is_cycle() {
        let g = generate_exponential::<f64>(2, 1.0).unwrap();
        assert!(g.weights()[[0, 1]] > 0.0 && g.weights()[[1, 0]] > 0.0);
    }

    #[test]
    fn exponential_validates_across_sizes() {
        for n in 2..=12 {
            let g = generate_exponential::<f64>(n, 1.0).unwrap();
            assert!(g.validate().all(), "n = {n}");
        }
    }

    #[test]
    fn remove_links_rate_zero_is_identity() {
        let g = generate_er_wb::<f64>(8, 0.4, 1.0, 5).unwrap();
        let (h, ev) = remove_links(&g, 0.0, 9).unwrap();
        assert_eq!(g.weights().to_owned(), h.weights().to_owned());
        assert!(ev.removed_edges.is_empty() && ev.shortfall == 0);
    }

    #[test]
    fn remove_links_two_cycle_flags_shortfall() {
        // any removal disconnects the 2-cycle, so the attempt is skipped
        let (h, ev) = remove_links(&two_cycle(), 0.5, 1).unwrap();
        assert_eq!(ev.shortfall, 1);
        assert!(ev.removed_edges.is_empty());
        assert_eq!(h.weights().to_owned(), two_cycle().weights().to_owned());
    }

    #[test]
    fn remove_links_keeps_connectivity_and_balance() {
        let g = generate_er_wb::<f64>(10, 0.3, 1.0, 7).unwrap();
        let before = g.undirected_edge_count();
        let (h, ev) = remove_links(&g, 0.2, 3).unwrap();
        assert!(h.validate().all());
        assert_eq!(h.undirected_edge_count(), before - ev.removed_edges.len());
        assert!(!ev.removed_edges.is_empty());
    }

    #[test]
    fn connectivity_examples() {
        let lap = two_cycle().laplacian();
        assert!((lap.algebraic_connectivity().unwrap() - 0.8).abs() < 1e-12);

        // complete K3 with weight w: eigenvalues {0, -3w, -3w}
        let w = 0.3f64;
        let mut k3 = Array2::<f64>::zeros((3, 3));
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    k3[[i, j]] = w;
                }
            }
        }
        let g = DirectedWeightedGraph::new(k3).unwrap();
        assert!((g.laplacian().algebraic_connectivity().unwrap() - 3.0 * w).abs() < 1e-10);
    }

    #[test]
    fn connectivity_monotone_path_vs_complete() {
        let n = 6;
        let w = 0.12f64;
        let mut path = Array2::<f64>::zeros((n, n));
        for i in 0..n - 1 {
            path[[i, i + 1]] = w;
            path[[i + 1, i]] = w;
        }
        let mut complete = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    complete[[i, j]] = w;
                }
            }
        }
        let a_path = DirectedWeightedGraph::new(path)
            .unwrap()
            .laplacian()
            .algebraic_connectivity()
            .unwrap();
        let a_complete = DirectedWeightedGraph::new(complete)
            .unwrap()
            .laplacian()
            .algebraic_connectivity()
            .unwrap();
        assert!(a_path < a_complete);
    }

    #[test]
    fn connectivity_rejects_disconnected() {
        let g = DirectedWeightedGraph::<f64>::new(Array2::zeros((3, 3))).unwrap();
        assert!(matches!(
            g.laplacian().algebraic_connectivity(),
            Err(Error::ZeroEigenvalueNotSimple { .. })
        ));
    }

    #[test]
    fn schedule_static_and_windows() {
        let sched = SwitchingSchedule::Static(two_cycle());
        assert_eq!(
            sched.graph_at(0.0).unwrap().weights().to_owned(),
            sched.graph_at(17.3).unwrap().weights().to_owned()
        );

        let per = SwitchingSchedule::<f64>::PeriodicEr {
            n: 8,
            link_prob: 0.4,
            weight: 1.0,
            dwell: 1.0,
            seed: 11,
        };
        let g05 = per.graph_at(0.5).unwrap();
        let g09 = per.graph_at(0.9).unwrap();
        let g11 = per.graph_at(1.1).unwrap();
        assert_eq!(g05.weights().to_owned(), g09.weights().to_owned());
        assert_ne!(g05.weights().to_owned(), g11.weights().to_owned());
        assert!(g11.validate().all());

        // replaying the schedule gives the identical sequence
        let per2 = SwitchingSchedule::<f64>::PeriodicEr {
            n: 8,
            link_prob: 0.4,
            weight: 1.0,
            dwell: 1.0,
            seed: 11,
        };
        for t in [0.0, 0.5, 1.5, 2.5, 7.25] {
            assert_eq!(
                per.graph_at(t).unwrap().weights().to_owned(),
                per2.graph_at(t).unwrap().weights().to_owned()
            );
        }
        assert_eq!(per.window_end(0.25, 10.0), 1.0);
        assert_eq!(per.window_end(3.0, 10.0), 4.0);
        assert_eq!(per.window_end(9.7, 10.0), 10.0);
    }

    #[test]
    fn schedule_explicit_validation() {
        let g = two_cycle();
        let bad = SwitchingSchedule::Explicit(vec![(0.0, g.clone()), (0.0, g.clone())]);
        assert!(bad.check().is_err());
        let good = SwitchingSchedule::Explicit(vec![(0.0, g.clone()), (2.0, g)]);
        good.check().unwrap();
        assert_eq!(good.window_index(1.0), 0);
        assert_eq!(good.window_index(2.0), 1);
        assert_eq!(good.window_end(0.1, 10.0), 2.0);
    }

    #[test]
    fn graph_json_round_trip() {
        let g = generate_er_wb::<f64>(7, 0.5, 1.0, 2).unwrap();
        let json = g.to_json();
        let back = DirectedWeightedGraph::<f64>::from_json(&json).unwrap();
        assert_eq!(g.weights().to_owned(), back.weights().to_owned());
    }

    #[test]
    fn generated_graphs_are_weight_balanced_exactly() {
        for seed in 0..20 {
            let g = generate_er_wb::<f64>(9, 0.3, 1.0, seed).unwrap();
            let lap = g.laplacian();
            let m = lap.matrix();
            for i in 0..9 {
                let row: f64 = (0..9).map(|j| m[[i, j]]).sum();
                let col: f64 = (0..9).map(|j| m[[j, i]]).sum();
                assert!(row.abs() == 0.0 || row.abs() < 1e-15);
                assert!(col.abs() < 1e-12);
            }
            // simple zero eigenvalue, everything else strictly left
            let eigs = lap.eigenvalues().unwrap();
            let zeros = eigs.iter().filter(|l| l.norm() <= 1e-8).count();
            assert_eq!(zeros, 1);
            for l in eigs.iter().filter(|l| l.norm() > 1e-8) {
                assert!(l.re < 0.0);
            }
        }
    }

    #[test]
    fn connectivity_never_increases_under_removal() {
        for seed in 0..8 {
            let g = generate_er_wb::<f64>(9, 0.45, 1.0, seed).unwrap();
            let a0 = g.laplacian().algebraic_connectivity().unwrap();
            let (h, _) = remove_links(&g, 0.25, seed + 100).unwrap();
            let a1 = h.laplacian().algebraic_connectivity().unwrap();
            assert!(a1 <= a0 + 1e-12, "seed {seed}: {a1} > {a0}");
        }
    }
}
