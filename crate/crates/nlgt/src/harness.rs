//! Experiment front-end: named experiment families with seeded defaults,
//! trajectory/summary/metadata file output, and post-processing (rate
//! fitting, rank correlation).
//!
//! Every run is a pure function of its configuration and seeds; replaying a
//! config byte-for-byte reproduces `trace.csv`.

use crate::dynamics::{simulate, IntegratorConfig, Integrator, Trajectory, YInit};
use crate::graph::{
    generate_er_wb, generate_exponential, remove_links, DirectedWeightedGraph, LinkFailureEvent,
    SwitchingSchedule,
};
use crate::nonlinearity::{LinkNonlinearity, NonlinearityJson};
use crate::objectives::{
    generate_nonconvex_coefficients, generate_regression_data, local_minima, nonconvex_suite,
    regression_suite, suite_to_json, NodeCostSuite, RegressionDataConfig, SuiteJson,
};
use crate::spectral::{assemble, spectral_report, SpectralReport};
use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Numerical floor below which gap values are treated as exhausted when
/// fitting rates.
const GAP_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Regression,
    NonconvexSwitching,
    ExponentialVsEr,
    LinkFailure,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkFamily {
    Er,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub family: NetworkFamily,
    pub n: usize,
    #[serde(default = "default_link_prob")]
    pub link_prob: f64,
    #[serde(default = "default_weight")]
    pub weight: f64,
    /// Switch topologies every `dwell` seconds when set (ER family only).
    #[serde(default)]
    pub dwell: Option<f64>,
}

fn default_link_prob() -> f64 {
    0.25
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub graph: u64,
    pub data: u64,
    pub x0: u64,
}

impl Seeds {
    pub fn derived(base: u64) -> Self {
        Seeds {
            graph: base,
            data: base.wrapping_add(1),
            x0: base.wrapping_add(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonconvexDataConfig {
    pub m: usize,
}

impl Default for NonconvexDataConfig {
    fn default() -> Self {
        Self { m: 40 }
    }
}

/// One experiment description; unused sections may be omitted in JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub network: NetworkConfig,
    pub nonlinearity: NonlinearityJson,
    pub integrator: IntegratorConfig,
    pub seeds: Seeds,
    #[serde(default)]
    pub regression_data: Option<RegressionDataConfig>,
    #[serde(default)]
    pub nonconvex_data: Option<NonconvexDataConfig>,
    /// Quantization levels swept by the non-convex experiment.
    #[serde(default)]
    pub rhos: Vec<f64>,
    /// Link-removal fractions swept by the link-failure experiment.
    #[serde(default)]
    pub removal_rates: Vec<f64>,
}

impl ExperimentConfig {
    /// Convex regression over a static ER network with quantized links.
    pub fn regression_default() -> Self {
        Self {
            experiment: ExperimentKind::Regression,
            network: NetworkConfig {
                family: NetworkFamily::Er,
                n: 10,
                link_prob: 0.25,
                weight: 1.0,
                dwell: None,
            },
            nonlinearity: NonlinearityJson::LogQuantize { rho: 1.0 / 256.0 },
            integrator: IntegratorConfig {
                method: Integrator::ClassicalRk4,
                dt: 1e-3,
                horizon: 20.0,
                eta: 2.0,
                y_init: YInit::GradientAtStart,
                gap_floor: None,
                record_every: 10,
            },
            seeds: Seeds::derived(1),
            regression_data: Some(RegressionDataConfig::default()),
            nonconvex_data: None,
            rhos: Vec::new(),
            removal_rates: Vec::new(),
        }
    }

    /// Locally non-convex costs over an ER topology resampled every second,
    /// swept over quantization levels.
    pub fn nonconvex_default() -> Self {
        Self {
            experiment: ExperimentKind::NonconvexSwitching,
            network: NetworkConfig {
                family: NetworkFamily::Er,
                n: 10,
                link_prob: 0.2,
                weight: 1.0,
                dwell: Some(1.0),
            },
            nonlinearity: NonlinearityJson::LogQuantize { rho: 1.0 / 128.0 },
            integrator: IntegratorConfig {
                method: Integrator::ClassicalRk4,
                dt: 1e-3,
                horizon: 30.0,
                eta: 1.0,
                y_init: YInit::GradientAtStart,
                gap_floor: None,
                record_every: 10,
            },
            seeds: Seeds::derived(2),
            regression_data: None,
            nonconvex_data: Some(NonconvexDataConfig::default()),
            rhos: vec![1.0 / 128.0, 1.0 / 512.0, 1.0 / 1024.0],
            removal_rates: Vec::new(),
        }
    }

    /// Exponential (power-of-two circulant) topology against ER(50%).
    pub fn exponential_vs_er_default() -> Self {
        Self {
            experiment: ExperimentKind::ExponentialVsEr,
            network: NetworkConfig {
                family: NetworkFamily::Er,
                n: 10,
                link_prob: 0.5,
                weight: 1.0,
                dwell: None,
            },
            nonlinearity: NonlinearityJson::LogQuantize { rho: 1.0 / 64.0 },
            integrator: IntegratorConfig {
                method: Integrator::ClassicalRk4,
                dt: 1e-3,
                horizon: 30.0,
                eta: 2.0,
                y_init: YInit::GradientAtStart,
                gap_floor: None,
                record_every: 10,
            },
            seeds: Seeds::derived(3),
            regression_data: None,
            nonconvex_data: Some(NonconvexDataConfig::default()),
            rhos: Vec::new(),
            removal_rates: Vec::new(),
        }
    }

    /// Link removal sweep on a static ER(30%) base graph. The longer default
    /// horizon puts the tail of every sweep member in its asymptotic regime
    /// so fitted rates are comparable.
    pub fn link_failure_default() -> Self {
        Self {
            experiment: ExperimentKind::LinkFailure,
            network: NetworkConfig {
                family: NetworkFamily::Er,
                n: 10,
                link_prob: 0.3,
                weight: 1.0,
                dwell: None,
            },
            nonlinearity: NonlinearityJson::LogQuantize { rho: 1.0 / 128.0 },
            integrator: IntegratorConfig {
                method: Integrator::ClassicalRk4,
                dt: 1e-3,
                horizon: 120.0,
                eta: 1.0,
                y_init: YInit::GradientAtStart,
                gap_floor: None,
                record_every: 50,
            },
            seeds: Seeds::derived(5),
            regression_data: None,
            nonconvex_data: Some(NonconvexDataConfig::default()),
            rhos: Vec::new(),
            removal_rates: vec![0.0, 0.1, 0.2, 0.3],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "regression" => Ok(Self::regression_default()),
            "nonconvex-switching" => Ok(Self::nonconvex_default()),
            "exponential-vs-er" => Ok(Self::exponential_vs_er_default()),
            "link-failure" => Ok(Self::link_failure_default()),
            other => Err(Error::InvalidConfig(format!(
                "unknown experiment '{other}' (expected regression, nonconvex-switching, exponential-vs-er, link-failure)"
            ))),
        }
    }

    pub fn with_base_seed(mut self, base: u64) -> Self {
        self.seeds = Seeds::derived(base);
        self
    }
}

/// Everything needed to launch one simulation.
pub struct Instance<T: Scalar> {
    pub label: String,
    pub suite: NodeCostSuite<T>,
    pub schedule: SwitchingSchedule<T>,
    pub nonlinearity: LinkNonlinearity<T>,
    pub integrator: IntegratorConfig,
    pub suite_json: SuiteJson,
}

/// Per-run summary written as `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub n: usize,
    pub p: usize,
    pub eta: f64,
    pub horizon: f64,
    pub initial_gap: f64,
    pub final_gap: f64,
    pub final_consensus_error: f64,
    pub max_state_error: f64,
    pub fitted_rate: Option<f64>,
    pub max_tracking_err: f64,
    pub lyapunov_initial: f64,
    pub max_lyapunov_step_increase: f64,
    pub terminated_early: bool,
    pub topology_change_count: usize,
    pub spectral: Option<SpectralReport>,
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub kind: String,
    pub detail: String,
}

/// Build the simulation pieces a config describes (the initial topology for
/// static runs, the schedule for switching ones).
pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance<f64>> {
    let nl = LinkNonlinearity::<f64>::from_json(&cfg.nonlinearity)?;
    let (suite, suite_json) = build_suite(cfg)?;
    let schedule = build_schedule(&cfg.network, cfg.seeds.graph)?;
    Ok(Instance {
        label: format!("{:?}", cfg.experiment),
        suite,
        schedule,
        nonlinearity: nl,
        integrator: cfg.integrator,
        suite_json,
    })
}

fn build_suite(cfg: &ExperimentConfig) -> Result<(NodeCostSuite<f64>, SuiteJson)> {
    match cfg.experiment {
        ExperimentKind::Regression => {
            let mut dcfg = cfg.regression_data.unwrap_or_default();
            dcfg.n = cfg.network.n;
            let data = generate_regression_data::<f64>(&dcfg, cfg.seeds.data)?;
            let suite = regression_suite(&data)?;
            let json = suite_to_json(&suite, cfg.seeds.data)?;
            Ok((suite, json))
        }
        _ => {
            let m = cfg.nonconvex_data.unwrap_or_default().m;
            let coeffs = generate_nonconvex_coefficients::<f64>(cfg.network.n, m, cfg.seeds.data)?;
            let suite = nonconvex_suite(&coeffs)?;
            let json = suite_to_json(&suite, cfg.seeds.data)?;
            Ok((suite, json))
        }
    }
}

fn build_schedule(net: &NetworkConfig, seed: u64) -> Result<SwitchingSchedule<f64>> {
    match (net.family, net.dwell) {
        (NetworkFamily::Er, None) => Ok(SwitchingSchedule::Static(generate_er_wb(
            net.n,
            net.link_prob,
            net.weight,
            seed,
        )?)),
        (NetworkFamily::Er, Some(dwell)) => Ok(SwitchingSchedule::PeriodicEr {
            n: net.n,
            link_prob: net.link_prob,
            weight: net.weight,
            dwell,
            seed,
        }),
        (NetworkFamily::Exponential, None) => Ok(SwitchingSchedule::Static(
            generate_exponential(net.n, net.weight)?,
        )),
        (NetworkFamily::Exponential, Some(_)) => Err(Error::InvalidConfig(
            "the exponential topology is deterministic; dwell does not apply".into(),
        )),
    }
}

/// Spectral report of a topology at the suite's optimum operating point
/// with unit link slopes; the sector passed in scales the admissible-rate
/// computation.
pub fn instance_spectral_report(
    suite: &NodeCostSuite<f64>,
    graph: &DirectedWeightedGraph<f64>,
    nl: &LinkNonlinearity<f64>,
    eta: f64,
) -> Result<SpectralReport> {
    let opt = suite.centralized_optimum()?;
    let mut stacked = Array1::zeros(suite.n() * suite.dim());
    for i in 0..suite.n() {
        for k in 0..suite.dim() {
            stacked[i * suite.dim() + k] = opt.x_star[k];
        }
    }
    let blocks = suite.hessian_blocks(&stacked.view())?;
    let xi = Array1::from_elem(suite.n(), 1.0);
    let m = assemble(&graph.laplacian(), &blocks, &xi, eta)?;
    let (kappa, upper) = nl.sector();
    spectral_report(&m, kappa, upper)
}

/// Run one instance and distill its summary.
pub fn run_instance(
    inst: &Instance<f64>,
    x0_seed: u64,
    x0_override: Option<&Array1<f64>>,
) -> Result<(Trajectory<f64>, RunSummary)> {
    let traj = simulate(
        &inst.suite,
        &inst.schedule,
        &inst.nonlinearity,
        &inst.integrator,
        x0_seed,
        x0_override,
    )?;
    let summary = summarize(inst, &traj)?;
    Ok((traj, summary))
}

fn summarize(inst: &Instance<f64>, traj: &Trajectory<f64>) -> Result<RunSummary> {
    let last = traj.final_sample();
    let series: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.gap)).collect();
    let fitted_rate = fit_rate(&series);
    let spectral = match &inst.schedule {
        SwitchingSchedule::Static(g) => Some(instance_spectral_report(
            &inst.suite,
            g,
            &inst.nonlinearity,
            inst.integrator.eta,
        )?),
        _ => {
            let g = match &inst.schedule {
                SwitchingSchedule::PeriodicEr { .. } | SwitchingSchedule::Explicit(_) => {
                    inst.schedule.graph_at(0.0)?
                }
                SwitchingSchedule::Static(g) => g.clone(),
            };
            Some(instance_spectral_report(
                &inst.suite,
                &g,
                &inst.nonlinearity,
                inst.integrator.eta,
            )?)
        }
    };

    // worst per-coordinate distance from the centralized optimum
    let (n, p) = (inst.suite.n(), inst.suite.dim());
    let mut max_state_error = 0.0f64;
    for i in 0..n {
        for k in 0..p {
            max_state_error = max_state_error
                .max((traj.final_state.x[i * p + k] - traj.optimum.x_star[k]).abs());
        }
    }

    let events = traj
        .topology_changes
        .iter()
        .map(|&(t, id)| EventRecord {
            t,
            kind: "topology-change".into(),
            detail: format!("window {id}"),
        })
        .collect();

    Ok(RunSummary {
        label: inst.label.clone(),
        n,
        p,
        eta: inst.integrator.eta,
        horizon: inst.integrator.horizon,
        initial_gap: traj.initial_gap,
        final_gap: last.gap,
        final_consensus_error: last.consensus_err,
        max_state_error,
        fitted_rate,
        max_tracking_err: traj.max_tracking_err,
        lyapunov_initial: traj.lyapunov_initial,
        max_lyapunov_step_increase: traj.max_lyapunov_step_increase,
        terminated_early: traj.terminated_early,
        topology_change_count: traj.topology_changes.len(),
        spectral,
        events,
    })
}

/// Least-squares slope of `log(gap)` against `t` over the final half of the
/// series. The window shrinks to the segment before the gap first reaches
/// the numerical floor; `None` when fewer than two usable points remain.
pub fn fit_rate(series: &[(f64, f64)]) -> Option<f64> {
    if series.len() < 2 {
        return None;
    }
    let t_end = series.last()?.0;
    let t_mid = series.first()?.0 + (t_end - series.first()?.0) / 2.0;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &(t, gap) in series.iter().filter(|(t, _)| *t >= t_mid) {
        if gap <= GAP_FLOOR {
            break;
        }
        pts.push((t, gap.ln()));
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (tm, ym) = (st / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in &pts {
        num += (t - tm) * (y - ym);
        den += (t - tm) * (t - tm);
    }
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap_or(std::cmp::Ordering::Equal));
        let mut ranks = vec![0.0; v.len()];
        let mut k = 0;
        while k < idx.len() {
            let mut j = k;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[k]] {
                j += 1;
            }
            let avg = (k + j) as f64 / 2.0 + 1.0;
            for &i in &idx[k..=j] {
                ranks[i] = avg;
            }
            k = j + 1;
        }
        ranks
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if da == 0.0 || db == 0.0 {
        return None;
    }
    Some(num / (da * db).sqrt())
}

/// `trace.csv` bytes for a trajectory: header plus one row per sample,
/// shortest-round-trip float formatting for bit-stable replays.
pub fn trace_csv(traj: &Trajectory<f64>) -> String {
    let mut out = String::from("t,gap,consensus_err,tracking_err,lyapunov,topology_id\n");
    for s in &traj.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t, s.gap, s.consensus_err, s.tracking_err, s.lyapunov, s.topology_id
        );
    }
    out
}

/// Write `trace.csv`, `summary.json`, and `meta.json` for one run.
pub fn write_outputs(
    dir: &Path,
    traj: &Trajectory<f64>,
    summary: &RunSummary,
    config_echo: &serde_json::Value,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trace.csv"), trace_csv(traj))?;
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(summary)?,
    )?;
    let meta = serde_json::json!({
        "config": config_echo,
        "topology_changes": traj.topology_changes,
        "terminated_early": traj.terminated_early,
    });
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Outcome of the regression experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionOutcome {
    pub summary: RunSummary,
    /// Per-coordinate worst distance of node states from the pooled
    /// least-squares fit.
    pub state_error: f64,
    pub gap_ratio: f64,
}

pub fn run_regression_experiment(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<RegressionOutcome> {
    let inst = build_instance(cfg)?;
    let (traj, summary) = run_instance(&inst, cfg.seeds.x0, None)?;
    if let Some(dir) = out {
        write_outputs(dir, &traj, &summary, &serde_json::to_value(cfg)?)?;
    }
    Ok(RegressionOutcome {
        state_error: summary.max_state_error,
        gap_ratio: summary.final_gap / summary.initial_gap.max(GAP_FLOOR),
        summary,
    })
}

/// Per-quantization-level summaries with the identical seed set.
pub fn run_nonconvex_experiment(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<Vec<(f64, RunSummary)>> {
    let rhos = if cfg.rhos.is_empty() {
        vec![1.0 / 128.0, 1.0 / 512.0, 1.0 / 1024.0]
    } else {
        cfg.rhos.clone()
    };
    let mut rows = Vec::new();
    for &rho in &rhos {
        let mut sub = cfg.clone();
        sub.nonlinearity = NonlinearityJson::LogQuantize { rho };
        let inst = build_instance(&sub)?;
        let (traj, mut summary) = run_instance(&inst, cfg.seeds.x0, None)?;
        summary.label = format!("nonconvex rho={rho}");
        if let Some(dir) = out {
            let sub_dir = dir.join(format!("rho_{}", rho_slug(rho)));
            write_outputs(&sub_dir, &traj, &summary, &serde_json::to_value(&sub)?)?;
        }
        rows.push((rho, summary));
    }
    Ok(rows)
}

fn rho_slug(rho: f64) -> String {
    let inv = 1.0 / rho;
    if (inv - inv.round()).abs() < 1e-9 {
        format!("1over{}", inv.round() as i64)
    } else {
        format!("{rho}").replace('.', "_")
    }
}

/// Paired comparison of two topologies on the identical suite and seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyComparison {
    pub rows: Vec<TopologyRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyRow {
    pub label: String,
    pub algebraic_connectivity: f64,
    pub final_gap: f64,
    pub fitted_rate: Option<f64>,
}

pub fn run_exponential_vs_er(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<TopologyComparison> {
    let er = build_schedule(&cfg.network, cfg.seeds.graph)?;
    let expo = SwitchingSchedule::Static(generate_exponential(cfg.network.n, cfg.network.weight)?);
    run_topology_pair(
        cfg,
        [("exponential", expo), ("er", er)],
        out,
    )
}

/// Run the same suite/seeds over two labelled schedules; the report order
/// follows the argument order.
pub fn run_topology_pair(
    cfg: &ExperimentConfig,
    pair: [(&str, SwitchingSchedule<f64>); 2],
    out: Option<&Path>,
) -> Result<TopologyComparison> {
    let (suite, suite_json) = build_suite(cfg)?;
    let nl = LinkNonlinearity::<f64>::from_json(&cfg.nonlinearity)?;
    let mut rows = Vec::new();
    for (label, schedule) in pair {
        let conn = schedule
            .graph_at(0.0)?
            .laplacian()
            .algebraic_connectivity()?;
        let inst = Instance {
            label: label.to_string(),
            suite: suite.clone(),
            schedule,
            nonlinearity: nl,
            integrator: cfg.integrator,
            suite_json: suite_json.clone(),
        };
        let (traj, summary) = run_instance(&inst, cfg.seeds.x0, None)?;
        if let Some(dir) = out {
            write_outputs(&dir.join(label), &traj, &summary, &serde_json::to_value(cfg)?)?;
        }
        rows.push(TopologyRow {
            label: label.to_string(),
            algebraic_connectivity: conn,
            final_gap: summary.final_gap,
            fitted_rate: summary.fitted_rate,
        });
    }
    Ok(TopologyComparison { rows })
}

/// One row of the link-failure sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkFailureRow {
    pub removal_rate: f64,
    pub removed_edges: usize,
    pub shortfall: usize,
    pub algebraic_connectivity: f64,
    pub final_gap: f64,
    pub fitted_rate: Option<f64>,
}

/// Remove growing fractions of links from one base graph and rerun the
/// identical suite and seeds on each thinned topology.
pub fn run_link_failure(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<Vec<LinkFailureRow>> {
    let base = generate_er_wb::<f64>(
        cfg.network.n,
        cfg.network.link_prob,
        cfg.network.weight,
        cfg.seeds.graph,
    )?;
    let (suite, suite_json) = build_suite(cfg)?;
    let nl = LinkNonlinearity::<f64>::from_json(&cfg.nonlinearity)?;
    let rates = if cfg.removal_rates.is_empty() {
        vec![0.0, 0.1, 0.2, 0.3]
    } else {
        cfg.removal_rates.clone()
    };
    let mut rows = Vec::new();
    for &rate in &rates {
        let (thinned, event): (DirectedWeightedGraph<f64>, LinkFailureEvent) =
            remove_links(&base, rate, cfg.seeds.graph.wrapping_add(101))?;
        let conn = thinned.laplacian().algebraic_connectivity()?;
        let inst = Instance {
            label: format!("link-failure p={rate}"),
            suite: suite.clone(),
            schedule: SwitchingSchedule::Static(thinned),
            nonlinearity: nl,
            integrator: cfg.integrator,
            suite_json: suite_json.clone(),
        };
        let (traj, summary) = run_instance(&inst, cfg.seeds.x0, None)?;
        if let Some(dir) = out {
            let sub = dir.join(format!("p_{}", format!("{rate}").replace('.', "_")));
            write_outputs(&sub, &traj, &summary, &serde_json::to_value(cfg)?)?;
        }
        rows.push(LinkFailureRow {
            removal_rate: rate,
            removed_edges: event.removed_edges.len(),
            shortfall: event.shortfall,
            algebraic_connectivity: conn,
            final_gap: summary.final_gap,
            fitted_rate: summary.fitted_rate,
        });
    }
    Ok(rows)
}

/// A starting state that parks one node in a local minimum of its own cost
/// (the farthest stationary minimum from the origin), others seeded
/// uniformly.
pub fn x0_with_node_at_local_minimum(
    suite: &NodeCostSuite<f64>,
    node: usize,
    x0_seed: u64,
) -> Option<Array1<f64>> {
    let minima = local_minima(suite.objective(node), -6.0, 6.0, 6000);
    let target = minima
        .into_iter()
        .filter(|z| z.abs() > 1.0)
        .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())?;
    let mut x0 = crate::dynamics::draw_initial_state::<f64>(suite.n(), suite.dim(), x0_seed);
    x0[node * suite.dim()] = target;
    Some(x0)
}

/// Hessian blocks of a suite at a consensus operating point, shared by the
/// CLI inspection commands.
pub fn hessian_blocks_at_consensus(
    suite: &NodeCostSuite<f64>,
    point: &Array1<f64>,
) -> Result<Vec<Array2<f64>>> {
    let mut stacked = Array1::zeros(suite.n() * suite.dim());
    for i in 0..suite.n() {
        for k in 0..suite.dim() {
            stacked[i * suite.dim() + k] = point[k];
        }
    }
    suite.hessian_blocks(&stacked.view())
}
