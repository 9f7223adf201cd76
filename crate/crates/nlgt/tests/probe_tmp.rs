use nlgt::graph::{generate_er_wb, generate_exponential};
use nlgt::harness::{run_exponential_vs_er, run_link_failure, spearman, ExperimentConfig};

#[test]
fn probe_exp_vs_er() {
    let conn_exp = generate_exponential::<f64>(10, 1.0)
        .unwrap()
        .laplacian()
        .algebraic_connectivity()
        .unwrap();
    println!("conn(exp) = {conn_exp:.4}");
    for base in 1..=10u64 {
        let cfg = ExperimentConfig::exponential_vs_er_default().with_base_seed(base);
        let conn_er = generate_er_wb::<f64>(10, 0.5, 1.0, cfg.seeds.graph)
            .unwrap()
            .laplacian()
            .algebraic_connectivity()
            .unwrap();
        let cmp = run_exponential_vs_er(&cfg, None).unwrap();
        println!(
            "base {base}: conn_er {conn_er:.4}  gap_exp {:.3e} gap_er {:.3e}  exp<=er {}",
            cmp.rows[0].final_gap,
            cmp.rows[1].final_gap,
            cmp.rows[0].final_gap <= cmp.rows[1].final_gap
        );
    }
}

#[test]
fn probe_link_failure_horizons() {
    for (horizon, dt) in [(400.0, 5e-3), (800.0, 1e-2)] {
        println!("--- horizon {horizon} dt {dt}");
        for base in 1..=10u64 {
            let mut cfg = ExperimentConfig::link_failure_default().with_base_seed(base);
            cfg.integrator.horizon = horizon;
            cfg.integrator.dt = dt;
            cfg.integrator.record_every = 100;
            cfg.nonlinearity = nlgt::nonlinearity::NonlinearityJson::LogQuantize { rho: 1.0 / 1024.0 };
            let rows = run_link_failure(&cfg, None).unwrap();
            let rates: Vec<f64> = rows
                .iter()
                .map(|r| r.fitted_rate.map(|v| v.abs()).unwrap_or(0.0))
                .collect();
            let conns: Vec<f64> = rows.iter().map(|r| r.algebraic_connectivity).collect();
            let mut ties = 0;
            let mut monotone = true;
            for w in rates.windows(2) {
                if w[1] <= w[0] {
                    continue;
                } else if w[1] <= w[0] * 1.10 {
                    ties += 1;
                } else {
                    monotone = false;
                }
            }
            let rho = spearman(&conns, &rates).unwrap_or(0.0);
            println!(
                "base {base}: rates {:?} conns {:?} monotone {monotone} ties {ties} spearman {rho:.2}",
                rates.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
                conns.iter().map(|c| (c * 1e3).round() / 1e3).collect::<Vec<_>>()
            );
        }
    }
}
