//! Human-readable stdout summaries. The format is informative only; the JSON
//! artifacts are the stable interface.

use vrpcast::ingest::{format_timestamp, LoadSummary, TimeSeries};
use vrpcast::lags::EntropyProfile;
use vrpcast::pipeline::{Comparison, EvalReport, PipelineRun, Stationarity};
use vrpcast::stats::{ErrorStats, KpssResult, TTestResult};

fn r2(stats: &ErrorStats) -> String {
    stats
        .r_squared
        .map(|v| format!("{v:.4}"))
        .unwrap_or_else(|| "n/a".into())
}

fn error_row(label: &str, s: &ErrorStats) {
    println!(
        "  {label:<6} ME {:>12.4e} W   MSE {:>12.4e} W^2   R^2 {}",
        s.mean_error,
        s.mean_squared_error,
        r2(s)
    );
}

fn kpss_row(label: &str, k: &KpssResult) {
    println!(
        "  {label:<12} KPSS {:>9.4}  lag {:>2}  5% critical {:.3}  {}",
        k.statistic,
        k.truncation_lag,
        k.critical_value(0.05).unwrap_or(f64::NAN),
        if k.reject_at_5pct {
            "reject stationarity"
        } else {
            "stationary"
        }
    );
}

fn ttest_row(label: &str, t: &TTestResult) {
    println!(
        "  {label:<22} t {:>9.4}  df {:>9.2}  p {:.4}  {}",
        t.t_statistic,
        t.degrees_of_freedom,
        t.p_value,
        if t.reject_at_5pct {
            "means differ at 5%"
        } else {
            "no difference at 5%"
        }
    );
}

pub fn ingest(series: &TimeSeries, load: &LoadSummary) {
    println!(
        "rows read {}, missing {}, duplicates replaced {}, kept {}",
        load.rows_read, load.rows_missing, load.duplicates_replaced, load.rows_kept
    );
    if let (Some(first), Some(last)) = (series.timestamps().first(), series.timestamps().last()) {
        println!(
            "span {} .. {}",
            format_timestamp(first),
            format_timestamp(last)
        );
    }
    let v = series.values();
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| {
            (l.min(*x), h.max(*x))
        });
    println!("values min {lo:.4e} W, max {hi:.4e} W");
}

pub fn stationarity(s: &Stationarity) {
    kpss_row("raw", &s.raw);
    kpss_row("differenced", &s.differenced);
}

pub fn profile(p: &EntropyProfile) {
    println!("lag  delta (nats)");
    for (lag, d) in p.lags.iter().zip(&p.delta) {
        let mark = if *lag == p.selected_lag {
            "  <- selected"
        } else {
            ""
        };
        println!("{lag:>3}  {d:.5}{mark}");
    }
    println!(
        "noise floor {:.5}; selected lag {}",
        p.noise_floor, p.selected_lag
    );
}

pub fn training(run: &PipelineRun) {
    let prov = &run.model.provenance;
    let t = &run.report.training;
    println!(
        "{} network {} -> {} -> 1, seed {}",
        prov.algorithm, prov.lag, prov.hidden, prov.seed
    );
    if let Some(grid) = &run.prepared.grid {
        println!(
            "grid search over {} sizes picked h = {}",
            grid.entries.len(),
            grid.best_hidden
        );
    }
    println!(
        "{} epochs, stop {:?}, training MSE {:.4e} (normalized)",
        t.epochs_used, t.stop_reason, t.mse
    );
    if let (Some(a), Some(b), Some(g)) = (t.alpha, t.beta, t.gamma_effective) {
        println!("alpha {a:.4e}, beta {b:.4e}, effective parameters {g:.2}");
    }
    error_row("train", &run.report.train);
    error_row("test", &run.report.test);
}

pub fn evaluation(r: &EvalReport) {
    println!(
        "{} observations, {} patterns ({} train / {} test), lag {}, hidden {}, {}",
        r.n_observations,
        r.n_patterns,
        r.n_train,
        r.n_test,
        r.provenance.lag,
        r.provenance.hidden,
        r.provenance.algorithm
    );
    kpss_row("raw", &r.kpss_raw);
    kpss_row("differenced", &r.kpss_residuals);
    error_row("train", &r.train);
    error_row("test", &r.test);
    println!(
        "  ACF fidelity (mean |difference|, lags 1..): {:.4}",
        r.acf_fidelity
    );
    ttest_row("paired (test)", &r.paired_ttest);
    ttest_row("two-sample (train/test)", &r.two_sample_ttest);
}

pub fn comparison(c: &Comparison) {
    println!(
        "lag {}, hidden {}, seed {}, {} train / {} test patterns",
        c.lag, c.hidden, c.seed, c.n_train, c.n_test
    );
    for row in &c.rows {
        match (&row.test, &row.error) {
            (Some(s), _) => error_row(row.algorithm.as_str(), s),
            (None, Some(e)) => println!("  {:<6} failed: {e}", row.algorithm.as_str()),
            (None, None) => {}
        }
    }
}
