//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each.
//! Built with `harness = false`, so it runs as a plain program under
//! `cargo test`. A failed criterion makes the run exit non-zero only when
//! `ACCEPTANCE_STRICT=1` is set, so the rest of the workspace suite still runs.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use vrpcast::ingest::{generate_synthetic, GeneratorConfig, GeneratorKind};
use vrpcast::lags::{entropy_profile, relative_entropy_pair, shannon_entropy, ProfileConfig};
use vrpcast::mlp::{FlatParams, MlpModel};
use vrpcast::series::{difference, extract_patterns, lag_windows, split_index_for};
use vrpcast::stats::{kpss_level, paired_ttest, two_sample_ttest};
use vrpcast::train::{
    grid_search_hidden, minimize_damped, minimize_scg, train_brnn, train_lm, train_scg,
    LinearProblem, NetworkProblem, Regularization, TrainConfig,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn uniform_rows(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn mse(model: &MlpModel, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    let y = model.predict(inputs).expect("prediction");
    y.iter()
        .zip(targets)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / targets.len() as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Patterns from a random `p -> 4 -> 1` teacher with Gaussian noise whose
/// standard deviation is `noise_fraction` of the clean signal's.
struct TeacherTask {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    test_x: Vec<Vec<f64>>,
    test_y: Vec<f64>,
}

fn teacher_task(seed: u64, n_train: usize, n_test: usize, noise_fraction: f64) -> TeacherTask {
    const P: usize = 6;
    let mut teacher = MlpModel::init(P, 4, 10_000 + seed).expect("teacher");
    // Larger input weights so the teacher is visibly nonlinear on [0, 1]^p.
    teacher.w1.iter_mut().for_each(|w| *w *= 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(20_000 + seed);
    let train_x = uniform_rows(&mut rng, n_train, P);
    let test_x = uniform_rows(&mut rng, n_test, P);
    let clean_train = teacher.predict(&train_x).unwrap();
    let clean_test = teacher.predict(&test_x).unwrap();
    let sigma = noise_fraction * std_dev(&clean_train);
    let mut noisy = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .map(|y| y + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let train_y = noisy(clean_train);
    // Held-out targets carry the same noise as the training targets.
    let test_y = noisy(clean_test);
    TeacherTask {
        train_x,
        train_y,
        test_x,
        test_y,
    }
}

/// Analytic Jacobian against central differences.
fn jacobian_correctness() -> Outcome {
    let step = 1e-6;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for instance in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(instance);
        let p = rng.random_range(1..=8);
        let h = rng.random_range(1..=12);
        let n = rng.random_range(1..=6);
        let model = MlpModel::init(p, h, 1000 + instance).unwrap();
        let inputs = uniform_rows(&mut rng, n, p);
        let targets: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let (_, jac) = model
            .batch_residuals_and_jacobian(&inputs, &targets)
            .unwrap();
        let theta = model.flatten().0;
        for k in 0..theta.len() {
            let shifted = |d: f64| {
                let mut t = theta.clone();
                t[k] += d;
                let m = model.with_params(&FlatParams(t)).unwrap();
                inputs
                    .iter()
                    .zip(&targets)
                    .map(|(x, y)| y - m.forward(x).unwrap())
                    .collect::<Vec<_>>()
            };
            let (plus, minus) = (shifted(step), shifted(-step));
            for i in 0..n {
                let fd = (plus[i] - minus[i]) / (2.0 * step);
                let an = jac[(i, k)];
                let err = (fd - an).abs();
                if err > (1e-6 * an.abs()).max(1e-9) {
                    failures += 1;
                }
                if an.abs() > 1e-9 {
                    worst = worst.max(err / an.abs());
                }
            }
        }
    }
    check(
        failures == 0,
        format!("50 instances, {failures} mismatched entries, worst relative error {worst:.2e}"),
    )
}

fn differencing_round_trip() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=5000);
        let scale = 10f64.powf(rng.random_range(-3.0..10.0));
        let offset = scale * rng.random_range(-100.0..100.0);
        let mut level = offset;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                level += scale * rng.sample::<f64, _>(StandardNormal);
                level
            })
            .collect();
        let back = difference(&x).unwrap().reconstruct().unwrap();
        let max_abs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = x
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / max_abs;
        worst = worst.max(err);
    }
    check(
        worst < 1e-12,
        format!("100 series, worst normwise relative error {worst:.2e}"),
    )
}

fn pattern_count_identity() -> Outcome {
    let mut bad = Vec::new();
    let mut checked_splits = 0;
    for n in 3..=200usize {
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64).collect();
        let residuals = difference(&x).unwrap().residuals;
        for p in 1..=n - 2 {
            let (inputs, targets) = lag_windows(&residuals, p).unwrap();
            if inputs.len() != n - 1 - p || targets.len() != n - 1 - p {
                bad.push((n, p));
            }
            let split = split_index_for(n - 1 - p, 0.8);
            if split > 0 && split < n - 1 - p {
                let set = extract_patterns(&residuals, p, 0.8).unwrap();
                checked_splits += 1;
                if set.n_patterns() != n - 1 - p {
                    bad.push((n, p));
                }
            }
        }
    }
    let series =
        generate_synthetic(&GeneratorConfig::new(4713, GeneratorKind::bursts()), 1).unwrap();
    let residuals = difference(series.values()).unwrap().residuals;
    let set = extract_patterns(&residuals, 6, 0.8).unwrap();
    let (n_train, n_test) = (set.train_targets().len(), set.test_targets().len());
    check(
        bad.is_empty() && set.n_patterns() == 4706 && n_train == 3765 && n_test == 941,
        format!(
            "{} (n, p) mismatches ({checked_splits} full splits checked); 4713 -> {} patterns, {n_train}/{n_test}",
            bad.len(),
            set.n_patterns()
        ),
    )
}

fn kpss_calibration() -> Outcome {
    let (mut wn_ok, mut rw_reject, mut diff_ok) = (0, 0, 0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
        let walk: Vec<f64> = noise
            .iter()
            .scan(0.0, |s, e| {
                *s += e;
                Some(*s)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        let white: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
        wn_ok += usize::from(!kpss_level(&white).unwrap().reject_at_5pct);
        rw_reject += usize::from(kpss_level(&walk).unwrap().reject_at_5pct);
        let diffs = difference(&walk).unwrap().residuals;
        diff_ok += usize::from(!kpss_level(&diffs).unwrap().reject_at_5pct);
    }
    check(
        wn_ok >= 95 && rw_reject >= 95 && diff_ok >= 95,
        format!("white noise kept {wn_ok}/100, random walks rejected {rw_reject}/100, differences kept {diff_ok}/100"),
    )
}

fn entropy_estimator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let y: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let h = shannon_entropy(&x, 16).unwrap().nats;
    let self_delta = relative_entropy_pair(&x, &x, 16).unwrap();
    let independent = relative_entropy_pair(&x, &y, 16).unwrap();
    // 64 values per bin: 0.5/16, 1.5/16, ... repeated.
    let equal: Vec<f64> = (0..16 * 64)
        .map(|i| ((i % 16) as f64 + 0.5) / 16.0)
        .collect();
    let h_equal = shannon_entropy(&equal, 16).unwrap().nats;
    let equal_err = (h_equal - 16f64.ln()).abs();
    check(
        self_delta == h && independent < 0.05 && equal_err < 1e-12,
        format!(
            "delta(x,x) - H(x) = {:e}, independent {independent:.4} nats, |H_equal - ln 16| = {equal_err:.1e}",
            self_delta - h
        ),
    )
}

fn lag_selection_oracle() -> Outcome {
    let mut selected = Vec::new();
    for seed in 0..10u64 {
        let kind = GeneratorKind::Ar {
            coefficients: vec![0.4, -0.3, 0.25, -0.2, 0.15, 0.3],
            sigma: 1.0,
            mean: 0.0,
        };
        let series = generate_synthetic(&GeneratorConfig::new(5000, kind), seed).unwrap();
        let profile = entropy_profile(series.values(), &ProfileConfig::default()).unwrap();
        selected.push(profile.selected_lag);
    }
    let hits = selected.iter().filter(|l| (5..=8).contains(*l)).count();
    check(
        hits >= 8,
        format!("selected lags {selected:?}, {hits}/10 in [5, 8]"),
    )
}

fn sine_task() -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
    let ys = xs
        .iter()
        .map(|x| (2.0 * std::f64::consts::PI * x).sin())
        .collect();
    (xs.into_iter().map(|x| vec![x]).collect(), ys)
}

/// Consistent overdetermined system `A x = b`.
fn linear_system(rows: usize, cols: usize, seed: u64, shift: f64) -> LinearProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = nalgebra::DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    for k in 0..cols.min(rows) {
        a[(k, k)] += shift;
    }
    let x = nalgebra::DVector::from_fn(cols, |_, _| rng.random_range(-1.0..1.0));
    let b = &a * x;
    LinearProblem { a, b }
}

fn trainer_convergence() -> Outcome {
    let lin = linear_system(40, 6, 3, 0.0);
    let cfg = TrainConfig {
        mu_init: 1e-12,
        ..TrainConfig::default()
    };
    let (_, lm_lin) = minimize_damped(&lin, &[0.0; 6], &cfg, Regularization::None).unwrap();
    let first = &lm_lin.epoch_trace[0];
    let lm_one_step = first.accepted && first.objective < 1e-10;

    let quad = linear_system(50, 50, 4, 2.0 * 50f64.sqrt());
    let scg_cfg = TrainConfig {
        max_epochs: 200,
        objective_tolerance: 1e-300,
        gradient_tolerance: 1e-12,
        ..TrainConfig::default()
    };
    let (_, scg_quad) = minimize_scg(&quad, &[0.0; 50], &scg_cfg).unwrap();
    let scg_ok = scg_quad.e_d < 1e-10 && scg_quad.epochs_used <= 200;

    let (xs, ys) = sine_task();
    let model = MlpModel::init(1, 9, 11).unwrap();
    let (_, lm_sine) = train_lm(&model, &xs, &ys, &TrainConfig::default()).unwrap();
    let (_, scg_sine) = train_scg(&model, &xs, &ys, &TrainConfig::default()).unwrap();
    check(
        lm_one_step && scg_ok && lm_sine.mse < 1e-4 && scg_sine.mse < 1e-4,
        format!(
            "LM linear step 1 objective {:.1e}; SCG quadratic {:.1e} in {} iterations; sine E_D/N_D LM {:.1e} ({} epochs), SCG {:.1e} ({} epochs)",
            first.objective,
            scg_quad.e_d,
            scg_quad.epochs_used,
            lm_sine.mse,
            lm_sine.epochs_used,
            scg_sine.mse,
            scg_sine.epochs_used
        ),
    )
}

fn brnn_reduction_and_regularization() -> Outcome {
    // Reduction: alpha pinned at zero follows plain LM step for step.
    let (xs, ys) = sine_task();
    let model = MlpModel::init(1, 9, 7).unwrap();
    let problem = NetworkProblem::new(&model, &xs, &ys).unwrap();
    let theta0 = model.flatten().0;
    let mut max_diff = 0.0f64;
    for epochs in [1, 2, 5, 10, 25, 50] {
        let cfg = TrainConfig {
            max_epochs: epochs,
            objective_tolerance: 1e-300,
            gradient_tolerance: 1e-300,
            ..TrainConfig::default()
        };
        let (lm, _) = minimize_damped(&problem, &theta0, &cfg, Regularization::None).unwrap();
        let (br, _) = minimize_damped(
            &problem,
            &theta0,
            &cfg,
            Regularization::Bayesian {
                reestimate_alpha: false,
            },
        )
        .unwrap();
        for (a, b) in lm.iter().zip(&br) {
            max_diff = max_diff.max((a - b).abs());
        }
    }

    // Noisy line: y = 2 x + noise with x the first of six inputs, so a
    // 6 -> 9 -> 1 network (73 weights) has plenty of room to chase noise.
    let mut wins = 0;
    let mut gamma_ok = true;
    let mut gammas = Vec::new();
    let noise = Normal::new(0.0, 0.1).unwrap();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let train_x = uniform_rows(&mut rng, 100, 6);
        let test_x = uniform_rows(&mut rng, 500, 6);
        let train_y: Vec<f64> = train_x
            .iter()
            .map(|x| 2.0 * x[0] + noise.sample(&mut rng))
            .collect();
        let test_y: Vec<f64> = test_x
            .iter()
            .map(|x| 2.0 * x[0] + noise.sample(&mut rng))
            .collect();
        let init = MlpModel::init(6, 9, seed).unwrap();
        let cfg = TrainConfig::default();
        let (lm, _) = train_lm(&init, &train_x, &train_y, &cfg).unwrap();
        let (br, report) = train_brnn(&init, &train_x, &train_y, &cfg).unwrap();
        let n_w = init.n_params() as f64;
        gamma_ok &= report
            .epoch_trace
            .iter()
            .filter_map(|e| e.gamma)
            .all(|g| (0.0..=n_w).contains(&g));
        gammas.push(report.gamma_effective.unwrap_or(f64::NAN));
        wins += usize::from(mse(&br, &test_x, &test_y) < mse(&lm, &test_x, &test_y));
    }
    let gamma_text: Vec<String> = gammas.iter().map(|g| format!("{g:.1}")).collect();
    check(
        max_diff < 1e-10 && wins >= 8 && gamma_ok,
        format!(
            "pinned-alpha max |theta diff| {max_diff:.1e}; BRNN wins {wins}/10 on held-out MSE; gamma in range: {gamma_ok}; final gamma [{}]",
            gamma_text.join(", ")
        ),
    )
}

fn algorithm_ordering() -> Outcome {
    let (mut lm, mut scg, mut br) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let task = teacher_task(seed, 300, 300, 0.2);
        let init = MlpModel::init(6, 9, seed).unwrap();
        let cfg = TrainConfig::default();
        let score = |m: MlpModel| mse(&m, &task.test_x, &task.test_y);
        lm.push(score(
            train_lm(&init, &task.train_x, &task.train_y, &cfg)
                .unwrap()
                .0,
        ));
        scg.push(score(
            train_scg(&init, &task.train_x, &task.train_y, &cfg)
                .unwrap()
                .0,
        ));
        br.push(score(
            train_brnn(&init, &task.train_x, &task.train_y, &cfg)
                .unwrap()
                .0,
        ));
    }
    let (m_lm, m_scg, m_br) = (median(lm), median(scg), median(br));
    check(
        m_br <= m_lm && m_br <= m_scg,
        format!("median test MSE: BRNN {m_br:.4e}, LM {m_lm:.4e}, SCG {m_scg:.4e}"),
    )
}

fn run_compare(bin: &str, input: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(bin)
        .args(["compare", "--input"])
        .arg(input)
        .args(["--seed", "42", "--out"])
        .arg(out)
        .output()
        .map_err(|e| format!("could not run {bin}: {e}"))?;
    if !status.status.success() {
        return Err(format!(
            "compare exited with {}: {}",
            status.status,
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    Ok(())
}

fn end_to_end_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_vrpcast");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("series.csv");
    let series =
        generate_synthetic(&GeneratorConfig::new(1500, GeneratorKind::bursts()), 9).unwrap();
    let file = std::fs::File::create(&input).map_err(|e| e.to_string())?;
    series.write_csv(file).map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_compare(bin, &input, &a)?;
    run_compare(bin, &input, &b)?;
    let mut compared = 0;
    let mut differing = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(&a)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name()))
        .collect();
    names.sort();
    for name in &names {
        let left = std::fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let right = std::fs::read(b.join(name)).map_err(|e| e.to_string())?;
        compared += 1;
        if left != right {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    let has_json = names.iter().any(|n| n.to_string_lossy().ends_with(".json"));
    check(
        has_json && differing.is_empty(),
        format!("{compared} artifacts compared, differing: {differing:?}"),
    )
}

fn statistical_tests() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<f64> = (0..40).map(|_| rng.sample(StandardNormal)).collect();
    let paired_same = paired_ttest(&x, &x).unwrap();
    let two_same = two_sample_ttest(&x, &x).unwrap();
    let identical_ok = paired_same.t_statistic == 0.0
        && paired_same.p_value == 1.0
        && two_same.t_statistic == 0.0
        && two_same.p_value == 1.0;

    let (mut paired_rej, mut two_rej) = (0, 0);
    for seed in 0..1000u64 {
        let mut ra = ChaCha8Rng::seed_from_u64(2 * seed);
        let mut rb = ChaCha8Rng::seed_from_u64(2 * seed + 1);
        let n = 30;
        let a: Vec<f64> = (0..n).map(|_| ra.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..n).map(|_| rb.sample(StandardNormal)).collect();
        // Unequal size and spread for Welch's test.
        let c: Vec<f64> = (0..45)
            .map(|_| 2.0 * rb.sample::<f64, _>(StandardNormal))
            .collect();
        paired_rej += usize::from(paired_ttest(&a, &b).unwrap().reject_at_5pct);
        two_rej += usize::from(two_sample_ttest(&a, &c).unwrap().reject_at_5pct);
    }
    let (paired_rate, two_rate) = (paired_rej as f64 / 1000.0, two_rej as f64 / 1000.0);
    let in_band = |r: f64| (0.03..=0.07).contains(&r);
    check(
        identical_ok && in_band(paired_rate) && in_band(two_rate),
        format!(
            "identical samples: paired t {} p {}, two-sample t {} p {}; type-I paired {:.1}%, two-sample {:.1}%",
            paired_same.t_statistic,
            paired_same.p_value,
            two_same.t_statistic,
            two_same.p_value,
            100.0 * paired_rate,
            100.0 * two_rate
        ),
    )
}

fn grid_search() -> Outcome {
    let task = teacher_task(0, 300, 1, 0.2);
    let cfg = TrainConfig::default();
    let sweep = grid_search_hidden(&task.train_x, &task.train_y, 2..=25, &cfg)
        .map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = sweep.entries.iter().map(|e| e.hidden).collect();
    let shape_ok = sweep.entries.len() == 24 && sizes == (2..=25).collect::<Vec<_>>();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let flat_x = uniform_rows(&mut rng, 50, 3);
    let flat_y = vec![0.25; 50];
    let flat = grid_search_hidden(&flat_x, &flat_y, 2..=6, &cfg).map_err(|e| e.to_string())?;
    let objective_at = |h: usize| {
        sweep
            .entries
            .iter()
            .find(|e| e.hidden == h)
            .and_then(|e| e.objective)
            .unwrap_or(f64::NAN)
    };
    check(
        shape_ok && (3..=8).contains(&sweep.best_hidden) && flat.best_hidden == 2,
        format!(
            "{} entries, teacher h = 4 task picked h = {} (training MSE {:.3e} vs {:.3e} at h = 4), constant targets picked h = {}",
            sweep.entries.len(),
            sweep.best_hidden,
            objective_at(sweep.best_hidden),
            objective_at(4),
            flat.best_hidden
        ),
    )
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            name: "jacobian correctness",
            budget: secs(10),
            run: jacobian_correctness,
        },
        Criterion {
            name: "differencing round-trip",
            budget: secs(5),
            run: differencing_round_trip,
        },
        Criterion {
            name: "pattern-count identity",
            budget: secs(5),
            run: pattern_count_identity,
        },
        Criterion {
            name: "kpss calibration",
            budget: secs(30),
            run: kpss_calibration,
        },
        Criterion {
            name: "entropy estimator",
            budget: secs(10),
            run: entropy_estimator,
        },
        Criterion {
            name: "lag selection",
            budget: secs(60),
            run: lag_selection_oracle,
        },
        Criterion {
            name: "trainer convergence",
            budget: secs(60),
            run: trainer_convergence,
        },
        Criterion {
            name: "brnn reduction and regularization",
            budget: secs(120),
            run: brnn_reduction_and_regularization,
        },
        Criterion {
            name: "algorithm ordering",
            budget: secs(300),
            run: algorithm_ordering,
        },
        Criterion {
            name: "end-to-end determinism",
            budget: secs(300),
            run: end_to_end_determinism,
        },
        Criterion {
            name: "statistical tests",
            budget: secs(60),
            run: statistical_tests,
        },
        Criterion {
            name: "grid search",
            budget: secs(300),
            run: grid_search,
        },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {}: {detail} [{:.1} s, budget {} s{}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
