use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use vrpcast::ingest::{generate_synthetic, load_csv, GeneratorConfig, GeneratorKind, TimeSeries};
use vrpcast::lags::ProfileEstimator;
use vrpcast::pipeline::{
    compare_algorithms, lag_profile, run_pipeline, stationarity, write_forecast_csv, ForecastModel,
    PipelineConfig,
};
use vrpcast::series::difference;
use vrpcast::train::DEFAULT_SEED;
use vrpcast::{Error, Result};

use crate::args::{
    Command, DataArgs, ForecastArgs, IngestArgs, InputArgs, LagsArgs, PipelineArgs, SynthArgs,
    SynthKind,
};
use crate::summary;

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Stationarity(a) => stationarity_cmd(a),
        Command::Lags(a) => lags(a),
        Command::Train(a) => train(a),
        Command::Forecast(a) => forecast(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Compare(a) => compare(a),
        Command::Synth(a) => synth(a),
    }
}

fn read_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    PipelineConfig::from_json(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Config file (if any) with the input flags applied on top.
fn base_config(input: &InputArgs) -> Result<PipelineConfig> {
    let mut cfg = match &input.config {
        Some(path) => read_config(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(path) = &input.input {
        cfg.input = Some(path.clone());
    }
    if let Some(mode) = input.mode {
        cfg.mode = mode;
    }
    Ok(cfg)
}

fn load_series(cfg: &PipelineConfig) -> Result<TimeSeries> {
    let path = cfg.input.as_ref().ok_or_else(|| {
        Error::InvalidConfig("--input is required (or set `input` in --config)".into())
    })?;
    let (series, load) = load_csv(path, cfg.mode)?;
    log::info!("{load:?}");
    Ok(series)
}

fn histogram_bins(cfg: &mut PipelineConfig, bins: Option<usize>) {
    if let Some(bins) = bins {
        cfg.lag_selection.estimator = ProfileEstimator::PairwiseHistogram { bins };
    }
}

fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg = base_config(&args.input)?;
    if let Some(lag) = args.lag {
        cfg.lag = lag;
    }
    histogram_bins(&mut cfg, args.bins);
    if let Some(hidden) = args.hidden {
        cfg.hidden = hidden;
    }
    if let Some(algo) = args.algo {
        cfg.train.algorithm = algo.into();
    }
    if let Some(f) = args.train_fraction {
        cfg.train_fraction = f;
    }
    if let Some(steps) = args.steps {
        cfg.horizon = steps;
    }
    if let Some(epochs) = args.max_epochs {
        cfg.train.max_epochs = epochs;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

fn ingest(args: IngestArgs) -> Result<()> {
    let cfg = base_config(&args.input)?;
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--input is required".into()))?;
    let (series, load) = load_csv(path, cfg.mode)?;
    summary::ingest(&series, &load);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let out = dir.join("series.csv");
        let file = fs::File::create(&out).map_err(|e| io_error(&out, e))?;
        series.write_csv(file)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn stationarity_cmd(args: DataArgs) -> Result<()> {
    let cfg = base_config(&args.input)?;
    let series = load_series(&cfg)?;
    let result = stationarity(&series)?;
    summary::stationarity(&result);
    if let Some(dir) = &args.out {
        println!(
            "wrote {}",
            write_json(dir, "stationarity.json", &result)?.display()
        );
    }
    Ok(())
}

fn lags(args: LagsArgs) -> Result<()> {
    let mut cfg = base_config(&args.input)?;
    histogram_bins(&mut cfg, args.bins);
    if let Some(max_lag) = args.max_lag {
        cfg.lag_selection.max_lag = max_lag;
    }
    if let Some(f) = args.train_fraction {
        cfg.train_fraction = f;
    }
    cfg.lag_selection.validate()?;
    let series = load_series(&cfg)?;
    let residuals = difference(series.values())?.residuals;
    let profile = lag_profile(&residuals, &cfg)?;
    summary::profile(&profile);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join("entropy_profile.csv");
        profile.write_csv(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn train(args: PipelineArgs) -> Result<()> {
    let cfg = pipeline_config(&args)?;
    if cfg.out.is_none() {
        log::warn!("no --out directory given; the trained model is not saved");
    }
    let run = run_pipeline(&cfg)?;
    summary::training(&run);
    if let Some(dir) = &cfg.out {
        println!("model and artifacts written to {}", dir.display());
    }
    Ok(())
}

fn evaluate(args: PipelineArgs) -> Result<()> {
    let cfg = pipeline_config(&args)?;
    let run = run_pipeline(&cfg)?;
    summary::evaluation(&run.report);
    if let Some(dir) = &cfg.out {
        println!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn compare(args: PipelineArgs) -> Result<()> {
    let cfg = pipeline_config(&args)?;
    let comparison = compare_algorithms(&cfg)?;
    summary::comparison(&comparison);
    if let Some(dir) = &cfg.out {
        println!("comparison written to {}", dir.display());
    }
    Ok(())
}

fn forecast(args: ForecastArgs) -> Result<()> {
    let model = ForecastModel::load(&args.model)?;
    let values = model.forecast(args.steps)?;
    for (i, v) in values.iter().enumerate() {
        println!("{}\t{v:.6e}", i + 1);
    }
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args
            .model
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let path = dir.join("forecast.csv");
    write_forecast_csv(&path, &values)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            serde_json::from_str::<GeneratorConfig>(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => {
            let sigma = args.sigma.unwrap_or(1.0);
            let kind = match args.kind {
                SynthKind::Bursts => GeneratorKind::bursts(),
                SynthKind::WhiteNoise => GeneratorKind::WhiteNoise { mean: 0.0, sigma },
                SynthKind::RandomWalk => GeneratorKind::RandomWalk { start: 0.0, sigma },
                SynthKind::Ar => GeneratorKind::Ar {
                    coefficients: args.coefficients.clone().ok_or_else(|| {
                        Error::InvalidConfig("--kind ar needs --coefficients".into())
                    })?,
                    sigma,
                    mean: 0.0,
                },
            };
            GeneratorConfig::new(args.n, kind)
        }
    };
    let series = generate_synthetic(&cfg, args.seed.unwrap_or(DEFAULT_SEED))?;
    match &args.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
            series.write_csv(file)?;
            eprintln!("wrote {} observations to {}", series.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            series.write_csv(&mut lock)?;
            lock.flush()
                .map_err(|e| io_error(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}
