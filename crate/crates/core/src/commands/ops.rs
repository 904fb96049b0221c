use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ad::Tensor;
use crate::dataio::{generate_plant_from, load_csv, save_csv};
use crate::error::{Error, Result};
use crate::featsel::{load_feature_list, run_selection, save_feature_list};
use crate::fsutil::write_atomic;
use crate::models::{Checkpoint, Model, ModelKind};
use crate::pci_opt::{closed_loop_eval, optimize, ClosedLoopReport, OptimProblem, PciPolicy};
use crate::preprocess::{preprocess_frame, DiscretizedSeries, Sidecar, INPUT_STEPS, TEMPERATURE};
use crate::trainer::{build_samples, compare_models, evaluate, split, train, Comparison, TrainOutcome};

use super::RunConfig;

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_atomic(path, text.as_bytes())
}

/// Curve CSV written next to a checkpoint.
pub fn curve_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".curve.csv");
    PathBuf::from(s)
}

pub fn cmd_generate(cfg: &RunConfig, minutes: usize, out: &Path) -> Result<usize> {
    let frame = generate_plant_from(&cfg.plant, minutes, cfg.start)?;
    save_csv(&frame, out)?;
    Ok(frame.len())
}

pub fn cmd_preprocess(cfg: &RunConfig, input: &Path, out: &Path, sidecar: &Path) -> Result<DiscretizedSeries> {
    let frame = load_csv(input)?;
    let (series, side) = preprocess_frame(&frame, &cfg.preprocess)?;
    series.save(out)?;
    side.save(sidecar)?;
    Ok(series)
}

pub const IMPORTANCE_T: &str = "importance_temperature.csv";
pub const IMPORTANCE_PCI: &str = "importance_pci.csv";
pub const FEATURES: &str = "features.txt";

/// Writes both importance reports and the model feature list (selected
/// channels, then PCI, then temperature) into `out_dir`.
pub fn cmd_select_features(cfg: &RunConfig, input: &Path, out_dir: &Path) -> Result<Vec<String>> {
    let series = DiscretizedSeries::load(input)?;
    let sel = run_selection(&series, &cfg.featsel)?;
    create_dir(out_dir)?;
    sel.report_t.save(out_dir.join(IMPORTANCE_T))?;
    sel.report_pci.save(out_dir.join(IMPORTANCE_PCI))?;
    let features = sel.model_features();
    save_feature_list(&features, out_dir.join(FEATURES))?;
    Ok(features)
}

/// Trains on the chronological training split and writes the checkpoint
/// plus its loss curve.
pub fn cmd_train(
    cfg: &RunConfig,
    kind: ModelKind,
    input: &Path,
    sidecar: &Path,
    features: &Path,
    checkpoint: &Path,
) -> Result<(Checkpoint, TrainOutcome)> {
    let series = DiscretizedSeries::load(input)?;
    let side = Sidecar::load(sidecar)?;
    if side.l_window != series.l_window {
        return Err(Error::Domain(format!(
            "sidecar l_window {} differs from series l_window {}",
            side.l_window, series.l_window
        )));
    }
    let features = load_feature_list(features)?;
    if !features.iter().any(|f| f == TEMPERATURE) {
        return Err(Error::Domain("feature list must include temperature".into()));
    }
    let set = build_samples(&series, &side.scaler, &features)?;
    let (train_set, _) = split(&set, cfg.train.split_ratio)?;
    let mut model = Model::new(kind, features.len(), cfg.hidden(kind), cfg.seed())?;
    let outcome = train(&mut model, &train_set, &cfg.train)?;
    let ck = Checkpoint {
        model,
        scaler: side.scaler.select(&features)?,
        l_window: series.l_window,
    };
    ck.save(checkpoint)?;
    write_atomic(curve_path(checkpoint), outcome.curve_csv().as_bytes())?;
    Ok((ck, outcome))
}

/// Scores every checkpoint on the test split of `input`; the first
/// checkpoint is the comparison reference.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    checkpoints: &[PathBuf],
    input: &Path,
    out_json: &Path,
    out_csv: &Path,
) -> Result<Comparison> {
    let series = DiscretizedSeries::load(input)?;
    let mut reports = Vec::with_capacity(checkpoints.len());
    for path in checkpoints {
        let ck = Checkpoint::load(path)?;
        if ck.l_window != series.l_window {
            return Err(Error::Domain(format!(
                "{} was trained at l_window {}, series has {}",
                path.display(),
                ck.l_window,
                series.l_window
            )));
        }
        let set = build_samples(&series, &ck.scaler, ck.features())?;
        let (_, test) = split(&set, cfg.train.split_ratio)?;
        reports.push(evaluate(&ck, &test)?);
    }
    let cmp = compare_models(reports)?;
    write_atomic(out_json, cmp.to_json()?.as_bytes())?;
    write_atomic(out_csv, cmp.to_csv().as_bytes())?;
    Ok(cmp)
}

pub const POLICY: &str = "policy.csv";
pub const TRACE: &str = "trace.csv";
pub const OPTIM_SUMMARY: &str = "optimize.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimSummary {
    pub iterations: usize,
    pub initial_loss: f64,
    pub best_loss: f64,
    pub best_iteration: usize,
    pub reduction: f64,
    pub pci_scaled: Vec<f64>,
    pub pci_tph: Vec<f64>,
    pub predicted_t_c: Vec<f64>,
}

/// The last 24 steps of `series` as a scaled history for `ck`.
pub fn latest_history(series: &DiscretizedSeries, ck: &Checkpoint) -> Result<Tensor> {
    let n = series.steps();
    if n < INPUT_STEPS || !series.is_contiguous(n - INPUT_STEPS, n - 1) {
        return Err(Error::Insufficient(format!(
            "optimization needs {INPUT_STEPS} contiguous trailing steps"
        )));
    }
    let sub = series.select(ck.features())?;
    let mut rows = sub.rows[n - INPUT_STEPS..].to_vec();
    ck.scaler.transform_rows(&mut rows)?;
    Tensor::from_rows(&rows)
}

/// Plans PCI for the five steps after the end of `input`.
pub fn cmd_optimize(
    cfg: &RunConfig,
    checkpoint: &Path,
    input: &Path,
    iterations: usize,
    out_dir: &Path,
) -> Result<(PciPolicy, OptimSummary)> {
    let ck = Checkpoint::load(checkpoint)?;
    let series = DiscretizedSeries::load(input)?;
    let history = latest_history(&series, &ck)?;
    let problem = OptimProblem::new(&ck, history, ck.scaler.fingerprint(), cfg.optim.target_c, cfg.optim.lambda)?;
    let ocfg = crate::pci_opt::OptimConfig {
        iterations,
        ..cfg.optim.clone()
    };
    let mut moptim = ocfg.fresh_moptim(ck.model.n_features);
    let policy = optimize(&problem, &mut moptim, &ocfg)?;
    let pci_idx = problem.pci_idx;
    let t_idx = problem.t_idx;
    let pci_tph = policy
        .pci
        .iter()
        .map(|p| ck.scaler.inverse_value(pci_idx, *p))
        .collect::<Result<Vec<_>>>()?;
    let predicted_t_c = policy
        .predicted_t
        .iter()
        .map(|t| ck.scaler.inverse_value(t_idx, *t))
        .collect::<Result<Vec<_>>>()?;
    let summary = OptimSummary {
        iterations,
        initial_loss: policy.initial_loss,
        best_loss: policy.loss,
        best_iteration: policy.iteration,
        reduction: if policy.initial_loss > 0.0 {
            1.0 - policy.loss / policy.initial_loss
        } else {
            0.0
        },
        pci_scaled: policy.pci.clone(),
        pci_tph,
        predicted_t_c,
    };
    create_dir(out_dir)?;
    let mut csv = String::from("step,pci_scaled,pci_tph,predicted_step,predicted_t_c\n");
    for k in 0..summary.pci_scaled.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            k + 1,
            summary.pci_scaled[k],
            summary.pci_tph[k],
            k + 6,
            summary.predicted_t_c[k]
        ));
    }
    write_atomic(out_dir.join(POLICY), csv.as_bytes())?;
    write_atomic(out_dir.join(TRACE), policy.trace_csv().as_bytes())?;
    write_json(&out_dir.join(OPTIM_SUMMARY), &summary)?;
    Ok((policy, summary))
}

pub const LOOP_LOG: &str = "closed_loop.csv";
pub const LOOP_SUMMARY: &str = "closed_loop.json";

/// Runs the controller from the end of the configured generation window
/// (`start + minutes`) so it sees disturbances not used for training.
pub fn cmd_closed_loop(cfg: &RunConfig, checkpoint: &Path, minutes: usize, out_dir: &Path) -> Result<ClosedLoopReport> {
    let ck = Checkpoint::load(checkpoint)?;
    let lcfg = cfg.loop_config(minutes, ck.l_window)?;
    let start = cfg.start + cfg.minutes as i64;
    let report = closed_loop_eval(&cfg.plant, start, &ck, &lcfg)?;
    create_dir(out_dir)?;
    write_atomic(out_dir.join(LOOP_LOG), report.log_csv().as_bytes())?;
    write_json(&out_dir.join(LOOP_SUMMARY), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutcome {
    pub comparison: Comparison,
    pub optimization: Option<OptimSummary>,
    pub closed_loop: Option<ClosedLoopReport>,
    /// Every file written, relative to the output directory, sorted.
    pub files: Vec<PathBuf>,
}

/// Generate → preprocess → select → train each configured model →
/// evaluate → (with `mall`) optimize and closed loop.
pub fn cmd_pipeline(cfg: &RunConfig, out_dir: &Path) -> Result<PipelineOutcome> {
    create_dir(out_dir)?;
    write_atomic(out_dir.join("config.txt"), cfg.to_text().as_bytes())?;
    let raw = out_dir.join("raw.csv");
    let disc = out_dir.join("discretized.csv");
    let side = out_dir.join("sidecar.txt");
    cmd_generate(cfg, cfg.minutes, &raw)?;
    cmd_preprocess(cfg, &raw, &disc, &side)?;
    let feat_dir = out_dir.join("features");
    cmd_select_features(cfg, &disc, &feat_dir)?;
    let mut checkpoints = Vec::new();
    let mut mall = None;
    for kind in &cfg.models {
        let ck = out_dir.join(format!("{}.ckpt", kind.as_str()));
        cmd_train(cfg, *kind, &disc, &side, &feat_dir.join(FEATURES), &ck)?;
        if *kind == ModelKind::MAll {
            mall = Some(ck.clone());
        }
        checkpoints.push(ck);
    }
    let comparison = cmd_evaluate(
        cfg,
        &checkpoints,
        &disc,
        &out_dir.join("evaluation.json"),
        &out_dir.join("evaluation.csv"),
    )?;
    let (optimization, closed_loop) = match mall {
        Some(ck) => {
            let (_, s) = cmd_optimize(cfg, &ck, &disc, cfg.optim.iterations, &out_dir.join("optimize"))?;
            let r = cmd_closed_loop(cfg, &ck, cfg.loop_minutes, &out_dir.join("closed_loop"))?;
            (Some(s), Some(r))
        }
        None => (None, None),
    };
    let mut files = Vec::new();
    collect_files(out_dir, out_dir, &mut files)?;
    files.sort();
    Ok(PipelineOutcome {
        comparison,
        optimization,
        closed_loop,
        files,
    })
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}
