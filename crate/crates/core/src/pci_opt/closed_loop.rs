use std::collections::BTreeMap;

use serde::Serialize;

use crate::ad::Tensor;
use crate::dataio::{Plant, PlantConfig, PlantReading, PCI_CHANNEL, NOMINAL_PCI};
use crate::error::{Error, Result};
use crate::models::Checkpoint;
use crate::preprocess::{INPUT_STEPS, OUTPUT_STEPS, TEMPERATURE};

use super::optimize::{optimize, OptimConfig};
use super::problem::OptimProblem;

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopConfig {
    /// Controlled discretized steps (after a 24-step warm-up).
    pub steps: usize,
    /// Re-plan every this many steps; policy values are applied in order
    /// in between.
    pub replan_interval: usize,
    pub band: f64,
    /// Keep M_optim's weights between re-plans.
    pub warm_start: bool,
    /// Offset correction: the optimizer aims at `target − b`, where `b` is
    /// the mean of (measured − forecast) over the last this many steps that
    /// had a forecast. 0 disables it.
    pub bias_window: usize,
    pub optim: OptimConfig,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            steps: 96,
            replan_interval: OUTPUT_STEPS,
            band: 10.0,
            warm_start: true,
            bias_window: 0,
            optim: OptimConfig {
                iterations: 100,
                ..OptimConfig::default()
            },
        }
    }
}

impl ClosedLoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("closed loop needs at least one step".into()));
        }
        if !(1..=OUTPUT_STEPS).contains(&self.replan_interval) {
            return Err(Error::Config(format!(
                "replan interval must be in 1..={OUTPUT_STEPS}"
            )));
        }
        if !(self.band > 0.0) {
            return Err(Error::Config("band must be positive".into()));
        }
        self.optim.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationStats {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub std: f64,
    pub pct_in_band: f64,
}

impl DeviationStats {
    pub fn from_temperatures(temps: &[f64], target: f64, band: f64) -> Self {
        let n = temps.len().max(1) as f64;
        let dev: Vec<f64> = temps.iter().map(|t| t - target).collect();
        let mean = dev.iter().sum::<f64>() / n;
        let var = dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        Self {
            max_abs: dev.iter().fold(0.0, |m, d| m.max(d.abs())),
            mean_abs: dev.iter().map(|d| d.abs()).sum::<f64>() / n,
            std: var.sqrt(),
            pct_in_band: 100.0 * dev.iter().filter(|d| d.abs() <= band).count() as f64 / n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopStep {
    pub step: usize,
    pub minute: i64,
    pub pci_tph: f64,
    pub temperature: f64,
    /// Latest forecast made for this step, if any.
    pub predicted: Option<f64>,
    pub uncontrolled_pci_tph: f64,
    pub uncontrolled_temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedLoopReport {
    pub target_c: f64,
    pub band: f64,
    pub l_window: usize,
    pub replan_interval: usize,
    pub controlled: DeviationStats,
    pub uncontrolled: DeviationStats,
    pub mean_pci_tph: f64,
    pub std_pci_tph: f64,
    #[serde(skip)]
    pub steps: Vec<LoopStep>,
}

impl ClosedLoopReport {
    pub fn log_csv(&self) -> String {
        let mut s = String::from(
            "step,minute,pci_tph,temperature,predicted,uncontrolled_pci_tph,uncontrolled_temperature\n",
        );
        for r in &self.steps {
            let pred = r.predicted.map(|p| p.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.step, r.minute, r.pci_tph, r.temperature, pred, r.uncontrolled_pci_tph, r.uncontrolled_temperature
            ));
        }
        s
    }
}

/// Turns minute readings into discretized rows in the checkpoint's scaled
/// feature space.
struct OnlineWindow<'a> {
    ck: &'a Checkpoint,
    /// Where each model feature comes from.
    sources: Vec<Source>,
}

#[derive(Clone, Copy)]
enum Source {
    Pci,
    Temperature,
    Sensor(usize),
}

/// One discretized step: physical-unit means.
struct StepMeans {
    pci_tph: f64,
    temperature: f64,
    sensors: Vec<f64>,
}

impl StepMeans {
    fn of(readings: &[PlantReading]) -> Self {
        let n = readings.len() as f64;
        let n_s = readings[0].sensors.len();
        let mut sensors = vec![0.0; n_s];
        let (mut pci, mut temp) = (0.0, 0.0);
        for r in readings {
            pci += r.pci_tph;
            temp += r.taps.iter().sum::<f64>() / 4.0;
            for (a, v) in sensors.iter_mut().zip(&r.sensors) {
                *a += v;
            }
        }
        sensors.iter_mut().for_each(|a| *a /= n);
        Self {
            pci_tph: pci / n,
            temperature: temp / n,
            sensors,
        }
    }
}

impl<'a> OnlineWindow<'a> {
    fn new(ck: &'a Checkpoint, plant: &PlantConfig) -> Result<Self> {
        let names = plant.channel_names();
        let sources = ck
            .features()
            .iter()
            .map(|f| {
                if f == PCI_CHANNEL {
                    Ok(Source::Pci)
                } else if f == TEMPERATURE {
                    Ok(Source::Temperature)
                } else {
                    names
                        .iter()
                        .skip(1)
                        .position(|n| n == f)
                        .map(Source::Sensor)
                        .ok_or_else(|| Error::Domain(format!("plant has no channel {f}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ck, sources })
    }

    fn scaled_row(&self, m: &StepMeans) -> Result<Vec<f64>> {
        self.sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let x = match *s {
                    Source::Pci => m.pci_tph,
                    Source::Temperature => m.temperature,
                    Source::Sensor(k) => m.sensors[k],
                };
                self.ck.scaler.transform_value(i, x)
            })
            .collect()
    }
}

fn run_step(plant: &mut Plant, u: f64, l_window: usize) -> StepMeans {
    let readings: Vec<PlantReading> = (0..l_window).map(|_| plant.step(u)).collect();
    StepMeans::of(&readings)
}

/// Mean of measured minus forecast temperature over the last `window`
/// steps that carry a forecast.
fn forecast_bias(steps: &[LoopStep], window: usize) -> f64 {
    let residuals: Vec<f64> = steps
        .iter()
        .rev()
        .filter_map(|s| s.predicted.map(|p| s.temperature - p))
        .take(window)
        .collect();
    if residuals.is_empty() {
        0.0
    } else {
        residuals.iter().sum::<f64>() / residuals.len() as f64
    }
}

/// Runs the receding-horizon controller against the plant and, for
/// reference, the same plant (same disturbances) held at nominal PCI.
pub fn closed_loop_eval(
    plant_cfg: &PlantConfig,
    start_minute: i64,
    ck: &Checkpoint,
    cfg: &ClosedLoopConfig,
) -> Result<ClosedLoopReport> {
    cfg.validate()?;
    let l = ck.l_window;
    let online = OnlineWindow::new(ck, plant_cfg)?;
    let units = ck.scaler.fingerprint();
    let t_idx = ck.scaler.index(TEMPERATURE).expect("checked by OnlineWindow");
    let pci_idx = ck.scaler.index(PCI_CHANNEL).ok_or_else(|| Error::Domain("model features lack pci".into()))?;

    let mut plant = Plant::new(plant_cfg, start_minute)?;
    let mut reference = Plant::new(plant_cfg, start_minute)?;
    let mut history: Vec<Vec<f64>> = Vec::with_capacity(INPUT_STEPS + cfg.steps);
    for _ in 0..INPUT_STEPS {
        run_step(&mut reference, NOMINAL_PCI, l);
        let m = run_step(&mut plant, NOMINAL_PCI, l);
        history.push(online.scaled_row(&m)?);
    }

    let mut moptim = cfg.optim.fresh_moptim(ck.model.n_features);
    let mut plan: Vec<f64> = Vec::new();
    let mut forecasts: BTreeMap<usize, f64> = BTreeMap::new();
    let mut steps = Vec::with_capacity(cfg.steps);
    for s in 0..cfg.steps {
        let k = s % cfg.replan_interval;
        if k == 0 {
            let rows = &history[history.len() - INPUT_STEPS..];
            let hist = Tensor::from_rows(rows)?;
            let aim = cfg.optim.target_c - forecast_bias(&steps, cfg.bias_window);
            let problem = OptimProblem::new(ck, hist, units, aim, cfg.optim.lambda)?;
            if !cfg.warm_start {
                moptim = cfg.optim.fresh_moptim(ck.model.n_features);
            }
            let policy = optimize(&problem, &mut moptim, &cfg.optim)?;
            for (j, t) in policy.predicted_t.iter().enumerate() {
                forecasts.insert(s + OUTPUT_STEPS + j, ck.scaler.inverse_value(t_idx, *t)?);
            }
            plan = policy.pci;
        }
        let tph = ck.scaler.inverse_value(pci_idx, plan[k])?;
        let u = plant_cfg.tph_to_pci(tph);
        let minute = plant.minute();
        let m = run_step(&mut plant, u, l);
        let r = run_step(&mut reference, NOMINAL_PCI, l);
        history.push(online.scaled_row(&m)?);
        steps.push(LoopStep {
            step: s,
            minute,
            pci_tph: m.pci_tph,
            temperature: m.temperature,
            predicted: forecasts.get(&s).copied(),
            uncontrolled_pci_tph: r.pci_tph,
            uncontrolled_temperature: r.temperature,
        });
    }

    let target = cfg.optim.target_c;
    let temps: Vec<f64> = steps.iter().map(|r| r.temperature).collect();
    let ref_temps: Vec<f64> = steps.iter().map(|r| r.uncontrolled_temperature).collect();
    let pci: Vec<f64> = steps.iter().map(|r| r.pci_tph).collect();
    let n = pci.len() as f64;
    let mean_pci = pci.iter().sum::<f64>() / n;
    let std_pci = (pci.iter().map(|p| (p - mean_pci).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ClosedLoopReport {
        target_c: target,
        band: cfg.band,
        l_window: l,
        replan_interval: cfg.replan_interval,
        controlled: DeviationStats::from_temperatures(&temps, target, cfg.band),
        uncontrolled: DeviationStats::from_temperatures(&ref_temps, target, cfg.band),
        mean_pci_tph: mean_pci,
        std_pci_tph: std_pci,
        steps,
    })
}
