//! Synthetic blast-furnace stand-in.
//!
//! A latent heat state follows a first-order lag driven by the applied PCI
//! (saturated to `[0, 1]`) and a slow exogenous disturbance, both routed
//! through the same transport delay:
//!
//! ```text
//! q(t)   = gain · clamp(u(t), 0, 1) + S(t)
//! h(t+1) = a · h(t) + (1 − a) · q(t − delay),   a = exp(−1 / time_constant)
//! T(t)   = base_temperature + h(t)
//! ```
//!
//! `S` is a sum of two slow sinusoids (amplitude `disturbance_amplitude`)
//! plus an AR(1) wander scaled by `noise_std`. Tap temperatures are `T`
//! plus independent noise. Planted informative channels either probe the
//! lagged heat state (negatively correlated with temperature) or observe the
//! disturbance up to half an hour before it reaches the hearth; every other
//! channel is an independent AR(1) process.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::frame::{parse_timestamp, SensorFrame, PCI_CHANNEL};
use crate::error::{Error, Result};
use crate::kv::{KvMap, KvWriter};

pub const DELAY_RANGE: (usize, usize) = (120, 180);
pub const DEFAULT_START: &str = "2023-01-01T00:00";
pub const NOMINAL_PCI: f64 = 0.5;
const MAX_PROBE_LAG: usize = 30;
const PROBE_NOISE: f64 = 4.0;
const MAX_SOURCE_LEAD: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct PlantConfig {
    /// Sensor channels besides PCI.
    pub n_channels: usize,
    /// Transport delay from PCI to temperature, minutes.
    pub pci_delay_minutes: usize,
    /// °C of heat per unit of normalized PCI.
    pub response_gain: f64,
    /// °C; scales tap measurement noise, sensor noise and disturbance wander.
    pub noise_std: f64,
    /// Indices (into the non-PCI channels) carrying plant signal.
    pub informative: Vec<usize>,
    pub seed: u64,
    pub base_temperature: f64,
    /// Minutes.
    pub time_constant: f64,
    /// °C.
    pub disturbance_amplitude: f64,
    /// Physical PCI range in ton/hr mapped to normalized `[0, 1]`.
    pub pci_min_tph: f64,
    pub pci_max_tph: f64,
    /// Hold-time range (minutes) of the random PCI excitation used by
    /// [`generate_plant`].
    pub hold_min: usize,
    pub hold_max: usize,
}

impl PlantConfig {
    /// Defaults with the delay and informative channels drawn from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        Self::with_layout(seed, 40, 5)
    }

    pub fn with_layout(seed: u64, n_channels: usize, n_informative: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let delay = rng.random_range(DELAY_RANGE.0..=DELAY_RANGE.1);
        let mut pool: Vec<usize> = (0..n_channels).collect();
        let mut informative = Vec::new();
        for _ in 0..n_informative.min(n_channels) {
            let k = rng.random_range(0..pool.len());
            informative.push(pool.swap_remove(k));
        }
        informative.sort_unstable();
        Self {
            n_channels,
            pci_delay_minutes: delay,
            response_gain: -50.0,
            noise_std: 1.0,
            informative,
            seed,
            base_temperature: 1535.0,
            time_constant: 20.0,
            disturbance_amplitude: 12.0,
            pci_min_tph: 20.0,
            pci_max_tph: 60.0,
            hold_min: 30,
            hold_max: 240,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(DELAY_RANGE.0..=DELAY_RANGE.1).contains(&self.pci_delay_minutes) {
            return bad(format!(
                "pci_delay_minutes {} outside [{}, {}]",
                self.pci_delay_minutes, DELAY_RANGE.0, DELAY_RANGE.1
            ));
        }
        if self.n_channels == 0 {
            return bad("n_channels must be positive".into());
        }
        let mut seen = vec![false; self.n_channels];
        for &i in &self.informative {
            if i >= self.n_channels || std::mem::replace(&mut seen[i], true) {
                return bad(format!("informative channel {i} invalid or repeated"));
            }
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std {} must be >= 0", self.noise_std));
        }
        if !(self.time_constant > 0.0) {
            return bad("time_constant must be positive".into());
        }
        if !(self.pci_min_tph < self.pci_max_tph) {
            return bad("pci_min_tph must be below pci_max_tph".into());
        }
        if self.hold_min == 0 || self.hold_min > self.hold_max {
            return bad("need 0 < hold_min <= hold_max".into());
        }
        if !self.response_gain.is_finite() || !self.base_temperature.is_finite() {
            return bad("gain and base temperature must be finite".into());
        }
        Ok(())
    }

    pub fn channel_names(&self) -> Vec<String> {
        let mut names = vec![PCI_CHANNEL.to_string()];
        names.extend((0..self.n_channels).map(|i| format!("s{i:03}")));
        names
    }

    pub fn informative_names(&self) -> Vec<String> {
        self.informative.iter().map(|i| format!("s{i:03}")).collect()
    }

    /// Normalized PCI to ton/hr.
    pub fn pci_to_tph(&self, u: f64) -> f64 {
        self.pci_min_tph + u * (self.pci_max_tph - self.pci_min_tph)
    }

    pub fn tph_to_pci(&self, tph: f64) -> f64 {
        (tph - self.pci_min_tph) / (self.pci_max_tph - self.pci_min_tph)
    }

    pub const KEYS: [&'static str; 15] = [
        "seed",
        "n_channels",
        "n_informative",
        "informative",
        "pci_delay_minutes",
        "response_gain",
        "noise_std",
        "base_temperature",
        "time_constant",
        "disturbance_amplitude",
        "pci_min_tph",
        "pci_max_tph",
        "hold_min",
        "hold_max",
        "start",
    ];

    /// Consumes plant keys from `kv`; `seed` fixes every unspecified draw.
    pub fn take_from(kv: &mut KvMap, default_seed: u64) -> Result<Self> {
        let seed = kv.take_or("seed", default_seed)?;
        let n_channels = kv.take_or("n_channels", 40usize)?;
        let n_inf = kv.take_or("n_informative", 5usize)?;
        let mut c = Self::with_layout(seed, n_channels, n_inf);
        if let Some(list) = kv.take_list("informative")? {
            c.informative = list;
        }
        c.pci_delay_minutes = kv.take_or("pci_delay_minutes", c.pci_delay_minutes)?;
        c.response_gain = kv.take_or("response_gain", c.response_gain)?;
        c.noise_std = kv.take_or("noise_std", c.noise_std)?;
        c.base_temperature = kv.take_or("base_temperature", c.base_temperature)?;
        c.time_constant = kv.take_or("time_constant", c.time_constant)?;
        c.disturbance_amplitude = kv.take_or("disturbance_amplitude", c.disturbance_amplitude)?;
        c.pci_min_tph = kv.take_or("pci_min_tph", c.pci_min_tph)?;
        c.pci_max_tph = kv.take_or("pci_max_tph", c.pci_max_tph)?;
        c.hold_min = kv.take_or("hold_min", c.hold_min)?;
        c.hold_max = kv.take_or("hold_max", c.hold_max)?;
        c.validate()?;
        Ok(c)
    }

    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let mut kv = KvMap::parse(text)?;
        let c = Self::take_from(&mut kv, default_seed)?;
        // `start` is only meaningful to generate_plant callers.
        let _: Option<String> = kv.take("start")?;
        kv.finish()?;
        Ok(c)
    }

    pub fn write_kv(&self, w: &mut KvWriter) {
        w.put("seed", self.seed)
            .put("n_channels", self.n_channels)
            .put_list("informative", &self.informative)
            .put("pci_delay_minutes", self.pci_delay_minutes)
            .put("response_gain", self.response_gain)
            .put("noise_std", self.noise_std)
            .put("base_temperature", self.base_temperature)
            .put("time_constant", self.time_constant)
            .put("disturbance_amplitude", self.disturbance_amplitude)
            .put("pci_min_tph", self.pci_min_tph)
            .put("pci_max_tph", self.pci_max_tph)
            .put("hold_min", self.hold_min)
            .put("hold_max", self.hold_max);
    }
}

#[derive(Clone, Debug)]
enum Sensor {
    /// `offset − scale · (T(t − lag) − base)` plus noise.
    HeatProbe { lag: usize, scale: f64, offset: f64 },
    /// `offset + scale · S(t)` plus noise.
    /// Sees the disturbance `lead` minutes before it reaches the hearth.
    SourceObserver { scale: f64, offset: f64, lead: usize },
    /// Independent AR(1): `x ← rho·x + sigma·ε`, reported as `offset + x`.
    Noise { rho: f64, sigma: f64, offset: f64, state: f64 },
}

/// One minute of plant output.
#[derive(Clone, Debug)]
pub struct PlantReading {
    pub minute: i64,
    pub pci_tph: f64,
    /// Non-PCI sensor channels, in [`PlantConfig::channel_names`] order
    /// after `pci`.
    pub sensors: Vec<f64>,
    pub taps: [f64; 4],
    pub latent_temperature: f64,
}

/// Minute-stepped plant state.
#[derive(Clone, Debug)]
pub struct Plant {
    cfg: PlantConfig,
    rng: ChaCha8Rng,
    minute: i64,
    heat: f64,
    decay: f64,
    delay_line: VecDeque<f64>,
    temp_history: VecDeque<f64>,
    source_history: VecDeque<f64>,
    wander: f64,
    periods: (f64, f64),
    phases: (f64, f64),
    sensors: Vec<Sensor>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

impl Plant {
    /// Builds the plant at `start_minute` in steady operation under nominal
    /// PCI (an internal burn-in fills the delay line).
    pub fn new(cfg: &PlantConfig, start_minute: i64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let periods = (rng.random_range(480.0..960.0), rng.random_range(180.0..360.0));
        let phases = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let mut sensors = Vec::with_capacity(cfg.n_channels);
        let mut k_inf = 0usize;
        for i in 0..cfg.n_channels {
            let offset = rng.random_range(-100.0..500.0);
            let s = if cfg.informative.contains(&i) {
                let scale = rng.random_range(0.5..3.0);
                k_inf += 1;
                if k_inf % 3 == 2 {
                    Sensor::SourceObserver {
                        scale,
                        offset,
                        lead: rng.random_range(0..=MAX_SOURCE_LEAD),
                    }
                } else {
                    Sensor::HeatProbe {
                        lag: rng.random_range(5..=MAX_PROBE_LAG),
                        scale,
                        offset,
                    }
                }
            } else {
                let rho: f64 = rng.random_range(0.9..0.999);
                let sigma = rng.random_range(0.1..5.0) * (1.0 - rho * rho).sqrt();
                Sensor::Noise {
                    rho,
                    sigma,
                    offset,
                    state: 0.0,
                }
            };
            sensors.push(s);
        }
        let decay = (-1.0 / cfg.time_constant).exp();
        let mut plant = Self {
            cfg: cfg.clone(),
            rng,
            minute: 0,
            heat: 0.0,
            decay,
            delay_line: VecDeque::with_capacity(cfg.pci_delay_minutes + 1),
            temp_history: VecDeque::with_capacity(MAX_PROBE_LAG + 1),
            source_history: VecDeque::with_capacity(cfg.pci_delay_minutes + 1),
            wander: 0.0,
            periods,
            phases,
            sensors,
        };
        let burn_in = cfg.pci_delay_minutes as i64 + (12.0 * cfg.time_constant) as i64 + 60;
        plant.minute = start_minute - burn_in;
        let s0 = plant.source(plant.minute);
        plant.heat = cfg.response_gain * NOMINAL_PCI + s0;
        for _ in 0..cfg.pci_delay_minutes {
            plant.delay_line.push_back(plant.heat);
            plant.source_history.push_back(s0);
        }
        for _ in 0..burn_in {
            plant.step(NOMINAL_PCI);
        }
        Ok(plant)
    }

    pub fn config(&self) -> &PlantConfig {
        &self.cfg
    }

    /// Minute of the next reading.
    pub fn minute(&self) -> i64 {
        self.minute
    }

    fn source(&self, minute: i64) -> f64 {
        let t = minute as f64;
        let a = self.cfg.disturbance_amplitude;
        a * ((TAU * t / self.periods.0 + self.phases.0).sin()
            + 0.5 * (TAU * t / self.periods.1 + self.phases.1).sin())
            + self.wander
    }

    pub fn latent_temperature(&self) -> f64 {
        self.cfg.base_temperature + self.heat
    }

    /// Applies normalized PCI `u` for one minute and returns the readings
    /// taken during that minute.
    pub fn step(&mut self, u: f64) -> PlantReading {
        let cfg = &self.cfg;
        let u_applied = u.clamp(0.0, 1.0);
        let temperature = cfg.base_temperature + self.heat;
        let source = self.source(self.minute);

        if self.temp_history.len() > MAX_PROBE_LAG {
            self.temp_history.pop_front();
        }
        self.temp_history.push_back(temperature);
        if self.source_history.len() > cfg.pci_delay_minutes {
            self.source_history.pop_front();
        }
        self.source_history.push_back(source);

        let noise = cfg.noise_std;
        let base = cfg.base_temperature;
        let mut sensors = Vec::with_capacity(self.sensors.len());
        for s in self.sensors.iter_mut() {
            let v = match s {
                Sensor::HeatProbe { lag, scale, offset } => {
                    let hist = &self.temp_history;
                    let idx = hist.len().saturating_sub(1 + *lag);
                    *offset - *scale * (hist[idx] - base) + PROBE_NOISE * noise * *scale * normal(&mut self.rng)
                }
                Sensor::SourceObserver { scale, offset, lead } => {
                    let hist = &self.source_history;
                    let back = cfg.pci_delay_minutes - *lead;
                    let seen = hist[hist.len().saturating_sub(1 + back)];
                    *offset + *scale * seen + PROBE_NOISE * noise * *scale * normal(&mut self.rng)
                }
                Sensor::Noise { rho, sigma, offset, state } => {
                    *state = *rho * *state + *sigma * normal(&mut self.rng);
                    *offset + *state
                }
            };
            sensors.push(v);
        }
        let taps = std::array::from_fn(|_| temperature + noise * normal(&mut self.rng));

        // Dynamics for the next minute.
        let q = cfg.response_gain * u_applied + source;
        self.delay_line.push_back(q);
        let delayed = self.delay_line.pop_front().unwrap_or(q);
        self.heat = self.decay * self.heat + (1.0 - self.decay) * delayed;
        self.wander = 0.998 * self.wander + 0.1 * noise * normal(&mut self.rng);

        let reading = PlantReading {
            minute: self.minute,
            pci_tph: cfg.pci_to_tph(u_applied),
            sensors,
            taps,
            latent_temperature: temperature,
        };
        self.minute += 1;
        reading
    }
}

/// Accumulates plant readings into a [`SensorFrame`].
#[derive(Clone, Debug)]
pub struct FrameRecorder {
    frame: SensorFrame,
}

impl FrameRecorder {
    pub fn new(cfg: &PlantConfig) -> Self {
        let names = cfg.channel_names();
        Self {
            frame: SensorFrame {
                timestamps: Vec::new(),
                channels: vec![Vec::new(); names.len()],
                channel_names: names,
                tap_temps: Default::default(),
            },
        }
    }

    pub fn push(&mut self, r: &PlantReading) {
        let f = &mut self.frame;
        f.timestamps.push(r.minute);
        f.channels[0].push(r.pci_tph);
        for (c, v) in f.channels[1..].iter_mut().zip(&r.sensors) {
            c.push(*v);
        }
        for (c, v) in f.tap_temps.iter_mut().zip(r.taps) {
            c.push(v);
        }
    }

    pub fn frame(&self) -> &SensorFrame {
        &self.frame
    }

    pub fn into_frame(self) -> SensorFrame {
        self.frame
    }
}

/// Random piecewise-constant PCI schedule in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Excitation {
    rng: ChaCha8Rng,
    level: f64,
    remaining: usize,
    hold: (usize, usize),
}

impl Excitation {
    pub fn new(cfg: &PlantConfig) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ 0x5eed),
            level: NOMINAL_PCI,
            remaining: 0,
            hold: (cfg.hold_min, cfg.hold_max),
        }
    }

    pub fn next_value(&mut self) -> f64 {
        if self.remaining == 0 {
            self.level = self.rng.random_range(0.0..=1.0);
            self.remaining = self.rng.random_range(self.hold.0..=self.hold.1);
        }
        self.remaining -= 1;
        self.level
    }
}

/// Runs the plant for `minutes` under random PCI excitation.
pub fn generate_plant(cfg: &PlantConfig, minutes: usize) -> Result<SensorFrame> {
    generate_plant_from(cfg, minutes, default_start())
}

pub fn default_start() -> i64 {
    parse_timestamp(DEFAULT_START).expect("valid constant")
}

pub fn generate_plant_from(cfg: &PlantConfig, minutes: usize, start_minute: i64) -> Result<SensorFrame> {
    cfg.validate()?;
    if minutes <= cfg.pci_delay_minutes {
        return Err(Error::Config(format!(
            "minutes ({minutes}) must exceed the PCI delay ({})",
            cfg.pci_delay_minutes
        )));
    }
    let mut plant = Plant::new(cfg, start_minute)?;
    let mut excitation = Excitation::new(cfg);
    let mut rec = FrameRecorder::new(cfg);
    for _ in 0..minutes {
        let u = excitation.next_value();
        rec.push(&plant.step(u));
    }
    Ok(rec.into_frame())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_determines_layout() {
        let a = PlantConfig::from_seed(3);
        let b = PlantConfig::from_seed(3);
        assert_eq!(a, b);
        assert!((120..=180).contains(&a.pci_delay_minutes));
        assert_eq!(a.informative.len(), 5);
        a.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        let mut c = PlantConfig::from_seed(1);
        c.pci_delay_minutes = 90;
        assert!(c.validate().is_err());
        let mut c = PlantConfig::from_seed(1);
        c.informative = vec![1, 1];
        assert!(c.validate().is_err());
        let c = PlantConfig::from_seed(1);
        assert!(generate_plant(&c, c.pci_delay_minutes).is_err());
    }

    #[test]
    fn same_seed_same_frame() {
        let c = PlantConfig::from_seed(11);
        assert_eq!(generate_plant(&c, 400).unwrap(), generate_plant(&c, 400).unwrap());
    }

    #[test]
    fn quiet_plant_under_constant_pci_settles() {
        let mut c = PlantConfig::from_seed(5);
        c.noise_std = 0.0;
        c.disturbance_amplitude = 0.0;
        let mut p = Plant::new(&c, 0).unwrap();
        let mut last = 0.0;
        for _ in 0..2000 {
            last = p.step(0.8).latent_temperature;
        }
        let next = p.step(0.8).latent_temperature;
        let expected = c.base_temperature + c.response_gain * 0.8;
        assert!((last - expected).abs() < 1e-9);
        assert!((next - last).abs() < 1e-12);
    }

    #[test]
    fn response_starts_after_delay() {
        let mut c = PlantConfig::from_seed(8);
        c.noise_std = 0.0;
        c.disturbance_amplitude = 0.0;
        c.pci_delay_minutes = 130;
        let mut p = Plant::new(&c, 0).unwrap();
        let t0 = p.latent_temperature();
        let mut temps = Vec::new();
        for _ in 0..300 {
            temps.push(p.step(1.0).latent_temperature);
        }
        // Readings at minutes 0..=130 still reflect the pre-step input.
        assert!(temps[..=130].iter().all(|&t| (t - t0).abs() < 1e-9));
        assert!((temps[131] - t0).abs() > 1e-3);
    }

    #[test]
    fn kv_roundtrip() {
        let c = PlantConfig::from_seed(21);
        let mut w = KvWriter::new();
        c.write_kv(&mut w);
        let back = PlantConfig::parse(&w.finish(), 0).unwrap();
        assert_eq!(back, c);
        assert!(PlantConfig::parse("bogus=1\n", 0).is_err());
    }
}
