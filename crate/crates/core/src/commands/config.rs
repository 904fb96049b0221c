use std::path::Path;

use crate::dataio::{default_start, format_timestamp, parse_timestamp, PlantConfig};
use crate::error::{Error, Result};
use crate::featsel::{FeatselConfig, GbConfig};
use crate::fsutil::read_to_string;
use crate::kv::{KvMap, KvWriter};
use crate::models::ModelKind;
use crate::pci_opt::{ClosedLoopConfig, OptimConfig};
use crate::preprocess::{ImputePolicy, PreprocessConfig};
use crate::trainer::TrainConfig;

pub const SEED_ENV: &str = "FURNACE_SEED";

/// Seed from `FURNACE_SEED`, else 0.
pub fn env_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

/// Every tunable of a run. The single `seed` drives the plant layout and
/// every other random draw.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub plant: PlantConfig,
    /// Minute of the first generated reading.
    pub start: i64,
    pub minutes: usize,
    pub preprocess: PreprocessConfig,
    pub featsel: FeatselConfig,
    pub hidden_mt: usize,
    pub hidden_mall: usize,
    pub train: TrainConfig,
    pub optim: OptimConfig,
    pub closed_loop: ClosedLoopConfig,
    pub loop_minutes: usize,
    /// Models trained by the pipeline command.
    pub models: Vec<ModelKind>,
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self::parse("", seed).expect("defaults are valid")
    }

    pub fn seed(&self) -> u64 {
        self.plant.seed
    }

    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let mut kv = KvMap::parse(text)?;
        let plant = PlantConfig::take_from(&mut kv, default_seed)?;
        let seed = plant.seed;
        let start = match kv.take::<String>("start")? {
            Some(s) => parse_timestamp(&s).ok_or_else(|| Error::Config(format!("bad start {s:?}")))?,
            None => default_start(),
        };
        let minutes = kv.take_or("minutes", 20 * 1440usize)?;

        let pd = PreprocessConfig::default();
        let preprocess = PreprocessConfig {
            l_window: kv.take_or("l_window", pd.l_window)?,
            impute: ImputePolicy {
                ffill_limit: kv.take_or("ffill_limit", pd.impute.ffill_limit)?,
                max_gap: kv.take_or("max_gap", pd.impute.max_gap)?,
            },
            iqr_multiplier: kv.take_or("iqr_multiplier", pd.iqr_multiplier)?,
            iqr_opt_out: kv.take_list("iqr_opt_out")?.unwrap_or_default(),
            train_fraction: kv.take_or("train_fraction", pd.train_fraction)?,
        };

        let fd = FeatselConfig::default();
        let featsel = FeatselConfig {
            gb: GbConfig {
                rounds: kv.take_or("gb_rounds", fd.gb.rounds)?,
                max_depth: kv.take_or("gb_max_depth", fd.gb.max_depth)?,
                shrinkage: kv.take_or("gb_shrinkage", fd.gb.shrinkage)?,
            },
            n_t: kv.take_or("n_t", fd.n_t)?,
            n_pci: kv.take_or("n_pci", fd.n_pci)?,
            total: kv.take_or("n_selected", fd.total)?,
        };

        let hidden_mt = kv.take_or("hidden_mt", ModelKind::MtClassical.default_hidden())?;
        let hidden_mall = kv.take_or("hidden_mall", ModelKind::MAll.default_hidden())?;

        let td = TrainConfig::default();
        let train = TrainConfig {
            epochs: kv.take_or("epochs", td.epochs)?,
            batch_size: kv.take_or("batch_size", td.batch_size)?,
            lr: kv.take_or("lr", td.lr)?,
            seed,
            split_ratio: kv.take_or("split_ratio", td.split_ratio)?,
            val_fraction: kv.take_or("val_fraction", td.val_fraction)?,
            patience: kv.take_or("patience", td.patience)?,
        };

        let od = OptimConfig::default();
        let optim = OptimConfig {
            iterations: kv.take_or("optim_iterations", od.iterations)?,
            lr: kv.take_or("optim_lr", od.lr)?,
            lambda: kv.take_or("lambda", od.lambda)?,
            target_c: kv.take_or("target_c", od.target_c)?,
            divergence: kv.take_or("divergence", od.divergence)?,
            seed,
            init_bias: kv.take_or("moptim_bias", od.init_bias)?,
        };

        let cd = ClosedLoopConfig::default();
        let closed_loop = ClosedLoopConfig {
            steps: cd.steps,
            replan_interval: kv.take_or("replan_interval", cd.replan_interval)?,
            band: kv.take_or("band", cd.band)?,
            warm_start: kv.take_or("warm_start", cd.warm_start)?,
            bias_window: kv.take_or("bias_window", cd.bias_window)?,
            optim: OptimConfig {
                iterations: kv.take_or("loop_iterations", cd.optim.iterations)?,
                ..optim.clone()
            },
        };
        let loop_minutes = kv.take_or("loop_minutes", 2 * 1440usize)?;

        let models = kv
            .take_list("models")?
            .unwrap_or_else(|| vec![ModelKind::MtClassical, ModelKind::MtHybrid, ModelKind::MAll]);
        kv.finish()?;

        let cfg = Self {
            plant,
            start,
            minutes,
            preprocess,
            featsel,
            hidden_mt,
            hidden_mall,
            train,
            optim,
            closed_loop,
            loop_minutes,
            models,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, default_seed: u64) -> Result<Self> {
        Self::parse(&read_to_string(path)?, default_seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.preprocess.validate()?;
        self.train.validate()?;
        self.optim.validate()?;
        self.closed_loop.validate()?;
        if self.hidden_mt == 0 || self.hidden_mall == 0 {
            return Err(Error::Config("hidden sizes must be positive".into()));
        }
        if self.featsel.total < self.featsel.n_t.max(self.featsel.n_pci) {
            return Err(Error::Config("n_selected must be at least max(n_t, n_pci)".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("models list is empty".into()));
        }
        Ok(())
    }

    pub fn hidden(&self, kind: ModelKind) -> usize {
        match kind {
            ModelKind::MAll => self.hidden_mall,
            _ => self.hidden_mt,
        }
    }

    /// Closed-loop settings with the step count for `minutes`.
    pub fn loop_config(&self, minutes: usize, l_window: usize) -> Result<ClosedLoopConfig> {
        let steps = minutes / l_window;
        if steps == 0 {
            return Err(Error::Config(format!(
                "closed loop of {minutes} min is shorter than one {l_window}-min step"
            )));
        }
        Ok(ClosedLoopConfig {
            steps,
            ..self.closed_loop.clone()
        })
    }

    /// Fully resolved config; parses back to an equal value.
    pub fn to_text(&self) -> String {
        let mut w = KvWriter::new();
        self.plant.write_kv(&mut w);
        let p = &self.preprocess;
        let f = &self.featsel;
        let t = &self.train;
        let o = &self.optim;
        let c = &self.closed_loop;
        let models: Vec<&str> = self.models.iter().map(|m| m.as_str()).collect();
        w.put("start", format_timestamp(self.start))
            .put("minutes", self.minutes)
            .put("l_window", p.l_window)
            .put("ffill_limit", p.impute.ffill_limit)
            .put("max_gap", p.impute.max_gap)
            .put("iqr_multiplier", p.iqr_multiplier)
            .put_list("iqr_opt_out", &p.iqr_opt_out)
            .put("train_fraction", p.train_fraction)
            .put("gb_rounds", f.gb.rounds)
            .put("gb_max_depth", f.gb.max_depth)
            .put("gb_shrinkage", f.gb.shrinkage)
            .put("n_t", f.n_t)
            .put("n_pci", f.n_pci)
            .put("n_selected", f.total)
            .put("hidden_mt", self.hidden_mt)
            .put("hidden_mall", self.hidden_mall)
            .put("epochs", t.epochs)
            .put("batch_size", t.batch_size)
            .put("lr", t.lr)
            .put("split_ratio", t.split_ratio)
            .put("val_fraction", t.val_fraction)
            .put("patience", t.patience)
            .put("optim_iterations", o.iterations)
            .put("optim_lr", o.lr)
            .put("lambda", o.lambda)
            .put("target_c", o.target_c)
            .put("divergence", o.divergence)
            .put("moptim_bias", o.init_bias)
            .put("replan_interval", c.replan_interval)
            .put("band", c.band)
            .put("warm_start", c.warm_start)
            .put("bias_window", c.bias_window)
            .put("loop_iterations", c.optim.iterations)
            .put("loop_minutes", self.loop_minutes)
            .put_list("models", &models);
        w.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_unknown_keys() {
        let cfg = RunConfig::parse("seed=7\nl_window=30\nepochs=3\nmodels=mall\n", 0).unwrap();
        assert_eq!(cfg.seed(), 7);
        assert_eq!(cfg.train.seed, 7);
        assert_eq!(cfg.preprocess.l_window, 30);
        assert_eq!(cfg.models, vec![ModelKind::MAll]);
        let again = RunConfig::parse(&cfg.to_text(), 99).unwrap();
        assert_eq!(again, cfg);
        let err = RunConfig::parse("epochs=3\nepoch=4\n", 0).unwrap_err();
        assert!(err.to_string().contains("epoch"));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::parse("l_window=0\n", 0).is_err());
        assert!(RunConfig::parse("replan_interval=9\n", 0).is_err());
        assert!(RunConfig::parse("models=lstm\n", 0).is_err());
    }
}
