//! One module per subcommand, plus shared config-block readers.

pub mod inequalities;
pub mod regimes;
pub mod solve_linear;
pub mod solve_nonlinear;
pub mod solve_swirl;
pub mod sweep;

use serde::Serialize;

use pipeflow::{ForcingFamily, RegimeThresholds};

use crate::config::RawConfig;
use crate::CmdError;

/// Resolved `[thresholds]` block.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdsBlock {
    pub eps1: f64,
    pub delta: f64,
}

/// Reads the optional `[thresholds]` section, validating ranges.
pub fn read_thresholds(cfg: &RawConfig) -> Result<(RegimeThresholds, ThresholdsBlock), CmdError> {
    let defaults = RegimeThresholds::default();
    let eps1 = cfg.get_f64("thresholds", "eps1")?.unwrap_or(defaults.eps1);
    let delta = cfg
        .get_f64("thresholds", "delta")?
        .unwrap_or(defaults.delta);
    let t = RegimeThresholds::new(eps1, delta)?;
    Ok((t, ThresholdsBlock { eps1, delta }))
}

/// Resolved forcing-family choice.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForcingBlock {
    pub forcing: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Reads `forcing`/`seed` keys from `section`; `cli_seed` (the `--seed`
/// flag) overrides the configured seed. Seeds are only meaningful for the
/// random family, so supplying one with the deterministic family is
/// rejected rather than silently ignored.
pub fn read_family(
    cfg: &RawConfig,
    section: &str,
    cli_seed: Option<u64>,
) -> Result<(ForcingFamily, ForcingBlock), CmdError> {
    let name = cfg
        .get_str(section, "forcing")
        .unwrap_or_else(|| "default-smooth".to_string());
    let seed = match cli_seed {
        Some(s) => Some(s),
        None => cfg.get_u64(section, "seed")?,
    };
    match name.as_str() {
        "default-smooth" => {
            if seed.is_some() {
                return Err(CmdError::Config(format!(
                    "{section}: a seed was supplied but forcing = default-smooth uses none; \
                     use forcing = random-smooth or drop the seed"
                )));
            }
            Ok((
                ForcingFamily::DefaultSmooth,
                ForcingBlock {
                    forcing: "default-smooth",
                    seed: None,
                },
            ))
        }
        "random-smooth" => {
            let seed = seed.ok_or_else(|| {
                CmdError::Config(format!(
                    "{section}: forcing = random-smooth needs a seed (key or --seed)"
                ))
            })?;
            Ok((
                ForcingFamily::RandomSmooth { seed },
                ForcingBlock {
                    forcing: "random-smooth",
                    seed: Some(seed),
                },
            ))
        }
        other => Err(CmdError::Config(format!(
            "{section}.forcing: unknown family {other:?} \
             (expected default-smooth or random-smooth)"
        ))),
    }
}
