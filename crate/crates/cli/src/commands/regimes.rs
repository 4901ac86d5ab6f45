//! `regimes`: tabulates the parameter-regime label and oscillation
//! parameters over a Cartesian grid.

use serde::Serialize;

use pipeflow::{beta_theta, classify, FlowParams};

use crate::commands::{read_thresholds, ThresholdsBlock};
use crate::config::RawConfig;
use crate::output::{fmt_f64, out_path, write_csv};
use crate::{CmdError, CommonArgs};

#[derive(Debug, Serialize)]
struct Resolved {
    regimes: Block,
    thresholds: ThresholdsBlock,
    output: OutputBlock,
}

#[derive(Debug, Serialize)]
struct Block {
    phi: Vec<f64>,
    xi: Vec<f64>,
    alpha: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct OutputBlock {
    table: String,
}

pub fn run(cfg: &RawConfig, args: &CommonArgs) -> Result<(), CmdError> {
    let phis = cfg.require_f64_list("regimes", "phi")?;
    let xis = cfg.require_f64_list("regimes", "xi")?;
    let alphas = cfg.require_f64_list("regimes", "alpha")?;
    let (thresholds, thresholds_block) = read_thresholds(cfg)?;
    let table_name = cfg
        .get_str("output", "table")
        .unwrap_or_else(|| "regimes.csv".to_string());
    cfg.reject_unknown()?;
    if args.seed.is_some() {
        return Err(CmdError::Config(
            "regime tabulation uses no random source; drop --seed".into(),
        ));
    }

    let resolved = Resolved {
        regimes: Block {
            phi: phis.clone(),
            xi: xis.clone(),
            alpha: alphas.clone(),
        },
        thresholds: thresholds_block,
        output: OutputBlock {
            table: table_name.clone(),
        },
    };

    let header = ["phi", "xi", "alpha", "beta", "theta", "label"];
    let mut rows = Vec::new();
    for &phi in &phis {
        for &xi in &xis {
            for &alpha in &alphas {
                let params = FlowParams::new(phi, alpha)?;
                let (beta, theta) = beta_theta(params, xi);
                let label = classify(params, xi, &thresholds);
                rows.push(vec![
                    fmt_f64(phi),
                    fmt_f64(xi),
                    fmt_f64(alpha),
                    fmt_f64(beta),
                    fmt_f64(theta),
                    label.to_string(),
                ]);
            }
        }
    }
    let path = out_path(&args.out, &table_name);
    write_csv(&path, &resolved, &header, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
