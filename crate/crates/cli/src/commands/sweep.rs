//! `sweep`: Cartesian parameter sweep of either per-mode solver, followed
//! by power-law fits and empirical bound constants over the accepted
//! records.

use serde::Serialize;

use pipeflow::{
    bound_report, fit_scaling, run_linear_sweep, run_swirl_sweep, BoundReport, SlopeFit,
    SweepOptions, SweepRecord, SwirlSweepRecord,
};

use crate::commands::{read_family, read_thresholds, ForcingBlock, ThresholdsBlock};
use crate::config::RawConfig;
use crate::output::{out_path, write_json};
use crate::{CmdError, CommonArgs};

#[derive(Debug, Serialize)]
struct Resolved {
    sweep: SweepBlock,
    thresholds: ThresholdsBlock,
    gates: GatesBlock,
    fit: FitBlock,
    bounds: Vec<BoundSpec>,
    output: OutputBlock,
}

#[derive(Debug, Serialize)]
struct SweepBlock {
    system: &'static str,
    phi: Vec<f64>,
    xi: Vec<f64>,
    alpha: Vec<f64>,
    #[serde(flatten)]
    forcing: ForcingBlock,
}

#[derive(Debug, Serialize)]
struct GatesBlock {
    gate_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_points: Option<usize>,
}

#[derive(Debug, Serialize)]
struct FitBlock {
    quantities: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
struct BoundSpec {
    quantity: String,
    exponent: f64,
}

#[derive(Debug, Serialize)]
struct OutputBlock {
    records: String,
    fits: String,
}

/// One power-law fit of a recorded quantity against the flux.
#[derive(Debug, Serialize)]
struct FitRow {
    quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<SlopeFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// One empirical uniform-constant report.
#[derive(Debug, Serialize)]
struct BoundRow {
    quantity: String,
    exponent: f64,
    report: BoundReport,
}

#[derive(Debug, Serialize)]
struct FitsPayload {
    accepted: usize,
    rejected: usize,
    fits: Vec<FitRow>,
    bounds: Vec<BoundRow>,
}

fn stream_quantity(name: &str) -> Option<fn(&SweepRecord) -> f64> {
    Some(match name {
        "l2" => |r: &SweepRecord| r.mode_norms.l2(),
        "h1" => |r: &SweepRecord| r.mode_norms.h1(),
        "h2" => |r: &SweepRecord| r.mode_norms.h2(),
        "h54" => |r: &SweepRecord| r.mode_norms.h54(),
        "h14" => |r: &SweepRecord| r.mode_norms.h14(),
        "v-r-l2" => |r: &SweepRecord| r.mode_norms.v_r_l2(),
        "dz-vz-l2" => |r: &SweepRecord| r.mode_norms.dz_vz_l2(),
        _ => return None,
    })
}

fn swirl_quantity(name: &str) -> Option<fn(&SwirlSweepRecord) -> f64> {
    Some(match name {
        "l2" => |r: &SwirlSweepRecord| r.mode_norms.l2(),
        "h1" => |r: &SwirlSweepRecord| r.mode_norms.h1(),
        "h2" => |r: &SwirlSweepRecord| r.mode_norms.h2(),
        "h54" => |r: &SwirlSweepRecord| r.mode_norms.h54(),
        "dz-l2" => |r: &SwirlSweepRecord| r.mode_norms.dz_l2(),
        _ => return None,
    })
}

fn quantity_error(system: &str, name: &str) -> CmdError {
    let valid = match system {
        "stream" => "l2, h1, h2, h54, h14, v-r-l2, dz-vz-l2",
        _ => "l2, h1, h2, h54, dz-l2",
    };
    CmdError::Config(format!(
        "unknown {system} sweep quantity {name:?} (expected one of: {valid})"
    ))
}

/// Builds fit rows from `(Φ, quantity)` pairs of the accepted records.
fn fit_rows<R: pipeflow::harness::SweepPoint>(
    records: &[R],
    quantities: &[String],
    lookup: impl Fn(&str) -> Option<fn(&R) -> f64>,
    system: &str,
) -> Result<Vec<FitRow>, CmdError> {
    let mut rows = Vec::new();
    for name in quantities {
        let q = lookup(name).ok_or_else(|| quantity_error(system, name))?;
        let points: Vec<(f64, f64)> = records.iter().map(|r| (r.phi(), q(r))).collect();
        match fit_scaling(&points) {
            Ok(fit) => rows.push(FitRow {
                quantity: name.clone(),
                fit: Some(fit),
                error: None,
            }),
            Err(e) => rows.push(FitRow {
                quantity: name.clone(),
                fit: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(rows)
}

pub fn run(cfg: &RawConfig, args: &CommonArgs) -> Result<(), CmdError> {
    let system = cfg
        .get_str("sweep", "system")
        .unwrap_or_else(|| "stream".to_string());
    let phis = cfg.require_f64_list("sweep", "phi")?;
    let xis = cfg.require_f64_list("sweep", "xi")?;
    let alphas = cfg.require_f64_list("sweep", "alpha")?;
    let (family, forcing_block) = read_family(cfg, "sweep", args.seed)?;
    let (thresholds, thresholds_block) = read_thresholds(cfg)?;
    let gate_tol = cfg.get_f64("gates", "gate_tol")?.unwrap_or(1e-7);
    let n_points = cfg.get_usize("gates", "n_points")?;
    let options = SweepOptions {
        resolution_override: n_points,
        gate_tol,
    };

    let system: &'static str = match system.as_str() {
        "stream" => "stream",
        "swirl" => "swirl",
        other => {
            return Err(CmdError::Config(format!(
                "sweep.system must be stream or swirl, got {other:?}"
            )))
        }
    };
    let default_fit = if system == "stream" {
        "v-r-l2"
    } else {
        "dz-l2"
    };
    let quantities: Vec<String> = match cfg.get_str("fit", "quantities") {
        Some(raw) => raw.split(',').map(|s| s.trim().to_string()).collect(),
        None => vec![default_fit.to_string()],
    };
    let bounds: Vec<BoundSpec> = cfg
        .section_items("bounds")
        .into_iter()
        .map(|(quantity, raw)| {
            raw.trim()
                .parse::<f64>()
                .map(|exponent| BoundSpec { quantity, exponent })
                .map_err(|e| CmdError::Config(format!("bounds exponent: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let records_name = cfg
        .get_str("output", "records")
        .unwrap_or_else(|| "sweep-records.json".to_string());
    let fits_name = cfg
        .get_str("output", "fits")
        .unwrap_or_else(|| "sweep-fits.json".to_string());
    cfg.reject_unknown()?;

    let resolved = Resolved {
        sweep: SweepBlock {
            system,
            phi: phis.clone(),
            xi: xis.clone(),
            alpha: alphas.clone(),
            forcing: forcing_block,
        },
        thresholds: thresholds_block,
        gates: GatesBlock { gate_tol, n_points },
        fit: FitBlock {
            quantities: quantities.clone(),
        },
        bounds: bounds.clone(),
        output: OutputBlock {
            records: records_name.clone(),
            fits: fits_name.clone(),
        },
    };

    // Validate quantity names before the (possibly long) sweep runs.
    for name in &quantities {
        let known = match system {
            "stream" => stream_quantity(name).is_some(),
            _ => swirl_quantity(name).is_some(),
        };
        if !known {
            return Err(quantity_error(system, name));
        }
    }
    for spec in &bounds {
        let known = match system {
            "stream" => stream_quantity(&spec.quantity).is_some(),
            _ => swirl_quantity(&spec.quantity).is_some(),
        };
        if !known {
            return Err(quantity_error(system, &spec.quantity));
        }
    }

    let records_path = out_path(&args.out, &records_name);
    let fits_path = out_path(&args.out, &fits_name);
    let (accepted, rejected, fits, bound_rows) = match system {
        "stream" => {
            let outcome = run_linear_sweep(&phis, &xis, &alphas, &family, &thresholds, &options);
            write_json(&records_path, &resolved, "outcome", &outcome)?;
            let fits = fit_rows(&outcome.records, &quantities, stream_quantity, system)?;
            let bound_rows = bounds
                .iter()
                .map(|spec| BoundRow {
                    quantity: spec.quantity.clone(),
                    exponent: spec.exponent,
                    report: bound_report(
                        &outcome.records,
                        stream_quantity(&spec.quantity).unwrap(),
                        spec.exponent,
                    ),
                })
                .collect();
            (
                outcome.records.len(),
                outcome.rejected.len(),
                fits,
                bound_rows,
            )
        }
        _ => {
            let outcome = run_swirl_sweep(&phis, &xis, &alphas, &family, &thresholds, &options);
            write_json(&records_path, &resolved, "outcome", &outcome)?;
            let fits = fit_rows(&outcome.records, &quantities, swirl_quantity, system)?;
            let bound_rows = bounds
                .iter()
                .map(|spec| BoundRow {
                    quantity: spec.quantity.clone(),
                    exponent: spec.exponent,
                    report: bound_report(
                        &outcome.records,
                        swirl_quantity(&spec.quantity).unwrap(),
                        spec.exponent,
                    ),
                })
                .collect();
            (
                outcome.records.len(),
                outcome.rejected.len(),
                fits,
                bound_rows,
            )
        }
    };

    let payload = FitsPayload {
        accepted,
        rejected,
        fits,
        bounds: bound_rows,
    };
    write_json(&fits_path, &resolved, "fits", &payload)?;
    println!("wrote {}", records_path.display());
    println!("wrote {}", fits_path.display());
    println!("accepted {accepted} records, rejected {rejected}");
    Ok(())
}
