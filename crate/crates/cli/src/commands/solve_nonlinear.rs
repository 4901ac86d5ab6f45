//! `solve-nonlinear`: fixed-point iteration for the steady coupled system
//! on a periodic pipe, driven by a single-mode forcing of configurable
//! amplitude.

use nalgebra::DVector;
use serde::Serialize;

use pipeflow::nonlinear::ForcingModes;
use pipeflow::{
    build_radial_operators, picard_iterate, FlowParams, PicardConfig, Termination, C64,
};

use crate::commands::{read_family, ForcingBlock};
use crate::config::RawConfig;
use crate::output::{fmt_f64, out_path, write_csv, write_json};
use crate::{CmdError, CommonArgs};

#[derive(Debug, Serialize)]
struct Resolved {
    flow: FlowBlock,
    domain: DomainBlock,
    forcing: ForcingConfigBlock,
    picard: PicardBlock,
    output: OutputBlock,
}

#[derive(Debug, Serialize)]
struct FlowBlock {
    phi: f64,
    alpha: f64,
}

#[derive(Debug, Serialize)]
struct DomainBlock {
    period_length: f64,
    max_mode: usize,
}

#[derive(Debug, Serialize)]
struct ForcingConfigBlock {
    #[serde(flatten)]
    family: ForcingBlock,
    amplitude: f64,
    mode: usize,
    components: &'static str,
}

#[derive(Debug, Serialize)]
struct PicardBlock {
    max_iters: usize,
    tol: f64,
    n_points: usize,
}

#[derive(Debug, Serialize)]
struct OutputBlock {
    trace: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

#[derive(Debug, Serialize)]
struct FinalSummary {
    termination: Termination,
    iterations: usize,
    field_norm: f64,
    h54_norm: f64,
    divergence_defect: f64,
    mean_flux: f64,
    residual_norm: f64,
}

fn build_forcing(
    resolved: &Resolved,
    family: &pipeflow::ForcingFamily,
    ops: &pipeflow::RadialOperators,
) -> Result<ForcingModes, CmdError> {
    let n = ops.n_points;
    let period = resolved.domain.period_length;
    let max_mode = resolved.domain.max_mode;
    if resolved.forcing.amplitude == 0.0 {
        return Ok(ForcingModes::zero(period, max_mode, n));
    }
    let (f_r, f_z) = family.stream_pair(ops);
    let f_theta = if resolved.forcing.components == "full" {
        family.swirl_component(ops)
    } else {
        DVector::from_element(n, C64::new(0.0, 0.0))
    };
    let base =
        ForcingModes::single_mode(period, max_mode, resolved.forcing.mode, f_r, f_theta, f_z)?;
    let norm = base.norm(ops);
    Ok(base.scaled(resolved.forcing.amplitude / norm))
}

pub fn run(cfg: &RawConfig, args: &CommonArgs) -> Result<(), CmdError> {
    let phi = cfg.require_f64("flow", "phi")?;
    let alpha = cfg.require_f64("flow", "alpha")?;
    let period_length = cfg
        .get_f64("domain", "period_length")?
        .unwrap_or(2.0 * std::f64::consts::PI);
    let max_mode = cfg.get_usize("domain", "max_mode")?.unwrap_or(8);
    let (family, family_block) = read_family(cfg, "forcing", args.seed)?;
    let amplitude = cfg.get_f64("forcing", "amplitude")?.unwrap_or(1e-3);
    let mode = cfg.get_usize("forcing", "mode")?.unwrap_or(1);
    let components: &'static str = match cfg
        .get_str("forcing", "components")
        .as_deref()
        .unwrap_or("meridional")
    {
        "meridional" => "meridional",
        "full" => "full",
        other => {
            return Err(CmdError::Config(format!(
                "forcing.components must be meridional or full, got {other:?}"
            )))
        }
    };
    let defaults = PicardConfig::default();
    let picard = PicardConfig {
        max_iters: cfg
            .get_usize("picard", "max_iters")?
            .unwrap_or(defaults.max_iters),
        tol: cfg.get_f64("picard", "tol")?.unwrap_or(defaults.tol),
        n_points: cfg
            .get_usize("picard", "n_points")?
            .unwrap_or(defaults.n_points),
    };
    let trace_name = cfg
        .get_str("output", "trace")
        .unwrap_or_else(|| "nonlinear-trace.json".to_string());
    let field_name = cfg.get_str("output", "field");
    cfg.reject_unknown()?;

    // Negated comparisons rather than `<=`/`<`: NaN values must fail too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(period_length > 0.0) || !period_length.is_finite() {
        return Err(CmdError::Config(format!(
            "domain.period_length must be positive and finite, got {period_length}"
        )));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(CmdError::Config(format!(
            "forcing.amplitude must be nonnegative and finite, got {amplitude}"
        )));
    }

    let resolved = Resolved {
        flow: FlowBlock { phi, alpha },
        domain: DomainBlock {
            period_length,
            max_mode,
        },
        forcing: ForcingConfigBlock {
            family: family_block,
            amplitude,
            mode,
            components,
        },
        picard: PicardBlock {
            max_iters: picard.max_iters,
            tol: picard.tol,
            n_points: picard.n_points,
        },
        output: OutputBlock {
            trace: trace_name.clone(),
            field: field_name.clone(),
        },
    };

    let params = FlowParams::new(phi, alpha)?;
    let ops = build_radial_operators(picard.n_points)?;
    let forcing = build_forcing(&resolved, &family, &ops)?;
    let (field, trace) = picard_iterate(&forcing, params, &picard)?;

    let last = trace.entries.last().expect("trace is never empty");
    let summary = FinalSummary {
        termination: trace.termination,
        iterations: trace.entries.len(),
        field_norm: field.norm(&ops),
        h54_norm: field.h54_norm(&ops),
        divergence_defect: field.divergence_defect(&ops),
        mean_flux: field.mean_flux(&ops),
        residual_norm: last.residual_norm,
    };
    let payload = serde_json::json!({ "trace": trace, "final": summary });
    let trace_path = out_path(&args.out, &trace_name);
    write_json(&trace_path, &resolved, "result", &payload)?;
    println!("wrote {}", trace_path.display());

    if let Some(name) = &field_name {
        let header = [
            "mode",
            "xi",
            "r",
            "re_psi",
            "im_psi",
            "re_v_r",
            "im_v_r",
            "re_v_theta",
            "im_v_theta",
            "re_v_z",
            "im_v_z",
        ];
        let mut rows = Vec::new();
        for (k, m) in field.modes.iter().enumerate() {
            let xi = field.xi(k);
            for i in 0..ops.n_points {
                rows.push(vec![
                    k.to_string(),
                    fmt_f64(xi),
                    fmt_f64(ops.nodes[i]),
                    fmt_f64(m.psi_hat[i].re),
                    fmt_f64(m.psi_hat[i].im),
                    fmt_f64(m.v_r_hat[i].re),
                    fmt_f64(m.v_r_hat[i].im),
                    fmt_f64(m.v_theta_hat[i].re),
                    fmt_f64(m.v_theta_hat[i].im),
                    fmt_f64(m.v_z_hat[i].re),
                    fmt_f64(m.v_z_hat[i].im),
                ]);
            }
        }
        let path = out_path(&args.out, name);
        write_csv(&path, &resolved, &header, &rows)?;
        println!("wrote {}", path.display());
    }

    match trace.termination {
        Termination::Converged => Ok(()),
        Termination::MaxIters => Err(CmdError::Numerical(format!(
            "no convergence within {} iterations (last relative increment {:.3e}; \
             trace written anyway)",
            picard.max_iters, last.increment_norm
        ))),
        Termination::Diverged => Err(CmdError::Numerical(
            "iteration diverged: increments grew over five consecutive steps \
             (trace written anyway)"
                .into(),
        )),
    }
}
