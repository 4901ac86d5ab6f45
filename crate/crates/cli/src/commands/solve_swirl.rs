//! `solve-swirl`: one azimuthal mode, gated, with a record, an optional
//! radial profile, and an optional degeneracy probe of the zero-slip,
//! zero-wavenumber operator.

use serde::Serialize;

use pipeflow::harness::{gate_resolution, swirl_mode_norms, IDENTITY_TOL};
use pipeflow::swirl::{swirl_identity_residuals, NullspaceProbe};
use pipeflow::{
    beta_theta, build_radial_operators, classify, nullspace_probe, poiseuille_profile,
    resolution_for_beta, solve_swirl_mode, FlowParams, SwirlSweepRecord,
};

use crate::commands::{read_family, read_thresholds, ForcingBlock, ThresholdsBlock};
use crate::config::RawConfig;
use crate::output::{fmt_f64, out_path, write_csv, write_json};
use crate::{CmdError, CommonArgs};

#[derive(Debug, Serialize)]
struct Resolved {
    flow: FlowBlock,
    mode: ModeBlock,
    thresholds: ThresholdsBlock,
    gates: GatesBlock,
    probe: ProbeBlock,
    output: OutputBlock,
}

#[derive(Debug, Serialize)]
struct FlowBlock {
    phi: f64,
    alpha: f64,
}

#[derive(Debug, Serialize)]
struct ModeBlock {
    xi: f64,
    n_points: usize,
    #[serde(flatten)]
    forcing: ForcingBlock,
}

#[derive(Debug, Serialize)]
struct GatesBlock {
    identity_tol: f64,
    gate_tol: f64,
}

#[derive(Debug, Serialize)]
struct ProbeBlock {
    nullspace: bool,
}

#[derive(Debug, Serialize)]
struct OutputBlock {
    records: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    profiles: Option<String>,
}

#[derive(Debug, Serialize)]
struct Payload {
    record: SwirlSweepRecord,
    /// Smallest singular value and `r`-alignment of the unforced swirl
    /// operator at zero slip and zero wavenumber, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    nullspace_probe: Option<NullspaceProbe>,
}

pub fn run(cfg: &RawConfig, args: &CommonArgs) -> Result<(), CmdError> {
    let phi = cfg.require_f64("flow", "phi")?;
    let alpha = cfg.require_f64("flow", "alpha")?;
    let xi = cfg.require_f64("mode", "xi")?;
    let n_override = cfg.get_usize("mode", "n_points")?;
    let (family, forcing_block) = read_family(cfg, "mode", args.seed)?;
    let (thresholds, thresholds_block) = read_thresholds(cfg)?;
    let gates = GatesBlock {
        identity_tol: cfg
            .get_f64("gates", "identity_tol")?
            .unwrap_or(IDENTITY_TOL),
        gate_tol: cfg.get_f64("gates", "gate_tol")?.unwrap_or(1e-7),
    };
    let probe = ProbeBlock {
        nullspace: cfg.get_bool("probe", "nullspace")?.unwrap_or(false),
    };
    let records_name = cfg
        .get_str("output", "records")
        .unwrap_or_else(|| "solve-swirl.json".to_string());
    let profiles_name = cfg.get_str("output", "profiles");
    cfg.reject_unknown()?;

    let params = FlowParams::new(phi, alpha)?;
    let n = n_override.unwrap_or_else(|| resolution_for_beta(beta_theta(params, xi).0));
    let resolved = Resolved {
        flow: FlowBlock { phi, alpha },
        mode: ModeBlock {
            xi,
            n_points: n,
            forcing: forcing_block,
        },
        thresholds: thresholds_block,
        gates,
        probe,
        output: OutputBlock {
            records: records_name.clone(),
            profiles: profiles_name.clone(),
        },
    };

    let solve_at = |size: usize| -> Result<_, CmdError> {
        let ops = build_radial_operators(size)?;
        let profile = poiseuille_profile(params, &ops);
        let f_theta = family.swirl_component(&ops);
        let sol = solve_swirl_mode(xi, &f_theta, &profile, &ops, alpha)?;
        let gaps = swirl_identity_residuals(&sol, &f_theta, &profile, &ops);
        let fnorm = ops.norm_sq_r(&f_theta).sqrt();
        let norms = swirl_mode_norms(&sol, &ops);
        Ok((sol, norms, gaps, fnorm))
    };
    let (solution, norms, gaps, forcing_norm) = solve_at(n)?;
    let (_, fine_norms, ..) = solve_at(gate_resolution(n))?;
    let gate_defect = (fine_norms.h2() - norms.h2()).abs() / fine_norms.h2().max(f64::MIN_POSITIVE);
    if gate_defect > resolved.gates.gate_tol {
        return Err(CmdError::Numerical(format!(
            "unconverged at n = {n}: H2 norm moved by {gate_defect:.3e} under grid \
             refinement (gate {:.1e}); raise mode.n_points",
            resolved.gates.gate_tol
        )));
    }

    let record = SwirlSweepRecord {
        params,
        xi,
        n_points: n,
        regime: classify(params, xi, &thresholds),
        norms: solution.norm_report,
        mode_norms: norms,
        identity_gaps: gaps,
        forcing_norm,
        convergence_gate: true,
        gate_defect,
    };
    let probe_result = if resolved.probe.nullspace {
        let ops = build_radial_operators(n)?;
        let probe_params = FlowParams::new(phi, 0.0)?;
        let profile = poiseuille_profile(probe_params, &ops);
        Some(nullspace_probe(0.0, 0.0, &profile, &ops))
    } else {
        None
    };

    let payload = Payload {
        record,
        nullspace_probe: probe_result,
    };
    let records_path = out_path(&args.out, &records_name);
    write_json(&records_path, &resolved, "result", &payload)?;
    println!("wrote {}", records_path.display());

    if let Some(name) = &profiles_name {
        let ops = build_radial_operators(n)?;
        let header = ["r", "re_v_theta", "im_v_theta"];
        let rows: Vec<Vec<String>> = (0..ops.n_points)
            .map(|i| {
                vec![
                    fmt_f64(ops.nodes[i]),
                    fmt_f64(solution.v_theta_hat[i].re),
                    fmt_f64(solution.v_theta_hat[i].im),
                ]
            })
            .collect();
        let path = out_path(&args.out, name);
        write_csv(&path, &resolved, &header, &rows)?;
        println!("wrote {}", path.display());
    }

    if gaps.0.max(gaps.1) > resolved.gates.identity_tol {
        return Err(CmdError::Gate(format!(
            "energy-identity defect {:.3e} exceeds {:.1e} (record written anyway)",
            gaps.0.max(gaps.1),
            resolved.gates.identity_tol
        )));
    }
    Ok(())
}
