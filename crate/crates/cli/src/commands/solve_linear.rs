//! `solve-linear`: one meridional mode, gated, with a record and optional
//! radial profiles.

use serde::Serialize;

use pipeflow::harness::{gate_resolution, mode_norms, IDENTITY_TOL};
use pipeflow::stream::energy_identity_residuals;
use pipeflow::{
    beta_theta, build_radial_operators, classify, poiseuille_profile, resolution_for_beta,
    solve_mode, FlowParams, ForcingFamily, ModeForcing, RegimeThresholds, SweepRecord,
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
struct OutputBlock {
    records: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    profiles: Option<String>,
}

struct GatedSolve {
    record: SweepRecord,
    solution: pipeflow::StreamSolution,
    identity_ok: bool,
}

fn gated_solve(
    params: FlowParams,
    xi: f64,
    n: usize,
    family: &ForcingFamily,
    thresholds: &RegimeThresholds,
    gates: &GatesBlock,
) -> Result<GatedSolve, CmdError> {
    let solve_at = |size: usize| -> Result<_, CmdError> {
        let ops = build_radial_operators(size)?;
        let profile = poiseuille_profile(params, &ops);
        let (f_r, f_z) = family.stream_pair(&ops);
        let forcing = ModeForcing::new(xi, f_r, f_z);
        let sol = solve_mode(&forcing, &profile, &ops)?;
        let gaps = energy_identity_residuals(&sol, &forcing, &profile, &ops)?;
        let fnorm = (ops.norm_sq_r(&forcing.f_r_hat) + ops.norm_sq_r(&forcing.f_z_hat)).sqrt();
        let norms = mode_norms(&sol, &ops);
        Ok((sol, norms, gaps, fnorm))
    };

    let (solution, norms, gaps, forcing_norm) = solve_at(n)?;
    let (_, fine_norms, ..) = solve_at(gate_resolution(n))?;
    let gate_defect = (fine_norms.h2() - norms.h2()).abs() / fine_norms.h2().max(f64::MIN_POSITIVE);
    if gate_defect > gates.gate_tol {
        return Err(CmdError::Numerical(format!(
            "unconverged at n = {n}: H2 norm moved by {gate_defect:.3e} under grid \
             refinement (gate {:.1e}); raise mode.n_points",
            gates.gate_tol
        )));
    }
    let identity_ok = gaps.0.max(gaps.1) <= gates.identity_tol;
    let record = SweepRecord {
        params,
        xi,
        n_points: n,
        regime: classify(params, xi, thresholds),
        norms: solution.norm_report,
        mode_norms: norms,
        identity_gaps: gaps,
        forcing_norm,
        convergence_gate: true,
        gate_defect,
    };
    Ok(GatedSolve {
        record,
        solution,
        identity_ok,
    })
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
    let records_name = cfg
        .get_str("output", "records")
        .unwrap_or_else(|| "solve-linear.json".to_string());
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
        output: OutputBlock {
            records: records_name.clone(),
            profiles: profiles_name.clone(),
        },
    };

    let solved = gated_solve(params, xi, n, &family, &thresholds, &resolved.gates)?;
    let records_path = out_path(&args.out, &records_name);
    write_json(&records_path, &resolved, "record", &solved.record)?;
    println!("wrote {}", records_path.display());

    if let Some(name) = &profiles_name {
        let ops = build_radial_operators(n)?;
        let sol = &solved.solution;
        let header = [
            "r", "re_psi", "im_psi", "re_v_r", "im_v_r", "re_v_z", "im_v_z", "re_omega", "im_omega",
        ];
        let rows: Vec<Vec<String>> = (0..ops.n_points)
            .map(|i| {
                vec![
                    fmt_f64(ops.nodes[i]),
                    fmt_f64(sol.psi_hat[i].re),
                    fmt_f64(sol.psi_hat[i].im),
                    fmt_f64(sol.v_r_hat[i].re),
                    fmt_f64(sol.v_r_hat[i].im),
                    fmt_f64(sol.v_z_hat[i].re),
                    fmt_f64(sol.v_z_hat[i].im),
                    fmt_f64(sol.omega_hat[i].re),
                    fmt_f64(sol.omega_hat[i].im),
                ]
            })
            .collect();
        let path = out_path(&args.out, name);
        write_csv(&path, &resolved, &header, &rows)?;
        println!("wrote {}", path.display());
    }

    if !solved.identity_ok {
        return Err(CmdError::Gate(format!(
            "energy-identity defect {:.3e} exceeds {:.1e} (record written anyway)",
            solved
                .record
                .identity_gaps
                .0
                .max(solved.record.identity_gaps.1),
            resolved.gates.identity_tol
        )));
    }
    Ok(())
}
