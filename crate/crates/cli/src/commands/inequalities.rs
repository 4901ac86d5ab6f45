//! `inequalities`: quadrature checks of the weighted integral inequalities
//! on seeded random polynomial samples.

use serde::Serialize;

use pipeflow::{build_radial_operators, inequality_suite};

use crate::config::RawConfig;
use crate::output::{out_path, write_json};
use crate::{CmdError, CommonArgs};

#[derive(Debug, Serialize)]
struct Resolved {
    inequalities: Block,
    output: OutputBlock,
}

#[derive(Debug, Serialize)]
struct Block {
    samples: usize,
    seed: u64,
    n_points: usize,
}

#[derive(Debug, Serialize)]
struct OutputBlock {
    report: String,
}

pub fn run(cfg: &RawConfig, args: &CommonArgs) -> Result<(), CmdError> {
    let samples = cfg.get_usize("inequalities", "samples")?.unwrap_or(1000);
    let seed = match args.seed {
        Some(s) => s,
        None => cfg.get_u64("inequalities", "seed")?.unwrap_or(0),
    };
    let n_points = cfg.get_usize("inequalities", "n_points")?.unwrap_or(64);
    let report_name = cfg
        .get_str("output", "report")
        .unwrap_or_else(|| "inequalities.json".to_string());
    cfg.reject_unknown()?;

    let resolved = Resolved {
        inequalities: Block {
            samples,
            seed,
            n_points,
        },
        output: OutputBlock {
            report: report_name.clone(),
        },
    };

    let ops = build_radial_operators(n_points)?;
    let lemmas = inequality_suite(samples, seed, &ops)?;
    let path = out_path(&args.out, &report_name);
    write_json(&path, &resolved, "lemmas", &lemmas)?;
    println!("wrote {}", path.display());
    for lemma in &lemmas {
        println!(
            "{}: max ratio {:.6e} over {} samples, {} violations",
            lemma.name, lemma.max_ratio, lemma.samples, lemma.violations
        );
    }

    let total_violations: usize = lemmas.iter().map(|l| l.violations).sum();
    if total_violations > 0 {
        return Err(CmdError::Gate(format!(
            "{total_violations} inequality violations (report written anyway)"
        )));
    }
    Ok(())
}
