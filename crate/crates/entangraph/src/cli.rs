//! Implementations behind the `entangraph` binary: state-spec parsing,
//! analysis/protocol drivers, and deterministic file emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use crate::analyzer::{self, EntPolynomial};
use crate::error::{Error, Result};
use crate::graph::{EntGraph, NodeStatus};
use crate::reference;
use crate::states::{self, InputQubitParams, RotationAngle};
use crate::teleport::{self, CorrectionVariant, Mode, ProtocolConfig, Strategy};
use crate::tensor::{DenseMatrix, DimVector, Label, PureState};

/// Parse a textual state spec: `ghz:N`, `psi34`, `qubit:THETA,PHI`, or
/// `file:PATH` (JSON with dims, labels, and [re, im] amplitude pairs).
pub fn parse_state_spec(spec: &str) -> Result<PureState> {
    if spec == "psi34" {
        return Ok(states::psi34());
    }
    if let Some(n) = spec.strip_prefix("ghz:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Parse(format!("bad channel size in `{spec}`")))?;
        return states::ghz(n);
    }
    if let Some(angles) = spec.strip_prefix("qubit:") {
        let parts: Vec<&str> = angles.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("`{spec}` needs qubit:THETA,PHI")));
        }
        let theta: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad theta in `{spec}`")))?;
        let phi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad phi in `{spec}`")))?;
        return Ok(states::input_qubit(&InputQubitParams::new(theta, phi)?));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return load_state_file(Path::new(path));
    }
    Err(Error::Parse(format!(
        "unknown state spec `{spec}` (expected ghz:N, psi34, qubit:THETA,PHI, or file:PATH)"
    )))
}

fn load_state_file(path: &Path) -> Result<PureState> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read `{}`: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("`{}` is not valid JSON: {e}", path.display())))?;
    let dims: Vec<usize> = v["dims"]
        .as_array()
        .ok_or_else(|| Error::Parse("state file needs a `dims` array".into()))?
        .iter()
        .map(|d| d.as_u64().map(|d| d as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Parse("`dims` must be positive integers".into()))?;
    let labels: Vec<Label> = v["labels"]
        .as_array()
        .ok_or_else(|| Error::Parse("state file needs a `labels` array".into()))?
        .iter()
        .map(|l| {
            l.as_str()
                .ok_or_else(|| Error::Parse("labels must be strings".into()))
                .and_then(Label::parse)
        })
        .collect::<Result<_>>()?;
    let amplitudes: Vec<Complex64> = v["amplitudes"]
        .as_array()
        .ok_or_else(|| Error::Parse("state file needs an `amplitudes` array".into()))?
        .iter()
        .map(|pair| {
            let re = pair.get(0).and_then(Value::as_f64);
            let im = pair.get(1).and_then(Value::as_f64);
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::Parse("amplitudes must be [re, im] pairs".into())),
            }
        })
        .collect::<Result<_>>()?;
    PureState::new(DimVector::new(dims, labels)?, amplitudes)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numeric(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Analyze a state: density matrix (auxiliary qudit ν traced out when
/// present), transpose sweep, polynomial, graph. Prints the polynomial and
/// optionally writes `report.json`, `graph.dot`, `graph.json`.
pub fn cmd_analyze(spec: &str, out: Option<&Path>) -> Result<i32> {
    let state = parse_state_spec(spec)?;
    let rho = density_for_analysis(&state)?;
    let analysis = analyzer::analyze_density(&rho)?;
    println!("{}", analysis.polynomial);

    if let Some(dir) = out {
        let statuses: BTreeMap<Label, NodeStatus> = analysis
            .polynomial
            .variables()
            .into_iter()
            .map(|l| (l, NodeStatus::Channel))
            .collect();
        let graph = EntGraph::from_polynomial(&analysis.polynomial, &statuses)?;
        write_json(&dir.join("report.json"), &analysis.to_json())?;
        write_text(&dir.join("graph.dot"), &graph.to_dot())?;
        write_text(&dir.join("graph.json"), &graph.to_json())?;
    }
    Ok(0)
}

/// Normalized density matrix of a pure state, with the auxiliary qudit ν
/// traced out automatically when the register carries that label.
pub fn density_for_analysis(state: &PureState) -> Result<DenseMatrix> {
    let rho = state.normalized()?.outer();
    let nu = Label('ν');
    if rho.dim_vector().contains(nu) {
        let keep: Vec<Label> = rho
            .dim_vector()
            .labels()
            .iter()
            .copied()
            .filter(|&l| l != nu)
            .collect();
        if keep.is_empty() {
            return Err(Error::Argument(
                "register holds only the auxiliary qudit".into(),
            ));
        }
        rho.partial_trace(&keep)
    } else {
        Ok(rho)
    }
}

/// Flags of the `teleport` subcommand, already syntax-checked by clap.
#[derive(Clone, Debug)]
pub struct TeleportArgs {
    pub channel: String,
    pub theta: f64,
    pub phi: f64,
    pub omega: f64,
    pub strategy: String,
    pub mode: String,
    pub seed: Option<u64>,
    pub corrections: String,
}

fn parse_strategy(text: &str) -> Result<Strategy> {
    match text {
        "pairwise" => Ok(Strategy::Pairwise),
        "sequential-rotations" => Ok(Strategy::SequentialRotations),
        other => match other.strip_prefix("hybrid:") {
            Some(k) => {
                let pairs: usize = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad hybrid pair count in `{other}`")))?;
                Ok(Strategy::Hybrid { pairs })
            }
            None => Err(Error::Parse(format!(
                "unknown strategy `{other}` (pairwise, sequential-rotations, hybrid:K)"
            ))),
        },
    }
}

pub fn build_protocol_config(args: &TeleportArgs) -> Result<ProtocolConfig> {
    let n = match args.channel.strip_prefix("ghz:") {
        Some(n) => n
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad channel `{}`", args.channel)))?,
        None => {
            return Err(Error::Parse(format!(
                "unsupported channel `{}` (expected ghz:N)",
                args.channel
            )))
        }
    };
    let mode = match args.mode.as_str() {
        "enumerate" => Mode::Enumerate,
        "sample" => Mode::Sample {
            seed: args.seed.unwrap_or(0),
        },
        other => return Err(Error::Parse(format!("unknown mode `{other}`"))),
    };
    let corrections = match args.corrections.as_str() {
        "exact" => CorrectionVariant::ExactInverse,
        "paper" => CorrectionVariant::PaperLiteral,
        other => {
            return Err(Error::Parse(format!(
                "unknown corrections variant `{other}`"
            )))
        }
    };
    let config = ProtocolConfig {
        n,
        input: InputQubitParams::new(args.theta, args.phi)?,
        omega: RotationAngle::new(args.omega)?,
        strategy: parse_strategy(&args.strategy)?,
        mode,
        corrections,
    };
    config.validate()?;
    Ok(config)
}

/// Run a teleportation protocol; prints a fidelity summary table and writes
/// `trace.json` plus one DOT file per stage when `--out` is given.
///
/// Exit code 0 requires every branch fidelity ≥ 1 − 1e-9 under exact
/// corrections; the paper-literal variant always exits 0 but warns when a
/// branch falls short.
pub fn cmd_teleport(args: &TeleportArgs, out: Option<&Path>) -> Result<i32> {
    let config = build_protocol_config(args)?;
    let traces = teleport::run(&config)?;

    println!("{:<28} {:>14} {:>14}", "branch", "probability", "fidelity");
    for trace in &traces {
        println!(
            "{:<28} {:>14.9} {:>14.9}",
            trace.branch, trace.probability, trace.fidelity
        );
    }
    let total_probability: f64 = traces.iter().map(|t| t.probability).sum();
    println!(
        "{} branch(es), total probability {:.9}, residual pairs per branch: {}",
        traces.len(),
        total_probability,
        traces.first().map(|t| t.residual_pairs.len()).unwrap_or(0)
    );

    if let Some(dir) = out {
        let document = serde_json::json!({
            "branches": traces.iter().map(|t| t.to_json_value()).collect::<Vec<_>>(),
            "config": {
                "channel": args.channel,
                "corrections": config.corrections.as_str(),
                "mode": match config.mode {
                    Mode::Enumerate => "enumerate".to_string(),
                    Mode::Sample { seed } => format!("sample:{seed}"),
                },
                "omega": config.omega.omega(),
                "phi": config.input.phi(),
                "strategy": config.strategy.as_str(),
                "theta": config.input.theta(),
            },
        });
        write_json(&dir.join("trace.json"), &document)?;
        for (index, stage) in traces[0].stages.iter().enumerate() {
            let path = dir.join(format!("stage-{index}-{}.dot", stage.name));
            write_text(&path, &stage.graph.to_dot())?;
        }
    }

    let all_unit = traces.iter().all(|t| t.unit_fidelity);
    match config.corrections {
        CorrectionVariant::ExactInverse => {
            if all_unit {
                Ok(0)
            } else {
                eprintln!("error: at least one branch fidelity fell below 1 - 1e-9");
                Ok(4)
            }
        }
        CorrectionVariant::PaperLiteral => {
            if !all_unit {
                eprintln!(
                    "warning: paper-literal corrections invert the rotated branches only at \
                     omega = pi/4; some fidelities are below 1"
                );
            }
            Ok(0)
        }
    }
}

/// Recompute the built-in reference tables; prints one line per check and
/// optionally writes the full report JSON.
pub fn cmd_verify_appendix(out: Option<&Path>) -> Result<i32> {
    let report = reference::verify_reference_tables()?;
    for check in &report.checks {
        println!(
            "{} {} ({})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!("{passed}/{} checks passed", report.checks.len());
    if let Some(path) = out {
        write_json(path, &report.to_json_value())?;
    }
    Ok(if report.all_pass() { 0 } else { 4 })
}

/// Convert a polynomial to its graph. Prints DOT to stdout; writes
/// `graph.dot` and `graph.json` when `--out` is given.
pub fn cmd_export_graph(polynomial: &str, out: Option<&Path>) -> Result<i32> {
    let p = EntPolynomial::parse(polynomial)?;
    let statuses: BTreeMap<Label, NodeStatus> = p
        .variables()
        .into_iter()
        .map(|l| (l, NodeStatus::Channel))
        .collect();
    let graph = EntGraph::from_polynomial(&p, &statuses)?;
    print!("{}", graph.to_dot());
    if let Some(dir) = out {
        write_text(&dir.join("graph.dot"), &graph.to_dot())?;
        write_text(&dir.join("graph.json"), &graph.to_json())?;
    }
    Ok(0)
}

/// Exit code for a failed command: 2 usage/parse, 3 capacity, 4 numeric.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Parse(_) | Error::Argument(_) | Error::UnknownLabel(_) => 2,
        Error::Capacity { .. } => 3,
        Error::Contract(_) | Error::Numeric(_) => 4,
        Error::Io(_) => 1,
    }
}
