use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lndkit::auto::{build_auto, check_params, verify_auto, AutParams, AutParamsJson};
use lndkit::cyliso::{cancellation_report, danielewski_chain};
use lndkit::lnd::{gr_leading, hat_ideal_tops, verify_suite, Derivation};
use lndkit::poly::{parse_poly, VarSet};
use lndkit::quotient::{Ring, RingPresentation, RingSpec};
use lndkit::Error;

#[derive(Parser)]
#[command(name = "lndkit", version, about = "Exact LND computations on R(n,e,P,Q) and B(n,P)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RingArg {
    /// Ring presentation JSON file
    #[arg(long, conflicts_with = "toy")]
    ring: Option<PathBuf>,
    /// Use the toy ring k[X,Y,Z]/<X^2 Y - (Y^2 - X Z)^2>
    #[arg(long)]
    toy: bool,
    /// Print JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Degree of an element for the canonical derivation
    Deg {
        #[command(flatten)]
        ring: RingArg,
        element: String,
        /// Maximum number of derivation applications
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Normal form of a polynomial
    Nf {
        #[command(flatten)]
        ring: RingArg,
        element: String,
    },
    /// Apply the canonical derivation `k` times
    Derive {
        #[command(flatten)]
        ring: RingArg,
        element: String,
        #[arg(short, long, default_value_t = 1)]
        k: u32,
    },
    /// Basis monomials of the filtration up to an index
    Filtration {
        #[command(flatten)]
        ring: RingArg,
        index: u64,
    },
    /// Leading form in the associated graded ring
    Gr {
        #[command(flatten)]
        ring: RingArg,
        element: String,
    },
    /// Top homogeneous components of the twisting generators
    Hatideal {
        #[command(flatten)]
        ring: RingArg,
    },
    /// Build an automorphism from (lambda, mu, a)
    AutoBuild {
        #[command(flatten)]
        ring: RingArg,
        #[command(flatten)]
        params: AutArgs,
    },
    /// Build and verify an automorphism
    AutoVerify {
        #[command(flatten)]
        ring: RingArg,
        #[command(flatten)]
        params: AutArgs,
        /// Degree bound for the degree-preservation check
        #[arg(long, default_value_t = 12)]
        bound: u64,
    },
    /// Cylinder isomorphism R(n,from)[T] -> R(n,to)[T]
    Cyliso {
        #[arg(short)]
        n: u32,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Cylinder isomorphism B(from,P)[T] -> B(to,P)[T]
    DanielewskiCyliso {
        /// P(X,S), e.g. "S^4 + X^2*S^2 + 1"
        #[arg(long, short = 'p')]
        p: String,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run every bounded check on a ring
    VerifySuite {
        #[command(flatten)]
        ring: RingArg,
        /// Degree bound for the kernel check
        #[arg(long, default_value_t = 8)]
        bound: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct AutArgs {
    /// AutParams JSON file {"lambda","mu","a"}
    #[arg(long, conflicts_with_all = ["lambda", "mu", "a"])]
    params: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
}

/// Failure kinds mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Verification(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(
                Error::BoundExceeded { .. }
                | Error::InexactDivision { .. }
                | Error::IllDefinedDerivation(_)
                | Error::InvalidAutParams(_)
                | Error::InvalidStep(_),
            ) => Failure::Verification(e),
            _ => Failure::Usage(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn load_ring(arg: &RingArg) -> anyhow::Result<Ring> {
    match (&arg.ring, arg.toy) {
        (_, true) => Ok(RingPresentation::toy()),
        (Some(path), false) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(RingSpec::parse_json(&text)?)
        }
        (None, false) => bail!("give --ring FILE or --toy"),
    }
}

fn load_params(a: &AutArgs) -> anyhow::Result<AutParams> {
    let j = match &a.params {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<AutParamsJson>(&text).context("parsing automorphism parameters")?
        }
        None => AutParamsJson {
            lambda: a.lambda.clone().unwrap_or_else(|| "1".into()),
            mu: a.mu.clone().unwrap_or_else(|| "1".into()),
            a: a.a.clone().unwrap_or_else(|| "0".into()),
        },
    };
    Ok(AutParams::from_json(&j)?)
}

fn emit(json: bool, value: serde_json::Value, text: &str) {
    let body = if json { serde_json::to_string_pretty(&value).unwrap() } else { text.to_string() };
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout(), "{body}");
}

fn write_out(path: &Option<PathBuf>, value: &serde_json::Value) -> anyhow::Result<()> {
    if let Some(p) = path {
        write_json(p, value)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Outcome {
    match cli.cmd {
        Cmd::Deg { ring, element, bound } => {
            let r = load_ring(&ring)?;
            let a = r.parse_elem(&element)?;
            let d = Derivation::canonical(&r)?;
            let iterated = d.deg(&a, bound)?;
            let formula = a.basis_degree();
            let ok = iterated == formula;
            let text = if ok {
                format!("{iterated}")
            } else {
                format!("{iterated}\nMISMATCH: basis formula gives {formula}")
            };
            emit(
                ring.json,
                json!({"element": a.to_string(), "iteration": iterated.to_string(), "formula": formula.to_string(), "consistent": ok}),
                &text,
            );
            Ok(ok)
        }
        Cmd::Nf { ring, element } => {
            let r = load_ring(&ring)?;
            let a = r.parse_elem(&element)?;
            emit(ring.json, serde_json::to_value(a.to_json()).unwrap(), &a.to_string());
            Ok(true)
        }
        Cmd::Derive { ring, element, k } => {
            let r = load_ring(&ring)?;
            let a = r.parse_elem(&element)?;
            let out = Derivation::canonical(&r)?.iterate(&a, k)?;
            emit(ring.json, serde_json::to_value(out.to_json()).unwrap(), &out.to_string());
            Ok(true)
        }
        Cmd::Filtration { ring, index } => {
            let r = load_ring(&ring)?;
            let basis = r.basis_monomials(index);
            let mut lines = Vec::new();
            let mut rows = Vec::new();
            for (k, w) in &basis {
                let name = r.monomial(*k).to_string();
                lines.push(format!("{w}: {name}"));
                rows.push(json!({"s": k.s, "y": k.y, "z": k.z, "degree": w}));
            }
            emit(ring.json, json!({"ring": r.label(), "index": index, "basis": rows}), &lines.join("\n"));
            Ok(true)
        }
        Cmd::Gr { ring, element } => {
            let r = load_ring(&ring)?;
            let g = gr_leading(&r.parse_elem(&element)?)?;
            emit(
                ring.json,
                json!({"degree": g.degree(), "terms": g.elem().to_json()}),
                &format!("{} (degree {})", g.elem(), g.degree()),
            );
            Ok(true)
        }
        Cmd::Hatideal { ring } => {
            let r = load_ring(&ring)?;
            let tops: Vec<String> = hat_ideal_tops(&r).iter().map(|p| p.to_string()).collect();
            emit(ring.json, json!({"ring": r.label(), "tops": tops}), &tops.join("\n"));
            Ok(true)
        }
        Cmd::AutoBuild { ring, params } => {
            let r = load_ring(&ring)?;
            let p = load_params(&params)?;
            let auto = build_auto(&r, &p)?;
            let names = ["x", "s", "y", "z"];
            let text: Vec<String> = names.iter().zip(auto.images()).map(|(n, i)| format!("{n} -> {i}")).collect();
            let map: serde_json::Map<String, serde_json::Value> =
                names.iter().zip(auto.images()).map(|(n, i)| (n.to_string(), json!(i.to_string()))).collect();
            emit(ring.json, json!({"ring": r.label(), "params": p.to_json(), "images": map}), &text.join("\n"));
            Ok(true)
        }
        Cmd::AutoVerify { ring, params, bound } => {
            let r = load_ring(&ring)?;
            let p = load_params(&params)?;
            let violations = check_params(&r, &p)?;
            if !violations.is_empty() {
                emit(
                    ring.json,
                    json!({"ring": r.label(), "params": p.to_json(), "pass": false, "violations": violations}),
                    &format!("FAIL check_params\n{}", violations.join("\n")),
                );
                return Ok(false);
            }
            let cert = verify_auto(&build_auto(&r, &p)?, bound)?;
            let text: Vec<String> = cert.checks.iter().map(|c| c.summary_line()).collect();
            emit(ring.json, serde_json::to_value(&cert).unwrap(), &text.join("\n"));
            Ok(cert.pass)
        }
        Cmd::Cyliso { n, from, to, out, json } => {
            if from == to || from < 1 || to < 1 {
                return Err(Failure::Usage(anyhow::anyhow!("need distinct --from and --to, both at least 1")));
            }
            if from > to {
                return Err(Failure::Usage(anyhow::anyhow!("--from must be smaller than --to")));
            }
            let report = cancellation_report(n, from, to)?;
            let value = serde_json::to_value(&report).unwrap();
            write_out(&out, &value).map_err(Failure::Usage)?;
            let mut text = vec![format!(
                "{} {} -> {}",
                if report.pass { "PASS" } else { "FAIL" },
                report.certificate.source,
                report.certificate.target
            )];
            text.push(format!("fingerprints {:?} vs {:?}", report.source_fingerprint, report.target_fingerprint));
            text.extend(report.certificate.witnesses());
            emit(json, value, &text.join("\n"));
            Ok(report.pass)
        }
        Cmd::DanielewskiCyliso { p, from, to, out, json } => {
            if from >= to || from < 1 {
                return Err(Failure::Usage(anyhow::anyhow!("need 1 <= --from < --to")));
            }
            let xs = VarSet::new(["X", "S"]).unwrap();
            let poly = parse_poly(&p, &xs)?;
            let (_, cert) = danielewski_chain(&poly, from, to)?;
            let value = serde_json::to_value(&cert).unwrap();
            write_out(&out, &value).map_err(Failure::Usage)?;
            let mut text = vec![format!("{} {} -> {}", if cert.pass { "PASS" } else { "FAIL" }, cert.source, cert.target)];
            text.extend(cert.witnesses());
            emit(json, value, &text.join("\n"));
            Ok(cert.pass)
        }
        Cmd::VerifySuite { ring, bound, seed } => {
            let r = load_ring(&ring)?;
            let reports = verify_suite(&r, bound, seed)?;
            let text: Vec<String> = reports.iter().map(|c| c.summary_line()).collect();
            emit(ring.json, serde_json::to_value(&reports).unwrap(), &text.join("\n"));
            Ok(reports.iter().all(|c| c.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verification(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
