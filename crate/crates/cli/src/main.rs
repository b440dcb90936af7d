//! Command-line interface: build the named tensor families, compute rank
//! bounds, verify and export certificates, compute pencil canonical
//! forms, and reproduce the library's experiments end to end.
//!
//! Exit codes: 0 success/verified, 1 invalid certificate or failed
//! check, 2 malformed input or bad parameters.

mod experiments;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tensorcert::bounds::{certify_rank, LowerBoundMethod};
use tensorcert::json::{
    self, certificate_from_json, field_from_tag, pencil_report, rank_report_json,
    tensor_from_json, tensor_to_json, verify_certificate,
};
use tensorcert::pencil::{kronecker_canonical_form, pencil_rank};
use tensorcert::tensor::{
    chi_tensor, matmul_tensor, strassen_tensor, unit_tensor, w_tensor, Tensor,
};
use tensorcert::{Error, FieldSpec};

#[derive(Parser)]
#[command(name = "tensorcert", version, about = "exact tensor rank certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FieldArg {
    /// Ground field: q, fp:<p> or qsqrt:<D>
    #[arg(long, default_value = "q")]
    field: String,
}

impl FieldArg {
    fn parse(&self) -> Result<FieldSpec, Error> {
        field_from_tag(&self.field)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a named tensor and write it as JSON
    Build {
        /// Family: unit, w, strassen, matmul, chi, lblock, nblock, diag
        family: String,
        /// Family parameters (e.g. `w 3`, `matmul 2 2 2`)
        params: Vec<usize>,
        #[command(flatten)]
        field: FieldArg,
        /// Output path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a certificate file (exit 0 verified, 1 invalid, 2 malformed)
    Verify {
        cert: PathBuf,
        /// Source tensor file (overrides one embedded in the certificate)
        #[arg(long)]
        source: Option<PathBuf>,
        /// Target tensor file (overrides one embedded in the certificate)
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Rank bounds for a tensor, optionally against a decomposition
    Bound {
        tensor: PathBuf,
        /// Decomposition certificate providing the upper bound
        #[arg(long)]
        decomposition: Option<PathBuf>,
        /// Comma-separated: flattening, substitution, brute-force
        #[arg(long, default_value = "flattening")]
        methods: String,
        #[arg(long)]
        json: bool,
    },
    /// Kronecker canonical form of a 2 x n x m pencil
    Pencil {
        tensor: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a named experiment
    Experiment {
        /// One of: strassen7, w3-squared, wk-power, strassen-q,
        /// matmul-224, pencil-mult, chi-demo
        name: String,
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Order parameter k (wk-power, chi-demo, strassen-q)
        #[arg(long)]
        k: Option<usize>,
        /// Tensor power n (wk-power, strassen-q)
        #[arg(long)]
        n: Option<usize>,
        /// Strassen parameter q
        #[arg(long)]
        q: Option<usize>,
        /// Approximation degree d (chi-demo)
        #[arg(long)]
        d: Option<usize>,
        /// Run the large experiments over the rationals instead of F_10007
        #[arg(long)]
        rationals: bool,
        /// External certificate to verify (matmul-224)
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Export a built-in certificate as JSON
    Export {
        /// One of: w-cert, str-cert, strassen7, w3-squared, two-term
        what: String,
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        /// Constant c for the two-term decomposition of W_3 + c b2^3
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Malformed(_)
                | Error::InvalidParameter(_)
                | Error::ParseScalar { .. }
                | Error::ParsePoly { .. }
                | Error::NotPrime(_)
                | Error::NotSquareFree(_)
                | Error::ModulusTooLarge(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read_tensor(path: &PathBuf) -> Result<Tensor, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
    tensor_from_json(&text)
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Build { family, params, field, out } => {
            let field = field.parse()?;
            let tensor = build_tensor(&family, &params, &field)?;
            write_out(out.as_ref(), &tensor_to_json(&tensor))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { cert, source, target, json } => {
            let text = fs::read_to_string(&cert)
                .map_err(|e| Error::Malformed(format!("{}: {e}", cert.display())))?;
            let file = certificate_from_json(&text)?;
            let source = source.as_ref().map(read_tensor).transpose()?;
            let target = target.as_ref().map(read_tensor).transpose()?;
            match verify_certificate(&file, source.as_ref(), target.as_ref()) {
                Ok(report) => {
                    if json {
                        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
                    } else {
                        println!("verified: {}", report.message);
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::InvalidCertificate(msg)) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({ "verified": false, "message": msg })
                        );
                    } else {
                        println!("invalid: {msg}");
                    }
                    Ok(ExitCode::from(1))
                }
                Err(other) => Err(other),
            }
        }
        Command::Bound { tensor, decomposition, methods, json } => {
            let t = read_tensor(&tensor)?;
            let dec = match decomposition {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
                    let file = certificate_from_json(&text)?;
                    match file.certificate {
                        json::Certificate::Decomposition(d) => Some(d),
                        _ => {
                            return Err(Error::Malformed(
                                "--decomposition expects a decomposition certificate".into(),
                            ))
                        }
                    }
                }
                None => None,
            };
            let methods = parse_methods(&methods)?;
            let report = certify_rank(&t, dec.as_ref(), &methods)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rank_report_json(&report)).unwrap());
            } else {
                println!(
                    "lower bound {} (integer {}), upper bound {}, methods [{}]{}",
                    report.lower,
                    report.lower_int,
                    report.upper.map_or("none".to_string(), |u| u.to_string()),
                    report.methods.join(", "),
                    if report.determined { "; rank determined" } else { "" }
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pencil { tensor, json } => {
            let t = read_tensor(&tensor)?;
            let (cf, basis) = kronecker_canonical_form(&t)?;
            let rank = pencil_rank(&cf);
            let report = pencil_report(&cf, &basis, rank.as_ref().copied().map_err(|e| e));
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!(
                    "zero block {}x{}, eps {:?}, eta {:?}, invariant factors [{}], rank {}",
                    cf.zero_rows,
                    cf.zero_cols,
                    cf.eps_indices,
                    cf.eta_indices,
                    cf.invariant_factors
                        .iter()
                        .map(|p| p.to_string_with_var("x"))
                        .collect::<Vec<_>>()
                        .join(", "),
                    match &rank {
                        Ok(r) => r.to_string(),
                        Err(e) => format!("unavailable ({e})"),
                    }
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { name, field, seed, json, k, n, q, d, rationals, cert } => {
            let spec = experiments::ExperimentSpec {
                name,
                field: field.parse()?,
                field_given: field.field != "q",
                seed,
                k,
                n,
                q,
                d,
                rationals,
                cert,
            };
            let report = experiments::run(&spec)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report.json).unwrap());
            } else {
                for line in &report.lines {
                    println!("{line}");
                }
            }
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Export { what, field, k, q, c, out } => {
            let field = field.parse()?;
            let text = experiments::export_certificate(&what, &field, k, q, c.as_deref())?;
            write_out(out.as_ref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_methods(text: &str) -> Result<Vec<LowerBoundMethod>, Error> {
    text.split(',')
        .map(|m| match m.trim() {
            "flattening" => Ok(LowerBoundMethod::Flattening),
            "substitution" => Ok(LowerBoundMethod::Substitution),
            "brute-force" => Ok(LowerBoundMethod::BruteForce),
            other => Err(Error::Malformed(format!("unknown method {other:?}"))),
        })
        .collect()
}

fn build_tensor(family: &str, params: &[usize], field: &FieldSpec) -> Result<Tensor, Error> {
    let need = |n: usize| -> Result<(), Error> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "family {family:?} takes {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    match family {
        "unit" => {
            need(2)?;
            unit_tensor(field, params[0], params[1])
        }
        "w" => {
            need(1)?;
            w_tensor(field, params[0])
        }
        "strassen" => {
            need(2)?;
            strassen_tensor(field, params[0], params[1])
        }
        "matmul" => {
            need(3)?;
            matmul_tensor(field, params[0], params[1], params[2])
        }
        "chi" => {
            need(2)?;
            chi_tensor(field, params[0], params[1])
        }
        "lblock" => {
            need(1)?;
            tensorcert::pencil::l_block(field, params[0])
        }
        "nblock" => {
            need(1)?;
            tensorcert::pencil::n_block(field, params[0])
        }
        "diag" => {
            need(1)?;
            tensorcert::pencil::diag_pencil_factor(field, params[0])
        }
        other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
    }
}
