//! Command-line front end: parse matrix/map files, run the analyses, emit
//! verifiable certificates, and verify them independently.
//!
//! Exit codes: 0 for a positive answer, 1 for a mathematically negative
//! answer (e.g. not triangularizable, certificate rejected), 2 for input
//! errors, 3 for an internal contradiction (a reproduction file is written;
//! such an input falsifies something the engine relies on).

use degone_cli::{certificate, formats, fuzzgen, verify};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use degone::classify::{classify, NormalFormTag};
use degone::degmat::StrongNilpotence;
use degone::field::FieldSpec;
use degone::jacobian::{
    annihilator_search, hessian_integrate, is_jacobian, trdeg_rank2, Annihilator, TrdegNote,
};
use degone::triangularize::{square_zero_suite, triangularize_rank_le2};
use degone::Error;

use certificate::{input_digest, CertKind};
use formats::{expect_map, expect_matrix, parse_input, write_map_file};

#[derive(Parser)]
#[command(name = "degone", version, about = "Exact classification and triangularization of degree-one polynomial matrices of rank at most two")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rank of a degree-one matrix over K(x).
    Rank { input: PathBuf },
    /// Classify a rank <= 2 matrix into a normal form, emitting (S, T).
    Classify {
        input: PathBuf,
        /// Certificate path (defaults to `<input>.cert`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the matrix is the Jacobian matrix of a quadratic map.
    IsJacobian { input: PathBuf },
    /// Integrate a Jacobian matrix back to a quadratic map.
    Integrate { input: PathBuf },
    /// Integrate a symmetric matrix to a polynomial with that Hessian.
    HessianIntegrate { input: PathBuf },
    /// Decide nilpotency via principal minor sums.
    Nilpotent { input: PathBuf },
    /// Decide strong nilpotence; on success emit a conjugator certificate.
    StronglyNilpotent {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conjugate the Jacobian of a nilpotent rank <= 2 map to strictly
    /// lower triangular form.
    Triangularize {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check J(H)^2 = 0 and the associated product identities.
    Jh2Check {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank and transcendence-degree report for a quadratic map.
    Trdeg { input: PathBuf },
    /// Search for a polynomial relation among chosen components.
    Annihilate {
        input: PathBuf,
        /// Comma-separated 1-based component indices, e.g. `1,2,3`.
        #[arg(long)]
        components: String,
        /// Degree bound for the relation search.
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Re-verify a certificate against its input file.
    Verify { certificate: PathBuf, input: PathBuf },
    /// Generate a deterministic fuzz corpus with expected-outcome sidecars.
    Fuzz {
        /// Normal-form family, e.g. `R2_Hook`; or use `--pipeline`.
        #[arg(long, conflicts_with = "pipeline")]
        tag: Option<String>,
        /// `triangularize` or `square-zero` instance families.
        #[arg(long)]
        pipeline: Option<String>,
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, default_value_t = 2)]
        vars: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    /// Malformed input, unusable preconditions: exit 2.
    Input(String),
    /// A forced step failed; the reproduction payload is written: exit 3.
    Contradiction { context: String, repro: String },
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Input(s)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalContradiction { context, repro } => {
                Failure::Contradiction { context, repro }
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Contradiction { context, repro }) => {
            eprintln!("internal contradiction: {context}");
            let path = Path::new("degone-contradiction.repro");
            match std::fs::write(path, repro) {
                Ok(()) => eprintln!("reproduction written to {}", path.display()),
                Err(e) => eprintln!("failed to write the reproduction file: {e}"),
            }
            ExitCode::from(3)
        }
    }
}

fn read_input(path: &Path) -> Result<(Vec<u8>, formats::Input), Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Input(format!("{} is not valid UTF-8", path.display())))?;
    let input = parse_input(&text).map_err(Failure::Input)?;
    Ok((bytes, input))
}

fn write_certificate(
    default_base: &Path,
    out: Option<PathBuf>,
    body: &str,
) -> Result<PathBuf, Failure> {
    let path = out.unwrap_or_else(|| {
        let mut p = default_base.as_os_str().to_owned();
        p.push(".cert");
        PathBuf::from(p)
    });
    std::fs::write(&path, body)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn run(cmd: Cmd) -> Result<u8, Failure> {
    match cmd {
        Cmd::Rank { input } => {
            let (_, inp) = read_input(&input)?;
            let rank = match inp {
                formats::Input::Matrix(m) => m.rank_symbolic(),
                formats::Input::Map(h) => h.jacobian().rank_symbolic(),
            };
            println!("rank: {rank}");
            Ok(0)
        }
        Cmd::Classify { input, out } => {
            let (bytes, inp) = read_input(&input)?;
            let m = expect_matrix(inp)?;
            match classify(&m) {
                Ok(report) => {
                    println!("rank: {}", report.tag.expected_rank());
                    println!("tag: {}", report.tag);
                    println!("jacobian: {}", report.jacobian_flags.is_jacobian);
                    if report.jacobian_flags.refinement_applied {
                        println!("refinement-applied: true");
                    }
                    if report.jacobian_flags.char2_antisym {
                        println!("char2-antisym: true");
                    }
                    println!("normal-form:");
                    print!("{}", report.normal_form);
                    let cert = certificate::classification_certificate(
                        &input_digest(&bytes),
                        m.field(),
                        report.tag,
                        &report.tf,
                    );
                    let path = write_certificate(&input, out, &cert)?;
                    println!("certificate: {}", path.display());
                    Ok(0)
                }
                Err(Error::OutOfScope(r)) => {
                    println!("rank: {r}");
                    println!("out of scope: only rank <= 2 is classified");
                    Ok(1)
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::IsJacobian { input } => {
            let (_, inp) = read_input(&input)?;
            let m = expect_matrix(inp)?;
            match is_jacobian(&m) {
                Ok(w) => {
                    println!("jacobian: true");
                    print!("{}", write_map_file(&w.map));
                    Ok(0)
                }
                Err(v) => {
                    println!("jacobian: false ({v:?})");
                    Ok(1)
                }
            }
        }
        Cmd::Integrate { input } => {
            let (_, inp) = read_input(&input)?;
            let m = expect_matrix(inp)?;
            match is_jacobian(&m) {
                Ok(w) => {
                    print!("{}", write_map_file(&w.map));
                    Ok(0)
                }
                Err(v) => {
                    println!("not a jacobian matrix ({v:?})");
                    Ok(1)
                }
            }
        }
        Cmd::HessianIntegrate { input } => {
            let (_, inp) = read_input(&input)?;
            let m = expect_matrix(inp)?;
            if m.rows() != m.cols() || m.cols() != m.nvars() {
                return Err(Failure::Input(
                    "a Hessian is square with one column per variable".into(),
                ));
            }
            match hessian_integrate(&m) {
                Ok(h) => {
                    println!("h = {h}");
                    Ok(0)
                }
                Err(o) => {
                    println!("not integrable ({o:?})");
                    Ok(1)
                }
            }
        }
        Cmd::Nilpotent { input } => {
            let (_, inp) = read_input(&input)?;
            let m = expect_matrix(inp)?;
            if m.rows() != m.cols() {
                return Err(Failure::Input("nilpotency needs a square matrix".into()));
            }
            let answer = m.is_nilpotent();
            println!("nilpotent: {answer}");
            Ok(if answer { 0 } else { 1 })
        }
        Cmd::StronglyNilpotent { input, out } => {
            let (bytes, inp) = read_input(&input)?;
            let m = expect_matrix(inp)?;
            if m.rows() != m.cols() {
                return Err(Failure::Input("strong nilpotence needs a square matrix".into()));
            }
            match m.strongly_nilpotent_triangularize() {
                StrongNilpotence::Triangularizable { u, u_inv } => {
                    println!("strongly-nilpotent: true");
                    let cert = certificate::conjugation_certificate(
                        CertKind::StrongNilpotence,
                        &input_digest(&bytes),
                        m.field(),
                        &u,
                        &u_inv,
                    );
                    let path = write_certificate(&input, out, &cert)?;
                    println!("certificate: {}", path.display());
                    Ok(0)
                }
                StrongNilpotence::NotTriangularizable { stage } => {
                    println!("strongly-nilpotent: false (no constant kernel vector at stage {stage})");
                    Ok(1)
                }
            }
        }
        Cmd::Triangularize { input, out } => {
            let (bytes, inp) = read_input(&input)?;
            let h = expect_map(inp)?;
            match triangularize_rank_le2(&h) {
                Ok(cert) => {
                    println!("triangularized: true");
                    for step in &cert.provenance {
                        println!("step: {step}");
                    }
                    let body = certificate::conjugation_certificate(
                        CertKind::Triangularization,
                        &input_digest(&bytes),
                        h.field(),
                        &cert.u,
                        &cert.u_inv,
                    );
                    let path = write_certificate(&input, out, &body)?;
                    println!("certificate: {}", path.display());
                    Ok(0)
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Jh2Check { input, out } => {
            let (bytes, inp) = read_input(&input)?;
            let h = expect_map(inp)?;
            if h.target_dim() != h.nvars() {
                return Err(Failure::Input("the check needs an endomorphism".into()));
            }
            let r = square_zero_suite(&h);
            let show = |v: Option<bool>| match v {
                None => "na".to_string(),
                Some(b) => b.to_string(),
            };
            println!("square-zero: {}", r.square_zero);
            println!("anticommute: {}", show(r.anticommute));
            println!("pair-product-zero: {}", show(r.pair_product_zero));
            println!("triple-product-zero: {}", show(r.triple_product_zero));
            let body = certificate::suite_certificate(&input_digest(&bytes), h.field(), &r);
            let path = write_certificate(&input, out, &body)?;
            println!("certificate: {}", path.display());
            Ok(if r.square_zero { 0 } else { 1 })
        }
        Cmd::Trdeg { input } => {
            let (_, inp) = read_input(&input)?;
            let h = expect_map(inp)?;
            let r = trdeg_rank2(&h)?;
            println!("rank: {}", r.rank);
            match r.trdeg_claim {
                Some(t) => println!("trdeg: {t}"),
                None => println!("trdeg: unknown"),
            }
            println!("basis: {}", trdeg_note(r.note));
            Ok(0)
        }
        Cmd::Annihilate {
            input,
            components,
            max_degree,
        } => {
            let (_, inp) = read_input(&input)?;
            let h = expect_map(inp)?;
            let subset: Vec<usize> = components
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&i| i >= 1 && i <= h.target_dim())
                        .map(|i| i - 1)
                        .ok_or_else(|| format!("bad component index `{s}`"))
                })
                .collect::<Result<_, _>>()?;
            if subset.is_empty() || max_degree == 0 {
                return Err(Failure::Input(
                    "need at least one component and a positive degree bound".into(),
                ));
            }
            match annihilator_search(&h, &subset, max_degree) {
                Annihilator::Relation(f) => {
                    println!("relation: {f}");
                    Ok(0)
                }
                Annihilator::NoRelationUpTo(d) => {
                    println!("no relation up to degree {d}");
                    Ok(1)
                }
            }
        }
        Cmd::Verify { certificate, input } => {
            let text = std::fs::read_to_string(&certificate)
                .map_err(|e| Failure::Input(format!("{}: {e}", certificate.display())))?;
            let cert = certificate::parse_certificate(&text).map_err(Failure::Input)?;
            let (bytes, inp) = read_input(&input)?;
            match verify::verify(&cert, &bytes, &inp) {
                Ok(()) => {
                    println!("verified: OK");
                    Ok(0)
                }
                Err(msg) => {
                    println!("verified: FAILED ({msg})");
                    Ok(1)
                }
            }
        }
        Cmd::Fuzz {
            tag,
            pipeline,
            field,
            rows,
            cols,
            vars,
            seed,
            count,
            jobs,
            out,
        } => {
            let field: FieldSpec = field
                .parse()
                .map_err(|e: Error| Failure::Input(e.to_string()))?;
            let kind = match (tag, pipeline) {
                (Some(t), None) => fuzzgen::FuzzKind::Tag(
                    t.parse::<NormalFormTag>()
                        .map_err(|e| Failure::Input(e.to_string()))?,
                ),
                (None, Some(p)) => match p.as_str() {
                    "triangularize" => fuzzgen::FuzzKind::Triangularize,
                    "square-zero" => fuzzgen::FuzzKind::SquareZero,
                    other => {
                        return Err(Failure::Input(format!(
                            "unknown pipeline `{other}` (use `triangularize` or `square-zero`)"
                        )))
                    }
                },
                _ => {
                    return Err(Failure::Input(
                        "choose exactly one of --tag and --pipeline".into(),
                    ))
                }
            };
            let spec = fuzzgen::FuzzSpec {
                kind,
                field,
                rows,
                cols,
                nvars: vars,
                seed,
                count,
                jobs,
                out,
            };
            let written = fuzzgen::generate(&spec).map_err(Failure::Input)?;
            println!("generated {} instance(s)", written.len());
            for p in written {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn trdeg_note(note: TrdegNote) -> &'static str {
    match note {
        TrdegNote::Constant => "constant map",
        TrdegNote::SingleVariable => "generated inside K[x1] after equivalence",
        TrdegNote::SingleComponent => "generated by one component",
        TrdegNote::TwoVariables => "contained in K[x1, x2] after equivalence",
        TrdegNote::TwoComponents => "generated by two components",
        TrdegNote::ComponentAndVariable => "generated by one component and one variable",
        TrdegNote::CharTwoAntisym => "antisymmetric case: rank 2 with transcendence degree 3",
        TrdegNote::Unknown => "outside the rank <= 2 theory",
    }
}
