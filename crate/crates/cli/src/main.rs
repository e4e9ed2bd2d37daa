use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spinsep::criteria::{
    analyze, cartesian_identity_check, AggregateReport, AnalyzeOptions, PartitionSelection,
    VERDICT_TOL,
};
use spinsep::momentmat::{
    build_moment_matrix, scan_principal_minors, MinorCertificate, MinorScan, MomentMatrixDoc,
};
use spinsep::numfmt::{self, fmt_sig};
use spinsep::qstate::{Bipartition, DensityMatrix};
use spinsep::states::{Family, StateSpec};
use spinsep::wernerscan::{scan, to_csv, ScanPoint};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] spinsep::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) if e.is_numerical() || *e == spinsep::Error::Undetected => {
                EXIT_NUMERICAL
            }
            CliError::Core(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "spinsep",
    version,
    about = "Collective-spin entanglement criteria for N-qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class I / Class II criteria and the PPT oracle over bipartitions.
    Analyze {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        parts: PartitionArgs,
        /// Treat the state as permutation symmetric: one split per size.
        #[arg(long)]
        symmetric: bool,
        /// Detection threshold for P and for the PPT eigenvalue.
        #[arg(long, default_value_t = VERDICT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Werner-state detection thresholds p_min over a range of sizes.
    ScanWerner {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Bisection tolerance on p.
        #[arg(long, default_value_t = 1e-9)]
        bisect_tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Dump the moment matrix on one split.
    MomentMatrix {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        parts: PartitionArgs,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Negative principal minors of the moment matrix.
    Minors {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        parts: PartitionArgs,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long, default_value_t = 64)]
        word_cap: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Both sides of the two-qubit Cartesian expansions.
    CartesianCheck {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct StateArgs {
    /// State family: ghz, w, werner, example3, basis, product_random, pure_random, separable_random.
    #[arg(long = "state", conflicts_with = "state_json")]
    family: Option<String>,
    /// State description as a JSON file.
    #[arg(long)]
    state_json: Option<PathBuf>,
    /// Number of qubits.
    #[arg(long = "n")]
    n_qubits: Option<usize>,
    /// GHZ angle in radians.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Werner mixing weight.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Product terms for separable_random.
    #[arg(long)]
    terms: Option<usize>,
    /// Basis index for basis.
    #[arg(long)]
    index: Option<usize>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// `all`, or the A indices of one split such as `1,2`. Repeatable.
    #[arg(long = "partitions", conflicts_with = "n_a")]
    partitions: Vec<String>,
    /// Split with A = the first n_a qubits.
    #[arg(long)]
    n_a: Option<usize>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

impl StateArgs {
    fn spec(&self) -> CliResult<StateSpec> {
        if let Some(path) = &self.state_json {
            let extra = self.n_qubits.is_some()
                || self.theta.is_some()
                || self.p.is_some()
                || self.seed.is_some()
                || self.terms.is_some()
                || self.index.is_some();
            if extra {
                return Err(CliError::Config(
                    "--state-json excludes the other state flags".into(),
                ));
            }
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            return serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
        }
        let family: Family = self
            .family
            .as_deref()
            .ok_or_else(|| {
                CliError::Config("a state is required (--state or --state-json)".into())
            })?
            .parse()?;
        Ok(StateSpec {
            family,
            n_qubits: self.n_qubits,
            theta: self.theta,
            p: self.p,
            seed: self.seed,
            terms: self.terms,
            index: self.index,
        })
    }

    fn density(&self) -> CliResult<DensityMatrix> {
        Ok(self.spec()?.build()?.density)
    }
}

fn parse_indices(n: usize, text: &str) -> CliResult<Bipartition> {
    let a = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad qubit index '{t}' in '{text}'")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Bipartition::new(n, a)?)
}

impl PartitionArgs {
    fn selection(&self, n: usize) -> CliResult<PartitionSelection> {
        if let Some(n_a) = self.n_a {
            return Ok(PartitionSelection::Explicit(vec![Bipartition::leading(
                n, n_a,
            )?]));
        }
        if self.partitions.is_empty() || self.partitions.iter().any(|p| p == "all") {
            if self.partitions.len() > 1 {
                return Err(CliError::Config(
                    "'all' cannot be combined with explicit partitions".into(),
                ));
            }
            return Ok(PartitionSelection::All);
        }
        let parts = self
            .partitions
            .iter()
            .map(|p| parse_indices(n, p))
            .collect::<CliResult<_>>()?;
        Ok(PartitionSelection::Explicit(parts))
    }

    fn single(&self, n: usize) -> CliResult<Bipartition> {
        match self.selection(n)? {
            PartitionSelection::Explicit(mut v) if v.len() == 1 => Ok(v.remove(0)),
            _ => Err(CliError::Config(
                "this command needs exactly one split (--partitions 1,2 or --n-a k)".into(),
            )),
        }
    }

    fn list(&self, n: usize) -> CliResult<Vec<Bipartition>> {
        match self.selection(n)? {
            PartitionSelection::All => Ok(Bipartition::all(n)?),
            PartitionSelection::Explicit(v) => Ok(v),
        }
    }
}

/// Sorted keys, floats already rounded by the serializers, trailing newline.
fn canonical_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("documents serialize to JSON");
    let mut s = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> CliError {
    CliError::Config(format!("{format:?} output is not available for {command}").to_lowercase())
}

fn analyze_csv(report: &AggregateReport) -> String {
    let mut s = String::from(
        "partition,p1,p2,ppt_min_eig,class1_entangled,class2_entangled,ppt_entangled\n",
    );
    for r in &report.reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.label,
            fmt_sig(r.p1),
            fmt_sig(r.p2),
            fmt_sig(r.ppt_min_eig),
            r.verdicts.class1_entangled,
            r.verdicts.class2_entangled,
            r.verdicts.ppt_entangled
        ));
    }
    s
}

fn scan_human(points: &[ScanPoint]) -> String {
    let mut s = format!(
        "{:>3} {:>4} {:>16} {:>16}\n",
        "n", "n_a", "p_min Class I", "p_min PPT"
    );
    for p in points {
        s.push_str(&format!(
            "{:>3} {:>4} {:>16} {:>16}\n",
            p.n,
            p.n_a,
            fmt_sig(p.p_min_class1),
            fmt_sig(p.p_min_ppt)
        ));
    }
    s
}

fn matrix_human(doc: &MomentMatrixDoc) -> String {
    let mut s = format!("split {} degree {}\n", doc.partition, doc.max_degree);
    for (label, row) in doc.labels.iter().zip(&doc.entries) {
        let cells: Vec<String> = row
            .iter()
            .map(|z| {
                let (re, im) = (numfmt::round_sig(z.0.re), numfmt::round_sig(z.0.im));
                if im == 0.0 {
                    fmt_sig(re)
                } else {
                    format!("{}{:+}i", fmt_sig(re), im)
                }
            })
            .collect();
        s.push_str(&format!("{label:<24} {}\n", cells.join(" ")));
    }
    s
}

#[derive(Serialize)]
struct MinorsReport {
    partition: Bipartition,
    label: String,
    max_degree: u32,
    max_order: usize,
    word_cap: usize,
    certificates: Vec<MinorCertificate>,
}

#[derive(Serialize)]
struct MinorsDoc {
    reports: Vec<MinorsReport>,
}

fn minors_human(doc: &MinorsDoc) -> String {
    let mut s = String::new();
    for r in &doc.reports {
        s.push_str(&format!(
            "{}: {} negative minors\n",
            r.label,
            r.certificates.len()
        ));
        for c in r.certificates.iter().take(10) {
            let words: Vec<String> = c.words.iter().map(|w| w.to_string()).collect();
            s.push_str(&format!(
                "  {:>20}  [{}]\n",
                fmt_sig(c.determinant),
                words.join(", ")
            ));
        }
    }
    s
}

#[derive(Serialize)]
struct CartesianDoc {
    #[serde(serialize_with = "numfmt::ser_f64")]
    product_lhs: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    product_rhs: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    hop_lhs: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    hop_rhs: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    max_deviation: f64,
}

fn run(cli: &Cli) -> CliResult<(String, Option<&Path>)> {
    let (text, out) = match &cli.command {
        Command::Analyze {
            state,
            parts,
            symmetric,
            tol,
            out,
        } => {
            let rho = state.density()?;
            let selection = parts.selection(rho.n_qubits())?;
            let opts = AnalyzeOptions {
                tol: *tol,
                symmetric: *symmetric,
            };
            let report = analyze(&rho, &selection, &opts)?;
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => canonical_json(&report),
                Format::Csv => analyze_csv(&report),
                Format::Human => report.human(),
            };
            (text, out)
        }
        Command::ScanWerner {
            n_min,
            n_max,
            bisect_tol,
            out,
        } => {
            let points = scan(*n_min, *n_max, *bisect_tol)?;
            let text = match out.format.unwrap_or(Format::Csv) {
                Format::Json => canonical_json(&points),
                Format::Csv => to_csv(&points),
                Format::Human => scan_human(&points),
            };
            (text, out)
        }
        Command::MomentMatrix {
            state,
            parts,
            max_degree,
            out,
        } => {
            let rho = state.density()?;
            let part = parts.single(rho.n_qubits())?;
            let doc = build_moment_matrix(&rho, &part, *max_degree)?.to_document();
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => canonical_json(&doc),
                Format::Human => matrix_human(&doc),
                f => return Err(unsupported(f, "moment-matrix")),
            };
            (text, out)
        }
        Command::Minors {
            state,
            parts,
            max_degree,
            max_order,
            word_cap,
            out,
        } => {
            let rho = state.density()?;
            let scan = MinorScan {
                max_order: *max_order,
                word_cap: *word_cap,
            };
            let reports = parts
                .list(rho.n_qubits())?
                .into_iter()
                .map(|part| {
                    let mm = build_moment_matrix(&rho, &part, *max_degree)?;
                    Ok(MinorsReport {
                        label: part.label(),
                        certificates: scan_principal_minors(&mm, &scan)?,
                        partition: part,
                        max_degree: *max_degree,
                        max_order: *max_order,
                        word_cap: *word_cap,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let doc = MinorsDoc { reports };
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => canonical_json(&doc),
                Format::Human => minors_human(&doc),
                f => return Err(unsupported(f, "minors")),
            };
            (text, out)
        }
        Command::CartesianCheck { state, out } => {
            let chk = cartesian_identity_check(&state.density()?)?;
            let doc = CartesianDoc {
                product_lhs: chk.lhs.0,
                product_rhs: chk.rhs.0,
                hop_lhs: chk.lhs.1,
                hop_rhs: chk.rhs.1,
                max_deviation: chk.max_deviation(),
            };
            let text = match out.format.unwrap_or(Format::Json) {
                Format::Json => canonical_json(&doc),
                Format::Human => format!(
                    "<S+A S+B><S-A S-B>: {} vs {}\n<S-A S+A S+B S-B>: {} vs {}\nmax deviation {:e}\n",
                    fmt_sig(doc.product_lhs),
                    fmt_sig(doc.product_rhs),
                    fmt_sig(doc.hop_lhs),
                    fmt_sig(doc.hop_rhs),
                    doc.max_deviation
                ),
                f => return Err(unsupported(f, "cartesian-check")),
            };
            (text, out)
        }
    };
    Ok((text, out.output.as_deref()))
}

fn emit(text: &str, dest: Option<&Path>) -> CliResult<()> {
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|(text, dest)| emit(&text, dest)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinsep: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
