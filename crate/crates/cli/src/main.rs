mod output;

use std::io::{self, BufWriter, Write};
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use mdsforge::counting::{verify, Formula};
use mdsforge::decomp::{certify, decompose, involutory_member, InvolutoryCertificate};
use mdsforge::enumerate::{count, stream, CountOptions, EnumSpec, Kind, Route};
use mdsforge::mdscheck::{check_r, first_zero_minor, interior, is_involutory, is_representative_mds};
use mdsforge::{Elem, Error, Field, SquareMatrix};
use serde_json::{json, Value};

use output::{Failure, OutputRecord, Status, WithSource};

/// Toolkit for MDS matrices over finite fields: checks, the diagonal
/// decomposition, involutory certificates, enumeration and counting.
#[derive(Parser)]
#[command(name = "mdsforge", version)]
struct Cli {
    /// Output format. `json` and `jsonl` differ only for `enum`; `csv` is
    /// accepted by `enum` alone.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Jsonl,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Test a matrix: MDS (every square minor nonzero), involutory (M^2 = I),
    /// or representative MDS through the interior conditions on R, the
    /// lower-right block of a matrix with all-ones first row and column.
    /// Exit 0 when the property holds, 1 otherwise.
    #[command(group(ArgGroup::new("predicate").required(true).args(["mds", "involutory", "representative"])))]
    Check {
        #[arg(long)]
        mds: bool,
        #[arg(long)]
        involutory: bool,
        #[arg(long)]
        representative: bool,
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Split a matrix with nonzero entries as M = D1 * M1 * D2, with D1, D2
    /// diagonal, D2[1] = 1 and M1 a representative (all-ones first row and
    /// column).
    Decompose {
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Involutory certificate of a representative M1: the alpha-vector
    /// for which D1 * M1 * D2 can be involutory, or the first failed
    /// condition (non-QR diagonal ratio, asymmetric ratio, pairwise mismatch).
    Invcert {
        #[command(flatten)]
        input: MatrixInput,
    },
    /// The involutory member D1 * M1 * D2 of a certified representative,
    /// with D1 = (alpha_1, lambda_2, ..) and D2 = (1, alpha_2/lambda_2, ..).
    Member {
        /// lambda_2 .. lambda_n, comma separated.
        #[arg(long)]
        lambdas: String,
        /// alpha_1 .. alpha_n, comma separated; computed when omitted.
        #[arg(long)]
        cert: Option<String>,
        #[command(flatten)]
        input: MatrixInput,
    },
    /// Stream MDS matrices of a given order: representatives found by the
    /// search over interiors R, every MDS matrix (representatives times
    /// diagonal pairs), or every involutory MDS matrix (certified
    /// representatives times their member families).
    Enum {
        #[command(flatten)]
        task: Task,
        /// Refuse streams larger than this many matrices.
        #[arg(long)]
        limit: Option<u128>,
    },
    /// Count matrices found by the representative search without
    /// materializing them; parallel, with checkpoint and resume.
    Count {
        #[command(flatten)]
        task: Task,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Checkpoint file; an existing checkpoint for the same task is resumed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Stop after this many work blocks in this session.
        #[arg(long)]
        stop_after: Option<usize>,
        /// Omit timing so repeated runs are byte-identical.
        #[arg(long)]
        stable: bool,
    },
    /// Closed-form counts of 3x3 MDS matrices over F_{2^m}: representatives,
    /// all, involutory, non-involutory.
    CountFormula {
        #[arg(long)]
        m: u32,
        #[arg(long, value_parser = ["rep3", "mds3", "inv3", "noninv3"])]
        what: String,
    },
    /// Compare an enumerated count with the closed form (order 3) or the
    /// tabulated order-4 census over F_{2^m}. Exit 0 iff they agree.
    Verify {
        #[command(flatten)]
        task: Task,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
struct MatrixInput {
    /// Field, e.g. 2^4/0x13 or 3^2/1,0,1. Taken from a JSON matrix when omitted.
    #[arg(long, env = "MDSFORGE_FIELD")]
    field: Option<String>,
    /// Matrix as text (rows separated by ';', entries by ',') or JSON.
    #[arg(required_unless_present = "input", conflicts_with = "input")]
    matrix: Option<String>,
    /// Read the matrix from a file instead.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct Task {
    /// Field, e.g. 2^4/0x13.
    #[arg(long, env = "MDSFORGE_FIELD")]
    field: String,
    /// Matrix order n.
    #[arg(long)]
    order: usize,
    /// representatives, mds or involutory.
    #[arg(long, default_value = "representatives")]
    kind: String,
    /// Search route: auto picks the fastest for the order, literal scans
    /// every interior.
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    route: RouteArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Literal,
}

impl Task {
    fn spec(&self) -> Result<EnumSpec, Failure> {
        let field = Field::parse(&self.field).with_source(&self.field)?;
        let kind: Kind = self.kind.parse()?;
        let route = match self.route {
            RouteArg::Auto => Route::Auto,
            RouteArg::Literal => Route::Literal,
        };
        Ok(EnumSpec::new(field, self.order, kind)?.with_route(route))
    }
}

impl MatrixInput {
    fn read(&self) -> Result<SquareMatrix, Failure> {
        let text = match (&self.matrix, &self.input) {
            (Some(t), _) => t.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)?,
            (None, None) => unreachable!("clap requires one input"),
        };
        let text = text.trim();
        let explicit = match &self.field {
            Some(s) => Some(Field::parse(s).with_source(s)?),
            None => None,
        };
        if text.starts_with('{') {
            let value: Value = serde_json::from_str(text)
                .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: format!("matrix JSON: {e}") })
                .with_source(text)?;
            let m = SquareMatrix::from_json(&value)?;
            if let Some(f) = explicit {
                if &f != m.field() {
                    return Err(Error::FieldMismatch { left: f.label().into(), right: m.field().label().into() }.into());
                }
            }
            return Ok(m);
        }
        let field =
            explicit.ok_or_else(|| Error::Usage("no field given (use --field or MDSFORGE_FIELD)".into()))?;
        SquareMatrix::parse_text(&field, text).with_source(text)
    }
}

/// Comma-separated field elements, with positions relative to `text`.
fn parse_elems(field: &Field, text: &str) -> Result<Vec<Elem>, Failure> {
    let mut out = Vec::new();
    let mut pos = 0;
    for cell in text.split(',') {
        let at = pos + (cell.len() - cell.trim_start().len());
        let e = field
            .parse_elem(cell)
            .map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { pos: at, msg },
                other => other,
            })
            .with_source(text)?;
        out.push(e);
        pos += cell.len() + 1;
    }
    Ok(out)
}

fn elems_json(f: &Field, v: &[Elem]) -> Value {
    v.iter().map(|&e| Value::String(f.format_elem(e))).collect()
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn emit(out: &mut impl Write, command: &str, field: &str, payload: Value, status: Status) -> Result<Status, Failure> {
    OutputRecord::new(command, field, payload, status).write(out)?;
    Ok(status)
}

fn run(cli: Cli, out: &mut impl Write) -> Result<Status, Failure> {
    if cli.format == Format::Csv && !matches!(cli.command, Command::Enum { .. }) {
        return Err(Error::Usage("csv output is only available for enum".into()).into());
    }
    match cli.command {
        Command::Check { mds, involutory, representative: _, input } => {
            let m = input.read()?;
            let field = m.field().label();
            let (predicate, holds, mut payload) = if mds {
                let witness = first_zero_minor(&m);
                let report = witness.as_ref().map(|(r, c)| json!({"rows": one_based(r), "cols": one_based(c)}));
                ("mds", witness.is_none(), json!({"zero_minor": report}))
            } else if involutory {
                ("involutory", is_involutory(&m), json!({}))
            } else {
                let holds = is_representative_mds(&m)?;
                let violations: Vec<Value> = check_r(&interior(&m)?).iter().map(|v| v.to_json()).collect();
                let minor = if !holds && violations.is_empty() {
                    first_zero_minor(&m).map(|(r, c)| json!({"rows": one_based(&r), "cols": one_based(&c)}))
                } else {
                    None
                };
                ("representative", holds, json!({"violations": violations, "zero_minor": minor}))
            };
            payload["predicate"] = json!(predicate);
            payload["holds"] = json!(holds);
            emit(out, "check", field, payload, Status::of(holds))
        }
        Command::Decompose { input } => {
            let m = input.read()?;
            let t = decompose(&m)?;
            emit(out, "decompose", m.field().label(), t.to_json(), Status::Ok)
        }
        Command::Invcert { input } => {
            let m1 = input.read()?;
            let f = m1.field();
            match certify(&m1)? {
                Ok(cert) => {
                    let variants: Vec<Value> = cert.sign_variants().iter().map(|c| c.to_json()).collect();
                    let payload = json!({"certificate": cert.to_json(), "sign_variants": variants});
                    emit(out, "invcert", f.label(), payload, Status::Ok)
                }
                Err(refusal) => {
                    let payload = json!({"refusal": refusal.to_json(), "message": refusal.to_string()});
                    emit(out, "invcert", f.label(), payload, Status::False)
                }
            }
        }
        Command::Member { lambdas, cert, input } => {
            let m1 = input.read()?;
            let f = m1.field().clone();
            let lambdas = parse_elems(&f, &lambdas)?;
            let cert = match cert {
                Some(text) => InvolutoryCertificate::new(f.clone(), parse_elems(&f, &text)?)?,
                None => match certify(&m1)? {
                    Ok(c) => c,
                    Err(refusal) => {
                        let payload = json!({"refusal": refusal.to_json(), "message": refusal.to_string()});
                        return emit(out, "member", f.label(), payload, Status::False);
                    }
                },
            };
            let m = involutory_member(&m1, &cert, &lambdas)?;
            let payload = json!({
                "certificate": cert.to_json(),
                "lambdas": elems_json(&f, &lambdas),
                "matrix": m.to_json(),
            });
            emit(out, "member", f.label(), payload, Status::Ok)
        }
        Command::Enum { task, limit } => {
            let mut spec = task.spec()?;
            if let Some(limit) = limit {
                spec = spec.with_limit(limit);
            }
            enumerate(&spec, cli.format, out)
        }
        Command::Count { task, jobs, checkpoint, stop_after, stable } => {
            let spec = task.spec()?;
            let r = count(&spec, &CountOptions { workers: jobs, checkpoint, stop_after })?;
            let mut payload = json!({
                "order": spec.n,
                "kind": spec.kind.name(),
                "count": r.total.to_string(),
                "representatives": r.representatives.to_string(),
                "certified": r.certified.to_string(),
                "blocks": r.blocks,
                "blocks_done": r.blocks_done,
                "complete": r.complete,
                "resumed": r.resumed,
            });
            if !stable {
                payload["elapsed"] = json!(r.elapsed.as_secs_f64());
            }
            emit(out, "count", spec.field.label(), payload, Status::Ok)
        }
        Command::CountFormula { m, what } => {
            let formula: Formula = what.parse()?;
            let value = formula.eval_big(m)?;
            let field = Field::binary(m).map(|f| f.label().to_string()).unwrap_or_else(|_| format!("2^{m}"));
            let payload = json!({"m": m, "what": formula.name(), "value": value.to_string()});
            emit(out, "count-formula", &field, payload, Status::Ok)
        }
        Command::Verify { task, jobs } => {
            let spec = task.spec()?;
            let report = verify(&spec.field, spec.n, spec.kind, &CountOptions::workers(jobs))?;
            let status = if report.agrees { Status::Ok } else { Status::Disagree };
            emit(out, "verify", spec.field.label(), report.to_json(), status)
        }
    }
}

fn enumerate(spec: &EnumSpec, format: Format, out: &mut impl Write) -> Result<Status, Failure> {
    let label = spec.field.label();
    let n = spec.n;
    let mut failed: Option<Failure> = None;
    match format {
        Format::Jsonl => {
            stream(spec, &mut |m| match OutputRecord::new("enum", label, m.to_json(), Status::Ok).write(out) {
                Ok(()) => ControlFlow::Continue(()),
                Err(e) => {
                    failed = Some(e.into());
                    ControlFlow::Break(())
                }
            })?;
        }
        Format::Json => {
            let mut items = Vec::new();
            stream(spec, &mut |m| {
                items.push(m.to_json()["rows"].take());
                ControlFlow::Continue(())
            })?;
            let payload = json!({"order": n, "kind": spec.kind.name(), "count": items.len(), "matrices": items});
            emit(out, "enum", label, payload, Status::Ok)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            let mut header = vec!["field".to_string()];
            header.extend((1..=n).flat_map(|i| (1..=n).map(move |j| format!("m{i}{j}"))));
            w.write_record(&header)?;
            stream(spec, &mut |m| {
                let record = std::iter::once(label.to_string())
                    .chain(m.entries().iter().map(|&e| spec.field.format_elem(e)));
                match w.write_record(record) {
                    Ok(()) => ControlFlow::Continue(()),
                    Err(e) => {
                        failed = Some(e.into());
                        ControlFlow::Break(())
                    }
                }
            })?;
            w.flush()?;
        }
    }
    match failed {
        Some(f) => Err(f),
        None => Ok(Status::Ok),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    let flushed = out.flush();
    match result {
        Ok(status) => {
            if let Err(e) = flushed {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(status.exit_code())
        }
        Err(failure) => {
            if matches!(&failure.error, Error::Io(e) if e.kind() == io::ErrorKind::BrokenPipe) {
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", failure.render());
            ExitCode::from(failure.exit_code())
        }
    }
}
