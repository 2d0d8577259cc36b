//! Command-line front end. Every run prints one JSON envelope
//! `{"tool-version", "invocation", "result"}` (or `"error"` in place of
//! `"result"`), or the text and CSV renderings of the result.
//!
//! Exit codes: 0 when the computation ran, whatever its mathematical
//! outcome; 2 for invalid input; 1 for internal failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipfree_core::free::{free_norm, norming_function, FreeError, NormMethod};
use lipfree_core::lip::{lip_norm_with_pair, LipError};
use lipfree_core::probes::{
    combo_diameter, slice_diameter, ssd2p_witness, verify_ssd2p, ProbeError, ProbeOutcome,
    ProbeSystem, Slice,
};
use lipfree_core::transfer::{
    fltp_check, ltp_check, ltp_search, FltpKind, FltpViolation, LtpKind, LtpViolation, PairWeights,
    TransferError,
};
use lipfree_core::{FreeVector, LipFunction, MetricSpace, Rational, Scalar, SubsetMask};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::gallery::{run_gallery, GalleryError, GalleryId, GalleryParams};
use crate::io::{
    fmt, function_json, labels, load, parse_rational, to_canonical, vector_json, violation_json,
    FormatError, FunctionDoc, MetricDoc, SliceDoc, SystemDoc, VectorDoc, WeightsDoc,
};
use crate::report::GalleryReport;

#[derive(Debug, Parser)]
#[command(
    name = "lipfree",
    version,
    about = "Exact computations in Lipschitz-free spaces over finite metric spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lp,
    Flow,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ltp,
    Sltp,
    Fltp,
    Fsltp,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn gallery_id(s: &str) -> Result<GalleryId, String> {
    s.parse().map_err(|e: GalleryError| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the metric axioms.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Norm of a free-space vector.
    FreeNorm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Lp)]
        method: MethodArg,
    },
    /// Lipschitz norm of a function, with a pair attaining it.
    LipNorm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
    /// Diameter of one slice of the unit ball.
    SliceDiam {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        slice: PathBuf,
    },
    /// Diameter of a convex combination of slices.
    ComboDiam {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        slices: Vec<PathBuf>,
        /// Convex weights, one per slice; uniform when omitted.
        #[arg(long, num_args = 1.., value_parser = rational)]
        weights: Vec<Rational>,
    },
    /// Search for `f_i ± g ∈ S_i` with `‖g‖ >= 1 − eps`.
    Ssd2p {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        slices: Vec<PathBuf>,
        #[arg(long, value_parser = rational)]
        eps: Rational,
    },
    /// Two-point and four-point transfer inequalities.
    Check(CheckArgs),
    /// Reproduce one of the worked examples.
    Gallery {
        #[arg(long, value_parser = gallery_id)]
        id: GalleryId,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, value_parser = rational)]
        alpha: Option<Rational>,
        #[arg(long, value_parser = rational)]
        eps: Option<Rational>,
        #[arg(long = "n")]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Optimize a linear objective over a probe system.
    Probe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        system: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated labels: `N` for ltp/sltp, `A` for fltp/fsltp.
    #[arg(long, value_delimiter = ',')]
    pub set: Vec<String>,
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long, value_parser = rational)]
    pub eps: Rational,
    /// Pair weights (fltp/fsltp); zero when omitted.
    #[arg(long)]
    pub mu: Option<PathBuf>,
    /// Function files (fltp/fsltp), repeatable.
    #[arg(long = "f")]
    pub f: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Internal(String),
}

macro_rules! from_library {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Format(e.into())
            }
        }
    )*};
}

from_library!(FreeError, LipError, ProbeError, TransferError);

fn free_internal(e: &FreeError) -> bool {
    matches!(e, FreeError::Lp(_) | FreeError::UnexpectedStatus(_))
}

fn lip_internal(e: &LipError) -> bool {
    matches!(e, LipError::Free(f) if free_internal(f))
}

fn probe_internal(e: &ProbeError) -> bool {
    match e {
        ProbeError::Lp(_) | ProbeError::UnexpectedStatus(_) | ProbeError::Violation(_) => true,
        ProbeError::Free(f) => free_internal(f),
        ProbeError::Lip(l) => lip_internal(l),
        _ => false,
    }
}

fn transfer_internal(e: &TransferError) -> bool {
    matches!(e, TransferError::Lip(l) if lip_internal(l))
}

fn format_internal(e: &FormatError) -> bool {
    match e {
        FormatError::Free(f) => free_internal(f),
        FormatError::Lip(l) => lip_internal(l),
        FormatError::Probe(p) => probe_internal(p),
        FormatError::Transfer(t) => transfer_internal(t),
        _ => false,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let internal = match self {
            CliError::Usage(_) => false,
            CliError::Format(e) => format_internal(e),
            CliError::Gallery(e) => match e {
                GalleryError::Range(_) | GalleryError::UnknownId(_) => false,
                GalleryError::Unbounded(_) | GalleryError::Certificate(_) => true,
                GalleryError::Structure(_) => false,
                GalleryError::Free(f) => free_internal(f),
                GalleryError::Lip(l) => lip_internal(l),
                GalleryError::Probe(p) => probe_internal(p),
                GalleryError::Transfer(t) => transfer_internal(t),
            },
            CliError::Write { .. } | CliError::Csv(_) | CliError::Internal(_) => true,
        };
        if internal {
            1
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = if self.exit_code() == 2 {
            "invalid-input"
        } else {
            "internal"
        };
        json!({"kind": kind, "message": self.to_string()})
    }
}

/// A computed result and, when the command has one, its gallery report.
pub struct Outcome {
    pub result: Value,
    pub report: Option<GalleryReport>,
    /// Rows for the CSV rendering, header first.
    pub table: Option<Vec<Vec<String>>>,
}

impl From<Value> for Outcome {
    fn from(result: Value) -> Self {
        Self {
            result,
            report: None,
            table: None,
        }
    }
}

fn space(path: &Path) -> Result<MetricSpace, CliError> {
    Ok(load::<MetricDoc>(path)?.build()?)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

fn index(space: &MetricSpace, label: &str) -> Result<usize, CliError> {
    space
        .index_of(label)
        .ok_or_else(|| FormatError::UnknownLabel(label.to_string()).into())
}

fn pair_json<S: Scalar>(space: &MetricSpace<S>, (p, q): (usize, usize)) -> Value {
    labels(space, [p, q])
}

pub fn execute(cmd: &Command, mode: Mode) -> Result<Outcome, CliError> {
    match cmd {
        Command::Validate { input } => {
            let m = load::<MetricDoc>(input)?.build_unchecked()?;
            let report = m.validate();
            let violations: Vec<Value> = report
                .violations
                .iter()
                .map(|v| violation_json(&m, v))
                .collect();
            Ok(
                json!({"valid": report.is_valid(), "points": m.len(), "violations": violations})
                    .into(),
            )
        }
        Command::FreeNorm { input, mu, method } => {
            let m = space(input)?;
            let mu = load::<VectorDoc>(mu)?.build(&m)?;
            match mode {
                Mode::Exact => free_norm_cmd(&m, &mu, *method, mode),
                Mode::Float => free_norm_cmd(&m.convert::<f64>(), &mu.convert(), *method, mode),
            }
        }
        Command::LipNorm { input, f } => {
            let m = space(input)?;
            let f = load::<FunctionDoc>(f)?.build(&m)?;
            match mode {
                Mode::Exact => lip_norm_cmd(&m, &f),
                Mode::Float => lip_norm_cmd(&m.convert::<f64>(), &f.convert()),
            }
        }
        Command::SliceDiam { input, slice } => {
            let m = space(input)?;
            let s = load::<SliceDoc>(slice)?.build(&m)?;
            match mode {
                Mode::Exact => slice_diam_cmd(&m, &s, mode),
                Mode::Float => slice_diam_cmd(&m.convert::<f64>(), &s.convert(), mode),
            }
        }
        Command::ComboDiam {
            input,
            slices,
            weights,
        } => {
            let m = space(input)?;
            let ss = slices
                .iter()
                .map(|p| Ok(load::<SliceDoc>(p)?.build(&m)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            let weights = if weights.is_empty() {
                let n = Rational::from_integer((ss.len() as i64).into());
                vec![Rational::from_integer(1.into()) / n; ss.len()]
            } else if weights.len() == ss.len() {
                weights.clone()
            } else {
                return Err(CliError::Usage(format!(
                    "{} weights given for {} slices",
                    weights.len(),
                    ss.len()
                )));
            };
            let combo: Vec<(Slice, Rational)> = ss.into_iter().zip(weights).collect();
            match mode {
                Mode::Exact => combo_diam_cmd(&m, &combo, mode),
                Mode::Float => {
                    let c: Vec<(Slice<f64>, f64)> = combo
                        .iter()
                        .map(|(s, w)| (s.convert(), f64::from_rational(w)))
                        .collect();
                    combo_diam_cmd(&m.convert::<f64>(), &c, mode)
                }
            }
        }
        Command::Ssd2p { input, slices, eps } => {
            let m = space(input)?;
            let ss = slices
                .iter()
                .map(|p| Ok(load::<SliceDoc>(p)?.build(&m)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            match mode {
                Mode::Exact => ssd2p_cmd(&m, &ss, eps, mode),
                Mode::Float => {
                    let c: Vec<Slice<f64>> = ss.iter().map(Slice::convert).collect();
                    ssd2p_cmd(&m.convert::<f64>(), &c, &f64::from_rational(eps), mode)
                }
            }
        }
        Command::Check(args) => check_cmd(args, mode),
        Command::Gallery {
            id,
            size,
            alpha,
            eps,
            n,
            seed,
            trials,
        } => {
            if mode == Mode::Float {
                return Err(CliError::Usage(
                    "the gallery runs in exact mode only".into(),
                ));
            }
            let params = GalleryParams {
                size: *size,
                alpha: alpha.clone(),
                eps: eps.clone(),
                n: *n,
                seed: *seed,
                trials: *trials,
            };
            let report = run_gallery(*id, &params)?;
            Ok(Outcome {
                result: json!({"passed": report.passed(), "report": report.to_json()}),
                report: Some(report),
                table: None,
            })
        }
        Command::Probe { input, system } => {
            let m = space(input)?;
            let sys = load::<SystemDoc>(system)?.build(&m)?;
            match mode {
                Mode::Exact => probe_cmd(&m, &sys, mode),
                Mode::Float => probe_cmd(&m.convert::<f64>(), &sys.convert(), mode),
            }
        }
    }
}

fn free_norm_cmd<S: Scalar>(
    m: &MetricSpace<S>,
    mu: &FreeVector<S>,
    method: MethodArg,
    mode: Mode,
) -> Result<Outcome, CliError> {
    let out = match method {
        MethodArg::Lp => {
            let (v, f) = norming_function(m, mu)?;
            json!({"method": "lp", "norm": fmt(&v), "witness": function_json(m, &f), "mode": mode_name(mode)})
        }
        MethodArg::Flow => {
            let v = free_norm(m, mu, NormMethod::Flow)?;
            json!({"method": "flow", "norm": fmt(&v), "mode": mode_name(mode)})
        }
        MethodArg::Both => {
            let lp = free_norm(m, mu, NormMethod::Lp)?;
            let flow = free_norm(m, mu, NormMethod::Flow)?;
            let agree = (lp.clone() - flow.clone()).is_negligible();
            json!({"lp": fmt(&lp), "flow": fmt(&flow), "agree": agree, "mode": mode_name(mode)})
        }
    };
    Ok(out.into())
}

fn lip_norm_cmd<S: Scalar>(m: &MetricSpace<S>, f: &LipFunction<S>) -> Result<Outcome, CliError> {
    let (v, pair) = lip_norm_with_pair(m, f)?;
    let pair = pair.map_or(Value::Null, |p| pair_json(m, p));
    Ok(json!({"norm": fmt(&v), "pair": pair}).into())
}

fn slice_diam_cmd<S: Scalar>(
    m: &MetricSpace<S>,
    s: &Slice<S>,
    mode: Mode,
) -> Result<Outcome, CliError> {
    let d = slice_diameter(m, s)?;
    Ok(json!({
        "value": fmt(&d.value),
        "pair": pair_json(m, d.pair),
        "witness": {"f": function_json(m, &d.f[0]), "g": function_json(m, &d.g[0])},
        "slice": vector_json(m, s.functional()),
        "mode": mode_name(mode),
    })
    .into())
}

fn combo_diam_cmd<S: Scalar>(
    m: &MetricSpace<S>,
    combo: &[(Slice<S>, S)],
    mode: Mode,
) -> Result<Outcome, CliError> {
    let d = combo_diameter(m, combo)?;
    let fs: Vec<Value> = d.f.iter().map(|f| function_json(m, f)).collect();
    let gs: Vec<Value> = d.g.iter().map(|g| function_json(m, g)).collect();
    Ok(json!({
        "value": fmt(&d.value),
        "pair": pair_json(m, d.pair),
        "witness": {"f": fs, "g": gs},
        "mode": mode_name(mode),
    })
    .into())
}

fn ssd2p_cmd<S: Scalar>(
    m: &MetricSpace<S>,
    slices: &[Slice<S>],
    eps: &S,
    mode: Mode,
) -> Result<Outcome, CliError> {
    let report = ssd2p_witness(m, slices, eps)?;
    let mut table = vec![vec!["p".to_string(), "q".to_string(), "slack".to_string()]];
    let rows: Vec<Value> = report
        .table
        .iter()
        .map(|r| {
            let slack = r.slack.as_ref().map(fmt);
            table.push(vec![
                m.label(r.pair.0).to_string(),
                m.label(r.pair.1).to_string(),
                slack.clone().unwrap_or_else(|| "infeasible".into()),
            ]);
            json!({"pair": pair_json(m, r.pair), "slack": slack})
        })
        .collect();
    let (witness, verified) = match &report.witness {
        Some(w) => (
            json!({
                "f": w.f.iter().map(|f| function_json(m, f)).collect::<Vec<_>>(),
                "g": function_json(m, &w.g),
                "pair": pair_json(m, w.pair),
                "slack": fmt(&w.slack),
            }),
            Value::Bool(verify_ssd2p(m, slices, eps, w)?),
        ),
        None => (Value::Null, Value::Null),
    };
    Ok(Outcome {
        result: json!({
            "feasible": report.witness.is_some(),
            "witness": witness,
            "verified": verified,
            "table": rows,
            "mode": mode_name(mode),
        }),
        report: None,
        table: Some(table),
    })
}

fn probe_cmd<S: Scalar>(
    m: &MetricSpace<S>,
    sys: &ProbeSystem<S>,
    mode: Mode,
) -> Result<Outcome, CliError> {
    let out = match sys.bound_probe(m)? {
        ProbeOutcome::Optimal { value, witness } => {
            let verified = sys.verify_witness(m, &witness, false).is_ok();
            json!({
                "status": "optimal",
                "value": fmt(&value),
                "verified": verified,
                "witness": {
                    "functions": witness.functions.iter().map(|f| function_json(m, f)).collect::<Vec<_>>(),
                    "scalars": witness.scalars.iter().map(fmt).collect::<Vec<_>>(),
                },
                "mode": mode_name(mode),
            })
        }
        ProbeOutcome::Infeasible { farkas } => json!({
            "status": "infeasible",
            "farkas": farkas.iter().map(fmt).collect::<Vec<_>>(),
            "mode": mode_name(mode),
        }),
        ProbeOutcome::Unbounded => json!({"status": "unbounded", "mode": mode_name(mode)}),
    };
    Ok(out.into())
}

fn ltp_violation_json<S: Scalar>(m: &MetricSpace<S>, v: &LtpViolation) -> Value {
    match *v {
        LtpViolation::Pair { x, y } => json!({"type": "pair", "points": labels(m, [x, y])}),
        LtpViolation::Quad { x, y, z, w } => {
            json!({"type": "quad", "points": labels(m, [x, y, z, w])})
        }
    }
}

fn fltp_violation_json<S: Scalar>(m: &MetricSpace<S>, v: &FltpViolation<S>) -> Value {
    match v {
        FltpViolation::Mass(mass) => json!({"type": "mass", "value": fmt(mass)}),
        FltpViolation::Pair { x, y, i } => {
            json!({"type": "pair", "points": labels(m, [*x, *y]), "functions": [i]})
        }
        FltpViolation::Quad { x, y, z, w, i, j } => json!({
            "type": "quad",
            "points": labels(m, [*x, *y, *z, *w]),
            "functions": [i, j],
        }),
    }
}

fn check_cmd(args: &CheckArgs, mode: Mode) -> Result<Outcome, CliError> {
    let m = space(&args.input)?;
    let members = args
        .set
        .iter()
        .filter(|s| !s.is_empty())
        .map(|l| index(&m, l.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let set = SubsetMask::from_indices(m.len(), &members);
    let endpoints = match (&args.u, &args.v) {
        (Some(u), Some(v)) => Some((index(&m, u)?, index(&m, v)?)),
        (None, None) => None,
        _ => return Err(CliError::Usage("give both --u and --v, or neither".into())),
    };
    let kind_name = match args.kind {
        KindArg::Ltp => "ltp",
        KindArg::Sltp => "sltp",
        KindArg::Fltp => "fltp",
        KindArg::Fsltp => "fsltp",
    };
    let fs = args
        .f
        .iter()
        .map(|p| Ok(load::<FunctionDoc>(p)?.build(&m)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mu = match &args.mu {
        Some(p) => load::<WeightsDoc>(p)?.build(&m)?,
        None => PairWeights::zero(&m),
    };
    let mut out = match mode {
        Mode::Exact => check_generic(&m, args.kind, &set, &args.eps, endpoints, &mu, &fs)?,
        Mode::Float => {
            let fs: Vec<LipFunction<f64>> = fs.iter().map(LipFunction::convert).collect();
            check_generic(
                &m.convert::<f64>(),
                args.kind,
                &set,
                &f64::from_rational(&args.eps),
                endpoints,
                &mu.convert(),
                &fs,
            )?
        }
    };
    if let Value::Object(map) = &mut out {
        map.insert("kind".into(), Value::String(kind_name.into()));
        map.insert("set".into(), labels(&m, members));
        map.insert("mode".into(), Value::String(mode_name(mode).into()));
    }
    Ok(out.into())
}

fn check_generic<S: Scalar>(
    m: &MetricSpace<S>,
    kind: KindArg,
    set: &SubsetMask,
    eps: &S,
    endpoints: Option<(usize, usize)>,
    mu: &PairWeights<S>,
    fs: &[LipFunction<S>],
) -> Result<Value, CliError> {
    let ltp = match kind {
        KindArg::Ltp => Some(LtpKind::Ltp),
        KindArg::Sltp => Some(LtpKind::Sltp),
        _ => None,
    };
    if let Some(kind) = ltp {
        return Ok(match endpoints {
            Some((u, v)) => {
                let c = ltp_check(m, kind, set, eps, u, v)?;
                json!({
                    "pass": c.passed(),
                    "u": m.label(u),
                    "v": m.label(v),
                    "violation": c.violation().map(|x| ltp_violation_json(m, x)),
                })
            }
            None => {
                let found = ltp_search(m, kind, set, eps)?;
                json!({
                    "pass": found.is_some(),
                    "witness": found.map(|p| pair_json(m, p)),
                })
            }
        });
    }
    let Some((u, v)) = endpoints else {
        return Err(CliError::Usage("fltp and fsltp need --u and --v".into()));
    };
    let kind = if kind == KindArg::Fltp {
        FltpKind::Fltp
    } else {
        FltpKind::Fsltp
    };
    let c = fltp_check(m, kind, mu, eps, fs, set, u, v)?;
    Ok(json!({
        "pass": c.passed(),
        "u": m.label(u),
        "v": m.label(v),
        "mass": fmt(&mu.mass_touching(set)),
        "violation": c.violation().map(|x| fltp_violation_json(m, x)),
    }))
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate { .. } => "validate",
        Command::FreeNorm { .. } => "free-norm",
        Command::LipNorm { .. } => "lip-norm",
        Command::SliceDiam { .. } => "slice-diam",
        Command::ComboDiam { .. } => "combo-diam",
        Command::Ssd2p { .. } => "ssd2p",
        Command::Check(_) => "check",
        Command::Gallery { .. } => "gallery",
        Command::Probe { .. } => "probe",
    }
}

fn envelope(invocation: Value, key: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert(
        "tool-version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    map.insert("invocation".into(), invocation);
    map.insert(key.into(), body);
    Value::Object(map)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_text(out: &Outcome) -> String {
    if let Some(r) = &out.report {
        return r.to_text();
    }
    match &out.result {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}: {}\n", scalar_text(v)))
            .collect(),
        other => format!("{}\n", scalar_text(other)),
    }
}

fn render_csv(out: &Outcome) -> Result<String, CliError> {
    if let Some(r) = &out.report {
        return Ok(r.to_csv()?);
    }
    let rows = match &out.table {
        Some(t) => t.clone(),
        None => {
            let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
            if let Value::Object(map) = &out.result {
                rows.extend(map.iter().map(|(k, v)| vec![k.clone(), scalar_text(v)]));
            }
            rows
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let invocation_args: Vec<Value> = argv
        .iter()
        .skip(1)
        .map(|a| Value::String(a.clone()))
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let body = json!({"kind": "invalid-input", "message": e.to_string().trim_end()});
            let inv = json!({"subcommand": Value::Null, "args": invocation_args});
            print!("{}", to_canonical(&envelope(inv, "error", body)));
            return 2;
        }
    };
    if let Some(n) = cli.global.threads {
        if n == 0 {
            let err = CliError::Usage("--threads must be positive".into());
            let inv = json!({"subcommand": subcommand_name(&cli.command), "args": invocation_args});
            print!("{}", to_canonical(&envelope(inv, "error", err.to_json())));
            return err.exit_code();
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let inv = json!({"subcommand": subcommand_name(&cli.command), "args": invocation_args});
    let result = execute(&cli.command, cli.global.mode).and_then(|out| {
        let text = match cli.global.format {
            Format::Json => to_canonical(&envelope(inv.clone(), "result", out.result.clone())),
            Format::Text => render_text(&out),
            Format::Csv => render_csv(&out)?,
        };
        emit(&text, cli.global.output.as_ref())
    });
    match result {
        Ok(()) => 0,
        Err(err) => {
            print!("{}", to_canonical(&envelope(inv, "error", err.to_json())));
            err.exit_code()
        }
    }
}
