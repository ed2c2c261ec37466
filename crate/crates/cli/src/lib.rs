//! Batch verification runs over the `lkhol` library. Each command writes one
//! JSON report and maps its verdict to an exit status.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lkhol::classify::{
    build_family, catalog, is_holonomy_realizable, match_algebra, ricci_flat_condition, AlgebraDescriptor, MatchResult,
};
use lkhol::curvspace::{berger_check, SOLVER_TOL};
use lkhol::geometry::{
    christoffel, generic_inverse, infinitesimal_holonomy, ppwave_check, torsion_defect, walker_inverse, witt_frame,
    MetricJet, JET_TOL, SPAN_TOL,
};
use lkhol::lie::{weak_irreducibility_falsifier, AlgebraFile, MatrixAlgebra};
use lkhol::potentials::{
    build_potential, metric_from_spec, oriented_lines_metric, potential_order, small_dim_metric, spec_for_descriptor,
    LinesVariant, PotentialSpec, SmallDim,
};
use lkhol::symspace::{canonical_pair, symspace_report, SymFamily, SYM_TOL};
use lkhol::{conventions, Jet, Tolerances, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

/// Holonomy algebras of Lorentz-Kähler metrics, verified numerically.
#[derive(Debug, Parser)]
#[command(name = "lkhol", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Jet truncation order of the potential.
    #[arg(long, global = true)]
    pub order: Option<u32>,
    /// Covariant-derivative depth for the holonomy span.
    #[arg(long, global = true)]
    pub rmax: Option<u32>,
    /// Tolerance for span comparisons and validation defects.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Literal,
    Hermitized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    A,
    B,
    C,
    D,
    E,
    F,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    /// Potential or metric file.
    #[arg(long, alias = "metric")]
    pub potential: Option<PathBuf>,
    /// Descriptor whose constructed potential is used (expectation defaults to it).
    #[arg(long)]
    pub algebra: Option<PathBuf>,
    /// Oriented-lines variant; overrides the file.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infinitesimal holonomy of a metric, matched against the families.
    Holonomy {
        #[command(flatten)]
        metric: MetricArgs,
        /// Expected descriptor.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Identify an algebra or descriptor.
    Classify {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        expect: Option<PathBuf>,
        /// Random trials of the weak-irreducibility falsifier (needs --seed).
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
    /// Berger test of an algebra or descriptor.
    Berger {
        #[arg(long)]
        algebra: PathBuf,
        /// JSON boolean with the expected outcome.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Complex pp-wave detectors.
    Ppwave {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Transvection algebra of a canonical symmetric pair.
    Symspace {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    /// Metric sanity: Hermitian, Kähler, Walker form, frame, inverse.
    Validate {
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Every holonomy family for a given n with dimensions.
    Catalog {
        #[arg(long)]
        n: usize,
    },
}

/// A metric given by a potential or by one of the built-in fixtures.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricInput {
    Potential(PotentialSpec),
    Fixture(Fixture),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "fixture", rename_all = "snake_case")]
pub enum Fixture {
    SmallDim {
        which: SmallDim,
        #[serde(default, with = "lkhol::serial::complex")]
        gamma: C64,
    },
    OrientedLines {
        #[serde(default = "hermitized")]
        variant: LinesVariant,
    },
}

fn hermitized() -> LinesVariant {
    LinesVariant::Hermitized
}

/// An algebra given explicitly or by its family descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraInput {
    Descriptor(AlgebraDescriptor),
    Explicit(AlgebraFile),
}

#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<lkhol::Error> for InputError {
    fn from(e: lkhol::Error) -> Self {
        InputError(e.to_string())
    }
}

type Res<T> = std::result::Result<T, InputError>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Res<T> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Outcome of one command.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    conventions_digest: String,
    command: &'static str,
    config: &'a Common,
    tolerances: Value,
    verdict: &'static str,
    result: Value,
}

fn tolerances(common: &Common) -> Value {
    json!({
        "user": common.tol,
        "library": Tolerances::default(),
        "jet": JET_TOL,
        "span": SPAN_TOL,
        "curvature_solver": SOLVER_TOL,
        "symmetric_space": SYM_TOL,
    })
}

/// `None` means no expectation was checked.
fn verdict(ok: Option<bool>) -> (&'static str, i32) {
    match ok {
        None => ("no_expectation", EXIT_OK),
        Some(true) => ("verified", EXIT_OK),
        Some(false) => ("mismatch", EXIT_MISMATCH),
    }
}

struct LoadedMetric {
    source: Value,
    metric: MetricJet,
    potential: Option<Jet>,
    r_max: u32,
    expect: Option<AlgebraDescriptor>,
}

fn resolve_input(args: &MetricArgs) -> Res<(MetricInput, Option<AlgebraDescriptor>)> {
    let (input, expect) = match (&args.potential, &args.algebra) {
        (Some(p), None) => (read_json::<MetricInput>(p)?, None),
        (None, Some(a)) => {
            let d: AlgebraDescriptor = read_json(a)?;
            (MetricInput::Potential(spec_for_descriptor(&d)?), Some(d))
        }
        (None, None) if args.variant.is_some() => (MetricInput::Fixture(Fixture::OrientedLines { variant: hermitized() }), None),
        _ => return Err(InputError("give exactly one of --potential/--metric or --algebra".into())),
    };
    let input = match (input, args.variant) {
        (MetricInput::Fixture(Fixture::OrientedLines { .. }), Some(v)) => {
            let variant = match v {
                Variant::Literal => LinesVariant::Literal,
                Variant::Hermitized => LinesVariant::Hermitized,
            };
            MetricInput::Fixture(Fixture::OrientedLines { variant })
        }
        (_, Some(_)) => return Err(InputError("--variant applies to the oriented-lines fixture only".into())),
        (i, None) => i,
    };
    Ok((input, expect))
}

fn load_metric(args: &MetricArgs, common: &Common) -> Res<LoadedMetric> {
    let (input, expect) = resolve_input(args)?;
    let r_max = common.rmax.unwrap_or(match &input {
        MetricInput::Potential(s) => s.suggested_rmax(),
        MetricInput::Fixture(_) => 6,
    });
    let order = common.order.unwrap_or(potential_order(r_max));
    if order < r_max + 2 {
        return Err(InputError(format!("order {order} supports at most {} covariant derivatives", order.saturating_sub(2))));
    }
    let source = serde_json::to_value(&input).map_err(|e| InputError(e.to_string()))?;
    let (metric, potential) = match &input {
        MetricInput::Potential(spec) => (metric_from_spec(spec, order)?, Some(build_potential(spec, order)?)),
        MetricInput::Fixture(Fixture::SmallDim { which, gamma }) => (small_dim_metric(*which, *gamma, order)?, None),
        MetricInput::Fixture(Fixture::OrientedLines { variant }) => {
            let lines = oriented_lines_metric(*variant, order);
            let defects = format!("hermitian defect {:.3e}, Kaehler defect {:.3e}", lines.hermitian_defect, lines.kaehler_defect);
            (lines.metric.map_err(|e| InputError(format!("{e} ({defects})")))?, None)
        }
    };
    Ok(LoadedMetric { source, metric, potential, r_max, expect })
}

fn match_summary(res: &MatchResult) -> Value {
    match res {
        MatchResult::Matched { family, n, m, r, dim_k, dim, .. } => {
            json!({"status": "matched", "family": family, "n": n, "m": m, "r": r, "dim_k": dim_k, "dim": dim})
        }
        MatchResult::Unknown { dim, reason } => json!({"status": "unknown", "dim": dim, "reason": reason}),
    }
}

/// Same family and the same `(m, r, dim k)` as `want`.
fn agrees(res: &MatchResult, want: &AlgebraDescriptor) -> bool {
    match res {
        MatchResult::Matched { family, m, r, dim_k, .. } => {
            *family == want.family() && *m == want.m() && *r == want.r() && *dim_k == want.dim_k()
        }
        MatchResult::Unknown { .. } => false,
    }
}

fn load_algebra(path: &Path) -> Res<(MatrixAlgebra, Option<AlgebraDescriptor>)> {
    match read_json::<AlgebraInput>(path)? {
        AlgebraInput::Descriptor(d) => {
            d.validate()?;
            Ok((build_family(&d)?, Some(d)))
        }
        AlgebraInput::Explicit(f) => Ok((MatrixAlgebra::from_file(&f, 1e-10)?, None)),
    }
}

fn holonomy(args: &MetricArgs, expect: Option<&PathBuf>, common: &Common) -> Res<(Value, Option<bool>)> {
    let lm = load_metric(args, common)?;
    let want = match expect {
        Some(p) => Some(read_json::<AlgebraDescriptor>(p)?),
        None => lm.expect.clone(),
    };
    let rep = infinitesimal_holonomy(&lm.metric, lm.r_max)?;
    let res = match_algebra(&rep.algebra);
    let mut ok = None;
    let mut same_span = None;
    if let Some(w) = &want {
        let built = build_family(w)?;
        let span = rep.algebra.same_span(&built, common.tol);
        same_span = Some(span);
        ok = Some(rep.stabilized && agrees(&res, w));
    }
    let result = json!({
        "source": lm.source,
        "r_max": lm.r_max,
        "order": lm.metric.order(),
        "dims_by_order": rep.dims_by_order,
        "stabilized": rep.stabilized,
        "closure_added": rep.closure_added,
        "dim": rep.algebra.dim(),
        "match": match_summary(&res),
        "expected": want,
        "same_span_as_expected": same_span,
        "algebra": rep.algebra.to_file(),
    });
    Ok((result, ok))
}

fn classify(path: &Path, expect: Option<&PathBuf>, trials: usize, common: &Common) -> Res<(Value, Option<bool>)> {
    if trials > 0 && common.seed.is_none() {
        return Err(InputError("--trials needs --seed".into()));
    }
    let (alg, desc) = load_algebra(path)?;
    let res = match_algebra(&alg);
    let want = match expect {
        Some(p) => Some(read_json::<AlgebraDescriptor>(p)?),
        None => desc.clone(),
    };
    let ok = want.as_ref().map(|w| agrees(&res, w));
    let matched = res.descriptor();
    let realizability = matched.map(is_holonomy_realizable);
    let ricci_flat = matched.map(ricci_flat_condition).transpose()?;
    let falsifier = match common.seed {
        Some(seed) if trials > 0 => Some(weak_irreducibility_falsifier(&alg, trials, seed)),
        _ => None,
    };
    let result = json!({
        "dim": alg.dim(),
        "closure_defect": alg.closure_defect(),
        "unitarity_defect": alg.unitarity_defect(),
        "match": match_summary(&res),
        "realizability": realizability,
        "ricci_flat": ricci_flat,
        "weak_irreducibility": falsifier,
        "expected": want,
    });
    Ok((result, ok))
}

fn berger(path: &Path, expect: Option<&PathBuf>) -> Res<(Value, Option<bool>)> {
    let (alg, desc) = load_algebra(path)?;
    let rep = berger_check(&alg);
    let want = match (expect, &desc) {
        (Some(p), _) => Some(read_json::<bool>(p)?),
        (None, Some(_)) => Some(true),
        (None, None) => None,
    };
    let result = json!({
        "dim": alg.dim(),
        "dim_r_space": rep.dim_r_space,
        "generated_dim": rep.generated_dim,
        "is_berger": rep.is_berger,
        "realizability": desc.as_ref().map(is_holonomy_realizable),
        "expected_berger": want,
    });
    Ok((result, want.map(|w| w == rep.is_berger)))
}

fn ppwave(args: &MetricArgs, expect: Option<&PathBuf>, common: &Common) -> Res<(Value, Option<bool>)> {
    let lm = load_metric(args, common)?;
    let rep = ppwave_check(&lm.metric, lm.potential.as_ref(), lm.r_max)?;
    let want = expect.map(|p| read_json::<bool>(p)).transpose()?;
    let ok = rep.consistent && want.is_none_or(|w| w == rep.cond1);
    let result = json!({"source": lm.source, "r_max": lm.r_max, "report": rep, "expected_ppwave": want});
    Ok((result, Some(ok)))
}

fn symspace(family: FamilyArg, n: usize, m: usize) -> Res<(Value, Option<bool>)> {
    let f = match family {
        FamilyArg::A => SymFamily::A,
        FamilyArg::B => SymFamily::B,
        FamilyArg::C => SymFamily::C,
        FamilyArg::D => SymFamily::D,
        FamilyArg::E => SymFamily::E,
        FamilyArg::F => SymFamily::F,
    };
    let pair = canonical_pair(f, n, m)?;
    let rep = symspace_report(&pair, Some(f), Some(m))?;
    let cy = matches!(f, SymFamily::A | SymFamily::B | SymFamily::D | SymFamily::E);
    let ok = rep.jacobi && rep.g_equals_rmm && rep.calabi_yau == cy;
    let hol = match_algebra(&pair.g);
    let result = json!({"report": rep, "holonomy_match": match_summary(&hol), "expected_calabi_yau": cy});
    Ok((result, Some(ok)))
}

fn validate(args: &MetricArgs, common: &Common) -> Res<(Value, Option<bool>)> {
    // a candidate that fails to be a Kähler metric is a finding, not an input error
    if let (MetricInput::Fixture(Fixture::OrientedLines { variant }), _) = resolve_input(args)? {
        let lines = oriented_lines_metric(variant, common.order.unwrap_or(8));
        if let Err(e) = &lines.metric {
            let result = json!({
                "source": {"fixture": "oriented_lines", "variant": variant},
                "hermitian_defect": lines.hermitian_defect,
                "kaehler_defect": lines.kaehler_defect,
                "error": e.to_string(),
                "passed": false,
            });
            return Ok((result, Some(false)));
        }
    }
    let lm = load_metric(args, common)?;
    let m = &lm.metric;
    let scale = m.h.max_abs().max(1.0);
    let herm = m.hermitian_defect();
    let kaehler = m.kaehler_defect();
    let torsion = torsion_defect(&christoffel(m)?);
    let generic = generic_inverse(m)?;
    let (inverse_gap, frame_gram) = if m.walker_form {
        let w = walker_inverse(m)?;
        (Some(w.sub(&generic).max_abs()), Some(witt_frame(m)?.gram_defect(m)))
    } else {
        (None, None)
    };
    let tol = common.tol * scale;
    let ok = herm <= tol
        && kaehler <= tol
        && torsion <= tol
        && inverse_gap.is_none_or(|g| g <= tol)
        && frame_gram.is_none_or(|g| g <= tol);
    let result = json!({
        "source": lm.source,
        "order": m.order(),
        "walker_form": m.walker_form,
        "hermitian_defect": herm,
        "kaehler_defect": kaehler,
        "torsion_defect": torsion,
        "walker_vs_generic_inverse": inverse_gap,
        "frame_gram_defect": frame_gram,
        "passed": ok,
    });
    Ok((result, Some(ok)))
}

fn dispatch(cli: &Cli) -> Res<(&'static str, Value, Option<bool>)> {
    let common = &cli.common;
    if !(common.tol > 0.0 && common.tol.is_finite()) {
        return Err(InputError(format!("--tol must be positive, got {}", common.tol)));
    }
    Ok(match &cli.command {
        Command::Holonomy { metric, expect } => {
            let (v, ok) = holonomy(metric, expect.as_ref(), common)?;
            ("holonomy", v, ok)
        }
        Command::Classify { algebra, expect, trials } => {
            let (v, ok) = classify(algebra, expect.as_ref(), *trials, common)?;
            ("classify", v, ok)
        }
        Command::Berger { algebra, expect } => {
            let (v, ok) = berger(algebra, expect.as_ref())?;
            ("berger", v, ok)
        }
        Command::Ppwave { metric, expect } => {
            let (v, ok) = ppwave(metric, expect.as_ref(), common)?;
            ("ppwave", v, ok)
        }
        Command::Symspace { family, n, m } => {
            let (v, ok) = symspace(*family, *n, *m)?;
            ("symspace", v, ok)
        }
        Command::Validate { metric } => {
            let (v, ok) = validate(metric, common)?;
            ("validate", v, ok)
        }
        Command::Catalog { n } => {
            let entries = catalog(*n)?;
            ("catalog", json!({"n": n, "families": entries}), None)
        }
    })
}

/// Write via a sibling temporary file and rename, so readers never see a partial report.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

pub fn run(cli: &Cli) -> Outcome {
    let (command, result, ok) = match dispatch(cli) {
        Ok(x) => x,
        Err(e) => return Outcome { code: EXIT_INPUT, report: format!("error: {e}") },
    };
    let (word, code) = verdict(ok);
    let report = Report {
        tool: "lkhol",
        version: conventions::VERSION,
        conventions_digest: conventions::digest(),
        command,
        config: &cli.common,
        tolerances: tolerances(&cli.common),
        verdict: word,
        result,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports are plain JSON") + "\n";
    if let Some(path) = &cli.common.out {
        if let Err(e) = write_atomic(path, &text) {
            return Outcome { code: EXIT_INPUT, report: format!("error: {}: {e}", path.display()) };
        }
    }
    Outcome { code, report: text }
}
