//! `phmap`: bounds, roots, extremal maps and verification reports for
//! pluriharmonic mappings of the unit ball.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pluriharmonic::bounds::{self, BoundParams};
use pluriharmonic::extremal::{self, covering_sharpness_check, sharpness_gap_lower, sharpness_gap_upper};
use pluriharmonic::lif::{self, check_membership_ph, coefficient_bounds_check, norm_order_estimate};
use pluriharmonic::mapfile::{load_map, MapSpec};
use pluriharmonic::verify::{self, SampleConfig};
use pluriharmonic::{Complex64, Error, ExtremalFamily, ExtremalSpec, MapModel, OrderBudget, VerificationReport};

use output::{emit, json, Cell, Format, Table};

#[derive(Parser)]
#[command(name = "phmap", version, about = "Bounds and sampled checks for pluriharmonic mappings of the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Seed of the sampling generator
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Roots k_n of -4n log(1-k) = (4n-1) k/(1-k)
    Kn(KnArgs),
    /// Distortion, growth and Jacobian bounds on a radius grid
    Bounds(BoundsArgs),
    /// Covering radius by quadrature, with the closed form at n = 1
    Cover(CoverArgs),
    /// Run verification suites on a map
    Verify(VerifyArgs),
    /// Estimate the norm order of the holomorphic part of a map
    Order(OrderArgs),
    /// Univalent ball radius of a quasiregular map
    Qr(QrArgs),
    /// Extremal maps and their sharpness gaps
    Extremal(ExtremalArgs),
}

#[derive(Args)]
struct KnArgs {
    /// Dimensions: `3`, `1..5` or `1,2,4`
    #[arg(long, default_value = "1..5")]
    n: String,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Dimension
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Norm order bound alpha >= 1
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Dilatation bound 0 <= k < 1
    #[arg(long, default_value_t = 0.0)]
    k: f64,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// ||[Dh(0)]^-1||
    #[arg(long, default_value_t = 1.0)]
    norm_dh0_inv: f64,
    /// |det Dh(0)|
    #[arg(long, default_value_t = 1.0)]
    det_dh0: f64,
    /// First radius
    #[arg(long, default_value_t = 0.0)]
    r_start: f64,
    /// Last radius
    #[arg(long, default_value_t = 0.99)]
    r_stop: f64,
    /// Number of radii
    #[arg(long, default_value_t = 101)]
    r_count: usize,
}

#[derive(Args)]
struct CoverArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Radius in (0, 1]
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// |det Dh(0)|; defaults to 1/(1+k) at n = 1 and 1 otherwise
    #[arg(long)]
    det_dh0: Option<f64>,
    /// ||Dh(0)||
    #[arg(long, default_value_t = 1.0)]
    norm_dh0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Membership,
    Coefficients,
    Distortion,
    Growth,
    Jacobian,
    Det,
    Schwarz,
    StarlikeH,
    StarlikeLower,
    Thm6,
}

#[derive(Args)]
struct VerifyArgs {
    /// Map specification file or builtin id such as `builtin:upper_thm2?alpha=2&k=0.5&t=0`
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    k: f64,
    /// Suites to run; `all` is membership, coefficients, distortion, growth,
    /// jacobian, det and (when Dg(0) = 0) schwarz
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    suite: Vec<Suite>,
    /// Dilatation cap for the thm6 suite
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Radius for the starlike-h suite
    #[arg(long, default_value_t = 0.5)]
    starlike_r: f64,
}

#[derive(Args)]
struct OrderArgs {
    /// Map specification file or builtin id
    #[arg(long)]
    map: String,
    /// Sample budget level; larger is finer
    #[arg(long, default_value_t = 1)]
    level: u32,
    /// Replace h by [Dh(0)]^-1 (h - h(0)) first
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct QrArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Dilatation cap 0 <= c < 1
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Quasiregularity constant K >= 1 of h
    #[arg(long, default_value_t = 1.0)]
    big_k: f64,
}

#[derive(Args)]
struct ExtremalArgs {
    /// upper_thm2, lower_thm2, covering_thm4, covering_thm4_literal or pommerenke
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    k: f64,
    /// Rotation angle of the distortion families
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t: f64,
    /// +1 or -1 for the covering families
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    sign: i8,
    /// Radii at which to evaluate sharpness
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    r: Vec<f64>,
    /// Print the map specification instead of sharpness data
    #[arg(long)]
    emit_spec: bool,
}

/// Exit 1 for a mathematical violation, 2 for usage or input errors.
enum Failure {
    Violation(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MembershipRefuted(_)
            | Error::DegenerateJacobian { .. }
            | Error::DilatationCapViolated { .. } => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

struct Ctx {
    format: Format,
    output: Option<PathBuf>,
    seed: u64,
}

impl Ctx {
    fn write(&self, text: &str) -> Result<(), Failure> {
        emit(text, self.output.as_ref()).map_err(Failure::Usage)
    }

    fn write_json<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        self.write(&json(value).map_err(Failure::Usage)?)
    }

    fn write_table(&self, table: &Table) -> Result<(), Failure> {
        self.write(&table.render())
    }
}

const MAX_DIMS: usize = 10_000;

fn parse_dims(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("invalid dimension list '{spec}'; use `3`, `1..5` or `1,2,4`"));
    let dims: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b || b - a >= MAX_DIMS {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(Failure::Usage("dimensions must be at least 1".into()));
    }
    Ok(dims)
}

#[derive(Serialize)]
struct KnRow {
    n: usize,
    k_n: f64,
    k_n_rounded: f64,
    residual: f64,
    iterations: usize,
}

fn cmd_kn(ctx: &Ctx, args: &KnArgs) -> Outcome {
    let mut rows = Vec::new();
    for n in parse_dims(&args.n)? {
        let root = bounds::solve_kn(n)?;
        rows.push(KnRow {
            n,
            k_n: root.k_n,
            k_n_rounded: root.rounded(),
            residual: root.residual,
            iterations: root.iterations,
        });
    }
    let ok = rows.iter().all(|r| r.residual.abs() <= 1e-12);
    match ctx.format {
        Format::Json => ctx.write_json(&rows)?,
        Format::Csv => {
            let mut t = Table::new(vec!["n", "k_n", "k_n_rounded", "residual", "iterations"]);
            for r in &rows {
                t.push(vec![r.n.into(), r.k_n.into(), r.k_n_rounded.into(), r.residual.into(), r.iterations.into()]);
            }
            ctx.write_table(&t)?;
        }
    }
    Ok(ok)
}

fn grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>, Failure> {
    if count == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Failure::Usage("radius grid needs count >= 1 and start <= stop".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
}

#[derive(Serialize)]
struct BoundsRow {
    r: f64,
    distortion_lower: f64,
    distortion_upper: f64,
    growth_bound: f64,
    jacobian_lower_bound: f64,
}

fn cmd_bounds(ctx: &Ctx, args: &BoundsArgs) -> Outcome {
    let mut p = BoundParams::new(args.params.n, args.params.alpha, args.params.k)?;
    p.norm_dh0_inv = args.norm_dh0_inv;
    p.det_dh0 = args.det_dh0;
    p.validate()?;
    let mut rows = Vec::new();
    for r in grid(args.r_start, args.r_stop, args.r_count)? {
        rows.push(BoundsRow {
            r,
            distortion_lower: bounds::distortion_lower(r, &p)?,
            distortion_upper: bounds::distortion_upper(r, &p)?,
            growth_bound: bounds::growth_bound(r, &p)?,
            jacobian_lower_bound: bounds::jacobian_lower_bound(r, &p)?,
        });
    }
    match ctx.format {
        Format::Json => ctx.write_json(&rows)?,
        Format::Csv => {
            let mut t = Table::new(vec!["r", "distortion_lower", "distortion_upper", "growth_bound", "jacobian_lower_bound"]);
            for r in &rows {
                t.push(vec![
                    r.r.into(),
                    r.distortion_lower.into(),
                    r.distortion_upper.into(),
                    r.growth_bound.into(),
                    r.jacobian_lower_bound.into(),
                ]);
            }
            ctx.write_table(&t)?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct CoverOutput {
    method: &'static str,
    n: usize,
    alpha: f64,
    k: f64,
    r: f64,
    det_dh0: f64,
    norm_dh0: f64,
    quadrature: f64,
    quadrature_error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    difference: Option<f64>,
}

fn cmd_cover(ctx: &Ctx, args: &CoverArgs) -> Outcome {
    let n = args.params.n;
    let mut p = BoundParams::new(n, args.params.alpha, args.params.k)?;
    p.det_dh0 = args
        .det_dh0
        .unwrap_or(if n == 1 { bounds::n1_covering_bridge(p.k) } else { 1.0 });
    p.norm_dh0 = args.norm_dh0;
    p.validate()?;
    let quadrature = bounds::covering_radius(args.r, &p)?;
    let integral = bounds::covering_integral(n, p.alpha, args.r)?;
    let closed_form = if n == 1 {
        Some(bounds::covering_radius_n1_closed_form(args.r, p.alpha, p.k)?)
    } else {
        None
    };
    let out = CoverOutput {
        method: if n == 1 {
            "quadrature and closed form"
        } else {
            "quadrature only; no closed form for n >= 2"
        },
        n,
        alpha: p.alpha,
        k: p.k,
        r: args.r,
        det_dh0: p.det_dh0,
        norm_dh0: p.norm_dh0,
        quadrature,
        quadrature_error_estimate: integral.error_estimate,
        closed_form,
        difference: closed_form.map(|c| (quadrature - c).abs()),
    };
    match ctx.format {
        Format::Json => ctx.write_json(&out)?,
        Format::Csv => {
            let mut t = Table::new(vec!["method", "n", "alpha", "k", "r", "det_dh0", "norm_dh0", "quadrature", "closed_form", "difference"]);
            t.push(vec![
                out.method.into(),
                n.into(),
                out.alpha.into(),
                out.k.into(),
                out.r.into(),
                out.det_dh0.into(),
                out.norm_dh0.into(),
                out.quadrature.into(),
                closed_form.map_or(Cell::Text(String::new()), Cell::Float),
                out.difference.map_or(Cell::Text(String::new()), Cell::Float),
            ]);
            ctx.write_table(&t)?;
        }
    }
    Ok(true)
}

fn report_table(report: &VerificationReport) -> Table {
    let mut t = Table::new(vec!["check", "index", "radius", "lhs", "rhs", "margin", "tolerance", "pass"]);
    for e in &report.entries {
        t.push(vec![
            e.check.clone().into(),
            e.index.into(),
            e.radius.into(),
            e.lhs.into(),
            e.rhs.into(),
            e.margin.into(),
            e.tolerance.into(),
            e.pass.into(),
        ]);
    }
    t
}

fn write_report(ctx: &Ctx, report: &VerificationReport) -> Result<(), Failure> {
    match ctx.format {
        Format::Json => ctx.write_json(report),
        Format::Csv => ctx.write_table(&report_table(report)),
    }
}

fn expand_suites(requested: &[Suite], map: &MapModel) -> Vec<Suite> {
    let mut out = Vec::new();
    for &s in requested {
        if s == Suite::All {
            let zero = vec![Complex64::new(0.0, 0.0); map.dim()];
            let dg0_zero = map
                .derivatives(&zero)
                .map(|d| d.dg.operator_norm() <= verify::DG0_ZERO_TOLERANCE)
                .unwrap_or(false);
            out.extend([
                Suite::Membership,
                Suite::Coefficients,
                Suite::Distortion,
                Suite::Growth,
                Suite::Jacobian,
                Suite::Det,
            ]);
            if dg0_zero {
                out.push(Suite::Schwarz);
            }
        } else {
            out.push(s);
        }
    }
    let mut seen = Vec::new();
    out.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(*s);
        fresh
    });
    out
}

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs) -> Outcome {
    let map = load_map(&args.map)?;
    BoundParams::new(map.dim(), args.alpha, args.k)?;
    let config = SampleConfig::default().with_seed(ctx.seed);
    let suites = expand_suites(&args.suite, &map);
    let gated = suites
        .iter()
        .any(|s| matches!(s, Suite::Membership | Suite::Distortion | Suite::Growth | Suite::Jacobian));

    let mut reports = Vec::new();
    if gated {
        let membership = check_membership_ph(&map, args.alpha, args.k, &config);
        let refuted = !membership.all_passed();
        reports.push(membership);
        if refuted {
            let report = VerificationReport::combine(map.provenance(), reports);
            write_report(ctx, &report)?;
            eprintln!(
                "phmap: membership in PH(alpha={}, k={}) refuted: {} of {} checks failed",
                args.alpha,
                args.k,
                report.summary.total - report.summary.passed,
                report.summary.total
            );
            return Ok(false);
        }
    }
    let mut violation = None;
    for suite in suites {
        let result = match suite {
            Suite::All | Suite::Membership => continue,
            Suite::Coefficients => Ok(coefficient_bounds_check(&map, args.k)),
            Suite::Distortion => verify::verify_distortion(&map, args.alpha, args.k, &config),
            Suite::Growth => verify::verify_growth(&map, args.alpha, args.k, &config),
            Suite::Jacobian => verify::verify_jacobian_bound(&map, args.alpha, args.k, &config),
            Suite::Det => verify::verify_det_factorization(&map, &config),
            Suite::Schwarz => verify::verify_schwarz_dilatation(&map, &config),
            Suite::StarlikeH => verify::verify_starlike_hbound(&map, args.starlike_r, &config),
            Suite::StarlikeLower => verify::verify_starlike_lower(&map, args.alpha, &config),
            Suite::Thm6 => verify::verify_thm6_equivalence(&map, args.c, &config),
        };
        match result {
            Ok(r) => reports.push(r),
            Err(e) => match Failure::from(e) {
                Failure::Violation(msg) => {
                    violation = Some(msg);
                    break;
                }
                usage => return Err(usage),
            },
        }
    }
    let report = VerificationReport::combine(map.provenance(), reports);
    write_report(ctx, &report)?;
    if let Some(msg) = violation {
        eprintln!("{msg}");
        return Ok(false);
    }
    Ok(report.all_passed())
}

#[derive(Serialize)]
struct OrderOutput {
    map: String,
    normalized: bool,
    level: u32,
    value: f64,
    samples_used: usize,
    a: Vec<[f64; 2]>,
    theta: Vec<[f64; 2]>,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn cmd_order(ctx: &Ctx, args: &OrderArgs) -> Outcome {
    let map = load_map(&args.map)?;
    let h = if args.normalize {
        lif::normalize_holomorphic(map.h())?
    } else {
        map.h().clone()
    };
    let est = norm_order_estimate(&h, OrderBudget::new(args.level))?;
    let out = OrderOutput {
        map: map.provenance().to_string(),
        normalized: args.normalize,
        level: args.level,
        value: est.value,
        samples_used: est.samples_used,
        a: pairs(&est.max_attained_at.0),
        theta: pairs(&est.max_attained_at.1),
    };
    match ctx.format {
        Format::Json => ctx.write_json(&out)?,
        Format::Csv => {
            let mut t = Table::new(vec!["map", "level", "value", "samples_used"]);
            t.push(vec![out.map.clone().into(), (out.level as usize).into(), out.value.into(), out.samples_used.into()]);
            ctx.write_table(&t)?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct QrOutput {
    n: usize,
    c: f64,
    big_k: f64,
    k_n: f64,
    k_n_rounded: f64,
    m: f64,
    big_k2: f64,
    radius: f64,
}

fn cmd_qr(ctx: &Ctx, args: &QrArgs) -> Outcome {
    let radius = bounds::qr_ball_radius(args.n, args.c, args.big_k)?;
    let root = bounds::solve_kn(args.n)?;
    let out = QrOutput {
        n: args.n,
        c: args.c,
        big_k: args.big_k,
        k_n: root.k_n,
        k_n_rounded: root.rounded(),
        m: bounds::QR_COVERING_M,
        big_k2: bounds::qr_constant_forward(args.big_k, args.c, args.n)?,
        radius,
    };
    match ctx.format {
        Format::Json => ctx.write_json(&out)?,
        Format::Csv => {
            let mut t = Table::new(vec!["n", "c", "big_k", "k_n", "m", "big_k2", "radius"]);
            t.push(vec![
                out.n.into(),
                out.c.into(),
                out.big_k.into(),
                out.k_n.into(),
                out.m.into(),
                out.big_k2.into(),
                out.radius.into(),
            ]);
            ctx.write_table(&t)?;
        }
    }
    Ok(radius > 0.0 && radius.is_finite())
}

#[derive(Serialize)]
struct SharpnessRow {
    r: f64,
    value: f64,
    bound: f64,
    gap: f64,
}

#[derive(Serialize)]
struct ExtremalOutput {
    builtin: String,
    rows: Vec<SharpnessRow>,
}

const SHARPNESS_TOLERANCE: f64 = 1e-9;

fn cmd_extremal(ctx: &Ctx, args: &ExtremalArgs) -> Outcome {
    let family: ExtremalFamily = args.family.parse()?;
    let spec = ExtremalSpec::new(family, args.alpha, args.k)
        .with_t(args.t)
        .with_sign(args.sign);
    let map = extremal::build_extremal(&spec)?;
    if args.emit_spec {
        ctx.write_json(&MapSpec::from_model(&map))?;
        return Ok(true);
    }
    let mut rows = Vec::new();
    for &r in &args.r {
        let row = match family {
            ExtremalFamily::UpperThm2 => {
                let p = BoundParams::new(1, args.alpha, args.k)?;
                let bound = bounds::distortion_upper(r, &p)?;
                let gap = sharpness_gap_upper(args.alpha, args.k, args.t, r)?;
                let (value, _) = map.lambda_extremes(&[Complex64::from_polar(r, args.t)])?;
                SharpnessRow { r, value, bound, gap }
            }
            ExtremalFamily::LowerThm2 => {
                let mut p = BoundParams::new(1, args.alpha, args.k)?;
                p.norm_dh0_inv = 1.0 + args.k;
                let bound = bounds::distortion_lower(r, &p)?;
                let gap = sharpness_gap_lower(args.alpha, args.k, args.t, r)?;
                let (_, value) = map.lambda_extremes(&[Complex64::from_polar(r, args.t)])?;
                SharpnessRow { r, value, bound, gap }
            }
            ExtremalFamily::CoveringThm4 | ExtremalFamily::CoveringThm4Literal => {
                let check = covering_sharpness_check(&spec, r)?;
                SharpnessRow {
                    r,
                    value: check.distance,
                    bound: check.expected,
                    gap: check.gap,
                }
            }
            ExtremalFamily::Pommerenke => {
                let h = map.h();
                let zero = [Complex64::new(0.0, 0.0)];
                let value = 0.5 * h.hessian(&zero).at(0, 0, 0).norm();
                SharpnessRow {
                    r,
                    value,
                    bound: args.alpha,
                    gap: (value - args.alpha).abs(),
                }
            }
        };
        rows.push(row);
    }
    let sharp = rows.iter().all(|r| r.gap <= SHARPNESS_TOLERANCE * r.bound.abs().max(1.0));
    let out = ExtremalOutput {
        builtin: spec.builtin_id(),
        rows,
    };
    match ctx.format {
        Format::Json => ctx.write_json(&out)?,
        Format::Csv => {
            let mut t = Table::new(vec!["r", "value", "bound", "gap"]);
            for r in &out.rows {
                t.push(vec![r.r.into(), r.value.into(), r.bound.into(), r.gap.into()]);
            }
            ctx.write_table(&t)?;
        }
    }
    Ok(sharp)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        format: cli.format,
        output: cli.output,
        seed: cli.seed,
    };
    let outcome = match &cli.command {
        Command::Kn(a) => cmd_kn(&ctx, a),
        Command::Bounds(a) => cmd_bounds(&ctx, a),
        Command::Cover(a) => cmd_cover(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Order(a) => cmd_order(&ctx, a),
        Command::Qr(a) => cmd_qr(&ctx, a),
        Command::Extremal(a) => cmd_extremal(&ctx, a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Violation(msg)) => {
            eprintln!("phmap: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("phmap: {msg}");
            ExitCode::from(2)
        }
    }
}
