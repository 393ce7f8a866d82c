//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and writes JSON or CSV to the given sink.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a solver fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::Path;

use affine_billiards::affine::{AffineCurve, DEFAULT_GRID_SIZE};
use affine_billiards::billiard::{
    chord_rotation_number, outer_orbit, outer_rotation_number, symplectic_orbit, ChordState, OuterState,
    RotationNumber,
};
use affine_billiards::expansions::{
    chord_area_exact, chord_area_series, predict_beta_coeffs, predict_deficit_coeffs, tab_inequality,
    tab_is_equality, tangent_area_exact, tangent_area_series, BilliardKind,
};
use affine_billiards::extraction::{
    compare, extract_with, nonresonant, CheckStatus, DeficitSeries, ExtractOptions, DEFAULT_N_LIST,
};
use affine_billiards::polygon::{deficit, deficit_sweep, solve_polygon, PolygonKind};
use affine_billiards::{check_omega_relations, enclosed_area, CurveSpec, Error, Vec2, VERSION};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

pub const GRID_ENV: &str = "BILLIARDS_GRID_SIZE";
/// Relative gap below which the β inequality counts as an equality.
pub const TAB_EQUALITY_TOL: f64 = 1e-10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "billiards", version, about = "Best approximating polygons and billiard beta coefficients")]
struct Cli {
    /// Nodes of the affine arc-length grid (overrides BILLIARDS_GRID_SIZE).
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CurveArg {
    /// Preset (`circle:R`, `ellipse:a,b`, `fourier:a0:c1,c2,..[:s1,..]`) or path to a JSON file.
    #[arg(long)]
    curve: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolygonArg {
    Inscribed,
    Circumscribed,
}

impl From<PolygonArg> for PolygonKind {
    fn from(k: PolygonArg) -> Self {
        match k {
            PolygonArg::Inscribed => PolygonKind::Inscribed,
            PolygonArg::Circumscribed => PolygonKind::Circumscribed,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BilliardArg {
    Symplectic,
    Outer,
}

impl From<BilliardArg> for BilliardKind {
    fn from(k: BilliardArg) -> Self {
        match k {
            BilliardArg::Symplectic => BilliardKind::Symplectic,
            BilliardArg::Outer => BilliardKind::Outer,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Affine length, curvature integrals and frame diagnostics.
    CurveInfo {
        #[command(flatten)]
        curve: CurveArg,
    },
    /// Iterate the symplectic or outer billiard map.
    Orbit {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_enum)]
        kind: BilliardArg,
        /// `s0,s1` (affine parameters) or `x,y` (exterior point).
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        start: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Solve for the best approximating n-gon.
    Polygon {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_enum)]
        kind: PolygonArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        emit_vertices: bool,
    },
    /// Deficits over a list of n.
    DeficitSweep {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_enum)]
        kind: PolygonArg,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Fit asymptotic coefficients to computed deficits.
    Extract {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_enum)]
        kind: PolygonArg,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        orders: Vec<u32>,
        /// Relative tolerances as `order=value`, e.g. `2=1e-8,4=1e-4,6=2e-2`.
        #[arg(long, value_delimiter = ',')]
        tol: Vec<String>,
        /// Fail when the fit residual exceeds the accuracy budget.
        #[arg(long)]
        strict: bool,
        /// Use every sample instead of choosing the lower end of the window.
        #[arg(long)]
        full_window: bool,
        /// Keep n that share a factor with the rotational symmetry of the curve.
        #[arg(long)]
        keep_resonant: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Predicted β coefficients.
    Beta {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_enum)]
        kind: BilliardArg,
    },
    /// The β5/β7 inequality, equality exactly on ellipses.
    VerifyTab {
        #[command(flatten)]
        curve: CurveArg,
        /// Both kinds when omitted.
        #[arg(long, value_enum)]
        kind: Option<BilliardArg>,
    },
    /// The six ω-relations of the affine frame on one or more grids.
    VerifyOmega {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_delimiter = ',')]
        grids: Option<Vec<usize>>,
    },
    /// Chord and tangent area expansions against quadrature.
    VerifySeries {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1")]
        deltas: Vec<f64>,
    },
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Solver(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs with the grid size fallback taken from the process environment.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(GRID_ENV).ok(), out, err)
}

/// Like [`run`] with an explicit value for `BILLIARDS_GRID_SIZE`.
pub fn run_with_env<I, T>(args: I, grid_env: Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, grid_env, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Validation(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_VALIDATION
        }
        Err(CliError::Solver(msg)) => {
            let _ = writeln!(err, "solver failure: {msg}");
            EXIT_SOLVER
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "i/o error: {e}");
            EXIT_SOLVER
        }
    }
}

fn grid_size(cli: &Cli, env: Option<String>) -> CliResult<usize> {
    if let Some(g) = cli.grid_size {
        return Ok(g);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{GRID_ENV}='{v}' is not a positive integer"))),
        None => Ok(DEFAULT_GRID_SIZE),
    }
}

fn is_preset(s: &str) -> bool {
    ["circle:", "ellipse:", "fourier:"].iter().any(|p| s.starts_with(p))
}

fn load_curve(arg: &CurveArg) -> CliResult<CurveSpec> {
    if is_preset(&arg.curve) {
        return Ok(arg.curve.parse()?);
    }
    let path = Path::new(&arg.curve);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read curve file '{}': {e}", arg.curve)))?;
    Ok(CurveSpec::from_json(&text)?)
}

struct Context {
    spec: CurveSpec,
    grid: usize,
}

impl Context {
    fn affine(&self) -> CliResult<AffineCurve> {
        Ok(AffineCurve::from_spec(&self.spec, self.grid)?)
    }

    fn header(&self, command: &str) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("version".into(), json!(VERSION));
        m.insert("command".into(), json!(command));
        m.insert("curve".into(), json!(self.spec.to_string()));
        m.insert("grid_size".into(), json!(self.grid));
        m
    }

    fn csv_header(&self, command: &str) -> String {
        format!("# affine-billiards {VERSION} {command} curve={} grid_size={}\n", self.spec, self.grid)
    }
}

fn execute(cli: &Cli, env: Option<String>, out: &mut dyn Write) -> CliResult<()> {
    let grid = grid_size(cli, env)?;
    let curve_arg = match &cli.command {
        Command::CurveInfo { curve }
        | Command::Orbit { curve, .. }
        | Command::Polygon { curve, .. }
        | Command::DeficitSweep { curve, .. }
        | Command::Extract { curve, .. }
        | Command::Beta { curve, .. }
        | Command::VerifyTab { curve, .. }
        | Command::VerifyOmega { curve, .. }
        | Command::VerifySeries { curve, .. } => curve,
    };
    let ctx = Context {
        spec: load_curve(curve_arg)?,
        grid,
    };
    match &cli.command {
        Command::CurveInfo { .. } => curve_info(&ctx, out),
        Command::Orbit { kind, start, steps, .. } => orbit(&ctx, (*kind).into(), start, *steps, out),
        Command::Polygon {
            kind, n, emit_vertices, ..
        } => polygon(&ctx, (*kind).into(), *n, *emit_vertices, out),
        Command::DeficitSweep {
            kind, n_list, format, ..
        } => sweep(&ctx, (*kind).into(), n_list, *format, out),
        Command::Extract {
            kind,
            n_list,
            orders,
            tol,
            strict,
            full_window,
            keep_resonant,
            format,
            ..
        } => {
            let req = ExtractRequest {
                kind: (*kind).into(),
                ns: n_list.clone().unwrap_or_else(|| DEFAULT_N_LIST.to_vec()),
                orders: orders.clone(),
                tolerances: parse_tolerances(tol)?,
                strict: *strict,
                full_window: *full_window,
                keep_resonant: *keep_resonant,
                format: *format,
            };
            extract_cmd(&ctx, &req, out)
        }
        Command::Beta { kind, .. } => beta(&ctx, (*kind).into(), out),
        Command::VerifyTab { kind, .. } => verify_tab(&ctx, kind.map(Into::into), out),
        Command::VerifyOmega { grids, .. } => verify_omega(&ctx, grids.as_deref(), out),
        Command::VerifySeries { r, deltas, .. } => verify_series(&ctx, *r, deltas, out),
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> CliResult<()> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(io::Error::other(e)))?;
    buf.push(b'\n');
    out.write_all(&buf)?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn emit(ctx: &Context, command: &str, payload: Value, out: &mut dyn Write) -> CliResult<()> {
    let mut m = ctx.header(command);
    if let Value::Object(p) = payload {
        m.extend(p);
    }
    write_json(out, &Value::Object(m))
}

fn curve_info(ctx: &Context, out: &mut dyn Write) -> CliResult<()> {
    let ac = ctx.affine()?;
    let payload = json!({
        "lambda": ac.lambda(),
        "i1": ac.i1(),
        "i2": ac.i2(),
        "area": enclosed_area(ac.curve()),
        "k_min": ac.k_min(),
        "k_max": ac.k_max(),
        "k_resolution": ac.k_resolution(),
        "frame_defect": ac.frame_defect(),
        "inversion_residual": ac.inversion_residual(),
        "symmetry_order": ctx.spec.symmetry_order(),
        "omega_relations": to_value(&check_omega_relations(&ac)),
    });
    emit(ctx, "curve-info", payload, out)
}

fn rotation_line(r: &RotationNumber) -> String {
    let frac = r.fraction.map(|(p, q)| format!("{p}/{q}")).unwrap_or_else(|| "none".into());
    format!("# rotation_number={} fraction={frac} converged={}\n", num(r.value), r.converged)
}

fn orbit(ctx: &Context, kind: BilliardKind, start: &[f64], steps: usize, out: &mut dyn Write) -> CliResult<()> {
    if start.len() != 2 {
        return Err(CliError::Validation("--start expects two numbers".into()));
    }
    let ac = ctx.affine()?;
    let mut text = ctx.csv_header("orbit");
    match kind {
        BilliardKind::Symplectic => {
            let st = ChordState {
                s0: start[0],
                s1: start[1],
            };
            let states = symplectic_orbit(&ac, st, steps)?;
            text += "step,s0,s1\n";
            for (i, s) in states.iter().enumerate() {
                text += &format!("{i},{},{}\n", num(s.s0), num(s.s1));
            }
            text += &rotation_line(&chord_rotation_number(&ac, &states)?);
        }
        BilliardKind::Outer => {
            let st = OuterState {
                p: Vec2::new(start[0], start[1]),
            };
            let states = outer_orbit(ac.curve(), st, steps)?;
            text += "step,x,y\n";
            for (i, s) in states.iter().enumerate() {
                text += &format!("{i},{},{}\n", num(s.p.x), num(s.p.y));
            }
            text += &rotation_line(&outer_rotation_number(ac.curve(), &states)?);
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn check_n(n: usize) -> CliResult<()> {
    if n < 3 {
        return Err(CliError::Validation(format!("n = {n} is below 3")));
    }
    Ok(())
}

fn polygon(ctx: &Context, kind: PolygonKind, n: usize, vertices: bool, out: &mut dyn Write) -> CliResult<()> {
    check_n(n)?;
    let ac = ctx.affine()?;
    let mut cfg = solve_polygon(&ac, n, kind)?;
    let sample = deficit(&ac, &cfg);
    if !vertices {
        cfg.vertices.clear();
    }
    let payload = json!({ "polygon": to_value(&cfg), "deficit": to_value(&sample) });
    emit(ctx, "polygon", payload, out)
}

fn sweep(ctx: &Context, kind: PolygonKind, ns: &[usize], format: Format, out: &mut dyn Write) -> CliResult<()> {
    for &n in ns {
        check_n(n)?;
    }
    let ac = ctx.affine()?;
    let mut samples = deficit_sweep(&ac, kind, ns)?;
    samples.sort_by_key(|s| s.n);
    match format {
        Format::Csv => {
            let mut text = ctx.csv_header("deficit-sweep");
            text += "n,delta,residual,accuracy_estimate\n";
            for s in &samples {
                text += &format!("{},{},{},{}\n", s.n, num(s.delta), num(s.residual), num(s.accuracy_estimate));
            }
            out.write_all(text.as_bytes())?;
            Ok(())
        }
        Format::Json => emit(ctx, "deficit-sweep", json!({ "samples": to_value(&samples) }), out),
    }
}

struct ExtractRequest {
    kind: PolygonKind,
    ns: Vec<usize>,
    orders: Vec<u32>,
    tolerances: BTreeMap<u32, f64>,
    strict: bool,
    full_window: bool,
    keep_resonant: bool,
    format: Format,
}

fn parse_tolerances(items: &[String]) -> CliResult<BTreeMap<u32, f64>> {
    let mut map = BTreeMap::new();
    for item in items {
        let bad = || CliError::Validation(format!("tolerance '{item}' is not of the form order=value"));
        let (o, v) = item.split_once('=').ok_or_else(bad)?;
        let order: u32 = o.trim().parse().map_err(|_| bad())?;
        let value: f64 = v.trim().parse().map_err(|_| bad())?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::Validation(format!("tolerance for order {order} must be positive")));
        }
        map.insert(order, value);
    }
    Ok(map)
}

fn extract_cmd(ctx: &Context, req: &ExtractRequest, out: &mut dyn Write) -> CliResult<()> {
    for &n in &req.ns {
        check_n(n)?;
    }
    let mut notes = Vec::new();
    let ns = if req.keep_resonant {
        req.ns.clone()
    } else {
        let kept = nonresonant(&req.ns, ctx.spec.symmetry_order());
        if kept.len() < req.ns.len() {
            let dropped: Vec<String> = req.ns.iter().filter(|n| !kept.contains(n)).map(|n| n.to_string()).collect();
            notes.push(format!("dropped n sharing a factor with the curve symmetry: {}", dropped.join(",")));
        }
        kept
    };
    let ac = ctx.affine()?;
    let series = DeficitSeries::compute(&ac, req.kind, &ns, ctx.spec.to_string())?;
    let options = ExtractOptions {
        orders: req.orders.clone(),
        strict: req.strict,
        auto_window: !req.full_window,
        ..ExtractOptions::default()
    };
    let mut result = extract_with(&series, &options)?;
    let predicted = predict_deficit_coeffs(&ac, req.kind);
    result.attach_comparison(&predicted);
    result.notes.extend(notes);
    let report = if req.tolerances.is_empty() {
        None
    } else {
        let report = compare(&series, &result, &predicted, &req.tolerances);
        if let Some(c) = report.checks.iter().find(|c| c.status == CheckStatus::Unresolvable) {
            return Err(CliError::Validation(format!(
                "tolerance {:e} for order {} is tighter than the error budget {:e}",
                c.tolerance, c.order, c.budget
            )));
        }
        Some(report)
    };
    match req.format {
        Format::Json => {
            let payload = json!({
                "kind": req.kind.as_str(),
                "n_list": ns,
                "result": to_value(&result),
                "predicted": to_value(&predicted),
                "report": report.as_ref().map(to_value),
            });
            emit(ctx, "extract", payload, out)
        }
        Format::Csv => {
            let mut text = ctx.csv_header("extract");
            text += "n,delta,model,residual\n";
            for r in &result.rows {
                text += &format!("{},{},{},{}\n", r.n, num(r.delta), num(r.model), num(r.residual));
            }
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn beta(ctx: &Context, kind: BilliardKind, out: &mut dyn Write) -> CliResult<()> {
    let ac = ctx.affine()?;
    let b = predict_beta_coeffs(&ac, kind);
    let payload = json!({
        "kind": kind.as_str(),
        "beta1": b.get("beta1"),
        "beta3": b.get("beta3"),
        "beta5": b.get("beta5"),
        "beta7": b.get("beta7"),
    });
    emit(ctx, "beta", payload, out)
}

fn verify_tab(ctx: &Context, kind: Option<BilliardKind>, out: &mut dyn Write) -> CliResult<()> {
    let ac = ctx.affine()?;
    let kinds = match kind {
        Some(k) => vec![k],
        None => vec![BilliardKind::Symplectic, BilliardKind::Outer],
    };
    let reports: Vec<Value> = kinds
        .into_iter()
        .map(|k| {
            let r = tab_inequality(&ac, k);
            let status = if tab_is_equality(&r, TAB_EQUALITY_TOL) {
                "equality (ellipse)"
            } else if r.gap > 0.0 {
                "strict inequality"
            } else {
                "violated"
            };
            json!({
                "kind": k.as_str(),
                "lhs": r.lhs,
                "rhs": r.rhs,
                "gap": r.gap,
                "relative_gap": r.relative_gap,
                "status": status,
            })
        })
        .collect();
    emit(ctx, "verify-tab", json!({ "reports": reports }), out)
}

fn verify_omega(ctx: &Context, grids: Option<&[usize]>, out: &mut dyn Write) -> CliResult<()> {
    let grids = grids.map(<[usize]>::to_vec).unwrap_or_else(|| vec![ctx.grid]);
    let mut rows = Vec::new();
    for g in grids {
        let ac = AffineCurve::from_spec(&ctx.spec, g)?;
        let report = check_omega_relations(&ac);
        rows.push(json!({ "grid_size": g, "max": report.max(), "relations": to_value(&report) }));
    }
    emit(ctx, "verify-omega", json!({ "grids": rows }), out)
}

fn verify_series(ctx: &Context, r: f64, deltas: &[f64], out: &mut dyn Write) -> CliResult<()> {
    if deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(CliError::Validation("deltas must be positive".into()));
    }
    let ac = ctx.affine()?;
    let mut rows = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &d in deltas {
        let s = r + d;
        let fe = (chord_area_exact(&ac, r, s)? - chord_area_series(&ac, r, s)).abs();
        let he = (tangent_area_exact(&ac, r, s)? - tangent_area_series(&ac, r, s)).abs();
        let ratios = prev.map(|(pf, ph)| json!({ "chord": pf / fe, "tangent": ph / he }));
        rows.push(json!({ "delta": d, "chord_remainder": fe, "tangent_remainder": he, "ratio_to_previous": ratios }));
        prev = Some((fe, he));
    }
    emit(ctx, "verify-series", json!({ "r": r, "rows": rows }), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_classes() {
        assert!(matches!(CliError::from(Error::NotExterior), CliError::Validation(_)));
        assert!(matches!(
            CliError::from(Error::SolverDiverged { n: 8, residual: 1.0 }),
            CliError::Solver(_)
        ));
        assert!(matches!(CliError::from(Error::RankDeficient(1e20)), CliError::Solver(_)));
    }

    #[test]
    fn tolerances_parse_and_reject_nonpositive() {
        let t = parse_tolerances(&["2=1e-8".into(), "6 = 0.02".into()]).unwrap();
        assert_eq!(t[&2], 1e-8);
        assert_eq!(t[&6], 0.02);
        assert!(parse_tolerances(&["4=0".into()]).is_err());
        assert!(parse_tolerances(&["4".into()]).is_err());
        assert!(parse_tolerances(&["x=1".into()]).is_err());
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let mut out = Vec::new();
        write_json(&mut out, &json!({ "x": 0.1, "n": 3 })).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"x\": 1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"n\": 3"), "{text}");
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn grid_size_precedence() {
        let cli = Cli::try_parse_from(["billiards", "curve-info", "--curve", "circle:1"]).unwrap();
        assert_eq!(grid_size(&cli, None).unwrap(), DEFAULT_GRID_SIZE);
        assert_eq!(grid_size(&cli, Some("512".into())).unwrap(), 512);
        assert!(grid_size(&cli, Some("many".into())).is_err());
        let cli = Cli::try_parse_from(["billiards", "curve-info", "--curve", "circle:1", "--grid-size", "256"]).unwrap();
        assert_eq!(grid_size(&cli, Some("512".into())).unwrap(), 256);
    }

    #[test]
    fn presets_are_recognized_by_prefix() {
        assert!(is_preset("circle:2"));
        assert!(is_preset("fourier:1:0,0.1"));
        assert!(!is_preset("curves/ellipse.json"));
    }
}
