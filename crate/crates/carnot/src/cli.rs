//! Command tree. Exit codes: 0 all checks passed, 1 a verification failed,
//! 2 usage or configuration error.

use std::{
    ffi::OsString,
    path::{Path, PathBuf},
};

use carnot_core::{
    control::{
        self, endpoint, endpoint_jacobian, endpoint_jacobian_exact, endpoint_jacobian_fd, endpoint_ode, minimal_stretching,
        scan_directions, EndpointJacobian, GeodesicOptions, HeisenbergCcGauge,
    },
    heisenberg::{build_ball, compute_a, extract_profile, Grid62, HeisenbergBall},
    norms::{
        self, check_triple, BallGauge, BoxQuasiNorm, CheckKind, EuclideanGauge, Gauge, KoranyiGauge, ProductGauge, VerifyOptions,
    },
    plane::{build_fractal_ball, FractalBallParams, FractalProfile, RemarkBall, YRegion},
    sphere::{
        box_counting_graph, box_counting_points, cusp_exponent_fit, cusp_samples, dimension_bounds_check, graph_regularity_estimate,
        sample_sphere, tent_cone_probe, ProbeCurve,
    },
    BracketEntry, GradedAlgebraSpec, GradedGroup,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::{
    error::{CliError, Result},
    experiments,
    files::{self, parse_point, BallFile, ControlFile, GroupFile, ProfileFile},
    json, parallel, presets,
};

// Alias keeps clap from treating a point as a multi-valued `Vec<f64>` arg.
type Point = Vec<f64>;

#[derive(Debug, Parser)]
#[command(name = "carnot", version, about = "Homogeneous norms, balls and sub-Finsler controls on graded groups", args_override_self = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Seed of the per-sample random streams; required by sampling commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Number of samples (pairs for combination checks).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Tolerance or violation slack, depending on the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file: the built object for constructors, the report otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Named experiment configuration (built in or from $CARNOT_PRESET_DIR).
    #[arg(long, global = true)]
    preset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Graded algebra definitions.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Gauges and homogeneous quasi-norms.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Unit-ball files.
    #[command(subcommand)]
    Ball(BallCmd),
    /// Heisenberg balls built from planar profiles.
    #[command(subcommand)]
    Heis(HeisCmd),
    /// Planar constructions.
    #[command(subcommand)]
    Plane(PlaneCmd),
    /// Controls, end-point maps and geodesics.
    #[command(subcommand)]
    Control(ControlCmd),
    /// Unit spheres as radial graphs.
    #[command(subcommand)]
    Sphere(SphereCmd),
    /// Named experiment ac01..ac11.
    Experiment { name: String },
}

#[derive(Debug, Subcommand)]
enum GroupCmd {
    /// Checks antisymmetry, Jacobi and grading; exit 1 with witnesses on failure.
    Validate { group: String },
    /// Layers, step and class of a valid group.
    Info { group: String },
}

#[derive(Debug, Args)]
struct GroupGauge {
    /// Built-in group name or group JSON file.
    #[arg(long, default_value = "heisenberg")]
    group: String,
    /// box, euclidean, koranyi, cc, product:<gauge> or ball:<file>.
    #[arg(long, default_value = "box")]
    gauge: String,
}

#[derive(Debug, Subcommand)]
enum NormCmd {
    /// Gauge values at points.
    Eval {
        #[command(flatten)]
        gg: GroupGauge,
        /// Comma-separated coordinates; repeatable.
        #[arg(long, required = true, value_parser = parse_point)]
        point: Vec<Point>,
    },
    /// Sampled triangle inequality, symmetry and homogeneity.
    Axioms {
        #[command(flatten)]
        gg: GroupGauge,
    },
    /// Equivalence constant against a second gauge.
    Equiv {
        #[command(flatten)]
        gg: GroupGauge,
        #[arg(long, default_value = "euclidean")]
        other: String,
    },
    /// Two-sided Hölder comparison with the Euclidean metric.
    Holder {
        #[command(flatten)]
        gg: GroupGauge,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
    },
}

#[derive(Debug, Subcommand)]
enum BallCmd {
    /// Sampled ball conditions.
    Verify {
        ball: PathBuf,
        /// Subset of compact, interior, symmetric, combination.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Gauge of the ball at points.
    Gauge {
        ball: PathBuf,
        #[arg(long, required = true, value_parser = parse_point)]
        point: Vec<Point>,
    },
    /// Tests a coordinate Euclidean ball as a unit ball.
    Euclid {
        #[arg(long, default_value = "heisenberg")]
        group: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
}

#[derive(Debug, Args)]
struct ProfileSource {
    /// Profile tag: abs-x, zero, constant:<c>, random:<L>.
    #[arg(long = "g", default_value = "abs-x")]
    g: String,
    /// disc:<r> or regular:<n>:<r>.
    #[arg(long, default_value = "disc:1")]
    domain: String,
    /// Profile JSON {domain, values, lipschitz?}; overrides --g and --domain.
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum HeisCmd {
    /// Builds the ball with the computed offset (or --offset).
    Build {
        #[command(flatten)]
        src: ProfileSource,
        #[arg(long)]
        offset: Option<f64>,
    },
    /// Grid check of the planar condition for f = g + b.
    Check62 {
        ball: PathBuf,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 21)]
        t_values: usize,
    },
    /// Extracted profile on a grid of the scaled domain against g + b.
    Profile {
        ball: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        scale: f64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// CSV with columns x, y, extracted, expected.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Star-shape and vertical-segment checks.
    Star { ball: PathBuf },
}

#[derive(Debug, Subcommand)]
enum PlaneCmd {
    /// Combination condition on Y(eps, beta, C) and the explicit witness.
    Yregion {
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Fractal ball from a Weierstrass-type profile.
    Fractal {
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 1.2)]
        big_m: f64,
        #[arg(long, default_value_t = 24)]
        terms: usize,
        #[arg(long, default_value_t = 41)]
        s_grid: usize,
        /// Box dimension of the boundary arc.
        #[arg(long)]
        dim: bool,
        /// Arc samples for --dim and --csv.
        #[arg(long, default_value_t = (1 << 20) + 1)]
        points: usize,
        /// Arc samples as CSV (x, y, t).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also run the sampled ball conditions (needs --seed).
        #[arg(long)]
        verify: bool,
    },
    /// The square-root ball: ball conditions and regularity near (0, 1).
    Remark,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum JacobianMethod {
    Augmented,
    Exact,
    Fd,
}

#[derive(Debug, Args)]
struct ControlInput {
    #[arg(long, default_value = "heisenberg")]
    group: String,
    /// Control JSON {m, values, norm}.
    #[arg(long)]
    control: PathBuf,
    /// Start point (default: identity).
    #[arg(long, value_parser = parse_point)]
    origin: Option<Point>,
}

#[derive(Debug, Subcommand)]
enum ControlCmd {
    /// End point of a piecewise-constant control from the origin.
    Endpoint {
        #[command(flatten)]
        input: ControlInput,
        /// Also integrate with RK4 using this many steps.
        #[arg(long)]
        ode: Option<usize>,
    },
    /// Differential of the end-point map at the control.
    Jacobian {
        #[command(flatten)]
        input: ControlInput,
        #[arg(long, value_enum, default_value_t = JacobianMethod::Augmented)]
        method: JacobianMethod,
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
    },
    /// Minimal stretching of the end-point differential.
    Tau {
        #[command(flatten)]
        input: ControlInput,
        #[arg(long, value_enum, default_value_t = JacobianMethod::Augmented)]
        method: JacobianMethod,
        #[arg(long, default_value_t = 1.0)]
        target_scale: f64,
    },
    /// Constant-control singularity scan.
    Scan {
        #[arg(long, default_value = "heisenberg")]
        group: String,
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value = "euclidean")]
        norm: String,
    },
    /// Penalty solver for a length-minimizing control.
    Geodesic {
        #[arg(long, default_value = "heisenberg")]
        group: String,
        #[arg(long, value_parser = parse_point)]
        target: Point,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value = "euclidean")]
        norm: String,
    },
    /// Difference quotients of N^power near the identity.
    D0sq {
        #[command(flatten)]
        gg: GroupGauge,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 2.0)]
        power: f64,
    },
}

#[derive(Debug, Subcommand)]
enum SphereCmd {
    /// Sphere points of random directions.
    Sample {
        #[command(flatten)]
        gg: GroupGauge,
        /// CSV with direction coordinates, gauge and sphere coordinates.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Box dimension of sampled sphere points against the dimension window.
    Dim {
        #[command(flatten)]
        gg: GroupGauge,
        #[arg(long, default_value_t = 4)]
        scale_min: u32,
        #[arg(long, default_value_t = 11)]
        scale_max: u32,
    },
    /// Hölder exponent of the gauge along a segment or great-circle arc.
    Regularity {
        #[command(flatten)]
        gg: GroupGauge,
        #[arg(long, value_parser = parse_point)]
        start: Option<Point>,
        #[arg(long, value_parser = parse_point)]
        end: Option<Point>,
        #[arg(long, value_parser = parse_point)]
        center: Option<Point>,
        #[arg(long, value_parser = parse_point)]
        tangent: Option<Point>,
        #[arg(long, default_value_t = 0.3)]
        half_angle: f64,
        #[arg(long, default_value_t = 14)]
        levels: u32,
    },
    /// Cusp exponent at the sphere point of a direction.
    Cusp {
        #[command(flatten)]
        gg: GroupGauge,
        #[arg(long, value_parser = parse_point)]
        direction: Point,
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 1e-5)]
        gap_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        gap_max: f64,
    },
    /// Largest tent-cone aperture at a sphere point of a ball.
    Cone {
        ball: PathBuf,
        #[arg(long, value_parser = parse_point)]
        direction: Point,
        #[arg(long, value_delimiter = ',')]
        apertures: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        height: f64,
        #[arg(long, default_value_t = 4)]
        nearby: usize,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match presets::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let workers = cli.global.workers.map(|w| w as usize);
    match parallel::with_workers(workers, || dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Ctx<'a> {
    g: &'a Global,
}

impl Ctx<'_> {
    fn seed(&self) -> Result<u64> {
        self.g.seed.ok_or_else(|| CliError::usage("this command samples at random and needs --seed"))
    }

    fn samples(&self, default: u64) -> u64 {
        self.g.samples.unwrap_or(default)
    }

    fn tol(&self, default: f64) -> f64 {
        self.g.tol.unwrap_or(default)
    }

    /// Prints the report and writes it to `--out` when `to_out`.
    fn report<T: Serialize>(&self, report: &T, passed: bool, to_out: bool) -> Result<i32> {
        let text = json::to_string(report);
        print!("{text}");
        if let (true, Some(path)) = (to_out, &self.g.out) {
            files::write_text(path, &text)?;
        }
        Ok(if passed { 0 } else { 1 })
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let ctx = Ctx { g: &cli.global };
    match &cli.command {
        Command::Group(c) => group_cmd(&ctx, c),
        Command::Norm(c) => norm_cmd(&ctx, c),
        Command::Ball(c) => ball_cmd(&ctx, c),
        Command::Heis(c) => heis_cmd(&ctx, c),
        Command::Plane(c) => plane_cmd(&ctx, c),
        Command::Control(c) => control_cmd(&ctx, c),
        Command::Sphere(c) => sphere_cmd(&ctx, c),
        Command::Experiment { name } => {
            let seed = ctx.seed()?;
            let (passed, report) = experiments::run(name, seed)?;
            ctx.report(&json!({ "experiment": name, "seed": seed, "passed": passed, "report": report }), passed, true)
        }
    }
}

fn group_cmd(ctx: &Ctx, c: &GroupCmd) -> Result<i32> {
    match c {
        GroupCmd::Validate { group } => {
            let spec = files::load_spec(group)?;
            let rep = spec.validate();
            let valid = rep.is_valid();
            ctx.report(&json!({ "group": group, "valid": valid, "violations": rep.violations }), valid, true)
        }
        GroupCmd::Info { group } => {
            let g = files::resolve_group(group)?;
            let layers: Vec<_> = g
                .layers()
                .iter()
                .map(|l| json!({ "weight": format!("{}", l.weight), "indices": l.indices }))
                .collect();
            ctx.report(
                &json!({
                    "group": group,
                    "definition": GroupFile::from_spec(g.spec()),
                    "dim": g.dim(),
                    "step": format!("{}", g.step()),
                    "nilpotency_class": g.nilpotency_class(),
                    "abelian": g.is_abelian(),
                    "first_layer": g.first_layer(),
                    "layers": layers,
                }),
                true,
                true,
            )
        }
    }
}

/// Drops a trailing commuting line factor of weight 1.
fn drop_line(g: &GradedGroup) -> Result<GradedGroup> {
    let spec = g.spec();
    let last = spec.dim.checked_sub(1).ok_or_else(|| CliError::usage("product gauge on a trivial group"))?;
    let free = spec.weights[last].is_integer() && *spec.weights[last].numer() == 1;
    if !free || spec.brackets.iter().any(|b| b.i == last || b.j == last || b.k == last) {
        return Err(CliError::usage("product gauge needs a last coordinate that is a commuting line of weight 1"));
    }
    let brackets: Vec<BracketEntry> = spec.brackets.clone();
    Ok(GradedGroup::new(GradedAlgebraSpec::new(last, spec.weights[..last].to_vec(), brackets))?)
}

type DynGauge = Box<dyn Gauge + Send>;

fn make_gauge(name: &str, g: &GradedGroup) -> Result<DynGauge> {
    let need3 = |what: &str| -> Result<()> {
        if g.dim() == 3 && !g.is_abelian() {
            Ok(())
        } else {
            Err(CliError::usage(format!("the {what} gauge is defined on the Heisenberg group only")))
        }
    };
    if let Some(inner) = name.strip_prefix("product:") {
        let base = drop_line(g)?;
        return Ok(Box::new(ProductGauge::new(make_gauge(inner, &base)?)));
    }
    if let Some(path) = name.strip_prefix("ball:") {
        let (_, bg, ball) = files::load_ball(Path::new(path))?;
        if bg.dim() != g.dim() {
            return Err(CliError::usage(format!("ball {path} lives in dimension {}, group in {}", bg.dim(), g.dim())));
        }
        return Ok(Box::new(BallGauge::new(g, ball)));
    }
    Ok(match name {
        "box" => Box::new(BoxQuasiNorm::new(g)),
        "euclidean" => Box::new(EuclideanGauge),
        "koranyi" => {
            need3("Korányi")?;
            Box::new(KoranyiGauge)
        }
        "cc" => {
            need3("sub-Riemannian")?;
            Box::new(HeisenbergCcGauge)
        }
        _ => return Err(CliError::usage(format!("unknown gauge {name:?} (box, euclidean, koranyi, cc, product:<g>, ball:<file>)"))),
    })
}

fn group_gauge(gg: &GroupGauge) -> Result<(GradedGroup, DynGauge)> {
    let g = files::resolve_group(&gg.group)?;
    let gauge = make_gauge(&gg.gauge, &g)?;
    Ok((g, gauge))
}

fn check_points(points: &[Vec<f64>], dim: usize) -> Result<()> {
    match points.iter().find(|p| p.len() != dim) {
        Some(p) => Err(CliError::usage(format!("point {p:?} has {} coordinates, expected {dim}", p.len()))),
        None => Ok(()),
    }
}

fn norm_cmd(ctx: &Ctx, c: &NormCmd) -> Result<i32> {
    match c {
        NormCmd::Eval { gg, point } => {
            let (g, gauge) = group_gauge(gg)?;
            check_points(point, g.dim())?;
            let values: Vec<_> = point.iter().map(|p| json!({ "point": p, "value": gauge.eval(p) })).collect();
            ctx.report(&json!({ "gauge": gg.gauge, "values": values }), true, true)
        }
        NormCmd::Axioms { gg } => {
            let (g, gauge) = group_gauge(gg)?;
            let rep = parallel::verify_norm_axioms(&g, &gauge, ctx.samples(10_000), ctx.seed()?, ctx.tol(1e-9));
            ctx.report(&rep, rep.passed, true)
        }
        NormCmd::Equiv { gg, other } => {
            let (g, gauge) = group_gauge(gg)?;
            let other_gauge = make_gauge(other, &g)?;
            let rep = norms::equivalence_constants(&g, &gauge, &other_gauge, ctx.samples(10_000), ctx.seed()?)?;
            ctx.report(&rep, true, true)
        }
        NormCmd::Holder { gg, eps } => {
            let (g, gauge) = group_gauge(gg)?;
            let w = g.weights_f64();
            let k1 = w.iter().copied().fold(f64::INFINITY, f64::min);
            let k2 = w.iter().copied().fold(0.0, f64::max);
            let rep = norms::holder_bound_check(&g, &gauge, k1, k2, ctx.samples(10_000), *eps, ctx.seed()?)?;
            ctx.report(&json!({ "k1": k1, "k2": k2, "report": rep }), true, true)
        }
    }
}

fn parse_checks(names: &[String]) -> Result<Vec<CheckKind>> {
    if names.is_empty() {
        return Ok(CheckKind::BALL.to_vec());
    }
    names
        .iter()
        .map(|n| match n.as_str() {
            "compact" => Ok(CheckKind::Compact),
            "interior" => Ok(CheckKind::Interior),
            "symmetric" => Ok(CheckKind::Symmetric),
            "combination" => Ok(CheckKind::Combination),
            _ => Err(CliError::usage(format!("unknown check {n:?} (compact, interior, symmetric, combination)"))),
        })
        .collect()
}

fn verify_opts(ctx: &Ctx, default_samples: u64, checks: Vec<CheckKind>) -> Result<VerifyOptions> {
    let mut opts = VerifyOptions::new(ctx.samples(default_samples), ctx.seed()?).only(&checks);
    opts.slack = ctx.tol(opts.slack);
    Ok(opts)
}

fn ball_cmd(ctx: &Ctx, c: &BallCmd) -> Result<i32> {
    match c {
        BallCmd::Verify { ball, checks } => {
            let (_, g, b) = files::load_ball(ball)?;
            let opts = verify_opts(ctx, 10_000, parse_checks(checks)?)?;
            let rep = parallel::verify_ball(&g, &b, &opts)?;
            ctx.report(&rep, rep.passed, true)
        }
        BallCmd::Gauge { ball, point } => {
            let (_, g, b) = files::load_ball(ball)?;
            check_points(point, g.dim())?;
            let gauge = BallGauge::new(&g, b);
            let values = point.iter().map(|p| Ok(json!({ "point": p, "value": gauge.try_eval(p)? }))).collect::<Result<Vec<_>>>()?;
            ctx.report(&json!({ "values": values }), true, true)
        }
        BallCmd::Euclid { group, radius } => {
            let g = files::resolve_group(group)?;
            let b = norms::euclidean_ball_candidate(&g, *radius)?;
            let rep = parallel::verify_ball(&g, &b, &verify_opts(ctx, 10_000, CheckKind::BALL.to_vec())?)?;
            let passed = rep.passed;
            ctx.report(&json!({ "group": group, "radius": radius, "report": rep }), passed, true)
        }
    }
}

fn load_heisenberg(path: &Path) -> Result<HeisenbergBall> {
    match files::load_ball(path)?.0 {
        BallFile::Heisenberg(b) => Ok(b),
        _ => Err(CliError::usage(format!("{} is not a Heisenberg ball file", path.display()))),
    }
}

fn heis_cmd(ctx: &Ctx, c: &HeisCmd) -> Result<i32> {
    match c {
        HeisCmd::Build { src, offset } => {
            let (profile, domain) = match &src.profile {
                Some(path) => {
                    let f: ProfileFile = files::read_json(path)?;
                    (f.to_profile(ctx.g.seed)?, f.domain)
                }
                None => {
                    let d = files::parse_domain(&src.domain)?;
                    (files::profile_from_tag(&src.g, &d, ctx.g.seed)?, d)
                }
            };
            let a = compute_a(&profile, &domain);
            let ball = match offset {
                Some(b) => HeisenbergBall::with_offset(profile, domain, *b)?,
                None => build_ball(profile, domain)?,
            };
            let file = BallFile::Heisenberg(ball.clone());
            match &ctx.g.out {
                Some(path) => {
                    files::write_text(path, &json::to_string(&file))?;
                    let rep = json!({
                        "out": path,
                        "a": a,
                        "offset": ball.offset,
                        "lipschitz": ball.profile.lipschitz,
                        "sup_abs": ball.profile.sup_abs,
                    });
                    ctx.report(&rep, true, false)
                }
                None => ctx.report(&file, true, false),
            }
        }
        HeisCmd::Check62 { ball, points, t_values } => {
            let b = load_heisenberg(ball)?;
            let rep = parallel::condition_62(&|v| b.f(v), &b.domain, Grid62 { points: *points, t_values: *t_values });
            let passed = rep.min_margin >= -ctx.tol(1e-9);
            ctx.report(&json!({ "report": rep, "passed": passed }), passed, true)
        }
        HeisCmd::Profile { ball, scale, grid, csv } => {
            let b = load_heisenberg(ball)?;
            let r = b.domain.scaled(*scale).circumradius();
            let inner = b.domain.scaled(*scale);
            let mut rows = Vec::new();
            let mut sup = 0.0_f64;
            for i in 0..*grid {
                for j in 0..*grid {
                    let t = |k: usize| if *grid > 1 { -r + 2.0 * r * k as f64 / (*grid - 1) as f64 } else { 0.0 };
                    let v = [t(i), t(j)];
                    if !inner.contains(v) {
                        continue;
                    }
                    let s = extract_profile(&b, &v)?;
                    let expected = b.f(v);
                    sup = sup.max((s.value - expected).abs());
                    rows.push(vec![v[0], v[1], s.value, expected]);
                }
            }
            if let Some(path) = csv {
                files::write_csv(path, &["x", "y", "extracted", "expected"].map(String::from), rows.iter().cloned())?;
            }
            let passed = sup <= ctx.tol(1e-6);
            ctx.report(&json!({ "scale": scale, "points": rows.len(), "sup_error": sup, "passed": passed }), passed, true)
        }
        HeisCmd::Star { ball } => {
            let (_, _, b) = files::load_ball(ball)?;
            let rep = parallel::star_and_vertical(&b, ctx.samples(10_000), ctx.seed()?)?;
            ctx.report(&rep, rep.passed, true)
        }
    }
}

fn plane_cmd(ctx: &Ctx, c: &PlaneCmd) -> Result<i32> {
    let plane = GradedGroup::abelian_plane(2, 2);
    match c {
        PlaneCmd::Yregion { c, eps, beta, alpha } => {
            let y = YRegion::new(*eps, *beta, *c);
            let rep = parallel::verify_ball(&plane, &y, &verify_opts(ctx, 100_000, vec![CheckKind::Combination])?)?;
            let top = beta + c * eps.sqrt();
            let (p, q) = ([-eps, top], [*eps, top]);
            let (image, margin) = check_triple(&plane, &y, &p, &q, 0.5);
            let witness_ok = margin >= -ctx.tol(1e-9);
            let passed = rep.passed && witness_ok;
            let out = json!({
                "region": y,
                "window_ok": y.window_ok(*alpha),
                "sampled": rep,
                "witness": { "p": p, "q": q, "t": 0.5, "image": image, "margin": margin, "passed": witness_ok },
                "passed": passed,
            });
            ctx.report(&out, passed, true)
        }
        PlaneCmd::Fractal { m, big_m, terms, s_grid, dim, points, csv, verify } => {
            let profile = FractalProfile::weierstrass(*m, *big_m, *terms);
            let params = FractalBallParams { s_grid: *s_grid, ..FractalBallParams::for_profile(&profile) };
            let ball = build_fractal_ball(params, profile.clone())?;
            let mut out = serde_json::Map::new();
            out.insert("params".into(), json!(ball.params));
            let mut passed = true;
            let arc = if *dim || csv.is_some() { ball.arc_samples(*points) } else { Vec::new() };
            if *dim {
                let radii: Vec<f64> = arc.iter().map(|p| p[0].hypot(p[1])).collect();
                let rep = box_counting_graph(&radii, 4, 11)?;
                let bounds = dimension_bounds_check(&plane, rep.dimension, rep.ci);
                passed &= bounds.passed;
                out.insert("dimension".into(), json!({ "points": arc.len(), "report": rep, "bounds": bounds }));
            }
            if let Some(path) = csv {
                files::write_csv(path, &["x", "y", "t"].map(String::from), arc.iter().map(|p| p.to_vec()))?;
            }
            if *verify {
                let rep = parallel::verify_ball(&plane, &ball, &verify_opts(ctx, 10_000, CheckKind::BALL.to_vec())?)?;
                passed &= rep.passed;
                out.insert("verification".into(), json!(rep));
            }
            if let Some(path) = &ctx.g.out {
                files::write_text(path, &json::to_string(&BallFile::Fractal { params: ball.params.clone(), profile }))?;
                out.insert("out".into(), json!(path));
            }
            out.insert("passed".into(), json!(passed));
            ctx.report(&out, passed, false)
        }
        PlaneCmd::Remark => {
            let rep = parallel::verify_ball(&plane, &RemarkBall, &verify_opts(ctx, 10_000, CheckKind::BALL.to_vec())?)?;
            let line = ProbeCurve::Segment { start: vec![-0.05, 1.0], end: vec![0.05, 1.0] };
            let reg = graph_regularity_estimate(&BallGauge::new(&plane, RemarkBall), &line, 14)?;
            let passed = rep.passed;
            ctx.report(&json!({ "verification": rep, "regularity_near_top": reg, "passed": passed }), passed, true)
        }
    }
}

fn load_control(input: &ControlInput) -> Result<(GradedGroup, control::ControlSignal, Vec<f64>)> {
    let g = files::resolve_group(&input.group)?;
    let u = files::read_json::<ControlFile>(&input.control)?.to_control()?;
    let o = input.origin.clone().unwrap_or_else(|| vec![0.0; g.dim()]);
    check_points(std::slice::from_ref(&o), g.dim())?;
    Ok((g, u, o))
}

fn jacobian(g: &GradedGroup, u: &control::ControlSignal, o: &[f64], method: JacobianMethod, fd_step: f64) -> Result<EndpointJacobian> {
    Ok(match method {
        JacobianMethod::Augmented => endpoint_jacobian(g, u, o)?,
        JacobianMethod::Exact => endpoint_jacobian_exact(g, u, o)?,
        JacobianMethod::Fd => endpoint_jacobian_fd(g, u, o, fd_step)?,
    })
}

fn control_cmd(ctx: &Ctx, c: &ControlCmd) -> Result<i32> {
    match c {
        ControlCmd::Endpoint { input, ode } => {
            let (g, u, o) = load_control(input)?;
            let p = endpoint(&g, &u, &o)?;
            let mut out = json!({ "endpoint": p });
            if let Some(steps) = ode {
                let q = endpoint_ode(&g, &u, &o, *steps)?;
                let diff = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                out["ode_endpoint"] = json!(q);
                out["max_difference"] = json!(diff);
            }
            ctx.report(&out, true, true)
        }
        ControlCmd::Jacobian { input, method, fd_step } => {
            let (g, u, o) = load_control(input)?;
            let jac = jacobian(&g, &u, &o, *method, *fd_step)?;
            let a = jac.assembled();
            let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
            ctx.report(&json!({ "n": jac.n, "r": jac.r, "m": u.m(), "rows": rows }), true, true)
        }
        ControlCmd::Tau { input, method, target_scale } => {
            let (g, u, o) = load_control(input)?;
            let s = minimal_stretching(&jacobian(&g, &u, &o, *method, 1e-5)?, &u.norm, *target_scale)?;
            ctx.report(&s, true, true)
        }
        ControlCmd::Scan { group, m, count, norm } => {
            let g = files::resolve_group(group)?;
            let dirs = scan_directions(g.first_layer().len(), *count);
            let rep = parallel::singular_scan(&g, &dirs, *m, &files::parse_norm(norm)?, ctx.tol(1e-8))?;
            ctx.report(&rep, true, true)
        }
        ControlCmd::Geodesic { group, target, m, restarts, norm } => {
            let g = files::resolve_group(group)?;
            check_points(std::slice::from_ref(target), g.dim())?;
            let opts = GeodesicOptions { restarts: *restarts, tol: ctx.tol(1e-10), ..GeodesicOptions::new(*m, ctx.seed()?) };
            let s = parallel::geodesic_solve(&g, &files::parse_norm(norm)?, target, &opts)?;
            let out = json!({
                "target": target,
                "value": s.value,
                "endpoint_error": s.endpoint_error,
                "converged": s.converged,
                "restart": s.restart,
                "control": ControlFile::from_control(&s.control),
            });
            ctx.report(&out, s.converged, true)
        }
        ControlCmd::D0sq { gg, radius, power } => {
            let (g, gauge) = group_gauge(gg)?;
            let rep = control::d0_power_quotient_probe(&g, &gauge, *radius, *power, ctx.samples(1000) as usize, ctx.seed()?);
            ctx.report(&rep, true, true)
        }
    }
}

fn sphere_cmd(ctx: &Ctx, c: &SphereCmd) -> Result<i32> {
    match c {
        SphereCmd::Sample { gg, csv } => {
            let (g, gauge) = group_gauge(gg)?;
            let s = sample_sphere(&g, &gauge, ctx.samples(1000) as usize, ctx.seed()?)?;
            let err = s.max_roundtrip_error(&gauge);
            if let Some(path) = csv {
                let n = g.dim();
                let mut header: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
                header.push("gauge".into());
                header.extend((0..n).map(|i| format!("s{i}")));
                let rows = (0..s.directions.len()).map(|k| {
                    let mut row = s.directions[k].clone();
                    row.push(s.gauge_values[k]);
                    row.extend(&s.sphere_points[k]);
                    row
                });
                files::write_csv(path, &header, rows)?;
            }
            let passed = err <= ctx.tol(1e-6);
            ctx.report(&json!({ "samples": s.directions.len(), "max_roundtrip_error": err, "passed": passed }), passed, true)
        }
        SphereCmd::Dim { gg, scale_min, scale_max } => {
            let (g, gauge) = group_gauge(gg)?;
            let s = sample_sphere(&g, &gauge, ctx.samples(100_000) as usize, ctx.seed()?)?;
            let rep = box_counting_points(&s.sphere_points, *scale_min, *scale_max)?;
            let bounds = dimension_bounds_check(&g, rep.dimension, rep.ci);
            let passed = bounds.passed;
            ctx.report(&json!({ "estimate": rep.dimension, "report": rep, "bounds": bounds, "passed": passed }), passed, true)
        }
        SphereCmd::Regularity { gg, start, end, center, tangent, half_angle, levels } => {
            let (g, gauge) = group_gauge(gg)?;
            let curve = match (start, end, center, tangent) {
                (Some(s), Some(e), None, None) => ProbeCurve::Segment { start: s.clone(), end: e.clone() },
                (None, None, Some(c), Some(t)) => ProbeCurve::GreatCircle { center: c.clone(), tangent: t.clone(), half_angle: *half_angle },
                _ => return Err(CliError::usage("give either --start and --end or --center and --tangent")),
            };
            let pts = match &curve {
                ProbeCurve::Segment { start, end } => vec![start.clone(), end.clone()],
                ProbeCurve::GreatCircle { center, tangent, .. } => vec![center.clone(), tangent.clone()],
            };
            check_points(&pts, g.dim())?;
            let rep = graph_regularity_estimate(&gauge, &curve, *levels)?;
            ctx.report(&json!({ "curve": curve, "report": rep }), true, true)
        }
        SphereCmd::Cusp { gg, direction, n, gap_min, gap_max } => {
            let (g, gauge) = group_gauge(gg)?;
            check_points(std::slice::from_ref(direction), g.dim())?;
            let samples = cusp_samples(&gauge, direction, *n, *gap_min, *gap_max)?;
            let fit = cusp_exponent_fit(&samples)?;
            ctx.report(&json!({ "direction": direction, "fit": fit, "samples": samples }), true, true)
        }
        SphereCmd::Cone { ball, direction, apertures, height, nearby } => {
            let (_, g, b) = files::load_ball(ball)?;
            check_points(std::slice::from_ref(direction), g.dim())?;
            let apertures: Vec<f64> = if apertures.is_empty() {
                (1..=40).map(|k| k as f64 * std::f64::consts::PI / 80.0).collect()
            } else {
                apertures.clone()
            };
            let gauge = BallGauge::new(&g, &b);
            let rep = tent_cone_probe(&g, &b, &gauge, direction, &apertures, *height, *nearby, ctx.seed()?)?;
            ctx.report(&rep, true, true)
        }
    }
}
