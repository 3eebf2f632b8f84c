//! `projbody` command line: body, covariogram, projection-body and mean-body
//! computations, inequality verification, isotropy tools and parameter sweeps.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use projbody::bodies::{Body, Polytope};
use projbody::covariogram::{mu_covariogram, CovariogramQuery};
use projbody::inequalities::{ehrhard_bound_value, gaussian_sharpness_sweep, pe_sweep, verify, InequalityId, Precision, VerifyArgs};
use projbody::isotropic::{isotropy_residual, minimize_i, reverse_isoperimetric, ReverseMode};
use projbody::meanbodies::{inclusion_chain_report, radial_mean_body, spectral_mean_body, MeanBodyResult};
use projbody::measures::{Density, Integrator};
use projbody::numerics::{SphereGrid, DEFAULT_SAMPLES};
use projbody::projection::{
    brightness_residual, offset_vector, projection_zonoid, zonoid_polar_volume, BrightnessMode, BrightnessOptions, Weighting,
};
use projbody::report::Report;
use projbody::spec::{parse_body, parse_family, parse_matrix, parse_measure, parse_polytope, parse_reals};
use projbody::{Error, Result};

#[derive(Parser)]
#[command(name = "projbody", version, about = "Measure-dependent projection bodies and their inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect or transform a body
    #[command(subcommand)]
    Body(BodyCmd),
    /// Evaluate μ-covariograms
    #[command(subcommand)]
    Covariogram(CovCmd),
    /// Projection bodies Π_μK
    #[command(subcommand)]
    Projbody(ProjCmd),
    /// Radial and spectral mean bodies
    #[command(subcommand)]
    Meanbody(MeanCmd),
    /// Check one named inequality
    Verify(VerifyCmd),
    /// Isotropy of the weighted surface measure
    #[command(subcommand)]
    Isotropic(IsoCmd),
    /// Parameter sweeps as (parameter, value, error) rows
    #[command(subcommand)]
    Sweep(SweepCmd),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    /// Output format
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = DEFAULT_SAMPLES, global = true)]
    samples: usize,
    /// Sphere-grid size
    #[arg(long, default_value_t = 4096, global = true)]
    grid: usize,
    /// Cubature tolerance
    #[arg(long, default_value_t = 1e-10, global = true)]
    tol: f64,
}

impl Common {
    fn precision(&self) -> Precision {
        Precision { grid: self.grid, tol: self.tol, seed: self.seed, samples: self.samples }
    }

    fn sphere(&self, n: usize) -> Result<SphereGrid> {
        SphereGrid::standard(n, self.grid)
    }
}

#[derive(Args, Clone)]
struct Target {
    /// Body: shorthand (simplex:2, cube:2, cross:3, polygon:6, ball:3), JSON or a file
    #[arg(long)]
    body: String,
    /// Measure: lebesgue, gaussian, radial_power:<a>, exp_norm:<body>, JSON or a file
    #[arg(long, default_value = "lebesgue")]
    measure: String,
}

impl Target {
    fn polytope(&self) -> Result<Polytope> {
        parse_polytope(&self.body)
    }

    fn both(&self) -> Result<(Polytope, Density)> {
        let k = self.polytope()?;
        let mu = parse_measure(&self.measure, k.dim())?;
        Ok((k, mu))
    }
}

#[derive(Subcommand)]
enum BodyCmd {
    /// Volume, vertices, facets and symmetry
    Info {
        #[arg(long)]
        body: String,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a linear map, then a translation
    Transform {
        #[arg(long)]
        body: String,
        /// Row-major matrix `a,b;c,d`
        #[arg(long)]
        map: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        translate: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CovMode {
    Plain,
    Polarized,
    Functional,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cubature,
    MonteCarlo,
}

#[derive(Args, Clone)]
struct CovOpts {
    #[command(flatten)]
    target: Target,
    #[arg(long, value_enum, default_value = "plain")]
    mode: CovMode,
    /// Weight function f for the functional mode, as a measure spec
    #[arg(long)]
    weight: Option<String>,
    #[arg(long, value_enum, default_value = "cubature")]
    method: Method,
}

#[derive(Subcommand)]
enum CovCmd {
    /// Value at one translation x
    Eval {
        #[command(flatten)]
        opts: CovOpts,
        /// Translation x, comma separated
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        common: Common,
    },
    /// Values along a ray up to the longest chord
    Profile {
        #[command(flatten)]
        opts: CovOpts,
        /// Unit direction, comma separated
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ProjCmd {
    /// Support function on the sphere grid
    Build {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        weight: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Volume of the polar projection body
    PolarVolume {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Covariogram derivative against the support function in one direction
    Brightness {
        #[command(flatten)]
        target: Target,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, value_enum, default_value = "plain")]
        mode: CovMode,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long, value_enum, default_value = "cubature")]
        method: Method,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum MeanCmd {
    /// Radial mean body of order p
    Radial {
        #[arg(long)]
        body: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[command(flatten)]
        common: Common,
    },
    /// Spectral mean body of order p
    Spectral {
        #[arg(long)]
        body: String,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[command(flatten)]
        common: Common,
    },
    /// Inclusion chain over increasing orders
    Chain {
        #[arg(long)]
        body: String,
        /// Increasing orders, comma separated
        #[arg(long, default_value = "0,1,2", allow_hyphen_values = true)]
        p_list: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct VerifyCmd {
    /// Inequality id, e.g. zhang_petty
    id: String,
    #[command(flatten)]
    target: Target,
    /// Second measure ν
    #[arg(long)]
    nu: Option<String>,
    /// Weight function f, as a measure spec
    #[arg(long)]
    weight: Option<String>,
    /// log, power:<s> or gaussian_phi_inverse
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Q,
    F,
}

#[derive(Subcommand)]
enum IsoCmd {
    /// Distance of the weighted surface measure from isotropic
    Residual {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Minimize the isotropy functional over volume-preserving maps
    Minimize {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-9)]
        grad_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Boundary measure against the reverse isoperimetric bound
    ReverseIso {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "log")]
        family: String,
        #[arg(long, value_enum, default_value = "q")]
        mode: ModeArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum SweepCmd {
    /// Pe(μ, tK) for the exp_norm measure of K
    Pe {
        #[arg(long, default_value = "cube:2")]
        body: String,
        #[arg(long, default_value = "1,2,4,8,12,16")]
        t_list: String,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian Zhang sides on growing balls
    GaussianSharpness {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "0.5,1,2,5,10,20")]
        r_list: String,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian halfspace bound values
    Ehrhard {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "-2,-1,0,1,2", allow_hyphen_values = true)]
        x_list: String,
        #[command(flatten)]
        common: Common,
    },
}

/// What a command produces.
enum Output {
    Report(Report),
    /// Header and rows for csv; objects keyed by header for json.
    Table(Vec<String>, Vec<Vec<Value>>),
    Record(Value),
}

struct Outcome {
    output: Output,
    /// Verification commands report a verdict.
    verdict: Option<bool>,
}

impl Outcome {
    fn plain(output: Output) -> Self {
        Self { output, verdict: None }
    }

    fn report(r: Report) -> Self {
        let pass = r.pass;
        Self { output: Output::Report(r), verdict: Some(pass) }
    }
}

const REPORT_HEADER: [&str; 6] = ["id", "lhs", "rhs", "margin", "tolerance", "pass"];

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn emit(output: &Output, format: Format, out: &mut impl Write) -> std::io::Result<()> {
    match (output, format) {
        (Output::Report(r), Format::Json) => writeln!(out, "{}", serde_json::to_string_pretty(r).expect("report serializes")),
        (Output::Record(v), Format::Json) => writeln!(out, "{}", serde_json::to_string_pretty(v).expect("value serializes")),
        (Output::Table(header, rows), Format::Json) => {
            let objs: Vec<Value> = rows.iter().map(|r| Value::Object(header.iter().cloned().zip(r.iter().cloned()).collect())).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&objs).expect("table serializes"))
        }
        (Output::Report(r), Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(REPORT_HEADER)?;
            w.write_record([
                r.id.clone(),
                cell(&json!(r.lhs)),
                cell(&json!(r.rhs)),
                cell(&json!(r.margin)),
                cell(&json!(r.tolerance)),
                r.pass.to_string(),
            ])?;
            w.flush()
        }
        (Output::Table(header, rows), Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r.iter().map(cell))?;
            }
            w.flush()
        }
        (Output::Record(v), Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["key", "value"])?;
            let mut flat = Vec::new();
            flatten("", v, &mut flat);
            for (k, v) in flat {
                w.write_record([k, v])?;
            }
            w.flush()
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

fn integrator(method: Method, common: &Common) -> Integrator {
    match method {
        Method::Cubature => Integrator::Cubature { tol: common.tol },
        Method::MonteCarlo => Integrator::MonteCarlo { stream: projbody::numerics::RandomStream::new(common.seed, 0), samples: common.samples },
    }
}

fn vector(text: &str, field: &str, n: usize) -> Result<Vec<f64>> {
    let v = parse_reals(text, field)?;
    if v.len() != n {
        return Err(Error::Config(format!("field '{field}' has {} entries, expected {n}", v.len())));
    }
    Ok(v)
}

fn unit_vector(text: &str, field: &str, n: usize) -> Result<Vec<f64>> {
    let v = vector(text, field, n)?;
    let r = projbody::linalg::norm(&v);
    if !(r > 0.0) {
        return Err(Error::Config(format!("field '{field}' must be a nonzero vector")));
    }
    Ok(v.iter().map(|x| x / r).collect())
}

fn weight_density(weight: &Option<String>, n: usize) -> Result<Option<Density>> {
    weight.as_deref().map(|w| parse_measure(w, n)).transpose()
}

fn query<'a>(k: &'a Polytope, mu: &'a Density, mode: CovMode, f: Option<&'a Density>) -> Result<CovariogramQuery<'a>> {
    match (mode, f) {
        (CovMode::Plain, None) => Ok(CovariogramQuery::plain(k, mu)),
        (CovMode::Polarized, None) => Ok(CovariogramQuery::polarized(k, mu)),
        (CovMode::Functional, Some(f)) => Ok(CovariogramQuery::functional(k, mu, f)),
        (CovMode::Functional, None) => Err(Error::Config("field 'weight' is required in functional mode".into())),
        (_, Some(_)) => Err(Error::Config("field 'weight' is only used in functional mode".into())),
    }
}

fn mean_body_table(m: &MeanBodyResult) -> Output {
    let n = m.body.grid().dim();
    let mut header: Vec<String> = (1..=n).map(|i| format!("theta{i}")).collect();
    header.extend(["radius".into(), "error".into()]);
    let rows = m
        .body
        .grid()
        .directions()
        .iter()
        .zip(m.radial())
        .zip(&m.errors)
        .map(|((th, r), e)| th.iter().map(|x| json!(x)).chain([json!(r), json!(e)]).collect())
        .collect();
    Output::Table(header, rows)
}

fn triples(name: &str, rows: Vec<(f64, f64, f64)>) -> Output {
    Output::Table(vec![name.into(), "value".into(), "error".into()], rows.into_iter().map(|(p, v, e)| vec![json!(p), json!(v), json!(e)]).collect())
}

fn run(cmd: Command) -> Result<(Outcome, Format)> {
    match cmd {
        Command::Body(BodyCmd::Info { body, common }) => {
            let info = match parse_body(&body)? {
                Body::Polytope(k) => json!({
                    "kind": "polytope",
                    "dimension": k.dim(),
                    "volume": k.volume(),
                    "surface_area": k.surface_area(),
                    "vertex_count": k.vertices().len(),
                    "facet_count": k.facets().len(),
                    "centroid": k.centroid(),
                    "symmetric": k.is_symmetric(),
                    "origin_interior": k.contains_origin_interior(),
                    "vertices": k.vertices(),
                }),
                Body::Ball(b) => json!({
                    "kind": "ball",
                    "dimension": b.dim(),
                    "radius": b.radius(),
                    "center": b.center(),
                    "volume": b.volume(),
                    "surface_area": b.surface_area(),
                }),
            };
            Ok((Outcome::plain(Output::Record(info)), common.format))
        }
        Command::Body(BodyCmd::Transform { body, map, translate, common }) => {
            let mut k = parse_polytope(&body)?;
            if let Some(m) = map {
                k = k.apply_linear(&parse_matrix(&m, "map")?)?;
            }
            if let Some(t) = translate {
                k = k.translated(&vector(&t, "translate", k.dim())?);
            }
            let header = (1..=k.dim()).map(|i| format!("x{i}")).collect();
            let rows = k.vertices().iter().map(|v| v.iter().map(|x| json!(x)).collect()).collect();
            let out = match common.format {
                Format::Csv => Output::Table(header, rows),
                Format::Json => Output::Record(json!({"vertices": k.vertices(), "volume": k.volume()})),
            };
            Ok((Outcome::plain(out), common.format))
        }
        Command::Covariogram(CovCmd::Eval { opts, x, common }) => {
            let (k, mu) = opts.target.both()?;
            let f = weight_density(&opts.weight, k.dim())?;
            let q = query(&k, &mu, opts.mode, f.as_ref())?.with_integrator(integrator(opts.method, &common));
            let x = vector(&x, "x", k.dim())?;
            let r = mu_covariogram(&q, &x)?;
            Ok((Outcome::plain(Output::Record(json!({"x": x, "value": r.value, "error": r.error_estimate}))), common.format))
        }
        Command::Covariogram(CovCmd::Profile { opts, direction, steps, common }) => {
            let (k, mu) = opts.target.both()?;
            let f = weight_density(&opts.weight, k.dim())?;
            let q = query(&k, &mu, opts.mode, f.as_ref())?.with_integrator(integrator(opts.method, &common));
            let th = unit_vector(&direction, "direction", k.dim())?;
            if steps == 0 {
                return Err(Error::Config("field 'steps' must be positive".into()));
            }
            let rho = k.difference_body()?.radial(&th)?;
            let rows = (0..=steps)
                .map(|i| {
                    let r = rho * i as f64 / steps as f64;
                    let x: Vec<f64> = th.iter().map(|t| t * r).collect();
                    mu_covariogram(&q, &x).map(|g| (r, g.value, g.error_estimate))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((Outcome::plain(triples("r", rows)), common.format))
        }
        Command::Projbody(ProjCmd::Build { target, weight, common }) => {
            let (k, mu) = target.both()?;
            let f = weight_density(&weight, k.dim())?;
            let w = match &f {
                Some(f) => Weighting::Functional(&mu, f),
                None if mu.is_lebesgue() => Weighting::Lebesgue,
                None => Weighting::Measure(&mu),
            };
            let z = projection_zonoid(&k, w, common.tol)?;
            let off = offset_vector(&k, &mu, f.as_ref(), Integrator::Cubature { tol: common.tol }, common.tol)?;
            let out = match common.format {
                Format::Csv => {
                    let n = k.dim();
                    let mut header: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
                    header.extend(["weight".into(), "error".into()]);
                    let rows = z
                        .generators()
                        .iter()
                        .map(|g| g.direction.iter().map(|x| json!(x)).chain([json!(g.weight), json!(g.error)]).collect())
                        .collect();
                    Output::Table(header, rows)
                }
                Format::Json => Output::Record(json!({
                    "generators": z.generators(),
                    "offset": off,
                    "projective": off.is_projective(),
                    "measure": mu.label(),
                })),
            };
            Ok((Outcome::plain(out), common.format))
        }
        Command::Projbody(ProjCmd::PolarVolume { target, common }) => {
            let (k, mu) = target.both()?;
            let w = if mu.is_lebesgue() { Weighting::Lebesgue } else { Weighting::Measure(&mu) };
            let z = projection_zonoid(&k, w, common.tol)?;
            let v = zonoid_polar_volume(&z, &common.sphere(k.dim())?)?;
            let rec = json!({"value": v.value, "error": v.error_estimate, "grid": common.grid, "measure": mu.label()});
            Ok((Outcome::plain(Output::Record(rec)), common.format))
        }
        Command::Projbody(ProjCmd::Brightness { target, direction, mode, weight, method, common }) => {
            let (k, mu) = target.both()?;
            let f = weight_density(&weight, k.dim())?;
            let th = unit_vector(&direction, "direction", k.dim())?;
            let mode = match mode {
                CovMode::Plain => BrightnessMode::Plain,
                CovMode::Polarized => BrightnessMode::Polarized,
                CovMode::Functional => BrightnessMode::Functional,
            };
            let opts = BrightnessOptions { integrator: integrator(method, &common), step: None, tol: common.tol };
            let b = brightness_residual(&k, &mu, f.as_ref(), &th, mode, opts)?;
            let rec = serde_json::to_value(&b).expect("brightness serializes");
            Ok((Outcome::plain(Output::Record(rec)), common.format))
        }
        Command::Meanbody(MeanCmd::Radial { body, p, common }) => {
            let k = parse_polytope(&body)?;
            let p = single(&p, "p")?;
            let m = radial_mean_body(&k, p, &common.sphere(k.dim())?, common.tol)?;
            Ok((Outcome::plain(mean_body_table(&m)), common.format))
        }
        Command::Meanbody(MeanCmd::Spectral { body, p, common }) => {
            let k = parse_polytope(&body)?;
            let p = single(&p, "p")?;
            let m = spectral_mean_body(&k, p, &common.sphere(k.dim())?, common.tol)?;
            Ok((Outcome::plain(mean_body_table(&m)), common.format))
        }
        Command::Meanbody(MeanCmd::Chain { body, p_list, common }) => {
            let k = parse_polytope(&body)?;
            let ps = parse_reals(&p_list, "p_list")?;
            let r = inclusion_chain_report(&k, &ps, &common.sphere(k.dim())?, common.tol.max(1e-12))?;
            Ok((Outcome::report(r), common.format))
        }
        Command::Verify(v) => {
            let id: InequalityId = v.id.parse()?;
            let (k, mu) = v.target.both()?;
            let n = k.dim();
            let nu = v.nu.as_deref().map(|s| parse_measure(s, n)).transpose()?;
            let f = weight_density(&v.weight, n)?;
            let mut args = VerifyArgs::new(&k, &mu).precision(v.common.precision());
            if let Some(nu) = &nu {
                args = args.nu(nu);
            }
            if let Some(f) = &f {
                args = args.f(f);
            }
            if let Some(fam) = &v.family {
                args = args.family(parse_family(fam)?);
            }
            if let Some(s) = v.s {
                args = args.s(s);
            }
            Ok((Outcome::report(verify(id, &args)?), v.common.format))
        }
        Command::Isotropic(IsoCmd::Residual { target, common }) => {
            let (k, mu) = target.both()?;
            let c = isotropy_residual(&k, &mu, common.tol.min(1e-12))?;
            Ok((Outcome::plain(Output::Record(serde_json::to_value(&c).expect("certificate serializes"))), common.format))
        }
        Command::Isotropic(IsoCmd::Minimize { target, max_iters, grad_tol, common }) => {
            let (k, mu) = target.both()?;
            let m = minimize_i(&k, &mu, max_iters, grad_tol, common.seed)?;
            let rec = json!({
                "map": m.point.map.rows(),
                "parameter": m.point.parameter.rows(),
                "determinant": m.point.map.det(),
                "value": m.value,
                "converged": m.converged,
                "iterations": m.iterations,
                "gradient_norm": m.gradient_norm,
            });
            Ok((Outcome::plain(Output::Record(rec)), common.format))
        }
        Command::Isotropic(IsoCmd::ReverseIso { target, family, mode, common }) => {
            let (k, mu) = target.both()?;
            let fam = parse_family(&family)?;
            let mode = match mode {
                ModeArg::Q => ReverseMode::QForm,
                ModeArg::F => ReverseMode::FForm,
            };
            let r = reverse_isoperimetric(&k, &mu, &fam, mode, &common.precision())?;
            Ok((Outcome::report(r), common.format))
        }
        Command::Sweep(SweepCmd::Pe { body, t_list, common }) => {
            let k = parse_polytope(&body)?;
            let ts = parse_reals(&t_list, "t_list")?;
            let sw = pe_sweep(&k, &ts, &common.sphere(k.dim())?, common.tol)?;
            let out = match common.format {
                Format::Csv => triples("t", sw.samples.iter().map(|s| (s.t, s.direct.value, s.direct.error_estimate)).collect()),
                Format::Json => Output::Record(serde_json::to_value(&sw).expect("sweep serializes")),
            };
            Ok((Outcome::plain(out), common.format))
        }
        Command::Sweep(SweepCmd::GaussianSharpness { n, r_list, common }) => {
            let rs = parse_reals(&r_list, "r_list")?;
            let sw = gaussian_sharpness_sweep(n, &rs)?;
            let out = match common.format {
                Format::Csv => Output::Table(
                    vec!["r".into(), "value".into(), "error".into(), "outer".into()],
                    sw.samples.iter().map(|s| vec![json!(s.r), json!(s.average.value), json!(s.average.error_estimate), json!(s.outer)]).collect(),
                ),
                Format::Json => Output::Record(serde_json::to_value(&sw).expect("sweep serializes")),
            };
            Ok((Outcome::plain(out), common.format))
        }
        Command::Sweep(SweepCmd::Ehrhard { n, x_list, common }) => {
            let xs = parse_reals(&x_list, "x_list")?;
            let rows = xs.iter().map(|&x| ehrhard_bound_value(n, x).map(|v| (x, v.value, v.error_estimate))).collect::<Result<Vec<_>>>()?;
            Ok((Outcome::plain(triples("x", rows)), common.format))
        }
    }
}

fn single(text: &str, field: &str) -> Result<f64> {
    match parse_reals(text, field)?.as_slice() {
        [p] => Ok(*p),
        _ => Err(Error::Config(format!("field '{field}' expects a single number"))),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Hypothesis(_) => 3,
        _ => 1,
    }
}

fn verdict_code(verdict: Option<bool>) -> u8 {
    match verdict {
        Some(false) => 2,
        _ => 0,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok((outcome, format)) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            if let Err(e) = emit(&outcome.output, format, &mut lock) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(verdict_code(outcome.verdict))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
