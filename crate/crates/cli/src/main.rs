//! `pdangles`: command-line front end for the cohomogeneity-one engine and the
//! mesh pipelines.

mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdangles::cohom1::{
    asymptotic_exponent, closed_form_angle, closing_exponent, geometric_grid, numeric_angle, sweep_row, Family,
    FamilyParams, SweepRow,
};
use pdangles::dtn::{Dtn, DtnReport};
use pdangles::forms::FormSpace;
use pdangles::hodge::{HodgeDegree, HodgeReport};
use pdangles::mesh::{
    betti_numbers, generate_annulus, generate_flat_torus, generate_punctured_torus, load_off, relative_betti_numbers,
    Mesh,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use output::{csv_bytes, emit, json_bytes, provenance, Format};

const EXIT_VALIDATION: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_RUNTIME: u8 = 1;

const SWEEP_COLUMNS: &str = "\
Sweep CSV columns:
  family             cpn | lens | grassmann
  n, k               dimension parameters
  r                  ball radius, 0 < r < π/2
  m                  lens order (1 for cpn and grassmann)
  cos_theta_closed   cos θ from the closed form
  cos_theta_numeric  cos θ from radial ODE shooting and quadrature
  abs_diff           |cos_theta_closed − cos_theta_numeric|";

const EXPONENT_COLUMNS: &str = "\
Exponent CSV columns:
  family         cpn | grassmann
  n, k           dimension parameters
  slope          least-squares slope of log(1 − cos θ) against log r
  expected       2n (cpn) or n (grassmann)
  rel_err        |slope − expected| / expected
  theta_slope    slope of log θ against log r
  closing_slope  slope of log cos θ against log(π/2 − r)";

const HODGE_COLUMNS: &str = "\
Hodge CSV columns (one row per degree; JSON carries the full report):
  degree
  harmonic_neumann, harmonic_dirichlet, exact_dirichlet, coexact_neumann,
  boundary_n, interior_n, boundary_d, interior_d, exact_coexact
                       dimensions of the nine subspaces
  betti, relative_betti  Betti numbers from integer incidence ranks
  max_orthogonality    largest cross inner product that must vanish
  trace_distance_n, trace_distance_d
                       distance between interior splits and their trace criteria
  cosines              duality-angle cosines, ';'-separated";

const DTN_COLUMNS: &str = "\
DtN CSV columns (JSON carries the full report):
  degree
  lambda_rank, kernel_dim, complementary_image_dim
  kernel_image_distance_primal, kernel_image_distance_dual
  exact_annihilation
  t_squared_eigenvalues  |eigenvalues| of the restricted T̃², ascending, ';'-separated
  cos_squared            squared duality-angle cosines, ascending, ';'-separated
  nonzero_eigenvalues    count of eigenvalues above 1e-8
  max_discrepancy        largest |eigenvalue − cos²| over the non-zero eigenvalues after
                         sorting (empty if counts differ or there are none)
  max_boundary_cup_residual  largest cup-product residual over boundary Dirichlet fields";

const VERIFY_COLUMNS: &str = "\
Verify CSV columns:
  suite, name   invariant identifier
  residual      measured value
  tolerance     pass threshold (residual ≤ tolerance)
  pass          true | false
Exit status 3 if any invariant fails.";

#[derive(Parser)]
#[command(
    name = "pdangles",
    version,
    about = "Poincaré duality angles: closed forms, radial ODEs and discrete Hodge theory",
    after_help = "Exit status: 0 success, 1 I/O or solver failure, 2 invalid input, 3 failed invariant in verify.\n\
                  Errors are printed as one line `ERROR <module>:<code> <message>`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Angle for one parameter tuple, by closed form and by ODE plus quadrature.
    #[command(after_help = SWEEP_COLUMNS)]
    Angles(AnglesArgs),
    /// Closed form against numeric route over a parameter grid.
    #[command(after_help = SWEEP_COLUMNS)]
    Sweep(SweepArgs),
    /// Small-r and near-closing exponents.
    #[command(after_help = EXPONENT_COLUMNS)]
    Asymptotics(AsymptoticsArgs),
    /// Hodge–Morrey–Friedrichs decomposition and duality angles on a mesh.
    #[command(name = "mesh-hodge", after_help = HODGE_COLUMNS)]
    MeshHodge(MeshHodgeArgs),
    /// Dirichlet-to-Neumann calculus on a mesh.
    #[command(name = "mesh-dtn", after_help = DTN_COLUMNS)]
    MeshDtn(MeshDtnArgs),
    /// Run the invariant suites.
    #[command(after_help = VERIFY_COLUMNS)]
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Cpn,
    Lens,
    Grassmann,
}

impl FamilyArg {
    fn family(self, m: u32) -> Family {
        match self {
            FamilyArg::Cpn => Family::CPn,
            FamilyArg::Lens => Family::Lens(m),
            FamilyArg::Grassmann => Family::Grassmann,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Report path; stdout when omitted. Files are replaced atomically and get a
    /// `<path>.provenance.json` sidecar.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct AnglesArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    r: f64,
    /// Lens order; ignored by the other families.
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["cpn", "grassmann"])]
    families: Vec<FamilyArg>,
    #[arg(long, default_value_t = 2)]
    n_min: u32,
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    #[arg(long, value_delimiter = ',', default_values = ["0.1", "0.3", "0.7", "1.2"])]
    r: Vec<f64>,
    /// Lens orders, used only for the lens family.
    #[arg(long, value_delimiter = ',', default_values = ["1"])]
    m: Vec<u32>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["cpn", "grassmann"])]
    families: Vec<FamilyArg>,
    #[arg(long, value_delimiter = ',', default_values = ["2", "3", "4"])]
    n: Vec<u32>,
    /// Single k; all 1 ≤ k ≤ n−1 when omitted.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 1e-1)]
    r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    #[arg(long, default_value_t = 9)]
    points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Generator {
    Annulus,
    PuncturedTorus,
    FlatTorus,
}

#[derive(Args)]
#[group(skip)]
struct MeshArgs {
    /// OFF file.
    #[arg(long, conflicts_with = "generator", required_unless_present = "generator")]
    mesh: Option<PathBuf>,
    #[arg(long, value_enum)]
    generator: Option<Generator>,
    /// Grid size for the torus generators.
    #[arg(long, default_value_t = 8)]
    divisions: usize,
    /// Side length of the removed square, in grid cells.
    #[arg(long, default_value_t = 2)]
    hole: usize,
    #[arg(long, default_value_t = 2)]
    radial: usize,
    #[arg(long, default_value_t = 16)]
    angular: usize,
    #[arg(long, default_value_t = 1.0)]
    inner: f64,
    #[arg(long, default_value_t = 2.0)]
    outer: f64,
    /// Relative tolerance of the linear solves.
    #[arg(long, default_value_t = FormSpace::DEFAULT_TOLERANCE)]
    tolerance: f64,
}

impl MeshArgs {
    fn load(&self) -> Result<Mesh, CliError> {
        if let Some(path) = &self.mesh {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            return Ok(load_off(&text)?);
        }
        Ok(match self.generator.expect("clap enforces a mesh source") {
            Generator::Annulus => generate_annulus(self.radial, self.angular, self.inner, self.outer)?,
            Generator::PuncturedTorus => generate_punctured_torus(self.divisions, self.hole)?,
            Generator::FlatTorus => generate_flat_torus(self.divisions)?,
        })
    }

    fn describe(&self) -> serde_json::Value {
        match (&self.mesh, self.generator) {
            (Some(p), _) => json!({ "mesh": p.display().to_string() }),
            (None, Some(g)) => json!({
                "generator": format!("{g:?}"),
                "divisions": self.divisions,
                "hole": self.hole,
                "radial": self.radial,
                "angular": self.angular,
                "inner": self.inner,
                "outer": self.outer,
            }),
            _ => json!(null),
        }
    }
}

#[derive(Args)]
struct MeshHodgeArgs {
    #[command(flatten)]
    source: MeshArgs,
    /// Single degree; all degrees when omitted.
    #[arg(long)]
    degree: Option<usize>,
    /// Directory receiving one cochain CSV per harmonic basis field.
    #[arg(long)]
    dump_fields: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MeshDtnArgs {
    #[command(flatten)]
    source: MeshArgs,
    /// Single boundary degree; all when omitted.
    #[arg(long)]
    degree: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: verify::Suite,
    /// Extra OFF meshes checked alongside the generated annulus and punctured torus.
    #[arg(long)]
    mesh: Vec<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Factor applied to every invariant tolerance.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug)]
pub struct CliError {
    module: String,
    code: String,
    message: String,
    exit: u8,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            module: "cli".into(),
            code: "io".into(),
            message: message.into(),
            exit: EXIT_RUNTIME,
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        CliError {
            module: "cli".into(),
            code: "params".into(),
            message: message.into(),
            exit: EXIT_VALIDATION,
        }
    }
}

impl From<pdangles::Error> for CliError {
    fn from(e: pdangles::Error) -> Self {
        CliError {
            module: e.module().into(),
            code: e.code().into(),
            message: e.to_string(),
            exit: if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let first = e
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("ERROR cli:usage {first}");
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ERROR {}:{} {}", e.module, e.code, e.message);
            ExitCode::from(e.exit)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Angles(a) => angles(a),
        Command::Sweep(a) => sweep(a),
        Command::Asymptotics(a) => asymptotics(a),
        Command::MeshHodge(a) => mesh_hodge(a),
        Command::MeshDtn(a) => mesh_dtn(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn cohom1_tolerances() -> serde_json::Value {
    json!({
        "ode_rtol": 1e-12,
        "ode_atol": 1e-12,
        "epsilon": pdangles::cohom1::EPSILON,
        "quadrature_tol": pdangles::cohom1::QUADRATURE_TOL,
        "max_panels": pdangles::cohom1::MAX_PANELS,
    })
}

fn encode<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => csv_bytes(rows),
        Format::Json => json_bytes(rows),
    }
}

fn angles(a: AnglesArgs) -> Result<u8, CliError> {
    let params = FamilyParams::new(a.family.family(a.m), a.n, a.k, a.r)?;
    let closed = closed_form_angle(&params)?;
    let numeric = numeric_angle(&params)?;
    let row = SweepRow {
        family: params.family.name().to_string(),
        n: params.n,
        k: params.k,
        r: params.r,
        m: params.family.m(),
        cos_theta_closed: closed.cos_theta,
        cos_theta_numeric: numeric.cos_theta,
        abs_diff: (closed.cos_theta - numeric.cos_theta).abs(),
    };
    match &a.out.output {
        Some(path) => {
            let prov = provenance("angles", json!(row), cohom1_tolerances());
            emit(Some(path), &encode(&[row], a.out.format)?, &prov)?;
        }
        None if a.out.format == Format::Json => emit(None, &json_bytes(&row)?, &json!(null))?,
        None => {
            println!("cos_theta_closed {}", row.cos_theta_closed);
            println!("cos_theta_numeric {}", row.cos_theta_numeric);
            println!("abs_diff {:e}", row.abs_diff);
            println!("theta {}", closed.theta());
            println!("numeric_error_estimate {:e}", numeric.error_estimate);
        }
    }
    Ok(0)
}

fn sweep(a: SweepArgs) -> Result<u8, CliError> {
    if a.n_min < 2 || a.n_max < a.n_min {
        return Err(CliError::validation(format!(
            "invalid n range {}..={}",
            a.n_min, a.n_max
        )));
    }
    let mut tuples = Vec::new();
    for &f in &a.families {
        let ms: Vec<u32> = if matches!(f, FamilyArg::Lens) {
            a.m.clone()
        } else {
            vec![1]
        };
        for n in a.n_min..=a.n_max {
            for k in 1..n {
                for &r in &a.r {
                    for &m in &ms {
                        tuples.push(FamilyParams::new(f.family(m), n, k, r)?);
                    }
                }
            }
        }
    }
    let rows: Vec<SweepRow> = tuples.par_iter().map(sweep_row).collect::<pdangles::Result<_>>()?;
    let prov = provenance(
        "sweep",
        json!({
            "families": a.families.iter().map(|f| format!("{f:?}").to_lowercase()).collect::<Vec<_>>(),
            "n_min": a.n_min, "n_max": a.n_max, "r": a.r, "m": a.m,
        }),
        cohom1_tolerances(),
    );
    emit(a.out.output.as_deref(), &encode(&rows, a.out.format)?, &prov)?;
    Ok(0)
}

#[derive(Serialize)]
struct ExponentRow {
    family: String,
    n: u32,
    k: u32,
    slope: f64,
    expected: f64,
    rel_err: f64,
    theta_slope: f64,
    closing_slope: f64,
}

fn asymptotics(a: AsymptoticsArgs) -> Result<u8, CliError> {
    if a.families.iter().any(|f| matches!(f, FamilyArg::Lens)) {
        return Err(CliError::validation(
            "asymptotics covers cpn and grassmann; lens angles equal cpn",
        ));
    }
    if !(a.r_min > 0.0 && a.r_min < a.r_max) {
        return Err(CliError::validation("need 0 < r-min < r-max"));
    }
    let grid = geometric_grid(a.r_max, a.r_min, a.points);
    let mut jobs = Vec::new();
    for &f in &a.families {
        for &n in &a.n {
            match a.k {
                Some(k) => jobs.push((f.family(1), n, k)),
                None => jobs.extend((1..n).map(|k| (f.family(1), n, k))),
            }
        }
    }
    let rows: Vec<ExponentRow> = jobs
        .par_iter()
        .map(|&(family, n, k)| {
            let fit = asymptotic_exponent(family, n, k, &grid)?;
            let closing = closing_exponent(family, n, k, &grid)?;
            Ok(ExponentRow {
                family: family.name().to_string(),
                n,
                k,
                slope: fit.slope,
                expected: fit.expected,
                rel_err: fit.rel_err,
                theta_slope: fit.theta_slope,
                closing_slope: closing,
            })
        })
        .collect::<pdangles::Result<_>>()?;
    let prov = provenance(
        "asymptotics",
        json!({ "n": a.n, "k": a.k, "r_grid": grid }),
        json!({ "min_radius": pdangles::cohom1::MIN_ASYMPTOTIC_R }),
    );
    emit(a.out.output.as_deref(), &encode(&rows, a.out.format)?, &prov)?;
    Ok(0)
}

fn degrees(requested: Option<usize>, max: usize) -> Result<Vec<usize>, CliError> {
    match requested {
        Some(p) if p > max => Err(CliError::validation(format!("degree {p} exceeds {max}"))),
        Some(p) => Ok(vec![p]),
        None => Ok((0..=max).collect()),
    }
}

fn joined(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct HodgeRow {
    degree: usize,
    harmonic_neumann: usize,
    harmonic_dirichlet: usize,
    exact_dirichlet: usize,
    coexact_neumann: usize,
    boundary_n: usize,
    interior_n: usize,
    boundary_d: usize,
    interior_d: usize,
    exact_coexact: usize,
    betti: usize,
    relative_betti: usize,
    max_orthogonality: f64,
    trace_distance_n: f64,
    trace_distance_d: f64,
    cosines: String,
}

fn dump_fields(dir: &Path, h: &HodgeDegree) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    for (label, basis) in [("neumann", &h.harmonic_neumann), ("dirichlet", &h.harmonic_dirichlet)] {
        for j in 0..basis.dim() {
            let mut bytes = Vec::new();
            basis.column(j).write_csv(&mut bytes)?;
            output::write_atomic(&dir.join(format!("h_{label}_{}_{j}.csv", h.degree)), &bytes)?;
        }
    }
    Ok(())
}

fn mesh_hodge(a: MeshHodgeArgs) -> Result<u8, CliError> {
    let mesh = a.source.load()?;
    let fs = FormSpace::with_tolerance(&mesh, a.source.tolerance)?;
    let betti = betti_numbers(&mesh.complex);
    let relative = relative_betti_numbers(&mesh.complex);
    let mut reports: Vec<HodgeReport> = Vec::new();
    for p in degrees(a.degree, fs.dim())? {
        let h = HodgeDegree::new(&fs, p)?;
        if let Some(dir) = &a.dump_fields {
            dump_fields(dir, &h)?;
        }
        reports.push(h.report()?);
    }
    let bytes = match a.out.format {
        Format::Json => json_bytes(&json!({
            "betti": betti,
            "relative_betti": relative,
            "degrees": reports,
        }))?,
        Format::Csv => {
            let rows: Vec<HodgeRow> = reports
                .iter()
                .map(|r| HodgeRow {
                    degree: r.degree,
                    harmonic_neumann: r.dimensions.harmonic_neumann,
                    harmonic_dirichlet: r.dimensions.harmonic_dirichlet,
                    exact_dirichlet: r.dimensions.exact_dirichlet,
                    coexact_neumann: r.dimensions.coexact_neumann,
                    boundary_n: r.dimensions.boundary_n,
                    interior_n: r.dimensions.interior_n,
                    boundary_d: r.dimensions.boundary_d,
                    interior_d: r.dimensions.interior_d,
                    exact_coexact: r.dimensions.exact_coexact,
                    betti: betti[r.degree],
                    relative_betti: relative[r.degree],
                    max_orthogonality: r.orthogonality.max(),
                    trace_distance_n: r.trace_criterion_distance_n,
                    trace_distance_d: r.trace_criterion_distance_d,
                    cosines: joined(&r.cosines),
                })
                .collect();
            csv_bytes(&rows)?
        }
    };
    let prov = provenance(
        "mesh-hodge",
        json!({ "source": a.source.describe(), "degree": a.degree }),
        json!({ "linear_solve": a.source.tolerance, "rank_cutoff": pdangles::linalg::RANK_CUTOFF }),
    );
    emit(a.out.output.as_deref(), &bytes, &prov)?;
    Ok(0)
}

#[derive(Serialize)]
struct DtnRow {
    degree: usize,
    lambda_rank: usize,
    kernel_dim: usize,
    complementary_image_dim: usize,
    kernel_image_distance_primal: f64,
    kernel_image_distance_dual: f64,
    exact_annihilation: f64,
    t_squared_eigenvalues: String,
    cos_squared: String,
    nonzero_eigenvalues: usize,
    max_discrepancy: Option<f64>,
    max_boundary_cup_residual: Option<f64>,
}

fn mesh_dtn(a: MeshDtnArgs) -> Result<u8, CliError> {
    let mesh = a.source.load()?;
    let fs = FormSpace::with_tolerance(&mesh, a.source.tolerance)?;
    let dtn = Dtn::new(&fs)?;
    let mut reports: Vec<DtnReport> = Vec::new();
    for p in degrees(a.degree, fs.dim() - 1)? {
        reports.push(dtn.report(&HodgeDegree::new(&fs, p)?)?);
    }
    let bytes = match a.out.format {
        Format::Json => json_bytes(&reports)?,
        Format::Csv => {
            let rows: Vec<DtnRow> = reports
                .iter()
                .map(|r| DtnRow {
                    degree: r.degree,
                    lambda_rank: r.lambda_rank,
                    kernel_dim: r.kernel_dim,
                    complementary_image_dim: r.complementary_image_dim,
                    kernel_image_distance_primal: r.kernel_image_distance.0,
                    kernel_image_distance_dual: r.kernel_image_distance.1,
                    exact_annihilation: r.exact_annihilation,
                    t_squared_eigenvalues: joined(&r.t_squared_eigenvalues),
                    cos_squared: joined(&r.cos_squared),
                    nonzero_eigenvalues: r.nonzero_eigenvalues,
                    max_discrepancy: r.discrepancies.iter().cloned().reduce(f64::max),
                    max_boundary_cup_residual: r
                        .cup_products
                        .iter()
                        .filter(|c| c.boundary_beta)
                        .map(|c| c.residual)
                        .reduce(f64::max),
                })
                .collect();
            csv_bytes(&rows)?
        }
    };
    let prov = provenance(
        "mesh-dtn",
        json!({ "source": a.source.describe(), "degree": a.degree }),
        json!({
            "linear_solve": a.source.tolerance,
            "rank_cutoff": pdangles::linalg::RANK_CUTOFF,
            "image_tol": pdangles::dtn::IMAGE_TOL,
        }),
    );
    emit(a.out.output.as_deref(), &bytes, &prov)?;
    Ok(0)
}

fn run_verify(a: VerifyArgs) -> Result<u8, CliError> {
    let mut meshes = vec![
        ("annulus".to_string(), generate_annulus(2, 8, 1.0, 2.0)?),
        ("punctured-torus".to_string(), generate_punctured_torus(8, 2)?),
    ];
    for path in &a.mesh {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        meshes.push((path.display().to_string(), load_off(&text)?));
    }
    if !(a.tolerance_scale >= 0.0 && a.tolerance_scale.is_finite()) {
        return Err(CliError::validation("tolerance scale must be finite and non-negative"));
    }
    let invariants = verify::run(a.suite, &meshes, a.seed, a.tolerance_scale);
    let failed = invariants.iter().filter(|i| !i.pass).count();
    let bytes = match a.format {
        Format::Json => json_bytes(&json!({
            "passed": invariants.len() - failed,
            "failed": failed,
            "invariants": invariants,
        }))?,
        Format::Csv => {
            let rows: Vec<_> = invariants
                .iter()
                .map(|i| (&i.suite, &i.name, i.residual, i.tolerance, i.pass))
                .collect();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["suite", "name", "residual", "tolerance", "pass"])
                .map_err(|e| CliError::io(e.to_string()))?;
            for r in rows {
                w.serialize(r).map_err(|e| CliError::io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::io(e.to_string()))?
        }
    };
    let prov = provenance(
        "verify",
        json!({ "suite": format!("{:?}", a.suite).to_lowercase(), "meshes": meshes.iter().map(|m| &m.0).collect::<Vec<_>>(), "seed": a.seed }),
        json!({ "tolerance_scale": a.tolerance_scale }),
    );
    emit(a.output.as_deref(), &bytes, &prov)?;
    for i in invariants.iter().filter(|i| !i.pass) {
        eprintln!(
            "ERROR verify:invariant {} {} residual {:e} > {:e}{}",
            i.suite,
            i.name,
            i.residual,
            i.tolerance,
            i.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    Ok(if failed > 0 { EXIT_INVARIANT } else { 0 })
}
