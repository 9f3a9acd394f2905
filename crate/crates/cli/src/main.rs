use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dca_cli::expr::{parse_expr, Expr, SyntaxError};
use dca_cli::svg::emit_svg;
use dca_core::analysis::{
    dirichlet_convergence_study, energy_convergence_study, identity_suite, max_principle_report, write_study_csv,
    StudyRecord,
};
use dca_core::fem::{build_kite_lattice, delaunay_report, disk_mesh, kite_equivalence, solve_fem, Triangulation};
use dca_core::lattice::{self, build_perturbed_lattice, build_square_lattice, eccentricity, tikhomirov_lattice};
use dca_core::measure::{harmonic_measure_exact, random_walk_measure, WalkConfig};
use dca_core::operators::{read_function_csv, write_complex_csv, write_function_csv};
use dca_core::solver::{analytic_completion, solve_dirichlet, solve_network, DirichletProblem};
use dca_core::{Color, Domain, QuadLattice};

/// Discrete complex analysis on quadrilateral lattices.
#[derive(Parser)]
#[command(name = "dca", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a lattice file.
    Build(BuildArgs),
    /// Check a lattice file and report its eccentricity.
    Validate(ValidateArgs),
    /// Solve the Dirichlet problem with boundary data given by an expression.
    Solve(SolveArgs),
    /// Conjugate of a harmonic function; writes the analytic completion.
    Conjugate(ConjugateArgs),
    /// Rebuild an alternating-current network from boundary data.
    Network(NetworkArgs),
    /// Cotangent finite element solve on a triangulation.
    Fem(FemArgs),
    /// Build the kite lattice of a Delaunay triangulation.
    Kite(KiteArgs),
    /// Exact harmonic measure of a boundary arc.
    Measure(MeasureArgs),
    /// Random-walk estimate of harmonic measure.
    Walk(WalkArgs),
    /// Convergence study over a refinement sequence.
    Study(StudyArgs),
    /// Run the identity checks on a lattice.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildKind {
    Square,
    Perturbed,
    Tikhomirov,
    Kite,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum, default_value = "square")]
    kind: BuildKind,
    /// `disk:cx,cy,r` or `rect:x0,y0,x1,y1`.
    #[arg(long, default_value = "disk:0,0,1")]
    domain: String,
    /// Grid step, or mesh spacing for kite lattices.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Vertex jitter of perturbed lattices, as a fraction of the step.
    #[arg(long, default_value_t = 0.2)]
    amplitude: f64,
    /// Parameter of the counterexample lattice.
    #[arg(long, default_value_t = 2.0)]
    m: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the triangulation of a kite lattice.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Also write the counterexample's analytic function as CSV.
    #[arg(long)]
    function: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    /// Boundary data, e.g. `re(z^2)`.
    #[arg(short, long)]
    g: String,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Label vertices with their values in the SVG.
    #[arg(long)]
    labels: bool,
}

#[derive(Args)]
struct ConjugateArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    /// CSV of the harmonic function (real part of `value` columns).
    #[arg(short, long)]
    u: PathBuf,
    #[arg(long, default_value_t = 0)]
    anchor: usize,
    #[arg(long, default_value_t = 0.0)]
    anchor_value: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    /// Complex expression whose real part supplies the boundary drops.
    #[arg(long, conflicts_with = "drops", required_unless_present = "drops")]
    from: Option<String>,
    /// JSON with `b_drops`, `w_drops`, `b_anchor: [v, value]`, `w_anchor: [v, value]`.
    #[arg(long)]
    drops: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct FemArgs {
    #[arg(short, long)]
    mesh: PathBuf,
    #[arg(short, long)]
    g: String,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct KiteArgs {
    /// Triangulation file; without it a disk mesh is generated.
    #[arg(short, long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value = "disk:0,0,1")]
    domain: String,
    #[arg(long, default_value_t = 0.1)]
    spacing: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Where to write a generated mesh.
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Boundary data for the lattice/finite element comparison.
    #[arg(short, long)]
    g: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    /// `FROM..TO` along the boundary, or a comma-separated vertex list.
    #[arg(long)]
    arc: String,
    /// Vertex to report; defaults to the interior B vertex nearest the centroid.
    #[arg(long)]
    at: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphArg {
    B,
    W,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    #[arg(long)]
    arc: String,
    /// Defaults to the interior vertex of the walk graph nearest the centroid.
    #[arg(long)]
    start: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    walks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to 100 times the vertex count.
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, value_enum, default_value = "b")]
    graph: GraphArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyKind {
    Energy,
    Dirichlet,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Square,
    Kite,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, value_enum, default_value = "dirichlet")]
    kind: StudyKind,
    #[arg(long, value_enum, default_value = "square")]
    family: Family,
    #[arg(long, default_value = "disk:0,0,1")]
    domain: String,
    #[arg(short, long, default_value = "exp(x)*cos(y)")]
    g: String,
    /// Exact harmonic extension; defaults to `g`.
    #[arg(long)]
    exact: Option<String>,
    /// Grid step or mesh spacing of level 0; halved at each level.
    #[arg(long, default_value_t = 0.1)]
    step0: f64,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(short, long)]
    lattice: PathBuf,
    /// Run every check; this is also the default.
    #[arg(long)]
    #[allow(dead_code)]
    all: bool,
    /// Boundary data of the harmonic function used by the harmonic checks.
    #[arg(short, long, default_value = "exp(x)*cos(y)")]
    g: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("DCA_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            // a malformed expression is a usage error
            if e.downcast_ref::<SyntaxError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// `Ok(false)` reports a failed check without an error message.
fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Build(a) => build(a),
        Cmd::Validate(a) => validate(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Conjugate(a) => conjugate(a),
        Cmd::Network(a) => network(a),
        Cmd::Fem(a) => fem(a),
        Cmd::Kite(a) => kite(a),
        Cmd::Measure(a) => measure(a),
        Cmd::Walk(a) => walk(a),
        Cmd::Study(a) => study(a),
        Cmd::Check(a) => check(a),
    }
}

fn load(path: &Path) -> Result<QuadLattice> {
    lattice::load(path).with_context(|| format!("loading {}", path.display()))
}

fn expr(src: &str) -> Result<Expr> {
    parse_expr(src).with_context(|| format!("in expression `{src}`"))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn summary(l: &QuadLattice) -> String {
    format!("{} vertices, {} faces, kind {}, h = {}", l.vertex_count(), l.face_count(), l.kind().as_str(), l.h())
}

fn build(a: BuildArgs) -> Result<bool> {
    let domain: Domain = a.domain.parse()?;
    let l = match a.kind {
        BuildKind::Square => build_square_lattice(&domain, a.step)?,
        BuildKind::Perturbed => build_perturbed_lattice(&domain, a.step, a.amplitude, a.seed)?,
        BuildKind::Tikhomirov => {
            let (l, f) = tikhomirov_lattice(a.m)?;
            if let Some(p) = &a.function {
                write_complex_csv(&l, &f, p)?;
            }
            l
        }
        BuildKind::Kite => {
            let Domain::Disk { cx, cy, r } = domain else { bail!("kite lattices are built on disk domains") };
            let t = disk_mesh(cx, cy, r, a.step, a.seed)?;
            if let Some(p) = &a.mesh {
                t.save(p)?;
            }
            build_kite_lattice(&t)?.lattice
        }
    };
    lattice::save(&l, &a.output)?;
    println!("{}", summary(&l));
    Ok(true)
}

fn validate(a: ValidateArgs) -> Result<bool> {
    let l = match lattice::load(&a.lattice) {
        Ok(l) => l,
        Err(dca_core::Error::Validation(r)) => {
            println!("invalid lattice:\n{r}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let ecc = eccentricity(&l)?;
    println!("ok: {}", summary(&l));
    println!(
        "eccentricity {} (diagonal ratio {}, diagonal angle {}, disk count {})",
        ecc.e, ecc.max_diag_ratio, ecc.min_diag_angle, ecc.max_disk_count
    );
    if let Some(p) = &a.report {
        write_json(
            p,
            &json!({
                "vertices": l.vertex_count(),
                "faces": l.face_count(),
                "kind": l.kind().as_str(),
                "h": l.h(),
                "eccentricity": ecc,
            }),
        )?;
    }
    Ok(true)
}

fn solve(a: SolveArgs) -> Result<bool> {
    let l = load(&a.lattice)?;
    let g = expr(&a.g)?;
    let mut values = BTreeMap::new();
    for &v in l.boundary() {
        let p = l.point(v);
        values.insert(v, g.eval(p.x, p.y)?);
    }
    let rep = solve_dirichlet(&DirichletProblem::new(&l, values)?, a.tol)?;
    write_function_csv(&l, &rep.solution, &a.output)?;
    let mp = max_principle_report(&l, &rep.solution);
    println!("residual {:e}, iterations {}, energy {}", rep.residual, rep.iterations, rep.energy);
    if let Some(p) = &a.report {
        write_json(p, &json!({ "g": g.to_string(), "solve": rep, "max_principle": mp }))?;
    }
    if let Some(p) = &a.svg {
        emit_svg(&l, &rep.solution, a.labels, p)?;
    }
    Ok(true)
}

fn conjugate(a: ConjugateArgs) -> Result<bool> {
    let l = load(&a.lattice)?;
    let u: Vec<f64> = read_function_csv(&a.u)?.iter().map(|z| z.re).collect();
    let f = analytic_completion(&l, &u, a.anchor, a.anchor_value)?;
    write_complex_csv(&l, &f, &a.output)?;
    Ok(true)
}

#[derive(serde::Deserialize)]
struct DropsFile {
    b_drops: Vec<f64>,
    w_drops: Vec<f64>,
    b_anchor: (usize, f64),
    w_anchor: (usize, f64),
}

fn drops_of(l: &QuadLattice, u: &[f64], c: Color) -> Vec<f64> {
    let b = l.boundary_of_color(c);
    (0..b.len()).map(|k| u[b[k]] - u[b[(k + 1) % b.len()]]).collect()
}

fn network(a: NetworkArgs) -> Result<bool> {
    let l = load(&a.lattice)?;
    let d = match (&a.from, &a.drops) {
        (Some(src), _) => {
            let f = expr(src)?;
            let u: Vec<f64> = l.points().iter().map(|p| f.eval_complex(p.x, p.y).re).collect();
            let (bb, wb) = (l.boundary_of_color(Color::B), l.boundary_of_color(Color::W));
            DropsFile {
                b_drops: drops_of(&l, &u, Color::B),
                w_drops: drops_of(&l, &u, Color::W),
                b_anchor: (bb[0], u[bb[0]]),
                w_anchor: (wb[0], u[wb[0]]),
            }
        }
        (None, Some(p)) => serde_json::from_str(&fs::read_to_string(p)?).context("reading drops file")?,
        (None, None) => bail!("one of --from or --drops is required"),
    };
    let st = solve_network(&l, &d.b_drops, &d.w_drops, d.b_anchor, d.w_anchor, a.tol)?;
    let e = dca_core::solver::network_energy(&l, &st.f)?;
    println!("energy {e}, residual {:e}, iterations {}", st.report.residual, st.report.iterations);
    let f: Vec<[f64; 2]> = st.f.iter().map(|z| [z.re, z.im]).collect();
    write_json(&a.output, &json!({ "energy": e, "solve": st.report, "f": f, "edges": st.edges }))?;
    Ok(true)
}

fn fem(a: FemArgs) -> Result<bool> {
    let t = Triangulation::load(&a.mesh)?;
    let g = expr(&a.g)?;
    g.eval_all(t.points())?;
    let sol = solve_fem(&t, |p| g.eval_complex(p.x, p.y).re, a.tol)?;
    let mut w = BufWriter::new(fs::File::create(&a.output)?);
    writeln!(w, "index,x,y,value")?;
    for (i, (p, v)) in t.points().iter().zip(&sol.solution).enumerate() {
        writeln!(w, "{i},{:.16e},{:.16e},{:.16e}", p.x, p.y, v)?;
    }
    w.flush()?;
    println!("residual {:e}, iterations {}, negative weights {}", sol.residual, sol.iterations, sol.negative_weights);
    if let Some(p) = &a.report {
        write_json(
            p,
            &json!({ "residual": sol.residual, "iterations": sol.iterations, "negative_weights": sol.negative_weights }),
        )?;
    }
    Ok(true)
}

fn kite(a: KiteArgs) -> Result<bool> {
    let t = match &a.mesh {
        Some(p) => Triangulation::load(p)?,
        None => {
            let Domain::Disk { cx, cy, r } = a.domain.parse()? else { bail!("generated meshes need a disk domain") };
            let t = disk_mesh(cx, cy, r, a.spacing, a.seed)?;
            if let Some(p) = &a.mesh_out {
                t.save(p)?;
            }
            t
        }
    };
    let dr = delaunay_report(&t)?;
    let k = build_kite_lattice(&t)?;
    lattice::save(&k.lattice, &a.output)?;
    println!("{}", summary(&k.lattice));
    println!("delaunay slack {}, regular boundary {}", dr.min_slack, dr.regular_boundary);
    let mut gap = None;
    if let Some(src) = &a.g {
        let g = expr(src)?;
        g.eval_all(k.lattice.points())?;
        let d = kite_equivalence(&t, |p| g.eval_complex(p.x, p.y).re, a.tol)?;
        println!("lattice vs finite element max difference {d:e}");
        gap = Some(d);
    }
    if let Some(p) = &a.report {
        write_json(
            p,
            &json!({
                "delaunay": dr,
                "triangulation_vertices": k.n_vertices,
                "lattice_vertices": k.lattice.vertex_count(),
                "faces": k.lattice.face_count(),
                "h": k.lattice.h(),
                "equivalence_gap": gap,
            }),
        )?;
    }
    Ok(true)
}

fn parse_arc(l: &QuadLattice, s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        return Ok(l.boundary_arc(a.trim().parse()?, b.trim().parse()?)?);
    }
    s.split(',').map(|t| t.trim().parse::<usize>().with_context(|| format!("bad arc vertex `{t}`"))).collect()
}

/// Interior vertex of color `c` nearest to the mean of all vertices.
fn central_vertex(l: &QuadLattice, c: Color) -> Result<usize> {
    let n = l.vertex_count() as f64;
    let cx = l.points().iter().map(|p| p.x).sum::<f64>() / n;
    let cy = l.points().iter().map(|p| p.y).sum::<f64>() / n;
    let centre = dca_core::Point::new(cx, cy);
    l.interior_vertices()
        .into_iter()
        .filter(|&v| l.color(v) == c)
        .min_by(|&a, &b| l.point(a).dist(centre).total_cmp(&l.point(b).dist(centre)))
        .context("lattice has no interior vertex of that color")
}

fn measure(a: MeasureArgs) -> Result<bool> {
    let l = load(&a.lattice)?;
    let arc = parse_arc(&l, &a.arc)?;
    let w = harmonic_measure_exact(&l, &arc)?;
    let at = match a.at {
        Some(v) => v,
        None => central_vertex(&l, Color::B)?,
    };
    let value = w.get(at).with_context(|| format!("vertex {at} out of range"))?;
    println!("vertex {at}: {value}");
    if let Some(p) = &a.output {
        write_function_csv(&l, &w, p)?;
    }
    Ok(true)
}

fn walk(a: WalkArgs) -> Result<bool> {
    let l = load(&a.lattice)?;
    let arc = parse_arc(&l, &a.arc)?;
    let graph = match a.graph {
        GraphArg::B => Color::B,
        GraphArg::W => Color::W,
    };
    let start = match a.start {
        Some(v) => v,
        None => central_vertex(&l, graph)?,
    };
    let cfg = WalkConfig { graph, ..WalkConfig::new(a.walks, a.seed, a.max_steps.unwrap_or(100 * l.vertex_count())) };
    let est = random_walk_measure(&l, &arc, start, &cfg)?;
    println!("vertex {start}: {} +- {} ({} absorbed, {} capped)", est.p_hat, est.stderr, est.n_absorbed, est.n_capped);
    if let Some(p) = &a.output {
        write_json(p, &json!({ "start": start, "estimate": est }))?;
    }
    Ok(true)
}

fn study(a: StudyArgs) -> Result<bool> {
    let domain: Domain = a.domain.parse()?;
    let g = expr(&a.g)?;
    let exact = match &a.exact {
        Some(s) => expr(s)?,
        None => g.clone(),
    };
    let lattices = (0..a.levels)
        .map(|k| {
            let step = a.step0 / 2f64.powi(k as i32);
            match a.family {
                Family::Square => Ok(build_square_lattice(&domain, step)?),
                Family::Kite => {
                    let Domain::Disk { cx, cy, r } = domain else { bail!("kite studies need a disk domain") };
                    Ok(build_kite_lattice(&disk_mesh(cx, cy, r, step, a.seed)?)?.lattice)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for l in &lattices {
        g.eval_all(l.points())?;
    }
    let records: Vec<StudyRecord> = match a.kind {
        StudyKind::Energy => {
            let st = energy_convergence_study(&domain, &g, &lattices)?;
            println!("continuum energy {}", st.continuum);
            st.records
        }
        StudyKind::Dirichlet => dirichlet_convergence_study(&domain, &g, &lattices, &exact)?,
    };
    for r in &records {
        println!("level {} h {:.6} eccentricity {} max_error {:e}", r.level, r.h, r.eccentricity, r.max_error);
    }
    write_study_csv(&records, BufWriter::new(fs::File::create(&a.output)?))?;
    Ok(true)
}

fn check(a: CheckArgs) -> Result<bool> {
    let l = load(&a.lattice)?;
    let g = expr(&a.g)?;
    g.eval_all(l.points())?;
    let checks = identity_suite(&l, &g, a.seed)?;
    let mut ok = true;
    println!("{:<22}{:>14}{:>14}  result", "check", "value", "bound");
    for c in &checks {
        let verdict = match c.passed {
            Some(true) => "pass",
            Some(false) => {
                ok = false;
                "FAIL"
            }
            None => "skip (not orthogonal)",
        };
        if c.passed.is_some() {
            println!("{:<22}{:>14.3e}{:>14.3e}  {verdict}", c.name, c.value, c.bound);
        } else {
            println!("{:<22}{:>14}{:>14}  {verdict}", c.name, "-", "-");
        }
    }
    if let Some(p) = &a.report {
        let rows: Vec<_> = checks
            .iter()
            .map(|c| json!({ "name": c.name, "value": c.passed.map(|_| c.value), "bound": c.passed.map(|_| c.bound), "passed": c.passed }))
            .collect();
        write_json(p, &json!({ "checks": rows }))?;
    }
    Ok(ok)
}
