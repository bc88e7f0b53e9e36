use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use yamabe::analysis::{hessian_spectrum, run_audit, AuditConfig, AuditInput};
use yamabe::flow::sig17;
use yamabe::{
    parse_complex, run_flow, ConformalTetra, Error, FlowConfig, MetricAssignment, Preset,
    SimplicialComplex, Termination, VertexId,
};

const EXIT_INPUT: u8 = 1;
const EXIT_FLOW_STOPPED: u8 = 2;
const EXIT_CLAIM_FAILED: u8 = 3;

/// Discrete conformal curvature flow on closed 3-dimensional triangulations.
#[derive(Parser)]
#[command(name = "yamabe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the curvature flow and write the trace.
    Run(RunArgs),
    /// Audit the geometric and analytic claims; writes a JSON report.
    Check(CheckArgs),
    /// Eigenvalues and minors of the solid-angle Jacobian of one tetrahedron.
    Spectrum(SpectrumArgs),
    /// List the built-in complexes.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Complex in `tet`/`radius` text format.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    file: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Override one vertex weight, as `vertex=weight`; repeatable.
    #[arg(long, value_name = "V=X", value_parser = parse_radius)]
    radius: Vec<(VertexId, f64)>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt_init: Option<f64>,
    #[arg(long)]
    dt_min: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Reject steps that push any tetrahedron's relative Q below this.
    #[arg(long)]
    q_guard: Option<f64>,
    /// Keep every n-th accepted step.
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; `-` is standard output.
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Complex in `tet`/`radius` text format. Without any input both presets
    /// are audited from perturbed starting weights.
    #[arg(conflicts_with_all = ["preset", "tetra"])]
    file: Option<PathBuf>,
    #[arg(long, conflicts_with = "tetra")]
    preset: Option<String>,
    /// A single tetrahedron `r1,r2,r3,r4`, audited as a double tetrahedron.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "radius")]
    tetra: Option<String>,
    #[arg(long, value_name = "V=X", value_parser = parse_radius)]
    radius: Vec<(VertexId, f64)>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    tetra: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_radius(s: &str) -> Result<(VertexId, f64), String> {
    let (v, x) = s.split_once('=').ok_or("expected `vertex=weight`")?;
    let v = v
        .trim()
        .parse()
        .map_err(|_| format!("bad vertex id `{v}`"))?;
    let x = x.trim().parse().map_err(|_| format!("bad weight `{x}`"))?;
    Ok((v, x))
}

fn parse_tetra(s: &str) -> anyhow::Result<ConformalTetra> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("--tetra needs four comma-separated weights, got `{s}`");
    }
    let mut r = [0.0; 4];
    for (slot, p) in parts.iter().enumerate() {
        r[slot] = p.parse().with_context(|| format!("bad weight `{p}`"))?;
    }
    let t = ConformalTetra::new(r)?;
    if t.is_degenerate() {
        return Err(Error::Degenerate {
            weights: r,
            q: t.nondegeneracy_q(),
        }
        .into());
    }
    Ok(t)
}

fn load(
    file: Option<&Path>,
    preset: Option<&str>,
    radius: &[(VertexId, f64)],
) -> anyhow::Result<(String, SimplicialComplex, MetricAssignment)> {
    let (label, complex, mut metric) = match (file, preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let (c, m) = parse_complex(&text).with_context(|| path.display().to_string())?;
            (path.display().to_string(), c, m)
        }
        (None, Some(name)) => {
            let (c, m) = name.parse::<Preset>()?.build();
            (name.to_string(), c, m)
        }
        (None, None) => bail!("no input given"),
    };
    for &(v, x) in radius {
        if complex.vertex_index(v).is_none() {
            return Err(Error::UnknownVertex(v).into());
        }
        metric.set(v, x)?;
    }
    Ok((label, complex, metric))
}

/// Writes the artifact, returning whether it went to standard output.
fn emit(
    output: &Path,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> anyhow::Result<bool> {
    if output == Path::new("-") {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        write(&mut lock)?;
        lock.flush()?;
        Ok(true)
    } else {
        let mut file = io::BufWriter::new(
            fs::File::create(output)
                .with_context(|| format!("cannot create {}", output.display()))?,
        );
        write(&mut file)?;
        file.flush()?;
        Ok(false)
    }
}

fn summary(to_stderr: bool, line: &str) {
    if to_stderr {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<u8> {
    let (_, complex, metric) = load(args.file.as_deref(), args.preset.as_deref(), &args.radius)?;
    let defaults = FlowConfig::default();
    let config = FlowConfig {
        t_end: args.t_end.unwrap_or(defaults.t_end),
        dt_init: args.dt_init.unwrap_or(defaults.dt_init),
        dt_min: args.dt_min.unwrap_or(defaults.dt_min),
        rel_tol: args.rel_tol.unwrap_or(defaults.rel_tol),
        q_guard: args.q_guard.unwrap_or(defaults.q_guard),
        record_every: args.record_every.unwrap_or(defaults.record_every),
    };
    let trace = run_flow(&complex, &metric, &config)?;
    let on_stdout = emit(&args.output, |out| match args.format {
        Format::Csv => trace.write_csv(out),
        Format::Json => writeln!(out, "{}", trace.to_json()),
    })?;
    let last = trace.last();
    summary(
        on_stdout,
        &format!(
            "t_final={} k_spread={} termination={}",
            sig17(last.t),
            sig17(last.k_spread()),
            trace.termination.as_str()
        ),
    );
    Ok(match trace.termination {
        Termination::ReachedTEnd => 0,
        Termination::DegeneracyStop | Termination::StepUnderflow => EXIT_FLOW_STOPPED,
    })
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<u8> {
    let inputs = match (&args.tetra, &args.file, &args.preset) {
        (Some(weights), _, _) => {
            let t = parse_tetra(weights)?;
            let complex = SimplicialComplex::new(vec![[1, 2, 3, 4], [1, 2, 3, 4]])?;
            let metric = MetricAssignment::from_dense(&complex, &t.weights())?;
            vec![AuditInput {
                label: format!("tetra {weights}"),
                complex,
                metric,
            }]
        }
        (None, None, None) => {
            if !args.radius.is_empty() {
                bail!("--radius needs a file or --preset");
            }
            AuditInput::preset_defaults()
        }
        (None, file, preset) => {
            let (label, complex, metric) = load(file.as_deref(), preset.as_deref(), &args.radius)?;
            vec![AuditInput {
                label,
                complex,
                metric,
            }]
        }
    };
    let config = AuditConfig {
        samples: args.samples,
        seed: args.seed,
    };
    let report = run_audit(&inputs, &config)?;
    let on_stdout = emit(&args.output, |out| writeln!(out, "{}", report.to_json()))?;
    let passed = report.claims.len() - report.failed.len();
    summary(
        on_stdout,
        &format!("{passed} of {} claims passed", report.claims.len()),
    );
    for name in &report.failed {
        eprintln!("failed claim: {name}");
    }
    Ok(if report.all_passed {
        0
    } else {
        EXIT_CLAIM_FAILED
    })
}

fn cmd_spectrum(args: SpectrumArgs) -> anyhow::Result<u8> {
    let t = parse_tetra(&args.tetra)?;
    let report = hessian_spectrum(&t)?;
    let weights: Vec<String> = t.weights().iter().map(|w| w.to_string()).collect();
    println!("{:<18} {}", "weights", weights.join(","));
    for (i, e) in report.eigenvalues.iter().enumerate() {
        println!("{:<18} {}", format!("eigenvalue[{i}]"), sig17(*e));
    }
    println!(
        "{:<18} {}",
        "null_vector_angle",
        sig17(report.null_vector_angle)
    );
    println!("{:<18} {}", "minor_error", sig17(report.minor_check));
    Ok(0)
}

fn cmd_presets() -> anyhow::Result<u8> {
    for p in Preset::ALL {
        let (c, _) = p.build();
        println!(
            "{:<20} {} vertices, {} edges, {} faces, {} tetrahedra",
            p.name(),
            c.num_vertices(),
            c.num_edges(),
            c.num_faces(),
            c.tetrahedra().len()
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
