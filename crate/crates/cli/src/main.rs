use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gswl_core::ect::{ect_distance, entry_time_range, linspace, sampled_ect, sphere_quadrature};
use gswl_core::generators::{
    apply_deformation, disk_fan, grid_triangulation, library_triangulation, perturb_embedding, spectral_embedding,
    validate_closed_surface, DeformationFamily, DeformationSpec,
};
use gswl_core::harness::{default_quantization_digits, report_tables, run, ExperimentConfig};
use gswl_core::io::{load_complex, save_complex};
use gswl_core::mpsn::{construct_ect_readout, construct_realizer, forward, integral, readout, upper_bound_check};
use gswl_core::refine::{equivalent_at, refine, Adjacency, ColorInterner, Mode, PhiMode, RefinementConfig};
use gswl_core::{euler_characteristic, EmbeddedComplex, Error};

#[derive(Parser)]
#[command(name = "gswl-ect", version, about = "Geometric simplicial refinement and Euler characteristic transforms")]
struct Cli {
    /// Decimal digits used to quantize coordinates [default: $GSWL_QUANT_DIGITS or 12]
    #[arg(long, global = true)]
    digits: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Wl,
    Swl,
    Gswl,
}

#[derive(Copy, Clone, ValueEnum)]
enum PhiArg {
    Dimension,
    Coords,
    Derived,
}

#[derive(Copy, Clone, ValueEnum)]
enum AdjacencyArg {
    Full,
    BoundaryOnly,
    CoboundaryOnly,
}

#[derive(Copy, Clone, ValueEnum)]
enum ReadoutArg {
    Histogram,
    Ect,
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Grid,
    DiskFan,
}

#[derive(Copy, Clone, ValueEnum)]
enum EmbedArg {
    Spectral,
}

#[derive(Subcommand)]
enum Command {
    /// Check a complex file (.json/.off) or an experiment config
    Validate { input: PathBuf },
    /// Per-round color histograms
    Refine {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "gswl")]
        mode: ModeArg,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_enum, default_value = "dimension")]
        phi: PhiArg,
        #[arg(long, value_enum, default_value = "full")]
        adjacency: AdjacencyArg,
    },
    /// Equivalence verdict; exit code 0 if equivalent, 1 if not
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_enum, default_value = "gswl")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "dimension")]
        phi: PhiArg,
        #[arg(long, value_enum, default_value = "full")]
        adjacency: AdjacencyArg,
    },
    /// Sampled Euler characteristic transform as CSV
    Ect {
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long, default_value_t = 10)]
        thresholds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadrature ECT distance between two embeddings of one complex
    EctDist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 64)]
        quad: usize,
    },
    /// Build a lookup-table model for a directory of complexes
    Realize {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_enum, default_value = "histogram")]
        readout: ReadoutArg,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long, default_value_t = 10)]
        thresholds: usize,
    },
    /// Random lookup-table readouts on an equivalent pair; exit code 1 on any violation
    CheckUpper {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "gswl")]
        mode: ModeArg,
    },
    /// Write a generated mesh as JSON
    Generate {
        #[arg(long, value_enum, conflicts_with = "library")]
        kind: Option<KindArg>,
        #[arg(long, default_value_t = 8)]
        nx: usize,
        #[arg(long, default_value_t = 5)]
        ny: usize,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long)]
        library: Option<String>,
        #[arg(long, value_enum, default_value = "spectral")]
        embed: EmbedArg,
        #[arg(long)]
        deform: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        amplitude: f64,
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config and write report tables; exit code 1 if any case fails
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn refinement_config(mode: ModeArg, depth: usize, phi: PhiArg, adjacency: AdjacencyArg, digits: u32) -> RefinementConfig {
    let mode = match mode {
        ModeArg::Wl => Mode::Wl,
        ModeArg::Swl => Mode::Swl,
        ModeArg::Gswl => Mode::Gswl,
    };
    let phi = match phi {
        PhiArg::Dimension => PhiMode::DimensionOnly,
        PhiArg::Coords => PhiMode::SortedCoords,
        PhiArg::Derived => PhiMode::DerivedFeatures,
    };
    let adjacency = match adjacency {
        AdjacencyArg::Full => Adjacency::Full,
        AdjacencyArg::BoundaryOnly => Adjacency::BoundaryOnly,
        AdjacencyArg::CoboundaryOnly => Adjacency::CoboundaryOnly,
    };
    RefinementConfig::new(mode, depth).with_phi(phi).with_adjacency(adjacency).with_digits(digits)
}

fn write_stdout(text: &str) -> Result<(), Error> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print_json(v: &Value) -> Result<(), Error> {
    write_stdout(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn validate(input: &Path, digits: u32) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(input)?;
    let is_config = input.extension().is_some_and(|e| e == "json")
        && serde_json::from_str::<Value>(&text).ok().is_some_and(|v| v.get("scenarios").is_some());
    if is_config {
        let cfg = ExperimentConfig::from_json_str(&text)?;
        print_json(&json!({ "kind": "experiment_config", "valid": true, "scenarios": cfg.scenarios }))?;
        return Ok(ExitCode::SUCCESS);
    }
    let k = load_complex(input)?;
    let injective = k.embedding().check_injective(digits);
    let surface = (k.complex().max_dim() == Some(2)).then(|| validate_closed_surface(k.complex()));
    print_json(&json!({
        "kind": "complex",
        "valid": injective.is_ok(),
        "ambient_dim": k.ambient_dim(),
        "counts": k.complex().counts(),
        "euler_characteristic": euler_characteristic(k.complex()),
        "injective": injective.as_ref().map(|_| Value::Bool(true)).unwrap_or_else(|e| Value::String(e.to_string())),
        "closed_surface": surface.as_ref().map(|s| s.is_closed_surface()),
        "orientable": surface.and_then(|s| s.orientable),
    }))?;
    Ok(if injective.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn histogram_json(k: &EmbeddedComplex, cfg: &RefinementConfig) -> Result<Value, Error> {
    let mut interner = ColorInterner::new();
    let c = refine(k, cfg, &mut interner)?;
    let rounds: Vec<Value> = (0..=cfg.depth)
        .map(|l| {
            let h = c.histogram(l)?;
            Ok(json!({
                "round": l,
                "classes": h.len(),
                "histogram": h.iter().map(|(col, n)| json!({"color": col.0, "count": n})).collect::<Vec<_>>(),
            }))
        })
        .collect::<Result<_, Error>>()?;
    Ok(json!({ "config": cfg, "simplices": k.complex().len(), "rounds": rounds }))
}

fn equiv(a: &Path, b: &Path, cfg: &RefinementConfig) -> Result<ExitCode, Error> {
    let (ka, kb) = (load_complex(a)?, load_complex(b)?);
    let mut interner = ColorInterner::new();
    let (ca, cb) = (refine(&ka, cfg, &mut interner)?, refine(&kb, cfg, &mut interner)?);
    let per_round: Vec<bool> = (0..=cfg.depth).map(|l| equivalent_at(&ca, &cb, l)).collect::<Result<_, _>>()?;
    let equivalent = per_round[cfg.depth];
    let first = per_round.iter().position(|e| !e);
    print_json(&json!({
        "equivalent": equivalent,
        "depth": cfg.depth,
        "mode": cfg.mode,
        "per_round": per_round,
        "first_separating_round": first,
    }))?;
    Ok(if equivalent { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn ect_csv(input: &Path, n_dirs: usize, n_thresholds: usize, out: Option<&Path>) -> Result<ExitCode, Error> {
    let k = load_complex(input)?;
    let dirs = sphere_quadrature(k.ambient_dim(), n_dirs)?.directions();
    let (lo, hi) = entry_time_range(std::slice::from_ref(&k), &dirs).unwrap_or((0.0, 0.0));
    let s = sampled_ect(&k, &dirs, &linspace(lo, hi, n_thresholds))?;
    let mut text = String::from("direction,threshold,chi\n");
    for (i, row) in s.values.iter().enumerate() {
        for (t, chi) in s.thresholds.iter().zip(row) {
            writeln!(text, "{i},{t},{chi}").expect("write to string");
        }
    }
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => write_stdout(&text)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn ect_dist(a: &Path, b: &Path, quad: usize) -> Result<ExitCode, Error> {
    let (ka, kb) = (load_complex(a)?, load_complex(b)?);
    if ka.complex() != kb.complex() {
        return Err(Error::ComplexMismatch("inputs do not share an abstract complex".into()));
    }
    let q = sphere_quadrature(ka.ambient_dim(), quad)?;
    let d = ect_distance(ka.complex(), ka.embedding(), kb.embedding(), &q)?;
    print_json(&json!({
        "total": d.total,
        "quadrature": d.quadrature,
        "per_direction": d.per_direction.iter().map(|(dir, v)| json!({"direction": dir.vector(), "distance": v})).collect::<Vec<_>>(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn load_family(dir: &Path) -> Result<Vec<(String, EmbeddedComplex)>, Error> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json") || e.eq_ignore_ascii_case("off")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Parse(format!("no .json or .off files in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|p| Ok((p.file_name().unwrap().to_string_lossy().into_owned(), load_complex(&p)?)))
        .collect()
}

fn realize(dir: &Path, depth: usize, mode: ReadoutArg, n_dirs: usize, n_thresholds: usize, digits: u32) -> Result<ExitCode, Error> {
    let named = load_family(dir)?;
    let family: Vec<EmbeddedComplex> = named.iter().map(|(_, k)| k.clone()).collect();
    let mut interner = ColorInterner::new();
    let (realizer, grid) = match mode {
        ReadoutArg::Histogram => {
            (construct_realizer(&family, depth, &RefinementConfig::gswl(depth).with_digits(digits), &mut interner)?, None)
        }
        ReadoutArg::Ect => {
            let dirs = sphere_quadrature(family[0].ambient_dim(), n_dirs)?.directions();
            let (lo, hi) = entry_time_range(&family, &dirs).unwrap_or((0.0, 0.0));
            let ts = linspace(lo, hi, n_thresholds);
            (construct_ect_readout(&family, &dirs, &ts, depth, digits, &mut interner)?, Some((dirs, ts)))
        }
    };
    let mut members = Vec::new();
    let mut all_match = true;
    for (name, k) in &named {
        let z = readout(&realizer.model, &forward(&realizer.model, k)?, k)?;
        let mut entry = json!({ "file": name, "readout": z });
        if let Some((dirs, ts)) = &grid {
            let matches = integral(&z)? == sampled_ect(k, dirs, ts)?.flatten();
            all_match &= matches;
            entry["matches_direct_ect"] = json!(matches);
        }
        members.push(entry);
    }
    print_json(&json!({
        "depth": depth,
        "readout": match mode { ReadoutArg::Histogram => "histogram", ReadoutArg::Ect => "ect" },
        "hidden_dim": realizer.model.hidden_dim,
        "block": realizer.block,
        "colors_per_round": realizer.colors.iter().map(Vec::len).collect::<Vec<_>>(),
        "lookup_entries": realizer.model.layers.iter().map(|l| l.mu.len()).collect::<Vec<_>>(),
        "members": members,
    }))?;
    Ok(if all_match { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn generate(
    kind: Option<KindArg>,
    (nx, ny, spacing): (usize, usize, f64),
    library: Option<&str>,
    deform: Option<&str>,
    amplitude: f64,
    perturb: Option<f64>,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, Error> {
    let mut meta = serde_json::Map::new();
    let mut k = match (library, kind) {
        (Some(name), _) => {
            let lib = library_triangulation(name)?;
            let spectral = spectral_embedding(&lib.complex, seed)?;
            meta.insert("library".into(), json!(name));
            meta.insert("euler_characteristic".into(), json!(lib.euler_characteristic));
            meta.insert("orientable".into(), json!(lib.orientable));
            meta.insert("spectral".into(), spectral.metadata());
            EmbeddedComplex::new(lib.complex, spectral.embedding)?
        }
        (None, Some(KindArg::DiskFan)) => {
            meta.insert("kind".into(), json!("disk_fan"));
            disk_fan()?
        }
        (None, _) => {
            meta.insert("kind".into(), json!({"grid": {"nx": nx, "ny": ny, "spacing": spacing}}));
            grid_triangulation(nx, ny, spacing)?
        }
    };
    if let Some(name) = deform {
        let family = DeformationFamily::parse(name)?;
        k = apply_deformation(&k, &DeformationSpec { family, amplitude, seed })?;
        meta.insert("deformation".into(), json!({"family": family.name(), "amplitude": amplitude}));
    }
    if let Some(delta) = perturb {
        k = perturb_embedding(&k, delta, seed)?;
        meta.insert("perturbation".into(), json!(delta));
    }
    meta.insert("seed".into(), json!(seed));
    save_complex(out, &k, Some(Value::Object(meta)))?;
    print_json(&json!({ "out": out, "counts": k.complex().counts() }))?;
    Ok(ExitCode::SUCCESS)
}

fn run_config(path: &Path, out: Option<&Path>, digits: Option<u32>) -> Result<ExitCode, Error> {
    let mut cfg = ExperimentConfig::from_json_str(&std::fs::read_to_string(path)?)?;
    if cfg.quantization_digits.is_none() {
        cfg.quantization_digits = digits;
    }
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| "reports".into());
    let report = run(&cfg)?;
    let written = report_tables(&report, &dir)?;
    let scenarios: Vec<Value> = report
        .scenarios
        .iter()
        .map(|s| {
            json!({
                "scenario": s.scenario,
                "cases": s.cases.len(),
                "failed": s.cases.iter().filter(|c| !c.passed).count(),
            })
        })
        .collect();
    print_json(&json!({ "passed": report.passed(), "scenarios": scenarios, "written": written }))?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    let digits = match cli.digits {
        Some(d) => d,
        None => default_quantization_digits()?,
    };
    match cli.command {
        Command::Validate { input } => validate(&input, digits),
        Command::Refine { input, mode, depth, phi, adjacency } => {
            let k = load_complex(&input)?;
            print_json(&histogram_json(&k, &refinement_config(mode, depth, phi, adjacency, digits))?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Equiv { a, b, depth, mode, phi, adjacency } => {
            equiv(&a, &b, &refinement_config(mode, depth, phi, adjacency, digits))
        }
        Command::Ect { input, directions, thresholds, out } => ect_csv(&input, directions, thresholds, out.as_deref()),
        Command::EctDist { a, b, quad } => ect_dist(&a, &b, quad),
        Command::Realize { family, depth, readout, directions, thresholds } => {
            realize(&family, depth, readout, directions, thresholds, digits)
        }
        Command::CheckUpper { a, b, depth, trials, seed, mode } => {
            let (ka, kb) = (load_complex(&a)?, load_complex(&b)?);
            let cfg = refinement_config(mode, depth, PhiArg::Dimension, AdjacencyArg::Full, digits);
            let r = upper_bound_check(&ka, &kb, depth, trials, seed, &cfg)?;
            print_json(&serde_json::to_value(&r)?)?;
            Ok(if r.violations == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Generate { kind, nx, ny, spacing, library, embed: _, deform, amplitude, perturb, seed, out } => generate(
            kind,
            (nx, ny, spacing),
            library.as_deref(),
            deform.as_deref(),
            amplitude,
            perturb,
            seed,
            &out,
        ),
        Command::Run { config, out } => run_config(&config, out.as_deref(), cli.digits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
