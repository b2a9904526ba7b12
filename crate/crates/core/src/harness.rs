//! Seeded experiment scenarios, reports and CSV/JSON tables.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::complex::{distance, AbstractComplex, EmbeddedComplex, DEFAULT_QUANTIZATION_DIGITS};
use crate::ect::{ect_distance, entry_time_range, linspace, sampled_ect, sphere_quadrature, Direction};
use crate::error::{Error, Result};
use crate::generators::{
    apply_deformation, disk_fan, grid_triangulation, library_triangulation, perturb_embedding,
    spectral_embedding, DeformationFamily, DeformationSpec, LIBRARY_NAMES,
};
use crate::mpsn::{
    construct_ect_readout, construct_realizer, forward, integral, readout, recover_coords, skip_forward,
};
use crate::refine::{
    coordinate_recovery_check, equivalent_at, refine, Adjacency, Coloring, ColorInterner, PhiMode,
    RefinementConfig,
};

pub const QUANT_DIGITS_ENV: &str = "GSWL_QUANT_DIGITS";
pub const MAX_QUANTIZATION_DIGITS: u32 = 15;

/// Quantization digits from `GSWL_QUANT_DIGITS`, or the built-in default.
pub fn default_quantization_digits() -> Result<u32> {
    match std::env::var(QUANT_DIGITS_ENV) {
        Err(_) => Ok(DEFAULT_QUANTIZATION_DIGITS),
        Ok(s) => match s.trim().parse::<u32>() {
            Ok(d) if d <= MAX_QUANTIZATION_DIGITS => Ok(d),
            _ => Err(Error::Config {
                pointer: format!("${QUANT_DIGITS_ENV}"),
                message: format!("expected an integer in 0..={MAX_QUANTIZATION_DIGITS}, got {s:?}"),
            }),
        },
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    DeformSeparation,
    EctRealization,
    CoboundaryAblation,
    StabilityScan,
    MantraSuite,
    RecoveryCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::DeformSeparation => "deform_separation",
            Self::EctRealization => "ect_realization",
            Self::CoboundaryAblation => "coboundary_ablation",
            Self::StabilityScan => "stability_scan",
            Self::MantraSuite => "mantra_suite",
            Self::RecoveryCheck => "recovery_check",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn default_depths() -> Vec<usize> {
    vec![0, 1, 2, 4, 8]
}
fn default_grids() -> Vec<GridSize> {
    vec![GridSize { nx: 8, ny: 5 }]
}
fn default_deltas() -> Vec<f64> {
    vec![0.04, 0.02, 0.01, 0.005]
}
fn default_amplitude() -> f64 {
    0.1
}
fn default_directions() -> usize {
    8
}
fn default_thresholds() -> usize {
    10
}
fn default_trials() -> usize {
    20
}
fn default_quadrature() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default = "default_grids")]
    pub grids: Vec<GridSize>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_thresholds")]
    pub thresholds: usize,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantization_digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(scenarios: Vec<Scenario>) -> Self {
        Self {
            scenarios,
            seed: 0,
            seeds: default_seeds(),
            depths: default_depths(),
            grids: default_grids(),
            amplitude: default_amplitude(),
            directions: default_directions(),
            thresholds: default_thresholds(),
            deltas: default_deltas(),
            trials: default_trials(),
            quadrature: default_quadrature(),
            quantization_digits: None,
            output: None,
        }
    }

    /// Parses a config, reporting the JSON pointer of the first bad field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            pointer: json_pointer(e.path()),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |pointer: &str, message: String| Err(Error::Config { pointer: pointer.into(), message });
        for (i, g) in self.grids.iter().enumerate() {
            if g.nx < 2 || g.ny < 2 {
                return bad(&format!("/grids/{i}"), format!("grid {}x{} needs nx, ny >= 2", g.nx, g.ny));
            }
        }
        for (i, d) in self.deltas.iter().enumerate() {
            if !(d.is_finite() && *d > 0.0) {
                return bad(&format!("/deltas/{i}"), format!("perturbation scale {d} must be positive"));
            }
        }
        if !self.amplitude.is_finite() {
            return bad("/amplitude", "amplitude must be finite".into());
        }
        if let Some(d) = self.quantization_digits {
            if d > MAX_QUANTIZATION_DIGITS {
                return bad("/quantization_digits", format!("at most {MAX_QUANTIZATION_DIGITS}"));
            }
        }
        if self.quadrature == 0 {
            return bad("/quadrature", "need at least one direction".into());
        }
        Ok(())
    }

    pub fn digits(&self) -> Result<u32> {
        self.quantization_digits.map(Ok).unwrap_or_else(default_quantization_digits)
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub id: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, Value>,
}

impl Case {
    fn new(id: impl Into<String>, passed: bool, metrics: Value) -> Self {
        let metrics = match metrics {
            Value::Object(m) => m.into_iter().collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        Self { id: id.into(), passed, metrics }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub cases: Vec<Case>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fingerprint {
    pub version: String,
    pub seed: u64,
    pub quantization_digits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub fingerprint: Fingerprint,
    pub config: ExperimentConfig,
    pub scenarios: Vec<ScenarioReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(ScenarioReport::passed)
    }

    pub fn failed_cases(&self) -> usize {
        self.scenarios.iter().flat_map(|s| &s.cases).filter(|c| !c.passed).count()
    }
}

/// Runs every configured scenario. Each scenario gets its own interner.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let digits = config.digits()?;
    let mut scenarios = Vec::with_capacity(config.scenarios.len());
    for &scenario in &config.scenarios {
        let mut cases = match scenario {
            Scenario::DeformSeparation => deform_separation(config, digits)?,
            Scenario::EctRealization => ect_realization(config, digits)?,
            Scenario::CoboundaryAblation => coboundary_ablation(config, digits)?,
            Scenario::StabilityScan => stability_scan(config)?,
            Scenario::MantraSuite => mantra_suite(config, digits)?,
            Scenario::RecoveryCheck => recovery_check(config, digits)?,
        };
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        scenarios.push(ScenarioReport { scenario, cases });
    }
    Ok(Report {
        fingerprint: Fingerprint {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            quantization_digits: digits,
        },
        config: config.clone(),
        scenarios,
    })
}

fn grid_id(g: &GridSize) -> String {
    format!("grid{}x{}", g.nx, g.ny)
}

/// Deformation of a base mesh indexed by `seed`: the random family uses the
/// seed directly, the others scale the amplitude by `1 + seed / 10`.
pub fn seeded_deformation(
    base: &EmbeddedComplex,
    family: DeformationFamily,
    amplitude: f64,
    seed: u64,
) -> Result<EmbeddedComplex> {
    let amplitude = match family {
        DeformationFamily::RandomSmooth => amplitude,
        _ => amplitude * (1.0 + seed as f64 / 10.0),
    };
    apply_deformation(base, &DeformationSpec { family, amplitude, seed })
}

fn deform_separation(config: &ExperimentConfig, digits: u32) -> Result<Vec<Case>> {
    let mut interner = ColorInterner::new();
    let max_depth = config.depths.iter().copied().max().unwrap_or(0);
    let mut cases = Vec::new();
    for g in &config.grids {
        let base = grid_triangulation(g.nx, g.ny, 1.0 / (g.nx.max(g.ny) - 1) as f64)?;
        let swl_base = refine(&base, &RefinementConfig::swl(max_depth).with_digits(digits), &mut interner)?;
        let gswl_base = refine(&base, &RefinementConfig::gswl(0).with_digits(digits), &mut interner)?;
        for family in DeformationFamily::ALL {
            for &seed in &config.seeds {
                let k = seeded_deformation(&base, family, config.amplitude, seed)?;
                let distinct = !k.embedding().quantized_eq(base.embedding(), digits);
                let swl = refine(&k, &RefinementConfig::swl(max_depth).with_digits(digits), &mut interner)?;
                let gswl = refine(&k, &RefinementConfig::gswl(0).with_digits(digits), &mut interner)?;
                let gswl_separates = !equivalent_at(&gswl_base, &gswl, 0)?;
                let mut swl_equivalent = true;
                for &l in &config.depths {
                    swl_equivalent &= equivalent_at(&swl_base, &swl, l)?;
                }
                cases.push(Case::new(
                    format!("{}/{}/seed{seed:03}", grid_id(g), family.name()),
                    swl_equivalent && gswl_separates == distinct,
                    json!({
                        "distinct_coordinates": distinct,
                        "gswl0_separates": gswl_separates,
                        "swl_equivalent_all_depths": swl_equivalent,
                    }),
                ));
            }
        }
    }
    Ok(cases)
}

/// Base grid plus its seeded deformations across all four families.
pub fn deformed_grid_family(g: GridSize, amplitude: f64, seeds: &[u64]) -> Result<Vec<(String, EmbeddedComplex)>> {
    let base = grid_triangulation(g.nx, g.ny, 1.0 / (g.nx.max(g.ny) - 1) as f64)?;
    let mut out = vec![("base".to_string(), base.clone())];
    for family in DeformationFamily::ALL {
        for &seed in seeds {
            out.push((format!("{}/seed{seed:03}", family.name()), seeded_deformation(&base, family, amplitude, seed)?));
        }
    }
    Ok(out)
}

/// Equally spaced planar directions and thresholds spanning the family's entry times.
pub fn ect_grid(family: &[EmbeddedComplex], n_dirs: usize, n_thresholds: usize) -> Result<(Vec<Direction>, Vec<f64>)> {
    let d = family.first().map(EmbeddedComplex::ambient_dim).unwrap_or(2);
    let dirs = sphere_quadrature(d, n_dirs)?.directions();
    let (lo, hi) = entry_time_range(family, &dirs).unwrap_or((0.0, 0.0));
    Ok((dirs, linspace(lo, hi, n_thresholds)))
}

fn realization_cases(
    prefix: &str,
    named: &[(String, EmbeddedComplex)],
    depth: usize,
    config: &ExperimentConfig,
    digits: u32,
) -> Result<Vec<Case>> {
    let family: Vec<EmbeddedComplex> = named.iter().map(|(_, k)| k.clone()).collect();
    let (dirs, ts) = ect_grid(&family, config.directions, config.thresholds)?;
    let mut interner = ColorInterner::new();
    let realizer = construct_ect_readout(&family, &dirs, &ts, depth, digits, &mut interner)?;
    let mut cases = Vec::new();
    for (name, k) in named {
        let z = integral(&readout(&realizer.model, &forward(&realizer.model, k)?, k)?)?;
        let direct = sampled_ect(k, &dirs, &ts)?.flatten();
        let max_err = z.iter().zip(&direct).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
        cases.push(Case::new(
            format!("{prefix}/{name}"),
            z == direct,
            json!({
                "depth": depth,
                "hidden_dim": realizer.model.hidden_dim,
                "grid_size": z.len(),
                "max_abs_error": max_err,
            }),
        ));
    }
    Ok(cases)
}

fn ect_realization(config: &ExperimentConfig, digits: u32) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for g in &config.grids {
        let named = deformed_grid_family(*g, config.amplitude, &config.seeds)?;
        cases.extend(realization_cases(&grid_id(g), &named, 2, config, digits)?);
    }
    Ok(cases)
}

/// The 1-skeleton of a complex as an embedded complex on the same points.
pub fn hollow(k: &EmbeddedComplex) -> Result<EmbeddedComplex> {
    let skeleton: AbstractComplex = k.complex().filter(|_, s| s.dim() <= 1);
    EmbeddedComplex::new(skeleton, k.embedding().clone())
}

fn vertex_colors(c: &Coloring, l: usize) -> Result<Vec<crate::refine::Color>> {
    let n = c.complex().simplices_of_dim(0).len();
    let mut v = c.round(l)?[..n].to_vec();
    v.sort();
    Ok(v)
}

/// Round-`l` vertex color multisets of two colorings agree.
pub fn vertex_colors_agree(a: &Coloring, b: &Coloring, l: usize) -> Result<bool> {
    Ok(vertex_colors(a, l)? == vertex_colors(b, l)?)
}

pub const ABLATION_DEPTHS: [usize; 3] = [1, 4, 8];
pub const ABLATION_SEPARATION_DEPTH: usize = 2;

/// Filled vs hollow comparison: boundary-only vertex colors at the ablation
/// depths, and the first depth at which full adjacency separates vertex colors.
pub fn coboundary_ablation_pair(
    filled: &EmbeddedComplex,
    digits: u32,
    interner: &mut ColorInterner,
) -> Result<(Vec<bool>, Option<usize>)> {
    let hollow = hollow(filled)?;
    let max = *ABLATION_DEPTHS.iter().max().unwrap();
    let bcfg = RefinementConfig::gswl(max).with_adjacency(Adjacency::BoundaryOnly).with_digits(digits);
    let (bf, bh) = (refine(filled, &bcfg, interner)?, refine(&hollow, &bcfg, interner)?);
    let flat = ABLATION_DEPTHS.iter().map(|&l| vertex_colors_agree(&bf, &bh, l)).collect::<Result<_>>()?;
    let fcfg = RefinementConfig::gswl(max).with_digits(digits);
    let (ff, fh) = (refine(filled, &fcfg, interner)?, refine(&hollow, &fcfg, interner)?);
    let mut first = None;
    for l in 0..=max {
        if !vertex_colors_agree(&ff, &fh, l)? {
            first = Some(l);
            break;
        }
    }
    Ok((flat, first))
}

fn coboundary_ablation(config: &ExperimentConfig, digits: u32) -> Result<Vec<Case>> {
    let mut interner = ColorInterner::new();
    let mut meshes = vec![(
        "triangle".to_string(),
        EmbeddedComplex::from_parts(2, [(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0]), (2, vec![0.0, 1.0])], &[vec![0, 1, 2]])?,
    )];
    for g in &config.grids {
        meshes.push((grid_id(g), grid_triangulation(g.nx, g.ny, 1.0)?));
    }
    meshes.push(("disk40".into(), disk_fan()?));
    let mut cases = Vec::new();
    for (name, k) in meshes {
        let (flat, first) = coboundary_ablation_pair(&k, digits, &mut interner)?;
        let passed = flat.iter().all(|&b| b) && first.is_some_and(|l| l <= ABLATION_SEPARATION_DEPTH);
        cases.push(Case::new(
            name,
            passed,
            json!({
                "boundary_only_identical_at_1_4_8": flat,
                "full_first_separating_depth": first,
            }),
        ));
    }
    Ok(cases)
}

/// One perturbation of the 40-vertex disk; `ratio = d_ect / displacement`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub delta: f64,
    pub trial: usize,
    pub d_ect: f64,
    pub displacement: f64,
    pub ratio: f64,
}

pub const STABILITY_BAND: f64 = 4.0;

pub fn stability_rows(deltas: &[f64], trials: usize, quadrature: usize, seed: u64) -> Result<Vec<StabilityRow>> {
    let base = disk_fan()?;
    let quad = sphere_quadrature(2, quadrature)?;
    let mut rows = Vec::new();
    for (di, &delta) in deltas.iter().enumerate() {
        for trial in 0..trials {
            let s = seed.wrapping_mul(1_000_003).wrapping_add((di * 10_000 + trial) as u64);
            let moved = perturb_embedding(&base, delta, s)?;
            let d = ect_distance(base.complex(), base.embedding(), moved.embedding(), &quad)?.total;
            let displacement: f64 =
                base.embedding().iter().map(|(v, p)| distance(p, moved.embedding().point(v))).sum();
            rows.push(StabilityRow { delta, trial, d_ect: d, displacement, ratio: d / displacement });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityBand {
    /// `(delta, mean ratio)` in input order.
    pub mean_ratios: Vec<(f64, f64)>,
    /// `max / min` of the per-scale means.
    pub mean_spread: f64,
    /// `max / min` over every individual trial.
    pub trial_spread: f64,
}

fn spread(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn stability_band(rows: &[StabilityRow]) -> StabilityBand {
    let mut by_delta: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in rows {
        match by_delta.iter_mut().find(|e| e.0 == r.delta) {
            Some(e) => e.1.push(r.ratio),
            None => by_delta.push((r.delta, vec![r.ratio])),
        }
    }
    let mean_ratios: Vec<(f64, f64)> =
        by_delta.into_iter().map(|(d, v)| (d, v.iter().sum::<f64>() / v.len() as f64)).collect();
    StabilityBand {
        mean_spread: spread(mean_ratios.iter().map(|m| m.1)),
        trial_spread: spread(rows.iter().map(|r| r.ratio)),
        mean_ratios,
    }
}

fn stability_scan(config: &ExperimentConfig) -> Result<Vec<Case>> {
    let base = disk_fan()?;
    let quad = sphere_quadrature(2, config.quadrature)?;
    let zero = ect_distance(base.complex(), base.embedding(), base.embedding(), &quad)?.total;
    let rows = stability_rows(&config.deltas, config.trials, config.quadrature, config.seed)?;
    let band = stability_band(&rows);
    let mut cases = vec![
        Case::new("self_distance", zero == 0.0, json!({ "d_ect": zero })),
        Case::new(
            "ratio_band",
            band.trial_spread <= STABILITY_BAND,
            json!({
                "band": STABILITY_BAND,
                "trial_spread": band.trial_spread,
                "mean_spread": band.mean_spread,
                "mean_ratios": band.mean_ratios,
            }),
        ),
    ];
    for r in &rows {
        cases.push(Case::new(
            format!("delta{:.4}/trial{:03}", r.delta, r.trial),
            r.d_ect > 0.0 && r.ratio.is_finite(),
            json!({ "delta": r.delta, "d_ect": r.d_ect, "displacement": r.displacement, "ratio": r.ratio }),
        ));
    }
    Ok(cases)
}

fn mantra_suite(config: &ExperimentConfig, digits: u32) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for name in LIBRARY_NAMES {
        let lib = library_triangulation(name)?;
        let spectral = spectral_embedding(&lib.complex, config.seed)?;
        let base = EmbeddedComplex::new(lib.complex.clone(), spectral.embedding.clone())?;
        cases.push(Case::new(
            format!("{name}/surface"),
            spectral.max_residual <= 1e-8,
            json!({
                "counts": lib.complex.counts(),
                "euler_characteristic": lib.euler_characteristic,
                "orientable": lib.orientable,
                "max_residual": spectral.max_residual,
                "degenerate": spectral.degenerate,
                "jittered": spectral.jittered,
            }),
        ));
        let mut named = vec![("spectral".to_string(), base.clone())];
        for &s in config.seeds.iter().take(3) {
            named.push((format!("perturbed/seed{s:03}"), perturb_embedding(&base, 0.01, s)?));
        }
        cases.extend(realization_cases(name, &named, 2, config, digits)?);
    }
    Ok(cases)
}

fn recovery_check(config: &ExperimentConfig, digits: u32) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for g in &config.grids {
        let named = deformed_grid_family(*g, config.amplitude, &config.seeds)?;
        let family: Vec<EmbeddedComplex> = named.iter().map(|(_, k)| k.clone()).collect();
        let mut interner = ColorInterner::new();
        let report = coordinate_recovery_check(&family, 2, PhiMode::DimensionOnly, digits, &mut interner)?;
        cases.push(Case::new(
            format!("{}/depth_eq_dim", grid_id(g)),
            report.passed(),
            json!({
                "violations": report.violations,
                "pairs_checked": report.pairs_checked,
                "decode_failures": report.decode_failures,
            }),
        ));
        let realizer = construct_realizer(&family, 2, &RefinementConfig::gswl(2).with_digits(digits), &mut interner)?;
        let quad = sphere_quadrature(2, config.quadrature)?;
        for (name, k) in &named {
            let recovered = recover_coords(&skip_forward(&realizer.model, k)?)?;
            let max_err = k
                .embedding()
                .iter()
                .map(|(v, p)| distance(p, recovered.point(v)))
                .fold(0.0, f64::max);
            let d = ect_distance(k.complex(), k.embedding(), &recovered, &quad)?.total;
            cases.push(Case::new(
                format!("{}/skip/{name}", grid_id(g)),
                max_err == 0.0 && d == 0.0,
                json!({ "max_coordinate_error": max_err, "d_ect": d }),
            ));
        }
    }
    Ok(cases)
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes `summary.csv`, one `<scenario>.csv` per scenario and `report.json`.
/// Returns the paths written.
pub fn report_tables(report: &Report, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut written = Vec::new();

    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["scenario", "cases", "passed", "failed"]).map_err(csv_err)?;
    for s in &report.scenarios {
        let passed = s.cases.iter().filter(|c| c.passed).count();
        w.write_record([
            s.scenario.name().to_string(),
            s.cases.len().to_string(),
            passed.to_string(),
            (s.cases.len() - passed).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    written.push(path);

    for s in &report.scenarios {
        let columns: BTreeSet<&String> = s.cases.iter().flat_map(|c| c.metrics.keys()).collect();
        let path = dir.join(format!("{}.csv", s.scenario.name()));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        let mut header = vec!["case_id".to_string(), "passed".to_string()];
        header.extend(columns.iter().map(|c| c.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for c in &s.cases {
            let mut row = vec![c.id.clone(), c.passed.to_string()];
            row.extend(columns.iter().map(|k| c.metrics.get(*k).map(csv_cell).unwrap_or_default()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(report)?)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenarios: Vec<Scenario>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(scenarios);
        c.seeds = vec![0, 1];
        c.grids = vec![GridSize { nx: 4, ny: 3 }];
        c.depths = vec![0, 2];
        c.trials = 3;
        c.quantization_digits = Some(12);
        c
    }

    #[test]
    fn config_roundtrips_bit_exactly() {
        let mut c = small(vec![Scenario::StabilityScan, Scenario::DeformSeparation]);
        c.amplitude = 0.1 + 0.2;
        c.deltas = vec![1.0 / 3.0, 0.005];
        let text = c.to_json_string().unwrap();
        let back = ExperimentConfig::from_json_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.amplitude.to_bits(), c.amplitude.to_bits());
        assert_eq!(back.to_json_string().unwrap(), text);
    }

    #[test]
    fn config_errors_carry_json_pointer() {
        let err = ExperimentConfig::from_json_str(r#"{"scenarios":["ect_realization"],"grids":[{"nx":3,"ny":"x"}]}"#)
            .unwrap_err();
        match err {
            Error::Config { pointer, .. } => assert_eq!(pointer, "/grids/0/ny"),
            other => panic!("{other:?}"),
        }
        let err = ExperimentConfig::from_json_str(r#"{"scenarios":["nope"]}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref pointer, .. } if pointer == "/scenarios/0"), "{err:?}");
        let err = ExperimentConfig::from_json_str(r#"{"scenarios":[],"colour":1}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        let err = ExperimentConfig::from_json_str(r#"{"scenarios":[],"deltas":[0.1,-1]}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref pointer, .. } if pointer == "/deltas/1"));
    }

    #[test]
    fn empty_scenario_list_writes_header_only_summary() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&small(vec![])).unwrap();
        assert!(report.passed());
        report_tables(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text, "scenario,cases,passed,failed\n");
    }

    #[test]
    fn deform_separation_small() {
        let r = run(&small(vec![Scenario::DeformSeparation])).unwrap();
        assert_eq!(r.scenarios[0].cases.len(), 8);
        assert!(r.passed(), "{:#?}", r.scenarios[0].cases.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }

    #[test]
    fn ablation_and_recovery_small() {
        let r = run(&small(vec![Scenario::CoboundaryAblation, Scenario::RecoveryCheck])).unwrap();
        assert!(r.passed());
        let ids: Vec<&str> = r.scenarios[0].cases.iter().map(|c| c.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn reports_are_deterministic() {
        let c = small(vec![Scenario::StabilityScan, Scenario::EctRealization]);
        let a = serde_json::to_string(&run(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stability_tables_have_one_row_per_trial() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&small(vec![Scenario::StabilityScan])).unwrap();
        report_tables(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("stability_scan.csv")).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("case_id,passed,"));
        assert!(header.contains("delta") && header.contains("d_ect") && header.contains("ratio"));
        // 4 deltas x 3 trials + self distance + band
        assert_eq!(text.lines().count(), 1 + 4 * 3 + 2);
    }
}
