//! WL, SWL and GSWL color refinement over a shared injective interner.
//!
//! Every color is a structured [`ColorValue`] whose canonical byte encoding is
//! interned in a [`ColorInterner`]. Two values get the same [`Color`] iff their
//! encodings are byte-identical, so the hash is injective by construction and
//! the reverse table lets callers decode a color back into its ingredients.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::complex::{
    derived_features, quantize_point, AbstractComplex, EmbeddedComplex, HasseAdjacency, Simplex,
    DEFAULT_QUANTIZATION_DIGITS,
};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Color(pub u32);

/// Payload of a round-0 color for a simplex of dimension `k >= 1`, or the
/// coordinates of a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feature {
    Empty,
    Point(Vec<i64>),
    SortedPoints(Vec<Vec<i64>>),
    Derived(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColorValue {
    Initial { dim: usize, feature: Feature },
    Refined { previous: Color, boundary: Vec<Color>, coboundary: Vec<Color> },
    GraphInitial,
    GraphRefined { previous: Color, neighbors: Vec<Color> },
}

const TAG_INITIAL: u8 = 1;
const TAG_REFINED: u8 = 2;
const TAG_GRAPH_INITIAL: u8 = 3;
const TAG_GRAPH_REFINED: u8 = 4;

const FEAT_EMPTY: u8 = 10;
const FEAT_POINT: u8 = 11;
const FEAT_SORTED: u8 = 12;
const FEAT_DERIVED: u8 = 13;

fn put_len(out: &mut Vec<u8>, n: usize) {
    out.extend_from_slice(&(n as u32).to_le_bytes());
}

fn put_ints(out: &mut Vec<u8>, xs: &[i64]) {
    put_len(out, xs.len());
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn put_colors(out: &mut Vec<u8>, xs: &[Color]) {
    put_len(out, xs.len());
    for c in xs {
        out.extend_from_slice(&c.0.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> &[u8] {
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        head
    }
    fn u8(&mut self) -> u8 {
        self.take(1)[0]
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }
    fn i64(&mut self) -> i64 {
        i64::from_le_bytes(self.take(8).try_into().unwrap())
    }
    fn ints(&mut self) -> Vec<i64> {
        let n = self.u32() as usize;
        (0..n).map(|_| self.i64()).collect()
    }
    fn colors(&mut self) -> Vec<Color> {
        let n = self.u32() as usize;
        (0..n).map(|_| Color(self.u32())).collect()
    }
}

impl ColorValue {
    /// Canonical, length-prefixed, type-tagged encoding. Multisets must already
    /// be sorted; [`ColorValue::refined`] takes care of that.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32);
        match self {
            ColorValue::Initial { dim, feature } => {
                out.push(TAG_INITIAL);
                put_len(&mut out, *dim);
                match feature {
                    Feature::Empty => out.push(FEAT_EMPTY),
                    Feature::Point(p) => {
                        out.push(FEAT_POINT);
                        put_ints(&mut out, p);
                    }
                    Feature::SortedPoints(ps) => {
                        out.push(FEAT_SORTED);
                        put_len(&mut out, ps.len());
                        for p in ps {
                            put_ints(&mut out, p);
                        }
                    }
                    Feature::Derived(f) => {
                        out.push(FEAT_DERIVED);
                        put_ints(&mut out, f);
                    }
                }
            }
            ColorValue::Refined { previous, boundary, coboundary } => {
                out.push(TAG_REFINED);
                out.extend_from_slice(&previous.0.to_le_bytes());
                put_colors(&mut out, boundary);
                put_colors(&mut out, coboundary);
            }
            ColorValue::GraphInitial => out.push(TAG_GRAPH_INITIAL),
            ColorValue::GraphRefined { previous, neighbors } => {
                out.push(TAG_GRAPH_REFINED);
                out.extend_from_slice(&previous.0.to_le_bytes());
                put_colors(&mut out, neighbors);
            }
        }
        out
    }

    /// Inverse of [`ColorValue::encode`]. Only called on bytes produced by it.
    pub fn decode(bytes: &[u8]) -> ColorValue {
        let mut r = Reader { bytes };
        match r.u8() {
            TAG_INITIAL => {
                let dim = r.u32() as usize;
                let feature = match r.u8() {
                    FEAT_EMPTY => Feature::Empty,
                    FEAT_POINT => Feature::Point(r.ints()),
                    FEAT_SORTED => {
                        let n = r.u32() as usize;
                        Feature::SortedPoints((0..n).map(|_| r.ints()).collect())
                    }
                    FEAT_DERIVED => Feature::Derived(r.ints()),
                    t => unreachable!("unknown feature tag {t}"),
                };
                ColorValue::Initial { dim, feature }
            }
            TAG_REFINED => {
                let previous = Color(r.u32());
                let boundary = r.colors();
                let coboundary = r.colors();
                ColorValue::Refined { previous, boundary, coboundary }
            }
            TAG_GRAPH_INITIAL => ColorValue::GraphInitial,
            TAG_GRAPH_REFINED => {
                let previous = Color(r.u32());
                ColorValue::GraphRefined { previous, neighbors: r.colors() }
            }
            t => unreachable!("unknown color tag {t}"),
        }
    }

    pub fn refined(previous: Color, mut boundary: Vec<Color>, mut coboundary: Vec<Color>) -> Self {
        boundary.sort_unstable();
        coboundary.sort_unstable();
        ColorValue::Refined { previous, boundary, coboundary }
    }
}

static NEXT_INTERNER_ID: AtomicU64 = AtomicU64::new(1);

/// Injective table from canonical color encodings to dense ids.
#[derive(Debug)]
pub struct ColorInterner {
    id: u64,
    table: HashMap<Vec<u8>, Color>,
    reverse: Vec<Vec<u8>>,
}

impl Default for ColorInterner {
    fn default() -> Self {
        Self::new()
    }
}

impl ColorInterner {
    pub fn new() -> Self {
        Self {
            id: NEXT_INTERNER_ID.fetch_add(1, Ordering::Relaxed),
            table: HashMap::new(),
            reverse: Vec::new(),
        }
    }

    /// Identity of this interner; colorings remember it so that colors from
    /// different interners are never compared.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    pub fn intern(&mut self, value: &ColorValue) -> Color {
        let bytes = value.encode();
        if let Some(&c) = self.table.get(&bytes) {
            return c;
        }
        let c = Color(self.reverse.len() as u32);
        self.reverse.push(bytes.clone());
        self.table.insert(bytes, c);
        c
    }

    pub fn bytes(&self, c: Color) -> &[u8] {
        &self.reverse[c.0 as usize]
    }

    pub fn value(&self, c: Color) -> ColorValue {
        ColorValue::decode(self.bytes(c))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Wl,
    Swl,
    Gswl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjacency {
    Full,
    BoundaryOnly,
    CoboundaryOnly,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    DimensionOnly,
    SortedCoords,
    DerivedFeatures,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub mode: Mode,
    pub adjacency: Adjacency,
    pub phi_mode: PhiMode,
    pub depth: usize,
    pub quantization_digits: u32,
}

impl RefinementConfig {
    pub fn new(mode: Mode, depth: usize) -> Self {
        Self {
            mode,
            adjacency: Adjacency::Full,
            phi_mode: PhiMode::DimensionOnly,
            depth,
            quantization_digits: DEFAULT_QUANTIZATION_DIGITS,
        }
    }

    pub fn gswl(depth: usize) -> Self {
        Self::new(Mode::Gswl, depth)
    }

    pub fn swl(depth: usize) -> Self {
        Self::new(Mode::Swl, depth)
    }

    pub fn wl(depth: usize) -> Self {
        Self::new(Mode::Wl, depth)
    }

    pub fn with_adjacency(mut self, adjacency: Adjacency) -> Self {
        self.adjacency = adjacency;
        self
    }

    pub fn with_phi(mut self, phi_mode: PhiMode) -> Self {
        self.phi_mode = phi_mode;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_digits(mut self, digits: u32) -> Self {
        self.quantization_digits = digits;
        self
    }
}

/// Per-round colors of one complex. In WL mode only the vertices (the first
/// `|V|` simplices in global order) are colored.
#[derive(Clone, Debug)]
pub struct Coloring {
    pub config: RefinementConfig,
    interner_id: u64,
    complex: AbstractComplex,
    rounds: Vec<Vec<Color>>,
}

impl Coloring {
    pub fn interner_id(&self) -> u64 {
        self.interner_id
    }

    /// Index of the last round.
    pub fn depth(&self) -> usize {
        self.rounds.len() - 1
    }

    pub fn complex(&self) -> &AbstractComplex {
        &self.complex
    }

    pub fn round(&self, l: usize) -> Result<&[Color]> {
        self.rounds
            .get(l)
            .map(Vec::as_slice)
            .ok_or(Error::RoundOutOfRange { round: l, depth: self.depth() })
    }

    pub fn color_of(&self, l: usize, s: &Simplex) -> Option<Color> {
        let id = self.complex.id_of(s)?;
        self.rounds.get(l)?.get(id).copied()
    }

    /// Sorted color multiset of round `l`.
    pub fn multiset(&self, l: usize) -> Result<Vec<Color>> {
        let mut m = self.round(l)?.to_vec();
        m.sort_unstable();
        Ok(m)
    }

    pub fn histogram(&self, l: usize) -> Result<BTreeMap<Color, usize>> {
        let mut h = BTreeMap::new();
        for &c in self.round(l)? {
            *h.entry(c).or_insert(0) += 1;
        }
        Ok(h)
    }

    /// Canonical partition labels: classes numbered by first occurrence.
    pub fn partition(&self, l: usize) -> Result<Vec<usize>> {
        Ok(canonical_partition(self.round(l)?))
    }

    pub fn num_classes(&self, l: usize) -> Result<usize> {
        Ok(self.round(l)?.iter().collect::<BTreeSet<_>>().len())
    }
}

pub(crate) fn canonical_partition(colors: &[Color]) -> Vec<usize> {
    let mut labels = HashMap::new();
    colors
        .iter()
        .map(|c| {
            let next = labels.len();
            *labels.entry(*c).or_insert(next)
        })
        .collect()
}

fn vertex_count(k: &AbstractComplex) -> usize {
    k.simplices_of_dim(0).len()
}

/// Round-0 colors for every simplex (every vertex in WL mode).
pub fn init_colors(
    k: &EmbeddedComplex,
    cfg: &RefinementConfig,
    interner: &mut ColorInterner,
) -> Result<Vec<Color>> {
    let digits = cfg.quantization_digits;
    match cfg.mode {
        Mode::Wl => {
            let c = interner.intern(&ColorValue::GraphInitial);
            Ok(vec![c; vertex_count(k.complex())])
        }
        Mode::Swl => Ok(k
            .complex()
            .simplices()
            .map(|s| interner.intern(&ColorValue::Initial { dim: s.dim(), feature: Feature::Empty }))
            .collect()),
        Mode::Gswl => {
            k.embedding().check_injective(digits)?;
            let mut out = Vec::with_capacity(k.complex().len());
            for s in k.complex().simplices() {
                let feature = if s.dim() == 0 {
                    Feature::Point(quantize_point(k.embedding().point(s.vertices()[0]), digits))
                } else {
                    match cfg.phi_mode {
                        PhiMode::DimensionOnly => Feature::Empty,
                        PhiMode::SortedCoords => {
                            let mut pts: Vec<Vec<i64>> = k
                                .vertex_points(s)
                                .into_iter()
                                .map(|p| quantize_point(p, digits))
                                .collect();
                            pts.sort();
                            Feature::SortedPoints(pts)
                        }
                        // beyond triangles, fall back to dimension-only
                        PhiMode::DerivedFeatures if s.dim() > 2 => Feature::Empty,
                        PhiMode::DerivedFeatures => {
                            Feature::Derived(quantize_point(&derived_features(s, k.embedding())?, digits))
                        }
                    }
                };
                out.push(interner.intern(&ColorValue::Initial { dim: s.dim(), feature }));
            }
            Ok(out)
        }
    }
}

/// Vertex neighbor lists from the 1-skeleton, indexed like the vertices.
fn graph_neighbors(k: &AbstractComplex) -> Vec<Vec<usize>> {
    let n = vertex_count(k);
    let mut nbrs = vec![Vec::new(); n];
    for e in k.simplices_of_dim(1) {
        let a = k.id_of(&Simplex::vertex(e.vertices()[0])).unwrap();
        let b = k.id_of(&Simplex::vertex(e.vertices()[1])).unwrap();
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    nbrs
}

/// One refinement step for SWL/GSWL using the Hasse adjacency.
pub fn refine_round(
    hasse: &HasseAdjacency,
    previous: &[Color],
    cfg: &RefinementConfig,
    interner: &mut ColorInterner,
) -> Vec<Color> {
    let use_boundary = cfg.adjacency != Adjacency::CoboundaryOnly;
    let use_coboundary = cfg.adjacency != Adjacency::BoundaryOnly;
    (0..previous.len())
        .map(|id| {
            let boundary = if use_boundary {
                hasse.boundary_ids(id).iter().map(|&t| previous[t]).collect()
            } else {
                Vec::new()
            };
            let coboundary = if use_coboundary {
                hasse.coboundary_ids(id).iter().map(|&r| previous[r]).collect()
            } else {
                Vec::new()
            };
            interner.intern(&ColorValue::refined(previous[id], boundary, coboundary))
        })
        .collect()
}

fn refine_graph_round(
    neighbors: &[Vec<usize>],
    previous: &[Color],
    interner: &mut ColorInterner,
) -> Vec<Color> {
    (0..previous.len())
        .map(|v| {
            let mut nb: Vec<Color> = neighbors[v].iter().map(|&u| previous[u]).collect();
            nb.sort_unstable();
            interner.intern(&ColorValue::GraphRefined { previous: previous[v], neighbors: nb })
        })
        .collect()
}

/// Stepper shared by [`refine`] and [`stable_round`].
struct Refiner<'a> {
    cfg: &'a RefinementConfig,
    hasse: Option<HasseAdjacency>,
    neighbors: Option<Vec<Vec<usize>>>,
}

impl<'a> Refiner<'a> {
    fn new(k: &EmbeddedComplex, cfg: &'a RefinementConfig) -> Self {
        match cfg.mode {
            Mode::Wl => Self { cfg, hasse: None, neighbors: Some(graph_neighbors(k.complex())) },
            _ => Self { cfg, hasse: Some(HasseAdjacency::new(k.complex())), neighbors: None },
        }
    }

    fn step(&self, previous: &[Color], interner: &mut ColorInterner) -> Vec<Color> {
        match (&self.hasse, &self.neighbors) {
            (Some(h), _) => refine_round(h, previous, self.cfg, interner),
            (None, Some(n)) => refine_graph_round(n, previous, interner),
            (None, None) => unreachable!(),
        }
    }
}

/// Run `cfg.depth` refinement rounds.
pub fn refine(
    k: &EmbeddedComplex,
    cfg: &RefinementConfig,
    interner: &mut ColorInterner,
) -> Result<Coloring> {
    let refiner = Refiner::new(k, cfg);
    let mut rounds = vec![init_colors(k, cfg, interner)?];
    for _ in 0..cfg.depth {
        let next = refiner.step(rounds.last().unwrap(), interner);
        rounds.push(next);
    }
    Ok(Coloring { config: cfg.clone(), interner_id: interner.id(), complex: k.complex().clone(), rounds })
}

/// Equality of round-`l` color multisets.
pub fn equivalent_at(a: &Coloring, b: &Coloring, l: usize) -> Result<bool> {
    if a.interner_id != b.interner_id {
        return Err(Error::InternerMismatch(a.interner_id, b.interner_id));
    }
    Ok(a.multiset(l)? == b.multiset(l)?)
}

/// Refine both complexes with the shared interner and compare at `cfg.depth`.
pub fn equivalent(
    a: &EmbeddedComplex,
    b: &EmbeddedComplex,
    cfg: &RefinementConfig,
    interner: &mut ColorInterner,
) -> Result<bool> {
    let ca = refine(a, cfg, interner)?;
    let cb = refine(b, cfg, interner)?;
    equivalent_at(&ca, &cb, cfg.depth)
}

/// Smallest round whose partition equals the next round's partition.
pub fn stable_round(
    k: &EmbeddedComplex,
    cfg: &RefinementConfig,
    max_rounds: usize,
    interner: &mut ColorInterner,
) -> Result<usize> {
    let refiner = Refiner::new(k, cfg);
    let mut current = init_colors(k, cfg, interner)?;
    for l in 0..max_rounds {
        let next = refiner.step(&current, interner);
        if canonical_partition(&current) == canonical_partition(&next) {
            return Ok(l);
        }
        current = next;
    }
    Err(Error::NoConvergence(max_rounds))
}

/// Decodes colors through the interner's reverse table, following the
/// induction up the Hasse diagram: a vertex color carries its coordinates,
/// and a `k`-simplex color refined at least `k` times carries the colors of
/// its facets one round earlier.
pub struct ColorDecoder<'a> {
    interner: &'a ColorInterner,
    dims: HashMap<Color, usize>,
    sets: HashMap<Color, Option<Vec<Vec<i64>>>>,
}

impl<'a> ColorDecoder<'a> {
    pub fn new(interner: &'a ColorInterner) -> Self {
        Self { interner, dims: HashMap::new(), sets: HashMap::new() }
    }

    /// Dimension carried by a simplicial color; `None` for graph colors.
    pub fn dim_of(&mut self, c: Color) -> Option<usize> {
        if let Some(&d) = self.dims.get(&c) {
            return Some(d);
        }
        let d = match self.interner.value(c) {
            ColorValue::Initial { dim, .. } => dim,
            ColorValue::Refined { previous, .. } => self.dim_of(previous)?,
            ColorValue::GraphInitial | ColorValue::GraphRefined { .. } => return None,
        };
        self.dims.insert(c, d);
        Some(d)
    }

    /// Sorted quantized vertex coordinates determined by `c`, if any.
    pub fn vertex_coordinates(&mut self, c: Color) -> Option<Vec<Vec<i64>>> {
        if let Some(hit) = self.sets.get(&c) {
            return hit.clone();
        }
        let result = match self.interner.value(c) {
            ColorValue::Initial { dim: 0, feature: Feature::Point(p) } => Some(vec![p]),
            ColorValue::Initial { feature: Feature::SortedPoints(ps), .. } => Some(ps),
            ColorValue::Initial { .. } => None,
            ColorValue::Refined { previous, boundary, .. } => {
                match self.dim_of(previous) {
                    Some(0) => self.vertex_coordinates(previous),
                    Some(d) => self.decode_facets(d, &boundary).or_else(|| self.vertex_coordinates(previous)),
                    None => None,
                }
            }
            ColorValue::GraphInitial | ColorValue::GraphRefined { .. } => None,
        };
        self.sets.insert(c, result.clone());
        result
    }

    fn decode_facets(&mut self, dim: usize, facets: &[Color]) -> Option<Vec<Vec<i64>>> {
        if facets.len() != dim + 1 {
            return None;
        }
        let mut union = BTreeSet::new();
        for &f in facets {
            union.extend(self.vertex_coordinates(f)?);
        }
        (union.len() == dim + 1).then(|| union.into_iter().collect())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub depth: usize,
    pub simplices_checked: usize,
    pub color_classes: usize,
    pub pairs_checked: usize,
    /// Equal-color pairs (dimension <= depth) with different vertex-coordinate sets.
    pub violations: usize,
    /// Equal-color pairs left out because their dimension exceeds the depth.
    pub excluded_pairs: usize,
    /// Excluded pairs whose vertex-coordinate sets actually differ.
    pub excluded_counterexamples: usize,
    /// Colors (dimension <= depth) the decoder could not invert.
    pub decode_failures: usize,
    /// Colors whose decoded coordinate set disagrees with the simplex.
    pub decode_mismatches: usize,
    pub violation_examples: Vec<String>,
}

impl RecoveryReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.decode_failures == 0 && self.decode_mismatches == 0
    }
}

fn pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Checks, across a family refined with one interner under GSWL with full
/// adjacency, that equal round-`depth` colors of simplices of dimension at
/// most `depth` imply equal unordered vertex-coordinate sets.
pub fn coordinate_recovery_check(
    family: &[EmbeddedComplex],
    depth: usize,
    phi_mode: PhiMode,
    digits: u32,
    interner: &mut ColorInterner,
) -> Result<RecoveryReport> {
    let cfg = RefinementConfig::gswl(depth).with_phi(phi_mode).with_digits(digits);
    // color -> coordinate set -> (count, example)
    let mut included: BTreeMap<Color, BTreeMap<Vec<Vec<i64>>, (usize, String)>> = BTreeMap::new();
    let mut excluded: BTreeMap<Color, BTreeMap<Vec<Vec<i64>>, usize>> = BTreeMap::new();
    let mut colorings = Vec::with_capacity(family.len());
    for k in family {
        colorings.push(refine(k, &cfg, interner)?);
    }

    let mut report = RecoveryReport { depth, ..Default::default() };
    let mut decoder = ColorDecoder::new(interner);
    for (i, (k, coloring)) in family.iter().zip(&colorings).enumerate() {
        let colors = coloring.round(depth)?;
        for (id, s) in k.complex().simplices().enumerate() {
            let set = crate::ect::quantized_vertex_set(k, s, digits);
            let c = colors[id];
            if s.dim() <= depth {
                report.simplices_checked += 1;
                match decoder.vertex_coordinates(c) {
                    None => report.decode_failures += 1,
                    Some(decoded) if decoded != set => report.decode_mismatches += 1,
                    Some(_) => {}
                }
                included
                    .entry(c)
                    .or_default()
                    .entry(set)
                    .or_insert_with(|| (0, format!("complex {i} simplex {s}")))
                    .0 += 1;
            } else {
                *excluded.entry(c).or_default().entry(set).or_insert(0) += 1;
            }
        }
    }

    report.color_classes = included.len();
    for (c, groups) in &included {
        let total: usize = groups.values().map(|g| g.0).sum();
        let agreeing: usize = groups.values().map(|g| pairs(g.0)).sum();
        report.pairs_checked += pairs(total);
        report.violations += pairs(total) - agreeing;
        if groups.len() > 1 && report.violation_examples.len() < 8 {
            let who: Vec<&str> = groups.values().map(|g| g.1.as_str()).collect();
            report.violation_examples.push(format!("color {}: {}", c.0, who.join(" vs ")));
        }
    }
    for groups in excluded.values() {
        let total: usize = groups.values().sum();
        let agreeing: usize = groups.values().map(|&n| pairs(n)).sum();
        report.excluded_pairs += pairs(total);
        report.excluded_counterexamples += pairs(total) - agreeing;
    }
    Ok(report)
}
