//! Boundary/coboundary simplicial message passing with lookup-table maps.
//!
//! Each layer computes
//! `h'(s) = mu(h(s), sum_{t in boundary(s)} phi(h(t)), sum_{r in coface(s)} psi(h(r)))`
//! and the readout is `z(K) = sum_s eta_{dim s} Psi(h_L(s))`. Every map is a
//! [`LookupFunction`]: a finite table keyed by quantized input vectors, which
//! can interpolate any finite set of input/output pairs exactly.
//!
//! [`construct_realizer`] builds tables whose states are basis vectors indexed
//! by refinement colors (three blocks of width `m`), [`construct_ect_readout`]
//! swaps the readout for Euler-signed sublevel indicators, and
//! [`upper_bound_check`] draws random tables to test that equivalent
//! complexes always get equal readouts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{
    derived_features, quantize, quantize_point, EmbeddedComplex, Embedding, HasseAdjacency, Simplex,
};
use crate::ect::{entry_time_of_points, Direction};
use crate::error::{Error, Result};
use crate::refine::{
    equivalent_at, refine, Adjacency, Color, ColorDecoder, ColorInterner, Coloring, Mode, PhiMode,
    RefinementConfig,
};

/// Sparse vector in `R^dim` with sorted indices and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenVec {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl HiddenVec {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        Self { dim, entries: vec![(index as u32, 1.0)] }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .collect();
        Self { dim: values.len(), entries }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(index as u32), |e| e.0)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn add_assign(&mut self, other: &HiddenVec) {
        debug_assert_eq!(self.dim, other.dim);
        let mut merged = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let a = self.entries.get(i);
            let b = other.entries.get(j);
            match (a, b) {
                (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                    merged.push((ia, va + vb));
                    i += 1;
                    j += 1;
                }
                (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                    merged.push((ia, va));
                    i += 1;
                }
                (Some(&(ia, va)), None) => {
                    merged.push((ia, va));
                    i += 1;
                }
                (_, Some(&(ib, vb))) => {
                    merged.push((ib, vb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.entries = merged;
    }

    pub fn scaled(&self, factor: f64) -> HiddenVec {
        let mut out = HiddenVec {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, v)| (i, v * factor)).collect(),
        };
        out.entries.retain(|e| e.1 != 0.0);
        out
    }

    /// `[head || self]`, a vector of dimension `head.len() + self.dim()`.
    pub fn prepend(&self, head: &[f64]) -> HiddenVec {
        let d = head.len() as u32;
        let mut out = HiddenVec::from_dense(head);
        out.dim = head.len() + self.dim;
        out.entries.extend(self.entries.iter().map(|&(i, v)| (i + d, v)));
        out
    }

    /// First `n` coordinates as a dense vector.
    pub fn prefix(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(i, v) in &self.entries {
            if (i as usize) < n {
                out[i as usize] = v;
            }
        }
        out
    }
}

/// Canonical key of one or more concatenated input vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LookupKey {
    len: u32,
    entries: Vec<(u32, i64)>,
}

impl LookupKey {
    pub fn of(parts: &[&HiddenVec], digits: u32) -> Self {
        let mut entries = Vec::new();
        let mut offset = 0u32;
        for part in parts {
            for &(i, v) in &part.entries {
                let q = quantize(v, digits);
                if q != 0 {
                    entries.push((offset + i, q));
                }
            }
            offset += part.dim as u32;
        }
        Self { len: offset, entries }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Unseen {
    Zero,
    Error,
}

/// A map defined pointwise on finitely many quantized inputs.
#[derive(Clone, Debug)]
pub struct LookupFunction {
    out_dim: usize,
    digits: u32,
    unseen: Unseen,
    table: HashMap<LookupKey, HiddenVec>,
}

impl LookupFunction {
    pub fn new(out_dim: usize, digits: u32, unseen: Unseen) -> Self {
        Self { out_dim, digits, unseen, table: HashMap::new() }
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn key(&self, parts: &[&HiddenVec]) -> LookupKey {
        LookupKey::of(parts, self.digits)
    }

    /// Fix the output on one input. Re-inserting the same pair is a no-op;
    /// a different output for an existing input is an error.
    pub fn insert(&mut self, parts: &[&HiddenVec], output: HiddenVec) -> Result<()> {
        assert_eq!(output.dim, self.out_dim, "output dimension mismatch");
        let key = self.key(parts);
        self.insert_key(key, output)
    }

    pub fn insert_key(&mut self, key: LookupKey, output: HiddenVec) -> Result<()> {
        match self.table.get(&key) {
            Some(existing) if *existing != output => {
                Err(Error::Internal(format!("conflicting outputs for lookup key {key:?}")))
            }
            Some(_) => Ok(()),
            None => {
                self.table.insert(key, output);
                Ok(())
            }
        }
    }

    pub fn contains(&self, parts: &[&HiddenVec]) -> bool {
        self.table.contains_key(&self.key(parts))
    }

    pub fn apply(&self, parts: &[&HiddenVec], location: impl FnOnce() -> String) -> Result<HiddenVec> {
        match self.table.get(&self.key(parts)) {
            Some(v) => Ok(v.clone()),
            None => match self.unseen {
                Unseen::Zero => Ok(HiddenVec::zeros(self.out_dim)),
                Unseen::Error => Err(Error::UnseenInput { location: location() }),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct LayerParams {
    /// Boundary message map.
    pub phi: LookupFunction,
    /// Coboundary message map.
    pub psi: LookupFunction,
    /// Update on (state, boundary sum, coboundary sum).
    pub mu: LookupFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutWeights {
    Uniform,
    EulerSigns,
    PerDimension(Vec<f64>),
}

impl ReadoutWeights {
    pub fn weight(&self, dim: usize) -> f64 {
        match self {
            ReadoutWeights::Uniform => 1.0,
            ReadoutWeights::EulerSigns => {
                if dim.is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            }
            ReadoutWeights::PerDimension(w) => w.get(dim).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MpsnModel {
    /// Initialization mode and quantization used to form encoder inputs.
    pub config: RefinementConfig,
    pub hidden_dim: usize,
    pub encoder: LookupFunction,
    pub layers: Vec<LayerParams>,
    pub readout: LookupFunction,
    pub weights: ReadoutWeights,
}

impl MpsnModel {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

/// Hidden states for rounds `0..=L`, indexed like the complex's simplices.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenStates {
    pub rounds: Vec<Vec<HiddenVec>>,
}

impl HiddenStates {
    pub fn last(&self) -> &[HiddenVec] {
        self.rounds.last().expect("at least the encoder round")
    }
}

/// Encoder input: `[dim, features...]` as produced by the initial coloring.
pub fn initial_input(k: &EmbeddedComplex, s: &Simplex, cfg: &RefinementConfig) -> Result<HiddenVec> {
    let mut v = vec![s.dim() as f64];
    match cfg.mode {
        Mode::Wl => return Err(Error::Unsupported("message passing needs SWL or GSWL initialization".into())),
        Mode::Swl => {}
        Mode::Gswl if s.dim() == 0 => v.extend_from_slice(k.embedding().point(s.vertices()[0])),
        Mode::Gswl => match cfg.phi_mode {
            PhiMode::DimensionOnly => {}
            PhiMode::SortedCoords => {
                let mut pts: Vec<(Vec<i64>, &[f64])> = k
                    .vertex_points(s)
                    .into_iter()
                    .map(|p| (quantize_point(p, cfg.quantization_digits), p))
                    .collect();
                pts.sort_by(|a, b| a.0.cmp(&b.0));
                for (_, p) in pts {
                    v.extend_from_slice(p);
                }
            }
            PhiMode::DerivedFeatures if s.dim() > 2 => {}
            PhiMode::DerivedFeatures => v.extend(derived_features(s, k.embedding())?),
        },
    }
    Ok(HiddenVec::from_dense(&v))
}

/// Per-layer sums of mapped neighbor states.
fn aggregate(
    states: &[HiddenVec],
    mapped: &[HiddenVec],
    neighbors: impl Fn(usize) -> Vec<usize>,
    hidden_dim: usize,
) -> Vec<HiddenVec> {
    (0..states.len())
        .map(|id| {
            let mut sum = HiddenVec::zeros(hidden_dim);
            for n in neighbors(id) {
                sum.add_assign(&mapped[n]);
            }
            sum
        })
        .collect()
}

struct LayerInputs {
    boundary: Vec<HiddenVec>,
    coboundary: Vec<HiddenVec>,
}

fn layer_inputs(
    layer: &LayerParams,
    hasse: &HasseAdjacency,
    k: &EmbeddedComplex,
    states: &[HiddenVec],
    adjacency: Adjacency,
    hidden_dim: usize,
    l: usize,
) -> Result<LayerInputs> {
    let loc = |what: &str, id: usize| format!("layer {l} {what} at simplex {}", k.complex().simplex(id));
    let phi: Vec<HiddenVec> = states
        .iter()
        .enumerate()
        .map(|(id, h)| layer.phi.apply(&[h], || loc("phi", id)))
        .collect::<Result<_>>()?;
    let psi: Vec<HiddenVec> = states
        .iter()
        .enumerate()
        .map(|(id, h)| layer.psi.apply(&[h], || loc("psi", id)))
        .collect::<Result<_>>()?;
    let boundary = if adjacency == Adjacency::CoboundaryOnly {
        vec![HiddenVec::zeros(hidden_dim); states.len()]
    } else {
        aggregate(states, &phi, |id| hasse.boundary_ids(id).to_vec(), hidden_dim)
    };
    let coboundary = if adjacency == Adjacency::BoundaryOnly {
        vec![HiddenVec::zeros(hidden_dim); states.len()]
    } else {
        aggregate(states, &psi, |id| hasse.coboundary_ids(id).to_vec(), hidden_dim)
    };
    Ok(LayerInputs { boundary, coboundary })
}

/// Run the encoder and every layer on one complex.
pub fn forward(model: &MpsnModel, k: &EmbeddedComplex) -> Result<HiddenStates> {
    let hasse = HasseAdjacency::new(k.complex());
    let mut h0 = Vec::with_capacity(k.complex().len());
    for s in k.complex().simplices() {
        let input = initial_input(k, s, &model.config)?;
        h0.push(model.encoder.apply(&[&input], || format!("encoder at simplex {s}"))?);
    }
    let mut rounds = vec![h0];
    for (l, layer) in model.layers.iter().enumerate() {
        let states = rounds.last().unwrap();
        let inputs = layer_inputs(layer, &hasse, k, states, model.config.adjacency, model.hidden_dim, l)?;
        let next = states
            .iter()
            .enumerate()
            .map(|(id, h)| {
                layer.mu.apply(&[h, &inputs.boundary[id], &inputs.coboundary[id]], || {
                    format!("layer {l} mu at simplex {}", k.complex().simplex(id))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rounds.push(next);
    }
    Ok(HiddenStates { rounds })
}

/// `sum_s eta_{dim s} Psi(h_L(s))` as a dense vector.
pub fn readout(model: &MpsnModel, states: &HiddenStates, k: &EmbeddedComplex) -> Result<Vec<f64>> {
    let mut z = HiddenVec::zeros(model.readout.out_dim());
    for (id, h) in states.last().iter().enumerate() {
        let s = k.complex().simplex(id);
        let out = model.readout.apply(&[h], || format!("readout at simplex {s}"))?;
        z.add_assign(&out.scaled(model.weights.weight(s.dim())));
    }
    Ok(z.to_dense())
}

/// Histogram readout of a realizer: counts of round-`L` colors.
pub fn readout_histogram(model: &MpsnModel, states: &HiddenStates, k: &EmbeddedComplex) -> Result<Vec<f64>> {
    readout(model, states, k)
}

/// Lookup-table model whose states are basis vectors indexed by refinement
/// colors, together with the colorings it was built from.
#[derive(Debug)]
pub struct Realizer {
    pub model: MpsnModel,
    pub colorings: Vec<Coloring>,
    /// Colors observed at each round, in index order (`a_j` encodes `colors[l][j]`).
    pub colors: Vec<Vec<Color>>,
    /// Block width `m`; the hidden dimension is `3m`.
    pub block: usize,
}

impl Realizer {
    pub fn index_of(&self, l: usize, c: Color) -> Option<usize> {
        self.colors.get(l)?.iter().position(|&x| x == c)
    }
}

/// Builds the three-block basis-vector realizer for a finite family.
///
/// Colors at round `l` are indexed by first occurrence across the family. The
/// encoder sends each initial color to `a_j`, `phi` moves `a_j` to `b_j` and
/// `psi` moves it to `c_j`, so boundary and coboundary sums are multiplicity
/// vectors. `mu` is tabulated from a forward pass over the family, mapping
/// each observed triple to the basis vector of the next-round color.
pub fn construct_realizer(
    family: &[EmbeddedComplex],
    depth: usize,
    cfg: &RefinementConfig,
    interner: &mut ColorInterner,
) -> Result<Realizer> {
    if cfg.mode == Mode::Wl {
        return Err(Error::Unsupported("realizer needs SWL or GSWL initialization".into()));
    }
    let cfg = cfg.clone().with_depth(depth);
    let digits = cfg.quantization_digits;
    let colorings: Vec<Coloring> = family.iter().map(|k| refine(k, &cfg, interner)).collect::<Result<_>>()?;

    let mut colors: Vec<Vec<Color>> = Vec::with_capacity(depth + 1);
    let mut index: Vec<HashMap<Color, usize>> = Vec::with_capacity(depth + 1);
    for l in 0..=depth {
        let mut seen = HashMap::new();
        let mut order = Vec::new();
        for c in &colorings {
            for &color in c.round(l)? {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(color) {
                    e.insert(order.len());
                    order.push(color);
                }
            }
        }
        colors.push(order);
        index.push(seen);
    }
    let block = colors.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let hidden = 3 * block;
    let a = |j: usize| HiddenVec::basis(hidden, j);

    let mut encoder = LookupFunction::new(hidden, digits, Unseen::Error);
    let mut states: Vec<Vec<HiddenVec>> = Vec::with_capacity(family.len());
    for (k, coloring) in family.iter().zip(&colorings) {
        let round0 = coloring.round(0)?;
        let mut h = Vec::with_capacity(round0.len());
        for (id, s) in k.complex().simplices().enumerate() {
            let target = a(index[0][&round0[id]]);
            encoder.insert(&[&initial_input(k, s, &cfg)?], target.clone())?;
            h.push(target);
        }
        states.push(h);
    }

    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let mut phi = LookupFunction::new(hidden, digits, Unseen::Error);
        let mut psi = LookupFunction::new(hidden, digits, Unseen::Error);
        for j in 0..colors[l].len() {
            phi.insert(&[&a(j)], HiddenVec::basis(hidden, block + j))?;
            psi.insert(&[&a(j)], HiddenVec::basis(hidden, 2 * block + j))?;
        }
        let mut layer = LayerParams { phi, psi, mu: LookupFunction::new(hidden, digits, Unseen::Error) };
        let mut next_states = Vec::with_capacity(family.len());
        for ((k, coloring), h) in family.iter().zip(&colorings).zip(&states) {
            let hasse = HasseAdjacency::new(k.complex());
            let inputs = layer_inputs(&layer, &hasse, k, h, cfg.adjacency, hidden, l)?;
            let next_colors = coloring.round(l + 1)?;
            let mut next = Vec::with_capacity(h.len());
            for id in 0..h.len() {
                let target = a(index[l + 1][&next_colors[id]]);
                layer.mu.insert(&[&h[id], &inputs.boundary[id], &inputs.coboundary[id]], target.clone())?;
                next.push(target);
            }
            next_states.push(next);
        }
        layers.push(layer);
        states = next_states;
    }

    let m_last = colors[depth].len();
    let mut readout = LookupFunction::new(m_last, digits, Unseen::Error);
    for j in 0..m_last {
        readout.insert(&[&a(j)], HiddenVec::basis(m_last, j))?;
    }
    let model = MpsnModel {
        config: cfg,
        hidden_dim: hidden,
        encoder,
        layers,
        readout,
        weights: ReadoutWeights::Uniform,
    };
    Ok(Realizer { model, colorings, colors, block })
}

/// Maps quantized coordinates back to the exact points of a family.
struct PointResolver {
    points: HashMap<Vec<i64>, Vec<f64>>,
}

impl PointResolver {
    fn new(family: &[EmbeddedComplex], digits: u32) -> Result<Self> {
        let mut points: HashMap<Vec<i64>, Vec<f64>> = HashMap::new();
        for k in family {
            for (v, p) in k.embedding().iter() {
                let q = quantize_point(p, digits);
                match points.get(&q) {
                    Some(existing) if existing.as_slice() != p => {
                        return Err(Error::EmbeddingMismatch(format!(
                            "vertex {v}: distinct coordinates {existing:?} and {p:?} quantize identically"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        points.insert(q, p.to_vec());
                    }
                }
            }
        }
        Ok(Self { points })
    }

    fn resolve(&self, q: &[i64]) -> Result<&[f64]> {
        self.points
            .get(q)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Internal(format!("decoded point {q:?} not in family")))
    }
}

/// Replaces a realizer's readout by the Euler-signed indicator map: the
/// round-`L` color of each simplex is decoded into its vertex-coordinate set,
/// which fixes its entry time in every direction, and `Psi` emits
/// `1{t_nu(s) <= t}` over the `(direction, threshold)` grid, direction-major
/// with thresholds sorted ascending.
pub fn construct_ect_readout(
    family: &[EmbeddedComplex],
    directions: &[Direction],
    thresholds: &[f64],
    depth: usize,
    digits: u32,
    interner: &mut ColorInterner,
) -> Result<Realizer> {
    let max_dim = family.iter().filter_map(|k| k.complex().max_dim()).max().unwrap_or(0);
    if depth < max_dim {
        return Err(Error::DepthBelowDimension { depth, dim: max_dim });
    }
    for d in directions {
        if let Some(k) = family.iter().find(|k| k.ambient_dim() != d.dim()) {
            return Err(Error::InvalidDirection(format!(
                "direction of dimension {} for a complex in R^{}",
                d.dim(),
                k.ambient_dim()
            )));
        }
    }
    let cfg = RefinementConfig::gswl(depth).with_digits(digits);
    let mut realizer = construct_realizer(family, depth, &cfg, interner)?;
    let resolver = PointResolver::new(family, digits)?;
    let mut ts = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);

    let width = directions.len() * ts.len();
    let mut readout = LookupFunction::new(width, digits, Unseen::Error);
    let mut decoder = ColorDecoder::new(interner);
    for (j, &c) in realizer.colors[depth].iter().enumerate() {
        let coords = decoder.vertex_coordinates(c).ok_or(Error::Undecodable(c.0))?;
        let points: Vec<&[f64]> = coords.iter().map(|q| resolver.resolve(q)).collect::<Result<_>>()?;
        let mut indicators = Vec::with_capacity(width);
        for d in directions {
            let t_entry = entry_time_of_points(points.iter().copied(), d);
            indicators.extend(ts.iter().map(|&t| if t_entry <= t { 1.0 } else { 0.0 }));
        }
        readout.insert(&[&HiddenVec::basis(realizer.model.hidden_dim, j)], HiddenVec::from_dense(&indicators))?;
    }
    realizer.model.readout = readout;
    realizer.model.weights = ReadoutWeights::EulerSigns;
    Ok(realizer)
}

/// Integer view of an Euler-signed readout. Fails if any entry is not integral.
pub fn integral(z: &[f64]) -> Result<Vec<i64>> {
    z.iter()
        .map(|&v| {
            if v.fract() == 0.0 {
                Ok(v as i64)
            } else {
                Err(Error::Internal(format!("non-integral readout entry {v}")))
            }
        })
        .collect()
}

const LATTICE_SCALE: f64 = 1.0 / 1024.0;

fn lattice_vec(rng: &mut ChaCha8Rng, dim: usize) -> HiddenVec {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1024i32..=1024) as f64 * LATTICE_SCALE).collect();
    HiddenVec::from_dense(&v)
}

/// Random lookup-table model whose tables cover every input reachable on
/// `family`. Keys are filled in sorted order so the draw depends only on the
/// seed and the set of reachable inputs.
pub fn random_model(
    family: &[EmbeddedComplex],
    depth: usize,
    cfg: &RefinementConfig,
    hidden_dim: usize,
    out_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MpsnModel> {
    let digits = cfg.quantization_digits;
    let fill = |keys: Vec<LookupKey>, f: &mut LookupFunction, rng: &mut ChaCha8Rng, dim: usize| -> Result<()> {
        let mut keys = keys;
        keys.sort();
        keys.dedup();
        for key in keys {
            f.insert_key(key, lattice_vec(rng, dim))?;
        }
        Ok(())
    };

    let mut encoder = LookupFunction::new(hidden_dim, digits, Unseen::Error);
    let mut inputs: Vec<Vec<HiddenVec>> = Vec::new();
    for k in family {
        inputs.push(k.complex().simplices().map(|s| initial_input(k, s, cfg)).collect::<Result<_>>()?);
    }
    let keys: Vec<LookupKey> = inputs.iter().flatten().map(|h| encoder.key(&[h])).collect();
    fill(keys, &mut encoder, rng, hidden_dim)?;
    let mut states: Vec<Vec<HiddenVec>> = inputs
        .iter()
        .map(|hs| hs.iter().map(|h| encoder.apply(&[h], String::new)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let hasses: Vec<HasseAdjacency> = family.iter().map(|k| HasseAdjacency::new(k.complex())).collect();
    let mut layers = Vec::with_capacity(depth);
    for l in 0..depth {
        let mut phi = LookupFunction::new(hidden_dim, digits, Unseen::Error);
        let mut psi = LookupFunction::new(hidden_dim, digits, Unseen::Error);
        let keys: Vec<LookupKey> = states.iter().flatten().map(|h| phi.key(&[h])).collect();
        fill(keys.clone(), &mut phi, rng, hidden_dim)?;
        fill(keys, &mut psi, rng, hidden_dim)?;
        let mut layer = LayerParams { phi, psi, mu: LookupFunction::new(hidden_dim, digits, Unseen::Error) };

        let mut all_inputs = Vec::with_capacity(family.len());
        let mut mu_keys = Vec::new();
        for ((k, hasse), h) in family.iter().zip(&hasses).zip(&states) {
            let li = layer_inputs(&layer, hasse, k, h, cfg.adjacency, hidden_dim, l)?;
            for id in 0..h.len() {
                mu_keys.push(layer.mu.key(&[&h[id], &li.boundary[id], &li.coboundary[id]]));
            }
            all_inputs.push(li);
        }
        fill(mu_keys, &mut layer.mu, rng, hidden_dim)?;
        states = states
            .iter()
            .zip(&all_inputs)
            .map(|(h, li)| {
                (0..h.len())
                    .map(|id| layer.mu.apply(&[&h[id], &li.boundary[id], &li.coboundary[id]], String::new))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        layers.push(layer);
    }

    let mut readout = LookupFunction::new(out_dim, digits, Unseen::Error);
    let keys: Vec<LookupKey> = states.iter().flatten().map(|h| readout.key(&[h])).collect();
    fill(keys, &mut readout, rng, out_dim)?;
    let max_dim = family.iter().filter_map(|k| k.complex().max_dim()).max().unwrap_or(0);
    let weights = ReadoutWeights::PerDimension(
        (0..=max_dim).map(|_| rng.random_range(-1024i32..=1024) as f64 * LATTICE_SCALE).collect(),
    );
    Ok(MpsnModel {
        config: cfg.clone().with_depth(depth),
        hidden_dim,
        encoder,
        layers,
        readout,
        weights,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBoundReport {
    pub depth: usize,
    pub mode: Mode,
    pub equivalent: bool,
    pub skipped: bool,
    pub trials: usize,
    pub violations: usize,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub note: &'static str,
}

impl UpperBoundReport {
    pub fn passed(&self) -> bool {
        !self.skipped && self.violations == 0
    }
}

pub const UPPER_BOUND_TOLERANCE: f64 = 1e-9;
const UPPER_BOUND_HIDDEN: usize = 6;
const UPPER_BOUND_OUT: usize = 4;

/// For equivalent inputs, random lookup-table parameters must give equal
/// readouts. Non-equivalent pairs are reported as skipped.
pub fn upper_bound_check(
    a: &EmbeddedComplex,
    b: &EmbeddedComplex,
    depth: usize,
    trials: usize,
    seed: u64,
    cfg: &RefinementConfig,
) -> Result<UpperBoundReport> {
    let cfg = cfg.clone().with_depth(depth);
    let mut interner = ColorInterner::new();
    let ca = refine(a, &cfg, &mut interner)?;
    let cb = refine(b, &cfg, &mut interner)?;
    let equivalent = equivalent_at(&ca, &cb, depth)?;
    let mut report = UpperBoundReport {
        depth,
        mode: cfg.mode,
        equivalent,
        skipped: !equivalent,
        trials: 0,
        violations: 0,
        max_abs_diff: 0.0,
        tolerance: UPPER_BOUND_TOLERANCE,
        note: "statistical check of a universally quantified statement over finitely many random parameter draws",
    };
    if !equivalent {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = [a.clone(), b.clone()];
    for _ in 0..trials {
        let model = random_model(&family, depth, &cfg, UPPER_BOUND_HIDDEN, UPPER_BOUND_OUT, &mut rng)?;
        let za = readout(&model, &forward(&model, a)?, a)?;
        let zb = readout(&model, &forward(&model, b)?, b)?;
        let diff = za.iter().zip(&zb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        report.max_abs_diff = report.max_abs_diff.max(diff);
        if diff > UPPER_BOUND_TOLERANCE {
            report.violations += 1;
        }
        report.trials += 1;
    }
    Ok(report)
}

/// Vertex states `[x_v || g_v]` for every round; `g` is the model's own state.
#[derive(Clone, Debug, PartialEq)]
pub struct SkipState {
    pub ambient_dim: usize,
    pub vertices: Vec<usize>,
    pub rounds: Vec<Vec<HiddenVec>>,
}

/// Forward pass with the vertex-coordinate skip channel.
pub fn skip_forward(model: &MpsnModel, k: &EmbeddedComplex) -> Result<SkipState> {
    let dim = k.complex().max_dim().unwrap_or(0);
    if model.depth() < dim {
        return Err(Error::DepthBelowDimension { depth: model.depth(), dim });
    }
    let states = forward(model, k)?;
    let vertices: Vec<usize> = k.complex().vertices().collect();
    // vertices come first in the global simplex order
    let rounds = states
        .rounds
        .iter()
        .map(|round| {
            vertices
                .iter()
                .enumerate()
                .map(|(id, &v)| round[id].prepend(k.embedding().point(v)))
                .collect()
        })
        .collect();
    Ok(SkipState { ambient_dim: k.ambient_dim(), vertices, rounds })
}

/// Projection of the last-round vertex states onto their first `d` coordinates.
pub fn recover_coords(state: &SkipState) -> Result<Embedding> {
    let last = state.rounds.last().ok_or_else(|| Error::Internal("empty skip state".into()))?;
    let coords: BTreeMap<usize, Vec<f64>> = state
        .vertices
        .iter()
        .zip(last)
        .map(|(&v, h)| (v, h.prefix(state.ambient_dim)))
        .collect();
    Embedding::new(state.ambient_dim, coords)
}

impl fmt::Display for UpperBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.skipped {
            write!(f, "skipped: inputs are not {:?}-{} equivalent", self.mode, self.depth)
        } else {
            write!(
                f,
                "{} trials, {} violations, max |z1 - z2| = {:e}",
                self.trials, self.violations, self.max_abs_diff
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ect::{sampled_ect, sphere_quadrature, linspace};

    fn tri(coords: [[f64; 2]; 3], filled: bool) -> EmbeddedComplex {
        let maximal: Vec<Vec<usize>> = if filled {
            vec![vec![0, 1, 2]]
        } else {
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        };
        EmbeddedComplex::from_parts(2, coords.iter().enumerate().map(|(i, p)| (i, p.to_vec())), &maximal)
            .unwrap()
    }

    const UP: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    const DOWN: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, -1.0]];

    #[test]
    fn sparse_vector_arithmetic() {
        let mut a = HiddenVec::from_dense(&[1.0, 0.0, 2.0]);
        a.add_assign(&HiddenVec::from_dense(&[0.0, 3.0, -2.0]));
        assert_eq!(a.entries(), &[(0, 1.0), (1, 3.0)]);
        assert_eq!(a.to_dense(), vec![1.0, 3.0, 0.0]);
        assert_eq!(a.get(1), 3.0);
        let p = a.prepend(&[7.0, 0.0]);
        assert_eq!(p.dim(), 5);
        assert_eq!(p.prefix(2), vec![7.0, 0.0]);
        assert_eq!(p.to_dense(), vec![7.0, 0.0, 1.0, 3.0, 0.0]);
    }

    #[test]
    fn lookup_keys_separate_concatenation_positions() {
        let a = HiddenVec::basis(3, 0);
        let z = HiddenVec::zeros(3);
        assert_ne!(LookupKey::of(&[&a, &z], 12), LookupKey::of(&[&z, &a], 12));
        assert_ne!(LookupKey::of(&[&HiddenVec::zeros(1)], 12), LookupKey::of(&[&HiddenVec::zeros(2)], 12));
    }

    #[test]
    fn lookup_interpolates_and_reports_misses() {
        let mut f = LookupFunction::new(2, 12, Unseen::Error);
        f.insert(&[&HiddenVec::basis(3, 1)], HiddenVec::from_dense(&[5.0, 6.0])).unwrap();
        assert_eq!(f.apply(&[&HiddenVec::basis(3, 1)], String::new).unwrap().to_dense(), vec![5.0, 6.0]);
        let err = f.apply(&[&HiddenVec::basis(3, 2)], || "layer 0 mu".into()).unwrap_err();
        assert!(err.to_string().contains("layer 0 mu"));
        assert!(f.insert(&[&HiddenVec::basis(3, 1)], HiddenVec::zeros(2)).is_err());
        let g = LookupFunction::new(2, 12, Unseen::Zero);
        assert_eq!(g.apply(&[&HiddenVec::basis(3, 2)], String::new).unwrap(), HiddenVec::zeros(2));
    }

    #[test]
    fn depth_zero_model_returns_encoder_outputs() {
        let k = tri(UP, true);
        let mut i = ColorInterner::new();
        let r = construct_realizer(std::slice::from_ref(&k), 0, &RefinementConfig::gswl(0), &mut i).unwrap();
        let h = forward(&r.model, &k).unwrap();
        assert_eq!(h.rounds.len(), 1);
        for (id, s) in k.complex().simplices().enumerate() {
            let input = initial_input(&k, s, &r.model.config).unwrap();
            assert_eq!(h.rounds[0][id], r.model.encoder.apply(&[&input], String::new).unwrap());
        }
    }

    #[test]
    fn isolated_vertex_receives_zero_sums() {
        let k = EmbeddedComplex::from_parts(2, [(0, vec![0.0, 0.0]), (1, vec![1.0, 1.0])], &[vec![0], vec![1]])
            .unwrap();
        let mut i = ColorInterner::new();
        let r = construct_realizer(std::slice::from_ref(&k), 3, &RefinementConfig::gswl(0), &mut i).unwrap();
        let hasse = HasseAdjacency::new(k.complex());
        let h = forward(&r.model, &k).unwrap();
        for (l, layer) in r.model.layers.iter().enumerate() {
            let li = layer_inputs(layer, &hasse, &k, &h.rounds[l], Adjacency::Full, r.model.hidden_dim, l).unwrap();
            assert!(li.boundary.iter().chain(&li.coboundary).all(|v| v.entries().is_empty()));
        }
    }

    #[test]
    fn realizer_states_are_color_basis_vectors() {
        let family = [tri(UP, true), tri(DOWN, true), tri(UP, false)];
        let mut i = ColorInterner::new();
        let r = construct_realizer(&family, 3, &RefinementConfig::gswl(0), &mut i).unwrap();
        assert_eq!(r.model.hidden_dim, 3 * r.block);
        for (k, coloring) in family.iter().zip(&r.colorings) {
            let h = forward(&r.model, k).unwrap();
            for l in 0..=3 {
                for (id, &c) in coloring.round(l).unwrap().iter().enumerate() {
                    let j = r.index_of(l, c).unwrap();
                    assert_eq!(h.rounds[l][id], HiddenVec::basis(r.model.hidden_dim, j));
                }
            }
        }
    }

    #[test]
    fn histogram_sums_to_simplex_count_and_separates_reflection() {
        let (up, down) = (tri(UP, true), tri(DOWN, true));
        let mut i = ColorInterner::new();
        let r = construct_realizer(&[up.clone(), down.clone()], 0, &RefinementConfig::gswl(0), &mut i).unwrap();
        let zu = readout_histogram(&r.model, &forward(&r.model, &up).unwrap(), &up).unwrap();
        let zd = readout_histogram(&r.model, &forward(&r.model, &down).unwrap(), &down).unwrap();
        assert_eq!(zu.iter().sum::<f64>(), 7.0);
        assert_ne!(zu, zd);
    }

    #[test]
    fn relabeled_copy_has_equal_readout() {
        let up = tri([[0.1, 0.2], [1.3, 0.0], [0.4, 1.1]], true);
        let perm = BTreeMap::from([(0, 5), (1, 3), (2, 9)]);
        let moved = up.relabel(&perm).unwrap();
        let mut i = ColorInterner::new();
        let r = construct_realizer(&[up.clone(), moved.clone()], 4, &RefinementConfig::gswl(0), &mut i).unwrap();
        for k in [&up, &moved] {
            let h = forward(&r.model, k).unwrap();
            assert_eq!(h.rounds.len(), 5);
        }
        let z1 = readout(&r.model, &forward(&r.model, &up).unwrap(), &up).unwrap();
        let z2 = readout(&r.model, &forward(&r.model, &moved).unwrap(), &moved).unwrap();
        assert_eq!(z1, z2);
    }

    #[test]
    fn unseen_complex_is_a_hard_error() {
        let mut i = ColorInterner::new();
        let r = construct_realizer(&[tri(UP, true)], 1, &RefinementConfig::gswl(0), &mut i).unwrap();
        let other = tri(DOWN, true);
        assert!(matches!(forward(&r.model, &other), Err(Error::UnseenInput { .. })));
    }

    #[test]
    fn ect_readout_matches_direct_computation() {
        let family = [tri(UP, true), tri(DOWN, true), tri([[0.2, 0.1], [0.9, 0.7], [-0.3, 0.5]], true)];
        let dirs = sphere_quadrature(2, 8).unwrap().directions();
        let ts = linspace(-1.2, 1.2, 10);
        let mut i = ColorInterner::new();
        let r = construct_ect_readout(&family, &dirs, &ts, 2, 12, &mut i).unwrap();
        for k in &family {
            let z = readout(&r.model, &forward(&r.model, k).unwrap(), k).unwrap();
            assert_eq!(integral(&z).unwrap(), sampled_ect(k, &dirs, &ts).unwrap().flatten());
        }
    }

    #[test]
    fn ect_readout_needs_depth_at_least_dimension() {
        let dirs = sphere_quadrature(2, 4).unwrap().directions();
        let mut i = ColorInterner::new();
        assert!(matches!(
            construct_ect_readout(&[tri(UP, true)], &dirs, &[0.0], 1, 12, &mut i),
            Err(Error::DepthBelowDimension { depth: 1, dim: 2 })
        ));
        let r = construct_ect_readout(&[tri(UP, true)], &dirs, &[], 2, 12, &mut i).unwrap();
        let k = tri(UP, true);
        assert!(readout(&r.model, &forward(&r.model, &k).unwrap(), &k).unwrap().is_empty());
    }

    #[test]
    fn upper_bound_on_relabeling_and_swl_collapse() {
        let up = tri([[0.1, 0.2], [1.3, 0.0], [0.4, 1.1]], true);
        let moved = up.relabel(&BTreeMap::from([(0, 2), (1, 0), (2, 1)])).unwrap();
        let r = upper_bound_check(&up, &moved, 3, 20, 7, &RefinementConfig::gswl(0)).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.trials, 20);

        let down = tri(DOWN, true);
        let r = upper_bound_check(&tri(UP, true), &down, 2, 20, 7, &RefinementConfig::swl(0)).unwrap();
        assert!(r.passed(), "{r}");
        let r = upper_bound_check(&tri(UP, true), &down, 2, 20, 7, &RefinementConfig::gswl(0)).unwrap();
        assert!(r.skipped);
    }

    #[test]
    fn random_models_distinguish_non_equivalent_inputs() {
        // sanity check that the checker is not vacuous
        let family = [tri(UP, true), tri(DOWN, true)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_model(&family, 1, &RefinementConfig::gswl(1), 6, 4, &mut rng).unwrap();
        let za = readout(&m, &forward(&m, &family[0]).unwrap(), &family[0]).unwrap();
        let zb = readout(&m, &forward(&m, &family[1]).unwrap(), &family[1]).unwrap();
        assert_ne!(za, zb);
    }

    #[test]
    fn skip_channel_recovers_coordinates() {
        let k = tri([[0.1, -0.2], [1.3, 0.0], [0.4, 1.1]], true);
        let mut i = ColorInterner::new();
        let r = construct_realizer(std::slice::from_ref(&k), 8, &RefinementConfig::gswl(0), &mut i).unwrap();
        let s = skip_forward(&r.model, &k).unwrap();
        assert_eq!(s.rounds.len(), 9);
        assert_eq!(s.rounds[8][0].dim(), 2 + r.model.hidden_dim);
        assert_eq!(recover_coords(&s).unwrap(), *k.embedding());

        let shallow = construct_realizer(std::slice::from_ref(&k), 1, &RefinementConfig::gswl(0), &mut i).unwrap();
        assert!(matches!(skip_forward(&shallow.model, &k), Err(Error::DepthBelowDimension { .. })));
    }
}
