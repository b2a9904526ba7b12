//! Abstract and embedded simplicial complexes.
//!
//! Simplices are stored once per complex in a global order (by dimension, then
//! lexicographically by vertex list) so that every other module can address
//! them by a dense `usize` index. Coordinates are compared through a decimal
//! quantization ([`quantize`]) so that equality, injectivity and hashing are
//! well defined under floating-point noise.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Default number of decimal digits kept when quantizing coordinates.
pub const DEFAULT_QUANTIZATION_DIGITS: u32 = 12;

/// Default vertex budget for [`embedded_isomorphic`].
pub const DEFAULT_ORACLE_BUDGET: usize = 12;

const MAX_SIMPLEX_VERTICES: usize = 24;

/// Round a coordinate to `digits` decimal places and return the scaled integer.
pub fn quantize(value: f64, digits: u32) -> i64 {
    let scale = 10f64.powi(digits as i32);
    // `as` saturates on overflow and maps -0.0 to 0.
    (value * scale).round() as i64
}

/// Quantize every component of a point.
pub fn quantize_point(point: &[f64], digits: u32) -> Vec<i64> {
    point.iter().map(|&v| quantize(v, digits)).collect()
}

/// A simplex in canonical form: strictly increasing vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Simplex {
    vertices: Vec<usize>,
}

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidSimplex(vertices, "empty vertex list"));
        }
        let original = vertices.clone();
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(original, "duplicate vertex"));
        }
        Ok(Self { vertices })
    }

    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self { vertices }
    }

    pub fn vertex(v: usize) -> Self {
        Self { vertices: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Codimension-1 faces, in the order obtained by dropping vertex `i` for `i = 0..=dim`.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.vertices.len() > 1 { self.vertices.len() } else { 0 };
        (0..n).map(move |skip| {
            let vertices = self
                .vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            Simplex { vertices }
        })
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.vertices.iter().all(|v| other.vertices.binary_search(v).is_ok())
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.vertices
            .len()
            .cmp(&other.vertices.len())
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A finite abstract simplicial complex, closed under taking nonempty subsets.
#[derive(Clone, Debug)]
pub struct AbstractComplex {
    by_dim: Vec<Vec<Simplex>>,
    offsets: Vec<usize>,
    index: HashMap<Simplex, usize>,
}

impl PartialEq for AbstractComplex {
    fn eq(&self, other: &Self) -> bool {
        self.by_dim == other.by_dim
    }
}

impl Eq for AbstractComplex {}

impl AbstractComplex {
    pub fn empty() -> Self {
        Self { by_dim: Vec::new(), offsets: Vec::new(), index: HashMap::new() }
    }

    /// Build from a set that the caller guarantees is already closed under faces.
    pub(crate) fn from_closed_set(simplices: BTreeSet<Simplex>) -> Self {
        let mut by_dim: Vec<Vec<Simplex>> = Vec::new();
        for s in simplices {
            let d = s.dim();
            if by_dim.len() <= d {
                by_dim.resize_with(d + 1, Vec::new);
            }
            by_dim[d].push(s);
        }
        let mut offsets = Vec::with_capacity(by_dim.len());
        let mut index = HashMap::new();
        let mut next = 0;
        for layer in &by_dim {
            offsets.push(next);
            for s in layer {
                index.insert(s.clone(), next);
                next += 1;
            }
        }
        let complex = Self { by_dim, offsets, index };
        debug_assert!(complex.is_closed());
        complex
    }

    /// Number of simplices.
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Maximal simplex dimension, `None` for the empty complex.
    pub fn max_dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    /// Number of simplices per dimension, starting at dimension 0.
    pub fn counts(&self) -> Vec<usize> {
        self.by_dim.iter().map(Vec::len).collect()
    }

    /// Simplices in global order: by dimension, then lexicographically.
    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> + '_ {
        self.by_dim.iter().flatten()
    }

    pub fn simplices_of_dim(&self, dim: usize) -> &[Simplex] {
        self.by_dim.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Simplex at a global index. Panics when out of range.
    pub fn simplex(&self, id: usize) -> &Simplex {
        // offsets are strictly increasing: closure leaves no empty dimension below max_dim
        let dim = match self.offsets.binary_search(&id) {
            Ok(d) => d,
            Err(d) => d - 1,
        };
        &self.by_dim[dim][id - self.offsets[dim]]
    }

    pub fn id_of(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index.contains_key(s)
    }

    /// Vertex ids in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.simplices_of_dim(0).iter().map(|s| s.vertices[0])
    }

    /// Simplices that are not a face of any other simplex.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        let hasse = HasseAdjacency::new(self);
        self.simplices()
            .enumerate()
            .filter(|(id, _)| hasse.coboundary_ids(*id).is_empty())
            .map(|(_, s)| s.clone())
            .collect()
    }

    /// Every nonempty face of every simplex is present.
    pub fn is_closed(&self) -> bool {
        self.simplices().all(|s| s.facets().all(|f| self.contains(&f)))
    }

    /// The subcomplex of simplices passing `keep`. The caller must ensure the
    /// predicate is monotone (faces of kept simplices are kept).
    pub fn filter(&self, mut keep: impl FnMut(usize, &Simplex) -> bool) -> AbstractComplex {
        let set: BTreeSet<Simplex> = self
            .simplices()
            .enumerate()
            .filter(|(id, s)| keep(*id, s))
            .map(|(_, s)| s.clone())
            .collect();
        AbstractComplex::from_closed_set(set)
    }

    /// Apply a vertex relabeling. Every vertex must be mapped, injectively.
    pub fn relabel(&self, map: &BTreeMap<usize, usize>) -> Result<AbstractComplex> {
        let mut set = BTreeSet::new();
        for s in self.simplices() {
            let mut vs = Vec::with_capacity(s.vertices.len());
            for v in &s.vertices {
                let w = map.get(v).ok_or_else(|| {
                    Error::EmbeddingMismatch(format!("relabeling does not map vertex {v}"))
                })?;
                vs.push(*w);
            }
            set.insert(Simplex::new(vs)?);
        }
        if set.len() != self.len() {
            return Err(Error::EmbeddingMismatch("relabeling is not injective".into()));
        }
        Ok(AbstractComplex::from_closed_set(set))
    }

    /// Disjoint union after shifting the other complex's vertex ids by `shift`.
    pub fn disjoint_union(&self, other: &AbstractComplex, shift: usize) -> Result<AbstractComplex> {
        let mut set: BTreeSet<Simplex> = self.simplices().cloned().collect();
        for s in other.simplices() {
            let shifted = Simplex::from_sorted(s.vertices.iter().map(|v| v + shift).collect());
            if !set.insert(shifted) {
                return Err(Error::ComplexMismatch("vertex sets overlap after shift".into()));
            }
        }
        Ok(AbstractComplex::from_closed_set(set))
    }
}

/// Build the face closure of a list of (maximal) simplices.
pub fn build_complex(maximal_simplices: &[Vec<usize>]) -> Result<AbstractComplex> {
    let mut set = BTreeSet::new();
    for raw in maximal_simplices {
        let top = Simplex::new(raw.clone())?;
        let n = top.vertices.len();
        if n > MAX_SIMPLEX_VERTICES {
            return Err(Error::InvalidSimplex(raw.clone(), "too many vertices for face closure"));
        }
        for mask in 1u32..(1u32 << n) {
            let face: Vec<usize> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| top.vertices[i])
                .collect();
            set.insert(Simplex::from_sorted(face));
        }
    }
    Ok(AbstractComplex::from_closed_set(set))
}

/// Euler characteristic: alternating sum of per-dimension counts.
pub fn euler_characteristic(complex: &AbstractComplex) -> i64 {
    complex
        .counts()
        .iter()
        .enumerate()
        .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
        .sum()
}

/// Boundary and coboundary relations between consecutive dimensions, indexed
/// by the complex's global simplex order.
#[derive(Clone, Debug)]
pub struct HasseAdjacency {
    boundary: Vec<Vec<usize>>,
    coboundary: Vec<Vec<usize>>,
}

impl HasseAdjacency {
    pub fn new(complex: &AbstractComplex) -> Self {
        let n = complex.len();
        let mut boundary = vec![Vec::new(); n];
        let mut coboundary = vec![Vec::new(); n];
        for (id, s) in complex.simplices().enumerate() {
            for f in s.facets() {
                let fid = complex.id_of(&f).expect("complex is closed under faces");
                boundary[id].push(fid);
                coboundary[fid].push(id);
            }
        }
        for list in boundary.iter_mut().chain(coboundary.iter_mut()) {
            list.sort_unstable();
        }
        Self { boundary, coboundary }
    }

    pub fn boundary_ids(&self, id: usize) -> &[usize] {
        &self.boundary[id]
    }

    pub fn coboundary_ids(&self, id: usize) -> &[usize] {
        &self.coboundary[id]
    }

    pub fn boundary<'a>(&'a self, complex: &'a AbstractComplex, s: &Simplex) -> Vec<&'a Simplex> {
        complex
            .id_of(s)
            .map(|id| self.boundary[id].iter().map(|&f| complex.simplex(f)).collect())
            .unwrap_or_default()
    }

    pub fn coboundary<'a>(&'a self, complex: &'a AbstractComplex, s: &Simplex) -> Vec<&'a Simplex> {
        complex
            .id_of(s)
            .map(|id| self.coboundary[id].iter().map(|&f| complex.simplex(f)).collect())
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }
}

/// Vertex coordinates in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    ambient_dim: usize,
    coords: BTreeMap<usize, Vec<f64>>,
}

impl Embedding {
    pub fn new(ambient_dim: usize, coords: BTreeMap<usize, Vec<f64>>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        for (v, p) in &coords {
            if p.len() != ambient_dim {
                return Err(Error::EmbeddingMismatch(format!(
                    "vertex {v} has {} coordinates, expected {ambient_dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::EmbeddingMismatch(format!("vertex {v} has a non-finite coordinate")));
            }
        }
        Ok(Self { ambient_dim, coords })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn get(&self, v: usize) -> Option<&[f64]> {
        self.coords.get(&v).map(Vec::as_slice)
    }

    /// Coordinates of a vertex that is known to be embedded. Panics otherwise.
    pub fn point(&self, v: usize) -> &[f64] {
        &self.coords[&v]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.coords.iter().map(|(&v, p)| (v, p.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords.keys().copied()
    }

    /// Fails with the first pair of vertices whose quantized coordinates coincide.
    pub fn check_injective(&self, digits: u32) -> Result<()> {
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::with_capacity(self.coords.len());
        for (&v, p) in &self.coords {
            if let Some(&u) = seen.get(&quantize_point(p, digits)) {
                return Err(Error::NonInjective(u, v));
            }
            seen.insert(quantize_point(p, digits), v);
        }
        Ok(())
    }

    /// Same vertex set and equal quantized coordinates.
    pub fn quantized_eq(&self, other: &Embedding, digits: u32) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.coords.len() == other.coords.len()
            && self.coords.iter().zip(&other.coords).all(|((u, p), (v, q))| {
                u == v && quantize_point(p, digits) == quantize_point(q, digits)
            })
    }

    pub fn map_points(&self, mut f: impl FnMut(usize, &[f64]) -> Vec<f64>) -> Result<Embedding> {
        let coords = self.coords.iter().map(|(&v, p)| (v, f(v, p))).collect();
        Embedding::new(self.ambient_dim, coords)
    }
}

/// An abstract complex with an injective vertex embedding covering exactly its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedComplex {
    complex: AbstractComplex,
    embedding: Embedding,
}

impl EmbeddedComplex {
    pub fn new(complex: AbstractComplex, embedding: Embedding) -> Result<Self> {
        let verts: Vec<usize> = complex.vertices().collect();
        let embedded: Vec<usize> = embedding.vertex_ids().collect();
        if verts != embedded {
            return Err(Error::EmbeddingMismatch(format!(
                "complex has {} vertices, embedding covers {} (vertex sets differ)",
                verts.len(),
                embedded.len()
            )));
        }
        Ok(Self { complex, embedding })
    }

    /// Convenience constructor from raw coordinate lists and maximal simplices.
    pub fn from_parts(
        ambient_dim: usize,
        coords: impl IntoIterator<Item = (usize, Vec<f64>)>,
        maximal_simplices: &[Vec<usize>],
    ) -> Result<Self> {
        let complex = build_complex(maximal_simplices)?;
        let embedding = Embedding::new(ambient_dim, coords.into_iter().collect())?;
        Self::new(complex, embedding)
    }

    pub fn complex(&self) -> &AbstractComplex {
        &self.complex
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn ambient_dim(&self) -> usize {
        self.embedding.ambient_dim
    }

    pub fn with_embedding(&self, embedding: Embedding) -> Result<Self> {
        Self::new(self.complex.clone(), embedding)
    }

    /// Relabel vertices, carrying coordinates along.
    pub fn relabel(&self, map: &BTreeMap<usize, usize>) -> Result<Self> {
        let complex = self.complex.relabel(map)?;
        let coords = self
            .embedding
            .iter()
            .map(|(v, p)| (map[&v], p.to_vec()))
            .collect();
        Self::new(complex, Embedding::new(self.ambient_dim(), coords)?)
    }

    /// Coordinates of the vertices of `s`, in vertex order.
    pub fn vertex_points(&self, s: &Simplex) -> Vec<&[f64]> {
        s.vertices().iter().map(|&v| self.embedding.point(v)).collect()
    }
}

/// Coordinate-derived simplex features: a vertex's position, an edge's midpoint
/// and length, or a triangle's centroid and area.
pub fn derived_features(simplex: &Simplex, embedding: &Embedding) -> Result<Vec<f64>> {
    let mut points = Vec::with_capacity(simplex.vertices().len());
    for &v in simplex.vertices() {
        let p = embedding
            .get(v)
            .ok_or_else(|| Error::EmbeddingMismatch(format!("vertex {v} is not embedded")))?;
        points.push(p);
    }
    match simplex.dim() {
        0 => Ok(points[0].to_vec()),
        1 => {
            let mut out = mean_point(&points);
            out.push(distance(points[0], points[1]));
            Ok(out)
        }
        2 => {
            let mut out = mean_point(&points);
            out.push(triangle_area(points[0], points[1], points[2]));
            Ok(out)
        }
        k => Err(Error::UnsupportedFeatureDimension(k)),
    }
}

fn mean_point(points: &[&[f64]]) -> Vec<f64> {
    let n = points.len() as f64;
    let d = points[0].len();
    (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Triangle area: half |det| in the plane, half the cross-product norm in
/// space, and the Gram-determinant formula otherwise.
pub fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u = sub(b, a);
    let v = sub(c, a);
    match a.len() {
        1 => 0.0,
        2 => 0.5 * (u[0] * v[1] - u[1] * v[0]).abs(),
        3 => {
            let cx = u[1] * v[2] - u[2] * v[1];
            let cy = u[2] * v[0] - u[0] * v[2];
            let cz = u[0] * v[1] - u[1] * v[0];
            0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
        }
        _ => {
            let (uu, vv, uv) = (dot(&u, &u), dot(&v, &v), dot(&u, &v));
            0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
        }
    }
}

/// Brute-force isomorphism test for embedded complexes: a simplicial
/// isomorphism `phi` with `x2(phi(v)) = x1(v)`.
///
/// Candidate images of a vertex are restricted to vertices with equal
/// quantized coordinates; with injective embeddings that leaves at most one.
pub fn embedded_isomorphic(
    a: &EmbeddedComplex,
    b: &EmbeddedComplex,
    budget: usize,
    digits: u32,
) -> Result<bool> {
    let na = a.embedding.len();
    let nb = b.embedding.len();
    for n in [na, nb] {
        if n > budget {
            return Err(Error::OracleBudgetExceeded { vertices: n, budget });
        }
    }
    if na != nb || a.complex.counts() != b.complex.counts() || a.ambient_dim() != b.ambient_dim() {
        return Ok(false);
    }
    let left: Vec<(usize, Vec<i64>)> =
        a.embedding.iter().map(|(v, p)| (v, quantize_point(p, digits))).collect();
    let right: Vec<(usize, Vec<i64>)> =
        b.embedding.iter().map(|(v, p)| (v, quantize_point(p, digits))).collect();
    let candidates: Vec<Vec<usize>> = left
        .iter()
        .map(|(_, q)| right.iter().filter(|(_, r)| r == q).map(|(w, _)| *w).collect())
        .collect();

    let mut assignment = BTreeMap::new();
    let mut used = BTreeSet::new();
    Ok(search(a, b, &left, &candidates, 0, &mut assignment, &mut used))
}

fn search(
    a: &EmbeddedComplex,
    b: &EmbeddedComplex,
    left: &[(usize, Vec<i64>)],
    candidates: &[Vec<usize>],
    depth: usize,
    assignment: &mut BTreeMap<usize, usize>,
    used: &mut BTreeSet<usize>,
) -> bool {
    if depth == left.len() {
        return a.complex.simplices().all(|s| {
            let image: Vec<usize> = s.vertices().iter().map(|v| assignment[v]).collect();
            Simplex::new(image).map(|t| b.complex.contains(&t)).unwrap_or(false)
        });
    }
    let v = left[depth].0;
    for &w in &candidates[depth] {
        if used.contains(&w) {
            continue;
        }
        assignment.insert(v, w);
        used.insert(w);
        if search(a, b, left, candidates, depth + 1, assignment, used) {
            return true;
        }
        used.remove(&w);
        assignment.remove(&v);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(coords: [[f64; 2]; 3], filled: bool) -> EmbeddedComplex {
        let maximal: Vec<Vec<usize>> = if filled {
            vec![vec![0, 1, 2]]
        } else {
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        };
        EmbeddedComplex::from_parts(
            2,
            coords.iter().enumerate().map(|(i, p)| (i, p.to_vec())),
            &maximal,
        )
        .unwrap()
    }

    #[test]
    fn closure_of_one_triangle() {
        let k = build_complex(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(k.counts(), vec![3, 3, 1]);
        assert!(k.is_closed());
    }

    #[test]
    fn closure_of_singleton() {
        let k = build_complex(&[vec![0]]).unwrap();
        assert_eq!(k.counts(), vec![1]);
        assert_eq!(k.max_dim(), Some(0));
    }

    #[test]
    fn closure_of_strip() {
        let k = build_complex(&[vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        assert_eq!(k.counts(), vec![4, 5, 2]);
    }

    #[test]
    fn duplicate_vertex_rejected() {
        assert!(matches!(
            build_complex(&[vec![0, 1, 1]]),
            Err(Error::InvalidSimplex(_, "duplicate vertex"))
        ));
        assert!(build_complex(&[vec![]]).is_err());
    }

    #[test]
    fn simplex_lookup_by_global_index() {
        let k = build_complex(&[vec![0, 1, 2], vec![3]]).unwrap();
        for (id, s) in k.simplices().enumerate() {
            assert_eq!(k.simplex(id), s);
            assert_eq!(k.id_of(s), Some(id));
        }
    }

    #[test]
    fn hasse_of_filled_triangle() {
        let k = build_complex(&[vec![0, 1, 2]]).unwrap();
        let h = HasseAdjacency::new(&k);
        let tri = Simplex::new(vec![0, 1, 2]).unwrap();
        let b: Vec<_> = h.boundary(&k, &tri).into_iter().map(|s| s.vertices().to_vec()).collect();
        assert_eq!(b, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let cob: Vec<_> =
            h.coboundary(&k, &Simplex::vertex(0)).into_iter().map(|s| s.vertices().to_vec()).collect();
        assert_eq!(cob, vec![vec![0, 1], vec![0, 2]]);
        assert!(h.boundary(&k, &Simplex::vertex(0)).is_empty());
    }

    #[test]
    fn hasse_of_strip_shared_edge() {
        let k = build_complex(&[vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let h = HasseAdjacency::new(&k);
        let cob: Vec<_> = h
            .coboundary(&k, &Simplex::new(vec![1, 2]).unwrap())
            .into_iter()
            .map(|s| s.vertices().to_vec())
            .collect();
        assert_eq!(cob, vec![vec![0, 1, 2], vec![1, 2, 3]]);
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(euler_characteristic(&build_complex(&[vec![0, 1, 2]]).unwrap()), 1);
        let hollow_tet =
            build_complex(&[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]).unwrap();
        assert_eq!(euler_characteristic(&hollow_tet), 2);
        assert_eq!(euler_characteristic(&AbstractComplex::empty()), 0);
    }

    #[test]
    fn features_of_edge_and_triangle() {
        let e = EmbeddedComplex::from_parts(2, [(0, vec![0.0, 0.0]), (1, vec![2.0, 0.0])], &[vec![0, 1]])
            .unwrap();
        let f = derived_features(&Simplex::new(vec![0, 1]).unwrap(), e.embedding()).unwrap();
        assert_eq!(f, vec![1.0, 0.0, 2.0]);

        let t = triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], true);
        let f = derived_features(&Simplex::new(vec![0, 1, 2]).unwrap(), t.embedding()).unwrap();
        assert!((f[0] - 1.0 / 3.0).abs() < 1e-15 && (f[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f[2], 0.5);

        let flat = triangle([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], true);
        let f = derived_features(&Simplex::new(vec![0, 1, 2]).unwrap(), flat.embedding()).unwrap();
        assert_eq!(f[2], 0.0);
        assert!(flat.embedding().check_injective(DEFAULT_QUANTIZATION_DIGITS).is_ok());
    }

    #[test]
    fn features_reject_tetrahedra() {
        let k = EmbeddedComplex::from_parts(
            3,
            [
                (0, vec![0.0, 0.0, 0.0]),
                (1, vec![1.0, 0.0, 0.0]),
                (2, vec![0.0, 1.0, 0.0]),
                (3, vec![0.0, 0.0, 1.0]),
            ],
            &[vec![0, 1, 2, 3]],
        )
        .unwrap();
        let tet = Simplex::new(vec![0, 1, 2, 3]).unwrap();
        assert!(matches!(
            derived_features(&tet, k.embedding()),
            Err(Error::UnsupportedFeatureDimension(3))
        ));
    }

    #[test]
    fn area_matches_in_plane_and_space() {
        let a2 = triangle_area(&[0.0, 0.0], &[3.0, 0.0], &[0.0, 4.0]);
        let a3 = triangle_area(&[0.0, 0.0, 1.0], &[3.0, 0.0, 1.0], &[0.0, 4.0, 1.0]);
        let a4 = triangle_area(&[0.0, 0.0, 1.0, 0.0], &[3.0, 0.0, 1.0, 0.0], &[0.0, 4.0, 1.0, 0.0]);
        assert_eq!(a2, 6.0);
        assert_eq!(a3, 6.0);
        assert!((a4 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_must_cover_vertices() {
        let k = build_complex(&[vec![0, 1]]).unwrap();
        let emb = Embedding::new(1, BTreeMap::from([(0, vec![0.0])])).unwrap();
        assert!(EmbeddedComplex::new(k, emb).is_err());
    }

    #[test]
    fn non_injective_detected_after_quantization() {
        let emb =
            Embedding::new(1, BTreeMap::from([(0, vec![0.1 + 0.2]), (1, vec![0.3])])).unwrap();
        assert!(matches!(emb.check_injective(12), Err(Error::NonInjective(0, 1))));
        assert!(emb.check_injective(17).is_ok());
    }

    #[test]
    fn isomorphism_oracle() {
        let up = triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], true);
        let down = triangle([[0.0, 0.0], [1.0, 0.0], [0.0, -1.0]], true);
        let d = DEFAULT_QUANTIZATION_DIGITS;
        assert!(embedded_isomorphic(&up, &up, 12, d).unwrap());
        assert!(!embedded_isomorphic(&up, &down, 12, d).unwrap());
        let perm = BTreeMap::from([(0, 2), (1, 0), (2, 1)]);
        let relabeled = up.relabel(&perm).unwrap();
        assert!(embedded_isomorphic(&up, &relabeled, 12, d).unwrap());
        let hollow = triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], false);
        assert!(!embedded_isomorphic(&up, &hollow, 12, d).unwrap());
    }

    #[test]
    fn isomorphism_oracle_budget() {
        let up = triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], true);
        assert!(matches!(
            embedded_isomorphic(&up, &up, 2, 12),
            Err(Error::OracleBudgetExceeded { vertices: 3, budget: 2 })
        ));
    }

    #[test]
    fn maximal_simplices_of_mixed_complex() {
        let k = build_complex(&[vec![0, 1, 2], vec![2, 3], vec![4]]).unwrap();
        let maximal: Vec<Vec<usize>> =
            k.maximal_simplices().iter().map(|s| s.vertices().to_vec()).collect();
        assert_eq!(maximal, vec![vec![4], vec![2, 3], vec![0, 1, 2]]);
    }
}
