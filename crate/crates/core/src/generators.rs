//! Seeded mesh construction, deformations, small closed-surface
//! triangulations, spectral layouts and per-mesh geometric summaries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::complex::{
    build_complex, distance, euler_characteristic, sub, triangle_area, AbstractComplex, EmbeddedComplex, Embedding,
    Simplex, DEFAULT_QUANTIZATION_DIGITS,
};
use crate::error::{Error, Result};

/// `nx * ny` lattice points with every cell split along its `(i,j)-(i+1,j+1)` diagonal.
/// Vertex `(i, j)` has id `j * nx + i`.
pub fn grid_triangulation(nx: usize, ny: usize, spacing: f64) -> Result<EmbeddedComplex> {
    if nx < 2 || ny < 2 {
        return Err(Error::Unsupported(format!("grid needs nx, ny >= 2, got {nx}x{ny}")));
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut tris = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let coords = (0..ny).flat_map(|j| (0..nx).map(move |i| (id(i, j), vec![i as f64 * spacing, j as f64 * spacing])));
    EmbeddedComplex::from_parts(2, coords, &tris)
}

const DISK_RINGS: usize = 4;
const DISK_RING_SIZE: usize = 10;

/// Forty-vertex disk: four concentric rings of ten vertices with alternating
/// half-step offsets, adjacent rings zipped into annuli and the innermost ring
/// fanned from its first vertex. Counts are (40, 107, 68).
pub fn disk_fan() -> Result<EmbeddedComplex> {
    let n = DISK_RING_SIZE;
    let id = |r: usize, i: usize| r * n + i % n;
    let step = 2.0 * PI / n as f64;
    let mut coords = Vec::with_capacity(DISK_RINGS * n);
    for r in 0..DISK_RINGS {
        let radius = 1.0 - 0.25 * r as f64;
        let offset = if r % 2 == 1 { step / 2.0 } else { 0.0 };
        for i in 0..n {
            let a = offset + step * i as f64;
            coords.push((id(r, i), vec![radius * a.cos(), radius * a.sin()]));
        }
    }
    let mut tris = Vec::new();
    for r in 0..DISK_RINGS - 1 {
        for i in 0..n {
            if r % 2 == 0 {
                // inner vertex i sits between outer i and i+1
                tris.push(vec![id(r, i), id(r, i + 1), id(r + 1, i)]);
                tris.push(vec![id(r + 1, i), id(r, i + 1), id(r + 1, i + 1)]);
            } else {
                // outer vertex i sits between inner i and i+1
                tris.push(vec![id(r, i), id(r + 1, i + 1), id(r + 1, i)]);
                tris.push(vec![id(r, i), id(r, i + 1), id(r + 1, i + 1)]);
            }
        }
    }
    let inner = DISK_RINGS - 1;
    for i in 1..n - 1 {
        tris.push(vec![id(inner, 0), id(inner, i), id(inner, i + 1)]);
    }
    EmbeddedComplex::from_parts(2, coords, &tris)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MeshKind {
    Grid { nx: usize, ny: usize, #[serde(default = "unit")] spacing: f64 },
    DiskFan,
    Library { name: String },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    #[serde(flatten)]
    pub kind: MeshKind,
    #[serde(default)]
    pub seed: u64,
}

impl MeshSpec {
    /// Accepts `grid-40`, `disk_fan`, `grid-NXxNY`, or a library name.
    pub fn parse(name: &str, seed: u64) -> Result<Self> {
        let kind = match name {
            "grid-40" | "disk_fan" => MeshKind::DiskFan,
            _ if name.starts_with("grid-") => {
                let dims = &name["grid-".len()..];
                let (a, b) = dims.split_once('x').ok_or_else(|| Error::UnknownName(name.into()))?;
                let nx = a.parse().map_err(|_| Error::UnknownName(name.into()))?;
                let ny = b.parse().map_err(|_| Error::UnknownName(name.into()))?;
                MeshKind::Grid { nx, ny, spacing: 1.0 }
            }
            _ if LIBRARY_NAMES.contains(&name) => MeshKind::Library { name: name.into() },
            _ => return Err(Error::UnknownName(name.into())),
        };
        Ok(Self { kind, seed })
    }

    pub fn build(&self) -> Result<EmbeddedComplex> {
        match &self.kind {
            MeshKind::Grid { nx, ny, spacing } => grid_triangulation(*nx, *ny, *spacing),
            MeshKind::DiskFan => disk_fan(),
            MeshKind::Library { name } => {
                let lib = library_triangulation(name)?;
                let spectral = spectral_embedding(&lib.complex, self.seed)?;
                EmbeddedComplex::new(lib.complex, spectral.embedding)
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeformationFamily {
    Bend,
    Twist,
    Stretch,
    RandomSmooth,
}

impl DeformationFamily {
    pub const ALL: [DeformationFamily; 4] =
        [DeformationFamily::Bend, DeformationFamily::Twist, DeformationFamily::Stretch, DeformationFamily::RandomSmooth];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "bend" => Ok(Self::Bend),
            "twist" => Ok(Self::Twist),
            "stretch" => Ok(Self::Stretch),
            "random_smooth" | "random-smooth" => Ok(Self::RandomSmooth),
            _ => Err(Error::UnknownName(name.into())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bend => "bend",
            Self::Twist => "twist",
            Self::Stretch => "stretch",
            Self::RandomSmooth => "random_smooth",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationSpec {
    pub family: DeformationFamily,
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

const BUMPS: usize = 3;

fn centroid(emb: &Embedding) -> Vec<f64> {
    let mut c = vec![0.0; emb.ambient_dim()];
    for (_, p) in emb.iter() {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    let n = emb.len().max(1) as f64;
    c.iter().map(|v| v / n).collect()
}

fn bounding_box(emb: &Embedding) -> (Vec<f64>, Vec<f64>) {
    let d = emb.ambient_dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for (_, p) in emb.iter() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Applies one smooth deformation to the coordinates and re-validates injectivity.
///
/// * bend: `y += a x^2`
/// * twist: rotate `(x, y)` about the centroid by `a (y - ybar)`
/// * stretch: `x *= 1 + a`
/// * random_smooth: three Gaussian bumps with seeded centers, unit directions
///   and width one quarter of the bounding-box diagonal, each scaled by `a`
pub fn apply_deformation(k: &EmbeddedComplex, spec: &DeformationSpec) -> Result<EmbeddedComplex> {
    let d = k.ambient_dim();
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let a = spec.amplitude;
    if !a.is_finite() {
        return Err(Error::Deformation(format!("amplitude {a} is not finite")));
    }
    let emb = k.embedding();
    let moved = match spec.family {
        DeformationFamily::Bend => emb.map_points(|_, p| {
            let mut q = p.to_vec();
            q[1] += a * p[0] * p[0];
            q
        })?,
        DeformationFamily::Twist => {
            let c = centroid(emb);
            emb.map_points(|_, p| {
                let theta = a * (p[1] - c[1]);
                let (s, co) = theta.sin_cos();
                let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                let mut q = p.to_vec();
                q[0] = c[0] + co * dx - s * dy;
                q[1] = c[1] + s * dx + co * dy;
                q
            })?
        }
        DeformationFamily::Stretch => emb.map_points(|_, p| {
            let mut q = p.to_vec();
            q[0] *= 1.0 + a;
            q
        })?,
        DeformationFamily::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let (lo, hi) = bounding_box(emb);
            let width = (distance(&lo, &hi) / 4.0).max(f64::MIN_POSITIVE);
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            let bumps: Vec<(Vec<f64>, Vec<f64>)> = (0..BUMPS)
                .map(|_| {
                    let center: Vec<f64> =
                        (0..d).map(|k| if hi[k] > lo[k] { rng.random_range(lo[k]..=hi[k]) } else { lo[k] }).collect();
                    let mut dir: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                    dir.iter_mut().for_each(|v| *v /= norm);
                    (center, dir)
                })
                .collect();
            emb.map_points(|_, p| {
                let mut q = p.to_vec();
                for (center, dir) in &bumps {
                    let r = distance(p, center) / width;
                    let g = a * (-0.5 * r * r).exp();
                    for k in 0..d {
                        q[k] += g * dir[k];
                    }
                }
                q
            })?
        }
    };
    if let Err(Error::NonInjective(u, v)) = moved.check_injective(DEFAULT_QUANTIZATION_DIGITS) {
        return Err(Error::Deformation(format!(
            "{} with amplitude {a} merges vertices {u} and {v}; try amplitude {}",
            spec.family.name(),
            a / 2.0
        )));
    }
    k.with_embedding(moved)
}

pub const LIBRARY_NAMES: [&str; 4] = ["sphere_S2", "torus_T2", "klein_bottle", "rp2"];

#[derive(Clone, Debug, PartialEq)]
pub struct LibraryTriangulation {
    pub name: String,
    pub complex: AbstractComplex,
    pub euler_characteristic: i64,
    pub orientable: bool,
}

fn klein_bottle_triangles() -> Vec<Vec<usize>> {
    // 3x3 grid, left-right glued straight, top-bottom glued with a flip
    let vid = |i: usize, j: usize| {
        if j == 3 {
            (3 - i % 3) % 3
        } else {
            i % 3 + 3 * j
        }
    };
    let mut tris = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            tris.push(vec![a, b, d]);
            tris.push(vec![a, d, c]);
        }
    }
    tris
}

/// Small closed-surface triangulations, verified on construction.
pub fn library_triangulation(name: &str) -> Result<LibraryTriangulation> {
    let (tris, chi, orientable): (Vec<Vec<usize>>, i64, bool) = match name {
        "sphere_S2" => (vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]], 2, true),
        "torus_T2" => {
            let mut t = Vec::new();
            for i in 0..7 {
                t.push(vec![i, (i + 1) % 7, (i + 3) % 7]);
                t.push(vec![i, (i + 2) % 7, (i + 3) % 7]);
            }
            (t, 0, true)
        }
        "klein_bottle" => (klein_bottle_triangles(), 0, false),
        "rp2" => (
            vec![
                vec![0, 1, 2],
                vec![0, 2, 3],
                vec![0, 3, 4],
                vec![0, 4, 5],
                vec![0, 5, 1],
                vec![1, 2, 4],
                vec![2, 3, 5],
                vec![3, 4, 1],
                vec![4, 5, 2],
                vec![5, 1, 3],
            ],
            1,
            false,
        ),
        _ => return Err(Error::UnknownName(name.into())),
    };
    let complex = build_complex(&tris)?;
    let report = validate_closed_surface(&complex);
    if !report.is_closed_surface() || report.euler_characteristic != chi || report.orientable != Some(orientable) {
        return Err(Error::Internal(format!("library entry {name} failed validation: {report:?}")));
    }
    Ok(LibraryTriangulation { name: name.into(), complex, euler_characteristic: chi, orientable })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceReport {
    pub counts: Vec<usize>,
    pub euler_characteristic: i64,
    pub pure_2d: bool,
    pub edges_with_two_cofaces: bool,
    pub connected: bool,
    pub vertex_links_are_cycles: bool,
    /// `None` when the surface check already failed.
    pub orientable: Option<bool>,
}

impl SurfaceReport {
    pub fn is_closed_surface(&self) -> bool {
        self.pure_2d && self.edges_with_two_cofaces && self.connected && self.vertex_links_are_cycles
    }
}

fn connected_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut count = n;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

fn is_connected(complex: &AbstractComplex) -> bool {
    let index: HashMap<usize, usize> = complex.vertices().enumerate().map(|(i, v)| (v, i)).collect();
    let edges = complex.simplices_of_dim(1).iter().map(|e| (index[&e.vertices()[0]], index[&e.vertices()[1]]));
    index.len() <= 1 || connected_components(index.len(), edges) == 1
}

/// Orientability by propagating triangle orientations across shared edges.
fn orientable(triangles: &[Simplex]) -> bool {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, s) in triangles.iter().enumerate() {
        let v = s.vertices();
        for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[0], v[2])] {
            by_edge.entry((a, b)).or_default().push(t);
        }
    }
    // orientation sign: +1 keeps sorted order (v0, v1, v2)
    let induced = |s: &Simplex, sign: i8, a: usize, b: usize| -> i8 {
        let v = s.vertices();
        let along = (v[0] == a && v[1] == b) || (v[1] == a && v[2] == b) || (v[2] == a && v[0] == b);
        if along {
            sign
        } else {
            -sign
        }
    };
    let mut sign: Vec<i8> = vec![0; triangles.len()];
    for start in 0..triangles.len() {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            let v = triangles[t].vertices();
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[0], v[2])] {
                let mine = induced(&triangles[t], sign[t], a, b);
                for &u in &by_edge[&(a, b)] {
                    if u == t {
                        continue;
                    }
                    // neighbor must induce the opposite direction on the shared edge
                    let want = if induced(&triangles[u], 1, a, b) == -mine { 1 } else { -1 };
                    if sign[u] == 0 {
                        sign[u] = want;
                        stack.push(u);
                    } else if sign[u] != want {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn validate_closed_surface(complex: &AbstractComplex) -> SurfaceReport {
    let counts = complex.counts();
    let pure_2d = complex.max_dim() == Some(2) && complex.maximal_simplices().iter().all(|s| s.dim() == 2);
    let triangles = complex.simplices_of_dim(2);
    let mut edge_degree: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut link_edges: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for t in triangles {
        let v = t.vertices();
        for (a, b, c) in [(v[0], v[1], v[2]), (v[0], v[2], v[1]), (v[1], v[2], v[0])] {
            *edge_degree.entry((a, b)).or_insert(0) += 1;
            link_edges.entry(c).or_default().push((a, b));
        }
    }
    let edges_with_two_cofaces = complex
        .simplices_of_dim(1)
        .iter()
        .all(|e| edge_degree.get(&(e.vertices()[0], e.vertices()[1])) == Some(&2));
    let vertex_links_are_cycles = complex.vertices().all(|v| {
        let edges = link_edges.get(&v).map(Vec::as_slice).unwrap_or(&[]);
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for &(a, b) in edges {
            *deg.entry(a).or_insert(0) += 1;
            *deg.entry(b).or_insert(0) += 1;
        }
        let nodes: Vec<usize> = deg.keys().copied().collect();
        let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        !edges.is_empty()
            && deg.values().all(|&d| d == 2)
            && connected_components(nodes.len(), edges.iter().map(|&(a, b)| (index[&a], index[&b]))) == 1
    });
    let connected = is_connected(complex);
    let closed = pure_2d && edges_with_two_cofaces && connected && vertex_links_are_cycles;
    SurfaceReport {
        counts,
        euler_characteristic: euler_characteristic(complex),
        pure_2d,
        edges_with_two_cofaces,
        connected,
        vertex_links_are_cycles,
        orientable: closed.then(|| orientable(triangles)),
    }
}

const JACOBI_TOLERANCE: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;
const DEGENERACY_TOLERANCE: f64 = 1e-8;
const SPECTRAL_JITTER: f64 = 1e-6;
const MAX_SPECTRAL_VERTICES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i][j] * a[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> Result<Eigen> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut sweeps = 0;
    while off_diagonal_norm(&a) >= JACOBI_TOLERANCE {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::JacobiNoConvergence(sweeps));
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| {
            let mut vec: Vec<f64> = (0..n).map(|k| v[k][i]).collect();
            fix_sign(&mut vec);
            (a[i][i], vec)
        })
        .collect();
    sort_eigenpairs(&mut pairs);
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(Eigen { values, vectors, sweeps })
}

/// Largest-magnitude entry positive (first such entry on ties).
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Ascending eigenvalue; within a degenerate cluster, lexicographic eigenvector order.
fn sort_eigenpairs(pairs: &mut [(f64, Vec<f64>)]) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 < DEGENERACY_TOLERANCE {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| {
            a.1.iter().zip(&b.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        start = end;
    }
}

/// `L = D - A` of the 1-skeleton, rows and columns in vertex order.
pub fn graph_laplacian(complex: &AbstractComplex) -> (Vec<usize>, Vec<Vec<f64>>) {
    let verts: Vec<usize> = complex.vertices().collect();
    let index: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = verts.len();
    let mut l = vec![vec![0.0; n]; n];
    for e in complex.simplices_of_dim(1) {
        let (i, j) = (index[&e.vertices()[0]], index[&e.vertices()[1]]);
        l[i][j] -= 1.0;
        l[j][i] -= 1.0;
        l[i][i] += 1.0;
        l[j][j] += 1.0;
    }
    (verts, l)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEmbedding {
    pub embedding: Embedding,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues 2 or 3 share a cluster with a neighbor.
    pub degenerate: bool,
    pub jittered: bool,
    pub max_residual: f64,
    pub sweeps: usize,
}

impl SpectralEmbedding {
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "embedding": "spectral",
            "eigenvalues": self.eigenvalues,
            "degenerate": self.degenerate,
            "jittered": self.jittered,
            "max_residual": self.max_residual,
            "jacobi_sweeps": self.sweeps,
        })
    }
}

fn residual(l: &[Vec<f64>], lambda: f64, u: &[f64]) -> f64 {
    l.iter()
        .zip(u)
        .map(|(row, ui)| {
            let lu: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            (lu - lambda * ui).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Planar layout from the second and third Laplacian eigenvectors.
pub fn spectral_embedding(complex: &AbstractComplex, seed: u64) -> Result<SpectralEmbedding> {
    let n = complex.vertices().count();
    if n > MAX_SPECTRAL_VERTICES {
        return Err(Error::Unsupported(format!("spectral layout limited to {MAX_SPECTRAL_VERTICES} vertices, got {n}")));
    }
    if n < 3 {
        return Err(Error::Unsupported(format!("spectral layout needs at least 3 vertices, got {n}")));
    }
    if !is_connected(complex) {
        return Err(Error::Disconnected);
    }
    let (verts, l) = graph_laplacian(complex);
    let eig = jacobi_eigen(&l)?;
    let max_residual =
        eig.values.iter().zip(&eig.vectors).map(|(&lam, u)| residual(&l, lam, u)).fold(0.0, f64::max);
    let near = |i: usize, j: usize| (eig.values[i] - eig.values[j]).abs() < DEGENERACY_TOLERANCE;
    let degenerate = near(1, 2) || near(0, 1) || (n > 3 && near(2, 3));
    let mut coords: BTreeMap<usize, Vec<f64>> =
        verts.iter().enumerate().map(|(i, &v)| (v, vec![eig.vectors[1][i], eig.vectors[2][i]])).collect();
    let mut jittered = false;
    if Embedding::new(2, coords.clone())?.check_injective(DEFAULT_QUANTIZATION_DIGITS).is_err() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in coords.values_mut() {
            for x in p.iter_mut() {
                *x += rng.random_range(-SPECTRAL_JITTER..=SPECTRAL_JITTER);
            }
        }
        jittered = true;
    }
    let embedding = Embedding::new(2, coords)?;
    embedding.check_injective(DEFAULT_QUANTIZATION_DIGITS)?;
    Ok(SpectralEmbedding { embedding, eigenvalues: eig.values, degenerate, jittered, max_residual, sweeps: eig.sweeps })
}

const MAX_RESAMPLES: usize = 10;

/// Adds isotropic Gaussian noise of standard deviation `delta` to every vertex.
pub fn perturb_embedding(k: &EmbeddedComplex, delta: f64, seed: u64) -> Result<EmbeddedComplex> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Deformation(format!("perturbation scale {delta} must be finite and >= 0")));
    }
    if delta == 0.0 {
        return Ok(k.clone());
    }
    let normal = Normal::new(0.0, delta).map_err(|e| Error::Deformation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let moved = k.embedding().map_points(|_, p| p.iter().map(|x| x + normal.sample(&mut rng)).collect())?;
        if moved.check_injective(DEFAULT_QUANTIZATION_DIGITS).is_ok() {
            return k.with_embedding(moved);
        }
    }
    Err(Error::Deformation(format!("no injective perturbation at scale {delta} after {MAX_RESAMPLES} draws")))
}

/// Layout of [`geometric_summary`].
pub const SUMMARY_FIELDS: [&str; 30] = [
    "disp_mean",
    "disp_std",
    "disp_max",
    "disp_p50",
    "disp_p90",
    "edge_mean",
    "edge_std",
    "edge_min",
    "edge_max",
    "edge_p10",
    "edge_p25",
    "edge_p50",
    "edge_p75",
    "edge_p90",
    "area_mean",
    "area_std",
    "area_min",
    "area_max",
    "area_total",
    "defect_mean",
    "defect_std",
    "defect_min",
    "defect_max",
    "defect_sum",
    "interior_defect_mean",
    "interior_defect_std",
    "interior_defect_min",
    "interior_defect_max",
    "interior_defect_sum",
    "edge_total",
];

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn angle_at(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (u, v) = (sub(a, p), sub(b, p));
    let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu * nv)).clamp(-1.0, 1.0).acos()
}

/// `2 pi - sum of incident triangle angles` per vertex, plus whether the vertex
/// is interior (every incident edge has two triangles).
pub fn angle_defects(k: &EmbeddedComplex) -> BTreeMap<usize, (f64, bool)> {
    let emb = k.embedding();
    let mut angle: BTreeMap<usize, f64> = k.complex().vertices().map(|v| (v, 0.0)).collect();
    let mut edge_degree: HashMap<(usize, usize), usize> = HashMap::new();
    for t in k.complex().simplices_of_dim(2) {
        let v = t.vertices();
        for (x, y, z) in [(v[0], v[1], v[2]), (v[1], v[2], v[0]), (v[2], v[0], v[1])] {
            *angle.get_mut(&x).unwrap() += angle_at(emb.point(x), emb.point(y), emb.point(z));
        }
        for (a, b) in [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])] {
            *edge_degree.entry((a, b)).or_insert(0) += 1;
        }
    }
    let mut interior: BTreeMap<usize, bool> = k.complex().vertices().map(|v| (v, true)).collect();
    for e in k.complex().simplices_of_dim(1) {
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        if edge_degree.get(&(a, b)).copied().unwrap_or(0) != 2 {
            interior.insert(a, false);
            interior.insert(b, false);
        }
    }
    angle.into_iter().map(|(v, s)| (v, (2.0 * PI - s, interior[&v]))).collect()
}

/// Fixed 30-entry summary of a mesh relative to a base embedding; see [`SUMMARY_FIELDS`].
pub fn geometric_summary(k: &EmbeddedComplex, base: &Embedding) -> Result<Vec<f64>> {
    let emb = k.embedding();
    if !emb.vertex_ids().eq(base.vertex_ids()) || emb.ambient_dim() != base.ambient_dim() {
        return Err(Error::ComplexMismatch("base embedding has different vertices".into()));
    }
    let mut disp: Vec<f64> = emb.iter().map(|(v, p)| distance(p, base.point(v))).collect();
    disp.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = k
        .complex()
        .simplices_of_dim(1)
        .iter()
        .map(|e| distance(emb.point(e.vertices()[0]), emb.point(e.vertices()[1])))
        .collect();
    edges.sort_by(f64::total_cmp);
    let areas: Vec<f64> = k
        .complex()
        .simplices_of_dim(2)
        .iter()
        .map(|t| {
            let v = t.vertices();
            triangle_area(emb.point(v[0]), emb.point(v[1]), emb.point(v[2]))
        })
        .collect();
    let defects = angle_defects(k);
    let all: Vec<f64> = defects.values().map(|d| d.0).collect();
    let interior: Vec<f64> = defects.values().filter(|d| d.1).map(|d| d.0).collect();

    let mut out = Vec::with_capacity(30);
    let (m, s) = mean_std(&disp);
    out.extend([m, s, min_max(&disp).1, percentile(&disp, 50.0), percentile(&disp, 90.0)]);
    let (m, s) = mean_std(&edges);
    let (lo, hi) = min_max(&edges);
    out.extend([m, s, lo, hi]);
    out.extend([10.0, 25.0, 50.0, 75.0, 90.0].map(|q| percentile(&edges, q)));
    let (m, s) = mean_std(&areas);
    let (lo, hi) = min_max(&areas);
    out.extend([m, s, lo, hi, areas.iter().sum()]);
    for d in [&all, &interior] {
        let (m, s) = mean_std(d);
        let (lo, hi) = min_max(d);
        out.extend([m, s, lo, hi, d.iter().sum()]);
    }
    out.push(edges.iter().sum());
    debug_assert_eq!(out.len(), SUMMARY_FIELDS.len());
    Ok(out)
}

/// Distinct-coordinate deformation family of one base mesh: every family at
/// each amplitude, with seeds `0..seeds` for the random family.
pub fn deformation_family(
    base: &EmbeddedComplex,
    amplitudes: &[f64],
    seeds: u64,
) -> Result<Vec<(String, EmbeddedComplex)>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for &a in amplitudes {
        for fam in DeformationFamily::ALL {
            let n = if fam == DeformationFamily::RandomSmooth { seeds } else { 1 };
            for seed in 0..n {
                let k = apply_deformation(base, &DeformationSpec { family: fam, amplitude: a, seed })?;
                let key: Vec<Vec<i64>> = k
                    .embedding()
                    .iter()
                    .map(|(_, p)| crate::complex::quantize_point(p, DEFAULT_QUANTIZATION_DIGITS))
                    .collect();
                if seen.insert(key) {
                    out.push((format!("{}-a{a}-s{seed}", fam.name()), k));
                }
            }
        }
    }
    Ok(out)
}
