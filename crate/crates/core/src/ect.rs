//! Euler characteristic curves and transforms of embedded complexes.
//!
//! Curves are exact right-continuous step functions: the value at a threshold
//! equal to an entry time already includes the simplices entering there.

use std::f64::consts::PI;

use serde::Serialize;

use crate::complex::{dot, quantize_point, AbstractComplex, EmbeddedComplex, Embedding, Simplex};
use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-9;

/// A unit vector in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Direction {
    vector: Vec<f64>,
}

impl Direction {
    /// Normalizes `vector`; fails on zero or non-finite input.
    pub fn new(vector: Vec<f64>) -> Result<Self> {
        let norm = dot(&vector, &vector).sqrt();
        if vector.is_empty() || !norm.is_finite() || norm < UNIT_TOLERANCE {
            return Err(Error::InvalidDirection(format!("{vector:?} cannot be normalized")));
        }
        let vector: Vec<f64> = vector.into_iter().map(|v| v / norm).collect();
        debug_assert!((dot(&vector, &vector).sqrt() - 1.0).abs() < UNIT_TOLERANCE);
        Ok(Self { vector })
    }

    /// Unit vector at `angle` radians in the plane.
    pub fn from_angle(angle: f64) -> Self {
        Self { vector: vec![angle.cos(), angle.sin()] }
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

/// Entry time of a simplex: the largest height of its vertices along `direction`.
pub fn entry_time(simplex: &Simplex, direction: &Direction, embedding: &Embedding) -> f64 {
    simplex
        .vertices()
        .iter()
        .map(|&v| dot(embedding.point(v), &direction.vector))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn entry_times(complex: &AbstractComplex, embedding: &Embedding, direction: &Direction) -> Vec<f64> {
    // vertex heights first, then max over each simplex
    let heights: std::collections::HashMap<usize, f64> = embedding
        .iter()
        .map(|(v, p)| (v, dot(p, &direction.vector)))
        .collect();
    complex
        .simplices()
        .map(|s| s.vertices().iter().map(|v| heights[v]).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

fn check_direction(k: &EmbeddedComplex, direction: &Direction) -> Result<()> {
    if direction.dim() != k.ambient_dim() {
        return Err(Error::InvalidDirection(format!(
            "direction has dimension {}, complex is embedded in R^{}",
            direction.dim(),
            k.ambient_dim()
        )));
    }
    Ok(())
}

/// All simplices with entry time at most `t`.
pub fn sublevel_complex(k: &EmbeddedComplex, direction: &Direction, t: f64) -> Result<AbstractComplex> {
    check_direction(k, direction)?;
    let times = entry_times(k.complex(), k.embedding(), direction);
    Ok(k.complex().filter(|id, _| times[id] <= t))
}

/// Right-continuous integer step function starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EccCurve {
    breakpoints: Vec<(f64, i64)>,
}

impl EccCurve {
    /// Accumulate signed counts of simplices sorted by entry time, merging ties
    /// and dropping breakpoints with zero net change.
    pub fn from_entry_times(mut events: Vec<(f64, usize)>) -> Self {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints: Vec<(f64, i64)> = Vec::new();
        let mut chi = 0i64;
        let mut i = 0;
        while i < events.len() {
            let t = events[i].0;
            let before = chi;
            while i < events.len() && events[i].0 == t {
                chi += if events[i].1.is_multiple_of(2) { 1 } else { -1 };
                i += 1;
            }
            if chi != before {
                breakpoints.push((t, chi));
            }
        }
        Self { breakpoints }
    }

    pub fn breakpoints(&self) -> &[(f64, i64)] {
        &self.breakpoints
    }

    /// Value at `t`, counting simplices with entry time `<= t`.
    pub fn eval(&self, t: f64) -> i64 {
        let n = self.breakpoints.partition_point(|&(b, _)| b <= t);
        if n == 0 { 0 } else { self.breakpoints[n - 1].1 }
    }

    /// Value after the last breakpoint.
    pub fn final_value(&self) -> i64 {
        self.breakpoints.last().map(|b| b.1).unwrap_or(0)
    }

    /// Exact L1 distance. Infinite when the final values differ.
    pub fn l1_distance(&self, other: &EccCurve) -> f64 {
        if self.final_value() != other.final_value() {
            return f64::INFINITY;
        }
        let mut ts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .map(|b| b.0)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.windows(2)
            .map(|w| (self.eval(w[0]) - other.eval(w[0])).abs() as f64 * (w[1] - w[0]))
            .sum()
    }
}

pub fn ecc_curve(k: &EmbeddedComplex, direction: &Direction) -> Result<EccCurve> {
    check_direction(k, direction)?;
    Ok(curve_for(k.complex(), k.embedding(), direction))
}

fn curve_for(complex: &AbstractComplex, embedding: &Embedding, direction: &Direction) -> EccCurve {
    let times = entry_times(complex, embedding, direction);
    EccCurve::from_entry_times(times.into_iter().zip(complex.simplices().map(Simplex::dim)).collect())
}

/// `values[i][j]` is the Euler characteristic of the sublevel complex at
/// `(directions[i], thresholds[j])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledEct {
    pub directions: Vec<Direction>,
    pub thresholds: Vec<f64>,
    pub values: Vec<Vec<i64>>,
}

impl SampledEct {
    /// Row-major flattening: direction index outer, threshold index inner.
    pub fn flatten(&self) -> Vec<i64> {
        self.values.iter().flatten().copied().collect()
    }
}

pub fn sampled_ect(k: &EmbeddedComplex, directions: &[Direction], thresholds: &[f64]) -> Result<SampledEct> {
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut values = Vec::with_capacity(directions.len());
    for d in directions {
        let curve = ecc_curve(k, d)?;
        values.push(sorted.iter().map(|&t| curve.eval(t)).collect());
    }
    Ok(SampledEct { directions: directions.to_vec(), thresholds: sorted, values })
}

/// Evenly spaced thresholds spanning `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Smallest and largest entry time over a family and a set of directions.
pub fn entry_time_range(family: &[EmbeddedComplex], directions: &[Direction]) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in family {
        for d in directions {
            for (_, p) in k.embedding().iter() {
                let h = dot(p, d.vector());
                lo = lo.min(h);
                hi = hi.max(h);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureNode {
    pub direction: Direction,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub scheme: String,
    pub nodes: Vec<QuadratureNode>,
}

impl Quadrature {
    pub fn directions(&self) -> Vec<Direction> {
        self.nodes.iter().map(|n| n.direction.clone()).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

/// Equal-weight direction sets on `S^{d-1}`: both signs on the line, `n`
/// uniform angles on the circle, an `n`-point Fibonacci lattice on the sphere.
pub fn sphere_quadrature(d: usize, n: usize) -> Result<Quadrature> {
    if n == 0 {
        return Err(Error::EmptyQuadrature);
    }
    let (scheme, nodes) = match d {
        1 => (
            "line(+1,-1)".to_string(),
            [1.0, -1.0]
                .into_iter()
                .map(|s| QuadratureNode { direction: Direction { vector: vec![s] }, weight: 0.5 })
                .collect(),
        ),
        2 => (
            format!("circle-uniform(n={n})"),
            (0..n)
                .map(|i| QuadratureNode {
                    direction: Direction::from_angle(2.0 * PI * i as f64 / n as f64),
                    weight: 2.0 * PI / n as f64,
                })
                .collect(),
        ),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let nodes = (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    QuadratureNode {
                        direction: Direction::new(vec![r * phi.cos(), r * phi.sin(), z])
                            .expect("lattice points are unit vectors"),
                        weight: 4.0 * PI / n as f64,
                    }
                })
                .collect();
            (format!("sphere-fibonacci(n={n})"), nodes)
        }
        other => return Err(Error::UnsupportedDimension(other)),
    };
    Ok(Quadrature { scheme, nodes })
}

/// Default direction count: 64 on the circle, 256 on the sphere.
pub fn default_quadrature(d: usize) -> Result<Quadrature> {
    sphere_quadrature(d, if d == 3 { 256 } else { 64 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EctDistance {
    pub total: f64,
    pub per_direction: Vec<(Direction, f64)>,
    pub quadrature: String,
}

fn check_covers(complex: &AbstractComplex, x: &Embedding) -> Result<()> {
    if !complex.vertices().eq(x.vertex_ids()) {
        return Err(Error::ComplexMismatch("embedding does not cover the complex's vertices".into()));
    }
    Ok(())
}

/// Quadrature-weighted sum over directions of the exact L1 distance between
/// the Euler characteristic curves of two embeddings of one complex.
pub fn ect_distance(
    complex: &AbstractComplex,
    x: &Embedding,
    y: &Embedding,
    quadrature: &Quadrature,
) -> Result<EctDistance> {
    if quadrature.nodes.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    check_covers(complex, x)?;
    check_covers(complex, y)?;
    if x.ambient_dim() != y.ambient_dim() {
        return Err(Error::ComplexMismatch("embeddings live in different dimensions".into()));
    }
    let mut per_direction = Vec::with_capacity(quadrature.nodes.len());
    let mut total = 0.0;
    for node in &quadrature.nodes {
        if node.direction.dim() != x.ambient_dim() {
            return Err(Error::InvalidDirection("quadrature dimension differs from embedding".into()));
        }
        let a = curve_for(complex, x, &node.direction);
        let b = curve_for(complex, y, &node.direction);
        let l1 = a.l1_distance(&b);
        total += node.weight * l1;
        per_direction.push((node.direction.clone(), l1));
    }
    Ok(EctDistance { total, per_direction, quadrature: quadrature.scheme.clone() })
}

/// [`ect_distance`] between two embedded complexes, which must share the
/// same abstract complex.
pub fn ect_distance_between(a: &EmbeddedComplex, b: &EmbeddedComplex, quadrature: &Quadrature) -> Result<EctDistance> {
    if a.complex() != b.complex() {
        return Err(Error::ComplexMismatch("ECT distance is only defined for one abstract complex".into()));
    }
    ect_distance(a.complex(), a.embedding(), b.embedding(), quadrature)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionKind {
    IdenticalEmbeddings,
    GridTooCoarseOrCounterexample,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Collision {
    pub first: usize,
    pub second: usize,
    pub kind: CollisionKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub directions: usize,
    pub thresholds: usize,
    pub pairs: usize,
    pub distinct_pairs: usize,
    pub collisions: Vec<Collision>,
}

impl InjectivityReport {
    pub fn all_distinct(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Thresholds at every entry time of the family plus the midpoints between them.
pub fn auto_thresholds(family: &[EmbeddedComplex], directions: &[Direction]) -> Vec<f64> {
    let mut ts: Vec<f64> = Vec::new();
    for k in family {
        for d in directions {
            ts.extend(k.embedding().iter().map(|(_, p)| dot(p, d.vector())));
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mids: Vec<f64> = ts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    ts.extend(mids);
    ts.sort_by(f64::total_cmp);
    ts
}

/// Compares sampled transforms pairwise across embeddings of one complex.
/// Pass `None` for `thresholds` to use [`auto_thresholds`].
pub fn injectivity_check(
    family: &[EmbeddedComplex],
    directions: &[Direction],
    thresholds: Option<&[f64]>,
    digits: u32,
) -> Result<InjectivityReport> {
    if let Some(first) = family.first() {
        if family.iter().any(|k| k.complex() != first.complex()) {
            return Err(Error::ComplexMismatch("injectivity check needs one shared complex".into()));
        }
    }
    let owned;
    let thresholds = match thresholds {
        Some(t) => t,
        None => {
            owned = auto_thresholds(family, directions);
            &owned
        }
    };
    let samples: Vec<Vec<i64>> = family
        .iter()
        .map(|k| sampled_ect(k, directions, thresholds).map(|s| s.flatten()))
        .collect::<Result<_>>()?;
    let mut report = InjectivityReport {
        directions: directions.len(),
        thresholds: thresholds.len(),
        pairs: 0,
        distinct_pairs: 0,
        collisions: Vec::new(),
    };
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            report.pairs += 1;
            if samples[i] != samples[j] {
                report.distinct_pairs += 1;
            } else {
                let same = family[i].embedding().quantized_eq(family[j].embedding(), digits);
                report.collisions.push(Collision {
                    first: i,
                    second: j,
                    kind: if same {
                        CollisionKind::IdenticalEmbeddings
                    } else {
                        CollisionKind::GridTooCoarseOrCounterexample
                    },
                });
            }
        }
    }
    Ok(report)
}

/// Entry time of an arbitrary point set.
pub(crate) fn entry_time_of_points<'a>(points: impl Iterator<Item = &'a [f64]>, direction: &Direction) -> f64 {
    points.map(|p| dot(p, direction.vector())).fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn quantized_vertex_set(k: &EmbeddedComplex, s: &Simplex, digits: u32) -> Vec<Vec<i64>> {
    let mut set: Vec<Vec<i64>> = k.vertex_points(s).into_iter().map(|p| quantize_point(p, digits)).collect();
    set.sort();
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::euler_characteristic;

    fn filled_triangle() -> EmbeddedComplex {
        EmbeddedComplex::from_parts(
            2,
            [(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0]), (2, vec![0.0, 1.0])],
            &[vec![0, 1, 2]],
        )
        .unwrap()
    }

    fn e_x() -> Direction {
        Direction::new(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn direction_normalizes() {
        let d = Direction::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(d.vector(), &[0.6, 0.8]);
        assert!(Direction::new(vec![0.0, 0.0]).is_err());
        assert!(Direction::new(vec![]).is_err());
    }

    #[test]
    fn entry_times() {
        let k = EmbeddedComplex::from_parts(2, [(0, vec![3.0, 4.0])], &[vec![0]]).unwrap();
        assert_eq!(entry_time(&Simplex::vertex(0), &e_x(), k.embedding()), 3.0);
        let t = filled_triangle();
        assert_eq!(entry_time(&Simplex::new(vec![0, 1]).unwrap(), &e_x(), t.embedding()), 1.0);
        let diag = Direction::new(vec![1.0, 1.0]).unwrap();
        let et = entry_time(&Simplex::new(vec![0, 1, 2]).unwrap(), &diag, t.embedding());
        assert!((et - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn sublevel_sets() {
        let t = filled_triangle();
        assert!(sublevel_complex(&t, &e_x(), -0.1).unwrap().is_empty());
        assert_eq!(sublevel_complex(&t, &e_x(), 1.0).unwrap(), *t.complex());
        let half = sublevel_complex(&t, &e_x(), 0.5).unwrap();
        assert_eq!(half.counts(), vec![2, 1]);
        assert_eq!(euler_characteristic(&half), 1);
    }

    #[test]
    fn curves_for_small_complexes() {
        let v = EmbeddedComplex::from_parts(2, [(0, vec![0.5, 0.0])], &[vec![0]]).unwrap();
        assert_eq!(ecc_curve(&v, &e_x()).unwrap().breakpoints(), &[(0.5, 1)]);

        // filled triangle along +x: only t=0 contributes a change (0 -> 1)
        let c = ecc_curve(&filled_triangle(), &e_x()).unwrap();
        assert_eq!(c.breakpoints(), &[(0.0, 1)]);
        assert_eq!(c.eval(1.0), 1);

        let hollow = EmbeddedComplex::from_parts(
            2,
            [(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0]), (2, vec![0.3, 1.0])],
            &[vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        let d = Direction::new(vec![0.2, 0.9]).unwrap();
        let c = ecc_curve(&hollow, &d).unwrap();
        assert_eq!(c.final_value(), 0);
        assert!(c.breakpoints().len() <= 6);
    }

    #[test]
    fn curve_matches_brute_force_on_fine_grid() {
        let t = filled_triangle();
        for d in sphere_quadrature(2, 12).unwrap().directions() {
            let c = ecc_curve(&t, &d).unwrap();
            for i in 0..=400 {
                let s = -1.5 + 3.0 * i as f64 / 400.0;
                let chi = euler_characteristic(&sublevel_complex(&t, &d, s).unwrap());
                assert_eq!(c.eval(s), chi);
            }
        }
    }

    #[test]
    fn right_continuity_at_breakpoints() {
        let c = EccCurve::from_entry_times(vec![(0.0, 0), (1.0, 0), (1.0, 1)]);
        assert_eq!(c.eval(0.0), 1);
        assert_eq!(c.eval(1.0), 1);
        assert_eq!(c.breakpoints(), &[(0.0, 1)]);
        assert_eq!(c.eval(-1e-300), 0);
    }

    #[test]
    fn l1_of_shifted_point() {
        let q = sphere_quadrature(1, 1).unwrap();
        let k = crate::complex::build_complex(&[vec![0]]).unwrap();
        let x = Embedding::new(1, [(0, vec![0.0])].into()).unwrap();
        let y = Embedding::new(1, [(0, vec![0.25])].into()).unwrap();
        let r = ect_distance(&k, &x, &y, &q).unwrap();
        assert_eq!(r.per_direction[0].1, 0.25);
        assert_eq!(r.per_direction[1].1, 0.25);
        assert_eq!(r.total, 0.25);
        assert_eq!(ect_distance(&k, &x, &x, &q).unwrap().total, 0.0);
    }

    #[test]
    fn distance_rejects_mismatched_inputs() {
        let t = filled_triangle();
        let other = EmbeddedComplex::from_parts(
            2,
            [(0, vec![0.0, 0.0]), (1, vec![1.0, 0.0]), (2, vec![0.0, 1.0])],
            &[vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap();
        let q = sphere_quadrature(2, 8).unwrap();
        assert!(matches!(ect_distance_between(&t, &other, &q), Err(Error::ComplexMismatch(_))));
        let empty = Quadrature { scheme: "none".into(), nodes: vec![] };
        assert!(matches!(ect_distance_between(&t, &t, &empty), Err(Error::EmptyQuadrature)));
    }

    #[test]
    fn quadrature_layouts() {
        let q = sphere_quadrature(2, 4).unwrap();
        let angles: Vec<f64> =
            q.nodes.iter().map(|n| n.direction.vector()[1].atan2(n.direction.vector()[0])).collect();
        assert!((angles[1] - PI / 2.0).abs() < 1e-15);
        assert!((q.total_weight() - 2.0 * PI).abs() < 1e-12);
        let q3 = sphere_quadrature(3, 100).unwrap();
        assert!((q3.total_weight() - 4.0 * PI).abs() < 1e-12);
        for n in &q3.nodes {
            let v = n.direction.vector();
            assert!((dot(v, v) - 1.0).abs() < 1e-12);
        }
        assert!(sphere_quadrature(4, 10).is_err());
        assert!(sphere_quadrature(2, 0).is_err());
    }

    #[test]
    fn sampled_grid_shape_and_floor() {
        let t = filled_triangle();
        let q = sphere_quadrature(2, 8).unwrap();
        let ts = linspace(-2.0, 2.0, 10);
        let s = sampled_ect(&t, &q.directions(), &ts).unwrap();
        assert_eq!(s.flatten().len(), 80);
        let low = sampled_ect(&t, &q.directions(), &[-5.0, -4.0]).unwrap();
        assert!(low.flatten().iter().all(|&v| v == 0));
    }

    #[test]
    fn injectivity_on_distinct_and_identical_triangles() {
        let a = filled_triangle();
        let b = a
            .with_embedding(a.embedding().map_points(|_, p| vec![p[0], p[1] * 1.5]).unwrap())
            .unwrap();
        let dirs = sphere_quadrature(2, 16).unwrap().directions();
        let r = injectivity_check(&[a.clone(), b], &dirs, None, 12).unwrap();
        assert!(r.all_distinct());
        let r = injectivity_check(&[a.clone(), a], &dirs, None, 12).unwrap();
        assert_eq!(r.collisions[0].kind, CollisionKind::IdenticalEmbeddings);
    }

    #[test]
    fn coarse_grid_is_reported_not_passed() {
        let a = filled_triangle();
        let b = a
            .with_embedding(a.embedding().map_points(|_, p| vec![p[0], p[1] * 1.5]).unwrap())
            .unwrap();
        let dirs = vec![e_x()];
        let r = injectivity_check(&[a, b], &dirs, Some(&[10.0]), 12).unwrap();
        assert_eq!(r.collisions[0].kind, CollisionKind::GridTooCoarseOrCounterexample);
    }
}
