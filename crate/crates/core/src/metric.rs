//! Exact finite metric spaces and four-point hyperbolicity.
//!
//! A [`FiniteMetricSpace`] stores its distances as exact rationals. Next
//! to the rational table it keeps the same table multiplied by the least
//! common denominator, as machine integers when they fit. The quadruple
//! scan runs on that integer table: doubled Gromov products
//! `d(x,w) + d(y,w) - d(x,y)` are integers, so no division happens until
//! the final value is rebuilt as a rational.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::text::{format_rational, join, Rational, Record};

/// Integer copy of a distance table, scaled by `denom`.
#[derive(Debug, Clone, PartialEq)]
enum ScaledTable {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

/// A finite metric space with exact rational distances.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<Rational>,
    denom: BigInt,
    scaled: ScaledTable,
}

impl FiniteMetricSpace {
    /// Builds a space from a full distance table, checking every metric
    /// axiom including the triangle inequality on all triples.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: i, got: row.len(), expected: n });
            }
            dist.extend(row);
        }
        let space = Self::from_flat_unchecked(n, dist);
        space.check_axioms()?;
        Ok(space)
    }

    /// Same as [`FiniteMetricSpace::new`] for integer distances.
    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&d| Rational::from_integer(d.into())).collect())
                .collect(),
        )
    }

    /// Builds the space `d(i, j) = f(i, j)` on `n` points and validates it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        let mut dist = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                dist.push(f(i, j));
            }
        }
        let space = Self::from_flat_unchecked(n, dist);
        space.check_axioms()?;
        Ok(space)
    }

    /// Hop-count tables coming out of BFS are metrics by construction, so
    /// the cubic triangle check is skipped for them.
    pub(crate) fn from_hop_counts(n: usize, hops: Vec<u32>) -> Self {
        debug_assert_eq!(hops.len(), n * n);
        let dist = hops.iter().map(|&h| Rational::from_integer(h.into())).collect();
        FiniteMetricSpace {
            n,
            dist,
            denom: BigInt::one(),
            scaled: ScaledTable::Small(hops.into_iter().map(i64::from).collect()),
        }
    }

    fn from_flat_unchecked(n: usize, dist: Vec<Rational>) -> Self {
        let denom = dist
            .iter()
            .fold(BigInt::one(), |acc, d| acc.lcm(d.denom()));
        let big: Vec<BigInt> = dist
            .iter()
            .map(|d| d.numer() * (&denom / d.denom()))
            .collect();
        // Headroom: a doubled Gromov product is a sum of three entries.
        let limit = BigInt::from(i64::MAX / 4);
        let scaled = if big.iter().all(|v| v.abs() <= limit) {
            ScaledTable::Small(big.iter().map(|v| v.to_i64().unwrap()).collect())
        } else {
            ScaledTable::Big(big)
        };
        FiniteMetricSpace { n, dist, denom, scaled }
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if !self.d(i, i).is_zero() {
                return Err(Error::NotAMetric(format!("d({i},{i}) is not zero")));
            }
            for j in 0..n {
                if self.d(i, j) != self.d(j, i) {
                    return Err(Error::NotAMetric(format!("d({i},{j}) != d({j},{i})")));
                }
                if i != j && !self.d(i, j).is_positive() {
                    return Err(Error::NotAMetric(format!("d({i},{j}) is not positive")));
                }
            }
        }
        match &self.scaled {
            ScaledTable::Small(t) => triangle_violation(n, t),
            ScaledTable::Big(t) => triangle_violation(n, t),
        }
        .map_or(Ok(()), |(i, j, k)| {
            Err(Error::NotAMetric(format!(
                "d({i},{k}) > d({i},{j}) + d({j},{k})"
            )))
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Distances times the common denominator, when they fit in `i64`.
    pub(crate) fn scaled_integers(&self) -> Option<&[i64]> {
        match &self.scaled {
            ScaledTable::Small(t) => Some(t),
            ScaledTable::Big(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unchecked distance lookup.
    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.n + j]
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<&Rational> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.d(i, j))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.n })
        }
    }

    /// Largest distance, zero for spaces with fewer than two points.
    pub fn diameter(&self) -> Rational {
        self.dist.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// The induced subspace on `points`, in the given order.
    pub fn subspace(&self, points: &[usize]) -> Result<Self> {
        for &p in points {
            self.check_index(p)?;
        }
        for (a, &p) in points.iter().enumerate() {
            if points[..a].contains(&p) {
                return Err(Error::NotAMetric(format!("point {p} repeated in subspace")));
            }
        }
        let m = points.len();
        let dist = points
            .iter()
            .flat_map(|&i| points.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.d(i, j).clone())
            .collect();
        Ok(Self::from_flat_unchecked(m, dist))
    }

    /// The same space with every distance multiplied by `c > 0`.
    pub fn rescaled(&self, c: &Rational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Negative(format!(
                "rescaling factor {} must be positive",
                format_rational(c)
            )));
        }
        Ok(Self::from_flat_unchecked(
            self.n,
            self.dist.iter().map(|d| d * c).collect(),
        ))
    }

    /// `(x·y)_w = ½(d(x,w) + d(y,w) − d(x,y))`.
    pub fn gromov_product(&self, x: usize, y: usize, w: usize) -> Result<Rational> {
        self.check_index(x)?;
        self.check_index(y)?;
        self.check_index(w)?;
        Ok(self.gp(x, y, w))
    }

    fn gp(&self, x: usize, y: usize, w: usize) -> Rational {
        (self.d(x, w) + self.d(y, w) - self.d(x, y)) / Rational::from_integer(2.into())
    }

    /// `max(0, min{(x·z)_w, (y·z)_w} − (x·y)_w)`, evaluated directly on the
    /// rational table.
    pub fn deficiency(&self, w: usize, x: usize, y: usize, z: usize) -> Result<Rational> {
        for i in [w, x, y, z] {
            self.check_index(i)?;
        }
        let lower = self.gp(x, z, w).min(self.gp(y, z, w));
        let d = lower - self.gp(x, y, w);
        Ok(if d.is_positive() { d } else { Rational::zero() })
    }

    fn unscale<T: ToBigInt>(&self, doubled: T) -> Rational {
        Rational::new(doubled.to_big(), &self.denom * 2)
    }
}

trait ToBigInt {
    fn to_big(self) -> BigInt;
}

impl ToBigInt for i64 {
    fn to_big(self) -> BigInt {
        self.into()
    }
}

impl ToBigInt for BigInt {
    fn to_big(self) -> BigInt {
        self
    }
}

fn triangle_violation<T>(n: usize, t: &[T]) -> Option<(usize, usize, usize)>
where
    T: Clone + Ord,
    for<'a> &'a T: Add<&'a T, Output = T>,
{
    for i in 0..n {
        for j in 0..n {
            let dij = &t[i * n + j];
            for k in 0..n {
                if t[i * n + k] > dij + &t[j * n + k] {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Four-point hyperbolicity constant of a space with a witness quadruple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperbolicityCertificate {
    pub delta: Rational,
    /// `(w, x, y, z)`: the lexicographically least quadruple attaining `delta`.
    pub witness: [usize; 4],
}

impl HyperbolicityCertificate {
    /// Re-evaluates the deficiency at the witness on the rational table.
    pub fn verify(&self, space: &FiniteMetricSpace) -> Result<bool> {
        let [w, x, y, z] = self.witness;
        Ok(space.deficiency(w, x, y, z)? == self.delta)
    }

    pub fn to_record(&self, with_witness: bool) -> Record {
        let mut r = Record::new();
        r.push_rational("delta", &self.delta);
        if with_witness {
            r.push("witness", join(self.witness));
        }
        r
    }

    pub fn from_record(r: &Record) -> Result<Self> {
        let delta = r
            .get_rational("delta")
            .ok_or_else(|| Error::parse(0, "missing or malformed `delta`"))?;
        let ws = r
            .get("witness")
            .ok_or_else(|| Error::parse(0, "missing `witness`"))?;
        let ids: Vec<usize> = ws
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(0, "malformed `witness`"))?;
        let witness: [usize; 4] = ids
            .try_into()
            .map_err(|_| Error::parse(0, "`witness` needs four indices"))?;
        Ok(Self { delta, witness })
    }
}

impl fmt::Display for HyperbolicityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_record(true))
    }
}

/// Best `(doubled deficiency, witness)` for the base point `w`.
///
/// Only `x <= y` is visited: the deficiency is symmetric in `x` and `y`, so
/// the lexicographically least maximizer always has `x <= y`.
fn scan_base<T>(n: usize, t: &[T], w: usize, gp: &mut Vec<T>) -> (T, [usize; 4])
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
{
    gp.clear();
    for x in 0..n {
        for z in 0..n {
            gp.push(t[x * n + w].clone() + t[z * n + w].clone() - t[x * n + z].clone());
        }
    }
    let mut best = T::zero();
    let mut witness = [w, 0, 0, 0];
    for x in 0..n {
        let row_x = &gp[x * n..(x + 1) * n];
        for y in x..n {
            let row_y = &gp[y * n..(y + 1) * n];
            let gxy = row_x[y].clone();
            for z in 0..n {
                let lower = if row_x[z] < row_y[z] { &row_x[z] } else { &row_y[z] };
                if *lower > gxy {
                    let d = lower.clone() - gxy.clone();
                    if d > best {
                        best = d;
                        witness = [w, x, y, z];
                    }
                }
            }
        }
    }
    (best, witness)
}

fn scan_sequential<T>(n: usize, t: &[T]) -> (T, [usize; 4])
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
{
    let mut buf = Vec::with_capacity(n * n);
    let mut best = (T::zero(), [0; 4]);
    for w in 0..n {
        let cand = scan_base(n, t, w, &mut buf);
        if cand.0 > best.0 {
            best = cand;
        }
    }
    best
}

fn scan_parallel<T>(n: usize, t: &[T]) -> (T, [usize; 4])
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T> + Send + Sync,
{
    (0..n)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n * n),
            |buf, w| scan_base(n, t, w, buf),
        )
        .reduce(
            || (T::zero(), [0; 4]),
            |a, b| {
                // Strictly larger wins; ties keep the lexicographically smaller witness.
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        )
}

/// Exact four-point δ by exhaustive scan over ordered quadruples, with the
/// lexicographically least witness.
pub fn four_point_delta(space: &FiniteMetricSpace) -> HyperbolicityCertificate {
    let n = space.len();
    let (delta, witness) = match &space.scaled {
        ScaledTable::Small(t) => {
            let (d, w) = scan_sequential(n, t);
            (space.unscale(d), w)
        }
        ScaledTable::Big(t) => {
            let (d, w) = scan_sequential(n, t);
            (space.unscale(d), w)
        }
    };
    HyperbolicityCertificate { delta, witness }
}

/// Same result as [`four_point_delta`], with base points spread over the
/// rayon pool.
pub fn four_point_delta_parallel(space: &FiniteMetricSpace) -> HyperbolicityCertificate {
    let n = space.len();
    let (delta, witness) = match &space.scaled {
        ScaledTable::Small(t) => {
            let (d, w) = scan_parallel(n, t);
            (space.unscale(d), w)
        }
        ScaledTable::Big(t) => {
            let (d, w) = scan_parallel(n, t);
            (space.unscale(d), w)
        }
    };
    HyperbolicityCertificate { delta, witness }
}

/// Just the value of δ, without keeping witness bookkeeping around.
pub fn four_point_delta_value(space: &FiniteMetricSpace) -> Rational {
    four_point_delta(space).delta
}

/// Additive and density defects of a map between finite metric spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QiDefect {
    /// `max |d(f(a), f(b)) − d(a, b)|`.
    pub additive_defect: Rational,
    /// `max` over target points of the distance to the image.
    pub density_defect: Rational,
}

impl QiDefect {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push_rational("additive-defect", &self.additive_defect);
        r.push_rational("density-defect", &self.density_defect);
        r
    }
}

/// Measures how far `map` (source index → target index) is from an isometry.
pub fn qi_defect(
    map: &[usize],
    source: &FiniteMetricSpace,
    target: &FiniteMetricSpace,
) -> Result<QiDefect> {
    if map.len() != source.len() {
        return Err(Error::DimensionMismatch { expected: source.len(), got: map.len() });
    }
    if let Some((a, &fa)) = map.iter().enumerate().find(|(_, &fa)| fa >= target.len()) {
        return Err(Error::MapOutOfRange { source_point: a, image: fa, len: target.len() });
    }
    let mut additive = Rational::zero();
    for a in 0..map.len() {
        for b in a + 1..map.len() {
            let gap = (target.d(map[a], map[b]) - source.d(a, b)).abs();
            if gap > additive {
                additive = gap;
            }
        }
    }
    let mut density = Rational::zero();
    if !map.is_empty() {
        for p in 0..target.len() {
            let nearest = map.iter().map(|&fa| target.d(p, fa)).min().unwrap();
            if *nearest > density {
                density = nearest.clone();
            }
        }
    }
    Ok(QiDefect { additive_defect: additive, density_defect: density })
}

/// Hyperbolicity constant inherited by the source of a `(1, ε)`
/// quasi-isometric embedding into a δ-hyperbolic target: `δ + 3ε`.
pub fn delta_transfer_bound(delta_target: &Rational, epsilon: &Rational) -> Result<Rational> {
    if delta_target.is_negative() {
        return Err(Error::Negative(format!("delta = {}", format_rational(delta_target))));
    }
    if epsilon.is_negative() {
        return Err(Error::Negative(format!("epsilon = {}", format_rational(epsilon))));
    }
    Ok(delta_target + epsilon * Rational::from_integer(3.into()))
}

/// A simple undirected graph with unit edge lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Rejects self-loops, duplicate edges (in either orientation) and
    /// endpoints `>= n`. Connectivity is checked by [`shortest_path_metric`].
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {u}-{v} has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if adjacency[u].contains(&v) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}-{v}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Graph { n, edges, adjacency })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Parses the edge-list format: one `u v` pair per line, 0-based ids,
    /// `#` starts a comment. The vertex count is the largest id plus one.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::parse(i + 1, format!("expected `u v`, found `{line}`")));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(i + 1, format!("`{s}` is not a vertex id")))
            };
            let (u, v) = (parse(fields[0])?, parse(fields[1])?);
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
        }
        let n = max_id.map_or(0, |m| m + 1);
        if n == 0 {
            return Err(Error::parse(0, "edge list contains no edges"));
        }
        Self::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub(crate) fn bfs_from(&self, s: usize) -> Vec<u32> {
        bfs_hops(&self.adjacency, s)
    }
}

pub(crate) fn bfs_hops(adjacency: &[Vec<usize>], s: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adjacency.len()];
    let mut queue = VecDeque::new();
    dist[s] = 0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// All-pairs hop-count metric of a connected graph.
pub fn shortest_path_metric(g: &Graph) -> Result<FiniteMetricSpace> {
    let n = g.vertex_count();
    let mut table = Vec::with_capacity(n * n);
    for s in 0..n {
        let row = g.bfs_from(s);
        if let Some(t) = row.iter().position(|&d| d == u32::MAX) {
            return Err(Error::Disconnected { from: s, to: t });
        }
        table.extend(row);
    }
    Ok(FiniteMetricSpace::from_hop_counts(n, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{integer, rational};
    use proptest::prelude::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i)).collect()).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap()
    }

    /// Reference scan written straight from the definition, on rationals.
    fn brute_delta(s: &FiniteMetricSpace) -> (Rational, [usize; 4]) {
        let n = s.len();
        let mut best = (Rational::zero(), [0; 4]);
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let d = s.deficiency(w, x, y, z).unwrap();
                        if d > best.0 {
                            best = (d, [w, x, y, z]);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn path_metric() {
        let s = shortest_path_metric(&path(3)).unwrap();
        assert_eq!(*s.d(0, 2), integer(2));
        assert_eq!(*s.d(0, 1), integer(1));
    }

    #[test]
    fn single_vertex_metric() {
        let s = shortest_path_metric(&Graph::new(1, vec![]).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(*s.d(0, 0), integer(0));
    }

    #[test]
    fn four_cycle_metric() {
        let s = shortest_path_metric(&cycle(4)).unwrap();
        assert_eq!(*s.d(0, 2), integer(2));
        assert_eq!(*s.d(1, 3), integer(2));
        for i in 0..4 {
            assert_eq!(*s.d(i, (i + 1) % 4), integer(1));
        }
    }

    #[test]
    fn disconnected_graph_names_vertices() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            shortest_path_metric(&g).unwrap_err(),
            Error::Disconnected { from: 0, to: 2 }
        );
    }

    #[test]
    fn graph_rejects_loops_and_duplicates() {
        assert!(matches!(Graph::new(2, vec![(1, 1)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::new(2, vec![(0, 1), (1, 0)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::new(2, vec![(0, 2)]), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::parse_edge_list("# a square\n0 1\n1 2 # trailing\n\n2 3\n3 0\n").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges().len(), 4);
        let err = Graph::parse_edge_list("0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = Graph::parse_edge_list("0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn gromov_product_examples() {
        let p3 = shortest_path_metric(&path(3)).unwrap();
        assert_eq!(p3.gromov_product(0, 2, 1).unwrap(), integer(0));
        let c4 = shortest_path_metric(&cycle(4)).unwrap();
        assert_eq!(c4.gromov_product(1, 2, 0).unwrap(), integer(1));
        for x in 0..4 {
            for w in 0..4 {
                assert_eq!(c4.gromov_product(x, x, w).unwrap(), *c4.d(x, w));
            }
        }
        assert_eq!(
            c4.gromov_product(0, 4, 1).unwrap_err(),
            Error::IndexOutOfRange { index: 4, len: 4 }
        );
    }

    #[test]
    fn four_cycle_delta_and_witness() {
        let c4 = shortest_path_metric(&cycle(4)).unwrap();
        let cert = four_point_delta(&c4);
        assert_eq!(cert.delta, integer(1));
        assert_eq!(cert.witness, [0, 1, 3, 2]);
        assert!(cert.verify(&c4).unwrap());
        assert_eq!(brute_delta(&c4), (cert.delta.clone(), cert.witness));
    }

    #[test]
    fn tiny_spaces_have_zero_delta() {
        let one = FiniteMetricSpace::from_integers(&[vec![0]]).unwrap();
        assert_eq!(four_point_delta(&one).delta, integer(0));
        let two = FiniteMetricSpace::from_integers(&[vec![0, 5], vec![5, 0]]).unwrap();
        assert_eq!(four_point_delta(&two).delta, integer(0));
    }

    #[test]
    fn construction_rejects_non_metrics() {
        let asym = FiniteMetricSpace::from_integers(&[vec![0, 1], vec![2, 0]]);
        assert!(matches!(asym, Err(Error::NotAMetric(_))));
        let zero = FiniteMetricSpace::from_integers(&[vec![0, 0], vec![0, 0]]);
        assert!(matches!(zero, Err(Error::NotAMetric(_))));
        let tri = FiniteMetricSpace::from_integers(&[
            vec![0, 1, 5],
            vec![1, 0, 1],
            vec![5, 1, 0],
        ]);
        assert!(matches!(tri, Err(Error::NotAMetric(_))));
        let ragged = FiniteMetricSpace::new(vec![vec![integer(0)], vec![]]);
        assert!(matches!(ragged, Err(Error::NotSquare { .. })));
    }

    #[test]
    fn qi_defect_examples() {
        let p3 = shortest_path_metric(&path(3)).unwrap();
        let id = qi_defect(&[0, 1, 2], &p3, &p3).unwrap();
        assert_eq!(id.additive_defect, integer(0));
        assert_eq!(id.density_defect, integer(0));

        let p5 = shortest_path_metric(&path(5)).unwrap();
        let incl = qi_defect(&[1, 2, 3], &p3, &p5).unwrap();
        assert_eq!(incl.additive_defect, integer(0));
        assert_eq!(incl.density_defect, integer(1));

        let collapse = qi_defect(&[1, 1, 1], &p3, &p3).unwrap();
        assert_eq!(collapse.additive_defect, integer(2));

        assert_eq!(
            qi_defect(&[0, 1, 3], &p3, &p3).unwrap_err(),
            Error::MapOutOfRange { source_point: 2, image: 3, len: 3 }
        );
    }

    #[test]
    fn transfer_bound() {
        assert_eq!(delta_transfer_bound(&integer(0), &integer(0)).unwrap(), integer(0));
        assert_eq!(delta_transfer_bound(&integer(1), &integer(0)).unwrap(), integer(1));
        assert_eq!(
            delta_transfer_bound(&integer(2), &rational(3, 2)).unwrap(),
            rational(13, 2)
        );
        assert!(delta_transfer_bound(&integer(-1), &integer(0)).is_err());
        assert!(delta_transfer_bound(&integer(0), &rational(-1, 3)).is_err());
    }

    #[test]
    fn certificate_record_roundtrip() {
        let c4 = shortest_path_metric(&cycle(4)).unwrap();
        let cert = four_point_delta(&c4);
        let text = cert.to_string();
        assert_eq!(text, "delta: 1/1\nwitness: 0 1 3 2\n");
        let back = HyperbolicityCertificate::from_record(&Record::parse(&text).unwrap()).unwrap();
        assert_eq!(back, cert);
    }

    /// Random rational metric: shortest paths in a complete graph with
    /// positive rational edge weights.
    fn arb_space(max_n: usize) -> impl Strategy<Value = FiniteMetricSpace> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec((1i64..20, 1i64..4), n * n).prop_map(move |w| {
                let mut d = vec![vec![Rational::zero(); n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let (a, b) = w[i.min(j) * n + i.max(j)];
                            d[i][j] = rational(a, b);
                        }
                    }
                }
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let via = &d[i][k] + &d[k][j];
                            if via < d[i][j] {
                                d[i][j] = via;
                            }
                        }
                    }
                }
                FiniteMetricSpace::new(d).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scan_matches_definition(s in arb_space(6)) {
            let cert = four_point_delta(&s);
            prop_assert_eq!((cert.delta.clone(), cert.witness), brute_delta(&s));
            prop_assert!(cert.verify(&s).unwrap());
            prop_assert_eq!(four_point_delta_parallel(&s), cert);
        }

        #[test]
        fn gromov_product_symmetric_nonnegative(s in arb_space(6), a in 0usize..6, b in 0usize..6, c in 0usize..6) {
            let n = s.len();
            let (x, y, w) = (a % n, b % n, c % n);
            let p = s.gromov_product(x, y, w).unwrap();
            prop_assert!(!p.is_negative());
            prop_assert_eq!(p, s.gromov_product(y, x, w).unwrap());
        }

        #[test]
        fn delta_is_homogeneous(s in arb_space(6), p in 1i64..9, q in 1i64..9) {
            let c = rational(p, q);
            let scaled = s.rescaled(&c).unwrap();
            prop_assert_eq!(four_point_delta(&scaled).delta, four_point_delta(&s).delta * c);
        }

        #[test]
        fn subspaces_are_no_less_hyperbolic(s in arb_space(7), mask in 1u32..128) {
            let pts: Vec<usize> = (0..s.len()).filter(|i| mask & (1 << i) != 0).collect();
            prop_assume!(!pts.is_empty());
            let sub = s.subspace(&pts).unwrap();
            prop_assert!(four_point_delta(&sub).delta <= four_point_delta(&s).delta);
        }
    }
}
