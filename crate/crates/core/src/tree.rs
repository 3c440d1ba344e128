//! Truncated locally finite trees and isometry classification.
//!
//! Two families are built here. [`build_regular_tree`] materializes the
//! ball of radius `R` in the `(q+1)`-regular tree. [`build_level_tree`]
//! materializes a window of the `(q+1)`-regular tree on which the affine
//! group `ℤ ⋉ 𝔽_q((t))` acts, in horoball coordinates: a vertex is a pair
//! `(k, tail)` standing for the coset `tail + O_k`, with `tail` the terms
//! of exponent below `k`. The vertex `(k, tail)` is joined to its parent
//! `(k−1, tail mod O_{k−1})` and to the `q` vertices
//! `(k+1, tail + c·tᵏ)`, `c ∈ 𝔽_q`. The group acts by
//!
//! ```text
//! (n, f) · (k, tail) = (k + n, (f + tⁿ·tail) mod O_{k+n})
//! ```
//!
//! A window keeps levels in `[level_min, level_max]` and tail exponents in
//! `[floor, ceil)`. Vertices whose neighbours are all kept are *interior*;
//! classification only looks at interior vertices.
//!
//! On a tree every isometry is elliptic or hyperbolic. The classifier
//! reads the minimal displacement off the interior and certifies a
//! hyperbolic answer with `d(v, g²v) − d(v, gv)`, which equals the
//! translation length at every vertex of a tree. Answers the window cannot
//! certify are flagged `window_limited`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::{Range, RangeInclusive};

use crate::error::{Error, Result};
use crate::laurent::{AffineElement, TruncatedLaurent};
use crate::metric::{bfs_hops, FiniteMetricSpace, Graph};
use crate::text::{join, Record};

pub type VertexId = usize;

pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

/// A finite subtree of a locally finite tree, with interior flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedTree {
    adjacency: Vec<Vec<VertexId>>,
    interior: Vec<bool>,
    parent: Vec<Option<VertexId>>,
    depth: Vec<u32>,
    valency: Option<usize>,
}

impl TruncatedTree {
    /// Checks that `edges` form a tree on `0..n` and, when `valency` is
    /// given, that every interior vertex has exactly that many neighbours.
    pub fn from_edges(
        n: usize,
        edges: &[(VertexId, VertexId)],
        interior: Vec<bool>,
        valency: Option<usize>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if interior.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: interior.len() });
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges on {n} vertices cannot form a tree",
                edges.len()
            )));
        }
        let graph = Graph::new(n, edges.to_vec())?;
        let adjacency: Vec<Vec<VertexId>> = (0..n).map(|v| graph.neighbors(v).to_vec()).collect();
        Self::from_adjacency(adjacency, interior, valency)
    }

    fn from_adjacency(
        adjacency: Vec<Vec<VertexId>>,
        interior: Vec<bool>,
        valency: Option<usize>,
    ) -> Result<Self> {
        let n = adjacency.len();
        let mut parent = vec![None; n];
        let mut depth = vec![u32::MAX; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if depth[v] == u32::MAX {
                    depth[v] = depth[u] + 1;
                    parent[v] = Some(u);
                    queue.push_back(v);
                } else if parent[u] != Some(v) {
                    return Err(Error::InvalidTree(format!("cycle through edge {u}-{v}")));
                }
            }
        }
        if let Some(v) = depth.iter().position(|&d| d == u32::MAX) {
            return Err(Error::InvalidTree(format!("vertex {v} is not connected to vertex 0")));
        }
        if let Some(k) = valency {
            if let Some(v) = (0..n).find(|&v| interior[v] && adjacency[v].len() != k) {
                return Err(Error::InvalidTree(format!(
                    "interior vertex {v} has {} neighbours, expected {k}",
                    adjacency[v].len()
                )));
            }
        }
        Ok(TruncatedTree { adjacency, interior, parent, depth, valency })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        self.interior[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).filter(|&v| self.interior[v])
    }

    /// Valency of interior vertices, when fixed at construction.
    pub fn valency(&self) -> Option<usize> {
        self.valency
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.len()).filter_map(|v| self.parent[v].map(|p| (p, v)))
    }

    pub fn are_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.parent[u] == Some(v) || self.parent[v] == Some(u)
    }

    /// Path length between two vertices. A finite subtree is convex, so
    /// this is also their distance in the full tree.
    pub fn distance(&self, mut u: VertexId, mut v: VertexId) -> u32 {
        let mut d = 0;
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap();
            d += 1;
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
            d += 1;
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
            d += 2;
        }
        d
    }

    /// Hop-count distances from `s` to every vertex.
    pub fn distances_from(&self, s: VertexId) -> Vec<u32> {
        bfs_hops(&self.adjacency, s)
    }

    /// Distance from every vertex to the nearest vertex of `set`.
    pub fn distances_to_set(&self, set: &[VertexId]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        for &s in set {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// The path metric on all vertices.
    pub fn metric_space(&self) -> FiniteMetricSpace {
        let n = self.len();
        let mut table = Vec::with_capacity(n * n);
        for s in 0..n {
            table.extend(self.distances_from(s));
        }
        FiniteMetricSpace::from_hop_counts(n, table)
    }

    pub fn to_graph(&self) -> Graph {
        Graph::new(self.len(), self.edges().collect()).expect("tree edges form a simple graph")
    }

    /// Edge list in the graph file format.
    pub fn to_edge_list(&self) -> String {
        self.to_graph().to_edge_list()
    }

    /// One `<id> <interior 0|1>` line per vertex.
    pub fn sidecar(&self) -> String {
        (0..self.len())
            .map(|v| format!("{v} {}\n", u8::from(self.interior[v])))
            .collect()
    }
}

/// Ball of radius `radius` around vertex 0 in the `(q+1)`-regular tree.
///
/// Vertices are numbered breadth first; children of a vertex are
/// contiguous. Interior vertices are those at distance `< radius`.
pub fn build_regular_tree(q: usize, radius: u32) -> Result<TruncatedTree> {
    build_regular_tree_capped(q, radius, DEFAULT_VERTEX_CAP)
}

pub fn build_regular_tree_capped(q: usize, radius: u32, cap: usize) -> Result<TruncatedTree> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("q = {q} must be at least 2")));
    }
    if radius < 1 {
        return Err(Error::InvalidArgument("radius must be at least 1".into()));
    }
    let mut total: usize = 1;
    let mut sphere: usize = q + 1;
    for _ in 0..radius {
        total = total.checked_add(sphere).filter(|&t| t <= cap).ok_or(Error::TreeTooLarge { cap })?;
        sphere = sphere.saturating_mul(q);
    }
    let mut adjacency = vec![Vec::new(); total];
    let mut interior = vec![false; total];
    let mut depth = vec![0u32; total];
    let mut next = 1;
    for v in 0..total {
        if depth[v] == radius {
            continue;
        }
        interior[v] = true;
        let children = if v == 0 { q + 1 } else { q };
        for _ in 0..children {
            adjacency[v].push(next);
            adjacency[next].push(v);
            depth[next] = depth[v] + 1;
            next += 1;
        }
    }
    debug_assert_eq!(next, total);
    TruncatedTree::from_adjacency(adjacency, interior, Some(q + 1))
}

/// The ball of [`build_regular_tree`] with every vertex labelled by a
/// reduced word over the letters `0..=q`, reading the `(q+1)`-regular tree
/// as the Cayley graph of a free product of `q+1` copies of `ℤ/2`.
///
/// An automorphism `φ` of the whole tree is fixed by the word `φ(root)`
/// and, at every vertex `w`, a bijection `π_w` of the letters with
/// `φ(w·a) = φ(w)·π_w(a)`. Adjacent vertices share one value:
/// `π_{w·a}(a) = π_w(a)`.
#[derive(Debug, Clone)]
pub struct RegularBall {
    q: usize,
    radius: u32,
    tree: TruncatedTree,
    words: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, VertexId>,
}

fn push_letter(word: &mut Vec<u8>, a: u8) {
    if word.last() == Some(&a) {
        word.pop();
    } else {
        word.push(a);
    }
}

impl RegularBall {
    pub fn new(q: usize, radius: u32) -> Result<Self> {
        if q > u8::MAX as usize - 1 {
            return Err(Error::InvalidArgument(format!("q = {q} is too large for letter words")));
        }
        let tree = build_regular_tree(q, radius)?;
        let mut words = vec![Vec::new(); tree.len()];
        for v in 0..tree.len() {
            let last = words[v].last().copied();
            let children = tree.neighbors(v).iter().filter(|&&w| tree.parent[w] == Some(v));
            let letters = (0..=q as u8).filter(|&a| Some(a) != last);
            for (&c, a) in children.zip(letters) {
                let mut w = words[v].clone();
                w.push(a);
                words[c] = w;
            }
        }
        let index = words.iter().cloned().enumerate().map(|(v, w)| (w, v)).collect();
        Ok(RegularBall { q, radius, tree, words, index })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    pub fn word(&self, v: VertexId) -> &[u8] {
        &self.words[v]
    }

    /// The vertex labelled by a reduced word, if it lies in the ball.
    pub fn vertex(&self, word: &[u8]) -> Option<VertexId> {
        self.index.get(word).copied()
    }

    /// Restriction to the ball of the automorphism with `φ(root) =
    /// root_image`. At each vertex `w` the free target letters arrive
    /// sorted; `arrange(w, targets)` may permute them, and they are then
    /// matched in order with the sorted free source letters.
    pub fn automorphism(
        &self,
        root_image: &[u8],
        mut arrange: impl FnMut(&[u8], &mut [u8]),
    ) -> Result<MapTable> {
        let letters = self.q as u8 + 1;
        if root_image.iter().any(|&a| a >= letters) || root_image.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidArgument(format!("{root_image:?} is not a reduced word")));
        }
        let n = self.tree.len();
        let mut images: Vec<Vec<u8>> = vec![Vec::new(); n];
        let mut perms: Vec<Vec<u8>> = vec![Vec::new(); n];
        images[0] = root_image.to_vec();
        for v in 0..n {
            if self.tree.depth[v] == self.radius {
                continue;
            }
            let word = &self.words[v];
            let forced = word.last().map(|&a| (a, perms[self.tree.parent[v].unwrap()][a as usize]));
            let sources: Vec<u8> = (0..letters).filter(|&a| Some(a) != forced.map(|f| f.0)).collect();
            let mut targets: Vec<u8> = (0..letters).filter(|&b| Some(b) != forced.map(|f| f.1)).collect();
            let sorted = targets.clone();
            arrange(word, &mut targets);
            let mut check = targets.clone();
            check.sort_unstable();
            if check != sorted {
                return Err(Error::InvalidArgument("arrange must permute the target letters".into()));
            }
            let mut perm = vec![0u8; letters as usize];
            if let Some((a, b)) = forced {
                perm[a as usize] = b;
            }
            for (&a, &b) in sources.iter().zip(&targets) {
                perm[a as usize] = b;
            }
            for &c in &self.tree.adjacency[v] {
                if self.tree.parent[c] == Some(v) {
                    let mut img = images[v].clone();
                    push_letter(&mut img, perm[*self.words[c].last().unwrap() as usize]);
                    images[c] = img;
                }
            }
            perms[v] = perm;
        }
        Ok(MapTable(images.iter().map(|w| self.vertex(w)).collect()))
    }

    /// Generators of the stabilizer of the root inside the ball: for every
    /// non-leaf vertex, the swaps of consecutive child subtrees.
    pub fn root_stabilizer_generators(&self) -> Vec<MapTable> {
        let mut gens = Vec::new();
        for v in 0..self.tree.len() {
            if self.tree.depth[v] == self.radius {
                continue;
            }
            let children = self.tree.adjacency[v].iter().filter(|&&c| self.tree.parent[c] == Some(v)).count();
            for i in 0..children - 1 {
                let target = self.words[v].clone();
                let map = self
                    .automorphism(&[], |w, t| {
                        if w == target.as_slice() {
                            t.swap(i, i + 1);
                        }
                    })
                    .expect("swapping letters permutes them");
                gens.push(map);
            }
        }
        gens
    }
}

/// A vertex `(k, tail)` of the tree of `ℤ ⋉ 𝔽_q((t))`: the coset
/// `tail + O_k`, where `tail` has no terms of exponent `≥ k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelVertex {
    pub level: i64,
    pub tail: TruncatedLaurent,
}

impl fmt::Display for LevelVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.level, self.tail)
    }
}

impl LevelVertex {
    /// Image under `(n, f)`, untruncated.
    pub fn act(&self, g: &AffineElement) -> Result<LevelVertex> {
        let level = self.level + g.n;
        let tail = g.f.add(&self.tail.shift(g.n))?.mod_level(level);
        Ok(LevelVertex { level, tail })
    }
}

/// A window of the tree of `ℤ ⋉ 𝔽_q((t))` in level/tail coordinates.
#[derive(Debug, Clone)]
pub struct LevelTree {
    q: u64,
    level_min: i64,
    level_max: i64,
    floor: i64,
    ceil: i64,
    offsets: Vec<usize>,
    tree: TruncatedTree,
}

/// Builds the window with levels in `levels` and tail exponents in `tails`.
///
/// The lowest level must not exceed `tails.start`, so that the window
/// has a single lowest vertex and is connected.
pub fn build_level_tree(q: u64, levels: RangeInclusive<i64>, tails: Range<i64>) -> Result<LevelTree> {
    build_level_tree_capped(q, levels, tails, DEFAULT_VERTEX_CAP)
}

pub fn build_level_tree_capped(
    q: u64,
    levels: RangeInclusive<i64>,
    tails: Range<i64>,
    cap: usize,
) -> Result<LevelTree> {
    TruncatedLaurent::zero(q)?;
    let (level_min, level_max) = (*levels.start(), *levels.end());
    if levels.is_empty() {
        return Err(Error::EmptyRange);
    }
    let (floor, ceil) = (tails.start, tails.end);
    if ceil <= floor {
        return Err(Error::NoInterior);
    }
    if level_min > floor {
        return Err(Error::InvalidTree(format!(
            "lowest level {level_min} lies above the tail floor {floor}; the window would be disconnected"
        )));
    }
    let mut lt = LevelTree {
        q,
        level_min,
        level_max,
        floor,
        ceil,
        offsets: Vec::new(),
        tree: TruncatedTree {
            adjacency: Vec::new(),
            interior: Vec::new(),
            parent: Vec::new(),
            depth: Vec::new(),
            valency: None,
        },
    };
    let mut total = 0usize;
    for k in level_min..=level_max {
        lt.offsets.push(total);
        let count = (q as usize)
            .checked_pow(lt.width(k))
            .ok_or(Error::TreeTooLarge { cap })?;
        total = total.checked_add(count).filter(|&t| t <= cap).ok_or(Error::TreeTooLarge { cap })?;
    }
    lt.offsets.push(total);

    let mut adjacency = vec![Vec::new(); total];
    let mut interior = vec![false; total];
    for k in level_min..=level_max {
        let base = lt.offsets[(k - level_min) as usize];
        let count = lt.level_size(k);
        let parent_modulus = if k > level_min { (q as usize).pow(lt.width(k - 1)) } else { 1 };
        let is_interior = k > level_min && k < level_max && k >= floor && k < ceil;
        for code in 0..count {
            let v = base + code;
            interior[v] = is_interior;
            if k > level_min {
                let p = lt.offsets[(k - 1 - level_min) as usize] + code % parent_modulus;
                adjacency[v].push(p);
                adjacency[p].push(v);
            }
        }
    }
    if !interior.iter().any(|&b| b) {
        return Err(Error::NoInterior);
    }
    lt.tree = TruncatedTree::from_adjacency(adjacency, interior, Some(q as usize + 1))?;
    Ok(lt)
}

impl LevelTree {
    /// Number of tail exponents tracked at level `k`.
    fn width(&self, k: i64) -> u32 {
        (k.min(self.ceil) - self.floor).max(0) as u32
    }

    fn level_size(&self, k: i64) -> usize {
        (self.q as usize).pow(self.width(k))
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn tree(&self) -> &TruncatedTree {
        &self.tree
    }

    pub fn levels(&self) -> RangeInclusive<i64> {
        self.level_min..=self.level_max
    }

    pub fn tail_window(&self) -> Range<i64> {
        self.floor..self.ceil
    }

    /// Coordinates of vertex `v`.
    pub fn coords(&self, v: VertexId) -> LevelVertex {
        let idx = self.offsets.partition_point(|&o| o <= v) - 1;
        let level = self.level_min + idx as i64;
        let mut code = v - self.offsets[idx];
        let width = self.width(level) as usize;
        let mut coeffs = Vec::with_capacity(width);
        for _ in 0..width {
            coeffs.push((code % self.q as usize) as u64);
            code /= self.q as usize;
        }
        let tail = TruncatedLaurent::from_coeffs(self.q, self.floor, coeffs)
            .expect("digits are residues");
        LevelVertex { level, tail }
    }

    /// Id of the vertex with these coordinates, if it lies in the window.
    pub fn locate(&self, v: &LevelVertex) -> Option<VertexId> {
        if v.tail.q() != self.q || v.level < self.level_min || v.level > self.level_max {
            return None;
        }
        let top = v.level.min(self.ceil);
        if !v.tail.is_zero() && (v.tail.lo() < self.floor || v.tail.hi() > top) {
            return None;
        }
        let mut code = 0usize;
        for e in (self.floor..top).rev() {
            code = code * self.q as usize + v.tail.coeff(e) as usize;
        }
        Some(self.offsets[(v.level - self.level_min) as usize] + code)
    }

    /// `(level, 0)`, the vertex standing for `O_level` itself.
    pub fn base_vertex(&self, level: i64) -> Option<VertexId> {
        self.locate(&LevelVertex { level, tail: TruncatedLaurent::zero(self.q).ok()? })
    }

    /// Image of `v` under `g`, or `None` when it leaves the window.
    pub fn act_affine(&self, g: &AffineElement, v: VertexId) -> Result<Option<VertexId>> {
        if g.q() != self.q {
            return Err(Error::FieldMismatch(self.q, g.q()));
        }
        Ok(self.locate(&self.coords(v).act(g)?))
    }

    /// `g` as a vertex map on this window.
    pub fn affine_map(&self, g: &AffineElement) -> Result<AffineMap<'_>> {
        if g.q() != self.q {
            return Err(Error::FieldMismatch(self.q, g.q()));
        }
        Ok(AffineMap { tree: self, g: g.clone() })
    }

    /// Interior flag and coordinates, one `<id> <0|1> <level> | <tail>` line per vertex.
    pub fn sidecar(&self) -> String {
        (0..self.tree.len())
            .map(|v| format!("{v} {} {}\n", u8::from(self.tree.is_interior(v)), self.coords(v)))
            .collect()
    }
}

/// A partial self-map of the vertices of a truncated tree; `None` means the
/// image falls outside the window.
pub trait VertexMap {
    fn image(&self, v: VertexId) -> Option<VertexId>;
}

impl<F: Fn(VertexId) -> Option<VertexId>> VertexMap for F {
    fn image(&self, v: VertexId) -> Option<VertexId> {
        self(v)
    }
}

/// A vertex map stored as a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapTable(pub Vec<Option<VertexId>>);

impl MapTable {
    pub fn from_map(n: usize, map: &dyn VertexMap) -> Self {
        MapTable((0..n).map(|v| map.image(v)).collect())
    }

    pub fn identity(n: usize) -> Self {
        MapTable((0..n).map(Some).collect())
    }

    /// The inverse partial map. Fails if two vertices share an image.
    pub fn inverse(&self) -> Result<MapTable> {
        let mut inv = vec![None; self.0.len()];
        for (v, img) in self.0.iter().enumerate() {
            if let Some(w) = *img {
                if w >= inv.len() || inv[w].is_some() {
                    return Err(Error::InvalidArgument(format!("vertex map is not injective at {w}")));
                }
                inv[w] = Some(v);
            }
        }
        Ok(MapTable(inv))
    }
}

impl VertexMap for MapTable {
    fn image(&self, v: VertexId) -> Option<VertexId> {
        self.0.get(v).copied().flatten()
    }
}

/// An element of the affine group acting on a [`LevelTree`].
#[derive(Debug, Clone)]
pub struct AffineMap<'a> {
    tree: &'a LevelTree,
    g: AffineElement,
}

impl AffineMap<'_> {
    pub fn element(&self) -> &AffineElement {
        &self.g
    }
}

impl VertexMap for AffineMap<'_> {
    fn image(&self, v: VertexId) -> Option<VertexId> {
        self.tree.locate(&self.tree.coords(v).act(&self.g).ok()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryKind {
    Elliptic,
    Hyperbolic,
}

impl fmt::Display for IsometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IsometryKind::Elliptic => "elliptic",
            IsometryKind::Hyperbolic => "hyperbolic",
        })
    }
}

/// Classification of a tree isometry as seen through a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeIsometryReport {
    pub kind: IsometryKind,
    /// Least displacement over interior vertices with an image.
    pub min_displacement: u32,
    /// Some fixed interior vertices, at most [`FIXED_SAMPLE`].
    pub fixed_set_sample: Vec<VertexId>,
    /// An interior edge swapped end for end, for elliptic maps without
    /// a fixed interior vertex.
    pub inverted_edge: Option<(VertexId, VertexId)>,
    /// Interior vertices of least displacement, ordered along the
    /// direction of translation.
    pub axis: Vec<VertexId>,
    /// Axis end the isometry moves away from.
    pub repelling: Option<VertexId>,
    /// Axis end the isometry moves towards.
    pub attracting: Option<VertexId>,
    /// The window does not certify the classification: no fixed vertex,
    /// inverted edge or `g²`-witness lies inside it, or the least
    /// displacement set is not a path.
    pub window_limited: bool,
}

pub const FIXED_SAMPLE: usize = 32;

impl TreeIsometryReport {
    pub fn summary(&self) -> String {
        match self.kind {
            IsometryKind::Elliptic => format!("elliptic, ℓ={}", self.min_displacement),
            IsometryKind::Hyperbolic => format!("hyperbolic, length {}", self.min_displacement),
        }
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("classification", self.summary());
        r.push("kind", self.kind);
        r.push("min-displacement", self.min_displacement);
        r.push("translation-length", translation_length(self));
        match self.kind {
            IsometryKind::Elliptic => {
                r.push("fixed-sample", join(&self.fixed_set_sample));
                if let Some((a, b)) = self.inverted_edge {
                    r.push("inverted-edge", format!("{a} {b}"));
                }
            }
            IsometryKind::Hyperbolic => {
                r.push("axis", join(&self.axis));
                if let (Some(rep), Some(att)) = (self.repelling, self.attracting) {
                    r.push("repelling", rep);
                    r.push("attracting", att);
                }
            }
        }
        r.push("window-limited", self.window_limited);
        r
    }
}

/// 0 for elliptic reports, the least displacement for hyperbolic ones.
pub fn translation_length(report: &TreeIsometryReport) -> u32 {
    match report.kind {
        IsometryKind::Elliptic => 0,
        IsometryKind::Hyperbolic => report.min_displacement,
    }
}

/// Classifies `map`, which must send adjacent vertices to adjacent
/// vertices wherever both images exist.
pub fn classify_isometry(tree: &TruncatedTree, map: &dyn VertexMap) -> Result<TreeIsometryReport> {
    let n = tree.len();
    let images: Vec<Option<VertexId>> = (0..n).map(|v| map.image(v)).collect();
    if let Some((v, w)) = images.iter().enumerate().find_map(|(v, w)| w.filter(|&w| w >= n).map(|w| (v, w))) {
        return Err(Error::InvalidArgument(format!("vertex {v} is sent to {w}, outside the tree")));
    }
    for (u, v) in tree.edges() {
        if let (Some(a), Some(b)) = (images[u], images[v]) {
            if !tree.are_adjacent(a, b) {
                return Err(Error::NotAdjacencyPreserving(u, v, a, b));
            }
        }
    }
    let interior: Vec<VertexId> = tree.interior_vertices().collect();
    if interior.is_empty() {
        return Err(Error::NoInterior);
    }
    let visible: Vec<(VertexId, VertexId)> = interior
        .iter()
        .filter_map(|&v| images[v].map(|w| (v, w)))
        .collect();
    if visible.is_empty() {
        return Err(Error::InvalidArgument("map is undefined on every interior vertex".into()));
    }
    let mut window_limited = false;
    let disp: Vec<(VertexId, u32)> = visible.iter().map(|&(v, w)| (v, tree.distance(v, w))).collect();
    let ell = disp.iter().map(|&(_, d)| d).min().unwrap();

    let elliptic = |fixed: Vec<VertexId>, inverted: Option<(VertexId, VertexId)>, limited: bool| {
        TreeIsometryReport {
            kind: IsometryKind::Elliptic,
            min_displacement: ell,
            fixed_set_sample: fixed,
            inverted_edge: inverted,
            axis: Vec::new(),
            repelling: None,
            attracting: None,
            window_limited: limited,
        }
    };

    if ell == 0 {
        let fixed = disp
            .iter()
            .filter(|&&(_, d)| d == 0)
            .map(|&(v, _)| v)
            .take(FIXED_SAMPLE)
            .collect();
        return Ok(elliptic(fixed, None, window_limited));
    }
    if ell == 1 {
        let inverted = visible
            .iter()
            .find(|&&(v, w)| images[w] == Some(v))
            .map(|&(v, w)| (v.min(w), v.max(w)));
        if inverted.is_some() {
            return Ok(elliptic(Vec::new(), inverted, window_limited));
        }
    }

    // d(v, g²v) − d(v, gv) is the translation length at every vertex of
    // the full tree, so one vertex with g²v defined certifies the kind.
    let axis_set: Vec<VertexId> = disp.iter().filter(|&&(_, d)| d == ell).map(|&(v, _)| v).collect();
    let tau = axis_set
        .iter()
        .chain(visible.iter().map(|(v, _)| v))
        .find_map(|&v| {
            let gv = images[v]?;
            let ggv = images[gv]?;
            Some(tree.distance(v, ggv) as i64 - tree.distance(v, gv) as i64)
        });
    match tau {
        Some(t) if t <= 0 => return Ok(elliptic(Vec::new(), None, true)),
        Some(t) => window_limited |= t != ell as i64,
        None => window_limited = true,
    }

    let (axis, is_path) = order_as_path(tree, &axis_set);
    window_limited |= !is_path;
    let axis = orient_axis(tree, &images, axis, ell);
    Ok(TreeIsometryReport {
        kind: IsometryKind::Hyperbolic,
        min_displacement: ell,
        fixed_set_sample: Vec::new(),
        inverted_edge: None,
        repelling: axis.first().copied(),
        attracting: axis.last().copied(),
        axis,
        window_limited,
    })
}

/// Orders `set` as a path if it induces one; otherwise returns it sorted.
fn order_as_path(tree: &TruncatedTree, set: &[VertexId]) -> (Vec<VertexId>, bool) {
    let mut in_set = vec![false; tree.len()];
    for &v in set {
        in_set[v] = true;
    }
    let nbrs = |v: VertexId| tree.neighbors(v).iter().copied().filter(|&w| in_set[w]);
    let is_path_shape = set.iter().all(|&v| nbrs(v).count() <= 2)
        && set.iter().filter(|&&v| nbrs(v).count() <= 1).count() == 2.min(set.len());
    if !is_path_shape || set.is_empty() {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        return (sorted, set.len() == 1);
    }
    let start = *set.iter().filter(|&&v| nbrs(v).count() <= 1).min().unwrap();
    let mut path = vec![start];
    let mut prev = None;
    let mut cur = start;
    while let Some(next) = nbrs(cur).find(|&w| Some(w) != prev) {
        prev = Some(cur);
        cur = next;
        path.push(cur);
    }
    let complete = path.len() == set.len();
    if !complete {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        return (sorted, false);
    }
    (path, true)
}

/// Reverses `axis` if the map moves its first vertex away from the last.
fn orient_axis(
    tree: &TruncatedTree,
    images: &[Option<VertexId>],
    mut axis: Vec<VertexId>,
    ell: u32,
) -> Vec<VertexId> {
    if axis.len() < 2 {
        return axis;
    }
    let (first, last) = (axis[0], *axis.last().unwrap());
    let span = tree.distance(first, last);
    let forward = match (images[first], images[last]) {
        (Some(g0), _) => tree.distance(g0, last) < span + ell,
        (None, Some(gl)) => tree.distance(gl, first) >= span + ell,
        (None, None) => true,
    };
    if !forward {
        axis.reverse();
    }
    axis
}
