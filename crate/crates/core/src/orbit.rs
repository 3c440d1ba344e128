//! Orbits of finitely generated groups of partial tree maps.
//!
//! Orbits are saturated breadth first: from each discovered vertex the
//! generators are applied in order, then their inverses. The first word
//! reaching a vertex is its section word. An orbit is *window-limited*
//! when some generator or inverse had no image at an orbit vertex, so the
//! true orbit may be larger.

use std::collections::VecDeque;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::metric::{qi_defect, FiniteMetricSpace, Graph, QiDefect};
use crate::text::{format_reduced, join, Rational, Record};
use crate::tree::{MapTable, TruncatedTree, VertexId, VertexMap};

/// Consecutive equal ratios needed before a growth trace counts as stabilized.
pub const STABLE_RATIOS: usize = 3;

/// One generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

/// A finite list of partial vertex maps with their inverses.
#[derive(Debug, Clone)]
pub struct GeneratedAction {
    n: usize,
    generators: Vec<MapTable>,
    inverses: Vec<MapTable>,
}

impl GeneratedAction {
    /// Checks that every generator is injective, stays on `0..n`, and maps
    /// edges of `tree` to edges wherever both ends have images.
    pub fn new(tree: &TruncatedTree, generators: Vec<MapTable>) -> Result<Self> {
        let n = tree.len();
        let mut inverses = Vec::with_capacity(generators.len());
        for g in &generators {
            if g.0.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.0.len() });
            }
            if let Some((v, w)) = g.0.iter().enumerate().find_map(|(v, w)| w.filter(|&w| w >= n).map(|w| (v, w))) {
                return Err(Error::MapOutOfRange { source_point: v, image: w, len: n });
            }
            for (u, v) in tree.edges() {
                if let (Some(a), Some(b)) = (g.image(u), g.image(v)) {
                    if !tree.are_adjacent(a, b) {
                        return Err(Error::NotAdjacencyPreserving(u, v, a, b));
                    }
                }
            }
            inverses.push(g.inverse()?);
        }
        Ok(GeneratedAction { n, generators, inverses })
    }

    /// Tabulates arbitrary vertex maps on `tree`.
    pub fn from_maps(tree: &TruncatedTree, maps: &[&dyn VertexMap]) -> Result<Self> {
        let tables = maps.iter().map(|m| MapTable::from_map(tree.len(), *m)).collect();
        Self::new(tree, tables)
    }

    pub fn generators(&self) -> &[MapTable] {
        &self.generators
    }

    pub fn apply(&self, letter: Letter, v: VertexId) -> Option<VertexId> {
        let table = if letter.inverse { &self.inverses } else { &self.generators };
        table[letter.generator].image(v)
    }

    /// Applies `word` right to left, as a composition of maps.
    pub fn apply_word(&self, word: &[Letter], v: VertexId) -> Option<VertexId> {
        word.iter().rev().try_fold(v, |x, &l| self.apply(l, x))
    }

    fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        let forward = (0..self.generators.len()).map(|generator| Letter { generator, inverse: false });
        let backward = (0..self.generators.len()).map(|generator| Letter { generator, inverse: true });
        forward.chain(backward)
    }
}

/// A saturated orbit with the first-discovered word for each point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Points in discovery order; the first is the basepoint.
    pub points: Vec<VertexId>,
    /// Incoming letter and predecessor index for every point but the first.
    pub steps: Vec<Option<(Letter, usize)>>,
    pub window_limited: bool,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Section word of the `i`-th point: applying it to the basepoint
    /// reaches that point.
    pub fn word(&self, mut i: usize) -> Vec<Letter> {
        let mut word = Vec::new();
        while let Some((letter, prev)) = self.steps[i] {
            word.push(letter);
            i = prev;
        }
        word
    }
}

/// Least generator-closed set containing `v` within the window.
pub fn orbit(action: &GeneratedAction, v: VertexId) -> Result<Orbit> {
    if v >= action.n {
        return Err(Error::IndexOutOfRange { index: v, len: action.n });
    }
    let mut slot = vec![usize::MAX; action.n];
    slot[v] = 0;
    let mut orbit = Orbit { points: vec![v], steps: vec![None], window_limited: false };
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let x = orbit.points[i];
        for letter in action.letters() {
            match action.apply(letter, x) {
                None => orbit.window_limited = true,
                Some(y) if slot[y] == usize::MAX => {
                    slot[y] = orbit.points.len();
                    orbit.points.push(y);
                    orbit.steps.push(Some((letter, i)));
                    queue.push_back(slot[y]);
                }
                Some(_) => {}
            }
        }
    }
    Ok(orbit)
}

/// Orbit sizes `|V·h⁻ⁿ·v|` for `n = 1..=N` and their consecutive ratios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitGrowthTrace {
    pub sizes: Vec<usize>,
    pub ratios: Vec<Rational>,
    /// The common value of the last [`STABLE_RATIOS`] ratios, when they agree.
    pub scale: Option<Rational>,
    pub steps_requested: usize,
    /// `h⁻ⁿ·v` left the window before `N` steps.
    pub exhausted: bool,
    /// Some orbit saturation met the window boundary.
    pub window_limited: bool,
}

impl OrbitGrowthTrace {
    /// A scale was read off and no truncation effect was seen.
    pub fn is_conclusive(&self) -> bool {
        self.scale.is_some() && !self.exhausted && !self.window_limited
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("sizes", join(&self.sizes));
        r.push("ratios", join(self.ratios.iter().map(format_reduced)));
        match &self.scale {
            Some(s) => r.push("scale", format_reduced(s)),
            None => r.push("scale", "not-stabilized"),
        };
        r.push("steps", format!("{} of {}", self.sizes.len(), self.steps_requested));
        r.push("window-limited", self.window_limited || self.exhausted);
        r
    }
}

/// Orbit-growth estimate of the scale of `h` relative to the group
/// generated by `action`.
pub fn orbit_growth_scale(
    action: &GeneratedAction,
    h: &dyn VertexMap,
    v: VertexId,
    steps: usize,
) -> Result<OrbitGrowthTrace> {
    let h_inv = MapTable::from_map(action.n, h).inverse()?;
    let mut trace = OrbitGrowthTrace {
        sizes: Vec::with_capacity(steps),
        ratios: Vec::new(),
        scale: None,
        steps_requested: steps,
        exhausted: false,
        window_limited: false,
    };
    let mut x = v;
    for _ in 0..steps {
        match h_inv.image(x) {
            Some(y) => x = y,
            None => {
                trace.exhausted = true;
                break;
            }
        }
        let o = orbit(action, x)?;
        trace.window_limited |= o.window_limited;
        trace.sizes.push(o.len());
    }
    trace.ratios = trace
        .sizes
        .windows(2)
        .map(|p| Rational::new(p[1].into(), p[0].into()))
        .collect();
    if trace.ratios.len() >= STABLE_RATIOS {
        let tail = &trace.ratios[trace.ratios.len() - STABLE_RATIOS..];
        if tail.iter().all(|r| *r == tail[0]) {
            trace.scale = Some(tail[0].clone());
        }
    }
    Ok(trace)
}

/// The orbit of `x` joined at tree distance at most `2k+1`, together
/// with the tree vertex behind each graph vertex (ascending).
pub fn rough_cayley_graph(
    tree: &TruncatedTree,
    action: &GeneratedAction,
    x: VertexId,
    k: u32,
) -> Result<(Graph, Vec<VertexId>)> {
    let o = orbit(action, x)?;
    let mut inside = vec![false; tree.len()];
    for &p in &o.points {
        inside[p] = true;
    }
    if let Some(v) = tree.interior_vertices().find(|&v| !inside[v]) {
        return Err(Error::Intransitive(v));
    }
    let mut vertices = o.points;
    vertices.sort_unstable();
    let reach = 2 * k + 1;
    let mut edges = Vec::new();
    for (i, &a) in vertices.iter().enumerate() {
        let dist = tree.distances_from(a);
        for (j, &b) in vertices.iter().enumerate().skip(i + 1) {
            if dist[b] <= reach {
                edges.push((i, j));
            }
        }
    }
    Ok((Graph::new(vertices.len(), edges)?, vertices))
}

/// Tree metric restricted to `points`.
fn tree_subspace(tree: &TruncatedTree, points: &[VertexId]) -> FiniteMetricSpace {
    let m = points.len();
    let mut table = Vec::with_capacity(m * m);
    for &a in points {
        let dist = tree.distances_from(a);
        table.extend(points.iter().map(|&b| dist[b]));
    }
    FiniteMetricSpace::from_hop_counts(m, table)
}

/// Defect of `α·M ↦ α·N`, with `α` the section word of each point of
/// the orbit of `M`, as a map from that orbit onto the orbit of `N`.
pub fn orbit_map_defect(
    tree: &TruncatedTree,
    action: &GeneratedAction,
    m: VertexId,
    n: VertexId,
) -> Result<QiDefect> {
    let om = orbit(action, m)?;
    let on = orbit(action, n)?;
    let mut slot = vec![usize::MAX; tree.len()];
    for (i, &p) in on.points.iter().enumerate() {
        slot[p] = i;
    }
    let mut map = Vec::with_capacity(om.len());
    for (i, &p) in om.points.iter().enumerate() {
        let image = action.apply_word(&om.word(i), n).ok_or(Error::SectionIncomplete(p))?;
        map.push(slot[image]);
    }
    if om.is_empty() || on.is_empty() {
        return Ok(QiDefect { additive_defect: Rational::zero(), density_defect: Rational::zero() });
    }
    qi_defect(&map, &tree_subspace(tree, &om.points), &tree_subspace(tree, &on.points))
}
