//! Normed integer lattices modelling flat groups.
//!
//! A flat group of rank `r` acting on its orbit of a minimizing subgroup
//! looks like `ℤʳ` with the translation-invariant metric
//!
//! ```text
//! d(w, z) = Σ_ρ weight_ρ · |z_ρ · (w − z)|
//! ```
//!
//! where each `z_ρ ∈ ℤʳ` is a functional and `weight_ρ` plays the role of
//! `log t_ρ`. Weights are positive rationals so that every distance and
//! every certificate stays exact. When `r ≥ 2` such a lattice is not
//! hyperbolic: a quadruple with positive deficiency exists, and the
//! deficiency grows linearly under the dilation `p ↦ λp`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::text::{format_rational, join, parse_rational, Rational, Record};

/// A point of `ℤʳ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn origin(rank: usize) -> Self {
        LatticePoint(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, lambda: i64) -> Self {
        LatticePoint(self.0.iter().map(|c| c * lambda).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", coords.join(","))
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

/// One functional `z_ρ` and its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functional {
    pub z: Vec<i64>,
    pub weight: Rational,
}

/// Rank, functionals and weights of a flat-group lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatLatticeModel {
    rank: usize,
    functionals: Vec<Functional>,
}

impl FlatLatticeModel {
    /// Validates the model. Functionals that agree up to sign describe the
    /// same term `|z·v|` and are merged by adding their weights.
    pub fn new(rank: usize, functionals: Vec<(Vec<i64>, Rational)>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidModel("rank must be positive".into()));
        }
        let mut merged: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
        for (z, weight) in functionals {
            if z.len() != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: z.len() });
            }
            if z.iter().all(|&c| c == 0) {
                return Err(Error::InvalidModel("functional is zero".into()));
            }
            if !weight.is_positive() {
                return Err(Error::InvalidModel(format!(
                    "weight {} is not positive",
                    format_rational(&weight)
                )));
            }
            let leading_negative = z.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0);
            let z = if leading_negative { z.iter().map(|c| -c).collect() } else { z };
            *merged.entry(z).or_insert_with(Rational::zero) += weight;
        }
        if merged.is_empty() {
            return Err(Error::InvalidModel("no functionals".into()));
        }
        let rows: Vec<Vec<i64>> = merged.keys().cloned().collect();
        if let Some(v) = integer_kernel_vector(&rows, rank) {
            return Err(Error::DegenerateKernel(v));
        }
        let functionals = merged
            .into_iter()
            .map(|(z, weight)| Functional { z, weight })
            .collect();
        Ok(FlatLatticeModel { rank, functionals })
    }

    /// Coordinate functionals `e_1, …, e_r`, all with weight 1.
    pub fn coordinate(rank: usize) -> Self {
        let functionals = (0..rank)
            .map(|i| {
                let mut z = vec![0; rank];
                z[i] = 1;
                (z, Rational::one())
            })
            .collect();
        Self::new(rank, functionals).expect("coordinate functionals are nondegenerate")
    }

    /// Builds a model from integer bases `t_ρ ≥ 2`, turning each into a
    /// weight with `standin`, which must be positive and strictly
    /// increasing on the supplied bases. Any such stand-in yields the same
    /// certificate structure as `log t_ρ`; only the numeric distances move.
    pub fn from_integer_bases(
        rank: usize,
        entries: Vec<(Vec<i64>, u64)>,
        standin: impl Fn(u64) -> Rational,
    ) -> Result<Self> {
        let mut weighted = Vec::with_capacity(entries.len());
        let mut seen: Vec<(u64, Rational)> = Vec::new();
        for (z, t) in entries {
            if t < 2 {
                return Err(Error::InvalidModel(format!("base t = {t} must be at least 2")));
            }
            let w = standin(t);
            for (s, ws) in &seen {
                if (*s < t) != (*ws < w) && *s != t {
                    return Err(Error::InvalidModel(format!(
                        "stand-in is not increasing between t = {s} and t = {t}"
                    )));
                }
            }
            seen.push((t, w.clone()));
            weighted.push((z, w));
        }
        Self::new(rank, weighted)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    fn check(&self, p: &LatticePoint) -> Result<()> {
        if p.rank() == self.rank {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.rank, got: p.rank() })
        }
    }

    /// `Σ weight_ρ · |z_ρ · (w − z)|`.
    pub fn distance(&self, w: &LatticePoint, z: &LatticePoint) -> Result<Rational> {
        self.check(w)?;
        self.check(z)?;
        Ok(self.distance_unchecked(w, z))
    }

    fn distance_unchecked(&self, w: &LatticePoint, z: &LatticePoint) -> Rational {
        let mut total = Rational::zero();
        for f in &self.functionals {
            let dot: i128 = f
                .z
                .iter()
                .zip(w.0.iter().zip(&z.0))
                .map(|(&c, (&a, &b))| c as i128 * (a as i128 - b as i128))
                .sum();
            if dot != 0 {
                total += &f.weight * BigInt::from(dot.unsigned_abs());
            }
        }
        total
    }

    pub fn norm(&self, p: &LatticePoint) -> Result<Rational> {
        self.distance(p, &LatticePoint::origin(self.rank))
    }

    /// Parses the model file format:
    ///
    /// ```text
    /// # comment
    /// rank: 2
    /// 1 0 | 1/1
    /// 0 1 | 3/2
    /// ```
    ///
    /// The rank line may also be a bare integer.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rank: Option<usize> = None;
        let mut functionals = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let Some(r) = rank else {
                let value = line.strip_prefix("rank").map_or(line, |rest| {
                    rest.trim_start().trim_start_matches(':').trim()
                });
                let r = value
                    .parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("expected rank, found `{line}`")))?;
                rank = Some(r);
                continue;
            };
            let (coords, weight) = line
                .split_once('|')
                .ok_or_else(|| Error::parse(lineno, "expected `z_1 ... z_r | weight`"))?;
            let z: Vec<i64> = coords
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(lineno, "malformed functional coordinates"))?;
            if z.len() != r {
                return Err(Error::parse(
                    lineno,
                    format!("functional has {} coordinates, rank is {r}", z.len()),
                ));
            }
            let weight = parse_rational(weight)
                .ok_or_else(|| Error::parse(lineno, format!("malformed weight `{}`", weight.trim())))?;
            functionals.push((z, weight));
        }
        let rank = rank.ok_or_else(|| Error::parse(0, "missing rank"))?;
        Self::new(rank, functionals)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("rank: {}\n", self.rank);
        for f in &self.functionals {
            out.push_str(&format!("{} | {}\n", join(&f.z), format_rational(&f.weight)));
        }
        out
    }
}

/// Rational `ln t` rounded to the nearest double, as an exact rational.
/// Increasing in `t` for every `t` representable as `u64`.
pub fn log_standin(t: u64) -> Rational {
    Rational::from_float((t as f64).ln()).expect("finite logarithm")
}

/// A nonzero integer vector in the common kernel of `rows`, if one exists.
fn integer_kernel_vector(rows: &[Vec<i64>], rank: usize) -> Option<Vec<i64>> {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| Rational::from_integer(c.into())).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..rank {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for c in 0..rank {
            m[row][c] = &m[row][c] * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for c in 0..rank {
                    let delta = &factor * &m[row][c];
                    m[i][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..rank).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); rank];
    v[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free].clone();
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Some(
        ints.iter()
            .map(|x| i64::try_from(x / &g).expect("kernel vector fits in i64"))
            .collect(),
    )
}

/// Points of `[−radius, radius]ʳ` in lexicographic order.
pub fn box_points(rank: usize, radius: u32) -> Vec<LatticePoint> {
    let r = radius as i64;
    let side = 2 * r + 1;
    let total = (side as usize).pow(rank as u32);
    (0..total)
        .map(|mut idx| {
            let mut coords = vec![0; rank];
            for c in coords.iter_mut().rev() {
                *c = (idx % side as usize) as i64 - r;
                idx /= side as usize;
            }
            LatticePoint(coords)
        })
        .collect()
}

/// The box `[−radius, radius]ʳ` as a finite metric space, with its points.
pub fn materialize_box(
    model: &FlatLatticeModel,
    radius: u32,
) -> Result<(Vec<LatticePoint>, FiniteMetricSpace)> {
    let points = box_points(model.rank, radius);
    let space = FiniteMetricSpace::from_fn(points.len(), |i, j| {
        model.distance_unchecked(&points[i], &points[j])
    })?;
    Ok((points, space))
}

/// Lexicographically least pair in the box with
/// `‖x+y‖ + ‖x−y‖ > ‖x‖ + ‖y‖`, if any.
pub fn norm_witness(model: &FlatLatticeModel, radius: u32) -> Option<(LatticePoint, LatticePoint)> {
    let points = box_points(model.rank, radius);
    let origin = LatticePoint::origin(model.rank);
    let norms: Vec<Rational> = points
        .iter()
        .map(|p| model.distance_unchecked(p, &origin))
        .collect();
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            let lhs = model.distance_unchecked(&x.add(y), &origin)
                + model.distance_unchecked(&x.sub(y), &origin);
            if lhs > &norms[i] + &norms[j] {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}

/// `min{(y·x)_w, (x·z)_w} − (y·z)_w` under the model metric. May be negative.
pub fn delta_lower_bound(
    model: &FlatLatticeModel,
    x: &LatticePoint,
    y: &LatticePoint,
    z: &LatticePoint,
    w: &LatticePoint,
) -> Result<Rational> {
    for p in [x, y, z, w] {
        model.check(p)?;
    }
    let d = |a: &LatticePoint, b: &LatticePoint| model.distance_unchecked(a, b);
    let two = Rational::from_integer(2.into());
    let gp = |a: &LatticePoint, b: &LatticePoint| (d(a, w) + d(b, w) - d(a, b)) / &two;
    Ok(gp(y, x).min(gp(x, z)) - gp(y, z))
}

/// A quadruple with positive deficiency and its exact behaviour under
/// dilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingCertificate {
    pub w: LatticePoint,
    pub x: LatticePoint,
    pub y: LatticePoint,
    pub z: LatticePoint,
    pub base_deficiency: Rational,
    pub lambdas: Vec<u64>,
    /// Deficiency of the dilated quadruple, one entry per `lambdas` entry.
    pub verified: Vec<Rational>,
}

impl ScalingCertificate {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("w", &self.w)
            .push("x", &self.x)
            .push("y", &self.y)
            .push("z", &self.z);
        r.push_rational("base-deficiency", &self.base_deficiency);
        for (l, d) in self.lambdas.iter().zip(&self.verified) {
            r.push("scaled", format!("{l} {}", format_rational(d)));
        }
        r
    }
}

/// Lexicographically least `(w, x, y, z)` in the box whose deficiency
/// `min{(y·x)_w, (x·z)_w} − (y·z)_w` is positive.
fn first_positive_quadruple(space: &FiniteMetricSpace) -> Option<[usize; 4]> {
    let n = space.len();
    if let Some(t) = space.scaled_integers() {
        let gp = |a: usize, b: usize, w: usize| t[a * n + w] + t[b * n + w] - t[a * n + b];
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let yx = gp(y, x, w);
                    for z in 0..n {
                        if yx.min(gp(x, z, w)) > gp(y, z, w) {
                            return Some([w, x, y, z]);
                        }
                    }
                }
            }
        }
        None
    } else {
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        // deficiency(w, y, z, x) is the same quantity, clamped at 0.
                        if space.deficiency(w, y, z, x).ok()?.is_positive() {
                            return Some([w, x, y, z]);
                        }
                    }
                }
            }
        }
        None
    }
}

/// Searches the box for a positive-deficiency quadruple and checks
/// `δ(λx, λy, λz)_{λw} = λ·δ(x, y, z)_w` for every requested `λ`.
/// Returns `Ok(None)` when the box holds no such quadruple.
pub fn non_hyperbolicity_certificate(
    model: &FlatLatticeModel,
    radius: u32,
    lambdas: &[u64],
) -> Result<Option<ScalingCertificate>> {
    if lambdas.is_empty() || lambdas.contains(&0) {
        return Err(Error::InvalidModel("lambdas must be a nonempty list of positive integers".into()));
    }
    let (points, space) = materialize_box(model, radius)?;
    let Some([w, x, y, z]) = first_positive_quadruple(&space) else {
        return Ok(None);
    };
    let (w, x, y, z) = (&points[w], &points[x], &points[y], &points[z]);
    let base = delta_lower_bound(model, x, y, z, w)?;
    debug_assert!(base.is_positive());
    let mut verified = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let li = i64::try_from(l).map_err(|_| Error::InvalidModel(format!("lambda {l} too large")))?;
        let got = delta_lower_bound(model, &x.scaled(li), &y.scaled(li), &z.scaled(li), &w.scaled(li))?;
        let expected = &base * Rational::from_integer(l.into());
        if got != expected {
            return Err(Error::ScalingViolation {
                lambda: l,
                expected: format_rational(&expected),
                got: format_rational(&got),
            });
        }
        verified.push(got);
    }
    Ok(Some(ScalingCertificate {
        w: w.clone(),
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        base_deficiency: base,
        lambdas: lambdas.to_vec(),
        verified,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::four_point_delta;
    use crate::text::{integer, rational};
    use proptest::prelude::*;

    fn p(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    fn line() -> FlatLatticeModel {
        FlatLatticeModel::new(1, vec![(vec![1], integer(1))]).unwrap()
    }

    fn three_functionals() -> FlatLatticeModel {
        FlatLatticeModel::new(
            2,
            vec![
                (vec![1, 0], integer(1)),
                (vec![0, 1], integer(1)),
                (vec![1, 1], integer(1)),
            ],
        )
        .unwrap()
    }

    /// Brute-force pair search written against the plain L1 formula.
    fn l1_norm_pairs(radius: i64) -> Option<(Vec<i64>, Vec<i64>)> {
        let l1 = |v: [i64; 2]| v[0].abs() + v[1].abs();
        let pts: Vec<[i64; 2]> = (-radius..=radius)
            .flat_map(|a| (-radius..=radius).map(move |b| [a, b]))
            .collect();
        for x in &pts {
            for y in &pts {
                let s = [x[0] + y[0], x[1] + y[1]];
                let d = [x[0] - y[0], x[1] - y[1]];
                if l1(s) + l1(d) > l1(*x) + l1(*y) {
                    return Some((x.to_vec(), y.to_vec()));
                }
            }
        }
        None
    }

    #[test]
    fn distance_examples() {
        let m = FlatLatticeModel::coordinate(2);
        assert_eq!(m.distance(&p(&[0, 0]), &p(&[2, -3])).unwrap(), integer(5));
        assert_eq!(m.distance(&p(&[4, 1]), &p(&[4, 1])).unwrap(), integer(0));
        assert_eq!(line().distance(&p(&[0]), &p(&[-7])).unwrap(), integer(7));
        assert_eq!(
            m.distance(&p(&[0]), &p(&[1, 1])).unwrap_err(),
            Error::DimensionMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn degenerate_models_are_rejected() {
        let err = FlatLatticeModel::new(2, vec![(vec![1, 0], integer(1))]).unwrap_err();
        assert_eq!(err, Error::DegenerateKernel(vec![0, 1]));
        let err = FlatLatticeModel::new(3, vec![(vec![1, 1, 0], integer(1)), (vec![0, 1, 1], integer(2))])
            .unwrap_err();
        assert_eq!(err, Error::DegenerateKernel(vec![1, -1, 1]));
        assert!(FlatLatticeModel::new(1, vec![(vec![0], integer(1))]).is_err());
        assert!(FlatLatticeModel::new(1, vec![(vec![1], integer(0))]).is_err());
        assert!(FlatLatticeModel::new(0, vec![]).is_err());
    }

    #[test]
    fn repeated_functionals_merge() {
        let m = FlatLatticeModel::new(
            1,
            vec![(vec![2], rational(1, 2)), (vec![-2], rational(1, 3))],
        )
        .unwrap();
        assert_eq!(m.functionals().len(), 1);
        assert_eq!(m.functionals()[0].weight, rational(5, 6));
        assert_eq!(m.distance(&p(&[0]), &p(&[3])).unwrap(), integer(5));
    }

    #[test]
    fn integer_bases_use_increasing_standin() {
        let m = FlatLatticeModel::from_integer_bases(
            2,
            vec![(vec![1, 0], 2), (vec![0, 1], 3)],
            log_standin,
        )
        .unwrap();
        let weight_of = |z: &[i64]| {
            m.functionals().iter().find(|f| f.z == z).unwrap().weight.clone()
        };
        assert!(weight_of(&[1, 0]) < weight_of(&[0, 1]));
        assert!(FlatLatticeModel::from_integer_bases(1, vec![(vec![1], 1)], log_standin).is_err());
        let decreasing = |t: u64| rational(1, t as i64);
        assert!(FlatLatticeModel::from_integer_bases(
            2,
            vec![(vec![1, 0], 2), (vec![0, 1], 3)],
            decreasing
        )
        .is_err());
    }

    #[test]
    fn model_text_roundtrip_and_errors() {
        let m = FlatLatticeModel::parse("# plane\nrank: 2\n1 0 | 1/1\n0 1 | 3/2\n").unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(FlatLatticeModel::parse(&m.to_text()).unwrap(), m);
        assert_eq!(FlatLatticeModel::parse("1\n1 | 2\n").unwrap().functionals()[0].weight, integer(2));
        assert!(matches!(
            FlatLatticeModel::parse("rank: 2\n1 0 1 | 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(FlatLatticeModel::parse("rank: 2\n1 0 | x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(FlatLatticeModel::parse("rank: 2\n1 0 | 1\n"), Err(Error::DegenerateKernel(_))));
    }

    #[test]
    fn norm_witness_plane() {
        let m = FlatLatticeModel::coordinate(2);
        let (x, y) = norm_witness(&m, 1).unwrap();
        let expect = l1_norm_pairs(1).unwrap();
        assert_eq!((x.0.clone(), y.0.clone()), expect);
        let lhs = m.norm(&x.add(&y)).unwrap() + m.norm(&x.sub(&y)).unwrap();
        assert!(lhs > m.norm(&x).unwrap() + m.norm(&y).unwrap());
        // The pair quoted as an example also satisfies it.
        let (a, b) = (p(&[1, 0]), p(&[0, 1]));
        assert_eq!(m.norm(&a.add(&b)).unwrap() + m.norm(&a.sub(&b)).unwrap(), integer(4));
    }

    /// On a line ‖x+y‖ + ‖x−y‖ = 2·max(|x|, |y|), which exceeds |x| + |y|
    /// whenever |x| ≠ |y|. So the strict inequality has witnesses in rank 1
    /// too; only the certificate search separates rank 1 from rank 2.
    #[test]
    fn norm_witness_line() {
        for r in 1..=10 {
            let (x, y) = norm_witness(&line(), r).unwrap();
            assert_eq!((x, y), (p(&[-(r as i64)]), p(&[-(r as i64) + 1])));
            assert!(non_hyperbolicity_certificate(&line(), r, &[1]).unwrap().is_none());
        }
    }

    #[test]
    fn norm_witness_three_functionals() {
        assert!(norm_witness(&three_functionals(), 2).is_some());
    }

    #[test]
    fn delta_lower_bound_examples() {
        let plane = FlatLatticeModel::coordinate(2);
        let o = p(&[0, 0]);
        assert_eq!(delta_lower_bound(&plane, &o, &o, &o, &o).unwrap(), integer(0));
        assert_eq!(
            delta_lower_bound(&line(), &p(&[2]), &p(&[1]), &p(&[3]), &p(&[0])).unwrap(),
            integer(0)
        );
        // L1 distances: d(x,w)=d(y,w)=d(z,w)=2, d(x,y)=d(x,z)=2, d(y,z)=4.
        // (y·x)_w = 1, (x·z)_w = 1, (y·z)_w = 0.
        assert_eq!(
            delta_lower_bound(&plane, &p(&[1, 1]), &p(&[2, 0]), &p(&[0, 2]), &o).unwrap(),
            integer(1)
        );
    }

    #[test]
    fn plane_certificate_scales_linearly() {
        let m = FlatLatticeModel::coordinate(2);
        let cert = non_hyperbolicity_certificate(&m, 2, &[1, 2, 4, 8]).unwrap().unwrap();
        assert!(cert.base_deficiency.is_positive());
        for (l, d) in cert.lambdas.iter().zip(&cert.verified) {
            assert_eq!(*d, &cert.base_deficiency * integer(*l as i64));
        }
        let single = non_hyperbolicity_certificate(&m, 2, &[1]).unwrap().unwrap();
        assert_eq!(single.verified.len(), 1);
        assert!(non_hyperbolicity_certificate(&m, 2, &[]).is_err());
    }

    #[test]
    fn line_has_no_certificate() {
        assert_eq!(non_hyperbolicity_certificate(&line(), 5, &[1, 2]).unwrap(), None);
        let weighted = FlatLatticeModel::new(1, vec![(vec![3], rational(7, 5))]).unwrap();
        assert_eq!(non_hyperbolicity_certificate(&weighted, 5, &[1]).unwrap(), None);
    }

    #[test]
    fn certificate_found_where_norm_witness_exists() {
        for m in [FlatLatticeModel::coordinate(2), three_functionals(), FlatLatticeModel::coordinate(3)] {
            for r in 1..=2 {
                if norm_witness(&m, r).is_some() {
                    assert!(non_hyperbolicity_certificate(&m, r, &[1, 3]).unwrap().is_some());
                }
            }
        }
    }

    #[test]
    fn box_is_a_metric_space_and_rank_one_boxes_are_trees() {
        let (pts, space) = materialize_box(&three_functionals(), 2).unwrap();
        assert_eq!(pts.len(), 25);
        assert!(four_point_delta(&space).delta.is_positive());
        let (_, line_space) = materialize_box(&line(), 6).unwrap();
        assert_eq!(four_point_delta(&line_space).delta, integer(0));
    }

    fn arb_model() -> impl Strategy<Value = FlatLatticeModel> {
        (1usize..=3).prop_flat_map(|r| {
            proptest::collection::vec(
                (proptest::collection::vec(-3i64..=3, r), 1i64..6, 1i64..4),
                r..r + 3,
            )
            .prop_filter_map("degenerate", move |fs| {
                FlatLatticeModel::new(
                    r,
                    fs.into_iter().map(|(z, a, b)| (z, rational(a, b))).collect(),
                )
                .ok()
            })
        })
    }

    fn arb_point(r: usize) -> impl Strategy<Value = LatticePoint> {
        proptest::collection::vec(-20i64..=20, r).prop_map(LatticePoint)
    }

    proptest! {
        #[test]
        fn metric_laws(
            (m, a, b, v) in arb_model().prop_flat_map(|m| {
                let r = m.rank();
                (Just(m), arb_point(r), arb_point(r), arb_point(r))
            }),
            lambda in 1i64..50,
        ) {
            let d = m.distance(&a, &b).unwrap();
            prop_assert_eq!(&d, &m.distance(&b, &a).unwrap());
            prop_assert_eq!(d.is_zero(), a == b);
            prop_assert_eq!(&d, &m.distance(&a.add(&v), &b.add(&v)).unwrap());
            prop_assert_eq!(
                m.distance(&a.scaled(lambda), &b.scaled(lambda)).unwrap(),
                &d * integer(lambda)
            );
        }

        #[test]
        fn lower_bound_is_homogeneous(
            (m, pts) in arb_model().prop_flat_map(|m| {
                let r = m.rank();
                (Just(m), proptest::collection::vec(arb_point(r), 4))
            }),
            lambda in 1i64..30,
        ) {
            let base = delta_lower_bound(&m, &pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
            let s: Vec<LatticePoint> = pts.iter().map(|p| p.scaled(lambda)).collect();
            prop_assert_eq!(
                delta_lower_bound(&m, &s[0], &s[1], &s[2], &s[3]).unwrap(),
                base * integer(lambda)
            );
        }
    }
}
