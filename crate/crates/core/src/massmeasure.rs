//! Normalized measures on a truncated tree, exact ball masses, and the urn that
//! tracks the mass of a subtree as segments are glued.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IcrtError, Result};
use crate::measure::MuRealization;
use crate::rtree::{IcrtTree, Skeleton, TreePoint};
use crate::stickbreak::CutSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// `mu` restricted to `[0, l]`, normalized.
    MuNormalized,
    /// Length measure on `[0, l]`, normalized.
    LengthNormalized,
    /// Uniform over the cuts `Y_i <= l`.
    CutCounting,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] =
        [MeasureKind::MuNormalized, MeasureKind::LengthNormalized, MeasureKind::CutCounting];

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::MuNormalized => "mu_normalized",
            MeasureKind::LengthNormalized => "length_normalized",
            MeasureKind::CutCounting => "cut_counting",
        }
    }
}

/// A probability measure on `T_l`.
pub struct EmpiricalMeasure<'a> {
    kind: MeasureKind,
    tree: &'a IcrtTree,
    mu: &'a MuRealization,
    level: f64,
    skeleton: Skeleton,
    total: f64,
}

impl<'a> EmpiricalMeasure<'a> {
    pub fn new(kind: MeasureKind, tree: &'a IcrtTree, mu: &'a MuRealization, l: f64) -> Result<Self> {
        let skeleton = tree.skeleton(l)?;
        let total = match kind {
            MeasureKind::MuNormalized => mu.mass(l)?,
            MeasureKind::LengthNormalized => l,
            MeasureKind::CutCounting => tree.ends().partition_point(|&y| y <= l) as f64,
        };
        if !(total > 0.0) {
            return Err(IcrtError::EmptyMeasure);
        }
        Ok(EmpiricalMeasure { kind, tree, mu, level: l, skeleton, total })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }
    pub fn level(&self) -> f64 {
        self.level
    }
    /// Mass before normalization: `mu[0,l]`, `l`, or the number of cuts.
    pub fn normalizer(&self) -> f64 {
        self.total
    }
    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    /// Unnormalized mass of `(a, b]`, or `[a, b]` when `closed`.
    fn raw(&self, a: f64, b: f64, closed: bool) -> f64 {
        if b < a {
            return 0.0;
        }
        match self.kind {
            MeasureKind::MuNormalized => {
                let m = if closed { self.mu.closed_interval_mass(a, b) } else { self.mu.interval_mass(a, b) };
                m.expect("interval inside the truncation level")
            }
            MeasureKind::LengthNormalized => b - a,
            MeasureKind::CutCounting => {
                let ends = self.tree.ends();
                let hi = ends.partition_point(|&y| y <= b);
                let lo = if closed { ends.partition_point(|&y| y < a) } else { ends.partition_point(|&y| y <= a) };
                (hi - lo) as f64
            }
        }
    }

    /// Mass of the points of edge `v` within `eps` of a point at distance `d_lo`
    /// from its bottom end and `d_hi` from its top end.
    fn edge_ball(&self, v: usize, d_lo: f64, d_hi: f64, eps: f64) -> f64 {
        let (lo, hi) = (self.skeleton.lo[v], self.skeleton.coords[v]);
        let a = eps - d_lo;
        let b = eps - d_hi;
        if a < 0.0 && b < 0.0 {
            return 0.0;
        }
        if a >= 0.0 && b >= 0.0 && a + b >= hi - lo {
            return self.raw(lo, hi, false);
        }
        let mut m = 0.0;
        if a >= 0.0 {
            m += self.raw(lo, (lo + a).min(hi), false);
        }
        if b >= 0.0 {
            m += self.raw((hi - b).max(lo), hi, (hi - b) > lo);
        }
        m
    }

    /// `p(B(center, eps))` for the closed ball. Centers outside `T_l` are
    /// handled through their projection.
    pub fn ball_mass(&self, center: TreePoint, eps: f64) -> Result<f64> {
        if !(eps >= 0.0) {
            return Err(IcrtError::InvalidParameter(format!("radius {eps}")));
        }
        let q = self.tree.project(center, self.level.min(self.tree.total_length()))?;
        let eps = eps - (self.tree.depth(center) - self.tree.depth(q));
        if eps < 0.0 {
            return Ok(0.0);
        }
        let sk = &self.skeleton;
        let x = q.coord;
        let start = sk.node_of(x);
        let n = sk.len();
        let mut dist = vec![f64::NAN; n];
        let mut stack = Vec::new();
        let mut mass = 0.0;
        if start == 0 {
            dist[0] = 0.0;
            stack.push(0);
        } else {
            let p = sk.parent[start] as usize;
            dist[start] = sk.coords[start] - x;
            dist[p] = x - sk.lo[start];
            // the ball around x within its own edge
            let (lo, hi) = (sk.lo[start], sk.coords[start]);
            mass += self.raw((x - eps).max(lo), (x + eps).min(hi), x - eps > lo);
            for u in [start, p] {
                if dist[u] <= eps {
                    stack.push(u);
                }
            }
        }
        while let Some(u) = stack.pop() {
            for &c in sk.children(u) {
                let c = c as usize;
                if dist[c].is_nan() {
                    dist[c] = dist[u] + sk.edge_len(c);
                    mass += self.edge_ball(c, dist[u], dist[c], eps);
                    if dist[c] <= eps {
                        stack.push(c);
                    }
                }
            }
            if u != 0 {
                let p = sk.parent[u] as usize;
                if dist[p].is_nan() {
                    dist[p] = dist[u] + sk.edge_len(u);
                    mass += self.edge_ball(u, dist[p], dist[u], eps);
                    if dist[p] <= eps {
                        stack.push(p);
                    }
                }
            }
        }
        Ok((mass / self.total).min(1.0))
    }

    /// Draws a point from the measure.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> TreePoint {
        let l = self.level;
        let x = match self.kind {
            MeasureKind::MuNormalized => {
                let u = rng.random::<f64>() * self.total;
                let drift_part = self.mu.drift() * l;
                if u < drift_part {
                    u / self.mu.drift()
                } else {
                    let k = self.mu.atoms_upto(l);
                    self.mu.positions()[self.mu.atom_by_cumulative(u - drift_part, k)]
                }
            }
            MeasureKind::LengthNormalized => rng.random::<f64>() * l,
            MeasureKind::CutCounting => {
                let k = self.total as usize;
                self.tree.ends()[rng.random_range(0..k)]
            }
        };
        self.tree.point(x.min(l)).expect("sampled inside the tree")
    }

    /// `p(f)` for a test function.
    pub fn integrate(&self, f: &TestFunction) -> Result<f64> {
        if let TestFunction::Constant = f {
            return Ok(1.0);
        }
        let anchor = self.tree.point(f.anchor())?;
        let q = self.tree.project(anchor, self.level)?;
        let off = self.tree.depth(anchor) - self.tree.depth(q);
        let value = match self.kind {
            MeasureKind::LengthNormalized | MeasureKind::MuNormalized => {
                let drift = if self.kind == MeasureKind::MuNormalized { self.mu.drift() } else { 1.0 };
                let mut acc = 0.0;
                if drift > 0.0 {
                    acc += drift * self.drift_integral(f, q.coord, off);
                }
                if self.kind == MeasureKind::MuNormalized {
                    let k = self.mu.atoms_upto(self.level);
                    for j in 0..k {
                        let p = self.tree.point(self.mu.positions()[j])?;
                        acc += self.mu.weights()[j] * f.profile(self.tree.distance(anchor, p));
                    }
                }
                acc
            }
            MeasureKind::CutCounting => {
                let k = self.total as usize;
                let mut acc = 0.0;
                for &y in &self.tree.ends()[..k] {
                    acc += f.profile(self.tree.distance(anchor, self.tree.point(y)?));
                }
                acc
            }
        };
        Ok(value / self.total)
    }

    /// `int_{T_l} g(off + d(a, x)) dx` over the length measure.
    fn drift_integral(&self, f: &TestFunction, a: f64, off: f64) -> f64 {
        let sk = &self.skeleton;
        let dist = sk.distances_from(a);
        let va = sk.node_of(a);
        let big = |d: f64| f.antiderivative(off + d);
        let mut total = 0.0;
        for v in 1..sk.len() {
            let (lo, hi) = (sk.lo[v], sk.coords[v]);
            let len = hi - lo;
            total += if v == va && a > lo {
                (big(a - lo) - big(0.0)) + (big(hi - a) - big(0.0))
            } else if sk.is_ancestor(v, va) {
                big(dist[v] + len) - big(dist[v])
            } else {
                let p = sk.parent[v] as usize;
                big(dist[p] + len) - big(dist[p])
            };
        }
        total
    }

    /// Largest single-point mass among the atoms of `T_l`.
    pub fn max_point_mass(&self) -> f64 {
        match self.kind {
            MeasureKind::MuNormalized => {
                let k = self.mu.atoms_upto(self.level);
                self.mu.weights()[..k].iter().cloned().fold(0.0, f64::max) / self.total
            }
            MeasureKind::LengthNormalized => 0.0,
            MeasureKind::CutCounting => 1.0 / self.total,
        }
    }
}

/// Bounded 1-Lipschitz functions of the distance to an anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant,
    /// `min(d(0, x), 1)`.
    DepthCapped,
    /// `max(0, 1 - d(anchor, x))`.
    Tent { anchor: f64 },
}

impl TestFunction {
    pub fn id(&self) -> String {
        match self {
            TestFunction::Constant => "const".into(),
            TestFunction::DepthCapped => "depth1".into(),
            TestFunction::Tent { anchor } => format!("tent@{anchor}"),
        }
    }

    fn anchor(&self) -> f64 {
        match self {
            TestFunction::Tent { anchor } => *anchor,
            _ => 0.0,
        }
    }

    /// Value as a function of the distance to the anchor.
    pub fn profile(&self, d: f64) -> f64 {
        match self {
            TestFunction::Constant => 1.0,
            TestFunction::DepthCapped => d.min(1.0),
            TestFunction::Tent { .. } => (1.0 - d).max(0.0),
        }
    }

    /// `int_0^d profile`.
    fn antiderivative(&self, d: f64) -> f64 {
        match self {
            TestFunction::Constant => d,
            TestFunction::DepthCapped => {
                if d <= 1.0 {
                    0.5 * d * d
                } else {
                    d - 0.5
                }
            }
            TestFunction::Tent { .. } => {
                if d <= 1.0 {
                    d - 0.5 * d * d
                } else {
                    0.5
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub level: f64,
    pub measure: MeasureKind,
    pub function: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<DiagnosticRow>,
    /// `|p_{l_{k+1}}(f) - p_{l_k}(f)|` per (measure, function), in grid order.
    pub increments: Vec<(MeasureKind, String, Vec<f64>)>,
    /// Largest atom share of the normalized measure at each level.
    pub max_point_mass: Vec<f64>,
}

impl ConvergenceTable {
    pub fn value(&self, level: f64, measure: MeasureKind, function: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.level == level && r.measure == measure && r.function == function)
            .map(|r| r.value)
    }
}

/// Evaluates every test function under the three measures along `levels`.
pub fn convergence_diagnostic(
    tree: &IcrtTree,
    mu: &MuRealization,
    levels: &[f64],
    functions: &[TestFunction],
) -> Result<ConvergenceTable> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(IcrtError::InvalidParameter("levels must increase".into()));
    }
    let mut rows = Vec::new();
    let mut max_point_mass = Vec::new();
    for &l in levels {
        for kind in MeasureKind::ALL {
            let m = EmpiricalMeasure::new(kind, tree, mu, l)?;
            if kind == MeasureKind::MuNormalized {
                max_point_mass.push(m.max_point_mass());
            }
            for f in functions {
                rows.push(DiagnosticRow { level: l, measure: kind, function: f.id(), value: m.integrate(f)? });
            }
        }
    }
    let mut increments = Vec::new();
    for kind in MeasureKind::ALL {
        for f in functions {
            let id = f.id();
            let series: Vec<f64> = rows
                .iter()
                .filter(|r| r.measure == kind && r.function == id)
                .map(|r| r.value)
                .collect();
            increments.push((kind, id, series.windows(2).map(|w| (w[1] - w[0]).abs()).collect()));
        }
    }
    Ok(ConvergenceTable { rows, increments, max_point_mass })
}

/// Subtree mass `A_i` against total mass `M_i` for `i = start..`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UrnTrajectory {
    pub start: usize,
    pub a_values: Vec<f64>,
    pub m_values: Vec<f64>,
}

impl UrnTrajectory {
    pub fn ratios(&self) -> Vec<f64> {
        self.a_values.iter().zip(&self.m_values).map(|(a, m)| a / m).collect()
    }

    /// `sup_i |A_i/M_i - A_start/M_start|`.
    pub fn max_deviation(&self) -> f64 {
        let r = self.ratios();
        let r0 = r[0];
        r.iter().map(|x| (x - r0).abs()).fold(0.0, f64::max)
    }
}

/// Which part of `T_{Y_a}` the urn follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtree {
    Empty,
    /// Segment `s` (1-based, `s <= a`) and everything hanging from it.
    Hanging(usize),
}

/// Replays the gluing after cut `a` (1-based) and records the mass of the
/// subtree together with the total mass.
pub fn urn_track(cuts: &CutSequence, mu: &MuRealization, a: usize, subtree: Subtree) -> Result<UrnTrajectory> {
    let n = cuts.len();
    if a == 0 || a > n {
        return Err(IcrtError::InvalidParameter(format!("urn start {a} outside 1..={n}")));
    }
    let tree = IcrtTree::build(cuts)?;
    let seg_mass: Vec<f64> = if cuts.seg_mass.len() == n {
        cuts.seg_mass.clone()
    } else {
        let mut prev = 0.0;
        cuts.y
            .iter()
            .map(|&y| {
                let m = mu.mass(y)?;
                let d = m - prev;
                prev = m;
                Ok(d)
            })
            .collect::<Result<_>>()?
    };
    let mut member = vec![false; n];
    if let Subtree::Hanging(s) = subtree {
        if s == 0 || s > a {
            return Err(IcrtError::InvalidParameter(format!("subtree segment {s} outside 1..={a}")));
        }
        let root = s - 1;
        member[root] = true;
        for k in root + 1..n {
            // parents precede children, so membership propagates in one pass
            member[k] = tree.parent(k).is_some_and(|p| member[p]);
        }
    }
    let (mut acc_a, mut acc_m) = (0.0, 0.0);
    let mut a_values = Vec::with_capacity(n - a + 1);
    let mut m_values = Vec::with_capacity(n - a + 1);
    for k in 0..n {
        acc_m += seg_mass[k];
        if member[k] {
            acc_a += seg_mass[k];
        }
        if k + 1 >= a {
            a_values.push(acc_a);
            m_values.push(acc_m);
        }
    }
    Ok(UrnTrajectory { start: a, a_values, m_values })
}

/// A generalized urn: at step `i` the marked mass grows by `increment(i)` with
/// probability `A/M`, and the total always does.
pub fn simulate_urn<R: Rng + ?Sized, F: Fn(usize) -> f64>(
    a0: f64,
    m0: f64,
    increment: F,
    steps: usize,
    rng: &mut R,
) -> UrnTrajectory {
    let (mut a, mut m) = (a0, m0);
    let mut a_values = Vec::with_capacity(steps + 1);
    let mut m_values = Vec::with_capacity(steps + 1);
    a_values.push(a);
    m_values.push(m);
    for i in 1..=steps {
        let w = increment(i);
        if rng.random::<f64>() * m < a {
            a += w;
        }
        m += w;
        a_values.push(a);
        m_values.push(m);
    }
    UrnTrajectory { start: 0, a_values, m_values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn small() -> IcrtTree {
        IcrtTree::from_cuts(&[1.0, 2.0, 3.0], &[0.5, 1.5]).unwrap()
    }

    #[test]
    fn hand_ball() {
        let t = small();
        let mu = MuRealization::lebesgue();
        let p = EmpiricalMeasure::new(MeasureKind::MuNormalized, &t, &mu, 3.0).unwrap();
        let m = p.ball_mass(t.point(0.5).unwrap(), 0.6).unwrap();
        assert!((m - 1.7 / 3.0).abs() < 1e-15);
        assert_eq!(p.ball_mass(t.point(0.5).unwrap(), 10.0).unwrap(), 1.0);
    }

    #[test]
    fn ball_on_a_segment_interior() {
        let t = IcrtTree::from_cuts(&[1.0], &[]).unwrap();
        let mu = MuRealization::lebesgue();
        let p = EmpiricalMeasure::new(MeasureKind::LengthNormalized, &t, &mu, 1.0).unwrap();
        assert!((p.ball_mass(t.point(0.5).unwrap(), 0.1).unwrap() - 0.2).abs() < 1e-15);
        assert!((p.ball_mass(t.point(0.05).unwrap(), 0.1).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn atom_ball() {
        let t = IcrtTree::from_cuts(&[1.0, 2.0], &[0.5]).unwrap();
        let mu = MuRealization::new(0.1, vec![(0.5, 0.9)], None).unwrap();
        let p = EmpiricalMeasure::new(MeasureKind::MuNormalized, &t, &mu, 2.0).unwrap();
        let total = 0.2 + 0.9;
        let m = p.ball_mass(t.point(0.5).unwrap(), 0.01).unwrap();
        assert!((m - (0.9 + 0.1 * 0.03) / total).abs() < 1e-14);
        let cuts = EmpiricalMeasure::new(MeasureKind::CutCounting, &t, &mu, 2.0).unwrap();
        assert_eq!(cuts.ball_mass(t.point(1.0).unwrap(), 0.0).unwrap(), 0.5);
    }

    #[test]
    fn constant_and_depth_integrals() {
        let t = small();
        let mu = MuRealization::lebesgue();
        for kind in MeasureKind::ALL {
            let p = EmpiricalMeasure::new(kind, &t, &mu, 3.0).unwrap();
            assert_eq!(p.integrate(&TestFunction::Constant).unwrap(), 1.0);
        }
        // depth profile on [0,1] u (1,2] from 0.5 u (2,3] from 1.5 (depth 1)
        let p = EmpiricalMeasure::new(MeasureKind::LengthNormalized, &t, &mu, 3.0).unwrap();
        let expected = (0.5 + 0.875 + 1.0) / 3.0;
        let got = p.integrate(&TestFunction::DepthCapped).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn urn_full_and_empty() {
        let cuts = CutSequence::from_parts(vec![1.0, 2.0, 3.0, 4.0], vec![0.5, 1.5, 0.2]).unwrap();
        let mu = MuRealization::lebesgue();
        let full = urn_track(&cuts, &mu, 2, Subtree::Hanging(1)).unwrap();
        assert_eq!(full.a_values, full.m_values);
        let empty = urn_track(&cuts, &mu, 2, Subtree::Empty).unwrap();
        assert!(empty.a_values.iter().all(|&a| a == 0.0));
        // segment 2 gets segment 3 (glued at 1.5) but not segment 4 (glued at 0.2)
        let part = urn_track(&cuts, &mu, 2, Subtree::Hanging(2)).unwrap();
        assert_eq!(part.a_values, vec![1.0, 2.0, 2.0]);
        assert_eq!(part.m_values, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn degenerate_urn_is_constant() {
        let mut rng = SeedStream::new(2).stream(0);
        let u = simulate_urn(3.0, 3.0, |_| 1.0, 100, &mut rng);
        assert_eq!(u.max_deviation(), 0.0);
    }
}
