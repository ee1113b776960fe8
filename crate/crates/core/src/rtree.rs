//! The finite real tree obtained by gluing segment `(Y_{n-1}, Y_n]` at `Z_{n-1}`,
//! with exact metric queries.

use serde::{Deserialize, Serialize};

use crate::error::{IcrtError, Result};
use crate::stickbreak::{validate_cuts, CutSequence};

/// A point of the tree, identified by its coordinate on the half-line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub coord: f64,
    pub segment: usize,
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct IcrtTree {
    /// Tip coordinate of each segment (0-based: segment `k` is `(ends[k-1], ends[k]]`).
    ends: Vec<f64>,
    /// Coordinate where segment `k` is attached; 0 for the first segment.
    glue: Vec<f64>,
    parent: Vec<u32>,
    /// `d(0, glue[k])`.
    attach_depth: Vec<f64>,
    /// Number of segments on the chain from `k` to the first one.
    hops: Vec<u32>,
    /// `up[j][k]` is the `2^j`-th segment ancestor of `k` (the first segment maps to itself).
    up: Vec<Vec<u32>>,
}

impl IcrtTree {
    /// Builds the tree of a cut sequence. Only the first `N - 1` glue points are used.
    pub fn build(cuts: &CutSequence) -> Result<Self> {
        Self::from_cuts(&cuts.y, &cuts.z)
    }

    pub fn from_cuts(y: &[f64], z: &[f64]) -> Result<Self> {
        validate_cuts(y, z)?;
        let n = y.len();
        let mut tree = IcrtTree {
            ends: y.to_vec(),
            glue: Vec::with_capacity(n),
            parent: Vec::with_capacity(n),
            attach_depth: Vec::with_capacity(n),
            hops: Vec::with_capacity(n),
            up: Vec::new(),
        };
        for k in 0..n {
            if k == 0 {
                tree.glue.push(0.0);
                tree.parent.push(NONE);
                tree.attach_depth.push(0.0);
                tree.hops.push(0);
            } else {
                let g = z[k - 1];
                let p = tree.segment_of(g);
                debug_assert!(p < k);
                let d = tree.depth_in(g, p);
                tree.glue.push(g);
                tree.parent.push(p as u32);
                tree.attach_depth.push(d);
                tree.hops.push(tree.hops[p] + 1);
            }
        }
        let levels = (usize::BITS - n.max(1).leading_zeros()) as usize;
        let base: Vec<u32> = tree.parent.iter().map(|&p| if p == NONE { 0 } else { p }).collect();
        tree.up.push(base);
        for j in 1..levels.max(1) {
            let prev = &tree.up[j - 1];
            let next = prev.iter().map(|&a| prev[a as usize]).collect();
            tree.up.push(next);
        }
        Ok(tree)
    }

    /// Tree spanned by `[0, level]`: the cuts up to `level`, plus a tip segment
    /// ending at `level` when the last such cut falls short of it. The tip hangs
    /// from the glue point drawn at that last cut.
    pub fn truncated(cuts: &CutSequence, level: f64) -> Result<Self> {
        if !(level > 0.0) {
            return Err(IcrtError::NegativeLength(level));
        }
        let k = cuts.cuts_upto(level);
        let mut y = cuts.y[..k].to_vec();
        let mut z = cuts.z[..k.min(cuts.z.len())].to_vec();
        if y.last().is_none_or(|&last| last < level) {
            if k > 0 && z.len() < k {
                return Err(IcrtError::InvalidCuts { index: k, reason: "missing glue point for the tip".into() });
            }
            y.push(level);
        } else {
            z.truncate(k.saturating_sub(1));
        }
        Self::from_cuts(&y, &z)
    }

    pub fn segments(&self) -> usize {
        self.ends.len()
    }
    pub fn total_length(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }
    pub fn ends(&self) -> &[f64] {
        &self.ends
    }
    pub fn glue(&self) -> &[f64] {
        &self.glue
    }
    /// Parent segment of `k`, `None` for the first segment.
    pub fn parent(&self, k: usize) -> Option<usize> {
        let p = self.parent[k];
        (p != NONE).then_some(p as usize)
    }
    pub fn attach_depth(&self, k: usize) -> f64 {
        self.attach_depth[k]
    }
    pub fn seg_start(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.ends[k - 1]
        }
    }

    /// Segment containing coordinate `x` (assumed in range).
    fn segment_of(&self, x: f64) -> usize {
        self.ends.partition_point(|&e| e < x)
    }

    fn depth_in(&self, x: f64, k: usize) -> f64 {
        x - self.seg_start(k) + self.attach_depth[k]
    }

    /// Resolves a coordinate into a point. The empty tree holds only `0`.
    pub fn point(&self, x: f64) -> Result<TreePoint> {
        let max = self.total_length();
        if !(x >= 0.0 && x <= max) {
            return Err(IcrtError::OutOfRange { coordinate: x, max });
        }
        Ok(TreePoint { coord: x, segment: if self.ends.is_empty() { 0 } else { self.segment_of(x) } })
    }

    /// `d(0, x)`.
    pub fn depth(&self, p: TreePoint) -> f64 {
        if self.ends.is_empty() {
            return 0.0;
        }
        self.depth_in(p.coord, p.segment)
    }

    fn ancestor_at_hops(&self, mut k: usize, target: u32) -> usize {
        let mut diff = self.hops[k] - target;
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                k = self.up[j][k] as usize;
            }
            diff >>= 1;
            j += 1;
        }
        k
    }

    /// The point where the geodesics from `a` and `b` to the root separate.
    pub fn meet(&self, a: TreePoint, b: TreePoint) -> TreePoint {
        if self.ends.is_empty() {
            return a;
        }
        let (mut sa, mut sb) = (a.segment, b.segment);
        let (mut ea, mut eb) = (a.coord, b.coord);
        let (ha, hb) = (self.hops[sa], self.hops[sb]);
        // bring both chains to the same hop count, remembering the entry coordinates
        if ha > hb {
            let c = self.ancestor_at_hops(sa, hb + 1);
            ea = self.glue[c];
            sa = self.parent[c] as usize;
        } else if hb > ha {
            let c = self.ancestor_at_hops(sb, ha + 1);
            eb = self.glue[c];
            sb = self.parent[c] as usize;
        }
        if sa != sb {
            for j in (0..self.up.len()).rev() {
                let (na, nb) = (self.up[j][sa], self.up[j][sb]);
                if na != nb {
                    sa = na as usize;
                    sb = nb as usize;
                }
            }
            ea = self.glue[sa];
            eb = self.glue[sb];
            sa = self.parent[sa] as usize;
        }
        TreePoint { coord: ea.min(eb), segment: sa }
    }

    pub fn distance(&self, a: TreePoint, b: TreePoint) -> f64 {
        let m = self.meet(a, b);
        self.depth(a) + self.depth(b) - 2.0 * self.depth(m)
    }

    /// Distance between two coordinates.
    pub fn distance_at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.distance(self.point(x)?, self.point(y)?))
    }

    /// The nearest point of `T_l`: the first point with coordinate `<= l` on the
    /// geodesic from `p` to the root.
    pub fn project(&self, p: TreePoint, l: f64) -> Result<TreePoint> {
        let max = self.total_length();
        if !(l >= 0.0 && l <= max) {
            return Err(IcrtError::OutOfRange { coordinate: l, max });
        }
        if p.coord <= l {
            return Ok(p);
        }
        let kl = self.segment_of(l);
        if p.segment == kl {
            return Ok(TreePoint { coord: l, segment: kl });
        }
        // climb to the last segment above kl on the chain
        let mut s = p.segment;
        for j in (0..self.up.len()).rev() {
            let t = self.up[j][s] as usize;
            if t > kl {
                s = t;
            }
        }
        let c = self.glue[s];
        let parent = self.parent[s] as usize;
        if parent == kl && c > l {
            Ok(TreePoint { coord: l, segment: kl })
        } else {
            Ok(TreePoint { coord: c, segment: parent })
        }
    }

    /// `d(x, T_l)`.
    pub fn distance_to_truncation(&self, p: TreePoint, l: f64) -> Result<f64> {
        let q = self.project(p, l)?;
        Ok(self.depth(p) - self.depth(q))
    }

    /// Hausdorff distance between `T_{l1}` and `T_{l2}` for `l1 <= l2`.
    pub fn hausdorff_truncation(&self, l1: f64, l2: f64) -> Result<f64> {
        let max = self.total_length();
        if l1 > l2 {
            return Err(IcrtError::InvalidParameter(format!("l1 = {l1} exceeds l2 = {l2}")));
        }
        if !(l1 >= 0.0 && l2 <= max) {
            return Err(IcrtError::OutOfRange { coordinate: if l1 < 0.0 { l1 } else { l2 }, max });
        }
        if l1 == l2 || self.ends.is_empty() {
            return Ok(0.0);
        }
        let k1 = self.segment_of(l1);
        let k2 = self.segment_of(l2);
        // base[s]: distance from the bottom of segment s to T_{l1}
        let mut base = vec![0.0; k2 + 1];
        let mut best: f64 = 0.0;
        for s in k1..=k2 {
            let tip = self.ends[s].min(l2);
            let reach = if s == k1 {
                tip - l1
            } else {
                let g = self.glue[s];
                let p = self.parent[s] as usize;
                base[s] = if g <= l1 {
                    0.0
                } else if p == k1 {
                    g - l1
                } else {
                    g - self.seg_start(p) + base[p]
                };
                tip - self.seg_start(s) + base[s]
            };
            best = best.max(reach);
        }
        Ok(best)
    }

    /// Skeleton of `T_l` with every tip, glue point and `l` itself as a node.
    pub fn skeleton(&self, l: f64) -> Result<Skeleton> {
        let max = self.total_length();
        if !(l >= 0.0 && l <= max) {
            return Err(IcrtError::OutOfRange { coordinate: l, max });
        }
        let mut coords = vec![0.0];
        if l > 0.0 {
            let kl = self.segment_of(l);
            for s in 0..=kl {
                coords.push(self.ends[s].min(l));
                if s > 0 {
                    coords.push(self.glue[s]);
                }
            }
        }
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        let n = coords.len();
        let mut parent = vec![NONE; n];
        let mut lo = vec![0.0; n];
        let mut depth = vec![0.0; n];
        for i in 1..n {
            let x = coords[i];
            let s = self.segment_of(x);
            let start = self.seg_start(s);
            let (p, bottom) = if coords[i - 1] > start || (s == 0 && i > 1) {
                (i - 1, coords[i - 1])
            } else {
                let g = self.glue[s];
                (coords.partition_point(|&c| c < g), start)
            };
            debug_assert_eq!(coords[p], if bottom == start { self.glue[s] } else { bottom });
            parent[i] = p as u32;
            lo[i] = bottom;
            depth[i] = depth[p] + x - bottom;
        }
        Ok(Skeleton::assemble(l, coords, parent, lo, depth))
    }

    /// Minimum number of closed `eps`-balls covering `T_l`.
    pub fn ball_cover_count(&self, l: f64, eps: f64) -> Result<usize> {
        self.skeleton(l)?.cover_count(eps)
    }
}

/// A rooted finite tree whose node `i` owns the edge `(lo[i], coords[i]]` of the
/// half-line, hanging from node `parent[i] < i`.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub level: f64,
    pub coords: Vec<f64>,
    pub parent: Vec<u32>,
    pub lo: Vec<f64>,
    pub depth: Vec<f64>,
    child_start: Vec<u32>,
    children: Vec<u32>,
    tin: Vec<u32>,
    tout: Vec<u32>,
}

impl Skeleton {
    fn assemble(level: f64, coords: Vec<f64>, parent: Vec<u32>, lo: Vec<f64>, depth: Vec<f64>) -> Self {
        let n = coords.len();
        let mut count = vec![0u32; n + 1];
        for &p in &parent[1..] {
            count[p as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let child_start = count.clone();
        let mut fill = count;
        let mut children = vec![0u32; n.saturating_sub(1)];
        for (i, &p) in parent.iter().enumerate().skip(1) {
            children[fill[p as usize] as usize] = i as u32;
            fill[p as usize] += 1;
        }
        let mut sk = Skeleton {
            level,
            coords,
            parent,
            lo,
            depth,
            child_start,
            children,
            tin: vec![0; n],
            tout: vec![0; n],
        };
        // iterative Euler tour for subtree tests
        let mut timer = 0u32;
        let mut stack = vec![(0usize, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                sk.tout[v] = timer;
                continue;
            }
            sk.tin[v] = timer;
            timer += 1;
            stack.push((v, true));
            for &c in sk.children(v) {
                stack.push((c as usize, false));
            }
        }
        sk
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }
    pub fn edge_len(&self, v: usize) -> f64 {
        if v == 0 {
            0.0
        } else {
            self.coords[v] - self.lo[v]
        }
    }
    pub fn total_length(&self) -> f64 {
        (1..self.len()).map(|v| self.edge_len(v)).sum()
    }
    /// Whether `a` is an ancestor of (or equal to) `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.tin[a] <= self.tin[b] && self.tout[b] <= self.tout[a]
    }

    /// Node whose edge contains coordinate `x` (the root for `x = 0`).
    pub fn node_of(&self, x: f64) -> usize {
        self.coords.partition_point(|&c| c < x)
    }

    /// Distances from the point at coordinate `x` to every node.
    pub fn distances_from(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        let v = self.node_of(x);
        let mut dist = vec![f64::NAN; n];
        let mut stack = Vec::new();
        if v == 0 {
            dist[0] = 0.0;
            stack.push(0usize);
        } else {
            dist[v] = self.coords[v] - x;
            let p = self.parent[v] as usize;
            dist[p] = x - self.lo[v];
            stack.push(v);
            stack.push(p);
        }
        while let Some(u) = stack.pop() {
            for &c in self.children(u) {
                let c = c as usize;
                if dist[c].is_nan() {
                    dist[c] = dist[u] + self.edge_len(c);
                    stack.push(c);
                }
            }
            if u != 0 {
                let p = self.parent[u] as usize;
                if dist[p].is_nan() {
                    dist[p] = dist[u] + self.edge_len(u);
                    stack.push(p);
                }
            }
        }
        dist
    }

    /// Exact diameter by two farthest-point sweeps.
    pub fn diameter(&self) -> f64 {
        let far = argmax(&self.depth);
        let d = self.distances_from(self.coords[far]);
        d.iter().cloned().fold(0.0, f64::max)
    }

    /// Minimum number of closed `eps`-balls covering the skeleton.
    ///
    /// Bottom-up greedy: each subtree reports the farthest uncovered distance below
    /// it and the spare reach of the best center below it; a center is placed only
    /// when the farthest uncovered point would otherwise fall out of reach.
    pub fn cover_count(&self, eps: f64) -> Result<usize> {
        if !(eps > 0.0) {
            return Err(IcrtError::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let n = self.len();
        let none = f64::NEG_INFINITY;
        let mut uncovered = vec![none; n];
        let mut spare = vec![none; n];
        let mut count = 0usize;
        for v in (0..n).rev() {
            let (mut u, r) = (uncovered[v], spare[v]);
            if r < 0.0 {
                u = u.max(0.0);
            }
            if u >= 0.0 && r >= u {
                u = none;
            }
            if v == 0 {
                if u >= 0.0 {
                    count += 1;
                }
                break;
            }
            let (u2, r2, placed) = walk_edge(u, r, self.edge_len(v), eps);
            count += placed;
            let p = self.parent[v] as usize;
            uncovered[p] = uncovered[p].max(u2);
            spare[p] = spare[p].max(r2);
        }
        Ok(count)
    }

    /// Size of a maximal `delta`-separated set built by farthest-first traversal
    /// from the root. Distances are measured on the whole continuum skeleton.
    pub fn packing_count(&self, delta: f64) -> Result<usize> {
        if !(delta > 0.0) {
            return Err(IcrtError::InvalidParameter(format!("separation must be positive, got {delta}")));
        }
        let n = self.len();
        let mut near = self.distances_from(0.0);
        // chosen points strictly inside an edge, by node
        let mut inner: Vec<Vec<f64>> = vec![Vec::new(); n];
        let mut count = 1;
        loop {
            let mut best = (0.0f64, 0.0f64);
            for (v, &d) in near.iter().enumerate() {
                if d > best.0 {
                    best = (d, self.coords[v]);
                }
            }
            for v in 1..n {
                let (d, x) = self.edge_farthest(v, &near, &inner[v]);
                if d > best.0 {
                    best = (d, x);
                }
            }
            if best.0 <= delta {
                break;
            }
            let x = best.1;
            let v = self.node_of(x);
            if v != 0 && x < self.coords[v] && x > self.lo[v] {
                inner[v].push(x);
                inner[v].sort_by(f64::total_cmp);
            }
            let d = self.distances_from(x);
            for (a, b) in near.iter_mut().zip(d) {
                *a = a.min(b);
            }
            count += 1;
        }
        Ok(count)
    }

    /// Farthest point of edge `v` from the chosen set, given node distances and
    /// chosen points inside the edge.
    fn edge_farthest(&self, v: usize, near: &[f64], inner: &[f64]) -> (f64, f64) {
        let p = self.parent[v] as usize;
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut a = self.lo[v];
        let mut fa = near[p];
        for &x in inner.iter().chain(std::iter::once(&self.coords[v])) {
            let fb = if x == self.coords[v] { near[v] } else { 0.0 };
            let len = x - a;
            let peak = 0.5 * (fa + fb + len);
            let (d, at) = if fb >= fa + len {
                (fb, x)
            } else if fa >= fb + len {
                (fa, a)
            } else {
                (peak, a + peak - fa)
            };
            if d > best.0 {
                best = (d, at);
            }
            a = x;
            fa = 0.0;
        }
        best
    }
}

/// Carries the (uncovered, spare) state up an edge of length `len`, placing
/// centers when needed. Returns the state at the top and the centers placed.
fn walk_edge(u: f64, r: f64, len: f64, eps: f64) -> (f64, f64, usize) {
    let none = f64::NEG_INFINITY;
    let (u, rem, r) = if u < 0.0 {
        if r >= len {
            return (none, r - len, 0);
        }
        // the edge is covered up to height r, then uncovered
        (0.0, len - r.max(0.0), none)
    } else {
        (u, len, r)
    };
    let reach = eps - u;
    if reach >= rem {
        let r2 = if r - rem >= 0.0 { r - rem } else { none };
        return (u + rem, r2, 0);
    }
    // centers at heights reach + 2 j eps strictly below the top; one landing on
    // the top is left to the parent, where a sibling may cover it instead
    let rest = rem - reach;
    let placed = (rest / (2.0 * eps)).ceil();
    let left = rest - (placed - 1.0) * 2.0 * eps;
    if left <= eps {
        (none, eps - left, placed as usize)
    } else {
        (left - eps, none, placed as usize)
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Graphviz rendering of a skeleton; edge labels are lengths.
pub fn to_dot(sk: &Skeleton) -> String {
    let mut s = String::from("graph icrt {\n  node [shape=point];\n");
    for (i, c) in sk.coords.iter().enumerate() {
        s.push_str(&format!("  n{i} [label=\"{c}\"];\n"));
    }
    for v in 1..sk.len() {
        s.push_str(&format!("  n{} -- n{v} [len={}];\n", sk.parent[v], sk.edge_len(v)));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> IcrtTree {
        IcrtTree::from_cuts(&[1.0, 2.0, 3.0], &[0.5, 1.5]).unwrap()
    }

    #[test]
    fn attach_depths() {
        let t = small();
        assert_eq!(t.segments(), 3);
        assert_eq!(t.attach_depth(1), 0.5);
        assert_eq!(t.attach_depth(2), 1.0);
    }

    #[test]
    fn hand_distances() {
        let t = small();
        assert!((t.distance_at(0.3, 1.5).unwrap() - 0.7).abs() < 1e-15);
        assert!((t.distance_at(2.5, 0.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((t.distance_at(2.5, 0.9).unwrap() - 1.4).abs() < 1e-15);
        assert_eq!(t.distance_at(2.2, 2.2).unwrap(), 0.0);
        assert!(t.distance_at(3.5, 0.0).is_err());
    }

    #[test]
    fn hand_projection() {
        let t = small();
        let q = t.project(t.point(2.5).unwrap(), 1.0).unwrap();
        assert_eq!(q.coord, 0.5);
        assert!((t.distance_to_truncation(t.point(2.5).unwrap(), 1.0).unwrap() - 1.0).abs() < 1e-15);
        let p = t.point(2.7).unwrap();
        assert_eq!(t.project(p, 3.0).unwrap(), p);
        assert_eq!(t.project(t.point(1.7).unwrap(), 1.2).unwrap().coord, 1.2);
    }

    #[test]
    fn hand_hausdorff() {
        let t = small();
        assert!((t.hausdorff_truncation(1.0, 3.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(t.hausdorff_truncation(2.0, 2.0).unwrap(), 0.0);
        assert!(t.hausdorff_truncation(2.0, 1.0).is_err());
    }

    #[test]
    fn path_and_point() {
        let t = IcrtTree::from_cuts(&[5.0], &[]).unwrap();
        assert_eq!(t.distance_at(1.0, 4.5).unwrap(), 3.5);
        let e = IcrtTree::from_cuts(&[], &[]).unwrap();
        assert_eq!(e.distance_at(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(e.ball_cover_count(0.0, 1.0).unwrap(), 1);
    }

    #[test]
    fn covers() {
        let seg = IcrtTree::from_cuts(&[1.0], &[]).unwrap();
        assert_eq!(seg.ball_cover_count(1.0, 0.25).unwrap(), 2);
        assert_eq!(seg.ball_cover_count(1.0, 0.5).unwrap(), 1);
        assert_eq!(seg.ball_cover_count(1.0, 0.2).unwrap(), 3);
        // star of 4 unit legs at the root
        let star = IcrtTree::from_cuts(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(star.ball_cover_count(4.0, 1.0).unwrap(), 1);
        assert_eq!(star.ball_cover_count(4.0, 0.5).unwrap(), 4);
        assert_eq!(star.ball_cover_count(4.0, 0.99).unwrap(), 4);
    }

    #[test]
    fn skeleton_shape() {
        let t = small();
        let sk = t.skeleton(3.0).unwrap();
        assert_eq!(sk.coords, vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0]);
        assert!((sk.total_length() - 3.0).abs() < 1e-15);
        assert!((sk.diameter() - 2.0).abs() < 1e-15);
        let d = sk.distances_from(2.5);
        assert!((d[0] - 1.5).abs() < 1e-15 && (d[4] - 1.0).abs() < 1e-15);
        assert!(to_dot(&sk).contains("n3 -- n5"));
    }

    #[test]
    fn packing_on_segment() {
        let seg = IcrtTree::from_cuts(&[1.0], &[]).unwrap();
        let sk = seg.skeleton(1.0).unwrap();
        assert_eq!(sk.packing_count(0.25).unwrap(), 3);
        assert_eq!(sk.packing_count(0.2).unwrap(), 5);
        assert_eq!(sk.packing_count(1.0).unwrap(), 1);
    }

    #[test]
    fn truncation_adds_tip() {
        let cuts = CutSequence::from_parts(vec![1.0, 2.0, 3.0], vec![0.5, 1.5, 2.5]).unwrap();
        let t = IcrtTree::truncated(&cuts, 2.5).unwrap();
        assert_eq!(t.ends(), &[1.0, 2.0, 2.5]);
        assert_eq!(t.glue(), &[0.0, 0.5, 1.5]);
        let t = IcrtTree::truncated(&cuts, 2.0).unwrap();
        assert_eq!(t.ends(), &[1.0, 2.0]);
        let t = IcrtTree::truncated(&cuts, 0.5).unwrap();
        assert_eq!(t.ends(), &[0.5]);
        let short = CutSequence::from_parts(vec![1.0, 2.0], vec![0.5]).unwrap();
        assert!(IcrtTree::truncated(&short, 3.0).is_err());
    }
}
