//! Brute-force references shared by the integration tests. Nothing here calls
//! into the tree or measure code of the crate.
#![allow(dead_code)]

/// Cut points `y` and glue points `z` (`z[j - 1]` is where segment `j` hangs).
#[derive(Clone, Debug)]
pub struct RawTree {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl RawTree {
    /// Builds cuts from positive gaps and glue fractions in `[0, 1]`.
    pub fn from_gaps(gaps: &[f64], fracs: &[f64]) -> RawTree {
        let mut y = Vec::with_capacity(gaps.len());
        let mut s = 0.0;
        for g in gaps {
            s += g;
            y.push(s);
        }
        let z = y.iter().zip(fracs).take(y.len().saturating_sub(1)).map(|(yi, f)| yi * f).collect();
        RawTree { y, z }
    }

    pub fn total(&self) -> f64 {
        *self.y.last().unwrap()
    }

    /// Segment holding coordinate `x`: `(y[j-1], y[j]]`, with 0 in segment 0.
    pub fn segment(&self, x: f64) -> usize {
        self.y.iter().position(|&e| x <= e).expect("coordinate inside the tree")
    }

    fn start(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.y[j - 1]
        }
    }

    /// Distance by unrolling the gluing one segment at a time.
    pub fn dist(&self, x: f64, y: f64) -> f64 {
        let (jx, jy) = (self.segment(x), self.segment(y));
        if jx == jy {
            return (x - y).abs();
        }
        let (far, jf, near) = if jx > jy { (x, jx, y) } else { (y, jy, x) };
        (far - self.start(jf)) + self.dist(self.z[jf - 1], near)
    }

    /// Coordinates where extrema over `[0, l]` can sit, plus a uniform grid.
    pub fn candidates(&self, l: f64, grid: usize) -> Vec<f64> {
        let mut c = vec![0.0, l];
        c.extend(self.y.iter().copied().filter(|&v| v <= l));
        c.extend(self.z.iter().copied().filter(|&v| v <= l));
        c.extend((1..grid).map(|i| l * i as f64 / grid as f64));
        c
    }

    /// Nearest coordinate of `[0, l]` to `x`, and its distance.
    pub fn nearest_below(&self, x: f64, l: f64) -> (f64, f64) {
        let mut c = self.candidates(l, 64);
        if x <= l {
            c.push(x);
        }
        c.into_iter()
            .map(|c| (c, self.dist(x, c)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    }

    /// Hausdorff distance between `[0, l1]` and `[0, l2]`, `l1 <= l2`.
    pub fn hausdorff(&self, l1: f64, l2: f64) -> f64 {
        self.candidates(l2, 64)
            .into_iter()
            .filter(|&x| x > l1)
            .map(|x| self.nearest_below(x, l1).1)
            .fold(0.0, f64::max)
    }
}

/// Minimum number of closed `eps`-balls covering a tree whose cuts, glue points
/// and `eps` are all integers. Centers range over integer coordinates and the
/// targets are the midpoints of unit edges: under those conditions a ball
/// reaching a midpoint contains its whole unit edge, and some optimal cover
/// uses integer centers.
pub fn exhaustive_cover(tree: &RawTree, eps: f64) -> usize {
    let t = tree.total() as usize;
    assert!(t <= 128, "too many unit edges for a bitmask");
    let full: u128 = if t == 128 { u128::MAX } else { (1u128 << t) - 1 };
    let masks: Vec<u128> = (0..=t)
        .map(|c| {
            (0..t)
                .filter(|&k| tree.dist(c as f64, k as f64 + 0.5) <= eps)
                .fold(0u128, |m, k| m | (1u128 << k))
        })
        .collect();
    fn search(masks: &[u128], full: u128, covered: u128, left: usize) -> bool {
        if covered == full {
            return true;
        }
        if left == 0 {
            return false;
        }
        let target = (!covered & full).trailing_zeros();
        masks
            .iter()
            .filter(|m| *m >> target & 1 == 1)
            .any(|m| search(masks, full, covered | m, left - 1))
    }
    (1..=t + 1).find(|&k| search(&masks, full, 0, k)).unwrap()
}

/// `sum_i w_i (1 - exp(-w_i l))` and `sum_i (exp(-w_i l) - 1 + w_i l)` for
/// `w_i = c / i^p`, summed directly to `n` terms with a midpoint-rule tail
/// from the two leading terms of the small-argument expansion.
pub fn power_profile(c: f64, p: f64, l: f64, n: usize) -> (f64, f64) {
    let mut mass = 0.0;
    let mut psi = 0.0;
    for i in (1..=n).rev() {
        let w = c / (i as f64).powf(p);
        let u = w * l;
        mass += w * -(-u).exp_m1();
        psi += (-u).exp_m1() + u;
    }
    // sum_{i>n} f(i) ~ int_{n+1/2}^inf f, with f ~ a x^-2p - b x^-3p.
    let x0 = n as f64 + 0.5;
    let tail = |a: f64, q: f64| a * x0.powf(1.0 - q) / (q - 1.0);
    mass += tail(c * c * l, 2.0 * p) - tail(c * c * c * l * l / 2.0, 3.0 * p);
    psi += tail(c * c * l * l / 2.0, 2.0 * p) - tail(c * c * c * l * l * l / 6.0, 3.0 * p);
    (mass, psi)
}
