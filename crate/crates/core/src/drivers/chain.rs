//! Two-sided Hölder curve in the plane from nested chains of squares.
//!
//! Level `r` refines every square of the previous chain into an
//! `n_r × n_r` grid (`n_r = 2k_r + 1`) and threads a chain of `m_r` squares
//! from the middle of its entry side to the middle of its exit side, touching
//! no other boundary square. With `ε_r = Π 1/n`, `δ_r = Π 1/m`, the curve
//! spends time `δ_r` in each square of level `r`, so
//! `|u(s) - u(t)| ≍ |s - t|^α` whenever `ε_r / δ_r^α` stays bounded.
//!
//! The curve is evaluated lazily: [`ChainCurve::eval`] descends the levels, so
//! deep constructions never materialise the full lattice.

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::path::DriverPath;

type Cell = (i64, i64);

const W: Cell = (-1, 0);
const E: Cell = (1, 0);
const N: Cell = (0, 1);

/// Dihedral symmetries of the square as integer matrices `[a, b, c, d]`.
const DIHEDRAL: [[i64; 4]; 8] = [
    [1, 0, 0, 1],
    [0, -1, 1, 0],
    [-1, 0, 0, -1],
    [0, 1, -1, 0],
    [1, 0, 0, -1],
    [-1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, -1, -1, 0],
];

fn apply(m: &[i64; 4], v: Cell) -> Cell {
    (m[0] * v.0 + m[1] * v.1, m[2] * v.0 + m[3] * v.1)
}

/// Bounds on `α` for the band `ε_r / δ_r^α ∈ [1/3, 3]`.
const BAND: f64 = 3.0;
const MAX_K: usize = 40;

/// A chain template inside an `n × n` grid, entering on the west side.
#[derive(Debug, Clone)]
struct Template {
    cells: Vec<Cell>,
    /// Direction towards the predecessor / successor, in cell units.
    inward: Vec<Cell>,
    outward: Vec<Cell>,
}

impl Template {
    fn new(cells: Vec<Cell>, exit: Cell) -> Self {
        let m = cells.len();
        let inward = (0..m)
            .map(|i| if i == 0 { W } else { (cells[i - 1].0 - cells[i].0, cells[i - 1].1 - cells[i].1) })
            .collect();
        let outward = (0..m)
            .map(|i| if i + 1 == m { exit } else { (cells[i + 1].0 - cells[i].0, cells[i + 1].1 - cells[i].1) })
            .collect();
        Self { cells, inward, outward }
    }
}

/// Checks the chain rules: consecutive cells share a side, cells two apart
/// share at most a corner, cells further apart are disjoint; only the first
/// and last cells touch the boundary, at the given side midpoints.
fn is_valid_chain(cells: &[Cell], n: i64, first: Cell, last: Cell) -> bool {
    if cells.first() != Some(&first) || cells.last() != Some(&last) {
        return false;
    }
    let m = cells.len();
    for (i, &(x, y)) in cells.iter().enumerate() {
        if !(0..n).contains(&x) || !(0..n).contains(&y) {
            return false;
        }
        let edge = x == 0 || y == 0 || x == n - 1 || y == n - 1;
        if edge && i != 0 && i + 1 != m {
            return false;
        }
        for (j, &(u, v)) in cells.iter().enumerate().skip(i + 1) {
            let (dx, dy) = ((x - u).abs(), (y - v).abs());
            let ok = match j - i {
                1 => dx + dy == 1,
                2 => dx + dy >= 2,
                _ => dx >= 2 || dy >= 2,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Serpentine of vertical runs on the given odd columns joined by single
/// connector cells, with an exact total length. Run `j` goes from row
/// `a_{j-1}` to row `a_j` inside `bounds[j]`; `a_0` and `a_q` are fixed.
fn serpentine(
    cols: &[i64],
    bounds: &[(i64, i64)],
    a0: i64,
    a_end: i64,
    pre: &[Cell],
    post: &[Cell],
    len: usize,
) -> Option<Vec<Cell>> {
    let q = cols.len();
    let fixed = pre.len() + post.len() + (q - 1) + q;
    if len < fixed {
        return None;
    }
    let target = (len - fixed) as i64;
    let rows = bounds.iter().map(|b| b.1).max()? as usize + 1;
    let width = target as usize + 1;
    // reach[j][a][s]: a_j = a with Σ_{i<=j} |Δa| = s
    let mut reach = vec![vec![vec![false; width]; rows]; q + 1];
    if a0 < 0 || a0 as usize >= rows {
        return None;
    }
    reach[0][a0 as usize][0] = true;
    for j in 1..=q {
        let (lo, hi) = bounds[j - 1];
        for prev in lo..=hi {
            for s in 0..width {
                if !reach[j - 1][prev as usize][s] {
                    continue;
                }
                let range = if j == q { a_end..=a_end } else { lo..=hi };
                for a in range {
                    if a < lo || a > hi {
                        continue;
                    }
                    let s2 = s + (a - prev).unsigned_abs() as usize;
                    if s2 < width {
                        reach[j][a as usize][s2] = true;
                    }
                }
            }
        }
    }
    if !reach[q][a_end as usize][target as usize] {
        return None;
    }
    // backtrack, preferring the largest swing at each step
    let mut a = vec![0i64; q + 1];
    a[q] = a_end;
    let mut s = target as usize;
    for j in (1..=q).rev() {
        let (lo, hi) = bounds[j - 1];
        let mut cands: Vec<i64> = (lo..=hi).collect();
        if j == 1 {
            cands = vec![a0];
        }
        cands.sort_by_key(|&p| std::cmp::Reverse(((p - a[j]).abs(), -p)));
        let prev = cands.into_iter().find(|&p| {
            let step = (a[j] - p).unsigned_abs() as usize;
            step <= s && reach[j - 1][p as usize][s - step]
        })?;
        s -= (a[j] - prev).unsigned_abs() as usize;
        a[j - 1] = prev;
    }
    let mut cells = pre.to_vec();
    for j in 1..=q {
        let c = cols[j - 1];
        let dir = (a[j] - a[j - 1]).signum();
        let mut r = a[j - 1];
        loop {
            cells.push((c, r));
            if r == a[j] {
                break;
            }
            r += dir;
        }
        if j < q {
            cells.push((c + 1, a[j]));
        }
    }
    cells.extend_from_slice(post);
    Some(cells)
}

/// West-to-east chain of `m` cells in a `(2k+1)`-grid.
fn straight_template(k: i64, m: usize) -> Option<Vec<Cell>> {
    let n = 2 * k + 1;
    let cols: Vec<i64> = (0..k).map(|j| 2 * j + 1).collect();
    let bounds = vec![(1, n - 2); cols.len()];
    let cells = serpentine(&cols, &bounds, k, k, &[(0, k)], &[(n - 1, k)], m)?;
    is_valid_chain(&cells, n, (0, k), (n - 1, k)).then_some(cells)
}

/// West-to-north chain of `m` cells in a `(2k+1)`-grid.
fn turn_template(k: i64, m: usize) -> Option<Vec<Cell>> {
    let n = 2 * k + 1;
    let (first, last) = ((0, k), (k, n - 1));
    let mut variants: Vec<Vec<Cell>> = Vec::new();
    let top = n - 2;
    if k % 2 == 1 {
        // runs up to column k, which leads straight to the exit
        let cols: Vec<i64> = (0..(k + 1) / 2).map(|j| 2 * j + 1).collect();
        let bounds = vec![(1, top); cols.len()];
        if let Some(c) = serpentine(&cols, &bounds, k, top, &[first], &[last], m) {
            variants.push(c);
        }
    } else {
        // runs up to column k-1, then one step east below the exit
        let cols: Vec<i64> = (0..k / 2).map(|j| 2 * j + 1).collect();
        let bounds = vec![(1, top); cols.len()];
        if let Some(c) = serpentine(&cols, &bounds, k, top, &[first], &[(k, top), last], m) {
            variants.push(c);
        }
        // runs up to column k+1, then one step west below the exit; the run
        // in column k-1 keeps clear of the top two interior rows
        let cols: Vec<i64> = (0..k / 2 + 1).map(|j| 2 * j + 1).collect();
        let q = cols.len();
        let bounds: Vec<(i64, i64)> = cols
            .iter()
            .enumerate()
            .map(|(j, &c)| if j + 1 < q && c >= k - 1 { (1, top - 2) } else { (1, top) })
            .collect();
        if let Some(c) = serpentine(&cols, &bounds, k, top, &[first], &[(k, top), last], m) {
            variants.push(c);
        }
    }
    variants.into_iter().find(|c| is_valid_chain(c, n, first, last))
}

#[derive(Debug, Clone)]
struct Level {
    k: usize,
    m: usize,
    straight: Template,
    turn: Template,
}

/// Lazily evaluated chain-of-squares curve `u: [0, 1] -> [0, 1]^2`.
#[derive(Debug, Clone)]
pub struct ChainCurve {
    alpha: f64,
    levels: Vec<Level>,
}

/// Per-level `(k_r, m_r)`: the smallest feasible `k` at each level with an
/// odd `m ∈ [2k+1, k^2]` keeping `ε_r / δ_r^α ∈ [1/3, 3]`; among those `m`
/// the one bringing the ratio closest to 1.
pub fn chain_sequence(alpha: f64, depth: usize) -> Result<Vec<(usize, usize)>> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha={alpha} outside (1/2, 1)")));
    }
    let mut log_ratio = 0.0f64;
    let mut out = Vec::with_capacity(depth);
    for r in 1..=depth {
        let mut chosen = None;
        'k: for k in 2..=MAX_K {
            let n = 2 * k + 1;
            let mut best: Option<(f64, usize)> = None;
            for m in (n..=k * k).filter(|m| m % 2 == 1) {
                let l = log_ratio + alpha * (m as f64).ln() - (n as f64).ln();
                if l.abs() <= BAND.ln() && best.is_none_or(|(b, _)| l.abs() < b) {
                    best = Some((l.abs(), m));
                }
            }
            if let Some((_, m)) = best {
                chosen = Some((k, m));
                break 'k;
            }
        }
        let (k, m) = chosen.ok_or_else(|| {
            Error::Infeasible(format!(
                "level {r}: no k <= {MAX_K} with odd m in [2k+1, k^2] keeps eps/delta^alpha in [1/3, 3]"
            ))
        })?;
        log_ratio += alpha * (m as f64).ln() - ((2 * k + 1) as f64).ln();
        out.push((k, m));
    }
    Ok(out)
}

impl ChainCurve {
    pub fn new(alpha: f64, depth: usize) -> Result<Self> {
        if depth == 0 || depth > 8 {
            return Err(Error::InvalidConfig(format!("depth={depth} outside 1..=8")));
        }
        let seq = chain_sequence(alpha, depth)?;
        let mut levels = Vec::with_capacity(depth);
        for (r, &(k, m)) in seq.iter().enumerate() {
            let ki = k as i64;
            let straight = straight_template(ki, m).ok_or_else(|| {
                Error::Infeasible(format!("level {}: no straight chain of {m} cells for k={k}", r + 1))
            })?;
            let turn = turn_template(ki, m).ok_or_else(|| {
                Error::Infeasible(format!("level {}: no turning chain of {m} cells for k={k}", r + 1))
            })?;
            levels.push(Level {
                k,
                m,
                straight: Template::new(straight, E),
                turn: Template::new(turn, N),
            });
        }
        Ok(Self { alpha, levels })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `(k_r, m_r)` per level.
    pub fn sequence(&self) -> Vec<(usize, usize)> {
        self.levels.iter().map(|l| (l.k, l.m)).collect()
    }

    /// Side length `ε_r` of the level-`r` squares.
    pub fn epsilon(&self, r: usize) -> f64 {
        self.levels[..r].iter().map(|l| 1.0 / (2 * l.k + 1) as f64).product()
    }

    /// Time `δ_r` spent in each level-`r` square.
    pub fn delta(&self, r: usize) -> f64 {
        self.levels[..r].iter().map(|l| 1.0 / l.m as f64).product()
    }

    /// Number of squares in the deepest chain.
    pub fn cells(&self) -> u128 {
        self.levels.iter().map(|l| l.m as u128).product()
    }

    /// Point at time `t ∈ [0, 1]`: linear from the entry midpoint to the exit
    /// midpoint of the deepest square containing `t`.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        let mut tau = t.clamp(0.0, 1.0);
        let (mut x, mut y) = (0i64, 0i64);
        let (mut din, mut dout) = (W, E);
        let mut eps = 1.0;
        for lvl in &self.levels {
            let tmpl = if din == (-dout.0, -dout.1) { &lvl.straight } else { &lvl.turn };
            let canon_out = if std::ptr::eq(tmpl, &lvl.straight) { E } else { N };
            let map = DIHEDRAL
                .iter()
                .find(|m| apply(m, W) == din && apply(m, canon_out) == dout)
                .expect("some symmetry maps the canonical sides");
            let m = lvl.m as f64;
            let i = ((tau * m).floor() as usize).min(lvl.m - 1);
            tau = (tau * m - i as f64).clamp(0.0, 1.0);
            let k = lvl.k as i64;
            let n = 2 * k + 1;
            let c = tmpl.cells[i];
            let (cx, cy) = apply(map, (c.0 - k, c.1 - k));
            x = x * n + cx + k;
            y = y * n + cy + k;
            din = apply(map, tmpl.inward[i]);
            dout = apply(map, tmpl.outward[i]);
            eps /= n as f64;
        }
        let (mx, my) = ((x as f64 + 0.5) * eps, (y as f64 + 0.5) * eps);
        let a = (mx + 0.5 * eps * din.0 as f64, my + 0.5 * eps * din.1 as f64);
        let b = (mx + 0.5 * eps * dout.0 as f64, my + 0.5 * eps * dout.1 as f64);
        [a.0 + tau * (b.0 - a.0), a.1 + tau * (b.1 - a.1)]
    }

    /// `samples + 1` equally spaced points on `[0, 1]`, tagged with `α`.
    pub fn sample(&self, samples: usize) -> Result<DriverPath> {
        let grid = Partition::uniform(0.0, 1.0, samples)?;
        DriverPath::from_fn(grid, 2, |t| self.eval(t).to_vec())?.with_regularity(self.alpha, 1.0 / self.alpha)
    }

    /// The curve at times `i δ_depth`, i.e. the shared-side midpoints of the
    /// deepest chain. `None` when that chain exceeds `max_cells`.
    pub fn lattice_path(&self, max_cells: u128) -> Option<Result<DriverPath>> {
        let c = self.cells();
        (c <= max_cells).then(|| self.sample(c as usize))
    }
}

/// Samples cap for [`holder_chain_curve`] when the deepest chain is larger.
pub const CHAIN_SAMPLE_CAP: usize = 1 << 18;

/// The curve at `δ_depth` resolution when the chain has at most
/// [`CHAIN_SAMPLE_CAP`] squares, otherwise on `CHAIN_SAMPLE_CAP` equal steps.
pub fn holder_chain_curve(alpha: f64, depth: usize) -> Result<DriverPath> {
    let curve = ChainCurve::new(alpha, depth)?;
    match curve.lattice_path(CHAIN_SAMPLE_CAP as u128) {
        Some(p) => p,
        None => curve.sample(CHAIN_SAMPLE_CAP),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_respects_constraints() {
        let seq = chain_sequence(0.7, 6).unwrap();
        let mut l = 0.0f64;
        for &(k, m) in &seq {
            let n = 2 * k + 1;
            assert!(k >= 2 && m % 2 == 1 && n <= m && m <= k * k, "{k} {m}");
            l += 0.7 * (m as f64).ln() - (n as f64).ln();
            assert!(l.abs() <= 3f64.ln() + 1e-12);
        }
        assert_eq!(seq, vec![(3, 9), (3, 9), (5, 25), (6, 35), (7, 49), (6, 35)]);
        assert!(chain_sequence(0.4, 3).is_err());
        assert!(chain_sequence(1.0, 3).is_err());
    }

    #[test]
    fn templates_cover_all_lengths() {
        for k in 3..=9i64 {
            let n = 2 * k + 1;
            for m in (n as usize..=(k * k) as usize).filter(|m| m % 2 == 1) {
                let s = straight_template(k, m).unwrap_or_else(|| panic!("straight k={k} m={m}"));
                assert_eq!(s.len(), m);
                let t = turn_template(k, m).unwrap_or_else(|| panic!("turn k={k} m={m}"));
                assert_eq!(t.len(), m);
            }
        }
    }

    #[test]
    fn validator_rejects_bad_chains() {
        // touching non-neighbours
        let u = vec![(0, 1), (1, 1), (1, 2), (2, 2), (2, 1), (3, 1), (4, 1)];
        assert!(!is_valid_chain(&u, 5, (0, 1), (4, 1)));
        let ok = vec![(0, 2), (1, 2), (2, 2), (3, 2), (4, 2)];
        assert!(is_valid_chain(&ok, 5, (0, 2), (4, 2)));
        // boundary cell in the middle
        let edge = vec![(0, 2), (1, 2), (1, 1), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (4, 2)];
        assert!(!is_valid_chain(&edge, 5, (0, 2), (4, 2)));
    }

    #[test]
    fn endpoints_and_steps() {
        let c = ChainCurve::new(0.7, 3).unwrap();
        let p = c.lattice_path(1 << 20).unwrap().unwrap();
        assert_eq!(p.len() as u128, c.cells() + 1);
        let eps = c.epsilon(3);
        for k in 0..p.len() {
            let v = p.value(k);
            assert!((0.0..=1.0).contains(&v[0]) && (0.0..=1.0).contains(&v[1]));
            if k > 0 {
                let d = p.increment(k - 1, k);
                assert!((d[0] * d[0] + d[1] * d[1]).sqrt() <= 3.0 * eps);
            }
        }
        let start = c.eval(0.0);
        assert!(start[0].abs() < 1e-12 && (start[1] - 0.5).abs() < 1e-12);
        let end = c.eval(1.0);
        assert!((end[0] - 1.0).abs() < 1e-12 && (end[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nesting_is_consistent() {
        // the level-r point at i δ_r is the shared side midpoint: deeper curves agree there
        let shallow = ChainCurve::new(0.7, 2).unwrap();
        let deep = ChainCurve::new(0.7, 4).unwrap();
        let d2 = shallow.delta(2);
        for i in 0..=81 {
            let t = i as f64 * d2;
            let (a, b) = (shallow.eval(t), deep.eval(t));
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn lower_bound_positive_on_lattice() {
        let c = ChainCurve::new(0.7, 2).unwrap();
        let p = c.lattice_path(1 << 20).unwrap().unwrap();
        let mut lo = f64::INFINITY;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let d = p.increment(i, j);
                let dist = (d[0] * d[0] + d[1] * d[1]).sqrt();
                lo = lo.min(dist / (p.time(j) - p.time(i)).powf(0.7));
            }
        }
        assert!(lo > 0.0);
    }
}
