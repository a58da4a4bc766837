//! Width-dimension bounds from covers of grid cubes by closed boxes.
//!
//! A cover instance is a cube `[0, N]^d` (or a union of sub-boxes of it)
//! together with an admissible family: grid-aligned closed boxes whose sides
//! are integers between 1 and `s`. Closed boxes sharing only a face do
//! intersect, so adjacency is always paid for in multiplicity. The
//! multiplicity of a cover is the largest number of its boxes containing a
//! common point; `multiplicity - 1` bounds the width dimension at mesh `s`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::Lattice;

/// Largest number of distinct candidate boxes accepted by
/// [`min_multiplicity_cover`].
pub const EXACT_CANDIDATE_LIMIT: usize = 40;

/// Node budget for the feasibility search behind [`brick_cover`].
const BRICK_SEARCH_BUDGET: u64 = 2_000_000;

/// Largest vertex grid that is counted densely.
const DENSE_VERTEX_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WidimError {
    #[error("invalid cover instance: {0}")]
    InvalidInstance(String),
    #[error("instance has {candidates} candidate boxes; exact search is limited to {limit}")]
    TooLarge { candidates: usize, limit: usize },
    #[error("brick cover needs max side s >= 2 (got {0})")]
    DegenerateBricks(u32),
    #[error("cover search exceeded its budget of {0} nodes")]
    SearchBudget(u64),
    #[error("no cover with multiplicity {target} found for d={d}, N={n}, s={s}")]
    NoCover { d: u32, n: u32, s: u32, target: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cover verification failed: {0}")]
    Verification(String),
}

/// Closed grid box, one `[lo, hi]` integer interval per axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridBox {
    pub intervals: Vec<[u32; 2]>,
}

impl GridBox {
    pub fn new(intervals: Vec<[u32; 2]>) -> Self {
        Self { intervals }
    }

    /// `[0, side]^d`
    pub fn cube(d: u32, side: u32) -> Self {
        Self::new(vec![[0, side]; d as usize])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains_point(&self, p: &[u32]) -> bool {
        self.intervals
            .iter()
            .zip(p)
            .all(|(&[lo, hi], &x)| lo <= x && x <= hi)
    }

    pub fn contains_box(&self, other: &GridBox) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(&[lo, hi], &[a, b])| lo <= a && b <= hi)
    }

    /// Closed boxes intersect when every pair of intervals overlaps,
    /// touching endpoints included.
    pub fn intersects(&self, other: &GridBox) -> bool {
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(&[lo, hi], &[a, b])| lo <= b && a <= hi)
    }

    fn intersection(&self, other: &GridBox) -> Option<GridBox> {
        if !self.intersects(other) {
            return None;
        }
        Some(GridBox::new(
            self.intervals
                .iter()
                .zip(&other.intervals)
                .map(|(&[lo, hi], &[a, b])| [lo.max(a), hi.min(b)])
                .collect(),
        ))
    }

    /// Unit cells of the box: unit intervals on axes of positive length,
    /// the point itself on flat axes.
    fn cells(&self) -> Vec<GridBox> {
        let axes: Vec<Vec<[u32; 2]>> = self
            .intervals
            .iter()
            .map(|&[lo, hi]| {
                if lo == hi {
                    vec![[lo, lo]]
                } else {
                    (lo..hi).map(|k| [k, k + 1]).collect()
                }
            })
            .collect();
        product(&axes).into_iter().map(GridBox::new).collect()
    }

    fn vertices(&self) -> Vec<Vec<u32>> {
        let axes: Vec<Vec<u32>> = self
            .intervals
            .iter()
            .map(|&[lo, hi]| (lo..=hi).collect())
            .collect();
        product(&axes)
    }
}

fn product<T: Copy>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// A cube `[0, N]^d` with admissible box side at most `s`, optionally
/// restricted to a union of component boxes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverInstance {
    pub d: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub s: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<GridBox>>,
}

impl CoverInstance {
    pub fn cube(d: u32, n: u32, s: u32) -> Result<Self, WidimError> {
        let inst = Self {
            d,
            n,
            s,
            components: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn union(d: u32, n: u32, s: u32, components: Vec<GridBox>) -> Result<Self, WidimError> {
        let inst = Self {
            d,
            n,
            s,
            components: Some(components),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), WidimError> {
        let bad = |m: String| Err(WidimError::InvalidInstance(m));
        if self.d < 1 {
            return bad("dimension d must be >= 1".into());
        }
        if !(1 <= self.s && self.s <= self.n) {
            return bad(format!("need 1 <= s <= N, got s={} N={}", self.s, self.n));
        }
        if let Some(components) = &self.components {
            if components.is_empty() {
                return bad("component list is empty".into());
            }
            for c in components {
                if c.dim() != self.d as usize {
                    return bad(format!("component {c:?} is not {}-dimensional", self.d));
                }
                if c.intervals.iter().any(|&[lo, hi]| lo > hi || hi > self.n) {
                    return bad(format!(
                        "component {c:?} leaves the cube [0, {}]^{}",
                        self.n, self.d
                    ));
                }
            }
        }
        Ok(())
    }

    fn parts(&self) -> Vec<GridBox> {
        match &self.components {
            Some(c) => c.clone(),
            None => vec![GridBox::cube(self.d, self.n)],
        }
    }

    fn cells(&self) -> Vec<GridBox> {
        let set: BTreeSet<GridBox> = self.parts().iter().flat_map(|p| p.cells()).collect();
        set.into_iter().collect()
    }

    fn points(&self) -> Vec<Vec<u32>> {
        let set: BTreeSet<Vec<u32>> = self.parts().iter().flat_map(|p| p.vertices()).collect();
        set.into_iter().collect()
    }

    /// Admissible boxes, identified by their trace on the space; each trace
    /// is represented by its lexicographically smallest box.
    fn candidates(&self) -> Vec<GridBox> {
        let per_axis: Vec<[u32; 2]> = (0..self.n)
            .flat_map(|a| (a + 1..=(a + self.s).min(self.n)).map(move |b| [a, b]))
            .collect();
        let axes = vec![per_axis; self.d as usize];
        let parts = self.parts();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for iv in product(&axes) {
            let b = GridBox::new(iv);
            let trace: Vec<Option<GridBox>> = parts.iter().map(|p| b.intersection(p)).collect();
            if trace.iter().all(Option::is_none) {
                continue;
            }
            if seen.insert(trace) {
                out.push(b);
            }
        }
        out
    }

    fn admits(&self, b: &GridBox) -> bool {
        b.dim() == self.d as usize
            && b.intervals
                .iter()
                .all(|&[lo, hi]| lo < hi && hi - lo <= self.s && hi <= self.n)
    }
}

/// A verified cover: every cell of the space lies in some box, and
/// `multiplicity` is the exact maximum point-membership count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub boxes: Vec<GridBox>,
    pub multiplicity: u32,
    pub widim_bound: u32,
}

impl CoverSolution {
    /// Checks admissibility and coverage, and measures the multiplicity.
    pub fn verified(inst: &CoverInstance, boxes: Vec<GridBox>) -> Result<Self, WidimError> {
        inst.validate()?;
        if let Some(b) = boxes.iter().find(|b| !inst.admits(b)) {
            return Err(WidimError::Verification(format!(
                "box {b:?} is not admissible"
            )));
        }
        if let Some(cell) = inst
            .cells()
            .into_iter()
            .find(|c| !boxes.iter().any(|b| b.contains_box(c)))
        {
            return Err(WidimError::Verification(format!(
                "cell {cell:?} is not covered"
            )));
        }
        let multiplicity = measure_multiplicity(inst, &boxes)?;
        Ok(Self {
            boxes,
            multiplicity,
            widim_bound: multiplicity.saturating_sub(1),
        })
    }
}

/// Drops boxes, in the given order, whose cells are all covered by the
/// boxes that remain. Dropping a box never raises the multiplicity.
fn prune_redundant(inst: &CoverInstance, boxes: Vec<GridBox>) -> Vec<GridBox> {
    let cells = inst.cells();
    let covered: Vec<Vec<usize>> = boxes
        .iter()
        .map(|b| {
            (0..cells.len())
                .filter(|&i| b.contains_box(&cells[i]))
                .collect()
        })
        .collect();
    let mut count = vec![0u32; cells.len()];
    for cs in &covered {
        for &c in cs {
            count[c] += 1;
        }
    }
    let mut keep = vec![true; boxes.len()];
    for (i, cs) in covered.iter().enumerate() {
        if cs.iter().all(|&c| count[c] >= 2) {
            keep[i] = false;
            for &c in cs {
                count[c] -= 1;
            }
        }
    }
    boxes
        .into_iter()
        .zip(keep)
        .filter_map(|(b, k)| k.then_some(b))
        .collect()
}

fn measure_multiplicity(inst: &CoverInstance, boxes: &[GridBox]) -> Result<u32, WidimError> {
    if inst.components.is_none() {
        let side = inst.n as usize + 1;
        let total = side
            .checked_pow(inst.d)
            .filter(|&t| t <= DENSE_VERTEX_LIMIT)
            .ok_or_else(|| WidimError::InvalidInstance("vertex grid too large to count".into()))?;
        let mut counts = vec![0u32; total];
        for b in boxes {
            for v in b.vertices() {
                let idx = v.iter().fold(0usize, |acc, &x| acc * side + x as usize);
                counts[idx] += 1;
            }
        }
        return Ok(counts.into_iter().max().unwrap_or(0));
    }
    Ok(inst
        .points()
        .iter()
        .map(|p| boxes.iter().filter(|b| b.contains_point(p)).count() as u32)
        .max()
        .unwrap_or(0))
}

enum Outcome {
    Found(Vec<usize>),
    Exhausted,
    OutOfBudget,
}

/// Depth-first search for a cover with multiplicity at most `target`.
/// Candidates are groups of boxes chosen together (single boxes, or orbits
/// under a symmetry). Each node branches on the uncovered cell with the
/// fewest feasible candidates; once a candidate has been tried at a node it
/// is excluded from its siblings, so no selection is visited twice.
struct Search<'a> {
    cand_cells: &'a [Vec<usize>],
    cand_points: &'a [Vec<(usize, u32)>],
    cell_cands: &'a [Vec<usize>],
    target: u32,
    point_count: Vec<u32>,
    cell_cover: Vec<u32>,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl<'a> Search<'a> {
    fn run(
        cand_cells: &'a [Vec<usize>],
        cand_points: &'a [Vec<(usize, u32)>],
        cell_cands: &'a [Vec<usize>],
        n_points: usize,
        target: u32,
        budget: u64,
    ) -> Outcome {
        let mut s = Search {
            cand_cells,
            cand_points,
            cell_cands,
            target,
            point_count: vec![0; n_points],
            cell_cover: vec![0; cell_cands.len()],
            excluded: vec![false; cand_cells.len()],
            chosen: Vec::new(),
            nodes: 0,
            budget,
        };
        s.dfs()
    }

    fn feasible(&self, c: usize) -> bool {
        !self.excluded[c]
            && self.cand_points[c]
                .iter()
                .all(|&(p, w)| self.point_count[p] + w <= self.target)
    }

    fn apply(&mut self, c: usize, delta: i32) {
        for &(p, w) in &self.cand_points[c] {
            self.point_count[p] = self.point_count[p].wrapping_add_signed(delta * w as i32);
        }
        for &cell in &self.cand_cells[c] {
            self.cell_cover[cell] = self.cell_cover[cell].wrapping_add_signed(delta);
        }
    }

    fn dfs(&mut self) -> Outcome {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Outcome::OutOfBudget;
        }
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (cell, cands) in self.cell_cands.iter().enumerate() {
            if self.cell_cover[cell] > 0 {
                continue;
            }
            let options: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&c| self.feasible(c))
                .collect();
            if options.is_empty() {
                return Outcome::Exhausted;
            }
            if best.as_ref().is_none_or(|(_, o)| options.len() < o.len()) {
                best = Some((cell, options));
            }
        }
        let Some((_, mut options)) = best else {
            return Outcome::Found(self.chosen.clone());
        };
        // Candidates covering more new cells first; stable, so ties keep
        // lexicographic order.
        options.sort_by_key(|&c| {
            std::cmp::Reverse(
                self.cand_cells[c]
                    .iter()
                    .filter(|&&cell| self.cell_cover[cell] == 0)
                    .count(),
            )
        });
        let mut tried = Vec::with_capacity(options.len());
        let mut outcome = Outcome::Exhausted;
        for c in options {
            if self.excluded[c] || !self.feasible(c) {
                continue;
            }
            self.apply(c, 1);
            self.chosen.push(c);
            match self.dfs() {
                Outcome::Exhausted => {}
                other => {
                    outcome = other;
                    self.chosen.pop();
                    self.apply(c, -1);
                    break;
                }
            }
            self.chosen.pop();
            self.apply(c, -1);
            self.excluded[c] = true;
            tried.push(c);
        }
        for c in tried {
            self.excluded[c] = false;
        }
        outcome
    }
}

struct Prepared {
    candidates: Vec<Vec<GridBox>>,
    cand_cells: Vec<Vec<usize>>,
    cand_points: Vec<Vec<(usize, u32)>>,
    cell_cands: Vec<Vec<usize>>,
    n_points: usize,
}

fn prepare(inst: &CoverInstance, candidates: Vec<Vec<GridBox>>) -> Prepared {
    let cells = inst.cells();
    let points = inst.points();
    let cand_cells: Vec<Vec<usize>> = candidates
        .iter()
        .map(|g| {
            (0..cells.len())
                .filter(|&i| g.iter().any(|b| b.contains_box(&cells[i])))
                .collect()
        })
        .collect();
    let cand_points: Vec<Vec<(usize, u32)>> = candidates
        .iter()
        .map(|g| {
            (0..points.len())
                .filter_map(|i| {
                    let w = g.iter().filter(|b| b.contains_point(&points[i])).count() as u32;
                    (w > 0).then_some((i, w))
                })
                .collect()
        })
        .collect();
    let mut cell_cands = vec![Vec::new(); cells.len()];
    for (c, cs) in cand_cells.iter().enumerate() {
        for &cell in cs {
            cell_cands[cell].push(c);
        }
    }
    Prepared {
        candidates,
        cand_cells,
        cand_points,
        cell_cands,
        n_points: points.len(),
    }
}

fn search_target(p: &Prepared, target: u32, budget: u64) -> Result<Option<Vec<GridBox>>, u64> {
    match Search::run(
        &p.cand_cells,
        &p.cand_points,
        &p.cell_cands,
        p.n_points,
        target,
        budget,
    ) {
        Outcome::Found(idx) => Ok(Some(
            idx.into_iter()
                .flat_map(|i| p.candidates[i].clone())
                .collect(),
        )),
        Outcome::Exhausted => Ok(None),
        Outcome::OutOfBudget => Err(budget),
    }
}

fn singletons(boxes: Vec<GridBox>) -> Vec<Vec<GridBox>> {
    boxes.into_iter().map(|b| vec![b]).collect()
}

/// Candidate boxes grouped into orbits of the point reflection
/// `x -> (N, ..., N) - x` of the cube.
fn reflection_orbits(inst: &CoverInstance) -> Vec<Vec<GridBox>> {
    let n = inst.n;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for b in inst.candidates() {
        if seen.contains(&b) {
            continue;
        }
        let mirror = GridBox::new(
            b.intervals
                .iter()
                .map(|&[lo, hi]| [n - hi, n - lo])
                .collect(),
        );
        seen.insert(b.clone());
        if mirror == b {
            out.push(vec![b]);
        } else {
            seen.insert(mirror.clone());
            out.push(vec![b, mirror]);
        }
    }
    out
}

/// Exact minimum multiplicity over all covers of the instance by admissible
/// boxes.
pub fn min_multiplicity_cover(inst: &CoverInstance) -> Result<CoverSolution, WidimError> {
    inst.validate()?;
    let candidates = inst.candidates();
    if candidates.len() > EXACT_CANDIDATE_LIMIT {
        return Err(WidimError::TooLarge {
            candidates: candidates.len(),
            limit: EXACT_CANDIDATE_LIMIT,
        });
    }
    let prepared = prepare(inst, singletons(candidates));
    for target in 1..=prepared.candidates.len() as u32 {
        match search_target(&prepared, target, u64::MAX) {
            Ok(Some(boxes)) => {
                let mut boxes = prune_redundant(inst, boxes);
                boxes.sort();
                let sol = CoverSolution::verified(inst, boxes)?;
                if sol.multiplicity != target {
                    return Err(WidimError::Verification(format!(
                        "search target {target} but measured multiplicity {}",
                        sol.multiplicity
                    )));
                }
                return Ok(sol);
            }
            Ok(None) => continue,
            Err(_) => unreachable!("exact search runs without a budget"),
        }
    }
    Err(WidimError::Verification(
        "the admissible boxes do not cover the instance".into(),
    ))
}

/// Boundaries `offset + k L` inside `(0, N)`, plus the endpoints.
fn staggered_intervals(n: u32, len: u32, offset: u32) -> Vec<[u32; 2]> {
    let mut cuts = vec![0];
    let mut x = offset % len;
    if x == 0 {
        x = len;
    }
    while x < n {
        cuts.push(x);
        x += len;
    }
    cuts.push(n);
    cuts.windows(2).map(|w| [w[0], w[1]]).collect()
}

/// How the cut offset of an axis depends on the brick's indices along the
/// axes above it.
#[derive(Debug, Clone, Copy)]
enum Stagger {
    /// Offset `code * floor(s / 2^levels)` with `code` the binary number
    /// formed by the index parities.
    ParityCode,
    /// Offset `+S mod s` on the innermost axis and `-S mod s` elsewhere,
    /// with `S` the index sum.
    IndexSum,
}

/// Staggered bricks of side `s`: the outermost axis is cut at multiples of
/// `s`; every other axis is cut with an offset chosen by `rule`.
fn staggered_bricks(d: u32, n: u32, s: u32, rule: Stagger) -> Vec<GridBox> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<[u32; 2]>, Vec<u32>)> = vec![(Vec::new(), Vec::new())];
    while let Some((partial, indices)) = stack.pop() {
        let axis = d as usize - 1 - partial.len();
        let levels = partial.len() as u32;
        let offset = match rule {
            Stagger::ParityCode => {
                let code = indices
                    .iter()
                    .rev()
                    .enumerate()
                    .fold(0u32, |acc, (bit, &k)| acc | ((k % 2) << bit));
                if levels == 0 {
                    0
                } else {
                    code * (s >> levels)
                }
            }
            Stagger::IndexSum => {
                let sum = indices.iter().sum::<u32>() % s;
                if axis == 0 {
                    sum
                } else {
                    (s - sum) % s
                }
            }
        };
        for (k, iv) in staggered_intervals(n, s, offset)
            .into_iter()
            .enumerate()
            .rev()
        {
            let mut p = partial.clone();
            p.push(iv);
            let mut idx = indices.clone();
            idx.push(k as u32);
            if axis == 0 {
                p.reverse();
                out.push(GridBox::new(p));
            } else {
                stack.push((p, idx));
            }
        }
    }
    out.sort();
    out
}

/// Shifted-brick cover of `[0, N]^d` by boxes of side at most `s`.
///
/// For `N > s` the result has multiplicity exactly `d + 1`; when the
/// staggered pattern cannot reach that (small `s` relative to `d`) a
/// bounded feasibility search over all admissible boxes takes over. For
/// `N = s` the single box `[0, N]^d` is returned.
pub fn brick_cover(d: u32, n: u32, s: u32) -> Result<CoverSolution, WidimError> {
    if s < 2 {
        return Err(WidimError::DegenerateBricks(s));
    }
    let inst = CoverInstance::cube(d, n, s)?;
    if n == s {
        return CoverSolution::verified(&inst, vec![GridBox::cube(d, n)]);
    }
    for rule in [Stagger::ParityCode, Stagger::IndexSum] {
        let sol = CoverSolution::verified(&inst, staggered_bricks(d, n, s, rule))?;
        if sol.multiplicity == d + 1 {
            return Ok(sol);
        }
    }
    // Reflection-symmetric covers first (a much smaller search), then all.
    let mut out_of_budget = false;
    for groups in [reflection_orbits(&inst), singletons(inst.candidates())] {
        match search_target(&prepare(&inst, groups), d + 1, BRICK_SEARCH_BUDGET) {
            Ok(Some(boxes)) => {
                let mut boxes = prune_redundant(&inst, boxes);
                boxes.sort();
                return CoverSolution::verified(&inst, boxes);
            }
            Ok(None) => {}
            Err(_) => out_of_budget = true,
        }
    }
    if out_of_budget {
        Err(WidimError::SearchBudget(BRICK_SEARCH_BUDGET))
    } else {
        Err(WidimError::NoCover {
            d,
            n,
            s,
            target: d + 1,
        })
    }
}

/// Tiling by side-`s` boxes (last one clipped); multiplicity `2^d` once
/// `N > s`. Always available, used when nothing sharper applies.
fn tiling_cover(inst: &CoverInstance) -> Result<CoverSolution, WidimError> {
    let axis: Vec<[u32; 2]> = staggered_intervals(inst.n, inst.s, 0);
    let boxes = product(&vec![axis; inst.d as usize])
        .into_iter()
        .map(GridBox::new)
        .collect();
    CoverSolution::verified(inst, boxes)
}

/// How a cover in a slope table was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMethod {
    Exact,
    Brick,
    Tiling,
    /// Per-component covers combined into one cover of the union.
    Assembled,
}

/// Best available cover of a full cube: exact when small enough, then
/// bricks, then the plain tiling.
fn best_cube_cover(d: u32, n: u32, s: u32) -> Result<(CoverSolution, CoverMethod), WidimError> {
    let inst = CoverInstance::cube(d, n, s)?;
    match min_multiplicity_cover(&inst) {
        Ok(sol) => return Ok((sol, CoverMethod::Exact)),
        Err(WidimError::TooLarge { .. }) => {}
        Err(e) => return Err(e),
    }
    match brick_cover(d, n, s) {
        Ok(sol) => Ok((sol, CoverMethod::Brick)),
        Err(
            WidimError::DegenerateBricks(_)
            | WidimError::SearchBudget(_)
            | WidimError::NoCover { .. },
        ) => Ok((tiling_cover(&inst)?, CoverMethod::Tiling)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WindowKind {
    /// The shift on `([0,1]^D)^Z` with the sup metric over the window.
    FullShift { dim: u32 },
    /// The closure of the union of period-`m` points `F_m ~ [0, 1/m]^m`.
    Residual,
}

/// A shift-type system seen through a window of length `window`, with the
/// unit interval resolved into `unit_cells` grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSystem {
    pub kind: WindowKind,
    pub window: u32,
    pub unit_cells: u32,
}

impl WindowSystem {
    pub fn validate(&self) -> Result<(), WidimError> {
        if self.window < 1 {
            return Err(WidimError::InvalidArgument(
                "window length must be >= 1".into(),
            ));
        }
        if self.unit_cells < 1 {
            return Err(WidimError::InvalidArgument(
                "unit_cells must be >= 1".into(),
            ));
        }
        if let WindowKind::FullShift { dim } = self.kind {
            if dim < 1 {
                return Err(WidimError::InvalidArgument(
                    "full shift dimension must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Cover instance for the window projection of the system at mesh
/// `eps_cells` (in grid cells).
pub fn window_instance(sys: &WindowSystem, eps_cells: u32) -> Result<CoverInstance, WidimError> {
    sys.validate()?;
    let n = sys.unit_cells;
    let s = eps_cells.clamp(1, n);
    match sys.kind {
        WindowKind::FullShift { dim } => CoverInstance::cube(dim * sys.window, n, s),
        WindowKind::Residual => {
            let d = sys.window;
            let components = (1..=d)
                .map(|m| {
                    let side = n.div_ceil(m);
                    GridBox::new(
                        (0..d)
                            .map(|axis| if axis < m { [0, side] } else { [0, 0] })
                            .collect(),
                    )
                })
                .collect();
            CoverInstance::union(d, n, s, components)
        }
    }
}

/// Cover of a union instance assembled from per-component covers: every
/// component of side at most `s` is absorbed by the single box `[0, s]^d`;
/// larger ones get their own best cube cover, extended by `[0, 1]` on the
/// component's flat axes. The multiplicity is measured on the assembled
/// cover, so it is exact for that cover and an upper bound for the instance.
fn assembled_cover(inst: &CoverInstance) -> Result<CoverSolution, WidimError> {
    let mut boxes = BTreeSet::new();
    let mut small = false;
    for comp in inst.parts() {
        let live: Vec<usize> = (0..comp.dim())
            .filter(|&a| comp.intervals[a][0] < comp.intervals[a][1])
            .collect();
        let side = comp
            .intervals
            .iter()
            .map(|&[lo, hi]| hi - lo)
            .max()
            .unwrap_or(0);
        if side <= inst.s {
            small = true;
            continue;
        }
        let cubic = live
            .iter()
            .all(|&a| comp.intervals[a][1] - comp.intervals[a][0] == side);
        if !cubic {
            return Err(WidimError::InvalidInstance(format!(
                "component {comp:?} is not a cube"
            )));
        }
        let (sub, _) = best_cube_cover(live.len() as u32, side, inst.s)?;
        for b in sub.boxes {
            let mut iv = Vec::with_capacity(comp.dim());
            let mut k = 0;
            for axis in 0..comp.dim() {
                let [lo, hi] = comp.intervals[axis];
                if lo < hi {
                    let [a, c] = b.intervals[k];
                    iv.push([lo + a, lo + c]);
                    k += 1;
                } else {
                    let start = lo.min(inst.n - 1);
                    iv.push([start, start + 1]);
                }
            }
            boxes.insert(GridBox::new(iv));
        }
    }
    let mut boxes: Vec<GridBox> = boxes.into_iter().collect();
    if small {
        boxes.push(GridBox::cube(inst.d, inst.s));
    }
    let mut boxes = prune_redundant(inst, boxes);
    boxes.sort();
    CoverSolution::verified(inst, boxes)
}

/// One row of a mean-dimension slope table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub n: u32,
    pub widim_bound: u32,
    /// `widim_bound / n`
    pub ratio: f64,
    pub method: CoverMethod,
    /// True unless the bound comes from exact search on the whole window.
    pub upper_bound: bool,
}

fn window_cover(
    sys: &WindowSystem,
    eps_cells: u32,
) -> Result<(CoverSolution, CoverMethod), WidimError> {
    let inst = window_instance(sys, eps_cells)?;
    match sys.kind {
        WindowKind::FullShift { .. } => best_cube_cover(inst.d, inst.n, inst.s),
        WindowKind::Residual => match min_multiplicity_cover(&inst) {
            Ok(sol) => Ok((sol, CoverMethod::Exact)),
            Err(WidimError::TooLarge { .. }) => {
                Ok((assembled_cover(&inst)?, CoverMethod::Assembled))
            }
            Err(e) => Err(e),
        },
    }
}

/// Width-dimension bounds of the window projections for each window length
/// in `windows`, normalized by the window length.
pub fn mean_dim_slope(
    kind: WindowKind,
    unit_cells: u32,
    eps_cells: u32,
    windows: &[u32],
) -> Result<Vec<SlopeRow>, WidimError> {
    windows
        .iter()
        .map(|&n| {
            let sys = WindowSystem {
                kind,
                window: n,
                unit_cells,
            };
            let (sol, method) = window_cover(&sys, eps_cells)?;
            Ok(SlopeRow {
                n,
                widim_bound: sol.widim_bound,
                ratio: sol.widim_bound as f64 / n as f64,
                method,
                upper_bound: method != CoverMethod::Exact,
            })
        })
        .collect()
}

/// Dimension of the period-`n` fixed-point set of the residual example,
/// `[0, 1/n]^n`. For `n <= 2` the value is confirmed by exact cover search
/// on the corresponding cube.
pub fn residual_fixedpoint_dim(n: u32) -> Result<u32, WidimError> {
    if n < 1 {
        return Err(WidimError::InvalidArgument("period must be >= 1".into()));
    }
    if n <= 2 {
        let sol = min_multiplicity_cover(&CoverInstance::cube(n, 3, 2)?)?;
        if sol.widim_bound != n {
            return Err(WidimError::Verification(format!(
                "cube of dimension {n} has cover bound {}",
                sol.widim_bound
            )));
        }
    }
    Ok(n)
}

/// `2 n^2 (N + 1) deg`: dimension of the space of degree-`deg` sections
/// counted over an `n x n` block of periods.
pub fn riemann_roch_dim(proj_dim: i64, deg: i64, n: i64) -> Result<u64, WidimError> {
    if proj_dim < 1 || deg < 1 || n < 0 {
        return Err(WidimError::InvalidArgument(format!(
            "need N >= 1, deg >= 1, n >= 0 (got N={proj_dim}, deg={deg}, n={n})"
        )));
    }
    let (p, d, n) = (proj_dim as u64, deg as u64, n as u64);
    2u64.checked_mul(n)
        .and_then(|v| v.checked_mul(n))
        .and_then(|v| v.checked_mul(p + 1))
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(|| WidimError::InvalidArgument("result overflows u64".into()))
}

/// Lower and upper mean-dimension bounds `(2 e_ell (N+1), 4 e_sup N)`.
pub fn theorem1_bounds(proj_dim: i64, e_ell: f64, e_sup: f64) -> Result<(f64, f64), WidimError> {
    if proj_dim < 1 {
        return Err(WidimError::InvalidArgument(format!(
            "N must be >= 1, got {proj_dim}"
        )));
    }
    if !(0.0 <= e_ell && e_ell <= e_sup && e_sup <= 1.0) {
        return Err(WidimError::InvalidArgument(format!(
            "need 0 <= e_ell <= e_sup <= 1, got e_ell={e_ell}, e_sup={e_sup}"
        )));
    }
    let n = proj_dim as f64;
    let lower = 2.0 * e_ell * (n + 1.0);
    let upper = 4.0 * e_sup * n;
    if e_ell <= 2.0 * n * e_sup / (n + 1.0) && lower > upper {
        return Err(WidimError::Verification(format!(
            "lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    Ok((lower, upper))
}

/// Converts mean dimension for a lattice action into mean dimension per unit
/// area of the plane.
pub fn meandim_lattice_to_plane(value: f64, lattice: &Lattice) -> Result<f64, WidimError> {
    let area = lattice.area();
    if !(area > 0.0) {
        return Err(WidimError::InvalidArgument("lattice has zero area".into()));
    }
    Ok(value / area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    /// Minimum multiplicity by enumerating every subset of candidates.
    fn brute_force(inst: &CoverInstance) -> u32 {
        let cands = inst.candidates();
        assert!(cands.len() <= 16);
        let cells = inst.cells();
        let points = inst.points();
        let mut best = u32::MAX;
        for mask in 1u32..(1 << cands.len()) {
            let chosen: Vec<&GridBox> = (0..cands.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| &cands[i])
                .collect();
            if !cells
                .iter()
                .all(|c| chosen.iter().any(|b| b.contains_box(c)))
            {
                continue;
            }
            let m = points
                .iter()
                .map(|p| chosen.iter().filter(|b| b.contains_point(p)).count() as u32)
                .max()
                .unwrap();
            best = best.min(m);
        }
        best
    }

    #[test]
    fn segment_needs_overlap() {
        let sol = min_multiplicity_cover(&CoverInstance::cube(1, 4, 2).unwrap()).unwrap();
        assert_eq!((sol.multiplicity, sol.widim_bound), (2, 1));
    }

    #[test]
    fn single_box() {
        let sol = min_multiplicity_cover(&CoverInstance::cube(1, 1, 1).unwrap()).unwrap();
        assert_eq!((sol.multiplicity, sol.widim_bound), (1, 0));
        assert_eq!(sol.boxes, vec![GridBox::new(vec![[0, 1]])]);
    }

    #[test]
    fn square_needs_three() {
        let inst = CoverInstance::cube(2, 3, 2).unwrap();
        assert_eq!(inst.candidates().len(), 25);
        let sol = min_multiplicity_cover(&inst).unwrap();
        assert_eq!((sol.multiplicity, sol.widim_bound), (3, 2));
    }

    #[test]
    fn exact_matches_enumeration() {
        for (d, n, s) in [
            (1, 2, 1),
            (1, 3, 1),
            (1, 3, 2),
            (1, 4, 2),
            (1, 4, 3),
            (1, 5, 2),
            (2, 2, 1),
            (2, 2, 2),
        ] {
            let inst = CoverInstance::cube(d, n, s).unwrap();
            assert_eq!(
                min_multiplicity_cover(&inst).unwrap().multiplicity,
                brute_force(&inst),
                "d={d} N={n} s={s}"
            );
        }
    }

    #[test]
    fn never_one_when_cube_exceeds_mesh() {
        for (d, n, s) in [(1, 2, 1), (1, 5, 3), (2, 3, 1), (2, 3, 2)] {
            let sol = min_multiplicity_cover(&CoverInstance::cube(d, n, s).unwrap()).unwrap();
            assert!(sol.multiplicity >= 2);
        }
    }

    #[test]
    fn size_limit_enforced() {
        let err = min_multiplicity_cover(&CoverInstance::cube(3, 3, 2).unwrap()).unwrap_err();
        assert_eq!(
            err,
            WidimError::TooLarge {
                candidates: 125,
                limit: EXACT_CANDIDATE_LIMIT
            }
        );
    }

    #[test]
    fn instance_validation() {
        assert!(CoverInstance::cube(0, 3, 2).is_err());
        assert!(CoverInstance::cube(1, 3, 4).is_err());
        assert!(CoverInstance::cube(1, 3, 0).is_err());
        assert!(CoverInstance::union(1, 3, 2, vec![GridBox::new(vec![[0, 4]])]).is_err());
        assert!(CoverInstance::union(2, 3, 2, vec![GridBox::new(vec![[0, 2]])]).is_err());
    }

    #[test]
    fn verification_rejects_bad_covers() {
        let inst = CoverInstance::cube(1, 4, 2).unwrap();
        assert!(CoverSolution::verified(&inst, vec![GridBox::new(vec![[0, 2]])]).is_err());
        assert!(CoverSolution::verified(&inst, vec![GridBox::new(vec![[0, 4]])]).is_err());
        let ok = CoverSolution::verified(
            &inst,
            vec![GridBox::new(vec![[0, 2]]), GridBox::new(vec![[2, 4]])],
        )
        .unwrap();
        assert_eq!(ok.multiplicity, 2);
    }

    #[test]
    fn bricks_reach_d_plus_one() {
        for (d, n, s) in [
            (1, 6, 2),
            (2, 6, 2),
            (3, 4, 2),
            (2, 3, 2),
            (2, 7, 3),
            (3, 9, 4),
            (3, 5, 3),
            (4, 10, 8),
        ] {
            let sol = brick_cover(d, n, s).unwrap();
            assert_eq!(sol.multiplicity, d + 1, "d={d} N={n} s={s}");
        }
    }

    #[test]
    fn brick_edge_cases() {
        assert_eq!(brick_cover(2, 3, 1), Err(WidimError::DegenerateBricks(1)));
        assert_eq!(brick_cover(2, 3, 3).unwrap().multiplicity, 1);
        assert!(brick_cover(2, 2, 3).is_err());
    }

    #[test]
    fn full_shift_window_unfolds_to_cube() {
        let sys = WindowSystem {
            kind: WindowKind::FullShift { dim: 1 },
            window: 2,
            unit_cells: 3,
        };
        assert_eq!(
            window_instance(&sys, 2).unwrap(),
            CoverInstance::cube(2, 3, 2).unwrap()
        );
    }

    #[test]
    fn residual_windows() {
        let one = WindowSystem {
            kind: WindowKind::Residual,
            window: 1,
            unit_cells: 4,
        };
        let inst = window_instance(&one, 2).unwrap();
        assert_eq!(inst.components, Some(vec![GridBox::new(vec![[0, 4]])]));

        let four = WindowSystem { window: 4, ..one };
        let inst = window_instance(&four, 2).unwrap();
        let comps = inst.components.unwrap();
        assert_eq!(comps.len(), 4);
        for (m, c) in comps.iter().enumerate().skip(2) {
            assert!(
                c.intervals.iter().all(|&[lo, hi]| hi - lo <= 2),
                "m = {}",
                m + 1
            );
        }
    }

    #[test]
    fn full_shift_slope_is_one() {
        let rows = mean_dim_slope(WindowKind::FullShift { dim: 1 }, 3, 2, &[1, 2]).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.ratio).collect::<Vec<_>>(),
            vec![1.0, 1.0]
        );
        assert!(rows.iter().all(|r| !r.upper_bound));
        let rows = mean_dim_slope(WindowKind::FullShift { dim: 1 }, 3, 2, &[3]).unwrap();
        assert_eq!(
            (rows[0].widim_bound, rows[0].method, rows[0].upper_bound),
            (3, CoverMethod::Brick, true)
        );
        let rows = mean_dim_slope(WindowKind::FullShift { dim: 2 }, 3, 2, &[1]).unwrap();
        assert_eq!(rows[0].widim_bound, 2);
    }

    #[test]
    fn residual_slope_decreases() {
        let rows = mean_dim_slope(WindowKind::Residual, 4, 2, &[1, 2, 3, 4]).unwrap();
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
        assert!(*ratios.last().unwrap() <= 0.5);
        assert!(rows.iter().all(|r| r.widim_bound <= 2));
    }

    #[test]
    fn empty_window_list() {
        assert!(mean_dim_slope(WindowKind::Residual, 4, 2, &[])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn fixed_point_dims() {
        for n in 1..=7 {
            assert_eq!(residual_fixedpoint_dim(n).unwrap(), n);
        }
        assert!(residual_fixedpoint_dim(0).is_err());
    }

    #[test]
    fn section_counts() {
        assert_eq!(riemann_roch_dim(1, 2, 1).unwrap(), 8);
        assert_eq!(riemann_roch_dim(4, 7, 0).unwrap(), 0);
        assert_eq!(riemann_roch_dim(2, 3, 2).unwrap(), 72);
        assert!(riemann_roch_dim(1, -1, 1).is_err());
        assert!(riemann_roch_dim(0, 1, 1).is_err());
        assert!(riemann_roch_dim(1, 1, -1).is_err());
    }

    #[test]
    fn bounds() {
        let (lo, _) = theorem1_bounds(1, 0.615_019_867_8, 0.615_019_867_8).unwrap();
        assert!((lo - 2.460_079_471).abs() < 1e-9);
        assert_eq!(theorem1_bounds(1, 0.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(theorem1_bounds(3, 0.5, 0.5).unwrap(), (4.0, 6.0));
        assert!(theorem1_bounds(1, 0.6, 0.5).is_err());
        assert!(theorem1_bounds(1, -0.1, 0.5).is_err());
        assert!(theorem1_bounds(1, 0.5, 1.5).is_err());
        assert!(theorem1_bounds(0, 0.5, 0.5).is_err());
    }

    #[test]
    fn lattice_conversion() {
        assert_eq!(
            meandim_lattice_to_plane(4.0, &Lattice::unit_square()).unwrap(),
            4.0
        );
        let lat = Lattice::new(Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0)).unwrap();
        assert_eq!(meandim_lattice_to_plane(0.0, &lat).unwrap(), 0.0);
        assert_eq!(meandim_lattice_to_plane(12.0, &lat).unwrap(), 2.0);
    }

    #[test]
    fn json_shape() {
        let inst = CoverInstance::cube(1, 4, 2).unwrap();
        let json = serde_json::to_value(&inst).unwrap();
        assert_eq!(json, serde_json::json!({"d": 1, "N": 4, "s": 2}));
        let sol = min_multiplicity_cover(&inst).unwrap();
        let json = serde_json::to_value(&sol).unwrap();
        assert_eq!(json["boxes"], serde_json::json!([[[0, 2]], [[2, 4]]]));
        assert_eq!(json["multiplicity"], 2);
        let back: CoverSolution = serde_json::from_value(json).unwrap();
        assert_eq!(back, sol);
        assert!(serde_json::from_str::<CoverInstance>(r#"{"d":1,"N":4,"s":2,"x":0}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn coarser_mesh_never_hurts(d in 1u32..=2, n in 2u32..=6, s in 1u32..=5) {
            let n = if d == 2 { n.min(3) } else { n };
            let s = s.min(n - 1).max(1);
            let fine = min_multiplicity_cover(&CoverInstance::cube(d, n, s).unwrap()).unwrap();
            let coarse = min_multiplicity_cover(&CoverInstance::cube(d, n, s + 1).unwrap()).unwrap();
            prop_assert!(coarse.multiplicity <= fine.multiplicity);
        }

        #[test]
        fn bricks_never_beat_exact(d in 1u32..=2, n in 3u32..=8, s in 2u32..=4) {
            let n = if d == 2 { 3 } else { n };
            let s = s.min(n);
            let inst = CoverInstance::cube(d, n, s).unwrap();
            let exact = min_multiplicity_cover(&inst).unwrap();
            let brick = brick_cover(d, n, s).unwrap();
            prop_assert!(brick.multiplicity >= exact.multiplicity);
        }
    }
}
