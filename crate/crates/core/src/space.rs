//! Finite metric measure spaces, ball enumeration and geometric constants.
//!
//! A [`Space`] is a finite point set with an explicit metric, a strictly
//! positive measure per point, optional coordinates and optional adjacency.
//! Open balls `B(x, r) = {y : d(x, y) < r}` are the basic geometric objects;
//! on a finite space only finitely many distinct balls exist and the crate
//! enumerates them once per space, deduplicated by member set.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Hard cap on grid sizes accepted by [`build_grid`].
pub const GRID_POINT_CAP: usize = 10_000;
/// Hard cap on the Cayley-graph radius accepted by [`build_cayley_z2`].
pub const CAYLEY_RADIUS_CAP: u32 = 50;

/// A real-valued field indexed by point id.
#[derive(Debug, Clone, PartialEq)]
pub struct PointField(Vec<f64>);

impl PointField {
    pub fn new(values: Vec<f64>) -> Self {
        PointField(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        PointField(vec![c; n])
    }

    pub fn zeros(n: usize) -> Self {
        PointField(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> PointField {
        PointField(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, lambda: f64) -> PointField {
        self.map(|v| lambda * v)
    }

    pub fn add(&self, other: &PointField) -> PointField {
        PointField(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &PointField) -> PointField {
        PointField(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for PointField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for PointField {
    fn from(v: Vec<f64>) -> Self {
        PointField(v)
    }
}

/// How per-point measures are assigned by the grid builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    Counting,
    CellVolume,
}

/// Which discrete gradient the space uses; fixed when the space is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Per-axis central differences (one-sided at the boundary); grids only.
    GridCentral,
    /// Upper-gradient form `max_{y ~ x} |f(x)-f(y)| / d(x,y)`.
    GraphUpper,
}

#[derive(Debug, Clone)]
pub enum Metric {
    /// Euclidean distance on stored coordinates.
    Euclidean,
    /// Word metric of Z^2 (l^1 distance on stored coordinates).
    WordL1,
    /// Explicit symmetric matrix, row-major n*n.
    Matrix(Vec<f64>),
}

/// Build recipe kept by grid spaces so they can be dyadically refined.
#[derive(Debug, Clone)]
pub struct GridInfo {
    pub dim: usize,
    pub extents: Vec<(f64, f64)>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    pub measure_mode: MeasureMode,
}

/// An open metric ball, materialized.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: usize,
    /// Representative radius: midpoint of the radius interval realizing the
    /// member set (1.5x the max center distance for the whole-space ball).
    pub radius: f64,
    /// Member point ids, sorted.
    pub members: Vec<usize>,
    pub mass: f64,
}

/// Per-center ordering of all points by distance, with prefix masses.
#[derive(Debug)]
pub(crate) struct CenterOrder {
    pub ids: Vec<u32>,
    pub dist: Vec<f64>,
    /// prefix_mass[k] = measure of the first k points in this order.
    pub prefix_mass: Vec<f64>,
}

impl CenterOrder {
    /// Mass of the open ball of radius `r` around this center.
    pub fn mass_below(&self, r: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d < r);
        self.prefix_mass[k]
    }
}

/// One distinct ball in the deduplicated family.
///
/// `center`/`cut` give the canonical realization: the member set is the first
/// `cut` entries of that center's distance order. `lower`/`upper` delimit the
/// radius interval realizing the set from the canonical center; `max_lower`
/// is the largest minimal realizing radius over *all* centers realizing the
/// same set, and is what a radius cap filters on.
#[derive(Debug, Clone)]
pub struct FamilyBall {
    pub center: u32,
    pub cut: u32,
    pub lower: f64,
    pub upper: f64,
    pub max_lower: f64,
    pub mass: f64,
    rep_uncapped: f64,
}

impl FamilyBall {
    pub fn passes_cap(&self, cap: f64) -> bool {
        self.max_lower < cap
    }

    /// Representative radius, clamped into `(lower, cap)` when the cap cuts
    /// into the realizing interval.
    pub fn rep_radius(&self, cap: f64) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper.min(cap))
        } else {
            let base = if self.lower == 0.0 {
                1.0
            } else {
                1.5 * self.lower
            };
            if base >= cap {
                0.5 * (self.lower + cap)
            } else {
                base
            }
        }
    }
}

#[derive(Debug)]
pub struct BallFamily {
    /// Sorted by (center, cut).
    pub balls: Vec<FamilyBall>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// A finite metric measure space: the discrete stand-in for `(M, d, mu)`.
#[derive(Debug)]
pub struct Space {
    coords: Option<Vec<Vec<f64>>>,
    metric: Metric,
    measure: Vec<f64>,
    adjacency: Option<Vec<Vec<usize>>>,
    gradient_mode: GradientMode,
    grid: Option<GridInfo>,
    total_measure: f64,
    orders: OnceLock<Arc<Vec<CenterOrder>>>,
    family: OnceLock<Arc<BallFamily>>,
}

impl Clone for Space {
    fn clone(&self) -> Self {
        Space {
            coords: self.coords.clone(),
            metric: self.metric.clone(),
            measure: self.measure.clone(),
            adjacency: self.adjacency.clone(),
            gradient_mode: self.gradient_mode,
            grid: self.grid.clone(),
            total_measure: self.total_measure,
            orders: OnceLock::new(),
            family: OnceLock::new(),
        }
    }
}

impl Space {
    /// Assemble and validate a space from parts.
    ///
    /// Explicit matrices are checked for symmetry, a zero diagonal and the
    /// triangle inequality (O(n^3)); the built-in metrics satisfy all three
    /// by construction and skip the cubic check.
    pub fn new(
        coords: Option<Vec<Vec<f64>>>,
        metric: Metric,
        measure: Vec<f64>,
        adjacency: Option<Vec<Vec<usize>>>,
        gradient_mode: GradientMode,
        grid: Option<GridInfo>,
    ) -> Result<Space> {
        let n = measure.len();
        if n == 0 {
            return Err(Error::InvalidSpace("space has no points".into()));
        }
        if measure.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidSpace(
                "every point must carry a finite positive measure".into(),
            ));
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::InvalidSpace(
                    "coordinate count differs from measure length".into(),
                ));
            }
            let d = c.first().map(|p| p.len()).unwrap_or(0);
            if c.iter().any(|p| p.len() != d) {
                return Err(Error::InvalidSpace("ragged coordinates".into()));
            }
        }
        match &metric {
            Metric::Matrix(m) => {
                if m.len() != n * n {
                    return Err(Error::InvalidSpace("distance matrix is not n x n".into()));
                }
                for i in 0..n {
                    if m[i * n + i] != 0.0 {
                        return Err(Error::InvalidSpace("nonzero diagonal distance".into()));
                    }
                    for j in 0..i {
                        let d = m[i * n + j];
                        if d != m[j * n + i] {
                            return Err(Error::InvalidSpace("asymmetric distance matrix".into()));
                        }
                        if !(d > 0.0) || !d.is_finite() {
                            return Err(Error::InvalidSpace(
                                "off-diagonal distances must be positive and finite".into(),
                            ));
                        }
                    }
                }
                // Triangle inequality, with a tiny slack for decimal input.
                for i in 0..n {
                    for j in 0..n {
                        let dij = m[i * n + j];
                        for k in 0..n {
                            if m[i * n + k] + m[k * n + j] < dij * (1.0 - 1e-12) {
                                return Err(Error::InvalidSpace(format!(
                                    "triangle inequality fails for ({i}, {j}, {k})"
                                )));
                            }
                        }
                    }
                }
            }
            Metric::Euclidean | Metric::WordL1 => {
                if coords.is_none() {
                    return Err(Error::InvalidSpace(
                        "coordinate metric requires coordinates".into(),
                    ));
                }
            }
        }
        if let Some(adj) = &adjacency {
            if adj.len() != n || adj.iter().flatten().any(|&j| j >= n) {
                return Err(Error::InvalidSpace("adjacency out of range".into()));
            }
        }
        if gradient_mode == GradientMode::GridCentral && (grid.is_none() || coords.is_none()) {
            return Err(Error::InvalidSpace(
                "central-difference gradient needs a grid-built space".into(),
            ));
        }
        let total: f64 = measure.iter().sum();
        Ok(Space {
            coords,
            metric,
            measure,
            adjacency,
            gradient_mode,
            grid,
            total_measure: total,
            orders: OnceLock::new(),
            family: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measure[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn coord(&self, i: usize) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| c[i].as_slice())
    }

    pub fn adjacency(&self) -> Option<&[Vec<usize>]> {
        self.adjacency.as_deref()
    }

    pub fn gradient_mode(&self) -> GradientMode {
        self.gradient_mode
    }

    pub fn grid_info(&self) -> Option<&GridInfo> {
        self.grid.as_ref()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Euclidean => {
                let c = self.coords.as_ref().unwrap();
                c[i].iter()
                    .zip(c[j].iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            }
            Metric::WordL1 => {
                let c = self.coords.as_ref().unwrap();
                c[i].iter()
                    .zip(c[j].iter())
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            }
            Metric::Matrix(m) => m[i * self.measure.len() + j],
        }
    }

    /// Member ids of the open ball `B(center, r)`, sorted.
    pub fn open_ball(&self, center: usize, r: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.distance(center, j) < r)
            .collect()
    }

    /// Distance from `x` to the nearest point of `set` (infinite if empty).
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> f64 {
        set.iter()
            .map(|&y| self.distance(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Neighbors used by the graph gradient: adjacency when present,
    /// otherwise every other point.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        match &self.adjacency {
            Some(adj) => adj[i].clone(),
            None => (0..self.len()).filter(|&j| j != i).collect(),
        }
    }

    /// Dyadic refinement (grid spaces only): same extents, half the spacing.
    pub fn refine(&self) -> Result<Space> {
        let info = self
            .grid
            .as_ref()
            .ok_or_else(|| Error::Unsupported("refinement needs a grid-built space".into()))?;
        build_grid(
            info.dim,
            &info.extents,
            info.spacing / 2.0,
            info.measure_mode,
        )
    }

    pub(crate) fn orders(&self) -> Arc<Vec<CenterOrder>> {
        self.orders
            .get_or_init(|| {
                let n = self.len();
                let orders: Vec<CenterOrder> = (0..n)
                    .into_par_iter()
                    .map(|c| {
                        let d: Vec<f64> = (0..n).map(|j| self.distance(c, j)).collect();
                        let mut ids: Vec<u32> = (0..n as u32).collect();
                        ids.sort_by(|&a, &b| {
                            d[a as usize]
                                .partial_cmp(&d[b as usize])
                                .unwrap()
                                .then(a.cmp(&b))
                        });
                        let dist: Vec<f64> = ids.iter().map(|&i| d[i as usize]).collect();
                        let mut prefix_mass = Vec::with_capacity(n + 1);
                        let mut acc = 0.0;
                        prefix_mass.push(0.0);
                        for &i in &ids {
                            acc += self.measure[i as usize];
                            prefix_mass.push(acc);
                        }
                        CenterOrder {
                            ids,
                            dist,
                            prefix_mass,
                        }
                    })
                    .collect();
                Arc::new(orders)
            })
            .clone()
    }

    /// The deduplicated family of all distinct open balls (uncapped).
    pub fn ball_family(&self) -> Arc<BallFamily> {
        self.family
            .get_or_init(|| {
                let n = self.len();
                let orders = self.orders();
                let hashes: Vec<u64> = (0..n as u64).map(|i| splitmix64(i ^ 0x3c95_d9ab)).collect();
                let mut map: HashMap<u64, FamilyBall> = HashMap::new();
                for c in 0..n {
                    let ord = &orders[c];
                    let mut h = 0u64;
                    for k in 1..=n {
                        h ^= hashes[ord.ids[k - 1] as usize];
                        let is_cut = k == n || ord.dist[k] > ord.dist[k - 1];
                        if !is_cut {
                            continue;
                        }
                        let lower = ord.dist[k - 1];
                        let upper = if k == n { f64::INFINITY } else { ord.dist[k] };
                        let rep = if upper.is_finite() {
                            0.5 * (lower + upper)
                        } else if lower == 0.0 {
                            1.0
                        } else {
                            1.5 * lower
                        };
                        let cand = FamilyBall {
                            center: c as u32,
                            cut: k as u32,
                            lower,
                            upper,
                            max_lower: lower,
                            mass: ord.prefix_mass[k],
                            rep_uncapped: rep,
                        };
                        map.entry(h)
                            .and_modify(|b| {
                                b.max_lower = b.max_lower.max(lower);
                                if rep < b.rep_uncapped {
                                    let max_lower = b.max_lower;
                                    *b = FamilyBall { max_lower, ..cand.clone() };
                                }
                            })
                            .or_insert(cand);
                    }
                }
                let mut balls: Vec<FamilyBall> = map.into_values().collect();
                balls.sort_by_key(|b| (b.center, b.cut));
                Arc::new(BallFamily { balls })
            })
            .clone()
    }

    /// Materialize one family ball.
    pub fn materialize(&self, fb: &FamilyBall, cap: f64) -> Ball {
        let orders = self.orders();
        let ord = &orders[fb.center as usize];
        let mut members: Vec<usize> =
            ord.ids[..fb.cut as usize].iter().map(|&i| i as usize).collect();
        members.sort_unstable();
        Ball {
            center: fb.center as usize,
            radius: fb.rep_radius(cap),
            members,
            mass: fb.mass,
        }
    }
}

/// Scan all distinct balls passing the cap, delivering per-ball weighted sums
/// `sum_{i in B} field[i] * mu_i` for each supplied field. Single pass over
/// the family with per-center prefix sums.
pub(crate) fn scan_ball_sums<F>(space: &Space, cap: Option<f64>, fields: &[&[f64]], mut visit: F)
where
    F: FnMut(&FamilyBall, f64, &[f64]),
{
    let capv = cap.unwrap_or(f64::INFINITY);
    let fam = space.ball_family();
    let orders = space.orders();
    let n = space.len();
    let mut cur_center = u32::MAX;
    let mut prefixes: Vec<Vec<f64>> = vec![Vec::new(); fields.len()];
    let mut sums = vec![0.0; fields.len()];
    for b in &fam.balls {
        if !b.passes_cap(capv) {
            continue;
        }
        if b.center != cur_center {
            cur_center = b.center;
            let ord = &orders[b.center as usize];
            for (fi, field) in fields.iter().enumerate() {
                let p = &mut prefixes[fi];
                p.clear();
                p.reserve(n + 1);
                p.push(0.0);
                let mut acc = 0.0;
                for &id in &ord.ids {
                    acc += field[id as usize] * space.measure(id as usize);
                    p.push(acc);
                }
            }
        }
        for (fi, p) in prefixes.iter().enumerate() {
            sums[fi] = p[b.cut as usize];
        }
        visit(b, b.rep_radius(capv), &sums);
    }
}

/// Build a 1-D or 2-D Euclidean grid.
pub fn build_grid(
    dim: usize,
    extents: &[(f64, f64)],
    spacing: f64,
    measure_mode: MeasureMode,
) -> Result<Space> {
    if dim != 1 && dim != 2 {
        return Err(Error::Domain(format!("grid dim must be 1 or 2, got {dim}")));
    }
    if extents.len() != dim {
        return Err(Error::Domain("one extent pair per axis required".into()));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Domain("spacing must be a positive real".into()));
    }
    let mut shape = Vec::with_capacity(dim);
    for &(lo, hi) in extents {
        if !(hi >= lo) {
            return Err(Error::Domain("extent upper bound below lower bound".into()));
        }
        let k = ((hi - lo) / spacing + 1e-9).floor() as usize + 1;
        shape.push(k);
    }
    let count: usize = shape.iter().product();
    if count > GRID_POINT_CAP {
        return Err(Error::SizeLimit {
            limit: GRID_POINT_CAP,
            got: count,
        });
    }
    let mut coords = Vec::with_capacity(count);
    let mut adjacency = Vec::with_capacity(count);
    match dim {
        1 => {
            let (lo, _) = extents[0];
            let nx = shape[0];
            for i in 0..nx {
                coords.push(vec![lo + i as f64 * spacing]);
                let mut adj = Vec::new();
                if i > 0 {
                    adj.push(i - 1);
                }
                if i + 1 < nx {
                    adj.push(i + 1);
                }
                adjacency.push(adj);
            }
        }
        _ => {
            let (x0, _) = extents[0];
            let (y0, _) = extents[1];
            let (nx, ny) = (shape[0], shape[1]);
            // Row-major: id = iy * nx + ix.
            for iy in 0..ny {
                for ix in 0..nx {
                    coords.push(vec![x0 + ix as f64 * spacing, y0 + iy as f64 * spacing]);
                    let id = iy * nx + ix;
                    let mut adj = Vec::new();
                    if ix > 0 {
                        adj.push(id - 1);
                    }
                    if ix + 1 < nx {
                        adj.push(id + 1);
                    }
                    if iy > 0 {
                        adj.push(id - nx);
                    }
                    if iy + 1 < ny {
                        adj.push(id + nx);
                    }
                    adjacency.push(adj);
                }
            }
        }
    }
    let mu = match measure_mode {
        MeasureMode::Counting => 1.0,
        MeasureMode::CellVolume => spacing.powi(dim as i32),
    };
    Space::new(
        Some(coords),
        Metric::Euclidean,
        vec![mu; count],
        Some(adjacency),
        GradientMode::GridCentral,
        Some(GridInfo {
            dim,
            extents: extents.to_vec(),
            spacing,
            shape,
            measure_mode,
        }),
    )
}

/// Ball of the Cayley graph of Z^2 (standard generators): vertices with
/// `|x| + |y| <= radius`, word metric, counting measure.
pub fn build_cayley_z2(radius: u32) -> Result<Space> {
    if radius > CAYLEY_RADIUS_CAP {
        return Err(Error::SizeLimit {
            limit: CAYLEY_RADIUS_CAP as usize,
            got: radius as usize,
        });
    }
    let r = radius as i64;
    let mut pts: Vec<(i64, i64)> = Vec::new();
    for x in -r..=r {
        let rem = r - x.abs();
        for y in -rem..=rem {
            pts.push((x, y));
        }
    }
    let index: HashMap<(i64, i64), usize> =
        pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let coords: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x as f64, y as f64]).collect();
    let adjacency: Vec<Vec<usize>> = pts
        .iter()
        .map(|&(x, y)| {
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .filter_map(|&(dx, dy)| index.get(&(x + dx, y + dy)).copied())
                .collect()
        })
        .collect();
    let n = pts.len();
    Space::new(
        Some(coords),
        Metric::WordL1,
        vec![1.0; n],
        Some(adjacency),
        GradientMode::GraphUpper,
        None,
    )
}

/// Enumerate all distinct open balls with radius below the cap.
pub fn enumerate_balls(space: &Space, radius_cap: Option<f64>) -> Vec<Ball> {
    let capv = radius_cap.unwrap_or(f64::INFINITY);
    let fam = space.ball_family();
    fam.balls
        .iter()
        .filter(|b| b.passes_cap(capv))
        .map(|b| space.materialize(b, capv))
        .collect()
}

#[derive(Debug, Clone)]
pub struct DoublingReport {
    pub constant: f64,
    pub center: usize,
    pub radius: f64,
}

impl std::fmt::Display for DoublingReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "doubling constant = {:.12e} attained at center {} radius {:.12e}",
            self.constant, self.center, self.radius
        )
    }
}

/// Measured doubling constant: the supremum of `mu(B(x,2r)) / mu(B(x,r))`
/// over all centers and all radii (both `r` and `2r` below the cap when one
/// is given). The radius enumeration walks every breakpoint of the map
/// `r -> (B(x,r), B(x,2r))`, so the discrete supremum is attained exactly.
pub fn doubling_constant(space: &Space, radius_cap: Option<f64>) -> DoublingReport {
    let capv = radius_cap.unwrap_or(f64::INFINITY);
    let orders = space.orders();
    let n = space.len();
    let mut best = DoublingReport {
        constant: 1.0,
        center: 0,
        radius: 1.0,
    };
    for c in 0..n {
        let ord = &orders[c];
        let mut marks: Vec<f64> = Vec::with_capacity(2 * n);
        let mut prev = f64::NAN;
        for &d in &ord.dist {
            if d != prev {
                marks.push(d);
                marks.push(d / 2.0);
                prev = d;
            }
        }
        marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        marks.dedup();
        let mut candidates: Vec<f64> = marks.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        if let Some(&last) = marks.last() {
            if last > 0.0 {
                candidates.push(1.5 * last);
            }
        }
        for r in candidates {
            if !(r > 0.0) || 2.0 * r >= capv {
                continue;
            }
            let m1 = ord.mass_below(r);
            let m2 = ord.mass_below(2.0 * r);
            let ratio = m2 / m1;
            if ratio > best.constant {
                best = DoublingReport {
                    constant: ratio,
                    center: c,
                    radius: r,
                };
            }
        }
    }
    best
}

/// Measure-weighted average of `field` over the ball.
pub fn ball_average(space: &Space, ball: &Ball, field: &PointField) -> Result<f64> {
    if ball.members.is_empty() {
        return Err(Error::Domain("ball average over an empty ball".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in &ball.members {
        num += field[i] * space.measure(i);
        den += space.measure(i);
    }
    Ok(num / den)
}

/// Average over an explicit member list; shared by the heavier scans.
pub(crate) fn average_over(space: &Space, members: &[usize], values: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in members {
        num += values[i] * space.measure(i);
        den += space.measure(i);
    }
    num / den
}
