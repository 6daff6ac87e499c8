//! Whitney covers, partitions of unity, and the Calderón-Zygmund
//! decomposition of Sobolev functions.
//!
//! Given a threshold `alpha`, the level set
//! `Omega = { x : M T_s f(x) > alpha^s }` is covered by Whitney balls whose
//! radii are half the distance to the complement. The function splits as
//! `f = g + sum_i b_i`, with each local piece `b_i` supported in its ball
//! and shaped by the ball's type: `f chi_i` where the averaged weight
//! dominates the inverse radius, `(f - f_B) chi_i` otherwise.

use crate::calculus::{gradient, lp_norm, maximal, t_r, SobolevFunction};
use crate::error::{Error, Result};
use crate::space::{Ball, PointField, Space};
use crate::weights::Weight;

/// Whitney dilation constants: selection balls are `B(x, r/C1)`, security
/// balls `B(x, (C2/C1) r)` with `C2 = 4 C1`.
pub const WHITNEY_C1: f64 = 5.0;
pub const WHITNEY_C2: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct WhitneyCover {
    pub centers: Vec<usize>,
    /// `r_i = d(x_i, F) / 2`, exactly.
    pub radii: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
}

impl WhitneyCover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn selection_members(&self, space: &Space, i: usize) -> Vec<usize> {
        space.open_ball(self.centers[i], self.radii[i] / self.c1)
    }

    pub fn cover_members(&self, space: &Space, i: usize) -> Vec<usize> {
        space.open_ball(self.centers[i], self.radii[i])
    }

    pub fn security_members(&self, space: &Space, i: usize) -> Vec<usize> {
        space.open_ball(self.centers[i], self.radii[i] * self.c2 / self.c1)
    }

    pub fn cover_ball(&self, space: &Space, i: usize) -> Ball {
        let members = self.cover_members(space, i);
        let mass = members.iter().map(|&j| space.measure(j)).sum();
        Ball {
            center: self.centers[i],
            radius: self.radii[i],
            members,
            mass,
        }
    }
}

/// Level sets driving the decomposition.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub omega: Vec<usize>,
    pub complement: Vec<usize>,
    pub omega_full: bool,
}

/// `Omega = { x : M T_s f(x) > alpha^s }` and its complement; the maximal
/// operator honors the radius cap. Homogeneous mode drops the `|f|^s` term.
pub fn level_set_omega(
    space: &Space,
    v: &Weight,
    u: &SobolevFunction,
    s: f64,
    alpha: f64,
    homogeneous: bool,
    radius_cap: Option<f64>,
) -> Result<LevelSet> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("level-set threshold must be positive".into()));
    }
    let ts = t_r(space, v, u, s, homogeneous);
    let mts = maximal(space, &ts, radius_cap);
    let bar = alpha.powf(s);
    let mut omega = Vec::new();
    let mut complement = Vec::new();
    for i in 0..space.len() {
        if mts[i] > bar {
            omega.push(i);
        } else {
            complement.push(i);
        }
    }
    let omega_full = complement.is_empty();
    Ok(LevelSet {
        omega,
        complement,
        omega_full,
    })
}

/// Greedy Whitney decomposition of an open set.
///
/// Radii are `d(x, F)/2`; candidates are processed in descending radius and
/// selected when their selection ball avoids all previously selected ones.
/// Coverage of `Omega` by the cover balls is asserted at runtime: it follows
/// from the descending order and the triangle inequality.
pub fn whitney(space: &Space, omega: &[usize]) -> Result<WhitneyCover> {
    if omega.is_empty() {
        return Ok(WhitneyCover {
            centers: Vec::new(),
            radii: Vec::new(),
            c1: WHITNEY_C1,
            c2: WHITNEY_C2,
        });
    }
    let in_omega: Vec<bool> = {
        let mut m = vec![false; space.len()];
        for &i in omega {
            m[i] = true;
        }
        m
    };
    let f_set: Vec<usize> = (0..space.len()).filter(|&i| !in_omega[i]).collect();
    if f_set.is_empty() {
        return Err(Error::Domain(
            "whitney cover needs a nonempty complement".into(),
        ));
    }
    let mut order: Vec<(usize, f64)> = omega
        .iter()
        .map(|&x| (x, space.dist_to_set(x, &f_set) / 2.0))
        .collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let mut taken = vec![false; space.len()];
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    for &(x, r) in &order {
        let sel = space.open_ball(x, r / WHITNEY_C1);
        if sel.iter().any(|&y| taken[y]) {
            continue;
        }
        for &y in &sel {
            taken[y] = true;
        }
        centers.push(x);
        radii.push(r);
    }
    let cover = WhitneyCover {
        centers,
        radii,
        c1: WHITNEY_C1,
        c2: WHITNEY_C2,
    };
    // Coverage assertion.
    for &x in omega {
        let covered = (0..cover.len())
            .any(|i| space.distance(cover.centers[i], x) < cover.radii[i]);
        if !covered {
            return Err(Error::Internal(format!(
                "whitney cover misses point {x}; metric may violate the triangle inequality"
            )));
        }
    }
    Ok(cover)
}

/// Exact invariant checks for a Whitney cover; every flag must hold.
#[derive(Debug, Clone)]
pub struct WhitneyCheck {
    pub selection_disjoint: bool,
    pub covers_omega: bool,
    pub radii_exact: bool,
    pub security_hits_complement: bool,
    pub radii_comparable: bool,
}

impl WhitneyCheck {
    pub fn all(&self) -> bool {
        self.selection_disjoint
            && self.covers_omega
            && self.radii_exact
            && self.security_hits_complement
            && self.radii_comparable
    }
}

pub fn check_whitney(space: &Space, omega: &[usize], cover: &WhitneyCover) -> WhitneyCheck {
    let in_omega: Vec<bool> = {
        let mut m = vec![false; space.len()];
        for &i in omega {
            m[i] = true;
        }
        m
    };
    let f_set: Vec<usize> = (0..space.len()).filter(|&i| !in_omega[i]).collect();

    let mut seen = vec![false; space.len()];
    let mut selection_disjoint = true;
    for i in 0..cover.len() {
        for y in cover.selection_members(space, i) {
            if seen[y] {
                selection_disjoint = false;
            }
            seen[y] = true;
        }
    }
    let covers_omega = omega.iter().all(|&x| {
        (0..cover.len()).any(|i| space.distance(cover.centers[i], x) < cover.radii[i])
    });
    let radii_exact = (0..cover.len()).all(|i| {
        cover.radii[i] == space.dist_to_set(cover.centers[i], &f_set) / 2.0
    });
    let security_hits_complement = (0..cover.len()).all(|i| {
        cover
            .security_members(space, i)
            .iter()
            .any(|&y| !in_omega[y])
    });
    let mut radii_comparable = true;
    for i in 0..cover.len() {
        let bi = cover.cover_members(space, i);
        for j in 0..i {
            let bj = cover.cover_members(space, j);
            if bi.iter().any(|y| bj.contains(y)) {
                let (ri, rj) = (cover.radii[i], cover.radii[j]);
                if ri > 3.0 * rj * (1.0 + 1e-12) || rj > 3.0 * ri * (1.0 + 1e-12) {
                    radii_comparable = false;
                }
            }
        }
    }
    WhitneyCheck {
        selection_disjoint,
        covers_omega,
        radii_exact,
        security_hits_complement,
        radii_comparable,
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    /// One bump field per Whitney ball.
    pub chi: Vec<PointField>,
}

/// Profile function: 1 on [0,1], 0 from (1+C1)/2 on, monotone cubic between.
fn psi(u: f64) -> f64 {
    let hi = (1.0 + WHITNEY_C1) / 2.0;
    if u <= 1.0 {
        1.0
    } else if u >= hi {
        0.0
    } else {
        let s = (u - 1.0) / (hi - 1.0);
        1.0 - (3.0 * s * s - 2.0 * s * s * s)
    }
}

/// Normalized bump functions `chi_i(x) = psi(C1 d(x_i,x)/r_i) / sum_k ...`
/// on the union of the cover balls; zero elsewhere.
pub fn partition_of_unity(space: &Space, cover: &WhitneyCover) -> Result<Partition> {
    if cover.is_empty() {
        return Err(Error::Domain("partition of unity needs a nonempty cover".into()));
    }
    let n = space.len();
    let mut in_union = vec![false; n];
    for i in 0..cover.len() {
        for y in cover.cover_members(space, i) {
            in_union[y] = true;
        }
    }
    let mut chi = vec![vec![0.0; n]; cover.len()];
    for x in 0..n {
        if !in_union[x] {
            continue;
        }
        let mut terms = vec![0.0; cover.len()];
        let mut den = 0.0;
        for i in 0..cover.len() {
            let arg = cover.c1 * space.distance(cover.centers[i], x) / cover.radii[i];
            terms[i] = psi(arg);
            den += terms[i];
        }
        if den <= 0.0 {
            return Err(Error::Internal(format!(
                "partition denominator vanished at covered point {x}"
            )));
        }
        for i in 0..cover.len() {
            chi[i][x] = terms[i] / den;
        }
    }
    Ok(Partition {
        chi: chi.into_iter().map(PointField::new).collect(),
    })
}

/// Decomposition parameters `1 <= r <= s <= p < q` (`q` may be infinite)
/// plus the homogeneous flag.
#[derive(Debug, Clone, Copy)]
pub struct CzParams {
    pub r: f64,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl CzParams {
    pub fn validate(&self) -> Result<()> {
        let ok = 1.0 <= self.r
            && self.r <= self.s
            && self.s <= self.p
            && self.p < self.q
            && self.p.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterOrder(format!(
                "need 1 <= r <= s <= p < q, got r={} s={} p={} q={}",
                self.r, self.s, self.p, self.q
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallType {
    /// Averaged weight dominates: `(V^s)_B >= r^-s`; piece is `f chi_i`.
    One,
    /// Piece is `(f - f_B) chi_i`.
    Two,
}

#[derive(Debug, Clone)]
pub struct CzPiece {
    pub b: SobolevFunction,
    pub ball: Ball,
    pub ball_type: BallType,
    /// Ball average of `f` (zero for type-1 balls, where it is not used).
    pub f_avg: f64,
}

#[derive(Debug, Clone)]
pub struct CZDecomposition {
    pub alpha: f64,
    pub params: CzParams,
    pub radius_cap: Option<f64>,
    pub input: SobolevFunction,
    pub omega: Vec<usize>,
    pub complement: Vec<usize>,
    pub omega_full: bool,
    pub cover: WhitneyCover,
    pub partition: Option<Partition>,
    pub g: SobolevFunction,
    pub pieces: Vec<CzPiece>,
}

impl CZDecomposition {
    /// Pointwise sum of the local pieces.
    pub fn b_sum(&self) -> PointField {
        let mut acc = vec![0.0; self.g.len()];
        for p in &self.pieces {
            for &i in &p.ball.members {
                acc[i] += p.b.values[i];
            }
        }
        PointField::new(acc)
    }
}

fn whole_space_ball(space: &Space) -> Ball {
    let orders = space.orders();
    let n = space.len();
    let mut best = (0usize, f64::INFINITY);
    for c in 0..n {
        let ecc = orders[c].dist[n - 1];
        if ecc < best.1 {
            best = (c, ecc);
        }
    }
    let radius = if best.1 == 0.0 { 1.0 } else { 1.5 * best.1 };
    Ball {
        center: best.0,
        radius,
        members: (0..n).collect(),
        mass: space.total_measure(),
    }
}

/// Calderón-Zygmund decomposition of a Sobolev function at threshold `alpha`.
///
/// * empty level set: `g = f`, no pieces;
/// * full level set: trivial split `g = 0`, one piece `b = f` on a
///   whole-space ball, flagged `omega_full`;
/// * otherwise Whitney cover, partition of unity and the type rule, with
///   all gradients recomputed by the space's discrete operator.
pub fn cz_decompose(
    space: &Space,
    v: &Weight,
    u: &SobolevFunction,
    params: CzParams,
    alpha: f64,
    radius_cap: Option<f64>,
) -> Result<CZDecomposition> {
    params.validate()?;
    let level = level_set_omega(space, v, u, params.s, alpha, params.homogeneous, radius_cap)?;
    let n = space.len();

    if level.omega.is_empty() {
        return Ok(CZDecomposition {
            alpha,
            params,
            radius_cap,
            input: u.clone(),
            omega: level.omega,
            complement: level.complement,
            omega_full: false,
            cover: WhitneyCover {
                centers: vec![],
                radii: vec![],
                c1: WHITNEY_C1,
                c2: WHITNEY_C2,
            },
            partition: None,
            g: u.clone(),
            pieces: Vec::new(),
        });
    }

    if level.omega_full {
        let ball = whole_space_ball(space);
        let vs_avg = average_pow(space, &ball.members, v.values(), params.s);
        let ball_type = if vs_avg >= ball.radius.powf(-params.s) {
            BallType::One
        } else {
            BallType::Two
        };
        let piece = CzPiece {
            b: u.clone(),
            ball,
            ball_type,
            f_avg: 0.0,
        };
        return Ok(CZDecomposition {
            alpha,
            params,
            radius_cap,
            input: u.clone(),
            omega: level.omega,
            complement: level.complement,
            omega_full: true,
            cover: WhitneyCover {
                centers: vec![],
                radii: vec![],
                c1: WHITNEY_C1,
                c2: WHITNEY_C2,
            },
            partition: None,
            g: SobolevFunction::zero(n),
            pieces: vec![piece],
        });
    }

    let cover = whitney(space, &level.omega)?;
    let partition = partition_of_unity(space, &cover)?;
    let f = u.values.values();
    let mut pieces = Vec::with_capacity(cover.len());
    let mut b_total = vec![0.0; n];
    for i in 0..cover.len() {
        let ball = cover.cover_ball(space, i);
        let vs_avg = average_pow(space, &ball.members, v.values(), params.s);
        let ball_type = if vs_avg >= ball.radius.powf(-params.s) {
            BallType::One
        } else {
            BallType::Two
        };
        let f_avg = match ball_type {
            BallType::One => 0.0,
            BallType::Two => crate::space::average_over(space, &ball.members, f),
        };
        let chi = partition.chi[i].values();
        let mut b_vals = vec![0.0; n];
        for &x in &ball.members {
            let local = match ball_type {
                BallType::One => f[x] * chi[x],
                BallType::Two => (f[x] - f_avg) * chi[x],
            };
            b_vals[x] = local;
            b_total[x] += local;
        }
        let b_field = PointField::new(b_vals);
        let b_grad = gradient(space, &b_field);
        pieces.push(CzPiece {
            b: SobolevFunction::with_gradient(b_field, b_grad),
            ball,
            ball_type,
            f_avg,
        });
    }
    let g_vals: Vec<f64> = (0..n).map(|i| f[i] - b_total[i]).collect();
    let g_field = PointField::new(g_vals);
    let g_grad = gradient(space, &g_field);
    Ok(CZDecomposition {
        alpha,
        params,
        radius_cap,
        input: u.clone(),
        omega: level.omega,
        complement: level.complement,
        omega_full: false,
        cover,
        partition: Some(partition),
        g: SobolevFunction::with_gradient(g_field, g_grad),
        pieces,
    })
}

fn average_pow(space: &Space, members: &[usize], values: &[f64], s: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in members {
        num += values[i].powf(s) * space.measure(i);
        den += space.measure(i);
    }
    num / den
}

fn integral_over(space: &Space, set: &[usize], field: &PointField) -> f64 {
    set.iter().map(|&i| field[i] * space.measure(i)).sum()
}

/// Measured constants of a decomposition, as ratios of each side of the
/// defining estimates with the unspecified constant removed.
#[derive(Debug, Clone)]
pub struct CzVerification {
    /// Max pointwise reconstruction error relative to `max |f|`.
    pub reconstruction_err: f64,
    pub support_ok: bool,
    /// Max deviation of the partition sum from 1 on the level set.
    pub partition_err: f64,
    /// `int_Omega T_q g / (alpha^q mu(Omega))`, finite q only.
    pub c2: Option<f64>,
    /// `||g||_{W^1_inf,V} / alpha` (or the homogeneous analogue), q = inf.
    pub c_inf: Option<f64>,
    /// max_i `int_B T_s b_i / (alpha^s mu(B))`.
    pub c3_s: f64,
    /// Same at exponent r.
    pub c3_r: f64,
    /// `alpha^p sum_i mu(B_i) / int T_p f`.
    pub c4: f64,
    /// Max overlap of the cover balls, exact.
    pub n_overlap: usize,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Measure the constants of the decomposition's defining properties.
pub fn verify_cz(space: &Space, v: &Weight, decomp: &CZDecomposition) -> CzVerification {
    let params = decomp.params;
    let hom = params.homogeneous;
    let f = &decomp.input;
    let n = space.len();
    let mut notes = Vec::new();

    // Reconstruction and support.
    let b_sum = decomp.b_sum();
    let scale = f
        .values
        .values()
        .iter()
        .fold(0.0_f64, |m, &x| m.max(x.abs()))
        .max(1e-300);
    let mut rec_err = 0.0_f64;
    for i in 0..n {
        rec_err = rec_err.max((f.values[i] - (decomp.g.values[i] + b_sum[i])).abs());
    }
    let reconstruction_err = rec_err / scale;
    let mut support_ok = true;
    for p in &decomp.pieces {
        let inside: std::collections::HashSet<usize> = p.ball.members.iter().copied().collect();
        for i in 0..n {
            if !inside.contains(&i) && p.b.values[i] != 0.0 {
                support_ok = false;
            }
        }
    }

    // Partition of unity on the level set.
    let mut partition_err = 0.0_f64;
    if let Some(part) = &decomp.partition {
        for &x in &decomp.omega {
            let sum: f64 = part.chi.iter().map(|c| c[x]).sum();
            partition_err = partition_err.max((sum - 1.0).abs());
        }
        for c in &part.chi {
            for i in 0..n {
                if c[i] < -1e-15 || c[i] > 1.0 + 1e-15 {
                    partition_err = partition_err.max(1.0);
                }
            }
        }
    }

    let alpha = decomp.alpha;
    let omega_mass: f64 = decomp.omega.iter().map(|&i| space.measure(i)).sum();

    // Property (2): control of g on the level set.
    let (c2, c_inf) = if params.q.is_finite() {
        let tqg = t_r(space, v, &decomp.g, params.q, hom);
        let num = integral_over(space, &decomp.omega, &tqg);
        let c2 = if omega_mass > 0.0 {
            num / (alpha.powf(params.q) * omega_mass)
        } else {
            0.0
        };
        (Some(c2), None)
    } else {
        let vg = PointField::new(
            decomp
                .g
                .values
                .values()
                .iter()
                .zip(v.values())
                .map(|(&g, &w)| w * g)
                .collect(),
        );
        let val = if hom {
            // Pointwise bound on |grad g| + |Vg|.
            (0..n)
                .map(|i| decomp.g.gradient[i] + vg[i].abs())
                .fold(0.0_f64, f64::max)
        } else {
            lp_norm(space, &decomp.g.values, f64::INFINITY)
                + lp_norm(space, &decomp.g.gradient, f64::INFINITY)
                + lp_norm(space, &vg, f64::INFINITY)
        };
        (None, Some(val / alpha))
    };

    // Property (3): local piece estimates at s and at r.
    let mut c3_s = 0.0_f64;
    let mut c3_r = 0.0_f64;
    for p in &decomp.pieces {
        let ts = t_r(space, v, &p.b, params.s, hom);
        let tr = t_r(space, v, &p.b, params.r, hom);
        let is = integral_over(space, &p.ball.members, &ts);
        let ir = integral_over(space, &p.ball.members, &tr);
        c3_s = c3_s.max(is / (alpha.powf(params.s) * p.ball.mass));
        c3_r = c3_r.max(ir / (alpha.powf(params.r) * p.ball.mass));
    }

    // Property (4): total mass of the cover balls.
    let tpf = t_r(space, v, f, params.p, hom);
    let tpf_total: f64 = tpf
        .values()
        .iter()
        .zip(space.measures())
        .map(|(&t, &mu)| t * mu)
        .sum();
    let ball_mass: f64 = decomp.pieces.iter().map(|p| p.ball.mass).sum();
    let c4 = if tpf_total > 0.0 {
        alpha.powf(params.p) * ball_mass / tpf_total
    } else {
        0.0
    };

    // Property (5): bounded overlap.
    let mut overlap = vec![0usize; n];
    for p in &decomp.pieces {
        for &i in &p.ball.members {
            overlap[i] += 1;
        }
    }
    let n_overlap = overlap.into_iter().max().unwrap_or(0);

    let mut pass = reconstruction_err <= 1e-12 && support_ok && partition_err <= 1e-12;
    for (name, value) in [
        ("c2", c2.unwrap_or(0.0)),
        ("c_inf", c_inf.unwrap_or(0.0)),
        ("c3_s", c3_s),
        ("c3_r", c3_r),
        ("c4", c4),
    ] {
        if !value.is_finite() {
            pass = false;
            notes.push(format!("{name} is not finite"));
        }
    }
    if !support_ok {
        notes.push("a piece leaks outside its ball".into());
    }
    CzVerification {
        reconstruction_err,
        support_ok,
        partition_err,
        c2,
        c_inf,
        c3_s,
        c3_r,
        c4,
        n_overlap,
        pass,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::low_pass_field;
    use crate::space::{build_grid, GradientMode, MeasureMode, Metric};
    use crate::weights::{make_weight, WeightKind};

    fn graph_line(n: usize, spacing: f64) -> Space {
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[i * n + j] = (i as f64 - j as f64).abs() * spacing;
            }
        }
        let adjacency = (0..n)
            .map(|i| {
                let mut a = Vec::new();
                if i > 0 {
                    a.push(i - 1);
                }
                if i + 1 < n {
                    a.push(i + 1);
                }
                a
            })
            .collect();
        Space::new(
            None,
            Metric::Matrix(matrix),
            vec![1.0; n],
            Some(adjacency),
            GradientMode::GraphUpper,
            None,
        )
        .unwrap()
    }

    fn unit_weight(n: usize) -> Weight {
        Weight::new(PointField::constant(n, 1.0)).unwrap()
    }

    fn zero_weight(n: usize) -> Weight {
        Weight::new(PointField::zeros(n)).unwrap()
    }

    fn params(q: f64, homogeneous: bool) -> CzParams {
        CzParams {
            r: 1.0,
            s: 1.0,
            p: 1.5,
            q,
            homogeneous,
        }
    }

    #[test]
    fn level_set_examples() {
        let s = graph_line(3, 1.0);
        let v = unit_weight(3);
        let u = SobolevFunction::from_values(&s, PointField::new(vec![0.0, 0.0, 3.0]));
        // T_1 f = (0, 3, 9); M T_1 f = (4, 6, 9).
        let ts = t_r(&s, &v, &u, 1.0, false);
        assert_eq!(ts.values(), &[0.0, 3.0, 9.0]);
        let m = maximal(&s, &ts, None);
        assert_eq!(m.values(), &[4.0, 6.0, 9.0]);

        let full = level_set_omega(&s, &v, &u, 1.0, 2.0, false, None).unwrap();
        assert!(full.omega_full);

        let none = level_set_omega(&s, &v, &u, 1.0, 10.0, false, None).unwrap();
        assert!(none.omega.is_empty());

        assert!(level_set_omega(&s, &v, &u, 1.0, 0.0, false, None).is_err());
    }

    #[test]
    fn whitney_empty_and_single() {
        let s = graph_line(5, 1.0);
        let cover = whitney(&s, &[]).unwrap();
        assert!(cover.is_empty());

        // Three points at spacing 2: the middle point sits at distance 2
        // from the complement.
        let s3 = graph_line(3, 2.0);
        let cover1 = whitney(&s3, &[1]).unwrap();
        assert_eq!(cover1.len(), 1);
        assert_eq!(cover1.centers, vec![1]);
        assert_eq!(cover1.radii, vec![1.0]);
        assert_eq!(cover1.selection_members(&s3, 0), vec![1]);
        // Security radius 4 reaches the complement.
        let sec = cover1.security_members(&s3, 0);
        assert!(sec.contains(&0) && sec.contains(&2));
        let check = check_whitney(&s3, &[1], &cover1);
        assert!(check.all());

        // Single-ball partition: the bump is 1 on its own plateau.
        let part = partition_of_unity(&s3, &cover1).unwrap();
        assert_eq!(part.chi[0][1], 1.0);
        assert_eq!(part.chi[0][0], 0.0);
        assert_eq!(part.chi[0][2], 0.0);
    }

    #[test]
    fn whitney_line_invariants() {
        let s = graph_line(10, 1.0);
        let omega: Vec<usize> = (1..9).collect();
        let cover = whitney(&s, &omega).unwrap();
        let check = check_whitney(&s, &omega, &cover);
        assert!(check.selection_disjoint, "selection balls overlap");
        assert!(check.covers_omega, "cover misses part of omega");
        assert!(check.radii_exact);
        assert!(check.security_hits_complement);
        assert!(check.radii_comparable);
    }

    #[test]
    fn partition_symmetric_overlap() {
        let s = graph_line(3, 1.0);
        let cover = WhitneyCover {
            centers: vec![0, 2],
            radii: vec![5.0, 5.0],
            c1: WHITNEY_C1,
            c2: WHITNEY_C2,
        };
        let part = partition_of_unity(&s, &cover).unwrap();
        // Point 1 sits on both plateaus.
        assert!((part.chi[0][1] - 0.5).abs() < 1e-15);
        assert!((part.chi[1][1] - 0.5).abs() < 1e-15);
        for x in 0..3 {
            let sum = part.chi[0][x] + part.chi[1][x];
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_sums_to_one_on_omega() {
        let s = graph_line(10, 1.0);
        let omega: Vec<usize> = (1..9).collect();
        let cover = whitney(&s, &omega).unwrap();
        let part = partition_of_unity(&s, &cover).unwrap();
        for &x in &omega {
            let sum: f64 = part.chi.iter().map(|c| c[x]).sum();
            assert!((sum - 1.0).abs() < 1e-12, "sum at {x} = {sum}");
        }
        // Supports stay inside the cover balls and vanish on the complement.
        for i in 0..cover.len() {
            let members = cover.cover_members(&s, i);
            for x in 0..s.len() {
                if !members.contains(&x) {
                    assert_eq!(part.chi[i][x], 0.0);
                }
                assert!(part.chi[i][x] >= 0.0 && part.chi[i][x] <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn identity_decomposition_at_high_alpha() {
        let s = build_grid(1, &[(0.0, 9.0)], 1.0, MeasureMode::Counting).unwrap();
        let v = unit_weight(10);
        let u = SobolevFunction::from_values(&s, low_pass_field(&s, 5, 2));
        let d = cz_decompose(&s, &v, &u, params(2.0, false), 1e9, None).unwrap();
        assert!(d.pieces.is_empty());
        assert_eq!(d.g.values.values(), u.values.values());
        let ver = verify_cz(&s, &v, &d);
        assert!(ver.pass);
        assert_eq!(ver.n_overlap, 0);
        assert_eq!(ver.reconstruction_err, 0.0);
    }

    #[test]
    fn omega_full_returns_trivial_split() {
        let s = graph_line(3, 1.0);
        let v = unit_weight(3);
        let u = SobolevFunction::from_values(&s, PointField::new(vec![0.0, 0.0, 3.0]));
        let d = cz_decompose(&s, &v, &u, params(2.0, false), 1.0, None).unwrap();
        assert!(d.omega_full);
        assert_eq!(d.pieces.len(), 1);
        assert!(d.g.values.values().iter().all(|&x| x == 0.0));
        assert_eq!(d.pieces[0].b.values.values(), u.values.values());
    }

    #[test]
    fn zero_weight_forces_type_two() {
        let s = build_grid(1, &[(0.0, 19.0)], 1.0, MeasureMode::Counting).unwrap();
        let v = zero_weight(20);
        let u = SobolevFunction::from_values(&s, low_pass_field(&s, 9, 2));
        // Mid-range threshold so the level set is proper.
        let ts = t_r(&s, &v, &u, 1.0, false);
        let m = maximal(&s, &ts, None);
        let mut vals: Vec<f64> = m.values().to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let alpha = vals[vals.len() / 2];
        let d = cz_decompose(&s, &v, &u, params(2.0, false), alpha, None).unwrap();
        assert!(!d.pieces.is_empty());
        assert!(d.pieces.iter().all(|p| p.ball_type == BallType::Two));
        let ver = verify_cz(&s, &v, &d);
        assert!(ver.pass, "verification failed: {:?}", ver.notes);
    }

    #[test]
    fn two_dimensional_instance_verifies() {
        let s = build_grid(2, &[(0.0, 1.0), (0.0, 1.0)], 1.0 / 14.0, MeasureMode::CellVolume)
            .unwrap();
        let v = make_weight(&WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] }, &s).unwrap();
        let u = SobolevFunction::from_values(&s, low_pass_field(&s, 31, 3));
        let ts = t_r(&s, &v, &u, 1.0, false);
        let m = maximal(&s, &ts, None);
        let mut vals: Vec<f64> = m.values().to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let alpha = vals[vals.len() / 2];
        let d = cz_decompose(&s, &v, &u, params(2.0, false), alpha, None).unwrap();
        assert!(!d.omega_full && !d.pieces.is_empty());
        let ver = verify_cz(&s, &v, &d);
        assert!(ver.pass, "verification failed: {:?}", ver.notes);
        assert!(ver.reconstruction_err <= 1e-12);
        assert!(ver.n_overlap >= 1);
        let wc = check_whitney(&s, &d.omega, &d.cover);
        assert!(wc.all());

        // q = infinity variant on the same instance.
        let dinf = cz_decompose(&s, &v, &u, params(f64::INFINITY, false), alpha, None).unwrap();
        let vinf = verify_cz(&s, &v, &dinf);
        assert!(vinf.pass);
        assert!(vinf.c_inf.unwrap().is_finite());
    }

    #[test]
    fn homogeneous_mode_shift_invariant_with_zero_weight() {
        let s = build_grid(1, &[(0.0, 29.0)], 1.0, MeasureMode::Counting).unwrap();
        let v = zero_weight(30);
        let f0 = low_pass_field(&s, 77, 2);
        let f1 = PointField::new(f0.values().iter().map(|&x| x + 10.0).collect());
        let u0 = SobolevFunction::from_values(&s, f0);
        let u1 = SobolevFunction::from_values(&s, f1);
        let ts = t_r(&s, &v, &u0, 1.0, true);
        let m = maximal(&s, &ts, None);
        let mut vals: Vec<f64> = m.values().to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        let alpha = (vals[vals.len() / 3] * vals[vals.len() / 3 + 1]).sqrt();
        let p = CzParams { r: 1.0, s: 1.0, p: 1.5, q: 2.0, homogeneous: true };
        let d0 = cz_decompose(&s, &v, &u0, p, alpha, None).unwrap();
        let d1 = cz_decompose(&s, &v, &u1, p, alpha, None).unwrap();
        assert_eq!(d0.omega, d1.omega);
        assert_eq!(d0.cover.centers, d1.cover.centers);
        assert_eq!(d0.pieces.len(), d1.pieces.len());
        for (p0, p1) in d0.pieces.iter().zip(&d1.pieces) {
            assert_eq!(p0.ball_type, p1.ball_type);
            for i in 0..s.len() {
                assert!((p0.b.values[i] - p1.b.values[i]).abs() < 1e-12);
            }
        }
        for i in 0..s.len() {
            assert!(((d1.g.values[i] - d0.g.values[i]) - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_order_rejected() {
        let s = graph_line(4, 1.0);
        let v = unit_weight(4);
        let u = SobolevFunction::zero(4);
        let bad = CzParams { r: 2.0, s: 1.0, p: 1.5, q: 2.0, homogeneous: false };
        assert!(matches!(
            cz_decompose(&s, &v, &u, bad, 1.0, None),
            Err(Error::ParameterOrder(_))
        ));
    }
}
