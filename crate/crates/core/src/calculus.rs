//! Discrete gradient, weighted Sobolev norms, pointwise `T_r` functionals,
//! the uncentered maximal operator, and the Poincaré / Fefferman-Phong
//! constant estimators.

use crate::error::{Error, Result};
use crate::space::{scan_ball_sums, Ball, GradientMode, PointField, Space};
use crate::weights::Weight;

/// A function together with its gradient magnitude field.
#[derive(Debug, Clone)]
pub struct SobolevFunction {
    pub values: PointField,
    pub gradient: PointField,
}

impl SobolevFunction {
    /// Build from values, computing the gradient with the space's operator.
    pub fn from_values(space: &Space, values: PointField) -> SobolevFunction {
        let gradient = gradient(space, &values);
        SobolevFunction { values, gradient }
    }

    pub fn with_gradient(values: PointField, gradient: PointField) -> SobolevFunction {
        debug_assert!(gradient.values().iter().all(|&g| g >= 0.0));
        SobolevFunction { values, gradient }
    }

    pub fn zero(n: usize) -> SobolevFunction {
        SobolevFunction {
            values: PointField::zeros(n),
            gradient: PointField::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, lambda: f64) -> SobolevFunction {
        SobolevFunction {
            values: self.values.scale(lambda),
            gradient: self.gradient.scale(lambda.abs()),
        }
    }
}

/// Discrete gradient magnitude.
///
/// Grid spaces use per-axis central differences (one-sided at the boundary)
/// and return the Euclidean norm across axes; graph spaces use the upper
/// gradient `max_{y ~ x} |f(x)-f(y)| / d(x,y)`. Isolated points get zero.
pub fn gradient(space: &Space, values: &PointField) -> PointField {
    match space.gradient_mode() {
        GradientMode::GridCentral => {
            let info = space.grid_info().expect("grid mode implies grid info");
            let h = info.spacing;
            let f = values.values();
            match info.dim {
                1 => {
                    let n = f.len();
                    let mut g = vec![0.0; n];
                    for i in 0..n {
                        g[i] = axis_diff(f, i, 1, n, h).abs();
                    }
                    PointField::new(g)
                }
                _ => {
                    let (nx, ny) = (info.shape[0], info.shape[1]);
                    let mut g = vec![0.0; f.len()];
                    for iy in 0..ny {
                        for ix in 0..nx {
                            let id = iy * nx + ix;
                            let dx = line_diff(f, id, ix, 1, nx, h);
                            let dy = line_diff(f, id, iy, nx, ny, h);
                            g[id] = (dx * dx + dy * dy).sqrt();
                        }
                    }
                    PointField::new(g)
                }
            }
        }
        GradientMode::GraphUpper => {
            let f = values.values();
            let g = (0..space.len())
                .map(|i| {
                    space
                        .neighbors(i)
                        .iter()
                        .map(|&j| (f[i] - f[j]).abs() / space.distance(i, j))
                        .fold(0.0_f64, f64::max)
                })
                .collect();
            PointField::new(g)
        }
    }
}

/// Point ids with no gradient neighbors; their gradient is reported as zero.
pub fn isolated_points(space: &Space) -> Vec<usize> {
    match space.gradient_mode() {
        GradientMode::GridCentral => Vec::new(),
        GradientMode::GraphUpper => (0..space.len())
            .filter(|&i| space.neighbors(i).is_empty())
            .collect(),
    }
}

fn axis_diff(f: &[f64], id: usize, stride: usize, count: usize, h: f64) -> f64 {
    line_diff(f, id, id, stride, count, h)
}

/// Central difference along one axis; `pos` is the index along the axis.
fn line_diff(f: &[f64], id: usize, pos: usize, stride: usize, count: usize, h: f64) -> f64 {
    if count == 1 {
        0.0
    } else if pos == 0 {
        (f[id + stride] - f[id]) / h
    } else if pos == count - 1 {
        (f[id] - f[id - stride]) / h
    } else {
        (f[id + stride] - f[id - stride]) / (2.0 * h)
    }
}

/// Weighted `l_p(mu)` norm of a field; `p = infinity` takes the exact max.
pub fn lp_norm(space: &Space, field: &PointField, p: f64) -> f64 {
    if p.is_infinite() {
        field.values().iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    } else {
        field
            .values()
            .iter()
            .zip(space.measures())
            .map(|(&v, &mu)| v.abs().powf(p) * mu)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Weighted Sobolev norm: `||f||_p + || |grad f| ||_p + ||V f||_p`, with the
/// first term dropped in homogeneous mode.
pub fn sobolev_norm(
    space: &Space,
    v: &Weight,
    u: &SobolevFunction,
    p: f64,
    homogeneous: bool,
) -> f64 {
    let vf = PointField::new(
        u.values
            .values()
            .iter()
            .zip(v.values())
            .map(|(&f, &w)| w * f)
            .collect(),
    );
    let mut norm = lp_norm(space, &u.gradient, p) + lp_norm(space, &vf, p);
    if !homogeneous {
        norm += lp_norm(space, &u.values, p);
    }
    norm
}

/// Sobolev norm of a bare value vector; the gradient is recomputed with the
/// space's discrete operator.
pub fn sobolev_norm_of_values(
    space: &Space,
    v: &Weight,
    values: &PointField,
    p: f64,
    homogeneous: bool,
) -> f64 {
    let g = gradient(space, values);
    let u = SobolevFunction::with_gradient(values.clone(), g);
    sobolev_norm(space, v, &u, p, homogeneous)
}

/// Pointwise functional `T_r f = |f|^r + |grad f|^r + |Vf|^r`; homogeneous
/// mode drops the `|f|^r` term.
pub fn t_r(space: &Space, v: &Weight, u: &SobolevFunction, r: f64, homogeneous: bool) -> PointField {
    let _ = space;
    let f = u.values.values();
    let g = u.gradient.values();
    let w = v.values();
    PointField::new(
        (0..f.len())
            .map(|i| {
                let base = g[i].abs().powf(r) + (w[i] * f[i]).abs().powf(r);
                if homogeneous {
                    base
                } else {
                    base + f[i].abs().powf(r)
                }
            })
            .collect(),
    )
}

/// Uncentered Hardy-Littlewood maximal function over the enumerated ball
/// family: `Mf(x) = max over balls containing x of avg_B |f|`.
pub fn maximal(space: &Space, field: &PointField, radius_cap: Option<f64>) -> PointField {
    let capv = radius_cap.unwrap_or(f64::INFINITY);
    let fam = space.ball_family();
    let orders = space.orders();
    let n = space.len();
    // Seed with the singleton-ball averages, which are exactly |f|; this
    // keeps the pointwise bound f <= Mf free of rounding.
    let mut out: Vec<f64> = field.values().iter().map(|v| v.abs()).collect();
    let balls = &fam.balls;
    let mut i = 0;
    while i < balls.len() {
        let center = balls[i].center;
        let mut j = i;
        while j < balls.len() && balls[j].center == center {
            j += 1;
        }
        let ord = &orders[center as usize];
        // Prefix sums of |f| mu along this center's distance order.
        let mut pf = Vec::with_capacity(n + 1);
        pf.push(0.0);
        let mut acc = 0.0;
        for &id in &ord.ids {
            acc += field[id as usize].abs() * space.measure(id as usize);
            pf.push(acc);
        }
        // Cap-passing balls of this run, ascending cut.
        let mut cuts: Vec<usize> = Vec::new();
        let mut avgs: Vec<f64> = Vec::new();
        for b in &balls[i..j] {
            if b.passes_cap(capv) {
                cuts.push(b.cut as usize);
                avgs.push(pf[b.cut as usize] / b.mass);
            }
        }
        if !cuts.is_empty() {
            // A point at order position p belongs to every ball with cut > p;
            // take the best average among those.
            let m = cuts.len();
            let mut best_from = vec![0.0; m];
            let mut run = f64::NEG_INFINITY;
            for k in (0..m).rev() {
                run = run.max(avgs[k]);
                best_from[k] = run;
            }
            let max_cut = cuts[m - 1];
            let mut k = 0;
            for p in 0..max_cut {
                while cuts[k] < p + 1 {
                    k += 1;
                }
                let id = ord.ids[p] as usize;
                if best_from[k] > out[id] {
                    out[id] = best_from[k];
                }
            }
        }
        i = j;
    }
    PointField::new(out)
}

/// Measured weak-(1,1) constant of the maximal operator:
/// `max over levels v of v * mu{Mf >= v} / ||f||_1`.
pub fn weak11_constant(space: &Space, field: &PointField, radius_cap: Option<f64>) -> f64 {
    let mf = maximal(space, field, radius_cap);
    let l1: f64 = field
        .values()
        .iter()
        .zip(space.measures())
        .map(|(&v, &mu)| v.abs() * mu)
        .sum();
    if l1 == 0.0 {
        return 0.0;
    }
    let mut pairs: Vec<(f64, f64)> = mf
        .values()
        .iter()
        .zip(space.measures())
        .map(|(&v, &mu)| (v, mu))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut best = 0.0_f64;
    let mut cum = 0.0;
    let mut idx = 0;
    while idx < pairs.len() {
        let v = pairs[idx].0;
        while idx < pairs.len() && pairs[idx].0 == v {
            cum += pairs[idx].1;
            idx += 1;
        }
        if v > 0.0 {
            best = best.max(v * cum / l1);
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct PoincareReport {
    pub constant: f64,
    /// True when every tested ball was skipped (zero on both sides).
    pub vacuous: bool,
    /// True when some ball had oscillation but no gradient mass.
    pub violated: bool,
    pub attaining: Option<(usize, f64, usize)>,
}

/// Poincaré constant estimate over a bank of test functions:
/// `C = max over balls B and bank members of
///      avg_B |f - f_B|^s / (r^s avg_B |grad f|^s)`.
pub fn poincare_constant(
    space: &Space,
    s: f64,
    bank: &[SobolevFunction],
    radius_cap: Option<f64>,
) -> Result<PoincareReport> {
    if bank.is_empty() {
        return Err(Error::Domain("poincare estimation needs a nonempty bank".into()));
    }
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("poincare exponent must be >= 1, got {s}")));
    }
    let capv = radius_cap.unwrap_or(f64::INFINITY);
    let fam = space.ball_family();
    let orders = space.orders();
    let mut report = PoincareReport {
        constant: 0.0,
        vacuous: true,
        violated: false,
        attaining: None,
    };
    for b in &fam.balls {
        if !b.passes_cap(capv) {
            continue;
        }
        let ord = &orders[b.center as usize];
        let members = &ord.ids[..b.cut as usize];
        let rep = b.rep_radius(capv);
        for (bi, u) in bank.iter().enumerate() {
            let f = u.values.values();
            let g = u.gradient.values();
            let (mut sf, mut sg, mut sm) = (0.0, 0.0, 0.0);
            for &id in members {
                let mu = space.measure(id as usize);
                sf += f[id as usize] * mu;
                sg += g[id as usize].abs().powf(s) * mu;
                sm += mu;
            }
            let fb = sf / sm;
            let mut osc = 0.0;
            for &id in members {
                osc += (f[id as usize] - fb).abs().powf(s) * space.measure(id as usize);
            }
            osc /= sm;
            let grad_avg = sg / sm;
            if grad_avg == 0.0 {
                if osc == 0.0 {
                    continue;
                }
                report.violated = true;
                report.vacuous = false;
                continue;
            }
            report.vacuous = false;
            let ratio = osc / (rep.powf(s) * grad_avg);
            if ratio > report.constant {
                report.constant = ratio;
                report.attaining = Some((b.center as usize, rep, bi));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct FpReport {
    pub constant: f64,
    pub attaining: Option<(usize, f64, usize)>,
}

/// Fefferman-Phong constant estimate over a bank:
/// `C = min over balls B and bank members of
///      int_B(|grad u|^p + w|u|^p) / (min(R^-p, w_B) int_B |u|^p)`.
/// Balls with no `|u|^p` mass are skipped; the result is infinite when
/// everything was skipped.
pub fn fp_constant(
    space: &Space,
    w: &Weight,
    p: f64,
    bank: &[SobolevFunction],
    radius_cap: Option<f64>,
) -> Result<FpReport> {
    if bank.is_empty() {
        return Err(Error::Domain("fp estimation needs a nonempty bank".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("fp exponent must be >= 1, got {p}")));
    }
    // Per-ball integrals are plain weighted sums, so one scan suffices:
    // fields = [w] ++ [energy_u, |u|^p for each u].
    let mut storage: Vec<Vec<f64>> = Vec::with_capacity(1 + 2 * bank.len());
    storage.push(w.values().to_vec());
    for u in bank {
        let f = u.values.values();
        let g = u.gradient.values();
        storage.push(
            (0..f.len())
                .map(|i| g[i].abs().powf(p) + w.values()[i] * f[i].abs().powf(p))
                .collect(),
        );
        storage.push(f.iter().map(|&x| x.abs().powf(p)).collect());
    }
    let fields: Vec<&[f64]> = storage.iter().map(|v| v.as_slice()).collect();
    let mut report = FpReport {
        constant: f64::INFINITY,
        attaining: None,
    };
    scan_ball_sums(space, radius_cap, &fields, |ball, rep, sums| {
        let w_b = sums[0] / ball.mass;
        let floor = rep.powf(-p).min(w_b);
        for bi in 0..bank.len() {
            let energy = sums[1 + 2 * bi];
            let mass_u = sums[2 + 2 * bi];
            if mass_u == 0.0 || floor == 0.0 {
                continue;
            }
            let ratio = energy / (floor * mass_u);
            if ratio < report.constant {
                report.constant = ratio;
                report.attaining = Some((ball.center as usize, rep, bi));
            }
        }
    });
    Ok(report)
}

/// Fefferman-Phong ratio on one explicit ball (None when skipped).
pub fn fp_ball_ratio(
    space: &Space,
    w: &Weight,
    p: f64,
    u: &SobolevFunction,
    ball: &Ball,
) -> Option<f64> {
    let f = u.values.values();
    let g = u.gradient.values();
    let (mut energy, mut mass_u, mut sw, mut sm) = (0.0, 0.0, 0.0, 0.0);
    for &i in &ball.members {
        let mu = space.measure(i);
        energy += (g[i].abs().powf(p) + w.values()[i] * f[i].abs().powf(p)) * mu;
        mass_u += f[i].abs().powf(p) * mu;
        sw += w.values()[i] * mu;
        sm += mu;
    }
    let floor = ball.radius.powf(-p).min(sw / sm);
    if mass_u == 0.0 || floor == 0.0 {
        None
    } else {
        Some(energy / (floor * mass_u))
    }
}
