//! Bundled verification suites.
//!
//! The thirteen acceptance checks and the per-module invariant suites live
//! here as library functions returning [`VerificationReport`]s, so the CLI
//! and the integration tests run exactly the same code. All seeds and
//! measured windows are frozen; a [`Tolerances`] scale can widen windows
//! for exploratory runs (the defaults are the normative ones).

use rayon::prelude::*;
use std::time::Instant;

use crate::calculus::{
    fp_ball_ratio, fp_constant, gradient, lp_norm, maximal, poincare_constant, sobolev_norm, t_r,
    weak11_constant, SobolevFunction,
};
use crate::czd::{check_whitney, cz_decompose, verify_cz, CzParams};
use crate::error::{Error, Result};
use crate::fields::{low_pass_field, positive_field, random_field, standard_bank, SeededRng};
use crate::kfunc::{
    equivalence_report, k_bounds_infty, k_exact, k_lower_bound, k_upper_via_cz,
    log_grid, SpacePair,
};
use crate::rearrange::{
    decreasing_rearrangement, double_star, hardy_check, holmstedt_k, measure_above, StepFunction,
};
use crate::report::VerificationReport;
use crate::space::{
    build_cayley_z2, build_grid, doubling_constant, enumerate_balls, MeasureMode, PointField,
    Space,
};
use crate::weights::{
    ap_constant, make_weight, rh_constant, rh_infinity_constant, rh_power_law_check, Weight,
    WeightKind,
};

/// Widening factor applied to the pass windows; 1.0 is normative.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { scale: 1.0 }
    }
}

/// Frozen from the bundled seed run: the largest observed ratio of the
/// theorem lower-bound formula to the exact oracle over the criterion-5
/// family and t-grid, with a hair of head-room for cross-platform libm
/// differences. The criterion additionally requires it below 1e3.
pub const LOWER_OVER_EXACT_FROZEN: f64 = 2.05;

/// Frozen Holmstedt window. The default [1/8, 8] held on the bundled seed
/// run, so the frozen window is the default window.
pub const HOLMSTEDT_WINDOW_FROZEN: (f64, f64) = (0.125, 8.0);

fn counting_line(n: usize) -> Space {
    build_grid(1, &[(0.0, (n - 1) as f64)], 1.0, MeasureMode::Counting).unwrap()
}

fn unit_weight(n: usize) -> Weight {
    Weight::new(PointField::constant(n, 1.0)).unwrap()
}

/// Geometric midpoint between two consecutive distinct values of the
/// maximal field, at roughly the requested quantile; this guarantees a
/// proper level-set split (both sides nonempty).
fn alpha_between_quantiles(space: &Space, v: &Weight, u: &SobolevFunction, s: f64, frac: f64) -> f64 {
    let ts = t_r(space, v, u, s, false);
    let mts = maximal(space, &ts, None);
    let mut vals: Vec<f64> = mts.values().to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.dedup();
    if vals.len() < 2 {
        return (vals[0].max(1e-12) * 0.9).powf(1.0 / s);
    }
    let idx = ((vals.len() as f64 * frac) as usize).clamp(1, vals.len() - 1);
    (vals[idx - 1] * vals[idx]).sqrt().powf(1.0 / s)
}

struct CzInstance {
    space: Space,
    vkind: WeightKind,
    v: Weight,
    u: SobolevFunction,
    q: f64,
    alpha: f64,
}

/// The 50 seeded instances shared by criteria 1, 2 and 12:
/// 1-D and 2-D grids up to 400 points, the three bundled weights, both
/// q regimes, thresholds at rotating quantiles of `M T_1 f`.
fn criterion_instances() -> Vec<CzInstance> {
    let sizes_1d = [32usize, 64, 100, 150, 200];
    let sizes_2d = [10usize, 12, 14, 17, 20];
    let fracs = [0.3, 0.5, 0.7, 0.85];
    (0..50usize)
        .into_par_iter()
        .map(|k| {
            let seed = 1000 + k as u64;
            let space = if k % 2 == 1 {
                let m = sizes_2d[(k / 2) % sizes_2d.len()];
                build_grid(
                    2,
                    &[(-1.0, 1.0), (-1.0, 1.0)],
                    2.0 / (m as f64 - 1.0),
                    MeasureMode::CellVolume,
                )
                .unwrap()
            } else {
                let m = sizes_1d[(k / 2) % sizes_1d.len()];
                build_grid(1, &[(-1.0, 1.0)], 2.0 / (m as f64 - 1.0), MeasureMode::CellVolume)
                    .unwrap()
            };
            let vkind = match k % 3 {
                0 => WeightKind::Polynomial { coeffs: vec![1.0] },
                1 => WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] },
                _ => WeightKind::Power { alpha: 0.25 },
            };
            let v = make_weight(&vkind, &space).unwrap();
            let u = SobolevFunction::from_values(&space, low_pass_field(&space, seed, 3));
            let q = if k % 4 < 2 { 2.0 } else { f64::INFINITY };
            let alpha = alpha_between_quantiles(&space, &v, &u, 1.0, fracs[k % fracs.len()]);
            CzInstance {
                space,
                vkind,
                v,
                u,
                q,
                alpha,
            }
        })
        .collect()
}

/// Criteria 1, 2 and 12 share the instance set; this runs the decomposition
/// once per instance and derives all three reports.
fn criteria_1_2_12(tol: &Tolerances) -> (VerificationReport, VerificationReport, VerificationReport) {
    let start = Instant::now();
    let instances = criterion_instances();
    struct Row {
        rec_err: f64,
        support_ok: bool,
        whitney_ok: bool,
        proper: bool,
        fp_base: f64,
        fp_ratio: f64,
    }
    let rows: Vec<Row> = instances
        .par_iter()
        .map(|inst| {
            let params = CzParams {
                r: 1.0,
                s: 1.0,
                p: 1.5,
                q: inst.q,
                homogeneous: false,
            };
            let d = cz_decompose(&inst.space, &inst.v, &inst.u, params, inst.alpha, None)
                .expect("bundled instance must decompose");
            let ver = verify_cz(&inst.space, &inst.v, &d);
            let whitney_ok = if d.cover.is_empty() {
                !d.omega_full && d.omega.is_empty()
            } else {
                check_whitney(&inst.space, &d.omega, &d.cover).all()
            };
            // Criterion 12 on the same instance: FP positivity and its
            // stability across one dyadic refinement.
            let bank = standard_bank(&inst.space, 7000 + d.pieces.len() as u64, 2);
            let fp_base = fp_constant(&inst.space, &inst.v, 2.0, &bank, None)
                .expect("bank is nonempty")
                .constant;
            let refined = inst.space.refine().expect("grid instances refine");
            let v_fine = make_weight(&inst.vkind, &refined).expect("weight resamples");
            let bank_fine = standard_bank(&refined, 7000 + d.pieces.len() as u64, 2);
            let fp_fine = fp_constant(&refined, &v_fine, 2.0, &bank_fine, None)
                .expect("bank is nonempty")
                .constant;
            Row {
                rec_err: ver.reconstruction_err,
                support_ok: ver.support_ok,
                whitney_ok,
                proper: !d.cover.is_empty(),
                fp_base,
                fp_ratio: fp_fine / fp_base,
            }
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let max_rec = rows.iter().fold(0.0_f64, |m, r| m.max(r.rec_err));
    let all_support = rows.iter().all(|r| r.support_ok);
    let proper = rows.iter().filter(|r| r.proper).count();
    let c1 = VerificationReport::new("criterion-01-cz-reconstruction")
        .measure("instances", rows.len() as f64)
        .measure("proper_decompositions", proper as f64)
        .measure("max_reconstruction_err", max_rec)
        .measure("elapsed_s", elapsed)
        .note("f = g + sum b_i to 1e-12 relative, supports exact, under 30 s")
        .passing(max_rec <= 1e-12 * tol.scale && all_support && elapsed < 30.0);

    let whitney_ok = rows.iter().all(|r| r.whitney_ok);
    let c2 = VerificationReport::new("criterion-02-whitney-invariants")
        .measure("instances", rows.len() as f64)
        .note("disjoint selection, coverage, exact radii, security hits F, 3-comparability")
        .passing(whitney_ok && proper > 0);

    let fp_min = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.fp_base));
    let ratio_lo = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.fp_ratio));
    let ratio_hi = rows.iter().fold(0.0_f64, |m, r| m.max(r.fp_ratio));
    let c12 = VerificationReport::new("criterion-12-fefferman-phong")
        .measure("fp_min", fp_min)
        .measure("refinement_ratio_min", ratio_lo)
        .measure("refinement_ratio_max", ratio_hi)
        .note("fp constant positive on the standard bank; stable within 3x under refinement")
        .passing(
            fp_min > 0.0
                && ratio_lo >= 1.0 / (3.0 * tol.scale)
                && ratio_hi <= 3.0 * tol.scale,
        );
    (c1, c2, c12)
}

/// Log-polar mesh: rings at geometric radii with a constant sector count
/// plus a center point; the discretization looks the same at every scale,
/// which is what lets one instance stay self-similar across a three-decade
/// threshold sweep.
fn log_polar_mesh(r0: f64, rho: f64, rings: usize, sectors: usize) -> Space {
    let mut coords = vec![vec![0.0, 0.0]];
    let mut measure = vec![std::f64::consts::PI * r0 * r0 / rho];
    let mut adjacency: Vec<Vec<usize>> = vec![(1..=sectors).collect()];
    let id = |m: usize, k: usize| 1 + m * sectors + k;
    for m in 0..rings {
        let r = r0 * rho.powi(m as i32);
        let cell = std::f64::consts::PI * r * r * (rho - 1.0 / rho) / sectors as f64;
        for k in 0..sectors {
            let th = 2.0 * std::f64::consts::PI * k as f64 / sectors as f64;
            coords.push(vec![r * th.cos(), r * th.sin()]);
            measure.push(cell);
            let mut adj = vec![id(m, (k + 1) % sectors), id(m, (k + sectors - 1) % sectors)];
            if m > 0 {
                adj.push(id(m - 1, k));
            } else {
                adj.push(0);
            }
            if m + 1 < rings {
                adj.push(id(m + 1, k));
            }
            adjacency.push(adj);
        }
    }
    Space::new(
        Some(coords),
        crate::space::Metric::Euclidean,
        measure,
        Some(adjacency),
        crate::space::GradientMode::GraphUpper,
        None,
    )
    .expect("log-polar mesh is a valid space")
}

/// Criterion 3: constants of the decomposition under a three-decade alpha
/// sweep on a fixed 2-D instance.
///
/// The instance is a log-polar mesh carrying the scale-free profile
/// `u = |x|^-2` with the power weight `V = |x|^-1`: level sets of the
/// maximal field are then rings at every scale, so each alpha decade sees
/// the same discrete geometry and the measured constants stay put.
fn criterion_03(tol: &Tolerances) -> VerificationReport {
    let rho = 1.18_f64;
    let r0 = 2.5_f64;
    let space = log_polar_mesh(r0, rho, 40, 36);
    let coords = space.coords().unwrap();
    let radius = |c: &Vec<f64>| (c[0] * c[0] + c[1] * c[1]).sqrt().max(r0 / rho);
    let u = SobolevFunction::from_values(
        &space,
        PointField::new(coords.iter().map(|c| radius(c).powi(-2)).collect()),
    );
    let v = Weight::new(PointField::new(
        coords.iter().map(|c| radius(c).powi(-1)).collect(),
    ))
    .unwrap();
    let cap = None;
    let params = CzParams {
        r: 1.0,
        s: 1.0,
        p: 1.0,
        q: 2.0,
        homogeneous: false,
    };

    let ts = t_r(&space, &v, &u, 1.0, false);
    let mts = maximal(&space, &ts, cap);
    let mut vals: Vec<f64> = mts.values().to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha_lo = vals[0] * 1.6;
    let alphas: Vec<f64> = (0..8).map(|j| alpha_lo * 10f64.powf(3.0 * j as f64 / 7.0)).collect();

    let mut c2s = Vec::new();
    let mut c3s = Vec::new();
    let mut c4s = Vec::new();
    let mut c5s = Vec::new();
    let mut n_max = 0usize;
    let mut degenerate = 0usize;
    for &alpha in &alphas {
        let d = cz_decompose(&space, &v, &u, params, alpha, cap).unwrap();
        if d.omega_full || d.pieces.is_empty() {
            degenerate += 1;
            continue;
        }
        let ver = verify_cz(&space, &v, &d);
        c2s.push(ver.c2.unwrap());
        c3s.push(ver.c3_s);
        c4s.push(ver.c4);
        c5s.push(ver.n_overlap as f64);
        n_max = n_max.max(ver.n_overlap);
    }
    let spread = |xs: &[f64]| -> f64 {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(0.0_f64, f64::max);
        hi / lo
    };
    let window = 10.0 * tol.scale;
    let ok = degenerate == 0
        && spread(&c2s) <= window
        && spread(&c3s) <= window
        && spread(&c4s) <= window
        && spread(&c5s) <= window
        && n_max <= 64;
    VerificationReport::new("criterion-03-cz-constants-stability")
        .measure("alpha_lo", alphas[0])
        .measure("alpha_hi", alphas[7])
        .measure("spread_c2", spread(&c2s))
        .measure("spread_c3", spread(&c3s))
        .measure("spread_c4", spread(&c4s))
        .measure("spread_c5", spread(&c5s))
        .measure("n_max", n_max as f64)
        .measure("degenerate", degenerate as f64)
        .note("alpha over 3 decades: each measured constant within 10x, N <= 64")
        .passing(ok)
}

/// Criterion 4: the exact oracle never exceeds the CZ split objective.
fn criterion_04(_tol: &Tolerances) -> VerificationReport {
    let space = counting_line(4);
    let ts = log_grid(1e-2, 1e2, 20);
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for i in 0..20usize {
        let u = SobolevFunction::from_values(&space, random_field(&space, 7000 + i as u64));
        let v = Weight::new(positive_field(&space, 9000 + i as u64)).unwrap();
        let t = ts[i];
        let pair = SpacePair::Sobolev { r: 1.0, q: 2.0, homogeneous: false };
        let exact = k_exact(&space, &v, &u, &pair, t).unwrap().value;
        let upper = k_upper_via_cz(&space, &v, &u, 1.0, 1.0, 2.0, t, None, false)
            .unwrap()
            .objective;
        let slack = exact - upper;
        worst = worst.max(slack / upper.max(1e-300));
        if exact > upper * (1.0 + 1e-12) {
            ok = false;
        }
    }
    VerificationReport::new("criterion-04-feasibility-sandwich")
        .measure("triples", 20.0)
        .measure("worst_relative_slack", worst)
        .note("k_exact <= CZ objective on every seeded (f, V, t) triple")
        .passing(ok)
}

/// Criterion 5: lower-bound formula against the exact oracle under one
/// frozen constant.
fn criterion_05(tol: &Tolerances) -> VerificationReport {
    let space = counting_line(4);
    let v = Weight::new(positive_field(&space, 77)).unwrap();
    let ts = log_grid(1e-3, 1e3, 33);
    let mut measured: f64 = 0.0;
    let mut ok = true;
    for i in 0..5usize {
        let u = SobolevFunction::from_values(&space, random_field(&space, 100 + i as u64));
        let pair = SpacePair::Sobolev { r: 1.0, q: 2.0, homogeneous: false };
        for &t in &ts {
            let exact = k_exact(&space, &v, &u, &pair, t).unwrap().value;
            let lower = k_lower_bound(&space, &v, &u, 1.0, 2.0, t, false).unwrap();
            let ratio = lower / exact.max(1e-300);
            measured = measured.max(ratio);
            if ratio > LOWER_OVER_EXACT_FROZEN * (1.0 + 1e-9) * tol.scale {
                ok = false;
            }
        }
    }
    VerificationReport::new("criterion-05-lower-bound-consistency")
        .measure("measured_c1", measured)
        .measure("frozen_c1", LOWER_OVER_EXACT_FROZEN)
        .note("lower formula <= frozen C1 x exact, C1 <= 1e3, over family x t-grid")
        .passing(ok && LOWER_OVER_EXACT_FROZEN <= 1e3)
}

/// Criterion 6: exact K against the Holmstedt formula on the L1/L2 pair.
fn criterion_06(tol: &Tolerances) -> VerificationReport {
    let space = counting_line(4);
    let v = unit_weight(4);
    let ts = log_grid(1e-3, 1e3, 33);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..10usize {
        let u = SobolevFunction::from_values(&space, random_field(&space, 200 + i as u64));
        let sf = decreasing_rearrangement(&space, &u.values);
        let pair = SpacePair::Lebesgue { p0: 1.0, p1: 2.0 };
        for &t in &ts {
            let exact = k_exact(&space, &v, &u, &pair, t).unwrap().value;
            let h = holmstedt_k(&sf, 1.0, 2.0, t).unwrap();
            if h == 0.0 {
                continue;
            }
            let ratio = exact / h;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let (wlo, whi) = HOLMSTEDT_WINDOW_FROZEN;
    let ok = lo >= wlo / tol.scale && hi <= whi * tol.scale;
    VerificationReport::new("criterion-06-holmstedt-window")
        .measure("ratio_min", lo)
        .measure("ratio_max", hi)
        .measure("window_lo", wlo)
        .measure("window_hi", whi)
        .note("exact/holmstedt within the frozen window on n<=4 counting spaces")
        .passing(ok)
}

/// Criterion 7: interpolation-norm equivalence signature plus its exact
/// scaling sub-check.
fn criterion_07(tol: &Tolerances) -> VerificationReport {
    let space = build_grid(1, &[(-1.0, 1.0)], 2.0 / 99.0, MeasureMode::Counting).unwrap();
    let v = make_weight(&WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] }, &space).unwrap();
    let family: Vec<SobolevFunction> = (0..20u64)
        .map(|i| SobolevFunction::from_values(&space, low_pass_field(&space, 500 + i, 3)))
        .collect();
    let rep = equivalence_report(&space, &v, &family, 1.0, 1.0, 2.0, 1.5, false, None, 1e2 * tol.scale)
        .expect("family is nonempty and ordered");
    let spread = rep
        .measures
        .iter()
        .find(|(k, _)| k == "spread")
        .map(|&(_, v)| v)
        .unwrap_or(f64::NAN);

    let u = &family[0];
    let scaled = vec![
        u.clone(),
        SobolevFunction::from_values(&space, u.values.scale(2.0)),
        SobolevFunction::from_values(&space, u.values.scale(10.0)),
    ];
    let hrep = equivalence_report(&space, &v, &scaled, 1.0, 1.0, 2.0, 1.5, false, None, 1e2)
        .expect("scaling family");
    let hspread = hrep
        .measures
        .iter()
        .find(|(k, _)| k == "spread")
        .map(|&(_, v)| v)
        .unwrap_or(f64::NAN);
    VerificationReport::new("criterion-07-interpolation-equivalence")
        .measure("spread", spread)
        .measure("homogeneity_spread", hspread)
        .note("interp/sobolev ratio spread <= 1e2; scaling family spread = 1 +- 1e-6")
        .passing(rep.pass && (hspread - 1.0).abs() <= 1e-6 * tol.scale)
}

/// Criterion 8: reverse-Hölder refinement dichotomy for the power weights.
///
/// The alpha = 0.25 branch must be stable within 5 percent across the two
/// finest of six dyadic grids. The alpha = 0.6 branch demands growth of at
/// least 1.5x per refinement at the two finest levels; the measured
/// divergence rate of the discrete constant is h^-(alpha - 1/q), about
/// 1.07x-1.10x per halving, so this branch fails as specified and the
/// report records the measured factors.
fn criterion_08(tol: &Tolerances) -> VerificationReport {
    let constants = |alpha: f64| -> Vec<f64> {
        (0..6u32)
            .map(|lev| {
                let spacing = 0.25 / 2f64.powi(lev as i32);
                let s = build_grid(1, &[(-1.0, 1.0)], spacing, MeasureMode::CellVolume).unwrap();
                let w = make_weight(&WeightKind::Power { alpha }, &s).unwrap();
                rh_constant(&s, &w, 2.0, None).unwrap().constant
            })
            .collect()
    };
    let stable = constants(0.25);
    let diverging = constants(0.6);
    let stable_var = (stable[5] / stable[4] - 1.0).abs();
    let growth_45 = diverging[5] / diverging[4];
    let growth_34 = diverging[4] / diverging[3];
    let ok_stable = stable_var < 0.05 * tol.scale;
    let ok_diverge = growth_45 >= 1.5 / tol.scale && growth_34 >= 1.5 / tol.scale;
    VerificationReport::new("criterion-08-rh-refinement-dichotomy")
        .measure("stable_variation", stable_var)
        .measure("diverge_growth_l3_l4", growth_34)
        .measure("diverge_growth_l4_l5", growth_45)
        .note("alpha=0.25 stable <5%; alpha=0.6 must grow >=1.5x per refinement")
        .note("measured divergence rate is ~1.10x per halving (h^-(alpha-1/q)); the 1.5x target is unattainable for q=2")
        .passing(ok_stable && ok_diverge)
}

/// Criterion 9: maximal-operator stability across refinements.
fn criterion_09(tol: &Tolerances) -> VerificationReport {
    let mut l2_stats = Vec::new();
    let mut weak_stats = Vec::new();
    let mut pointwise_ok = true;
    for lev in 0..4u32 {
        let spacing = 0.1 / 2f64.powi(lev as i32);
        let s = build_grid(1, &[(0.0, 1.0)], spacing, MeasureMode::CellVolume).unwrap();
        let mut l2_max = 0.0_f64;
        let mut weak_max = 0.0_f64;
        for i in 0..10u64 {
            let f = random_field(&s, 300 + i);
            let mf = maximal(&s, &f, None);
            let ratio = lp_norm(&s, &mf, 2.0) / lp_norm(&s, &f, 2.0);
            l2_max = l2_max.max(ratio);
            weak_max = weak_max.max(weak11_constant(&s, &f, None));
            let fabs = f.map(f64::abs);
            let mfa = maximal(&s, &fabs, None);
            for x in 0..s.len() {
                if mfa[x] < fabs[x] {
                    pointwise_ok = false;
                }
            }
        }
        l2_stats.push(l2_max);
        weak_stats.push(weak_max);
    }
    let spread = |xs: &[f64]| {
        xs.iter().cloned().fold(0.0_f64, f64::max) / xs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let ok = spread(&l2_stats) < 2.0 * tol.scale && spread(&weak_stats) < 2.0 * tol.scale && pointwise_ok;
    VerificationReport::new("criterion-09-maximal-operator")
        .measure("l2_ratio_spread", spread(&l2_stats))
        .measure("weak11_spread", spread(&weak_stats))
        .note("norm and weak-(1,1) constants stable <2x over 4 refinements; f <= Mf exact")
        .passing(ok)
}

/// Criterion 10: rearrangement exactness and subadditivity.
fn criterion_10(tol: &Tolerances) -> VerificationReport {
    let s = counting_line(50);
    let total = s.total_measure();
    let mut max_l1_err = 0.0_f64;
    let mut dist_ok = true;
    for i in 0..100u64 {
        let f = random_field(&s, 600 + i);
        let sf = decreasing_rearrangement(&s, &f);
        let l1: f64 = f
            .values()
            .iter()
            .zip(s.measures())
            .map(|(&v, &mu)| v.abs() * mu)
            .sum();
        max_l1_err = max_l1_err.max((sf.total_integral() - l1).abs() / l1.max(1e-300));
        for k in 1..=33 {
            let t = total * 1.2 * k as f64 / 33.0;
            if measure_above(&s, &f, sf.eval(t)) > t + 1e-12 {
                dist_ok = false;
            }
        }
    }
    let mut sub_ok = true;
    for i in 0..50u64 {
        let f = random_field(&s, 600 + i);
        let g = random_field(&s, 650 + i);
        let sum = PointField::new(
            f.values()
                .iter()
                .zip(g.values())
                .map(|(&a, &b)| a + b)
                .collect(),
        );
        let (sf, sg, ss) = (
            decreasing_rearrangement(&s, &f),
            decreasing_rearrangement(&s, &g),
            decreasing_rearrangement(&s, &sum),
        );
        for k in 1..=33 {
            let t = total * k as f64 / 33.0;
            let lhs = double_star(&ss, t).unwrap();
            let rhs = double_star(&sf, t).unwrap() + double_star(&sg, t).unwrap();
            if lhs > rhs * (1.0 + 1e-12) {
                sub_ok = false;
            }
        }
    }
    VerificationReport::new("criterion-10-rearrangement-exactness")
        .measure("max_equimeasurability_err", max_l1_err)
        .note("int f* = ||f||_1, distribution bound, and (f+g)** <= f** + g**, all to 1e-12")
        .passing(max_l1_err <= 1e-12 * tol.scale && dist_ok && sub_ok)
}

/// Criterion 11: Hardy inequality on random compactly supported steps.
fn criterion_11(_tol: &Tolerances) -> VerificationReport {
    let mut rng = SeededRng::new(44);
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    for i in 0..100usize {
        let pieces = 3 + i % 6;
        let mut breaks = vec![0.0];
        for _ in 0..pieces {
            breaks.push(breaks.last().unwrap() + rng.range(0.1, 1.0));
        }
        let values: Vec<f64> = (0..pieces).map(|_| rng.range(0.0, 2.0)).collect();
        let g = StepFunction::from_pieces(breaks, values).unwrap();
        for l in [0.25, 0.5, 0.75, 1.0] {
            let rep = hardy_check(&g, l).unwrap();
            worst_margin = worst_margin.min(rep.rhs - rep.lhs);
            if !rep.pass {
                ok = false;
            }
        }
    }
    VerificationReport::new("criterion-11-hardy-inequality")
        .measure("checks", 400.0)
        .measure("worst_margin", worst_margin)
        .note("closed-form Hardy inequality holds for all seeded steps and l values")
        .passing(ok)
}

/// Criterion 13: the q = infinity, r = s formula pair is a true
/// characterization: the upper/lower ratio is constant (identically 1).
fn criterion_13(tol: &Tolerances) -> VerificationReport {
    let s = counting_line(50);
    let v = make_weight(&WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] }, &s).unwrap();
    let ts = log_grid(1e-3, 1e3, 33);
    let mut max_dev = 0.0_f64;
    for i in 0..10u64 {
        let u = SobolevFunction::from_values(&s, low_pass_field(&s, 800 + i, 2));
        for &t in &ts {
            let (lo, hi) = k_bounds_infty(&s, &v, &u, 1.0, 1.0, t, false).unwrap();
            if lo == 0.0 && hi == 0.0 {
                continue;
            }
            max_dev = max_dev.max((hi / lo - 1.0).abs());
        }
    }
    VerificationReport::new("criterion-13-infinity-characterization")
        .measure("max_ratio_deviation", max_dev)
        .note("upper/lower ratio at r = s is 1 to 1e-9 across the seed family")
        .passing(max_dev <= 1e-9 * tol.scale)
}

/// All thirteen acceptance checks, in order.
pub fn acceptance_all(tol: &Tolerances) -> Vec<VerificationReport> {
    let (c1, c2, c12) = criteria_1_2_12(tol);
    vec![
        c1,
        c2,
        criterion_03(tol),
        criterion_04(tol),
        criterion_05(tol),
        criterion_06(tol),
        criterion_07(tol),
        criterion_08(tol),
        criterion_09(tol),
        criterion_10(tol),
        criterion_11(tol),
        c12,
        criterion_13(tol),
    ]
}

fn check(id: &str, ok: bool) -> VerificationReport {
    VerificationReport::new(id).passing(ok)
}

/// Quick per-module invariant suites (the deep numerical gates live in the
/// acceptance set).
pub fn space_suite(_tol: &Tolerances) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let g8 = build_grid(1, &[(0.0, 7.0)], 1.0, MeasureMode::Counting).unwrap();
    out.push(check("space-grid-8pt", g8.len() == 8));
    out.push(check(
        "space-cayley-sizes",
        build_cayley_z2(1).unwrap().len() == 5 && build_cayley_z2(2).unwrap().len() == 13,
    ));
    let rep = doubling_constant(&g8, None);
    out.push(
        check("space-doubling-line", rep.constant == 3.0)
            .measure("constant", rep.constant),
    );
    let capped = doubling_constant(&g8, Some(1.1)).constant;
    out.push(check("space-doubling-cap-monotone", capped <= rep.constant));
    let line3 = build_grid(1, &[(0.0, 2.0)], 1.0, MeasureMode::Counting).unwrap();
    let balls = enumerate_balls(&line3, None);
    out.push(check("space-ball-census-line3", balls.len() == 6));
    let realized = balls
        .iter()
        .all(|b| line3.open_ball(b.center, b.radius) == b.members);
    out.push(check("space-ball-radii-realize-members", realized));
    out
}

pub fn weights_suite(_tol: &Tolerances) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let two = counting_line(2);
    let w13 = Weight::new(PointField::new(vec![1.0, 3.0])).unwrap();
    let rh = rh_constant(&two, &w13, 2.0, None).unwrap().constant;
    out.push(
        check("weights-rh-two-point", (rh - 5f64.sqrt() / 2.0).abs() < 1e-12)
            .measure("constant", rh),
    );
    let rhi = rh_infinity_constant(&two, &w13, None).unwrap().constant;
    out.push(check("weights-rh-infinity", (rhi - 1.5).abs() < 1e-12));
    let w14 = Weight::new(PointField::new(vec![1.0, 4.0])).unwrap();
    let ap = ap_constant(&two, &w14, 2.0, None).unwrap();
    out.push(check("weights-ap-two-point", (ap - 25.0 / 16.0).abs() < 1e-12));
    let grid = build_grid(1, &[(-1.0, 1.0)], 0.25, MeasureMode::CellVolume).unwrap();
    let w = make_weight(&WeightKind::Power { alpha: 0.25 }, &grid).unwrap();
    let mut prev = 0.0;
    let mut monotone = true;
    for q in [1.5, 2.0, 3.0] {
        let c = rh_constant(&grid, &w, q, None).unwrap().constant;
        if c < prev - 1e-9 || c < 1.0 - 1e-12 {
            monotone = false;
        }
        prev = c;
    }
    out.push(check("weights-rh-monotone-in-q", monotone));
    let scaled = rh_constant(&grid, &w.scale(7.5).unwrap(), 2.0, None).unwrap().constant;
    let base = rh_constant(&grid, &w, 2.0, None).unwrap().constant;
    out.push(check(
        "weights-rh-scaling-invariant",
        (scaled - base).abs() <= 1e-12 * base,
    ));
    out.push(check(
        "weights-power-law",
        rh_power_law_check(&grid, &w, 0.5, None).unwrap().pass,
    ));
    out
}

pub fn calculus_suite(_tol: &Tolerances) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let grid = build_grid(1, &[(0.0, 7.0)], 1.0, MeasureMode::Counting).unwrap();
    let x = PointField::new(grid.coords().unwrap().iter().map(|c| c[0]).collect());
    let gx = gradient(&grid, &x);
    out.push(check(
        "calculus-gradient-linear",
        gx.values().iter().all(|&v| (v - 1.0).abs() < 1e-12),
    ));
    let f = random_field(&grid, 2).map(f64::abs);
    let mf = maximal(&grid, &f, None);
    out.push(check(
        "calculus-maximal-dominates",
        (0..grid.len()).all(|i| mf[i] >= f[i]),
    ));
    let u = SobolevFunction::from_values(&grid, low_pass_field(&grid, 5, 2));
    let v = unit_weight(grid.len());
    out.push(check(
        "calculus-norm-positive",
        sobolev_norm(&grid, &v, &u, 2.0, true) > 0.0,
    ));
    let bank = standard_bank(&grid, 3, 2);
    let poincare = poincare_constant(&grid, 2.0, &bank, None).unwrap();
    out.push(
        check(
            "calculus-poincare-finite",
            poincare.constant.is_finite() && !poincare.violated,
        )
        .measure("constant", poincare.constant),
    );
    let fp = fp_constant(&grid, &v, 2.0, &bank, None).unwrap();
    out.push(
        check("calculus-fp-positive", fp.constant > 0.0 && fp.constant.is_finite())
            .measure("constant", fp.constant),
    );
    let full = enumerate_balls(&grid, None)
        .into_iter()
        .find(|b| b.members.len() == grid.len())
        .unwrap();
    let osc = SobolevFunction::from_values(&grid, crate::fields::oscillation(&grid));
    out.push(check(
        "calculus-fp-ball-ratio-defined",
        fp_ball_ratio(&grid, &v, 2.0, &osc, &full).is_some(),
    ));
    out
}

pub fn rearrange_suite(tol: &Tolerances) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let s = counting_line(3);
    let sf = decreasing_rearrangement(&s, &PointField::new(vec![3.0, 1.0, 2.0]));
    out.push(check(
        "rearrange-sorting",
        sf.plateau_values() == [3.0, 2.0, 1.0],
    ));
    out.push(check(
        "rearrange-double-star",
        (double_star(&sf, 2.0).unwrap() - 2.5).abs() < 1e-15,
    ));
    let plateau = StepFunction::from_pieces(vec![0.0, 1.0], vec![1.0]).unwrap();
    let h = holmstedt_k(&plateau, 1.0, 2.0, 0.5).unwrap();
    out.push(check(
        "rearrange-holmstedt",
        (h - (0.25 + 0.5 * 0.75f64.sqrt())).abs() < 1e-15,
    ));
    let hr = hardy_check(&plateau, 0.5).unwrap();
    out.push(check(
        "rearrange-hardy-equality",
        hr.pass && (hr.lhs - hr.rhs).abs() < 1e-12,
    ));
    let line = counting_line(30);
    let mut ok = true;
    for seed in 0..10u64 {
        let f = random_field(&line, seed);
        let rf = decreasing_rearrangement(&line, &f);
        let l1: f64 = f.values().iter().map(|v| v.abs()).sum();
        if (rf.total_integral() - l1).abs() > 1e-12 * tol.scale * l1.max(1.0) {
            ok = false;
        }
    }
    out.push(check("rearrange-equimeasurability", ok));
    out
}

pub fn czd_suite(_tol: &Tolerances) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let s = build_grid(1, &[(0.0, 9.0)], 1.0, MeasureMode::Counting).unwrap();
    let omega: Vec<usize> = (1..9).collect();
    let cover = crate::czd::whitney(&s, &omega).unwrap();
    out.push(check(
        "czd-whitney-invariants",
        check_whitney(&s, &omega, &cover).all(),
    ));
    let part = crate::czd::partition_of_unity(&s, &cover).unwrap();
    let sums_ok = omega.iter().all(|&x| {
        let sum: f64 = part.chi.iter().map(|c| c[x]).sum();
        (sum - 1.0).abs() < 1e-12
    });
    out.push(check("czd-partition-sums", sums_ok));
    let v = unit_weight(10);
    let u = SobolevFunction::from_values(&s, low_pass_field(&s, 5, 2));
    let params = CzParams { r: 1.0, s: 1.0, p: 1.5, q: 2.0, homogeneous: false };
    let d = cz_decompose(&s, &v, &u, params, 1e9, None).unwrap();
    out.push(check("czd-identity-at-high-alpha", d.pieces.is_empty()));
    let alpha = alpha_between_quantiles(&s, &v, &u, 1.0, 0.5);
    let d2 = cz_decompose(&s, &v, &u, params, alpha, None).unwrap();
    let ver = verify_cz(&s, &v, &d2);
    out.push(
        check("czd-verify-midrange", ver.pass)
            .measure("reconstruction_err", ver.reconstruction_err)
            .measure("n_overlap", ver.n_overlap as f64),
    );
    out
}

pub fn kfunc_suite(_tol: &Tolerances) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    let s = counting_line(2);
    let v = unit_weight(2);
    let u = SobolevFunction::from_values(&s, PointField::new(vec![2.0, 1.0]));
    let pair = SpacePair::Lebesgue { p0: 1.0, p1: f64::INFINITY };
    let k = k_exact(&s, &v, &u, &pair, 1.5).unwrap();
    out.push(check("kfunc-l1-linf-closed-form", (k.value - 2.5).abs() < 1e-12));
    let flat = SobolevFunction::with_gradient(
        PointField::new(vec![1.0, 1.0]),
        PointField::zeros(2),
    );
    let lower = k_lower_bound(&s, &v, &flat, 1.0, 2.0, 1.0, false).unwrap();
    out.push(check("kfunc-lower-bound-example", (lower - 4.0).abs() < 1e-12));
    let (lo, hi) = k_bounds_infty(&s, &v, &flat, 1.0, 1.0, 1.0, false).unwrap();
    out.push(check(
        "kfunc-infinity-characterization",
        (lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12,
    ));
    out.push(check(
        "kfunc-theta",
        (crate::kfunc::interpolation_theta(1.0, 4.0 / 3.0, 2.0) - 0.5).abs() < 1e-15,
    ));
    let s4 = counting_line(4);
    let v4 = Weight::new(positive_field(&s4, 8)).unwrap();
    let u4 = SobolevFunction::from_values(&s4, random_field(&s4, 4));
    let sp = SpacePair::Sobolev { r: 1.0, q: 2.0, homogeneous: false };
    let mut sandwich = true;
    for t in [0.1, 1.0, 10.0] {
        let e = k_exact(&s4, &v4, &u4, &sp, t).unwrap().value;
        let up = k_upper_via_cz(&s4, &v4, &u4, 1.0, 1.0, 2.0, t, None, false)
            .unwrap()
            .objective;
        if e > up * (1.0 + 1e-12) {
            sandwich = false;
        }
    }
    out.push(check("kfunc-feasibility-sandwich", sandwich));
    out
}

/// Run a named suite ("all" runs every module suite plus acceptance).
pub fn suite(name: &str, tol: &Tolerances) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    match name {
        "space" => out.extend(space_suite(tol)),
        "weights" => out.extend(weights_suite(tol)),
        "calculus" => out.extend(calculus_suite(tol)),
        "rearrange" => out.extend(rearrange_suite(tol)),
        "czd" => out.extend(czd_suite(tol)),
        "kfunc" => out.extend(kfunc_suite(tol)),
        "acceptance" => out.extend(acceptance_all(tol)),
        "all" => {
            out.extend(space_suite(tol));
            out.extend(weights_suite(tol));
            out.extend(calculus_suite(tol));
            out.extend(rearrange_suite(tol));
            out.extend(czd_suite(tol));
            out.extend(kfunc_suite(tol));
            out.extend(acceptance_all(tol));
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown suite '{other}' (expected all, space, weights, calculus, rearrange, czd, kfunc, acceptance)"
            )))
        }
    }
    Ok(out)
}
