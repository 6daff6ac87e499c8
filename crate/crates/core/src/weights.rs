//! Weight generators and reverse-Hölder / Muckenhoupt constant auditing.

use crate::calculus::maximal;
use crate::error::{Error, Result};
use crate::space::{scan_ball_sums, PointField, Space};

/// A nonnegative weight sampled on the points of a space.
#[derive(Debug, Clone)]
pub struct Weight {
    values: PointField,
}

impl Weight {
    /// A weight only needs to be finite and nonnegative; the identically
    /// zero weight is a legitimate Sobolev-norm multiplier. The reverse
    /// Hölder and A_p audits reject it separately.
    pub fn new(values: PointField) -> Result<Weight> {
        if values.values().iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Domain(
                "weight values must be finite and nonnegative".into(),
            ));
        }
        Ok(Weight { values })
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().iter().all(|&v| v == 0.0)
    }

    pub fn values(&self) -> &[f64] {
        self.values.values()
    }

    pub fn field(&self) -> &PointField {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise power `w^r`.
    pub fn pow(&self, r: f64) -> Result<Weight> {
        Weight::new(self.values.map(|v| v.powf(r)))
    }

    pub fn scale(&self, lambda: f64) -> Result<Weight> {
        Weight::new(self.values.scale(lambda))
    }
}

/// Weight generators, kept symbolic so grid refinements can resample them.
#[derive(Debug, Clone)]
pub enum WeightKind {
    /// `|x|^(-alpha)`; the singular point takes the value at distance
    /// `spacing / 2`.
    Power { alpha: f64 },
    /// Polynomial in `|x|`: `sum_k coeffs[k] * |x|^k`.
    Polynomial { coeffs: Vec<f64> },
    /// `(Mf)^(1/s)` for a supplied field `f`.
    Maximal { field: Vec<f64>, s: f64 },
    Explicit { values: Vec<f64> },
}

/// Sample a weight on a space.
pub fn make_weight(kind: &WeightKind, space: &Space) -> Result<Weight> {
    match kind {
        WeightKind::Power { alpha } => {
            let coords = space.coords().ok_or_else(|| {
                Error::Unsupported("power weights need point coordinates".into())
            })?;
            let h = half_spacing(space);
            let values: Vec<f64> = coords
                .iter()
                .map(|c| {
                    let r = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let r = if *alpha > 0.0 && r == 0.0 { h } else { r };
                    r.powf(-alpha)
                })
                .collect();
            Weight::new(PointField::new(values))
        }
        WeightKind::Polynomial { coeffs } => {
            let coords = space.coords().ok_or_else(|| {
                Error::Unsupported("polynomial weights need point coordinates".into())
            })?;
            let values: Vec<f64> = coords
                .iter()
                .map(|c| {
                    let r = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                    coeffs.iter().rev().fold(0.0, |acc, &ck| acc * r + ck)
                })
                .collect();
            Weight::new(PointField::new(values))
        }
        WeightKind::Maximal { field, s } => {
            if *s == 0.0 {
                return Err(Error::Domain("maximal-weight exponent must be nonzero".into()));
            }
            if field.len() != space.len() {
                return Err(Error::Domain("maximal-weight field has wrong length".into()));
            }
            let mf = maximal(space, &PointField::new(field.clone()), None);
            Weight::new(mf.map(|v| v.powf(1.0 / s)))
        }
        WeightKind::Explicit { values } => {
            if values.len() != space.len() {
                return Err(Error::Domain("explicit weight has wrong length".into()));
            }
            Weight::new(PointField::new(values.clone()))
        }
    }
}

/// Half the resolution scale: grid spacing / 2 when known, otherwise half
/// the smallest positive pairwise distance.
fn half_spacing(space: &Space) -> f64 {
    if let Some(info) = space.grid_info() {
        return info.spacing / 2.0;
    }
    let n = space.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in 0..i {
            let d = space.distance(i, j);
            if d > 0.0 {
                best = best.min(d);
            }
        }
    }
    if best.is_finite() {
        best / 2.0
    } else {
        0.5
    }
}

#[derive(Debug, Clone)]
pub struct RhReport {
    pub constant: f64,
    pub center: usize,
    pub radius: f64,
}

impl std::fmt::Display for RhReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "constant = {:.12e} attained at center {} radius {:.12e}",
            self.constant, self.center, self.radius
        )
    }
}

/// Reverse-Hölder constant at exponent `q`: the largest value of
/// `(avg_B w^q)^(1/q) / avg_B w` over enumerated balls. Balls on which the
/// weight vanishes identically report an infinite constant.
pub fn rh_constant(space: &Space, w: &Weight, q: f64, radius_cap: Option<f64>) -> Result<RhReport> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("reverse-Hölder exponent must exceed 1, got {q}")));
    }
    if w.is_zero() {
        return Err(Error::Domain("reverse-Hölder audit needs a nonzero weight".into()));
    }
    let wq: Vec<f64> = w.values().iter().map(|&v| v.powf(q)).collect();
    let mut best = RhReport {
        constant: 0.0,
        center: 0,
        radius: 0.0,
    };
    scan_ball_sums(space, radius_cap, &[w.values(), &wq], |ball, rep, sums| {
        let avg_w = sums[0] / ball.mass;
        let avg_wq = sums[1] / ball.mass;
        let ratio = if avg_w == 0.0 {
            f64::INFINITY
        } else {
            avg_wq.powf(1.0 / q) / avg_w
        };
        if ratio > best.constant {
            best = RhReport {
                constant: ratio,
                center: ball.center as usize,
                radius: rep,
            };
        }
    });
    Ok(best)
}

/// RH-infinity constant: the largest value of `w(x) / avg_B w` over balls
/// and their member points. A ball on which the weight vanishes identically
/// reports an infinite constant, matching [`rh_constant`] (the inclusion
/// chain needs the two failure modes to agree).
pub fn rh_infinity_constant(
    space: &Space,
    w: &Weight,
    radius_cap: Option<f64>,
) -> Result<RhReport> {
    if w.is_zero() {
        return Err(Error::Domain("reverse-Hölder audit needs a nonzero weight".into()));
    }
    let capv = radius_cap.unwrap_or(f64::INFINITY);
    let fam = space.ball_family();
    let orders = space.orders();
    let mut best = RhReport {
        constant: 0.0,
        center: 0,
        radius: 0.0,
    };
    let mut cur_center = u32::MAX;
    let mut prefix_sum: Vec<f64> = Vec::new();
    let mut prefix_max: Vec<f64> = Vec::new();
    for b in &fam.balls {
        if !b.passes_cap(capv) {
            continue;
        }
        if b.center != cur_center {
            cur_center = b.center;
            let ord = &orders[b.center as usize];
            prefix_sum.clear();
            prefix_max.clear();
            prefix_sum.push(0.0);
            prefix_max.push(0.0);
            let (mut acc, mut mx) = (0.0_f64, 0.0_f64);
            for &id in &ord.ids {
                acc += w.values()[id as usize] * space.measure(id as usize);
                mx = mx.max(w.values()[id as usize]);
                prefix_sum.push(acc);
                prefix_max.push(mx);
            }
        }
        let avg = prefix_sum[b.cut as usize] / b.mass;
        let top = prefix_max[b.cut as usize];
        let ratio = if avg == 0.0 { f64::INFINITY } else { top / avg };
        if ratio > best.constant {
            best = RhReport {
                constant: ratio,
                center: b.center as usize,
                radius: b.rep_radius(capv),
            };
        }
    }
    Ok(best)
}

/// Muckenhoupt A_p constant: the largest value of
/// `(avg_B w) * (avg_B w^(-1/(p-1)))^(p-1)` over enumerated balls.
pub fn ap_constant(space: &Space, w: &Weight, p: f64, radius_cap: Option<f64>) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("A_p exponent must exceed 1, got {p}")));
    }
    if w.values().iter().any(|&v| v == 0.0) {
        return Err(Error::Domain(
            "A_p auditing needs a strictly positive weight".into(),
        ));
    }
    let winv: Vec<f64> = w.values().iter().map(|&v| v.powf(-1.0 / (p - 1.0))).collect();
    let mut best = 0.0_f64;
    scan_ball_sums(space, radius_cap, &[w.values(), &winv], |ball, _rep, sums| {
        let avg_w = sums[0] / ball.mass;
        let avg_inv = sums[1] / ball.mass;
        best = best.max(avg_w * avg_inv.powf(p - 1.0));
    });
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct PowerLawReport {
    pub r: f64,
    pub q: f64,
    pub rh: RhReport,
    pub pass: bool,
}

/// Check that `w^r` lands in RH at exponent `1/r` with a finite constant.
pub fn rh_power_law_check(
    space: &Space,
    w: &Weight,
    r: f64,
    radius_cap: Option<f64>,
) -> Result<PowerLawReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("power-law exponent must lie in (0,1), got {r}")));
    }
    let wr = w.pow(r)?;
    let q = 1.0 / r;
    let rh = rh_constant(space, &wr, q, radius_cap)?;
    let pass = rh.constant.is_finite();
    Ok(PowerLawReport { r, q, rh, pass })
}

#[derive(Debug, Clone)]
pub struct QScan {
    pub q: f64,
    pub constants: Vec<f64>,
    pub in_class: bool,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub entries: Vec<QScan>,
    /// Largest in-class exponent, if any.
    pub q0: Option<f64>,
    /// Relative variation threshold between the two finest levels.
    pub stability_window: f64,
}

impl std::fmt::Display for ScanReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.entries {
            write!(f, "q = {:.6}: [", e.q)?;
            for (i, c) in e.constants.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.6e}", c)?;
            }
            writeln!(f, "] -> {}", if e.in_class { "in class" } else { "diverging" })?;
        }
        match self.q0 {
            Some(q0) => writeln!(f, "q0 estimate = {q0:.6}"),
            None => writeln!(f, "q0 estimate = none (no exponent stable)"),
        }
    }
}

/// Refinement study of the RH constant across dyadic grid refinements.
/// An exponent is flagged in-class when the constants at the two finest
/// levels differ by less than 25 percent.
pub fn rh_exponent_scan(
    space: &Space,
    kind: &WeightKind,
    q_grid: &[f64],
    radius_cap: Option<f64>,
    refinement_levels: usize,
) -> Result<ScanReport> {
    if space.grid_info().is_none() {
        return Err(Error::Unsupported(
            "exponent scan needs a refinable grid space".into(),
        ));
    }
    if matches!(kind, WeightKind::Explicit { .. } | WeightKind::Maximal { .. }) {
        return Err(Error::Unsupported(
            "exponent scan needs a resampleable weight kind (power or polynomial)".into(),
        ));
    }
    if refinement_levels < 2 {
        return Err(Error::Domain("at least two refinement levels required".into()));
    }
    let mut spaces = vec![space.clone()];
    for _ in 1..refinement_levels {
        spaces.push(spaces.last().unwrap().refine()?);
    }
    let window = 0.25;
    let mut entries = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let mut constants = Vec::with_capacity(spaces.len());
        for s in &spaces {
            let w = make_weight(kind, s)?;
            constants.push(rh_constant(s, &w, q, radius_cap)?.constant);
        }
        let last = constants[constants.len() - 1];
        let prev = constants[constants.len() - 2];
        let in_class = last.is_finite() && prev.is_finite() && (last / prev - 1.0).abs() < window;
        entries.push(QScan {
            q,
            constants,
            in_class,
        });
    }
    let q0 = entries
        .iter()
        .filter(|e| e.in_class)
        .map(|e| e.q)
        .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |a| a.max(q))));
    Ok(ScanReport {
        entries,
        q0,
        stability_window: window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_grid, enumerate_balls, GradientMode, MeasureMode, Metric};

    fn two_point() -> Space {
        Space::new(
            None,
            Metric::Matrix(vec![0.0, 1.0, 1.0, 0.0]),
            vec![1.0, 1.0],
            None,
            GradientMode::GraphUpper,
            None,
        )
        .unwrap()
    }

    fn weight(v: Vec<f64>) -> Weight {
        Weight::new(PointField::new(v)).unwrap()
    }

    /// Direct oracle evaluating the defining ratio over the enumerated
    /// family, independent of the prefix-sum scan.
    fn oracle_rh(space: &Space, w: &Weight, q: f64, cap: Option<f64>) -> f64 {
        let mut best: f64 = 0.0;
        for b in enumerate_balls(space, cap) {
            let (mut sw, mut swq, mut m) = (0.0, 0.0, 0.0);
            for &i in &b.members {
                sw += w.values()[i] * space.measure(i);
                swq += w.values()[i].powf(q) * space.measure(i);
                m += space.measure(i);
            }
            let avg = sw / m;
            let r = if avg == 0.0 { f64::INFINITY } else { (swq / m).powf(1.0 / q) / avg };
            best = best.max(r);
        }
        best
    }

    #[test]
    fn constant_weight_has_unit_constants() {
        let s = build_grid(1, &[(0.0, 4.0)], 1.0, MeasureMode::Counting).unwrap();
        let w = weight(vec![3.0; 5]);
        for q in [1.5, 2.0, 4.0] {
            let c = rh_constant(&s, &w, q, None).unwrap().constant;
            assert!((c - 1.0).abs() < 1e-12, "q={q} gave {c}");
        }
        assert!((rh_infinity_constant(&s, &w, None).unwrap().constant - 1.0).abs() < 1e-12);
        assert!((ap_constant(&s, &w, 2.0, None).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rh_two_point_example() {
        let s = two_point();
        let w = weight(vec![1.0, 3.0]);
        let rep = rh_constant(&s, &w, 2.0, None).unwrap();
        assert!((rep.constant - 5.0_f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(rep.constant, oracle_rh(&s, &w, 2.0, None));
    }

    #[test]
    fn rh_infinity_two_point_example() {
        let s = two_point();
        let w = weight(vec![1.0, 3.0]);
        let rep = rh_infinity_constant(&s, &w, None).unwrap();
        assert!((rep.constant - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ap_two_point_example() {
        let s = two_point();
        let w = weight(vec![1.0, 4.0]);
        let c = ap_constant(&s, &w, 2.0, None).unwrap();
        assert!((c - 25.0 / 16.0).abs() < 1e-12);
        assert!(ap_constant(&s, &weight(vec![0.0, 1.0]), 2.0, None).is_err());
    }

    #[test]
    fn ap_diverges_as_weight_degenerates() {
        let s = two_point();
        let mut eps = 0.5;
        let mut prev = 0.0;
        for _ in 0..6 {
            let c = ap_constant(&s, &weight(vec![1.0, eps]), 2.0, None).unwrap();
            assert!(c > prev, "A_p constant should grow as eps halves");
            prev = c;
            eps /= 2.0;
        }
    }

    #[test]
    fn power_law_two_point_example() {
        let s = two_point();
        let w = weight(vec![1.0, 3.0]);
        let rep = rh_power_law_check(&s, &w, 0.5, None).unwrap();
        assert!(rep.pass);
        let expected = 2.0_f64.sqrt() / ((1.0 + 3.0_f64.sqrt()) / 2.0);
        assert!((rep.rh.constant - expected).abs() < 1e-12);

        let one = weight(vec![1.0, 1.0]);
        let rep1 = rh_power_law_check(&s, &one, 0.5, None).unwrap();
        assert!((rep1.rh.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rh_constant_nondecreasing_in_q_and_at_least_one() {
        let s = build_grid(1, &[(-1.0, 1.0)], 0.25, MeasureMode::CellVolume).unwrap();
        for kind in [
            WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] },
            WeightKind::Power { alpha: 0.25 },
        ] {
            let w = make_weight(&kind, &s).unwrap();
            let mut prev = 0.0;
            for q in [1.2, 1.5, 2.0, 3.0, 5.0] {
                let c = rh_constant(&s, &w, q, None).unwrap().constant;
                assert!(c >= 1.0 - 1e-12);
                assert!(c >= prev - 1e-9, "RH constant decreased in q");
                prev = c;
            }
            let cinf = rh_infinity_constant(&s, &w, None).unwrap().constant;
            assert!(cinf.is_finite());
            assert!(cinf >= prev - 1e-9);
        }
    }

    #[test]
    fn rh_infinity_polynomial_refinement_stable() {
        let base = build_grid(1, &[(-1.0, 1.0)], 0.25, MeasureMode::CellVolume).unwrap();
        let fine = base.refine().unwrap();
        let kind = WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] };
        let c0 = rh_infinity_constant(&base, &make_weight(&kind, &base).unwrap(), None)
            .unwrap()
            .constant;
        let c1 = rh_infinity_constant(&fine, &make_weight(&kind, &fine).unwrap(), None)
            .unwrap()
            .constant;
        assert!(c0.is_finite() && c1.is_finite());
        assert!((c1 / c0 - 1.0).abs() < 0.25, "c0={c0} c1={c1}");
    }

    #[test]
    fn rh_scaling_invariance() {
        let s = build_grid(1, &[(-1.0, 1.0)], 0.5, MeasureMode::Counting).unwrap();
        let w = make_weight(&WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] }, &s).unwrap();
        let w5 = w.scale(5.0).unwrap();
        let a = rh_constant(&s, &w, 2.0, None).unwrap().constant;
        let b = rh_constant(&s, &w5, 2.0, None).unwrap().constant;
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn power_law_passes_for_finite_ap_weights() {
        let s = build_grid(1, &[(-1.0, 1.0)], 0.25, MeasureMode::CellVolume).unwrap();
        for kind in [
            WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] },
            WeightKind::Power { alpha: 0.25 },
        ] {
            let w = make_weight(&kind, &s).unwrap();
            assert!(ap_constant(&s, &w, 2.0, None).unwrap().is_finite());
            for r in [0.25, 0.5, 0.75] {
                assert!(rh_power_law_check(&s, &w, r, None).unwrap().pass);
            }
        }
    }

    #[test]
    fn make_weight_examples() {
        let s = build_grid(1, &[(-1.0, 1.0)], 1.0, MeasureMode::Counting).unwrap();
        let poly = make_weight(&WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] }, &s).unwrap();
        assert_eq!(poly.values(), &[2.0, 1.0, 2.0]);

        let maximal = make_weight(
            &WeightKind::Maximal { field: vec![0.0, 0.0, 3.0], s: 1.0 },
            &s,
        )
        .unwrap();
        assert_eq!(maximal.values(), &[1.0, 1.5, 3.0]);

        let flat = make_weight(&WeightKind::Power { alpha: 0.0 }, &s).unwrap();
        assert_eq!(flat.values(), &[1.0, 1.0, 1.0]);

        // Singular point takes the half-spacing value.
        let pw = make_weight(&WeightKind::Power { alpha: 0.25 }, &s).unwrap();
        assert!((pw.values()[1] - 0.5_f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn exponent_scan_constant_weight() {
        let s = build_grid(1, &[(-1.0, 1.0)], 0.5, MeasureMode::CellVolume).unwrap();
        let rep = rh_exponent_scan(
            &s,
            &WeightKind::Polynomial { coeffs: vec![1.0] },
            &[1.5, 2.0, 3.0],
            None,
            3,
        )
        .unwrap();
        assert!(rep.entries.iter().all(|e| e.in_class));
        assert_eq!(rep.q0, Some(3.0));
    }

    #[test]
    fn exponent_scan_rejects_non_refinable() {
        let s = two_point();
        assert!(matches!(
            rh_exponent_scan(&s, &WeightKind::Power { alpha: 0.5 }, &[2.0], None, 3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_average_ball_reports_infinite_constant() {
        let s = build_grid(1, &[(0.0, 3.0)], 1.0, MeasureMode::Counting).unwrap();
        let w = weight(vec![0.0, 0.0, 1.0, 1.0]);
        let rep = rh_constant(&s, &w, 2.0, None).unwrap();
        assert!(rep.constant.is_infinite());
        let inf = rh_infinity_constant(&s, &w, None).unwrap();
        assert!(inf.constant.is_infinite());
    }
}
