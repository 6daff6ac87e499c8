//! Decreasing rearrangements and closed-form step-function transforms:
//! the maximal rearrangement `f**`, the two-space `L_p` K-formula, and the
//! Hardy inequality checker.
//!
//! Everything here is exact on the step structure; no quadrature.

use crate::error::{Error, Result};
use crate::space::{PointField, Space};

/// A right-continuous step function on the measure axis, zero beyond the
/// last breakpoint. Plateau `i` holds value `values[i]` on
/// `[breaks[i], breaks[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// General nonnegative step function (used by the Hardy checker).
    pub fn from_pieces(breaks: Vec<f64>, values: Vec<f64>) -> Result<StepFunction> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::Format(
                "step function needs one more breakpoint than plateau".into(),
            ));
        }
        if breaks.first().map_or(true, |&b| b < 0.0) {
            return Err(Error::Format("breakpoints must start at a nonnegative t".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Format("plateau values must be finite and nonnegative".into()));
        }
        Ok(StepFunction { breaks, values })
    }

    pub fn zero() -> StepFunction {
        StepFunction {
            breaks: vec![0.0, 1.0],
            values: vec![0.0],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn plateau_values(&self) -> &[f64] {
        &self.values
    }

    /// End of the support interval (total measure for rearrangements).
    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Right-continuous evaluation; zero outside `[breaks[0], end)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.breaks[0] || t >= self.end() {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&b| b <= t) - 1;
        self.values[i.min(self.values.len() - 1)]
    }

    /// Exact `int_a^b f(u)^e du` (`b` may be infinite; the function is zero
    /// beyond its support).
    pub fn integral_pow(&self, e: f64, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.values.len() {
            let lo = self.breaks[i].max(a);
            let hi = self.breaks[i + 1].min(b);
            if hi > lo && self.values[i] > 0.0 {
                acc += self.values[i].powf(e) * (hi - lo);
            }
        }
        acc
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.integral_pow(1.0, a, b)
    }

    pub fn total_integral(&self) -> f64 {
        self.integral(0.0, f64::INFINITY)
    }

    pub fn scale(&self, lambda: f64) -> StepFunction {
        StepFunction {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|&v| lambda * v).collect(),
        }
    }
}

/// Exact decreasing rearrangement of `|f|` on a finite measure space: sort
/// by `|f|` descending, plateau widths are the measures in that order, equal
/// values merged.
pub fn decreasing_rearrangement(space: &Space, field: &PointField) -> StepFunction {
    let mut pairs: Vec<(f64, f64)> = field
        .values()
        .iter()
        .zip(space.measures())
        .map(|(&v, &mu)| (v.abs(), mu))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    let mut acc = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        let mut width = 0.0;
        while i < pairs.len() && pairs[i].0 == v {
            width += pairs[i].1;
            i += 1;
        }
        acc += width;
        breaks.push(acc);
        values.push(v);
    }
    StepFunction { breaks, values }
}

/// Maximal rearrangement `f**(t) = (1/t) int_0^t f*(s) ds`, exact.
pub fn double_star(sf: &StepFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("f** needs t > 0, got {t}")));
    }
    Ok(sf.integral(0.0, t) / t)
}

/// Two-space `L_p` K-formula evaluated exactly on the step structure:
/// `(int_0^{t^a} (f*)^{p0})^{1/p0} + t (int_{t^a}^inf (f*)^{p1})^{1/p1}`
/// with `1/a = 1/p0 - 1/p1`.
pub fn holmstedt_k(sf: &StepFunction, p0: f64, p1: f64, t: f64) -> Result<f64> {
    if !(p0 > 0.0 && p1 > p0 && p1.is_finite()) {
        return Err(Error::Domain(format!(
            "holmstedt needs 0 < p0 < p1 < infinity, got p0={p0} p1={p1}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain("holmstedt needs t > 0".into()));
    }
    let alpha = 1.0 / (1.0 / p0 - 1.0 / p1);
    let cut = t.powf(alpha);
    let head = sf.integral_pow(p0, 0.0, cut).powf(1.0 / p0);
    let tail = t * sf.integral_pow(p1, cut, f64::INFINITY).powf(1.0 / p1);
    Ok(head + tail)
}

#[derive(Debug, Clone)]
pub struct HardyReport {
    pub lhs: f64,
    /// `(1/l) int_0^inf u^l g(u) du`.
    pub rhs: f64,
    pub l: f64,
    pub pass: bool,
}

impl std::fmt::Display for HardyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hardy l={}: lhs={:.12e} rhs={:.12e} {}",
            self.l,
            self.lhs,
            self.rhs,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Hardy inequality in closed form on a compactly supported step function:
/// `int_0^inf [int_t^inf g(u) du] t^(l-1) dt <= (1/l) int_0^inf u^l g(u) du`.
pub fn hardy_check(g: &StepFunction, l: f64) -> Result<HardyReport> {
    if !(l > 0.0 && l <= 1.0) {
        return Err(Error::Domain(format!("hardy exponent must lie in (0,1], got {l}")));
    }
    let m = g.plateau_values().len();
    // Suffix integrals G(b_i) = int_{b_i}^inf g.
    let mut suffix = vec![0.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] =
            suffix[i + 1] + g.plateau_values()[i] * (g.breaks()[i + 1] - g.breaks()[i]);
    }
    let mut lhs = 0.0;
    // Head interval [0, b_0): G is constant at the total integral.
    let b0 = g.breaks()[0];
    if b0 > 0.0 {
        lhs += suffix[0] * b0.powf(l) / l;
    }
    for i in 0..m {
        let (a, b) = (g.breaks()[i], g.breaks()[i + 1]);
        let v = g.plateau_values()[i];
        let g_b = suffix[i + 1];
        // On [a, b): G(t) = G(b) + v (b - t).
        lhs += (g_b + v * b) * (b.powf(l) - a.powf(l)) / l
            - v * (b.powf(l + 1.0) - a.powf(l + 1.0)) / (l + 1.0);
    }
    let mut rhs = 0.0;
    for i in 0..m {
        let (a, b) = (g.breaks()[i], g.breaks()[i + 1]);
        rhs += g.plateau_values()[i] * (b.powf(l + 1.0) - a.powf(l + 1.0)) / (l + 1.0);
    }
    rhs /= l;
    let pass = lhs <= rhs + 1e-12 * rhs.max(1.0);
    Ok(HardyReport { lhs, rhs, l, pass })
}

/// Measure of the strict super-level set `{ |f| > lambda }`.
pub fn measure_above(space: &Space, field: &PointField, lambda: f64) -> f64 {
    field
        .values()
        .iter()
        .zip(space.measures())
        .filter(|(&v, _)| v.abs() > lambda)
        .map(|(_, &mu)| mu)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::random_field;
    use crate::space::{build_grid, GradientMode, MeasureMode, Metric};

    fn step(breaks: Vec<f64>, values: Vec<f64>) -> StepFunction {
        StepFunction::from_pieces(breaks, values).unwrap()
    }

    #[test]
    fn rearrangement_examples() {
        let s = build_grid(1, &[(0.0, 2.0)], 1.0, MeasureMode::Counting).unwrap();
        let sf = decreasing_rearrangement(&s, &PointField::new(vec![3.0, 1.0, 2.0]));
        assert_eq!(sf.breaks(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(sf.plateau_values(), &[3.0, 2.0, 1.0]);

        let c = decreasing_rearrangement(&s, &PointField::constant(3, 2.0));
        assert_eq!(c.plateau_values(), &[2.0]);
        assert_eq!(c.end(), 3.0);

        let uneven = crate::space::Space::new(
            None,
            Metric::Matrix(vec![0.0, 1.0, 1.0, 0.0]),
            vec![0.5, 1.5],
            None,
            GradientMode::GraphUpper,
            None,
        )
        .unwrap();
        let tie = decreasing_rearrangement(&uneven, &PointField::new(vec![2.0, 2.0]));
        assert_eq!(tie.breaks(), &[0.0, 2.0]);
        assert_eq!(tie.plateau_values(), &[2.0]);
    }

    #[test]
    fn double_star_examples() {
        let flat = step(vec![0.0, 4.0], vec![2.5]);
        assert_eq!(double_star(&flat, 3.0).unwrap(), 2.5);

        let sf = step(vec![0.0, 1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]);
        assert_eq!(double_star(&sf, 2.0).unwrap(), 2.5);
        assert!((double_star(&sf, 10.0).unwrap() - 0.6).abs() < 1e-15);
        assert!(double_star(&sf, 0.0).is_err());
    }

    #[test]
    fn holmstedt_examples() {
        let zero = StepFunction::zero();
        assert_eq!(holmstedt_k(&zero, 1.0, 2.0, 1.0).unwrap(), 0.0);

        let plateau = step(vec![0.0, 1.0], vec![1.0]);
        assert!((holmstedt_k(&plateau, 1.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let v = holmstedt_k(&plateau, 1.0, 2.0, 0.5).unwrap();
        assert!((v - (0.25 + 0.5 * 0.75_f64.sqrt())).abs() < 1e-15);

        assert!(holmstedt_k(&plateau, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn holmstedt_positively_homogeneous() {
        let sf = step(vec![0.0, 0.5, 2.0, 3.5], vec![4.0, 1.5, 0.25]);
        for t in [0.01, 0.3, 1.0, 7.0] {
            let a = holmstedt_k(&sf.scale(3.5), 1.0, 2.0, t).unwrap();
            let b = 3.5 * holmstedt_k(&sf, 1.0, 2.0, t).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn hardy_examples() {
        let zero = StepFunction::zero();
        let rz = hardy_check(&zero, 1.0).unwrap();
        assert!(rz.pass && rz.lhs == 0.0 && rz.rhs == 0.0);

        let g = step(vec![0.0, 1.0], vec![1.0]);
        let r1 = hardy_check(&g, 1.0).unwrap();
        assert!(r1.pass);
        assert!((r1.lhs - 0.5).abs() < 1e-15);
        assert!((r1.rhs - 0.5).abs() < 1e-15);

        let rh = hardy_check(&g, 0.5).unwrap();
        assert!(rh.pass);
        assert!((rh.lhs - 4.0 / 3.0).abs() < 1e-12);
        assert!((rh.rhs - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn equimeasurability_and_distribution_bound() {
        let s = build_grid(2, &[(0.0, 1.0), (0.0, 1.0)], 0.2, MeasureMode::CellVolume).unwrap();
        for seed in 0..10u64 {
            let f = random_field(&s, seed);
            let sf = decreasing_rearrangement(&s, &f);
            let l1: f64 = f
                .values()
                .iter()
                .zip(s.measures())
                .map(|(&v, &mu)| v.abs() * mu)
                .sum();
            let total = sf.total_integral();
            assert!((total - l1).abs() <= 1e-12 * l1.max(1.0));
            for k in 1..=20 {
                let t = s.total_measure() * k as f64 / 20.0;
                let lam = sf.eval(t);
                assert!(measure_above(&s, &f, lam) <= t + 1e-12);
            }
        }
    }

    #[test]
    fn double_star_dominates_and_decreases() {
        let s = build_grid(1, &[(0.0, 15.0)], 1.0, MeasureMode::Counting).unwrap();
        let f = random_field(&s, 42);
        let sf = decreasing_rearrangement(&s, &f);
        let mut prev = f64::INFINITY;
        for k in 1..=40 {
            let t = 16.0 * k as f64 / 40.0;
            let ds = double_star(&sf, t).unwrap();
            assert!(ds >= sf.eval(t) - 1e-12);
            assert!(ds <= prev + 1e-12);
            prev = ds;
        }
    }

    /// `(Mf)* ~ f**`: the ratio stays in a band that is stable under grid
    /// refinement.
    #[test]
    fn maximal_rearrangement_comparable_to_double_star() {
        let mut bands: Vec<(f64, f64)> = Vec::new();
        for lev in 0..2 {
            let s = build_grid(
                1,
                &[(0.0, 1.0)],
                0.05 / 2f64.powi(lev),
                MeasureMode::CellVolume,
            )
            .unwrap();
            let mut lo = f64::INFINITY;
            let mut hi = 0.0_f64;
            for seed in 0..5u64 {
                let f = random_field(&s, seed);
                let mf = crate::calculus::maximal(&s, &f, None);
                let fstar = decreasing_rearrangement(&s, &f);
                let mstar = decreasing_rearrangement(&s, &mf);
                for k in 1..=20 {
                    let t = s.total_measure() * k as f64 / 21.0;
                    let ratio = mstar.eval(t) / double_star(&fstar, t).unwrap();
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
            assert!(lo > 0.0 && hi.is_finite());
            bands.push((lo, hi));
        }
        let (lo0, hi0) = bands[0];
        let (lo1, hi1) = bands[1];
        assert!(hi1 / hi0 < 2.0 && hi0 / hi1 < 2.0, "upper band unstable: {bands:?}");
        assert!(lo1 / lo0 < 2.0 && lo0 / lo1 < 2.0, "lower band unstable: {bands:?}");
    }

    #[test]
    fn double_star_subadditive() {
        let s = build_grid(1, &[(0.0, 23.0)], 1.0, MeasureMode::Counting).unwrap();
        for seed in 0..8u64 {
            let f = random_field(&s, seed);
            let g = random_field(&s, seed + 1000);
            let sum = PointField::new(
                f.values()
                    .iter()
                    .zip(g.values())
                    .map(|(&a, &b)| a + b)
                    .collect(),
            );
            let sf = decreasing_rearrangement(&s, &f);
            let sg = decreasing_rearrangement(&s, &g);
            let ss = decreasing_rearrangement(&s, &sum);
            for k in 1..=33 {
                let t = 24.0 * k as f64 / 33.0;
                let lhs = double_star(&ss, t).unwrap();
                let rhs = double_star(&sf, t).unwrap() + double_star(&sg, t).unwrap();
                assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
            }
        }
    }
}
