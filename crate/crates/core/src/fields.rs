//! Seeded field generators and the standard test bank.
//!
//! Randomness comes from a splitmix64 stream so every run is reproducible
//! bit for bit from its seed, independent of platform or crate versions.

use crate::calculus::{gradient, SobolevFunction};
use crate::space::{GradientMode, PointField, Space};

/// Deterministic 64-bit generator (splitmix64).
#[derive(Debug, Clone)]
pub struct SeededRng {
    state: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Uniform random field with values in [-1, 1).
pub fn random_field(space: &Space, seed: u64) -> PointField {
    let mut rng = SeededRng::new(seed);
    PointField::new((0..space.len()).map(|_| rng.range(-1.0, 1.0)).collect())
}

/// Random field smoothed by a few neighbor-averaging passes; the discrete
/// stand-in for a band-limited sample.
pub fn low_pass_field(space: &Space, seed: u64, passes: usize) -> PointField {
    let mut values = random_field(space, seed).into_values();
    let n = space.len();
    for _ in 0..passes {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let nbrs = space.neighbors(i);
            let mut acc = values[i];
            let mut cnt = 1.0;
            for &j in &nbrs {
                acc += values[j];
                cnt += 1.0;
            }
            next[i] = acc / cnt;
        }
        values = next;
    }
    PointField::new(values)
}

/// Strictly positive random field, bounded away from zero.
pub fn positive_field(space: &Space, seed: u64) -> PointField {
    let mut rng = SeededRng::new(seed);
    PointField::new((0..space.len()).map(|_| rng.range(0.2, 2.0)).collect())
}

/// The standard test bank: coordinate functions, their product in 2-D, a
/// parity oscillation and a few seeded low-pass fields. Gradients are the
/// space's own discrete gradients.
pub fn standard_bank(space: &Space, seed: u64, n_random: usize) -> Vec<SobolevFunction> {
    let mut bank: Vec<PointField> = Vec::new();
    if let Some(coords) = space.coords() {
        let dim = coords.first().map(|c| c.len()).unwrap_or(0);
        for a in 0..dim {
            bank.push(PointField::new(coords.iter().map(|c| c[a]).collect()));
        }
        if dim == 2 {
            bank.push(PointField::new(coords.iter().map(|c| c[0] * c[1]).collect()));
        }
    }
    bank.push(oscillation(space));
    for k in 0..n_random {
        bank.push(low_pass_field(space, seed.wrapping_add(k as u64), 3));
    }
    bank.into_iter()
        .map(|values| {
            let g = gradient(space, &values);
            SobolevFunction::with_gradient(values, g)
        })
        .collect()
}

/// Rank-one oscillation. Graph-mode spaces alternate the sign of the point
/// id. Grid-mode spaces use a half-frequency square wave (sign flips every
/// two cells per axis): the plain checkerboard is a null mode of central
/// differencing, while this wave keeps a nonzero discrete gradient at every
/// interior point.
pub fn oscillation(space: &Space) -> PointField {
    match (space.grid_info(), space.gradient_mode()) {
        (Some(info), GradientMode::GridCentral) => {
            let coords = space.coords().unwrap();
            let h = info.spacing;
            let wave = |x: f64, lo: f64| -> f64 {
                let k = ((x - lo) / h).round() as i64;
                if (k.div_euclid(2)).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            PointField::new(
                coords
                    .iter()
                    .map(|c| {
                        c.iter()
                            .zip(info.extents.iter())
                            .map(|(&x, &(lo, _))| wave(x, lo))
                            .product()
                    })
                    .collect(),
            )
        }
        _ => PointField::new(
            (0..space.len())
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        ),
    }
}
