//! Counter-based SplitMix64 generator used for every planted instance.
//!
//! Output `k` (1-based) of a stream with seed `s` is
//! `mix(s + k · 0x9E3779B97F4A7C15)` with the SplitMix64 finalizer, so any
//! position of the stream can be computed independently. Derived draws:
//!
//! * uniform on `[0, 1)`: top 53 bits of one output times `2⁻⁵³`;
//! * standard normal: Box–Muller on two uniforms `u1, u2`, with
//!   `r = sqrt(−2 ln(1 − u1))`; the first call returns `r·cos(2πu2)`, the
//!   next call returns the cached `r·sin(2πu2)`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Deterministic child seed for position `(a, b)` under `base`.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(base ^ mix64(a.wrapping_add(GOLDEN_GAMMA))).wrapping_add(b.wrapping_mul(GOLDEN_GAMMA)))
}
