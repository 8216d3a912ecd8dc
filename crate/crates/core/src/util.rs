//! Small internal helpers shared across modules.

/// Deterministic 64-bit mixer (splitmix64). Used wherever the crate needs
/// reproducible pseudo-random streams without pulling in an RNG dependency:
/// fixture synthesis and the oracle's probe sampling. The exact output
/// sequence is part of the fixture contract, so this must never change.
#[derive(Debug, Clone)]
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform f64 in [0, 1).
    pub(crate) fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    pub(crate) fn next_below(&mut self, bound: u64) -> u64 {
        // Multiply-shift; bias is < 2^-32 for the small bounds used here.
        ((self.next_u64() >> 32).wrapping_mul(bound)) >> 32
    }

    /// Uniform f64 in [lo, hi).
    pub(crate) fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
