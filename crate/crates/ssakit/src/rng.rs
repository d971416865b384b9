//! Deterministic random streams.
//!
//! Every stochastic component draws from an explicitly seeded [`RngStream`]
//! so that a run is reproducible from its seed alone. The generator is
//! xoshiro256++ seeded through splitmix64 (both public domain); it is fast
//! enough that the sampler never dominates an event loop, and carrying our
//! own 30-line implementation keeps the draw sequence stable regardless of
//! dependency versions.
//!
//! Exponential variates use the inverse transform u ↦ −ln(1−u)/rate, one
//! uniform draw per variate.

/// 2⁻⁵³, scales the top 53 bits of a `u64` into [0, 1).
const U64_TO_F64: f64 = 1.0 / 9007199254740992.0;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seedable, clonable random stream with draw accounting.
#[derive(Clone, Debug)]
pub struct RngStream {
    s: [u64; 4],
    uniform_draws: u64,
    exp_draws: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        debug_assert!(s.iter().any(|&w| w != 0));
        RngStream {
            s,
            uniform_draws: 0,
            exp_draws: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on [0, 1), 53-bit resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.uniform_draws += 1;
        ((self.next_u64() >> 11) as f64) * U64_TO_F64
    }

    /// Uniform on (0, 1); redraws the (probability 2⁻⁵³) exact zero.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform on {0, 1, …, k−1}, unbiased (Lemire rejection).
    #[inline]
    pub fn uniform_int(&mut self, k: usize) -> usize {
        debug_assert!(k >= 1);
        let k = k as u64;
        let mut m = (self.next_u64() as u128) * (k as u128);
        let mut low = m as u64;
        if low < k {
            let threshold = k.wrapping_neg() % k;
            while low < threshold {
                m = (self.next_u64() as u128) * (k as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// Exponential variate with the given rate, strictly positive.
    ///
    /// Inverse transform: −ln(1−u)/rate with u uniform on (0, 1).
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        assert!(
            rate > 0.0 && rate.is_finite(),
            "exponential rate must be positive and finite, got {rate}"
        );
        self.exp_draws += 1;
        let u = self.uniform_open();
        -(-u).ln_1p() / rate
    }

    /// Number of `uniform`/`uniform_open` draws so far (exponentials included).
    pub fn uniform_draws(&self) -> u64 {
        self.uniform_draws
    }

    /// Number of exponential variates drawn so far.
    pub fn exp_draws(&self) -> u64 {
        self.exp_draws
    }
}
