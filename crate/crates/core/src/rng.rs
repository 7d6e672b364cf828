//! Deterministic random streams. Every consumer of randomness derives its
//! own generator from the master seed and a structured stream key, so the
//! draws do not depend on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Named substreams of a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Init,
    /// Monte Carlo pool of component `component` at EM iteration `iter`.
    Pool { iter: usize, component: usize },
    /// Exponential divisors of CM-step repeat `repeat`.
    CmStep { iter: usize, component: usize, repeat: usize },
    /// Slice sampler for observation `obs` in CM-step repeat `repeat`.
    Slice { iter: usize, component: usize, repeat: usize, obs: usize },
    /// Monte Carlo pools used when classifying with a fixed model.
    Classify { component: usize },
    Simulate,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_0F55_A1E5_u64, |h, &p| splitmix64(h ^ p))
}

impl Stream {
    fn key(self) -> [u64; 5] {
        let u = |x: usize| x as u64;
        match self {
            Stream::Init => [1, 0, 0, 0, 0],
            Stream::Pool { iter, component } => [2, u(iter), u(component), 0, 0],
            Stream::CmStep { iter, component, repeat } => [3, u(iter), u(component), u(repeat), 0],
            Stream::Slice { iter, component, repeat, obs } => {
                [4, u(iter), u(component), u(repeat), u(obs)]
            }
            Stream::Classify { component } => [5, u(component), 0, 0, 0],
            Stream::Simulate => [6, 0, 0, 0, 0],
        }
    }
}

/// Generator for `stream` under `master`.
pub fn substream(master: u64, stream: Stream) -> StreamRng {
    let k = stream.key();
    ChaCha8Rng::seed_from_u64(mix(&[master, k[0], k[1], k[2], k[3], k[4]]))
}

/// Plain seeded generator.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
