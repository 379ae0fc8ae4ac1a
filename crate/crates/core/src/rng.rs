//! Deterministic, splittable random streams.
//!
//! Every stochastic step in the engine draws from its own `RandomStream`
//! derived from `(seed, purpose, generation, slot)`, so results never depend
//! on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An independent, reproducible draw sequence. Identical `(seed, stream_id)`
/// always yield the identical sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiate the generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Stream purposes, kept disjoint in the id's top byte.
#[derive(Debug, Clone, Copy)]
pub enum StreamPurpose {
    /// Initial random population.
    Init,
    /// One mating event (operator choice, parent choice, operator draws).
    Mating,
    /// Multiplicative fitness noise for one individual.
    Noise,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Init => 1,
            StreamPurpose::Mating => 2,
            StreamPurpose::Noise => 3,
        }
    }
}

/// Derive the stream for a `(purpose, generation, slot)` triple.
pub fn stream_for(seed: u64, purpose: StreamPurpose, generation: u32, slot: u32) -> RandomStream {
    let id = (purpose.tag() << 56) | ((generation as u64) << 28) | slot as u64;
    RandomStream::new(seed, id)
}
