use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Reproducible randomness contract.
///
/// Every consumer asks for a stream by index, so parallel shards draw from
/// disjoint ChaCha8 streams and the output never depends on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
}

impl RngSpec {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        RngSpec { seed }
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }

    /// Generator for stream `stream` under this seed.
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// A child spec whose streams do not overlap the parent's stream `index`.
    pub fn derive(&self, index: u64) -> RngSpec {
        use rand::RngCore;
        RngSpec::new(self.stream(index).next_u64())
    }
}
