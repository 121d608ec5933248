use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Root of all randomness. Each subsystem draws from its own labelled
/// ChaCha stream, so consuming randomness in one place never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededRng {
    seed: u64,
}

impl SeededRng {
    pub const MECHANISM_STAGE: &'static str = "mechanism-stage";
    pub const DECOMPOSITION_SAMPLE: &'static str = "decomposition-sample";
    pub const INSTANCE_GEN: &'static str = "instance-gen";

    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, label: &str) -> ChaCha12Rng {
        self.indexed_stream(label, 0)
    }

    /// Stream keyed by label and an index (e.g. one per audit deviation).
    pub fn indexed_stream(&self, label: &str, index: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(label.as_bytes()) ^ splitmix(index));
        rng
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
