use rand::distr::{Distribution, Open01};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How the driving uniforms `u_j` are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    /// Midpoints `u_j = (j − 1/2)/n`.
    #[default]
    Stratified,
    /// Independent pseudo-random draws.
    Iid,
}

impl Grid {
    pub(crate) fn midpoint(j: usize, n: usize) -> f64 {
        (j as f64 + 0.5) / n as f64
    }
}

/// Counter-based random stream: row `j` of stream `s` always sees the same
/// words regardless of which rows were generated before, so batches can be
/// split across workers without changing results.
#[derive(Clone)]
pub(crate) struct RowStream {
    base: ChaCha8Rng,
    words_per_row: u128,
}

impl RowStream {
    pub(crate) fn new(seed: u64, stream: u64, draws_per_row: usize) -> Self {
        let mut base = ChaCha8Rng::seed_from_u64(seed);
        base.set_stream(stream);
        RowStream {
            base,
            words_per_row: 2 * draws_per_row as u128,
        }
    }

    pub(crate) fn row(&self, j: usize) -> RowRng {
        let mut rng = self.base.clone();
        rng.set_word_pos(j as u128 * self.words_per_row);
        RowRng(rng)
    }
}

pub(crate) struct RowRng(ChaCha8Rng);

impl RowRng {
    /// Uniform on the open interval (0, 1).
    pub(crate) fn open01(&mut self) -> f64 {
        Open01.sample(&mut self.0)
    }

    pub(crate) fn coin(&mut self) -> bool {
        self.0.next_u64() >> 63 == 1
    }
}

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
