//! Concrete instances: sparse portfolio selection and sparse dictionary
//! learning, their generators and the JSON instance format.

mod dictionary;
mod io;
mod portfolio;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dictionary::{
    dictionary_problem, gen_dictionary, DictionaryInstance, DictionaryObjective,
};
pub use io::{
    instance_hash, load_instance, save_instance, Instance, InstanceError, FORMAT_VERSION,
};
pub use portfolio::{gen_portfolio, portfolio_problem, PortfolioInstance, PortfolioObjective};

/// Name recorded in instance files for the generator used by `gen_*`.
pub const RNG_NAME: &str = "chacha8";

/// Generator identity stored alongside generated data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngInfo {
    pub name: String,
    pub seed: u64,
}

impl RngInfo {
    pub(crate) fn chacha(seed: u64) -> Self {
        Self {
            name: RNG_NAME.to_string(),
            seed,
        }
    }
}

/// `ChaCha8Rng::seed_from_u64(seed)`; all draws are consumed in row-major
/// order of the matrix being filled.
pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
