pub mod capped;
pub mod descriptor;
pub mod free;
pub mod integer;
pub mod pairs;

pub use capped::RankCapped;
pub use descriptor::{InstanceSpec, ParseError};
pub use free::FreeModules;
pub use integer::{IntMatrix, IntegerFreeModules};
pub use pairs::{PairCategory, PairMor, PairObj};

use crate::error::Result;
use crate::ring::ZMod;

/// The free-module category over `Z/n`.
pub fn free_module_category(ring: ZMod) -> FreeModules {
    FreeModules::new(ring)
}

/// The subspace-pairs category over `F_p`.
pub fn pair_category(p: u32) -> Result<PairCategory> {
    PairCategory::new(p)
}
