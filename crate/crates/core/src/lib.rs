//! Discrete fractional perimeters and `W^{s,1}`-type energies on lattices,
//! exact global minimisers through a min-cut reduction, and the level-set
//! construction of minimal functions.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: box geometry and region algebra;
//! * [`kernel`]: singular pair weights and far-field tails;
//! * [`energy`]: perimeter, energies, tails and the co-area identity;
//! * [`optimise`]: min-cut minimisers and the brute-force oracle;
//! * [`levelset`]: minimal functions from nested minimal level sets;
//! * [`experiments`]: scripted fill/empty sweeps, sector and symmetry runs;
//! * [`verify`]: randomised property suites over [`random`] instances;
//! * [`io`]: JSON mirrors and PGM bitmaps.

pub mod energy;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod lattice;
pub mod levelset;
pub mod maxflow;
pub mod optimise;
pub mod random;
pub mod sum;
pub mod verify;

pub use energy::{Ambient, EnergyBreakdown, FuncConfig, SetConfig};
pub use error::{Error, Result};
pub use kernel::{AmbientConfig, AmbientMode, EvalStrategy, WeightTable};
pub use experiments::{SweepMode, SweepRecord};
pub use lattice::{CellId, Isometry, Lattice, LatticeSpec, Region};
pub use levelset::{LevelFamily, LevelOracle};
pub use optimise::{CutProblem, MinimiserPair};
