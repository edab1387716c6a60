//! Fixtures shared by the criterion benches.

use fracper_core::experiments::block_workload;
use fracper_core::{Ambient, Lattice, Region, SetConfig};

pub const SIZES: [usize; 3] = [512, 2048, 4608];

/// Block domain of `n` cells with a half-full exterior.
pub struct Workload {
    pub lattice: Lattice,
    pub omega: Region,
    pub datum: SetConfig,
}

pub fn workload(n: usize) -> Workload {
    let (lattice, omega) = block_workload(n, 2, 0.05, 0.5).expect("bench sizes are k^2 or 2k^2");
    let mid = (lattice.lo()[0] + lattice.hi()[0]) / 2;
    let left = Region::from_mask((0..lattice.len()).map(|i| lattice.coords(i)[0] < mid).collect());
    let datum = SetConfig::from_region(&left.difference(&omega), Ambient::Empty);
    Workload { lattice, omega, datum }
}
