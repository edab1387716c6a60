//! Seeded random instances for the property suites.
//!
//! Every generator draws from a caller-owned [`ChaCha8Rng`], so a run is fixed
//! by its seed. Parallel suites derive one sub-seed per instance up front.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{Ambient, FuncConfig, SetConfig};
use crate::error::Result;
use crate::lattice::{Lattice, LatticeSpec, Region};

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` sub-seeds drawn from `seed`, one per instance.
pub fn sub_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| rng.gen()).collect()
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub lattice: Lattice,
    pub omega: Region,
}

/// A small 1-D or 2-D box with a random domain of `1..=max_free` cells that
/// leaves at least one exterior cell.
pub fn random_instance(rng: &mut InstanceRng, max_free: usize, s_choices: &[f64]) -> Result<Instance> {
    let s = *s_choices.choose(rng).unwrap_or(&0.5);
    let h = *[1.0, 0.5].choose(rng).expect("non-empty");
    let spec = if rng.gen_bool(0.5) {
        let lo = -rng.gen_range(2..=6);
        let hi = rng.gen_range(2..=6);
        LatticeSpec::new_1d(lo, hi, h, s)
    } else {
        let wx = rng.gen_range(2..=4);
        let wy = rng.gen_range(2..=4);
        LatticeSpec::new_2d([-wx, wx], [-1, wy], h, s)
    };
    let lattice = Lattice::new(spec)?;
    let n = lattice.len();
    let k = rng.gen_range(1..=max_free.max(1).min(n - 1));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    let omega = Region::from_indices(n, idx);
    Ok(Instance { lattice, omega })
}

pub fn random_set(rng: &mut InstanceRng, lat: &Lattice, p: f64) -> SetConfig {
    let occupancy = (0..lat.len()).map(|_| rng.gen_bool(p)).collect();
    let ambient = if rng.gen_bool(0.5) { Ambient::Full } else { Ambient::Empty };
    SetConfig { occupancy, ambient }
}

/// A set with a random domain part and the exterior of `datum`.
pub fn random_competitor_set(rng: &mut InstanceRng, datum: &SetConfig, omega: &Region) -> SetConfig {
    let mut out = datum.clone();
    for i in omega.iter() {
        out.occupancy[i] = rng.gen_bool(0.5);
    }
    out
}

/// Random function values. Half the draws use a few quantised levels so that
/// ties and repeated thresholds occur; the far-field value is 0 or attained.
pub fn random_func(rng: &mut InstanceRng, lat: &Lattice) -> FuncConfig {
    let values: Vec<f64> = if rng.gen_bool(0.5) {
        let levels = rng.gen_range(2..=4);
        (0..lat.len()).map(|_| 0.5 * f64::from(rng.gen_range(-levels..=levels))).collect()
    } else {
        (0..lat.len()).map(|_| rng.gen_range(-3.0..3.0)).collect()
    };
    let ambient_value = if rng.gen_bool(0.5) { 0.0 } else { *values.choose(rng).expect("non-empty box") };
    FuncConfig { values, ambient_value }
}

/// Function datum with `levels` distinct integer values on the exterior.
pub fn random_level_datum(rng: &mut InstanceRng, lat: &Lattice, levels: i32) -> FuncConfig {
    let values = (0..lat.len()).map(|_| f64::from(rng.gen_range(0..levels))).collect();
    FuncConfig { values, ambient_value: 0.0 }
}

/// A real-valued competitor agreeing with `u` outside `omega`.
pub fn random_competitor_func(rng: &mut InstanceRng, u: &FuncConfig, omega: &Region) -> FuncConfig {
    let mut v = u.clone();
    let style = rng.gen_range(0..3);
    for i in omega.iter() {
        v.values[i] = match style {
            0 => rng.gen_range(-1.0..2.0),
            1 => f64::from(u8::from(rng.gen_bool(0.5))),
            _ => u.values[i] + rng.gen_range(-0.25..0.25),
        };
    }
    v
}
