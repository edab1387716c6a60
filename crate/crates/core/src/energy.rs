//! Discrete fractional perimeter and `W^{s,1}`-type energies.
//!
//! All functionals share one pair decomposition over the domain `omega`:
//!
//! * `local`: unordered pairs with both cells in `omega`, counted once;
//! * `nonlocal`: pairs with one cell in `omega` and one in `box \ omega`;
//! * `ambient`: interaction of `omega` with the far field, present only when
//!   the weight table carries tails.
//!
//! Pairs with both cells outside `omega` never enter. Sums are compensated and
//! reduced in a fixed order, so parallel evaluation is bit-identical to serial.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::WeightTable;
use crate::lattice::{Lattice, Region};
use crate::sum::KahanSum;

/// Occupancy of the far field for a set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    #[default]
    Empty,
    Full,
}

impl Ambient {
    pub fn flipped(self) -> Ambient {
        match self {
            Ambient::Empty => Ambient::Full,
            Ambient::Full => Ambient::Empty,
        }
    }

    pub fn indicator(self) -> f64 {
        match self {
            Ambient::Empty => 0.0,
            Ambient::Full => 1.0,
        }
    }
}

/// A discrete set: occupancy per box cell plus far-field occupancy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetConfig {
    pub occupancy: Vec<bool>,
    pub ambient: Ambient,
}

impl SetConfig {
    pub fn empty(lattice: &Lattice) -> Self {
        Self { occupancy: vec![false; lattice.len()], ambient: Ambient::Empty }
    }

    pub fn full(lattice: &Lattice) -> Self {
        Self { occupancy: vec![true; lattice.len()], ambient: Ambient::Full }
    }

    pub fn from_region(region: &Region, ambient: Ambient) -> Self {
        Self { occupancy: region.mask().to_vec(), ambient }
    }

    pub fn region(&self) -> Region {
        Region::from_mask(self.occupancy.clone())
    }

    /// Occupied cells inside `omega`.
    pub fn inside(&self, omega: &Region) -> Region {
        self.region().intersection(omega)
    }

    pub fn volume_in(&self, omega: &Region) -> usize {
        omega.iter().filter(|&i| self.occupancy[i]).count()
    }

    pub fn complement(&self) -> SetConfig {
        SetConfig {
            occupancy: self.occupancy.iter().map(|&b| !b).collect(),
            ambient: self.ambient.flipped(),
        }
    }

    pub fn union(&self, other: &SetConfig) -> SetConfig {
        SetConfig {
            occupancy: self.occupancy.iter().zip(&other.occupancy).map(|(&a, &b)| a || b).collect(),
            ambient: if self.ambient == Ambient::Full || other.ambient == Ambient::Full {
                Ambient::Full
            } else {
                Ambient::Empty
            },
        }
    }

    pub fn intersection(&self, other: &SetConfig) -> SetConfig {
        SetConfig {
            occupancy: self.occupancy.iter().zip(&other.occupancy).map(|(&a, &b)| a && b).collect(),
            ambient: if self.ambient == Ambient::Full && other.ambient == Ambient::Full {
                Ambient::Full
            } else {
                Ambient::Empty
            },
        }
    }

    /// True when both sets coincide on `box \ omega` and in the far field.
    pub fn agrees_outside(&self, other: &SetConfig, omega: &Region) -> bool {
        self.ambient == other.ambient
            && self
                .occupancy
                .iter()
                .zip(&other.occupancy)
                .enumerate()
                .all(|(i, (a, b))| omega.contains(i) || a == b)
    }

    /// Indicator function of the set.
    pub fn indicator(&self) -> FuncConfig {
        FuncConfig {
            values: self.occupancy.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            ambient_value: self.ambient.indicator(),
        }
    }
}

/// A discrete function: one value per box cell plus a constant far-field value.
#[derive(Clone, Debug, PartialEq)]
pub struct FuncConfig {
    pub values: Vec<f64>,
    pub ambient_value: f64,
}

impl FuncConfig {
    pub fn constant(lattice: &Lattice, value: f64) -> Self {
        Self { values: vec![value; lattice.len()], ambient_value: value }
    }

    pub fn zeros(lattice: &Lattice) -> Self {
        Self::constant(lattice, 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FuncConfig {
        FuncConfig {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ambient_value: f(self.ambient_value),
        }
    }

    /// Superlevel set `{u >= t}`, far field included.
    pub fn superlevel(&self, t: f64) -> SetConfig {
        SetConfig {
            occupancy: self.values.iter().map(|&v| v >= t).collect(),
            ambient: if self.ambient_value >= t { Ambient::Full } else { Ambient::Empty },
        }
    }

    /// True when both functions coincide on `box \ omega` and in the far field.
    pub fn agrees_outside(&self, other: &FuncConfig, omega: &Region) -> bool {
        self.ambient_value == other.ambient_value
            && self
                .values
                .iter()
                .zip(&other.values)
                .enumerate()
                .all(|(i, (a, b))| omega.contains(i) || a == b)
    }

    /// Sorted distinct values over the box, plus the far-field value when `with_ambient`.
    pub fn distinct_values(&self, with_ambient: bool) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.clone();
        if with_ambient {
            v.push(self.ambient_value);
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) && self.ambient_value.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument("function values must be finite".into()))
        }
    }
}

/// Energy split into its local, nonlocal and far-field parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub local: f64,
    pub nonlocal: f64,
    pub ambient: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn from_parts(local: f64, nonlocal: f64, ambient: f64) -> Self {
        let total = [local, nonlocal, ambient].into_iter().collect::<KahanSum>().value();
        Self { local, nonlocal, ambient, total }
    }
}

fn check_inputs(table: &WeightTable, omega: &Region, len: usize) -> Result<()> {
    table.lattice().check_region(omega)?;
    if len != table.lattice().len() {
        return Err(Error::InvalidArgument(format!(
            "configuration has {len} cells, box has {}",
            table.lattice().len()
        )));
    }
    Ok(())
}

/// Pair decomposition of `sum w(x, y) |u(x) - u(y)|`, one partial per cell of
/// `omega` (computed in parallel), reduced serially in index order.
fn pair_sums(
    table: &WeightTable,
    omega: &Region,
    values: &[f64],
    ambient_value: f64,
) -> EnergyBreakdown {
    let lat = table.lattice();
    let [nx, ny] = lat.shape();
    let lo = lat.lo();
    let members = omega.indices();
    let mask = omega.mask();

    let partials: Vec<[f64; 3]> = members
        .par_iter()
        .map(|&x| {
            let [cx, cy] = lat.coords(x);
            let ux = values[x];
            let mut local = KahanSum::new();
            let mut nonlocal = KahanSum::new();
            let mut y = 0usize;
            for j in 0..ny as i32 {
                let dy = (cy - lo[1] - j) as i64;
                for i in 0..nx as i32 {
                    let diff = (ux - values[y]).abs();
                    if diff != 0.0 {
                        let w = table.offset_weight((cx - lo[0] - i) as i64, dy);
                        if mask[y] {
                            if y > x {
                                local.add(w * diff);
                            }
                        } else {
                            nonlocal.add(w * diff);
                        }
                    }
                    y += 1;
                }
            }
            let amb = table.tail_term(x).map_or(0.0, |t| t * (ux - ambient_value).abs());
            [local.value(), nonlocal.value(), amb]
        })
        .collect();

    let mut acc = [KahanSum::new(); 3];
    for p in &partials {
        for k in 0..3 {
            acc[k].add(p[k]);
        }
    }
    EnergyBreakdown::from_parts(acc[0].value(), acc[1].value(), acc[2].value())
}

/// Discrete fractional perimeter of `set` in `omega`.
pub fn perimeter(table: &WeightTable, set: &SetConfig, omega: &Region) -> Result<EnergyBreakdown> {
    check_inputs(table, omega, set.occupancy.len())?;
    let u = set.indicator();
    Ok(pair_sums(table, omega, &u.values, u.ambient_value))
}

/// The `W^{s,1}`-type interaction energy of `u` in `omega`.
pub fn g_energy(table: &WeightTable, u: &FuncConfig, omega: &Region) -> Result<EnergyBreakdown> {
    check_inputs(table, omega, u.values.len())?;
    u.check_finite()?;
    Ok(pair_sums(table, omega, &u.values, u.ambient_value))
}

/// Interaction of `omega` with `|u|` outside `omega`.
pub fn global_tail(table: &WeightTable, u: &FuncConfig, omega: &Region) -> Result<f64> {
    check_inputs(table, omega, u.values.len())?;
    u.check_finite()?;
    let outside: Vec<usize> = omega.complement().indices();
    let partials: Vec<f64> = omega
        .indices()
        .par_iter()
        .map(|&x| {
            let mut acc = KahanSum::new();
            for &y in &outside {
                let v = u.values[y].abs();
                if v != 0.0 {
                    acc.add(table.weight_idx(x, y) * v);
                }
            }
            acc.add(table.tail_term(x).map_or(0.0, |t| t * u.ambient_value.abs()));
            acc.value()
        })
        .collect();
    Ok(crate::sum::ksum(partials))
}

/// Renormalised energy: `g_energy - global_tail`. May be negative.
pub fn g_tilde(table: &WeightTable, u: &FuncConfig, omega: &Region) -> Result<f64> {
    let g = g_energy(table, u, omega)?.total;
    let tail = global_tail(table, u, omega)?;
    Ok(g - tail)
}

/// Local tail of `phi` over `ring`, per cell of `omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTail {
    /// `(box index, value)` for each cell of `omega`, in index order.
    pub per_cell: Vec<(usize, f64)>,
    pub total: f64,
}

pub fn local_tail(table: &WeightTable, phi: &FuncConfig, ring: &Region, omega: &Region) -> Result<LocalTail> {
    check_inputs(table, omega, phi.values.len())?;
    table.lattice().check_region(ring)?;
    let overlap = ring.intersection(omega).len();
    if overlap > 0 {
        return Err(Error::RingOverlapsDomain(overlap));
    }
    let ring_cells = ring.indices();
    let per_cell: Vec<(usize, f64)> = omega
        .iter()
        .map(|x| {
            let v = crate::sum::ksum(ring_cells.iter().map(|&y| table.weight_idx(x, y) * phi.values[y].abs()));
            (x, v)
        })
        .collect();
    let total = crate::sum::ksum(per_cell.iter().map(|p| p.1));
    Ok(LocalTail { per_cell, total })
}

/// Fractional seminorm over ordered pairs in `omega`.
pub fn seminorm(table: &WeightTable, u: &FuncConfig, omega: &Region) -> Result<f64> {
    Ok(2.0 * g_energy(table, u, omega)?.local)
}

/// Both sides of the discrete co-area identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoareaCheck {
    pub lhs: f64,
    pub rhs: f64,
}

/// `lhs = g_energy(u)`, `rhs = sum_k (v_k - v_{k-1}) perimeter({u >= v_k})`
/// over the sorted distinct values `v_0 < v_1 < ...` of `u`.
pub fn coarea_check(table: &WeightTable, u: &FuncConfig, omega: &Region) -> Result<CoareaCheck> {
    let lhs = g_energy(table, u, omega)?.total;
    let with_ambient = table.has_tails();
    if with_ambient && u.ambient_value != 0.0 && !u.values.contains(&u.ambient_value) {
        return Err(Error::InvalidArgument(format!(
            "ambient value {} is neither 0 nor attained in the box",
            u.ambient_value
        )));
    }
    let levels = u.distinct_values(with_ambient);
    let mut rhs = KahanSum::new();
    for k in 1..levels.len() {
        let per = perimeter(table, &u.superlevel(levels[k]), omega)?.total;
        rhs.add((levels[k] - levels[k - 1]) * per);
    }
    Ok(CoareaCheck { lhs, rhs: rhs.value() })
}

/// Positive and negative parts, `u = u_plus + u_minus`.
pub fn split_parts(u: &FuncConfig) -> (FuncConfig, FuncConfig) {
    (u.map(|v| v.max(0.0)), u.map(|v| v.min(0.0)))
}

/// `min{eps, max{u - lambda + sqrt(eps), 0}} / eps`, pointwise; values in `[0, 1]`.
pub fn cutoff(u: &FuncConfig, lambda: f64, eps: f64) -> Result<FuncConfig> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff width {eps} must be positive")));
    }
    let shift = eps.sqrt() - lambda;
    Ok(u.map(|v| (v + shift).max(0.0).min(eps) / eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CellId, LatticeSpec};
    use approx::assert_relative_eq;

    const W2: f64 = 0.353_553_390_593_273_8; // 2^{-1.5}

    fn line() -> (Lattice, WeightTable, Region) {
        let lat = Lattice::new(LatticeSpec::new_1d(-2, 2, 1.0, 0.5)).unwrap();
        let table = WeightTable::boxed(&lat);
        let omega = lat.region_from_cells([CellId::new1(0)]).unwrap();
        (lat, table, omega)
    }

    fn set_of(lat: &Lattice, cells: &[i32]) -> SetConfig {
        let r = lat.region_from_cells(cells.iter().map(|&i| CellId::new1(i))).unwrap();
        SetConfig::from_region(&r, Ambient::Empty)
    }

    fn func_of(lat: &Lattice, vals: &[(i32, f64)]) -> FuncConfig {
        let mut u = FuncConfig::zeros(lat);
        for &(i, v) in vals {
            u.values[lat.index(CellId::new1(i)).unwrap()] = v;
        }
        u
    }

    #[test]
    fn perimeter_examples() {
        let (lat, t, omega) = line();
        assert_eq!(perimeter(&t, &SetConfig::empty(&lat), &omega).unwrap().total, 0.0);
        assert_eq!(perimeter(&t, &SetConfig::full(&lat), &omega).unwrap().total, 0.0);
        let e = perimeter(&t, &set_of(&lat, &[0, 1]), &omega).unwrap();
        assert_relative_eq!(e.total, 1.0 + 2.0 * W2, max_relative = 1e-14);
        assert_relative_eq!(e.total, 1.707_106_781_186_547_6, max_relative = 1e-12);
        assert_eq!(e.local, 0.0);
        assert_eq!(e.ambient, 0.0);
    }

    #[test]
    fn full_set_with_full_far_field_has_zero_perimeter() {
        let lat = Lattice::new(LatticeSpec::new_1d(-2, 2, 1.0, 0.5)).unwrap();
        let t = WeightTable::new(
            &lat,
            crate::kernel::EvalStrategy::CachedByOffset,
            crate::kernel::AmbientConfig::with_mode(crate::kernel::AmbientMode::Full),
        )
        .unwrap();
        let omega = lat.region_from_cells([CellId::new1(0), CellId::new1(1)]).unwrap();
        assert_eq!(perimeter(&t, &SetConfig::full(&lat), &omega).unwrap().total, 0.0);
        let mut partial = SetConfig::full(&lat);
        partial.ambient = Ambient::Empty;
        let e = perimeter(&t, &partial, &omega).unwrap();
        assert!(e.ambient > 0.0);
        assert_eq!(e.total, e.ambient);
    }

    #[test]
    fn g_energy_examples() {
        let (lat, t, omega) = line();
        assert_eq!(g_energy(&t, &FuncConfig::constant(&lat, 3.5), &omega).unwrap().total, 0.0);
        let u = func_of(&lat, &[(0, 0.5), (1, 1.0)]);
        let g = g_energy(&t, &u, &omega).unwrap().total;
        assert_relative_eq!(g, 0.5 * (1.0 + W2) + 0.5 + 0.5 * W2, max_relative = 1e-14);
        assert_relative_eq!(g, 1.353_553_390_593_273_7, max_relative = 1e-12);
        let ind = set_of(&lat, &[0, 1]);
        assert_eq!(
            g_energy(&t, &ind.indicator(), &omega).unwrap(),
            perimeter(&t, &ind, &omega).unwrap()
        );
    }

    #[test]
    fn tails_and_g_tilde() {
        let (lat, t, omega) = line();
        assert_eq!(g_tilde(&t, &FuncConfig::zeros(&lat), &omega).unwrap(), 0.0);
        let u = func_of(&lat, &[(0, 0.5), (1, 1.0)]);
        assert_eq!(global_tail(&t, &u, &omega).unwrap(), 1.0);
        assert_relative_eq!(g_tilde(&t, &u, &omega).unwrap(), W2, max_relative = 1e-12);
        let scaled = u.map(|v| 3.0 * v);
        assert_eq!(global_tail(&t, &scaled, &omega).unwrap(), 3.0);
        let own = SetConfig::from_region(&omega, Ambient::Empty).indicator();
        assert_eq!(global_tail(&t, &own, &omega).unwrap(), 0.0);
        assert_eq!(
            g_tilde(&t, &own, &omega).unwrap(),
            perimeter(&t, &SetConfig::from_region(&omega, Ambient::Empty), &omega).unwrap().total
        );
    }

    #[test]
    fn local_tail_examples() {
        let (lat, t, omega) = line();
        let ring1 = lat.region_from_cells([CellId::new1(-1), CellId::new1(1)]).unwrap();
        let ring2 = lat.region_from_cells([CellId::new1(-2), CellId::new1(2)]).unwrap();
        let ones = FuncConfig::constant(&lat, 1.0);
        assert_eq!(local_tail(&t, &FuncConfig::zeros(&lat), &ring1, &omega).unwrap().total, 0.0);
        let lt = local_tail(&t, &ones, &ring1, &omega).unwrap();
        assert_eq!(lt.per_cell, vec![(lat.index(CellId::new1(0)).unwrap(), 2.0)]);
        assert_eq!(lt.total, 2.0);
        assert_relative_eq!(local_tail(&t, &ones, &ring2, &omega).unwrap().total, 2.0 * W2, max_relative = 1e-14);
        assert!(matches!(
            local_tail(&t, &ones, &omega, &omega),
            Err(Error::RingOverlapsDomain(1))
        ));
    }

    #[test]
    fn seminorm_examples() {
        let (lat, t, omega) = line();
        assert_eq!(seminorm(&t, &func_of(&lat, &[(0, 4.0), (1, -1.0)]), &omega).unwrap(), 0.0);
        let pair = lat.region_from_cells([CellId::new1(0), CellId::new1(1)]).unwrap();
        assert_eq!(seminorm(&t, &FuncConfig::constant(&lat, 2.0), &pair).unwrap(), 0.0);
        assert_eq!(seminorm(&t, &func_of(&lat, &[(1, 1.0)]), &pair).unwrap(), 2.0);
    }

    #[test]
    fn coarea_examples() {
        let (lat, t, omega) = line();
        let ind = set_of(&lat, &[0, 1]).indicator();
        let c = coarea_check(&t, &ind, &omega).unwrap();
        assert_eq!(c.lhs, c.rhs);
        let u = func_of(&lat, &[(0, 0.5), (1, 1.0)]);
        let c = coarea_check(&t, &u, &omega).unwrap();
        assert_relative_eq!(c.lhs, 1.353_553_390_593_273_7, max_relative = 1e-12);
        assert_relative_eq!(c.rhs, 0.5 * (1.0 + 2.0 * W2) + 0.5 * 1.0, max_relative = 1e-12);
    }

    #[test]
    fn split_and_cutoff() {
        let (lat, _, _) = line();
        let u = func_of(&lat, &[(0, 2.0), (1, -3.0)]);
        let (p, m) = split_parts(&u);
        let i1 = lat.index(CellId::new1(1)).unwrap();
        assert_eq!((p.values[i1], m.values[i1]), (0.0, -3.0));
        let pos = FuncConfig::constant(&lat, 1.5);
        assert_eq!(split_parts(&pos), (pos.clone(), FuncConfig::zeros(&lat)));

        let eps: f64 = 0.25;
        let lambda = 0.7;
        let at = FuncConfig::constant(&lat, lambda);
        assert!(cutoff(&at, lambda, eps).unwrap().values.iter().all(|&v| v == 1.0));
        let low = FuncConfig::constant(&lat, lambda - eps.sqrt());
        assert!(cutoff(&low, lambda, eps).unwrap().values.iter().all(|&v| v == 0.0));
        let high = FuncConfig::constant(&lat, lambda - eps.sqrt() + eps + 1.0);
        assert!(cutoff(&high, lambda, eps).unwrap().values.iter().all(|&v| v == 1.0));
        assert!(cutoff(&at, lambda, 0.0).is_err());
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let (lat, t, _) = line();
        let wrong = Region::full(4);
        assert!(perimeter(&t, &SetConfig::empty(&lat), &wrong).is_err());
        let mut u = FuncConfig::zeros(&lat);
        u.values[0] = f64::NAN;
        assert!(g_energy(&t, &u, &lat.full_region()).is_err());
    }
}
