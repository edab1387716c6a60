//! Scripted experiments: ring fill/empty sweeps, the sector instance with
//! several minimisers, constant data, and inherited symmetry.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{perimeter, Ambient, FuncConfig, SetConfig};
use crate::error::{Error, Result};
use crate::kernel::{AmbientConfig, EvalStrategy, WeightTable};
use crate::lattice::{ball_region, diameter, ring_region, Isometry, Lattice, LatticeSpec, Region};
use crate::levelset::{assemble_function, build_level_family};
use crate::optimise::{brute_force, minimise, MinimiserPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepMode {
    /// Datum full on the ring, empty beyond it.
    FullRingEmptyFar,
    /// Datum empty on the ring, full beyond it (far field included).
    EmptyRingFullFar,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::FullRingEmptyFar => "FULL_RING_EMPTY_FAR",
            SweepMode::EmptyRingFullFar => "EMPTY_RING_FULL_FAR",
        }
    }

    /// Filled fraction the mode is driving towards.
    fn target(self) -> f64 {
        match self {
            SweepMode::FullRingEmptyFar => 1.0,
            SweepMode::EmptyRingFullFar => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub s: f64,
    /// Ring width in units of the domain diameter.
    pub width_diam: f64,
    /// `|maximal minimiser ∩ omega| / |omega|`.
    pub filled_fraction: f64,
    pub optimal_value: f64,
    pub gap_bound: f64,
    pub mode: SweepMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// Sorted by `(s, width_diam)`.
    pub records: Vec<SweepRecord>,
    /// Per `s`: least tested width (in diameters) reaching the mode's target, if any.
    pub theta: Vec<(f64, Option<f64>)>,
}

impl Sweep {
    /// CSV with header `s,width_diam,filled_fraction,optimal_value,gap_bound,mode`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,width_diam,filled_fraction,optimal_value,gap_bound,mode\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.s,
                r.width_diam,
                r.filled_fraction,
                r.optimal_value,
                r.gap_bound,
                r.mode.as_str()
            ));
        }
        out
    }

    pub fn theta_for(&self, s: f64) -> Option<f64> {
        self.theta.iter().find(|(t, _)| *t == s).and_then(|(_, w)| *w)
    }
}

/// Geometry and solver settings shared by the sweep points.
#[derive(Clone, Debug)]
pub struct SweepSetup<'a> {
    /// Box and spacing; its `s` is overridden per sweep point.
    pub lattice: &'a Lattice,
    pub omega: &'a Region,
    pub ambient: AmbientConfig,
    pub scale: u64,
}

/// Errors when a ring of `width` around `omega` would reach beyond the box.
pub fn check_ring_fits(lattice: &Lattice, omega: &Region, width: f64) -> Result<()> {
    let b = lattice.box_bounds();
    for x in omega.iter() {
        let c = lattice.center(x);
        for axis in 0..lattice.dim() {
            if c[axis] - width < b[axis][0] || c[axis] + width > b[axis][1] {
                return Err(Error::RingExceedsBox { width });
            }
        }
    }
    Ok(())
}

/// Set datum for one sweep point.
pub fn ring_datum(lattice: &Lattice, omega: &Region, ring: &Region, mode: SweepMode) -> SetConfig {
    match mode {
        SweepMode::FullRingEmptyFar => SetConfig::from_region(ring, Ambient::Empty),
        SweepMode::EmptyRingFullFar => {
            SetConfig::from_region(&lattice.full_region().difference(omega).difference(ring), Ambient::Full)
        }
    }
}

pub fn yin_yang_sweep(setup: &SweepSetup<'_>, widths: &[f64], s_values: &[f64], mode: SweepMode) -> Result<Sweep> {
    let lat = setup.lattice;
    let omega = setup.omega;
    lat.check_region(omega)?;
    let d = diameter(lat, omega)?;
    let mut widths = widths.to_vec();
    widths.sort_by(f64::total_cmp);
    let mut s_sorted = s_values.to_vec();
    s_sorted.sort_by(f64::total_cmp);
    for &w in &widths {
        check_ring_fits(lat, omega, w * d)?;
    }

    let tables = s_sorted
        .iter()
        .map(|&s| WeightTable::new(&lat.with_s(s)?, EvalStrategy::CachedByOffset, setup.ambient))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(usize, f64)> = (0..s_sorted.len()).flat_map(|k| widths.iter().map(move |&w| (k, w))).collect();
    let records = points
        .par_iter()
        .map(|&(k, w)| {
            let table = &tables[k];
            let ring = ring_region(lat, omega, w * d)?;
            let datum = ring_datum(lat, omega, &ring, mode);
            let m = minimise(table, &datum, omega, setup.scale)?;
            Ok(SweepRecord {
                s: s_sorted[k],
                width_diam: w,
                filled_fraction: m.maximal_set.volume_in(omega) as f64 / omega.len() as f64,
                optimal_value: m.optimal_value,
                gap_bound: m.gap_bound,
                mode,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = s_sorted
        .iter()
        .map(|&s| {
            let w = records
                .iter()
                .find(|r| r.s == s && r.filled_fraction == mode.target())
                .map(|r| r.width_diam);
            (s, w)
        })
        .collect();
    Ok(Sweep { records, theta })
}

/// Which exterior datum the sector run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorDatum {
    /// Cells outside the disc with `x * y > 0`.
    Quadrants,
    /// Every cell outside the disc.
    Full,
}

/// The unit disc on the smallest square box `[-m, m]^2` that contains it,
/// `m = round(1 / h)`. No exterior cell of this box lies on a coordinate axis.
pub fn sector_geometry(h: f64, s: f64) -> Result<(Lattice, Region)> {
    let lat = Lattice::new(LatticeSpec::square(1.0, h, s))?;
    let omega = ball_region(&lat, &[0.0, 0.0], 1.0)?;
    Ok((lat, omega))
}

pub fn sector_datum(lat: &Lattice, omega: &Region, kind: SectorDatum) -> SetConfig {
    let occupancy = (0..lat.len())
        .map(|i| {
            if omega.contains(i) {
                return false;
            }
            match kind {
                SectorDatum::Quadrants => {
                    let [x, y] = lat.center(i);
                    x * y > 0.0
                }
                SectorDatum::Full => true,
            }
        })
        .collect();
    SetConfig { occupancy, ambient: Ambient::Empty }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorReport {
    pub h: f64,
    pub s: f64,
    pub free_cells: usize,
    pub minimal_volume: usize,
    pub maximal_volume: usize,
    /// `|minimal Δ maximal|` inside the disc, in cell volumes times `h^2`.
    pub symmetric_difference_volume: f64,
    pub minimal_energy: f64,
    pub maximal_energy: f64,
    pub gap_bound: f64,
    /// Energy of the quarter-turned complement of the minimal set.
    pub rotated_complement_energy: f64,
    /// Whether the quarter-turned complement has the same exterior as the datum.
    pub rotated_complement_admissible: bool,
    /// Number of optima found by enumeration, when it was run.
    pub brute_force_optima: Option<usize>,
}

pub struct SectorRun {
    pub lattice: Lattice,
    pub omega: Region,
    pub datum: SetConfig,
    pub pair: MinimiserPair,
    pub report: SectorReport,
}

/// Minimises the sector instance; enumerates all optima when the disc has at
/// most `brute_force_limit` cells.
pub fn sector_nonuniqueness(h: f64, s: f64, kind: SectorDatum, scale: u64, brute_force_limit: usize) -> Result<SectorRun> {
    let (lat, omega) = sector_geometry(h, s)?;
    if omega.is_empty() {
        return Err(Error::InvalidArgument(format!("h = {h} leaves no free cell in the disc")));
    }
    let table = WeightTable::boxed(&lat);
    let datum = sector_datum(&lat, &omega, kind);
    let pair = minimise(&table, &datum, &omega, scale)?;
    let sym = pair.minimal_set.inside(&omega).union(&pair.maximal_set.inside(&omega)).len()
        - pair.minimal_set.inside(&omega).intersection(&pair.maximal_set.inside(&omega)).len();
    let rotated = SetConfig {
        occupancy: Isometry::Rot90.map_field(&lat, &pair.minimal_set.complement().occupancy)?,
        ambient: Ambient::Empty,
    };
    let rotated_complement_energy = perimeter(&table, &rotated, &omega)?.total;
    let brute_force_optima = if omega.len() <= brute_force_limit {
        Some(brute_force(&table, &datum, &omega, brute_force_limit)?.optima.len())
    } else {
        None
    };
    let report = SectorReport {
        h,
        s,
        free_cells: omega.len(),
        minimal_volume: pair.minimal_set.volume_in(&omega),
        maximal_volume: pair.maximal_set.volume_in(&omega),
        symmetric_difference_volume: sym as f64 * h * h,
        minimal_energy: pair.optimal_value,
        maximal_energy: pair.maximal_value,
        gap_bound: pair.gap_bound,
        rotated_complement_energy,
        rotated_complement_admissible: rotated.agrees_outside(&datum, &omega),
        brute_force_optima,
    };
    Ok(SectorRun { lattice: lat, omega, datum, pair, report })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantDatumReport {
    pub lambda: f64,
    pub ring_width: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub holds: bool,
}

/// Datum `lambda` on the ring of `ring_width` around `omega`, zero elsewhere.
pub fn constant_ring_datum(lat: &Lattice, omega: &Region, lambda: f64, ring_width: f64) -> Result<FuncConfig> {
    let ring = ring_region(lat, omega, ring_width)?;
    let mut phi = FuncConfig::zeros(lat);
    for i in ring.iter() {
        phi.values[i] = lambda;
    }
    Ok(phi)
}

/// Whether the assembled minimal function equals `lambda` throughout `omega`.
pub fn constant_datum_check(
    table: &WeightTable,
    omega: &Region,
    lambda: f64,
    ring_width: f64,
    scale: u64,
) -> Result<ConstantDatumReport> {
    let lat = table.lattice();
    check_ring_fits(lat, omega, ring_width)?;
    let phi = constant_ring_datum(lat, omega, lambda, ring_width)?;
    let family = build_level_family(table, &phi, omega, scale)?;
    let u = assemble_function(&family, &phi, omega);
    let inside: Vec<f64> = omega.iter().map(|i| u.values[i]).collect();
    let u_min = inside.iter().copied().fold(f64::INFINITY, f64::min);
    let u_max = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConstantDatumReport { lambda, ring_width, u_min, u_max, holds: inside.iter().all(|&v| v == lambda) })
}

/// Whether the maximal minimiser is invariant under every isometry in `group`.
pub fn symmetry_inheritance(
    table: &WeightTable,
    datum: &SetConfig,
    omega: &Region,
    group: &[Isometry],
    scale: u64,
) -> Result<bool> {
    let lat = table.lattice();
    for &g in group {
        if g.map_region(lat, omega)? != *omega {
            return Err(Error::IsometryMismatch(format!("{g:?} moves the domain")));
        }
        let mut outside = datum.clone();
        for i in omega.iter() {
            outside.occupancy[i] = false;
        }
        if g.map_field(lat, &outside.occupancy)? != outside.occupancy {
            return Err(Error::IsometryMismatch(format!("{g:?} moves the datum")));
        }
    }
    let m = minimise(table, datum, omega, scale)?;
    for &g in group {
        if g.map_field(lat, &m.maximal_set.occupancy)? != m.maximal_set.occupancy {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dense block domain of exactly `n_cells` cells (`k x 2k`, or `k x k` when
/// `n_cells` is a square) inside a box padded by `pad` cells on every side.
pub fn block_workload(n_cells: usize, pad: i32, h: f64, s: f64) -> Result<(Lattice, Region)> {
    let k = (1..=n_cells)
        .find(|&k| k * k == n_cells || 2 * k * k == n_cells)
        .ok_or_else(|| Error::InvalidArgument(format!("{n_cells} is neither k^2 nor 2k^2")))?;
    let (wx, wy) = if k * k == n_cells { (k, k) } else { (2 * k, k) };
    let (wx, wy) = (wx as i32, wy as i32);
    let spec = LatticeSpec::new_2d([-pad, wx - 1 + pad], [-pad, wy - 1 + pad], h, s);
    let lat = Lattice::new(spec)?;
    let omega = Region::from_mask(
        (0..lat.len())
            .map(|i| {
                let [x, y] = lat.coords(i);
                (0..wx).contains(&x) && (0..wy).contains(&y)
            })
            .collect(),
    );
    Ok((lat, omega))
}
