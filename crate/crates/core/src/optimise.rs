//! Exact global minimisers of the discrete fractional perimeter.
//!
//! With the occupancy outside `omega` fixed by a datum, the perimeter of a
//! set is a binary energy over the free cells: a unary term per cell (its
//! disagreement with the datum and the far field) plus `w(i, j)` for every
//! pair of free cells with different labels. Pair terms are submodular, so
//! one maximum flow minimises the energy exactly. Every kernel term is
//! quantized to an integer capacity on its own, which keeps equal real
//! energies equal after quantization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{perimeter, Ambient, SetConfig};
use crate::error::{Error, Result};
use crate::kernel::WeightTable;
use crate::lattice::Region;
use crate::maxflow::{Capacity, NetworkBuilder};
use crate::sum::KahanSum;

/// Integer capacity given to the largest kernel weight by default.
pub const DEFAULT_SCALE: u64 = 1 << 32;
/// Smallest accepted quantization scale.
pub const MIN_SCALE: u64 = 1 << 20;
/// Default hard limit on brute-force enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Relative tolerance under which two real energies count as equal.
pub const ENERGY_RTOL: f64 = 1e-9;

/// `|a - b| <= rtol * max(|a|, |b|)`, with a tiny absolute floor.
pub fn energies_match(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()) + 1e-300
}

/// Binary labelling problem induced by a datum on the free cells of `omega`.
#[derive(Clone, Debug)]
pub struct CutProblem {
    /// Box indices of the free cells, increasing.
    pub free: Vec<usize>,
    /// Real `(cost if 0, cost if 1)` per free cell.
    pub unary: Vec<[f64; 2]>,
    /// Quantized `(cost if 0, cost if 1)` per free cell.
    pub unary_q: Vec<[Capacity; 2]>,
    /// Quantized pair weights `(i, j, w)` between free-cell positions `i < j`.
    pub pairs_q: Vec<(u32, u32, Capacity)>,
    /// Integer capacity of the largest weight.
    pub scale: u64,
    /// Capacity units per unit of weight.
    pub factor: f64,
    /// Number of individually rounded terms.
    pub terms: u64,
    /// Bound on the optimality gap introduced by rounding, in energy units.
    pub gap_bound: f64,
    pub datum: SetConfig,
    pub omega: Region,
}

/// Optimal energy with the volume-minimal and volume-maximal optimal sets.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimiserPair {
    pub optimal_value: f64,
    pub maximal_value: f64,
    pub minimal_set: SetConfig,
    pub maximal_set: SetConfig,
    pub gap_bound: f64,
}

impl MinimiserPair {
    pub fn is_unique(&self) -> bool {
        self.minimal_set == self.maximal_set
    }
}

pub fn build_cut_problem(table: &WeightTable, datum: &SetConfig, omega: &Region, scale: u64) -> Result<CutProblem> {
    let lat = table.lattice();
    lat.check_region(omega)?;
    if datum.occupancy.len() != lat.len() {
        return Err(Error::InvalidArgument("datum does not match the box".into()));
    }
    if scale < MIN_SCALE {
        return Err(Error::ScaleOverflow { scale, reason: format!("below the minimum {MIN_SCALE}") });
    }
    let factor = scale as f64 / table.max_weight();
    let quant = |w: f64| -> Capacity { (w * factor).round() as Capacity };

    let free = omega.indices();
    let fixed: Vec<usize> = omega.complement().indices();
    let amb_full = datum.ambient == Ambient::Full;

    // Per free cell: real and quantized disagreement costs with the datum.
    let rows: Vec<([f64; 2], [i128; 2])> = free
        .par_iter()
        .map(|&x| {
            let mut real = [KahanSum::new(), KahanSum::new()];
            let mut q = [0i128; 2];
            for &y in &fixed {
                let w = table.weight_idx(x, y);
                // Occupied datum cell penalises label 0, empty one penalises label 1.
                let k = if datum.occupancy[y] { 0 } else { 1 };
                real[k].add(w);
                q[k] += quant(w) as i128;
            }
            if let Some(t) = table.tail_term(x) {
                let k = if amb_full { 0 } else { 1 };
                real[k].add(t);
                q[k] += quant(t) as i128;
            }
            ([real[0].value(), real[1].value()], q)
        })
        .collect();

    let n = free.len();
    let mut pairs_q = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut total: i128 = 0;
    for a in 0..n {
        for b in a + 1..n {
            let c = quant(table.weight_idx(free[a], free[b]));
            total += c as i128;
            if c > 0 {
                pairs_q.push((a as u32, b as u32, c));
            }
        }
    }
    let mut unary = Vec::with_capacity(n);
    let mut unary_q = Vec::with_capacity(n);
    for (real, q) in rows {
        total += q[0] + q[1];
        unary.push(real);
        unary_q.push([q[0] as Capacity, q[1] as Capacity]);
    }
    // Flow values are bounded by the total capacity; keep ample headroom.
    if total > (i64::MAX / 8) as i128 {
        return Err(Error::ScaleOverflow {
            scale,
            reason: format!("total capacity {total} overflows 64-bit flow"),
        });
    }
    let tail_terms = if table.has_tails() { n } else { 0 };
    let terms = (n * fixed.len() + n * n.saturating_sub(1) / 2 + tail_terms) as u64;
    // Each term is off by at most 1/(2 factor); an optimum of the rounded
    // energy is therefore within twice that of the true optimum.
    let gap_bound = terms as f64 / factor;
    Ok(CutProblem {
        free,
        unary,
        unary_q,
        pairs_q,
        scale,
        factor,
        terms,
        gap_bound,
        datum: datum.clone(),
        omega: omega.clone(),
    })
}

/// Minimal and maximal minimisers of the quantized energy via one max-flow.
pub fn solve_mincut(table: &WeightTable, problem: &CutProblem) -> Result<MinimiserPair> {
    let n = problem.free.len();
    let datum = &problem.datum;
    if n == 0 {
        let value = perimeter(table, datum, &problem.omega)?.total;
        return Ok(MinimiserPair {
            optimal_value: value,
            maximal_value: value,
            minimal_set: datum.clone(),
            maximal_set: datum.clone(),
            gap_bound: 0.0,
        });
    }
    // Label 1 = source side. A cell labelled 1 cuts its sink arc (cost if 1),
    // a cell labelled 0 cuts its source arc (cost if 0).
    let (source, sink) = (n, n + 1);
    let mut b = NetworkBuilder::with_capacity(n + 2, 2 * n + problem.pairs_q.len());
    for (i, &[c0, c1]) in problem.unary_q.iter().enumerate() {
        let m = c0.min(c1);
        if c0 - m > 0 {
            b.add_edge(source, i, c0 - m, 0);
        }
        if c1 - m > 0 {
            b.add_edge(i, sink, c1 - m, 0);
        }
    }
    for &(i, j, c) in &problem.pairs_q {
        b.add_edge(i as usize, j as usize, c, c);
    }
    let mut g = b.build();
    g.max_flow(source, sink);
    let reach = g.source_side(source);
    let coreach = g.sink_side(sink);

    let mut minimal_set = datum.clone();
    let mut maximal_set = datum.clone();
    for (k, &x) in problem.free.iter().enumerate() {
        minimal_set.occupancy[x] = reach[k];
        maximal_set.occupancy[x] = !coreach[k];
    }
    let optimal_value = perimeter(table, &minimal_set, &problem.omega)?.total;
    let maximal_value = perimeter(table, &maximal_set, &problem.omega)?.total;
    Ok(MinimiserPair { optimal_value, maximal_value, minimal_set, maximal_set, gap_bound: problem.gap_bound })
}

/// Builds and solves the cut problem for `datum` in `omega`.
pub fn minimise(table: &WeightTable, datum: &SetConfig, omega: &Region, scale: u64) -> Result<MinimiserPair> {
    let p = build_cut_problem(table, datum, omega, scale)?;
    solve_mincut(table, &p)
}

/// Exhaustive minimisation over all occupancies of `omega`.
#[derive(Clone, Debug)]
pub struct BruteForce {
    pub value: f64,
    /// Every configuration within [`ENERGY_RTOL`] of the minimum, in enumeration order.
    pub optima: Vec<SetConfig>,
}

impl BruteForce {
    pub fn intersection(&self) -> SetConfig {
        self.optima[1..].iter().fold(self.optima[0].clone(), |acc, e| acc.intersection(e))
    }

    pub fn union(&self) -> SetConfig {
        self.optima[1..].iter().fold(self.optima[0].clone(), |acc, e| acc.union(e))
    }
}

pub fn brute_force(table: &WeightTable, datum: &SetConfig, omega: &Region, limit: usize) -> Result<BruteForce> {
    let lat = table.lattice();
    lat.check_region(omega)?;
    let free = omega.indices();
    let n = free.len();
    if n > limit || n > 62 {
        return Err(Error::TooManyFreeCells { limit, got: n });
    }
    // Energy of a labelling: interaction of each free cell with everything
    // fixed outside omega, plus disagreeing free pairs.
    let mut outside = vec![[0.0f64; 2]; n];
    for (k, &x) in free.iter().enumerate() {
        let mut with = [KahanSum::new(), KahanSum::new()];
        for y in 0..lat.len() {
            if omega.contains(y) {
                continue;
            }
            let chi = if datum.occupancy[y] { 1.0 } else { 0.0 };
            let w = table.weight_idx(x, y);
            with[0].add(w * (0.0f64 - chi).abs());
            with[1].add(w * (1.0f64 - chi).abs());
        }
        if let Some(t) = table.tail_term(x) {
            let chi = datum.ambient.indicator();
            with[0].add(t * chi);
            with[1].add(t * (1.0 - chi));
        }
        outside[k] = [with[0].value(), with[1].value()];
    }
    let mut pair = vec![0.0f64; n * n];
    for a in 0..n {
        for b in 0..n {
            pair[a * n + b] = table.weight_idx(free[a], free[b]);
        }
    }
    let energy = |mask: u64| -> f64 {
        let mut acc = KahanSum::new();
        for a in 0..n {
            let la = (mask >> a) & 1;
            acc.add(outside[a][la as usize]);
            for b in a + 1..n {
                if la != (mask >> b) & 1 {
                    acc.add(pair[a * n + b]);
                }
            }
        }
        acc.value()
    };
    let energies: Vec<f64> = (0..1u64 << n).into_par_iter().map(energy).collect();
    let value = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let optima = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| energies_match(e, value, ENERGY_RTOL))
        .map(|(mask, _)| {
            let mut set = datum.clone();
            for (k, &x) in free.iter().enumerate() {
                set.occupancy[x] = (mask >> k) & 1 == 1;
            }
            set
        })
        .collect();
    Ok(BruteForce { value, optima })
}

/// True iff unions and intersections of every pair of optima are optima too.
pub fn lattice_closure_check(table: &WeightTable, optima: &[SetConfig], omega: &Region) -> Result<bool> {
    let Some(first) = optima.first() else {
        return Ok(true);
    };
    if let Some(bad) = optima.iter().position(|e| !e.agrees_outside(first, omega)) {
        return Err(Error::DatumMismatch(format!("optimum {bad} differs from optimum 0 outside the domain")));
    }
    let values = optima
        .iter()
        .map(|e| perimeter(table, e, omega).map(|b| b.total))
        .collect::<Result<Vec<_>>>()?;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    for (i, e) in optima.iter().enumerate() {
        for f in &optima[i + 1..] {
            for g in [e.union(f), e.intersection(f)] {
                let v = perimeter(table, &g, omega)?.total;
                if !energies_match(v, best, ENERGY_RTOL) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Serializable view of a [`MinimiserPair`] summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimiserSummary {
    pub optimal_value: f64,
    pub maximal_value: f64,
    pub gap_bound: f64,
    pub minimal_volume: usize,
    pub maximal_volume: usize,
}

impl MinimiserPair {
    pub fn summary(&self, omega: &Region) -> MinimiserSummary {
        MinimiserSummary {
            optimal_value: self.optimal_value,
            maximal_value: self.maximal_value,
            gap_bound: self.gap_bound,
            minimal_volume: self.minimal_set.volume_in(omega),
            maximal_volume: self.maximal_set.volume_in(omega),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CellId, Lattice, LatticeSpec};
    use approx::assert_relative_eq;

    const W2: f64 = 0.353_553_390_593_273_8;

    fn line() -> (Lattice, WeightTable) {
        let lat = Lattice::new(LatticeSpec::new_1d(-2, 2, 1.0, 0.5)).unwrap();
        let t = WeightTable::boxed(&lat);
        (lat, t)
    }

    fn cells(lat: &Lattice, c: &[i32]) -> Region {
        lat.region_from_cells(c.iter().map(|&i| CellId::new1(i))).unwrap()
    }

    #[test]
    fn build_single_free_cell() {
        let (lat, t) = line();
        let omega = cells(&lat, &[0]);
        let datum = SetConfig::from_region(&cells(&lat, &[1]), Ambient::Empty);
        let p = build_cut_problem(&t, &datum, &omega, DEFAULT_SCALE).unwrap();
        assert_eq!(p.unary.len(), 1);
        assert_eq!(p.unary[0][0], 1.0);
        assert_relative_eq!(p.unary[0][1], 1.0 + 2.0 * W2, max_relative = 1e-14);
        assert!(p.pairs_q.is_empty());
    }

    #[test]
    fn build_all_empty_and_pairs() {
        let (lat, t) = line();
        let omega = cells(&lat, &[0, 1]);
        let p = build_cut_problem(&t, &SetConfig::empty(&lat), &omega, DEFAULT_SCALE).unwrap();
        assert!(p.unary.iter().all(|u| u[0] == 0.0));
        assert_eq!(p.pairs_q.len(), 1);
        // Adjacent pair weight h^{1-s} = 1 at h = 1, quantized to the scale.
        assert_eq!(p.pairs_q[0].2 as u64, DEFAULT_SCALE);
    }

    #[test]
    fn scale_checks() {
        let (lat, t) = line();
        let omega = cells(&lat, &[0]);
        assert!(build_cut_problem(&t, &SetConfig::empty(&lat), &omega, 1000).is_err());
        assert!(matches!(
            build_cut_problem(&t, &SetConfig::empty(&lat), &omega, 1 << 62),
            Err(Error::ScaleOverflow { .. })
        ));
    }

    #[test]
    fn solve_single_free_cell() {
        let (lat, t) = line();
        let omega = cells(&lat, &[0]);
        let datum = SetConfig::from_region(&cells(&lat, &[1]), Ambient::Empty);
        let m = minimise(&t, &datum, &omega, DEFAULT_SCALE).unwrap();
        assert_eq!(m.minimal_set.volume_in(&omega), 0);
        assert_eq!(m.maximal_set.volume_in(&omega), 0);
        assert_eq!(m.optimal_value, 1.0);
        let bf = brute_force(&t, &datum, &omega, BRUTE_FORCE_LIMIT).unwrap();
        assert_eq!(bf.value, 1.0);
        assert_eq!(bf.optima, vec![datum]);
    }

    #[test]
    fn full_surroundings_fill() {
        let (lat, t) = line();
        let omega = cells(&lat, &[-1, 0, 1]);
        let mut datum = SetConfig::full(&lat);
        for i in omega.iter() {
            datum.occupancy[i] = false;
        }
        let m = minimise(&t, &datum, &omega, DEFAULT_SCALE).unwrap();
        assert_eq!(m.minimal_set, SetConfig::full(&lat));
        assert!(m.is_unique());
        assert_eq!(m.optimal_value, 0.0);
        let bf = brute_force(&t, &datum, &omega, BRUTE_FORCE_LIMIT).unwrap();
        assert_eq!(bf.optima, vec![SetConfig::full(&lat)]);
    }

    #[test]
    fn empty_domain_echoes_datum() {
        let (lat, t) = line();
        let datum = SetConfig::from_region(&cells(&lat, &[1, 2]), Ambient::Empty);
        let omega = lat.empty_region();
        let m = minimise(&t, &datum, &omega, DEFAULT_SCALE).unwrap();
        assert_eq!(m.minimal_set, datum);
        assert_eq!(m.optimal_value, perimeter(&t, &datum, &omega).unwrap().total);
    }

    #[test]
    fn symmetric_tie_gives_distinct_extremes() {
        // One free cell with one full and one empty neighbour at equal distance.
        let lat = Lattice::new(LatticeSpec::new_1d(-1, 1, 1.0, 0.5)).unwrap();
        let t = WeightTable::boxed(&lat);
        let omega = cells(&lat, &[0]);
        let datum = SetConfig::from_region(&cells(&lat, &[1]), Ambient::Empty);
        let m = minimise(&t, &datum, &omega, DEFAULT_SCALE).unwrap();
        assert_eq!(m.minimal_set.volume_in(&omega), 0);
        assert_eq!(m.maximal_set.volume_in(&omega), 1);
        let bf = brute_force(&t, &datum, &omega, 4).unwrap();
        assert_eq!(bf.optima.len(), 2);
        assert_eq!(bf.intersection(), m.minimal_set);
        assert_eq!(bf.union(), m.maximal_set);
        assert!(lattice_closure_check(&t, &bf.optima, &omega).unwrap());
    }

    #[test]
    fn closure_check_edge_cases() {
        let (lat, t) = line();
        let omega = cells(&lat, &[0]);
        let a = SetConfig::from_region(&cells(&lat, &[1]), Ambient::Empty);
        assert!(lattice_closure_check(&t, std::slice::from_ref(&a), &omega).unwrap());
        let b = SetConfig::from_region(&cells(&lat, &[2]), Ambient::Empty);
        assert!(matches!(lattice_closure_check(&t, &[a, b], &omega), Err(Error::DatumMismatch(_))));
    }

    #[test]
    fn brute_force_limit() {
        let (lat, t) = line();
        assert!(matches!(
            brute_force(&t, &SetConfig::empty(&lat), &lat.full_region(), 3),
            Err(Error::TooManyFreeCells { limit: 3, got: 5 })
        ));
    }
}
