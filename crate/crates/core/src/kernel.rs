//! Singular interaction weights between lattice cells.
//!
//! Two distinct cells interact with the midpoint weight
//! `h^{2n} * (h |a - b|)^{-(n + s)}`; a cell does not interact with itself.
//! The weight only depends on the index offset, so the default strategy
//! tabulates it once per offset. Interactions with the region beyond the box
//! are folded into a unary per-cell tail (see [`WeightTable::ambient_tail`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CellId, Lattice};
use crate::sum::KahanSum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStrategy {
    OnTheFly,
    #[default]
    CachedByOffset,
}

/// What lies beyond the box.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientMode {
    /// Empty far field; tails are identically zero.
    Empty,
    /// Full far field; tails are integrated.
    Full,
    /// Beyond-box interactions are forbidden (boxed energies).
    #[default]
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbientConfig {
    pub mode: AmbientMode,
    /// Outer radius of the quadrature shell, in box half-widths.
    pub kappa: f64,
    /// Each quadrature cell is split `2^refine` times per axis.
    pub refine: u32,
}

impl Default for AmbientConfig {
    fn default() -> Self {
        Self { mode: AmbientMode::None, kappa: 4.0, refine: 2 }
    }
}

impl AmbientConfig {
    pub fn boxed() -> Self {
        Self::default()
    }

    pub fn with_mode(mode: AmbientMode) -> Self {
        Self { mode, ..Self::default() }
    }
}

/// Surface measure of the unit sphere in dimension 1 or 2.
pub fn unit_sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => unreachable!("dimension checked by the lattice"),
    }
}

#[inline]
fn raw_weight(h: f64, dim: usize, s: f64, dx: i64, dy: i64) -> f64 {
    if dx == 0 && dy == 0 {
        return 0.0;
    }
    let n = dim as f64;
    let dist = h * ((dx * dx + dy * dy) as f64).sqrt();
    h.powi(2 * dim as i32) * dist.powf(-(n + s))
}

/// Interaction weights for one lattice and one fractional order.
///
/// Immutable once built; the offset cache and the ambient tails are filled
/// eagerly so concurrent readers need no synchronisation.
#[derive(Clone, Debug)]
pub struct WeightTable {
    lattice: Lattice,
    strategy: EvalStrategy,
    ambient: AmbientConfig,
    offsets: Vec<f64>,
    off_shape: [usize; 2],
    tails: Option<Vec<f64>>,
}

impl WeightTable {
    pub fn new(lattice: &Lattice, strategy: EvalStrategy, ambient: AmbientConfig) -> Result<Self> {
        if ambient.mode == AmbientMode::Full {
            if !(ambient.kappa >= 2.0) {
                return Err(Error::InvalidArgument(format!("kappa = {} must be >= 2", ambient.kappa)));
            }
            if ambient.refine > 12 {
                return Err(Error::InvalidArgument(format!("refine = {} too large", ambient.refine)));
            }
        }
        let [nx, ny] = lattice.shape();
        let (h, dim, s) = (lattice.h(), lattice.dim(), lattice.s());
        let off_shape = [2 * nx - 1, 2 * ny - 1];
        let offsets = match strategy {
            EvalStrategy::CachedByOffset => (0..off_shape[0] * off_shape[1])
                .map(|k| {
                    let dx = (k % off_shape[0]) as i64 - (nx as i64 - 1);
                    let dy = (k / off_shape[0]) as i64 - (ny as i64 - 1);
                    raw_weight(h, dim, s, dx, dy)
                })
                .collect(),
            EvalStrategy::OnTheFly => Vec::new(),
        };
        let mut table = Self {
            lattice: lattice.clone(),
            strategy,
            ambient,
            offsets,
            off_shape,
            tails: None,
        };
        if ambient.mode == AmbientMode::Full {
            // The tail only depends on the cell's place in the box up to the
            // box's own reflections, so integrate one representative per orbit.
            let keys: Vec<usize> = (0..lattice.len()).map(|idx| tail_orbit_rep(lattice, idx)).collect();
            let mut reps = keys.clone();
            reps.sort_unstable();
            reps.dedup();
            let values: Vec<f64> = reps
                .par_iter()
                .map(|&idx| {
                    // Midpoint quadrature underestimates the convex kernel; never
                    // report less than the analytic bound.
                    let bound = table.tail_lower_bound(lattice.cell(idx));
                    table.integrate_tail(idx).max(bound)
                })
                .collect();
            let tails = keys
                .iter()
                .map(|k| values[reps.binary_search(k).expect("representative computed")])
                .collect();
            table.tails = Some(tails);
        }
        Ok(table)
    }

    /// Offset-cached table with boxed (no beyond-box) interactions.
    pub fn boxed(lattice: &Lattice) -> Self {
        Self::new(lattice, EvalStrategy::CachedByOffset, AmbientConfig::boxed())
            .expect("boxed tables have no failing parameters")
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn strategy(&self) -> EvalStrategy {
        self.strategy
    }

    pub fn ambient(&self) -> AmbientConfig {
        self.ambient
    }

    /// Weight for an index offset; zero for the zero offset.
    #[inline]
    pub fn offset_weight(&self, dx: i64, dy: i64) -> f64 {
        if self.strategy == EvalStrategy::CachedByOffset {
            let ox = dx + (self.off_shape[0] as i64 - 1) / 2;
            let oy = dy + (self.off_shape[1] as i64 - 1) / 2;
            if ox >= 0 && oy >= 0 && (ox as usize) < self.off_shape[0] && (oy as usize) < self.off_shape[1] {
                return self.offsets[ox as usize + oy as usize * self.off_shape[0]];
            }
        }
        raw_weight(self.lattice.h(), self.lattice.dim(), self.lattice.s(), dx, dy)
    }

    pub fn weight(&self, a: CellId, b: CellId) -> f64 {
        self.offset_weight((a.0[0] - b.0[0]) as i64, (a.0[1] - b.0[1]) as i64)
    }

    /// Weight between two box indices.
    #[inline]
    pub fn weight_idx(&self, a: usize, b: usize) -> f64 {
        let ca = self.lattice.coords(a);
        let cb = self.lattice.coords(b);
        self.offset_weight((ca[0] - cb[0]) as i64, (ca[1] - cb[1]) as i64)
    }

    /// Weight of nearest neighbours, the largest weight in the table.
    pub fn max_weight(&self) -> f64 {
        self.offset_weight(1, 0)
    }

    /// Weights of the cell at box index `a` against every box cell, in index order.
    pub fn row(&self, a: usize) -> Vec<f64> {
        let [nx, ny] = self.lattice.shape();
        let [ax, ay] = self.lattice.coords(a);
        let lo = self.lattice.lo();
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny as i32 {
            let dy = (ay - lo[1] - j) as i64;
            for i in 0..nx as i32 {
                out.push(self.offset_weight((ax - lo[0] - i) as i64, dy));
            }
        }
        out
    }

    /// Approximate integral of `|x_a - y|^{-(n+s)}` over all `y` beyond the box,
    /// never below [`WeightTable::tail_lower_bound`].
    ///
    /// Zero for an empty far field; an error when ambient interactions are forbidden.
    pub fn ambient_tail(&self, a: CellId) -> Result<f64> {
        match self.ambient.mode {
            AmbientMode::None => Err(Error::AmbientForbidden),
            AmbientMode::Empty => Ok(0.0),
            AmbientMode::Full => {
                let idx = self
                    .lattice
                    .index(a)
                    .ok_or_else(|| Error::RegionOutsideBox(format!("cell {:?}", a.0)))?;
                Ok(self.tails.as_ref().expect("tails filled for full mode")[idx])
            }
        }
    }

    /// Per-cell tail already multiplied by the cell volume, or `None` when the
    /// table carries no beyond-box interactions.
    #[inline]
    pub fn tail_term(&self, idx: usize) -> Option<f64> {
        self.tails
            .as_ref()
            .map(|t| t[idx] * self.lattice.h().powi(self.lattice.dim() as i32))
    }

    pub fn has_tails(&self) -> bool {
        self.tails.is_some()
    }

    /// Analytic lower bound `sigma(n) R_far^{-s} / s`, `R_far` being the
    /// distance from the cell centre to the farthest box corner.
    pub fn tail_lower_bound(&self, a: CellId) -> f64 {
        let lat = &self.lattice;
        let b = lat.box_bounds();
        let x = [a.0[0] as f64 * lat.h(), a.0[1] as f64 * lat.h()];
        let mut r2 = 0.0;
        for axis in 0..lat.dim() {
            let d = (x[axis] - b[axis][0]).abs().max((x[axis] - b[axis][1]).abs());
            r2 += d * d;
        }
        let s = lat.s();
        unit_sphere_measure(lat.dim()) * r2.sqrt().powf(-s) / s
    }

    /// Midpoint quadrature over `B(x, R) \ box` plus the exact integral over
    /// the complement of `B(x, R)`, with `R = kappa * half_width + |x - c|`.
    fn integrate_tail(&self, idx: usize) -> f64 {
        let lat = &self.lattice;
        let (h, s, dim) = (lat.h(), lat.s(), lat.dim());
        let b = lat.box_bounds();
        let x = lat.center(idx);
        let mut half_width = 0.0f64;
        let mut off2 = 0.0;
        for axis in 0..dim {
            half_width = half_width.max(0.5 * (b[axis][1] - b[axis][0]));
            let c = 0.5 * (b[axis][0] + b[axis][1]);
            off2 += (x[axis] - c) * (x[axis] - c);
        }
        let radius = self.ambient.kappa * half_width + off2.sqrt();
        let remainder = unit_sphere_measure(dim) * radius.powf(-s) / s;
        let expo = -(dim as f64 + s);
        let half_expo = 0.5 * expo;
        let split = 1usize << self.ambient.refine;

        let mut acc = KahanSum::new();
        if dim == 1 {
            for (a, z) in [(x[0] - radius, b[0][0]), (b[0][1], x[0] + radius)] {
                let len = z - a;
                if len <= 0.0 {
                    continue;
                }
                let pieces = ((len / h).ceil() as usize).max(1) * split;
                let step = len / pieces as f64;
                for k in 0..pieces {
                    let y = a + (k as f64 + 0.5) * step;
                    acc.add((x[0] - y).abs().powf(expo) * step);
                }
            }
        } else {
            let step = h / split as f64;
            let kmin = ((x[0] - radius - b[0][0]) / step).floor() as i64;
            let kmax = ((x[0] + radius - b[0][0]) / step).ceil() as i64;
            let lmin = ((x[1] - radius - b[1][0]) / step).floor() as i64;
            let lmax = ((x[1] + radius - b[1][0]) / step).ceil() as i64;
            let r2 = radius * radius;
            let area = step * step;
            for l in lmin..lmax {
                let y1 = b[1][0] + (l as f64 + 0.5) * step;
                let inside_rows = y1 > b[1][0] && y1 < b[1][1];
                let dy = y1 - x[1];
                for k in kmin..kmax {
                    let y0 = b[0][0] + (k as f64 + 0.5) * step;
                    if inside_rows && y0 > b[0][0] && y0 < b[0][1] {
                        continue;
                    }
                    let dx = y0 - x[0];
                    let d2 = dx * dx + dy * dy;
                    if d2 < r2 {
                        acc.add(d2.powf(half_expo) * area);
                    }
                }
            }
        }
        acc.value() + remainder
    }
}

/// Index of the cell with the smallest index in `idx`'s orbit under the
/// reflections of the box (and the diagonal swap for square boxes).
fn tail_orbit_rep(lattice: &Lattice, idx: usize) -> usize {
    let [x, y] = lattice.coords(idx);
    let (lo, hi) = (lattice.lo(), lattice.hi());
    let square = lattice.dim() == 2 && hi[0] - lo[0] == hi[1] - lo[1];
    let mut best = idx;
    for fx in [false, true] {
        for fy in [false, true] {
            for swap in [false, true] {
                if swap && !square {
                    continue;
                }
                let mut u = if fx { lo[0] + hi[0] - x } else { x } - lo[0];
                let mut v = if fy { lo[1] + hi[1] - y } else { y } - lo[1];
                if swap {
                    std::mem::swap(&mut u, &mut v);
                }
                if let Some(j) = lattice.index(CellId([u + lo[0], v + lo[1]])) {
                    best = best.min(j);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table_1d(lo: i32, hi: i32, ambient: AmbientConfig) -> WeightTable {
        let lat = Lattice::new(LatticeSpec::new_1d(lo, hi, 1.0, 0.5)).unwrap();
        WeightTable::new(&lat, EvalStrategy::CachedByOffset, ambient).unwrap()
    }

    #[test]
    fn weight_examples() {
        let t = table_1d(-2, 2, AmbientConfig::boxed());
        assert_eq!(t.weight(CellId::new1(0), CellId::new1(1)), 1.0);
        assert_relative_eq!(t.weight(CellId::new1(0), CellId::new1(2)), 2f64.powf(-1.5), max_relative = 1e-15);
        assert_eq!(t.weight(CellId::new1(1), CellId::new1(1)), 0.0);
        let lat = Lattice::new(LatticeSpec::new_2d([-1, 1], [-1, 1], 1.0, 0.5)).unwrap();
        let t2 = WeightTable::boxed(&lat);
        let w = t2.weight(CellId::new2(0, 0), CellId::new2(1, 1));
        assert_relative_eq!(w, 0.420_448_207_626_856_6, max_relative = 1e-12);
        assert_relative_eq!(w, 2f64.powf(-1.25), max_relative = 1e-15);
    }

    #[test]
    fn shared_tails_match_direct_quadrature() {
        for spec in [LatticeSpec::new_2d([-3, 2], [-1, 4], 0.5, 0.4), LatticeSpec::new_2d([0, 3], [0, 2], 0.5, 0.7)] {
            let lat = Lattice::new(spec).unwrap();
            let t = WeightTable::new(&lat, EvalStrategy::CachedByOffset, AmbientConfig::with_mode(AmbientMode::Full)).unwrap();
            for idx in 0..lat.len() {
                let direct = t.integrate_tail(idx).max(t.tail_lower_bound(lat.cell(idx)));
                assert_relative_eq!(t.ambient_tail(lat.cell(idx)).unwrap(), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn strategies_agree_bitwise() {
        let lat = Lattice::new(LatticeSpec::new_2d([-3, 4], [-2, 2], 0.3, 0.7)).unwrap();
        let cached = WeightTable::boxed(&lat);
        let fly = WeightTable::new(&lat, EvalStrategy::OnTheFly, AmbientConfig::boxed()).unwrap();
        for a in 0..lat.len() {
            for b in 0..lat.len() {
                assert_eq!(cached.weight_idx(a, b).to_bits(), fly.weight_idx(a, b).to_bits());
            }
            assert_eq!(cached.row(a), (0..lat.len()).map(|b| fly.weight_idx(a, b)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn nearest_neighbour_is_max_weight() {
        let lat = Lattice::new(LatticeSpec::square(1.0, 0.25, 0.3)).unwrap();
        let t = WeightTable::boxed(&lat);
        // h^{n-s} for nearest neighbours.
        assert_relative_eq!(t.max_weight(), 0.25f64.powf(2.0 - 0.3), max_relative = 1e-14);
    }

    #[test]
    fn ambient_modes() {
        let boxed = table_1d(-2, 2, AmbientConfig::boxed());
        assert!(matches!(boxed.ambient_tail(CellId::new1(0)), Err(Error::AmbientForbidden)));
        let empty = table_1d(-2, 2, AmbientConfig::with_mode(AmbientMode::Empty));
        assert_eq!(empty.ambient_tail(CellId::new1(0)).unwrap(), 0.0);
        assert!(!empty.has_tails());
    }

    #[test]
    fn tail_1d_matches_closed_form() {
        let exact = 4.0 / 2.5f64.sqrt();
        let t = table_1d(-2, 2, AmbientConfig { mode: AmbientMode::Full, kappa: 4.0, refine: 6 });
        let v = t.ambient_tail(CellId::new1(0)).unwrap();
        assert!((v - exact).abs() / exact < 0.02, "{v} vs {exact}");
    }

    #[test]
    fn tail_1d_error_shrinks_with_refinement() {
        // Off-centre cell: exact integral over (-inf, -2.5] U [2.5, inf) seen from x = 1.
        let exact = 2.0 / 3.5f64.sqrt() + 2.0 / 1.5f64.sqrt();
        let mut last = f64::INFINITY;
        for r in 0..=6 {
            let t = table_1d(-2, 2, AmbientConfig { mode: AmbientMode::Full, kappa: 4.0, refine: r });
            let err = (t.ambient_tail(CellId::new1(1)).unwrap() - exact).abs();
            assert!(err < last, "refine {r}: {err} !< {last}");
            last = err;
        }
        assert!(last / exact < 0.02);
    }

    #[test]
    fn tail_asymmetric_placement() {
        let t = table_1d(-2, 2, AmbientConfig { mode: AmbientMode::Full, kappa: 4.0, refine: 4 });
        let corner = t.ambient_tail(CellId::new1(2)).unwrap();
        let centre = t.ambient_tail(CellId::new1(0)).unwrap();
        assert!(corner > centre);
    }

    #[test]
    fn tails_respect_lower_bound() {
        let lat = Lattice::new(LatticeSpec::square(1.0, 0.5, 0.4)).unwrap();
        let t = WeightTable::new(
            &lat,
            EvalStrategy::CachedByOffset,
            AmbientConfig { mode: AmbientMode::Full, kappa: 3.0, refine: 1 },
        )
        .unwrap();
        for idx in 0..lat.len() {
            let c = lat.cell(idx);
            assert!(t.ambient_tail(c).unwrap() >= t.tail_lower_bound(c));
        }
        let t1 = table_1d(-3, 3, AmbientConfig { mode: AmbientMode::Full, kappa: 2.0, refine: 0 });
        for i in -3..=3 {
            let c = CellId::new1(i);
            assert!(t1.ambient_tail(c).unwrap() >= t1.tail_lower_bound(c));
        }
    }

    #[test]
    fn row_sums_grow_to_a_limit() {
        // Total interaction of the centre cell with box plus far field.
        let mut prev = 0.0;
        for m in [2, 4, 8, 16, 32] {
            let t = table_1d(-m, m, AmbientConfig { mode: AmbientMode::Full, kappa: 4.0, refine: 4 });
            let lat = t.lattice();
            let c = lat.index(CellId::new1(0)).unwrap();
            let box_sum: f64 = t.row(c).iter().sum();
            let total = box_sum + t.tail_term(c).unwrap();
            let exact_box: f64 = (1..=m).map(|k| 2.0 * (k as f64).powf(-1.5)).sum();
            assert_relative_eq!(box_sum, exact_box, max_relative = 1e-12);
            assert!(box_sum > prev);
            prev = box_sum;
            // The tail-completed sum stays near the full lattice sum 2 zeta(1.5).
            assert!((total - 2.0 * 2.612_375_348_685_488).abs() < 0.35, "{total}");
        }
    }

    proptest! {
        #[test]
        fn symmetric_translation_invariant_decaying(
            s in 0.05f64..0.95,
            h in 0.1f64..2.0,
            ax in -5i32..5, ay in -5i32..5,
            bx in -5i32..5, by in -5i32..5,
            vx in -3i32..3, vy in -3i32..3,
        ) {
            let lat = Lattice::new(LatticeSpec::new_2d([-8, 8], [-8, 8], h, s)).unwrap();
            let t = WeightTable::boxed(&lat);
            let a = CellId::new2(ax, ay);
            let b = CellId::new2(bx, by);
            let w = t.weight(a, b);
            prop_assert_eq!(w.to_bits(), t.weight(b, a).to_bits());
            let shifted = t.weight(CellId::new2(ax + vx, ay + vy), CellId::new2(bx + vx, by + vy));
            prop_assert_eq!(w.to_bits(), shifted.to_bits());
            if a != b {
                prop_assert!(w > 0.0);
                // Moving b one step further away along x strictly lowers the weight.
                let step = if bx >= ax { 1 } else { -1 };
                prop_assert!(t.weight(a, CellId::new2(bx + step, by)) < w);
            }
        }
    }
}
