//! Finite computational grid and region algebra.
//!
//! Cells are axis-aligned cubes of side `h` centred at `index * h`. A cell
//! belongs to a geometric region when its centre does; cells are never split.
//! One-dimensional lattices store their single index in the first slot of a
//! [`CellId`] and keep the second slot at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization universe: dimension, spacing, box extent and fractional order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dim: usize,
    pub h: f64,
    /// Inclusive `[lo, hi]` index range per axis.
    pub extent: Vec<[i32; 2]>,
    pub s: f64,
}

impl LatticeSpec {
    pub fn new_1d(lo: i32, hi: i32, h: f64, s: f64) -> Self {
        Self { dim: 1, h, extent: vec![[lo, hi]], s }
    }

    pub fn new_2d(x: [i32; 2], y: [i32; 2], h: f64, s: f64) -> Self {
        Self { dim: 2, h, extent: vec![x, y], s }
    }

    /// Square 2-D box `[-m, m]^2` with `m = round(half_width / h)`.
    pub fn square(half_width: f64, h: f64, s: f64) -> Self {
        let m = (half_width / h).round() as i32;
        Self::new_2d([-m, m], [-m, m], h, s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::InvalidLattice(format!("dimension {} unsupported", self.dim)));
        }
        if self.extent.len() != self.dim {
            return Err(Error::InvalidLattice(format!(
                "{} axis ranges for dimension {}",
                self.extent.len(),
                self.dim
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidLattice(format!("spacing h = {} must be positive", self.h)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidLattice(format!("s = {} outside (0, 1)", self.s)));
        }
        for (axis, r) in self.extent.iter().enumerate() {
            if r[0] > r[1] {
                return Err(Error::InvalidLattice(format!("empty extent on axis {axis}")));
            }
        }
        Ok(())
    }
}

/// Per-axis integer index of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(pub [i32; 2]);

impl CellId {
    pub fn new1(i: i32) -> Self {
        CellId([i, 0])
    }

    pub fn new2(i: i32, j: i32) -> Self {
        CellId([i, j])
    }
}

/// A validated [`LatticeSpec`] with precomputed box geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    spec: LatticeSpec,
    lo: [i32; 2],
    shape: [usize; 2],
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let mut lo = [0; 2];
        let mut shape = [1; 2];
        for (axis, r) in spec.extent.iter().enumerate() {
            lo[axis] = r[0];
            shape[axis] = (r[1] - r[0]) as usize + 1;
        }
        Ok(Self { spec, lo, shape })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn s(&self) -> f64 {
        self.spec.s
    }

    /// Same box with a different fractional order.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Lattice::new(LatticeSpec { s, ..self.spec.clone() })
    }

    /// Number of box cells.
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells per axis; the second entry is 1 in dimension 1.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn lo(&self) -> [i32; 2] {
        self.lo
    }

    pub fn hi(&self) -> [i32; 2] {
        [
            self.lo[0] + self.shape[0] as i32 - 1,
            self.lo[1] + self.shape[1] as i32 - 1,
        ]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [i32; 2] {
        [
            self.lo[0] + (idx % self.shape[0]) as i32,
            self.lo[1] + (idx / self.shape[0]) as i32,
        ]
    }

    #[inline]
    pub fn cell(&self, idx: usize) -> CellId {
        CellId(self.coords(idx))
    }

    pub fn index(&self, cell: CellId) -> Option<usize> {
        let [i, j] = cell.0;
        let di = i - self.lo[0];
        let dj = j - self.lo[1];
        if di < 0 || dj < 0 || di as usize >= self.shape[0] || dj as usize >= self.shape[1] {
            return None;
        }
        Some(di as usize + dj as usize * self.shape[0])
    }

    #[inline]
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.coords(idx);
        [i as f64 * self.spec.h, j as f64 * self.spec.h]
    }

    /// Lower and upper box faces in length units, per axis.
    pub fn box_bounds(&self) -> [[f64; 2]; 2] {
        let h = self.spec.h;
        let hi = self.hi();
        let mut b = [[0.0; 2]; 2];
        for axis in 0..self.dim() {
            b[axis] = [(self.lo[axis] as f64 - 0.5) * h, (hi[axis] as f64 + 0.5) * h];
        }
        b
    }

    pub fn full_region(&self) -> Region {
        Region::full(self.len())
    }

    pub fn empty_region(&self) -> Region {
        Region::empty(self.len())
    }

    pub fn region_from_cells<I: IntoIterator<Item = CellId>>(&self, cells: I) -> Result<Region> {
        let mut r = self.empty_region();
        for c in cells {
            let idx = self
                .index(c)
                .ok_or_else(|| Error::RegionOutsideBox(format!("cell {:?}", c.0)))?;
            r.insert(idx);
        }
        Ok(r)
    }

    pub fn check_region(&self, r: &Region) -> Result<()> {
        if r.box_len() != self.len() {
            return Err(Error::RegionOutsideBox(format!(
                "region addresses {} cells, box has {}",
                r.box_len(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// Subset of box cells, stored as a membership mask over box indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    mask: Vec<bool>,
}

impl Region {
    pub fn empty(box_len: usize) -> Self {
        Self { mask: vec![false; box_len] }
    }

    pub fn full(box_len: usize) -> Self {
        Self { mask: vec![true; box_len] }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(box_len: usize, it: I) -> Self {
        let mut r = Self::empty(box_len);
        for i in it {
            r.insert(i);
        }
        r
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn box_len(&self) -> usize {
        self.mask.len()
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn insert(&mut self, idx: usize) {
        self.mask[idx] = true;
    }

    pub fn remove(&mut self, idx: usize) {
        self.mask[idx] = false;
    }

    /// Number of member cells.
    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    fn zip_with(&self, other: &Region, f: impl Fn(bool, bool) -> bool) -> Region {
        assert_eq!(self.box_len(), other.box_len(), "regions from different boxes");
        Region {
            mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.zip_with(other, |a, b| a && !b)
    }

    /// Complement within the box.
    pub fn complement(&self) -> Region {
        Region { mask: self.mask.iter().map(|&b| !b).collect() }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        assert_eq!(self.box_len(), other.box_len(), "regions from different boxes");
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.intersection(other).is_empty()
    }
}

/// The whole box as a region; fails on an invalid spec.
pub fn build_box(spec: &LatticeSpec) -> Result<Region> {
    Ok(Lattice::new(spec.clone())?.full_region())
}

/// Box cells whose centres lie in the closed Euclidean ball.
pub fn ball_region(lattice: &Lattice, center: &[f64], radius: f64) -> Result<Region> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    if center.len() != lattice.dim() {
        return Err(Error::InvalidArgument(format!(
            "center has {} coordinates, lattice dimension is {}",
            center.len(),
            lattice.dim()
        )));
    }
    let c = [center[0], center.get(1).copied().unwrap_or(0.0)];
    let r2 = radius * radius;
    Ok(Region::from_mask(
        (0..lattice.len())
            .map(|idx| {
                let p = lattice.center(idx);
                let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                dx * dx + dy * dy <= r2
            })
            .collect(),
    ))
}

/// Cells outside `omega` whose centre is closer than `width` to some centre of `omega`.
pub fn ring_region(lattice: &Lattice, omega: &Region, width: f64) -> Result<Region> {
    lattice.check_region(omega)?;
    if !(width > 0.0) {
        return Err(Error::InvalidArgument(format!("ring width {width} must be positive")));
    }
    let members: Vec<[f64; 2]> = omega.iter().map(|i| lattice.center(i)).collect();
    let w2 = width * width;
    Ok(Region::from_mask(
        (0..lattice.len())
            .map(|idx| {
                if omega.contains(idx) {
                    return false;
                }
                let p = lattice.center(idx);
                members.iter().any(|q| {
                    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                    dx * dx + dy * dy < w2
                })
            })
            .collect(),
    ))
}

/// Largest centre-to-centre distance in `omega` plus one cell spacing.
pub fn diameter(lattice: &Lattice, omega: &Region) -> Result<f64> {
    lattice.check_region(omega)?;
    let pts: Vec<[f64; 2]> = omega.iter().map(|i| lattice.center(i)).collect();
    if pts.is_empty() {
        return Err(Error::InvalidArgument("diameter of an empty region".into()));
    }
    let mut best = 0.0f64;
    for (k, p) in pts.iter().enumerate() {
        for q in &pts[k + 1..] {
            let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
            best = best.max(dx * dx + dy * dy);
        }
    }
    Ok(best.sqrt() + lattice.h())
}

/// Symmetries of the index lattice about the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Isometry {
    Identity,
    /// Quarter turn, anticlockwise.
    Rot90,
    Rot180,
    Rot270,
    /// `(i, j) -> (i, -j)`; in dimension 1 this is the identity.
    ReflectX,
    /// `(i, j) -> (-i, j)`; in dimension 1 this is `i -> -i`.
    ReflectY,
    /// `(i, j) -> (j, i)`.
    ReflectDiagonal,
}

impl Isometry {
    pub fn apply(self, c: CellId) -> CellId {
        let [i, j] = c.0;
        CellId(match self {
            Isometry::Identity => [i, j],
            Isometry::Rot90 => [-j, i],
            Isometry::Rot180 => [-i, -j],
            Isometry::Rot270 => [j, -i],
            Isometry::ReflectX => [i, -j],
            Isometry::ReflectY => [-i, j],
            Isometry::ReflectDiagonal => [j, i],
        })
    }

    fn valid_in(self, dim: usize) -> bool {
        dim == 2 || matches!(self, Isometry::Identity | Isometry::ReflectX | Isometry::ReflectY | Isometry::Rot180)
    }

    /// Image of a per-cell field, or an error if the box is not mapped onto itself.
    pub fn map_field<T: Copy>(self, lattice: &Lattice, field: &[T]) -> Result<Vec<T>> {
        if !self.valid_in(lattice.dim()) {
            return Err(Error::IsometryMismatch(format!("{self:?} in dimension {}", lattice.dim())));
        }
        let mut out: Vec<Option<T>> = vec![None; lattice.len()];
        for (idx, v) in field.iter().enumerate() {
            let mut img = self.apply(lattice.cell(idx));
            if lattice.dim() == 1 {
                img.0[1] = 0;
            }
            let target = lattice
                .index(img)
                .ok_or_else(|| Error::IsometryMismatch(format!("{self:?} moves cells out of the box")))?;
            out[target] = Some(*v);
        }
        Ok(out.into_iter().map(|v| v.expect("bijection on the box")).collect())
    }

    pub fn map_region(self, lattice: &Lattice, r: &Region) -> Result<Region> {
        Ok(Region::from_mask(self.map_field(lattice, r.mask())?))
    }
}
