//! JSON mirrors of regions, sets, functions and minimiser pairs, and binary
//! PGM (P5) bitmaps for 2-D regions.

use serde::{Deserialize, Serialize};

use crate::energy::{Ambient, FuncConfig, SetConfig};
use crate::error::{Error, Result};
use crate::lattice::{CellId, Lattice, Region};
use crate::levelset::LevelFamily;
use crate::optimise::MinimiserPair;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionJson {
    pub dim: usize,
    pub h: f64,
    pub extent: Vec<[i32; 2]>,
    /// One index vector per member cell, `[i]` or `[i, j]`.
    pub cells: Vec<Vec<i32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetJson {
    pub dim: usize,
    pub h: f64,
    pub extent: Vec<[i32; 2]>,
    pub cells: Vec<Vec<i32>>,
    pub ambient: Ambient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuncJson {
    pub dim: usize,
    pub h: f64,
    pub extent: Vec<[i32; 2]>,
    /// Every box cell, in box order.
    pub cells: Vec<Vec<i32>>,
    pub values: Vec<f64>,
    pub ambient_value: f64,
}

fn cell_vec(lat: &Lattice, idx: usize) -> Vec<i32> {
    let c = lat.coords(idx);
    c[..lat.dim()].to_vec()
}

fn check_header(lat: &Lattice, dim: usize, h: f64, extent: &[[i32; 2]]) -> Result<()> {
    let spec = lat.spec();
    if dim != spec.dim || h != spec.h || extent != spec.extent.as_slice() {
        return Err(Error::Format(format!(
            "lattice header (dim {dim}, h {h}, extent {extent:?}) does not match the box"
        )));
    }
    Ok(())
}

fn parse_cell(lat: &Lattice, v: &[i32]) -> Result<usize> {
    let id = match *v {
        [i] if lat.dim() == 1 => CellId::new1(i),
        [i, j] if lat.dim() == 2 => CellId::new2(i, j),
        _ => return Err(Error::Format(format!("cell {v:?} has the wrong dimension"))),
    };
    lat.index(id).ok_or_else(|| Error::RegionOutsideBox(format!("{v:?}")))
}

pub fn region_to_json(lat: &Lattice, r: &Region) -> RegionJson {
    let spec = lat.spec();
    RegionJson {
        dim: spec.dim,
        h: spec.h,
        extent: spec.extent.clone(),
        cells: r.iter().map(|i| cell_vec(lat, i)).collect(),
    }
}

pub fn region_from_json(lat: &Lattice, j: &RegionJson) -> Result<Region> {
    check_header(lat, j.dim, j.h, &j.extent)?;
    let idx = j.cells.iter().map(|c| parse_cell(lat, c)).collect::<Result<Vec<_>>>()?;
    Ok(Region::from_indices(lat.len(), idx))
}

pub fn set_to_json(lat: &Lattice, set: &SetConfig) -> SetJson {
    let r = region_to_json(lat, &set.region());
    SetJson { dim: r.dim, h: r.h, extent: r.extent, cells: r.cells, ambient: set.ambient }
}

pub fn set_from_json(lat: &Lattice, j: &SetJson) -> Result<SetConfig> {
    let r = region_from_json(
        lat,
        &RegionJson { dim: j.dim, h: j.h, extent: j.extent.clone(), cells: j.cells.clone() },
    )?;
    Ok(SetConfig::from_region(&r, j.ambient))
}

pub fn func_to_json(lat: &Lattice, u: &FuncConfig) -> FuncJson {
    let spec = lat.spec();
    FuncJson {
        dim: spec.dim,
        h: spec.h,
        extent: spec.extent.clone(),
        cells: (0..lat.len()).map(|i| cell_vec(lat, i)).collect(),
        values: u.values.clone(),
        ambient_value: u.ambient_value,
    }
}

/// Cells missing from the listing take the value 0.
pub fn func_from_json(lat: &Lattice, j: &FuncJson) -> Result<FuncConfig> {
    check_header(lat, j.dim, j.h, &j.extent)?;
    if j.cells.len() != j.values.len() {
        return Err(Error::Format(format!("{} cells but {} values", j.cells.len(), j.values.len())));
    }
    let mut u = FuncConfig::zeros(lat);
    u.ambient_value = j.ambient_value;
    for (c, &v) in j.cells.iter().zip(&j.values) {
        u.values[parse_cell(lat, c)?] = v;
    }
    u.check_finite()?;
    Ok(u)
}

/// Binary P5 bitmap, one pixel per cell, 255 for members. Rows run from the
/// largest `y` index down so the image has the usual orientation.
pub fn region_to_pgm(lat: &Lattice, r: &Region) -> Result<Vec<u8>> {
    if lat.dim() != 2 {
        return Err(Error::InvalidArgument("PGM export needs a 2-D box".into()));
    }
    let [nx, ny] = lat.shape();
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for row in (0..ny).rev() {
        for col in 0..nx {
            out.push(if r.contains(row * nx + col) { 255 } else { 0 });
        }
    }
    Ok(out)
}

/// Inverse of [`region_to_pgm`]; any non-zero pixel is a member.
pub fn region_from_pgm(lat: &Lattice, bytes: &[u8]) -> Result<Region> {
    let bad = |m: &str| Error::Format(format!("PGM: {m}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected an 8-bit P5 image"));
    }
    let [nx, ny] = lat.shape();
    let w: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("height"))?;
    if lat.dim() != 2 || w != nx || h != ny || bytes.len() < pos + w * h {
        return Err(bad("size does not match the box"));
    }
    let px = &bytes[pos..pos + w * h];
    let mut mask = vec![false; lat.len()];
    for (k, &p) in px.iter().enumerate() {
        let (row, col) = (ny - 1 - k / nx, k % nx);
        mask[row * nx + col] = p != 0;
    }
    Ok(Region::from_mask(mask))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimiserJson {
    pub optimal_value: f64,
    pub maximal_value: f64,
    pub gap_bound: f64,
    pub unique: bool,
    pub minimal_set: SetJson,
    pub maximal_set: SetJson,
}

pub fn minimiser_to_json(lat: &Lattice, m: &MinimiserPair) -> MinimiserJson {
    MinimiserJson {
        optimal_value: m.optimal_value,
        maximal_value: m.maximal_value,
        gap_bound: m.gap_bound,
        unique: m.is_unique(),
        minimal_set: set_to_json(lat, &m.minimal_set),
        maximal_set: set_to_json(lat, &m.maximal_set),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelEntry {
    pub threshold: f64,
    pub energy: f64,
    pub gap_bound: f64,
    pub volume_in_domain: usize,
}

/// Manifest of a level family: one entry per threshold, ascending.
pub fn level_manifest(family: &LevelFamily, omega: &Region) -> Vec<LevelEntry> {
    family
        .thresholds
        .iter()
        .enumerate()
        .map(|(k, &t)| LevelEntry {
            threshold: t,
            energy: family.energies[k],
            gap_bound: family.gap_bounds[k],
            volume_in_domain: family.sets[k].volume_in(omega),
        })
        .collect()
}
