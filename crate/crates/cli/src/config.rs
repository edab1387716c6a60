//! JSON run configuration and its resolution against a lattice.

use std::collections::BTreeMap;
use std::path::Path;

use fracper_core::experiments::{SectorDatum, SweepMode};
use fracper_core::lattice::{ball_region, diameter, ring_region};
use fracper_core::verify::VerifyConfig;
use fracper_core::{
    Ambient, AmbientConfig, AmbientMode, Error, FuncConfig, Lattice, LatticeSpec, Region, Result, SetConfig,
};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: Option<LatticeDef>,
    #[serde(default)]
    pub regions: BTreeMap<String, RegionDef>,
    /// Name of the region playing the role of the domain.
    pub domain: Option<String>,
    pub set: Option<SetDef>,
    pub function: Option<FuncDef>,
    /// Used only with `--ambient`.
    #[serde(default)]
    pub ambient: AmbientDef,
    pub scale: Option<u64>,
    pub yinyang: Option<YinYangDef>,
    pub sector: Option<SectorDef>,
    pub verify: Option<VerifyDef>,
    pub bench: Option<BenchDef>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum LatticeDef {
    Square { square: SquareDef },
    Explicit(LatticeSpec),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareDef {
    pub half_width: f64,
    pub h: f64,
    pub s: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionDef {
    Box,
    Empty,
    Cells(Vec<Vec<i32>>),
    Ball { center: Vec<f64>, radius: f64 },
    /// Width in length units, or in diameters of `around` with `width_diam`.
    Ring { around: String, width: Option<f64>, width_diam: Option<f64> },
    /// Cells with `sign * center[axis] > 0`.
    HalfPlane { axis: usize, sign: f64 },
    /// Cells with `x * y > 0`.
    Quadrants {},
    Union(Vec<String>),
    Intersection(Vec<String>),
    Difference(String, String),
    Complement(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDef {
    pub region: String,
    #[serde(default)]
    pub ambient: Ambient,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuncDef {
    #[serde(default)]
    pub default: f64,
    #[serde(default)]
    pub ambient_value: f64,
    /// Applied in order; later pieces overwrite earlier ones.
    #[serde(default)]
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub region: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientDef {
    #[serde(default = "full_mode")]
    pub mode: AmbientMode,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_refine")]
    pub refine: u32,
}

fn full_mode() -> AmbientMode {
    AmbientMode::Full
}

fn default_kappa() -> f64 {
    AmbientConfig::default().kappa
}

fn default_refine() -> u32 {
    AmbientConfig::default().refine
}

impl Default for AmbientDef {
    fn default() -> Self {
        AmbientDef { mode: full_mode(), kappa: default_kappa(), refine: default_refine() }
    }
}

impl AmbientDef {
    pub fn to_config(self) -> AmbientConfig {
        AmbientConfig { mode: self.mode, kappa: self.kappa, refine: self.refine }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YinYangDef {
    /// Ring widths in diameters of the domain.
    pub widths: Vec<f64>,
    pub s_values: Vec<f64>,
    #[serde(default = "both_modes")]
    pub modes: Vec<SweepMode>,
}

fn both_modes() -> Vec<SweepMode> {
    vec![SweepMode::FullRingEmptyFar, SweepMode::EmptyRingFullFar]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorDef {
    #[serde(default = "half")]
    pub h: f64,
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "quadrants")]
    pub datum: SectorDatum,
}

fn half() -> f64 {
    0.5
}

fn quadrants() -> SectorDatum {
    SectorDatum::Quadrants
}

impl Default for SectorDef {
    fn default() -> Self {
        SectorDef { h: half(), s: half(), datum: quadrants() }
    }
}

/// Overrides for the property suites; missing fields keep their defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyDef {
    pub oracle_instances: Option<usize>,
    pub coarea_instances: Option<usize>,
    pub submodular_pairs: Option<usize>,
    pub closure_instances: Option<usize>,
    pub level_instances: Option<usize>,
    pub level_max_free_cells: Option<usize>,
    pub indicator_instances: Option<usize>,
    pub competitors_per_indicator: Option<usize>,
    pub splitting_instances: Option<usize>,
    pub cutoff_samples: Option<usize>,
}

impl VerifyDef {
    pub fn apply(&self, cfg: &mut VerifyConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { cfg.$f = v; })*};
        }
        set!(
            oracle_instances,
            coarea_instances,
            submodular_pairs,
            closure_instances,
            level_instances,
            level_max_free_cells,
            indicator_instances,
            competitors_per_indicator,
            splitting_instances,
            cutoff_samples
        );
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchDef {
    #[serde(default = "bench_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "bench_h")]
    pub h: f64,
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "bench_pad")]
    pub pad: i32,
}

fn bench_sizes() -> Vec<usize> {
    vec![512, 2048, 4608]
}

fn bench_h() -> f64 {
    0.05
}

fn bench_pad() -> i32 {
    2
}

impl Default for BenchDef {
    fn default() -> Self {
        BenchDef { sizes: bench_sizes(), h: bench_h(), s: half(), pad: bench_pad() }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn lattice(&self) -> Result<Lattice> {
        match &self.lattice {
            None => Err(Error::InvalidArgument("config has no \"lattice\"".into())),
            Some(LatticeDef::Explicit(spec)) => Lattice::new(spec.clone()),
            Some(LatticeDef::Square { square }) => {
                Lattice::new(LatticeSpec::square(square.half_width, square.h, square.s))
            }
        }
    }

    pub fn region(&self, lat: &Lattice, name: &str) -> Result<Region> {
        self.resolve(lat, name, 0)
    }

    pub fn domain(&self, lat: &Lattice) -> Result<Region> {
        let name = self.domain.as_deref().ok_or_else(|| Error::InvalidArgument("config has no \"domain\"".into()))?;
        self.region(lat, name)
    }

    pub fn set_datum(&self, lat: &Lattice) -> Result<SetConfig> {
        let def = self.set.as_ref().ok_or_else(|| Error::InvalidArgument("config has no \"set\"".into()))?;
        Ok(SetConfig::from_region(&self.region(lat, &def.region)?, def.ambient))
    }

    pub fn func_datum(&self, lat: &Lattice) -> Result<FuncConfig> {
        let def = self.function.as_ref().ok_or_else(|| Error::InvalidArgument("config has no \"function\"".into()))?;
        let mut u = FuncConfig::constant(lat, def.default);
        u.ambient_value = def.ambient_value;
        for p in &def.pieces {
            for i in self.region(lat, &p.region)?.iter() {
                u.values[i] = p.value;
            }
        }
        u.check_finite()?;
        Ok(u)
    }

    fn resolve(&self, lat: &Lattice, name: &str, depth: usize) -> Result<Region> {
        if depth > self.regions.len() {
            return Err(Error::InvalidArgument(format!("region \"{name}\" is defined in terms of itself")));
        }
        let def = self
            .regions
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown region \"{name}\"")))?;
        let sub = |n: &str| self.resolve(lat, n, depth + 1);
        let by_center = |f: &dyn Fn([f64; 2]) -> bool| {
            Region::from_mask((0..lat.len()).map(|i| f(lat.center(i))).collect())
        };
        Ok(match def {
            RegionDef::Box => lat.full_region(),
            RegionDef::Empty => lat.empty_region(),
            RegionDef::Cells(cells) => {
                let json = fracper_core::io::RegionJson {
                    dim: lat.dim(),
                    h: lat.h(),
                    extent: lat.spec().extent.clone(),
                    cells: cells.clone(),
                };
                fracper_core::io::region_from_json(lat, &json)?
            }
            RegionDef::Ball { center, radius } => ball_region(lat, center, *radius)?,
            RegionDef::Ring { around, width, width_diam } => {
                let omega = sub(around)?;
                let w = match (width, width_diam) {
                    (Some(w), None) => *w,
                    (None, Some(k)) => k * diameter(lat, &omega)?,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "ring \"{name}\" needs exactly one of width, width_diam"
                        )))
                    }
                };
                ring_region(lat, &omega, w)?
            }
            RegionDef::HalfPlane { axis, sign } => {
                if *axis >= lat.dim() {
                    return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
                }
                by_center(&|c| sign * c[*axis] > 0.0)
            }
            RegionDef::Quadrants {} => by_center(&|c| c[0] * c[1] > 0.0),
            RegionDef::Union(names) => {
                names.iter().try_fold(lat.empty_region(), |acc, n| Ok::<_, Error>(acc.union(&sub(n)?)))?
            }
            RegionDef::Intersection(names) => names
                .iter()
                .try_fold(lat.full_region(), |acc, n| Ok::<_, Error>(acc.intersection(&sub(n)?)))?,
            RegionDef::Difference(a, b) => sub(a)?.difference(&sub(b)?),
            RegionDef::Complement(a) => sub(a)?.complement(),
        })
    }
}
