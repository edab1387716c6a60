//! One function per subcommand. Each returns the text for standard output and
//! writes any files under `--out`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracper_core::energy::{g_energy, perimeter};
use fracper_core::experiments::{
    block_workload, ring_datum, sector_nonuniqueness, yin_yang_sweep, Sweep, SweepSetup,
};
use fracper_core::io::{func_to_json, level_manifest, minimiser_to_json, region_to_pgm};
use fracper_core::lattice::{diameter, ring_region};
use fracper_core::levelset::{assemble_function, build_level_family_checked};
use fracper_core::optimise::{minimise, BRUTE_FORCE_LIMIT, DEFAULT_SCALE};
use fracper_core::verify::{run_all, VerifyConfig, VerifyReport};
use fracper_core::{AmbientConfig, EvalStrategy, Error, Lattice, Region, Result, SetConfig, WeightTable};
use serde::Serialize;

use crate::config::RunConfig;

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub ambient: bool,
    pub snapshots: bool,
    pub max_free_cells: Option<usize>,
    pub inject_fault: bool,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string(v)? + "\n")
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn table(cfg: &RunConfig, lat: &Lattice, opts: &Options) -> Result<WeightTable> {
    let ambient = if opts.ambient { cfg.ambient.to_config() } else { AmbientConfig::boxed() };
    WeightTable::new(lat, EvalStrategy::CachedByOffset, ambient)
}

fn scale(cfg: &RunConfig) -> u64 {
    cfg.scale.unwrap_or(DEFAULT_SCALE)
}

fn snapshot(dir: &Path, name: &str, lat: &Lattice, set: &SetConfig) -> Result<()> {
    if lat.dim() == 2 {
        write_file(dir, name, &region_to_pgm(lat, &set.region())?)?;
    }
    Ok(())
}

pub fn energy(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let lat = cfg.lattice()?;
    let omega = cfg.domain(&lat)?;
    let table = table(cfg, &lat, opts)?;
    let e = if cfg.function.is_some() {
        g_energy(&table, &cfg.func_datum(&lat)?, &omega)?
    } else {
        perimeter(&table, &cfg.set_datum(&lat)?, &omega)?
    };
    to_json(&e)
}

pub fn minimise_cmd(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let lat = cfg.lattice()?;
    let omega = cfg.domain(&lat)?;
    let table = table(cfg, &lat, opts)?;
    let m = minimise(&table, &cfg.set_datum(&lat)?, &omega, scale(cfg))?;
    let text = to_json(&minimiser_to_json(&lat, &m))?;
    if let Some(dir) = &opts.out {
        write_file(dir, "minimiser.json", text.as_bytes())?;
        snapshot(dir, "minimal.pgm", &lat, &m.minimal_set)?;
        snapshot(dir, "maximal.pgm", &lat, &m.maximal_set)?;
    }
    Ok(text)
}

#[derive(Serialize)]
struct LevelOutput {
    /// The common value of the function on the domain, if it is constant there.
    constant_on_domain: Option<f64>,
    manifest: Vec<fracper_core::io::LevelEntry>,
    function: fracper_core::io::FuncJson,
}

pub fn levelset(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let lat = cfg.lattice()?;
    let omega = cfg.domain(&lat)?;
    let table = table(cfg, &lat, opts)?;
    let phi = cfg.func_datum(&lat)?;
    let family = build_level_family_checked(&table, &phi, &omega, scale(cfg), opts.inject_fault)?;
    let u = assemble_function(&family, &phi, &omega);
    let inside: Vec<f64> = omega.iter().map(|i| u.values[i]).collect();
    let constant_on_domain = match inside.first() {
        Some(&v) if inside.iter().all(|&w| w == v) => Some(v),
        _ => None,
    };
    let manifest = level_manifest(&family, &omega);
    if let Some(dir) = &opts.out {
        write_file(dir, "manifest.json", to_json(&manifest)?.as_bytes())?;
        write_file(dir, "function.json", to_json(&func_to_json(&lat, &u))?.as_bytes())?;
        for (k, set) in family.sets.iter().enumerate() {
            snapshot(dir, &format!("level_{k:03}.pgm"), &lat, set)?;
        }
    }
    to_json(&LevelOutput { constant_on_domain, manifest, function: func_to_json(&lat, &u) })
}

pub fn verify(cfg: &RunConfig, opts: &Options) -> Result<(String, VerifyReport)> {
    let mut vc = VerifyConfig::default();
    if let Some(def) = &cfg.verify {
        def.apply(&mut vc);
    }
    if let Some(seed) = opts.seed {
        vc.seed = seed;
    }
    if let Some(n) = opts.max_free_cells {
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::TooManyFreeCells { limit: BRUTE_FORCE_LIMIT, got: n });
        }
        vc.max_free_cells = n;
    }
    vc.scale = scale(cfg);
    let report = run_all(&vc)?;
    let text = to_json(&report)?;
    if let Some(dir) = &opts.out {
        write_file(dir, "verify.json", text.as_bytes())?;
    }
    Ok((text, report))
}

#[derive(Serialize)]
struct ThetaRow {
    mode: &'static str,
    s: f64,
    theta_diam: Option<f64>,
}

pub fn yinyang(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let lat = cfg.lattice()?;
    let omega = cfg.domain(&lat)?;
    let def = cfg.yinyang.as_ref().ok_or_else(|| Error::InvalidArgument("config has no \"yinyang\"".into()))?;
    let ambient = if opts.ambient { cfg.ambient.to_config() } else { AmbientConfig::boxed() };
    let setup = SweepSetup { lattice: &lat, omega: &omega, ambient, scale: scale(cfg) };
    let mut csv = String::new();
    let mut theta = Vec::new();
    for (k, &mode) in def.modes.iter().enumerate() {
        let sweep: Sweep = yin_yang_sweep(&setup, &def.widths, &def.s_values, mode)?;
        let body = sweep.to_csv();
        csv.push_str(if k == 0 { &body } else { body.split_once('\n').map_or("", |x| x.1) });
        theta.extend(sweep.theta.iter().map(|&(s, w)| ThetaRow { mode: mode.as_str(), s, theta_diam: w }));
        if let (Some(dir), true) = (&opts.out, opts.snapshots) {
            let d = diameter(&lat, &omega)?;
            for r in &sweep.records {
                let table = WeightTable::new(&lat.with_s(r.s)?, EvalStrategy::CachedByOffset, ambient)?;
                let ring = ring_region(&lat, &omega, r.width_diam * d)?;
                let m = minimise(&table, &ring_datum(&lat, &omega, &ring, mode), &omega, setup.scale)?;
                let name = format!("{}_s{}_w{}.pgm", mode.as_str().to_lowercase(), r.s, r.width_diam);
                snapshot(dir, &name, &lat, &m.maximal_set)?;
            }
        }
    }
    if let Some(dir) = &opts.out {
        write_file(dir, "sweep.csv", csv.as_bytes())?;
        write_file(dir, "theta.json", to_json(&theta)?.as_bytes())?;
    }
    Ok(csv)
}

pub fn sector(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let def = cfg.sector.clone().unwrap_or_default();
    let limit = opts.max_free_cells.unwrap_or(16).min(BRUTE_FORCE_LIMIT);
    let run = sector_nonuniqueness(def.h, def.s, def.datum, scale(cfg), limit)?;
    let text = to_json(&run.report)?;
    if let Some(dir) = &opts.out {
        write_file(dir, "sector.json", text.as_bytes())?;
        snapshot(dir, "minimal.pgm", &run.lattice, &run.pair.minimal_set)?;
        snapshot(dir, "maximal.pgm", &run.lattice, &run.pair.maximal_set)?;
    }
    Ok(text)
}

/// Wall-clock timings; the only output that is not reproducible.
pub fn bench(cfg: &RunConfig, opts: &Options) -> Result<String> {
    let def = cfg.bench.clone().unwrap_or_default();
    let mut csv = String::from("stage,n_cells,millis\n");
    for &n in &def.sizes {
        let (lat, omega): (Lattice, Region) = block_workload(n, def.pad, def.h, def.s)?;
        let t = Instant::now();
        let table = WeightTable::boxed(&lat);
        let _ = writeln!(csv, "kernel_fill,{n},{}", t.elapsed().as_millis());
        // Exterior full on the left half only, so the cut is not trivial.
        let mid = (lat.lo()[0] + lat.hi()[0]) / 2;
        let left = Region::from_mask((0..lat.len()).map(|i| lat.coords(i)[0] < mid).collect());
        let datum = SetConfig::from_region(&left.difference(&omega), Default::default());
        let t = Instant::now();
        perimeter(&table, &datum, &omega)?;
        let _ = writeln!(csv, "energy,{n},{}", t.elapsed().as_millis());
        let t = Instant::now();
        minimise(&table, &datum, &omega, scale(cfg))?;
        let _ = writeln!(csv, "mincut,{n},{}", t.elapsed().as_millis());
    }
    if let Some(dir) = &opts.out {
        write_file(dir, "bench.csv", csv.as_bytes())?;
    }
    Ok(csv)
}
