//! Randomised property suites: oracle equivalence, co-area, submodularity
//! and closure of optima, level-set minimality, competitors, splitting and
//! cutoff stability.
//!
//! Each suite draws one sub-seed per instance from its own seed and runs the
//! instances in parallel; verdicts are merged in instance order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{coarea_check, cutoff, g_energy, g_tilde, perimeter, split_parts, FuncConfig};
use crate::error::Result;
use crate::kernel::{AmbientConfig, AmbientMode, EvalStrategy, WeightTable};
use crate::levelset::{
    assemble_function, build_level_family, competitor_test, verify_function_minimality, LevelOracle,
};
use crate::optimise::{brute_force, lattice_closure_check, minimise};
use crate::random::{
    random_competitor_func, random_competitor_set, random_func, random_instance, random_level_datum, random_set,
    rng_from_seed, sub_seeds, Instance, InstanceRng,
};

pub const S_CHOICES: [f64; 3] = [0.2, 0.5, 0.8];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    /// Largest observed violation measure (suite specific, 0 when exact).
    pub worst: f64,
}

impl SuiteResult {
    fn from_outcomes(name: &str, outcomes: &[(bool, f64)]) -> Self {
        let passed = outcomes.iter().filter(|o| o.0).count();
        SuiteResult {
            name: name.to_string(),
            passed,
            failed: outcomes.len() - passed,
            worst: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub max_free_cells: usize,
    pub scale: u64,
    pub oracle_instances: usize,
    pub coarea_instances: usize,
    pub submodular_pairs: usize,
    pub closure_instances: usize,
    pub level_instances: usize,
    pub level_max_free_cells: usize,
    pub indicator_instances: usize,
    pub competitors_per_indicator: usize,
    pub splitting_instances: usize,
    pub cutoff_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            max_free_cells: 14,
            scale: crate::optimise::DEFAULT_SCALE,
            oracle_instances: 200,
            coarea_instances: 500,
            submodular_pairs: 500,
            closure_instances: 100,
            level_instances: 100,
            level_max_free_cells: 12,
            indicator_instances: 50,
            competitors_per_indicator: 1000,
            splitting_instances: 500,
            cutoff_samples: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub suites: Vec<SuiteResult>,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Boxed table, or (one time in three) a table with computed far-field tails.
fn random_table(rng: &mut InstanceRng, inst: &Instance) -> Result<WeightTable> {
    if rng.gen_range(0..3) == 0 {
        WeightTable::new(&inst.lattice, EvalStrategy::CachedByOffset, AmbientConfig::with_mode(AmbientMode::Full))
    } else {
        Ok(WeightTable::boxed(&inst.lattice))
    }
}

fn run_suite<F>(name: &str, seed: u64, n: usize, f: F) -> Result<SuiteResult>
where
    F: Fn(&mut InstanceRng) -> Result<(bool, f64)> + Sync,
{
    let outcomes = sub_seeds(seed, n)
        .par_iter()
        .map(|&s| f(&mut rng_from_seed(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteResult::from_outcomes(name, &outcomes))
}

/// Min-cut value within `gap_bound + 1e-9` relative of enumeration, and the
/// minimal/maximal sets equal to the intersection/union of all optima.
pub fn oracle_equivalence(seed: u64, n: usize, max_free: usize, scale: u64) -> Result<SuiteResult> {
    run_suite("oracle_equivalence", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let table = WeightTable::boxed(&inst.lattice);
        let p = rng.gen_range(0.2..0.8);
        let datum = random_set(rng, &inst.lattice, p);
        let m = minimise(&table, &datum, &inst.omega, scale)?;
        let bf = brute_force(&table, &datum, &inst.omega, max_free)?;
        let diff = (m.optimal_value - bf.value).abs();
        let value_ok = diff <= m.gap_bound + 1e-9 * bf.value.abs().max(1.0);
        let sets_ok = m.minimal_set == bf.intersection() && m.maximal_set == bf.union();
        Ok((value_ok && sets_ok, relative_gap(m.optimal_value, bf.value)))
    })
}

pub fn coarea(seed: u64, n: usize, max_free: usize) -> Result<SuiteResult> {
    run_suite("coarea", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let table = random_table(rng, &inst)?;
        let u = random_func(rng, &inst.lattice);
        let c = coarea_check(&table, &u, &inst.omega)?;
        let err = (c.lhs - c.rhs).abs();
        Ok((err <= 1e-10 * c.lhs.max(1.0), err / c.lhs.max(1.0)))
    })
}

pub fn submodularity(seed: u64, n: usize, max_free: usize) -> Result<SuiteResult> {
    run_suite("submodularity", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let table = random_table(rng, &inst)?;
        let (lat, omega) = (&inst.lattice, &inst.omega);
        let e = random_set(rng, lat, 0.5);
        let f = random_set(rng, lat, 0.5);
        let lhs = perimeter(&table, &e.union(&f), omega)?.total + perimeter(&table, &e.intersection(&f), omega)?.total;
        let rhs = perimeter(&table, &e, omega)?.total + perimeter(&table, &f, omega)?.total;
        let excess = (lhs - rhs).max(0.0);
        Ok((excess <= 1e-10 * rhs.max(1.0), excess / rhs.max(1.0)))
    })
}

/// Union and intersection of any two enumerated optima are optima again.
pub fn closure(seed: u64, n: usize, max_free: usize) -> Result<SuiteResult> {
    run_suite("closure", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let table = WeightTable::boxed(&inst.lattice);
        let datum = random_set(rng, &inst.lattice, 0.5);
        let bf = brute_force(&table, &datum, &inst.omega, max_free)?;
        Ok((lattice_closure_check(&table, &bf.optima, &inst.omega)?, 0.0))
    })
}

/// Outcome of one level-set instance.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCase {
    pub minimal: bool,
    /// Every level of the assembled function has exactly one enumerated optimum.
    pub non_degenerate: bool,
    /// For non-degenerate cases: raising or lowering any single domain value
    /// made some level fail.
    pub perturbation_detected: Option<bool>,
}

/// Assembles the minimal function for a random datum, certifies every level by
/// enumeration, and on non-degenerate cases checks that moving any one domain
/// value up or down breaks minimality.
pub fn level_case(rng: &mut InstanceRng, max_free: usize, scale: u64) -> Result<LevelCase> {
    let inst = random_instance(rng, max_free, &S_CHOICES)?;
    let (lat, omega) = (&inst.lattice, &inst.omega);
    let table = WeightTable::boxed(lat);
    let levels = rng.gen_range(2..=4);
    let phi = random_level_datum(rng, lat, levels);
    let family = build_level_family(&table, &phi, omega, scale)?;
    let u = assemble_function(&family, &phi, omega);
    let oracle = LevelOracle::BruteForce { limit: max_free };
    let report = verify_function_minimality(&table, &u, omega, oracle)?;
    let mut non_degenerate = true;
    for lambda in u.distinct_values(false) {
        if brute_force(&table, &u.superlevel(lambda), omega, max_free)?.optima.len() != 1 {
            non_degenerate = false;
            break;
        }
    }
    let perturbation_detected = if non_degenerate {
        let mut all = true;
        for x in omega.iter() {
            for sign in [1.0, -1.0] {
                let mut v = u.clone();
                v.values[x] += sign * rng.gen_range(0.1..1.5);
                all &= !verify_function_minimality(&table, &v, omega, oracle)?.minimal;
            }
        }
        Some(all)
    } else {
        None
    };
    Ok(LevelCase { minimal: report.minimal, non_degenerate, perturbation_detected })
}

pub fn level_minimality(seed: u64, n: usize, max_free: usize, scale: u64) -> Result<SuiteResult> {
    run_suite("level_minimality", seed, n, |rng| {
        let c = level_case(rng, max_free, scale)?;
        Ok((c.minimal && c.perturbation_detected != Some(false), 0.0))
    })
}

/// Min-cut optimal indicators against random real-valued competitors.
pub fn competitors(seed: u64, n: usize, per_indicator: usize, max_free: usize, scale: u64) -> Result<SuiteResult> {
    run_suite("competitors", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let table = WeightTable::boxed(&inst.lattice);
        let datum = random_set(rng, &inst.lattice, 0.5);
        let m = minimise(&table, &datum, &inst.omega, scale)?;
        let u_star = m.maximal_set.indicator();
        let base = g_energy(&table, &u_star, &inst.omega)?.total;
        let comps: Vec<FuncConfig> =
            (0..per_indicator).map(|_| random_competitor_func(rng, &u_star, &inst.omega)).collect();
        let ok = competitor_test(&table, &u_star, &comps, &inst.omega)?;
        let mut worst = 0.0f64;
        for v in &comps {
            let e = g_energy(&table, v, &inst.omega)?.total;
            worst = worst.max((base - e) / base.abs().max(1.0));
        }
        // Binary competitors are sets: none may beat the optimum either.
        let set_comp = random_competitor_set(rng, &datum, &inst.omega);
        let set_ok = perimeter(&table, &set_comp, &inst.omega)?.total >= base - 1e-9 * base.max(1.0);
        Ok((ok && set_ok, worst.max(0.0)))
    })
}

pub fn splitting(seed: u64, n: usize, max_free: usize) -> Result<SuiteResult> {
    run_suite("splitting", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let table = random_table(rng, &inst)?;
        let u = random_func(rng, &inst.lattice);
        let (p, q) = split_parts(&u);
        let whole = g_tilde(&table, &u, &inst.omega)?;
        let parts = g_tilde(&table, &p, &inst.omega)? + g_tilde(&table, &q, &inst.omega)?;
        let err = relative_gap(whole, parts);
        Ok((err <= 1e-10, err))
    })
}

/// Cutoffs of a verified-minimal function stay verified-minimal.
pub fn cutoff_stability(seed: u64, n: usize, max_free: usize, scale: u64) -> Result<SuiteResult> {
    run_suite("cutoff_stability", seed, n, |rng| {
        let inst = random_instance(rng, max_free, &S_CHOICES)?;
        let (lat, omega) = (&inst.lattice, &inst.omega);
        let table = WeightTable::boxed(lat);
        let phi = random_level_datum(rng, lat, 4);
        let family = build_level_family(&table, &phi, omega, scale)?;
        let u = assemble_function(&family, &phi, omega);
        let oracle = LevelOracle::BruteForce { limit: max_free };
        if !verify_function_minimality(&table, &u, omega, oracle)?.minimal {
            return Ok((false, 0.0));
        }
        let lambda = rng.gen_range(-0.5..3.5);
        let eps = rng.gen_range(0.05..1.0);
        let c = cutoff(&u, lambda, eps)?;
        Ok((verify_function_minimality(&table, &c, omega, oracle)?.minimal, 0.0))
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let seeds = sub_seeds(cfg.seed, 8);
    let level_free = cfg.level_max_free_cells.min(cfg.max_free_cells);
    let suites = vec![
        oracle_equivalence(seeds[0], cfg.oracle_instances, cfg.max_free_cells, cfg.scale)?,
        coarea(seeds[1], cfg.coarea_instances, cfg.max_free_cells)?,
        submodularity(seeds[2], cfg.submodular_pairs, cfg.max_free_cells)?,
        closure(seeds[3], cfg.closure_instances, cfg.max_free_cells)?,
        level_minimality(seeds[4], cfg.level_instances, level_free, cfg.scale)?,
        competitors(
            seeds[5],
            cfg.indicator_instances,
            cfg.competitors_per_indicator,
            cfg.max_free_cells,
            cfg.scale,
        )?,
        splitting(seeds[6], cfg.splitting_instances, cfg.max_free_cells)?,
        cutoff_stability(seeds[7], cfg.cutoff_samples, level_free, cfg.scale)?,
    ];
    let passed = suites.iter().map(|s| s.passed).sum();
    let failed = suites.iter().map(|s| s.failed).sum();
    Ok(VerifyReport { seed: cfg.seed, passed, failed, suites })
}
