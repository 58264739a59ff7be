use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gauss::{derive_seed, fold_points};
use crate::ptf::{binomial_se, estimate_stability, MeasureVector, MultiPtf, PartitionFn, StabEstimate};
use crate::rounding::{find_matching_threshold_cached, smooth_partition_with, threshold_round, FieldSample, GridResolution};

use super::cover::{basis_indices, constant_partitions, enumerate_cover, poly_from_coeffs, CoverGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    GridCover,
    RandomRestartLocal,
}

fn default_samples() -> usize {
    20_000
}
fn default_final_samples() -> usize {
    400_000
}
fn default_restarts() -> usize {
    4
}
fn default_polish() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub k: usize,
    pub n0: usize,
    pub d: usize,
    pub t: f64,
    pub target_mu: Vec<f64>,
    pub measure_tol: f64,
    /// Objective evaluations.
    pub budget: usize,
    pub mode: SearchMode,
    pub seed: u64,
    #[serde(default)]
    pub grid: CoverGrid,
    /// Monte Carlo pairs per objective evaluation (shared across candidates).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Pairs for the independent re-estimate of the winner.
    #[serde(default = "default_final_samples")]
    pub final_samples: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Extra smooth-and-round passes applied to each local candidate.
    #[serde(default = "default_polish")]
    pub polish: usize,
}

impl SearchConfig {
    pub fn new(k: usize, n0: usize, d: usize, t: f64, target_mu: Vec<f64>, budget: usize, mode: SearchMode, seed: u64) -> Self {
        Self {
            k,
            n0,
            d,
            t,
            target_mu,
            measure_tol: 0.01,
            budget,
            mode,
            seed,
            grid: CoverGrid::default(),
            samples: default_samples(),
            final_samples: default_final_samples(),
            restarts: default_restarts(),
            polish: default_polish(),
        }
    }

    pub fn rho(&self) -> f64 {
        (-self.t).exp()
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 || self.n0 == 0 {
            return invalid("search needs k ≥ 2 and n₀ ≥ 1");
        }
        if self.target_mu.len() != self.k {
            return invalid(format!("target has {} entries, expected k = {}", self.target_mu.len(), self.k));
        }
        if self.target_mu.iter().any(|&m| m < 0.0) || (self.target_mu.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return invalid("target measures must form a probability vector");
        }
        if !(self.measure_tol > 0.0) || self.budget == 0 || self.samples < 100 {
            return invalid("measure_tol > 0, budget ≥ 1 and samples ≥ 100 are required");
        }
        if !(self.t >= 0.0) {
            return invalid("t must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub params_hash: u64,
    pub objective: f64,
    pub std_error: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: PartitionFn,
    /// Independent re-estimate with `final_samples` pairs.
    pub stability: StabEstimate,
    pub measures: MeasureVector,
    pub evaluations: usize,
    pub feasible: bool,
    pub params: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

/// FNV-1a over the parameter bit patterns; stable across toolchains.
fn params_hash(p: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in p.iter().flat_map(|v| v.to_bits().to_le_bytes()) {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn write_trace_csv(trace: &[TraceEntry], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "iteration,params_hash,objective,se")?;
    for e in trace {
        writeln!(w, "{},{:016x},{:.16e},{:.16e}", e.iteration, e.params_hash, e.objective, e.std_error)?;
    }
    Ok(())
}

/// Shared evaluation state: one measure sample and one pair sample reused by
/// every candidate.
struct Evaluator<'a> {
    cfg: &'a SearchConfig,
    measure_seed: u64,
    stab_seed: u64,
    resolution: GridResolution,
}

struct Scored {
    partition: PartitionFn,
    objective: StabEstimate,
    measures: Vec<f64>,
    feasible: bool,
}

fn empirical_measures(f: &PartitionFn, samples: usize, seed: u64) -> Vec<f64> {
    let k = f.k;
    let counts = fold_points(
        f.n,
        samples,
        seed,
        || (f.evaluator(), vec![0u64; k]),
        |(ev, c), x| c[ev.label(x)] += 1,
        |mut a, b| {
            a.1.iter_mut().zip(b.1).for_each(|(u, v)| *u += v);
            a
        },
    )
    .map(|a| a.1)
    .unwrap_or_default();
    counts.iter().map(|&c| c as f64 / samples as f64).collect()
}

/// ℓ¹ distance within `tol` plus three binomial standard errors per label,
/// so an exactly matching partition is not rejected for sampling noise.
fn within_tolerance(measured: &[f64], target: &[f64], tol: f64, samples: usize) -> bool {
    let noise: f64 = measured.iter().map(|&p| binomial_se(p, samples)).sum();
    l1(measured, target) <= tol + 3.0 * noise
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum()
}

impl Evaluator<'_> {
    fn plain(&self, f: PartitionFn) -> Result<Scored> {
        let measures = empirical_measures(&f, self.cfg.samples, self.measure_seed);
        let feasible = within_tolerance(&measures, &self.cfg.target_mu, self.cfg.measure_tol, self.cfg.samples);
        let objective = estimate_stability(&f, self.cfg.t, self.cfg.samples, self.stab_seed)?;
        Ok(Scored { partition: f, objective, measures, feasible })
    }

    /// Smooths, rounds to the target measures, optionally repeats, then scores.
    fn rounded(&self, f: PartitionFn) -> Result<Scored> {
        if self.cfg.t == 0.0 {
            return self.plain(f);
        }
        let mut g = f;
        let mut feasible = false;
        for _ in 0..=self.cfg.polish {
            let field = smooth_partition_with(&g, self.cfg.t, self.resolution)?;
            let cache = FieldSample::new(&field, self.cfg.samples, self.measure_seed)?;
            let s = find_matching_threshold_cached(&cache, &self.cfg.target_mu, self.cfg.measure_tol, 200)?;
            feasible = s.converged;
            g = threshold_round(&field, &s.z)?;
        }
        let mut scored = self.plain(g)?;
        scored.feasible &= feasible;
        Ok(scored)
    }
}

/// Whether `c` beats `best`: feasible first, then higher objective with ties
/// to the lexicographically smaller parameters; between infeasible
/// candidates, the one closer to the target.
fn prefer(c: &(Vec<f64>, Scored), best: &(Vec<f64>, Scored), target: &[f64]) -> bool {
    match (c.1.feasible, best.1.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => l1(&c.1.measures, target) < l1(&best.1.measures, target),
        (true, true) => {
            let (x, y) = (c.1.objective.value, best.1.objective.value);
            x > y || x == y && c.0.iter().zip(&best.0).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)
        }
    }
}

fn pick(cands: Vec<(Vec<f64>, Scored)>, target: &[f64]) -> Option<(Vec<f64>, Scored)> {
    cands.into_iter().reduce(|best, c| if prefer(&c, &best, target) { c } else { best })
}

fn ptf_params(p: &MultiPtf) -> Vec<f64> {
    p.polys()
        .iter()
        .flat_map(|q| {
            let mut v = vec![q.constant_term()];
            v.extend(q.chaos().values().flat_map(|t| t.values().iter().copied()));
            v
        })
        .collect()
}

/// Maximizes estimated Stab_t subject to the target measures.
pub fn optimize_stability(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let ev = Evaluator {
        cfg,
        measure_seed: derive_seed(cfg.seed, 11),
        stab_seed: derive_seed(cfg.seed, 12),
        resolution: search_resolution(cfg.n0),
    };
    let mut trace = Vec::new();
    let (params, best, evaluations) = match cfg.mode {
        SearchMode::GridCover => grid_search(&ev, &mut trace)?,
        SearchMode::RandomRestartLocal => local_search(&ev, &mut trace)?,
    };
    let stability = estimate_stability(&best.partition, cfg.t, cfg.final_samples.max(100), derive_seed(cfg.seed, 13))?;
    let final_samples = cfg.final_samples.max(100);
    let measures = crate::ptf::estimate_measures(&best.partition, final_samples, derive_seed(cfg.seed, 14))?;
    let feasible = best.feasible && within_tolerance(&measures.mu, &cfg.target_mu, cfg.measure_tol, final_samples);
    Ok(SearchResult { best: best.partition, stability, measures, evaluations, feasible, params, trace })
}

/// Coarser grids than the rounding pipeline's defaults: candidates are many
/// and only compared against each other.
fn search_resolution(n: usize) -> GridResolution {
    match n {
        1 => GridResolution { cells: 1002, subsamples: 8, eval_points: 1001, half_width: 6.0 },
        2 => GridResolution { cells: 122, subsamples: 4, eval_points: 121, half_width: 6.0 },
        _ => GridResolution::default_for(n),
    }
}

fn record(trace: &mut Vec<TraceEntry>, params: &[f64], s: &Scored) {
    trace.push(TraceEntry {
        iteration: trace.len(),
        params: params.to_vec(),
        params_hash: params_hash(params),
        objective: s.objective.value,
        std_error: s.objective.std_error,
        feasible: s.feasible,
    });
}

fn grid_search(ev: &Evaluator<'_>, trace: &mut Vec<TraceEntry>) -> Result<(Vec<f64>, Scored, usize)> {
    let cfg = ev.cfg;
    let mut cands = constant_partitions(cfg.k, cfg.n0);
    if cfg.d > 0 {
        cands.extend(enumerate_cover(cfg.k, cfg.n0, cfg.d, cfg.grid, cfg.budget.saturating_sub(cfg.k).max(1))?);
    }
    cands.truncate(cfg.budget);
    let scored: Vec<(Vec<f64>, Scored)> = cands
        .into_par_iter()
        .map(|p| {
            let params = ptf_params(&p);
            ev.plain(PartitionFn::ptf(p)).map(|s| (params, s))
        })
        .collect::<Result<_>>()?;
    for (p, s) in &scored {
        record(trace, p, s);
    }
    let n = scored.len();
    let (params, best) = pick(scored, &cfg.target_mu).expect("at least the constant partitions");
    Ok((params, best, n))
}

fn local_search(ev: &Evaluator<'_>, trace: &mut Vec<TraceEntry>) -> Result<(Vec<f64>, Scored, usize)> {
    let cfg = ev.cfg;
    let basis = basis_indices(cfg.n0, cfg.d);
    let per = basis.len() + 1;
    let dim = cfg.k * per;
    let build = |theta: &[f64]| -> Result<PartitionFn> {
        let polys = theta
            .chunks(per)
            .map(|c| poly_from_coeffs(cfg.n0, &basis, c[0], &c[1..]))
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionFn::ptf(MultiPtf::new(polys)?))
    };
    let mut evals = 0usize;
    let mut overall: Option<(Vec<f64>, Scored)> = None;
    let restarts = cfg.restarts.max(1);
    for r in 0..restarts {
        if evals >= cfg.budget {
            break;
        }
        // each restart gets an equal share of what is left
        let share = (cfg.budget - evals) / (restarts - r);
        let stop = evals + share.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 100 + r as u64));
        let mut theta: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = ev.rounded(build(&theta)?)?;
        evals += 1;
        record(trace, &theta, &s);
        let mut cur = (theta.clone(), s);
        let mut step = 0.5;
        while evals < stop && step > 1e-3 {
            let mut improved = false;
            for i in 0..dim {
                for sign in [1.0, -1.0] {
                    if evals >= stop {
                        break;
                    }
                    theta = cur.0.clone();
                    theta[i] += sign * step;
                    let s = ev.rounded(build(&theta)?)?;
                    evals += 1;
                    record(trace, &theta, &s);
                    let cand = (theta.clone(), s);
                    if prefer(&cand, &cur, &cfg.target_mu) {
                        cur = cand;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        overall = match overall {
            None => Some(cur),
            Some(b) => pick(vec![b, cur], &cfg.target_mu),
        };
    }
    let (params, best) = overall.expect("at least one restart");
    Ok((params, best, evals))
}
