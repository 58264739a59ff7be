use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::cube::{cube_influences, cube_stability, cube_stability_bruteforce, make_voting_rule, MAX_BRUTE_DIM};
use crate::error::{invalid, Result};
use crate::gauss::derive_seed;
use crate::hermite::{expand, spectral_weights};
use crate::product::{block_strategy, correlation_basis, estimate_discrete_corr, JointDist};
use crate::ptf::random::random_balanced_binary;
use crate::ptf::{estimate_joint_labels, estimate_stability, PartitionFn};
use crate::rounding::{ptf_from_truncation, stability_of_rounding};
use crate::search::{ncd_brute_oracle, ncd_decide, optimize_stability, write_trace_csv, NcdConfig, SearchConfig};
use crate::tensor::{eigenregularity, variance_bounds, PolyGauss};

use super::output::{emit, Table};
use super::{Cli, Command, Common, TensorOp};

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// OU time from --t or --rho; ρ = 1/2 when neither is given.
fn time(c: &Common) -> Result<f64> {
    match (c.t, c.rho) {
        (Some(t), _) if t >= 0.0 => Ok(t),
        (Some(t), _) => invalid(format!("t = {t} must be non-negative")),
        (None, Some(r)) if r > 0.0 && r <= 1.0 => Ok(-r.ln()),
        (None, Some(r)) if r == 0.0 => Ok(f64::INFINITY),
        (None, Some(r)) => invalid(format!("rho = {r} must lie in [0, 1]")),
        (None, None) => Ok(2f64.ln()),
    }
}

fn rho_of(t: f64) -> f64 {
    (-t).exp()
}

pub(crate) fn dispatch(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let seed = c.seed.unwrap_or(0);
    let name = cli.command.name();
    let mut table = Table::Result;
    let result: Value = match &cli.command {
        Command::Stability { partition } => {
            let f: PartitionFn = load(partition)?;
            let t = time(c)?;
            let joint = estimate_joint_labels(&f, &f, t, c.samples, seed)?;
            let s = joint.agreement();
            let cells: Vec<Value> = (0..f.k).map(|j| serde_json::to_value(joint.cell(j))).collect::<std::result::Result<_, _>>()?;
            json!({
                "value": s.value, "std_error": s.std_error, "samples": s.samples,
                "t": t, "rho": rho_of(t), "seed": seed, "cells": cells,
            })
        }
        Command::BorellCheck { n, degree, count } => {
            let t = time(c)?;
            let rho = rho_of(t);
            let halfspace = 0.5 + rho.asin() / std::f64::consts::PI;
            let mut records = Vec::new();
            for i in 0..*count {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                let f = random_balanced_binary(*n, *degree, &mut rng)?;
                let s = estimate_stability(&f, t, c.samples, derive_seed(seed, 1_000 + i as u64))?;
                records.push(json!({
                    "index": i, "stability": s.value, "std_error": s.std_error,
                    "halfspace": halfspace, "excess": s.value - halfspace,
                    "within": s.value <= halfspace + 3.0 * s.std_error,
                }));
            }
            let violations = records.iter().filter(|r| r["within"] == json!(false)).count();
            let rec = Value::Array(records);
            table = Table::Rows(rec.clone());
            json!({ "halfspace": halfspace, "rho": rho, "violations": violations, "records": rec })
        }
        Command::Round { partition, tol, degree, quad_order } => {
            let f: PartitionFn = load(partition)?;
            let t = time(c)?;
            let r = stability_of_rounding(&f, t, *tol, c.samples, seed)?;
            let mut summary = r.summary();
            if let Some(d) = degree {
                let tr = ptf_from_truncation(&f, *d, f.n, *quad_order, c.samples, derive_seed(seed, 7))?;
                summary.disagreement = Some(tr.disagreement.value);
                summary.collision = Some(tr.collision.value);
            }
            let mut v = serde_json::to_value(&summary)?;
            v["stab_before_se"] = json!(r.stab_f.std_error);
            v["stab_after_se"] = json!(r.stab_g.std_error);
            v["measure_slack"] = json!(r.measure_slack);
            v["contract_holds"] = json!(r.contract_holds());
            v
        }
        Command::Hermite { partition, degree, quad_order } => {
            let f: PartitionFn = load(partition)?;
            let k = f.k;
            let e = expand(
                |x| {
                    let mut v = vec![0.0; k];
                    v[f.evaluator().label(x)] = 1.0;
                    v
                },
                f.n,
                *degree,
                *quad_order,
            )?;
            let w = spectral_weights(&e, 1.0)?;
            table = Table::Rows(json!(w.by_degree.iter().enumerate().map(|(d, m)| json!({"degree": d, "weight": m})).collect::<Vec<_>>()));
            json!({ "expansion": e, "weights": w })
        }
        Command::Tensor { op, poly, other } => {
            let p: PolyGauss = load(poly)?;
            let q = || -> Result<PolyGauss> {
                match other {
                    Some(path) => load(path),
                    None => invalid("--other is required for this operation"),
                }
            };
            match op {
                TensorOp::Eigen => serde_json::to_value(eigenregularity(&p)?)?,
                TensorOp::Ito => {
                    let q = q()?;
                    let prod = p.mul(&q)?;
                    json!({ "product": prod, "mean": prod.mean(), "variance": prod.variance() })
                }
                TensorOp::Variance => {
                    let b = variance_bounds(&p, &q()?)?;
                    let mut v = serde_json::to_value(&b)?;
                    v["holds"] = json!(b.holds());
                    v
                }
            }
        }
        Command::Basis { dist } => {
            let p: JointDist = load(dist)?;
            serde_json::to_value(correlation_basis(&p)?)?
        }
        Command::Simulate { dist, ell, partition } => {
            let p: JointDist = load(dist)?;
            let g = match partition {
                Some(path) => load(path)?,
                None => PartitionFn::median_halfspace(1),
            };
            let basis = correlation_basis(&p)?;
            let n_coords = g.n * ell;
            let fs = block_strategy(g.clone(), basis.x_fn(1), *ell)?;
            let gs = block_strategy(g, basis.y_fn(1), *ell)?;
            let r = estimate_discrete_corr(&fs, &gs, &p, n_coords, c.samples, seed)?;
            let cells: Vec<f64> = (0..fs.g.k).map(|j| r.cell(j)).collect();
            let mut v = serde_json::to_value(&r)?;
            v["cells"] = json!(cells);
            v["rho_1"] = json!(basis.maximal_correlation());
            v["high_influence"] = json!([]);
            v
        }
        Command::Cube { rule, n, k } => {
            let f = make_voting_rule(rule.parse()?, *n, *k)?;
            let rho = rho_of(time(c)?);
            let brute = if *n <= MAX_BRUTE_DIM { Some(cube_stability_bruteforce(&f, rho)?) } else { None };
            json!({
                "rule": rule, "n": n, "k": k, "rho": rho,
                "stability": cube_stability(&f, rho)?,
                "stability_bruteforce": brute,
                "influences": cube_influences(&f)?,
                "measures": f.measures(),
            })
        }
        Command::Search => {
            let Some(path) = &c.config else {
                return invalid("search needs --config");
            };
            let mut cfg: SearchConfig = load(path)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            let r = optimize_stability(&cfg)?;
            let mut csv = Vec::new();
            write_trace_csv(&r.trace, &mut csv)?;
            let v = serde_json::to_value(&r)?;
            emit(name, c, cfg.seed, &v, Table::Text(String::from_utf8_lossy(&csv).into_owned()))?;
            return Ok(());
        }
        Command::Ncd { dist, mu, nu, kappa, delta, n_max, oracle } => {
            let p: JointDist = load(dist)?;
            // a config file supplies its own samples and seed; --seed still wins
            let mut cfg = match &c.config {
                Some(path) => load::<NcdConfig>(path)?,
                None => NcdConfig { samples: c.samples, ..NcdConfig::new(mu.len()) },
            };
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            let seed = cfg.seed;
            let r = ncd_decide(&p, mu, nu, *kappa, *delta, *n_max, &cfg)?;
            let mut v = serde_json::to_value(&r)?;
            if *oracle {
                v["oracle"] = json!(ncd_brute_oracle(&p, mu, nu, cfg.k, (*n_max).min(2), *delta)?);
            }
            emit(name, c, seed, &v, Table::Result)?;
            return Ok(());
        }
    };
    emit(name, c, seed, &result, table)
}
