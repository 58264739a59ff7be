use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gauss::{derive_seed, norm_ppf};
use crate::product::{
    block_strategy, correlation, correlation_basis, digits, estimate_discrete_corr, tensor_fourier, JointDist, ProductFourier,
    ProductTable, Side,
};
use crate::ptf::PartitionFn;

/// Largest number of (f, g) table pairs enumerated.
pub const MAX_PAIRS: u64 = 20_000_000;
/// Slack on the marginal test so exactly matching marginals are never
/// rejected through rounding.
pub const MARGINAL_SLACK: f64 = 1e-12;

fn default_n_brute() -> usize {
    2
}
fn default_ells() -> Vec<usize> {
    vec![4, 16, 64]
}
fn default_samples() -> usize {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcdConfig {
    pub k: usize,
    #[serde(default = "default_n_brute")]
    pub n_brute: usize,
    /// Block lengths tried for the Gaussian stage.
    #[serde(default = "default_ells")]
    pub ells: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl NcdConfig {
    pub fn new(k: usize) -> Self {
        Self { k, n_brute: default_n_brute(), ells: default_ells(), samples: default_samples(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Label tables over A^n and B^n, indexed by Σ x_i·m^i.
    Tables { n: usize, f: Vec<usize>, g: Vec<usize> },
    /// Block-embedded Gaussian slabs with the given breakpoints.
    Blocks { ell: usize, breakpoints_f: Vec<f64>, breakpoints_g: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcdResult {
    pub verdict: Verdict,
    /// Best agreement among marginal-feasible pairs, if any was found.
    pub achieved: Option<f64>,
    /// 0 for exactly evaluated pairs.
    pub std_error: f64,
    pub witness: Option<Witness>,
    pub marginals_f: Vec<f64>,
    pub marginals_g: Vec<f64>,
    /// Coordinates treated as high-influence (always empty here).
    pub high_influence: Vec<usize>,
    pub notes: Vec<String>,
}

fn check_dist(mu: &[f64], k: usize, name: &str) -> Result<()> {
    if mu.len() != k || mu.iter().any(|&v| !(v >= 0.0)) || (mu.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return invalid(format!("{name} must be a probability vector of length {k}"));
    }
    Ok(())
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum()
}

fn all_tables(points: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (k as u64).pow(points as u32);
    (0..total).map(move |mut c| {
        (0..points)
            .map(|_| {
                let d = (c % k as u64) as usize;
                c /= k as u64;
                d
            })
            .collect()
    })
}

fn table_marginals(labels: &[usize], marg: &[f64], m: usize, n: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    for (i, &l) in labels.iter().enumerate() {
        out[l] += digits(i, m, n).iter().map(|&d| marg[d]).product::<f64>();
    }
    out
}

fn pair_count(p: &JointDist, k: usize, n: usize) -> Result<u64> {
    let pa = (p.size_a() as u64).checked_pow(n as u32);
    let pb = (p.size_b() as u64).checked_pow(n as u32);
    let count = pa
        .zip(pb)
        .and_then(|(a, b)| (k as u64).checked_pow(a as u32).zip((k as u64).checked_pow(b as u32)))
        .and_then(|(x, y)| x.checked_mul(y));
    match count {
        Some(c) if c <= MAX_PAIRS => Ok(c),
        _ => Err(Error::Budget(format!("strategy pairs over n = {n} exceed {MAX_PAIRS}"))),
    }
}

struct Candidate {
    f: Vec<usize>,
    marg: Vec<f64>,
    hat: Option<ProductFourier>,
}

/// Exact best pair over A^n × B^n via the product-space correlation formula.
fn exhaustive_stage(
    p: &JointDist,
    mu: &[f64],
    nu: &[f64],
    k: usize,
    n: usize,
    delta: f64,
) -> Result<Option<(f64, Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>)>> {
    pair_count(p, k, n)?;
    let basis = correlation_basis(p)?;
    let (ma, mb) = (p.size_a(), p.size_b());
    let (pa, pb) = (p.marginal_a(), p.marginal_b());
    let side = |m: usize, marg: &[f64], target: &[f64], s: Side| -> Result<Vec<Candidate>> {
        all_tables(m.pow(n as u32), k)
            .map(|f| {
                let tm = table_marginals(&f, marg, m, n, k);
                Ok(Candidate { marg: tm, f, hat: None })
            })
            .filter(|c: &Result<Candidate>| c.as_ref().map_or(true, |c| l1(&c.marg, target) <= delta + MARGINAL_SLACK))
            .map(|c| {
                let mut c = c?;
                let t = ProductTable::from_labels(n, m, k, &c.f)?;
                c.hat = Some(tensor_fourier(&t, &basis, s, p)?);
                Ok(c)
            })
            .collect()
    };
    let fs = side(ma, &pa, mu, Side::A)?;
    let gs = side(mb, &pb, nu, Side::B)?;
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, f) in fs.iter().enumerate() {
        for (j, g) in gs.iter().enumerate() {
            let v = correlation(f.hat.as_ref().expect("set"), g.hat.as_ref().expect("set"), &basis.rho)?;
            if best.is_none_or(|b| v > b.0 + 1e-15) {
                best = Some((v, i, j));
            }
        }
    }
    Ok(best.map(|(v, i, j)| (v, fs[i].f.clone(), gs[j].f.clone(), fs[i].marg.clone(), gs[j].marg.clone())))
}

fn slab_breakpoints(mu: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    mu[..mu.len() - 1]
        .iter()
        .map(|&m| {
            acc += m;
            norm_ppf(acc.clamp(1e-12, 1.0 - 1e-12))
        })
        .collect()
}

/// One-sided search for a strategy pair with marginals within `delta` (ℓ¹)
/// of (mu, nu) and agreement ≥ kappa − delta. Exhaustive tables cover
/// n ≤ n_brute; block-embedded Gaussian slabs cover ℓ with n_brute < ℓ ≤ n_max.
/// `NotFound` is a search outcome, not a proof that no pair exists.
pub fn ncd_decide(p: &JointDist, mu: &[f64], nu: &[f64], kappa: f64, delta: f64, n_max: usize, cfg: &NcdConfig) -> Result<NcdResult> {
    let k = cfg.k;
    if k < 2 {
        return invalid("need k ≥ 2");
    }
    check_dist(mu, k, "mu")?;
    check_dist(nu, k, "nu")?;
    if !(delta > 0.0) {
        return invalid("delta must be positive");
    }
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let mut notes = vec![
        "not-found reports a failed search, not a certificate that no strategy pair exists".to_string(),
        "no coordinates are treated as high-influence".to_string(),
    ];
    let mut best: Option<(f64, f64, Witness, Vec<f64>, Vec<f64>)> = None;
    let mut consider = |cand: (f64, f64, Witness, Vec<f64>, Vec<f64>)| {
        if best.as_ref().is_none_or(|b| cand.0 > b.0) {
            best = Some(cand);
        }
    };

    for n in 1..=n_max.min(cfg.n_brute) {
        match exhaustive_stage(p, mu, nu, k, n, delta) {
            Ok(Some((v, f, g, mf, mg))) => consider((v, 0.0, Witness::Tables { n, f, g }, mf, mg)),
            Ok(None) => {}
            Err(Error::Budget(msg)) => {
                notes.push(format!("exhaustive stage skipped at n = {n}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let basis = correlation_basis(p)?;
    let (bf, bg) = (slab_breakpoints(mu), slab_breakpoints(nu));
    for &ell in &cfg.ells {
        if ell <= cfg.n_brute || ell > n_max {
            continue;
        }
        let fs = block_strategy(PartitionFn::slabs(1, 0, bf.clone())?, basis.x_fn(1), ell)?;
        let gs = block_strategy(PartitionFn::slabs(1, 0, bg.clone())?, basis.y_fn(1), ell)?;
        let r = estimate_discrete_corr(&fs, &gs, p, ell, cfg.samples, derive_seed(cfg.seed, ell as u64))?;
        if l1(&r.marginals_f.mu, mu) <= delta + MARGINAL_SLACK && l1(&r.marginals_g.mu, nu) <= delta + MARGINAL_SLACK {
            consider((
                r.agreement.value,
                r.agreement.std_error,
                Witness::Blocks { ell, breakpoints_f: bf.clone(), breakpoints_g: bg.clone() },
                r.marginals_f.mu,
                r.marginals_g.mu,
            ));
        } else {
            notes.push(format!("block length {ell}: marginals outside delta"));
        }
    }

    Ok(match best {
        Some((v, se, w, mf, mg)) => NcdResult {
            verdict: if v >= kappa - delta { Verdict::Feasible } else { Verdict::NotFound },
            achieved: Some(v),
            std_error: se,
            witness: Some(w),
            marginals_f: mf,
            marginals_g: mg,
            high_influence: Vec::new(),
            notes,
        },
        None => NcdResult {
            verdict: Verdict::NotFound,
            achieved: None,
            std_error: 0.0,
            witness: None,
            marginals_f: Vec::new(),
            marginals_g: Vec::new(),
            high_influence: Vec::new(),
            notes,
        },
    })
}

/// Maximum of Pr[f(X^n) = g(Y^n)] over all label tables with marginals
/// within `delta`, by direct summation over point pairs (no Fourier route).
pub fn ncd_brute_oracle(p: &JointDist, mu: &[f64], nu: &[f64], k: usize, n: usize, delta: f64) -> Result<Option<f64>> {
    if n == 0 || n > 2 {
        return invalid("the oracle handles n ∈ {1, 2}");
    }
    check_dist(mu, k, "mu")?;
    check_dist(nu, k, "nu")?;
    pair_count(p, k, n)?;
    let (ma, mb) = (p.size_a(), p.size_b());
    let (la, lb) = (ma.pow(n as u32), mb.pow(n as u32));
    // joint weights P^n(x, y)
    let w: Vec<f64> = (0..la * lb)
        .map(|i| {
            let (x, y) = (digits(i / lb, ma, n), digits(i % lb, mb, n));
            x.iter().zip(&y).map(|(&a, &b)| p.p(a, b)).product()
        })
        .collect();
    let (pa, pb) = (p.marginal_a(), p.marginal_b());
    let gs: Vec<Vec<usize>> =
        all_tables(lb, k).filter(|g| l1(&table_marginals(g, &pb, mb, n, k), nu) <= delta + MARGINAL_SLACK).collect();
    let mut best: Option<f64> = None;
    for f in all_tables(la, k).filter(|f| l1(&table_marginals(f, &pa, ma, n, k), mu) <= delta + MARGINAL_SLACK) {
        // per-y mass on each label of f
        let mut by_label = vec![0.0; lb * k];
        for x in 0..la {
            for y in 0..lb {
                by_label[y * k + f[x]] += w[x * lb + y];
            }
        }
        for g in &gs {
            let v: f64 = (0..lb).map(|y| by_label[y * k + g[y]]).sum();
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    Ok(best)
}
