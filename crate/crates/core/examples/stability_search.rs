//! Search for the most stable partition with prescribed measures.

use noisestab::search::{optimize_stability, write_trace_csv, SearchConfig, SearchMode};

fn main() -> noisestab::Result<()> {
    let t = 2f64.ln();
    let cfg = SearchConfig::new(2, 1, 1, t, vec![0.5, 0.5], 500, SearchMode::GridCover, 1);
    let r = optimize_stability(&cfg)?;
    println!("k = 2 grid cover: Stab {:.4} ± {:.4} after {} evaluations", r.stability.value, r.stability.std_error, r.evaluations);

    let mut cfg = SearchConfig::new(3, 2, 1, t, vec![1.0 / 3.0; 3], 40, SearchMode::RandomRestartLocal, 2);
    cfg.restarts = 2;
    let r = optimize_stability(&cfg)?;
    println!(
        "k = 3 local search: Stab {:.4} ± {:.4}, measures {:?}, feasible {}",
        r.stability.value, r.stability.std_error, r.measures.mu, r.feasible
    );
    let mut out = Vec::new();
    write_trace_csv(&r.trace[..r.trace.len().min(5)], &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
