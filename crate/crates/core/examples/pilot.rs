use hardhex::experiments::{run_campaign, CampaignSpec, TargetSpec};
use hardhex::landscape::{enumerate, mixing_time, spectral_gap, MixingOptions};
use hardhex::lattice::{Component, Grid, GridSpec};
use hardhex::stats;
use hardhex::symmetry::coupling_checks;

fn main() {
    let t0 = std::time::Instant::now();

    // Criterion 7 inputs: 4x3 spectral slope and mixing trend.
    let g43 = Grid::new(GridSpec { k: 2, l: 1 }).unwrap();
    let idx = enumerate(&g43).unwrap();
    let betas = [2.0, 3.0, 4.0, 5.0];
    let mut logs = Vec::new();
    for &b in &betas {
        let gap = spectral_gap(&idx, b).unwrap();
        println!(
            "beta={b}: rho={:.6e} iters={} ({:.1?})",
            gap.rho,
            gap.iterations,
            t0.elapsed()
        );
        logs.push(-gap.rho.ln());
    }
    let (slope, _, se) = stats::linear_fit(&betas, &logs);
    println!("spectral slope = {slope:.4} +- {se:.4}");

    for &b in &[2.0, 3.0, 4.0] {
        let t = std::time::Instant::now();
        let r = mixing_time(&idx, b, 0.25, MixingOptions::default()).unwrap();
        println!(
            "t_mix(0.25) beta={b}: {} -> (1/b)log = {:.4}  [{:?}]",
            r.n,
            (r.n as f64).ln() / b,
            t.elapsed()
        );
    }

    // Criterion 5: 4x6 campaign.
    let spec = CampaignSpec {
        grid: GridSpec { k: 2, l: 2 },
        betas: vec![1.5, 2.0, 2.5, 3.0],
        samples_per_beta: 2000,
        start: Component::A,
        target: TargetSpec::OthersOfStart,
        seed: 1,
        cap: 10_000_000_000,
    };
    let t = std::time::Instant::now();
    let r = run_campaign(&spec).unwrap();
    for s in &r.per_beta {
        println!(
            "beta={}: mean={:.1} var={:.3e} trunc={}",
            s.beta, s.mean, s.variance, s.n_truncated
        );
    }
    println!(
        "slope={:.4} se={:?} KS={:.4} (crit {:.4}) ratio={:?}  [{:?}]",
        r.slope, r.slope_se, r.ks_stat_max_beta, r.ks_critical_001, r.ratio_single_over_pair,
        t.elapsed()
    );

    // Criterion 6: coupling checks on 4x6 at beta=2 with 1e4 samples.
    let g46 = Grid::new(GridSpec { k: 2, l: 2 }).unwrap();
    let t = std::time::Instant::now();
    let rep = coupling_checks(&g46, 2.0, 10_000, 20240817).unwrap();
    println!(
        "coupling: hits_b={} binom_p={:.4} ks_p={:.4} chi2_p={:.4} passed={}  [{:?}]",
        rep.hits_b, rep.binomial_p, rep.ks_p, rep.chi2_p, rep.passed,
        t.elapsed()
    );

    println!("total {:?}", t0.elapsed());
}
