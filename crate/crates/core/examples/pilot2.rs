use hardhex::config::stable_configs;
use hardhex::dynamics::{run_batch, DynamicsParams};
use hardhex::landscape::{enumerate_with_limit, exact_mean_hitting};
use hardhex::lattice::{Grid, GridSpec};
use hardhex::stats;
use hardhex::symmetry::coupling_checks;

fn main() {
    let g = Grid::new(GridSpec { k: 2, l: 2 }).unwrap();
    let index = enumerate_with_limit(&g, 30).unwrap();
    let [a, b, c] = index.stable_ids();

    // Exact means over a wide beta range: where does the log-mean slope sit?
    let betas = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let mut lns = Vec::new();
    for &beta in &betas {
        let t = exact_mean_hitting(&index, beta, a, &[b, c]).unwrap();
        let t_ab = exact_mean_hitting(&index, beta, a, &[b]).unwrap();
        let t_b = exact_mean_hitting(&index, beta, b, &[a, c]).unwrap();
        println!(
            "beta={beta}: exact E tau_a->bc = {t:.2}, E tau_a->b = {t_ab:.2} (ratio {:.4}), E tau_b->ac = {t_b:.2}",
            t_ab / t
        );
        lns.push(t.ln());
    }
    let (s_all, _, _) = stats::linear_fit(&betas, &lns);
    let (s_spec, _, _) = stats::linear_fit(&betas[..4], &lns[..4]);
    let highs: Vec<f64> = betas[2..].to_vec();
    let lnh: Vec<f64> = lns[2..].to_vec();
    let (s_high, _, _) = stats::linear_fit(&highs, &lnh);
    println!("exact slopes: spec window {s_spec:.4}, high window {s_high:.4}, all {s_all:.4}");

    // MC means from a and from b at beta=2 against the exact value.
    let [ca, cb, cc] = stable_configs(&g);
    let exact = exact_mean_hitting(&index, 2.0, a, &[b, c]).unwrap();
    let params = DynamicsParams::new(2.0, 123).unwrap();
    let oa = run_batch(&g, &ca, &[cb.clone(), cc.clone()], params, 0, 10_000, u64::MAX).unwrap();
    let ob = run_batch(&g, &cb, &[ca.clone(), cc.clone()], params, 1, 10_000, u64::MAX).unwrap();
    let ma: Vec<f64> = oa.iter().map(|o| o.sample().unwrap().steps as f64).collect();
    let mb: Vec<f64> = ob.iter().map(|o| o.sample().unwrap().steps as f64).collect();
    println!(
        "exact {exact:.1}; MC from a: {:.1} (se {:.1}); MC from b: {:.1} (se {:.1})",
        stats::mean(&ma),
        (stats::variance(&ma) / ma.len() as f64).sqrt(),
        stats::mean(&mb),
        (stats::variance(&mb) / mb.len() as f64).sqrt()
    );
    let (d, p) = stats::ks_two_sample(&ma, &mb);
    println!("two-sample KS: D={d:.5} p={p:.5}");

    // p-value distribution of the coupling KS across seeds.
    for seed in [1u64, 2, 3, 4, 5] {
        let rep = coupling_checks(&g, 2.0, 4000, seed).unwrap();
        println!(
            "seed {seed}: binom_p={:.4} ks_p={:.4} chi2_p={:.4}",
            rep.binomial_p, rep.ks_p, rep.chi2_p
        );
    }
}
