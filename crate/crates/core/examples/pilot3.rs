use hardhex::landscape::{enumerate_with_limit, exact_mean_hitting, transition_matrix};
use hardhex::lattice::{Grid, GridSpec};

// Exact sup-norm distance between the law of tau/E tau (tau = hitting time
// of {b,c} from a at beta=3 on 4x6) and the unit-mean exponential: iterate
// the survival probabilities of the absorbing chain.
fn main() {
    let g = Grid::new(GridSpec { k: 2, l: 2 }).unwrap();
    let index = enumerate_with_limit(&g, 30).unwrap();
    let [a, b, c] = index.stable_ids();
    for beta in [2.0f64, 3.0] {
        let mean = exact_mean_hitting(&index, beta, a, &[b, c]).unwrap();
        let tm = transition_matrix(&index, beta);
        let n = index.len();
        let mut u = vec![0.0f64; n];
        u[a as usize] = 1.0;
        let mut buf = vec![0.0f64; n];
        let mut sup: f64 = 0.0;
        let mut t: u64 = 0;
        let mut survival = 1.0f64;
        while survival > 1e-6 && (t as f64) < 40.0 * mean {
            // One absorbing step: distribute, then zero の target mass.
            tm.apply_left(&u, &mut buf);
            std::mem::swap(&mut u, &mut buf);
            u[b as usize] = 0.0;
            u[c as usize] = 0.0;
            survival = u.iter().sum();
            t += 1;
            let exp_surv = (-(t as f64) / mean).exp();
            sup = sup.max((survival - exp_surv).abs());
        }
        println!("beta={beta}: exact mean {mean:.1}, sup-norm distance from Exp(1): {sup:.5}");
    }
}
