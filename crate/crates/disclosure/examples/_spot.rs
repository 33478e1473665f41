use disclosure::*;
use disclosure::oracle::brute_force_tbp;

fn main() {
    let t0 = std::time::Instant::now();
    let mut worst_dq: f64 = 0.0;
    let mut fails = 0;
    for &mu in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &q in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &c in &[0.02, 0.1, 0.3, 0.6, 1.0] {
                for &t_max in &[3usize, 5, 8] {
                    let p = ModelParams::new(mu, q, t_max, c).unwrap();
                    let s = solve(&p);
                    let o = brute_force_tbp(&p, 1e-3).unwrap();
                    let dq = (s.mechanism.silence_prob - o.best_mechanism.silence_prob).abs();
                    if s.mechanism.threshold != o.best_mechanism.threshold || dq > 2e-3 {
                        fails += 1;
                        println!("MISMATCH mu={mu} q={q} c={c} T={t_max}: solver=({}, {:.6}) oracle=({}, {:.6})",
                            s.mechanism.threshold, s.mechanism.silence_prob,
                            o.best_mechanism.threshold, o.best_mechanism.silence_prob);
                    }
                    worst_dq = worst_dq.max(dq);
                }
            }
        }
    }
    println!("failures: {fails}, worst |dq|: {worst_dq:.2e}, elapsed {:?}", t0.elapsed());
}
