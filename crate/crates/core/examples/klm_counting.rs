//! Outcome counts: KLM teleportation against the linear-measurement protocol.

use qudit_teleport::analysis::{klm_comparison, klm_outcome_count, klm_outcome_count_by_sum};

fn main() {
    let last: u64 = std::env::args().nth(1).map_or(40, |s| s.parse().expect("n"));
    println!("{:>3} {:>26} {:>8}", "n", "N_KLM", "N_linear");
    for n in 0..=last {
        assert_eq!(klm_outcome_count(n), klm_outcome_count_by_sum(n));
        let row = klm_comparison(n);
        let linear = row.linear.map_or_else(|| "-".into(), |l| l.to_string());
        println!("{:>3} {:>26} {:>8}", n, row.klm, linear);
    }
}
