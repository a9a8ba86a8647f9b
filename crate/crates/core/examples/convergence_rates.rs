//! Minimax rate exponents, the scale chosen for each sample size and the
//! Fano-type lower bound on the probability of misidentification.

use neumann_lab::minimax::{rate_exponent, scale_for_sample_size, theorem_b1_bound, vg_codes};

pub fn run_example() -> neumann_lab::Result<()> {
    for (s, d) in [(3.0, 1), (4.0, 1), (3.0, 2), (5.0, 2)] {
        let r = rate_exponent(s, d)?;
        print!("s = {s}, d = {d}: N^(-{r:.4}); scales");
        for n in [100usize, 10_000, 1_000_000] {
            print!(" j({n}) = {}", scale_for_sample_size(n, s, d));
        }
        println!();
    }
    if let Err(e) = rate_exponent(2.0, 2) {
        println!("s = 2, d = 2 rejected: {e}");
    }

    for n in [8, 16, 32] {
        let codes = vg_codes(n, 0.125, 1)?;
        let m = codes.len();
        println!(
            "{n} cells: {m} codes; bound at α = 0.02: {:.4}",
            theorem_b1_bound(m, 0.02)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
