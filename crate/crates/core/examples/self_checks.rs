//! Simulator against M/M/1 formulas, backpropagation against finite differences.
//!
//! cargo run --release --example self_checks [-- <horizon>]

use fogforge::validate::{gradient_checks, mm1_check};

fn main() -> fogforge::Result<()> {
    let horizon = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1e6);
    println!("rho    L measured  L expected  W measured  W expected");
    for rho in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let c = mm1_check(rho, horizon, 1)?;
        println!(
            "{rho:<5} {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}",
            c.measured_l, c.expected_l, c.measured_w, c.expected_w
        );
    }
    let errs = gradient_checks(10, 1)?;
    println!(
        "gradient check, 10 networks: max relative error {:.2e}",
        errs.iter().copied().fold(0.0, f64::max)
    );
    Ok(())
}
