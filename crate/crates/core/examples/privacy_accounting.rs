//! Privacy loss of the subsampled Gaussian mechanism as steps accumulate,
//! and the number of steps a budget allows.
//!
//! cargo run --release --example privacy_accounting -- [q] [sigma] [epsilon0]

use dp_graphgen::accountant::PrivacyLedger;
use dp_graphgen::pipeline::account;

fn main() -> dp_graphgen::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let q = args.first().copied().unwrap_or(0.01);
    let sigma = args.get(1).copied().unwrap_or(1.1);
    let budget = args.get(2).copied().unwrap_or(2.0);
    let delta = 1e-5;

    let single = account(1.0, 1.0, 1, delta)?;
    println!(
        "one full-batch step at σ=1: ε = {:.4} (order {:?})",
        single.epsilon, single.order
    );

    println!("q = {q}, σ = {sigma}, δ = {delta}");
    for steps in [1, 10, 100, 1_000, 10_000] {
        let a = account(q, sigma, steps, delta)?;
        println!("  T = {steps:>6}  ε = {:.4}  (order {:?})", a.epsilon, a.order);
    }

    let mut ledger = PrivacyLedger::new(q, sigma);
    while ledger.epsilon_for_delta(delta) <= budget {
        ledger.advance(1);
    }
    println!(
        "ε0 = {budget}: {} steps fit, step {} reaches ε = {:.4}",
        ledger.steps() - 1,
        ledger.steps(),
        ledger.epsilon_for_delta(delta)
    );
    Ok(())
}
