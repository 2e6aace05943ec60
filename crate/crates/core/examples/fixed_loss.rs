//! Optimised key rates of the three variants at a few fixed losses.

use cvqkd_core::atmosphere::db_to_linear;
use cvqkd_core::experiment::optimize_chain;
use cvqkd_core::gaussian::Scenario;
use cvqkd_core::{Aggregation, OptimizationConfig, Protocol, SupermodeSpectrum, Variant};

fn main() -> cvqkd_core::Result<()> {
    let spectrum = SupermodeSpectrum::new(Scenario::Exponential { decay: 0.5 }, 5, 1.0)?;
    let protocol = Protocol {
        aggregation: Aggregation::ClampNegative,
        ..Protocol::baseline(spectrum)
    };
    let config = OptimizationConfig::default();
    println!("{:>6} {:>12} {:>12} {:>12}", "dB", "none", "amp", "att+amp");
    for db in [5.0, 10.0, 20.0, 30.0] {
        let chain = optimize_chain(db_to_linear(db), &protocol, Variant::AttAmp, &config)?;
        println!("{db:>6} {:>12.4e} {:>12.4e} {:>12.4e}", chain[0].rate, chain[1].rate, chain[2].rate);
    }
    Ok(())
}
