//! Compares accumulated spiking weight updates with exact gradients of the
//! same loss on small relational networks.
//!
//!     cargo run --release --example gradient_fidelity

use relspike::oracle::gradient_suite;
use relspike::SimulationConfig;

fn main() -> relspike::Result<()> {
    let config = SimulationConfig::default();
    for width in [4, 6, 8] {
        let s = gradient_suite(&config, 100, width, 12, 3)?;
        println!(
            "width {width}: agreement {:.3} ({}/{}), {} weights not updated, {:.3} among updated",
            s.fraction(),
            s.agree,
            s.total,
            s.zero,
            s.nonzero_fraction()
        );
    }
    Ok(())
}
