//! A single population of integrate-and-fire neurons with ternary spikes.
//!
//! Drives three neurons with constant, alternating and negative input and
//! prints the spikes, membrane potentials and net counts step by step, then
//! runs one error window through the same neurons.
//!
//!     cargo run --example neuron_dynamics

use relspike::{HyperParams, PopulationState};

fn main() -> relspike::Result<()> {
    let hp = HyperParams::new(1.0, 1.0, 5e-5, 1.0)?;
    let mut pop = PopulationState::new(3)?;

    println!("step  input                spikes      v");
    for step in 0..8 {
        let alternating = if step % 2 == 0 { 1.6 } else { -1.4 };
        let input = [0.4, alternating, -0.7];
        let s = pop.forward_step(&input, &hp)?;
        println!("{step:>4}  {input:>5.1?}  {:>10?}  {:.2?}", s.to_i8(), pop.v());
    }
    // Negative input alone never produces a negative count.
    println!("net counts {:?}", pop.net_counts(&hp));
    println!("surrogate derivative {:?}", (0..3).map(|i| pop.surrogate_derivative(i, &hp)).collect::<Result<Vec<_>, _>>()?);

    println!("\nerror window");
    for step in 0..4 {
        let z = pop.error_step(&[0.6, -0.8, 1.5], &hp)?;
        let delta = pop.gate_error(&z, &hp)?;
        println!("{step:>4}  ternarized {:>10?}  gated {:>10?}  u {:.2?}", z.to_i8(), delta.to_i8(), pop.u());
    }
    Ok(())
}
