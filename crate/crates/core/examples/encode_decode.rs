//! Rate coding of numbers and images and the population decoders.
//!
//!     cargo run --example encode_decode

use relspike::codec::{decode_image, decode_value, image_scale, number_profile, periodic_error, pixel_rates, schedule};
use relspike::SimulationConfig;

fn main() -> relspike::Result<()> {
    let config = SimulationConfig::addition();
    let window = config.t_expl as f64 * config.dt;
    let n = config.n_x;

    for xi in [0.0, 0.13, 0.5, 0.97] {
        let rates = number_profile(xi, n, config.r_max)?;
        let counts: Vec<f64> = schedule(&rates, 0.0, window)?.counts().into_iter().map(|c| c as f64).collect();
        let decoded = decode_value(&counts, n)?;
        let bar: String = counts.iter().step_by(2).map(|&c| if c >= 8.0 { '#' } else if c >= 4.0 { '+' } else if c > 0.0 { '.' } else { ' ' }).collect();
        println!("xi {xi:.2} -> {decoded:.2} (error {:.3}) |{bar}|", periodic_error(decoded, xi));
    }

    // A 4x4 "image": pixels map to rates, counts map back to [0, 1].
    let pixels = [0.0, 0.25, 0.5, 1.0, 1.0, 0.5, 0.25, 0.0, 0.0, 0.0, 1.0, 1.0, 0.9, 0.1, 0.3, 0.7];
    let rates = pixel_rates(&pixels, config.r_max)?;
    let steps = schedule(&rates, 0.0, window)?;
    let counts: Vec<f64> = steps.counts().into_iter().map(|c| c as f64).collect();
    let restored = decode_image(&counts, image_scale(config.r_max, config.t_expl));
    println!("\npixel  count  restored");
    for ((p, c), r) in pixels.iter().zip(&counts).zip(&restored) {
        println!("{p:>5.2}  {c:>5}  {r:>8.3}");
    }
    Ok(())
}
