//! Saves a network and its config, reads them back and compares the bytes.
//!
//!     cargo run --example checkpoint_roundtrip

use relspike::checkpoint::{encode_checkpoint, load_checkpoint, load_checkpoint_for, save_checkpoint};
use relspike::{Error, RelationalTopology, SimulationConfig};

fn main() -> relspike::Result<()> {
    let mut config = SimulationConfig::addition();
    config.seed = 42;
    let topo = RelationalTopology::build(&config)?;

    let dir = std::env::temp_dir().join(format!("relspike-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("net.srn");
    save_checkpoint(&topo, &config, &path)?;
    let bytes = std::fs::read(&path)?;
    println!("wrote {} bytes to {}", bytes.len(), path.display());

    let (loaded, loaded_config) = load_checkpoint(&path)?;
    println!("sizes {:?}, seed {}", loaded.sizes(), loaded_config.seed);
    println!("re-encoded identical: {}", encode_checkpoint(&loaded, &loaded_config) == bytes);

    match load_checkpoint_for(&path, SimulationConfig::xor().sizes()) {
        Err(e @ Error::SizeMismatch { .. }) => println!("loading for the XOR task: {e}"),
        other => println!("unexpected: {:?}", other.map(|_| ())),
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
