//! Split a run with a text checkpoint and check that the resumed run is
//! bit-identical to an uninterrupted one.
//!
//!     cargo run --release --example checkpoint_resume

use blackbody1d::config::{parse_config, Config};
use blackbody1d::engine::Simulation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Config::Run(config) =
        parse_config("[model]\nmode = discrete\nN = 32\nE = 40\n[run]\nseed = 7\n")?
    else {
        unreachable!()
    };
    let (first, second) = (300_000, 700_000);

    let mut whole = config.simulation()?;
    whole.run(first + second)?;

    let mut part = config.simulation()?;
    part.run(first)?;
    let text = part.to_checkpoint();
    println!(
        "checkpoint after {first} collisions: {} bytes, {} lines",
        text.len(),
        text.lines().count()
    );
    let mut resumed = Simulation::from_checkpoint(&text)?;
    resumed.run(second)?;

    let same_state = resumed.state() == whole.state();
    let same_means = resumed.stats().means() == whole.stats().means();
    let same_rng = resumed.rng().word_pos() == whole.rng().word_pos();
    println!(
        "state identical: {same_state}, means identical: {same_means}, rng identical: {same_rng}"
    );
    println!(
        "t = {:.6}, <E0> = {:.6}",
        resumed.state().time,
        resumed.stats().means().particle
    );
    assert!(same_state && same_means && same_rng);
    Ok(())
}
