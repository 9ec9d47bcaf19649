//! End-to-end study: simulate, fit and score a batch of replicates and print
//! the per-replicate table with its mean row.
//!
//! cargo run --release --example study_reproduction -- [iid|ar1|params|realistic] [replicates] [seed]

use cvfmri::study::{reproduce, Study};

fn main() -> cvfmri::Result<()> {
    let mut args = std::env::args().skip(1);
    let study: Study = args.next().unwrap_or_else(|| "ar1".into()).parse()?;
    let replicates: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    print!("{}", reproduce(study, replicates, seed, workers)?);
    Ok(())
}
