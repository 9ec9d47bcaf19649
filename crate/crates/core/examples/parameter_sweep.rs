//! Sweeps the prior inclusion probability, the parcel count and the series
//! length on AR(1) data, averaging a few replicates per setting.
//!
//! cargo run --release --example parameter_sweep -- [replicates] [seed]

use cvfmri::metrics::metrics_table;
use cvfmri::study::parameter_sweeps;

fn main() -> cvfmri::Result<()> {
    let mut args = std::env::args().skip(1);
    let replicates: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let rows = parameter_sweeps(replicates, seed, workers)?;
    // The trailing mean row of the table averages across settings; drop it.
    let table = metrics_table(&rows);
    for line in table.lines().filter(|l| !l.starts_with("mean,")) {
        println!("{line}");
    }
    Ok(())
}
