//! Partitions a grid into parcels and builds each parcel's low-rank spatial basis.
//!
//! cargo run --release --example parcellation_basis -- [rows] [cols] [G] [q]

use cvfmri::dataset::Dims;
use cvfmri::parcellation::{build_adjacency, build_spatial_basis, partition_grid, Neighborhood};

fn main() -> cvfmri::Result<()> {
    let a: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (rows, cols, g, q) = (*a.first().unwrap_or(&50), *a.get(1).unwrap_or(&50), *a.get(2).unwrap_or(&9), *a.get(3).unwrap_or(&5));

    let dims = Dims::grid2(rows, cols)?;
    let part = partition_grid(&dims, g)?;
    println!("{dims} into {} parcels, blocks per axis {:?}", part.n_parcels(), part.blocks);
    println!("parcel  voxels  edges  nu2 range");
    for (k, voxels) in part.parcels.iter().enumerate() {
        let adj = build_adjacency(voxels, &dims, Neighborhood::EdgeCorner);
        let basis = build_spatial_basis(&adj, q)?;
        let edges = adj.iter().filter(|&&w| w > 0.0).count() / 2;
        let lo = basis.nu2.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = basis.nu2.iter().cloned().fold(0.0, f64::max);
        println!("{k:6}  {:6}  {edges:5}  [{lo:.3}, {hi:.3}]", basis.len());
    }

    // Parcel labels as a small text map.
    if rows * cols <= 2500 {
        for r in 0..rows.min(20) {
            let line: String = (0..cols.min(60)).map(|c| char::from_digit((part.assignment[r * cols + c] % 36) as u32, 36).unwrap()).collect();
            println!("{line}");
        }
    }
    Ok(())
}
