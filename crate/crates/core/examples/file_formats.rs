//! Round trips through every on-disk format: CVF1 series, CSV maps, PGM
//! images and key = value configs.
//!
//! cargo run --example file_formats -- [dir]

use std::path::PathBuf;

use num_complex::Complex64;

use cvfmri::io::{encode_dataset, header_len, read_dataset, read_field_csv, read_key_values, write_dataset, write_field_csv, write_key_values, write_pgm};
use cvfmri::{ComplexDataset, Dims, Field};

fn main() -> cvfmri::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/format_example".into()));
    std::fs::create_dir_all(&dir).map_err(|e| cvfmri::Error::Io { path: dir.clone(), source: e })?;

    let dims = Dims::grid2(4, 6)?;
    let data: Vec<Complex64> = (0..24 * 10).map(|k| Complex64::from_polar(1.0 + k as f64 * 1e-3, k as f64 * 0.1)).collect();
    let ds = ComplexDataset::new(dims.clone(), 10, data)?;
    let path = dir.join("series.cvf");
    write_dataset(&path, &ds)?;
    println!("CVF1: header {} bytes, file {} bytes, round trip exact: {}", header_len(2), encode_dataset(&ds).len(), read_dataset(&path)? == ds);

    let field = Field::new(dims.clone(), (0..24).map(|k| (k as f64 / 7.0).sin()).collect())?;
    let csv = dir.join("map.csv");
    write_field_csv(&csv, &field)?;
    let back: Field<f64> = read_field_csv(&csv)?;
    println!("CSV map: round trip exact: {}", back == field);
    write_pgm(&dir.join("map.pgm"), &field.map(|v| v.abs()), 1.0)?;

    let conf = dir.join("fit.conf");
    write_key_values(&conf, &[("G".into(), "4".into()), ("psi".into(), "-0.0752".into())])?;
    println!("config: {:?}", read_key_values(&conf)?);
    println!("files in {}", dir.display());
    Ok(())
}
