use num_complex::Complex64;

use cvfmri::io::{header_len, read_dataset, write_dataset};
use cvfmri::{ComplexDataset, Dims, Error};

#[test]
fn one_voxel_file_size_and_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.cvf");
    let ds = ComplexDataset::new(Dims::grid2(1, 1).unwrap(), 2, vec![Complex64::new(1.0, -2.0), Complex64::new(f64::MIN_POSITIVE, 3.5)]).unwrap();
    write_dataset(&path, &ds).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len() as u64, header_len(2) + 32);
    assert_eq!(read_dataset(&path).unwrap(), ds);

    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    match read_dataset(&path) {
        Err(Error::TruncatedPayload { expected, actual, .. }) => assert_eq!(expected, actual + 8),
        other => panic!("expected a truncation error, got {other:?}"),
    }
}

#[test]
fn three_dimensional_dataset_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vol.cvf");
    let dims = Dims::new(vec![3, 4, 2]).unwrap();
    let data: Vec<Complex64> = (0..24 * 5).map(|k| Complex64::new(k as f64 * 0.1, -(k as f64).sqrt())).collect();
    let ds = ComplexDataset::new(dims, 5, data).unwrap();
    write_dataset(&path, &ds).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.dims().extents(), &[3, 4, 2]);
    assert_eq!(back.t_len(), 5);
    assert!(back.data().iter().zip(ds.data()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
}
