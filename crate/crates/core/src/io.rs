//! File formats: the binary `CVF1` time-series container, CSV maps, binary
//! PGM images and flat `key = value` configuration/manifest files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dataset::{ComplexDataset, Dims, Field};
use crate::error::{Error, Result};
use crate::sampler::TraceRow;

pub const MAGIC: &[u8; 4] = b"CVF1";
pub const VERSION: u32 = 1;

/// Header length in bytes for an image with `ndim` axes.
pub fn header_len(ndim: usize) -> u64 {
    4 + 4 + 4 + 8 * ndim as u64 + 8
}

pub fn encode_dataset(ds: &ComplexDataset) -> Vec<u8> {
    let ext = ds.dims().extents();
    let mut out = Vec::with_capacity(header_len(ext.len()) as usize + ds.data().len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(ext.len() as u32).to_le_bytes());
    for &e in ext {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    out.extend_from_slice(&(ds.t_len() as u64).to_le_bytes());
    for z in ds.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Decodes a `CVF1` buffer; `path` only labels errors.
pub fn decode_dataset(bytes: &[u8], path: &Path) -> Result<ComplexDataset> {
    let fail = |m: String| Error::parse(path, m);
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let chunk = bytes
            .get(pos..pos + n)
            .ok_or_else(|| Error::parse(path, "header ends early"))?;
        pos += n;
        Ok(chunk)
    };
    let magic = take(4)?;
    if magic != MAGIC {
        return Err(fail(format!("bad magic {magic:?}, expected \"CVF1\"")));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(fail(format!("unsupported version {version}, expected {VERSION}")));
    }
    let ndim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if !(2..=3).contains(&ndim) {
        return Err(fail(format!("unsupported dimensionality {ndim}")));
    }
    let mut ext = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        ext.push(u64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let t_len = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let head = header_len(ndim);
    let expected = ext
        .iter()
        .try_fold(t_len.checked_mul(16), |acc, &e| acc.map(|a| a.checked_mul(e)))
        .flatten()
        .and_then(|p| p.checked_add(head))
        .ok_or_else(|| fail("dimensions overflow".into()))?;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::TruncatedPayload { expected, actual });
    }
    if actual > expected {
        return Err(fail(format!("{} trailing bytes after payload", actual - expected)));
    }
    let dims = Dims::new(ext.iter().map(|&e| e as usize).collect::<Vec<_>>())
        .map_err(|e| fail(e.to_string()))?;
    let data = bytes[head as usize..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexDataset::new(dims, t_len as usize, data).map_err(|e| fail(e.to_string()))
}

pub fn write_dataset(path: &Path, ds: &ComplexDataset) -> Result<()> {
    fs::write(path, encode_dataset(ds)).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<ComplexDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes, path)
}

/// Renders a field as CSV: a `# dims RxC` line, then one grid row per line
/// (slices of a 3-D field follow each other).
pub fn field_to_csv<T: Display>(field: &Field<T>) -> String {
    let dims = field.dims();
    let cols = *dims.extents().last().unwrap();
    let mut out = format!("# dims {dims}\n");
    for row in field.values().chunks(cols) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn field_from_csv<T: FromStr>(text: &str, path: &Path) -> Result<Field<T>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let spec = header
        .strip_prefix("# dims ")
        .ok_or_else(|| Error::parse(path, "missing '# dims' header"))?;
    let ext: Vec<usize> = spec
        .trim()
        .split('x')
        .map(|s| s.parse().map_err(|_| Error::parse(path, format!("bad dims '{spec}'"))))
        .collect::<Result<_>>()?;
    let dims = Dims::new(ext).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut values = Vec::with_capacity(dims.voxel_count());
    for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        for cell in line.split(',') {
            let v = cell
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: bad value '{cell}'", ln + 2)))?;
            values.push(v);
        }
    }
    Field::new(dims, values).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_field_csv<T: Display>(path: &Path, field: &Field<T>) -> Result<()> {
    fs::write(path, field_to_csv(field)).map_err(|e| Error::io(path, e))
}

pub fn read_field_csv<T: FromStr>(path: &Path) -> Result<Field<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    field_from_csv(&text, path)
}

/// Binary greyscale PGM (P5, maxval 255). 3-D fields are stacked slice by
/// slice. Values are mapped linearly from `[0, scale]`; NaN becomes 0.
pub fn encode_pgm(field: &Field<f64>, scale: f64) -> Vec<u8> {
    let ext = field.dims().extents();
    let cols = ext[ext.len() - 1];
    let rows = field.len() / cols;
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(field.values().iter().map(|&v| {
        if scale > 0.0 && v.is_finite() {
            (v / scale * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

pub fn write_pgm(path: &Path, field: &Field<f64>, scale: f64) -> Result<()> {
    fs::write(path, encode_pgm(field, scale)).map_err(|e| Error::io(path, e))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, format!("line {}: expected 'key = value'", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text, path)
}

pub fn write_key_values(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "iteration,gamma,beta_re,beta_im,rho_re,rho_im,sigma2").map_err(io)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.iteration, r.gamma, r.beta.re, r.beta.im, r.rho.re, r.rho.im, r.sigma2
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
