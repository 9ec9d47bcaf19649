//! Geometric parcellation of the image and the per-parcel spatial basis
//! (adjacency, graph Laplacian, principal eigenvectors and the matrices the
//! sampler reuses every sweep).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::Dims;
use crate::error::{Error, Result};

/// Which grid neighbours are adjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Neighborhood {
    /// Voxels sharing a face (4 in 2-D, 6 in 3-D).
    Edge,
    /// Voxels sharing a face, edge or corner (8 in 2-D, 26 in 3-D).
    #[default]
    EdgeCorner,
}

impl std::str::FromStr for Neighborhood {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(Neighborhood::Edge),
            "edge+corner" | "edge-corner" | "corner" => Ok(Neighborhood::EdgeCorner),
            other => Err(Error::InvalidSpec(format!("unknown neighborhood '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub dims: Dims,
    /// Number of blocks along each axis; empty for the raster-strip fallback.
    pub blocks: Vec<usize>,
    pub assignment: Vec<usize>,
    pub parcels: Vec<Vec<usize>>,
}

impl Partition {
    pub fn n_parcels(&self) -> usize {
        self.parcels.len()
    }
}

/// Lengths of `k` contiguous runs covering `n`, longer runs first.
pub fn split_axis(n: usize, k: usize) -> Vec<usize> {
    let (base, extra) = (n / k, n % k);
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

fn factorizations(g: usize, axes: usize) -> Vec<Vec<usize>> {
    if axes == 1 {
        return vec![vec![g]];
    }
    let mut out = Vec::new();
    for d in (1..=g).filter(|d| g % d == 0) {
        for mut rest in factorizations(g / d, axes - 1) {
            rest.insert(0, d);
            out.push(rest);
        }
    }
    out
}

/// Splits the grid into `g` blocks of near-equal geometric size. The block
/// counts per axis are the factorization of `g` whose blocks are closest to
/// square (cubic); when no factorization fits the grid, the row-major voxel
/// order is cut into `g` runs instead.
pub fn partition_grid(dims: &Dims, g: usize) -> Result<Partition> {
    let n = dims.voxel_count();
    if g == 0 || g > n {
        return Err(Error::InvalidSpec(format!(
            "cannot split {n} voxels into {g} parcels"
        )));
    }
    let ext = dims.extents();
    let best = factorizations(g, ext.len())
        .into_iter()
        .filter(|f| f.iter().zip(ext).all(|(&k, &e)| k <= e))
        .map(|f| {
            let sides: Vec<f64> = f.iter().zip(ext).map(|(&k, &e)| e as f64 / k as f64).collect();
            let hi = sides.iter().cloned().fold(f64::MIN, f64::max);
            let lo = sides.iter().cloned().fold(f64::MAX, f64::min);
            (hi / lo, f)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0));

    let mut assignment = vec![0usize; n];
    let blocks = match best {
        Some((_, blocks)) => {
            // Block index of each coordinate along each axis.
            let axis_maps: Vec<Vec<usize>> = blocks
                .iter()
                .zip(ext)
                .map(|(&k, &e)| {
                    split_axis(e, k)
                        .into_iter()
                        .enumerate()
                        .flat_map(|(b, len)| std::iter::repeat(b).take(len))
                        .collect()
                })
                .collect();
            for (v, slot) in assignment.iter_mut().enumerate() {
                let coords = dims.coords(v);
                *slot = coords
                    .iter()
                    .zip(&axis_maps)
                    .zip(&blocks)
                    .fold(0, |acc, ((&c, map), &k)| acc * k + map[c]);
            }
            blocks
        }
        None => {
            let mut v = 0;
            for (p, len) in split_axis(n, g).into_iter().enumerate() {
                for slot in &mut assignment[v..v + len] {
                    *slot = p;
                }
                v += len;
            }
            Vec::new()
        }
    };
    let mut parcels = vec![Vec::new(); g];
    for (v, &p) in assignment.iter().enumerate() {
        parcels[p].push(v);
    }
    Ok(Partition {
        dims: dims.clone(),
        blocks,
        assignment,
        parcels,
    })
}

/// Symmetric 0/1 adjacency of the voxels of one parcel, truncated at the
/// parcel border.
pub fn build_adjacency(voxels: &[usize], dims: &Dims, neighborhood: Neighborhood) -> DMatrix<f64> {
    let n = voxels.len();
    let mut local = std::collections::HashMap::with_capacity(n);
    for (i, &v) in voxels.iter().enumerate() {
        local.insert(v, i);
    }
    let ndim = dims.ndim();
    let offsets: Vec<Vec<isize>> = (0..3usize.pow(ndim as u32))
        .map(|code| {
            let mut c = code;
            (0..ndim)
                .map(|_| {
                    let d = (c % 3) as isize - 1;
                    c /= 3;
                    d
                })
                .collect::<Vec<isize>>()
        })
        .filter(|off| {
            let nonzero = off.iter().filter(|&&d| d != 0).count();
            match neighborhood {
                Neighborhood::Edge => nonzero == 1,
                Neighborhood::EdgeCorner => nonzero >= 1,
            }
        })
        .collect();
    let mut a = DMatrix::zeros(n, n);
    for (i, &v) in voxels.iter().enumerate() {
        let coords = dims.coords(v);
        for off in &offsets {
            let nb: Vec<isize> = coords.iter().zip(off).map(|(&c, &d)| c as isize + d).collect();
            if !dims.contains(&nb) {
                continue;
            }
            let nb: Vec<usize> = nb.into_iter().map(|c| c as usize).collect();
            if let Some(&j) = local.get(&dims.index(&nb)) {
                a[(i, j)] = 1.0;
            }
        }
    }
    a
}

/// `Q = diag(A 1) - A`.
pub fn graph_laplacian(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidSpec("adjacency must be square".into()));
    }
    let n = a.nrows();
    for i in 0..n {
        if a[(i, i)] != 0.0 {
            return Err(Error::InvalidSpec(format!("adjacency has a self-loop at {i}")));
        }
        for j in 0..i {
            if a[(i, j)] != a[(j, i)] {
                return Err(Error::InvalidSpec(format!("adjacency is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut q = -a.clone();
    for i in 0..n {
        q[(i, i)] = a.row(i).sum();
    }
    Ok(q)
}

/// Eigenvectors of `a` for its `q` algebraically largest eigenvalues, in
/// decreasing order. Each column is signed so its largest-magnitude entry is
/// positive.
pub fn principal_eigenvectors(a: &DMatrix<f64>, q: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if q == 0 || q > n {
        return Err(Error::InvalidSpec(format!("q = {q} must lie in 1..={n}")));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let mut m = DMatrix::zeros(n, q);
    let mut values = Vec::with_capacity(q);
    for (col, &k) in order.iter().take(q).enumerate() {
        let mut vec = eig.eigenvectors.column(k).into_owned();
        let max_abs = vec.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        let pivot = vec
            .iter()
            .position(|&x| x.abs() >= max_abs * (1.0 - 1e-9))
            .unwrap_or(0);
        if vec[pivot] < 0.0 {
            vec.neg_mut();
        }
        m.set_column(col, &vec);
        values.push(eig.eigenvalues[k]);
    }
    Ok((values, m))
}

/// Immutable spatial machinery of one parcel.
#[derive(Debug, Clone)]
pub struct SpatialBasis {
    pub adjacency: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    /// `V_g x q` principal eigenvectors of the adjacency.
    pub m: DMatrix<f64>,
    /// `M' Q M`.
    pub qs: DMatrix<f64>,
    /// `(Qs + M'M)^-1`.
    pub qhat_inv: DMatrix<f64>,
    /// Lower Cholesky factor of `qhat_inv`.
    pub qhat_inv_chol: DMatrix<f64>,
    /// Diagonal of `I + M Qs^-1 M'`.
    pub nu2: Vec<f64>,
}

/// Largest condition number of `Qs` accepted as invertible.
pub const MAX_CONDITION: f64 = 1e12;

impl SpatialBasis {
    pub fn q(&self) -> usize {
        self.m.ncols()
    }

    pub fn len(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.m.nrows() == 0
    }
}

pub fn build_spatial_basis(a: &DMatrix<f64>, q: usize) -> Result<SpatialBasis> {
    let laplacian = graph_laplacian(a)?;
    let (_, m) = principal_eigenvectors(a, q)?;
    let mt = m.transpose();
    let qs = &mt * &laplacian * &m;
    let qs = (&qs + qs.transpose()) * 0.5;
    let spectrum = SymmetricEigen::new(qs.clone()).eigenvalues;
    // Measured against the Laplacian's own scale so a 1x1 near-zero Qs is caught.
    let max_degree = laplacian.diagonal().max();
    let hi = spectrum.iter().cloned().fold(max_degree, f64::max);
    let lo = spectrum.iter().cloned().fold(f64::MAX, f64::min);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularBasis { condition });
    }
    let qs_inv = qs
        .clone()
        .cholesky()
        .ok_or(Error::SingularBasis { condition })?
        .inverse();
    let qhat = &qs + &mt * &m;
    let qhat_inv = qhat
        .cholesky()
        .ok_or(Error::SingularBasis { condition })?
        .inverse();
    let qhat_inv = (&qhat_inv + qhat_inv.transpose()) * 0.5;
    let qhat_inv_chol = qhat_inv
        .clone()
        .cholesky()
        .ok_or(Error::SingularBasis { condition })?
        .l();
    let nu2 = (0..m.nrows())
        .map(|v| {
            let row: DVector<f64> = m.row(v).transpose();
            1.0 + (row.transpose() * &qs_inv * &row)[(0, 0)]
        })
        .collect();
    Ok(SpatialBasis {
        adjacency: a.clone(),
        laplacian,
        m,
        qs,
        qhat_inv,
        qhat_inv_chol,
        nu2,
    })
}

/// Writes a matrix as comma-separated rows, for debugging dumps.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
