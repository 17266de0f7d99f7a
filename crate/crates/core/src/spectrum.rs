//! Full eigen-decomposition of t_q(0), eigenvalue ordering and labelling,
//! dominant-eigenvalue verification, and finite-N correlation ratios.
//!
//! Eigenvalues are sorted by nonincreasing modulus; within a modulus
//! cluster the order follows increasing principal argument in [−π, π).
//! Sector decompositions exploit magnetization conservation: the block of
//! t_q(0) on states with m down spins has dimension binomial(2N, m).

use crate::qtm::down_spin_count;
use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::Eig;
use num_complex::Complex64 as C64;
use std::io::Write;
use thiserror::Error;

/// Relative modulus gap below which two eigenvalues share a cluster.
pub const CLUSTER_REL_TOL: f64 = 1e-8;
/// Maximum admissible eigenpair residual ‖Ax − λx‖/‖x‖.
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("eigendecomposition failed{0}: {1}")]
    ConvergenceFailure(String, String),
    #[error("eigenpair residual {0:.3e} exceeds {EIG_RESIDUAL_TOL:.0e}")]
    ResidualTooLarge(f64),
    #[error("spectral gap too small: |Λ₂|/Λ_max = {0}")]
    GapTooSmall(f64),
    #[error("power iteration disagrees with the decomposition: {0} vs {1}")]
    DominantMismatch(f64, f64),
    #[error("dominant eigenvalue is not real and nondegenerate")]
    DominantNotReal,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One diagonalised operator, globally ordered.
#[derive(Clone, Debug)]
pub struct SpectrumRecord {
    /// Eigenvalues, sorted.
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors; column k belongs to `eigenvalues[k]`. For
    /// sector-assembled spectra the vectors live in the sector bases and
    /// `sector_indices` maps their components to global basis rows.
    pub eigenvectors: Array2<C64>,
    /// Magnetization sector (down-spin count) of each state.
    pub sectors: Vec<usize>,
    /// Rank of each state inside its own sector ordering.
    pub rank_in_sector: Vec<usize>,
    /// Modulus-cluster id per state; equal ids mark |Λ| ties.
    pub cluster_ids: Vec<usize>,
    /// Eigenpair residuals ‖Ax − λx‖/‖x‖.
    pub residuals: Vec<f64>,
}

/// The diagonalised block of one magnetization sector.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    /// Down-spin count labelling the sector.
    pub sector: usize,
    /// Global basis rows spanning the sector.
    pub indices: Vec<usize>,
    /// Eigenvalues sorted by the modulus-then-argument order.
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors in the sector basis; column k ↔ eigenvalue k.
    pub eigenvectors: Array2<C64>,
    pub cluster_ids: Vec<usize>,
    pub residuals: Vec<f64>,
}

/// Basis rows of h_q (2N sites) carrying exactly `down` down spins.
pub fn sector_basis(num_sites: usize, down: usize) -> Vec<usize> {
    (0..1usize << num_sites)
        .filter(|&i| down_spin_count(i) == down)
        .collect()
}

/// Extracts the sector block of a real operator.
pub fn sector_block(op: &Array2<f64>, indices: &[usize]) -> Array2<f64> {
    let n = indices.len();
    let mut out = Array2::zeros((n, n));
    for (r, &gi) in indices.iter().enumerate() {
        for (c, &gj) in indices.iter().enumerate() {
            out[[r, c]] = op[[gi, gj]];
        }
    }
    out
}

/// Extracts the sector block of a complex operator.
pub fn sector_block_complex(op: &Array2<C64>, indices: &[usize]) -> Array2<C64> {
    let n = indices.len();
    let mut out = Array2::zeros((n, n));
    for (r, &gi) in indices.iter().enumerate() {
        for (c, &gj) in indices.iter().enumerate() {
            out[[r, c]] = op[[gi, gj]];
        }
    }
    out
}

/// Argument in [−π, π): +π maps to −π.
fn arg_half_open(z: C64) -> f64 {
    let a = z.im.atan2(z.re);
    if a >= std::f64::consts::PI {
        a - 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Sorting permutation: nonincreasing |λ|, ties by increasing argument.
fn sorted_order(vals: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        vals[b]
            .norm()
            .partial_cmp(&vals[a].norm())
            .unwrap()
            .then(arg_half_open(vals[a]).partial_cmp(&arg_half_open(vals[b])).unwrap())
    });
    // Within each modulus cluster, re-sort strictly by argument so that
    // near-ties (conjugate pairs equal to rounding) are ordered canonically.
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        let m0 = vals[idx[start]].norm();
        while end < idx.len() && (m0 - vals[idx[end]].norm()).abs() <= CLUSTER_REL_TOL * m0.max(1e-300)
        {
            end += 1;
        }
        idx[start..end]
            .sort_by(|&a, &b| arg_half_open(vals[a]).partial_cmp(&arg_half_open(vals[b])).unwrap());
        start = end;
    }
    idx
}

fn cluster_ids_of(sorted: &[C64]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(sorted.len());
    let mut id = 0usize;
    for k in 0..sorted.len() {
        if k > 0 {
            let prev = sorted[k - 1].norm();
            if (prev - sorted[k].norm()).abs() > CLUSTER_REL_TOL * prev.max(1e-300) {
                id += 1;
            }
        }
        ids.push(id);
    }
    ids
}

fn residual(block: &Array2<C64>, vec: ArrayView1<C64>, lam: C64) -> f64 {
    let ax = block.dot(&vec);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, x) in ax.iter().zip(vec.iter()) {
        num += (a - lam * x).norm_sqr();
        den += x.norm_sqr();
    }
    (num / den).sqrt()
}

/// Diagonalises one magnetization sector of a real operator.
pub fn sector_spectrum(op: &Array2<f64>, down: usize) -> Result<SectorSpectrum, SpectrumError> {
    let num_sites = op.nrows().trailing_zeros() as usize;
    let indices = sector_basis(num_sites, down);
    let block = sector_block(op, &indices);
    let (vals, vecs) = block
        .eig()
        .map_err(|e| SpectrumError::ConvergenceFailure(format!(" in sector {down}"), e.to_string()))?;
    let cblock = block.mapv(|x| C64::new(x, 0.0));
    let order = sorted_order(vals.as_slice().unwrap());
    let n = vals.len();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Array2::zeros((n, n));
    let mut residuals = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let lam = vals[src];
        let v = vecs.column(src);
        let r = residual(&cblock, v, lam);
        if r > EIG_RESIDUAL_TOL {
            return Err(SpectrumError::ResidualTooLarge(r));
        }
        eigenvalues.push(lam);
        eigenvectors.column_mut(k).assign(&v);
        residuals.push(r);
    }
    let cluster_ids = cluster_ids_of(&eigenvalues);
    Ok(SectorSpectrum { sector: down, indices, eigenvalues, eigenvectors, cluster_ids, residuals })
}

/// Diagonalises every sector and assembles the globally ordered record.
pub fn full_spectrum_by_sectors(op: &Array2<f64>) -> Result<SpectrumRecord, SpectrumError> {
    let num_sites = op.nrows().trailing_zeros() as usize;
    let mut all: Vec<(C64, usize, usize, f64)> = Vec::new();
    let mut sector_specs = Vec::new();
    for down in 0..=num_sites {
        let s = sector_spectrum(op, down)?;
        for (k, &lam) in s.eigenvalues.iter().enumerate() {
            all.push((lam, down, k, s.residuals[k]));
        }
        sector_specs.push(s);
    }
    let vals: Vec<C64> = all.iter().map(|e| e.0).collect();
    let order = sorted_order(&vals);
    let dim = op.nrows();
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut eigenvectors = Array2::zeros((dim, dim));
    let mut sectors = Vec::with_capacity(dim);
    let mut rank_in_sector = Vec::with_capacity(dim);
    let mut residuals = Vec::with_capacity(dim);
    for (k, &src) in order.iter().enumerate() {
        let (lam, down, rank, res) = all[src];
        eigenvalues.push(lam);
        sectors.push(down);
        rank_in_sector.push(rank);
        residuals.push(res);
        let s = &sector_specs[down];
        for (row_local, &row_global) in s.indices.iter().enumerate() {
            eigenvectors[[row_global, k]] = s.eigenvectors[[row_local, rank]];
        }
    }
    let cluster_ids = cluster_ids_of(&eigenvalues);
    Ok(SpectrumRecord { eigenvalues, eigenvectors, sectors, rank_in_sector, cluster_ids, residuals })
}

/// Direct full-matrix decomposition; validation path for the sector route.
pub fn full_spectrum(op: &Array2<f64>) -> Result<SpectrumRecord, SpectrumError> {
    let (vals, vecs) = op
        .eig()
        .map_err(|e| SpectrumError::ConvergenceFailure(String::new(), e.to_string()))?;
    let cop = op.mapv(|x| C64::new(x, 0.0));
    let order = sorted_order(vals.as_slice().unwrap());
    let n = vals.len();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Array2::zeros((n, n));
    let mut sectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let lam = vals[src];
        let v = vecs.column(src);
        let r = residual(&cop, v, lam);
        if r > EIG_RESIDUAL_TOL {
            return Err(SpectrumError::ResidualTooLarge(r));
        }
        eigenvalues.push(lam);
        eigenvectors.column_mut(k).assign(&v);
        residuals.push(r);
        // Dominant support bit pattern labels the sector.
        let best = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        sectors.push(down_spin_count(best));
    }
    let cluster_ids = cluster_ids_of(&eigenvalues);
    let rank_in_sector = vec![0; n];
    Ok(SpectrumRecord { eigenvalues, eigenvectors, sectors, rank_in_sector, cluster_ids, residuals })
}

/// Λ_a / Λ_max, the finite-N approximant of e^{−1/ξ_a}.
pub fn correlation_ratio(spec: &SpectrumRecord, a: usize) -> C64 {
    spec.eigenvalues[a] / spec.eigenvalues[0]
}

/// Dominant eigenvalue by power iteration, cross-checked against the full
/// decomposition. Asserts realness, nondegeneracy and a spectral gap.
pub fn dominant_eigenvalue(op: &Array2<f64>) -> Result<f64, SpectrumError> {
    let dim = op.nrows();
    let mut x = Array1::<f64>::from_elem(dim, 1.0 / (dim as f64).sqrt());
    let mut lam = 0.0f64;
    for it in 0..20_000 {
        let y = op.dot(&x);
        let norm = y.dot(&y).sqrt();
        let rayleigh = x.dot(&y);
        x = y / norm;
        if it > 2 && (rayleigh - lam).abs() <= 1e-14 * rayleigh.abs().max(1.0) {
            lam = rayleigh;
            break;
        }
        lam = rayleigh;
    }
    let spec = full_spectrum_by_sectors(op)?;
    let top = spec.eigenvalues[0];
    if top.im.abs() > 1e-10 * top.norm() {
        return Err(SpectrumError::DominantNotReal);
    }
    let gap = spec.eigenvalues[1].norm() / top.norm();
    if gap > 0.99 {
        return Err(SpectrumError::GapTooSmall(gap));
    }
    if (spec.eigenvalues[1].norm() - top.norm()).abs() < 1e-12 * top.norm() {
        return Err(SpectrumError::DominantNotReal);
    }
    if ((lam - top.re) / top.re).abs() > 1e-10 {
        return Err(SpectrumError::DominantMismatch(lam, top.re));
    }
    Ok(top.re)
}

/// CSV export: `index,sector,re,im,modulus,arg`.
pub fn export_csv<W: Write>(spec: &SpectrumRecord, mut out: W) -> Result<(), SpectrumError> {
    writeln!(out, "index,sector,re,im,modulus,arg")?;
    for (k, lam) in spec.eigenvalues.iter().enumerate() {
        writeln!(
            out,
            "{},{},{:.15e},{:.15e},{:.15e},{:.15e}",
            k,
            spec.sectors[k],
            lam.re,
            lam.im,
            lam.norm(),
            arg_half_open(*lam)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChainParams;
    use crate::qtm::{transfer_matrix_zero, DEFAULT_MEMORY_BUDGET};
    use std::f64::consts::PI;

    const Z7: f64 = PI / 7.0;

    /// Faddeev–LeVerrier characteristic polynomial + Durand–Kerner roots;
    /// an eigenvalue oracle independent of LAPACK.
    fn charpoly_roots(m: &Array2<f64>) -> Vec<C64> {
        let n = m.nrows();
        let a = m.mapv(|x| C64::new(x, 0.0));
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        let mut mk = Array2::<C64>::eye(n);
        for k in 1..=n {
            mk = a.dot(&mk);
            let tr: C64 = (0..n).map(|i| mk[[i, i]]).sum();
            let c = -tr / k as f64;
            coeffs.push(c);
            for i in 0..n {
                mk[[i, i]] += c;
            }
        }
        // roots of λ^n + c1 λ^{n-1} + … + cn by Durand–Kerner
        let mut roots: Vec<C64> = (0..n)
            .map(|k| C64::new(0.4, 0.9).powu(k as u32 + 1))
            .collect();
        let eval = |z: C64| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for c in &coeffs {
                acc = acc * z + c;
            }
            acc
        };
        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..n {
                let mut denom = C64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                max_step = max_step.max(step.norm());
            }
            if max_step < 1e-14 {
                break;
            }
        }
        roots
    }

    #[test]
    fn n1_spectrum_two_ways() {
        // Near the infinite-temperature point the 4×4 t_q(0) spectrum from
        // the decomposition agrees with the characteristic-polynomial oracle.
        let p = ChainParams::new(1.0, Z7, 0.0, 1e6, 1, 2).unwrap();
        let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        let spec = full_spectrum(&t0).unwrap();
        let mut oracle = charpoly_roots(&t0);
        oracle.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        let mut got = spec.eigenvalues.clone();
        got.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        for (g, o) in got.iter().zip(oracle.iter()) {
            assert!((g - o).norm() < 1e-10, "{got:?} vs {oracle:?}");
        }
    }

    #[test]
    fn sector_and_full_paths_agree() {
        let p = ChainParams::new(1.0, Z7, 0.3, 20.0, 2, 4).unwrap();
        let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        let by_sector = full_spectrum_by_sectors(&t0).unwrap();
        let direct = full_spectrum(&t0).unwrap();
        for (a, b) in by_sector.eigenvalues.iter().zip(direct.eigenvalues.iter()) {
            assert!((a - b).norm() < 1e-9, "sector vs direct eigenvalues differ");
        }
    }

    #[test]
    fn trace_identity_and_conjugate_closure() {
        let p = ChainParams::new(1.0, Z7, 0.0, 50.0, 3, 4).unwrap();
        let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        let spec = full_spectrum_by_sectors(&t0).unwrap();
        let tr: f64 = (0..t0.nrows()).map(|i| t0[[i, i]]).sum();
        let sum: C64 = spec.eigenvalues.iter().sum();
        assert!((sum.re - tr).abs() < 1e-10 * tr.abs().max(1.0));
        assert!(sum.im.abs() < 1e-10);
        for lam in &spec.eigenvalues {
            if lam.im.abs() > 1e-8 {
                let found = spec
                    .eigenvalues
                    .iter()
                    .any(|mu| (mu - lam.conj()).norm() < 1e-8);
                assert!(found, "no conjugate partner for {lam}");
            }
        }
    }

    #[test]
    fn sector_dimensions_are_binomial() {
        let p = ChainParams::new(1.0, Z7, 0.0, 50.0, 3, 4).unwrap();
        let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        let spec = full_spectrum_by_sectors(&t0).unwrap();
        let mut counts = vec![0usize; 7];
        for &s in &spec.sectors {
            counts[s] += 1;
        }
        assert_eq!(counts, vec![1, 6, 15, 20, 15, 6, 1]);
    }

    #[test]
    fn dominant_eigenvalue_checks() {
        let p = ChainParams::new(1.0, Z7, 0.0, 1000.0, 4, 4).unwrap();
        let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        let lam = dominant_eigenvalue(&t0).unwrap();
        // Λ_max ∈ [2 − 10/T, 2 + 10/T] at T = 1000.
        assert!(lam > 2.0 - 0.01 && lam < 2.0 + 0.01, "Λ_max = {lam}");
    }

    #[test]
    fn dominant_h_symmetry() {
        let mk = |h: f64| {
            let p = ChainParams::new(1.0, Z7, h, 200.0, 3, 4).unwrap();
            let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
            dominant_eigenvalue(&t0).unwrap()
        };
        let a = mk(0.4);
        let b = mk(-0.4);
        assert!((a - b).abs() < 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn correlation_ratios_bounded() {
        let p = ChainParams::new(1.0, Z7, 0.0, 100.0, 3, 4).unwrap();
        let (t0, _) = transfer_matrix_zero(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        let spec = full_spectrum_by_sectors(&t0).unwrap();
        assert!((correlation_ratio(&spec, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
        for a in 1..spec.eigenvalues.len() {
            assert!(correlation_ratio(&spec, a).norm() < 1.0);
        }
    }

    #[test]
    fn ordering_ties_by_argument() {
        let vals = vec![
            C64::new(0.0, -1.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
        ];
        let order = sorted_order(&vals);
        // all moduli equal; sorted by arg in [−π, π): −π, −π/2, 0, π/2
        assert_eq!(order, vec![3, 0, 1, 2]);
    }
}
