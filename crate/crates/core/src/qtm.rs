//! Six-vertex R-matrix, quantum monodromy matrix, quantum transfer matrix
//! t_q(ξ), its rank-1 part ω_{N;0} = v·wᵗ with perturbation δt_q, and the
//! periodic XXZ Hamiltonian used for cross-checks.
//!
//! Conventions. The quantum space is h_q = (C²)^⊗2N with site 1 carrying
//! the most significant bit of the basis index and basis vector e₁ ↦ bit 0,
//! e₂ ↦ bit 1. Operators that still involve the auxiliary space h_0 carry
//! its index as the top bit. The monodromy matrix is the ordered product
//!
//!   T(ξ) = R^{t}_{2N,0}(−ℵ/N−ξ) R_{0,2N−1}(ξ−ℵ/N) ⋯
//!          R^{t}_{2,0}(−ℵ/N−ξ) R_{0,1}(ξ−ℵ/N) · e^{(h/2T)σ₀^z},
//!
//! built here by growing the partial product one site at a time; t_q(ξ)
//! fuses the last factor with the trace over h_0 so the 2·4^N intermediate
//! is never materialised.

use crate::model::ChainParams;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::io::Write;
use thiserror::Error;

pub type DenseOperator = Array2<C64>;

/// Default cap on the Trotter number for dense construction.
pub const DEFAULT_N_MAX: usize = 6;
/// Default memory budget for a single dense operator, in bytes.
pub const DEFAULT_MEMORY_BUDGET: usize = 6 << 30;
/// Default cap on the chain length for the dense Hamiltonian.
pub const DEFAULT_L_MAX: usize = 14;

#[derive(Debug, Error)]
pub enum QtmError {
    #[error("R-matrix undefined: |sinh eta| = {0:.3e} < 1e-14")]
    SingularEta(f64),
    #[error("operator of dimension {dim} exceeds the memory budget of {budget} bytes")]
    DimensionOverflow { dim: usize, budget: usize },
    #[error("trotter number {0} exceeds the configured maximum {1}")]
    TrotterTooLarge(usize, usize),
    #[error("chain length {0} exceeds the configured maximum {1}")]
    LengthTooLarge(usize, usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn check_budget(dim: usize, budget: usize) -> Result<(), QtmError> {
    if dim.saturating_mul(dim).saturating_mul(16) > budget {
        return Err(QtmError::DimensionOverflow { dim, budget });
    }
    Ok(())
}

/// The six-vertex R-matrix on C²⊗C², normalised by 1/sinh η.
pub fn r_matrix(lambda: C64, eta: C64) -> Result<Array2<C64>, QtmError> {
    let sh = eta.sinh();
    if sh.norm() < 1e-14 {
        return Err(QtmError::SingularEta(sh.norm()));
    }
    let a = (eta + lambda).sinh() / sh;
    let b = lambda.sinh() / sh;
    let c = sh / sh;
    let z = C64::new(0.0, 0.0);
    Ok(ndarray::array![
        [a, z, z, z],
        [z, b, c, z],
        [z, c, b, z],
        [z, z, z, a]
    ])
}

/// Partial transpose of a two-site operator with respect to its first slot.
pub fn partial_transpose_first(m: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((4, 4));
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    // (T^{t₁})_{(i j),(k l)} = T_{(k j),(i l)}
                    out[[2 * i + j, 2 * k + l]] = m[[2 * k + j, 2 * i + l]];
                }
            }
        }
    }
    out
}

/// Factor acting on h_0 ⊗ h_a for an odd quantum site: R_{0,a}(ξ − ℵ/N),
/// indexed as F[(aux t),(aux' t')].
fn factor_odd(xi: C64, p: &ChainParams) -> Result<Array2<C64>, QtmError> {
    r_matrix(xi - p.aleph() / p.trotter as f64, p.eta())
}

/// Factor for an even quantum site: R^{t_a}_{a,0}(−ℵ/N − ξ) reordered onto
/// h_0 ⊗ h_a, so F[(a t),(b t')] = R[(t' a),(t b)].
fn factor_even(xi: C64, p: &ChainParams) -> Result<Array2<C64>, QtmError> {
    let r = r_matrix(-p.aleph() / p.trotter as f64 - xi, p.eta())?;
    let mut out = Array2::zeros((4, 4));
    for a in 0..2 {
        for t in 0..2 {
            for b in 0..2 {
                for tp in 0..2 {
                    out[[2 * a + t, 2 * b + tp]] = r[[2 * tp + a, 2 * t + b]];
                }
            }
        }
    }
    Ok(out)
}

/// Appends one site: P ↦ F·(P ⊗ id) where F couples the auxiliary bit with
/// the new least-significant site bit.
fn grow(p_prev: &Array2<C64>, f: &Array2<C64>) -> Array2<C64> {
    let d = p_prev.nrows();
    let half = d / 2;
    let mut out = Array2::<C64>::zeros((2 * d, 2 * d));
    let prev = p_prev.as_slice().expect("contiguous");
    {
        let os = out.as_slice_mut().expect("contiguous");
        let w = 2 * d;
        for a in 0..2 {
            for t in 0..2 {
                for c in 0..2 {
                    for tp in 0..2 {
                        let fv = f[[2 * a + t, 2 * c + tp]];
                        if fv.norm_sqr() == 0.0 {
                            continue;
                        }
                        for s in 0..half {
                            let row = (a * half + s) * 2 + t;
                            let prow = c * half + s;
                            for b in 0..2 {
                                for sp in 0..half {
                                    let col = (b * half + sp) * 2 + tp;
                                    os[row * w + col] += fv * prev[prow * d + b * half + sp];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fuses the final factor with the trace over h_0:
/// t_q[(σ t),(σ' t')] = Σ_{a,b} F[(a t),(b t')] P[(b σ),(a σ')].
fn close_trace(p_prev: &Array2<C64>, f: &Array2<C64>) -> Array2<C64> {
    let d = p_prev.nrows();
    let half = d / 2;
    let mut out = Array2::<C64>::zeros((d, d));
    let prev = p_prev.as_slice().expect("contiguous");
    {
        let os = out.as_slice_mut().expect("contiguous");
        for a in 0..2 {
            for t in 0..2 {
                for b in 0..2 {
                    for tp in 0..2 {
                        let fv = f[[2 * a + t, 2 * b + tp]];
                        if fv.norm_sqr() == 0.0 {
                            continue;
                        }
                        for s in 0..half {
                            let row = s * 2 + t;
                            let prow = b * half + s;
                            for sp in 0..half {
                                let col = sp * 2 + tp;
                                os[row * d + col] += fv * prev[prow * d + a * half + sp];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn twist(p: &ChainParams) -> Array2<C64> {
    let e = (p.field / (2.0 * p.temperature)).exp();
    ndarray::array![
        [C64::new(e, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0 / e, 0.0)]
    ]
}

/// The quantum monodromy matrix T(ξ) on h_0 ⊗ h_q, dimension 2·4^N.
pub fn monodromy(xi: C64, p: &ChainParams, budget: usize) -> Result<DenseOperator, QtmError> {
    if p.trotter > DEFAULT_N_MAX {
        return Err(QtmError::TrotterTooLarge(p.trotter, DEFAULT_N_MAX));
    }
    check_budget(2 << (2 * p.trotter), budget)?;
    let mut acc = twist(p);
    for site in 1..=2 * p.trotter {
        let f = if site % 2 == 1 { factor_odd(xi, p)? } else { factor_even(xi, p)? };
        acc = grow(&acc, &f);
    }
    Ok(acc)
}

/// Partial trace over the auxiliary space (the top bit).
pub fn trace_auxiliary(m: &DenseOperator) -> DenseOperator {
    let d = m.nrows() / 2;
    let mut out = Array2::zeros((d, d));
    for a in 0..2 {
        for i in 0..d {
            for j in 0..d {
                out[[i, j]] += m[[a * d + i, a * d + j]];
            }
        }
    }
    out
}

/// The quantum transfer matrix t_q(ξ) = tr₀ T(ξ) on h_q, dimension 4^N.
pub fn transfer_matrix(xi: C64, p: &ChainParams, budget: usize) -> Result<DenseOperator, QtmError> {
    if p.trotter > DEFAULT_N_MAX {
        return Err(QtmError::TrotterTooLarge(p.trotter, DEFAULT_N_MAX));
    }
    check_budget(1 << (2 * p.trotter), budget)?;
    let mut acc = twist(p);
    for site in 1..2 * p.trotter {
        let f = if site % 2 == 1 { factor_odd(xi, p)? } else { factor_even(xi, p)? };
        acc = grow(&acc, &f);
    }
    let last = factor_even(xi, p)?;
    Ok(close_trace(&acc, &last))
}

/// t_q(0) as a real matrix. Returns the matrix together with the largest
/// imaginary part discarded, which must vanish to 1e−12 for the
/// characteristic polynomial to have real coefficients.
pub fn transfer_matrix_zero(p: &ChainParams, budget: usize) -> Result<(Array2<f64>, f64), QtmError> {
    let t = transfer_matrix(C64::new(0.0, 0.0), p, budget)?;
    let mut max_im: f64 = 0.0;
    let out = t.mapv(|z| {
        max_im = max_im.max(z.im.abs());
        z.re
    });
    Ok((out, max_im))
}

/// The rank-1 part ω_{N;0} = v·wᵗ of t_q(0) and the perturbation δt_q.
pub struct RankOneSplit {
    pub v: Array1<f64>,
    pub w: Array1<f64>,
    /// δt_q = t_q(0) − v·wᵗ.
    pub delta_tq: Array2<f64>,
    /// Largest imaginary part discarded when realifying t_q(0).
    pub max_imag: f64,
}

impl RankOneSplit {
    pub fn scalar_product_wv(&self) -> f64 {
        self.w.dot(&self.v)
    }
    pub fn v_norm_sq(&self) -> f64 {
        self.v.dot(&self.v)
    }
    pub fn w_norm_sq(&self) -> f64 {
        self.w.dot(&self.w)
    }
}

/// Builds v, w from their tensor-product sums over index sequences
/// i ∈ {1,2}^N with the periodic convention i₀ ≡ i_N, and assembles δt_q.
pub fn rank_one_split(p: &ChainParams, budget: usize) -> Result<RankOneSplit, QtmError> {
    let n = p.trotter;
    let dim = 1usize << (2 * n);
    let mut v = Array1::<f64>::zeros(dim);
    let mut w = Array1::<f64>::zeros(dim);
    for bits in 0..(1usize << n) {
        // bits encodes (i_1 .. i_N), i_s = bit s−1, with e₁ ↦ 0, e₂ ↦ 1.
        let i = |s: usize| -> usize {
            let s = if s == 0 { n } else { s };
            (bits >> (s - 1)) & 1
        };
        let mut idx_v = 0usize;
        let mut idx_w = 0usize;
        for s in 1..=n {
            // site 2s carries i_s, site 2s−1 carries i_{s−1}; site 1 is MSB.
            idx_v |= i(s) << (2 * n - 2 * s);
            idx_v |= i(s - 1) << (2 * n - (2 * s - 1));
            idx_w |= i(s) << (2 * n - 2 * s);
            idx_w |= i(s) << (2 * n - (2 * s - 1));
        }
        let eps = 1.0 - 2.0 * i(n) as f64;
        v[idx_v] += (p.field * eps / (2.0 * p.temperature)).exp();
        w[idx_w] += 1.0;
    }
    let (t0, max_imag) = transfer_matrix_zero(p, budget)?;
    let mut delta = t0;
    for r in 0..dim {
        if v[r] == 0.0 {
            continue;
        }
        for c in 0..dim {
            delta[[r, c]] -= v[r] * w[c];
        }
    }
    Ok(RankOneSplit { v, w, delta_tq: delta, max_imag })
}

/// Periodic XXZ Hamiltonian
/// H = J Σ_a { σˣσˣ + σʸσʸ + Δ(σᶻσᶻ + 1) } − (h/2) Σ_a σᶻ on 2^L.
pub fn xxz_hamiltonian(p: &ChainParams, l_max: usize) -> Result<Array2<f64>, QtmError> {
    let l = p.length;
    if l > l_max {
        return Err(QtmError::LengthTooLarge(l, l_max));
    }
    let dim = 1usize << l;
    let delta = p.delta();
    let mut h = Array2::<f64>::zeros((dim, dim));
    for n in 0..dim {
        let mut diag = 0.0;
        for a in 0..l {
            let b = (a + 1) % l;
            let sa = 1.0 - 2.0 * ((n >> a) & 1) as f64;
            let sb = 1.0 - 2.0 * ((n >> b) & 1) as f64;
            diag += p.coupling * delta * (sa * sb + 1.0);
            if ((n >> a) & 1) != ((n >> b) & 1) {
                let m = n ^ (1 << a) ^ (1 << b);
                h[[m, n]] += 2.0 * p.coupling;
            }
        }
        for a in 0..l {
            let sa = 1.0 - 2.0 * ((n >> a) & 1) as f64;
            diag -= 0.5 * p.field * sa;
        }
        h[[n, n]] += diag;
    }
    Ok(h)
}

/// Magnetization sector (number of down spins) of each basis index of h_q.
pub fn down_spin_count(index: usize) -> usize {
    index.count_ones() as usize
}

/// Staggered sector label of a basis index of h_q: the number of spins
/// flipped relative to the alternating reference (odd sites up, even sites
/// down). The partially transposed R-factors on even sites make t_q
/// conserve this staggered count, not the plain one; the sector with m
/// flips carries the Bethe states with M = m roots and has dimension
/// binomial(2N, m). Site 1 carries the most significant bit.
pub fn staggered_sector(index: usize, num_sites: usize) -> usize {
    (1..=num_sites)
        .map(|s| {
            let bit = (index >> (num_sites - s)) & 1;
            if s % 2 == 1 {
                bit
            } else {
                1 - bit
            }
        })
        .sum()
}

/// Writes an operator as CSV rows `row,col,re,im`.
pub fn export_csv<W: Write>(op: &DenseOperator, mut out: W) -> Result<(), QtmError> {
    writeln!(out, "row,col,re,im")?;
    for ((r, c), z) in op.indexed_iter() {
        writeln!(out, "{},{},{:.17e},{:.17e}", r, c, z.re, z.im)?;
    }
    Ok(())
}

/// Binary container: magic `XQTM`, u64 LE rows, u64 LE cols, then
/// row-major (re, im) f64 LE pairs.
pub fn export_binary<W: Write>(op: &DenseOperator, mut out: W) -> Result<(), QtmError> {
    out.write_all(b"XQTM")?;
    out.write_all(&(op.nrows() as u64).to_le_bytes())?;
    out.write_all(&(op.ncols() as u64).to_le_bytes())?;
    for z in op.iter() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the binary container written by [`export_binary`].
pub fn import_binary<R: std::io::Read>(mut inp: R) -> Result<DenseOperator, QtmError> {
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != b"XQTM" {
        return Err(QtmError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "bad magic",
        )));
    }
    let mut b8 = [0u8; 8];
    inp.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    inp.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        inp.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        inp.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        data.push(C64::new(re, im));
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape"))
}
