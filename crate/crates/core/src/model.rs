//! Chain parameters, the multiset algebra of root sets, and the special
//! functions θ, K, e₀ shared by every other module.
//!
//! Roots of the Bethe equations live on the cylinder C mod iπZ; all value
//! comparisons reduce the imaginary part to (−π/2, π/2] first. θ is the
//! iπ-periodic odd function with cuts on R⁺ ± iζ_m + iπZ whose derivative
//! is 2πK.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance for identifying two root values (after reduction mod iπ).
pub const ROOT_ID_TOL: f64 = 1e-10;
/// Distance below which a point counts as lying on a θ-cut.
pub const CUT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),
    #[error("theta evaluated on a branch cut at {0} with no boundary side specified")]
    CutEvaluation(C64),
    #[error("theta is singular at the branch point {0}")]
    BranchPoint(C64),
}

/// Physical and discretisation parameters of one run.
///
/// `length` enters only the finite-chain cross-checks; everything on the
/// quantum-transfer-matrix side depends on `trotter` instead.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainParams {
    /// Exchange coupling J (energy units).
    pub coupling: f64,
    /// Anisotropy angle ζ ∈ (0, π); Δ = cos ζ.
    pub zeta: f64,
    /// Magnetic field h.
    pub field: f64,
    /// Temperature T > 0.
    pub temperature: f64,
    /// Trotter number N ≥ 1.
    pub trotter: usize,
    /// Chain length L (even), used for cross-checks only.
    pub length: usize,
}

impl ChainParams {
    pub fn new(
        coupling: f64,
        zeta: f64,
        field: f64,
        temperature: f64,
        trotter: usize,
        length: usize,
    ) -> Result<Self, ModelError> {
        let p = Self { coupling, zeta, field, temperature, trotter, length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.zeta > 0.0 && self.zeta < PI) {
            return Err(ModelError::InvalidParams(format!(
                "zeta = {} must lie in (0, pi)",
                self.zeta
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "temperature = {} must be positive",
                self.temperature
            )));
        }
        if self.trotter == 0 {
            return Err(ModelError::InvalidParams("trotter number must be >= 1".into()));
        }
        if self.length == 0 || self.length % 2 != 0 {
            return Err(ModelError::InvalidParams(format!(
                "length = {} must be even and positive",
                self.length
            )));
        }
        Ok(())
    }

    /// η = −iζ, so that Δ = cosh η = cos ζ.
    pub fn eta(&self) -> C64 {
        C64::new(0.0, -self.zeta)
    }

    /// ℵ = (J/T) sinh η = −i J sin ζ / T, the temperature reparametrisation.
    pub fn aleph(&self) -> C64 {
        C64::new(0.0, -self.coupling * self.zeta.sin() / self.temperature)
    }

    /// Anisotropy Δ = cos ζ.
    pub fn delta(&self) -> f64 {
        self.zeta.cos()
    }

    /// ζ_m = min(ζ, π − ζ), half the width of the analyticity strip.
    pub fn zeta_m(&self) -> f64 {
        self.zeta.min(PI - self.zeta)
    }

    /// sgn(π − 2ζ); enters the second branch of θ and the kernel K.
    pub fn cut_sign(&self) -> f64 {
        if PI - 2.0 * self.zeta >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Advisory check that ζ stays away from small-denominator rationals of π.
    ///
    /// The analysis assumes generic ζ without quantifying it; this only warns.
    pub fn generic_zeta_warning(&self, max_denominator: u32) -> Option<String> {
        let x = self.zeta / PI;
        for q in 1..=max_denominator {
            let p = (x * q as f64).round();
            if p > 0.0 && (x - p / q as f64).abs() < 1e-9 / q as f64 {
                return Some(format!("zeta = ({p}/{q})*pi is a low-order rational multiple of pi"));
            }
        }
        None
    }
}

/// Reduce z mod iπZ so that Im z ∈ (−π/2, π/2].
pub fn reduce_mod_ipi(z: C64) -> C64 {
    let k = ((z.im - PI / 2.0) / PI).ceil();
    if k == 0.0 {
        z
    } else {
        C64::new(z.re, z.im - k * PI)
    }
}

/// Distance between two points on the cylinder C mod iπZ.
pub fn dist_mod_ipi(a: C64, b: C64) -> f64 {
    let mut d = a - b;
    d.im -= PI * (d.im / PI).round();
    d.norm()
}

pub fn coth(z: C64) -> C64 {
    z.cosh() / z.sinh()
}

/// A set of (root, multiplicity) pairs with the algebraic ⊕ / ⊖ operations.
///
/// Values are stored reduced mod iπ and two values closer than
/// [`ROOT_ID_TOL`] are identified. Entries with multiplicity 0 are purged.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RootMultiset {
    entries: Vec<(C64, i64)>,
}

impl RootMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the multiset from a list of values, each with multiplicity one.
    pub fn from_values(values: &[C64]) -> Self {
        let mut s = Self::new();
        for &v in values {
            s.insert(v, 1);
        }
        s
    }

    /// The repeated-point set {x}^{⊕n}.
    pub fn repeated(x: C64, n: i64) -> Self {
        let mut s = Self::new();
        s.insert(x, n);
        s
    }

    pub fn insert(&mut self, value: C64, multiplicity: i64) {
        if multiplicity == 0 {
            return;
        }
        let v = reduce_mod_ipi(value);
        for e in self.entries.iter_mut() {
            if dist_mod_ipi(e.0, v) < ROOT_ID_TOL {
                e.1 += multiplicity;
                self.entries.retain(|e| e.1 != 0);
                return;
            }
        }
        self.entries.push((v, multiplicity));
    }

    /// Algebraic sum A ⊕ B: multiplicities add.
    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(v, n) in &other.entries {
            out.insert(v, n);
        }
        out
    }

    /// Algebraic difference A ⊖ B: multiplicities subtract.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(v, n) in &other.entries {
            out.insert(v, -n);
        }
        out
    }

    /// Weighted cardinality |A| = Σ multiplicities.
    pub fn weighted_cardinality(&self) -> i64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Number of distinct support points.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (C64, i64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn multiplicity_of(&self, value: C64) -> i64 {
        let v = reduce_mod_ipi(value);
        self.entries
            .iter()
            .find(|e| dist_mod_ipi(e.0, v) < ROOT_ID_TOL)
            .map(|e| e.1)
            .unwrap_or(0)
    }

    pub fn contains(&self, value: C64) -> bool {
        self.multiplicity_of(value) != 0
    }

    /// Σ_{λ∈A} f(λ) with the multiplicity-weighted convention.
    pub fn sum_over(&self, mut f: impl FnMut(C64) -> C64) -> C64 {
        self.entries
            .iter()
            .map(|&(v, n)| f(v) * C64::new(n as f64, 0.0))
            .sum()
    }

    /// Π_{λ∈A} f(λ) with integer powers given by the multiplicities.
    pub fn product_over(&self, mut f: impl FnMut(C64) -> C64) -> C64 {
        self.entries
            .iter()
            .map(|&(v, n)| f(v).powi(n as i32))
            .product()
    }

    /// Expands to a plain list of values, repeating by multiplicity.
    ///
    /// Negative multiplicities cannot be expanded and are skipped.
    pub fn expand(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for &(v, n) in &self.entries {
            for _ in 0..n.max(0) {
                out.push(v);
            }
        }
        out
    }
}

fn theta_branch_inner(lam: C64, zeta: f64) -> C64 {
    let iz = C64::new(0.0, zeta);
    C64::i() * ((iz + lam).sinh() / (iz - lam).sinh()).ln()
}

fn theta_branch_outer(lam: C64, zeta: f64, cut_sign: f64) -> C64 {
    let iz = C64::new(0.0, zeta);
    C64::new(-PI * cut_sign, 0.0) + C64::i() * ((iz + lam).sinh() / (lam - iz).sinh()).ln()
}

/// θ(λ), with the branch prescription selected by `plus_on_cut`.
///
/// Returns the value together with a flag marking that λ lay on a cut and
/// the + boundary value was taken.
pub fn theta_eval(lam: C64, zeta: f64, plus_on_cut: bool) -> Result<(C64, bool), ModelError> {
    let zm = zeta.min(PI - zeta);
    let sgn = if PI - 2.0 * zeta >= 0.0 { 1.0 } else { -1.0 };
    let l = reduce_mod_ipi(lam);
    if (l - C64::new(0.0, zm)).norm() < 1e-13 || (l + C64::new(0.0, zm)).norm() < 1e-13 {
        return Err(ModelError::BranchPoint(l));
    }
    let on_upper = (l.im - zm).abs() < CUT_TOL && l.re > 0.0;
    let on_lower = (l.im + zm).abs() < CUT_TOL && l.re > 0.0;
    if on_upper {
        if !plus_on_cut {
            return Err(ModelError::CutEvaluation(l));
        }
        // + boundary of the upper cut is approached from |Im| > ζ_m.
        return Ok((theta_branch_outer(l, zeta, sgn), true));
    }
    if on_lower {
        if !plus_on_cut {
            return Err(ModelError::CutEvaluation(l));
        }
        // + boundary of the lower cut is approached from |Im| < ζ_m.
        return Ok((theta_branch_inner(l, zeta), true));
    }
    let v = if l.im.abs() <= zm {
        theta_branch_inner(l, zeta)
    } else {
        theta_branch_outer(l, zeta, sgn)
    };
    Ok((v, false))
}

/// θ(λ) off the cuts; [`ModelError::CutEvaluation`] on a cut.
pub fn theta(lam: C64, zeta: f64) -> Result<C64, ModelError> {
    theta_eval(lam, zeta, false).map(|(v, _)| v)
}

/// θ₊(λ): the + boundary value wherever λ lies on a cut.
pub fn theta_plus(lam: C64, zeta: f64) -> Result<C64, ModelError> {
    theta_eval(lam, zeta, true).map(|(v, _)| v)
}

/// K(ξ) = θ′(ξ)/2π, iπ-periodic and meromorphic with simple poles at ±iζ_m.
pub fn kernel(xi: C64, zeta: f64) -> C64 {
    let zm = zeta.min(PI - zeta);
    let sgn = if PI - 2.0 * zeta >= 0.0 { 1.0 } else { -1.0 };
    let izm = C64::new(0.0, zm);
    C64::new(0.0, -sgn / (2.0 * PI)) * (coth(xi - izm) - coth(xi + izm))
}

/// Bare energy e₀(ξ) = h − 2J sin²ζ / (sinh ξ sinh(ξ − iζ)).
pub fn bare_energy(xi: C64, p: &ChainParams) -> C64 {
    let iz = C64::new(0.0, p.zeta);
    let s = p.zeta.sin();
    C64::new(p.field, 0.0) - 2.0 * p.coupling * s * s / (xi.sinh() * (xi - iz).sinh())
}

/// e₀′(ξ).
pub fn bare_energy_deriv(xi: C64, p: &ChainParams) -> C64 {
    let iz = C64::new(0.0, p.zeta);
    let s = p.zeta.sin();
    2.0 * p.coupling * s * s * (coth(xi) + coth(xi - iz)) / (xi.sinh() * (xi - iz).sinh())
}

/// Finite-Trotter driving term
/// w_N(ξ) = N ln[ sinh(ξ−ℵ/N) sinh(ξ+ℵ/N−iζ) / (sinh(ξ+ℵ/N) sinh(ξ−ℵ/N−iζ)) ].
///
/// The principal logarithm is safe on the solver contours, where the
/// argument stays close to 1.
pub fn driving_w(xi: C64, p: &ChainParams) -> C64 {
    let a = p.aleph() / p.trotter as f64;
    let iz = C64::new(0.0, p.zeta);
    let n = p.trotter as f64;
    let ratio = ((xi - a).sinh() * (xi + a - iz).sinh()) / ((xi + a).sinh() * (xi - a - iz).sinh());
    n * ratio.ln()
}

/// w_N′(ξ).
pub fn driving_w_deriv(xi: C64, p: &ChainParams) -> C64 {
    let a = p.aleph() / p.trotter as f64;
    let iz = C64::new(0.0, p.zeta);
    let n = p.trotter as f64;
    n * (coth(xi - a) + coth(xi + a - iz) - coth(xi + a) - coth(xi - a - iz))
}
