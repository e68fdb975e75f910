//! Composite Hilbert space of one three-level coupler and `n` truncated cavity
//! modes.
//!
//! Basis ordering: the coupler level is the slowest-varying index, followed by
//! cavity 1, ..., cavity n (fastest). A basis state `|l; m_1 .. m_n>` therefore
//! sits at `l * K^n + sum_i m_i * K^(n - i)` with `K` the Fock cutoff.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{arg_err, Error, Result};
use crate::sparse::SparseOperator;

pub const COUPLER_LEVELS: usize = 3;

/// Normalization tolerance applied when a state is constructed.
pub const NORM_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_FOCK_CUTOFF: usize = 3;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemDims {
    n_cavities: usize,
    fock_cutoff: usize,
}

impl SystemDims {
    pub fn new(n_cavities: usize, fock_cutoff: usize) -> Result<Self> {
        if n_cavities < 1 {
            return arg_err("n_cavities must be at least 1");
        }
        if fock_cutoff < 2 {
            return arg_err("fock_cutoff must be at least 2");
        }
        let dims = Self { n_cavities, fock_cutoff };
        fock_cutoff
            .checked_pow(n_cavities as u32)
            .and_then(|k| k.checked_mul(COUPLER_LEVELS))
            .ok_or_else(|| Error::Argument("Hilbert space dimension overflows".into()))?;
        Ok(dims)
    }

    pub fn n_cavities(&self) -> usize {
        self.n_cavities
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn coupler_levels(&self) -> usize {
        COUPLER_LEVELS
    }

    /// Dimension of the joint cavity factor, `K^n`.
    pub fn cavity_dim(&self) -> usize {
        self.fock_cutoff.pow(self.n_cavities as u32)
    }

    /// Total dimension `3 K^n`.
    pub fn dim(&self) -> usize {
        COUPLER_LEVELS * self.cavity_dim()
    }

    /// Index stride of cavity `i` (1-based).
    fn stride(&self, cavity: usize) -> usize {
        self.fock_cutoff.pow((self.n_cavities - cavity) as u32)
    }

    pub fn index_of(&self, coupler_level: usize, occupations: &[usize]) -> Result<usize> {
        if coupler_level >= COUPLER_LEVELS {
            return arg_err(format!("coupler level {coupler_level} outside 0..3"));
        }
        if occupations.len() != self.n_cavities {
            return arg_err(format!(
                "expected {} occupations, got {}",
                self.n_cavities,
                occupations.len()
            ));
        }
        let mut idx = coupler_level;
        for &m in occupations {
            if m >= self.fock_cutoff {
                return arg_err(format!(
                    "occupation {m} not below fock_cutoff {}",
                    self.fock_cutoff
                ));
            }
            idx = idx * self.fock_cutoff + m;
        }
        Ok(idx)
    }

    pub fn coupler_level_of(&self, index: usize) -> usize {
        index / self.cavity_dim()
    }

    /// Photon number of cavity `i` (1-based) in basis state `index`.
    pub fn occupation_of(&self, index: usize, cavity: usize) -> usize {
        (index / self.stride(cavity)) % self.fock_cutoff
    }

    pub fn decode(&self, index: usize) -> (usize, Vec<usize>) {
        let occ = (1..=self.n_cavities)
            .map(|i| self.occupation_of(index, i))
            .collect();
        (self.coupler_level_of(index), occ)
    }

    fn check_cavity(&self, cavity: usize) -> Result<()> {
        if cavity == 0 || cavity > self.n_cavities {
            return arg_err(format!(
                "cavity index {cavity} outside 1..={}",
                self.n_cavities
            ));
        }
        Ok(())
    }
}

/// Pairs of coupler levels labelling the three transitions.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum LevelPair {
    P21,
    P20,
    P10,
}

impl LevelPair {
    pub const ALL: [LevelPair; 3] = [LevelPair::P21, LevelPair::P20, LevelPair::P10];

    /// `(upper, lower)` levels.
    pub fn levels(self) -> (usize, usize) {
        match self {
            LevelPair::P21 => (2, 1),
            LevelPair::P20 => (2, 0),
            LevelPair::P10 => (1, 0),
        }
    }
}

// Sparse builders. The dense public operators below are views of these.

/// `|upper><lower|` on the coupler, identity on every cavity.
pub fn coupler_transition_sparse(dims: &SystemDims, upper: usize, lower: usize) -> Result<SparseOperator> {
    if upper >= COUPLER_LEVELS || lower >= COUPLER_LEVELS {
        return arg_err(format!("coupler levels ({upper}, {lower}) outside 0..3"));
    }
    if upper == lower {
        return arg_err("coupler transition needs distinct levels");
    }
    let k = dims.cavity_dim();
    let trip = (0..k)
        .map(|rest| (upper * k + rest, lower * k + rest, C64::new(1.0, 0.0)))
        .collect();
    Ok(SparseOperator::from_triplets(dims.dim(), trip))
}

/// Truncated annihilation operator of cavity `cavity` (1-based).
pub fn annihilation_sparse(dims: &SystemDims, cavity: usize) -> Result<SparseOperator> {
    dims.check_cavity(cavity)?;
    let stride = dims.stride(cavity);
    let trip = (0..dims.dim())
        .filter_map(|idx| {
            let m = dims.occupation_of(idx, cavity);
            (m > 0).then(|| (idx - stride, idx, C64::new((m as f64).sqrt(), 0.0)))
        })
        .collect();
    Ok(SparseOperator::from_triplets(dims.dim(), trip))
}

/// Diagonal `|u><u| - |l><l|` for the given pair.
pub fn dephasing_z_sparse(dims: &SystemDims, pair: LevelPair) -> SparseOperator {
    let (u, l) = pair.levels();
    let diag: Vec<f64> = (0..dims.dim())
        .map(|idx| match dims.coupler_level_of(idx) {
            x if x == u => 1.0,
            x if x == l => -1.0,
            _ => 0.0,
        })
        .collect();
    SparseOperator::diagonal(&diag)
}

/// Dense operator on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeOperator {
    dims: SystemDims,
    data: Array2<C64>,
}

impl CompositeOperator {
    pub fn new(dims: SystemDims, data: Array2<C64>) -> Result<Self> {
        let d = dims.dim();
        if data.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: data.nrows(),
            });
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_sparse(dims: SystemDims, op: &SparseOperator) -> Self {
        Self {
            dims,
            data: op.to_dense(),
        }
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims,
            data: self.data.t().mapv(|v| v.conj()),
        }
    }

    pub fn dot(&self, rhs: &CompositeOperator) -> Self {
        Self {
            dims: self.dims,
            data: self.data.dot(&rhs.data),
        }
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.data.dot(v)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.data, &self.data.t().mapv(|v| v.conj()))
    }
}

pub fn coupler_transition(dims: &SystemDims, upper: usize, lower: usize) -> Result<CompositeOperator> {
    let op = coupler_transition_sparse(dims, upper, lower)?;
    Ok(CompositeOperator::from_sparse(*dims, &op))
}

pub fn annihilation(dims: &SystemDims, cavity: usize) -> Result<CompositeOperator> {
    let op = annihilation_sparse(dims, cavity)?;
    Ok(CompositeOperator::from_sparse(*dims, &op))
}

pub fn dephasing_z(dims: &SystemDims, pair: LevelPair) -> CompositeOperator {
    CompositeOperator::from_sparse(*dims, &dephasing_z_sparse(dims, pair))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StateKind {
    PureVector,
    DensityMatrix,
}

#[derive(Clone, Debug, PartialEq)]
enum StateData {
    Pure(Array1<C64>),
    Density(Array2<C64>),
}

/// Pure state vector or density matrix over the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    dims: SystemDims,
    data: StateData,
}

impl QuantumState {
    /// Wrap a state vector; its norm must be 1 within [`NORM_TOLERANCE`].
    pub fn pure(dims: SystemDims, psi: Array1<C64>) -> Result<Self> {
        if psi.len() != dims.dim() {
            return Err(Error::DimensionMismatch {
                expected: dims.dim(),
                found: psi.len(),
            });
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return arg_err(format!("state vector norm {norm} is not 1"));
        }
        Ok(Self::pure_unchecked(dims, psi))
    }

    /// Wrap a density matrix; it must be Hermitian with unit trace.
    pub fn density(dims: SystemDims, rho: Array2<C64>) -> Result<Self> {
        let d = dims.dim();
        if rho.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        let defect = max_abs_diff(&rho, &rho.t().mapv(|v| v.conj()));
        if defect > NORM_TOLERANCE {
            return arg_err(format!("density matrix not Hermitian (defect {defect:e})"));
        }
        let tr = rho.diag().sum();
        if (tr.re - 1.0).abs() > NORM_TOLERANCE || tr.im.abs() > NORM_TOLERANCE {
            return arg_err(format!("density matrix trace {tr} is not 1"));
        }
        Ok(Self::density_unchecked(dims, rho))
    }

    pub(crate) fn pure_unchecked(dims: SystemDims, psi: Array1<C64>) -> Self {
        Self {
            dims,
            data: StateData::Pure(psi),
        }
    }

    pub(crate) fn density_unchecked(dims: SystemDims, rho: Array2<C64>) -> Self {
        Self {
            dims,
            data: StateData::Density(rho),
        }
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn kind(&self) -> StateKind {
        match self.data {
            StateData::Pure(_) => StateKind::PureVector,
            StateData::Density(_) => StateKind::DensityMatrix,
        }
    }

    pub fn as_pure(&self) -> Option<&Array1<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&Array2<C64>> {
        match &self.data {
            StateData::Density(m) => Some(m),
            StateData::Pure(_) => None,
        }
    }

    /// `|psi><psi|` for pure states, a copy of the matrix otherwise.
    pub fn to_density(&self) -> Self {
        match &self.data {
            StateData::Density(_) => self.clone(),
            StateData::Pure(psi) => {
                let d = psi.len();
                let rho = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj());
                Self::density_unchecked(self.dims, rho)
            }
        }
    }

    /// `<psi|psi>` or `tr rho`.
    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(psi) => psi.iter().map(|a| a.norm_sqr()).sum(),
            StateData::Density(rho) => rho.diag().iter().map(|a| a.re).sum(),
        }
    }

    /// Probability of basis state `index`.
    pub fn population(&self, index: usize) -> f64 {
        match &self.data {
            StateData::Pure(psi) => psi[index].norm_sqr(),
            StateData::Density(rho) => rho[[index, index]].re,
        }
    }

    /// Mean photon number of cavity `i` (1-based).
    pub fn mean_photons(&self, cavity: usize) -> Result<f64> {
        self.dims.check_cavity(cavity)?;
        Ok((0..self.dims.dim())
            .map(|idx| self.dims.occupation_of(idx, cavity) as f64 * self.population(idx))
            .sum())
    }
}

/// Unit vector for `|coupler_level; occupations>`.
pub fn basis_state(dims: &SystemDims, coupler_level: usize, occupations: &[usize]) -> Result<QuantumState> {
    let idx = dims.index_of(coupler_level, occupations)?;
    let mut psi = Array1::zeros(dims.dim());
    psi[idx] = C64::new(1.0, 0.0);
    Ok(QuantumState::pure_unchecked(*dims, psi))
}

pub(crate) fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
