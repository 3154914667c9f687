//! Hausdorff-measure data at the solved dimension.
//!
//! What is exact: the *direction* of the per-model measures (the left
//! Frobenius eigenvector at d*, fixed by the transpose action) and the
//! measure of any clone relative to its model (`scale^d*`). What is
//! bounded: the absolute normalization. Level-k clone covers give the
//! upper constant K′; the covering argument with constants Q and β
//! gives a lower constant. Reports keep the two kinds separate.

use serde::Serialize;

use crate::dimension::{solve_dimension, DimensionResult, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::spectral::{
    build_matrix, frobenius, power_limit, uniform_power_bound, FrobeniusData, SpectralMatrix,
};
use crate::structure::{CloneAddress, CloneStructure};

/// A structure with its dimension solved and the eigendata at d*
/// cached; the starting point for every measure-level question.
#[derive(Debug, Clone)]
pub struct SolvedStructure {
    structure: CloneStructure,
    dimension: DimensionResult,
    matrix: SpectralMatrix,
    frobenius: FrobeniusData,
    relative: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureConstants {
    pub k_prime: f64,
    pub q: f64,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub dimension: f64,
    /// Per-model measures normalized to sum 1 (the exact direction).
    pub relative_measures: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub constants: MeasureConstants,
    /// True when no β was available: the lower bounds then only fence
    /// off covers by clones, not arbitrary covers.
    pub clone_covers_only: bool,
}

impl SolvedStructure {
    pub fn solve(s: &CloneStructure, tol: f64) -> Result<Self> {
        let dimension = solve_dimension(s, tol)?;
        let matrix = build_matrix(s, dimension.dimension)?;
        let fro = frobenius(&matrix)?;
        let mut relative = fro.left_eigenvector.clone();
        let total: f64 = relative.iter().sum();
        for x in &mut relative {
            *x /= total;
        }
        // transpose fixed point must hold to working precision
        let mtv = matrix.transposed().mul_vec(&relative);
        let resid: f64 = mtv.iter().zip(&relative).map(|(a, b)| (a - b).abs()).sum();
        if resid > 1e-10 {
            return Err(Error::NonConvergence {
                best: fro.eigenvalue,
                iterations: 0,
            });
        }
        Ok(SolvedStructure {
            structure: s.clone(),
            dimension,
            matrix,
            frobenius: fro,
            relative,
        })
    }

    pub fn solve_default(s: &CloneStructure) -> Result<Self> {
        Self::solve(s, DEFAULT_TOL)
    }

    pub fn structure(&self) -> &CloneStructure {
        &self.structure
    }

    pub fn dimension(&self) -> f64 {
        self.dimension.dimension
    }

    pub fn dimension_result(&self) -> &DimensionResult {
        &self.dimension
    }

    pub fn matrix(&self) -> &SpectralMatrix {
        &self.matrix
    }

    pub fn frobenius_data(&self) -> &FrobeniusData {
        &self.frobenius
    }

    /// Per-model measures normalized to sum 1.
    pub fn relative_measures(&self) -> &[f64] {
        &self.relative
    }

    /// Measure of the addressed clone on the same normalization:
    /// `(cumulative scale)^{d*}` times its model's relative measure.
    pub fn clone_measure(&self, addr: &CloneAddress) -> Result<f64> {
        let t = self.structure.address_type(addr)?;
        let scale = self.structure.cumulative_inverse_scale(addr)?;
        Ok(scale.powf(self.dimension()) * self.relative[t.zero_based()])
    }

    /// Total d-sum of the level-k clone cover, one value per k in
    /// 0..=k_max. Converges to K′ from the spectral limit.
    pub fn cover_sums(&self, k_max: usize) -> Vec<f64> {
        let d = self.dimension();
        let mut v: Vec<f64> = vec![0.0; self.structure.n_models()];
        for m in &self.structure.models {
            v[m.id.zero_based()] += m.diameter.to_f64().powf(d);
        }
        let mut out = Vec::with_capacity(k_max + 1);
        out.push(v.iter().sum());
        for _ in 0..k_max {
            v = self.matrix.mul_vec(&v);
            out.push(v.iter().sum());
        }
        out
    }

    /// Per-model upper bounds U and their total K′: the limiting d-sum
    /// of the level-k clones inside each model. Level-k clones are
    /// ε-covers, so `H_{d*}(A_i) ≤ U_i` and `H_{d*}(C) ≤ K′`.
    pub fn upper_bounds(&self) -> Result<(Vec<f64>, f64)> {
        let limit = power_limit(&self.matrix)?;
        let n = self.structure.n_models();
        let d = self.dimension();
        let mut u = vec![0.0; n];
        for m in &self.structure.models {
            let j = m.id.zero_based();
            let colsum: f64 = (0..n).map(|t| limit[t][j]).sum();
            u[j] = colsum * m.diameter.to_f64().powf(d);
        }
        let k_prime = u.iter().sum();
        Ok((u, k_prime))
    }

    /// Lower bounds from the covering chain: globally
    /// `β^{-d*}·Q⁻¹·K′/2`, spread over the models along the relative
    /// measures. Without β only clone covers are fenced (flag is true).
    pub fn lower_bounds(&self, beta: Option<f64>) -> Result<(Vec<f64>, MeasureConstants, bool)> {
        if let Some(b) = beta {
            if b.is_nan() || b < 1.0 {
                return Err(Error::BadArgument(format!("beta {b} must be >= 1")));
            }
        }
        let (_, k_prime) = self.upper_bounds()?;
        let q = uniform_power_bound(&self.matrix)?;
        let clone_covers_only = beta.is_none();
        let b = beta.unwrap_or(1.0);
        let global = b.powf(-self.dimension()) / q * k_prime / 2.0;
        let l = self.relative.iter().map(|v| global * v).collect();
        Ok((l, MeasureConstants { k_prime, q, beta }, clone_covers_only))
    }

    pub fn measure_report(&self, beta: Option<f64>) -> Result<MeasureReport> {
        let (upper, _) = self.upper_bounds()?;
        let (lower, constants, clone_covers_only) = self.lower_bounds(beta)?;
        Ok(MeasureReport {
            dimension: self.dimension(),
            relative_measures: self.relative.clone(),
            upper_bounds: upper,
            lower_bounds: lower,
            constants,
            clone_covers_only,
        })
    }
}

/// One-shot convenience wrappers over a fresh solve; prefer
/// [`SolvedStructure`] when asking several questions of one structure.
pub fn relative_measures(s: &CloneStructure) -> Result<Vec<f64>> {
    Ok(SolvedStructure::solve_default(s)?
        .relative_measures()
        .to_vec())
}

pub fn clone_measure(s: &CloneStructure, addr: &CloneAddress) -> Result<f64> {
    SolvedStructure::solve_default(s)?.clone_measure(addr)
}

pub fn measure_upper_bounds(s: &CloneStructure) -> Result<(Vec<f64>, f64)> {
    SolvedStructure::solve_default(s)?.upper_bounds()
}

pub fn measure_lower_bounds(s: &CloneStructure, beta: Option<f64>) -> Result<Vec<f64>> {
    Ok(SolvedStructure::solve_default(s)?.lower_bounds(beta)?.0)
}
