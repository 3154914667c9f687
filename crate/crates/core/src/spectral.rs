//! The spectral matrix of a clone structure and its Frobenius
//! eigendata.
//!
//! Entry (i, j) of `M_d` sums the d-th powers of the inverse scale
//! factors of the type-(i+1) clones contained in model (j+1); at d = 0
//! the entries are the plain clone counts. Irreducibility here means
//! some power of the matrix is strictly positive, and it is decided on
//! the support pattern (type-graph reachability), never on floating
//! point magnitudes — large exponents underflow entries to zero without
//! changing the combinatorics.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{Mat, PowerSum};
use crate::structure::{CloneMapSpec, CloneStructure};

/// Hard ceiling on eigen-iteration work.
const ITERATION_BUDGET: usize = 100_000;
/// Default relative residual target for the eigenpair; comfortably
/// inside the 1e-13·‖M‖₁ guarantee the returned data carries.
const EIGEN_RTOL: f64 = 1e-14;

/// `M_d` for one structure at one exponent, plus the d-independent
/// count matrix that carries the support pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    d: f64,
    entries: Mat<f64>,
    counts: Mat<u64>,
}

impl SpectralMatrix {
    pub fn dimension_exponent(&self) -> f64 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.entries.n
    }

    /// Entry at 0-based (row = clone type, col = container model).
    pub fn at(&self, i: usize, j: usize) -> f64 {
        *self.entries.at(i, j)
    }

    pub fn count_at(&self, i: usize, j: usize) -> u64 {
        *self.counts.at(i, j)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.rows()
    }

    /// Rebuild a matrix from raw entries (e.g. re-ingested JSON). The
    /// support is taken from the nonzero pattern.
    pub fn from_entries(d: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) || n == 0 {
            return Err(Error::BadArgument(
                "entries must form a non-empty square matrix".into(),
            ));
        }
        if rows.iter().flatten().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::BadArgument("entries must be non-negative".into()));
        }
        let counts = Mat {
            n,
            data: rows.iter().flatten().map(|&x| u64::from(x > 0.0)).collect(),
        };
        Ok(SpectralMatrix {
            d,
            entries: Mat::from_rows(rows),
            counts,
        })
    }

    /// k-th algebraic power. The exponent tag is inherited; the counts
    /// power along (they track level-k clone counts) and saturate
    /// instead of overflowing — only their support matters downstream.
    pub fn pow(&self, k: usize) -> SpectralMatrix {
        let n = self.n();
        let mut counts = Mat::<u64>::zero(n);
        for i in 0..n {
            *counts.at_mut(i, i) = 1;
        }
        for _ in 0..k {
            let mut next = Mat::<u64>::zero(n);
            for i in 0..n {
                for l in 0..n {
                    let a = *counts.at(i, l);
                    if a == 0 {
                        continue;
                    }
                    for j in 0..n {
                        let prod = a.saturating_mul(*self.counts.at(l, j));
                        let cur = next.at_mut(i, j);
                        *cur = cur.saturating_add(prod);
                    }
                }
            }
            counts = next;
        }
        SpectralMatrix {
            d: self.d,
            entries: self.entries.pow(k),
            counts,
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.entries.mul_vec(v)
    }

    pub fn transposed(&self) -> SpectralMatrix {
        SpectralMatrix {
            d: self.d,
            entries: self.entries.transpose(),
            counts: self.counts.transpose(),
        }
    }

    /// Operator norm for the L1 vector norm: max column abs sum.
    pub fn op_norm_l1(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| (0..n).map(|i| self.at(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.entries.data.iter().all(|&x| x > 0.0)
    }

    fn support(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.count_at(i, j) > 0).collect())
            .collect()
    }

    /// Plain-text table for terminal output.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if j > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{:>18.12}", self.at(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Exact counterpart of [`SpectralMatrix`]: entries are formal sums of
/// d-th powers of rational scales, valid for every exponent at once.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicMatrix {
    entries: Mat<PowerSum>,
}

impl SymbolicMatrix {
    pub fn n(&self) -> usize {
        self.entries.n
    }

    pub fn at(&self, i: usize, j: usize) -> &PowerSum {
        self.entries.at(i, j)
    }

    pub fn pow(&self, k: usize) -> SymbolicMatrix {
        SymbolicMatrix {
            entries: self.entries.pow(k),
        }
    }

    pub fn mul_vec(&self, v: &[PowerSum]) -> Vec<PowerSum> {
        self.entries.mul_vec(v)
    }

    /// Evaluate every entry at a concrete exponent.
    pub fn eval(&self, d: f64) -> SpectralMatrix {
        let n = self.n();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.at(i, j).eval(d)).collect())
            .collect();
        let counts = Mat {
            n,
            data: self
                .entries
                .data
                .iter()
                .map(|p| if p.is_zero() { 0u64 } else { 1 })
                .collect(),
        };
        SpectralMatrix {
            d,
            entries: Mat::from_rows(rows),
            counts,
        }
    }
}

impl fmt::Display for SymbolicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            write!(f, "[ ")?;
            for j in 0..self.n() {
                if j > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

/// Build `M_d`. At d = 0 the entries are exactly the counts `R_ij`.
pub fn build_matrix(s: &CloneStructure, d: f64) -> Result<SpectralMatrix> {
    s.require_valid()?;
    if d.is_nan() || d < 0.0 {
        return Err(Error::BadArgument(format!(
            "exponent {d} must be non-negative"
        )));
    }
    let n = s.n_models();
    let mut entries = Mat::zero(n);
    let mut counts: Mat<u64> = Mat::zero(n);
    for c in &s.clones {
        let (i, j) = (c.target.zero_based(), c.container.zero_based());
        *entries.at_mut(i, j) += c.inverse_scale.to_f64().powf(d);
        *counts.at_mut(i, j) += 1;
    }
    Ok(SpectralMatrix { d, entries, counts })
}

/// Build the matrix with symbolic exponent; requires rational scales.
pub fn build_matrix_symbolic(s: &CloneStructure) -> Result<SymbolicMatrix> {
    s.require_valid()?;
    let n = s.n_models();
    let mut entries: Mat<PowerSum> = Mat::zero(n);
    for c in &s.clones {
        let (i, j) = (c.target.zero_based(), c.container.zero_based());
        let a = c
            .inverse_scale
            .as_rational()
            .ok_or_else(|| Error::ExactUnavailable(format!("clone {} has a float scale", c.id)))?
            .clone();
        let cur = entries.at(i, j).clone();
        *entries.at_mut(i, j) = cur + PowerSum::power_of(a)?;
    }
    Ok(SymbolicMatrix { entries })
}

/// Verdict of the support-pattern analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Irreducibility {
    /// Some power of the matrix is strictly positive; `witness_k` is
    /// the smallest such exponent.
    Primitive { witness_k: usize },
    /// Every type reaches every type but only along cycle lengths
    /// sharing a period > 1, so no single power is strictly positive.
    IrreducibleButPeriodic { period: usize },
    /// Some type never appears inside some model at any level. The
    /// listed (row, col) positions are zero in every power (1-based).
    Reducible {
        persistent_zeros: Vec<(usize, usize)>,
    },
}

impl Irreducibility {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Irreducibility::Primitive { .. })
    }

    pub fn witness(&self) -> Option<usize> {
        match self {
            Irreducibility::Primitive { witness_k } => Some(*witness_k),
            _ => None,
        }
    }
}

impl fmt::Display for Irreducibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irreducibility::Primitive { witness_k } => {
                write!(f, "irreducible (M^{witness_k} strictly positive)")
            }
            Irreducibility::IrreducibleButPeriodic { period } => {
                write!(
                    f,
                    "irreducible but periodic with period {period}; no strictly positive power"
                )
            }
            Irreducibility::Reducible { persistent_zeros } => {
                write!(f, "reducible; persistent zeros at {persistent_zeros:?}")
            }
        }
    }
}

fn bool_mat_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    if b[k][j] {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

/// Classify the support pattern. A zero of `M^k` at (i, j) means no
/// chain of k clone steps leads from model j down to a type-i clone, so
/// persistent zeros are exactly the unreachable (type, model) pairs.
pub fn is_irreducible(m: &SpectralMatrix) -> Irreducibility {
    let b = m.support();
    let n = b.len();

    // reachability: edge j -> i when a type-i clone sits in model j
    let mut reach = b.clone();
    for _ in 0..n {
        let next = bool_mat_mul(&reach, &b);
        let mut merged = reach.clone();
        for (mrow, nrow) in merged.iter_mut().zip(&next) {
            for (m, x) in mrow.iter_mut().zip(nrow) {
                *m |= *x;
            }
        }
        if merged == reach {
            break;
        }
        reach = merged;
    }

    let mut zeros = Vec::new();
    for (i, row) in reach.iter().enumerate() {
        for (j, &hit) in row.iter().enumerate() {
            if !hit {
                zeros.push((i + 1, j + 1));
            }
        }
    }
    if !zeros.is_empty() {
        return Irreducibility::Reducible {
            persistent_zeros: zeros,
        };
    }

    // strongly connected: look for the smallest strictly positive power
    let cap = n * n;
    let mut p = b.clone();
    for k in 1..=cap {
        if p.iter().all(|row| row.iter().all(|&x| x)) {
            return Irreducibility::Primitive { witness_k: k };
        }
        p = bool_mat_mul(&p, &b);
    }

    // periodic: gcd of cycle lengths via BFS levels on the type graph
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0usize);
    while let Some(u) = queue.pop_front() {
        for i in 0..n {
            // edge u -> i
            if b[i][u] && level[i] == usize::MAX {
                level[i] = level[u] + 1;
                queue.push_back(i);
            }
        }
    }
    let mut period = 0usize;
    for u in 0..n {
        for i in 0..n {
            if b[i][u] {
                let diff = (level[u] as i64 + 1 - level[i] as i64).unsigned_abs() as usize;
                period = gcd(period, diff);
            }
        }
    }
    Irreducibility::IrreducibleButPeriodic {
        period: period.max(2),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Frobenius eigendata of an irreducible matrix: the dominant
/// eigenvalue with its positive right and left eigenvectors, both
/// L1-normalized.
#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusData {
    pub eigenvalue: f64,
    pub right_eigenvector: Vec<f64>,
    pub left_eigenvector: Vec<f64>,
    /// Smallest k with M^k strictly positive; absent for matrices that
    /// are irreducible only up to a period.
    pub witness_k: Option<usize>,
    pub residual: f64,
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn normalize_l1(v: &mut [f64]) {
    let norm = l1(v);
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn col_sum_norm(m: &Mat<f64>) -> f64 {
    (0..m.n)
        .map(|j| (0..m.n).map(|i| m.at(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Power iteration with L1 normalization. `mat` must have a dominant
/// simple positive eigenvalue reachable from a positive start vector
/// (guaranteed after the primitivity preconditioning in `frobenius`).
/// Residuals are measured against `reference`, the matrix whose
/// eigenpair is actually wanted, and must reach `target` (absolute).
fn power_iterate(
    mat: &Mat<f64>,
    reference: &Mat<f64>,
    target: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    let n = mat.n;
    let mut v = vec![1.0 / n as f64; n];
    let mut work = mat.clone();
    let mut best_residual = f64::INFINITY;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut squarings = 0;
    let mut iter = 0usize;
    while iter < ITERATION_BUDGET {
        iter += 1;
        let mut next = work.mul_vec(&v);
        let norm = l1(&next);
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::NonConvergence {
                best: 0.0,
                iterations: iter,
            });
        }
        normalize_l1(&mut next);
        v = next;

        // measure against the reference matrix
        let mv = reference.mul_vec(&v);
        let lambda = l1(&mv);
        let residual: f64 = mv.iter().zip(&v).map(|(a, b)| (a - lambda * b).abs()).sum();
        if residual < best_residual {
            best_residual = residual;
            best = Some((lambda, v.clone()));
        }
        if residual <= target {
            return Ok((lambda, v, residual));
        }
        // stalled: precondition by squaring, which squares the spectral
        // gap without moving the eigenvector; rescale so repeated
        // squaring cannot overflow or drain to zero
        if iter.is_multiple_of(20_000) && squarings < 4 {
            let scale = col_sum_norm(&work);
            if scale > 0.0 {
                for x in work.data.iter_mut() {
                    *x /= scale;
                }
            }
            work = work.mul_mat(&work);
            squarings += 1;
        }
    }
    let (lambda, _) = best.unwrap_or((0.0, v));
    Err(Error::NonConvergence {
        best: lambda,
        iterations: ITERATION_BUDGET,
    })
}

/// Frobenius eigendata. Reducible input is an error; a periodic but
/// strongly connected support is handled by shifting to `M + I`, which
/// is primitive with the same eigenvectors.
pub fn frobenius(m: &SpectralMatrix) -> Result<FrobeniusData> {
    frobenius_with_tol(m, EIGEN_RTOL)
}

pub fn frobenius_with_tol(m: &SpectralMatrix, rtol: f64) -> Result<FrobeniusData> {
    let class = is_irreducible(m);
    let witness_k = match &class {
        Irreducibility::Reducible { persistent_zeros } => {
            return Err(Error::NotIrreducible(persistent_zeros.clone()))
        }
        Irreducibility::Primitive { witness_k } => Some(*witness_k),
        Irreducibility::IrreducibleButPeriodic { .. } => None,
    };

    let n = m.n();
    let precondition = |base: &Mat<f64>| -> Mat<f64> {
        match witness_k {
            // strictly positive power: geometric convergence guaranteed
            Some(k) if k > 1 => base.pow(k),
            Some(_) => base.clone(),
            None => {
                // periodic: add the identity to break the period
                let mut a = base.clone();
                for i in 0..n {
                    *a.at_mut(i, i) += 1.0;
                }
                a
            }
        }
    };

    // one absolute residual target for both sides, in the norm the
    // returned invariant is stated in
    let target = rtol * m.op_norm_l1().max(f64::MIN_POSITIVE);
    let right_iter = precondition(&m.entries);
    let (lambda, right, res_r) = power_iterate(&right_iter, &m.entries, target)?;
    let trans = m.entries.transpose();
    let left_iter = precondition(&trans);
    let (_, left, res_l) = power_iterate(&left_iter, &trans, target)?;
    let residual = res_r.max(res_l);
    if right.iter().any(|&x| x.is_nan() || x <= 0.0) || left.iter().any(|&x| x.is_nan() || x <= 0.0)
    {
        return Err(Error::NonConvergence {
            best: lambda,
            iterations: ITERATION_BUDGET,
        });
    }
    Ok(FrobeniusData {
        eigenvalue: lambda,
        right_eigenvector: right,
        left_eigenvector: left,
        witness_k,
        residual,
    })
}

/// `lim M^k` for a primitive matrix with Frobenius eigenvalue 1,
/// computed as the outer product of the eigenvectors. Checked against
/// the defining identity `M · M^∞ = M^∞`.
pub fn power_limit(m: &SpectralMatrix) -> Result<Vec<Vec<f64>>> {
    let class = is_irreducible(m);
    if let Irreducibility::Reducible { persistent_zeros } = class {
        return Err(Error::NotIrreducible(persistent_zeros));
    }
    let fro = frobenius(m)?;
    if (fro.eigenvalue - 1.0).abs() > 1e-9 {
        return Err(Error::EigenvalueNotUnit {
            lambda: fro.eigenvalue,
        });
    }
    let n = m.n();
    let dot: f64 = fro
        .left_eigenvector
        .iter()
        .zip(&fro.right_eigenvector)
        .map(|(a, b)| a * b)
        .sum();
    let limit: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| fro.right_eigenvector[i] * fro.left_eigenvector[j] / dot)
                .collect()
        })
        .collect();

    let mut defect: f64 = 0.0;
    for i in 0..n {
        let product_row: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|k| m.at(i, k) * limit[k][j]).sum())
            .collect();
        for (p, l) in product_row.iter().zip(&limit[i]) {
            defect = defect.max((p - l).abs());
        }
    }
    if defect > 1e-10 {
        return Err(Error::NonConvergence {
            best: fro.eigenvalue,
            iterations: 0,
        });
    }
    Ok(limit)
}

/// Uniform bound Q with `‖M^p v‖₁ ≤ Q ‖v‖₁` for all p ≥ 0, valid when
/// the Frobenius eigenvalue is 1. Computed as the supremum of the L1
/// operator norms of the powers, swept until they settle at `M^∞`.
pub fn uniform_power_bound(m: &SpectralMatrix) -> Result<f64> {
    let limit = power_limit(m)?;
    let n = m.n();
    let mut q: f64 = 1.0; // p = 0 gives the identity
    let mut power = Mat::<f64>::identity(n);
    let cap = 10_000;
    let mut settled = 0;
    for _ in 1..=cap {
        power = power.mul_mat(&m.entries);
        let colsum = (0..n)
            .map(|j| (0..n).map(|i| power.at(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        q = q.max(colsum);
        let dist_to_limit = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (power.at(i, j) - limit[i][j]).abs())
            .fold(0.0, f64::max);
        if dist_to_limit < 1e-12 {
            settled += 1;
            if settled >= 3 {
                break;
            }
        } else {
            settled = 0;
        }
    }
    Ok(q)
}

/// The structure whose level-1 clones are the level-k clones of `s`.
/// Its matrix is exactly the k-th power of the matrix of `s`.
pub fn power_structure(s: &CloneStructure, k: usize) -> Result<CloneStructure> {
    s.require_valid()?;
    if k == 0 {
        return Err(Error::BadArgument("power structure needs k >= 1".into()));
    }
    let mut clones = Vec::new();
    let mut next_id = 1;
    for root in s.model_roots() {
        let level_k = s.subdivide(std::slice::from_ref(&root), k)?;
        for addr in level_k {
            let target = s.address_type(&addr)?;
            let scale = match s.cumulative_inverse_scale_exact(&addr)? {
                Some(r) => crate::numeric::Scalar::Rational(r),
                None => crate::numeric::Scalar::Float(s.cumulative_inverse_scale(&addr)?),
            };
            // keep the composed placement when the whole chain has one
            let placement = addr.word.iter().try_fold(
                crate::geometry::PlanarSimilarity::identity(),
                |acc, &id| {
                    s.clone_spec(id)
                        .ok()
                        .and_then(|c| c.placement.as_ref())
                        .map(|p| acc.compose(p))
                },
            );
            clones.push(CloneMapSpec {
                id: next_id,
                container: root.model,
                target,
                inverse_scale: scale,
                placement,
            });
            next_id += 1;
        }
    }
    Ok(CloneStructure {
        models: s.models.clone(),
        clones,
    })
}
