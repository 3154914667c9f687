//! Hausdorff dimension: the unique exponent where the Frobenius
//! eigenvalue of `M_d` crosses 1.
//!
//! Every matrix entry decreases strictly in d, so the eigenvalue does
//! too; bisection is unconditionally safe even though each evaluation
//! is itself iterative. The inner eigen tolerance tightens with the
//! bracket so a sloppy eigenvalue can never flip a bisection branch
//! near the root.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{
    build_matrix, frobenius, frobenius_with_tol, is_irreducible, Irreducibility,
};
use crate::structure::CloneStructure;

pub const DEFAULT_TOL: f64 = 1e-12;
const BRACKET_CAP: f64 = 64.0;

#[derive(Debug, Clone, Serialize)]
pub struct DimensionResult {
    pub dimension: f64,
    pub eigenvalue_at_solution: f64,
    /// Final bracket with λ(lo) > 1 > λ(hi).
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Left Frobenius eigenvector at the solution, L1-normalized: the
    /// direction of the per-model Hausdorff measures.
    pub eigenvector_left: Vec<f64>,
}

fn eigenvalue_at(s: &CloneStructure, d: f64, rtol: f64) -> Result<f64> {
    Ok(frobenius_with_tol(&build_matrix(s, d)?, rtol)?.eigenvalue)
}

pub fn solve_dimension(s: &CloneStructure, tol: f64) -> Result<DimensionResult> {
    s.require_valid()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadArgument("tolerance must be positive".into()));
    }
    let m0 = build_matrix(s, 0.0)?;
    if let Irreducibility::Reducible { persistent_zeros } = is_irreducible(&m0) {
        return Err(Error::NotIrreducible(persistent_zeros));
    }
    let lambda0 = frobenius(&m0)?.eigenvalue;
    if lambda0 <= 1.0 {
        // cannot happen for a valid structure (column sums are >= 2)
        return Err(Error::DegenerateSpectrum { lambda: lambda0 });
    }

    let mut d_hi = 1.0;
    loop {
        let lambda = eigenvalue_at(s, d_hi, 1e-11)?;
        if lambda < 1.0 - 1e-9 {
            break;
        }
        d_hi *= 2.0;
        if d_hi > BRACKET_CAP {
            return Err(Error::BracketSearchFailed {
                cap: BRACKET_CAP,
                lambda,
            });
        }
    }

    let mut d_lo = 0.0;
    let mut iterations = 0usize;
    while d_hi - d_lo > tol && iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (d_lo + d_hi);
        let inner_tol = (1e-3 * (d_hi - d_lo)).clamp(1e-15, 1e-9);
        if eigenvalue_at(s, mid, inner_tol)? > 1.0 {
            d_lo = mid;
        } else {
            d_hi = mid;
        }
    }

    // polish: one secant step through the bracket endpoints pushes
    // λ(d*) from ~slope·tol above/below 1 down to the float floor,
    // which keeps level-k identities from drifting as (λ-1)·k
    let mut dimension = 0.5 * (d_lo + d_hi);
    let mut fro = frobenius(&build_matrix(s, dimension)?)?;
    if d_hi > d_lo {
        let lam_lo = eigenvalue_at(s, d_lo, 1e-15)?;
        let lam_hi = eigenvalue_at(s, d_hi, 1e-15)?;
        let slope = (lam_hi - lam_lo) / (d_hi - d_lo);
        if slope < 0.0 {
            let polished = (dimension - (fro.eigenvalue - 1.0) / slope).clamp(d_lo, d_hi);
            let fro_polished = frobenius(&build_matrix(s, polished)?)?;
            if (fro_polished.eigenvalue - 1.0).abs() < (fro.eigenvalue - 1.0).abs() {
                dimension = polished;
                fro = fro_polished;
            }
        }
    }
    Ok(DimensionResult {
        dimension,
        eigenvalue_at_solution: fro.eigenvalue,
        bracket: (d_lo, d_hi),
        iterations,
        eigenvector_left: fro.left_eigenvector,
    })
}

/// λ_d sampled over a grid. The values decrease strictly along any
/// increasing grid; callers asserting that rely on the tight default
/// eigen tolerance used here.
pub fn eigenvalue_curve(s: &CloneStructure, d_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    s.require_valid()?;
    let m0 = build_matrix(s, 0.0)?;
    if let Irreducibility::Reducible { persistent_zeros } = is_irreducible(&m0) {
        return Err(Error::NotIrreducible(persistent_zeros));
    }
    d_grid
        .iter()
        .map(|&d| {
            if d.is_nan() || d < 0.0 {
                return Err(Error::BadArgument(format!(
                    "grid point {d} must be non-negative"
                )));
            }
            Ok((d, eigenvalue_at(s, d, 1e-13)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::oracle;

    #[test]
    fn middle_third_dimension() {
        let r = solve_dimension(&gallery::middle_third(), 1e-12).unwrap();
        assert!(
            (r.dimension - 2f64.ln() / 3f64.ln()).abs() < 1e-11,
            "{}",
            r.dimension
        );
        assert!((r.eigenvalue_at_solution - 1.0).abs() < 1e-9);
        assert!(r.bracket.0 <= r.dimension && r.dimension <= r.bracket.1);
        assert_eq!(r.eigenvector_left, vec![1.0]);
    }

    #[test]
    fn four_quarters_has_dimension_one() {
        let r = solve_dimension(&gallery::quarters(), 1e-12).unwrap();
        assert!((r.dimension - 1.0).abs() < 1e-11);
    }

    #[test]
    fn two_model_agrees_with_char_poly_oracle() {
        let s = gallery::two_model();
        let by_eigen = solve_dimension(&s, 1e-12).unwrap().dimension;
        let by_poly = oracle::char_poly_root_2x2(&s, 1e-13).unwrap();
        assert!((by_eigen - by_poly).abs() < 1e-9, "{by_eigen} vs {by_poly}");
    }

    #[test]
    fn reducible_structure_is_rejected() {
        assert!(matches!(
            solve_dimension(&gallery::reducible(), 1e-10),
            Err(Error::NotIrreducible(_))
        ));
    }

    #[test]
    fn middle_third_curve_closed_forms() {
        let s = gallery::middle_third();
        let dstar = 2f64.ln() / 3f64.ln();
        let curve = eigenvalue_curve(&s, &[0.0, dstar, 1.0]).unwrap();
        assert!((curve[0].1 - 2.0).abs() < 1e-12);
        assert!((curve[1].1 - 1.0).abs() < 1e-12);
        assert!((curve[2].1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_model_curve_at_zero_is_golden() {
        let curve = eigenvalue_curve(&gallery::two_model(), &[0.0]).unwrap();
        assert!((curve[0].1 - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn curves_decrease_strictly() {
        for (name, s) in gallery::all_bundled() {
            if name == "reducible" {
                continue;
            }
            let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
            let curve = eigenvalue_curve(&s, &grid).unwrap();
            for w in curve.windows(2) {
                assert!(w[1].1 < w[0].1, "{name}: not decreasing at d = {}", w[1].0);
            }
        }
    }

    #[test]
    fn dimension_is_stable_under_structure_powers() {
        for s in [gallery::middle_third(), gallery::two_model()] {
            let tol = 1e-11;
            let base = solve_dimension(&s, tol).unwrap().dimension;
            let squared = crate::spectral::power_structure(&s, 2).unwrap();
            let powered = solve_dimension(&squared, tol).unwrap().dimension;
            assert!(
                (base - powered).abs() <= 2.0 * tol + 1e-10,
                "{base} vs {powered}"
            );
        }
    }

    #[test]
    fn single_model_moran_family() {
        for scales in [
            vec![(1i64, 3i64), (1, 3)],
            vec![(1, 2), (1, 4)],
            vec![(1, 5), (2, 5), (1, 4)],
        ] {
            let s = gallery::single_model(&scales);
            let d = solve_dimension(&s, 1e-12).unwrap().dimension;
            let moran: f64 = scales
                .iter()
                .map(|&(n, q)| (n as f64 / q as f64).powf(d))
                .sum();
            assert!(
                (moran - 1.0).abs() < 1e-10,
                "scales {scales:?}: moran sum {moran}"
            );
        }
    }
}
