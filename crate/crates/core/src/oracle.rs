//! Independent cross-checks.
//!
//! Everything here recomputes a quantity of the main pipeline by a
//! different algorithm: scalar bisection instead of eigen-iteration,
//! explicit enumeration instead of matrix algebra. The test suite pins
//! expected values through these routines, and they ship in the crate
//! (plus a CLI subcommand) so the pinned numbers stay reproducible.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::PowerSum;
use crate::structure::{CloneAddress, CloneStructure, DQuantity};

/// A pinned value with its provenance: which quantity, by which
/// (pipeline-independent) method, to what tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub quantity: String,
    pub value: f64,
    pub method: String,
    pub tolerance: f64,
}

/// [`moran_solve`] wrapped with provenance.
pub fn moran_result(scales: &[f64], tol: f64) -> Result<OracleResult> {
    Ok(OracleResult {
        quantity: format!("dimension of the single-model set with scales {scales:?}"),
        value: moran_solve(scales, tol)?,
        method: "scalar bisection on the power-sum equation".into(),
        tolerance: tol,
    })
}

/// [`char_poly_root_2x2`] wrapped with provenance.
pub fn char_poly_result(s: &CloneStructure, tol: f64) -> Result<OracleResult> {
    Ok(OracleResult {
        quantity: "dimension of a two-model set".into(),
        value: char_poly_root_2x2(s, tol)?,
        method: "bisection on the characteristic polynomial at 1, largest-root certified".into(),
        tolerance: tol,
    })
}

/// Root of `Σ scaleᵢ^d = 1` by plain bisection. For a single model this
/// scalar equation determines the dimension outright.
pub fn moran_solve(scales: &[f64], tol: f64) -> Result<f64> {
    if scales.len() < 2 {
        return Err(Error::BadArgument("need at least two scales".into()));
    }
    if scales.iter().any(|&a| a.is_nan() || a <= 0.0 || a >= 1.0) {
        return Err(Error::BadArgument("scales must lie in (0, 1)".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadArgument("tolerance must be positive".into()));
    }
    let f = |d: f64| scales.iter().map(|a| a.powf(d)).sum::<f64>() - 1.0;
    let mut lo = 0.0; // f(0) = q - 1 > 0
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1024.0 {
            return Err(Error::RootNotBracketed);
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn entries_2x2(s: &CloneStructure, d: f64) -> [f64; 4] {
    // row = clone type, col = container; built straight off the clone
    // list, bypassing the spectral module
    let mut m = [0.0; 4];
    for c in &s.clones {
        let (i, j) = (c.target.0 - 1, c.container.0 - 1);
        m[i * 2 + j] += c.inverse_scale.to_f64().powf(d);
    }
    m
}

/// Dimension of a two-model structure by bisection on the value of the
/// characteristic polynomial at 1: `p_d(1) = 1 - tr(M_d) + det(M_d)`.
/// `p_d(1)` is negative exactly while the largest root exceeds 1. The
/// returned root is certified largest by checking that the second
/// eigenvalue, which is `det(M_d*)` once the first is 1, stays below 1.
pub fn char_poly_root_2x2(s: &CloneStructure, tol: f64) -> Result<f64> {
    s.require_valid()?;
    if s.n_models() != 2 {
        return Err(Error::BadArgument(
            "characteristic-polynomial oracle needs exactly 2 models".into(),
        ));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadArgument("tolerance must be positive".into()));
    }
    let g = |d: f64| {
        let [a, b, c, e] = entries_2x2(s, d);
        1.0 - (a + e) + (a * e - b * c)
    };

    // right end: entries small enough that both roots are inside the
    // unit disc (max column sum < 1), so g > 0 with the largest root
    // below 1
    let col_norm = |d: f64| {
        let [a, b, c, e] = entries_2x2(s, d);
        (a + c).max(b + e)
    };
    let mut hi = 1.0;
    while col_norm(hi) >= 1.0 {
        hi *= 2.0;
        if hi > 1024.0 {
            return Err(Error::RootNotBracketed);
        }
    }
    // left end: the sign window where exactly one root exceeds 1 can be
    // narrow when both eigenvalues start above 1, so scan a descending
    // grid rather than halving past it
    let steps = 512;
    let mut lo = f64::NAN;
    for k in (0..steps).rev() {
        let d = hi * k as f64 / steps as f64;
        if g(d) < 0.0 {
            lo = d;
            break;
        }
    }
    if lo.is_nan() {
        return Err(Error::RootNotBracketed);
    }
    let mut width = hi - lo;
    while width > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        width = hi - lo;
    }
    let root = 0.5 * (lo + hi);
    // largest-root certificate
    let [a, b, c, e] = entries_2x2(s, root);
    let det = a * e - b * c;
    if det >= 1.0 {
        return Err(Error::NotLargestRoot { other: det });
    }
    Ok(root)
}

/// Direct enumeration of a k-fold subdivision and its d-quantity — no
/// matrix algebra anywhere. Walks the clone lists level by level and
/// sums `diam^d` per type.
pub fn exhaustive_subdivision_sum(
    s: &CloneStructure,
    coll: &[CloneAddress],
    d: f64,
    k: usize,
) -> Result<DQuantity> {
    s.require_valid()?;
    let cap: u64 = 1_000_000;
    // (type, diameter) per clone in the current refinement
    let mut frontier: Vec<(usize, f64)> = Vec::with_capacity(coll.len());
    for addr in coll {
        let t = s.address_type(addr)?;
        frontier.push((t.0, s.address_diameter(addr)?));
    }
    for _ in 0..k {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (t, diam) in frontier {
            // the parent is a copy of its model at this shrink ratio; a
            // child clone is a copy of *its* model at ratio * scale
            let ratio = diam / s.model(crate::structure::TypeId(t))?.diameter.to_f64();
            for c in &s.clones {
                if c.container.0 == t {
                    let a = c.inverse_scale.to_f64();
                    let child_diam = ratio * a * s.model(c.target)?.diameter.to_f64();
                    next.push((c.target.0, child_diam));
                }
            }
            if next.len() as u64 > cap {
                return Err(Error::EnumerationTooLarge {
                    count: next.len() as u64,
                    cap,
                });
            }
        }
        frontier = next;
    }
    let mut components = vec![0.0; s.n_models()];
    for (t, diam) in &frontier {
        components[t - 1] += diam.powf(d);
    }
    Ok(DQuantity {
        exponent: d,
        components,
    })
}

/// Exact twin of [`exhaustive_subdivision_sum`]: per-type power sums,
/// compared formally (valid for every d at once).
pub fn exhaustive_subdivision_sum_exact(
    s: &CloneStructure,
    coll: &[CloneAddress],
    k: usize,
) -> Result<Vec<PowerSum>> {
    s.require_valid()?;
    let cap: u64 = 1_000_000;
    let mut frontier: Vec<(usize, BigRational)> = Vec::with_capacity(coll.len());
    for addr in coll {
        let t = s.address_type(addr)?;
        let diam = s
            .address_diameter_exact(addr)?
            .ok_or_else(|| Error::ExactUnavailable("float scales or diameters".into()))?;
        frontier.push((t.0, diam));
    }
    for _ in 0..k {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (t, diam) in frontier {
            let parent_model_diam = s
                .model(crate::structure::TypeId(t))?
                .diameter
                .as_rational()
                .ok_or_else(|| Error::ExactUnavailable("float diameter".into()))?
                .clone();
            // shrink ratio of this particular copy relative to its model
            let ratio = &diam / &parent_model_diam;
            for c in &s.clones {
                if c.container.0 == t {
                    let a = c
                        .inverse_scale
                        .as_rational()
                        .ok_or_else(|| Error::ExactUnavailable("float scale".into()))?;
                    let child_model_diam = s
                        .model(c.target)?
                        .diameter
                        .as_rational()
                        .ok_or_else(|| Error::ExactUnavailable("float diameter".into()))?;
                    next.push((c.target.0, &ratio * a * child_model_diam));
                }
            }
            if next.len() as u64 > cap {
                return Err(Error::EnumerationTooLarge {
                    count: next.len() as u64,
                    cap,
                });
            }
        }
        frontier = next;
    }
    let mut components = vec![PowerSum::new(); s.n_models()];
    for (t, diam) in frontier {
        components[t - 1] += PowerSum::power_of(diam)?;
    }
    Ok(components)
}

/// Exact d-quantity of a collection, enumeration-side flavor.
pub fn d_quantity_exact_of(s: &CloneStructure, coll: &[CloneAddress]) -> Result<Vec<PowerSum>> {
    exhaustive_subdivision_sum_exact(s, coll, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn moran_closed_forms() {
        let d = moran_solve(&[1.0 / 3.0, 1.0 / 3.0], 1e-13).unwrap();
        assert!((d - 2f64.ln() / 3f64.ln()).abs() < 1e-12);

        let d = moran_solve(&[0.25; 4], 1e-13).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        // 2^{-d} + 4^{-d} = 1 at d = log2 of the golden ratio
        let d = moran_solve(&[0.5, 0.25], 1e-13).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((d - phi.log2()).abs() < 1e-12, "{d}");
    }

    #[test]
    fn char_poly_oracle_on_closed_forms() {
        // rank-one symmetric pair: 2 * 4^{-d} = 1 at d = 1/2
        let d = char_poly_root_2x2(&gallery::symmetric_pair(), 1e-13).unwrap();
        assert!((d - 0.5).abs() < 1e-12, "{d}");

        // the middle-third set written with two duplicate models keeps
        // its dimension
        let dup = crate::structure::CloneStructure {
            models: gallery::symmetric_pair().models.clone(),
            clones: vec![
                crate::structure::CloneMapSpec {
                    id: 1,
                    container: crate::structure::TypeId(1),
                    target: crate::structure::TypeId(1),
                    inverse_scale: crate::numeric::Scalar::ratio(1, 3).unwrap(),
                    placement: None,
                },
                crate::structure::CloneMapSpec {
                    id: 2,
                    container: crate::structure::TypeId(1),
                    target: crate::structure::TypeId(2),
                    inverse_scale: crate::numeric::Scalar::ratio(1, 3).unwrap(),
                    placement: None,
                },
                crate::structure::CloneMapSpec {
                    id: 3,
                    container: crate::structure::TypeId(2),
                    target: crate::structure::TypeId(1),
                    inverse_scale: crate::numeric::Scalar::ratio(1, 3).unwrap(),
                    placement: None,
                },
                crate::structure::CloneMapSpec {
                    id: 4,
                    container: crate::structure::TypeId(2),
                    target: crate::structure::TypeId(2),
                    inverse_scale: crate::numeric::Scalar::ratio(1, 3).unwrap(),
                    placement: None,
                },
            ],
        };
        let d = char_poly_root_2x2(&dup, 1e-13).unwrap();
        assert!((d - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_model_dimension_is_near_six_tenths() {
        let d = char_poly_root_2x2(&gallery::two_model(), 1e-13).unwrap();
        assert!((0.55..0.65).contains(&d), "{d}");
    }

    #[test]
    fn bracket_scan_handles_both_roots_above_one() {
        // counting matrix [[3,1],[1,3]]: eigenvalues 4 and 2, so the
        // sign window of p_d(1) starts away from d = 0
        let mut clones = Vec::new();
        let spec = [
            (1, 1, 5),
            (1, 1, 6),
            (1, 1, 7),
            (1, 2, 8),
            (2, 1, 5),
            (2, 2, 6),
            (2, 2, 7),
            (2, 2, 8),
        ];
        for (i, &(container, target, den)) in spec.iter().enumerate() {
            clones.push(crate::structure::CloneMapSpec {
                id: i + 1,
                container: crate::structure::TypeId(container),
                target: crate::structure::TypeId(target),
                inverse_scale: crate::numeric::Scalar::ratio(1, den).unwrap(),
                placement: None,
            });
        }
        let s = crate::structure::CloneStructure {
            models: gallery::symmetric_pair().models.clone(),
            clones,
        };
        assert!(s.validate().is_valid());
        let by_poly = char_poly_root_2x2(&s, 1e-13).unwrap();
        let by_eigen = crate::dimension::solve_dimension(&s, 1e-12)
            .unwrap()
            .dimension;
        assert!((by_poly - by_eigen).abs() < 1e-9, "{by_poly} vs {by_eigen}");
    }

    #[test]
    fn enumeration_middle_third() {
        let s = gallery::middle_third();
        let roots = s.model_roots();
        let dstar = 2f64.ln() / 3f64.ln();
        let q = exhaustive_subdivision_sum(&s, &roots, dstar, 10).unwrap();
        assert!((q.components[0] - 1.0).abs() < 1e-12);

        let q = exhaustive_subdivision_sum(&s, &roots, 1.0, 3).unwrap();
        assert!((q.components[0] - 8.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn enumeration_matches_matrix_action_on_two_model() {
        let s = gallery::two_model();
        let root1 = vec![s.model_roots()[0].clone()];
        let d = 0.6;
        let m = crate::spectral::build_matrix(&s, d).unwrap();
        let v0 = s.d_quantity(&root1, d).unwrap().components;
        let mut v = v0;
        for _ in 0..4 {
            v = m.mul_vec(&v);
        }
        let q = exhaustive_subdivision_sum(&s, &root1, d, 4).unwrap();
        for (a, b) in q.components.iter().zip(&v) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}
