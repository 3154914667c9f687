//! Bilipschitz-flavored invariants: truncated clopen-measure sets,
//! similarity-class comparison, and mass ratios of clone pairings.
//!
//! The full clopen invariant of a set is countable; any computation
//! truncates it, so a comparison can only ever *refute* similarity or
//! report consistency. The verdict vocabulary keeps that honest: no
//! verdict claims proven similarity. Values whose realizations lean on
//! clones near the truncation frontier are exempt from containment
//! tests — their partners may live beyond the cut.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::SolvedStructure;
use crate::structure::{CloneAddress, TypeId};

pub const MAX_LEVEL_CAP: usize = 8;
pub const MAX_UNION_CAP: usize = 4;
pub const DEFAULT_DEDUP_TOL: f64 = 1e-10;
/// Refuse enumerations expected to exceed this many unions.
const ENUMERATION_BUDGET: f64 = 1.5e8;

/// Truncation of the clopen invariant of one model: measures of all
/// unions of at most `union_cap` pairwise-disjoint clones of level at
/// most `level_cap`, deduplicated.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedClopenInvariant {
    pub base_model: TypeId,
    pub level_cap: usize,
    pub union_cap: usize,
    /// Sorted, strictly increasing after dedup.
    pub values: Vec<f64>,
    /// The sub-truncation safely inside the frontier: values realizable
    /// with every component of level <= ceil(level_cap / 2). Only these
    /// are *required* to find partners during comparison.
    pub core_values: Vec<f64>,
    /// Deduplicated singleton clone measures with the shallowest level
    /// realizing each; feeds candidate-scalar generation.
    pub singletons: Vec<(usize, f64)>,
    pub dedup_tolerance: f64,
    pub dimension: f64,
}

fn core_cap(level_cap: usize) -> usize {
    level_cap.div_ceil(2)
}

/// Sort, then merge runs within the relative tolerance, keeping the
/// smallest auxiliary tag seen for each merged value.
fn merge_tagged(mut items: Vec<(f64, usize)>, tol: f64) -> Vec<(f64, usize)> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (v, tag) in items {
        match out.last_mut() {
            Some((rep, best)) if v <= *rep * (1.0 + tol) => {
                if tag < *best {
                    *best = tag;
                }
            }
            _ => out.push((v, tag)),
        }
    }
    out
}

struct Accumulator {
    tol: f64,
    items: Vec<(f64, usize)>, // (sum, max component level)
    soft_cap: usize,
}

impl Accumulator {
    fn new(tol: f64) -> Self {
        Accumulator {
            tol,
            items: Vec::new(),
            soft_cap: 1 << 21,
        }
    }

    fn push(&mut self, value: f64, max_level: usize) {
        self.items.push((value, max_level));
        if self.items.len() >= self.soft_cap {
            self.items = merge_tagged(std::mem::take(&mut self.items), self.tol);
            // if merging stops helping, allow more headroom
            if self.items.len() * 2 >= self.soft_cap {
                self.soft_cap *= 2;
            }
        }
    }

    fn finish(self) -> Vec<(f64, usize)> {
        merge_tagged(self.items, self.tol)
    }
}

pub fn clopen_invariant(
    solved: &SolvedStructure,
    base_model: TypeId,
    level_cap: usize,
    union_cap: usize,
) -> Result<TruncatedClopenInvariant> {
    clopen_invariant_with_tolerance(solved, base_model, level_cap, union_cap, DEFAULT_DEDUP_TOL)
}

pub fn clopen_invariant_with_tolerance(
    solved: &SolvedStructure,
    base_model: TypeId,
    level_cap: usize,
    union_cap: usize,
    dedup_tolerance: f64,
) -> Result<TruncatedClopenInvariant> {
    let s = solved.structure();
    s.model(base_model)?;
    if union_cap == 0 {
        return Err(Error::BadArgument("union cap must be at least 1".into()));
    }

    // preorder walk to the level cap: measure, level, subtree end
    struct Item {
        measure: f64,
        level: usize,
        subtree_end: usize,
    }
    fn walk(
        s: &crate::structure::CloneStructure,
        solved: &SolvedStructure,
        addr: &CloneAddress,
        cap: usize,
        items: &mut Vec<Item>,
    ) -> Result<()> {
        let idx = items.len();
        items.push(Item {
            measure: solved.clone_measure(addr)?,
            level: addr.level(),
            subtree_end: 0,
        });
        if addr.level() < cap {
            for child in s.children(addr)? {
                walk(s, solved, &child, cap, items)?;
            }
        }
        items[idx].subtree_end = items.len();
        Ok(())
    }
    let mut items = Vec::new();
    walk(
        s,
        solved,
        &CloneAddress::root(base_model),
        level_cap,
        &mut items,
    )?;

    let n = items.len() as f64;
    let mut estimate = 0.0;
    let mut binom = 1.0;
    for t in 1..=union_cap {
        binom *= (n - (t as f64 - 1.0)) / t as f64;
        estimate += binom;
    }
    if level_cap > MAX_LEVEL_CAP || union_cap > MAX_UNION_CAP || estimate > ENUMERATION_BUDGET {
        return Err(Error::CapsExceeded {
            l: level_cap,
            s: union_cap,
            max_l: MAX_LEVEL_CAP,
            max_s: MAX_UNION_CAP,
            estimate,
        });
    }

    // disjoint unions = antichains. Members are chosen in increasing
    // preorder index; jumping to a chosen node's subtree end excludes
    // exactly its descendants, and ancestors of later candidates are
    // impossible because they come earlier in preorder.
    let mut acc = Accumulator::new(dedup_tolerance);
    fn enumerate(
        items: &[Item],
        from: usize,
        remaining: usize,
        sum: f64,
        max_level: usize,
        acc: &mut Accumulator,
    ) {
        for i in from..items.len() {
            let it = &items[i];
            let value = sum + it.measure;
            let lvl = max_level.max(it.level);
            acc.push(value, lvl);
            if remaining > 1 {
                enumerate(items, it.subtree_end, remaining - 1, value, lvl, acc);
            }
        }
    }
    enumerate(&items, 0, union_cap, 0.0, 0, &mut acc);

    let merged = acc.finish();
    let values: Vec<f64> = merged.iter().map(|(v, _)| *v).collect();
    let cap = core_cap(level_cap);
    let core_values: Vec<f64> = merged
        .iter()
        .filter(|(_, lvl)| *lvl <= cap)
        .map(|(v, _)| *v)
        .collect();

    let singles: Vec<(f64, usize)> = items.iter().map(|it| (it.measure, it.level)).collect();
    let singletons: Vec<(usize, f64)> = merge_tagged(singles, dedup_tolerance)
        .into_iter()
        .map(|(v, lvl)| (lvl, v))
        .collect();

    Ok(TruncatedClopenInvariant {
        base_model,
        level_cap,
        union_cap,
        values,
        core_values,
        singletons,
        dedup_tolerance,
        dimension: solved.dimension(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CompareVerdict {
    /// Dimensions differ; equal Hausdorff dimension is necessary before
    /// measures can be compared at all.
    Incomparable { dimension_a: f64, dimension_b: f64 },
    /// Some solid value admits no scalar partner under any candidate
    /// ratio. `direction` tells which containment failed.
    NotSimilarAtTruncation {
        witness: f64,
        direction: ComparisonDirection,
    },
    /// Candidate scalars embed each truncation into the other, modulo
    /// the frontier exemption. Not a proof of similarity.
    ConsistentWithSimilar { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ComparisonDirection {
    AIntoB,
    BIntoA,
}

impl std::fmt::Display for CompareVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompareVerdict::Incomparable {
                dimension_a,
                dimension_b,
            } => {
                write!(
                    f,
                    "INCOMPARABLE (dimensions {dimension_a} vs {dimension_b})"
                )
            }
            CompareVerdict::NotSimilarAtTruncation { witness, direction } => {
                let dir = match direction {
                    ComparisonDirection::AIntoB => "A into B",
                    ComparisonDirection::BIntoA => "B into A",
                };
                write!(
                    f,
                    "NOT_SIMILAR_AT_TRUNCATION (witness {witness}, direction {dir})"
                )
            }
            CompareVerdict::ConsistentWithSimilar { alpha, beta } => {
                write!(f, "CONSISTENT_WITH_SIMILAR (alpha {alpha}, beta {beta})")
            }
        }
    }
}

fn contains_value(sorted: &[f64], x: f64, tol: f64) -> bool {
    let idx = sorted.partition_point(|&v| v < x);
    let close = |v: f64| (v - x).abs() <= tol * x.abs().max(v.abs());
    (idx < sorted.len() && close(sorted[idx])) || (idx > 0 && close(sorted[idx - 1]))
}

/// Candidate similarity scalars for mapping `a` into `b`.
///
/// Ratios over the few smallest elements of each set cover scalars that
/// match floor to floor. They miss the geometric embedding scalars
/// (smallest elements sit at the truncation frontier, where partners
/// fall off the cut), so ratios of shallow singletons of `a` against
/// singletons of `b` within the frontier margin are added; those are
/// exactly the scalars a clone-into-clone embedding produces.
fn candidate_scalars(a: &TruncatedClopenInvariant, b: &TruncatedClopenInvariant) -> Vec<f64> {
    let mut cands = vec![1.0];
    for av in a.values.iter().take(10) {
        for bv in b.values.iter().take(10) {
            cands.push(bv / av);
        }
    }
    let shallow = 2.min(a.level_cap);
    let deep = b.level_cap.min(shallow + core_cap(b.level_cap));
    for &(_, va) in a.singletons.iter().filter(|(l, _)| *l <= shallow) {
        for &(_, vb) in b.singletons.iter().filter(|(l, _)| *l <= deep) {
            cands.push(vb / va);
        }
    }
    cands.retain(|c| c.is_finite() && *c > 0.0);
    cands.sort_by(f64::total_cmp);
    cands.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
    cands.truncate(5000);
    cands
}

/// Find a scalar embedding the core of `a` into `b`; on failure return
/// the witness value that resists every candidate.
fn find_embedding_scalar(
    a: &TruncatedClopenInvariant,
    b: &TruncatedClopenInvariant,
    tol: f64,
) -> std::result::Result<f64, f64> {
    let match_tol = tol.max(a.dedup_tolerance).max(b.dedup_tolerance);
    let mut cands = candidate_scalars(a, b);
    // rank candidates by how well they do on a small probe; among
    // equally good ones prefer the scalar closest to 1 (self-similar
    // sets admit whole families of embedding scalars)
    let probe: Vec<f64> = a.core_values.iter().copied().take(24).collect();
    let mut scored: Vec<(usize, f64)> = cands
        .iter()
        .map(|&c| {
            let hits = probe
                .iter()
                .filter(|&&v| contains_value(&b.values, c * v, match_tol))
                .count();
            (hits, c)
        })
        .collect();
    scored.sort_by(|x, y| {
        y.0.cmp(&x.0)
            .then(x.1.ln().abs().total_cmp(&y.1.ln().abs()))
            .then(x.1.total_cmp(&y.1))
    });
    cands = scored.into_iter().map(|(_, c)| c).collect();

    for &c in &cands {
        if a.core_values
            .iter()
            .all(|&v| contains_value(&b.values, c * v, match_tol))
        {
            return Ok(c);
        }
    }
    // witness: a core value with no partner under any candidate
    for &v in &a.core_values {
        if cands
            .iter()
            .all(|&c| !contains_value(&b.values, c * v, match_tol))
        {
            return Err(v);
        }
    }
    // otherwise report the value with the fewest candidate matches
    let witness = a
        .core_values
        .iter()
        .copied()
        .min_by_key(|&v| {
            cands
                .iter()
                .filter(|&&c| contains_value(&b.values, c * v, match_tol))
                .count()
        })
        .unwrap_or(f64::NAN);
    Err(witness)
}

pub fn compare_invariants(
    a: &TruncatedClopenInvariant,
    b: &TruncatedClopenInvariant,
    tol: f64,
) -> Result<CompareVerdict> {
    if (a.level_cap, a.union_cap) != (b.level_cap, b.union_cap) {
        return Err(Error::CapsMismatch(
            a.level_cap,
            a.union_cap,
            b.level_cap,
            b.union_cap,
        ));
    }
    if (a.dimension - b.dimension).abs() > 1e-9 {
        return Ok(CompareVerdict::Incomparable {
            dimension_a: a.dimension,
            dimension_b: b.dimension,
        });
    }
    let alpha = match find_embedding_scalar(a, b, tol) {
        Ok(c) => c,
        Err(witness) => {
            return Ok(CompareVerdict::NotSimilarAtTruncation {
                witness,
                direction: ComparisonDirection::AIntoB,
            })
        }
    };
    let beta = match find_embedding_scalar(b, a, tol) {
        Ok(c) => c,
        Err(witness) => {
            return Ok(CompareVerdict::NotSimilarAtTruncation {
                witness,
                direction: ComparisonDirection::BIntoA,
            })
        }
    };
    Ok(CompareVerdict::ConsistentWithSimilar { alpha, beta })
}

/// A user-supplied pairing of clones between two solved structures,
/// standing in for a bilipschitz map on the listed clones.
#[derive(Debug)]
pub struct MassRatioMap {
    source: SolvedStructure,
    target: SolvedStructure,
    pairs: Vec<(CloneAddress, CloneAddress)>,
}

impl MassRatioMap {
    /// Source addresses may nest (the spectrum needs parent/child
    /// pairs) but must be distinct so the pairing is a function.
    pub fn new(
        source: SolvedStructure,
        target: SolvedStructure,
        pairs: Vec<(CloneAddress, CloneAddress)>,
    ) -> Result<Self> {
        for (src, tgt) in &pairs {
            if !source.structure().check_address(src)? {
                return Err(Error::InvalidAddress {
                    addr: src.to_string(),
                    reason: "bad chain".into(),
                });
            }
            if !target.structure().check_address(tgt)? {
                return Err(Error::InvalidAddress {
                    addr: tgt.to_string(),
                    reason: "bad chain".into(),
                });
            }
        }
        for (i, (a, _)) in pairs.iter().enumerate() {
            for (b, _) in &pairs[i + 1..] {
                if a == b {
                    return Err(Error::BadArgument(format!(
                        "source address {a} paired twice"
                    )));
                }
            }
        }
        Ok(MassRatioMap {
            source,
            target,
            pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(CloneAddress, CloneAddress)] {
        &self.pairs
    }

    fn check_dimensions(&self) -> Result<()> {
        let (ds, dt) = (self.source.dimension(), self.target.dimension());
        if (ds - dt).abs() > 1e-9 {
            return Err(Error::DimensionMismatch {
                d_source: ds,
                d_target: dt,
            });
        }
        Ok(())
    }

    /// Measure of the paired image over the measure of the source.
    pub fn mass_ratio(&self, pair_index: usize) -> Result<f64> {
        self.check_dimensions()?;
        let (src, tgt) = self
            .pairs
            .get(pair_index)
            .ok_or(Error::PairIndexOutOfRange(pair_index, self.pairs.len()))?;
        Ok(self.target.clone_measure(tgt)? / self.source.clone_measure(src)?)
    }

    /// Quotients MR(child)/MR(parent) over the immediately nested
    /// source pairs, deduplicated. Probes the discreteness of measure
    /// distortion across one level.
    pub fn mass_ratio_spectrum(&self) -> Result<Vec<f64>> {
        self.check_dimensions()?;
        let mut quotients = Vec::new();
        for (i, (parent, _)) in self.pairs.iter().enumerate() {
            for (j, (child, _)) in self.pairs.iter().enumerate() {
                if i == j || !is_strict_prefix(parent, child) {
                    continue;
                }
                // immediate nesting: no mapped source strictly between
                let intermediate = self.pairs.iter().enumerate().any(|(k, (w, _))| {
                    k != i && k != j && is_strict_prefix(parent, w) && is_strict_prefix(w, child)
                });
                if intermediate {
                    continue;
                }
                quotients.push(self.mass_ratio(j)? / self.mass_ratio(i)?);
            }
        }
        if quotients.is_empty() {
            return Err(Error::BadArgument(
                "spectrum needs at least one nested source pair in the map".into(),
            ));
        }
        quotients.sort_by(f64::total_cmp);
        quotients.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * y.abs());
        Ok(quotients)
    }
}

fn is_strict_prefix(parent: &CloneAddress, child: &CloneAddress) -> bool {
    parent.model == child.model
        && parent.word.len() < child.word.len()
        && child.word.starts_with(&parent.word)
}

/// Free-function forms of the map methods.
pub fn mass_ratio(map: &MassRatioMap, pair_index: usize) -> Result<f64> {
    map.mass_ratio(pair_index)
}

pub fn mass_ratio_spectrum(map: &MassRatioMap) -> Result<Vec<f64>> {
    map.mass_ratio_spectrum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use crate::measure::SolvedStructure;

    fn addr(model: usize, word: &[usize]) -> CloneAddress {
        CloneAddress {
            model: TypeId(model),
            word: word.to_vec(),
        }
    }

    #[test]
    fn middle_third_small_truncations() {
        let solved = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        let tci = clopen_invariant(&solved, TypeId(1), 2, 1).unwrap();
        let expect = [0.25, 0.5, 1.0];
        assert_eq!(tci.values.len(), 3);
        for (v, e) in tci.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-11, "{v} vs {e}");
        }

        // with pairs allowed, 1/2 + 1/2 dedups against the whole set
        let tci = clopen_invariant(&solved, TypeId(1), 1, 2).unwrap();
        let expect = [0.5, 1.0];
        assert_eq!(tci.values.len(), 2);
        for (v, e) in tci.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-11, "{v} vs {e}");
        }
    }

    #[test]
    fn every_singleton_appears() {
        let solved = SolvedStructure::solve_default(&gallery::two_model()).unwrap();
        let tci = clopen_invariant(&solved, TypeId(1), 3, 2).unwrap();
        let s = solved.structure();
        let mut frontier = vec![CloneAddress::root(TypeId(1))];
        for _ in 0..=3 {
            for a in &frontier {
                let m = solved.clone_measure(a).unwrap();
                assert!(
                    contains_value(&tci.values, m, 1e-9),
                    "missing singleton measure {m} for {a}"
                );
            }
            frontier = frontier
                .iter()
                .flat_map(|a| s.children(a).unwrap())
                .collect();
        }
        // values sorted strictly increasing
        for w in tci.values.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn symmetric_pair_models_share_values() {
        let solved = SolvedStructure::solve_default(&gallery::symmetric_pair()).unwrap();
        let a = clopen_invariant(&solved, TypeId(1), 4, 2).unwrap();
        let b = clopen_invariant(&solved, TypeId(2), 4, 2).unwrap();
        assert_eq!(a.values.len(), b.values.len());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-11 * y.max(1e-300));
        }
    }

    #[test]
    fn self_comparison_is_consistent_with_unit_scalars() {
        let solved = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        let tci = clopen_invariant(&solved, TypeId(1), 4, 2).unwrap();
        match compare_invariants(&tci, &tci, 1e-9).unwrap() {
            CompareVerdict::ConsistentWithSimilar { alpha, beta } => {
                assert!((alpha - 1.0).abs() < 1e-9);
                assert!((beta - 1.0).abs() < 1e-9);
            }
            other => panic!("expected consistency, got {other}"),
        }
    }

    #[test]
    fn dimension_gate_reports_incomparable() {
        let a = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        let b = SolvedStructure::solve_default(&gallery::fifths()).unwrap();
        let ta = clopen_invariant(&a, TypeId(1), 3, 2).unwrap();
        let tb = clopen_invariant(&b, TypeId(1), 3, 2).unwrap();
        assert!(matches!(
            compare_invariants(&ta, &tb, 1e-9).unwrap(),
            CompareVerdict::Incomparable { .. }
        ));
    }

    #[test]
    fn rescaled_diameters_stay_consistent() {
        let mut doubled = gallery::middle_third();
        for m in &mut doubled.models {
            m.diameter = crate::numeric::Scalar::integer(2);
        }
        for c in &mut doubled.clones {
            c.placement = None;
        }
        let a = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        let b = SolvedStructure::solve_default(&doubled).unwrap();
        let ta = clopen_invariant(&a, TypeId(1), 4, 2).unwrap();
        let tb = clopen_invariant(&b, TypeId(1), 4, 2).unwrap();
        assert!(matches!(
            compare_invariants(&ta, &tb, 1e-9).unwrap(),
            CompareVerdict::ConsistentWithSimilar { .. }
        ));
    }

    #[test]
    fn scalar_closure_of_consistency() {
        let solved = SolvedStructure::solve_default(&gallery::two_model()).unwrap();
        let a = clopen_invariant(&solved, TypeId(1), 4, 2).unwrap();
        let mut b = clopen_invariant(&solved, TypeId(1), 4, 2).unwrap();
        for v in b.values.iter_mut().chain(b.core_values.iter_mut()) {
            *v *= 3.7;
        }
        for (_, v) in b.singletons.iter_mut() {
            *v *= 3.7;
        }
        match compare_invariants(&a, &b, 1e-9).unwrap() {
            CompareVerdict::ConsistentWithSimilar { alpha, .. } => {
                // the returned scalar absorbs the constant: every core
                // value must land in the scaled set
                for &v in &a.core_values {
                    assert!(
                        contains_value(&b.values, alpha * v, 1e-8),
                        "alpha {alpha} strands {v}"
                    );
                }
            }
            other => panic!("expected consistency, got {other}"),
        }
    }

    #[test]
    fn crafted_mismatch_produces_a_genuine_witness() {
        // hand-built truncations with equal dimensions but obviously
        // incompatible value sets
        let mk = |values: Vec<f64>| TruncatedClopenInvariant {
            base_model: TypeId(1),
            level_cap: 2,
            union_cap: 1,
            core_values: values.clone(),
            singletons: values.iter().map(|&v| (1usize, v)).collect(),
            values,
            dedup_tolerance: 1e-10,
            dimension: 0.5,
        };
        let a = mk(vec![1.0, 2.0, 3.0]);
        let b = mk(vec![1.0, 2.0, 3.7]);
        match compare_invariants(&a, &b, 1e-9).unwrap() {
            CompareVerdict::NotSimilarAtTruncation { .. } => {
                // brute-force scan confirms the refutation: no candidate
                // ratio embeds every core value
                let cands = candidate_scalars(&a, &b);
                assert!(cands
                    .iter()
                    .all(|&c| a.core_values.iter().any(|&v| !contains_value(
                        &b.values,
                        c * v,
                        1e-9
                    ))));
            }
            other => panic!("expected refutation, got {other}"),
        }
    }

    #[test]
    fn identity_pairing_has_unit_ratios_and_spectrum() {
        let solved = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        let pairs = vec![
            (addr(1, &[]), addr(1, &[])),
            (addr(1, &[1]), addr(1, &[1])),
            (addr(1, &[2]), addr(1, &[2])),
            (addr(1, &[1, 1]), addr(1, &[1, 1])),
        ];
        let map = MassRatioMap::new(solved.clone(), solved, pairs).unwrap();
        for i in 0..map.len() {
            assert!((map.mass_ratio(i).unwrap() - 1.0).abs() < 1e-12);
        }
        let spectrum = map.mass_ratio_spectrum().unwrap();
        assert_eq!(spectrum.len(), 1);
        assert!((spectrum[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn level_shift_pairing_and_two_packet_spectrum() {
        let solved = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        // level-1 source onto level-2 target: ratio (1/4)/(1/2)
        let map = MassRatioMap::new(
            solved.clone(),
            solved.clone(),
            vec![(addr(1, &[1]), addr(1, &[1, 1]))],
        )
        .unwrap();
        assert!((map.mass_ratio(0).unwrap() - 0.5).abs() < 1e-12);

        // a measure-linear pairing (every ratio 1/2) collapses the
        // spectrum to {1}
        let linear = MassRatioMap::new(
            solved.clone(),
            solved.clone(),
            vec![
                (addr(1, &[]), addr(1, &[1])),
                (addr(1, &[1]), addr(1, &[1, 1])),
                (addr(1, &[2]), addr(1, &[1, 2])),
            ],
        )
        .unwrap();
        for i in 0..linear.len() {
            assert!((linear.mass_ratio(i).unwrap() - 0.5).abs() < 1e-12);
        }
        let spectrum = linear.mass_ratio_spectrum().unwrap();
        assert_eq!(spectrum.len(), 1);
        assert!((spectrum[0] - 1.0).abs() < 1e-12);

        // two distinct parent/child quotients
        let map = MassRatioMap::new(
            solved.clone(),
            solved,
            vec![
                (addr(1, &[]), addr(1, &[])),
                (addr(1, &[1]), addr(1, &[1, 1])),
                (addr(1, &[2]), addr(1, &[2])),
            ],
        )
        .unwrap();
        let spectrum = map.mass_ratio_spectrum().unwrap();
        assert_eq!(spectrum.len(), 2, "{spectrum:?}");
        assert!((spectrum[0] - 0.5).abs() < 1e-12);
        assert!((spectrum[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_structure_ratio_with_equal_dimensions() {
        // both have dimension 1/2: 2·(1/4)^{1/2} = 1 and
        // (1/9)^{1/2} + (4/9)^{1/2} = 1
        let a = SolvedStructure::solve_default(&gallery::single_model(&[(1, 4), (1, 4)])).unwrap();
        let b = SolvedStructure::solve_default(&gallery::single_model(&[(1, 9), (4, 9)])).unwrap();
        let map = MassRatioMap::new(a, b, vec![(addr(1, &[1]), addr(1, &[1]))]).unwrap();
        let mr = map.mass_ratio(0).unwrap();
        assert!((mr - (1.0 / 3.0) / 0.5).abs() < 1e-10, "{mr}");
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        let b = SolvedStructure::solve_default(&gallery::fifths()).unwrap();
        let map = MassRatioMap::new(a, b, vec![(addr(1, &[1]), addr(1, &[1]))]).unwrap();
        assert!(matches!(
            map.mass_ratio(0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn parent_ratio_is_measure_weighted_average_of_children() {
        let solved = SolvedStructure::solve_default(&gallery::two_model()).unwrap();
        // crossed pairing of the children of [2:3] keeps the union
        // intact, so sigma-additivity transports through the map
        let pairs = vec![
            (addr(1, &[1]), addr(2, &[3])),
            (addr(1, &[1, 1]), addr(2, &[3, 2])),
            (addr(1, &[1, 2]), addr(2, &[3, 1])),
        ];
        let map = MassRatioMap::new(solved.clone(), solved.clone(), pairs).unwrap();
        let parent = map.mass_ratio(0).unwrap();
        let m = |a: &CloneAddress| solved.clone_measure(a).unwrap();
        let w1 = m(&addr(1, &[1, 1])) / m(&addr(1, &[1]));
        let w2 = m(&addr(1, &[1, 2])) / m(&addr(1, &[1]));
        let avg = w1 * map.mass_ratio(1).unwrap() + w2 * map.mass_ratio(2).unwrap();
        assert!(
            (parent - avg).abs() <= 1e-12 * parent.abs(),
            "{parent} vs {avg}"
        );
        let spectrum = map.mass_ratio_spectrum().unwrap();
        assert!(
            spectrum.len() >= 2,
            "crossed pairing should produce distinct quotients"
        );
    }

    #[test]
    fn caps_are_enforced_with_an_estimate() {
        let solved = SolvedStructure::solve_default(&gallery::middle_third()).unwrap();
        match clopen_invariant(&solved, TypeId(1), 9, 2) {
            Err(Error::CapsExceeded { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected caps error, got {other:?}"),
        }
    }
}
