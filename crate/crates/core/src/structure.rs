//! Clone structures: the combinatorial description of a multi-model
//! Cantor set.
//!
//! A structure has `n` models (level-0 clopens) and `m` level-1 clones.
//! Every clone lives inside a *container* model and is a scaled copy of
//! a *target* model; the inverse scale factor lies in (0, 1). Deeper
//! clones are addressed by words of clone ids: each id picks a level-1
//! clone inside the model reached by the previous step, so a word is
//! admissible exactly when `container(next) = target(prev)`. Diameters,
//! counts and d-quantities all follow from the word algebra; nothing in
//! this module touches the plane (see `geometry` for realizations).

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disc, PlanarSimilarity};
use crate::numeric::{PowerSum, Scalar};

/// Index of a model, 1-based. Clones carry two of these: the model they
/// sit inside and the model they are similar to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeId(pub usize);

impl TypeId {
    /// 0-based index into model-ordered vectors; valid ids only.
    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A level-0 clopen. The diameter is abstract length data; `region` and
/// `outline` are only present when the structure carries a planar
/// realization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Model {
    pub id: TypeId,
    #[serde(default = "Scalar::one")]
    pub diameter: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Disc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outline: Option<Vec<[f64; 2]>>,
}

/// One level-1 clone: a copy of model `target` placed inside model
/// `container`, shrunk by `inverse_scale`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CloneMapSpec {
    pub id: usize,
    pub container: TypeId,
    pub target: TypeId,
    pub inverse_scale: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlanarSimilarity>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CloneStructure {
    pub models: Vec<Model>,
    pub clones: Vec<CloneMapSpec>,
}

/// Address of a clone at any level: the model it is rooted at plus the
/// word of clone ids leading to it. The empty word addresses the model
/// itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CloneAddress {
    pub model: TypeId,
    pub word: Vec<usize>,
}

impl CloneAddress {
    pub fn root(model: TypeId) -> Self {
        CloneAddress {
            model,
            word: Vec::new(),
        }
    }

    pub fn level(&self) -> usize {
        self.word.len()
    }

    pub fn is_root(&self) -> bool {
        self.word.is_empty()
    }

    /// The model this address is contained in (its level-0 ancestor).
    pub fn containing_type(&self) -> TypeId {
        self.model
    }

    pub(crate) fn child(&self, id: usize) -> CloneAddress {
        let mut word = self.word.clone();
        word.push(id);
        CloneAddress {
            model: self.model,
            word,
        }
    }

    /// True when one address lies inside the other (or they are equal):
    /// same root model and one word a prefix of the other.
    pub fn nested_with(&self, other: &CloneAddress) -> bool {
        self.model == other.model
            && (self.word.starts_with(&other.word) || other.word.starts_with(&self.word))
    }
}

impl fmt::Display for CloneAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.model)?;
        for (i, id) in self.word.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "]")
    }
}

/// Per-type totals `Σ diam^d` over a clone collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DQuantity {
    pub exponent: f64,
    pub components: Vec<f64>,
}

impl DQuantity {
    pub fn total(&self) -> f64 {
        self.components.iter().sum()
    }
}

/// One broken invariant. Violations are findings, not failures:
/// `validate_structure` reports all of them at once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NoModels,
    DuplicateModelId { id: usize },
    ModelIdOutOfRange { id: usize, n: usize },
    NonPositiveDiameter { model: usize },
    DuplicateCloneId { id: usize },
    CloneIdOutOfRange { id: usize, m: usize },
    BadContainer { clone_id: usize, container: usize },
    BadTarget { clone_id: usize, target: usize },
    ScaleOutOfRange { clone_id: usize, value: f64 },
    ModelTooFewClones { model: usize, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoModels => write!(f, "structure has no models"),
            Violation::DuplicateModelId { id } => write!(f, "duplicate model id {id}"),
            Violation::ModelIdOutOfRange { id, n } => {
                write!(f, "model id {id} outside 1..={n}")
            }
            Violation::NonPositiveDiameter { model } => {
                write!(f, "model {model} has non-positive diameter")
            }
            Violation::DuplicateCloneId { id } => write!(f, "duplicate clone id {id}"),
            Violation::CloneIdOutOfRange { id, m } => {
                write!(f, "clone id {id} outside 1..={m}")
            }
            Violation::BadContainer {
                clone_id,
                container,
            } => {
                write!(
                    f,
                    "clone {clone_id} names unknown container model {container}"
                )
            }
            Violation::BadTarget { clone_id, target } => {
                write!(f, "clone {clone_id} names unknown target model {target}")
            }
            Violation::ScaleOutOfRange { clone_id, value } => {
                write!(
                    f,
                    "clone {clone_id} has inverse scale {value} outside (0, 1)"
                )
            }
            Violation::ModelTooFewClones { model, count } => {
                write!(f, "model {model} has {count} clone(s), needs at least 2")
            }
        }
    }
}

/// Outcome of `validate_structure`: every violated invariant plus the
/// counting matrix R (entry (i, j) = number of type-i clones in model j,
/// 1-based when displayed).
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub clone_counts: Vec<Vec<usize>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "valid")?;
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
        }
        writeln!(
            f,
            "clone counts R (rows = clone type, cols = container model):"
        )?;
        for row in &self.clone_counts {
            write!(f, " ")?;
            for c in row {
                write!(f, " {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl CloneStructure {
    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_clones(&self) -> usize {
        self.clones.len()
    }

    pub fn model(&self, id: TypeId) -> Result<&Model> {
        self.models
            .iter()
            .find(|m| m.id == id)
            .ok_or(Error::UnknownModel(id.0))
    }

    pub fn clone_spec(&self, id: usize) -> Result<&CloneMapSpec> {
        self.clones
            .iter()
            .find(|c| c.id == id)
            .ok_or(Error::UnknownCloneId(id))
    }

    /// All scale and diameter inputs rational, so exact identities apply.
    pub fn is_exact(&self) -> bool {
        self.models.iter().all(|m| m.diameter.is_rational())
            && self.clones.iter().all(|c| c.inverse_scale.is_rational())
    }

    /// Ids of the level-1 clones contained in a model of the given type,
    /// in declaration order. This is what subdivision appends.
    pub fn clones_in_model(&self, t: TypeId) -> Vec<usize> {
        self.clones
            .iter()
            .filter(|c| c.container == t)
            .map(|c| c.id)
            .collect()
    }

    /// Counting matrix R: entry (i, j) = number of type-(i+1) clones in
    /// model (j+1). Only clones with valid endpoints are counted.
    pub fn count_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.n_models();
        let mut r = vec![vec![0usize; n]; n];
        for c in &self.clones {
            let (t, j) = (c.target.0, c.container.0);
            if (1..=n).contains(&t) && (1..=n).contains(&j) {
                r[t - 1][j - 1] += 1;
            }
        }
        r
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.n_models();
        let m = self.n_clones();

        if n == 0 {
            violations.push(Violation::NoModels);
        }
        let mut seen_models = vec![false; n + 1];
        for model in &self.models {
            let id = model.id.0;
            if id < 1 || id > n {
                violations.push(Violation::ModelIdOutOfRange { id, n });
            } else if seen_models[id] {
                violations.push(Violation::DuplicateModelId { id });
            } else {
                seen_models[id] = true;
            }
            if !model.diameter.is_positive() {
                violations.push(Violation::NonPositiveDiameter { model: id });
            }
        }

        let mut seen_clones = vec![false; m + 1];
        for c in &self.clones {
            if c.id < 1 || c.id > m {
                violations.push(Violation::CloneIdOutOfRange { id: c.id, m });
            } else if seen_clones[c.id] {
                violations.push(Violation::DuplicateCloneId { id: c.id });
            } else {
                seen_clones[c.id] = true;
            }
            if self.model(c.container).is_err() {
                violations.push(Violation::BadContainer {
                    clone_id: c.id,
                    container: c.container.0,
                });
            }
            if self.model(c.target).is_err() {
                violations.push(Violation::BadTarget {
                    clone_id: c.id,
                    target: c.target.0,
                });
            }
            if !c.inverse_scale.in_open_unit_interval() {
                violations.push(Violation::ScaleOutOfRange {
                    clone_id: c.id,
                    value: c.inverse_scale.to_f64(),
                });
            }
        }

        // partition axiom: at least two clones inside every model
        for model in &self.models {
            let count = self
                .clones
                .iter()
                .filter(|c| c.container == model.id)
                .count();
            if count < 2 {
                violations.push(Violation::ModelTooFewClones {
                    model: model.id.0,
                    count,
                });
            }
        }

        ValidationReport {
            violations,
            clone_counts: self.count_matrix(),
        }
    }

    pub fn require_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidStructure(list.join("; ")))
        }
    }

    /// Word admissibility: every id known, the first id rooted in the
    /// address's model, and `container(next) = target(prev)` down the
    /// word. Unknown ids are an error, a broken chain is `false`.
    pub fn check_address(&self, addr: &CloneAddress) -> Result<bool> {
        self.model(addr.model)?;
        let mut current = addr.model;
        for &id in &addr.word {
            let spec = self.clone_spec(id)?;
            if spec.container != current {
                return Ok(false);
            }
            current = spec.target;
        }
        Ok(true)
    }

    fn require_address(&self, addr: &CloneAddress) -> Result<()> {
        if self.check_address(addr)? {
            Ok(())
        } else {
            Err(Error::InvalidAddress {
                addr: addr.to_string(),
                reason: "container/target chaining broken".into(),
            })
        }
    }

    /// Type of the clone the address points at: the target of its last
    /// step, or the root model for the empty word.
    pub fn address_type(&self, addr: &CloneAddress) -> Result<TypeId> {
        self.require_address(addr)?;
        match addr.word.last() {
            None => Ok(addr.model),
            Some(&id) => Ok(self.clone_spec(id)?.target),
        }
    }

    /// Product of the inverse scale factors along the word.
    pub fn cumulative_inverse_scale(&self, addr: &CloneAddress) -> Result<f64> {
        self.require_address(addr)?;
        let mut acc = 1.0;
        for &id in &addr.word {
            acc *= self.clone_spec(id)?.inverse_scale.to_f64();
        }
        Ok(acc)
    }

    /// Exact cumulative scale; `None` when some factor is a float.
    pub fn cumulative_inverse_scale_exact(
        &self,
        addr: &CloneAddress,
    ) -> Result<Option<BigRational>> {
        self.require_address(addr)?;
        let mut acc = BigRational::from_integer(1.into());
        for &id in &addr.word {
            match self.clone_spec(id)?.inverse_scale.as_rational() {
                Some(r) => acc *= r,
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }

    /// Diameter of the addressed clone: cumulative scale times the
    /// diameter of the model it is a copy of.
    pub fn address_diameter(&self, addr: &CloneAddress) -> Result<f64> {
        let t = self.address_type(addr)?;
        Ok(self.cumulative_inverse_scale(addr)? * self.model(t)?.diameter.to_f64())
    }

    pub fn address_diameter_exact(&self, addr: &CloneAddress) -> Result<Option<BigRational>> {
        let t = self.address_type(addr)?;
        let scale = match self.cumulative_inverse_scale_exact(addr)? {
            Some(s) => s,
            None => return Ok(None),
        };
        Ok(self.model(t)?.diameter.as_rational().map(|d| scale * d))
    }

    /// The clones at relative level 1 inside the addressed clone. These
    /// depend only on the address's type: the local picture repeats.
    pub fn children(&self, addr: &CloneAddress) -> Result<Vec<CloneAddress>> {
        let t = self.address_type(addr)?;
        Ok(self
            .clones_in_model(t)
            .into_iter()
            .map(|id| addr.child(id))
            .collect())
    }

    fn require_disjoint(&self, coll: &[CloneAddress]) -> Result<()> {
        for (i, a) in coll.iter().enumerate() {
            for b in &coll[i + 1..] {
                if a.nested_with(b) {
                    return Err(Error::NestedAddresses {
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Replace every clone in the collection by its relative-level-k
    /// refinement. k = 0 returns the collection unchanged.
    pub fn subdivide(&self, coll: &[CloneAddress], k: usize) -> Result<Vec<CloneAddress>> {
        for addr in coll {
            self.require_address(addr)?;
        }
        self.require_disjoint(coll)?;
        let mut current: Vec<CloneAddress> = coll.to_vec();
        for _ in 0..k {
            let mut next = Vec::with_capacity(current.len() * 2);
            for addr in &current {
                next.extend(self.children(addr)?);
            }
            current = next;
        }
        Ok(current)
    }

    /// d-quantity of a disjoint collection: component i sums `diam^d`
    /// over the collection's type-(i+1) members.
    pub fn d_quantity(&self, coll: &[CloneAddress], d: f64) -> Result<DQuantity> {
        if d.is_nan() || d < 0.0 {
            return Err(Error::BadArgument(format!(
                "exponent {d} must be non-negative"
            )));
        }
        self.require_valid()?;
        let mut components = vec![0.0; self.n_models()];
        for addr in coll {
            let t = self.address_type(addr)?;
            components[t.zero_based()] += self.address_diameter(addr)?.powf(d);
        }
        Ok(DQuantity {
            exponent: d,
            components,
        })
    }

    /// Exact d-quantity: per-type formal sums of `diam^d` terms, valid
    /// for every exponent at once. Requires rational inputs.
    pub fn d_quantity_exact(&self, coll: &[CloneAddress]) -> Result<Vec<PowerSum>> {
        self.require_valid()?;
        let mut components = vec![PowerSum::new(); self.n_models()];
        for addr in coll {
            let t = self.address_type(addr)?;
            let diam = self.address_diameter_exact(addr)?.ok_or_else(|| {
                Error::ExactUnavailable("structure has float scales or diameters".into())
            })?;
            components[t.zero_based()] += PowerSum::power_of(diam)?;
        }
        Ok(components)
    }

    /// Root addresses of every model, handy as the canonical level-0
    /// collection.
    pub fn model_roots(&self) -> Vec<CloneAddress> {
        self.models
            .iter()
            .map(|m| CloneAddress::root(m.id))
            .collect()
    }
}

/// Free-function form of [`CloneStructure::validate`].
pub fn validate_structure(s: &CloneStructure) -> ValidationReport {
    s.validate()
}
