//! Planar realizations of clone structures.
//!
//! Every model gets a bounding disc and every clone a similarity that
//! places the target model's disc inside the container's. Discs are the
//! certificate primitive: containment and disjointness of discs give
//! sound interval bounds for every metric quantity reported here, and
//! level-k sample points (disc centers) approximate the set to within
//! an explicit `error_radius`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{CloneAddress, CloneStructure, TypeId};

/// Deepest sampling level accepted by `sample_points`.
pub const MAX_SAMPLE_LEVEL: usize = 24;
/// Deepest construction level accepted by `render_svg`.
pub const MAX_RENDER_LEVELS: usize = 10;
/// Per-clone statistics are reported down to this level by default;
/// sampling may go deeper for resolution.
pub const DEFAULT_REPORT_LEVEL: usize = 6;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Closed disc; the bounding region of a model or clone image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Orientation-preserving or -reversing similarity of the plane:
/// reflect across the x-axis (optionally), rotate, scale, translate —
/// in that order. Distances multiply by exactly `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarSimilarity {
    /// Contraction factor; must equal the clone's inverse scale. May be
    /// omitted in input files (NaN here) and is then filled in from the
    /// clone record.
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub rotation: f64,
    #[serde(default)]
    pub reflect: bool,
    #[serde(default)]
    pub translation: [f64; 2],
}

fn default_scale() -> f64 {
    f64::NAN
}

impl PlanarSimilarity {
    pub fn identity() -> Self {
        PlanarSimilarity {
            scale: 1.0,
            rotation: 0.0,
            reflect: false,
            translation: [0.0, 0.0],
        }
    }

    pub fn scaling(scale: f64, translation: [f64; 2]) -> Self {
        PlanarSimilarity {
            scale,
            rotation: 0.0,
            reflect: false,
            translation,
        }
    }

    fn linear(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = if self.reflect {
            (p[0], -p[1])
        } else {
            (p[0], p[1])
        };
        let (s, c) = self.rotation.sin_cos();
        [self.scale * (c * x - s * y), self.scale * (s * x + c * y)]
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.linear(p);
        [q[0] + self.translation[0], q[1] + self.translation[1]]
    }

    pub fn apply_disc(&self, d: &Disc) -> Disc {
        Disc {
            center: self.apply(d.center),
            radius: self.scale * d.radius,
        }
    }

    /// `self ∘ inner`: apply `inner` first. Parameters compose in
    /// closed form, so repeated composition stays exact in shape.
    pub fn compose(&self, inner: &PlanarSimilarity) -> PlanarSimilarity {
        let sigma = if self.reflect { -1.0 } else { 1.0 };
        PlanarSimilarity {
            scale: self.scale * inner.scale,
            rotation: self.rotation + sigma * inner.rotation,
            reflect: self.reflect ^ inner.reflect,
            translation: self.apply(inner.translation),
        }
    }

    pub fn inverse(&self) -> PlanarSimilarity {
        let mut inv = PlanarSimilarity {
            scale: 1.0 / self.scale,
            rotation: if self.reflect {
                self.rotation
            } else {
                -self.rotation
            },
            reflect: self.reflect,
            translation: [0.0, 0.0],
        };
        let t = inv.linear(self.translation);
        inv.translation = [-t[0], -t[1]];
        inv
    }

    pub fn is_finite(&self) -> bool {
        self.scale.is_finite()
            && self.rotation.is_finite()
            && self.translation[0].is_finite()
            && self.translation[1].is_finite()
    }
}

/// A clone structure together with a complete planar realization:
/// a region per model, a placement per clone.
#[derive(Debug, Clone)]
pub struct EmbeddedRealization {
    structure: CloneStructure,
    regions: Vec<Disc>,                // by model id - 1
    placements: Vec<PlanarSimilarity>, // by clone id - 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EmbeddingViolation {
    ScaleMismatch {
        clone_id: usize,
        placement_scale: f64,
        inverse_scale: f64,
    },
    NotContained {
        clone_id: usize,
        overflow: f64,
    },
    Overlap {
        clone_a: usize,
        clone_b: usize,
        gap: f64,
    },
    NonFiniteTransform {
        clone_id: usize,
    },
}

impl std::fmt::Display for EmbeddingViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EmbeddingViolation::ScaleMismatch {
                clone_id,
                placement_scale,
                inverse_scale,
            } => {
                write!(f, "clone {clone_id}: placement scale {placement_scale} != inverse scale {inverse_scale}")
            }
            EmbeddingViolation::NotContained { clone_id, overflow } => {
                write!(
                    f,
                    "clone {clone_id}: image disc leaves its container by {overflow}"
                )
            }
            EmbeddingViolation::Overlap {
                clone_a,
                clone_b,
                gap,
            } => {
                write!(
                    f,
                    "clones {clone_a} and {clone_b}: discs not disjoint (gap {gap})"
                )
            }
            EmbeddingViolation::NonFiniteTransform { clone_id } => {
                write!(f, "clone {clone_id}: placement has non-finite entries")
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub violations: Vec<EmbeddingViolation>,
}

impl EmbeddingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample points at a fixed construction level: one disc center per
/// level-k clone, certified to lie within `error_radius` of the set.
#[derive(Debug, Clone, Serialize)]
pub struct SamplePoints {
    pub level: usize,
    pub error_radius: f64,
    pub points: Vec<(CloneAddress, [f64; 2])>,
}

/// Separation statistics for one clone. Intervals are certified from
/// the sampling resolution: the true value lies inside them.
#[derive(Debug, Clone, Serialize)]
pub struct CloneSeparation {
    pub address: CloneAddress,
    pub separation: f64,
    pub separation_interval: (f64, f64),
    pub diameter: f64,
    pub diameter_interval: (f64, f64),
    pub relative: f64,
    pub relative_interval: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub sampling_level: usize,
    pub report_level: usize,
    pub error_radius: f64,
    pub clones: Vec<CloneSeparation>,
    /// Minimum separation over the level-1 clones.
    pub min_separation_alpha: f64,
    pub alpha_interval: (f64, f64),
    pub set_diameter: f64,
    pub set_diameter_interval: (f64, f64),
    /// diam(C) / alpha(C).
    pub beta: f64,
    pub beta_interval: (f64, f64),
    /// Certified lower estimate of the relative-separation constant:
    /// max over reported clones (level >= 1) of the interval endpoint
    /// of max(rel, 1/rel) nearest 1. The true constant is at least
    /// this.
    pub xi_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxCountResult {
    pub estimate: f64,
    pub counts: Vec<(f64, usize)>,
    pub degenerate: bool,
}

impl EmbeddedRealization {
    /// Requires a valid structure carrying a region for every model and
    /// a finite placement for every clone. Placement scales left unset
    /// in the input are filled from the clone's inverse scale.
    pub fn new(structure: CloneStructure) -> Result<Self> {
        structure.require_valid()?;
        let n = structure.n_models();
        let mut regions = vec![None; n];
        for m in &structure.models {
            match m.region {
                Some(r) => regions[m.id.zero_based()] = Some(r),
                None => {
                    return Err(Error::MissingEmbedding(format!(
                        "model {} has no region",
                        m.id
                    )))
                }
            }
        }
        let mut placements = vec![None; structure.n_clones()];
        for c in &structure.clones {
            match c.placement {
                Some(mut p) => {
                    if p.scale.is_nan() {
                        p.scale = c.inverse_scale.to_f64();
                    }
                    placements[c.id - 1] = Some(p);
                }
                None => {
                    return Err(Error::MissingEmbedding(format!(
                        "clone {} has no placement",
                        c.id
                    )))
                }
            }
        }
        Ok(EmbeddedRealization {
            structure,
            regions: regions.into_iter().map(Option::unwrap).collect(),
            placements: placements.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub fn structure(&self) -> &CloneStructure {
        &self.structure
    }

    pub fn region_of(&self, t: TypeId) -> &Disc {
        &self.regions[t.zero_based()]
    }

    pub fn placement_of(&self, clone_id: usize) -> &PlanarSimilarity {
        &self.placements[clone_id - 1]
    }

    /// Composition of the placements along an address word; maps the
    /// region of the address's type model onto the clone's image.
    pub fn composed_placement(&self, addr: &CloneAddress) -> Result<PlanarSimilarity> {
        if !self.structure.check_address(addr)? {
            return Err(Error::InvalidAddress {
                addr: addr.to_string(),
                reason: "container/target chaining broken".into(),
            });
        }
        let mut acc = PlanarSimilarity::identity();
        for &id in &addr.word {
            acc = acc.compose(self.placement_of(id));
        }
        Ok(acc)
    }

    /// Image disc of the addressed clone.
    pub fn image_disc(&self, addr: &CloneAddress) -> Result<Disc> {
        let t = self.structure.address_type(addr)?;
        Ok(self.composed_placement(addr)?.apply_disc(self.region_of(t)))
    }

    /// Apply a global similarity to the whole picture: regions move,
    /// placements conjugate. Relative quantities must not change.
    pub fn conjugate(&self, g: &PlanarSimilarity) -> EmbeddedRealization {
        let g_inv = g.inverse();
        let mut s = self.structure.clone();
        for m in &mut s.models {
            let moved = g.apply_disc(&self.regions[m.id.zero_based()]);
            m.region = Some(moved);
            if let Some(outline) = &mut m.outline {
                for p in outline.iter_mut() {
                    *p = g.apply(*p);
                }
            }
        }
        let placements: Vec<PlanarSimilarity> = self
            .placements
            .iter()
            .map(|p| g.compose(p).compose(&g_inv))
            .collect();
        for c in &mut s.clones {
            c.placement = Some(placements[c.id - 1]);
        }
        EmbeddedRealization {
            structure: s,
            regions: self.regions.iter().map(|r| g.apply_disc(r)).collect(),
            placements,
        }
    }

    pub fn validate(&self) -> EmbeddingReport {
        let mut violations = Vec::new();
        let rel_tol = 1e-12;
        for c in &self.structure.clones {
            let p = self.placement_of(c.id);
            if !p.is_finite() {
                violations.push(EmbeddingViolation::NonFiniteTransform { clone_id: c.id });
                continue;
            }
            let a = c.inverse_scale.to_f64();
            if (p.scale - a).abs() > rel_tol * a.abs().max(1.0) {
                violations.push(EmbeddingViolation::ScaleMismatch {
                    clone_id: c.id,
                    placement_scale: p.scale,
                    inverse_scale: a,
                });
            }
            let image = p.apply_disc(self.region_of(c.target));
            let container = self.region_of(c.container);
            let overflow = dist(image.center, container.center) + image.radius - container.radius;
            if overflow > rel_tol * container.radius {
                violations.push(EmbeddingViolation::NotContained {
                    clone_id: c.id,
                    overflow,
                });
            }
        }
        // disjointness among siblings, per container
        for model in &self.structure.models {
            let ids = self.structure.clones_in_model(model.id);
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    let da = self
                        .placement_of(a)
                        .apply_disc(self.region_of(self.structure.clone_spec(a).unwrap().target));
                    let db = self
                        .placement_of(b)
                        .apply_disc(self.region_of(self.structure.clone_spec(b).unwrap().target));
                    let gap = dist(da.center, db.center) - da.radius - db.radius;
                    if gap <= rel_tol * (da.radius + db.radius) {
                        violations.push(EmbeddingViolation::Overlap {
                            clone_a: a,
                            clone_b: b,
                            gap,
                        });
                    }
                }
            }
        }
        EmbeddingReport { violations }
    }

    fn require_geometrically_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidEmbedding(list.join("; ")))
        }
    }

    /// One representative point per level-k clone: the image of the
    /// type model's disc center under the composed placement.
    pub fn sample_points(&self, level: usize) -> Result<SamplePoints> {
        self.require_geometrically_valid()?;
        if level > MAX_SAMPLE_LEVEL {
            return Err(Error::LevelTooDeep {
                level,
                cap: MAX_SAMPLE_LEVEL,
            });
        }
        let tree = DiscTree::build(self, level)?;
        let mut points = Vec::new();
        tree.collect_leaves(&mut points);
        Ok(SamplePoints {
            level,
            error_radius: tree.error_radius,
            points,
        })
    }

    /// Separation/diameter statistics from level-`level` samples.
    /// Per-clone rows go down to `min(level, DEFAULT_REPORT_LEVEL)`;
    /// use [`Self::separation_report_with`] to choose the depth.
    pub fn separation_report(&self, level: usize) -> Result<SeparationReport> {
        self.separation_report_with(level, level.min(DEFAULT_REPORT_LEVEL))
    }

    pub fn separation_report_with(
        &self,
        sampling_level: usize,
        report_level: usize,
    ) -> Result<SeparationReport> {
        self.require_geometrically_valid()?;
        if sampling_level > MAX_SAMPLE_LEVEL {
            return Err(Error::LevelTooDeep {
                level: sampling_level,
                cap: MAX_SAMPLE_LEVEL,
            });
        }
        // alpha needs the level-1 rows, so reporting never stops at 0
        let report_level = report_level.clamp(1.min(sampling_level), sampling_level);
        let tree = DiscTree::build(self, sampling_level)?;
        let e2 = 2.0 * tree.error_radius;
        let widen = |lo: f64, hi: f64| -> (f64, f64) {
            // outward float slack so derived quotients stay sound
            let pad = 1e-12 * hi.abs().max(1.0);
            (lo - pad, hi + pad)
        };

        let mut rows = Vec::new();
        let mut stack: Vec<(usize, CloneAddress, Vec<usize>)> = Vec::new();
        for (i, &root) in tree.roots.iter().enumerate() {
            let comp: Vec<usize> = tree
                .roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &r)| r)
                .collect();
            stack.push((root, CloneAddress::root(self.structure.models[i].id), comp));
        }
        while let Some((node, addr, comp)) = stack.pop() {
            let diam_pts = tree.max_within(node);
            let sep_pts = if comp.is_empty() {
                f64::INFINITY
            } else {
                let mut best = f64::INFINITY;
                for &c in &comp {
                    tree.min_between(node, c, &mut best);
                }
                best
            };
            let rel = sep_pts / diam_pts;
            let sep_interval = widen(sep_pts - e2, sep_pts);
            let diam_interval = widen(diam_pts - e2, diam_pts + e2);
            let rel_interval = if sep_pts.is_finite() {
                widen(
                    sep_interval.0 / diam_interval.1,
                    sep_interval.1 / diam_interval.0.max(1e-300),
                )
            } else {
                (f64::INFINITY, f64::INFINITY)
            };
            rows.push(CloneSeparation {
                address: addr.clone(),
                separation: sep_pts,
                separation_interval: sep_interval,
                diameter: diam_pts,
                diameter_interval: diam_interval,
                relative: rel,
                relative_interval: rel_interval,
            });
            if addr.level() < report_level {
                let kids = tree.children(node);
                for (k, &child) in kids.iter().enumerate() {
                    let mut child_comp = comp.clone();
                    child_comp.extend(
                        kids.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != k)
                            .map(|(_, &c)| c),
                    );
                    let id = tree.step_id(child);
                    stack.push((child, addr.child(id), child_comp));
                }
            }
        }
        rows.sort_by(|a, b| {
            (a.address.model.0, a.address.level(), a.address.word.clone()).cmp(&(
                b.address.model.0,
                b.address.level(),
                b.address.word.clone(),
            ))
        });

        let alpha = rows
            .iter()
            .filter(|r| r.address.level() == 1)
            .map(|r| r.separation)
            .fold(f64::INFINITY, f64::min);
        let alpha_interval = widen(alpha - e2, alpha);
        let set_diameter = {
            let mut best: f64 = 0.0;
            for (i, &a) in tree.roots.iter().enumerate() {
                for &b in &tree.roots[i..] {
                    best = best.max(tree.max_between(a, b));
                }
            }
            best
        };
        let set_diameter_interval = widen(set_diameter - e2, set_diameter + e2);
        let beta = set_diameter / alpha;
        let beta_interval = widen(
            set_diameter_interval.0 / alpha_interval.1,
            set_diameter_interval.1 / alpha_interval.0.max(1e-300),
        );
        let xi_bound = rows
            .iter()
            .filter(|r| r.address.level() >= 1 && r.relative.is_finite())
            .map(|r| {
                let (lo, hi) = r.relative_interval;
                // certified: however the true rel falls in the interval,
                // max(rel, 1/rel) is at least this
                f64::max(lo, 1.0 / hi).max(1.0)
            })
            .fold(1.0f64, f64::max);

        Ok(SeparationReport {
            sampling_level,
            report_level,
            error_radius: tree.error_radius,
            clones: rows,
            min_separation_alpha: alpha,
            alpha_interval,
            set_diameter,
            set_diameter_interval,
            beta,
            beta_interval,
            xi_bound,
        })
    }

    /// Least-squares box-counting estimate from level-`level` samples.
    /// Scales must decrease strictly and stay above twice the sampling
    /// resolution, else the count at that scale is meaningless.
    pub fn box_counting_dimension(&self, level: usize, scales: &[f64]) -> Result<BoxCountResult> {
        let samples = self.sample_points(level)?;
        if scales.len() < 2 {
            return Err(Error::ScaleGrid("need at least two scales".into()));
        }
        for w in scales.windows(2) {
            if w[1] >= w[0] || w[1].is_nan() {
                return Err(Error::ScaleGrid(
                    "scales must be strictly decreasing".into(),
                ));
            }
        }
        if scales.iter().any(|&s| s.is_nan() || s <= 0.0) {
            return Err(Error::ScaleGrid("scales must be positive".into()));
        }
        let finest = *scales.last().unwrap();
        if finest < 2.0 * samples.error_radius {
            return Err(Error::ScaleGrid(format!(
                "finest scale {finest} is below twice the sampling resolution {}",
                samples.error_radius
            )));
        }

        let mut counts = Vec::with_capacity(scales.len());
        for &s in scales {
            let mut boxes: HashSet<(i64, i64)> = HashSet::new();
            for (_, p) in &samples.points {
                boxes.insert(((p[0] / s).floor() as i64, (p[1] / s).floor() as i64));
            }
            counts.push((s, boxes.len()));
        }

        // slope of log N against log (1/s)
        let xs: Vec<f64> = counts.iter().map(|(s, _)| (1.0 / s).ln()).collect();
        let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
        let n = xs.len() as f64;
        let mean_x = xs.iter().sum::<f64>() / n;
        let mean_y = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum();
        let estimate = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let degenerate = samples.points.len() < 2 || counts.iter().all(|(_, c)| *c == counts[0].1);

        Ok(BoxCountResult {
            estimate,
            counts,
            degenerate,
        })
    }

    /// Nested construction picture: one SVG group per level, model
    /// outlines (or discs) scaled down through every placement chain.
    pub fn render_svg(&self, levels: usize) -> Result<String> {
        self.require_geometrically_valid()?;
        if levels > MAX_RENDER_LEVELS {
            return Err(Error::LevelTooDeep {
                level: levels,
                cap: MAX_RENDER_LEVELS,
            });
        }
        const PALETTE: [&str; 6] = [
            "#1d3557", "#e63946", "#2a9d8f", "#e9c46a", "#7b2cbf", "#4a4e69",
        ];

        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for r in &self.regions {
            min_x = min_x.min(r.center[0] - r.radius);
            max_x = max_x.max(r.center[0] + r.radius);
            // y is flipped on output
            min_y = min_y.min(-r.center[1] - r.radius);
            max_y = max_y.max(-r.center[1] + r.radius);
        }
        let pad = 0.05 * (max_x - min_x).max(max_y - min_y).max(1e-9);
        let (w, h) = (max_x - min_x + 2.0 * pad, max_y - min_y + 2.0 * pad);
        let stroke = 0.004 * w.max(h);

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
            min_x - pad,
            min_y - pad,
            w,
            h
        ));

        let mut current: Vec<(TypeId, PlanarSimilarity)> = self
            .structure
            .models
            .iter()
            .map(|m| (m.id, PlanarSimilarity::identity()))
            .collect();
        for level in 0..=levels {
            let color = PALETTE[level % PALETTE.len()];
            svg.push_str(&format!("  <g id=\"level-{level}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{stroke:.6}\">\n"));
            for (t, transform) in &current {
                let model = self.structure.model(*t).unwrap();
                match &model.outline {
                    Some(points) if points.len() >= 3 => {
                        let mut path = String::new();
                        for (i, p) in points.iter().enumerate() {
                            let q = transform.apply(*p);
                            path.push_str(if i == 0 { "" } else { " " });
                            path.push_str(&format!("{:.6},{:.6}", q[0], -q[1]));
                        }
                        svg.push_str(&format!("    <polygon points=\"{path}\"/>\n"));
                    }
                    _ => {
                        let disc = transform.apply_disc(self.region_of(*t));
                        svg.push_str(&format!(
                            "    <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>\n",
                            disc.center[0], -disc.center[1], disc.radius
                        ));
                    }
                }
            }
            svg.push_str("  </g>\n");
            if level < levels {
                let mut next = Vec::new();
                for (t, transform) in &current {
                    for id in self.structure.clones_in_model(*t) {
                        let spec = self.structure.clone_spec(id).unwrap();
                        next.push((spec.target, transform.compose(self.placement_of(id))));
                    }
                }
                current = next;
            }
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }
}

/// Free-function form of [`EmbeddedRealization::validate`].
pub fn validate_embedding(e: &EmbeddedRealization) -> EmbeddingReport {
    e.validate()
}

/// Hierarchy of image discs down to the sampling level. Leaves carry
/// the sample points (their centers); inner discs bound every sample
/// below them, which is what makes the branch-and-bound passes sound.
struct DiscTree {
    discs: Vec<Disc>,
    children: Vec<(u32, u32)>, // (first, count) into the arena
    step_ids: Vec<usize>,      // clone id that created the node (0 for roots)
    roots: Vec<usize>,
    error_radius: f64,
}

impl DiscTree {
    fn build(e: &EmbeddedRealization, level: usize) -> Result<DiscTree> {
        let s = e.structure();
        let mut tree = DiscTree {
            discs: Vec::new(),
            children: Vec::new(),
            step_ids: Vec::new(),
            roots: Vec::new(),
            error_radius: 0.0,
        };
        // frontier carries (node, type, composed transform)
        let mut frontier: Vec<(usize, TypeId, PlanarSimilarity)> = Vec::new();
        for m in &s.models {
            let idx = tree.push_node(*e.region_of(m.id), 0);
            tree.roots.push(idx);
            frontier.push((idx, m.id, PlanarSimilarity::identity()));
        }
        for _ in 0..level {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (node, t, transform) in frontier {
                let ids = s.clones_in_model(t);
                let first = tree.discs.len() as u32;
                for &id in &ids {
                    let spec = s.clone_spec(id)?;
                    let composed = transform.compose(e.placement_of(id));
                    let disc = composed.apply_disc(e.region_of(spec.target));
                    let idx = tree.push_node(disc, id);
                    next.push((idx, spec.target, composed));
                }
                tree.children[node] = (first, ids.len() as u32);
            }
            frontier = next;
        }
        tree.error_radius = frontier
            .iter()
            .map(|(n, _, _)| tree.discs[*n].radius)
            .fold(0.0, f64::max);
        Ok(tree)
    }

    fn push_node(&mut self, disc: Disc, step_id: usize) -> usize {
        self.discs.push(disc);
        self.children.push((0, 0));
        self.step_ids.push(step_id);
        self.discs.len() - 1
    }

    fn children(&self, node: usize) -> Vec<usize> {
        let (first, count) = self.children[node];
        (first..first + count).map(|i| i as usize).collect()
    }

    fn is_leaf(&self, node: usize) -> bool {
        self.children[node].1 == 0
    }

    fn step_id(&self, node: usize) -> usize {
        self.step_ids[node]
    }

    fn collect_leaves_from(
        &self,
        node: usize,
        addr: &CloneAddress,
        out: &mut Vec<(CloneAddress, [f64; 2])>,
    ) {
        if self.is_leaf(node) {
            out.push((addr.clone(), self.discs[node].center));
            return;
        }
        for c in self.children(node) {
            self.collect_leaves_from(c, &addr.child(self.step_id(c)), out);
        }
    }

    fn collect_leaves(&self, out: &mut Vec<(CloneAddress, [f64; 2])>) {
        for (i, &root) in self.roots.iter().enumerate() {
            let addr = CloneAddress {
                model: TypeId(i + 1),
                word: Vec::new(),
            };
            self.collect_leaves_from(root, &addr, out);
        }
    }

    /// Minimum distance between samples under `a` and samples under
    /// `b`, threaded through `best` for pruning.
    fn min_between(&self, a: usize, b: usize, best: &mut f64) {
        let (da, db) = (self.discs[a], self.discs[b]);
        let lb = dist(da.center, db.center) - da.radius - db.radius;
        if lb >= *best {
            return;
        }
        match (self.is_leaf(a), self.is_leaf(b)) {
            (true, true) => {
                let d = dist(da.center, db.center);
                if d < *best {
                    *best = d;
                }
            }
            (la, lb_leaf) => {
                // expand the node with the larger disc
                let expand_a = !la && (lb_leaf || da.radius >= db.radius);
                let (into, other) = if expand_a { (a, b) } else { (b, a) };
                let mut kids: Vec<(f64, usize)> = self
                    .children(into)
                    .into_iter()
                    .map(|c| {
                        let dc = self.discs[c];
                        let do_ = self.discs[other];
                        (dist(dc.center, do_.center) - dc.radius - do_.radius, c)
                    })
                    .collect();
                kids.sort_by(|x, y| x.0.total_cmp(&y.0));
                for (_, c) in kids {
                    self.min_between(c, other, best);
                }
            }
        }
    }

    /// Maximum distance between samples under `a` and under `b`
    /// (`a == b` gives the diameter of one subtree's samples).
    fn max_pair(&self, a: usize, b: usize, best: &mut f64) {
        let (da, db) = (self.discs[a], self.discs[b]);
        let ub = dist(da.center, db.center) + da.radius + db.radius;
        if ub <= *best {
            return;
        }
        if a == b {
            if self.is_leaf(a) {
                return; // single point
            }
            let kids = self.children(a);
            for (i, &x) in kids.iter().enumerate() {
                for &y in &kids[i..] {
                    self.max_pair(x, y, best);
                }
            }
            return;
        }
        match (self.is_leaf(a), self.is_leaf(b)) {
            (true, true) => {
                let d = dist(da.center, db.center);
                if d > *best {
                    *best = d;
                }
            }
            (la, lb_leaf) => {
                let expand_a = !la && (lb_leaf || da.radius >= db.radius);
                let (into, other) = if expand_a { (a, b) } else { (b, a) };
                let mut kids: Vec<(f64, usize)> = self
                    .children(into)
                    .into_iter()
                    .map(|c| {
                        let dc = self.discs[c];
                        let do_ = self.discs[other];
                        (dist(dc.center, do_.center) + dc.radius + do_.radius, c)
                    })
                    .collect();
                kids.sort_by(|x, y| y.0.total_cmp(&x.0));
                for (_, c) in kids {
                    self.max_pair(c, other, best);
                }
            }
        }
    }

    fn max_within(&self, node: usize) -> f64 {
        let mut best = 0.0;
        self.max_pair(node, node, &mut best);
        best
    }

    fn max_between(&self, a: usize, b: usize) -> f64 {
        let mut best = 0.0;
        self.max_pair(a, b, &mut best);
        best
    }
}
