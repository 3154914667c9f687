//! Bundled example structures. These mirror the JSON files under
//! `configs/` at the repository root; a test keeps the two in sync.

use crate::geometry::{Disc, PlanarSimilarity};
use crate::numeric::Scalar;
use crate::structure::{CloneMapSpec, CloneStructure, Model, TypeId};

fn model(id: usize, diameter: Scalar, label: &str) -> Model {
    Model {
        id: TypeId(id),
        diameter,
        label: Some(label.to_string()),
        region: None,
        outline: None,
    }
}

fn clone_spec(id: usize, container: usize, target: usize, num: i64, den: i64) -> CloneMapSpec {
    CloneMapSpec {
        id,
        container: TypeId(container),
        target: TypeId(target),
        inverse_scale: Scalar::ratio(num, den).unwrap(),
        placement: None,
    }
}

fn place(scale: f64, rotation: f64, reflect: bool, tx: f64, ty: f64) -> Option<PlanarSimilarity> {
    Some(PlanarSimilarity {
        scale,
        rotation,
        reflect,
        translation: [tx, ty],
    })
}

/// One model on the unit interval, two copies scaled by 1/3. The
/// classical deleted-middle-third set, embedded on the x-axis.
pub fn middle_third() -> CloneStructure {
    let mut m = model(1, Scalar::one(), "unit interval");
    m.region = Some(Disc {
        center: [0.5, 0.0],
        radius: 0.5,
    });
    let mut c1 = clone_spec(1, 1, 1, 1, 3);
    c1.placement = place(1.0 / 3.0, 0.0, false, 0.0, 0.0);
    let mut c2 = clone_spec(2, 1, 1, 1, 3);
    c2.placement = place(1.0 / 3.0, 0.0, false, 2.0 / 3.0, 0.0);
    CloneStructure {
        models: vec![m],
        clones: vec![c1, c2],
    }
}

/// Two models, five clones, scales 1/3..1/7; the matrix is
/// [[(1/3)^d, (1/5)^d], [(1/4)^d, (1/6)^d + (1/7)^d]]. Carries a planar
/// realization on two unit-diameter discs.
pub fn two_model() -> CloneStructure {
    let mut m1 = model(1, Scalar::one(), "left disc");
    m1.region = Some(Disc {
        center: [0.0, 0.0],
        radius: 0.5,
    });
    let mut m2 = model(2, Scalar::one(), "right disc");
    m2.region = Some(Disc {
        center: [2.0, 0.0],
        radius: 0.5,
    });

    let mut c1 = clone_spec(1, 1, 1, 1, 3);
    c1.placement = place(1.0 / 3.0, 0.0, false, -0.25, 0.0);
    let mut c2 = clone_spec(2, 1, 2, 1, 4);
    // quarter turn; translation chosen so the image lands at (0.3, 0)
    c2.placement = place(0.25, std::f64::consts::FRAC_PI_2, false, 0.3, -0.5);
    let mut c3 = clone_spec(3, 2, 1, 1, 5);
    c3.placement = place(0.2, 0.0, false, 1.65, 0.0);
    let mut c4 = clone_spec(4, 2, 2, 1, 6);
    c4.placement = place(1.0 / 6.0, 0.0, false, 2.3 - 2.0 / 6.0, 0.15);
    let mut c5 = clone_spec(5, 2, 2, 1, 7);
    c5.placement = place(
        1.0 / 7.0,
        std::f64::consts::PI,
        false,
        1.95 + 2.0 / 7.0,
        -0.3,
    );

    CloneStructure {
        models: vec![m1, m2],
        clones: vec![c1, c2, c3, c4, c5],
    }
}

/// Two models, one clone of each type per model, every scale 1/4. Its
/// matrix is rank one; the dimension is exactly 1/2.
pub fn symmetric_pair() -> CloneStructure {
    CloneStructure {
        models: vec![
            model(1, Scalar::one(), "first"),
            model(2, Scalar::one(), "second"),
        ],
        clones: vec![
            clone_spec(1, 1, 1, 1, 4),
            clone_spec(2, 1, 2, 1, 4),
            clone_spec(3, 2, 1, 1, 4),
            clone_spec(4, 2, 2, 1, 4),
        ],
    }
}

/// Two models, each containing one clone of each type: every entry of
/// the counting matrix is positive already at the first power.
pub fn irreducible() -> CloneStructure {
    CloneStructure {
        models: vec![
            model(1, Scalar::one(), "first"),
            model(2, Scalar::one(), "second"),
        ],
        clones: vec![
            clone_spec(1, 1, 1, 1, 4),
            clone_spec(2, 1, 2, 1, 5),
            clone_spec(3, 2, 1, 1, 6),
            clone_spec(4, 2, 2, 1, 3),
        ],
    }
}

/// Three models where type-3 clones appear only inside model 3: the
/// counting matrix keeps zeros at rows 3, columns 1 and 2, in every
/// power.
pub fn reducible() -> CloneStructure {
    CloneStructure {
        models: vec![
            model(1, Scalar::one(), "first"),
            model(2, Scalar::one(), "second"),
            model(3, Scalar::one(), "third"),
        ],
        clones: vec![
            clone_spec(1, 1, 1, 1, 3),
            clone_spec(2, 1, 2, 1, 4),
            clone_spec(3, 2, 1, 1, 5),
            clone_spec(4, 2, 2, 1, 6),
            clone_spec(5, 3, 1, 1, 7),
            clone_spec(6, 3, 2, 1, 8),
            clone_spec(7, 3, 3, 1, 9),
            clone_spec(8, 3, 3, 1, 10),
        ],
    }
}

/// Three planar models (square, disc, rectangle outlines) with six
/// clones cycling between the types; includes a rotation, a half-turn
/// and a reflection.
pub fn planar_three_model() -> CloneStructure {
    let mut m1 = model(1, Scalar::integer(2), "square");
    m1.region = Some(Disc {
        center: [0.0, 0.0],
        radius: 1.0,
    });
    m1.outline = Some(vec![[-0.7, -0.7], [0.7, -0.7], [0.7, 0.7], [-0.7, 0.7]]);
    let mut m2 = model(2, Scalar::integer(2), "disc");
    m2.region = Some(Disc {
        center: [3.0, 0.0],
        radius: 1.0,
    });
    let mut m3 = model(3, Scalar::integer(2), "rectangle");
    m3.region = Some(Disc {
        center: [6.0, 0.0],
        radius: 1.0,
    });
    m3.outline = Some(vec![[5.1, -0.4], [6.9, -0.4], [6.9, 0.4], [5.1, 0.4]]);

    let mut c1 = clone_spec(1, 1, 2, 1, 3);
    c1.placement = place(1.0 / 3.0, 0.0, false, -0.5 - 1.0, 0.0);
    let mut c2 = clone_spec(2, 1, 3, 1, 4);
    c2.placement = place(0.25, std::f64::consts::FRAC_PI_2, false, 0.55, -1.5);
    let mut c3 = clone_spec(3, 2, 1, 1, 3);
    c3.placement = place(1.0 / 3.0, 0.0, false, 2.5, 0.25);
    let mut c4 = clone_spec(4, 2, 3, 1, 5);
    c4.placement = place(0.2, 0.0, true, 2.35, -0.35);
    let mut c5 = clone_spec(5, 3, 1, 1, 4);
    c5.placement = place(0.25, 0.0, false, 5.4, 0.35);
    let mut c6 = clone_spec(6, 3, 2, 1, 3);
    c6.placement = place(1.0 / 3.0, std::f64::consts::PI, false, 6.55 + 1.0, -0.3);

    CloneStructure {
        models: vec![m1, m2, m3],
        clones: vec![c1, c2, c3, c4, c5, c6],
    }
}

/// Single model, two clones scaled by 1/5: dimension ln 2 / ln 5.
pub fn fifths() -> CloneStructure {
    CloneStructure {
        models: vec![model(1, Scalar::one(), "unit interval")],
        clones: vec![clone_spec(1, 1, 1, 1, 5), clone_spec(2, 1, 1, 1, 5)],
    }
}

/// Single model, four clones scaled by 1/4: dimension exactly 1.
pub fn quarters() -> CloneStructure {
    CloneStructure {
        models: vec![model(1, Scalar::one(), "unit interval")],
        clones: (1..=4).map(|i| clone_spec(i, 1, 1, 1, 4)).collect(),
    }
}

/// Single model with a prescribed multiset of rational scales; handy
/// for scalar cross-checks.
pub fn single_model(scales: &[(i64, i64)]) -> CloneStructure {
    CloneStructure {
        models: vec![model(1, Scalar::one(), "unit interval")],
        clones: scales
            .iter()
            .enumerate()
            .map(|(i, &(n, d))| clone_spec(i + 1, 1, 1, n, d))
            .collect(),
    }
}

/// Every bundled structure, labelled. The reducible one has no
/// dimension; callers filter as needed.
pub fn all_bundled() -> Vec<(&'static str, CloneStructure)> {
    vec![
        ("middle_third", middle_third()),
        ("two_model", two_model()),
        ("symmetric_pair", symmetric_pair()),
        ("irreducible", irreducible()),
        ("reducible", reducible()),
        ("planar_three_model", planar_three_model()),
        ("fifths", fifths()),
        ("quarters", quarters()),
    ]
}
