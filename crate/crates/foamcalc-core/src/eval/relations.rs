//! The local-relation suite: every skein identity the evaluation
//! satisfies, each verified on a family of closed instantiations built
//! from catalog hosts and generator closures.

use super::surgery::{cancel_vertex_pair, neck_cut, remove_handle};
use super::{eval_closed, eval_closed_decorated, EvalError};
use crate::prefoam::{catalog, Facet, Letter, Perm3, PreFoam, Seam};
use crate::ring::{Alphabet, Poly, RDElem};
use std::fmt;

fn err(msg: impl Into<String>) -> EvalError {
    EvalError::Surgery(msg.into())
}

fn e_var(i: usize) -> Poly {
    Poly::var(Alphabet::E, i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationName {
    NeckCutting,
    Digon,
    Square,
    TrivalentBubble,
    VerticesRemoval,
    Ihi,
    UnzipZip,
    HandleRemoval,
    HandleRemovalCapped,
    BubbleRemoval,
    DotMigration,
    ThreeDots,
    SimplifyTriangleSquare,
    TriangleMigration,
    DoubleSaddle,
}

impl RelationName {
    pub const ALL: [RelationName; 15] = [
        RelationName::NeckCutting,
        RelationName::Digon,
        RelationName::Square,
        RelationName::TrivalentBubble,
        RelationName::VerticesRemoval,
        RelationName::Ihi,
        RelationName::UnzipZip,
        RelationName::HandleRemoval,
        RelationName::HandleRemovalCapped,
        RelationName::BubbleRemoval,
        RelationName::DotMigration,
        RelationName::ThreeDots,
        RelationName::SimplifyTriangleSquare,
        RelationName::TriangleMigration,
        RelationName::DoubleSaddle,
    ];

    pub fn parse(s: &str) -> Option<RelationName> {
        Some(match s {
            "neck-cutting" => RelationName::NeckCutting,
            "digon" => RelationName::Digon,
            "square" => RelationName::Square,
            "trivalent-bubble" => RelationName::TrivalentBubble,
            "vertices-removal" => RelationName::VerticesRemoval,
            "ihi" => RelationName::Ihi,
            "zip-unzip" => RelationName::UnzipZip,
            "handle-removal" => RelationName::HandleRemoval,
            "handle-removal-capped" => RelationName::HandleRemovalCapped,
            "bubble-removal" => RelationName::BubbleRemoval,
            "dot-migration" => RelationName::DotMigration,
            "three-dots" => RelationName::ThreeDots,
            "simplify-triangle-square" => RelationName::SimplifyTriangleSquare,
            "triangle-migration" => RelationName::TriangleMigration,
            "double-saddle" => RelationName::DoubleSaddle,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RelationName::NeckCutting => "neck-cutting",
            RelationName::Digon => "digon",
            RelationName::Square => "square",
            RelationName::TrivalentBubble => "trivalent-bubble",
            RelationName::VerticesRemoval => "vertices-removal",
            RelationName::Ihi => "ihi",
            RelationName::UnzipZip => "zip-unzip",
            RelationName::HandleRemoval => "handle-removal",
            RelationName::HandleRemovalCapped => "handle-removal-capped",
            RelationName::BubbleRemoval => "bubble-removal",
            RelationName::DotMigration => "dot-migration",
            RelationName::ThreeDots => "three-dots",
            RelationName::SimplifyTriangleSquare => "simplify-triangle-square",
            RelationName::TriangleMigration => "triangle-migration",
            RelationName::DoubleSaddle => "double-saddle",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelationReport {
    pub relation: RelationName,
    pub instances: usize,
}

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} instances verified", self.relation.name(), self.instances)
    }
}

/// An ambient facet carrying a capped handle: the connecting circle is a
/// seam bounding the ambient piece, the punctured torus, and the cap.
fn capped_handle_host(ambient_genus: u32, ambient_dots: u32) -> PreFoam {
    let mut f = PreFoam::empty();
    f.seams.insert(0, Seam::Circle { monodromy: Perm3::IDENTITY });
    f.facets.insert(
        0,
        Facet {
            orientable: true,
            genus_or_crosscaps: ambient_genus,
            boundary: vec![vec![Letter::new(0, 0, 1)]],
            dots: ambient_dots,
            triangles: 0,
            squares: 0,
        },
    );
    f.facets.insert(
        1,
        Facet {
            orientable: true,
            genus_or_crosscaps: 1,
            boundary: vec![vec![Letter::new(0, 1, 1)]],
            dots: 0,
            triangles: 0,
            squares: 0,
        },
    );
    f.facets.insert(2, Facet::disk(vec![Letter::new(0, 2, 1)]));
    f
}

fn expect_equal(lhs: &Poly, rhs: &Poly, what: &str) -> Result<(), EvalError> {
    if lhs != rhs {
        return Err(err(format!("{}: {} != {}", what, lhs, rhs)));
    }
    Ok(())
}

fn expect_equal_rd(lhs: &RDElem, rhs: &RDElem, what: &str) -> Result<(), EvalError> {
    if lhs != rhs {
        return Err(err(format!("{}: {} != {}", what, lhs, rhs)));
    }
    Ok(())
}

/// Verify one named relation across its closed instantiations; returns
/// the number of instances checked.
pub fn check_local_relation(name: RelationName) -> Result<RelationReport, EvalError> {
    let instances = match name {
        RelationName::NeckCutting => {
            let mut n = 0;
            for (a, b, c) in triples(3) {
                let host = catalog::theta(a, b, c);
                let lhs = eval_closed(&host)?;
                for facet in 0..3u32 {
                    let cut = neck_cut(&host, facet, 0)?;
                    expect_equal(&cut.eval()?, &lhs, "neck-cutting on a theta facet")?;
                    n += 1;
                }
            }
            // Annular hosts: cut an annulus facet of a graph times circle.
            for twist in [false, true] {
                let host = catalog::annular_theta_graph(twist);
                let lhs = eval_closed(&host)?;
                for facet in 0..3u32 {
                    for word in 0..2usize {
                        let cut = neck_cut(&host, facet, word)?;
                        expect_equal(&cut.eval()?, &lhs, "neck-cutting on an annulus")?;
                        n += 1;
                    }
                }
            }
            n
        }
        RelationName::HandleRemoval => {
            let mut n = 0;
            for genus in 1..=4u32 {
                for dots in 0..=4u32 {
                    let host = catalog::closed_surface(genus, dots);
                    let sum = remove_handle(&host, 0)?;
                    expect_equal(&sum.eval()?, &eval_closed(&host)?, "handle removal")?;
                    n += 1;
                }
            }
            // A handle on a theta facet.
            for dots in [(2, 1, 0), (4, 2, 0)] {
                let mut host = catalog::theta(dots.0, dots.1, dots.2);
                host.facets.get_mut(&0).unwrap().genus_or_crosscaps = 1;
                let sum = remove_handle(&host, 0)?;
                expect_equal(&sum.eval()?, &eval_closed(&host)?, "handle on a theta facet")?;
                n += 1;
            }
            n
        }
        RelationName::HandleRemovalCapped => {
            // A capped handle trades for one dot plus E1 on the carrying
            // facet, which is then a plain closed surface.
            let mut n = 0;
            for genus in 0..=1u32 {
                for dots in 0..=9u32 {
                    let host = capped_handle_host(genus, dots);
                    let lhs = eval_closed(&host)?;
                    let rhs = eval_closed(&catalog::closed_surface(genus, dots + 1))?
                        .add(&e_var(0).mul(&eval_closed(&catalog::closed_surface(genus, dots))?));
                    expect_equal(&lhs, &rhs, "capped handle removal")?;
                    n += 1;
                }
            }
            n
        }
        RelationName::BubbleRemoval => {
            // The bubble over a circle on a facet is a theta component.
            let mut n = 0;
            for c in 0..=5u32 {
                let theta = |x: u32, y: u32| catalog::theta(x, y, c);
                let sphere = |d: u32| catalog::sphere(c + d);
                for k in 0..=2u32 {
                    expect_equal(
                        &eval_closed(&theta(k, k))?,
                        &Poly::zero(Alphabet::E),
                        "equal-dotted bubble vanishes",
                    )?;
                    n += 1;
                }
                expect_equal(&eval_closed(&theta(0, 1))?, &eval_closed(&sphere(0))?, "F01")?;
                let f02 = eval_closed(&sphere(1))?.add(&e_var(0).mul(&eval_closed(&sphere(0))?));
                expect_equal(&eval_closed(&theta(0, 2))?, &f02, "F02")?;
                let f12 = eval_closed(&sphere(2))?
                    .add(&e_var(0).mul(&eval_closed(&sphere(1))?))
                    .add(&e_var(1).mul(&eval_closed(&sphere(0))?));
                expect_equal(&eval_closed(&theta(1, 2))?, &f12, "F12")?;
                n += 3;
            }
            n
        }
        RelationName::DotMigration => {
            let mut n = 0;
            for (a, b, c) in triples(3) {
                let base = eval_closed(&catalog::theta(a, b, c))?;
                let m1 = eval_closed(&catalog::theta(a + 1, b, c))?
                    .add(&eval_closed(&catalog::theta(a, b + 1, c))?)
                    .add(&eval_closed(&catalog::theta(a, b, c + 1))?);
                expect_equal(&m1, &e_var(0).mul(&base), "single dot migration")?;
                let m2 = eval_closed(&catalog::theta(a + 2, b, c))?
                    .add(&eval_closed(&catalog::theta(a, b + 2, c))?)
                    .add(&eval_closed(&catalog::theta(a, b, c + 2))?);
                expect_equal(&m2, &e_var(0).pow(2).mul(&base), "double dot migration")?;
                let m3 = eval_closed(&catalog::theta(a + 1, b + 1, c))?
                    .add(&eval_closed(&catalog::theta(a + 1, b, c + 1))?)
                    .add(&eval_closed(&catalog::theta(a, b + 1, c + 1))?);
                expect_equal(&m3, &e_var(1).mul(&base), "paired dot migration")?;
                let m4 = eval_closed(&catalog::theta(a + 1, b + 1, c + 1))?;
                expect_equal(&m4, &e_var(2).mul(&base), "triple dot migration")?;
                n += 4;
            }
            n
        }
        RelationName::ThreeDots => {
            let mut n = 0;
            for base in 0..=9u32 {
                let lhs = eval_closed(&catalog::sphere(base + 3))?;
                let rhs = e_var(0)
                    .mul(&eval_closed(&catalog::sphere(base + 2))?)
                    .add(&e_var(1).mul(&eval_closed(&catalog::sphere(base + 1))?))
                    .add(&e_var(2).mul(&eval_closed(&catalog::sphere(base))?));
                expect_equal(&lhs, &rhs, "three dots on a sphere")?;
                n += 1;
            }
            for (a, b, c) in triples(2) {
                let lhs = eval_closed(&catalog::theta(a + 3, b, c))?;
                let rhs = e_var(0)
                    .mul(&eval_closed(&catalog::theta(a + 2, b, c))?)
                    .add(&e_var(1).mul(&eval_closed(&catalog::theta(a + 1, b, c))?))
                    .add(&e_var(2).mul(&eval_closed(&catalog::theta(a, b, c))?));
                expect_equal(&lhs, &rhs, "three dots on a theta facet")?;
                n += 1;
            }
            n
        }
        RelationName::SimplifyTriangleSquare => {
            let mut n = 0;
            let dinv = RDElem::d_inverse();
            for base in 0..=4u32 {
                // Triangle = D^-1 (two dots + E2).
                let mut tri = catalog::sphere(base);
                tri.facets.get_mut(&0).unwrap().triangles = 1;
                let lhs = eval_closed_decorated(&tri)?;
                let rhs = dinv.mul(
                    &RDElem::from_poly(eval_closed(&catalog::sphere(base + 2))?).add(
                        &RDElem::from_poly(e_var(1).mul(&eval_closed(&catalog::sphere(base))?)),
                    ),
                );
                expect_equal_rd(&lhs, &rhs, "triangle simplification")?;
                // Square = D^-1 (dot + E1).
                let mut sq = catalog::sphere(base);
                sq.facets.get_mut(&0).unwrap().squares = 1;
                let lhs2 = eval_closed_decorated(&sq)?;
                let rhs2 = dinv.mul(
                    &RDElem::from_poly(eval_closed(&catalog::sphere(base + 1))?).add(
                        &RDElem::from_poly(e_var(0).mul(&eval_closed(&catalog::sphere(base))?)),
                    ),
                );
                expect_equal_rd(&lhs2, &rhs2, "square simplification")?;
                // Triangle and square together = D^-1.
                let mut both = catalog::sphere(base);
                both.facets.get_mut(&0).unwrap().triangles = 1;
                both.facets.get_mut(&0).unwrap().squares = 1;
                let lhs3 = eval_closed_decorated(&both)?;
                let rhs3 =
                    dinv.mul(&RDElem::from_poly(eval_closed(&catalog::sphere(base))?));
                expect_equal_rd(&lhs3, &rhs3, "triangle-square simplification")?;
                n += 3;
            }
            for (a, b, c) in triples(2).into_iter().take(8) {
                let mut tri = catalog::theta(a, b, c);
                tri.facets.get_mut(&0).unwrap().triangles = 1;
                let lhs = eval_closed_decorated(&tri)?;
                let rhs = dinv.mul(
                    &RDElem::from_poly(eval_closed(&catalog::theta(a + 2, b, c))?).add(
                        &RDElem::from_poly(
                            e_var(1).mul(&eval_closed(&catalog::theta(a, b, c))?),
                        ),
                    ),
                );
                expect_equal_rd(&lhs, &rhs, "triangle simplification on a theta")?;
                n += 1;
            }
            n
        }
        RelationName::TriangleMigration => {
            // Dot against triangle across a seam: the two placements sum
            // to the undecorated host.
            let mut n = 0;
            for (a, b, c) in triples(3) {
                let mut h1 = catalog::theta(a + 1, b, c);
                h1.facets.get_mut(&2).unwrap().triangles = 1;
                let mut h2 = catalog::theta(a, b + 1, c);
                h2.facets.get_mut(&2).unwrap().triangles = 1;
                let lhs = eval_closed_decorated(&h1)?.add(&eval_closed_decorated(&h2)?);
                let rhs = RDElem::from_poly(eval_closed(&catalog::theta(a, b, c))?);
                expect_equal_rd(&lhs, &rhs, "triangle migration")?;
                n += 1;
            }
            n
        }
        RelationName::VerticesRemoval => {
            // Cancelling a matching pair preserves closed evaluations.
            let mut n = 0;
            let km = catalog::km_counterexample();
            let before = eval_closed(&km)?;
            for e in 0..8u32 {
                let after = cancel_vertex_pair(&km, e)?;
                expect_equal(&eval_closed(&after)?, &before, "vertex cancellation")?;
                n += 1;
            }
            for seed in 0..16u64 {
                let foam = crate::foamspace::vertexed_random_foam(seed)?;
                let before = eval_closed(&foam)?;
                for m in crate::jflat::perfect_matchings(&foam).into_iter().take(2) {
                    let mut f = foam.clone();
                    for &edge in &m {
                        f = cancel_vertex_pair(&f, edge)?;
                    }
                    expect_equal(&eval_closed(&f)?, &before, "matching cancellation")?;
                    n += 1;
                }
            }
            n
        }
        RelationName::Digon
        | RelationName::Square
        | RelationName::TrivalentBubble
        | RelationName::Ihi
        | RelationName::UnzipZip
        | RelationName::DoubleSaddle => {
            crate::foamspace::movie_relation_instances(name)?
        }
    };
    Ok(RelationReport { relation: name, instances })
}

/// Run the whole suite.
pub fn check_all_relations() -> Result<Vec<RelationReport>, EvalError> {
    RelationName::ALL.iter().map(|&r| check_local_relation(r)).collect()
}

fn triples(max: u32) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for a in 0..=max {
        for b in 0..=a {
            for c in 0..=b {
                out.push((a, b, c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_host_relations() {
        for name in [
            RelationName::NeckCutting,
            RelationName::HandleRemoval,
            RelationName::HandleRemovalCapped,
            RelationName::BubbleRemoval,
            RelationName::DotMigration,
            RelationName::ThreeDots,
            RelationName::SimplifyTriangleSquare,
            RelationName::TriangleMigration,
        ] {
            let report = check_local_relation(name).unwrap();
            assert!(report.instances >= 20, "{}: {}", name.name(), report.instances);
        }
    }

    #[test]
    fn discriminant_identity() {
        // (E1 + Xi)(E2 + Xi^2) expands to the discriminant for each i.
        let d = crate::ring::discriminant_e().elementary_to_x();
        for i in 0..3 {
            let xi = Poly::var(Alphabet::X, i);
            let lhs = crate::ring::elementary(1)
                .add(&xi)
                .mul(&crate::ring::elementary(2).add(&xi.mul(&xi)));
            assert_eq!(lhs, d);
        }
    }
}
