//! The combinatorial flat evaluation: choose a perfect matching of the
//! seam graph, cancel the vertex pairs, kill nontrivial monodromy, split
//! the remaining seam circles, and evaluate the resulting theta pieces and
//! closed surfaces over the two-element field.
//!
//! On pre-foams embedded in 3-space the outcome is independent of the
//! matching and equals the closed evaluation reduced mod the augmentation;
//! the four-vertex Klein-bottle example shows both values 0 and 1 arise
//! for a non-embeddable pre-foam.

use crate::eval::surgery::{cancel_vertex_pair, split_seam_circle, SplitResult};
use crate::eval::{eval_closed, EvalError, FormalSum};
use crate::prefoam::{PreFoam, Seam, SeamId, VertexId};
use crate::ring::{apply_to_poly, Alphabet, BaseChange, BcElem, Poly};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Matching = BTreeSet<SeamId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JflatOutcome {
    WellDefined(bool),
    /// At least two distinct values, with one witness trace per value.
    Ambiguous {
        values: BTreeSet<bool>,
        witnesses: Vec<(Matching, bool, Trace)>,
    },
}

impl fmt::Display for JflatOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JflatOutcome::WellDefined(v) => write!(f, "WELL-DEFINED {}", *v as u8),
            JflatOutcome::Ambiguous { values, .. } => {
                let vs: Vec<String> = values.iter().map(|v| (*v as u8).to_string()).collect();
                write!(f, "AMBIGUOUS {{{}}}", vs.join(","))
            }
        }
    }
}

/// Ordered record of the surgeries performed in one run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub steps: Vec<String>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "  {}", s)?;
        }
        Ok(())
    }
}

/// All perfect matchings of the seam graph, in lexicographic order.
/// Circles are ignored; self-loop edges never match.
pub fn perfect_matchings(foam: &PreFoam) -> Vec<Matching> {
    let vertices: Vec<VertexId> = foam.vertices.iter().copied().collect();
    if vertices.is_empty() {
        return vec![Matching::new()];
    }
    let mut incident: BTreeMap<VertexId, Vec<(SeamId, VertexId)>> = BTreeMap::new();
    for (&sid, seam) in &foam.seams {
        if let Seam::Edge { ends } = seam {
            if ends.0 != ends.1 {
                incident.entry(ends.0).or_default().push((sid, ends.1));
                incident.entry(ends.1).or_default().push((sid, ends.0));
            }
        }
    }
    let mut out = Vec::new();
    let mut covered: BTreeSet<VertexId> = BTreeSet::new();
    let mut current = Matching::new();
    fn rec(
        vertices: &[VertexId],
        incident: &BTreeMap<VertexId, Vec<(SeamId, VertexId)>>,
        covered: &mut BTreeSet<VertexId>,
        current: &mut Matching,
        out: &mut Vec<Matching>,
    ) {
        let v = match vertices.iter().find(|v| !covered.contains(v)) {
            None => {
                out.push(current.clone());
                return;
            }
            Some(&v) => v,
        };
        let Some(edges) = incident.get(&v) else { return };
        for &(sid, other) in edges {
            if covered.contains(&other) || current.contains(&sid) {
                continue;
            }
            covered.insert(v);
            covered.insert(other);
            current.insert(sid);
            rec(vertices, incident, covered, current, out);
            covered.remove(&v);
            covered.remove(&other);
            current.remove(&sid);
        }
    }
    rec(&vertices, &incident, &mut covered, &mut current, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Whether a seam circle already bounds three disks (a theta component);
/// splitting such circles is bypassed.
fn is_theta_component(foam: &PreFoam, seam: SeamId) -> bool {
    let mut branch_facets = BTreeSet::new();
    for (&fid, facet) in &foam.facets {
        for w in &facet.boundary {
            if w.iter().any(|l| l.seam == seam) {
                branch_facets.insert(fid);
            }
        }
    }
    branch_facets.len() == 3
        && branch_facets.iter().all(|f| {
            let fc = &foam.facets[f];
            fc.euler() == 1 && fc.boundary.len() == 1 && fc.boundary[0].len() == 1
        })
}

/// Base-case value of a connected pre-foam without seams or vertices.
fn surface_value(foam: &PreFoam) -> bool {
    debug_assert_eq!(foam.facets.len(), 1);
    let f = foam.facets.values().next().unwrap();
    if !f.orientable {
        return false;
    }
    match (f.genus_or_crosscaps, f.dots) {
        (0, 2) => true, // two-dotted sphere
        (1, 0) => true, // dotless torus
        _ => false,
    }
}

/// Base-case value of a theta component.
fn theta_value(foam: &PreFoam) -> bool {
    let mut dots: Vec<u32> = foam.facets.values().map(|f| f.dots).collect();
    dots.sort_unstable_by(|a, b| b.cmp(a));
    dots == [2, 1, 0] && foam.facets.values().all(|f| f.orientable)
}

/// Peel off and evaluate the elementary components (theta pieces, closed
/// surfaces) of a term. Returns `None` when an elementary factor is zero;
/// otherwise the product of the remaining non-elementary components.
fn strip_elementary(term: &PreFoam) -> Option<PreFoam> {
    let mut rest = PreFoam::empty();
    rest.embedded = term.embedded;
    for comp in term.components() {
        if comp.seams.is_empty() {
            if !surface_value(&comp) {
                return None;
            }
        } else if comp.seams.len() == 1
            && is_theta_component(&comp, *comp.seams.keys().next().unwrap())
        {
            if !theta_value(&comp) {
                return None;
            }
        } else {
            rest = rest.disjoint_union(&comp);
        }
    }
    Some(rest)
}

/// Run the algorithm for one choice of perfect matching.
pub fn jflat_run(foam: &PreFoam, matching: &Matching) -> Result<(bool, Trace), EvalError> {
    let mut trace = Trace::default();
    let mut f = foam.clone();
    for &e in matching {
        trace.steps.push(format!("cancel vertex pair along seam {}", e));
        f = cancel_vertex_pair(&f, e)?;
    }
    if !f.vertices.is_empty() {
        return Err(EvalError::Surgery(format!(
            "matching left {} vertices uncancelled",
            f.vertices.len()
        )));
    }
    // Step 2: nontrivial monodromy along any circle kills the value.
    for (sid, seam) in &f.seams {
        if let Seam::Circle { monodromy } = seam {
            if !monodromy.is_identity() {
                trace
                    .steps
                    .push(format!("seam {} has monodromy {}; value 0", sid, monodromy.name()));
                return Ok((false, trace));
            }
        }
    }
    // Step 3: split every seam circle, in id order, with ground-field
    // coefficients. Elementary components (theta pieces, closed surfaces)
    // are evaluated and peeled off eagerly, which keeps term counts small
    // and bypasses cutting circles that already bound three disks.
    let mut terms = FormalSum::new();
    match strip_elementary(&f) {
        Some(rest) => terms.push(Poly::one(Alphabet::E), rest),
        None => {
            trace.steps.push("elementary factor vanishes; total 0".into());
            return Ok((false, trace));
        }
    }
    loop {
        // The smallest seam circle still present in any term.
        let sid = match terms.terms.iter().flat_map(|(_, t)| t.seams.keys()).min() {
            Some(&s) => s,
            None => break,
        };
        let mut next = FormalSum::new();
        for (coeff, term) in &terms.terms {
            if !term.seams.contains_key(&sid) {
                next.push(coeff.clone(), term.clone());
                continue;
            }
            match split_seam_circle(term, sid, true)? {
                SplitResult::Zero => {}
                SplitResult::Sum(sum) => {
                    for (c2, t2) in sum.terms {
                        if let Some(rest) = strip_elementary(&t2) {
                            next.push(coeff.mul(&c2), rest);
                        }
                    }
                }
            }
        }
        trace.steps.push(format!(
            "split seam circle {}; {} terms survive",
            sid,
            next.len()
        ));
        terms = next;
    }
    // Step 4: the surviving terms are empty pre-foams, each contributing 1.
    let mut total = false;
    for (coeff, term) in &terms.terms {
        debug_assert!(coeff.is_one(), "ground-field splitting keeps unit coefficients");
        debug_assert!(term.is_empty());
        total = !total;
    }
    trace.steps.push(format!("total {}", total as u8));
    Ok((total, trace))
}

/// Values obtained by the generalized strategy: repeatedly cancel any
/// available edge (possibly one created by earlier cancellations).
pub fn jflat_recursive_values(foam: &PreFoam) -> Result<BTreeSet<bool>, EvalError> {
    fn rec(f: &PreFoam, out: &mut BTreeSet<bool>, seen: &mut Vec<PreFoam>) -> Result<(), EvalError> {
        if f.vertices.is_empty() {
            let (v, _) = jflat_run(f, &Matching::new())?;
            out.insert(v);
            return Ok(());
        }
        if seen.iter().any(|g| g == f) {
            return Ok(());
        }
        seen.push(f.clone());
        let mut cancelled_any = false;
        for (&sid, seam) in &f.seams {
            if let Seam::Edge { ends } = seam {
                if ends.0 != ends.1 {
                    cancelled_any = true;
                    let g = cancel_vertex_pair(f, sid)?;
                    rec(&g, out, seen)?;
                }
            }
        }
        if !cancelled_any {
            return Err(EvalError::Surgery(
                "vertices remain but no cancellable edge exists".into(),
            ));
        }
        Ok(())
    }
    let mut out = BTreeSet::new();
    let mut seen = Vec::new();
    rec(foam, &mut out, &mut seen)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    PerfectMatching,
    /// Also explore recursive cancellation through freshly created edges.
    Recursive,
}

/// Run the algorithm over every perfect matching; compare with the closed
/// evaluation on embedded pre-foams.
pub fn jflat_survey(foam: &PreFoam, strategy: Strategy) -> Result<JflatOutcome, EvalError> {
    if !foam.seam_bipartite() {
        return Ok(JflatOutcome::WellDefined(false));
    }
    let matchings = perfect_matchings(foam);
    if matchings.is_empty() {
        return Err(EvalError::Surgery(
            "bipartite 4-regular seam graph must have a perfect matching".into(),
        ));
    }
    let mut values = BTreeSet::new();
    let mut runs: Vec<(Matching, bool, Trace)> = Vec::new();
    for m in matchings {
        let (v, t) = jflat_run(foam, &m)?;
        values.insert(v);
        runs.push((m, v, t));
    }
    if strategy == Strategy::Recursive {
        values.extend(jflat_recursive_values(foam)?);
    }
    let outcome = if values.len() == 1 {
        JflatOutcome::WellDefined(values.into_iter().next().unwrap())
    } else {
        // Keep one witness per value.
        let mut witnesses = Vec::new();
        for v in &values {
            if let Some(run) = runs.iter().find(|(_, val, _)| val == v) {
                witnesses.push(run.clone());
            }
        }
        JflatOutcome::Ambiguous { values, witnesses }
    };
    if foam.embedded {
        let expected = matches!(
            apply_to_poly(&eval_closed(foam)?, BaseChange::K)?,
            BcElem::K(true)
        );
        match &outcome {
            JflatOutcome::WellDefined(v) if *v == expected => {}
            _ => {
                return Err(EvalError::Surgery(format!(
                    "TheoremViolation: embedded pre-foam gave {} but closed evaluation is {}",
                    outcome, expected as u8
                )))
            }
        }
    }
    Ok(outcome)
}

/// The closed evaluation reduced to the ground field.
pub fn eval_k(foam: &PreFoam) -> Result<bool, EvalError> {
    Ok(matches!(
        apply_to_poly(&eval_closed(foam)?, BaseChange::K)?,
        BcElem::K(true)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefoam::catalog;

    #[test]
    fn matchings_of_simple_foams() {
        assert_eq!(perfect_matchings(&catalog::theta(2, 1, 0)), vec![Matching::new()]);
        let km = catalog::km_counterexample();
        let ms = perfect_matchings(&km);
        // {e1,e3} plus one of {e2,e5,e7} x one of {e4,e6,e8}.
        assert_eq!(ms.len(), 10);
        assert!(ms.contains(&[0u32, 2].into_iter().collect()));
        assert!(ms.contains(&[1u32, 3].into_iter().collect()));
    }

    #[test]
    fn theta_base_case() {
        let (v, _) = jflat_run(&catalog::theta(2, 1, 0), &Matching::new()).unwrap();
        assert!(v);
        let (v0, _) = jflat_run(&catalog::theta(1, 1, 0), &Matching::new()).unwrap();
        assert!(!v0);
    }

    #[test]
    fn sphere_and_torus_base_cases() {
        for (dots, want) in [(0, false), (1, false), (2, true), (3, false)] {
            let (v, _) = jflat_run(&catalog::sphere(dots), &Matching::new()).unwrap();
            assert_eq!(v, want, "sphere with {} dots", dots);
        }
        let (v, _) = jflat_run(&catalog::closed_surface(1, 0), &Matching::new()).unwrap();
        assert!(v);
        let (v2, _) = jflat_run(&catalog::closed_surface(2, 0), &Matching::new()).unwrap();
        assert!(!v2);
    }

    #[test]
    fn survey_matches_eval_on_embedded() {
        for foam in [
            catalog::sphere(2),
            catalog::sphere(4),
            catalog::theta(2, 1, 0),
            catalog::theta(4, 2, 0),
            catalog::closed_surface(1, 0),
            catalog::annular_theta_graph(false),
        ] {
            let outcome = jflat_survey(&foam, Strategy::PerfectMatching).unwrap();
            assert_eq!(
                outcome,
                JflatOutcome::WellDefined(eval_k(&foam).unwrap()),
                "{:?}",
                foam
            );
        }
    }

    #[test]
    fn annulus_only_families_vanish() {
        // Every facet an annulus: value 0 both twisted and not.
        for twist in [false, true] {
            let f = catalog::annular_theta_graph(twist);
            let (v, _) = jflat_run(&f, &Matching::new()).unwrap();
            assert!(!v);
        }
        let kf = catalog::klein_four_disks();
        let (v, _) = jflat_run(&kf, &Matching::new()).unwrap();
        // Degree of this pre-foam is nonzero (disks), so the value is 0.
        assert!(!v);
    }

    #[test]
    fn degree_filter() {
        // Spurious dots force nonzero degree and value 0.
        for base in [catalog::theta(2, 1, 0), catalog::sphere(2)] {
            let mut f = base;
            f.facets.get_mut(&0).unwrap().dots += 1;
            assert_ne!(f.degree(), 0);
            let outcome = jflat_survey(&f, Strategy::PerfectMatching).unwrap();
            assert_eq!(outcome, JflatOutcome::WellDefined(false));
        }
    }

    #[test]
    fn counterexample_is_ambiguous() {
        let km = catalog::km_counterexample();
        let (v0, _) = jflat_run(&km, &[0u32, 2].into_iter().collect()).unwrap();
        assert!(!v0, "the {{e1,e3}} matching creates a non-orientable facet");
        let (v1, trace) = jflat_run(&km, &[1u32, 3].into_iter().collect()).unwrap();
        assert!(v1, "the {{e2,e4}} matching evaluates to 1:\n{}", trace);
        match jflat_survey(&km, Strategy::PerfectMatching).unwrap() {
            JflatOutcome::Ambiguous { values, .. } => {
                assert_eq!(values, [false, true].into_iter().collect());
            }
            other => panic!("expected ambiguity, got {}", other),
        }
    }

    #[test]
    fn recursive_strategy_agrees_on_embedded() {
        let th = catalog::theta(2, 1, 0);
        let outcome = jflat_survey(&th, Strategy::Recursive).unwrap();
        assert_eq!(outcome, JflatOutcome::WellDefined(true));
    }
}
