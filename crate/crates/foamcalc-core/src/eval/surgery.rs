//! Surgeries on closed pre-foams: neck-cutting parallel to a boundary
//! circle, handle removal, splitting a seam circle into a theta piece,
//! and cancellation of a pair of seam vertices joined by a seam edge.
//!
//! All four are evaluation-neutral: the weighted sum of evaluations of the
//! output equals the evaluation of the input.

use super::{EvalError, FormalSum};
use crate::prefoam::{Facet, FacetId, Letter, Perm3, PreFoam, Seam, SeamId, VertexId};
use crate::ring::{Alphabet, Poly};
use std::collections::{BTreeMap, BTreeSet, HashMap};

fn e_var(i: usize) -> Poly {
    Poly::var(Alphabet::E, i)
}

/// The six dot distributions of the neck-cutting relation:
/// `(dots on the disk side, dots on the capped side, coefficient)`.
/// Under the base change to the ground field only the unit terms survive.
fn neck_cut_table(k_mode: bool) -> Vec<(u32, u32, Poly)> {
    let one = Poly::one(Alphabet::E);
    let mut table = vec![(2, 0, one.clone()), (1, 1, one.clone()), (0, 2, one)];
    if !k_mode {
        table.push((1, 0, e_var(0)));
        table.push((0, 1, e_var(0)));
        table.push((0, 0, e_var(1)));
    }
    table
}

fn next_facet_id(foam: &PreFoam) -> FacetId {
    foam.facets.keys().max().map_or(0, |m| m + 1)
}

/// Cut the facet along a circle parallel to its `word`-th boundary circle.
/// The named boundary word moves onto a new disk; the facet is capped.
pub fn neck_cut(foam: &PreFoam, facet: FacetId, word: usize) -> Result<FormalSum, EvalError> {
    neck_cut_mode(foam, facet, word, false)
}

pub fn neck_cut_mode(
    foam: &PreFoam,
    facet: FacetId,
    word: usize,
    k_mode: bool,
) -> Result<FormalSum, EvalError> {
    let f = foam
        .facets
        .get(&facet)
        .ok_or_else(|| EvalError::Surgery(format!("no facet {}", facet)))?;
    if word >= f.boundary.len() {
        return Err(EvalError::Surgery(format!(
            "NoSuchBoundary: facet {} has {} boundary circles",
            facet,
            f.boundary.len()
        )));
    }
    let mut out = FormalSum::new();
    for (d_disk, d_rest, coeff) in neck_cut_table(k_mode) {
        let mut term = foam.clone();
        let new_id = next_facet_id(&term);
        let tf = term.facets.get_mut(&facet).unwrap();
        let circle = tf.boundary.remove(word);
        tf.dots += d_rest;
        term.facets.insert(new_id, Facet::disk(circle).with_dots(d_disk));
        out.push(coeff, term);
    }
    Ok(out)
}

/// Trade one handle of an orientable facet for dots:
/// genus drops by one, terms `(+2 dots, 1)` and `(+0 dots, E2)`.
pub fn remove_handle(foam: &PreFoam, facet: FacetId) -> Result<FormalSum, EvalError> {
    let f = foam
        .facets
        .get(&facet)
        .ok_or_else(|| EvalError::Surgery(format!("no facet {}", facet)))?;
    if !f.orientable {
        return Err(EvalError::Surgery("NonOrientableFacet".into()));
    }
    if f.genus_or_crosscaps == 0 {
        return Err(EvalError::Surgery("NoHandle: facet has genus 0".into()));
    }
    let mut out = FormalSum::new();
    for (extra, coeff) in [(2u32, Poly::one(Alphabet::E)), (0, e_var(1))] {
        let mut term = foam.clone();
        let tf = term.facets.get_mut(&facet).unwrap();
        tf.genus_or_crosscaps -= 1;
        tf.dots += extra;
        out.push(coeff, term);
    }
    Ok(out)
}

/// Outcome of splitting along a seam circle.
#[derive(Debug, Clone)]
pub enum SplitResult {
    /// Nontrivial monodromy: the flat evaluation declares zero.
    Zero,
    Sum(FormalSum),
}

/// Neck-cut the three facet branches parallel to a seam circle. The circle
/// together with its three new disks becomes a theta component; the three
/// old branches are capped. In `k_mode` only unit coefficients survive and
/// terms with a facet carrying three or more dots are pruned.
pub fn split_seam_circle(
    foam: &PreFoam,
    seam: SeamId,
    k_mode: bool,
) -> Result<SplitResult, EvalError> {
    let monodromy = match foam.seams.get(&seam) {
        Some(Seam::Circle { monodromy }) => *monodromy,
        Some(Seam::Edge { .. }) => {
            return Err(EvalError::Surgery(format!("NotACircleSeam: {}", seam)))
        }
        None => return Err(EvalError::Surgery(format!("no seam {}", seam))),
    };
    if !monodromy.is_identity() {
        return Ok(SplitResult::Zero);
    }
    // The three singleton boundary words lying on this circle.
    let mut sites: Vec<(FacetId, Letter)> = Vec::new();
    for (&fid, facet) in &foam.facets {
        for w in &facet.boundary {
            if w.len() == 1 && w[0].seam == seam {
                sites.push((fid, w[0]));
            }
        }
    }
    if sites.len() != 3 {
        return Err(EvalError::Surgery(format!(
            "seam {} has {} singleton branch words, expected 3",
            seam,
            sites.len()
        )));
    }
    let table = neck_cut_table(k_mode);
    let mut out = FormalSum::new();
    let n = table.len();
    for choice in 0..n * n * n {
        let picks = [
            &table[choice % n],
            &table[(choice / n) % n],
            &table[(choice / (n * n)) % n],
        ];
        let mut term = foam.clone();
        let mut coeff = Poly::one(Alphabet::E);
        for (k, (fid, letter)) in sites.iter().enumerate() {
            let (d_disk, d_rest, c) = picks[k];
            coeff = coeff.mul(c);
            let new_id = next_facet_id(&term);
            let tf = term.facets.get_mut(fid).unwrap();
            let pos = tf
                .boundary
                .iter()
                .position(|w| w.len() == 1 && w[0] == *letter)
                .expect("site word present");
            let circle = tf.boundary.remove(pos);
            tf.dots += d_rest;
            term.facets.insert(new_id, Facet::disk(circle).with_dots(*d_disk));
        }
        if k_mode && term.facets.values().any(|f| f.dots >= 3) {
            continue;
        }
        out.push(coeff, term);
    }
    Ok(SplitResult::Sum(out))
}

// ---------------------------------------------------------------------------
// Vertex-pair cancellation.
// ---------------------------------------------------------------------------

/// One letter occurrence inside a boundary word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Occ {
    facet: FacetId,
    word: usize,
    pos: usize,
}

/// A seam end: 0 is the tail of the edge's intrinsic direction.
type SeamEnd = (SeamId, u8);

struct WordTable {
    occs: Vec<(Occ, Letter)>,
    /// Words as occurrence-index lists, keyed by (facet, word index).
    words: BTreeMap<(FacetId, usize), Vec<usize>>,
}

impl WordTable {
    fn build(foam: &PreFoam) -> Self {
        let mut occs = Vec::new();
        let mut words = BTreeMap::new();
        for (&fid, facet) in &foam.facets {
            for (wi, w) in facet.boundary.iter().enumerate() {
                let mut list = Vec::new();
                for (pos, &letter) in w.iter().enumerate() {
                    list.push(occs.len());
                    occs.push((Occ { facet: fid, word: wi, pos }, letter));
                }
                words.insert((fid, wi), list);
            }
        }
        WordTable { occs, words }
    }

    fn letter(&self, i: usize) -> Letter {
        self.occs[i].1
    }

    fn facet(&self, i: usize) -> FacetId {
        self.occs[i].0.facet
    }

    fn next_in_word(&self, i: usize) -> usize {
        let occ = self.occs[i].0;
        let list = &self.words[&(occ.facet, occ.word)];
        list[(occ.pos + 1) % list.len()]
    }

    fn prev_in_word(&self, i: usize) -> usize {
        let occ = self.occs[i].0;
        let list = &self.words[&(occ.facet, occ.word)];
        list[(occ.pos + list.len() - 1) % list.len()]
    }
}

/// Start and end of the stored traversal of a letter, as seam ends.
fn stored_ends(l: &Letter) -> (SeamEnd, SeamEnd) {
    if l.dir > 0 {
        ((l.seam, 0), (l.seam, 1))
    } else {
        ((l.seam, 1), (l.seam, 0))
    }
}

fn end_vertex(foam: &PreFoam, end: SeamEnd) -> Option<VertexId> {
    match foam.seams.get(&end.0) {
        Some(Seam::Edge { ends }) => Some(if end.1 == 0 { ends.0 } else { ends.1 }),
        _ => None,
    }
}

/// A slot anchored at a specific seam end; each participates in exactly
/// one crossing of the cancellation.
type EndSlot = (SeamEnd, u8);

/// Cancel the pair of seam vertices joined by the edge seam `e`.
///
/// The neighborhood of the edge and its two cones is replaced by a
/// triangle-web times interval: the six outer seam germs splice in pairs
/// read off from the facet corners along `e`, the three branch sheets
/// extend straight through the splice, and the six side-corner sheets
/// merge pairwise through quad sheets. Degree is preserved; the merge can
/// create non-orientable facets, which is detected from letter directions.
pub fn cancel_vertex_pair(foam: &PreFoam, e: SeamId) -> Result<PreFoam, EvalError> {
    let fail = |msg: String| EvalError::Surgery(msg);
    let (v1, v2) = match foam.seams.get(&e) {
        Some(Seam::Edge { ends }) => *ends,
        Some(Seam::Circle { .. }) => return Err(fail(format!("NotAnEdge: seam {}", e))),
        None => return Err(fail(format!("no seam {}", e))),
    };
    if v1 == v2 {
        return Err(fail(format!("SelfLoop: seam {} joins a vertex to itself", e)));
    }

    let table = WordTable::build(foam);
    let n_occ = table.occs.len();

    let e_occs: Vec<usize> = (0..n_occ).filter(|&i| table.letter(i).seam == e).collect();
    if e_occs.len() != 3 {
        return Err(fail(format!("seam {} has {} letters, expected 3", e, e_occs.len())));
    }

    let germs_at = |v: VertexId| -> BTreeSet<SeamEnd> {
        let mut out = BTreeSet::new();
        for (&sid, seam) in &foam.seams {
            if sid == e {
                continue;
            }
            if let Seam::Edge { ends } = seam {
                if ends.0 == v {
                    out.insert((sid, 0));
                }
                if ends.1 == v {
                    out.insert((sid, 1));
                }
            }
        }
        out
    };
    let germs_v1 = germs_at(v1);
    let germs_v2 = germs_at(v2);
    if germs_v1.len() != 3 || germs_v2.len() != 3 {
        return Err(fail("vertices are not 4-valent".into()));
    }

    // Darts: 2i = stored traversal of occurrence i, 2i+1 its reverse.
    let fwd = |i: usize| 2 * i;
    let bwd = |i: usize| 2 * i + 1;
    let mirror = |d: usize| d ^ 1;

    // Dart of occurrence i whose traversal ends / starts at a seam end.
    let dart_into = |i: usize, end: SeamEnd| -> Result<usize, EvalError> {
        let (start, stop) = stored_ends(&table.letter(i));
        if stop == end {
            Ok(fwd(i))
        } else if start == end {
            Ok(bwd(i))
        } else {
            Err(EvalError::Surgery("occurrence does not touch germ end".into()))
        }
    };
    let dart_out = |i: usize, end: SeamEnd| -> Result<usize, EvalError> {
        Ok(mirror(dart_into(i, end)?))
    };

    // --- e-branch fragments -------------------------------------------------
    struct Branch {
        germ_v1: SeamEnd,
        occ_v1: usize,
        germ_v2: SeamEnd,
        occ_v2: usize,
    }
    let mut branches = Vec::new();
    for &ei in &e_occs {
        let p = table.prev_in_word(ei);
        let n = table.next_in_word(ei);
        if p == ei || n == ei {
            return Err(fail("edge letter alone in its word".into()));
        }
        let dir = table.letter(ei).dir;
        // Stored traversal of e runs v1 -> v2 when dir = +1; the previous
        // letter ends where e starts.
        let (occ_v1, germ_v1, occ_v2, germ_v2) = if dir > 0 {
            (p, stored_ends(&table.letter(p)).1, n, stored_ends(&table.letter(n)).0)
        } else {
            (n, stored_ends(&table.letter(n)).0, p, stored_ends(&table.letter(p)).1)
        };
        if end_vertex(foam, germ_v1) != Some(v1) || end_vertex(foam, germ_v2) != Some(v2) {
            return Err(fail("branch neighbors do not meet the cancelled vertices".into()));
        }
        branches.push(Branch { germ_v1, occ_v1, germ_v2, occ_v2 });
    }

    let mut pairing: HashMap<SeamEnd, SeamEnd> = HashMap::new();
    for b in &branches {
        if pairing.insert(b.germ_v1, b.germ_v2).is_some() {
            return Err(fail("ambiguous corner pairing at v1".into()));
        }
    }
    {
        let lhs: BTreeSet<SeamEnd> = pairing.keys().copied().collect();
        let rhs: BTreeSet<SeamEnd> = pairing.values().copied().collect();
        if lhs != germs_v1 || rhs != germs_v2 {
            return Err(fail("branch corners do not cover the germ ends".into()));
        }
    }

    // --- side corners -------------------------------------------------------
    // Word adjacencies (a -> b) through a cancelled vertex, not involving e.
    let side_corners = |v: VertexId| -> Vec<(usize, SeamEnd, usize, SeamEnd)> {
        let mut out = Vec::new();
        for i in 0..n_occ {
            if table.letter(i).seam == e {
                continue;
            }
            let nx = table.next_in_word(i);
            if table.letter(nx).seam == e {
                continue;
            }
            let (_, stop) = stored_ends(&table.letter(i));
            let (start, _) = stored_ends(&table.letter(nx));
            if end_vertex(foam, stop) == Some(v) && end_vertex(foam, start) == Some(v) {
                out.push((i, stop, nx, start));
            }
        }
        out
    };
    let corners_v1 = side_corners(v1);
    let corners_v2 = side_corners(v2);
    if corners_v1.len() != 3 || corners_v2.len() != 3 {
        return Err(fail(format!(
            "expected 3 side corners at each vertex, found {} and {}",
            corners_v1.len(),
            corners_v2.len()
        )));
    }

    // --- crossings ------------------------------------------------------
    let mut succ: HashMap<usize, usize> = HashMap::new();
    let mut crossings: Vec<(EndSlot, EndSlot)> = Vec::new();
    let mut parity_edges: Vec<(FacetId, FacetId, u8)> = Vec::new();

    let glue = |din: usize,
                    dout: usize,
                    succ: &mut HashMap<usize, usize>|
     -> Result<(), EvalError> {
        let first = succ.insert(din, dout);
        let second = succ.insert(mirror(dout), mirror(din));
        if first.is_some() || (second.is_some() && mirror(dout) != din) {
            return Err(EvalError::Surgery("conflicting crossing gluings".into()));
        }
        Ok(())
    };

    let record = |x_occ: usize,
                      g_x: SeamEnd,
                      y_occ: usize,
                      g_y: SeamEnd,
                      succ: &mut HashMap<usize, usize>,
                      crossings: &mut Vec<(EndSlot, EndSlot)>,
                      parity: &mut Vec<(FacetId, FacetId, u8)>|
     -> Result<(), EvalError> {
        let din = dart_into(x_occ, g_x)?;
        let dout = dart_out(y_occ, g_y)?;
        glue(din, dout, succ)?;
        crossings.push(((g_x, table.letter(x_occ).slot), (g_y, table.letter(y_occ).slot)));
        parity.push((
            table.facet(x_occ),
            table.facet(y_occ),
            ((din & 1) ^ (dout & 1)) as u8,
        ));
        Ok(())
    };

    for b in &branches {
        record(
            b.occ_v1,
            b.germ_v1,
            b.occ_v2,
            b.germ_v2,
            &mut succ,
            &mut crossings,
            &mut parity_edges,
        )?;
    }

    let mut used_v2 = vec![false; 3];
    for &(a_occ, g_a, b_occ, g_b) in &corners_v1 {
        let target: BTreeSet<SeamEnd> = [pairing[&g_a], pairing[&g_b]].into_iter().collect();
        let found = corners_v2.iter().enumerate().find(|(k, &(_, g_c, _, g_d))| {
            !used_v2[*k] && [g_c, g_d].into_iter().collect::<BTreeSet<_>>() == target
        });
        let (k, &(c_occ, g_c, d_occ, g_d)) = match found {
            Some(x) => x,
            None => return Err(fail("no matching side corner at v2; malformed complex".into())),
        };
        used_v2[k] = true;
        for (x_occ, g_x) in [(a_occ, g_a), (b_occ, g_b)] {
            let h = pairing[&g_x];
            let (y_occ, g_y) = if h == g_c { (c_occ, g_c) } else { (d_occ, g_d) };
            record(x_occ, g_x, y_occ, g_y, &mut succ, &mut crossings, &mut parity_edges)?;
        }
    }

    // --- splice seams into chains ----------------------------------------
    let spliced: BTreeSet<SeamId> = pairing.iter().flat_map(|(a, b)| [a.0, b.0]).collect();
    let connections: HashMap<SeamEnd, SeamEnd> =
        pairing.iter().flat_map(|(&a, &b)| [(a, b), (b, a)]).collect();
    let other_end = |end: SeamEnd| -> SeamEnd { (end.0, 1 - end.1) };

    enum NewSeamKind {
        Edge(VertexId, VertexId),
        Circle,
    }
    struct NewSeam {
        id: SeamId,
        kind: NewSeamKind,
        /// (old seam, sign): +1 when the chain walks tail to head.
        portions: Vec<(SeamId, i8)>,
    }
    let mut assigned: BTreeSet<SeamId> = BTreeSet::new();
    let mut new_seams: Vec<NewSeam> = Vec::new();

    let mut free_ends: Vec<SeamEnd> = spliced
        .iter()
        .flat_map(|&s| [(s, 0u8), (s, 1u8)])
        .filter(|end| !connections.contains_key(end))
        .collect();
    free_ends.sort_unstable();
    for &start in &free_ends {
        if assigned.contains(&start.0) {
            continue;
        }
        let start_vertex = end_vertex(foam, start).unwrap();
        let mut portions = Vec::new();
        let mut cursor = start;
        let final_vertex;
        loop {
            assigned.insert(cursor.0);
            portions.push((cursor.0, if cursor.1 == 0 { 1 } else { -1 }));
            let far = other_end(cursor);
            match connections.get(&far) {
                Some(&next) => cursor = next,
                None => {
                    final_vertex = end_vertex(foam, far).unwrap();
                    break;
                }
            }
        }
        let id = portions.iter().map(|p| p.0).min().unwrap();
        new_seams.push(NewSeam {
            id,
            kind: NewSeamKind::Edge(start_vertex, final_vertex),
            portions,
        });
    }
    let leftovers: Vec<SeamId> =
        spliced.iter().copied().filter(|s| !assigned.contains(s)).collect();
    for s in leftovers {
        if assigned.contains(&s) {
            continue;
        }
        let mut portions = Vec::new();
        let mut cursor = (s, 0u8);
        loop {
            assigned.insert(cursor.0);
            portions.push((cursor.0, if cursor.1 == 0 { 1 } else { -1 }));
            let next = connections[&other_end(cursor)];
            if next == (s, 0) {
                break;
            }
            cursor = next;
        }
        let id = portions.iter().map(|p| p.0).min().unwrap();
        new_seams.push(NewSeam { id, kind: NewSeamKind::Circle, portions });
    }

    // --- slot classes across crossings ------------------------------------
    let mut class_parent: HashMap<(SeamId, u8), (SeamId, u8)> = HashMap::new();
    fn class_find(
        parent: &mut HashMap<(SeamId, u8), (SeamId, u8)>,
        x: (SeamId, u8),
    ) -> (SeamId, u8) {
        let p = *parent.get(&x).unwrap_or(&x);
        if p == x {
            return x;
        }
        let r = class_find(parent, p);
        parent.insert(x, r);
        r
    }
    for ((ga, sa), (gb, sb)) in &crossings {
        let ra = class_find(&mut class_parent, (ga.0, *sa));
        let rb = class_find(&mut class_parent, (gb.0, *sb));
        if ra != rb {
            class_parent.insert(ra, rb);
        }
    }
    // Crossing lookup by anchored end slot.
    let crossing_of: HashMap<EndSlot, EndSlot> = crossings
        .iter()
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .collect();

    // --- per-seam remaps ---------------------------------------------------
    let mut seam_remap: HashMap<SeamId, (SeamId, i8)> = HashMap::new();
    let mut slot_remap: HashMap<(SeamId, u8), u8> = HashMap::new();
    let mut result_seams: BTreeMap<SeamId, Seam> = BTreeMap::new();
    for ns in &new_seams {
        for &(old, sign) in &ns.portions {
            seam_remap.insert(old, (ns.id, sign));
        }
        match ns.kind {
            NewSeamKind::Edge(a, b) => {
                let mut classes: Vec<(SeamId, u8)> = Vec::new();
                for &(old, _) in &ns.portions {
                    for slot in 0..3u8 {
                        let r = class_find(&mut class_parent, (old, slot));
                        if !classes.contains(&r) {
                            classes.push(r);
                        }
                    }
                }
                classes.sort_unstable();
                if classes.len() != 3 {
                    return Err(fail(format!(
                        "spliced seam {} carries {} slot classes, expected 3",
                        ns.id,
                        classes.len()
                    )));
                }
                for &(old, _) in &ns.portions {
                    for slot in 0..3u8 {
                        let r = class_find(&mut class_parent, (old, slot));
                        let idx = classes.iter().position(|c| *c == r).unwrap() as u8;
                        slot_remap.insert((old, slot), idx);
                    }
                }
                result_seams.insert(ns.id, Seam::Edge { ends: (a, b) });
            }
            NewSeamKind::Circle => {
                // Follow each slot strand once around the chain to get the
                // monodromy on the starting portion's slots.
                let len = ns.portions.len();
                let mut perm = [0u8; 3];
                for s in 0..3u8 {
                    let mut cur_slot = s;
                    for k in 0..len {
                        let (seam_k, sign_k) = ns.portions[k];
                        let exit: SeamEnd = (seam_k, if sign_k > 0 { 1 } else { 0 });
                        let (entry, slot_next) = *crossing_of
                            .get(&((exit, cur_slot)))
                            .ok_or_else(|| {
                                fail("missing slot crossing along a circle chain".into())
                            })?;
                        let (seam_next, _) = ns.portions[(k + 1) % len];
                        if entry.0 != seam_next {
                            return Err(fail("circle chain walk left the chain".into()));
                        }
                        cur_slot = slot_next;
                    }
                    perm[s as usize] = cur_slot;
                }
                let monodromy = Perm3(perm);
                let orbits = monodromy.orbits();
                let start = ns.portions[0].0;
                for &(old, _) in &ns.portions {
                    for slot in 0..3u8 {
                        let r = class_find(&mut class_parent, (old, slot));
                        let strand = (0..3u8)
                            .find(|&t| class_find(&mut class_parent, (start, t)) == r)
                            .ok_or_else(|| fail("slot class misses the start portion".into()))?;
                        let orbit_idx =
                            orbits.iter().position(|o| o.contains(&strand)).unwrap() as u8;
                        slot_remap.insert((old, slot), orbit_idx);
                    }
                }
                result_seams.insert(ns.id, Seam::Circle { monodromy });
            }
        }
    }
    for (&sid, seam) in &foam.seams {
        if sid == e || spliced.contains(&sid) {
            continue;
        }
        result_seams.insert(sid, seam.clone());
        seam_remap.insert(sid, (sid, 1));
        for slot in 0..seam.slot_count() as u8 {
            slot_remap.insert((sid, slot), slot);
        }
    }

    // --- extract new boundary words by dart walking ------------------------
    let default_succ = |d: usize| -> usize {
        let i = d / 2;
        if d % 2 == 0 {
            fwd(table.next_in_word(i))
        } else {
            bwd(table.prev_in_word(i))
        }
    };
    let step = |d: usize| -> usize {
        match succ.get(&d) {
            Some(&n) => n,
            None => default_succ(d),
        }
    };

    let mut used = vec![false; n_occ];
    for &ei in &e_occs {
        used[ei] = true;
    }
    let mut new_words: Vec<(Vec<usize>, Vec<Letter>)> = Vec::new();
    for start in 0..n_occ {
        if used[start] {
            continue;
        }
        let mut occ_seq: Vec<usize> = Vec::new();
        let mut letters: Vec<Letter> = Vec::new();
        let mut d = fwd(start);
        loop {
            let i = d / 2;
            if table.letter(i).seam == e {
                return Err(fail("walk reached a deleted edge letter".into()));
            }
            if !occ_seq.is_empty() && i == start {
                if d == fwd(start) {
                    break;
                }
                return Err(fail("boundary walk returned reversed; malformed complex".into()));
            }
            if used[i] {
                return Err(fail("occurrence visited twice; malformed complex".into()));
            }
            used[i] = true;
            occ_seq.push(i);
            let l = table.letter(i);
            let traverse_dir = if d % 2 == 0 { l.dir } else { -l.dir };
            let (new_seam, sign) = seam_remap[&l.seam];
            let new_slot = slot_remap[&(l.seam, l.slot)];
            letters.push(Letter::new(new_seam, new_slot, traverse_dir * sign));
            d = step(d);
        }
        // Coalesce runs of one spliced arc: consecutive equal letters,
        // including around the cyclic wrap.
        let mut merged: Vec<Letter> = Vec::new();
        for l in letters {
            if merged.last() == Some(&l) {
                continue;
            }
            merged.push(l);
        }
        while merged.len() > 1 && merged.first() == merged.last() {
            merged.pop();
        }
        new_words.push((occ_seq, merged));
    }

    // --- merge facets -------------------------------------------------------
    let facet_ids: Vec<FacetId> = foam.facets.keys().copied().collect();
    let fidx: HashMap<FacetId, usize> =
        facet_ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut parent: Vec<usize> = (0..facet_ids.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] == x {
            x
        } else {
            let r = find(parent, parent[x]);
            parent[x] = r;
            r
        }
    }
    for (f1, f2, _) in &parity_edges {
        let a = find(&mut parent, fidx[f1]);
        let b = find(&mut parent, fidx[f2]);
        if a != b {
            parent[a] = b;
        }
    }

    // Orientability per merged group from the crossing parities.
    let mut puf_parent: Vec<usize> = (0..facet_ids.len()).collect();
    let mut puf_par: Vec<u8> = vec![0; facet_ids.len()];
    let mut group_consistent: HashMap<usize, bool> = HashMap::new();
    fn pfind(parent: &mut Vec<usize>, par: &mut Vec<u8>, x: usize) -> (usize, u8) {
        if parent[x] == x {
            return (x, 0);
        }
        let (r, p) = pfind(parent, par, parent[x]);
        parent[x] = r;
        par[x] ^= p;
        (parent[x], par[x])
    }
    for (f1, f2, want) in &parity_edges {
        let (r1, p1) = pfind(&mut puf_parent, &mut puf_par, fidx[f1]);
        let (r2, p2) = pfind(&mut puf_parent, &mut puf_par, fidx[f2]);
        if r1 == r2 {
            if p1 ^ p2 != *want {
                let root = find(&mut parent, fidx[f1]);
                group_consistent.insert(root, false);
            }
        } else {
            puf_parent[r1] = r2;
            puf_par[r1] = p1 ^ p2 ^ want;
        }
    }

    // One quad per v1 side corner, absorbed by the merged facet owning it.
    let mut quads: HashMap<usize, i64> = HashMap::new();
    for &(a_occ, _, _, _) in &corners_v1 {
        let root = find(&mut parent, fidx[&table.facet(a_occ)]);
        *quads.entry(root).or_default() += 1;
    }

    let mut groups: BTreeMap<usize, Vec<FacetId>> = BTreeMap::new();
    for &f in &facet_ids {
        let root = find(&mut parent, fidx[&f]);
        groups.entry(root).or_default().push(f);
    }
    let mut result_facets: BTreeMap<FacetId, Facet> = BTreeMap::new();
    for (root, members) in &groups {
        let new_id = *members.iter().min().unwrap();
        let words: Vec<Vec<Letter>> = new_words
            .iter()
            .filter(|(seq, _)| find(&mut parent, fidx[&table.facet(seq[0])]) == *root)
            .map(|(_, w)| w.clone())
            .collect();
        let chi_old: i64 = members.iter().map(|f| foam.facets[f].euler()).sum();
        let chi = chi_old - quads.get(root).copied().unwrap_or(0);
        let orientable = group_consistent.get(root).copied().unwrap_or(true)
            && members.iter().all(|f| foam.facets[f].orientable);
        let b = words.len() as i64;
        let genus_or_crosscaps = if orientable {
            let twice_genus = 2 - chi - b;
            if twice_genus < 0 || twice_genus % 2 != 0 {
                return Err(fail(format!(
                    "inconsistent Euler characteristic {} for an orientable facet",
                    chi
                )));
            }
            (twice_genus / 2) as u32
        } else {
            let k = 2 - chi - b;
            if k < 1 {
                return Err(fail(format!(
                    "inconsistent Euler characteristic {} for a non-orientable facet",
                    chi
                )));
            }
            k as u32
        };
        result_facets.insert(
            new_id,
            Facet {
                orientable,
                genus_or_crosscaps,
                boundary: words,
                dots: members.iter().map(|f| foam.facets[f].dots).sum(),
                triangles: members.iter().map(|f| foam.facets[f].triangles).sum(),
                squares: members.iter().map(|f| foam.facets[f].squares).sum(),
            },
        );
    }

    let out = PreFoam {
        vertices: foam
            .vertices
            .iter()
            .copied()
            .filter(|&v| v != v1 && v != v2)
            .collect(),
        seams: result_seams,
        facets: result_facets,
        embedded: foam.embedded,
    };
    let report = out.validate();
    if !report.ok() {
        return Err(fail(format!("cancellation produced an invalid complex: {}", report)));
    }
    if out.degree() != foam.degree() {
        return Err(fail(format!(
            "cancellation changed degree {} -> {}",
            foam.degree(),
            out.degree()
        )));
    }
    Ok(out)
}

/// The counterexample pre-foam reduced along the given matching edges.
pub fn km_counterexample_reduced(edges: &[SeamId]) -> Result<PreFoam, String> {
    let mut f = crate::prefoam::catalog::km_counterexample();
    for &e in edges {
        f = cancel_vertex_pair(&f, e).map_err(|err| err.to_string())?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_closed;
    use crate::prefoam::catalog;

    #[test]
    fn neck_cut_is_evaluation_neutral() {
        for dots in [(2, 1, 0), (4, 2, 0), (3, 1, 0)] {
            let th = catalog::theta(dots.0, dots.1, dots.2);
            let lhs = eval_closed(&th).unwrap();
            let cut = neck_cut(&th, 0, 0).unwrap();
            assert_eq!(cut.eval().unwrap(), lhs);
        }
    }

    #[test]
    fn neck_cut_missing_boundary() {
        let s = catalog::sphere(0);
        assert!(matches!(neck_cut(&s, 0, 0), Err(EvalError::Surgery(_))));
    }

    #[test]
    fn k_mode_keeps_three_terms() {
        let th = catalog::theta(2, 1, 0);
        let cut = neck_cut_mode(&th, 0, 0, true).unwrap();
        assert_eq!(cut.len(), 3);
    }

    #[test]
    fn handle_removal_values() {
        let torus = catalog::closed_surface(1, 0);
        let sum = remove_handle(&torus, 0).unwrap();
        assert_eq!(sum.eval().unwrap(), eval_closed(&torus).unwrap());
        let g2 = catalog::closed_surface(2, 0);
        let sum2 = remove_handle(&g2, 0).unwrap();
        assert_eq!(sum2.eval().unwrap(), eval_closed(&g2).unwrap());
        assert!(matches!(
            remove_handle(&catalog::sphere(0), 0),
            Err(EvalError::Surgery(_))
        ));
    }

    #[test]
    fn split_theta_is_evaluation_neutral() {
        let th = catalog::theta(2, 1, 0);
        match split_seam_circle(&th, 0, false).unwrap() {
            SplitResult::Sum(sum) => {
                assert_eq!(sum.eval().unwrap(), eval_closed(&th).unwrap());
            }
            SplitResult::Zero => panic!("identity monodromy should split"),
        }
    }

    #[test]
    fn split_twisted_circle_is_zero() {
        let f = catalog::twisted_circle(Perm3::from_name("123").unwrap());
        assert!(matches!(split_seam_circle(&f, 0, true).unwrap(), SplitResult::Zero));
    }

    #[test]
    fn split_graph_circle_is_evaluation_neutral() {
        let f = catalog::annular_theta_graph(false);
        match split_seam_circle(&f, 0, false).unwrap() {
            SplitResult::Sum(sum) => {
                assert_eq!(sum.eval().unwrap(), eval_closed(&f).unwrap());
            }
            SplitResult::Zero => panic!(),
        }
    }

    #[test]
    fn cancel_rejects_bad_edges() {
        let th = catalog::theta(2, 1, 0);
        assert!(matches!(cancel_vertex_pair(&th, 0), Err(EvalError::Surgery(_))));
        let t2 = catalog::torus_two_disks();
        let err = cancel_vertex_pair(&t2, 0).unwrap_err();
        assert!(err.to_string().contains("SelfLoop"), "{}", err);
    }

    #[test]
    fn km_f0_has_nonorientable_facet() {
        let f0 = km_counterexample_reduced(&[0, 2]).unwrap();
        assert!(f0.validate().ok(), "{}", f0.validate());
        assert!(f0.vertices.is_empty());
        assert!(
            f0.facets.values().any(|f| !f.orientable),
            "the outer facet must become non-orientable"
        );
        assert_eq!(f0.degree(), 0);
    }

    #[test]
    fn km_f1_structure() {
        let f1 = km_counterexample_reduced(&[1, 3]).unwrap();
        assert!(f1.validate().ok(), "{}", f1.validate());
        assert!(f1.vertices.is_empty());
        assert!(f1.facets.values().all(|f| f.orientable));
        // Five seam circles, each with trivial monodromy.
        assert_eq!(f1.seams.len(), 5);
        for s in f1.seams.values() {
            match s {
                Seam::Circle { monodromy } => assert!(monodromy.is_identity()),
                _ => panic!("expected circles only"),
            }
        }
        assert_eq!(f1.degree(), 0);
    }

    #[test]
    fn cancel_preserves_evaluation_on_km() {
        let f = catalog::km_counterexample();
        let before = eval_closed(&f).unwrap();
        for e in [0u32, 1, 2, 3] {
            let after = cancel_vertex_pair(&f, e).unwrap();
            assert_eq!(eval_closed(&after).unwrap(), before, "edge {}", e);
        }
    }
}
