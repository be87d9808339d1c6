//! Closed pre-foams as combinatorial 2-complexes.
//!
//! A pre-foam is given by seam vertices, seams (open arcs between vertices
//! or circles), and facets. Every seam has three branch slots; facet
//! boundaries are cyclic words of letters, each letter covering one
//! `(seam, slot)` pair in a chosen direction. Surface types of facets are
//! stored explicitly (orientable + genus, or crosscap count) together with
//! the number of boundary words, which pins the Euler characteristic.

pub mod catalog;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub type VertexId = u32;
pub type SeamId = u32;
pub type FacetId = u32;

/// A permutation of {0,1,2}, used for circle-seam monodromy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Perm3(pub [u8; 3]);

impl Perm3 {
    pub const IDENTITY: Perm3 = Perm3([0, 1, 2]);

    pub fn is_identity(&self) -> bool {
        self.0 == [0, 1, 2]
    }

    /// Orbits of the permutation on {0,1,2}, each sorted, in order of their
    /// smallest element. Circle-seam slots are these orbits.
    pub fn orbits(&self) -> Vec<Vec<u8>> {
        let mut seen = [false; 3];
        let mut orbits = Vec::new();
        for start in 0..3u8 {
            if seen[start as usize] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut x = start;
            loop {
                seen[x as usize] = true;
                orbit.push(x);
                x = self.0[x as usize];
                if x == start {
                    break;
                }
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        orbits
    }

    pub fn name(&self) -> &'static str {
        match self.0 {
            [0, 1, 2] => "e",
            [1, 0, 2] => "12",
            [2, 1, 0] => "13",
            [0, 2, 1] => "23",
            [1, 2, 0] => "123",
            [2, 0, 1] => "132",
            _ => unreachable!(),
        }
    }

    pub fn from_name(s: &str) -> Option<Perm3> {
        let p = match s {
            "e" => [0, 1, 2],
            "12" => [1, 0, 2],
            "13" => [2, 1, 0],
            "23" => [0, 2, 1],
            "123" => [1, 2, 0],
            "132" => [2, 0, 1],
            _ => return None,
        };
        Some(Perm3(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Seam {
    /// An open seam arc from `ends.0` to `ends.1` (the intrinsic direction).
    /// The two endpoints may coincide (a loop at a vertex).
    Edge { ends: (VertexId, VertexId) },
    /// A seam circle. Nontrivial monodromy permutes the three local branch
    /// sheets after one turn; its slots are the orbits.
    Circle { monodromy: Perm3 },
}

impl Seam {
    pub fn slot_count(&self) -> usize {
        match self {
            Seam::Edge { .. } => 3,
            Seam::Circle { monodromy } => monodromy.orbits().len(),
        }
    }
}

/// One run of a facet boundary along a seam slot. `dir = +1` follows the
/// seam's intrinsic direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub seam: SeamId,
    pub slot: u8,
    pub dir: i8,
}

impl Letter {
    pub fn new(seam: SeamId, slot: u8, dir: i8) -> Self {
        Letter { seam, slot, dir }
    }

    pub fn reversed(&self) -> Letter {
        Letter { seam: self.seam, slot: self.slot, dir: -self.dir }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Facet {
    pub orientable: bool,
    /// Genus when orientable, crosscap count (>= 1) otherwise.
    pub genus_or_crosscaps: u32,
    /// Cyclic boundary words; a closed surface facet has none.
    pub boundary: Vec<Vec<Letter>>,
    pub dots: u32,
    pub triangles: u32,
    pub squares: u32,
}

impl Facet {
    pub fn closed_surface(orientable: bool, genus_or_crosscaps: u32) -> Self {
        Facet {
            orientable,
            genus_or_crosscaps,
            boundary: Vec::new(),
            dots: 0,
            triangles: 0,
            squares: 0,
        }
    }

    pub fn disk(word: Vec<Letter>) -> Self {
        Facet {
            orientable: true,
            genus_or_crosscaps: 0,
            boundary: vec![word],
            dots: 0,
            triangles: 0,
            squares: 0,
        }
    }

    pub fn with_dots(mut self, dots: u32) -> Self {
        self.dots = dots;
        self
    }

    /// Euler characteristic of the open facet (equal to that of the compact
    /// surface with boundary).
    pub fn euler(&self) -> i64 {
        let b = self.boundary.len() as i64;
        if self.orientable {
            2 - 2 * self.genus_or_crosscaps as i64 - b
        } else {
            2 - self.genus_or_crosscaps as i64 - b
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreFoam {
    pub vertices: BTreeSet<VertexId>,
    pub seams: BTreeMap<SeamId, Seam>,
    pub facets: BTreeMap<FacetId, Facet>,
    /// Advisory: the pre-foam is known to embed in 3-space. Never consulted
    /// by evaluation; gates only the flat-evaluation comparison tests.
    pub embedded: bool,
}

/// A facet 3-coloring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coloring(pub BTreeMap<FacetId, u8>);

impl Coloring {
    pub fn color(&self, f: FacetId) -> u8 {
        self.0[&f]
    }

    /// Act by a permutation of the colors {1,2,3}.
    pub fn permute(&self, perm: &[usize; 3]) -> Coloring {
        Coloring(
            self.0
                .iter()
                .map(|(&f, &c)| (f, perm[(c - 1) as usize] as u8 + 1))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceReport {
    pub pair: (u8, u8),
    pub euler: i64,
    pub orientable: bool,
    pub components: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            write!(f, "ok")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

/// Union-find with parity, used to decide orientability of glued surfaces.
struct ParityUnion {
    parent: Vec<usize>,
    /// Parity of the path to the parent.
    parity: Vec<u8>,
    consistent: bool,
}

impl ParityUnion {
    fn new(n: usize) -> Self {
        ParityUnion { parent: (0..n).collect(), parity: vec![0; n], consistent: true }
    }

    fn find(&mut self, x: usize) -> (usize, u8) {
        if self.parent[x] == x {
            return (x, 0);
        }
        let (root, p) = self.find(self.parent[x]);
        self.parent[x] = root;
        self.parity[x] ^= p;
        (root, self.parity[x])
    }

    /// Require `flip(a) ^ flip(b) = want`.
    fn union(&mut self, a: usize, b: usize, want: u8) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pa ^ pb != want {
                self.consistent = false;
            }
            return;
        }
        self.parent[ra] = rb;
        self.parity[ra] = pa ^ pb ^ want;
    }
}

impl PreFoam {
    pub fn empty() -> Self {
        PreFoam {
            vertices: BTreeSet::new(),
            seams: BTreeMap::new(),
            facets: BTreeMap::new(),
            embedded: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty() && self.seams.is_empty() && self.vertices.is_empty()
    }

    pub fn dot_count(&self) -> u32 {
        self.facets.values().map(|f| f.dots).sum()
    }

    pub fn has_decorations(&self) -> bool {
        self.facets.values().any(|f| f.triangles > 0 || f.squares > 0)
    }

    /// Euler characteristic of the seam 1-complex: each vertex is 4-valent,
    /// so edges are double the vertices and circles contribute nothing.
    pub fn seam_euler(&self) -> i64 {
        -(self.vertices.len() as i64)
    }

    /// Degree per the definition: `2 dots - 2 sum chi(f) + 3 vertices`,
    /// with each triangle counting -2 and each square -4.
    pub fn degree(&self) -> i64 {
        let chi: i64 = self.facets.values().map(|f| f.euler()).sum();
        let dots: i64 = self.dot_count() as i64;
        let tri: i64 = self.facets.values().map(|f| f.triangles as i64).sum();
        let sq: i64 = self.facets.values().map(|f| f.squares as i64).sum();
        2 * dots - 2 * chi + 3 * self.vertices.len() as i64 - 2 * tri - 4 * sq
    }

    /// The facet occupying each slot of each seam, or an error description
    /// of the coverage defect.
    pub fn slot_map(&self) -> Result<HashMap<(SeamId, u8), FacetId>, Vec<String>> {
        let mut map: HashMap<(SeamId, u8), Vec<FacetId>> = HashMap::new();
        for (&fid, facet) in &self.facets {
            for word in &facet.boundary {
                for letter in word {
                    map.entry((letter.seam, letter.slot)).or_default().push(fid);
                }
            }
        }
        let mut violations = Vec::new();
        let mut out = HashMap::new();
        for (&sid, seam) in &self.seams {
            for slot in 0..seam.slot_count() as u8 {
                match map.remove(&(sid, slot)) {
                    Some(fs) if fs.len() == 1 => {
                        out.insert((sid, slot), fs[0]);
                    }
                    Some(fs) => violations.push(format!(
                        "slot ({}, {}) multiply covered by facets {:?}",
                        sid, slot, fs
                    )),
                    None => violations.push(format!("slot ({}, {}) not covered", sid, slot)),
                }
            }
        }
        for ((sid, slot), fs) in map {
            violations.push(format!(
                "letters on nonexistent slot ({}, {}) from facets {:?}",
                sid, slot, fs
            ));
        }
        if violations.is_empty() {
            Ok(out)
        } else {
            Err(violations)
        }
    }

    /// Endpoint of a letter's traversal: the vertex where it starts/ends.
    /// Circle letters have no endpoints.
    fn letter_ends(&self, l: &Letter) -> Option<(VertexId, VertexId)> {
        match &self.seams[&l.seam] {
            Seam::Circle { .. } => None,
            Seam::Edge { ends } => {
                if l.dir > 0 {
                    Some(*ends)
                } else {
                    Some((ends.1, ends.0))
                }
            }
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        for (&fid, facet) in &self.facets {
            for word in &facet.boundary {
                if word.is_empty() {
                    report.violations.push(format!("facet {} has an empty boundary word", fid));
                }
                for l in word {
                    match self.seams.get(&l.seam) {
                        None => report
                            .violations
                            .push(format!("facet {} cites unknown seam {}", fid, l.seam)),
                        Some(s) => {
                            if (l.slot as usize) >= s.slot_count() {
                                report.violations.push(format!(
                                    "facet {} cites slot {} of seam {} (has {})",
                                    fid,
                                    l.slot,
                                    l.seam,
                                    s.slot_count()
                                ));
                            }
                            if l.dir != 1 && l.dir != -1 {
                                report
                                    .violations
                                    .push(format!("facet {} letter with dir {}", fid, l.dir));
                            }
                        }
                    }
                }
                // Circle letters stand alone; edge letters chain through
                // shared vertices.
                let has_circle = word
                    .iter()
                    .any(|l| matches!(self.seams.get(&l.seam), Some(Seam::Circle { .. })));
                if has_circle && word.len() != 1 {
                    report.violations.push(format!(
                        "facet {} mixes a circle letter into a longer word",
                        fid
                    ));
                } else if !has_circle && !word.is_empty() {
                    for (i, l) in word.iter().enumerate() {
                        let next = &word[(i + 1) % word.len()];
                        if let (Some((_, head)), Some((tail, _))) =
                            (self.letter_ends(l), self.letter_ends(next))
                        {
                            if head != tail {
                                report.violations.push(format!(
                                    "facet {} word not closed: seam {} ends at {}, seam {} starts at {}",
                                    fid, l.seam, head, next.seam, tail
                                ));
                            }
                        }
                    }
                }
            }
            if !facet.orientable && facet.genus_or_crosscaps == 0 {
                report
                    .violations
                    .push(format!("facet {} non-orientable with zero crosscaps", fid));
            }
        }

        if let Err(mut v) = self.slot_map() {
            report.violations.append(&mut v);
        }

        // Each vertex must see exactly four seam-edge ends.
        let mut valence: BTreeMap<VertexId, usize> = BTreeMap::new();
        for seam in self.seams.values() {
            if let Seam::Edge { ends } = seam {
                *valence.entry(ends.0).or_default() += 1;
                *valence.entry(ends.1).or_default() += 1;
            }
        }
        for &v in &self.vertices {
            let n = valence.get(&v).copied().unwrap_or(0);
            if n != 4 {
                report
                    .violations
                    .push(format!("vertex {} has {} seam ends, expected 4", v, n));
            }
        }
        for (v, _) in valence {
            if !self.vertices.contains(&v) {
                report.violations.push(format!("edge seam ends at undeclared vertex {}", v));
            }
        }

        report
    }

    /// The three facets bordering each seam, when pre-admissibility is
    /// possible at all (three slots on three distinct facets).
    fn seam_facets(&self) -> Option<BTreeMap<SeamId, Vec<FacetId>>> {
        let slots = self.slot_map().ok()?;
        let mut out = BTreeMap::new();
        for (&sid, seam) in &self.seams {
            let fs: Vec<FacetId> =
                (0..seam.slot_count() as u8).map(|s| slots[&(sid, s)]).collect();
            out.insert(sid, fs);
        }
        Some(out)
    }

    /// All pre-admissible colorings: three pairwise distinct colors at every
    /// seam. Deterministic order (facets by id, colors 1 < 2 < 3).
    pub fn preadmissible_colorings(&self) -> Vec<Coloring> {
        let seam_facets = match self.seam_facets() {
            Some(sf) => sf,
            None => return Vec::new(),
        };
        // A seam with fewer than three slots (nontrivial circle monodromy)
        // or with a repeated facet admits no pre-admissible coloring.
        for fs in seam_facets.values() {
            if fs.len() != 3 {
                return Vec::new();
            }
            if fs[0] == fs[1] || fs[0] == fs[2] || fs[1] == fs[2] {
                return Vec::new();
            }
        }
        let facet_ids: Vec<FacetId> = self.facets.keys().copied().collect();
        let index: HashMap<FacetId, usize> =
            facet_ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        // Constraints as facet-index triples.
        let triples: Vec<[usize; 3]> = seam_facets
            .values()
            .map(|fs| [index[&fs[0]], index[&fs[1]], index[&fs[2]]])
            .collect();
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); facet_ids.len()];
        for (ti, t) in triples.iter().enumerate() {
            for &f in t {
                touching[f].push(ti);
            }
        }
        let mut colors = vec![0u8; facet_ids.len()];
        let mut out = Vec::new();
        fn rec(
            i: usize,
            colors: &mut Vec<u8>,
            facet_ids: &[FacetId],
            triples: &[[usize; 3]],
            touching: &[Vec<usize>],
            out: &mut Vec<Coloring>,
        ) {
            if i == colors.len() {
                out.push(Coloring(
                    facet_ids.iter().enumerate().map(|(k, &f)| (f, colors[k])).collect(),
                ));
                return;
            }
            'next_color: for c in 1..=3u8 {
                colors[i] = c;
                for &ti in &touching[i] {
                    let t = triples[ti];
                    // Check pairwise distinctness among assigned entries.
                    for a in 0..3 {
                        for b in (a + 1)..3 {
                            let (fa, fb) = (t[a], t[b]);
                            if fa <= i && fb <= i && colors[fa] == colors[fb] {
                                colors[i] = 0;
                                continue 'next_color;
                            }
                        }
                    }
                }
                rec(i + 1, colors, facet_ids, triples, touching, out);
                colors[i] = 0;
            }
        }
        rec(0, &mut colors, &facet_ids, &triples, &touching, &mut out);
        out
    }

    /// The closed bicolored surface spanned by the facets colored `i` or
    /// `j`: Euler characteristic, orientability, component count.
    ///
    /// Orientability is decided from boundary-letter directions alone: two
    /// branches glued along a seam must traverse it in opposite directions
    /// once per-facet orientation flips are chosen.
    pub fn bicolored_surface(&self, c: &Coloring, pair: (u8, u8)) -> SurfaceReport {
        let (i, j) = pair;
        let slots = self.slot_map().expect("validated pre-foam");
        let in_union: Vec<FacetId> = self
            .facets
            .keys()
            .copied()
            .filter(|f| c.color(*f) == i || c.color(*f) == j)
            .collect();
        let index: HashMap<FacetId, usize> =
            in_union.iter().enumerate().map(|(k, &f)| (f, k)).collect();

        let euler: i64 =
            self.seam_euler() + in_union.iter().map(|f| self.facets[f].euler()).sum::<i64>();

        // Letters of union facets, keyed by (seam, slot).
        let mut letter_of: HashMap<(SeamId, u8), Letter> = HashMap::new();
        for &fid in &in_union {
            for word in &self.facets[&fid].boundary {
                for l in word {
                    letter_of.insert((l.seam, l.slot), *l);
                }
            }
        }

        let mut uf = ParityUnion::new(in_union.len());
        let mut plain = PlainUnion::new(in_union.len());
        let mut orientable = in_union.iter().all(|f| self.facets[f].orientable);
        for (&sid, seam) in &self.seams {
            // Exactly one branch of each color at a pre-admissible seam:
            // find the i- and j-colored slots.
            let mut pair_slots = Vec::new();
            for slot in 0..seam.slot_count() as u8 {
                let f = slots[&(sid, slot)];
                let col = c.color(f);
                if col == i || col == j {
                    pair_slots.push((slot, f));
                }
            }
            if pair_slots.len() != 2 {
                // Not a seam of this union (can happen only for degenerate
                // inputs); skip.
                continue;
            }
            let (s1, f1) = pair_slots[0];
            let (s2, f2) = pair_slots[1];
            plain.union(index[&f1], index[&f2]);
            let l1 = letter_of[&(sid, s1)];
            let l2 = letter_of[&(sid, s2)];
            // Gluing is orientation-consistent when induced directions are
            // opposite: flip(f1) ^ flip(f2) must equal 1 ^ (dir1 ^ dir2).
            let want = if l1.dir == l2.dir { 1 } else { 0 };
            uf.union(index[&f1], index[&f2], want);
        }
        if !uf.consistent {
            orientable = false;
        }
        SurfaceReport { pair: (i, j), euler, orientable, components: plain.count() }
    }

    /// Is the coloring admissible (all three bicolored surfaces orientable)?
    pub fn is_admissible(&self, c: &Coloring) -> bool {
        [(1, 2), (1, 3), (2, 3)]
            .into_iter()
            .all(|p| self.bicolored_surface(c, p).orientable)
    }

    pub fn admissible_colorings(&self) -> Vec<Coloring> {
        self.preadmissible_colorings()
            .into_iter()
            .filter(|c| self.is_admissible(c))
            .collect()
    }

    /// Admissible colorings whose `i`-colored facet set is exactly `s`.
    pub fn admissible_with_fixed(&self, i: u8, s: &BTreeSet<FacetId>) -> Vec<Coloring> {
        self.admissible_colorings()
            .into_iter()
            .filter(|c| {
                let set: BTreeSet<FacetId> = self
                    .facets
                    .keys()
                    .copied()
                    .filter(|f| c.color(*f) == i)
                    .collect();
                set == *s
            })
            .collect()
    }

    /// Connected components of the bicolored surface `F_jk(c)`, each as a
    /// sorted facet set.
    pub fn bicolored_components(&self, c: &Coloring, pair: (u8, u8)) -> Vec<BTreeSet<FacetId>> {
        let (j, k) = pair;
        let slots = self.slot_map().expect("validated pre-foam");
        let in_union: Vec<FacetId> = self
            .facets
            .keys()
            .copied()
            .filter(|f| c.color(*f) == j || c.color(*f) == k)
            .collect();
        let index: HashMap<FacetId, usize> =
            in_union.iter().enumerate().map(|(n, &f)| (f, n)).collect();
        let mut uf = PlainUnion::new(in_union.len());
        for (&sid, seam) in &self.seams {
            let mut members = Vec::new();
            for slot in 0..seam.slot_count() as u8 {
                let f = slots[&(sid, slot)];
                if index.contains_key(&f) {
                    members.push(index[&f]);
                }
            }
            for w in members.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let mut comps: BTreeMap<usize, BTreeSet<FacetId>> = BTreeMap::new();
        for (n, &f) in in_union.iter().enumerate() {
            comps.entry(uf.find(n)).or_default().insert(f);
        }
        comps.into_values().collect()
    }

    /// Perform the jk-Kempe move along the component containing
    /// `component_rep`, returning the swapped coloring and the integer by
    /// which `chi(F_ij)` changes.
    pub fn kempe_orbit(
        &self,
        c: &Coloring,
        pair: (u8, u8),
        component_rep: FacetId,
    ) -> Result<(Coloring, i64), String> {
        if !self.is_admissible(c) {
            return Err("NotAdmissible: a bicolored surface is non-orientable".into());
        }
        let (j, k) = pair;
        let i = (1..=3u8).find(|x| *x != j && *x != k).unwrap();
        let comps = self.bicolored_components(c, pair);
        let comp = comps
            .into_iter()
            .find(|s| s.contains(&component_rep))
            .ok_or_else(|| format!("facet {} is not in F_{}{}(c)", component_rep, j, k))?;
        let mut swapped = c.clone();
        for f in &comp {
            let col = c.color(*f);
            let new = if col == j { k } else { j };
            swapped.0.insert(*f, new);
        }
        let before = self.bicolored_surface(c, (i.min(j), i.max(j))).euler;
        let after = self.bicolored_surface(&swapped, (i.min(j), i.max(j))).euler;
        Ok((swapped, after - before))
    }

    /// Is the seam graph bipartite? Circles without vertices are ignored;
    /// an edge whose endpoints coincide is an odd cycle.
    pub fn seam_bipartite(&self) -> bool {
        let verts: Vec<VertexId> = self.vertices.iter().copied().collect();
        let index: HashMap<VertexId, usize> =
            verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf = ParityUnion::new(verts.len());
        for seam in self.seams.values() {
            if let Seam::Edge { ends } = seam {
                if ends.0 == ends.1 {
                    return false;
                }
                uf.union(index[&ends.0], index[&ends.1], 1);
            }
        }
        uf.consistent
    }

    /// Disjoint union, remapping ids of `other` above ours.
    pub fn disjoint_union(&self, other: &PreFoam) -> PreFoam {
        let mut out = self.clone();
        let voff = self.vertices.iter().max().map_or(0, |m| m + 1);
        let soff = self.seams.keys().max().map_or(0, |m| m + 1);
        let foff = self.facets.keys().max().map_or(0, |m| m + 1);
        for &v in &other.vertices {
            out.vertices.insert(v + voff);
        }
        for (&sid, seam) in &other.seams {
            let seam = match seam {
                Seam::Edge { ends } => Seam::Edge { ends: (ends.0 + voff, ends.1 + voff) },
                c => c.clone(),
            };
            out.seams.insert(sid + soff, seam);
        }
        for (&fid, facet) in &other.facets {
            let mut facet = facet.clone();
            for word in &mut facet.boundary {
                for l in word {
                    l.seam += soff;
                }
            }
            out.facets.insert(fid + foff, facet);
        }
        out.embedded = self.embedded && other.embedded;
        out
    }

    /// Connected components (facets joined through shared seams; an
    /// isolated seam with its facets is one component).
    pub fn components(&self) -> Vec<PreFoam> {
        let facet_ids: Vec<FacetId> = self.facets.keys().copied().collect();
        if facet_ids.is_empty() {
            return if self.is_empty() { Vec::new() } else { vec![self.clone()] };
        }
        let index: HashMap<FacetId, usize> =
            facet_ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut uf = PlainUnion::new(facet_ids.len());
        let slots = match self.slot_map() {
            Ok(s) => s,
            Err(_) => return vec![self.clone()],
        };
        for (&sid, seam) in &self.seams {
            let fs: Vec<usize> = (0..seam.slot_count() as u8)
                .map(|s| index[&slots[&(sid, s)]])
                .collect();
            for w in fs.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let mut groups: BTreeMap<usize, Vec<FacetId>> = BTreeMap::new();
        for (i, &f) in facet_ids.iter().enumerate() {
            groups.entry(uf.find(i)).or_default().push(f);
        }
        groups
            .into_values()
            .map(|fs| {
                let fset: BTreeSet<FacetId> = fs.iter().copied().collect();
                let mut sub = PreFoam::empty();
                sub.embedded = self.embedded;
                for &f in &fs {
                    sub.facets.insert(f, self.facets[&f].clone());
                }
                let used: BTreeSet<SeamId> = self
                    .facets
                    .iter()
                    .filter(|(f, _)| fset.contains(f))
                    .flat_map(|(_, facet)| {
                        facet.boundary.iter().flatten().map(|l| l.seam)
                    })
                    .collect();
                for &s in &used {
                    sub.seams.insert(s, self.seams[&s].clone());
                    if let Seam::Edge { ends } = &self.seams[&s] {
                        sub.vertices.insert(ends.0);
                        sub.vertices.insert(ends.1);
                    }
                }
                sub
            })
            .collect()
    }
}

/// Precomputed seam/slot structure for repeated surface computations
/// over many colorings of one pre-foam.
pub struct SurfaceContext<'a> {
    foam: &'a PreFoam,
    facet_ids: Vec<FacetId>,
    index: HashMap<FacetId, usize>,
    euler: Vec<i64>,
    orientable: Vec<bool>,
    /// Per seam: the three (facet index, letter direction) branches.
    seams: Vec<Vec<(usize, i8)>>,
    seam_euler: i64,
}

impl<'a> SurfaceContext<'a> {
    pub fn new(foam: &'a PreFoam) -> Option<SurfaceContext<'a>> {
        let slots = foam.slot_map().ok()?;
        let facet_ids: Vec<FacetId> = foam.facets.keys().copied().collect();
        let index: HashMap<FacetId, usize> =
            facet_ids.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut letter_of: HashMap<(SeamId, u8), i8> = HashMap::new();
        for facet in foam.facets.values() {
            for word in &facet.boundary {
                for l in word {
                    letter_of.insert((l.seam, l.slot), l.dir);
                }
            }
        }
        let mut seams = Vec::new();
        for (&sid, seam) in &foam.seams {
            let branches: Vec<(usize, i8)> = (0..seam.slot_count() as u8)
                .map(|slot| {
                    let f = slots[&(sid, slot)];
                    (index[&f], letter_of[&(sid, slot)])
                })
                .collect();
            seams.push(branches);
        }
        Some(SurfaceContext {
            foam,
            euler: facet_ids.iter().map(|f| foam.facets[f].euler()).collect(),
            orientable: facet_ids.iter().map(|f| foam.facets[f].orientable).collect(),
            index,
            facet_ids,
            seams,
            seam_euler: foam.seam_euler(),
        })
    }

    pub fn color_vector(&self, c: &Coloring) -> Vec<u8> {
        self.facet_ids.iter().map(|f| c.color(*f)).collect()
    }

    pub fn facet_ids(&self) -> &[FacetId] {
        &self.facet_ids
    }

    pub fn facet_index(&self, f: FacetId) -> usize {
        self.index[&f]
    }

    pub fn foam(&self) -> &PreFoam {
        self.foam
    }

    /// Euler characteristic and orientability of the bicolored surface.
    pub fn surface(&self, colors: &[u8], pair: (u8, u8)) -> (i64, bool) {
        let (i, j) = pair;
        let euler: i64 = self.seam_euler
            + colors
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == i || c == j)
                .map(|(k, _)| self.euler[k])
                .sum::<i64>();
        let n = colors.len();
        let mut uf = ParityUnion::new(n);
        let mut orientable = colors
            .iter()
            .enumerate()
            .all(|(k, &c)| (c != i && c != j) || self.orientable[k]);
        for branches in &self.seams {
            let mut picked: [(usize, i8); 2] = [(usize::MAX, 0); 2];
            let mut found = 0;
            for &(f, d) in branches {
                let c = colors[f];
                if c == i || c == j {
                    if found < 2 {
                        picked[found] = (f, d);
                    }
                    found += 1;
                }
            }
            if found != 2 {
                continue;
            }
            let want = if picked[0].1 == picked[1].1 { 1 } else { 0 };
            uf.union(picked[0].0, picked[1].0, want);
        }
        if !uf.consistent {
            orientable = false;
        }
        (euler, orientable)
    }

    pub fn admissible(&self, colors: &[u8]) -> bool {
        [(1u8, 2u8), (1, 3), (2, 3)]
            .into_iter()
            .all(|p| self.surface(colors, p).1)
    }
}

/// Plain union-find for component counting.
struct PlainUnion {
    parent: Vec<usize>,
}

impl PlainUnion {
    fn new(n: usize) -> Self {
        PlainUnion { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] == x {
            x
        } else {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
            r
        }
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn count(&mut self) -> usize {
        let n = self.parent.len();
        let roots: BTreeSet<usize> = (0..n).map(|i| self.find(i)).collect();
        roots.len()
    }
}

#[cfg(test)]
mod tests {
    use super::catalog;
    use super::*;

    #[test]
    fn theta_validates_and_colors() {
        let theta = catalog::theta(2, 1, 0);
        assert!(theta.validate().ok());
        assert_eq!(theta.degree(), 0);
        let cols = theta.preadmissible_colorings();
        assert_eq!(cols.len(), 6);
        assert_eq!(theta.admissible_colorings().len(), 6);
        for c in &cols {
            for pair in [(1, 2), (1, 3), (2, 3)] {
                let r = theta.bicolored_surface(c, pair);
                assert_eq!(r.euler, 2);
                assert!(r.orientable);
                assert_eq!(r.components, 1);
            }
        }
    }

    #[test]
    fn sphere_basics() {
        let s = catalog::sphere(2);
        assert!(s.validate().ok());
        assert_eq!(s.degree(), 0);
        assert_eq!(s.preadmissible_colorings().len(), 3);
        let s5 = catalog::sphere(5);
        assert_eq!(s5.degree(), 2 * 5 - 4);
    }

    #[test]
    fn monodromy_kills_colorings() {
        // Tripod times interval glued by a 3-cycle plus one disk.
        let f = catalog::twisted_circle(Perm3::from_name("123").unwrap());
        assert!(f.validate().ok());
        assert!(f.preadmissible_colorings().is_empty());
    }

    #[test]
    fn multiply_covered_slot_reported() {
        let mut f = catalog::theta(0, 0, 0);
        // Make facet 1 also claim facet 0's slot.
        let extra = Letter::new(0, 0, 1);
        f.facets.get_mut(&1).unwrap().boundary[0].push(extra);
        let report = f.validate();
        assert!(!report.ok());
        assert!(report.violations.iter().any(|v| v.contains("multiply covered")));
    }

    #[test]
    fn circle_orbit_mismatch_reported() {
        let mut f = catalog::theta(0, 0, 0);
        // A 3-cycle monodromy leaves one orbit, so slots 1 and 2 vanish.
        f.seams.insert(0, Seam::Circle { monodromy: Perm3::from_name("123").unwrap() });
        let report = f.validate();
        assert!(!report.ok());
    }

    #[test]
    fn theta_kempe_counts() {
        let theta = catalog::theta(2, 1, 0);
        // Fixing the 1-colored facet leaves a 2-sphere; adm(F, 1=S) has 2^1
        // elements.
        let mut s = BTreeSet::new();
        s.insert(0u32);
        assert_eq!(theta.admissible_with_fixed(1, &s).len(), 2);
        // Kempe swap of (2,3) keeps both remaining spheres, so ell = 0.
        let cols = theta.admissible_colorings();
        let c = cols.iter().find(|c| c.color(0) == 1).unwrap();
        let (swapped, ell) = theta.kempe_orbit(c, (2, 3), 1).unwrap();
        assert_eq!(ell, 0);
        assert_eq!(swapped.color(0), 1);
        assert_ne!(swapped.color(1), c.color(1));
        // Kempe involution negates ell.
        let (back, ell2) = theta.kempe_orbit(&swapped, (2, 3), 1).unwrap();
        assert_eq!(back, *c);
        assert_eq!(ell2, -ell);
    }

    #[test]
    fn seam_bipartite_cases() {
        assert!(catalog::theta(0, 0, 0).seam_bipartite());
        // A hand-built 3-cycle of seam edges is odd.
        let mut f = PreFoam::empty();
        f.vertices.extend([0, 1, 2]);
        f.seams.insert(0, Seam::Edge { ends: (0, 1) });
        f.seams.insert(1, Seam::Edge { ends: (1, 2) });
        f.seams.insert(2, Seam::Edge { ends: (2, 0) });
        assert!(!f.seam_bipartite());
    }

    #[test]
    fn s3_acts_on_colorings() {
        let theta = catalog::theta(2, 1, 0);
        let cols: BTreeSet<Coloring> = theta.preadmissible_colorings().into_iter().collect();
        for perm in [[1usize, 0, 2], [0, 2, 1], [1, 2, 0]] {
            for c in &cols {
                assert!(cols.contains(&c.permute(&perm)));
            }
        }
        assert_eq!(cols.len() % 6, 0);
    }

    #[test]
    fn klein_four_disks_colorings() {
        let f = catalog::klein_four_disks();
        assert!(f.validate().ok(), "{}", f.validate());
        let pre = f.preadmissible_colorings();
        let adm = f.admissible_colorings();
        assert!(!adm.is_empty(), "paper exhibits an admissible coloring");
        assert!(adm.len() < pre.len(), "paper exhibits a pre-admissible non-admissible coloring");
        // The all-disks-1, annuli-2/3-alternating coloring is pre-admissible
        // and its (2,3) surface is the Klein bottle.
        let c = pre
            .iter()
            .find(|c| {
                (0..4).all(|d| c.color(d) == 1)
                    && c.color(4) == 2
                    && c.color(5) == 3
                    && c.color(6) == 2
                    && c.color(7) == 3
            })
            .expect("alternating coloring is pre-admissible");
        let r = f.bicolored_surface(c, (2, 3));
        assert_eq!(r.euler, 0);
        assert!(!r.orientable);
    }

    #[test]
    fn torus_two_disks_has_no_colorings() {
        let f = catalog::torus_two_disks();
        assert!(f.validate().ok(), "{}", f.validate());
        assert_eq!(f.vertices.len(), 1);
        assert!(f.preadmissible_colorings().is_empty());
    }

    #[test]
    fn web_times_circle_theta_graph() {
        // Theta graph times a circle: all bicolored surfaces are tori.
        let f = catalog::annular_theta_graph(false);
        assert!(f.validate().ok(), "{}", f.validate());
        let adm = f.admissible_colorings();
        // Tait colorings of the theta graph: 6.
        assert_eq!(adm.len(), 6);
        for c in &adm {
            for pair in [(1, 2), (1, 3), (2, 3)] {
                let r = f.bicolored_surface(c, pair);
                assert_eq!(r.euler, 0);
                assert!(r.orientable);
            }
        }
        assert_eq!(f.degree(), 0);
    }

    #[test]
    fn annular_klein_class_is_preadmissible_but_not_admissible() {
        let f = catalog::annular_theta_graph(true);
        assert!(f.validate().ok());
        let pre = f.preadmissible_colorings();
        assert_eq!(pre.len(), 6);
        assert!(f.admissible_colorings().is_empty());
    }

    #[test]
    fn km_counterexample_structure() {
        let f = catalog::km_counterexample();
        assert!(f.validate().ok(), "{}", f.validate());
        assert_eq!(f.vertices.len(), 4);
        assert_eq!(f.seams.len(), 8);
        assert_eq!(f.facets.len(), 8);
        let disks = f.facets.values().filter(|fc| fc.euler() == 1).count();
        let annuli = f.facets.values().filter(|fc| fc.euler() == 0).count();
        assert_eq!((disks, annuli), (7, 1));
        assert_eq!(f.dot_count(), 1);
        assert_eq!(f.degree(), 0);
        assert!(f.seam_bipartite());
        assert!(!f.embedded);
        // The Klein-bottle coloring from the construction is pre-admissible
        // but not admissible.
        let pre = f.preadmissible_colorings();
        assert!(pre.iter().any(|c| !f.is_admissible(c)));
    }

    #[test]
    fn degree_from_surfaces_identity() {
        // deg(F) = 2 dots - sum chi(F_ij(c)) for every admissible coloring.
        for f in [
            catalog::theta(2, 1, 0),
            catalog::theta(4, 2, 0),
            catalog::sphere(3),
            catalog::annular_theta_graph(false),
            catalog::closed_surface(1, 0),
        ] {
            for c in f.admissible_colorings() {
                let chi_sum: i64 = [(1, 2), (1, 3), (2, 3)]
                    .into_iter()
                    .map(|p| f.bicolored_surface(&c, p).euler)
                    .sum();
                assert_eq!(f.degree(), 2 * f.dot_count() as i64 - chi_sum);
            }
        }
    }
}
