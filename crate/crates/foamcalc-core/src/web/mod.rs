//! Planar trivalent graphs (webs) as combinatorial maps: a fixed-point-free
//! pairing on half-edges together with a rotation system whose cycles are
//! the counterclockwise half-edge orders at vertices, plus a count of
//! vertexless free loops. Faces are the orbits of rotation-after-pairing;
//! planarity is the per-component Euler test.

use crate::prefoam::PreFoam;
use crate::ring::LaurentInt;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub type HalfEdge = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Web {
    /// Fixed-point-free involution pairing half-edges into edges.
    pub pairing: Vec<HalfEdge>,
    /// Permutation whose cycles (all of length 3) are the vertices.
    pub rotation: Vec<HalfEdge>,
    pub free_loops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WebError {
    NotInvolution(String),
    NotTrivalent(String),
    NotPlanar(String),
    BadSite(String),
    Irreducible,
}

impl fmt::Display for WebError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WebError::NotInvolution(s) => write!(f, "pairing is not an involution: {}", s),
            WebError::NotTrivalent(s) => write!(f, "rotation is not trivalent: {}", s),
            WebError::NotPlanar(s) => write!(f, "not planar: {}", s),
            WebError::BadSite(s) => write!(f, "bad site: {}", s),
            WebError::Irreducible => write!(f, "irreducible: every face has five or more sides"),
        }
    }
}

impl std::error::Error for WebError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebReport {
    /// Face sizes (number of half-edge sides), including the outer face.
    pub face_sizes: Vec<usize>,
    pub bipartite: bool,
    /// Edges (smaller half-edge id) whose removal disconnects the web.
    pub bridges: Vec<HalfEdge>,
    pub components: usize,
}

/// A Tait coloring: edge colors indexed by the smaller half-edge of each
/// edge, then one color per free loop.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TaitColoring {
    pub edge_colors: BTreeMap<HalfEdge, u8>,
    pub loop_colors: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReductionKind {
    Bridge,
    Circle,
    Digon,
    Triangle,
    Square,
}

#[derive(Debug, Clone)]
pub struct ReductionStep {
    pub kind: ReductionKind,
    /// A face representative (smallest half-edge) or the bridge half-edge.
    pub site: Option<HalfEdge>,
    /// One smaller web per smoothing; empty for a bridge.
    pub results: Vec<Web>,
}

impl Web {
    pub fn empty() -> Web {
        Web { pairing: Vec::new(), rotation: Vec::new(), free_loops: 0 }
    }

    pub fn loops(n: usize) -> Web {
        Web { pairing: Vec::new(), rotation: Vec::new(), free_loops: n }
    }

    /// Build from a vertex list: each vertex is its three half-edges in
    /// counterclockwise order; `pairing[h]` as given.
    pub fn from_vertices(vertices: &[[HalfEdge; 3]], pairing: &[(HalfEdge, HalfEdge)]) -> Web {
        let n = vertices.len() * 3;
        let mut rot = vec![0; n];
        for v in vertices {
            rot[v[0]] = v[1];
            rot[v[1]] = v[2];
            rot[v[2]] = v[0];
        }
        let mut pair = vec![0; n];
        for &(a, b) in pairing {
            pair[a] = b;
            pair[b] = a;
        }
        Web { pairing: pair, rotation: rot, free_loops: 0 }
    }

    /// Build from edge identifiers: vertex `k` lists the ids of its three
    /// incident edges in counterclockwise order (a self-loop appears
    /// twice). Half-edge `3k + j` is slot `j` of vertex `k`.
    pub fn from_edge_rotations(vertices: &[[usize; 3]]) -> Web {
        let n = vertices.len() * 3;
        let mut rot = vec![0; n];
        let mut by_edge: BTreeMap<usize, Vec<HalfEdge>> = BTreeMap::new();
        for (k, v) in vertices.iter().enumerate() {
            for j in 0..3 {
                rot[3 * k + j] = 3 * k + (j + 1) % 3;
                by_edge.entry(v[j]).or_default().push(3 * k + j);
            }
        }
        let mut pair = vec![usize::MAX; n];
        for (e, hs) in by_edge {
            assert_eq!(hs.len(), 2, "edge {} must appear exactly twice", e);
            pair[hs[0]] = hs[1];
            pair[hs[1]] = hs[0];
        }
        Web { pairing: pair, rotation: rot, free_loops: 0 }
    }

    pub fn half_edge_count(&self) -> usize {
        self.pairing.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.half_edge_count() / 3
    }

    pub fn edge_count(&self) -> usize {
        self.half_edge_count() / 2
    }

    /// Vertices as rotation cycles, each starting at its smallest member.
    pub fn vertices(&self) -> Vec<[HalfEdge; 3]> {
        let mut seen = vec![false; self.half_edge_count()];
        let mut out = Vec::new();
        for h in 0..self.half_edge_count() {
            if seen[h] {
                continue;
            }
            let a = h;
            let b = self.rotation[a];
            let c = self.rotation[b];
            seen[a] = true;
            seen[b] = true;
            seen[c] = true;
            out.push([a, b, c]);
        }
        out
    }

    /// The vertex (cycle start) containing a half-edge.
    pub fn vertex_of(&self, h: HalfEdge) -> HalfEdge {
        let mut m = h;
        let mut cur = self.rotation[h];
        while cur != h {
            m = m.min(cur);
            cur = self.rotation[cur];
        }
        m
    }

    /// Canonical edge representative.
    pub fn edge_of(&self, h: HalfEdge) -> HalfEdge {
        h.min(self.pairing[h])
    }

    pub fn edges(&self) -> Vec<HalfEdge> {
        (0..self.half_edge_count()).filter(|&h| h < self.pairing[h]).collect()
    }

    pub fn validate(&self) -> Result<(), WebError> {
        let n = self.half_edge_count();
        if self.rotation.len() != n {
            return Err(WebError::NotTrivalent("rotation length mismatch".into()));
        }
        if n % 2 != 0 {
            return Err(WebError::NotInvolution("odd half-edge count".into()));
        }
        for h in 0..n {
            if self.pairing[h] >= n || self.pairing[self.pairing[h]] != h || self.pairing[h] == h
            {
                return Err(WebError::NotInvolution(format!("at half-edge {}", h)));
            }
            if self.rotation[h] >= n {
                return Err(WebError::NotTrivalent(format!("at half-edge {}", h)));
            }
        }
        // All rotation cycles must have length 3.
        let mut seen = vec![false; n];
        for h in 0..n {
            if seen[h] {
                continue;
            }
            let mut len = 0;
            let mut cur = h;
            loop {
                seen[cur] = true;
                len += 1;
                cur = self.rotation[cur];
                if cur == h {
                    break;
                }
                if len > 3 {
                    break;
                }
            }
            if len != 3 {
                return Err(WebError::NotTrivalent(format!(
                    "rotation cycle through {} has length {}",
                    h, len
                )));
            }
        }
        // Euler test per connected component: V - E + F = 2.
        let comps = self.component_ids();
        let ncomp = comps.iter().copied().max().map_or(0, |m| m + 1);
        let mut v = vec![0i64; ncomp];
        let mut e = vec![0i64; ncomp];
        let mut fc = vec![0i64; ncomp];
        for vert in self.vertices() {
            v[comps[vert[0]]] += 1;
        }
        for h in self.edges() {
            e[comps[h]] += 1;
        }
        for face in self.faces() {
            fc[comps[face[0]]] += 1;
        }
        for k in 0..ncomp {
            if v[k] - e[k] + fc[k] != 2 {
                return Err(WebError::NotPlanar(format!(
                    "component {}: V - E + F = {}",
                    k,
                    v[k] - e[k] + fc[k]
                )));
            }
        }
        Ok(())
    }

    fn component_ids(&self) -> Vec<usize> {
        let n = self.half_edge_count();
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        for h in 0..n {
            if id[h] != usize::MAX {
                continue;
            }
            let mut stack = vec![h];
            while let Some(x) = stack.pop() {
                if id[x] != usize::MAX {
                    continue;
                }
                id[x] = next;
                stack.push(self.pairing[x]);
                stack.push(self.rotation[x]);
            }
            next += 1;
        }
        id
    }

    /// Faces as orbits of `rotation . pairing`, each starting at its
    /// smallest half-edge.
    pub fn faces(&self) -> Vec<Vec<HalfEdge>> {
        let n = self.half_edge_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for h in 0..n {
            if seen[h] {
                continue;
            }
            let mut face = Vec::new();
            let mut cur = h;
            loop {
                seen[cur] = true;
                face.push(cur);
                cur = self.rotation[self.pairing[cur]];
                if cur == h {
                    break;
                }
            }
            out.push(face);
        }
        out
    }

    pub fn analyze(&self) -> Result<WebReport, WebError> {
        self.validate()?;
        let face_sizes = self.faces().iter().map(|f| f.len()).collect();
        // Bipartiteness of the vertex graph.
        let verts = self.vertices();
        let vid: HashMap<HalfEdge, usize> = verts
            .iter()
            .enumerate()
            .flat_map(|(i, v)| v.iter().map(move |&h| (h, i)))
            .collect();
        let mut color = vec![-1i8; verts.len()];
        let mut bipartite = true;
        for start in 0..verts.len() {
            if color[start] != -1 {
                continue;
            }
            color[start] = 0;
            let mut queue = vec![start];
            while let Some(u) = queue.pop() {
                for &h in &verts[u] {
                    let w = vid[&self.pairing[h]];
                    if color[w] == -1 {
                        color[w] = 1 - color[u];
                        queue.push(w);
                    } else if color[w] == color[u] {
                        bipartite = false;
                    }
                }
            }
        }
        // Bridges: an edge is a bridge iff its two sides lie on the same
        // face (removing it would disconnect or dangle).
        let faces = self.faces();
        let mut face_of: HashMap<HalfEdge, usize> = HashMap::new();
        for (i, f) in faces.iter().enumerate() {
            for &h in f {
                face_of.insert(h, i);
            }
        }
        let bridges: Vec<HalfEdge> = self
            .edges()
            .into_iter()
            .filter(|&h| face_of[&h] == face_of[&self.pairing[h]])
            .collect();
        let components = self
            .component_ids()
            .iter()
            .copied()
            .max()
            .map_or(0, |m| m + 1)
            + self.free_loops;
        Ok(WebReport { face_sizes, bipartite, bridges, components })
    }

    /// All Tait colorings, in lexicographic order on (edges, loops).
    pub fn tait_colorings(&self) -> Vec<TaitColoring> {
        let edges = self.edges();
        let verts = self.vertices();
        let eidx: HashMap<HalfEdge, usize> =
            edges.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let vert_edges: Vec<[usize; 3]> = verts
            .iter()
            .map(|v| {
                [
                    eidx[&self.edge_of(v[0])],
                    eidx[&self.edge_of(v[1])],
                    eidx[&self.edge_of(v[2])],
                ]
            })
            .collect();
        let mut colors = vec![0u8; edges.len()];
        let mut out = Vec::new();
        fn rec(
            i: usize,
            colors: &mut Vec<u8>,
            vert_edges: &[[usize; 3]],
            out: &mut Vec<Vec<u8>>,
        ) {
            if i == colors.len() {
                out.push(colors.clone());
                return;
            }
            'colors: for c in 1..=3u8 {
                colors[i] = c;
                for t in vert_edges {
                    // A vertex incident to the same edge twice can never be
                    // properly colored.
                    if t[0] == t[1] || t[0] == t[2] || t[1] == t[2] {
                        colors[i] = 0;
                        continue 'colors;
                    }
                    for a in 0..3 {
                        for b in (a + 1)..3 {
                            let (x, y) = (t[a], t[b]);
                            if x <= i && y <= i && colors[x] == colors[y] {
                                colors[i] = 0;
                                continue 'colors;
                            }
                        }
                    }
                }
                rec(i + 1, colors, vert_edges, out);
                colors[i] = 0;
            }
        }
        if edges.is_empty() {
            // Only loops.
            let mut loop_assignments = vec![Vec::new()];
            for _ in 0..self.free_loops {
                loop_assignments = loop_assignments
                    .into_iter()
                    .flat_map(|base: Vec<u8>| {
                        (1..=3u8).map(move |c| {
                            let mut v = base.clone();
                            v.push(c);
                            v
                        })
                    })
                    .collect();
            }
            return loop_assignments
                .into_iter()
                .map(|loops| TaitColoring { edge_colors: BTreeMap::new(), loop_colors: loops })
                .collect();
        }
        rec(0, &mut colors, &vert_edges, &mut out);
        let mut full = Vec::new();
        for assignment in out {
            let base: BTreeMap<HalfEdge, u8> = edges
                .iter()
                .enumerate()
                .map(|(i, &h)| (h, assignment[i]))
                .collect();
            let mut loops = vec![Vec::new()];
            for _ in 0..self.free_loops {
                loops = loops
                    .into_iter()
                    .flat_map(|b: Vec<u8>| {
                        (1..=3u8).map(move |c| {
                            let mut v = b.clone();
                            v.push(c);
                            v
                        })
                    })
                    .collect();
            }
            for l in loops {
                full.push(TaitColoring { edge_colors: base.clone(), loop_colors: l });
            }
        }
        full.sort();
        full
    }

    pub fn tait_count(&self) -> usize {
        self.tait_colorings().len()
    }

    /// Where a deleted half's strand ended up after a rebuild: on a
    /// surviving half-edge, or closed into a fresh free loop.
    pub(crate) fn strand_after_rebuild(
        &self,
        delete_halves: &BTreeSet<HalfEdge>,
        splices: &[(HalfEdge, HalfEdge)],
        probe: HalfEdge,
    ) -> Option<HalfEdge> {
        let splice_map: HashMap<HalfEdge, HalfEdge> =
            splices.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        let survivors: Vec<HalfEdge> =
            (0..self.half_edge_count()).filter(|h| !delete_halves.contains(h)).collect();
        let relabel: HashMap<HalfEdge, usize> =
            survivors.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        // Walk outward from the probe across deleted material.
        let mut partner = self.pairing[probe];
        let mut steps = 0;
        while delete_halves.contains(&partner) {
            let next = *splice_map.get(&partner)?;
            partner = self.pairing[next];
            steps += 1;
            if steps > self.half_edge_count() {
                return None;
            }
        }
        relabel.get(&partner).copied()
    }

    /// Delete a set of edges and a set of vertices, then splice the
    /// dangling pairs listed in `splices`; relabels half-edges compactly.
    /// Each splice joins the outer partners of two deleted half-edges.
    fn rebuild(
        &self,
        delete_halves: &BTreeSet<HalfEdge>,
        splices: &[(HalfEdge, HalfEdge)],
        extra_loops: usize,
    ) -> Web {
        // Follow splice chains to find surviving partners.
        let splice_map: HashMap<HalfEdge, HalfEdge> = splices
            .iter()
            .flat_map(|&(a, b)| [(a, b), (b, a)])
            .collect();
        let n = self.half_edge_count();
        let survivors: Vec<HalfEdge> =
            (0..n).filter(|h| !delete_halves.contains(h)).collect();
        let relabel: HashMap<HalfEdge, usize> =
            survivors.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let mut loops = self.free_loops + extra_loops;
        let mut pairing = vec![usize::MAX; survivors.len()];
        for &h in &survivors {
            if pairing[relabel[&h]] != usize::MAX {
                continue;
            }
            // Walk across deleted edges via splices.
            let mut partner = self.pairing[h];
            let mut steps = 0;
            while delete_halves.contains(&partner) {
                let Some(&next) = splice_map.get(&partner) else { break };
                partner = self.pairing[next];
                steps += 1;
                assert!(steps <= n, "splice chain cycle");
            }
            if delete_halves.contains(&partner) {
                continue;
            }
            if partner == h {
                // The chain closed on itself: a free loop is born. This
                // happens when a splice chain returns without surviving
                // half-edges, handled below.
                continue;
            }
            pairing[relabel[&h]] = relabel[&partner];
            pairing[relabel[&partner]] = relabel[&h];
        }
        // Splice chains entirely within deleted halves form free loops.
        let mut seen: BTreeSet<HalfEdge> = BTreeSet::new();
        for &(a, _) in splices {
            if seen.contains(&a) {
                continue;
            }
            // Walk the closed chain a -> pairing -> splice -> ...
            let mut cur = a;
            let mut closed = true;
            let mut chain = vec![];
            loop {
                chain.push(cur);
                let p = self.pairing[cur];
                if !delete_halves.contains(&p) {
                    closed = false;
                    break;
                }
                match splice_map.get(&p) {
                    Some(&nx) => {
                        chain.push(p);
                        cur = nx;
                    }
                    None => {
                        closed = false;
                        break;
                    }
                }
                if cur == a {
                    break;
                }
            }
            if closed && chain.iter().all(|h| delete_halves.contains(h)) {
                for h in &chain {
                    seen.insert(*h);
                }
                loops += 1;
            }
        }
        let mut rotation = vec![usize::MAX; survivors.len()];
        for &h in &survivors {
            let mut nx = self.rotation[h];
            // Rotation cycles of surviving vertices never contain deleted
            // half-edges (whole vertices are deleted), but guard anyway.
            let mut steps = 0;
            while delete_halves.contains(&nx) {
                nx = self.rotation[nx];
                steps += 1;
                assert!(steps <= n);
            }
            rotation[relabel[&h]] = relabel[&nx];
        }
        Web { pairing, rotation, free_loops: loops }
    }

    /// First applicable reduction, scanning Bridge, Circle, Digon,
    /// Triangle, Square; faces in order of smallest half-edge.
    pub fn find_reduction(&self) -> Option<ReductionStep> {
        let report = self.analyze().ok()?;
        if let Some(&b) = report.bridges.first() {
            return Some(ReductionStep { kind: ReductionKind::Bridge, site: Some(b), results: vec![] });
        }
        if self.free_loops > 0 {
            let mut w = self.clone();
            w.free_loops -= 1;
            return Some(ReductionStep { kind: ReductionKind::Circle, site: None, results: vec![w] });
        }
        let faces = self.faces();
        // Digon.
        for face in &faces {
            if face.len() == 2 {
                let result = self.remove_digon(face);
                return Some(ReductionStep {
                    kind: ReductionKind::Digon,
                    site: Some(face[0]),
                    results: vec![result],
                });
            }
        }
        // Triangle.
        for face in &faces {
            if face.len() == 3 && self.face_is_simple(face) {
                let result = self.contract_triangle(face);
                return Some(ReductionStep {
                    kind: ReductionKind::Triangle,
                    site: Some(face[0]),
                    results: vec![result],
                });
            }
        }
        // Square.
        for face in &faces {
            if face.len() == 4 && self.face_is_simple(face) {
                let (a, b) = self.smooth_square(face);
                return Some(ReductionStep {
                    kind: ReductionKind::Square,
                    site: Some(face[0]),
                    results: vec![a, b],
                });
            }
        }
        None
    }

    /// A face is simple when its sides lie on pairwise distinct vertices.
    fn face_is_simple(&self, face: &[HalfEdge]) -> bool {
        let vs: BTreeSet<HalfEdge> = face.iter().map(|&h| self.vertex_of(h)).collect();
        vs.len() == face.len()
    }

    /// Remove a digon face: delete its two vertices and both digon edges,
    /// splicing the two external edges.
    fn remove_digon(&self, face: &[HalfEdge]) -> Web {
        let (h1, h2) = (face[0], face[1]);
        let v1 = [h1, self.rotation[h1], self.rotation[self.rotation[h1]]];
        let v2 = [h2, self.rotation[h2], self.rotation[self.rotation[h2]]];
        let mut delete: BTreeSet<HalfEdge> = BTreeSet::new();
        delete.extend(v1);
        delete.extend(v2);
        // The digon's own half-edges at each vertex are those paired into
        // the face; the third half-edge is external.
        let digon_pairs: BTreeSet<HalfEdge> =
            [h1, h2, self.pairing[h1], self.pairing[h2]].into_iter().collect();
        let ext1 = v1.into_iter().find(|h| !digon_pairs.contains(h)).unwrap();
        let ext2 = v2.into_iter().find(|h| !digon_pairs.contains(h)).unwrap();
        self.rebuild(&delete, &[(ext1, ext2)], 0)
    }

    /// Contract a simple triangle face to a single vertex.
    fn contract_triangle(&self, face: &[HalfEdge]) -> Web {
        // face = [a, b, c] in face order; each side h sits at a vertex
        // with an external half-edge.
        let n = self.half_edge_count();
        let mut delete: BTreeSet<HalfEdge> = BTreeSet::new();
        let mut externals = Vec::new();
        for &h in face {
            let v = [h, self.rotation[h], self.rotation[self.rotation[h]]];
            delete.extend(v);
            let tri_halves: BTreeSet<HalfEdge> = face
                .iter()
                .flat_map(|&x| [x, self.pairing[x]])
                .collect();
            externals.push(v.into_iter().find(|x| !tri_halves.contains(x)).unwrap());
        }
        // New vertex with three fresh half-edges in face order, paired to
        // the partners of the externals.
        let survivors: Vec<HalfEdge> = (0..n).filter(|h| !delete.contains(h)).collect();
        let relabel: HashMap<HalfEdge, usize> =
            survivors.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let base = survivors.len();
        let mut pairing = vec![usize::MAX; base + 3];
        let mut rotation = vec![usize::MAX; base + 3];
        for &h in &survivors {
            let p = self.pairing[h];
            if let Some(&rp) = relabel.get(&p) {
                pairing[relabel[&h]] = rp;
            }
            rotation[relabel[&h]] = relabel[&self.rotation[h]];
        }
        for (k, &ext) in externals.iter().enumerate() {
            let outer = self.pairing[ext];
            pairing[base + k] = relabel[&outer];
            pairing[relabel[&outer]] = base + k;
            // The face orbit runs opposite to the vertex rotations, so the
            // contracted vertex sees the externals in reversed face order.
            rotation[base + k] = base + (k + 2) % 3;
        }
        Web { pairing, rotation, free_loops: self.free_loops }
    }

    /// The two smoothings of a simple square face: splice adjacent
    /// external legs around the face, in the two planar ways.
    fn smooth_square(&self, face: &[HalfEdge]) -> (Web, Web) {
        let mut delete: BTreeSet<HalfEdge> = BTreeSet::new();
        let mut externals = Vec::new();
        for &h in face {
            let v = [h, self.rotation[h], self.rotation[self.rotation[h]]];
            delete.extend(v);
            let sq_halves: BTreeSet<HalfEdge> = face
                .iter()
                .flat_map(|&x| [x, self.pairing[x]])
                .collect();
            externals.push(v.into_iter().find(|x| !sq_halves.contains(x)).unwrap());
        }
        // externals[k] belongs to the vertex of face side k; adjacent
        // vertices around the face are consecutive.
        let a = self.rebuild(
            &delete,
            &[(externals[0], externals[1]), (externals[2], externals[3])],
            0,
        );
        let b = self.rebuild(
            &delete,
            &[(externals[1], externals[2]), (externals[3], externals[0])],
            0,
        );
        (a, b)
    }

    /// The original half-edge each surviving half of a rebuild came from,
    /// in the compacted order.
    pub(crate) fn survivors(&self, delete: &BTreeSet<HalfEdge>) -> Vec<HalfEdge> {
        (0..self.half_edge_count()).filter(|h| !delete.contains(h)).collect()
    }

    /// Digon removal together with the surviving strand site (`None` when
    /// the external legs closed into a fresh free loop) and the embedding
    /// of the reduced web's halves into this web.
    pub(crate) fn digon_with_site(&self, face: &[HalfEdge]) -> (Web, Option<HalfEdge>, Vec<HalfEdge>) {
        let (h1, h2) = (face[0], face[1]);
        let v1 = [h1, self.rotation[h1], self.rotation[self.rotation[h1]]];
        let v2 = [h2, self.rotation[h2], self.rotation[self.rotation[h2]]];
        let mut delete: BTreeSet<HalfEdge> = BTreeSet::new();
        delete.extend(v1);
        delete.extend(v2);
        let digon_pairs: BTreeSet<HalfEdge> =
            [h1, h2, self.pairing[h1], self.pairing[h2]].into_iter().collect();
        let ext1 = v1.into_iter().find(|h| !digon_pairs.contains(h)).unwrap();
        let ext2 = v2.into_iter().find(|h| !digon_pairs.contains(h)).unwrap();
        let splices = [(ext1, ext2)];
        let web = self.rebuild(&delete, &splices, 0);
        let site = self.strand_after_rebuild(&delete, &splices, ext1);
        let embed = self.survivors(&delete);
        (web, site, embed)
    }

    /// The two square smoothings with, per smoothing, the two strand
    /// sites (each `None` when the strand closed into a loop).
    pub(crate) fn square_with_sites(
        &self,
        face: &[HalfEdge],
    ) -> [(Web, [Option<HalfEdge>; 2], Vec<HalfEdge>); 2] {
        let mut delete: BTreeSet<HalfEdge> = BTreeSet::new();
        let mut externals = Vec::new();
        for &h in face {
            let v = [h, self.rotation[h], self.rotation[self.rotation[h]]];
            delete.extend(v);
            let sq_halves: BTreeSet<HalfEdge> =
                face.iter().flat_map(|&x| [x, self.pairing[x]]).collect();
            externals.push(v.into_iter().find(|x| !sq_halves.contains(x)).unwrap());
        }
        let sp_a = [(externals[0], externals[1]), (externals[2], externals[3])];
        let sp_b = [(externals[1], externals[2]), (externals[3], externals[0])];
        let web_a = self.rebuild(&delete, &sp_a, 0);
        let web_b = self.rebuild(&delete, &sp_b, 0);
        let site_a = [
            self.strand_after_rebuild(&delete, &sp_a, externals[0]),
            self.strand_after_rebuild(&delete, &sp_a, externals[2]),
        ];
        let site_b = [
            self.strand_after_rebuild(&delete, &sp_b, externals[1]),
            self.strand_after_rebuild(&delete, &sp_b, externals[3]),
        ];
        let embed = self.survivors(&delete);
        [(web_a, site_a, embed.clone()), (web_b, site_b, embed)]
    }

    /// Triangle contraction with a half-edge at the contracted vertex and
    /// the embedding of the surviving halves (the three fresh vertex
    /// halves are appended and map to nothing).
    pub(crate) fn triangle_with_site(&self, face: &[HalfEdge]) -> (Web, HalfEdge, Vec<HalfEdge>) {
        let web = self.contract_triangle(face);
        // The fresh vertex occupies the last three half-edge labels.
        let site = web.half_edge_count() - 3;
        let mut delete: BTreeSet<HalfEdge> = BTreeSet::new();
        let mut externals = Vec::new();
        for &h in face {
            let v = [h, self.rotation[h], self.rotation[self.rotation[h]]];
            delete.extend(v);
            let tri: BTreeSet<HalfEdge> =
                face.iter().flat_map(|&x| [x, self.pairing[x]]).collect();
            externals.push(v.into_iter().find(|x| !tri.contains(x)).unwrap());
        }
        let mut embed = self.survivors(&delete);
        // The three fresh vertex halves stand where the externals were.
        embed.extend(externals);
        (web, site, embed)
    }

    /// Kuperberg bracket by skein recursion; `Err(Irreducible)` when the
    /// recursion meets a web with all faces of size five or more.
    pub fn kuperberg_bracket(&self) -> Result<LaurentInt, WebError> {
        let mut memo: HashMap<Web, LaurentInt> = HashMap::new();
        self.bracket_memo(&mut memo)
    }

    fn bracket_memo(&self, memo: &mut HashMap<Web, LaurentInt>) -> Result<LaurentInt, WebError> {
        if self.half_edge_count() == 0 && self.free_loops == 0 {
            return Ok(LaurentInt::one());
        }
        if let Some(v) = memo.get(self) {
            return Ok(v.clone());
        }
        let step = self.find_reduction().ok_or(WebError::Irreducible)?;
        let value = match step.kind {
            ReductionKind::Bridge => LaurentInt::zero(),
            ReductionKind::Circle => {
                LaurentInt::quantum_int(3).mul(&step.results[0].bracket_memo(memo)?)
            }
            ReductionKind::Digon => {
                LaurentInt::quantum_int(2).mul(&step.results[0].bracket_memo(memo)?)
            }
            ReductionKind::Triangle => step.results[0].bracket_memo(memo)?,
            ReductionKind::Square => step.results[0]
                .bracket_memo(memo)?
                .add(&step.results[1].bracket_memo(memo)?),
        };
        memo.insert(self.clone(), value.clone());
        Ok(value)
    }

    /// The pre-foam `web x circle`, suitable for the Tait-count law.
    pub fn times_circle(&self) -> PreFoam {
        let verts = self.vertices();
        let vid: HashMap<HalfEdge, usize> = verts
            .iter()
            .enumerate()
            .map(|(i, v)| (v[0], i))
            .collect();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .iter()
            .map(|&h| {
                (
                    vid[&self.vertex_of(h)],
                    vid[&self.vertex_of(self.pairing[h])],
                )
            })
            .collect();
        let twists = vec![false; edges.len()];
        let mut f =
            crate::prefoam::catalog::annular_graph(verts.len(), &edges, &twists);
        // Free loops become dotless tori.
        let base = f.facets.keys().max().map_or(0, |m| m + 1);
        for k in 0..self.free_loops {
            f.facets.insert(
                base + k as u32,
                crate::prefoam::Facet::closed_surface(true, 1),
            );
        }
        f.embedded = true;
        f
    }
}

/// The four local patterns at a designated edge: the web itself (`I`),
/// the rotated bar (`H`), and the two smoothings (`=` and `||`).
///
/// With the bar drawn vertically, the legs are NE = rotation(m at top),
/// NW next, SW = rotation(m at bottom), SE next. `H` joins NW,SW on the
/// left and NE,SE on the right; `=` joins NW-NE and SW-SE; `||` joins
/// NW-SW and NE-SE.
pub fn square_site_webs(web: &Web, m_half: HalfEdge) -> Result<[Web; 4], WebError> {
    web.validate()?;
    if m_half >= web.half_edge_count() {
        return Err(WebError::BadSite(format!("no half-edge {}", m_half)));
    }
    let m_u = m_half;
    let m_v = web.pairing[m_u];
    let u = web.vertex_of(m_u);
    let v = web.vertex_of(m_v);
    if u == v {
        return Err(WebError::BadSite("the bar is a loop".into()));
    }
    let p = web.rotation[m_u]; // NE
    let q = web.rotation[p]; // NW
    let r = web.rotation[m_v]; // SW
    let s = web.rotation[r]; // SE
    let delete: BTreeSet<HalfEdge> = [m_u, p, q, m_v, r, s].into_iter().collect();

    let gamma_i = web.clone();
    let gamma_eq = web.rebuild(&delete, &[(p, q), (r, s)], 0);
    let gamma_par = web.rebuild(&delete, &[(q, r), (p, s)], 0);

    // H: two fresh vertices joined by a new bar.
    let survivors: Vec<HalfEdge> =
        (0..web.half_edge_count()).filter(|h| !delete.contains(h)).collect();
    let relabel: HashMap<HalfEdge, usize> =
        survivors.iter().enumerate().map(|(i, &h)| (h, i)).collect();
    let base = survivors.len();
    // Left vertex: [m'_l, NW', SW'] = base..base+3 (m', q-new, r-new);
    // right vertex: [m'_r, SE', NE'] = base+3..base+6.
    let mut pairing = vec![usize::MAX; base + 6];
    let mut rotation = vec![usize::MAX; base + 6];
    for &h in &survivors {
        if let Some(&rp) = relabel.get(&web.pairing[h]) {
            pairing[relabel[&h]] = rp;
        }
        rotation[relabel[&h]] = relabel[&web.rotation[h]];
    }
    pairing[base] = base + 3;
    pairing[base + 3] = base;
    // A leg may connect to another leg of the same site (as in the theta
    // web), in which case the two fresh halves pair with each other.
    let fresh_of = |old: HalfEdge| -> Option<usize> {
        [(base + 1, q), (base + 2, r), (base + 4, s), (base + 5, p)]
            .into_iter()
            .find(|&(_, o)| o == old)
            .map(|(f, _)| f)
    };
    for (fresh, old) in [(base + 1, q), (base + 2, r), (base + 4, s), (base + 5, p)] {
        let outer = web.pairing[old];
        let target = match relabel.get(&outer) {
            Some(&t) => t,
            None => fresh_of(outer)
                .expect("leg partner must survive or be another leg of the site"),
        };
        pairing[fresh] = target;
        pairing[target] = fresh;
    }
    rotation[base] = base + 1;
    rotation[base + 1] = base + 2;
    rotation[base + 2] = base;
    rotation[base + 3] = base + 4;
    rotation[base + 4] = base + 5;
    rotation[base + 5] = base + 3;
    let gamma_h = Web { pairing, rotation, free_loops: web.free_loops };

    for (name, w) in [("H", &gamma_h), ("=", &gamma_eq), ("||", &gamma_par)] {
        w.validate().map_err(|e| {
            WebError::BadSite(format!("rewrite {} failed: {}", name, e))
        })?;
    }
    Ok([gamma_i, gamma_h, gamma_eq, gamma_par])
}

/// The four Tait counts `(|I|, |H|, |=|, ||||)` at a site, and whether
/// `|| + H = I + =` holds.
pub fn tait_square_identity(
    web: &Web,
    m_half: HalfEdge,
) -> Result<([usize; 4], bool), WebError> {
    let [gi, gh, geq, gpar] = square_site_webs(web, m_half)?;
    let counts = [
        gi.tait_count(),
        gh.tait_count(),
        geq.tait_count(),
        gpar.tait_count(),
    ];
    let holds = counts[3] + counts[1] == counts[0] + counts[2];
    Ok((counts, holds))
}

/// Catalog webs used across the tests and the command line. Rotations are
/// counterclockwise orders read from planar drawings.
pub mod shapes {
    use super::Web;

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> Web {
        Web::from_edge_rotations(&[[0, 1, 2], [0, 2, 1]])
    }

    /// The complete graph on four vertices: outer triangle plus center.
    pub fn k4() -> Web {
        // Outer vertices A, B, C counterclockwise; D in the center.
        // Edges: AB=0, BC=1, CA=2, AD=3, BD=4, CD=5.
        Web::from_edge_rotations(&[
            [0, 3, 2], // A
            [1, 4, 0], // B
            [2, 5, 1], // C
            [3, 4, 5], // D
        ])
    }

    /// An `n`-prism: outer and inner `n`-cycles joined by spokes.
    /// Edge ids: outer `0..n`, inner `n..2n`, spokes `2n..3n`.
    fn prism(n: usize) -> Web {
        let mut vertices = Vec::new();
        // Outer vertex k: [outer_k, spoke_k, outer_{k-1}].
        for k in 0..n {
            vertices.push([k, 2 * n + k, (k + n - 1) % n]);
        }
        // Inner vertex k: [spoke_k, inner_k, inner_{k-1}].
        for k in 0..n {
            vertices.push([2 * n + k, n + k, n + (k + n - 1) % n]);
        }
        Web::from_edge_rotations(&vertices)
    }

    /// The triangular prism.
    pub fn prism3() -> Web {
        prism(3)
    }

    /// The pentagonal prism.
    pub fn prism5() -> Web {
        prism(5)
    }

    /// The cube graph (the 4-prism).
    pub fn cube() -> Web {
        prism(4)
    }

    /// The dodecahedral graph: every face is a pentagon, so the face
    /// recursion has nowhere to start.
    pub fn dodecahedron() -> Web {
        // Rings of five: A outer pentagon, B, C, D inner pentagon.
        // Edges: a_k = A-ring 0..5, sab_k = A_k B_k 5..10,
        // bc1_k = B_k C_k 10..15, bc2_k = B_k C_{k-1} 15..20,
        // cd_k = C_k D_k 20..25, d_k = D-ring 25..30.
        let a = |k: usize| k % 5;
        let sab = |k: usize| 5 + k % 5;
        let bc1 = |k: usize| 10 + k % 5;
        let bc2 = |k: usize| 15 + k % 5;
        let cd = |k: usize| 20 + k % 5;
        let d = |k: usize| 25 + k % 5;
        let mut vertices = Vec::new();
        for k in 0..5 {
            vertices.push([a(k), sab(k), a(k + 4)]);
        }
        for k in 0..5 {
            vertices.push([sab(k), bc1(k), bc2(k)]);
        }
        for k in 0..5 {
            vertices.push([bc1(k), bc2(k + 1), cd(k)]);
        }
        for k in 0..5 {
            vertices.push([cd(k), d(k), d(k + 4)]);
        }
        Web::from_edge_rotations(&vertices)
    }

    /// The dumbbell: two loop vertices joined by a bridge.
    pub fn bridged() -> Web {
        Web::from_edge_rotations(&[[0, 0, 1], [2, 2, 1]])
    }
}

#[cfg(test)]
mod tests {
    use super::shapes;
    use super::*;

    #[test]
    fn theta_structure() {
        let w = shapes::theta();
        assert!(w.validate().is_ok());
        let report = w.analyze().unwrap();
        assert_eq!(report.face_sizes.len(), 3);
        assert!(report.bipartite);
        assert!(report.bridges.is_empty());
        assert_eq!(w.tait_count(), 6);
    }

    #[test]
    fn k4_structure() {
        let w = shapes::k4();
        assert!(w.validate().is_ok(), "{:?}", w.validate());
        let report = w.analyze().unwrap();
        assert_eq!(report.face_sizes.len(), 4);
        assert!(report.face_sizes.iter().all(|&s| s == 3));
        assert!(!report.bipartite);
        assert!(report.bridges.is_empty());
        assert_eq!(w.tait_count(), 6);
    }

    #[test]
    fn prisms_and_cube() {
        let p3 = shapes::prism3();
        assert!(p3.validate().is_ok(), "{:?}", p3.validate());
        let p5 = shapes::prism5();
        assert!(p5.validate().is_ok(), "{:?}", p5.validate());
        let c = shapes::cube();
        assert!(c.validate().is_ok(), "{:?}", c.validate());
        // Brute-force Tait counts, frozen as rank oracles.
        assert_eq!(p3.tait_count(), 6);
        assert_eq!(p5.tait_count(), 30);
        assert_eq!(c.tait_count(), 24);
    }

    #[test]
    fn bridge_web_has_no_colorings() {
        let w = shapes::bridged();
        assert!(w.validate().is_ok(), "{:?}", w.validate());
        let report = w.analyze().unwrap();
        assert_eq!(report.bridges.len(), 1);
        assert_eq!(report.components, 1);
        assert_eq!(w.tait_count(), 0);
        let step = w.find_reduction().unwrap();
        assert_eq!(step.kind, ReductionKind::Bridge);
        assert!(step.results.is_empty());
    }

    #[test]
    fn free_loop_counts() {
        let w = Web::loops(1);
        assert_eq!(w.tait_count(), 3);
        assert_eq!(w.kuperberg_bracket().unwrap(), LaurentInt::quantum_int(3));
    }

    #[test]
    fn theta_reduces_through_digon() {
        let w = shapes::theta();
        let step = w.find_reduction().unwrap();
        assert_eq!(step.kind, ReductionKind::Digon);
        let smaller = &step.results[0];
        assert_eq!(smaller.half_edge_count(), 0);
        assert_eq!(smaller.free_loops, 1, "theta minus a digon is a free loop");
    }

    #[test]
    fn k4_reduces_through_triangle_to_theta() {
        let w = shapes::k4();
        let step = w.find_reduction().unwrap();
        assert_eq!(step.kind, ReductionKind::Triangle);
        let smaller = &step.results[0];
        assert!(smaller.validate().is_ok(), "{:?}", smaller.validate());
        assert_eq!(smaller.vertex_count(), 2);
        assert_eq!(smaller.tait_count(), 6);
    }

    #[test]
    fn dodecahedron_is_irreducible() {
        let w = shapes::dodecahedron();
        assert!(w.validate().is_ok(), "{:?}", w.validate());
        let report = w.analyze().unwrap();
        assert_eq!(report.face_sizes.len(), 12);
        assert!(report.face_sizes.iter().all(|&s| s == 5));
        assert!(w.find_reduction().is_none());
        assert_eq!(w.kuperberg_bracket(), Err(WebError::Irreducible));
    }

    #[test]
    fn brackets() {
        assert_eq!(shapes::theta().kuperberg_bracket().unwrap().to_string(), "q^3 + 2q + 2q^-1 + q^-3");
        // Bracket at q = 1 counts Tait colorings.
        for w in [shapes::theta(), shapes::k4(), shapes::prism3(), shapes::cube(), shapes::prism5()]
        {
            let b = w.kuperberg_bracket().unwrap();
            assert_eq!(b.eval_at_one(), w.tait_count() as i64);
            assert!(b.is_palindromic());
            assert!(b.coeffs.values().all(|&c| c > 0));
        }
        assert!(shapes::bridged().kuperberg_bracket().unwrap().is_zero());
    }

    #[test]
    fn tait_count_invariant_under_triangle_contraction() {
        for w in [shapes::k4(), shapes::prism3()] {
            let faces = w.faces();
            for face in faces.iter().filter(|f| f.len() == 3 && w.face_is_simple(f)) {
                let contracted = w.contract_triangle(face);
                assert!(contracted.validate().is_ok());
                assert_eq!(contracted.tait_count(), w.tait_count());
            }
        }
    }

    #[test]
    fn times_circle_has_tait_many_colorings() {
        let w = shapes::theta();
        let f = w.times_circle();
        assert!(f.validate().ok(), "{}", f.validate());
        assert_eq!(f.admissible_colorings().len(), w.tait_count());
    }

    #[test]
    fn square_identity_everywhere() {
        // Exhaustive over every edge of the small corpus.
        for w in [shapes::theta(), shapes::k4(), shapes::prism3(), shapes::cube()] {
            for h in w.edges() {
                let (counts, holds) = tait_square_identity(&w, h).unwrap();
                assert!(holds, "counts {:?} at edge {} of a corpus web", counts, h);
            }
        }
    }

    #[test]
    fn square_site_shapes_on_theta() {
        let th = shapes::theta();
        let [gi, gh, geq, gpar] = square_site_webs(&th, 0).unwrap();
        assert_eq!(gi.tait_count(), 6);
        // Rotating the theta's bar pinches off two loops: a dumbbell,
        // which has a bridge and no Tait colorings.
        assert_eq!(gh.tait_count(), 0);
        assert_eq!(geq.free_loops, 1);
        assert_eq!(gpar.free_loops, 2);
        assert_eq!(gpar.tait_count() + gh.tait_count(), gi.tait_count() + geq.tait_count());
    }
}
