//! Compilation of movies into pre-foams.
//!
//! The compiler replays the moves on a web with stable entity ids,
//! tracking the sheet each strand sweeps (union-find over facets),
//! compactly-supported Euler characteristic per facet, seam segments (one
//! per web-vertex lifetime) with three slot strips each, smooth joins
//! between segment extremities (zip tips, unzip joints), and seam
//! vertices with six facet corners. Closed movies assemble into a
//! `PreFoam`; open movies expose the facet and seam data that boundary
//! evaluations need; two compilations over matching final webs glue into
//! the closed pairing foam.

use super::{Move, Movie, Strand};
use crate::eval::EvalError;
use crate::prefoam::{Facet, Letter, Perm3, PreFoam, Seam};
use crate::web::Web;
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub type End = u64;
pub type VertId = u64;
pub type LoopId = u64;
type Fid = u32;

fn err(msg: impl Into<String>) -> EvalError {
    EvalError::Surgery(msg.into())
}

#[derive(Debug, Clone, Default)]
struct MWeb {
    rot: BTreeMap<End, End>,
    pair: BTreeMap<End, End>,
    vert: BTreeMap<End, VertId>,
    loops: Vec<LoopId>,
}

impl MWeb {
    fn edge_key(&self, e: End) -> End {
        e.min(self.pair[&e])
    }

    fn edges(&self) -> Vec<End> {
        self.pair.keys().copied().filter(|&e| e < self.pair[&e]).collect()
    }

    fn to_web(&self) -> Web {
        let ends = self.dense_ends();
        let idx: HashMap<End, usize> = ends.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Web {
            pairing: ends.iter().map(|e| idx[&self.pair[e]]).collect(),
            rotation: ends.iter().map(|e| idx[&self.rot[e]]).collect(),
            free_loops: self.loops.len(),
        }
    }

    fn dense_ends(&self) -> Vec<End> {
        self.pair.keys().copied().collect()
    }
}

/// 0 = birth extremity of a segment, 1 = death extremity.
type SegEnd = (u32, u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Terminus {
    Open,
    Bottom,
    Top,
    Join(u32),
    Event(u32),
}

#[derive(Debug, Clone)]
struct Segment {
    vert: VertId,
    /// Slot strips, keyed by end ids at the vertex (rotation order).
    slots: [End; 3],
    start: Terminus,
    end: Terminus,
}

impl Segment {
    fn terminus(&self, extremity: u8) -> Terminus {
        if extremity == 0 {
            self.start
        } else {
            self.end
        }
    }
}

/// Smooth joint between two segment extremities with three slot
/// identifications (end id on `a`'s side, end id on `b`'s side).
#[derive(Debug, Clone)]
struct Join {
    a: SegEnd,
    b: SegEnd,
    smap: [(End, End); 3],
}

/// A seam vertex: the four incident segment germs and the six facet
/// corners, each connecting two (segment, slot end) incidences.
#[derive(Debug, Clone)]
struct SeamVertex {
    germs: [SegEnd; 4],
    corners: [((u32, End), (u32, End)); 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StrandRef {
    Edge(End),
    Loop(LoopId),
}

/// Reverse-move recipe in original stable ids, with the original entities
/// that the reversed move recreates, in the replay's creation role order.
#[derive(Debug, Clone)]
enum RevSpec {
    Death { orig_loop: LoopId },
    Birth { corresponds: LoopId },
    SaddleLoops { a: LoopId, b: LoopId, merged: LoopId },
    SaddleLoopSplit { of: LoopId, parts: (LoopId, LoopId) },
    SaddleLoopEdge { l: LoopId, h: End },
    SaddlePinch { h: End, born: LoopId },
    SaddleEdges { h1: End, old_partner: End },
    Unzip { m: End, restores: [Option<LoopId>; 2] },
    Zip { s1: StrandRef, s2: StrandRef, born_ends: [End; 6] },
    Vtx { m: End, dead_aligned: [End; 2] },
    BlowdownOf { tri_half: End },
    BlowupOf { leg0: End, born_ends: [End; 6] },
    Dot(StrandRef),
    Triangle(StrandRef),
    Square(StrandRef),
}

#[derive(Debug, Clone, Default)]
struct Created {
    ends: Vec<End>,
    loops: Vec<LoopId>,
}

pub struct Compiler {
    web: MWeb,
    next: u64,
    fparent: Vec<Fid>,
    chi: Vec<i64>,
    dots: Vec<u32>,
    tris: Vec<u32>,
    sqs: Vec<u32>,
    sheet_end: HashMap<End, Fid>,
    sheet_loop: HashMap<LoopId, Fid>,
    segs: Vec<Segment>,
    active: BTreeMap<VertId, u32>,
    joins: Vec<Join>,
    events: Vec<SeamVertex>,
    rev: Vec<RevSpec>,
    frames: Vec<Web>,
    applied: Vec<Move>,
    initial: Web,
    finished: bool,
    /// Active segment per web vertex at finish time.
    top_segs: BTreeMap<VertId, u32>,
}

impl Compiler {
    pub fn new_from(initial: &Web) -> Result<Compiler, EvalError> {
        initial
            .validate()
            .map_err(|e| err(format!("initial web invalid: {}", e)))?;
        let mut c = Compiler {
            web: MWeb::default(),
            next: 0,
            fparent: Vec::new(),
            chi: Vec::new(),
            dots: Vec::new(),
            tris: Vec::new(),
            sqs: Vec::new(),
            sheet_end: HashMap::new(),
            sheet_loop: HashMap::new(),
            segs: Vec::new(),
            active: BTreeMap::new(),
            joins: Vec::new(),
            events: Vec::new(),
            rev: Vec::new(),
            frames: Vec::new(),
            applied: Vec::new(),
            initial: initial.clone(),
            finished: false,
            top_segs: BTreeMap::new(),
        };
        // Seed stable ids in dense order.
        let n = initial.half_edge_count();
        let ends: Vec<End> = (0..n).map(|_| c.fresh()).collect();
        for (i, &e) in ends.iter().enumerate() {
            c.web.rot.insert(e, ends[initial.rotation[i]]);
            c.web.pair.insert(e, ends[initial.pairing[i]]);
        }
        for vert in initial.vertices() {
            let v = c.fresh();
            for &h in &vert {
                c.web.vert.insert(ends[h], v);
            }
            let e0 = ends[vert[0]];
            let seg = Segment {
                vert: v,
                slots: [e0, c.web.rot[&e0], c.web.rot[&c.web.rot[&e0]]],
                start: Terminus::Bottom,
                end: Terminus::Open,
            };
            c.active.insert(v, c.segs.len() as u32);
            c.segs.push(seg);
        }
        for h in initial.edges() {
            let f = c.new_facet();
            c.chi[f as usize] -= 1; // bottom slice cell
            c.sheet_end.insert(ends[h], f);
            c.sheet_end.insert(ends[initial.pairing[h]], f);
        }
        for _ in 0..initial.free_loops {
            let l = c.fresh();
            let f = c.new_facet();
            c.sheet_loop.insert(l, f);
            c.web.loops.push(l);
        }
        c.frames.push(initial.clone());
        Ok(c)
    }

    pub fn run(movie: &Movie) -> Result<Compiler, EvalError> {
        let mut c = Compiler::new_from(&movie.initial)?;
        for (i, mv) in movie.moves.iter().enumerate() {
            c.apply_dense(mv)
                .map_err(|e| err(format!("IllegalMove at frame {}: {}", i, e)))?;
        }
        c.finish();
        Ok(c)
    }

    pub fn final_frame(&self) -> Web {
        self.frames.last().unwrap().clone()
    }

    pub fn frames(&self) -> &[Web] {
        &self.frames
    }

    fn fresh(&mut self) -> u64 {
        self.next += 1;
        self.next
    }

    fn new_facet(&mut self) -> Fid {
        let id = self.fparent.len() as Fid;
        self.fparent.push(id);
        self.chi.push(0);
        self.dots.push(0);
        self.tris.push(0);
        self.sqs.push(0);
        id
    }

    fn froot(&mut self, f: Fid) -> Fid {
        if self.fparent[f as usize] == f {
            f
        } else {
            let r = self.froot(self.fparent[f as usize]);
            self.fparent[f as usize] = r;
            r
        }
    }

    fn fmerge(&mut self, a: Fid, b: Fid) -> Fid {
        let (ra, rb) = (self.froot(a), self.froot(b));
        if ra == rb {
            return ra;
        }
        let (keep, drop) = (ra.min(rb), ra.max(rb));
        self.fparent[drop as usize] = keep;
        self.chi[keep as usize] += self.chi[drop as usize];
        self.dots[keep as usize] += self.dots[drop as usize];
        self.tris[keep as usize] += self.tris[drop as usize];
        self.sqs[keep as usize] += self.sqs[drop as usize];
        keep
    }

    fn sheet_of_end(&mut self, e: End) -> Fid {
        let f = self.sheet_end[&e];
        self.froot(f)
    }

    fn sheet_of_loop(&mut self, l: LoopId) -> Fid {
        let f = self.sheet_loop[&l];
        self.froot(f)
    }

    fn add_chi_end(&mut self, e: End, d: i64) {
        let f = self.sheet_of_end(e);
        self.chi[f as usize] += d;
    }

    fn add_chi_loop(&mut self, l: LoopId, d: i64) {
        let f = self.sheet_of_loop(l);
        self.chi[f as usize] += d;
    }

    /// Interval cells for the current frame, then default slice cells for
    /// the upcoming event (edges listed in `special` handle their own
    /// slice contribution).
    fn interval_and_slice(&mut self, special: &BTreeSet<End>) {
        for e in self.web.edges() {
            self.add_chi_end(e, 1);
            if !special.contains(&self.web.edge_key(e)) {
                self.add_chi_end(e, -1);
            }
        }
    }

    fn dense_end(&self, h: usize) -> Result<End, EvalError> {
        self.web
            .dense_ends()
            .get(h)
            .copied()
            .ok_or_else(|| err(format!("no half-edge {}", h)))
    }

    fn dense_index(&self, e: End) -> usize {
        self.web.dense_ends().iter().position(|&x| x == e).expect("live end")
    }

    fn dense_loop(&self, i: usize) -> Result<LoopId, EvalError> {
        self.web
            .loops
            .get(i)
            .copied()
            .ok_or_else(|| err(format!("no free loop {}", i)))
    }

    fn loop_position(&self, l: LoopId) -> usize {
        self.web.loops.iter().position(|&x| x == l).expect("live loop")
    }

    fn strand_ref(&self, s: &Strand) -> Result<StrandRef, EvalError> {
        Ok(match s {
            Strand::Edge(h) => StrandRef::Edge(self.dense_end(*h)?),
            Strand::Loop(i) => StrandRef::Loop(self.dense_loop(*i)?),
        })
    }

    fn apply_dense(&mut self, mv: &Move) -> Result<Created, EvalError> {
        if self.finished {
            return Err(err("compiler already finished"));
        }
        let created = match *mv {
            Move::Birth => self.do_birth(),
            Move::Death(i) => {
                let l = self.dense_loop(i)?;
                self.do_death(l)
            }
            Move::SaddleLoops(i, j) => {
                let (a, b) = (self.dense_loop(i)?, self.dense_loop(j)?);
                self.do_saddle_loops(a, b)
            }
            Move::SaddleLoopSplit(i) => {
                let l = self.dense_loop(i)?;
                self.do_saddle_split(l)
            }
            Move::SaddleLoopEdge(i, h) => {
                let (l, e) = (self.dense_loop(i)?, self.dense_end(h)?);
                self.do_saddle_loop_edge(l, e)
            }
            Move::SaddlePinch(h) => {
                let e = self.dense_end(h)?;
                self.do_saddle_pinch(e)
            }
            Move::SaddleEdges(h1, h2) => {
                let (a, b) = (self.dense_end(h1)?, self.dense_end(h2)?);
                self.do_saddle_edges(a, b)
            }
            Move::Zip(s1, s2) => {
                let (a, b) = (self.strand_ref(&s1)?, self.strand_ref(&s2)?);
                self.do_zip(a, b)
            }
            Move::Unzip(h) => {
                let m = self.dense_end(h)?;
                self.do_unzip(m)
            }
            Move::Vtx(h) => {
                let m = self.dense_end(h)?;
                self.do_vtx(m)
            }
            Move::Blowup(h) => {
                let e = self.dense_end(h)?;
                self.do_blowup(e)
            }
            Move::Blowdown(h) => {
                let e = self.dense_end(h)?;
                self.do_blowdown(e)
            }
            Move::Dot(s) => {
                let r = self.strand_ref(&s)?;
                self.do_decorate(r, 0)
            }
            Move::Triangle(s) => {
                let r = self.strand_ref(&s)?;
                self.do_decorate(r, 1)
            }
            Move::Square(s) => {
                let r = self.strand_ref(&s)?;
                self.do_decorate(r, 2)
            }
        }?;
        let frame = self.web.to_web();
        frame
            .validate()
            .map_err(|e| err(format!("frame is not a planar web: {}", e)))?;
        self.frames.push(frame);
        self.applied.push(*mv);
        Ok(created)
    }

    fn frames_moves_so_far(&self) -> Vec<Move> {
        self.applied.clone()
    }

    fn finish(&mut self) {
        if self.finished {
            return;
        }
        self.finished = true;
        // The final interval cell (+1 per edge) and the top slice cell
        // (-1 per edge) cancel, so no Euler contribution remains here.
        let active = std::mem::take(&mut self.active);
        for (v, s) in active {
            self.segs[s as usize].end = Terminus::Top;
            self.top_segs.insert(v, s);
        }
    }

    pub fn is_closed(&self) -> bool {
        self.finished && self.web.pair.is_empty() && self.web.loops.is_empty()
    }

    // --- moves ---------------------------------------------------------

    fn do_birth(&mut self) -> Result<Created, EvalError> {
        self.interval_and_slice(&BTreeSet::new());
        let l = self.fresh();
        let f = self.new_facet();
        self.chi[f as usize] += 1;
        self.sheet_loop.insert(l, f);
        self.web.loops.push(l);
        self.rev.push(RevSpec::Death { orig_loop: l });
        Ok(Created { loops: vec![l], ..Default::default() })
    }

    fn do_death(&mut self, l: LoopId) -> Result<Created, EvalError> {
        self.interval_and_slice(&BTreeSet::new());
        self.add_chi_loop(l, 1);
        self.web.loops.retain(|&x| x != l);
        self.rev.push(RevSpec::Birth { corresponds: l });
        Ok(Created::default())
    }

    fn do_decorate(&mut self, s: StrandRef, kind: u8) -> Result<Created, EvalError> {
        let f = match s {
            StrandRef::Edge(e) => self.sheet_of_end(e),
            StrandRef::Loop(l) => self.sheet_of_loop(l),
        };
        match kind {
            0 => self.dots[f as usize] += 1,
            1 => self.tris[f as usize] += 1,
            _ => self.sqs[f as usize] += 1,
        }
        self.rev.push(match kind {
            0 => RevSpec::Dot(s),
            1 => RevSpec::Triangle(s),
            _ => RevSpec::Square(s),
        });
        Ok(Created::default())
    }

    fn do_saddle_loops(&mut self, a: LoopId, b: LoopId) -> Result<Created, EvalError> {
        if a == b {
            return Err(err("saddle between a loop and itself; use a split"));
        }
        self.interval_and_slice(&BTreeSet::new());
        let f = {
            let fa = self.sheet_of_loop(a);
            let fb = self.sheet_of_loop(b);
            self.fmerge(fa, fb)
        };
        self.chi[f as usize] -= 1;
        let merged = self.fresh();
        self.sheet_loop.insert(merged, f);
        let pa = self.loop_position(a);
        let pb = self.loop_position(b);
        let keep = pa.min(pb);
        self.web.loops.remove(pa.max(pb));
        self.web.loops[keep] = merged;
        self.rev.push(RevSpec::SaddleLoopSplit { of: merged, parts: (a, b) });
        Ok(Created { loops: vec![merged], ..Default::default() })
    }

    fn do_saddle_split(&mut self, l: LoopId) -> Result<Created, EvalError> {
        self.interval_and_slice(&BTreeSet::new());
        let f = self.sheet_of_loop(l);
        self.chi[f as usize] -= 1;
        let (a, b) = (self.fresh(), self.fresh());
        self.sheet_loop.insert(a, f);
        self.sheet_loop.insert(b, f);
        let pos = self.loop_position(l);
        self.web.loops[pos] = a;
        self.web.loops.insert(pos + 1, b);
        self.rev.push(RevSpec::SaddleLoops { a, b, merged: l });
        Ok(Created { loops: vec![a, b], ..Default::default() })
    }

    fn do_saddle_loop_edge(&mut self, l: LoopId, e: End) -> Result<Created, EvalError> {
        let mut special = BTreeSet::new();
        special.insert(self.web.edge_key(e));
        self.interval_and_slice(&special);
        let f = {
            let fl = self.sheet_of_loop(l);
            let fe = self.sheet_of_end(e);
            self.fmerge(fl, fe)
        };
        self.chi[f as usize] -= 2;
        self.web.loops.retain(|&x| x != l);
        self.rev.push(RevSpec::SaddlePinch { h: e, born: l });
        Ok(Created::default())
    }

    fn do_saddle_pinch(&mut self, e: End) -> Result<Created, EvalError> {
        let mut special = BTreeSet::new();
        special.insert(self.web.edge_key(e));
        self.interval_and_slice(&special);
        let f = self.sheet_of_end(e);
        self.chi[f as usize] -= 2;
        let l = self.fresh();
        self.sheet_loop.insert(l, f);
        self.web.loops.push(l);
        self.rev.push(RevSpec::SaddleLoopEdge { l, h: e });
        Ok(Created { loops: vec![l], ..Default::default() })
    }

    fn do_saddle_edges(&mut self, h1: End, h2: End) -> Result<Created, EvalError> {
        let k1 = self.web.edge_key(h1);
        let k2 = self.web.edge_key(h2);
        if k1 == k2 {
            return Err(err("saddle between an edge and itself; use a pinch"));
        }
        let special: BTreeSet<End> = [k1, k2].into_iter().collect();
        self.interval_and_slice(&special);
        let f = {
            let f1 = self.sheet_of_end(h1);
            let f2 = self.sheet_of_end(h2);
            self.fmerge(f1, f2)
        };
        self.chi[f as usize] -= 3;
        let p1 = self.web.pair[&h1];
        let p2 = self.web.pair[&h2];
        self.web.pair.insert(h1, h2);
        self.web.pair.insert(h2, h1);
        self.web.pair.insert(p1, p2);
        self.web.pair.insert(p2, p1);
        self.rev.push(RevSpec::SaddleEdges { h1, old_partner: p1 });
        Ok(Created::default())
    }

    fn do_zip(&mut self, s1: StrandRef, s2: StrandRef) -> Result<Created, EvalError> {
        match (s1, s2) {
            (StrandRef::Edge(a), StrandRef::Edge(b)) if self.web.edge_key(a) == self.web.edge_key(b) => {
                return Err(err("zip of a strand with itself"))
            }
            (StrandRef::Loop(a), StrandRef::Loop(b)) if a == b => {
                return Err(err("zip of a loop with itself"))
            }
            _ => {}
        }
        let mut special = BTreeSet::new();
        for s in [s1, s2] {
            if let StrandRef::Edge(h) = s {
                special.insert(self.web.edge_key(h));
            }
        }
        self.interval_and_slice(&special);
        match s1 {
            StrandRef::Edge(h) => self.add_chi_end(h, -2),
            StrandRef::Loop(l) => self.add_chi_loop(l, -1),
        }
        match s2 {
            StrandRef::Edge(h) => self.add_chi_end(h, -2),
            StrandRef::Loop(l) => self.add_chi_loop(l, -1),
        }
        // Fresh structure: u = [m_u, a, b], v = [m_v, c, d]; strand 1 on
        // the left (slots b at u, c at v), strand 2 on the right.
        let (m_u, m_v) = (self.fresh(), self.fresh());
        let (a, b, c, d) = (self.fresh(), self.fresh(), self.fresh(), self.fresh());
        let (vu, vv) = (self.fresh(), self.fresh());
        for (e, v) in [(m_u, vu), (a, vu), (b, vu), (m_v, vv), (c, vv), (d, vv)] {
            self.web.vert.insert(e, v);
        }
        self.web.rot.insert(m_u, a);
        self.web.rot.insert(a, b);
        self.web.rot.insert(b, m_u);
        self.web.rot.insert(m_v, c);
        self.web.rot.insert(c, d);
        self.web.rot.insert(d, m_v);
        self.web.pair.insert(m_u, m_v);
        self.web.pair.insert(m_v, m_u);
        for (s, at_u, at_v) in [(s1, b, c), (s2, a, d)] {
            match s {
                StrandRef::Edge(h) => {
                    let p = self.web.pair[&h];
                    let f = self.sheet_of_end(h);
                    self.web.pair.insert(h, at_u);
                    self.web.pair.insert(at_u, h);
                    self.web.pair.insert(p, at_v);
                    self.web.pair.insert(at_v, p);
                    self.sheet_end.insert(at_u, f);
                    self.sheet_end.insert(at_v, f);
                }
                StrandRef::Loop(l) => {
                    let f = self.sheet_of_loop(l);
                    self.web.pair.insert(at_u, at_v);
                    self.web.pair.insert(at_v, at_u);
                    self.sheet_end.insert(at_u, f);
                    self.sheet_end.insert(at_v, f);
                    self.web.loops.retain(|&x| x != l);
                }
            }
        }
        let fm = self.new_facet();
        self.sheet_end.insert(m_u, fm);
        self.sheet_end.insert(m_v, fm);
        let j = self.joins.len() as u32;
        let su = self.segs.len() as u32;
        self.segs.push(Segment {
            vert: vu,
            slots: [m_u, a, b],
            start: Terminus::Join(j),
            end: Terminus::Open,
        });
        let sv = self.segs.len() as u32;
        self.segs.push(Segment {
            vert: vv,
            slots: [m_v, c, d],
            start: Terminus::Join(j),
            end: Terminus::Open,
        });
        self.joins.push(Join { a: (su, 0), b: (sv, 0), smap: [(m_u, m_v), (a, d), (b, c)] });
        self.active.insert(vu, su);
        self.active.insert(vv, sv);
        let restores = [
            if let StrandRef::Loop(l) = s1 { Some(l) } else { None },
            if let StrandRef::Loop(l) = s2 { Some(l) } else { None },
        ];
        self.rev.push(RevSpec::Unzip { m: m_u, restores });
        Ok(Created { ends: vec![m_u, m_v, a, b, c, d], loops: vec![] })
    }

    fn do_unzip(&mut self, m_half: End) -> Result<Created, EvalError> {
        let m_u = m_half;
        let m_v = self.web.pair[&m_u];
        let vu = self.web.vert[&m_u];
        let vv = self.web.vert[&m_v];
        if vu == vv {
            return Err(err("unzip of a bar with both ends at one vertex"));
        }
        let p = self.web.rot[&m_u];
        let q = self.web.rot[&p];
        let r = self.web.rot[&m_v];
        let s = self.web.rot[&r];
        let mut special = BTreeSet::new();
        special.insert(self.web.edge_key(m_u));
        self.interval_and_slice(&special);
        // Segments meet at a smooth joint.
        let su = *self
            .active
            .get(&vu)
            .ok_or_else(|| err("no active segment at the bar"))?;
        let sv = *self.active.get(&vv).unwrap();
        let j = self.joins.len() as u32;
        self.segs[su as usize].end = Terminus::Join(j);
        self.segs[sv as usize].end = Terminus::Join(j);
        self.joins.push(Join { a: (su, 1), b: (sv, 1), smap: [(m_u, m_v), (q, r), (p, s)] });
        self.active.remove(&vu);
        self.active.remove(&vv);
        // Parallel splices (q with r) and (p with s).
        let mut created_loops = Vec::new();
        let mut strand_handles: [Option<StrandRef>; 2] = [None, None];
        for (k, (x, y)) in [(q, r), (p, s)].into_iter().enumerate() {
            let fx = self.sheet_of_end(x);
            let fy = self.sheet_of_end(y);
            let f = self.fmerge(fx, fy);
            let px = self.web.pair[&x];
            let py = self.web.pair[&y];
            if px == y {
                // The legs were two halves of one edge: it closes up.
                let l = self.fresh();
                self.sheet_loop.insert(l, f);
                self.web.loops.push(l);
                created_loops.push(l);
                strand_handles[k] = Some(StrandRef::Loop(l));
            } else {
                self.web.pair.insert(px, py);
                self.web.pair.insert(py, px);
                strand_handles[k] = Some(StrandRef::Edge(px));
            }
            self.web.pair.remove(&x);
            self.web.pair.remove(&y);
        }
        for e in [m_u, m_v, p, q, r, s] {
            self.web.rot.remove(&e);
            self.web.vert.remove(&e);
        }
        self.web.pair.remove(&m_u);
        self.web.pair.remove(&m_v);
        self.rev.push(RevSpec::Zip {
            s1: strand_handles[0].unwrap(),
            s2: strand_handles[1].unwrap(),
            born_ends: [m_u, m_v, p, q, r, s],
        });
        Ok(Created { loops: created_loops, ..Default::default() })
    }

    fn do_vtx(&mut self, m_half: End) -> Result<Created, EvalError> {
        let m_u = m_half;
        let m_v = self.web.pair[&m_u];
        let vu = self.web.vert[&m_u];
        let vv = self.web.vert[&m_v];
        if vu == vv {
            return Err(err("bar with both ends at one vertex"));
        }
        let p = self.web.rot[&m_u];
        let q = self.web.rot[&p];
        let r = self.web.rot[&m_v];
        let s = self.web.rot[&r];
        let mut special = BTreeSet::new();
        special.insert(self.web.edge_key(m_u));
        self.interval_and_slice(&special);
        let su = *self
            .active
            .get(&vu)
            .ok_or_else(|| err("no active segment at the bar"))?;
        let sv = *self.active.get(&vv).unwrap();
        let ev = self.events.len() as u32;
        self.segs[su as usize].end = Terminus::Event(ev);
        self.segs[sv as usize].end = Terminus::Event(ev);
        self.active.remove(&vu);
        self.active.remove(&vv);
        let (m2_u, m2_v) = (self.fresh(), self.fresh());
        let (vu2, vv2) = (self.fresh(), self.fresh());
        self.web.vert.insert(m2_u, vu2);
        self.web.vert.insert(m2_v, vv2);
        self.web.vert.insert(q, vu2);
        self.web.vert.insert(r, vu2);
        self.web.vert.insert(s, vv2);
        self.web.vert.insert(p, vv2);
        self.web.rot.insert(m2_u, q);
        self.web.rot.insert(q, r);
        self.web.rot.insert(r, m2_u);
        self.web.rot.insert(m2_v, s);
        self.web.rot.insert(s, p);
        self.web.rot.insert(p, m2_v);
        self.web.pair.insert(m2_u, m2_v);
        self.web.pair.insert(m2_v, m2_u);
        for e in [m_u, m_v] {
            self.web.rot.remove(&e);
            self.web.vert.remove(&e);
            self.web.pair.remove(&e);
        }
        let fm2 = self.new_facet();
        self.sheet_end.insert(m2_u, fm2);
        self.sheet_end.insert(m2_v, fm2);
        let su2 = self.segs.len() as u32;
        self.segs.push(Segment {
            vert: vu2,
            slots: [m2_u, q, r],
            start: Terminus::Event(ev),
            end: Terminus::Open,
        });
        let sv2 = self.segs.len() as u32;
        self.segs.push(Segment {
            vert: vv2,
            slots: [m2_v, s, p],
            start: Terminus::Event(ev),
            end: Terminus::Open,
        });
        self.active.insert(vu2, su2);
        self.active.insert(vv2, sv2);
        self.events.push(SeamVertex {
            germs: [(su, 1), (sv, 1), (su2, 0), (sv2, 0)],
            corners: [
                ((su, m_u), (sv, m_v)),
                ((su2, m2_u), (sv2, m2_v)),
                ((su, q), (su2, q)),
                ((sv, r), (su2, r)),
                ((sv, s), (sv2, s)),
                ((su, p), (sv2, p)),
            ],
        });
        self.rev.push(RevSpec::Vtx { m: m2_u, dead_aligned: [m_v, m_u] });
        Ok(Created { ends: vec![m2_u, m2_v], loops: vec![] })
    }

    fn do_blowup(&mut self, leg0: End) -> Result<Created, EvalError> {
        let v = self.web.vert[&leg0];
        let legs = [leg0, self.web.rot[&leg0], self.web.rot[&self.web.rot[&leg0]]];
        self.interval_and_slice(&BTreeSet::new());
        let sv = *self
            .active
            .get(&v)
            .ok_or_else(|| err("no active segment at the vertex"))?;
        let ev = self.events.len() as u32;
        self.segs[sv as usize].end = Terminus::Event(ev);
        self.active.remove(&v);
        let wids = [self.fresh(), self.fresh(), self.fresh()];
        let ta = [self.fresh(), self.fresh(), self.fresh()];
        let tb = [self.fresh(), self.fresh(), self.fresh()];
        let mut new_segs = [0u32; 3];
        for k in 0..3 {
            let w = wids[k];
            let t_prev_b = tb[(k + 2) % 3];
            self.web.vert.insert(legs[k], w);
            self.web.vert.insert(ta[k], w);
            self.web.vert.insert(t_prev_b, w);
            self.web.rot.insert(legs[k], ta[k]);
            self.web.rot.insert(ta[k], t_prev_b);
            self.web.rot.insert(t_prev_b, legs[k]);
            self.web.pair.insert(ta[k], tb[k]);
            self.web.pair.insert(tb[k], ta[k]);
            let ft = self.new_facet();
            self.sheet_end.insert(ta[k], ft);
            self.sheet_end.insert(tb[k], ft);
            let sidx = self.segs.len() as u32;
            self.segs.push(Segment {
                vert: w,
                slots: [legs[k], ta[k], t_prev_b],
                start: Terminus::Event(ev),
                end: Terminus::Open,
            });
            self.active.insert(w, sidx);
            new_segs[k] = sidx;
        }
        self.events.push(SeamVertex {
            germs: [(sv, 1), (new_segs[0], 0), (new_segs[1], 0), (new_segs[2], 0)],
            corners: [
                ((sv, legs[0]), (new_segs[0], legs[0])),
                ((sv, legs[1]), (new_segs[1], legs[1])),
                ((sv, legs[2]), (new_segs[2], legs[2])),
                ((new_segs[0], ta[0]), (new_segs[1], tb[0])),
                ((new_segs[1], ta[1]), (new_segs[2], tb[1])),
                ((new_segs[2], ta[2]), (new_segs[0], tb[2])),
            ],
        });
        self.rev.push(RevSpec::BlowdownOf { tri_half: tb[0] });
        Ok(Created {
            ends: vec![ta[0], tb[0], ta[1], tb[1], ta[2], tb[2]],
            loops: vec![],
        })
    }

    fn do_blowdown(&mut self, at: End) -> Result<Created, EvalError> {
        // Walk the face through `at`.
        let mut face = vec![at];
        let mut cur = self.web.rot[&self.web.pair[&at]];
        while cur != at {
            face.push(cur);
            if face.len() > 3 {
                return Err(err("blowdown site is not on a triangle face"));
            }
            cur = self.web.rot[&self.web.pair[&cur]];
        }
        if face.len() != 3 {
            return Err(err("blowdown site is not on a triangle face"));
        }
        let wids: Vec<VertId> = face.iter().map(|h| self.web.vert[h]).collect();
        if wids.iter().collect::<BTreeSet<_>>().len() != 3 {
            return Err(err("triangle face is not simple"));
        }
        let tri_halves: BTreeSet<End> =
            face.iter().flat_map(|&h| [h, self.web.pair[&h]]).collect();
        let legs: Vec<End> = face
            .iter()
            .map(|&h| {
                let mut e = self.web.rot[&h];
                while tri_halves.contains(&e) {
                    e = self.web.rot[&e];
                }
                e
            })
            .collect();
        let face_pairs: Vec<End> = face.iter().map(|h| self.web.pair[h]).collect();
        // The dying triangle sheets meet the cone point; they contribute
        // no slice cells.
        let special: BTreeSet<End> = face.iter().map(|&h| self.web.edge_key(h)).collect();
        self.interval_and_slice(&special);
        let ev = self.events.len() as u32;
        let mut germ_segs = Vec::new();
        for w in &wids {
            let sg = *self
                .active
                .get(w)
                .ok_or_else(|| err("no active segment at a triangle corner"))?;
            self.segs[sg as usize].end = Terminus::Event(ev);
            self.active.remove(w);
            germ_segs.push(sg);
        }
        // Fresh vertex; legs in reversed face order so the rotation
        // matches the vertex the triangle came from.
        let v = self.fresh();
        let ordered = [legs[0], legs[2], legs[1]];
        for k in 0..3 {
            self.web.vert.insert(ordered[k], v);
            self.web.rot.insert(ordered[k], ordered[(k + 1) % 3]);
        }
        for &h in &tri_halves {
            self.web.rot.remove(&h);
            self.web.vert.remove(&h);
            self.web.pair.remove(&h);
        }
        let snew = self.segs.len() as u32;
        self.segs.push(Segment {
            vert: v,
            slots: [ordered[0], ordered[1], ordered[2]],
            start: Terminus::Event(ev),
            end: Terminus::Open,
        });
        self.active.insert(v, snew);
        // The face half face[k] sits at wids[k]; its partner sits at
        // wids[k+1] (face orbit order).
        self.events.push(SeamVertex {
            germs: [(germ_segs[0], 1), (germ_segs[1], 1), (germ_segs[2], 1), (snew, 0)],
            corners: [
                ((germ_segs[0], legs[0]), (snew, legs[0])),
                ((germ_segs[1], legs[1]), (snew, legs[1])),
                ((germ_segs[2], legs[2]), (snew, legs[2])),
                ((germ_segs[0], face[0]), (germ_segs[1], face_pairs[0])),
                ((germ_segs[1], face[1]), (germ_segs[2], face_pairs[1])),
                ((germ_segs[2], face[2]), (germ_segs[0], face_pairs[2])),
            ],
        });
        // The reverse blowup starts from the leg matching the rebuilt
        // rotation and recreates the triangle ends in replay role order:
        // legs in replay order are [legs[0], legs[2], legs[1]]; the tri
        // edge after leg k in that order is the face edge joining the
        // corresponding corners.
        let born_ends = [
            // ta[0], tb[0]: edge between replay legs 0 and 1, i.e. the
            // original face edge between wids[0] and wids[2]: that is
            // face[2]'s edge, whose half at wids[2]'s corner is face[2].
            face_pairs[2],
            face[2],
            // ta[1], tb[1]: between replay legs 1 (=legs[2]) and 2
            // (=legs[1]): original face edge face[1], half at wids[1] is
            // face[1], at wids[2] is its partner.
            face[1],
            face_pairs[1],
            // ta[2], tb[2]: between replay legs 2 (=legs[1]) and 0:
            // original face edge face[0].
            face_pairs[0],
            face[0],
        ];
        self.rev.push(RevSpec::BlowupOf { leg0: legs[0], born_ends });
        Ok(Created::default())
    }

    // --- reflection ------------------------------------------------------

    pub fn reflected_movie(&self) -> Result<Movie, EvalError> {
        Ok(self.reflected_movie_tracked()?.0)
    }

    /// The reflected movie together with the map from its final frame's
    /// half-edges to the original initial frame's half-edges.
    pub fn reflected_movie_tracked(&self) -> Result<(Movie, Vec<usize>), EvalError> {
        let initial = self.final_frame();
        let mut replay = Compiler::new_from(&initial)?;
        // Correspondence original-stable -> replay-stable.
        let mut ce: HashMap<End, End> = HashMap::new();
        let mut cl: HashMap<LoopId, LoopId> = HashMap::new();
        let orig_ends = self.web.dense_ends();
        let replay_ends = replay.web.dense_ends();
        for (a, b) in orig_ends.iter().zip(replay_ends.iter()) {
            ce.insert(*a, *b);
        }
        for (a, b) in self.web.loops.iter().zip(replay.web.loops.iter()) {
            cl.insert(*a, *b);
        }
        let ge = |ce: &HashMap<End, End>, e: End| -> Result<End, EvalError> {
            ce.get(&e).copied().ok_or_else(|| err("reflection lost an end"))
        };
        let gl = |cl: &HashMap<LoopId, LoopId>, l: LoopId| -> Result<LoopId, EvalError> {
            cl.get(&l).copied().ok_or_else(|| err("reflection lost a loop"))
        };
        let strand = |ce: &HashMap<End, End>,
                      cl: &HashMap<LoopId, LoopId>,
                      replay: &Compiler,
                      s: StrandRef|
         -> Result<Strand, EvalError> {
            Ok(match s {
                StrandRef::Edge(e) => Strand::Edge(replay.dense_index(ge(ce, e)?)),
                StrandRef::Loop(l) => Strand::Loop(replay.loop_position(gl(cl, l)?)),
            })
        };
        let mut moves = Vec::new();
        for spec in self.rev.iter().rev() {
            let mv = match spec {
                RevSpec::Death { orig_loop } => Move::Death(replay.loop_position(gl(&cl, *orig_loop)?)),
                RevSpec::Birth { .. } => Move::Birth,
                RevSpec::SaddleLoops { a, b, .. } => Move::SaddleLoops(
                    replay.loop_position(gl(&cl, *a)?),
                    replay.loop_position(gl(&cl, *b)?),
                ),
                RevSpec::SaddleLoopSplit { of, .. } => {
                    Move::SaddleLoopSplit(replay.loop_position(gl(&cl, *of)?))
                }
                RevSpec::SaddleLoopEdge { l, h } => Move::SaddleLoopEdge(
                    replay.loop_position(gl(&cl, *l)?),
                    replay.dense_index(ge(&ce, *h)?),
                ),
                RevSpec::SaddlePinch { h, .. } => {
                    Move::SaddlePinch(replay.dense_index(ge(&ce, *h)?))
                }
                RevSpec::SaddleEdges { h1, old_partner } => Move::SaddleEdges(
                    replay.dense_index(ge(&ce, *h1)?),
                    replay.dense_index(ge(&ce, *old_partner)?),
                ),
                RevSpec::Unzip { m, .. } => Move::Unzip(replay.dense_index(ge(&ce, *m)?)),
                RevSpec::Zip { s1, s2, .. } => Move::Zip(
                    strand(&ce, &cl, &replay, *s1)?,
                    strand(&ce, &cl, &replay, *s2)?,
                ),
                RevSpec::Vtx { m, .. } => Move::Vtx(replay.dense_index(ge(&ce, *m)?)),
                RevSpec::BlowdownOf { tri_half } => {
                    Move::Blowdown(replay.dense_index(ge(&ce, *tri_half)?))
                }
                RevSpec::BlowupOf { leg0, .. } => {
                    Move::Blowup(replay.dense_index(ge(&ce, *leg0)?))
                }
                RevSpec::Dot(s) => Move::Dot(strand(&ce, &cl, &replay, *s)?),
                RevSpec::Triangle(s) => Move::Triangle(strand(&ce, &cl, &replay, *s)?),
                RevSpec::Square(s) => Move::Square(strand(&ce, &cl, &replay, *s)?),
            };
            let created = replay.apply_dense(&mv)?;
            match spec {
                RevSpec::Birth { corresponds } => {
                    cl.insert(*corresponds, created.loops[0]);
                }
                RevSpec::SaddleLoops { merged, .. } => {
                    cl.insert(*merged, created.loops[0]);
                }
                RevSpec::SaddleLoopSplit { parts, .. } => {
                    cl.insert(parts.0, created.loops[0]);
                    cl.insert(parts.1, created.loops[1]);
                }
                RevSpec::SaddlePinch { born, .. } => {
                    cl.insert(*born, created.loops[0]);
                }
                RevSpec::Unzip { restores, .. } => {
                    let mut it = created.loops.iter();
                    for r in restores.iter().flatten() {
                        cl.insert(
                            *r,
                            *it.next().ok_or_else(|| err("unzip restored no loop"))?,
                        );
                    }
                }
                RevSpec::Zip { born_ends, .. } => {
                    for (orig, new) in born_ends.iter().zip(created.ends.iter()) {
                        ce.insert(*orig, *new);
                    }
                }
                RevSpec::Vtx { dead_aligned, .. } => {
                    for (orig, new) in dead_aligned.iter().zip(created.ends.iter()) {
                        ce.insert(*orig, *new);
                    }
                }
                RevSpec::BlowupOf { born_ends, .. } => {
                    for (orig, new) in born_ends.iter().zip(created.ends.iter()) {
                        ce.insert(*orig, *new);
                    }
                }
                _ => {}
            }
            moves.push(mv);
        }
        // Correspondence of the reflected final frame with the original
        // initial frame: original initial ends were seeded in dense order.
        let n0 = self.initial.half_edge_count();
        let replay_final = replay.web.dense_ends();
        let mut tau = vec![usize::MAX; replay_final.len()];
        for h0 in 0..n0 {
            let orig_stable = (h0 + 1) as End;
            let rep = ce
                .get(&orig_stable)
                .copied()
                .ok_or_else(|| err("reflection lost an initial end"))?;
            let pos = replay_final
                .iter()
                .position(|&x| x == rep)
                .ok_or_else(|| err("reflected end is not on the final frame"))?;
            tau[pos] = h0;
        }
        if tau.iter().any(|&x| x == usize::MAX) {
            return Err(err("reflected final frame does not match the initial web"));
        }
        Ok((Movie { initial, moves }, tau))
    }
}

// --- canonical labeling and composition -----------------------------------

type CanonKey = Vec<(Vec<usize>, Vec<usize>)>;

/// Canonical labeling of a web: per component, the lexicographically
/// least (pairing, rotation) tables over all BFS relabelings; components
/// sorted by their keys. Returns the key and the relabeling
/// old half -> canonical label.
pub fn canonical_labeling(w: &Web) -> (CanonKey, Vec<usize>) {
    let n = w.half_edge_count();
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for h in 0..n {
        if comp[h] != usize::MAX {
            continue;
        }
        let mut stack = vec![h];
        while let Some(x) = stack.pop() {
            if comp[x] != usize::MAX {
                continue;
            }
            comp[x] = ncomp;
            stack.push(w.rotation[x]);
            stack.push(w.pairing[x]);
        }
        ncomp += 1;
    }
    let mut comp_results: Vec<((Vec<usize>, Vec<usize>), Vec<usize>)> = Vec::new();
    for c in 0..ncomp {
        let members: Vec<usize> = (0..n).filter(|&h| comp[h] == c).collect();
        let mut best: Option<((Vec<usize>, Vec<usize>), Vec<usize>)> = None;
        for &start in &members {
            // BFS discovery order from `start`.
            let mut order = Vec::new();
            let mut label = HashMap::new();
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(start);
            while let Some(x) = queue.pop_front() {
                if label.contains_key(&x) {
                    continue;
                }
                label.insert(x, order.len());
                order.push(x);
                queue.push_back(w.rotation[x]);
                queue.push_back(w.pairing[x]);
            }
            let key = (
                order.iter().map(|&h| label[&w.pairing[h]]).collect::<Vec<_>>(),
                order.iter().map(|&h| label[&w.rotation[h]]).collect::<Vec<_>>(),
            );
            let labels: Vec<usize> = members.iter().map(|&h| label[&h]).collect();
            if best.as_ref().map_or(true, |(bk, _)| key < *bk) {
                best = Some((key, labels));
            }
        }
        let (key, labels) = best.unwrap_or(((Vec::new(), Vec::new()), Vec::new()));
        comp_results.push(((key.0, key.1), labels_to_map(&members, &labels, n)));
    }
    // Sort components by key; assign label offsets.
    let mut idxs: Vec<usize> = (0..comp_results.len()).collect();
    idxs.sort_by(|&i, &j| comp_results[i].0.cmp(&comp_results[j].0));
    let mut relabel = vec![usize::MAX; n];
    let mut key = Vec::new();
    let mut offset = 0;
    for &i in &idxs {
        let (k, map) = &comp_results[i];
        key.push(k.clone());
        for h in 0..n {
            if map[h] != usize::MAX {
                relabel[h] = map[h] + offset;
            }
        }
        offset += k.0.len();
    }
    (key, relabel)
}

fn labels_to_map(members: &[usize], labels: &[usize], n: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; n];
    for (k, &h) in members.iter().enumerate() {
        map[h] = labels[k];
    }
    map
}

/// Complete a partial identification `source-half -> target-half` to a
/// full web isomorphism by propagating along rotations and pairings.
pub fn complete_iso(
    target: &Web,
    source: &Web,
    partial: &[Option<usize>],
) -> Option<Vec<usize>> {
    let n = source.half_edge_count();
    if target.half_edge_count() != n || target.free_loops != source.free_loops {
        return None;
    }
    let mut iso: Vec<Option<usize>> = partial.to_vec();
    let mut queue: Vec<usize> = (0..n).filter(|&h| iso[h].is_some()).collect();
    let mut assign = |iso: &mut Vec<Option<usize>>,
                      queue: &mut Vec<usize>,
                      h: usize,
                      t: usize|
     -> bool {
        match iso[h] {
            Some(prev) => prev == t,
            None => {
                iso[h] = Some(t);
                queue.push(h);
                true
            }
        }
    };
    while let Some(h) = queue.pop() {
        let t = iso[h].unwrap();
        if !assign(&mut iso, &mut queue, source.rotation[h], target.rotation[t]) {
            return None;
        }
        if !assign(&mut iso, &mut queue, source.pairing[h], target.pairing[t]) {
            return None;
        }
    }
    let full: Option<Vec<usize>> = iso.into_iter().collect();
    let full = full?;
    // Bijectivity check.
    let mut seen = vec![false; n];
    for &t in &full {
        if seen[t] {
            return None;
        }
        seen[t] = true;
    }
    Some(full)
}

/// A relabeling `b`-half -> `a`-half identifying isomorphic webs (their
/// canonical keys and loop counts must agree).
pub fn web_iso(a: &Web, b: &Web) -> Option<Vec<usize>> {
    if a.free_loops != b.free_loops || a.half_edge_count() != b.half_edge_count() {
        return None;
    }
    let (ka, la) = canonical_labeling(a);
    let (kb, lb) = canonical_labeling(b);
    if ka != kb {
        return None;
    }
    // iso[h_b] = la^{-1}(lb[h_b]).
    let mut inv_a = vec![usize::MAX; a.half_edge_count()];
    for (h, &c) in la.iter().enumerate() {
        inv_a[c] = h;
    }
    Some(lb.iter().map(|&c| inv_a[c]).collect())
}

/// Concatenate: run `base`, then `suffix` (which must start at a web
/// isomorphic to base's final frame). Returns a single movie with the
/// suffix moves rewritten into the continued frame coordinates.
pub fn concat_movies(base: &Movie, suffix: &Movie) -> Result<Movie, EvalError> {
    Ok(concat_movies_tracked(base, suffix)?.0)
}

/// As `concat_movies`, also returning the map from the suffix's final
/// frame half-edges to the composite's final frame half-edges.
pub fn concat_movies_tracked(
    base: &Movie,
    suffix: &Movie,
) -> Result<(Movie, Vec<usize>), EvalError> {
    let target = Compiler::run_open(base)?;
    let base_final = target.final_frame();
    let iso = web_iso(&base_final, &suffix.initial)
        .ok_or_else(|| err("BoundaryMismatch: suffix does not start at the base's final web"))?;
    concat_movies_with(target, suffix, &iso)
}

/// Concatenate with an explicit identification of the suffix's initial
/// frame into the base's final frame.
pub fn concat_movies_iso(
    base: &Movie,
    suffix: &Movie,
    iso: &[usize],
) -> Result<(Movie, Vec<usize>), EvalError> {
    let target = Compiler::run_open(base)?;
    concat_movies_with(target, suffix, iso)
}

fn concat_movies_with(
    mut target: Compiler,
    suffix: &Movie,
    iso: &[usize],
) -> Result<(Movie, Vec<usize>), EvalError> {
    let mut native = Compiler::new_from(&suffix.initial)?;
    // Correspondence native-stable -> target-stable.
    let mut ce: HashMap<End, End> = HashMap::new();
    let mut cl: HashMap<LoopId, LoopId> = HashMap::new();
    let native_ends = native.web.dense_ends();
    let target_ends = target.web.dense_ends();
    for (hb, &e_native) in native_ends.iter().enumerate() {
        ce.insert(e_native, target_ends[iso[hb]]);
    }
    for (a, b) in native.web.loops.clone().iter().zip(target.web.loops.clone().iter()) {
        cl.insert(*a, *b);
    }
    let mut moves = target.frames_moves_so_far();
    for mv in &suffix.moves {
        // Resolve the native move to stable refs, map, emit densely.
        let mapped = map_move(mv, &native, &target, &ce, &cl)?;
        let c_native = native.apply_dense(mv)?;
        let c_target = target.apply_dense(&mapped)?;
        for (a, b) in c_native.ends.iter().zip(c_target.ends.iter()) {
            ce.insert(*a, *b);
        }
        for (a, b) in c_native.loops.iter().zip(c_target.loops.iter()) {
            cl.insert(*a, *b);
        }
        moves.push(mapped);
    }
    // Final-frame correspondence in dense indices.
    let suffix_final = native.web.dense_ends();
    let target_dense = target.web.dense_ends();
    let mut final_map = Vec::with_capacity(suffix_final.len());
    for e in suffix_final {
        let t = ce
            .get(&e)
            .copied()
            .ok_or_else(|| err("unmapped final end in composition"))?;
        final_map.push(target_dense.iter().position(|&x| x == t).unwrap());
    }
    Ok((Movie { initial: target.initial.clone(), moves }, final_map))
}

impl Compiler {
    /// Run without finishing (used to continue compiling).
    fn run_open(movie: &Movie) -> Result<Compiler, EvalError> {
        let mut c = Compiler::new_from(&movie.initial)?;
        for (i, mv) in movie.moves.iter().enumerate() {
            c.apply_dense(mv)
                .map_err(|e| err(format!("IllegalMove at frame {}: {}", i, e)))?;
        }
        Ok(c)
    }
}

fn map_move(
    mv: &Move,
    native: &Compiler,
    target: &Compiler,
    ce: &HashMap<End, End>,
    cl: &HashMap<LoopId, LoopId>,
) -> Result<Move, EvalError> {
    let me = |h: &usize| -> Result<usize, EvalError> {
        let e = native.dense_end(*h)?;
        let t = ce.get(&e).copied().ok_or_else(|| err("unmapped end in composition"))?;
        Ok(target.dense_index(t))
    };
    let ml = |i: &usize| -> Result<usize, EvalError> {
        let l = native.dense_loop(*i)?;
        let t = cl.get(&l).copied().ok_or_else(|| err("unmapped loop in composition"))?;
        Ok(target.loop_position(t))
    };
    let ms = |s: &Strand| -> Result<Strand, EvalError> {
        Ok(match s {
            Strand::Edge(h) => Strand::Edge(me(h)?),
            Strand::Loop(i) => Strand::Loop(ml(i)?),
        })
    };
    Ok(match mv {
        Move::Birth => Move::Birth,
        Move::Death(i) => Move::Death(ml(i)?),
        Move::SaddleLoops(i, j) => Move::SaddleLoops(ml(i)?, ml(j)?),
        Move::SaddleLoopSplit(i) => Move::SaddleLoopSplit(ml(i)?),
        Move::SaddleLoopEdge(i, h) => Move::SaddleLoopEdge(ml(i)?, me(h)?),
        Move::SaddlePinch(h) => Move::SaddlePinch(me(h)?),
        Move::SaddleEdges(a, b) => Move::SaddleEdges(me(a)?, me(b)?),
        Move::Zip(a, b) => Move::Zip(ms(a)?, ms(b)?),
        Move::Unzip(h) => Move::Unzip(me(h)?),
        Move::Vtx(h) => Move::Vtx(me(h)?),
        Move::Blowup(h) => Move::Blowup(me(h)?),
        Move::Blowdown(h) => Move::Blowdown(me(h)?),
        Move::Dot(s) => Move::Dot(ms(s)?),
        Move::Triangle(s) => Move::Triangle(ms(s)?),
        Move::Square(s) => Move::Square(ms(s)?),
    })
}

// --- assembly --------------------------------------------------------------

/// Flattened view over one or two compilers.
struct Workspace {
    segs: Vec<Segment>,
    joins: Vec<Join>,
    n_events: usize,
    corners: HashMap<(usize, u32, End), (u32, End)>,
    event_germs: HashMap<u32, Vec<SegEnd>>,
    facet_of_slot: HashMap<(u32, End), usize>,
    facets: Vec<FacetAcc>,
}

#[derive(Debug, Clone, Default)]
struct FacetAcc {
    chi: i64,
    dots: u32,
    tris: u32,
    sqs: u32,
}

fn build_workspace(parts: &mut [&mut Compiler], glue_iso: Option<&[usize]>) -> Result<Workspace, EvalError> {
    // Facet roots across parts.
    let mut facet_index: HashMap<(usize, Fid), usize> = HashMap::new();
    let mut facets: Vec<FacetAcc> = Vec::new();
    for (pi, part) in parts.iter_mut().enumerate() {
        let roots: BTreeSet<Fid> = (0..part.fparent.len() as Fid).map(|f| part.froot(f)).collect();
        for r in roots {
            facet_index.insert((pi, r), facets.len());
            facets.push(FacetAcc {
                chi: part.chi[r as usize],
                dots: part.dots[r as usize],
                tris: part.tris[r as usize],
                sqs: part.sqs[r as usize],
            });
        }
    }
    // Facet union-find for gluing.
    let mut fpar: Vec<usize> = (0..facets.len()).collect();
    fn ffind(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] == x {
            x
        } else {
            let r = ffind(p, p[x]);
            p[x] = r;
            r
        }
    }

    let mut seg_off = vec![0u32; parts.len()];
    let mut join_off = vec![0u32; parts.len()];
    let mut ev_off = vec![0u32; parts.len()];
    for pi in 1..parts.len() {
        seg_off[pi] = seg_off[pi - 1] + parts[pi - 1].segs.len() as u32;
        join_off[pi] = join_off[pi - 1] + parts[pi - 1].joins.len() as u32;
        ev_off[pi] = ev_off[pi - 1] + parts[pi - 1].events.len() as u32;
    }
    let mut segs = Vec::new();
    let mut joins = Vec::new();
    let mut corners = HashMap::new();
    let mut event_germs: HashMap<u32, Vec<SegEnd>> = HashMap::new();
    let mut facet_of_slot: HashMap<(u32, End), usize> = HashMap::new();
    let mut n_events = 0;
    for (pi, part) in parts.iter_mut().enumerate() {
        let remap_term = |t: Terminus| -> Terminus {
            match t {
                Terminus::Join(j) => Terminus::Join(j + join_off[pi]),
                Terminus::Event(e) => Terminus::Event(e + ev_off[pi]),
                other => other,
            }
        };
        for s in &part.segs {
            segs.push(Segment {
                vert: s.vert,
                slots: s.slots,
                start: remap_term(s.start),
                end: remap_term(s.end),
            });
        }
        for j in &part.joins {
            joins.push(Join {
                a: (j.a.0 + seg_off[pi], j.a.1),
                b: (j.b.0 + seg_off[pi], j.b.1),
                smap: j.smap,
            });
        }
        for (ei, ev) in part.events.iter().enumerate() {
            let gid = ev_off[pi] + ei as u32;
            event_germs.insert(
                gid,
                ev.germs.iter().map(|&(s, x)| (s + seg_off[pi], x)).collect(),
            );
            for ((s1, e1), (s2, e2)) in &ev.corners {
                corners.insert(
                    (gid as usize, s1 + seg_off[pi], *e1),
                    (s2 + seg_off[pi], *e2),
                );
                corners.insert(
                    (gid as usize, s2 + seg_off[pi], *e2),
                    (s1 + seg_off[pi], *e1),
                );
            }
            n_events += 1;
        }
        let ends: Vec<End> = part.sheet_end.keys().copied().collect();
        for e in ends {
            let root = part.sheet_of_end(e);
            let fi = facet_index[&(pi, root)];
            // Slot facets keyed per segment later; store per end for now.
            facet_of_slot.insert((u32::MAX, e), fi);
            let _ = fi;
        }
    }
    // Slot facets: per segment slot, via part-scoped end sheets.
    facet_of_slot.clear();
    for (pi, part) in parts.iter_mut().enumerate() {
        for (si, s) in part.segs.clone().iter().enumerate() {
            for &e in &s.slots {
                let root = part.sheet_of_end(e);
                let fi = facet_index[&(pi, root)];
                facet_of_slot.insert((seg_off[pi] + si as u32, e), fi);
            }
        }
    }

    // Gluing: join top segments and merge sheets across the boundary.
    if let Some(iso) = glue_iso {
        if parts.len() != 2 {
            return Err(err("gluing needs exactly two parts"));
        }
        let wa = parts[0].final_frame();
        let wb = parts[1].final_frame();
        let ends_a = parts[0].web.dense_ends();
        let ends_b = parts[1].web.dense_ends();
        // Merge sheets along shared edges; fix the doubled slice cells.
        for hb in wb.edges() {
            let ha = iso[hb];
            let fa = {
                let root = {
                    let f = parts[0].sheet_end[&ends_a[ha]];
                    parts[0].froot(f)
                };
                facet_index[&(0, root)]
            };
            let fb = {
                let root = {
                    let f = parts[1].sheet_end[&ends_b[hb]];
                    parts[1].froot(f)
                };
                facet_index[&(1, root)]
            };
            let (ra, rb) = (ffind(&mut fpar, fa), ffind(&mut fpar, fb));
            if ra != rb {
                let (keep, drop) = (ra.min(rb), ra.max(rb));
                fpar[drop] = keep;
                let moved = std::mem::take(&mut facets[drop]);
                facets[keep].chi += moved.chi;
                facets[keep].dots += moved.dots;
                facets[keep].tris += moved.tris;
                facets[keep].sqs += moved.sqs;
            }
            // Both parts counted a top slice cell for this edge.
            let root = ffind(&mut fpar, fa);
            facets[root].chi += 1;
        }
        for (lb, la) in wb_loops_to_wa(&wa, &wb) {
            let fa = facet_index[&(0, {
                let f = parts[0].sheet_loop[&parts[0].web.loops[la]];
                parts[0].froot(f)
            })];
            let fb = facet_index[&(1, {
                let f = parts[1].sheet_loop[&parts[1].web.loops[lb]];
                parts[1].froot(f)
            })];
            let (ra, rb) = (ffind(&mut fpar, fa), ffind(&mut fpar, fb));
            if ra != rb {
                let (keep, drop) = (ra.min(rb), ra.max(rb));
                fpar[drop] = keep;
                let moved = std::mem::take(&mut facets[drop]);
                facets[keep].chi += moved.chi;
                facets[keep].dots += moved.dots;
                facets[keep].tris += moved.tris;
                facets[keep].sqs += moved.sqs;
            }
        }
        // Join the top segments vertex by vertex.
        for vert in wa.vertices() {
            // The three halves at this vertex, in rotation order.
            let ha = [vert[0], vert[1], vert[2]];
            // Find the matching vertex of b: iso maps b-halves to a-halves.
            let hb0 = iso.iter().position(|&x| x == ha[0]).unwrap();
            let ends_at_a: Vec<End> = ha.iter().map(|&h| ends_a[h]).collect();
            let va = parts[0].web.vert[&ends_at_a[0]];
            let vb = parts[1].web.vert[&ends_b[hb0]];
            let sa = *parts[0]
                .top_segs
                .get(&va)
                .ok_or_else(|| err("missing top segment"))?;
            let sb = *parts[1]
                .top_segs
                .get(&vb)
                .ok_or_else(|| err("missing top segment"))?
                + seg_off[1];
            let j = joins.len() as u32;
            let mut smap = [(0, 0); 3];
            for (k, &h) in ha.iter().enumerate() {
                let hbk = iso.iter().position(|&x| x == h).unwrap();
                smap[k] = (ends_a[h], ends_b[hbk]);
            }
            segs[sa as usize].end = Terminus::Join(j);
            segs[sb as usize].end = Terminus::Join(j);
            joins.push(Join { a: (sa, 1), b: (sb, 1), smap });
        }
    }

    // Re-root facet indices after gluing.
    let mut final_index = HashMap::new();
    let mut final_facets = Vec::new();
    for i in 0..facets.len() {
        let r = ffind(&mut fpar, i);
        if !final_index.contains_key(&r) {
            final_index.insert(r, final_facets.len());
            final_facets.push(facets[r].clone());
        }
    }
    for v in facet_of_slot.values_mut() {
        let r = ffind(&mut fpar, *v);
        *v = final_index[&r];
    }
    Ok(Workspace {
        segs,
        joins,
        n_events,
        corners,
        event_germs,
        facet_of_slot,
        facets: final_facets,
    })
}

fn wb_loops_to_wa(wa: &Web, wb: &Web) -> Vec<(usize, usize)> {
    assert_eq!(wa.free_loops, wb.free_loops);
    (0..wb.free_loops).map(|i| (i, i)).collect()
}

/// A seam chain in the workspace.
struct Chain {
    /// (segment, sign): +1 when traversed birth-to-death.
    portions: Vec<(u32, i8)>,
    /// Event indices at the two ends; None for circles.
    ends: Option<(u32, u32)>,
}

impl Workspace {
    fn join_other(&self, j: u32, side: SegEnd) -> (SegEnd, [(End, End); 3], bool) {
        let join = &self.joins[j as usize];
        if join.a == side {
            (join.b, join.smap, false)
        } else {
            let flipped = [
                (join.smap[0].1, join.smap[0].0),
                (join.smap[1].1, join.smap[1].0),
                (join.smap[2].1, join.smap[2].0),
            ];
            (join.a, flipped, true)
        }
    }

    /// Chains of segments between events; circles close up.
    fn chains(&self) -> Result<Vec<Chain>, EvalError> {
        let mut used = vec![false; self.segs.len()];
        let mut chains = Vec::new();
        // Open chains start at event germs.
        let mut starts: Vec<SegEnd> = Vec::new();
        for germs in self.event_germs.values() {
            starts.extend(germs.iter().copied());
        }
        starts.sort_unstable();
        for &(s0, x0) in &starts {
            if used[s0 as usize] {
                continue;
            }
            let ev_start = match self.segs[s0 as usize].terminus(x0) {
                Terminus::Event(e) => e,
                _ => return Err(err("germ does not point at its event")),
            };
            let mut portions = Vec::new();
            let mut cur = (s0, x0);
            let ev_end;
            loop {
                let (s, x) = cur;
                used[s as usize] = true;
                // Traverse from extremity x to the other end.
                portions.push((s, if x == 0 { 1 } else { -1 }));
                let far = 1 - x;
                match self.segs[s as usize].terminus(far) {
                    Terminus::Join(j) => {
                        let (other, _, _) = self.join_other(j, (s, far));
                        cur = other;
                    }
                    Terminus::Event(e) => {
                        ev_end = e;
                        break;
                    }
                    Terminus::Top | Terminus::Bottom | Terminus::Open => {
                        return Err(err("open seam in a closed assembly"))
                    }
                }
            }
            chains.push(Chain { portions, ends: Some((ev_start, ev_end)) });
        }
        // Remaining segments form circles.
        for s0 in 0..self.segs.len() as u32 {
            if used[s0 as usize] {
                continue;
            }
            let mut portions = Vec::new();
            let mut cur = (s0, 0u8);
            loop {
                let (s, x) = cur;
                if used[s as usize] {
                    break;
                }
                used[s as usize] = true;
                portions.push((s, if x == 0 { 1 } else { -1 }));
                let far = 1 - x;
                match self.segs[s as usize].terminus(far) {
                    Terminus::Join(j) => {
                        let (other, _, _) = self.join_other(j, (s, far));
                        cur = other;
                    }
                    _ => return Err(err("circle chain hit a hard terminus")),
                }
            }
            chains.push(Chain { portions, ends: None });
        }
        Ok(chains)
    }
}

/// Assemble the closed pre-foam of one compiled closed movie.
pub fn assemble_closed(c: &mut Compiler) -> Result<PreFoam, EvalError> {
    if !c.is_closed() {
        return Err(err("movie is not closed"));
    }
    let mut parts: [&mut Compiler; 1] = [c];
    let ws = build_workspace(&mut parts, None)?;
    assemble_from_workspace(ws)
}

/// Glue two compiled open movies over isomorphic final webs into the
/// closed pairing pre-foam (the second part is implicitly reflected).
pub fn glue_closed(a: &mut Compiler, b: &mut Compiler) -> Result<PreFoam, EvalError> {
    if !a.finished || !b.finished {
        return Err(err("glue requires finished compilations"));
    }
    let wa = a.final_frame();
    let wb = b.final_frame();
    let iso = web_iso(&wa, &wb).ok_or_else(|| err("BoundaryMismatch: final webs differ"))?;
    let mut parts: [&mut Compiler; 2] = [a, b];
    let ws = build_workspace(&mut parts, Some(&iso))?;
    assemble_from_workspace(ws)
}

fn assemble_from_workspace(ws: Workspace) -> Result<PreFoam, EvalError> {
    let chains = ws.chains()?;
    // Seam ids in order of smallest segment.
    let mut order: Vec<usize> = (0..chains.len()).collect();
    order.sort_by_key(|&i| chains[i].portions.iter().map(|p| p.0).min().unwrap());
    let seam_of_seg: HashMap<u32, (usize, usize, i8)> = {
        // segment -> (seam id, portion index, sign)
        let mut m = HashMap::new();
        for (sid, &ci) in order.iter().enumerate() {
            for (k, &(s, sign)) in chains[ci].portions.iter().enumerate() {
                m.insert(s, (sid, k, sign));
            }
        }
        m
    };

    // Slot classes along chains.
    let mut cparent: HashMap<(u32, End), (u32, End)> = HashMap::new();
    fn cfind(p: &mut HashMap<(u32, End), (u32, End)>, x: (u32, End)) -> (u32, End) {
        let q = *p.get(&x).unwrap_or(&x);
        if q == x {
            return x;
        }
        let r = cfind(p, q);
        p.insert(x, r);
        r
    }
    for j in &ws.joins {
        for (ea, eb) in j.smap {
            let ka = cfind(&mut cparent, (j.a.0, ea));
            let kb = cfind(&mut cparent, (j.b.0, eb));
            if ka != kb {
                cparent.insert(ka, kb);
            }
        }
    }

    // Per seam: slot numbering (and circle monodromy).
    let mut seams: BTreeMap<u32, Seam> = BTreeMap::new();
    let mut slot_of: HashMap<(u32, End), u8> = HashMap::new();
    for (sid, &ci) in order.iter().enumerate() {
        let chain = &chains[ci];
        match chain.ends {
            Some((e0, e1)) => {
                let mut classes: Vec<(u32, End)> = Vec::new();
                for &(s, _) in &chain.portions {
                    for e in ws.segs[s as usize].slots {
                        let r = cfind(&mut cparent, (s, e));
                        if !classes.contains(&r) {
                            classes.push(r);
                        }
                    }
                }
                classes.sort_unstable();
                if classes.len() != 3 {
                    return Err(err(format!(
                        "seam {} carries {} slot classes",
                        sid,
                        classes.len()
                    )));
                }
                for &(s, _) in &chain.portions {
                    for e in ws.segs[s as usize].slots {
                        let r = cfind(&mut cparent, (s, e));
                        let idx = classes.iter().position(|c| *c == r).unwrap() as u8;
                        slot_of.insert((s, e), idx);
                    }
                }
                seams.insert(sid as u32, Seam::Edge { ends: (e0, e1) });
            }
            None => {
                // Monodromy on the starting portion's slot positions.
                let len = chain.portions.len();
                let (s0, _) = chain.portions[0];
                let mut perm = [0u8; 3];
                for pos in 0..3u8 {
                    let mut cur_seg = s0;
                    let mut cur_end = ws.segs[s0 as usize].slots[pos as usize];
                    for k in 0..len {
                        let (s, sign) = chain.portions[k];
                        debug_assert_eq!(s, cur_seg);
                        let exit: u8 = if sign > 0 { 1 } else { 0 };
                        let t = ws.segs[s as usize].terminus(exit);
                        let j = match t {
                            Terminus::Join(j) => j,
                            _ => return Err(err("circle chain hit a hard terminus")),
                        };
                        let join = &ws.joins[j as usize];
                        let (next_side, partner) = if join.a == (s, exit) {
                            (join.b, join.smap.iter().find(|(a, _)| *a == cur_end))
                        } else {
                            (join.a, None)
                        };
                        let next_end = match partner {
                            Some(&(_, b)) => b,
                            None => {
                                let pair = join
                                    .smap
                                    .iter()
                                    .find(|(_, b)| *b == cur_end)
                                    .ok_or_else(|| err("slot missing from join map"))?;
                                pair.0
                            }
                        };
                        cur_seg = next_side.0;
                        cur_end = next_end;
                        let _ = chain.portions[(k + 1) % len];
                    }
                    let final_pos = ws.segs[s0 as usize]
                        .slots
                        .iter()
                        .position(|&e| e == cur_end)
                        .ok_or_else(|| err("strand did not return to the start portion"))?;
                    perm[pos as usize] = final_pos as u8;
                }
                let monodromy = Perm3(perm);
                let orbits = monodromy.orbits();
                for &(s, _) in &chain.portions {
                    for e in ws.segs[s as usize].slots {
                        let r = cfind(&mut cparent, (s, e));
                        let strand = (0..3u8)
                            .find(|&t| {
                                cfind(&mut cparent, (s0, ws.segs[s0 as usize].slots[t as usize]))
                                    == r
                            })
                            .ok_or_else(|| err("slot class misses the start portion"))?;
                        let orbit_idx =
                            orbits.iter().position(|o| o.contains(&strand)).unwrap() as u8;
                        slot_of.insert((s, e), orbit_idx);
                    }
                }
                seams.insert(sid as u32, Seam::Circle { monodromy });
            }
        }
    }

    // Boundary words by dart chasing. Darts: (seg, slot end, time dir).
    let mut used: BTreeSet<(u32, End)> = BTreeSet::new();
    let mut words_by_facet: BTreeMap<usize, Vec<Vec<Letter>>> = BTreeMap::new();
    let all_slots: Vec<(u32, End)> = {
        let mut v = Vec::new();
        for (si, s) in ws.segs.iter().enumerate() {
            for e in s.slots {
                v.push((si as u32, e));
            }
        }
        v
    };
    for &(s0, e0) in &all_slots {
        if used.contains(&(s0, e0)) {
            continue;
        }
        let facet = *ws
            .facet_of_slot
            .get(&(s0, e0))
            .ok_or_else(|| err("slot without a sheet"))?;
        // Walk the boundary circle through this slot.
        let mut letters: Vec<Letter> = Vec::new();
        let mut cur = (s0, e0, 1i8);
        // Track the letter under construction.
        let mut letter_start = true;
        loop {
            let (s, e, t) = cur;
            if letter_start {
                let (sid, _, sign) = seam_of_seg[&s];
                let slot = slot_of[&(s, e)];
                letters.push(Letter::new(sid as u32, slot, t * sign));
                letter_start = false;
            }
            if used.contains(&(s, e)) && !(s == s0 && e == e0 && letters.len() == 1) {
                return Err(err("boundary walk revisited a slot"));
            }
            used.insert((s, e));
            debug_assert_eq!(ws.facet_of_slot[&(s, e)], facet);
            // Advance to the extremity in direction t.
            let exit: u8 = if t > 0 { 1 } else { 0 };
            match ws.segs[s as usize].terminus(exit) {
                Terminus::Join(j) => {
                    let join = &ws.joins[j as usize];
                    let (other, partner_end) = if join.a == (s, exit) {
                        let pair = join
                            .smap
                            .iter()
                            .find(|(a, _)| *a == e)
                            .ok_or_else(|| err("slot missing from join"))?;
                        (join.b, pair.1)
                    } else if join.b == (s, exit) {
                        let pair = join
                            .smap
                            .iter()
                            .find(|(_, b)| *b == e)
                            .ok_or_else(|| err("slot missing from join"))?;
                        (join.a, pair.0)
                    } else {
                        return Err(err("segment terminus not in its join"));
                    };
                    let t2 = if other.1 == 0 { 1 } else { -1 };
                    cur = (other.0, partner_end, t2);
                    // Same letter continues across a smooth join.
                    if cur.0 == s0 && cur.1 == e0 && cur.2 == 1 {
                        break;
                    }
                }
                Terminus::Event(ev) => {
                    let (s2, e2) = *ws
                        .corners
                        .get(&(ev as usize, s, e))
                        .ok_or_else(|| err("missing corner at a seam vertex"))?;
                    // Direction away from the event for the next segment.
                    let germs = &ws.event_germs[&ev];
                    let (germ_seg, germ_x) = germs
                        .iter()
                        .copied()
                        .find(|&(gs, _)| gs == s2)
                        .ok_or_else(|| err("corner segment is not a germ"))?;
                    debug_assert_eq!(germ_seg, s2);
                    let t2 = if germ_x == 0 { 1 } else { -1 };
                    cur = (s2, e2, t2);
                    if cur.0 == s0 && cur.1 == e0 && cur.2 == 1 {
                        break;
                    }
                    letter_start = true;
                }
                _ => return Err(err("boundary walk reached an open terminus")),
            }
        }
        // Coalesce letters: consecutive equal entries arise from joins
        // within one chain; wrap-around too.
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
        words_by_facet.entry(facet).or_default().push(merged);
    }

    // Facets.
    let mut prefoam = PreFoam::empty();
    for ev in 0..ws.n_events {
        prefoam.vertices.insert(ev as u32);
    }
    prefoam.seams = seams;
    for (fi, acc) in ws.facets.iter().enumerate() {
        let words = words_by_facet.remove(&fi).unwrap_or_default();
        let b = words.len() as i64;
        let twice_genus = 2 - acc.chi - b;
        if twice_genus < 0 || twice_genus % 2 != 0 {
            return Err(err(format!(
                "facet chi {} with {} boundary circles is not an orientable surface",
                acc.chi, b
            )));
        }
        prefoam.facets.insert(
            fi as u32,
            Facet {
                orientable: true,
                genus_or_crosscaps: (twice_genus / 2) as u32,
                boundary: words,
                dots: acc.dots,
                triangles: acc.tris,
                squares: acc.sqs,
            },
        );
    }
    prefoam.embedded = true;
    let report = prefoam.validate();
    if !report.ok() {
        return Err(err(format!("compiled pre-foam is invalid: {}", report)));
    }
    Ok(prefoam)
}

/// Compile a closed movie all the way to its pre-foam.
pub fn compile_closed(movie: &Movie) -> Result<PreFoam, EvalError> {
    let mut c = Compiler::run(movie)?;
    let foam = assemble_closed(&mut c)?;
    if foam.degree() != movie.degree() {
        return Err(err(format!(
            "degree law violated: foam {} vs moves {}",
            foam.degree(),
            movie.degree()
        )));
    }
    Ok(foam)
}

/// Compile two open movies and glue them along an explicit boundary
/// identification (`iso[h_b] = h_a` in final-frame half indices).
pub fn pair_closed_iso(a: &Movie, b: &Movie, iso: &[usize]) -> Result<PreFoam, EvalError> {
    let mut ca = Compiler::run(a)?;
    let mut cb = Compiler::run(b)?;
    let foam = {
        if !ca.finished || !cb.finished {
            return Err(err("glue requires finished compilations"));
        }
        let mut parts: [&mut Compiler; 2] = [&mut ca, &mut cb];
        let ws = build_workspace(&mut parts, Some(iso))?;
        assemble_from_workspace(ws)?
    };
    if foam.degree() != a.degree() + b.degree() {
        return Err(err(format!(
            "degree law violated in gluing: foam {} vs moves {}",
            foam.degree(),
            a.degree() + b.degree()
        )));
    }
    Ok(foam)
}

/// Compile two open movies over a common final web and glue them into the
/// closed pairing pre-foam.
pub fn pair_closed(a: &Movie, b: &Movie) -> Result<PreFoam, EvalError> {
    let mut ca = Compiler::run(a)?;
    let mut cb = Compiler::run(b)?;
    let foam = glue_closed(&mut ca, &mut cb)?;
    if foam.degree() != a.degree() + b.degree() {
        return Err(err(format!(
            "degree law violated in gluing: foam {} vs moves {}",
            foam.degree(),
            a.degree() + b.degree()
        )));
    }
    Ok(foam)
}

// --- open-movie data for boundary evaluations -------------------------------

/// Facet and seam structure of an open compilation, enough to enumerate
/// colorings and compute bounded bicolored Euler characteristics.
pub struct OpenFoam {
    pub facets: Vec<FacetData>,
    /// Branch facet triples per seam; a seam with fewer than three
    /// distinct classes admits no coloring.
    pub seam_branches: Vec<Vec<usize>>,
    /// Euler characteristic of the seam complex.
    pub seam_chi: i64,
    /// Facet swept by each final-frame edge (by canonical half-edge) and
    /// each final-frame loop.
    pub top_edge_facet: BTreeMap<usize, usize>,
    pub top_loop_facet: Vec<usize>,
    pub final_web: Web,
}

#[derive(Debug, Clone)]
pub struct FacetData {
    pub chi: i64,
    pub dots: u32,
    pub triangles: u32,
    pub squares: u32,
}

pub fn open_data(movie: &Movie) -> Result<OpenFoam, EvalError> {
    let mut c = Compiler::run(movie)?;
    let final_web = c.final_frame();
    let ends = c.web.dense_ends();
    let loops = c.web.loops.clone();
    let mut parts: [&mut Compiler; 1] = [&mut c];
    let ws = build_workspace(&mut parts, None)?;
    // Chains including top-terminated ones.
    let mut used = vec![false; ws.segs.len()];
    let mut branches: Vec<Vec<usize>> = Vec::new();
    let mut n_open_chains = 0usize;
    let mut n_top_ends = 0usize;
    let mut cparent: HashMap<(u32, End), (u32, End)> = HashMap::new();
    fn cfind2(p: &mut HashMap<(u32, End), (u32, End)>, x: (u32, End)) -> (u32, End) {
        let q = *p.get(&x).unwrap_or(&x);
        if q == x {
            return x;
        }
        let r = cfind2(p, q);
        p.insert(x, r);
        r
    }
    for j in &ws.joins {
        for (ea, eb) in j.smap {
            let ka = cfind2(&mut cparent, (j.a.0, ea));
            let kb = cfind2(&mut cparent, (j.b.0, eb));
            if ka != kb {
                cparent.insert(ka, kb);
            }
        }
    }
    // Walk chains from hard stops (events, tops).
    let mut starts: Vec<SegEnd> = Vec::new();
    for (si, s) in ws.segs.iter().enumerate() {
        for x in [0u8, 1] {
            match s.terminus(x) {
                Terminus::Event(_) | Terminus::Top | Terminus::Bottom => {
                    starts.push((si as u32, x))
                }
                _ => {}
            }
        }
    }
    starts.sort_unstable();
    let mut all_chains: Vec<(Vec<(u32, i8)>, bool, usize)> = Vec::new();
    for &(s0, x0) in &starts {
        if used[s0 as usize] {
            continue;
        }
        let mut portions = Vec::new();
        let mut top_ends = match ws.segs[s0 as usize].terminus(x0) {
            Terminus::Top | Terminus::Bottom => 1,
            _ => 0,
        };
        let mut cur = (s0, x0);
        loop {
            let (s, x) = cur;
            used[s as usize] = true;
            portions.push((s, if x == 0 { 1i8 } else { -1 }));
            let far = 1 - x;
            match ws.segs[s as usize].terminus(far) {
                Terminus::Join(j) => {
                    let (other, _, _) = ws.join_other(j, (s, far));
                    cur = other;
                }
                Terminus::Top | Terminus::Bottom => {
                    top_ends += 1;
                    break;
                }
                Terminus::Event(_) => break,
                Terminus::Open => return Err(err("unfinished compilation")),
            }
        }
        all_chains.push((portions, false, top_ends));
    }
    for s0 in 0..ws.segs.len() as u32 {
        if used[s0 as usize] {
            continue;
        }
        let mut portions = Vec::new();
        let mut cur = (s0, 0u8);
        loop {
            let (s, x) = cur;
            if used[s as usize] {
                break;
            }
            used[s as usize] = true;
            portions.push((s, if x == 0 { 1i8 } else { -1 }));
            match ws.segs[s as usize].terminus(1 - x) {
                Terminus::Join(j) => {
                    let (other, _, _) = ws.join_other(j, (s, 1 - x));
                    cur = other;
                }
                _ => return Err(err("circle chain hit a hard terminus")),
            }
        }
        all_chains.push((portions, true, 0));
    }
    for (portions, is_circle, top_ends) in &all_chains {
        let mut classes: Vec<(u32, End)> = Vec::new();
        for &(s, _) in portions {
            for e in ws.segs[s as usize].slots {
                let r = cfind2(&mut cparent, (s, e));
                if !classes.contains(&r) {
                    classes.push(r);
                }
            }
        }
        classes.sort_unstable();
        branches.push(classes.iter().map(|k| ws.facet_of_slot[k]).collect());
        if !is_circle {
            n_open_chains += 1;
            n_top_ends += top_ends;
        }
    }
    let seam_chi = ws.n_events as i64 + n_top_ends as i64 - n_open_chains as i64;
    // Top marking: facet per final-frame edge and loop.
    let mut c2 = Compiler::run(movie)?;
    let mut top_edge_facet = BTreeMap::new();
    for h in final_web.edges() {
        let e = ends[h];
        let root = c2.sheet_of_end(e);
        // Map through workspace facet numbering: rebuild the same
        // root-order mapping used by build_workspace.
        top_edge_facet.insert(h, root as usize);
    }
    let mut top_loop_facet = Vec::new();
    for l in &loops {
        top_loop_facet.push(c2.sheet_of_loop(*l) as usize);
    }
    // Re-map part roots to workspace facet indices (roots in ascending
    // order, same as build_workspace).
    let roots: Vec<Fid> = {
        let set: BTreeSet<Fid> =
            (0..c2.fparent.len() as Fid).map(|f| c2.froot(f)).collect();
        set.into_iter().collect()
    };
    let root_index: HashMap<usize, usize> =
        roots.iter().enumerate().map(|(i, &r)| (r as usize, i)).collect();
    for v in top_edge_facet.values_mut() {
        *v = root_index[v];
    }
    for v in top_loop_facet.iter_mut() {
        *v = root_index[v];
    }
    Ok(OpenFoam {
        facets: ws
            .facets
            .iter()
            .map(|a| FacetData { chi: a.chi, dots: a.dots, triangles: a.tris, squares: a.sqs })
            .collect(),
        seam_branches: branches,
        seam_chi,
        top_edge_facet,
        top_loop_facet,
        final_web,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_closed;
    use crate::foamspace::{Move, Movie, Strand};
    use crate::prefoam::catalog;

    fn closed(moves: Vec<Move>) -> PreFoam {
        compile_closed(&Movie::new(moves)).unwrap()
    }

    #[test]
    fn sphere_movies() {
        for dots in 0..5u32 {
            let mut moves = vec![Move::Birth];
            for _ in 0..dots {
                moves.push(Move::Dot(Strand::Loop(0)));
            }
            moves.push(Move::Death(0));
            let foam = closed(moves);
            assert_eq!(foam.facets.len(), 1);
            assert!(foam.seams.is_empty());
            assert_eq!(foam.degree(), 2 * dots as i64 - 4);
            assert_eq!(
                eval_closed(&foam).unwrap(),
                eval_closed(&catalog::sphere(dots)).unwrap(),
                "{} dots",
                dots
            );
        }
    }

    #[test]
    fn torus_movie() {
        let foam = closed(vec![
            Move::Birth,
            Move::SaddleLoopSplit(0),
            Move::SaddleLoops(0, 1),
            Move::Death(0),
        ]);
        assert_eq!(foam.facets.len(), 1);
        let f = foam.facets.values().next().unwrap();
        assert_eq!(f.euler(), 0);
        assert_eq!(f.genus_or_crosscaps, 1);
        assert_eq!(eval_closed(&foam).unwrap(), eval_closed(&catalog::closed_surface(1, 0)).unwrap());
    }

    #[test]
    fn theta_movie_matches_catalog() {
        // Two cups zipped, then unzipped and capped: the theta pre-foam.
        let build = |n1: u32, n2: u32, n3: u32| -> PreFoam {
            let mut moves = vec![Move::Birth, Move::Birth];
            for _ in 0..n1 {
                moves.push(Move::Dot(Strand::Loop(0)));
            }
            for _ in 0..n2 {
                moves.push(Move::Dot(Strand::Loop(1)));
            }
            moves.push(Move::Zip(Strand::Loop(0), Strand::Loop(1)));
            for _ in 0..n3 {
                moves.push(Move::Dot(Strand::Edge(0)));
            }
            moves.push(Move::Unzip(0));
            moves.push(Move::Death(0));
            moves.push(Move::Death(0));
            closed(moves)
        };
        let foam = build(2, 1, 0);
        assert_eq!(foam.facets.len(), 3);
        assert_eq!(foam.seams.len(), 1);
        assert!(matches!(
            foam.seams.values().next().unwrap(),
            Seam::Circle { monodromy } if monodromy.is_identity()
        ));
        assert_eq!(foam.degree(), 0);
        for (n1, n2, n3) in [(2, 1, 0), (4, 2, 0), (1, 1, 0), (3, 2, 1)] {
            assert_eq!(
                eval_closed(&build(n1, n2, n3)).unwrap(),
                eval_closed(&catalog::theta(n1, n2, n3)).unwrap(),
                "theta({},{},{})",
                n1,
                n2,
                n3
            );
        }
    }

    #[test]
    fn gluing_cups_gives_spheres() {
        let cup = |dots: u32| -> Movie {
            let mut moves = vec![Move::Birth];
            for _ in 0..dots {
                moves.push(Move::Dot(Strand::Loop(0)));
            }
            Movie::new(moves)
        };
        for a in 0..3u32 {
            for b in 0..3u32 {
                let foam = pair_closed(&cup(a), &cup(b)).unwrap();
                assert_eq!(
                    eval_closed(&foam).unwrap(),
                    eval_closed(&catalog::sphere(a + b)).unwrap(),
                    "pairing {} with {}",
                    a,
                    b
                );
            }
        }
    }

    #[test]
    fn vtx_movie_compiles_and_matches_jflat() {
        // Two cups zipped into a theta web, the bar rotated twice, then
        // unzipped and capped: a closed foam with two seam vertices.
        let moves = vec![
            Move::Birth,
            Move::Birth,
            Move::Zip(Strand::Loop(0), Strand::Loop(1)),
            Move::Vtx(0),
            Move::Vtx(4),
            Move::Unzip(4),
            Move::Death(0),
            Move::Death(0),
        ];
        let foam = closed(moves);
        assert_eq!(foam.vertices.len(), 2);
        // The zip seam closes into a loop at the first seam vertex, so the
        // seam graph is not bipartite and everything vanishes.
        assert!(!foam.seam_bipartite());
        assert_eq!(foam.degree(), -4);
        assert!(eval_closed(&foam).unwrap().is_zero());
        let outcome =
            crate::jflat::jflat_survey(&foam, crate::jflat::Strategy::PerfectMatching).unwrap();
        assert_eq!(outcome, crate::jflat::JflatOutcome::WellDefined(false));
    }

    #[test]
    fn vtx_cancellation_is_evaluation_neutral() {
        // Add dots to reach total degree zero: dot the bar sheets.
        let moves = vec![
            Move::Birth,
            Move::Birth,
            Move::Zip(Strand::Loop(0), Strand::Loop(1)),
            Move::Vtx(0),
            Move::Dot(Strand::Edge(4)),
            Move::Vtx(4),
            Move::Dot(Strand::Edge(4)),
            Move::Unzip(4),
            Move::Death(0),
            Move::Death(0),
        ];
        let foam = closed(moves);
        assert_eq!(foam.vertices.len(), 2);
        assert_eq!(foam.degree(), 0);
        let before = eval_closed(&foam).unwrap();
        // Cancel the matching edge(s) joining the two vertices.
        let matchings = crate::jflat::perfect_matchings(&foam);
        assert!(!matchings.is_empty());
        for m in &matchings {
            let mut f = foam.clone();
            for &e in m {
                f = crate::eval::surgery::cancel_vertex_pair(&f, e).unwrap();
            }
            assert_eq!(eval_closed(&f).unwrap(), before);
        }
        let outcome =
            crate::jflat::jflat_survey(&foam, crate::jflat::Strategy::PerfectMatching).unwrap();
        assert!(matches!(outcome, crate::jflat::JflatOutcome::WellDefined(_)));
    }

    #[test]
    fn reflect_simple_movies() {
        let m = Movie::new(vec![Move::Birth, Move::Dot(Strand::Loop(0))]);
        let r = m.reflect().unwrap();
        assert_eq!(r.moves, vec![Move::Dot(Strand::Loop(0)), Move::Death(0)]);
        assert_eq!(r.degree(), m.degree());
        assert_eq!(r.initial.free_loops, 1);
    }

    #[test]
    fn reflect_then_concat_closes() {
        let u = Movie::new(vec![
            Move::Birth,
            Move::Birth,
            Move::Zip(Strand::Loop(0), Strand::Loop(1)),
        ]);
        let r = u.reflect().unwrap();
        let closed_movie = concat_movies(&u, &r).unwrap();
        let foam = compile_closed(&closed_movie).unwrap();
        let glued = pair_closed(&u, &u).unwrap();
        assert_eq!(eval_closed(&foam).unwrap(), eval_closed(&glued).unwrap());
        // theta with no dots evaluates to zero.
        assert!(eval_closed(&foam).unwrap().is_zero());
    }

    #[test]
    fn blowup_blowdown_roundtrip() {
        let base = Movie::new(vec![
            Move::Birth,
            Move::Birth,
            Move::Zip(Strand::Loop(0), Strand::Loop(1)),
        ]);
        let before = base.final_web().unwrap();
        let up = base.then(&[Move::Blowup(0)]);
        let mid = up.final_web().unwrap();
        assert_eq!(mid.vertex_count(), 4);
        assert!(mid.validate().is_ok());
        // The blowdown site: a half-edge on the new triangle face. The
        // reflection computes it for us.
        let r = up.reflect().unwrap();
        let first = r.moves[0];
        assert!(matches!(first, Move::Blowdown(_)));
        let down = up.then(&[first]);
        let after = down.final_web().unwrap();
        assert!(web_iso(&before, &after).is_some());
        // Close it up and check the degree law end to end.
        let refl = down.reflect().unwrap();
        let whole = concat_movies(&down, &refl).unwrap();
        let foam = compile_closed(&whole).unwrap();
        assert_eq!(foam.degree(), whole.degree());
        assert_eq!(foam.vertices.len(), 4);
        assert!(foam.seam_bipartite());
    }
}
