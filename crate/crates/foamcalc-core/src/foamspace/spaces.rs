//! State spaces via the universal construction: boundary evaluations of
//! open movies, generator synthesis for reducible webs, Gram matrices
//! under base changes, and graded dimensions.

use super::compile::{open_data, pair_closed, OpenFoam};
use super::{Move, Movie, Strand};
use crate::eval::{eval_closed_over, EvalError};
use crate::ring::{Alphabet, BaseChange, BcElem, LaurentInt, LocElem, Poly};
use crate::web::{ReductionKind, TaitColoring, Web, WebError};
use std::collections::BTreeMap;

fn err(msg: impl Into<String>) -> EvalError {
    EvalError::Surgery(msg.into())
}

/// Colorings of an open compiled foam: one color per facet, distinct
/// triples along every seam.
fn open_colorings(open: &OpenFoam) -> Vec<Vec<u8>> {
    for branches in &open.seam_branches {
        if branches.len() != 3 {
            return Vec::new();
        }
        let mut sorted = branches.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != 3 {
            return Vec::new();
        }
    }
    let n = open.facets.len();
    let mut out = Vec::new();
    let mut colors = vec![0u8; n];
    fn rec(i: usize, colors: &mut Vec<u8>, open: &OpenFoam, out: &mut Vec<Vec<u8>>) {
        if i == colors.len() {
            out.push(colors.clone());
            return;
        }
        'next: for c in 1..=3u8 {
            colors[i] = c;
            for branches in &open.seam_branches {
                for a in 0..3 {
                    for b in (a + 1)..3 {
                        let (fa, fb) = (branches[a], branches[b]);
                        if fa <= i && fb <= i && colors[fa] == colors[fb] {
                            colors[i] = 0;
                            continue 'next;
                        }
                    }
                }
            }
            rec(i + 1, colors, open, out);
            colors[i] = 0;
        }
    }
    rec(0, &mut colors, open, &mut out);
    out
}

/// Does the facet coloring restrict to the Tait coloring on the final web?
fn restricts_to(open: &OpenFoam, colors: &[u8], t: &TaitColoring) -> bool {
    for (&h, &fi) in &open.top_edge_facet {
        let edge = open.final_web.edge_of(h);
        let Some(&want) = t.edge_colors.get(&edge) else { return false };
        if colors[fi] != want {
            return false;
        }
    }
    for (k, &fi) in open.top_loop_facet.iter().enumerate() {
        if t.loop_colors.get(k) != Some(&colors[fi]) {
            return false;
        }
    }
    true
}

fn pair_idx(a: u8, b: u8) -> usize {
    let (lo, hi) = (a.min(b) as usize - 1, a.max(b) as usize - 1);
    crate::ring::PAIRS.iter().position(|&p| p == (lo, hi)).unwrap()
}

fn colored_value(open: &OpenFoam, colors: &[u8]) -> LocElem {
    let mut num = Poly::one(Alphabet::Y);
    let mut den = [0i64; 3];
    for pair in [(1u8, 2u8), (1, 3), (2, 3)] {
        let chi: i64 = open.seam_chi
            + open
                .facets
                .iter()
                .enumerate()
                .filter(|(i, _)| colors[*i] == pair.0 || colors[*i] == pair.1)
                .map(|(_, f)| f.chi)
                .sum::<i64>();
        den[pair_idx(pair.0, pair.1)] += chi;
    }
    for (i, f) in open.facets.iter().enumerate() {
        let color = colors[i] as usize - 1;
        if f.dots > 0 {
            let mut m = [0u16; 3];
            m[color] = 2 * f.dots as u16;
            num = num.mul_mono(&m);
        }
        if f.triangles > 0 {
            let others: Vec<usize> = (0..3).filter(|&v| v != color).collect();
            den[pair_idx(others[0] as u8 + 1, others[1] as u8 + 1)] += 2 * f.triangles as i64;
        }
        if f.squares > 0 {
            for other in (0..3).filter(|&v| v != color) {
                den[pair_idx(color as u8 + 1, other as u8 + 1)] += 2 * f.squares as i64;
            }
        }
    }
    let mut out = LocElem::from_poly(num);
    for k in 0..3 {
        out = out.mul_form_pow(k, -(den[k] as i32));
    }
    out
}

/// The boundary evaluation of a movie from the empty web: the sum of
/// colored values over colorings extending the Tait coloring of the final
/// web.
pub fn boundary_eval(movie: &Movie, t: &TaitColoring) -> Result<LocElem, EvalError> {
    let open = open_data(movie)?;
    boundary_eval_open(&open, t)
}

pub fn boundary_eval_open(open: &OpenFoam, t: &TaitColoring) -> Result<LocElem, EvalError> {
    let mut total = LocElem::zero();
    for colors in open_colorings(open) {
        if restricts_to(open, &colors, t) {
            total = total.add(&colored_value(open, &colors));
        }
    }
    Ok(total)
}

/// The number of `ij`-cycles of a Tait coloring (free loops count once
/// per pair containing their color).
pub fn cycle_counts(web: &Web, t: &TaitColoring) -> [i64; 3] {
    let mut counts = [0i64; 3];
    for (k, pair) in [(1u8, 2u8), (1, 3), (2, 3)].into_iter().enumerate() {
        let mut visited: BTreeMap<usize, bool> = BTreeMap::new();
        for h in web.edges() {
            let c = t.edge_colors[&h];
            if c == pair.0 || c == pair.1 {
                visited.insert(h, false);
            }
        }
        let starts: Vec<usize> = visited.keys().copied().collect();
        for start in starts {
            if visited[&start] {
                continue;
            }
            // Walk the bicolored cycle: at each vertex exactly one other
            // pair-colored edge continues.
            let mut cur = start;
            loop {
                let edge = web.edge_of(cur);
                if visited.get(&edge) == Some(&true) {
                    break;
                }
                visited.insert(edge, true);
                let far = web.pairing[cur];
                let mut next = web.rotation[far];
                while web.edge_of(next) == edge || {
                    let c = t.edge_colors[&web.edge_of(next)];
                    c != pair.0 && c != pair.1
                } {
                    next = web.rotation[next];
                    if next == far {
                        break;
                    }
                }
                if web.edge_of(next) == edge {
                    break;
                }
                cur = next;
            }
            counts[k] += 1;
        }
        for &c in &t.loop_colors {
            if c == pair.0 || c == pair.1 {
                counts[k] += 1;
            }
        }
    }
    counts
}

/// Verify a boundary value lies in the expected lattice: multiplying by
/// the cycle-counted root powers clears denominators and square roots.
pub fn membership_check(value: &LocElem, m: &[i64; 3]) -> Result<(), EvalError> {
    let mut cleared = value.clone();
    for k in 0..3 {
        cleared = cleared.mul_form_pow(k, m[k] as i32);
    }
    if cleared.den != [0, 0, 0] {
        return Err(err(format!(
            "MembershipViolation: denominator survives in {}",
            cleared
        )));
    }
    cleared
        .num
        .y_to_x()
        .map_err(|_| err(format!("MembershipViolation: odd root exponents in {}", cleared)))?;
    Ok(())
}

// --- generators ------------------------------------------------------------

/// Generator movies for a reducible web via the face recursion: circles
/// add dotted cups, digons a zipped balloon with or without a dot on its
/// bar sheet, squares the union over both smoothings with a double-zipped
/// balloon, triangles a blowup. Bridged webs have no generators.
pub fn generators(web: &Web) -> Result<Vec<Movie>, WebError> {
    web.validate()?;
    if web.half_edge_count() == 0 && web.free_loops == 0 {
        return Ok(vec![Movie::empty()]);
    }
    let step = web.find_reduction().ok_or(WebError::Irreducible)?;
    let face_of = |site: usize| -> Vec<usize> {
        web.faces().into_iter().find(|f| f.contains(&site)).expect("site face")
    };
    match step.kind {
        ReductionKind::Bridge => Ok(Vec::new()),
        ReductionKind::Circle => {
            let reduced = &step.results[0];
            let subgens = generators(reduced)?;
            let suffixes = vec![
                vec![SiteMove::Birth],
                vec![SiteMove::Birth, SiteMove::DotNewLoop],
                vec![SiteMove::Birth, SiteMove::DotNewLoop, SiteMove::DotNewLoop],
            ];
            append_caps(subgens, reduced, &suffixes)
        }
        ReductionKind::Digon => {
            let face = face_of(step.site.unwrap());
            let (reduced, site) = web.digon_with_site(&face);
            let subgens = generators(&reduced)?;
            let cap = match site {
                Some(h) => vec![SiteMove::Birth, SiteMove::ZipLoopOnEdge(h)],
                None => vec![SiteMove::Birth, SiteMove::ZipLoopOnLoop(reduced.free_loops - 1)],
            };
            let mut dotted = cap.clone();
            dotted.push(SiteMove::DotNewBar);
            append_caps(subgens, &reduced, &[cap, dotted])
        }
        ReductionKind::Triangle => {
            let face = face_of(step.site.unwrap());
            let (reduced, site) = web.triangle_with_site(&face);
            let subgens = generators(&reduced)?;
            append_caps(subgens, &reduced, &[vec![SiteMove::Blowup(site)]])
        }
        ReductionKind::Square => {
            let face = face_of(step.site.unwrap());
            let smoothings = web.square_with_sites(&face);
            let mut out = Vec::new();
            for (reduced, sites) in smoothings {
                let subgens = generators(&reduced)?;
                let first = match sites[0] {
                    Some(h) => SiteMove::ZipLoopOnEdge(h),
                    None => SiteMove::ZipLoopOnLoop(reduced.free_loops - 1),
                };
                let second = match sites[1] {
                    Some(h) => SiteMove::ZipArcOnEdge(h),
                    None => SiteMove::ZipArcOnLoop(0),
                };
                let cap = vec![SiteMove::Birth, first, second];
                out.extend(append_caps(subgens, &reduced, &[cap])?);
            }
            Ok(out)
        }
    }
}

fn append_caps(
    subgens: Vec<Movie>,
    reduced: &Web,
    suffixes: &[Vec<SiteMove>],
) -> Result<Vec<Movie>, WebError> {
    let mut out = Vec::new();
    for g in subgens {
        let gweb = g.final_web().map_err(|e| WebError::BadSite(e.to_string()))?;
        let iso = super::compile::web_iso(&gweb, reduced).ok_or_else(|| {
            WebError::BadSite("generator does not end at the reduced web".into())
        })?;
        for suffix in suffixes {
            let mut movie = g.clone();
            let mut halves = gweb.half_edge_count();
            let mut loops = gweb.free_loops;
            for mv in suffix {
                // The first planar-legal variant wins; zips admit mirror
                // attachments and only one closes up planar in general.
                let candidates = mv.resolve(&iso, &mut halves, &mut loops);
                let mut chosen = None;
                for concrete in candidates {
                    let attempt = movie.then(&[concrete]);
                    if attempt.final_web().is_ok() {
                        chosen = Some(attempt);
                        break;
                    }
                }
                movie = chosen.ok_or_else(|| {
                    WebError::BadSite("no planar variant for a generator cap".into())
                })?;
            }
            out.push(movie);
        }
    }
    Ok(out)
}

/// A cap move with sites in the reduced web's labels; resolved against a
/// generator's final frame through the web isomorphism. `halves` and
/// `loops` track frame sizes while the suffix builds (a zip appends its
/// six fresh half-edges at the end of the order).
#[derive(Debug, Clone)]
enum SiteMove {
    Birth,
    DotNewLoop,
    /// Dot on the bar sheet of the most recent zip.
    DotNewBar,
    /// Zip the newest loop onto the mapped edge.
    ZipLoopOnEdge(usize),
    /// Zip the newest loop onto the mapped loop.
    ZipLoopOnLoop(usize),
    /// Zip the arc remnant of the previous zip onto the mapped edge.
    ZipArcOnEdge(usize),
    /// Zip the arc remnant onto a loop.
    ZipArcOnLoop(usize),
    /// Blow the mapped vertex half up into a triangle.
    Blowup(usize),
}

impl SiteMove {
    /// Candidate concrete moves, best first; `halves` and `loops` track
    /// the frame sizes assuming one of them applies.
    fn resolve(&self, iso: &[usize], halves: &mut usize, loops: &mut usize) -> Vec<Move> {
        match self {
            SiteMove::Birth => {
                *loops += 1;
                vec![Move::Birth]
            }
            SiteMove::DotNewLoop => vec![Move::Dot(Strand::Loop(*loops - 1))],
            SiteMove::DotNewBar => vec![Move::Dot(Strand::Edge(*halves - 6))],
            SiteMove::ZipLoopOnEdge(h) => {
                *loops -= 1;
                let site = iso[*h];
                let fresh = *loops;
                *halves += 6;
                vec![Move::Zip(Strand::Loop(fresh), Strand::Edge(site))]
            }
            SiteMove::ZipLoopOnLoop(i) => {
                let fresh = *loops - 1;
                *loops -= 2;
                *halves += 6;
                vec![Move::Zip(Strand::Loop(fresh), Strand::Loop(*i))]
            }
            SiteMove::ZipArcOnEdge(h) => {
                // The arc remnant of the previous zip occupies the b and c
                // slots; either side may be the planar one, and the target
                // strand may need its other half.
                let (b, c) = (*halves - 3, *halves - 2);
                let site = iso[*h];
                *halves += 6;
                vec![
                    Move::Zip(Strand::Edge(b), Strand::Edge(site)),
                    Move::Zip(Strand::Edge(c), Strand::Edge(site)),
                    Move::Zip(Strand::Edge(site), Strand::Edge(b)),
                    Move::Zip(Strand::Edge(site), Strand::Edge(c)),
                ]
            }
            SiteMove::ZipArcOnLoop(i) => {
                let (b, c) = (*halves - 3, *halves - 2);
                *loops -= 1;
                *halves += 6;
                vec![
                    Move::Zip(Strand::Edge(b), Strand::Loop(*i)),
                    Move::Zip(Strand::Edge(c), Strand::Loop(*i)),
                ]
            }
            SiteMove::Blowup(h) => {
                *halves += 6;
                vec![Move::Blowup(iso[*h])]
            }
        }
    }
}

// --- Gram matrices and graded dimension -------------------------------------

pub struct GramMatrix {
    pub gens: Vec<Movie>,
    pub degrees: Vec<i64>,
    pub entries: Vec<Vec<BcElem>>,
    pub bc: BaseChange,
}

/// Pairing matrix of the generators under a base change: entry `(i, j)`
/// evaluates the closed foam pairing generator `i` against generator `j`.
pub fn gram_matrix(gens: &[Movie], bc: BaseChange) -> Result<GramMatrix, EvalError> {
    let n = gens.len();
    let zero = crate::ring::apply_to_poly(&Poly::zero(Alphabet::E), bc)?;
    let mut entries = vec![vec![zero; n]; n];
    for i in 0..n {
        for j in i..n {
            let foam = pair_closed(&gens[i], &gens[j])?;
            let v = eval_closed_over(&foam, bc)?;
            entries[i][j] = v.clone();
            entries[j][i] = v;
        }
    }
    Ok(GramMatrix {
        gens: gens.to_vec(),
        degrees: gens.iter().map(|g| g.degree()).collect(),
        entries,
        bc,
    })
}

/// Graded dimension of the state space over the ground field: ranks of
/// the degree-paired blocks of the Gram matrix under the augmentation.
pub fn qdim(web: &Web) -> Result<LaurentInt, EvalError> {
    let gens = generators(web).map_err(|e| err(e.to_string()))?;
    if gens.is_empty() {
        return Ok(LaurentInt::zero());
    }
    let gram = gram_matrix(&gens, BaseChange::K)?;
    qdim_of_gram(&gram)
}

pub fn qdim_of_gram(gram: &GramMatrix) -> Result<LaurentInt, EvalError> {
    let degrees = &gram.degrees;
    let n = degrees.len();
    let mut out = LaurentInt::zero();
    let degs: std::collections::BTreeSet<i64> = degrees.iter().copied().collect();
    for &d in &degs {
        let rows: Vec<usize> = (0..n).filter(|&i| degrees[i] == d).collect();
        let cols: Vec<usize> = (0..n).filter(|&i| degrees[i] == -d).collect();
        let mat: Vec<Vec<bool>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| !gram.entries[i][j].is_zero()).collect())
            .collect();
        let rank = f2_rank(mat);
        if rank > 0 {
            out.insert(d, rank as i64);
        }
    }
    Ok(out)
}

pub fn f2_rank(mut m: Vec<Vec<bool>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        if let Some(p) = (row..rows).find(|&r| m[r][col]) {
            m.swap(row, p);
            for r in 0..rows {
                if r != row && m[r][col] {
                    for c in col..cols {
                        let v = m[row][c];
                        m[r][c] ^= v;
                    }
                }
            }
            row += 1;
            rank += 1;
        }
    }
    rank
}

// --- random movies -----------------------------------------------------------

/// Small deterministic generator for the randomized corpora.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }
}

/// A random legal movie from the empty web, by rejection: candidates are
/// validated by recompiling the extended movie.
pub fn random_movie(seed: u64, length: usize) -> Movie {
    let mut rng = SplitMix(seed);
    let mut movie = Movie::empty();
    let mut frame = Web::empty();
    let mut guard = 0;
    while movie.moves.len() < length && guard < 80 * length {
        guard += 1;
        let n = frame.half_edge_count();
        let loops = frame.free_loops;
        let candidate = match rng.below(10) {
            0 => Move::Birth,
            1 if loops > 0 => Move::Death(rng.below(loops)),
            2 if loops > 1 => {
                let a = rng.below(loops);
                let b = (a + 1 + rng.below(loops - 1)) % loops;
                Move::SaddleLoops(a, b)
            }
            3 if loops > 0 => Move::SaddleLoopSplit(rng.below(loops)),
            4 if loops > 1 => {
                let a = rng.below(loops);
                let b = (a + 1 + rng.below(loops - 1)) % loops;
                Move::Zip(Strand::Loop(a), Strand::Loop(b))
            }
            5 if loops > 0 && n > 0 => {
                Move::Zip(Strand::Loop(rng.below(loops)), Strand::Edge(rng.below(n)))
            }
            6 if n > 0 => Move::Unzip(rng.below(n)),
            7 if n > 0 => Move::Vtx(rng.below(n)),
            8 if n > 0 || loops > 0 => {
                let s = if loops > 0 && (n == 0 || rng.below(2) == 0) {
                    Strand::Loop(rng.below(loops))
                } else {
                    Strand::Edge(rng.below(n))
                };
                Move::Dot(s)
            }
            9 if n > 0 => Move::Blowup(rng.below(n)),
            _ => continue,
        };
        let attempt = movie.then(&[candidate]);
        if let Ok(w) = attempt.final_web() {
            movie = attempt;
            frame = w;
        }
    }
    movie
}

/// A random open movie paired with a dotted variant of itself; gluing the
/// pair yields a random closed foam.
pub fn random_closed_pair(seed: u64, length: usize) -> (Movie, Movie) {
    let mut rng = SplitMix(seed ^ 0xabcdef);
    let u = random_movie(seed, length);
    let frame = u.final_web().expect("random movie is legal");
    let mut v = u.clone();
    for _ in 0..rng.below(3) {
        let n = frame.half_edge_count();
        let loops = frame.free_loops;
        if n == 0 && loops == 0 {
            break;
        }
        let s = if loops > 0 && (n == 0 || rng.below(2) == 0) {
            Strand::Loop(rng.below(loops))
        } else {
            Strand::Edge(rng.below(n))
        };
        v = v.then(&[Move::Dot(s)]);
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_closed;
    use crate::ring::parse::parse_poly;
    use crate::web::shapes;

    fn cup(dots: u32) -> Movie {
        let mut moves = vec![Move::Birth];
        for _ in 0..dots {
            moves.push(Move::Dot(Strand::Loop(0)));
        }
        Movie::new(moves)
    }

    #[test]
    fn cup_boundary_values() {
        // Cup colored i evaluates to 1/((Yi+Yj)(Yi+Yk)).
        let t = TaitColoring { edge_colors: BTreeMap::new(), loop_colors: vec![1] };
        let v = boundary_eval(&cup(0), &t).unwrap();
        assert_eq!(v.den, [1, 1, 0]);
        assert!(v.num.is_one());
        let td = TaitColoring { edge_colors: BTreeMap::new(), loop_colors: vec![2] };
        let vd = boundary_eval(&cup(1), &td).unwrap();
        assert_eq!(vd.den, [1, 0, 1]);
        assert_eq!(vd.num, Poly::monomial(Alphabet::Y, [0, 2, 0]));
        let w = Web::loops(1);
        let m = cycle_counts(&w, &t);
        assert_eq!(m, [1, 1, 0]);
        membership_check(&v, &m).unwrap();
    }

    #[test]
    fn bilinear_route_matches_closed_evaluation() {
        for (a, b) in [(0u32, 2u32), (1, 1), (2, 2), (0, 0)] {
            let ua = cup(a);
            let ub = cup(b);
            let closed = pair_closed(&ua, &ub).unwrap();
            let direct = eval_closed(&closed).unwrap();
            let w = Web::loops(1);
            let mut total = LocElem::zero();
            for t in w.tait_colorings() {
                let va = boundary_eval(&ua, &t).unwrap();
                let vb = boundary_eval(&ub, &t).unwrap();
                total = total.add(&va.mul(&vb));
            }
            let as_loc = LocElem::from_x_poly(&direct.elementary_to_x());
            assert_eq!(total, as_loc, "cups {} {}", a, b);
        }
    }

    #[test]
    fn circle_generators_and_gram() {
        let w = Web::loops(1);
        let gens = generators(&w).unwrap();
        assert_eq!(gens.len(), 3);
        let degs: Vec<i64> = gens.iter().map(|g| g.degree()).collect();
        assert_eq!(degs, vec![-2, 0, 2]);
        let gram = gram_matrix(&gens, BaseChange::Identity).unwrap();
        let e = |s: &str| BcElem::R(parse_poly(s, Alphabet::E).unwrap());
        let expect = [
            [e("0"), e("0"), e("1")],
            [e("0"), e("1"), e("E1")],
            [e("1"), e("E1"), e("E1^2 + E2")],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(gram.entries[i][j], expect[i][j], "entry {} {}", i, j);
            }
        }
        let under_k = gram_matrix(&gens, BaseChange::K).unwrap();
        let k = |b: bool| BcElem::K(b);
        let expect_k = [
            [k(false), k(false), k(true)],
            [k(false), k(true), k(false)],
            [k(true), k(false), k(false)],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(under_k.entries[i][j], expect_k[i][j]);
            }
        }
    }

    #[test]
    fn qdim_circle_and_theta() {
        assert_eq!(qdim(&Web::loops(1)).unwrap(), LaurentInt::quantum_int(3));
        let th = shapes::theta();
        let gens = generators(&th).unwrap();
        assert_eq!(gens.len(), 6);
        let mut degs: Vec<i64> = gens.iter().map(|g| g.degree()).collect();
        degs.sort_unstable();
        assert_eq!(degs, vec![-3, -1, -1, 1, 1, 3]);
        let q = qdim(&th).unwrap();
        assert_eq!(q.to_string(), "q^3 + 2q + 2q^-1 + q^-3");
        assert_eq!(q, th.kuperberg_bracket().unwrap());
    }

    #[test]
    fn qdim_vanishes_on_bridges() {
        assert!(qdim(&shapes::bridged()).unwrap().is_zero());
    }

    #[test]
    fn random_movies_obey_degree_law() {
        for seed in 0..40u64 {
            let (u, v) = random_closed_pair(seed, 6);
            let foam = pair_closed(&u, &v).unwrap();
            assert_eq!(foam.degree(), u.degree() + v.degree(), "seed {}", seed);
        }
    }
}
