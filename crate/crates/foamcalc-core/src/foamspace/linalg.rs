//! Exact linear algebra over the evaluation rings: fraction-free rank by
//! Bareiss elimination, Smith normal form over the one-variable PID
//! targets, induced maps solved by Cramer determinants, and the
//! four-periodic complex of a square site.

use super::compile::{concat_movies, pair_closed};
use super::spaces::{f2_rank, generators, gram_matrix, GramMatrix};
use super::{Move, Movie, Strand};
use crate::eval::{eval_closed_over, EvalError};
use crate::ring::{Alphabet, BaseChange, BcElem, Poly};
use crate::web::{square_site_webs, HalfEdge, Web};
use std::fmt;

fn err(msg: impl Into<String>) -> EvalError {
    EvalError::Surgery(msg.into())
}

/// A matrix of base-change values normalized into a polynomial ring (the
/// localized targets are cleared by a global unit).
pub enum NormMatrix {
    Poly(Vec<Vec<Poly>>),
    Bool(Vec<Vec<bool>>),
}

pub fn normalize_entries(entries: &[Vec<BcElem>]) -> Result<NormMatrix, EvalError> {
    if entries.is_empty() || entries[0].is_empty() {
        return Ok(NormMatrix::Bool(vec![]));
    }
    match &entries[0][0] {
        BcElem::K(_) => {
            let m = entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            BcElem::K(b) => Ok(*b),
                            _ => Err(err("mixed targets in a matrix")),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormMatrix::Bool(m))
        }
        BcElem::R(_) => {
            let m = entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            BcElem::R(p) => Ok(p.clone()),
                            _ => Err(err("mixed targets in a matrix")),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormMatrix::Poly(m))
        }
        BcElem::SingleE(_) => {
            let m = entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            BcElem::SingleE(p) => Ok(p.clone()),
                            _ => Err(err("mixed targets in a matrix")),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormMatrix::Poly(m))
        }
        BcElem::RD(_) => {
            // Clear the largest discriminant power globally.
            let mut maxp = 0;
            for row in entries {
                for e in row {
                    if let BcElem::RD(r) = e {
                        maxp = maxp.max(r.dpow);
                    }
                }
            }
            let d = crate::ring::discriminant_e();
            let m = entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            BcElem::RD(r) => Ok(r.num.mul(&d.pow(maxp - r.dpow))),
                            _ => Err(err("mixed targets in a matrix")),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormMatrix::Poly(m))
        }
        BcElem::ELaurent(_) => {
            let mut minexp = i64::MAX;
            for row in entries {
                for e in row {
                    if let BcElem::ELaurent(l) = e {
                        if let Some(&m) = l.exps.iter().next() {
                            minexp = minexp.min(m);
                        }
                    }
                }
            }
            if minexp == i64::MAX {
                minexp = 0;
            }
            let shift = (-minexp).max(0);
            let m = entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            BcElem::ELaurent(l) => {
                                let mut p = Poly::zero(Alphabet::Single(2));
                                for &k in &l.exps {
                                    p.toggle([(k + shift) as u16, 0, 0]);
                                }
                                Ok(p)
                            }
                            _ => Err(err("mixed targets in a matrix")),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormMatrix::Poly(m))
        }
    }
}

/// Fraction-free rank: all divisions are by earlier pivots and stay in
/// the polynomial ring.
pub fn bareiss_rank(mut m: Vec<Vec<Poly>>) -> Result<usize, EvalError> {
    if m.is_empty() || m[0].is_empty() {
        return Ok(0);
    }
    let rows = m.len();
    let cols = m[0].len();
    let alphabet = m[0][0].alphabet;
    let mut prev = Poly::one(alphabet);
    let mut rank = 0;
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let t = m[r][c].mul(&m[i][j]).add(&m[i][c].mul(&m[r][j]));
                m[i][j] = t.exact_div(&prev).map_err(EvalError::Ring)?;
            }
            m[i][c] = Poly::zero(alphabet);
        }
        prev = m[r][c].clone();
        r += 1;
        rank += 1;
    }
    Ok(rank)
}

/// Fraction-free determinant of a square matrix.
pub fn bareiss_det(mut m: Vec<Vec<Poly>>) -> Result<Poly, EvalError> {
    let n = m.len();
    if n == 0 {
        return Err(err("empty determinant"));
    }
    let alphabet = m[0][0].alphabet;
    let mut prev = Poly::one(alphabet);
    for r in 0..n {
        let Some(p) = (r..n).find(|&i| !m[i][r].is_zero()) else {
            return Ok(Poly::zero(alphabet));
        };
        m.swap(r, p); // char 2: no sign to track
        for i in (r + 1)..n {
            for j in (r + 1)..n {
                let t = m[r][r].mul(&m[i][j]).add(&m[i][r].mul(&m[r][j]));
                m[i][j] = t.exact_div(&prev).map_err(EvalError::Ring)?;
            }
            m[i][r] = Poly::zero(alphabet);
        }
        prev = m[r][r].clone();
    }
    Ok(m[n - 1][n - 1].clone())
}

/// Rank of a Gram matrix over the fraction field of its target.
pub fn gram_rank(gram: &GramMatrix) -> Result<usize, EvalError> {
    match normalize_entries(&gram.entries)? {
        NormMatrix::Bool(m) => Ok(f2_rank(m)),
        NormMatrix::Poly(m) => bareiss_rank(m),
    }
}

// --- univariate Smith normal form -------------------------------------------

fn uni_deg(p: &Poly) -> i64 {
    p.terms.iter().map(|m| m[0] as i64).max().unwrap_or(-1)
}

fn uni_divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let alphabet = a.alphabet;
    let db = uni_deg(b);
    assert!(db >= 0, "division by zero");
    let mut rem = a.clone();
    let mut quot = Poly::zero(alphabet);
    while uni_deg(&rem) >= db {
        let shift = (uni_deg(&rem) - db) as u16;
        quot.toggle([shift, 0, 0]);
        rem = rem.add(&b.mul_mono(&[shift, 0, 0]));
    }
    (quot, rem)
}

/// Invariant factors of a matrix over `F2[E]`, each dividing the next.
pub fn smith_invariant_factors(mut m: Vec<Vec<Poly>>) -> Result<Vec<Poly>, EvalError> {
    if m.is_empty() || m[0].is_empty() {
        return Ok(vec![]);
    }
    let rows = m.len();
    let cols = m[0].len();
    let alphabet = m[0][0].alphabet;
    let mut factors = Vec::new();
    let mut t = 0;
    loop {
        // Find the minimum-degree nonzero entry in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero()
                    && pivot.map_or(true, |(pi, pj)| uni_deg(&m[i][j]) < uni_deg(&m[pi][pj]))
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        // Reduce the pivot row and column.
        let mut clean = true;
        for i in (t + 1)..rows {
            if m[i][t].is_zero() {
                continue;
            }
            let (q, r) = uni_divmod(&m[i][t], &m[t][t]);
            for j in t..cols {
                let sub = q.mul(&m[t][j]);
                m[i][j] = m[i][j].add(&sub);
            }
            if !r.is_zero() {
                clean = false;
            }
        }
        for j in (t + 1)..cols {
            if m[t][j].is_zero() {
                continue;
            }
            let (q, r) = uni_divmod(&m[t][j], &m[t][t]);
            for i in t..rows {
                let sub = q.mul(&m[i][t]);
                m[i][j] = m[i][j].add(&sub);
            }
            if !r.is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        let row_clear = (t + 1..rows).all(|i| m[i][t].is_zero());
        let col_clear = (t + 1..cols).all(|j| m[t][j].is_zero());
        if !row_clear || !col_clear {
            continue;
        }
        // Enforce divisibility of the remaining block by the pivot.
        let mut offender = None;
        'search: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if !m[i][j].is_zero() {
                    let (_, r) = uni_divmod(&m[i][j], &m[t][t]);
                    if !r.is_zero() {
                        offender = Some(i);
                        break 'search;
                    }
                }
            }
        }
        if let Some(i) = offender {
            for j in t..cols {
                let add = m[i][j].clone();
                m[t][j] = m[t][j].add(&add);
            }
            continue;
        }
        factors.push(m[t][t].clone());
        t += 1;
        if t >= rows || t >= cols {
            break;
        }
    }
    let _ = alphabet;
    Ok(factors)
}

// --- induced maps -------------------------------------------------------------

/// A ratio of polynomial values, reduced when the division is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frac {
    pub num: Poly,
    pub den: Poly,
}

impl Frac {
    fn reduced(num: Poly, den: Poly) -> Frac {
        if num.is_zero() {
            return Frac { num: Poly::zero(den.alphabet), den: Poly::one(den.alphabet) };
        }
        match num.exact_div(&den) {
            Ok(q) => Frac { num: q, den: Poly::one(den.alphabet) },
            Err(_) => Frac { num, den },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

pub struct InducedMap {
    /// Column `j` expresses the image of source generator `j` in the
    /// target generators.
    pub columns: Vec<Vec<Frac>>,
    /// The raw pairing matrix `(target gen i, map(source gen j))`.
    pub pairings: Vec<Vec<BcElem>>,
}

/// The matrix of the map a cobordism induces between state spaces, solved
/// against the target Gram matrix by Cramer determinants.
pub fn induced_map(
    cobordism: &Movie,
    gens_source: &[Movie],
    gens_target: &[Movie],
    bc: BaseChange,
) -> Result<InducedMap, EvalError> {
    let pairings = pairing_matrix(cobordism, gens_source, gens_target, bc)?;
    let gram1 = gram_matrix(gens_target, bc)?;
    let a = match normalize_entries(&gram1.entries)? {
        NormMatrix::Poly(m) => m,
        NormMatrix::Bool(m) => m
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|b| {
                        if b {
                            Poly::one(Alphabet::Single(2))
                        } else {
                            Poly::zero(Alphabet::Single(2))
                        }
                    })
                    .collect()
            })
            .collect(),
    };
    let bmat = match normalize_entries(&pairings)? {
        NormMatrix::Poly(m) => m,
        NormMatrix::Bool(m) => m
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|b| {
                        if b {
                            Poly::one(Alphabet::Single(2))
                        } else {
                            Poly::zero(Alphabet::Single(2))
                        }
                    })
                    .collect()
            })
            .collect(),
    };
    let det = bareiss_det(a.clone())?;
    if det.is_zero() {
        return Err(err("SingularTargetGram: cannot express the induced map"));
    }
    let n = gens_target.len();
    let mut columns = Vec::new();
    for j in 0..gens_source.len() {
        let rhs: Vec<Poly> = (0..n).map(|i| bmat[i][j].clone()).collect();
        let mut col = Vec::new();
        for k in 0..n {
            let mut replaced = a.clone();
            for i in 0..n {
                replaced[i][k] = rhs[i].clone();
            }
            let dk = bareiss_det(replaced)?;
            col.push(Frac::reduced(dk, det.clone()));
        }
        columns.push(col);
    }
    Ok(InducedMap { columns, pairings })
}

/// Pairing of target generators against the cobordism applied to source
/// generators: entry `(i, j)` evaluates the closed foam
/// `target_i . cobordism . source_j`.
pub fn pairing_matrix(
    cobordism: &Movie,
    gens_source: &[Movie],
    gens_target: &[Movie],
    bc: BaseChange,
) -> Result<Vec<Vec<BcElem>>, EvalError> {
    let zero = crate::ring::apply_to_poly(&Poly::zero(Alphabet::E), bc)?;
    let mut out = vec![vec![zero; gens_source.len()]; gens_target.len()];
    for (j, g) in gens_source.iter().enumerate() {
        let pushed = concat_movies(g, cobordism)?;
        for (i, h) in gens_target.iter().enumerate() {
            let foam = pair_closed(h, &pushed)?;
            out[i][j] = eval_closed_over(&foam, bc)?;
        }
    }
    Ok(out)
}

/// Rank of the induced map over the fraction field: the rank of its
/// pairing matrix (the form is nondegenerate on the quotient).
pub fn induced_rank(pairings: &[Vec<BcElem>]) -> Result<usize, EvalError> {
    match normalize_entries(pairings)? {
        NormMatrix::Bool(m) => Ok(f2_rank(m)),
        NormMatrix::Poly(m) => bareiss_rank(m),
    }
}

// --- the four-periodic square -------------------------------------------------

pub struct SquareReport {
    /// Tait counts of the four webs, in cyclic order I, H, =, ||.
    pub tait: [usize; 4],
    /// Gram ranks over the fraction field (the state-space ranks).
    pub space_ranks: [usize; 4],
    /// Ranks of the four differentials.
    pub map_ranks: [usize; 4],
    /// All four composites vanish.
    pub d_squared_zero: bool,
    /// rank(d_k) + rank(d_{k+1}) = rank(V_{k+1}) for all k.
    pub exact: bool,
    /// rk V0 + rk V2 = rk V1 + rk V3.
    pub rank_identity: bool,
}

/// The four cobordism movies around a square site, each from its web in
/// the cyclic order I -> H -> = -> || -> I.
pub fn square_movies(web: &Web, m_half: HalfEdge) -> Result<[Movie; 4], EvalError> {
    let [gi, gh, geq, gpar] = square_site_webs(web, m_half).map_err(|e| err(e.to_string()))?;
    // I -> H: rotate the bar through a seam vertex.
    let f_ih = Movie::from_web(gi.clone(), vec![Move::Vtx(m_half)]);
    // H -> =: unzip the fresh bar (the first of the six appended halves).
    let bar = gh.half_edge_count() - 6;
    let f_heq = Movie::from_web(gh.clone(), vec![Move::Unzip(bar)]);
    // = -> ||: a saddle between the two strands left by the unzip.
    let f_eqpar = connect_by_saddle(&geq, &gpar)?;
    // || -> I: a zip between the two strands.
    let f_pari = connect_by_zip(&gpar, &gi)?;
    Ok([f_ih, f_heq, f_eqpar, f_pari])
}

/// Find a saddle move turning `from` into a web isomorphic to `to`.
fn connect_by_saddle(from: &Web, to: &Web) -> Result<Movie, EvalError> {
    let mut candidates: Vec<Move> = Vec::new();
    let n = from.half_edge_count();
    for a in 0..n {
        for b in 0..n {
            if from.edge_of(a) != from.edge_of(b) {
                candidates.push(Move::SaddleEdges(a, b));
            }
        }
    }
    for l in 0..from.free_loops {
        candidates.push(Move::SaddleLoopSplit(l));
        for a in 0..n {
            candidates.push(Move::SaddleLoopEdge(l, a));
        }
        for l2 in 0..from.free_loops {
            if l2 != l {
                candidates.push(Move::SaddleLoops(l.min(l2), l.max(l2)));
            }
        }
    }
    for a in 0..n {
        candidates.push(Move::SaddlePinch(a));
    }
    try_connect(from, to, candidates)
}

/// Find a zip move turning `from` into a web isomorphic to `to`.
fn connect_by_zip(from: &Web, to: &Web) -> Result<Movie, EvalError> {
    let mut candidates: Vec<Move> = Vec::new();
    let n = from.half_edge_count();
    for a in 0..n {
        for b in 0..n {
            if from.edge_of(a) != from.edge_of(b) {
                candidates.push(Move::Zip(Strand::Edge(a), Strand::Edge(b)));
            }
        }
    }
    for l in 0..from.free_loops {
        for a in 0..n {
            candidates.push(Move::Zip(Strand::Loop(l), Strand::Edge(a)));
            candidates.push(Move::Zip(Strand::Edge(a), Strand::Loop(l)));
        }
        for l2 in 0..from.free_loops {
            if l2 != l {
                candidates.push(Move::Zip(Strand::Loop(l), Strand::Loop(l2)));
            }
        }
    }
    try_connect(from, to, candidates)
}

fn try_connect(from: &Web, to: &Web, candidates: Vec<Move>) -> Result<Movie, EvalError> {
    for mv in candidates {
        let movie = Movie::from_web(from.clone(), vec![mv]);
        if let Ok(result) = movie.final_web() {
            if super::compile::web_iso(&result, to).is_some() {
                return Ok(movie);
            }
        }
    }
    Err(err("no single move connects the two webs"))
}

/// Build and test the four-periodic complex at a square site.
pub fn square_complex_check(
    web: &Web,
    m_half: HalfEdge,
    bc: BaseChange,
) -> Result<SquareReport, EvalError> {
    let webs = square_site_webs(web, m_half).map_err(|e| err(e.to_string()))?;
    let movies = square_movies(web, m_half)?;
    let mut gens = Vec::new();
    for w in &webs {
        gens.push(generators(w).map_err(|e| err(e.to_string()))?);
    }
    let tait = [
        webs[0].tait_count(),
        webs[1].tait_count(),
        webs[2].tait_count(),
        webs[3].tait_count(),
    ];
    let mut space_ranks = [0usize; 4];
    for k in 0..4 {
        let gram = gram_matrix(&gens[k], bc)?;
        space_ranks[k] = gram_rank(&gram)?;
    }
    let mut map_ranks = [0usize; 4];
    let mut pairing_mats = Vec::new();
    for k in 0..4 {
        let p = pairing_matrix(&movies[k], &gens[k], &gens[(k + 1) % 4], bc)?;
        map_ranks[k] = induced_rank(&p)?;
        pairing_mats.push(p);
    }
    // d . d = 0: the double composites pair to zero against every target
    // generator, over the untouched coefficients.
    let mut d_squared_zero = true;
    for k in 0..4 {
        let kk = (k + 1) % 4;
        let kkk = (k + 2) % 4;
        for g in &gens[k] {
            let once = concat_movies(g, &movies[k])?;
            let twice = concat_movies(&once, &movies[kk])?;
            for h in &gens[kkk] {
                let foam = pair_closed(h, &twice)?;
                let v = eval_closed_over(&foam, BaseChange::Identity)?;
                if !v.is_zero() {
                    d_squared_zero = false;
                }
            }
        }
    }
    let exact = (0..4).all(|k| {
        map_ranks[k] + map_ranks[(k + 1) % 4] == space_ranks[(k + 1) % 4]
    });
    let rank_identity =
        space_ranks[0] + space_ranks[2] == space_ranks[1] + space_ranks[3];
    Ok(SquareReport { tait, space_ranks, map_ranks, d_squared_zero, exact, rank_identity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::parse::parse_poly;
    use crate::web::shapes;

    fn e(s: &str) -> Poly {
        parse_poly(s, Alphabet::E).unwrap()
    }

    #[test]
    fn bareiss_on_circle_gram() {
        let gens = generators(&Web::loops(1)).unwrap();
        let gram = gram_matrix(&gens, BaseChange::Identity).unwrap();
        assert_eq!(gram_rank(&gram).unwrap(), 3);
        // Determinant of the 3x3 sphere-pairing matrix is 1.
        if let NormMatrix::Poly(m) = normalize_entries(&gram.entries).unwrap() {
            assert_eq!(bareiss_det(m).unwrap(), e("1"));
        } else {
            panic!("expected polynomial entries");
        }
    }

    #[test]
    fn bareiss_rank_multivariate() {
        // Rank 2: third row is the sum of the first two.
        let rows = vec![
            vec![e("E1"), e("E2"), e("0")],
            vec![e("0"), e("E1"), e("1")],
            vec![e("E1"), e("E2 + E1"), e("1")],
        ];
        assert_eq!(bareiss_rank(rows).unwrap(), 2);
    }

    #[test]
    fn smith_factors() {
        let s = |t: &str| parse_poly(t, Alphabet::Single(2)).unwrap();
        let m = vec![
            vec![s("E"), s("0")],
            vec![s("0"), s("E^3")],
        ];
        let f = smith_invariant_factors(m).unwrap();
        assert_eq!(f, vec![s("E"), s("E^3")]);
        // A unit entry gives factor 1 then the complement.
        let m2 = vec![
            vec![s("1"), s("E")],
            vec![s("E"), s("0")],
        ];
        let f2 = smith_invariant_factors(m2).unwrap();
        assert_eq!(f2.len(), 2);
        assert!(f2[0].is_one());
        assert_eq!(f2[1], s("E^2"));
    }

    #[test]
    fn dot_endomorphism_of_the_circle() {
        let w = Web::loops(1);
        let gens = generators(&w).unwrap();
        let dot = Movie::from_web(w.clone(), vec![Move::Dot(Strand::Loop(0))]);
        let map = induced_map(&dot, &gens, &gens, BaseChange::Identity).unwrap();
        // cup_i -> cup_{i+1} for i < 2; cup_2 -> E1 cup_2 + E2 cup_1 + E3 cup_0.
        let frac = |s: &str| Frac { num: e(s), den: e("1") };
        assert_eq!(map.columns[0], vec![frac("0"), frac("1"), frac("0")]);
        assert_eq!(map.columns[1], vec![frac("0"), frac("0"), frac("1")]);
        assert_eq!(map.columns[2], vec![frac("E3"), frac("E2"), frac("E1")]);
    }

    #[test]
    fn identity_movie_induces_identity() {
        let w = Web::loops(1);
        let gens = generators(&w).unwrap();
        let id = Movie::from_web(w.clone(), vec![]);
        let map = induced_map(&id, &gens, &gens, BaseChange::K).unwrap();
        for (j, col) in map.columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                assert_eq!(v.is_zero(), i != j, "entry {} {}", i, j);
                if i == j {
                    assert!(v.is_polynomial());
                    assert!(v.num.is_one());
                }
            }
        }
    }

    #[test]
    fn square_complex_on_theta() {
        let th = shapes::theta();
        let report =
            square_complex_check(&th, 0, BaseChange::PsiLambdaLoc(false, false, true)).unwrap();
        assert!(report.d_squared_zero);
        assert!(report.exact, "{:?} {:?}", report.space_ranks, report.map_ranks);
        assert!(report.rank_identity);
        assert_eq!(report.space_ranks[0], report.tait[0]);
        assert_eq!(report.space_ranks, [6, 0, 3, 9]);
    }
}
