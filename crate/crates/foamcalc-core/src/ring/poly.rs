//! Sparse polynomials over the two-element field.
//!
//! A polynomial is a set of monomials: addition is symmetric difference,
//! so every coefficient is 0 or 1 and cancellation is exact. Four alphabets
//! are used throughout the crate:
//!
//! * `X` — the variables `X1, X2, X3`, each of degree 2;
//! * `Y` — square roots `Y1, Y2, Y3` with `Yi^2 = Xi`, each of degree 1;
//! * `E` — elementary symmetric generators `E1, E2, E3` of degrees 2, 4, 6;
//! * `Single(w)` — a one-variable ring `F2[E]` with `deg E = w`.

use std::collections::BTreeSet;
use std::fmt;

/// Exponent vector. One-variable alphabets use index 0 only.
pub type Mono = [u16; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Alphabet {
    X,
    Y,
    E,
    /// `F2[E]` with the given grading weight for `E` (2 for the psi
    /// base changes, 6 for phi).
    Single(u16),
}

impl Alphabet {
    pub fn var_count(&self) -> usize {
        match self {
            Alphabet::Single(_) => 1,
            _ => 3,
        }
    }

    pub fn weight(&self, var: usize) -> i64 {
        match self {
            Alphabet::X => 2,
            Alphabet::Y => 1,
            Alphabet::E => 2 * (var as i64 + 1),
            Alphabet::Single(w) => *w as i64,
        }
    }

    pub fn var_name(&self, var: usize) -> String {
        match self {
            Alphabet::X => format!("X{}", var + 1),
            Alphabet::Y => format!("Y{}", var + 1),
            Alphabet::E => format!("E{}", var + 1),
            Alphabet::Single(_) => "E".to_string(),
        }
    }
}

fn mono_total(m: &Mono) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

/// Degree-lexicographic order with `X1 > X2 > X3`: higher total degree
/// first, ties broken by the exponent of the earlier variable.
pub fn deglex(a: &Mono, b: &Mono) -> std::cmp::Ordering {
    mono_total(a).cmp(&mono_total(b)).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    pub alphabet: Alphabet,
    pub terms: BTreeSet<Mono>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingError {
    /// Division left the given remainder.
    NotDivisible(Poly),
    /// The polynomial is not invariant under variable permutations.
    NotSymmetric,
    /// Two distinct term degrees in a would-be homogeneous element.
    Inhomogeneous(i64, i64),
    /// A base change was applied to an element outside its domain.
    NotDefined(String),
    MixedAlphabets,
    DivisionByZero,
}

impl fmt::Display for RingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingError::NotDivisible(r) => write!(f, "not divisible, remainder {}", r),
            RingError::NotSymmetric => write!(f, "not symmetric"),
            RingError::Inhomogeneous(a, b) => write!(f, "inhomogeneous: degrees {} and {}", a, b),
            RingError::NotDefined(s) => write!(f, "not defined: {}", s),
            RingError::MixedAlphabets => write!(f, "mixed alphabets"),
            RingError::DivisionByZero => write!(f, "division by zero"),
        }
    }
}

impl std::error::Error for RingError {}

impl Poly {
    pub fn zero(alphabet: Alphabet) -> Self {
        Poly { alphabet, terms: BTreeSet::new() }
    }

    pub fn one(alphabet: Alphabet) -> Self {
        Poly::monomial(alphabet, [0, 0, 0])
    }

    pub fn monomial(alphabet: Alphabet, m: Mono) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(m);
        Poly { alphabet, terms }
    }

    /// The variable `Xi`/`Yi`/`Ei` (0-based index).
    pub fn var(alphabet: Alphabet, i: usize) -> Self {
        assert!(i < alphabet.var_count());
        let mut m = [0u16; 3];
        m[i] = 1;
        Poly::monomial(alphabet, m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.contains(&[0, 0, 0])
    }

    /// Toggle a monomial (coefficient arithmetic in characteristic two).
    pub fn toggle(&mut self, m: Mono) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch in add");
        let mut out = self.clone();
        for m in &other.terms {
            out.toggle(*m);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch in mul");
        let mut out = Poly::zero(self.alphabet);
        for a in &self.terms {
            for b in &other.terms {
                out.toggle([a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
            }
        }
        out
    }

    pub fn mul_mono(&self, m: &Mono) -> Poly {
        let mut out = Poly::zero(self.alphabet);
        for a in &self.terms {
            out.terms.insert([a[0] + m[0], a[1] + m[1], a[2] + m[2]]);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one(self.alphabet);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Leading monomial in deglex order.
    pub fn lead(&self) -> Option<Mono> {
        self.terms.iter().max_by(|a, b| deglex(a, b)).copied()
    }

    /// Exact division: returns `r` with `r * q == self`.
    ///
    /// A single divisor is a Groebner basis of the ideal it generates, so
    /// the ordinary division algorithm leaves remainder zero exactly when
    /// the quotient exists.
    pub fn exact_div(&self, q: &Poly) -> Result<Poly, RingError> {
        if self.alphabet != q.alphabet {
            return Err(RingError::MixedAlphabets);
        }
        if q.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let lq = q.lead().unwrap();
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.alphabet);
        let mut stuck = Poly::zero(self.alphabet);
        while let Some(lp) = rem.lead() {
            if lp[0] >= lq[0] && lp[1] >= lq[1] && lp[2] >= lq[2] {
                let t = [lp[0] - lq[0], lp[1] - lq[1], lp[2] - lq[2]];
                quot.toggle(t);
                rem = rem.add(&q.mul_mono(&t));
            } else {
                // Move the irreducible lead term aside and keep going.
                rem.terms.remove(&lp);
                stuck.toggle(lp);
            }
        }
        if stuck.is_zero() {
            Ok(quot)
        } else {
            Err(RingError::NotDivisible(stuck))
        }
    }

    pub fn divides(&self, p: &Poly) -> bool {
        p.exact_div(self).is_ok()
    }

    /// Substitute each variable by the given polynomial (all in the target
    /// alphabet). Used for base changes and symmetry checks.
    pub fn substitute(&self, images: &[Poly], target: Alphabet) -> Poly {
        let mut out = Poly::zero(target);
        for m in &self.terms {
            let mut t = Poly::one(target);
            for (i, &e) in m.iter().enumerate().take(self.alphabet.var_count()) {
                if e > 0 {
                    t = t.mul(&images[i].pow(e as u32));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Apply a permutation of the three variables.
    pub fn permute_vars(&self, perm: &[usize; 3]) -> Poly {
        assert_eq!(self.alphabet.var_count(), 3);
        let mut out = Poly::zero(self.alphabet);
        for m in &self.terms {
            let mut t = [0u16; 3];
            for i in 0..3 {
                t[perm[i]] = m[i];
            }
            out.toggle(t);
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        if self.alphabet.var_count() != 3 {
            return true;
        }
        for perm in [[1, 0, 2], [0, 2, 1]] {
            if self.permute_vars(&perm) != *self {
                return false;
            }
        }
        true
    }

    /// Degree of a homogeneous element; `None` for the zero polynomial
    /// (homogeneous of every degree).
    pub fn graded_degree(&self) -> Result<Option<i64>, RingError> {
        let mut deg: Option<i64> = None;
        for m in &self.terms {
            let d: i64 = (0..self.alphabet.var_count())
                .map(|i| self.alphabet.weight(i) * m[i] as i64)
                .sum();
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => {
                    return Err(RingError::Inhomogeneous(d0.min(d), d0.max(d)))
                }
                _ => {}
            }
        }
        Ok(deg)
    }

    /// Rewrite a symmetric polynomial in `X1,X2,X3` in terms of the
    /// elementary symmetric polynomials.
    pub fn to_elementary_basis(&self) -> Result<Poly, RingError> {
        assert_eq!(self.alphabet, Alphabet::X);
        if !self.is_symmetric() {
            return Err(RingError::NotSymmetric);
        }
        let e1 = elementary(1);
        let e2 = elementary(2);
        let e3 = elementary(3);
        let mut rem = self.clone();
        let mut out = Poly::zero(Alphabet::E);
        while !rem.is_zero() {
            // The lex-leading exponent of a symmetric polynomial is weakly
            // decreasing, so the descent below terminates.
            let lead = *rem.terms.iter().max().unwrap();
            let (a, b, c) = (lead[0], lead[1], lead[2]);
            debug_assert!(a >= b && b >= c, "lex lead of a symmetric poly");
            let emono = [a - b, b - c, c];
            out.toggle(emono);
            let expanded = e1.pow((a - b) as u32).mul(&e2.pow((b - c) as u32)).mul(&e3.pow(c as u32));
            rem = rem.add(&expanded);
        }
        Ok(out)
    }

    /// Expand an `E`-polynomial back into `X1,X2,X3`.
    pub fn elementary_to_x(&self) -> Poly {
        assert_eq!(self.alphabet, Alphabet::E);
        self.substitute(&[elementary(1), elementary(2), elementary(3)], Alphabet::X)
    }

    /// Map `Xi` to `Yi^2`.
    pub fn x_to_y(&self) -> Poly {
        assert_eq!(self.alphabet, Alphabet::X);
        let mut out = Poly::zero(Alphabet::Y);
        for m in &self.terms {
            out.terms.insert([m[0] * 2, m[1] * 2, m[2] * 2]);
        }
        out
    }

    /// Inverse of [`Poly::x_to_y`]; fails when an odd exponent is present.
    pub fn y_to_x(&self) -> Result<Poly, RingError> {
        assert_eq!(self.alphabet, Alphabet::Y);
        let mut out = Poly::zero(Alphabet::X);
        for m in &self.terms {
            if m.iter().any(|&e| e % 2 != 0) {
                return Err(RingError::NotDefined(format!(
                    "odd square-root exponent in {}",
                    self
                )));
            }
            out.terms.insert([m[0] / 2, m[1] / 2, m[2] / 2]);
        }
        Ok(out)
    }
}

/// The elementary symmetric polynomial `e_k(X1,X2,X3)`, `k` in `1..=3`.
pub fn elementary(k: usize) -> Poly {
    let mut p = Poly::zero(Alphabet::X);
    match k {
        1 => {
            for i in 0..3 {
                p.toggle(Poly::var(Alphabet::X, i).lead().unwrap());
            }
        }
        2 => {
            p.toggle([1, 1, 0]);
            p.toggle([1, 0, 1]);
            p.toggle([0, 1, 1]);
        }
        3 => p.toggle([1, 1, 1]),
        _ => panic!("elementary index out of range"),
    }
    p
}

/// The discriminant `D = E1 E2 + E3` as an `E`-polynomial.
pub fn discriminant_e() -> Poly {
    let mut p = Poly::zero(Alphabet::E);
    p.toggle([1, 1, 0]);
    p.toggle([0, 0, 1]);
    p
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut monos: Vec<&Mono> = self.terms.iter().collect();
        monos.sort_by(|a, b| deglex(b, a));
        let rendered: Vec<String> = monos
            .into_iter()
            .map(|m| {
                let mut factors = Vec::new();
                for i in 0..self.alphabet.var_count() {
                    match m[i] {
                        0 => {}
                        1 => factors.push(self.alphabet.var_name(i)),
                        e => factors.push(format!("{}^{}", self.alphabet.var_name(i), e)),
                    }
                }
                if factors.is_empty() {
                    "1".to_string()
                } else {
                    factors.join("*")
                }
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xp(terms: &[Mono]) -> Poly {
        let mut p = Poly::zero(Alphabet::X);
        for t in terms {
            p.toggle(*t);
        }
        p
    }

    #[test]
    fn char_two_addition_cancels() {
        let p = xp(&[[1, 0, 0], [0, 1, 0]]);
        assert!(p.add(&p).is_zero());
    }

    #[test]
    fn exact_div_square_identity() {
        // (X1+X2)^2 = X1^2 + X2^2 in characteristic two.
        let s = xp(&[[1, 0, 0], [0, 1, 0]]);
        let sq = xp(&[[2, 0, 0], [0, 2, 0]]);
        assert_eq!(sq.exact_div(&s).unwrap(), s);
        assert_eq!(s.mul(&s), sq);
    }

    #[test]
    fn exact_div_rejects_e2_by_linear() {
        // e2 = X1X2+X1X3+X2X3 is not divisible by X1+X2: substituting
        // X2 := X1 leaves the residue X1^2.
        let e2 = elementary(2);
        let s = xp(&[[1, 0, 0], [0, 1, 0]]);
        match e2.exact_div(&s) {
            Err(RingError::NotDivisible(_)) => {}
            other => panic!("expected NotDivisible, got {:?}", other),
        }
    }

    #[test]
    fn exact_div_y_alphabet() {
        let s = Poly::var(Alphabet::Y, 0).add(&Poly::var(Alphabet::Y, 1));
        let sq = s.mul(&s);
        assert_eq!(sq.exact_div(&s).unwrap(), s);
    }

    #[test]
    fn elementary_basis_of_power_sums() {
        // X1+X2+X3 -> E1.
        let p1 = elementary(1);
        assert_eq!(p1.to_elementary_basis().unwrap(), Poly::var(Alphabet::E, 0));
        // X1^2+X2^2+X3^2 = E1^2 in characteristic two.
        let p2 = xp(&[[2, 0, 0], [0, 2, 0], [0, 0, 2]]);
        assert_eq!(p2.to_elementary_basis().unwrap(), Poly::monomial(Alphabet::E, [2, 0, 0]));
    }

    #[test]
    fn elementary_basis_of_mixed_power_sum() {
        // sum over i != j of Xi^2 Xj equals E1 E2 + E3 mod 2: over the
        // integers E1 E2 = sum Xi^2 Xj + 3 E3, verified here by expansion.
        let mut p = Poly::zero(Alphabet::X);
        for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
            let mut m = [0u16; 3];
            m[i] = 2;
            m[j] = 1;
            p.toggle(m);
        }
        assert_eq!(p.to_elementary_basis().unwrap(), discriminant_e());
        // Independent route: expand E1*E2 + E3 into X and compare.
        assert_eq!(discriminant_e().elementary_to_x(), p);
    }

    #[test]
    fn elementary_basis_rejects_nonsymmetric() {
        let p = Poly::var(Alphabet::X, 0);
        assert_eq!(p.to_elementary_basis(), Err(RingError::NotSymmetric));
    }

    #[test]
    fn elementary_basis_is_ring_map() {
        // Randomized: basis(p*q) = basis(p)*basis(q), basis(p+q) = +.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..40 {
            let mut p = Poly::one(Alphabet::X);
            let mut q = Poly::one(Alphabet::X);
            for _ in 0..3 {
                let r = next();
                let sym = match r % 3 {
                    0 => elementary(1),
                    1 => elementary(2),
                    _ => elementary(3),
                };
                if r % 2 == 0 {
                    p = p.mul(&sym);
                    q = q.add(&sym);
                } else {
                    p = p.add(&sym);
                    q = q.mul(&sym);
                }
            }
            let bp = p.to_elementary_basis().unwrap();
            let bq = q.to_elementary_basis().unwrap();
            assert_eq!(p.mul(&q).to_elementary_basis().unwrap(), bp.mul(&bq));
            assert_eq!(p.add(&q).to_elementary_basis().unwrap(), bp.add(&bq));
        }
    }

    #[test]
    fn graded_degree_values() {
        let e1e2 = Poly::monomial(Alphabet::E, [1, 1, 0]);
        assert_eq!(e1e2.graded_degree().unwrap(), Some(6));
        let x123 = Poly::monomial(Alphabet::X, [1, 1, 1]);
        assert_eq!(x123.graded_degree().unwrap(), Some(6));
        let bad = Poly::var(Alphabet::E, 0).add(&Poly::var(Alphabet::E, 1));
        assert_eq!(bad.graded_degree(), Err(RingError::Inhomogeneous(2, 4)));
        assert_eq!(Poly::zero(Alphabet::E).graded_degree().unwrap(), None);
    }

    #[test]
    fn random_exact_div_round_trip() {
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for _ in 0..60 {
            let mut p = Poly::zero(Alphabet::X);
            let mut q = Poly::zero(Alphabet::X);
            for _ in 0..4 {
                p.toggle([(next() % 4) as u16, (next() % 4) as u16, (next() % 4) as u16]);
                q.toggle([(next() % 3) as u16, (next() % 3) as u16, (next() % 3) as u16]);
            }
            if q.is_zero() {
                continue;
            }
            let prod = p.mul(&q);
            assert_eq!(prod.exact_div(&q).unwrap(), p);
        }
    }

    #[test]
    fn display_deglex() {
        let p = Poly::monomial(Alphabet::E, [2, 0, 0]).add(&Poly::var(Alphabet::E, 1));
        assert_eq!(p.to_string(), "E1^2 + E2");
    }
}
