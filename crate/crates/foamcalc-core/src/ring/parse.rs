//! Parser for the canonical text forms produced by the `Display` impls.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! sum    := prod ('+' prod)*
//! prod   := atom (('*')? atom)*
//! atom   := var ('^' int)? | '(' sum ')' ('^' int)? | uint
//! var    := X1..X3 | Y1..Y3 | E1..E3 | E | q | D
//! ```
//!
//! Integer coefficients reduce mod 2 except in `q`-polynomials, where they
//! stay integral.

use super::laurent::LaurentInt;
use super::loc::{LocElem, PAIRS};
use super::poly::{Alphabet, Poly};
use super::rd::RDElem;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Int(i64),
    Plus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            'X' | 'Y' | 'E' | 'q' | 'D' => {
                let mut name = c.to_string();
                if (c == 'X' || c == 'Y' || c == 'E')
                    && i + 1 < chars.len()
                    && ('1'..='3').contains(&chars[i + 1])
                {
                    name.push(chars[i + 1]);
                    i += 1;
                }
                out.push(Tok::Var(name));
                i += 1;
            }
            '-' | '0'..='9' => {
                let neg = c == '-';
                let mut j = if neg { i + 1 } else { i };
                let mut v: i64 = 0;
                let start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    v = v * 10 + (chars[j] as i64 - '0' as i64);
                    j += 1;
                }
                if j == start {
                    return Err(format!("dangling `-` at {}", i));
                }
                out.push(Tok::Int(if neg { -v } else { v }));
                i = j;
            }
            _ => return Err(format!("unexpected character `{}`", c)),
        }
    }
    Ok(out)
}

/// Generic exponent-map term representation: variable name -> exponent.
type Term = std::collections::BTreeMap<String, i64>;

/// Expanded integer combination of terms.
type Expanded = std::collections::BTreeMap<Term, i64>;

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_sum(&mut self) -> Result<Expanded, String> {
        let mut acc = self.parse_prod()?;
        while self.peek() == Some(&Tok::Plus) {
            self.next();
            let rhs = self.parse_prod()?;
            acc = add_exp(&acc, &rhs);
        }
        Ok(acc)
    }

    fn parse_prod(&mut self) -> Result<Expanded, String> {
        let mut acc = self.parse_atom()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    let rhs = self.parse_atom()?;
                    acc = mul_exp(&acc, &rhs);
                }
                Some(Tok::Var(_)) | Some(Tok::LParen) => {
                    let rhs = self.parse_atom()?;
                    acc = mul_exp(&acc, &rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_atom(&mut self) -> Result<Expanded, String> {
        let base = match self.next() {
            Some(Tok::Var(v)) => {
                let mut t = Term::new();
                t.insert(v, 1);
                single(t, 1)
            }
            Some(Tok::Int(v)) => single(Term::new(), v),
            Some(Tok::LParen) => {
                let inner = self.parse_sum()?;
                match self.next() {
                    Some(Tok::RParen) => inner,
                    other => return Err(format!("expected `)`, got {:?}", other)),
                }
            }
            other => return Err(format!("expected atom, got {:?}", other)),
        };
        if self.peek() == Some(&Tok::Caret) {
            self.next();
            match self.next() {
                Some(Tok::Int(e)) => pow_exp(&base, e),
                other => Err(format!("expected integer exponent, got {:?}", other)),
            }
        } else {
            Ok(base)
        }
    }
}

fn single(t: Term, c: i64) -> Expanded {
    let mut m = Expanded::new();
    if c != 0 {
        m.insert(t, c);
    }
    m
}

fn add_exp(a: &Expanded, b: &Expanded) -> Expanded {
    let mut out = a.clone();
    for (t, c) in b {
        let e = out.entry(t.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            out.remove(t);
        }
    }
    out
}

fn mul_exp(a: &Expanded, b: &Expanded) -> Expanded {
    let mut out = Expanded::new();
    for (t1, c1) in a {
        for (t2, c2) in b {
            let mut t = t1.clone();
            for (v, e) in t2 {
                let entry = t.entry(v.clone()).or_insert(0);
                *entry += e;
                if *entry == 0 {
                    t.remove(v);
                }
            }
            let entry = out.entry(t).or_insert(0);
            *entry += c1 * c2;
            if *entry == 0 {
                out.remove(t1);
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn pow_exp(a: &Expanded, e: i64) -> Result<Expanded, String> {
    if e < 0 {
        // Negative powers only make sense for single monomials (q^-2, D^-1).
        if a.len() != 1 {
            return Err("negative power of a sum".into());
        }
        let (t, c) = a.iter().next().unwrap();
        if *c != 1 {
            return Err("negative power of a non-monic term".into());
        }
        let mut t2 = Term::new();
        for (v, exp) in t {
            t2.insert(v.clone(), exp * e);
        }
        return Ok(single(t2, 1));
    }
    let mut out = single(Term::new(), 1);
    for _ in 0..e {
        out = mul_exp(&out, a);
    }
    Ok(out)
}

fn expand(s: &str) -> Result<Expanded, String> {
    let toks = lex(s)?;
    let mut p = Parser { toks, pos: 0 };
    let out = p.parse_sum()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing tokens at {}", p.pos));
    }
    Ok(out)
}

fn var_index(name: &str) -> Result<(char, usize), String> {
    let mut it = name.chars();
    let head = it.next().unwrap();
    let idx = match it.next() {
        Some(d) => d as usize - '1' as usize,
        None => 0,
    };
    Ok((head, idx))
}

/// Parse a plain polynomial in the given alphabet (coefficients mod 2).
pub fn parse_poly(s: &str, alphabet: Alphabet) -> Result<Poly, String> {
    let exp = expand(s)?;
    let mut out = Poly::zero(alphabet);
    for (term, coeff) in exp {
        if coeff.rem_euclid(2) == 0 {
            continue;
        }
        let mut m = [0u16; 3];
        for (v, e) in &term {
            let (head, idx) = var_index(v)?;
            let ok = match alphabet {
                Alphabet::X => head == 'X',
                Alphabet::Y => head == 'Y',
                Alphabet::E => head == 'E' && v.len() == 2,
                Alphabet::Single(_) => head == 'E' && v.len() == 1,
            };
            if !ok {
                return Err(format!("variable `{}` not in alphabet {:?}", v, alphabet));
            }
            if *e < 0 {
                return Err(format!("negative exponent on `{}` in a polynomial", v));
            }
            m[idx] += *e as u16;
        }
        out.toggle(m);
    }
    Ok(out)
}

/// Parse `num/(den)` over the square-root alphabet; the denominator must be
/// a product of powers of the three linear forms.
pub fn parse_loc(s: &str) -> Result<LocElem, String> {
    let (num_s, den_s) = match split_top_level_slash(s) {
        Some((a, b)) => (a, b),
        None => return Ok(LocElem::from_poly(parse_poly(s, Alphabet::Y)?)),
    };
    let num = parse_poly(&num_s, Alphabet::Y)?;
    // Recognize the denominator by dividing out linear forms.
    let mut den_poly = parse_poly(&den_s, Alphabet::Y)?;
    let mut den = [0u16; 3];
    for k in 0..3 {
        let form = super::loc::linear_form(k);
        while let Ok(q) = den_poly.exact_div(&form) {
            den[k] += 1;
            den_poly = q;
        }
    }
    if !den_poly.is_one() {
        return Err(format!(
            "denominator is not a product of (Yi+Yj) factors; residue {}",
            den_poly
        ));
    }
    let _ = PAIRS;
    Ok(LocElem::new(num, den))
}

/// Parse `num`, `num/D`, or `num/D^k` over the elementary alphabet.
pub fn parse_rd(s: &str) -> Result<RDElem, String> {
    let (num_s, den_s) = match split_top_level_slash(s) {
        Some((a, b)) => (a, b),
        None => return Ok(RDElem::from_poly(parse_poly(s, Alphabet::E)?)),
    };
    let num = parse_poly(&num_s, Alphabet::E)?;
    let exp = expand(&den_s)?;
    if exp.len() != 1 {
        return Err("denominator must be a power of D".into());
    }
    let (term, coeff) = exp.iter().next().unwrap();
    if *coeff != 1 || term.len() != 1 || !term.contains_key("D") {
        return Err("denominator must be a power of D".into());
    }
    let dpow = term["D"];
    if dpow < 0 {
        return Err("denominator power must be positive".into());
    }
    Ok(RDElem::new(num, dpow as u32))
}

/// Parse an integer Laurent polynomial in `q`.
pub fn parse_laurent(s: &str) -> Result<LaurentInt, String> {
    let exp = expand(s)?;
    let mut out = LaurentInt::zero();
    for (term, coeff) in exp {
        let mut e = 0i64;
        for (v, p) in &term {
            if v != "q" {
                return Err(format!("variable `{}` in a q-polynomial", v));
            }
            e += p;
        }
        out.insert(e, coeff);
    }
    Ok(out)
}

fn split_top_level_slash(s: &str) -> Option<(String, String)> {
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => {
                return Some((s[..i].to_string(), s[i + 1..].to_string()));
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::poly::discriminant_e;

    #[test]
    fn poly_round_trip() {
        let samples = [
            Poly::monomial(Alphabet::E, [2, 0, 0]).add(&Poly::var(Alphabet::E, 1)),
            discriminant_e(),
            Poly::zero(Alphabet::E),
            Poly::one(Alphabet::E),
        ];
        for p in samples {
            assert_eq!(parse_poly(&p.to_string(), Alphabet::E).unwrap(), p);
        }
        let single = Poly::monomial(Alphabet::Single(2), [3, 0, 0]);
        assert_eq!(parse_poly("E^3", Alphabet::Single(2)).unwrap(), single);
    }

    #[test]
    fn loc_round_trip() {
        let e = LocElem::new(
            Poly::monomial(Alphabet::Y, [2, 0, 0]),
            [1, 1, 0],
        );
        let s = e.to_string();
        assert_eq!(s, "Y1^2/((Y1+Y2)(Y1+Y3))");
        assert_eq!(parse_loc(&s).unwrap(), e);
    }

    #[test]
    fn rd_round_trip() {
        let inv = RDElem::d_inverse();
        assert_eq!(parse_rd(&inv.to_string()).unwrap(), inv);
        let e = RDElem::new(Poly::var(Alphabet::E, 0).add(&Poly::one(Alphabet::E)), 2);
        assert_eq!(parse_rd(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn laurent_round_trip() {
        let p = LaurentInt::quantum_int(2).mul(&LaurentInt::quantum_int(3));
        assert_eq!(parse_laurent(&p.to_string()).unwrap(), p);
        assert_eq!(parse_laurent("q^2 + 1 + q^-2").unwrap(), LaurentInt::quantum_int(3));
    }

    #[test]
    fn implicit_star() {
        assert_eq!(
            parse_poly("E1E2 + E3", Alphabet::E).unwrap(),
            discriminant_e()
        );
    }
}
