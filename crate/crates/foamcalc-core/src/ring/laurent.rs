//! Integer Laurent polynomials in `q` (quantum dimensions, Kuperberg
//! bracket) and the Laurent ring `F2[E, E^-1]` used by the localized
//! one-variable base changes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// `Z[q, q^-1]`, no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentInt {
    pub coeffs: BTreeMap<i64, i64>,
}

impl LaurentInt {
    pub fn zero() -> Self {
        LaurentInt::default()
    }

    pub fn one() -> Self {
        LaurentInt::monomial(0, 1)
    }

    pub fn monomial(exp: i64, coeff: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if coeff != 0 {
            coeffs.insert(exp, coeff);
        }
        LaurentInt { coeffs }
    }

    /// The quantum integer `[n] = (q^n - q^-n)/(q - q^-1)`.
    pub fn quantum_int(n: u32) -> Self {
        let mut out = LaurentInt::zero();
        let n = n as i64;
        let mut e = -(n - 1);
        while e <= n - 1 {
            out.insert(e, 1);
            e += 2;
        }
        out
    }

    pub fn insert(&mut self, exp: i64, coeff: i64) {
        let entry = self.coeffs.entry(exp).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &LaurentInt) -> LaurentInt {
        let mut out = self.clone();
        for (&e, &c) in &other.coeffs {
            out.insert(e, c);
        }
        out
    }

    pub fn mul(&self, other: &LaurentInt) -> LaurentInt {
        let mut out = LaurentInt::zero();
        for (&e1, &c1) in &self.coeffs {
            for (&e2, &c2) in &other.coeffs {
                out.insert(e1 + e2, c1 * c2);
            }
        }
        out
    }

    pub fn eval_at_one(&self) -> i64 {
        self.coeffs.values().sum()
    }

    /// Invariant under `q -> q^-1`.
    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().all(|(&e, &c)| self.coeffs.get(&-e) == Some(&c))
    }
}

impl fmt::Display for LaurentInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (&e, &c) in self.coeffs.iter().rev() {
            let q = match e {
                0 => String::new(),
                1 => "q".to_string(),
                e => format!("q^{}", e),
            };
            let part = match (c, q.is_empty()) {
                (1, false) => q,
                (c, false) => format!("{}{}", c, q),
                (c, true) => format!("{}", c),
            };
            parts.push(part);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// `F2[E, E^-1]`: a set of exponents of `E`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ELaurent {
    pub exps: BTreeSet<i64>,
}

impl ELaurent {
    pub fn zero() -> Self {
        ELaurent::default()
    }

    pub fn one() -> Self {
        ELaurent::monomial(0)
    }

    pub fn monomial(e: i64) -> Self {
        let mut exps = BTreeSet::new();
        exps.insert(e);
        ELaurent { exps }
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn toggle(&mut self, e: i64) {
        if !self.exps.remove(&e) {
            self.exps.insert(e);
        }
    }

    pub fn add(&self, other: &ELaurent) -> ELaurent {
        let mut out = self.clone();
        for &e in &other.exps {
            out.toggle(e);
        }
        out
    }

    pub fn mul(&self, other: &ELaurent) -> ELaurent {
        let mut out = ELaurent::zero();
        for &a in &self.exps {
            for &b in &other.exps {
                out.toggle(a + b);
            }
        }
        out
    }

    /// Degree of a homogeneous element with `deg E` the given weight.
    pub fn graded_degree(&self, weight: i64) -> Result<Option<i64>, super::poly::RingError> {
        let mut deg = None;
        for &e in &self.exps {
            let d = e * weight;
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => {
                    return Err(super::poly::RingError::Inhomogeneous(d0, d))
                }
                _ => {}
            }
        }
        Ok(deg)
    }
}

impl fmt::Display for ELaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .rev()
            .map(|&e| match e {
                0 => "1".to_string(),
                1 => "E".to_string(),
                e => format!("E^{}", e),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_integers() {
        assert_eq!(LaurentInt::quantum_int(1), LaurentInt::one());
        let three = LaurentInt::quantum_int(3);
        assert_eq!(three.to_string(), "q^2 + 1 + q^-2");
        assert_eq!(three.eval_at_one(), 3);
        assert!(three.is_palindromic());
    }

    #[test]
    fn product_of_quantum_ints() {
        let p = LaurentInt::quantum_int(2).mul(&LaurentInt::quantum_int(3));
        // (q+q^-1)(q^2+1+q^-2) = q^3 + 2q + 2q^-1 + q^-3.
        assert_eq!(p.to_string(), "q^3 + 2q + 2q^-1 + q^-3");
        assert!(p.is_palindromic());
    }

    #[test]
    fn elaurent_char_two() {
        let e = ELaurent::monomial(3);
        assert!(e.add(&e).is_zero());
        assert_eq!(ELaurent::monomial(-3).mul(&e), ELaurent::one());
    }
}
