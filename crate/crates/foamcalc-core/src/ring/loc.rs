//! Elements of `F2[Y1,Y2,Y3][(Y1+Y2)^-1,(Y1+Y3)^-1,(Y2+Y3)^-1]`.
//!
//! Evaluation of colored pre-foams never needs a general fraction field:
//! denominators are products of the three linear forms `Yi + Yj`
//! (equivalently, of `Xi + Xj = (Yi + Yj)^2`). An element is kept in the
//! canonical form where the numerator is divisible by none of the linear
//! forms that appear in the denominator.

use super::poly::{Alphabet, Poly, RingError};
use std::fmt;

/// Index pairs for the three linear forms, in the fixed order
/// `(Y1+Y2), (Y1+Y3), (Y2+Y3)`.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// The linear form `Yi + Yj` for pair index `k`.
pub fn linear_form(k: usize) -> Poly {
    let (i, j) = PAIRS[k];
    Poly::var(Alphabet::Y, i).add(&Poly::var(Alphabet::Y, j))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocElem {
    pub num: Poly,
    /// Exponents of `(Y1+Y2), (Y1+Y3), (Y2+Y3)` in the denominator.
    pub den: [u16; 3],
}

impl LocElem {
    pub fn zero() -> Self {
        LocElem { num: Poly::zero(Alphabet::Y), den: [0, 0, 0] }
    }

    pub fn one() -> Self {
        LocElem { num: Poly::one(Alphabet::Y), den: [0, 0, 0] }
    }

    pub fn from_poly(num: Poly) -> Self {
        assert_eq!(num.alphabet, Alphabet::Y);
        LocElem { num, den: [0, 0, 0] }.canonical()
    }

    pub fn from_x_poly(p: &Poly) -> Self {
        LocElem::from_poly(p.x_to_y())
    }

    /// `num / prod (Yi+Yj)^den`, reduced.
    pub fn new(num: Poly, den: [u16; 3]) -> Self {
        LocElem { num, den }.canonical()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn canonical(mut self) -> Self {
        if self.num.is_zero() {
            self.den = [0, 0, 0];
            return self;
        }
        for k in 0..3 {
            let form = linear_form(k);
            while self.den[k] > 0 {
                match self.num.exact_div(&form) {
                    Ok(q) => {
                        self.num = q;
                        self.den[k] -= 1;
                    }
                    Err(_) => break,
                }
            }
        }
        self
    }

    pub fn add(&self, other: &LocElem) -> LocElem {
        let mut den = [0u16; 3];
        let mut a = self.num.clone();
        let mut b = other.num.clone();
        for k in 0..3 {
            den[k] = self.den[k].max(other.den[k]);
            let form = linear_form(k);
            a = a.mul(&form.pow((den[k] - self.den[k]) as u32));
            b = b.mul(&form.pow((den[k] - other.den[k]) as u32));
        }
        LocElem { num: a.add(&b), den }.canonical()
    }

    pub fn mul(&self, other: &LocElem) -> LocElem {
        LocElem {
            num: self.num.mul(&other.num),
            den: [
                self.den[0] + other.den[0],
                self.den[1] + other.den[1],
                self.den[2] + other.den[2],
            ],
        }
        .canonical()
    }

    /// Multiply by `(Yi+Yj)^e` for pair `k`, where `e` may be negative.
    pub fn mul_form_pow(&self, k: usize, e: i32) -> LocElem {
        if e >= 0 {
            LocElem {
                num: self.num.mul(&linear_form(k).pow(e as u32)),
                den: self.den,
            }
            .canonical()
        } else {
            let mut den = self.den;
            den[k] += (-e) as u16;
            LocElem { num: self.num.clone(), den }.canonical()
        }
    }

    /// Permute the underlying `Y` variables; the denominator pairs permute
    /// accordingly.
    pub fn permute_vars(&self, perm: &[usize; 3]) -> LocElem {
        let num = self.num.permute_vars(perm);
        let mut den = [0u16; 3];
        for k in 0..3 {
            let (i, j) = PAIRS[k];
            let (pi, pj) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
            let target = PAIRS.iter().position(|&p| p == (pi, pj)).unwrap();
            den[target] = self.den[k];
        }
        LocElem { num, den }
    }

    /// Total degree with `deg Yi = 1`, so `deg Xi = 2`; homogeneous check.
    pub fn graded_degree(&self) -> Result<Option<i64>, RingError> {
        match self.num.graded_degree()? {
            None => Ok(None),
            Some(d) => Ok(Some(d - self.den.iter().map(|&e| e as i64).sum::<i64>())),
        }
    }

    /// Interpret as a polynomial in `X1,X2,X3` if the denominator is
    /// trivial and all square roots cancelled.
    pub fn try_to_x_poly(&self) -> Result<Poly, RingError> {
        if self.den != [0, 0, 0] {
            return Err(RingError::NotDefined(format!(
                "nontrivial denominator in {}",
                self
            )));
        }
        self.num.y_to_x()
    }
}

impl fmt::Display for LocElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == [0, 0, 0] {
            return write!(f, "{}", self.num);
        }
        let mut dens = Vec::new();
        for k in 0..3 {
            let (i, j) = PAIRS[k];
            match self.den[k] {
                0 => {}
                1 => dens.push(format!("(Y{}+Y{})", i + 1, j + 1)),
                e => dens.push(format!("(Y{}+Y{})^{}", i + 1, j + 1, e)),
            }
        }
        if self.num.terms.len() > 1 {
            write!(f, "({})/({})", self.num, dens.join(""))
        } else {
            write!(f, "{}/({})", self.num, dens.join(""))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_cancels_denominator() {
        // (Y1+Y2)^2 (Y1+Y3) / (Y1+Y2)^2 reduces to Y1+Y3.
        let num = linear_form(0).pow(2).mul(&linear_form(1));
        let e = LocElem::new(num, [2, 0, 0]);
        assert_eq!(e.den, [0, 0, 0]);
        assert_eq!(e.num, linear_form(1));
    }

    /// The three coloring terms of the dotless two-sphere sum to zero and
    /// the two-dotted ones to one; these are the sphere evaluations used
    /// everywhere downstream.
    #[test]
    fn sphere_coloring_sums() {
        let term = |i: usize, dots: u32| -> LocElem {
            let mut den = [0u16; 3];
            for k in 0..3 {
                let (a, b) = PAIRS[k];
                if a == i || b == i {
                    den[k] = 2;
                }
            }
            let mut m = [0u16; 3];
            m[i] = 2 * dots as u16;
            LocElem::new(Poly::monomial(Alphabet::Y, m), den)
        };
        let sum0 = term(0, 0).add(&term(1, 0)).add(&term(2, 0));
        assert!(sum0.is_zero());
        let sum2 = term(0, 2).add(&term(1, 2)).add(&term(2, 2));
        assert_eq!(sum2, LocElem::one());
    }

    #[test]
    fn arithmetic_laws_on_random_elements() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut rand_elem = move || {
            let mut num = Poly::zero(Alphabet::Y);
            for _ in 0..3 {
                let r = next();
                num.toggle([(r % 3) as u16, ((r >> 8) % 3) as u16, ((r >> 16) % 3) as u16]);
            }
            LocElem::new(num, [(next() % 2) as u16, (next() % 2) as u16, (next() % 2) as u16])
        };
        for _ in 0..25 {
            let (a, b, c) = (rand_elem(), rand_elem(), rand_elem());
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }

    #[test]
    fn degree_counts_denominator() {
        let e = LocElem::new(Poly::monomial(Alphabet::Y, [2, 0, 0]), [1, 1, 0]);
        // Y1^2 has degree 2, each linear form degree 1.
        assert_eq!(e.graded_degree().unwrap(), Some(0));
    }
}
