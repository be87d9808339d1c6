//! The discriminant-localized ring `R_D = F2[E1,E2,E3][D^-1]`,
//! `D = E1 E2 + E3`. Triangle and square facet decorations evaluate here.

use super::poly::{discriminant_e, Alphabet, Poly, RingError};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RDElem {
    pub num: Poly,
    /// Power of `D` in the denominator.
    pub dpow: u32,
}

impl RDElem {
    pub fn zero() -> Self {
        RDElem { num: Poly::zero(Alphabet::E), dpow: 0 }
    }

    pub fn one() -> Self {
        RDElem { num: Poly::one(Alphabet::E), dpow: 0 }
    }

    pub fn from_poly(num: Poly) -> Self {
        assert_eq!(num.alphabet, Alphabet::E);
        RDElem { num, dpow: 0 }
    }

    /// `D^-1` itself, degree -6.
    pub fn d_inverse() -> Self {
        RDElem { num: Poly::one(Alphabet::E), dpow: 1 }
    }

    pub fn new(num: Poly, dpow: u32) -> Self {
        RDElem { num, dpow }.canonical()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn canonical(mut self) -> Self {
        if self.num.is_zero() {
            self.dpow = 0;
            return self;
        }
        let d = discriminant_e();
        while self.dpow > 0 {
            match self.num.exact_div(&d) {
                Ok(q) => {
                    self.num = q;
                    self.dpow -= 1;
                }
                Err(_) => break,
            }
        }
        self
    }

    pub fn add(&self, other: &RDElem) -> RDElem {
        let d = discriminant_e();
        let p = self.dpow.max(other.dpow);
        let a = self.num.mul(&d.pow(p - self.dpow));
        let b = other.num.mul(&d.pow(p - other.dpow));
        RDElem { num: a.add(&b), dpow: p }.canonical()
    }

    pub fn mul(&self, other: &RDElem) -> RDElem {
        RDElem { num: self.num.mul(&other.num), dpow: self.dpow + other.dpow }.canonical()
    }

    pub fn graded_degree(&self) -> Result<Option<i64>, RingError> {
        match self.num.graded_degree()? {
            None => Ok(None),
            Some(d) => Ok(Some(d - 6 * self.dpow as i64)),
        }
    }

    /// The underlying polynomial when no inverse discriminant remains.
    pub fn try_to_poly(&self) -> Result<Poly, RingError> {
        if self.dpow == 0 {
            Ok(self.num.clone())
        } else {
            Err(RingError::NotDefined(format!("{} carries D^-{}", self, self.dpow)))
        }
    }
}

impl fmt::Display for RDElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dpow {
            0 => write!(f, "{}", self.num),
            p => {
                let d = if p == 1 { "D".to_string() } else { format!("D^{}", p) };
                if self.num.terms.len() > 1 {
                    write!(f, "({})/{}", self.num, d)
                } else {
                    write!(f, "{}/{}", self.num, d)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_cancels_discriminant() {
        let d = discriminant_e();
        let e = RDElem::new(d.mul(&Poly::var(Alphabet::E, 0)), 1);
        assert_eq!(e, RDElem::from_poly(Poly::var(Alphabet::E, 0)));
    }

    #[test]
    fn d_inverse_has_degree_minus_six() {
        assert_eq!(RDElem::d_inverse().graded_degree().unwrap(), Some(-6));
    }

    #[test]
    fn add_over_common_denominator() {
        // 1/D + E1E2/D + E3/D = (1 + D)/D ... check plain arithmetic:
        let inv = RDElem::d_inverse();
        let num = RDElem::new(discriminant_e(), 1);
        assert_eq!(num, RDElem::one());
        let sum = inv.add(&num);
        assert_eq!(sum.add(&inv), RDElem::one());
    }
}
