//! Ring homomorphisms out of `R = F2[E1,E2,E3]` and the value type that
//! covers all their targets. State spaces and Gram matrices are computed
//! after such a base change.

use super::laurent::ELaurent;
use super::poly::{Alphabet, Poly, RingError};
use super::rd::RDElem;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseChange {
    /// Stay in `R`.
    Identity,
    /// `E1, E2, E3 -> 0`, target the ground field.
    K,
    /// `Ei -> lambda_i E^i` into `F2[E]`, `deg E = 2`.
    PsiLambda(bool, bool, bool),
    /// `E1, E2 -> 0`, `E3 -> E` into `F2[E]`, `deg E = 6`.
    Phi,
    /// Invert the discriminant: `R -> R[D^-1]`.
    LocalizeD,
    /// `PsiLambda` followed by `E -> E` in `F2[E, E^-1]`.
    PsiLambdaLoc(bool, bool, bool),
}

impl BaseChange {
    /// A base change kills nothing invertible iff the image of the
    /// discriminant is invertible in the target.
    pub fn d_localizable(&self) -> bool {
        match self {
            BaseChange::Identity | BaseChange::K | BaseChange::PsiLambda(..) | BaseChange::Phi => {
                false
            }
            BaseChange::LocalizeD => true,
            // psi(D) = (l3 + l1 l2) E^3 over F2.
            BaseChange::PsiLambdaLoc(l1, l2, l3) => *l3 ^ (*l1 && *l2),
        }
    }

    /// Parse the command-line form: `R`, `k`, `psi:a,b,c`, `psi-loc:a,b,c`,
    /// `phi`, `locD`.
    pub fn parse(s: &str) -> Result<BaseChange, String> {
        let parse_lambda = |rest: &str| -> Result<(bool, bool, bool), String> {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(format!("expected three lambda entries, got `{}`", rest));
            }
            let mut l = [false; 3];
            for (i, p) in parts.iter().enumerate() {
                l[i] = match p.trim() {
                    "0" => false,
                    "1" => true,
                    other => return Err(format!("lambda entry must be 0 or 1, got `{}`", other)),
                };
            }
            Ok((l[0], l[1], l[2]))
        };
        match s {
            "R" | "r" | "id" => Ok(BaseChange::Identity),
            "k" | "K" => Ok(BaseChange::K),
            "phi" => Ok(BaseChange::Phi),
            "locD" | "locd" | "D" => Ok(BaseChange::LocalizeD),
            _ => {
                if let Some(rest) = s.strip_prefix("psi-loc:") {
                    let (a, b, c) = parse_lambda(rest)?;
                    Ok(BaseChange::PsiLambdaLoc(a, b, c))
                } else if let Some(rest) = s.strip_prefix("psi:") {
                    let (a, b, c) = parse_lambda(rest)?;
                    Ok(BaseChange::PsiLambda(a, b, c))
                } else {
                    Err(format!("unknown base change `{}`", s))
                }
            }
        }
    }
}

impl fmt::Display for BaseChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |x: &bool| if *x { "1" } else { "0" };
        match self {
            BaseChange::Identity => write!(f, "R"),
            BaseChange::K => write!(f, "k"),
            BaseChange::PsiLambda(x, y, z) => write!(f, "psi:{},{},{}", b(x), b(y), b(z)),
            BaseChange::Phi => write!(f, "phi"),
            BaseChange::LocalizeD => write!(f, "locD"),
            BaseChange::PsiLambdaLoc(x, y, z) => write!(f, "psi-loc:{},{},{}", b(x), b(y), b(z)),
        }
    }
}

/// An element of whatever ring a base change lands in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BcElem {
    R(Poly),
    K(bool),
    /// `F2[E]` with the grading weight of `E` recorded.
    SingleE(Poly),
    RD(RDElem),
    /// `F2[E, E^-1]`, `deg E = 2`.
    ELaurent(ELaurent),
}

impl BcElem {
    pub fn is_zero(&self) -> bool {
        match self {
            BcElem::R(p) => p.is_zero(),
            BcElem::K(b) => !b,
            BcElem::SingleE(p) => p.is_zero(),
            BcElem::RD(r) => r.is_zero(),
            BcElem::ELaurent(l) => l.is_zero(),
        }
    }

    pub fn zero_like(&self) -> BcElem {
        match self {
            BcElem::R(_) => BcElem::R(Poly::zero(Alphabet::E)),
            BcElem::K(_) => BcElem::K(false),
            BcElem::SingleE(p) => BcElem::SingleE(Poly::zero(p.alphabet)),
            BcElem::RD(_) => BcElem::RD(RDElem::zero()),
            BcElem::ELaurent(_) => BcElem::ELaurent(ELaurent::zero()),
        }
    }

    pub fn add(&self, other: &BcElem) -> BcElem {
        match (self, other) {
            (BcElem::R(a), BcElem::R(b)) => BcElem::R(a.add(b)),
            (BcElem::K(a), BcElem::K(b)) => BcElem::K(a ^ b),
            (BcElem::SingleE(a), BcElem::SingleE(b)) => BcElem::SingleE(a.add(b)),
            (BcElem::RD(a), BcElem::RD(b)) => BcElem::RD(a.add(b)),
            (BcElem::ELaurent(a), BcElem::ELaurent(b)) => BcElem::ELaurent(a.add(b)),
            _ => panic!("mixed base-change targets in add"),
        }
    }

    pub fn mul(&self, other: &BcElem) -> BcElem {
        match (self, other) {
            (BcElem::R(a), BcElem::R(b)) => BcElem::R(a.mul(b)),
            (BcElem::K(a), BcElem::K(b)) => BcElem::K(*a && *b),
            (BcElem::SingleE(a), BcElem::SingleE(b)) => BcElem::SingleE(a.mul(b)),
            (BcElem::RD(a), BcElem::RD(b)) => BcElem::RD(a.mul(b)),
            (BcElem::ELaurent(a), BcElem::ELaurent(b)) => BcElem::ELaurent(a.mul(b)),
            _ => panic!("mixed base-change targets in mul"),
        }
    }

    pub fn graded_degree(&self) -> Result<Option<i64>, RingError> {
        match self {
            BcElem::R(p) | BcElem::SingleE(p) => p.graded_degree(),
            BcElem::K(b) => Ok(if *b { Some(0) } else { None }),
            BcElem::RD(r) => r.graded_degree(),
            BcElem::ELaurent(l) => l.graded_degree(2),
        }
    }
}

impl fmt::Display for BcElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcElem::R(p) | BcElem::SingleE(p) => write!(f, "{}", p),
            BcElem::K(b) => write!(f, "{}", if *b { "1" } else { "0" }),
            BcElem::RD(r) => write!(f, "{}", r),
            BcElem::ELaurent(l) => write!(f, "{}", l),
        }
    }
}

fn psi_image(p: &Poly, l1: bool, l2: bool, l3: bool) -> Poly {
    // Ei -> lambda_i E^i, so the monomial E1^a E2^b E3^c maps to
    // lambda-coefficient times E^(a + 2b + 3c).
    let mut out = Poly::zero(Alphabet::Single(2));
    for m in &p.terms {
        let keep = (m[0] == 0 || l1) && (m[1] == 0 || l2) && (m[2] == 0 || l3);
        if keep {
            out.toggle([m[0] + 2 * m[1] + 3 * m[2], 0, 0]);
        }
    }
    out
}

/// Apply a base change to an element of `R`.
pub fn apply_to_poly(p: &Poly, bc: BaseChange) -> Result<BcElem, RingError> {
    assert_eq!(p.alphabet, Alphabet::E, "base changes act on R = F2[E1,E2,E3]");
    Ok(match bc {
        BaseChange::Identity => BcElem::R(p.clone()),
        BaseChange::K => BcElem::K(p.terms.contains(&[0, 0, 0])),
        BaseChange::PsiLambda(l1, l2, l3) => BcElem::SingleE(psi_image(p, l1, l2, l3)),
        BaseChange::Phi => {
            let mut out = Poly::zero(Alphabet::Single(6));
            for m in &p.terms {
                if m[0] == 0 && m[1] == 0 {
                    out.toggle([m[2], 0, 0]);
                }
            }
            BcElem::SingleE(out)
        }
        BaseChange::LocalizeD => BcElem::RD(RDElem::from_poly(p.clone())),
        BaseChange::PsiLambdaLoc(l1, l2, l3) => {
            let img = psi_image(p, l1, l2, l3);
            let mut out = ELaurent::zero();
            for m in &img.terms {
                out.toggle(m[0] as i64);
            }
            BcElem::ELaurent(out)
        }
    })
}

/// Apply a base change to an element of `R_D`.
pub fn apply_to_rd(r: &RDElem, bc: BaseChange) -> Result<BcElem, RingError> {
    if r.dpow == 0 {
        return apply_to_poly(&r.num, bc);
    }
    match bc {
        BaseChange::LocalizeD => Ok(BcElem::RD(r.clone())),
        BaseChange::PsiLambdaLoc(l1, l2, l3) => {
            if !bc.d_localizable() {
                return Err(RingError::NotDefined(format!(
                    "psi({}) kills the discriminant, cannot invert it",
                    bc
                )));
            }
            // psi(D) = E^3, so D^-1 maps to E^-3.
            let img = psi_image(&r.num, l1, l2, l3);
            let mut out = ELaurent::zero();
            for m in &img.terms {
                out.toggle(m[0] as i64 - 3 * r.dpow as i64);
            }
            Ok(BcElem::ELaurent(out))
        }
        _ => Err(RingError::NotDefined(format!(
            "element carries D^-{} but target of {} does not invert D",
            r.dpow, bc
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::poly::discriminant_e;

    #[test]
    fn discriminant_under_psi() {
        // E1E2 + E3 under psi(0,0,1) -> E^3.
        let d = discriminant_e();
        let img = apply_to_poly(&d, BaseChange::PsiLambda(false, false, true)).unwrap();
        assert_eq!(img, BcElem::SingleE(Poly::monomial(Alphabet::Single(2), [3, 0, 0])));
    }

    #[test]
    fn e1_under_k() {
        let e1 = Poly::var(Alphabet::E, 0);
        assert_eq!(apply_to_poly(&e1, BaseChange::K).unwrap(), BcElem::K(false));
        let one = Poly::one(Alphabet::E);
        assert_eq!(apply_to_poly(&one, BaseChange::K).unwrap(), BcElem::K(true));
    }

    #[test]
    fn e3_under_phi() {
        let e3 = Poly::var(Alphabet::E, 2);
        let img = apply_to_poly(&e3, BaseChange::Phi).unwrap();
        assert_eq!(img, BcElem::SingleE(Poly::var(Alphabet::Single(6), 0)));
        // deg E3 = 6 is preserved.
        assert_eq!(img.graded_degree().unwrap(), Some(6));
    }

    #[test]
    fn localizability() {
        assert!(BaseChange::PsiLambdaLoc(false, false, true).d_localizable());
        assert!(BaseChange::PsiLambdaLoc(true, true, false).d_localizable());
        assert!(!BaseChange::PsiLambdaLoc(true, true, true).d_localizable());
        assert!(!BaseChange::PsiLambdaLoc(false, false, false).d_localizable());
    }

    #[test]
    fn ring_homomorphism_laws() {
        let samples = [
            Poly::var(Alphabet::E, 0),
            Poly::var(Alphabet::E, 1),
            discriminant_e(),
            Poly::monomial(Alphabet::E, [2, 1, 0]).add(&Poly::one(Alphabet::E)),
        ];
        let bcs = [
            BaseChange::Identity,
            BaseChange::K,
            BaseChange::PsiLambda(true, false, true),
            BaseChange::Phi,
            BaseChange::LocalizeD,
            BaseChange::PsiLambdaLoc(false, false, true),
        ];
        for bc in bcs {
            for p in &samples {
                for q in &samples {
                    let fp = apply_to_poly(p, bc).unwrap();
                    let fq = apply_to_poly(q, bc).unwrap();
                    assert_eq!(apply_to_poly(&p.add(q), bc).unwrap(), fp.add(&fq));
                    assert_eq!(apply_to_poly(&p.mul(q), bc).unwrap(), fp.mul(&fq));
                }
            }
        }
    }

    #[test]
    fn rd_input_rejected_by_polynomial_targets() {
        let inv = RDElem::d_inverse();
        assert!(apply_to_rd(&inv, BaseChange::K).is_err());
        assert!(apply_to_rd(&inv, BaseChange::PsiLambdaLoc(true, true, true)).is_err());
        let ok = apply_to_rd(&inv, BaseChange::PsiLambdaLoc(false, false, true)).unwrap();
        assert_eq!(ok, BcElem::ELaurent(ELaurent::monomial(-3)));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["R", "k", "phi", "locD", "psi:0,1,1", "psi-loc:0,0,1"] {
            let bc = BaseChange::parse(s).unwrap();
            assert_eq!(BaseChange::parse(&bc.to_string()).unwrap(), bc);
        }
        assert!(BaseChange::parse("nope").is_err());
    }
}
