//! Evaluation of closed pre-foams: the colored state sum, its total in
//! the symmetric-polynomial ring, the decorated variant over the
//! discriminant localization, and formal sums of pre-foams with ring
//! coefficients.

pub mod relations;
pub mod surgery;

use crate::prefoam::{Coloring, PreFoam, SurfaceContext};
use crate::ring::{Alphabet, BaseChange, BcElem, LocElem, Poly, RDElem, RingError, PAIRS};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// A bicolored surface of the coloring is non-orientable.
    NonAdmissibleColoring,
    /// A closed bicolored surface reported odd Euler characteristic.
    OddEuler,
    /// The coloring sum failed to cancel its denominators.
    NotPolynomial(LocElem),
    /// The coloring sum is not symmetric (indicates a structural bug).
    NotSymmetric,
    /// Decorations present where they are not allowed.
    DecoratedInput,
    Ring(RingError),
    Surgery(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NonAdmissibleColoring => write!(f, "non-admissible coloring"),
            EvalError::OddEuler => write!(f, "odd Euler characteristic of a closed surface"),
            EvalError::NotPolynomial(l) => write!(f, "sum is not a polynomial: {}", l),
            EvalError::NotSymmetric => write!(f, "sum is not symmetric"),
            EvalError::DecoratedInput => write!(f, "triangles/squares not allowed here"),
            EvalError::Ring(e) => write!(f, "{}", e),
            EvalError::Surgery(s) => write!(f, "{}", s),
        }
    }
}

impl std::error::Error for EvalError {}

impl From<RingError> for EvalError {
    fn from(e: RingError) -> Self {
        EvalError::Ring(e)
    }
}

/// Pair index (0..3) of the two colors other than `i` (1-based colors).
fn pair_of_colors(a: u8, b: u8) -> usize {
    let (lo, hi) = (a.min(b) as usize - 1, a.max(b) as usize - 1);
    PAIRS.iter().position(|&p| p == (lo, hi)).unwrap()
}

/// The colored evaluation `P(F,c)/Q(F,c)` of an admissible coloring of a
/// closed pre-foam, with triangle and square decorations contributing
/// their inverse linear factors.
pub fn eval_colored(foam: &PreFoam, coloring: &Coloring) -> Result<LocElem, EvalError> {
    let ctx = SurfaceContext::new(foam)
        .ok_or_else(|| EvalError::Surgery("pre-foam has uncovered slots".into()))?;
    eval_colored_ctx(&ctx, &ctx.color_vector(coloring))
}

fn eval_colored_ctx(ctx: &SurfaceContext, colors: &[u8]) -> Result<LocElem, EvalError> {
    let foam = ctx.foam();
    let mut num = Poly::one(Alphabet::Y);
    let mut den = [0i64; 3];

    for pair in [(1u8, 2u8), (1, 3), (2, 3)] {
        let (euler, orientable) = ctx.surface(colors, pair);
        if !orientable {
            return Err(EvalError::NonAdmissibleColoring);
        }
        if euler % 2 != 0 {
            return Err(EvalError::OddEuler);
        }
        // Q contributes (Xi+Xj)^(chi/2) = (Yi+Yj)^chi.
        den[pair_of_colors(pair.0, pair.1)] += euler;
    }

    for (&fid, facet) in &foam.facets {
        let color = colors[ctx.facet_index(fid)] as usize - 1;
        if facet.dots > 0 {
            let mut m = [0u16; 3];
            m[color] = 2 * facet.dots as u16;
            num = num.mul_mono(&m);
        }
        // A triangle on an i-facet contributes 1/(X_i + E1) = 1/(Xj + Xk);
        // a square contributes 1/(X_i^2 + E2) = 1/((Xi+Xj)(Xi+Xk)).
        if facet.triangles > 0 {
            let others: Vec<usize> = (0..3).filter(|&v| v != color).collect();
            den[pair_of_colors(others[0] as u8 + 1, others[1] as u8 + 1)] +=
                2 * facet.triangles as i64;
        }
        if facet.squares > 0 {
            for other in (0..3).filter(|&v| v != color) {
                den[pair_of_colors(color as u8 + 1, other as u8 + 1)] +=
                    2 * facet.squares as i64;
            }
        }
    }

    let mut out = LocElem::from_poly(num);
    for k in 0..3 {
        out = out.mul_form_pow(k, -(den[k] as i32));
    }
    Ok(out)
}

/// Sum of colored evaluations over all admissible colorings, as an element
/// of the square-root localization. Decorations allowed.
fn eval_sum(foam: &PreFoam) -> Result<LocElem, EvalError> {
    let Some(ctx) = SurfaceContext::new(foam) else {
        return Err(EvalError::Surgery("pre-foam has uncovered slots".into()));
    };
    let mut total = LocElem::zero();
    for c in foam.preadmissible_colorings() {
        let colors = ctx.color_vector(&c);
        if !ctx.admissible(&colors) {
            // Non-admissible colorings do not enter the sum.
            continue;
        }
        total = total.add(&eval_colored_ctx(&ctx, &colors)?);
    }
    Ok(total)
}

/// The closed evaluation: a symmetric polynomial in the elementary basis,
/// homogeneous of the pre-foam's degree.
pub fn eval_closed(foam: &PreFoam) -> Result<Poly, EvalError> {
    eval_closed_threads(foam, 1)
}

/// As `eval_closed`, with the coloring sum split over worker threads.
/// Partial sums are reduced in chunk order, so the result is identical
/// for every thread count.
pub fn eval_closed_threads(foam: &PreFoam, threads: usize) -> Result<Poly, EvalError> {
    if foam.has_decorations() {
        return Err(EvalError::DecoratedInput);
    }
    let total = if threads <= 1 {
        eval_sum(foam)?
    } else {
        let colorings: Vec<Coloring> = foam
            .preadmissible_colorings()
            .into_iter()
            .filter(|c| foam.is_admissible(c))
            .collect();
        let chunk = colorings.len().div_ceil(threads).max(1);
        let partials: Vec<Result<LocElem, EvalError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = colorings
                .chunks(chunk)
                .map(|cs| {
                    scope.spawn(move || {
                        let mut acc = LocElem::zero();
                        for c in cs {
                            acc = acc.add(&eval_colored(foam, c)?);
                        }
                        Ok(acc)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panic")).collect()
        });
        let mut acc = LocElem::zero();
        for p in partials {
            acc = acc.add(&p?);
        }
        acc
    };
    let x = total
        .try_to_x_poly()
        .map_err(|_| EvalError::NotPolynomial(total.clone()))?;
    x.to_elementary_basis().map_err(|_| EvalError::NotSymmetric)
}

/// The decorated evaluation, valued in `R[D^-1]`.
pub fn eval_closed_decorated(foam: &PreFoam) -> Result<RDElem, EvalError> {
    let total = eval_sum(foam)?;
    if total.is_zero() {
        return Ok(RDElem::zero());
    }
    // Clear denominators by a power of the discriminant
    // D = ((Y1+Y2)(Y1+Y3)(Y2+Y3))^2.
    let k = total.den.iter().map(|&e| (e as u32 + 1) / 2).max().unwrap();
    let mut cleared = total.clone();
    for pair in 0..3 {
        cleared = cleared.mul_form_pow(pair, 2 * k as i32);
    }
    let x = cleared
        .try_to_x_poly()
        .map_err(|_| EvalError::NotPolynomial(total.clone()))?;
    let e = x.to_elementary_basis().map_err(|_| EvalError::NotSymmetric)?;
    Ok(RDElem::new(e, k))
}

/// The evaluation after a base change.
pub fn eval_closed_over(foam: &PreFoam, bc: BaseChange) -> Result<BcElem, EvalError> {
    if foam.has_decorations() {
        let rd = eval_closed_decorated(foam)?;
        Ok(crate::ring::apply_to_rd(&rd, bc)?)
    } else {
        let p = eval_closed(foam)?;
        Ok(crate::ring::apply_to_poly(&p, bc)?)
    }
}

/// A finite `R`-linear combination of closed pre-foams.
#[derive(Debug, Clone, Default)]
pub struct FormalSum {
    pub terms: Vec<(Poly, PreFoam)>,
}

impl FormalSum {
    pub fn new() -> Self {
        FormalSum::default()
    }

    pub fn push(&mut self, coeff: Poly, foam: PreFoam) {
        assert_eq!(coeff.alphabet, Alphabet::E);
        if coeff.is_zero() {
            return;
        }
        // Identical pre-foams combine; zero coefficients drop.
        if let Some(entry) = self.terms.iter_mut().find(|(_, f)| *f == foam) {
            entry.0 = entry.0.add(&coeff);
        } else {
            self.terms.push((coeff, foam));
        }
        self.terms.retain(|(c, _)| !c.is_zero());
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate every term and sum with coefficients.
    pub fn eval(&self) -> Result<Poly, EvalError> {
        let mut total = Poly::zero(Alphabet::E);
        for (coeff, foam) in &self.terms {
            total = total.add(&coeff.mul(&eval_closed(foam)?));
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefoam::catalog;
    use crate::ring::elementary;

    fn e_poly(s: &str) -> Poly {
        crate::ring::parse::parse_poly(s, Alphabet::E).unwrap()
    }

    #[test]
    fn sphere_colored_value() {
        // Sphere colored 1 with n dots: X1^n / ((X1+X2)(X1+X3)).
        let s = catalog::sphere(3);
        let cols = s.admissible_colorings();
        let c = cols.iter().find(|c| c.color(0) == 1).unwrap();
        let v = eval_colored(&s, c).unwrap();
        assert_eq!(v.num, Poly::monomial(Alphabet::Y, [6, 0, 0]));
        assert_eq!(v.den, [2, 2, 0]);
    }

    #[test]
    fn sphere_table() {
        let expect = ["0", "0", "1", "E1", "E1^2 + E2"];
        for (n, want) in expect.iter().enumerate() {
            let v = eval_closed(&catalog::sphere(n as u32)).unwrap();
            assert_eq!(v, e_poly(want), "sphere with {} dots", n);
        }
    }

    #[test]
    fn theta_colored_value() {
        let th = catalog::theta(2, 1, 0);
        let cols = th.admissible_colorings();
        let c = cols
            .iter()
            .find(|c| c.color(0) == 1 && c.color(1) == 2 && c.color(2) == 3)
            .unwrap();
        let v = eval_colored(&th, c).unwrap();
        // X1^2 X2 / ((X1+X2)(X1+X3)(X2+X3)).
        assert_eq!(v.num, Poly::monomial(Alphabet::Y, [4, 2, 0]));
        assert_eq!(v.den, [2, 2, 2]);
    }

    #[test]
    fn theta_values() {
        assert_eq!(eval_closed(&catalog::theta(2, 1, 0)).unwrap(), e_poly("1"));
        // Repeated dot counts give zero.
        for (a, b, c) in [(0, 0, 0), (1, 1, 0), (2, 2, 1), (3, 3, 3), (4, 2, 2)] {
            assert!(eval_closed(&catalog::theta(a, b, c)).unwrap().is_zero());
        }
        // theta(4,2,0) is the Schur polynomial s_{2,1,0} mod 2 = E1E2 + E3;
        // the brute force below recomputes it from the quotient of
        // antisymmetrizers.
        let got = eval_closed(&catalog::theta(4, 2, 0)).unwrap();
        assert_eq!(got, schur_brute(4, 2, 0));
        assert_eq!(got, crate::ring::discriminant_e());
    }

    /// Independent oracle: the theta evaluation is
    /// `sum_{sigma} X_{s1}^{n1} X_{s2}^{n2} X_{s3}^{n3}` divided by
    /// `(X1+X2)(X1+X3)(X2+X3)`, reduced to the elementary basis.
    fn schur_brute(n1: u16, n2: u16, n3: u16) -> Poly {
        let mut numer = Poly::zero(Alphabet::X);
        for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let mut m = [0u16; 3];
            m[perm[0]] = n1;
            m[perm[1]] = n2;
            m[perm[2]] = n3;
            numer.toggle(m);
        }
        // (X1+X2)(X1+X3)(X2+X3) = E1E2 + E3, expanded in X.
        let vandermonde = elementary(1).mul(&elementary(2)).add(&elementary(3));
        numer.exact_div(&vandermonde).unwrap().to_elementary_basis().unwrap()
    }

    #[test]
    fn schur_oracle_matches_known_row() {
        // h_{n-2} for the sphere: s_{n-2,0,0}; cross-check the oracle on
        // the sphere values.
        assert_eq!(schur_brute(4, 1, 0), e_poly("E1^2 + E2"));
        assert_eq!(schur_brute(2, 1, 0), e_poly("1"));
    }

    #[test]
    fn torus_evaluates_to_one() {
        let torus = catalog::closed_surface(1, 0);
        let cols = torus.admissible_colorings();
        assert_eq!(cols.len(), 3);
        for c in &cols {
            assert_eq!(eval_colored(&torus, c).unwrap(), LocElem::one());
        }
        assert_eq!(eval_closed(&torus).unwrap(), e_poly("1"));
    }

    #[test]
    fn genus_two_surface() {
        // Two handle removals against sphere values: E1^2 + E2.
        let g2 = catalog::closed_surface(2, 0);
        assert_eq!(eval_closed(&g2).unwrap(), e_poly("E1^2 + E2"));
    }

    #[test]
    fn no_colorings_evaluates_to_zero() {
        assert!(eval_closed(&catalog::torus_two_disks()).unwrap().is_zero());
        let f = catalog::twisted_circle(crate::prefoam::Perm3::from_name("123").unwrap());
        assert!(eval_closed(&f).unwrap().is_zero());
    }

    #[test]
    fn graph_times_circle_is_tait_count_mod_two() {
        // Theta graph times circle: 6 Tait colorings, evaluation 0.
        let f = catalog::annular_theta_graph(false);
        assert!(eval_closed(&f).unwrap().is_zero());
        // The twisted variant has no admissible colorings at all.
        let t = catalog::annular_theta_graph(true);
        assert!(eval_closed(&t).unwrap().is_zero());
    }

    #[test]
    fn evaluation_degree_matches_foam_degree() {
        for foam in [
            catalog::sphere(4),
            catalog::theta(4, 2, 0),
            catalog::theta(5, 3, 1),
            catalog::closed_surface(2, 1),
        ] {
            let v = eval_closed(&foam).unwrap();
            if !v.is_zero() {
                assert_eq!(v.graded_degree().unwrap(), Some(foam.degree()));
            }
        }
    }

    #[test]
    fn s3_equivariance() {
        let foam = catalog::theta(4, 2, 0);
        for c in foam.admissible_colorings() {
            for perm in [[1usize, 0, 2], [0, 2, 1], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let lhs = eval_colored(&foam, &c.permute(&perm)).unwrap();
                let rhs = eval_colored(&foam, &c).unwrap().permute_vars(&perm);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn decorated_sphere_values() {
        // One triangle: D^-1.
        let mut s = catalog::sphere(0);
        s.facets.get_mut(&0).unwrap().triangles = 1;
        assert_eq!(s.degree(), -4 - 2);
        let v = eval_closed_decorated(&s).unwrap();
        assert_eq!(v, RDElem::d_inverse());
        assert_eq!(v.graded_degree().unwrap(), Some(-6));

        // One square: the three colored terms sum to zero.
        let mut sq = catalog::sphere(0);
        sq.facets.get_mut(&0).unwrap().squares = 1;
        assert!(eval_closed_decorated(&sq).unwrap().is_zero());

        // Triangle + square + two dots: D^-1 again.
        let mut both = catalog::sphere(2);
        both.facets.get_mut(&0).unwrap().triangles = 1;
        both.facets.get_mut(&0).unwrap().squares = 1;
        assert_eq!(eval_closed_decorated(&both).unwrap(), RDElem::d_inverse());
    }

    #[test]
    fn decorated_agrees_with_plain() {
        for foam in [catalog::sphere(4), catalog::theta(4, 2, 0)] {
            let plain = eval_closed(&foam).unwrap();
            let dec = eval_closed_decorated(&foam).unwrap();
            assert_eq!(dec, RDElem::from_poly(plain));
        }
    }

    #[test]
    fn formal_sum_combines_terms() {
        let mut s = FormalSum::new();
        s.push(Poly::one(Alphabet::E), catalog::sphere(2));
        s.push(Poly::one(Alphabet::E), catalog::sphere(2));
        assert!(s.is_empty(), "equal terms cancel in characteristic two");
        s.push(e_poly("E1"), catalog::sphere(3));
        assert_eq!(s.eval().unwrap(), e_poly("E1^2"));
    }
}
