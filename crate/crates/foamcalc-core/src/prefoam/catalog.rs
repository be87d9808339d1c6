//! Hand-built pre-foams: spheres, theta foams, closed surfaces, graph
//! times circle families, the Klein-bottle examples, and the
//! four-vertex pre-foam on which the flat evaluation is ambiguous.

use super::{Facet, Letter, Perm3, PreFoam, Seam};

/// A 2-sphere with `dots` dots: one closed facet, no seams.
pub fn sphere(dots: u32) -> PreFoam {
    let mut f = PreFoam::empty();
    f.facets.insert(0, Facet::closed_surface(true, 0).with_dots(dots));
    f
}

/// A closed orientable surface of the given genus with `dots` dots.
pub fn closed_surface(genus: u32, dots: u32) -> PreFoam {
    let mut f = PreFoam::empty();
    f.facets.insert(0, Facet::closed_surface(true, genus).with_dots(dots));
    f
}

/// Theta pre-foam: three disks glued along one seam circle, carrying
/// `n1, n2, n3` dots.
pub fn theta(n1: u32, n2: u32, n3: u32) -> PreFoam {
    let mut f = PreFoam::empty();
    f.seams.insert(0, Seam::Circle { monodromy: Perm3::IDENTITY });
    for (i, n) in [n1, n2, n3].into_iter().enumerate() {
        f.facets.insert(
            i as u32,
            Facet::disk(vec![Letter::new(0, i as u8, 1)]).with_dots(n),
        );
    }
    f
}

/// Tripod times interval glued to itself by the given leg permutation,
/// capped by one disk per orbit. Nontrivial monodromy admits no
/// pre-admissible coloring.
pub fn twisted_circle(monodromy: Perm3) -> PreFoam {
    let mut f = PreFoam::empty();
    f.seams.insert(0, Seam::Circle { monodromy });
    for (slot, _orbit) in monodromy.orbits().iter().enumerate() {
        f.facets.insert(slot as u32, Facet::disk(vec![Letter::new(0, slot as u8, 1)]));
    }
    f
}

/// The product of an abstract trivalent graph with a circle, twisted by a
/// 1-cochain: facets are edge annuli, seams are vertex circles. A twisted
/// edge is glued orientation-reversingly, realizing the mod-2 cohomology
/// class of the paper's Klein-type examples.
///
/// `edges[k] = (u, v)` with `u, v < n_vertices`; every vertex must have
/// total degree 3 (self-loops count twice).
pub fn annular_graph(n_vertices: usize, edges: &[(usize, usize)], twists: &[bool]) -> PreFoam {
    assert_eq!(edges.len(), twists.len());
    let mut f = PreFoam::empty();
    for v in 0..n_vertices {
        f.seams.insert(v as u32, Seam::Circle { monodromy: Perm3::IDENTITY });
    }
    // Slot assignment: edge ends in (edge index, end index) order.
    let mut next_slot = vec![0u8; n_vertices];
    let mut take_slot = move |v: usize| {
        let s = next_slot[v];
        next_slot[v] += 1;
        assert!(s < 3, "vertex {} has degree > 3", v);
        s
    };
    for (k, &(u, v)) in edges.iter().enumerate() {
        let su = take_slot(u);
        let sv = take_slot(v);
        let dir_v = if twists[k] { 1 } else { -1 };
        let facet = Facet {
            orientable: true,
            genus_or_crosscaps: 0,
            boundary: vec![
                vec![Letter::new(u as u32, su, 1)],
                vec![Letter::new(v as u32, sv, dir_v)],
            ],
            dots: 0,
            triangles: 0,
            squares: 0,
        };
        f.facets.insert(k as u32, facet);
    }
    f.embedded = false;
    f
}

/// Theta graph times a circle; `twist` inserts the Klein-type gluing on
/// one edge.
pub fn annular_theta_graph(twist: bool) -> PreFoam {
    let mut f = annular_graph(2, &[(0, 1), (0, 1), (0, 1)], &[twist, false, false]);
    f.embedded = !twist;
    f
}

/// Four disks glued to four parallel loops on a Klein bottle: eight
/// facets (four disks, four annuli), four seam circles. The last annulus
/// carries the orientation-reversing return gluing.
pub fn klein_four_disks() -> PreFoam {
    let mut f = PreFoam::empty();
    for s in 0..4u32 {
        f.seams.insert(s, Seam::Circle { monodromy: Perm3::IDENTITY });
    }
    // Slot layout per circle: 0 = disk, 1 = incoming annulus, 2 = outgoing.
    for d in 0..4u32 {
        f.facets.insert(d, Facet::disk(vec![Letter::new(d, 0, 1)]));
    }
    for a in 0..4u32 {
        let from = a;
        let to = (a + 1) % 4;
        let dir_to = if a == 3 { 1 } else { -1 };
        f.facets.insert(
            4 + a,
            Facet {
                orientable: true,
                genus_or_crosscaps: 0,
                boundary: vec![
                    vec![Letter::new(from, 2, 1)],
                    vec![Letter::new(to, 1, dir_to)],
                ],
                dots: 0,
                triangles: 0,
                squares: 0,
            },
        );
    }
    f.embedded = false;
    f
}

/// Torus with a meridian disk and a longitude disk: one seam vertex, two
/// seam loops at it, three facets. No pre-admissible coloring exists
/// (the torus-square facet meets each seam twice).
pub fn torus_two_disks() -> PreFoam {
    let mut f = PreFoam::empty();
    f.vertices.insert(0);
    f.seams.insert(0, Seam::Edge { ends: (0, 0) }); // meridian
    f.seams.insert(1, Seam::Edge { ends: (0, 0) }); // longitude
    f.facets.insert(0, Facet::disk(vec![Letter::new(0, 0, 1)]));
    f.facets.insert(1, Facet::disk(vec![Letter::new(1, 0, 1)]));
    f.facets.insert(
        2,
        Facet::disk(vec![
            Letter::new(0, 1, 1),
            Letter::new(1, 1, 1),
            Letter::new(0, 2, -1),
            Letter::new(1, 2, -1),
        ]),
    );
    f
}

/// The pre-foam of the mismatched-evaluations example: a Klein bottle
/// carrying a contractible circle `c` (bounding a dotted disk) and two
/// parallel essential circles `c1, c2` (bounding plain disks), meeting in
/// four seam vertices. Facets: the three glued disks, the square and two
/// lenses cut from the disk region of the Klein bottle, the middle strip
/// complement, and one outer annulus. Not embeddable in 3-space.
///
/// Seam ids follow the paper's edge names minus one: `e1..e8` are ids
/// `0..=7`. The perfect matchings `{e1, e3}` and `{e2, e4}` are ids
/// `{0, 2}` and `{1, 3}`.
pub fn km_counterexample() -> PreFoam {
    let mut f = PreFoam::empty();
    f.vertices.extend([0, 1, 2, 3]);
    let edges = [
        (0, 1), // e1: top arc of c
        (1, 2), // e2: chord of c1
        (2, 3), // e3: bottom arc of c
        (3, 0), // e4: chord of c2
        (1, 2), // e5: right cap of c
        (3, 0), // e6: left cap of c
        (2, 1), // e7: long arc of c1
        (0, 3), // e8: long arc of c2
    ];
    for (i, ends) in edges.into_iter().enumerate() {
        f.seams.insert(i as u32, Seam::Edge { ends: (ends.0, ends.1) });
    }
    let lt = Letter::new;
    // Facet 0: the dotted disk D on c = e1 e5 e3 e6.
    f.facets.insert(
        0,
        Facet::disk(vec![lt(0, 0, 1), lt(4, 0, 1), lt(2, 0, 1), lt(5, 0, 1)]).with_dots(1),
    );
    // Facet 1: the square between the chords.
    f.facets
        .insert(1, Facet::disk(vec![lt(0, 1, 1), lt(1, 0, 1), lt(2, 1, 1), lt(3, 0, 1)]));
    // Facet 2: right lens (chord e2 against cap e5).
    f.facets.insert(2, Facet::disk(vec![lt(1, 1, 1), lt(4, 1, -1)]));
    // Facet 3: left lens (chord e4 against cap e6).
    f.facets.insert(3, Facet::disk(vec![lt(3, 1, 1), lt(5, 1, -1)]));
    // Facet 4: the disk D1 on c1 = e2 e7.
    f.facets.insert(4, Facet::disk(vec![lt(1, 2, 1), lt(6, 0, 1)]));
    // Facet 5: the disk D2 on c2 = e4 e8.
    f.facets.insert(5, Facet::disk(vec![lt(3, 2, 1), lt(7, 0, 1)]));
    // Facet 6: the middle strip minus the disk region.
    f.facets
        .insert(6, Facet::disk(vec![lt(0, 2, -1), lt(7, 1, 1), lt(2, 2, -1), lt(6, 1, 1)]));
    // Facet 7: the outer annulus A; the second boundary circle records the
    // Klein-bottle return gluing.
    f.facets.insert(
        7,
        Facet {
            orientable: true,
            genus_or_crosscaps: 0,
            boundary: vec![
                vec![lt(6, 2, 1), lt(4, 2, 1)],
                vec![lt(7, 2, -1), lt(5, 2, -1)],
            ],
            dots: 0,
            triangles: 0,
            squares: 0,
        },
    );
    f.embedded = false;
    f
}

/// Items addressable by name from the command line.
pub fn by_name(name: &str, params: &[String]) -> Result<PreFoam, String> {
    let uint = |i: usize, default: u32| -> Result<u32, String> {
        match params.get(i) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| format!("bad integer parameter `{}`", s)),
        }
    };
    match name {
        "sphere" => Ok(sphere(uint(0, 0)?)),
        "surface" => Ok(closed_surface(uint(0, 1)?, uint(1, 0)?)),
        "theta" => Ok(theta(uint(0, 2)?, uint(1, 1)?, uint(2, 0)?)),
        "theta_times_circle" => Ok(annular_theta_graph(false)),
        "annular_theta_twisted" => Ok(annular_theta_graph(true)),
        "twisted_circle" => {
            let perm = params.first().map(|s| s.as_str()).unwrap_or("123");
            Perm3::from_name(perm)
                .map(twisted_circle)
                .ok_or_else(|| format!("unknown permutation `{}`", perm))
        }
        "klein_four_disks" => Ok(klein_four_disks()),
        "torus_two_disks" => Ok(torus_two_disks()),
        "km_counterexample" => Ok(km_counterexample()),
        "km_counterexample_F0" => crate::eval::surgery::km_counterexample_reduced(&[0, 2]),
        "km_counterexample_F1" => crate::eval::surgery::km_counterexample_reduced(&[1, 3]),
        _ => Err(format!("UnknownCatalogItem: `{}`", name)),
    }
}
