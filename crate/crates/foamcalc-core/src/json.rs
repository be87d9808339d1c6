//! Versioned JSON schemas for pre-foams, webs, and movies.

use crate::foamspace::{Move, Movie, Strand};
use crate::prefoam::{Facet, Letter, Perm3, PreFoam, Seam};
use crate::web::Web;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn err(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

// --- prefoam-v1 ---------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreFoamV1 {
    pub schema: String,
    pub vertices: Vec<String>,
    pub seams: Vec<SeamV1>,
    pub facets: Vec<FacetV1>,
    pub embedded: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeamV1 {
    pub id: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ends: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacetV1 {
    pub id: String,
    pub orientable: bool,
    pub genus: u32,
    pub boundary: Vec<Vec<(String, u8, i8)>>,
    #[serde(default)]
    pub dots: u32,
    #[serde(default)]
    pub triangles: u32,
    #[serde(default)]
    pub squares: u32,
}

pub fn prefoam_to_json(foam: &PreFoam) -> PreFoamV1 {
    PreFoamV1 {
        schema: "prefoam-v1".to_string(),
        vertices: foam.vertices.iter().map(|v| v.to_string()).collect(),
        seams: foam
            .seams
            .iter()
            .map(|(id, seam)| match seam {
                Seam::Edge { ends } => SeamV1 {
                    id: id.to_string(),
                    kind: "edge".to_string(),
                    ends: Some([ends.0.to_string(), ends.1.to_string()]),
                    monodromy: None,
                },
                Seam::Circle { monodromy } => SeamV1 {
                    id: id.to_string(),
                    kind: "circle".to_string(),
                    ends: None,
                    monodromy: Some(monodromy.name().to_string()),
                },
            })
            .collect(),
        facets: foam
            .facets
            .iter()
            .map(|(id, facet)| FacetV1 {
                id: id.to_string(),
                orientable: facet.orientable,
                genus: facet.genus_or_crosscaps,
                boundary: facet
                    .boundary
                    .iter()
                    .map(|w| {
                        w.iter().map(|l| (l.seam.to_string(), l.slot, l.dir)).collect()
                    })
                    .collect(),
                dots: facet.dots,
                triangles: facet.triangles,
                squares: facet.squares,
            })
            .collect(),
        embedded: foam.embedded,
    }
}

pub fn prefoam_from_json(v: &PreFoamV1) -> Result<PreFoam, SchemaError> {
    if v.schema != "prefoam-v1" {
        return Err(err(format!("SchemaVersionMismatch: `{}`", v.schema)));
    }
    let mut foam = PreFoam::empty();
    let mut vid: BTreeMap<&str, u32> = BTreeMap::new();
    for (i, name) in v.vertices.iter().enumerate() {
        if vid.insert(name, i as u32).is_some() {
            return Err(err(format!("duplicate vertex id `{}`", name)));
        }
        foam.vertices.insert(i as u32);
    }
    let mut sid: BTreeMap<&str, u32> = BTreeMap::new();
    for (i, seam) in v.seams.iter().enumerate() {
        if sid.insert(&seam.id, i as u32).is_some() {
            return Err(err(format!("duplicate seam id `{}`", seam.id)));
        }
        let s = match seam.kind.as_str() {
            "edge" => {
                let ends = seam
                    .ends
                    .as_ref()
                    .ok_or_else(|| err(format!("edge seam `{}` needs ends", seam.id)))?;
                let a = *vid
                    .get(ends[0].as_str())
                    .ok_or_else(|| err(format!("unknown vertex `{}`", ends[0])))?;
                let b = *vid
                    .get(ends[1].as_str())
                    .ok_or_else(|| err(format!("unknown vertex `{}`", ends[1])))?;
                Seam::Edge { ends: (a, b) }
            }
            "circle" => {
                let m = seam.monodromy.as_deref().unwrap_or("e");
                Seam::Circle {
                    monodromy: Perm3::from_name(m)
                        .ok_or_else(|| err(format!("unknown monodromy `{}`", m)))?,
                }
            }
            other => return Err(err(format!("unknown seam kind `{}`", other))),
        };
        foam.seams.insert(i as u32, s);
    }
    let mut fid: BTreeMap<&str, u32> = BTreeMap::new();
    for (i, facet) in v.facets.iter().enumerate() {
        if fid.insert(&facet.id, i as u32).is_some() {
            return Err(err(format!("duplicate facet id `{}`", facet.id)));
        }
        let boundary = facet
            .boundary
            .iter()
            .map(|w| {
                w.iter()
                    .map(|(s, slot, dir)| {
                        let seam = *sid
                            .get(s.as_str())
                            .ok_or_else(|| err(format!("unknown seam `{}`", s)))?;
                        Ok(Letter::new(seam, *slot, *dir))
                    })
                    .collect::<Result<Vec<_>, SchemaError>>()
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        foam.facets.insert(
            i as u32,
            Facet {
                orientable: facet.orientable,
                genus_or_crosscaps: facet.genus,
                boundary,
                dots: facet.dots,
                triangles: facet.triangles,
                squares: facet.squares,
            },
        );
    }
    foam.embedded = v.embedded;
    Ok(foam)
}

// --- web-v1 ----------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WebV1 {
    pub schema: String,
    pub half_edges: usize,
    pub pairing: Vec<usize>,
    pub rotation: Vec<usize>,
    #[serde(default)]
    pub free_loops: usize,
}

pub fn web_to_json(web: &Web) -> WebV1 {
    WebV1 {
        schema: "web-v1".to_string(),
        half_edges: web.half_edge_count(),
        pairing: web.pairing.clone(),
        rotation: web.rotation.clone(),
        free_loops: web.free_loops,
    }
}

pub fn web_from_json(v: &WebV1) -> Result<Web, SchemaError> {
    if v.schema != "web-v1" {
        return Err(err(format!("SchemaVersionMismatch: `{}`", v.schema)));
    }
    if v.pairing.len() != v.half_edges || v.rotation.len() != v.half_edges {
        return Err(err("pairing/rotation length must equal half_edges"));
    }
    let web = Web {
        pairing: v.pairing.clone(),
        rotation: v.rotation.clone(),
        free_loops: v.free_loops,
    };
    web.validate().map_err(|e| err(format!("ParseError: {}", e)))?;
    Ok(web)
}

// --- movie-v1 ---------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MovieV1 {
    pub schema: String,
    pub initial_web: WebV1,
    pub moves: Vec<MoveV1>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveV1 {
    Birth,
    Death { r#loop: usize },
    SaddleLoops { a: usize, b: usize },
    SaddleLoopSplit { r#loop: usize },
    SaddleLoopEdge { r#loop: usize, half: usize },
    SaddlePinch { half: usize },
    SaddleEdges { h1: usize, h2: usize },
    Zip { s1: StrandV1, s2: StrandV1 },
    Unzip { half: usize },
    Vtx { half: usize },
    Blowup { half: usize },
    Blowdown { half: usize },
    Dot { strand: StrandV1 },
    Triangle { strand: StrandV1 },
    Square { strand: StrandV1 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrandV1 {
    Edge(usize),
    Loop(usize),
}

impl From<&Strand> for StrandV1 {
    fn from(s: &Strand) -> Self {
        match s {
            Strand::Edge(h) => StrandV1::Edge(*h),
            Strand::Loop(i) => StrandV1::Loop(*i),
        }
    }
}

impl From<&StrandV1> for Strand {
    fn from(s: &StrandV1) -> Self {
        match s {
            StrandV1::Edge(h) => Strand::Edge(*h),
            StrandV1::Loop(i) => Strand::Loop(*i),
        }
    }
}

pub fn movie_to_json(movie: &Movie) -> MovieV1 {
    MovieV1 {
        schema: "movie-v1".to_string(),
        initial_web: web_to_json(&movie.initial),
        moves: movie
            .moves
            .iter()
            .map(|m| match m {
                Move::Birth => MoveV1::Birth,
                Move::Death(i) => MoveV1::Death { r#loop: *i },
                Move::SaddleLoops(a, b) => MoveV1::SaddleLoops { a: *a, b: *b },
                Move::SaddleLoopSplit(i) => MoveV1::SaddleLoopSplit { r#loop: *i },
                Move::SaddleLoopEdge(i, h) => {
                    MoveV1::SaddleLoopEdge { r#loop: *i, half: *h }
                }
                Move::SaddlePinch(h) => MoveV1::SaddlePinch { half: *h },
                Move::SaddleEdges(a, b) => MoveV1::SaddleEdges { h1: *a, h2: *b },
                Move::Zip(a, b) => MoveV1::Zip { s1: a.into(), s2: b.into() },
                Move::Unzip(h) => MoveV1::Unzip { half: *h },
                Move::Vtx(h) => MoveV1::Vtx { half: *h },
                Move::Blowup(h) => MoveV1::Blowup { half: *h },
                Move::Blowdown(h) => MoveV1::Blowdown { half: *h },
                Move::Dot(s) => MoveV1::Dot { strand: s.into() },
                Move::Triangle(s) => MoveV1::Triangle { strand: s.into() },
                Move::Square(s) => MoveV1::Square { strand: s.into() },
            })
            .collect(),
    }
}

pub fn movie_from_json(v: &MovieV1) -> Result<Movie, SchemaError> {
    if v.schema != "movie-v1" {
        return Err(err(format!("SchemaVersionMismatch: `{}`", v.schema)));
    }
    let initial = web_from_json(&v.initial_web)?;
    let moves = v
        .moves
        .iter()
        .map(|m| match m {
            MoveV1::Birth => Move::Birth,
            MoveV1::Death { r#loop } => Move::Death(*r#loop),
            MoveV1::SaddleLoops { a, b } => Move::SaddleLoops(*a, *b),
            MoveV1::SaddleLoopSplit { r#loop } => Move::SaddleLoopSplit(*r#loop),
            MoveV1::SaddleLoopEdge { r#loop, half } => Move::SaddleLoopEdge(*r#loop, *half),
            MoveV1::SaddlePinch { half } => Move::SaddlePinch(*half),
            MoveV1::SaddleEdges { h1, h2 } => Move::SaddleEdges(*h1, *h2),
            MoveV1::Zip { s1, s2 } => Move::Zip(s1.into(), s2.into()),
            MoveV1::Unzip { half } => Move::Unzip(*half),
            MoveV1::Vtx { half } => Move::Vtx(*half),
            MoveV1::Blowup { half } => Move::Blowup(*half),
            MoveV1::Blowdown { half } => Move::Blowdown(*half),
            MoveV1::Dot { strand } => Move::Dot(strand.into()),
            MoveV1::Triangle { strand } => Move::Triangle(strand.into()),
            MoveV1::Square { strand } => Move::Square(strand.into()),
        })
        .collect();
    Ok(Movie { initial, moves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefoam::catalog;

    #[test]
    fn prefoam_round_trip() {
        for foam in [
            catalog::theta(2, 1, 0),
            catalog::km_counterexample(),
            catalog::klein_four_disks(),
            catalog::torus_two_disks(),
        ] {
            let v = prefoam_to_json(&foam);
            let text = serde_json::to_string_pretty(&v).unwrap();
            let parsed: PreFoamV1 = serde_json::from_str(&text).unwrap();
            let back = prefoam_from_json(&parsed).unwrap();
            assert_eq!(back, foam);
        }
    }

    #[test]
    fn web_round_trip() {
        for web in [crate::web::shapes::theta(), crate::web::shapes::k4(), Web::loops(2)] {
            let v = web_to_json(&web);
            let text = serde_json::to_string(&v).unwrap();
            let back = web_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, web);
        }
    }

    #[test]
    fn movie_round_trip() {
        let movie = crate::foamspace::spaces::random_movie(7, 8);
        let v = movie_to_json(&movie);
        let text = serde_json::to_string(&v).unwrap();
        let back = movie_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, movie);
    }

    #[test]
    fn schema_version_enforced() {
        let mut v = web_to_json(&Web::loops(1));
        v.schema = "web-v2".into();
        assert!(web_from_json(&v).is_err());
    }

    #[test]
    fn invalid_web_rejected() {
        let v = WebV1 {
            schema: "web-v1".into(),
            half_edges: 3,
            pairing: vec![1, 0, 2],
            rotation: vec![1, 2, 0],
            free_loops: 0,
        };
        assert!(web_from_json(&v).is_err());
    }
}
