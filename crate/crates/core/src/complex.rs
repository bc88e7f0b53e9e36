//! Closed simplicial 3-complexes and their conformal vertex weights.
//!
//! Tetrahedra are identified by their position in declaration order, not by
//! their vertex set, so a double tetrahedron (two tetrahedra glued along all
//! four faces) is a legal complex. The order of the vertices inside a `tet`
//! declaration fixes the slot order used by every per-tetrahedron block.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Slot pairs of a tetrahedron in the fixed edge order used throughout.
pub const EDGE_SLOTS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    vertices: Vec<VertexId>,
    tetrahedra: Vec<[VertexId; 4]>,
    local: Vec<[usize; 4]>,
    star: Vec<Vec<usize>>,
    edge_tets: BTreeMap<[VertexId; 2], Vec<usize>>,
    face_tets: BTreeMap<[VertexId; 3], Vec<usize>>,
}

impl SimplicialComplex {
    /// Builds and validates a complex from tetrahedra in declaration order.
    pub fn new(tetrahedra: Vec<[VertexId; 4]>) -> Result<Self> {
        let complex = Self::from_tetrahedra_unchecked(tetrahedra);
        let report = complex.validate();
        if report.is_valid() {
            Ok(complex)
        } else {
            Err(Error::InvalidComplex(report))
        }
    }

    /// Derives incidence data without checking the manifold invariants.
    pub fn from_tetrahedra_unchecked(tetrahedra: Vec<[VertexId; 4]>) -> Self {
        let vertices: Vec<VertexId> = tetrahedra
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index_of = |v: VertexId| vertices.binary_search(&v).expect("vertex collected above");
        let local: Vec<[usize; 4]> = tetrahedra.iter().map(|t| t.map(index_of)).collect();

        let mut star = vec![Vec::new(); vertices.len()];
        let mut edge_tets: BTreeMap<[VertexId; 2], Vec<usize>> = BTreeMap::new();
        let mut face_tets: BTreeMap<[VertexId; 3], Vec<usize>> = BTreeMap::new();
        for (ti, tet) in tetrahedra.iter().enumerate() {
            let distinct: BTreeSet<VertexId> = tet.iter().copied().collect();
            for &v in &distinct {
                star[index_of(v)].push(ti);
            }
            let mut edges = BTreeSet::new();
            let mut faces = BTreeSet::new();
            for a in 0..4 {
                for b in (a + 1)..4 {
                    if tet[a] != tet[b] {
                        edges.insert(sorted2(tet[a], tet[b]));
                    }
                    for c in (b + 1)..4 {
                        faces.insert(sorted3(tet[a], tet[b], tet[c]));
                    }
                }
            }
            for e in edges {
                edge_tets.entry(e).or_default().push(ti);
            }
            for f in faces {
                face_tets.entry(f).or_default().push(ti);
            }
        }

        Self {
            vertices,
            tetrahedra,
            local,
            star,
            edge_tets,
            face_tets,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn tetrahedra(&self) -> &[[VertexId; 4]] {
        &self.tetrahedra
    }

    /// Tetrahedra as indices into [`Self::vertices`], in slot order.
    pub fn local_tetrahedra(&self) -> &[[usize; 4]] {
        &self.local
    }

    pub fn edges(&self) -> impl Iterator<Item = [VertexId; 2]> + '_ {
        self.edge_tets.keys().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_tets.len()
    }

    pub fn faces(&self) -> impl Iterator<Item = [VertexId; 3]> + '_ {
        self.face_tets.keys().copied()
    }

    pub fn num_faces(&self) -> usize {
        self.face_tets.len()
    }

    pub fn vertex_index(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// Indices of the tetrahedra incident to `v`.
    pub fn star(&self, v: VertexId) -> &[usize] {
        self.vertex_index(v)
            .map(|i| self.star[i].as_slice())
            .unwrap_or(&[])
    }

    /// Indices of the tetrahedra containing the edge `{a, b}`.
    pub fn edge_tets(&self, a: VertexId, b: VertexId) -> &[usize] {
        self.edge_tets
            .get(&sorted2(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn face_tets(&self, a: VertexId, b: VertexId, c: VertexId) -> &[usize] {
        self.face_tets
            .get(&sorted3(a, b, c))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Checks every structural invariant and lists the violations.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        if self.tetrahedra.is_empty() {
            issues.push(ValidationIssue::Empty);
            return ValidationReport { issues };
        }
        for (index, tet) in self.tetrahedra.iter().enumerate() {
            let distinct: BTreeSet<_> = tet.iter().collect();
            if distinct.len() != 4 {
                issues.push(ValidationIssue::RepeatedVertex {
                    index,
                    vertices: *tet,
                });
            }
        }
        for (face, tets) in &self.face_tets {
            if tets.len() != 2 {
                issues.push(ValidationIssue::NonManifoldFace {
                    face: *face,
                    count: tets.len(),
                });
            }
        }
        let components = self.skeleton_components();
        if components > 1 {
            issues.push(ValidationIssue::DisconnectedSkeleton { components });
        }
        ValidationReport { issues }
    }

    fn skeleton_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for [a, b] in self.edge_tets.keys() {
            let ra = find(&mut parent, self.vertex_index(*a).unwrap());
            let rb = find(&mut parent, self.vertex_index(*b).unwrap());
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }
}

fn sorted2(a: VertexId, b: VertexId) -> [VertexId; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

fn sorted3(a: VertexId, b: VertexId, c: VertexId) -> [VertexId; 3] {
    let mut f = [a, b, c];
    f.sort_unstable();
    f
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    Empty,
    RepeatedVertex {
        index: usize,
        vertices: [VertexId; 4],
    },
    NonManifoldFace {
        face: [VertexId; 3],
        count: usize,
    },
    DisconnectedSkeleton {
        components: usize,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "empty complex: no tetrahedra"),
            Self::RepeatedVertex { index, vertices } => {
                write!(f, "tetrahedron #{index} {vertices:?} repeats a vertex")
            }
            Self::NonManifoldFace { face, count } => write!(
                f,
                "non-manifold face {face:?}: incident to {count} tetrahedra (closed complexes need 2)"
            ),
            Self::DisconnectedSkeleton { components } => {
                write!(f, "disconnected skeleton: {components} components")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

/// Vertex weights `r`; edge `{i, j}` has length `r_i + r_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricAssignment {
    weights: BTreeMap<VertexId, f64>,
}

impl MetricAssignment {
    pub fn new(weights: BTreeMap<VertexId, f64>) -> Result<Self> {
        for (&vertex, &weight) in &weights {
            check_weight(vertex, weight)?;
        }
        Ok(Self { weights })
    }

    pub fn uniform(complex: &SimplicialComplex, value: f64) -> Result<Self> {
        Self::new(complex.vertices().iter().map(|&v| (v, value)).collect())
    }

    /// Weights listed in the complex's vertex order.
    pub fn from_dense(complex: &SimplicialComplex, r: &[f64]) -> Result<Self> {
        assert_eq!(r.len(), complex.num_vertices());
        Self::new(
            complex
                .vertices()
                .iter()
                .copied()
                .zip(r.iter().copied())
                .collect(),
        )
    }

    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.weights.get(&v).copied()
    }

    pub fn set(&mut self, v: VertexId, weight: f64) -> Result<()> {
        check_weight(v, weight)?;
        self.weights.insert(v, weight);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.weights.iter().map(|(&v, &r)| (v, r))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.weights
                .iter()
                .map(|(&v, &r)| (v, r * factor))
                .collect(),
        )
    }

    /// Weights in the complex's vertex order; every vertex must be assigned.
    pub fn dense(&self, complex: &SimplicialComplex) -> Result<Vec<f64>> {
        complex
            .vertices()
            .iter()
            .map(|&v| self.get(v).ok_or(Error::UnknownVertex(v)))
            .collect()
    }
}

fn check_weight(vertex: VertexId, weight: f64) -> Result<()> {
    if weight.is_finite() && weight > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveWeight { vertex, weight })
    }
}

/// Parses the line-oriented `tet` / `radius` format and validates the result.
pub fn parse_complex(text: &str) -> Result<(SimplicialComplex, MetricAssignment)> {
    let mut tets = Vec::new();
    let mut radii: BTreeMap<VertexId, (f64, usize)> = BTreeMap::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: String| Error::Syntax { line, message };
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap();
        let args: Vec<&str> = words.collect();
        match keyword {
            "tet" => {
                if args.len() != 4 {
                    return Err(syntax(format!(
                        "`tet` takes 4 vertex ids, found {}",
                        args.len()
                    )));
                }
                let mut tet = [0; 4];
                for (slot, word) in args.iter().enumerate() {
                    tet[slot] = parse_vertex(word).map_err(syntax)?;
                }
                tets.push(tet);
            }
            "radius" => {
                if args.len() != 2 {
                    return Err(syntax(format!(
                        "`radius` takes a vertex id and a weight, found {} arguments",
                        args.len()
                    )));
                }
                let vertex = parse_vertex(args[0]).map_err(syntax)?;
                let weight: f64 = args[1]
                    .parse()
                    .map_err(|_| syntax(format!("invalid weight `{}`", args[1])))?;
                if !(weight.is_finite() && weight > 0.0) {
                    return Err(Error::NonPositiveWeight { vertex, weight });
                }
                if radii.insert(vertex, (weight, line)).is_some() {
                    return Err(syntax(format!("duplicate radius for vertex {vertex}")));
                }
            }
            other => return Err(syntax(format!("unknown keyword `{other}`"))),
        }
    }

    let complex = SimplicialComplex::new(tets)?;
    let mut weights: BTreeMap<VertexId, f64> =
        complex.vertices().iter().map(|&v| (v, 1.0)).collect();
    for (vertex, (weight, line)) in radii {
        if complex.vertex_index(vertex).is_none() {
            return Err(Error::Syntax {
                line,
                message: format!("radius given for vertex {vertex}, which no tetrahedron uses"),
            });
        }
        weights.insert(vertex, weight);
    }
    Ok((complex, MetricAssignment::new(weights)?))
}

fn parse_vertex(word: &str) -> std::result::Result<VertexId, String> {
    word.parse()
        .map_err(|_| format!("invalid vertex id `{word}` (expected a non-negative integer)"))
}

/// Emits `radius` lines sorted by vertex id, then `tet` lines in declaration order.
pub fn serialize_complex(complex: &SimplicialComplex, metric: &MetricAssignment) -> String {
    let mut out = String::new();
    for &v in complex.vertices() {
        if let Some(r) = metric.get(v) {
            out.push_str(&format!("radius {v} {r}\n"));
        }
    }
    for [a, b, c, d] in complex.tetrahedra() {
        out.push_str(&format!("tet {a} {b} {c} {d}\n"));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    DoubleTetrahedron,
    Boundary4Simplex,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::DoubleTetrahedron, Preset::Boundary4Simplex];

    pub fn name(self) -> &'static str {
        match self {
            Preset::DoubleTetrahedron => "double_tetrahedron",
            Preset::Boundary4Simplex => "boundary_4_simplex",
        }
    }

    /// The complex with unit weights; vertices are numbered from 1.
    pub fn build(self) -> (SimplicialComplex, MetricAssignment) {
        let tets = match self {
            Preset::DoubleTetrahedron => vec![[1, 2, 3, 4], [1, 2, 3, 4]],
            Preset::Boundary4Simplex => vec![
                [2, 3, 4, 5],
                [1, 3, 4, 5],
                [1, 2, 4, 5],
                [1, 2, 3, 5],
                [1, 2, 3, 4],
            ],
        };
        let complex = SimplicialComplex::new(tets).expect("presets are valid closed complexes");
        let metric = MetricAssignment::uniform(&complex, 1.0).unwrap();
        (complex, metric)
    }

    /// Recognises the combinatorial type of a complex, up to relabelling.
    pub fn identify(complex: &SimplicialComplex) -> Option<Preset> {
        let tets = complex.tetrahedra();
        match (complex.num_vertices(), tets.len()) {
            (4, 2) => Some(Preset::DoubleTetrahedron),
            (5, 5) => {
                let distinct: BTreeSet<[VertexId; 4]> = tets
                    .iter()
                    .map(|t| {
                        let mut s = *t;
                        s.sort_unstable();
                        s
                    })
                    .collect();
                (distinct.len() == 5).then_some(Preset::Boundary4Simplex)
            }
            _ => None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn preset(name: &str) -> Result<(SimplicialComplex, MetricAssignment)> {
    Ok(name.parse::<Preset>()?.build())
}
