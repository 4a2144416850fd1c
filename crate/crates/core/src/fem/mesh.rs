//! Mesh construction on the interval, unit square and L-shape, plus a
//! line-oriented text format for debugging.
//!
//! Boundary flags are derived from topology: a vertex is a boundary vertex
//! iff it lies on an edge (or is an endpoint, in 1d) that belongs to exactly
//! one element.

use std::collections::BTreeMap;

use super::FemError;

/// Element connectivity; one variant per supported dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cells {
    Segments(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Segments(s) => s.len(),
            Cells::Triangles(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    cells: Cells,
    boundary: Vec<bool>,
    h: f64,
}

impl Mesh {
    /// Assembles a mesh from raw vertices and connectivity; boundary flags
    /// and the mesh size are recomputed from topology and geometry.
    pub fn from_parts(vertices: Vec<[f64; 2]>, cells: Cells) -> Result<Self, FemError> {
        let boundary = compute_boundary(&vertices, &cells)?;
        let h = mesh_size(&vertices, &cells)?;
        Ok(Self {
            vertices,
            cells,
            boundary,
            h,
        })
    }

    pub fn dimension(&self) -> usize {
        match self.cells {
            Cells::Segments(_) => 1,
            Cells::Triangles(_) => 2,
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn interior_vertex_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| !b).count()
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Serializes to the line-oriented text format (see crate README).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("fracrb-mesh 1\n");
        out.push_str(&format!("dim {}\n", self.dimension()));
        out.push_str(&format!("vertices {}\n", self.vertices.len()));
        for v in &self.vertices {
            out.push_str(&format!("{:e} {:e}\n", v[0], v[1]));
        }
        match &self.cells {
            Cells::Segments(segs) => {
                out.push_str(&format!("cells segment {}\n", segs.len()));
                for s in segs {
                    out.push_str(&format!("{} {}\n", s[0], s[1]));
                }
            }
            Cells::Triangles(tris) => {
                out.push_str(&format!("cells triangle {}\n", tris.len()));
                for t in tris {
                    out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
                }
            }
        }
        let flagged: Vec<String> = (0..self.vertices.len())
            .filter(|&i| self.boundary[i])
            .map(|i| i.to_string())
            .collect();
        out.push_str(&format!("boundary {}\n", flagged.len()));
        out.push_str(&flagged.join(" "));
        out.push('\n');
        out
    }

    /// Parses the text format; boundary flags are recomputed from topology
    /// and must agree with the file.
    pub fn from_text(text: &str) -> Result<Self, FemError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| FemError::Format(format!("unexpected end of input, expected {what}")))
        };
        let header = next("header")?;
        if header.trim() != "fracrb-mesh 1" {
            return Err(FemError::Format(format!("bad header {header:?}")));
        }
        let dim_line = next("dim")?;
        let dim: usize = parse_field(dim_line, "dim")?;
        let nv: usize = parse_field(next("vertices")?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next("vertex")?;
            let mut it = line.split_whitespace();
            let x = parse_num(it.next(), "vertex x")?;
            let y = parse_num(it.next(), "vertex y")?;
            vertices.push([x, y]);
        }
        let cells_line = next("cells")?;
        let mut it = cells_line.split_whitespace();
        if it.next() != Some("cells") {
            return Err(FemError::Format(format!("expected cells line, got {cells_line:?}")));
        }
        let kind = it
            .next()
            .ok_or_else(|| FemError::Format("missing cell kind".into()))?;
        let nc: usize = parse_num(it.next(), "cell count")? as usize;
        let cells = match (kind, dim) {
            ("segment", 1) => {
                let mut segs = Vec::with_capacity(nc);
                for _ in 0..nc {
                    let line = next("segment")?;
                    let mut it = line.split_whitespace();
                    let a = parse_num(it.next(), "segment index")? as usize;
                    let b = parse_num(it.next(), "segment index")? as usize;
                    if a >= nv || b >= nv {
                        return Err(FemError::Format(format!("segment index out of range: {line}")));
                    }
                    segs.push([a, b]);
                }
                Cells::Segments(segs)
            }
            ("triangle", 2) => {
                let mut tris = Vec::with_capacity(nc);
                for _ in 0..nc {
                    let line = next("triangle")?;
                    let mut it = line.split_whitespace();
                    let mut t = [0usize; 3];
                    for slot in &mut t {
                        let v = parse_num(it.next(), "triangle index")? as usize;
                        if v >= nv {
                            return Err(FemError::Format(format!(
                                "triangle index out of range: {line}"
                            )));
                        }
                        *slot = v;
                    }
                    tris.push(t);
                }
                Cells::Triangles(tris)
            }
            _ => {
                return Err(FemError::Format(format!(
                    "cell kind {kind:?} does not match dim {dim}"
                )))
            }
        };
        let nb: usize = parse_field(next("boundary")?, "boundary")?;
        let mut flagged = Vec::new();
        if nb > 0 {
            let line = next("boundary indices")?;
            for tok in line.split_whitespace() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| FemError::Format(format!("bad boundary index {tok:?}")))?;
                flagged.push(v);
            }
        }
        if flagged.len() != nb {
            return Err(FemError::Format(format!(
                "boundary count {nb} does not match {} listed indices",
                flagged.len()
            )));
        }
        let mesh = Mesh::from_parts(vertices, cells)?;
        let recomputed: Vec<usize> = (0..mesh.vertex_count())
            .filter(|&i| mesh.boundary[i])
            .collect();
        if recomputed != flagged {
            return Err(FemError::Format(
                "boundary flags in file do not match mesh topology".into(),
            ));
        }
        Ok(mesh)
    }
}

fn parse_field<T: std::str::FromStr>(line: &str, name: &str) -> Result<T, FemError> {
    let mut it = line.split_whitespace();
    let key = it.next();
    if key != Some(name) {
        return Err(FemError::Format(format!("expected {name} line, got {line:?}")));
    }
    it.next()
        .ok_or_else(|| FemError::Format(format!("missing {name} value")))?
        .parse()
        .map_err(|_| FemError::Format(format!("bad {name} value in {line:?}")))
}

fn parse_num(tok: Option<&str>, what: &str) -> Result<f64, FemError> {
    tok.ok_or_else(|| FemError::Format(format!("missing {what}")))?
        .parse()
        .map_err(|_| FemError::Format(format!("bad {what}")))
}

fn segment_length(vertices: &[[f64; 2]], s: &[usize; 2]) -> f64 {
    let dx = vertices[s[1]][0] - vertices[s[0]][0];
    let dy = vertices[s[1]][1] - vertices[s[0]][1];
    (dx * dx + dy * dy).sqrt()
}

/// Twice the signed area of a triangle.
pub(crate) fn triangle_det(vertices: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

fn mesh_size(vertices: &[[f64; 2]], cells: &Cells) -> Result<f64, FemError> {
    let mut h = 0.0f64;
    match cells {
        Cells::Segments(segs) => {
            for (i, s) in segs.iter().enumerate() {
                let len = segment_length(vertices, s);
                if len <= 0.0 || !len.is_finite() {
                    return Err(FemError::DegenerateElement(i, len));
                }
                h = h.max(len);
            }
        }
        Cells::Triangles(tris) => {
            for (i, t) in tris.iter().enumerate() {
                let det = triangle_det(vertices, t);
                if det.abs() <= 0.0 || !det.is_finite() {
                    return Err(FemError::DegenerateElement(i, det.abs() * 0.5));
                }
                for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    h = h.max(segment_length(vertices, &[a, b]));
                }
            }
        }
    }
    Ok(h)
}

fn compute_boundary(vertices: &[[f64; 2]], cells: &Cells) -> Result<Vec<bool>, FemError> {
    let mut boundary = vec![false; vertices.len()];
    match cells {
        Cells::Segments(segs) => {
            let mut incidence = vec![0usize; vertices.len()];
            for s in segs {
                incidence[s[0]] += 1;
                incidence[s[1]] += 1;
            }
            for (v, &count) in incidence.iter().enumerate() {
                if count == 1 {
                    boundary[v] = true;
                }
            }
        }
        Cells::Triangles(tris) => {
            let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for t in tris {
                for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    let key = (a.min(b), a.max(b));
                    *edge_count.entry(key).or_insert(0) += 1;
                }
            }
            for (&(a, b), &count) in &edge_count {
                if count == 1 {
                    boundary[a] = true;
                    boundary[b] = true;
                }
            }
        }
    }
    Ok(boundary)
}

/// Uniform mesh of the unit interval `(0, 1)` with `n` segments, `h = 1/n`.
pub fn unit_interval_mesh(n: usize) -> Result<Mesh, FemError> {
    if n < 2 {
        return Err(FemError::ResolutionTooSmall(n));
    }
    let vertices: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64 / n as f64, 0.0]).collect();
    let segments: Vec<[usize; 2]> = (0..n).map(|i| [i, i + 1]).collect();
    Mesh::from_parts(vertices, Cells::Segments(segments))
}

fn grid_triangles(n: usize, keep: impl Fn(f64, f64) -> bool) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let step = 1.0 / n as f64;
    let full_vertices: Vec<[f64; 2]> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [i as f64 * step, j as f64 * step]))
        .collect();
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            for t in [[v00, v10, v11], [v00, v11, v01]] {
                let cx = (full_vertices[t[0]][0] + full_vertices[t[1]][0] + full_vertices[t[2]][0]) / 3.0;
                let cy = (full_vertices[t[0]][1] + full_vertices[t[1]][1] + full_vertices[t[2]][1]) / 3.0;
                if keep(cx, cy) {
                    tris.push(t);
                }
            }
        }
    }
    // Drop unreferenced vertices, preserving order.
    let mut used = vec![false; full_vertices.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; full_vertices.len()];
    let mut vertices = Vec::new();
    for (v, &u) in used.iter().enumerate() {
        if u {
            remap[v] = vertices.len();
            vertices.push(full_vertices[v]);
        }
    }
    let tris = tris
        .into_iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();
    (vertices, tris)
}

/// Structured right-triangle mesh of the unit square with `n` divisions per
/// side; `h = sqrt(2)/n`.
pub fn unit_square_mesh(n: usize) -> Result<Mesh, FemError> {
    if n < 2 {
        return Err(FemError::ResolutionTooSmall(n));
    }
    let (vertices, tris) = grid_triangles(n, |_, _| true);
    Mesh::from_parts(vertices, Cells::Triangles(tris))
}

/// Structured triangulation of the L-shape `(0,1)^2 \ [0,0.5] x [0.5,1]` with
/// `n` divisions per unit. `n` must be even so the re-entrant corner
/// `(0.5, 0.5)` is a mesh vertex.
pub fn lshape_mesh(n: usize) -> Result<Mesh, FemError> {
    if n < 2 {
        return Err(FemError::ResolutionTooSmall(n));
    }
    if n % 2 != 0 {
        return Err(FemError::OddLshapeResolution(n));
    }
    let (vertices, tris) = grid_triangles(n, |cx, cy| !(cx < 0.5 && cy > 0.5));
    Mesh::from_parts(vertices, Cells::Triangles(tris))
}
