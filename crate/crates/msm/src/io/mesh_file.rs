//! Mesh text format, one section per entity:
//!
//! ```text
//! vertices <n>
//! <index> <x> <y>
//! triangles <m>
//! <index> <v0> <v1> <v2>
//! boundary <k>
//! <index> <v0> <v1> <outer|inner|none>
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Coordinates are
//! written in shortest round-trip form, so export followed by import gives
//! back the same mesh bit for bit.

use std::io::{BufRead, Write};

use msm_core::{BoundaryEdge, BoundaryTag, Mesh};

use super::{parse_error, FormatError};

pub fn write_mesh(mesh: &Mesh, mut out: impl Write) -> Result<(), FormatError> {
    writeln!(out, "# msm mesh")?;
    writeln!(out, "vertices {}", mesh.n_vertices())?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        writeln!(out, "{i} {:?} {:?}", v[0], v[1])?;
    }
    writeln!(out, "triangles {}", mesh.n_triangles())?;
    for (i, t) in mesh.triangles().iter().enumerate() {
        writeln!(out, "{i} {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "boundary {}", mesh.boundary_edges().len())?;
    for (i, e) in mesh.boundary_edges().iter().enumerate() {
        writeln!(out, "{i} {} {} {}", e.vertices[0], e.vertices[1], e.tag.as_str())?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_content(&mut self) -> Result<Option<(usize, String)>, FormatError> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some((self.number, trimmed.to_string())));
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String), FormatError> {
        self.next_content()?.ok_or_else(|| parse_error(self.number, format!("unexpected end of file, expected {what}")))
    }

    fn header(&mut self, keyword: &str) -> Result<usize, FormatError> {
        let (n, line) = self.expect(keyword)?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(parse_error(n, format!("expected `{keyword} <count>`")));
        }
        let count = parts.next().and_then(|c| c.parse().ok()).ok_or_else(|| parse_error(n, "bad count"))?;
        Ok(count)
    }

    fn record(&mut self, index: usize, fields: usize, what: &str) -> Result<(usize, Vec<String>), FormatError> {
        let (n, line) = self.expect(what)?;
        let parts: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if parts.len() != fields + 1 {
            return Err(parse_error(n, format!("expected {} fields, found {}", fields + 1, parts.len())));
        }
        if parts[0].parse::<usize>().ok() != Some(index) {
            return Err(parse_error(n, format!("expected {what} index {index}")));
        }
        Ok((n, parts[1..].to_vec()))
    }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, FormatError> {
    s.parse().map_err(|_| parse_error(line, format!("cannot parse `{s}`")))
}

pub fn read_mesh(input: impl BufRead) -> Result<Mesh, FormatError> {
    let mut lines = Lines { inner: input.lines(), number: 0 };
    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (n, f) = lines.record(i, 2, "vertex")?;
        vertices.push([num(n, &f[0])?, num(n, &f[1])?]);
    }
    let nt = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for i in 0..nt {
        let (n, f) = lines.record(i, 3, "triangle")?;
        triangles.push([num(n, &f[0])?, num(n, &f[1])?, num(n, &f[2])?]);
    }
    let nb = lines.header("boundary")?;
    let mut boundary = Vec::with_capacity(nb);
    for i in 0..nb {
        let (n, f) = lines.record(i, 3, "boundary edge")?;
        let tag = BoundaryTag::parse(&f[2]).ok_or_else(|| parse_error(n, format!("unknown tag `{}`", f[2])))?;
        boundary.push(BoundaryEdge { vertices: [num(n, &f[0])?, num(n, &f[1])?], tag });
    }
    if let Some((n, _)) = lines.next_content()? {
        return Err(parse_error(n, "trailing content after boundary section"));
    }
    Ok(Mesh::new(vertices, triangles, boundary)?)
}
