//! ASCII OBJ and PLY export of sampled patches.
//!
//! Vertices are written row-major, invalid samples are skipped, and each grid
//! quad whose four corners are valid becomes two triangles. For H³ patches the
//! vertex position is `(X₁, X₂, X₃)`; `X₀` goes to a comment line (OBJ) or an
//! extra property (PLY).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use solsurf::immersion::SurfacePatch;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
        {
            Some(e) if e == "obj" => Ok(MeshFormat::Obj),
            Some(e) if e == "ply" => Ok(MeshFormat::Ply),
            _ => Err(CliError::Usage(format!(
                "--out must end in .obj or .ply, got `{}`",
                path.display()
            ))),
        }
    }
}

/// Vertices (`[x₀, x₁, x₂, x₃]`) and 0-based triangles of a patch.
pub struct Mesh {
    pub vertices: Vec<[f64; 4]>,
    pub triangles: Vec<[usize; 3]>,
    pub hyperbolic: bool,
}

impl Mesh {
    pub fn from_patch(patch: &SurfacePatch) -> Self {
        let (rows, cols) = (patch.rows(), patch.cols());
        let mut index = vec![None; rows * cols];
        let mut vertices = Vec::new();
        for row in 0..rows {
            for col in 0..cols {
                if let Some(p) = patch.point(row, col) {
                    index[row * cols + col] = Some(vertices.len());
                    vertices.push(p.0);
                }
            }
        }
        let mut triangles = Vec::new();
        for row in 0..rows.saturating_sub(1) {
            for col in 0..cols.saturating_sub(1) {
                let corner = |r: usize, c: usize| index[r * cols + c];
                if let (Some(a), Some(b), Some(c), Some(d)) = (
                    corner(row, col),
                    corner(row, col + 1),
                    corner(row + 1, col + 1),
                    corner(row + 1, col),
                ) {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
            }
        }
        Self {
            vertices,
            triangles,
            hyperbolic: patch.target.is_hyperbolic(),
        }
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# solsurf mesh: {} vertices, {} triangles",
            self.vertices.len(),
            self.triangles.len()
        );
        for v in &self.vertices {
            if self.hyperbolic {
                let _ = writeln!(s, "# x0 {}", v[0]);
            }
            let _ = writeln!(s, "v {} {} {}", v[1], v[2], v[3]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    pub fn to_ply(&self) -> String {
        let mut s = String::new();
        s.push_str("ply\nformat ascii 1.0\ncomment solsurf mesh\n");
        let _ = writeln!(s, "element vertex {}", self.vertices.len());
        s.push_str("property double x\nproperty double y\nproperty double z\n");
        if self.hyperbolic {
            s.push_str("property double x0\n");
        }
        let _ = writeln!(s, "element face {}", self.triangles.len());
        s.push_str("property list uchar int vertex_indices\nend_header\n");
        for v in &self.vertices {
            if self.hyperbolic {
                let _ = writeln!(s, "{} {} {} {}", v[1], v[2], v[3], v[0]);
            } else {
                let _ = writeln!(s, "{} {} {}", v[1], v[2], v[3]);
            }
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

pub fn write_mesh(patch: &SurfacePatch, path: &Path) -> Result<(), CliError> {
    let format = MeshFormat::from_path(path)?;
    let mesh = Mesh::from_patch(patch);
    let text = match format {
        MeshFormat::Obj => mesh.to_obj(),
        MeshFormat::Ply => mesh.to_ply(),
    };
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use solsurf::immersion::{sample_surface, Domain, SampleTarget};
    use solsurf::WeierstrassData;

    #[test]
    fn obj_layout() {
        let d = WeierstrassData::parse("1", "z").unwrap();
        let dom = Domain::square(C64::new(0.0, 0.0), 0.5, 3).unwrap();
        let p = sample_surface(&d, &dom, SampleTarget::E3Direct).unwrap();
        let m = Mesh::from_patch(&p);
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.triangles.len(), 8);
        let obj = m.to_obj();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 9);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 8);
        assert!(obj.lines().any(|l| l == "f 1 2 5"));
        assert!(!obj.contains("# x0"));
    }

    #[test]
    fn h3_ply_carries_x0() {
        let d = WeierstrassData::parse("1", "z").unwrap().with_lambda(0.5);
        let dom = Domain::square(C64::new(0.0, 0.0), 0.5, 3).unwrap();
        let p = sample_surface(&d, &dom, SampleTarget::H3).unwrap();
        let m = Mesh::from_patch(&p);
        let ply = m.to_ply();
        assert!(ply.contains("property double x0"));
        let body: Vec<&str> = ply.split("end_header\n").nth(1).unwrap().lines().collect();
        assert_eq!(body[0].split(' ').count(), 4);
        assert!(m.to_obj().lines().filter(|l| l.starts_with("# x0")).count() == 9);
    }

    #[test]
    fn extension_selects_format() {
        assert_eq!(
            MeshFormat::from_path(Path::new("a.OBJ")).unwrap(),
            MeshFormat::Obj
        );
        assert_eq!(
            MeshFormat::from_path(Path::new("a.ply")).unwrap(),
            MeshFormat::Ply
        );
        assert!(MeshFormat::from_path(Path::new("a.stl")).is_err());
    }
}
