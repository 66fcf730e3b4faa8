//! Legacy ASCII unstructured-grid files and locale-free number formatting.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::scalar::Scalar;

/// Real number with 17 significant digits, `.` as decimal separator.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        // keeps the sign bit out of the output
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

/// Named scalar array attached to points or cells.
#[derive(Clone, Debug, PartialEq)]
pub struct DataArray {
    pub name: String,
    pub values: Vec<f64>,
}

impl DataArray {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        DataArray {
            name: name.into(),
            values,
        }
    }
}

/// Contents of a triangle grid file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridFile {
    pub title: String,
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub cell_data: Vec<DataArray>,
    pub point_data: Vec<DataArray>,
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
        return Err(Error::validation(format!(
            "array name {name:?} must be nonempty without whitespace"
        )));
    }
    Ok(())
}

impl GridFile {
    pub fn from_mesh<T: Scalar>(mesh: &Mesh<T>, title: &str) -> Self {
        GridFile {
            title: title.to_string(),
            points: mesh
                .vertices()
                .iter()
                .map(|p| [p[0].to_f64_lossy(), p[1].to_f64_lossy()])
                .collect(),
            triangles: mesh.triangles().to_vec(),
            cell_data: Vec::new(),
            point_data: Vec::new(),
        }
    }

    pub fn add_cell_data(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        check_name(name)?;
        if values.len() != self.triangles.len() {
            return Err(Error::validation(format!("cell array {name} has the wrong length")));
        }
        self.cell_data.push(DataArray::new(name, values));
        Ok(())
    }

    pub fn add_point_data(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        check_name(name)?;
        if values.len() != self.points.len() {
            return Err(Error::validation(format!("point array {name} has the wrong length")));
        }
        self.point_data.push(DataArray::new(name, values));
        Ok(())
    }

    /// Legacy VTK ASCII text.
    pub fn to_vtk(&self) -> String {
        let mut s = String::new();
        let title = self.title.replace('\n', " ");
        let _ = writeln!(s, "# vtk DataFile Version 3.0");
        let _ = writeln!(s, "{}", if title.is_empty() { "grid" } else { &title });
        let _ = writeln!(s, "ASCII");
        let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
        let _ = writeln!(s, "POINTS {} double", self.points.len());
        for p in &self.points {
            let _ = writeln!(s, "{} {} 0", format_real(p[0]), format_real(p[1]));
        }
        let n = self.triangles.len();
        let _ = writeln!(s, "CELLS {} {}", n, 4 * n);
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {n}");
        for _ in 0..n {
            let _ = writeln!(s, "5");
        }
        let section = |s: &mut String, label: &str, count: usize, arrays: &[DataArray]| {
            if arrays.is_empty() {
                return;
            }
            let _ = writeln!(s, "{label} {count}");
            for a in arrays {
                let _ = writeln!(s, "SCALARS {} double 1", a.name);
                let _ = writeln!(s, "LOOKUP_TABLE default");
                for v in &a.values {
                    let _ = writeln!(s, "{}", format_real(*v));
                }
            }
        };
        section(&mut s, "CELL_DATA", n, &self.cell_data);
        section(&mut s, "POINT_DATA", self.points.len(), &self.point_data);
        s
    }

    /// Parses the subset of the legacy format written by [`GridFile::to_vtk`].
    pub fn parse_vtk(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::validation(format!("grid file: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if !header.starts_with("# vtk DataFile") {
            return Err(bad("missing header"));
        }
        let title = lines.next().ok_or_else(|| bad("missing title"))?.to_string();
        let mut tokens = lines.flat_map(|l| l.split_whitespace());
        let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
        let expect = |got: &str, want: &str| {
            if got == want {
                Ok(())
            } else {
                Err(bad(&format!("expected {want}, found {got}")))
            }
        };
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("bad number {t}")));
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad(&format!("bad integer {t}")));

        expect(next()?, "ASCII")?;
        expect(next()?, "DATASET")?;
        expect(next()?, "UNSTRUCTURED_GRID")?;
        expect(next()?, "POINTS")?;
        let np = int(next()?)?;
        next()?;
        let mut points = Vec::with_capacity(np);
        for _ in 0..np {
            let x = num(next()?)?;
            let y = num(next()?)?;
            num(next()?)?;
            points.push([x, y]);
        }
        expect(next()?, "CELLS")?;
        let nc = int(next()?)?;
        int(next()?)?;
        let mut triangles = Vec::with_capacity(nc);
        for _ in 0..nc {
            expect(next()?, "3")?;
            let t = [int(next()?)?, int(next()?)?, int(next()?)?];
            if t.iter().any(|v| *v >= np) {
                return Err(bad("cell refers to a missing point"));
            }
            triangles.push(t);
        }
        expect(next()?, "CELL_TYPES")?;
        if int(next()?)? != nc {
            return Err(bad("cell type count differs from cell count"));
        }
        for _ in 0..nc {
            expect(next()?, "5")?;
        }
        let mut grid = GridFile {
            title,
            points,
            triangles,
            cell_data: Vec::new(),
            point_data: Vec::new(),
        };
        let mut target: Option<bool> = None;
        while let Ok(tok) = next() {
            match tok {
                "CELL_DATA" => {
                    int(next()?)?;
                    target = Some(true);
                }
                "POINT_DATA" => {
                    int(next()?)?;
                    target = Some(false);
                }
                "SCALARS" => {
                    let cells = target.ok_or_else(|| bad("array outside a data section"))?;
                    let name = next()?.to_string();
                    next()?;
                    let comps = next()?;
                    expect(comps, "1")?;
                    expect(next()?, "LOOKUP_TABLE")?;
                    next()?;
                    let count = if cells { nc } else { np };
                    let values = (0..count)
                        .map(|_| next().and_then(num))
                        .collect::<Result<Vec<f64>>>()?;
                    let arr = DataArray::new(name, values);
                    if cells {
                        grid.cell_data.push(arr);
                    } else {
                        grid.point_data.push(arr);
                    }
                }
                other => return Err(bad(&format!("unexpected token {other}"))),
            }
        }
        Ok(grid)
    }

    pub fn cell_array(&self, name: &str) -> Option<&DataArray> {
        self.cell_data.iter().find(|a| a.name == name)
    }

    pub fn point_array(&self, name: &str) -> Option<&DataArray> {
        self.point_data.iter().find(|a| a.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFile {
        let mut g = GridFile {
            title: "unit".into(),
            points: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            triangles: vec![[0, 1, 2], [1, 3, 2]],
            ..Default::default()
        };
        g.add_cell_data("chi", vec![1.0, 0.0]).unwrap();
        g.add_point_data("u1", vec![0.1, 1.0 / 3.0, -2.5e-7, 1e300]).unwrap();
        g.add_point_data("u2", vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        g
    }

    #[test]
    fn roundtrip_is_exact() {
        let g = sample();
        let back = GridFile::parse_vtk(&g.to_vtk()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-0.0), "0.0000000000000000e0");
        for v in [std::f64::consts::PI, 1e-300, 123456.789] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn rejects_bad_arrays_and_files() {
        let mut g = sample();
        assert!(g.add_cell_data("bad name", vec![0.0, 0.0]).is_err());
        assert!(g.add_point_data("short", vec![0.0]).is_err());
        assert!(GridFile::parse_vtk("hello").is_err());
        let text = g.to_vtk().replace("CELL_TYPES 2", "CELL_TYPES 3");
        assert!(GridFile::parse_vtk(&text).is_err());
    }
}
