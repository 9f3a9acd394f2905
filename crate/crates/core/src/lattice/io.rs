//! Lattice JSON files:
//! `{"version":1, "points":[[x,y],...], "faces":[[i1,i2,i3,i4],...], "boundary":[i,...], "kind":"square|orthogonal|general"}`.
//! Coordinates are written with 17 significant digits so a round trip is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{LatticeData, LatticeKind, QuadLattice};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    version: u32,
    points: Vec<[f64; 2]>,
    faces: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    kind: String,
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_lattice(lattice: &QuadLattice) -> String {
    let mut s = String::from("{\"version\":1,\n\"points\":[\n");
    let n = lattice.points().len();
    for (i, p) in lattice.points().iter().enumerate() {
        let sep = if i + 1 < n { "," } else { "" };
        let _ = writeln!(s, "[{},{}]{sep}", fmt_f64(p.x), fmt_f64(p.y));
    }
    s.push_str("],\n\"faces\":[\n");
    let m = lattice.faces().len();
    for (i, f) in lattice.faces().iter().enumerate() {
        let v = f.vertices();
        let sep = if i + 1 < m { "," } else { "" };
        let _ = writeln!(s, "[{},{},{},{}]{sep}", v[0], v[1], v[2], v[3]);
    }
    s.push_str("],\n\"boundary\":[");
    let b: Vec<String> = lattice.boundary().iter().map(|v| v.to_string()).collect();
    s.push_str(&b.join(","));
    let _ = write!(s, "],\n\"kind\":\"{}\"}}\n", lattice.kind().as_str());
    s
}

pub fn read_lattice(text: &str) -> Result<QuadLattice> {
    let file: LatticeFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if file.version != 1 {
        return Err(Error::Parse {
            location: "version".into(),
            message: format!("unsupported version {}", file.version),
        });
    }
    let mut faces = Vec::with_capacity(file.faces.len());
    for (k, f) in file.faces.iter().enumerate() {
        let arr: [usize; 4] = f.as_slice().try_into().map_err(|_| Error::Parse {
            location: format!("faces[{k}]"),
            message: format!("face arity {} (expected 4)", f.len()),
        })?;
        faces.push(arr);
    }
    let kind: LatticeKind = file
        .kind
        .parse()
        .map_err(|_| Error::Parse { location: "kind".into(), message: format!("unknown kind `{}`", file.kind) })?;
    QuadLattice::from_data(LatticeData {
        points: file.points.iter().map(|&[x, y]| Point::new(x, y)).collect(),
        faces,
        boundary: file.boundary,
        kind: Some(kind),
    })
}

pub fn save(lattice: &QuadLattice, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_lattice(lattice))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<QuadLattice> {
    read_lattice(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_perturbed_lattice, build_square_lattice, Domain};

    #[test]
    fn round_trip_is_identity() {
        for l in [
            build_square_lattice(&Domain::Disk { cx: 0.1, cy: -0.3, r: 1.0 }, 0.1).unwrap(),
            build_perturbed_lattice(&Domain::unit_disk(), 0.2, 0.2, 3).unwrap(),
        ] {
            let back = read_lattice(&write_lattice(&l)).unwrap();
            assert_eq!(back, l);
            for (a, b) in back.points().iter().zip(l.points()) {
                assert_eq!(a.x.to_bits(), b.x.to_bits());
                assert_eq!(a.y.to_bits(), b.y.to_bits());
            }
        }
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.json");
        let l = build_square_lattice(&Domain::unit_disk(), 0.25).unwrap();
        save(&l, &path).unwrap();
        assert_eq!(load(&path).unwrap(), l);
    }

    #[test]
    fn repeated_vertex_is_a_validation_error() {
        let text = r#"{"version":1,"points":[[0,0],[1,0],[1,1],[0,1]],"faces":[[0,1,1,3]],"boundary":[0,1,2,3],"kind":"general"}"#;
        assert!(matches!(read_lattice(text), Err(Error::Validation(_))));
    }

    #[test]
    fn triangle_face_is_a_parse_error() {
        let text =
            r#"{"version":1,"points":[[0,0],[1,0],[1,1]],"faces":[[0,1,2]],"boundary":[0,1,2],"kind":"general"}"#;
        match read_lattice(text) {
            Err(Error::Parse { location, message }) => {
                assert_eq!(location, "faces[0]");
                assert!(message.contains("face arity"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "{\"version\":1,\n\"points\":[[0,0],\n[1,]]}";
        match read_lattice(text) {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("line 3")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
