//! JSON, CSV and SVG interchange.
//!
//! Matrices use `{"n": 2, "data": [[re, im], ...]}` in row-major order.
//! Every float written by [`to_json`] has exactly 17 significant digits so
//! identical runs give byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::confmap::Domain;
use crate::error::{Error, Result};
use crate::matcore::CMatrix;
use crate::numrange::RangeBoundary;

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let data: Vec<[f64; 2]> = self.as_slice().iter().map(|z| [z.re, z.im]).collect();
        let mut st = s.serialize_struct("CMatrix", 2)?;
        st.serialize_field("n", &self.dim())?;
        st.serialize_field("data", &data)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            n: usize,
            data: Vec<[f64; 2]>,
        }
        let r = Repr::deserialize(d)?;
        if r.n == 0 || r.data.len() != r.n * r.n {
            return Err(D::Error::custom(format!(
                "matrix data has {} entries, expected n² = {}",
                r.data.len(),
                r.n * r.n
            )));
        }
        CMatrix::from_vec(r.n, r.data.into_iter().map(|[a, b]| Complex64::new(a, b)).collect()).map_err(D::Error::custom)
    }
}

/// A rectangular complex matrix in the same layout plus a column count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseRect {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    matrix_from_json(&text)
}

/// Pretty JSON with 17 significant digits per float and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Default)]
struct Fixed17 {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::env::current_dir()?,
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

/// Accepts `1`, `-0.5`, `2i`, `-i`, `1+2i`, `1.5e-3-0.25i` (spaces ignored).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot read '{text}' as a complex number"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that does not follow an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// CSV with header `theta,re,im,support_value`.
pub fn boundary_csv(b: &RangeBoundary) -> String {
    let mut out = String::from("theta,re,im,support_value\n");
    for ((th, z), h) in b.angles.iter().zip(&b.points).zip(&b.support_values) {
        let _ = writeln!(out, "{th:.16e},{:.16e},{:.16e},{h:.16e}", z.re, z.im);
    }
    out
}

/// Static SVG of the range boundary with an optional domain outline.
pub fn boundary_svg(b: &RangeBoundary, domain: Option<&Domain>) -> String {
    const SIZE: f64 = 800.0;
    let outline: Vec<Complex64> = domain
        .map(|d| (0..400).map(|k| d.boundary_point(std::f64::consts::TAU * k as f64 / 400.0)).collect())
        .unwrap_or_default();
    let extent = b
        .points
        .iter()
        .chain(&outline)
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(1e-12, f64::max)
        * 1.1;
    let px = |z: &Complex64| (SIZE / 2.0 * (1.0 + z.re / extent), SIZE / 2.0 * (1.0 - z.im / extent));
    let poly = |pts: &[Complex64]| {
        pts.iter()
            .map(|z| {
                let (x, y) = px(z);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SIZE} {SIZE}\" width=\"{SIZE}\" height=\"{SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"0\" y1=\"400\" x2=\"800\" y2=\"400\" stroke=\"#cccccc\"/>\n\
         <line x1=\"400\" y1=\"0\" x2=\"400\" y2=\"800\" stroke=\"#cccccc\"/>\n"
    );
    if !outline.is_empty() {
        let _ = writeln!(svg, "<polygon points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>", poly(&outline));
    }
    let _ = writeln!(svg, "<polygon points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>", poly(&b.points));
    svg.push_str("</svg>\n");
    svg
}

/// Short label used in reports, for example `ellipse:a=2,b=1@0+0i`.
pub fn domain_label(d: &Domain) -> String {
    format!("{}@{}{:+}i", d.shape, d.base.re, d.base.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_json_round_trip() {
        let t = CMatrix::from_rows(&[vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)], vec![Complex64::new(0.0, 0.0), Complex64::new(-3.0, 0.25)]]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":2,"data":[[1.0,-2.0],[0.5,0.0],[0.0,0.0],[-3.0,0.25]]}"#);
        assert_eq!(matrix_from_json(&s).unwrap(), t);
        let pretty = to_json(&t).unwrap();
        assert_eq!(matrix_from_json(&pretty).unwrap(), t);
    }

    #[test]
    fn malformed_matrices_rejected() {
        for bad in [r#"{"n":2,"data":[[1,0]]}"#, r#"{"n":0,"data":[]}"#, r#"{"n":1}"#, r#"[1,2]"#, r#"{"n":1,"data":[[1,0]],"x":1}"#] {
            assert!(matrix_from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(&vec![0.1f64, 2.0, -1e-300]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("2.0000000000000000e0"));
        assert!(s.contains("-1.0000000000000000e-300"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 2.0, -1e-300]);
    }

    #[test]
    fn complex_parsing() {
        let c = |a, b| Complex64::new(a, b);
        for (s, z) in [
            ("0", c(0.0, 0.0)),
            ("0+0i", c(0.0, 0.0)),
            ("1.5", c(1.5, 0.0)),
            ("-2i", c(0.0, -2.0)),
            ("i", c(0.0, 1.0)),
            ("-i", c(0.0, -1.0)),
            ("1-i", c(1.0, -1.0)),
            ("1e-3+2.5e2i", c(1e-3, 250.0)),
            (" 0.3 + 0.4i ", c(0.3, 0.4)),
            ("-1e+2-1e-2i", c(-100.0, -0.01)),
        ] {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        for s in ["", "abc", "1+", "1+2k", "ii"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("wpair-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        let leftovers = std::fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
