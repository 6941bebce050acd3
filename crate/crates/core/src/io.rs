//! File formats: polynomial and measure JSON, canonical report JSON and CSV
//! exports.
//!
//! Every float is written with 17 significant digits (`%.17g`), object keys
//! are sorted and non-finite values become `null`, so identical inputs give
//! byte-identical files.

use crate::clark::{self, ClarkMeasure};
use crate::embedding::DensityReport;
use crate::error::{Error, Result};
use crate::levelset::{Branch, LineComponent};
use crate::poly::PolyMD;
use crate::rif::Rif;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// `%.17g` formatting.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..17).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            writer.write_all(g17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Canonical JSON text: sorted keys, `%.17g` floats, trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter);
    v.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn poly_from_json(text: &str) -> Result<PolyMD> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn poly_to_json(p: &PolyMD) -> Result<String> {
    to_canonical_json(p)
}

pub fn read_poly(path: &Path) -> Result<PolyMD> {
    poly_from_json(&read_text(path)?)
}

/// On-disk form of a Clark measure; carries the denominator so that `phi` can
/// be rebuilt from the file alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub alpha: C64,
    pub grid_n: usize,
    pub branches: Vec<Branch>,
    pub lines: Vec<LineComponent>,
    pub mass: f64,
    pub poly: PolyMD,
}

impl MeasureFile {
    pub fn new(mu: &ClarkMeasure, rif: &Rif) -> Self {
        Self {
            alpha: mu.alpha,
            grid_n: mu.grid_n,
            branches: mu.branches.clone(),
            lines: mu.lines.clone(),
            mass: clark::total_mass(mu),
            poly: rif.p().clone(),
        }
    }

    pub fn into_parts(self) -> Result<(ClarkMeasure, Rif)> {
        let rif = Rif::new(self.poly)?;
        let mu = ClarkMeasure::from_parts(self.alpha, self.branches, self.lines, self.grid_n)?;
        Ok((mu, rif))
    }
}

pub fn measure_to_json(mu: &ClarkMeasure, rif: &Rif) -> Result<String> {
    to_canonical_json(&MeasureFile::new(mu, rif))
}

pub fn measure_from_json(text: &str) -> Result<(ClarkMeasure, Rif)> {
    let f: MeasureFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    f.into_parts()
}

/// Branch samples as CSV: a comment line, a header and one row per node.
pub fn branches_csv(name: &str, alpha: C64, branches: &[Branch]) -> String {
    let n = branches.first().map_or(0, |b| b.theta.len());
    let mut s = format!("# phi={name} alpha={},{} N={n}\n", g17(alpha.re), g17(alpha.im));
    s.push_str("branch,theta,re,im,weight\n");
    for (j, b) in branches.iter().enumerate() {
        for ((t, g), w) in b.theta.iter().zip(&b.values).zip(&b.weights) {
            s.push_str(&format!("{j},{},{},{},{}\n", g17(*t), g17(g.re), g17(g.im), g17(*w)));
        }
    }
    s
}

pub fn density_csv(reports: &[DensityReport]) -> String {
    let mut s = String::from("degree,distance_conj_z1,distance_conj_z2,rank\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.degree,
            g17(r.distance_conj_z1),
            g17(r.distance_conj_z2),
            r.rank
        ));
    }
    s
}

pub fn level_surface_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("theta1,theta2,arg_psi\n");
    for (a, b, c) in rows {
        s.push_str(&format!("{},{},{}\n", g17(*a), g17(*b), g17(*c)));
    }
    s
}

/// `(theta, W*, 1 + 1/(1 - cos theta), relative error)` rows.
pub fn diagonal_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("theta,w_star,reference,rel_error\n");
    for (t, w, r) in rows {
        s.push_str(&format!("{},{},{},{}\n", g17(*t), g17(*w), g17(*r), g17((w - r).abs() / r)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use proptest::prelude::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (1.5e300, "1.5000000000000001e+300"),
            (0.0001, "0.0001"),
            (1.0 / 3.0, "0.33333333333333331"),
        ];
        for (x, s) in cases {
            assert_eq!(g17(x), s, "{x}");
        }
    }

    #[test]
    fn canonical_json_is_sorted_and_nulls_nonfinite() {
        #[derive(Serialize)]
        struct T {
            b: f64,
            a: f64,
        }
        let s = to_canonical_json(&T { b: f64::NAN, a: 0.5 }).unwrap();
        assert_eq!(s, "{\"a\":0.5,\"b\":null}\n");
    }

    #[test]
    fn measure_round_trip() {
        let rif = corpus::favard_squared();
        let mu = crate::clark::build_measure(&rif, C64::new(-1.0, 0.0), 256).unwrap();
        let text = measure_to_json(&mu, &rif).unwrap();
        let (back, rif2) = measure_from_json(&text).unwrap();
        assert_eq!(back, mu);
        assert_eq!(rif2.p(), rif.p());
        assert_eq!(measure_to_json(&back, &rif2).unwrap(), text);
    }

    #[test]
    fn poly_json_layout() {
        let p = corpus::favard().p().clone();
        let s = poly_to_json(&p).unwrap();
        assert_eq!(s, "{\"coeffs\":[[2,0],[-1,0],[-1,0],[0,0]],\"degrees\":[1,1]}\n");
        assert!(poly_from_json("{\"degrees\":[1,1],\"coeffs\":[[1,0]]}").is_err());
    }

    proptest! {
        #[test]
        fn g17_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn poly_json_round_trips_bit_exactly(re in prop::collection::vec(-1e3f64..1e3, 6),
                                             im in prop::collection::vec(-1e3f64..1e3, 6)) {
            let coeffs: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
            let p = PolyMD::padded(vec![1, 2], coeffs).unwrap();
            let back = poly_from_json(&poly_to_json(&p).unwrap()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
