use std::io::{self, Write};

use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use whasym::analysis::ComparisonRow;
use whasym::asymfact::{ConvergenceGate, StopReason};
use whasym::special2x2::ValidationReport;
use whasym::{CMat, Factorization, SampledMatrixFunction};

/// Pretty JSON with every float written to 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `d.dddddddddddddddde±x`; non-finite values as `NaN`/`inf`/`-inf`.
pub fn fmt_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        value.to_string()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    Ok(buf)
}

type Complex = [f64; 2];

fn matrix(m: &CMat) -> Vec<Vec<Complex>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(DeriveSerialize)]
struct Samples {
    /// Row-major `[re, im]` entries at each node.
    nodes: Vec<Vec<Vec<Complex>>>,
    at_infinity: Vec<Vec<Complex>>,
}

impl Samples {
    fn new(f: &SampledMatrixFunction) -> Self {
        Samples {
            nodes: f.values().iter().map(matrix).collect(),
            at_infinity: matrix(f.at_infinity()),
        }
    }
}

#[derive(DeriveSerialize)]
struct GridOut {
    #[serde(rename = "L")]
    scale: f64,
    #[serde(rename = "N")]
    nodes: usize,
}

#[derive(DeriveSerialize)]
struct FactorizeOut<'a> {
    phi: f64,
    grid: GridOut,
    order_requested: usize,
    order_computed: usize,
    stop: StopReason,
    validation: &'a ValidationReport,
    gate: &'a ConvergenceGate,
    term_norms: &'a [f64],
    rhs_norms: &'a [f64],
    jump_defects: &'a [f64],
    /// Indexed by order `0..=order_computed`.
    residual_sup: &'a [f64],
    full_residual_sup: f64,
    x: &'a [f64],
    g_minus: Samples,
    g_plus: Samples,
}

pub fn factorization_json(f: &Factorization) -> io::Result<Vec<u8>> {
    let out = FactorizeOut {
        phi: f.phi,
        grid: GridOut {
            scale: f.grid.scale(),
            nodes: f.grid.len(),
        },
        order_requested: f.series.requested_order,
        order_computed: f.series.order(),
        stop: f.series.stop,
        validation: &f.validation,
        gate: &f.gate,
        term_norms: &f.series.term_norms,
        rhs_norms: &f.series.rhs_norms,
        jump_defects: &f.series.jump_defects,
        residual_sup: &f.residual_norms,
        full_residual_sup: f.full_residual,
        x: f.grid.nodes(),
        g_minus: Samples::new(&f.g_minus),
        g_plus: Samples::new(&f.g_plus),
    };
    to_json(&out)
}

pub const CSV_HEADER: [&str; 8] = [
    "x",
    "phi",
    "dk11",
    "dk22",
    "dk12",
    "dk11_star",
    "dk22_star",
    "dk12_star",
];

pub fn rows_csv(rows: &[ComparisonRow]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let fields = [
            r.x,
            r.phi,
            r.dk11,
            r.dk22,
            r.dk12,
            r.dk11_star,
            r.dk22_star,
            r.dk12_star,
        ];
        w.write_record(fields.iter().map(|&v| fmt_f64(v)))?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_uses_the_fixed_format() {
        let text = String::from_utf8(to_json(&vec![[0.5, -0.25]]).unwrap()).unwrap();
        assert!(text.contains("5.0000000000000000e-1"));
        assert!(text.contains("-2.5000000000000000e-1"));
        let back: Vec<[f64; 2]> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![[0.5, -0.25]]);
    }

    #[test]
    fn csv_has_fixed_header() {
        let text = String::from_utf8(rows_csv(&[]).unwrap()).unwrap();
        assert_eq!(text, "x,phi,dk11,dk22,dk12,dk11_star,dk22_star,dk12_star\n");
    }
}
