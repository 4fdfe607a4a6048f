//! File formats: SF2D fields, CV1 coefficient volumes, CSV tables and PGM maps.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Dtype, GridMeta, SampledField2D};
use crate::xform::CoeffVolume;

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod ext_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("expected a number or inf, got '{other}'"))),
            },
        }
    }
}

fn fmt_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {msg}", path.display()))
}

pub fn write_sf2d_to(w: &mut impl Write, f: &SampledField2D) -> Result<()> {
    let m = f.meta;
    writeln!(w, "SF2D {} {} {} {} {} {}", m.n1, m.n2, m.spacing, m.origin[0], m.origin[1], f.dtype.as_str())?;
    let mut buf = Vec::with_capacity(f.values.len() * 16);
    for v in &f.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        if f.dtype == Dtype::C128 {
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_sf2d(path: &Path, f: &SampledField2D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sf2d_to(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn read_sf2d(path: &Path) -> Result<SampledField2D> {
    let mut r = BufReader::new(File::open(path)?);
    read_sf2d_from(&mut r).map_err(|e| match e {
        Error::Format(msg) => fmt_err(path, msg),
        other => other,
    })
}

pub fn read_sf2d_from(r: &mut impl BufRead) -> Result<SampledField2D> {
    let mut header = Vec::new();
    r.take(4096).read_until(b'\n', &mut header)?;
    if header.last() != Some(&b'\n') {
        return Err(Error::Format("missing SF2D header line".into()));
    }
    let header = std::str::from_utf8(&header).map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 7 || parts[0] != "SF2D" {
        return Err(Error::Format(format!("bad SF2D header '{}'", header.trim_end())));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}' in header")));
    let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad size '{s}' in header")));
    let meta = GridMeta::new(int(parts[1])?, int(parts[2])?, num(parts[3])?, [num(parts[4])?, num(parts[5])?])
        .map_err(|e| Error::Format(e.to_string()))?;
    let dtype = match parts[6] {
        "f64" => Dtype::F64,
        "c128" => Dtype::C128,
        other => return Err(Error::Format(format!("unknown dtype '{other}'"))),
    };
    let per = if dtype == Dtype::F64 { 8 } else { 16 };
    let mut payload = vec![0u8; meta.len() * per];
    r.read_exact(&mut payload).map_err(|_| Error::Format("payload shorter than header declares".into()))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let rd = |i: usize| f64::from_le_bytes(payload[i..i + 8].try_into().expect("8 bytes"));
    let values = (0..meta.len())
        .map(|k| match dtype {
            Dtype::F64 => Complex64::new(rd(k * 8), 0.0),
            Dtype::C128 => Complex64::new(rd(k * 16), rd(k * 16 + 8)),
        })
        .collect();
    SampledField2D::new(meta, values, dtype).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct Cv1Header {
    format: String,
    label: String,
    a_grid: Vec<f64>,
    s_grid: Vec<f64>,
    t_stride: usize,
    field_meta: GridMeta,
    chart: String,
}

/// CV1: one JSON header line, then c128 little-endian coefficients in (scale, shear, t) order.
pub fn write_cv1(path: &Path, vol: &CoeffVolume) -> Result<()> {
    let header = Cv1Header {
        format: "CV1".into(),
        label: vol.label.clone(),
        a_grid: vol.a_grid.clone(),
        s_grid: vol.s_grid.clone(),
        t_stride: vol.t_stride,
        field_meta: vol.field_meta,
        chart: vol.chart.as_str().into(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(vol.coeffs.len() * 16);
    for v in &vol.coeffs {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_cv1(path: &Path) -> Result<CoeffVolume> {
    let mut r = BufReader::new(File::open(path)?);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    let header: Cv1Header = serde_json::from_slice(&line).map_err(|e| fmt_err(path, e))?;
    if header.format != "CV1" {
        return Err(fmt_err(path, "not a CV1 file"));
    }
    let chart = crate::xform::Chart::parse(&header.chart).ok_or_else(|| fmt_err(path, "unknown chart"))?;
    let (t1, t2) = crate::xform::strided_dims(&header.field_meta, header.t_stride);
    let n = header.a_grid.len() * header.s_grid.len() * t1 * t2;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != n * 16 {
        return Err(fmt_err(path, format!("payload has {} bytes, expected {}", payload.len(), n * 16)));
    }
    let rd = |i: usize| f64::from_le_bytes(payload[i..i + 8].try_into().expect("8 bytes"));
    let coeffs = (0..n).map(|k| Complex64::new(rd(16 * k), rd(16 * k + 8))).collect();
    Ok(CoeffVolume {
        label: header.label,
        coeffs,
        a_grid: header.a_grid,
        s_grid: header.s_grid,
        t_stride: header.t_stride,
        field_meta: header.field_meta,
        chart,
        warnings: Vec::new(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path)?);
    serde_json::from_reader(r).map_err(|e| fmt_err(path, e))
}

/// Writes rows of already formatted cells under a header line.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Binary greyscale image; `values` is row-major `height × width`, scaled linearly between `lo` and `hi`.
pub fn write_pgm(path: &Path, width: usize, height: usize, values: &[f64], lo: f64, hi: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{width} {height}\n255\n")?;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let bytes: Vec<u8> = values
        .iter()
        .map(|&v| {
            let v = if v.is_finite() { v } else { hi };
            (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8
        })
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}
