//! Bit-exact field persistence: a JSON sidecar describing the grid plus a raw
//! little-endian array file.

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec, RealField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub dim: usize,
    pub n_per_axis: usize,
    pub half_width: f64,
    pub dtype: String,
    pub order: String,
}

impl FieldSidecar {
    fn grid(&self) -> Result<GridSpec> {
        if self.order != "row-major" {
            return Err(Error::Config(format!("unsupported storage order {}", self.order)));
        }
        GridSpec::new(self.dim, self.n_per_axis, self.half_width)
    }
}

fn sidecar_path(base: &Path) -> std::path::PathBuf {
    base.with_extension("json")
}

fn data_path(base: &Path) -> std::path::PathBuf {
    base.with_extension("bin")
}

pub fn write_real_field(base: &Path, field: &RealField) -> Result<()> {
    let sidecar = FieldSidecar {
        dim: field.grid.dim,
        n_per_axis: field.grid.n_per_axis,
        half_width: field.grid.half_width,
        dtype: "f64".into(),
        order: "row-major".into(),
    };
    fs::write(sidecar_path(base), serde_json::to_vec_pretty(&sidecar)?)?;
    let mut file = fs::File::create(data_path(base))?;
    let mut buf = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn write_complex_field(base: &Path, field: &ComplexField) -> Result<()> {
    let sidecar = FieldSidecar {
        dim: field.grid.dim,
        n_per_axis: field.grid.n_per_axis,
        half_width: field.grid.half_width,
        dtype: "c128".into(),
        order: "row-major".into(),
    };
    fs::write(sidecar_path(base), serde_json::to_vec_pretty(&sidecar)?)?;
    let mut file = fs::File::create(data_path(base))?;
    let mut buf = Vec::with_capacity(field.values.len() * 16);
    for v in &field.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_real_field(base: &Path) -> Result<RealField> {
    let sidecar: FieldSidecar = serde_json::from_slice(&fs::read(sidecar_path(base))?)?;
    if sidecar.dtype != "f64" {
        return Err(Error::Config(format!("expected dtype f64, found {}", sidecar.dtype)));
    }
    let grid = sidecar.grid()?;
    let mut file = fs::File::open(data_path(base))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    if buf.len() != grid.len() * 8 {
        return Err(Error::Config(format!(
            "array file holds {} bytes, grid needs {}",
            buf.len(),
            grid.len() * 8
        )));
    }
    let values = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(RealField { grid, values })
}

pub fn read_complex_field(base: &Path) -> Result<ComplexField> {
    let sidecar: FieldSidecar = serde_json::from_slice(&fs::read(sidecar_path(base))?)?;
    if sidecar.dtype != "c128" {
        return Err(Error::Config(format!("expected dtype c128, found {}", sidecar.dtype)));
    }
    let grid = sidecar.grid()?;
    let mut file = fs::File::open(data_path(base))?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    if buf.len() != grid.len() * 16 {
        return Err(Error::Config(format!(
            "array file holds {} bytes, grid needs {}",
            buf.len(),
            grid.len() * 16
        )));
    }
    let values = buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(ComplexField { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_field_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(2, 8, 1.5).unwrap();
        let field = RealField::from_fn(grid, |p| (p[0] * 3.1).sin() + p[1]);
        let base = dir.path().join("field");
        write_real_field(&base, &field).unwrap();
        let back = read_real_field(&base).unwrap();
        assert_eq!(field, back);
    }

    #[test]
    fn complex_field_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(3, 8, 1.0).unwrap();
        let mut field = ComplexField::zeros(grid);
        for (i, v) in field.values.iter_mut().enumerate() {
            *v = Complex64::new(i as f64 * 0.1, -(i as f64) * 0.2);
        }
        let base = dir.path().join("field");
        write_complex_field(&base, &field).unwrap();
        let back = read_complex_field(&base).unwrap();
        assert_eq!(field, back);
    }
}
