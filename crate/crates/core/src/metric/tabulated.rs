//! Metrics sampled on a regular Cartesian grid.
//!
//! Files hold one row per grid node with columns
//! `x, y, z, g11, g12, g13, g22, g23, g33`. The CSV form allows `#` comment
//! lines and an optional header row; the binary form is the 8-byte magic
//! `CMCGRID1`, a little-endian `u64` row count, then 9 little-endian `f64`
//! per row. Nodes may be omitted (e.g. inside the excised interior); an
//! interpolation stencil touching a missing node is an error.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg3::Vec3;

pub const GRID_MAGIC: &[u8; 8] = b"CMCGRID1";

#[derive(Clone, Debug)]
pub struct TabulatedMetric {
    origin: Vec3,
    spacing: Vec3,
    dims: [usize; 3],
    /// Six components per node, `NaN` for missing nodes.
    data: Vec<[f64; 6]>,
    order: usize,
    pub q: f64,
    pub r_min: f64,
    pub declared_mass: Option<f64>,
    pub declared_center: Option<Vec3>,
    pub rt_flag: bool,
}

fn axis_of(values: &mut Vec<f64>, name: &str) -> Result<(f64, f64, usize)> {
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    if values.len() < 2 {
        return Err(Error::Format(format!("grid needs at least two {name} values")));
    }
    let h = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
    for (i, v) in values.iter().enumerate() {
        if (values[0] + i as f64 * h - v).abs() > 1e-6 * h {
            return Err(Error::Format(format!("{name} coordinates are not equally spaced")));
        }
    }
    Ok((values[0], h, values.len()))
}

impl TabulatedMetric {
    /// Builds the grid from scattered rows `(x, y, z, g11, g12, g13, g22, g23, g33)`.
    pub fn from_rows(rows: &[[f64; 9]], order: usize) -> Result<Self> {
        if order == 0 || order > 8 {
            return Err(Error::InvalidArgument(format!(
                "interpolation order must be in 1..=8 (got {order})"
            )));
        }
        if let Some(k) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFiniteInput(k));
        }
        let mut origin = [0.0; 3];
        let mut spacing = [0.0; 3];
        let mut dims = [0; 3];
        for (a, name) in ["x", "y", "z"].iter().enumerate() {
            let mut vals: Vec<f64> = rows.iter().map(|r| r[a]).collect();
            let (o, h, n) = axis_of(&mut vals, name)?;
            origin[a] = o;
            spacing[a] = h;
            dims[a] = n;
            if n < order + 1 {
                return Err(Error::Format(format!(
                    "{name} axis has {n} nodes, fewer than order + 1 = {}",
                    order + 1
                )));
            }
        }
        let mut data = vec![[f64::NAN; 6]; dims[0] * dims[1] * dims[2]];
        for r in rows {
            let mut idx = [0usize; 3];
            for a in 0..3 {
                idx[a] = ((r[a] - origin[a]) / spacing[a]).round() as usize;
            }
            data[(idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]] = [r[3], r[4], r[5], r[6], r[7], r[8]];
        }
        Ok(TabulatedMetric {
            origin,
            spacing,
            dims,
            data,
            order,
            q: 1.0,
            r_min: 0.0,
            declared_mass: None,
            declared_center: None,
            rt_flag: false,
        })
    }

    /// Loads a CSV or binary grid file (binary detected by its magic).
    pub fn load(path: &Path, order: usize) -> Result<Self> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let bytes = fs::read(path)?;
        let rows = if bytes.starts_with(GRID_MAGIC) {
            parse_binary(&bytes)?
        } else {
            parse_csv(&bytes[..])?
        };
        Self::from_rows(&rows, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Samples a closed-form metric onto a grid and returns rows in file order.
    pub fn sample_rows(
        metric: impl Fn(Vec3) -> Option<[f64; 6]>,
        origin: Vec3,
        spacing: Vec3,
        dims: [usize; 3],
    ) -> Vec<[f64; 9]> {
        let mut rows = Vec::new();
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let x = [
                        origin[0] + i as f64 * spacing[0],
                        origin[1] + j as f64 * spacing[1],
                        origin[2] + k as f64 * spacing[2],
                    ];
                    if let Some(g) = metric(x) {
                        rows.push([x[0], x[1], x[2], g[0], g[1], g[2], g[3], g[4], g[5]]);
                    }
                }
            }
        }
        rows
    }

    /// Interpolated components as jets (value, gradient, Hessian of the interpolant).
    pub fn components(&self, x: Vec3) -> Result<[Jet; 6]> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r < self.r_min {
            return Err(Error::PointInsideChart {
                point: x,
                radius: r,
                r_min: self.r_min,
            });
        }
        let n = self.order + 1;
        let mut start = [0usize; 3];
        let mut w = [[[0.0; 9]; 3]; 3];
        for a in 0..3 {
            let t = (x[a] - self.origin[a]) / self.spacing[a];
            let last = (self.dims[a] - 1) as f64;
            if t < -1e-9 || t > last + 1e-9 {
                return Err(Error::PointInsideChart {
                    point: x,
                    radius: r,
                    r_min: self.r_min,
                });
            }
            let s = (t - 0.5 * (n as f64 - 1.0))
                .round()
                .clamp(0.0, (self.dims[a] - n) as f64) as usize;
            start[a] = s;
            let nodes: Vec<f64> = (0..n).map(|i| (s + i) as f64).collect();
            let (v, d1, d2) = lagrange_weights(&nodes, t);
            let h = self.spacing[a];
            for i in 0..n {
                w[a][0][i] = v[i];
                w[a][1][i] = d1[i] / h;
                w[a][2][i] = d2[i] / (h * h);
            }
        }
        let mut out = [Jet::ZERO; 6];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = ((start[0] + i) * self.dims[1] + start[1] + j) * self.dims[2] + start[2] + k;
                    let g = &self.data[idx];
                    if g[0].is_nan() {
                        return Err(Error::StencilOutsideChart(x));
                    }
                    // derivative orders per axis for value, gradient and Hessian entries
                    let wt = |da: usize, db: usize, dc: usize| w[0][da][i] * w[1][db][j] * w[2][dc][k];
                    let v = wt(0, 0, 0);
                    let d = [wt(1, 0, 0), wt(0, 1, 0), wt(0, 0, 1)];
                    let hxy = wt(1, 1, 0);
                    let hxz = wt(1, 0, 1);
                    let hyz = wt(0, 1, 1);
                    let hs = [
                        [wt(2, 0, 0), hxy, hxz],
                        [hxy, wt(0, 2, 0), hyz],
                        [hxz, hyz, wt(0, 0, 2)],
                    ];
                    for (c, o) in out.iter_mut().enumerate() {
                        o.v += v * g[c];
                        for p in 0..3 {
                            o.d[p] += d[p] * g[c];
                            for q in 0..3 {
                                o.h[p][q] += hs[p][q] * g[c];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Lagrange basis values and first/second derivatives at `t`.
fn lagrange_weights(nodes: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut v = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let denom: f64 = (0..n).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product();
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        v[i] = others.iter().map(|&j| t - nodes[j]).product::<f64>() / denom;
        for &j in &others {
            let p: f64 = others.iter().filter(|&&k| k != j).map(|&k| t - nodes[k]).product();
            d1[i] += p / denom;
            for &k in &others {
                if k == j {
                    continue;
                }
                let p: f64 = others
                    .iter()
                    .filter(|&&l| l != j && l != k)
                    .map(|&l| t - nodes[l])
                    .product();
                d2[i] += p / denom;
            }
        }
    }
    (v, d1, d2)
}

fn parse_csv(bytes: &[u8]) -> Result<Vec<[f64; 9]>> {
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(bytes).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(Error::Format(format!(
                "line {}: expected 9 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v.try_into().expect("nine columns")),
            // tolerate a single header row
            Err(_) if rows.is_empty() && fields[0] == "x" => continue,
            Err(e) => return Err(Error::Format(format!("line {}: {e}", lineno + 1))),
        }
    }
    Ok(rows)
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[f64; 9]>> {
    let mut rd = &bytes[GRID_MAGIC.len()..];
    let mut buf8 = [0u8; 8];
    rd.read_exact(&mut buf8)
        .map_err(|_| Error::Format("truncated grid header".into()))?;
    let count = u64::from_le_bytes(buf8) as usize;
    if rd.len() != count * 72 {
        return Err(Error::Format(format!(
            "grid body has {} bytes, expected {}",
            rd.len(),
            count * 72
        )));
    }
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let mut row = [0.0; 9];
        for v in row.iter_mut() {
            rd.read_exact(&mut buf8).expect("length checked");
            *v = f64::from_le_bytes(buf8);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Serializes rows in the binary grid format.
pub fn encode_binary(rows: &[[f64; 9]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + rows.len() * 72);
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&(rows.len() as u64).to_le_bytes());
    for r in rows {
        for v in r {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: Vec3) -> Option<[f64; 6]> {
        let f = 1.0 + 0.01 * (x[0] * x[0] - 0.5 * x[1] * x[2]) + 0.02 * x[2];
        Some([f, 0.001 * x[0], 0.0, f, 0.0, 1.0 + 0.003 * x[1] * x[1]])
    }

    #[test]
    fn reproduces_polynomials_exactly() {
        let rows = TabulatedMetric::sample_rows(quadratic, [-4.0; 3], [1.0; 3], [9, 9, 9]);
        let t = TabulatedMetric::from_rows(&rows, 3).unwrap();
        let x = [0.3, -1.7, 2.2];
        let c = t.components(x).unwrap();
        let f = quadratic(x).unwrap();
        assert!((c[0].v - f[0]).abs() < 1e-13);
        assert!((c[0].d[0] - 0.02 * x[0]).abs() < 1e-12);
        assert!((c[0].d[2] - (-0.005 * x[1] + 0.02)).abs() < 1e-12);
        assert!((c[0].h[1][2] + 0.005).abs() < 1e-12);
        assert!((c[5].h[1][1] - 0.006).abs() < 1e-12);
    }

    #[test]
    fn binary_and_csv_agree() {
        let rows = TabulatedMetric::sample_rows(quadratic, [0.0; 3], [0.5; 3], [5, 5, 5]);
        let bin = encode_binary(&rows);
        let mut csv = String::from("x,y,z,g11,g12,g13,g22,g23,g33\n");
        for r in &rows {
            let s: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            csv.push_str(&s.join(","));
            csv.push('\n');
        }
        assert_eq!(parse_binary(&bin).unwrap(), parse_csv(csv.as_bytes()).unwrap());
    }

    #[test]
    fn missing_nodes_are_reported() {
        let rows = TabulatedMetric::sample_rows(
            |x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > 1.0).then(|| quadratic(x).unwrap()),
            [-3.0; 3],
            [0.5; 3],
            [13, 13, 13],
        );
        let t = TabulatedMetric::from_rows(&rows, 3).unwrap();
        assert!(t.components([2.5, 0.0, 0.0]).is_ok());
        assert!(matches!(
            t.components([0.6, 0.1, 0.0]),
            Err(Error::StencilOutsideChart(_))
        ));
    }
}
