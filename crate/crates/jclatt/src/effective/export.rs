use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lattice::{EffectiveLatticeParams, Hopping, LinkHoppings};
use crate::model::Spin;
use crate::units::{mhz, to_mhz};
use crate::{Error, Result, C64};

/// Writes a complex matrix as CSV, one matrix row per line, each entry as
/// two columns `re,im`.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<C64>, mut w: W) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e},{:e}", m[(i, j)].re, m[(i, j)].im)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(r: R) -> Result<DMatrix<C64>> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let nums: std::result::Result<Vec<f64>, _> = line.split(',').map(|x| x.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|e| Error::InvalidParameter(format!("matrix csv: {e}")))?;
        if nums.len() % 2 != 0 {
            return Err(Error::InvalidParameter("matrix csv: odd number of columns".into()));
        }
        rows.push(nums.chunks(2).map(|c| C64::new(c[0], c[1])).collect());
    }
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParameter("matrix csv: ragged rows".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingFile {
    pub amplitude_mhz: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Hoppings of one link; omitted channels are zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_up: Option<HoppingFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_down: Option<HoppingFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down_up: Option<HoppingFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down_down: Option<HoppingFile>,
}

/// Effective-model document. `links` holds either one entry (used on every
/// link) or N−1 entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveFile {
    pub n_cells: usize,
    pub zeeman_mhz: f64,
    pub links: Vec<LinkFile>,
}

impl EffectiveFile {
    pub fn to_params(&self) -> Result<EffectiveLatticeParams> {
        let conv = |f: &LinkFile| {
            let mut l = LinkHoppings::default();
            let chans = [
                (Spin::Up, Spin::Up, &f.up_up),
                (Spin::Up, Spin::Down, &f.up_down),
                (Spin::Down, Spin::Up, &f.down_up),
                (Spin::Down, Spin::Down, &f.down_down),
            ];
            for (a, b, h) in chans {
                if let Some(h) = h {
                    l.set(a, b, Hopping::new(mhz(h.amplitude_mhz), h.phase));
                }
            }
            l
        };
        let n_links = self.n_cells.saturating_sub(1);
        let links = match self.links.len() {
            1 => vec![conv(&self.links[0]); n_links],
            k if k == n_links => self.links.iter().map(conv).collect(),
            k => return Err(Error::DimensionMismatch { expected: n_links, got: k }),
        };
        EffectiveLatticeParams::new(self.n_cells, mhz(self.zeeman_mhz), links)
    }

    pub fn from_params(p: &EffectiveLatticeParams) -> Self {
        let conv = |l: &LinkHoppings| {
            let h = |a, b| {
                let x: Hopping = l.get(a, b);
                (x.amplitude > 0.0).then(|| HoppingFile { amplitude_mhz: to_mhz(x.amplitude), phase: x.phase })
            };
            LinkFile {
                up_up: h(Spin::Up, Spin::Up),
                up_down: h(Spin::Up, Spin::Down),
                down_up: h(Spin::Down, Spin::Up),
                down_down: h(Spin::Down, Spin::Down),
            }
        };
        EffectiveFile { n_cells: p.n_cells, zeeman_mhz: to_mhz(p.zeeman), links: p.links.iter().map(conv).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::build_effective_hamiltonian;
    use crate::linalg::max_abs_diff;

    #[test]
    fn csv_roundtrip() {
        let f: EffectiveFile = serde_json::from_str(
            r#"{"n_cells": 3, "zeeman_mhz": 2.0, "links": [{"up_up": {"amplitude_mhz": 3.0, "phase": 0.5}, "down_up": {"amplitude_mhz": 1.0}}]}"#,
        )
        .unwrap();
        let p = f.to_params().unwrap();
        let h = build_effective_hamiltonian(&p);
        let mut buf = Vec::new();
        write_matrix_csv(&h, &mut buf).unwrap();
        let back = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(max_abs_diff(&h, &back), 0.0);
        let again = EffectiveFile::from_params(&p).to_params().unwrap();
        assert!(max_abs_diff(&h, &build_effective_hamiltonian(&again)) < 1e-12);
    }
}
