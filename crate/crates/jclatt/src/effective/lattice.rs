use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::nodal::NodalLoopParams;
use crate::model::Spin;
use crate::{Error, Result, C64};

/// Index of |spin⟩_site in a 2N polariton vector.
pub fn polariton_index(site: usize, spin: Spin) -> usize {
    2 * site + spin.index()
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hopping {
    pub amplitude: f64,
    pub phase: f64,
}

impl Hopping {
    pub fn new(amplitude: f64, phase: f64) -> Self {
        Hopping { amplitude, phase: wrap_phase(phase) }
    }

    pub fn zero() -> Self {
        Hopping::default()
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.amplitude, self.phase)
    }

    /// From a complex coefficient t·e^{iφ}.
    pub fn from_complex(z: C64) -> Self {
        if z.norm() == 0.0 {
            Hopping::zero()
        } else {
            Hopping::new(z.norm(), z.arg())
        }
    }
}

/// Coefficients of c†_{l,α} c_{l+1,α'} on one link, indexed `[α][α']`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkHoppings {
    pub entries: [[Hopping; 2]; 2],
}

impl LinkHoppings {
    pub fn get(&self, from: Spin, to: Spin) -> Hopping {
        self.entries[from.index()][to.index()]
    }

    pub fn set(&mut self, from: Spin, to: Spin, h: Hopping) {
        self.entries[from.index()][to.index()] = h;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveLatticeParams {
    pub n_cells: usize,
    /// Zeeman term m (rad/μs).
    pub zeeman: f64,
    /// `links[l]` couples sites l and l+1.
    pub links: Vec<LinkHoppings>,
}

impl EffectiveLatticeParams {
    pub fn new(n_cells: usize, zeeman: f64, links: Vec<LinkHoppings>) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParameter("n_cells must be positive".into()));
        }
        if links.len() != n_cells - 1 {
            return Err(Error::DimensionMismatch { expected: n_cells - 1, got: links.len() });
        }
        let mut links = links;
        for link in &mut links {
            for row in &mut link.entries {
                for h in row.iter_mut() {
                    if !(h.amplitude >= 0.0 && h.amplitude.is_finite()) {
                        return Err(Error::InvalidParameter(format!("hopping amplitude {} < 0", h.amplitude)));
                    }
                    h.phase = wrap_phase(h.phase);
                }
            }
        }
        Ok(EffectiveLatticeParams { n_cells, zeeman, links })
    }

    pub fn uniform(n_cells: usize, zeeman: f64, link: LinkHoppings) -> Result<Self> {
        Self::new(n_cells, zeeman, vec![link; n_cells.saturating_sub(1)])
    }

    /// The nodal-loop model before the gauge map: real hoppings −t'0 (↑↑, ↑↓)
    /// and +t'0 (↓↑, ↓↓) on every link, Zeeman m'. Conjugating with V gives
    /// the nodal chain.
    pub fn nodal(p: &NodalLoopParams) -> Self {
        let t = p.t0_eff;
        let mut link = LinkHoppings::default();
        link.set(Spin::Up, Spin::Up, Hopping::new(t, PI));
        link.set(Spin::Up, Spin::Down, Hopping::new(t, PI));
        link.set(Spin::Down, Spin::Up, Hopping::new(t, 0.0));
        link.set(Spin::Down, Spin::Down, Hopping::new(t, 0.0));
        Self::uniform(p.n_cells, p.m_eff, link).expect("valid nodal parameters")
    }

    pub fn max_amplitude(&self) -> f64 {
        self.links
            .iter()
            .flat_map(|l| l.entries.iter().flatten())
            .map(|h| h.amplitude)
            .fold(0.0, f64::max)
    }
}

/// Dense 2N×2N matrix: m·S^z on site, t·e^{iφ} link blocks plus conjugates.
pub fn build_effective_hamiltonian(p: &EffectiveLatticeParams) -> DMatrix<C64> {
    let n = 2 * p.n_cells;
    let mut h = DMatrix::zeros(n, n);
    for site in 0..p.n_cells {
        for s in Spin::ALL {
            let i = polariton_index(site, s);
            h[(i, i)] = C64::new(p.zeeman * s.sign(), 0.0);
        }
    }
    for (l, link) in p.links.iter().enumerate() {
        for a in Spin::ALL {
            for b in Spin::ALL {
                let v = link.get(a, b).value();
                let i = polariton_index(l, a);
                let j = polariton_index(l + 1, b);
                h[(i, j)] += v;
                h[(j, i)] += v.conj();
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;

    #[test]
    fn no_hopping_gives_zeeman_levels() {
        let p = EffectiveLatticeParams::uniform(3, 1.5, LinkHoppings::default()).unwrap();
        let (e, _) = hermitian_eigen(&build_effective_hamiltonian(&p));
        assert_eq!(e.iter().filter(|&&x| (x + 1.5).abs() < 1e-12).count(), 3);
        assert_eq!(e.iter().filter(|&&x| (x - 1.5).abs() < 1e-12).count(), 3);
    }

    #[test]
    fn single_channel_dimer() {
        let mut link = LinkHoppings::default();
        link.set(Spin::Up, Spin::Up, Hopping::new(2.0, 0.7));
        let p = EffectiveLatticeParams::uniform(2, 0.0, link).unwrap();
        let (e, _) = hermitian_eigen(&build_effective_hamiltonian(&p));
        let want = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn phases_wrapped() {
        let h = Hopping::new(1.0, 3.0 * PI);
        assert!((h.phase - PI).abs() < 1e-12);
        let h = Hopping::new(1.0, -PI);
        assert!((h.phase - PI).abs() < 1e-12);
        let mut link = LinkHoppings::default();
        link.set(Spin::Up, Spin::Up, Hopping { amplitude: -1.0, phase: 0.0 });
        assert!(EffectiveLatticeParams::uniform(2, 0.0, link).is_err());
    }
}
