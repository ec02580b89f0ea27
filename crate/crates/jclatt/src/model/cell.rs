use serde::{Deserialize, Serialize};

use crate::defaults::Thresholds;
use crate::{Error, Result};

/// Bare frequency and JC coupling of one resonator + transmon cell (rad/μs).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitCellParams {
    pub omega: f64,
    pub g: f64,
}

impl UnitCellParams {
    /// Checks 0 ≤ g and g/ω below the hard limit; warns above the soft one.
    pub fn new(omega: f64, g: f64) -> Result<Self> {
        Self::with_thresholds(omega, g, &Thresholds::default())
    }

    pub fn with_thresholds(omega: f64, g: f64, th: &Thresholds) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InvalidParameter(format!("g must be non-negative, got {g}")));
        }
        let ratio = g / omega;
        if ratio >= th.g_over_omega_max {
            return Err(Error::Physics(format!(
                "JC regime: g/omega = {ratio:.4} not below {}",
                th.g_over_omega_max
            )));
        }
        if ratio > th.g_over_omega_warn {
            log::warn!("g/omega = {ratio:.4} above {}", th.g_over_omega_warn);
        }
        Ok(UnitCellParams { omega, g })
    }

    pub fn from_mhz(omega_mhz: f64, g_mhz: f64) -> Result<Self> {
        Self::new(crate::units::mhz(omega_mhz), crate::units::mhz(g_mhz))
    }
}

/// Alternating A/B chain. Even 0-based sites (odd 1-based `l`) are A cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_cells: usize,
    pub cell_a: UnitCellParams,
    pub cell_b: UnitCellParams,
}

impl LatticeSpec {
    pub fn new(n_cells: usize, cell_a: UnitCellParams, cell_b: UnitCellParams) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParameter("n_cells must be positive".into()));
        }
        Ok(LatticeSpec { n_cells, cell_a, cell_b })
    }

    pub fn cell(&self, site: usize) -> &UnitCellParams {
        if site % 2 == 0 {
            &self.cell_a
        } else {
            &self.cell_b
        }
    }

    pub fn n_links(&self) -> usize {
        self.n_cells.saturating_sub(1)
    }

    pub fn levels(&self, site: usize) -> DressedLevels {
        dressed_levels(self.cell(site))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    /// +1 for ↑, −1 for ↓ (the S^z eigenvalue and the sign of |1g⟩ in the dressed state).
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
        }
    }
}

impl std::str::FromStr for Spin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" | "u" | "↑" => Ok(Spin::Up),
            "down" | "d" | "↓" => Ok(Spin::Down),
            _ => Err(Error::InvalidParameter(format!("unknown spin '{s}'"))),
        }
    }
}

/// Single-cell JC energies: ground 0, |↑⟩ at ω+g, |↓⟩ at ω−g.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DressedLevels {
    pub e_ground: f64,
    pub e_up: f64,
    pub e_down: f64,
}

impl DressedLevels {
    pub fn energy(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.e_up,
            Spin::Down => self.e_down,
        }
    }
}

pub fn dressed_levels(cell: &UnitCellParams) -> DressedLevels {
    DressedLevels {
        e_ground: 0.0,
        e_up: cell.omega + cell.g,
        e_down: cell.omega - cell.g,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingInterval {
    pub from: Spin,
    pub to: Spin,
    /// |E_{l,α} − E_{l+1,α'}| in rad/μs.
    pub interval: f64,
    /// sgn(E_{l,α} − E_{l+1,α'}); +1 on exact degeneracy.
    pub sign: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingIntervals {
    pub link: usize,
    pub entries: Vec<HoppingInterval>,
}

impl HoppingIntervals {
    pub fn get(&self, from: Spin, to: Spin) -> &HoppingInterval {
        &self.entries[from.index() * 2 + to.index()]
    }

    /// Intervals sorted ascending.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().map(|e| e.interval).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn any_degenerate(&self) -> bool {
        self.entries.iter().any(|e| e.degenerate)
    }
}

/// The four dressed-level intervals of link `link` (sites `link`, `link+1`),
/// ordered ↑↑, ↑↓, ↓↑, ↓↓.
pub fn hopping_intervals(lattice: &LatticeSpec, link: usize) -> Result<HoppingIntervals> {
    if link + 1 >= lattice.n_cells {
        return Err(Error::InvalidParameter(format!(
            "link {link} out of range for {} cells",
            lattice.n_cells
        )));
    }
    let left = lattice.levels(link);
    let right = lattice.levels(link + 1);
    let mut entries = Vec::with_capacity(4);
    for from in Spin::ALL {
        for to in Spin::ALL {
            let diff = left.energy(from) - right.energy(to);
            let degenerate = diff == 0.0;
            if degenerate {
                log::warn!(
                    "link {link}: degenerate interval {}→{}; sign set to +1",
                    from.symbol(),
                    to.symbol()
                );
            }
            entries.push(HoppingInterval {
                from,
                to,
                interval: diff.abs(),
                sign: if diff < 0.0 { -1.0 } else { 1.0 },
                degenerate,
            });
        }
    }
    Ok(HoppingIntervals { link, entries })
}
