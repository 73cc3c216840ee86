use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The three polygonal test domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// `(-√2/2, √2/2)²`
    Square,
    /// `(-1, 1)² \ [0, 1) × (-1, 0]`
    LShape,
    /// `(-√2/2, √2/2)²` cut along `{0 ≤ x ≤ √2/2, y = 0}`
    Slit,
}

impl DomainKind {
    pub const ALL: [DomainKind; 3] = [DomainKind::Square, DomainKind::LShape, DomainKind::Slit];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Square => "square",
            DomainKind::LShape => "lshape",
            DomainKind::Slit => "slit",
        }
    }

    /// Short label used in result tables (`S`, `L`, `Slit`).
    pub fn label(self) -> &'static str {
        match self {
            DomainKind::Square => "S",
            DomainKind::LShape => "L",
            DomainKind::Slit => "Slit",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "s" => Ok(DomainKind::Square),
            "lshape" | "l" | "l-shape" => Ok(DomainKind::LShape),
            "slit" | "sl" => Ok(DomainKind::Slit),
            other => Err(Error::invalid(format!("unknown domain '{other}'"))),
        }
    }
}

/// Role of an axis-aligned subregion in the local scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionRole {
    /// The region on which the local correction is solved.
    Omega0,
    /// The smaller region `D ⊂⊂ Ω₀` that contains the singular point.
    D,
}

/// Axis-aligned square `center ± half_side`, implicitly intersected with the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub center: [f64; 2],
    pub half_side: f64,
    pub role: RegionRole,
}

impl RegionSpec {
    pub fn new(center: [f64; 2], half_side: f64, role: RegionRole) -> Self {
        Self {
            center,
            half_side,
            role,
        }
    }

    /// Closed-square membership with absolute tolerance `tol`.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        (p[0] - self.center[0]).abs() <= self.half_side + tol && (p[1] - self.center[1]).abs() <= self.half_side + tol
    }

    /// Open-square membership, shrunk by `tol`.
    pub fn contains_strictly(&self, p: [f64; 2], tol: f64) -> bool {
        (p[0] - self.center[0]).abs() < self.half_side - tol && (p[1] - self.center[1]).abs() < self.half_side - tol
    }

    /// True when `p` lies on the boundary of the square (within `tol`).
    pub fn on_boundary(&self, p: [f64; 2], tol: f64) -> bool {
        self.contains(p, tol) && !self.contains_strictly(p, tol)
    }
}

/// Geometry of one of the test domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub singular_corner: Option<[f64; 2]>,
}

impl DomainSpec {
    pub fn new(kind: DomainKind) -> Self {
        match kind {
            DomainKind::Square => Self {
                kind,
                x_range: (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                y_range: (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                singular_corner: None,
            },
            DomainKind::LShape => Self {
                kind,
                x_range: (-1.0, 1.0),
                y_range: (-1.0, 1.0),
                singular_corner: Some([0.0, 0.0]),
            },
            DomainKind::Slit => Self {
                kind,
                x_range: (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                y_range: (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
                singular_corner: Some([0.0, 0.0]),
            },
        }
    }

    pub fn square() -> Self {
        Self::new(DomainKind::Square)
    }

    pub fn lshape() -> Self {
        Self::new(DomainKind::LShape)
    }

    pub fn slit() -> Self {
        Self::new(DomainKind::Slit)
    }

    /// Side length of the bounding square.
    pub fn side(&self) -> f64 {
        self.x_range.1 - self.x_range.0
    }

    pub fn area(&self) -> f64 {
        let full = self.side() * self.side();
        match self.kind {
            DomainKind::LShape => 0.75 * full,
            _ => full,
        }
    }

    /// Length of `∂Ω`, counting both sides of the slit.
    pub fn perimeter(&self) -> f64 {
        let outer = 4.0 * self.side();
        match self.kind {
            DomainKind::Slit => outer + self.side(),
            _ => outer,
        }
    }

    /// `Ω₀`: the square of half-side `side/4` centred at the singular corner.
    pub fn default_local_region(&self) -> Option<RegionSpec> {
        self.singular_corner
            .map(|c| RegionSpec::new(c, self.side() / 4.0, RegionRole::Omega0))
    }

    /// `D`: the square of half-side `side/8` centred at the singular corner.
    pub fn default_inner_region(&self) -> Option<RegionSpec> {
        self.singular_corner
            .map(|c| RegionSpec::new(c, self.side() / 8.0, RegionRole::D))
    }

    /// Whether `p` lies in the closure of the domain.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let inside_box = p[0] >= self.x_range.0 - tol
            && p[0] <= self.x_range.1 + tol
            && p[1] >= self.y_range.0 - tol
            && p[1] <= self.y_range.1 + tol;
        match self.kind {
            DomainKind::LShape => inside_box && !(p[0] > tol && p[1] < -tol),
            _ => inside_box,
        }
    }
}
