//! Geometry of the open dual orbit: membership, distance to the complement,
//! the envelope `A`, and the orbit polynomial.

use serde::{Deserialize, Serialize};

use crate::error::{CoorbitError, Result};
use crate::group::{GroupFamily, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitData {
    pub family: GroupFamily,
    pub base_point: Vec2,
}

impl OrbitData {
    pub fn new(family: GroupFamily) -> Result<Self> {
        Ok(OrbitData {
            family,
            base_point: base_point(family)?,
        })
    }
}

/// The reference point `xi_0` of the open orbit.
pub fn base_point(family: GroupFamily) -> Result<Vec2> {
    family.require_admissible("open dual orbit")?;
    Ok(match family {
        GroupFamily::Diagonal => [1.0, 1.0],
        _ => [1.0, 0.0],
    })
}

/// Polynomial vanishing exactly on the orbit complement.
pub fn orbit_polynomial(family: GroupFamily, xi: Vec2) -> Result<f64> {
    family.require_admissible("orbit polynomial")?;
    Ok(match family {
        GroupFamily::Similitude => xi[0] * xi[0] + xi[1] * xi[1],
        GroupFamily::Diagonal => xi[0] * xi[1],
        GroupFamily::Shearlet { .. } => xi[0],
        GroupFamily::ScalarReducible => unreachable!(),
    })
}

/// Total degree of [`orbit_polynomial`].
pub fn polynomial_degree(family: GroupFamily) -> Result<u32> {
    family.require_admissible("orbit polynomial")?;
    Ok(match family {
        GroupFamily::Similitude | GroupFamily::Diagonal => 2,
        _ => 1,
    })
}

pub fn in_orbit(family: GroupFamily, xi: Vec2) -> Result<bool> {
    Ok(orbit_polynomial(family, xi)? != 0.0)
}

/// Closest point of the orbit complement.
pub fn nearest_complement_point(family: GroupFamily, xi: Vec2) -> Result<Vec2> {
    family.require_admissible("orbit complement")?;
    Ok(match family {
        GroupFamily::Similitude => [0.0, 0.0],
        GroupFamily::Diagonal => {
            if xi[0].abs() <= xi[1].abs() {
                [0.0, xi[1]]
            } else {
                [xi[0], 0.0]
            }
        }
        GroupFamily::Shearlet { .. } => [0.0, xi[1]],
        GroupFamily::ScalarReducible => unreachable!(),
    })
}

/// Euclidean distance to the orbit complement.
pub fn dist_complement(family: GroupFamily, xi: Vec2) -> Result<f64> {
    family.require_admissible("orbit complement")?;
    Ok(match family {
        GroupFamily::Similitude => xi[0].hypot(xi[1]),
        GroupFamily::Diagonal => xi[0].abs().min(xi[1].abs()),
        GroupFamily::Shearlet { .. } => xi[0].abs(),
        GroupFamily::ScalarReducible => unreachable!(),
    })
}

/// `A(xi) = min(dist / (1 + sqrt(|xi|^2 - dist^2)), 1 / (1 + |xi|))`.
pub fn aux_a(family: GroupFamily, xi: Vec2) -> Result<f64> {
    if !in_orbit(family, xi)? {
        return Err(CoorbitError::OffOrbit(xi[0], xi[1]));
    }
    let dist = dist_complement(family, xi)?;
    let norm = xi[0].hypot(xi[1]);
    let foot = (norm * norm - dist * dist).max(0.0).sqrt();
    Ok((dist / (1.0 + foot)).min(1.0 / (1.0 + norm)))
}

/// Per-family closed form of `A` with the `l^1` norm in the second term
/// (euclidean for the similitude family).
pub fn aux_a_closed(family: GroupFamily, xi: Vec2) -> Result<f64> {
    if !in_orbit(family, xi)? {
        return Err(CoorbitError::OffOrbit(xi[0], xi[1]));
    }
    let (x1, x2) = (xi[0].abs(), xi[1].abs());
    Ok(match family {
        GroupFamily::Similitude => {
            let r = xi[0].hypot(xi[1]);
            r.min(1.0 / (1.0 + r))
        }
        GroupFamily::Diagonal => (x1.min(x2) / (1.0 + x1.max(x2))).min(1.0 / (1.0 + x1 + x2)),
        GroupFamily::Shearlet { .. } => (x1 / (1.0 + x2)).min(1.0 / (1.0 + x1 + x2)),
        GroupFamily::ScalarReducible => unreachable!(),
    })
}
