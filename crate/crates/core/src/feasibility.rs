//! Single-mode state transformations under GTOs.
//!
//! In the normal-mode frame a single-mode GTO maps `(νz, ν/z)` onto the segment
//! joining it with the bath point `(ν_b, ν_b)`. A target is reachable iff both
//! coordinates sit on that segment at the same parameter `p ∈ [0, 1]`. With a
//! squeezed bath the condition becomes a quadratic in `p` plus a positivity
//! constraint on the bath CM.

use serde::{Deserialize, Serialize};

use crate::error::{GtoError, Result};

/// Default relative tolerance for consistency and range checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Slack on the `ν ≥ 1`, `z ≥ 1` domain checks, so that values recovered from
/// a numerical decomposition are not rejected over the last few ulps.
const DOMAIN_SLACK: f64 = 1e-12;

/// Absolute slack used by [`necessary_bounds`].
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformQuery {
    pub nu_i: f64,
    pub z_i: f64,
    pub nu_f: f64,
    pub z_f: f64,
    pub nu_b: f64,
    /// Relative optical phase between input and target; squeezed baths only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vartheta: Option<f64>,
}

impl TransformQuery {
    pub fn new(nu_i: f64, z_i: f64, nu_f: f64, z_f: f64, nu_b: f64) -> Self {
        TransformQuery { nu_i, z_i, nu_f, z_f, nu_b, vartheta: None }
    }

    pub fn with_vartheta(mut self, vartheta: f64) -> Self {
        self.vartheta = Some(vartheta);
        self
    }

    pub fn check(&self) -> Result<()> {
        let named = [
            ("nu_i", self.nu_i),
            ("z_i", self.z_i),
            ("nu_f", self.nu_f),
            ("z_f", self.z_f),
            ("nu_b", self.nu_b),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 1.0 - DOMAIN_SLACK {
                return Err(GtoError::invalid(format!("{name} must be finite and ≥ 1, got {v}")));
            }
        }
        if let Some(t) = self.vartheta {
            if !t.is_finite() {
                return Err(GtoError::invalid("vartheta must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Ok,
    POutOfRange,
    InconsistentSystem,
    PositivityViolated,
}

impl std::fmt::Display for Reason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Reason::Ok => "ok",
            Reason::POutOfRange => "p-out-of-range",
            Reason::InconsistentSystem => "inconsistent-system",
            Reason::PositivityViolated => "positivity-violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub p: Option<f64>,
    pub reason: Reason,
}

impl FeasibilityResult {
    fn ok(p: f64) -> Self {
        FeasibilityResult { feasible: true, p: Some(p.clamp(0.0, 1.0)), reason: Reason::Ok }
    }

    fn no(reason: Reason) -> Self {
        FeasibilityResult { feasible: false, p: None, reason }
    }
}

/// Decide whether `(ν_i, z_i) → (ν_f, z_f)` is achievable by a phase-covariant
/// GTO with bath eigenvalue `ν_b`.
///
/// Solves `x_f − ν_b = p (x_i − ν_b)` and `y_f − ν_b = p (y_i − ν_b)` for
/// `x = νz`, `y = ν/z`. `p` is taken from the better-conditioned equation and
/// the other is checked as a residual; when both denominators vanish the input
/// is the bath point and only the identity target is reachable.
pub fn single_mode_feasible(q: &TransformQuery, tol: f64) -> Result<FeasibilityResult> {
    q.check()?;
    if q.vartheta.is_some() {
        return Err(GtoError::invalid(
            "vartheta is only meaningful for squeezed baths; use squeezed_bath_feasible",
        ));
    }
    let (xi, yi) = (q.nu_i * q.z_i, q.nu_i / q.z_i);
    let (xf, yf) = (q.nu_f * q.z_f, q.nu_f / q.z_f);
    let (dx, dy) = (xi - q.nu_b, yi - q.nu_b);
    let (nx, ny) = (xf - q.nu_b, yf - q.nu_b);
    let scale = xi.max(xf).max(q.nu_b);
    let eps = tol * scale;

    if dx.abs() <= eps && dy.abs() <= eps {
        return Ok(if nx.abs() <= eps && ny.abs() <= eps {
            FeasibilityResult::ok(1.0)
        } else {
            FeasibilityResult::no(Reason::InconsistentSystem)
        });
    }
    let (p, residual) = if dx.abs() >= dy.abs() {
        let p = nx / dx;
        (p, ny - p * dy)
    } else {
        let p = ny / dy;
        (p, nx - p * dx)
    };
    if residual.abs() > eps {
        return Ok(FeasibilityResult::no(Reason::InconsistentSystem));
    }
    if p < -tol || p > 1.0 + tol {
        return Ok(FeasibilityResult::no(Reason::POutOfRange));
    }
    Ok(FeasibilityResult::ok(p))
}

/// Point `p (x_i, y_i) + (1 − p)(ν_b, ν_b)` in the `(νz, ν/z)` plane.
pub fn segment_point(nu_i: f64, z_i: f64, nu_b: f64, p: f64) -> (f64, f64) {
    (
        p * nu_i * z_i + (1.0 - p) * nu_b,
        p * nu_i / z_i + (1.0 - p) * nu_b,
    )
}

/// `(ν_f, z_f)` at `samples` evenly spaced values of `p` from 0 to 1.
pub fn reachable_set(nu_i: f64, z_i: f64, nu_b: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(GtoError::domain(format!("need at least 2 samples, got {samples}")));
    }
    TransformQuery::new(nu_i, z_i, nu_b, 1.0, nu_b).check()?;
    Ok((0..samples)
        .map(|k| {
            let p = k as f64 / (samples - 1) as f64;
            let (x, y) = segment_point(nu_i, z_i, nu_b, p);
            ((x * y).sqrt(), (x / y).sqrt().max(1.0))
        })
        .collect())
}

/// Feasibility with an arbitrary (possibly squeezed) Gaussian bath.
///
/// The symplectic-eigenvalue condition reads `A p² − 2B p + C = 0` with
/// `A = ν_b² − ν_i²`, `B = ν_b² − ξ ν_i ν_f`, `C = ν_b² − ν_f²`. Roots are tried
/// in ascending order and the first one in `[0, 1]` whose bath CM stays
/// positive is returned. If every `p` solves the equation, `p = 0` is tried
/// first since the positivity margin decreases with `p`.
pub fn squeezed_bath_feasible(q: &TransformQuery, tol: f64) -> Result<FeasibilityResult> {
    q.check()?;
    let vt = q
        .vartheta
        .ok_or_else(|| GtoError::invalid("squeezed-bath query needs vartheta"))?;
    let (c2, s2) = (vt.cos().powi(2), vt.sin().powi(2));
    let (zi, zf) = (q.z_i, q.z_f);
    let xi = 0.5 * (c2 * (zi / zf + zf / zi) + s2 * (zi * zf + 1.0 / (zi * zf)));
    let nb2 = q.nu_b * q.nu_b;
    let a = nb2 - q.nu_i * q.nu_i;
    let b = nb2 - xi * q.nu_i * q.nu_f;
    let c = nb2 - q.nu_f * q.nu_f;
    let scale = nb2.max(q.nu_i * q.nu_i).max(q.nu_f * q.nu_f).max(xi * q.nu_i * q.nu_f);
    let eps = tol * scale;

    let roots: Vec<f64> = if a.abs() <= eps {
        if b.abs() <= eps {
            if c.abs() <= eps {
                vec![0.0, 1.0]
            } else {
                return Ok(FeasibilityResult::no(Reason::InconsistentSystem));
            }
        } else {
            vec![c / (2.0 * b)]
        }
    } else {
        let disc = b * b - a * c;
        if disc < -eps * scale {
            return Ok(FeasibilityResult::no(Reason::InconsistentSystem));
        }
        let sq = disc.max(0.0).sqrt();
        let qq = b + b.signum() * sq;
        let mut r = if qq == 0.0 { vec![0.0] } else { vec![qq / a, c / qq] };
        r.sort_by(f64::total_cmp);
        r
    };

    let positivity = |p: f64| {
        zf * q.nu_f - p * q.nu_i * (c2 * zi + s2 / zi) >= -tol * scale.sqrt()
    };
    let mut in_range = false;
    for p in roots {
        if p < -tol || p > 1.0 + tol {
            continue;
        }
        in_range = true;
        let p = p.clamp(0.0, 1.0);
        if positivity(p) {
            return Ok(FeasibilityResult::ok(p));
        }
    }
    Ok(FeasibilityResult::no(if in_range {
        Reason::PositivityViolated
    } else {
        Reason::POutOfRange
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub satisfied: bool,
}

/// Necessary conditions: `z_f ≤ z_i` (phase-covariant bath only) and
/// `ν_f ≥ min(ν_i, ν_b)` (any Gaussian bath).
pub fn necessary_bounds(q: &TransformQuery) -> Result<Vec<BoundCheck>> {
    q.check()?;
    let mut out = Vec::with_capacity(2);
    if q.vartheta.is_none() {
        out.push(BoundCheck {
            name: "squeezing-nonincreasing",
            satisfied: q.z_f <= q.z_i + BOUND_SLACK,
        });
    }
    out.push(BoundCheck {
        name: "nu-above-min",
        satisfied: q.nu_f >= q.nu_i.min(q.nu_b) - BOUND_SLACK,
    });
    Ok(out)
}
