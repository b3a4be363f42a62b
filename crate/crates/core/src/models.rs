//! Hyperbolic models and the isometries into the Klein-Beltrami ball.
//!
//! Three models are supported:
//!
//! | Model    | Coordinates                      | Geodesics                 |
//! |----------|----------------------------------|---------------------------|
//! | Lorentz  | `n + 1` entries, upper hyperboloid sheet | intersections with planes |
//! | Poincaré | `n` entries, open unit ball      | arcs orthogonal to the boundary |
//! | Klein    | `n` entries, open unit ball      | straight chords           |
//!
//! The Klein ball is the working model of the crate: straight geodesics make
//! its Voronoi diagram an affine object, which the power-diagram reduction
//! relies on.
//!
//! All distances are evaluated as `arccosh(1 + t)` where `t` is computed in
//! a cancellation-free form. The textbook arguments are:
//!
//! ```text
//! Klein:    cosh d = (1 - <x,y>) / sqrt((1 - |x|^2)(1 - |y|^2))
//! Poincaré: cosh d = 1 + 2|x - y|^2 / ((1 - |x|^2)(1 - |y|^2))
//! Lorentz:  cosh d = -<z, z'>_L
//! ```
//!
//! The Klein numerator is written `1 - <x,y>` (not `<x,y> - 1`) so that the
//! argument is at least one inside the ball, and the Lorentz argument carries
//! the minus sign of the Minkowski form for the same reason.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Points closer than this (in Euclidean norm) to the ideal boundary are rejected.
pub const DEFAULT_BOUNDARY_MARGIN: f64 = 1e-9;

/// Allowed residual of `<z,z>_L + 1`, relative to `z0^2`.
pub const DEFAULT_LORENTZ_TOLERANCE: f64 = 1e-9;

/// `arccosh` arguments this far below one are rounding noise and clamp to one.
pub const ARCCOSH_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Lorentz,
    Poincare,
    Klein,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Lorentz => "lorentz",
            Model::Poincare => "poincare",
            Model::Klein => "klein",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorentz" | "hyperboloid" => Ok(Model::Lorentz),
            "poincare" | "poincaré" => Ok(Model::Poincare),
            "klein" | "beltrami" | "klein-beltrami" => Ok(Model::Klein),
            other => Err(Error::Parse(format!("unknown model '{other}'"))),
        }
    }
}

/// A point tagged with the model its coordinates live in.
///
/// Construct through [`Hyperbolic::point`] so the model invariants are checked.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicPoint {
    model: Model,
    coords: Vec<f64>,
}

impl HyperbolicPoint {
    pub fn model(&self) -> Model {
        self.model
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Intrinsic dimension `n` (the Lorentz ambient space has `n + 1` entries).
    pub fn dim(&self) -> usize {
        match self.model {
            Model::Lorentz => self.coords.len() - 1,
            _ => self.coords.len(),
        }
    }
}

/// Validation tolerances plus the model conversions and distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperbolic {
    pub boundary_margin: f64,
    pub lorentz_tolerance: f64,
}

impl Default for Hyperbolic {
    fn default() -> Self {
        Self {
            boundary_margin: DEFAULT_BOUNDARY_MARGIN,
            lorentz_tolerance: DEFAULT_LORENTZ_TOLERANCE,
        }
    }
}

impl Hyperbolic {
    pub fn with_boundary_margin(boundary_margin: f64) -> Self {
        Self {
            boundary_margin,
            ..Self::default()
        }
    }

    /// Builds a point after checking the invariants of `model`.
    pub fn point(&self, model: Model, coords: Vec<f64>) -> Result<HyperbolicPoint> {
        let p = HyperbolicPoint { model, coords };
        self.validate(&p)?;
        Ok(p)
    }

    pub fn klein(&self, coords: Vec<f64>) -> Result<HyperbolicPoint> {
        self.point(Model::Klein, coords)
    }

    pub fn poincare(&self, coords: Vec<f64>) -> Result<HyperbolicPoint> {
        self.point(Model::Poincare, coords)
    }

    pub fn lorentz(&self, coords: Vec<f64>) -> Result<HyperbolicPoint> {
        self.point(Model::Lorentz, coords)
    }

    pub fn validate(&self, p: &HyperbolicPoint) -> Result<()> {
        if p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {:?}", p.coords)));
        }
        match p.model {
            Model::Poincare | Model::Klein => {
                if p.coords.is_empty() {
                    return Err(Error::InvalidPoint("empty coordinate vector".into()));
                }
                self.check_ball(&p.coords, p.model)
            }
            Model::Lorentz => {
                if p.coords.len() < 2 {
                    return Err(Error::InvalidPoint(
                        "Lorentz points need at least two coordinates".into(),
                    ));
                }
                let z0 = p.coords[0];
                if z0 <= 0.0 {
                    return Err(Error::InvalidPoint(format!("Lorentz z0 = {z0} is not positive")));
                }
                let residual = minkowski(&p.coords, &p.coords) + 1.0;
                if residual.abs() > self.lorentz_tolerance * z0 * z0 {
                    return Err(Error::InvalidPoint(format!(
                        "off the hyperboloid: <z,z>_L + 1 = {residual:e}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn check_ball(&self, coords: &[f64], model: Model) -> Result<()> {
        let norm = norm_sq(coords).sqrt();
        if norm < 1.0 - self.boundary_margin {
            Ok(())
        } else {
            Err(Error::InvalidPoint(format!(
                "{model} point has norm {norm} (must be below 1 - {})",
                self.boundary_margin
            )))
        }
    }

    fn expect(&self, p: &HyperbolicPoint, model: Model) -> Result<()> {
        if p.model != model {
            return Err(Error::InvalidPoint(format!(
                "expected a {model} point, got {}",
                p.model
            )));
        }
        self.validate(p)
    }

    /// `z -> (z1/z0, ..., zn/z0)`.
    pub fn lorentz_to_klein(&self, p: &HyperbolicPoint) -> Result<HyperbolicPoint> {
        self.expect(p, Model::Lorentz)?;
        let z0 = p.coords[0];
        let k: Vec<f64> = p.coords[1..].iter().map(|z| z / z0).collect();
        self.klein(k)
    }

    /// `z -> 2z / (1 + |z|^2)`.
    pub fn poincare_to_klein(&self, p: &HyperbolicPoint) -> Result<HyperbolicPoint> {
        self.expect(p, Model::Poincare)?;
        let scale = 2.0 / (1.0 + norm_sq(&p.coords));
        self.klein(p.coords.iter().map(|z| z * scale).collect())
    }

    /// Inverse of [`Self::poincare_to_klein`]: `k -> k / (1 + sqrt(1 - |k|^2))`.
    pub fn klein_to_poincare(&self, p: &HyperbolicPoint) -> Result<HyperbolicPoint> {
        self.expect(p, Model::Klein)?;
        let scale = 1.0 / (1.0 + (1.0 - norm_sq(&p.coords)).sqrt());
        self.poincare(p.coords.iter().map(|k| k * scale).collect())
    }

    /// Inverse of [`Self::lorentz_to_klein`]: `k -> (1, k) / sqrt(1 - |k|^2)`.
    pub fn klein_to_lorentz(&self, p: &HyperbolicPoint) -> Result<HyperbolicPoint> {
        self.expect(p, Model::Klein)?;
        let z0 = 1.0 / (1.0 - norm_sq(&p.coords)).sqrt();
        let mut z = Vec::with_capacity(p.coords.len() + 1);
        z.push(z0);
        z.extend(p.coords.iter().map(|k| k * z0));
        self.lorentz(z)
    }

    /// Converts any supported model into the Klein ball.
    pub fn to_klein(&self, p: &HyperbolicPoint) -> Result<HyperbolicPoint> {
        match p.model {
            Model::Klein => {
                self.validate(p)?;
                Ok(p.clone())
            }
            Model::Poincare => self.poincare_to_klein(p),
            Model::Lorentz => self.lorentz_to_klein(p),
        }
    }

    pub fn klein_distance(&self, x: &HyperbolicPoint, y: &HyperbolicPoint) -> Result<f64> {
        self.expect(x, Model::Klein)?;
        self.expect(y, Model::Klein)?;
        same_dim(&x.coords, &y.coords)?;
        klein_distance(&x.coords, &y.coords)
    }

    pub fn poincare_distance(&self, x: &HyperbolicPoint, y: &HyperbolicPoint) -> Result<f64> {
        self.expect(x, Model::Poincare)?;
        self.expect(y, Model::Poincare)?;
        same_dim(&x.coords, &y.coords)?;
        poincare_distance(&x.coords, &y.coords)
    }

    pub fn lorentz_distance(&self, x: &HyperbolicPoint, y: &HyperbolicPoint) -> Result<f64> {
        self.expect(x, Model::Lorentz)?;
        self.expect(y, Model::Lorentz)?;
        same_dim(&x.coords, &y.coords)?;
        lorentz_distance(&x.coords, &y.coords)
    }

    /// Geodesic distance in whatever model both points share.
    pub fn distance(&self, x: &HyperbolicPoint, y: &HyperbolicPoint) -> Result<f64> {
        match x.model {
            Model::Klein => self.klein_distance(x, y),
            Model::Poincare => self.poincare_distance(x, y),
            Model::Lorentz => self.lorentz_distance(x, y),
        }
    }
}

fn same_dim(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch(x.len(), y.len()))
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

/// Lorentzian product `-z0 z0' + sum zi zi'`.
pub fn minkowski(z: &[f64], w: &[f64]) -> f64 {
    -z[0] * w[0] + dot(&z[1..], &w[1..])
}

/// `arccosh(1 + t)`, with `t` slightly below zero treated as rounding noise.
fn arccosh1p(t: f64) -> Result<f64> {
    if t.is_nan() || t < -ARCCOSH_CLAMP {
        return Err(Error::NumericalDomain(format!("arccosh argument 1 + ({t:e}) < 1")));
    }
    let t = t.max(0.0);
    Ok((t + (t * (t + 2.0)).sqrt()).ln_1p())
}

/// Klein-ball geodesic distance on raw coordinates (no boundary check).
///
/// `cosh d - 1 = (a^2 - b) / (sqrt(b) (a + sqrt(b)))` with `a = 1 - <x,y>` and
/// `b = (1 - |x|^2)(1 - |y|^2)`; the numerator `a^2 - b` equals
/// `|x - y|^2 - |x ∧ y|^2` and is evaluated in that form.
pub fn klein_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    let w: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
    let mut wedge = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let m = x[i] * w[j] - x[j] * w[i];
            wedge += m * m;
        }
    }
    let num = norm_sq(&w) - wedge;
    let b = (1.0 - norm_sq(x)) * (1.0 - norm_sq(y));
    if b <= 0.0 {
        return Err(Error::NumericalDomain("Klein point on or outside the unit sphere".into()));
    }
    let a = 1.0 - dot(x, y);
    let sb = b.sqrt();
    arccosh1p(num / (sb * (a + sb)))
}

/// Poincaré-ball geodesic distance on raw coordinates.
pub fn poincare_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let b = (1.0 - norm_sq(x)) * (1.0 - norm_sq(y));
    if b <= 0.0 {
        return Err(Error::NumericalDomain("Poincaré point on or outside the unit sphere".into()));
    }
    arccosh1p(2.0 * diff / b)
}

/// Hyperboloid geodesic distance `arccosh(-<z, z'>_L)` on raw coordinates.
///
/// `-<z,z'>_L - 1` is evaluated as `|z - z'|_L^2 / 2` plus the (tiny)
/// hyperboloid residuals of both inputs, which is the same quantity without
/// the cancellation of the direct product.
pub fn lorentz_distance(z: &[f64], w: &[f64]) -> Result<f64> {
    let d: Vec<f64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
    let t = 0.5 * minkowski(&d, &d)
        - 0.5 * (minkowski(z, z) + 1.0)
        - 0.5 * (minkowski(w, w) + 1.0);
    arccosh1p(t)
}
