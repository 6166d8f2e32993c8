//! Compactly supported smooth weights.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quad;

/// Tolerance for the cached integral C_B.
pub const C_B_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BumpShape {
    /// exp(-1 / ((u - a)(b - u))) on (a, b).
    Standard,
    /// Equal to 1 on [a + ramp, b - ramp], with smooth steps of width `ramp` at both ends.
    Plateau { ramp: f64 },
}

/// A smooth weight supported on [a, b] with its integral cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpWeight {
    a: f64,
    b: f64,
    shape: BumpShape,
    c_b: f64,
}

fn check_support(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= a {
        return invalid(format!("bump support needs 0 < a < b, got [{a}, {b}]"));
    }
    Ok(())
}

/// The standard bump on [a, b].
pub fn default_bump(a: f64, b: f64) -> Result<BumpWeight> {
    BumpWeight::new(a, b, BumpShape::Standard)
}

/// exp(-1/x) for x > 0, else 0.
fn edge(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 (x <= 0) to 1 (x >= 1), with its derivative.
fn smooth_step(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let (f, g) = (edge(x), edge(1.0 - x));
    let (df, dg) = (f / (x * x), g / ((1.0 - x) * (1.0 - x)));
    let d = f + g;
    (f / d, (df * g + f * dg) / (d * d))
}

impl BumpWeight {
    pub fn new(a: f64, b: f64, shape: BumpShape) -> Result<Self> {
        check_support(a, b)?;
        if let BumpShape::Plateau { ramp } = shape {
            if !(ramp > 0.0 && 2.0 * ramp <= b - a) {
                return invalid(format!("plateau ramp {ramp} must lie in (0, (b - a)/2]"));
            }
        }
        let mut bump = Self {
            a,
            b,
            shape,
            c_b: 0.0,
        };
        bump.c_b = quad::adaptive_real(|u| bump.value(u), a, b, 1e-3 * C_B_TOLERANCE)?;
        Ok(bump)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn shape(&self) -> BumpShape {
        self.shape
    }

    /// C_B, the integral of B over the positive reals.
    pub fn integral(&self) -> f64 {
        self.c_b
    }

    pub fn value(&self, u: f64) -> f64 {
        self.value_and_derivative(u).0
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.value_and_derivative(u).1
    }

    pub fn value_and_derivative(&self, u: f64) -> (f64, f64) {
        if !(u > self.a && u < self.b) {
            return (0.0, 0.0);
        }
        match self.shape {
            BumpShape::Standard => {
                let g = (u - self.a) * (self.b - u);
                let v = (-1.0 / g).exp();
                if v == 0.0 {
                    return (0.0, 0.0);
                }
                (v, v * (self.a + self.b - 2.0 * u) / (g * g))
            }
            BumpShape::Plateau { ramp } => {
                let (l, dl) = smooth_step((u - self.a) / ramp);
                let (r, dr) = smooth_step((self.b - u) / ramp);
                (l * r, (dl * r - l * dr) / ramp)
            }
        }
    }

    /// Short description used in reports, e.g. "standard[1,2]".
    pub fn describe(&self) -> String {
        match self.shape {
            BumpShape::Standard => format!("standard[{},{}]", self.a, self.b),
            BumpShape::Plateau { ramp } => format!("plateau[{},{}] ramp {}", self.a, self.b, ramp),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;
    use proptest::prelude::*;

    /// Composite Gauss-Legendre with `panels` equal panels of 20 nodes.
    fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let (x, w) = gauss_legendre(20);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let c = a + (i as f64 + 0.5) * h;
                x.iter().zip(&w).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn standard_values_and_support() {
        let b = default_bump(1.0, 2.0).unwrap();
        assert!((b.value(1.5) - (-4.0f64).exp()).abs() < 1e-16);
        assert!((b.value(1.5) - 0.018_315_6).abs() < 1e-7);
        for u in [1.0, 2.0, 0.999, 2.001, -3.0, 0.0] {
            assert_eq!(b.value(u), 0.0);
            assert_eq!(b.derivative(u), 0.0);
        }
        assert_eq!(b.derivative(1.5), 0.0);
    }

    #[test]
    fn integral_is_stable_under_node_doubling() {
        let b = default_bump(1.0, 2.0).unwrap();
        let coarse = composite(|u| b.value(u), 1.0, 2.0, 16);
        let fine = composite(|u| b.value(u), 1.0, 2.0, 32);
        assert!((coarse - fine).abs() < 1e-12);
        assert!((b.integral() - fine).abs() < C_B_TOLERANCE);
        assert!(b.integral() > 0.0);
    }

    #[test]
    fn rejects_bad_support() {
        assert!(default_bump(0.0, 1.0).is_err());
        assert!(default_bump(-1.0, 1.0).is_err());
        assert!(default_bump(2.0, 2.0).is_err());
        assert!(default_bump(2.0, 1.0).is_err());
        assert!(BumpWeight::new(1.0, 2.0, BumpShape::Plateau { ramp: 0.6 }).is_err());
    }

    #[test]
    fn plateau_integral_approaches_width() {
        let b = BumpWeight::new(1.0, 3.0, BumpShape::Plateau { ramp: 0.1 }).unwrap();
        assert_eq!(b.value(2.0), 1.0);
        // each step integrates to ramp/2, giving (b - a) - ramp
        assert!((b.integral() - 1.9).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn derivative_matches_difference_quotient(u in 1.05f64..1.95, ramp in 0.05f64..0.5) {
            for bump in [
                default_bump(1.0, 2.0).unwrap(),
                BumpWeight::new(1.0, 2.0, BumpShape::Plateau { ramp }).unwrap(),
            ] {
                let h = 1e-6;
                let fd = (bump.value(u + h) - bump.value(u - h)) / (2.0 * h);
                let d = bump.derivative(u);
                prop_assert!((fd - d).abs() <= 1e-5 * (1.0 + d.abs()), "{} vs {}", fd, d);
            }
        }

        #[test]
        fn vanishes_outside_support(a in 0.1f64..5.0, w in 0.1f64..5.0, u in -10.0f64..20.0) {
            let bump = default_bump(a, a + w).unwrap();
            if u <= a || u >= a + w {
                prop_assert_eq!(bump.value(u), 0.0);
            } else {
                prop_assert!(bump.value(u) >= 0.0);
            }
        }
    }
}
