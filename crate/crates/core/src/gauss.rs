//! Gauss sums, root numbers and the closed-form character sums built from them.
//!
//! Each closed form here has a brute-force counterpart computed from the
//! character table, and callers are expected to compare the two.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{self, gcd, lcm};
use crate::characters::{unit_root, DirichletCharacter, RationalXi};
use crate::error::{invalid, Result};
use crate::summation::ComplexSum;

/// tau(chi) = sum_{a mod q} chi(a) e(a/q), summed from exact exponents.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let q = chi.modulus();
    let d = chi.denominator();
    let l = lcm(d, q);
    let mut acc = ComplexSum::new();
    for a in 0..q {
        if let Some(r) = chi.raw_exponent(a) {
            acc.add(unit_root(r * (l / d) + a * (l / q), l));
        }
    }
    acc.value()
}

/// epsilon_chi = tau(chi) / (i^kappa sqrt(q)); defined for primitive characters only.
pub fn root_number(chi: &DirichletCharacter) -> Result<Complex64> {
    if !chi.is_primitive() {
        return invalid(format!(
            "root number requested for imprimitive {}",
            chi.describe()
        ));
    }
    Ok(epsilon_from_tau(gauss_sum(chi), chi.kappa(), chi.modulus()))
}

fn epsilon_from_tau(tau: Complex64, kappa: u8, q: u64) -> Complex64 {
    let i_kappa = if kappa == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    tau / (i_kappa * (q as f64).sqrt())
}

/// Gauss sum data of a primitive character.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussData {
    pub tau: Complex64,
    pub epsilon: Complex64,
    pub modulus: u64,
    pub kappa: u8,
}

/// Residuals of the identities a primitive Gauss sum satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussResiduals {
    /// | |tau| - sqrt(q) |
    pub modulus: f64,
    /// | tau(chi) tau(conj chi) - chi(-1) q |
    pub conjugate_product: f64,
    /// | |epsilon| - 1 |
    pub root_number_modulus: f64,
    /// | tau(conj chi) - chi(-1) conj(tau(chi)) |
    pub conjugation: f64,
}

impl GaussData {
    pub fn new(chi: &DirichletCharacter) -> Result<Self> {
        let epsilon = root_number(chi)?;
        Ok(Self {
            tau: epsilon * sqrt_q_i_kappa(chi),
            epsilon,
            modulus: chi.modulus(),
            kappa: chi.kappa(),
        })
    }

    pub fn residuals(&self, chi: &DirichletCharacter) -> GaussResiduals {
        let q = self.modulus as f64;
        let tau_bar = gauss_sum(&chi.conj());
        GaussResiduals {
            modulus: (self.tau.norm() - q.sqrt()).abs(),
            conjugate_product: (self.tau * tau_bar - chi.parity_sign() * q).norm(),
            root_number_modulus: (self.epsilon.norm() - 1.0).abs(),
            conjugation: (tau_bar - chi.parity_sign() * self.tau.conj()).norm(),
        }
    }
}

fn sqrt_q_i_kappa(chi: &DirichletCharacter) -> Complex64 {
    let s = (chi.modulus() as f64).sqrt();
    if chi.kappa() == 0 {
        Complex64::new(s, 0.0)
    } else {
        Complex64::new(0.0, s)
    }
}

/// Both evaluations of C = sum_{a mod qk, (a,qk)=1} e(-ah/qk) chi(a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistedRamanujan {
    pub brute_force: Complex64,
    pub closed_form: Complex64,
}

impl TwistedRamanujan {
    pub fn discrepancy(&self) -> f64 {
        (self.brute_force - self.closed_form).norm()
    }
}

/// The twisted Ramanujan sum and its closed form conj(chi)(-h) chi(k) mu(k) tau(chi)
/// (zero when gcd(h, q) > 1).
pub fn twisted_ramanujan_sum(chi: &DirichletCharacter, h: i64, k: u64) -> Result<TwistedRamanujan> {
    if k == 0 {
        return invalid("k must be positive");
    }
    if gcd(h.unsigned_abs(), k) != 1 {
        return invalid(format!("gcd(h, k) must be 1 (h = {h}, k = {k})"));
    }
    let q = chi.modulus();
    let m = q * k;
    let d = chi.denominator();
    let l = lcm(d, m);
    let h_mod = arith::reduce_signed(h, m);
    let mut acc = ComplexSum::new();
    for a in 0..m {
        if gcd(a, m) != 1 {
            continue;
        }
        let r = chi.raw_exponent(a).expect("units of qk are units of q");
        // e(-a h / m) chi(a)
        let phase = (m - a * h_mod % m) % m;
        acc.add(unit_root(r * (l / d) + phase * (l / m), l));
    }
    let closed_form = if gcd(h.unsigned_abs(), q) == 1 {
        let mu = arith::moebius(k) as f64;
        chi.value(-h).conj() * chi.value_u(k) * mu * gauss_sum(chi)
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(TwistedRamanujan {
        brute_force: acc.value(),
        closed_form,
    })
}

/// C~_{chi, xi} = conj(chi)(h) chi(k) mu(k) q / phi(qk) when gcd(h, q) = 1, else 0.
pub fn c_tilde(chi: &DirichletCharacter, xi: &RationalXi) -> Complex64 {
    let q = chi.modulus();
    let (h, k) = (xi.h(), xi.k());
    if gcd(h, q) != 1 {
        return Complex64::new(0.0, 0.0);
    }
    let scale = arith::moebius(k) as f64 * q as f64 / arith::euler_phi(q * k) as f64;
    chi.value_u(h).conj() * chi.value_u(k) * scale
}

/// Both sides of tau(conj theta) = chi(q~) mu(q~) tau(chi) for theta = psi conj(chi) mod q q~.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductTau {
    #[serde(skip)]
    pub theta: DirichletCharacter,
    pub theta_modulus: u64,
    pub theta_label: usize,
    pub brute_force: Complex64,
    pub closed_form: Complex64,
}

impl ProductTau {
    pub fn discrepancy(&self) -> f64 {
        (self.brute_force - self.closed_form).norm()
    }
}

/// Builds theta(n) = psi(n) conj(chi)(n) modulo q q~ and evaluates both sides of the
/// product Gauss-sum relation. Agreement is not asserted here.
pub fn product_character_tau(chi: &DirichletCharacter, psi: &DirichletCharacter) -> Result<ProductTau> {
    let q_tilde = psi.modulus();
    let theta = psi.product_with(&chi.conj(), chi.modulus() * q_tilde)?;
    let brute_force = gauss_sum(&theta.conj());
    let closed_form =
        chi.value_u(q_tilde) * arith::moebius(q_tilde) as f64 * gauss_sum(chi);
    Ok(ProductTau {
        theta_modulus: theta.modulus(),
        theta_label: theta.label(),
        theta,
        brute_force,
        closed_form,
    })
}
