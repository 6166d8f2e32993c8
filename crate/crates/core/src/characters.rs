//! Dirichlet characters modulo q with exact rational value exponents.
//!
//! The unit group (Z/qZ)^* is split into cyclic components, one per odd prime
//! power (generated by its least primitive root) and up to two for the power
//! of two (generated by -1 and 5). A character is fixed by one exponent per
//! component, and characters are labelled by the lexicographic order of those
//! exponent tuples.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, lcm};
use crate::error::{invalid, LchiError, Result};

/// Largest modulus accepted by the character machinery.
pub const MAX_MODULUS: u64 = 10_000;

/// `e(num/den) = exp(2 pi i num/den)`, exact at multiples of a quarter turn.
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 4 * num % den == 0 {
        return match 4 * num / den {
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // Map into (-1/2, 1/2] before scaling by 2 pi.
    let signed = if 2 * num <= den {
        num as f64 / den as f64
    } else {
        -((den - num) as f64 / den as f64)
    };
    let (s, c) = (std::f64::consts::TAU * signed).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Component {
    /// Prime power this component lives in.
    prime_power: u64,
    /// Generator lifted to Z/qZ (congruent to 1 modulo the other prime powers).
    generator: u64,
    order: u64,
    kind: ComponentKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum ComponentKind {
    /// Cyclic group (Z/p^e)^* for odd p; `log_table[a mod p^e]` is the discrete log.
    Odd { log_table: Vec<u64> },
    /// The {+1, -1} factor of (Z/2^e)^*, e >= 2.
    TwoSign,
    /// The <5> factor of (Z/2^e)^*, e >= 3.
    TwoFive { log_table: Vec<u64> },
}

impl Component {
    fn log(&self, a: u64) -> u64 {
        let r = a % self.prime_power;
        match &self.kind {
            ComponentKind::Odd { log_table } => log_table[r as usize],
            ComponentKind::TwoSign => u64::from(r % 4 == 3),
            ComponentKind::TwoFive { log_table } => {
                let b = if r % 4 == 3 { self.prime_power - r } else { r };
                log_table[b as usize]
            }
        }
    }
}

/// Decomposition of (Z/qZ)^* used to enumerate and identify characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterGroup {
    modulus: u64,
    components: Vec<Component>,
    exponent: u64,
}

fn crt_lift(residue: u64, prime_power: u64, modulus: u64) -> u64 {
    // x = residue mod prime_power, x = 1 mod modulus / prime_power
    let rest = modulus / prime_power;
    if rest == 1 {
        return residue % modulus;
    }
    let inv = arith::inverse_mod(rest % prime_power, prime_power).expect("coprime parts");
    // x = 1 + rest * t with rest * t = residue - 1 (mod prime_power)
    let target = (residue + prime_power - 1) % prime_power;
    let t = target as u128 * inv as u128 % prime_power as u128;
    ((1 + rest as u128 * t) % modulus as u128) as u64
}

impl CharacterGroup {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return invalid("modulus must be positive");
        }
        if modulus > MAX_MODULUS {
            return invalid(format!("modulus {modulus} exceeds {MAX_MODULUS}"));
        }
        let mut components = Vec::new();
        for (p, e) in arith::factorize(modulus) {
            let pe = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    components.push(Component {
                        prime_power: pe,
                        generator: crt_lift(pe - 1, pe, modulus),
                        order: 2,
                        kind: ComponentKind::TwoSign,
                    });
                }
                if e >= 3 {
                    let order = pe / 4;
                    let mut log_table = vec![0; pe as usize];
                    let mut x = 1u64;
                    for j in 0..order {
                        log_table[x as usize] = j;
                        x = x * 5 % pe;
                    }
                    components.push(Component {
                        prime_power: pe,
                        generator: crt_lift(5, pe, modulus),
                        order,
                        kind: ComponentKind::TwoFive { log_table },
                    });
                }
            } else {
                let g = arith::least_primitive_root(p, e);
                let order = pe / p * (p - 1);
                let mut log_table = vec![0; pe as usize];
                let mut x = 1u64;
                for j in 0..order {
                    log_table[x as usize] = j;
                    x = x * g % pe;
                }
                components.push(Component {
                    prime_power: pe,
                    generator: crt_lift(g, pe, modulus),
                    order,
                    kind: ComponentKind::Odd { log_table },
                });
            }
        }
        let exponent = components.iter().fold(1, |acc, c| lcm(acc, c.order));
        Ok(Self {
            modulus,
            components,
            exponent,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of characters, phi(q).
    pub fn size(&self) -> usize {
        self.components.iter().map(|c| c.order as usize).product()
    }

    /// Generators of the cyclic components, lifted to residues mod q.
    pub fn generators(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.generator).collect()
    }

    /// Orders of the cyclic components.
    pub fn orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    fn exponents_of_label(&self, mut label: usize) -> Vec<u64> {
        let mut out = vec![0; self.components.len()];
        for (slot, c) in out.iter_mut().zip(&self.components).rev() {
            *slot = (label % c.order as usize) as u64;
            label /= c.order as usize;
        }
        out
    }

    fn label_of_exponents(&self, exps: &[u64]) -> usize {
        exps.iter()
            .zip(&self.components)
            .fold(0usize, |acc, (&j, c)| acc * c.order as usize + j as usize)
    }

    /// The character with the given label.
    pub fn character(&self, label: usize) -> Result<DirichletCharacter> {
        if label >= self.size() {
            return Err(LchiError::InvalidArgument(format!(
                "unknown character label {label} modulo {} (there are {})",
                self.modulus,
                self.size()
            )));
        }
        Ok(self.from_exponents(&self.exponents_of_label(label)))
    }

    /// All characters in label order.
    pub fn characters(&self) -> Vec<DirichletCharacter> {
        (0..self.size())
            .map(|l| self.from_exponents(&self.exponents_of_label(l)))
            .collect()
    }

    fn from_exponents(&self, exps: &[u64]) -> DirichletCharacter {
        let q = self.modulus;
        let den = self.exponent;
        let values: Vec<Option<u64>> = (0..q)
            .map(|a| {
                if gcd(a, q) != 1 {
                    return None;
                }
                let num = exps
                    .iter()
                    .zip(&self.components)
                    .map(|(&j, c)| j * c.log(a) % c.order * (den / c.order))
                    .sum::<u64>()
                    % den;
                Some(num)
            })
            .collect();
        DirichletCharacter::from_table(q, self.label_of_exponents(exps), exps.to_vec(), den, values)
    }

    /// Recognizes a function on Z/qZ given by exact exponents as a character of this group.
    ///
    /// `value(a)` returns `None` off the units and `Some((num, den))` for `e(num/den)` otherwise.
    pub fn identify<F>(&self, value: F) -> Result<DirichletCharacter>
    where
        F: Fn(u64) -> Option<(u64, u64)>,
    {
        let mut exps = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let (num, den) = value(c.generator)
                .ok_or_else(|| LchiError::InvalidArgument("vanishes on a unit".into()))?;
            if (num * c.order) % den != 0 {
                return invalid("value at a generator is not a root of the right order");
            }
            exps.push((num * c.order / den) % c.order);
        }
        let chi = self.from_exponents(&exps);
        for a in 0..self.modulus {
            let expected = value(a).map(|(n, d)| reduce_fraction(n % d, d));
            if expected != chi.exponent(a) {
                return invalid(format!("not a character: mismatch at a = {a}"));
            }
        }
        Ok(chi)
    }
}

fn reduce_fraction(num: u64, den: u64) -> (u64, u64) {
    let g = gcd(num, den);
    (num / g, den / g)
}

/// A Dirichlet character modulo q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    label: usize,
    generator_exponents: Vec<u64>,
    denominator: u64,
    /// Entry a: `None` when gcd(a, q) > 1, else the numerator r with chi(a) = e(r / denominator).
    values: Vec<Option<u64>>,
    kappa: u8,
    conductor: u64,
}

impl DirichletCharacter {
    fn from_table(
        modulus: u64,
        label: usize,
        generator_exponents: Vec<u64>,
        denominator: u64,
        values: Vec<Option<u64>>,
    ) -> Self {
        let minus_one = values[(modulus - 1) as usize].expect("-1 is a unit");
        let kappa = u8::from(minus_one != 0);
        let mut chi = Self {
            modulus,
            label,
            generator_exponents,
            denominator,
            values,
            kappa,
            conductor: modulus,
        };
        chi.conductor = chi.compute_conductor();
        chi
    }

    fn compute_conductor(&self) -> u64 {
        let q = self.modulus;
        (1..=q)
            .filter(|f| q % f == 0)
            .find(|&f| {
                (1..q)
                    .step_by(f as usize)
                    .all(|a| self.values[a as usize].is_none_or(|r| r == 0))
            })
            .unwrap_or(q)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn generator_exponents(&self) -> &[u64] {
        &self.generator_exponents
    }

    /// 0 when chi(-1) = 1, 1 when chi(-1) = -1.
    pub fn kappa(&self) -> u8 {
        self.kappa
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.values.iter().all(|v| v.is_none_or(|r| r == 0))
    }

    /// Real-valued (quadratic or principal) characters.
    pub fn is_real(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.is_none_or(|r| 2 * r % self.denominator == 0))
    }

    /// chi(n) = e(num/den) in lowest terms, or `None` when gcd(n, q) > 1.
    pub fn exponent(&self, n: u64) -> Option<(u64, u64)> {
        self.values[(n % self.modulus) as usize].map(|r| reduce_fraction(r, self.denominator))
    }

    /// Numerator of chi(n) over the common denominator [`Self::denominator`].
    pub fn raw_exponent(&self, n: u64) -> Option<u64> {
        self.values[(n % self.modulus) as usize]
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// chi(n) as a complex number (0 off the units); negative n reduce mod q.
    pub fn value(&self, n: i64) -> Complex64 {
        let a = arith::reduce_signed(n, self.modulus);
        match self.values[a as usize] {
            Some(r) => unit_root(r, self.denominator),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// chi(n) for unsigned n.
    pub fn value_u(&self, n: u64) -> Complex64 {
        match self.values[(n % self.modulus) as usize] {
            Some(r) => unit_root(r, self.denominator),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// chi(-1) = +1 or -1.
    pub fn parity_sign(&self) -> f64 {
        if self.kappa == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// The complex-conjugate character.
    pub fn conj(&self) -> DirichletCharacter {
        let d = self.denominator;
        let values = self
            .values
            .iter()
            .map(|v| v.map(|r| (d - r) % d))
            .collect();
        // Orders are recovered from the label arithmetic of the same modulus.
        let group = CharacterGroup::new(self.modulus).expect("valid modulus");
        let exps: Vec<u64> = self
            .generator_exponents
            .iter()
            .zip(group.orders())
            .map(|(&j, n)| (n - j) % n)
            .collect();
        let label = group.label_of_exponents(&exps);
        DirichletCharacter {
            modulus: self.modulus,
            label,
            generator_exponents: exps,
            denominator: d,
            values,
            kappa: self.kappa,
            conductor: self.conductor,
        }
    }

    /// The character n -> self(n) * other(n) read modulo `modulus` (a common multiple of both moduli).
    pub fn product_with(&self, other: &DirichletCharacter, modulus: u64) -> Result<DirichletCharacter> {
        if modulus % self.modulus != 0 || modulus % other.modulus != 0 {
            return invalid("product modulus must be a common multiple");
        }
        let group = CharacterGroup::new(modulus)?;
        let den = lcm(self.denominator, other.denominator);
        group.identify(|a| {
            let x = self.raw_exponent(a)?;
            let y = other.raw_exponent(a)?;
            if gcd(a, modulus) != 1 {
                return None;
            }
            Some(((x * (den / self.denominator) + y * (den / other.denominator)) % den, den))
        })
    }

    /// Short description used in reports.
    pub fn describe(&self) -> String {
        format!(
            "chi mod {} #{} (conductor {}, kappa {})",
            self.modulus, self.label, self.conductor, self.kappa
        )
    }
}

/// All phi(q) characters modulo q, in label order.
pub fn enumerate_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(CharacterGroup::new(q)?.characters())
}

/// The character with label `label` modulo `q`.
pub fn character(q: u64, label: usize) -> Result<DirichletCharacter> {
    CharacterGroup::new(q)?.character(label)
}

/// Primitive characters modulo q, in label order.
pub fn primitive_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(enumerate_characters(q)?
        .into_iter()
        .filter(DirichletCharacter::is_primitive)
        .collect())
}

/// A positive rational h/k stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalXi {
    h: u64,
    k: u64,
}

impl RationalXi {
    pub fn new(h: u64, k: u64) -> Result<Self> {
        if h == 0 || k == 0 {
            return invalid("malformed xi: numerator and denominator must be positive");
        }
        let g = gcd(h, k);
        Ok(Self { h: h / g, k: k / g })
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn value(&self) -> f64 {
        self.h as f64 / self.k as f64
    }
}

impl fmt::Display for RationalXi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.h, self.k)
    }
}

impl FromStr for RationalXi {
    type Err = LchiError;

    fn from_str(s: &str) -> Result<Self> {
        let malformed = || LchiError::InvalidArgument(format!("malformed xi: {s:?}"));
        let (h, k) = match s.split_once('/') {
            Some((h, k)) => (h.trim(), k.trim()),
            None => (s.trim(), "1"),
        };
        let h: u64 = h.parse().map_err(|_| malformed())?;
        let k: u64 = k.parse().map_err(|_| malformed())?;
        if h == 0 || k == 0 {
            return Err(malformed());
        }
        RationalXi::new(h, k)
    }
}
