//! End-to-end checks through the public API, each against an oracle built here.

use std::f64::consts::PI;

use lchi_core::bump::default_bump;
use lchi_core::characters::{character, primitive_characters, RationalXi};
use lchi_core::gauss::gauss_sum;
use lchi_core::lfunc::LFunction;
use lchi_core::sums::{PrimeTerms, Xi, ZeroTerms};
use lchi_core::zeros::scan_zeros;
use num_complex::Complex64;

#[test]
fn gauss_sums_match_the_defining_sum() {
    for q in [3u64, 5, 7, 8, 12, 15] {
        for chi in primitive_characters(q).unwrap() {
            let direct: Complex64 = (1..q)
                .map(|a| chi.value_u(a) * Complex64::from_polar(1.0, 2.0 * PI * a as f64 / q as f64))
                .sum();
            assert!((gauss_sum(&chi) - direct).norm() < 1e-12, "{}", chi.describe());
        }
    }
}

#[test]
fn l_values_match_the_dirichlet_series_far_right() {
    // At sigma = 4 the tail after 20000 terms is below 1e-12.
    for (q, label) in [(1u64, 0usize), (4, 1), (5, 1), (7, 2)] {
        let chi = character(q, label).unwrap();
        let s = Complex64::new(4.0, 3.5);
        let series: Complex64 = (1..20_000u64)
            .map(|n| chi.value_u(n) * (-s * (n as f64).ln()).exp())
            .sum();
        let v = LFunction::new(&chi).value(s).unwrap();
        assert!((v - series).norm() < 1e-11, "q={q}: {v} vs {series}");
    }
}

#[test]
fn complex_character_zeros_mirror_the_conjugate() {
    let chi = character(5, 1).unwrap();
    let a = scan_zeros(&LFunction::new(&chi), 30.0, None).unwrap();
    let b = scan_zeros(&LFunction::new(&chi.conj()), 30.0, None).unwrap();
    let mut mirrored: Vec<f64> = b.ordinates().iter().map(|g| -g).collect();
    mirrored.sort_by(f64::total_cmp);
    let ours = a.ordinates();
    assert_eq!(ours.len(), mirrored.len());
    for (x, y) in ours.iter().zip(&mirrored) {
        assert!((x - y).abs() < 1e-8);
    }
    // Non-real: the zero set is not symmetric under t -> -t.
    assert!(ours.iter().zip(ours.iter().rev()).any(|(x, y)| (x + y).abs() > 1e-3));
}

#[test]
fn smooth_prime_sum_matches_direct_evaluation() {
    let chi = character(4, 1).unwrap();
    let xi = Xi::Rational(RationalXi::new(1, 3).unwrap());
    let bump = default_bump(1.0, 2.0).unwrap();
    let x = 7.5;
    let pt = PrimeTerms::new(&chi, &xi, 64);
    let got = pt.smooth(4, x, &bump);
    // (tau(conj chi)/q) sum_n Lambda(n) chi(n) e(-n xi/q) B(n/(qX))
    let tau_bar = gauss_sum(&chi.conj());
    let lambda = |n: u64| -> f64 {
        let p = (2..=n).find(|d| n % d == 0).unwrap();
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        if m == 1 { (p as f64).ln() } else { 0.0 }
    };
    let mut want = Complex64::new(0.0, 0.0);
    for n in 2..=60u64 {
        let w = bump.value(n as f64 / (4.0 * x));
        if w > 0.0 {
            let phase = Complex64::from_polar(1.0, -2.0 * PI * n as f64 / 12.0);
            want += chi.value_u(n) * phase * lambda(n) * w;
        }
    }
    want *= tau_bar / 4.0;
    assert!((got - want).norm() < 1e-12, "{got} vs {want}");
}

#[test]
fn zero_sum_is_independent_of_sharding() {
    let chi = character(3, 1).unwrap();
    let xi = Xi::Rational(RationalXi::new(1, 2).unwrap());
    let zl = scan_zeros(&LFunction::new(&chi), 120.0, None).unwrap();
    let zt = ZeroTerms::new(&chi, &xi, &zl).unwrap();
    let whole = zt.sigma1(120.0).unwrap();
    for shards in [1, 2, 7, 64] {
        let s = zt.sigma1_sharded(120.0, shards).unwrap();
        assert_eq!(s.re.to_bits(), whole.re.to_bits());
        assert_eq!(s.im.to_bits(), whole.im.to_bits());
    }
}
