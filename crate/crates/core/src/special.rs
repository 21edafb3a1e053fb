//! Polylogarithms, Riemann zeta values and Bernoulli numbers.

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// ζ(3), Apéry's constant.
pub const ZETA_3: f64 = 1.202_056_903_159_594_285_399_738_161_511_45;
/// ζ(-3/2), the coefficient of the half-integer Euler-Maclaurin term.
pub const ZETA_MINUS_3_2: f64 = -0.025_485_201_889_833_035_949_542_986_910_7;

/// The two zeta values entering the low-temperature corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaConstants<T> {
    pub zeta_3: T,
    pub zeta_minus_3_2: T,
}

impl<T: Real> ZetaConstants<T> {
    pub fn new() -> Self {
        Self {
            zeta_3: lit(ZETA_3),
            zeta_minus_3_2: lit(ZETA_MINUS_3_2),
        }
    }
}

impl<T: Real> Default for ZetaConstants<T> {
    fn default() -> Self {
        Self::new()
    }
}

pub fn zeta_minus_three_halves<T: Real>() -> T {
    lit(ZETA_MINUS_3_2)
}

// B_2 .. B_20 as exact fractions.
const BERNOULLI_EVEN: [(i64, i64); 10] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
];

/// Exact numerator and denominator of the Bernoulli number B_{2k}, 2k ∈ {2, 4, ..., 20}.
pub fn bernoulli_fraction(two_k: u32) -> Result<(i64, i64)> {
    if two_k == 0 || two_k % 2 == 1 || two_k > 20 {
        return Err(Error::domain(
            "bernoulli",
            format!("index {two_k} outside the tabulated even range 2..=20"),
        ));
    }
    Ok(BERNOULLI_EVEN[(two_k / 2 - 1) as usize])
}

/// B_{2k} as a real number.
pub fn bernoulli<T: Real>(two_k: u32) -> Result<T> {
    let (num, den) = bernoulli_fraction(two_k)?;
    Ok(lit::<T>(num as f64) / lit::<T>(den as f64))
}

/// ζ(s) for integer s ≥ 2, by direct summation with an Euler-Maclaurin tail.
pub fn zeta_int<T: Real>(s: u32) -> Result<T> {
    if s < 2 {
        return Err(Error::Divergence(format!("zeta({s}) has a pole or needs continuation")));
    }
    const N: u32 = 16;
    let sf: T = lit(s as f64);
    let n: T = lit(N as f64);
    let head = crate::summation::compensated_sum((1..N).map(|l| lit::<T>(l as f64).powf(-sf)));
    let mut tail = n.powf(T::one() - sf) / (sf - T::one()) + lit::<T>(0.5) * n.powf(-sf);
    // Σ_j B_2j/(2j)! · s(s+1)…(s+2j-2) · N^{-s-2j+1}
    let mut rising = sf; // s(s+1)...(s+2j-2) for j=1
    let mut fact = lit::<T>(2.0); // (2j)!
    for j in 1..=10u32 {
        let b: T = bernoulli(2 * j)?;
        let power = n.powf(-(sf + lit::<T>((2 * j - 1) as f64)));
        tail = tail + b / fact * rising * power;
        let jf = lit::<T>(j as f64);
        rising = rising * (sf + lit::<T>(2.0) * jf - T::one()) * (sf + lit::<T>(2.0) * jf);
        fact = fact * (lit::<T>(2.0) * jf + T::one()) * (lit::<T>(2.0) * jf + lit::<T>(2.0));
    }
    Ok(head + tail)
}

/// ζ at a non-positive or integer ≥ 2 argument; ζ(1) is a pole.
fn zeta_integer_arg<T: Real>(s: i32) -> Result<T> {
    if s >= 2 {
        return zeta_int(s as u32);
    }
    if s == 1 {
        return Err(Error::Divergence("zeta(1)".into()));
    }
    if s == 0 {
        return Ok(lit(-0.5));
    }
    let m = (-s) as u32;
    if m.is_multiple_of(2) {
        return Ok(T::zero());
    }
    // ζ(1-2j) = (-1)^j 2 (2j-1)! ζ(2j) / (2π)^{2j}
    let j = m.div_ceil(2);
    let mut fact = T::one();
    for k in 1..(2 * j) {
        fact = fact * lit(k as f64);
    }
    let two_pi = lit::<T>(2.0) * T::PI();
    let sign: T = if j.is_multiple_of(2) { T::one() } else { -T::one() };
    Ok(sign * lit::<T>(2.0) * fact * zeta_int::<T>(2 * j)? / two_pi.powi(2 * j as i32))
}

/// Polylogarithm Li_n(x) = Σ_{l≥1} x^l / l^n for integer n ≥ 1 and real x ∈ [-1, 1].
pub fn polylog<T: Real>(n: u32, x: T) -> Result<T> {
    if n == 0 {
        return Err(Error::domain("polylog", "order must be at least 1"));
    }
    if !x.is_finite() || x.abs() > T::one() {
        return Err(Error::domain("polylog", format!("argument {x} outside [-1, 1]")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if n == 1 {
        if x == T::one() {
            return Err(Error::Divergence("Li_1(1) = -ln(0)".into()));
        }
        return Ok(-(-x).ln_1p());
    }
    if x == T::one() {
        return zeta_int(n);
    }
    let half = lit::<T>(0.5);
    if x.abs() <= half {
        return Ok(polylog_series(n, x));
    }
    if x > T::zero() {
        return polylog_log_series(n, x);
    }
    // Li_n(-y) = 2^{1-n} Li_n(y²) - Li_n(y)
    let y = -x;
    let y2 = y * y;
    let li_y2 = if y2 <= half {
        polylog_series(n, y2)
    } else if y2 == T::one() {
        zeta_int(n)?
    } else {
        polylog_log_series(n, y2)?
    };
    let li_y = if y == T::one() {
        zeta_int(n)?
    } else {
        polylog_log_series(n, y)?
    };
    Ok(lit::<T>(2.0).powi(1 - n as i32) * li_y2 - li_y)
}

fn polylog_series<T: Real>(n: u32, x: T) -> T {
    let mut sum = T::zero();
    let mut power = T::one();
    let eps = T::epsilon();
    for l in 1..10_000u32 {
        power = power * x;
        let term = power / lit::<T>(l as f64).powi(n as i32);
        sum = sum + term;
        if term.abs() <= eps * lit::<T>(0.1) * sum.abs() {
            break;
        }
    }
    sum
}

// Li_n(e^w) = Σ_{k≠n-1} ζ(n-k) w^k/k! + w^{n-1}/(n-1)! (H_{n-1} - ln(-w)), |w| < 2π.
fn polylog_log_series<T: Real>(n: u32, x: T) -> Result<T> {
    let w = x.ln();
    let mut sum = T::zero();
    let mut wk = T::one(); // w^k / k!
    let eps = T::epsilon();
    let mut small_run = 0;
    for k in 0..80u32 {
        if k > 0 {
            wk = wk * w / lit::<T>(k as f64);
        }
        let term = if k + 1 == n {
            let harmonic = (1..n).fold(T::zero(), |h, i| h + T::one() / lit::<T>(i as f64));
            wk * (harmonic - (-w).ln())
        } else {
            wk * zeta_integer_arg::<T>(n as i32 - k as i32)?
        };
        sum = sum + term;
        if k + 1 > n {
            if term.abs() <= eps * lit::<T>(0.01) * sum.abs() {
                small_run += 1;
                if small_run >= 2 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Brute-force partial sum of Σ x^l / l^n, summed smallest-first.
    fn brute_li(n: i32, x: f64, terms: usize) -> f64 {
        let mut s = 0.0;
        for l in (1..=terms).rev() {
            s += x.powi(l as i32) / (l as f64).powi(n);
        }
        s
    }

    #[test]
    fn li3_zero_and_one() {
        assert_eq!(polylog(3, 0.0_f64).unwrap(), 0.0);
        assert!((polylog(3, 1.0_f64).unwrap() - 1.202_056_903_159_594_3).abs() < 1e-15);
    }

    #[test]
    fn li3_at_half_matches_brute_force() {
        let oracle = brute_li(3, 0.5, 200);
        assert!((oracle - 0.537_213_193_608_040_2).abs() < 1e-15);
        assert!((polylog(3, 0.5_f64).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn li3_semiconductor_reflectivity() {
        // R_p(0)^2 for eps_bar = 11.66
        let r = (11.66_f64 - 1.0) / (11.66 + 1.0);
        let v = polylog(3, r * r).unwrap();
        assert!((brute_li(3, r * r, 400) - 0.791_526_560_345_246_3).abs() < 1e-14);
        assert!((v - 0.791_526_560_345_246_3).abs() < 1e-13, "{v}");
        let x = 0.709001_f64;
        assert!((polylog(3, x).unwrap() - 0.791_526_247_179_581).abs() < 1e-13);
    }

    #[test]
    fn li3_agrees_with_direct_summation_up_to_099() {
        for &x in &[0.05, 0.3, 0.55, 0.7, 0.8, 0.9, 0.95, 0.99] {
            let direct = brute_li(3, x, 1_000_000);
            let v = polylog(3, x).unwrap();
            assert!(((v - direct) / direct).abs() < 1e-12, "x={x}: {v} vs {direct}");
        }
    }

    #[test]
    fn near_one_argument() {
        let v = polylog(3, 0.999_f64).unwrap();
        let direct = brute_li(3, 0.999, 60_000);
        assert!(((v - direct) / direct).abs() < 1e-13);
    }

    #[test]
    fn other_orders() {
        assert!((polylog(2, 1.0_f64).unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        // Li_2(1/2) = π²/12 - ln²2/2
        let l2 = std::f64::consts::LN_2;
        let expect = std::f64::consts::PI.powi(2) / 12.0 - l2 * l2 / 2.0;
        assert!((polylog(2, 0.5_f64).unwrap() - expect).abs() < 1e-15);
        assert!((polylog(1, 0.75_f64).unwrap() - 4.0_f64.ln()).abs() < 1e-15);
        let v = polylog(4, 0.8_f64).unwrap();
        assert!((v - brute_li(4, 0.8, 400)).abs() < 1e-14);
    }

    #[test]
    fn negative_arguments() {
        // Li_3(-1) = -(3/4) ζ(3)
        let v = polylog(3, -1.0_f64).unwrap();
        assert!((v + 0.75 * ZETA_3).abs() < 1e-14);
        for &x in &[-0.2, -0.6, -0.9] {
            let direct = brute_li(3, x, 5000);
            assert!((polylog(3, x).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn li1_at_one_diverges() {
        assert!(matches!(polylog(1, 1.0_f64), Err(Error::Divergence(_))));
        assert!(polylog(3, 1.5_f64).is_err());
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_int::<f64>(3).unwrap() - ZETA_3).abs() < 1e-15);
        assert!((zeta_int::<f64>(4).unwrap() - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta_integer_arg::<f64>(-1).unwrap() + 1.0 / 12.0).abs() < 1e-15);
        assert!((zeta_integer_arg::<f64>(-3).unwrap() - 1.0 / 120.0).abs() < 1e-15);
        assert_eq!(zeta_integer_arg::<f64>(-4).unwrap(), 0.0);
    }

    // ζ(s) for real s > 1 by direct sum plus Euler-Maclaurin tail; test-only.
    fn zeta_real_oracle(s: f64) -> f64 {
        let n = 50usize;
        let mut sum = 0.0;
        for l in (1..n).rev() {
            sum += (l as f64).powf(-s);
        }
        let nf = n as f64;
        sum + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0)
            - s * (s + 1.0) * (s + 2.0) / 720.0 * nf.powf(-s - 3.0)
    }

    #[test]
    fn zeta_minus_three_halves_functional_equation() {
        // ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s) at s = -3/2
        let s = -1.5_f64;
        let pi = std::f64::consts::PI;
        let gamma_5_2 = 0.75 * pi.sqrt();
        let fe = 2f64.powf(s) * pi.powf(s - 1.0) * (pi * s / 2.0).sin() * gamma_5_2 * zeta_real_oracle(2.5);
        let stored: f64 = zeta_minus_three_halves();
        assert!(stored < 0.0);
        assert!(stored.abs() < 0.03);
        assert!((fe - stored).abs() < 1e-10, "{fe} vs {stored}");
        assert!((zeta_real_oracle(3.0) - ZETA_3).abs() < 1e-13);
    }

    #[test]
    fn bernoulli_table() {
        assert_eq!(bernoulli_fraction(2).unwrap(), (1, 6));
        assert_eq!(bernoulli_fraction(4).unwrap(), (-1, 30));
        assert_eq!(bernoulli_fraction(6).unwrap(), (1, 42));
        assert!(bernoulli_fraction(22).is_err());
        assert!(bernoulli_fraction(3).is_err());
        assert!(bernoulli_fraction(0).is_err());
        // B_2/2! and B_4/4! are the 1/12 and -1/720 Euler-Maclaurin coefficients
        let b2: f64 = bernoulli(2).unwrap();
        let b4: f64 = bernoulli(4).unwrap();
        assert!((b2 / 2.0 - 1.0 / 12.0).abs() < 1e-17);
        assert!((b4 / 24.0 + 1.0 / 720.0).abs() < 1e-18);
    }

    #[test]
    fn single_precision_polylog() {
        let v: f32 = polylog(3, 0.5_f32).unwrap();
        assert!((v - 0.537_213_2).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn li3_duplication_identity(x in 0.0_f64..0.999) {
            let lhs = polylog(3, x).unwrap() + polylog(3, -x).unwrap();
            let rhs = polylog(3, x * x).unwrap() / 4.0;
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn li3_is_increasing(x in 0.0_f64..0.998, dx in 1e-4_f64..1e-3) {
            prop_assert!(polylog(3, x + dx).unwrap() > polylog(3, x).unwrap());
        }
    }
}
