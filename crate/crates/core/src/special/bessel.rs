//! Modified Bessel functions of the second kind, integer order.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;
const SERIES_LIMIT: f64 = 2.0;
const MAX_ITER: usize = 10_000;

/// `K_order(x)` for `x > 0`.
///
/// `K_0` and `K_1` come from their power series for `x ≤ 2` and from
/// Steed's continued fraction (Temme's CF2) above that; higher orders use
/// the forward recurrence `K_{j+1} = K_{j-1} + (2j/x) K_j`, which is stable
/// for `K`. Results underflow to zero for very large `x`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let (k0, k1) = k0_k1(x);
    Ok(recur(order, x, k0, k1))
}

/// `K_0(x), K_1(x), …, K_max_order(x)` in one pass.
pub fn bessel_k_sequence(max_order: u32, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    let (k0, k1) = if x.is_infinite() { (0.0, 0.0) } else { k0_k1(x) };
    let mut out = Vec::with_capacity(max_order as usize + 1);
    out.push(k0);
    if max_order >= 1 {
        out.push(k1);
    }
    for j in 1..max_order {
        let next = out[j as usize - 1] + (2.0 * j as f64 / x) * out[j as usize];
        out.push(next);
    }
    Ok(out)
}

fn recur(order: u32, x: f64, k0: f64, k1: f64) -> f64 {
    match order {
        0 => k0,
        1 => k1,
        _ => {
            let (mut prev, mut cur) = (k0, k1);
            for j in 1..order {
                let next = prev + (2.0 * j as f64 / x) * cur;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn k0_k1(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        (k0_series(x), k1_series(x))
    } else {
        steed_cf2(x)
    }
}

// K_0(x) = -(ln(x/2) + γ) I_0(x) + Σ_{k≥1} H_k (x²/4)^k / (k!)²
fn k0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0; // (x²/4)^k / (k!)²
    let mut i0 = 1.0;
    let mut harmonic_sum = 0.0;
    let mut harmonic = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        harmonic_sum += harmonic * term;
        if term < 1e-18 * i0 && harmonic * term < 1e-18 * harmonic_sum.abs().max(1e-300) {
            break;
        }
    }
    -log_term * i0 + harmonic_sum
}

// K_1(x) = 1/x + ln(x/2) I_1(x) − (x/4) Σ_{k≥0} (ψ(k+1)+ψ(k+2)) (x²/4)^k / (k!(k+1)!)
fn k1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();
    let mut term = 1.0; // (x²/4)^k / (k!(k+1)!)
    let mut i1_sum = 1.0;
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // ψ(k+2)
    let mut psi_sum = (psi_k1 + psi_k2) * term;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= y / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        i1_sum += term;
        let contrib = (psi_k1 + psi_k2) * term;
        psi_sum += contrib;
        if term < 1e-18 * i1_sum && contrib.abs() < 1e-18 * psi_sum.abs().max(1e-300) {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + ln_half * i1 - 0.25 * x * psi_sum
}

// Steed's algorithm for K_0 and K_1, valid for x ≳ 2.
fn steed_cf2(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    // K_ν(x) = ∫_0^∞ exp(−x cosh t) cosh(νt) dt by the trapezoid rule,
    // which converges geometrically for this doubly-decaying integrand.
    fn k_oracle(order: u32, x: f64) -> f64 {
        let h = 1.0 / 256.0;
        let nu = order as f64;
        let f = |t: f64| (-x * t.cosh() + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
        let mut sum = 0.5 * f(0.0);
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            let v = f(t);
            sum += v;
            if v < 1e-30 * sum && t > 1.0 {
                break;
            }
            k += 1;
        }
        sum * h
    }

    #[test]
    fn matches_integral_representation() {
        for &x in &[1e-3, 0.01, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 7.5, 20.0, 60.0] {
            for order in 0..6 {
                let exact = k_oracle(order, x);
                let got = bessel_k(order, x).unwrap();
                assert!(
                    ((got - exact) / exact).abs() < 1e-12,
                    "K_{order}({x}) = {got}, oracle {exact}"
                );
            }
        }
    }

    #[test]
    fn k0_at_one_reference() {
        // Abramowitz & Stegun table 9.8: K_0(1) = 0.42102 44382 40708 ...
        let v = bessel_k(0, 1.0).unwrap();
        assert!((v - 0.421_024_438_240_708_3).abs() < 1e-15);
    }

    #[test]
    fn large_argument_underflows() {
        assert_eq!(bessel_k(1, 1e4).unwrap(), 0.0);
        assert_eq!(bessel_k(3, f64::INFINITY).unwrap(), 0.0);
        let v = bessel_k(0, 700.0).unwrap();
        assert!(v > 0.0 && v < 1e-300);
    }

    #[test]
    fn nonpositive_argument_is_domain_error() {
        assert!(bessel_k(0, 0.0).is_err());
        assert!(bessel_k(2, -1.0).is_err());
        assert!(bessel_k(2, f64::NAN).is_err());
    }

    #[test]
    fn sequence_matches_single() {
        let seq = bessel_k_sequence(7, 0.37).unwrap();
        for (j, v) in seq.iter().enumerate() {
            assert_eq!(*v, bessel_k(j as u32, 0.37).unwrap());
        }
    }
}
