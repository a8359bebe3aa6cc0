//! Test-only helpers: a double-double reference implementation of the
//! Bernoulli information measures, and a runner for the built binary.
//!
//! The reference code shares nothing with the library: it works on
//! unevaluated sums `hi + lo` of two f64 (about 106 bits) and has its own
//! `exp` and `ln`.

#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::path::Path;
use std::process::{Command, Output};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    fn scale(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2 * Dd::new(k);
        // exp(r) = exp(r / 2^10)^(2^10)
        let s = r.scale(-10);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..=25 {
            term = term * s / Dd::new(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.scale(k as i32)
    }

    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive value");
        let y = Dd::new(self.hi.ln());
        // Newton: y + x exp(-y) - 1, twice
        let y = y + self * (-y).exp() - Dd::ONE;
        y + self * (-y).exp() - Dd::ONE
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// `x ln(x / y)` with the `0 ln 0 = 0` convention; `None` for `+inf`.
fn xlnxy(x: Dd, y: Dd) -> Option<Dd> {
    if x.is_zero() {
        return Some(Dd::ZERO);
    }
    if y.is_zero() {
        return None;
    }
    Some(x * (x.ln() - y.ln()))
}

fn xlnx(x: Dd) -> Dd {
    if x.is_zero() {
        Dd::ZERO
    } else {
        x * x.ln()
    }
}

pub fn entropy(p: f64) -> Dd {
    let p = Dd::new(p);
    -(xlnx(p) + xlnx(Dd::ONE - p))
}

pub fn kl(p: f64, q: f64) -> f64 {
    kl_dd(Dd::new(p), Dd::new(q)).map_or(f64::INFINITY, Dd::to_f64)
}

pub fn kl_dd(p: Dd, q: Dd) -> Option<Dd> {
    Some(xlnxy(p, q)? + xlnxy(Dd::ONE - p, Dd::ONE - q)?)
}

pub fn js_dd(p: f64, q: f64) -> Dd {
    let m = (Dd::new(p) + Dd::new(q)) * Dd::new(0.5);
    let hm = -(xlnx(m) + xlnx(Dd::ONE - m));
    hm - (entropy(p) + entropy(q)) * Dd::new(0.5)
}

pub fn js(p: f64, q: f64) -> f64 {
    js_dd(p, q).to_f64()
}

/// `(theta - p)^2 / (2 theta (1 - theta))`.
pub fn kl_quadratic_rhs_dd(theta: f64, p: f64) -> Dd {
    let t = Dd::new(theta);
    let d = t - Dd::new(p);
    d * d / (Dd::new(2.0) * t * (Dd::ONE - t))
}

/// `(t1 - t2)^2 / (4 (t1(1-t1) + t2(1-t2)))`.
pub fn js_welch_rhs_dd(t1: f64, t2: f64) -> Dd {
    let (a, b) = (Dd::new(t1), Dd::new(t2));
    let d = a - b;
    let v = a * (Dd::ONE - a) + b * (Dd::ONE - b);
    d * d / (Dd::new(4.0) * v)
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abfactor"))
        .args(args)
        .env_remove("ABFACTOR_VERIFY_TOLERANCE")
        .output()
        .expect("spawn abfactor")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

/// Value of `key=...` in key=value output.
pub fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{text}"))
        .parse()
        .expect("numeric field")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_reference_values() {
        // mpmath, 50 digits
        assert!((entropy(0.3).to_f64() - 0.610_864_302_054_893_5).abs() < 1e-16);
        assert!((js(0.1, 0.2) - 0.009_966_389_341_172_812).abs() < 1e-17);
        assert!((kl(0.1, 0.9) - 1.757_779_661_868_975_5).abs() < 1e-15);
        assert!((Dd::new(1.0).exp().to_f64() - std::f64::consts::E).abs() < 1e-15);
        let l = Dd::new(10.0).ln();
        assert!((l.to_f64() - std::f64::consts::LN_10).abs() < 1e-15);
        // the low word carries real information
        assert!((l.hi - std::f64::consts::LN_10).abs() <= f64::EPSILON * 4.0);
    }
}
