//! Real-root isolation for polynomials with `f64` coefficients.
//!
//! Every `f64` is a dyadic rational, so the coefficients convert exactly to
//! `BigRational` and all sign decisions below are exact. Interval endpoints
//! stay dyadic (they start as `f64` values and are only ever halved), which
//! keeps the rationals small.
//!
//! Counting uses Descartes' rule of signs on the Möbius transform
//! `(1 + x)^n p((a + b x) / (1 + x))`, whose positive roots correspond to the
//! roots of `p` in `(a, b)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial with exact rational coefficients, ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

/// A real root located inside `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Exact multiplicity when `clustered` is false; otherwise the number of
    /// sign variations left in an interval narrower than the cluster width.
    pub multiplicity: usize,
    pub clustered: bool,
}

impl RealRoot {
    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1 && !self.clustered
    }
}

fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite polynomial data: {x}")))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

impl Polynomial {
    /// Builds a polynomial from coefficients in descending powers.
    pub fn from_descending(coeffs: &[f64]) -> Result<Self> {
        let mut c = coeffs.iter().rev().map(|&v| rat(v)).collect::<Result<Vec<_>>>()?;
        while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Ok(Polynomial { coeffs: c })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial { coeffs: vec![BigRational::zero()] };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect();
        Polynomial { coeffs }
    }

    /// Divides by `(x - r)`, returning the quotient and the remainder `p(r)`.
    pub fn deflate(&self, r: &BigRational) -> (Polynomial, BigRational) {
        let n = self.coeffs.len();
        if n <= 1 {
            return (Polynomial { coeffs: vec![BigRational::zero()] }, self.coeffs[0].clone());
        }
        let mut q = vec![BigRational::zero(); n - 1];
        let mut acc = BigRational::zero();
        for i in (0..n).rev() {
            acc = acc * r + &self.coeffs[i];
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Polynomial { coeffs: q }, acc)
    }

    /// Sign variations of `(1 + x)^n p((a + b x) / (1 + x))`.
    fn descartes_bound(&self, a: &BigRational, b: &BigRational) -> usize {
        let n = self.degree();
        let mut total = vec![BigRational::zero(); n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // c (a + b x)^i (1 + x)^(n - i)
            let mut term = vec![c.clone()];
            for _ in 0..i {
                term = mul_linear(&term, a, b);
            }
            for _ in i..n {
                term = mul_linear(&term, &BigRational::one(), &BigRational::one());
            }
            for (t, v) in total.iter_mut().zip(term) {
                *t += v;
            }
        }
        sign_variations(&total)
    }
}

/// Multiplies `poly` (ascending) by `(a + b x)`.
fn mul_linear(poly: &[BigRational], a: &BigRational, b: &BigRational) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); poly.len() + 1];
    for (i, c) in poly.iter().enumerate() {
        out[i] += c * a;
        out[i + 1] += c * b;
    }
    out
}

fn sign_variations(c: &[BigRational]) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for v in c {
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Isolates the real roots of `coeffs` (descending powers) in `(lo, hi]`.
///
/// Simple roots are refined to width `refine_width`. An exact zero met at a
/// bisection point is divided out, which yields its exact multiplicity. An
/// interval narrower than `cluster_width` still carrying two or more sign
/// variations is reported as one clustered root.
pub fn isolate_roots(
    coeffs: &[f64],
    lo: f64,
    hi: f64,
    cluster_width: f64,
    refine_width: f64,
) -> Result<Vec<RealRoot>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad isolation interval ({lo}, {hi}]")));
    }
    let mut p = Polynomial::from_descending(coeffs)?;
    if p.is_zero() {
        return Err(Error::InvalidParameter("zero polynomial".into()));
    }
    let a = rat(lo)?;
    let b = rat(hi)?;
    // Roots at the open end are excluded but must not sit on an endpoint
    // during refinement.
    loop {
        let (q, r) = p.deflate(&a);
        if !r.is_zero() || p.degree() == 0 {
            break;
        }
        p = q;
    }
    let mut roots = Vec::new();
    let mut mult = 0;
    loop {
        let (q, r) = p.deflate(&b);
        if !r.is_zero() || p.degree() == 0 {
            break;
        }
        p = q;
        mult += 1;
    }
    if mult > 0 {
        roots.push(RealRoot { value: hi, lo: hi, hi: hi, multiplicity: mult, clustered: false });
    }
    let ctx = Ctx { cluster_width, refine_width };
    ctx.isolate(&p, a, b, &mut roots);
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(roots)
}

struct Ctx {
    cluster_width: f64,
    refine_width: f64,
}

impl Ctx {
    fn isolate(&self, p: &Polynomial, a: BigRational, b: BigRational, out: &mut Vec<RealRoot>) {
        if p.degree() == 0 {
            return;
        }
        let v = p.descartes_bound(&a, &b);
        if v == 0 {
            return;
        }
        let width = to_f64(&(&b - &a));
        if v == 1 {
            out.push(self.refine(p, a, b));
            return;
        }
        if width < self.cluster_width {
            let mid = (&a + &b) * half();
            out.push(RealRoot {
                value: to_f64(&mid),
                lo: to_f64(&a),
                hi: to_f64(&b),
                multiplicity: v,
                clustered: true,
            });
            return;
        }
        let m = (&a + &b) * half();
        let mut q = p.clone();
        let mut mult = 0;
        loop {
            let (next, r) = q.deflate(&m);
            if !r.is_zero() || q.degree() == 0 {
                break;
            }
            q = next;
            mult += 1;
        }
        if mult > 0 {
            let x = to_f64(&m);
            out.push(RealRoot { value: x, lo: x, hi: x, multiplicity: mult, clustered: false });
        }
        self.isolate(&q, a, m.clone(), out);
        self.isolate(&q, m, b, out);
    }

    /// Bisects an interval holding exactly one simple root in its interior.
    fn refine(&self, p: &Polynomial, mut a: BigRational, mut b: BigRational) -> RealRoot {
        let sa = p.eval(&a).signum();
        let sb = p.eval(&b).signum();
        // With one sign variation the endpoint values have opposite signs
        // unless an endpoint is itself a root, which the caller rules out.
        if sa.is_zero() || sb.is_zero() || sa == sb {
            let x = to_f64(&((&a + &b) * half()));
            return RealRoot { value: x, lo: to_f64(&a), hi: to_f64(&b), multiplicity: 1, clustered: false };
        }
        while to_f64(&(&b - &a)) > self.refine_width {
            let m = (&a + &b) * half();
            let sm = p.eval(&m).signum();
            if sm.is_zero() {
                let x = to_f64(&m);
                return RealRoot { value: x, lo: x, hi: x, multiplicity: 1, clustered: false };
            }
            if sm == sa {
                a = m;
            } else {
                b = m;
            }
        }
        let x = to_f64(&((&a + &b) * half()));
        RealRoot { value: x, lo: to_f64(&a), hi: to_f64(&b), multiplicity: 1, clustered: false }
    }
}

/// Horner evaluation of descending coefficients in `f64`.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// `sum |c_i| |x|^i`, the rounding scale of [`horner`] at `x`.
pub fn horner_scale(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x.abs() + c.abs())
}

/// Upper bound on the absolute value of every root (Cauchy).
pub fn cauchy_bound(coeffs: &[f64]) -> f64 {
    let lead = coeffs[0].abs();
    1.0 + coeffs[1..].iter().map(|c| c.abs() / lead).fold(0.0, f64::max)
}

/// Smallest value of `|p(y*)| / scale(y*)` over the critical points `y*` of
/// `p` in `(lo, hi]`, together with the minimizing `y*`. Near zero exactly
/// when `p` has a root of multiplicity at least two close to `(lo, hi]`.
pub fn min_critical_value(coeffs: &[f64], lo: f64, hi: f64) -> Result<Option<(f64, f64)>> {
    let n = coeffs.len() - 1;
    if n < 2 {
        return Ok(None);
    }
    let d: Vec<f64> = coeffs[..n].iter().enumerate().map(|(i, c)| c * (n - i) as f64).collect();
    let crit = isolate_roots(&d, lo, hi, 1e-12, 1e-14)?;
    Ok(crit
        .iter()
        .map(|r| {
            let y = r.value;
            (y, horner(coeffs, y).abs() / horner_scale(coeffs, y))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iso(c: &[f64], lo: f64, hi: f64) -> Vec<RealRoot> {
        isolate_roots(c, lo, hi, 1e-8, 1e-12).unwrap()
    }

    #[test]
    fn quadruple_root_found_exactly() {
        let r = iso(&[0.25, -1.0, 1.5, -1.0, 0.25], 0.0, 2.0);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].value, 1.0);
        assert_eq!(r[0].multiplicity, 4);
        assert!(!r[0].clustered);
    }

    #[test]
    fn simple_roots_refined() {
        // (y - 0.3)(y - 0.7)(y - 5)
        let c = [1.0, -6.0, 0.3 * 0.7 + 0.3 * 5.0 + 0.7 * 5.0, -0.3 * 0.7 * 5.0];
        let r = iso(&c, 0.0, 10.0);
        assert_eq!(r.len(), 3);
        for (root, want) in r.iter().zip([0.3, 0.7, 5.0]) {
            assert!(root.is_simple());
            assert!((root.value - want).abs() < 1e-11, "{} vs {want}", root.value);
        }
    }

    #[test]
    fn upper_endpoint_is_closed_lower_is_open() {
        // y (y - 1)
        let r = iso(&[1.0, -1.0, 0.0], 0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].value, 1.0);
    }

    #[test]
    fn close_pair_is_clustered() {
        let e = 2f64.powi(-30);
        // (y - 1)(y - 1 - e)
        let c = [1.0, -(2.0 + e), 1.0 + e];
        let r = iso(&c, 0.0, 3.0);
        let total: usize = r.iter().map(|x| x.multiplicity).sum();
        assert_eq!(total, 2);
        assert!(r.iter().all(|x| (x.value - 1.0).abs() < 1e-8));
    }

    #[test]
    fn no_real_roots() {
        assert!(iso(&[1.0, 0.0, 1.0], -10.0, 10.0).is_empty());
    }

    #[test]
    fn critical_value_detects_double_root() {
        let (y, v) = min_critical_value(&[1.0, -2.0, 1.0], 0.0, 3.0).unwrap().unwrap();
        assert!((y - 1.0).abs() < 1e-13, "{y}");
        assert!(v < 1e-25, "{v}");
        let (_, v) = min_critical_value(&[1.0, -2.0, 0.5], 0.0, 3.0).unwrap().unwrap();
        assert!(v > 0.1);
    }

    proptest! {
        #[test]
        fn recovers_planted_roots(
            mut r in proptest::collection::vec(-8.0f64..8.0, 1..5),
        ) {
            r.sort_by(f64::total_cmp);
            prop_assume!(r.windows(2).all(|w| w[1] - w[0] > 1e-3));
            let mut c = vec![1.0];
            for &x in &r {
                let mut next = vec![0.0; c.len() + 1];
                for (i, &v) in c.iter().enumerate() {
                    next[i] += v;
                    next[i + 1] -= v * x;
                }
                c = next;
            }
            let found = iso(&c, -10.0, 10.0);
            prop_assert_eq!(found.len(), r.len());
            for (f, want) in found.iter().zip(&r) {
                prop_assert!(f.is_simple());
                prop_assert!((f.value - want).abs() < 1e-9, "{} vs {}", f.value, want);
            }
        }
    }
}
