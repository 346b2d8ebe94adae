//! Certified isolation of the smallest real root in an interval.
//!
//! Roots are counted with a Sturm sequence built over exact rationals from the
//! square-free part of the input, then the leftmost root is bracketed by
//! bisection on rational endpoints.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub type RatPolynomial = Polynomial<BigRational>;

/// A real root bracketed by exact rational endpoints: the root lies in
/// `(lo, hi]`, or equals `hi` exactly when `exact` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    pub exact: bool,
}

impl CertifiedRoot {
    pub fn midpoint(&self) -> f64 {
        if self.exact {
            return self.hi.to_f64().unwrap_or(f64::NAN);
        }
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn width(&self) -> f64 {
        if self.exact {
            0.0
        } else {
            (&self.hi - &self.lo).to_f64().unwrap_or(f64::NAN)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo = self.lo.to_f64().unwrap_or(f64::NAN);
        let hi = self.hi.to_f64().unwrap_or(f64::NAN);
        if self.exact {
            x == hi
        } else {
            lo <= x && x <= hi
        }
    }

    pub fn summary(&self) -> RootSummary {
        RootSummary {
            lo: self.lo.to_f64().unwrap_or(f64::NAN),
            hi: self.hi.to_f64().unwrap_or(f64::NAN),
            lo_exact: self.lo.to_string(),
            hi_exact: self.hi.to_string(),
            midpoint: self.midpoint(),
            exact: self.exact,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSummary {
    pub lo: f64,
    pub hi: f64,
    pub lo_exact: String,
    pub hi_exact: String,
    pub midpoint: f64,
    pub exact: bool,
}

pub fn to_rational(p: &Polynomial<BigInt>) -> RatPolynomial {
    p.map(|c| BigRational::from_integer(c.clone()))
}

pub fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
}

fn div_rem(a: &RatPolynomial, b: &RatPolynomial) -> (RatPolynomial, RatPolynomial) {
    let db = b.degree().expect("division by zero polynomial");
    let lead = b.leading().unwrap().clone();
    let mut rem = a.coeffs().to_vec();
    let Some(da) = a.degree() else {
        return (RatPolynomial::zero(), RatPolynomial::zero());
    };
    if da < db {
        return (RatPolynomial::zero(), a.clone());
    }
    let mut quot = vec![BigRational::zero(); da - db + 1];
    for i in (0..=da - db).rev() {
        let q = &rem[i + db] / &lead;
        if q.is_zero() {
            continue;
        }
        for (j, c) in b.coeffs().iter().enumerate() {
            rem[i + j] = &rem[i + j] - &q * c;
        }
        quot[i] = q;
    }
    (RatPolynomial::new(quot), RatPolynomial::new(rem))
}

fn monic(p: &RatPolynomial) -> RatPolynomial {
    match p.leading() {
        Some(l) => {
            let inv = l.recip();
            p.scale(&inv)
        }
        None => p.clone(),
    }
}

fn gcd(a: &RatPolynomial, b: &RatPolynomial) -> RatPolynomial {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

/// `p / gcd(p, p')`: same roots, all simple.
pub fn square_free(p: &RatPolynomial) -> RatPolynomial {
    let d = p.derivative();
    if d.is_zero() {
        return p.clone();
    }
    let g = gcd(p, &d);
    div_rem(p, &g).0
}

#[derive(Clone, Debug)]
pub struct SturmSequence {
    chain: Vec<RatPolynomial>,
}

impl SturmSequence {
    pub fn new(p: &RatPolynomial) -> Self {
        let p0 = square_free(p);
        let mut chain = vec![p0.clone()];
        let mut prev = p0.clone();
        let mut cur = p0.derivative();
        while !cur.is_zero() {
            chain.push(cur.clone());
            let (_, r) = div_rem(&prev, &cur);
            prev = cur;
            cur = -r;
        }
        Self { chain }
    }

    fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let v = p.eval(x);
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

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        if self.chain[0].degree().unwrap_or(0) == 0 {
            return 0;
        }
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Smallest root of `p` in `(lo, hi]`, bracketed to width at most `tol`.
pub fn smallest_root(
    p: &Polynomial<BigInt>,
    lo: &BigRational,
    hi: &BigRational,
    tol: f64,
) -> Result<CertifiedRoot> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadTolerance);
    }
    if p.is_zero() || lo >= hi {
        return Err(Error::NoRootInRange);
    }
    let rp = to_rational(p);
    let sturm = SturmSequence::new(&rp);
    if sturm.count(lo, hi) == 0 {
        return Err(Error::NoRootInRange);
    }
    let tol = rational(tol)?;
    let two = BigRational::from_integer(2.into());
    let (mut a, mut b) = (lo.clone(), hi.clone());
    // invariant: no root in (lo, a], at least one root in (a, b]
    while &b - &a > tol {
        let mid = (&a + &b) / &two;
        if sturm.count(&a, &mid) > 0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let exact = rp.eval(&b).is_zero() && sturm.count(&a, &b) == 1;
    if !exact && sturm.count(&a, &b) > 1 {
        return Err(Error::RootNotIsolable);
    }
    Ok(CertifiedRoot {
        lo: a,
        hi: b,
        exact,
    })
}

/// `smallest_root` on `(0, 1]`.
pub fn smallest_root_unit(p: &Polynomial<BigInt>, tol: f64) -> Result<CertifiedRoot> {
    smallest_root(p, &BigRational::zero(), &BigRational::one(), tol)
}
