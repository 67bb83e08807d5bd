//! The seed solver.
//!
//! Given `∫₀¹ x^a (1-x)^b / P(x) dx` and exponents `(k, s)`, find the
//! constant `z` and quotient `Q(x)` with `P(x) Q(x) = z - x^k (1-x)^s`.
//! Then
//!
//! ```text
//! ∫₀¹ x^a(1-x)^b / P dx = ∫₀¹ Q x^a(1-x)^b / (z - x^k(1-x)^s) dx
//!   = B(a+1, b+1)/z · Σ_n (a+1)_{kn}(b+1)_{sn} / ((a+b+2)_{(k+s)n} z^n) · w(n)
//! w(n) = Σ_j q_j ∏_{g=1..j} (a+g+kn) / (a+b+g+1+(k+s)n)
//! ```
//!
//! The remainder of `(z - kernel) ÷ P` is affine in the unknown `z`, so `z`
//! is found by solving one linear equation per remainder coefficient.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exact::{
    expand_kernel, format_rational, rat, BigRational, ParamPolynomial, Polynomial,
};
use crate::series::pochhammer;
use crate::{Error, Result};

/// `∫₀¹ x^a (1-x)^b / P(x) dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedIntegral {
    pub a: BigRational,
    pub b: BigRational,
    pub p: Polynomial,
}

impl SeedIntegral {
    /// Validates integrability (`a, b > -1`) and that `P` has no root in `[0, 1]`.
    pub fn new(a: BigRational, b: BigRational, p: Polynomial) -> Result<Self> {
        let minus_one = rat(-1);
        if a <= minus_one || b <= minus_one {
            return Err(Error::InvalidSeed(format!(
                "exponents must exceed -1 (a = {}, b = {})",
                format_rational(&a),
                format_rational(&b)
            )));
        }
        if p.is_zero() {
            return Err(Error::InvalidSeed("P is the zero polynomial".into()));
        }
        let roots = p.count_roots_in(&rat(0), &rat(1))?;
        if roots > 0 {
            return Err(Error::InvalidSeed(format!("P = {p} has {roots} root(s) in [0, 1]")));
        }
        Ok(SeedIntegral { a, b, p })
    }
}

/// `sup_{[0,1]} x^k (1-x)^s = k^k s^s / (k+s)^(k+s)`, with `0^0 = 1`.
pub fn convergence_bound(k: u32, s: u32) -> BigRational {
    let pw = |base: u32, e: u32| BigRational::from_integer(num_bigint::BigInt::from(base).pow(e));
    pw(k, k) * pw(s, s) / pw(k + s, k + s)
}

fn check_convergent(z: &BigRational, k: u32, s: u32) -> Result<()> {
    if z.is_zero() {
        return Err(Error::ZeroZ);
    }
    let bound = convergence_bound(k, s);
    if z.abs() <= bound {
        return Err(Error::Diverges {
            z: format_rational(z),
            bound: format_rational(&bound),
        });
    }
    Ok(())
}

/// A fully determined accelerated series.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedSeries {
    pub a: BigRational,
    pub b: BigRational,
    pub k: u32,
    pub s: u32,
    pub z: BigRational,
    /// `Q(x)`; coefficient `j` is `a_j` in `w(n)`.
    pub q: Polynomial,
    /// The seed denominator `P(x)`.
    pub p: Polynomial,
}

impl DerivedSeries {
    pub fn qcoeffs(&self) -> &[BigRational] {
        self.q.coeffs()
    }

    /// Whether `P·Q = z - x^k(1-x)^s` holds exactly.
    pub fn identity_holds(&self) -> bool {
        match expand_kernel(self.k, self.s) {
            Ok(kernel) => &self.p * &self.q == &Polynomial::constant(self.z.clone()) + &kernel,
            Err(_) => false,
        }
    }

    /// Builds the series for a caller-chosen `z`; needed when `P` is constant
    /// and every `z` divides.
    pub fn with_z(seed: &SeedIntegral, k: u32, s: u32, z: BigRational) -> Result<Self> {
        let kernel = expand_kernel(k, s)?;
        let target = &Polynomial::constant(z.clone()) + &kernel;
        let (q, r) = target.divmod(&seed.p)?;
        if !r.is_zero() {
            return Err(Error::NotDivisible(format!("remainder {r} for z = {}", format_rational(&z))));
        }
        check_convergent(&z, k, s)?;
        Ok(DerivedSeries { a: seed.a.clone(), b: seed.b.clone(), k, s, z, q, p: seed.p.clone() })
    }

    /// The exact `n`-th base term `(a+1)_{kn}(b+1)_{sn} / ((a+b+2)_{(k+s)n} z^n)`,
    /// computed directly from Pochhammer products.
    pub fn base_term(&self, n: u64) -> BigRational {
        let (k, s) = (self.k as u64, self.s as u64);
        let num = pochhammer(&(&self.a + rat(1)), k * n) * pochhammer(&(&self.b + rat(1)), s * n);
        let den = pochhammer(&(&self.a + &self.b + rat(2)), (k + s) * n);
        num / den / crate::exact::rational_powi(&self.z, n as i64)
    }
}

/// Solves `P | z - x^k(1-x)^s` for `z` and returns the derived series.
pub fn solve_seed(seed: &SeedIntegral, k: u32, s: u32) -> Result<DerivedSeries> {
    let kernel = expand_kernel(k, s)?;
    let (q0, r0) = kernel.divmod(&seed.p)?;
    let (q1, r1) = Polynomial::one().divmod(&seed.p)?;

    // r0_j + z r1_j = 0 for every j
    let len = r0.coeffs().len().max(r1.coeffs().len());
    let pivot = (0..len).find(|&j| !r1.coeff(j).is_zero());
    let z = match pivot {
        None if r0.is_zero() => return Err(Error::Undetermined),
        None => return Err(Error::NotDivisible(format!("remainder {r0} does not involve z"))),
        Some(j) => -(r0.coeff(j) / r1.coeff(j)),
    };
    for j in 0..len {
        if !(r0.coeff(j) + &z * r1.coeff(j)).is_zero() {
            return Err(Error::NotDivisible(format!(
                "remainder {r0} + z*({r1}) cannot vanish (x^{j} coefficient with z = {})",
                format_rational(&z)
            )));
        }
    }
    check_convergent(&z, k, s)?;
    let q = &q0 + &q1.scale(&z);
    let ds = DerivedSeries { a: seed.a.clone(), b: seed.b.clone(), k, s, z, q, p: seed.p.clone() };
    debug_assert!(ds.identity_holds());
    Ok(ds)
}

/// `w(n) = Σ_j a_j ∏_{g=1..j} (a+g+kn) / (a+b+g+1+(k+s)n)`, exactly.
pub fn weight_values(ds: &DerivedSeries, n: u64) -> Result<BigRational> {
    let nk = BigRational::from_integer((ds.k as u64 * n).into());
    let nks = BigRational::from_integer(((ds.k + ds.s) as u64 * n).into());
    let mut total = BigRational::zero();
    let mut prod = BigRational::one();
    for (j, coeff) in ds.q.coeffs().iter().enumerate() {
        if j > 0 {
            let g = rat(j as i64);
            let den = &ds.a + &ds.b + &g + rat(1) + &nks;
            if den.is_zero() {
                return Err(Error::WeightPole { n, g: j });
            }
            prod = prod * (&ds.a + &g + &nk) / den;
        }
        total += coeff * &prod;
    }
    Ok(total)
}

/// The value statement attached to a derived series:
/// `c = B(a+1, b+1)/z · Σ_n base(n) · w(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesContract {
    /// Arguments `(a+1, b+1)` of the Beta prefactor.
    pub beta_args: (BigRational, BigRational),
    pub z: BigRational,
    pub statement: String,
}

impl SeriesContract {
    /// `B(a+1, b+1)/z` when it is rational, i.e. when `a+1` or `b+1` is a
    /// positive integer: `B(p, m) = (m-1)! / (p)_m`.
    pub fn rational_prefactor(&self) -> Option<BigRational> {
        let (p, q) = &self.beta_args;
        let as_count = |v: &BigRational| {
            (v.is_integer() && v.is_positive()).then(|| v.to_integer().try_into().ok()).flatten()
        };
        let beta = if let Some(m) = as_count(q) {
            BigRational::from_integer(crate::exact::factorial(m - 1)) / pochhammer(p, m)
        } else if let Some(m) = as_count(p) {
            BigRational::from_integer(crate::exact::factorial(m - 1)) / pochhammer(q, m)
        } else {
            return None;
        };
        Some(beta / &self.z)
    }
}

impl fmt::Display for SeriesContract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.statement)
    }
}

pub fn series_value_contract(ds: &DerivedSeries) -> SeriesContract {
    let a1 = &ds.a + rat(1);
    let b1 = &ds.b + rat(1);
    let ab2 = &ds.a + &ds.b + rat(2);
    let r = format_rational;
    let statement = format!(
        "int_0^1 x^({a})(1-x)^({b}) / ({p}) dx = B({a1}, {b1})/({z}) * sum_n ({a1})_{{{k}n}} ({b1})_{{{s}n}} / (({ab2})_{{{ks}n}} ({z})^n) * w(n),  w(n) from Q = {q}",
        a = r(&ds.a),
        b = r(&ds.b),
        p = ds.p,
        a1 = r(&a1),
        b1 = r(&b1),
        ab2 = r(&ab2),
        z = r(&ds.z),
        k = ds.k,
        s = ds.s,
        ks = ds.k + ds.s,
        q = ds.q,
    );
    SeriesContract { beta_args: (a1, b1), z: ds.z.clone(), statement }
}

/// A derivation where `P`, `Q` and `z` depend polynomially on a parameter `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamDerivedSeries {
    pub k: u32,
    pub s: u32,
    pub p: ParamPolynomial,
    /// `z(w)`.
    pub z: Polynomial,
    pub q: ParamPolynomial,
}

impl ParamDerivedSeries {
    /// Whether `P(x,w) Q(x,w) = z(w) - x^k(1-x)^s` holds identically.
    pub fn identity_holds(&self) -> bool {
        match expand_kernel(self.k, self.s) {
            Ok(kernel) => {
                &self.p * &self.q
                    == &ParamPolynomial::from_w(self.z.clone()) + &ParamPolynomial::from_x(&kernel)
            }
            Err(_) => false,
        }
    }

    /// Substitutes `w = w0` and attaches the exponents of the seed integral.
    pub fn specialize(&self, w0: &BigRational, a: BigRational, b: BigRational) -> Result<DerivedSeries> {
        let seed = SeedIntegral::new(a, b, self.p.specialize(w0))?;
        let z = self.z.eval(w0);
        check_convergent(&z, self.k, self.s)?;
        Ok(DerivedSeries {
            a: seed.a,
            b: seed.b,
            k: self.k,
            s: self.s,
            z,
            q: self.q.specialize(w0),
            p: seed.p,
        })
    }
}

/// Parameterized seed solver: finds `z(w)` and `Q(x, w)`.
pub fn solve_seed_param(p: &ParamPolynomial, k: u32, s: u32) -> Result<ParamDerivedSeries> {
    let kernel = ParamPolynomial::from_x(&expand_kernel(k, s)?);
    let (q0, r0) = kernel.divmod(p)?;
    let (q1, r1) = ParamPolynomial::one().divmod(p)?;
    let len = r0.coeffs().len().max(r1.coeffs().len());
    let Some(j) = (0..len).find(|&j| !r1.coeff(j).is_zero()) else {
        return Err(if r0.is_zero() {
            Error::Undetermined
        } else {
            Error::NotDivisible(format!("remainder {r0} does not involve z"))
        });
    };
    let (z, zr) = (-&r0.coeff(j)).divmod(&r1.coeff(j))?;
    if !zr.is_zero() {
        return Err(Error::NotDivisible(format!(
            "z(w) = -({}) / ({}) is not a polynomial in w",
            r0.coeff(j),
            r1.coeff(j)
        )));
    }
    for i in 0..len {
        if !(&r0.coeff(i) + &(&z * &r1.coeff(i))).is_zero() {
            return Err(Error::NotDivisible(format!(
                "remainder {r0} + z(w)*({r1}) does not vanish at x^{i} with z(w) = {z}"
            )));
        }
    }
    let q = &q0 + &(&q1 * &ParamPolynomial::from_w(z.clone()));
    let out = ParamDerivedSeries { k, s, p: p.clone(), z, q };
    debug_assert!(out.identity_holds());
    Ok(out)
}
