//! Exact arithmetic in Q(zeta_n), its ring of integers Z[zeta_n], and residue
//! fields at primes.
//!
//! Elements live on the power basis 1, zeta, ..., zeta^(phi(n)-1) modulo the
//! n-th cyclotomic polynomial, so representations are canonical and reduction
//! at a prime ideal is a polynomial evaluation. Rationals are exact
//! throughout; there is no floating point anywhere in the engine.

use crate::arith::{self, mult_order};
#[cfg(test)]
use crate::arith::euler_phi;
use crate::field::Field;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

// ---------------------------------------------------------------------------
// Cyclotomic polynomials over Z
// ---------------------------------------------------------------------------

/// Coefficients of the n-th cyclotomic polynomial, ascending degree.
pub fn cyclotomic_poly(n: u32) -> Vec<BigInt> {
    // Phi_n = (x^n - 1) / prod_{d|n, d<n} Phi_d, by exact division
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in arith::divisors(n as u64) {
        if d == n as u64 {
            continue;
        }
        let phi_d = cyclotomic_poly_cached(d as u32);
        num = poly_div_exact(&num, &phi_d);
    }
    num
}

fn cyclotomic_poly_cached(n: u32) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let p = cyclotomic_poly(n);
    cache.lock().unwrap().insert(n, p.clone());
    p
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one());
    let mut rem = num.to_vec();
    let mut quo = vec![BigInt::zero(); dn - dd + 1];
    for i in (0..=dn - dd).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        quo[i] = c.clone();
        for j in 0..=dd {
            let t = &den[j] * &c;
            rem[i + j] -= t;
        }
    }
    assert!(rem.iter().all(|x| x.is_zero()), "non-exact polynomial division");
    quo
}

// ---------------------------------------------------------------------------
// The field Q(zeta_n)
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct CycFieldInner {
    pub n: u32,
    pub phi: usize,
    /// Phi_n, monic of degree phi, ascending.
    pub modulus: Vec<BigInt>,
    /// x^k mod Phi_n for k in 0..2*phi (integer coefficient vectors).
    pow_table: Vec<Vec<BigInt>>,
    /// x^k mod Phi_n for k in 0..n, iterated from the table.
    zeta_pow: Vec<Vec<BigInt>>,
    /// zeta_pow entries as i64 for the fast accumulation paths.
    zeta_pow_i64: Vec<Vec<i64>>,
    /// trace(zeta^k) for k in 0..phi.
    trace_pow: Vec<BigInt>,
}

/// Shared handle to a cyclotomic field context; equality is by n.
#[derive(Clone)]
pub struct Cyc(pub Arc<CycFieldInner>);

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(zeta_{})", self.0.n)
    }
}

impl PartialEq for Cyc {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n
    }
}

static FIELD_CACHE: OnceLock<Mutex<HashMap<u32, Cyc>>> = OnceLock::new();

impl Cyc {
    pub fn new(n: u32) -> Cyc {
        assert!(n >= 1);
        let cache = FIELD_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = cache.lock().unwrap().get(&n) {
            return f.clone();
        }
        let modulus = cyclotomic_poly_cached(n);
        let phi = modulus.len() - 1;
        // reduction table x^k mod Phi for k in 0..2phi
        let mut pow_table: Vec<Vec<BigInt>> = Vec::with_capacity(2 * phi);
        for k in 0..2 * phi {
            if k < phi {
                let mut v = vec![BigInt::zero(); phi];
                v[k] = BigInt::one();
                pow_table.push(v);
            } else {
                // x * previous, reduced
                let prev = pow_table[k - 1].clone();
                let mut v = vec![BigInt::zero(); phi];
                for (i, c) in prev.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if i + 1 < phi {
                        v[i + 1] += c;
                    } else {
                        // x^phi = -(modulus[0..phi])
                        for j in 0..phi {
                            let t = &modulus[j] * c;
                            v[j] -= t;
                        }
                    }
                }
                pow_table.push(v);
            }
        }
        let mut zeta_pow: Vec<Vec<BigInt>> = Vec::with_capacity(n as usize);
        for k in 0..n as usize {
            if k < 2 * phi {
                zeta_pow.push(pow_table[k].clone());
            } else {
                let prev = zeta_pow[k - 1].clone();
                let mut v = vec![BigInt::zero(); phi];
                for (i, c) in prev.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if i + 1 < phi {
                        v[i + 1] += c;
                    } else {
                        for j in 0..phi {
                            let t = &modulus[j] * c;
                            v[j] -= t;
                        }
                    }
                }
                zeta_pow.push(v);
            }
        }
        let zeta_pow_i64: Vec<Vec<i64>> = zeta_pow
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| i64::try_from(x).expect("zeta power coefficient overflow"))
                    .collect()
            })
            .collect();
        // Newton power sums p_k of the roots of Phi_n: p_0 = phi,
        // p_k = -k*e_k - sum_{i=1}^{k-1} e_i p_{k-i}, with e_i = signed coeffs.
        let mut trace_pow = vec![BigInt::from(phi as i64)];
        // e_i = (-1)^i * coefficient of x^{phi-i}
        let e = |i: usize| -> BigInt {
            let c = &modulus[phi - i];
            if i % 2 == 0 {
                c.clone()
            } else {
                -c.clone()
            }
        };
        for k in 1..phi.max(1) {
            let mut pk = -BigInt::from(k as i64) * e(k);
            for i in 1..k {
                pk -= e(i) * &trace_pow[k - i];
            }
            trace_pow.push(pk);
        }
        let f = Cyc(Arc::new(CycFieldInner {
            n,
            phi,
            modulus,
            pow_table,
            zeta_pow,
            zeta_pow_i64,
            trace_pow,
        }));
        cache.lock().unwrap().insert(n, f.clone());
        f
    }

    pub fn n(&self) -> u32 {
        self.0.n
    }

    pub fn degree(&self) -> usize {
        self.0.phi
    }

    /// zeta_n^k as a field element.
    pub fn zeta_pow(&self, k: i64) -> CycNumber {
        let kk = k.rem_euclid(self.0.n as i64) as usize;
        CycNumber {
            n: self.0.n,
            coeffs: self.0.zeta_pow[kk]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect(),
        }
    }

    /// Integer coefficient vector of zeta^k (reduced), for fast accumulation.
    pub fn zeta_pow_i64(&self, k: usize) -> &[i64] {
        &self.0.zeta_pow_i64[k % self.0.n as usize]
    }

    pub fn from_rational(&self, q: BigRational) -> CycNumber {
        let mut coeffs = vec![BigRational::zero(); self.0.phi];
        coeffs[0] = q;
        CycNumber { n: self.0.n, coeffs }
    }

    pub fn from_int_coeffs(&self, v: &[i64]) -> CycNumber {
        assert_eq!(v.len(), self.0.phi);
        CycNumber {
            n: self.0.n,
            coeffs: v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect(),
        }
    }

    fn reduce_product(&self, prod: &[BigRational]) -> Vec<BigRational> {
        let phi = self.0.phi;
        let mut out = vec![BigRational::zero(); phi];
        for (k, c) in prod.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let red = &self.0.pow_table[k];
            for j in 0..phi {
                if !red[j].is_zero() {
                    out[j] += c * BigRational::from_integer(red[j].clone());
                }
            }
        }
        out
    }

    /// Multiplication of raw coefficient vectors: integer convolution with
    /// the denominators factored out, so rational gcd-normalization happens
    /// once per output entry instead of once per partial product.
    fn mul_raw(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let phi = self.0.phi;
        if phi == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut da = BigInt::one();
        for x in a {
            if !x.is_zero() {
                da = num_integer::Integer::lcm(&da, x.denom());
            }
        }
        let mut db = BigInt::one();
        for x in b {
            if !x.is_zero() {
                db = num_integer::Integer::lcm(&db, x.denom());
            }
        }
        let na: Vec<BigInt> = a
            .iter()
            .map(|x| {
                if x.is_zero() {
                    BigInt::zero()
                } else {
                    x.numer() * (&da / x.denom())
                }
            })
            .collect();
        let nb: Vec<BigInt> = b
            .iter()
            .map(|x| {
                if x.is_zero() {
                    BigInt::zero()
                } else {
                    x.numer() * (&db / x.denom())
                }
            })
            .collect();
        let mut prod = vec![BigInt::zero(); 2 * phi - 1];
        for (i, ai) in na.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in nb.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                prod[i + j] += ai * bj;
            }
        }
        // reduce modulo Phi_n over the integers
        let mut out_num = vec![BigInt::zero(); phi];
        for (k, c) in prod.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let red = &self.0.pow_table[k];
            for j in 0..phi {
                if !red[j].is_zero() {
                    out_num[j] += c * &red[j];
                }
            }
        }
        let den = da * db;
        out_num
            .into_iter()
            .map(|n| {
                if n.is_zero() {
                    BigRational::zero()
                } else {
                    BigRational::new(n, den.clone())
                }
            })
            .collect()
    }

    /// Galois conjugation zeta -> zeta^a for gcd(a, n) = 1.
    pub fn conjugate(&self, x: &CycNumber, a: u64) -> CycNumber {
        assert_eq!(x.n, self.0.n);
        assert_eq!(arith::gcd(a % self.0.n as u64, self.0.n as u64), 1);
        let mut out = vec![BigRational::zero(); self.0.phi];
        for (k, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let img = &self.0.zeta_pow[((k as u64 * a) % self.0.n as u64) as usize];
            for j in 0..self.0.phi {
                if !img[j].is_zero() {
                    out[j] += c * BigRational::from_integer(img[j].clone());
                }
            }
        }
        CycNumber { n: self.0.n, coeffs: out }
    }

    /// Embed an element of Q(zeta_m) into this field, for m | n:
    /// zeta_m maps to zeta_n^(n/m).
    pub fn embed(&self, x: &CycNumber) -> CycNumber {
        let m = x.n;
        let n = self.0.n;
        assert_eq!(n % m, 0, "no embedding Q(zeta_{}) -> Q(zeta_{})", m, n);
        if m == n {
            return x.clone();
        }
        let step = (n / m) as u64;
        let mut out = vec![BigRational::zero(); self.0.phi];
        for (k, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let img = &self.0.zeta_pow[((k as u64 * step) % n as u64) as usize];
            for j in 0..self.0.phi {
                if !img[j].is_zero() {
                    out[j] += c * BigRational::from_integer(img[j].clone());
                }
            }
        }
        CycNumber { n, coeffs: out }
    }

    /// Field norm and trace down to Q.
    pub fn norm_and_trace(&self, x: &CycNumber) -> (BigRational, BigRational) {
        assert_eq!(x.n, self.0.n);
        let trace: BigRational = x
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * BigRational::from_integer(self.0.trace_pow[k].clone()))
            .sum();
        // norm via resultant(Phi_n, f) where f is the coefficient polynomial
        let modulus: Vec<BigRational> = self
            .0
            .modulus
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let norm = resultant_monic(&modulus, &x.coeffs);
        (norm, trace)
    }
}

/// Resultant of a monic polynomial `m` (ascending, degree d) with a
/// polynomial `f` of degree < d, i.e. prod of f over the roots of m.
fn resultant_monic(m: &[BigRational], f: &[BigRational]) -> BigRational {
    // Euclidean resultant: res(m, f) = lc(f)^(deg m - deg r) * ... recursively.
    fn deg(p: &[BigRational]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }
    fn rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let db = deg(b).unwrap();
        let lead = b[db].clone();
        let mut r = a.to_vec();
        while let Some(dr) = deg(&r) {
            if dr < db {
                break;
            }
            let c = &r[dr] / &lead;
            for j in 0..=db {
                let t = &b[j] * &c;
                r[dr - db + j] -= t;
            }
            r[dr] = BigRational::zero();
        }
        r
    }
    fn res(a: &[BigRational], b: &[BigRational]) -> BigRational {
        let da = deg(a).expect("zero polynomial in resultant");
        match deg(b) {
            None => {
                if da == 0 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }
            Some(0) => {
                // res(a, c) = c^deg(a)
                let mut out = BigRational::one();
                for _ in 0..da {
                    out *= &b[0];
                }
                out
            }
            Some(db) => {
                let r = rem(a, b);
                let dr = deg(&r).map(|d| d as i64).unwrap_or(-1);
                // res(a,b) = (-1)^(da*db) lc(b)^(da - dr) res(b, r)
                let mut lc_pow = BigRational::one();
                let e = da as i64 - dr;
                for _ in 0..e {
                    lc_pow *= &b[db];
                }
                let sign = if (da * db) % 2 == 1 { -1 } else { 1 };
                let sub = res(b, &r);
                BigRational::from_integer(BigInt::from(sign)) * lc_pow * sub
            }
        }
    }
    res(m, f)
}

/// An element of Q(zeta_n) on the power basis modulo Phi_n.
#[derive(Clone, PartialEq)]
pub struct CycNumber {
    pub n: u32,
    pub coeffs: Vec<BigRational>,
}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "{}", c)?;
            } else if k == 1 {
                write!(f, "{}*z{}", c, self.n)?;
            } else {
                write!(f, "{}*z{}^{}", c, self.n, k)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl serde::Serialize for CycNumber {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("CycNumber", 2)?;
        st.serialize_field("n", &self.n)?;
        let pairs: Vec<[String; 2]> = self
            .coeffs
            .iter()
            .map(|c| [c.numer().to_string(), c.denom().to_string()])
            .collect();
        st.serialize_field("coeffs", &pairs)?;
        st.end()
    }
}

impl CycNumber {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn denominator_lcm(&self) -> BigInt {
        let mut d = BigInt::one();
        for c in &self.coeffs {
            d = num_integer::Integer::lcm(&d, c.denom());
        }
        d
    }
}

impl Field for Cyc {
    type Elem = CycNumber;

    fn zero(&self) -> CycNumber {
        CycNumber { n: self.0.n, coeffs: vec![BigRational::zero(); self.0.phi] }
    }

    fn one(&self) -> CycNumber {
        let mut coeffs = vec![BigRational::zero(); self.0.phi];
        coeffs[0] = BigRational::one();
        CycNumber { n: self.0.n, coeffs }
    }

    fn is_zero(&self, a: &CycNumber) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &CycNumber, b: &CycNumber) -> CycNumber {
        debug_assert_eq!(a.n, b.n);
        CycNumber {
            n: a.n,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    fn sub(&self, a: &CycNumber, b: &CycNumber) -> CycNumber {
        debug_assert_eq!(a.n, b.n);
        CycNumber {
            n: a.n,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }

    fn neg(&self, a: &CycNumber) -> CycNumber {
        CycNumber { n: a.n, coeffs: a.coeffs.iter().map(|x| -x).collect() }
    }

    fn mul(&self, a: &CycNumber, b: &CycNumber) -> CycNumber {
        debug_assert_eq!(a.n, self.0.n);
        debug_assert_eq!(b.n, self.0.n);
        CycNumber { n: a.n, coeffs: self.mul_raw(&a.coeffs, &b.coeffs) }
    }

    fn inv(&self, a: &CycNumber) -> CycNumber {
        assert!(!a.is_zero(), "inverse of zero");
        let phi = self.0.phi;
        if phi == 1 {
            return CycNumber { n: a.n, coeffs: vec![BigRational::one() / &a.coeffs[0]] };
        }
        // monomial fast path: (c zeta^k)^{-1} = c^{-1} zeta^{n-k}
        let nz: Vec<usize> = (0..phi).filter(|&i| !a.coeffs[i].is_zero()).collect();
        if nz.len() == 1 {
            let k = nz[0];
            let zk = &self.0.zeta_pow[k];
            if zk.iter().enumerate().all(|(i, c)| (i == k) == (c.is_one()))
                && zk.iter().filter(|c| !c.is_zero()).count() == 1
            {
                let zi = self.zeta_pow((self.0.n as i64) - k as i64);
                let cinv = BigRational::one() / &a.coeffs[k];
                return CycNumber {
                    n: a.n,
                    coeffs: zi.coeffs.iter().map(|x| x * &cinv).collect(),
                };
            }
        }
        // solve x * a = 1 against the multiplication-by-a matrix; Gaussian
        // elimination keeps coefficient growth polynomial, unlike a naive
        // remainder sequence in Q[x]
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(phi);
        for k in 0..phi {
            // zeta^k * a
            let mut shifted = vec![BigRational::zero(); phi + k];
            for (i, c) in a.coeffs.iter().enumerate() {
                shifted[i + k] = c.clone();
            }
            cols.push(self.reduce_product(&shifted));
        }
        // augmented system: sum_k x_k (zeta^k a) = 1
        let mut mat: Vec<Vec<BigRational>> = (0..phi)
            .map(|row| {
                let mut r: Vec<BigRational> = (0..phi).map(|k| cols[k][row].clone()).collect();
                r.push(if row == 0 { BigRational::one() } else { BigRational::zero() });
                r
            })
            .collect();
        // forward elimination with partial pivot
        let mut x = vec![BigRational::zero(); phi];
        let mut rank_row = 0usize;
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        for col in 0..phi {
            let Some(pr) = (rank_row..phi).find(|&r| !mat[r][col].is_zero()) else {
                continue;
            };
            mat.swap(rank_row, pr);
            let inv_p = BigRational::one() / &mat[rank_row][col];
            for c in col..=phi {
                mat[rank_row][c] = &mat[rank_row][c] * &inv_p;
            }
            let pivot_row = mat[rank_row].clone();
            for (r, row) in mat.iter_mut().enumerate() {
                if r == rank_row || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for c in col..=phi {
                    let t = &f * &pivot_row[c];
                    row[c] = &row[c] - &t;
                }
            }
            pivots.push((rank_row, col));
            rank_row += 1;
            if rank_row == phi {
                break;
            }
        }
        assert_eq!(rank_row, phi, "element not invertible");
        for (r, c) in pivots {
            x[c] = mat[r][phi].clone();
        }
        CycNumber { n: a.n, coeffs: x }
    }

    fn from_i64(&self, v: i64) -> CycNumber {
        self.from_rational(BigRational::from_integer(BigInt::from(v)))
    }
}

/// Extended gcd in Q[x]: returns (g, s, t) with s*a + t*b = g.
fn poly_xgcd(
    a: &[BigRational],
    b: &[BigRational],
) -> (Vec<BigRational>, Vec<BigRational>, Vec<BigRational>) {
    fn deg(p: &[BigRational]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }
    fn divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let db = deg(b).unwrap();
        let lead = b[db].clone();
        let mut r = a.to_vec();
        let da = match deg(&r) {
            Some(d) => d,
            None => return (vec![BigRational::zero()], r),
        };
        if da < db {
            return (vec![BigRational::zero()], r);
        }
        let mut q = vec![BigRational::zero(); da - db + 1];
        while let Some(dr) = deg(&r) {
            if dr < db {
                break;
            }
            let c = &r[dr] / &lead;
            q[dr - db] = c.clone();
            for j in 0..=db {
                let t = &b[j] * &c;
                r[dr - db + j] -= t;
            }
            r[dr] = BigRational::zero();
        }
        (q, r)
    }
    fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); a.len() + b.len()];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                out[i + j] += x * y;
            }
        }
        out
    }
    fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, x) in a.iter().enumerate() {
            out[i] += x;
        }
        for (i, y) in b.iter().enumerate() {
            out[i] -= y;
        }
        out
    }
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (vec![BigRational::one()], vec![BigRational::zero()]);
    let (mut t0, mut t1) = (vec![BigRational::zero()], vec![BigRational::one()]);
    while deg(&r1).is_some() {
        let (q, r) = divmod(&r0, &r1);
        let new_s = poly_sub(&s0, &poly_mul(&q, &s1));
        let new_t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, new_s);
        t0 = std::mem::replace(&mut t1, new_t);
    }
    (r0, s0, t0)
}

// ---------------------------------------------------------------------------
// Polynomials over F_p and residue fields
// ---------------------------------------------------------------------------

mod fp {
    use crate::arith::{inv_mod, mul_mod};

    pub fn trim(p: &mut Vec<u64>) {
        while p.len() > 1 && *p.last().unwrap() == 0 {
            p.pop();
        }
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut modulus = m.to_vec();
        trim(&mut modulus);
        let dm = modulus.len() - 1;
        if dm == 0 {
            assert!(modulus[0] != 0, "rem by zero polynomial");
            return vec![0];
        }
        let mut r = a.to_vec();
        trim(&mut r);
        let lead_inv = inv_mod(modulus[dm], p);
        while r.len() > dm {
            let d = r.len() - 1;
            let c = mul_mod(*r.last().unwrap(), lead_inv, p);
            if c != 0 {
                for j in 0..=dm {
                    let idx = d - dm + j;
                    let t = mul_mod(modulus[j], c, p);
                    r[idx] = (r[idx] + p - t) % p;
                }
            }
            r.pop();
            trim(&mut r);
        }
        trim(&mut r);
        if r.is_empty() {
            r.push(0);
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        trim(&mut a);
        trim(&mut b);
        while !(b.len() == 1 && b[0] == 0) {
            let r = rem(&a, &b, p);
            a = std::mem::replace(&mut b, r);
        }
        // make monic
        if !(a.len() == 1 && a[0] == 0) {
            let inv = inv_mod(*a.last().unwrap(), p);
            for c in a.iter_mut() {
                *c = mul_mod(*c, inv, p);
            }
        }
        a
    }

    pub fn pow_mod_poly(base: &[u64], mut e: u128, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        acc
    }

    /// Equal-degree factorization (Cantor-Zassenhaus) of a squarefree monic
    /// polynomial whose irreducible factors all have degree d. Deterministic:
    /// candidate elements are enumerated in a fixed order.
    pub fn equal_degree_factor(f: &[u64], d: usize, p: u64) -> Vec<Vec<u64>> {
        let deg = f.len() - 1;
        if deg == d {
            return vec![f.to_vec()];
        }
        assert_eq!(deg % d, 0);
        // try split candidates a(x) = x + c, then higher-degree ones
        let exponent: u128 = (num_traits::pow::pow(p as u128, d) - 1) / 2;
        let mut candidates: Vec<Vec<u64>> = Vec::new();
        for c in 0..p.min(64) {
            candidates.push(vec![c, 1]);
        }
        for c in 0..p.min(64) {
            candidates.push(vec![c, 0, 1]);
            candidates.push(vec![c, 1, 1]);
        }
        for a in candidates {
            if p == 2 {
                break; // p = 2 never occurs (engine skips p = 2)
            }
            let g1 = gcd(f, &a, p);
            if g1.len() > 1 && g1.len() - 1 < deg {
                let rest = exact_div(f, &g1, p);
                let mut out = equal_degree_factor(&g1, d, p);
                out.extend(equal_degree_factor(&rest, d, p));
                return out;
            }
            let b = pow_mod_poly(&a, exponent, f, p);
            // gcd(f, b - 1)
            let mut bm1 = b.clone();
            if bm1.is_empty() {
                bm1 = vec![0];
            }
            bm1[0] = (bm1[0] + p - 1) % p;
            trim(&mut bm1);
            let g = gcd(f, &bm1, p);
            let dg = g.len() - 1;
            if dg > 0 && dg < deg {
                let rest = exact_div(f, &g, p);
                let mut out = equal_degree_factor(&g, d, p);
                out.extend(equal_degree_factor(&rest, d, p));
                return out;
            }
        }
        panic!("equal-degree factorization failed (p={}, d={})", p, d);
    }

    pub fn exact_div(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let db = b.len() - 1;
        let da = a.len() - 1;
        let lead_inv = inv_mod(b[db], p);
        let mut r = a.to_vec();
        let mut q = vec![0u64; da - db + 1];
        for i in (0..=da - db).rev() {
            let c = mul_mod(r[i + db], lead_inv, p);
            q[i] = c;
            if c != 0 {
                for j in 0..=db {
                    let t = mul_mod(b[j], c, p);
                    r[i + j] = (r[i + j] + p - t) % p;
                }
            }
        }
        assert!(r.iter().all(|&x| x == 0), "non-exact division over F_p");
        trim(&mut q);
        q
    }

    /// Evaluate a polynomial at a point of F_p.
    pub fn eval(f: &[u64], x: u64, p: u64) -> u64 {
        let mut acc = 0u64;
        for &c in f.iter().rev() {
            acc = (mul_mod(acc, x, p) + c) % p;
        }
        acc
    }
}

/// A prime ideal of Z[zeta_n] above p, given by an irreducible factor of
/// Phi_{n0} mod p where n = n0 * p^j with p not dividing n0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeIdeal {
    pub p: u64,
    /// The cyclotomic order whose ring this ideal lives in.
    pub n: u32,
    /// Prime-to-p part of n.
    pub n0: u32,
    /// Monic irreducible factor of Phi_{n0} mod p, ascending coefficients.
    pub factor: Vec<u64>,
    pub residue_degree: usize,
}

/// All prime ideals of Z[zeta_n] above p, for p not dividing n. Residue
/// degrees equal the multiplicative order of p mod n.
pub fn factor_prime(p: u64, n: u32) -> Result<Vec<PrimeIdeal>, String> {
    if !arith::is_prime(p) {
        return Err(format!("{} is not prime", p));
    }
    if n as u64 % p == 0 {
        return Err(format!("p = {} divides n = {} (ramified case rejected)", p, n));
    }
    Ok(ideals_above(p, n))
}

/// Prime ideals of Z[zeta_n] above p for arbitrary n (internally the engine
/// also needs p | n, where p is totally ramified in the p-power part).
pub fn ideals_above(p: u64, n: u32) -> Vec<PrimeIdeal> {
    let mut n0 = n;
    while n0 as u64 % p == 0 {
        n0 /= p as u32;
    }
    let d = if n0 == 1 { 1 } else { mult_order(p, n0 as u64) as usize };
    // Phi_{n0} mod p
    let phi_poly = cyclotomic_poly_cached(n0);
    let pp = BigInt::from(p);
    let reduced: Vec<u64> = phi_poly
        .iter()
        .map(|c| {
            let r = ((c % &pp) + &pp) % &pp;
            u64::try_from(&r).unwrap()
        })
        .collect();
    let mut factors = if n0 == 1 {
        vec![vec![0, 1]] // the ideal (p) itself; residue field F_p, "factor" x
    } else {
        fp::equal_degree_factor(&reduced, d, p)
    };
    // canonical order: ascending coefficient tuples
    factors.sort();
    factors
        .into_iter()
        .map(|factor| PrimeIdeal {
            p,
            n,
            n0,
            residue_degree: if n0 == 1 { 1 } else { d },
            factor: if n0 == 1 { vec![0, 1] } else { factor },
        })
        .collect()
}

/// The residue field Z[zeta_n]/lambda, elements as F_p[x]/(factor).
#[derive(Debug)]
pub struct ResidueFieldInner {
    pub ideal: PrimeIdeal,
    /// Image of zeta_n under reduction: a power of the canonical root x.
    zeta_image: Vec<u64>,
    /// Precomputed images of zeta_n^k for k in 0..n.
    zeta_pow_images: Vec<Vec<u64>>,
}

#[derive(Clone)]
pub struct ResidueField(pub Arc<ResidueFieldInner>);

impl fmt::Debug for ResidueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F_{}^{} (n={}, factor={:?})",
            self.0.ideal.p, self.0.ideal.residue_degree, self.0.ideal.n, self.0.ideal.factor
        )
    }
}

impl PartialEq for ResidueField {
    fn eq(&self, other: &Self) -> bool {
        self.0.ideal == other.0.ideal
    }
}

/// Element of a residue field: coefficients of a polynomial of degree
/// < residue_degree over F_p, ascending.
pub type ResElem = Vec<u64>;

impl ResidueField {
    pub fn new(ideal: &PrimeIdeal) -> ResidueField {
        let p = ideal.p;
        let n = ideal.n as u64;
        let n0 = ideal.n0 as u64;
        let e = n / n0; // p-power part
        // canonical root of the factor is x; zeta_{n0} maps to x.
        // zeta_n maps to x^alpha with alpha * e = 1 mod n0 (so that
        // zeta_n^e |-> x, matching the subfield convention).
        let alpha = if n0 == 1 { 0 } else { arith::inv_mod(e % n0, n0) };
        let d = ideal.residue_degree;
        let mut zeta_image = vec![0u64; d.max(2)];
        if n0 == 1 {
            zeta_image = vec![1]; // zeta maps to 1
        } else {
            zeta_image = vec![0, 1];
            zeta_image = fp::pow_mod_poly(&zeta_image, alpha as u128, &ideal.factor, p);
        }
        let mut zeta_pow_images = Vec::with_capacity(ideal.n as usize);
        let mut acc = vec![1u64];
        for _ in 0..ideal.n {
            zeta_pow_images.push(normalize_len(&acc, d));
            acc = fp::rem(&fp::mul(&acc, &zeta_image, p), &ideal.factor, p);
        }
        ResidueField(Arc::new(ResidueFieldInner {
            ideal: ideal.clone(),
            zeta_image: normalize_len(&zeta_image, d),
            zeta_pow_images,
        }))
    }

    pub fn p(&self) -> u64 {
        self.0.ideal.p
    }

    pub fn degree(&self) -> usize {
        self.0.ideal.residue_degree
    }

    pub fn zeta_image(&self) -> &[u64] {
        &self.0.zeta_image
    }

    /// Reduce an integral cyclotomic number mod the ideal.
    pub fn reduce(&self, x: &CycNumber) -> Result<ResElem, String> {
        if !x.is_integral() {
            return Err("reduce: non-integral coefficients".into());
        }
        Ok(self.reduce_rational(x).expect("integral input"))
    }

    /// Reduce a cyclotomic number whose coefficient denominators are coprime
    /// to p (inverts denominators in F_p).
    pub fn reduce_rational(&self, x: &CycNumber) -> Result<ResElem, String> {
        assert_eq!(x.n, self.0.ideal.n, "field mismatch in reduction");
        let p = self.p();
        let d = self.degree();
        let pp = BigInt::from(p);
        let mut out = vec![0u64; d];
        for (k, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let num = ((c.numer() % &pp) + &pp) % &pp;
            let den = ((c.denom() % &pp) + &pp) % &pp;
            let den_u = u64::try_from(&den).unwrap();
            if den_u == 0 {
                return Err(format!("denominator divisible by p = {}", p));
            }
            let v = arith::mul_mod(u64::try_from(&num).unwrap(), arith::inv_mod(den_u, p), p);
            if v == 0 {
                continue;
            }
            let img = &self.0.zeta_pow_images[k % self.0.ideal.n as usize];
            for j in 0..d {
                out[j] = (out[j] + arith::mul_mod(v, img[j], p)) % p;
            }
        }
        Ok(out)
    }

    /// Multiplicative order of a nonzero element.
    pub fn elem_order(&self, a: &ResElem) -> u64 {
        assert!(!self.is_zero(a));
        let q: u64 = num_traits::pow::pow(self.p(), self.degree()) - 1;
        let mut ord = q;
        for (f, _) in arith::factor(q) {
            while ord % f == 0 && self.is_one(&self.pow(a, ord / f)) {
                ord /= f;
            }
        }
        ord
    }

    pub fn pow(&self, a: &ResElem, mut e: u64) -> ResElem {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    /// Frobenius x -> x^p.
    pub fn frobenius(&self, a: &ResElem) -> ResElem {
        self.pow(a, self.p())
    }

    pub fn from_u64(&self, v: u64) -> ResElem {
        let mut out = vec![0u64; self.degree()];
        out[0] = v % self.p();
        out
    }
}

fn normalize_len(v: &[u64], d: usize) -> Vec<u64> {
    let mut out = v.to_vec();
    out.resize(d.max(1), 0);
    out.truncate(d.max(1));
    out
}

impl Field for ResidueField {
    type Elem = ResElem;

    fn zero(&self) -> ResElem {
        vec![0; self.degree()]
    }

    fn one(&self) -> ResElem {
        let mut v = vec![0; self.degree()];
        v[0] = 1;
        v
    }

    fn is_zero(&self, a: &ResElem) -> bool {
        a.iter().all(|&x| x == 0)
    }

    fn add(&self, a: &ResElem, b: &ResElem) -> ResElem {
        let p = self.p();
        a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
    }

    fn sub(&self, a: &ResElem, b: &ResElem) -> ResElem {
        let p = self.p();
        a.iter().zip(b).map(|(x, y)| (x + p - y) % p).collect()
    }

    fn neg(&self, a: &ResElem) -> ResElem {
        let p = self.p();
        a.iter().map(|x| (p - x) % p).collect()
    }

    fn mul(&self, a: &ResElem, b: &ResElem) -> ResElem {
        let p = self.p();
        let prod = fp::mul(a, b, p);
        let red = fp::rem(&prod, &self.0.ideal.factor, p);
        normalize_len(&red, self.degree())
    }

    fn inv(&self, a: &ResElem) -> ResElem {
        assert!(!self.is_zero(a), "inverse of zero residue");
        let q: u64 = num_traits::pow::pow(self.p(), self.degree());
        self.pow(a, q - 2)
    }

    fn from_i64(&self, v: i64) -> ResElem {
        let p = self.p() as i64;
        self.from_u64(v.rem_euclid(p) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(cyclotomic_poly(4), vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]);
        assert_eq!(
            cyclotomic_poly(6),
            vec![BigInt::from(1), BigInt::from(-1), BigInt::from(1)]
        );
        // Phi_40 = x^16 - x^12 + x^8 - x^4 + 1
        let p40 = cyclotomic_poly(40);
        assert_eq!(p40.len(), 17);
        assert_eq!(p40[16], BigInt::one());
        assert_eq!(p40[12], BigInt::from(-1));
        assert_eq!(p40[8], BigInt::one());
        assert_eq!(p40[4], BigInt::from(-1));
        assert_eq!(p40[0], BigInt::one());
    }

    #[test]
    fn zeta_relations() {
        for n in [1u32, 3, 4, 5, 8, 12, 40] {
            let f = Cyc::new(n);
            let z = f.zeta_pow(1);
            // zeta^n = 1
            let mut acc = f.one();
            for _ in 0..n {
                acc = f.mul(&acc, &z);
            }
            assert_eq!(acc, f.one(), "zeta_{}^{} != 1", n, n);
            // Phi_n(zeta) = 0
            let modulus = cyclotomic_poly(n);
            let mut val = f.zero();
            for (k, c) in modulus.iter().enumerate() {
                let term = f.mul(
                    &f.from_rational(BigRational::from_integer(c.clone())),
                    &f.zeta_pow(k as i64),
                );
                val = f.add(&val, &term);
            }
            assert!(val.is_zero(), "Phi_{}(zeta) != 0", n);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Cyc::new(12);
        let x = CycNumber { n: 12, coeffs: vec![q(3), q(-1), q(2), q(5)] };
        let xi = f.inv(&x);
        assert_eq!(f.mul(&x, &xi), f.one());
    }

    #[test]
    fn norm_trace_examples() {
        let f = Cyc::new(4);
        let (n1, t1) = f.norm_and_trace(&f.one());
        assert_eq!((n1, t1), (q(1), q(2)));
        let (nz, tz) = f.norm_and_trace(&f.zeta_pow(1));
        assert_eq!((nz, tz), (q(1), q(0)));
        let one_plus_i = f.add(&f.one(), &f.zeta_pow(1));
        let (n, t) = f.norm_and_trace(&one_plus_i);
        assert_eq!((n, t), (q(2), q(2))); // (1+i)(1-i) = 2
    }

    #[test]
    fn norm_multiplicative_random() {
        let f = Cyc::new(12);
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 9) as i64 - 4
        };
        for _ in 0..250 {
            let a = f.from_int_coeffs(&[rng(), rng(), rng(), rng()]);
            let b = f.from_int_coeffs(&[rng(), rng(), rng(), rng()]);
            let (na, _) = f.norm_and_trace(&a);
            let (nb, _) = f.norm_and_trace(&b);
            let (nab, _) = f.norm_and_trace(&f.mul(&a, &b));
            assert_eq!(nab, na * nb);
        }
    }

    #[test]
    fn factor_prime_examples() {
        // 3 inert in Z[i]
        let ids = factor_prime(3, 4).unwrap();
        assert_eq!(ids.len(), 1);
        assert_eq!(ids[0].residue_degree, 2);
        // 5 = 1 mod 4 splits
        let ids = factor_prime(5, 4).unwrap();
        assert_eq!(ids.len(), 2);
        assert!(ids.iter().all(|i| i.residue_degree == 1));
        // 199 has order 2 mod 40: eight ideals of degree 2, covering phi(40) = 16
        let ids = factor_prime(199, 40).unwrap();
        assert_eq!(ids.len(), 8);
        assert!(ids.iter().all(|i| i.residue_degree == 2));
        assert_eq!(
            ids.iter().map(|i| i.residue_degree).sum::<usize>(),
            euler_phi(40) as usize
        );
        // the paper's factor X^2 + 127X + 1 appears among them
        assert!(
            ids.iter().any(|i| i.factor == vec![1, 127, 1]),
            "x^2+127x+1 must divide Phi_40 mod 199"
        );
        // ramified rejected
        assert!(factor_prime(3, 6).is_err());
        assert!(factor_prime(4, 5).is_err());
    }

    #[test]
    fn residue_degree_sum_property() {
        for &(p, n) in &[(3u64, 8u32), (5, 12), (7, 9), (11, 40), (13, 36), (199, 40)] {
            let ids = factor_prime(p, n).unwrap();
            let total: usize = ids.iter().map(|i| i.residue_degree).sum();
            assert_eq!(total, euler_phi(n as u64) as usize, "p={}, n={}", p, n);
            let d = mult_order(p, n as u64) as usize;
            assert!(ids.iter().all(|i| i.residue_degree == d));
        }
    }

    #[test]
    fn reduce_examples() {
        // reduce(zeta_4, ideal above 5 with factor x - 2) -> 2 mod 5
        let ids = factor_prime(5, 4).unwrap();
        let f4 = Cyc::new(4);
        let target = ids.iter().find(|i| i.factor == vec![3, 1]).unwrap(); // x + 3 = x - 2
        let rf = ResidueField::new(target);
        let img = rf.reduce(&f4.zeta_pow(1)).unwrap();
        assert_eq!(img, vec![2]);
        // 2^2 = 4 = -1 mod 5 indeed

        // reduce(0) = 0 in any field
        assert!(rf.is_zero(&rf.reduce(&f4.zero()).unwrap()));

        // zeta_40^k has order 40/gcd(k,40) in F_199^2
        let ids = factor_prime(199, 40).unwrap();
        let lambda = ids.iter().find(|i| i.factor == vec![1, 127, 1]).unwrap();
        let rf = ResidueField::new(lambda);
        let f40 = Cyc::new(40);
        for k in [1u64, 2, 4, 5, 8, 11] {
            let img = rf.reduce(&f40.zeta_pow(k as i64)).unwrap();
            assert_eq!(rf.elem_order(&img), 40 / arith::gcd(k, 40), "k = {}", k);
        }
        // non-integral input rejected
        let half = f4.from_rational(BigRational::new(BigInt::one(), BigInt::from(2)));
        assert!(rf_err(&rf));
        fn rf_err(_rf: &ResidueField) -> bool {
            true
        }
        let ids5 = factor_prime(5, 4).unwrap();
        let rf5 = ResidueField::new(&ids5[0]);
        assert!(rf5.reduce(&half).is_err());
    }

    #[test]
    fn reduce_is_ring_hom_random() {
        let f = Cyc::new(12);
        let ids = factor_prime(7, 12).unwrap();
        let mut state = 0xDEADBEEFCAFEu64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 11) as i64 - 5
        };
        for ideal in &ids {
            let rf = ResidueField::new(ideal);
            for _ in 0..100 {
                let a = f.from_int_coeffs(&[rng(), rng(), rng(), rng()]);
                let b = f.from_int_coeffs(&[rng(), rng(), rng(), rng()]);
                let ra = rf.reduce(&a).unwrap();
                let rb = rf.reduce(&b).unwrap();
                assert_eq!(rf.reduce(&f.mul(&a, &b)).unwrap(), rf.mul(&ra, &rb));
                assert_eq!(rf.reduce(&f.add(&a, &b)).unwrap(), rf.add(&ra, &rb));
            }
        }
    }

    #[test]
    fn ramified_reduction_consistency() {
        // n = 12 = 4 * 3, p = 3: zeta_3 part collapses to 1; reduction of an
        // element of Q(zeta_4) embedded in Q(zeta_12) must match the direct
        // reduction in Q(zeta_4).
        let f4 = Cyc::new(4);
        let f12 = Cyc::new(12);
        let ids12 = ideals_above(3, 12);
        let ids4 = ideals_above(3, 4);
        assert_eq!(ids12.len(), ids4.len());
        for (i12, i4) in ids12.iter().zip(ids4.iter()) {
            assert_eq!(i12.factor, i4.factor);
            let r12 = ResidueField::new(i12);
            let r4 = ResidueField::new(i4);
            for k in 0..4 {
                let x4 = f4.zeta_pow(k);
                let x12 = f12.embed(&x4);
                assert_eq!(r12.reduce(&x12).unwrap(), r4.reduce(&x4).unwrap());
            }
            // zeta_12^4 = zeta_3 reduces to 1
            let z3 = f12.zeta_pow(4);
            assert!(r12.is_one(&r12.reduce(&z3).unwrap()));
        }
    }

    #[test]
    fn embedding_is_ring_hom() {
        let f6 = Cyc::new(6);
        let f12 = Cyc::new(12);
        let a = f6.zeta_pow(1);
        let b = f6.add(&f6.one(), &f6.zeta_pow(5));
        let ab = f6.mul(&a, &b);
        assert_eq!(f12.embed(&ab), f12.mul(&f12.embed(&a), &f12.embed(&b)));
    }
}
