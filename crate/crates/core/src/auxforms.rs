//! Generators of auxiliary weight-one multipliers and independent q-expansion
//! oracles: Eisenstein series with character, eta products, and binary
//! quadratic form theta series.
//!
//! Multipliers are the forms f the engine divides weight-two lattices by.
//! Everything is emitted with integral coefficients (Eisenstein series are
//! scaled to clear the constant term's denominator), and each multiplier
//! records the primes at which its leading coefficient degenerates so the
//! mod-p pipeline can skip it there.

use crate::arith::{self, divisors, gcd, lcm};
use crate::cyclotomic::{Cyc, CycNumber};
use crate::dirichlet::{primitive_characters, DirichletChar};
use crate::field::Field;
use crate::qseries::QSeries;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// L(0, chi) = -(1/f) sum_{a=1}^{f} chi(a) a, for chi odd and primitive of
/// conductor f. This is the constant-term ingredient of weight-one
/// Eisenstein series.
pub fn l_value_at_zero(chi: &DirichletChar, field: &Cyc) -> CycNumber {
    assert!(chi.is_odd(), "L(0, chi) formula requires odd chi");
    assert!(chi.is_primitive());
    let f = chi.modulus;
    let mut acc = field.zero();
    for a in 1..f {
        if gcd(a, f) != 1 {
            continue;
        }
        let v = chi.value_in(field, a);
        let term = v.coeffs.iter().map(|c| c * BigRational::from_integer(BigInt::from(a))).collect();
        acc = field.add(&acc, &CycNumber { n: field.n(), coeffs: term });
    }
    let scale = -BigRational::new(BigInt::one(), BigInt::from(f));
    CycNumber {
        n: field.n(),
        coeffs: acc.coeffs.iter().map(|c| c * &scale).collect(),
    }
}

/// A weight-one Eisenstein series attached to a pair of primitive characters
/// with odd product, scaled to integral coefficients.
#[derive(Clone, Debug)]
pub struct EisensteinSeries1 {
    pub chi1: DirichletChar,
    pub chi2: DirichletChar,
    /// cond(chi1) * cond(chi2).
    pub level: u64,
    /// The positive integer cleared from the constant term.
    pub scale: BigInt,
    /// scale * (unscaled series), integral coefficients.
    pub scaled_series: QSeries<Cyc>,
}

/// E_1(chi1, chi2): a_m = sum_{d | m} chi1(m/d) chi2(d) for m >= 1, with
/// constant term L(0, chi2)/2 when chi1 is trivial and 0 otherwise.
pub fn eisenstein1(
    chi1: &DirichletChar,
    chi2: &DirichletChar,
    precision: i64,
) -> Result<EisensteinSeries1, String> {
    if !chi1.is_primitive() || !chi2.is_primitive() {
        return Err("eisenstein1 requires primitive characters".into());
    }
    if chi1.parity() * chi2.parity() != -1 {
        return Err("eisenstein1 requires chi1*chi2 odd".into());
    }
    let f1 = chi1.modulus;
    let f2 = chi2.modulus;
    let n = lcm(chi1.order(), chi2.order()) as u32;
    let field = Cyc::new(n);
    let mut coeffs: Vec<CycNumber> = Vec::with_capacity(precision as usize + 1);
    let a0 = if f1 == 1 {
        let l0 = l_value_at_zero(chi2, &field);
        CycNumber {
            n,
            coeffs: l0
                .coeffs
                .iter()
                .map(|c| c / BigRational::from_integer(BigInt::from(2)))
                .collect(),
        }
    } else {
        field.zero()
    };
    coeffs.push(a0.clone());
    for m in 1..=precision as u64 {
        let mut am = field.zero();
        for d in divisors(m) {
            let v1 = chi1.value_in(&field, (m / d) % f1.max(1));
            if v1.is_zero() {
                continue;
            }
            let v2 = chi2.value_in(&field, d % f2.max(1));
            if v2.is_zero() {
                continue;
            }
            am = field.add(&am, &field.mul(&v1, &v2));
        }
        coeffs.push(am);
    }
    // clear denominators (only a_0 can be non-integral)
    let mut scale = BigInt::one();
    for c in &coeffs {
        scale = num_integer::Integer::lcm(&scale, &c.denominator_lcm());
    }
    let scale_elt = field.from_rational(BigRational::from_integer(scale.clone()));
    let scaled: Vec<CycNumber> = coeffs.iter().map(|c| field.mul(c, &scale_elt)).collect();
    Ok(EisensteinSeries1 {
        chi1: chi1.clone(),
        chi2: chi2.clone(),
        level: f1 * f2,
        scale,
        scaled_series: QSeries::from_coeffs(&field, 0, precision, scaled),
    })
}

/// Euler function prod_{m>=1} (1 - q^m) to the given precision, by the
/// pentagonal number theorem.
pub fn euler_function(field: &Cyc, precision: i64) -> QSeries<Cyc> {
    let mut coeffs = vec![field.zero(); precision.max(0) as usize + 1];
    let mut k: i64 = 0;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let mut any = false;
        if e1 <= precision {
            coeffs[e1 as usize] = field.add(&coeffs[e1 as usize], &field.from_i64(sign));
            any = true;
        }
        if k > 0 && e2 <= precision {
            coeffs[e2 as usize] = field.add(&coeffs[e2 as usize], &field.from_i64(sign));
            any = true;
        }
        if !any && k > 0 {
            break;
        }
        k += 1;
    }
    QSeries::from_coeffs(field, 0, precision, coeffs)
}

/// Eta product q^(sum d e / 24) prod_d prod_m (1 - q^(d m))^(e_d), truncated.
/// Rejects specs whose leading exponent is fractional.
pub fn eta_product(spec: &[(u64, i64)], precision: i64) -> Result<QSeries<Cyc>, String> {
    let weight24: i64 = spec.iter().map(|&(d, e)| d as i64 * e).sum();
    if weight24 % 24 != 0 {
        return Err(format!(
            "eta product with sum d*e = {} has fractional leading exponent",
            weight24
        ));
    }
    let lead = weight24 / 24;
    let field = Cyc::new(1);
    let rel_prec = precision - lead; // relative precision for the product part
    assert!(rel_prec >= 0, "precision below the leading exponent");
    let mut acc = {
        let mut v = vec![field.zero(); rel_prec as usize + 1];
        v[0] = field.one();
        QSeries::from_coeffs(&field, 0, rel_prec, v)
    };
    for &(d, e) in spec {
        if e == 0 {
            continue;
        }
        let euler = euler_function(&field, rel_prec / d as i64);
        let substituted = substitute_qpow(&euler, d as i64, rel_prec);
        let powed = series_pow(&substituted, e)?;
        acc = acc.mul(&powed).truncate(rel_prec);
    }
    Ok(QSeries {
        field,
        val_floor: acc.val_floor + lead,
        prec: acc.prec + lead,
        coeffs: acc.coeffs,
    })
}

fn substitute_qpow(s: &QSeries<Cyc>, d: i64, prec: i64) -> QSeries<Cyc> {
    let field = &s.field;
    let mut coeffs = vec![field.zero(); prec as usize + 1];
    for (i, c) in s.coeffs.iter().enumerate() {
        let k = (s.val_floor + i as i64) * d;
        if k <= prec {
            coeffs[k as usize] = c.clone();
        }
    }
    QSeries::from_coeffs(field, 0, prec, coeffs)
}

fn series_pow(s: &QSeries<Cyc>, e: i64) -> Result<QSeries<Cyc>, String> {
    let field = s.field.clone();
    let one = QSeries::from_coeffs(&field, 0, s.prec, {
        let mut v = vec![field.zero(); s.prec as usize + 1];
        v[0] = field.one();
        v
    });
    let mut acc = one.clone();
    let invert = e < 0;
    let mut e = e.unsigned_abs();
    let mut base = s.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base).truncate(s.prec);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base).truncate(s.prec);
        }
    }
    if invert {
        one.div(&acc)
    } else {
        Ok(acc)
    }
}

/// Representation-number theta series of a positive definite integral binary
/// quadratic form: coefficient of q^m counts (x, y) with ax^2 + bxy + cy^2 = m,
/// including the constant term 1 from the origin.
pub fn theta_series(form: (i64, i64, i64), precision: i64) -> Result<QSeries<Cyc>, String> {
    let (a, b, c) = form;
    let disc = b * b - 4 * a * c;
    if disc >= 0 || a <= 0 {
        return Err(format!("form ({}, {}, {}) is not positive definite", a, b, c));
    }
    let field = Cyc::new(1);
    let mut counts = vec![0i64; precision as usize + 1];
    // 4a Q(x,y) = (2ax + by)^2 + |D| y^2 bounds both variables
    let ymax = ((4 * a * precision) as f64 / (-disc) as f64).sqrt() as i64 + 2;
    let xmax = ((4 * c * precision) as f64 / (-disc) as f64).sqrt() as i64 + 2;
    for x in -xmax..=xmax {
        for y in -ymax..=ymax {
            let m = a * x * x + b * x * y + c * y * y;
            if m >= 0 && m <= precision {
                counts[m as usize] += 1;
            }
        }
    }
    Ok(QSeries::from_coeffs(
        &field,
        0,
        precision,
        counts.into_iter().map(|v| field.from_i64(v)).collect(),
    ))
}

/// Signed combination of theta series.
pub fn theta_combination(
    forms: &[(i64, (i64, i64, i64))],
    precision: i64,
) -> Result<QSeries<Cyc>, String> {
    let field = Cyc::new(1);
    let mut acc = QSeries::from_coeffs(
        &field,
        0,
        precision,
        vec![field.zero(); precision as usize + 1],
    );
    for &(sign, form) in forms {
        let t = theta_series(form, precision)?;
        acc = acc.add(&t.scale(&field.from_i64(sign)));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Multiplier pool
// ---------------------------------------------------------------------------

/// Construction recipe of a multiplier, kept for regeneration at higher
/// precision.
#[derive(Clone, Debug)]
pub enum MultiplierKind {
    Eisenstein { chi1: DirichletChar, chi2: DirichletChar, dilation: u64 },
    EtaProduct { a: u64, b: u64 },
    Theta { form: (i64, i64, i64), dilation: u64 },
}

/// A weight-one multiplier: a nonzero holomorphic weight-one form of level N
/// with known integral q-expansion and known character.
#[derive(Clone, Debug)]
pub struct Multiplier {
    pub name: String,
    pub kind: MultiplierKind,
    /// Nebentypus as a character mod N (always odd).
    pub character: DirichletChar,
    /// Integral q-expansion over Q(zeta_(order of the defining characters)).
    pub series: QSeries<Cyc>,
    /// Primes dividing the norm of the leading coefficient; the mod-p
    /// pipeline skips this multiplier at such p (division loses integrality).
    pub bad_primes: Vec<u64>,
    /// Conductor-order sort key (level of definition).
    pub conductor: u64,
}

fn leading_bad_primes(field: &Cyc, s: &QSeries<Cyc>) -> Vec<u64> {
    let v = s.valuation().expect("multiplier is nonzero");
    let lead = s.coeff(v);
    let (norm, _) = field.norm_and_trace(&lead);
    let n = norm.numer().abs();
    match u64::try_from(&n) {
        Ok(small) => arith::factor(small).into_iter().map(|(p, _)| p).collect(),
        // oversized norms never occur for the pool's leading terms; the
        // reduction path re-checks invertibility anyway
        Err(_) => vec![],
    }
}

/// All multipliers available at level N: Eisenstein pairs E_1(chi1, chi2)(q^t)
/// with t cond(chi1) cond(chi2) | N, eta products, and theta series of
/// discriminants dividing N. Sorted by increasing conductor of definition.
pub fn multipliers_for(n: u64, precision: i64) -> Vec<Multiplier> {
    let mut out: Vec<Multiplier> = Vec::new();
    // --- Eisenstein series ---
    for f1 in divisors(n) {
        for f2 in divisors(n / f1) {
            for chi1 in primitive_characters(f1) {
                for chi2 in primitive_characters(f2) {
                    if f1 * f2 == 1 {
                        continue;
                    }
                    // dedup E(chi1, chi2) = E(chi2, chi1)
                    if (f1, &chi1.exps) > (f2, &chi2.exps) {
                        continue;
                    }
                    if chi1.parity() * chi2.parity() != -1 {
                        continue;
                    }
                    let e = match eisenstein1(&chi1, &chi2, precision) {
                        Ok(e) => e,
                        Err(_) => continue,
                    };
                    let base_level = f1 * f2;
                    for t in divisors(n / base_level) {
                        let series = dilate(&e.scaled_series, t as i64, precision);
                        let field = series.field.clone();
                        let bad = leading_bad_primes(&field, &series);
                        let alpha = crate::dirichlet::mul_at(n, &chi1, &chi2);
                        out.push(Multiplier {
                            name: if t == 1 {
                                format!("E({},{})", chi1.canonical_key(), chi2.canonical_key())
                            } else {
                                format!(
                                    "E({},{};q^{})",
                                    chi1.canonical_key(),
                                    chi2.canonical_key(),
                                    t
                                )
                            },
                            kind: MultiplierKind::Eisenstein {
                                chi1: chi1.clone(),
                                chi2: chi2.clone(),
                                dilation: t,
                            },
                            character: alpha,
                            series,
                            bad_primes: bad,
                            conductor: base_level * t,
                        });
                    }
                }
            }
        }
    }
    // --- eta products eta(q^a) eta(q^b), a + b = 0 mod 24, holomorphic ---
    for a in 1..=n {
        for b in a..=n {
            if (a + b) % 24 != 0 {
                continue;
            }
            let l = lcm(a, b);
            if l == 0 || n % l != 0 {
                continue;
            }
            let mut level = None;
            for cand in divisors(n) {
                if cand % l != 0 {
                    continue;
                }
                if (cand / a + cand / b) % 24 != 0 {
                    continue;
                }
                if eta_holomorphic(&[(a, 1), (b, 1)], cand) {
                    level = Some(cand);
                    break;
                }
            }
            let Some(level) = level else { continue };
            let series = match eta_product(&[(a, 1), (b, 1)], precision) {
                Ok(s) => s,
                Err(_) => continue,
            };
            // character of a weight-one eta quotient: Kronecker symbol of
            // -prod(delta^r) cast to a discriminant
            let disc = fundamental_like_disc(-((a * b) as i64));
            let chi = DirichletChar::kronecker_char(disc).extend_to(n);
            if !chi.is_odd() {
                continue;
            }
            out.push(Multiplier {
                name: format!("eta({},{})", a, b),
                kind: MultiplierKind::EtaProduct { a, b },
                character: chi,
                series,
                bad_primes: vec![],
                conductor: level,
            });
        }
    }
    // --- theta series of definite forms with |D| dividing N ---
    for dabs in divisors(n) {
        let d = -(dabs as i64);
        if !(d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1) || d >= -3 {
            continue;
        }
        for form in reduced_forms(d) {
            for t in divisors(n / dabs) {
                let theta = match theta_series(form, precision) {
                    Ok(s) => dilate(&s, t as i64, precision),
                    Err(_) => continue,
                };
                let chi = DirichletChar::kronecker_char(d).extend_to(n);
                if !chi.is_odd() {
                    continue;
                }
                out.push(Multiplier {
                    name: if t == 1 {
                        format!("theta({},{},{})", form.0, form.1, form.2)
                    } else {
                        format!("theta({},{},{};q^{})", form.0, form.1, form.2, t)
                    },
                    kind: MultiplierKind::Theta { form, dilation: t },
                    character: chi,
                    series: theta,
                    bad_primes: vec![],
                    conductor: dabs * t,
                });
            }
        }
    }
    // low-order nebentypus first: the weight-two spaces they trigger live in
    // small cyclotomic fields
    out.sort_by(|a, b| {
        (a.conductor, a.character.order(), &a.name).cmp(&(b.conductor, b.character.order(), &b.name))
    });
    out
}

impl Multiplier {
    /// The same multiplier at a higher precision.
    pub fn at_precision(&self, precision: i64) -> QSeries<Cyc> {
        match &self.kind {
            MultiplierKind::Eisenstein { chi1, chi2, dilation } => {
                let e = eisenstein1(chi1, chi2, precision).expect("valid Eisenstein pair");
                dilate(&e.scaled_series, *dilation as i64, precision)
            }
            MultiplierKind::EtaProduct { a, b } => {
                eta_product(&[(*a, 1), (*b, 1)], precision).expect("valid eta spec")
            }
            MultiplierKind::Theta { form, dilation } => {
                let t = theta_series(*form, precision).expect("definite form");
                dilate(&t, *dilation as i64, precision)
            }
        }
    }
}

fn dilate(s: &QSeries<Cyc>, t: i64, prec: i64) -> QSeries<Cyc> {
    if t == 1 {
        return s.truncate(prec);
    }
    let field = &s.field;
    let mut coeffs = vec![field.zero(); prec as usize + 1];
    for (i, c) in s.coeffs.iter().enumerate() {
        let k = (s.val_floor + i as i64) * t;
        if k >= 0 && k <= prec {
            coeffs[k as usize] = c.clone();
        }
    }
    QSeries::from_coeffs(field, 0, prec, coeffs)
}

/// Ligozat order check: every cusp order of the eta quotient on
/// Gamma_0(level) is nonnegative.
fn eta_holomorphic(spec: &[(u64, i64)], level: u64) -> bool {
    for d in divisors(level) {
        // ord at the cusp with denominator d is a positive multiple of
        // sum_delta gcd(d, delta)^2 r_delta / delta
        let mut num = 0i64;
        let mut den = 1i64;
        for &(delta, r) in spec {
            let g = gcd(d, delta) as i64;
            let term_num = g * g * r;
            let term_den = delta as i64;
            num = num * term_den + term_num * den;
            den *= term_den;
        }
        if num.signum() * den.signum() < 0 {
            return false;
        }
    }
    true
}

/// Discriminant of Q(sqrt(d)) for a (possibly non-squarefree) integer d.
fn fundamental_like_disc(d: i64) -> i64 {
    let mut core = d.signum();
    for (p, e) in arith::factor(d.unsigned_abs()) {
        if e % 2 == 1 {
            core *= p as i64;
        }
    }
    if core.rem_euclid(4) == 1 {
        core
    } else {
        4 * core
    }
}

/// Reduced positive definite primitive forms of discriminant d < 0, by the
/// standard |b| <= a <= c enumeration with boundary sign conventions.
pub fn reduced_forms(d: i64) -> Vec<(i64, i64, i64)> {
    assert!(d < 0 && (d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1));
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        let mut b = -a + 1;
        while b <= a {
            let num = b * b - d;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                if c >= a && !(b < 0 && a == c) {
                    let g = gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs());
                    if g == 1 {
                        out.push((a, b, c));
                    }
                }
            }
            b += 1;
        }
        a += 1;
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_theta_eisenstein_match() {
        // E_1(1, chi_-4) scaled by 4 equals the Gaussian lattice theta
        let triv = DirichletChar::trivial(1);
        let chi4 = DirichletChar::kronecker_char(-4);
        let e = eisenstein1(&triv, &chi4, 50).unwrap();
        assert_eq!(e.scale, BigInt::from(4));
        let theta = theta_series((1, 0, 1), 50).unwrap();
        for k in 0..=50 {
            assert_eq!(
                e.scaled_series.coeff(k).as_rational().unwrap(),
                theta.coeff(k).as_rational().unwrap(),
                "k = {}",
                k
            );
        }
        let expect = [1i64, 4, 4, 0, 4, 8];
        for (k, &v) in expect.iter().enumerate() {
            assert_eq!(
                e.scaled_series.coeff(k as i64).as_rational().unwrap(),
                BigRational::from_integer(BigInt::from(v))
            );
        }
    }

    #[test]
    fn eisenstein_constant_term_23() {
        // scale clears L(0, chi_-23)/2 = h(-23)/2 = 3/2
        let triv = DirichletChar::trivial(1);
        let chi23 = DirichletChar::kronecker_char(-23);
        let e = eisenstein1(&triv, &chi23, 10).unwrap();
        assert_eq!(e.scale, BigInt::from(2));
        assert_eq!(
            e.scaled_series.coeff(0).as_rational().unwrap(),
            BigRational::from_integer(BigInt::from(3))
        );
    }

    #[test]
    fn eisenstein_rejects_even_product() {
        let chi4 = DirichletChar::kronecker_char(-4);
        assert!(eisenstein1(&chi4, &chi4, 10).is_err());
        let k8 = DirichletChar::kronecker_char(8);
        let triv = DirichletChar::trivial(1);
        assert!(eisenstein1(&triv, &k8, 10).is_err());
    }

    #[test]
    fn eisenstein_multiplicative_on_coprime() {
        let triv = DirichletChar::trivial(1);
        let chi23 = DirichletChar::kronecker_char(-23);
        let e = eisenstein1(&triv, &chi23, 200).unwrap();
        let a = |m: i64| e.scaled_series.coeff(m).as_rational().unwrap();
        let scale = BigRational::from_integer(e.scale.clone());
        for (m1, m2) in [(2i64, 3i64), (3, 4), (4, 5), (5, 6), (7, 9), (8, 25)] {
            assert_eq!(
                a(m1 * m2) * &scale,
                a(m1) * a(m2),
                "multiplicativity at ({}, {})",
                m1,
                m2
            );
        }
    }

    #[test]
    fn eta_examples() {
        // eta(q)^24 = q - 24q^2 + 252q^3 - ...
        let delta = eta_product(&[(1, 24)], 10).unwrap();
        assert_eq!(delta.coeff(1).as_rational().unwrap(), BigRational::from_integer(1.into()));
        assert_eq!(
            delta.coeff(2).as_rational().unwrap(),
            BigRational::from_integer((-24).into())
        );
        assert_eq!(
            delta.coeff(3).as_rational().unwrap(),
            BigRational::from_integer(252.into())
        );
        // eta(q) eta(q^23) = q - q^2 - q^3 + q^6 + q^8 + O(q^9)
        let f = eta_product(&[(1, 1), (23, 1)], 8).unwrap();
        let expect = [(1, 1), (2, -1), (3, -1), (4, 0), (5, 0), (6, 1), (7, 0), (8, 1)];
        for (k, v) in expect {
            assert_eq!(
                f.coeff(k).as_rational().unwrap(),
                BigRational::from_integer(BigInt::from(v)),
                "k = {}",
                k
            );
        }
        // fractional leading exponent rejected
        assert!(eta_product(&[(1, 1), (11, 1)], 8).is_err());
    }

    #[test]
    fn theta_identity_level_23() {
        // (theta(1,1,6) - theta(2,1,3))/2 = eta(q) eta(q^23), checked to 200
        let comb = theta_combination(&[(1, (1, 1, 6)), (-1, (2, 1, 3))], 200).unwrap();
        let eta = eta_product(&[(1, 1), (23, 1)], 200).unwrap();
        let field = Cyc::new(1);
        let half = field.from_rational(BigRational::new(BigInt::one(), BigInt::from(2)));
        let halved = comb.scale(&half);
        for k in 0..=200 {
            assert_eq!(halved.coeff(k), eta.coeff(k), "k = {}", k);
        }
        // empty combination is zero
        let z = theta_combination(&[], 10).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn reduced_forms_class_numbers() {
        assert_eq!(reduced_forms(-23).len(), 3);
        assert_eq!(reduced_forms(-47).len(), 5);
        assert_eq!(reduced_forms(-4).len(), 1);
        assert_eq!(reduced_forms(-163).len(), 1);
        assert_eq!(reduced_forms(-31).len(), 3);
    }

    #[test]
    fn multiplier_pool_level_23() {
        let pool = multipliers_for(23, 30);
        assert!(pool.iter().any(|m| m.name.starts_with("eta(1,23")));
        assert!(pool.iter().any(|m| m.name.starts_with("theta(1,1,6")));
        assert!(pool.iter().any(|m| m.name.starts_with("E(")));
        for m in &pool {
            assert!(m.character.is_odd(), "multiplier characters are odd");
            let v = m.series.valuation().expect("nonzero");
            assert!(m.series.coeff(v).is_integral());
        }
    }
}
