//! Dihedral lower bounds: enumerate odd irreducible two-dimensional
//! representations induced from ray class characters of quadratic fields
//! with prescribed conductor and determinant, and emit their q-expansions as
//! independent oracles.
//!
//! The conductor of an induced representation is |disc(M)| * Norm(c(psi)),
//! which bounds the search: for conductor N only fundamental discriminants D
//! with |D| dividing N occur, each with conductor-norm budget N/|D|. Ray
//! class groups are built as explicit finite groups: elements are integral
//! ideals up to ray equivalence, with canonical keys computed through
//! reduction and generator tracking, so characters, conductor exactness and
//! Frobenius data are all table lookups. Representations induced from
//! several fields are deduplicated by exact trace fingerprints.

use crate::arith::{gcd, kronecker, primes_up_to};
use crate::cyclotomic::{Cyc, CycNumber};
use crate::dirichlet::{DirichletChar, UnitGroup};
use crate::field::Field;
use crate::qseries::QSeries;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

// ---------------------------------------------------------------------------
// Quadratic field elements and ideals
// ---------------------------------------------------------------------------

/// x + y omega with omega = (D + sqrt(D))/2, so omega^2 = D omega - (D^2-D)/4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadElem {
    pub x: BigRational,
    pub y: BigRational,
}

impl QuadElem {
    pub fn from_ints(x: i64, y: i64) -> QuadElem {
        QuadElem {
            x: BigRational::from_integer(BigInt::from(x)),
            y: BigRational::from_integer(BigInt::from(y)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

/// Integral ideal as the Z-lattice Z a + Z (b + c omega), in HNF
/// (c | a, c | b, 0 <= b < a).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadIdeal {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

/// Context for a fundamental discriminant: class data and units.
#[derive(Debug)]
pub struct QuadField {
    pub disc: i64,
    /// omega^2 = t omega - n.
    pub omega_trace: i64,
    pub omega_norm: i64,
    /// Wide class number.
    pub h: usize,
    /// Canonical representative ideal per wide ideal class.
    pub class_reps: Vec<QuadIdeal>,
    /// Torsion units (all units in the imaginary case).
    pub torsion_units: Vec<QuadElem>,
    /// Fundamental unit (real case only).
    pub fundamental_unit: Option<QuadElem>,
}

pub fn is_fundamental_disc(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let squarefree = |m: i64| crate::arith::factor(m.unsigned_abs()).iter().all(|&(_, e)| e == 1);
    if d.rem_euclid(4) == 1 {
        squarefree(d)
    } else if d % 4 == 0 {
        let m = d / 4;
        (m.rem_euclid(4) == 2 || m.rem_euclid(4) == 3) && squarefree(m)
    } else {
        false
    }
}

impl QuadField {
    pub fn new(d: i64) -> Arc<QuadField> {
        static CACHE: OnceLock<Mutex<HashMap<i64, Arc<QuadField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = cache.lock().unwrap().get(&d) {
            return f.clone();
        }
        let f = Arc::new(Self::build(d));
        cache.lock().unwrap().insert(d, f.clone());
        f
    }

    fn build(d: i64) -> QuadField {
        assert!(is_fundamental_disc(d), "{} is not a fundamental discriminant", d);
        let mut field = QuadField {
            disc: d,
            omega_trace: d,
            omega_norm: (d * d - d) / 4,
            h: 0,
            class_reps: vec![],
            torsion_units: vec![],
            fundamental_unit: None,
        };
        let mut tors = vec![QuadElem::from_ints(1, 0), QuadElem::from_ints(-1, 0)];
        if d == -4 {
            // i = omega + 2 since omega = -2 + i
            let i_elem = QuadElem::from_ints(2, 1);
            assert_eq!(field.norm(&i_elem), BigRational::one());
            tors.push(i_elem.clone());
            tors.push(field.neg(&i_elem));
        } else if d == -3 {
            // zeta_6 = omega + 2 since omega = (-3 + sqrt(-3))/2
            let z = QuadElem::from_ints(2, 1);
            assert_eq!(field.norm(&z), BigRational::one());
            let z2 = field.mul(&z, &z);
            tors.push(z.clone());
            tors.push(z2.clone());
            tors.push(field.neg(&z));
            tors.push(field.neg(&z2));
        }
        field.torsion_units = tors;
        if d < 0 {
            let forms = crate::auxforms::reduced_forms(d);
            field.h = forms.len();
            field.class_reps = forms
                .iter()
                .map(|&(a, b, _)| {
                    // ideal [a, (-b + sqrt(D))/2] = [a, (-b - D)/2 + omega]
                    field.make_ideal(BigInt::from(a), BigInt::from((-b - d) / 2), BigInt::one())
                })
                .collect();
        } else {
            let (reps, eps) = field.real_class_data();
            field.h = reps.len();
            field.class_reps = reps;
            assert!(field.norm(&eps).abs() == BigRational::one());
            field.fundamental_unit = Some(eps);
        }
        field
    }

    pub fn add(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        QuadElem { x: &a.x + &b.x, y: &a.y + &b.y }
    }

    pub fn neg(&self, a: &QuadElem) -> QuadElem {
        QuadElem { x: -&a.x, y: -&a.y }
    }

    pub fn mul(&self, a: &QuadElem, b: &QuadElem) -> QuadElem {
        // (x1 + y1 w)(x2 + y2 w) = x1 x2 - y1 y2 n + (x1 y2 + x2 y1 + y1 y2 t) w
        let t = BigRational::from_integer(BigInt::from(self.omega_trace));
        let n = BigRational::from_integer(BigInt::from(self.omega_norm));
        QuadElem {
            x: &a.x * &b.x - &a.y * &b.y * &n,
            y: &a.x * &b.y + &a.y * &b.x + &a.y * &b.y * &t,
        }
    }

    pub fn conj(&self, a: &QuadElem) -> QuadElem {
        let t = BigRational::from_integer(BigInt::from(self.omega_trace));
        QuadElem { x: &a.x + &a.y * &t, y: -&a.y }
    }

    pub fn norm(&self, a: &QuadElem) -> BigRational {
        let c = self.conj(a);
        let prod = self.mul(a, &c);
        assert!(prod.y.is_zero());
        prod.x
    }

    pub fn inv(&self, a: &QuadElem) -> QuadElem {
        let n = self.norm(a);
        assert!(!n.is_zero());
        let c = self.conj(a);
        QuadElem { x: c.x / &n, y: c.y / &n }
    }

    /// Signs at the two real embeddings (real case): place 0 sends sqrt(D)
    /// to +sqrt(D), place 1 to -sqrt(D).
    pub fn signs(&self, a: &QuadElem) -> (i32, i32) {
        assert!(self.disc > 0);
        // value at place +-: x + y(D +- sqrt D)/2 = u +- (y/2) sqrt(D),
        // u = x + yD/2; compare (2u)^2 against y^2 D exactly
        let two_u = &a.x * BigRational::from_integer(2.into())
            + &a.y * BigRational::from_integer(BigInt::from(self.disc));
        let y = &a.y;
        let lhs = &two_u * &two_u;
        let rhs = y * y * BigRational::from_integer(BigInt::from(self.disc));
        let sign_at = |plus: bool| -> i32 {
            let sy = if plus { y.clone() } else { -y.clone() };
            if two_u.is_zero() && sy.is_zero() {
                0
            } else if !two_u.is_negative() && !sy.is_negative() {
                1
            } else if !two_u.is_positive() && !sy.is_positive() {
                -1
            } else {
                let dominant_u = lhs > rhs;
                let positive = if dominant_u { two_u.is_positive() } else { sy.is_positive() };
                if positive {
                    1
                } else {
                    -1
                }
            }
        };
        (sign_at(true), sign_at(false))
    }

    pub fn make_ideal(&self, a: BigInt, b: BigInt, c: BigInt) -> QuadIdeal {
        let id = self.hnf_reduce(vec![(a, BigInt::zero()), (b, c)]);
        assert!(self.is_ideal(&id), "lattice is not an ideal");
        id
    }

    fn hnf_reduce(&self, gens: Vec<(BigInt, BigInt)>) -> QuadIdeal {
        // rows are (x, y) meaning x + y omega; HNF on (y, x) puts the
        // omega-part pivot first
        let rows: Vec<Vec<BigInt>> = gens.into_iter().map(|(x, y)| vec![y, x]).collect();
        let h = crate::linalg::hnf_rows(rows);
        assert_eq!(h.len(), 2, "ideal lattice must have rank 2");
        assert!(h[1][0].is_zero());
        let c = h[0][0].clone();
        let a = h[1][1].clone();
        let b = h[0][1].mod_floor(&a);
        QuadIdeal { a, b, c }
    }

    pub fn is_ideal(&self, id: &QuadIdeal) -> bool {
        let wa = (BigInt::zero(), id.a.clone());
        let wb = (
            -&id.c * BigInt::from(self.omega_norm),
            &id.b + &id.c * BigInt::from(self.omega_trace),
        );
        self.lattice_contains(id, &wa) && self.lattice_contains(id, &wb)
    }

    pub fn lattice_contains(&self, id: &QuadIdeal, v: &(BigInt, BigInt)) -> bool {
        let (x, y) = v;
        if id.c.is_zero() {
            return y.is_zero() && (x % &id.a).is_zero();
        }
        if !(y % &id.c).is_zero() {
            return false;
        }
        let k = y / &id.c;
        let rem = x - &k * &id.b;
        (rem % &id.a).is_zero()
    }

    pub fn ideal_norm(&self, id: &QuadIdeal) -> BigInt {
        (&id.a * &id.c).abs()
    }

    pub fn unit_ideal(&self) -> QuadIdeal {
        QuadIdeal { a: BigInt::one(), b: BigInt::zero(), c: BigInt::one() }
    }

    pub fn ideal_mul(&self, i: &QuadIdeal, j: &QuadIdeal) -> QuadIdeal {
        let bi = [(i.a.clone(), BigInt::zero()), (i.b.clone(), i.c.clone())];
        let bj = [(j.a.clone(), BigInt::zero()), (j.b.clone(), j.c.clone())];
        let t = BigInt::from(self.omega_trace);
        let n = BigInt::from(self.omega_norm);
        let mut gens = Vec::with_capacity(4);
        for (x1, y1) in &bi {
            for (x2, y2) in &bj {
                let x = x1 * x2 - y1 * y2 * &n;
                let y = x1 * y2 + y1 * x2 + y1 * y2 * &t;
                gens.push((x, y));
            }
        }
        self.hnf_reduce(gens)
    }

    pub fn ideal_pow(&self, i: &QuadIdeal, mut e: u64) -> QuadIdeal {
        let mut acc = self.unit_ideal();
        let mut base = i.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.ideal_mul(&acc, &base);
            }
            base = self.ideal_mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn ideal_conj(&self, i: &QuadIdeal) -> QuadIdeal {
        let t = BigInt::from(self.omega_trace);
        self.hnf_reduce(vec![
            (i.a.clone(), BigInt::zero()),
            (&i.b + &i.c * &t, -i.c.clone()),
        ])
    }

    /// The ideal generated by an integral element.
    pub fn principal_ideal(&self, g: &QuadElem) -> QuadIdeal {
        assert!(g.x.is_integer() && g.y.is_integer());
        let x = g.x.to_integer();
        let y = g.y.to_integer();
        let t = BigInt::from(self.omega_trace);
        let n = BigInt::from(self.omega_norm);
        let gw = (-&y * &n, &x + &y * &t);
        self.hnf_reduce(vec![(x, y), gw])
    }

    /// J == (gamma_num / den) * I as lattices, for integral gamma_num.
    fn equals_scaled(&self, j: &QuadIdeal, gamma_num: &QuadElem, den: &BigInt, i: &QuadIdeal) -> bool {
        let jd = self.hnf_reduce(vec![
            (&j.a * den, BigInt::zero()),
            (&j.b * den, &j.c * den),
        ]);
        let gi = self.ideal_mul(&self.principal_ideal(gamma_num), i);
        jd == gi
    }

    // --- imaginary reduction ---

    fn shortest_vector(&self, id: &QuadIdeal) -> QuadElem {
        assert!(self.disc < 0);
        let mut v1 = QuadElem {
            x: BigRational::from_integer(id.a.clone()),
            y: BigRational::zero(),
        };
        let mut v2 = QuadElem {
            x: BigRational::from_integer(id.b.clone()),
            y: BigRational::from_integer(id.c.clone()),
        };
        loop {
            if self.norm(&v2) < self.norm(&v1) {
                std::mem::swap(&mut v1, &mut v2);
            }
            let b12 = (self.norm(&self.add(&v1, &v2)) - self.norm(&v1) - self.norm(&v2))
                / BigRational::from_integer(2.into());
            let t = round_rational(&(b12 / self.norm(&v1)));
            if t.is_zero() {
                break;
            }
            let shift = QuadElem {
                x: &v1.x * BigRational::from_integer(t.clone()),
                y: &v1.y * BigRational::from_integer(t.clone()),
            };
            v2 = self.add(&v2, &self.neg(&shift));
        }
        if self.norm(&v2) < self.norm(&v1) {
            std::mem::swap(&mut v1, &mut v2);
        }
        v1
    }

    /// Principality test with explicit generator.
    pub fn principal_generator(&self, id: &QuadIdeal) -> Option<QuadElem> {
        if self.disc < 0 {
            let v = self.shortest_vector(id);
            if self.norm(&v) == BigRational::from_integer(self.ideal_norm(id)) {
                debug_assert_eq!(self.principal_ideal(&v), *id);
                Some(v)
            } else {
                None
            }
        } else {
            self.real_principal_generator(id)
        }
    }

    // --- real quadratic reduction with generator tracking ---

    fn isqrt_floor(&self, m: i64) -> i64 {
        let mut r = (m as f64).sqrt() as i64;
        while (r + 1) * (r + 1) <= m {
            r += 1;
        }
        while r * r > m {
            r -= 1;
        }
        r
    }

    /// Primitive ideal [a, beta + omega] as classical (a, b) with
    /// b = 2 beta + D (the [a, (b + sqrt D)/2] shape).
    fn to_classical(&self, id: &QuadIdeal) -> (i64, i64) {
        assert!(id.c.is_one(), "classical shape requires a primitive ideal");
        let a: i64 = i64::try_from(&id.a).unwrap();
        let beta: i64 = i64::try_from(&id.b).unwrap();
        (a, 2 * beta + self.disc)
    }

    fn from_classical(&self, a: i64, b: i64) -> QuadIdeal {
        assert_eq!((b - self.disc).rem_euclid(2), 0);
        let beta = (b - self.disc) / 2;
        self.make_ideal(BigInt::from(a), BigInt::from(beta.rem_euclid(a)), BigInt::one())
    }

    fn is_reduced_real(&self, a: i64, b: i64) -> bool {
        let s = self.isqrt_floor(self.disc);
        a > 0 && b > 0 && b <= s && (s - 2 * a) < b && (2 * a - b) <= s
    }

    /// Normalize b mod 2a: into (sqrt(D) - 2a, sqrt(D)] when a <= sqrt(D),
    /// into (-a, a] for large a (pre-reduction regime).
    fn normalize_b(&self, a: i64, b: i64) -> i64 {
        let s = self.isqrt_floor(self.disc);
        let mut b2 = b.rem_euclid(2 * a);
        if a > s {
            if b2 > a {
                b2 -= 2 * a;
            }
        } else {
            while b2 > s {
                b2 -= 2 * a;
            }
            while b2 <= s - 2 * a {
                b2 += 2 * a;
            }
        }
        b2
    }

    /// One rho-step on [a, (b + sqrt D)/2]: with bt the normalization of -b
    /// mod 2a, the next ideal is [|bt^2 - D|/(4a), (bt + sqrt D)/2] and
    /// equals ((bt + sqrt D)/(2a)) times the input.
    fn rho_step(&self, a: i64, b: i64) -> (i64, i64, QuadElem, BigInt) {
        let d = self.disc;
        let bt = self.normalize_b(a, -b);
        let c = (bt * bt - d) / (4 * a);
        assert!(c != 0, "square discriminant cannot occur");
        let a2 = c.abs();
        let b2 = self.normalize_b(a2, bt);
        let gamma_num = QuadElem {
            x: BigRational::from_integer(BigInt::from((bt - d) / 2)),
            y: BigRational::one(),
        };
        (a2, b2, gamma_num, BigInt::from(a))
    }

    /// Reduce a primitive ideal: returns (reduced (a, b), gamma_num, den)
    /// with reduced-ideal = (gamma_num/den) * input (verified).
    fn reduce_real(&self, id: &QuadIdeal) -> ((i64, i64), QuadElem, BigInt) {
        let (a0, b0) = self.to_classical(id);
        let mut a = a0;
        let mut b = self.normalize_b(a0, b0);
        let mut gamma = QuadElem::from_ints(1, 0);
        let mut den = BigInt::one();
        let mut steps = 0;
        while !self.is_reduced_real(a, b) {
            let (a2, b2, gnum, gden) = self.rho_step(a, b);
            gamma = self.mul(&gamma, &gnum);
            den *= gden;
            strip_content(&mut gamma, &mut den);
            a = a2;
            b = b2;
            let cur = self.from_classical(a, b);
            assert!(
                self.equals_scaled(&cur, &gamma, &den, id),
                "rho tracking failed at D = {}",
                self.disc
            );
            steps += 1;
            assert!(steps < 100_000, "reduction did not terminate");
        }
        ((a, b), gamma, den)
    }

    /// Full rho-cycle from a reduced (a, b), with accumulated generators.
    /// The last entry repeats the start with the total multiplier.
    fn real_cycle(&self, a0: i64, b0: i64) -> Vec<((i64, i64), QuadElem, BigInt)> {
        let mut out = Vec::new();
        let (mut a, mut b) = (a0, b0);
        let mut gamma = QuadElem::from_ints(1, 0);
        let mut den = BigInt::one();
        loop {
            out.push(((a, b), gamma.clone(), den.clone()));
            let (a2, b2, gnum, gden) = self.rho_step(a, b);
            gamma = self.mul(&gamma, &gnum);
            den *= gden;
            strip_content(&mut gamma, &mut den);
            a = a2;
            b = b2;
            if (a, b) == (a0, b0) {
                out.push(((a, b), gamma, den));
                return out;
            }
            assert!(out.len() < 100_000, "cycle did not close");
        }
    }

    /// Reduced primitive ideals partitioned into rho-cycles (wide classes),
    /// plus the fundamental unit (total multiplier of the principal cycle).
    fn real_class_data(&self) -> (Vec<QuadIdeal>, QuadElem) {
        let d = self.disc;
        let s = self.isqrt_floor(d);
        let mut all: BTreeSet<(i64, i64)> = BTreeSet::new();
        for a in 1..=s {
            for b in 1..=s {
                if (b - d).rem_euclid(2) != 0 || (b * b - d) % (4 * a) != 0 {
                    continue;
                }
                if !self.is_reduced_real(a, b) {
                    continue;
                }
                let c = (b * b - d) / (4 * a);
                let g = gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs());
                if g == 1 {
                    all.insert((a, b));
                }
            }
        }
        let mut cycles: Vec<Vec<(i64, i64)>> = Vec::new();
        let mut seen: BTreeSet<(i64, i64)> = BTreeSet::new();
        for &(a, b) in &all {
            if seen.contains(&(a, b)) {
                continue;
            }
            let cyc = self.real_cycle(a, b);
            let mut keys = Vec::new();
            for ((aa, bb), _, _) in &cyc[..cyc.len() - 1] {
                keys.push((*aa, *bb));
                seen.insert((*aa, *bb));
            }
            cycles.push(keys);
        }
        // fundamental unit from the principal cycle
        let unit_red = self.reduce_real(&self.unit_ideal()).0;
        let ucyc = self.real_cycle(unit_red.0, unit_red.1);
        let (_, g, den) = ucyc.last().unwrap().clone();
        let eps = QuadElem {
            x: g.x / BigRational::from_integer(den.clone()),
            y: g.y / BigRational::from_integer(den.clone()),
        };
        assert!(eps.x.is_integer() && eps.y.is_integer(), "unit must be integral");
        assert!(self.norm(&eps).abs() == BigRational::one());
        assert!(eps != QuadElem::from_ints(1, 0) && eps != QuadElem::from_ints(-1, 0));
        let reps: Vec<QuadIdeal> = cycles
            .iter()
            .map(|cyc| {
                let &(a, b) = cyc.iter().min().unwrap();
                self.from_classical(a, b)
            })
            .collect();
        (reps, eps)
    }

    fn real_principal_generator(&self, id: &QuadIdeal) -> Option<QuadElem> {
        let content = id.a.gcd(&id.b).gcd(&id.c);
        let prim = QuadIdeal {
            a: &id.a / &content,
            b: &id.b / &content,
            c: &id.c / &content,
        };
        if !prim.c.is_one() {
            // non-primitive after content strip cannot be principal unless c
            // divides content (already stripped)
            return None;
        }
        let (red, g1, d1) = self.reduce_real(&prim);
        let unit_red = self.reduce_real(&self.unit_ideal()).0;
        let ucyc = self.real_cycle(unit_red.0, unit_red.1);
        for ((a, b), g2, d2) in &ucyc[..ucyc.len() - 1] {
            if (*a, *b) == red {
                // red = (g1/d1) prim and red = (g2/d2) O, so
                // prim = (d1 g2)/(d2 g1) O
                let num = QuadElem {
                    x: &g2.x * BigRational::from_integer(d1.clone()),
                    y: &g2.y * BigRational::from_integer(d1.clone()),
                };
                let den_elem = self.mul(
                    &g1,
                    &QuadElem {
                        x: BigRational::from_integer(d2.clone()),
                        y: BigRational::zero(),
                    },
                );
                let gen = self.mul(&num, &self.inv(&den_elem));
                let gen = QuadElem {
                    x: gen.x * BigRational::from_integer(content.clone()),
                    y: gen.y * BigRational::from_integer(content.clone()),
                };
                if !(gen.x.is_integer() && gen.y.is_integer()) {
                    continue;
                }
                if self.principal_ideal(&gen) == *id {
                    return Some(gen);
                }
            }
        }
        None
    }

    /// Canonical wide-class index of an ideal.
    pub fn class_index(&self, id: &QuadIdeal) -> usize {
        let content = id.a.gcd(&id.b).gcd(&id.c);
        let prim = QuadIdeal {
            a: &id.a / &content,
            b: &id.b / &content,
            c: &id.c / &content,
        };
        for (i, rep) in self.class_reps.iter().enumerate() {
            let prod = self.ideal_mul(&prim, &self.ideal_conj(rep));
            if self.principal_generator(&prod).is_some() {
                return i;
            }
        }
        panic!("ideal matched no class representative (D = {})", self.disc);
    }

    /// Prime ideals above a rational prime l (one inert, one ramified, or
    /// two split).
    pub fn primes_above(&self, l: u64) -> Vec<QuadIdeal> {
        let d = self.disc;
        let k = kronecker(d, l as i64);
        if k == -1 {
            return vec![self.make_ideal(BigInt::from(l), BigInt::zero(), BigInt::from(l))];
        }
        let t = self.omega_trace;
        let n = self.omega_norm;
        let mut roots = Vec::new();
        for r in 0..l as i64 {
            if (r * r - t * r + n).rem_euclid(l as i64) == 0 {
                roots.push(r);
            }
        }
        assert!(!roots.is_empty(), "no omega-root mod split/ramified prime {}", l);
        // lattice [l, b + omega] is an ideal iff N(b + omega) = 0 mod l,
        // i.e. b = -r for a root r of the minimal polynomial of omega
        let mut out: Vec<QuadIdeal> = roots
            .iter()
            .map(|&r| self.make_ideal(BigInt::from(l), BigInt::from((-r).rem_euclid(l as i64)), BigInt::one()))
            .collect();
        out.sort();
        out.dedup();
        if k == 1 {
            assert_eq!(out.len(), 2, "split prime must give two ideals (l = {})", l);
        }
        out
    }

    /// All integral ideals of exact norm m.
    pub fn ideals_of_norm(&self, m: u64) -> Vec<QuadIdeal> {
        let mut out = Vec::new();
        for c in crate::arith::divisors(m) {
            let a = m / c;
            if a % c != 0 {
                continue;
            }
            for beta in 0..(a / c) {
                let cand = QuadIdeal {
                    a: BigInt::from(a),
                    b: BigInt::from(beta * c),
                    c: BigInt::from(c),
                };
                if self.is_ideal(&cand) {
                    out.push(cand);
                }
            }
        }
        out.sort();
        out.dedup();
        for id in &out {
            debug_assert_eq!(self.ideal_norm(id), BigInt::from(m));
        }
        out
    }
}

fn strip_content(gamma: &mut QuadElem, den: &mut BigInt) {
    if !(gamma.x.is_integer() && gamma.y.is_integer()) {
        return;
    }
    let content = gamma.x.to_integer().gcd(&gamma.y.to_integer()).gcd(den);
    if content > BigInt::one() {
        let c = BigRational::from_integer(content.clone());
        gamma.x = &gamma.x / &c;
        gamma.y = &gamma.y / &c;
        *den /= &content;
    }
}

fn round_rational(r: &BigRational) -> BigInt {
    (r + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

// ---------------------------------------------------------------------------
// Ray class groups
// ---------------------------------------------------------------------------

/// Canonical key of a ray class: (wide class index, canonical unit tag).
type RayKey = (usize, (BigInt, BigInt, Vec<i32>));

/// A ray class group Cl_c with optional sign conditions at real places,
/// realized as an explicit finite abelian group with a discrete-log table.
pub struct RayClassGroup {
    pub field: Arc<QuadField>,
    pub conductor: QuadIdeal,
    /// Subset of {0, 1}: real places carrying a sign condition.
    pub signs: Vec<usize>,
    /// Cyclic decomposition orders of the basis.
    pub orders: Vec<u64>,
    dlog: HashMap<RayKey, Vec<u64>>,
    pub basis_ideals: Vec<QuadIdeal>,
}

impl RayClassGroup {
    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Canonical key of an integral ideal coprime to the conductor.
    pub fn key_of(&self, id: &QuadIdeal) -> RayKey {
        let f = &self.field;
        let cls = f.class_index(id);
        let rep = &f.class_reps[cls];
        let prod = f.ideal_mul(id, &f.ideal_conj(rep));
        let mu = f
            .principal_generator(&prod)
            .expect("id * conj(class rep) must be principal");
        (cls, self.canonical_unit_tag(&mu))
    }

    /// Lexicographically minimal (residue mod c, signs) over unit multiples.
    fn canonical_unit_tag(&self, mu: &QuadElem) -> (BigInt, BigInt, Vec<i32>) {
        let f = &self.field;
        let mut best: Option<(BigInt, BigInt, Vec<i32>)> = None;
        let mut consider = |el: &QuadElem| {
            let tag = self.residue_sign_tag(el);
            if best.is_none() || tag < *best.as_ref().unwrap() {
                best = Some(tag);
            }
        };
        if f.disc < 0 {
            for u in &f.torsion_units {
                consider(&f.mul(mu, u));
            }
        } else {
            let eps = f.fundamental_unit.clone().unwrap();
            let bound = self.unit_action_order();
            let mut cur = mu.clone();
            for _ in 0..bound {
                consider(&cur);
                consider(&f.neg(&cur));
                cur = f.mul(&cur, &eps);
            }
        }
        best.unwrap()
    }

    fn unit_action_order(&self) -> u64 {
        let f = &self.field;
        let eps = f.fundamental_unit.clone().unwrap();
        let one = QuadElem::from_ints(1, 0);
        let target = self.residue_sign_tag(&one);
        let mut cur = one;
        let mut k = 0u64;
        loop {
            cur = f.mul(&cur, &eps);
            k += 1;
            if self.residue_sign_tag(&cur) == target {
                return k;
            }
            assert!(k < 1_000_000, "unit action order runaway");
        }
    }

    fn residue_sign_tag(&self, el: &QuadElem) -> (BigInt, BigInt, Vec<i32>) {
        assert!(el.x.is_integer() && el.y.is_integer());
        let c = &self.conductor;
        let x = el.x.to_integer();
        let y = el.y.to_integer();
        let (xr, yr) = {
            let k = y.div_floor(&c.c);
            let y2 = &y - &k * &c.c;
            let x2 = &x - &k * &c.b;
            (x2.mod_floor(&c.a), y2)
        };
        let mut signs = Vec::new();
        if self.field.disc > 0 {
            let (s1, s2) = self.field.signs(el);
            for &place in &self.signs {
                signs.push(if place == 0 { s1 } else { s2 });
            }
        }
        (xr, yr, signs)
    }

    pub fn new(field: &Arc<QuadField>, conductor: &QuadIdeal, signs: &[usize]) -> Arc<RayClassGroup> {
        assert!(field.disc > 0 || signs.is_empty());
        let mut g = RayClassGroup {
            field: field.clone(),
            conductor: conductor.clone(),
            signs: signs.to_vec(),
            orders: vec![],
            dlog: HashMap::new(),
            basis_ideals: vec![],
        };
        let norm_c = field.ideal_norm(conductor);
        // generating pool: principal ideals of residues coprime to c, plus
        // small prime ideals coprime to c and D
        let a: i64 = i64::try_from(&conductor.a).unwrap();
        let cc: i64 = i64::try_from(&conductor.c).unwrap().max(1);
        let mut pool: Vec<QuadIdeal> = Vec::new();
        for x in -a..=a {
            for yv in 0..cc.max(1) * 2 {
                let el = QuadElem::from_ints(x, yv);
                if el.is_zero() {
                    continue;
                }
                let nrm = field.norm(&el).to_integer();
                if !nrm.is_zero() && nrm.gcd(&norm_c).is_one() {
                    pool.push(field.principal_ideal(&el));
                }
            }
        }
        for l in primes_up_to(300) {
            if (norm_c.clone() % BigInt::from(l)).is_zero()
                || field.disc.unsigned_abs() % l == 0
            {
                continue;
            }
            for p in field.primes_above(l) {
                pool.push(p);
            }
            if pool.len() > 600 {
                break;
            }
        }
        let unit_key = g.key_of(&field.unit_ideal());
        // BFS closure to enumerate the whole group
        let mut keys: BTreeMap<RayKey, QuadIdeal> = BTreeMap::new();
        keys.insert(unit_key.clone(), field.unit_ideal());
        for cand in pool {
            let k = g.key_of(&cand);
            if keys.contains_key(&k) {
                continue;
            }
            let mut frontier = vec![cand.clone()];
            keys.insert(k, cand);
            while let Some(id) = frontier.pop() {
                let snapshot: Vec<QuadIdeal> = keys.values().cloned().collect();
                for other in snapshot {
                    let prod = field.ideal_mul(&id, &other);
                    let pk = g.key_of(&prod);
                    keys.entry(pk).or_insert_with(|| {
                        frontier.push(prod.clone());
                        prod
                    });
                }
            }
        }
        let group_order = keys.len() as u64;
        let elements: Vec<(RayKey, QuadIdeal)> =
            keys.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        // cyclic basis by maximal-order peeling with correction
        let mut basis: Vec<(QuadIdeal, u64)> = Vec::new();
        let mut covered: HashMap<RayKey, Vec<u64>> = HashMap::new();
        covered.insert(unit_key.clone(), vec![]);
        while (covered.len() as u64) < group_order {
            let mut best: Option<(u64, QuadIdeal)> = None;
            for (k, id) in &elements {
                if covered.contains_key(k) {
                    continue;
                }
                let mut acc = id.clone();
                let mut e = 1u64;
                while !covered.contains_key(&g.key_of(&acc)) {
                    acc = field.ideal_mul(&acc, id);
                    e += 1;
                    assert!(e <= group_order + 1);
                }
                if best.is_none() || e > best.as_ref().unwrap().0 {
                    best = Some((e, id.clone()));
                }
            }
            let (e, id) = best.expect("uncovered group but no new element found");
            // correct id so that id^e is the identity: id^e lies in the
            // covered subgroup with dlog v; multiply id by basis powers to
            // cancel v (possible whenever e | v_i * (e / gcd) pattern holds,
            // which the maximal-order choice guarantees for finite abelian
            // groups)
            let idp = field.ideal_pow(&id, e);
            let v = covered[&g.key_of(&idp)].clone();
            let mut corrected = id.clone();
            for (i, (bid, bord)) in basis.iter().enumerate() {
                let vi = *v.get(i).unwrap_or(&0);
                if vi == 0 {
                    continue;
                }
                // need t with vi + e t = 0 mod bord
                let ge = gcd(e, *bord);
                assert!(
                    vi % ge == 0,
                    "maximal-order peeling failed (vi={}, e={}, bord={})",
                    vi,
                    e,
                    bord
                );
                let m = bord / ge;
                let e_red = (e / ge) % m;
                let v_red = (vi / ge) % m;
                let t = if m <= 1 {
                    0
                } else {
                    let inv = crate::arith::inv_mod(e_red % m, m);
                    (m - v_red % m) % m * inv % m
                };
                if t > 0 {
                    corrected = field.ideal_mul(&corrected, &field.ideal_pow(bid, t));
                }
            }
            let check = field.ideal_pow(&corrected, e);
            assert_eq!(g.key_of(&check), unit_key, "corrected generator not of order {}", e);
            basis.push((corrected, e));
            // rebuild covered with dlogs
            covered.clear();
            let mut stack = vec![(field.unit_ideal(), vec![0u64; basis.len()])];
            covered.insert(unit_key.clone(), vec![0; basis.len()]);
            while let Some((id, exps)) = stack.pop() {
                for (i, (bid, bord)) in basis.iter().enumerate() {
                    if exps[i] + 1 < *bord {
                        let nid = field.ideal_mul(&id, bid);
                        let mut ne = exps.clone();
                        ne[i] += 1;
                        let nk = g.key_of(&nid);
                        if let std::collections::hash_map::Entry::Vacant(en) = covered.entry(nk) {
                            en.insert(ne.clone());
                            stack.push((nid, ne));
                        }
                    }
                }
            }
        }
        assert_eq!(covered.len() as u64, group_order, "dlog table incomplete");
        g.orders = basis.iter().map(|&(_, o)| o).collect();
        g.basis_ideals = basis.into_iter().map(|(b, _)| b).collect();
        g.dlog = covered;
        Arc::new(g)
    }

    pub fn dlog_of(&self, id: &QuadIdeal) -> Vec<u64> {
        let k = self.key_of(id);
        self.dlog
            .get(&k)
            .unwrap_or_else(|| panic!("ideal key missing from ray class dlog table"))
            .clone()
    }
}

/// A character of a ray class group with its conductor data.
#[derive(Clone)]
pub struct RayClassCharacter {
    pub field: Arc<QuadField>,
    pub conductor: QuadIdeal,
    pub signs: Vec<usize>,
    pub theta: Vec<u64>,
    pub orders: Vec<u64>,
    pub group: Arc<RayClassGroup>,
}

impl RayClassCharacter {
    pub fn order(&self) -> u64 {
        let mut ord = 1u64;
        for (t, d) in self.theta.iter().zip(&self.orders) {
            ord = crate::arith::lcm(ord, d / gcd(*t, *d));
        }
        ord.max(1)
    }

    /// Value exponent (in zeta_order(psi) units) at an ideal coprime to the
    /// conductor.
    pub fn value_exp(&self, id: &QuadIdeal) -> u64 {
        let v = self.group.dlog_of(id);
        let ord = self.order();
        let mut acc: u128 = 0;
        for i in 0..self.theta.len() {
            let step = self.theta[i] as u128 * v[i] as u128 % self.orders[i] as u128;
            acc = (acc + step * ord as u128 / self.orders[i] as u128) % ord as u128;
        }
        acc as u64
    }
}

// ---------------------------------------------------------------------------
// Character enumeration with exact conductor
// ---------------------------------------------------------------------------

/// All ray class characters of exact conductor (ideal of the given norm,
/// exact sign set).
pub fn ray_class_characters(
    field: &Arc<QuadField>,
    norm: u64,
    signs: &[usize],
) -> Vec<RayClassCharacter> {
    let mut out = Vec::new();
    for c in field.ideals_of_norm(norm) {
        let group = RayClassGroup::new(field, &c, signs);
        let orders = group.orders.clone();
        let total: u64 = orders.iter().product();
        for idx in 0..total.max(1) {
            let mut theta = Vec::with_capacity(orders.len());
            let mut rem = idx;
            for &d in &orders {
                theta.push(rem % d);
                rem /= d;
            }
            let chi = RayClassCharacter {
                field: field.clone(),
                conductor: c.clone(),
                signs: signs.to_vec(),
                theta,
                orders: orders.clone(),
                group: group.clone(),
            };
            if character_conductor_exact(&chi) {
                out.push(chi);
            }
        }
    }
    out
}

fn ideal_divides(f: &Arc<QuadField>, q: &QuadIdeal, c: &QuadIdeal) -> bool {
    f.lattice_contains(q, &(c.a.clone(), BigInt::zero()))
        && f.lattice_contains(q, &(c.b.clone(), c.c.clone()))
}

fn ideal_quotient(f: &Arc<QuadField>, c: &QuadIdeal, q: &QuadIdeal) -> QuadIdeal {
    let nq = f.ideal_norm(q);
    let prod = f.ideal_mul(c, &f.ideal_conj(q));
    assert!(
        (&prod.a % &nq).is_zero() && (&prod.b % &nq).is_zero() && (&prod.c % &nq).is_zero(),
        "quotient by a non-divisor"
    );
    QuadIdeal { a: &prod.a / &nq, b: &prod.b / &nq, c: &prod.c / &nq }
}

fn character_conductor_exact(chi: &RayClassCharacter) -> bool {
    let f = &chi.field;
    let c = &chi.conductor;
    let norm_u = u64::try_from(&f.ideal_norm(c)).unwrap();
    let mut subs: Vec<(QuadIdeal, Vec<usize>)> = Vec::new();
    for (l, _) in crate::arith::factor(norm_u) {
        for q in f.primes_above(l) {
            if ideal_divides(f, &q, c) {
                subs.push((ideal_quotient(f, c, &q), chi.signs.clone()));
            }
        }
    }
    for i in 0..chi.signs.len() {
        let mut s = chi.signs.clone();
        s.remove(i);
        subs.push((c.clone(), s));
    }
    let mut seen = BTreeSet::new();
    subs.retain(|(q, s)| seen.insert((q.clone(), s.clone())));
    for (c2, s2) in subs {
        if character_factors_through(chi, &c2, &s2) {
            return false;
        }
    }
    true
}

/// chi factors through (c2, s2) iff it kills every principal class (mu) with
/// mu = 1 mod c2 and mu positive at s2.
fn character_factors_through(chi: &RayClassCharacter, c2: &QuadIdeal, s2: &[usize]) -> bool {
    let f = &chi.field;
    let norm_c = f.ideal_norm(&chi.conductor);
    let a2: i64 = i64::try_from(&c2.a).unwrap();
    let b2: i64 = i64::try_from(&c2.b).unwrap();
    let c2c: i64 = i64::try_from(&c2.c).unwrap().max(1);
    let a: i64 = i64::try_from(&chi.conductor.a).unwrap();
    let cc: i64 = i64::try_from(&chi.conductor.c).unwrap().max(1);
    // generators of the kernel: mu = 1 + (c2-lattice element), scanned over
    // a box covering all residues mod c with both signs available
    let urange = (a / a2).max(1) * 2 + 4;
    let vrange = (cc / c2c).max(1) * 2 + 4;
    for u in -urange..=urange {
        for v in -vrange..=vrange {
            let x = 1 + u * a2 + v * b2;
            let y = v * c2c;
            let mu = QuadElem::from_ints(x, y);
            if mu.is_zero() {
                continue;
            }
            let nrm = f.norm(&mu).to_integer();
            if nrm.is_zero() || !nrm.gcd(&norm_c).is_one() {
                continue;
            }
            if f.disc > 0 {
                let (s_plus, s_minus) = f.signs(&mu);
                let bad = s2
                    .iter()
                    .any(|&pl| (if pl == 0 { s_plus } else { s_minus }) < 0);
                if bad {
                    continue;
                }
            }
            let id = f.principal_ideal(&mu);
            if chi.value_exp(&id) != 0 {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Dihedral representations
// ---------------------------------------------------------------------------

/// An odd irreducible induced representation with its trace fingerprint.
#[derive(Clone)]
pub struct DihedralRep {
    pub disc: i64,
    pub conductor_norm: u64,
    pub conductor_ideal: QuadIdeal,
    pub signs: Vec<usize>,
    /// Conductor of the induced representation (the level N).
    pub conductor: u64,
    pub det_char: DirichletChar,
    /// Order of the value roots of unity of psi.
    pub value_order: u64,
    /// For each prime l <= fingerprint bound: psi-value exponents at the
    /// primes above l coprime to the conductor (empty = trace zero).
    pub fingerprint: Vec<(u64, Vec<u64>)>,
    pub character: RayClassCharacter,
}

/// All fundamental discriminants D with |D| dividing N, with norm budget.
pub fn enumerate_fields(n: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    for dabs in crate::arith::divisors(n) {
        for sign in [-1i64, 1] {
            let d = sign * dabs as i64;
            if is_fundamental_disc(d) {
                out.push((d, n / dabs));
            }
        }
    }
    out.sort();
    out
}

/// Fingerprint bound: strictly beyond the degree of omega^(2+2k) (k = 1),
/// enough to separate distinct weight-one forms.
pub fn fingerprint_bound(n: u64) -> u64 {
    crate::weightone::GeometryFacts::new(n).certification_precision() as u64
}

/// psi != psi composed with the field automorphism.
fn is_irreducible(psi: &RayClassCharacter) -> bool {
    let f = &psi.field;
    let cbar = f.ideal_conj(&psi.conductor);
    if cbar != psi.conductor {
        return true;
    }
    if f.disc > 0 {
        let mut flipped: Vec<usize> = psi.signs.iter().map(|&s| 1 - s).collect();
        flipped.sort_unstable();
        let mut own = psi.signs.clone();
        own.sort_unstable();
        if flipped != own {
            return true;
        }
    }
    for id in &psi.group.basis_ideals {
        let conj = f.ideal_conj(id);
        if psi.value_exp(id) != psi.value_exp(&conj) {
            return true;
        }
    }
    false
}

/// The determinant of Ind(psi) as a Dirichlet character mod N:
/// chi_D(m) * psi((m)).
fn determinant_char(n: u64, field: &Arc<QuadField>, psi: &RayClassCharacter) -> DirichletChar {
    let kron = DirichletChar::kronecker_char(field.disc).extend_to(n);
    let psi_ord = psi.order().max(1);
    let g = UnitGroup::new(n);
    let big = crate::arith::lcm(2, psi_ord);
    let exps: Vec<u64> = g
        .gens
        .iter()
        .zip(&g.orders)
        .map(|(&gen, &dord)| {
            let kron_half = if kron.value_exp(gen).unwrap() == 0 { 0u64 } else { 1 };
            let gen_ideal = field.principal_ideal(&QuadElem::from_ints(gen as i64, 0));
            let e_psi = psi.value_exp(&gen_ideal);
            let e = (kron_half * (big / 2) + e_psi * (big / psi_ord)) % big;
            assert_eq!(
                (e as u128 * dord as u128) % big as u128,
                0,
                "determinant value is not a mu_d root of unity"
            );
            ((e as u128 * dord as u128 / big as u128) % dord as u128) as u64
        })
        .collect();
    DirichletChar { modulus: n, exps }
}

/// psi-value exponents at the primes above l coprime to the conductor.
fn frobenius_data(field: &Arc<QuadField>, psi: &RayClassCharacter, l: u64) -> Vec<u64> {
    if kronecker(field.disc, l as i64) == -1 {
        return vec![];
    }
    let mut vals = Vec::new();
    for lam in field.primes_above(l) {
        if ideal_divides(field, &lam, &psi.conductor) {
            continue;
        }
        vals.push(psi.value_exp(&lam));
    }
    vals.sort_unstable();
    vals
}

/// Exact trace a_l as a cyclotomic number in the given field.
fn trace_in(field: &Cyc, value_order: u64, vals: &[u64]) -> CycNumber {
    let mut acc = field.zero();
    for &e in vals {
        let scaled = (e as u128 * (field.n() as u64 / value_order) as u128) as i64;
        acc = field.add(&acc, &field.zeta_pow(scaled));
    }
    acc
}

/// Count odd irreducible induced representations of conductor exactly N and
/// determinant chi_target; returns the deduplicated representations.
pub fn count_dihedral(n: u64, chi_target: &DirichletChar) -> (usize, Vec<DihedralRep>) {
    assert_eq!(chi_target.modulus, n);
    if !chi_target.is_odd() {
        return (0, vec![]);
    }
    let bound = fingerprint_bound(n);
    let primes = primes_up_to(bound);
    let mut candidates: Vec<DihedralRep> = Vec::new();
    for (d, budget) in enumerate_fields(n) {
        let field = QuadField::new(d);
        let sign_sets: Vec<Vec<usize>> = if d < 0 {
            vec![vec![]]
        } else {
            // odd induced representations need exactly one sign twist
            vec![vec![0], vec![1]]
        };
        for signs in sign_sets {
            for psi in ray_class_characters(&field, budget, &signs) {
                if !is_irreducible(&psi) {
                    continue;
                }
                let det = determinant_char(n, &field, &psi);
                assert!(det.is_odd(), "induced representation must be odd");
                if det != *chi_target {
                    continue;
                }
                let fingerprint: Vec<(u64, Vec<u64>)> = primes
                    .iter()
                    .map(|&l| (l, frobenius_data(&field, &psi, l)))
                    .collect();
                candidates.push(DihedralRep {
                    disc: d,
                    conductor_norm: budget,
                    conductor_ideal: psi.conductor.clone(),
                    signs: psi.signs.clone(),
                    conductor: n,
                    det_char: det,
                    value_order: psi.order().max(1),
                    fingerprint,
                    character: psi,
                });
            }
        }
    }
    // dedup by exact traces in a common cyclotomic field
    let big_order = candidates
        .iter()
        .fold(1u64, |acc, r| crate::arith::lcm(acc, r.value_order));
    let big = Cyc::new(big_order.max(1) as u32);
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut reps = Vec::new();
    for rep in candidates {
        let mut key = String::new();
        for (l, vals) in &rep.fingerprint {
            key.push_str(&format!("{}:{:?};", l, trace_in(&big, rep.value_order, vals)));
        }
        if seen.insert(key) {
            reps.push(rep);
        }
    }
    (reps.len(), reps)
}

/// The q-expansion of the newform attached to an induced representation:
/// multiplicative extension with Euler factors 1 - a_l X + chi(l) X^2 at
/// good l and the ramified conventions of the induced representation.
pub fn dihedral_qexp(rep: &DihedralRep, precision: i64) -> QSeries<Cyc> {
    // coefficients involve both psi-values and determinant values
    let m = crate::arith::lcm(rep.value_order.max(1), rep.det_char.order().max(1)) as u32;
    let field = Cyc::new(m);
    let n = rep.conductor;
    let chi = &rep.det_char;
    let mut a: Vec<CycNumber> = vec![field.zero(); precision as usize + 1];
    if precision >= 1 {
        a[1] = field.one();
    }
    for l in primes_up_to(precision as u64) {
        let vals = rep
            .fingerprint
            .iter()
            .find(|&&(p, _)| p == l)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| frobenius_data(&rep.character.field, &rep.character, l));
        let al = trace_in(&field, rep.value_order, &vals);
        let chil = if n % l == 0 {
            field.zero()
        } else {
            chi.value_in(&field, l % n)
        };
        let mut powers: Vec<CycNumber> = vec![field.one(), al.clone()];
        let mut lk = (l as i64).checked_mul(l as i64).unwrap_or(i64::MAX);
        while lk <= precision {
            let k = powers.len();
            let t1 = field.mul(&al, &powers[k - 1]);
            let t2 = field.mul(&chil, &powers[k - 2]);
            powers.push(field.sub(&t1, &t2));
            lk = lk.saturating_mul(l as i64);
        }
        let mut lk = l as u64;
        let mut k = 1usize;
        while lk <= precision as u64 {
            a[lk as usize] = powers[k].clone();
            lk = lk.saturating_mul(l);
            k += 1;
        }
    }
    for mth in 2..=precision as usize {
        let f = crate::arith::factor(mth as u64);
        if f.len() <= 1 {
            continue; // prime powers already set
        }
        let mut val = field.one();
        for (p, e) in f {
            val = field.mul(&val, &a[p.pow(e) as usize]);
        }
        a[mth] = val;
    }
    a[0] = field.zero();
    QSeries::from_coeffs(&field, 0, precision, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_discs() {
        for d in [-3i64, -4, -7, -8, -11, -23, -47, 5, 8, 12, 13, 124, 133] {
            assert!(is_fundamental_disc(d), "{}", d);
        }
        for d in [-9i64, -12, -16, -27, 1, 0, 9, 25, -57, -124] {
            assert!(!is_fundamental_disc(d), "{}", d);
        }
    }

    #[test]
    fn class_numbers_imaginary_brute_force() {
        for dabs in 3..500i64 {
            let d = -dabs;
            if !is_fundamental_disc(d) {
                continue;
            }
            let f = QuadField::new(d);
            assert_eq!(f.h, crate::auxforms::reduced_forms(d).len(), "D = {}", d);
        }
    }

    #[test]
    fn class_numbers_real() {
        for d in [5i64, 8, 12, 13, 17, 21, 24, 28, 29, 33, 37, 41, 124, 133] {
            let f = QuadField::new(d);
            assert_eq!(f.h, 1, "D = {}", d);
        }
        let f40 = QuadField::new(40);
        assert_eq!(f40.h, 2);
        let f5 = QuadField::new(5);
        let eps = f5.fundamental_unit.clone().unwrap();
        assert_eq!(f5.norm(&eps).abs(), BigRational::one());
        // D = 124: N(eps) = +1 since 31 = 3 mod 4
        let f124 = QuadField::new(124);
        let eps124 = f124.fundamental_unit.clone().unwrap();
        assert_eq!(f124.norm(&eps124), BigRational::one());
    }

    #[test]
    fn ideal_arithmetic() {
        let f = QuadField::new(-23);
        for l in [2u64, 3, 59] {
            let ps = f.primes_above(l);
            assert_eq!(ps.len(), 2, "l = {} splits in Q(sqrt(-23))", l);
            let prod = f.ideal_mul(&ps[0], &ps[1]);
            assert_eq!(f.ideal_norm(&prod), BigInt::from(l * l));
            let conj = f.ideal_conj(&ps[0]);
            let ll = f.ideal_mul(&ps[0], &conj);
            assert_eq!(ll, f.make_ideal(BigInt::from(l), BigInt::zero(), BigInt::from(l)));
        }
        let inert = f.primes_above(5);
        assert_eq!(inert.len(), 1);
        assert_eq!(f.ideal_norm(&inert[0]), BigInt::from(25));
    }

    #[test]
    fn principal_generators_imaginary() {
        let f = QuadField::new(-23);
        let p2 = &f.primes_above(2)[0];
        assert!(f.principal_generator(p2).is_none(), "norm-2 prime is not principal");
        let cube = f.ideal_mul(&f.ideal_mul(p2, p2), p2);
        let g = f.principal_generator(&cube).expect("cube is principal (h = 3)");
        assert_eq!(f.principal_ideal(&g), cube);
    }

    #[test]
    fn principal_generators_real() {
        let f = QuadField::new(124);
        for l in [3u64, 5, 7, 11, 13] {
            if kronecker(124, l as i64) == -1 {
                continue;
            }
            for p in f.primes_above(l) {
                let g = f.principal_generator(&p).expect("h = 1");
                assert_eq!(f.principal_ideal(&g), p, "l = {}", l);
            }
        }
    }

    #[test]
    fn ray_class_orders_from_spec() {
        let f = QuadField::new(-23);
        let g = RayClassGroup::new(&f, &f.unit_ideal(), &[]);
        assert_eq!(g.order(), 3);
        let f47 = QuadField::new(-47);
        let g47 = RayClassGroup::new(&f47, &f47.unit_ideal(), &[]);
        assert_eq!(g47.order(), 5);
        // Q(i), conductor a prime above 13: ray class field of degree 3
        let fi = QuadField::new(-4);
        let p13 = fi.primes_above(13).remove(0);
        let gi = RayClassGroup::new(&fi, &p13, &[]);
        assert_eq!(gi.order(), 3);
    }

    #[test]
    fn dihedral_counts_table_rows_small() {
        let chi23 = crate::dirichlet::from_local_label("23_2", 23).unwrap().remove(0);
        let (c23, reps) = count_dihedral(23, &chi23);
        assert_eq!(c23, 1);
        assert_eq!(reps[0].disc, -23);
        let chi47 = crate::dirichlet::from_local_label("47_2", 47).unwrap().remove(0);
        let (c47, _) = count_dihedral(47, &chi47);
        assert_eq!(c47, 2);
    }

    #[test]
    fn dihedral_qexp_level23_matches_eta() {
        let chi23 = crate::dirichlet::from_local_label("23_2", 23).unwrap().remove(0);
        let (_, reps) = count_dihedral(23, &chi23);
        let q = dihedral_qexp(&reps[0], 50);
        let eta = crate::auxforms::eta_product(&[(1, 1), (23, 1)], 50).unwrap();
        for k in 0..=50 {
            assert_eq!(
                q.coeff(k).as_rational().expect("rational coefficients"),
                eta.coeff(k).as_rational().unwrap(),
                "k = {}",
                k
            );
        }
    }

    #[test]
    fn conductor_formula_and_dedup() {
        for (n, label, expect) in [
            (23u64, "23_2", 1usize),
            (31, "31_2", 1),
            (39, "3_2 13_2", 1),
            (44, "2_1 11_2", 1),
        ] {
            let chi = crate::dirichlet::from_local_label(label, n).unwrap().remove(0);
            let (count, reps) = count_dihedral(n, &chi);
            assert_eq!(count, expect, "count at ({}, {})", n, label);
            for rep in reps {
                assert_eq!(rep.disc.unsigned_abs() * rep.conductor_norm, n);
            }
        }
    }

    #[test]
    fn no_dihedral_at_124() {
        let chis = crate::dirichlet::from_local_label("2_2 31_3", 124).unwrap();
        let odd: Vec<_> = chis.into_iter().filter(|c| c.is_odd()).collect();
        assert!(!odd.is_empty());
        for chi in odd {
            let (count, _) = count_dihedral(124, &chi);
            assert_eq!(count, 0, "chi = {:?}", chi.exps);
        }
    }
}
