//! Dirichlet characters mod N valued in roots of unity: construction,
//! enumeration, local decomposition, conductor, parity, Galois conjugacy
//! classes, and reduction modulo prime ideals.
//!
//! A character is stored by its exponent vector on a fixed canonical
//! generating set of (Z/NZ)^x: the smallest primitive root at each odd prime
//! power, and the pair {-1, 5} at powers of 2 (just {-1} at 4). The paper's
//! p_a labels are emitted and parsed on top of this canonical indexing, which
//! is what disambiguates them when the label alone does not.

use crate::arith::{self, euler_phi, factor, gcd, inv_mod, lcm};
use crate::cyclotomic::{Cyc, CycNumber, ResElem, ResidueField};
use crate::field::Field;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Structure of (Z/NZ)^x with a canonical generating set and discrete logs.
#[derive(Debug)]
pub struct UnitGroup {
    pub modulus: u64,
    /// Generators as residues mod N.
    pub gens: Vec<u64>,
    /// Component orders of the generators.
    pub orders: Vec<u64>,
    /// For each generator, the prime it belongs to.
    pub gen_prime: Vec<u64>,
    /// Map residue -> exponent vector.
    dlog: HashMap<u64, Vec<u64>>,
}

fn crt_lift(residue: u64, modulus: u64, n: u64) -> u64 {
    // x = residue mod modulus, x = 1 mod n/modulus
    let other = n / modulus;
    if other == 1 {
        return residue % n;
    }
    let m_inv = inv_mod(other % modulus, modulus);
    // x = 1 + other * t with t = (residue - 1) * other^{-1} mod modulus
    let diff = (residue + modulus - 1) % modulus;
    let t = arith::mul_mod(diff, m_inv, modulus);
    (1 + arith::mul_mod(other, t, n)) % n
}

impl UnitGroup {
    pub fn new(n: u64) -> Arc<UnitGroup> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().unwrap().get(&n) {
            return g.clone();
        }
        let mut gens: Vec<u64> = Vec::new();
        let mut orders: Vec<u64> = Vec::new();
        let mut gen_prime: Vec<u64> = Vec::new();
        for (p, e) in factor(n) {
            let pe = p.pow(e);
            if p == 2 {
                if e == 1 {
                    continue;
                }
                // -1 generates for 4; {-1, 5} for 8 and above
                gens.push(crt_lift(pe - 1, pe, n));
                orders.push(2);
                gen_prime.push(2);
                if e >= 3 {
                    gens.push(crt_lift(5 % pe, pe, n));
                    orders.push(pe / 4);
                    gen_prime.push(2);
                }
            } else {
                let g = arith::primitive_root(pe);
                gens.push(crt_lift(g, pe, n));
                orders.push(euler_phi(pe));
                gen_prime.push(p);
            }
        }
        // discrete logs by enumerating the full group as products
        let mut dlog: HashMap<u64, Vec<u64>> = HashMap::new();
        let k = gens.len();
        let mut exps = vec![0u64; k];
        loop {
            let mut x = 1u64 % n;
            for i in 0..k {
                for _ in 0..exps[i] {
                    x = arith::mul_mod(x, gens[i], n);
                }
            }
            dlog.insert(x, exps.clone());
            // increment odometer
            let mut i = 0;
            loop {
                if i == k {
                    let g = Arc::new(UnitGroup { modulus: n, gens, orders, gen_prime, dlog });
                    cache.lock().unwrap().insert(n, g.clone());
                    return g;
                }
                exps[i] += 1;
                if exps[i] < orders[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    pub fn dlog(&self, a: u64) -> Option<&Vec<u64>> {
        self.dlog.get(&(a % self.modulus.max(1)))
    }

    pub fn phi(&self) -> u64 {
        self.orders.iter().product()
    }
}

/// A Dirichlet character of (Z/NZ)^x valued in mu_order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DirichletChar {
    pub modulus: u64,
    /// chi(gen_i) = zeta_{orders[i]}^{exps[i]}.
    pub exps: Vec<u64>,
}

/// A Galois conjugacy class of characters, orbit of exponent-twists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyClass {
    pub representative: DirichletChar,
    pub members: Vec<DirichletChar>,
}

impl DirichletChar {
    pub fn trivial(n: u64) -> DirichletChar {
        let g = UnitGroup::new(n);
        DirichletChar { modulus: n, exps: vec![0; g.gens.len()] }
    }

    pub fn group(&self) -> Arc<UnitGroup> {
        UnitGroup::new(self.modulus)
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        let g = self.group();
        let mut ord = 1u64;
        for (e, d) in self.exps.iter().zip(&g.orders) {
            ord = lcm(ord, d / gcd(*e, *d));
        }
        ord
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Exponent k with chi(a) = zeta_order^k, or None when gcd(a, N) > 1.
    pub fn value_exp(&self, a: u64) -> Option<u64> {
        let g = self.group();
        let a = a % self.modulus.max(1);
        let dl = g.dlog(a)?;
        let ord = self.order();
        let mut acc: u128 = 0;
        for i in 0..self.exps.len() {
            // e_i * ord / d_i is integral (see order())
            let step = (self.exps[i] as u128 * ord as u128) / g.orders[i] as u128;
            acc = (acc + dl[i] as u128 * step) % ord as u128;
        }
        Some(acc as u64)
    }

    /// chi(a) as an element of Q(zeta_field.n); requires order | field.n.
    pub fn value_in(&self, field: &Cyc, a: u64) -> CycNumber {
        match self.value_exp(a) {
            None => field.zero(),
            Some(k) => {
                let ord = self.order();
                assert_eq!(field.n() as u64 % ord, 0, "field too small for character");
                field.zeta_pow((k * (field.n() as u64 / ord)) as i64)
            }
        }
    }

    /// chi(a) reduced in a residue field whose cyclotomic order is a multiple
    /// of order(chi).
    pub fn value_mod(&self, rf: &ResidueField, a: u64) -> ResElem {
        match self.value_exp(a) {
            None => rf.zero(),
            Some(k) => {
                let n = rf.0.ideal.n as u64;
                let ord = self.order();
                assert_eq!(n % ord, 0);
                let field = Cyc::new(rf.0.ideal.n);
                rf.reduce(&field.zeta_pow((k * (n / ord)) as i64)).expect("root of unity integral")
            }
        }
    }

    /// chi(-1): +1 for even, -1 for odd.
    pub fn parity(&self) -> i32 {
        if self.modulus <= 2 {
            return 1;
        }
        let k = self.value_exp(self.modulus - 1).expect("-1 is a unit");
        if k == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == -1
    }

    /// Product of characters at a common modulus.
    pub fn mul(&self, other: &DirichletChar) -> DirichletChar {
        assert_eq!(self.modulus, other.modulus);
        let g = self.group();
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .zip(&g.orders)
            .map(|((a, b), d)| (a + b) % d)
            .collect();
        DirichletChar { modulus: self.modulus, exps }
    }

    pub fn inverse(&self) -> DirichletChar {
        let g = self.group();
        let exps = self
            .exps
            .iter()
            .zip(&g.orders)
            .map(|(e, d)| if *e == 0 { 0 } else { d - e })
            .collect();
        DirichletChar { modulus: self.modulus, exps }
    }

    /// Galois conjugate chi^a for gcd(a, order) = 1 (or any power).
    pub fn power(&self, a: u64) -> DirichletChar {
        let g = self.group();
        let exps = self
            .exps
            .iter()
            .zip(&g.orders)
            .map(|(e, d)| (((*e as u128) * a as u128) % *d as u128) as u64)
            .collect();
        DirichletChar { modulus: self.modulus, exps }
    }

    /// Conductor: smallest modulus through which chi factors.
    pub fn conductor(&self) -> u64 {
        let g = self.group();
        let mut cond = 1u64;
        let mut i = 0;
        for (p, e) in factor(self.modulus) {
            if p == 2 {
                if e == 1 {
                    continue;
                }
                let e_minus = self.exps[i];
                i += 1;
                let t5 = if e >= 3 {
                    let d = g.orders[i];
                    let t = d / gcd(self.exps[i], d);
                    i += 1;
                    t
                } else {
                    1
                };
                if t5 > 1 {
                    // 5 has order 2^(c-2) mod 2^c
                    let s = t5.trailing_zeros() as u64;
                    cond *= 1u64 << (s + 2);
                } else if e_minus == 1 {
                    cond *= 4;
                }
            } else {
                let d = g.orders[i];
                let t = d / gcd(self.exps[i], d);
                i += 1;
                if t > 1 {
                    // t = p^s * m with m | p-1; conductor p^(s+1)
                    let mut s = 0u32;
                    let mut tt = t;
                    while tt % p == 0 {
                        tt /= p;
                        s += 1;
                    }
                    cond *= p.pow(s + 1);
                }
            }
        }
        cond
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// The character mod M inducing chi, for cond(chi) | M | N.
    pub fn restrict_to(&self, m: u64) -> DirichletChar {
        assert_eq!(self.modulus % m, 0);
        assert_eq!(m % self.conductor(), 0, "character does not factor through {}", m);
        let gm = UnitGroup::new(m);
        let n = self.modulus;
        let exps = gm
            .gens
            .iter()
            .zip(&gm.orders)
            .map(|(&g0, &d)| {
                // lift g0 to a unit mod N congruent to g0 mod m
                let mut lift = g0;
                while gcd(lift, n) != 1 {
                    lift += m;
                }
                let k = self.value_exp(lift).expect("lift is a unit");
                // chi(lift) = zeta_ord^k; express as zeta_d^?
                let ord = self.order();
                // the value has order dividing d; k * d / ord must be integral
                assert_eq!(
                    (k as u128 * d as u128) % ord as u128,
                    0,
                    "value not a mu_d element"
                );
                ((k as u128 * d as u128 / ord as u128) % d as u128) as u64
            })
            .collect();
        DirichletChar { modulus: m, exps }
    }

    /// The character mod M (a multiple of the modulus) induced by chi.
    pub fn extend_to(&self, m: u64) -> DirichletChar {
        assert_eq!(m % self.modulus, 0);
        if m == self.modulus {
            return self.clone();
        }
        let gm = UnitGroup::new(m);
        let ord = self.order();
        let exps = gm
            .gens
            .iter()
            .zip(&gm.orders)
            .map(|(&g0, &d)| {
                let k = self
                    .value_exp(g0 % self.modulus)
                    .expect("generator of larger group must be unit mod smaller");
                assert_eq!((k as u128 * d as u128) % ord as u128, 0);
                ((k as u128 * d as u128 / ord as u128) % d as u128) as u64
            })
            .collect();
        DirichletChar { modulus: m, exps }
    }

    /// Local order at each prime of the modulus, as (p, order) pairs.
    pub fn local_orders(&self) -> Vec<(u64, u64)> {
        let g = self.group();
        let mut out: Vec<(u64, u64)> = Vec::new();
        for (p, e) in factor(self.modulus) {
            let mut ord = 1u64;
            for i in 0..g.gens.len() {
                if g.gen_prime[i] == p {
                    ord = lcm(ord, g.orders[i] / gcd(self.exps[i], g.orders[i]));
                }
            }
            let _ = e;
            out.push((p, ord));
        }
        out
    }

    /// The paper's p_a label, e.g. "2_2 13_3".
    pub fn label(&self) -> String {
        if self.modulus == 1 {
            return "1_1".to_string();
        }
        self.local_orders()
            .iter()
            .map(|(p, a)| format!("{}_{}", p, a))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Canonical key: modulus plus exponent vector on the fixed generators.
    pub fn canonical_key(&self) -> String {
        let mut s = format!("N{}", self.modulus);
        for e in &self.exps {
            s.push_str(&format!("_{}", e));
        }
        s
    }

    /// Kronecker-symbol character of a fundamental discriminant, as a
    /// character mod |D| (or mod any multiple via extend_to).
    pub fn kronecker_char(d: i64) -> DirichletChar {
        let m = d.unsigned_abs();
        let g = UnitGroup::new(m);
        let exps = g
            .gens
            .iter()
            .zip(&g.orders)
            .map(|(&gen, &ord)| {
                let v = arith::kronecker(d, gen as i64);
                match v {
                    1 => 0,
                    -1 => ord / 2,
                    _ => panic!("generator not coprime to discriminant"),
                }
            })
            .collect();
        DirichletChar { modulus: m, exps }
    }

    /// The Teichmueller companion: chi^(p-power part removed), the canonical
    /// prime-to-p order character with the same reduction mod primes above p.
    pub fn prime_to_p_part(&self, p: u64) -> DirichletChar {
        let ord = self.order();
        let mut pv = 1u64;
        let mut m = ord;
        while m % p == 0 {
            m /= p;
            pv *= p;
        }
        if pv == 1 {
            return self.clone();
        }
        // chi^e with e = 1 mod m and e = 0 mod pv kills the p-power part
        let inv = inv_mod(pv % m, m);
        let exp = pv.checked_mul(inv).expect("exponent overflow") % ord.max(1);
        let exp = if exp == 0 { ord } else { exp };
        self.power(exp)
    }
}

/// All phi(N) characters mod N, in canonical exponent order.
pub fn all_characters(n: u64) -> Vec<DirichletChar> {
    let g = UnitGroup::new(n);
    let k = g.gens.len();
    let mut out = Vec::new();
    let mut exps = vec![0u64; k];
    loop {
        out.push(DirichletChar { modulus: n, exps: exps.clone() });
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            exps[i] += 1;
            if exps[i] < g.orders[i] {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

/// Characters of p-power order mod N (the "diamond p-part" twists),
/// including the trivial one.
pub fn p_power_characters(n: u64, p: u64) -> Vec<DirichletChar> {
    all_characters(n)
        .into_iter()
        .filter(|c| {
            let mut o = c.order();
            while o % p == 0 {
                o /= p;
            }
            o == 1
        })
        .collect()
}

/// Partition characters into Galois conjugacy classes. The representative is
/// the orbit member with the lexicographically smallest exponent vector.
pub fn conjugacy_classes(chars: &[DirichletChar]) -> Vec<ConjugacyClass> {
    let mut remaining: Vec<DirichletChar> = chars.to_vec();
    remaining.sort();
    remaining.dedup();
    let mut classes = Vec::new();
    let mut used: Vec<bool> = vec![false; remaining.len()];
    for i in 0..remaining.len() {
        if used[i] {
            continue;
        }
        let chi = &remaining[i];
        let ord = chi.order().max(1);
        let mut members: Vec<DirichletChar> = Vec::new();
        for a in 1..=ord {
            if gcd(a, ord) != 1 {
                continue;
            }
            let conj = chi.power(a);
            if !members.contains(&conj) {
                members.push(conj);
            }
        }
        members.sort();
        for m in &members {
            if let Ok(pos) = remaining.binary_search(m) {
                used[pos] = true;
            }
        }
        classes.push(ConjugacyClass { representative: members[0].clone(), members });
    }
    classes.sort_by(|a, b| a.representative.cmp(&b.representative));
    classes
}

/// Parse a local label like "3_2 13_2" and return every character mod N whose
/// local component orders match (trivial at unlisted primes).
pub fn from_local_label(label: &str, n: u64) -> Result<Vec<DirichletChar>, String> {
    let mut wanted: HashMap<u64, u64> = HashMap::new();
    for part in label.split_whitespace() {
        let (p, a) = part
            .split_once('_')
            .ok_or_else(|| format!("bad label component {:?}", part))?;
        let p: u64 = p.parse().map_err(|_| format!("bad prime in {:?}", part))?;
        let a: u64 = a.parse().map_err(|_| format!("bad order in {:?}", part))?;
        if n % p != 0 {
            return Err(format!("prime {} does not divide modulus {}", p, n));
        }
        // a must divide phi(p^e) or (for p = 2) the unit group exponent
        let e = factor(n).iter().find(|&&(q, _)| q == p).unwrap().1;
        let pe = p.pow(e);
        let ok = if p == 2 {
            let max = if e <= 1 {
                1
            } else if e == 2 {
                2
            } else {
                lcm(2, pe / 4)
            };
            max % a == 0 || a == 1
        } else {
            euler_phi(pe) % a == 0
        };
        if !ok {
            return Err(format!("order {} impossible at prime {} for modulus {}", a, p, n));
        }
        wanted.insert(p, a);
    }
    let mut out = Vec::new();
    for chi in all_characters(n) {
        let locals = chi.local_orders();
        let matches = locals.iter().all(|&(p, ord)| wanted.get(&p).copied().unwrap_or(1) == ord);
        if matches {
            out.push(chi);
        }
    }
    Ok(out)
}

/// All primitive characters of conductor exactly f (as characters mod f).
pub fn primitive_characters(f: u64) -> Vec<DirichletChar> {
    all_characters(f).into_iter().filter(|c| c.is_primitive()).collect()
}

/// Product of characters at possibly different moduli, as a character mod n.
pub fn mul_at(n: u64, a: &DirichletChar, b: &DirichletChar) -> DirichletChar {
    a.extend_to(n).mul(&b.extend_to(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_characters(1).len(), 1);
        assert!(all_characters(1)[0].is_trivial());
        let c23 = all_characters(23);
        assert_eq!(c23.len(), 22);
        assert_eq!(c23.iter().filter(|c| c.order() == 2).count(), 1);
        let c82 = all_characters(82);
        assert_eq!(c82.len(), 40);
        // the cyclic group (Z/82)^x is generated by 47; a generator character
        // of order 40 exists and sends 47 to a primitive 40th root
        let gen_chars: Vec<_> = c82.iter().filter(|c| c.order() == 40).collect();
        assert_eq!(gen_chars.len() as u64, euler_phi(40));
        for chi in gen_chars {
            let k = chi.value_exp(47).unwrap();
            assert_eq!(40 / gcd(k, 40), 40, "chi(47) must be a primitive 40th root");
        }
    }

    #[test]
    fn group_closure() {
        for n in [12u64, 23, 40, 56] {
            let chars = all_characters(n);
            let phi = euler_phi(n) as usize;
            assert_eq!(chars.len(), phi);
            // product/inverse closed, spot check
            let a = &chars[phi / 2];
            let b = &chars[phi / 3];
            assert!(chars.contains(&a.mul(b)));
            assert!(chars.contains(&a.inverse()));
            assert!(a.mul(&a.inverse()).is_trivial());
        }
    }

    #[test]
    fn multiplicativity_of_values() {
        for n in [23u64, 44, 56] {
            for chi in all_characters(n).iter().step_by(3) {
                let ord = chi.order();
                for a in 1..n {
                    for b in [2u64, 3, 5, 7] {
                        if gcd(a, n) != 1 || gcd(b, n) != 1 {
                            continue;
                        }
                        let va = chi.value_exp(a).unwrap();
                        let vb = chi.value_exp(b).unwrap();
                        let vab = chi.value_exp(a * b % n).unwrap();
                        assert_eq!((va + vb) % ord, vab);
                    }
                }
            }
        }
    }

    #[test]
    fn conductors() {
        // quadratic character mod 23 has conductor 23
        let chi = all_characters(23).into_iter().find(|c| c.order() == 2).unwrap();
        assert_eq!(chi.conductor(), 23);
        // trivial character has conductor 1
        assert_eq!(DirichletChar::trivial(60).conductor(), 1);
        // mod 44 character trivial at 2, quadratic at 11: conductor 11
        let chis = from_local_label("2_1 11_2", 44).unwrap();
        assert_eq!(chis.len(), 1);
        assert_eq!(chis[0].conductor(), 11);
        assert!(chis[0].is_odd());
        // Kronecker characters
        let k8 = DirichletChar::kronecker_char(8);
        assert_eq!(k8.conductor(), 8);
        assert!(!k8.is_odd());
        assert_eq!(k8.value_exp(7), Some(0));
        assert_eq!(k8.value_exp(3), Some(1));
        let km4 = DirichletChar::kronecker_char(-4);
        assert!(km4.is_odd());
        assert_eq!(km4.conductor(), 4);
    }

    #[test]
    fn parity_odd_order_even() {
        for n in [23u64, 39, 52, 82] {
            for chi in all_characters(n) {
                if chi.order() % 2 == 1 {
                    assert!(!chi.is_odd(), "odd-order character must be even");
                }
            }
        }
    }

    #[test]
    fn class_sizes_sum_to_phi() {
        for n in 2..=60u64 {
            let chars = all_characters(n);
            let classes = conjugacy_classes(&chars);
            let total: usize = classes.iter().map(|c| c.members.len()).sum();
            assert_eq!(total as u64, euler_phi(n), "N = {}", n);
        }
    }

    #[test]
    fn class_size_examples() {
        // quadratic mod 23 is alone in its class
        let chars = all_characters(23);
        let classes = conjugacy_classes(&chars);
        let quad = classes.iter().find(|c| c.representative.order() == 2).unwrap();
        assert_eq!(quad.members.len(), 1);
        // order-6 characters at 52 pair into classes of size 2
        let chis = from_local_label("2_2 13_3", 52).unwrap();
        assert_eq!(chis.len(), 2, "two order-6 characters with 2_2 13_3 label");
        let classes = conjugacy_classes(&chis);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].members.len(), 2);
        // order-40 characters mod 82 fall into classes of size phi(40) = 16
        let chars = all_characters(82);
        let big: Vec<_> = chars.into_iter().filter(|c| c.order() == 40).collect();
        let classes = conjugacy_classes(&big);
        assert!(classes.iter().all(|c| c.members.len() == 16));
    }

    #[test]
    fn labels_round_trip() {
        // "23_2" at modulus 23
        let v = from_local_label("23_2", 23).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].label(), "23_2");
        // "2_2 7_2" at modulus 56: the odd ones include the product with the
        // even character of level 8
        let v = from_local_label("2_2 7_2", 56).unwrap();
        assert!(!v.is_empty());
        let odd: Vec<_> = v.iter().filter(|c| c.is_odd()).collect();
        assert!(!odd.is_empty(), "level-56 label admits an odd product");
        // among the odd ones, exactly one has even 2-part (the paper's choice)
        let mut even_two_part = 0;
        for chi in &odd {
            // restrict to the 2-part: value on the generator(s) at 2
            let g = chi.group();
            let two_part_even = {
                let mut c2 = chi.exps.clone();
                for i in 0..c2.len() {
                    if g.gen_prime[i] != 2 {
                        c2[i] = 0;
                    }
                }
                let chi2 = DirichletChar { modulus: 56, exps: c2 };
                !chi2.is_odd()
            };
            if two_part_even {
                even_two_part += 1;
            }
        }
        assert_eq!(even_two_part, 1);
        // inconsistent order rejected
        assert!(from_local_label("2_5 7_2", 56).is_err());
        assert!(from_local_label("3_2", 56).is_err());
    }

    #[test]
    fn restriction_and_extension() {
        let chi = from_local_label("2_1 11_2", 44).unwrap().remove(0);
        let down = chi.restrict_to(11);
        assert_eq!(down.order(), 2);
        assert_eq!(down.conductor(), 11);
        let up = down.extend_to(44);
        assert_eq!(up, chi);
        // extension respects values at units
        for a in 1..44u64 {
            if gcd(a, 44) != 1 {
                continue;
            }
            assert_eq!(chi.value_exp(a), down.value_exp(a % 11));
        }
    }

    #[test]
    fn reduce_char_mod82_lambda199() {
        // chi mod 82 with chi(47) = zeta_40 reduces to the section-3 character
        // with chi(47) = tau, a root of X^2 + 127X + 1
        let chars = all_characters(82);
        let chi = chars
            .iter()
            .find(|c| c.order() == 40 && c.value_exp(47) == Some(1))
            .expect("generator character");
        let ids = crate::cyclotomic::factor_prime(199, 40).unwrap();
        let lambda = ids.iter().find(|i| i.factor == vec![1, 127, 1]).unwrap();
        let rf = ResidueField::new(lambda);
        let tau = chi.value_mod(&rf, 47);
        // tau satisfies tau^2 + 127 tau + 1 = 0
        let t2 = rf.mul(&tau, &tau);
        let lhs = rf.add(&rf.add(&t2, &rf.mul(&rf.from_u64(127), &tau)), &rf.one());
        assert!(rf.is_zero(&lhs));
        assert_eq!(rf.elem_order(&tau), 40);
        // multiplicativity of the reduced character
        for a in [3u64, 5, 7, 9] {
            for b in [11u64, 13, 15] {
                if gcd(a, 82) != 1 || gcd(b, 82) != 1 {
                    continue;
                }
                let va = chi.value_mod(&rf, a);
                let vb = chi.value_mod(&rf, b);
                assert_eq!(chi.value_mod(&rf, a * b % 82), rf.mul(&va, &vb));
            }
        }
        // trivial character reduces to the constant 1
        let triv = DirichletChar::trivial(82);
        for a in 1..82 {
            if gcd(a, 82) == 1 {
                assert!(rf.is_one(&triv.value_mod(&rf, a)));
            }
        }
    }

    #[test]
    fn teichmueller_part() {
        let chi = from_local_label("2_2 13_3", 52).unwrap().remove(0);
        assert_eq!(chi.order(), 6);
        let t = chi.prime_to_p_part(3);
        assert_eq!(t.order(), 2);
        // same reduction: chi / t has 3-power order
        let ratio = chi.mul(&t.inverse());
        assert_eq!(ratio.order(), 3);
        // idempotent on prime-to-p characters
        assert_eq!(t.prime_to_p_part(3), t);
    }
}
