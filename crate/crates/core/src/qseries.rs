//! Truncated q-expansions over exact coefficient fields, and integral
//! lattices of q-expansions with multiplication, exact division,
//! intersection, torsion computation and saturation.
//!
//! A series knows the window [val_floor, prec] of exponents whose
//! coefficients are exact; everything below val_floor is exactly zero and
//! everything above prec is unknown (O(q^(prec+1))). Division is allowed to
//! produce negative exponents ("forms with poles"); those terms are retained
//! so the intersection machinery can cut them away instead of erroring.

use crate::cyclotomic::{Cyc, CycNumber, ResidueField};
use crate::field::Field;
use crate::linalg::ZLattice;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A truncated q-expansion with exact coefficients in a field F.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<F: Field> {
    pub field: F,
    /// Exponent of the first stored coefficient; all lower ones are zero.
    pub val_floor: i64,
    /// Last exponent with a known coefficient (inclusive). The zero series
    /// uses i64::MAX (infinite formal precision).
    pub prec: i64,
    /// coeffs[i] is the coefficient of q^(val_floor + i).
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> QSeries<F> {
    pub fn zero(field: &F) -> Self {
        QSeries { field: field.clone(), val_floor: 0, prec: i64::MAX, coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.field.is_zero(c))
    }

    pub fn from_coeffs(field: &F, val_floor: i64, prec: i64, coeffs: Vec<F::Elem>) -> Self {
        assert_eq!(coeffs.len() as i64, prec - val_floor + 1, "window/coefficient mismatch");
        QSeries { field: field.clone(), val_floor, prec, coeffs }
    }

    /// Coefficient of q^k; zero below the window, panics above precision.
    pub fn coeff(&self, k: i64) -> F::Elem {
        if k < self.val_floor {
            return self.field.zero();
        }
        assert!(k <= self.prec, "coefficient q^{} beyond precision O(q^{})", k, self.prec + 1);
        self.coeffs[(k - self.val_floor) as usize].clone()
    }

    /// Exponent of the first nonzero coefficient, if any is visible.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !self.field.is_zero(c))
            .map(|i| self.val_floor + i as i64)
    }

    /// Drop known-zero leading coefficients (tightens val_floor).
    pub fn normalize(mut self) -> Self {
        if self.prec == i64::MAX {
            return self;
        }
        while let Some(first) = self.coeffs.first() {
            if self.field.is_zero(first) {
                self.coeffs.remove(0);
                self.val_floor += 1;
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() && self.is_zero() {
            // keep the window; an empty window still records finite precision
            self.coeffs.clear();
        }
        self
    }

    pub fn truncate(&self, new_prec: i64) -> Self {
        if new_prec >= self.prec {
            return self.clone();
        }
        let keep = (new_prec - self.val_floor + 1).max(0) as usize;
        QSeries {
            field: self.field.clone(),
            val_floor: self.val_floor,
            prec: new_prec,
            coeffs: self.coeffs[..keep.min(self.coeffs.len())].to_vec(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.field, other.field, "ring mismatch");
        if self.prec == i64::MAX {
            return other.clone();
        }
        if other.prec == i64::MAX {
            return self.clone();
        }
        let vf = self.val_floor.min(other.val_floor);
        let prec = self.prec.min(other.prec);
        let mut coeffs = Vec::with_capacity((prec - vf + 1).max(0) as usize);
        for k in vf..=prec {
            coeffs.push(self.field.add(&self.coeff(k), &other.coeff(k)));
        }
        QSeries { field: self.field.clone(), val_floor: vf, prec, coeffs }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        QSeries {
            field: self.field.clone(),
            val_floor: self.val_floor,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|x| self.field.mul(x, c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let m1 = self.field.neg(&self.field.one());
        self.add(&other.scale(&m1))
    }

    /// Cauchy product with the precision rule
    /// prec = min(prec_a + val_b, prec_b + val_a).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.field, other.field, "ring mismatch");
        if self.is_zero() || other.is_zero() {
            let mut z = QSeries::zero(&self.field);
            if self.prec != i64::MAX && other.prec != i64::MAX {
                // product of a zero window with finite precision stays finite
                let va = self.valuation().unwrap_or(self.prec + 1);
                let vb = other.valuation().unwrap_or(other.prec + 1);
                z.prec = (self.prec + vb).min(other.prec + va);
                z.val_floor = z.prec + 1;
            }
            return z;
        }
        let va = self.valuation().unwrap();
        let vb = other.valuation().unwrap();
        let prec = if self.prec == i64::MAX {
            other.prec + va
        } else if other.prec == i64::MAX {
            self.prec + vb
        } else {
            (self.prec + vb).min(other.prec + va)
        };
        let vf = va + vb;
        let mut coeffs = vec![self.field.zero(); (prec - vf + 1).max(0) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if self.field.is_zero(a) {
                continue;
            }
            let ka = self.val_floor + i as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                if self.field.is_zero(b) {
                    continue;
                }
                let k = ka + other.val_floor + j as i64;
                if k < vf {
                    continue;
                }
                if k > prec {
                    break;
                }
                self.field.add_mul(&mut coeffs[(k - vf) as usize], a, b);
            }
        }
        QSeries { field: self.field.clone(), val_floor: vf, prec, coeffs }
    }

    /// Exact division h = self / f, solving h * f = self term by term.
    /// The valuation of h may be negative (a "form with poles").
    pub fn div(&self, f: &Self) -> Result<Self, String> {
        assert_eq!(self.field, f.field, "ring mismatch");
        if f.is_zero() {
            return Err("division by zero series".into());
        }
        if self.is_zero() {
            let mut z = QSeries::zero(&self.field);
            if self.prec != i64::MAX {
                let vf = f.valuation().unwrap();
                z.prec = self.prec - vf;
                z.val_floor = z.prec + 1;
            }
            return Ok(z);
        }
        let vf = f.valuation().unwrap();
        let vg = self.valuation().unwrap();
        let rel = (self.prec - vg).min(f.prec - vf);
        // h = q^(vg - vf) * (g0 / f0) with f0 a unit at index 0
        let lead_inv = self.field.inv(&f.coeff(vf));
        let hv = vg - vf;
        let mut h = vec![self.field.zero(); (rel + 1) as usize];
        for k in 0..=rel {
            // g0[k] = sum_{i=0..k} f0[i] * h[k-i]
            let mut acc = self.coeff(vg + k);
            for i in 1..=k {
                let fi = f.coeff(vf + i);
                if self.field.is_zero(&fi) {
                    continue;
                }
                let t = self.field.mul(&fi, &h[(k - i) as usize]);
                acc = self.field.sub(&acc, &t);
            }
            h[k as usize] = self.field.mul(&acc, &lead_inv);
        }
        Ok(QSeries { field: self.field.clone(), val_floor: hv, prec: hv + rel, coeffs: h })
    }

    /// Map coefficients into another field (reduction or embedding).
    pub fn map<G: Field>(&self, g: &G, f: impl Fn(&F::Elem) -> G::Elem) -> QSeries<G> {
        QSeries {
            field: g.clone(),
            val_floor: self.val_floor,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// Echelonize a list of series over their common window: returns a basis of
/// the span in reduced echelon form (strictly increasing pivot exponents,
/// pivot coefficients 1).
pub fn echelon_series<F: Field>(field: &F, series: &[QSeries<F>]) -> Vec<QSeries<F>> {
    let nonzero: Vec<&QSeries<F>> = series.iter().filter(|s| !s.is_zero()).collect();
    if nonzero.is_empty() {
        return vec![];
    }
    let vf = nonzero.iter().map(|s| s.val_floor).min().unwrap();
    let prec = nonzero.iter().map(|s| s.prec).min().unwrap();
    assert!(prec >= vf, "empty common window in echelon_series");
    let rows: Vec<Vec<F::Elem>> = nonzero
        .iter()
        .map(|s| (vf..=prec).map(|k| s.coeff(k)).collect())
        .collect();
    let ech = crate::linalg::rref(field, rows);
    ech.rows
        .into_iter()
        .map(|row| QSeries::from_coeffs(field, vf, prec, row).normalize())
        .collect()
}

/// Report on the torsion of (L1 + L2)/L1 from a lattice intersection.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TorsionReport {
    /// Z-order of the torsion subgroup (possibly composite and unfactored).
    pub order_norm: BigInt,
    /// Running gcd hint accumulated by the caller across intersections.
    pub support_hint: BigInt,
}

/// An integral lattice of q-expansions over Z[zeta_n], stored saturated and
/// echelonized, flattened to a Z-lattice of rank (rank * phi(n)) on the
/// coefficient window.
#[derive(Clone, Debug)]
pub struct QLattice {
    pub field: Cyc,
    pub val_floor: i64,
    pub prec: i64,
    pub lattice: ZLattice,
}

impl QLattice {
    pub fn ambient_len(&self) -> usize {
        ((self.prec - self.val_floor + 1).max(0) as usize) * self.field.degree()
    }

    pub fn rank_z(&self) -> usize {
        self.lattice.rank()
    }

    /// Rank as a Z[zeta_n]-module (Z-rank divided by the field degree).
    pub fn rank(&self) -> usize {
        let d = self.field.degree();
        let r = self.lattice.rank();
        assert_eq!(r % d, 0, "flattened rank not divisible by field degree");
        r / d
    }

    pub fn zero(field: &Cyc, val_floor: i64, prec: i64) -> Self {
        let ambient = ((prec - val_floor + 1).max(0) as usize) * field.degree();
        QLattice {
            field: field.clone(),
            val_floor,
            prec,
            lattice: ZLattice::zero(ambient),
        }
    }

    fn series_to_flat(&self, s: &QSeries<Cyc>) -> Vec<BigRational> {
        series_to_flat_window(&self.field, s, self.val_floor, self.prec)
    }

    /// Build the saturated lattice generated (over Q(zeta_n), then saturated
    /// integrally) by the given series on the window [val_floor, prec].
    /// This realizes "all integral-coefficient series in the rational span".
    ///
    /// The span is echelonized over the field first; with unit pivots the
    /// coordinates of an integral element are automatically integral at the
    /// pivot positions, so the saturation conditions reduce to congruences
    /// at the non-pivot positions, accumulated as a Hermite form over
    /// Z/(common denominator). No echelon computation ever happens on the
    /// flattened integer matrix.
    pub fn from_series(field: &Cyc, series: &[QSeries<Cyc>], val_floor: i64, prec: i64) -> Self {
        for s in series {
            if s.is_zero() {
                continue;
            }
            assert!(s.prec >= prec, "series precision O(q^{}) below lattice window end {}", s.prec + 1, prec);
            assert!(
                s.valuation().map(|v| v >= val_floor).unwrap_or(true),
                "series valuation below lattice window"
            );
        }
        let ech = echelon_series(field, series);
        Self::saturation_of_kspan(field, &ech, val_floor, prec)
    }

    /// Saturation of the K-span of an echelonized basis (unit pivots) as an
    /// integral lattice on the window.
    pub fn saturation_of_kspan(
        field: &Cyc,
        ech: &[QSeries<Cyc>],
        val_floor: i64,
        prec: i64,
    ) -> Self {
        use num_integer::Integer as _;
        let phi = field.degree();
        let width = (prec - val_floor + 1).max(0) as usize;
        let ambient = width * phi;
        let d = ech.len();
        if d == 0 {
            return QLattice::zero(field, val_floor, prec);
        }
        let r = d * phi;
        let pivot_pos: Vec<i64> = ech.iter().map(|s| s.valuation().unwrap()).collect();
        for s in ech {
            assert!(s.prec >= prec, "echelon basis below window");
        }
        // common denominator of all coefficients
        let mut delta = BigInt::one();
        for s in ech {
            for k in val_floor..=prec {
                delta = delta.lcm(&s.coeff(k).denominator_lcm());
            }
        }
        // x = sum_{i,a} c_{i,a} zeta^a E_i integral <=> at every non-pivot
        // position j and coordinate t: sum c_{i,a} (zeta^a E_i[j])_t = 0 mod 1,
        // i.e. z . v = 0 mod delta for the delta-scaled condition vectors.
        let mut lat = ZLattice::zero(ambient);
        if delta.is_one() {
            // integral echelon basis with unit pivots: the flattened rows of
            // zeta^a E_i already form the saturation
            let mut rows = Vec::with_capacity(r);
            for s in ech {
                for a in 0..phi {
                    let sa = s.scale(&field.zeta_pow(a as i64));
                    rows.push(
                        series_to_flat_window(field, &sa, val_floor, prec)
                            .into_iter()
                            .map(|x| {
                                debug_assert!(x.is_integer());
                                x.to_integer()
                            })
                            .collect(),
                    );
                }
            }
            lat.rows = crate::linalg::hnf_rows(rows);
            return QLattice { field: field.clone(), val_floor, prec, lattice: lat };
        }
        // scaled coefficient table: zeta^a * E_i at each window position, as
        // integer coordinate vectors times 1/delta
        let mut scaled: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(r);
        for s in ech {
            for a in 0..phi {
                let sa = s.scale(&field.zeta_pow(a as i64));
                let mut cols = Vec::with_capacity(width);
                for k in val_floor..=prec {
                    let c = sa.coeff(k);
                    cols.push(
                        c.coeffs
                            .iter()
                            .map(|x| {
                                let v = x * BigRational::from_integer(delta.clone());
                                debug_assert!(v.is_integer());
                                v.to_integer()
                            })
                            .collect::<Vec<BigInt>>(),
                    );
                }
                scaled.push(cols);
            }
        }
        // accumulate the condition lattice Lambda = span{condition columns}
        // + delta Z^r
        let mut acc: Vec<Vec<BigInt>> = (0..r)
            .map(|i| {
                let mut v = vec![BigInt::zero(); r];
                v[i] = delta.clone();
                v
            })
            .collect();
        for (w, k) in (val_floor..=prec).enumerate() {
            if pivot_pos.contains(&k) {
                continue;
            }
            for t in 0..phi {
                let col: Vec<BigInt> =
                    (0..r).map(|row| scaled[row][w][t].mod_floor(&delta)).collect();
                if col.iter().all(|x| x.is_zero()) {
                    continue;
                }
                acc.push(col);
                if acc.len() > 3 * r + 16 {
                    acc = crate::linalg::hnf_rows(acc);
                }
            }
        }
        let t_mat = crate::linalg::hnf_rows(acc);
        assert_eq!(t_mat.len(), r);
        let tinv = crate::linalg::invert_upper_triangular_rational(&t_mat);
        // z-lattice basis = delta (T^T)^{-1}; output series = (z/delta) . rows
        let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(r);
        for i in 0..r {
            let y: Vec<BigRational> = (0..r).map(|j| tinv[j][i].clone()).collect();
            let mut flat = vec![BigRational::zero(); ambient];
            for (row_idx, yk) in y.iter().enumerate() {
                if yk.is_zero() {
                    continue;
                }
                for w in 0..width {
                    for t in 0..phi {
                        if !scaled[row_idx][w][t].is_zero() {
                            flat[w * phi + t] +=
                                yk * BigRational::from_integer(scaled[row_idx][w][t].clone());
                        }
                    }
                }
            }
            // z = delta * y, and the table is delta * (actual coefficients),
            // so x = (z / delta) . actual = y . table directly
            out.push(
                flat.into_iter()
                    .map(|x| {
                        assert!(x.is_integer(), "saturation produced a non-integer entry");
                        x.to_integer()
                    })
                    .collect(),
            );
        }
        lat.rows = crate::linalg::hnf_rows(out);
        QLattice { field: field.clone(), val_floor, prec, lattice: lat }
    }

    /// Basis as integral series (rows of the flattened HNF basis).
    pub fn basis_series(&self) -> Vec<QSeries<Cyc>> {
        let phi = self.field.degree();
        let width = (self.prec - self.val_floor + 1).max(0) as usize;
        self.lattice
            .rows
            .iter()
            .map(|row| {
                let mut coeffs = Vec::with_capacity(width);
                for k in 0..width {
                    let mut c = vec![BigRational::zero(); phi];
                    for j in 0..phi {
                        c[j] = BigRational::from_integer(row[k * phi + j].clone());
                    }
                    coeffs.push(CycNumber { n: self.field.n(), coeffs: c });
                }
                QSeries::from_coeffs(&self.field, self.val_floor, self.prec, coeffs).normalize()
            })
            .collect()
    }

    /// Integral membership.
    pub fn contains(&self, s: &QSeries<Cyc>) -> bool {
        assert!(s.prec >= self.prec);
        self.lattice.contains(&self.series_to_flat(s))
    }

    /// Rational-span membership.
    pub fn spans(&self, s: &QSeries<Cyc>) -> bool {
        assert!(s.prec >= self.prec);
        self.lattice.spans(&self.series_to_flat(s))
    }

    pub fn saturate(&self) -> Self {
        QLattice {
            field: self.field.clone(),
            val_floor: self.val_floor,
            prec: self.prec,
            lattice: self.lattice.saturate(),
        }
    }

    /// Intersection with torsion report for (L1 + L2)/L1.
    pub fn intersect(&self, other: &QLattice) -> (QLattice, TorsionReport) {
        assert_eq!(self.field, other.field, "ring mismatch");
        assert_eq!(
            (self.val_floor, self.prec),
            (other.val_floor, other.prec),
            "ambient window mismatch"
        );
        let (inter, torsion) = self.lattice.intersect_with_torsion(&other.lattice);
        (
            QLattice {
                field: self.field.clone(),
                val_floor: self.val_floor,
                prec: self.prec,
                lattice: inter,
            },
            TorsionReport { order_norm: torsion.clone(), support_hint: torsion },
        )
    }

    /// Truncate the window (drops high-order coefficients; result is
    /// re-saturated at the shorter window).
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let series: Vec<QSeries<Cyc>> = self.basis_series().iter().map(|s| s.truncate(prec)).collect();
        QLattice::from_series(&self.field, &series, self.val_floor, prec)
    }

    /// Reduce an echelon basis coefficientwise mod lambda and re-echelonize
    /// over the residue field.
    pub fn reduce_mod(&self, rf: &ResidueField) -> Vec<QSeries<ResidueField>> {
        let reduced: Vec<QSeries<ResidueField>> = self
            .basis_series()
            .iter()
            .map(|s| s.map(rf, |c| rf.reduce(c).expect("lattice basis is integral")))
            .collect();
        echelon_series(rf, &reduced)
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct QLatticeWire {
    field_n: u32,
    val_floor: i64,
    prec: i64,
    ambient: usize,
    rows: Vec<Vec<String>>,
}

impl QLattice {
    pub fn to_json(&self) -> Vec<u8> {
        let wire = QLatticeWire {
            field_n: self.field.n(),
            val_floor: self.val_floor,
            prec: self.prec,
            ambient: self.lattice.ambient,
            rows: self
                .lattice
                .rows
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect(),
        };
        serde_json::to_vec(&wire).expect("lattice serialization")
    }

    pub fn from_json(data: &[u8]) -> Option<QLattice> {
        let wire: QLatticeWire = serde_json::from_slice(data).ok()?;
        let rows: Option<Vec<Vec<BigInt>>> = wire
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.parse::<BigInt>().ok()).collect())
            .collect();
        Some(QLattice {
            field: Cyc::new(wire.field_n),
            val_floor: wire.val_floor,
            prec: wire.prec,
            lattice: crate::linalg::ZLattice {
                ambient: wire.ambient,
                rows: rows?,
            },
        })
    }
}

fn series_to_flat_window(
    field: &Cyc,
    s: &QSeries<Cyc>,
    val_floor: i64,
    prec: i64,
) -> Vec<BigRational> {
    let phi = field.degree();
    let width = (prec - val_floor + 1).max(0) as usize;
    let mut flat = vec![BigRational::zero(); width * phi];
    for k in 0..width {
        let c = s.coeff(val_floor + k as i64);
        for j in 0..phi {
            flat[k * phi + j] = c.coeffs[j].clone();
        }
    }
    flat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn qq(field: &Cyc, v: i64) -> CycNumber {
        field.from_i64(v)
    }

    fn series_q(field: &Cyc, coeffs: &[i64], val_floor: i64) -> QSeries<Cyc> {
        QSeries::from_coeffs(
            field,
            val_floor,
            val_floor + coeffs.len() as i64 - 1,
            coeffs.iter().map(|&c| qq(field, c)).collect(),
        )
    }

    #[test]
    fn mul_identity_and_square() {
        let f = Cyc::new(1);
        let a = series_q(&f, &[0, 1, -1, 3, 7], 0); // q - q^2 + 3q^3 + 7q^4 + O(q^5)
        let one = series_q(&f, &[1, 0, 0, 0, 0], 0);
        let prod = a.mul(&one);
        for k in 0..=prod.prec {
            assert_eq!(prod.coeff(k), a.coeff(k));
        }
        // (q - q^2 + O(q^3))^2 = q^2 - 2q^3 + O(q^4)
        let b = series_q(&f, &[0, 1, -1], 0);
        let sq = b.mul(&b);
        assert_eq!(sq.prec, 3);
        assert_eq!(sq.coeff(2), qq(&f, 1));
        assert_eq!(sq.coeff(3), qq(&f, -2));
    }

    #[test]
    fn div_examples() {
        let f = Cyc::new(1);
        let g = series_q(&f, &[0, 1, 1, 0, 0, 0], 0); // q + q^2
        assert_eq!(g.div(&g).unwrap().coeff(0), qq(&f, 1));
        // (q^2 + q^3) / (q + q^2) = q
        let a = series_q(&f, &[0, 0, 1, 1, 0, 0], 0);
        let h = a.div(&g).unwrap();
        assert_eq!(h.valuation(), Some(1));
        assert_eq!(h.coeff(1), qq(&f, 1));
        for k in 2..=h.prec {
            assert!(h.coeff(k).is_zero());
        }
        // division by zero rejected
        assert!(a.div(&QSeries::zero(&f)).is_err());
    }

    #[test]
    fn negative_valuation_retained() {
        let f = Cyc::new(1);
        let g = series_q(&f, &[1, 2, 3, 4], 0); // 1 + 2q + ...
        let h = series_q(&f, &[0, 1, 0, 0], 0); // q
        let d = g.div(&h).unwrap();
        assert_eq!(d.valuation(), Some(-1));
        assert_eq!(d.coeff(-1), qq(&f, 1));
        assert_eq!(d.coeff(0), qq(&f, 2));
    }

    #[test]
    fn div_mul_roundtrip_random() {
        let f = Cyc::new(4);
        let mut state = 0xABCDEF0102030405u64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 7) as i64 - 3
        };
        for _ in 0..50 {
            let a_coeffs: Vec<i64> = (0..8).map(|_| rng()).collect();
            let mut f_coeffs: Vec<i64> = (0..8).map(|_| rng()).collect();
            if f_coeffs.iter().all(|&c| c == 0) {
                f_coeffs[0] = 1;
            }
            let a = series_q(&f, &a_coeffs, 0);
            let fser = series_q(&f, &f_coeffs, 0);
            let prod = a.mul(&fser);
            let back = prod.div(&fser).unwrap();
            // div(mul(a, f), f) = a to the propagated precision
            for k in back.val_floor..=back.prec.min(a.prec) {
                assert_eq!(back.coeff(k), a.coeff(k));
            }
        }
    }

    #[test]
    fn lattice_saturate_examples() {
        let f = Cyc::new(1);
        // saturate(span{2q}) = span{q}
        let l = QLattice::from_series(&f, &[series_q(&f, &[0, 2, 0, 0], 0)], 0, 3);
        let basis = l.basis_series();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].coeff(1), qq(&f, 1));
        // idempotent
        assert_eq!(l.saturate().lattice, l.lattice);
    }

    #[test]
    fn lattice_intersect_toy() {
        let f = Cyc::new(1);
        // rank-1 toy over Z: L1 = span{2 + 2q}, L2 = span{3 + 3q}
        let l1 = QLattice {
            field: f.clone(),
            val_floor: 0,
            prec: 1,
            lattice: ZLattice::from_integer_rows(
                2,
                vec![vec![BigInt::from(2), BigInt::from(2)]],
            ),
        };
        let l2 = QLattice {
            field: f.clone(),
            val_floor: 0,
            prec: 1,
            lattice: ZLattice::from_integer_rows(
                2,
                vec![vec![BigInt::from(3), BigInt::from(3)]],
            ),
        };
        let (inter, report) = l1.intersect(&l2);
        assert_eq!(inter.lattice.rows, vec![vec![BigInt::from(6), BigInt::from(6)]]);
        assert_eq!(report.order_norm, BigInt::from(2));
        // self-intersection is identity with trivial torsion
        let (same, rep) = l1.intersect(&l1);
        assert_eq!(same.lattice, l1.lattice);
        assert!(rep.order_norm.is_one());
    }

    #[test]
    fn intersect_symmetric_monotone() {
        let f = Cyc::new(1);
        let l1 = QLattice::from_series(
            &f,
            &[series_q(&f, &[1, 0, 2, 1], 0), series_q(&f, &[0, 3, 0, 3], 0)],
            0,
            3,
        );
        let l2 = QLattice::from_series(
            &f,
            &[series_q(&f, &[1, 1, 1, 1], 0), series_q(&f, &[0, 0, 1, 0], 0)],
            0,
            3,
        );
        let (a, _) = l1.intersect(&l2);
        let (b, _) = l2.intersect(&l1);
        assert_eq!(a.lattice, b.lattice);
        assert!(a.rank_z() <= l1.rank_z().min(l2.rank_z()));
        // saturate preserves the intersection's rational span
        let sat = a.saturate();
        for s in a.basis_series() {
            assert!(sat.contains(&s));
        }
    }

    #[test]
    fn reduce_lattice_pivot_shift() {
        // span{1 + 3q} mod an ideal above 3 reduces to span{1}
        let f = Cyc::new(1);
        let l = QLattice::from_series(&f, &[series_q(&f, &[1, 3, 0], 0)], 0, 2);
        let ids = crate::cyclotomic::ideals_above(3, 1);
        let rf = ResidueField::new(&ids[0]);
        let red = l.reduce_mod(&rf);
        assert_eq!(red.len(), 1);
        assert_eq!(red[0].valuation(), Some(0));
        assert!(rf.is_one(&red[0].coeff(0)));
        assert!(rf.is_zero(&red[0].coeff(1)));
        // zero lattice reduces to an empty list
        let z = QLattice::zero(&f, 0, 2);
        assert!(z.reduce_mod(&rf).is_empty());
    }

    #[test]
    fn cyclotomic_lattice_saturation() {
        // over Z[i]: span{(1+i) q} saturates to span{q, iq} scaled by (1+i)?
        // no: (1+i) is not a unit; the saturation contains q * (1+i)/... the
        // integral span of (1+i)q over Z[i] is (1+i)Z[i], whose saturation in
        // integral series is Z[i] q since q = ((1+i)q) * (1-i)/2 has integral
        // coefficients and lies in the rational span.
        let f = Cyc::new(4);
        let one_plus_i = f.add(&f.one(), &f.zeta_pow(1));
        let s = QSeries::from_coeffs(&f, 1, 2, vec![one_plus_i, f.zero()]);
        let l = QLattice::from_series(&f, &[s], 0, 2);
        assert_eq!(l.rank(), 1);
        let basis = l.basis_series();
        // q itself must be in the lattice
        let q = QSeries::from_coeffs(&f, 0, 2, vec![f.zero(), f.one(), f.zero()]);
        assert!(l.contains(&q), "basis: {:?}", basis);
    }
}
