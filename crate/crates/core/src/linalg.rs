//! Exact linear algebra: reduced row echelon form over an arbitrary field,
//! Hermite and Smith normal forms over Z, lattice saturation, intersection
//! and torsion indices.
//!
//! Lattices are stored as row bases inside an ambient Z^n. The ambient
//! dimension can be large (q-expansion coordinates), but ranks stay small, so
//! every algorithm here is arranged as O(rank^2 * ambient).

use crate::field::Field;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

// ---------------------------------------------------------------------------
// Generic echelon form over a field
// ---------------------------------------------------------------------------

/// Result of a reduced row echelon computation.
#[derive(Debug, Clone)]
pub struct Echelon<E> {
    pub rows: Vec<Vec<E>>,
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form; zero rows are dropped. Pivot entries are 1 and
/// pivot columns are cleared above and below.
pub fn rref<F: Field>(f: &F, mut rows: Vec<Vec<F::Elem>>) -> Echelon<F::Elem> {
    let ncols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    for r in rows.iter_mut() {
        r.resize(ncols, f.zero());
    }
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let mut pivot_row = None;
        for (i, row) in rows.iter().enumerate().skip(rank) {
            if !f.is_zero(&row[col]) {
                pivot_row = Some(i);
                break;
            }
        }
        let Some(pr) = pivot_row else { continue };
        rows.swap(rank, pr);
        let inv = f.inv(&rows[rank][col]);
        for c in col..ncols {
            rows[rank][c] = f.mul(&rows[rank][c], &inv);
        }
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || f.is_zero(&row[col]) {
                continue;
            }
            let factor = row[col].clone();
            for c in col..ncols {
                let t = f.mul(&factor, &pivot[c]);
                row[c] = f.sub(&row[c], &t);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    Echelon { rows, pivots }
}

/// Left kernel of `rows`: basis of {u : sum_i u_i * rows_i = 0}.
pub fn left_kernel<F: Field>(f: &F, rows: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    let m = rows.len();
    if m == 0 {
        return vec![];
    }
    let ncols = rows[0].len();
    // Augment with identity and echelonize; kernel rows are those whose
    // data part vanished.
    let mut aug: Vec<Vec<F::Elem>> = Vec::with_capacity(m);
    for (i, r) in rows.iter().enumerate() {
        let mut row = r.clone();
        row.resize(ncols, f.zero());
        for j in 0..m {
            row.push(if i == j { f.one() } else { f.zero() });
        }
        aug.push(row);
    }
    // Echelonize only on the first ncols columns.
    let mut rank = 0usize;
    for col in 0..ncols {
        let mut pivot_row = None;
        for (i, row) in aug.iter().enumerate().skip(rank) {
            if !f.is_zero(&row[col]) {
                pivot_row = Some(i);
                break;
            }
        }
        let Some(pr) = pivot_row else { continue };
        aug.swap(rank, pr);
        let inv = f.inv(&aug[rank][col]);
        for c in 0..ncols + m {
            aug[rank][c] = f.mul(&aug[rank][c], &inv);
        }
        let pivot = aug[rank].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == rank || f.is_zero(&row[col]) {
                continue;
            }
            let factor = row[col].clone();
            for c in 0..ncols + m {
                let t = f.mul(&factor, &pivot[c]);
                row[c] = f.sub(&row[c], &t);
            }
        }
        rank += 1;
        if rank == aug.len() {
            break;
        }
    }
    let mut kernel = Vec::new();
    for row in aug.iter().skip(rank) {
        kernel.push(row[ncols..].to_vec());
    }
    kernel
}

/// Solve x * rows = target for x, if possible. `ech` must be the rref of the
/// row space along with a record of which original-row combinations produced
/// it; here we just solve against the echelon rows themselves.
pub fn solve_in_rowspace<F: Field>(
    f: &F,
    ech: &Echelon<F::Elem>,
    target: &[F::Elem],
) -> Option<Vec<F::Elem>> {
    let mut residual = target.to_vec();
    let ncols = residual.len();
    let mut coeffs = Vec::with_capacity(ech.rows.len());
    for (row, &p) in ech.rows.iter().zip(ech.pivots.iter()) {
        if p >= ncols {
            coeffs.push(f.zero());
            continue;
        }
        let c = residual[p].clone();
        if !f.is_zero(&c) {
            for j in p..ncols.min(row.len()) {
                let t = f.mul(&c, &row[j]);
                residual[j] = f.sub(&residual[j], &t);
            }
        }
        coeffs.push(c);
    }
    if residual.iter().all(|x| f.is_zero(x)) {
        Some(coeffs)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Integer matrices: HNF, SNF, determinants
// ---------------------------------------------------------------------------

fn bigint_rows_normalize(rows: &mut Vec<Vec<BigInt>>) {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
}

/// Row-style Hermite normal form: returns echelon rows with positive pivots,
/// entries above each pivot reduced into [0, pivot). Zero rows are dropped.
pub fn hnf_rows(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    bigint_rows_normalize(&mut rows);
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows.iter().map(|r| r.len()).max().unwrap();
    for r in rows.iter_mut() {
        r.resize(ncols, BigInt::zero());
    }
    let mut rank = 0usize;
    for col in 0..ncols {
        // gcd-combine all rows below `rank` at this column
        loop {
            let mut idx: Vec<usize> = (rank..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .collect();
            if idx.is_empty() {
                break;
            }
            if idx.len() == 1 {
                rows.swap(rank, idx[0]);
                break;
            }
            // pick the row with smallest nonzero |entry| as pivot candidate
            idx.sort_by_key(|&i| rows[i][col].magnitude().clone());
            let p = idx[0];
            for &i in &idx[1..] {
                let q = {
                    let (q, _r) = rows[i][col].div_rem(&rows[p][col]);
                    q
                };
                if !q.is_zero() {
                    for c in 0..ncols {
                        let t = &rows[p][c] * &q;
                        rows[i][c] -= t;
                    }
                }
            }
        }
        if rank >= rows.len() || rows[rank][col].is_zero() {
            continue;
        }
        if rows[rank][col].is_negative() {
            for c in 0..ncols {
                rows[rank][c] = -rows[rank][c].clone();
            }
        }
        // reduce entries above the pivot
        let pivot = rows[rank][col].clone();
        for i in 0..rank {
            let q = rows[i][col].div_floor(&pivot);
            if !q.is_zero() {
                for c in 0..ncols {
                    let t = &rows[rank][c] * &q;
                    rows[i][c] -= t;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    rows
}

/// Determinant of a small square BigInt matrix (Bareiss fraction-free).
pub fn det_bigint(mat: &[Vec<BigInt>]) -> BigInt {
    let n = mat.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let swap = (k + 1..n).find(|&i| !a[i][k].is_zero());
            match swap {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Smith normal form divisors d_1 | d_2 | ... (nonnegative; trailing zeros
/// for rank deficiency are omitted) together with the right transform V such
/// that for the relation lattice L = rowspan(R) in Z^g, the map
/// x -> x * V sends Z^g/L isomorphically onto sum Z/d_i (+ free Z parts for
/// columns beyond the listed divisors).
pub fn snf_with_transform(r: &[Vec<BigInt>], ncols: usize) -> (Vec<BigInt>, Vec<Vec<BigInt>>) {
    let nrows = r.len();
    let mut a: Vec<Vec<BigInt>> = r
        .iter()
        .map(|row| {
            let mut v = row.clone();
            v.resize(ncols, BigInt::zero());
            v
        })
        .collect();
    // V accumulates column operations (g x g identity to start)
    let mut v: Vec<Vec<BigInt>> = (0..ncols)
        .map(|i| {
            (0..ncols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let n = nrows.min(ncols);
    let mut t = 0usize;
    while t < n {
        // find a nonzero entry in the submatrix
        let mut found = None;
        'outer: for i in t..nrows {
            for j in t..ncols {
                if !a[i][j].is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((pi, pj)) = found else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            // clear column t with row ops
            let mut changed = false;
            for i in t + 1..nrows {
                if a[i][t].is_zero() {
                    continue;
                }
                let (g, _, _) = ext_gcd_big(&a[t][t], &a[i][t]);
                if (&a[i][t] % &a[t][t]).is_zero() {
                    let q = &a[i][t] / &a[t][t];
                    for c in t..ncols {
                        let val = &a[t][c] * &q;
                        a[i][c] -= val;
                    }
                } else {
                    // combine rows to put gcd at pivot
                    let (_, x, y) = ext_gcd_big(&a[t][t], &a[i][t]);
                    let at = a[t].clone();
                    let ai = a[i].clone();
                    let p1 = &a[t][t] / &g;
                    let p2 = &a[i][t] / &g;
                    for c in t..ncols {
                        a[t][c] = &at[c] * &x + &ai[c] * &y;
                        a[i][c] = &ai[c] * &p1 - &at[c] * &p2;
                    }
                    changed = true;
                }
            }
            // clear row t with column ops (mirrored on V)
            for j in t + 1..ncols {
                if a[t][j].is_zero() {
                    continue;
                }
                let g = a[t][t].gcd(&a[t][j]);
                if (&a[t][j] % &a[t][t]).is_zero() {
                    let q = &a[t][j] / &a[t][t];
                    for row in a.iter_mut() {
                        let val = &row[t] * &q;
                        row[j] -= val;
                    }
                    for row in v.iter_mut() {
                        let val = &row[t] * &q;
                        row[j] -= val;
                    }
                } else {
                    let (_, x, y) = ext_gcd_big(&a[t][t], &a[t][j]);
                    let p1 = &a[t][t] / &g;
                    let p2 = &a[t][j] / &g;
                    for row in a.iter_mut() {
                        let ct = row[t].clone();
                        let cj = row[j].clone();
                        row[t] = &ct * &x + &cj * &y;
                        row[j] = &cj * &p1 - &ct * &p2;
                    }
                    for row in v.iter_mut() {
                        let ct = row[t].clone();
                        let cj = row[j].clone();
                        row[t] = &ct * &x + &cj * &y;
                        row[j] = &cj * &p1 - &ct * &p2;
                    }
                    changed = true;
                }
            }
            let col_clear = (t + 1..nrows).all(|i| a[i][t].is_zero());
            let row_clear = (t + 1..ncols).all(|j| a[t][j].is_zero());
            if col_clear && row_clear && !changed {
                break;
            }
        }
        t += 1;
    }
    // enforce divisibility d_i | d_{i+1}
    let rank = (0..n).take_while(|&i| !a[i][i].is_zero()).count();
    let mut i = 0;
    while i + 1 < rank {
        if (&a[i + 1][i + 1] % &a[i][i]).is_zero() {
            i += 1;
            continue;
        }
        // standard 2x2 fix: add column i+1 to column i, re-run the pivot
        for row in a.iter_mut() {
            let val = row[i + 1].clone();
            row[i] += val;
        }
        for row in v.iter_mut() {
            let val = row[i + 1].clone();
            row[i] += val;
        }
        // re-clear from position i
        let (g, x, y) = ext_gcd_big(&a[i][i], &a[i + 1][i]);
        let p1 = &a[i][i] / &g;
        let p2 = &a[i + 1][i] / &g;
        let ri = a[i].clone();
        let rj = a[i + 1].clone();
        for c in 0..ncols {
            a[i][c] = &ri[c] * &x + &rj[c] * &y;
            a[i + 1][c] = &rj[c] * &p1 - &ri[c] * &p2;
        }
        // clear row i via column ops
        for j in i + 1..ncols {
            if a[i][j].is_zero() {
                continue;
            }
            let (g2, x2, y2) = ext_gcd_big(&a[i][i], &a[i][j]);
            let q1 = &a[i][i] / &g2;
            let q2 = &a[i][j] / &g2;
            for row in a.iter_mut() {
                let ct = row[i].clone();
                let cj = row[j].clone();
                row[i] = &ct * &x2 + &cj * &y2;
                row[j] = &cj * &q1 - &ct * &q2;
            }
            for row in v.iter_mut() {
                let ct = row[i].clone();
                let cj = row[j].clone();
                row[i] = &ct * &x2 + &cj * &y2;
                row[j] = &cj * &q1 - &ct * &q2;
            }
        }
        // clear column i via row ops
        for r2 in i + 1..nrows {
            if a[r2][i].is_zero() {
                continue;
            }
            let q = &a[r2][i] / &a[i][i];
            for c in 0..ncols {
                let val = &a[i][c] * &q;
                a[r2][c] -= val;
            }
        }
        i = 0; // divisibility can cascade backwards
    }
    let divisors: Vec<BigInt> = (0..rank).map(|i| a[i][i].abs()).collect();
    (divisors, v)
}

/// Elementary divisors of an integer matrix (convenience wrapper).
pub fn elementary_divisors(r: &[Vec<BigInt>], ncols: usize) -> Vec<BigInt> {
    snf_with_transform(r, ncols).0
}

fn ext_gcd_big(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let tmp = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, tmp);
        let tmp = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, tmp);
        let tmp = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, tmp);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

// ---------------------------------------------------------------------------
// Rational row spaces and lattice saturation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct QField;

impl Field for QField {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        BigRational::one() / a
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// An integer lattice of finite rank in Z^ambient, stored as an HNF row basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ZLattice {
    pub ambient: usize,
    pub rows: Vec<Vec<BigInt>>,
}

impl ZLattice {
    pub fn zero(ambient: usize) -> Self {
        ZLattice { ambient, rows: vec![] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn from_integer_rows(ambient: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let mut rows = rows;
        for r in rows.iter_mut() {
            r.resize(ambient, BigInt::zero());
        }
        ZLattice { ambient, rows: hnf_rows(rows) }
    }

    /// The saturation of the rational row span inside Z^ambient: all integer
    /// vectors lying in the Q-span of `rows`.
    pub fn saturation_of_rational_rows(ambient: usize, rows: Vec<Vec<BigRational>>) -> Self {
        let f = QField;
        let mut rows = rows;
        for r in rows.iter_mut() {
            r.resize(ambient, BigRational::zero());
        }
        let ech = rref(&f, rows);
        let r = ech.rows.len();
        if r == 0 {
            return ZLattice::zero(ambient);
        }
        // Delta = lcm of denominators of the echelon rows
        let mut delta = BigInt::one();
        for row in &ech.rows {
            for x in row {
                delta = delta.lcm(x.denom());
            }
        }
        // F = Delta * E, integer r x ambient
        let fmat: Vec<Vec<BigInt>> = ech
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        let scaled = x * BigRational::from_integer(delta.clone());
                        debug_assert!(scaled.is_integer());
                        scaled.to_integer()
                    })
                    .collect()
            })
            .collect();
        // Lambda = column span of F + Delta Z^r, accumulated as an r x r HNF
        let mut acc: Vec<Vec<BigInt>> = (0..r)
            .map(|i| {
                let mut v = vec![BigInt::zero(); r];
                v[i] = delta.clone();
                v
            })
            .collect();
        for j in 0..ambient {
            let col: Vec<BigInt> = (0..r).map(|i| fmat[i][j].clone()).collect();
            if col.iter().all(|x| x.is_zero()) {
                continue;
            }
            acc.push(col);
            if acc.len() > 4 * r {
                acc = hnf_rows(acc);
            }
        }
        let t = hnf_rows(acc); // r x r upper triangular, full rank
        debug_assert_eq!(t.len(), r);
        // Y = Delta * (T^T)^{-1}; rows of Y span {y : y T^T = 0 mod Delta}
        let tinv = invert_upper_triangular_rational(&t);
        // yrows[i] = Delta * (row i of (T^{-1})^T) = Delta * (column i of T^{-1})
        let mut yrows: Vec<Vec<BigInt>> = Vec::with_capacity(r);
        for i in 0..r {
            let mut row = Vec::with_capacity(r);
            for j in 0..r {
                let val = &tinv[j][i] * BigRational::from_integer(delta.clone());
                debug_assert!(val.is_integer(), "saturation transform not integral");
                row.push(val.to_integer());
            }
            yrows.push(row);
        }
        // result rows = Y * E (must be integral)
        let mut out: Vec<Vec<BigInt>> = Vec::with_capacity(r);
        for y in &yrows {
            let mut row = vec![BigRational::zero(); ambient];
            for (k, yk) in y.iter().enumerate() {
                if yk.is_zero() {
                    continue;
                }
                let ykr = BigRational::from_integer(yk.clone());
                for c in 0..ambient {
                    if !ech.rows[k][c].is_zero() {
                        row[c] += &ykr * &ech.rows[k][c];
                    }
                }
            }
            let introw: Vec<BigInt> = row
                .into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "saturation produced non-integer entry");
                    x.to_integer()
                })
                .collect();
            out.push(introw);
        }
        ZLattice { ambient, rows: hnf_rows(out) }
    }

    pub fn rational_rows(&self) -> Vec<Vec<BigRational>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect()
    }

    /// Saturate this lattice in place (integer points of its own Q-span).
    pub fn saturate(&self) -> Self {
        ZLattice::saturation_of_rational_rows(self.ambient, self.rational_rows())
    }

    /// Does the rational vector lie in the lattice (integer combination)?
    pub fn contains(&self, v: &[BigRational]) -> bool {
        let f = QField;
        let mut residual: Vec<BigRational> = v.to_vec();
        residual.resize(self.ambient, BigRational::zero());
        // rows are in HNF: eliminate greedily by pivot columns
        for row in &self.rows {
            let pcol = row.iter().position(|x| !x.is_zero()).unwrap();
            if residual[pcol].is_zero() {
                continue;
            }
            let c = &residual[pcol] / BigRational::from_integer(row[pcol].clone());
            if !c.is_integer() {
                return false;
            }
            for j in pcol..self.ambient {
                if !row[j].is_zero() {
                    let t = f.mul(&c, &BigRational::from_integer(row[j].clone()));
                    residual[j] = f.sub(&residual[j], &t);
                }
            }
        }
        residual.iter().all(|x| x.is_zero())
    }

    /// Intersection L1 cap L2 together with the order of the torsion subgroup
    /// of (L1 + L2)/L1 as a Z-module.
    pub fn intersect_with_torsion(&self, other: &ZLattice) -> (ZLattice, BigInt) {
        assert_eq!(self.ambient, other.ambient);
        let n = self.ambient;
        if self.rank() == 0 || other.rank() == 0 {
            // (L1+L2)/L1 is free when either side is zero
            return (ZLattice::zero(n), BigInt::one());
        }
        let f = QField;
        // --- intersection ---
        // left kernel of [B1; -B2]
        let mut stacked: Vec<Vec<BigRational>> = Vec::with_capacity(self.rank() + other.rank());
        for r in &self.rows {
            stacked.push(r.iter().map(|x| BigRational::from_integer(x.clone())).collect());
        }
        for r in &other.rows {
            stacked.push(r.iter().map(|x| BigRational::from_integer(-x.clone())).collect());
        }
        let ker = left_kernel(&f, &stacked);
        let ker_lat =
            ZLattice::saturation_of_rational_rows(self.rank() + other.rank(), ker);
        let mut inter_rows: Vec<Vec<BigInt>> = Vec::new();
        for krow in &ker_lat.rows {
            let mut v = vec![BigInt::zero(); n];
            for (i, c) in krow.iter().take(self.rank()).enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = c * &self.rows[i][j];
                    v[j] += t;
                }
            }
            inter_rows.push(v);
        }
        let intersection = ZLattice::from_integer_rows(n, inter_rows);

        // --- torsion of (L1+L2)/L1 ---
        // M = (L1+L2) cap span_Q(L1); torsion order = [M : L1]
        let mut sum_rows: Vec<Vec<BigInt>> = self.rows.clone();
        sum_rows.extend(other.rows.iter().cloned());
        let sum = ZLattice::from_integer_rows(n, sum_rows);
        let e1 = rref(
            &f,
            self.rows
                .iter()
                .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
                .collect(),
        );
        // residual of each sum basis row modulo span(L1)
        let mut residuals: Vec<Vec<BigRational>> = Vec::with_capacity(sum.rank());
        for row in &sum.rows {
            let mut v: Vec<BigRational> =
                row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            for (erow, &p) in e1.rows.iter().zip(e1.pivots.iter()) {
                if v[p].is_zero() {
                    continue;
                }
                let c = v[p].clone();
                for j in p..n {
                    let t = f.mul(&c, &erow[j]);
                    v[j] = f.sub(&v[j], &t);
                }
            }
            residuals.push(v);
        }
        let ker2 = left_kernel(&f, &residuals);
        let ker2_lat = ZLattice::saturation_of_rational_rows(sum.rank(), ker2);
        debug_assert_eq!(ker2_lat.rank(), self.rank());
        let mut m_rows: Vec<Vec<BigInt>> = Vec::new();
        for krow in &ker2_lat.rows {
            let mut v = vec![BigInt::zero(); n];
            for (i, c) in krow.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = c * &sum.rows[i][j];
                    v[j] += t;
                }
            }
            m_rows.push(v);
        }
        let m_lat = ZLattice::from_integer_rows(n, m_rows);
        let torsion = m_lat.index_of_sublattice(self);
        (intersection, torsion)
    }

    /// For a sublattice `sub` of the same rank, the index [self : sub].
    pub fn index_of_sublattice(&self, sub: &ZLattice) -> BigInt {
        assert_eq!(self.ambient, sub.ambient);
        assert_eq!(self.rank(), sub.rank(), "index requires equal ranks");
        if self.rank() == 0 {
            return BigInt::one();
        }
        let f = QField;
        let ech = rref(
            &f,
            self.rows
                .iter()
                .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
                .collect(),
        );
        // write each sub row in terms of self rows: solve via pivot columns of
        // the HNF basis directly (triangular solve).
        let mut coord_mat: Vec<Vec<BigInt>> = Vec::with_capacity(sub.rank());
        for row in &sub.rows {
            let target: Vec<BigRational> =
                row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            // solve against echelon rows, then convert back to the HNF basis:
            // since both bases span the same space, it is enough to solve in
            // the HNF basis directly by triangular elimination.
            let coeffs = self
                .solve_integer_coords(&target)
                .unwrap_or_else(|| panic!("sublattice row not in Q-span"));
            coord_mat.push(coeffs);
        }
        let _ = ech;
        det_bigint(&coord_mat).abs()
    }

    /// Coordinates of `v` with respect to the HNF basis rows, as exact
    /// rationals converted to integers when integral; returns None if v is
    /// outside the Q-span, panics if coordinates are non-integral.
    fn solve_integer_coords(&self, v: &[BigRational]) -> Option<Vec<BigInt>> {
        let f = QField;
        let mut residual = v.to_vec();
        residual.resize(self.ambient, BigRational::zero());
        let mut coeffs = vec![BigInt::zero(); self.rank()];
        for (i, row) in self.rows.iter().enumerate() {
            let pcol = row.iter().position(|x| !x.is_zero()).unwrap();
            if residual[pcol].is_zero() {
                continue;
            }
            let c = &residual[pcol] / BigRational::from_integer(row[pcol].clone());
            for j in pcol..self.ambient {
                if !row[j].is_zero() {
                    let t = f.mul(&c, &BigRational::from_integer(row[j].clone()));
                    residual[j] = f.sub(&residual[j], &t);
                }
            }
            assert!(c.is_integer(), "coordinates not integral");
            coeffs[i] = c.to_integer();
        }
        if residual.iter().all(|x| x.is_zero()) {
            Some(coeffs)
        } else {
            None
        }
    }

    /// Rational-span membership.
    pub fn spans(&self, v: &[BigRational]) -> bool {
        let f = QField;
        let mut residual = v.to_vec();
        residual.resize(self.ambient, BigRational::zero());
        for row in &self.rows {
            let pcol = row.iter().position(|x| !x.is_zero()).unwrap();
            if residual[pcol].is_zero() {
                continue;
            }
            let c = &residual[pcol] / BigRational::from_integer(row[pcol].clone());
            for j in pcol..self.ambient {
                if !row[j].is_zero() {
                    let t = f.mul(&c, &BigRational::from_integer(row[j].clone()));
                    residual[j] = f.sub(&residual[j], &t);
                }
            }
        }
        residual.iter().all(|x| x.is_zero())
    }
}

pub fn invert_upper_triangular_rational(t: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    let r = t.len();
    let mut inv: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); r]; r];
    for col in 0..r {
        // solve T x = e_col by back substitution
        for i in (0..r).rev() {
            let mut rhs = if i == col {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            for j in i + 1..r {
                rhs -= BigRational::from_integer(t[i][j].clone()) * &inv[j][col];
            }
            inv[i][col] = rhs / BigRational::from_integer(t[i][i].clone());
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zl(ambient: usize, rows: &[&[i64]]) -> ZLattice {
        ZLattice::from_integer_rows(
            ambient,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn hnf_basic() {
        let rows = vec![
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(4)],
            vec![BigInt::from(-6), BigInt::from(6), BigInt::from(12)],
            vec![BigInt::from(10), BigInt::from(4), BigInt::from(16)],
        ];
        let h = hnf_rows(rows);
        // invariant factors 2, 2, 156: det = 624
        let d = det_bigint(&h);
        assert_eq!(d.abs(), BigInt::from(624));
    }

    #[test]
    fn snf_divisors() {
        let rows = vec![
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(4)],
            vec![BigInt::from(-6), BigInt::from(6), BigInt::from(12)],
            vec![BigInt::from(10), BigInt::from(4), BigInt::from(16)],
        ];
        let (d, _) = snf_with_transform(&rows, 3);
        assert_eq!(d, vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]);
    }

    #[test]
    fn saturation_divides_content() {
        let l = ZLattice::saturation_of_rational_rows(
            3,
            vec![vec![
                BigRational::from_integer(BigInt::from(2)),
                BigRational::from_integer(BigInt::from(4)),
                BigRational::from_integer(BigInt::from(6)),
            ]],
        );
        assert_eq!(l.rows, vec![vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)]]);
    }

    #[test]
    fn saturation_index_two() {
        // span{(1,1),(1,-1)} has index 2 in Z^2
        let l = zl(2, &[&[1, 1], &[1, -1]]);
        let s = l.saturate();
        assert_eq!(s.rows, vec![vec![BigInt::from(1), BigInt::zero()], vec![
            BigInt::zero(),
            BigInt::from(1)
        ]]);
        assert_eq!(s.index_of_sublattice(&l), BigInt::from(2));
    }

    #[test]
    fn saturation_idempotent_and_span_preserving() {
        let l = zl(4, &[&[2, 3, 5, 7], &[0, 4, 6, 2]]);
        let s = l.saturate();
        assert_eq!(s.saturate(), s);
        for row in &l.rows {
            let v: Vec<BigRational> =
                row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            assert!(s.contains(&v));
        }
    }

    #[test]
    fn intersect_rank_one_toy() {
        // the spec's toy: L1 = span{(2,2)}, L2 = span{(3,3)}
        let l1 = zl(2, &[&[2, 2]]);
        let l2 = zl(2, &[&[3, 3]]);
        let (inter, tors) = l1.intersect_with_torsion(&l2);
        assert_eq!(inter.rows, vec![vec![BigInt::from(6), BigInt::from(6)]]);
        assert_eq!(tors, BigInt::from(2)); // (2Z+3Z)/2Z = Z/2 inside the line
    }

    #[test]
    fn intersect_self_is_identity() {
        let l = zl(3, &[&[1, 2, 3], &[0, 5, 1]]);
        let (inter, tors) = l.intersect_with_torsion(&l);
        assert_eq!(inter, l);
        assert_eq!(tors, BigInt::one());
    }

    #[test]
    fn torsion_matches_elementary_divisors_small_random() {
        // brute-force oracle: torsion of (L1+L2)/L1 = product of elementary
        // divisors of the coordinate matrix of a basis of M = (L1+L2) cap QL1
        // relative to L1. Exercised on pseudo-random rank <= 3 lattices.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 7) as i64 - 3
        };
        for trial in 0..200 {
            let ambient = 4 + (trial % 3);
            let r1 = 1 + (trial % 3);
            let r2 = 1 + ((trial / 3) % 3);
            let rows1: Vec<Vec<BigInt>> = (0..r1)
                .map(|_| (0..ambient).map(|_| BigInt::from(rng())).collect())
                .collect();
            let rows2: Vec<Vec<BigInt>> = (0..r2)
                .map(|_| (0..ambient).map(|_| BigInt::from(rng())).collect())
                .collect();
            let l1 = ZLattice::from_integer_rows(ambient, rows1);
            let l2 = ZLattice::from_integer_rows(ambient, rows2);
            if l1.rank() == 0 || l2.rank() == 0 {
                continue;
            }
            let (_, tors) = l1.intersect_with_torsion(&l2);
            // oracle: [sat(L1, inside L1+L2) : L1] where sat = integer span
            // points of QL1 inside L1+L2; computed via SNF of coordinates of
            // L1 in a basis of L1+L2.
            let mut sum_rows = l1.rows.clone();
            sum_rows.extend(l2.rows.iter().cloned());
            let sum = ZLattice::from_integer_rows(ambient, sum_rows);
            // coordinates of L1's rows in sum's basis
            let coords: Vec<Vec<BigInt>> = l1
                .rows
                .iter()
                .map(|row| {
                    let v: Vec<BigRational> =
                        row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
                    sum.solve_integer_coords(&v).unwrap()
                })
                .collect();
            let divs = elementary_divisors(&coords, sum.rank());
            let prod: BigInt = divs.iter().product();
            assert_eq!(tors, prod.abs(), "trial {}", trial);
        }
    }

    #[test]
    fn intersection_symmetric() {
        let l1 = zl(4, &[&[1, 0, 2, 0], &[0, 3, 0, 3]]);
        let l2 = zl(4, &[&[1, 1, 1, 1], &[2, 0, 2, 0]]);
        let (a, _) = l1.intersect_with_torsion(&l2);
        let (b, _) = l2.intersect_with_torsion(&l1);
        assert_eq!(a, b);
        assert!(a.rank() <= l1.rank().min(l2.rank()));
    }
}
