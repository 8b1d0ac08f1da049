//! Exact feasibility of small linear systems `A·x = b, x ≥ 0` by a
//! phase-one simplex over rationals with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) fn feasible(rows: &[Vec<i64>], rhs: &[i64]) -> bool {
    let m = rows.len();
    if m == 0 {
        return true;
    }
    let n = rows[0].len();
    let q = |v: i64| BigRational::from_integer(BigInt::from(v));
    // Tableau columns: n originals, m artificials, then the right-hand side.
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for (i, (row, &b)) in rows.iter().zip(rhs).enumerate() {
        let sign = if b < 0 { -1 } else { 1 };
        let mut r = vec![BigRational::zero(); width];
        for (j, &a) in row.iter().enumerate() {
            r[j] = q(a * sign);
        }
        r[n + i] = BigRational::one();
        r[width - 1] = q(b * sign);
        t.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of minimizing the sum of artificials.
    let mut cost = vec![BigRational::zero(); width];
    for r in &t {
        for j in 0..n {
            cost[j] -= &r[j];
        }
        cost[width - 1] -= &r[width - 1];
    }
    while let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, r) in t.iter().enumerate() {
            if r[enter].is_positive() {
                let ratio = &r[width - 1] / &r[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((p, _)) = leave else {
            // Unbounded direction; the phase-one objective is bounded below by 0.
            break;
        };
        let pivot = t[p][enter].clone();
        for x in t[p].iter_mut() {
            *x /= &pivot;
        }
        let prow = t[p].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != p && !r[enter].is_zero() {
                let f = r[enter].clone();
                for (x, y) in r.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        let f = cost[enter].clone();
        for (x, y) in cost.iter_mut().zip(&prow) {
            *x -= &f * y;
        }
        basis[p] = enter;
    }
    cost[width - 1].is_zero()
}
