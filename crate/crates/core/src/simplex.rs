//! Dense primal simplex over exact rationals for
//! `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`, so the origin is a
//! feasible starting basis and no phase one is needed. Bland's rule keeps it
//! finite on degenerate problems.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Unbounded,
}

pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let n = c.len();
    let rows = a.len();
    assert_eq!(b.len(), rows);
    assert!(
        b.iter().all(|v| !v.is_negative()),
        "origin must be feasible"
    );

    // Columns: n structural, then `rows` slacks, then the right-hand side.
    let width = n + rows + 1;
    let mut tab: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(r, row)| {
            assert_eq!(row.len(), n);
            let mut t = row.clone();
            t.extend((0..rows).map(|s| {
                if s == r {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            t.push(b[r].clone());
            t
        })
        .collect();
    // Reduced costs, stored as -c so that a negative entry can still improve.
    let mut obj: Vec<Rational> = c.iter().map(|v| -v).collect();
    obj.extend(std::iter::repeat_n(Rational::zero(), rows + 1));
    let mut basis: Vec<usize> = (n..n + rows).collect();

    while let Some(enter) = (0..width - 1).find(|&col| obj[col].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..rows {
            if tab[r][enter].is_positive() {
                let ratio = &tab[r][width - 1] / &tab[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            return LpOutcome::Unbounded;
        };

        let pivot = tab[pivot_row][enter].clone();
        for v in tab[pivot_row].iter_mut() {
            *v = &*v / &pivot;
        }
        let pivot_vals = tab[pivot_row].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r == pivot_row || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_vals) {
                *v -= &factor * p;
            }
        }
        let factor = obj[enter].clone();
        for (v, p) in obj.iter_mut().zip(&pivot_vals) {
            *v -= &factor * p;
        }
        basis[pivot_row] = enter;
    }

    let mut x = vec![Rational::zero(); n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tab[r][width - 1].clone();
        }
    }
    LpOutcome::Optimal {
        value: obj[width - 1].clone(),
        x,
    }
}
