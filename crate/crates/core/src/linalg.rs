//! Exact Gaussian elimination over the rationals.

use crate::rational::Rat;

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(mut rows: Vec<Vec<Rat>>, cols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut().skip(c) {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        let support: Vec<usize> = (c..cols).filter(|&k| !pivot_row[k].is_zero()).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &k in &support {
                let delta = &f * &pivot_row[k];
                row[k] -= &delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(rows: &[Vec<Rat>], cols: usize) -> usize {
    rref(rows.to_vec(), cols).1.len()
}

/// Basis of `{x : A x = 0}`, one vector per free column.
pub fn nullspace(rows: &[Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    let (reduced, pivots) = rref(rows.to_vec(), cols);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (row, &p) in reduced.iter().zip(&pivots) {
                v[p] = -&row[f];
            }
            v
        })
        .collect()
}

/// Affine solution set of `A x = b`: a particular solution and a nullspace basis,
/// or `None` when inconsistent.
pub fn solve_affine(a: &[Vec<Rat>], b: &[Rat], cols: usize) -> Option<(Vec<Rat>, Vec<Vec<Rat>>)> {
    let augmented: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let (reduced, pivots) = rref(augmented, cols + 1);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (row, &p) in reduced.iter().zip(&pivots) {
        x[p] = row[cols].clone();
    }
    Some((x, nullspace(a, cols)))
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::from_int(x)).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let a = vec![r(&[1, 2, 3]), r(&[2, 4, 6]), r(&[1, 0, 1])];
        assert_eq!(rank(&a, 3), 2);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            assert!(dot(row, &ns[0]).is_zero());
        }
        assert_eq!(rank(&[], 4), 0);
        assert_eq!(nullspace(&[], 2).len(), 2);
    }

    #[test]
    fn affine_solutions() {
        let a = vec![r(&[1, 1]), r(&[1, -1])];
        let (x, ns) = solve_affine(&a, &r(&[3, 1]), 2).unwrap();
        assert_eq!(x, r(&[2, 1]));
        assert!(ns.is_empty());
        let a = vec![r(&[1, 1]), r(&[2, 2])];
        assert!(solve_affine(&a, &r(&[1, 3]), 2).is_none());
        let (x, ns) = solve_affine(&a, &r(&[1, 2]), 2).unwrap();
        assert_eq!(ns.len(), 1);
        assert_eq!(dot(&a[0], &x), Rat::one());
    }
}
