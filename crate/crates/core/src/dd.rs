//! Double description method for pointed polyhedral cones over the integers,
//! and vertex enumeration of bounded polytopes `{x : E x = e, x ≥ 0}` on top of it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{rref, solve_affine};
use crate::rational::{common_denominator, Rat};

#[derive(Clone, Debug)]
struct Ray {
    coords: Vec<BigInt>,
    zeros: Vec<u64>,
}

fn bit_set(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn popcount_and(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

fn contains(sup: &[u64], sub: &[u64]) -> bool {
    sup.iter().zip(sub).all(|(s, t)| t & !s == 0)
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

/// Integer row proportional to a rational row.
pub fn integer_row(row: &[Rat]) -> Vec<BigInt> {
    let l = common_denominator(row);
    primitive(row.iter().map(|r| r.numer() * (&l / r.denom())).collect())
}

/// Extreme rays of `{z ∈ R^dim : a · z ≥ 0 for every row a}`.
///
/// The cone must be pointed, i.e. the rows must span `R^dim`. Rows are inserted
/// in index order after an initial basis chosen greedily in index order.
pub fn extreme_rays(rows: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let words = rows.len().div_ceil(64).max(1);
    let as_rat = |r: &Vec<BigInt>| r.iter().map(|x| Rat::from(x.clone())).collect::<Vec<_>>();

    // Greedy basis.
    let mut basis: Vec<usize> = Vec::new();
    let mut echelon: Vec<Vec<Rat>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if basis.len() == dim {
            break;
        }
        let mut trial = echelon.clone();
        trial.push(as_rat(r));
        let (reduced, pivots) = rref(trial, dim);
        if pivots.len() > echelon.len() {
            echelon = reduced;
            basis.push(i);
        }
    }
    assert_eq!(basis.len(), dim, "cone is not pointed");

    // Rays of the simplicial cone: columns of the inverse basis matrix.
    let mut rays: Vec<Ray> = Vec::with_capacity(dim);
    for k in 0..dim {
        let a: Vec<Vec<Rat>> = basis.iter().map(|&i| as_rat(&rows[i])).collect();
        let rhs: Vec<Rat> = (0..dim).map(|i| if i == k { Rat::one() } else { Rat::zero() }).collect();
        let (sol, _) = solve_affine(&a, &rhs, dim).expect("basis is invertible");
        let mut zeros = vec![0u64; words];
        for (pos, &i) in basis.iter().enumerate() {
            if pos != k {
                bit_set(&mut zeros, i);
            }
        }
        rays.push(Ray { coords: integer_row(&sol), zeros });
    }

    let mut in_basis = vec![false; rows.len()];
    for &i in &basis {
        in_basis[i] = true;
    }
    for (i, a) in rows.iter().enumerate() {
        if in_basis[i] {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.coords)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
        if neg.is_empty() {
            for (k, v) in values.iter().enumerate() {
                if v.is_zero() {
                    bit_set(&mut rays[k].zeros, i);
                }
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[n].zeros).map(|(x, y)| x & y).collect();
                if popcount_and(&common, &common) + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == n || !contains(&r.zeros, &common));
                if !adjacent {
                    continue;
                }
                let coords: Vec<BigInt> = rays[n]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(zn, zp)| &values[p] * zn - &values[n] * zp)
                    .collect();
                let mut zeros = common;
                bit_set(&mut zeros, i);
                next.push(Ray { coords: primitive(coords), zeros });
            }
        }
        for (k, mut r) in rays.into_iter().enumerate() {
            if values[k].is_negative() {
                continue;
            }
            if values[k].is_zero() {
                bit_set(&mut r.zeros, i);
            }
            next.push(r);
        }
        rays = next;
    }
    let mut out: Vec<Vec<BigInt>> = rays.into_iter().map(|r| r.coords).collect();
    out.sort();
    out.dedup();
    out
}

/// Vertices of the bounded polytope `{x ∈ R^n : E x = e, x ≥ 0}`, sorted.
pub fn polytope_vertices(e_rows: &[Vec<Rat>], e_rhs: &[Rat], n: usize) -> Vec<Vec<Rat>> {
    let Some((x0, kernel)) = solve_affine(e_rows, e_rhs, n) else {
        return Vec::new();
    };
    let d = kernel.len();
    // Homogenized constraints on (t, s): s·x0_i + (K t)_i ≥ 0 and s ≥ 0.
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut r: Vec<Rat> = kernel.iter().map(|v| v[i].clone()).collect();
        r.push(x0[i].clone());
        if r.iter().all(Rat::is_zero) {
            continue;
        }
        rows.push(integer_row(&r));
    }
    let mut s_row = vec![BigInt::zero(); d + 1];
    s_row[d] = BigInt::one();
    rows.push(s_row);

    let mut vertices: Vec<Vec<Rat>> = Vec::new();
    for ray in extreme_rays(&rows, d + 1) {
        // Rays with s = 0 are recession directions; they only occur when the
        // polytope is empty, since x ≥ 0 together with E x = e bounds it here.
        if !ray[d].is_positive() {
            continue;
        }
        let s = Rat::from(ray[d].clone());
        let t: Vec<Rat> = ray[..d].iter().map(|v| Rat::from(v.clone()) / &s).collect();
        let x: Vec<Rat> = (0..n)
            .map(|i| {
                let mut v = x0[i].clone();
                for (k, tk) in t.iter().enumerate() {
                    if !tk.is_zero() && !kernel[k][i].is_zero() {
                        v += tk * &kernel[k][i];
                    }
                }
                v
            })
            .collect();
        vertices.push(x);
    }
    vertices.sort();
    vertices.dedup();
    vertices
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn simplex_vertices() {
        // x1 + x2 + x3 = 1
        let v = polytope_vertices(&[vec![r(1), r(1), r(1)]], &[r(1)], 3);
        assert_eq!(v.len(), 3);
        assert!(v.contains(&vec![r(0), r(0), r(1)]));
    }

    #[test]
    fn square_vertices() {
        // x + u = 1, y + w = 1: the unit square in (x, y)
        let rows = vec![vec![r(1), r(0), r(1), r(0)], vec![r(0), r(1), r(0), r(1)]];
        let v = polytope_vertices(&rows, &[r(1), r(1)], 4);
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn single_point() {
        let rows = vec![vec![r(1), r(0)], vec![r(0), r(1)]];
        let v = polytope_vertices(&rows, &[r(2), r(3)], 2);
        assert_eq!(v, vec![vec![r(2), r(3)]]);
        assert!(polytope_vertices(&rows, &[r(-1), r(3)], 2).is_empty());
    }

    #[test]
    fn octahedral_cone() {
        // Cone over a square: rays (±1, ±1, 1) cut out by 4 facets.
        let rows: Vec<Vec<BigInt>> = [[1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let rays = extreme_rays(&rows, 3);
        assert_eq!(rays.len(), 4);
        for ray in rays {
            assert!(ray.iter().all(|x| x.abs() == BigInt::one()));
        }
    }
}
