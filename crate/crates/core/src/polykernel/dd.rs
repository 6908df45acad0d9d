//! Double description (Motzkin) for polyhedral cones over the integers.
//!
//! Given rows `a_i`, computes a minimal generating system of
//! `{y : <a_i, y> <= 0 for all i}` as a set of lines (lineality basis) and
//! extreme rays. All vectors are kept primitive so entries stay small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type IVec = Vec<BigInt>;

#[derive(Clone, Debug, Default)]
pub struct ConeGenerators {
    pub lines: Vec<IVec>,
    pub rays: Vec<IVec>,
}

pub fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut acc = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn make_primitive(v: &mut IVec) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

struct Ray {
    v: IVec,
    // Indices of processed rows on which the ray is tight, kept sorted.
    zeros: Vec<usize>,
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut j = 0;
    for s in small {
        while j < big.len() && big[j] < *s {
            j += 1;
        }
        if j == big.len() || big[j] != *s {
            return false;
        }
        j += 1;
    }
    true
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Minimal generators of `{y in Z^dim : <row, y> <= 0}`.
pub fn cone_generators(rows: &[IVec], dim: usize, max_generators: usize) -> Result<ConeGenerators> {
    let mut lines: Vec<IVec> = (0..dim)
        .map(|i| (0..dim).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (idx, a) in rows.iter().enumerate() {
        if a.iter().all(Zero::is_zero) {
            for r in rays.iter_mut() {
                r.zeros.push(idx);
            }
            continue;
        }
        if let Some(p) = lines.iter().position(|l| !idot(a, l).is_zero()) {
            let pivot = lines.swap_remove(p);
            let ap = idot(a, &pivot);
            // l <- ap*l - al*pivot keeps integrality and zeroes <a, l>.
            for l in lines.iter_mut() {
                let al = idot(a, l);
                if !al.is_zero() {
                    for (x, q) in l.iter_mut().zip(&pivot) {
                        *x = &ap * &*x - &al * q;
                    }
                    make_primitive(l);
                }
            }
            let sign_ap = if ap.is_positive() { BigInt::from(1) } else { BigInt::from(-1) };
            for r in rays.iter_mut() {
                let ar = idot(a, &r.v);
                if !ar.is_zero() {
                    // Scale by |ap| so the ray direction is preserved.
                    let abs_ap = ap.abs();
                    for (x, q) in r.v.iter_mut().zip(&pivot) {
                        *x = &abs_ap * &*x - &sign_ap * &ar * q;
                    }
                    make_primitive(&mut r.v);
                }
                r.zeros.push(idx);
            }
            let mut new_ray: IVec = pivot.iter().map(|x| -(&sign_ap) * x).collect();
            make_primitive(&mut new_ray);
            // A former line is tight on every processed row except this one.
            let zeros: Vec<usize> = (0..idx).collect();
            rays.push(Ray { v: new_ray, zeros });
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| idot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        if pos.is_empty() {
            for (r, v) in rays.iter_mut().zip(&vals) {
                if v.is_zero() {
                    r.zeros.push(idx);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let pointed_dim = dim - lines.len();
        let mut created: Vec<Ray> = Vec::new();
        for &ip in &pos {
            for &in_ in &neg {
                let common = intersect_sorted(&rays[ip].zeros, &rays[in_].zeros);
                if pointed_dim >= 2 && common.len() + 2 < pointed_dim {
                    continue;
                }
                let adjacent = !rays.iter().enumerate().any(|(k, r)| {
                    k != ip && k != in_ && is_subset(&common, &r.zeros)
                });
                if !adjacent {
                    continue;
                }
                let cp = &vals[ip];
                let cn = -&vals[in_];
                let mut v: IVec = rays[in_]
                    .v
                    .iter()
                    .zip(&rays[ip].v)
                    .map(|(n, p)| cp * n + &cn * p)
                    .collect();
                make_primitive(&mut v);
                let mut zeros = common;
                zeros.push(idx);
                created.push(Ray { v, zeros });
                if rays.len() + created.len() > max_generators {
                    return Err(Error::CapExceeded { what: "generator count", limit: max_generators });
                }
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() - pos.len() + created.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_positive() {
                continue;
            }
            if vals[i].is_zero() {
                r.zeros.push(idx);
            }
            next.push(r);
        }
        next.extend(created);
        rays = next;
    }

    for l in lines.iter_mut() {
        make_primitive(l);
    }
    Ok(ConeGenerators { lines, rays: rays.into_iter().map(|r| r.v).collect() })
}
