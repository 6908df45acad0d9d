//! Random instance generators and brute-force oracles shared by the
//! integration tests. Oracles use machine integers only, never the kernel.

#![allow(dead_code)]

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use subgrad::funcmodel::{AffinePiece, DCFunction, PAConvexFunction};
use subgrad::polykernel::{int, Polyhedron, Rational, RationalVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rv(xs: &[i64]) -> RationalVector {
    RationalVector::from_i64(xs)
}

pub fn rand_point(rng: &mut ChaCha8Rng, dim: usize, lo: i64, hi: i64) -> Vec<i64> {
    (0..dim).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i128> {
    a.iter().zip(b).map(|(x, y)| (*x - *y) as i128).collect()
}

fn dot(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn widen(v: &[i64]) -> Vec<i128> {
    v.iter().map(|x| *x as i128).collect()
}

/// Facets `n·x <= c` of the hull of integer points, found by trying every
/// hyperplane through `dim` of them. Requires a full-dimensional hull.
pub fn brute_facets(pts: &[Vec<i64>], dim: usize) -> Vec<(Vec<i128>, i128)> {
    let mut cands: Vec<Vec<i128>> = Vec::new();
    match dim {
        1 => {
            cands.push(vec![1]);
            cands.push(vec![-1]);
        }
        2 => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = sub(&pts[j], &pts[i]);
                    cands.push(vec![d[1], -d[0]]);
                }
            }
        }
        3 => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    for k in j + 1..pts.len() {
                        let a = sub(&pts[j], &pts[i]);
                        let b = sub(&pts[k], &pts[i]);
                        cands.push(vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]);
                    }
                }
            }
        }
        _ => panic!("brute force supports dim <= 3"),
    }
    let mut out = Vec::new();
    for n in cands {
        if n.iter().all(|x| *x == 0) {
            continue;
        }
        let vals: Vec<i128> = pts.iter().map(|p| dot(&n, &widen(p))).collect();
        let (lo, hi) = (*vals.iter().min().unwrap(), *vals.iter().max().unwrap());
        // A supporting hyperplane through dim points: all points on one side.
        let through = |c: i128| vals.iter().filter(|v| **v == c).count() >= dim.min(pts.len());
        if through(hi) {
            out.push((n.clone(), hi));
        }
        if through(lo) {
            out.push((n.iter().map(|x| -x).collect(), -lo));
        }
    }
    out
}

pub fn is_full_dim(pts: &[Vec<i64>], dim: usize) -> bool {
    let base = &pts[0];
    let diffs: Vec<Vec<i128>> = pts.iter().skip(1).map(|p| sub(p, base)).collect();
    match dim {
        1 => diffs.iter().any(|d| d[0] != 0),
        2 => diffs.iter().enumerate().any(|(i, a)| diffs[i + 1..].iter().any(|b| a[0] * b[1] - a[1] * b[0] != 0)),
        3 => {
            for i in 0..diffs.len() {
                for j in i + 1..diffs.len() {
                    for k in j + 1..diffs.len() {
                        let (a, b, c) = (&diffs[i], &diffs[j], &diffs[k]);
                        let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                            + a[2] * (b[0] * c[1] - b[1] * c[0]);
                        if det != 0 {
                            return true;
                        }
                    }
                }
            }
            false
        }
        _ => false,
    }
}

pub fn polytope(dim: usize, pts: &[Vec<i64>]) -> Polyhedron {
    Polyhedron::from_vrep(dim, pts.iter().map(|p| rv(p)).collect(), vec![]).unwrap()
}

/// Random full-dimensional integer polytope with at most `max_v` vertices.
pub fn rand_full_polytope(rng: &mut ChaCha8Rng, dim: usize, max_v: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    loop {
        let n = rng.gen_range(dim + 1..=max_v.max(dim + 1));
        let pts: Vec<Vec<i64>> = (0..n).map(|_| rand_point(rng, dim, lo, hi)).collect();
        if is_full_dim(&pts, dim) {
            return pts;
        }
    }
}

/// Halfspaces of `p` scaled to coprime integers.
pub fn integer_hrep(p: &Polyhedron) -> Vec<(Vec<i128>, i128)> {
    p.hrep()
        .unwrap()
        .iter()
        .map(|h| {
            let n = h.normalized();
            let to = |r: &Rational| r.numer().to_i128().expect("fits in i128");
            (n.normal.0.iter().map(to).collect(), to(&n.offset))
        })
        .collect()
}

pub fn satisfies(hrep: &[(Vec<i128>, i128)], x: &[i128], scale: i128) -> bool {
    hrep.iter().all(|(n, c)| dot(n, x) <= c * scale)
}

/// Random PA convex function whose pieces include several active at `x̄`.
pub fn rand_pa_at(rng: &mut ChaCha8Rng, dim: usize, max_pieces: usize, x_bar: &[i64]) -> PAConvexFunction {
    let n = rng.gen_range(1..=max_pieces);
    let active = rng.gen_range(1..=n);
    let pieces = (0..n)
        .map(|j| {
            let slope = rand_point(rng, dim, -3, 3);
            let at = slope.iter().zip(x_bar).map(|(a, b)| a * b).sum::<i64>();
            let drop = if j < active { 0 } else { rng.gen_range(1..=3) };
            AffinePiece::new(rv(&slope), int(-at - drop))
        })
        .collect();
    PAConvexFunction::unconstrained(pieces).unwrap()
}

pub fn rand_dc_at(rng: &mut ChaCha8Rng, dim: usize, x_bar: &[i64]) -> DCFunction {
    let g = rand_pa_at(rng, dim, 6, x_bar);
    let h = rand_pa_at(rng, dim, 4, x_bar);
    DCFunction::new(g, h).unwrap()
}

/// The same pieces as `f` on the box `[lo, hi]ⁿ`.
pub fn on_box(f: &PAConvexFunction, lo: i64, hi: i64) -> PAConvexFunction {
    let n = f.dim();
    let dom = Polyhedron::cube(&rv(&vec![lo; n]), &rv(&vec![hi; n])).unwrap();
    PAConvexFunction::new(f.pieces().to_vec(), dom).unwrap()
}

/// Exact `max_j <b_j, x> + c_j` in integers, for PA functions with integer
/// data.
pub fn pa_value_i(f: &PAConvexFunction, x: &[i64]) -> i128 {
    f.pieces()
        .iter()
        .map(|p| {
            let s: Vec<i128> = p.slope.0.iter().map(|r| r.to_integer().to_i128().unwrap()).collect();
            dot(&s, &widen(x)) + p.intercept.to_integer().to_i128().unwrap()
        })
        .max()
        .unwrap()
}
