//! Orientation predicates with a floating-point filter, an exact big-integer
//! fallback, and symbolic perturbation for degenerate inputs.
//!
//! The orientation of `k = D + 1` points in `R^D` is the sign of
//!
//! ```text
//! | p0_0  ...  p0_{D-1}  1 |
//! |  ...                   |
//! | pD_0  ...  pD_{D-1}  1 |
//! ```
//!
//! [`orient`] returns the exact sign for the given floating-point inputs.
//! [`orient_sos`] never returns zero: coordinate `c` of the point with global
//! identifier `id` is perturbed by `eps^(2^key)` with `key = id * stride + c`,
//! and the sign of the first non-vanishing coefficient of the perturbed
//! determinant is reported. Any family of predicates evaluated with the same
//! identifiers and stride is therefore consistent with one generic
//! configuration.

use num_bigint::BigInt;
use num_traits::{float::FloatCore, Signed, Zero};
use std::cmp::Ordering;

/// Largest supported matrix order (points in up to 7 dimensions).
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }
}

type Matrix = [[f64; MAX_ORDER]; MAX_ORDER];

/// Exact sign of `det` of the `k x k` matrix in `m` restricted to `rows` x `cols`.
///
/// The float evaluation is a Laplace expansion memoised over column subsets;
/// its error is bounded by `2 k^2 u` times the permanent of absolute values.
fn det_sign(m: &Matrix, rows: &[usize], cols: &[usize]) -> Sign {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    if k == 0 {
        return Sign::Positive;
    }
    let (det, perm) = laplace(m, rows, cols);
    let bound = perm * (2 * k * k) as f64 * f64::EPSILON;
    if det.abs() > bound && perm > 1e-280 && perm.is_finite() {
        return Sign::of(det);
    }
    if perm == 0.0 {
        return Sign::Zero;
    }
    exact_det_sign(m, rows, cols)
}

fn laplace(m: &Matrix, rows: &[usize], cols: &[usize]) -> (f64, f64) {
    let k = rows.len();
    let full = 1usize << k;
    // dp[mask] = (det, permanent) of the bottom |mask| rows restricted to
    // the columns in `mask`.
    let mut det = vec![0.0f64; full];
    let mut perm = vec![0.0f64; full];
    det[0] = 1.0;
    perm[0] = 1.0;
    for mask in 1..full {
        let size = mask.count_ones() as usize;
        let row = rows[k - size];
        let mut d = 0.0;
        let mut p = 0.0;
        let mut position = 0;
        for c in 0..k {
            if mask & (1 << c) == 0 {
                continue;
            }
            let a = m[row][cols[c]];
            let rest = mask & !(1 << c);
            let term = a * det[rest];
            if position % 2 == 0 {
                d += term;
            } else {
                d -= term;
            }
            p += a.abs() * perm[rest];
            position += 1;
        }
        det[mask] = d;
        perm[mask] = p;
    }
    (det[full - 1], perm[full - 1])
}

fn exact_det_sign(m: &Matrix, rows: &[usize], cols: &[usize]) -> Sign {
    let k = rows.len();
    let mut min_exp = i32::MAX;
    let decoded: Vec<Vec<(u64, i32, i8)>> = rows
        .iter()
        .map(|&r| {
            cols.iter()
                .map(|&c| {
                    let (mant, exp, sign) = m[r][c].integer_decode();
                    if mant != 0 {
                        min_exp = min_exp.min(exp as i32);
                    }
                    (mant, exp as i32, sign)
                })
                .collect()
        })
        .collect();
    let mut a: Vec<Vec<BigInt>> = decoded
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(mant, exp, sign)| {
                    if mant == 0 {
                        BigInt::zero()
                    } else {
                        let v = BigInt::from(mant) << ((exp - min_exp) as usize);
                        if sign < 0 {
                            -v
                        } else {
                            v
                        }
                    }
                })
                .collect()
        })
        .collect();

    // Bareiss fraction-free elimination.
    let mut negate = false;
    let mut prev = BigInt::from(1);
    for i in 0..k {
        if a[i][i].is_zero() {
            match (i + 1..k).find(|&r| !a[r][i].is_zero()) {
                Some(r) => {
                    a.swap(i, r);
                    negate = !negate;
                }
                None => return Sign::Zero,
            }
        }
        for r in (i + 1)..k {
            for c in (i + 1)..k {
                let v = (&a[r][c] * &a[i][i] - &a[r][i] * &a[i][c]) / &prev;
                a[r][c] = v;
            }
            a[r][i] = BigInt::zero();
        }
        prev = a[i][i].clone();
    }
    let s = if a[k - 1][k - 1].is_positive() {
        Sign::Positive
    } else if a[k - 1][k - 1].is_negative() {
        Sign::Negative
    } else {
        Sign::Zero
    };
    if negate {
        s.flip()
    } else {
        s
    }
}

fn homogeneous(points: &[&[f64]]) -> (Matrix, usize) {
    let k = points.len();
    assert!(k <= MAX_ORDER, "orientation of {k} points exceeds the supported order");
    let mut m = [[0.0; MAX_ORDER]; MAX_ORDER];
    for (r, p) in points.iter().enumerate() {
        assert_eq!(p.len() + 1, k, "orientation needs D + 1 points in R^D");
        m[r][..p.len()].copy_from_slice(p);
        m[r][k - 1] = 1.0;
    }
    (m, k)
}

/// Exact orientation sign of `D + 1` points in `R^D`.
pub fn orient(points: &[&[f64]]) -> Sign {
    let (m, k) = homogeneous(points);
    let idx: Vec<usize> = (0..k).collect();
    det_sign(&m, &idx, &idx)
}

/// Orientation under symbolic perturbation; never [`Sign::Zero`] for distinct ids.
///
/// `ids` are global point identifiers and `stride` must exceed the largest
/// coordinate count used with the same identifiers.
pub fn orient_sos(points: &[&[f64]], ids: &[usize], stride: usize) -> Sign {
    let (m, k) = homogeneous(points);
    assert_eq!(ids.len(), k);
    let all: Vec<usize> = (0..k).collect();
    let s = det_sign(&m, &all, &all);
    if s != Sign::Zero {
        return s;
    }
    let d = k - 1;
    assert!(d < stride);

    // perturbable entries sorted by key: smaller key = larger perturbation
    let mut entries: Vec<(usize, usize, usize)> = Vec::with_capacity(k * d);
    for r in 0..k {
        for c in 0..d {
            entries.push((ids[r] * stride + c, r, c));
        }
    }
    entries.sort_unstable();
    let e = entries.len();
    assert!(e < 64);

    // Monomials ordered by increasing exponent = increasing subset bitmask.
    for mask in 1u64..(1u64 << e) {
        let mut row_used = 0usize;
        let mut col_used = 0usize;
        let mut ok = true;
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for (bit, &(_, r, c)) in entries.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                if row_used & (1 << r) != 0 || col_used & (1 << c) != 0 {
                    ok = false;
                    break;
                }
                row_used |= 1 << r;
                col_used |= 1 << c;
                chosen.push((r, c));
            }
        }
        if !ok {
            continue;
        }
        let rows: Vec<usize> = (0..k).filter(|r| row_used & (1 << r) == 0).collect();
        let cols: Vec<usize> = (0..k).filter(|c| col_used & (1 << c) == 0).collect();
        let minor = det_sign(&m, &rows, &cols);
        if minor == Sign::Zero {
            continue;
        }
        // sign of the epsilon block: (-1)^(sum r + sum c) times the parity
        // of the matching between sorted rows and sorted columns
        chosen.sort_unstable();
        let mut parity = chosen.iter().map(|&(r, c)| r + c).sum::<usize>() % 2;
        for i in 0..chosen.len() {
            for j in (i + 1)..chosen.len() {
                if chosen[i].1 > chosen[j].1 {
                    parity ^= 1;
                }
            }
        }
        return if parity == 0 { minor } else { minor.flip() };
    }
    unreachable!("a full matching always has a nonzero (unit) cofactor")
}

/// Exact lexicographic comparison helper used for sorting points.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Exact affine rank test: true iff the points span an affine space of dimension `dim`.
pub fn affinely_spanning(points: &[Vec<f64>], dim: usize) -> bool {
    if points.len() < dim + 1 {
        return false;
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut r = p.clone();
            r.push(1.0);
            r
        })
        .collect();
    exact_rank(&rows) == dim + 1
}

/// Exact rank of a small-width matrix with float entries.
fn exact_rank(rows: &[Vec<f64>]) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    let mut min_exp = i32::MAX;
    for r in rows {
        for &v in r {
            let (mant, exp, _) = v.integer_decode();
            if mant != 0 {
                min_exp = min_exp.min(exp as i32);
            }
        }
    }
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for r in rows {
        let mut v: Vec<BigInt> = r
            .iter()
            .map(|&x| {
                let (mant, exp, sign) = x.integer_decode();
                if mant == 0 {
                    BigInt::zero()
                } else {
                    let b = BigInt::from(mant) << ((exp as i32 - min_exp) as usize);
                    if sign < 0 {
                        -b
                    } else {
                        b
                    }
                }
            })
            .collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                let g = b[p].clone();
                for c in 0..width {
                    v[c] = &v[c] * &g - &b[c] * &f;
                }
            }
        }
        if let Some(p) = (0..width).find(|&c| !v[c].is_zero()) {
            basis.push(v);
            pivots.push(p);
            if basis.len() == width {
                break;
            }
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(pts: &[&[f64]]) -> Sign {
        orient(pts)
    }

    #[test]
    fn orient2d_basic() {
        assert_eq!(o(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), Sign::Positive);
        assert_eq!(o(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]), Sign::Negative);
        assert_eq!(o(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]), Sign::Zero);
    }

    #[test]
    fn orient_exact_near_degenerate() {
        // classic near-collinear case where naive evaluation is unreliable
        let a = [0.5, 0.5];
        let b = [12.0, 12.0];
        let c = [24.0, 24.0];
        assert_eq!(o(&[&a, &b, &c]), Sign::Zero);
        let nudged = [0.5 + f64::EPSILON / 2.0, 0.5];
        // (0.5+e, 0.5), (12,12), (24,24): det = e*(12-24)... negative direction
        let s = o(&[&nudged, &b, &c]);
        let expect = {
            // exact: (b-a) x (c-a) with a = (0.5 + e, 0.5)
            // = (11.5 - e)(23.5) - (11.5)(23.5 - e) = e*(11.5 - 23.5) < 0
            Sign::Negative
        };
        assert_eq!(s, expect);
    }

    #[test]
    fn orient3d_matches_volume() {
        let pts: [&[f64]; 4] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]];
        // det with ones column of the standard simplex is -1 in this row order
        assert_eq!(o(&pts), Sign::Negative);
        let swapped: [&[f64]; 4] = [pts[1], pts[0], pts[2], pts[3]];
        assert_eq!(o(&swapped), Sign::Positive);
        let flat: [&[f64]; 4] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0]];
        assert_eq!(o(&flat), Sign::Zero);
    }

    #[test]
    fn exact_fallback_agrees_with_filter_on_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let pts: Vec<Vec<f64>> = (0..4).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let (m, k) = homogeneous(&refs);
            let idx: Vec<usize> = (0..k).collect();
            assert_eq!(det_sign(&m, &idx, &idx), exact_det_sign(&m, &idx, &idx));
        }
    }

    #[test]
    fn sos_breaks_ties_consistently() {
        let a = [0.0, 0.0];
        let b = [1.0, 1.0];
        let c = [2.0, 2.0];
        let s = orient_sos(&[&a, &b, &c], &[0, 1, 2], 3);
        assert_ne!(s, Sign::Zero);
        // swapping two rows flips the sign
        assert_eq!(orient_sos(&[&b, &a, &c], &[1, 0, 2], 3), s.flip());
        // cyclic rotation keeps it
        assert_eq!(orient_sos(&[&b, &c, &a], &[1, 2, 0], 3), s);
        // identical points are still separated
        assert_ne!(orient_sos(&[&a, &a, &c], &[0, 5, 2], 3), Sign::Zero);
    }

    #[test]
    fn sos_cocircular_lifted() {
        // unit square corners lifted to the paraboloid are coplanar
        let pts: Vec<[f64; 3]> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|p| [p[0], p[1], p[0] * p[0] + p[1] * p[1]])
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(orient(&refs), Sign::Zero);
        assert_ne!(orient_sos(&refs, &[0, 1, 2, 3], 4), Sign::Zero);
    }

    #[test]
    fn rank() {
        let col = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![3.0, 3.0]];
        assert!(!affinely_spanning(&col, 2));
        let tri = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![3.0, 3.0 + 1e-15]];
        assert!(affinely_spanning(&tri, 2));
        assert!(!affinely_spanning(&tri[..2], 2));
    }
}
