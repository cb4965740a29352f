use nalgebra::{DMatrix, DVector};

use crate::linalg::symmetrize_in_place;

/// Euclidean projection of `v` onto `{x : ||x||_1 <= radius}`.
///
/// Uses the expected linear-time pivoting scheme of Duchi et al.; a
/// nonpositive radius yields the zero vector.
pub fn l1_ball_project(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    let mut out = v.clone();
    l1_ball_project_slice(out.as_mut_slice(), radius);
    out
}

/// In-place version of [`l1_ball_project`] on a raw slice.
pub fn l1_ball_project_slice(v: &mut [f64], radius: f64) {
    if radius <= 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return;
    }
    let theta = simplex_threshold(v.iter().map(|x| x.abs()).collect(), radius);
    for x in v.iter_mut() {
        let a = x.abs() - theta;
        *x = if a > 0.0 { a * x.signum() } else { 0.0 };
    }
}

/// Threshold `theta` with `sum_i max(u_i - theta, 0) = z`, for `u >= 0`, `sum u > z > 0`.
fn simplex_threshold(mut u: Vec<f64>, z: f64) -> f64 {
    let mut lo = 0;
    let mut hi = u.len();
    let mut s = 0.0;
    let mut count = 0usize;
    while lo < hi {
        // Deterministic pivot: the middle of the working range.
        let pivot = u[lo + (hi - lo) / 2];
        // Partition [lo, hi) into [>= pivot | < pivot].
        let mut i = lo;
        let mut j = hi;
        while i < j {
            if u[i] >= pivot {
                i += 1;
            } else {
                j -= 1;
                u.swap(i, j);
            }
        }
        let greater = &u[lo..i];
        let ds: f64 = greater.iter().sum();
        let dc = greater.len();
        if (s + ds) - (count + dc) as f64 * pivot < z {
            s += ds;
            count += dc;
            lo = i;
        } else {
            // Drop one copy of the pivot from the greater block and recurse into it.
            let k = (lo..i).find(|&k| u[k] == pivot).expect("pivot lies in its block");
            u.swap(k, i - 1);
            hi = i - 1;
        }
    }
    (s - z) / count as f64
}

/// Projection of a symmetric matrix onto the elementwise l1 ball, treating its
/// `p^2` entries as one vector.
pub fn matrix_l1_ball_project(g: &DMatrix<f64>, radius: f64) -> DMatrix<f64> {
    let mut out = g.clone();
    l1_ball_project_slice(out.as_mut_slice(), radius);
    symmetrize_in_place(&mut out);
    out
}
