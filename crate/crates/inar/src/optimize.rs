//! Derivative-free minimization and numeric second derivatives.
//!
//! A compact Nelder–Mead with the standard reflection/expansion/contraction/
//! shrink coefficients is all the likelihood surfaces here need (2-3 smooth
//! parameters after transformation). Objectives may return `NaN` or
//! `+inf` outside their domain; such points are ordered worst, so the simplex
//! retreats from invalid regions on its own.

/// Nelder–Mead controls.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Absolute coordinate offset used to build the initial simplex.
    pub initial_step: f64,
    /// Converged when max-min objective value over the simplex falls below this.
    pub f_tolerance: f64,
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { initial_step: 0.1, f_tolerance: 1e-10, max_evals: 10_000 }
    }
}

/// Minimization outcome.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

fn order_value(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Minimize `f` starting from `x0`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n >= 1, "nelder_mead needs at least one coordinate");
    let mut evals = 0_usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        order_value(f(x))
    };

    // Initial simplex: x0 and x0 offset along each axis.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread < opts.f_tolerance {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (v, _) in simplex.iter().take(n) {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi / n as f64;
            }
        }

        let worst = simplex[n].clone();
        let reflect: Vec<f64> =
            centroid.iter().zip(&worst.0).map(|(c, w)| c + alpha * (c - w)).collect();
        let f_r = eval(&reflect, &mut evals);

        if f_r < simplex[0].1 {
            // Try to expand past the reflected point.
            let expand: Vec<f64> =
                centroid.iter().zip(&reflect).map(|(c, r)| c + gamma * (r - c)).collect();
            let f_e = eval(&expand, &mut evals);
            simplex[n] = if f_e < f_r { (expand, f_e) } else { (reflect, f_r) };
        } else if f_r < simplex[n - 1].1 {
            simplex[n] = (reflect, f_r);
        } else {
            // Contract toward the better of the worst/reflected points.
            let (base, f_base) =
                if f_r < worst.1 { (&reflect, f_r) } else { (&worst.0, worst.1) };
            let contract: Vec<f64> =
                centroid.iter().zip(base).map(|(c, b)| c + rho * (b - c)).collect();
            let f_c = eval(&contract, &mut evals);
            if f_c < f_base {
                simplex[n] = (contract, f_c);
            } else {
                // Shrink everything toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> =
                        best.iter().zip(&entry.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let fv = eval(&v, &mut evals);
                    *entry = (v, fv);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadResult { x, fx, evals, converged }
}

/// Central-difference Hessian of `f` at `x` with per-coordinate steps.
///
/// `H[i][j] = d^2 f / dx_i dx_j`; entries involving invalid evaluations come
/// back as `NaN` so callers can detect an unusable curvature estimate.
pub fn central_hessian<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    steps: &[f64],
) -> Vec<Vec<f64>> {
    let n = x.len();
    assert_eq!(steps.len(), n);
    let f0 = f(x);
    let mut h = vec![vec![0.0; n]; n];
    let shifted = |di: usize, si: f64, dj: usize, sj: f64, f: &mut F| -> f64 {
        let mut v = x.to_vec();
        v[di] += si;
        v[dj] += sj;
        f(&v)
    };
    for i in 0..n {
        let hi = steps[i];
        let fp = shifted(i, hi, i, 0.0, &mut f);
        let fm = shifted(i, -hi, i, 0.0, &mut f);
        h[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..n {
            let hj = steps[j];
            let fpp = shifted(i, hi, j, hj, &mut f);
            let fpm = shifted(i, hi, j, -hj, &mut f);
            let fmp = shifted(i, -hi, j, hj, &mut f);
            let fmm = shifted(i, -hi, j, -hj, &mut f);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

/// Invert a small dense matrix by Gauss-Jordan elimination with partial
/// pivoting. Returns `None` when a pivot degenerates (singular or non-finite).
pub fn invert_small(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "invert_small needs a square matrix");
            row.clone()
        })
        .collect();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        let pivot = a[pivot_row][col];
        if !pivot.is_finite() || pivot.abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let scale = 1.0 / pivot;
        for v in a[col].iter_mut() {
            *v *= scale;
        }
        for v in inv[col].iter_mut() {
            *v *= scale;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..n {
                a[row][k] -= factor * a[col][k];
                inv[row][k] -= factor * inv[col][k];
            }
        }
    }
    if inv.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    Some(inv)
}

/// `a * b` for small dense matrices.
pub(crate) fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            out[i][j] = (0..k).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    out
}
