//! Dense tableau simplex for `max c'x  s.t.  Ax <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible whenever `b >= 0`, which covers every LP the
//! auction baselines need, so there is no phase one. Bland's rule picks
//! both the entering and the leaving variable, which rules out cycling.

const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Unbounded,
}

/// Solve `max c'x s.t. a x <= b, x >= 0`. `a` is row-major, one row per
/// constraint. Panics if a right-hand side is negative or shapes disagree.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = b.len();
    assert_eq!(
        a.len(),
        m,
        "constraint matrix has {} rows, rhs has {m}",
        a.len()
    );
    assert!(b.iter().all(|&v| v >= 0.0), "slack basis needs b >= 0");

    let width = n + m + 1;
    let mut tab = vec![0.0; (m + 1) * width];
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n);
        tab[i * width..i * width + n].copy_from_slice(row);
        tab[i * width + n + i] = 1.0;
        tab[i * width + width - 1] = b[i];
    }
    // Objective row holds reduced costs c_j - z_j; last cell is -objective.
    let obj = m * width;
    tab[obj..obj + n].copy_from_slice(c);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0;
    while let Some(enter) = (0..n + m).find(|&j| tab[obj + j] > PIVOT_TOL) {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = tab[i * width + enter];
            if coef > PIVOT_TOL {
                let ratio = tab[i * width + width - 1] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && basis[i] < basis[r])
                        {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        pivot(&mut tab, width, m, row, enter);
        basis[row] = enter;
        pivots += 1;
    }

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tab[i * width + width - 1].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal(LpSolution {
        objective,
        x,
        pivots,
    })
}

fn pivot(tab: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = tab[row * width + col];
    for v in &mut tab[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = tab[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let factor = tab[i * width + col];
        if factor != 0.0 {
            for (v, pr) in tab[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= factor * pr;
            }
            tab[i * width + col] = 0.0;
        }
    }
}
