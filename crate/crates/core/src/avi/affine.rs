use super::dense::{lu_solve, DenseMatrix, LuFactorization};
use super::lcp::{lemke, LcpInstance};
use super::{AviSolution, AviStatus};
use crate::error::{Error, Result};
use crate::geqn::Bounds;

/// Pivot budget for an LCP of dimension `m`.
pub fn default_max_pivots(m: usize) -> usize {
    50 * m.max(1)
}

/// Natural-map residual `‖y − Π_B(y − (c + Jy))‖∞` of the affine problem.
pub fn affine_residual(j: &DenseMatrix, c: &[f64], bounds: &Bounds, y: &[f64]) -> f64 {
    let g = j.mul_vec(y);
    let shifted: Vec<f64> = y
        .iter()
        .zip(g.iter().zip(c))
        .map(|(y, (g, c))| y - (g + c))
        .collect();
    let p = bounds.clamp(&shifted);
    super::dense::dist_inf(y, &p)
}

fn subproblem(status: AviStatus, context: impl Into<String>) -> Error {
    Error::Subproblem {
        status,
        context: context.into(),
    }
}

/// Solves `0 ∈ c + Jy + N_B(y)` for `y`.
///
/// Free coordinates are eliminated through the Schur complement of the
/// free-free block of `J`. The remaining bounded coordinates are shifted onto
/// the nonnegative orthant (`z = y − l`, or `z = u − y` for upper bounds
/// only); two-sided bounds get an extra multiplier `ω ⊥ (u − l − z)`. The
/// resulting LCP goes to Lemke. `max_pivots = None` uses
/// [`default_max_pivots`] of the LCP dimension.
pub fn solve_affine_ge(
    j: &DenseMatrix,
    c: &[f64],
    bounds: &Bounds,
    max_pivots: Option<usize>,
) -> Result<AviSolution> {
    let n = j.rows();
    if !j.is_square() {
        return Err(Error::dim("affine subproblem: square J", n, j.cols()));
    }
    if c.len() != n {
        return Err(Error::dim("affine subproblem: c", n, c.len()));
    }
    if bounds.dim() != n {
        return Err(Error::dim("affine subproblem: box", n, bounds.dim()));
    }

    let free: Vec<usize> = (0..n).filter(|&i| bounds.is_free(i)).collect();
    let bnd: Vec<usize> = (0..n).filter(|&i| !bounds.is_free(i)).collect();

    if bnd.is_empty() {
        let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
        let y = lu_solve(j, &neg_c)
            .map_err(|e| subproblem(AviStatus::Singular, format!("linear step: {e}")))?;
        return Ok(finish(j, c, bounds, y, 0));
    }

    // y_F = a + D y_B
    let (a, d) = if free.is_empty() {
        (Vec::new(), DenseMatrix::zeros(0, bnd.len()))
    } else {
        let jff = j.select(&free, &free);
        let lu = LuFactorization::new(&jff)
            .map_err(|e| subproblem(AviStatus::Singular, format!("free-free block: {e}")))?;
        let neg_cf: Vec<f64> = free.iter().map(|&i| -c[i]).collect();
        let a = lu.solve(&neg_cf)?;
        let mut d = DenseMatrix::zeros(free.len(), bnd.len());
        for (col, &jb) in bnd.iter().enumerate() {
            let rhs: Vec<f64> = free.iter().map(|&i| -j[(i, jb)]).collect();
            for (row, v) in lu.solve(&rhs)?.into_iter().enumerate() {
                d[(row, col)] = v;
            }
        }
        (a, d)
    };

    // reduced map on the bounded block: ĉ + Ĵ y_B
    let nb = bnd.len();
    let jbf = j.select(&bnd, &free);
    let mut c_hat: Vec<f64> = bnd.iter().map(|&i| c[i]).collect();
    let mut j_hat = j.select(&bnd, &bnd);
    if !free.is_empty() {
        for (ci, v) in c_hat.iter_mut().zip(jbf.mul_vec(&a)) {
            *ci += v;
        }
        j_hat = {
            let corr = jbf.mul(&d);
            let mut s = j_hat;
            for r in 0..nb {
                for k in 0..nb {
                    s[(r, k)] += corr[(r, k)];
                }
            }
            s
        };
    }

    // y_B = o + S z
    let lo = bounds.lower();
    let up = bounds.upper();
    let sign: Vec<f64> = bnd
        .iter()
        .map(|&i| if lo[i].is_finite() { 1.0 } else { -1.0 })
        .collect();
    let origin: Vec<f64> = bnd
        .iter()
        .map(|&i| if lo[i].is_finite() { lo[i] } else { up[i] })
        .collect();
    let two_sided: Vec<usize> = (0..nb)
        .filter(|&k| lo[bnd[k]].is_finite() && up[bnd[k]].is_finite())
        .collect();

    let m_dim = nb + two_sided.len();
    let mut m = DenseMatrix::zeros(m_dim, m_dim);
    let mut q = vec![0.0; m_dim];
    let g0 = {
        let mut g = j_hat.mul_vec(&origin);
        for (gi, ci) in g.iter_mut().zip(&c_hat) {
            *gi += ci;
        }
        g
    };
    for r in 0..nb {
        q[r] = sign[r] * g0[r];
        for k in 0..nb {
            m[(r, k)] = sign[r] * j_hat[(r, k)] * sign[k];
        }
    }
    for (t, &k) in two_sided.iter().enumerate() {
        let i = bnd[k];
        m[(k, nb + t)] = 1.0;
        m[(nb + t, k)] = -1.0;
        q[nb + t] = up[i] - lo[i];
    }

    let lcp = LcpInstance::new(m, q)?;
    let budget = max_pivots.unwrap_or_else(|| default_max_pivots(m_dim));
    let sol = lemke(&lcp, budget);
    if sol.status != AviStatus::Solved {
        return Err(subproblem(
            sol.status,
            format!(
                "lemke on reduced LCP of dimension {m_dim} after {} pivots",
                sol.pivots
            ),
        ));
    }

    let y_b: Vec<f64> = (0..nb).map(|k| origin[k] + sign[k] * sol.y[k]).collect();
    let mut y = vec![0.0; n];
    for (k, &i) in bnd.iter().enumerate() {
        // clamp away rounding outside the box
        y[i] = y_b[k].max(lo[i]).min(up[i]);
    }
    if !free.is_empty() {
        let y_f = d.mul_vec(&y_b);
        for (r, &i) in free.iter().enumerate() {
            y[i] = a[r] + y_f[r];
        }
    }
    Ok(finish(j, c, bounds, y, sol.pivots))
}

fn finish(j: &DenseMatrix, c: &[f64], bounds: &Bounds, y: Vec<f64>, pivots: usize) -> AviSolution {
    let residual = affine_residual(j, c, bounds, &y);
    AviSolution {
        y,
        status: AviStatus::Solved,
        pivots,
        complementarity_residual: residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::item_rng;
    use rand::Rng;

    fn m(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn free_box_is_a_linear_solve() {
        let s = solve_affine_ge(&m(&[vec![3.0]]), &[-6.0], &Bounds::free(1), None).unwrap();
        assert_eq!(s.y, vec![2.0]);
        assert_eq!(s.pivots, 0);
    }

    #[test]
    fn orthant_interior_and_boundary() {
        let b = Bounds::nonnegative(1);
        let s = solve_affine_ge(&m(&[vec![1.0]]), &[-2.0], &b, None).unwrap();
        assert!((s.y[0] - 2.0).abs() < 1e-14);
        let s = solve_affine_ge(&m(&[vec![1.0]]), &[1.0], &b, None).unwrap();
        assert_eq!(s.y, vec![0.0]);
        assert!(s.complementarity_residual <= 1e-12);
    }

    #[test]
    fn upper_only_and_two_sided() {
        // y ≤ 1 with J = 1, c = -3: unconstrained root 3 is cut at 1
        let b = Bounds::new(vec![f64::NEG_INFINITY], vec![1.0]).unwrap();
        let s = solve_affine_ge(&m(&[vec![1.0]]), &[-3.0], &b, None).unwrap();
        assert!((s.y[0] - 1.0).abs() < 1e-14);

        let b = Bounds::new(vec![-1.0], vec![1.0]).unwrap();
        for (c, expect) in [(-3.0, 1.0), (3.0, -1.0), (0.5, -0.5)] {
            let s = solve_affine_ge(&m(&[vec![1.0]]), &[c], &b, None).unwrap();
            assert!((s.y[0] - expect).abs() < 1e-12, "c={c}: {:?}", s.y);
        }

        // fixed coordinate l = u
        let b = Bounds::new(vec![2.0], vec![2.0]).unwrap();
        let s = solve_affine_ge(&m(&[vec![1.0]]), &[5.0], &b, None).unwrap();
        assert_eq!(s.y, vec![2.0]);
    }

    #[test]
    fn singular_free_block_reported() {
        let j = m(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        let b = Bounds::new(
            vec![f64::NEG_INFINITY, 0.0],
            vec![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        match solve_affine_ge(&j, &[1.0, 1.0], &b, None) {
            Err(Error::Subproblem {
                status: AviStatus::Singular,
                context,
            }) => {
                assert!(context.contains("free-free"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_mixed_boxes_have_small_residual() {
        for s in 0..300 {
            let mut rng = item_rng(5, s);
            let n = rng.random_range(1..=6);
            // J = A Aᵀ + I is positive definite, so every reduced LCP is solvable
            let a: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let mut j = DenseMatrix::identity(n);
            for r in 0..n {
                for k in 0..n {
                    j[(r, k)] += (0..n).map(|t| a[r][t] * a[k][t]).sum::<f64>();
                }
            }
            // nonsymmetric skew part keeps the matrix monotone
            for r in 0..n {
                for k in r + 1..n {
                    let w = rng.random_range(-0.5..0.5);
                    j[(r, k)] += w;
                    j[(k, r)] -= w;
                }
            }
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for _ in 0..n {
                let l = rng.random_range(-1.0..0.5);
                let w = rng.random_range(0.0..1.5);
                match rng.random_range(0..5) {
                    0 => (lower.push(f64::NEG_INFINITY), upper.push(f64::INFINITY)),
                    1 => (lower.push(l), upper.push(f64::INFINITY)),
                    2 => (lower.push(f64::NEG_INFINITY), upper.push(l)),
                    3 => (lower.push(l), upper.push(l + w)),
                    _ => (lower.push(l), upper.push(l)),
                };
            }
            let b = Bounds::new(lower, upper).unwrap();
            let sol = solve_affine_ge(&j, &c, &b, None).unwrap();
            assert!(b.contains(&sol.y));
            assert!(
                sol.complementarity_residual <= 1e-8,
                "seed {s}: {}",
                sol.complementarity_residual
            );
            assert_eq!(
                sol.complementarity_residual,
                affine_residual(&j, &c, &b, &sol.y)
            );
        }
    }
}
