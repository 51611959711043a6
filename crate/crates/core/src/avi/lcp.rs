//! Linear complementarity problems: find `z ≥ 0` with `w = Mz + q ≥ 0` and
//! `zᵀw = 0`.

use serde::{Deserialize, Serialize};

use super::dense::{lu_solve, DenseMatrix};
use super::{AviSolution, AviStatus};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Feasibility and complementarity tolerance for accepted solutions.
pub const LCP_TOL: f64 = 1e-9;

/// Enumeration refuses instances larger than this.
pub const ENUMERATION_MAX_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcpInstance {
    m: DenseMatrix,
    q: Vec<f64>,
}

impl LcpInstance {
    pub fn new(m: DenseMatrix, q: Vec<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim("lcp: square M", m.rows(), m.cols()));
        }
        if m.rows() != q.len() {
            return Err(Error::dim("lcp: q", m.rows(), q.len()));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("lcp: q has non-finite entries".into()));
        }
        Ok(LcpInstance { m, q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `w = Mz + q`.
    pub fn slack(&self, z: &[f64]) -> Vec<f64> {
        self.m
            .mul_vec(z)
            .into_iter()
            .zip(&self.q)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `max_i |min(z_i, w_i)|`: zero exactly at solutions.
    pub fn residual(&self, z: &[f64]) -> f64 {
        self.slack(z)
            .iter()
            .zip(z)
            .fold(0.0, |m, (w, z)| m.max(w.min(*z).abs()))
    }
}

/// Tableau `[ I | −M | −e | q ]` over the variables `w, z, z0`.
struct Tableau {
    n: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(lcp: &LcpInstance) -> Self {
        let n = lcp.dim();
        let width = 2 * n + 2;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            let row = &mut data[i * width..(i + 1) * width];
            row[i] = 1.0;
            for j in 0..n {
                row[n + j] = -lcp.m[(i, j)];
            }
            row[2 * n] = -1.0;
            row[2 * n + 1] = lcp.q[i];
        }
        Tableau {
            n,
            width,
            data,
            basis: (0..n).collect(),
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn z0(&self) -> usize {
        2 * self.n
    }

    fn complement(&self, var: usize) -> usize {
        if var < self.n {
            var + self.n
        } else {
            var - self.n
        }
    }

    /// Pivots `col` into the basis at `row`, returning the leaving variable.
    fn pivot(&mut self, row: usize, col: usize) -> usize {
        let w = self.width;
        let p = self.at(row, col);
        for j in 0..w {
            self.data[row * w + j] /= p;
        }
        for i in 0..self.n {
            if i == row {
                continue;
            }
            let f = self.at(i, col);
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.data[i * w + j] -= f * self.data[row * w + j];
            }
            self.data[i * w + col] = 0.0;
        }
        std::mem::replace(&mut self.basis[row], col)
    }

    /// Lexicographic minimum ratio test on column `col`. `Ok(None)` signals
    /// an unbounded ray.
    fn leaving_row(&self, col: usize) -> std::result::Result<Option<usize>, ()> {
        let colmax = (0..self.n).fold(0.0f64, |m, i| m.max(self.at(i, col).abs()));
        let piv_tol = 1e-12 * colmax.max(1.0);
        let mut rows: Vec<usize> = (0..self.n).filter(|&i| self.at(i, col) > piv_tol).collect();
        if rows.is_empty() {
            return Ok(None);
        }
        // key 0 is the right-hand side, keys 1..=n the columns of the initial
        // identity basis (the rows of B⁻¹)
        for key in 0..=self.n {
            let column = if key == 0 { self.width - 1 } else { key - 1 };
            let ratio = |i: usize| self.at(i, column) / self.at(i, col);
            let best = rows.iter().map(|&i| ratio(i)).fold(f64::INFINITY, f64::min);
            let tie = 1e-12 * best.abs().max(1.0);
            rows.retain(|&i| ratio(i) <= best + tie);
            if key == 0 {
                if let Some(&r) = rows.iter().find(|&&i| self.basis[i] == self.z0()) {
                    return Ok(Some(r));
                }
            }
            if rows.len() == 1 {
                return Ok(Some(rows[0]));
            }
        }
        Err(())
    }

    fn z_values(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        for (row, &var) in self.basis.iter().enumerate() {
            if (self.n..2 * self.n).contains(&var) {
                z[var - self.n] = self.rhs(row);
            }
        }
        z
    }
}

/// Lemke's complementary pivoting with covering vector `e = (1, …, 1)` and
/// lexicographic degeneracy resolution.
pub fn lemke(lcp: &LcpInstance, max_pivots: usize) -> AviSolution {
    let n = lcp.dim();
    let finish = |z: Vec<f64>, status: AviStatus, pivots: usize| {
        let complementarity_residual = lcp.residual(&z);
        AviSolution {
            y: z,
            status,
            pivots,
            complementarity_residual,
        }
    };

    if lcp.q.iter().all(|&q| q >= 0.0) {
        return finish(vec![0.0; n], AviStatus::Solved, 0);
    }

    let mut tab = Tableau::new(lcp);
    // z0 enters where q is most negative; ties go to the lowest index
    let row = (0..n).fold(0, |best, i| if lcp.q[i] < lcp.q[best] { i } else { best });
    let mut leaving = tab.pivot(row, tab.z0());
    let mut pivots = 1;

    loop {
        if pivots >= max_pivots {
            return finish(tab.z_values(), AviStatus::MaxPivots, pivots);
        }
        let entering = tab.complement(leaving);
        let row = match tab.leaving_row(entering) {
            Ok(Some(r)) => r,
            Ok(None) => return finish(tab.z_values(), AviStatus::RayTermination, pivots),
            Err(()) => return finish(tab.z_values(), AviStatus::Singular, pivots),
        };
        leaving = tab.pivot(row, entering);
        pivots += 1;
        if leaving == tab.z0() {
            break;
        }
    }

    let z = polish(lcp, tab.z_values());
    let residual = lcp.residual(&z);
    let feasible = z.iter().all(|&v| v >= -LCP_TOL) && lcp.slack(&z).iter().all(|&v| v >= -LCP_TOL);
    let status = if residual <= LCP_TOL && feasible {
        AviStatus::Solved
    } else {
        AviStatus::Singular
    };
    finish(z, status, pivots)
}

/// Re-solves the terminal complementary basis with LU, keeping whichever of
/// the tableau and refined solutions has the smaller residual.
fn polish(lcp: &LcpInstance, z: Vec<f64>) -> Vec<f64> {
    let active: Vec<usize> = (0..lcp.dim()).filter(|&i| z[i] > 0.0).collect();
    let refined = solve_basis(lcp, &active).map(|mut r| {
        for v in r.iter_mut().filter(|v| **v < 0.0 && **v > -1e-12) {
            *v = 0.0;
        }
        r
    });
    match refined {
        Some(r) if r.iter().all(|&v| v >= 0.0) && lcp.residual(&r) <= lcp.residual(&z) => r,
        _ => z
            .into_iter()
            .map(|v| if v < 0.0 && v > -1e-12 { 0.0 } else { v })
            .collect(),
    }
}

/// `z` with `z_α = −M_αα⁻¹ q_α` and zeros elsewhere, if `M_αα` is regular.
fn solve_basis(lcp: &LcpInstance, active: &[usize]) -> Option<Vec<f64>> {
    let mut z = vec![0.0; lcp.dim()];
    if active.is_empty() {
        return Some(z);
    }
    let block = lcp.m.select(active, active);
    let rhs: Vec<f64> = active.iter().map(|&i| -lcp.q[i]).collect();
    let sol = lu_solve(&block, &rhs).ok()?;
    for (&i, v) in active.iter().zip(sol) {
        z[i] = v;
    }
    Some(z)
}

/// Exhaustive oracle: tries all `2ⁿ` complementary index sets, keeps the
/// feasible ones and removes duplicates closer than `1e-8`.
pub fn lcp_enumerate(lcp: &LcpInstance) -> Result<Vec<Vec<f64>>> {
    lcp_enumerate_with(lcp, Execution::default())
}

pub fn lcp_enumerate_with(lcp: &LcpInstance, exec: Execution) -> Result<Vec<Vec<f64>>> {
    let n = lcp.dim();
    if n > ENUMERATION_MAX_DIM {
        return Err(Error::Guard(format!(
            "lcp enumeration limited to n <= {ENUMERATION_MAX_DIM}, got {n}"
        )));
    }
    let candidates = exec::map_indexed(1usize << n, exec, |mask| {
        let active: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let z = solve_basis(lcp, &active)?;
        let w = lcp.slack(&z);
        let ok = z.iter().chain(&w).all(|&v| v >= -LCP_TOL) && lcp.residual(&z) <= LCP_TOL;
        ok.then_some(z)
    });
    let mut out: Vec<Vec<f64>> = Vec::new();
    for z in candidates.into_iter().flatten() {
        if !out.iter().any(|s| super::dense::dist_inf(s, &z) <= 1e-8) {
            out.push(z);
        }
    }
    Ok(out)
}
