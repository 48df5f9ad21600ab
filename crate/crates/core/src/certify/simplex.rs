//! Dense two-phase primal simplex for box-bounded LPs.
//!
//! Sized for desk-scale problems (up to a few thousand variables): the
//! vertex-cover relaxation cross-check and the budgeted-exchange relaxations
//! over `F = {(pi, l) in [0,1]^n x [0,1]^m : w'pi <= b, A'pi >= l}`.
//! Dantzig pricing with an automatic switch to Bland's rule on stalls.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpConstraint {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// `maximize objective . x` subject to the constraints and finite bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
    /// Per-variable `[lo, hi]`, all finite.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, 1.0); n],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(LpConstraint { coeffs, cmp, rhs });
    }

    /// Largest violation of constraints and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match c.cmp {
                Cmp::Le => lhs - c.rhs,
                Cmp::Ge => c.rhs - lhs,
                Cmp::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub status: LpStatus,
}

const TOL: f64 = 1e-9;

struct Tableau {
    a: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    obj: f64,
    /// columns that may never enter the basis (artificials in phase 2)
    banned: Vec<bool>,
    bland: bool,
    stall: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        let inv = 1.0 / piv;
        for v in self.a[row].iter_mut() {
            *v *= inv;
        }
        self.rhs[row] *= inv;
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor.abs() <= 1e-13 {
                continue;
            }
            for j in 0..self.a[i].len() {
                self.a[i][j] -= factor * self.a[row][j];
            }
            self.a[i][col] = 0.0;
            self.rhs[i] -= factor * self.rhs[row];
        }
        let factor = self.reduced[col];
        if factor.abs() > 1e-13 {
            for j in 0..self.reduced.len() {
                self.reduced[j] -= factor * self.a[row][j];
            }
            self.reduced[col] = 0.0;
            self.obj += factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    fn entering(&self) -> Option<usize> {
        if self.bland {
            (0..self.reduced.len()).find(|&j| !self.banned[j] && self.reduced[j] > TOL)
        } else {
            let mut best: Option<usize> = None;
            for j in 0..self.reduced.len() {
                if self.banned[j] || self.reduced[j] <= TOL {
                    continue;
                }
                best = match best {
                    Some(k) if self.reduced[k] >= self.reduced[j] => Some(k),
                    _ => Some(j),
                };
            }
            best
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.a.len() {
            let coeff = self.a[i][col];
            if coeff <= TOL {
                continue;
            }
            let ratio = self.rhs[i] / coeff;
            best = match best {
                Some((bi, br))
                    if br < ratio - TOL
                        || ((ratio - br).abs() <= TOL && self.basis[bi] < self.basis[i]) =>
                {
                    Some((bi, br))
                }
                _ => Some((i, ratio)),
            };
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, max_iters: usize) -> LpStatus {
        let stall_limit = 2 * (self.a.len() + self.reduced.len()) + 16;
        for _ in 0..max_iters {
            let Some(col) = self.entering() else {
                return LpStatus::Optimal;
            };
            let Some(row) = self.leaving(col) else {
                return LpStatus::Unbounded;
            };
            let before = self.obj;
            self.pivot(row, col);
            if self.obj - before <= 1e-12 {
                self.stall += 1;
                if self.stall > stall_limit {
                    self.bland = true;
                }
            } else {
                self.stall = 0;
            }
        }
        LpStatus::IterationLimit
    }
}

/// Solves `p` to optimality, or reports Infeasible / Unbounded /
/// IterationLimit. Feasibility and optimality residuals of an `Optimal`
/// solution are below 1e-7.
pub fn simplex_solve(p: &LpProblem) -> LpSolution {
    let n0 = p.objective.len();
    assert_eq!(p.bounds.len(), n0, "one bound pair per variable");
    for &(lo, hi) in &p.bounds {
        assert!(
            lo.is_finite() && hi.is_finite(),
            "simplex requires finite bounds"
        );
        if lo > hi {
            return LpSolution {
                x: vec![],
                value: 0.0,
                status: LpStatus::Infeasible,
            };
        }
    }

    // shift x = y + lo so that y >= 0; upper bounds become rows
    let lo: Vec<f64> = p.bounds.iter().map(|b| b.0).collect();
    let mut rows: Vec<(Vec<f64>, Cmp, f64)> = Vec::new();
    for c in &p.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lo).map(|(a, l)| a * l).sum();
        rows.push((c.coeffs.clone(), c.cmp, c.rhs - shift));
    }
    for (i, &(l, h)) in p.bounds.iter().enumerate() {
        let mut coeffs = vec![0.0; n0];
        coeffs[i] = 1.0;
        rows.push((coeffs, Cmp::Le, h - l));
    }
    // normalize rhs >= 0
    for (coeffs, cmp, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for v in coeffs.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *cmp = match *cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows
        .iter()
        .filter(|(_, cmp, _)| *cmp != Cmp::Eq)
        .count();
    let n_art = rows
        .iter()
        .filter(|(_, cmp, _)| *cmp != Cmp::Le)
        .count();
    let n_total = n0 + n_slack + n_art;

    let mut a = vec![vec![0.0; n_total]; m];
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut is_artificial = vec![false; n_total];
    let mut slack_idx = n0;
    let mut art_idx = n0 + n_slack;
    for (i, (coeffs, cmp, r)) in rows.iter().enumerate() {
        a[i][..n0].copy_from_slice(coeffs);
        rhs[i] = *r;
        match cmp {
            Cmp::Le => {
                a[i][slack_idx] = 1.0;
                basis[i] = slack_idx;
                slack_idx += 1;
            }
            Cmp::Ge => {
                a[i][slack_idx] = -1.0;
                slack_idx += 1;
                a[i][art_idx] = 1.0;
                is_artificial[art_idx] = true;
                basis[i] = art_idx;
                art_idx += 1;
            }
            Cmp::Eq => {
                a[i][art_idx] = 1.0;
                is_artificial[art_idx] = true;
                basis[i] = art_idx;
                art_idx += 1;
            }
        }
    }

    let max_iters = 50_000 + 40 * (m + n_total);

    // phase 1: drive artificials to zero (maximize -sum of artificials)
    if n_art > 0 {
        let mut reduced = vec![0.0; n_total];
        let mut obj = 0.0;
        // r = c - c_B A with c = -1 on artificials; basic artificials
        // contribute +row to the reduced costs
        for i in 0..m {
            if is_artificial[basis[i]] {
                for j in 0..n_total {
                    reduced[j] += a[i][j];
                }
                obj -= rhs[i];
            }
        }
        for (j, flag) in is_artificial.iter().enumerate() {
            if *flag {
                reduced[j] -= 1.0;
            }
        }
        let mut t = Tableau {
            a,
            rhs,
            basis,
            reduced,
            obj,
            banned: vec![false; n_total],
            bland: false,
            stall: 0,
        };
        match t.run(max_iters) {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => {
                return LpSolution {
                    x: vec![],
                    value: 0.0,
                    status: LpStatus::IterationLimit,
                }
            }
            // phase 1 is bounded above by 0; hitting this means the
            // numerics broke down
            _ => {
                return LpSolution {
                    x: vec![],
                    value: 0.0,
                    status: LpStatus::IterationLimit,
                }
            }
        }
        if t.obj < -1e-7 {
            return LpSolution {
                x: vec![],
                value: 0.0,
                status: LpStatus::Infeasible,
            };
        }
        // pivot zero-level artificials out of the basis; drop redundant rows
        let mut drop_rows = Vec::new();
        for i in 0..t.basis.len() {
            if !is_artificial[t.basis[i]] {
                continue;
            }
            let col = (0..n_total)
                .find(|&j| !is_artificial[j] && t.a[i][j].abs() > 1e-7);
            match col {
                Some(j) => t.pivot(i, j),
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            t.a.remove(i);
            t.rhs.remove(i);
            t.basis.remove(i);
        }
        a = t.a;
        rhs = t.rhs;
        basis = t.basis;
    }

    // phase 2: original objective over the canonical tableau
    let mut cost = vec![0.0; n_total];
    cost[..n0].copy_from_slice(&p.objective);
    let mut reduced = cost.clone();
    let mut obj = 0.0;
    for (i, &bj) in basis.iter().enumerate() {
        let cb = cost[bj];
        if cb == 0.0 {
            continue;
        }
        for j in 0..n_total {
            reduced[j] -= cb * a[i][j];
        }
        obj += cb * rhs[i];
    }
    let mut t = Tableau {
        a,
        rhs,
        basis,
        reduced,
        obj,
        banned: is_artificial,
        bland: false,
        stall: 0,
    };
    let status = t.run(max_iters);
    match status {
        LpStatus::Optimal => {}
        other => {
            return LpSolution {
                x: vec![],
                value: 0.0,
                status: other,
            }
        }
    }

    let mut y = vec![0.0; n_total];
    for (i, &bj) in t.basis.iter().enumerate() {
        y[bj] = t.rhs[i];
    }
    let x: Vec<f64> = (0..n0).map(|j| y[j] + lo[j]).collect();
    let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    debug_assert!(p.max_violation(&x) < 1e-7, "residual check failed");
    LpSolution {
        x,
        value,
        status: LpStatus::Optimal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_variable_cap() {
        let mut p = LpProblem::new(vec![1.0]);
        p.bounds = vec![(0.0, 10.0)];
        p.constrain(vec![1.0], Cmp::Le, 1.0);
        let sol = simplex_solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.value, 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn triangle_vertex_cover_lp() {
        // minimize pi_0 + pi_1 + pi_2 s.t. pi_u + pi_v >= 1 per edge
        let mut p = LpProblem::new(vec![-1.0, -1.0, -1.0]);
        p.constrain(vec![1.0, 1.0, 0.0], Cmp::Ge, 1.0);
        p.constrain(vec![0.0, 1.0, 1.0], Cmp::Ge, 1.0);
        p.constrain(vec![1.0, 0.0, 1.0], Cmp::Ge, 1.0);
        let sol = simplex_solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(-sol.value, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        let mut p = LpProblem::new(vec![1.0]);
        p.constrain(vec![1.0], Cmp::Ge, 2.0); // but x <= 1 by bound
        let sol = simplex_solve(&p);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_constraints() {
        let mut p = LpProblem::new(vec![1.0, 2.0]);
        p.constrain(vec![1.0, 1.0], Cmp::Eq, 1.0);
        let sol = simplex_solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(sol.value, 2.0, epsilon = 1e-9);
        assert_relative_eq!(sol.x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn shifted_lower_bounds() {
        let mut p = LpProblem::new(vec![-1.0, -1.0]);
        p.bounds = vec![(0.5, 2.0), (1.5, 3.0)];
        p.constrain(vec![1.0, 1.0], Cmp::Ge, 2.5);
        let sol = simplex_solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_relative_eq!(-sol.value, 2.5, epsilon = 1e-9);
    }

    /// Brute-force oracle: the optimum of an LP with all-finite bounds is
    /// attained at an intersection of n active constraints.
    fn enumerate_optimum(p: &LpProblem) -> Option<f64> {
        use nalgebra::{DMatrix, DVector};
        let n = p.objective.len();
        let mut halfspaces: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in &p.constraints {
            halfspaces.push((c.coeffs.clone(), c.rhs));
        }
        for (i, &(l, h)) in p.bounds.iter().enumerate() {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            halfspaces.push((row.clone(), l));
            halfspaces.push((row, h));
        }
        let k = halfspaces.len();
        let mut best: Option<f64> = None;
        let mut combo = vec![0usize; n];
        #[allow(clippy::too_many_arguments)]
        fn rec(
            start: usize,
            depth: usize,
            n: usize,
            k: usize,
            combo: &mut Vec<usize>,
            halfspaces: &[(Vec<f64>, f64)],
            p: &LpProblem,
            best: &mut Option<f64>,
        ) {
            if depth == n {
                let a = DMatrix::from_fn(n, n, |r, c| halfspaces[combo[r]].0[c]);
                let b = DVector::from_fn(n, |r, _| halfspaces[combo[r]].1);
                if let Some(x) = a.lu().solve(&b) {
                    let xs: Vec<f64> = x.iter().copied().collect();
                    if xs.iter().all(|v| v.is_finite()) && p.max_violation(&xs) < 1e-7 {
                        let val: f64 = p.objective.iter().zip(&xs).map(|(c, v)| c * v).sum();
                        *best = Some(best.map_or(val, |b: f64| b.max(val)));
                    }
                }
                return;
            }
            for i in start..k {
                combo[depth] = i;
                rec(i + 1, depth + 1, n, k, combo, halfspaces, p, best);
            }
        }
        rec(0, 0, n, k, &mut combo, &halfspaces, p, &mut best);
        best
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(19);
        for trial in 0..40 {
            let n = rng.random_range(2..=4);
            let mut p = LpProblem::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
            p.bounds = (0..n).map(|_| (0.0, rng.random_range(0.5..3.0))).collect();
            for _ in 0..rng.random_range(1..=4) {
                let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let cmp = if rng.random::<bool>() { Cmp::Le } else { Cmp::Ge };
                let rhs = rng.random_range(-1.0..2.0);
                p.constrain(coeffs, cmp, rhs);
            }
            let sol = simplex_solve(&p);
            let oracle = enumerate_optimum(&p);
            match (sol.status, oracle) {
                (LpStatus::Optimal, Some(best)) => {
                    assert!(
                        (sol.value - best).abs() < 1e-6,
                        "trial {trial}: simplex {} vs oracle {best}",
                        sol.value
                    );
                }
                (LpStatus::Infeasible, None) => {}
                (s, o) => panic!("trial {trial}: simplex {s:?} vs oracle {o:?}"),
            }
        }
    }
}
