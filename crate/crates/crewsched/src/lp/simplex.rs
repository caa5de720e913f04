//! Bounded-variable two-phase revised simplex with a dense basis inverse.
//!
//! Dantzig pricing with a Bland's-rule fallback once a degeneracy streak is
//! detected, periodic refactorization of the basis inverse, and a final
//! primal/dual certificate check before an optimal status is returned.

use crate::error::LpError;
use crate::lp::{LinearProgram, LpSolution, LpStatus, ObjSense, RowSense, INF, TOL_DUALITY, TOL_FEAS};

const TOL_PIVOT: f64 = 1e-9;
const TOL_ENTER: f64 = 1e-9;
const TOL_ZERO: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const BLAND_AFTER_DEGENERATE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free nonbasic variables rest at zero.
    FreeAtZero,
}

struct Tableau {
    /// Structural + slack + artificial count.
    total: usize,
    n_structural: usize,
    n_rows: usize,
    art_start: usize,
    /// Sparse columns, length `total`.
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Dense row-major basis inverse.
    binv: Vec<f64>,
    /// Basic variable values, one per row.
    xb: Vec<f64>,
    pivots_since_refactor: usize,
    degenerate_streak: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn build(lp: &LinearProgram, flip_sign: f64) -> Result<Tableau, LpError> {
        let n = lp.n_vars();
        let m = lp.n_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coefficients {
                if c != 0.0 {
                    cols[j].push((i, c));
                }
            }
        }
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for v in &lp.variables {
            lower.push(v.lower);
            upper.push(v.upper);
            cost.push(v.objective * flip_sign);
        }
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in lp.rows.iter().enumerate() {
            cols[n + i].push((i, 1.0));
            let (lo, hi) = match row.sense {
                RowSense::Le => (0.0, INF),
                RowSense::Ge => (-INF, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            cost.push(0.0);
            rhs.push(row.rhs);
        }

        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            state.push(initial_nonbasic_state(lower[j], upper[j]));
        }
        // Slacks start basic; rows whose slack bound is violated get an
        // artificial in phase 1.
        state.extend((0..m).map(|_| VarState::AtLower));

        let mut t = Tableau {
            total: n + m,
            n_structural: n,
            n_rows: m,
            art_start: n + m,
            cols,
            lower,
            upper,
            cost,
            rhs,
            state,
            basis: vec![0; m],
            binv: identity(m),
            xb: vec![0.0; m],
            pivots_since_refactor: 0,
            degenerate_streak: 0,
        };

        // Residual each slack would have to absorb.
        let mut residual = t.rhs.clone();
        for j in 0..n {
            let xj = t.nonbasic_value(j);
            if xj != 0.0 {
                for &(i, c) in &t.cols[j] {
                    residual[i] -= c * xj;
                }
            }
        }
        let mut artificial_costs = vec![0.0; n + m];
        for i in 0..m {
            let s = n + i;
            let r = residual[i];
            if r >= t.lower[s] - TOL_ZERO && r <= t.upper[s] + TOL_ZERO {
                t.basis[i] = s;
                t.state[s] = VarState::Basic(i);
                t.xb[i] = r;
            } else {
                let clamped = r.clamp(t.lower[s], t.upper[s]);
                t.state[s] = if clamped == t.lower[s] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                let sign = if r - clamped > 0.0 { 1.0 } else { -1.0 };
                let a = t.total;
                t.cols.push(vec![(i, sign)]);
                t.lower.push(0.0);
                t.upper.push(INF);
                t.cost.push(0.0);
                artificial_costs.push(1.0);
                t.state.push(VarState::Basic(i));
                t.basis[i] = a;
                t.xb[i] = (r - clamped).abs();
                t.total += 1;
            }
        }

        if t.total > t.art_start {
            artificial_costs.truncate(t.total);
            // The identity inverse is only right for an all-slack basis;
            // artificials may carry sign -1.
            t.refactorize()?;
            let phase1 = t.run(&artificial_costs)?;
            match phase1 {
                LpStatus::Unbounded => {
                    return Err(LpError::Numerical("phase-1 objective unbounded".into()))
                }
                LpStatus::Optimal => {}
                _ => unreachable!(),
            }
            let infeasibility: f64 = (0..m)
                .filter(|&i| t.basis[i] >= t.art_start)
                .map(|i| t.xb[i])
                .sum();
            if infeasibility > TOL_FEAS * (1.0 + t.rhs.iter().map(|b| b.abs()).fold(0.0, f64::max)) {
                return Err(LpError::BadModel("__infeasible__".into()));
            }
            t.drive_out_artificials()?;
            for a in t.art_start..t.total {
                t.lower[a] = 0.0;
                t.upper[a] = 0.0;
            }
        }
        Ok(t)
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::FreeAtZero => 0.0,
            VarState::Basic(_) => unreachable!("nonbasic_value on basic"),
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic(r) => self.xb[r],
            _ => self.nonbasic_value(j),
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.n_rows;
        let mut y = vec![0.0; m];
        for (r, &q) in self.basis.iter().enumerate() {
            let cq = cost[q];
            if cq != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for i in 0..m {
                    y[i] += cq * row[i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: &[f64]) -> f64 {
        let mut d = cost[j];
        for &(i, c) in &self.cols[j] {
            d -= y[i] * c;
        }
        d
    }

    /// Reduced cost plus the magnitude of the terms that produced it, so
    /// pricing can reject candidates below the cancellation noise floor.
    fn reduced_cost_scaled(&self, j: usize, y: &[f64], cost: &[f64]) -> (f64, f64) {
        let mut d = cost[j];
        let mut scale = cost[j].abs();
        for &(i, c) in &self.cols[j] {
            let term = y[i] * c;
            d -= term;
            scale += term.abs();
        }
        (d, scale)
    }

    /// w = B^{-1} a_j.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.n_rows;
        let mut w = vec![0.0; m];
        for &(i, c) in &self.cols[j] {
            for r in 0..m {
                w[r] += self.binv[r * m + i] * c;
            }
        }
        w
    }

    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.n_rows;
        let mut mat = vec![0.0; m * m];
        for (r, &q) in self.basis.iter().enumerate() {
            for &(i, c) in &self.cols[q] {
                mat[i * m + r] = c;
            }
        }
        self.binv = invert(&mat, m).ok_or_else(|| LpError::Numerical("singular basis".into()))?;
        // Fresh basic values from the nonbasic assignment.
        let mut t = self.rhs.clone();
        for j in 0..self.total {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xj = self.nonbasic_value(j);
            if xj != 0.0 {
                for &(i, c) in &self.cols[j] {
                    t[i] -= c * xj;
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.xb[r] = row.iter().zip(&t).map(|(a, b)| a * b).sum();
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn run(&mut self, cost: &[f64]) -> Result<LpStatus, LpError> {
        let iter_cap = 200 * (self.total + self.n_rows) + 20_000;
        self.degenerate_streak = 0;
        for _ in 0..iter_cap {
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactorize()?;
            }
            match self.step(cost)? {
                StepOutcome::Optimal => {
                    // Re-check with a clean inverse before certifying.
                    self.refactorize()?;
                    match self.step(cost)? {
                        StepOutcome::Optimal => return Ok(LpStatus::Optimal),
                        StepOutcome::Unbounded => return Ok(LpStatus::Unbounded),
                        StepOutcome::Pivoted => continue,
                    }
                }
                StepOutcome::Unbounded => {
                    // Never certify a ray off a stale inverse.
                    if self.pivots_since_refactor == 0 {
                        return Ok(LpStatus::Unbounded);
                    }
                    self.refactorize()?;
                    match self.step(cost)? {
                        StepOutcome::Optimal => return Ok(LpStatus::Optimal),
                        StepOutcome::Unbounded => return Ok(LpStatus::Unbounded),
                        StepOutcome::Pivoted => continue,
                    }
                }
                StepOutcome::Pivoted => {}
            }
        }
        Err(LpError::Numerical(format!(
            "simplex iteration cap exceeded ({} rows, {} columns)",
            self.n_rows, self.total
        )))
    }

    fn step(&mut self, cost: &[f64]) -> Result<StepOutcome, LpError> {
        let bland = self.degenerate_streak >= BLAND_AFTER_DEGENERATE;
        let y = self.duals(cost);

        let mut entering: Option<(usize, f64, f64)> = None; // (var, direction, violation)
        for j in 0..self.total {
            let state = self.state[j];
            if matches!(state, VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                continue;
            }
            let (d, scale) = self.reduced_cost_scaled(j, &y, cost);
            // Large dual magnitudes leave cancellation noise far above any
            // absolute tolerance.
            let tol = TOL_ENTER * (1.0 + 1e-3 * scale);
            let candidate = match state {
                VarState::AtLower if d < -tol => Some((1.0, -d)),
                VarState::AtUpper if d > tol => Some((-1.0, d)),
                VarState::FreeAtZero if d.abs() > tol => Some((-d.signum(), d.abs())),
                _ => None,
            };
            if let Some((dir, viol)) = candidate {
                if bland {
                    entering = Some((j, dir, viol));
                    break;
                }
                if entering.map(|(_, _, v)| viol > v).unwrap_or(true) {
                    entering = Some((j, dir, viol));
                }
            }
        }
        let Some((j_enter, dir, _)) = entering else {
            return Ok(StepOutcome::Optimal);
        };

        let w = self.ftran(j_enter);

        // Ratio test: how far can the entering variable move before a basic
        // variable (or its own opposite bound) blocks.
        let own_limit = if self.lower[j_enter].is_finite() && self.upper[j_enter].is_finite() {
            self.upper[j_enter] - self.lower[j_enter]
        } else {
            INF
        };
        let mut best_ratio = INF;
        let mut leaving: Option<(usize, f64)> = None; // (row, |pivot|)
        for r in 0..self.n_rows {
            if w[r].abs() <= TOL_PIVOT {
                continue;
            }
            let rate = -dir * w[r];
            let q = self.basis[r];
            let room = if rate > 0.0 {
                if self.upper[q].is_finite() {
                    (self.upper[q] - self.xb[r]).max(0.0)
                } else {
                    continue;
                }
            } else if self.lower[q].is_finite() {
                (self.xb[r] - self.lower[q]).max(0.0)
            } else {
                continue;
            };
            let ratio = room / rate.abs();
            let better = match leaving {
                None => ratio < best_ratio - TOL_ZERO || best_ratio == INF,
                Some((r_cur, piv_cur)) => {
                    if ratio < best_ratio - TOL_ZERO {
                        true
                    } else if ratio <= best_ratio + TOL_ZERO {
                        if bland {
                            self.basis[r] < self.basis[r_cur]
                        } else {
                            w[r].abs() > piv_cur
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best_ratio = best_ratio.min(ratio);
                leaving = Some((r, w[r].abs()));
            }
        }

        if own_limit <= best_ratio {
            if own_limit == INF {
                return Ok(StepOutcome::Unbounded);
            }
            // Bound flip: no basis change.
            let delta = own_limit;
            for r in 0..self.n_rows {
                if w[r].abs() > TOL_ZERO {
                    self.xb[r] += -dir * w[r] * delta;
                }
            }
            self.state[j_enter] = match self.state[j_enter] {
                VarState::AtLower => VarState::AtUpper,
                VarState::AtUpper => VarState::AtLower,
                s => s,
            };
            self.track_degeneracy(delta);
            return Ok(StepOutcome::Pivoted);
        }

        let Some((r_leave, _)) = leaving else {
            return Ok(StepOutcome::Unbounded);
        };
        let delta = best_ratio;
        let entering_start = match self.state[j_enter] {
            VarState::AtLower => self.lower[j_enter],
            VarState::AtUpper => self.upper[j_enter],
            VarState::FreeAtZero => 0.0,
            VarState::Basic(_) => unreachable!(),
        };

        for r in 0..self.n_rows {
            if w[r].abs() > TOL_ZERO {
                self.xb[r] += -dir * w[r] * delta;
            }
        }
        let q_leave = self.basis[r_leave];
        let rate_leave = -dir * w[r_leave];
        self.state[q_leave] = if rate_leave > 0.0 {
            VarState::AtUpper
        } else {
            VarState::AtLower
        };
        if self.lower[q_leave] == self.upper[q_leave] {
            self.state[q_leave] = VarState::AtLower;
        }

        self.basis[r_leave] = j_enter;
        self.state[j_enter] = VarState::Basic(r_leave);
        self.xb[r_leave] = entering_start + dir * delta;

        // Elementary row update of the inverse.
        let m = self.n_rows;
        let pivot = w[r_leave];
        for i in 0..m {
            self.binv[r_leave * m + i] /= pivot;
        }
        for r in 0..m {
            if r != r_leave {
                let f = w[r];
                if f.abs() > TOL_ZERO {
                    for i in 0..m {
                        self.binv[r * m + i] -= f * self.binv[r_leave * m + i];
                    }
                }
            }
        }
        self.pivots_since_refactor += 1;
        self.track_degeneracy(delta);
        Ok(StepOutcome::Pivoted)
    }

    fn track_degeneracy(&mut self, delta: f64) {
        if delta <= TOL_ZERO {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
    }

    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        let m = self.n_rows;
        for r in 0..m {
            if self.basis[r] < self.art_start {
                continue;
            }
            // Scan row r of B^{-1}A for a usable pivot among nonbasic
            // non-artificial columns; lowest index wins for determinism.
            let rho: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut replacement = None;
            for j in 0..self.art_start {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                let elem: f64 = self.cols[j].iter().map(|&(i, c)| rho[i] * c).sum();
                if elem.abs() > 1e-7 {
                    replacement = Some(j);
                    break;
                }
            }
            let Some(j) = replacement else {
                // Redundant row; the artificial stays basic, pinned at zero.
                continue;
            };
            let w = self.ftran(j);
            let q = self.basis[r];
            self.state[q] = VarState::AtLower;
            self.basis[r] = j;
            self.state[j] = VarState::Basic(r);
            let pivot = w[r];
            for i in 0..m {
                self.binv[r * m + i] /= pivot;
            }
            for rr in 0..m {
                if rr != r {
                    let f = w[rr];
                    if f.abs() > TOL_ZERO {
                        for i in 0..m {
                            self.binv[rr * m + i] -= f * self.binv[r * m + i];
                        }
                    }
                }
            }
        }
        self.refactorize()
    }
}

fn initial_nonbasic_state(lower: f64, upper: f64) -> VarState {
    if lower.is_finite() {
        VarState::AtLower
    } else if upper.is_finite() {
        VarState::AtUpper
    } else {
        VarState::FreeAtZero
    }
}

fn identity(m: usize) -> Vec<f64> {
    let mut id = vec![0.0; m * m];
    for i in 0..m {
        id[i * m + i] = 1.0;
    }
    id
}

/// Dense Gauss-Jordan inverse with partial pivoting.
fn invert(mat: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut a = mat.to_vec();
    let mut inv = identity(m);
    for col in 0..m {
        let mut pivot_row = col;
        let mut best = a[col * m + col].abs();
        for r in (col + 1)..m {
            let v = a[r * m + col].abs();
            if v > best {
                best = v;
                pivot_row = r;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if pivot_row != col {
            for i in 0..m {
                a.swap(col * m + i, pivot_row * m + i);
                inv.swap(col * m + i, pivot_row * m + i);
            }
        }
        let p = a[col * m + col];
        for i in 0..m {
            a[col * m + i] /= p;
            inv[col * m + i] /= p;
        }
        for r in 0..m {
            if r != col {
                let f = a[r * m + col];
                if f != 0.0 {
                    for i in 0..m {
                        a[r * m + i] -= f * a[col * m + i];
                        inv[r * m + i] -= f * inv[col * m + i];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub(crate) fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let flip = match lp.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    let mut t = match Tableau::build(lp, flip) {
        Ok(t) => t,
        Err(LpError::BadModel(s)) if s == "__infeasible__" => {
            return Ok(infeasible_solution(lp));
        }
        Err(e) => return Err(e),
    };
    let mut cost = t.cost.clone();
    cost.resize(t.total, 0.0);
    let status = t.run(&cost)?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective: -flip * INF,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            basic: Vec::new(),
            best_bound: -flip * INF,
            gap: 0.0,
        });
    }

    let n = lp.n_vars();
    let primal: Vec<f64> = (0..n).map(|j| t.value(j)).collect();
    let y = t.duals(&cost);
    let reduced: Vec<f64> = (0..n)
        .map(|j| match t.state[j] {
            VarState::Basic(_) => 0.0,
            _ => t.reduced_cost(j, &y, &cost) * flip,
        })
        .collect();
    let duals: Vec<f64> = y.iter().map(|v| v * flip).collect();
    let basic: Vec<bool> = (0..n)
        .map(|j| matches!(t.state[j], VarState::Basic(_)))
        .collect();
    let objective: f64 = lp
        .variables
        .iter()
        .zip(&primal)
        .map(|(v, x)| v.objective * x)
        .sum();

    certify(lp, &t, &primal, &y, &cost, flip)?;

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        primal,
        duals,
        reduced_costs: reduced,
        basic,
        best_bound: objective,
        gap: 0.0,
    })
}

fn infeasible_solution(lp: &LinearProgram) -> LpSolution {
    let bad = match lp.sense {
        ObjSense::Minimize => INF,
        ObjSense::Maximize => -INF,
    };
    LpSolution {
        status: LpStatus::Infeasible,
        objective: bad,
        primal: Vec::new(),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        basic: Vec::new(),
        best_bound: bad,
        gap: 0.0,
    }
}

/// Primal feasibility, dual feasibility, and strong duality; any failure is
/// reported as a numerical error rather than a silently wrong status.
fn certify(
    lp: &LinearProgram,
    t: &Tableau,
    primal: &[f64],
    y: &[f64],
    cost: &[f64],
    flip: f64,
) -> Result<(), LpError> {
    for (j, v) in lp.variables.iter().enumerate() {
        let scale = 1.0 + v.lower.abs().min(1e12) + v.upper.abs().min(1e12);
        if primal[j] < v.lower - TOL_FEAS * scale || primal[j] > v.upper + TOL_FEAS * scale {
            return Err(LpError::Numerical(format!(
                "variable {} out of bounds: {}",
                v.name, primal[j]
            )));
        }
    }
    for row in &lp.rows {
        let activity: f64 = row.coefficients.iter().map(|&(j, c)| c * primal[j]).sum();
        let scale = 1.0 + row.rhs.abs() + row.coefficients.iter().map(|&(_, c)| c.abs()).sum::<f64>();
        let viol = match row.sense {
            RowSense::Le => activity - row.rhs,
            RowSense::Ge => row.rhs - activity,
            RowSense::Eq => (activity - row.rhs).abs(),
        };
        if viol > TOL_FEAS * scale {
            return Err(LpError::Numerical(format!(
                "row {} violated by {viol:.3e}",
                row.name
            )));
        }
    }

    // Strong duality: c.x = y.b + sum of reduced costs at nonbasic bounds.
    let cx: f64 = (0..t.n_structural).map(|j| cost[j] * primal[j]).sum();
    let mut dual_obj: f64 = y.iter().zip(&t.rhs).map(|(yi, bi)| yi * bi).sum();
    for j in 0..t.total {
        if matches!(t.state[j], VarState::Basic(_)) {
            continue;
        }
        let xj = t.nonbasic_value(j);
        if xj != 0.0 {
            dual_obj += t.reduced_cost(j, y, cost) * xj;
        }
    }
    let _ = flip;
    if (cx - dual_obj).abs() > TOL_DUALITY * (1.0 + cx.abs()) {
        return Err(LpError::Numerical(format!(
            "duality gap {:.3e} exceeds tolerance",
            (cx - dual_obj).abs()
        )));
    }
    Ok(())
}
