//! Dense two-phase simplex over exact rationals with Bland's pivot rule.
//!
//! Duals are reported per original row with the usual sign conventions: for a
//! maximization, `≤` rows carry `y ≥ 0` and `≥` rows carry `y ≤ 0`; for a
//! minimization the signs flip. Reduced costs are `d = c − Aᵀy`, and at an
//! optimum `c·x = b·y + l·d` where `l` are the variable lower bounds.

use serde::Serialize;

use super::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    /// Sparse coefficients `(column, value)`; columns may repeat and are summed.
    pub coeffs: Vec<(usize, Rational)>,
    pub rel: Rel,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, Rational)>, rel: Rel, rhs: Rational) -> Self {
        Constraint { coeffs, rel, rhs }
    }

    pub fn dense(coeffs: &[Rational], rel: Rel, rhs: Rational) -> Self {
        let coeffs = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.clone()))
            .collect();
        Constraint { coeffs, rel, rhs }
    }

    fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(j, c)| c * &x[*j]).sum()
    }

    fn holds(&self, x: &[Rational]) -> bool {
        let l = self.lhs(x);
        match self.rel {
            Rel::Le => l <= self.rhs,
            Rel::Ge => l >= self.rhs,
            Rel::Eq => l == self.rhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: Rational,
    pub primal: Vec<Rational>,
    /// One entry per original constraint, in input order.
    pub dual: Vec<Rational>,
    pub reduced_costs: Vec<Rational>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram { sense, objective, constraints: Vec::new(), lower: vec![Rational::zero(); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, rel: Rel, rhs: Rational) -> usize {
        self.add_constraint(Constraint::new(coeffs, rel, rhs))
    }

    pub fn add_constraint(&mut self, c: Constraint) -> usize {
        assert!(c.coeffs.iter().all(|(j, _)| *j < self.num_vars()), "constraint column out of range");
        self.constraints.push(c);
        self.constraints.len() - 1
    }

    pub fn set_lower(&mut self, j: usize, l: Rational) {
        self.lower[j] = l;
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(&self.lower).all(|(xi, li)| xi >= li)
            && self.constraints.iter().all(|c| c.holds(x))
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn solve(&self) -> LpSolution {
        let sol = Simplex::build(self).run();
        if sol.status == LpStatus::Optimal {
            if let Err(msg) = self.check_certificate(&sol) {
                panic!("LP certificate check failed: {msg}");
            }
        }
        sol
    }

    /// Exact check of primal feasibility, dual feasibility, strong duality and
    /// complementary slackness for an optimal solution.
    pub fn check_certificate(&self, sol: &LpSolution) -> Result<(), String> {
        if !self.is_feasible_point(&sol.primal) {
            return Err("primal infeasible".into());
        }
        if self.objective_value(&sol.primal) != sol.value {
            return Err("objective mismatch".into());
        }
        let n = self.num_vars();
        let mut aty = vec![Rational::zero(); n];
        for (c, y) in self.constraints.iter().zip(&sol.dual) {
            if y.is_zero() {
                continue;
            }
            for (j, a) in &c.coeffs {
                aty[*j] += a * y;
            }
        }
        let sign_ok = |y: &Rational, rel: Rel| match (self.sense, rel) {
            (_, Rel::Eq) => true,
            (Sense::Max, Rel::Le) | (Sense::Min, Rel::Ge) => !y.is_negative(),
            (Sense::Max, Rel::Ge) | (Sense::Min, Rel::Le) => !y.is_positive(),
        };
        for (i, (c, y)) in self.constraints.iter().zip(&sol.dual).enumerate() {
            if !sign_ok(y, c.rel) {
                return Err(format!("dual sign violated on row {i}"));
            }
            if !y.is_zero() && c.lhs(&sol.primal) != c.rhs {
                return Err(format!("complementary slackness violated on row {i}"));
            }
        }
        let mut dual_value: Rational = self.constraints.iter().zip(&sol.dual).map(|(c, y)| &c.rhs * y).sum();
        for j in 0..n {
            let d = &self.objective[j] - &aty[j];
            let ok = match self.sense {
                Sense::Max => !d.is_positive(),
                Sense::Min => !d.is_negative(),
            };
            if !ok {
                return Err(format!("reduced cost sign violated on column {j}"));
            }
            if d != sol.reduced_costs[j] {
                return Err(format!("reduced cost mismatch on column {j}"));
            }
            if !d.is_zero() && sol.primal[j] != self.lower[j] {
                return Err(format!("complementary slackness violated on column {j}"));
            }
            dual_value += &d * &self.lower[j];
        }
        if dual_value != sol.value {
            return Err(format!("duality gap: primal {} vs dual {}", sol.value, dual_value));
        }
        Ok(())
    }

    /// The dual program, for lower bounds equal to zero. Free and sign-reversed
    /// dual variables are split into nonnegative parts, so the returned program
    /// has the same optimal value but not a one-to-one variable map.
    pub fn dual(&self) -> LinearProgram {
        assert!(self.lower.iter().all(|l| l.is_zero()), "dual() requires zero lower bounds");
        let n = self.num_vars();
        // Each row r contributes columns with multiplier +1 and/or -1 on y_r.
        let mut cols: Vec<(usize, i64)> = Vec::new();
        for (r, c) in self.constraints.iter().enumerate() {
            let pos = match (self.sense, c.rel) {
                (_, Rel::Eq) => vec![1, -1],
                (Sense::Max, Rel::Le) | (Sense::Min, Rel::Ge) => vec![1],
                _ => vec![-1],
            };
            for s in pos {
                cols.push((r, s));
            }
        }
        let obj = cols.iter().map(|(r, s)| &self.constraints[*r].rhs * *s).collect();
        let sense = match self.sense {
            Sense::Max => Sense::Min,
            Sense::Min => Sense::Max,
        };
        let mut d = LinearProgram::new(sense, obj);
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for (k, (r, s)) in cols.iter().enumerate() {
            for (j, a) in &self.constraints[*r].coeffs {
                rows[*j].push((k, a * *s));
            }
        }
        let rel = match self.sense {
            Sense::Max => Rel::Ge,
            Sense::Min => Rel::Le,
        };
        for (j, row) in rows.into_iter().enumerate() {
            d.add(row, rel, self.objective[j].clone());
        }
        d
    }
}

/// Finds a point satisfying the constraints with `x ≥ lower`, or `None`.
pub fn lp_feasible(num_vars: usize, constraints: &[Constraint], lower: Option<&[Rational]>) -> Option<Vec<Rational>> {
    let mut lp = LinearProgram::new(Sense::Max, vec![Rational::zero(); num_vars]);
    for c in constraints {
        lp.add_constraint(c.clone());
    }
    if let Some(l) = lower {
        lp.lower = l.to_vec();
    }
    let sol = lp.solve();
    (sol.status == LpStatus::Optimal).then_some(sol.primal)
}

#[derive(Clone, Copy, PartialEq)]
enum ColKind {
    Original,
    Slack,
    Artificial,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    /// Row-major tableau; the last entry of every row is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Column holding the identity vector e_r at the start (slack or artificial).
    init_col: Vec<usize>,
    /// +1 or -1: whether the row was negated to make its rhs nonnegative.
    flip: Vec<i64>,
    pivots: usize,
}

impl<'a> Simplex<'a> {
    fn build(lp: &'a LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.constraints.len();
        let mut rels = Vec::with_capacity(m);
        let mut flip = Vec::with_capacity(m);
        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
        for c in &lp.constraints {
            let mut row = vec![Rational::zero(); n];
            for (j, a) in &c.coeffs {
                row[*j] += a;
            }
            let shift: Rational = row.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
            let mut rhs = &c.rhs - shift;
            let mut rel = c.rel;
            if rhs.is_negative() {
                for a in row.iter_mut() {
                    *a = -&*a;
                }
                rhs = -rhs;
                rel = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
                flip.push(-1);
            } else {
                flip.push(1);
            }
            row.push(rhs);
            rows.push(row);
            rels.push(rel);
        }
        let n_slack = rels.iter().filter(|r| **r != Rel::Eq).count();
        let n_art = rels.iter().filter(|r| **r != Rel::Le).count();
        let width = n + n_slack + n_art;
        let mut kinds = vec![ColKind::Original; n];
        kinds.extend(std::iter::repeat(ColKind::Slack).take(n_slack));
        kinds.extend(std::iter::repeat(ColKind::Artificial).take(n_art));
        let mut t = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut init_col = Vec::with_capacity(m);
        let (mut s, mut a) = (n, n + n_slack);
        for (mut row, rel) in rows.into_iter().zip(rels) {
            let rhs = row.pop().unwrap();
            row.resize(width + 1, Rational::zero());
            row[width] = rhs;
            match rel {
                Rel::Le => {
                    row[s] = Rational::one();
                    basis.push(s);
                    init_col.push(s);
                    s += 1;
                }
                Rel::Ge => {
                    row[s] = -Rational::one();
                    s += 1;
                    row[a] = Rational::one();
                    basis.push(a);
                    init_col.push(a);
                    a += 1;
                }
                Rel::Eq => {
                    row[a] = Rational::one();
                    basis.push(a);
                    init_col.push(a);
                    a += 1;
                }
            }
            t.push(row);
        }
        Simplex { lp, t, basis, kinds, init_col, flip, pivots: 0 }
    }

    fn width(&self) -> usize {
        self.kinds.len()
    }

    /// Reduced-cost row `c_B B⁻¹ A − c` plus the objective value in the last slot.
    fn reduced_row(&self, cost: &[Rational]) -> Vec<Rational> {
        let w = self.width();
        let mut d: Vec<Rational> = cost.iter().map(|c| -c).collect();
        d.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.t[i].iter().enumerate() {
                if !a.is_zero() {
                    d[j] += cb * a;
                }
            }
        }
        debug_assert_eq!(d.len(), w + 1);
        d
    }

    fn pivot(&mut self, r: usize, c: usize, d: &mut [Rational]) {
        self.pivots += 1;
        let inv = self.t[r][c].recip();
        let nz: Vec<usize> = (0..self.t[r].len()).filter(|&j| !self.t[r][j].is_zero()).collect();
        for &j in &nz {
            self.t[r][j] *= &inv;
        }
        let prow: Vec<(usize, Rational)> = nz.iter().map(|&j| (j, self.t[r][j].clone())).collect();
        for i in 0..self.t.len() {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (j, a) in &prow {
                let delta = &f * a;
                self.t[i][*j] -= delta;
            }
        }
        if !d[c].is_zero() {
            let f = d[c].clone();
            for (j, a) in &prow {
                let delta = &f * a;
                d[*j] -= delta;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes over the current basis; returns false when unbounded.
    fn optimize(&mut self, d: &mut Vec<Rational>, allow_artificial: bool) -> bool {
        let w = self.width();
        loop {
            let enter = (0..w).find(|&j| {
                d[j].is_negative() && (allow_artificial || self.kinds[j] != ColKind::Artificial)
            });
            let Some(c) = enter else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.t[i][w] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, c, d);
        }
    }

    fn run(mut self) -> LpSolution {
        let n = self.lp.num_vars();
        let w = self.width();
        let m = self.t.len();
        let infeasible = |p| LpSolution {
            status: LpStatus::Infeasible,
            value: Rational::zero(),
            primal: vec![],
            dual: vec![],
            reduced_costs: vec![],
            pivots: p,
        };

        if self.kinds.contains(&ColKind::Artificial) {
            let cost: Vec<Rational> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { -Rational::one() } else { Rational::zero() })
                .collect();
            let mut d = self.reduced_row(&cost);
            self.optimize(&mut d, true);
            if d[w].is_negative() {
                return infeasible(self.pivots);
            }
            // Drive zero-level artificials out of the basis where possible.
            for r in 0..m {
                if self.kinds[self.basis[r]] != ColKind::Artificial {
                    continue;
                }
                if let Some(c) = (0..w).find(|&j| self.kinds[j] != ColKind::Artificial && !self.t[r][j].is_zero()) {
                    self.pivot(r, c, &mut d);
                }
            }
        }

        let sign = match self.lp.sense {
            Sense::Max => Rational::one(),
            Sense::Min => -Rational::one(),
        };
        let mut cost = vec![Rational::zero(); w];
        for j in 0..n {
            cost[j] = &self.lp.objective[j] * &sign;
        }
        let mut d = self.reduced_row(&cost);
        if !self.optimize(&mut d, false) {
            return LpSolution {
                status: LpStatus::Unbounded,
                value: Rational::zero(),
                primal: vec![],
                dual: vec![],
                reduced_costs: vec![],
                pivots: self.pivots,
            };
        }

        let mut primal = self.lp.lower.clone();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                primal[b] += &self.t[i][w];
            }
        }
        let dual: Vec<Rational> = (0..m)
            .map(|r| {
                let y: Rational = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| &cost[b] * &self.t[i][self.init_col[r]])
                    .sum();
                y * self.flip[r] * &sign
            })
            .collect();
        let mut reduced = self.lp.objective.clone();
        for (c, y) in self.lp.constraints.iter().zip(&dual) {
            if y.is_zero() {
                continue;
            }
            for (j, a) in &c.coeffs {
                reduced[*j] -= a * y;
            }
        }
        let value = self.lp.objective_value(&primal);
        LpSolution { status: LpStatus::Optimal, value, primal, dual, reduced_costs: reduced, pivots: self.pivots }
    }
}
