//! A minimal geometric-programming engine.
//!
//! Posynomial programs are transformed to convex form by the substitution
//! `x = exp(y)`, under which every posynomial becomes a log-sum-exp of affine
//! functions, and solved with a log-barrier interior method using damped
//! Newton steps. Solutions carry a KKT residual so feasibility and
//! stationarity can be certified by the caller.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VarId = usize;

/// `coeff * prod_j x_j^(e_j)` with `coeff > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub exponents: BTreeMap<VarId, f64>,
}

impl Monomial {
    pub fn new(coeff: f64) -> Self {
        assert!(coeff > 0.0 && coeff.is_finite(), "monomial coefficient must be positive");
        Self {
            coeff,
            exponents: BTreeMap::new(),
        }
    }

    /// Multiplies in `x_var^e`.
    pub fn pow(mut self, var: VarId, e: f64) -> Self {
        let entry = self.exponents.entry(var).or_insert(0.0);
        *entry += e;
        if *entry == 0.0 {
            self.exponents.remove(&var);
        }
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .fold(self.coeff, |acc, (&v, &e)| acc * x[v].powf(e))
    }
}

/// Sum of monomials with positive coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posynomial {
    pub terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn from_monomial(m: Monomial) -> Self {
        Self { terms: vec![m] }
    }

    pub fn add(mut self, m: Monomial) -> Self {
        self.terms.push(m);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|m| m.eval(x)).sum()
    }
}

impl From<Monomial> for Posynomial {
    fn from(m: Monomial) -> Self {
        Posynomial::from_monomial(m)
    }
}

impl std::iter::Sum<Monomial> for Posynomial {
    fn sum<I: Iterator<Item = Monomial>>(iter: I) -> Self {
        Posynomial {
            terms: iter.collect(),
        }
    }
}

/// A GP in standard form: minimize a posynomial subject to posynomial
/// constraints `<= 1` and mandatory positive variable bounds.
#[derive(Debug, Clone)]
pub struct GpProgram {
    variables: Vec<String>,
    bounds: Vec<(f64, f64)>,
    objective: Option<Posynomial>,
    constraints: Vec<Posynomial>,
}

impl GpProgram {
    pub fn new() -> Self {
        Self {
            variables: Vec::new(),
            bounds: Vec::new(),
            objective: None,
            constraints: Vec::new(),
        }
    }

    /// Registers a variable with its (positive) box bounds.
    pub fn add_variable(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> VarId {
        assert!(lo > 0.0 && lo <= hi, "bounds must satisfy 0 < lo <= hi");
        self.variables.push(name.into());
        self.bounds.push((lo, hi));
        self.variables.len() - 1
    }

    pub fn set_objective(&mut self, p: impl Into<Posynomial>) {
        self.objective = Some(p.into());
    }

    /// Adds `p <= 1`.
    pub fn add_constraint(&mut self, p: impl Into<Posynomial>) {
        self.constraints.push(p.into());
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variables
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn objective(&self) -> &Posynomial {
        self.objective.as_ref().expect("objective set")
    }

    pub fn constraints(&self) -> &[Posynomial] {
        &self.constraints
    }

    fn check_expr(&self, p: &Posynomial) -> Result<()> {
        if p.terms.is_empty() {
            return Err(Error::Config("empty posynomial".into()));
        }
        for m in &p.terms {
            if !(m.coeff > 0.0) || !m.coeff.is_finite() {
                return Err(Error::Config(format!("non-positive coefficient {}", m.coeff)));
            }
            for (&v, &e) in &m.exponents {
                if v >= self.variables.len() {
                    return Err(Error::Config(format!("unknown variable id {v}")));
                }
                if !e.is_finite() {
                    return Err(Error::Config("non-finite exponent".into()));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.is_none() {
            return Err(Error::Config("objective not set".into()));
        }
        self.check_expr(self.objective())?;
        for c in &self.constraints {
            self.check_expr(c)?;
        }
        Ok(())
    }

    /// Log-domain transform: each posynomial becomes a log-sum-exp of affine
    /// functions of `y = ln x`.
    pub fn to_log_convex(&self) -> LogConvexProgram {
        LogConvexProgram {
            num_vars: self.variables.len(),
            objective: LseFn::from_posynomial(self.objective()),
            constraints: self
                .constraints
                .iter()
                .map(LseFn::from_posynomial)
                .collect(),
            bounds_log: self
                .bounds
                .iter()
                .map(|&(lo, hi)| (lo.ln(), hi.ln()))
                .collect(),
        }
    }

    /// Text report of the transformed convex program, for audit.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "variables ({}):", self.variables.len()).unwrap();
        for (i, (name, (lo, hi))) in self.variables.iter().zip(&self.bounds).enumerate() {
            writeln!(out, "  y{i} = ln({name})   bounds [{lo:e}, {hi:e}]").unwrap();
        }
        let fmt_lse = |out: &mut String, p: &Posynomial| {
            for m in &p.terms {
                let mut line = format!("    term: log c = {:+.6e}", m.coeff.ln());
                for (&v, &e) in &m.exponents {
                    write!(line, "  {e:+}*y{v}").unwrap();
                }
                writeln!(out, "{line}").unwrap();
            }
        };
        writeln!(out, "objective: minimize log-sum-exp of {} term(s)", self.objective().terms.len())
            .unwrap();
        fmt_lse(&mut out, self.objective());
        for (i, c) in self.constraints.iter().enumerate() {
            writeln!(out, "constraint {i}: log-sum-exp <= 0, {} term(s)", c.terms.len()).unwrap();
            fmt_lse(&mut out, c);
        }
        out
    }
}

impl Default for GpProgram {
    fn default() -> Self {
        Self::new()
    }
}

/// One affine term `log_coeff + sum_j lin_j * y_j` of a log-sum-exp.
#[derive(Debug, Clone)]
pub struct LseTerm {
    pub log_coeff: f64,
    pub lin: Vec<(VarId, f64)>,
}

impl LseTerm {
    fn value(&self, y: &[f64]) -> f64 {
        self.lin
            .iter()
            .fold(self.log_coeff, |acc, &(v, a)| acc + a * y[v])
    }
}

/// `log sum_j exp(term_j(y))`: the log-domain image of a posynomial.
#[derive(Debug, Clone)]
pub struct LseFn {
    pub terms: Vec<LseTerm>,
}

impl LseFn {
    fn from_posynomial(p: &Posynomial) -> Self {
        Self {
            terms: p
                .terms
                .iter()
                .map(|m| LseTerm {
                    log_coeff: m.coeff.ln(),
                    lin: m.exponents.iter().map(|(&v, &e)| (v, e)).collect(),
                })
                .collect(),
        }
    }

    /// Affine function of the extended variable vector: subtracts `var` from
    /// every term (used by the phase-1 feasibility program).
    fn shifted_by(&self, var: VarId) -> LseFn {
        LseFn {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mut lin = t.lin.clone();
                    lin.push((var, -1.0));
                    LseTerm {
                        log_coeff: t.log_coeff,
                        lin,
                    }
                })
                .collect(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let max = self
            .terms
            .iter()
            .map(|t| t.value(y))
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.terms.iter().map(|t| (t.value(y) - max).exp()).sum();
        max + sum.ln()
    }

    /// Value and gradient; gradient is accumulated into `grad` scaled by
    /// `weight`.
    pub fn eval_grad(&self, y: &[f64], weight: f64, grad: &mut [f64]) -> f64 {
        let vals: Vec<f64> = self.terms.iter().map(|t| t.value(y)).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = vals.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (t, &e) in self.terms.iter().zip(&exps) {
            let w = weight * e / sum;
            for &(v, a) in &t.lin {
                grad[v] += w * a;
            }
        }
        max + sum.ln()
    }

    /// Value, gradient and Hessian, accumulated with the given weights
    /// (`hess += h_weight * H`, `grad += g_weight * g`). `scratch` must have
    /// length `y.len()`.
    fn eval_grad_hess(
        &self,
        y: &[f64],
        g_weight: f64,
        h_weight: f64,
        grad: &mut [f64],
        hess: &mut DMatrix<f64>,
        scratch: &mut [f64],
    ) -> f64 {
        let vals: Vec<f64> = self.terms.iter().map(|t| t.value(y)).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = vals.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();

        // Softmax-weighted mean gradient g = sum_j w_j a_j.
        scratch.iter_mut().for_each(|v| *v = 0.0);
        for (t, &e) in self.terms.iter().zip(&exps) {
            let w = e / sum;
            for &(v, a) in &t.lin {
                scratch[v] += w * a;
            }
        }
        for (gi, &si) in grad.iter_mut().zip(scratch.iter()) {
            *gi += g_weight * si;
        }
        // Hessian: sum_j w_j a_j a_j' - g g'.
        for (t, &e) in self.terms.iter().zip(&exps) {
            let w = e / sum;
            for &(vi, ai) in &t.lin {
                for &(vj, aj) in &t.lin {
                    hess[(vi, vj)] += h_weight * w * ai * aj;
                }
            }
        }
        for vi in 0..y.len() {
            if scratch[vi] == 0.0 {
                continue;
            }
            for vj in 0..y.len() {
                hess[(vi, vj)] -= h_weight * scratch[vi] * scratch[vj];
            }
        }
        max + sum.ln()
    }
}

/// The convex image of a [`GpProgram`] under `x = exp(y)`.
#[derive(Debug, Clone)]
pub struct LogConvexProgram {
    pub num_vars: usize,
    pub objective: LseFn,
    /// Each `<= 0`.
    pub constraints: Vec<LseFn>,
    pub bounds_log: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

impl std::fmt::Display for GpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GpStatus::Optimal => write!(f, "optimal"),
            GpStatus::Infeasible => write!(f, "infeasible"),
            GpStatus::MaxIter => write!(f, "max_iter"),
        }
    }
}

/// Solver output. `status == Optimal` certifies that every constraint holds
/// within `1 + 1e-8` and the KKT residual is below `1e-6`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: GpStatus,
    /// Total Newton iterations across both phases.
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Index of the most violated constraint when infeasible.
    pub most_violated: Option<usize>,
}

impl GpSolution {
    pub fn value(&self, var: VarId) -> f64 {
        self.values[var]
    }
}

const DUALITY_GAP_TOL: f64 = 1e-8;
const KKT_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-8;
const MAX_TOTAL_ITERS: usize = 500;
const BARRIER_MU: f64 = 30.0;
/// Centering target on the gradient of `f0 + phi/t`, whose infinity norm is
/// the KKT stationarity residual with barrier multipliers. Kept above the
/// Newton-solve noise floor at the stiffest barrier parameter and below the
/// certified KKT tolerance.
const CENTER_GRAD_TOL: f64 = 5e-7;
/// Bounds are opened by this much in log domain so degenerate (lo == hi)
/// boxes keep a nonempty interior.
const BOUND_EPS: f64 = 1e-9;

struct BarrierProblem<'a> {
    objective: &'a LseFn,
    constraints: &'a [LseFn],
    bounds: Vec<(f64, f64)>,
}

impl BarrierProblem<'_> {
    fn n(&self) -> usize {
        self.bounds.len()
    }

    fn num_ineq(&self) -> usize {
        self.constraints.len() + 2 * self.n()
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(&self.bounds)
            .all(|(&yi, &(lo, hi))| yi > lo && yi < hi)
            && self.constraints.iter().all(|c| c.eval(y) < 0.0)
    }

    /// `f0 + phi/t` where `phi` is the log barrier of constraints and
    /// bounds; the `1/t` scaling keeps the merit at the objective's own scale
    /// for every barrier parameter. Returns +inf outside the domain.
    fn merit(&self, t: f64, y: &[f64]) -> f64 {
        let mut barrier = 0.0;
        for c in self.constraints {
            let g = c.eval(y);
            if g >= 0.0 {
                return f64::INFINITY;
            }
            barrier -= (-g).ln();
        }
        for (&yi, &(lo, hi)) in y.iter().zip(&self.bounds) {
            if yi <= lo || yi >= hi {
                return f64::INFINITY;
            }
            barrier -= (yi - lo).ln() + (hi - yi).ln();
        }
        self.objective.eval(y) + barrier / t
    }

    /// One centering step family: minimize `t * f0 + phi` by damped Newton
    /// from `y`. Returns the Newton iteration count; stops early when the
    /// caller's predicate fires.
    fn center(
        &self,
        t: f64,
        y: &mut Vec<f64>,
        iter_budget: usize,
        stop_early: &mut dyn FnMut(&[f64]) -> bool,
    ) -> (usize, bool) {
        let n = self.n();
        let mut grad = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        let mut iters = 0;
        while iters < iter_budget {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut hess = DMatrix::<f64>::zeros(n, n);

            self.objective
                .eval_grad_hess(y, 1.0, 1.0, &mut grad, &mut hess, &mut scratch);
            for c in self.constraints {
                let g = c.eval(y);
                debug_assert!(g < 0.0);
                let slack = -g;
                // d/dy [-ln(-g)/t] = grad g / (t slack); second order adds
                // the rank-one outer product of grad g.
                let mut cg = vec![0.0; n];
                c.eval_grad_hess(y, 1.0, 1.0 / (t * slack), &mut cg, &mut hess, &mut scratch);
                for i in 0..n {
                    grad[i] += cg[i] / (t * slack);
                }
                for i in 0..n {
                    if cg[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        hess[(i, j)] += cg[i] * cg[j] / (t * slack * slack);
                    }
                }
            }
            for (i, (&yi, &(lo, hi))) in y.iter().zip(&self.bounds).enumerate() {
                let dl = yi - lo;
                let du = hi - yi;
                grad[i] += (-1.0 / dl + 1.0 / du) / t;
                hess[(i, i)] += (1.0 / (dl * dl) + 1.0 / (du * du)) / t;
            }

            let grad_inf = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
            if grad_inf <= CENTER_GRAD_TOL {
                return (iters, false);
            }

            // Newton direction, with a ridge fallback if the factorization
            // fails numerically; the ridge is relative to the diagonal scale.
            let g_vec = DVector::from_column_slice(&grad);
            let diag_scale = (0..n).fold(f64::MIN_POSITIVE, |acc, i| acc.max(hess[(i, i)]));
            let mut ridge = 0.0;
            let step = loop {
                let mut h = hess.clone();
                if ridge > 0.0 {
                    for i in 0..n {
                        h[(i, i)] += ridge;
                    }
                }
                match Cholesky::new(h) {
                    Some(ch) => break ch.solve(&(-&g_vec)),
                    None => {
                        ridge = if ridge == 0.0 { 1e-14 * diag_scale } else { ridge * 100.0 };
                        assert!(ridge < 1e3 * diag_scale, "Hessian factorization failed");
                    }
                }
            };

            // Backtracking line search on the merit function; a stalled
            // search (rounding floor) ends the centering.
            let base = self.merit(t, y);
            let slope = g_vec.dot(&step);
            let mut alpha = 1.0;
            let mut candidate = y.clone();
            let mut accepted = false;
            for _ in 0..60 {
                for i in 0..n {
                    candidate[i] = y[i] + alpha * step[i];
                }
                if self.merit(t, &candidate) <= base + 0.01 * alpha * slope {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return (iters, false);
            }
            let new_merit = self.merit(t, &candidate);
            // Rounding floor: no measurable decrease means the center is as
            // good as doubles allow.
            if base - new_merit <= 4.0 * f64::EPSILON * base.abs() {
                y.copy_from_slice(&candidate);
                return (iters + 1, false);
            }
            y.copy_from_slice(&candidate);
            iters += 1;
            if stop_early(y) {
                return (iters, true);
            }
        }
        (iters, false)
    }

    /// Full barrier path from a strictly feasible `y`.
    fn solve(
        &self,
        y: &mut Vec<f64>,
        iter_budget: usize,
        stop_early: &mut dyn FnMut(&[f64]) -> bool,
    ) -> (usize, bool, bool) {
        debug_assert!(self.in_domain(y));
        let m = self.num_ineq() as f64;
        let mut t = 1.0;
        let mut used = 0usize;
        loop {
            let (it, stopped) = self.center(t, y, iter_budget - used, stop_early);
            log::trace!("barrier t={t:.3e} newton_iters={it} f0={}", self.objective.eval(y));
            used += it;
            if stopped {
                return (used, true, true);
            }
            if m / t < DUALITY_GAP_TOL {
                return (used, true, false);
            }
            if used >= iter_budget {
                return (used, false, false);
            }
            t *= BARRIER_MU;
        }
    }

    /// KKT stationarity residual at the end of the barrier path, certified
    /// with best-fit nonnegative multipliers over the near-active set
    /// (projected least squares). The barrier's own multipliers are too noisy
    /// at the final stiffness to serve as a certificate.
    fn kkt_residual(&self, y: &[f64]) -> f64 {
        const ACTIVE_TOL: f64 = 1e-5;
        let n = self.n();
        let mut grad0 = vec![0.0; n];
        self.objective.eval_grad(y, 1.0, &mut grad0);

        let mut cols: Vec<Vec<f64>> = Vec::new();
        for c in self.constraints {
            if c.eval(y) >= -ACTIVE_TOL {
                let mut col = vec![0.0; n];
                c.eval_grad(y, 1.0, &mut col);
                cols.push(col);
            }
        }
        for (i, (&yi, &(lo, hi))) in y.iter().zip(&self.bounds).enumerate() {
            if yi - lo <= ACTIVE_TOL {
                let mut col = vec![0.0; n];
                col[i] = -1.0;
                cols.push(col);
            }
            if hi - yi <= ACTIVE_TOL {
                let mut col = vec![0.0; n];
                col[i] = 1.0;
                cols.push(col);
            }
        }

        // Projected coordinate descent on min_{lambda >= 0}
        // ||grad0 + A lambda||^2; dimensions are tiny.
        let mut lambda = vec![0.0f64; cols.len()];
        let mut r = grad0.clone();
        let norms: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for (j, col) in cols.iter().enumerate() {
                if norms[j] == 0.0 {
                    continue;
                }
                let dot: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
                let new = (lambda[j] - dot / norms[j]).max(0.0);
                let delta = new - lambda[j];
                if delta != 0.0 {
                    for (ri, ci) in r.iter_mut().zip(col) {
                        *ri += delta * ci;
                    }
                    moved = moved.max(delta.abs() * norms[j].sqrt());
                    lambda[j] = new;
                }
            }
            if moved < 1e-12 {
                break;
            }
        }
        r.iter().fold(0.0f64, |acc, g| acc.max(g.abs()))
    }
}

/// Solves a GP to certified optimality with a log-barrier interior method.
///
/// Deterministic: initialization is the log-midpoint of the bounds and the
/// method draws no randomness.
pub fn gp_solve(program: &GpProgram) -> Result<GpSolution> {
    program.validate()?;
    let lcp = program.to_log_convex();
    let n = lcp.num_vars;
    let bounds: Vec<(f64, f64)> = lcp
        .bounds_log
        .iter()
        .map(|&(lo, hi)| (lo - BOUND_EPS, hi + BOUND_EPS))
        .collect();
    let mut y: Vec<f64> = lcp.bounds_log.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();

    let mut total_iters = 0usize;

    // Phase 1: find a strictly feasible point if the midpoint is not one.
    let worst = lcp
        .constraints
        .iter()
        .map(|c| c.eval(&y))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > -1e-9 && !lcp.constraints.is_empty() {
        let s_var = n;
        let shifted: Vec<LseFn> = lcp.constraints.iter().map(|c| c.shifted_by(s_var)).collect();
        let s0 = worst + 1.0;
        let objective = LseFn {
            terms: vec![LseTerm {
                log_coeff: 0.0,
                lin: vec![(s_var, 1.0)],
            }],
        };
        let mut bounds1 = bounds.clone();
        bounds1.push((s0 - 60.0, s0 + 1.0));
        let phase1 = BarrierProblem {
            objective: &objective,
            constraints: &shifted,
            bounds: bounds1,
        };
        let mut y1 = y.clone();
        y1.push(s0);
        let (iters, _converged, stopped) = phase1.solve(
            &mut y1,
            MAX_TOTAL_ITERS,
            &mut |yy: &[f64]| yy[s_var] < -1e-6,
        );
        total_iters += iters;
        let s_final = y1[s_var];
        if !stopped && s_final >= -1e-6 {
            let y_trim = &y1[..n];
            let most_violated = lcp
                .constraints
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| a.eval(y_trim).total_cmp(&b.eval(y_trim)))
                .map(|(i, _)| i);
            let values: Vec<f64> = y_trim.iter().map(|&v| v.exp()).collect();
            return Ok(GpSolution {
                objective_value: program.objective().eval(&values),
                values,
                status: if total_iters >= MAX_TOTAL_ITERS {
                    GpStatus::MaxIter
                } else {
                    GpStatus::Infeasible
                },
                iterations: total_iters,
                kkt_residual: f64::NAN,
                most_violated,
            });
        }
        y.copy_from_slice(&y1[..n]);
    }

    // Phase 2: barrier path on the real objective.
    let phase2 = BarrierProblem {
        objective: &lcp.objective,
        constraints: &lcp.constraints,
        bounds,
    };
    let (iters, converged, _) = phase2.solve(
        &mut y,
        MAX_TOTAL_ITERS.saturating_sub(total_iters),
        &mut |_: &[f64]| false,
    );
    total_iters += iters;

    let kkt = phase2.kkt_residual(&y);
    let values: Vec<f64> = y
        .iter()
        .zip(program.bounds())
        .map(|(&yi, &(lo, hi))| yi.exp().clamp(lo, hi))
        .collect();
    let feasible = program
        .constraints()
        .iter()
        .all(|c| c.eval(&values) <= 1.0 + FEAS_TOL);

    let status = if !converged {
        GpStatus::MaxIter
    } else if feasible && kkt <= KKT_TOL {
        GpStatus::Optimal
    } else {
        GpStatus::MaxIter
    };
    Ok(GpSolution {
        objective_value: program.objective().eval(&values),
        values,
        status,
        iterations: total_iters,
        kkt_residual: kkt,
        most_violated: None,
    })
}
