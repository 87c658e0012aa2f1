use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

/// Handle to a variable of one [`LinearModel`]; the index is its insertion position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef(pub(crate) usize);

impl VarRef {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarRef, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// A linear or mixed-binary program built in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub name: String,
    pub sense: Sense,
    pub offset: f64,
    vars: Vec<Variable>,
    cons: Vec<Constraint>,
}

impl LinearModel {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            sense,
            offset: 0.0,
            vars: Vec::new(),
            cons: Vec::new(),
        }
    }

    /// Adds a variable. Binary variables are clamped to `[0, 1]`.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> VarRef {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
            objective,
        });
        VarRef(self.vars.len() - 1)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> VarRef {
        self.add_var(name, VarKind::Continuous, lower, upper, objective)
    }

    pub fn binary(&mut self, name: impl Into<String>, objective: f64) -> VarRef {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, objective)
    }

    /// Adds `Σ terms cmp rhs`. Repeated variables are merged and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarRef, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(VarRef, f64)> = Vec::new();
        for (v, c) in terms {
            assert!(v.0 < self.vars.len(), "constraint references unknown variable");
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some((_, acc)) => *acc += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.cons.push(Constraint {
            name: name.into(),
            terms: merged,
            cmp,
            rhs,
        });
        self.cons.len() - 1
    }

    pub fn set_objective(&mut self, var: VarRef, coefficient: f64) {
        self.vars[var.0].objective = coefficient;
    }

    pub fn add_objective(&mut self, var: VarRef, coefficient: f64) {
        self.vars[var.0].objective += coefficient;
    }

    pub fn set_bounds(&mut self, var: VarRef, lower: f64, upper: f64) {
        self.vars[var.0].lower = lower;
        self.vars[var.0].upper = upper;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    pub fn is_mip(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Binary)
    }

    /// Objective value of an assignment, offset included.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.offset
            + self
                .vars
                .iter()
                .zip(values)
                .map(|(v, x)| v.objective * x)
                .sum::<f64>()
    }

    /// Largest absolute violation of bounds, rows or integrality by an assignment.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if v.kind == VarKind::Binary {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for c in &self.cons {
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v.0]).sum();
            let gap = match c.cmp {
                Cmp::Le => lhs - c.rhs,
                Cmp::Ge => c.rhs - lhs,
                Cmp::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}
