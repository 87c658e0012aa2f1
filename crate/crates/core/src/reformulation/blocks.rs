//! Building blocks shared by the master, Benders master, monolithic and deterministic models.

use crate::model::{Grid, MomentVariant};
use crate::solver::{Cmp, LinearModel, SolveResult, VarRef};

use super::scaled::ScaledData;

pub type Refs2 = Vec<Vec<VarRef>>;

/// `x`, `y` and, for the capacity moment, range indicators `e[i][t][r]`.
#[derive(Debug, Clone)]
pub struct FirstStageVars {
    pub x: Refs2,
    pub y: Refs2,
    pub e: Option<Vec<Refs2>>,
}

/// Setup and capacity decisions with `y ≤ C̄x`, `x_t ≥ x_{t−1}` and their costs.
pub fn add_first_stage(m: &mut LinearModel, d: &ScaledData, variant: MomentVariant) -> FirstStageVars {
    let mut x = Vec::with_capacity(d.ns);
    let mut y = Vec::with_capacity(d.ns);
    for i in 0..d.ns {
        let mut xi = Vec::with_capacity(d.nt);
        let mut yi = Vec::with_capacity(d.nt);
        for t in 0..d.nt {
            // Σ_t c^F_t (x_t − x_{t−1}) with x_0 = 0 gives x_t the coefficient c^F_t − c^F_{t+1}.
            let next = if t + 1 < d.nt { d.setup[i][t + 1] } else { 0.0 };
            xi.push(m.binary(format!("x({i},{t})"), d.setup[i][t] - next));
            yi.push(m.continuous(format!("y({i},{t})"), 0.0, d.capacity_limit[i][t], d.capacity_cost[i][t]));
        }
        for t in 0..d.nt {
            m.add_constraint(
                format!("cap_open({i},{t})"),
                [(yi[t], 1.0), (xi[t], -d.capacity_limit[i][t])],
                Cmp::Le,
                0.0,
            );
            if t > 0 {
                m.add_constraint(format!("keep_open({i},{t})"), [(xi[t], 1.0), (xi[t - 1], -1.0)], Cmp::Ge, 0.0);
            }
        }
        x.push(xi);
        y.push(yi);
    }

    let e = match (variant, &d.capacity_moment) {
        (MomentVariant::Capacity, Some(cap)) => {
            let mut e = Vec::with_capacity(d.ns);
            for i in 0..d.ns {
                let mut ei = Vec::with_capacity(d.nt);
                let mut cum_limit = 0.0;
                for t in 0..d.nt {
                    cum_limit += d.capacity_limit[i][t];
                    let ranges = &cap.ranges[i][t];
                    let big = cum_limit.max(ranges.iter().map(|r| r.lower).fold(0.0, f64::max));
                    let cumulative: Vec<(VarRef, f64)> = (0..=t).map(|k| (y[i][k], 1.0)).collect();
                    let eit: Vec<VarRef> = (0..ranges.len()).map(|r| m.binary(format!("e({i},{t},{r})"), 0.0)).collect();
                    for (r, range) in ranges.iter().enumerate() {
                        // l − M(1 − e) ≤ Σ y  and  Σ y ≤ u + M(1 − e)
                        let mut lo = cumulative.clone();
                        lo.push((eit[r], -big));
                        m.add_constraint(format!("range_lo({i},{t},{r})"), lo, Cmp::Ge, range.lower - big);
                        if let Some(u) = range.upper {
                            let mut hi = cumulative.clone();
                            hi.push((eit[r], big));
                            m.add_constraint(format!("range_hi({i},{t},{r})"), hi, Cmp::Le, u + big);
                        }
                    }
                    m.add_constraint(format!("one_range({i},{t})"), eit.iter().map(|&v| (v, 1.0)), Cmp::Eq, 1.0);
                    ei.push(eit);
                }
                e.push(ei);
            }
            Some(e)
        }
        _ => None,
    };
    FirstStageVars { x, y, e }
}

impl FirstStageVars {
    /// Binary selector `(i, r)` at period `t`: `x_it` or `e_itr`.
    pub fn selector(&self, i: usize, r: usize, t: usize) -> VarRef {
        match &self.e {
            Some(e) => e[i][t][r],
            None => self.x[i][t],
        }
    }
}

/// Moment duals with the McCormick products and, for capped uplifts, `Υ` and `a`.
#[derive(Debug, Clone)]
pub struct MomentVars {
    pub beta1: Refs2,
    pub beta2: Refs2,
    /// `[i][r][j][t]`
    pub phi1: Vec<Vec<Refs2>>,
    pub phi2: Vec<Vec<Refs2>>,
    pub upsilon1: Option<Refs2>,
    pub upsilon2: Option<Refs2>,
    pub cap_active: Option<Refs2>,
    /// Every variable carrying a moment term in the objective.
    pub priced: Vec<VarRef>,
}

/// Adds `β¹, β² ∈ [0, β̄]`, the McCormick envelope of selector·β, and the moment terms
/// `(μ̄+ε)β¹ − (μ̄−ε)β² + μ̄(U¹ − U²)` with `U` the linearized uplift products.
pub fn add_moment_block(
    m: &mut LinearModel,
    d: &ScaledData,
    variant: MomentVariant,
    bounded: bool,
    fs: &FirstStageVars,
) -> MomentVars {
    let (nd, nt) = (d.nd, d.nt);
    let mut priced = Vec::new();
    let mut beta1 = vec![Vec::with_capacity(nt); nd];
    let mut beta2 = vec![Vec::with_capacity(nt); nd];
    for j in 0..nd {
        for t in 0..nt {
            let (mu, eps) = (d.base_mean[j][t], d.epsilon[j][t]);
            let b1 = m.continuous(format!("beta1({j},{t})"), 0.0, d.beta_bar1[j][t], mu + eps);
            let b2 = m.continuous(format!("beta2({j},{t})"), 0.0, d.beta_bar2[j][t], -(mu - eps));
            beta1[j].push(b1);
            beta2[j].push(b2);
            priced.push(b1);
            priced.push(b2);
        }
    }

    let mut phi1 = Vec::with_capacity(d.ns);
    let mut phi2 = Vec::with_capacity(d.ns);
    for i in 0..d.ns {
        let nr = d.range_count(variant, i);
        let mut p1 = Vec::with_capacity(nr);
        let mut p2 = Vec::with_capacity(nr);
        for r in 0..nr {
            let mut q1 = vec![Vec::with_capacity(nt); nd];
            let mut q2 = vec![Vec::with_capacity(nt); nd];
            for j in 0..nd {
                for t in 0..nt {
                    let sel = fs.selector(i, r, t);
                    let coef = d.impact(variant, i, r, j) * d.base_mean[j][t];
                    for (mi, (beta, bar, store, sign)) in [
                        (beta1[j][t], d.beta_bar1[j][t], &mut q1, 1.0),
                        (beta2[j][t], d.beta_bar2[j][t], &mut q2, -1.0),
                    ]
                    .into_iter()
                    .enumerate()
                    {
                        let obj = if bounded { 0.0 } else { sign * coef };
                        let phi = m.continuous(format!("phi{}({i},{r},{j},{t})", mi + 1), 0.0, bar, obj);
                        m.add_constraint(format!("mc_a{}({i},{r},{j},{t})", mi + 1), [(phi, 1.0), (sel, -bar)], Cmp::Le, 0.0);
                        m.add_constraint(format!("mc_b{}({i},{r},{j},{t})", mi + 1), [(phi, 1.0), (beta, -1.0)], Cmp::Le, 0.0);
                        m.add_constraint(
                            format!("mc_c{}({i},{r},{j},{t})", mi + 1),
                            [(phi, 1.0), (beta, -1.0), (sel, -bar)],
                            Cmp::Ge,
                            -bar,
                        );
                        if !bounded {
                            priced.push(phi);
                        }
                        store[j].push(phi);
                    }
                }
            }
            p1.push(q1);
            p2.push(q2);
        }
        phi1.push(p1);
        phi2.push(p2);
    }

    let (mut upsilon1, mut upsilon2, mut cap_active) = (None, None, None);
    if bounded {
        let bound = d.bound.as_ref().expect("bounded moment without bound data");
        let mut u1 = vec![Vec::with_capacity(nt); nd];
        let mut u2 = vec![Vec::with_capacity(nt); nd];
        let mut act = vec![Vec::with_capacity(nt); nd];
        for j in 0..nd {
            for t in 0..nt {
                let mu = d.base_mean[j][t];
                let b = bound[j][t];
                let ups1 = m.continuous(format!("ups1({j},{t})"), 0.0, f64::INFINITY, mu);
                let ups2 = m.continuous(format!("ups2({j},{t})"), 0.0, f64::INFINITY, -mu);
                let a = m.binary(format!("a({j},{t})"), 0.0);
                priced.push(ups1);
                priced.push(ups2);

                let mut uplift = Vec::new();
                let mut prod1 = Vec::new();
                let mut prod2 = Vec::new();
                let mut max_uplift = 0.0;
                for i in 0..d.ns {
                    let nr = d.range_count(variant, i);
                    let mut best = 0.0f64;
                    for r in 0..nr {
                        let c = d.impact(variant, i, r, j);
                        best = best.max(c);
                        uplift.push((fs.selector(i, r, t), c));
                        prod1.push((phi1[i][r][j][t], c));
                        prod2.push((phi2[i][r][j][t], c));
                    }
                    max_uplift += best;
                }
                let m_a = max_uplift.max(b) + 1.0;
                let bar1 = d.beta_bar1[j][t];
                // Σλx ≤ B̄ + M a
                let mut row = uplift.clone();
                row.push((a, -m_a));
                m.add_constraint(format!("cap_on({j},{t})"), row, Cmp::Le, b);
                // Σλx ≥ B̄ − M(1 − a)
                let mut row = uplift;
                row.push((a, -b));
                m.add_constraint(format!("cap_on_rev({j},{t})"), row, Cmp::Ge, 0.0);
                // Σλ Φ¹ ≤ Υ¹ + M a
                let mut row = prod1.clone();
                row.push((ups1, -1.0));
                row.push((a, -(max_uplift * bar1 + 1.0)));
                m.add_constraint(format!("ups1_lin({j},{t})"), row, Cmp::Le, 0.0);
                // B̄ β¹ ≤ Υ¹ + M(1 − a)
                let big = b * bar1 + 1.0;
                m.add_constraint(
                    format!("ups1_cap({j},{t})"),
                    [(beta1[j][t], b), (ups1, -1.0), (a, big)],
                    Cmp::Le,
                    big,
                );
                // Σλ Φ² ≥ Υ²,  B̄ β² ≥ Υ²
                let mut row = prod2;
                row.push((ups2, -1.0));
                m.add_constraint(format!("ups2_lin({j},{t})"), row, Cmp::Ge, 0.0);
                m.add_constraint(format!("ups2_cap({j},{t})"), [(beta2[j][t], b), (ups2, -1.0)], Cmp::Ge, 0.0);
                u1[j].push(ups1);
                u2[j].push(ups2);
                act[j].push(a);
            }
        }
        upsilon1 = Some(u1);
        upsilon2 = Some(u2);
        cap_active = Some(act);
    }

    MomentVars {
        beta1,
        beta2,
        phi1,
        phi2,
        upsilon1,
        upsilon2,
        cap_active,
        priced,
    }
}

/// Recourse variables of one scenario inside a single-level model.
#[derive(Debug, Clone)]
pub struct RecourseVars {
    pub h: Refs2,
    pub v: Refs2,
    /// `[source][demand][t]`
    pub z: Vec<Refs2>,
}

/// Operating cost terms `c^P h + c^I v + c^T z` of period `t`.
pub fn operating_terms(d: &ScaledData, r: &RecourseVars, t: usize) -> Vec<(VarRef, f64)> {
    let mut terms = Vec::new();
    for i in 0..d.ns {
        terms.push((r.h[i][t], d.production[i][t]));
    }
    for p in 0..d.np {
        terms.push((r.v[p][t], d.import[p][t]));
    }
    for s in 0..d.n_sources() {
        for j in 0..d.nd {
            terms.push((r.z[s][j][t], d.transport[s][j][t]));
        }
    }
    terms
}

/// Production, import and flow variables with capacity, balance and demand rows.
/// `demand[j][t]` gives the right-hand side of the demand rows as terms plus constant.
pub fn add_recourse(
    m: &mut LinearModel,
    d: &ScaledData,
    tag: &str,
    y: &Refs2,
    demand: &dyn Fn(usize, usize) -> (Vec<(VarRef, f64)>, f64),
) -> RecourseVars {
    let (ns, np, nd, nt) = (d.ns, d.np, d.nd, d.nt);
    let h: Refs2 = (0..ns)
        .map(|i| (0..nt).map(|t| m.continuous(format!("h{tag}({i},{t})"), 0.0, f64::INFINITY, 0.0)).collect())
        .collect();
    let v: Refs2 = (0..np)
        .map(|p| (0..nt).map(|t| m.continuous(format!("v{tag}({p},{t})"), 0.0, f64::INFINITY, 0.0)).collect())
        .collect();
    let z: Vec<Refs2> = (0..ns + np)
        .map(|s| {
            (0..nd)
                .map(|j| (0..nt).map(|t| m.continuous(format!("z{tag}({s},{j},{t})"), 0.0, f64::INFINITY, 0.0)).collect())
                .collect()
        })
        .collect();
    for t in 0..nt {
        for i in 0..ns {
            let mut row = vec![(h[i][t], 1.0)];
            row.extend((0..=t).map(|k| (y[i][k], -d.conversion)));
            m.add_constraint(format!("prod_cap{tag}({i},{t})"), row, Cmp::Le, 0.0);
            let mut row = vec![(h[i][t], 1.0)];
            row.extend((0..nd).map(|j| (z[i][j][t], -1.0)));
            m.add_constraint(format!("prod_out{tag}({i},{t})"), row, Cmp::Eq, 0.0);
        }
        for p in 0..np {
            let mut row = vec![(v[p][t], 1.0)];
            row.extend((0..nd).map(|j| (z[ns + p][j][t], -1.0)));
            m.add_constraint(format!("imp_out{tag}({p},{t})"), row, Cmp::Eq, 0.0);
        }
        for j in 0..nd {
            let (extra, rhs) = demand(j, t);
            let mut row: Vec<(VarRef, f64)> = (0..ns + np).map(|s| (z[s][j][t], 1.0)).collect();
            row.extend(extra.into_iter().map(|(v, c)| (v, -c)));
            m.add_constraint(format!("demand{tag}({j},{t})"), row, Cmp::Eq, rhs);
        }
    }
    RecourseVars { h, v, z }
}

pub fn values2(res: &SolveResult, refs: &Refs2, f: f64) -> Grid {
    refs.iter().map(|row| row.iter().map(|&v| res.value(v) * f).collect()).collect()
}
