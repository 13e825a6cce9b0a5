//! LP relaxation of the packing integer program, plus the greedy fractional
//! solver for one-dimensional multiple-knapsack instances.
//!
//! The relaxation of an instance with option set V is
//!
//! ```text
//!   max  sum p[i,j] x[i,j]
//!   s.t. sum_i w[i,j][t] x[i,j] <= b[j][t]   for every bin j, dimension t
//!        sum_j x[i,j] <= 1                   for every item i
//!        x >= 0
//! ```
//!
//! with `x <= 1` implied by the item rows. All right-hand sides are
//! non-negative, so the all-slack basis is feasible and a single-phase
//! primal simplex suffices. Pivoting follows Bland's rule (lowest-index
//! entering column, lowest-index basic variable on ratio ties), which makes
//! the returned solution vector a deterministic function of the input —
//! the online algorithms replay against the actual vector, not just its
//! value.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, Variant};

/// Feasibility slack allowed on returned solutions.
pub const EPS_FEAS: f64 = 1e-9;
/// Optimality slack of the returned objective relative to the LP optimum.
pub const EPS_OPT: f64 = 1e-7;

const ENTER_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-11;

/// Values `x[i,j]` for every present option of the solved (sub-)instance;
/// absent options are implicitly zero. Keys are original item indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    values: BTreeMap<(usize, usize), f64>,
    objective: f64,
}

impl FractionalSolution {
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn value(&self, item: usize, bin: usize) -> f64 {
        self.values.get(&(item, bin)).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.values
    }

    /// The x-row of one item: `(bin, x)` pairs in ascending bin order.
    pub fn item_values(&self, item: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .range((item, 0)..=(item, usize::MAX))
            .map(|(&(_, j), &x)| (j, x))
    }

    /// `{"obj":..., "x":{"i,j":...}}` with 1-based item and bin indices.
    pub fn to_json_string(&self) -> String {
        let x: BTreeMap<String, f64> = self
            .values
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(&(i, j), &v)| (format!("{},{}", i + 1, j + 1), v))
            .collect();
        serde_json::to_string(&serde_json::json!({"obj": self.objective, "x": x}))
            .expect("solution serialization cannot fail")
    }
}

fn canonical_objective(
    values: &BTreeMap<(usize, usize), f64>,
    profit: impl Fn(usize, usize) -> f64,
) -> f64 {
    let mut total = 0.0;
    for (&(i, j), &x) in values {
        if x != 0.0 {
            total += profit(i, j) * x;
        }
    }
    total
}

/// Solves the LP relaxation of the whole instance.
pub fn solve_relaxation(instance: &Instance) -> Result<FractionalSolution> {
    let items: Vec<usize> = (0..instance.n()).collect();
    solve_restricted(instance, &items, None)
}

/// Solves the relaxation restricted to a sorted set of items, optionally
/// replacing the bin capacities (used by branch-and-bound on residual
/// subproblems). Item indices in the result stay in the instance's space.
pub(crate) fn solve_restricted(
    instance: &Instance,
    items: &[usize],
    capacities: Option<&[Vec<f64>]>,
) -> Result<FractionalSolution> {
    debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
    let caps = capacities.unwrap_or_else(|| instance.capacities());
    let d = instance.d();
    let m = instance.m();

    // variable layout: present options in (item, bin) order
    let mut vars: Vec<(usize, usize)> = Vec::new();
    for &i in items {
        for &j in instance.items()[i].options.keys() {
            vars.push((i, j));
        }
    }
    let nvars = vars.len();
    let mut values = BTreeMap::new();
    if nvars == 0 {
        return Ok(FractionalSolution {
            values,
            objective: 0.0,
        });
    }

    // rows: m*d capacity rows, then one row per item holding options
    let mut item_row: BTreeMap<usize, usize> = BTreeMap::new();
    for &(i, _) in &vars {
        let next = m * d + item_row.len();
        item_row.entry(i).or_insert(next);
    }
    let nrows = m * d + item_row.len();
    let width = nvars + nrows + 1;

    let mut tab = vec![0.0f64; nrows * width];
    let mut obj = vec![0.0f64; width];
    for (k, &(i, j)) in vars.iter().enumerate() {
        let opt = instance.option(i, j).expect("option listed but absent");
        for (t, &w) in opt.weights.iter().enumerate() {
            if w != 0.0 {
                tab[(j * d + t) * width + k] = w;
            }
        }
        tab[item_row[&i] * width + k] = 1.0;
        obj[k] = opt.profit;
    }
    for r in 0..nrows {
        tab[r * width + nvars + r] = 1.0;
        let rhs = if r < m * d { caps[r / d][r % d] } else { 1.0 };
        tab[r * width + width - 1] = rhs;
    }
    let mut basis: Vec<usize> = (nvars..nvars + nrows).collect();

    let max_iters = 200 + 50 * (nrows + nvars);
    let mut iters = 0;
    // Bland: enter at the first column with positive reduced cost
    while let Some(enter) = obj[..width - 1].iter().position(|&c| c > ENTER_TOL) {
        // ratio test; ties resolved toward the smallest basic variable index
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..nrows {
            let a = tab[r * width + enter];
            if a > PIVOT_TOL {
                let ratio = tab[r * width + width - 1] / a;
                match leave {
                    None => {
                        best = ratio;
                        leave = Some(r);
                    }
                    Some(l) => {
                        if ratio < best {
                            best = ratio;
                            leave = Some(r);
                        } else if ratio == best && basis[r] < basis[l] {
                            leave = Some(r);
                        }
                    }
                }
            }
        }
        let Some(pr) = leave else {
            return Err(Error::Internal("simplex: unbounded column".into()));
        };

        // pivot
        let pivot = tab[pr * width + enter];
        let (before, rest) = tab.split_at_mut(pr * width);
        let (prow, after) = rest.split_at_mut(width);
        let inv = 1.0 / pivot;
        for v in prow.iter_mut() {
            *v *= inv;
        }
        for row in before
            .chunks_exact_mut(width)
            .chain(after.chunks_exact_mut(width))
        {
            let factor = row[enter];
            if factor != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= factor * p;
                }
                row[enter] = 0.0;
            }
        }
        let factor = obj[enter];
        if factor != 0.0 {
            for (x, p) in obj.iter_mut().zip(prow.iter()) {
                *x -= factor * p;
            }
            obj[enter] = 0.0;
        }
        basis[pr] = enter;

        iters += 1;
        if iters > max_iters {
            return Err(Error::Internal("simplex: cycling guard exceeded".into()));
        }
    }

    let mut x = vec![0.0f64; nvars];
    for (r, &b) in basis.iter().enumerate() {
        if b < nvars {
            x[b] = tab[r * width + width - 1].clamp(0.0, 1.0);
        }
    }
    for (k, &(i, j)) in vars.iter().enumerate() {
        values.insert((i, j), x[k]);
    }
    let objective = canonical_objective(&values, |i, j| instance.option(i, j).unwrap().profit);
    Ok(FractionalSolution { values, objective })
}

/// Greedy optimal fractional solution for one-dimensional vmkp instances:
/// items sorted by profit density fill the aggregate capacity `m`, possibly
/// splitting one item. Matches `solve_relaxation` up to `EPS_OPT`.
pub fn greedy_fractional(instance: &Instance) -> Result<FractionalSolution> {
    if instance.variant() != Variant::Vmkp || instance.d() != 1 {
        return Err(Error::structural(
            "greedy_fractional requires the vmkp variant with d = 1",
        ));
    }
    let m = instance.m();
    let n = instance.n();

    let mut order: Vec<usize> = (0..n)
        .filter(|&i| instance.option(i, 0).is_some())
        .collect();
    let density = |i: usize| -> f64 {
        let opt = instance.option(i, 0).unwrap();
        let (w, p) = (opt.weights[0], opt.profit);
        if w == 0.0 {
            if p > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            p / w
        }
    };
    order.sort_by(|&a, &b| density(b).partial_cmp(&density(a)).unwrap().then(a.cmp(&b)));

    let mut fraction = vec![0.0f64; n];
    let mut remaining = m as f64;
    for &i in &order {
        let w = instance.option(i, 0).unwrap().weights[0];
        if w == 0.0 {
            fraction[i] = 1.0;
        } else if remaining > 0.0 {
            let take = (remaining / w).min(1.0);
            fraction[i] = take;
            remaining -= take * w;
        }
    }

    // distribute each item's fraction over the unit bins left to right
    let mut values = BTreeMap::new();
    let mut fill = vec![0.0f64; m];
    let mut cursor = 0usize;
    for &i in &order {
        let w = instance.option(i, 0).unwrap().weights[0];
        for j in 0..m {
            values.insert((i, j), 0.0);
        }
        if fraction[i] == 0.0 {
            continue;
        }
        if w == 0.0 {
            values.insert((i, 0), fraction[i]);
            continue;
        }
        let mut quantity = fraction[i] * w;
        while quantity > 0.0 && cursor < m {
            let room = 1.0 - fill[cursor];
            if room <= 0.0 {
                cursor += 1;
                continue;
            }
            let poured = quantity.min(room);
            values.insert((i, cursor), poured / w);
            fill[cursor] += poured;
            quantity -= poured;
            if fill[cursor] >= 1.0 {
                cursor += 1;
            }
        }
    }
    for i in 0..n {
        if instance.option(i, 0).is_some() {
            for j in 0..m {
                values.entry((i, j)).or_insert(0.0);
            }
        }
    }

    let objective = canonical_objective(&values, |i, j| instance.option(i, j).unwrap().profit);
    Ok(FractionalSolution { values, objective })
}

/// Randomized rounding of one item's x-row: returns bin `j` with
/// probability `x[i,j]` and `None` with the residual probability. Walks
/// bins in ascending index using a single uniform draw.
pub fn sample_tentative<R: Rng + ?Sized>(
    solution: &FractionalSolution,
    item: usize,
    rng: &mut R,
) -> Option<usize> {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (j, x) in solution.item_values(item) {
        cumulative += x;
        if u < cumulative {
            return Some(j);
        }
    }
    None
}
