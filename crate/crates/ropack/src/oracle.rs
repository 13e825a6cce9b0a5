//! Offline baselines: the exact integral optimum (exhaustive enumeration
//! for tiny instances, LP-pruned branch-and-bound beyond) and the LP upper
//! bound. Competitive ratios and most invariants are measured against these.
//!
//! Both exact solvers resolve profit ties toward the lexicographically
//! smallest assignment vector (item 0 first; "unpacked" sorts before bin 1),
//! so optimal packings are reproducible and the two methods agree on the
//! returned packing, not just its value. Profit comparisons are exact on
//! the stored doubles.

use crate::error::{Error, Result};
use crate::instance::{profit_of, Instance, Packing};
use crate::lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMethod {
    Enumeration,
    BranchAndBound,
    LpBoundOnly,
}

impl OptMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptMethod::Enumeration => "enumeration",
            OptMethod::BranchAndBound => "branch_and_bound",
            OptMethod::LpBoundOnly => "lp_bound_only",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub value: f64,
    pub packing: Option<Packing>,
    pub node_count: u64,
    pub method: OptMethod,
    /// Set when the node budget ran out: `value` is only a lower bound.
    pub lower_bound_only: bool,
}

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

fn assignment_packing(instance: &Instance, assignment: &[Option<usize>]) -> Result<Packing> {
    let mut packing = Packing::new(instance);
    for (i, slot) in assignment.iter().enumerate() {
        if let Some(j) = slot {
            packing.assign(instance, i, *j)?;
        }
    }
    Ok(packing)
}

/// `a` precedes `b` in assignment-vector order (`None` sorts first).
fn vector_less(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    let key = |s: &Option<usize>| s.map_or(0, |j| j + 1);
    for (x, y) in a.iter().zip(b.iter()) {
        if key(x) != key(y) {
            return key(x) < key(y);
        }
    }
    false
}

struct Enumerator<'a> {
    instance: &'a Instance,
    consumption: Vec<Vec<f64>>,
    assignment: Vec<Option<usize>>,
    best_value: f64,
    best_assignment: Vec<Option<usize>>,
    nodes: u64,
}

impl Enumerator<'_> {
    fn run(&mut self, item: usize, profit: f64) {
        self.nodes += 1;
        let n = self.instance.n();
        if item == n {
            // children are visited unpacked-first, so the first optimum seen
            // is the lexicographically smallest one
            if profit > self.best_value {
                self.best_value = profit;
                self.best_assignment = self.assignment.clone();
            }
            return;
        }
        self.run(item + 1, profit);
        let options: Vec<(usize, Vec<f64>, f64)> = self.instance.items()[item]
            .options
            .iter()
            .map(|(&j, o)| (j, o.weights.clone(), o.profit))
            .collect();
        for (j, weights, p) in options {
            let cap = self.instance.capacity(j);
            let fits = weights
                .iter()
                .zip(&self.consumption[j])
                .zip(cap)
                .all(|((w, c), b)| c + w <= *b);
            if !fits {
                continue;
            }
            for (c, w) in self.consumption[j].iter_mut().zip(&weights) {
                *c += w;
            }
            self.assignment[item] = Some(j);
            self.run(item + 1, profit + p);
            self.assignment[item] = None;
            for (c, w) in self.consumption[j].iter_mut().zip(&weights) {
                *c -= w;
            }
        }
    }
}

/// Exact optimum by exhausting every item-to-bin-or-none assignment.
/// Guarded to assignment spaces of at most 10^7.
pub fn opt_enumerate(instance: &Instance) -> Result<OptResult> {
    let space = ((instance.m() + 1) as f64).powi(instance.n() as i32);
    if space > 1e7 {
        return Err(Error::SizeGuard(format!(
            "enumeration space (m+1)^n = {space:.3e} exceeds 1e7"
        )));
    }
    let mut state = Enumerator {
        instance,
        consumption: vec![vec![0.0; instance.d()]; instance.m()],
        assignment: vec![None; instance.n()],
        best_value: 0.0,
        best_assignment: vec![None; instance.n()],
        nodes: 0,
    };
    state.run(0, 0.0);
    let packing = assignment_packing(instance, &state.best_assignment)?;
    let value = profit_of(instance, &packing)?;
    Ok(OptResult {
        value,
        packing: Some(packing),
        node_count: state.nodes,
        method: OptMethod::Enumeration,
        lower_bound_only: false,
    })
}

struct BranchBound<'a> {
    instance: &'a Instance,
    order: Vec<usize>,
    consumption: Vec<Vec<f64>>,
    assignment: Vec<Option<usize>>,
    best_value: f64,
    best_assignment: Vec<Option<usize>>,
    nodes: u64,
    budget: u64,
    truncated: bool,
}

impl BranchBound<'_> {
    fn canonical_profit(&self) -> f64 {
        let mut total = 0.0;
        for (i, slot) in self.assignment.iter().enumerate() {
            if let Some(j) = slot {
                total += self.instance.option(i, *j).unwrap().profit;
            }
        }
        total
    }

    fn residual_bound(&self, depth: usize, profit: f64) -> Result<f64> {
        let mut remaining: Vec<usize> = self.order[depth..].to_vec();
        if remaining.is_empty() {
            return Ok(profit);
        }
        remaining.sort_unstable();
        let residual: Vec<Vec<f64>> = self
            .instance
            .capacities()
            .iter()
            .zip(&self.consumption)
            .map(|(cap, used)| {
                cap.iter()
                    .zip(used)
                    .map(|(b, c)| (b - c).max(0.0))
                    .collect()
            })
            .collect();
        let sol = lp::solve_restricted(self.instance, &remaining, Some(&residual))?;
        Ok(profit + sol.objective())
    }

    fn run(&mut self, depth: usize, profit: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.truncated = true;
            return Ok(());
        }
        if depth == self.order.len() {
            let value = self.canonical_profit();
            if value > self.best_value
                || (value == self.best_value
                    && vector_less(&self.assignment, &self.best_assignment))
            {
                self.best_value = value;
                self.best_assignment = self.assignment.clone();
            }
            return Ok(());
        }
        let item = self.order[depth];

        // children: feasible bins in index order, then "leave unpacked";
        // explored best-bound-first so good incumbents arrive early
        let mut children: Vec<(Option<usize>, f64)> = Vec::new();
        let opts: Vec<(usize, f64)> = self.instance.items()[item]
            .options
            .iter()
            .map(|(&j, o)| (j, o.profit))
            .collect();
        for (j, p) in opts {
            let cap = self.instance.capacity(j);
            let opt = self.instance.option(item, j).unwrap();
            let fits = opt
                .weights
                .iter()
                .zip(&self.consumption[j])
                .zip(cap)
                .all(|((w, c), b)| c + w <= *b);
            if !fits {
                continue;
            }
            for (c, w) in self.consumption[j].iter_mut().zip(&opt.weights) {
                *c += w;
            }
            let bound = self.residual_bound(depth + 1, profit + p)?;
            let weights = opt.weights.clone();
            for (c, w) in self.consumption[j].iter_mut().zip(&weights) {
                *c -= w;
            }
            children.push((Some(j), bound));
        }
        children.push((None, self.residual_bound(depth + 1, profit)?));
        children.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());

        for (choice, bound) in children {
            let margin = lp::EPS_OPT * self.best_value.abs().max(1.0);
            if bound < self.best_value - margin {
                continue;
            }
            match choice {
                Some(j) => {
                    let weights = self.instance.option(item, j).unwrap().weights.clone();
                    let p = self.instance.option(item, j).unwrap().profit;
                    for (c, w) in self.consumption[j].iter_mut().zip(&weights) {
                        *c += w;
                    }
                    self.assignment[item] = Some(j);
                    self.run(depth + 1, profit + p)?;
                    self.assignment[item] = None;
                    for (c, w) in self.consumption[j].iter_mut().zip(&weights) {
                        *c -= w;
                    }
                }
                None => self.run(depth + 1, profit)?,
            }
            if self.truncated {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// Exact optimum by depth-first branch-and-bound with LP pruning. Items are
/// branched in order of decreasing maximum profit. If the node budget runs
/// out the best packing found so far is returned with `lower_bound_only`
/// set; the result is never silently wrong.
pub fn opt_branch_bound(instance: &Instance, node_budget: u64) -> Result<OptResult> {
    let mut order: Vec<usize> = (0..instance.n())
        .filter(|&i| !instance.items()[i].options.is_empty())
        .collect();
    let max_profit = |i: usize| {
        instance.items()[i]
            .options
            .values()
            .map(|o| o.profit)
            .fold(0.0f64, f64::max)
    };
    order.sort_by(|&a, &b| {
        max_profit(b)
            .partial_cmp(&max_profit(a))
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut state = BranchBound {
        instance,
        order,
        consumption: vec![vec![0.0; instance.d()]; instance.m()],
        assignment: vec![None; instance.n()],
        best_value: 0.0,
        best_assignment: vec![None; instance.n()],
        nodes: 0,
        budget: node_budget,
        truncated: false,
    };
    state.run(0, 0.0)?;
    let packing = assignment_packing(instance, &state.best_assignment)?;
    let value = profit_of(instance, &packing)?;
    Ok(OptResult {
        value,
        packing: Some(packing),
        node_count: state.nodes,
        method: OptMethod::BranchAndBound,
        lower_bound_only: state.truncated,
    })
}

/// Objective of the LP relaxation; dominates every integral packing.
pub fn lp_upper_bound(instance: &Instance) -> Result<f64> {
    Ok(lp::solve_relaxation(instance)?.objective())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{is_feasible, Item, PackingOption, SplitCriterion, Variant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opt(w: &[f64], p: f64) -> PackingOption {
        PackingOption::new(w.to_vec(), p)
    }

    fn three_item_instance() -> Instance {
        let items = vec![
            Item::new([(0, opt(&[1.0], 1.0))].into()),
            Item::new([(0, opt(&[0.4], 0.5))].into()),
            Item::new([(0, opt(&[0.5], 0.6))].into()),
        ];
        Instance::new(1, vec![vec![1.0]], items, Variant::General).unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize, d_max: usize) -> Instance {
        let n = (rng.random::<u32>() as usize % (n_max + 1)).max(1);
        let m = 1 + rng.random::<u32>() as usize % m_max;
        let d = 1 + rng.random::<u32>() as usize % d_max;
        let mut items = Vec::with_capacity(n);
        for _ in 0..n {
            let mut options = std::collections::BTreeMap::new();
            for j in 0..m {
                if rng.random::<f64>() < 0.85 {
                    let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                    options.insert(j, PackingOption::new(w, rng.random::<f64>()));
                }
            }
            items.push(Item::new(options));
        }
        Instance::new(d, vec![vec![1.0; d]; m], items, Variant::General).unwrap()
    }

    #[test]
    fn empty_instance() {
        let inst = Instance::new(1, vec![vec![1.0]], vec![], Variant::General).unwrap();
        let r = opt_enumerate(&inst).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(lp_upper_bound(&inst).unwrap(), 0.0);
    }

    #[test]
    fn three_item_opt() {
        let inst = three_item_instance();
        let r = opt_enumerate(&inst).unwrap();
        assert_eq!(r.value, 0.5 + 0.6);
        assert!((r.value - 1.1).abs() < 1e-12);
        let packing = r.packing.unwrap();
        assert_eq!(packing.assignments(), &[(1, 0), (2, 0)]);
        // the LP bound 1.2 dominates
        assert!(lp_upper_bound(&inst).unwrap() >= r.value - 1e-7);
    }

    #[test]
    fn conflicting_pair_takes_argmax() {
        let items = vec![
            Item::new([(0, opt(&[0.8], 3.0))].into()),
            Item::new([(0, opt(&[0.8], 5.0))].into()),
        ];
        let inst = Instance::new(1, vec![vec![1.0]], items, Variant::General).unwrap();
        let r = opt_enumerate(&inst).unwrap();
        assert_eq!(r.value, 5.0);
        let b = opt_branch_bound(&inst, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(b.value, 5.0);
        assert_eq!(b.packing.unwrap().assignments(), &[(1, 0)]);
    }

    #[test]
    fn lp_tight_on_disjoint_heavy_fits() {
        let items = vec![
            Item::new([(0, opt(&[1.0], 2.0))].into()),
            Item::new([(1, opt(&[1.0], 3.0))].into()),
        ];
        let inst = Instance::new(1, vec![vec![1.0], vec![1.0]], items, Variant::General).unwrap();
        let r = opt_branch_bound(&inst, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.value, 5.0);
        assert!((lp_upper_bound(&inst).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn branch_bound_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0B0B);
        for _ in 0..150 {
            let inst = random_instance(&mut rng, 9, 3, 3);
            let e = opt_enumerate(&inst).unwrap();
            let b = opt_branch_bound(&inst, DEFAULT_NODE_BUDGET).unwrap();
            assert!(!b.lower_bound_only);
            assert_eq!(e.value, b.value, "instance {}", inst.to_json_string());
            assert_eq!(
                e.packing.as_ref().unwrap().assignments(),
                b.packing.as_ref().unwrap().assignments(),
                "tie resolution diverged on {}",
                inst.to_json_string()
            );
            assert!(is_feasible(&inst, e.packing.as_ref().unwrap()).unwrap());
        }
    }

    #[test]
    fn split_superadditivity_and_lp_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for _ in 0..60 {
            let inst = random_instance(&mut rng, 7, 2, 2);
            let whole = opt_enumerate(&inst).unwrap().value;
            let (heavy, light) = inst.split(SplitCriterion::HeavyLight).unwrap();
            let h = opt_enumerate(&heavy).unwrap().value;
            let l = opt_enumerate(&light).unwrap().value;
            assert!(
                h + l >= whole - 1e-12,
                "OPT(heavy)={h} OPT(light)={l} OPT={whole}"
            );
            assert!(lp_upper_bound(&inst).unwrap() >= whole - 1e-7);
        }
    }

    #[test]
    fn tie_heavy_instances_resolve_identically() {
        // every packing of value 2.0 ties; both oracles must settle on the
        // lexicographically smallest assignment vector
        let items: Vec<Item> = (0..6)
            .map(|_| Item::new([(0, opt(&[0.5], 1.0)), (1, opt(&[0.5], 1.0))].into()))
            .collect();
        let inst = Instance::new(1, vec![vec![1.0], vec![1.0]], items, Variant::General).unwrap();
        let e = opt_enumerate(&inst).unwrap();
        let b = opt_branch_bound(&inst, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(e.value, 4.0);
        assert_eq!(b.value, 4.0);
        assert_eq!(
            e.packing.as_ref().unwrap().assignments(),
            b.packing.as_ref().unwrap().assignments()
        );
        // unpacked sorts before any bin, so the smallest optimal vector
        // leaves items 0 and 1 out and packs the remaining four
        assert_eq!(
            e.packing.as_ref().unwrap().assignments(),
            &[(2, 0), (3, 0), (4, 1), (5, 1)]
        );
    }

    #[test]
    fn enumeration_guard() {
        let items = (0..30)
            .map(|_| Item::new([(0, opt(&[0.1], 1.0))].into()))
            .collect();
        let inst = Instance::new(1, vec![vec![1.0]], items, Variant::General).unwrap();
        assert!(matches!(opt_enumerate(&inst), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn node_budget_flags_lower_bound() {
        let items = (0..8)
            .map(|k| Item::new([(0, opt(&[0.3], 1.0 + k as f64)), (1, opt(&[0.4], 2.0))].into()))
            .collect();
        let inst = Instance::new(1, vec![vec![1.0], vec![1.0]], items, Variant::General).unwrap();
        let full = opt_branch_bound(&inst, DEFAULT_NODE_BUDGET).unwrap();
        assert!(full.node_count > 3);
        let starved = opt_branch_bound(&inst, 3).unwrap();
        assert!(starved.lower_bound_only);
        assert!(starved.value <= full.value);
        // even truncated results report a feasible packing
        assert!(is_feasible(&inst, starved.packing.as_ref().unwrap()).unwrap());
    }
}
