//! The bundled verification suite: each check re-derives its expectations
//! independently (exhaustive oracles, replayed traces, rational arithmetic)
//! and reports one pass/fail outcome. `ropack bench` and the `acceptance`
//! integration test both run these.

use std::time::Instant;

use rand::Rng;

use crate::hardgen::{
    self, gen_lower_bound, gen_random, EpsilonMode, LowerBoundInstance, RandomInstanceParams,
};
use crate::harness::{self, run_single_trial, run_trials, Algorithm, TrialConfig};
use crate::instance::{
    classify_dense, classify_heavy, is_feasible, profit_of, Density, Heaviness, Instance, Packing,
    Variant,
};
use crate::lp;
use crate::matching::{max_weight_matching, FeasibilityGraph};
use crate::online::{phase_boundary, Phase, PhaseParams, RunTrace};
use crate::oracle;
use crate::parallel;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:<4} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.details
        )
    }
}

pub type CriterionFn = fn(usize) -> CriterionOutcome;

/// The suite in execution order, addressable by id.
pub fn criteria() -> Vec<(&'static str, CriterionFn)> {
    vec![
        ("1", criterion_1_oracle_exactness as CriterionFn),
        ("2", criterion_2_lp_dominance),
        ("3", criterion_3_matching_oracle),
        ("4", criterion_4_online_invariants),
        ("5", criterion_5_blocked_rounds),
        ("6a", criterion_6a_gap_d1),
        ("6b", criterion_6b_vgap_d2),
        ("6c", criterion_6c_vmkp_d1),
        ("7", criterion_7_lower_bound_family),
        ("8", criterion_8_determinism),
    ]
}

/// Runs every criterion; `jobs = 0` uses the default thread pool.
pub fn run_all(jobs: usize) -> Vec<CriterionOutcome> {
    criteria().into_iter().map(|(_, f)| f(jobs)).collect()
}

fn outcome(
    id: &'static str,
    name: &'static str,
    started: Instant,
    passed: bool,
    details: String,
) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        details,
        seconds: started.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------------------
// shared corpora
// ---------------------------------------------------------------------------

/// Small instances exhaustible by enumeration: n <= 10, m <= 3, d <= 3,
/// variants cycling.
fn small_oracle_corpus(count: usize, master_seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|k| {
            let mut rng = harness::trial_rng(master_seed, k as u64);
            let n = 1 + (rng.random::<u32>() as usize) % 10;
            let m = 1 + (rng.random::<u32>() as usize) % 3;
            let d = 1 + (rng.random::<u32>() as usize) % 3;
            let variant = match k % 3 {
                0 => Variant::General,
                1 => Variant::ZeroOne,
                _ => Variant::Vmkp,
            };
            let mut params = RandomInstanceParams::new(n, m, d, variant);
            params.option_density = 0.85;
            params.heavy_fraction = 0.4;
            gen_random(&params, &mut rng).expect("corpus generation")
        })
        .collect()
}

// ---------------------------------------------------------------------------
// criterion 1 + 2: the exact oracles and the LP against them
// ---------------------------------------------------------------------------

pub fn criterion_1_oracle_exactness(jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let corpus = small_oracle_corpus(1000, 101);
    let failures: usize = parallel::map_indexed(corpus.len(), jobs, |k| {
        let inst = &corpus[k];
        let e = oracle::opt_enumerate(inst).expect("enumeration");
        let b = oracle::opt_branch_bound(inst, oracle::DEFAULT_NODE_BUDGET).expect("bb");
        usize::from(b.lower_bound_only || e.value != b.value)
    })
    .into_iter()
    .sum();
    let seconds = started.elapsed().as_secs_f64();
    let passed = failures == 0 && seconds < 60.0;
    outcome(
        "1",
        "oracle exactness (branch-and-bound == enumeration, bitwise)",
        started,
        passed,
        format!("{failures} mismatches over 1000 instances, {seconds:.1}s (< 60s required)"),
    )
}

pub fn criterion_2_lp_dominance(jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let corpus = small_oracle_corpus(1000, 101);
    let failures: usize = parallel::map_indexed(corpus.len(), jobs, |k| {
        let inst = &corpus[k];
        let opt = oracle::opt_enumerate(inst).expect("enumeration").value;
        let sol = lp::solve_relaxation(inst).expect("lp");
        let mut bad = sol.objective() < opt - 1e-7;
        // constraint residuals within EPS_FEAS
        for (&(_, _), &x) in sol.values() {
            if !(-lp::EPS_FEAS..=1.0 + lp::EPS_FEAS).contains(&x) {
                bad = true;
            }
        }
        for i in 0..inst.n() {
            let row: f64 = sol.item_values(i).map(|(_, x)| x).sum();
            if row > 1.0 + lp::EPS_FEAS {
                bad = true;
            }
        }
        for j in 0..inst.m() {
            for t in 0..inst.d() {
                let used: f64 = (0..inst.n())
                    .filter_map(|i| inst.option(i, j).map(|o| o.weights[t] * sol.value(i, j)))
                    .sum();
                let b = inst.capacity(j)[t];
                if used > b + lp::EPS_FEAS * b.max(1.0) {
                    bad = true;
                }
            }
        }
        usize::from(bad)
    })
    .into_iter()
    .sum();
    outcome(
        "2",
        "LP dominance and feasibility residuals",
        started,
        failures == 0,
        format!("{failures} violations over 1000 instances (tol 1e-7 / 1e-9)"),
    )
}

// ---------------------------------------------------------------------------
// criterion 3: matching against exhaustive search
// ---------------------------------------------------------------------------

/// Exhaustive maximum-weight matching with profits folded in item order.
fn brute_force_matching_weight(n_items: usize, edges: &[(usize, usize, f64)]) -> f64 {
    fn recurse(
        item: usize,
        n_items: usize,
        by_item: &[Vec<(usize, f64)>],
        bins_used: &mut Vec<bool>,
        weight: f64,
        best: &mut f64,
    ) {
        if item == n_items {
            if weight > *best {
                *best = weight;
            }
            return;
        }
        recurse(item + 1, n_items, by_item, bins_used, weight, best);
        for &(j, p) in &by_item[item] {
            if p > 0.0 && !bins_used[j] {
                bins_used[j] = true;
                recurse(item + 1, n_items, by_item, bins_used, weight + p, best);
                bins_used[j] = false;
            }
        }
    }
    let mut by_item = vec![Vec::new(); n_items];
    let mut n_bins = 0;
    for &(i, j, p) in edges {
        by_item[i].push((j, p));
        n_bins = n_bins.max(j + 1);
    }
    let mut best = 0.0;
    recurse(
        0,
        n_items,
        &by_item,
        &mut vec![false; n_bins],
        0.0,
        &mut best,
    );
    best
}

pub fn criterion_3_matching_oracle(jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let failures: usize = parallel::map_indexed(1000, jobs, |k| {
        let mut rng = harness::trial_rng(303, k as u64);
        let n = 1 + (rng.random::<u32>() as usize) % 7;
        let m = 1 + (rng.random::<u32>() as usize) % 7;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if rng.random::<f64>() < 0.5 {
                    let p = if rng.random::<f64>() < 0.1 {
                        0.0
                    } else {
                        rng.random::<f64>() * 10.0
                    };
                    edges.push((i, j, p));
                }
            }
        }
        let graph = FeasibilityGraph::new(n, m, edges.clone()).expect("graph");
        let got = max_weight_matching(&graph).weight;
        let want = brute_force_matching_weight(n, &edges);
        usize::from(got != want)
    })
    .into_iter()
    .sum();
    outcome(
        "3",
        "matching equals exhaustive search (bitwise)",
        started,
        failures == 0,
        format!("{failures} mismatches over 1000 graphs up to 7x7"),
    )
}

// ---------------------------------------------------------------------------
// criterion 4 + 5: online invariants by independent trace replay
// ---------------------------------------------------------------------------

struct RunCheck {
    violations: Vec<String>,
    blocked_rounds: usize,
    blocked_bound_violations: usize,
}

/// Replays a trace from scratch and checks every invariant the run claims:
/// phase windows, phase-appropriate options, the empty-bin rule, commit
/// feasibility, first-fit placement, trace/profit identities.
fn check_online_run(
    instance: &Instance,
    algorithm: Algorithm,
    params: &PhaseParams,
    packing: &Packing,
    trace: &RunTrace,
) -> RunCheck {
    let mut violations = Vec::new();
    let mut fail = |msg: String| violations.push(msg);
    let n = instance.n();
    let m = instance.m();
    let d = instance.d();

    let (sampling_end, mid_end) = match algorithm {
        Algorithm::Vmkp => (phase_boundary(params.q, n), phase_boundary(params.q, n)),
        _ => (phase_boundary(params.q1, n), phase_boundary(params.q2, n)),
    };
    if trace.rounds.len() != n {
        fail(format!(
            "trace has {} rounds, expected {}",
            trace.rounds.len(),
            n
        ));
    }

    let mut consumption = vec![vec![0.0f64; d]; m];
    let mut commits_per_bin = vec![0usize; m];
    let mut profit_sum = 0.0f64;
    let mut committed_pairs = Vec::new();
    let mut blocked_rounds = 0usize;
    let mut blocked_bound_violations = 0usize;

    for (idx, r) in trace.rounds.iter().enumerate() {
        let l = idx + 1;
        if r.round != l {
            fail(format!("round numbering broken at {l}"));
        }
        let expected_phase = if l <= sampling_end {
            Phase::Sampling
        } else {
            match algorithm {
                Algorithm::Vmkp => Phase::Packing,
                Algorithm::Vgap => {
                    if l <= mid_end {
                        Phase::Heavy
                    } else {
                        Phase::Light
                    }
                }
                Algorithm::ZeroOneVgap => {
                    if l <= mid_end {
                        Phase::Dense
                    } else {
                        Phase::Sparse
                    }
                }
            }
        };
        if r.phase != expected_phase {
            fail(format!(
                "round {l}: phase {:?}, expected {expected_phase:?}",
                r.phase
            ));
        }
        if l <= sampling_end && (r.committed || r.tentative.is_some()) {
            fail(format!("round {l}: activity during the sampling window"));
        }

        // phase-appropriate options for the tentative assignment
        if let Some(j) = r.tentative {
            match instance.option(r.item, j) {
                None => fail(format!("round {l}: tentative bin without an option")),
                Some(opt) => match (algorithm, l <= mid_end) {
                    (Algorithm::Vgap, true) => {
                        if classify_heavy(opt, instance.capacity(j)) != Ok(Heaviness::Heavy) {
                            fail(format!("round {l}: light option in the heavy phase"));
                        }
                    }
                    (Algorithm::Vgap, false) => {
                        if classify_heavy(opt, instance.capacity(j)) != Ok(Heaviness::Light) {
                            fail(format!("round {l}: heavy option in the light phase"));
                        }
                    }
                    (Algorithm::ZeroOneVgap, true) => {
                        if classify_dense(opt, d) != Ok(Density::Dense) {
                            fail(format!("round {l}: sparse option in the dense phase"));
                        }
                    }
                    (Algorithm::ZeroOneVgap, false) => {
                        if classify_dense(opt, d) != Ok(Density::Sparse) {
                            fail(format!("round {l}: dense option in the sparse phase"));
                        }
                    }
                    (Algorithm::Vmkp, _) => {}
                },
            }
        }

        // commit rules, replayed on the reconstructed state
        match algorithm {
            Algorithm::Vmkp => {
                let candidates: Vec<usize> = match instance.option(r.item, 0) {
                    Some(opt) => (0..m)
                        .filter(|&j| {
                            opt.weights
                                .iter()
                                .zip(&consumption[j])
                                .zip(instance.capacity(j))
                                .all(|((w, c), b)| c + w <= *b)
                        })
                        .collect(),
                    None => Vec::new(),
                };
                if r.phase == Phase::Packing {
                    if r.feasible_bins != Some(candidates.len()) {
                        fail(format!("round {l}: first-fit candidate count mismatch"));
                    }
                    if r.tentative.is_some() && candidates.is_empty() {
                        blocked_rounds += 1;
                        // the half-full-bins argument needs at least two bins
                        if m >= 2 {
                            let before: f64 = consumption.iter().flatten().sum();
                            if before < m as f64 / 2.0 {
                                blocked_bound_violations += 1;
                                fail(format!(
                                    "round {l}: blocked with total consumption {before} < m/2"
                                ));
                            }
                        }
                    }
                    let should_commit = r.tentative.is_some() && !candidates.is_empty();
                    if r.committed != should_commit {
                        fail(format!("round {l}: commit decision diverges from the rule"));
                    }
                    if r.committed && r.committed_bin != candidates.first().copied() {
                        fail(format!("round {l}: committed bin is not min B"));
                    }
                }
            }
            _ => {
                if l > sampling_end {
                    let is_mid = l <= mid_end;
                    match r.tentative {
                        None => {
                            if r.committed {
                                fail(format!("round {l}: commit without a tentative bin"));
                            }
                        }
                        Some(j) => {
                            if r.committed_bin.is_some() && r.committed_bin != Some(j) {
                                fail(format!("round {l}: committed away from the tentative bin"));
                            }
                            let should_commit = if is_mid {
                                commits_per_bin[j] == 0
                            } else {
                                match instance.option(r.item, j) {
                                    Some(opt) => opt
                                        .weights
                                        .iter()
                                        .zip(&consumption[j])
                                        .zip(instance.capacity(j))
                                        .all(|((w, c), b)| c + w <= *b),
                                    None => false,
                                }
                            };
                            if r.committed != should_commit {
                                fail(format!("round {l}: commit decision diverges from the rule"));
                            }
                        }
                    }
                }
            }
        }

        if r.committed {
            let j = match r.committed_bin {
                Some(j) => j,
                None => {
                    fail(format!("round {l}: committed without a bin"));
                    continue;
                }
            };
            match instance.option(r.item, j) {
                None => fail(format!("round {l}: committed to an absent option")),
                Some(opt) => {
                    if l <= mid_end && algorithm != Algorithm::Vmkp && commits_per_bin[j] > 0 {
                        fail(format!(
                            "round {l}: matching-phase commit into a non-empty bin"
                        ));
                    }
                    for (c, w) in consumption[j].iter_mut().zip(&opt.weights) {
                        *c += w;
                    }
                    commits_per_bin[j] += 1;
                    profit_sum += opt.profit;
                    if r.profit != opt.profit {
                        fail(format!(
                            "round {l}: recorded profit differs from the option"
                        ));
                    }
                    committed_pairs.push((r.item, j));
                }
            }
        } else if r.profit != 0.0 {
            fail(format!("round {l}: profit recorded without a commit"));
        }

        let total: f64 = consumption.iter().flatten().sum();
        if r.consumption_after != total {
            fail(format!("round {l}: consumption bookkeeping diverged"));
        }
    }

    // final-state identities
    if packing.assignments() != committed_pairs.as_slice() {
        fail("packing does not match the committed rounds".into());
    }
    match profit_of(instance, packing) {
        Ok(p) => {
            if p != profit_sum || trace.total_profit() != p {
                fail("profit identities broken".into());
            }
        }
        Err(e) => fail(format!("profit_of failed: {e}")),
    }
    match is_feasible(instance, packing) {
        Ok(true) => {}
        Ok(false) => fail("final packing infeasible".into()),
        Err(e) => fail(format!("feasibility check failed: {e}")),
    }
    // capacities were never exceeded mid-run either
    for (j, cap) in instance.capacities().iter().enumerate() {
        for (c, b) in consumption[j].iter().zip(cap) {
            if c > b {
                fail(format!("bin {} over capacity in replay", j + 1));
            }
        }
    }

    RunCheck {
        violations,
        blocked_rounds,
        blocked_bound_violations,
    }
}

fn online_mixed_corpus() -> Vec<(Instance, Algorithm)> {
    let mut cases = Vec::new();
    let mut idx = 0u64;
    for &variant in &[Variant::General, Variant::ZeroOne, Variant::Vmkp] {
        for &d in &[1usize, 2, 3] {
            for &m in &[1usize, 2, 3] {
                for rep in 0..5u64 {
                    let mut rng = harness::trial_rng(404, idx);
                    idx += 1;
                    let n = 6 + (rng.random::<u32>() as usize) % 11;
                    let mut params = RandomInstanceParams::new(n, m, d, variant);
                    params.heavy_fraction = 0.2 + 0.2 * (rep as f64 % 3.0);
                    params.option_density = 0.9;
                    params.weight_range = (0.1, 0.9);
                    let inst = gen_random(&params, &mut rng).expect("corpus");
                    match variant {
                        Variant::General => cases.push((inst, Algorithm::Vgap)),
                        Variant::ZeroOne => {
                            cases.push((inst.clone(), Algorithm::ZeroOneVgap));
                            cases.push((inst, Algorithm::Vgap));
                        }
                        Variant::Vmkp => {
                            cases.push((inst.clone(), Algorithm::Vmkp));
                            cases.push((inst, Algorithm::Vgap));
                        }
                    }
                }
            }
        }
    }
    cases
}

pub fn criterion_4_online_invariants(jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let cases = online_mixed_corpus();
    let trials_per_case = 100_000usize.div_ceil(cases.len()) + 1;
    let total = cases.len() * trials_per_case;
    let violations: usize = parallel::map_indexed(total, jobs, |task| {
        let case = task / trials_per_case;
        let (inst, algorithm) = &cases[case];
        let trial = (task % trials_per_case) as u64;
        let params =
            crate::online::default_params(inst.d(), algorithm.param_variant()).expect("params");
        let (packing, trace) =
            run_single_trial(inst, *algorithm, &params, 8000 + case as u64, trial).expect("run");
        let check = check_online_run(inst, *algorithm, &params, &packing, &trace);
        check.violations.len()
    })
    .into_iter()
    .sum();
    outcome(
        "4",
        "online feasibility and phase discipline",
        started,
        violations == 0,
        format!(
            "{violations} violations over {total} runs ({} cases)",
            cases.len()
        ),
    )
}

pub fn criterion_5_blocked_rounds(jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let mut cases = Vec::new();
    for &m in &[2usize, 3] {
        for &d in &[1usize, 2] {
            for rep in 0..10u64 {
                let mut rng = harness::trial_rng(505, (m * 100 + d * 10) as u64 + rep);
                let mut params = RandomInstanceParams::new(30, m, d, Variant::Vmkp);
                params.weight_range = (0.25, 0.95);
                cases.push(gen_random(&params, &mut rng).expect("corpus"));
            }
        }
    }
    let trials_per_case = 10_000usize.div_ceil(cases.len()) + 1;
    let total = cases.len() * trials_per_case;
    let results: Vec<(usize, usize, usize)> = parallel::map_indexed(total, jobs, |task| {
        let inst = &cases[task / trials_per_case];
        let trial = (task % trials_per_case) as u64;
        let params = crate::online::default_params(inst.d(), Variant::Vmkp).expect("params");
        let (packing, trace) =
            run_single_trial(inst, Algorithm::Vmkp, &params, 9000, trial).expect("run");
        let check = check_online_run(inst, Algorithm::Vmkp, &params, &packing, &trace);
        (
            check.violations.len(),
            check.blocked_rounds,
            check.blocked_bound_violations,
        )
    });
    let violations: usize = results.iter().map(|r| r.0).sum();
    let blocked: usize = results.iter().map(|r| r.1).sum();
    let blocked_bound: usize = results.iter().map(|r| r.2).sum();
    let passed = violations == 0 && blocked_bound == 0 && blocked > 0;
    outcome(
        "5",
        "blocked first-fit rounds imply half-full bins",
        started,
        passed,
        format!(
            "{blocked_bound} bound violations over {blocked} blocked rounds in {total} runs \
             ({violations} total violations)"
        ),
    )
}

// ---------------------------------------------------------------------------
// criterion 6: guarantee-direction experiments
// ---------------------------------------------------------------------------

fn guarantee_direction(
    id: &'static str,
    name: &'static str,
    jobs: usize,
    d: usize,
    m: usize,
    algorithm: Algorithm,
    bound: f64,
    seed_base: u64,
) -> CriterionOutcome {
    let started = Instant::now();
    let variant = match algorithm {
        Algorithm::Vmkp => Variant::Vmkp,
        _ => Variant::General,
    };
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    let mut lp_bounded = 0usize;
    for k in 0..20u64 {
        let mut rng = harness::trial_rng(seed_base, k);
        let mut params = RandomInstanceParams::new(40, m, d, variant);
        params.heavy_fraction = 0.35;
        params.weight_range = (0.05, 0.8);
        let inst = gen_random(&params, &mut rng).expect("corpus");
        let mut cfg = TrialConfig::new(algorithm, 10_000, seed_base + 7700 + k);
        cfg.jobs = jobs;
        cfg.node_budget = 400_000;
        let report = run_trials(&inst, &cfg).expect("trials");
        if report.opt.source != "exact" {
            lp_bounded += 1;
        }
        let margin = report.mean + 3.0 * report.stderr;
        if report.opt.value > bound * margin {
            failures += 1;
        }
        if margin > 0.0 {
            worst = worst.max(report.opt.value / margin);
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let passed = failures == 0 && seconds < 300.0;
    outcome(
        id,
        name,
        started,
        passed,
        format!(
            "0 required; {failures} violations, worst OPT/(mean+3se) = {worst:.3} vs bound {bound:.3}, \
             {lp_bounded} LP-bounded, {seconds:.0}s (< 300s required)"
        ),
    )
}

pub fn criterion_6a_gap_d1(jobs: usize) -> CriterionOutcome {
    guarantee_direction(
        "6a",
        "d=1 assignment stays within the 6.99 guarantee",
        jobs,
        1,
        2,
        Algorithm::Vgap,
        6.99,
        601,
    )
}

pub fn criterion_6b_vgap_d2(jobs: usize) -> CriterionOutcome {
    guarantee_direction(
        "6b",
        "d=2 assignment stays within the e^(1/4)*10 guarantee",
        jobs,
        2,
        2,
        Algorithm::Vgap,
        (0.25f64).exp() * 10.0,
        602,
    )
}

pub fn criterion_6c_vmkp_d1(jobs: usize) -> CriterionOutcome {
    guarantee_direction(
        "6c",
        "d=1 multiple knapsack stays within the 5.29 guarantee",
        jobs,
        1,
        2,
        Algorithm::Vmkp,
        5.29,
        603,
    )
}

// ---------------------------------------------------------------------------
// criterion 7: the adversarial family
// ---------------------------------------------------------------------------

/// Feasible packings of the family only combine columns of one matrix, so
/// the optimum of a profit realization is the best per-matrix column count.
fn structural_opt(d: usize, profits: &[f64]) -> f64 {
    profits
        .chunks(d)
        .map(|columns| columns.iter().sum::<f64>())
        .fold(0.0, f64::max)
}

fn single_matrix_opt(lb: &LowerBoundInstance) -> f64 {
    let d = lb.spec.d;
    let first_matrix: Vec<usize> = (0..d).collect();
    let (projected, _) = lb.instance.project(&first_matrix).expect("project");
    oracle::opt_enumerate(&projected).expect("opt").value
}

pub fn criterion_7_lower_bound_family(jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let mut problems = Vec::new();

    // structural verification in exact rationals, both dimensions
    for &d in &[2usize, 3] {
        let mut rng = harness::trial_rng(707, d as u64);
        let lb = gen_lower_bound(d, 1, EpsilonMode::Exact, &mut rng).expect("generation");
        let report = hardgen::verify_structure(&lb);
        if !report.is_clean() {
            problems.push(format!(
                "d={d}: {} structure violations",
                report.violations.len()
            ));
        }
        // with unit profits, one matrix's columns reach exactly d
        let ones = hardgen::with_unit_profits(&lb).expect("unit profits");
        let single = single_matrix_opt(&ones);
        if single != d as f64 {
            problems.push(format!("d={d}: single-matrix OPT {single} != {d}"));
        }
        if d == 2 {
            let whole = oracle::opt_branch_bound(&ones.instance, 2_000_000).expect("opt");
            if whole.lower_bound_only || whole.value != 2.0 {
                problems.push(format!("d=2: whole-instance OPT {} != 2", whole.value));
            }
        }
    }

    // fraction of realizations with OPT = d, against 1 - e^-delta
    let realizations = 10_000usize;
    for &d in &[2usize, 3] {
        let spec = hardgen::lower_bound_spec(d, 1, EpsilonMode::Exact).expect("spec");
        let hits: usize = parallel::map_indexed(realizations, jobs, |k| {
            let mut rng = harness::trial_rng(717 + d as u64, k as u64);
            let profits = hardgen::resample_profits(&spec, &mut rng);
            usize::from(structural_opt(d, &profits) == d as f64)
        })
        .into_iter()
        .sum();
        let fraction = hits as f64 / realizations as f64;
        let stderr = (fraction * (1.0 - fraction) / realizations as f64).sqrt();
        let target = 1.0 - (-1.0f64).exp();
        if fraction < target - 3.0 * stderr {
            problems.push(format!(
                "d={d}: OPT=d fraction {fraction:.4} below {target:.4} - 3se"
            ));
        }
    }

    // cross-check the structural optimum against the oracle on a few
    // float-faithful realizations
    {
        let mut rng = harness::trial_rng(727, 0);
        let lb = gen_lower_bound(2, 1, EpsilonMode::FloatSafe, &mut rng).expect("generation");
        for k in 0..5u64 {
            let mut prng = harness::trial_rng(727, 1 + k);
            let profits = hardgen::resample_profits(&lb.spec, &mut prng);
            let expected = structural_opt(2, &profits);
            let real = hardgen::with_profits(&lb, profits).expect("realize");
            let got = oracle::opt_branch_bound(&real.instance, 2_000_000).expect("opt");
            if got.lower_bound_only || got.value != expected {
                problems.push(format!(
                    "realization {k}: oracle OPT {} != structural {expected}",
                    got.value
                ));
            }
        }
    }

    // the online algorithms cannot beat 1 + 1/d on the float-faithful family
    for (algorithm, label) in [(Algorithm::Vgap, "vgap"), (Algorithm::Vmkp, "vmkp")] {
        let mut rng = harness::trial_rng(737, 0);
        let lb = gen_lower_bound(2, 1, EpsilonMode::FloatSafe, &mut rng).expect("generation");
        let profits: Vec<f64> = parallel::map_indexed(realizations, jobs, |k| {
            let mut prng = harness::trial_rng(747, k as u64);
            let sample = hardgen::resample_profits(&lb.spec, &mut prng);
            let real = hardgen::with_profits(&lb, sample).expect("realize");
            let params =
                crate::online::default_params(2, algorithm.param_variant()).expect("params");
            let (packing, trace) =
                run_single_trial(&real.instance, algorithm, &params, 757, k as u64).expect("run");
            assert!(is_feasible(&real.instance, &packing).expect("feasible"));
            trace.total_profit()
        });
        let t = profits.len() as f64;
        let mean = profits.iter().sum::<f64>() / t;
        let var = profits.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (t - 1.0);
        let stderr = (var / t).sqrt();
        let cap = 1.0 + 0.5; // 1 + 1/d^delta at d = 2, delta = 1
        if mean > cap + 3.0 * stderr {
            problems.push(format!(
                "{label} mean profit {mean:.4} exceeds {cap} + 3se on the adversarial family"
            ));
        }
    }

    let seconds = started.elapsed().as_secs_f64();
    let passed = problems.is_empty() && seconds < 600.0;
    let details = if problems.is_empty() {
        format!("structure, optimum, and profit-cap checks clean, {seconds:.0}s (< 600s required)")
    } else {
        problems.join("; ")
    };
    outcome(
        "7",
        "adversarial lower-bound family behaves as constructed",
        started,
        passed,
        details,
    )
}

// ---------------------------------------------------------------------------
// criterion 8: reproducibility
// ---------------------------------------------------------------------------

pub fn criterion_8_determinism(_jobs: usize) -> CriterionOutcome {
    let started = Instant::now();
    let mut problems = Vec::new();
    for (algorithm, variant) in [
        (Algorithm::Vgap, Variant::General),
        (Algorithm::Vmkp, Variant::Vmkp),
    ] {
        let mut rng = harness::trial_rng(808, algorithm as u64);
        let mut params = RandomInstanceParams::new(30, 2, 1, variant);
        params.weight_range = (0.1, 0.9);
        let inst = gen_random(&params, &mut rng).expect("corpus");
        let mut cfg = TrialConfig::new(algorithm, 500, 881);
        cfg.jobs = 1;
        let sequential = run_trials(&inst, &cfg).expect("trials").to_json_string();
        cfg.jobs = 8;
        let parallel_run = run_trials(&inst, &cfg).expect("trials").to_json_string();
        let parallel_again = run_trials(&inst, &cfg).expect("trials").to_json_string();
        if sequential != parallel_run || parallel_run != parallel_again {
            problems.push(format!(
                "{}: reports differ across runs",
                algorithm.as_str()
            ));
        }
    }
    outcome(
        "8",
        "reports byte-identical at parallelism 1 and 8",
        started,
        problems.is_empty(),
        if problems.is_empty() {
            "2 algorithms x 3 runs identical".into()
        } else {
            problems.join("; ")
        },
    )
}

#[doc(hidden)]
pub fn debug_mixed_corpus() -> Vec<(Instance, Algorithm)> {
    online_mixed_corpus()
}

#[doc(hidden)]
pub fn debug_check_run(
    instance: &Instance,
    algorithm: Algorithm,
    params: &PhaseParams,
    packing: &Packing,
    trace: &RunTrace,
) -> Vec<String> {
    check_online_run(instance, algorithm, params, packing, trace).violations
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_opt_counts_best_matrix() {
        // d = 2: matrices are column pairs
        let profits = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        assert_eq!(structural_opt(2, &profits), 2.0);
        assert_eq!(structural_opt(2, &profits[..2]), 1.0);
        assert_eq!(structural_opt(2, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn brute_force_matching_small() {
        let edges = vec![(0, 0, 3.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 4.0)];
        assert_eq!(brute_force_matching_weight(2, &edges), 7.0);
    }

    #[test]
    fn validator_accepts_good_runs_and_flags_bad_traces() {
        let mut rng = harness::trial_rng(1, 0);
        let mut params = RandomInstanceParams::new(10, 2, 1, Variant::General);
        params.weight_range = (0.1, 0.9);
        let inst = gen_random(&params, &mut rng).expect("corpus");
        let algo_params = crate::online::default_params(1, Variant::General).unwrap();
        let (packing, mut trace) =
            run_single_trial(&inst, Algorithm::Vgap, &algo_params, 3, 0).unwrap();
        let clean = check_online_run(&inst, Algorithm::Vgap, &algo_params, &packing, &trace);
        assert!(clean.violations.is_empty(), "{:?}", clean.violations);

        // corrupt one recorded profit; the replay must notice
        if let Some(r) = trace.rounds.iter_mut().find(|r| r.committed) {
            r.profit += 1.0;
            let broken = check_online_run(&inst, Algorithm::Vgap, &algo_params, &packing, &trace);
            assert!(!broken.violations.is_empty());
        }
    }
}
