//! The three online algorithms, executed over a supplied arrival
//! permutation.
//!
//! All of them share the same skeleton: an initial sampling window whose
//! items are observed but never packed, followed by rounds that compute a
//! tentative assignment from a local solution (a maximum-weight matching or
//! a rounded LP solution over the items seen so far) and commit it only if
//! a phase-specific rule allows. Phase boundaries are `floor(q * n)`, so
//! `q = 0` disables sampling entirely and degenerate windows simply execute
//! zero rounds.
//!
//! Runs are strictly sequential (rounds are causally ordered); independent
//! runs over different permutations share only the immutable instance.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, Packing, SplitCriterion, Variant};
use crate::lp;
use crate::matching;

/// Phase-boundary fractions. Two-phase algorithms read `q1`/`q2`; the
/// single-phase multiple-knapsack algorithm reads `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseParams {
    pub q1: f64,
    pub q2: f64,
    pub q: f64,
}

impl PhaseParams {
    pub fn two_phase(q1: f64, q2: f64) -> Result<Self> {
        let p = PhaseParams { q1, q2, q: q1 };
        p.validate()?;
        Ok(p)
    }

    pub fn single_phase(q: f64) -> Result<Self> {
        let p = PhaseParams { q1: q, q2: q, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.q1)
            && (self.q1..=1.0).contains(&self.q2)
            && (0.0..=1.0).contains(&self.q);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!(
                "phase fractions must satisfy 0 <= q1 <= q2 <= 1 and 0 <= q <= 1, got {self:?}"
            )))
        }
    }
}

/// Tuned parameters: the proven formulas, with the sharper hand-tuned pair
/// for one-dimensional generalized assignment.
pub fn default_params(d: usize, variant: Variant) -> Result<PhaseParams> {
    if d == 1 && variant == Variant::General {
        return PhaseParams::two_phase(0.5256, 0.69);
    }
    formula_params(d, variant)
}

/// The closed-form parameter choices, without the d = 1 override. Exposed
/// so the tuned and formula values can be compared side by side.
pub fn formula_params(d: usize, variant: Variant) -> Result<PhaseParams> {
    if d == 0 {
        return Err(Error::structural("dimension d must be at least 1"));
    }
    let df = d as f64;
    match variant {
        Variant::General => {
            let q2 = 2.0 * df / (2.0 * df + 1.0);
            PhaseParams::two_phase(q2 * (-0.25f64).exp(), q2)
        }
        Variant::ZeroOne => {
            let s = df.sqrt();
            let q2 = s / (s + 1.0);
            PhaseParams::two_phase(q2 * (-0.5f64).exp(), q2)
        }
        Variant::Vmkp => PhaseParams::single_phase(2.0 * df / (2.0 * df + 1.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sampling,
    Heavy,
    Light,
    Dense,
    Sparse,
    Packing,
}

/// One executed round.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRound {
    /// 1-based round number.
    pub round: usize,
    pub phase: Phase,
    /// Arriving item (original 0-based index).
    pub item: usize,
    /// Tentative bin from the local solution, if any.
    pub tentative: Option<usize>,
    pub committed: bool,
    /// Bin actually committed to. Differs from `tentative` only for the
    /// multiple-knapsack algorithm, which packs first-fit.
    pub committed_bin: Option<usize>,
    /// Profit raised this round (0 unless committed).
    pub profit: f64,
    /// Total consumption over all bins and dimensions after the round.
    pub consumption_after: f64,
    /// Size of the first-fit candidate set B; multiple-knapsack rounds only.
    pub feasible_bins: Option<usize>,
}

/// Round-by-round record of one online execution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub rounds: Vec<TraceRound>,
    /// Last sampling round, `floor(q1 * n)` (resp. `floor(q * n)`).
    pub sampling_end: usize,
    /// Last matching-phase round, `floor(q2 * n)`.
    pub mid_end: usize,
    /// Accumulated tentative consumption per bin and dimension during the
    /// LP-rounding phase, whether or not the rounds committed.
    pub tentative_consumption: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RoundLine {
    l: usize,
    phase: Phase,
    i: usize,
    j: usize,
    commit: bool,
    #[serde(rename = "R")]
    profit: f64,
    cons: f64,
}

impl RunTrace {
    /// Sum of round profits, folded in round order. Equals the final
    /// packing's profit bit-for-bit.
    pub fn total_profit(&self) -> f64 {
        self.rounds.iter().map(|r| r.profit).sum()
    }

    /// JSON-lines serialization, one round per line:
    /// `{"l":..,"phase":..,"i":..,"j":..,"commit":..,"R":..,"cons":..}`
    /// with 1-based `i` and `j` (`j = 0` means no tentative bin).
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            let line = RoundLine {
                l: r.round,
                phase: r.phase,
                i: r.item + 1,
                j: r.tentative.map_or(0, |j| j + 1),
                commit: r.committed,
                profit: r.profit,
                cons: r.consumption_after,
            };
            out.push_str(&serde_json::to_string(&line).expect("trace row serializes"));
            out.push('\n');
        }
        out
    }
}

/// `floor(q * n)` on the stored double, the boundary rule used throughout.
pub(crate) fn phase_boundary(q: f64, n: usize) -> usize {
    (q * n as f64).floor() as usize
}

fn validate_permutation(permutation: &[usize], n: usize) -> Result<()> {
    if permutation.len() != n {
        return Err(Error::structural(format!(
            "permutation has {} entries, instance has n={}",
            permutation.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &i in permutation {
        if i >= n || seen[i] {
            return Err(Error::structural(
                "permutation must be a bijection on the items",
            ));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Smallest bin where the item fits in every dimension, given running
/// consumptions; `None` if no bin fits. Comparisons are exact.
pub fn first_fit(
    consumption: &[Vec<f64>],
    capacities: &[Vec<f64>],
    weights: &[f64],
) -> Option<usize> {
    (0..consumption.len()).find(|&j| {
        weights
            .iter()
            .zip(&consumption[j])
            .zip(&capacities[j])
            .all(|((w, c), b)| c + w <= *b)
    })
}

fn run_two_phase<R: Rng + ?Sized>(
    instance: &Instance,
    criterion: SplitCriterion,
    mid_phase: Phase,
    tail_phase: Phase,
    permutation: &[usize],
    rng: &mut R,
    params: &PhaseParams,
) -> Result<(Packing, RunTrace)> {
    params.validate()?;
    let n = instance.n();
    validate_permutation(permutation, n)?;
    let (mid_instance, tail_instance) = instance.split(criterion)?;
    let sampling_end = phase_boundary(params.q1, n);
    let mid_end = phase_boundary(params.q2, n);

    let mut packing = Packing::new(instance);
    let mut arrived: Vec<usize> = Vec::with_capacity(n);
    let mut rounds = Vec::with_capacity(n);
    let mut tentative_consumption = vec![vec![0.0; instance.d()]; instance.m()];

    for l in 1..=n {
        let item = permutation[l - 1];
        let pos = arrived.partition_point(|&x| x < item);
        arrived.insert(pos, item);

        let (phase, tentative) = if l <= sampling_end {
            (Phase::Sampling, None)
        } else if l <= mid_end {
            let graph = matching::build_graph_for_items(&mid_instance, &arrived);
            let local = matching::max_weight_matching(&graph);
            (mid_phase, local.bin_of(item))
        } else {
            let local = lp::solve_restricted(&tail_instance, &arrived, None)?;
            let choice = lp::sample_tentative(&local, item, rng);
            if let Some(j) = choice {
                let opt = tail_instance
                    .option(item, j)
                    .expect("sampled bin carries an option");
                for (c, w) in tentative_consumption[j].iter_mut().zip(&opt.weights) {
                    *c += w;
                }
            }
            (tail_phase, choice)
        };

        let committed_bin = match (phase, tentative) {
            (Phase::Sampling, _) | (_, None) => None,
            (p, Some(j)) if p == mid_phase => {
                // a bin accepts a matching-phase item only while empty
                (packing.bin_item_count(j) == 0).then_some(j)
            }
            (_, Some(j)) => packing.fits(instance, item, j)?.then_some(j),
        };
        let mut profit = 0.0;
        if let Some(j) = committed_bin {
            packing.assign(instance, item, j)?;
            profit = instance.option(item, j).expect("committed option").profit;
        }
        rounds.push(TraceRound {
            round: l,
            phase,
            item,
            tentative,
            committed: committed_bin.is_some(),
            committed_bin,
            profit,
            consumption_after: packing.total_consumption(),
            feasible_bins: None,
        });
    }
    Ok((
        packing,
        RunTrace {
            rounds,
            sampling_end,
            mid_end,
            tentative_consumption,
        },
    ))
}

/// Online vector generalized assignment: sampling, then a matching phase
/// over the heavy options, then LP rounding over the light options.
pub fn run_vgap<R: Rng + ?Sized>(
    instance: &Instance,
    permutation: &[usize],
    rng: &mut R,
    params: &PhaseParams,
) -> Result<(Packing, RunTrace)> {
    run_two_phase(
        instance,
        SplitCriterion::HeavyLight,
        Phase::Heavy,
        Phase::Light,
        permutation,
        rng,
        params,
    )
}

/// The {0,1} special case: identical skeleton with the dense/sparse
/// partition in place of heavy/light.
pub fn run_01_vgap<R: Rng + ?Sized>(
    instance: &Instance,
    permutation: &[usize],
    rng: &mut R,
    params: &PhaseParams,
) -> Result<(Packing, RunTrace)> {
    if instance.variant() != Variant::ZeroOne {
        return Err(Error::structural(
            "run_01_vgap requires the zero_one variant",
        ));
    }
    run_two_phase(
        instance,
        SplitCriterion::DenseSparse,
        Phase::Dense,
        Phase::Sparse,
        permutation,
        rng,
        params,
    )
}

/// Online vector multiple knapsack: the LP solution only decides *whether*
/// to pack; the destination bin is chosen first-fit.
pub fn run_vmkp<R: Rng + ?Sized>(
    instance: &Instance,
    permutation: &[usize],
    rng: &mut R,
    params: &PhaseParams,
) -> Result<(Packing, RunTrace)> {
    if instance.variant() != Variant::Vmkp {
        return Err(Error::structural("run_vmkp requires the vmkp variant"));
    }
    params.validate()?;
    let n = instance.n();
    let m = instance.m();
    validate_permutation(permutation, n)?;
    let sampling_end = phase_boundary(params.q, n);

    let mut packing = Packing::new(instance);
    let mut arrived: Vec<usize> = Vec::with_capacity(n);
    let mut rounds = Vec::with_capacity(n);

    for l in 1..=n {
        let item = permutation[l - 1];
        let pos = arrived.partition_point(|&x| x < item);
        arrived.insert(pos, item);

        if l <= sampling_end {
            rounds.push(TraceRound {
                round: l,
                phase: Phase::Sampling,
                item,
                tentative: None,
                committed: false,
                committed_bin: None,
                profit: 0.0,
                consumption_after: packing.total_consumption(),
                feasible_bins: None,
            });
            continue;
        }

        let local = lp::solve_restricted(instance, &arrived, None)?;
        let tentative = lp::sample_tentative(&local, item, rng);
        let has_option = !instance.items()[item].options.is_empty();
        let candidates: Vec<usize> = if has_option {
            (0..m)
                .filter(|&j| packing.fits(instance, item, j).unwrap_or(false))
                .collect()
        } else {
            Vec::new()
        };
        let committed_bin = match (tentative, candidates.first()) {
            (Some(_), Some(&j)) => Some(j),
            _ => None,
        };
        let mut profit = 0.0;
        if let Some(j) = committed_bin {
            packing.assign(instance, item, j)?;
            profit = instance.option(item, j).expect("committed option").profit;
        }
        rounds.push(TraceRound {
            round: l,
            phase: Phase::Packing,
            item,
            tentative,
            committed: committed_bin.is_some(),
            committed_bin,
            profit,
            consumption_after: packing.total_consumption(),
            feasible_bins: Some(candidates.len()),
        });
    }
    Ok((
        packing,
        RunTrace {
            rounds,
            sampling_end,
            mid_end: sampling_end,
            tentative_consumption: vec![vec![0.0; instance.d()]; m],
        },
    ))
}
