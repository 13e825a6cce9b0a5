//! Instance generators: the adversarial single-bin family whose items are
//! matrix columns that conflict across matrices, and a seeded random
//! benchmark generator.
//!
//! The adversarial family packs an enormous dynamic range into its epsilon
//! perturbations, so the construction is carried out in arbitrary-precision
//! rationals and only *projected* to doubles. Two epsilon modes exist:
//!
//! * `Exact` uses `1/(4 n d^n)`, a valid choice strictly inside the
//!   construction's bound. For `d = 2` every entry happens to be dyadic and
//!   the double view is faithful; for other `d` the doubles underflow and
//!   only the rational weights carry the structure.
//! * `FloatSafe` substitutes `2^-40`, giving weights that are exactly
//!   representable as doubles, so the online algorithms can run on a
//!   faithful instance. The mode refuses parameters for which this epsilon
//!   breaks the construction (`verify_structure` re-checks independently).
//!
//! `verify_structure` always works on the rational weights: per-matrix rows
//! must fit the unit bin, and every cross-matrix column pair must conflict
//! in some dimension.

use std::collections::BTreeMap;
use std::path::Path;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, Item, PackingOption, Variant};
use crate::parallel;

/// Construction parameters and derived sizes.
#[derive(Debug, Clone)]
pub struct LowerBoundSpec {
    pub d: usize,
    pub delta: usize,
    pub epsilon: BigRational,
    pub mode: EpsilonMode,
    /// Item count `delta * d^((delta+1)d + 1)`.
    pub n: usize,
    /// Number of matrices, `n / d`.
    pub matrix_count: usize,
    /// Per-item probability of profit 1, `1/d^(delta+1)`.
    pub profit_probability: BigRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonMode {
    Exact,
    FloatSafe,
}

/// A generated adversarial instance: exact rational weights plus the
/// projected double-precision view with one sampled profit realization.
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub spec: LowerBoundSpec,
    /// `n x d` exact weights; item `(j-1)*d + k` is column `k` of matrix `j`.
    pub weights: Vec<Vec<BigRational>>,
    /// Sampled 0/1 profits, one per item.
    pub profits: Vec<f64>,
    /// Double view: vmkp, one unit bin.
    pub instance: Instance,
}

const GENERAL_SIZE_GUARD: usize = 1_000_000;
const EXACT_SIZE_GUARD: usize = 10_000;

fn big(v: usize) -> BigInt {
    BigInt::from(v)
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// Generates the family for dimension `d >= 2` and intensity `delta >= 1`.
/// Profits are sampled i.i.d. from the trial stream so realizations are
/// seed-reproducible.
pub fn gen_lower_bound<R: Rng + ?Sized>(
    d: usize,
    delta: usize,
    mode: EpsilonMode,
    rng: &mut R,
) -> Result<LowerBoundInstance> {
    let spec = lower_bound_spec(d, delta, mode)?;
    let weights = construction_weights(&spec);
    let profits = sample_profits(&spec, rng);
    let instance = project_instance(&spec, &weights, &profits)?;
    Ok(LowerBoundInstance {
        spec,
        weights,
        profits,
        instance,
    })
}

pub fn lower_bound_spec(d: usize, delta: usize, mode: EpsilonMode) -> Result<LowerBoundSpec> {
    if d < 2 {
        return Err(Error::InvalidParam(
            "the lower-bound construction needs d >= 2 (d = 1 degenerates to 1x1 matrices)".into(),
        ));
    }
    if delta < 1 {
        return Err(Error::InvalidParam("delta must be at least 1".into()));
    }
    let exponent = (delta + 1) * d + 1;
    let mut n: usize = delta;
    for _ in 0..exponent {
        n = n
            .checked_mul(d)
            .filter(|&v| v <= GENERAL_SIZE_GUARD)
            .ok_or_else(|| {
                Error::SizeGuard(format!(
                    "n = delta * d^{exponent} exceeds {GENERAL_SIZE_GUARD}"
                ))
            })?;
    }
    let matrix_count = n / d;

    let epsilon = match mode {
        EpsilonMode::Exact => {
            if n > EXACT_SIZE_GUARD {
                return Err(Error::SizeGuard(format!(
                    "exact mode supports n <= {EXACT_SIZE_GUARD} (denominators scale as d^n); \
                     got n = {n}"
                )));
            }
            // 1/(4 n d^n), strictly inside the bound 1/(2 n d^n)
            let dn = big(d).pow(n as u32);
            ratio(BigInt::one(), big(4) * big(n) * dn)
        }
        EpsilonMode::FloatSafe => ratio(BigInt::one(), BigInt::one() << 40),
    };

    // the construction needs eps * j * d^j < 1/2 for every matrix index j;
    // the bound is monotone in j, so checking j = J suffices
    let j_max = big(matrix_count) * big(d).pow(matrix_count as u32);
    let worst = &epsilon * ratio(j_max, BigInt::one());
    if worst >= ratio(BigInt::one(), big(2)) {
        return Err(Error::InvalidParam(format!(
            "epsilon violates eps * J * d^J < 1/2 at d = {d}, delta = {delta}; \
             the float-safe epsilon cannot represent this family"
        )));
    }

    let profit_probability = ratio(BigInt::one(), big(d).pow((delta + 1) as u32));
    Ok(LowerBoundSpec {
        d,
        delta,
        epsilon,
        mode,
        n,
        matrix_count,
        profit_probability,
    })
}

/// Matrix `A_j = (1 - eps*j*d^j) I + eps*j*d^(j-1) (11^T - I)`; items are
/// its columns, matrices emitted in ascending `j`, columns ascending.
fn construction_weights(spec: &LowerBoundSpec) -> Vec<Vec<BigRational>> {
    let d = spec.d;
    let mut weights = Vec::with_capacity(spec.n);
    for j in 1..=spec.matrix_count {
        let dj = big(d).pow((j - 1) as u32);
        let off = &spec.epsilon * ratio(big(j) * &dj, BigInt::one());
        let diag = BigRational::one() - &spec.epsilon * ratio(big(j) * &dj * big(d), BigInt::one());
        for col in 0..d {
            let mut w = Vec::with_capacity(d);
            for row in 0..d {
                w.push(if row == col {
                    diag.clone()
                } else {
                    off.clone()
                });
            }
            weights.push(w);
        }
    }
    weights
}

fn sample_profits<R: Rng + ?Sized>(spec: &LowerBoundSpec, rng: &mut R) -> Vec<f64> {
    let p = rational_to_f64(&spec.profit_probability);
    (0..spec.n)
        .map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
        .collect()
}

fn project_instance(
    spec: &LowerBoundSpec,
    weights: &[Vec<BigRational>],
    profits: &[f64],
) -> Result<Instance> {
    let items: Vec<(Vec<f64>, f64)> = weights
        .iter()
        .zip(profits)
        .map(|(w, &p)| (w.iter().map(rational_to_f64).collect(), p))
        .collect();
    if spec.mode == EpsilonMode::FloatSafe {
        for (w, item) in weights.iter().zip(&items) {
            for (exact, &projected) in w.iter().zip(&item.0) {
                if &f64_to_rational(projected) != exact {
                    return Err(Error::Internal(
                        "float-safe projection lost precision".into(),
                    ));
                }
            }
        }
    }
    Instance::vmkp(spec.d, 1, items)
}

/// Re-derives a profit realization without rebuilding the instance; used by
/// repeated-realization experiments.
pub fn resample_profits<R: Rng + ?Sized>(spec: &LowerBoundSpec, rng: &mut R) -> Vec<f64> {
    sample_profits(spec, rng)
}

/// Clone of the instance carrying a different profit realization.
pub fn with_profits(lb: &LowerBoundInstance, profits: Vec<f64>) -> Result<LowerBoundInstance> {
    if profits.len() != lb.spec.n {
        return Err(Error::InvalidParam(format!(
            "expected {} profits, got {}",
            lb.spec.n,
            profits.len()
        )));
    }
    let instance = project_instance(&lb.spec, &lb.weights, &profits)?;
    Ok(LowerBoundInstance {
        spec: lb.spec.clone(),
        weights: lb.weights.clone(),
        profits,
        instance,
    })
}

/// Clone of the instance with every profit forced to 1.
pub fn with_unit_profits(lb: &LowerBoundInstance) -> Result<LowerBoundInstance> {
    with_profits(lb, vec![1.0; lb.spec.n])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureViolation {
    /// Row `row` of matrix `matrix` sums above the unit capacity: the
    /// matrix's own columns no longer fit together.
    RowSumExceedsCapacity { matrix: usize, row: usize },
    /// Column `col_a` of matrix `matrix_a` and column `col_b` of matrix
    /// `matrix_b` fit into the bin together; cross-matrix conflicts are
    /// broken. Matrices are 1-based, columns 0-based.
    CrossMatrixPairFits {
        matrix_a: usize,
        col_a: usize,
        matrix_b: usize,
        col_b: usize,
    },
    /// `eps * j * d^j >= 1/2` for this matrix index.
    EpsilonBoundViolated { matrix: usize },
}

impl std::fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StructureViolation::RowSumExceedsCapacity { matrix, row } => {
                write!(f, "matrix {matrix}: row {row} exceeds the unit capacity")
            }
            StructureViolation::CrossMatrixPairFits {
                matrix_a,
                col_a,
                matrix_b,
                col_b,
            } => write!(
                f,
                "columns ({matrix_a},{col_a}) and ({matrix_b},{col_b}) pack together"
            ),
            StructureViolation::EpsilonBoundViolated { matrix } => {
                write!(f, "epsilon bound fails at matrix {matrix}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub violations: Vec<StructureViolation>,
    pub matrices_checked: usize,
    pub column_pairs_checked: u64,
}

impl StructureReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the generated family in exact rational arithmetic:
/// (a) each matrix's columns fit the bin together (row sums <= 1),
/// (b) every cross-matrix column pair conflicts in some dimension,
/// (c) the epsilon bound holds for every matrix index.
///
/// Weights are first rescaled to a common denominator so the pair sweep
/// runs on plain big-integer comparisons.
pub fn verify_structure(lb: &LowerBoundInstance) -> StructureReport {
    let d = lb.spec.d;
    let j_count = lb.spec.matrix_count;
    let mut violations = Vec::new();

    // (c)
    let half = ratio(BigInt::one(), big(2));
    let mut jd = BigRational::one();
    for j in 1..=j_count {
        jd = &jd * ratio(big(d), BigInt::one());
        let value = &lb.spec.epsilon * ratio(big(j), BigInt::one()) * &jd;
        if value >= half {
            violations.push(StructureViolation::EpsilonBoundViolated { matrix: j });
        }
    }

    // common denominator for integer-only comparisons
    let mut denom = BigInt::one();
    for w in &lb.weights {
        for v in w {
            denom = denom.lcm(v.denom());
        }
    }
    let scaled: Vec<Vec<BigInt>> = lb
        .weights
        .iter()
        .map(|w| w.iter().map(|v| v.numer() * (&denom / v.denom())).collect())
        .collect();

    // (a)
    for j in 0..j_count {
        for row in 0..d {
            let mut sum = BigInt::zero();
            for col in 0..d {
                sum += &scaled[j * d + col][row];
            }
            if sum > denom {
                violations.push(StructureViolation::RowSumExceedsCapacity { matrix: j + 1, row });
            }
        }
    }

    // (b): parallel over the earlier matrix of each pair
    let per_matrix: Vec<Vec<StructureViolation>> = parallel::map_indexed(j_count, 0, |a| {
        let mut local = Vec::new();
        for b in (a + 1)..j_count {
            for col_a in 0..d {
                for col_b in 0..d {
                    let wa = &scaled[a * d + col_a];
                    let wb = &scaled[b * d + col_b];
                    let fits = (0..d).all(|t| &wa[t] + &wb[t] <= denom);
                    if fits {
                        local.push(StructureViolation::CrossMatrixPairFits {
                            matrix_a: a + 1,
                            col_a,
                            matrix_b: b + 1,
                            col_b,
                        });
                    }
                }
            }
        }
        local
    });
    for mut batch in per_matrix {
        violations.append(&mut batch);
    }

    let pairs = (j_count as u64) * (j_count as u64 - 1) / 2 * (d as u64) * (d as u64);
    StructureReport {
        violations,
        matrices_checked: j_count,
        column_pairs_checked: pairs,
    }
}

// ---------------------------------------------------------------------------
// Exact value formatting and parsing
// ---------------------------------------------------------------------------

/// Finite decimal expansion, if one exists (denominator 2^a * 5^b).
pub fn decimal_string(r: &BigRational) -> Option<String> {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = big(2);
    let five = big(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::one() {
        return None;
    }
    let k = twos.max(fives);
    let scale = big(2).pow(k - twos.min(k)) * big(5).pow(k - fives.min(k));
    let scaled = (r.numer() * scale).abs();
    let digits = scaled.to_string();
    let sign = if r.numer().is_negative() { "-" } else { "" };
    if k == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let k = k as usize;
    let padded = if digits.len() <= k {
        format!("0.{}{}", "0".repeat(k - digits.len()), digits)
    } else {
        format!(
            "{}.{}",
            &digits[..digits.len() - k],
            &digits[digits.len() - k..]
        )
    };
    Some(format!("{sign}{padded}"))
}

/// Exact textual form: a finite decimal when one exists, otherwise "p/q".
pub fn exact_value_string(r: &BigRational) -> String {
    decimal_string(r).unwrap_or_else(|| format!("{}/{}", r.numer(), r.denom()))
}

pub(crate) fn parse_exact_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse exact value {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = big(10).pow(frac_part.len() as u32);
    Ok(BigRational::new(BigInt::from(sign) * numer, denom))
}

/// Parses a decimal or "p/q" string to the nearest double.
pub fn parse_exact_value(s: &str) -> Result<f64> {
    Ok(rational_to_f64(&parse_exact_rational(s)?))
}

/// Nearest-double projection that survives denominators far beyond the
/// double exponent range (a plain numer/denom division would hit inf/inf).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let negative = r.numer().is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let (sn, sd) = if shift >= 0 {
        (num << shift as u64, den)
    } else {
        (num, den << (-shift) as u64)
    };
    let q = (&sn / &sd).to_f64().unwrap_or(f64::INFINITY);
    let magnitude = q * 2f64.powi(-shift as i32);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

fn f64_to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite floats convert")
}

/// Writes the instance file with weights in exact textual form (profits are
/// exact 0/1 doubles already).
pub fn write_exact_file(lb: &LowerBoundInstance, path: &Path) -> Result<()> {
    let items: Vec<serde_json::Value> = lb
        .weights
        .iter()
        .zip(&lb.profits)
        .map(|(w, &p)| {
            serde_json::json!({
                "w": w.iter().map(|v| serde_json::Value::String(exact_value_string(v)))
                    .collect::<Vec<_>>(),
                "p": p,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "d": lb.spec.d,
        "m": 1,
        "items": items,
        "variant": "vmkp",
    });
    std::fs::write(path, serde_json::to_string(&doc).expect("serializes"))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Random benchmark instances
// ---------------------------------------------------------------------------

/// Knobs for `gen_random`. Weight shaping depends on the variant:
/// `heavy_fraction` drives general options (an option is made heavy with
/// that probability), `one_probability` drives {0,1} entries, and
/// `weight_range` drives vmkp per-dimension uniforms. Capacities are always
/// unit vectors.
#[derive(Debug, Clone)]
pub struct RandomInstanceParams {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub variant: Variant,
    pub heavy_fraction: f64,
    pub option_density: f64,
    pub one_probability: f64,
    pub weight_range: (f64, f64),
    pub profit_range: (f64, f64),
}

impl RandomInstanceParams {
    pub fn new(n: usize, m: usize, d: usize, variant: Variant) -> Self {
        RandomInstanceParams {
            n,
            m,
            d,
            variant,
            heavy_fraction: 0.3,
            option_density: 1.0,
            one_probability: 0.5,
            weight_range: (0.0, 1.0),
            profit_range: (0.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if self.m == 0 || self.d == 0 {
            return Err(Error::InvalidParam("need m >= 1 and d >= 1".into()));
        }
        if !prob(self.heavy_fraction) || !prob(self.option_density) || !prob(self.one_probability) {
            return Err(Error::InvalidParam(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        let range_ok =
            |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi;
        if !range_ok(self.weight_range) || !range_ok(self.profit_range) {
            return Err(Error::InvalidParam(
                "ranges must satisfy 0 <= lo <= hi".into(),
            ));
        }
        if self.variant == Variant::Vmkp && self.weight_range.1 > 1.0 {
            return Err(Error::InvalidParam(
                "vmkp weight range must stay within the unit capacity".into(),
            ));
        }
        Ok(())
    }
}

/// Seeded random instance generator; identical (params, rng state) yield
/// identical instances.
pub fn gen_random<R: Rng + ?Sized>(params: &RandomInstanceParams, rng: &mut R) -> Result<Instance> {
    params.validate()?;
    let &RandomInstanceParams { n, m, d, .. } = params;
    let uniform = |rng: &mut R, (lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();

    match params.variant {
        Variant::General => {
            let mut items = Vec::with_capacity(n);
            for _ in 0..n {
                let mut options = BTreeMap::new();
                for j in 0..m {
                    if rng.random::<f64>() >= params.option_density {
                        continue;
                    }
                    let heavy = rng.random::<f64>() < params.heavy_fraction;
                    let w = if heavy {
                        let spike = (rng.random::<u32>() as usize) % d;
                        (0..d)
                            .map(|t| {
                                if t == spike {
                                    // strictly above half capacity
                                    0.5 + 0.5 * (1.0 - rng.random::<f64>())
                                } else {
                                    rng.random::<f64>()
                                }
                            })
                            .collect()
                    } else {
                        (0..d).map(|_| 0.5 * rng.random::<f64>()).collect()
                    };
                    options.insert(j, PackingOption::new(w, uniform(rng, params.profit_range)));
                }
                items.push(Item::new(options));
            }
            Instance::new(d, vec![vec![1.0; d]; m], items, Variant::General)
        }
        Variant::ZeroOne => {
            let mut items = Vec::with_capacity(n);
            for _ in 0..n {
                let mut options = BTreeMap::new();
                for j in 0..m {
                    if rng.random::<f64>() >= params.option_density {
                        continue;
                    }
                    let w = (0..d)
                        .map(|_| {
                            if rng.random::<f64>() < params.one_probability {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    options.insert(j, PackingOption::new(w, uniform(rng, params.profit_range)));
                }
                items.push(Item::new(options));
            }
            Instance::new(d, vec![vec![1.0; d]; m], items, Variant::ZeroOne)
        }
        Variant::Vmkp => {
            let items = (0..n)
                .map(|_| {
                    let w = (0..d).map(|_| uniform(rng, params.weight_range)).collect();
                    (w, uniform(rng, params.profit_range))
                })
                .collect();
            Instance::vmkp(d, m, items)
        }
    }
}
