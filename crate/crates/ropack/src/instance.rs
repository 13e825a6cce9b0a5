//! Canonical data model: instances, packings, and the classification /
//! partition operations the online algorithms are built on.
//!
//! An instance holds `m` bins with `d`-dimensional capacities and `n` items.
//! Each item has at most one packing option per bin; an absent option means
//! the item cannot be placed in that bin at all. Instances are immutable
//! after construction and safe to share across trial workers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Problem family tag. `ZeroOne` and `Vmkp` carry extra structural
/// invariants that are validated at construction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    General,
    ZeroOne,
    Vmkp,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::ZeroOne => "zero_one",
            Variant::Vmkp => "vmkp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Variant::General),
            "zero_one" => Ok(Variant::ZeroOne),
            "vmkp" => Ok(Variant::Vmkp),
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One way of packing an item into one bin: the capacity it consumes in
/// every dimension and the profit it raises.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingOption {
    pub weights: Vec<f64>,
    pub profit: f64,
}

impl PackingOption {
    pub fn new(weights: Vec<f64>, profit: f64) -> Self {
        PackingOption { weights, profit }
    }

    /// True iff the option fits alone into a bin of the given capacity.
    pub fn fits_alone(&self, capacity: &[f64]) -> bool {
        self.weights.len() == capacity.len()
            && self.weights.iter().zip(capacity).all(|(w, b)| w <= b)
    }
}

/// Items are sparse maps from bin index to option; bins without an entry
/// cannot receive the item.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Item {
    pub options: BTreeMap<usize, PackingOption>,
}

impl Item {
    pub fn new(options: BTreeMap<usize, PackingOption>) -> Self {
        Item { options }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    d: usize,
    capacities: Vec<Vec<f64>>,
    items: Vec<Item>,
    variant: Variant,
}

/// Heavy/light classification of a single option against a bin capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heaviness {
    Heavy,
    Light,
}

/// Dense/sparse classification of a {0,1} option by support size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    Dense,
    Sparse,
}

/// Which partition `Instance::split` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitCriterion {
    HeavyLight,
    DenseSparse,
}

fn check_entries(values: &[f64], what: &str) -> Result<()> {
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::structural(format!(
                "{what} must be finite and non-negative, got {v}"
            )));
        }
    }
    Ok(())
}

impl Instance {
    /// Validates and builds an instance. All numeric entries must be finite
    /// and non-negative; the `zero_one` and `vmkp` variants additionally
    /// require unit capacities, and respectively {0,1} weights or
    /// bin-independent options.
    pub fn new(
        d: usize,
        capacities: Vec<Vec<f64>>,
        items: Vec<Item>,
        variant: Variant,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::structural("dimension d must be at least 1"));
        }
        for (j, cap) in capacities.iter().enumerate() {
            if cap.len() != d {
                return Err(Error::structural(format!(
                    "bin {} capacity has {} entries, expected d={}",
                    j + 1,
                    cap.len(),
                    d
                )));
            }
            check_entries(cap, "capacity")?;
        }
        let m = capacities.len();
        for (i, item) in items.iter().enumerate() {
            for (&j, opt) in &item.options {
                if j >= m {
                    return Err(Error::structural(format!(
                        "item {} references bin {} but instance has m={}",
                        i + 1,
                        j + 1,
                        m
                    )));
                }
                if opt.weights.len() != d {
                    return Err(Error::structural(format!(
                        "item {} option for bin {} has {} weights, expected d={}",
                        i + 1,
                        j + 1,
                        opt.weights.len(),
                        d
                    )));
                }
                check_entries(&opt.weights, "weight")?;
                if !opt.profit.is_finite() || opt.profit < 0.0 {
                    return Err(Error::structural(format!(
                        "profit must be finite and non-negative, got {}",
                        opt.profit
                    )));
                }
            }
        }
        let inst = Instance {
            d,
            capacities,
            items,
            variant,
        };
        inst.check_variant()?;
        Ok(inst)
    }

    fn check_variant(&self) -> Result<()> {
        match self.variant {
            Variant::General => Ok(()),
            Variant::ZeroOne => {
                if !self
                    .capacities
                    .iter()
                    .all(|cap| cap.iter().all(|&b| b == 1.0))
                {
                    return Err(Error::structural(
                        "zero_one variant requires unit capacities",
                    ));
                }
                for (i, item) in self.items.iter().enumerate() {
                    for opt in item.options.values() {
                        if !opt.weights.iter().all(|&w| w == 0.0 || w == 1.0) {
                            return Err(Error::structural(format!(
                                "zero_one variant requires weights in {{0,1}}, item {} violates",
                                i + 1
                            )));
                        }
                    }
                }
                Ok(())
            }
            Variant::Vmkp => {
                if !self
                    .capacities
                    .iter()
                    .all(|cap| cap.iter().all(|&b| b == 1.0))
                {
                    return Err(Error::structural("vmkp variant requires unit capacities"));
                }
                let m = self.capacities.len();
                for (i, item) in self.items.iter().enumerate() {
                    if item.options.is_empty() {
                        continue;
                    }
                    if item.options.len() != m {
                        return Err(Error::structural(format!(
                            "vmkp item {} must have an option for every bin or none",
                            i + 1
                        )));
                    }
                    let first = &item.options[&0];
                    if !item.options.values().all(|o| o == first) {
                        return Err(Error::structural(format!(
                            "vmkp item {} has bin-dependent options",
                            i + 1
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Builds a vmkp instance from one `(weights, profit)` option per item,
    /// replicated over `m` unit bins.
    pub fn vmkp(d: usize, m: usize, items: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let capacities = vec![vec![1.0; d]; m];
        let items = items
            .into_iter()
            .map(|(w, p)| {
                let opt = PackingOption::new(w, p);
                Item::new((0..m).map(|j| (j, opt.clone())).collect())
            })
            .collect();
        Instance::new(d, capacities, items, Variant::Vmkp)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn capacities(&self) -> &[Vec<f64>] {
        &self.capacities
    }

    pub fn capacity(&self, bin: usize) -> &[f64] {
        &self.capacities[bin]
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn option(&self, item: usize, bin: usize) -> Option<&PackingOption> {
        self.items.get(item).and_then(|it| it.options.get(&bin))
    }

    /// Total number of present packing options.
    pub fn option_count(&self) -> usize {
        self.items.iter().map(|it| it.options.len()).sum()
    }

    /// Partitions the options into two complementary sub-instances. Both
    /// sides keep every item and bin; each option lands on exactly one side.
    /// The first component holds the heavy (resp. dense) options.
    pub fn split(&self, criterion: SplitCriterion) -> Result<(Instance, Instance)> {
        if criterion == SplitCriterion::DenseSparse && self.variant != Variant::ZeroOne {
            return Err(Error::structural(
                "dense/sparse split applies only to the zero_one variant",
            ));
        }
        let mut first_items = Vec::with_capacity(self.n());
        let mut second_items = Vec::with_capacity(self.n());
        for item in &self.items {
            let mut first = BTreeMap::new();
            let mut second = BTreeMap::new();
            for (&j, opt) in &item.options {
                let goes_first = match criterion {
                    SplitCriterion::HeavyLight => {
                        classify_heavy(opt, &self.capacities[j])? == Heaviness::Heavy
                    }
                    SplitCriterion::DenseSparse => classify_dense(opt, self.d)? == Density::Dense,
                };
                if goes_first {
                    first.insert(j, opt.clone());
                } else {
                    second.insert(j, opt.clone());
                }
            }
            first_items.push(Item::new(first));
            second_items.push(Item::new(second));
        }
        let first = Instance::new(self.d, self.capacities.clone(), first_items, self.variant)?;
        let second = Instance::new(self.d, self.capacities.clone(), second_items, self.variant)?;
        Ok((first, second))
    }

    /// Restricts the instance to a set of items. Indices are deduplicated
    /// and sorted; the returned map sends new item indices to original ones.
    pub fn project(&self, item_set: &[usize]) -> Result<(Instance, Vec<usize>)> {
        let mut indices: Vec<usize> = item_set.to_vec();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return Err(Error::structural(format!(
                "project index {} out of range for n={}",
                bad + 1,
                self.n()
            )));
        }
        let items = indices.iter().map(|&i| self.items[i].clone()).collect();
        let inst = Instance::new(self.d, self.capacities.clone(), items, self.variant)?;
        Ok((inst, indices))
    }
}

/// An option is light iff it consumes at most half of the bin's capacity in
/// every dimension; ties count as light.
pub fn classify_heavy(option: &PackingOption, capacity: &[f64]) -> Result<Heaviness> {
    if option.weights.len() != capacity.len() {
        return Err(Error::structural(format!(
            "classify_heavy: option has {} weights, capacity has {} entries",
            option.weights.len(),
            capacity.len()
        )));
    }
    let light = option
        .weights
        .iter()
        .zip(capacity)
        .all(|(w, b)| *w <= b * 0.5);
    Ok(if light {
        Heaviness::Light
    } else {
        Heaviness::Heavy
    })
}

/// A {0,1} option is dense iff its support has at least sqrt(d) non-zero
/// entries. The comparison squares the support count so the irrational
/// threshold never touches floating point.
pub fn classify_dense(option: &PackingOption, d: usize) -> Result<Density> {
    if option.weights.len() != d {
        return Err(Error::structural(format!(
            "classify_dense: option has {} weights, expected d={}",
            option.weights.len(),
            d
        )));
    }
    let mut support = 0usize;
    for &w in &option.weights {
        if w == 1.0 {
            support += 1;
        } else if w != 0.0 {
            return Err(Error::structural(format!(
                "classify_dense requires {{0,1}} weights, got {w}"
            )));
        }
    }
    Ok(if support * support >= d {
        Density::Dense
    } else {
        Density::Sparse
    })
}

/// A set of (item, bin) assignments with running per-bin consumption.
/// Assignments are stored in insertion order; every derived quantity folds
/// over that order, so recomputation reproduces the incremental state
/// bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    assignments: Vec<(usize, usize)>,
    consumption: Vec<Vec<f64>>,
    items_per_bin: Vec<usize>,
    assigned: Vec<bool>,
}

impl Packing {
    pub fn new(instance: &Instance) -> Self {
        Packing {
            assignments: Vec::new(),
            consumption: vec![vec![0.0; instance.d()]; instance.m()],
            items_per_bin: vec![0; instance.m()],
            assigned: vec![false; instance.n()],
        }
    }

    pub fn assignments(&self) -> &[(usize, usize)] {
        &self.assignments
    }

    pub fn consumption(&self) -> &[Vec<f64>] {
        &self.consumption
    }

    pub fn bin_item_count(&self, bin: usize) -> usize {
        self.items_per_bin[bin]
    }

    pub fn is_assigned(&self, item: usize) -> bool {
        self.assigned[item]
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Whether adding `item` to `bin` keeps the bin within capacity.
    /// Comparisons are exact on the stored values.
    pub fn fits(&self, instance: &Instance, item: usize, bin: usize) -> Result<bool> {
        let opt = instance.option(item, bin).ok_or_else(|| {
            Error::structural(format!(
                "no option for item {} in bin {}",
                item + 1,
                bin + 1
            ))
        })?;
        let cap = instance.capacity(bin);
        Ok(opt
            .weights
            .iter()
            .zip(&self.consumption[bin])
            .zip(cap)
            .all(|((w, c), b)| c + w <= *b))
    }

    /// Commits `item` to `bin`, updating the consumption state. Fails if the
    /// item is already packed or has no option for the bin. Does not check
    /// capacity; callers decide the commit rule.
    pub fn assign(&mut self, instance: &Instance, item: usize, bin: usize) -> Result<()> {
        if self.assigned[item] {
            return Err(Error::structural(format!(
                "item {} is already packed",
                item + 1
            )));
        }
        let opt = instance.option(item, bin).ok_or_else(|| {
            Error::structural(format!(
                "no option for item {} in bin {}",
                item + 1,
                bin + 1
            ))
        })?;
        for (c, w) in self.consumption[bin].iter_mut().zip(&opt.weights) {
            *c += w;
        }
        self.items_per_bin[bin] += 1;
        self.assigned[item] = true;
        self.assignments.push((item, bin));
        Ok(())
    }

    /// Total consumption summed over bins and dimensions.
    pub fn total_consumption(&self) -> f64 {
        self.consumption.iter().flatten().sum()
    }
}

/// Sum of profits over the packing's assignments, folded in stored order.
pub fn profit_of(instance: &Instance, packing: &Packing) -> Result<f64> {
    let mut total = 0.0;
    for &(i, j) in packing.assignments() {
        let opt = instance.option(i, j).ok_or_else(|| {
            Error::structural(format!(
                "packing references absent option ({}, {})",
                i + 1,
                j + 1
            ))
        })?;
        total += opt.profit;
    }
    Ok(total)
}

/// Recomputes consumption from the assignment list and compares against the
/// capacities with exact `<=`.
pub fn is_feasible(instance: &Instance, packing: &Packing) -> Result<bool> {
    let mut consumption = vec![vec![0.0; instance.d()]; instance.m()];
    for &(i, j) in packing.assignments() {
        let opt = instance.option(i, j).ok_or_else(|| {
            Error::structural(format!(
                "packing references absent option ({}, {})",
                i + 1,
                j + 1
            ))
        })?;
        for (c, w) in consumption[j].iter_mut().zip(&opt.weights) {
            *c += w;
        }
    }
    for (j, cap) in instance.capacities().iter().enumerate() {
        for (c, b) in consumption[j].iter().zip(cap) {
            if c > b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// JSON file format
//
// {"d":1,"bins":[[1.0]],"items":[{"options":{"1":{"w":[0.4],"p":0.5}}}],
//  "variant":"general"}
//
// Bin indices are 1-based in files. The vmkp compact form replaces "bins"
// with "m" and flattens each item to {"w":[...],"p":...}. Weight and profit
// values may be JSON numbers or exact strings ("0.125", "1/3").
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NumOrText(#[serde(deserialize_with = "de_num_or_text")] serde_json::Value);

fn de_num_or_text<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<serde_json::Value, D::Error> {
    let v = serde_json::Value::deserialize(d)?;
    match &v {
        serde_json::Value::Number(_) | serde_json::Value::String(_) => Ok(v),
        other => Err(D::Error::custom(format!(
            "expected number or string, got {other}"
        ))),
    }
}

impl NumOrText {
    fn to_f64(&self) -> Result<f64> {
        match &self.0 {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
            serde_json::Value::String(s) => crate::hardgen::parse_exact_value(s),
            _ => unreachable!(),
        }
    }

    fn num(v: f64) -> Self {
        NumOrText(serde_json::json!(v))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FileOption {
    w: Vec<NumOrText>,
    p: NumOrText,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum FileItem {
    Mapped {
        options: BTreeMap<String, FileOption>,
    },
    Compact {
        w: Vec<NumOrText>,
        p: NumOrText,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct FileInstance {
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<Vec<Vec<f64>>>,
    items: Vec<FileItem>,
    variant: String,
}

impl Instance {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: FileInstance =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let variant = Variant::parse(&file.variant)?;
        let (m, capacities) = match (&file.bins, file.m) {
            (Some(bins), _) => (bins.len(), bins.clone()),
            (None, Some(m)) => (m, vec![vec![1.0; file.d]; m]),
            (None, None) => {
                return Err(Error::Parse(
                    "instance needs either \"bins\" or \"m\"".into(),
                ))
            }
        };
        let mut items = Vec::with_capacity(file.items.len());
        for (idx, fi) in file.items.iter().enumerate() {
            match fi {
                FileItem::Mapped { options } => {
                    let mut map = BTreeMap::new();
                    for (key, fo) in options {
                        let bin: usize = key.parse().map_err(|_| {
                            Error::Parse(format!("bad bin key {key:?} in item {}", idx + 1))
                        })?;
                        if bin == 0 || bin > m {
                            return Err(Error::Parse(format!(
                                "bin key {} out of range 1..={} in item {}",
                                bin,
                                m,
                                idx + 1
                            )));
                        }
                        let weights = fo.w.iter().map(|v| v.to_f64()).collect::<Result<_>>()?;
                        map.insert(bin - 1, PackingOption::new(weights, fo.p.to_f64()?));
                    }
                    items.push(Item::new(map));
                }
                FileItem::Compact { w, p } => {
                    if variant != Variant::Vmkp {
                        return Err(Error::Parse(
                            "compact item form is only valid for the vmkp variant".into(),
                        ));
                    }
                    let weights: Vec<f64> = w.iter().map(|v| v.to_f64()).collect::<Result<_>>()?;
                    let opt = PackingOption::new(weights, p.to_f64()?);
                    items.push(Item::new((0..m).map(|j| (j, opt.clone())).collect()));
                }
            }
        }
        Instance::new(file.d, capacities, items, variant)
    }

    pub fn to_json_string(&self) -> String {
        let file = if self.variant == Variant::Vmkp {
            FileInstance {
                d: self.d,
                m: Some(self.m()),
                bins: None,
                items: self
                    .items
                    .iter()
                    .map(|item| match item.options.get(&0) {
                        Some(opt) => FileItem::Compact {
                            w: opt.weights.iter().map(|&w| NumOrText::num(w)).collect(),
                            p: NumOrText::num(opt.profit),
                        },
                        None => FileItem::Mapped {
                            options: BTreeMap::new(),
                        },
                    })
                    .collect(),
                variant: self.variant.as_str().into(),
            }
        } else {
            FileInstance {
                d: self.d,
                m: None,
                bins: Some(self.capacities.clone()),
                items: self
                    .items
                    .iter()
                    .map(|item| FileItem::Mapped {
                        options: item
                            .options
                            .iter()
                            .map(|(&j, opt)| {
                                (
                                    (j + 1).to_string(),
                                    FileOption {
                                        w: opt.weights.iter().map(|&w| NumOrText::num(w)).collect(),
                                        p: NumOrText::num(opt.profit),
                                    },
                                )
                            })
                            .collect(),
                    })
                    .collect(),
                variant: self.variant.as_str().into(),
            }
        };
        serde_json::to_string(&file).expect("instance serialization cannot fail")
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Instance::from_json_str(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(weights: &[f64], profit: f64) -> PackingOption {
        PackingOption::new(weights.to_vec(), profit)
    }

    /// One bin of capacity 1, items (w, p) = (1, 1), (0.4, 0.5), (0.5, 0.6).
    pub(crate) fn three_item_instance() -> Instance {
        let items = vec![
            Item::new([(0, opt(&[1.0], 1.0))].into()),
            Item::new([(0, opt(&[0.4], 0.5))].into()),
            Item::new([(0, opt(&[0.5], 0.6))].into()),
        ];
        Instance::new(1, vec![vec![1.0]], items, Variant::General).unwrap()
    }

    #[test]
    fn classify_heavy_boundary() {
        assert_eq!(
            classify_heavy(&opt(&[0.5], 1.0), &[1.0]).unwrap(),
            Heaviness::Light
        );
        assert_eq!(
            classify_heavy(&opt(&[0.6, 0.2], 1.0), &[1.0, 1.0]).unwrap(),
            Heaviness::Heavy
        );
        assert_eq!(
            classify_heavy(&opt(&[0.0, 0.0, 0.0], 1.0), &[1.0, 1.0, 1.0]).unwrap(),
            Heaviness::Light
        );
    }

    #[test]
    fn classify_heavy_dimension_mismatch() {
        assert!(classify_heavy(&opt(&[0.5, 0.5], 1.0), &[1.0]).is_err());
    }

    #[test]
    fn classify_heavy_scale_invariant() {
        // simultaneous positive per-coordinate scaling of w and b
        let w = [0.3, 0.51];
        let b = [1.0, 1.0];
        let base = classify_heavy(&opt(&w, 1.0), &b).unwrap();
        for scale in [0.25, 2.0, 1024.0] {
            let ws: Vec<f64> = w.iter().map(|x| x * scale).collect();
            let bs: Vec<f64> = b.iter().map(|x| x * scale).collect();
            assert_eq!(classify_heavy(&opt(&ws, 1.0), &bs).unwrap(), base);
        }
    }

    #[test]
    fn classify_dense_examples() {
        assert_eq!(
            classify_dense(&opt(&[1.0, 0.0, 0.0, 0.0], 1.0), 4).unwrap(),
            Density::Sparse
        );
        assert_eq!(
            classify_dense(&opt(&[1.0, 1.0, 0.0, 0.0], 1.0), 4).unwrap(),
            Density::Dense
        );
        assert_eq!(
            classify_dense(&opt(&[1.0], 1.0), 1).unwrap(),
            Density::Dense
        );
        assert!(classify_dense(&opt(&[0.5], 1.0), 1).is_err());
    }

    #[test]
    fn split_heavy_light_boundary() {
        let inst = three_item_instance();
        let (heavy, light) = inst.split(SplitCriterion::HeavyLight).unwrap();
        assert_eq!(heavy.n(), 3);
        assert_eq!(light.n(), 3);
        // w = 1 is heavy; w = 0.4 and w = 0.5 are light
        assert!(heavy.option(0, 0).is_some());
        assert!(heavy.option(1, 0).is_none());
        assert!(heavy.option(2, 0).is_none());
        assert!(light.option(0, 0).is_none());
        assert!(light.option(1, 0).is_some());
        assert!(light.option(2, 0).is_some());
    }

    #[test]
    fn split_all_light_leaves_heavy_empty() {
        let items = vec![
            Item::new([(0, opt(&[0.1], 1.0))].into()),
            Item::new([(0, opt(&[0.2], 1.0))].into()),
        ];
        let inst = Instance::new(1, vec![vec![1.0]], items, Variant::General).unwrap();
        let (heavy, light) = inst.split(SplitCriterion::HeavyLight).unwrap();
        assert_eq!(heavy.option_count(), 0);
        assert_eq!(light.option_count(), 2);
    }

    #[test]
    fn split_dense_sparse_by_support() {
        let items = vec![
            Item::new([(0, opt(&[1.0, 0.0, 0.0, 0.0], 1.0))].into()),
            Item::new([(0, opt(&[1.0, 1.0, 0.0, 0.0], 1.0))].into()),
            Item::new([(0, opt(&[1.0, 1.0, 1.0, 1.0], 1.0))].into()),
        ];
        let inst = Instance::new(4, vec![vec![1.0; 4]], items, Variant::ZeroOne).unwrap();
        let (dense, sparse) = inst.split(SplitCriterion::DenseSparse).unwrap();
        assert!(dense.option(0, 0).is_none());
        assert!(dense.option(1, 0).is_some());
        assert!(dense.option(2, 0).is_some());
        assert!(sparse.option(0, 0).is_some());
        assert_eq!(sparse.option_count(), 1);
    }

    #[test]
    fn split_requires_zero_one_for_dense() {
        let inst = three_item_instance();
        assert!(inst.split(SplitCriterion::DenseSparse).is_err());
    }

    #[test]
    fn project_identity_and_empty() {
        let inst = three_item_instance();
        let (all, map) = inst.project(&[0, 1, 2]).unwrap();
        assert_eq!(all, inst);
        assert_eq!(map, vec![0, 1, 2]);

        let (none, map) = inst.project(&[]).unwrap();
        assert_eq!(none.n(), 0);
        assert_eq!(none.m(), 1);
        assert!(map.is_empty());
    }

    #[test]
    fn project_remaps_indices() {
        let inst = three_item_instance();
        let (sub, map) = inst.project(&[2, 0]).unwrap();
        assert_eq!(sub.n(), 2);
        assert_eq!(map, vec![0, 2]);
        assert_eq!(sub.option(1, 0).unwrap().profit, 0.6);
        assert!(inst.project(&[3]).is_err());
    }

    #[test]
    fn profit_and_feasibility() {
        let inst = three_item_instance();
        let mut p = Packing::new(&inst);
        assert_eq!(profit_of(&inst, &p).unwrap(), 0.0);
        assert!(is_feasible(&inst, &p).unwrap());

        p.assign(&inst, 1, 0).unwrap();
        p.assign(&inst, 2, 0).unwrap();
        let profit = profit_of(&inst, &p).unwrap();
        assert_eq!(profit, 0.5 + 0.6);
        assert!((profit - 1.1).abs() < 1e-12);
        assert!(is_feasible(&inst, &p).unwrap());

        // adding w = 1.0 on top of 0.9 exceeds the capacity
        p.assign(&inst, 0, 0).unwrap();
        assert!(!is_feasible(&inst, &p).unwrap());
    }

    #[test]
    fn incremental_consumption_matches_recompute() {
        let inst = three_item_instance();
        let mut p = Packing::new(&inst);
        p.assign(&inst, 2, 0).unwrap();
        p.assign(&inst, 1, 0).unwrap();
        let mut recomputed = [0.0];
        for &(i, j) in p.assignments() {
            recomputed[j] += inst.option(i, j).unwrap().weights[0];
        }
        assert_eq!(p.consumption()[0][0], recomputed[0]);
    }

    #[test]
    fn double_assign_rejected() {
        let inst = three_item_instance();
        let mut p = Packing::new(&inst);
        p.assign(&inst, 0, 0).unwrap();
        assert!(p.assign(&inst, 0, 0).is_err());
    }

    #[test]
    fn json_round_trip_general() {
        let inst = three_item_instance();
        let text = inst.to_json_string();
        let back = Instance::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn json_compact_vmkp() {
        let inst = Instance::vmkp(
            1,
            2,
            vec![(vec![0.4], 0.5), (vec![0.5], 0.6), (vec![1.0], 1.0)],
        )
        .unwrap();
        let text = inst.to_json_string();
        assert!(text.contains("\"m\":2"));
        let back = Instance::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn json_one_based_bins() {
        let text = r#"{"d":1,"bins":[[1.0],[2.0]],
            "items":[{"options":{"2":{"w":[0.5],"p":3.0}}}],"variant":"general"}"#;
        let inst = Instance::from_json_str(text).unwrap();
        assert!(inst.option(0, 0).is_none());
        assert_eq!(inst.option(0, 1).unwrap().profit, 3.0);
    }

    #[test]
    fn json_rejects_bad_inputs() {
        assert!(Instance::from_json_str("{}").is_err());
        let neg = r#"{"d":1,"bins":[[1.0]],
            "items":[{"options":{"1":{"w":[-0.5],"p":1.0}}}],"variant":"general"}"#;
        assert!(Instance::from_json_str(neg).is_err());
        let zero_one_bad = r#"{"d":1,"bins":[[1.0]],
            "items":[{"options":{"1":{"w":[0.5],"p":1.0}}}],"variant":"zero_one"}"#;
        assert!(Instance::from_json_str(zero_one_bad).is_err());
    }

    #[test]
    fn split_is_a_partition() {
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(&any::<u64>(), |seed| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let n = 1 + (rng.random::<u32>() as usize) % 6;
                let m = 1 + (rng.random::<u32>() as usize) % 3;
                let d = 1 + (rng.random::<u32>() as usize) % 3;
                let items: Vec<Item> = (0..n)
                    .map(|_| {
                        let mut options = BTreeMap::new();
                        for j in 0..m {
                            if rng.random::<f64>() < 0.7 {
                                let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                                options.insert(j, PackingOption::new(w, rng.random::<f64>()));
                            }
                        }
                        Item::new(options)
                    })
                    .collect();
                let caps = vec![vec![1.0; d]; m];
                let inst = Instance::new(d, caps, items, Variant::General).unwrap();
                let (heavy, light) = inst.split(SplitCriterion::HeavyLight).unwrap();
                // every option lands on exactly one side, unchanged; merging
                // the sides reconstructs the original option multiset
                for i in 0..n {
                    for j in 0..m {
                        let original = inst.option(i, j);
                        let (h, l) = (heavy.option(i, j), light.option(i, j));
                        match original {
                            None => prop_assert!(h.is_none() && l.is_none()),
                            Some(opt) => {
                                prop_assert!(h.is_some() != l.is_some());
                                prop_assert_eq!(h.or(l).unwrap(), opt);
                            }
                        }
                    }
                }
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn json_round_trips_random_instances() {
        use proptest::prelude::*;
        use rand::SeedableRng;
        let mut runner = proptest::test_runner::TestRunner::default();
        runner
            .run(&(any::<u64>(), 0usize..3), |(seed, variant_pick)| {
                let variant = [Variant::General, Variant::ZeroOne, Variant::Vmkp][variant_pick];
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut params = crate::hardgen::RandomInstanceParams::new(5, 2, 2, variant);
                params.option_density = 0.8;
                let inst = crate::hardgen::gen_random(&params, &mut rng).unwrap();
                let parsed = Instance::from_json_str(&inst.to_json_string()).unwrap();
                prop_assert_eq!(parsed, inst);
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn variant_invariants_enforced() {
        // vmkp with bin-dependent options
        let items = vec![Item::new(
            [(0, opt(&[0.5], 1.0)), (1, opt(&[0.4], 1.0))].into(),
        )];
        assert!(Instance::new(1, vec![vec![1.0], vec![1.0]], items, Variant::Vmkp).is_err());
        // vmkp with non-unit capacity
        let items = vec![Item::new([(0, opt(&[0.5], 1.0))].into())];
        assert!(Instance::new(1, vec![vec![2.0]], items, Variant::Vmkp).is_err());
    }
}
