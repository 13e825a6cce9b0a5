//! Oracle agreement on tie-saturated instances: discrete weights and
//! profits make equal-value packings ubiquitous, so both exact methods
//! must converge on the same lexicographically-smallest assignment.

use rand::Rng;
use ropack::harness::trial_rng;
use ropack::instance::{Instance, Item, PackingOption, Variant};
use ropack::oracle::{opt_branch_bound, opt_enumerate, DEFAULT_NODE_BUDGET};

#[test]
fn discrete_tie_instances_agree() {
    let weights = [0.25, 0.5, 0.75];
    let profits = [0.5, 1.0, 1.5];
    for k in 0..500u64 {
        let mut rng = trial_rng(90210, k);
        let n = 1 + (rng.random::<u32>() as usize) % 8;
        let m = 1 + (rng.random::<u32>() as usize) % 3;
        let d = 1 + (rng.random::<u32>() as usize) % 2;
        let mut items = Vec::new();
        for _ in 0..n {
            let mut options = std::collections::BTreeMap::new();
            for j in 0..m {
                if rng.random::<f64>() < 0.8 {
                    let w: Vec<f64> = (0..d)
                        .map(|_| weights[(rng.random::<u32>() as usize) % 3])
                        .collect();
                    let p = profits[(rng.random::<u32>() as usize) % 3];
                    options.insert(j, PackingOption::new(w, p));
                }
            }
            items.push(Item::new(options));
        }
        let inst = Instance::new(d, vec![vec![1.0; d]; m], items, Variant::General).unwrap();
        let e = opt_enumerate(&inst).unwrap();
        let b = opt_branch_bound(&inst, DEFAULT_NODE_BUDGET).unwrap();
        assert!(!b.lower_bound_only);
        assert_eq!(e.value, b.value, "instance {}", inst.to_json_string());
        assert_eq!(
            e.packing.as_ref().unwrap().assignments(),
            b.packing.as_ref().unwrap().assignments(),
            "instance {}",
            inst.to_json_string()
        );
    }
}
