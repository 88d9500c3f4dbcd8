//! Post-encroachment time on scripted merge fixtures: measure the
//! signed PET between a merging ego and a mainline challenger, then turn
//! a set of challenger results into a merge category, accepted gap and
//! criticality flag.
//!
//! Run with `cargo run --example assess_pet`.

use rampmine::assessment::pet;
use rampmine::categorization::{accepted_gap, categorize, flag_critical, Category};
use rampmine::synth::generate_pet_pair;

fn main() {
    // Positive PET: the ego crosses the challenger's path behind it.
    // Negative: the ego cuts in ahead and the challenger arrives later.
    println!(
        "{:>9} {:>12} {:>10} {:>10} {:>7}",
        "headway", "ego", "expected", "measured", "error"
    );
    let mut results = Vec::new();
    for &headway in &[0.8, 1.6, 2.8] {
        for &ego_behind in &[true, false] {
            let (ego, challenger, expected) = generate_pet_pair(headway, ego_behind);
            let r = pet(&ego, &challenger);
            let got = r.pet_s.expect("paths cross");
            println!(
                "{:>8.1}s {:>12} {:>9.3}s {:>9.3}s {:>6.0}ms",
                headway,
                if ego_behind { "behind" } else { "in front" },
                expected,
                got,
                (got - expected).abs() * 1e3,
            );
            results.push(r);
        }
    }

    // One merge faces many challengers; their signed PETs decide the
    // category. Take the measured fixtures as the challenger set: both
    // signs present means the ego merged into a gap between vehicles.
    let category = categorize(&results);
    assert_eq!(category, Category::Into);
    println!(
        "\nall six as one challenger set: category '{category}', accepted gap {:.2} s",
        accepted_gap(&results).expect("into-gap merge"),
    );
    for threshold in [0.5, 1.0, 2.0] {
        println!(
            "  critical below {threshold:.1} s: {}",
            flag_critical(&results, threshold)
        );
    }
}
