//! Pattern matching on primitive skeletons: score decoded label
//! sequences against the maneuver library with dynamic time warping and
//! round-trip a customized library through its JSON file format.
//!
//! Run with `cargo run --example match_patterns`.

use rampmine::extraction::{
    classify, default_patterns, load_patterns, run_length_compress, save_patterns, Pattern,
};
use rampmine::hmm::Primitive;

fn seq(indices: &[usize]) -> Vec<Primitive> {
    indices.iter().map(|&i| Primitive::ALL[i]).collect()
}

fn main() -> Result<(), rampmine::Error> {
    let patterns = default_patterns();
    println!("library:");
    for p in &patterns {
        let shape: Vec<String> = p.sequence.iter().map(|s| s.to_string()).collect();
        println!("  {:<16} {}", p.name, shape.join(" > "));
    }

    // Decoded sequences as they come out of the decoder: repeated labels,
    // sometimes missing the brief lane-change tail entirely.
    let observed: &[(&str, &[usize])] = &[
        ("clean merge", &[0, 0, 0, 1, 1, 2, 2, 2, 3, 3]),
        ("merge without tail", &[0, 0, 1, 1, 1, 2, 2, 2]),
        ("canceled merge", &[0, 1, 1, 2, 2, 2, 1, 1, 0, 0]),
        ("drifting entry", &[1, 1, 2, 2, 3]),
        ("never leaves idle", &[0, 0, 0, 0]),
    ];
    println!("\n{:<20} {:<16} {:>5}   all scores", "sequence", "best", "sim");
    for (name, indices) in observed {
        let labels = seq(indices);
        let skeleton = run_length_compress(&labels);
        let result = classify(&labels, &patterns)?;
        let scores: Vec<String> = result
            .scores
            .iter()
            .map(|(n, s)| format!("{n} {s:.2}"))
            .collect();
        println!(
            "{:<20} {:<16} {:>5.2}   {}  (skeleton len {})",
            name,
            result.pattern,
            result.similarity,
            scores.join(", "),
            skeleton.len(),
        );
    }

    // A site-specific library is an ordinary JSON file.
    let dir = std::env::temp_dir().join("rampmine-patterns");
    std::fs::create_dir_all(&dir).map_err(|e| rampmine::Error::io(&dir, e))?;
    let path = dir.join("patterns.json");
    let mut custom = default_patterns();
    custom.push(Pattern {
        name: "hesitating merge".into(),
        sequence: seq(&[0, 1, 2, 1, 2, 3]),
        merge_family: true,
    });
    save_patterns(&path, &custom)?;
    let reloaded = load_patterns(&path)?;
    println!(
        "\nwrote {} patterns to {} and read them back intact: {}",
        custom.len(),
        path.display(),
        reloaded == custom
    );
    Ok(())
}
