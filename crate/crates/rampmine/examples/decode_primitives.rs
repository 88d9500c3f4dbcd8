//! Driving-primitive decoding for a single merge: extract the
//! normalized observation features frame by frame, decode them into the
//! Idle / Approach / Cross / Change sequence and show where the
//! reference lane re-anchors to the target lane.
//!
//! Run with `cargo run --example decode_primitives`.

use rampmine::features::{reference_lane_tracking, TrackingConfig};
use rampmine::hmm::{viterbi, HmmParams};
use rampmine::synth::{generate, SynthConfig};

fn main() -> Result<(), rampmine::Error> {
    let data = generate(&SynthConfig {
        seed: 21,
        n_merges: 1,
        n_aborts: 0,
        n_mainline: 0,
        noise_std_m: 0.0,
    })?;
    let trajectory = &data.trajectories[0];
    let gt = data.labels[0].maneuver.as_ref().expect("merge has a window");

    let features = reference_lane_tracking(trajectory, &data.lanes, TrackingConfig::default())?;
    let decoded = viterbi(&features, &HmmParams::default())?;

    println!(
        "{}: {} frames, scripted merge window frames [{}, {}]",
        trajectory.id,
        features.observations.len(),
        gt.start_frame,
        gt.end_frame
    );
    let anchors = features.re_anchor_frames();
    match anchors.as_slice() {
        [] => println!("reference lane never re-anchors"),
        frames => {
            for &f in frames {
                println!(
                    "re-anchor at frame {f} (t = {:.2} s): {} -> {}",
                    trajectory.states[f].t,
                    features.reference_lane[f - 1],
                    features.reference_lane[f],
                );
            }
        }
    }

    // Decoded primitive segments with their feature ranges.
    println!(
        "\n{:<10} {:>6} {:>6} {:>8} {:>8} {:>8}",
        "primitive", "from", "to", "dur s", "d_c in", "d_c out"
    );
    let labels = &decoded.labels;
    let mut start = 0;
    for i in 1..=labels.len() {
        if i < labels.len() && labels[i] == labels[start] {
            continue;
        }
        let end = i - 1;
        println!(
            "{:<10} {:>6} {:>6} {:>8.2} {:>8.3} {:>8.3}",
            labels[start].to_string(),
            start,
            end,
            trajectory.states[end].t - trajectory.states[start].t,
            features.observations[start].d_c,
            features.observations[end].d_c,
        );
        start = i;
    }
    println!("\ndecoded joint log likelihood: {:.1}", decoded.log_likelihood);
    Ok(())
}
