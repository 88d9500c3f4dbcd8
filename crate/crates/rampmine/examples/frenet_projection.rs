//! Lane-relative coordinates on the built-in merge site: project world
//! points onto lane centerlines, look up the containing lane and track
//! the normalized position along the merging zone.
//!
//! Run with `cargo run --example frenet_projection`.

use rampmine::geometry::{normalized_maneuver_position, Point};
use rampmine::synth::merge_site;

fn main() {
    let site = merge_site();
    println!(
        "site: {} lanes, {} markings, on-ramp '{}' merges into '{}'",
        site.lanes.len(),
        site.markings().count(),
        site.on_ramp().id,
        site.adjacent_mainline().id,
    );

    // A straight cut from the ramp center across both mainline lanes.
    println!(
        "\n{:>7} {:>7}  {:<9} {:>8} {:>8} {:>7} {:>9}",
        "x", "y", "lane", "s", "offset", "width", "ramp pos"
    );
    for i in 0..10 {
        let p = Point::new(120.0 + 20.0 * i as f64, -1.875 + 0.9 * i as f64);
        let (lane_id, s, d, w) = match site.lane_at(p) {
            Some(lane) => {
                let pos = site.signed_center_offset(lane, p);
                (
                    lane.id.to_string(),
                    format!("{:8.1}", pos.s),
                    format!("{:8.2}", pos.d),
                    format!("{:7.2}", site.lane_width_at(lane, p)),
                )
            }
            None => ("off-road".into(), "-".into(), "-".into(), "-".into()),
        };
        println!(
            "{:>7.1} {:>7.2}  {:<9} {:>8} {:>8} {:>7} {:>9.3}",
            p.x,
            p.y,
            lane_id,
            s,
            d,
            w,
            normalized_maneuver_position(p, &site),
        );
    }

    // The ramp narrows in the taper; the width lookup follows it.
    println!("\nramp width along the taper:");
    for &x in &[250.0, 300.0, 320.0, 340.0] {
        let p = Point::new(x, -1.0);
        println!(
            "  x = {x:>5.1}: {:.2} m",
            site.lane_width_at(site.on_ramp(), p)
        );
    }
}
