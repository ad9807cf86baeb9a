//! Renders the shaped reward over the (activity, z-score) plane.
//!
//!     cargo run --example reward_surface -- [THETA_T] [THETA_Z]
//!
//! Rewards above the neutral floor of 1 only appear where both thresholds
//! are met: activity at or below THETA_T (default 1) and z-score at or
//! below THETA_Z (default -2). The map makes the floor, the win region,
//! and the two monotone gradients visible at a glance.

use molgen::reward::{is_winning, reward, RewardParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let theta_t: f64 = args.next().map_or(1.0, |a| a.parse().expect("theta_t"));
    let theta_z: f64 = args.next().map_or(-2.0, |a| a.parse().expect("theta_z"));
    let params = RewardParams {
        alpha: -1.0,
        beta: 1.0,
        theta_t,
        theta_z,
    };

    let y_t_lo = theta_t - 5.0;
    let y_t_hi = theta_t + 2.0;
    let y_z_lo = theta_z - 3.0;
    let y_z_hi = theta_z + 2.0;
    let cols = 57;
    let rows = 21;

    println!("reward over activity y_t (rows) and z-score y_z (columns)");
    println!("alpha {}  beta {}  theta_t {theta_t}  theta_z {theta_z}", params.alpha, params.beta);
    println!("legend: '.' floor (exactly 1)   1-9 reward magnitude, capped at 9\n");

    let header: String = (0..cols)
        .map(|j| {
            let y_z = y_z_lo + (y_z_hi - y_z_lo) * j as f64 / (cols - 1) as f64;
            if (y_z - theta_z).abs() < 0.5 * (y_z_hi - y_z_lo) / (cols - 1) as f64 {
                '|'
            } else {
                ' '
            }
        })
        .collect();
    println!("          {header}  <- theta_z");

    for i in 0..rows {
        let y_t = y_t_lo + (y_t_hi - y_t_lo) * i as f64 / (rows - 1) as f64;
        let line: String = (0..cols)
            .map(|j| {
                let y_z = y_z_lo + (y_z_hi - y_z_lo) * j as f64 / (cols - 1) as f64;
                let r = reward(y_t, y_z, &params);
                if is_winning(r) {
                    std::char::from_digit((r.floor() as u32).min(9), 10).unwrap()
                } else {
                    '.'
                }
            })
            .collect();
        let marker = if i + 1 < rows {
            let next = y_t_lo + (y_t_hi - y_t_lo) * (i + 1) as f64 / (rows - 1) as f64;
            if y_t <= theta_t && next > theta_t {
                "  <- theta_t"
            } else {
                ""
            }
        } else {
            ""
        };
        println!("y_t {y_t:>5.2} {line}{marker}");
    }

    println!();
    for (y_t, y_z) in [
        (theta_t - 4.0, theta_z - 2.0),
        (theta_t - 1.0, theta_z - 0.5),
        (theta_t, theta_z),
        (theta_t + 0.1, theta_z - 3.0),
        (theta_t - 3.0, theta_z + 0.1),
    ] {
        let r = reward(y_t, y_z, &params);
        println!(
            "reward(y_t = {y_t:>5.2}, y_z = {y_z:>5.2}) = {r:<18} {}",
            if is_winning(r) { "winning" } else { "neutral" }
        );
    }
}
