//! Runs asynchronous tabular Q-learning against the value-iteration oracle
//! on a two-state MDP and watches the sup-norm error shrink with budget.

use gw::url::{async_q_learning, value_iteration, FiniteMdp, LearnConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mdp = FiniteMdp::from_json(
        r#"{
        "states": ["low", "high"],
        "actions": ["wait", "push"],
        "gamma": 0.8,
        "transitions": {
            "low,wait": [["low", 1.0]],
            "low,push": [["high", 0.9], ["low", 0.1]],
            "high,wait": [["high", 0.7], ["low", 0.3]],
            "high,push": [["high", 1.0]]
        },
        "rewards": { "high,wait": 1.0, "high,push": 0.5, "low,push": -0.1 }
    }"#,
    )?;

    let (q_star, sweeps) = value_iteration(&mdp, 1e-12, 100_000)?;
    println!("value iteration converged in {sweeps} sweeps");
    for (cell, value) in q_star.to_named(&mdp) {
        println!("  Q*({cell}) = {value:.6}");
    }

    println!("\nasynchronous Q-learning:");
    for budget in [1_000u64, 10_000, 100_000, 1_000_000] {
        let cfg = LearnConfig {
            budget,
            seed: 7,
            record_stride: budget,
            ..LearnConfig::default()
        };
        let (q, _) = async_q_learning(&mdp, &cfg)?;
        println!(
            "  {budget:>9} updates: |Q - Q*|_inf = {:.5}",
            q.linf_distance(&q_star)
        );
    }
    Ok(())
}
