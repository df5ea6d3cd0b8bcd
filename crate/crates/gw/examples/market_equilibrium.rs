//! Solves a three-tier network economy as a variational inequality and
//! checks the result against each agent's best response. Raising one
//! producer's demand intercepts shifts equilibrium flow toward it.

use gw::economy::{
    best_response_check, producer_utility, safe_step, solve_equilibrium, NetworkEconomy,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let econ = NetworkEconomy::default_instance(2, 2, 2)?;
    let alpha = safe_step(&econ);
    let (state, trace) = solve_equilibrium(&econ, alpha, 1e-10, 500_000)?;
    println!("symmetric 2x2x2 economy: {:?}", trace.status);
    for i in 0..2 {
        let flow: f64 = (0..4).map(|c| state.flows[i * 4 + c]).sum();
        println!(
            "  producer {i}: total flow {flow:.4}, utility {:.4}",
            producer_utility(&econ, i, &state)?
        );
    }
    let check = best_response_check(&econ, &state, 1e-4)?;
    println!(
        "  best-response check: equilibrium = {}, max improvement {:.2e}",
        check.equilibrium, check.max_improvement
    );

    // Producer 0 suddenly makes something consumers want more.
    let mut tilted = NetworkEconomy::default_instance(2, 2, 2)?;
    let mut intercepts = vec![2.0; 8];
    for c in 0..4 {
        intercepts[c] = 3.0;
    }
    tilted.set_demand_intercepts(intercepts)?;
    let (state, _) = solve_equilibrium(&tilted, safe_step(&tilted), 1e-10, 500_000)?;
    println!("\nafter raising producer 0's demand intercepts:");
    for i in 0..2 {
        let flow: f64 = (0..4).map(|c| state.flows[i * 4 + c]).sum();
        println!(
            "  producer {i}: total flow {flow:.4}, utility {:.4}",
            producer_utility(&tilted, i, &state)?
        );
    }
    Ok(())
}
