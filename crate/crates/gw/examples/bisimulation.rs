//! Parses a functor signature, quotients a labeled transition system by
//! bisimilarity, and verifies the projection is a coalgebra homomorphism.

use gw::coalgebra::{
    bisimilarity_partition, check_homomorphism, quotient_lts, FunctorSignature, Lts,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sig = FunctorSignature::parse("P(A{coin, brew} x _)")?;
    println!("behaviour functor: {sig}");

    // Two vending machines that differ only in state names, and a third
    // that can no longer brew after the first coin.
    let lts = Lts::from_json(
        r#"{
        "states": ["idle", "ready", "idle2", "ready2", "stuck", "dead"],
        "labels": ["coin", "brew"],
        "transitions": [
            ["idle", "coin", "ready"], ["ready", "brew", "idle"],
            ["idle2", "coin", "ready2"], ["ready2", "brew", "idle2"],
            ["stuck", "coin", "dead"]
        ]
    }"#,
    )?;

    let blocks = bisimilarity_partition(&lts);
    println!("\nbisimilarity classes:");
    for block in &blocks {
        let names: Vec<&str> = block.iter().map(String::as_str).collect();
        println!("  {{{}}}", names.join(", "));
    }

    let (quotient, projection) = quotient_lts(&lts, &blocks)?;
    println!(
        "\nquotient: {} states, {} transitions (from {} and {})",
        quotient.states().len(),
        quotient.transitions().len(),
        lts.states().len(),
        lts.transitions().len(),
    );

    let verdict = check_homomorphism(
        &lts.to_coalgebra()?,
        &quotient.to_coalgebra()?,
        &projection,
    )?;
    println!("projection is a coalgebra homomorphism: {}", verdict.holds());
    Ok(())
}
