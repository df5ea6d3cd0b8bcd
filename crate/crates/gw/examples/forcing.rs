//! Kripke-Joyal forcing in presheaves over the arrow category: a stage can
//! force a double negation without forcing the formula itself, which no
//! classical model can do. Certificates make failures concrete.

use std::collections::BTreeMap;
use std::sync::Arc;

use gw::mumble::{parse_formula, smallcat, Model, Presheaf, Type, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cat = Arc::new(smallcat::arrow_category());
    println!("category: objects 0, 1 and one arrow u: 0 -> 1\n");

    // X is the representable presheaf of the object 1; Z is a "phantom"
    // type inhabited at stage 0 but empty at stage 1.
    let x = Presheaf::representable(cat.clone(), "1")?;
    let z = Presheaf::new(
        cat.clone(),
        BTreeMap::from([
            ("0".to_string(), vec![Value::atom("z")]),
            ("1".to_string(), vec![]),
        ]),
        BTreeMap::from([("u".to_string(), BTreeMap::new())]),
    )?;
    let mut model = Model::new(cat.clone());
    model.add_type("X", x)?;
    model.add_type("Z", z)?;
    model.add_function(
        "m",
        Type::base("Z"),
        Type::base("X"),
        BTreeMap::from([
            (
                "0".to_string(),
                BTreeMap::from([(Value::atom("z"), Value::atom("u"))]),
            ),
            ("1".to_string(), BTreeMap::new()),
        ]),
    )?;

    let phi = parse_formula("exists z:Z. m(z) = x")?;
    let not_not_phi = parse_formula("~~(exists z:Z. m(z) = x)")?;
    let ty = Type::base("X");

    let sub = model.interpret("x", &ty, &phi)?;
    println!("S = [[{phi}]] as a subpresheaf of X:");
    for (object, elements) in &sub.sets {
        let shown: Vec<String> = elements.iter().map(|e| e.to_string()).collect();
        println!("  S({object}) = {{{}}}", shown.join(", "));
    }

    let id1 = Value::atom("id1");
    let plain = model.forces("x", &ty, &phi, "1", &id1)?;
    let double = model.forces("x", &ty, &not_not_phi, "1", &id1)?;
    println!("\nat stage 1 with x = id1:");
    println!("  1 ||- {phi}: {}", plain.forced);
    if let Some(cert) = &plain.certificate {
        println!("    {cert}");
    }
    println!("  1 ||- {not_not_phi}: {}", double.forced);
    println!("  (the sieve of arrows into 1 along which S will hold is dense)");

    let u = Value::atom("u");
    let at_zero = model.forces("x", &ty, &phi, "0", &u)?;
    println!("\nat stage 0 with x = u:");
    println!("  0 ||- {phi}: {}", at_zero.forced);
    if let Some(cert) = &at_zero.certificate {
        println!("    {cert}");
    }

    // Over the one-object, one-arrow category every stage is classical and
    // forcing collapses to a truth table.
    let terminal = Arc::new(smallcat::terminal());
    let mut classical = Model::new(terminal.clone());
    classical.add_type("B", Presheaf::new(
        terminal,
        BTreeMap::from([("*".to_string(), vec![Value::atom("t"), Value::atom("f")])]),
        BTreeMap::new(),
    )?)?;
    let excluded_middle = parse_formula("forall b:B. ~~(b = x) -> b = x")?;
    let verdict = classical.forces("x", &Type::base("B"), &excluded_middle, "*", &Value::atom("t"))?;
    println!("\nterminal category, {excluded_middle}: {}", verdict.forced);
    Ok(())
}
