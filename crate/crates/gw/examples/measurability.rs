//! Information fields decide which policies an agent may even write down:
//! a gunner who only observes the scout's signal cannot act on the weather
//! directly, and the measurability check produces the offending pair.

use std::collections::BTreeMap;

use gw::fields::{
    check_measurable, induced_subfield, is_subfield, DecisionObject, Partition, Policy,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let agents = vec!["scout".to_string(), "gunner".to_string()];
    let omega = vec!["east".to_string(), "west".to_string()];
    let decisions = BTreeMap::from([
        ("scout".to_string(), vec!["east".to_string(), "west".to_string()]),
        ("gunner".to_string(), vec!["east".to_string(), "west".to_string()]),
    ]);

    // A fully informed object first, to enumerate the product space.
    let base = DecisionObject::new(
        agents.clone(),
        omega.clone(),
        None,
        decisions.clone(),
        BTreeMap::new(),
        BTreeMap::new(),
    )?;
    let points = base.product_ids();
    println!("product space has {} points, e.g. {}", points.len(), points[0]);

    // The scout sees the wind; the gunner sees only the scout's call.
    let sees_wind = Partition::by_key(points.clone(), |id| {
        base.coordinate(id, None).expect("nature coordinate")
    });
    let sees_scout = Partition::by_key(points.clone(), |id| {
        base.coordinate(id, Some("scout")).expect("scout coordinate")
    });
    let object = DecisionObject::new(
        agents,
        omega,
        None,
        decisions,
        BTreeMap::new(),
        BTreeMap::from([
            ("scout".to_string(), sees_wind),
            ("gunner".to_string(), sees_scout),
        ]),
    )?;

    let relay = Policy::echo(&object, "gunner", "scout")?;
    println!(
        "\ngunner echoes the scout:     {:?}",
        check_measurable(&object, &relay)?.is_measurable()
    );

    let clairvoyant = Policy {
        agent: "gunner".to_string(),
        map: points
            .iter()
            .map(|p| (p.clone(), object.coordinate(p, None).expect("nature")))
            .collect(),
    };
    match check_measurable(&object, &clairvoyant)? {
        verdict if verdict.is_measurable() => println!("gunner reads the wind: measurable"),
        gw::fields::MeasurableVerdict::Fails(w) => println!(
            "gunner reads the wind:       not measurable\n  {} -> {} but {} -> {}",
            w.point_a, w.decision_a, w.point_b, w.decision_b
        ),
        _ => unreachable!(),
    }

    // The lattice view: what the gunner sees is the subfield induced by
    // projecting away everything except the scout's coordinate and nature.
    let all = ["scout".to_string(), "gunner".to_string()].into_iter().collect();
    let scout_only = ["scout".to_string()].into_iter().collect();
    let induced = induced_subfield(&object, &all, &scout_only)?;
    println!(
        "\ninduced field by (nature, scout) has {} blocks; gunner's field is {} blocks",
        induced.len(),
        object.info_field("gunner")?.len()
    );
    println!(
        "gunner's field is a subfield of the induced one: {}",
        is_subfield(object.info_field("gunner")?, &induced)
    );
    Ok(())
}
