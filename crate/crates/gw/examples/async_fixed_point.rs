//! Drives one contraction to its fixed point under schedules ranging from
//! synchronous Jacobi to randomly stale asynchronous updates: the limit
//! never moves, only the path to it does.

use gw::asyncfix::{make_schedule, run_async, DecomposedMap, ScheduleKind, StaleSchedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // F(x) = Ax + b with max-norm contraction modulus 0.7.
    let map = DecomposedMap::affine(
        vec![vec![0.5, 0.2], vec![0.1, 0.4]],
        vec![1.0, 2.0],
        vec![1, 1],
    )?;
    // (I - A) x* = b, solved by hand for the oracle.
    let solution = [25.0 / 7.0, 27.5 / 7.0];

    let schedules = [
        ("synchronous Jacobi", StaleSchedule::synchronous(2, 1_000)),
        (
            "round-robin",
            make_schedule(ScheduleKind::RoundRobin, 2, 5_000, 2, 2, 0)?,
        ),
        (
            "random, staleness <= 6",
            make_schedule(ScheduleKind::Random, 2, 50_000, 6, 6, 42)?,
        ),
        (
            "adversarial stale reads",
            make_schedule(ScheduleKind::AdversarialStale, 2, 5_000, 1, 8, 0)?,
        ),
    ];

    for (name, schedule) in schedules {
        let (x, trace) = run_async(&map, &schedule, &[0.0, 0.0], 1e-12)?;
        let err = x
            .iter()
            .zip(&solution)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!(
            "{name:>24}: {} writes, distance to closed form {err:.2e}",
            trace.records.len() - 1,
        );
    }
    Ok(())
}
