//! Shared fixtures for the criterion benchmarks.

use kinklab_core::spectral::operators_for;
use kinklab_core::{
    make_family, transformed, DiscreteOperator, Family, FieldState, KinkProfile, Potential,
    RunConfig, Simulation, TransformedPotential, WellPair,
};

/// Potential and one of its kinks.
pub fn kink_of(family: Family, left: f64, right: f64) -> (Potential, WellPair) {
    let p = make_family(family).expect("built-in family");
    let pair = p.pair(left, right).expect("adjacent wells");
    (p, pair)
}

/// Transformed potential of φ⁸ with `m = 1.5` on the central kink.
pub fn phi8_transformed() -> TransformedPotential {
    let (p, pair) = kink_of(Family::Phi8 { m: 1.5 }, -1.0, 1.0);
    transformed(&p, &pair)
}

/// Linearised operator `L` of the φ⁴ kink at the spacing of the spectral
/// acceptance check.
pub fn phi4_operator(dx: f64) -> DiscreteOperator {
    let (p, pair) = kink_of(Family::Phi4, -1.0, 1.0);
    let (_, _, l, _) = operators_for(&transformed(&p, &pair), dx, 20.0).expect("operators");
    l
}

/// φ⁶ kink with the default Gaussian perturbation on the default grid, with
/// the profile used to modulate it.
pub fn phi6_state() -> (FieldState, std::sync::Arc<KinkProfile>) {
    let mut cfg = RunConfig::default();
    cfg.model.pair = Some((0.0, 1.0));
    let sim = Simulation::new(cfg).expect("default configuration");
    (sim.state, sim.profile)
}
