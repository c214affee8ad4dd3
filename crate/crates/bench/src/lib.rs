//! Shared fixtures for the criterion benches in `benches/`.

use stokeslab_core::{BoundaryData, SpaceTimePoint, SpatialProfile, TemporalProfile};

/// A point near the boundary, inside the unit half-cylinder.
pub fn probe() -> SpaceTimePoint {
    SpaceTimePoint::new(vec![0.2, 0.1], 0.05, 1.0).expect("valid point")
}

/// Box-annulus data in three dimensions on the coarse lattice rule.
pub fn box_data(temporal: TemporalProfile) -> BoundaryData {
    let rule = SpatialProfile::box_annulus(3).expect("n = 3").rule(4, 8);
    BoundaryData::new(rule, temporal)
}
