//! The map `f(x) = ((theta x + q)/(x + theta + q - 1))^2` governing translation-invariant
//! boundary fields, its fixed points, orbits, basins, and the rigidity of
//! solutions on the invariant line.

mod fixed;
mod maps;
mod orbit;
mod rigidity;

pub use fixed::{
    classify_fixed_point, discriminant_exact, fixed_points, theorem_prediction, Classification, FixedPoint, FixedPointClass,
    FixedPointReport, TheoremPrediction,
};
pub use maps::{big_a, difference_valuation, eval_eta, eval_f, eval_f_prime, eval_g, eval_g_inverse, pole_distance};
pub use orbit::{
    basin_predicate, ferro_contraction_regime, iterate_orbit, BasinTarget, BasinVerdict, Orbit, OrbitVerdict, DEFAULT_BASIN_DEPTH,
};
pub use rigidity::{field_rigidity_check, grow_line_field, random_leaves, LineField, Regime, RigidityReport};
