//! Builtin scenarios and the suites that group them.

macro_rules! builtins {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenarios/", $name, ".toml")))),*]
    };
}

static BUILTINS: &[(&str, &str)] = builtins![
    "affine_hyperbolic",
    "affine_hyperplane_flat",
    "affine_offset_sphere",
    "affine_quadratic_flat",
    "affine_sphere",
    "checks_cos",
    "checks_cosh",
    "checks_cubic",
    "checks_exp",
    "checks_flat",
    "checks_linear",
    "checks_sin",
    "checks_sinh",
    "cylinder_hyperbolic",
    "cylinder_scaled_sphere",
    "cylinder_sphere",
    "fiber_hyperbolic",
    "fiber_sphere",
    "field_equations_flat",
    "field_equations_hyperbolic",
    "field_equations_linear",
    "field_equations_sphere",
    "graph_frame_hyperbolic",
    "graph_frame_sphere",
    "graph_parallel_flat",
    "rotated_cylinder_sphere",
    "ruled_curved_hyperbolic",
    "ruled_curved_sphere",
    "ruled_offset_sphere",
    "ruled_plane_flat",
    "ruled_quadratic_sphere",
    "tm_geodesic_hyperbolic",
    "tm_geodesic_sphere",
    "tm_restriction_cubic",
    "tm_restriction_equator",
    "tm_restriction_flat",
    "zero_section_hyperbolic",
    "zero_section_sphere",
];

pub const SUITE_NAMES: [&str; 4] = ["theorem1", "theorem2", "theorem3", "invariants"];

const THEOREM1: &[&str] = &[
    "fiber_sphere",
    "fiber_hyperbolic",
    "zero_section_sphere",
    "zero_section_hyperbolic",
    "cylinder_sphere",
    "cylinder_hyperbolic",
    "graph_frame_sphere",
    "graph_frame_hyperbolic",
    "graph_parallel_flat",
    "ruled_curved_sphere",
    "ruled_curved_hyperbolic",
    "field_equations_sphere",
    "field_equations_hyperbolic",
    "field_equations_flat",
    "field_equations_linear",
];

const THEOREM2: &[&str] = &[
    "cylinder_sphere",
    "cylinder_scaled_sphere",
    "cylinder_hyperbolic",
    "rotated_cylinder_sphere",
    "ruled_curved_sphere",
    "ruled_offset_sphere",
    "ruled_quadratic_sphere",
    "ruled_plane_flat",
];

const THEOREM3: &[&str] = &[
    "tm_restriction_flat",
    "tm_restriction_equator",
    "tm_restriction_cubic",
    "affine_hyperplane_flat",
    "affine_quadratic_flat",
    "affine_sphere",
    "affine_offset_sphere",
    "affine_hyperbolic",
];

const INVARIANTS: &[&str] = &[
    "checks_cos",
    "checks_sin",
    "checks_cosh",
    "checks_sinh",
    "checks_exp",
    "checks_flat",
    "checks_linear",
    "checks_cubic",
    "tm_geodesic_sphere",
    "tm_geodesic_hyperbolic",
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn suite_members(suite: &str) -> Option<Vec<&'static str>> {
    let list = match suite {
        "theorem1" => THEOREM1,
        "theorem2" => THEOREM2,
        "theorem3" => THEOREM3,
        "invariants" => INVARIANTS,
        _ => return None,
    };
    Some(list.to_vec())
}
