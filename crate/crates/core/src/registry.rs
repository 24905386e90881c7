//! Built-in scenarios, addressable by name.

use crate::error::{Error, Result};
use crate::scenario::{parse_scenario, Scenario};

const BUILTINS: &[(&str, &str)] = &[
    (
        "qubit_xz",
        r#"{"kind": "lie_closure",
            "generators": [[[0, 1], [1, 0]], [[1, 0], [0, -1]]],
            "expected_dim": 3}"#,
    ),
    (
        "d3_three_level",
        r#"{"kind": "group_decompose", "preset": "three_level"}"#,
    ),
    (
        "qutrit_encoded",
        r#"{"kind": "encoded_universality",
            "generators": [[[0, 1, 0], [1, 0, 0], [0, 0, 0]],
                           [[0, [0, -1], 0], [[0, 1], 0, 0], [0, 0, 0]],
                           [[0, 0, 0], [0, 0, 0], [0, 0, 1]]],
            "projectors": [[[1, 0, 0], [0, 1, 0], [0, 0, 0]],
                           [[0, 0, 0], [0, 0, 0], [0, 0, 1]]]}"#,
    ),
    ("double_well_n1", r#"{"kind": "double_well", "N": 1}"#),
    ("double_well_n2", r#"{"kind": "double_well", "N": 2}"#),
    ("double_well_n3", r#"{"kind": "double_well", "N": 3}"#),
    ("double_well_n4", r#"{"kind": "double_well", "N": 4}"#),
    ("enveloping_j1", r#"{"kind": "enveloping", "J": 1}"#),
    ("enveloping_j2", r#"{"kind": "enveloping", "J": 2}"#),
    ("enveloping_j3", r#"{"kind": "enveloping", "J": 3}"#),
    ("multimode_l2", r#"{"kind": "multimode", "L": 2, "cutoff": 8}"#),
    ("multimode_l3", r#"{"kind": "multimode", "L": 3, "cutoff": 6}"#),
    (
        "aux_boson_spinhalf",
        r#"{"kind": "aux_boson", "operator": "spin_z", "J": 0.5,
            "alpha": [0.5, 0.0], "beta": [0.5, 1.5707963267948966],
            "theta": 0.3, "cutoff": 40}"#,
    ),
    (
        "aux_boson_spin1",
        r#"{"kind": "aux_boson", "operator": "spin_z", "J": 1,
            "alpha": [0.5, 0.3], "beta": [0.5, 1.2],
            "theta": 0.3, "cutoff": 40}"#,
    ),
    ("identity_suite", r#"{"kind": "identity_suite", "two_j": 4}"#),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let src = builtin_source(name).ok_or_else(|| Error::UnknownBuiltin(name.to_string()))?;
    parse_scenario(src, name)
}
