use crate::polytope::StorageSpec;

/// Two-period battery used throughout the worked examples.
pub(crate) fn example_battery() -> StorageSpec {
    StorageSpec {
        alpha: 1.0,
        x_min: -1.0,
        x_max: 1.0,
        s_min: 0.0,
        s_max: 2.0,
        dt: 1.0,
        s0: 1.0,
        s_f: 0.0,
        d: 2,
    }
}
