//! Fixed scenarios shared by the benchmarks.

use qd_core::qd::{PairGeometry, QdScenario};

/// Default geometry with the given Rician factor and path-loss ratio.
pub fn scenario(k_db: f64, beta_delta: f64) -> QdScenario {
    PairGeometry {
        k_db,
        beta_delta,
        ..PairGeometry::default()
    }
    .scenario()
    .expect("valid benchmark scenario")
}

#[cfg(test)]
mod tests {
    #[test]
    fn scenarios_build() {
        let s = super::scenario(10.0, 25.0);
        assert_eq!(s.beta_ratio(), 25.0);
    }
}
