//! Small built-in instances used across tests, examples and the smoke
//! scripts.

use crate::instance::Instance;
use nalgebra::DMatrix;

/// Two-asset instance with budget 9e6 and risk cap 3e-5.
pub fn illustrative_instance() -> Instance {
    Instance {
        a: vec![6075, 3105],
        mu: vec![12500, 10000],
        omega: DMatrix::from_row_slice(
            2,
            2,
            &[0.832843e-4, 0.485325e-4, 0.485325e-4, 0.651298e-3],
        ),
        budget: 9_000_000,
        r0_sq: 3e-5,
        labels: None,
    }
    .validate()
    .expect("illustrative instance is valid")
}

/// Three-asset stock/futures mix (prices and returns in hundredths so they
/// are integers), risk cap 1.52.
pub fn mixed_instance(budget_hundredths: i64) -> Instance {
    Instance {
        a: vec![3522, 3676, 400_000],
        mu: vec![364, 364, 1_000_000],
        omega: DMatrix::from_row_slice(
            3,
            3,
            &[
                0.003250634,
                0.000654331,
                0.022513263,
                0.000654331,
                0.001578359,
                -0.006610861,
                0.022513263,
                -0.006610861,
                26.35846804,
            ],
        ),
        budget: budget_hundredths,
        r0_sq: 1.52,
        labels: Some(vec!["MSFT".into(), "GE".into(), "Oil".into()]),
    }
    .validate()
    .expect("mixed instance is valid")
}
