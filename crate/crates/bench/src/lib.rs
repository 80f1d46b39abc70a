//! Shared inputs for the benchmarks.

use superlat_core::{GramForm, IsometryProblem, QVector};

/// `W = Mᵀ M` for the classic ill-conditioned 4×4 test matrix.
pub fn wilson_problem() -> IsometryProblem {
    let w = GramForm::from_int_rows(&[[5, 7, 6, 5], [7, 10, 8, 7], [6, 8, 10, 9], [5, 7, 9, 10]])
        .expect("symmetric");
    IsometryProblem::new(
        GramForm::standard(4).expect("identity"),
        w,
        QVector::from_ints(&[1, 0, 0, 0]),
        None,
    )
    .expect("valid problem")
}

/// A rank-4 pair that is rationally but not integrally isometric.
pub fn rational_only_problem() -> IsometryProblem {
    let b = GramForm::from_int_rows(&[[2, 1, 0, 0], [1, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 4]]).expect("symmetric");
    let bp = GramForm::from_int_rows(&[[2, 1, 1, 0], [1, 2, 0, 0], [1, 0, 2, 0], [0, 0, 0, 6]]).expect("symmetric");
    IsometryProblem::new(b, bp, QVector::from_ints(&[1, 0, 0, 0]), None).expect("valid problem")
}
