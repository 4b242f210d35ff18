//! Coefficients of ergodicity of row-stochastic matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on row sums accepted by [`ergodicity`].
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityStats {
    /// `δ(A) = max_j max_{i1,i2} |A_i1j - A_i2j|`.
    pub delta: f64,
    /// `λ(A) = 1 - overlap`.
    pub lambda: f64,
    /// `min_{i1,i2} Σ_j min(A_i1j, A_i2j)`. Kept separately because `1 -
    /// overlap` rounds to 1 long before the overlap reaches 0.
    pub overlap: f64,
}

impl ErgodicityStats {
    /// Every pair of rows shares some column with positive weight.
    pub fn is_scrambling(&self) -> bool {
        self.overlap > 0.0
    }
}

pub fn check_row_stochastic(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::Dimension(format!("expected a nonempty square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    for (r, row) in a.row_iter().enumerate() {
        if row.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::input(format!("row {r} has a negative or NaN entry")));
        }
        let sum = row.sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
            return Err(Error::input(format!("row {r} sums to {sum}, not 1")));
        }
    }
    Ok(())
}

pub fn ergodicity(a: &DMatrix<f64>) -> Result<ErgodicityStats> {
    check_row_stochastic(a)?;
    let m = a.nrows();
    let mut delta = 0.0f64;
    let mut overlap = 1.0f64;
    for r1 in 0..m {
        for r2 in r1 + 1..m {
            let mut shared = 0.0;
            for c in 0..m {
                let (x, y) = (a[(r1, c)], a[(r2, c)]);
                delta = delta.max((x - y).abs());
                shared += x.min(y);
            }
            overlap = overlap.min(shared);
        }
    }
    let overlap = overlap.clamp(0.0, 1.0);
    Ok(ErgodicityStats { delta: delta.min(1.0), lambda: 1.0 - overlap, overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        let s = ergodicity(&id).unwrap();
        assert_eq!((s.delta, s.lambda), (1.0, 1.0));
        assert!(!s.is_scrambling());

        let half = DMatrix::from_element(2, 2, 0.5);
        let s = ergodicity(&half).unwrap();
        assert_eq!((s.delta, s.lambda), (0.0, 0.0));

        let same = DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5]);
        let s = ergodicity(&same).unwrap();
        assert_eq!(s.delta, 0.0);
        assert!(s.lambda.abs() < 1e-15);

        let single = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(ergodicity(&single).unwrap().lambda, 0.0);
    }

    #[test]
    fn rejects_non_stochastic() {
        assert!(ergodicity(&DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5])).is_err());
        assert!(ergodicity(&DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.5, 0.5])).is_err());
        assert!(ergodicity(&DMatrix::<f64>::zeros(2, 3)).is_err());
    }

    fn arb_stochastic(m: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(proptest::collection::vec(0u32..5, m), m).prop_map(move |rows| {
            let mut a = DMatrix::zeros(m, m);
            for (r, row) in rows.iter().enumerate() {
                let mut row = row.clone();
                if row.iter().all(|&x| x == 0) {
                    row[r] = 1;
                }
                let total: u32 = row.iter().sum();
                for (c, &x) in row.iter().enumerate() {
                    a[(r, c)] = x as f64 / total as f64;
                }
            }
            a
        })
    }

    proptest! {
        #[test]
        fn coefficient_ranges_and_hajnal(a in arb_stochastic(4), b in arb_stochastic(4)) {
            let sa = ergodicity(&a).unwrap();
            let sb = ergodicity(&b).unwrap();
            for s in [sa, sb] {
                prop_assert!((0.0..=1.0).contains(&s.delta));
                prop_assert!((0.0..=1.0).contains(&s.lambda));
                prop_assert!(s.delta <= s.lambda + 1e-12);
                prop_assert_eq!(s.delta == 0.0, s.lambda < 1e-12);
            }
            let ab = &a * &b;
            let sab = ergodicity(&ab).unwrap();
            prop_assert!(sab.delta <= sa.lambda * sb.lambda + 1e-9);
            prop_assert!(sab.lambda <= sa.lambda * sb.lambda + 1e-9);
        }
    }
}
