use serde::{Deserialize, Serialize};

use super::OdeError;

const COEFF_TOL: f64 = 1e-12;

/// Coefficients of an explicit Runge-Kutta method.
///
/// `a[i]` holds the `i` coefficients of stage `i` against stages `0..i`, so
/// the matrix is strictly lower triangular by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButcherTableau {
    name: String,
    order: u32,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    /// Builds a tableau after checking Σb = 1 and cᵢ = Σⱼ aᵢⱼ.
    pub fn new(
        name: impl Into<String>,
        order: u32,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
    ) -> Result<Self, OdeError> {
        let name = name.into();
        let s = b.len();
        let invalid = |why: String| OdeError::InvalidTableau {
            name: name.clone(),
            reason: why,
        };
        if s == 0 {
            return Err(invalid("no stages".into()));
        }
        if a.len() != s || c.len() != s {
            return Err(invalid(format!(
                "stage count mismatch: {} rows of a, {} weights, {} nodes",
                a.len(),
                s,
                c.len()
            )));
        }
        if order == 0 {
            return Err(invalid("order must be positive".into()));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != i {
                return Err(invalid(format!(
                    "row {i} of a has {} entries; an explicit method needs exactly {i}",
                    row.len()
                )));
            }
            let row_sum: f64 = row.iter().sum();
            if (row_sum - c[i]).abs() > COEFF_TOL {
                return Err(invalid(format!(
                    "row-sum condition fails at stage {i}: sum(a) = {row_sum}, c = {}",
                    c[i]
                )));
            }
        }
        let b_sum: f64 = b.iter().sum();
        if (b_sum - 1.0).abs() > COEFF_TOL {
            return Err(invalid(format!("weights sum to {b_sum}, expected 1")));
        }
        if a.iter().flatten().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite coefficient".into()));
        }
        Ok(ButcherTableau { name, order, a, b, c })
    }

    /// Kutta's third-order method.
    pub fn rk3() -> Self {
        Self::new(
            "rk3",
            3,
            vec![vec![], vec![0.5], vec![-1.0, 2.0]],
            vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 1.0],
        )
        .expect("rk3 coefficients are consistent")
    }

    /// The classical fourth-order method.
    pub fn rk4() -> Self {
        Self::new(
            "rk4",
            4,
            vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
        )
        .expect("rk4 coefficients are consistent")
    }

    /// Butcher's six-stage fifth-order method.
    pub fn rk5() -> Self {
        Self::new(
            "rk5",
            5,
            vec![
                vec![],
                vec![1.0 / 4.0],
                vec![1.0 / 8.0, 1.0 / 8.0],
                vec![0.0, -1.0 / 2.0, 1.0],
                vec![3.0 / 16.0, 0.0, 0.0, 9.0 / 16.0],
                vec![-3.0 / 7.0, 2.0 / 7.0, 12.0 / 7.0, -12.0 / 7.0, 8.0 / 7.0],
            ],
            vec![7.0 / 90.0, 0.0, 32.0 / 90.0, 12.0 / 90.0, 32.0 / 90.0, 7.0 / 90.0],
            vec![0.0, 1.0 / 4.0, 1.0 / 4.0, 1.0 / 2.0, 3.0 / 4.0, 1.0],
        )
        .expect("rk5 coefficients are consistent")
    }

    /// Registry lookup: `"rk3"`, `"rk4"` or `"rk5"`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "rk3" => Some(Self::rk3()),
            "rk4" => Some(Self::rk4()),
            "rk5" => Some(Self::rk5()),
            _ => None,
        }
    }

    pub const REGISTERED: [&'static str; 3] = ["rk3", "rk4", "rk5"];

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, stage: usize) -> &[f64] {
        &self.a[stage]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}
