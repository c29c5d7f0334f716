//! Reversed-orientation LPP with a northeast boundary.
//!
//! For a field of extents `(m, n)` the sites are `[1, m+1] x [1, n+1]`: the
//! bulk inside, `Exp(u)` weights on the top row `j = n+1`, `Exp(1-u)` on the
//! right column `i = m+1`, and a zero corner. `value(i, j)` is the maximal
//! weight of an up-right path from `(i, j)` to the corner.

use crate::error::{Error, Result};
use crate::randfield::{northeast_weights, WeightSource, DEFAULT_BUDGET_BYTES};

#[derive(Clone, Debug, PartialEq)]
pub struct NortheastGrid {
    pub u: f64,
    pub m: usize,
    pub n: usize,
    values: Vec<f64>,
}

impl NortheastGrid {
    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.m + 2) + i
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || j == 0 || i > self.m + 1 || j > self.n + 1 {
            return Err(Error::OutOfRange(format!("({i}, {j}) outside [1,{}]x[1,{}]", self.m + 1, self.n + 1)));
        }
        Ok(self.values[self.idx(i, j)])
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    /// Passage time from `(1, 1)` to the corner.
    pub fn from_origin(&self) -> f64 {
        self.value(1, 1)
    }
}

pub fn northeast_values<S: WeightSource + ?Sized>(field: &S, u: f64) -> Result<NortheastGrid> {
    let ne = northeast_weights(field, u)?;
    let (m, n) = field.extents();
    let width = m + 2;
    let cells = width as u64 * (n as u64 + 2);
    if cells * 8 > DEFAULT_BUDGET_BYTES {
        return Err(Error::BudgetExceeded { required: cells * 8, allowed: DEFAULT_BUDGET_BYTES });
    }
    let mut values = vec![f64::NEG_INFINITY; cells as usize];
    let at = |i: usize, j: usize| j * width + i;

    values[at(m + 1, n + 1)] = ne.corner;
    for i in (1..=m).rev() {
        values[at(i, n + 1)] = ne.top[i] + values[at(i + 1, n + 1)];
    }
    let mut row = vec![0.0; m + 1];
    for j in (1..=n).rev() {
        values[at(m + 1, j)] = ne.right[j] + values[at(m + 1, j + 1)];
        field.fill_row(j, &mut row);
        for i in (1..=m).rev() {
            let right = values[at(i + 1, j)];
            let above = values[at(i, j + 1)];
            values[at(i, j)] = row[i] + if right >= above { right } else { above };
        }
    }
    Ok(NortheastGrid { u, m, n, values })
}
