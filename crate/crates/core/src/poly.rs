//! Polynomial feature maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monomial expansion over a fixed selection of input columns.
///
/// With `homogeneous` set, the output holds every monomial of degree exactly
/// `degree` (multisets of columns, lexicographic order); otherwise all degrees
/// `1..=degree` in increasing degree order. A constant 1 leads when
/// `include_bias` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyMap {
    pub degree: usize,
    pub input_columns: Vec<usize>,
    pub include_bias: bool,
    pub homogeneous: bool,
    /// Length of the vectors `expand` accepts.
    pub source_width: usize,
}

impl PolyMap {
    pub fn new(degree: usize, input_columns: Vec<usize>, source_width: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        if let Some(&c) = input_columns.iter().find(|&&c| c >= source_width) {
            return Err(Error::DimensionMismatch {
                expected: source_width,
                got: c + 1,
            });
        }
        Ok(PolyMap {
            degree,
            input_columns,
            include_bias: true,
            homogeneous: true,
            source_width,
        })
    }

    /// Map over every column of a `width`-long vector.
    pub fn dense(degree: usize, width: usize) -> Result<Self> {
        Self::new(degree, (0..width).collect(), width)
    }

    pub fn with_bias(mut self, include_bias: bool) -> Self {
        self.include_bias = include_bias;
        self
    }

    pub fn with_homogeneous(mut self, homogeneous: bool) -> Self {
        self.homogeneous = homogeneous;
        self
    }

    pub fn output_dim(&self) -> usize {
        let n = self.input_columns.len();
        let degrees = if self.homogeneous {
            self.degree..=self.degree
        } else {
            1..=self.degree
        };
        degrees.map(|d| multiset_count(n, d)).sum::<usize>() + usize::from(self.include_bias)
    }

    pub fn expand(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.output_dim());
        self.expand_into(x, &mut out)?;
        Ok(out)
    }

    pub fn expand_into(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.source_width {
            return Err(Error::DimensionMismatch {
                expected: self.source_width,
                got: x.len(),
            });
        }
        out.clear();
        if self.include_bias {
            out.push(1.0);
        }
        let vals: Vec<f64> = self.input_columns.iter().map(|&c| x[c]).collect();
        let lo = if self.homogeneous { self.degree } else { 1 };
        for d in lo..=self.degree {
            push_monomials(&vals, 0, d, 1.0, out);
        }
        Ok(())
    }
}

fn push_monomials(vals: &[f64], start: usize, remaining: usize, prod: f64, out: &mut Vec<f64>) {
    if remaining == 0 {
        out.push(prod);
        return;
    }
    for i in start..vals.len() {
        push_monomials(vals, i, remaining - 1, prod * vals[i], out);
    }
}

/// Number of multisets of size `k` over `n` items: C(n + k - 1, k).
pub fn multiset_count(n: usize, k: usize) -> usize {
    if n == 0 {
        return usize::from(k == 0);
    }
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 + i) / (i + 1);
    }
    acc as usize
}
