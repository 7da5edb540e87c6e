//! Bimatrix games with vector-valued costs.
//!
//! Rows are player 1 actions and columns are player 2 actions. Both players
//! minimize. The Rust API indexes actions from zero; every serialized form
//! (JSON logs, CSV headers, the evaluation protocol) uses one-based indices.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::GameError;

/// A dense `n x m` cost matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(GameError::Empty);
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(GameError::Dimension(format!(
                "row {} has {} entries, expected {m}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::from_vec(n, m, rows.into_iter().flatten().collect())
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GameError> {
        if rows == 0 || cols == 0 {
            return Err(GameError::Empty);
        }
        if data.len() != rows * cols {
            return Err(GameError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(GameError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, GameError> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty cost matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.get(i, col))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, GameError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GameError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, GameError> {
        if self.shape() != other.shape() {
            return Err(GameError::Dimension(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for CostMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols)).finish()
    }
}

impl Serialize for CostMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.data.chunks(self.cols))
    }
}

impl<'de> Deserialize<'de> for CostMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        CostMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// One player's costs for every objective, highest priority first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CostMatrix>", into = "Vec<CostMatrix>")]
pub struct CostTensor {
    objectives: Vec<CostMatrix>,
}

impl CostTensor {
    pub fn new(objectives: Vec<CostMatrix>) -> Result<Self, GameError> {
        let first = objectives
            .first()
            .ok_or_else(|| GameError::Dimension("a cost tensor needs at least one objective".into()))?;
        let shape = first.shape();
        if let Some(h) = objectives.iter().position(|c| c.shape() != shape) {
            return Err(GameError::Dimension(format!(
                "objective {} has shape {:?}, expected {:?}",
                h + 1,
                objectives[h].shape(),
                shape
            )));
        }
        Ok(Self { objectives })
    }

    pub fn depth(&self) -> usize {
        self.objectives.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.objectives[0].shape()
    }

    pub fn objective(&self, h: usize) -> &CostMatrix {
        &self.objectives[h]
    }

    /// The highest-priority objective.
    pub fn prime(&self) -> &CostMatrix {
        &self.objectives[0]
    }

    pub fn objectives(&self) -> &[CostMatrix] {
        &self.objectives
    }

    /// The outcome vector `J(row, col)` across all objectives.
    pub fn outcome(&self, row: usize, col: usize) -> Vec<f64> {
        self.objectives.iter().map(|c| c.get(row, col)).collect()
    }

    fn check_col(&self, col: usize) -> Result<(), GameError> {
        let (_, m) = self.shape();
        if col >= m {
            return Err(GameError::Index(format!("column {col} with {m} columns")));
        }
        Ok(())
    }
}

impl TryFrom<Vec<CostMatrix>> for CostTensor {
    type Error = GameError;

    fn try_from(value: Vec<CostMatrix>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<CostTensor> for Vec<CostMatrix> {
    fn from(value: CostTensor) -> Self {
        value.objectives
    }
}

/// Non-negative objective weights, not all zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, GameError> {
        if weights.is_empty() {
            return Err(GameError::Weights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(GameError::Weights(format!("weight {w} is negative or not finite")));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(GameError::Weights("all weights are zero".into()));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = GameError;

    fn try_from(value: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(value: WeightVector) -> Self {
        value.0
    }
}

/// A pure strategy profile `(row, col)`; zero-based in memory, one-based on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicyPair {
    #[serde(with = "one_based")]
    pub row: usize,
    #[serde(with = "one_based")]
    pub col: usize,
}

impl PolicyPair {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySetKind {
    Pareto,
    Worst,
    Moderate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySet {
    pub kind: PolicySetKind,
    #[serde(with = "one_based::set")]
    pub members: BTreeSet<usize>,
}

impl PolicySet {
    pub fn contains(&self, row: usize) -> bool {
        self.members.contains(&row)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }
}

/// Weighted sum of the objectives: `sum_h theta_h * C_h`.
pub fn scalarize(costs: &CostTensor, weights: &WeightVector) -> Result<CostMatrix, GameError> {
    if weights.len() != costs.depth() {
        return Err(GameError::Dimension(format!(
            "{} weights for {} objectives",
            weights.len(),
            costs.depth()
        )));
    }
    let (n, m) = costs.shape();
    let mut out = vec![0.0; n * m];
    for (c, &w) in costs.objectives.iter().zip(weights.as_slice()) {
        for (acc, v) in out.iter_mut().zip(c.as_slice()) {
            *acc += w * v;
        }
    }
    CostMatrix::from_vec(n, m, out)
}

/// Player 1's security (min-max) row and its guaranteed value. Lowest index wins ties.
pub fn security_policy_row(d: &CostMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for i in 0..d.rows() {
        let worst = d.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if worst < best.1 {
            best = (i, worst);
        }
    }
    best
}

/// Player 2's security (min-max) column and its guaranteed value. Lowest index wins ties.
pub fn security_policy_col(d: &CostMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for j in 0..d.cols() {
        let worst = d.column(j).fold(f64::NEG_INFINITY, f64::max);
        if worst < best.1 {
            best = (j, worst);
        }
    }
    best
}

/// `a` dominates `b` when it is no worse everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    dominates_within(a, b, 0.0)
}

/// [`dominates`] with differences up to `tol` counted as ties.
pub fn dominates_within(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x - y > tol {
            return false;
        }
        if y - x > tol {
            strict = true;
        }
    }
    strict
}

/// Rows whose outcome vector in column `sigma` is not dominated by any other row.
pub fn pareto_set(costs: &CostTensor, sigma: usize) -> Result<PolicySet, GameError> {
    pareto_set_within(costs, sigma, 0.0)
}

pub fn pareto_set_within(costs: &CostTensor, sigma: usize, tol: f64) -> Result<PolicySet, GameError> {
    costs.check_col(sigma)?;
    let (n, _) = costs.shape();
    let outcomes: Vec<Vec<f64>> = (0..n).map(|i| costs.outcome(i, sigma)).collect();
    let members = (0..n)
        .filter(|&i| {
            !outcomes
                .iter()
                .enumerate()
                .any(|(k, o)| k != i && dominates_within(o, &outcomes[i], tol))
        })
        .collect();
    Ok(PolicySet {
        kind: PolicySetKind::Pareto,
        members,
    })
}

/// Union over objectives of every row attaining that objective's column maximum.
pub fn worst_set(costs: &CostTensor, sigma: usize) -> Result<PolicySet, GameError> {
    worst_set_within(costs, sigma, 0.0)
}

/// [`worst_set`] where anything within `tol` of the maximum counts as attaining it.
pub fn worst_set_within(costs: &CostTensor, sigma: usize, tol: f64) -> Result<PolicySet, GameError> {
    costs.check_col(sigma)?;
    let mut members = BTreeSet::new();
    for c in costs.objectives() {
        let max = c.column(sigma).fold(f64::NEG_INFINITY, f64::max);
        members.extend(c.column(sigma).enumerate().filter(|&(_, v)| max - v <= tol).map(|(i, _)| i));
    }
    Ok(PolicySet {
        kind: PolicySetKind::Worst,
        members,
    })
}

/// Pareto-optimal rows that are not worst-case in any objective.
pub fn moderate_set(costs: &CostTensor, sigma: usize) -> Result<PolicySet, GameError> {
    moderate_set_within(costs, sigma, 0.0)
}

pub fn moderate_set_within(costs: &CostTensor, sigma: usize, tol: f64) -> Result<PolicySet, GameError> {
    let pareto = pareto_set_within(costs, sigma, tol)?;
    let worst = worst_set_within(costs, sigma, tol)?;
    Ok(PolicySet {
        kind: PolicySetKind::Moderate,
        members: pareto.members.difference(&worst.members).copied().collect(),
    })
}

/// Whether neither player can lower its own cost by a unilateral deviation.
pub fn is_nash(d1: &CostMatrix, d2: &CostMatrix, policies: PolicyPair) -> Result<bool, GameError> {
    if d1.shape() != d2.shape() {
        return Err(GameError::Dimension(format!("{:?} vs {:?}", d1.shape(), d2.shape())));
    }
    let PolicyPair { row, col } = policies;
    if row >= d1.rows() || col >= d1.cols() {
        return Err(GameError::Index(format!("({row}, {col}) in a {:?} game", d1.shape())));
    }
    let p1 = d1.get(row, col);
    let p2 = d2.get(row, col);
    Ok(d1.column(col).all(|v| p1 <= v) && d2.row(row).iter().all(|&v| p2 <= v))
}

/// Serde helpers writing zero-based indices as one-based numbers.
pub mod one_based {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &usize, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(*value as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<usize, D::Error> {
        let v = u64::deserialize(deserializer)?;
        if v == 0 {
            return Err(serde::de::Error::custom("indices are one-based"));
        }
        Ok(v as usize - 1)
    }

    pub mod set {
        use std::collections::BTreeSet;

        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(value: &BTreeSet<usize>, serializer: S) -> Result<S::Ok, S::Error> {
            serializer.collect_seq(value.iter().map(|v| v + 1))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeSet<usize>, D::Error> {
            let raw = Vec::<u64>::deserialize(deserializer)?;
            raw.into_iter()
                .map(|v| {
                    v.checked_sub(1)
                        .map(|v| v as usize)
                        .ok_or_else(|| serde::de::Error::custom("indices are one-based"))
                })
                .collect()
        }
    }
}
