//! Budget vectors on the integer lattice and the capacity/knapsack
//! constraints they live under.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A budget assignment `b ∈ ℕⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Allocation(pub Vec<u32>);

impl Allocation {
    pub fn zeros(n: usize) -> Self {
        Allocation(vec![0; n])
    }

    /// `k` units on agent `i`, zero elsewhere.
    pub fn unit(n: usize, i: usize, k: u32) -> Self {
        let mut b = Self::zeros(n);
        b.0[i] = k;
        b
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn join(&self, other: &Allocation) -> Result<Allocation> {
        self.zip_with(other, u32::max)
    }

    pub fn meet(&self, other: &Allocation) -> Result<Allocation> {
        self.zip_with(other, u32::min)
    }

    /// `b ∨ kχ_i`: coordinate `i` becomes `max(b_i, k)`.
    pub fn add_chi(&self, i: usize, k: u32) -> Result<Allocation> {
        if i >= self.0.len() {
            return Err(Error::IndexOutOfRange { index: i, n: self.0.len() });
        }
        let mut out = self.clone();
        out.0[i] = out.0[i].max(k);
        Ok(out)
    }

    /// Coordinate-wise `self ≤ other`.
    pub fn le(&self, other: &Allocation) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn zip_with(&self, other: &Allocation, op: impl Fn(u32, u32) -> u32) -> Result<Allocation> {
        if self.0.len() != other.0.len() {
            return Err(Error::LengthMismatch { left: self.0.len(), right: other.0.len() });
        }
        Ok(Allocation(self.0.iter().zip(&other.0).map(|(&a, &b)| op(a, b)).collect()))
    }
}

impl Deref for Allocation {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl DerefMut for Allocation {
    fn deref_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }
}

impl From<Vec<u32>> for Allocation {
    fn from(v: Vec<u32>) -> Self {
        Allocation(v)
    }
}

/// Total budget `B` and per-agent capacities `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConstraints {
    pub budget: u32,
    pub capacities: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityViolation {
    pub agent: usize,
    pub allocated: u32,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feasibility {
    pub capacity_violations: Vec<CapacityViolation>,
    /// `(allocated total, budget)` when the total exceeds the budget.
    pub budget_excess: Option<(u64, u32)>,
    pub length_mismatch: bool,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.capacity_violations.is_empty() && self.budget_excess.is_none() && !self.length_mismatch
    }
}

impl BudgetConstraints {
    /// Capacities above the budget are clamped to it (with a warning);
    /// a capacity of zero is rejected unless the budget itself is zero.
    pub fn new(budget: u32, capacities: Vec<u32>) -> Result<Self> {
        let mut caps = capacities;
        for (i, c) in caps.iter_mut().enumerate() {
            if *c == 0 && budget > 0 {
                return Err(Error::InvalidInstance(format!("capacity of agent {i} is zero")));
            }
            if *c > budget {
                log::warn!("capacity {c} of agent {i} exceeds budget {budget}; clamped");
                *c = budget;
            }
        }
        Ok(BudgetConstraints { budget, capacities: caps })
    }

    pub fn uniform(n: usize, budget: u32, capacity: u32) -> Result<Self> {
        Self::new(budget, vec![capacity; n])
    }

    pub fn n(&self) -> usize {
        self.capacities.len()
    }

    pub fn validate(&self, b: &[u32]) -> Feasibility {
        let capacity_violations = b
            .iter()
            .zip(&self.capacities)
            .enumerate()
            .filter(|(_, (&x, &c))| x > c)
            .map(|(agent, (&allocated, &capacity))| CapacityViolation { agent, allocated, capacity })
            .collect();
        let total: u64 = b.iter().map(|&x| x as u64).sum();
        Feasibility {
            capacity_violations,
            budget_excess: (total > self.budget as u64).then_some((total, self.budget)),
            length_mismatch: b.len() != self.capacities.len(),
        }
    }

    pub fn is_feasible(&self, b: &[u32]) -> bool {
        b.len() == self.capacities.len()
            && b.iter().zip(&self.capacities).all(|(x, c)| x <= c)
            && b.iter().map(|&x| x as u64).sum::<u64>() <= self.budget as u64
    }

    /// Same budget, capacities zeroed outside `allowed`.
    pub fn restricted_to(&self, allowed: &[bool]) -> BudgetConstraints {
        BudgetConstraints {
            budget: self.budget,
            capacities: self
                .capacities
                .iter()
                .zip(allowed)
                .map(|(&c, &ok)| if ok { c } else { 0 })
                .collect(),
        }
    }

    /// `Π (c_i + 1)`, saturating.
    pub fn box_size(&self) -> u128 {
        self.capacities.iter().fold(1u128, |acc, &c| acc.saturating_mul(c as u128 + 1))
    }

    /// All feasible allocations in lexicographic order.
    pub fn feasible_allocations(&self) -> Vec<Allocation> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.n()];
        self.enumerate_rec(0, 0, &mut cur, &mut out);
        out
    }

    fn enumerate_rec(&self, i: usize, used: u32, cur: &mut Vec<u32>, out: &mut Vec<Allocation>) {
        if i == cur.len() {
            out.push(Allocation(cur.clone()));
            return;
        }
        let hi = self.capacities[i].min(self.budget - used);
        for k in 0..=hi {
            cur[i] = k;
            self.enumerate_rec(i + 1, used + k, cur, out);
        }
        cur[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(v: &[u32]) -> Allocation {
        Allocation(v.to_vec())
    }

    #[test]
    fn join_meet_examples() {
        assert_eq!(a(&[1, 0]).join(&a(&[0, 2])).unwrap(), a(&[1, 2]));
        assert_eq!(a(&[1, 0]).meet(&a(&[0, 2])).unwrap(), a(&[0, 0]));
        assert_eq!(a(&[3, 1]).join(&a(&[3, 1])).unwrap(), a(&[3, 1]));
        assert!(matches!(a(&[1]).join(&a(&[1, 2])), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn add_chi_examples() {
        assert_eq!(a(&[0, 0]).add_chi(1, 3).unwrap(), a(&[0, 3]));
        assert_eq!(a(&[2, 0]).add_chi(0, 1).unwrap(), a(&[2, 0]));
        assert_eq!(a(&[1, 1]).add_chi(0, 4).unwrap(), a(&[4, 1]));
        assert!(matches!(a(&[1, 1]).add_chi(2, 1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn validate_examples() {
        let c = BudgetConstraints::new(2, vec![1, 2]).unwrap();
        assert!(c.validate(&[1, 1]).is_feasible());

        let c = BudgetConstraints::new(4, vec![1, 2]).unwrap();
        let v = c.validate(&[2, 1]);
        assert!(!v.is_feasible());
        assert_eq!(v.capacity_violations, vec![CapacityViolation { agent: 0, allocated: 2, capacity: 1 }]);
        assert_eq!(v.budget_excess, None);

        let c = BudgetConstraints::new(2, vec![2, 2]).unwrap();
        let v = c.validate(&[1, 2]);
        assert!(v.capacity_violations.is_empty());
        assert_eq!(v.budget_excess, Some((3, 2)));
    }

    #[test]
    fn capacities_clamped_to_budget() {
        let c = BudgetConstraints::new(2, vec![5, 1]).unwrap();
        assert_eq!(c.capacities, vec![2, 1]);
        assert!(BudgetConstraints::new(2, vec![0, 1]).is_err());
    }

    #[test]
    fn feasible_enumeration_counts() {
        let c = BudgetConstraints::new(2, vec![2, 2]).unwrap();
        let all = c.feasible_allocations();
        // (0,0),(0,1),(0,2),(1,0),(1,1),(2,0)
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|b| c.is_feasible(b)));
    }

    fn vecs(n: usize) -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<u32>)> {
        (
            prop::collection::vec(0u32..6, n),
            prop::collection::vec(0u32..6, n),
            prop::collection::vec(0u32..6, n),
        )
    }

    proptest! {
        #[test]
        fn lattice_laws((x, y, z) in (1usize..8).prop_flat_map(vecs)) {
            let (x, y, z) = (a(&x), a(&y), a(&z));
            prop_assert_eq!(x.join(&y).unwrap(), y.join(&x).unwrap());
            prop_assert_eq!(x.meet(&y).unwrap(), y.meet(&x).unwrap());
            prop_assert_eq!(x.join(&y).unwrap().join(&z).unwrap(), x.join(&y.join(&z).unwrap()).unwrap());
            prop_assert_eq!(x.meet(&y).unwrap().meet(&z).unwrap(), x.meet(&y.meet(&z).unwrap()).unwrap());
            prop_assert_eq!(x.join(&x).unwrap(), x.clone());
            prop_assert_eq!(x.meet(&x).unwrap(), x.clone());
            let m = x.meet(&y).unwrap();
            let j = x.join(&y).unwrap();
            prop_assert!(m.le(&x) && x.le(&j) && m.le(&y) && y.le(&j));
        }
    }
}
