use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result};

/// Boolean polynomial families with known attribution lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolynomialSpec {
    /// `prod_i x_i`.
    Monomial { d: usize },
    /// `prod_{S1 u S2} x + prod_{S2 u S3} x` for a partition into three equal parts.
    Binomial {
        d: usize,
        partition: [Vec<usize>; 3],
    },
}

impl PolynomialSpec {
    pub fn monomial(d: usize) -> Result<Self> {
        let spec = PolynomialSpec::Monomial { d };
        spec.validate()?;
        Ok(spec)
    }

    /// Binomial over contiguous thirds `(0..d/3, d/3..2d/3, 2d/3..d)`.
    pub fn binomial(d: usize) -> Result<Self> {
        if d == 0 || !d.is_multiple_of(3) {
            return Err(domain_err(format!(
                "binomial needs d divisible by 3, got {d}"
            )));
        }
        let k = d / 3;
        let partition = [(0..k).collect(), (k..2 * k).collect(), (2 * k..d).collect()];
        Self::binomial_with_partition(d, partition)
    }

    pub fn binomial_with_partition(d: usize, partition: [Vec<usize>; 3]) -> Result<Self> {
        let spec = PolynomialSpec::Binomial { d, partition };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PolynomialSpec::Monomial { d } => {
                if *d == 0 {
                    return Err(domain_err("monomial needs d >= 1"));
                }
            }
            PolynomialSpec::Binomial { d, partition } => {
                if *d == 0 || d % 3 != 0 {
                    return Err(domain_err(format!(
                        "binomial needs d divisible by 3, got {d}"
                    )));
                }
                let mut seen = vec![false; *d];
                for part in partition {
                    if part.len() != d / 3 {
                        return Err(domain_err("binomial parts must have equal sizes"));
                    }
                    for &i in part {
                        if i >= *d || seen[i] {
                            return Err(domain_err(format!(
                                "feature {i} is out of range or repeated in the partition"
                            )));
                        }
                        seen[i] = true;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        match self {
            PolynomialSpec::Monomial { d } | PolynomialSpec::Binomial { d, .. } => *d,
        }
    }

    /// The terms as feature sets; the polynomial is the sum of their products.
    pub fn terms(&self) -> Vec<Vec<usize>> {
        match self {
            PolynomialSpec::Monomial { d } => vec![(0..*d).collect()],
            PolynomialSpec::Binomial {
                partition: [s1, s2, s3],
                ..
            } => {
                let mut a: Vec<usize> = s1.iter().chain(s2).copied().collect();
                let mut b: Vec<usize> = s2.iter().chain(s3).copied().collect();
                a.sort_unstable();
                b.sort_unstable();
                vec![a, b]
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms()
            .iter()
            .map(|t| t.iter().map(|&i| x[i]).product::<f64>())
            .sum()
    }

    /// Value at `1_d` restricted to the features in `present` (others zeroed).
    pub fn evaluate_subset(&self, present: &[bool]) -> f64 {
        self.terms()
            .iter()
            .filter(|t| t.iter().all(|&i| present[i]))
            .count() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_terms_and_values() {
        let p = PolynomialSpec::binomial(3).unwrap();
        assert_eq!(p.terms(), vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(p.evaluate(&[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(p.evaluate(&[1.0, 1.0, 0.0]), 1.0);
        assert_eq!(p.evaluate_subset(&[true, true, false]), 1.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(PolynomialSpec::monomial(0).is_err());
        assert!(PolynomialSpec::binomial(4).is_err());
        assert!(PolynomialSpec::binomial_with_partition(3, [vec![0], vec![0], vec![2]]).is_err());
        assert!(PolynomialSpec::binomial_with_partition(3, [vec![0, 1], vec![], vec![2]]).is_err());
    }

    #[test]
    fn monomial_product() {
        let p = PolynomialSpec::monomial(3).unwrap();
        assert_eq!(p.evaluate(&[2.0, 3.0, 0.5]), 3.0);
    }
}
