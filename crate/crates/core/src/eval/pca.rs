//! Principal component analysis from the sample covariance matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Eigenvalues at or below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// One unit-length component per row, by decreasing variance. The
    /// largest-magnitude entry of each component is positive.
    pub components: Matrix,
    /// Variance along each component.
    pub variances: Vec<f64>,
    /// Centred data projected onto the components, `rows × components`.
    pub projected: Matrix,
    /// Fewer components than requested: the data spans too few directions.
    pub rank_deficient: bool,
}

impl Pca {
    /// Projects new rows with the fitted mean and components.
    pub fn transform(&self, data: &Matrix) -> Result<Matrix> {
        if data.cols() != self.mean.len() {
            return Err(Error::shape("Pca::transform", data.shape(), (data.rows(), self.mean.len())));
        }
        let mut centred = data.clone();
        let neg: Vec<f64> = self.mean.iter().map(|m| -m).collect();
        centred.add_row_vector(&neg)?;
        centred.matmul_t(&self.components)
    }
}

/// Fits `dims` principal components of the rows of `data`.
pub fn pca_project(data: &Matrix, dims: usize) -> Result<Pca> {
    let (n, d) = data.shape();
    if dims == 0 || dims > d {
        return Err(Error::Config(format!(
            "cannot take {dims} components of {d}-column data"
        )));
    }
    if n < dims.max(2) {
        return Err(Error::Domain {
            op: "pca_project",
            detail: format!("{n} rows are too few for {dims} components"),
        });
    }
    if !data.is_finite() {
        return Err(Error::Domain {
            op: "pca_project",
            detail: "data contains non-finite values".into(),
        });
    }

    let mean: Vec<f64> = data.column_sums().iter().map(|s| s / n as f64).collect();
    let mut centred = data.clone();
    let neg: Vec<f64> = mean.iter().map(|m| -m).collect();
    centred.add_row_vector(&neg)?;
    let cov = centred.t_matmul(&centred)?.map(|v| v / (n - 1) as f64);

    let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, cov.data()));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let largest = eig.eigenvalues[order[0]].max(0.0);

    let mut rows = Vec::new();
    let mut variances = Vec::new();
    for &i in order.iter().take(dims) {
        let value = eig.eigenvalues[i];
        if largest == 0.0 || value <= RANK_TOLERANCE * largest {
            break;
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign / norm);
        rows.push(v);
        variances.push(value);
    }

    let rank_deficient = rows.len() < dims;
    let components = if rows.is_empty() {
        Matrix::zeros(0, d)
    } else {
        Matrix::from_rows(&rows)?
    };
    let projected = if rows.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        centred.matmul_t(&components)?
    };
    Ok(Pca {
        mean,
        components,
        variances,
        projected,
        rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Eigenpairs of a symmetric 2×2 matrix from its characteristic
    /// polynomial, largest eigenvalue first.
    fn eig2(a: f64, b: f64, c: f64) -> [(f64, [f64; 2]); 2] {
        let tr = a + c;
        let det = a * c - b * b;
        let disc = (tr * tr / 4.0 - det).sqrt();
        let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
        let vec_for = |l: f64| {
            let v = if b.abs() > 1e-300 {
                [b, l - a]
            } else if (l - a).abs() < (l - c).abs() {
                [1.0, 0.0]
            } else {
                [0.0, 1.0]
            };
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / n, v[1] / n]
        };
        [(l1, vec_for(l1)), (l2, vec_for(l2))]
    }

    fn same_up_to_sign(u: &[f64], v: &[f64]) -> bool {
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        (dot.abs() - 1.0).abs() < 1e-10
    }

    #[test]
    fn three_point_set_matches_closed_form() {
        let data = Matrix::from_rows(&[[0.0, 0.0], [2.0, 1.0], [4.0, 5.0]]).unwrap();
        // mean (2, 2); deviations (-2,-2), (0,-1), (2,3)
        // covariance [[4, 5], [5, 7]]
        let pca = pca_project(&data, 2).unwrap();
        let oracle = eig2(4.0, 5.0, 7.0);
        for (k, (value, vector)) in oracle.iter().enumerate() {
            assert!((pca.variances[k] - value).abs() < 1e-10);
            assert!(same_up_to_sign(pca.components.row(k), vector));
        }
        assert_eq!(pca.mean, vec![2.0, 2.0]);
    }

    #[test]
    fn axis_aligned_data_recovers_axes() {
        let data = Matrix::from_rows(&[[-3.0, 0.0], [3.0, 0.0], [0.0, 0.5], [0.0, -0.5]]).unwrap();
        let pca = pca_project(&data, 2).unwrap();
        assert!(same_up_to_sign(pca.components.row(0), &[1.0, 0.0]));
        assert!(same_up_to_sign(pca.components.row(1), &[0.0, 1.0]));
        assert_eq!(pca.components.row(0), &[1.0, 0.0]);
    }

    #[test]
    fn rank_deficiency_is_flagged() {
        let line = Matrix::from_rows(&[[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [3.0, 6.0, 0.0]]).unwrap();
        let pca = pca_project(&line, 2).unwrap();
        assert!(pca.rank_deficient);
        assert_eq!(pca.components.rows(), 1);
        assert_eq!(pca.projected.shape(), (3, 1));

        let constant = Matrix::filled(4, 3, 0.5);
        let pca = pca_project(&constant, 2).unwrap();
        assert_eq!(pca.components.rows(), 0);
        assert_eq!(pca.projected.shape(), (4, 0));
    }

    #[test]
    fn input_errors() {
        assert!(pca_project(&Matrix::zeros(1, 2), 2).is_err());
        assert!(pca_project(&Matrix::zeros(5, 2), 3).is_err());
        assert!(pca_project(&Matrix::zeros(5, 2), 0).is_err());
    }

    fn data_strategy() -> impl Strategy<Value = Matrix> {
        (3usize..25, 2usize..6).prop_flat_map(|(n, d)| {
            prop::collection::vec(-10.0f64..10.0, n * d)
                .prop_map(move |v| Matrix::new(n, d, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn residual_is_orthogonal_to_components(data in data_strategy()) {
            let pca = pca_project(&data, 2).unwrap();
            let k = pca.components.rows();
            prop_assert_eq!(pca.projected.shape(), (data.rows(), k));
            for w in pca.variances.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            for i in 0..k {
                let c = pca.components.row(i);
                prop_assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
                let pivot = c.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
                prop_assert!(pivot > 0.0);
            }
            for r in 0..data.rows() {
                let centred: Vec<f64> = data.row(r).iter().zip(&pca.mean).map(|(x, m)| x - m).collect();
                let mut residual = centred.clone();
                for i in 0..k {
                    let c = pca.components.row(i);
                    let coeff = pca.projected.get(r, i);
                    residual.iter_mut().zip(c).for_each(|(x, ci)| *x -= coeff * ci);
                }
                for i in 0..k {
                    let dot: f64 = residual.iter().zip(pca.components.row(i)).map(|(a, b)| a * b).sum();
                    prop_assert!(dot.abs() < 1e-9, "residual · component = {}", dot);
                }
            }
            prop_assert_eq!(pca.transform(&data).unwrap().shape(), pca.projected.shape());
        }

        #[test]
        fn projection_variance_follows_component_order(data in data_strategy()) {
            let pca = pca_project(&data, 2).unwrap();
            if pca.projected.cols() == 2 {
                let n = data.rows() as f64;
                let var = |c: usize| pca.projected.column(c).iter().map(|v| v * v).sum::<f64>() / (n - 1.0);
                prop_assert!(var(0) + 1e-9 >= var(1));
                prop_assert!((var(0) - pca.variances[0]).abs() < 1e-8 * (1.0 + pca.variances[0]));
            }
        }
    }
}
