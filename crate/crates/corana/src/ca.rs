//! Correspondence analysis: masses, profiles, the chi-squared metric,
//! inertia decomposition into factor coordinates, transition formulas,
//! supplementary projection and factor correlations.
//!
//! The decomposition follows the standardized-residual recipe: with
//! relative frequencies `f_ij` and margins `f_i`, `f_j`, form
//! `S_ij = (f_ij - f_i f_j) / sqrt(f_i f_j)` and take its SVD
//! `S = U Sigma V^T`. Then `lambda_a = sigma_a^2`,
//! `F_a(i) = sigma_a u_ia / sqrt(f_i)` and `G_a(j) = sigma_a v_ja / sqrt(f_j)`.
//! The centring removes the trivial constant factor, so at most
//! `min(|I|-1, |J|-1)` factors remain, ordered by decreasing inertia.
//! In this coordinate system the plain Euclidean distance between two rows
//! of `F` equals the chi-squared distance between the corresponding row
//! profiles, and likewise for columns.

use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::tabulate::ContingencyTable;
use crate::util::fmt_sig;
use crate::Axis;

/// Factors with inertia below `RANK_TOL * max(lambda_1, 1)` are dropped.
const RANK_TOL: f64 = 1e-12;

/// Norm below which a point is considered to sit at the origin and has no
/// orientation.
const ORIGIN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CaError {
    #[error("singular value decomposition did not converge")]
    DecompositionFailure,
    #[error("profile has {got} coordinates, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("point is at the origin of the factor space and has no orientation")]
    OriginPoint,
}

/// Relative frequencies of a contingency table together with its margins.
#[derive(Debug, Clone)]
pub struct FrequencyModel {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    f: DMatrix<f64>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
}

/// A profile paired with its mass: one point of a cloud.
///
/// Coordinates are non-negative and sum to one. For supplementary elements
/// built with [`Profile::from_counts`] the mass is a placeholder; projection
/// gives supplementary elements zero weight regardless.
#[derive(Debug, Clone)]
pub struct Profile {
    pub coordinates: Vec<f64>,
    pub mass: f64,
}

impl Profile {
    /// Normalize a non-negative count vector into a profile. Returns `None`
    /// when the vector has no mass or a bad entry.
    pub fn from_counts(counts: &[f64]) -> Option<Profile> {
        if counts.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return None;
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some(Profile {
            coordinates: counts.iter().map(|v| v / total).collect(),
            mass: 1.0,
        })
    }
}

/// One-sided Jacobi SVD for the small dense matrices this module produces.
/// Returns `(u, sigma, v)` with `a = u * diag(sigma) * v^T` and `sigma`
/// descending. Orthogonality of `u` and `v` holds to machine precision,
/// which iterative bidiagonalization does not always deliver here, and the
/// factor coordinates inherit that accuracy.
fn jacobi_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>), CaError> {
    if a.nrows() < a.ncols() {
        let (u, sigma, v) = jacobi_svd(&a.transpose())?;
        return Ok((v, sigma, u));
    }
    let (m, n) = (a.nrows(), a.ncols());
    let mut work = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);

    const ORTHO_TOL: f64 = 1e-15;
    const MAX_SWEEPS: usize = 128;
    // Columns whose norm product sits at rounding level relative to the
    // whole matrix are numerically null; rotating them only chases noise
    // and can keep a sweep busy forever.
    let frob2 = work.norm_squared();
    let null_level = (f64::EPSILON * frob2) * (f64::EPSILON * frob2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..n {
            for k in (j + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += work[(i, j)] * work[(i, j)];
                    beta += work[(i, k)] * work[(i, k)];
                    gamma += work[(i, j)] * work[(i, k)];
                }
                if alpha * beta <= null_level
                    || gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (work[(i, j)], work[(i, k)]);
                    work[(i, j)] = c * x - s * y;
                    work[(i, k)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, j)], v[(i, k)]);
                    v[(i, j)] = c * x - s * y;
                    v[(i, k)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CaError::DecompositionFailure);
    }

    let norms: Vec<f64> = (0..n).map(|j| work.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));
    let mut sigma = Vec::with_capacity(n);
    let mut u = DMatrix::zeros(m, n);
    let mut v_sorted = DMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let s = norms[old_j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, new_j)] = work[(i, old_j)] / s;
            }
        }
        for i in 0..n {
            v_sorted[(i, new_j)] = v[(i, old_j)];
        }
    }
    Ok((u, sigma, v_sorted))
}

impl FrequencyModel {
    /// Divide a validated table by its grand total.
    pub fn from_table(table: &ContingencyTable) -> FrequencyModel {
        let k = table.grand_total();
        let f = table.counts() / k;
        let row_masses = (0..f.nrows()).map(|i| f.row(i).sum()).collect();
        let col_masses = (0..f.ncols()).map(|j| f.column(j).sum()).collect();
        FrequencyModel {
            row_labels: table.row_labels().to_vec(),
            col_labels: table.col_labels().to_vec(),
            f,
            row_masses,
            col_masses,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.f.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.f.ncols()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// The relative-frequency matrix `f_ij = k(i,j)/k`.
    pub fn frequencies(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn row_masses(&self) -> &[f64] {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &[f64] {
        &self.col_masses
    }

    /// The `i`th row profile `f_ij / f_i` with its mass `f_i`.
    pub fn row_profile(&self, i: usize) -> Profile {
        let mass = self.row_masses[i];
        Profile {
            coordinates: (0..self.n_cols()).map(|j| self.f[(i, j)] / mass).collect(),
            mass,
        }
    }

    /// The `j`th column profile `f_ij / f_j` with its mass `f_j`.
    pub fn col_profile(&self, j: usize) -> Profile {
        let mass = self.col_masses[j];
        Profile {
            coordinates: (0..self.n_rows()).map(|i| self.f[(i, j)] / mass).collect(),
            mass,
        }
    }

    /// Chi-squared distance between two profiles on `axis`: the square root
    /// of the margin-weighted squared profile difference.
    pub fn chi2_distance(&self, axis: Axis, a: usize, b: usize) -> f64 {
        let d2 = match axis {
            Axis::Rows => {
                let (fa, fb) = (self.row_masses[a], self.row_masses[b]);
                (0..self.n_cols())
                    .map(|j| {
                        let diff = self.f[(a, j)] / fa - self.f[(b, j)] / fb;
                        diff * diff / self.col_masses[j]
                    })
                    .sum::<f64>()
            }
            Axis::Columns => {
                let (fa, fb) = (self.col_masses[a], self.col_masses[b]);
                (0..self.n_rows())
                    .map(|i| {
                        let diff = self.f[(i, a)] / fa - self.f[(i, b)] / fb;
                        diff * diff / self.row_masses[i]
                    })
                    .sum::<f64>()
            }
        };
        d2.sqrt()
    }

    /// Overall inertia `sum_ij (f_ij - f_i f_j)^2 / (f_i f_j)`: the
    /// chi-squared departure of the table from the independence model. The
    /// row and column clouds have the same inertia.
    pub fn total_inertia(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                let expected = self.row_masses[i] * self.col_masses[j];
                let diff = self.f[(i, j)] - expected;
                total += diff * diff / expected;
            }
        }
        total
    }

    /// Decompose the profile clouds into factor coordinates.
    pub fn decompose(&self) -> Result<FactorSpace, CaError> {
        let (n_rows, n_cols) = (self.n_rows(), self.n_cols());
        let mut s = DMatrix::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                let expected = self.row_masses[i] * self.col_masses[j];
                s[(i, j)] = (self.f[(i, j)] - expected) / expected.sqrt();
            }
        }
        let (u, sigma, v) = jacobi_svd(&s)?;

        // Centring makes the rank at most min(|I|-1, |J|-1); the tolerance
        // drops whatever numerical dust remains.
        let max_factors = n_rows.min(n_cols).saturating_sub(1);
        let lambda_1 = sigma.first().map_or(0.0, |s| s * s);
        let keep = RANK_TOL * lambda_1.max(1.0);
        let mut eigenvalues = Vec::new();
        for a in 0..max_factors {
            let lambda = sigma[a] * sigma[a];
            if lambda < keep {
                break;
            }
            eigenvalues.push(lambda);
        }
        let n_factors = eigenvalues.len();

        let mut row_coords = DMatrix::zeros(n_rows, n_factors);
        let mut col_coords = DMatrix::zeros(n_cols, n_factors);
        for a in 0..n_factors {
            for i in 0..n_rows {
                row_coords[(i, a)] = sigma[a] * u[(i, a)] / self.row_masses[i].sqrt();
            }
            for j in 0..n_cols {
                col_coords[(j, a)] = sigma[a] * v[(j, a)] / self.col_masses[j].sqrt();
            }
        }

        // Fix signs so the row coordinate of largest magnitude is positive
        // on every factor; output is then reproducible across platforms.
        // The anchor is the first row within rounding distance of the
        // maximum magnitude, so exact ties don't flip with SVD noise.
        for a in 0..n_factors {
            let max_abs = (0..n_rows)
                .map(|i| row_coords[(i, a)].abs())
                .fold(0.0, f64::max);
            let anchor = (0..n_rows)
                .find(|&i| row_coords[(i, a)].abs() >= max_abs * (1.0 - 1e-9))
                .unwrap_or(0);
            if row_coords[(anchor, a)] < 0.0 {
                for i in 0..n_rows {
                    row_coords[(i, a)] = -row_coords[(i, a)];
                }
                for j in 0..n_cols {
                    col_coords[(j, a)] = -col_coords[(j, a)];
                }
            }
        }

        Ok(FactorSpace {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            eigenvalues,
            row_coords,
            col_coords,
            row_masses: self.row_masses.clone(),
            col_masses: self.col_masses.clone(),
            total_inertia: self.total_inertia(),
        })
    }
}

/// The Euclidean embedding produced by [`FrequencyModel::decompose`]:
/// eigenvalues in decreasing order and factor coordinates for rows and
/// columns. Immutable once built.
#[derive(Debug, Clone)]
pub struct FactorSpace {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    eigenvalues: Vec<f64>,
    row_coords: DMatrix<f64>,
    col_coords: DMatrix<f64>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
    total_inertia: f64,
}

impl FactorSpace {
    /// Number of retained factors.
    pub fn n_factors(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues (factor inertias), decreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Overall cloud inertia (computed from the frequencies, not from the
    /// eigenvalues, so the two can be cross-checked).
    pub fn total_inertia(&self) -> f64 {
        self.total_inertia
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn row_masses(&self) -> &[f64] {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &[f64] {
        &self.col_masses
    }

    /// Row coordinates, one row per element, one column per factor.
    pub fn row_coords(&self) -> &DMatrix<f64> {
        &self.row_coords
    }

    /// Column coordinates, one row per element, one column per factor.
    pub fn col_coords(&self) -> &DMatrix<f64> {
        &self.col_coords
    }

    fn coords(&self, axis: Axis) -> &DMatrix<f64> {
        match axis {
            Axis::Rows => &self.row_coords,
            Axis::Columns => &self.col_coords,
        }
    }

    /// Full coordinate vector of one element.
    pub fn point(&self, axis: Axis, index: usize) -> Vec<f64> {
        let m = self.coords(axis);
        (0..self.n_factors()).map(|a| m[(index, a)]).collect()
    }

    /// Labels along `axis`.
    pub fn labels(&self, axis: Axis) -> &[String] {
        match axis {
            Axis::Rows => &self.row_labels,
            Axis::Columns => &self.col_labels,
        }
    }

    /// Fraction of the retained inertia carried by one factor (0-based).
    pub fn inertia_explained(&self, factor: usize) -> f64 {
        assert!(factor < self.n_factors(), "factor index out of range");
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues[factor] / total
    }

    /// Project a supplementary profile into the space by the transition
    /// formula, leaving the space unchanged. `axis` names the side the new
    /// element belongs to, so its profile runs over the opposite side:
    /// a supplementary row is the barycentre of the column coordinates
    /// weighted by its profile, scaled by `lambda_a^{-1/2}`.
    pub fn project_supplementary(
        &self,
        profile: &Profile,
        axis: Axis,
    ) -> Result<Vec<f64>, CaError> {
        let (active, expected) = match axis {
            Axis::Rows => (&self.col_coords, self.col_labels.len()),
            Axis::Columns => (&self.row_coords, self.row_labels.len()),
        };
        if profile.coordinates.len() != expected {
            return Err(CaError::DimensionMismatch {
                got: profile.coordinates.len(),
                expected,
            });
        }
        Ok((0..self.n_factors())
            .map(|a| {
                let weighted: f64 = profile
                    .coordinates
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| p * active[(k, a)])
                    .sum();
                weighted / self.eigenvalues[a].sqrt()
            })
            .collect())
    }

    /// Signed cosine of one element's full-dimensional coordinate vector
    /// with each factor axis. The squared components sum to one.
    pub fn factor_correlations(&self, axis: Axis, index: usize) -> Result<Vec<f64>, CaError> {
        let coords = self.point(axis, index);
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < ORIGIN_TOL {
            return Err(CaError::OriginPoint);
        }
        Ok(coords.into_iter().map(|c| c / norm).collect())
    }

    /// Write factor coordinates for one axis as CSV: a `#`-prefixed header
    /// block listing each factor's eigenvalue and percent inertia, then one
    /// record per element with its label, mass and coordinates. Values carry
    /// 12 significant digits.
    pub fn write_csv<W: Write>(&self, axis: Axis, mut writer: W) -> Result<(), std::io::Error> {
        writeln!(writer, "# factor,eigenvalue,percent_inertia")?;
        for a in 0..self.n_factors() {
            writeln!(
                writer,
                "# {},{},{}",
                a + 1,
                fmt_sig(self.eigenvalues[a], 12),
                fmt_sig(100.0 * self.inertia_explained(a), 12),
            )?;
        }
        let labels = self.labels(axis);
        let masses = match axis {
            Axis::Rows => &self.row_masses,
            Axis::Columns => &self.col_masses,
        };
        let coords = self.coords(axis);
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["label".to_string(), "mass".to_string()];
        header.extend((1..=self.n_factors()).map(|a| format!("F_{a}")));
        w.write_record(&header)
            .map_err(std::io::Error::other)?;
        for (idx, label) in labels.iter().enumerate() {
            let mut record = vec![label.clone(), fmt_sig(masses[idx], 12)];
            for a in 0..self.n_factors() {
                record.push(fmt_sig(coords[(idx, a)], 12));
            }
            w.write_record(&record).map_err(std::io::Error::other)?;
        }
        w.flush()?;
        Ok(())
    }
}
