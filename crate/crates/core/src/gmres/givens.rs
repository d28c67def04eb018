use crate::error::{check_len, Error, Result};

/// Incremental QR of the Hessenberg matrix by plane rotations.
///
/// Holds the rotations, the rotated columns (upper triangular), and the
/// rotated right-hand side `g`, which starts as `beta * e_1`. After `j`
/// columns, `|g[j]|` is the least-squares residual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensState {
    rotations: Vec<(f64, f64)>,
    g: Vec<f64>,
    r: Vec<Vec<f64>>,
}

impl GivensState {
    pub fn new(beta: f64) -> Self {
        Self {
            rotations: Vec::new(),
            g: vec![beta],
            r: Vec::new(),
        }
    }

    /// Number of columns processed.
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn rotations(&self) -> &[(f64, f64)] {
        &self.rotations
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Current least-squares residual norm.
    pub fn residual(&self) -> f64 {
        self.g.last().copied().unwrap_or(0.0).abs()
    }

    /// Rotated column `j` (its upper `j + 1` entries).
    pub fn r_column(&self, j: usize) -> &[f64] {
        &self.r[j]
    }

    /// Folds in Hessenberg column `j = self.len()`, given as its `j + 2`
    /// leading entries, and returns the new residual norm.
    pub fn update(&mut self, h_col: &[f64]) -> Result<f64> {
        let j = self.r.len();
        check_len("givens_update column", j + 2, h_col.len())?;
        let mut h = h_col.to_vec();
        for (i, &(c, s)) in self.rotations.iter().enumerate() {
            let t = c * h[i] + s * h[i + 1];
            h[i + 1] = -s * h[i] + c * h[i + 1];
            h[i] = t;
        }
        let (a, b) = (h[j], h[j + 1]);
        let (c, s) = if b == 0.0 {
            (1.0, 0.0)
        } else {
            let rho = a.hypot(b);
            (a / rho, b / rho)
        };
        h[j] = c * a + s * b;
        h.truncate(j + 1);
        self.rotations.push((c, s));
        let gj = self.g[j];
        self.g[j] = c * gj;
        self.g.push(-s * gj);
        self.r.push(h);
        Ok(self.residual())
    }

    /// Minimizer `y` of the least-squares problem over the first `k` columns,
    /// by back substitution on the rotated triangle.
    pub fn solve(&self, k: usize) -> Result<Vec<f64>> {
        if k > self.r.len() {
            return Err(Error::DimensionMismatch {
                context: "solve_least_squares",
                expected: self.r.len(),
                found: k,
            });
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = self.g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                acc -= self.r[l][i] * yl;
            }
            let d = self.r[i][i];
            if d == 0.0 {
                return Err(Error::SingularTriangular { row: i });
            }
            y[i] = acc / d;
        }
        Ok(y)
    }
}

/// Applies the stored rotations to `h_col`, appends a new one, and returns the
/// updated residual norm.
pub fn givens_update(state: &mut GivensState, h_col: &[f64]) -> Result<f64> {
    state.update(h_col)
}

pub fn solve_least_squares(state: &GivensState, k: usize) -> Result<Vec<f64>> {
    state.solve(k)
}
