use crate::domain::mesh::{Line, MeshedDomain};

/// Sherman-Morrison correction closing a periodic line.
#[derive(Debug, Clone)]
struct Cyclic {
    line: usize,
    z: Vec<f64>,
    beta_over_gamma: f64,
    inv_denominator: f64,
}

/// Block-Jacobi preconditioner for `V + dt K` whose blocks are the mesh lines,
/// each factored once as a (possibly periodic) tridiagonal system.
#[derive(Debug, Clone)]
pub(crate) struct LineSolver {
    /// Cells in line order; line `k` occupies `starts[k]..starts[k + 1]`.
    order: Vec<usize>,
    starts: Vec<usize>,
    lower: Vec<f64>,
    upper_factor: Vec<f64>,
    inv_pivot: Vec<f64>,
    cyclic: Vec<Cyclic>,
}

impl LineSolver {
    pub fn new(mesh: &MeshedDomain, dt: f64) -> Self {
        let diagonal = mesh.heat_matrix_diagonal(dt);
        let n = mesh.len();
        let mut solver = Self {
            order: Vec::with_capacity(n),
            starts: vec![0],
            lower: Vec::with_capacity(n),
            upper_factor: Vec::with_capacity(n),
            inv_pivot: Vec::with_capacity(n),
            cyclic: Vec::new(),
        };
        for (k, line) in mesh.lines().iter().enumerate() {
            solver.push_line(k, line, &diagonal, dt);
        }
        solver
    }

    fn push_line(&mut self, index: usize, line: &Line, diagonal: &[f64], dt: f64) {
        let n = line.cells.len();
        let base = self.order.len();
        let mut diag: Vec<f64> = line.cells.iter().map(|&c| diagonal[c]).collect();
        let off: Vec<f64> = line.couplings.iter().map(|c| -dt * c).collect();
        let corner = line.is_periodic().then(|| {
            let alpha = off[n - 1];
            let gamma = -diag[0];
            diag[0] -= gamma;
            diag[n - 1] -= alpha * alpha / gamma;
            (alpha, gamma)
        });
        let mut previous_factor = 0.0;
        for k in 0..n {
            let lower = if k > 0 { off[k - 1] } else { 0.0 };
            let upper = if k + 1 < n { off[k] } else { 0.0 };
            let inv_pivot = 1.0 / (diag[k] - lower * previous_factor);
            previous_factor = upper * inv_pivot;
            self.lower.push(lower);
            self.upper_factor.push(previous_factor);
            self.inv_pivot.push(inv_pivot);
        }
        self.order.extend_from_slice(&line.cells);
        self.starts.push(self.order.len());
        if let Some((alpha, gamma)) = corner {
            let mut z = vec![0.0; n];
            z[0] = gamma;
            z[n - 1] = alpha;
            self.thomas(base, &mut z);
            let beta_over_gamma = alpha / gamma;
            let denominator = 1.0 + z[0] + beta_over_gamma * z[n - 1];
            self.cyclic.push(Cyclic {
                line: index,
                z,
                beta_over_gamma,
                inv_denominator: 1.0 / denominator,
            });
        }
    }

    fn thomas(&self, base: usize, x: &mut [f64]) {
        let n = x.len();
        let (lower, upper) = (&self.lower[base..base + n], &self.upper_factor[base..base + n]);
        let inv_pivot = &self.inv_pivot[base..base + n];
        x[0] *= inv_pivot[0];
        for k in 1..n {
            x[k] = (x[k] - lower[k] * x[k - 1]) * inv_pivot[k];
        }
        for k in (0..n - 1).rev() {
            x[k] -= upper[k] * x[k + 1];
        }
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let mut work = Vec::new();
        let mut cyclic = self.cyclic.iter().peekable();
        for k in 0..self.starts.len() - 1 {
            let (a, b) = (self.starts[k], self.starts[k + 1]);
            let cells = &self.order[a..b];
            if let [c] = cells {
                z[*c] = r[*c] * self.inv_pivot[a];
                continue;
            }
            work.clear();
            work.extend(cells.iter().map(|&c| r[c]));
            self.thomas(a, &mut work);
            if let Some(cyc) = cyclic.next_if(|c| c.line == k) {
                let n = work.len();
                let factor = (work[0] + cyc.beta_over_gamma * work[n - 1]) * cyc.inv_denominator;
                for (x, zk) in work.iter_mut().zip(&cyc.z) {
                    *x -= factor * zk;
                }
            }
            for (&c, w) in cells.iter().zip(&work) {
                z[c] = *w;
            }
        }
    }
}
