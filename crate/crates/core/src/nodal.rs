//! Small-signal nodal analysis at a single frequency.
//!
//! Circuits are assembled element by element into a complex admittance
//! matrix and solved by Gaussian elimination. Node 0 is ground. This is the
//! independent check used against the closed-form synthesis routines.

use thiserror::Error;

use crate::netcore::{z_matrix_to_s, Mat2, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("element value is not finite")]
    NonFinite,
    #[error("admittance matrix is singular")]
    Singular,
    #[error("coupled branch impedance matrix is singular")]
    SingularCoupling,
}

#[derive(Debug, Clone)]
enum Stamp {
    Admittance { a: usize, b: usize, y: C64 },
    /// Two branches (a1→b1, a2→b2) with a 2×2 branch impedance matrix.
    Coupled { p: (usize, usize), s: (usize, usize), y: Mat2 },
}

#[derive(Debug, Clone, Default)]
pub struct Circuit {
    nodes: usize,
    stamps: Vec<Stamp>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates a new non-ground node.
    pub fn node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    fn check(&self, n: usize) -> Result<(), NodalError> {
        if n > self.nodes {
            Err(NodalError::UnknownNode(n))
        } else {
            Ok(())
        }
    }

    pub fn impedance(&mut self, a: usize, b: usize, z: C64) -> Result<(), NodalError> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(NodalError::NonFinite);
        }
        self.admittance(a, b, z.inv())
    }

    pub fn admittance(&mut self, a: usize, b: usize, y: C64) -> Result<(), NodalError> {
        self.check(a)?;
        self.check(b)?;
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(NodalError::NonFinite);
        }
        self.stamps.push(Stamp::Admittance { a, b, y });
        Ok(())
    }

    pub fn resistor(&mut self, a: usize, b: usize, ohms: f64) -> Result<(), NodalError> {
        self.impedance(a, b, C64::new(ohms, 0.0))
    }

    pub fn inductor(&mut self, a: usize, b: usize, henries: f64, omega: f64) -> Result<(), NodalError> {
        self.impedance(a, b, C64::new(0.0, omega * henries))
    }

    pub fn capacitor(&mut self, a: usize, b: usize, farads: f64, omega: f64) -> Result<(), NodalError> {
        self.admittance(a, b, C64::new(0.0, omega * farads))
    }

    /// Magnetically coupled branches p = (a1, b1), s = (a2, b2) with branch
    /// impedance matrix [[z_p, z_m], [z_m, z_s]].
    pub fn coupled(
        &mut self,
        p: (usize, usize),
        s: (usize, usize),
        z_p: C64,
        z_s: C64,
        z_m: C64,
    ) -> Result<(), NodalError> {
        for n in [p.0, p.1, s.0, s.1] {
            self.check(n)?;
        }
        let y = Mat2::new(z_p, z_m, z_m, z_s).inverse().ok_or(NodalError::SingularCoupling)?;
        if !y.is_finite() {
            return Err(NodalError::SingularCoupling);
        }
        self.stamps.push(Stamp::Coupled { p, s, y });
        Ok(())
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        let n = self.nodes;
        let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
        let mut add = |i: usize, j: usize, v: C64| {
            if i > 0 && j > 0 {
                m[i - 1][j - 1] += v;
            }
        };
        for st in &self.stamps {
            match *st {
                Stamp::Admittance { a, b, y } => {
                    add(a, a, y);
                    add(b, b, y);
                    add(a, b, -y);
                    add(b, a, -y);
                }
                Stamp::Coupled { p, s, y } => {
                    let br = [p, s];
                    for (i, bi) in br.iter().enumerate() {
                        for (j, bj) in br.iter().enumerate() {
                            let v = y.get(i, j);
                            add(bi.0, bj.0, v);
                            add(bi.1, bj.1, v);
                            add(bi.0, bj.1, -v);
                            add(bi.1, bj.0, -v);
                        }
                    }
                }
            }
        }
        m
    }

    /// Node voltages for the given current injections (node, amps).
    pub fn solve(&self, injections: &[(usize, C64)]) -> Result<Vec<C64>, NodalError> {
        let mut rhs = vec![C64::new(0.0, 0.0); self.nodes];
        for &(n, i) in injections {
            self.check(n)?;
            if n > 0 {
                rhs[n - 1] += i;
            }
        }
        let mut v = gauss_solve(self.matrix(), rhs)?;
        v.insert(0, C64::new(0.0, 0.0));
        Ok(v)
    }

    /// Driving-point impedance between `node` and ground.
    pub fn input_impedance(&self, node: usize) -> Result<C64, NodalError> {
        Ok(self.solve(&[(node, C64::new(1.0, 0.0))])?[node])
    }

    /// Impedance matrix of the two ports (each referenced to ground).
    pub fn z_matrix(&self, p1: usize, p2: usize) -> Result<Mat2, NodalError> {
        let one = C64::new(1.0, 0.0);
        let v1 = self.solve(&[(p1, one)])?;
        let v2 = self.solve(&[(p2, one)])?;
        Ok(Mat2::new(v1[p1], v2[p1], v1[p2], v2[p2]))
    }

    pub fn s_matrix(&self, p1: usize, p2: usize, z_ref: f64) -> Result<Mat2, NodalError> {
        z_matrix_to_s(&self.z_matrix(p1, p2)?, z_ref).ok_or(NodalError::Singular)
    }
}

fn gauss_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Result<Vec<C64>, NodalError> {
    let n = b.len();
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if n == 0 {
        return Ok(Vec::new());
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("non-empty range");
        if a[piv][col].norm() <= scale * 1e-15 {
            return Err(NodalError::Singular);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f.norm() == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(NodalError::Singular);
    }
    Ok(x)
}
