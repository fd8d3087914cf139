use std::sync::Arc;

use nalgebra::{DMatrix, DMatrixView};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng_for, RngInfo};
use crate::error::{check_len, Error, Result};
use crate::geometry::RowBallSet;
use crate::spo::{SmoothObjective, SpoProblem};

/// Fraction of nonzero ground-truth codes.
const CODE_DENSITY: f64 = 0.1;
/// Standard deviation of the additive noise on `Z`.
const NOISE_SCALE: f64 = 1e-2;

/// `min ½‖DᵀC − Z‖²_F + ρ‖C‖₀  s.t. ‖D_{i,:}‖₂ ≤ 1` with `Z ∈ ℝ^{n×m}`,
/// `C ∈ ℝ^{l×m}`, `D ∈ ℝ^{l×n}`.
///
/// The primal vector is `[vec(C), vec(D)]`, both column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryInstance {
    pub z: DMatrix<f64>,
    pub l: usize,
    pub rho: f64,
    pub c0: Option<DMatrix<f64>>,
    pub d0: Option<DMatrix<f64>>,
    pub rng: Option<RngInfo>,
}

impl DictionaryInstance {
    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn m(&self) -> usize {
        self.z.ncols()
    }

    pub fn code_len(&self) -> usize {
        self.l * self.m()
    }

    pub fn dim(&self) -> usize {
        self.l * (self.m() + self.n())
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, l) = (self.n(), self.m(), self.l);
        if n == 0 || m == 0 || l == 0 {
            return Err(Error::InvalidInstance(format!(
                "shapes must be positive (n = {n}, l = {l}, m = {m})"
            )));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidInstance(format!("rho = {} is invalid", self.rho)));
        }
        if let Some(c0) = &self.c0 {
            if c0.shape() != (l, m) {
                return Err(Error::InvalidInstance(format!(
                    "C0 is {:?}, expected ({l}, {m})",
                    c0.shape()
                )));
            }
        }
        if let Some(d0) = &self.d0 {
            if d0.shape() != (l, n) {
                return Err(Error::InvalidInstance(format!(
                    "D0 is {:?}, expected ({l}, {n})",
                    d0.shape()
                )));
            }
        }
        let finite = self
            .z
            .iter()
            .chain(self.c0.iter().flat_map(|c| c.iter()))
            .chain(self.d0.iter().flat_map(|d| d.iter()))
            .all(|t| t.is_finite());
        if !finite {
            return Err(Error::InvalidInstance("non-finite matrix entry".into()));
        }
        Ok(())
    }

    /// `[vec(C0), vec(D0)]`, with `D0` projected. Without stored starting
    /// matrices, `C = 0` and `D_{i, i mod n} = 1`.
    pub fn start_point(&self) -> Vec<f64> {
        let (n, l) = (self.n(), self.l);
        let c = self
            .c0
            .clone()
            .unwrap_or_else(|| DMatrix::zeros(l, self.m()));
        let d = self.d0.clone().unwrap_or_else(|| {
            DMatrix::from_fn(l, n, |i, j| if j == i % n { 1.0 } else { 0.0 })
        });
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(c.as_slice());
        v.extend_from_slice(d.as_slice());
        RowBallSet {
            code_len: self.code_len(),
            rows: l,
            cols: n,
        }
        .project_dictionary(&mut v[self.code_len()..]);
        v
    }

    /// Splits a primal vector into `(C, D)`.
    pub fn split(&self, v: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = self.code_len();
        (
            DMatrix::from_column_slice(self.l, self.m(), &v[..k]),
            DMatrix::from_column_slice(self.l, self.n(), &v[k..]),
        )
    }
}

#[derive(Debug, Clone)]
pub struct DictionaryObjective {
    z: DMatrix<f64>,
    l: usize,
}

impl DictionaryObjective {
    pub fn new(inst: &DictionaryInstance) -> Self {
        Self {
            z: inst.z.clone(),
            l: inst.l,
        }
    }

    fn views<'a>(&self, v: &'a [f64]) -> (DMatrixView<'a, f64>, DMatrixView<'a, f64>) {
        let (n, m) = self.z.shape();
        let k = self.l * m;
        (
            DMatrixView::from_slice(&v[..k], self.l, m),
            DMatrixView::from_slice(&v[k..], self.l, n),
        )
    }

    fn residual(&self, c: &DMatrixView<f64>, d: &DMatrixView<f64>) -> DMatrix<f64> {
        d.tr_mul(c) - &self.z
    }
}

impl SmoothObjective for DictionaryObjective {
    fn dim(&self) -> usize {
        self.l * (self.z.nrows() + self.z.ncols())
    }

    fn value(&self, v: &[f64]) -> f64 {
        let (c, d) = self.views(v);
        0.5 * self.residual(&c, &d).norm_squared()
    }

    fn gradient(&self, v: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(v, grad);
    }

    fn value_and_gradient(&self, v: &[f64], grad: &mut [f64]) -> f64 {
        let (c, d) = self.views(v);
        let r = self.residual(&c, &d);
        let gc = &d * &r;
        let gd = c * r.transpose();
        let k = gc.len();
        grad[..k].copy_from_slice(gc.as_slice());
        grad[k..].copy_from_slice(gd.as_slice());
        0.5 * r.norm_squared()
    }
}

/// Sparsity acts on the codes `C` only; `D` has unit-norm-ball rows.
pub fn dictionary_problem(inst: &DictionaryInstance) -> Result<SpoProblem> {
    inst.validate()?;
    let obj = DictionaryObjective::new(inst);
    let set = RowBallSet {
        code_len: inst.code_len(),
        rows: inst.l,
        cols: inst.n(),
    };
    check_len("dictionary dimension", obj.dim(), inst.dim())?;
    SpoProblem::new(inst.rho, Arc::new(obj), Arc::new(set))
}

/// Synthetic instance with `ρ = 1`. Draw order: `D_true` (`l × n`, rows then
/// projected), `C_sparse` (`l × m`; each entry draws a uniform mask value and
/// then a normal), noise (`n × m`), `C0` (`l × m`), `D0` (`l × n`, projected).
/// Every matrix is filled in row-major order.
/// `Z = D_trueᵀ C_sparse + 1e-2 · noise`.
pub fn gen_dictionary(n: usize, l: usize, m: usize, seed: u64) -> Result<DictionaryInstance> {
    for (name, value) in [("n", n), ("l", l), ("m", m)] {
        if value == 0 {
            return Err(Error::InvalidParameter {
                name,
                value: 0.0,
                reason: "dictionary shapes must be positive",
            });
        }
    }
    let mut rng = rng_for(seed);
    let normal = |rows: usize, cols: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        DMatrix::from_row_iterator(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)),
        )
    };
    let project = |d: &mut DMatrix<f64>| {
        let (rows, cols) = d.shape();
        RowBallSet {
            code_len: 0,
            rows,
            cols,
        }
        .project_dictionary(d.as_mut_slice());
    };

    let mut d_true = normal(l, n, &mut rng);
    project(&mut d_true);
    let c_sparse = DMatrix::from_row_iterator(
        l,
        m,
        (0..l * m).map(|_| {
            let keep = rng.random::<f64>() < CODE_DENSITY;
            let value: f64 = rng.sample(StandardNormal);
            if keep {
                value
            } else {
                0.0
            }
        }),
    );
    let noise = normal(n, m, &mut rng);
    let z = d_true.tr_mul(&c_sparse) + noise * NOISE_SCALE;
    let c0 = normal(l, m, &mut rng);
    let mut d0 = normal(l, n, &mut rng);
    project(&mut d0);

    Ok(DictionaryInstance {
        z,
        l,
        rho: 1.0,
        c0: Some(c0),
        d0: Some(d0),
        rng: Some(RngInfo::chacha(seed)),
    })
}
