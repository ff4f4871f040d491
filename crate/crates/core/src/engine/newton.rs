use super::linear::{solve_in_place, DenseMatrix};
use super::mna::{Stimulus, System};
use super::{SimError, SolveOptions};

/// Scratch buffers reused across Newton solves.
pub(crate) struct Workspace {
    pub jac: DenseMatrix,
    pub res: Vec<f64>,
    dx: Vec<f64>,
    x_try: Vec<f64>,
    res_try: Vec<f64>,
    jac_try: DenseMatrix,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            jac: DenseMatrix::zeros(dim),
            res: vec![0.0; dim],
            dx: vec![0.0; dim],
            x_try: vec![0.0; dim],
            res_try: vec![0.0; dim],
            jac_try: DenseMatrix::zeros(dim),
        }
    }
}

/// Why a Newton solve stopped without converging.
#[derive(Debug, Clone)]
pub(crate) struct NewtonFailure {
    pub residual: f64,
    pub worst: String,
    pub singular: bool,
}

impl NewtonFailure {
    pub fn into_error(self, time: Option<f64>) -> SimError {
        if self.singular {
            SimError::Singular { node: self.worst }
        } else {
            SimError::Convergence {
                time,
                residual: self.residual,
                worst: self.worst,
            }
        }
    }
}

/// Tolerance-weighted residual norm (squared) and the worst row.
fn weighted(res: &[f64], n_kcl: usize, opts: &SolveOptions) -> (f64, usize) {
    let mut sum = 0.0;
    let mut worst = (0.0, 0);
    for (i, r) in res.iter().enumerate() {
        let tol = if i < n_kcl { opts.abstol } else { opts.vntol };
        let w = (r / tol).powi(2);
        sum += w;
        if w > worst.0 || w.is_nan() {
            worst = (w, i);
        }
    }
    (if sum.is_nan() { f64::INFINITY } else { sum }, worst.1)
}

fn residual_ok(res: &[f64], n_kcl: usize, opts: &SolveOptions) -> bool {
    res[..n_kcl].iter().all(|r| r.abs() < opts.abstol)
        && res[n_kcl..].iter().all(|r| r.abs() < opts.vntol)
}

/// Damped Newton iteration on `x` in place. Returns the iteration count.
///
/// With `accept_initial`, an `x` whose residual is already inside tolerance
/// is returned without a step; transient steps use this for quiescent
/// intervals.
pub(crate) fn solve(
    sys: &System,
    x: &mut [f64],
    st: &Stimulus,
    opts: &SolveOptions,
    ws: &mut Workspace,
    accept_initial: bool,
) -> Result<usize, NewtonFailure> {
    let n_kcl = sys.n_kcl();
    sys.assemble(x, st, &mut ws.jac, &mut ws.res);
    if accept_initial && residual_ok(&ws.res, n_kcl, opts) {
        return Ok(0);
    }
    let (mut norm, _) = weighted(&ws.res, n_kcl, opts);

    for iter in 1..=opts.max_newton {
        for (d, r) in ws.dx.iter_mut().zip(&ws.res) {
            *d = -r;
        }
        if let Err(e) = solve_in_place(&mut ws.jac, &mut ws.dx) {
            return Err(NewtonFailure {
                residual: norm.sqrt(),
                worst: sys.unknown_name(e.row),
                singular: true,
            });
        }
        let vmax = ws.dx[..n_kcl].iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut scale = if vmax > opts.damping {
            opts.damping / vmax
        } else {
            1.0
        };

        let mut halvings = 0;
        let new_norm = loop {
            for ((t, xi), d) in ws.x_try.iter_mut().zip(x.iter()).zip(&ws.dx) {
                *t = xi + scale * d;
            }
            sys.assemble(&ws.x_try, st, &mut ws.jac_try, &mut ws.res_try);
            let (n, _) = weighted(&ws.res_try, n_kcl, opts);
            if n <= norm || halvings == 4 {
                break n;
            }
            scale *= 0.5;
            halvings += 1;
        };

        let xmax = x[..n_kcl].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let step = scale * vmax;
        x.copy_from_slice(&ws.x_try);
        std::mem::swap(&mut ws.jac, &mut ws.jac_try);
        std::mem::swap(&mut ws.res, &mut ws.res_try);
        norm = new_norm;

        if !norm.is_finite() {
            break;
        }
        if step < opts.vntol + opts.reltol * xmax && residual_ok(&ws.res, n_kcl, opts) {
            return Ok(iter);
        }
    }
    let (norm, worst) = weighted(&ws.res, n_kcl, opts);
    Err(NewtonFailure {
        residual: ws.res.get(worst).copied().unwrap_or(norm).abs(),
        worst: sys.unknown_name(worst),
        singular: false,
    })
}
