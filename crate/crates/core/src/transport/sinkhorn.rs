use super::{check_pair, ground_cost, plan_cost, root, DiscreteMeasure, TransportPlan};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Which update form to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinkhornMode {
    /// Log domain when `epsilon < 0.05 * median(cost)`, scaling form otherwise.
    #[default]
    Auto,
    Scaling,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stop once the largest marginal violation is at most this.
    pub tol: f64,
    pub mode: SinkhornMode,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        SinkhornOptions {
            epsilon: 0.05,
            max_iters: 100_000,
            tol: 1e-9,
            mode: SinkhornMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// `<T, d^p>^(1/p)` on the returned plan; the entropy term is excluded.
    pub distance: f64,
    pub plan: TransportPlan,
    pub converged: bool,
    pub iterations: usize,
    pub marginal_error: f64,
    pub log_domain: bool,
}

/// Entropically regularized transport by alternating marginal scaling.
///
/// Zero-weight atoms are dropped before iterating and reappear as zero
/// rows or columns of the plan. Hitting `max_iters` is not an error: the
/// last plan is returned with `converged = false`.
pub fn sinkhorn(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    opts: &SinkhornOptions,
) -> Result<SinkhornResult> {
    check_pair(mu, nu, p)?;
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "epsilon = {} must be positive",
            opts.epsilon
        )));
    }
    let rows: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let cols: Vec<usize> = (0..nu.len()).filter(|&j| nu.weights()[j] > 0.0).collect();
    let a: Vec<f64> = rows.iter().map(|&i| mu.weights()[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| nu.weights()[j]).collect();
    let full_cost = ground_cost(mu, nu, p);
    let mut c = Matrix::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for (s, &j) in cols.iter().enumerate() {
            c[(r, s)] = full_cost[(i, j)];
        }
    }

    let log_domain = match opts.mode {
        SinkhornMode::Log => true,
        SinkhornMode::Scaling => false,
        SinkhornMode::Auto => opts.epsilon < 0.05 * median(c.as_slice()),
    };
    let (t, iterations, err) = if log_domain {
        log_iterations(&a, &b, &c, opts)
    } else {
        scaling_iterations(&a, &b, &c, opts)?
    };

    let mut plan = Matrix::zeros(mu.len(), nu.len());
    for (r, &i) in rows.iter().enumerate() {
        for (s, &j) in cols.iter().enumerate() {
            plan[(i, j)] = t[(r, s)];
        }
    }
    let cost = plan_cost(&plan, &full_cost);
    Ok(SinkhornResult {
        distance: root(cost, p),
        plan: TransportPlan { t: plan, cost },
        converged: err <= opts.tol,
        iterations,
        marginal_error: err,
        log_domain,
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn scaling_iterations(
    a: &[f64],
    b: &[f64],
    c: &Matrix,
    opts: &SinkhornOptions,
) -> Result<(Matrix, usize, f64)> {
    let (n, m) = (a.len(), b.len());
    let mut k = Matrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            k[(i, j)] = (-c[(i, j)] / opts.epsilon).exp();
        }
    }
    let row_dead = (0..n).any(|i| k.row(i).iter().all(|&v| v == 0.0));
    let col_dead = (0..m).any(|j| (0..n).all(|i| k[(i, j)] == 0.0));
    if row_dead || col_dead {
        return Err(Error::NumericalUnderflow {
            epsilon: opts.epsilon,
        });
    }
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; m];
    let mut err = f64::INFINITY;
    let mut iters = 0;
    while iters < opts.max_iters {
        iters += 1;
        for i in 0..n {
            let kv: f64 = k.row(i).iter().zip(&v).map(|(x, y)| x * y).sum();
            u[i] = a[i] / kv;
        }
        for j in 0..m {
            let ktu: f64 = (0..n).map(|i| k[(i, j)] * u[i]).sum();
            v[j] = b[j] / ktu;
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::NumericalUnderflow {
                epsilon: opts.epsilon,
            });
        }
        // columns are exact after the v update; measure the rows
        err = (0..n)
            .map(|i| {
                let s: f64 = (0..m).map(|j| u[i] * k[(i, j)] * v[j]).sum();
                (s - a[i]).abs()
            })
            .fold(0.0, f64::max);
        if err <= opts.tol {
            break;
        }
    }
    let mut t = Matrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            t[(i, j)] = u[i] * k[(i, j)] * v[j];
        }
    }
    Ok((t, iters, err))
}

fn log_sum_exp(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let mx = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + vals.map(|v| (v - mx).exp()).sum::<f64>().ln()
}

fn log_iterations(
    a: &[f64],
    b: &[f64],
    c: &Matrix,
    opts: &SinkhornOptions,
) -> (Matrix, usize, f64) {
    let (n, m) = (a.len(), b.len());
    let eps = opts.epsilon;
    let la: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut err = f64::INFINITY;
    let mut iters = 0;
    while iters < opts.max_iters {
        iters += 1;
        for i in 0..n {
            let lse = log_sum_exp((0..m).map(|j| (g[j] - c[(i, j)]) / eps));
            f[i] = eps * (la[i] - lse);
        }
        for j in 0..m {
            let lse = log_sum_exp((0..n).map(|i| (f[i] - c[(i, j)]) / eps));
            g[j] = eps * (lb[j] - lse);
        }
        err = (0..n)
            .map(|i| {
                let s: f64 = (0..m)
                    .map(|j| ((f[i] + g[j] - c[(i, j)]) / eps).exp())
                    .sum();
                (s - a[i]).abs()
            })
            .fold(0.0, f64::max);
        if err <= opts.tol {
            break;
        }
    }
    let mut t = Matrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            t[(i, j)] = ((f[i] + g[j] - c[(i, j)]) / eps).exp();
        }
    }
    (t, iters, err)
}
