use crate::linalg::{axpy, dot, dotu, norm, scale, C64, ZERO};

use super::precond::Preconditioner;
use super::IterativeResult;

/// Linear operator as a closure `y = A x`.
pub type Apply<'a> = dyn Fn(&[C64], &mut [C64]) + Sync + 'a;

fn residual(op: &Apply, x: &[C64], b: &[C64]) -> Vec<C64> {
    let mut ax = vec![ZERO; x.len()];
    op(x, &mut ax);
    b.iter().zip(&ax).map(|(b, a)| b - a).collect()
}

fn precondition(m: Option<&dyn Preconditioner>, x: &[C64]) -> Vec<C64> {
    match m {
        Some(m) => m.apply(x),
        None => x.to_vec(),
    }
}

/// Rotation `[c, s; −s̄, c]` with real `c` zeroing `b` in `(a, b)`; returns
/// `(c, s, r)` with `r` the rotated leading entry.
pub(crate) fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO, a);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb, C64::new(nb, 0.0));
    }
    let rho = na.hypot(nb);
    let phase = a / na;
    (na / rho, phase * b.conj() / rho, phase * rho)
}

/// Right-preconditioned GMRES with modified Gram–Schmidt and one
/// re-orthogonalization pass. `restart = 0` means no restart.
pub fn gmres(
    op: &Apply,
    precond: Option<&dyn Preconditioner>,
    b: &[C64],
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> IterativeResult {
    let n = b.len();
    let nb = norm(b);
    let mut x = vec![ZERO; n];
    if nb == 0.0 {
        return IterativeResult::converged_zero(n);
    }
    let cycle = if restart == 0 { max_iter } else { restart.min(max_iter) };
    let mut total = 0;
    let mut history = Vec::new();
    let mut w = vec![ZERO; n];
    let mut rel;
    loop {
        let r = if total == 0 { b.to_vec() } else { residual(op, &x, b) };
        let beta = norm(&r);
        rel = beta / nb;
        if rel <= tol || total >= max_iter {
            break;
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hcols: Vec<Vec<C64>> = Vec::new();
        let mut rot: Vec<(f64, C64)> = Vec::new();
        let mut g = vec![C64::new(beta, 0.0)];
        for j in 0..cycle {
            if total >= max_iter {
                break;
            }
            let z = precondition(precond, &basis[j]);
            op(&z, &mut w);
            let mut h = vec![ZERO; j + 2];
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    h[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            let hn = norm(&w);
            h[j + 1] = C64::new(hn, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = c * a + s * bb;
                h[i + 1] = -s.conj() * a + c * bb;
            }
            let (c, s, rr) = givens(h[j], h[j + 1]);
            h[j] = rr;
            h[j + 1] = ZERO;
            rot.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            hcols.push(h);
            total += 1;
            let est = g[j + 1].norm() / nb;
            history.push(est);
            let col_scale = hcols[j].iter().map(|v| v.norm()).fold(hn, f64::max);
            if est <= tol || hn <= 1e-14 * col_scale {
                break;
            }
            let mut next = w.clone();
            scale(C64::new(1.0 / hn, 0.0), &mut next);
            basis.push(next);
        }
        let k = hcols.len();
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut v = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                v -= hcols[jj][i] * yj;
            }
            y[i] = v / hcols[i][i];
        }
        let mut update = vec![ZERO; n];
        for (v, yi) in basis.iter().zip(&y) {
            axpy(*yi, v, &mut update);
        }
        let dx = precondition(precond, &update);
        axpy(C64::new(1.0, 0.0), &dx, &mut x);
        if restart == 0 && total >= max_iter {
            rel = norm(&residual(op, &x, b)) / nb;
            break;
        }
    }
    IterativeResult {
        x,
        iterations: total,
        residual: rel,
        converged: rel <= tol,
        history,
    }
}

/// Symmetric QMR for complex symmetric `A = Aᵀ` with a complex symmetric
/// preconditioner, using the bilinear form `xᵀy`.
pub fn sqmr(op: &Apply, precond: Option<&dyn Preconditioner>, b: &[C64], tol: f64, max_iter: usize) -> IterativeResult {
    let n = b.len();
    let nb = norm(b);
    if nb == 0.0 {
        return IterativeResult::converged_zero(n);
    }
    let mut x = vec![ZERO; n];
    let mut r = b.to_vec();
    let mut tau = nb;
    let mut q = precondition(precond, &r);
    let mut theta_prev = 0.0;
    let mut rho = dotu(&r, &q);
    let mut d = vec![ZERO; n];
    let mut t = vec![ZERO; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        op(&q, &mut t);
        iterations += 1;
        let sigma = dotu(&q, &t);
        if sigma == ZERO || rho == ZERO {
            break;
        }
        let alpha = rho / sigma;
        axpy(-alpha, &t, &mut r);
        let theta = norm(&r) / tau;
        let c2 = 1.0 / (1.0 + theta * theta);
        tau *= theta * c2.sqrt();
        let f = c2 * theta_prev * theta_prev;
        for (di, qi) in d.iter_mut().zip(&q) {
            *di = f * *di + c2 * alpha * qi;
        }
        axpy(C64::new(1.0, 0.0), &d, &mut x);
        theta_prev = theta;
        history.push(tau / nb);
        if tau <= tol * nb {
            rel = norm(&residual(op, &x, b)) / nb;
            if rel <= tol {
                break;
            }
        }
        let u = precondition(precond, &r);
        let rho_next = dotu(&r, &u);
        let beta = rho_next / rho;
        rho = rho_next;
        for (qi, ui) in q.iter_mut().zip(&u) {
            *qi = ui + beta * *qi;
        }
    }
    if rel > tol || history.is_empty() {
        rel = norm(&residual(op, &x, b)) / nb;
    }
    IterativeResult {
        x,
        iterations,
        residual: rel,
        converged: rel <= tol,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn givens_zeroes_second_entry() {
        for (a, b) in [
            (C64::new(1.0, 2.0), C64::new(-0.5, 0.3)),
            (ZERO, C64::new(0.0, 2.0)),
            (C64::new(3.0, 0.0), ZERO),
        ] {
            let (c, s, r) = givens(a, b);
            let top = c * a + s * b;
            let bot = -s.conj() * a + c * b;
            assert!((top - r).norm() < 1e-15 && bot.norm() < 1e-15);
            assert!((c * c + s.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }
}
