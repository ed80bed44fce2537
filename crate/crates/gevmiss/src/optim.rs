//! Derivative-free simplex minimisation, finite-difference derivatives and
//! the small symmetric-matrix helpers used for observed information.

/// Nelder–Mead simplex minimiser.
///
/// Infeasible points may return `f64::INFINITY`; the search contracts away
/// from them as long as the starting point is finite.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Relative function tolerance on the simplex spread.
    pub ftol_rel: f64,
    /// Iteration cap per run.
    pub max_iter: usize,
    /// Number of restarts from the incumbent after first convergence.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            ftol_rel: 1e-10,
            max_iter: 2000,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        x0: &[f64],
        steps: &[f64],
    ) -> Minimum {
        assert_eq!(x0.len(), steps.len());
        let mut best = self.run(&mut f, x0, steps);
        for _ in 0..self.restarts {
            let half: Vec<f64> = steps.iter().map(|h| 0.5 * h).collect();
            let again = self.run(&mut f, &best.x, &half);
            let evals = best.evals + again.evals;
            if again.value < best.value {
                best = again;
            }
            best.evals = evals;
        }
        best
    }

    fn run<F: FnMut(&[f64]) -> f64>(&self, f: &mut F, x0: &[f64], steps: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64]| {
            evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0);
        simplex.push((x0.to_vec(), v0));
        for j in 0..n {
            let mut x = x0.to_vec();
            x[j] += if steps[j] != 0.0 { steps[j] } else { 1e-3 };
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut converged = false;
        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let f_best = simplex[0].1;
            let f_worst = simplex[n].1;
            if f_worst.is_finite()
                && (f_worst - f_best).abs() <= self.ftol_rel * (f_best.abs() + self.ftol_rel)
            {
                converged = true;
                break;
            }

            // Centroid of all points but the worst.
            let mut centroid = vec![0.0; n];
            for (x, _) in simplex.iter().take(n) {
                for j in 0..n {
                    centroid[j] += x[j] / n as f64;
                }
            }

            let reflect = |from: &[f64], coeff: f64| -> Vec<f64> {
                (0..n)
                    .map(|j| centroid[j] + coeff * (centroid[j] - from[j]))
                    .collect()
            };

            let worst = simplex[n].0.clone();
            let xr = reflect(&worst, 1.0);
            let fr = eval(&xr);

            if fr < simplex[0].1 {
                // Try to expand.
                let xe = reflect(&worst, 2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                // Contract, on the better side of the worst point.
                let (xc, fc) = if fr < simplex[n].1 {
                    // outside contraction: between centroid and reflection
                    let xc: Vec<f64> = (0..n)
                        .map(|j| centroid[j] + 0.5 * (xr[j] - centroid[j]))
                        .collect();
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc: Vec<f64> = (0..n)
                        .map(|j| centroid[j] + 0.5 * (worst[j] - centroid[j]))
                        .collect();
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    // Shrink towards the best vertex.
                    let best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        for j in 0..n {
                            item.0[j] = best[j] + 0.5 * (item.0[j] - best[j]);
                        }
                        item.1 = eval(&item.0);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        Minimum {
            x: simplex[0].0.clone(),
            value: simplex[0].1,
            evals,
            converged,
        }
    }
}

/// Central-difference gradient with per-coordinate steps `h_j = rel*(1+|x_j|)`.
pub fn numerical_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], rel: f64) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    for j in 0..n {
        let h = rel * (1.0 + x[j].abs());
        let mut up = x.to_vec();
        let mut dn = x.to_vec();
        up[j] += h;
        dn[j] -= h;
        g[j] = (f(&up) - f(&dn)) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian with per-coordinate steps `h_j = rel*(1+|x_j|)`.
pub fn numerical_hessian<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &[f64],
    rel: f64,
) -> Vec<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|&xj| rel * (1.0 + xj.abs())).collect();
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut up = x.to_vec();
        let mut dn = x.to_vec();
        up[j] += h[j];
        dn[j] -= h[j];
        hess[j][j] = (f(&up) - 2.0 * f0 + f(&dn)) / (h[j] * h[j]);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut pp = x.to_vec();
            let mut pm = x.to_vec();
            let mut mp = x.to_vec();
            let mut mm = x.to_vec();
            pp[j] += h[j];
            pp[k] += h[k];
            pm[j] += h[j];
            pm[k] -= h[k];
            mp[j] -= h[j];
            mp[k] += h[k];
            mm[j] -= h[j];
            mm[k] -= h[k];
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h[j] * h[k]);
            hess[j][k] = v;
            hess[k][j] = v;
        }
    }
    hess
}

/// Cholesky factor of a 3x3 symmetric positive definite matrix, or `None`.
pub fn cholesky3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a 3x3 symmetric positive definite matrix via its Cholesky
/// factor; `None` if the matrix is not positive definite.
pub fn spd_inverse3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let l = cholesky3(m)?;
    // Invert the lower-triangular factor.
    let mut li = [[0.0; 3]; 3];
    for i in 0..3 {
        li[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i][k] * li[k][j];
            }
            li[i][j] = s / l[i][i];
        }
    }
    // inv(M) = inv(L)' inv(L)
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in i.max(j)..3 {
                s += li[k][i] * li[k][j];
            }
            inv[i][j] = s;
        }
    }
    Some(inv)
}

/// Quadratic form `g' M g` for a 3-vector.
pub fn quadratic_form3(m: &[[f64; 3]; 3], g: &[f64; 3]) -> f64 {
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            total += g[i] * m[i][j] * g[j];
        }
    }
    total
}

/// Matrix-vector product for a 3x3 matrix.
pub fn matvec3(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic() {
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
        );
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-5);
        assert!((res.x[1] + 1.0).abs() < 1e-5);
        assert!(res.value < 1e-9);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-4, "x = {:?}", res.x);
        assert!((res.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn handles_infinite_regions() {
        // Minimum at the boundary of the feasible half-plane x0 > 1.
        let nm = NelderMead::default();
        let res = nm.minimize(
            |x| {
                if x[0] <= 1.0 {
                    f64::INFINITY
                } else {
                    (x[0] - 2.0).powi(2) + x[1] * x[1]
                }
            },
            &[3.0, 1.0],
            &[0.5, 0.5],
        );
        assert!(res.converged);
        assert!((res.x[0] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn hessian_of_quadratic_is_exact() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1] * x[1] + x[0] * x[1];
        let h = numerical_hessian(f, &[0.3, -0.2], 1e-5);
        assert!((h[0][0] - 2.0).abs() < 1e-6);
        assert!((h[1][1] - 6.0).abs() < 1e-6);
        assert!((h[0][1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn spd_inverse_recovers_identity() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = spd_inverse3(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += m[i][k] * inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "({i},{j}) = {s}");
            }
        }
        // Not positive definite
        let bad = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(spd_inverse3(&bad).is_none());
    }
}
