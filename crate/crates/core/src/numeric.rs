//! Finite-difference differential geometry in a coordinate chart.
//!
//! Index conventions: `gamma[a][b][c] = Γ^a_{bc}`, `riem[a][b][c][d] = R^a_{bcd}` with
//! `R(∂_c, ∂_d) ∂_b = R^a_{bcd} ∂_a` and `R(X, Y) = [∇_X, ∇_Y] - ∇_{[X,Y]}`,
//! `Ric_{bd} = R^a_{bad}`.

use nalgebra::DMatrix;

pub type Christoffel = Vec<Vec<Vec<f64>>>;
pub type Riemann = Vec<Vec<Vec<Vec<f64>>>>;

/// Centered difference of `f` at 0, optionally with one Richardson step
/// `(4 D(h/2) - D(h)) / 3`.
pub fn derivative(f: impl Fn(f64) -> Vec<f64>, h: f64, richardson: bool) -> Vec<f64> {
    let central = |s: f64| -> Vec<f64> {
        let a = f(s);
        let b = f(-s);
        a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * s)).collect()
    };
    if !richardson {
        return central(h);
    }
    let coarse = central(h);
    let fine = central(h / 2.0);
    fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

pub fn shifted(u: &[f64], c: usize, t: f64) -> Vec<f64> {
    let mut v = u.to_vec();
    v[c] += t;
    v
}

/// `Γ^a_{bc} = ½ g^{ad} (∂_b g_{dc} + ∂_c g_{db} - ∂_d g_{bc})` from the metric and its
/// coordinate derivatives `dg[c] = ∂_c g`.
pub fn christoffel_from(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Option<Christoffel> {
    let n = g.nrows();
    let ginv = g.clone().try_inverse()?;
    let mut gam = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for d in 0..n {
                    acc += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gam[a][b][c] = 0.5 * acc;
            }
        }
    }
    Some(gam)
}

pub fn metric_derivatives(metric: &dyn Fn(&[f64]) -> DMatrix<f64>, u: &[f64], h: f64) -> Vec<DMatrix<f64>> {
    let n = u.len();
    (0..n)
        .map(|c| {
            let d = derivative(|t| metric(&shifted(u, c, t)).as_slice().to_vec(), h, true);
            DMatrix::from_column_slice(n, n, &d)
        })
        .collect()
}

pub fn christoffel(metric: &dyn Fn(&[f64]) -> DMatrix<f64>, u: &[f64], h: f64) -> Option<Christoffel> {
    christoffel_from(&metric(u), &metric_derivatives(metric, u, h))
}

fn flatten3(t: &Christoffel) -> Vec<f64> {
    t.iter().flatten().flatten().copied().collect()
}

/// Riemann tensor from Christoffel symbols and their finite-difference derivatives.
pub fn riemann(metric: &dyn Fn(&[f64]) -> DMatrix<f64>, u: &[f64], h: f64) -> Option<Riemann> {
    let n = u.len();
    let gam = christoffel(metric, u, h)?;
    // dgam[c][a*n*n + b*n + e] = ∂_c Γ^a_{be}
    let mut dgam = Vec::with_capacity(n);
    for c in 0..n {
        let failed = std::cell::Cell::new(false);
        let d = derivative(
            |t| match christoffel(metric, &shifted(u, c, t), h) {
                Some(g) => flatten3(&g),
                None => {
                    failed.set(true);
                    vec![0.0; n * n * n]
                }
            },
            h,
            true,
        );
        if failed.get() {
            return None;
        }
        dgam.push(d);
    }
    let dg = |c: usize, a: usize, b: usize, e: usize| dgam[c][a * n * n + b * n + e];
    let mut r = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut acc = dg(c, a, d, b) - dg(d, a, c, b);
                    for e in 0..n {
                        acc += gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b];
                    }
                    r[a][b][c][d] = acc;
                }
            }
        }
    }
    Some(r)
}

pub fn ricci_from(r: &Riemann) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| r[a][b][a][d]).sum())
}

pub fn ricci(metric: &dyn Fn(&[f64]) -> DMatrix<f64>, u: &[f64], h: f64) -> Option<DMatrix<f64>> {
    riemann(metric, u, h).map(|r| ricci_from(&r))
}

pub fn scalar_curvature(g: &DMatrix<f64>, ric: &DMatrix<f64>) -> Option<f64> {
    let ginv = g.clone().try_inverse()?;
    Some((ginv.transpose().component_mul(ric)).sum())
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_sphere(u: &[f64]) -> DMatrix<f64> {
        let r2: f64 = u.iter().map(|x| x * x).sum();
        let l = 2.0 / (1.0 + r2);
        DMatrix::identity(u.len(), u.len()) * (l * l)
    }

    #[test]
    fn richardson_beats_plain_difference() {
        let f = |t: f64| vec![(1.0 + t).exp()];
        let exact = 1f64.exp();
        let plain = (derivative(f, 1e-2, false)[0] - exact).abs();
        let rich = (derivative(f, 1e-2, true)[0] - exact).abs();
        assert!(rich < plain / 100.0);
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let g = |_: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0]));
        let r = ricci(&g, &[0.3, -0.2, 0.1], 1e-3).unwrap();
        assert!(max_abs(&r) < 1e-9);
    }

    #[test]
    fn three_sphere_ricci_is_twice_the_metric() {
        let u = [0.2, -0.1, 0.4];
        let ric = ricci(&round_sphere, &u, 1e-3).unwrap();
        let g = round_sphere(&u);
        assert!(max_abs(&(ric.clone() - g.clone() * 2.0)) < 1e-7);
        assert!((scalar_curvature(&g, &ric).unwrap() - 6.0).abs() < 1e-7);
    }
}
