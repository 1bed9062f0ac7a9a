//! Derivative-free Nelder–Mead minimization with dimension-adapted
//! coefficients (Gao and Han), which behaves better than the classic ones
//! beyond a handful of dimensions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Stop when every vertex is within this (max-norm) distance of the best.
    pub xtol: f64,
    /// ...and the spread of function values is at most this.
    pub ftol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            xtol: 1e-10,
            ftol: 1e-15,
            max_evals: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let d = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if d == 0 {
        let fx = eval(x0, &mut evals);
        return NelderMeadResult {
            x: Vec::new(),
            fx,
            evals,
            converged: true,
        };
    }

    let df = d as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / df);
    let (rho, sigma) = (0.75 - 0.5 / df, 1.0 - 1.0 / df);
    let (rho, sigma) = if d == 1 { (0.5, 0.5) } else { (rho, sigma) };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    pts.push(x0.to_vec());
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    let mut converged = false;

    let lerp = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
    };

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let size = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size <= opts.xtol && vals[d] - vals[0] <= opts.ftol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; d];
        for p in &pts[..d] {
            centroid.iter_mut().zip(p).for_each(|(c, x)| *c += x / df);
        }
        let worst = pts[d].clone();

        let xr = lerp(&centroid, &worst, -alpha);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = lerp(&centroid, &worst, -gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
            continue;
        }
        if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[d] {
            let xc = lerp(&centroid, &xr, rho);
            let fc = eval(&xc, &mut evals);
            (xc, (fc <= fr).then_some(fc))
        } else {
            let xc = lerp(&centroid, &worst, rho);
            let fc = eval(&xc, &mut evals);
            (xc, (fc < vals[d]).then_some(fc))
        };
        if let Some(fc) = fc {
            pts[d] = xc;
            vals[d] = fc;
            continue;
        }
        for i in 1..=d {
            pts[i] = lerp(&pts[0], &pts[i], sigma);
            vals[i] = eval(&pts[i], &mut evals);
        }
    }

    let best = (0..=d).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    NelderMeadResult {
        x: pts[best].clone(),
        fx: vals[best],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            step: 0.5,
            xtol: 1e-12,
            ftol: 1e-20,
            max_evals: 20_000,
        };
        let r = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] - 1.0).abs() < 1e-8, "{:?}", r.x);
    }

    #[test]
    fn minimizes_kinked_function_in_six_dimensions() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * (v - 0.3).abs()).sum::<f64>();
        let opts = NelderMeadOptions {
            step: 0.2,
            xtol: 1e-11,
            ftol: 1e-14,
            max_evals: 50_000,
        };
        let mut x = vec![0.0; 6];
        for _ in 0..4 {
            x = nelder_mead(f, &x, &opts).x;
        }
        assert!(x.iter().all(|v| (v - 0.3).abs() < 1e-8), "{x:?}");
    }

    #[test]
    fn never_returns_worse_than_start() {
        let f = |x: &[f64]| x[0].sin() + x[1].cos();
        let opts = NelderMeadOptions {
            max_evals: 7,
            ..Default::default()
        };
        let r = nelder_mead(f, &[0.4, 0.1], &opts);
        assert!(r.fx <= f(&[0.4, 0.1]));
    }
}
