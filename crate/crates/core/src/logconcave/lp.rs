//! Primal-dual interior point method for
//!
//! ```text
//! maximize c^T v  subject to  v <= u,  v[j-1] - 2 v[j] + v[j+1] <= 0,
//! ```
//!
//! the linear subproblem of the log-concave extractor. A floor
//! `v >= min(u) - FLOOR_MARGIN` is added: where `c` underflows to zero the
//! problem is otherwise unbounded below in those coordinates and the
//! iterates run off to -1e100 and beyond. The normal
//! equations are pentadiagonal, so each iteration costs O(n).

use super::banded::Penta;

const MAX_ITER: usize = 200;
const STEP_FRACTION: f64 = 0.995;
// Attainable in double precision: past about 1e-12 in the gap the
// normal equations lose all accuracy and the residuals blow up.
const RES_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-10;
/// Give up once the merit is this many times worse than the best seen.
const BLOWUP: f64 = 1e4;
/// e^-60 relative to the smallest bound; invisible in any mass.
const FLOOR_MARGIN: f64 = 60.0;
/// Smallest cost relative to the largest.
const COST_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub v: Vec<f64>,
    pub converged: bool,
}

/// `G x` with `G = [I; D; -I]`, `D` the second-difference operator.
fn g_mul(x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let k = n.saturating_sub(2);
    out[..n].copy_from_slice(x);
    for r in 0..k {
        out[n + r] = x[r] - 2.0 * x[r + 1] + x[r + 2];
    }
    for j in 0..n {
        out[n + k + j] = -x[j];
    }
}

fn gt_mul(y: &[f64], n: usize, out: &mut [f64]) {
    let k = n.saturating_sub(2);
    out.copy_from_slice(&y[..n]);
    for r in 0..k {
        let w = y[n + r];
        out[r] += w;
        out[r + 1] -= 2.0 * w;
        out[r + 2] += w;
    }
    for j in 0..n {
        out[j] -= y[n + k + j];
    }
}

fn normal_matrix(w: &[f64], n: usize) -> Penta {
    let k = n.saturating_sub(2);
    let mut m = Penta::zeros(n);
    for j in 0..n {
        m.d0[j] = w[j] + w[n + k + j];
    }
    for r in 0..k {
        let wr = w[n + r];
        m.d0[r] += wr;
        m.d0[r + 1] += 4.0 * wr;
        m.d0[r + 2] += wr;
        m.d1[r + 1] -= 2.0 * wr;
        m.d1[r + 2] -= 2.0 * wr;
        m.d2[r + 2] += wr;
    }
    m
}

fn max_step(x: &[f64], dx: &[f64]) -> f64 {
    let mut a: f64 = 1.0;
    for (xi, di) in x.iter().zip(dx) {
        if *di < 0.0 {
            a = a.min(-xi / di);
        }
    }
    a
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solves the LP for objective weights `c` (all finite) and bounds `u`.
pub(crate) fn solve_lp(c: &[f64], u: &[f64]) -> LpSolution {
    let n = u.len();
    let k = n.saturating_sub(2);
    let m = 2 * n + k;
    let floor = u.iter().copied().fold(f64::INFINITY, f64::min) - FLOOR_MARGIN;
    let scale = inf_norm(c).max(f64::MIN_POSITIVE);
    let c: Vec<f64> = c.iter().map(|x| (x / scale).max(COST_FLOOR)).collect();
    let h: Vec<f64> = u
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0.0, k))
        .chain(std::iter::repeat_n(-floor, n))
        .collect();
    let h_norm = 1.0 + inf_norm(&h);

    let mut v: Vec<f64> = u.iter().map(|x| x - 1.0).collect();
    let mut gv = vec![0.0; m];
    g_mul(&v, &mut gv);
    let mut s: Vec<f64> = (0..m).map(|i| (h[i] - gv[i]).max(0.0) + 1.0).collect();
    // Strictly dual feasible start: unit concavity duals, then upper and
    // floor duals chosen so that G^T z = c. Newton steps scale the dual
    // residual by (1 - step), so it cannot stall near the boundary.
    let mut z = vec![0.0; m];
    z[n..n + k].fill(1.0);
    let mut conc = vec![0.0; n];
    gt_mul(&z, n, &mut conc);
    for j in 0..n {
        let extra = 1.0 + (-conc[j]).max(0.0);
        z[j] = c[j] + extra;
        z[n + k + j] = extra + conc[j];
    }

    let mut rp = vec![0.0; m];
    let mut rd = vec![0.0; n];
    let mut gtz = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut tmp_n = vec![0.0; n];

    let mut best = (v.clone(), f64::INFINITY);
    for _ in 0..MAX_ITER {
        g_mul(&v, &mut gv);
        for i in 0..m {
            rp[i] = gv[i] + s[i] - h[i];
        }
        gt_mul(&z, n, &mut gtz);
        for j in 0..n {
            rd[j] = gtz[j] - c[j];
        }
        let gap: f64 = s.iter().zip(&z).map(|(a, b)| a * b).sum();
        let obj: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
        let merit = (inf_norm(&rp) / (RES_TOL * h_norm))
            .max(inf_norm(&rd) / RES_TOL)
            .max(gap / (GAP_TOL * (1.0 + obj.abs())));
        if merit < best.1 {
            best = (v.clone(), merit);
        } else if merit > BLOWUP * best.1 {
            break;
        }
        if merit <= 1.0 {
            break;
        }
        let mu = gap / m as f64;
        let w: Vec<f64> = z.iter().zip(&s).map(|(a, b)| a / b).collect();
        let mut mat = normal_matrix(&w, n);
        let factor = match mat.factor() {
            Some(f) => f,
            None => {
                let bump = 1e-14 * mat.d0.iter().fold(0.0f64, |a, b| a.max(*b)).max(1.0);
                mat.d0.iter_mut().for_each(|d| *d += bump);
                match mat.factor() {
                    Some(f) => f,
                    None => break,
                }
            }
        };

        // direction for complementarity residual rc
        let direction = |rc: &[f64], tmp_m: &mut Vec<f64>, tmp_n: &mut Vec<f64>| {
            for i in 0..m {
                tmp_m[i] = w[i] * rp[i] - rc[i] / s[i];
            }
            gt_mul(tmp_m, n, tmp_n);
            let rhs: Vec<f64> = (0..n).map(|j| -rd[j] - tmp_n[j]).collect();
            let dv = factor.solve(&rhs);
            let mut gdv = vec![0.0; m];
            g_mul(&dv, &mut gdv);
            let dz: Vec<f64> = (0..m).map(|i| w[i] * (gdv[i] + rp[i]) - rc[i] / s[i]).collect();
            let ds: Vec<f64> = (0..m).map(|i| -(rc[i] + s[i] * dz[i]) / z[i]).collect();
            (dv, ds, dz)
        };

        let rc_aff: Vec<f64> = s.iter().zip(&z).map(|(a, b)| a * b).collect();
        let (_, ds_a, dz_a) = direction(&rc_aff, &mut tmp_m, &mut tmp_n);
        let ap = max_step(&s, &ds_a);
        let ad = max_step(&z, &dz_a);
        let mu_aff: f64 = (0..m)
            .map(|i| (s[i] + ap * ds_a[i]) * (z[i] + ad * dz_a[i]))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).powi(3).min(1.0);
        let rc: Vec<f64> = (0..m)
            .map(|i| s[i] * z[i] + ds_a[i] * dz_a[i] - sigma * mu)
            .collect();
        let (dv, ds, dz) = direction(&rc, &mut tmp_m, &mut tmp_n);
        let ap = (STEP_FRACTION * max_step(&s, &ds)).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &dz)).min(1.0);
        for j in 0..n {
            v[j] += ap * dv[j];
        }
        for i in 0..m {
            s[i] += ap * ds[i];
            z[i] += ad * dz[i];
        }
    }
    let (v, merit) = best;
    LpSolution { v, converged: merit <= 1.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_bound_is_its_own_solution() {
        // u concave: optimum is v = u for any positive weights
        let u: Vec<f64> = (0..41).map(|j| -((j as f64 - 20.0) / 10.0).powi(2)).collect();
        let c: Vec<f64> = (0..41).map(|j| 1.0 + (j as f64).sin().abs()).collect();
        let sol = solve_lp(&c, &u);
        assert!(sol.converged);
        for (a, b) in sol.v.iter().zip(&u) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn dip_caps_every_line() {
        // A concave v lies under its tangent line at index 10, whose sum
        // is 21 v[10] <= -21; a constant v = -1 attains it.
        let mut u = vec![0.0; 21];
        u[10] = -1.0;
        let sol = solve_lp(&vec![1.0; 21], &u);
        assert!(sol.converged);
        let val: f64 = sol.v.iter().sum();
        assert!((val + 21.0).abs() < 1e-7, "{val}");
        for j in 1..20 {
            assert!(sol.v[j - 1] - 2.0 * sol.v[j] + sol.v[j + 1] <= 1e-9);
        }
        for (a, b) in sol.v.iter().zip(&u) {
            assert!(*a <= b + 1e-9);
        }
    }

    #[test]
    fn vanishing_costs_stay_bounded() {
        // tail weights of e^-300 used to send the tail iterates to -1e130
        let u: Vec<f64> = (0..61).map(|j| -((j as f64 - 30.0) / 3.0).powi(2)).collect();
        let c: Vec<f64> = u.iter().map(|x| (3.0 * x).exp()).collect();
        let sol = solve_lp(&c, &u);
        assert!(sol.converged);
        let floor = -100.0 - FLOOR_MARGIN;
        for (a, b) in sol.v.iter().zip(&u) {
            assert!(*a <= b + 1e-9 && *a >= floor - 1e-6, "{a}");
        }
        for (a, b) in sol.v[25..36].iter().zip(&u[25..36]) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
