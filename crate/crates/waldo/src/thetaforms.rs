//! Positive definite integral ternary quadratic forms and their theta
//! series by exact lattice-point counting.
//!
//! A form `[a,b,c,r,s,t]` is `Q = ax² + by² + cz² + ryz + sxz + txy`.
//! Counting completes the square iteratively; floating point is used only
//! to bracket loop ranges (widened by one unit each side) and membership is
//! always decided by exact integer evaluation.

use crate::error::{Error, Result};

/// Integral ternary quadratic form `[a, b, c, r, s, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TernaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
}

impl TernaryForm {
    pub fn new(a: i64, b: i64, c: i64, r: i64, s: i64, t: i64) -> Self {
        TernaryForm { a, b, c, r, s, t }
    }

    pub fn from_array(v: [i64; 6]) -> Self {
        TernaryForm::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    /// Parses "a,b,c,r,s,t".
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Parse(format!(
                "expected 6 comma-separated coefficients, got {}",
                parts.len()
            )));
        }
        let mut v = [0i64; 6];
        for (i, p) in parts.iter().enumerate() {
            v[i] = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad form coefficient {p:?}")))?;
        }
        Ok(TernaryForm::from_array(v))
    }

    /// Gram matrix `[[2a,t,s],[t,2b,r],[s,r,2c]]`.
    pub fn gram(&self) -> [[i64; 3]; 3] {
        [
            [2 * self.a, self.t, self.s],
            [self.t, 2 * self.b, self.r],
            [self.s, self.r, 2 * self.c],
        ]
    }

    pub fn eval(&self, x: i64, y: i64, z: i64) -> i64 {
        self.a * x * x
            + self.b * y * y
            + self.c * z * z
            + self.r * y * z
            + self.s * x * z
            + self.t * x * y
    }
}

impl std::fmt::Display for TernaryForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{},{},{},{},{},{}]",
            self.a, self.b, self.c, self.r, self.s, self.t
        )
    }
}

fn gram_det(g: &[[i64; 3]; 3]) -> i64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

/// Sylvester criterion on the Gram matrix, exact integer arithmetic.
pub fn is_positive_definite(q: &TernaryForm) -> bool {
    let g = q.gram();
    let m1 = g[0][0];
    let m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let m3 = gram_det(&g);
    m1 > 0 && m2 > 0 && m3 > 0
}

/// Exact representation counts: entry n is `#{(x,y,z) in Z³ : Q(x,y,z) = n}`
/// for `0 <= n <= limit`.
pub fn repcount(q: &TernaryForm, limit: u64) -> Result<Vec<u64>> {
    #[cfg(feature = "parallel")]
    {
        repcount_parallel(q, limit)
    }
    #[cfg(not(feature = "parallel"))]
    {
        repcount_serial(q, limit)
    }
}

/// Single-threaded counting, always available (bench baseline).
pub fn repcount_serial(q: &TernaryForm, limit: u64) -> Result<Vec<u64>> {
    let (zmin, zmax) = outer_range(q, limit)?;
    let mut counts = vec![0u64; limit as usize + 1];
    count_z_range(q, limit, zmin, zmax, &mut counts);
    Ok(counts)
}

#[cfg(feature = "parallel")]
fn repcount_parallel(q: &TernaryForm, limit: u64) -> Result<Vec<u64>> {
    use rayon::prelude::*;
    let (zmin, zmax) = outer_range(q, limit)?;
    let span = zmax - zmin + 1;
    let workers = rayon::current_num_threads() as i64;
    if span < 4 * workers.max(1) {
        return repcount_serial(q, limit);
    }
    let chunk = (span + workers - 1) / workers;
    let chunks: Vec<(i64, i64)> = (0..workers)
        .map(|w| {
            let lo = zmin + w * chunk;
            let hi = (lo + chunk - 1).min(zmax);
            (lo, hi)
        })
        .filter(|(lo, hi)| lo <= hi)
        .collect();
    let counts = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut local = vec![0u64; limit as usize + 1];
            count_z_range(q, limit, lo, hi, &mut local);
            local
        })
        .reduce(
            || vec![0u64; limit as usize + 1],
            |mut acc, local| {
                for (a, l) in acc.iter_mut().zip(local) {
                    *a += l;
                }
                acc
            },
        );
    Ok(counts)
}

/// Completed-square data: Q = a (x + (t y + s z)/2a)² + B'(y + ...)² + C'' z²
/// with B' = (4ab - t²)/4a and C'' = det(Gram)/(2·(4ab - t²)).
struct Squares {
    // coefficient of the pure z² term after eliminating x and y
    cz: f64,
    // coefficient of the y-square term after eliminating x
    by: f64,
}

fn squares(q: &TernaryForm) -> Result<Squares> {
    if !is_positive_definite(q) {
        return Err(Error::Domain(format!(
            "form {q} is not positive definite; enumeration would not terminate"
        )));
    }
    let g = q.gram();
    let a = q.a as f64;
    let m2 = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) as f64; // 4ab - t²
    let det = gram_det(&g) as f64;
    Ok(Squares {
        by: m2 / (4.0 * a),
        cz: det / (2.0 * m2),
    })
}

fn outer_range(q: &TernaryForm, limit: u64) -> Result<(i64, i64)> {
    let sq = squares(q)?;
    let zb = ((limit as f64) / sq.cz).sqrt() as i64 + 1;
    Ok((-zb, zb))
}

fn count_z_range(q: &TernaryForm, limit: u64, zmin: i64, zmax: i64, counts: &mut [u64]) {
    let sq = squares(q).expect("caller checked positive definiteness");
    let n = limit as i64;
    let nf = limit as f64;
    let (af, bf, tf, sf, rf) = (
        q.a as f64,
        q.b as f64,
        q.t as f64,
        q.s as f64,
        q.r as f64,
    );
    for z in zmin..=zmax {
        let zf = z as f64;
        // remaining budget after the z-square term
        let rem_y = nf - sq.cz * zf * zf;
        if rem_y < -1.0 {
            continue;
        }
        // y-center: minimize over y of the x-eliminated form
        // coefficient of y after eliminating x: (r - ts/2a) z
        let ycenter = -(rf - tf * sf / (2.0 * af)) * zf / (2.0 * sq.by);
        let yhalf = (rem_y.max(0.0) / sq.by).sqrt();
        let ylo = (ycenter - yhalf).floor() as i64 - 1;
        let yhi = (ycenter + yhalf).ceil() as i64 + 1;
        for y in ylo..=yhi {
            let yf = y as f64;
            // residual after fixing y, z: full form minus the x-square part
            let qyz = bf * yf * yf + (q.c as f64) * zf * zf + rf * yf * zf;
            let xcenter = -(tf * yf + sf * zf) / (2.0 * af);
            let rem_x = nf - (qyz - af * xcenter * xcenter);
            if rem_x < -1.0 {
                continue;
            }
            let xhalf = (rem_x.max(0.0) / af).sqrt();
            let xlo = (xcenter - xhalf).floor() as i64 - 1;
            let xhi = (xcenter + xhalf).ceil() as i64 + 1;
            for x in xlo..=xhi {
                let v = q.eval(x, y, z);
                if (0..=n).contains(&v) {
                    counts[v as usize] += 1;
                }
            }
        }
    }
}
