//! Globally adaptive Gauss–Kronrod (7/15) quadrature for Gaussian expectations.

use crate::error::{Error, Result};

use super::phi;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default truncation half-width in standard deviations.
pub const DEFAULT_HALFWIDTH: f64 = 8.0;
/// Maximum number of subintervals before giving up.
const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * h;
    let resabs = abs * h.abs();
    let resasc = asc * h.abs();
    // QUADPACK's error heuristic
    let mut error = ((kronrod - gauss) * h).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error }
}

/// Adaptive integration of `f` over `[a, b]` split at `breaks`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(
            "interval",
            format!("need finite a < b, got [{a}, {b}]"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol", format!("must be positive, got {tol}")));
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut segs: Vec<Segment> = edges.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut evaluations = 15 * segs.len();
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if error <= tol {
            return Ok(Quadrature {
                value,
                error_bound: error,
                evaluations,
            });
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let s = segs[worst];
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval cannot be split further in floating point
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
            });
        }
        segs[worst] = gk15(&f, s.a, mid);
        segs.push(gk15(&f, mid, s.b));
        evaluations += 30;
    }
}

/// E f(Z) for Z ~ N(0,1), integrating f(z)φ(z) over
/// `[center − halfwidth, center + halfwidth]`.
pub fn gauss_expect<F: Fn(f64) -> f64>(f: F, center: f64, halfwidth: f64, tol: f64) -> Result<f64> {
    gauss_expect_with_breaks(f, center, halfwidth, &[], tol).map(|q| q.value)
}

/// Like [`gauss_expect`], with known kinks of `f` passed as breakpoints.
pub fn gauss_expect_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    halfwidth: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<Quadrature> {
    if !(halfwidth >= DEFAULT_HALFWIDTH) {
        return Err(Error::domain(
            "halfwidth",
            format!("must be at least {DEFAULT_HALFWIDTH}, got {halfwidth}"),
        ));
    }
    if !center.is_finite() {
        return Err(Error::domain("center", "must be finite"));
    }
    integrate(
        |z| f(z) * phi(z),
        center - halfwidth,
        center + halfwidth,
        breaks,
        tol,
    )
}
