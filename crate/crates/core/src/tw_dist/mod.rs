//! GOE Tracy–Widom distribution: Fredholm-determinant oracle, frozen lookup
//! table, monotone-cubic interpolation, quantiles and moments.
//!
//! The oracle is expensive (one determinant per evaluation), so a table over
//! `s ∈ [−10, 6]` is generated once and shipped as a text asset; runtime
//! evaluation interpolates the table and never re-runs the oracle.

mod airy;
mod fredholm;

pub use airy::airy_ai;
pub use fredholm::{tw1_cdf_with_nodes, tw1_oracle_cdf, OracleCdf, DEFAULT_PANEL_NODES, ORACLE_RANGE};

use crate::error::{Error, Result};
use std::sync::OnceLock;

const TABLE_ASSET: &str = include_str!("assets/tw1_table.txt");

/// Frozen CDF table with a monotone cubic (Fritsch–Carlson) interpolant.
#[derive(Debug, Clone)]
pub struct Tw1Table {
    knots: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tw1Table {
    /// Builds a fresh table from the Fredholm oracle. Slow; used by the asset
    /// generator and by drift tests.
    pub fn from_oracle(n_knots: usize) -> Result<Self> {
        if n_knots < 16 {
            return Err(Error::domain("table needs at least 16 knots"));
        }
        let (lo, hi) = ORACLE_RANGE;
        let mut knots = Vec::with_capacity(n_knots);
        let mut cdf = Vec::with_capacity(n_knots);
        for i in 0..n_knots {
            let s = lo + (hi - lo) * i as f64 / (n_knots - 1) as f64;
            knots.push(s);
            cdf.push(tw1_oracle_cdf(s).value.clamp(0.0, 1.0));
        }
        Self::from_knots(knots, cdf)
    }

    /// The table bundled with the crate.
    pub fn bundled() -> &'static Tw1Table {
        static TABLE: OnceLock<Tw1Table> = OnceLock::new();
        TABLE.get_or_init(|| {
            Tw1Table::parse(TABLE_ASSET).expect("bundled Tracy-Widom table is valid")
        })
    }

    /// Parses the two-column text asset (comment lines start with '#').
    pub fn parse(text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        let mut cdf = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let s: f64 = parts
                .next()
                .ok_or_else(|| Error::Numerical("missing knot column".into()))?
                .parse()
                .map_err(|e| Error::Numerical(format!("bad knot: {e}")))?;
            let f: f64 = parts
                .next()
                .ok_or_else(|| Error::Numerical("missing cdf column".into()))?
                .parse()
                .map_err(|e| Error::Numerical(format!("bad cdf value: {e}")))?;
            knots.push(s);
            cdf.push(f);
        }
        Self::from_knots(knots, cdf)
    }

    fn from_knots(knots: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if knots.len() != cdf.len() || knots.len() < 16 {
            return Err(Error::Numerical("malformed table".into()));
        }
        for w in knots.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Numerical("knots not strictly increasing".into()));
            }
        }
        for w in cdf.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Numerical("cdf values not strictly increasing".into()));
            }
        }
        let slopes = pchip_slopes(&knots, &cdf);
        Ok(Tw1Table { knots, cdf, slopes })
    }

    /// Serializes the table in the asset format, recording generation
    /// parameters in header comments.
    pub fn to_asset_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# GOE Tracy-Widom CDF table\n");
        out.push_str(&format!(
            "# generator: Fredholm determinant, Nystrom two-panel Gauss-Legendre, {} nodes/panel, tail scale 3.0\n",
            DEFAULT_PANEL_NODES
        ));
        out.push_str("# airy: Maclaurin |x|<=6, Poincare asymptotics beyond\n");
        out.push_str(&format!(
            "# knots: {} uniform on [{}, {}]\n",
            self.knots.len(),
            ORACLE_RANGE.0,
            ORACLE_RANGE.1
        ));
        out.push_str("# columns: s F1(s)\n");
        for (s, f) in self.knots.iter().zip(&self.cdf) {
            out.push_str(&format!("{s} {f:.15e}\n"));
        }
        out
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Interpolated CDF; clamps to 0/1 outside the knot range.
    pub fn cdf(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if s <= self.knots[0] {
            return if s < self.knots[0] { 0.0 } else { self.cdf[0] };
        }
        if s >= self.knots[n - 1] {
            return if s > self.knots[n - 1] { 1.0 } else { self.cdf[n - 1] };
        }
        let i = match self.knots.binary_search_by(|k| k.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.cdf[i],
            Err(i) => i - 1,
        };
        let h = self.knots[i + 1] - self.knots[i];
        let t = (s - self.knots[i]) / h;
        hermite(self.cdf[i], self.cdf[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h, t)
    }

    /// Density (derivative of the interpolant).
    pub fn density(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if s <= self.knots[0] || s >= self.knots[n - 1] {
            return 0.0;
        }
        let i = match self.knots.binary_search_by(|k| k.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let h = self.knots[i + 1] - self.knots[i];
        let t = (s - self.knots[i]) / h;
        hermite_derivative(self.cdf[i], self.cdf[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h, t) / h
    }

    /// Quantile by bisection on the monotone interpolant; `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile needs p in (0,1), got {p}")));
        }
        let n = self.knots.len();
        let mut lo = self.knots[0];
        let mut hi = self.knots[n - 1];
        if p <= self.cdf[0] {
            return Ok(lo);
        }
        if p >= self.cdf[n - 1] {
            return Ok(hi);
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Mean of the tabulated law, by quadrature against the interpolant
    /// density on a fine refinement of the knot grid.
    pub fn mean(&self) -> f64 {
        self.moment(|s| s)
    }

    /// Variance of the tabulated law.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.moment(|s| (s - mean) * (s - mean))
    }

    fn moment<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        // midpoint rule on 8 subintervals per knot interval against the
        // interpolant density
        let refine = 8;
        let mut acc = 0.0;
        for i in 0..self.knots.len() - 1 {
            let h = (self.knots[i + 1] - self.knots[i]) / refine as f64;
            for k in 0..refine {
                let s = self.knots[i] + (k as f64 + 0.5) * h;
                acc += g(s) * self.density(s) * h;
            }
        }
        acc
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = y
        .windows(2)
        .zip(&h)
        .map(|(w, &hh)| (w[1] - w[0]) / hh)
        .collect();
    let mut m = vec![0.0; n];
    m[0] = end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

fn hermite(y0: f64, y1: f64, t0: f64, t1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + t0 * (t3 - 2.0 * t2 + t)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + t1 * (t3 - t2)
}

fn hermite_derivative(y0: f64, y1: f64, t0: f64, t1: f64, t: f64) -> f64 {
    let t2 = t * t;
    y0 * (6.0 * t2 - 6.0 * t)
        + t0 * (3.0 * t2 - 4.0 * t + 1.0)
        + y1 * (-6.0 * t2 + 6.0 * t)
        + t1 * (3.0 * t2 - 2.0 * t)
}
