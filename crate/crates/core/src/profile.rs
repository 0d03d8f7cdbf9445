//! Radial profiles: the warping function ψ and its area function S = ψ^(n-1).

use crate::error::{arg, Error, Result};
use std::fmt;
use std::path::Path;

/// `log S` with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl LogJet {
    fn scaled(self, k: f64) -> LogJet {
        LogJet {
            value: k * self.value,
            d1: k * self.d1,
            d2: k * self.d2,
        }
    }

    /// Jet of `log S` from `(S, S', S'')`.
    fn from_values(s: f64, ds: f64, d2s: f64) -> LogJet {
        let d1 = ds / s;
        LogJet {
            value: s.ln(),
            d1,
            d2: d2s / s - d1 * d1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    HalfLine,
    FullLine,
}

/// Tabulated warping function with log-linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct TableProfile {
    nodes: Vec<f64>,
    log_psi: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    n: u32,
    source: Option<String>,
}

fn central_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = x.len();
    (0..m)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == m - 1 {
                (m - 2, m - 1)
            } else {
                (i - 1, i + 1)
            };
            (y[b] - y[a]) / (x[b] - x[a])
        })
        .collect()
}

impl TableProfile {
    pub fn new(nodes: Vec<f64>, psi: Vec<f64>, n: u32) -> Result<Self> {
        if nodes.len() < 3 || nodes.len() != psi.len() {
            return arg("table profile needs at least three (r, psi) rows");
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return arg("table nodes must be finite and strictly increasing");
        }
        if let Some(p) = psi.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return arg(format!("table values must be positive, found {p}"));
        }
        if n < 2 {
            return arg("dimension n must be at least 2");
        }
        let log_psi: Vec<f64> = psi.iter().map(|p| p.ln()).collect();
        let d1 = central_differences(&nodes, &log_psi);
        let d2 = central_differences(&nodes, &d1);
        Ok(TableProfile {
            nodes,
            log_psi,
            d1,
            d2,
            n,
            source: None,
        })
    }

    /// Parse CSV text with header `r,psi`.
    pub fn from_csv(text: &str, n: u32) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Argument("empty table".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["r", "psi"] {
            return arg(format!("table header must be `r,psi`, found `{header}`"));
        }
        let mut nodes = Vec::new();
        let mut psi = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut it = line.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Argument(format!("bad table row {}: `{line}`", k + 2)))
            };
            nodes.push(parse(it.next())?);
            psi.push(parse(it.next())?);
        }
        Self::new(nodes, psi, n)
    }

    pub fn from_path(path: &Path, n: u32) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("cannot read table {}: {e}", path.display())))?;
        let mut t = Self::from_csv(&text, n)?;
        t.source = Some(path.display().to_string());
        Ok(t)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    fn log_psi_jet(&self, r: f64) -> LogJet {
        let x = &self.nodes;
        let m = x.len() - 1;
        let r = r.clamp(x[0], x[m]);
        let k = x.partition_point(|&p| p <= r).clamp(1, m) - 1;
        let s = (r - x[k]) / (x[k + 1] - x[k]);
        let lerp = |v: &[f64]| v[k] + s * (v[k + 1] - v[k]);
        LogJet {
            value: lerp(&self.log_psi),
            d1: lerp(&self.d1),
            d2: lerp(&self.d2),
        }
    }
}

/// Built-in families of warping functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// ψ = exp(-r^α/(n-1)), so S = exp(-r^α).
    ExpAlpha {
        alpha: f64,
        n: u32,
    },
    /// ψ = r.
    Euclidean {
        n: u32,
    },
    /// ψ = r^β.
    Power {
        beta: f64,
        n: u32,
    },
    /// ψ = sinh r.
    Hyperbolic {
        n: u32,
    },
    /// Two-dimensional, S = r for r ≤ 1 and r log r for r ≥ 2.
    RLogR,
    Table(TableProfile),
}

impl Family {
    pub fn dimension(&self) -> u32 {
        match self {
            Family::ExpAlpha { n, .. }
            | Family::Euclidean { n }
            | Family::Power { n, .. }
            | Family::Hyperbolic { n } => *n,
            Family::RLogR => 2,
            Family::Table(t) => t.n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::ExpAlpha { .. } => "exp_alpha",
            Family::Euclidean { .. } => "euclidean",
            Family::Power { .. } => "power",
            Family::Hyperbolic { .. } => "hyperbolic",
            Family::RLogR => "rlogr",
            Family::Table(_) => "table",
        }
    }

    /// Jet of log S from the closed form, valid for r > 0.
    fn raw_jet(&self, r: f64) -> LogJet {
        match self {
            Family::ExpAlpha { alpha, .. } => {
                let a = *alpha;
                let ra = r.powf(a);
                LogJet {
                    value: -ra,
                    d1: -a * ra / r,
                    d2: -a * (a - 1.0) * ra / (r * r),
                }
            }
            Family::Euclidean { n } => LogJet {
                value: r.ln(),
                d1: 1.0 / r,
                d2: -1.0 / (r * r),
            }
            .scaled((n - 1) as f64),
            Family::Power { beta, n } => {
                if *beta == 0.0 {
                    LogJet {
                        value: 0.0,
                        d1: 0.0,
                        d2: 0.0,
                    }
                } else {
                    LogJet {
                        value: r.ln(),
                        d1: 1.0 / r,
                        d2: -1.0 / (r * r),
                    }
                    .scaled(beta * (n - 1) as f64)
                }
            }
            Family::Hyperbolic { n } => {
                let log_sinh = if r > 20.0 {
                    r + (-(-2.0 * r).exp()).ln_1p() - std::f64::consts::LN_2
                } else {
                    r.sinh().ln()
                };
                let sh = r.sinh();
                LogJet {
                    value: log_sinh,
                    d1: 1.0 / r.tanh(),
                    d2: if r > 350.0 { 0.0 } else { -1.0 / (sh * sh) },
                }
                .scaled((n - 1) as f64)
            }
            Family::RLogR => {
                if r <= 1.0 {
                    LogJet::from_values(r, 1.0, 0.0)
                } else if r >= 2.0 {
                    let l = r.ln();
                    LogJet::from_values(r * l, l + 1.0, 1.0 / r)
                } else {
                    let (s, ds, d2s) = hermite(
                        r,
                        1.0,
                        2.0,
                        (1.0, 1.0, 0.0),
                        (2.0 * std::f64::consts::LN_2, std::f64::consts::LN_2 + 1.0, 0.5),
                    );
                    LogJet::from_values(s, ds, d2s)
                }
            }
            Family::Table(t) => t.log_psi_jet(r).scaled((t.n - 1) as f64),
        }
    }
}

/// Quintic Hermite interpolant on `[x0, x1]` through `(y, y', y'')` triples;
/// returns value, first and second derivative at `x`. Joins built with it are C².
pub(crate) fn hermite(x: f64, x0: f64, x1: f64, p0: (f64, f64, f64), p1: (f64, f64, f64)) -> (f64, f64, f64) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let (y0, m0, k0) = p0;
    let (y1, m1, k1) = p1;
    let (m0, m1, k0, k1) = (m0 * h, m1 * h, k0 * h * h, k1 * h * h);
    let v = y0 * (1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5)
        + m0 * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5)
        + k0 * 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5)
        + y1 * (10.0 * s3 - 15.0 * s4 + 6.0 * s5)
        + m1 * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5)
        + k1 * 0.5 * (s3 - 2.0 * s4 + s5);
    let d = (y1 - y0) * (30.0 * s2 - 60.0 * s3 + 30.0 * s4)
        + m0 * (1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4)
        + k0 * 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4)
        + m1 * (-12.0 * s2 + 28.0 * s3 - 15.0 * s4)
        + k1 * 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    let dd = (y1 - y0) * (60.0 * s - 180.0 * s2 + 120.0 * s3)
        + m0 * (-36.0 * s + 96.0 * s2 - 60.0 * s3)
        + k0 * 0.5 * (2.0 - 18.0 * s + 36.0 * s2 - 20.0 * s3)
        + m1 * (-24.0 * s + 84.0 * s2 - 60.0 * s3)
        + k1 * 0.5 * (6.0 * s - 24.0 * s2 + 20.0 * s3);
    (v, d / h, dd / (h * h))
}

/// A warping function on a half-line or on the whole line.
///
/// Full-line profiles evaluate `family` for `r ≥ cap_radius`, the minus-end
/// profile at `-r` for `r ≤ -cap_radius`, and a C² quintic in `log S` between.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    family: Family,
    domain: Domain,
    cap_radius: f64,
    minus: Option<Box<RadialProfile>>,
}

impl RadialProfile {
    fn half_line(family: Family, cap_radius: f64) -> Result<Self> {
        if !(cap_radius >= 0.0 && cap_radius.is_finite()) {
            return arg(format!("cap_radius must be nonnegative, got {cap_radius}"));
        }
        if family.dimension() < 2 {
            return arg("dimension n must be at least 2");
        }
        Ok(RadialProfile {
            family,
            domain: Domain::HalfLine,
            cap_radius,
            minus: None,
        })
    }

    /// `exp_alpha` end; ψ is frozen near 0 over `[0, cap_radius/2]` and
    /// blended back to the closed form by `cap_radius`.
    pub fn exp_alpha(alpha: f64, n: u32, cap_radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Range(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Self::half_line(Family::ExpAlpha { alpha, n }, cap_radius)
    }

    pub fn euclidean(n: u32) -> Result<Self> {
        Self::half_line(Family::Euclidean { n }, 0.0)
    }

    pub fn power(beta: f64, n: u32) -> Result<Self> {
        if !beta.is_finite() {
            return arg("beta must be finite");
        }
        Self::half_line(Family::Power { beta, n }, 0.0)
    }

    /// Constant area S ≡ 1.
    pub fn flat() -> Self {
        Self::half_line(Family::Power { beta: 0.0, n: 2 }, 0.0).unwrap()
    }

    pub fn hyperbolic(n: u32) -> Result<Self> {
        Self::half_line(Family::Hyperbolic { n }, 0.0)
    }

    pub fn rlogr() -> Self {
        Self::half_line(Family::RLogR, 0.0).unwrap()
    }

    pub fn table(table: TableProfile) -> Result<Self> {
        Self::half_line(Family::Table(table), 0.0)
    }

    /// Two-ended profile joining `plus` (for r ≥ cap) to `minus` (mirrored,
    /// for r ≤ -cap).
    pub fn full_line(plus: RadialProfile, minus: RadialProfile, cap_radius: f64) -> Result<Self> {
        if plus.domain != Domain::HalfLine || minus.domain != Domain::HalfLine {
            return arg("both ends of a full-line profile must be half-line profiles");
        }
        if !(cap_radius > 0.0 && cap_radius.is_finite()) {
            return arg("full-line profiles need a positive cap_radius for the join");
        }
        if plus.dimension() != minus.dimension() {
            return arg("both ends must share the dimension n");
        }
        if let Family::Table(t) = &minus.family {
            if t.nodes[0] > cap_radius {
                return arg("minus-end table must cover the join radius");
            }
        }
        Ok(RadialProfile {
            family: plus.family,
            domain: Domain::FullLine,
            cap_radius,
            minus: Some(Box::new(minus)),
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn cap_radius(&self) -> f64 {
        self.cap_radius
    }

    pub fn minus(&self) -> Option<&RadialProfile> {
        self.minus.as_deref()
    }

    pub fn dimension(&self) -> u32 {
        self.family.dimension()
    }

    /// Closed interval on which the profile is defined.
    pub fn support(&self) -> (f64, f64) {
        match self.domain {
            Domain::FullLine => {
                let lo = match &self.minus.as_ref().unwrap().family {
                    Family::Table(t) => -*t.nodes.last().unwrap(),
                    _ => f64::NEG_INFINITY,
                };
                let hi = match &self.family {
                    Family::Table(t) => *t.nodes.last().unwrap(),
                    _ => f64::INFINITY,
                };
                (lo, hi)
            }
            Domain::HalfLine => match &self.family {
                Family::Table(t) => (t.nodes[0], *t.nodes.last().unwrap()),
                _ => (0.0, f64::INFINITY),
            },
        }
    }

    /// Half-line evaluation including the cap treatment near 0.
    fn half_jet(&self, r: f64) -> LogJet {
        match &self.family {
            Family::ExpAlpha { .. } if self.cap_radius > 0.0 && r < self.cap_radius => {
                let b = self.cap_radius;
                let a = 0.5 * b;
                let end = self.family.raw_jet(b);
                let base = end.value - 0.5 * end.d1 * (b - a);
                if r <= a {
                    LogJet {
                        value: base,
                        d1: 0.0,
                        d2: 0.0,
                    }
                } else {
                    let (value, d1, d2) = hermite(r, a, b, (base, 0.0, 0.0), (end.value, end.d1, end.d2));
                    LogJet { value, d1, d2 }
                }
            }
            _ => self.family.raw_jet(r),
        }
    }

    /// Jet of `log S` at `r`.
    pub fn log_area_jet(&self, r: f64) -> LogJet {
        match self.domain {
            Domain::HalfLine => self.half_jet(r),
            Domain::FullLine => {
                let c = self.cap_radius;
                let minus = self.minus.as_ref().unwrap();
                if r >= c {
                    self.family.raw_jet(r)
                } else if r <= -c {
                    let j = minus.half_jet(-r);
                    LogJet {
                        value: j.value,
                        d1: -j.d1,
                        d2: j.d2,
                    }
                } else {
                    let p = self.family.raw_jet(c);
                    let m = minus.half_jet(c);
                    let (v, d, dd) = hermite(r, -c, c, (m.value, -m.d1, m.d2), (p.value, p.d1, p.d2));
                    LogJet {
                        value: v,
                        d1: d,
                        d2: dd,
                    }
                }
            }
        }
    }

    /// Area function S(r) = ψ(r)^(n-1).
    pub fn area(&self, r: f64) -> f64 {
        self.log_area_jet(r).value.exp()
    }

    /// `(S, S', S'')` at `r`.
    pub fn area_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let j = self.log_area_jet(r);
        let s = j.value.exp();
        (s, s * j.d1, s * (j.d2 + j.d1 * j.d1))
    }

    /// Warping function ψ(r) with its first two derivatives.
    pub fn psi_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let k = (self.dimension() - 1) as f64;
        let j = self.log_area_jet(r);
        let (v, d1, d2) = (j.value / k, j.d1 / k, j.d2 / k);
        let p = v.exp();
        (p, p * d1, p * (d2 + d1 * d1))
    }

    /// Parse the profile grammar, e.g. `family=exp_alpha alpha=0.5 n=2`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        ProfileSpec::parse(spec)?.build(None)
    }
}

/// Key/value form of a profile, as written in configuration files.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSpec {
    pub family: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<u32>,
    pub cap_radius: Option<f64>,
    pub path: Option<String>,
}

impl ProfileSpec {
    pub const KEYS: [&'static str; 6] = ["family", "alpha", "beta", "n", "cap_radius", "path"];

    pub fn new(family: &str) -> Self {
        ProfileSpec {
            family: family.to_string(),
            alpha: None,
            beta: None,
            n: None,
            cap_radius: None,
            path: None,
        }
    }

    /// Parse whitespace-separated `key=value` tokens.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut out = ProfileSpec::new("");
        for tok in spec.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("expected key=value, found `{tok}`")))?;
            out.set(k, v)?;
        }
        if out.family.is_empty() {
            return arg("profile needs a `family` key");
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Argument(format!("`{key}` expects a real number, found `{v}`")))
        };
        match key {
            "family" => self.family = value.to_string(),
            "alpha" => self.alpha = Some(real(value)?),
            "beta" => self.beta = Some(real(value)?),
            "n" => {
                self.n = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| Error::Argument(format!("`n` expects an integer, found `{value}`")))?,
                )
            }
            "cap_radius" => self.cap_radius = Some(real(value)?),
            "path" => self.path = Some(value.to_string()),
            _ => return arg(format!("unknown profile key `{key}`")),
        }
        Ok(())
    }

    /// Render back to the grammar, keys in canonical order.
    pub fn render(&self) -> String {
        let mut parts = vec![format!("family={}", self.family)];
        if let Some(a) = self.alpha {
            parts.push(format!("alpha={}", crate::fmt_real(a)));
        }
        if let Some(b) = self.beta {
            parts.push(format!("beta={}", crate::fmt_real(b)));
        }
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Some(c) = self.cap_radius {
            parts.push(format!("cap_radius={}", crate::fmt_real(c)));
        }
        if let Some(p) = &self.path {
            parts.push(format!("path={p}"));
        }
        parts.join(" ")
    }

    /// Build the profile; relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<RadialProfile> {
        let n = self.n.unwrap_or(2);
        if n < 2 {
            return Err(Error::Range(format!("n must be at least 2, got {n}")));
        }
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Argument(format!("family {} requires `{key}`", self.family)))
        };
        match self.family.as_str() {
            "exp_alpha" => RadialProfile::exp_alpha(
                need(self.alpha, "alpha")?,
                n,
                self.cap_radius.unwrap_or(DEFAULT_CAP_RADIUS),
            ),
            "euclidean" => RadialProfile::euclidean(n),
            "power" => RadialProfile::power(need(self.beta, "beta")?, n),
            "flat" => Ok(RadialProfile::flat()),
            "hyperbolic" => RadialProfile::hyperbolic(n),
            "rlogr" => {
                if n != 2 {
                    return Err(Error::Range("rlogr is two-dimensional".into()));
                }
                Ok(RadialProfile::rlogr())
            }
            "table" => {
                let p = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Argument("family table requires `path`".into()))?;
                let mut path = std::path::PathBuf::from(p);
                if path.is_relative() {
                    if let Some(dir) = base_dir {
                        path = dir.join(path);
                    }
                }
                RadialProfile::table(TableProfile::from_path(&path, n)?)
            }
            other => arg(format!("unknown family `{other}`")),
        }
    }
}

/// Default smoothing radius for exp_alpha ends.
pub const DEFAULT_CAP_RADIUS: f64 = 1.0;

impl fmt::Display for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::ExpAlpha { alpha, n } => write!(f, "exp_alpha(alpha={alpha}, n={n})")?,
            Family::Euclidean { n } => write!(f, "euclidean(n={n})")?,
            Family::Power { beta, n } => write!(f, "power(beta={beta}, n={n})")?,
            Family::Hyperbolic { n } => write!(f, "hyperbolic(n={n})")?,
            Family::RLogR => write!(f, "rlogr")?,
            Family::Table(t) => write!(f, "table({} nodes)", t.nodes.len())?,
        }
        if let Some(m) = &self.minus {
            write!(f, " | minus {m}")?;
        }
        Ok(())
    }
}
