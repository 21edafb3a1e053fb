//! Adaptive Gauss-Kronrod quadrature and fixed Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::real::{lit, Real};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_478,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Acceptance settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadSettings<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Maximum number of bisections applied to any initial panel.
    pub max_depth: u32,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    lo: T,
    hi: T,
    value: T,
    error: T,
    depth: u32,
    refinable: bool,
    at_roundoff: bool,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // refinable panels first, then by error
        self.refinable
            .cmp(&other.refinable)
            .then(self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal))
    }
}

fn kronrod21<T: Real, F: FnMut(T) -> T>(f: &mut F, lo: T, hi: T) -> (T, T, T) {
    let half = lit::<T>(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * lit(WGK[10]);
    let mut gauss = T::zero();
    let mut abs_sum = fc.abs() * lit(WGK[10]);
    for j in 0..10 {
        let dx = half_len * lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * lit(WGK[j]);
        abs_sum = abs_sum + (f1.abs() + f2.abs()) * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * lit(WG[j / 2]);
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).abs();
    (value, error, abs_sum * half_len.abs())
}

/// One 21-point Kronrod panel: value, |K21 - G10| and the integral of |f|.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PanelEstimate<T> {
    pub value: T,
    pub error: T,
    pub abs_value: T,
}

/// Kronrod panel for a vector-valued integrand; every component shares the 21 samples.
pub fn kronrod21_multi<T, F, const N: usize>(f: &mut F, lo: T, hi: T) -> [PanelEstimate<T>; N]
where
    T: Real,
    F: FnMut(T) -> [T; N],
{
    let half = lit::<T>(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let fc = f(center);
    let mut kronrod = [T::zero(); N];
    let mut gauss = [T::zero(); N];
    let mut abs_sum = [T::zero(); N];
    for i in 0..N {
        kronrod[i] = fc[i] * lit(WGK[10]);
        abs_sum[i] = fc[i].abs() * lit(WGK[10]);
    }
    for j in 0..10 {
        let dx = half_len * lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            kronrod[i] = kronrod[i] + (f1[i] + f2[i]) * lit(WGK[j]);
            abs_sum[i] = abs_sum[i] + (f1[i].abs() + f2[i].abs()) * lit(WGK[j]);
            if j % 2 == 1 {
                gauss[i] = gauss[i] + (f1[i] + f2[i]) * lit(WG[j / 2]);
            }
        }
    }
    let mut out = [PanelEstimate::default(); N];
    for i in 0..N {
        out[i] = PanelEstimate {
            value: kronrod[i] * half_len,
            error: ((kronrod[i] - gauss[i]) * half_len).abs(),
            abs_value: abs_sum[i] * half_len.abs(),
        };
    }
    out
}

/// Globally adaptive 21-point Gauss-Kronrod integration over `[points[0], points[last]]`.
///
/// Interior `points` seed the initial panels. The panel with the largest error is bisected
/// until the summed error is within `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T, F>(mut f: F, points: &[T], settings: &QuadSettings<T>) -> Result<Quadrature<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if points.len() < 2 {
        return Err(Error::domain("integrate", "need at least two break points"));
    }
    let eps = T::epsilon();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let make_panel = |f: &mut F, lo: T, hi: T, depth: u32| {
        let (value, error, abs_sum) = kronrod21(f, lo, hi);
        let roundoff = lit::<T>(50.0) * eps * abs_sum;
        let width_ok = (hi - lo).abs() > lit::<T>(100.0) * eps * (lo.abs() + hi.abs());
        Panel {
            lo,
            hi,
            value,
            error: error.max(roundoff),
            depth,
            refinable: error > roundoff && width_ok && depth < settings.max_depth,
            at_roundoff: error <= roundoff || !width_ok,
        }
    };
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        heap.push(make_panel(&mut f, w[0], w[1], 0));
        evaluations += 21;
    }
    loop {
        let (total, err, floor) = heap.iter().fold(
            (T::zero(), T::zero(), T::zero()),
            |(v, e, fl), p| {
                let fl = if p.at_roundoff { fl + p.error } else { fl };
                (v + p.value, e + p.error, fl)
            },
        );
        let tol = settings.abs_tol.max(settings.rel_tol * total.abs());
        if err <= tol || err <= lit::<T>(1.0001) * floor {
            return Ok(Quadrature {
                value: ordered_sum(&heap),
                error: err,
                evaluations,
            });
        }
        let worst = match heap.peek() {
            Some(p) if p.refinable => heap.pop().expect("peeked"),
            _ => {
                return Err(Error::Quadrature {
                    estimate: total.to_f64_lossy(),
                    error: err.to_f64_lossy(),
                })
            }
        };
        let mid = lit::<T>(0.5) * (worst.lo + worst.hi);
        heap.push(make_panel(&mut f, worst.lo, mid, worst.depth + 1));
        heap.push(make_panel(&mut f, mid, worst.hi, worst.depth + 1));
        evaluations += 42;
    }
}

// Sum panels left to right so the result does not depend on heap layout.
fn ordered_sum<T: Real>(heap: &BinaryHeap<Panel<T>>) -> T {
    let mut panels: Vec<_> = heap.iter().collect();
    panels.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
    crate::summation::compensated_sum(panels.iter().map(|p| p.value))
}

/// Fixed n-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Abscissae mapped onto `[lo, hi]`.
    pub fn abscissae<T: Real>(&self, lo: T, hi: T) -> impl Iterator<Item = T> + '_ {
        let c = lit::<T>(0.5) * (lo + hi);
        let h = lit::<T>(0.5) * (hi - lo);
        self.nodes.iter().map(move |&x| c + h * lit(x))
    }

    /// Weighted sum of precomputed samples (taken at [`Self::abscissae`]) on `[lo, hi]`.
    pub fn combine<T: Real>(&self, lo: T, hi: T, samples: &[T]) -> T {
        debug_assert_eq!(samples.len(), self.len());
        let h = lit::<T>(0.5) * (hi - lo);
        let s = crate::summation::compensated_sum(
            self.weights.iter().zip(samples).map(|(&w, &f)| lit::<T>(w) * f),
        );
        s * h
    }

    pub fn integrate<T: Real, F: FnMut(T) -> T>(&self, mut f: F, lo: T, hi: T) -> T {
        let samples: Vec<T> = self.abscissae(lo, hi).map(&mut f).collect();
        self.combine(lo, hi, &samples)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
