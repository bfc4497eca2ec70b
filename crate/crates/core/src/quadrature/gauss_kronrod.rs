//! Globally adaptive 15-point Gauss–Kronrod integration over a set of
//! initial breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{IntegralResult, QuadValue};

// Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    at_floor: bool,
}

/// One GK15 panel: (Kronrod value, QUADPACK-style error, floor reached).
fn gk15<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> Panel<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = WGK[7] * fc.magnitude();
    let mut samples = [(V::default(), V::default()); 7];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
        *sample = (f1, f2);
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    for (j, (f1, f2)) in samples.iter().enumerate() {
        resasc += WGK[j] * ((*f1 - mean).magnitude() + (*f2 - mean).magnitude());
    }
    let abs_half = half.abs();
    let resabs = resabs * abs_half;
    let resasc = resasc * abs_half;
    let mut err = ((kronrod - gauss) * half).magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let mut at_floor = false;
    if resabs > f64::MIN_POSITIVE / ROUNDOFF_FACTOR {
        let floor = ROUNDOFF_FACTOR * resabs;
        if floor >= err {
            err = floor;
            at_floor = true;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: err,
        at_floor,
    }
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    error: f64,
    index: usize,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

fn totals<V: QuadValue>(panels: &[Panel<V>]) -> (V, f64) {
    let value = V::compensated_sum(panels.iter().map(|p| p.value));
    let error = panels.iter().map(|p| p.error).sum();
    (value, error)
}

/// Adaptive integration over `points` (sorted, at least two entries), refining
/// the panel with the largest error until the global error estimate meets
/// `max(rel_tol·|I|, abs_floor)` or `max_subdivisions` bisections are spent.
pub(crate) fn adaptive<V, F>(
    f: &F,
    points: &[f64],
    rel_tol: f64,
    abs_floor: f64,
    max_subdivisions: usize,
) -> IntegralResult<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    debug_assert!(points.len() >= 2);
    let mut panels: Vec<Panel<V>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * panels.len();
    if panels.is_empty() {
        return IntegralResult {
            value: V::default(),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
    }

    let target = |value: V| (rel_tol * value.magnitude()).max(abs_floor);
    let mut heap: BinaryHeap<HeapEntry> = panels
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.at_floor)
        .map(|(index, p)| HeapEntry {
            error: p.error,
            index,
        })
        .collect();

    let (mut value, mut error) = totals(&panels);
    let mut subdivisions = 0;
    while error > target(value) && subdivisions < max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let panel = panels[worst.index];
        let mid = 0.5 * (panel.a + panel.b);
        if !(mid > panel.a && mid < panel.b)
            || (panel.b - panel.a) <= 8.0 * f64::EPSILON * panel.a.abs().max(panel.b.abs())
        {
            continue;
        }
        let left = gk15(f, panel.a, mid);
        let right = gk15(f, mid, panel.b);
        evaluations += 30;
        subdivisions += 1;
        value = value - panel.value + left.value + right.value;
        error += left.error + right.error - panel.error;
        panels[worst.index] = left;
        panels.push(right);
        if !left.at_floor {
            heap.push(HeapEntry {
                error: left.error,
                index: worst.index,
            });
        }
        if !right.at_floor {
            heap.push(HeapEntry {
                error: right.error,
                index: panels.len() - 1,
            });
        }
        if subdivisions % 128 == 0 || error <= target(value) {
            (value, error) = totals(&panels);
        }
    }
    // Sum in abscissa order for reproducible compensated accumulation.
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let (value, error) = totals(&panels);
    IntegralResult {
        value,
        error_estimate: error,
        evaluations,
        converged: error <= target(value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let r: IntegralResult<f64> = adaptive(&|x: f64| x.powi(7) - 3.0 * x * x, &[0.0, 2.0], 1e-12, 0.0, 0);
        let exact = 2f64.powi(8) / 8.0 - 8.0;
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn peaked_integrand_converges() {
        let w = 1e-3;
        let r: IntegralResult<f64> = adaptive(&|x: f64| w / ((x - 0.3).powi(2) + w * w), &[0.0, 1.0], 1e-10, 0.0, 2000);
        let exact = (0.7 / w).atan() + (0.3 / w).atan();
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn complex_values() {
        let r: IntegralResult<Complex64> = adaptive(
            &|x: f64| Complex64::new(0.0, 3.0 * x).exp(),
            &[0.0, 1.0, 2.0],
            1e-12,
            0.0,
            500,
        );
        let exact = (Complex64::new(0.0, 6.0).exp() - 1.0) / Complex64::new(0.0, 3.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let r: IntegralResult<f64> = adaptive(&|_| 0.0, &[0.0, 1.0], 1e-6, 0.0, 100);
        assert!(r.converged);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.evaluations, 15);
    }
}
