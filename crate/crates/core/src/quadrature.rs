//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands on finite intervals.
//!
//! All components share the same nodes, so linear relations between
//! components (for example a set of probabilities that sum to a known
//! total) hold for the computed integrals up to rounding.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    fn allowed(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Panel<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: [f64; K],
}

fn kronrod<const K: usize, F: Fn(f64) -> [f64; K]>(f: &F, a: f64, b: f64) -> Panel<K> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut k15 = [0.0; K];
    let mut g7 = [0.0; K];
    let fc = f(center);
    for c in 0..K {
        k15[c] = WGK[7] * fc[c];
        g7[c] = WG[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..K {
            let s = f1[c] + f2[c];
            k15[c] += WGK[j] * s;
            if j % 2 == 1 {
                g7[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for c in 0..K {
        value[c] = k15[c] * half;
        error[c] = ((k15[c] - g7[c]) * half).abs();
    }
    Panel { a, b, value, error }
}

/// Integrates `f` over `[points[0], points.last()]`, starting from the
/// panels between consecutive `points` and bisecting the worst panel until
/// every component meets `tol` or `max_panels` is reached.
pub fn integrate<const K: usize, F>(
    f: F,
    points: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Result<Integral<K>>
where
    F: Fn(f64) -> [f64; K],
{
    if points.len() < 2 {
        return Ok(Integral {
            value: [0.0; K],
            error: [0.0; K],
            panels: 0,
        });
    }
    let mut panels: Vec<Panel<K>> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();

    loop {
        let mut value = [0.0; K];
        let mut error = [0.0; K];
        for p in &panels {
            for c in 0..K {
                value[c] += p.value[c];
                error[c] += p.error[c];
            }
        }
        let allowed: Vec<f64> = value.iter().map(|&v| tol.allowed(v)).collect();
        if (0..K).all(|c| error[c] <= allowed[c]) {
            return Ok(Integral {
                value,
                error,
                panels: panels.len(),
            });
        }
        let (worst, score) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let s = (0..K)
                    .map(|c| p.error[c] / allowed[c].max(f64::MIN_POSITIVE))
                    .fold(0.0, f64::max);
                (i, s)
            })
            .fold(
                (0, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if panels.len() >= max_panels || score <= 0.0 || !(mid > p.a && mid < p.b) {
            let (c, achieved) = (0..K).map(|c| (c, error[c])).fold((0, 0.0), |best, cur| {
                if cur.1 / allowed[cur.0] > best.1 / allowed[best.0] {
                    cur
                } else {
                    best
                }
            });
            return Err(Error::QuadratureNotConverged {
                achieved,
                requested: allowed[c],
            });
        }
        panels[worst] = kronrod(&f, p.a, mid);
        panels.push(kronrod(&f, mid, p.b));
    }
}
