//! Dormand–Prince 8(5,3) with 7th-order dense output.

use crate::error::{DynamicsError, Result};

const N_STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

const C: [f64; 16] = [
    0.0,
    0.052_600_151_958_767_73,
    0.078_900_227_938_151_6,
    0.118_350_341_907_227_4,
    0.281_649_658_092_772_6,
    0.333_333_333_333_333_3,
    0.25,
    0.307_692_307_692_307_7,
    0.651_282_051_282_051_3,
    0.6,
    0.857_142_857_142_857_1,
    1.0,
    1.0,
    0.1,
    0.2,
    0.777_777_777_777_777_8,
];

const B: [f64; 12] = [
    0.054_293_734_116_568_765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450_312_892_752_409,
    1.891_517_899_314_500_3,
    -5.801_203_960_010_585,
    0.311_164_366_957_819_9,
    -0.152_160_949_662_516_1,
    0.201_365_400_804_030_34,
    0.044_710_615_727_772_59,
];

const E3: [f64; 13] = [
    -0.189_800_754_072_407_62,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450_312_892_752_409,
    1.891_517_899_314_500_3,
    -5.801_203_960_010_585,
    -0.422_682_321_323_791_9,
    -0.152_160_949_662_516_1,
    0.201_365_400_804_030_34,
    0.022_651_792_198_360_82,
    0.0,
];

const E5: [f64; 13] = [
    0.013_120_044_994_194_88,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.225_156_446_376_204_4,
    -0.495_758_949_657_250_2,
    1.664_377_182_454_986_4,
    -0.350_328_848_749_973_66,
    0.334_179_118_713_017_5,
    0.081_923_206_485_115_71,
    -0.022_355_307_863_886_294,
    0.0,
];

/// Nonzero entries `(column, value)` of the stage matrix, rows 1..=15.
const A: [&[(usize, f64)]; 16] = [
    &[],
    &[(0, 0.052_600_151_958_767_73)],
    &[(0, 0.019_725_056_984_537_9), (1, 0.059_175_170_953_613_7)],
    &[(0, 0.029_587_585_476_806_85), (2, 0.088_762_756_430_420_54)],
    &[
        (0, 0.241_365_134_159_266_7),
        (2, -0.884_549_479_328_286_1),
        (3, 0.924_834_003_261_792),
    ],
    &[
        (0, 0.037_037_037_037_037_035),
        (3, 0.170_828_608_729_473_86),
        (4, 0.125_467_687_566_822_42),
    ],
    &[
        (0, 0.037_109_375),
        (3, 0.170_252_211_019_544_05),
        (4, 0.060_216_538_980_455_96),
        (5, -0.017_578_125),
    ],
    &[
        (0, 0.037_092_000_118_504_79),
        (3, 0.170_383_925_712_239_98),
        (4, 0.107_262_030_446_373_28),
        (5, -0.015_319_437_748_624_402),
        (6, 0.008_273_789_163_814_023),
    ],
    &[
        (0, 0.624_110_958_716_075_7),
        (3, -3.360_892_629_446_941_4),
        (4, -0.868_219_346_841_726),
        (5, 27.592_099_699_446_71),
        (6, 20.154_067_550_477_894),
        (7, -43.489_884_181_069_96),
    ],
    &[
        (0, 0.477_662_536_438_264_34),
        (3, -2.488_114_619_971_667_7),
        (4, -0.590_290_826_836_843),
        (5, 21.230_051_448_181_193),
        (6, 15.279_233_632_882_423),
        (7, -33.288_210_968_984_86),
        (8, -0.020_331_201_708_508_627),
    ],
    &[
        (0, -0.937_142_430_085_987_3),
        (3, 5.186_372_428_844_064),
        (4, 1.091_437_348_996_729_5),
        (5, -8.149_787_010_746_927),
        (6, -18.520_065_659_996_96),
        (7, 22.739_487_099_350_505),
        (8, 2.493_605_552_679_652_3),
        (9, -3.046_764_471_898_219_6),
    ],
    &[
        (0, 2.273_310_147_516_538),
        (3, -10.534_495_466_737_25),
        (4, -2.000_872_058_224_862_5),
        (5, -17.958_931_863_118_8),
        (6, 27.948_884_529_419_96),
        (7, -2.858_998_277_135_023_5),
        (8, -8.872_856_933_530_63),
        (9, 12.360_567_175_794_303),
        (10, 0.643_392_746_015_763_6),
    ],
    &[],
    &[
        (0, 0.056_167_502_283_047_954),
        (6, 0.253_500_210_216_624_83),
        (7, -0.246_239_037_470_802_5),
        (8, -0.124_191_423_263_816_37),
        (9, 0.153_291_798_278_765_68),
        (10, 0.008_201_052_295_634_69),
        (11, 0.007_567_897_660_545_699),
        (12, -0.008_298),
    ],
    &[
        (0, 0.031_834_648_163_502_14),
        (5, 0.028_300_909_672_366_776),
        (6, 0.053_541_988_307_438_566),
        (7, -0.054_923_748_571_390_99),
        (10, -0.000_108_347_328_697_249_32),
        (11, 0.000_382_571_090_835_658_4),
        (12, -0.000_340_465_008_687_404_56),
        (13, 0.141_312_443_674_632_5),
    ],
    &[
        (0, -0.428_896_301_583_791_94),
        (5, -4.697_621_415_361_164),
        (6, 7.683_421_196_062_599),
        (7, 4.068_989_818_397_11),
        (8, 0.356_727_187_455_281_1),
        (12, -0.001_399_024_165_159_014_5),
        (13, 2.947_514_789_152_772_4),
        (14, -9.150_958_472_179_87),
    ],
];

/// Dense-output weights for stages 0 and 5..=15 (other columns are zero).
const D_COLS: [usize; 12] = [0, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15];
const D: [[f64; 12]; 4] = [
    [
        -8.428_938_276_109_013,
        0.566_714_953_519_377_7,
        -3.068_949_945_949_891_7,
        2.384_667_656_512_07,
        2.117_034_582_445_028,
        -0.871_391_583_777_973,
        2.240_437_430_260_788_3,
        0.631_578_778_769_468_8,
        -0.088_990_336_451_333_31,
        18.148_505_520_854_727,
        -9.194_632_392_478_356,
        -4.436_036_387_594_894,
    ],
    [
        10.427_508_642_579_134,
        242.283_491_775_258_17,
        165.200_451_717_270_28,
        -374.546_754_722_690_2,
        -22.113_666_853_125_306,
        7.733_432_668_472_264,
        -30.674_084_731_089_398,
        -9.332_130_526_430_229,
        15.697_238_121_770_845,
        -31.139_403_219_565_178,
        -9.352_924_358_844_48,
        35.816_841_486_394_08,
    ],
    [
        19.985_053_242_002_433,
        -387.037_308_749_351_8,
        -189.178_138_195_167_58,
        527.808_159_205_423_6,
        -11.573_902_539_959_63,
        6.881_232_694_696_3,
        -1.000_605_096_691_083_8,
        0.777_713_779_805_344_3,
        -2.778_205_752_353_508,
        -60.196_695_231_264_12,
        84.320_405_506_677_16,
        11.992_291_136_182_79,
    ],
    [
        -25.693_933_462_703_75,
        -154.189_748_690_236_43,
        -231.529_379_176_045_5,
        357.639_117_910_614_1,
        93.405_324_183_624_32,
        -37.458_323_136_451_63,
        104.099_649_508_962_3,
        29.840_293_426_660_5,
        -43.533_456_590_011_14,
        96.324_553_959_188_28,
        -39.177_261_675_615_44,
        -149.726_836_257_985_64,
    ],
];

/// Right-hand side of an autonomous or time-dependent system in `D` dimensions.
pub trait OdeSystem<const D: usize> {
    fn rhs(&self, t: f64, y: &[f64; D], dy: &mut [f64; D]);
}

#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub max_step: f64,
}

impl Default for Dop853 {
    fn default() -> Self {
        Dop853 {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 1_000_000,
            max_step: f64::INFINITY,
        }
    }
}

impl Dop853 {
    pub fn with_tol(tol: f64) -> Self {
        Dop853 {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub stopped: bool,
    pub stats: Stats,
}

/// Accepted step handed to the observer.
pub struct StepView<'a, S, const N: usize> {
    sys: &'a S,
    pub t_old: f64,
    pub t: f64,
    pub y_old: [f64; N],
    pub y: [f64; N],
    k: &'a [[f64; N]; 16],
}

impl<'a, S: OdeSystem<N>, const N: usize> StepView<'a, S, N> {
    pub fn h(&self) -> f64 {
        self.t - self.t_old
    }

    /// Seventh-order interpolant over this step (three extra evaluations).
    pub fn dense(&self) -> DenseSegment<N> {
        let h = self.h();
        let mut k = *self.k;
        for s in 13..16 {
            let mut ys = self.y_old;
            for &(j, a) in A[s] {
                for i in 0..N {
                    ys[i] += h * a * k[j][i];
                }
            }
            let mut out = [0.0; N];
            self.sys.rhs(self.t_old + C[s] * h, &ys, &mut out);
            k[s] = out;
        }
        let mut f = [[0.0; N]; 7];
        for i in 0..N {
            let dy = self.y[i] - self.y_old[i];
            f[0][i] = dy;
            f[1][i] = h * k[0][i] - dy;
            f[2][i] = 2.0 * dy - h * (k[12][i] + k[0][i]);
            for r in 0..4 {
                let mut acc = 0.0;
                for (c, &col) in D_COLS.iter().enumerate() {
                    acc += D[r][c] * k[col][i];
                }
                f[3 + r][i] = h * acc;
            }
        }
        DenseSegment {
            t_old: self.t_old,
            h,
            y_old: self.y_old,
            f,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t_old: f64,
    pub h: f64,
    y_old: [f64; N],
    f: [[f64; N]; 7],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t_new(&self) -> f64 {
        self.t_old + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let x = (t - self.t_old) / self.h;
        let mut y = [0.0; N];
        for (i, row) in self.f.iter().rev().enumerate() {
            let w = if i % 2 == 0 { x } else { 1.0 - x };
            for j in 0..N {
                y[j] = (y[j] + row[j]) * w;
            }
        }
        for j in 0..N {
            y[j] += self.y_old[j];
        }
        y
    }
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / n as f64).sqrt()
}

impl Dop853 {
    fn initial_step<S: OdeSystem<N>, const N: usize>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64; N],
        f0: &[f64; N],
        dir: f64,
    ) -> f64 {
        let scale: Vec<f64> = y0.iter().map(|y| self.atol + y.abs() * self.rtol).collect();
        let d0 = rms(y0.iter().zip(&scale).map(|(y, s)| y / s), N);
        let d1 = rms(f0.iter().zip(&scale).map(|(f, s)| f / s), N);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let mut y1 = *y0;
        for i in 0..N {
            y1[i] += h0 * dir * f0[i];
        }
        let mut f1 = [0.0; N];
        sys.rhs(t0 + h0 * dir, &y1, &mut f1);
        let d2 = rms(
            f1.iter().zip(f0).zip(&scale).map(|((a, b), s)| (a - b) / s),
            N,
        ) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// Integrates from `t0` to `t_end` (either direction), calling `observe`
    /// after every accepted step.
    pub fn solve<S, const N: usize>(
        &self,
        sys: &S,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observe: impl FnMut(&StepView<'_, S, N>) -> Control,
    ) -> Result<Outcome<N>>
    where
        S: OdeSystem<N>,
    {
        let mut stats = Stats::default();
        if t_end == t0 {
            return Ok(Outcome {
                t: t0,
                y: y0,
                stopped: false,
                stats,
            });
        }
        let dir = (t_end - t0).signum();
        let mut k = [[0.0; N]; 16];
        sys.rhs(t0, &y0, &mut k[0]);
        stats.evaluations += 1;
        let mut h_abs = self.initial_step(sys, t0, &y0, &k[0], dir);
        stats.evaluations += 1;
        let mut t = t0;
        let mut y = y0;

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(DynamicsError::MaxSteps { t });
            }
            let min_step = 10.0 * ((t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE));
            let mut rejected = false;
            let (t_new, y_new, f_new) = loop {
                if h_abs < min_step {
                    return Err(DynamicsError::StepUnderflow { t, h: h_abs });
                }
                let mut h = h_abs * dir;
                let mut t_new = t + h;
                if dir * (t_new - t_end) > 0.0 {
                    t_new = t_end;
                }
                h = t_new - t;
                h_abs = h.abs();

                for s in 1..N_STAGES {
                    let mut ys = y;
                    for &(j, a) in A[s] {
                        for i in 0..N {
                            ys[i] += h * a * k[j][i];
                        }
                    }
                    let mut out = [0.0; N];
                    sys.rhs(t + C[s] * h, &ys, &mut out);
                    k[s] = out;
                }
                let mut y_new = y;
                for j in 0..N_STAGES {
                    if B[j] != 0.0 {
                        for i in 0..N {
                            y_new[i] += h * B[j] * k[j][i];
                        }
                    }
                }
                let mut f_new = [0.0; N];
                sys.rhs(t + h, &y_new, &mut f_new);
                k[12] = f_new;
                stats.evaluations += N_STAGES;

                let mut e5 = 0.0;
                let mut e3 = 0.0;
                for i in 0..N {
                    let sc = self.atol + y[i].abs().max(y_new[i].abs()) * self.rtol;
                    let mut a5 = 0.0;
                    let mut a3 = 0.0;
                    for j in 0..13 {
                        a5 += E5[j] * k[j][i];
                        a3 += E3[j] * k[j][i];
                    }
                    e5 += (a5 / sc).powi(2);
                    e3 += (a3 / sc).powi(2);
                }
                let err = if e5 == 0.0 && e3 == 0.0 {
                    0.0
                } else {
                    h_abs * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
                };
                if err < 1.0 {
                    let mut factor = if err == 0.0 {
                        MAX_FACTOR
                    } else {
                        MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                    };
                    if rejected {
                        factor = factor.min(1.0);
                    }
                    h_abs = (h_abs * factor).min(self.max_step);
                    break (t_new, y_new, f_new);
                }
                h_abs *= MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
                rejected = true;
                stats.rejected += 1;
            };
            stats.accepted += 1;
            let view = StepView {
                sys,
                t_old: t,
                t: t_new,
                y_old: y,
                y: y_new,
                k: &k,
            };
            let control = observe(&view);
            t = t_new;
            y = y_new;
            k[0] = f_new;
            if control == Control::Stop {
                return Ok(Outcome {
                    t,
                    y,
                    stopped: true,
                    stats,
                });
            }
            if t == t_end {
                return Ok(Outcome {
                    t,
                    y,
                    stopped: false,
                    stats,
                });
            }
        }
    }

    /// One unchecked step of size `h`, used to polish event locations.
    pub fn single_step<S: OdeSystem<N>, const N: usize>(
        sys: &S,
        t: f64,
        y: &[f64; N],
        h: f64,
    ) -> [f64; N] {
        let mut k = [[0.0; N]; N_STAGES];
        sys.rhs(t, y, &mut k[0]);
        for s in 1..N_STAGES {
            let mut ys = *y;
            for &(j, a) in A[s] {
                for i in 0..N {
                    ys[i] += h * a * k[j][i];
                }
            }
            let mut out = [0.0; N];
            sys.rhs(t + C[s] * h, &ys, &mut out);
            k[s] = out;
        }
        let mut y_new = *y;
        for j in 0..N_STAGES {
            for i in 0..N {
                y_new[i] += h * B[j] * k[j][i];
            }
        }
        y_new
    }
}
