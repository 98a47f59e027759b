//! Fourier analysis on a finite abelian group and its dual.
//!
//! Conventions follow the usual pairing: a group declared compact carries
//! the Haar probability measure, a group declared discrete carries counting
//! measure, and the transform of a function always lands on the opposite
//! side with the opposite convention.
//!
//! The transform is computed as a tensor product of per-factor DFTs, each
//! a direct `O(m^2)` sum whose twiddles come from exact rational phases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{unit_root, Group};

/// Mass assigned to each point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Mass 1 per point (discrete side).
    Counting,
    /// Mass `1/|G|` per point (compact side).
    Probability,
}

impl Measure {
    pub fn dual(self) -> Self {
        match self {
            Measure::Counting => Measure::Probability,
            Measure::Probability => Measure::Counting,
        }
    }
}

/// Whether a function lives on `G` or on its dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Dual,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

/// Supported `L^p` exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    L4,
    LInf,
}

impl Norm {
    pub fn from_exponent(p: &str) -> Result<Self> {
        match p {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            "4" => Ok(Norm::L4),
            "inf" | "∞" => Ok(Norm::LInf),
            _ => Err(Error::UnsupportedNorm),
        }
    }
}

/// A dense complex-valued function on a group or its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    group: Group,
    side: Side,
    measure: Measure,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(group: Group, side: Side, measure: Measure, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::ShapeMismatch {
                expected: group.order(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "function value",
                value: f64::NAN,
                range: "finite complex numbers",
            });
        }
        Ok(GroupFunction {
            group,
            side,
            measure,
            values,
        })
    }

    pub fn from_real(group: Group, side: Side, measure: Measure, values: &[f64]) -> Result<Self> {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::new(group, side, measure, values)
    }

    pub fn zeros(group: Group, side: Side, measure: Measure) -> Self {
        let n = group.order();
        GroupFunction {
            group,
            side,
            measure,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// The 0/1 indicator of a set of canonical indices.
    pub fn indicator<I: IntoIterator<Item = usize>>(
        group: Group,
        side: Side,
        measure: Measure,
        support: I,
    ) -> Self {
        let mut f = Self::zeros(group, side, measure);
        for i in support {
            f.values[i] = Complex64::new(1.0, 0.0);
        }
        f
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn value(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    /// Mass of a single point under this function's measure.
    pub fn point_mass(&self) -> f64 {
        match self.measure {
            Measure::Counting => 1.0,
            Measure::Probability => 1.0 / self.group.order() as f64,
        }
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        GroupFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Pointwise product; both operands must share group, side and measure.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(GroupFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            ..self.clone()
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        if self.side != other.side || self.measure != other.measure {
            return Err(Error::ConventionMismatch);
        }
        Ok(())
    }

    /// True if every value is exactly 0 or 1.
    pub fn is_indicator(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.im == 0.0 && (v.re == 0.0 || v.re == 1.0))
    }
}

/// Applies the per-factor DFT along every axis in place.
fn tensor_dft(group: &Group, values: &mut [Complex64], inverse: bool) {
    let n = group.order();
    let mut scratch_in = Vec::new();
    let mut scratch_out = Vec::new();
    for (&m, &stride) in group.factors().iter().zip(group.strides()) {
        let m = m as usize;
        let roots: Vec<Complex64> = (0..m)
            .map(|k| {
                let r = unit_root(k as u64, m as u64);
                if inverse {
                    r
                } else {
                    r.conj()
                }
            })
            .collect();
        scratch_in.resize(m, Complex64::new(0.0, 0.0));
        scratch_out.resize(m, Complex64::new(0.0, 0.0));
        let block = m * stride;
        for base in (0..n).step_by(block) {
            for t in 0..stride {
                for j in 0..m {
                    scratch_in[j] = values[base + j * stride + t];
                }
                for k in 0..m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..m {
                        acc += scratch_in[j] * roots[(j * k) % m];
                    }
                    scratch_out[k] = acc;
                }
                for k in 0..m {
                    values[base + k * stride + t] = scratch_out[k];
                }
            }
        }
    }
}

/// `f^(gamma) = sum_x f(x) conj(gamma(x)) mass`, landing on the opposite side.
pub fn fourier_forward(f: &GroupFunction) -> GroupFunction {
    let mut values = f.values.clone();
    tensor_dft(&f.group, &mut values, false);
    let mass = f.point_mass();
    if mass != 1.0 {
        values.iter_mut().for_each(|v| *v *= mass);
    }
    GroupFunction {
        group: f.group.clone(),
        side: f.side.opposite(),
        measure: f.measure.dual(),
        values,
    }
}

/// Inversion formula: `f(x) = sum_gamma F(gamma) gamma(x) mass`.
///
/// `fourier_invert(fourier_forward(f)) == f` up to rounding.
pub fn fourier_invert(big_f: &GroupFunction) -> GroupFunction {
    let mut values = big_f.values.clone();
    tensor_dft(&big_f.group, &mut values, true);
    let mass = big_f.point_mass();
    if mass != 1.0 {
        values.iter_mut().for_each(|v| *v *= mass);
    }
    GroupFunction {
        group: big_f.group.clone(),
        side: big_f.side.opposite(),
        measure: big_f.measure.dual(),
        values,
    }
}

/// Exact integer convolution of two supports: `out[x] = #{(y, z) : y + z = x}`.
pub fn support_convolution(group: &Group, f: &[usize], g: &[usize]) -> Vec<u64> {
    let mut out = vec![0u64; group.order()];
    for &y in f {
        for &z in g {
            out[group.add_idx(y, z)] += 1;
        }
    }
    out
}

/// `f * g (x) = sum_y f(y) g(x - y) mass`.
///
/// Indicator inputs under counting measure take an exact integer path.
pub fn convolve(f: &GroupFunction, g: &GroupFunction) -> Result<GroupFunction> {
    f.check_compatible(g)?;
    let group = &f.group;
    if f.measure == Measure::Counting && f.is_indicator() && g.is_indicator() {
        let sf: Vec<usize> = support(f);
        let sg: Vec<usize> = support(g);
        let counts = support_convolution(group, &sf, &sg);
        let values = counts.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
        return Ok(GroupFunction {
            values,
            ..f.clone()
        });
    }
    let mass = f.point_mass();
    let mut out = vec![Complex64::new(0.0, 0.0); group.order()];
    for (y, &fy) in f.values.iter().enumerate() {
        if fy == Complex64::new(0.0, 0.0) {
            continue;
        }
        let shift = group.translation(y);
        for (z, &target) in shift.iter().enumerate() {
            out[target] += fy * g.values[z];
        }
    }
    if mass != 1.0 {
        out.iter_mut().for_each(|v| *v *= mass);
    }
    Ok(GroupFunction {
        values: out,
        ..f.clone()
    })
}

fn support(f: &GroupFunction) -> Vec<usize> {
    f.values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.re != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// `(sum |f|^p mass)^(1/p)`, or the sup norm.
pub fn lp_norm(f: &GroupFunction, p: Norm) -> f64 {
    let mass = f.point_mass();
    match p {
        Norm::L1 => f.values.iter().map(|v| v.norm()).sum::<f64>() * mass,
        Norm::L2 => (f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * mass).sqrt(),
        Norm::L4 => (f.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * mass).powf(0.25),
        Norm::LInf => f.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
    }
}
