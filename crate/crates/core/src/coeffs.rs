//! Coefficient table of the fifth-order equation `Σ_ν f_ν(I) Q^(ν)(I) = 0`
//! for the phase-averaged Husimi function, its polynomials and their roots.
//!
//! Polynomials, in ascending powers of `I`:
//!
//! ```text
//! f5 = b02 I² + b03 I³          f4 = b11 I + b12 I² + b13 I³
//! f3 = b20 + b21 I + b22 I² + b23 I³
//! f2 = b30 + b31 I + b32 I² + b33 I³
//! f1 = b40 + b41 I + b42 I²     f0 = b50 + b51 I + b52 I²
//! ```

use crate::error::{Error, Result};
use crate::numerics::{horner, real_roots, PolyRoots};
use crate::params::ReducedParams;
use serde::Serialize;

/// Identifies one entry of [`CoeffTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CoeffId {
    B02,
    B03,
    B11,
    B12,
    B13,
    B20,
    B21,
    B22,
    B23,
    B30,
    B31,
    B32,
    B33,
    B40,
    B41,
    B42,
    B50,
    B51,
    B52,
}

impl CoeffId {
    pub const ALL: [CoeffId; 19] = [
        CoeffId::B02,
        CoeffId::B03,
        CoeffId::B11,
        CoeffId::B12,
        CoeffId::B13,
        CoeffId::B20,
        CoeffId::B21,
        CoeffId::B22,
        CoeffId::B23,
        CoeffId::B30,
        CoeffId::B31,
        CoeffId::B32,
        CoeffId::B33,
        CoeffId::B40,
        CoeffId::B41,
        CoeffId::B42,
        CoeffId::B50,
        CoeffId::B51,
        CoeffId::B52,
    ];

    /// Lower-case name such as `"b02"`.
    pub fn name(self) -> &'static str {
        match self {
            CoeffId::B02 => "b02",
            CoeffId::B03 => "b03",
            CoeffId::B11 => "b11",
            CoeffId::B12 => "b12",
            CoeffId::B13 => "b13",
            CoeffId::B20 => "b20",
            CoeffId::B21 => "b21",
            CoeffId::B22 => "b22",
            CoeffId::B23 => "b23",
            CoeffId::B30 => "b30",
            CoeffId::B31 => "b31",
            CoeffId::B32 => "b32",
            CoeffId::B33 => "b33",
            CoeffId::B40 => "b40",
            CoeffId::B41 => "b41",
            CoeffId::B42 => "b42",
            CoeffId::B50 => "b50",
            CoeffId::B51 => "b51",
            CoeffId::B52 => "b52",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name)
    }
}

impl std::fmt::Display for CoeffId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffTable {
    pub b02: f64,
    pub b03: f64,
    pub b11: f64,
    pub b12: f64,
    pub b13: f64,
    pub b20: f64,
    pub b21: f64,
    pub b22: f64,
    pub b23: f64,
    pub b30: f64,
    pub b31: f64,
    pub b32: f64,
    pub b33: f64,
    pub b40: f64,
    pub b41: f64,
    pub b42: f64,
    pub b50: f64,
    pub b51: f64,
    pub b52: f64,
}

impl CoeffTable {
    pub fn get(&self, id: CoeffId) -> f64 {
        *self.slot(id)
    }

    pub fn set(&mut self, id: CoeffId, value: f64) {
        *self.slot_mut(id) = value;
    }

    /// Copy with one entry multiplied by `factor`.
    pub fn perturbed(&self, id: CoeffId, factor: f64) -> Self {
        let mut t = *self;
        t.set(id, self.get(id) * factor);
        t
    }

    fn slot(&self, id: CoeffId) -> &f64 {
        match id {
            CoeffId::B02 => &self.b02,
            CoeffId::B03 => &self.b03,
            CoeffId::B11 => &self.b11,
            CoeffId::B12 => &self.b12,
            CoeffId::B13 => &self.b13,
            CoeffId::B20 => &self.b20,
            CoeffId::B21 => &self.b21,
            CoeffId::B22 => &self.b22,
            CoeffId::B23 => &self.b23,
            CoeffId::B30 => &self.b30,
            CoeffId::B31 => &self.b31,
            CoeffId::B32 => &self.b32,
            CoeffId::B33 => &self.b33,
            CoeffId::B40 => &self.b40,
            CoeffId::B41 => &self.b41,
            CoeffId::B42 => &self.b42,
            CoeffId::B50 => &self.b50,
            CoeffId::B51 => &self.b51,
            CoeffId::B52 => &self.b52,
        }
    }

    fn slot_mut(&mut self, id: CoeffId) -> &mut f64 {
        match id {
            CoeffId::B02 => &mut self.b02,
            CoeffId::B03 => &mut self.b03,
            CoeffId::B11 => &mut self.b11,
            CoeffId::B12 => &mut self.b12,
            CoeffId::B13 => &mut self.b13,
            CoeffId::B20 => &mut self.b20,
            CoeffId::B21 => &mut self.b21,
            CoeffId::B22 => &mut self.b22,
            CoeffId::B23 => &mut self.b23,
            CoeffId::B30 => &mut self.b30,
            CoeffId::B31 => &mut self.b31,
            CoeffId::B32 => &mut self.b32,
            CoeffId::B33 => &mut self.b33,
            CoeffId::B40 => &mut self.b40,
            CoeffId::B41 => &mut self.b41,
            CoeffId::B42 => &mut self.b42,
            CoeffId::B50 => &mut self.b50,
            CoeffId::B51 => &mut self.b51,
            CoeffId::B52 => &mut self.b52,
        }
    }
}

pub fn coefficients(params: &ReducedParams) -> CoeffTable {
    let (w, e, t) = (params.omega(), params.eta(), params.tau());
    let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
    let (e2, e3) = (e * e, e * e * e);
    let (w2, w3) = (w * w, w * w * w);
    let sum = w + e + t;
    CoeffTable {
        b02: -2.0 * t3 * sum,
        b03: 4.0 * t4,
        b11: -12.0 * t3 * sum,
        b12: 2.0 * t3 * (7.0 * t - 3.0 * w - 3.0 * e),
        b13: 12.0 * t4,
        b20: -12.0 * t3 * sum,
        b21: -t2 * (26.0 * e * t - 3.0 * e2 + 21.0 * t2 - 6.0 * e * w + 26.0 * t * w - 3.0 * w2),
        b22: 12.0 * t3 * (4.0 * t - w - e),
        b23: 12.0 * t4,
        b30: -2.0 * t2 * (8.0 * e * t - 3.0 * e2 + 15.0 * t2 - 6.0 * e * w + 8.0 * t * w - 3.0 * w2),
        b31: -2.0
            * t
            * (e + t - 3.0 * e2 * t + 13.0 * e * t2 + w - 6.0 * e * t * w + 13.0 * t2 * w
                - 3.0 * t * w2),
        b32: 2.0 * t2 * (2.0 - 7.0 * e * t + 23.0 * t2 - 7.0 * t * w),
        b33: 4.0 * t4,
        b40: -e3 * t + e2 * (8.0 * t2 - 1.0 - 3.0 * t * w)
            - t * (3.0 * t + 24.0 * t3 + 3.0 * w - t2 * w - 8.0 * t * w2 + w3)
            + e * (t3 - w + 16.0 * t2 * w - t * (4.0 + 3.0 * w2)),
        b41: t * (5.0 * e2 * t + 15.0 * t3 - 4.0 * w - 20.0 * t2 * w
            - 2.0 * e * (1.0 + 10.0 * t2 - 5.0 * t * w)
            + t * (5.0 * w2 - 2.0)),
        b42: 2.0 * t2 * (4.0 - 3.0 * e * t + 7.0 * t2 - 3.0 * t * w),
        b50: -e3 * t - 6.0 * t4 + 5.0 * t3 * w + w2 - t * w3
            + e2 * (2.0 * t2 - 1.0 - 3.0 * t * w)
            + e * t * (5.0 * t2 - 4.0 + 4.0 * t * w - 3.0 * w2)
            + t2 * (2.0 * w2 - 3.0),
        b51: 2.0 * t * (e2 * t + 3.0 * t3 - 2.0 * w - 4.0 * t2 * w + t * w2 + 2.0 * e * t * (w - 2.0 * t)),
        b52: 4.0 * t2,
    }
}

/// The six polynomials `f_0 … f_5`, each stored as four ascending
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolySet {
    pub f: [[f64; 4]; 6],
}

impl PolySet {
    /// `f_ν(I)`.
    pub fn eval(&self, nu: usize, intensity: f64) -> f64 {
        horner(&self.f[nu], intensity)
    }

    /// Nominal degree of `f_ν`.
    pub fn degree(nu: usize) -> usize {
        match nu {
            0 | 1 => 2,
            2..=5 => 3,
            _ => panic!("no polynomial f_{nu}"),
        }
    }
}

pub fn polynomials(t: &CoeffTable) -> PolySet {
    PolySet {
        f: [
            [t.b50, t.b51, t.b52, 0.0],
            [t.b40, t.b41, t.b42, 0.0],
            [t.b30, t.b31, t.b32, t.b33],
            [t.b20, t.b21, t.b22, t.b23],
            [0.0, t.b11, t.b12, t.b13],
            [0.0, 0.0, t.b02, t.b03],
        ],
    }
}

/// Roots of every polynomial of the set, plus the characteristic cubic of
/// the small-intensity equation `b20 Q''' + b30 Q'' + b40 Q' + b50 Q = 0`.
///
/// Pair labels follow sorted order: `I_-k` is the smaller root of a real
/// pair and `I_+k` the larger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootCatalog {
    /// `f_0`: `I_-5`, `I_+5`.
    pub f0: PolyRoots,
    /// `f_1`: `I_-4`, `I_+4`.
    pub f1: PolyRoots,
    /// `f_2`: `I_31`, `I_32`, `I_33`.
    pub f2: PolyRoots,
    /// `f_3`: `I_21`, `I_22`, `I_23`.
    pub f3: PolyRoots,
    /// `f_4 / I`: `I_11`, `I_12`.
    pub f4: PolyRoots,
    /// Non-zero root of `f_5`.
    pub i_00: f64,
    /// Roots `s` of `b50 + b40 s + b30 s² + b20 s³`.
    pub thermal_cubic: PolyRoots,
}

/// Decay constant of the thermal profile `Q_1 ∝ e^{sI} = e^{I/a}`.
///
/// The cubic is the characteristic polynomial for `Q = e^{sI}`, so its root is
/// the rate `s` and the displayed constant is `a = 1/s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalRoot {
    pub rate: f64,
    pub a: f64,
}

fn pair(roots: &PolyRoots) -> Option<(f64, f64)> {
    match roots.real.as_slice() {
        [lo, hi] => Some((*lo, *hi)),
        _ => None,
    }
}

impl RootCatalog {
    pub fn i_minus4(&self) -> Option<f64> {
        pair(&self.f1).map(|p| p.0)
    }

    pub fn i_plus4(&self) -> Option<f64> {
        pair(&self.f1).map(|p| p.1)
    }

    pub fn i_minus5(&self) -> Option<f64> {
        pair(&self.f0).map(|p| p.0)
    }

    pub fn i_plus5(&self) -> Option<f64> {
        pair(&self.f0).map(|p| p.1)
    }

    /// The unique negative real root of the thermal cubic.
    pub fn thermal_root(&self) -> Result<ThermalRoot> {
        let negative: Vec<f64> = self
            .thermal_cubic
            .real
            .iter()
            .copied()
            .filter(|&s| s < 0.0)
            .collect();
        match negative.as_slice() {
            [s] => Ok(ThermalRoot { rate: *s, a: 1.0 / s }),
            [] => Err(Error::RootSelection("thermal cubic has no negative real root".into())),
            many => Err(Error::RootSelection(format!(
                "thermal cubic has {} negative real roots {:?}",
                many.len(),
                many
            ))),
        }
    }

    /// Rebuilds every polynomial from its leading coefficient and roots.
    pub fn factored(&self, t: &CoeffTable) -> PolySet {
        let mut f4 = expand(t.b13, &self.f4);
        f4.insert(0, 0.0);
        let f5 = expand(t.b03, &PolyRoots {
            real: vec![0.0, 0.0, self.i_00],
            complex: vec![],
        });
        let pad = |v: Vec<f64>| {
            let mut out = [0.0; 4];
            out[..v.len()].copy_from_slice(&v);
            out
        };
        PolySet {
            f: [
                pad(expand(t.b52, &self.f0)),
                pad(expand(t.b42, &self.f1)),
                pad(expand(t.b33, &self.f2)),
                pad(expand(t.b23, &self.f3)),
                pad(f4),
                pad(f5),
            ],
        }
    }
}

/// Ascending coefficients of `lead · Π (I − root)`.
fn expand(lead: f64, roots: &PolyRoots) -> Vec<f64> {
    let mut p = vec![lead];
    let mut mul = |factor: &[f64]| {
        let mut out = vec![0.0; p.len() + factor.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        p = out;
    };
    for &x in &roots.real {
        mul(&[-x, 1.0]);
    }
    for z in &roots.complex {
        mul(&[z.re * z.re + z.im * z.im, -2.0 * z.re, 1.0]);
    }
    p
}

pub fn roots(polys: &PolySet, table: &CoeffTable) -> Result<RootCatalog> {
    if table.b42 == 0.0 {
        return Err(Error::Degenerate("b42 = 0"));
    }
    if table.b52 == 0.0 {
        return Err(Error::Degenerate("b52 = 0"));
    }
    if table.b03 == 0.0 || table.b13 == 0.0 || table.b23 == 0.0 || table.b33 == 0.0 {
        return Err(Error::Degenerate("vanishing leading coefficient"));
    }
    let solve = |c: &[f64]| real_roots(c).map_err(Error::Numerical);
    Ok(RootCatalog {
        f0: solve(&polys.f[0][..3])?,
        f1: solve(&polys.f[1][..3])?,
        f2: solve(&polys.f[2])?,
        f3: solve(&polys.f[3])?,
        f4: solve(&polys.f[4][1..])?,
        i_00: -table.b02 / table.b03,
        thermal_cubic: solve(&[table.b50, table.b40, table.b30, table.b20])?,
    })
}

/// Table, polynomials and roots for one parameter point.
pub fn analyze(params: &ReducedParams) -> Result<(CoeffTable, PolySet, RootCatalog)> {
    let table = coefficients(params);
    let polys = polynomials(&table);
    let cat = roots(&polys, &table)?;
    Ok((table, polys, cat))
}
