//! Desk-scale field layer on a rectangular box: statically admissible stress
//! fields, reconstruction of the deformation `χ = ∫ τ·T⁻¹·dX + χ₀`,
//! compatibility (`∇ × F = 0`) and equilibrium residuals on grids.
//!
//! Exact reconstruction is limited to homogeneous stress, where the integrand
//! is constant and the path integral reduces to `F·(X − X₀)`. Sampled fields
//! are integrated along axis-aligned staircase paths; path independence is
//! diagnosed by comparing two traversal orders, never enforced.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual_solver::{solve_all, Classification, DualSolution, SolutionCensus};
use crate::energetics::dual_energy_density;
use crate::error::{Error, Result};
use crate::material::{stored_energy_unchecked, MaterialParams};
use crate::tensors::{invert_sym3, SymTensor3, Tensor3, Vec3};

/// One face of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Face {
    #[serde(rename = "x-")]
    XMinus,
    #[serde(rename = "x+")]
    XPlus,
    #[serde(rename = "y-")]
    YMinus,
    #[serde(rename = "y+")]
    YPlus,
    #[serde(rename = "z-")]
    ZMinus,
    #[serde(rename = "z+")]
    ZPlus,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMinus,
        Face::XPlus,
        Face::YMinus,
        Face::YPlus,
        Face::ZMinus,
        Face::ZPlus,
    ];

    pub fn axis(self) -> usize {
        match self {
            Face::XMinus | Face::XPlus => 0,
            Face::YMinus | Face::YPlus => 1,
            Face::ZMinus | Face::ZPlus => 2,
        }
    }

    pub fn is_plus(self) -> bool {
        matches!(self, Face::XPlus | Face::YPlus | Face::ZPlus)
    }

    /// Outward unit normal.
    pub fn normal(self) -> Vec3 {
        let mut n = [0.0; 3];
        n[self.axis()] = if self.is_plus() { 1.0 } else { -1.0 };
        n
    }
}

/// Axis-aligned box `[lo, hi]` sampled by `n` nodes per axis, with its
/// boundary split into prescribed-deformation faces and traction faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec3,
    pub hi: Vec3,
    pub n: usize,
    pub gamma_chi: Vec<Face>,
}

impl BoxDomain {
    pub fn new(lo: Vec3, hi: Vec3, n: usize, gamma_chi: Vec<Face>) -> Result<Self> {
        let dom = BoxDomain {
            lo,
            hi,
            n,
            gamma_chi,
        };
        dom.validate()?;
        Ok(dom)
    }

    /// Unit cube with the `x-` face clamped.
    pub fn unit_cube(n: usize) -> Result<Self> {
        BoxDomain::new([0.0; 3], [1.0; 3], n, vec![Face::XMinus])
    }

    pub fn validate(&self) -> Result<()> {
        if !(0..3).all(|a| self.lo[a] < self.hi[a]) {
            return Err(Error::InvalidParameter(
                "box requires lo < hi on every axis".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(
                "box needs at least 2 nodes per axis".into(),
            ));
        }
        let mut faces = self.gamma_chi.clone();
        faces.sort();
        faces.dedup();
        if faces.len() != self.gamma_chi.len() {
            return Err(Error::InvalidParameter(
                "duplicate face in gamma_chi".into(),
            ));
        }
        Ok(())
    }

    /// Traction faces: the complement of `gamma_chi`.
    pub fn gamma_t(&self) -> Vec<Face> {
        Face::ALL
            .into_iter()
            .filter(|f| !self.gamma_chi.contains(f))
            .collect()
    }

    pub fn spacing(&self) -> Vec3 {
        let d = (self.n - 1) as f64;
        [0, 1, 2].map(|a| (self.hi[a] - self.lo[a]) / d)
    }

    pub fn node(&self, idx: [usize; 3]) -> Vec3 {
        let h = self.spacing();
        [0, 1, 2].map(|a| self.lo[a] + h[a] * idx[a] as f64)
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Flat index with x varying fastest.
    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[2] * self.n + idx[1]) * self.n + idx[0]
    }

    pub fn unflat(&self, i: usize) -> [usize; 3] {
        [i % self.n, (i / self.n) % self.n, i / (self.n * self.n)]
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn face_area(&self, face: Face) -> f64 {
        let a = face.axis();
        (0..3)
            .filter(|&b| b != a)
            .map(|b| self.hi[b] - self.lo[b])
            .product()
    }

    pub fn face_centroid(&self, face: Face) -> Vec3 {
        let mut c = [0, 1, 2].map(|a| 0.5 * (self.lo[a] + self.hi[a]));
        let a = face.axis();
        c[a] = if face.is_plus() {
            self.hi[a]
        } else {
            self.lo[a]
        };
        c
    }
}

/// Spatial form of a first Piola-Kirchhoff stress field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StressKind {
    Homogeneous(Tensor3),
    /// `τ(X) = base + G·X` with `gradient[i][α][β] = ∂τ_iα/∂X_β`.
    Affine {
        base: Tensor3,
        gradient: [[[f64; 3]; 3]; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressField {
    pub kind: StressKind,
    /// `ρf`, force per unit volume.
    pub body_force: Vec3,
}

impl StressField {
    pub fn at(&self, x: Vec3) -> Tensor3 {
        match &self.kind {
            StressKind::Homogeneous(tau) => *tau,
            StressKind::Affine { base, gradient } => {
                let mut m = base.0;
                for i in 0..3 {
                    for a in 0..3 {
                        m[i][a] += (0..3).map(|b| gradient[i][a][b] * x[b]).sum::<f64>();
                    }
                }
                Tensor3(m)
            }
        }
    }

    /// `τ·n` on `face` at `x`.
    pub fn traction(&self, face: Face, x: Vec3) -> Vec3 {
        self.at(x).apply(face.normal())
    }

    /// Affine field with an explicitly given body force (no balance check).
    pub fn affine_with_body_force(
        base: Tensor3,
        gradient: [[[f64; 3]; 3]; 3],
        body_force: Vec3,
    ) -> Self {
        StressField {
            kind: StressKind::Affine { base, gradient },
            body_force,
        }
    }
}

/// Divergence of an affine field: `(∇·τ)_i = Σ_α ∂τ_iα/∂X_α`.
fn affine_divergence(gradient: &[[[f64; 3]; 3]; 3]) -> Vec3 {
    [0, 1, 2].map(|i| (0..3).map(|a| gradient[i][a][a]).sum())
}

/// Constant stress with zero body force.
pub fn make_homogeneous_field(tau: Tensor3) -> StressField {
    StressField {
        kind: StressKind::Homogeneous(tau),
        body_force: [0.0; 3],
    }
}

/// Affine stress with the body force that balances it, `ρf = −∇·τ`.
pub fn make_affine_field(base: Tensor3, gradient: [[[f64; 3]; 3]; 3]) -> StressField {
    let div = affine_divergence(&gradient);
    StressField::affine_with_body_force(base, gradient, div.map(|d| -d))
}

/// Max over interior nodes of `‖∇·τ + ρf‖₂`, with `∇·τ` from central
/// differences of the nodal stress.
pub fn admissibility_residual(field: &StressField, dom: &BoxDomain) -> f64 {
    if dom.n < 3 {
        return 0.0;
    }
    let h = dom.spacing();
    let mut worst = 0.0_f64;
    for k in 1..dom.n - 1 {
        for j in 1..dom.n - 1 {
            for i in 1..dom.n - 1 {
                let idx = [i, j, k];
                let mut r = field.body_force;
                for a in 0..3 {
                    let mut plus = idx;
                    let mut minus = idx;
                    plus[a] += 1;
                    minus[a] -= 1;
                    let tp = field.at(dom.node(plus));
                    let tm = field.at(dom.node(minus));
                    for (comp, ri) in r.iter_mut().enumerate() {
                        *ri += (tp.get(comp, a) - tm.get(comp, a)) / (2.0 * h[a]);
                    }
                }
                worst = worst.max(r.iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
    }
    worst
}

/// Deformation map on the box.
#[derive(Debug, Clone, PartialEq)]
pub enum DeformationMap {
    /// `χ(X) = F·(X − X₀) + c`.
    Affine { f: Tensor3, x0: Vec3, c: Vec3 },
    /// Nodal positions on the grid of a [`BoxDomain`].
    Sampled(GridField<Vec3>),
}

impl DeformationMap {
    /// Position of `x`; only available for affine maps.
    pub fn eval(&self, x: Vec3) -> Option<Vec3> {
        match self {
            DeformationMap::Affine { f, x0, c } => {
                let d = f.apply([x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]]);
                Some([d[0] + c[0], d[1] + c[1], d[2] + c[2]])
            }
            DeformationMap::Sampled(_) => None,
        }
    }

    pub fn gradient(&self) -> Option<Tensor3> {
        match self {
            DeformationMap::Affine { f, .. } => Some(*f),
            DeformationMap::Sampled(_) => None,
        }
    }

    pub fn det_f(&self) -> Option<f64> {
        self.gradient().map(|f| f.det())
    }
}

/// Deformation `χ(X) = τ·T⁻¹·(X − X₀) + χ₀` for homogeneous `τ`.
pub fn reconstruct_affine(
    tau: &Tensor3,
    sol: &DualSolution,
    x0: Vec3,
    chi0: Vec3,
) -> Result<DeformationMap> {
    let f = *tau * invert_sym3(&sol.t)?.as_tensor();
    Ok(DeformationMap::Affine { f, x0, c: chi0 })
}

/// Values sampled at every node of a box grid (x index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    pub n: usize,
    pub values: Vec<T>,
}

impl<T: Copy> GridField<T> {
    pub fn at(&self, idx: [usize; 3]) -> T {
        self.values[(idx[2] * self.n + idx[1]) * self.n + idx[0]]
    }
}

pub fn sample_tensor_field(
    dom: &BoxDomain,
    f: impl Fn(Vec3) -> Tensor3 + Sync,
) -> GridField<Tensor3> {
    let values = (0..dom.node_count())
        .into_par_iter()
        .map(|i| f(dom.node(dom.unflat(i))))
        .collect();
    GridField { n: dom.n, values }
}

/// Derivative of a nodal scalar along `axis`: central in the interior,
/// third-order one-sided at the two ends so that the interior stencil sets
/// the (second) order of the max-norm error. Written in differences so that
/// a constant field gives exactly zero.
fn grid_derivative(
    values: impl Fn([usize; 3]) -> f64,
    idx: [usize; 3],
    axis: usize,
    n: usize,
    h: f64,
) -> f64 {
    let shifted = |d: isize| {
        let mut j = idx;
        j[axis] = (idx[axis] as isize + d) as usize;
        values(j)
    };
    let i = idx[axis];
    if i > 0 && i + 1 < n {
        return (shifted(1) - shifted(-1)) / (2.0 * h);
    }
    // Mirror the stencil at the upper end.
    let dir: isize = if i == 0 { 1 } else { -1 };
    let f0 = shifted(0);
    let d = |m: isize| shifted(dir * m) - f0;
    let one_sided = match n {
        2 => d(1) / h,
        3 => (4.0 * d(1) - d(2)) / (2.0 * h),
        _ => (18.0 * d(1) - 9.0 * d(2) + 2.0 * d(3)) / (6.0 * h),
    };
    dir as f64 * one_sided
}

/// `max |∂F_iα/∂X_β − ∂F_iβ/∂X_α|` over nodes and components.
pub fn curl_residual(field: &GridField<Tensor3>, dom: &BoxDomain) -> f64 {
    let h = dom.spacing();
    let n = dom.n;
    (0..dom.node_count())
        .into_par_iter()
        .map(|flat| {
            let idx = dom.unflat(flat);
            let mut worst = 0.0_f64;
            for i in 0..3 {
                for a in 0..3 {
                    for b in (a + 1)..3 {
                        let d_ia_b = grid_derivative(|j| field.at(j).get(i, a), idx, b, n, h[b]);
                        let d_ib_a = grid_derivative(|j| field.at(j).get(i, b), idx, a, n, h[a]);
                        worst = worst.max((d_ia_b - d_ib_a).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Integrates `F` from the node at `lo` along a staircase path that visits
/// the axes in `order`, averaging the two end values on each grid segment.
pub fn staircase_integrate(
    field: &GridField<Tensor3>,
    dom: &BoxDomain,
    chi0: Vec3,
    order: [usize; 3],
) -> GridField<Vec3> {
    let h = dom.spacing();
    let values = (0..dom.node_count())
        .into_par_iter()
        .map(|flat| {
            let target = dom.unflat(flat);
            let mut pos = [0usize; 3];
            let mut chi = chi0;
            for &axis in &order {
                while pos[axis] < target[axis] {
                    let mut next = pos;
                    next[axis] += 1;
                    let mid = (field.at(pos) + field.at(next)).scale(0.5);
                    for (i, c) in chi.iter_mut().enumerate() {
                        *c += mid.get(i, axis) * h[axis];
                    }
                    pos = next;
                }
            }
            chi
        })
        .collect();
    GridField { n: dom.n, values }
}

/// Largest nodal difference between the x→y→z and z→y→x staircase integrals.
pub fn path_independence_gap(field: &GridField<Tensor3>, dom: &BoxDomain) -> f64 {
    let a = staircase_integrate(field, dom, [0.0; 3], [0, 1, 2]);
    let b = staircase_integrate(field, dom, [0.0; 3], [2, 1, 0]);
    a.values
        .iter()
        .zip(&b.values)
        .flat_map(|(p, q)| (0..3).map(move |i| (p[i] - q[i]).abs()))
        .fold(0.0, f64::max)
}

/// Pointwise census at every node of the grid.
pub fn solve_nodes(
    field: &StressField,
    dom: &BoxDomain,
    m: &MaterialParams,
) -> Result<Vec<SolutionCensus>> {
    (0..dom.node_count())
        .into_par_iter()
        .map(|i| solve_all(&field.at(dom.node(dom.unflat(i))), m))
        .collect()
}

/// `F = τ·T⁻¹` of the positive (global minimizer) solution at every node.
/// Its curl measures how far the pointwise solutions are from a deformation.
pub fn positive_gradient_field(
    field: &StressField,
    dom: &BoxDomain,
    m: &MaterialParams,
) -> Result<GridField<Tensor3>> {
    let censuses = solve_nodes(field, dom, m)?;
    let values = censuses
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let pos = c
                .solutions
                .iter()
                .find(|s| s.classification == Classification::Positive)
                .expect("the positive solution always exists");
            let tau = field.at(dom.node(dom.unflat(i)));
            Ok(tau * invert_sym3(&pos.t)?.as_tensor())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridField { n: dom.n, values })
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Total potential `∫W(F) dΩ − ∫_{Γt} χ·τ·n dΓ` for an affine map under a
/// homogeneous stress. Face integrals of affine integrands are exact at the
/// face centroid.
pub fn potential_functional(
    dom: &BoxDomain,
    map: &DeformationMap,
    tau: &Tensor3,
    m: &MaterialParams,
) -> Result<f64> {
    let f = map
        .gradient()
        .ok_or_else(|| Error::InvalidParameter("functional assembly needs an affine map".into()))?;
    let mut total = stored_energy_unchecked(&f, m) * dom.volume();
    for face in dom.gamma_t() {
        let chi = map.eval(dom.face_centroid(face)).unwrap_or_default();
        total -= dom.face_area(face) * dot(chi, tau.apply(face.normal()));
    }
    Ok(total)
}

/// Pure complementary functional `∫_{Γχ} χ₀·τ·n dΓ + ∫ dual density dΩ`,
/// with `χ₀` read from `boundary_map` on the prescribed faces.
pub fn dual_functional(
    dom: &BoxDomain,
    boundary_map: &DeformationMap,
    tau: &Tensor3,
    t: &SymTensor3,
    m: &MaterialParams,
) -> Result<f64> {
    let mut total = dual_energy_density(t, tau, m)? * dom.volume();
    for &face in &dom.gamma_chi {
        let chi0 = boundary_map
            .eval(dom.face_centroid(face))
            .ok_or_else(|| Error::InvalidParameter("boundary map must be affine".into()))?;
        total += dom.face_area(face) * dot(chi0, tau.apply(face.normal()));
    }
    Ok(total)
}

/// CSV with columns `x,y,z,F11,F12,F13,F21,F22,F23,F31,F32,F33`.
pub fn write_tensor_grid_csv<W: Write>(
    dom: &BoxDomain,
    field: &GridField<Tensor3>,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "x,y,z,F11,F12,F13,F21,F22,F23,F31,F32,F33")?;
    for (i, t) in field.values.iter().enumerate() {
        let x = dom.node(dom.unflat(i));
        let cols: Vec<String> = x
            .iter()
            .chain(t.0.iter().flatten())
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

/// CSV with columns `x,y,z,chi1,chi2,chi3`.
pub fn write_position_grid_csv<W: Write>(
    dom: &BoxDomain,
    field: &GridField<Vec3>,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "x,y,z,chi1,chi2,chi3")?;
    for (i, p) in field.values.iter().enumerate() {
        let x = dom.node(dom.unflat(i));
        let cols: Vec<String> = x
            .iter()
            .chain(p.iter())
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}
