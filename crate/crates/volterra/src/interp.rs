//! Interpolation machinery shared by the solvers: uniform meshes with a
//! piecewise-linear interpolant, a modulus-based interpolation error bound,
//! and barycentric evaluation of polynomial interpolants.

use crate::error::{Error, Result};
use crate::holder::{j_seminorm, modulus, sup_bound_constant, Beta, HolderParams, SampledFunction};

/// Uniform mesh on `[a, b]` with `n` cells. Nodes are computed as
/// `a + (b - a) i / n` so the last node is exactly `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    a: f64,
    b: f64,
    n: usize,
}

impl Mesh {
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!(
                "mesh interval [{a}, {b}] must be finite with a < b"
            )));
        }
        if n == 0 {
            return Err(Error::Domain("mesh needs at least one cell".into()));
        }
        Ok(Mesh { a, b, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + (self.b - self.a) * i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the cell containing `t`, clamped to `[0, n - 1]`.
    pub fn cell_of(&self, t: f64) -> usize {
        let raw = ((t - self.a) / (self.b - self.a) * self.n as f64).floor();
        (raw.max(0.0) as usize).min(self.n - 1)
    }
}

/// Hat function of node `i`: one at `node(i)`, zero at the other nodes,
/// linear in between and zero outside the supporting cells.
pub fn tent(mesh: &Mesh, i: usize, t: f64) -> Result<f64> {
    if i > mesh.n() {
        return Err(Error::Domain(format!(
            "tent index {i} exceeds the node count {}",
            mesh.n()
        )));
    }
    // Evaluation is only meaningful on the mesh span; an ulp of slack
    // keeps endpoint arithmetic from tripping the check.
    let pad = 1e-12 * mesh.h();
    if t < mesh.a() - pad || t > mesh.b() + pad {
        return Err(Error::Domain(format!(
            "t = {t} outside the mesh span [{}, {}]",
            mesh.a(),
            mesh.b()
        )));
    }
    let ti = mesh.node(i);
    let h = mesh.h();
    let d = (t - ti).abs();
    Ok(if d >= h { 0.0 } else { 1.0 - d / h })
}

/// Continuous piecewise-linear function given by its node values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFunction {
    mesh: Mesh,
    values: Vec<f64>,
}

impl PiecewiseLinearFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n() + 1 {
            return Err(Error::Domain(format!(
                "{} node values given for a mesh with {} nodes",
                values.len(),
                mesh.n() + 1
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite node value {bad}")));
        }
        Ok(PiecewiseLinearFunction { mesh, values })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluates by linear interpolation; arguments outside `[a, b]` clamp
    /// to the boundary values.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.mesh.a() {
            return self.values[0];
        }
        if t >= self.mesh.b() {
            return self.values[self.mesh.n()];
        }
        let i = self.mesh.cell_of(t);
        let ti = self.mesh.node(i);
        let theta = (t - ti) / self.mesh.h();
        self.values[i] * (1.0 - theta) + self.values[i + 1] * theta
    }
}

/// Samples `f` at the mesh nodes and returns the resulting interpolant.
pub fn interp_linear(f: impl Fn(f64) -> f64, mesh: &Mesh) -> Result<PiecewiseLinearFunction> {
    PiecewiseLinearFunction::new(*mesh, mesh.nodes().into_iter().map(f).collect())
}

/// Bound for the piecewise-linear interpolation error on meshes of width
/// `h`, in terms of the sampled function's smoothness near scale `h`:
/// finite beta uses `C(alpha, beta) h^alpha j(x, [0, h])^(alpha/beta)`,
/// the supremum form uses `h^alpha / (2^alpha - 1)` times the largest
/// `sigma^-alpha omega(x, sigma)` over dyadic `sigma = h 2^-k` down to the
/// sample spacing.
pub fn interp_error_bound(x: &SampledFunction, p: &HolderParams, h: f64) -> Result<f64> {
    let grid_h = x.span() / x.segments() as f64;
    if !h.is_finite() || h <= 0.0 || h > x.span() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "h = {h} must lie in (0, {}]",
            x.span()
        )));
    }
    if h < grid_h * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "h = {h} is below the sample spacing {grid_h}; the samples carry no information at that scale"
        )));
    }
    let alpha = p.alpha();
    match p.beta() {
        Beta::Finite(beta) => {
            let j = j_seminorm(x, p, h)?;
            Ok(sup_bound_constant(p) * h.powf(alpha) * j.powf(alpha / beta))
        }
        Beta::Infinite => {
            let mut ratio = 0.0f64;
            let mut k = 0;
            loop {
                let sigma = h * 0.5f64.powi(k);
                if sigma < grid_h * (1.0 - 1e-12) && k > 0 {
                    break;
                }
                ratio = ratio.max(sigma.powf(-alpha) * modulus(x, sigma)?);
                k += 1;
            }
            Ok(h.powf(alpha) / (2.0f64.powf(alpha) - 1.0) * ratio)
        }
    }
}

/// Polynomial interpolant in the second barycentric form. Weights are
/// scaled by the interval capacity `(b - a) / 4` so products over many
/// nodes stay within range.
#[derive(Debug, Clone)]
pub struct BarycentricPolynomial {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl BarycentricPolynomial {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} nodes against {} values",
                nodes.len(),
                values.len()
            )));
        }
        if let Some(bad) = nodes.iter().chain(values.iter()).find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite interpolation datum {bad}")));
        }
        let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let capacity = if hi > lo { (hi - lo) / 4.0 } else { 1.0 };
        let mut weights = Vec::with_capacity(nodes.len());
        for i in 0..nodes.len() {
            let mut w = 1.0f64;
            for j in 0..nodes.len() {
                if i != j {
                    let d = (nodes[i] - nodes[j]) / capacity;
                    if d == 0.0 {
                        return Err(Error::Domain(format!(
                            "repeated interpolation node {}",
                            nodes[i]
                        )));
                    }
                    w /= d;
                }
            }
            weights.push(w);
        }
        Ok(BarycentricPolynomial {
            nodes,
            values,
            weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values of the cardinal basis at `t`: row `r` with `r[j] = l_j(t)`,
    /// so the interpolant at `t` is the dot product of `r` with any value
    /// vector on these nodes.
    pub fn cardinal_row(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        if let Some(hit) = self.nodes.iter().position(|&x| x == t) {
            let mut row = vec![0.0; n];
            row[hit] = 1.0;
            return row;
        }
        let mut row = Vec::with_capacity(n);
        let mut den = 0.0;
        for i in 0..n {
            let q = self.weights[i] / (t - self.nodes[i]);
            den += q;
            row.push(q);
        }
        for entry in &mut row {
            *entry /= den;
        }
        row
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.nodes.len() {
            let d = t - self.nodes[i];
            if d == 0.0 {
                return self.values[i];
            }
            let q = self.weights[i] / d;
            num += q * self.values[i];
            den += q;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_rule;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mesh_endpoints_are_exact() {
        let mesh = Mesh::uniform(0.0, 1.0, 7).unwrap();
        assert_eq!(mesh.node(0), 0.0);
        assert_eq!(mesh.node(7), 1.0);
        assert_relative_eq!(mesh.h(), 1.0 / 7.0, max_relative = 1e-15);
        for i in 0..7 {
            assert!(mesh.node(i) < mesh.node(i + 1));
        }
    }

    #[test]
    fn cell_lookup_clamps_and_brackets() {
        let mesh = Mesh::uniform(0.0, 1.0, 10).unwrap();
        assert_eq!(mesh.cell_of(-0.5), 0);
        assert_eq!(mesh.cell_of(0.05), 0);
        assert_eq!(mesh.cell_of(0.999), 9);
        assert_eq!(mesh.cell_of(2.0), 9);
        for i in 0..10 {
            let mid = 0.5 * (mesh.node(i) + mesh.node(i + 1));
            assert_eq!(mesh.cell_of(mid), i);
        }
    }

    #[test]
    fn tents_are_a_partition_of_unity() {
        let mesh = Mesh::uniform(0.0, 1.0, 9).unwrap();
        for i in 0..=9 {
            for j in 0..=9 {
                let expected = if i == j { 1.0 } else { 0.0 };
                // Node spacing can differ from h by an ulp, so the
                // off-diagonal zeros are only near-exact.
                assert_abs_diff_eq!(
                    tent(&mesh, i, mesh.node(j)).unwrap(),
                    expected,
                    epsilon = 1e-14
                );
            }
        }
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..1000 {
            let t = rng.gen_range(0.0..=1.0);
            let sum: f64 = (0..=9).map(|i| tent(&mesh, i, t).unwrap()).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
        }
        assert!(tent(&mesh, 0, -0.2).is_err());
        assert!(tent(&mesh, 0, 1.2).is_err());
        assert!(tent(&mesh, 11, 0.5).is_err());

        // Hand value: one quarter-cell to the right of node 1 on N=4.
        let quarters = Mesh::uniform(0.0, 1.0, 4).unwrap();
        assert_abs_diff_eq!(tent(&quarters, 1, 0.375).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn chords_average_the_endpoint_values() {
        let mesh = Mesh::uniform(0.0, 1.0, 2).unwrap();
        let p = interp_linear(|t| t * t, &mesh).unwrap();
        // Midpoint of [0, 1/2]: chord through 0 and 1/4.
        assert_abs_diff_eq!(p.eval(0.25), 0.125, epsilon = 1e-16);
    }

    #[test]
    fn linear_functions_are_reproduced_exactly() {
        let mesh = Mesh::uniform(-1.0, 2.0, 13).unwrap();
        let f = |t: f64| 3.0 - 0.75 * t;
        let p = interp_linear(f, &mesh).unwrap();
        for k in 0..100 {
            let t = -1.0 + 3.0 * k as f64 / 99.0;
            assert_abs_diff_eq!(p.eval(t), f(t), epsilon = 1e-13);
        }
        assert_eq!(p.eval(-5.0), f(-1.0));
        assert_eq!(p.eval(5.0), f(2.0));
    }

    #[test]
    fn interpolant_passes_through_its_node_values() {
        let mesh = Mesh::uniform(0.0, 1.0, 5).unwrap();
        let p = interp_linear(|t| (7.0 * t).sin(), &mesh).unwrap();
        for i in 0..=5 {
            assert_eq!(p.eval(mesh.node(i)), p.values()[i]);
        }
    }

    // Interpolation is a projection: re-interpolating a piecewise-linear
    // function on its own mesh changes nothing.
    #[test]
    fn reinterpolation_on_the_same_mesh_is_the_identity() {
        let mut rng = StdRng::seed_from_u64(41);
        let mesh = Mesh::uniform(0.0, 1.0, 17).unwrap();
        let values: Vec<f64> = (0..=17).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let original = PiecewiseLinearFunction::new(mesh, values).unwrap();
        let again = interp_linear(|t| original.eval(t), &mesh).unwrap();
        for _ in 0..1000 {
            let t = rng.gen_range(0.0..=1.0);
            assert_abs_diff_eq!(again.eval(t), original.eval(t), epsilon = 1e-15);
        }
    }

    #[test]
    fn sup_form_bound_for_sqrt_matches_the_closed_form() {
        // On dyadic grids the empirical modulus of sqrt at dyadic sigma is
        // exactly sqrt(sigma), so the bound collapses to h^(1/2) / (sqrt 2 - 1).
        let x = SampledFunction::from_fn(0.0, 1.0, 8192, f64::sqrt).unwrap();
        let p = HolderParams::infinite(0.5).unwrap();
        let h = 0.0625;
        let bound = interp_error_bound(&x, &p, h).unwrap();
        assert_relative_eq!(
            bound,
            h.sqrt() / (2f64.sqrt() - 1.0),
            max_relative = 1e-10
        );
    }

    #[test]
    fn finite_beta_bound_for_sqrt_scales_like_sqrt_h() {
        // alpha = 1/4, beta = 1 makes the seminorm density of sqrt equal one,
        // so j(x, [0, h]) is close to h and the bound close to C sqrt(h).
        let x = SampledFunction::from_fn(0.0, 1.0, 8192, f64::sqrt).unwrap();
        let p = HolderParams::finite(0.25, 1.0).unwrap();
        let c = sup_bound_constant(&p);
        for h in [0.25, 0.0625] {
            let bound = interp_error_bound(&x, &p, h).unwrap();
            assert_relative_eq!(bound, c * h.sqrt(), max_relative = 0.1);
        }
    }

    #[test]
    fn bounds_dominate_measured_interpolation_errors() {
        let cases: [(fn(f64) -> f64, f64); 2] =
            [(f64::sqrt, 0.5), (|t| (t - 0.5).abs().powf(0.6), 0.6)];
        for (f, alpha) in cases {
            let x = SampledFunction::from_fn(0.0, 1.0, 8192, f).unwrap();
            let p = HolderParams::infinite(alpha).unwrap();
            for n in [8usize, 32, 128] {
                let mesh = Mesh::uniform(0.0, 1.0, n).unwrap();
                let interp = interp_linear(f, &mesh).unwrap();
                let mut err = 0.0f64;
                for k in 0..=4096 {
                    let t = k as f64 / 4096.0;
                    err = err.max((interp.eval(t) - f(t)).abs());
                }
                let bound = interp_error_bound(&x, &p, mesh.h()).unwrap();
                assert!(
                    err <= bound,
                    "n = {n}: measured {err} exceeds bound {bound}"
                );
            }
        }
    }

    // The finite-beta bound carries dyadic sampling slack, so domination
    // is only asserted up to 5e-2 relative.
    #[test]
    fn finite_beta_bound_dominates_the_three_quarters_power() {
        let f = |t: f64| t.powf(0.75);
        let x = SampledFunction::from_fn(0.0, 1.0, 8192, f).unwrap();
        let p = HolderParams::finite(0.5, 2.0).unwrap();
        for n in [8usize, 16, 32, 64] {
            let mesh = Mesh::uniform(0.0, 1.0, n).unwrap();
            let interp = interp_linear(f, &mesh).unwrap();
            let mut err = 0.0f64;
            for k in 0..=4096 {
                let t = k as f64 / 4096.0;
                err = err.max((interp.eval(t) - f(t)).abs());
            }
            let bound = interp_error_bound(&x, &p, mesh.h()).unwrap();
            assert!(
                err <= bound * 1.05,
                "n = {n}: measured {err} exceeds bound {bound}"
            );
        }
    }

    #[test]
    fn four_nodes_interpolate_a_cubic_exactly() {
        let nodes = vec![0.0, 0.3, 0.7, 1.0];
        let values: Vec<f64> = nodes.iter().map(|&t: &f64| t.powi(3)).collect();
        let p = BarycentricPolynomial::new(nodes, values).unwrap();
        assert_abs_diff_eq!(p.eval(0.5), 0.125, epsilon = 1e-13);
    }

    #[test]
    fn error_bound_validates_h() {
        let x = SampledFunction::from_fn(0.0, 1.0, 64, f64::sqrt).unwrap();
        let p = HolderParams::infinite(0.5).unwrap();
        assert!(interp_error_bound(&x, &p, 0.0).is_err());
        assert!(interp_error_bound(&x, &p, 2.0).is_err());
        assert!(interp_error_bound(&x, &p, 1e-4).is_err());
    }

    #[test]
    fn barycentric_reproduces_polynomials_on_gauss_nodes() {
        let rule = gauss_rule(31, 0.0, 1.0).unwrap();
        for degree in [0usize, 3, 11, 24, 30] {
            let f = |t: f64| t.powi(degree as i32);
            let values = rule.nodes.iter().map(|&t| f(t)).collect();
            let p = BarycentricPolynomial::new(rule.nodes.clone(), values).unwrap();
            for k in 0..=200 {
                let t = k as f64 / 200.0;
                assert_abs_diff_eq!(p.eval(t), f(t), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn barycentric_is_exact_at_nodes_and_between_them() {
        let rule = gauss_rule(20, 0.0, 1.0).unwrap();
        let values: Vec<f64> = rule.nodes.iter().map(|&t| t.exp()).collect();
        let p = BarycentricPolynomial::new(rule.nodes.clone(), values.clone()).unwrap();
        for (t, v) in rule.nodes.iter().zip(&values) {
            assert_eq!(p.eval(*t), *v);
        }
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert_abs_diff_eq!(p.eval(t), t.exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn barycentric_handles_a_single_node() {
        let p = BarycentricPolynomial::new(vec![0.5], vec![2.0]).unwrap();
        assert_eq!(p.eval(0.1), 2.0);
        assert_eq!(p.eval(0.5), 2.0);
    }

    #[test]
    fn barycentric_rejects_bad_input() {
        assert!(BarycentricPolynomial::new(vec![], vec![]).is_err());
        assert!(BarycentricPolynomial::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(BarycentricPolynomial::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(BarycentricPolynomial::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn piecewise_linear_validates_lengths() {
        let mesh = Mesh::uniform(0.0, 1.0, 4).unwrap();
        assert!(PiecewiseLinearFunction::new(mesh, vec![0.0; 4]).is_err());
        assert!(PiecewiseLinearFunction::new(mesh, vec![f64::NAN; 5]).is_err());
        assert!(Mesh::uniform(0.0, 1.0, 0).is_err());
        assert!(Mesh::uniform(1.0, 0.0, 3).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn interpolation_is_exact_on_affine_functions(
                c0 in -5.0f64..5.0,
                c1 in -5.0f64..5.0,
                n in 1usize..40,
                t in 0.0f64..1.0,
            ) {
                let mesh = Mesh::uniform(0.0, 1.0, n).unwrap();
                let p = interp_linear(|s| c0 + c1 * s, &mesh).unwrap();
                let exact = c0 + c1 * t;
                prop_assert!((p.eval(t) - exact).abs() <= 1e-12);
            }

            #[test]
            fn tents_sum_to_one_at_random_points(
                n in 1usize..60,
                t in 0.0f64..1.0,
            ) {
                let mesh = Mesh::uniform(0.0, 1.0, n).unwrap();
                let sum: f64 = (0..=n).map(|i| tent(&mesh, i, t).unwrap()).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-14);
            }

            #[test]
            fn interpolant_stays_within_the_node_range(
                values in proptest::collection::vec(-10.0f64..10.0, 2..30),
                t in 0.0f64..1.0,
            ) {
                let n = values.len() - 1;
                let mesh = Mesh::uniform(0.0, 1.0, n).unwrap();
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let p = PiecewiseLinearFunction::new(mesh, values).unwrap();
                let v = p.eval(t);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
