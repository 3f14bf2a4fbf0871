//! Compact orthogonal group actions on R^n lifted to phase space R^{2n}:
//! Lie algebra, Haar integration, characters, momentum map, orbit types.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::PhasePoint;
use crate::error::{EquiweylError, Result};

const ORTHOGONALITY_TOL: f64 = 1e-12;

/// An element of a compact subgroup of O(n).
///
/// `coords` holds the parameter vector when the element comes from a
/// parametrized family (torus angles in radians, finite-group index).
#[derive(Debug, Clone)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    coords: Option<Vec<f64>>,
}

impl GroupElement {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_coords(matrix, None)
    }

    pub fn with_coords(matrix: DMatrix<f64>, coords: Option<Vec<f64>>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(EquiweylError::InvalidInput("group element matrix must be square".into()));
        }
        let defect = (matrix.transpose() * &matrix - DMatrix::identity(n, n)).norm();
        if defect > ORTHOGONALITY_TOL * (n as f64) {
            return Err(EquiweylError::InvalidInput(format!(
                "matrix is not orthogonal (defect {defect:.3e})"
            )));
        }
        let det = matrix.clone().determinant();
        if (det.abs() - 1.0).abs() > 1e-12 {
            return Err(EquiweylError::InvalidInput(format!(
                "matrix determinant {det} is not +-1"
            )));
        }
        Ok(Self { matrix, coords })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            coords: Some(vec![0.0]),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.matrix.transpose(),
            coords: self.coords.as_ref().map(|c| c.iter().map(|v| -v).collect()),
        }
    }

    /// The lift of g to phase space, blockdiag(g, g), applied to a 2n-vector.
    pub fn apply_phase(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let mut out = DVector::zeros(2 * n);
        let x = z.rows(0, n);
        let xi = z.rows(n, n);
        out.rows_mut(0, n).copy_from(&(&self.matrix * x));
        out.rows_mut(n, n).copy_from(&(&self.matrix * xi));
        out
    }

    /// blockdiag(g, g) as a 2n x 2n matrix.
    pub fn phase_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        m.view_mut((n, n), (n, n)).copy_from(&self.matrix);
        m
    }
}

/// A rotation plane (i, j) with an integer winding number for torus embeddings.
#[derive(Debug, Clone, Copy)]
pub struct RotationPlane {
    pub i: usize,
    pub j: usize,
    pub winding: i32,
}

/// The concrete realization of the group.
#[derive(Debug, Clone)]
pub enum GroupKind {
    /// Explicit element list; element coords are the list index.
    Finite { elements: Vec<GroupElement> },
    /// Rank-1 torus embedded as simultaneous rotations in disjoint planes.
    Torus { planes: Vec<RotationPlane> },
}

/// Irreducible character data.
#[derive(Debug, Clone)]
pub enum CharacterTable {
    /// chi_m(theta) = exp(i m theta), m in Z.
    Torus,
    /// One row per label; `values[r][k]` is chi_r at element k.
    Finite {
        labels: Vec<String>,
        dims: Vec<usize>,
        values: Vec<Vec<Complex64>>,
    },
}

/// Label of an irreducible character.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChiLabel {
    /// Torus weight m.
    Weight(i32),
    /// Named row of a finite character table.
    Named(String),
}

impl std::fmt::Display for ChiLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChiLabel::Weight(m) => write!(f, "{m}"),
            ChiLabel::Named(s) => write!(f, "{s}"),
        }
    }
}

/// Description of a closed subgroup, for restriction multiplicities.
#[derive(Debug, Clone)]
pub enum Subgroup {
    Trivial,
    Full,
    FiniteList(Vec<GroupElement>),
}

/// Momentum-map value: one component per Lie-basis element.
#[derive(Debug, Clone)]
pub struct MomentumValue {
    pub components: DVector<f64>,
}

impl MomentumValue {
    pub fn norm(&self) -> f64 {
        self.components.norm()
    }
}

/// Orbit-type data at a point.
#[derive(Debug, Clone, Copy)]
pub struct OrbitTypeReport {
    pub orbit_dim: usize,
    pub stabilizer_dim: usize,
    pub is_principal: bool,
}

/// A compact subgroup of O(n) acting on R^n, lifted diagonally to R^{2n}.
#[derive(Debug, Clone)]
pub struct CompactGroupAction {
    n: usize,
    kind: GroupKind,
    lie_basis: Vec<DMatrix<f64>>,
    characters: CharacterTable,
    haar_nodes: usize,
    generic_orbit_dim: usize,
    generic_orbit_dim_x: usize,
}

impl CompactGroupAction {
    /// Rank-1 torus acting by rotations in the given disjoint planes.
    pub fn torus(n: usize, planes: Vec<RotationPlane>, haar_nodes: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for p in &planes {
            if p.i >= n || p.j >= n || p.i == p.j {
                return Err(EquiweylError::InvalidInput("invalid rotation plane".into()));
            }
            if seen[p.i] || seen[p.j] {
                return Err(EquiweylError::InvalidInput("rotation planes must be disjoint".into()));
            }
            seen[p.i] = true;
            seen[p.j] = true;
        }
        let mut a = DMatrix::zeros(n, n);
        for p in &planes {
            a[(p.i, p.j)] = -(p.winding as f64);
            a[(p.j, p.i)] = p.winding as f64;
        }
        let mut g = Self {
            n,
            kind: GroupKind::Torus { planes },
            lie_basis: vec![a],
            characters: CharacterTable::Torus,
            haar_nodes: haar_nodes.max(4),
            generic_orbit_dim: 0,
            generic_orbit_dim_x: 0,
        };
        g.compute_generic_ranks();
        Ok(g)
    }

    /// SO(2) acting canonically in the (i, j) coordinate plane.
    pub fn so2_plane(n: usize, i: usize, j: usize) -> Result<Self> {
        Self::torus(n, vec![RotationPlane { i, j, winding: 1 }], 64)
    }

    /// Finite subgroup given by an explicit element list (must contain the identity first).
    pub fn finite(
        n: usize,
        elements: Vec<GroupElement>,
        labels: Vec<String>,
        dims: Vec<usize>,
        values: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(EquiweylError::InvalidInput("finite group needs elements".into()));
        }
        if (elements[0].matrix() - DMatrix::identity(n, n)).norm() > 1e-12 {
            return Err(EquiweylError::InvalidInput(
                "first element of a finite group must be the identity".into(),
            ));
        }
        for (r, row) in values.iter().enumerate() {
            if row.len() != elements.len() {
                return Err(EquiweylError::InvalidInput("character table row length mismatch".into()));
            }
            // chi(e) = d_chi
            if (row[0] - Complex64::new(dims[r] as f64, 0.0)).norm() > 1e-12 {
                return Err(EquiweylError::InvalidInput(format!(
                    "character {} violates chi(e) = d_chi",
                    labels[r]
                )));
            }
        }
        let mut g = Self {
            n,
            kind: GroupKind::Finite { elements },
            lie_basis: Vec::new(),
            characters: CharacterTable::Finite { labels, dims, values },
            haar_nodes: 0,
            generic_orbit_dim: 0,
            generic_orbit_dim_x: 0,
        };
        g.compute_generic_ranks();
        Ok(g)
    }

    /// The trivial group {e} on R^n.
    pub fn trivial(n: usize) -> Self {
        Self::finite(
            n,
            vec![GroupElement::identity(n)],
            vec!["triv".into()],
            vec![1],
            vec![vec![Complex64::new(1.0, 0.0)]],
        )
        .expect("trivial group construction cannot fail")
    }

    /// Z2 = {e, rotation by pi in the (i,j) plane} with trivial and sign characters.
    pub fn z2_plane(n: usize, i: usize, j: usize) -> Result<Self> {
        let mut m = DMatrix::identity(n, n);
        m[(i, i)] = -1.0;
        m[(j, j)] = -1.0;
        let one = Complex64::new(1.0, 0.0);
        Self::finite(
            n,
            vec![
                GroupElement::identity(n),
                GroupElement::with_coords(m, Some(vec![1.0]))?,
            ],
            vec!["triv".into(), "sign".into()],
            vec![1, 1],
            vec![vec![one, one], vec![one, -one]],
        )
    }

    fn compute_generic_ranks(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        let mut max_rank = 0usize;
        let mut max_rank_x = 0usize;
        for _ in 0..16 {
            let z = DVector::from_fn(2 * self.n, |_, _| rng.random_range(-1.0..1.0));
            max_rank = max_rank.max(self.action_rank(&z, None));
            let mut zx = DVector::zeros(2 * self.n);
            for i in 0..self.n {
                zx[i] = rng.random_range(-1.0..1.0);
            }
            max_rank_x = max_rank_x.max(self.action_rank(&zx, None));
        }
        self.generic_orbit_dim = max_rank;
        self.generic_orbit_dim_x = max_rank_x;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.lie_basis.len()
    }

    pub fn lie_basis(&self) -> &[DMatrix<f64>] {
        &self.lie_basis
    }

    pub fn haar_node_count(&self) -> usize {
        self.haar_nodes
    }

    pub fn is_trivial(&self) -> bool {
        matches!(&self.kind, GroupKind::Finite { elements } if elements.len() == 1)
    }

    /// Principal orbit dimension over phase space R^{2n}.
    pub fn generic_orbit_dim(&self) -> usize {
        self.generic_orbit_dim
    }

    /// Principal orbit dimension over position space R^n (the exponent kappa).
    pub fn generic_orbit_dim_x(&self) -> usize {
        self.generic_orbit_dim_x
    }

    pub fn identity(&self) -> GroupElement {
        match &self.kind {
            GroupKind::Finite { elements } => elements[0].clone(),
            GroupKind::Torus { .. } => GroupElement::identity(self.n),
        }
    }

    /// The torus element at angle theta.
    pub fn torus_element(&self, theta: f64) -> Result<GroupElement> {
        match &self.kind {
            GroupKind::Torus { planes } => {
                let mut m = DMatrix::identity(self.n, self.n);
                for p in planes {
                    let a = p.winding as f64 * theta;
                    let (s, c) = a.sin_cos();
                    m[(p.i, p.i)] = c;
                    m[(p.i, p.j)] = -s;
                    m[(p.j, p.i)] = s;
                    m[(p.j, p.j)] = c;
                }
                GroupElement::with_coords(m, Some(vec![theta]))
            }
            GroupKind::Finite { .. } => Err(EquiweylError::InvalidInput(
                "torus_element on a finite group".into(),
            )),
        }
    }

    /// Element from parameter coordinates (torus angle or finite index).
    pub fn element_from_coords(&self, coords: &[f64]) -> Result<GroupElement> {
        match &self.kind {
            GroupKind::Torus { .. } => self.torus_element(coords[0]),
            GroupKind::Finite { elements } => {
                let idx = coords[0].round() as usize;
                elements
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| EquiweylError::InvalidInput(format!("finite index {idx} out of range")))
            }
        }
    }

    /// Haar-quadrature nodes with weights summing to one.
    pub fn haar_rule(&self) -> Vec<(GroupElement, f64)> {
        match &self.kind {
            GroupKind::Finite { elements } => {
                let w = 1.0 / elements.len() as f64;
                elements.iter().map(|g| (g.clone(), w)).collect()
            }
            GroupKind::Torus { .. } => {
                let k = self.haar_nodes;
                let w = 1.0 / k as f64;
                (0..k)
                    .map(|i| {
                        let theta = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                        (self.torus_element(theta).expect("torus element"), w)
                    })
                    .collect()
            }
        }
    }

    /// Haar average of a group-indexed function (exact for finite groups,
    /// trapezoidal and spectrally accurate for the torus).
    pub fn haar_average<F: FnMut(&GroupElement) -> Complex64>(&self, mut f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        for (g, w) in self.haar_rule() {
            // Kahan-compensated accumulation
            let y = f(&g) * w - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        acc
    }

    /// Character labels present up to a weight cutoff (torus) or all rows (finite).
    pub fn character_labels(&self, max_weight: i32) -> Vec<ChiLabel> {
        match &self.characters {
            CharacterTable::Torus => (-max_weight..=max_weight).map(ChiLabel::Weight).collect(),
            CharacterTable::Finite { labels, .. } => {
                labels.iter().cloned().map(ChiLabel::Named).collect()
            }
        }
    }

    pub fn character_dim(&self, chi: &ChiLabel) -> Result<usize> {
        match (&self.characters, chi) {
            (CharacterTable::Torus, ChiLabel::Weight(_)) => Ok(1),
            (CharacterTable::Finite { labels, dims, .. }, ChiLabel::Named(name)) => labels
                .iter()
                .position(|l| l == name)
                .map(|i| dims[i])
                .ok_or_else(|| EquiweylError::UnknownCharacter(name.clone())),
            _ => Err(EquiweylError::UnknownCharacter(chi.to_string())),
        }
    }

    /// chi(g).
    pub fn character(&self, chi: &ChiLabel, g: &GroupElement) -> Result<Complex64> {
        match (&self.characters, chi) {
            (CharacterTable::Torus, ChiLabel::Weight(m)) => {
                let theta = g
                    .coords()
                    .ok_or_else(|| {
                        EquiweylError::InvalidInput("torus element without angle coords".into())
                    })?[0];
                Ok(Complex64::from_polar(1.0, *m as f64 * theta))
            }
            (CharacterTable::Finite { labels, values, .. }, ChiLabel::Named(name)) => {
                let row = labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| EquiweylError::UnknownCharacter(name.clone()))?;
                let idx = g
                    .coords()
                    .ok_or_else(|| {
                        EquiweylError::InvalidInput("finite element without index coords".into())
                    })?[0]
                    .round() as usize;
                values[row]
                    .get(idx)
                    .copied()
                    .ok_or_else(|| EquiweylError::InvalidInput(format!("element index {idx} out of range")))
            }
            _ => Err(EquiweylError::UnknownCharacter(chi.to_string())),
        }
    }

    /// The symplectic action g(x, xi) = (gx, g xi).
    pub fn act(&self, g: &GroupElement, z: &PhasePoint) -> Result<PhasePoint> {
        if g.n() != self.n || z.n() != self.n {
            return Err(EquiweylError::DimensionMismatch {
                expected: self.n,
                got: z.n(),
            });
        }
        PhasePoint::from_vector(g.apply_phase(z.coords()))
    }

    /// Infinitesimal action (Ax, A xi) of a Lie-basis element at z.
    pub fn infinitesimal_action(&self, basis_index: usize, z: &PhasePoint) -> Result<DVector<f64>> {
        let a = self
            .lie_basis
            .get(basis_index)
            .ok_or_else(|| EquiweylError::InvalidInput("Lie basis index out of range".into()))?;
        Ok(apply_lie(a, z.coords()))
    }

    /// Momentum map mu(z)(A_i) = <z, J A_i z> per Lie-basis element.
    pub fn momentum_map(&self, z: &PhasePoint) -> MomentumValue {
        let n = self.n;
        let zv = z.coords();
        let comps = self
            .lie_basis
            .iter()
            .map(|a| {
                let az = apply_lie(a, zv);
                // J(v_x, v_xi) = (v_xi, -v_x)
                let mut dot = 0.0;
                for i in 0..n {
                    dot += zv[i] * az[n + i] - zv[n + i] * az[i];
                }
                dot
            })
            .collect::<Vec<_>>();
        MomentumValue {
            components: DVector::from_vec(comps),
        }
    }

    /// Gradient of each momentum component; rows index Lie-basis elements.
    ///
    /// For antisymmetric A the lifted generator commutes with J, so
    /// grad <z, J A z> = 2 J A z.
    pub fn momentum_jacobian(&self, z: &PhasePoint) -> DMatrix<f64> {
        let n2 = 2 * self.n;
        let mut jac = DMatrix::zeros(self.lie_basis.len(), n2);
        let zv = z.coords();
        for (r, a) in self.lie_basis.iter().enumerate() {
            let grad = 2.0 * apply_j(&apply_lie(a, zv));
            jac.row_mut(r).copy_from(&grad.transpose());
        }
        jac
    }

    fn action_rank(&self, z: &DVector<f64>, tol: Option<f64>) -> usize {
        if self.lie_basis.is_empty() {
            return 0;
        }
        let cols: Vec<DVector<f64>> = self.lie_basis.iter().map(|a| apply_lie(a, z)).collect();
        let m = DMatrix::from_columns(&cols);
        let svals = m.singular_values();
        let max_s = svals.max();
        if max_s == 0.0 {
            return 0;
        }
        // scale-free default, measured against both the largest singular value
        // and the point scale so that noise-level columns count as zero
        let eff_tol = tol.unwrap_or(1e-9 * max_s.max(z.norm()));
        svals.iter().filter(|&&s| s > eff_tol).count()
    }

    /// Orbit-type report at z: numerical rank of {A_i z} and principality.
    pub fn orbit_type(&self, z: &PhasePoint, tol: Option<f64>) -> OrbitTypeReport {
        let orbit_dim = self.action_rank(z.coords(), tol);
        OrbitTypeReport {
            orbit_dim,
            stabilizer_dim: self.dim() - orbit_dim,
            is_principal: orbit_dim == self.generic_orbit_dim,
        }
    }

    /// Multiplicity of the trivial representation in chi restricted to a subgroup,
    /// computed as a Haar average; must be a nonnegative integer.
    pub fn frobenius_factor(&self, chi: &ChiLabel, stabilizer: &Subgroup) -> Result<usize> {
        let avg = match stabilizer {
            Subgroup::Trivial => self.character(chi, &self.identity())?,
            Subgroup::Full => self.haar_average(|g| self.character(chi, g).unwrap_or_default()),
            Subgroup::FiniteList(els) => {
                let mut acc = Complex64::default();
                for g in els {
                    acc += self.character(chi, g)?;
                }
                acc / els.len() as f64
            }
        };
        let tol = 1e-9;
        let rounded = avg.re.round();
        if (avg.re - rounded).abs() > tol || avg.im.abs() > tol || rounded < 0.0 {
            return Err(EquiweylError::NonIntegerMultiplicity { value: avg.re, tol });
        }
        Ok(rounded as usize)
    }

    /// Riemannian volume of the orbit Gz.
    ///
    /// `position_only` selects the orbit of the x-component in R^n instead of
    /// the phase-space orbit in R^{2n}. Zero-dimensional orbits count points.
    pub fn orbit_volume(&self, z: &PhasePoint, position_only: bool) -> f64 {
        match &self.kind {
            GroupKind::Finite { elements } => {
                // counting measure: number of distinct orbit points
                let mut pts: Vec<DVector<f64>> = Vec::new();
                for g in elements {
                    let gz = g.apply_phase(z.coords());
                    let key = if position_only {
                        gz.rows(0, self.n).into_owned()
                    } else {
                        gz.clone()
                    };
                    if !pts.iter().any(|p| (p - &key).norm() < 1e-10) {
                        pts.push(key);
                    }
                }
                pts.len() as f64
            }
            GroupKind::Torus { .. } => {
                let a = &self.lie_basis[0];
                let speed = if position_only {
                    let x = z.coords().rows(0, self.n).into_owned();
                    (a * x).norm()
                } else {
                    apply_lie(a, z.coords()).norm()
                };
                if speed < 1e-14 {
                    1.0
                } else {
                    2.0 * std::f64::consts::PI * speed
                }
            }
        }
    }

    /// A deterministic random element, for property tests and sampling.
    pub fn random_element(&self, rng: &mut impl Rng) -> GroupElement {
        match &self.kind {
            GroupKind::Torus { .. } => {
                let theta = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                self.torus_element(theta).expect("torus element")
            }
            GroupKind::Finite { elements } => {
                let i = rng.random_range(0..elements.len());
                let mut g = elements[i].clone();
                g.coords = Some(vec![i as f64]);
                g
            }
        }
    }
}

/// blockdiag(A, A) applied to a 2n-vector.
fn apply_lie(a: &DMatrix<f64>, z: &DVector<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut out = DVector::zeros(2 * n);
    let x = z.rows(0, n);
    let xi = z.rows(n, n);
    out.rows_mut(0, n).copy_from(&(a * x));
    out.rows_mut(n, n).copy_from(&(a * xi));
    out
}

/// J = [[0, I], [-I, 0]] applied to a 2n-vector: J(x, xi) = (xi, -x).
pub fn apply_j(z: &DVector<f64>) -> DVector<f64> {
    let n = z.len() / 2;
    let mut out = DVector::zeros(2 * n);
    for i in 0..n {
        out[i] = z[n + i];
        out[n + i] = -z[i];
    }
    out
}

/// The standard symplectic form omega(a, b) = <a, J b>.
pub fn symplectic_form(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(&apply_j(b))
}

/// J as a dense 2n x 2n matrix.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn so2_r3() -> CompactGroupAction {
        CompactGroupAction::so2_plane(3, 0, 1).unwrap()
    }

    fn pp(v: Vec<f64>) -> PhasePoint {
        PhasePoint::from_vector(DVector::from_vec(v)).unwrap()
    }

    #[test]
    fn identity_acts_trivially() {
        let g = so2_r3();
        let z = pp(vec![0.3, -0.7, 1.1, 0.2, 0.0, -0.4]);
        let gz = g.act(&g.identity(), &z).unwrap();
        assert_relative_eq!((gz.coords() - z.coords()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pi_rotation_flips_planar_point() {
        let g = so2_r3();
        let rot = g.torus_element(std::f64::consts::PI).unwrap();
        let z = pp(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let gz = g.act(&rot, &z).unwrap();
        let expect = DVector::from_vec(vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!((gz.coords() - expect).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn action_preserves_symplectic_form() {
        let g = so2_r3();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let el = g.random_element(&mut rng);
            let ga = el.apply_phase(&a);
            let gb = el.apply_phase(&b);
            assert_relative_eq!(
                symplectic_form(&ga, &gb),
                symplectic_form(&a, &b),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn infinitesimal_action_matches_generator() {
        let g = so2_r3();
        let z = pp(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let az = g.infinitesimal_action(0, &z).unwrap();
        let expect = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!((az - expect).norm(), 0.0, epsilon = 1e-14);

        // zero at the origin
        let z0 = pp(vec![0.0; 6]);
        assert_eq!(g.infinitesimal_action(0, &z0).unwrap().norm(), 0.0);
    }

    #[test]
    fn infinitesimal_action_is_flow_derivative() {
        let g = so2_r3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let z = pp((0..6).map(|_| rng.random_range(-1.0..1.0)).collect());
            let az = g.infinitesimal_action(0, &z).unwrap();
            let eps = 1e-6;
            let ge = g.torus_element(eps).unwrap();
            let gz = g.act(&ge, &z).unwrap();
            let fd = (gz.coords() - z.coords()) / eps;
            assert!((fd - &az).norm() < 10.0 * eps, "forward difference should be O(eps)");
        }
    }

    #[test]
    fn momentum_map_values() {
        let g = so2_r3();
        // fixed axis: zero
        let z_axis = pp(vec![0.0, 0.0, 1.3, 0.0, 0.0, -0.2]);
        assert!(g.momentum_map(&z_axis).norm() < 1e-14);

        // z = (1,0,0, 0,xi2,0): component is -2*xi2 under J = [[0,I],[-I,0]]
        let xi2 = 0.37;
        let z = pp(vec![1.0, 0.0, 0.0, 0.0, xi2, 0.0]);
        let mu = g.momentum_map(&z);
        assert_relative_eq!(mu.components[0], -2.0 * xi2, epsilon = 1e-14);
        assert_relative_eq!(mu.norm(), 2.0 * xi2.abs(), epsilon = 1e-14);
    }

    #[test]
    fn momentum_jacobian_matches_fd() {
        let g = so2_r3();
        let z = pp(vec![0.3, -0.5, 0.8, 0.1, 0.9, -0.6]);
        let jac = g.momentum_jacobian(&z);
        let eps = 1e-6;
        for i in 0..6 {
            let mut zp = z.coords().clone();
            let mut zm = z.coords().clone();
            zp[i] += eps;
            zm[i] -= eps;
            let mp = g.momentum_map(&pp(zp.iter().copied().collect())).components[0];
            let mm = g.momentum_map(&pp(zm.iter().copied().collect())).components[0];
            assert_relative_eq!(jac[(0, i)], (mp - mm) / (2.0 * eps), epsilon = 1e-8);
        }
    }

    #[test]
    fn momentum_norm_is_g_invariant() {
        let g = so2_r3();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let z = pp((0..6).map(|_| rng.random_range(-1.0..1.0)).collect());
            let el = g.random_element(&mut rng);
            let gz = g.act(&el, &z).unwrap();
            assert_relative_eq!(
                g.momentum_map(&z).norm(),
                g.momentum_map(&gz).norm(),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn orbit_types_on_r3() {
        let g = so2_r3();
        let generic = pp(vec![0.4, 0.3, 1.0, -0.2, 0.8, 0.5]);
        let rep = g.orbit_type(&generic, None);
        assert_eq!(rep.orbit_dim, 1);
        assert!(rep.is_principal);
        assert_eq!(rep.stabilizer_dim, 0);

        let axis = pp(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.7]);
        let rep = g.orbit_type(&axis, None);
        assert_eq!(rep.orbit_dim, 0);
        assert!(!rep.is_principal);
        assert_eq!(rep.stabilizer_dim, 1);

        let triv = CompactGroupAction::trivial(3);
        let rep = triv.orbit_type(&generic, None);
        assert_eq!(rep.orbit_dim, 0);
        assert!(rep.is_principal);
    }

    #[test]
    fn orbit_dim_constant_on_orbits() {
        let g = so2_r3();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let z = pp((0..6).map(|_| rng.random_range(-1.0..1.0)).collect());
            let el = g.random_element(&mut rng);
            let gz = g.act(&el, &z).unwrap();
            assert_eq!(
                g.orbit_type(&z, None).orbit_dim,
                g.orbit_type(&gz, None).orbit_dim
            );
        }
    }

    #[test]
    fn haar_normalization_and_character_orthogonality() {
        let g = so2_r3();
        let one = g.haar_average(|_| Complex64::new(1.0, 0.0));
        assert_relative_eq!(one.re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(one.im, 0.0, epsilon = 1e-14);

        for m in [1i32, 3, -5] {
            let avg = g.haar_average(|el| g.character(&ChiLabel::Weight(m), el).unwrap());
            assert!(avg.norm() < 1e-12, "nonzero weight must average to zero");
        }

        // Schur orthogonality <chi_a, chi_b> = delta_ab
        for (a, b) in [(0, 0), (2, 2), (1, 4), (-3, 3)] {
            let ip = g.haar_average(|el| {
                let ca = g.character(&ChiLabel::Weight(a), el).unwrap();
                let cb = g.character(&ChiLabel::Weight(b), el).unwrap();
                ca.conj() * cb
            });
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!((ip - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn torus_character_formula() {
        let g = so2_r3();
        let theta = 0.83;
        let el = g.torus_element(theta).unwrap();
        for m in [-2i32, 0, 1, 5] {
            let c = g.character(&ChiLabel::Weight(m), &el).unwrap();
            let expect = Complex64::from_polar(1.0, m as f64 * theta);
            assert!((c - expect).norm() < 1e-14);
        }
        // chi(e) = d_chi = 1
        let c = g.character(&ChiLabel::Weight(7), &g.identity()).unwrap();
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn z2_sign_character() {
        let g = CompactGroupAction::z2_plane(2, 0, 1).unwrap();
        let els = match g.kind() {
            GroupKind::Finite { elements } => elements.clone(),
            _ => unreachable!(),
        };
        let sign = ChiLabel::Named("sign".into());
        assert!((g.character(&sign, &els[1]).unwrap() + Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(
            (g.character(&sign, &els[0]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14
        );
    }

    #[test]
    fn frobenius_factors() {
        let g = so2_r3();
        // trivial principal stabilizer: multiplicity d_chi = 1 for every weight
        for m in [-3i32, 0, 2] {
            assert_eq!(
                g.frobenius_factor(&ChiLabel::Weight(m), &Subgroup::Trivial).unwrap(),
                1
            );
        }

        let z2 = CompactGroupAction::z2_plane(2, 0, 1).unwrap();
        // trivial character restricted anywhere contains the trivial rep once
        assert_eq!(
            z2.frobenius_factor(&ChiLabel::Named("triv".into()), &Subgroup::Full)
                .unwrap(),
            1
        );
        // sign character restricted to the full Z2: multiplicity 0
        assert_eq!(
            z2.frobenius_factor(&ChiLabel::Named("sign".into()), &Subgroup::Full)
                .unwrap(),
            0
        );
    }

    #[test]
    fn unknown_character_is_rejected() {
        let g = CompactGroupAction::z2_plane(2, 0, 1).unwrap();
        let r = g.character(&ChiLabel::Named("nope".into()), &g.identity());
        assert!(matches!(r, Err(EquiweylError::UnknownCharacter(_))));
    }

    #[test]
    fn orbit_volume_of_planar_circle() {
        let g = so2_r3();
        // x = (1,0,0), planar xi zero: position orbit is the unit circle
        let z = pp(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.3]);
        assert_relative_eq!(
            g.orbit_volume(&z, true),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
        // phase-space orbit radius sqrt(1 + 0) with xi3 untouched
        assert_relative_eq!(
            g.orbit_volume(&z, false),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
    }
}
