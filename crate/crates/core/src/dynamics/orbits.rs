//! Relative periodic orbits: shooting search on the constrained residual
//! (g Phi_T(z) - z, H - E, mu), family deduplication, primitive periods,
//! monodromy blocks in the adapted frame, and action integrals.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::frame::{tangent_frame, TangentFrame};
use crate::dynamics::{flow_with_functionals, HamiltonianModel, PhasePoint};
use crate::error::{EquiweylError, Result};
use crate::group::{GroupElement, GroupKind};
use crate::quad;

/// Search parameters; defaults match the batch driver.
#[derive(Debug, Clone)]
pub struct OrbitSearchConfig {
    pub energy: f64,
    pub t_max: f64,
    pub seeds: usize,
    pub rng_seed: u64,
    /// Convergence target for the closing residual ||g Phi_T(z) - z||.
    pub residual_tol: f64,
    pub scan_dt: f64,
    pub scan_theta_nodes: usize,
    /// Scan minima below `candidate_threshold * sqrt(2E)` get polished.
    pub candidate_threshold: f64,
    pub dedup_tol: f64,
    pub t_min: f64,
    pub max_newton_iters: usize,
}

impl OrbitSearchConfig {
    pub fn new(energy: f64, t_max: f64) -> Self {
        Self {
            energy,
            t_max,
            seeds: 200,
            rng_seed: 7,
            residual_tol: 1e-10,
            scan_dt: 0.01,
            scan_theta_nodes: 64,
            candidate_threshold: 0.5,
            dedup_tol: 1e-5,
            t_min: 1e-2,
            max_newton_iters: 60,
        }
    }
}

/// Group coordinate of a closing element: continuous torus angle or finite index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupCoord {
    Torus(f64),
    Finite(usize),
}

impl GroupCoord {
    pub fn to_vec(self) -> Vec<f64> {
        match self {
            GroupCoord::Torus(t) => vec![t],
            GroupCoord::Finite(i) => vec![i as f64],
        }
    }
}

/// A converged relative periodic family representative.
#[derive(Debug, Clone)]
pub struct RelativePeriodicOrbit {
    pub family_id: usize,
    pub z0: PhasePoint,
    /// Stored closing time; equals the primitive period after canonicalization.
    pub t: f64,
    pub g_coord: GroupCoord,
    pub residual: f64,
    pub t_gamma: f64,
    pub energy: f64,
    pub orbit_dim: usize,
    pub nondegenerate: bool,
    pub nondeg_margin: f64,
    /// True when the shooting Jacobian had more null directions than dim F.
    pub degenerate_jacobian: bool,
}

impl RelativePeriodicOrbit {
    pub fn element(&self, model: &HamiltonianModel) -> Result<GroupElement> {
        coord_element(model, self.g_coord)
    }

    /// Closing element for the k-th repetition, (g_gamma)^k.
    pub fn element_pow(&self, model: &HamiltonianModel, k: i64) -> Result<GroupElement> {
        match self.g_coord {
            GroupCoord::Torus(theta) => model.group().torus_element(theta * k as f64),
            GroupCoord::Finite(idx) => {
                let els = match model.group().kind() {
                    GroupKind::Finite { elements } => elements,
                    _ => unreachable!("finite coord on torus group"),
                };
                let mut m = DMatrix::identity(model.n(), model.n());
                let base = els[idx].matrix();
                let reps = k.rem_euclid(i64::MAX) as usize;
                // finite groups in scope are small; repeated product is fine
                for _ in 0..reps.min(64) {
                    m = base * m;
                }
                // locate the product back in the element list to keep coords meaningful
                for (i, e) in els.iter().enumerate() {
                    if (e.matrix() - &m).norm() < 1e-10 {
                        return Ok(GroupElement::with_coords(m, Some(vec![i as f64]))?);
                    }
                }
                GroupElement::new(m)
            }
        }
    }
}

fn coord_element(model: &HamiltonianModel, coord: GroupCoord) -> Result<GroupElement> {
    match coord {
        GroupCoord::Torus(theta) => model.group().torus_element(theta),
        GroupCoord::Finite(idx) => model.group().element_from_coords(&[idx as f64]),
    }
}

/// Newton projection onto {H = E} intersect {mu = 0}.
pub fn project_onto_level_set(
    model: &HamiltonianModel,
    z: &DVector<f64>,
    energy: f64,
    tol: f64,
) -> Option<PhasePoint> {
    let q = model.group().dim();
    let mut cur = z.clone();
    for _ in 0..60 {
        let p = PhasePoint::from_vector(cur.clone()).ok()?;
        let mu = model.group().momentum_map(&p);
        let he = model.energy(&p) - energy;
        let mut c = DVector::zeros(1 + q);
        c[0] = he;
        for i in 0..q {
            c[1 + i] = mu.components[i];
        }
        let scale = 1.0 + energy.abs();
        if c.norm() < tol * scale {
            return Some(p);
        }
        let mut jac = DMatrix::zeros(1 + q, cur.len());
        jac.row_mut(0).copy_from(&model.grad(&cur).transpose());
        if q > 0 {
            jac.view_mut((1, 0), (q, cur.len()))
                .copy_from(&model.group().momentum_jacobian(&p));
        }
        let svd = jac.svd(true, true);
        let delta = svd.solve(&c, 1e-12).ok()?;
        cur -= delta;
    }
    None
}

/// Newton projection onto the zero momentum level alone.
pub fn project_onto_momentum_level(
    model: &HamiltonianModel,
    z: DVector<f64>,
) -> Option<PhasePoint> {
    let q = model.group().dim();
    if q == 0 {
        return PhasePoint::from_vector(z).ok();
    }
    let mut cur = z;
    for _ in 0..50 {
        let p = PhasePoint::from_vector(cur.clone()).ok()?;
        let mu = model.group().momentum_map(&p);
        if mu.norm() < 1e-12 * (1.0 + cur.norm_squared()) {
            return Some(p);
        }
        let jac = model.group().momentum_jacobian(&p);
        let svd = jac.svd(true, true);
        let delta = svd.solve(&mu.components, 1e-13).ok()?;
        cur -= delta;
    }
    None
}

/// Draw `count` points on {H = E, mu = 0} by box rejection plus projection.
pub fn sample_constraint_points(
    model: &HamiltonianModel,
    energy: f64,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<PhasePoint> {
    let bx = model.sample_box(energy * 1.2);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let z = DVector::from_fn(bx.len(), |i, _| {
            let (lo, hi) = bx[i];
            rng.random_range(lo..hi)
        });
        if let Some(p) = project_onto_level_set(model, &z, energy, 1e-12) {
            out.push(p);
        }
    }
    out
}

/// Closing residual ||g Phi_t(z) - z||.
pub fn closing_residual(
    model: &HamiltonianModel,
    z: &DVector<f64>,
    t: f64,
    g: &GroupElement,
) -> Result<f64> {
    let zt = model.evolve_point(z, t)?;
    Ok((g.apply_phase(&zt) - z).norm())
}

/// Converged output of one Gauss-Newton polish.
#[derive(Debug, Clone)]
pub struct PolishedCandidate {
    pub z: PhasePoint,
    pub t: f64,
    pub coord: GroupCoord,
    pub residual: f64,
    pub extra_null_directions: usize,
}

/// Gauss-Newton shooting on the residual (g Phi_t(z) - z, H - E, mu) over
/// the unknowns (z, t, torus angle). Non-convergence returns None.
pub fn polish_candidate(
    model: &HamiltonianModel,
    z0: &DVector<f64>,
    t0: f64,
    coord0: GroupCoord,
    cfg: &OrbitSearchConfig,
) -> Option<PolishedCandidate> {
    let n = model.n();
    let d = 2 * n;
    let q = model.group().dim();
    let torus_angle = matches!(coord0, GroupCoord::Torus(_));
    let n_unknowns = d + 1 + if torus_angle { 1 } else { 0 };
    let n_res = d + 1 + q;
    let scale_c = 1.0 + cfg.energy.abs();

    let mut z = z0.clone();
    let mut t = t0;
    let mut theta = match coord0 {
        GroupCoord::Torus(a) => a,
        GroupCoord::Finite(_) => 0.0,
    };
    let mut extra_null = 0usize;

    let eval_residual = |z: &DVector<f64>, t: f64, theta: f64| -> Option<(DVector<f64>, DVector<f64>, DMatrix<f64>, GroupElement)> {
        let g = match coord0 {
            GroupCoord::Torus(_) => model.group().torus_element(theta).ok()?,
            GroupCoord::Finite(i) => coord_element(model, GroupCoord::Finite(i)).ok()?,
        };
        let (zt, m) = model.evolve(z, t).ok()?;
        let p = PhasePoint::from_vector(z.clone()).ok()?;
        let mut f = DVector::zeros(n_res);
        let gzt = g.apply_phase(&zt);
        for i in 0..d {
            f[i] = gzt[i] - z[i];
        }
        f[d] = (model.energy(&p) - cfg.energy) / scale_c;
        let mu = model.group().momentum_map(&p);
        for i in 0..q {
            f[d + 1 + i] = mu.components[i] / scale_c;
        }
        Some((f, zt, m, g))
    };

    let (mut f, mut zt, mut m, mut g) = eval_residual(&z, t, theta)?;

    for _ in 0..cfg.max_newton_iters {
        let closing = f.rows(0, d).norm();
        let constraints = f.rows(d, 1 + q).norm() * scale_c;
        if closing < cfg.residual_tol && constraints < 1e-9 * scale_c {
            if t < cfg.t_min || t > cfg.t_max * 1.5 {
                return None;
            }
            let coord = match coord0 {
                GroupCoord::Torus(_) => {
                    GroupCoord::Torus(theta.rem_euclid(2.0 * std::f64::consts::PI))
                }
                GroupCoord::Finite(i) => GroupCoord::Finite(i),
            };
            return Some(PolishedCandidate {
                z: PhasePoint::from_vector(z).ok()?,
                t,
                coord,
                residual: closing,
                extra_null_directions: extra_null,
            });
        }

        // assemble the Jacobian
        let mut jac = DMatrix::zeros(n_res, n_unknowns);
        let r = g.phase_matrix();
        let rm = &r * &m;
        for i in 0..d {
            for j in 0..d {
                jac[(i, j)] = rm[(i, j)] - if i == j { 1.0 } else { 0.0 };
            }
        }
        let ztdot = model.vector_field(&zt);
        let gztdot = g.apply_phase(&ztdot);
        for i in 0..d {
            jac[(i, d)] = gztdot[i];
        }
        if torus_angle {
            // d/dtheta (g_theta w) = A g_theta w
            let gzt = g.apply_phase(&zt);
            let a = &model.group().lie_basis()[0];
            let pa = PhasePoint::from_vector(gzt).ok()?;
            let agzt = {
                let x = pa.x();
                let xi = pa.xi();
                let mut v = DVector::zeros(d);
                v.rows_mut(0, n).copy_from(&(a * x));
                v.rows_mut(n, n).copy_from(&(a * xi));
                v
            };
            for i in 0..d {
                jac[(i, d + 1)] = agzt[i];
            }
        }
        let p = PhasePoint::from_vector(z.clone()).ok()?;
        jac.row_mut(d)
            .columns_mut(0, d)
            .copy_from(&(model.grad(&z).transpose() / scale_c));
        if q > 0 {
            jac.view_mut((d + 1, 0), (q, d))
                .copy_from(&(model.group().momentum_jacobian(&p) / scale_c));
        }

        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        extra_null = svd
            .singular_values
            .iter()
            .filter(|&&s| s < 1e-8 * smax)
            .count()
            .saturating_sub(1 + q);
        let delta = svd.solve(&f, 1e-10 * smax).ok()?;

        // damped update
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let zn = &z - delta.rows(0, d) * lambda;
            let tn = t - delta[d] * lambda;
            let thn = if torus_angle {
                theta - delta[d + 1] * lambda
            } else {
                theta
            };
            if let Some((fn_, ztn, mn, gn)) = eval_residual(&zn, tn, thn) {
                if fn_.norm() < f.norm() || fn_.norm() < 1e-14 {
                    z = zn;
                    t = tn;
                    theta = thn;
                    f = fn_;
                    zt = ztn;
                    m = mn;
                    g = gn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Sample the flow trajectory at `count` times spread over [0, t_span).
fn trajectory_samples(
    model: &HamiltonianModel,
    z0: &DVector<f64>,
    t_span: f64,
    count: usize,
) -> Result<Vec<(f64, DVector<f64>)>> {
    let mut out = Vec::with_capacity(count);
    let dt = t_span / count as f64;
    let mut cur = z0.clone();
    out.push((0.0, cur.clone()));
    for i in 1..count {
        cur = model.evolve_point(&cur, dt)?;
        out.push((i as f64 * dt, cur.clone()));
    }
    Ok(out)
}

/// Distance from z to the F-orbit {g_theta Phi_s(z_ref)}: coarse grid over
/// (s, theta), then Gauss-Newton descent on the squared distance.
pub fn distance_to_f_orbit(
    model: &HamiltonianModel,
    z_ref: &DVector<f64>,
    t_gamma: f64,
    z: &DVector<f64>,
) -> Result<f64> {
    let grid = 64usize;
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });

    let samples = trajectory_samples(model, z_ref, t_gamma, grid)?;
    let theta_elements: Vec<(f64, GroupElement)> = if torus {
        (0..grid)
            .map(|it| {
                let th = 2.0 * std::f64::consts::PI * it as f64 / grid as f64;
                (th, model.group().torus_element(th).expect("torus element"))
            })
            .collect()
    } else {
        match model.group().kind() {
            GroupKind::Finite { elements } => elements
                .iter()
                .enumerate()
                .map(|(i, e)| (i as f64, e.clone()))
                .collect(),
            _ => unreachable!(),
        }
    };

    let mut best = (f64::INFINITY, 0.0f64, 0.0f64);
    for (s, zs) in &samples {
        for (th, g) in &theta_elements {
            let d = (g.apply_phase(zs) - z).norm();
            if d < best.0 {
                best = (d, *s, *th);
            }
        }
    }

    // Gauss-Newton on r(s, theta) = g_theta Phi_s(z_ref) - z
    let (mut dist, mut s, mut theta) = best;
    let n = model.n();
    for _ in 0..40 {
        let zs = model.evolve_point(z_ref, s)?;
        let zdot = model.vector_field(&zs);
        let (gzs, gzdot, col_t) = if torus {
            let g = model.group().torus_element(theta).expect("torus element");
            let gzs = g.apply_phase(&zs);
            let gzdot = g.apply_phase(&zdot);
            let a = &model.group().lie_basis()[0];
            let mut at = DVector::zeros(2 * n);
            at.rows_mut(0, n).copy_from(&(a * gzs.rows(0, n)));
            at.rows_mut(n, n).copy_from(&(a * gzs.rows(n, n)));
            (gzs, gzdot, Some(at))
        } else {
            let g = model.group().element_from_coords(&[theta])?;
            (g.apply_phase(&zs), g.apply_phase(&zdot), None)
        };
        let r = &gzs - z;
        let new_dist = r.norm();
        dist = dist.min(new_dist);
        if new_dist < 1e-13 {
            return Ok(new_dist);
        }
        // normal equations in one or two variables
        let (ds, dth) = match &col_t {
            Some(ct) => {
                let a11 = gzdot.dot(&gzdot);
                let a12 = gzdot.dot(ct);
                let a22 = ct.dot(ct);
                let b1 = gzdot.dot(&r);
                let b2 = ct.dot(&r);
                let det = a11 * a22 - a12 * a12;
                if det.abs() < 1e-14 * (a11 * a22).max(1e-300) {
                    // group direction degenerates (stabilized point): 1-D step
                    (b1 / a11, 0.0)
                } else {
                    ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
                }
            }
            None => (gzdot.dot(&r) / gzdot.dot(&gzdot), 0.0),
        };
        s -= ds;
        theta -= dth;
        if ds.abs() < 1e-15 * t_gamma.max(1.0) && dth.abs() < 1e-15 {
            break;
        }
    }
    // final evaluation at the converged parameters
    let zs = model.evolve_point(z_ref, s)?;
    let g = if torus {
        model.group().torus_element(theta).expect("torus element")
    } else {
        model.group().element_from_coords(&[theta])?
    };
    Ok(dist.min((g.apply_phase(&zs) - z).norm()))
}

/// Primitive period by divisor scan: try T/m for m = 2.. and re-solve.
fn primitive_period(
    model: &HamiltonianModel,
    cand: &PolishedCandidate,
    cfg: &OrbitSearchConfig,
) -> Result<(f64, GroupCoord, PolishedCandidate)> {
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });
    let z = cand.z.coords();
    let mut best: Option<PolishedCandidate> = None;
    let m_max = (cand.t / cfg.t_min).floor() as usize;
    for m in 2..=m_max.max(1) {
        let tc = cand.t / m as f64;
        if tc < cfg.t_min {
            break;
        }
        // coarse feasibility at tc
        let (ok, coord) = if torus {
            let zt = model.evolve_point(z, tc)?;
            let mut best_theta = 0.0;
            let mut best_r = f64::INFINITY;
            for it in 0..256 {
                let th = 2.0 * std::f64::consts::PI * it as f64 / 256.0;
                let g = model.group().torus_element(th).expect("torus element");
                let r = (g.apply_phase(&zt) - z).norm();
                if r < best_r {
                    best_r = r;
                    best_theta = th;
                }
            }
            (best_r < 1e-2 * (1.0 + z.norm()), GroupCoord::Torus(best_theta))
        } else {
            let els = match model.group().kind() {
                GroupKind::Finite { elements } => elements.clone(),
                _ => unreachable!(),
            };
            let zt = model.evolve_point(z, tc)?;
            let mut best_i = 0;
            let mut best_r = f64::INFINITY;
            for (i, e) in els.iter().enumerate() {
                let r = (e.apply_phase(&zt) - z).norm();
                if r < best_r {
                    best_r = r;
                    best_i = i;
                }
            }
            (best_r < 1e-2 * (1.0 + z.norm()), GroupCoord::Finite(best_i))
        };
        if !ok {
            continue;
        }
        if let Some(p) = polish_candidate(model, z, tc, coord, cfg) {
            // accept only genuine divisors
            if (p.t - tc).abs() < 0.25 * tc {
                match &best {
                    Some(b) if p.t >= b.t => {}
                    _ => best = Some(p),
                }
            }
        }
    }
    match best {
        Some(p) => Ok((p.t, p.coord, p)),
        None => Ok((cand.t, cand.coord, cand.clone())),
    }
}

/// Search for relative periodic orbits on {H = E, mu = 0} with period in
/// (0, t_max]. Returns primitive families, deduplicated and sorted by period.
pub fn find_relative_periodic_orbits(
    model: &HamiltonianModel,
    cfg: &OrbitSearchConfig,
) -> Result<Vec<RelativePeriodicOrbit>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let seeds = sample_constraint_points(model, cfg.energy, cfg.seeds, &mut rng);
    let scale = (2.0 * cfg.energy.abs()).sqrt().max(1.0);
    let torus = matches!(model.group().kind(), GroupKind::Torus { .. });
    let steps = (cfg.t_max / cfg.scan_dt).ceil() as usize;

    let mut candidates: Vec<PolishedCandidate> = Vec::new();

    // precomputed group-element grid for the scan
    let scan_elements: Vec<(GroupCoord, GroupElement)> = if torus {
        (0..cfg.scan_theta_nodes)
            .map(|it| {
                let th = 2.0 * std::f64::consts::PI * it as f64 / cfg.scan_theta_nodes as f64;
                (
                    GroupCoord::Torus(th),
                    model.group().torus_element(th).expect("torus element"),
                )
            })
            .collect()
    } else {
        match model.group().kind() {
            GroupKind::Finite { elements } => elements
                .iter()
                .enumerate()
                .map(|(i, e)| (GroupCoord::Finite(i), e.clone()))
                .collect(),
            _ => unreachable!(),
        }
    };

    for seed in &seeds {
        let z = seed.coords().clone();
        // one pass along the trajectory, tracking the best group-matched residual
        let mut prev_r = f64::INFINITY;
        let mut prev_prev_r = f64::INFINITY;
        let mut prev_coord = GroupCoord::Torus(0.0);
        let mut cur = z.clone();
        for step in 1..=steps {
            let t = step as f64 * cfg.scan_dt;
            cur = model.evolve_point(&cur, cfg.scan_dt)?;
            let mut r = f64::INFINITY;
            let mut coord = scan_elements[0].0;
            for (c, g) in &scan_elements {
                let d = (g.apply_phase(&cur) - &z).norm();
                if d < r {
                    r = d;
                    coord = *c;
                }
            }

            // local minimum below threshold at the previous step
            if prev_r < r
                && prev_r < prev_prev_r
                && prev_r < cfg.candidate_threshold * scale
                && step >= 2
            {
                let t_prev = t - cfg.scan_dt;
                if let Some(p) = polish_candidate(model, &z, t_prev, prev_coord, cfg) {
                    candidates.push(p);
                }
            }
            prev_prev_r = prev_r;
            prev_r = r;
            prev_coord = coord;
        }
    }

    // deduplicate into families via F-orbit distance and primitive periods
    struct Family {
        rep: PolishedCandidate,
        t_gamma: f64,
        degenerate_jacobian: bool,
    }
    let mut families: Vec<Family> = Vec::new();

    'cand: for cand in candidates {
        for fam in &families {
            let d = distance_to_f_orbit(
                model,
                fam.rep.z.coords(),
                fam.t_gamma,
                cand.z.coords(),
            )?;
            if d < cfg.dedup_tol * scale {
                continue 'cand;
            }
        }
        let degen = cand.extra_null_directions > 0;
        let (_tg, _coord, prim) = primitive_period(model, &cand, cfg)?;
        // canonical representative: prefer the identity element when it also closes
        // (stabilized points admit arbitrary group components)
        let mut rep = prim.clone();
        if torus {
            let e = model.group().identity();
            let r_id = closing_residual(model, rep.z.coords(), rep.t, &e)?;
            if r_id < cfg.residual_tol.max(rep.residual * 4.0) {
                rep.coord = GroupCoord::Torus(0.0);
                rep.residual = r_id;
            }
        }
        // the window is (0, t_max]; polish may wander past it
        if rep.t > cfg.t_max * (1.0 + 1e-9) {
            continue;
        }
        families.push(Family {
            t_gamma: rep.t,
            rep,
            degenerate_jacobian: degen,
        });
    }

    families.sort_by(|a, b| {
        a.t_gamma
            .total_cmp(&b.t_gamma)
            .then(a.rep.z.coords()[0].total_cmp(&b.rep.z.coords()[0]))
    });

    let mut out = Vec::with_capacity(families.len());
    for (id, fam) in families.iter().enumerate() {
        let mut orbit = RelativePeriodicOrbit {
            family_id: id,
            z0: fam.rep.z.clone(),
            t: fam.rep.t,
            g_coord: fam.rep.coord,
            residual: fam.rep.residual,
            t_gamma: fam.t_gamma,
            energy: cfg.energy,
            orbit_dim: model.group().orbit_type(&fam.rep.z, None).orbit_dim,
            nondegenerate: false,
            nondeg_margin: 0.0,
            degenerate_jacobian: fam.degenerate_jacobian,
        };
        match monodromy_blocks(model, &orbit, 1) {
            Ok(blocks) => {
                let rep = is_g_nondegenerate(&blocks, 1e-6);
                orbit.nondegenerate = rep.nondegenerate;
                orbit.nondeg_margin = rep.margin;
            }
            Err(_) => {
                orbit.nondegenerate = false;
                orbit.nondeg_margin = 0.0;
            }
        }
        out.push(orbit);
    }
    Ok(out)
}

/// Monodromy blocks of (g Phi_T)^k in the adapted frame.
#[derive(Debug, Clone)]
pub struct MonodromyBlocks {
    /// Block on J f_z.
    pub a: DMatrix<f64>,
    /// Block on f_z; equals diag(1, Ad(g)) for converged orbits.
    pub b: DMatrix<f64>,
    /// Block on the reduced transversal R.
    pub p: DMatrix<f64>,
    pub frame: TangentFrame,
    /// Norm of the blocks required to vanish by the return-map structure.
    pub structure_defect: f64,
    /// || B - I || (the adjoint action is trivial for the abelian groups in scope).
    pub b_defect: f64,
}

/// Compute (g^k Phi_{kT})-differential at the orbit representative and read
/// off the diagonal blocks with respect to (J f_z, f_z, R).
pub fn monodromy_blocks(
    model: &HamiltonianModel,
    orbit: &RelativePeriodicOrbit,
    k: usize,
) -> Result<MonodromyBlocks> {
    if k == 0 {
        return Err(EquiweylError::InvalidInput("repetition count must be >= 1".into()));
    }
    let g = orbit.element(model)?;
    let (_, m) = model.evolve(orbit.z0.coords(), orbit.t)?;
    let once = g.phase_matrix() * m;
    let mut full = once.clone();
    for _ in 1..k {
        full = &once * &full;
    }

    let frame = tangent_frame(model, &orbit.z0, 1e-7)?;
    let q = frame.full();
    let mf = q.transpose() * full * &q;

    let djf = frame.basis_jf.ncols();
    let df = frame.basis_f.ncols();
    let dr = frame.basis_r.ncols();
    let a = mf.view((0, 0), (djf, djf)).into_owned();
    let b = mf.view((djf, djf), (df, df)).into_owned();
    let p = mf.view((djf + df, djf + df), (dr, dr)).into_owned();

    // zero blocks demanded by the return-map structure:
    // (Jf, f), (Jf, R) and (R, f)
    let z1 = mf.view((0, djf), (djf, df)).norm();
    let z2 = mf.view((0, djf + df), (djf, dr)).norm();
    let z3 = mf.view((djf + df, djf), (dr, df)).norm();
    let structure_defect = (z1 * z1 + z2 * z2 + z3 * z3).sqrt();
    let b_defect = (&b - DMatrix::identity(df, df)).norm();

    Ok(MonodromyBlocks {
        a,
        b,
        p,
        frame,
        structure_defect,
        b_defect,
    })
}

/// Non-degeneracy certificate: min |eig(P) - 1|.
#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    pub nondegenerate: bool,
    pub margin: f64,
    pub eigenvalues: Vec<Complex64>,
}

pub fn is_g_nondegenerate(blocks: &MonodromyBlocks, tol: f64) -> NondegeneracyReport {
    if blocks.p.nrows() == 0 {
        // empty transversal: vacuously non-degenerate
        return NondegeneracyReport {
            nondegenerate: true,
            margin: f64::INFINITY,
            eigenvalues: Vec::new(),
        };
    }
    let eigs = blocks.p.clone().complex_eigenvalues();
    let margin = eigs
        .iter()
        .map(|l| (l - Complex64::new(1.0, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    NondegeneracyReport {
        nondegenerate: margin > tol,
        margin,
        eigenvalues: eigs.iter().copied().collect(),
    }
}

/// Quadrature of f(z, zdot) along the trajectory from 0 to t.
pub fn quadrature_along_flow(
    model: &HamiltonianModel,
    z0: &PhasePoint,
    t: f64,
    f: &(dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Sync),
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if model.has_flow_oracle() {
        quad::integrate_adaptive(
            |s| {
                let zs = model.evolve_point(z0.coords(), s).expect("oracle flow");
                let zdot = model.vector_field(&zs);
                f(&zs, &zdot)
            },
            0.0,
            t,
            1e-12,
            4096,
        )
    } else {
        let res = flow_with_functionals(model, z0, t, 1e-12, &[&f])?;
        Ok(res.accumulators[0])
    }
}

/// Action integral phi_{k,gamma} = int_0^{k T_gamma} <xi, xdot> ds.
pub fn action_integral(model: &HamiltonianModel, orbit: &RelativePeriodicOrbit, k: usize) -> Result<f64> {
    let n = model.n();
    let integrand = move |z: &DVector<f64>, zdot: &DVector<f64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            acc += z[n + i] * zdot[i];
        }
        acc
    };
    quadrature_along_flow(model, &orbit.z0, k as f64 * orbit.t_gamma, &integrand)
}
