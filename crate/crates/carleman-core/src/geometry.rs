//! Bounded domains with a data surface and a hidden surface, product
//! quadrature rules over both pieces, and manufactured solutions carrying
//! exact boundary data.
//!
//! Two domain families are supported. The cap domain is the half-ball
//! `|y| <= R`, `y3 >= 0`: data live on the hemisphere while the disk in the
//! plane `y3 = 0` stays hidden. The cone domain is bounded by the lateral
//! surface `|y_perp| = kappa y3` and the spherical cap `|y| = height` inside
//! it: data live on the spherical cap while the lateral surface stays hidden.

use std::f64::consts::{FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernels::{psi_matrix, stress_apply, Vector6};
use crate::material::{KernelCoeffs, MaterialParams, WaveNumbers};
use crate::specfun::gauss_rule;
use crate::CoreError;

/// Which boundary piece a quadrature rule covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfacePart {
    /// Accessible piece carrying Cauchy data.
    Data,
    /// Inaccessible piece that the continuation must suppress.
    Hidden,
}

/// Product quadrature rule over one boundary piece.
#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    /// Quadrature nodes on the surface.
    pub nodes: Vec<[f64; 3]>,
    /// Area weights, one per node.
    pub weights: Vec<f64>,
    /// Outward unit normals, one per node.
    pub normals: Vec<[f64; 3]>,
    /// Boundary piece the rule covers.
    pub part: SurfacePart,
}

impl SurfaceQuadrature {
    /// Number of quadrature nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of the area weights.
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Shape parameters of the two supported domain families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainShape {
    /// Half-ball `|y| <= radius`, `y3 >= 0`.
    Cap {
        /// Radius of the hemisphere and of the hidden disk.
        radius: f64,
    },
    /// Solid cone `|y_perp| <= kappa y3` cut by the sphere `|y| = height`.
    Cone {
        /// Growth exponent of the weight family, strictly above one.
        rho_e: f64,
        /// Lateral slope `tan(pi / (2 rho_e))`.
        kappa: f64,
        /// Radius of the closing sphere, equal to the axial extent.
        height: f64,
    },
}

/// A bounded domain together with quadrature rules over both boundary pieces.
#[derive(Debug, Clone)]
pub struct Domain {
    /// Shape parameters.
    pub shape: DomainShape,
    /// Rule over the accessible surface.
    pub data: SurfaceQuadrature,
    /// Rule over the hidden surface.
    pub hidden: SurfaceQuadrature,
    /// Gauss node count per non-azimuthal direction the rules were built with.
    pub resolution: usize,
}

impl Domain {
    /// Same shape rebuilt with twice the surface resolution.
    pub fn refined(&self) -> Result<Domain, CoreError> {
        match self.shape {
            DomainShape::Cap { radius } => make_cap(radius, 2 * self.resolution),
            DomainShape::Cone { rho_e, height, .. } => {
                make_cone(rho_e, height, 2 * self.resolution)
            }
        }
    }

    /// Largest `y3` over the closed domain.
    pub fn x3_max(&self) -> f64 {
        match self.shape {
            DomainShape::Cap { radius } => radius,
            DomainShape::Cone { height, .. } => height,
        }
    }

    /// Diameter of the closed domain.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            DomainShape::Cap { radius } => 2.0 * radius,
            DomainShape::Cone { kappa, height, .. } => {
                let rim = 2.0 * height * kappa.atan().sin();
                rim.max(height)
            }
        }
    }

    /// Evenly spaced probe points on the symmetry axis, strictly interior.
    pub fn axis_probes(&self, count: usize) -> Vec<[f64; 3]> {
        let top = self.x3_max();
        (1..=count)
            .map(|i| [0.0, 0.0, top * i as f64 / (count + 1) as f64])
            .collect()
    }

    /// Euclidean distance from `point` to the closed domain, zero inside.
    pub fn distance_to(&self, point: [f64; 3]) -> f64 {
        let rho = point[0].hypot(point[1]);
        let z = point[2];
        match self.shape {
            DomainShape::Cap { radius } => {
                if z >= 0.0 {
                    (rho.hypot(z) - radius).max(0.0)
                } else if rho <= radius {
                    -z
                } else {
                    (rho - radius).hypot(z)
                }
            }
            DomainShape::Cone { kappa, height, .. } => {
                let theta_c = kappa.atan();
                if rho.atan2(z) <= theta_c {
                    (rho.hypot(z) - height).max(0.0)
                } else {
                    // Meridian section of the domain is a circular sector, so
                    // the nearest point lies on the slant segment of length
                    // `height` through the apex.
                    let dir = [theta_c.sin(), theta_c.cos()];
                    let t = (rho * dir[0] + z * dir[1]).clamp(0.0, height);
                    (rho - t * dir[0]).hypot(z - t * dir[1])
                }
            }
        }
    }
}

fn check_resolution(resolution: usize) -> Result<(), CoreError> {
    let nodes = 2 * resolution * resolution;
    if nodes < 16 {
        return Err(CoreError::InvalidConfig {
            message: format!(
                "surface resolution {resolution} yields {nodes} nodes, need at least 16"
            ),
        });
    }
    Ok(())
}

/// Hemisphere `|y| = radius`, `y3 >= 0`, Gauss in the polar angle and a
/// trapezoid ring in azimuth with twice as many nodes.
fn cap_surface(n_theta: usize, radius: f64) -> SurfaceQuadrature {
    let rule = gauss_rule(n_theta);
    let n_phi = 2 * n_theta;
    let w_phi = 2.0 * PI / n_phi as f64;
    let count = n_theta * n_phi;
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for (xi, wi) in rule.0.iter().zip(&rule.1) {
        let theta = (xi + 1.0) * FRAC_PI_4;
        let w_theta = wi * FRAC_PI_4;
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let dir = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            nodes.push([radius * dir[0], radius * dir[1], radius * dir[2]]);
            weights.push(radius * radius * theta.sin() * w_theta * w_phi);
            normals.push(dir);
        }
    }
    SurfaceQuadrature {
        nodes,
        weights,
        normals,
        part: SurfacePart::Data,
    }
}

/// Disk `|y_perp| <= radius` in the plane `y3 = 0`, radial Gauss times a
/// trapezoid ring, oriented downward out of the cap domain.
fn disk_surface(n_rad: usize, radius: f64) -> SurfaceQuadrature {
    let rule = gauss_rule(n_rad);
    let n_phi = 2 * n_rad;
    let w_phi = 2.0 * PI / n_phi as f64;
    let count = n_rad * n_phi;
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for (xi, wi) in rule.0.iter().zip(&rule.1) {
        let r = (xi + 1.0) * (radius / 2.0);
        let w_r = wi * (radius / 2.0);
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            nodes.push([r * phi.cos(), r * phi.sin(), 0.0]);
            weights.push(r * w_r * w_phi);
            normals.push([0.0, 0.0, -1.0]);
        }
    }
    SurfaceQuadrature {
        nodes,
        weights,
        normals,
        part: SurfacePart::Hidden,
    }
}

/// Lateral surface `|y_perp| = kappa y3` from the apex to the sphere
/// `|y| = height`, Gauss along the axis times a trapezoid ring.
fn cone_lateral(n_h: usize, kappa: f64, height: f64) -> SurfaceQuadrature {
    let slant = (1.0 + kappa * kappa).sqrt();
    let h_max = height / slant;
    let rule = gauss_rule(n_h);
    let n_phi = 2 * n_h;
    let w_phi = 2.0 * PI / n_phi as f64;
    let count = n_h * n_phi;
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for (xi, wi) in rule.0.iter().zip(&rule.1) {
        let h = (xi + 1.0) * (h_max / 2.0);
        let w_h = wi * (h_max / 2.0);
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            nodes.push([kappa * h * phi.cos(), kappa * h * phi.sin(), h]);
            weights.push(kappa * h * slant * w_h * w_phi);
            normals.push([phi.cos() / slant, phi.sin() / slant, -kappa / slant]);
        }
    }
    SurfaceQuadrature {
        nodes,
        weights,
        normals,
        part: SurfacePart::Hidden,
    }
}

/// Spherical cap `|y| = height` inside the cone, polar angle up to
/// `atan(kappa)`, Gauss in the polar angle times a trapezoid ring.
fn cone_cap(n_t: usize, kappa: f64, height: f64) -> SurfaceQuadrature {
    let theta_max = kappa.atan();
    let rule = gauss_rule(n_t);
    let n_phi = 2 * n_t;
    let w_phi = 2.0 * PI / n_phi as f64;
    let count = n_t * n_phi;
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for (xi, wi) in rule.0.iter().zip(&rule.1) {
        let theta = (xi + 1.0) * (theta_max / 2.0);
        let w_theta = wi * (theta_max / 2.0);
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let dir = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            nodes.push([height * dir[0], height * dir[1], height * dir[2]]);
            weights.push(height * height * theta.sin() * w_theta * w_phi);
            normals.push(dir);
        }
    }
    SurfaceQuadrature {
        nodes,
        weights,
        normals,
        part: SurfacePart::Data,
    }
}

/// Builds the half-ball domain with a hemisphere data surface of the given
/// radius and the hidden disk closing it from below.
///
/// `resolution` is the Gauss node count in the non-azimuthal direction of
/// each surface; the azimuthal ring carries twice that many nodes, so each
/// surface has `2 * resolution^2` nodes in total.
pub fn make_cap(radius: f64, resolution: usize) -> Result<Domain, CoreError> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("cap radius must be positive and finite, got {radius}"),
        });
    }
    check_resolution(resolution)?;
    let data = cap_surface(resolution, radius);
    let hidden = disk_surface(resolution, radius);
    log::debug!(
        "cap domain: {} data nodes on the hemisphere, {} hidden nodes on the disk",
        data.len(),
        hidden.len()
    );
    Ok(Domain {
        shape: DomainShape::Cap { radius },
        data,
        hidden,
        resolution,
    })
}

/// Builds the cone domain for the growth exponent `rho_e`, closed by the
/// sphere `|y| = height`, with the spherical cap as the data surface and the
/// lateral cone surface hidden.
///
/// The lateral slope is `kappa = tan(pi / (2 rho_e))`; `resolution` follows
/// the same convention as [`make_cap`].
pub fn make_cone(rho_e: f64, height: f64, resolution: usize) -> Result<Domain, CoreError> {
    if !rho_e.is_finite() || rho_e <= 1.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("cone exponent must exceed 1, got {rho_e}"),
        });
    }
    if !height.is_finite() || height <= 0.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("cone height must be positive and finite, got {height}"),
        });
    }
    check_resolution(resolution)?;
    let kappa = (PI / (2.0 * rho_e)).tan();
    let data = cone_cap(resolution, kappa, height);
    let hidden = cone_lateral(resolution, kappa, height);
    log::debug!(
        "cone domain: slope {kappa:.6}, {} data nodes on the spherical cap, {} hidden lateral nodes",
        data.len(),
        hidden.len()
    );
    Ok(Domain {
        shape: DomainShape::Cone {
            rho_e,
            kappa,
            height,
        },
        data,
        hidden,
        resolution,
    })
}

/// Builds a flat-panel quadrature from an ASCII OFF triangle mesh.
///
/// Each face contributes one node at its centroid, the triangle area as the
/// weight, and the unit normal given by the right-handed vertex order. The
/// resulting rule is tagged as a data surface.
pub fn import_off(text: &str) -> Result<SurfaceQuadrature, CoreError> {
    let bad = |message: String| CoreError::InvalidConfig { message };
    let mut tokens = text
        .lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split_whitespace())
        .peekable();
    if tokens.next() != Some("OFF") {
        return Err(bad("OFF import: missing OFF header".into()));
    }
    let mut counts = [0usize; 3];
    for slot in &mut counts {
        *slot = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("OFF import: malformed count line".into()))?;
    }
    let (n_vert, n_face) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(n_vert);
    for i in 0..n_vert {
        let mut v = [0.0f64; 3];
        for slot in &mut v {
            *slot = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(format!("OFF import: malformed vertex {i}")))?;
        }
        vertices.push(v);
    }
    let mut nodes = Vec::with_capacity(n_face);
    let mut weights = Vec::with_capacity(n_face);
    let mut normals = Vec::with_capacity(n_face);
    for i in 0..n_face {
        let arity: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(format!("OFF import: malformed face {i}")))?;
        if arity != 3 {
            return Err(bad(format!(
                "OFF import: face {i} has {arity} vertices, only triangles are supported"
            )));
        }
        let mut idx = [0usize; 3];
        for slot in &mut idx {
            *slot = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .filter(|&k: &usize| k < n_vert)
                .ok_or_else(|| bad(format!("OFF import: bad vertex index in face {i}")))?;
        }
        let [a, b, c] = idx.map(|k| vertices[k]);
        let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cross = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        let doubled = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        if doubled <= 0.0 {
            return Err(bad(format!("OFF import: face {i} is degenerate")));
        }
        nodes.push([
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0,
        ]);
        weights.push(doubled / 2.0);
        normals.push([cross[0] / doubled, cross[1] / doubled, cross[2] / doubled]);
    }
    if nodes.len() < 16 {
        return Err(bad(format!(
            "OFF import: {} faces, need at least 16",
            nodes.len()
        )));
    }
    Ok(SurfaceQuadrature {
        nodes,
        weights,
        normals,
        part: SurfacePart::Data,
    })
}

/// Superposition of point-source fields with strengths attached, regular in
/// the domain it was manufactured for.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    sources: Vec<[f64; 3]>,
    strengths: Vec<Vector6>,
    params: MaterialParams,
    coeffs: KernelCoeffs,
    wave_numbers: WaveNumbers,
}

impl ManufacturedSolution {
    /// Source points, all outside the closed domain.
    pub fn sources(&self) -> &[[f64; 3]] {
        &self.sources
    }

    /// Strength 6-vectors attached to the sources.
    pub fn strengths(&self) -> &[Vector6] {
        &self.strengths
    }

    /// Material the fields solve the coupled system for.
    pub fn material(&self) -> &MaterialParams {
        &self.params
    }

    /// Displacement and rotation field at `x`.
    pub fn field(&self, x: [f64; 3]) -> Result<Vector6, CoreError> {
        let mut total = Vector6::zeros();
        for (z, c) in self.sources.iter().zip(&self.strengths) {
            let kernel = psi_matrix(x, *z, &self.coeffs, &self.wave_numbers)?;
            total += kernel.value * c;
        }
        Ok(total)
    }

    /// Traction and moment traction at `x` for the unit normal `n`.
    pub fn traction(&self, x: [f64; 3], n: [f64; 3]) -> Result<Vector6, CoreError> {
        let mut total = Vector6::zeros();
        for (z, c) in self.sources.iter().zip(&self.strengths) {
            let kernel = psi_matrix(x, *z, &self.coeffs, &self.wave_numbers)?;
            let stressed = stress_apply(&kernel, n, &self.params)?;
            total += stressed.value * c;
        }
        Ok(total)
    }

    /// Largest `|U| + |TU|` over the nodes of a quadrature rule, the a priori
    /// bound entering the regularization parameter choice.
    pub fn boundary_bound(&self, quad: &SurfaceQuadrature) -> Result<f64, CoreError> {
        let mut bound = 0.0f64;
        for (node, normal) in quad.nodes.iter().zip(&quad.normals) {
            let value = self.field(*node)?.norm();
            let stress = self.traction(*node, *normal)?.norm();
            bound = bound.max(value + stress);
        }
        Ok(bound)
    }
}

/// Pinned source layouts for the default three-source solutions, scaled by
/// the domain size.
fn pinned_sources(shape: &DomainShape) -> Vec<[f64; 3]> {
    match shape {
        DomainShape::Cap { radius } => [
            [0.0, 0.6, -0.9],
            [1.1, -0.7, -0.6],
            [-0.8, 0.2, -1.3],
        ]
        .iter()
        .map(|p| [p[0] * radius, p[1] * radius, p[2] * radius])
        .collect(),
        DomainShape::Cone { height, .. } => [
            [1.5, 0.0, 0.3],
            [-1.2, 0.8, 0.2],
            [0.3, -1.4, -0.5],
        ]
        .iter()
        .map(|p| [p[0] * height, p[1] * height, p[2] * height])
        .collect(),
    }
}

/// Places `j_count` point sources outside the closed domain and draws their
/// strength 6-vectors uniformly from `[-1, 1]^6` with the seeded generator.
///
/// The first three sources come from a fixed layout scaled to the domain;
/// further sources are rejection-sampled outside the clearance band. Every
/// source keeps a distance of at least a fifth of the domain diameter, so the
/// fields stay regular up to the boundary.
pub fn manufacture(
    domain: &Domain,
    j_count: usize,
    seed: u64,
) -> Result<ManufacturedSolution, CoreError> {
    if j_count == 0 {
        return Err(CoreError::InvalidConfig {
            message: "manufactured solution needs at least one source".into(),
        });
    }
    let params = MaterialParams::reference();
    let wave_numbers = params.wave_numbers()?;
    let coeffs = params.kernel_coeffs(&wave_numbers)?;
    let clearance = 0.2 * domain.diameter();
    let scale = domain.x3_max();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sources = pinned_sources(&domain.shape);
    sources.truncate(j_count);
    while sources.len() < j_count {
        let candidate = match domain.shape {
            DomainShape::Cap { .. } => [
                rng.gen_range(-1.5..1.5) * scale,
                rng.gen_range(-1.5..1.5) * scale,
                rng.gen_range(-1.8..-0.4) * scale,
            ],
            DomainShape::Cone { .. } => [
                rng.gen_range(-2.0..2.0) * scale,
                rng.gen_range(-2.0..2.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            ],
        };
        if domain.distance_to(candidate) >= clearance {
            sources.push(candidate);
        }
    }
    debug_assert!(sources
        .iter()
        .all(|z| domain.distance_to(*z) >= clearance - 1e-12));

    let strengths = (0..j_count)
        .map(|_| Vector6::from_fn(|_, _| rng.gen_range(-1.0..=1.0)))
        .collect();
    Ok(ManufacturedSolution {
        sources,
        strengths,
        params,
        coeffs,
        wave_numbers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::fd;
    use approx::assert_abs_diff_eq;

    const TEN_PROBES: [[f64; 3]; 10] = [
        [0.0, 0.0, 0.4],
        [0.2, 0.1, 0.3],
        [-0.3, 0.2, 0.5],
        [0.1, -0.4, 0.6],
        [0.0, 0.3, 0.2],
        [0.25, 0.25, 0.45],
        [-0.2, -0.3, 0.35],
        [0.4, 0.0, 0.5],
        [0.0, -0.2, 0.7],
        [-0.1, 0.1, 0.55],
    ];

    #[test]
    fn parametric_areas_match_the_closed_forms() {
        let cap = make_cap(1.0, 24).unwrap();
        assert_abs_diff_eq!(cap.data.area(), 2.0 * PI, epsilon = 1e-6);
        assert_abs_diff_eq!(cap.hidden.area(), PI, epsilon = 1e-10);

        let cone = make_cone(2.0, 1.0, 24).unwrap();
        let kappa = 1.0f64;
        let frustum = PI * kappa / (1.0 + kappa * kappa).sqrt();
        assert_abs_diff_eq!(cone.hidden.area(), frustum, epsilon = 1e-5 * frustum);
        let spherical = 2.0 * PI * (1.0 - kappa.atan().cos());
        assert_abs_diff_eq!(cone.data.area(), spherical, epsilon = 1e-6);
    }

    #[test]
    fn normals_are_unit_and_radial_where_expected() {
        let cap = make_cap(1.0, 8).unwrap();
        for (node, normal) in cap.data.nodes.iter().zip(&cap.data.normals) {
            let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2])
                .sqrt();
            assert_abs_diff_eq!(len, 1.0, epsilon = 1e-12);
            for i in 0..3 {
                assert_abs_diff_eq!(normal[i], node[i], epsilon = 1e-14);
            }
        }
        for normal in &cap.hidden.normals {
            assert_eq!(*normal, [0.0, 0.0, -1.0]);
        }
        let top = cap
            .data
            .nodes
            .iter()
            .cloned()
            .max_by(|a, b| a[2].total_cmp(&b[2]))
            .unwrap();
        assert!(top[2] > 0.999);
    }

    #[test]
    fn cone_slope_and_lateral_normals_are_consistent() {
        let cone = make_cone(2.0, 1.0, 8).unwrap();
        let DomainShape::Cone { kappa, .. } = cone.shape else {
            panic!("expected a cone shape");
        };
        assert_abs_diff_eq!(kappa, 1.0, epsilon = 1e-15);
        let slant = (1.0 + kappa * kappa).sqrt();
        for (node, normal) in cone.hidden.nodes.iter().zip(&cone.hidden.normals) {
            assert_abs_diff_eq!(normal[2], -kappa / slant, epsilon = 1e-14);
            let rho = node[0].hypot(node[1]);
            assert_abs_diff_eq!(rho, kappa * node[2], epsilon = 1e-13);
        }
    }

    #[test]
    fn all_normals_point_away_from_the_centroid() {
        for domain in [make_cap(1.0, 8).unwrap(), make_cone(2.0, 1.0, 8).unwrap()] {
            let mut centroid = [0.0f64; 3];
            let mut total = 0.0;
            for quad in [&domain.data, &domain.hidden] {
                for (node, w) in quad.nodes.iter().zip(&quad.weights) {
                    for i in 0..3 {
                        centroid[i] += w * node[i];
                    }
                    total += w;
                }
            }
            for slot in &mut centroid {
                *slot /= total;
            }
            for quad in [&domain.data, &domain.hidden] {
                for (node, normal) in quad.nodes.iter().zip(&quad.normals) {
                    let outward: f64 = (0..3)
                        .map(|i| normal[i] * (node[i] - centroid[i]))
                        .sum();
                    assert!(outward > 0.0, "inward normal at {node:?}");
                }
            }
        }
    }

    #[test]
    fn distance_to_the_domain_matches_hand_values() {
        let cap = make_cap(1.0, 8).unwrap();
        assert_abs_diff_eq!(cap.distance_to([0.0, 0.0, 2.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cap.distance_to([2.0, 0.0, 0.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cap.distance_to([0.0, 0.0, -0.5]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            cap.distance_to([1.5, 0.0, -0.5]),
            0.5f64.hypot(0.5),
            epsilon = 1e-15
        );
        assert_eq!(cap.distance_to([0.3, 0.0, 0.1]), 0.0);

        let cone = make_cone(2.0, 1.0, 8).unwrap();
        assert_eq!(cone.distance_to([0.0, 0.0, 0.5]), 0.0);
        assert_abs_diff_eq!(cone.distance_to([0.0, 0.0, 2.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            cone.distance_to([1.0, 0.0, 0.0]),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(cone.distance_to([0.0, 0.0, -1.0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn low_resolutions_are_rejected() {
        assert!(matches!(
            make_cap(1.0, 2),
            Err(CoreError::InvalidConfig { .. })
        ));
        assert!(matches!(
            make_cone(2.0, 1.0, 2),
            Err(CoreError::InvalidConfig { .. })
        ));
        assert!(matches!(
            make_cap(-1.0, 8),
            Err(CoreError::InvalidConfig { .. })
        ));
        assert!(matches!(
            make_cone(1.0, 1.0, 8),
            Err(CoreError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn refining_doubles_the_resolution() {
        let cap = make_cap(1.0, 8).unwrap();
        let fine = cap.refined().unwrap();
        assert_eq!(fine.resolution, 16);
        assert_eq!(fine.data.len(), 4 * cap.data.len());
        assert_eq!(fine.shape, cap.shape);
    }

    #[test]
    fn off_import_reads_a_triangulated_polygon() {
        let mut text = String::from("OFF\n20 18 0\n");
        // Fan of 18 triangles around the rim of a regular 18-gon in the
        // plane z = 0, counter-clockwise seen from above.
        text.push_str("0 0 0\n");
        for i in 0..18 {
            let phi = 2.0 * PI * i as f64 / 18.0;
            text.push_str(&format!("{} {} 0\n", phi.cos(), phi.sin()));
        }
        text.push_str("0 0 5\n"); // spare vertex, unreferenced
        for i in 0..18 {
            text.push_str(&format!("3 0 {} {}\n", 1 + i, 1 + (i + 1) % 18));
        }
        let quad = import_off(&text).unwrap();
        assert_eq!(quad.len(), 18);
        let polygon = 9.0 * (2.0 * PI / 18.0).sin();
        assert_abs_diff_eq!(quad.area(), polygon, epsilon = 1e-12);
        for normal in &quad.normals {
            assert_abs_diff_eq!(normal[2], 1.0, epsilon = 1e-12);
        }

        assert!(matches!(
            import_off("COFF\n1 0 0\n0 0 0\n"),
            Err(CoreError::InvalidConfig { .. })
        ));
        assert!(matches!(
            import_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"),
            Err(CoreError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn sources_keep_their_clearance_from_the_domain() {
        let cap = make_cap(1.0, 8).unwrap();
        let cone = make_cone(2.0, 1.0, 8).unwrap();
        for domain in [&cap, &cone] {
            let solution = manufacture(domain, 5, 11).unwrap();
            assert_eq!(solution.sources().len(), 5);
            let clearance = 0.2 * domain.diameter();
            for z in solution.sources() {
                assert!(domain.distance_to(*z) >= clearance - 1e-12);
            }
            for c in solution.strengths() {
                assert!(c.amax() <= 1.0);
            }
        }
        assert!(matches!(
            manufacture(&cap, 0, 1),
            Err(CoreError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn same_seed_reproduces_the_solution() {
        let domain = make_cap(1.0, 8).unwrap();
        let a = manufacture(&domain, 4, 3).unwrap();
        let b = manufacture(&domain, 4, 3).unwrap();
        assert_eq!(a.sources(), b.sources());
        assert_eq!(a.strengths(), b.strengths());
        let c = manufacture(&domain, 4, 4).unwrap();
        assert_ne!(a.strengths()[0], c.strengths()[0]);
    }

    #[test]
    fn manufactured_field_solves_the_coupled_system() {
        let domain = make_cap(1.0, 8).unwrap();
        let solution = manufacture(&domain, 3, 7).unwrap();
        let p = MaterialParams::reference();
        let (lap_u, mix_u) = (p.mu + p.alpha, p.lambda + p.mu - p.alpha);
        let (lap_w, mix_w) = (p.nu + p.beta, p.epsilon + p.nu - p.beta);
        let zo_u = p.rho * p.sigma * p.sigma;
        let zo_w = p.theta * p.sigma * p.sigma - 4.0 * p.alpha;
        let h = 1e-3;

        let sol = &solution;
        for probe in TEN_PROBES {
            let comp = |i: usize| move |pt: [f64; 3]| sol.field(pt).unwrap()[i];
            let value = sol.field(probe).unwrap();
            for k in 0..3 {
                for (row, base, lap, mix, zeroth) in [
                    (k, 0usize, lap_u, mix_u, zo_u),
                    (3 + k, 3usize, lap_w, mix_w, zo_w),
                ] {
                    let mut res = zeroth * value[row];
                    let mut scale = res.abs();
                    for i in 0..3 {
                        let lap_term = lap * fd::d2(&comp(row), probe, i, i, h);
                        let mix_term = mix * fd::d2(&comp(base + i), probe, k, i, h);
                        res += lap_term + mix_term;
                        scale = scale.max(lap_term.abs()).max(mix_term.abs());
                    }
                    // Rotation coupling: +-2 alpha (curl of the other field).
                    let other = 3 - base;
                    let (a, b) = ([1usize, 2, 0][k], [2usize, 0, 1][k]);
                    let curl = fd::d1(&comp(other + b), probe, a, h)
                        - fd::d1(&comp(other + a), probe, b, h);
                    res += 2.0 * p.alpha * curl;
                    scale = scale.max((2.0 * p.alpha * curl).abs()).max(1e-12);
                    assert!(
                        res.abs() / scale <= 1e-4,
                        "row {row} at {probe:?}: relative residual {}",
                        res.abs() / scale
                    );
                }
            }
        }
    }

    #[test]
    fn betti_reciprocity_closes_over_the_full_boundary() {
        let domain = make_cap(1.0, 24).unwrap();
        let first = manufacture(&domain, 3, 1).unwrap();
        let second = manufacture(&domain, 2, 9).unwrap();
        let mut integral = 0.0;
        let mut magnitude = 0.0f64;
        for quad in [&domain.data, &domain.hidden] {
            for ((node, w), normal) in quad
                .nodes
                .iter()
                .zip(&quad.weights)
                .zip(&quad.normals)
            {
                let u = first.field(*node).unwrap();
                let v = second.field(*node).unwrap();
                let tu = first.traction(*node, *normal).unwrap();
                let tv = second.traction(*node, *normal).unwrap();
                let term = w * (tu.dot(&v) - tv.dot(&u));
                integral += term;
                magnitude += w * (tu.dot(&v).abs() + tv.dot(&u).abs());
            }
        }
        assert!(
            integral.abs() / magnitude <= 1e-6,
            "reciprocity defect {}",
            integral.abs() / magnitude
        );
    }

    #[test]
    fn boundary_representation_reproduces_the_field() {
        let spacing_errors: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&res| {
                let domain = make_cap(1.0, res).unwrap();
                let solution = manufacture(&domain, 3, 1).unwrap();
                let params = MaterialParams::reference();
                let wn = params.wave_numbers().unwrap();
                let kc = params.kernel_coeffs(&wn).unwrap();
                let mut boundary: Vec<([f64; 3], f64, [f64; 3], Vector6, Vector6)> = Vec::new();
                for quad in [&domain.data, &domain.hidden] {
                    for ((node, w), normal) in
                        quad.nodes.iter().zip(&quad.weights).zip(&quad.normals)
                    {
                        let u = solution.field(*node).unwrap();
                        let tu = solution.traction(*node, *normal).unwrap();
                        boundary.push((*node, *w, *normal, u, tu));
                    }
                }
                let mut worst = 0.0f64;
                for probe in TEN_PROBES.iter().take(5) {
                    let mut acc = Vector6::zeros();
                    for (node, w, normal, u, tu) in &boundary {
                        let psi = psi_matrix(*node, *probe, &kc, &wn).unwrap();
                        let tpsi = stress_apply(&psi, *normal, &params).unwrap();
                        acc += *w * (psi.value.tr_mul(tu) - tpsi.value.tr_mul(u));
                    }
                    let exact = solution.field(*probe).unwrap();
                    worst = worst.max((acc - exact).norm() / exact.norm());
                }
                worst
            })
            .collect();
        assert!(
            spacing_errors[1] <= 1e-3,
            "representation error {} at 2048 nodes",
            spacing_errors[1]
        );
        assert!(
            spacing_errors[0] / spacing_errors[1] >= 4.0,
            "halving the spacing only gained {}x",
            spacing_errors[0] / spacing_errors[1]
        );
    }
}
