//! Rays, triangle intersection and the per-frame world-space geometry.

use crate::scene::Scene;
use crate::Vec3;

/// Self-intersection offset for secondary and shadow rays, in world units.
pub const RAY_EPSILON: f64 = 1e-4;

/// Hits closer than this are considered tied; the lower (mesh, triangle)
/// index wins.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    direction: Vec3,
}

impl Ray {
    /// Ray from `origin` along `direction`, which is normalized here.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Ray {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Mirror `direction` about `normal`: `d - 2 (d . n) n`, renormalized.
pub fn reflect(direction: Vec3, normal: Vec3) -> Vec3 {
    (direction - normal * (2.0 * direction.dot(&normal))).normalize()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitRecord {
    pub t: f64,
    pub point: Vec3,
    /// Unit geometric normal, flipped to face the incoming ray.
    pub normal: Vec3,
    pub mesh: usize,
    pub triangle: usize,
    pub material: usize,
    /// Camera projection of the hit's rest-pose position.
    pub uv: (f64, f64),
}

#[derive(Clone, Debug)]
struct Triangle {
    v0: Vec3,
    edge1: Vec3,
    edge2: Vec3,
    normal: Vec3,
    rest: [Vec3; 3],
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn around(points: &[Vec3]) -> Aabb {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let pad = Vec3::repeat(1e-9 * (1.0 + (hi - lo).amax()));
        Aabb {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    // Conservative slab test; only ever used to skip whole meshes.
    fn hit(&self, ray: &Ray, t_min: f64, t_max: f64) -> bool {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for a in 0..3 {
            let inv = 1.0 / ray.direction[a];
            let mut near = (self.lo[a] - ray.origin[a]) * inv;
            let mut far = (self.hi[a] - ray.origin[a]) * inv;
            if near.is_nan() || far.is_nan() {
                // Origin on a slab plane with a parallel ray; keep it.
                continue;
            }
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
struct MeshInstance {
    material: usize,
    bounds: Aabb,
    triangles: Vec<Triangle>,
}

/// World-space snapshot of every mesh at one frame, ready for ray queries.
///
/// Meshes are tested in index order and triangles in file order; that order is
/// what makes the tie-break deterministic.
#[derive(Clone, Debug)]
pub struct FrameGeometry<'a> {
    scene: &'a Scene,
    meshes: Vec<MeshInstance>,
}

impl<'a> FrameGeometry<'a> {
    pub fn new(scene: &'a Scene, frame: f64) -> Self {
        let meshes = scene
            .meshes()
            .iter()
            .enumerate()
            .map(|(i, mesh)| {
                let world = scene.mesh_vertices_at(i, frame);
                let rest = scene.mesh_vertices_at(i, 0.0);
                let triangles = mesh
                    .geometry
                    .triangles
                    .iter()
                    .map(|t| {
                        let [a, b, c] = t.map(|k| world[k as usize]);
                        let edge1 = b - a;
                        let edge2 = c - a;
                        Triangle {
                            v0: a,
                            edge1,
                            edge2,
                            normal: edge1.cross(&edge2).normalize(),
                            rest: t.map(|k| rest[k as usize]),
                        }
                    })
                    .collect();
                MeshInstance {
                    material: mesh.material,
                    bounds: Aabb::around(&world),
                    triangles,
                }
            })
            .collect();
        FrameGeometry { scene, meshes }
    }

    pub fn scene(&self) -> &'a Scene {
        self.scene
    }

    /// Nearest hit with `t > RAY_EPSILON`.
    pub fn intersect(&self, ray: &Ray) -> Option<HitRecord> {
        self.intersect_range(ray, RAY_EPSILON, f64::INFINITY)
    }

    pub fn intersect_range(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<HitRecord> {
        let mut best: Option<(f64, usize, usize, f64, f64)> = None;
        for (mi, mesh) in self.meshes.iter().enumerate() {
            let limit = best.map_or(t_max, |b| b.0);
            if !mesh.bounds.hit(ray, t_min, limit) {
                continue;
            }
            for (ti, tri) in mesh.triangles.iter().enumerate() {
                if let Some((t, b1, b2)) = moller_trumbore(ray, tri) {
                    if t <= t_min || t >= t_max {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bt, ..)) => t < bt - TIE_EPSILON,
                    };
                    if better {
                        best = Some((t, mi, ti, b1, b2));
                    }
                }
            }
        }
        best.map(|(t, mi, ti, b1, b2)| {
            let tri = &self.meshes[mi].triangles[ti];
            let normal = if tri.normal.dot(&ray.direction) > 0.0 {
                -tri.normal
            } else {
                tri.normal
            };
            let rest = tri.rest[0] * (1.0 - b1 - b2) + tri.rest[1] * b1 + tri.rest[2] * b2;
            // Surfaces behind the camera at rest were never painted; any fixed
            // texel will do.
            let uv = self.scene.camera().project(rest).unwrap_or((0.5, 0.5));
            HitRecord {
                t,
                point: ray.at(t),
                normal,
                mesh: mi,
                triangle: ti,
                material: self.meshes[mi].material,
                uv,
            }
        })
    }

    /// True when anything blocks the open segment `(RAY_EPSILON, t_max)`.
    pub fn occluded(&self, ray: &Ray, t_max: f64) -> bool {
        for mesh in &self.meshes {
            if !mesh.bounds.hit(ray, RAY_EPSILON, t_max) {
                continue;
            }
            for tri in &mesh.triangles {
                if let Some((t, ..)) = moller_trumbore(ray, tri) {
                    if t > RAY_EPSILON && t < t_max {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Returns `(t, b1, b2)` with barycentrics relative to vertices 1 and 2.
/// Edges are inclusive, so a ray through a shared edge hits both triangles.
fn moller_trumbore(ray: &Ray, tri: &Triangle) -> Option<(f64, f64, f64)> {
    let pvec = ray.direction.cross(&tri.edge2);
    let det = tri.edge1.dot(&pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = ray.origin - tri.v0;
    let b1 = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&b1) {
        return None;
    }
    let qvec = tvec.cross(&tri.edge1);
    let b2 = ray.direction.dot(&qvec) * inv_det;
    if b2 < 0.0 || b1 + b2 > 1.0 {
        return None;
    }
    Some((tri.edge2.dot(&qvec) * inv_det, b1, b2))
}
