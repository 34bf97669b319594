//! Bloch-sphere directions, measurement triads and the two-party reduction.
//!
//! A [`Triad`] is a right-handed orthonormal frame `(Ω⁰, Ω¹, Ω²)`; each axis
//! is the direction of one of a party's three measurements. Two triads that
//! share a singlet can be brought to a canonical form described by three
//! angles with [`canonicalize_pair`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use rand::Rng;

use crate::error::{domain, Result};

/// Tolerance on unit norms, orthogonality and determinants at construction.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Tolerance used when validating caller-supplied rotation matrices.
pub const ROTATION_TOL: f64 = 1e-10;

pub type Matrix3 = [[f64; 3]; 3];

#[inline]
pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
fn mat_vec(m: &Matrix3, v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn det(m: &Matrix3) -> f64 {
    dot(&m[0], &cross(&m[1], &m[2]))
}

/// A unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub const X: BlochVector = BlochVector([1.0, 0.0, 0.0]);
    pub const Y: BlochVector = BlochVector([0.0, 1.0, 0.0]);
    pub const Z: BlochVector = BlochVector([0.0, 0.0, 1.0]);

    /// Builds a direction, rejecting anything whose norm differs from one by
    /// more than [`ORTHONORMAL_TOL`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm2 = x * x + y * y + z * z;
        if !norm2.is_finite() || (norm2 - 1.0).abs() > ORTHONORMAL_TOL {
            return domain(format!("({x}, {y}, {z}) is not a unit vector"));
        }
        Ok(BlochVector([x, y, z]))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = dot(&v, &v).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return domain("cannot normalize a zero or non-finite vector");
        }
        Ok(BlochVector(scale(&v, 1.0 / norm)))
    }

    /// Direction with polar angle `theta` and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        BlochVector([
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ])
    }

    pub(crate) fn from_raw(v: [f64; 3]) -> Self {
        BlochVector(v)
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn neg(&self) -> BlochVector {
        BlochVector(scale(&self.0, -1.0))
    }
}

/// Polar angle, azimuth and twist of a triad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriadAngles {
    pub theta: f64,
    pub phi: f64,
    pub chi: f64,
}

impl TriadAngles {
    pub fn new(theta: f64, phi: f64, chi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return domain(format!("theta = {theta} outside [0, π]"));
        }
        if !(-PI..=PI).contains(&phi) {
            return domain(format!("phi = {phi} outside [-π, π]"));
        }
        if !(-PI..=PI).contains(&chi) {
            return domain(format!("chi = {chi} outside [-π, π]"));
        }
        Ok(TriadAngles { theta, phi, chi })
    }
}

/// Three mutually orthogonal measurement directions forming a right-handed
/// frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triad {
    axes: [BlochVector; 3],
}

impl Triad {
    pub fn new(axes: [BlochVector; 3]) -> Result<Self> {
        let t = Triad { axes };
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = t.axes[i].dot(&t.axes[j]);
            if d.abs() > ORTHONORMAL_TOL {
                return domain(format!("axes {i} and {j} are not orthogonal (dot = {d:e})"));
            }
        }
        let d = det(&t.matrix());
        if (d - 1.0).abs() > ORTHONORMAL_TOL {
            return domain(format!("triad is not right-handed (det = {d})"));
        }
        Ok(t)
    }

    pub(crate) fn from_rows_unchecked(rows: Matrix3) -> Self {
        Triad {
            axes: rows.map(BlochVector::from_raw),
        }
    }

    /// The reference frame `Ω⁰ = -y`, `Ω¹ = x`, `Ω² = z`.
    pub fn reference() -> Self {
        Triad::from_rows_unchecked([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn axis(&self, setting: usize) -> &BlochVector {
        &self.axes[setting]
    }

    pub fn axes(&self) -> &[BlochVector; 3] {
        &self.axes
    }

    /// Rows are the three axes.
    pub fn matrix(&self) -> Matrix3 {
        self.axes.map(|a| a.0)
    }
}

/// Builds the triad for the given angles:
///
/// ```text
/// Ω⁰ = x' cos χ + y' sin χ
/// Ω¹ = -x' sin χ + y' cos χ
/// Ω² = (sin θ cos φ, sin θ sin φ, cos θ)
/// ```
///
/// with `x' = (sin φ, -cos φ, 0)` and `y' = (cos θ cos φ, cos θ sin φ, -sin θ)`.
pub fn triad_from_angles(angles: TriadAngles) -> Result<Triad> {
    let TriadAngles { theta, phi, chi } = TriadAngles::new(angles.theta, angles.phi, angles.chi)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (sc, cc) = chi.sin_cos();
    let xp = [sp, -cp, 0.0];
    let yp = [ct * cp, ct * sp, -st];
    let o0 = [
        xp[0] * cc + yp[0] * sc,
        xp[1] * cc + yp[1] * sc,
        xp[2] * cc + yp[2] * sc,
    ];
    let o1 = [
        -xp[0] * sc + yp[0] * cc,
        -xp[1] * sc + yp[1] * cc,
        -xp[2] * sc + yp[2] * cc,
    ];
    let o2 = [st * cp, st * sp, ct];
    Triad::new([
        BlochVector::from_raw(o0),
        BlochVector::from_raw(o1),
        BlochVector::from_raw(o2),
    ])
}

/// Recovers `(θ, φ, χ)` from a triad. At the poles of `Ω²` the azimuth is
/// set to zero and the twist absorbs the remaining rotation.
pub fn triad_angles(t: &Triad) -> TriadAngles {
    let o2 = t.axes[2].0;
    let theta = o2[2].clamp(-1.0, 1.0).acos();
    let transverse = (o2[0] * o2[0] + o2[1] * o2[1]).sqrt();
    let phi = if transverse < 1e-15 {
        0.0
    } else {
        o2[1].atan2(o2[0])
    };
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let xp = [sp, -cp, 0.0];
    let yp = [ct * cp, ct * sp, -st];
    let o0 = t.axes[0].0;
    let chi = dot(&o0, &yp).atan2(dot(&o0, &xp));
    TriadAngles { theta, phi, chi }
}

/// A proper rotation of three-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3);

impl Rotation {
    /// Accepts `m` if it is orthogonal with determinant `+1` within
    /// [`ROTATION_TOL`].
    pub fn new(m: Matrix3) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                let got = dot(&m[i], &m[j]);
                if !got.is_finite() || (got - expected).abs() > ROTATION_TOL {
                    return domain("rotation matrix is not orthogonal");
                }
            }
        }
        if (det(&m) - 1.0).abs() > ROTATION_TOL {
            return domain("rotation matrix does not have determinant +1");
        }
        Ok(Rotation(m))
    }

    pub fn identity() -> Self {
        Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    /// Rotation represented by the quaternion `w + xi + yj + zk`, which is
    /// normalized first.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Rotation([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ])
    }

    /// Uniformly distributed over the rotation group (Shoemake's subgroup
    /// algorithm for unit quaternions).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let u3: f64 = rng.gen();
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let (s2, c2) = (2.0 * PI * u2).sin_cos();
        let (s3, c3) = (2.0 * PI * u3).sin_cos();
        Rotation::from_quaternion(b * c3, a * s2, a * c2, b * s3)
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.0
    }

    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        BlochVector(mat_vec(&self.0, &v.0))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(mat_mul(&self.0, &other.0))
    }
}

/// Rotates every axis of `t`.
pub fn rotate_triad(rotation: &Rotation, t: &Triad) -> Triad {
    Triad {
        axes: t.axes.map(|a| rotation.apply(&a)),
    }
}

/// Validates `matrix` as a proper rotation and applies it to `t`.
pub fn apply_rotation(matrix: &Matrix3, t: &Triad) -> Result<Triad> {
    Ok(rotate_triad(&Rotation::new(*matrix)?, t))
}

/// A uniformly random orientation of the reference triad.
pub fn haar_random_triad<R: Rng + ?Sized>(rng: &mut R) -> Triad {
    rotate_triad(&Rotation::random(rng), &Triad::reference())
}

/// Reduced coordinates of a pair of triads sharing a singlet.
///
/// The region `θ ∈ [0, π/3]`, `χ₋ ∈ [0, π/4]`, `χ₊ ∈ [0, π/2]` is enforced
/// on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalBipartite {
    pub theta: f64,
    pub chi_minus: f64,
    pub chi_plus: f64,
}

impl CanonicalBipartite {
    pub fn new(theta: f64, chi_minus: f64, chi_plus: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_3).contains(&theta) {
            return domain(format!("theta = {theta} outside [0, π/3]"));
        }
        if !(0.0..=FRAC_PI_4).contains(&chi_minus) {
            return domain(format!("chi_minus = {chi_minus} outside [0, π/4]"));
        }
        if !(0.0..=FRAC_PI_2).contains(&chi_plus) {
            return domain(format!("chi_plus = {chi_plus} outside [0, π/2]"));
        }
        Ok(CanonicalBipartite {
            theta,
            chi_minus,
            chi_plus,
        })
    }

    pub fn chi1(&self) -> f64 {
        0.5 * (self.chi_plus + self.chi_minus)
    }

    pub fn chi2(&self) -> f64 {
        0.5 * (self.chi_plus - self.chi_minus)
    }

    /// The two canonical triads: the first party's `Ω²` is the z axis and
    /// the second party's `Ω²` lies in the xz plane at angle `θ` from it.
    pub fn triads(&self) -> (Triad, Triad) {
        let (s1, c1) = self.chi1().sin_cos();
        let (s2, c2) = self.chi2().sin_cos();
        let (st, ct) = self.theta.sin_cos();
        let first = Triad::from_rows_unchecked([[s1, -c1, 0.0], [c1, s1, 0.0], [0.0, 0.0, 1.0]]);
        let second = Triad::from_rows_unchecked([
            [s2 * ct, -c2, -s2 * st],
            [c2 * ct, s2, -c2 * st],
            [st, 0.0, ct],
        ]);
        (first, second)
    }
}

/// Where a canonical measurement slot came from: the original setting index
/// and the sign applied to it (a sign of -1 swaps that measurement's outcome
/// labels).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedSetting {
    pub setting: usize,
    pub sign: i8,
}

/// The relabelings and global frame change performed by
/// [`canonicalize_pair`].
///
/// Canonical party `p`, slot `k` is `sign · frame · Ω[party_order[p]][setting]`.
/// `frame` is orthogonal; when it is a reflection (`det = -1`) the slot signs
/// restore right-handedness. Singlet correlations depend only on inner
/// products, so the canonical pair has the same violation structure as the
/// input, up to the recorded relabelings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelabelingRecord {
    pub party_order: [usize; 2],
    pub slots: [[SignedSetting; 3]; 2],
    pub frame: Matrix3,
    /// Quarter turns `χ → χ - π/2` applied to each canonical party, mod 4.
    pub quarter_turns: [u8; 2],
}

impl RelabelingRecord {
    pub fn reflected(&self) -> bool {
        det(&self.frame) < 0.0
    }

    pub fn swapped(&self) -> bool {
        self.party_order == [1, 0]
    }

    /// Replays the record on the original pair.
    pub fn apply(&self, t1: &Triad, t2: &Triad) -> (Triad, Triad) {
        let originals = [t1, t2];
        let build = |p: usize| {
            let source = originals[self.party_order[p]];
            let rows = self.slots[p].map(|s| {
                let v = mat_vec(&self.frame, &source.axes[s.setting].0);
                scale(&v, f64::from(s.sign))
            });
            Triad::from_rows_unchecked(rows)
        };
        (build(0), build(1))
    }
}

#[derive(Clone, Copy)]
struct Slot {
    setting: usize,
    sign: i8,
    v: [f64; 3],
}

impl Slot {
    fn negate(&mut self) {
        self.sign = -self.sign;
        self.v = scale(&self.v, -1.0);
    }
}

struct Reduction {
    parties: [[Slot; 3]; 2],
    party_order: [usize; 2],
    frame: Matrix3,
    quarter_turns: [u8; 2],
}

impl Reduction {
    fn transform(&mut self, m: &Matrix3) {
        for party in self.parties.iter_mut() {
            for slot in party.iter_mut() {
                slot.v = mat_vec(m, &slot.v);
            }
        }
        self.frame = mat_mul(m, &self.frame);
    }

    /// `χ → χ - π/2`, i.e. `(Ω⁰, Ω¹) → (-Ω¹, Ω⁰)`.
    fn quarter_turn(&mut self, p: usize) {
        let party = &mut self.parties[p];
        let mut s0 = party[1];
        s0.negate();
        party[1] = party[0];
        party[0] = s0;
        self.quarter_turns[p] = (self.quarter_turns[p] + 1) % 4;
    }

    /// Mirror `y → -y` combined with an outcome flip of both `Ω⁰`; sends
    /// `(χ₁, χ₂) → (-χ₁, -χ₂)`.
    fn reflect(&mut self) {
        self.transform(&[[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
        for party in self.parties.iter_mut() {
            party[0].negate();
        }
    }

    /// Exchanges the parties' roles; sends `(χ₁, χ₂) → (χ₂, χ₁)`.
    fn swap(&mut self, theta: f64) {
        let m = Rotation::about_z(PI).compose(&Rotation::about_y(-theta));
        self.transform(&m.0);
        self.parties.swap(0, 1);
        self.party_order.swap(0, 1);
        self.quarter_turns.swap(0, 1);
        for p in 0..2 {
            self.quarter_turn(p);
            self.quarter_turn(p);
        }
    }

    /// `(θ, χ₁, χ₂)` read off the current vectors.
    fn angles(&self) -> (f64, f64, f64) {
        let [a, b] = &self.parties;
        let theta = b[2].v[0].atan2(b[2].v[2]);
        let chi1 = a[0].v[0].atan2(-a[0].v[1]);
        let (st, ct) = theta.sin_cos();
        let chi2 = dot(&b[0].v, &[ct, 0.0, -st]).atan2(-b[0].v[1]);
        (theta, chi1, chi2)
    }

    fn reduce_twist(&mut self, p: usize, chi: f64) {
        let k = (chi / FRAC_PI_2).round() as i64;
        for _ in 0..k.rem_euclid(4) {
            self.quarter_turn(p);
        }
    }
}

/// Picks the remaining two settings as `Ω⁰`, `Ω¹` in index order and flips
/// `Ω⁰` if needed so the frame is right-handed.
fn party_slots(t: &Triad, axis: usize, sign: i8) -> [Slot; 3] {
    let mut rest = (0..3).filter(|&k| k != axis);
    let (k0, k1) = (rest.next().unwrap(), rest.next().unwrap());
    let slot = |setting: usize, sign: i8| Slot {
        setting,
        sign,
        v: scale(&t.axes[setting].0, f64::from(sign)),
    };
    let mut slots = [slot(k0, 1), slot(k1, 1), slot(axis, sign)];
    if det(&slots.map(|s| s.v)) < 0.0 {
        slots[0].negate();
    }
    slots
}

/// Reduces a pair of triads to `(θ, χ₋, χ₊)` in the canonical region.
///
/// The pair of axes with the largest `|Ω₁ⁱ · Ω₂ʲ|` becomes `(Ω₁², Ω₂²)`
/// (lowest indices win ties), so `cos θ ≥ 1/√3`. Both frames are then
/// rotated so that `Ω₁²` is the z axis and `Ω₂²` lies in the xz plane, and
/// the twists are folded into the region using quarter turns, a mirror
/// combined with outcome flips, and an exchange of the parties.
pub fn canonicalize_pair(t1: &Triad, t2: &Triad) -> (CanonicalBipartite, RelabelingRecord) {
    let mut best = (0, 0, -1.0);
    for i in 0..3 {
        for j in 0..3 {
            let d = t1.axes[i].dot(&t2.axes[j]).abs();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, _) = best;
    let sign: i8 = if t1.axes[i].dot(&t2.axes[j]) < 0.0 {
        -1
    } else {
        1
    };

    let mut work = Reduction {
        parties: [party_slots(t1, i, 1), party_slots(t2, j, sign)],
        party_order: [0, 1],
        frame: *Rotation::identity().matrix(),
        quarter_turns: [0, 0],
    };

    let ez = work.parties[0][2].v;
    let b2 = work.parties[1][2].v;
    let transverse = [
        b2[0] - dot(&b2, &ez) * ez[0],
        b2[1] - dot(&b2, &ez) * ez[1],
        b2[2] - dot(&b2, &ez) * ez[2],
    ];
    let tnorm = dot(&transverse, &transverse).sqrt();
    let ex = if tnorm > 1e-14 {
        scale(&transverse, 1.0 / tnorm)
    } else {
        // Aligned axes: any transverse direction works; Ω¹ of the first
        // party makes χ₁ = 0.
        work.parties[0][1].v
    };
    let ey = cross(&ez, &ex);
    work.transform(&[ex, ey, ez]);

    let (_, chi1, chi2) = work.angles();
    work.reduce_twist(0, chi1);
    work.reduce_twist(1, chi2);

    let (_, chi1, chi2) = work.angles();
    if chi1 + chi2 < 0.0 {
        work.reflect();
    }
    let (theta, chi1, chi2) = work.angles();
    if chi1 - chi2 < 0.0 {
        work.swap(theta);
    }
    let (_, chi1, chi2) = work.angles();
    if chi1 - chi2 > FRAC_PI_4 {
        work.quarter_turn(0);
        work.reflect();
    }

    let (theta, chi1, chi2) = work.angles();
    let canonical = CanonicalBipartite {
        theta: theta.clamp(0.0, FRAC_PI_3),
        chi_minus: (chi1 - chi2).clamp(0.0, FRAC_PI_4),
        chi_plus: (chi1 + chi2).clamp(0.0, FRAC_PI_2),
    };
    let record = RelabelingRecord {
        party_order: work.party_order,
        slots: work.parties.map(|p| {
            p.map(|s| SignedSetting {
                setting: s.setting,
                sign: s.sign,
            })
        }),
        frame: work.frame,
        quarter_turns: work.quarter_turns,
    };
    (canonical, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_vec(v: &BlochVector, expected: [f64; 3], tol: f64) {
        for (a, b) in v.components().iter().zip(expected) {
            assert!((a - b).abs() < tol, "{v:?} vs {expected:?}");
        }
    }

    fn assert_triads_close(a: &Triad, b: &Triad, tol: f64) {
        for k in 0..3 {
            assert_vec(a.axis(k), b.axis(k).components(), tol);
        }
    }

    #[test]
    fn angles_zero_give_reference_frame() {
        let t = triad_from_angles(TriadAngles::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert_vec(t.axis(0), [0.0, -1.0, 0.0], 1e-15);
        assert_vec(t.axis(1), [1.0, 0.0, 0.0], 1e-15);
        assert_vec(t.axis(2), [0.0, 0.0, 1.0], 1e-15);
        assert_eq!(t, Triad::reference());
    }

    #[test]
    fn equatorial_polar_axis() {
        let t = triad_from_angles(TriadAngles::new(FRAC_PI_2, 0.0, 0.0).unwrap()).unwrap();
        assert_vec(t.axis(2), [1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn generic_angles_are_orthonormal_and_right_handed() {
        let t = triad_from_angles(TriadAngles::new(PI / 3.0, PI / 4.0, PI / 8.0).unwrap()).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(t.axis(i).dot(t.axis(j)).abs() < 1e-12);
        }
        for k in 0..3 {
            assert!((t.axis(k).dot(t.axis(k)) - 1.0).abs() < 1e-12);
        }
        assert!((det(&t.matrix()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_angles_rejected() {
        assert!(TriadAngles::new(-0.1, 0.0, 0.0).is_err());
        assert!(TriadAngles::new(0.0, 4.0, 0.0).is_err());
        assert!(TriadAngles::new(0.0, 0.0, -3.5).is_err());
        let bad = TriadAngles {
            theta: 3.5,
            phi: 0.0,
            chi: 0.0,
        };
        assert!(triad_from_angles(bad).is_err());
    }

    #[test]
    fn bloch_vector_rejects_non_unit() {
        assert!(BlochVector::new(1.0, 1.0, 0.0).is_err());
        assert!(BlochVector::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(BlochVector::new(0.6, 0.8, 0.0).is_ok());
    }

    #[test]
    fn triad_rejects_left_handed_and_skewed_frames() {
        let x = BlochVector::X;
        let y = BlochVector::Y;
        let z = BlochVector::Z;
        assert!(Triad::new([x, y, z]).is_ok());
        assert!(Triad::new([y, x, z]).is_err());
        assert!(Triad::new([x, x, z]).is_err());
    }

    #[test]
    fn identity_rotation_is_noop() {
        let t = triad_from_angles(TriadAngles::new(0.4, -1.0, 2.0).unwrap()).unwrap();
        let r = apply_rotation(Rotation::identity().matrix(), &t).unwrap();
        assert_eq!(r, t);
    }

    #[test]
    fn half_turn_about_z_flips_x() {
        let r = Rotation::about_z(PI);
        assert_vec(&r.apply(&BlochVector::X), [-1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn non_orthogonal_matrix_rejected() {
        let t = Triad::reference();
        let shear = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(apply_rotation(&shear, &t).is_err());
        let mirror = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(apply_rotation(&mirror, &t).is_err());
    }

    #[test]
    fn identical_triads_canonicalize_to_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = haar_random_triad(&mut rng);
            let (c, _) = canonicalize_pair(&t, &t);
            assert!(c.theta.abs() < 1e-12, "{c:?}");
            assert!(c.chi_minus.abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn tilt_about_shared_axis_becomes_twist() {
        // Rotating about y keeps Ω⁰ = -y shared, so that pair is the closest
        // and the π/6 tilt of the other two axes shows up as χ₋.
        let t1 = Triad::reference();
        let t2 = rotate_triad(&Rotation::about_y(PI / 6.0), &t1);
        let (c, _) = canonicalize_pair(&t1, &t2);
        assert!(c.theta.abs() < 1e-12, "{c:?}");
        assert!((c.chi_minus - PI / 6.0).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn small_tilt_of_polar_axis_is_read_as_theta() {
        // Tilt Ω² by 0.2 in the xz plane while twisting the pair about z by
        // π/4 so that no transverse axis stays closer than the polar one.
        let t1 = Triad::reference();
        let t2 = rotate_triad(
            &Rotation::about_y(0.2).compose(&Rotation::about_z(FRAC_PI_4)),
            &t1,
        );
        let (c, _) = canonicalize_pair(&t1, &t2);
        assert!((c.theta - 0.2).abs() < 1e-12, "{c:?}");
        assert!((c.chi_minus - FRAC_PI_4).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn canonical_triads_match_parametrization() {
        let c = CanonicalBipartite::new(0.7, 0.3, 1.1).unwrap();
        let (a, b) = c.triads();
        let expected_a = triad_from_angles(TriadAngles::new(0.0, 0.0, c.chi1()).unwrap()).unwrap();
        let expected_b = triad_from_angles(TriadAngles::new(0.7, 0.0, c.chi2()).unwrap()).unwrap();
        assert_triads_close(&a, &expected_a, 1e-15);
        assert_triads_close(&b, &expected_b, 1e-15);
    }

    #[test]
    fn record_replays_onto_canonical_triads() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let t1 = haar_random_triad(&mut rng);
            let t2 = haar_random_triad(&mut rng);
            let (c, record) = canonicalize_pair(&t1, &t2);
            let (a, b) = record.apply(&t1, &t2);
            let (ea, eb) = c.triads();
            assert_triads_close(&a, &ea, 1e-9);
            assert_triads_close(&b, &eb, 1e-9);
            Triad::new(*a.axes()).expect("replayed first triad is valid");
            Triad::new(*b.axes()).expect("replayed second triad is valid");
            assert_eq!(record.reflected(), det(&record.frame) < 0.0);
        }
    }

    #[test]
    fn canonical_region_holds_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let t1 = haar_random_triad(&mut rng);
            let t2 = haar_random_triad(&mut rng);
            let (c, _) = canonicalize_pair(&t1, &t2);
            CanonicalBipartite::new(c.theta, c.chi_minus, c.chi_plus).unwrap();
            // cos θ is the largest |Ω₁ⁱ·Ω₂ʲ|.
            let max_overlap = (0..9)
                .map(|k| t1.axis(k / 3).dot(t2.axis(k % 3)).abs())
                .fold(0.0, f64::max);
            assert!((c.theta.cos() - max_overlap).abs() < 1e-12);
            assert!(c.theta.cos() >= 0.5);
        }
    }

    #[test]
    fn haar_triads_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let t = haar_random_triad(&mut rng);
            Triad::new(*t.axes()).unwrap();
        }
    }
}
