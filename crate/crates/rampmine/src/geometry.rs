//! Planar road geometry.
//!
//! Lanes are modeled as polylines (left border, right border, centerline)
//! in a metric map frame. The workhorse is [`Polyline::project`], which maps
//! a map point to arc-length coordinates: `s` along the polyline and a
//! signed lateral offset `d` (positive to the left of the direction of
//! increasing `s`). Points beyond the polyline ends are extrapolated
//! linearly along the terminal segment and flagged.

use std::collections::BTreeSet;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3-d cross product; positive when `o` points to
    /// the left of `self`.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Arc-length position relative to a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetPosition {
    /// Arc length along the polyline. Within `[0, total_length]` for
    /// projections inside the extent, outside of it when extrapolated.
    pub s: f64,
    /// Signed lateral offset, positive to the left of travel direction.
    pub d: f64,
    /// True when the foot point lies beyond the first or last vertex.
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    /// cum[i] is the arc length from vertex 0 to vertex i.
    cum: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Geometry(format!(
                "polyline needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        for p in &vertices {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::Geometry("polyline vertex is not finite".into()));
            }
        }
        let mut cum = Vec::with_capacity(vertices.len());
        cum.push(0.0);
        for w in vertices.windows(2) {
            let len = w[0].dist(w[1]);
            if len == 0.0 {
                return Err(Error::Geometry(
                    "polyline has consecutive duplicate vertices".into(),
                ));
            }
            cum.push(cum.last().unwrap() + len);
        }
        Ok(Polyline { vertices, cum })
    }

    pub fn from_coords(coords: &[[f64; 2]]) -> Result<Self> {
        Polyline::new(coords.iter().copied().map(Point::from).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn total_length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Point at arc length `s`; extrapolates linearly beyond the ends.
    pub fn point_at(&self, s: f64) -> Point {
        let n = self.vertices.len();
        if s <= 0.0 {
            let dir = self.segment_dir(0);
            return self.vertices[0] + dir * s;
        }
        if s >= self.total_length() {
            let dir = self.segment_dir(n - 2);
            return self.vertices[n - 1] + dir * (s - self.total_length());
        }
        let i = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        };
        let t = (s - self.cum[i]) / (self.cum[i + 1] - self.cum[i]);
        self.vertices[i] + (self.vertices[i + 1] - self.vertices[i]) * t
    }

    fn segment_dir(&self, i: usize) -> Point {
        let d = self.vertices[i + 1] - self.vertices[i];
        d * (1.0 / d.norm())
    }

    /// Projects `p` onto the polyline.
    ///
    /// The foot point is the closest point on the polyline; ties between
    /// segments are broken toward the smaller `s`. Beyond the ends the
    /// terminal segment is extended linearly and the result is flagged
    /// as extrapolated (with `s < 0` or `s > total_length`).
    pub fn project(&self, p: Point) -> FrenetPosition {
        let n = self.vertices.len();
        let mut best_d2 = f64::INFINITY;
        let mut best_seg = 0usize;
        let mut best_t = 0.0f64;
        for i in 0..n - 1 {
            let a = self.vertices[i];
            let b = self.vertices[i + 1];
            let ab = b - a;
            let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            let foot = a + ab * t;
            let d2 = (p - foot).dot(p - foot);
            if d2 + 1e-12 < best_d2 {
                best_d2 = d2;
                best_seg = i;
                best_t = t;
            }
        }

        let a = self.vertices[best_seg];
        let b = self.vertices[best_seg + 1];
        let ab = b - a;
        let t_raw = (p - a).dot(ab) / ab.dot(ab);
        let first = best_seg == 0;
        let last = best_seg == n - 2;
        let beyond_ends = (first && t_raw < 0.0) || (last && t_raw > 1.0);
        let (t, extrapolated) = if beyond_ends { (t_raw, true) } else { (best_t, false) };

        let foot = a + ab * t;
        let seg_len = ab.norm();
        let s = self.cum[best_seg] + t * seg_len;
        let off = p - foot;
        let d = off.norm() * ab.cross(off).signum();
        // cross == 0 means the point sits on the line; keep d a clean zero
        let d = if ab.cross(off) == 0.0 { 0.0 } else { d };
        FrenetPosition { s, d, extrapolated }
    }
}

/// Intersection of two closed segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentIntersection {
    pub point: Point,
    /// Parameter of the intersection on segment a, in [0, 1].
    pub u: f64,
    /// Parameter on segment b, in [0, 1].
    pub v: f64,
    /// True for collinear overlap, where the reported point is the
    /// midpoint of the shared stretch.
    pub degenerate: bool,
}

/// Intersects segments `a1..a2` and `b1..b2`.
///
/// Returns `None` for disjoint or parallel non-collinear segments.
/// Collinear overlapping segments yield the overlap midpoint with the
/// degenerate flag set.
pub fn segment_intersection(
    a1: Point,
    a2: Point,
    b1: Point,
    b2: Point,
) -> Option<SegmentIntersection> {
    const EPS: f64 = 1e-12;
    let r = a2 - a1;
    let s = b2 - b1;
    let qp = b1 - a1;
    let denom = r.cross(s);
    let r_len = r.norm();
    let s_len = s.norm();

    if r_len == 0.0 || s_len == 0.0 {
        return degenerate_point_case(a1, a2, b1, b2);
    }

    if denom.abs() > EPS * r_len * s_len {
        let u = qp.cross(s) / denom;
        let v = qp.cross(r) / denom;
        if (-EPS..=1.0 + EPS).contains(&u) && (-EPS..=1.0 + EPS).contains(&v) {
            return Some(SegmentIntersection {
                point: a1 + r * u,
                u: u.clamp(0.0, 1.0),
                v: v.clamp(0.0, 1.0),
                degenerate: false,
            });
        }
        return None;
    }

    // Parallel. Collinear only if b1 lies on the a-line.
    if qp.cross(r).abs() > EPS * r_len * (qp.norm() + r_len) {
        return None;
    }
    let rr = r.dot(r);
    let t0 = (b1 - a1).dot(r) / rr;
    let t1 = (b2 - a1).dot(r) / rr;
    let lo = t0.min(t1).max(0.0);
    let hi = t0.max(t1).min(1.0);
    if lo > hi {
        return None;
    }
    let mid = 0.5 * (lo + hi);
    let point = a1 + r * mid;
    let v = (point - b1).dot(s) / s.dot(s);
    Some(SegmentIntersection {
        point,
        u: mid,
        v: v.clamp(0.0, 1.0),
        degenerate: true,
    })
}

fn degenerate_point_case(
    a1: Point,
    a2: Point,
    b1: Point,
    b2: Point,
) -> Option<SegmentIntersection> {
    const EPS: f64 = 1e-9;
    let a_is_point = a1.dist(a2) == 0.0;
    let b_is_point = b1.dist(b2) == 0.0;
    if a_is_point && b_is_point {
        return (a1.dist(b1) <= EPS).then_some(SegmentIntersection {
            point: a1,
            u: 0.0,
            v: 0.0,
            degenerate: true,
        });
    }
    let (p, s1, s2, swap) = if a_is_point { (a1, b1, b2, false) } else { (b1, a1, a2, true) };
    let seg = s2 - s1;
    let t = ((p - s1).dot(seg) / seg.dot(seg)).clamp(0.0, 1.0);
    let foot = s1 + seg * t;
    if foot.dist(p) > EPS {
        return None;
    }
    let (u, v) = if swap { (t, 0.0) } else { (0.0, t) };
    Some(SegmentIntersection { point: p, u, v, degenerate: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaneKind {
    Mainline,
    OnRamp,
}

#[derive(
    Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LaneId(pub String);

impl LaneId {
    pub fn new(s: impl Into<String>) -> Self {
        LaneId(s.into())
    }
}

impl std::fmt::Display for LaneId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone)]
pub struct Lane {
    pub id: LaneId,
    pub kind: LaneKind,
    pub left_border: Polyline,
    pub right_border: Polyline,
    pub centerline: Polyline,
}

/// Road model of a merging area: mainline lanes plus exactly one on-ramp
/// (acceleration) lane, and the longitudinal reference for maneuver
/// positions along the ramp's left border.
#[derive(Debug, Clone)]
pub struct LaneModel {
    pub lanes: Vec<Lane>,
    /// Arc length on the on-ramp left border where the acceleration lane
    /// begins (the point where it joins the mainline edge).
    pub merge_start_s: f64,
    /// Arc length from `merge_start_s` to the end of the acceleration lane.
    pub merge_ref_length: f64,
}

impl LaneModel {
    pub fn new(lanes: Vec<Lane>, merge_start_s: f64, merge_ref_length: f64) -> Result<Self> {
        let model = LaneModel { lanes, merge_start_s, merge_ref_length };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let ramps = self.lanes.iter().filter(|l| l.kind == LaneKind::OnRamp).count();
        if ramps != 1 {
            return Err(Error::LaneModel(format!(
                "expected exactly one on-ramp lane, found {ramps}"
            )));
        }
        if !self.lanes.iter().any(|l| l.kind == LaneKind::Mainline) {
            return Err(Error::LaneModel("no mainline lane present".into()));
        }
        let mut ids = BTreeSet::new();
        for lane in &self.lanes {
            if !ids.insert(&lane.id) {
                return Err(Error::LaneModel(format!("duplicate lane id {}", lane.id)));
            }
        }
        let ramp_len = self.on_ramp().left_border.total_length();
        if !(0.0..ramp_len).contains(&self.merge_start_s) {
            return Err(Error::LaneModel(format!(
                "merge_start_s {} outside ramp left border [0, {ramp_len})",
                self.merge_start_s
            )));
        }
        if !self.merge_ref_length.is_finite() || self.merge_ref_length <= 0.0 {
            return Err(Error::LaneModel("merge_ref_length must be positive".into()));
        }
        Ok(())
    }

    pub fn on_ramp(&self) -> &Lane {
        self.lanes
            .iter()
            .find(|l| l.kind == LaneKind::OnRamp)
            .expect("validated: exactly one on-ramp")
    }

    pub fn mainlines(&self) -> impl Iterator<Item = &Lane> {
        self.lanes.iter().filter(|l| l.kind == LaneKind::Mainline)
    }

    pub fn lane(&self, id: &LaneId) -> Option<&Lane> {
        self.lanes.iter().find(|l| &l.id == id)
    }

    /// The mainline lane reached by crossing the on-ramp's left border,
    /// i.e. the one whose centerline is nearest the merge start point.
    pub fn adjacent_mainline(&self) -> &Lane {
        let anchor = self.on_ramp().left_border.point_at(self.merge_start_s);
        self.mainlines()
            .min_by(|a, b| {
                let da = a.centerline.project(anchor).d.abs();
                let db = b.centerline.project(anchor).d.abs();
                da.partial_cmp(&db).unwrap()
            })
            .expect("validated: at least one mainline")
    }

    /// All lane borders. Shared borders may appear once per lane that
    /// references them; distance computations are unaffected.
    pub fn markings(&self) -> impl Iterator<Item = &Polyline> {
        self.lanes
            .iter()
            .flat_map(|l| [&l.left_border, &l.right_border])
    }

    /// Lane width measured through the centerline foot point of `p`.
    pub fn lane_width_at(&self, lane: &Lane, p: Point) -> f64 {
        let center = lane.centerline.project(p);
        let foot = lane.centerline.point_at(center.s);
        lane.left_border.project(foot).d.abs() + lane.right_border.project(foot).d.abs()
    }

    /// Signed offset of `p` from the lane centerline (positive left).
    pub fn signed_center_offset(&self, lane: &Lane, p: Point) -> FrenetPosition {
        lane.centerline.project(p)
    }

    /// Lane containing `p`: the point must project inside both borders'
    /// extents and lie between them. Returns the first match in lane order.
    pub fn lane_at(&self, p: Point) -> Option<&Lane> {
        self.lanes.iter().find(|lane| {
            let left = lane.left_border.project(p);
            let right = lane.right_border.project(p);
            !left.extrapolated && !right.extrapolated && left.d <= 0.0 && right.d >= 0.0
        })
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: LaneFile =
            serde_json::from_str(&raw).map_err(|e| Error::json(path, e))?;
        file.try_into()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = LaneFile::from(self);
        let raw = serde_json::to_string_pretty(&file).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, raw).map_err(|e| Error::io(path, e))
    }
}

/// Position of `p` along the merging area, normalized so that 0 is the
/// start line of the acceleration lane and 1 its end. Values outside
/// [0, 1] are meaningful: maneuvers may begin before the start line or
/// finish past the lane end (extrapolated along the border).
pub fn normalized_maneuver_position(p: Point, model: &LaneModel) -> f64 {
    let proj = model.on_ramp().left_border.project(p);
    (proj.s - model.merge_start_s) / model.merge_ref_length
}

#[derive(Serialize, Deserialize)]
struct LaneFileEntry {
    id: String,
    kind: LaneKind,
    left_border: Vec<[f64; 2]>,
    right_border: Vec<[f64; 2]>,
    centerline: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct LaneFile {
    merge_start_s: f64,
    merge_ref_length: f64,
    lanes: Vec<LaneFileEntry>,
}

impl TryFrom<LaneFile> for LaneModel {
    type Error = Error;

    fn try_from(file: LaneFile) -> Result<Self> {
        let lanes = file
            .lanes
            .into_iter()
            .map(|e| {
                Ok(Lane {
                    id: LaneId::new(e.id),
                    kind: e.kind,
                    left_border: Polyline::from_coords(&e.left_border)?,
                    right_border: Polyline::from_coords(&e.right_border)?,
                    centerline: Polyline::from_coords(&e.centerline)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LaneModel::new(lanes, file.merge_start_s, file.merge_ref_length)
    }
}

impl From<&LaneModel> for LaneFile {
    fn from(model: &LaneModel) -> Self {
        LaneFile {
            merge_start_s: model.merge_start_s,
            merge_ref_length: model.merge_ref_length,
            lanes: model
                .lanes
                .iter()
                .map(|l| LaneFileEntry {
                    id: l.id.0.clone(),
                    kind: l.kind,
                    left_border: l.left_border.vertices().iter().map(|&p| p.into()).collect(),
                    right_border: l.right_border.vertices().iter().map(|&p| p.into()).collect(),
                    centerline: l.centerline.vertices().iter().map(|&p| p.into()).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn straight() -> Polyline {
        Polyline::from_coords(&[[0.0, 0.0], [100.0, 0.0]]).unwrap()
    }

    fn bent() -> Polyline {
        Polyline::from_coords(&[[0.0, 0.0], [50.0, 0.0], [50.0, 50.0]]).unwrap()
    }

    #[test]
    fn projects_interior_point() {
        let p = straight().project(Point::new(30.0, 2.0));
        assert_relative_eq!(p.s, 30.0);
        assert_relative_eq!(p.d, 2.0);
        assert!(!p.extrapolated);
    }

    #[test]
    fn sign_is_negative_right_of_travel() {
        let p = straight().project(Point::new(30.0, -2.0));
        assert_relative_eq!(p.d, -2.0);
    }

    #[test]
    fn endpoints_project_to_arc_length_bounds() {
        let line = straight();
        let a = line.project(Point::new(0.0, 0.0));
        assert_relative_eq!(a.s, 0.0);
        assert_relative_eq!(a.d, 0.0);
        assert!(!a.extrapolated);
        let b = line.project(Point::new(100.0, 0.0));
        assert_relative_eq!(b.s, 100.0);
        assert!(!b.extrapolated);
    }

    #[test]
    fn extrapolates_beyond_ends() {
        let line = straight();
        let before = line.project(Point::new(-10.0, 1.0));
        assert_relative_eq!(before.s, -10.0);
        assert_relative_eq!(before.d, 1.0);
        assert!(before.extrapolated);
        let after = line.project(Point::new(130.0, -0.5));
        assert_relative_eq!(after.s, 130.0);
        assert_relative_eq!(after.d, -0.5);
        assert!(after.extrapolated);
    }

    #[test]
    fn corner_tie_breaks_to_smaller_s() {
        // Equidistant from both segments of the bend; the foot is the
        // shared vertex, reported via the first segment.
        let p = bent().project(Point::new(49.0, 1.0));
        assert!(p.s <= 50.0);
        assert!(!p.extrapolated);
    }

    #[test]
    fn bent_polyline_second_leg() {
        let p = bent().project(Point::new(48.0, 20.0));
        assert_relative_eq!(p.s, 70.0);
        assert_relative_eq!(p.d, 2.0);
    }

    #[test]
    fn point_at_walks_and_extrapolates() {
        let line = bent();
        let mid = line.point_at(75.0);
        assert_relative_eq!(mid.x, 50.0);
        assert_relative_eq!(mid.y, 25.0);
        let beyond = line.point_at(110.0);
        assert_relative_eq!(beyond.x, 50.0);
        assert_relative_eq!(beyond.y, 60.0);
        let before = line.point_at(-5.0);
        assert_relative_eq!(before.x, -5.0);
    }

    #[test]
    fn rejects_degenerate_polylines() {
        assert!(Polyline::from_coords(&[[0.0, 0.0]]).is_err());
        assert!(Polyline::from_coords(&[[0.0, 0.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn crossing_segments_intersect_at_parameters() {
        let hit = segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, -1.0),
            Point::new(1.0, 1.0),
        )
        .unwrap();
        assert_relative_eq!(hit.u, 0.5);
        assert_relative_eq!(hit.v, 0.5);
        assert_relative_eq!(hit.point.x, 1.0);
        assert_relative_eq!(hit.point.y, 0.0);
        assert!(!hit.degenerate);
    }

    #[test]
    fn disjoint_segments_do_not_intersect() {
        assert!(segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        )
        .is_none());
    }

    #[test]
    fn collinear_overlap_reports_midpoint() {
        let hit = segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(6.0, 0.0),
        )
        .unwrap();
        assert!(hit.degenerate);
        assert_relative_eq!(hit.point.x, 3.0);
        assert_relative_eq!(hit.point.y, 0.0);
    }

    #[test]
    fn parallel_offset_segments_do_not_intersect() {
        assert!(segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(4.0, 1.0),
        )
        .is_none());
    }

    #[test]
    fn touching_endpoints_intersect() {
        let hit = segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(hit.u, 1.0);
        assert_relative_eq!(hit.v, 0.0);
    }

    fn test_model() -> LaneModel {
        // Straight 200 m ramp to the right of one mainline lane, start
        // line at s = 40, reference length 160.
        let mainline = Lane {
            id: LaneId::new("m1"),
            kind: LaneKind::Mainline,
            left_border: Polyline::from_coords(&[[0.0, 7.0], [300.0, 7.0]]).unwrap(),
            right_border: Polyline::from_coords(&[[0.0, 3.5], [300.0, 3.5]]).unwrap(),
            centerline: Polyline::from_coords(&[[0.0, 5.25], [300.0, 5.25]]).unwrap(),
        };
        let ramp = Lane {
            id: LaneId::new("ramp"),
            kind: LaneKind::OnRamp,
            left_border: Polyline::from_coords(&[[0.0, 3.5], [200.0, 3.5]]).unwrap(),
            right_border: Polyline::from_coords(&[[0.0, 0.0], [200.0, 0.0]]).unwrap(),
            centerline: Polyline::from_coords(&[[0.0, 1.75], [200.0, 1.75]]).unwrap(),
        };
        LaneModel::new(vec![mainline, ramp], 40.0, 160.0).unwrap()
    }

    #[test]
    fn maneuver_position_normalizes_against_start_line() {
        let model = test_model();
        assert_relative_eq!(
            normalized_maneuver_position(Point::new(40.0, 1.75), &model),
            0.0
        );
        assert_relative_eq!(
            normalized_maneuver_position(Point::new(200.0, 1.75), &model),
            1.0
        );
        assert_relative_eq!(
            normalized_maneuver_position(Point::new(120.0, 3.0), &model),
            0.5
        );
    }

    #[test]
    fn maneuver_position_beyond_lane_end_exceeds_one() {
        let model = test_model();
        let pos = normalized_maneuver_position(Point::new(264.0, 4.0), &model);
        assert_relative_eq!(pos, 1.4);
    }

    #[test]
    fn lane_at_associates_points_between_borders() {
        let model = test_model();
        assert_eq!(model.lane_at(Point::new(50.0, 1.0)).unwrap().id, LaneId::new("ramp"));
        assert_eq!(model.lane_at(Point::new(50.0, 5.0)).unwrap().id, LaneId::new("m1"));
        assert!(model.lane_at(Point::new(50.0, 9.0)).is_none());
        // Past the ramp extent only the mainline remains.
        assert!(model.lane_at(Point::new(250.0, 1.0)).is_none());
    }

    #[test]
    fn adjacent_mainline_is_found() {
        let model = test_model();
        assert_eq!(model.adjacent_mainline().id, LaneId::new("m1"));
    }

    #[test]
    fn lane_model_requires_exactly_one_ramp() {
        let model = test_model();
        let only_mainline: Vec<Lane> = model
            .lanes
            .iter()
            .filter(|l| l.kind == LaneKind::Mainline)
            .cloned()
            .collect();
        assert!(LaneModel::new(only_mainline, 40.0, 160.0).is_err());
    }

    #[test]
    fn lane_width_measured_through_centerline() {
        let model = test_model();
        let ramp = model.on_ramp();
        assert_relative_eq!(model.lane_width_at(ramp, Point::new(50.0, 0.4)), 3.5);
    }

    #[test]
    fn lane_json_round_trip() {
        let model = test_model();
        let dir = std::env::temp_dir().join("rampmine-geom-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("lanes.json");
        model.save_json(&path).unwrap();
        let loaded = LaneModel::load_json(&path).unwrap();
        assert_eq!(loaded.lanes.len(), model.lanes.len());
        assert_relative_eq!(loaded.merge_start_s, 40.0);
        assert_relative_eq!(loaded.merge_ref_length, 160.0);
        assert_eq!(loaded.on_ramp().id, LaneId::new("ramp"));
        std::fs::remove_file(&path).ok();
    }
}
