//! Exact `(1/p, 1/q)` regions.
//!
//! Every coordinate is a [`BigRational`]; nothing in this module touches
//! floating point, including the SVG export.

mod export;

pub use export::{export_region, parse_region_csv, ExportFormat};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Error, Result};

pub type Q = BigRational;

/// `a/b` as an exact rational.
pub fn q(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

pub fn qi(a: i64) -> Q {
    Q::from_integer(BigInt::from(a))
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let num: BigInt = a.trim().parse().map_err(|_| Error::Config(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = b.trim().parse().map_err(|_| Error::Config(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Config(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(num, den))
}

/// A point `(1/p, 1/q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatPoint {
    pub ip: Q,
    pub iq: Q,
}

impl RatPoint {
    pub fn new(ip: Q, iq: Q) -> Self {
        Self { ip, iq }
    }

    pub fn from_pq(ip: (i64, i64), iq: (i64, i64)) -> Self {
        Self { ip: q(ip.0, ip.1), iq: q(iq.0, iq.1) }
    }

    pub fn in_unit_square(&self) -> bool {
        let (zero, one) = (Q::zero(), Q::one());
        self.ip >= zero && self.ip <= one && self.iq >= zero && self.iq <= one
    }

    pub fn midpoint(&self, other: &RatPoint) -> RatPoint {
        let half = q(1, 2);
        RatPoint { ip: (&self.ip + &other.ip) * &half, iq: (&self.iq + &other.iq) * &half }
    }
}

fn cross(o: &RatPoint, a: &RatPoint, b: &RatPoint) -> Q {
    (&a.ip - &o.ip) * (&b.iq - &o.iq) - (&a.iq - &o.iq) * (&b.ip - &o.ip)
}

/// Whether a boundary piece belongs to the set of bounded exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Included,
    Excluded,
    /// Neither proved nor disproved.
    Unresolved,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Included => "included",
            Status::Excluded => "excluded",
            Status::Unresolved => "unresolved",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "included" => Ok(Status::Included),
            "excluded" => Ok(Status::Excluded),
            "unresolved" => Ok(Status::Unresolved),
            other => Err(Error::Config(format!("unknown closure status {other:?}"))),
        }
    }

    fn severity(self) -> u8 {
        match self {
            Status::Included => 0,
            Status::Unresolved => 1,
            Status::Excluded => 2,
        }
    }
}

/// Strong type `L^p → L^q`, or restricted weak type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strong,
    RestrictedWeak,
}

/// Closure flags of one boundary piece in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Closure {
    pub strong: Status,
    pub rwt: Status,
}

impl Closure {
    pub const CLOSED: Closure = Closure { strong: Status::Included, rwt: Status::Included };

    pub fn get(&self, mode: Mode) -> Status {
        match mode {
            Mode::Strong => self.strong,
            Mode::RestrictedWeak => self.rwt,
        }
    }

    fn worst(a: Closure, b: Closure) -> Closure {
        let pick = |x: Status, y: Status| if x.severity() >= y.severity() { x } else { y };
        Closure { strong: pick(a.strong, b.strong), rwt: pick(a.rwt, b.rwt) }
    }
}

/// Convex polygon with counterclockwise labeled vertices; edge `k` runs
/// from vertex `k` to vertex `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub vertices: Vec<RatPoint>,
    pub labels: Vec<String>,
    pub vertex_closure: Vec<Closure>,
    pub edge_closure: Vec<Closure>,
    pub notes: Vec<String>,
}

/// Where a point sits relative to a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Edge(usize),
    Vertex(usize),
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub location: Location,
    pub status: Status,
}

impl Classification {
    pub fn included(&self) -> bool {
        self.status == Status::Included
    }
}

impl Region {
    pub fn vertex(&self, label: &str) -> Option<&RatPoint> {
        self.labels.iter().position(|l| l == label || l.split('=').any(|p| p == label)).map(|k| &self.vertices[k])
    }

    /// No cross product of consecutive edges is negative. A zero means a
    /// labeled vertex sitting inside a straight edge, which happens for the
    /// maximal region when `m = 2n − 1`.
    pub fn is_convex(&self) -> bool {
        let k = self.vertices.len();
        if k < 3 {
            return true;
        }
        let crosses: Vec<Q> = (0..k).map(|i| cross(&self.vertices[i], &self.vertices[(i + 1) % k], &self.vertices[(i + 2) % k])).collect();
        crosses.iter().all(|c| !c.is_negative()) && crosses.iter().any(|c| c.is_positive())
    }

    pub fn contains(&self, pt: &RatPoint, mode: Mode) -> Classification {
        let k = self.vertices.len();
        if let Some(i) = self.vertices.iter().position(|v| v == pt) {
            return Classification { location: Location::Vertex(i), status: self.vertex_closure[i].get(mode) };
        }
        let mut on_edge = None;
        for i in 0..k {
            let (a, b) = (&self.vertices[i], &self.vertices[(i + 1) % k]);
            let c = cross(a, b, pt);
            if c.is_negative() {
                return Classification { location: Location::Outside, status: Status::Excluded };
            }
            if c.is_zero() {
                let within = (&pt.ip - &a.ip) * (&b.ip - &a.ip) + (&pt.iq - &a.iq) * (&b.iq - &a.iq);
                let len2 = (&b.ip - &a.ip) * (&b.ip - &a.ip) + (&b.iq - &a.iq) * (&b.iq - &a.iq);
                if within.is_positive() && within < len2 {
                    on_edge = Some(i);
                } else {
                    return Classification { location: Location::Outside, status: Status::Excluded };
                }
            }
        }
        match on_edge {
            Some(i) => Classification { location: Location::Edge(i), status: self.edge_closure[i].get(mode) },
            None => Classification { location: Location::Interior, status: Status::Included },
        }
    }

    /// Merges coincident consecutive vertices; the merged vertex keeps the
    /// more restrictive closure and the edge between them disappears.
    fn dedup(mut self) -> Self {
        let mut i = 0;
        while self.vertices.len() > 1 && i < self.vertices.len() {
            let j = (i + 1) % self.vertices.len();
            if self.vertices[i] == self.vertices[j] {
                let merged = Closure::worst(self.vertex_closure[i], self.vertex_closure[j]);
                let label = format!("{}={}", self.labels[i], self.labels[j]);
                self.vertex_closure[i] = merged;
                self.labels[i] = label;
                self.vertices.remove(j);
                self.vertex_closure.remove(j);
                self.labels.remove(j);
                self.edge_closure.remove(i);
                if j < i {
                    i -= 1;
                }
            } else {
                i += 1;
            }
        }
        self
    }
}

/// The four corners `Q₁..Q₄` of the maximal-operator quadrilateral.
pub fn maximal_corners(n: u32, m: u32) -> [RatPoint; 4] {
    let (n, m) = (n as i64, m as i64);
    let d = 2 * n + m;
    let big = d * d + (d + 1) * m + 1;
    [
        RatPoint::new(qi(0), qi(0)),
        RatPoint::new(q(d - m - 1, d - m), q(d - m - 1, d - m)),
        RatPoint::new(q(d - 1, d + m), q(m + 1, d + m)),
        RatPoint::new(q(d * (d - 1), big), q((m + 1) * (d - 1), big)),
    ]
}

/// The Heisenberg-group corners for `m = 1`, written in terms of `n` only.
pub fn heisenberg_corners(n: u32) -> [RatPoint; 4] {
    let n = n as i64;
    let den = 2 * n * n + 3 * n + 2;
    [
        RatPoint::new(qi(0), qi(0)),
        RatPoint::new(q(2 * n - 1, 2 * n), q(2 * n - 1, 2 * n)),
        RatPoint::new(q(n, n + 1), q(1, n + 1)),
        RatPoint::new(q(2 * n * n + n, den), q(2 * n, den)),
    ]
}

/// Region of `(1/p, 1/q)` for the local maximal operator.
///
/// Strong type holds on the interior, on `[Q₁,Q₂)`, `[Q₁,Q₄)`, `(Q₂,Q₃)` and
/// `(Q₃,Q₄)`; the whole closed quadrilateral is of restricted weak type. At
/// `Q₂` the `L^p` bound fails on Heisenberg groups. For `n = 1` the theorem
/// does not apply; the polygon is still produced (`Q₂ = Q₃`) and flagged.
pub fn maximal_region(n: u32, m: u32) -> Result<Region> {
    if n == 0 || m == 0 {
        return Err(domain("n and m must be positive"));
    }
    let [q1, q2, q3, q4] = maximal_corners(n, m);
    let rwt = Status::Included;
    let q2_strong = if m == 1 { Status::Excluded } else { Status::Unresolved };
    let mut notes = Vec::new();
    if n < 2 {
        notes.push("n < 2 lies outside the theorem's scope; region computed from the same formulas".to_string());
    }
    let region = Region {
        name: format!("maximal n={n} m={m}"),
        vertices: vec![q1, q4, q3, q2],
        labels: vec!["Q1".into(), "Q4".into(), "Q3".into(), "Q2".into()],
        vertex_closure: vec![
            Closure { strong: Status::Included, rwt },
            Closure { strong: Status::Unresolved, rwt },
            Closure { strong: Status::Unresolved, rwt },
            Closure { strong: q2_strong, rwt },
        ],
        edge_closure: vec![Closure::CLOSED; 4],
        notes,
    };
    Ok(region.dedup())
}

/// Region for the single averaging operator `f ↦ f * μ^Λ`.
pub fn averaging_region(n: u32, m: u32) -> Result<Region> {
    if n == 0 || m == 0 {
        return Err(domain("n and m must be positive"));
    }
    let (ni, mi) = (n as i64, m as i64);
    if mi > 2 * ni - 1 {
        return Err(domain(format!("m = {m} exceeds 2n - 1 = {}; no Métivier group of this shape carries the theorem", 2 * n - 1)));
    }
    let p1 = RatPoint::new(qi(0), qi(0));
    let p2 = RatPoint::new(qi(1), qi(1));
    if mi <= 2 * ni - 2 {
        let p3 = RatPoint::new(q(2 * ni + mi, 2 * ni + 2 * mi + 1), q(mi + 1, 2 * ni + 2 * mi + 1));
        let mut p3c = Closure::CLOSED;
        let mut notes = Vec::new();
        if mi == 2 * ni - 2 {
            p3c = Closure { strong: Status::Unresolved, rwt: Status::Unresolved };
            notes.push("endpoint P3 is an open question for m = 2n - 2".to_string());
        }
        return Ok(Region {
            name: format!("averaging n={n} m={m}"),
            vertices: vec![p1, p3, p2],
            labels: vec!["P1".into(), "P3".into(), "P2".into()],
            vertex_closure: vec![Closure::CLOSED, p3c, Closure::CLOSED],
            edge_closure: vec![Closure::CLOSED; 3],
            notes,
        });
    }
    let m = mi;
    let pts = vec![
        (p1, "P1"),
        (p2, "P2"),
        (RatPoint::new(q(4 * m * m + 3 * m + 1, 6 * m * m + 5 * m + 1), q(m + 1, 3 * m + 1)), "A"),
        (RatPoint::new(q(6 * m + 1, 9 * m + 3), q(3 * m + 2, 9 * m + 3)), "B"),
        (RatPoint::new(q(2 * m, 3 * m + 1), q(2 * m * m + 2 * m, 6 * m * m + 5 * m + 1)), "C"),
    ];
    let hull = convex_hull(pts);
    let mut notes = Vec::new();
    if m != 1 {
        notes.push("sharpness of this region is only established for m = 1".to_string());
    }
    Ok(Region {
        name: format!("averaging n={n} m={m}"),
        labels: hull.iter().map(|(_, l)| l.to_string()).collect(),
        vertex_closure: vec![Closure::CLOSED; hull.len()],
        edge_closure: vec![Closure::CLOSED; hull.len()],
        vertices: hull.into_iter().map(|(p, _)| p).collect(),
        notes,
    })
}

/// Counterclockwise hull starting from the lowest-leftmost point; collinear
/// points are dropped.
pub fn convex_hull<L: Clone>(mut pts: Vec<(RatPoint, L)>) -> Vec<(RatPoint, L)> {
    pts.sort_by(|a, b| a.0.ip.cmp(&b.0.ip).then(a.0.iq.cmp(&b.0.iq)));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(RatPoint, L)> = Vec::new();
    for p in pts.iter() {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2].0, &lower[lower.len() - 1].0, &p.0).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<(RatPoint, L)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2].0, &upper[upper.len() - 1].0, &p.0).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Bourgain's interpolation: with `ϑ = a₀/(a₀+a₁)`, returns
/// `(1−ϑ)(1/p₀, 1/q₀) + ϑ(1/p₁, 1/q₁)`.
pub fn bourgain_vertex(p0: &RatPoint, a0: &Q, p1: &RatPoint, a1: &Q) -> Result<RatPoint> {
    let sum = a0 + a1;
    if sum.is_zero() {
        return Err(Error::Degenerate("a0 + a1 = 0".into()));
    }
    if !a0.is_positive() || !a1.is_positive() {
        return Err(domain("Bourgain interpolation needs positive exponents a0, a1"));
    }
    let theta = a0 / &sum;
    let one_minus = Q::one() - &theta;
    Ok(RatPoint::new(&one_minus * &p0.ip + &theta * &p1.ip, &one_minus * &p0.iq + &theta * &p1.iq))
}

/// The two endpoint estimates that interpolate to `Q₄`: `(1, 0)` with gain
/// `m + 1`, and the `L² → L^{q₅}` bound, `q₅ = 2(d+1)/(d−1)`, with loss
/// `d/q₅ − (m+1)/2`.
pub fn q4_from_interpolation(n: u32, m: u32) -> Result<RatPoint> {
    let (n, m) = (n as i64, m as i64);
    let d = 2 * n + m;
    let inv_q5 = q(d - 1, 2 * (d + 1));
    let a1 = qi(d) * &inv_q5 - q(m + 1, 2);
    bourgain_vertex(&RatPoint::new(qi(1), qi(0)), &qi(m + 1), &RatPoint::new(q(1, 2), inv_q5), &a1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::radon_hurwitz;

    fn pts(r: &Region) -> Vec<RatPoint> {
        let mut v = r.vertices.clone();
        v.sort_by(|a, b| a.ip.cmp(&b.ip).then(a.iq.cmp(&b.iq)));
        v
    }

    #[test]
    fn maximal_h2() {
        let r = maximal_region(2, 1).unwrap();
        assert_eq!(r.vertex("Q1").unwrap(), &RatPoint::from_pq((0, 1), (0, 1)));
        assert_eq!(r.vertex("Q2").unwrap(), &RatPoint::from_pq((3, 4), (3, 4)));
        assert_eq!(r.vertex("Q3").unwrap(), &RatPoint::from_pq((2, 3), (1, 3)));
        assert_eq!(r.vertex("Q4").unwrap(), &RatPoint::from_pq((5, 8), (1, 4)));
        assert!(r.is_convex());
    }

    #[test]
    fn general_formula_specializes() {
        for n in 2..=6 {
            assert_eq!(maximal_corners(n, 1), heisenberg_corners(n));
        }
    }

    #[test]
    fn convex_for_all_small_shapes() {
        for n in 1..=8u32 {
            for m in (1..=7).filter(|&m| (m as usize) < radon_hurwitz(2 * n as usize)) {
                let r = maximal_region(n, m).unwrap();
                assert!(r.is_convex(), "maximal n={n} m={m}");
                assert!(r.vertices.iter().all(RatPoint::in_unit_square));
                if m <= 2 * n - 1 {
                    assert!(averaging_region(n, m).unwrap().is_convex(), "averaging n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn inadmissible_shapes_can_fail_convexity() {
        assert!(!maximal_region(2, 5).unwrap().is_convex());
        // m = 2n − 1: Q₃ sits on the segment Q₄Q₂
        let r = maximal_region(2, 3).unwrap();
        assert!(r.is_convex());
        let q3 = r.vertex("Q3").unwrap();
        assert!(cross(r.vertex("Q4").unwrap(), q3, r.vertex("Q2").unwrap()).is_zero());
    }

    #[test]
    fn classification() {
        let r = maximal_region(2, 1).unwrap();
        let q1 = r.vertex("Q1").unwrap().clone();
        let q2 = r.vertex("Q2").unwrap().clone();
        let q3 = r.vertex("Q3").unwrap().clone();
        let c = r.contains(&q1, Mode::Strong);
        assert!(matches!(c.location, Location::Vertex(_)) && c.included());
        let c = r.contains(&q2, Mode::Strong);
        assert_eq!(c.status, Status::Excluded);
        assert!(r.contains(&q2, Mode::RestrictedWeak).included());
        assert_eq!(r.contains(&q1.midpoint(&q3), Mode::Strong).location, Location::Interior);
        let mid23 = q2.midpoint(&q3);
        assert!(matches!(r.contains(&mid23, Mode::Strong).location, Location::Edge(_)));
        assert!(r.contains(&mid23, Mode::Strong).included());
        assert_eq!(r.contains(&RatPoint::from_pq((9, 10), (1, 10)), Mode::RestrictedWeak).location, Location::Outside);
        // collinear with an edge but beyond its end
        assert_eq!(r.contains(&RatPoint::from_pq((9, 10), (9, 10)), Mode::Strong).location, Location::Outside);
    }

    #[test]
    fn averaging_shapes() {
        let r = averaging_region(2, 1).unwrap();
        assert_eq!(r.vertex("P3").unwrap(), &RatPoint::from_pq((5, 7), (2, 7)));
        let t = averaging_region(1, 1).unwrap();
        let expected = vec![
            RatPoint::from_pq((0, 1), (0, 1)),
            RatPoint::from_pq((1, 2), (1, 3)),
            RatPoint::from_pq((2, 3), (1, 2)),
            RatPoint::from_pq((1, 1), (1, 1)),
        ];
        assert_eq!(pts(&t), expected);
        let mid = RatPoint::from_pq((7, 12), (5, 12));
        assert!(matches!(t.contains(&mid, Mode::Strong).location, Location::Edge(_)));
        assert!(averaging_region(1, 2).is_err());
        let r = averaging_region(2, 2).unwrap();
        assert_eq!(r.contains(r.vertex("P3").unwrap(), Mode::Strong).status, Status::Unresolved);
        assert!(averaging_region(4, 7).unwrap().vertices.len() == 5);
    }

    #[test]
    fn degenerate_quadrilateral() {
        let r = maximal_region(1, 1).unwrap();
        assert_eq!(r.vertices.len(), 3);
        assert!(r.labels.contains(&"Q3=Q2".to_string()));
        assert!(r.is_convex());
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn bourgain() {
        for n in 2..=4 {
            for m in 1..=3 {
                assert_eq!(&q4_from_interpolation(n, m).unwrap(), maximal_region(n, m).unwrap().vertex("Q4").unwrap());
            }
        }
        let a = RatPoint::from_pq((1, 1), (0, 1));
        let b = RatPoint::from_pq((1, 2), (1, 2));
        assert_eq!(bourgain_vertex(&a, &qi(3), &b, &qi(3)).unwrap(), a.midpoint(&b));
        assert!(bourgain_vertex(&a, &qi(1), &b, &qi(-1)).is_err());
        // Q₂ from the (1,1) estimate with gain 1 and the L² one with loss (d−m−2)/2
        for n in 2..=5i64 {
            let d = 2 * n + 1;
            let q2 = bourgain_vertex(&RatPoint::from_pq((1, 1), (1, 1)), &qi(1), &b, &q(d - 3, 2)).unwrap();
            assert_eq!(q2, maximal_corners(n as u32, 1)[1]);
        }
    }
}
